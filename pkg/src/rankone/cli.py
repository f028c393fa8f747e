"""Command line front end.

Every command prints (or writes with --out) a deterministic document: a
JSON body with a metadata object, or a CSV whose first line is a JSON
metadata comment.  Identical invocations produce identical bytes; there
are no timestamps.  All persisted numbers are exact "num/den" strings,
and any decimal field is named *_approx and rounded half-even to 12
significant digits.

Exit codes: 0 success, 2 invalid request (bad flags or a validation
refusal), 3 orbit escaped the stage budget, 4 unexpected internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .averaging import WeightSequence, average_apply, flatness, l2_deviation
from .construction import ConstructionSpec, build_stage
from .errors import OrbitEscaped, SpecError
from .flow import FlowSkeletonSpec, band_masses, windowed_return_flow
from .joinings import (
    BlockIndex,
    BlockMassMatrix,
    columns_and_F,
    dispersion_experiment,
    empirical_joining,
    graph_blocks,
    light_blocks,
    di_estimate,
    product_blocks,
    trivialization_check,
)
from .measure import MeasureBound, StepFunction
from .persist import (
    approx_str,
    dump_stage,
    frac_str,
    meta_line,
    parse_frac,
    render_json,
    spec_hash,
)
from .stats import correlation_series, return_profile
from .transform import Cursor

_PRESET_NAMES = ("odometer", "staircase", "chacon")


def load_spec(token: str, stage_budget: Optional[int] = None) -> ConstructionSpec:
    """Resolve a --spec argument: a JSON file path, a preset name, or
    random:SEED."""
    p = Path(token)
    if p.is_file():
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise SpecError(f"spec file {token}: invalid JSON: {exc}") from None
        spec = ConstructionSpec.from_json(data)
    elif token in _PRESET_NAMES:
        spec = getattr(ConstructionSpec, token)()
    elif token.startswith("random:"):
        try:
            seed = int(token.split(":", 1)[1])
        except ValueError:
            raise SpecError(f"bad random spec {token!r}, expected random:SEED") from None
        spec = ConstructionSpec.random_spacers(seed)
    else:
        raise SpecError(
            f"spec {token!r} is neither a file nor one of "
            f"{', '.join(_PRESET_NAMES)}, random:SEED")
    if stage_budget is not None:
        if stage_budget < 1:
            raise SpecError("--stage-budget must be >= 1")
        spec = replace(spec, max_stage=stage_budget)
    return spec


def parse_int_list(text: str, flag: str) -> List[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip() != ""]
    except ValueError:
        raise SpecError(f"{flag} expects comma separated integers, got {text!r}") from None
    if not vals:
        raise SpecError(f"{flag} is empty")
    return vals


def parse_frac_list(text: str, flag: str) -> List[Fraction]:
    vals = [parse_frac(t) for t in text.split(",") if t.strip() != ""]
    if not vals:
        raise SpecError(f"{flag} is empty")
    return vals


def level_set(spec: ConstructionSpec, j: int, levels: Sequence[int]):
    st = build_stage(spec, j)
    for i in levels:
        if not 0 <= i < st.height:
            raise SpecError(f"level {i} outside stage {j} (height {st.height})")
    return st.levels_set(levels)


def bound_json(b: MeasureBound) -> Dict[str, str]:
    return {"lo": frac_str(b.lo), "hi": frac_str(b.hi),
            "lo_approx": approx_str(b.lo), "hi_approx": approx_str(b.hi)}


def _require(args: argparse.Namespace, names: Sequence[str], context: str) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join(
            ("--" + n.replace("_", "-")) if len(n) > 1 else ("-" + n)
            for n in missing)
        raise SpecError(f"{context} requires {flags}")


# ----------------------------------------------------------------- matrices

def matrix_from_args(args: argparse.Namespace, j: Optional[int] = None,
                     ) -> BlockMassMatrix:
    """Build the block-mass matrix a subcommand asked for.

    product needs --spec-a/--spec-b, graph needs --spec/--k, empirical
    needs --spec-a/--spec-b/--x-a/--x-b/-N.  The stage defaults to --j but
    sweep commands may override it.
    """
    j = args.j if j is None else j
    if j is None:
        raise SpecError("missing --j")
    if args.res is None:
        raise SpecError("missing --res")
    budget = args.stage_budget
    if args.kind == "product":
        _require(args, ["spec_a", "spec_b"], "--kind product")
        return product_blocks(load_spec(args.spec_a, budget),
                              load_spec(args.spec_b, budget), j, args.res)
    if args.kind == "graph":
        _require(args, ["spec", "k"], "--kind graph")
        return graph_blocks(load_spec(args.spec, budget), args.k, j, args.res)
    if args.kind == "empirical":
        _require(args, ["spec_a", "spec_b", "x_a", "x_b", "N"], "--kind empirical")
        return empirical_joining(
            load_spec(args.spec_a, budget), load_spec(args.spec_b, budget),
            parse_frac(args.x_a), parse_frac(args.x_b), args.N, j, args.res,
            step_a=args.step_a, step_b=args.step_b)
    raise SpecError(f"unknown matrix kind {args.kind!r}")


def matrix_meta(m: BlockMassMatrix) -> Dict[str, object]:
    meta = {"kind": m.kind, "j": m.j, "J": m.meta.get("J"),
            "h_a": m.h_a, "h_b": m.h_b,
            "N": m.meta.get("N"), "seeds": m.meta.get("seeds"),
            "residual": frac_str(m.residual),
            "spec_a": spec_hash(m.spec_a), "spec_b": spec_hash(m.spec_b)}
    if "k" in m.meta:
        meta["k"] = m.meta["k"]
    return meta


# ----------------------------------------------------------------- handlers

def cmd_build(args: argparse.Namespace) -> str:
    spec = load_spec(args.spec, args.stage_budget)
    if args.stage < 1:
        raise SpecError("--stage must be >= 1")
    return dump_stage(spec, args.stage) + "\n"


def cmd_orbit(args: argparse.Namespace) -> str:
    spec = load_spec(args.spec, args.stage_budget)
    x = parse_frac(args.x)
    if args.steps < 0:
        raise SpecError("--steps must be nonnegative")
    cur = Cursor(spec, x)
    points = [frac_str(cur.x)]
    for k in range(args.steps):
        cur.step_forward(k)
        points.append(frac_str(cur.x))
    return render_json(points, command="orbit", spec=spec_hash(spec),
                       x=frac_str(x), steps=args.steps,
                       refinements=cur.refinements) + "\n"


def cmd_return_profile(args: argparse.Namespace) -> str:
    spec = load_spec(args.spec, args.stage_budget)
    prof = return_profile(spec, args.j, args.res, args.zmax)
    meta = {"command": "return-profile", "spec": spec_hash(spec), "j": args.j,
            "J": args.res, "zmax": args.zmax,
            "degenerate": sorted(prof.degenerate)}
    if args.format == "json":
        data = {str(z): bound_json(b) for z, b in sorted(prof.values.items())}
        return render_json(data, **meta) + "\n"
    rows = [(z, b.lo.numerator, b.lo.denominator, b.hi.numerator, b.hi.denominator)
            for z, b in sorted(prof.values.items())]
    return csv_text(("z", "lo_num", "lo_den", "hi_num", "hi_den"), rows, meta)


def cmd_correlate(args: argparse.Namespace) -> str:
    spec = load_spec(args.spec, args.stage_budget)
    A = level_set(spec, args.j, parse_int_list(args.A, "--A"))
    B = level_set(spec, args.j, parse_int_list(args.B, "--B"))
    series = correlation_series(spec, A, B, args.mmax, args.res)
    meta = {"command": "correlate", "spec": spec_hash(spec), "j": args.j,
            "J": args.res, "mmax": args.mmax,
            "target": frac_str(series.target),
            "normalization": frac_str(series.normalization)}
    if args.format == "csv":
        rows = [(m, b.lo.numerator, b.lo.denominator, b.hi.numerator, b.hi.denominator)
                for m, b in sorted(series.values.items())]
        return csv_text(("m", "lo_num", "lo_den", "hi_num", "hi_den"), rows, meta)
    data = {str(m): bound_json(b) for m, b in sorted(series.values.items())}
    return render_json(data, **meta) + "\n"


def cmd_blum_hanson(args: argparse.Namespace) -> str:
    spec = load_spec(args.spec, args.stage_budget)
    try:
        raw = json.loads(Path(args.weights).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read weights file {args.weights}: {exc}") from None
    if not isinstance(raw, dict):
        raise SpecError("weights file must be a JSON object mapping z to num/den")
    try:
        w = WeightSequence.from_dict({int(z): parse_frac(str(v))
                                      for z, v in raw.items()})
    except ValueError as exc:
        raise SpecError(f"bad weights file: {exc}") from None
    F = level_set(spec, args.j, parse_int_list(args.f, "--f"))
    f = StepFunction.indicator(F)
    M = build_stage(spec, args.res).total
    Pf, escaped = average_apply(spec, w, f, args.res)
    mean = f.integral() / M
    dev = l2_deviation(Pf, mean, escaped, M, sup_f=1)
    data = {"deviation_sq": bound_json(dev), "mean": frac_str(mean),
            "mean_approx": approx_str(mean),
            "escaped_hi": frac_str(escaped.hi),
            "flatness": frac_str(flatness(w, 0))}
    return render_json(data, command="blum-hanson", spec=spec_hash(spec),
                       j=args.j, J=args.res,
                       support=list(w.support)) + "\n"


def cmd_joining_blocks(args: argparse.Namespace) -> str:
    m = matrix_from_args(args)
    meta = matrix_meta(m)
    meta["command"] = "joining blocks"
    if args.format == "json":
        data = {f"{z.z1},{z.z2}": frac_str(v)
                for z, v in sorted(m.masses.items())}
        return render_json(data, **meta) + "\n"
    rows = [(z.z1, z.z2, v.numerator, v.denominator)
            for z, v in sorted(m.masses.items())]
    return csv_text(("z1", "z2", "num", "den"), rows, meta)


def cmd_joining_light(args: argparse.Namespace) -> str:
    m = matrix_from_args(args)
    rep = light_blocks(m, parse_frac(args.epsilon))
    data = {"epsilon": frac_str(rep.epsilon),
            "covered_mass": frac_str(rep.covered_mass),
            "covered_mass_approx": approx_str(rep.covered_mass),
            "total_blocks": rep.total_blocks,
            "heavy_count": rep.heavy_count,
            "light": [[z.z1, z.z2] for z in sorted(rep.light_set)]}
    meta = matrix_meta(m)
    meta["command"] = "joining light"
    return render_json(data, **meta) + "\n"


def cmd_joining_di(args: argparse.Namespace) -> str:
    stages = parse_int_list(args.stages, "--stages")
    epsilons = parse_frac_list(args.epsilons, "--epsilons")
    reports = []
    grid = []
    for j in stages:
        m = matrix_from_args(args, j=j)
        for eps in epsilons:
            rep = light_blocks(m, eps)
            reports.append(rep)
            grid.append({"j": j, "epsilon": frac_str(eps),
                         "covered_mass": frac_str(rep.covered_mass)})
    proxy = di_estimate(reports)
    data = {"proxy": frac_str(proxy), "proxy_approx": approx_str(proxy),
            "grid": grid}
    return render_json(data, command="joining di", kind=args.kind,
                       stages=stages,
                       epsilons=[frac_str(e) for e in epsilons],
                       J=args.res) + "\n"


def cmd_joining_disperse(args: argparse.Namespace) -> str:
    budget = args.stage_budget
    spec_a = load_spec(args.spec_a, budget)
    spec_b = load_spec(args.spec_b, budget)
    z_pair = parse_int_list(args.z, "--z")
    if len(z_pair) != 2:
        raise SpecError("--z expects exactly two integers Z1,Z2")
    rows = dispersion_experiment(
        spec_a, spec_b, parse_frac(args.x_a), parse_frac(args.x_b), args.N,
        BlockIndex(*z_pair), parse_int_list(args.n_list, "--n-list"),
        args.j, args.res, step_a=args.step_a, step_b=args.step_b)
    data = [{"n": r.n, "count": r.conditioning_count,
             "max_mass": frac_str(r.max_mass),
             "residual": frac_str(r.residual),
             "histogram": {f"{z.z1},{z.z2}": frac_str(v)
                           for z, v in sorted(r.histogram.items())}}
            for r in rows]
    return render_json(data, command="joining disperse",
                       spec_a=spec_hash(spec_a), spec_b=spec_hash(spec_b),
                       N=args.N, z=list(z_pair), j=args.j, J=args.res) + "\n"


def cmd_joining_trivialize(args: argparse.Namespace) -> str:
    m = matrix_from_args(args)
    F = columns_and_F(m, parse_frac(args.delta), args.w,
                      parse_int_list(args.shifts, "--shifts"))
    A = level_set(m.spec_a, args.k2, parse_int_list(args.A, "--A"))
    B = level_set(m.spec_b, args.k2, parse_int_list(args.B, "--B"))
    rec = trivialization_check(m, F, A, B, args.k2)
    data = {"conditional": frac_str(rec.conditional),
            "reference": frac_str(rec.reference),
            "gap": frac_str(rec.gap), "gap_approx": approx_str(rec.gap),
            "display_sum": bound_json(rec.display_sum)
            if rec.display_sum is not None else None,
            "display_gap": bound_json(rec.display_gap)
            if rec.display_gap is not None else None,
            "weight_flatness": frac_str(rec.weight_flatness),
            "escape_slack": frac_str(rec.escape_slack)
            if rec.escape_slack is not None else None,
            "nu_F": frac_str(F.nu_F)}
    meta = matrix_meta(m)
    meta.update(command="joining trivialize", k_cond=args.k2)
    return render_json(data, **meta) + "\n"


def cmd_flow_window(args: argparse.Namespace) -> str:
    spec = load_spec(args.spec, args.stage_budget)
    fspec = FlowSkeletonSpec(spec, args.grid, parse_frac(args.alpha))
    rep = windowed_return_flow(fspec, args.j, args.res, range(args.zmax + 1),
                               q=args.q)
    meta = {"command": "flow window", "spec": spec_hash(spec),
            "alpha": frac_str(fspec.alpha), "grid": args.grid,
            "q": rep.q, "j": args.j, "J": args.res,
            "max_lo": frac_str(rep.max_bound.lo),
            "max_hi": frac_str(rep.max_bound.hi)}
    if args.format == "json":
        data = {str(z): bound_json(b) for z, b in sorted(rep.values.items())}
        return render_json(data, **meta) + "\n"
    rows = [(z, b.lo.numerator, b.lo.denominator, b.hi.numerator, b.hi.denominator)
            for z, b in sorted(rep.values.items())]
    return csv_text(("z", "lo_num", "lo_den", "hi_num", "hi_den"), rows, meta)


def cmd_flow_bands(args: argparse.Namespace) -> str:
    spec = load_spec(args.spec, args.stage_budget)
    fspec = FlowSkeletonSpec(spec, args.grid, parse_frac(args.alpha))
    offsets = parse_int_list(args.offsets, "--offsets")
    if args.matrix == "product":
        m = product_blocks(spec, spec, args.j, args.res)
    else:
        _require(args, ["x_a", "x_b", "N"], "--matrix empirical")
        m = empirical_joining(spec, spec, parse_frac(args.x_a),
                              parse_frac(args.x_b), args.N, args.j, args.res,
                              step_a=fspec.alpha_p, step_b=fspec.alpha_q)

    def one(off: int) -> Fraction:
        return band_masses(m, fspec, off, args.side, z_bound=args.zbound)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            masses = list(pool.map(one, offsets))
    else:
        masses = [one(off) for off in offsets]
    meta = matrix_meta(m)
    meta.update(command="flow bands", alpha=frac_str(fspec.alpha),
                grid=args.grid, side=args.side, zbound=args.zbound)
    if args.format == "json":
        data = {str(off): frac_str(v) for off, v in zip(offsets, masses)}
        return render_json(data, **meta) + "\n"
    rows = [(off, v.numerator, v.denominator)
            for off, v in zip(offsets, masses)]
    return csv_text(("offset", "mass_num", "mass_den"), rows, meta)


def csv_text(columns: Sequence[str], rows: Sequence[Sequence[object]],
             meta: Dict[str, object]) -> str:
    lines = [meta_line(**meta), ",".join(columns)]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------- parser

def _common(sub: argparse.ArgumentParser, fmt: Optional[str] = None) -> None:
    sub.add_argument("--out", help="write the document here instead of stdout")
    if fmt is not None:
        sub.add_argument("--format", choices=("csv", "json"), default=fmt,
                         help=f"output format (default {fmt})")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads for sweep commands")
    sub.add_argument("--stage-budget", type=int, default=None,
                     help="cap on construction stages (overrides max_stage)")


def _matrix_flags(sub: argparse.ArgumentParser, with_j: bool = True) -> None:
    sub.add_argument("--kind", choices=("product", "graph", "empirical"),
                     required=True, help="which joining to realize")
    sub.add_argument("--spec", help="base system (graph kind)")
    sub.add_argument("--spec-a", help="first system (product, empirical)")
    sub.add_argument("--spec-b", help="second system (product, empirical)")
    sub.add_argument("--k", type=int, help="power for the graph joining")
    if with_j:
        sub.add_argument("--j", type=int, required=True, help="block stage")
    sub.add_argument("--res", type=int, required=True, help="resolution stage")
    sub.add_argument("--x-a", help="first orbit start NUM/DEN (empirical)")
    sub.add_argument("--x-b", help="second orbit start NUM/DEN (empirical)")
    sub.add_argument("-N", type=int, dest="N", help="tick count (empirical)")
    sub.add_argument("--step-a", type=int, default=1)
    sub.add_argument("--step-b", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rankone",
        description="Exact rational experiments on rank-one "
                    "cutting-and-stacking systems.")
    sp = p.add_subparsers(dest="command", required=True)

    b = sp.add_parser("build", help="serialize construction stages")
    b.add_argument("--spec", required=True)
    b.add_argument("--stage", type=int, required=True)
    _common(b)
    b.set_defaults(handler=cmd_build)

    o = sp.add_parser("orbit", help="iterate a point exactly")
    o.add_argument("--spec", required=True)
    o.add_argument("--x", required=True, help="start NUM/DEN")
    o.add_argument("--steps", type=int, required=True)
    _common(o)
    o.set_defaults(handler=cmd_orbit)

    r = sp.add_parser("return-profile", help="two-sided return time bounds")
    r.add_argument("--spec", required=True)
    r.add_argument("--j", type=int, required=True)
    r.add_argument("--res", type=int, required=True)
    r.add_argument("--zmax", type=int, required=True)
    r.add_argument("--csv", help="alias for --out with csv format")
    _common(r, fmt="csv")
    r.set_defaults(handler=cmd_return_profile)

    c = sp.add_parser("correlate", help="bounds on mu(A meet T^m B)")
    c.add_argument("--spec", required=True)
    c.add_argument("--A", required=True, help="comma separated level indices")
    c.add_argument("--B", required=True, help="comma separated level indices")
    c.add_argument("--mmax", type=int, required=True)
    c.add_argument("--j", type=int, default=1, help="stage the levels refer to")
    c.add_argument("--res", type=int, required=True)
    _common(c, fmt="json")
    c.set_defaults(handler=cmd_correlate)

    bh = sp.add_parser("blum-hanson", help="weighted-average L2 deviation")
    bh.add_argument("--spec", required=True)
    bh.add_argument("--weights", required=True,
                    help="JSON file mapping z to NUM/DEN, summing to 1")
    bh.add_argument("--f", required=True, help="comma separated level indices")
    bh.add_argument("--j", type=int, default=1, help="stage the levels refer to")
    bh.add_argument("--res", type=int, required=True)
    _common(bh)
    bh.set_defaults(handler=cmd_blum_hanson)

    jn = sp.add_parser("joining", help="block-mass matrices and diagnostics")
    jsp = jn.add_subparsers(dest="subcommand", required=True)

    jb = jsp.add_parser("blocks", help="emit the block-mass matrix")
    _matrix_flags(jb)
    _common(jb, fmt="csv")
    jb.set_defaults(handler=cmd_joining_blocks)

    jl = jsp.add_parser("light", help="epsilon-light block report")
    _matrix_flags(jl)
    jl.add_argument("--epsilon", required=True, help="threshold NUM/DEN")
    _common(jl)
    jl.set_defaults(handler=cmd_joining_light)

    jd = jsp.add_parser("di", help="powder-mass proxy over a grid")
    _matrix_flags(jd, with_j=False)
    jd.add_argument("--j", type=int, default=None, help=argparse.SUPPRESS)
    jd.add_argument("--stages", required=True, help="comma separated stages")
    jd.add_argument("--epsilons", required=True,
                    help="comma separated NUM/DEN thresholds")
    _common(jd)
    jd.set_defaults(handler=cmd_joining_di)

    jx = jsp.add_parser("disperse", help="conditioned return dispersion")
    jx.add_argument("--spec-a", required=True)
    jx.add_argument("--spec-b", required=True)
    jx.add_argument("--x-a", required=True)
    jx.add_argument("--x-b", required=True)
    jx.add_argument("-N", type=int, dest="N", required=True)
    jx.add_argument("--z", required=True, help="conditioning block Z1,Z2")
    jx.add_argument("--n-list", required=True, help="comma separated advances")
    jx.add_argument("--j", type=int, required=True)
    jx.add_argument("--res", type=int, required=True)
    jx.add_argument("--step-a", type=int, default=1)
    jx.add_argument("--step-b", type=int, default=1)
    _common(jx)
    jx.set_defaults(handler=cmd_joining_disperse)

    jt = jsp.add_parser("trivialize", help="F-set trivialization check")
    _matrix_flags(jt)
    jt.add_argument("--delta", required=True, help="column slope NUM/DEN")
    jt.add_argument("--w", type=int, required=True, help="column offset")
    jt.add_argument("--shifts", required=True, help="comma separated shifts")
    jt.add_argument("--A", required=True, help="level indices, first system")
    jt.add_argument("--B", required=True, help="level indices, second system")
    jt.add_argument("--cond-stage", type=int, required=True, dest="k2",
                    help="stage the A and B levels refer to")
    _common(jt)
    jt.set_defaults(handler=cmd_joining_trivialize)

    fl = sp.add_parser("flow", help="suspension skeleton diagnostics")
    fsp = fl.add_subparsers(dest="subcommand", required=True)

    fw = fsp.add_parser("window", help="windowed return bounds")
    fw.add_argument("--spec", required=True)
    fw.add_argument("--alpha", required=True, help="speed ratio NUM/DEN > 1")
    fw.add_argument("--grid", type=int, default=1, help="inverse grid step")
    fw.add_argument("--j", type=int, required=True)
    fw.add_argument("--res", type=int, required=True)
    fw.add_argument("--zmax", type=int, required=True)
    fw.add_argument("--q", type=int, default=None,
                    help="window length override (default --grid)")
    _common(fw, fmt="csv")
    fw.set_defaults(handler=cmd_flow_window)

    fb = fsp.add_parser("bands", help="block mass along skeleton bands")
    fb.add_argument("--spec", required=True)
    fb.add_argument("--alpha", required=True, help="speed ratio NUM/DEN > 1")
    fb.add_argument("--grid", type=int, default=1, help="inverse grid step")
    fb.add_argument("--j", type=int, required=True)
    fb.add_argument("--res", type=int, required=True)
    fb.add_argument("--side", choices=("right", "left"), required=True)
    fb.add_argument("--offsets", required=True, help="comma separated offsets")
    fb.add_argument("--zbound", type=int, default=None,
                    help="translation range bound (left side)")
    fb.add_argument("--matrix", choices=("product", "empirical"),
                    default="product", help="which self-joining to weigh")
    fb.add_argument("--x-a", help="first orbit start (empirical matrix)")
    fb.add_argument("--x-b", help="second orbit start (empirical matrix)")
    fb.add_argument("-N", type=int, dest="N", help="ticks (empirical matrix)")
    _common(fb, fmt="csv")
    fb.set_defaults(handler=cmd_flow_bands)

    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        text = args.handler(args)
    except OrbitEscaped as exc:
        print(f"error: {exc}; retry with a larger --stage-budget",
              file=sys.stderr)
        return 3
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    out = getattr(args, "out", None) or getattr(args, "csv", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
