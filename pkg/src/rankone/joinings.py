"""Block partitions of a product system and joining mass accounting.

A block V^(z1,z2) at stage j is the product of level z1 of the first tower
with level z2 of the second.  Matrices of block masses come in three kinds:
the product measure (every block carries the product of level measures), a
graph self-joining along a power shift (mass rides the diagonal band), and
empirical histograms of a paired orbit.  All masses are kept in probability
units relative to the realizing resolution, so mass totals, light-block
thresholds, and covered-mass reports are directly comparable across kinds.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

from .averaging import WeightSequence, average_apply, flatness
from .construction import ConstructionSpec, TowerStage, build_stage
from .errors import EmptyFSetError, SpecError
from .measure import (
    IntervalSet,
    MeasureBound,
    RationalLike,
    StepFunction,
    as_fraction,
    canonicalize,
    set_intersection,
)
from .transform import Cursor, power_image

__all__ = [
    "BlockIndex",
    "BlockMassMatrix",
    "LightBlockReport",
    "ColumnSpec",
    "FSetSpec",
    "DispersionRow",
    "TrivializationRecord",
    "product_blocks",
    "graph_blocks",
    "empirical_joining",
    "light_blocks",
    "di_estimate",
    "dispersion_experiment",
    "light_shifts",
    "columns_and_F",
    "trivialization_check",
]


class BlockIndex(NamedTuple):
    z1: int
    z2: int


@dataclass(frozen=True)
class BlockMassMatrix:
    """Masses of the stage-j blocks of one joining, plus the residual mass
    the block grid does not capture (spacer regions, unresolved overlaps,
    orbit time outside either tower).  Masses + residual = 1 exactly.

    norm_a / norm_b are the ambient measures used to normalize each side;
    base_mass is the second system's stage-j base measure in those units and
    is the reference scale for the light-block threshold.
    """

    kind: str
    j: int
    h_a: int
    h_b: int
    masses: Dict[BlockIndex, Fraction]
    residual: Fraction
    norm_a: Fraction
    norm_b: Fraction
    level_mass_a: Fraction
    level_mass_b: Fraction
    base_mass: Fraction
    spec_a: ConstructionSpec
    spec_b: ConstructionSpec
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        total = self.residual
        for (z1, z2), m in self.masses.items():
            if not (0 <= z1 < self.h_a and 0 <= z2 < self.h_b):
                raise SpecError(f"block index ({z1}, {z2}) out of tower range")
            if m < 0:
                raise SpecError(f"negative block mass at ({z1}, {z2})")
            total += m
        if self.residual < 0:
            raise SpecError("negative residual mass")
        if total != 1:
            raise SpecError(f"block masses + residual sum to {total}, expected 1")

    def mass(self, z: BlockIndex) -> Fraction:
        return self.masses.get(z, Fraction(0))

    @property
    def total_block_mass(self) -> Fraction:
        return 1 - self.residual

    def row_sum(self, z1: int) -> Fraction:
        return sum((m for (a, _), m in self.masses.items() if a == z1), Fraction(0))

    def col_sum(self, z2: int) -> Fraction:
        return sum((m for (_, b), m in self.masses.items() if b == z2), Fraction(0))


def product_blocks(spec_a: ConstructionSpec, spec_b: ConstructionSpec, j: int,
                   J: int) -> BlockMassMatrix:
    """Product-measure block matrix: every block carries the product of the
    two level measures; the residual is the mass of the product space off
    the stage-j tower product."""
    sa, sb = build_stage(spec_a, j), build_stage(spec_b, j)
    Ma, Mb = build_stage(spec_a, J).total, build_stage(spec_b, J).total
    la, lb = sa.width / Ma, sb.width / Mb
    per = la * lb
    masses = {BlockIndex(z1, z2): per
              for z1 in range(sa.height) for z2 in range(sb.height)}
    covered = per * sa.height * sb.height
    return BlockMassMatrix(
        kind="product", j=j, h_a=sa.height, h_b=sb.height, masses=masses,
        residual=1 - covered, norm_a=Ma, norm_b=Mb,
        level_mass_a=la, level_mass_b=lb, base_mass=lb,
        spec_a=spec_a, spec_b=spec_b, meta={"J": J})


def graph_blocks(spec: ConstructionSpec, k: int, j: int, J: int) -> BlockMassMatrix:
    """Self-joining supported on the graph of T^k: block (z1, z2) receives
    mu(T^{z1}E_j intersect T^{z2+k}E_j), resolved combinatorially at stage J
    with unresolved overlap absorbed into the residual (masses are exact
    lower bounds)."""
    st = build_stage(spec, j)
    stJ = build_stage(spec, J)
    occ = stJ.occurrences(j)
    occ_set = set(occ)
    M = stJ.total
    h, hJ = st.height, stJ.height
    w_norm = stJ.width / M
    masses: Dict[BlockIndex, Fraction] = {}
    for delta in range(k - h + 1, k + h):
        plist = [p for p in occ if p + delta in occ_set]
        if not plist:
            continue
        for z2 in range(h):
            z1 = z2 + k - delta
            if not (0 <= z1 < h):
                continue
            cut = hJ - 1 - z2 - k
            if cut < 0:
                continue
            cnt = bisect_right(plist, cut)
            if cnt:
                masses[BlockIndex(z1, z2)] = cnt * w_norm
    covered = sum(masses.values(), Fraction(0))
    lvl = st.width / M
    return BlockMassMatrix(
        kind="graph", j=j, h_a=h, h_b=h, masses=masses, residual=1 - covered,
        norm_a=M, norm_b=M, level_mass_a=lvl, level_mass_b=lvl, base_mass=lvl,
        spec_a=spec, spec_b=spec, meta={"J": J, "k": k})


def empirical_joining(spec_a: ConstructionSpec, spec_b: ConstructionSpec,
                      x_a: RationalLike, x_b: RationalLike, N: int, j: int,
                      J: int, step_a: int = 1, step_b: int = 1) -> BlockMassMatrix:
    """Block-mass histogram of the paired orbit of (x_a, x_b) over N steps.

    Each tick advances the first point by step_a applications and the second
    by step_b (both default 1); the pair's stage-j levels index the block.
    Ticks with either point in spacer mass unborn at stage j count toward
    the residual.  Orbit refinement is capped at stage J; OrbitEscaped
    propagates when the budget is insufficient.
    """
    if N < 1:
        raise SpecError("empirical joining needs N >= 1")
    if step_a < 1 or step_b < 1:
        raise SpecError("step sizes must be >= 1")
    sa, sb = build_stage(spec_a, j), build_stage(spec_b, j)
    ca = Cursor(spec_a, as_fraction(x_a), stage_budget=J)
    cb = Cursor(spec_b, as_fraction(x_b), stage_budget=J)
    ca.refine_to(j)
    cb.refine_to(j)
    counts: Dict[BlockIndex, int] = {}
    outside = 0
    for n in range(N):
        za, zb = ca.level_at(j), cb.level_at(j)
        if za is None or zb is None:
            outside += 1
        else:
            key = BlockIndex(za, zb)
            counts[key] = counts.get(key, 0) + 1
        if n + 1 < N:
            for _ in range(step_a):
                ca.step_forward(n)
            for _ in range(step_b):
                cb.step_forward(n)
    Ra, Rb = ca.stage_obj.stage, cb.stage_obj.stage
    Ma, Mb = build_stage(spec_a, Ra).total, build_stage(spec_b, Rb).total
    masses = {z: Fraction(c, N) for z, c in counts.items()}
    return BlockMassMatrix(
        kind="empirical", j=j, h_a=sa.height, h_b=sb.height, masses=masses,
        residual=Fraction(outside, N), norm_a=Ma, norm_b=Mb,
        level_mass_a=sa.width / Ma, level_mass_b=sb.width / Mb,
        base_mass=sb.width / Mb, spec_a=spec_a, spec_b=spec_b,
        meta={"J": J, "N": N, "seeds": (str(as_fraction(x_a)), str(as_fraction(x_b))),
              "step_a": step_a, "step_b": step_b,
              "deepest_stage_a": Ra, "deepest_stage_b": Rb})


@dataclass(frozen=True)
class LightBlockReport:
    """Blocks whose mass falls strictly below epsilon times the base
    measure, and the total joining mass they carry."""

    epsilon: Fraction
    j: int
    kind: str
    light_set: FrozenSet[BlockIndex]
    covered_mass: Fraction
    total_blocks: int

    @property
    def heavy_count(self) -> int:
        return self.total_blocks - len(self.light_set)


def light_blocks(m: BlockMassMatrix, epsilon: RationalLike) -> LightBlockReport:
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise SpecError("epsilon must be positive")
    threshold = eps * m.base_mass
    light = []
    covered = Fraction(0)
    for z1 in range(m.h_a):
        for z2 in range(m.h_b):
            z = BlockIndex(z1, z2)
            mass = m.mass(z)
            if mass < threshold:
                light.append(z)
                covered += mass
    return LightBlockReport(epsilon=eps, j=m.j, kind=m.kind,
                            light_set=frozenset(light), covered_mass=covered,
                            total_blocks=m.h_a * m.h_b)


def di_estimate(reports: Sequence[LightBlockReport]) -> Fraction:
    """Finite-stage proxy for the powder mass: min over the epsilon schedule
    of the largest covered light mass seen at any reported stage.

    This stands in for a limit of a limsup; it is a report on the computed
    (epsilon, j) table, not the limit itself.  Requires at least two
    distinct epsilons and two distinct stages.
    """
    if not reports:
        raise SpecError("di_estimate needs at least one report")
    kinds = {r.kind for r in reports}
    if len(kinds) > 1:
        raise SpecError(f"reports mix joining kinds: {sorted(kinds)}")
    by_eps: Dict[Fraction, List[LightBlockReport]] = {}
    for r in reports:
        by_eps.setdefault(r.epsilon, []).append(r)
    if len(by_eps) < 2:
        raise SpecError("epsilon schedule must contain at least 2 distinct values")
    if len({r.j for r in reports}) < 2:
        raise SpecError("reports must cover at least 2 stages")
    return min(max(r.covered_mass for r in group) for group in by_eps.values())


@dataclass(frozen=True)
class DispersionRow:
    """Conditional block distribution after advancing the conditioned times
    by n ticks."""

    n: int
    conditioning_count: int
    histogram: Dict[BlockIndex, Fraction]
    max_mass: Fraction
    residual: Fraction


def dispersion_experiment(spec_a: ConstructionSpec, spec_b: ConstructionSpec,
                          x_a: RationalLike, x_b: RationalLike, N: int,
                          z: BlockIndex, n_list: Sequence[int], j: int, J: int,
                          step_a: int = 1, step_b: int = 1,
                          ) -> Tuple[DispersionRow, ...]:
    """Condition the paired orbit on visits to block z, advance those times
    by each n, and histogram where the conditioned mass lands.

    A heavy source block whose conditional mass disperses over several
    blocks under some advance n is the spreading mechanism this probes.
    """
    if N < 1:
        raise SpecError("dispersion experiment needs N >= 1")
    if not n_list:
        raise SpecError("n_list must be nonempty")
    z = BlockIndex(*z)
    extra = max(max(n_list), 0)
    ca = Cursor(spec_a, as_fraction(x_a), stage_budget=J)
    cb = Cursor(spec_b, as_fraction(x_b), stage_budget=J)
    ca.refine_to(j)
    cb.refine_to(j)
    track: List[Optional[BlockIndex]] = []
    for n in range(N + extra):
        za, zb = ca.level_at(j), cb.level_at(j)
        track.append(BlockIndex(za, zb) if za is not None and zb is not None
                     else None)
        if n + 1 < N + extra:
            for _ in range(step_a):
                ca.step_forward(n)
            for _ in range(step_b):
                cb.step_forward(n)
    hits = [m for m in range(N) if track[m] == z]
    if not hits:
        raise SpecError(f"conditioning set empty: block {tuple(z)} has count 0 "
                        f"in the first {N} ticks")
    rows = []
    for n in n_list:
        counts: Dict[BlockIndex, int] = {}
        off = 0
        used = 0
        for m in hits:
            t = m + n
            if not (0 <= t < len(track)):
                continue
            used += 1
            b = track[t]
            if b is None:
                off += 1
            else:
                counts[b] = counts.get(b, 0) + 1
        if used == 0:
            raise SpecError(f"advance n={n} leaves no conditioned times in range")
        hist = {b: Fraction(c, used) for b, c in sorted(counts.items())}
        rows.append(DispersionRow(
            n=n, conditioning_count=used, histogram=hist,
            max_mass=max(hist.values(), default=Fraction(0)),
            residual=Fraction(off, used)))
    return tuple(rows)


@dataclass(frozen=True)
class ColumnSpec:
    """Diagonal strip of blocks: (w+i, i) for i = 0..floor(delta*h_j)."""

    delta: Fraction
    w: int
    j: int
    members: Tuple[BlockIndex, ...]


def _make_column(m: BlockMassMatrix, delta: RationalLike, w: int) -> ColumnSpec:
    d = as_fraction(delta)
    if not (0 < d < 1):
        raise SpecError("delta must lie strictly between 0 and 1")
    if w < 0:
        raise SpecError("column offset w must be nonnegative")
    i_max = int(d * m.h_b)
    if w + i_max > m.h_a - 1:
        raise SpecError(
            f"column blocks (w+i, i) run out of the first tower: "
            f"w={w}, i_max={i_max}, h={m.h_a}")
    members = tuple(BlockIndex(w + i, i) for i in range(i_max + 1))
    return ColumnSpec(delta=d, w=w, j=m.j, members=members)


def light_shifts(m: BlockMassMatrix, delta: RationalLike, w: int,
                 epsilon: Optional[RationalLike] = None,
                 mass_threshold: Optional[RationalLike] = None) -> Tuple[int, ...]:
    """Shift set selection for F assembly.

    With epsilon (the default mode): all h whose shifted column consists
    entirely of epsilon-light blocks.  With mass_threshold: all h whose
    whole shifted-column mass is strictly below the threshold.  Either way
    only shifts keeping the column inside the second tower qualify.
    """
    if (epsilon is None) == (mass_threshold is None):
        raise SpecError("pass exactly one of epsilon, mass_threshold")
    col = _make_column(m, delta, w)
    out = []
    i_max = col.members[-1].z2
    for h in range(m.h_b - i_max):
        if epsilon is not None:
            thr = as_fraction(epsilon) * m.base_mass
            ok = all(m.mass(BlockIndex(z1, z2 + h)) < thr
                     for z1, z2 in col.members)
        else:
            total = sum((m.mass(BlockIndex(z1, z2 + h))
                         for z1, z2 in col.members), Fraction(0))
            ok = total < as_fraction(mass_threshold)
        if ok:
            out.append(h)
    return tuple(out)


@dataclass(frozen=True)
class FSetSpec:
    """Union of vertical translates of a column, with the joining-derived
    weights over the shift set."""

    column: ColumnSpec
    shifts: Tuple[int, ...]
    nu_F: Fraction
    weights: WeightSequence
    weight_flatness: Fraction


def columns_and_F(m: BlockMassMatrix, delta: RationalLike, w: int,
                  shifts: Sequence[int]) -> FSetSpec:
    """Assemble F = union over h in shifts of the column translated up by h,
    with weights a_h proportional to each translate's joining mass."""
    col = _make_column(m, delta, w)
    if not shifts:
        raise SpecError("shift set must be nonempty")
    if len(set(shifts)) != len(shifts):
        raise SpecError("shift set has duplicates")
    i_max = col.members[-1].z2
    for h in shifts:
        if h < 0 or i_max + h > m.h_b - 1:
            raise SpecError(f"shift h={h} pushes the column out of the second "
                            f"tower (i_max={i_max}, h_j={m.h_b})")
    per_shift = {}
    for h in sorted(shifts):
        per_shift[h] = sum((m.mass(BlockIndex(z1, z2 + h))
                            for z1, z2 in col.members), Fraction(0))
    nu_F = sum(per_shift.values(), Fraction(0))
    if nu_F == 0:
        raise EmptyFSetError(
            f"F set carries no joining mass (column w={col.w}, "
            f"shifts {sorted(shifts)})")
    weights = WeightSequence(tuple((h, v / nu_F) for h, v in per_shift.items()))
    return FSetSpec(column=col, shifts=tuple(sorted(shifts)), nu_F=nu_F,
                    weights=weights, weight_flatness=flatness(weights, 0))


@dataclass(frozen=True)
class TrivializationRecord:
    """Both sides of the conditional product test, with the two-path display
    evaluation and its enclosure."""

    j: int
    k: int
    conditional: Fraction
    reference: Fraction
    gap: Fraction
    display_sum: Optional[MeasureBound]
    display_gap: Optional[MeasureBound]
    weight_flatness: Fraction
    escape_slack: Fraction


def _levels_inside(stage: TowerStage, A: IntervalSet) -> FrozenSet[int]:
    return frozenset(i for i in range(stage.height)
                     if IntervalSet((stage.level(i),)).is_subset_of(A))


def _validate_stage_set(stage: TowerStage, A: IntervalSet, label: str) -> None:
    levels = [i for i in range(stage.height)
              if IntervalSet((stage.level(i),)).is_subset_of(A)]
    if canonicalize([stage.level(i) for i in levels]) != A:
        raise SpecError(f"{label} is not a union of stage-{stage.stage} levels")


def trivialization_check(m: BlockMassMatrix, F: FSetSpec, A: IntervalSet,
                         B: IntervalSet, k: int) -> TrivializationRecord:
    """Compare nu(A x B | F) against mu(A)mu(B), and against the shifted-
    column display sum_h a_h nu(A x T^{-h}B | C).

    The conditional side selects whole blocks (A and B are unions of
    stage-k levels, so stage-j levels never straddle them).  The display
    side re-evaluates each term geometrically through stage-resolution
    images of B, whose escape widens the enclosure; for empirical matrices
    the display uses the exact whole-block transport instead (within-tower
    shifts lose no orbit mass).  display fields are None when the base
    column itself carries no mass.
    """
    if not (1 <= k <= m.j):
        raise SpecError(f"need 1 <= k <= j, got k={k}, j={m.j}")
    stage_ka = build_stage(m.spec_a, k)
    stage_kb = build_stage(m.spec_b, k)
    _validate_stage_set(stage_ka, A, "A")
    _validate_stage_set(stage_kb, B, "B")
    sa, sb = build_stage(m.spec_a, m.j), build_stage(m.spec_b, m.j)
    in_A = _levels_inside(sa, A)
    in_B = _levels_inside(sb, B)

    cond_num = Fraction(0)
    for h in F.shifts:
        for z1, z2 in F.column.members:
            if z1 in in_A and z2 + h in in_B:
                cond_num += m.mass(BlockIndex(z1, z2 + h))
    conditional = cond_num / F.nu_F
    reference = (A.measure / m.norm_a) * (B.measure / m.norm_b)
    gap = abs(conditional - reference)

    nu_C = sum((m.mass(bi) for bi in F.column.members), Fraction(0))
    display_sum = display_gap = None
    slack = Fraction(0)
    if nu_C > 0:
        lo, hi = _display_route(m, F, A, in_A, in_B, B)
        display_sum = MeasureBound(lo / nu_C, hi / nu_C)
        slack = display_sum.width
        d_lo = max(Fraction(0),
                   max(display_sum.lo - conditional, conditional - display_sum.hi))
        d_hi = max(abs(conditional - display_sum.lo),
                   abs(conditional - display_sum.hi))
        display_gap = MeasureBound(d_lo, d_hi)
    return TrivializationRecord(
        j=m.j, k=k, conditional=conditional, reference=reference, gap=gap,
        display_sum=display_sum, display_gap=display_gap,
        weight_flatness=F.weight_flatness, escape_slack=slack)


def _display_route(m: BlockMassMatrix, F: FSetSpec, A: IntervalSet,
                   in_A: FrozenSet[int], in_B: FrozenSet[int],
                   B: IntervalSet) -> Tuple[Fraction, Fraction]:
    """Enclosure of sum_h a_h nu(A x T^{-h}B intersect C), unnormalized."""
    members = F.column.members
    if m.kind == "empirical":
        val = sum((a_h * m.mass(BlockIndex(z1, z2 + h))
                   for h, a_h in F.weights.weights
                   for z1, z2 in members
                   if z1 in in_A and z2 + h in in_B), Fraction(0))
        return val, val
    J = m.meta["J"]
    sb = build_stage(m.spec_b, m.j)
    sel = [bi for bi in members if bi.z1 in in_A]
    if m.kind == "product":
        Pf, esc = average_apply(m.spec_b, F.weights,
                                StepFunction.indicator(B), J,
                                direction="backward")
        lo = Fraction(0)
        for _, z2 in sel:
            lvl = StepFunction.indicator(IntervalSet((sb.level(z2),)))
            lo += m.level_mass_a * Pf.inner(lvl) / m.norm_b
        hi = lo + (m.level_mass_a * esc.hi / m.norm_b if sel else Fraction(0))
        return lo, hi
    if m.kind == "graph":
        kg = m.meta["k"]
        sa = build_stage(m.spec_a, m.j)
        lo = hi = Fraction(0)
        for h, a_h in F.weights.weights:
            img, esc = power_image(m.spec_b, B, -h, J)
            t_lo = Fraction(0)
            extra = Fraction(0)
            for z1, z2 in sel:
                V = set_intersection(IntervalSet((sb.level(z2),)), img)
                W, esc2 = power_image(m.spec_a, V, kg, J)
                lvl = set_intersection(IntervalSet((sa.level(z1),)), A)
                t_lo += set_intersection(lvl, W).measure / m.norm_a
                extra += esc2.hi / m.norm_a
            lo += a_h * t_lo
            hi += a_h * (t_lo + extra + (esc.hi / m.norm_b if sel else Fraction(0)))
        return lo, hi
    raise SpecError(f"unknown matrix kind: {m.kind!r}")
