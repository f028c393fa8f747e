"""Rank-one cutting-and-stacking constructions.

A construction is determined by the first tower height h1, a cut rule giving
the number of columns r_j at each stage, and a spacer rule giving the spacer
counts s_{j,0..r_j-1} placed on top of each column (column i gets s_{j,i}
fresh levels before the next column is stacked on).  Stage recurrences:

    h_{j+1} = r_j * h_j + sum_i s_{j,i}
    w_{j+1} = w_j / r_j
    M_{j+1} = M_j + w_{j+1} * sum_i s_{j,i}

Towers count levels 0..h_j-1 (the height is the number of levels).  The
stage-1 tower fills [0, 1) by default (w1 = 1/h1); spacer mass is appended at
the right end of the ambient interval in stacking order, so at every stage
the tower levels partition the ambient [0, M_j) exactly.
"""

from __future__ import annotations

import json
import random
import threading
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from .errors import SpecError
from .measure import Interval, IntervalSet, MeasureBound, as_fraction, canonicalize

__all__ = [
    "CutRule",
    "SpacerRule",
    "ConstructionSpec",
    "TowerStage",
    "Construction",
    "construction",
    "build_stage",
    "height_ratio_profile",
    "base_occurrences",
]

# Stages up to this height keep their level list materialized; taller stages
# answer level queries through the column decomposition instead.
MATERIALIZE_LIMIT = 1024


@dataclass(frozen=True)
class CutRule:
    """Number of columns r_j used when cutting stage j.

    kinds: "constant" (value), "stage" (r_j = j, so r_1 = 1 is a degenerate
    no-cut stage), "stage_plus_one" (r_j = j + 1), "list" (explicit values,
    1-indexed by stage).
    """

    kind: str
    value: Optional[int] = None
    values: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in ("constant", "stage", "stage_plus_one", "list"):
            raise SpecError(f"unknown cut rule kind: {self.kind!r}")
        if self.kind == "constant" and (self.value is None or self.value < 1):
            raise SpecError("constant cut rule needs value >= 1")
        if self.kind == "list":
            if not self.values or any(v < 1 for v in self.values):
                raise SpecError("list cut rule needs positive values")
            object.__setattr__(self, "values", tuple(self.values))

    def at(self, j: int) -> int:
        if self.kind == "constant":
            return self.value
        if self.kind == "stage":
            return j
        if self.kind == "stage_plus_one":
            return j + 1
        if j > len(self.values):
            raise SpecError(f"cut rule list exhausted at stage {j}")
        return self.values[j - 1]

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.value is not None:
            out["value"] = self.value
        if self.values is not None:
            out["values"] = list(self.values)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "CutRule":
        return cls(
            kind=data["kind"],
            value=data.get("value"),
            values=tuple(data["values"]) if "values" in data else None,
        )


@dataclass(frozen=True)
class SpacerRule:
    """Spacer counts per column at each stage.

    kinds: "none" (s = 0), "staircase" (s_{j,i} = i), "chacon" (s = (0,1,0),
    requires r_j = 3), "random" (uniform in [0, bound], drawn from the spec
    seed with one independent substream per stage), "list" (explicit rows).
    """

    kind: str
    bound: Optional[int] = None
    rows: Optional[Tuple[Tuple[int, ...], ...]] = None

    def __post_init__(self):
        if self.kind not in ("none", "staircase", "chacon", "random", "list"):
            raise SpecError(f"unknown spacer rule kind: {self.kind!r}")
        if self.kind == "random" and (self.bound is None or self.bound < 0):
            raise SpecError("random spacer rule needs bound >= 0")
        if self.kind == "list":
            if self.rows is None:
                raise SpecError("list spacer rule needs rows")
            rows = tuple(tuple(r) for r in self.rows)
            if any(s < 0 for row in rows for s in row):
                raise SpecError("spacer counts must be nonnegative")
            object.__setattr__(self, "rows", rows)

    def vector(self, j: int, r: int, seed: Optional[int]) -> Tuple[int, ...]:
        if self.kind == "none":
            return (0,) * r
        if self.kind == "staircase":
            return tuple(range(r))
        if self.kind == "chacon":
            if r != 3:
                raise SpecError("chacon spacers require a 3-column cut")
            return (0, 1, 0)
        if self.kind == "random":
            if seed is None:
                raise SpecError("random spacer rule needs an explicit seed")
            rng = random.Random(seed * 1_000_003 + j)
            return tuple(rng.randint(0, self.bound) for _ in range(r))
        if j > len(self.rows):
            raise SpecError(f"spacer rule rows exhausted at stage {j}")
        row = self.rows[j - 1]
        if len(row) != r:
            raise SpecError(f"spacer row at stage {j} has length {len(row)}, expected {r}")
        return row

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.bound is not None:
            out["bound"] = self.bound
        if self.rows is not None:
            out["rows"] = [list(r) for r in self.rows]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "SpacerRule":
        return cls(
            kind=data["kind"],
            bound=data.get("bound"),
            rows=tuple(tuple(r) for r in data["rows"]) if "rows" in data else None,
        )


_PRESETS = {
    "odometer": {"h1": 2, "cut_rule": {"kind": "constant", "value": 2}, "spacer_rule": {"kind": "none"}},
    "staircase": {"h1": 2, "cut_rule": {"kind": "stage"}, "spacer_rule": {"kind": "staircase"}},
    "chacon": {"h1": 1, "cut_rule": {"kind": "constant", "value": 3}, "spacer_rule": {"kind": "chacon"}},
    "random": {"h1": 2, "cut_rule": {"kind": "stage"}, "spacer_rule": {"kind": "random", "bound": 2}},
}


@dataclass(frozen=True)
class ConstructionSpec:
    """Full recipe for a rank-one construction, hashable and serializable.

    base_width defaults to 1/h1 so the first tower fills [0, 1); pass an
    explicit Fraction to override.  max_stage caps how deep any consumer may
    refine (the stage budget).
    """

    h1: int
    cut_rule: CutRule
    spacer_rule: SpacerRule
    max_stage: int = 10
    seed: Optional[int] = None
    base_width: Optional[Fraction] = None
    preset: str = "custom"

    def __post_init__(self):
        if self.h1 < 1:
            raise SpecError("h1 must be >= 1")
        if self.max_stage < 1:
            raise SpecError("max_stage must be >= 1")
        if self.base_width is not None:
            bw = as_fraction(self.base_width)
            if bw <= 0:
                raise SpecError("base_width must be positive")
            object.__setattr__(self, "base_width", bw)

    @property
    def width1(self) -> Fraction:
        return self.base_width if self.base_width is not None else Fraction(1, self.h1)

    def cuts(self, j: int) -> int:
        return self.cut_rule.at(j)

    def spacers(self, j: int) -> Tuple[int, ...]:
        return self.spacer_rule.vector(j, self.cuts(j), self.seed)

    @classmethod
    def odometer(cls, h1: int = 2, max_stage: int = 12) -> "ConstructionSpec":
        return cls(h1, CutRule("constant", value=2), SpacerRule("none"),
                   max_stage=max_stage, preset="odometer")

    @classmethod
    def staircase(cls, h1: int = 2, max_stage: int = 10) -> "ConstructionSpec":
        return cls(h1, CutRule("stage"), SpacerRule("staircase"),
                   max_stage=max_stage, preset="staircase")

    @classmethod
    def chacon(cls, h1: int = 1, max_stage: int = 12) -> "ConstructionSpec":
        return cls(h1, CutRule("constant", value=3), SpacerRule("chacon"),
                   max_stage=max_stage, preset="chacon")

    @classmethod
    def random_spacers(cls, seed: int, h1: int = 2, bound: int = 2,
                       max_stage: int = 10) -> "ConstructionSpec":
        return cls(h1, CutRule("stage"), SpacerRule("random", bound=bound),
                   max_stage=max_stage, seed=seed, preset="random")

    def to_json(self) -> dict:
        out = {
            "preset": self.preset,
            "h1": self.h1,
            "cut_rule": self.cut_rule.to_json(),
            "spacer_rule": self.spacer_rule.to_json(),
            "max_stage": self.max_stage,
        }
        if self.seed is not None:
            out["seed"] = self.seed
        if self.base_width is not None:
            out["base_width"] = str(self.base_width)
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: dict) -> "ConstructionSpec":
        preset = data.get("preset", "custom")
        defaults = _PRESETS.get(preset, {})
        if preset != "custom" and preset not in _PRESETS:
            raise SpecError(f"unknown preset: {preset!r}")
        merged = dict(defaults)
        merged.update(data)
        if "cut_rule" not in merged or "spacer_rule" not in merged:
            raise SpecError("spec needs cut_rule and spacer_rule (or a known preset)")
        return cls(
            h1=merged["h1"],
            cut_rule=CutRule.from_json(merged["cut_rule"]),
            spacer_rule=SpacerRule.from_json(merged["spacer_rule"]),
            max_stage=merged.get("max_stage", 10),
            seed=merged.get("seed"),
            base_width=as_fraction(merged["base_width"]) if "base_width" in merged else None,
            preset=preset,
        )


class TowerStage:
    """One stage of a construction: a tower of `height` levels of `width`.

    Levels are indexed 0..height-1 from the base up; level(i) is the ambient
    interval occupied by the i-th level.  Stages above MATERIALIZE_LIMIT keep
    levels implicit and answer queries through the column decomposition of
    the previous stage (O(stage) per query).
    """

    __slots__ = (
        "spec", "stage", "height", "width", "total", "prev",
        "cut", "spacers", "offsets", "spacer_cum", "spacer_zone_lo",
        "_levels", "_occ",
    )

    def __init__(self, spec: ConstructionSpec, stage: int, prev: Optional["TowerStage"]):
        self.spec = spec
        self.stage = stage
        self.prev = prev
        self._occ: Dict[int, Tuple[int, ...]] = {}
        if prev is None:
            self.height = spec.h1
            self.width = spec.width1
            self.total = self.height * self.width
            self.cut = None
            self.spacers = None
            self.offsets = None
            self.spacer_cum = None
            self.spacer_zone_lo = None
        else:
            j = prev.stage
            r = spec.cuts(j)
            s = spec.spacers(j)
            if len(s) != r:
                raise SpecError(f"spacer vector at stage {j} has wrong length")
            self.cut = r
            self.spacers = s
            self.width = prev.width / r
            offsets = [0]
            for c in range(r - 1):
                offsets.append(offsets[-1] + prev.height + s[c])
            self.offsets = tuple(offsets)
            cum = [0]
            for c in range(r):
                cum.append(cum[-1] + s[c])
            self.spacer_cum = tuple(cum)
            self.height = offsets[-1] + prev.height + s[-1]
            self.total = prev.total + self.width * cum[-1]
            self.spacer_zone_lo = prev.total
        self._levels: Optional[Tuple[Interval, ...]] = None
        if self.height <= MATERIALIZE_LIMIT:
            self._levels = tuple(self._compute_level(i) for i in range(self.height))

    # -- level geometry ----------------------------------------------------

    def _column_of(self, i: int) -> int:
        return bisect_right(self.offsets, i) - 1

    def _compute_level(self, i: int) -> Interval:
        if self.prev is None:
            lo = i * self.width
            return Interval(lo, lo + self.width)
        c = self._column_of(i)
        rel = i - self.offsets[c]
        if rel < self.prev.height:
            plo = self.prev.level_lo(rel)
            lo = plo + c * self.width
        else:
            t = rel - self.prev.height
            lo = self.spacer_zone_lo + (self.spacer_cum[c] + t) * self.width
        return Interval(lo, lo + self.width)

    def level(self, i: int) -> Interval:
        if not (0 <= i < self.height):
            raise SpecError(f"level index {i} out of range for stage {self.stage}")
        if self._levels is not None:
            return self._levels[i]
        return self._compute_level(i)

    def level_lo(self, i: int) -> Fraction:
        return self.level(i).lo

    @property
    def base(self) -> Interval:
        return Interval(Fraction(0), self.width)

    @property
    def top(self) -> Interval:
        return self.level(self.height - 1)

    @property
    def ambient(self) -> Interval:
        return Interval(Fraction(0), self.total)

    def levels_set(self, indices: Sequence[int]) -> IntervalSet:
        return canonicalize([self.level(i) for i in indices])

    def locate(self, x) -> Optional[int]:
        """Level index whose interval contains x, or None if x >= M_j."""
        x = as_fraction(x)
        if x < 0:
            raise SpecError(f"point {x} below the ambient interval")
        if x >= self.total:
            return None
        if self.prev is None:
            return int(x // self.width)
        if x < self.prev.total:
            pi = self.prev.locate(x)
            c = int((x - self.prev.level_lo(pi)) // self.width)
            return self.offsets[c] + pi
        t = int((x - self.spacer_zone_lo) // self.width)
        c = bisect_right(self.spacer_cum, t) - 1
        return self.offsets[c] + self.prev.height + (t - self.spacer_cum[c])

    # -- lineage -----------------------------------------------------------

    def parent_index(self, i: int) -> Optional[int]:
        """Level of the previous stage containing level i, or None for a
        spacer level freshly introduced at this stage."""
        if self.prev is None:
            raise SpecError("stage 1 has no parent stage")
        c = self._column_of(i)
        rel = i - self.offsets[c]
        return rel if rel < self.prev.height else None

    def ancestor_index(self, i: int, k: int) -> Optional[int]:
        """Level of stage k containing level i of this stage, or None if the
        level sits in spacer mass added after stage k."""
        if not (1 <= k <= self.stage):
            raise SpecError(f"ancestor stage {k} out of range")
        st, idx = self, i
        while st.stage > k:
            idx = st.parent_index(idx)
            if idx is None:
                return None
            st = st.prev
        return idx

    # -- base occurrences --------------------------------------------------

    def occurrences(self, k: int) -> Tuple[int, ...]:
        """Sorted level indices i with level(i) inside the stage-k base E_k.

        Computed by the column recursion S_k(j+1) = {offset_c + p}; agrees
        with direct interval containment (tested) because E_k is exactly the
        union of its stage-j occurrences and spacer mass added at stages >= k
        is disjoint from [0, M_k).
        """
        if not (1 <= k <= self.stage):
            raise SpecError(f"occurrence stage {k} out of range")
        if k == self.stage:
            return (0,)
        cached = self._occ.get(k)
        if cached is None:
            prev_occ = self.prev.occurrences(k)
            cached = tuple(sorted(off + p for off in self.offsets for p in prev_occ))
            self._occ[k] = cached
        return cached

    @property
    def base_occurrence_map(self) -> Dict[int, Tuple[int, ...]]:
        return {k: self.occurrences(k) for k in range(1, self.stage + 1)}

    def __repr__(self) -> str:
        return (f"TowerStage(stage={self.stage}, height={self.height}, "
                f"width={self.width}, total={self.total})")


class Construction:
    """Lazy stage cache for one spec.  Stages are immutable once published,
    so concurrent builders may race benignly; the lock just avoids duplicate
    work."""

    def __init__(self, spec: ConstructionSpec):
        self.spec = spec
        self._stages = [TowerStage(spec, 1, None)]
        self._lock = threading.Lock()

    def stage(self, j: int) -> TowerStage:
        if j < 1:
            raise SpecError(f"stage index must be >= 1, got {j}")
        if j > self.spec.max_stage:
            raise SpecError(
                f"stage {j} exceeds the spec stage budget {self.spec.max_stage}")
        if j > len(self._stages):
            with self._lock:
                while len(self._stages) < j:
                    nxt = TowerStage(self.spec, len(self._stages) + 1, self._stages[-1])
                    self._stages.append(nxt)
        return self._stages[j - 1]


_CONSTRUCTIONS: Dict[ConstructionSpec, Construction] = {}
_CONSTRUCTIONS_LOCK = threading.Lock()


def construction(spec: ConstructionSpec) -> Construction:
    con = _CONSTRUCTIONS.get(spec)
    if con is None:
        with _CONSTRUCTIONS_LOCK:
            con = _CONSTRUCTIONS.setdefault(spec, Construction(spec))
    return con


def build_stage(spec: ConstructionSpec, j: int) -> TowerStage:
    """Tower stage j of the construction (1-based)."""
    return construction(spec).stage(j)


def height_ratio_profile(spec_a: ConstructionSpec, spec_b: ConstructionSpec,
                         J: int) -> Tuple[Fraction, ...]:
    """Exact per-stage height ratios min(h, h')/max(h, h') for stages 1..J.

    The smaller height goes in the numerator stage by stage, so identical
    specs give a profile of ones.
    """
    if J < 1:
        raise SpecError("ratio profile needs J >= 1")
    out = []
    for j in range(1, J + 1):
        ha = build_stage(spec_a, j).height
        hb = build_stage(spec_b, j).height
        out.append(Fraction(min(ha, hb), max(ha, hb)))
    return tuple(out)


def base_occurrences(spec: ConstructionSpec, k: int, J: int):
    """Occurrence set S_k(J) plus the missing-mass bound.

    Returns (S, missing) where S lists the level indices of tower J whose
    levels lie inside E_k, and missing is the exact-zero bound: E_k is
    covered exactly, mu(E_k) = |S| * w_J.
    """
    if k > J:
        raise SpecError(f"occurrence stage k={k} exceeds resolution J={J}")
    st = build_stage(spec, J)
    return st.occurrences(k), MeasureBound.zero()
