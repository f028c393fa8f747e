"""rankone: exact-arithmetic toolkit for rank-one cutting-and-stacking
systems.

Everything downstream of the construction recurrences is computed in
rational arithmetic; quantities that depend on unresolved future stages are
reported as two-sided MeasureBound enclosures instead of point estimates.
"""

__version__ = "0.1.0"

from .averaging import (
    WeightSequence,
    adjoint_convolution,
    average_apply,
    flatness,
    l2_deviation,
)
from .construction import (
    Construction,
    ConstructionSpec,
    CutRule,
    SpacerRule,
    TowerStage,
    base_occurrences,
    build_stage,
    construction,
    height_ratio_profile,
)
from .errors import EmptyFSetError, OrbitEscaped, SpecError
from .flow import (
    ConsequenceRecord,
    FlowSkeletonSpec,
    FlowWindowReport,
    ThickenedBase,
    band_indices,
    band_masses,
    consequence_check,
    thickened_base,
    windowed_return_flow,
)
from .joinings import (
    BlockIndex,
    BlockMassMatrix,
    ColumnSpec,
    DispersionRow,
    FSetSpec,
    LightBlockReport,
    TrivializationRecord,
    columns_and_F,
    di_estimate,
    dispersion_experiment,
    empirical_joining,
    graph_blocks,
    light_blocks,
    light_shifts,
    product_blocks,
    trivialization_check,
)
from .measure import (
    EMPTY_SET,
    Interval,
    IntervalSet,
    MeasureBound,
    StepFunction,
    as_fraction,
    canonicalize,
    l2_inner,
    set_difference,
    set_intersection,
    set_union,
)
from .persist import (
    cache_stage,
    dump_stage,
    frac_str,
    load_stage,
    parse_frac,
    spec_hash,
    write_csv,
    write_json,
)
from .stats import (
    CorrelationSeries,
    ReturnProfile,
    correlation,
    correlation_series,
    max_profile,
    return_profile,
    window_sums,
)
from .transform import (
    Cursor,
    OrbitPoint,
    PiecewiseTranslation,
    apply_power,
    image_set,
    power_image,
    realize,
)
