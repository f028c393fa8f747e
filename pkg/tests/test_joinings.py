"""Block-mass matrices, light blocks, powder proxies, columns, and the
conditional trivialization check."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankone.averaging import WeightSequence
from rankone.construction import ConstructionSpec, build_stage
from rankone.errors import EmptyFSetError, SpecError
from rankone.joinings import (
    BlockIndex,
    BlockMassMatrix,
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
from rankone.measure import set_intersection
from rankone.transform import apply_power, power_image

ODO = ConstructionSpec.odometer()
ST2 = ConstructionSpec.staircase(h1=2)
ST3 = ConstructionSpec.staircase(h1=3)
CHA = ConstructionSpec.chacon()
PRESETS = [ODO, ST2, CHA, ConstructionSpec.random_spacers(seed=7)]


# ---------------------------------------------------------------- product

def test_product_equal_masses_and_residual():
    m = product_blocks(ST2, ST3, 2, 4)
    assert m.h_a == 2 and m.h_b == 3
    assert set(m.masses) == {BlockIndex(a, b) for a in range(2) for b in range(3)}
    assert all(v == F(1, 12) for v in m.masses.values())
    assert m.residual == F(1, 2)
    assert m.level_mass_a == F(1, 3)
    assert m.level_mass_b == F(1, 4)
    assert m.base_mass == F(1, 4)


def test_product_covered_is_tower_mass_product():
    for j, J in [(2, 4), (3, 5), (2, 5)]:
        m = product_blocks(ST2, ST3, j, J)
        expect = (build_stage(ST2, j).total / build_stage(ST2, J).total) \
            * (build_stage(ST3, j).total / build_stage(ST3, J).total)
        assert m.total_block_mass == expect


def test_product_marginal_sums():
    m = product_blocks(ST2, ST3, 2, 4)
    covered_b = build_stage(ST3, 2).total / build_stage(ST3, 4).total
    covered_a = build_stage(ST2, 2).total / build_stage(ST2, 4).total
    for z1 in range(m.h_a):
        assert m.row_sum(z1) == m.level_mass_a * covered_b
        assert m.row_sum(z1) <= m.level_mass_a
    for z2 in range(m.h_b):
        assert m.col_sum(z2) == m.level_mass_b * covered_a
        assert m.col_sum(z2) <= m.level_mass_b


@given(st.sampled_from(PRESETS), st.sampled_from(PRESETS),
       st.integers(1, 3), st.integers(0, 2))
@settings(max_examples=20, deadline=None)
def test_product_mass_accounting(spec_a, spec_b, j, extra):
    m = product_blocks(spec_a, spec_b, j, j + extra)
    assert sum(m.masses.values(), F(0)) + m.residual == 1
    assert len(m.masses) == m.h_a * m.h_b
    assert m.residual >= 0


# ---------------------------------------------------------------- graph

def test_graph_k0_odometer_diagonal():
    m = graph_blocks(ODO, 0, 2, 4)
    assert m.masses == {BlockIndex(i, i): F(1, 4) for i in range(4)}
    assert m.residual == 0


def test_graph_k0_support_is_diagonal():
    for spec in PRESETS:
        for j in (1, 2, 3):
            m = graph_blocks(spec, 0, j, j + 2)
            assert all(z1 == z2 for z1, z2 in m.masses)
            assert all(v > 0 for v in m.masses.values())


def test_graph_k1_odometer_frozen():
    m = graph_blocks(ODO, 1, 2, 4)
    assert m.masses == {
        BlockIndex(1, 0): F(1, 4), BlockIndex(2, 1): F(1, 4),
        BlockIndex(3, 2): F(1, 4), BlockIndex(0, 3): F(3, 16)}
    assert m.residual == F(1, 16)


def test_graph_wraparound_at_k_h2():
    # the odometer satisfies T^2 E_1 = E_1 up to resolution loss, so the
    # k = 2 band at stage 1 folds back onto the diagonal
    m = graph_blocks(ODO, 2, 1, 4)
    assert m.masses == {BlockIndex(0, 0): F(7, 16), BlockIndex(1, 1): F(7, 16)}
    assert m.residual == F(1, 8)


def test_graph_mass_matches_direct_geometry():
    # independent route: resolve T^{z1}E and the pushed image of T^{z2}E by
    # k through power_image and intersect
    for spec, k in [(ODO, 0), (ODO, 1), (ST2, 0), (ST2, 2)]:
        j, J = 2, 4
        m = graph_blocks(spec, k, j, J)
        stj, stJ = build_stage(spec, j), build_stage(spec, J)
        M = stJ.total
        occ = stJ.occurrences(j)
        for z1 in range(stj.height):
            u = stJ.levels_set([p + z1 for p in occ])
            for z2 in range(stj.height):
                base = stJ.levels_set([p + z2 for p in occ])
                img, _ = power_image(spec, base, k, J)
                direct = set_intersection(u, img).measure / M
                assert m.mass(BlockIndex(z1, z2)) == direct


def test_graph_row_sums_bounded_by_level_mass():
    for spec, k in [(ODO, 1), (ST2, 2), (CHA, 1)]:
        m = graph_blocks(spec, k, 2, 5)
        for z1 in range(m.h_a):
            assert m.row_sum(z1) <= m.level_mass_a
        for z2 in range(m.h_b):
            assert m.col_sum(z2) <= m.level_mass_b


@given(st.sampled_from(PRESETS), st.integers(0, 5), st.integers(1, 3))
@settings(max_examples=20, deadline=None)
def test_graph_mass_accounting(spec, k, j):
    m = graph_blocks(spec, k, j, j + 2)
    total = sum(m.masses.values(), F(0))
    assert total <= 1
    assert total + m.residual == 1


# ---------------------------------------------------------------- empirical

def test_empirical_identical_orbits_diagonal():
    m = empirical_joining(ODO, ODO, 0, 0, 64, 2, 10)
    assert m.masses == {BlockIndex(i, i): F(1, 4) for i in range(4)}
    assert m.residual == 0
    assert m.meta["deepest_stage_a"] == 6
    assert m.kind == "empirical" and m.meta["N"] == 64


def test_empirical_single_step():
    m = empirical_joining(ODO, ODO, 0, 0, 1, 2, 8)
    assert m.masses == {BlockIndex(0, 0): F(1)}
    assert m.residual == 0


def test_empirical_start_in_spacer_mass():
    # 21/20 lies in the stage-3 spacer zone of the h1=2 staircase, so the
    # first tick cannot be assigned a stage-2 block
    m = empirical_joining(ST2, ST3, F(21, 20), 0, 1, 2, 10)
    assert m.residual == 1 and not m.masses
    m4 = empirical_joining(ST2, ST3, F(21, 20), 0, 4, 2, 10)
    assert m4.residual == F(1, 4)


def test_empirical_step_parameters():
    # doubling the first coordinate's step keeps it on stage-1 level 0
    m = empirical_joining(ODO, ODO, 0, 0, 64, 1, 12, step_a=2, step_b=1)
    assert m.masses == {BlockIndex(0, 0): F(1, 2), BlockIndex(0, 1): F(1, 2)}
    assert m.residual == 0


def test_empirical_rerun_identical():
    a = empirical_joining(ST2, ST3, 0, 0, 3000, 2, 10)
    b = empirical_joining(ST2, ST3, 0, 0, 3000, 2, 10)
    assert a.masses == b.masses and a.residual == b.residual and a.meta == b.meta


def test_empirical_equivariance():
    # advancing both starting points by m steps moves at most m ticks in and
    # m ticks out of the time window
    N = 500
    base = empirical_joining(ST2, ST3, 0, 0, N, 2, 10)
    for shift in (1, 5, 20):
        xa = apply_power(ST2, 0, shift).x
        xb = apply_power(ST3, 0, shift).x
        moved = empirical_joining(ST2, ST3, xa, xb, N, 2, 10)
        keys = set(base.masses) | set(moved.masses)
        tv = sum(abs(base.mass(z) - moved.mass(z)) for z in keys)
        tv += abs(base.residual - moved.residual)
        assert tv <= F(2 * shift, N)


def test_empirical_validation():
    with pytest.raises(SpecError):
        empirical_joining(ODO, ODO, 0, 0, 0, 2, 8)
    with pytest.raises(SpecError):
        empirical_joining(ODO, ODO, 0, 0, 10, 2, 8, step_a=0)


# ---------------------------------------------------------------- light blocks

def test_light_product_threshold_flip():
    # every product block has mass level_mass_a * base_mass, so lightness
    # flips for the whole grid exactly when epsilon crosses level_mass_a
    m = product_blocks(ST2, ST3, 2, 4)
    at = light_blocks(m, m.level_mass_a)
    assert at.covered_mass == 0 and not at.light_set
    above = light_blocks(m, m.level_mass_a + F(1, 1000))
    assert len(above.light_set) == m.h_a * m.h_b
    assert above.covered_mass == m.total_block_mass


def test_light_graph_k0():
    m = graph_blocks(ODO, 0, 2, 4)
    r = light_blocks(m, F(1, 2))
    assert r.covered_mass == 0
    assert len(r.light_set) == 12 and r.heavy_count == 4
    assert all(z1 != z2 for z1, z2 in r.light_set)
    # diagonal blocks stay heavy all the way up to epsilon = 1
    assert light_blocks(m, 1).covered_mass == 0


def test_light_empirical_diagonal():
    m = empirical_joining(ODO, ODO, 0, 0, 64, 2, 10)
    assert light_blocks(m, F(1, 2)).covered_mass == 0


def test_light_validation():
    m = graph_blocks(ODO, 0, 2, 4)
    with pytest.raises(SpecError):
        light_blocks(m, 0)


# ---------------------------------------------------------------- di estimate

def test_di_graph_family_zero():
    reports = [light_blocks(graph_blocks(ODO, 0, j, j + 2), eps)
               for j in (2, 3, 4) for eps in (F(1, 2), F(1, 4))]
    assert di_estimate(reports) == 0


def test_di_product_family_tower_mass():
    reports = []
    for j in (3, 4):
        m = product_blocks(ST2, ST3, j, 6)
        for eps in (F(1, 2), F(1, 4)):
            reports.append(light_blocks(m, eps))
    expect = max(
        (build_stage(ST2, j).total / build_stage(ST2, 6).total)
        * (build_stage(ST3, j).total / build_stage(ST3, 6).total)
        for j in (3, 4))
    assert di_estimate(reports) == expect


def test_di_refusals():
    m2 = graph_blocks(ODO, 0, 2, 4)
    m3 = graph_blocks(ODO, 0, 3, 5)
    with pytest.raises(SpecError):
        di_estimate([])
    with pytest.raises(SpecError):
        di_estimate([light_blocks(m2, F(1, 2)), light_blocks(m3, F(1, 2))])
    with pytest.raises(SpecError):
        di_estimate([light_blocks(m2, F(1, 2)), light_blocks(m2, F(1, 4))])
    mixed = [light_blocks(m2, F(1, 2)), light_blocks(m3, F(1, 4)),
             light_blocks(product_blocks(ODO, ODO, 2, 4), F(1, 2))]
    with pytest.raises(SpecError):
        di_estimate(mixed)


# ---------------------------------------------------------------- dispersion

def test_dispersion_n0_is_source():
    rows = dispersion_experiment(ODO, ODO, 0, 0, 40, BlockIndex(0, 0),
                                 [0], 2, 8)
    (row,) = rows
    assert row.histogram == {BlockIndex(0, 0): F(1)}
    assert row.max_mass == 1 and row.residual == 0


def test_dispersion_identity_coupling_stays_single():
    rows = dispersion_experiment(ODO, ODO, 0, 0, 40, BlockIndex(0, 0),
                                 [1, 4], 2, 8)
    assert rows[0].histogram == {BlockIndex(1, 1): F(1)}
    assert rows[1].histogram == {BlockIndex(0, 0): F(1)}


def test_dispersion_staircase_pair_spreads():
    # advancing by the taller system's stage-3 height scatters the
    # conditioned mass over several blocks
    h3 = build_stage(ST3, 3).height
    rows = dispersion_experiment(ST2, ST3, 0, 0, 5000, BlockIndex(4, 0),
                                 [0, h3], 3, 10)
    assert rows[0].max_mass == 1
    assert rows[1].max_mass < 1
    assert len(rows[1].histogram) >= 2


def test_dispersion_empty_conditioning_refused():
    with pytest.raises(SpecError, match="count 0"):
        dispersion_experiment(ODO, ODO, 0, 0, 40, BlockIndex(0, 1), [1], 2, 8)


# ---------------------------------------------------------------- columns / F

def test_column_members():
    m = product_blocks(ST2, ST3, 2, 4)
    fs = columns_and_F(m, F(1, 10), 0, [0])
    assert fs.column.members == (BlockIndex(0, 0),)
    g = graph_blocks(ST2, 0, 3, 5)
    fs2 = columns_and_F(g, F(1, 2), 0, [0])
    assert fs2.column.members == (BlockIndex(0, 0), BlockIndex(1, 1),
                                  BlockIndex(2, 2))


def test_column_validation():
    m = product_blocks(ST2, ST3, 2, 4)
    with pytest.raises(SpecError):
        columns_and_F(m, F(1, 10), 5, [0])      # w+i leaves the first tower
    with pytest.raises(SpecError):
        columns_and_F(m, F(3, 2), 0, [0])       # delta out of (0,1)
    with pytest.raises(SpecError):
        columns_and_F(m, F(1, 10), -1, [0])


def test_F_product_uniform_weights():
    m = product_blocks(ST2, ST3, 2, 4)
    fs = columns_and_F(m, F(1, 10), 0, [0, 1, 2])
    assert fs.nu_F == F(1, 4)
    assert fs.weights.weights == ((0, F(1, 3)), (1, F(1, 3)), (2, F(1, 3)))
    assert fs.weight_flatness == F(1, 3)


def test_F_single_shift_is_delta():
    m = product_blocks(ST2, ST3, 2, 4)
    fs = columns_and_F(m, F(1, 10), 0, [0])
    assert fs.weights == WeightSequence.delta(0)
    assert fs.weight_flatness == 1


def test_F_graph_offdiagonal_empty():
    # with w = 1 the shifted blocks (1+i, i+h) touch the diagonal only at
    # h = 1, so a shift set avoiding 1 collects no mass
    g = graph_blocks(ODO, 0, 2, 4)
    with pytest.raises(EmptyFSetError):
        columns_and_F(g, F(1, 10), 1, [0, 2])


def test_F_shift_validation():
    m = product_blocks(ST2, ST3, 2, 4)
    with pytest.raises(SpecError):
        columns_and_F(m, F(1, 10), 0, [])
    with pytest.raises(SpecError):
        columns_and_F(m, F(1, 10), 0, [0, 0])
    with pytest.raises(SpecError):
        columns_and_F(m, F(1, 10), 0, [3])      # i_max + h beyond the tower
    with pytest.raises(SpecError):
        columns_and_F(m, F(1, 10), 0, [-1])


def test_light_shifts_modes():
    g = graph_blocks(ODO, 0, 2, 4)
    assert light_shifts(g, F(1, 10), 0, epsilon=F(1, 2)) == (1, 2, 3)
    assert light_shifts(g, F(1, 10), 0, mass_threshold=F(1, 8)) == (1, 2, 3)
    # a looser mass threshold readmits the heavy diagonal shift
    assert light_shifts(g, F(1, 10), 0, mass_threshold=F(1, 2)) == (0, 1, 2, 3)
    with pytest.raises(SpecError):
        light_shifts(g, F(1, 10), 0)
    with pytest.raises(SpecError):
        light_shifts(g, F(1, 10), 0, epsilon=F(1, 2), mass_threshold=F(1, 8))


# ---------------------------------------------------------------- trivialization

def test_trivialization_product_frozen():
    m = product_blocks(ST2, ST3, 2, 4)
    fs = columns_and_F(m, F(1, 10), 0, [0, 1, 2])
    A = build_stage(ST2, 1).levels_set([0])
    B = build_stage(ST3, 1).levels_set([0, 1])
    rec = trivialization_check(m, fs, A, B, 1)
    assert rec.conditional == F(2, 3)
    assert rec.reference == F(1, 6)
    assert rec.gap == F(1, 2)
    assert rec.display_sum.lo == F(2, 3) and rec.display_sum.hi == F(5, 6)
    assert rec.display_gap.lo == 0
    assert rec.escape_slack == rec.display_sum.width


def test_trivialization_product_display_brackets_conditional():
    # the product joining is invariant under Id x T, so the displayed sum's
    # true value is the conditional itself; the enclosure must contain it
    m = product_blocks(ST2, ST3, 2, 5)
    fs = columns_and_F(m, F(1, 10), 0, [0, 1, 2])
    sa1, sb1 = build_stage(ST2, 1), build_stage(ST3, 1)
    sets_a = [sa1.levels_set(ix) for ix in ([0], [1], [0, 1])]
    sets_b = [sb1.levels_set(ix) for ix in ([0], [1], [2], [0, 2], [0, 1, 2])]
    for A in sets_a:
        for B in sets_b:
            rec = trivialization_check(m, fs, A, B, 1)
            assert rec.display_gap.lo == 0
            assert rec.display_sum.lo <= rec.conditional <= rec.display_sum.hi


def test_trivialization_graph_gap_positive():
    g = graph_blocks(ODO, 0, 2, 5)
    fs = columns_and_F(g, F(1, 10), 0, [0])
    lvl0 = build_stage(ODO, 2).levels_set([0])
    lvl1 = build_stage(ODO, 2).levels_set([1])
    same = trivialization_check(g, fs, lvl0, lvl0, 2)
    assert same.conditional == 1
    assert same.reference == F(1, 16)
    assert same.gap == F(15, 16)
    assert same.display_sum.lo == same.display_sum.hi == 1
    other = trivialization_check(g, fs, lvl0, lvl1, 2)
    assert other.conditional == 0
    assert other.gap == F(1, 16)
    assert other.gap > 0


def test_trivialization_empirical_exact_display():
    m = empirical_joining(ODO, ODO, 0, 0, 256, 2, 10)
    fs = columns_and_F(m, F(1, 10), 0, [0])
    lvl0 = build_stage(ODO, 2).levels_set([0])
    rec = trivialization_check(m, fs, lvl0, lvl0, 2)
    assert rec.conditional == 1
    assert rec.display_sum.lo == rec.display_sum.hi == 1
    assert rec.display_gap.lo == rec.display_gap.hi == 0
    assert rec.escape_slack == 0


def test_trivialization_display_none_when_column_empty():
    # the k=2 graph band misses the w=0 column entirely, yet shifted
    # translates of it do carry mass
    g = graph_blocks(ODO, 2, 2, 6)
    fs = columns_and_F(g, F(1, 10), 0, [2])
    lvl0 = build_stage(ODO, 2).levels_set([0])
    rec = trivialization_check(g, fs, lvl0, lvl0, 2)
    assert rec.display_sum is None and rec.display_gap is None
    assert rec.conditional == 0


def test_trivialization_validation():
    m = product_blocks(ST2, ST3, 2, 4)
    fs = columns_and_F(m, F(1, 10), 0, [0])
    A = build_stage(ST2, 1).levels_set([0])
    B = build_stage(ST3, 1).levels_set([0])
    with pytest.raises(SpecError):
        trivialization_check(m, fs, A, B, 3)        # k > j
    from rankone.measure import Interval, IntervalSet
    half = IntervalSet((Interval(F(0), F(1, 4)),))  # half of a stage-1 level
    with pytest.raises(SpecError):
        trivialization_check(m, fs, half, B, 1)


def test_trivialization_weight_flatness_carried():
    m = product_blocks(ST2, ST3, 2, 4)
    fs = columns_and_F(m, F(1, 10), 0, [0, 1, 2])
    A = build_stage(ST2, 1).levels_set([0])
    B = build_stage(ST3, 1).levels_set([0])
    rec = trivialization_check(m, fs, A, B, 1)
    assert rec.weight_flatness == F(1, 3)


# ---------------------------------------------------------------- validation

def test_matrix_validation():
    with pytest.raises(SpecError):
        BlockMassMatrix(kind="product", j=1, h_a=2, h_b=2,
                        masses={BlockIndex(5, 0): F(1)}, residual=F(0),
                        norm_a=F(1), norm_b=F(1), level_mass_a=F(1, 2),
                        level_mass_b=F(1, 2), base_mass=F(1, 2),
                        spec_a=ODO, spec_b=ODO)
    with pytest.raises(SpecError):
        BlockMassMatrix(kind="product", j=1, h_a=2, h_b=2,
                        masses={BlockIndex(0, 0): F(1, 2)}, residual=F(1, 4),
                        norm_a=F(1), norm_b=F(1), level_mass_a=F(1, 2),
                        level_mass_b=F(1, 2), base_mass=F(1, 2),
                        spec_a=ODO, spec_b=ODO)
    with pytest.raises(SpecError):
        BlockMassMatrix(kind="product", j=1, h_a=2, h_b=2,
                        masses={BlockIndex(0, 0): F(-1, 2),
                                BlockIndex(0, 1): F(3, 2)}, residual=F(0),
                        norm_a=F(1), norm_b=F(1), level_mass_a=F(1, 2),
                        level_mass_b=F(1, 2), base_mass=F(1, 2),
                        spec_a=ODO, spec_b=ODO)
