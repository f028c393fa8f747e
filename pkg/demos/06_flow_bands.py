"""Flow skeletons: thickened bases, windowed returns, and band masses.

Replacing single time steps with a grid of step 1/q turns tower returns
into window sums of q+1 profile entries.  A speed ratio alpha = p/q'
pairs the system with itself running p grid steps against q'; the blocks
such a pair can co-occupy form bands in the stage-j grid.
"""

from fractions import Fraction

from rankone import ConstructionSpec, build_stage
from rankone.flow import (
    FlowSkeletonSpec,
    band_indices,
    band_masses,
    consequence_check,
    thickened_base,
    windowed_return_flow,
)
from rankone.joinings import product_blocks

ODO = ConstructionSpec.odometer()


def main():
    fs = FlowSkeletonSpec(ODO, 2, Fraction(2))
    print(f"skeleton: alpha = {fs.alpha}, grid step {fs.t}")

    th = thickened_base(fs, 3, 6)
    print(f"thickened stage-3 base: levels 0..{fs.grid_inverse}, "
          f"measure {th.measure} = (q+1) w_3 = "
          f"{(fs.grid_inverse + 1) * build_stage(ODO, 3).width}")

    rep = windowed_return_flow(fs, 2, 6, range(9))
    print("\nwindowed returns (j=2, window q+1=3):")
    for z, b in sorted(rep.values.items()):
        print(f"  window [{z}, {z + rep.q}]: [{b.lo}, {b.hi}]")
    print(f"  max over range: [{rep.max_bound.lo}, {rep.max_bound.hi}]")

    # two independent routes to the same overlap must agree
    rec = consequence_check(fs, 2, 5, 4)
    print(f"\nconsequence check at z=4: window route "
          f"[{rec.window_route.lo}, {rec.window_route.hi}], geometric "
          f"[{rec.geometric_route.lo}, {rec.geometric_route.hi}], "
          f"consistent: {rec.consistent}")

    # doubled-speed bands over the product self-joining
    dbl = FlowSkeletonSpec.doubled(ODO)
    m = product_blocks(ODO, ODO, 2, 4)
    print("\nright bands of the doubled skeleton (stage 2):")
    for w in range(4):
        idx = band_indices(dbl, 4, 4, w, "right")
        mass = band_masses(m, dbl, w, "right")
        blocks = sorted((b.z1, b.z2) for b in idx)
        print(f"  offset {w}: {len(idx)} blocks {blocks}, mass {mass}")


if __name__ == "__main__":
    main()
