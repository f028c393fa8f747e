"""Return-time profiles with two-sided rational bounds.

a^z is the fraction of the stage-j base that returns to it after z steps.
At a finite resolution J some orbits run off the top of the stage-J
tower, so the profile reports an enclosure [lo, hi]: lo counts resolved
returns, hi adds everything unresolved.  Deeper resolutions nest.
"""

from rankone import ConstructionSpec, max_profile, return_profile, build_stage

ODO = ConstructionSpec.odometer()
ST2 = ConstructionSpec.staircase(h1=2)


def show(profile, label, zs):
    print(label)
    for z in zs:
        b = profile[z]
        tag = " (degenerate)" if z in profile.degenerate else ""
        print(f"  a^{z:<3} in [{str(b.lo):>7}, {str(b.hi):>7}]{tag}")


def main():
    # bounds tighten as J grows and never cross
    for J in (3, 5, 7):
        prof = return_profile(ODO, 2, J, 8)
        show(prof, f"odometer j=2 at resolution {J}:", [4, 8])

    # the odometer returns fully every h_j steps: the upper bound is 1 at
    # every resolution, the signature of rigidity
    h2 = build_stage(ODO, 2).height
    for J in range(2, 9):
        assert return_profile(ODO, 2, J, h2)[h2].hi == 1
    print(f"\nodometer a^{h2} upper bound = 1 at resolutions 2..8")

    # the staircase spreads returns out instead; the peak past h_j decays
    # as j grows
    print("\nstaircase max a^z over h_j < z <= h_{j+3} - h_j:")
    for j in (2, 3, 4):
        hj = build_stage(ST2, j).height
        top = build_stage(ST2, j + 3).height - hj
        prof = return_profile(ST2, j, j + 4, top)
        peak = max_profile(prof, z_lo=hj)
        print(f"  j={j}: upper bound {peak.hi} = {float(peak.hi):.5f}")


if __name__ == "__main__":
    main()
