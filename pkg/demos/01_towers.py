"""Build the four preset constructions and watch the towers grow.

Each stage cuts the previous tower into columns, tops the columns with
spacer levels, and restacks.  Heights are integers, widths and total
measures exact rationals, so every number printed here is exact.
"""

from rankone import ConstructionSpec, build_stage

PRESETS = [
    ("odometer", ConstructionSpec.odometer()),
    ("staircase h1=2", ConstructionSpec.staircase(h1=2)),
    ("staircase h1=3", ConstructionSpec.staircase(h1=3)),
    ("chacon", ConstructionSpec.chacon()),
    ("random seed=7", ConstructionSpec.random_spacers(7)),
]


def main():
    for name, spec in PRESETS:
        print(f"\n{name}")
        print(f"  {'stage':>5} {'height':>8} {'width':>12} {'ambient':>12}")
        for j in range(1, 7):
            st = build_stage(spec, j)
            print(f"  {j:>5} {st.height:>8} {str(st.width):>12} "
                  f"{str(st.total):>12}")

    # the ambient interval only grows when spacers are added; the odometer
    # adds none, so its ambient stays [0, 1)
    odo6 = build_stage(ConstructionSpec.odometer(), 6)
    assert odo6.total == 1
    st6 = build_stage(ConstructionSpec.staircase(h1=2), 6)
    print(f"\nstaircase ambient after 6 stages: {st6.total} "
          f"(spacer mass {st6.total - 1})")

    # levels are intervals; the base is always [0, w_j)
    st3 = build_stage(ConstructionSpec.staircase(h1=2), 3)
    print(f"\nstaircase stage 3 levels ({st3.height} of width {st3.width}):")
    for i in range(st3.height):
        print(f"  level {i}: {st3.level(i)}")


if __name__ == "__main__":
    main()
