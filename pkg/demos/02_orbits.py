"""Iterate points exactly under the tower map.

The transformation moves each level of the current tower one step up;
points at the top wait for a deeper stage to say where they go next.
A cursor tracks (stage, level, offset) so each step is integer work and
the point value stays an exact rational forever.
"""

from fractions import Fraction

from rankone import ConstructionSpec, Cursor, OrbitEscaped, apply_power

ODO = ConstructionSpec.odometer()
ST2 = ConstructionSpec.staircase(h1=2)


def main():
    # the odometer orbit of 0 enumerates dyadic points
    print("odometer orbit of 0:")
    cur = Cursor(ODO, 0)
    pts = [str(cur.x)]
    for k in range(15):
        cur.step_forward(k)
        pts.append(str(cur.x))
    print("  " + " -> ".join(pts[:8]))
    print("  " + " -> ".join(pts[8:]))
    print(f"  refinements used: {cur.refinements}")

    # T^n directly; negative powers run the map backward
    x = apply_power(ST2, Fraction(1, 7), 100).x
    print(f"\nstaircase T^100(1/7) = {x}")
    back = apply_power(ST2, x, -100).x
    print(f"T^-100 of that      = {back} (round trip exact)")
    assert back == Fraction(1, 7)

    # points can need stages beyond the budget; the failure names the
    # stage and carries the partial progress
    try:
        apply_power(ODO, 0, 10 ** 6, stage_budget=5)
    except OrbitEscaped as exc:
        print(f"\nbudget too small: {exc}")
        print(f"  steps completed before escape: {exc.steps_done}")


if __name__ == "__main__":
    main()
