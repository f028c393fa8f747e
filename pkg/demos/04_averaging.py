"""Weighted orbit averages and the adjoint weight inequality.

A weight sequence a^z (nonnegative, summing to 1) defines an averaging
operator P f = sum_z a^z f(T^-z x).  Flat weights smear mass out; the
adjoint convolution b^w = sum_z a^{w+z} a^z never exceeds the largest
single weight, which is what makes long uniform averages contract.
"""

from fractions import Fraction

from rankone import ConstructionSpec, StepFunction, build_stage
from rankone.averaging import (
    WeightSequence,
    adjoint_convolution,
    average_apply,
    flatness,
    l2_deviation,
)

ODO = ConstructionSpec.odometer()


def main():
    w = WeightSequence.uniform(4)
    b = adjoint_convolution(w)
    print("uniform(4) adjoint convolution:")
    for lag, mass in b.items():
        print(f"  b^{lag:>2} = {mass}")
    print(f"  max b = {max(b.values())} <= flatness {flatness(w, 0)}")
    assert sum(b.values(), Fraction(0)) == 1

    # averaging an indicator flattens it toward its mean
    st1 = build_stage(ODO, 1)
    f = StepFunction.indicator(st1.levels_set([0]))
    M = build_stage(ODO, 6).total
    mean = f.integral() / M
    print(f"\nf = indicator of the first stage-1 level, mean {mean}")
    for n in (1, 2, 8, 16):
        wn = WeightSequence.uniform(n)
        Pf, escaped = average_apply(ODO, wn, f, 6)
        dev = l2_deviation(Pf, mean, escaped, M, sup_f=1)
        print(f"  uniform({n:>2}): ||Pf - mean||^2 in "
              f"[{str(dev.lo):>9}, {str(dev.hi):>9}]"
              f"  escaped <= {escaped.hi}")


if __name__ == "__main__":
    main()
