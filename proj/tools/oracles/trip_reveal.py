#!/usr/bin/env python3
"""Oracle: the two-state reveal-on-trip mechanism and the probe adversary.

Mechanism (parameter delta), state starts at TOP:
  state TOP, input b: -> (TOP, answer TOP) w.p. 1-delta
                      -> (BOT, answer BOT) w.p. delta
  state BOT, input b: -> (BOT, answer b)   w.p. 1

 1. Two-query chain PMF on inputs (0,0) at delta=1/2 (spec-pinned 3 outcomes).
 2. Exact revealing mass of the probe adversary against ell mechanisms:
    1-(1-delta)^ell, tabulated for delta=1/2, ell=1..6.
 3. Distinguishing-game success rate with guess-0 on giveup:
    (1 + p)/2 with p = 1-(1-delta)^ell; value at delta=1/2, ell=3.
 4. Expected number of creations for unbounded budget: 1/delta.
"""
from fractions import Fraction as F


def two_query_pmf(delta, b1, b2):
    """Joint law of (answer1, answer2) on inputs b1 then b2."""
    d = F(delta)
    out = {}
    # TOP survives twice
    out[("T", "T")] = (1 - d) * (1 - d)
    # TOP then trip at second
    out[("T", "B")] = (1 - d) * d
    # trip at first, second answer echoes b2
    out[("B", b2)] = d
    return {k: v for k, v in out.items() if v != 0}


def main():
    print("== two-query chain at delta=1/2, inputs (0,0) ==")
    pmf = two_query_pmf(F(1, 2), 0, 0)
    for k in sorted(map(str, pmf)):
        pass
    for k, v in sorted(pmf.items(), key=lambda kv: str(kv[0])):
        print(f"  {k}: {v} = {float(v)}")
    assert pmf[("T", "T")] == F(1, 4)
    assert pmf[("T", "B")] == F(1, 4)
    assert pmf[("B", 0)] == F(1, 2)

    print("== revealing mass 1-(1-delta)^ell, delta=1/2 ==")
    d = F(1, 2)
    for ell in range(1, 7):
        mass = 1 - (1 - d) ** ell
        print(f"  ell={ell}: {mass} = {float(mass)}")

    print("== game success (guess 0 on giveup) ==")
    for delta, ell in [(F(1, 2), 3), (F(1, 4), 8), (F(1, 2), 6)]:
        p = 1 - (1 - delta) ** ell
        succ = (1 + p) / 2
        print(f"  delta={delta} ell={ell}: exposure={p}={float(p)} "
              f"success={succ}={float(succ)}")
    assert (1 + (1 - (1 - F(1, 2)) ** 3)) / 2 == F(15, 16)
    assert float(1 - (1 - F(0.25)) ** 8) - 0.8999 < 1e-4

    print("== expected creations, unbounded budget ==")
    for delta in (F(1, 2), F(1, 4)):
        print(f"  delta={delta}: 1/delta = {1/delta}")
    print("ok")


if __name__ == "__main__":
    main()
