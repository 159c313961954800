#!/usr/bin/env python3
"""Oracle: randomized-response outcome law and the two-stage interactive
variant's joint law, over an (eps, delta) grid.

Computes, with exact fractions:
  rr law:   (Exposed, b) : delta
            (Private, b) : (1-delta) * rho / (1+rho)
            (Private,1-b): (1-delta) * 1 / (1+rho)
  irr joint law (flag answer then bit answer):
            first answer Exposed w.p. delta, then bit=b w.p. 1
            first answer Private w.p. 1-delta, then bit=b w.p. rho/(1+rho)
and checks they coincide as distributions over (flag, bit) for every grid
point, with rho exact-from-double exp(eps) as the C++ build does.
"""
from fractions import Fraction as F
import math

GRID_EPS = [0.0, math.log(2.0), math.log(3.0), 2.0]
GRID_DELTA = [0.0, 0.1, 0.5, 1.0]


def rr_law(rho: F, delta: F, b: int):
    law = {}
    law[("exp", b)] = delta
    law[("prv", b)] = (1 - delta) * rho / (1 + rho)
    law[("prv", 1 - b)] = (1 - delta) * 1 / (1 + rho)
    return {k: v for k, v in law.items() if v != 0}


def irr_joint(rho: F, delta: F, b: int):
    law = {}
    # exposed branch: bit deterministic
    if delta != 0:
        law[("exp", b)] = delta
    # private branch
    if delta != 1:
        law[("prv", b)] = (1 - delta) * rho / (1 + rho)
        if rho != 0:
            law[("prv", 1 - b)] = (1 - delta) * 1 / (1 + rho)
    return {k: v for k, v in law.items() if v != 0}


def main():
    print("== exact rational-mode point: rho=3, delta=1/10, b=0 ==")
    law = rr_law(F(3), F(1, 10), 0)
    for k in sorted(law):
        print(f"  {k}: {law[k]} = {float(law[k])}")
    assert law[("exp", 0)] == F(1, 10)
    assert law[("prv", 0)] == F(27, 40)
    assert law[("prv", 1)] == F(9, 40)

    print("== double-mode point: eps=ln3, delta=0.1, b=0 ==")
    rho = F(math.exp(math.log(3.0)))  # exact value of the double
    delta = F(0.1)                    # exact value of the double
    law = rr_law(rho, delta, 0)
    for k in sorted(law):
        err = abs(float(law[k]) - {("exp", 0): 0.1, ("prv", 0): 0.675,
                                   ("prv", 1): 0.225}[k])
        print(f"  {k}: {float(law[k])!r}  |err vs pinned| = {err:.3e}")
        assert err < 1e-12

    print("== grid identity rr == irr-joint ==")
    bad = 0
    for eps in GRID_EPS:
        for delta in GRID_DELTA:
            rho = F(math.exp(eps))
            d = F(delta)
            for b in (0, 1):
                a = rr_law(rho, d, b)
                c = irr_joint(rho, d, b)
                if a != c:
                    bad += 1
                    print(f"  MISMATCH eps={eps} delta={delta} b={b}")
    print(f"  grid points checked: {len(GRID_EPS)*len(GRID_DELTA)*2}, "
          f"mismatches: {bad}")
    assert bad == 0

    # irr conditional: after Exposed, second answer equals b with prob 1.
    j = irr_joint(F(3), F(1, 2), 1)
    assert ("exp", 0) not in j
    print("ok")


if __name__ == "__main__":
    main()
