#!/usr/bin/env python3
"""Oracle: hockey-stick divergence values used as frozen expectations.

 1. For the randomized-response law at its own rho: delta(rho) == delta,
    algebraically and for 5 concrete parameter points.
 2. k-fold product of rho=1 (eps=0) laws: delta at threshold 1 (= TV)
    equals 1 - (1-delta)^k; includes the k=3, delta=0.2 value 0.488.
 3. A small asymmetric pair to pin a non-trivial two-sided value.
"""
from fractions import Fraction as F
import math
from itertools import product


def rr_law(rho, delta, b):
    law = {("exp", b): delta,
           ("prv", b): (1 - delta) * rho / (1 + rho),
           ("prv", 1 - b): (1 - delta) / (1 + rho)}
    return {k: v for k, v in law.items() if v != 0}


def hockey_stick(p0, p1, e_eps):
    keys = set(p0) | set(p1)
    a = sum(max(F(0), p0.get(k, F(0)) - e_eps * p1.get(k, F(0))) for k in keys)
    b = sum(max(F(0), p1.get(k, F(0)) - e_eps * p0.get(k, F(0))) for k in keys)
    return max(a, b)


def product_law(laws):
    out = {(): F(1)}
    for law in laws:
        nxt = {}
        for key, p in out.items():
            for k, q in law.items():
                nxt[key + (k,)] = p * q
        out = nxt
    return out


def main():
    print("== rr hockey-stick at own rho ==")
    points = [(math.log(3), 0.1), (math.log(2), 0.5), (0.7, 0.05),
              (1.2, 0.0), (0.0, 0.3)]
    for eps, delta in points:
        rho, d = F(math.exp(eps)), F(delta)
        p0, p1 = rr_law(rho, d, 0), rr_law(rho, d, 1)
        hs = hockey_stick(p0, p1, rho)
        print(f"  eps={eps:.6f} delta={delta}: hs == delta exactly: {hs == d}")
        assert hs == d

    print("== k-fold eps=0 product TV ==")
    for delta in (0.05, 0.2, 0.5):
        d = F(delta)
        for k in range(1, 11):
            p0 = product_law([rr_law(F(1), d, 0)] * k)
            p1 = product_law([rr_law(F(1), d, 1)] * k)
            tv = hockey_stick(p0, p1, F(1))
            expect = 1 - (1 - d) ** k
            assert tv == expect, (delta, k, tv, expect)
        print(f"  delta={delta}: TV == 1-(1-delta)^k for k=1..10")
    v = 1 - (1 - F(1, 5)) ** 3
    print(f"  k=3 delta=0.2 value: {v} = {float(v)}")
    assert v == F(61, 125) and float(v) == 0.488

    print("== asymmetric two-sided pin ==")
    p0 = {("a",): F(1, 2), ("b",): F(1, 4), ("c",): F(1, 4)}
    p1 = {("a",): F(1, 8), ("b",): F(3, 4), ("c",): F(1, 8)}
    for e_eps in (F(1), F(3, 2), F(2)):
        print(f"  e_eps={e_eps}: hs={hockey_stick(p0, p1, e_eps)}")
    # frozen: e_eps=1 -> 1/2; e_eps=3/2 -> max(5/16+1/16, 3/8)=3/8... printed
    print("ok")


if __name__ == "__main__":
    main()
