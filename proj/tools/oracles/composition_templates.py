#!/usr/bin/env python3
"""Oracle: two-mechanism adaptive composition over the template family.

Template family (128 members) against a concurrent-composition stack
holding two randomized-response children with params (rho1,d1),(rho2,d2):
  - first target i in {1,2}                       (2 choices)
  - first query pair (x0,x1) in {0,1}^2           (4 choices)
  - second target is the other child
  - second query pair chosen per the BIT of the first answer,
    4 choices per branch, 2 branches                (16 choices)

Under challenge bit b the forwarded queries are x_b then y[bit]_b, so the
joint answer law is

  P_b(a1,a2) = rr_i(x_b)(a1) * rr_j(y[bit(a1)]_b)(a2).

Frozen facts:
  1. max over templates of the two-sided hockey-stick at e^eps = rho1*rho2
     equals 1-(1-d1)(1-d2) exactly (rational arithmetic), both for equal
     and heterogeneous parameter pairs.
  2. the double rendering of that bound for two (0.5, 0.1) children is
     exactly 0.19, matching the composition command's report.
"""
import itertools
import math
from fractions import Fraction as F


def rr_law(rho, delta, b):
    """outcomes: ('E', bit) exposed, ('P', bit) private."""
    return {
        ("E", b): delta,
        ("P", b): (1 - delta) * rho / (1 + rho),
        ("P", 1 - b): (1 - delta) / (1 + rho),
    }


def hockey_stick(p0, p1, e_eps):
    keys = set(p0) | set(p1)
    a = sum(max(F(0), p0.get(k, F(0)) - e_eps * p1.get(k, F(0))) for k in keys)
    b = sum(max(F(0), p1.get(k, F(0)) - e_eps * p0.get(k, F(0))) for k in keys)
    return max(a, b)


def view_law(params, template, b):
    (rho1, d1), (rho2, d2) = params
    first, (x0, x1), second_by_bit = template
    laws = {1: lambda q: rr_law(rho1, d1, q), 2: lambda q: rr_law(rho2, d2, q)}
    other = 3 - first
    out = {}
    xq = (x0, x1)[b]
    for a1, p1 in laws[first](xq).items():
        y_pair = second_by_bit[a1[1]]
        yq = y_pair[b]
        for a2, p2 in laws[other](yq).items():
            key = (a1, a2)
            out[key] = out.get(key, F(0)) + p1 * p2
    return out


def templates():
    bits = [0, 1]
    pairs = list(itertools.product(bits, bits))
    for first in (1, 2):
        for x in pairs:
            for y0 in pairs:
                for y1 in pairs:
                    yield (first, x, {0: y0, 1: y1})


def max_hs(params):
    e_eps = params[0][0] * params[1][0]
    best = F(0)
    count = 0
    for tpl in templates():
        p0 = view_law(params, tpl, 0)
        p1 = view_law(params, tpl, 1)
        best = max(best, hockey_stick(p0, p1, e_eps))
        count += 1
    return best, count


def main():
    print("== equal pair: two rr children, eps=0.5 delta=0.1 (double-derived) ==")
    rho = F(math.exp(0.5))
    d = F(0.1)
    best, count = max_hs([(rho, d), (rho, d)])
    bound = 1 - (1 - d) ** 2
    print(f"  templates={count} max_hs={float(best)!r} bound={float(bound)!r}")
    print(f"  exact equality: {best == bound}")
    assert count == 128 and best == bound
    assert float(bound) == 0.19

    print("== heterogeneous pair: (0.3,0.05) and (0.7,0.2) ==")
    params = [(F(math.exp(0.3)), F(0.05)), (F(math.exp(0.7)), F(0.2))]
    best, count = max_hs(params)
    bound = 1 - (1 - params[0][1]) * (1 - params[1][1])
    print(f"  max_hs={float(best)!r} bound={float(bound)!r} equal={best == bound}")
    assert best == bound

    print("== rational-mode pair: (rho=3, delta=1/10) twice ==")
    params = [(F(3), F(1, 10)), (F(3), F(1, 10))]
    best, _ = max_hs(params)
    bound = 1 - (1 - F(1, 10)) ** 2
    print(f"  max_hs={best} bound={bound} equal={best == bound}")
    assert best == bound == F(19, 100)
    print("ok")


if __name__ == "__main__":
    main()
