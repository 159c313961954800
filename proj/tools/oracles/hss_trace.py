#!/usr/bin/env python3
"""Oracle: zero-noise traces of the monotone-histogram pipeline.

Independent mirror of the update rule, all noise forced to 0:

  init(eps, d, q, gamma, xi):
    counter <- d-counter(eps/3); h = c = 0^d; out = q(h); j = 1
    svt <- SVT(eps/6) seeded with h; Thresh = gamma(1,1); t = 0
  update(x):
    t += 1; c += x
    svt accumulates x; trips iff q(h_svt) > Thresh (+ zero noise)
    if tripped:
      h = counter.update(c); out = q(h); svt <- SVT(eps/6) seeded with h
      c = 0^d
      if q(c+h) + 0 > Thresh - xi(t,j): Thresh += gamma(t,j)
      j += 1; Thresh += -gamma(t,j-1) + gamma(t,j)
    Thresh += -gamma(t,j) + gamma(t+1,j)
    return out

Zero-noise d-counter returns exact running totals.  Traces frozen here
back the deterministic-mode unit tests; the first-trip index for the
default schedule backs a schedule-wiring check.
"""
import math
from fractions import Fraction as F


def run(inputs, d, q, gamma, xi):
    h = [0] * d
    c = [0] * d
    totals = [0] * d          # zero-noise counter state
    out = q(h)
    j = 1
    thresh = gamma(1, 1)
    svt = list(h)
    t = 0
    outputs = []
    trips = []
    for x in inputs:
        t += 1
        c = [a + b for a, b in zip(c, x)]
        svt = [a + b for a, b in zip(svt, x)]
        if q(svt) > thresh:
            trips.append(t)
            totals = [a + b for a, b in zip(totals, c)]
            h = list(totals)
            out = q(h)
            svt = list(h)
            c = [0] * d
            if q([a + b for a, b in zip(c, h)]) > thresh - xi(t, j):
                thresh += gamma(t, j)
            j += 1
            thresh += -gamma(t, j - 1) + gamma(t, j)
        thresh += -gamma(t, j) + gamma(t + 1, j)
        outputs.append(out)
    return outputs, trips, thresh, j


def default_gamma(d, beta, eps):
    def g(t, j):
        return 6 * (d * math.log((j + 1) * d / beta) ** 2 + math.log(t + 1)) / eps
    return g


ONE = lambda t, j: F(1)
ZERO = lambda t, j: F(0)
q_sum = lambda h: sum(h)
q_max = lambda h: max(h)


def main():
    print("== trace A: d=1 q=sum gamma=1 xi=0, inputs (1),(1) ==")
    outs, trips, _, _ = run([[1], [1]], 1, q_sum, ONE, ZERO)
    print(f"  outputs={outs} trips={trips}")
    assert outs == [0, 2] and trips == [2]

    print("== trace B: d=1 q=sum gamma=1 xi=0, inputs 1,0,1,1,0,1 ==")
    outs, trips, thresh, j = run([[1], [0], [1], [1], [0], [1]], 1, q_sum, ONE, ZERO)
    print(f"  outputs={outs} trips={trips} final_thresh={thresh} final_j={j}")
    assert outs == [0, 0, 2, 3, 3, 4] and trips == [3, 4, 6]
    assert thresh == 4 and j == 4

    print("== trace C: d=2 q=max gamma=1 xi=0 ==")
    stream = [[1, 0], [0, 1], [1, 1], [0, 0], [2, 0]]
    outs, trips, thresh, j = run(stream, 2, q_max, ONE, ZERO)
    print(f"  outputs={outs} trips={trips} final_thresh={thresh} final_j={j}")
    assert outs == [0, 0, 2, 2, 4] and trips == [3, 5]
    assert thresh == 3 and j == 3

    print("== trace D: gamma=2 constant, all-ones x6 ==")
    TWO = lambda t, j: F(2)
    outs, trips, thresh, j = run([[1]] * 6, 1, q_sum, TWO, ZERO)
    print(f"  outputs={outs} trips={trips} final_thresh={thresh} final_j={j}")
    assert outs == [0, 0, 3, 3, 5, 5] and trips == [3, 5]
    assert thresh == 6 and j == 3

    print("== trace E: default schedule, eps=1 beta=0.1 d=1, all-ones ==")
    g = default_gamma(1, 0.1, 1.0)
    xi = lambda t, j: g(t, j) / 2
    outs, trips, _, _ = run([[1]] * 200, 1, q_sum, g, xi)
    print(f"  trips={trips}")
    print(f"  gamma(1,1)={g(1, 1):.6f} (initial threshold)")
    # margin checks so the trip indices are fp-robust
    m1 = trips[0] - (6 * (math.log(20) ** 2 + math.log(trips[0] + 1)))
    m2 = trips[1] - (g(trips[0], 1) + g(trips[1], 2))
    print(f"  trip margins: {m1:.4f} {m2:.4f}")
    assert trips == [81, 181] and m1 > 0.5 and m2 > 0.05

    print("== creation sequence for trace A (eps=3) ==")
    # init: d_counter at eps/3=1, svt at eps/6=1/2; per trip: svt, laplace at eps/3
    print("  [d_counter@1, svt@1/2] then trip -> [svt@1/2, laplace@1]")
    print("ok")


if __name__ == "__main__":
    main()
