#!/usr/bin/env python3
"""Oracle: finite-horizon reduction tables and the lazy IRR post-processor.

Independent implementation over exact fractions of:
  mu     forward chain rule over per-step conditional laws
  L      backward recursion, base max{0, mu^b - e^eps * mu^(1-b)}
         Lower_t(..., q_t) = sum_a L_t(..., a)
  xi     per answer in declared order, lexicographic max of
           (xi.1) x_b >= L_t^b
           (xi.2) prefix-xi + x_b + suffix-L <= delta * phi_{t-1}^b
           (xi.3) x_b - e^(-eps) x_(1-b) <= mu^b - e^(-eps) mu^(1-b)
           (xi.4) x_b <= min{mu^b, L^0 + L^1}
  phi    per answer in declared order, over
           (phi.1) delta x_b >= xi^b
           (phi.2) prefix-phi + x_b + (1/delta) suffix-xi <= phi_{t-1}^b
           (phi.3) delta x_b - e^(-eps) delta x_(1-b) <= mu^b - e^(-eps) mu^(1-b)
         taking the maximal equal-coordinate solution when one exists,
         else the lexicographic max
  psi    phi when delta = 1, else
         (e^eps mu^b - delta e^eps phi^b - mu^(1-b) + delta phi^(1-b))
           / ((1-delta)(e^eps - 1))

Families: exposed = phi ratios, private = psi ratios; the post-processor
asks for the second IRR output at the first (h, q) whose families differ
across b.

Instances:
  A. rr at (rho=3, delta=1/10), one query, horizon 1
  B. same padded with a halt answer to horizon 2 (stationarity check)
  C. m_delta(1/2) behind its verifier/identifier stack, e^eps=2, horizon 3
  D. random 2-query binary-answer table at e^eps=2, delta = max_b L_0^b
  E. constant coin (mu^0 = mu^1), delta collapses to 0
"""
from fractions import Fraction as F
import itertools
import random

# ---------------------------------------------------------------- LP pieces


class Infeasible(Exception):
    pass


def vertices(hp):
    """All pairwise intersections of the constraint boundaries."""
    cands = []
    for (a1, b1, c1), (a2, b2, c2) in itertools.combinations(hp, 2):
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        x0 = (c1 * b2 - c2 * b1) / det
        x1 = (a1 * c2 - a2 * c1) / det
        cands.append((x0, x1))
    return [p for p in cands
            if all(a * p[0] + b * p[1] <= c for a, b, c in hp)]


def lex_max(hp):
    feas = vertices(hp)
    if not feas:
        raise Infeasible(hp)
    return max(feas)


def diag_max(hp):
    """Max z with (z,z) feasible, or None."""
    hi, lo = None, None
    for a, b, c in hp:
        s = a + b
        if s > 0:
            v = c / s
            hi = v if hi is None else min(hi, v)
        elif s < 0:
            v = c / s
            lo = v if lo is None else max(lo, v)
        elif c < 0:
            return None
    if hi is None:
        return None
    if lo is not None and lo > hi:
        return None
    return hi


def phi_select(hp):
    """Maximal equal-coordinate pair if one exists, else lex max."""
    lex = lex_max(hp)
    z = diag_max(hp)
    if z is None:
        return lex
    dominated = vertices(hp + [(-1, 0, -z), (0, -1, -z)])
    best = max(p[0] + p[1] for p in dominated)
    if best > 2 * z:
        return lex
    return (z, z)


# ---------------------------------------------------------------- tables


class Tables:
    def __init__(self, Q, A, T, e_eps, step):
        """step(b, history, q) -> {a: prob}; history = tuple of (q, a)."""
        self.Q, self.A, self.T, self.e = Q, A, T, e_eps
        self.mu = {b: [{(): F(1)}] for b in (0, 1)}
        for b in (0, 1):
            for t in range(1, T + 1):
                layer = {}
                for h, p in self.mu[b][t - 1].items():
                    for q in Q:
                        law = step(b, h, q)
                        for a in A:
                            layer[h + ((q, a),)] = p * law.get(a, F(0))
                self.mu[b].append(layer)

    def compute_L(self, T=None):
        T = self.T if T is None else T
        L = {b: [None] * (T + 1) for b in (0, 1)}
        lower = {b: [None] * (T + 1) for b in (0, 1)}
        for b in (0, 1):
            L[b][T] = {h: max(F(0), self.mu[b][T][h] - self.e * self.mu[1 - b][T][h])
                       for h in self.mu[b][T]}
            for t in range(T - 1, -1, -1):
                lower[b][t + 1] = {}
                L[b][t] = {}
                for h in self.mu[b][t]:
                    for q in self.Q:
                        lower[b][t + 1][h + (q,)] = sum(
                            L[b][t + 1][h + ((q, a),)] for a in self.A)
                    L[b][t][h] = max(lower[b][t + 1][h + (q,)] for q in self.Q)
        return L, lower

    def compute_xi_phi(self, L, delta):
        c = 1 / self.e
        xi = {b: [dict() for _ in range(self.T + 1)] for b in (0, 1)}
        phi = {b: [dict() for _ in range(self.T + 1)] for b in (0, 1)}
        for b in (0, 1):
            xi[b][0][()] = F(0)  # placeholder, unused
            phi[b][0][()] = F(1)
        for t in range(1, self.T + 1):
            for h in self.mu[0][t - 1]:
                for q in self.Q:
                    mu = {b: {a: self.mu[b][t][h + ((q, a),)] for a in self.A}
                          for b in (0, 1)}
                    l = {b: {a: L[b][t][h + ((q, a),)] for a in self.A}
                         for b in (0, 1)}
                    tail_l = {b: sum(l[b].values()) for b in (0, 1)}
                    used_xi = {b: F(0) for b in (0, 1)}
                    # xi pass
                    xrow = {}
                    for a in self.A:
                        for b in (0, 1):
                            tail_l[b] -= l[b][a]
                        if delta == 0:
                            assert l[0][a] == l[1][a] == 0
                            xrow[a] = (F(0), F(0))
                        else:
                            hp = []
                            for b, (sx, sy) in ((0, (1, 0)), (1, (0, 1))):
                                cap2 = (delta * phi[b][t - 1][h]
                                        - used_xi[b] - tail_l[b])
                                cap4 = min(mu[b][a], l[0][a] + l[1][a])
                                hp += [(-sx, -sy, -l[b][a]),
                                       (sx, sy, cap2),
                                       (sx, sy, min(cap4, F(1)))]
                            hp += [(1, -c, mu[0][a] - c * mu[1][a]),
                                   (-c, 1, mu[1][a] - c * mu[0][a])]
                            xrow[a] = lex_max(hp)
                        used_xi[0] += xrow[a][0]
                        used_xi[1] += xrow[a][1]
                        xi[0][t][h + ((q, a),)] = xrow[a][0]
                        xi[1][t][h + ((q, a),)] = xrow[a][1]
                    # phi pass
                    tail_xi = {b: sum(xrow[a][b] for a in self.A) for b in (0, 1)}
                    used_phi = {b: F(0) for b in (0, 1)}
                    for a in self.A:
                        for b in (0, 1):
                            tail_xi[b] -= xrow[a][b]
                        hp = []
                        for b, (sx, sy) in ((0, (1, 0)), (1, (0, 1))):
                            if delta == 0:
                                assert tail_xi[b] == 0
                                lowb = F(0)
                                tail = F(0)
                            else:
                                lowb = xrow[a][b] / delta
                                tail = tail_xi[b] / delta
                            cap2 = phi[b][t - 1][h] - used_phi[b] - tail
                            hp += [(-sx, -sy, -lowb),
                                   (sx, sy, cap2),
                                   (sx, sy, F(1)),
                                   (-sx, -sy, F(0))]
                        if delta == 0:
                            assert mu[0][a] - c * mu[1][a] >= 0
                            assert mu[1][a] - c * mu[0][a] >= 0
                        else:
                            hp += [(delta, -c * delta, mu[0][a] - c * mu[1][a]),
                                   (-c * delta, delta, mu[1][a] - c * mu[0][a])]
                        p = phi_select(hp)
                        used_phi[0] += p[0]
                        used_phi[1] += p[1]
                        phi[0][t][h + ((q, a),)] = p[0]
                        phi[1][t][h + ((q, a),)] = p[1]
        return xi, phi

    def compute_psi(self, phi, delta):
        psi = {b: [dict() for _ in range(self.T + 1)] for b in (0, 1)}
        for b in (0, 1):
            psi[b][0][()] = F(1)
        for t in range(1, self.T + 1):
            for h in self.mu[0][t]:
                for b in (0, 1):
                    if delta == 1:
                        psi[b][t][h] = phi[b][t][h]
                    else:
                        num = (self.e * self.mu[b][t][h]
                               - delta * self.e * phi[b][t][h]
                               - self.mu[1 - b][t][h]
                               + delta * phi[1 - b][t][h])
                        psi[b][t][h] = num / ((1 - delta) * (self.e - 1))
        return psi


def verify(tb, L, lower, xi, phi, psi, delta, name):
    e, c = tb.e, 1 / tb.e
    # chain rule on mu
    for b in (0, 1):
        for t in range(1, tb.T + 1):
            for h in tb.mu[b][t - 1]:
                for q in tb.Q:
                    assert sum(tb.mu[b][t][h + ((q, a),)] for a in tb.A) \
                        == tb.mu[b][t - 1][h]
    # dominance: sum_a L_t <= L_{t-1}; lower consistency
    for b in (0, 1):
        for t in range(1, tb.T + 1):
            for h in tb.mu[b][t - 1]:
                for q in tb.Q:
                    assert lower[b][t][h + (q,)] <= L[b][t - 1][h]
    # conditions I-III
    for b in (0, 1):
        for t in range(0, tb.T + 1):
            for h in tb.mu[b][t]:
                assert delta * phi[b][t][h] >= L[b][t][h] - 0, (name, t, h)
                lhs = delta * phi[b][t][h] - c * delta * phi[1 - b][t][h]
                rhs = tb.mu[b][t][h] - c * tb.mu[1 - b][t][h]
                assert lhs <= rhs, (name, t, h)
                assert 0 <= phi[b][t][h] <= 1
                assert psi[b][t][h] >= 0, (name, t, h)
        for t in range(1, tb.T + 1):
            for h in tb.mu[b][t - 1]:
                for q in tb.Q:
                    assert sum(phi[b][t][h + ((q, a),)] for a in tb.A) \
                        == phi[b][t - 1][h], (name, b, t, h, q)
                    assert sum(psi[b][t][h + ((q, a),)] for a in tb.A) \
                        == psi[b][t - 1][h]
    # condition IV on query sequences with identical answer laws
    for t in range(1, tb.T + 1):
        for qs in itertools.product(tb.Q, repeat=t):
            transcripts = [tuple(zip(qs, ans))
                           for ans in itertools.product(tb.A, repeat=t)]
            if all(tb.mu[0][t][h] == tb.mu[1][t][h] for h in transcripts):
                for h in transcripts:
                    assert phi[0][t][h] == phi[1][t][h] >= min(
                        tb.mu[0][t][h], L[0][t][h] + L[1][t][h]), (name, h)
    # mixture identity
    rho = e / (1 + e)
    for b in (0, 1):
        for t in range(0, tb.T + 1):
            for h in tb.mu[b][t]:
                mix = (delta * phi[b][t][h]
                       + (1 - delta) * rho * psi[b][t][h]
                       + (1 - delta) * (1 - rho) * psi[1 - b][t][h])
                assert mix == tb.mu[b][t][h], (name, b, t, h)
    print(f"  [{name}] chain, dominance, (I)-(IV), mixture: all exact")


def family(tab, t, h, q, A):
    den = tab[t - 1][h]
    if den == 0:
        return None
    return tuple(tab[t][h + ((q, a),)] / den for a in A)


def second_interaction_exists(tb, phi, psi, qs):
    """Per flag branch: is a live (h, q) with differing families reached?"""
    out = {}
    for fname, tab in (("exposed", phi), ("private", psi)):
        hit = False
        frontier = [()]
        for t, q in enumerate(qs, start=1):
            nxt = []
            for h in frontier:
                fams = {b: {n: family(tabs[b], t, h, q, tb.A)
                            for n, tabs in (("e", phi), ("p", psi))}
                        for b in (0, 1)}
                if fams[0]["e"] != fams[1]["e"] or fams[0]["p"] != fams[1]["p"]:
                    hit = True
                    continue  # branch switches to a fixed family; stop scanning
                for a in tb.A:
                    if any(tab[b][t][h + ((q, a),)] > 0 for b in (0, 1)):
                        nxt.append(h + ((q, a),))
            frontier = nxt
        out[fname] = hit
    return out


# ---------------------------------------------------------------- instances


def rr_step(rho, dl):
    def step(b, h, q):
        if h:
            return {"H": F(1)}
        return {("E0", "E1")[b]: dl,
                ("P0", "P1")[b]: (1 - dl) * rho / (1 + rho),
                ("P1", "P0")[b]: (1 - dl) / (1 + rho)}
    return step


def m_delta_step(dm):
    def step(b, h, q):
        if any(a == "H" for _, a in h):
            return {"H": F(1)}
        pairs = [p for p, _ in h] + [q]
        if len(pairs) > 2 or sum(p[0] != p[1] for p in pairs) > 1:
            return {"H": F(1)}
        if any(a in ("B", "0", "1") for _, a in h):
            return {str(q[b]): F(1)}
        return {"T": 1 - dm, "B": dm}
    return step


def run_instance(name, Q, A, T, e_eps, delta, step):
    tb = Tables(Q, A, T, e_eps, step)
    L, lower = tb.compute_L()
    xi, phi = tb.compute_xi_phi(L, delta)
    psi = tb.compute_psi(phi, delta)
    verify(tb, L, lower, xi, phi, psi, delta, name)
    return tb, L, lower, xi, phi, psi


def main():
    # A: rr, rho=3, delta=1/10, T=1
    rho, dl = F(3), F(1, 10)
    A_rr = ["E0", "E1", "P0", "P1"]
    tb, L, lower, xi, phi, psi = run_instance(
        "rr", [()], A_rr, 1, rho, dl, rr_step(rho, dl))
    h = lambda a: (((), a),)
    print("  rr mu^0:", [tb.mu[0][1][h(a)] for a in A_rr])
    print("  rr L^0: ", [L[0][1][h(a)] for a in A_rr],
          " L_0^0() =", L[0][0][()], " Lower_1^0 =", lower[0][1][((),)])
    print("  rr xi^0:", [xi[0][1][h(a)] for a in A_rr])
    print("  rr phi: ", [(phi[0][1][h(a)], phi[1][1][h(a)]) for a in A_rr])
    print("  rr psi: ", [(psi[0][1][h(a)], psi[1][1][h(a)]) for a in A_rr])
    assert [tb.mu[0][1][h(a)] for a in A_rr] == [dl, 0, F(27, 40), F(9, 40)]
    assert [L[0][1][h(a)] for a in A_rr] == [dl, 0, 0, 0]
    assert L[0][0][()] == dl and lower[0][1][((),)] == dl
    assert [xi[0][1][h(a)] for a in A_rr] == [dl, 0, 0, 0]
    assert [xi[1][1][h(a)] for a in A_rr] == [0, dl, 0, 0]
    assert [phi[0][1][h(a)] for a in A_rr] == [1, 0, 0, 0]
    assert [phi[1][1][h(a)] for a in A_rr] == [0, 1, 0, 0]
    assert [psi[0][1][h(a)] for a in A_rr] == [0, 0, 1, 0]
    assert [psi[1][1][h(a)] for a in A_rr] == [0, 0, 0, 1]
    hits = second_interaction_exists(tb, phi, psi, [()])
    assert hits == {"exposed": True, "private": True}
    print("  rr: families differ at the first query (both branches)")

    # B: rr padded to horizon 2; stationarity of L under padding
    tb2, L2, _, _, _, _ = run_instance(
        "rr+pad", [()], A_rr + ["H"], 2, rho, dl, rr_step(rho, dl))
    for a in A_rr:
        assert L2[0][1][h(a)] == L[0][1][h(a)]
    assert L2[0][0][()] == L[0][0][()]
    print("  rr+pad: L_{t,2} == L_{t,1} on live transcripts (stationary)")

    # C: m_delta(1/2) stack, e^eps = 2, T = 3
    Q = [(0, 0), (0, 1), (1, 0), (1, 1)]
    A_md = ["0", "1", "T", "B", "H"]
    dm = F(1, 2)
    tb, L, lower, xi, phi, psi = run_instance(
        "m_delta", Q, A_md, 3, F(2), dm, m_delta_step(dm))
    assert L[0][0][()] == dm  # saturates delta
    h1 = lambda a: (((0, 0), a),)
    print("  m_delta L_0^0() =", L[0][0][()])
    print("  m_delta phi_1 at ((0,0),a):",
          [(phi[0][1][h1(a)], phi[1][1][h1(a)]) for a in A_md])
    print("  m_delta psi_1 at ((0,0),a):",
          [(psi[0][1][h1(a)], psi[1][1][h1(a)]) for a in A_md])
    assert [phi[0][1][h1(a)] for a in A_md] == [0, 0, 0, 1, 0]
    assert [psi[0][1][h1(a)] for a in A_md] == [0, 0, 1, 0, 0]
    assert [psi[1][1][h1(a)] for a in A_md] == [0, 0, 1, 0, 0]
    # exposed family at history ((0,0),B), query (0,1): point mass on the bit
    hB = h1("B")
    f0 = family(phi[0], 2, hB, (0, 1), A_md)
    f1 = family(phi[1], 2, hB, (0, 1), A_md)
    print("  m_delta exposed family at (B,(0,1)):", f0, f1)
    assert f0 == (1, 0, 0, 0, 0) and f1 == (0, 1, 0, 0, 0)
    hits = second_interaction_exists(tb, phi, psi, [(0, 0), (0, 1)])
    print("  m_delta [(0,0),(0,1)] second interaction:", hits)
    assert hits == {"exposed": True, "private": False}
    for qs in [[(0, 0), (0, 0)], [(1, 1), (0, 0), (1, 1)], [(0, 1), (1, 1)]]:
        hits = second_interaction_exists(tb, phi, psi, qs)
        assert hits == {"exposed": False, "private": False}, qs
    print("  m_delta identical-pair sequences: single interaction")

    # D: random 2-query binary-answer table, delta from its own recursion
    rng = random.Random(20260815)
    laws = {}
    def rand_step(b, h, q):
        key = (b, h, q)
        if key not in laws:
            k = rng.randint(1, 7)
            laws[key] = {"a": F(k, 8), "b": F(8 - k, 8)}
        return laws[key]
    tbr = Tables(["q0", "q1"], ["a", "b"], 2, F(2), rand_step)
    Lr, lowerr = tbr.compute_L()
    dr = max(Lr[0][0][()], Lr[1][0][()])
    print("  random table: delta = max_b L_0^b =", dr)
    assert dr > 0
    xir, phir = tbr.compute_xi_phi(Lr, dr)
    psir = tbr.compute_psi(phir, dr)
    verify(tbr, Lr, lowerr, xir, phir, psir, dr, "random")
    # monotonicity in T on the same mu: recompute at T=1
    Lr1, _ = tbr.compute_L(T=1)
    for b in (0, 1):
        for t in (0, 1):
            for hh in tbr.mu[b][t]:
                assert Lr1[b][t][hh] <= Lr[b][t][hh]
    print("  random table: L_{t,1} <= L_{t,2} pointwise")

    # F: pure rr (delta = 0, rho = 2): degenerate branch with mu^0 != mu^1
    rho0 = F(2)
    tb0, L0, _, xi0, phi0, psi0 = run_instance(
        "rr-pure", [()], A_rr, 1, rho0, F(0), rr_step(rho0, F(0)))
    assert [tb0.mu[0][1][h(a)] for a in A_rr] == [0, 0, F(2, 3), F(1, 3)]
    assert all(L0[b][1][h(a)] == 0 for b in (0, 1) for a in A_rr)
    assert all(xi0[b][1][h(a)] == 0 for b in (0, 1) for a in A_rr)
    assert [phi0[0][1][h(a)] for a in A_rr] == [1, 0, 0, 0]
    assert [phi0[1][1][h(a)] for a in A_rr] == [1, 0, 0, 0]
    assert [psi0[0][1][h(a)] for a in A_rr] == [0, 0, 1, 0]
    assert [psi0[1][1][h(a)] for a in A_rr] == [0, 0, 0, 1]
    hits = second_interaction_exists(tb0, phi0, psi0, [()])
    assert hits == {"exposed": True, "private": True}
    print("  rr-pure: phi = shared first-answer point mass, psi = DP ratios")

    # E: constant coin, mu^0 == mu^1, delta = 0
    coin = lambda b, h, q: {"h": F(1, 2), "t": F(1, 2)}
    tbc = Tables(["q"], ["h", "t"], 2, F(2), coin)
    Lc, lowerc = tbc.compute_L()
    assert max(Lc[0][0][()], Lc[1][0][()]) == 0
    xic, phic = tbc.compute_xi_phi(Lc, F(0))
    psic = tbc.compute_psi(phic, F(0))
    verify(tbc, Lc, lowerc, xic, phic, psic, F(0), "coin")
    hits = second_interaction_exists(tbc, phic, psic, ["q", "q"])
    assert hits == {"exposed": False, "private": False}
    for b in (0, 1):
        for t in (1, 2):
            for hh in tbc.mu[b][t]:
                assert psic[b][t][hh] == tbc.mu[b][t][hh]
    print("  coin: psi == mu, single interaction")
    print("ok")


if __name__ == "__main__":
    main()
