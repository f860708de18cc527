"""Linear sets in the plane, quadrant decomposition and zigzag-free schemes.

``decompose_quadrant`` works in the reflected frame where the quadrant is
N^2.  The points of L(b;P) inside N^2 are b + P*lambda for lambda in a
polyhedral set whose natural points are (minimal solutions) + cone over a
Hilbert basis.  The images of that basis span a planar cone which splits
into finitely many translates of a two-generator cone.  Every period is
finally moved into P or into L(b;P) by residue splitting, and every base
and period carries an explicit coefficient witness.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from .core import (DimensionMismatch, LinearPathScheme, PreconditionViolated, QUADRANTS,
                   Quadrant, Vass, VassError, displacement, is_zigzag_free,
                   validate_lps, vadd, vnorm, vscale, vsub)
from .dioph import DiophSystem, EQ, minimal_solutions, solve_feasible


class NotALoopScheme(VassError):
    pass


@dataclass(frozen=True)
class LinearSet:
    """b + cone_N(periods), optionally with coefficient witnesses.

    ``base_witness`` is lambda with base = b0 + P*lambda for the reference
    pair (b0, P) the set was cut out of; each ``period_witnesses`` entry is
    ('P', j) for P[j] itself or ('L', mu) for b0 + P*mu.
    """
    base: tuple
    periods: tuple = ()
    base_witness: Optional[tuple] = None
    period_witnesses: Optional[tuple] = None

    def contains(self, x: Sequence[int]) -> bool:
        return member_coefficients(self.base, self.periods, x) is not None

    def points(self, window: int) -> set:
        return _points(self.base, self.periods, window)


@dataclass(frozen=True)
class SemiLinearSet:
    components: tuple = ()

    def contains(self, x) -> bool:
        return any(c.contains(x) for c in self.components)

    def points(self, window: int) -> set:
        out = set()
        for c in self.components:
            out |= c.points(window)
        return out

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


def _cross(a, b) -> int:
    return a[0] * b[1] - a[1] * b[0]


def member_coefficients(base, periods, x) -> Optional[tuple]:
    """Natural coefficients for x in base + cone(periods) when |periods| <= 2."""
    d = vsub(x, base)
    if not periods:
        return () if not any(d) else None
    if len(periods) == 1:
        g = periods[0]
        if not any(g):
            return (0,) if not any(d) else None
        n = next(d[i] // g[i] for i in range(len(g)) if g[i])
        return (n,) if n >= 0 and vscale(n, g) == tuple(d) else None
    if len(periods) == 2:
        g1, g2 = periods
        det = _cross(g1, g2)
        if det != 0:
            a, b = _cross(d, g2), _cross(g1, d)
            if a % det or b % det:
                return None
            n1, n2 = a // det, b // det
            return (n1, n2) if n1 >= 0 and n2 >= 0 else None
    # general (or degenerate) case via the exact integer engine
    P = [tuple(p) for p in periods]
    A = tuple(tuple(p[c] for p in P) for c in range(len(d)))
    res = solve_feasible(DiophSystem(EQ, A, tuple(d), len(P)))
    return res.solution if res else None


def linset_member(ls: LinearSet, x) -> tuple:
    """(True, lambda) when x = base + sum lambda_i p_i over the naturals."""
    lam = member_coefficients(ls.base, tuple(ls.periods), x)
    return (lam is not None), lam


def _points(base, periods, window) -> set:
    periods = [tuple(g) for g in periods if any(g)]
    out = set()
    if len(periods) > 2:
        raise ValueError("point enumeration supports at most two periods")
    # every period lies in one closed quadrant: reflect so all are nonnegative
    signs = []
    for c in range(2):
        s = 1
        for g in periods:
            if g[c] < 0:
                s = -1
        signs.append(s)
    bb = tuple(s * x for s, x in zip(signs, base))
    gs = [tuple(s * x for s, x in zip(signs, g)) for g in periods]
    if any(min(g) < 0 for g in gs):
        raise ValueError("periods of one component must share a quadrant")

    def inside(p):
        return all(abs(x) <= window for x in p)

    def beyond(p):
        return any(x > window for x in p)

    if not gs:
        return {tuple(base)} if inside(base) else set()
    g1 = gs[0]
    g2 = gs[1] if len(gs) > 1 else None
    n1 = 0
    while True:
        p1 = vadd(bb, vscale(n1, g1))
        if beyond(p1):
            break
        if g2 is None:
            if inside(p1):
                out.add(p1)
        else:
            n2 = 0
            while True:
                p = vadd(p1, vscale(n2, g2))
                if beyond(p):
                    break
                if inside(p):
                    out.add(p)
                n2 += 1
        n1 += 1
    return {tuple(s * x for s, x in zip(signs, p)) for p in out}


def coefficient_bound(B: int) -> int:
    """Pinned bound on witness coefficients for period norm B."""
    return (B + 1) ** 8


# ------------------------------------------------------------ planar cones

def _angle_key(w):
    return Fraction(w[1], w[0] + w[1])


def _in_cone2(d, g1, g2, det) -> bool:
    a, b = _cross(d, g2), _cross(g1, d)
    return a % det == 0 and b % det == 0 and a >= 0 and b >= 0


def _prune(points: dict, g1, g2, det) -> dict:
    """Drop points that are another point plus a cone{g1,g2} element."""
    keys = sorted(points, key=lambda p: (p[0] + p[1], p))
    kept = []
    for p in keys:
        if not any(_in_cone2(vsub(p, q), g1, g2, det) for q in kept):
            kept.append(p)
    return {p: points[p] for p in kept}


def _split_cone(gens: list, n: int):
    """cone_N of nonzero N^2 vectors as [(offset, witness, [(g, witness)])].

    ``gens`` holds (vector, witness) with witness a length-n coefficient tuple.
    """
    zero_w = (0,) * n
    if not gens:
        return [((0, 0), zero_w, [])]
    gens = sorted(gens, key=lambda gw: (_angle_key(gw[0]), gw[0][0] + gw[0][1], gw[0]))
    g1, w1 = gens[0]
    g2, w2 = max(gens, key=lambda gw: (_angle_key(gw[0]), -(gw[0][0] + gw[0][1])))
    if _angle_key(g1) == _angle_key(g2):
        # collinear: numerical semigroup along one direction, Apery split by the shortest step
        step = gcd(*g1) if any(g1) else 1
        d = (g1[0] // step, g1[1] // step)
        mult = [(gcd(*g) , w) for g, w in gens]
        a0, w0 = min(mult, key=lambda aw: aw[0])
        best = {0: (0, zero_w)}
        heap = [(0, 0, zero_w)]
        while heap:
            val, r, wit = heapq.heappop(heap)
            if best.get(r, (None,))[0] != val:
                continue
            for a, w in mult:
                nv = val + a
                nr = nv % a0
                if nr not in best or nv < best[nr][0]:
                    best[nr] = (nv, tuple(x + y for x, y in zip(wit, w)))
                    heapq.heappush(heap, (nv, nr, best[nr][1]))
        out = []
        for r in sorted(best):
            val, wit = best[r]
            out.append(((val * d[0], val * d[1]), wit, [(vscale(a0, d), w0)]))
        return out
    det = _cross(g1, g2)
    assert det > 0
    offsets = {(0, 0): zero_w}
    for w, lam in gens:
        if w == g1 or w == g2:
            continue
        a, b = _cross(w, g2), _cross(g1, w)
        N = det // gcd(det, gcd(a, b))
        nxt = {}
        for p, pw in offsets.items():
            for j in range(N):
                q = vadd(p, vscale(j, w))
                if q not in nxt:
                    nxt[q] = tuple(x + j * y for x, y in zip(pw, lam))
        offsets = _prune(nxt, g1, g2, det)
    return [(p, pw, [(g1, w1), (g2, w2)]) for p, pw in sorted(offsets.items())]


# ------------------------------------------------------------ decomposition

def _fix_period(g, lam, b, P, bidx, cache):
    """Residue count and replacement for a period not yet in P or L(b;P)."""
    if g in cache:
        return cache[g]
    n = len(P)
    res = None
    for j, p in enumerate(P):
        if tuple(p) == g:
            res = (1, g, ("P", j), lam)
            break
    if res is None and lam[bidx] >= 1:
        mu = tuple(x - (1 if i == bidx else 0) for i, x in enumerate(lam))
        res = (1, g, ("L", mu), lam)
    if res is None:
        mu = member_coefficients(b, P, g)
        if mu is not None:
            res = (1, g, ("L", tuple(mu)), lam)
    if res is None:
        t = gcd(*g)
        options = []
        for j, p in enumerate(P):
            p = tuple(p)
            if any(p) and _cross(p, g) == 0 and p[0] * g[0] + p[1] * g[1] > 0:
                tp = gcd(*p)
                options.append((tp // gcd(t, tp), p, ("P", j), tuple(1 if i == j else 0 for i in range(n))))
        for c in range(2, 257):
            cg = vscale(c, g)
            mu = member_coefficients(b, P, cg)
            if mu is not None:
                options.append((c, cg, ("L", tuple(mu)), tuple(c * x for x in lam)))
                break
        if not options:
            raise AssertionError(f"no replacement period along {g}")
        res = min(options, key=lambda o: (o[0], o[1]))
    cache[g] = res
    return res


def decompose_quadrant(base: Sequence[int], periods: Sequence[Sequence[int]],
                       z: Quadrant = Quadrant.NN) -> SemiLinearSet:
    """L(b;P) intersected with quadrant z as a union of <= 2-period linear sets."""
    b = tuple(base)
    P = [tuple(p) for p in periods]
    if len(b) != 2 or any(len(p) != 2 for p in P):
        raise DimensionMismatch("decompose_quadrant works in dimension 2")
    if b not in P:
        raise PreconditionViolated("the base must be one of the periods")
    bidx = P.index(b)
    n = len(P)
    rb = z.reflect(b)
    rP = [z.reflect(p) for p in P]
    # lambda with rb + rP*lambda >= 0:  rP*lambda - s = -rb
    A = tuple(tuple([p[c] for p in rP] + [-1 if c == i else 0 for i in range(2)]) for c in range(2))
    inhom, hom = minimal_solutions(DiophSystem(EQ, A, tuple(-x for x in rb), n + 2))
    gens = {}
    for h in hom:
        lam = h[:n]
        w = h[n:]
        if any(w) and w not in gens:
            gens[w] = lam
    pieces = _split_cone(sorted(gens.items()), n)
    comps = {}
    for m in inhom:
        lam_m = m[:n]
        xm = m[n:]  # equals rb + rP*lam_m
        for off, ow, gs in pieces:
            c = vadd(xm, off)
            key = (c, tuple(g for g, _ in gs))
            if key not in comps:
                comps[key] = (tuple(x + y for x, y in zip(lam_m, ow)), gs)
    # move every period into P or L(b;P), in the reflected frame
    cache: dict = {}
    fixed = {}
    for (c, _), (cw, gs) in sorted(comps.items()):
        parts = [(c, cw)]
        new_gs = []
        for g, lam in gs:
            count, g2, tag, lam2 = _fix_period(g, lam, rb, rP, bidx, cache)
            parts = [(vadd(pc, vscale(r, g)), tuple(x + r * y for x, y in zip(pw, lam)))
                     for pc, pw in parts for r in range(count)]
            new_gs.append((g2, tag))
        key_g = tuple(g for g, _ in new_gs)
        for pc, pw in parts:
            fixed.setdefault((pc, key_g), (pw, tuple(t for _, t in new_gs)))
    # prune components subsumed by another with identical periods
    by_periods: dict = {}
    for (pc, gs), data in fixed.items():
        by_periods.setdefault(gs, []).append((pc, data))
    out = []
    B = max((vnorm(p) for p in P), default=0)
    bound = coefficient_bound(B)
    for gs in sorted(by_periods):
        items = sorted(by_periods[gs], key=lambda it: (it[0][0] + it[0][1], it[0]))
        kept = []
        for pc, data in items:
            if any(member_coefficients(q, gs, pc) is not None for q, _ in kept):
                continue
            kept.append((pc, data))
        for pc, (pw, tags) in kept:
            assert max(pw, default=0) <= bound
            for tag in tags:
                if tag[0] == "L":
                    assert max(tag[1], default=0) <= bound
            out.append(LinearSet(z.reflect(pc), tuple(z.reflect(g) for g in gs), pw, tags))
    return SemiLinearSet(tuple(out))


def check_component_witnesses(b, P, comp: LinearSet) -> bool:
    """Structural containment: witnesses reproduce base and periods exactly."""
    def combo(lam):
        acc = tuple(b)
        for coef, p in zip(lam, P):
            acc = vadd(acc, vscale(coef, p))
        return acc

    if len(comp.periods) > 2 or combo(comp.base_witness) != tuple(comp.base):
        return False
    for g, tag in zip(comp.periods, comp.period_witnesses):
        if tag[0] == "P":
            if tuple(P[tag[1]]) != tuple(g):
                return False
        elif combo(tag[1]) != tuple(g) or min(tag[1], default=0) < 0:
            return False
    return min(comp.base_witness, default=0) >= 0


# ------------------------------------------------------------ zigzag-free schemes

def scheme_delta_member(v: Vass, rho: LinearPathScheme, x) -> Optional[tuple]:
    """Exponents e with delta(instantiate(rho, e)) = x, for <= 2 cycles."""
    base = displacement(v, rho.connector())
    return member_coefficients(base, tuple(displacement(v, b) for b in rho.cycles), x)


def zigzag_decompose(v: Vass, rho: LinearPathScheme) -> list:
    """Zigzag-free schemes with <= 2 cycles whose displacement sets cover delta(rho).

    The union equals the displacement set of rho with the connector loop
    alpha_0...alpha_k added as an extra cycle when its displacement is not
    already a cycle displacement.
    """
    if v.dim != 2:
        raise DimensionMismatch("zigzag extraction works in dimension 2")
    chk = validate_lps(v, rho)
    if not chk:
        raise NotALoopScheme(chk.reason)
    word = rho.word()
    if not word:
        return [rho]
    q = v.src(word[0])
    if v.dst(word[-1]) != q:
        raise NotALoopScheme("scheme does not start and end at the same state")
    conn = rho.connector()
    b = displacement(v, conn)
    deltas = [displacement(v, beta) for beta in rho.cycles]
    # wrapped scheme: optional connector loop first
    wrap = b not in deltas and len(conn) > 0
    loops = ([conn] if wrap else []) + list(rho.cycles)
    loop_deltas = ([b] if wrap else []) + deltas
    P = []
    for dl in loop_deltas:
        if dl not in P:
            P.append(dl)
    if b not in P:
        P.append(b)  # only when b = 0 with an empty connector
    rep = {dl: loop_deltas.index(dl) for dl in P if dl in loop_deltas}
    nloops = len(loops)

    def loop_exps(lam):
        e = [0] * nloops
        for j, dl in enumerate(P):
            if dl in rep:
                e[rep[dl]] += lam[j]
        return e

    def build(exps, starred):
        """Wrapped scheme instantiated with exps, starring loops in ``starred``."""
        alphas, cycles = [[]], []
        offset = 1 if wrap else 0
        if wrap:
            alphas[-1] += list(conn) * exps[0]
            if 0 in starred:
                cycles.append(conn)
                alphas.append([])
        alphas[-1] += rho.alphas[0]
        for i, beta in enumerate(rho.cycles):
            alphas[-1] += list(beta) * exps[i + offset]
            if i + offset in starred:
                cycles.append(beta)
                alphas.append([])
            alphas[-1] += rho.alphas[i + 1]
        return alphas, cycles

    out = []
    seen = set()
    for z in QUADRANTS:
        for comp in decompose_quadrant(b, P, z):
            exps = loop_exps(comp.base_witness)
            starred = set()
            extra = []
            for g, tag in zip(comp.periods, comp.period_witnesses):
                if tag[0] == "P" and P[tag[1]] in rep:
                    starred.add(rep[P[tag[1]]])
                else:
                    mu = tag[1] if tag[0] == "L" else tuple(0 for _ in P)
                    e_u = loop_exps(mu)
                    pa, pc = build(e_u, set())
                    extra.append(tuple(x for seg in pa for x in seg))
            alphas, cycles = build(exps, starred)
            for pi_u in extra:
                cycles.append(pi_u)
                alphas.append([])
            sigma = LinearPathScheme(tuple(map(tuple, alphas)), tuple(map(tuple, cycles)))
            if sigma in seen:
                continue
            seen.add(sigma)
            assert sigma.k <= 2 and is_zigzag_free(v, sigma)[0]
            out.append(sigma)
    return _drop_subsumed(v, out)


def _drop_subsumed(v: Vass, schemes: list) -> list:
    """Remove schemes whose displacement set lies inside another kept one."""
    def shape(s):
        return displacement(v, s.connector()), tuple(displacement(v, c) for c in s.cycles)

    order = sorted(range(len(schemes)), key=lambda i: -schemes[i].k)
    kept = []
    for i in order:
        b, gs = shape(schemes[i])
        if any(set(gs) <= set(g2) and member_coefficients(b2, g2, b) is not None
               for b2, g2 in (shape(schemes[j]) for j in kept)):
            continue
        kept.append(i)
    return [schemes[i] for i in sorted(kept)]


def wrapped_delta_set(v: Vass, rho: LinearPathScheme) -> tuple:
    """(b, P) with delta of the wrapped scheme equal to L(b; P)."""
    conn = rho.connector()
    b = displacement(v, conn)
    P = []
    for dl in [displacement(v, beta) for beta in rho.cycles] + [b]:
        if dl not in P:
            P.append(dl)
    return b, P
