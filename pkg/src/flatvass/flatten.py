"""Flattening of 2-VASS runs into short linear path schemes.

Above the threshold D a same-state pair is N^2-reachable iff it is
Z^2-reachable, and the witness can be taken zigzag-free with two cycles.
``flatten_reach`` combines that with exact exponent solving on candidate
flat schemes and an accelerated explicit search near the axes.  Every
reachable answer is replayed; every unreachable answer has a proof
(Z-refutation, or an exhausted finite search); anything else is ResourceCap.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import (Blocked, Configuration, DimensionMismatch, Intersection, LinearPathScheme,
                   LShape, N2, Outside, PreconditionViolated, Region, ResourceCap, Vass,
                   displacement, execute_scheme, prefix_displacements, validate_lps, vadd, vsub)
from .dioph import BoundOverflow, build_lps_system, build_target_equations, conjoin, drop_cycles, solve_feasible
from .geometry import scheme_delta_member, zigzag_decompose
from .onedim import Unreachable
from .zreach import (_assemble, candidate_scheme, rotate_to, simple_cycles, simple_paths,
                     z_candidates, z_reachable)

C_CYC = 6
_HUGE = 1 << 62


@dataclass(frozen=True)
class FlattenParams:
    D: int
    norm: int

    @property
    def E(self) -> int:
        return self.D + self.norm

    @property
    def outside(self) -> Region:
        return Outside(self.D)

    @property
    def lshape(self) -> Region:
        return LShape(self.E)

    @property
    def band(self) -> Region:
        return Intersection(LShape(self.E), Outside(self.D))


def max_cycles(v: Vass) -> int:
    return C_CYC * len(v.states) ** 2


# ------------------------------------------------------------ threshold

def formula_D(v: Vass) -> int:
    return (len(v.states) * len(v.transitions) * (v.norm + 1)) ** 10


_LIBRARY: dict = {}


def loop_library(v: Vass, limit: int = 400) -> dict:
    """For every state q, zigzag-free schemes covering all Z-loop displacements at q."""
    if v in _LIBRARY:
        return _LIBRARY[v]
    lib = {}
    total = 0
    for q in v.states:
        out = []
        seen = set()
        for cand in z_candidates(v, q, q, limit):
            total += 1
            if total > limit:
                raise ResourceCap("too many loop templates for the exact threshold")
            rho = candidate_scheme(v, cand)
            if not rho.word():
                continue
            for sigma in zigzag_decompose(v, rho):
                if sigma not in seen:
                    seen.add(sigma)
                    out.append(sigma)
        lib[q] = out
    _LIBRARY[v] = lib
    return lib


def compute_D(v: Vass, mode: str = "exact", limit: int = 400) -> int:
    if v.dim != 2:
        raise DimensionMismatch("the threshold is defined for dimension 2")
    if mode == "formula":
        return formula_D(v)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    lib = loop_library(v, limit)
    longest = max((len(s) for schemes in lib.values() for s in schemes), default=0)
    return longest * v.norm


def params_for(v: Vass, mode: str = "exact", limit: int = 400) -> FlattenParams:
    return FlattenParams(compute_D(v, mode, limit), v.norm)


# ------------------------------------------------------------ exponent solving

def max_iterations(v: Vass, c: Configuration, beta, region: Region = N2) -> Optional[int]:
    """Largest e with beta^e executable from c inside region; None if unbounded."""
    delta = displacement(v, beta)
    best = None
    for p in prefix_displacements(v, beta):
        base = tuple(x + y - z for x, y, z in zip(c.counters, p, delta))
        gap = region.first_gap(base, delta, 1, _HUGE)
        if gap is not None:
            best = gap - 1 if best is None else min(best, gap - 1)
    return best


def _exact_exponents(v, src, tgt, rho, budget):
    """Exact search over sign patterns: (exps or None, decided)."""
    for chi in itertools.product((1, 0), repeat=rho.k):
        sub = drop_cycles(rho, chi)
        sys = conjoin(build_lps_system(v, src.counters, rho, chi),
                      build_target_equations(v, src.counters, tgt.counters, sub))
        try:
            res = solve_feasible(sys, budget)
        except BoundOverflow:
            return None, False
        if res:
            it = iter(res.solution)
            return [next(it) if s else 0 for s in chi], True
    return None, True


def _replays(v, src, tgt, rho, exps, region=N2) -> bool:
    try:
        return execute_scheme(v, src, rho, exps, region) == tgt
    except Blocked:
        return False


def solve_scheme(v: Vass, src: Configuration, tgt: Configuration, rho: LinearPathScheme,
                 exact_limit: int = 4, greedy_budget: int = 4000, budget: int = 200_000):
    """Exponents making rho lead from src to tgt over N^2.

    Returns (exps or None, decided) where decided means the answer is exact.
    Small schemes go through the Diophantine engine; long ones are tried
    greedily (maximal transfers first) with an exact solve for the last two
    cycles.
    """
    word = rho.word()
    if word and (v.src(word[0]) != src.state or v.dst(word[-1]) != tgt.state):
        return None, True
    if rho.k <= exact_limit:
        exps, decided = _exact_exponents(v, src, tgt, rho, budget)
        if exps is not None and _replays(v, src, tgt, rho, exps):
            return exps, True
        if decided:
            return None, True
    found = _greedy(v, src, tgt, rho, greedy_budget, budget)
    return found, False


def _greedy(v, src, tgt, rho, greedy_budget, budget):
    k = rho.k
    tail = min(k, 2)
    head = k - tail
    tail_scheme = LinearPathScheme(((),) + rho.alphas[head + 1:], rho.cycles[head:])
    evals = [0]

    def rec(i, cur, chosen):
        if evals[0] >= greedy_budget:
            return None
        if i == head:
            evals[0] += 1
            exps, _ = _exact_exponents(v, cur, tgt, tail_scheme, budget)
            if exps is not None:
                full = chosen + exps
                if _replays(v, src, tgt, rho, full):
                    return full
            return None
        beta = rho.cycles[i]
        m = max_iterations(v, cur, beta)
        options = [m, 0, 1, m - 1] if m is not None else [0, 1, 2]
        for e in dict.fromkeys(x for x in options if x is not None and x >= 0):
            try:
                nxt = execute_scheme(v, cur, LinearPathScheme(((), rho.alphas[i + 1]), (beta,)), [e])
            except Blocked:
                continue
            got = rec(i + 1, nxt, chosen + [e])
            if got is not None:
                return got
        return None

    try:
        first = execute_scheme(v, src, LinearPathScheme((rho.alphas[0],)), [])
    except Blocked:
        return None
    return rec(0, first, [])


# ------------------------------------------------------------ above the threshold

def _check_high(params, *cs):
    for c in cs:
        if len(c.counters) != 2:
            raise DimensionMismatch("two counters expected")
        if min(c.counters) < params.D:
            raise PreconditionViolated(f"{c} is below the threshold {params.D}")


def type1_reach(v: Vass, params: FlattenParams, src: Configuration, tgt: Configuration):
    """(scheme, exps): a zigzag-free <= 2-cycle witness from src to tgt over N^2."""
    if src.state != tgt.state:
        raise PreconditionViolated("both ends must share a state")
    _check_high(params, src, tgt)
    if src == tgt:
        return LinearPathScheme.path(()), []
    z = z_reachable(v, src, tgt)
    if not z:
        raise Unreachable("not reachable even over Z^2")
    goal = vsub(tgt.counters, src.counters)
    for sigma in zigzag_decompose(v, z.scheme):
        e = scheme_delta_member(v, sigma, goal)
        if e is None:
            continue
        e = list(e)
        if _replays(v, src, tgt, sigma, e):
            assert sigma.k <= 2
            return sigma, e
    raise ResourceCap("threshold too small for the decomposed witness")


def short_paths(v: Vass, p, q, maxlen: int):
    """All paths from p to q of length <= maxlen, shortest first."""
    level = [((), p)]
    for n in range(maxlen + 1):
        for path, end in level:
            if end == q:
                yield path
        if n == maxlen:
            break
        level = [(path + (i,), v.dst(i)) for path, end in level for i in v.out_edges(end)]


def outside_reach(v: Vass, params: FlattenParams, src: Configuration, tgt: Configuration,
                  budget: int = 5000, limit: int = 400):
    """(scheme, exps) for a run staying inside [D, inf)^2, or Unreachable.

    Candidates are alpha_0 sigma_1 alpha_1 ... sigma_k alpha_k with short
    connectors and zigzag-free loops sigma_i taken from the loop library at
    pairwise distinct states.
    """
    _check_high(params, src, tgt)
    if src == tgt:
        return LinearPathScheme.path(()), []
    if not z_reachable(v, src, tgt):
        raise Unreachable("not reachable even over Z^2")
    lib = loop_library(v, limit)
    nq = len(v.states)
    shift = (params.D, params.D)
    s0 = Configuration(src.state, vsub(src.counters, shift))
    t0 = Configuration(tgt.state, vsub(tgt.counters, shift))
    tried = 0
    decided = True

    def candidates(cur, used, alphas, cycles):
        for a in short_paths(v, cur, tgt.state, nq):
            yield alphas[:-1] + [alphas[-1] + list(a)], cycles
        if len(used) == nq:
            return
        for q in v.states:
            if q in used:
                continue
            for a in short_paths(v, cur, q, nq):
                for sigma in lib.get(q, ()):
                    na = alphas[:-1] + [alphas[-1] + list(a) + list(sigma.alphas[0])]
                    na += [list(x) for x in sigma.alphas[1:]]
                    yield from candidates(q, used | {q}, na, cycles + list(sigma.cycles))

    seen = set()
    for alphas, cycles in candidates(src.state, frozenset(), [[]], []):
        rho = LinearPathScheme(tuple(map(tuple, alphas)), tuple(map(tuple, cycles)))
        if rho in seen or not validate_lps(v, rho):
            continue
        seen.add(rho)
        tried += 1
        if tried > budget:
            raise ResourceCap("outside-region candidate budget exhausted")
        exps, exact = solve_scheme(v, s0, t0, rho, exact_limit=2 * nq)
        if exps is not None and _replays(v, src, tgt, rho, exps, params.outside):
            return rho, exps
        decided = decided and exact
    if not decided:
        raise ResourceCap("some candidate schemes were left undecided")
    raise Unreachable("no run stays above the threshold")


# ------------------------------------------------------------ global search

def maximal_scheme(v: Vass, sigma: Sequence[int], start) -> LinearPathScheme:
    """sigma with every simple cycle through its states starred at the first anchor."""
    word = list(sigma)
    states_at = [start] + [v.dst(i) for i in word]
    present = set(states_at)
    inserts: dict = {}
    for beta in simple_cycles(v):
        if not {v.src(i) for i in beta} & present:
            continue
        beta = rotate_to(v, beta, present)
        pos = states_at.index(v.src(beta[0]))
        inserts.setdefault(pos, []).append((beta, 0))
    rho, _ = _assemble(v, word, inserts, start)
    return rho


def _flat_candidates(v, src, tgt, max_paths=4, max_z=4):
    seen = set()
    for n, sigma in enumerate(simple_paths(v, src.state, tgt.state)):
        if n >= max_paths:
            break
        rho = maximal_scheme(v, sigma, src.state)
        if rho not in seen:
            seen.add(rho)
            yield rho
    for n, cand in enumerate(z_candidates(v, src.state, tgt.state, 1000)):
        if n >= max_z:
            break
        rho = candidate_scheme(v, cand)
        if rho not in seen:
            seen.add(rho)
            yield rho


def _cycles_at(v: Vass) -> dict:
    out = {q: [] for q in v.states}
    for beta in simple_cycles(v):
        delta = displacement(v, beta)
        if all(x >= 0 for x in delta):
            continue
        for j in range(len(beta)):
            rot = tuple(beta[j:]) + tuple(beta[:j])
            out[v.src(rot[0])].append(rot)
    return out


def _moves_to_scheme(moves) -> tuple:
    alphas, cycles, exps = [[]], [], []
    for mv in moves:
        if mv[0] == "t":
            alphas[-1].append(mv[1])
        elif mv[0] == "c":
            if cycles and not alphas[-1] and cycles[-1] == mv[1]:
                exps[-1] += mv[2]
            else:
                cycles.append(mv[1])
                exps.append(mv[2])
                alphas.append([])
        else:  # a whole sub-scheme
            rho, e = mv[1], mv[2]
            alphas[-1] += rho.alphas[0]
            for b, x, a in zip(rho.cycles, e, rho.alphas[1:]):
                cycles.append(b)
                exps.append(x)
                alphas.append(list(a))
    return LinearPathScheme(tuple(map(tuple, alphas)), tuple(cycles)), exps


def _unroll_to(rho, exps, limit):
    """Unroll the cheapest cycles until at most ``limit`` remain starred."""
    rho_a = [list(a) for a in rho.alphas]
    cycles = list(rho.cycles)
    exps = list(exps)
    while len(cycles) > limit:
        j = min(range(len(cycles)), key=lambda n: exps[n] * len(cycles[n]))
        rho_a[j] = rho_a[j] + list(cycles[j]) * exps[j] + rho_a[j + 1]
        del rho_a[j + 1]
        del cycles[j]
        del exps[j]
    return LinearPathScheme(tuple(map(tuple, rho_a)), tuple(cycles)), exps


def _accelerated_search(v, src, tgt, params, node_budget, type1_tries):
    accel = _cycles_at(v)
    parent = {src: None}
    queue = deque([src])
    high_target = params is not None and min(tgt.counters) >= params.D
    tries = 0
    while queue:
        c = queue.popleft()
        if c == tgt:
            break
        if (high_target and c.state == tgt.state and tries < type1_tries
                and min(c.counters) >= params.D):
            tries += 1
            try:
                rho, e = type1_reach(v, params, c, tgt)
            except (Unreachable, ResourceCap):
                pass
            else:
                parent[tgt] = (c, ("s", rho, e))
                break
        succ = []
        for i in v.out_edges(c.state):
            nxt = vadd(c.counters, v.update(i))
            if min(nxt) >= 0:
                succ.append((Configuration(v.dst(i), nxt), ("t", i)))
        for beta in accel[c.state]:
            m = max_iterations(v, c, beta)
            if m is not None and m >= 2:
                delta = displacement(v, beta)
                succ.append((Configuration(c.state, tuple(x + m * y for x, y in zip(c.counters, delta))),
                             ("c", beta, m)))
        for nxt, mv in succ:
            if nxt not in parent:
                parent[nxt] = (c, mv)
                queue.append(nxt)
                if len(parent) > node_budget:
                    return None, False
    if tgt not in parent:
        return None, True
    moves = []
    c = tgt
    while parent[c] is not None:
        c, mv = parent[c]
        moves.append(mv)
    return _moves_to_scheme(reversed(moves)), True


def flatten_reach(v: Vass, src: Configuration, tgt: Configuration, params: Optional[FlattenParams] = None,
                  node_budget: int = 200_000, type1_tries: int = 8):
    """(scheme, exps) replaying from src to tgt over N^2, or Unreachable / ResourceCap."""
    if v.dim != 2:
        raise DimensionMismatch("flattening is implemented for dimension 2")
    for c in (src, tgt):
        if len(c.counters) != 2 or min(c.counters) < 0:
            raise PreconditionViolated(f"{c} is not a configuration over N^2")
    if src == tgt:
        return LinearPathScheme.path(()), []
    if not z_reachable(v, src, tgt):
        raise Unreachable("not reachable even over Z^2")
    limit = max_cycles(v)
    for rho in _flat_candidates(v, src, tgt):
        exps, _ = solve_scheme(v, src, tgt, rho)
        if exps is not None:
            return _finish(v, src, tgt, rho, exps, limit)
    found, complete = _accelerated_search(v, src, tgt, params, node_budget, type1_tries)
    if found is not None:
        return _finish(v, src, tgt, *found, limit)
    if complete:
        raise Unreachable("the reachable set is finite and misses the target")
    raise ResourceCap("flattening search budget exhausted")


def _finish(v, src, tgt, rho, exps, limit):
    rho, exps = _unroll_to(rho, exps, limit)
    assert rho.k <= limit
    assert _replays(v, src, tgt, rho, exps), "flattened witness failed to replay"
    return rho, list(exps)
