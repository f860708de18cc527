"""Parikh-image folding of paths into schemes, and reachability over Z^d.

Over the integers a target is reachable iff some simple path plus a
connected collection of simple cycles has the right total displacement.
The search enumerates skeleton paths, then spanning sets of forced cycles,
and asks the Diophantine engine for multiplicities of the free cycles.
"""
from __future__ import annotations

import functools
import itertools
from collections import Counter, deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import (Configuration, DimensionMismatch, LinearPathScheme,
                   ResourceCap, Vass, VassError, check_path, displacement, instantiate_lps,
                   validate_lps, vadd, vsub)
from .dioph import DiophSystem, EQ, build_target_equations, inhomogeneous_bound, solve_feasible


class NoWitness(VassError):
    pass


def is_flow_preserving(v: Vass, sigma) -> bool:
    bal = Counter()
    for i, n in dict(sigma).items():
        if n:
            bal[v.src(i)] -= n
            bal[v.dst(i)] += n
    return not any(bal.values())


# ------------------------------------------------------------ path folding

def _remove_cycles(v: Vass, seg: list, start):
    """Strip contiguous simple cycles until ``seg`` is a simple path."""
    removed = Counter()
    while True:
        seen = {start: 0}
        cur = start
        cut = None
        for pos, i in enumerate(seg):
            cur = v.dst(i)
            if cur in seen:
                cut = (seen[cur], pos + 1)
                break
            seen[cur] = pos + 1
        if cut is None:
            return seg, removed
        a, b = cut
        removed.update(seg[a:b])
        seg = seg[:a] + seg[b:]


def _peel_cycle(v: Vass, sigma: Counter) -> list:
    """A simple cycle inside the support of a flow-preserving ``sigma``."""
    e = min(i for i, n in sigma.items() if n)
    walk = [e]
    order = {v.src(e): 0}
    cur = v.dst(e)
    while cur not in order:
        order[cur] = len(walk)
        nxt = min(i for i, n in sigma.items() if n and v.src(i) == cur)
        walk.append(nxt)
        cur = v.dst(nxt)
    return walk[order[cur]:]


def _assemble(v: Vass, word: Sequence[int], inserts: dict, start) -> tuple:
    """Scheme from a plain word plus {position: [(cycle, exponent), ...]}."""
    alphas, cycles, exps = [[]], [], []
    for pos in range(len(word) + 1):
        for beta, e in inserts.get(pos, ()):
            cycles.append(tuple(beta))
            exps.append(e)
            alphas.append([])
        if pos < len(word):
            alphas[-1].append(word[pos])
    return LinearPathScheme(tuple(map(tuple, alphas)), tuple(cycles)), exps


def path_to_lps(v: Vass, pi: Sequence[int]) -> tuple:
    """(scheme, exponents) whose instantiation has the Parikh image of ``pi``."""
    pi = list(pi)
    check_path(v, pi)
    if not pi:
        return LinearPathScheme.path(()), []
    start = v.src(pi[0])
    # first-visit split: every part starts with the transition entering a new state
    seen = set()
    parts = []
    for i in pi:
        if v.dst(i) not in seen:
            seen.add(v.dst(i))
            parts.append([i])
        else:
            parts[-1].append(i)
    skeleton = []
    sigma = Counter()
    for part in parts:
        head, tail = part[0], part[1:]
        tail, removed = _remove_cycles(v, tail, v.dst(head))
        sigma.update(removed)
        skeleton.append(head)
        skeleton += tail
    states_at = [start] + [v.dst(i) for i in skeleton]
    inserts: dict = {}
    while any(sigma.values()):
        beta = _peel_cycle(v, sigma)
        c = min(sigma[i] for i in beta)
        r = min(range(len(beta)), key=lambda j: (sigma[beta[j]], beta[j]))
        beta = beta[r:] + beta[:r]
        for i in beta:
            sigma[i] -= c
        anchor = v.src(beta[0])
        pos = next((p for p in range(1, len(states_at)) if states_at[p] == anchor), 0)
        inserts.setdefault(pos, []).append((beta, c))
        sigma = +sigma
    return _assemble(v, skeleton, inserts, start)


# ------------------------------------------------------------ graph helpers

@functools.lru_cache(maxsize=256)
def simple_cycles(v: Vass) -> tuple:
    """Every simple cycle once, rooted at its least state, in DFS index order."""
    index = {q: n for n, q in enumerate(v.states)}
    out = []
    for root in v.states:
        r = index[root]

        def dfs(q, path, visited):
            for i in v.out_edges(q):
                t = v.transitions[i]
                if t.dst == root:
                    out.append(tuple(path + [i]))
                elif index[t.dst] > r and t.dst not in visited:
                    visited.add(t.dst)
                    dfs(t.dst, path + [i], visited)
                    visited.discard(t.dst)

        dfs(root, [], {root})
    return tuple(out)


def simple_paths(v: Vass, p, q):
    """Simple paths from p to q in lowest-index DFS order (just [] when p == q)."""
    if p == q:
        yield ()
        return

    def dfs(cur, path, visited):
        for i in v.out_edges(cur):
            t = v.transitions[i]
            if t.dst in visited:
                continue
            if t.dst == q:
                yield tuple(path + [i])
                continue
            visited.add(t.dst)
            yield from dfs(t.dst, path + [i], visited)
            visited.discard(t.dst)

    yield from dfs(p, [], {p})


def cycle_states(v: Vass, beta) -> frozenset:
    return frozenset(v.src(i) for i in beta)


def rotate_to(v: Vass, beta, states) -> tuple:
    """Rotate a cycle so that it starts at its first state lying in ``states``."""
    for j, i in enumerate(beta):
        if v.src(i) in states:
            return tuple(beta[j:]) + tuple(beta[:j])
    raise ValueError("cycle does not touch the given states")


def insert_plain(v: Vass, word: list, start, beta) -> list:
    """Splice a cycle into a path at the leftmost occurrence of its anchor."""
    states_at = [start] + [v.dst(i) for i in word]
    present = set(states_at)
    beta = rotate_to(v, beta, present)
    anchor = v.src(beta[0])
    pos = states_at.index(anchor)
    return word[:pos] + list(beta) + word[pos:]


def connector_sets(v: Vass, base_states: frozenset, limit: int):
    """Sets of simple cycles that extend ``base_states`` one new state at a time.

    Yields (ordered cycles, covered states); the empty set comes first.
    """
    cycles = simple_cycles(v)
    seen = set()
    stack = deque([((), base_states)])
    count = 0
    while stack:
        chosen, covered = stack.popleft()
        key = frozenset(chosen)
        if key in seen:
            continue
        seen.add(key)
        count += 1
        if count > limit:
            raise ResourceCap("too many connector sets")
        yield chosen, covered
        for n, beta in enumerate(cycles):
            if n in key:
                continue
            st = cycle_states(v, beta)
            if st & covered and not st <= covered:
                stack.append((chosen + (n,), covered | st))


# ------------------------------------------------------------ Z-reachability

@dataclass(frozen=True)
class ZResult:
    reachable: bool
    scheme: Optional[LinearPathScheme] = None
    exponents: tuple = ()

    def __bool__(self):
        return self.reachable


@dataclass(frozen=True)
class ZCandidate:
    """A skeleton path, forced cycles (traversed once) and free cycle representatives."""
    skeleton: tuple
    forced: tuple
    free: tuple
    base_word: tuple
    start: object


def z_candidates(v: Vass, p, q, limit: int = 100_000):
    cycles = simple_cycles(v)
    deltas = [displacement(v, b) for b in cycles]
    for sigma in simple_paths(v, p, q):
        base = frozenset([p] + [v.dst(i) for i in sigma])
        for forced, covered in connector_sets(v, base, limit):
            word = list(sigma)
            for n in forced:
                word = insert_plain(v, word, p, cycles[n])
            reps = {}
            for n, beta in enumerate(cycles):
                if cycle_states(v, beta) & covered:
                    reps.setdefault(deltas[n], n)
            yield ZCandidate(sigma, tuple(forced), tuple(sorted(reps.values())), tuple(word), p)


def candidate_scheme(v: Vass, cand: ZCandidate) -> LinearPathScheme:
    """The base word with every free cycle starred at its leftmost anchor."""
    cycles = simple_cycles(v)
    word = list(cand.base_word)
    states_at = [cand.start] + [v.dst(i) for i in word]
    inserts: dict = {}
    for n in cand.free:
        beta = rotate_to(v, cycles[n], set(states_at))
        pos = states_at.index(v.src(beta[0]))
        inserts.setdefault(pos, []).append((beta, 0))
    rho, _ = _assemble(v, word, inserts, cand.start)
    return rho


def z_reachable(v: Vass, src: Configuration, tgt: Configuration, limit: int = 100_000) -> ZResult:
    if len(src.counters) != v.dim or len(tgt.counters) != v.dim:
        raise DimensionMismatch("configuration arity differs from the system")
    if src == tgt:
        return ZResult(True, LinearPathScheme.path(()), ())
    cycles = simple_cycles(v)
    deltas = [displacement(v, b) for b in cycles]
    goal = vsub(tgt.counters, src.counters)
    if _relaxation_fails(v, src.state, tgt.state, goal, limit):
        return ZResult(False)
    memo: dict = {}
    for cand in z_candidates(v, src.state, tgt.state, limit):
        rhs = vsub(goal, displacement(v, cand.base_word))
        ws = tuple(deltas[n] for n in cand.free)
        key = (rhs, ws)
        if key not in memo:
            A = tuple(tuple(w[c] for w in ws) for c in range(v.dim))
            memo[key] = solve_feasible(DiophSystem(EQ, A, rhs, len(ws)))
        res = memo[key]
        if not res:
            continue
        rho = candidate_scheme(v, cand)
        exps = _match_exponents(v, rho, cand, res.solution)
        assert validate_lps(v, rho)
        end = vadd(src.counters, displacement(v, rho.connector()))
        for e, b in zip(exps, rho.cycles):
            end = vadd(end, tuple(e * x for x in displacement(v, b)))
        assert end == tgt.counters
        return ZResult(True, rho, tuple(exps))
    return ZResult(False)


def _between(v: Vass, p, q) -> frozenset:
    """States reachable from p that can also reach q."""
    def closure(start, step):
        seen = {start}
        todo = [start]
        while todo:
            for nxt in step(todo.pop()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return seen
    fwd = closure(p, lambda x: (v.dst(i) for i in v.out_edges(x)))
    bwd = closure(q, lambda x: (v.src(i) for i in v.in_edges(x)))
    return frozenset(fwd & bwd)


def _relaxation_fails(v: Vass, p, q, goal, limit: int) -> bool:
    """True when no skeleton reaches goal even with every usable cycle free.

    Any path from p to q folds into a simple path plus simple cycles whose
    states all lie between p and q, so this drops only the connectivity
    requirement.  Gives no answer (False) when there are too many skeletons.
    """
    between = _between(v, p, q)
    if q not in between:
        return True
    cycles = simple_cycles(v)
    ws = sorted({displacement(v, b) for b in cycles if cycle_states(v, b) <= between})
    A = tuple(tuple(w[c] for w in ws) for c in range(v.dim))
    tried = set()
    for sigma in itertools.islice(simple_paths(v, p, q), limit + 1):
        if len(tried) >= limit:
            return False
        rhs = vsub(goal, displacement(v, sigma))
        if rhs in tried:
            continue
        tried.add(rhs)
        if solve_feasible(DiophSystem(EQ, A, rhs, len(ws))):
            return False
    return True


def _match_exponents(v, rho, cand, sol):
    by_delta = {}
    cycles = simple_cycles(v)
    for n, y in zip(cand.free, sol):
        by_delta[displacement(v, cycles[n])] = y
    return [by_delta[displacement(v, b)] for b in rho.cycles]


def z_short_witness(v: Vass, src: Configuration, tgt: Configuration) -> tuple:
    """A concrete Z-path built from a least solution of the witness equations."""
    res = z_reachable(v, src, tgt)
    if not res:
        raise NoWitness(f"{tgt} is not Z-reachable from {src}")
    rho = res.scheme
    if rho.k == 0:
        return rho.word()
    eqs = build_target_equations(v, src.counters, tgt.counters, rho)
    sol = solve_feasible(eqs)
    assert sol, "witness equations lost their solution"
    path = instantiate_lps(rho, sol.solution)
    assert len(path) <= max(1, inhomogeneous_bound(eqs)) * len(rho)
    return path
