"""One-counter machinery and the two-dimensional band constructions built on it."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from . import _kernels
from .core import (Configuration, DimensionMismatch, LShape, LinearPathScheme,
                   N2, NonNegative, PreconditionViolated, Region, ResourceCap, Transition,
                   Vass, VassError, execute, execute_scheme, instantiate_lps)


class Unreachable(VassError):
    pass


def counter_cap(nq: int, u: int, v: int) -> int:
    """Pinned counter ceiling for shortest one-counter runs."""
    return max(u, v) + 4 * (nq + nq * nq)


def run_length_bound(nq: int, D: int) -> int:
    """Pinned bound L(|Q|, D) on shortest one-counter run lengths."""
    return 8 * nq * (nq + nq * nq) + nq * D


def scheme_length_bound(nq: int, norm: int) -> int:
    """Pinned bound P1(|Q|, ||T||) on one-cycle witness schemes."""
    m = nq * (norm + 2)
    return m * m + m


# ------------------------------------------------------------ unary expansion

@dataclass(frozen=True)
class UnaryExpansion:
    vass: Vass
    chains: tuple  # chains[t] = indices of the expanded transitions simulating t
    owner: tuple  # owner[i] = (t, position in chain)

    def lift(self, pi: Sequence[int]) -> tuple:
        return tuple(i for t in pi for i in self.chains[t])

    def lower(self, pi: Sequence[int]) -> tuple:
        """Inverse of ``lift`` on paths made of complete chains."""
        out = []
        pos = 0
        pi = list(pi)
        while pos < len(pi):
            t, k = self.owner[pi[pos]]
            chain = self.chains[t]
            if k != 0 or tuple(pi[pos:pos + len(chain)]) != chain:
                raise ValueError("path is not a concatenation of whole chains")
            out.append(t)
            pos += len(chain)
        return tuple(out)


def unary_expand(v1: Vass) -> UnaryExpansion:
    if v1.dim != 1:
        raise DimensionMismatch("unary expansion needs a one-counter system")
    states = list(v1.states)
    trans = []
    chains = []
    owner = []
    for ti, t in enumerate(v1.transitions):
        z = t.update[0]
        step = 1 if z > 0 else -1
        aux = [("aux", ti, i) for i in range(abs(z) + 1)]
        states += aux
        chain = []
        seq = [(t.src, 0, aux[0])]
        seq += [(aux[i], step, aux[i + 1]) for i in range(abs(z))]
        seq.append((aux[-1], 0, t.dst))
        for k, (a, dz, b) in enumerate(seq):
            chain.append(len(trans))
            owner.append((ti, k))
            trans.append(Transition(a, (dz,), b))
        chains.append(tuple(chain))
    return UnaryExpansion(Vass(1, tuple(states), tuple(trans)), tuple(chains), tuple(owner))


def _is_unary(v1: Vass) -> bool:
    return all(abs(t.update[0]) <= 1 for t in v1.transitions)


# ------------------------------------------------------------ shortest runs

def shortest_run_1vass(v1: Vass, src: Configuration, tgt: Configuration,
                       cap: Optional[int] = None) -> tuple:
    """A shortest run over N with counters kept at most ``cap`` (pinned default)."""
    if v1.dim != 1:
        raise DimensionMismatch("one-counter search needs dimension 1")
    if not _is_unary(v1):
        raise PreconditionViolated("shortest_run_1vass expects unary updates")
    nq = len(v1.states)
    u, w = src.counters[0], tgt.counters[0]
    pinned = cap is None
    if pinned:
        cap = counter_cap(nq, u, w)
    start = (src.state, u)
    goal = (tgt.state, w)
    parent = {start: None}
    queue = deque([start])
    while queue and goal not in parent:
        q, x = queue.popleft()
        for i in v1.out_edges(q):
            t = v1.transitions[i]
            y = x + t.update[0]
            if y < 0 or y > cap:
                continue
            nxt = (t.dst, y)
            if nxt not in parent:
                parent[nxt] = ((q, x), i)
                queue.append(nxt)
    if goal not in parent:
        raise Unreachable(f"{tgt} not reachable from {src} below counter {cap}")
    path = []
    cur = goal
    while parent[cur] is not None:
        cur, i = parent[cur]
        path.append(i)
    path.reverse()
    if pinned:
        assert len(path) <= run_length_bound(nq, abs(u - w)), "run-length bound violated"
    return tuple(path)


def _best_repetition(pi: Sequence[int]):
    """(start, period, repeats) maximizing the letters saved by folding a square."""
    n = len(pi)
    best = None
    for L in range(1, n // 2 + 1):
        a = 0
        while a + 2 * L <= n:
            reps = 1
            while a + (reps + 1) * L <= n and pi[a + reps * L:a + (reps + 1) * L] == pi[a:a + L]:
                reps += 1
            if reps >= 2:
                gain = (reps - 1) * L
                if best is None or gain > best[0]:
                    best = (gain, a, L, reps)
                a += (reps - 1) * L + 1
            else:
                a += 1
    return None if best is None else best[1:]


def lps_witness_1vass(v1: Vass, src: Configuration, tgt: Configuration) -> tuple:
    """(scheme with at most one cycle, exponents) for a one-counter run src -> tgt.

    The run is found in the unary expansion, its best power factor is
    folded into a starred cycle, the cycle is rotated to start at an original
    state if needed, and everything is mapped back to original transitions.
    """
    if v1.dim != 1:
        raise DimensionMismatch("one-counter witness needs dimension 1")
    if src == tgt:
        return LinearPathScheme.path(()), []
    ex = unary_expand(v1)
    run = list(shortest_run_1vass(ex.vass, src, tgt))
    rep = _best_repetition(run)
    if rep is None:
        rho, exps = LinearPathScheme.path(ex.lower(run)), []
    else:
        a, L, reps = rep
        alpha, beta, gamma = run[:a], run[a:a + L], run[a + L * reps:]
        exps = [reps]
        if ex.owner[beta[0]][1] != 0:
            # anchor is an auxiliary state: with beta = b1 b2 where b2 starts at an
            # original state, alpha (b1 b2)^r gamma = (alpha b1) (b2 b1)^(r-1) (b2 gamma)
            j = next(n for n, i in enumerate(beta) if ex.owner[i][1] == 0)
            b1, b2 = beta[:j], beta[j:]
            alpha, beta, gamma = alpha + b1, b2 + b1, b2 + gamma
            exps = [reps - 1]
        try:
            rho = LinearPathScheme((ex.lower(alpha), ex.lower(gamma)), (ex.lower(beta),))
        except ValueError:
            rho, exps = LinearPathScheme.path(ex.lower(run)), []
    end = execute(v1, src, instantiate_lps(rho, exps), NonNegative())
    assert end == tgt
    return rho, exps


# ------------------------------------------------------------ bands

@dataclass(frozen=True)
class BandSpec:
    """Coordinate ``axis`` (0 or 1) is kept within [0, D]."""
    axis: int
    D: int

    def __post_init__(self):
        if self.axis not in (0, 1) or self.D < 0:
            raise ValueError("band needs axis 0 or 1 and D >= 0")

    def region(self) -> Region:
        from .core import Box
        iv = [(0, None), (0, None)]
        iv[self.axis] = (0, self.D)
        return Box(tuple(iv))


@dataclass(frozen=True)
class BandProduct:
    vass: Vass
    phi: tuple  # phi[i] = original transition index of product transition i
    band: BandSpec

    def to_product(self, c: Configuration) -> Configuration:
        a = self.band.axis
        return Configuration((c.state, c.counters[a]), (c.counters[1 - a],))

    def from_product(self, c: Configuration) -> Configuration:
        q, n = c.state
        x = [0, 0]
        x[self.band.axis] = n
        x[1 - self.band.axis] = c.counters[0]
        return Configuration(q, tuple(x))

    def map_path(self, pi: Sequence[int]) -> tuple:
        return tuple(self.phi[i] for i in pi)

    def map_scheme(self, rho: LinearPathScheme) -> LinearPathScheme:
        return LinearPathScheme(tuple(map(self.map_path, rho.alphas)),
                                tuple(map(self.map_path, rho.cycles)))


def band_product(v2: Vass, band: BandSpec) -> BandProduct:
    """Fold the bounded coordinate into the control states."""
    if v2.dim != 2:
        raise DimensionMismatch("band product needs dimension 2")
    a, D = band.axis, band.D
    states = tuple((q, n) for q in v2.states for n in range(D + 1))
    trans, phi = [], []
    for ti, t in enumerate(v2.transitions):
        j = t.update[a]
        for n in range(D + 1):
            if 0 <= n + j <= D:
                trans.append(Transition((t.src, n), (t.update[1 - a],), (t.dst, n + j)))
                phi.append(ti)
    return BandProduct(Vass(1, states, tuple(trans)), tuple(phi), band)


def _lshape_run(v: Vass, src: Configuration, tgt: Configuration, D: int, cap: int,
                max_cells: int) -> Optional[tuple]:
    """A shortest run inside LShape(D) with counters <= cap, or None."""
    if len(v.states) * _kernels.cells_per_state(D, cap) > max_cells:
        raise ResourceCap(f"L-shaped search with ceiling {cap} exceeds {max_cells} cells")
    index = {q: n for n, q in enumerate(v.states)}
    T = v.transitions
    srcs = [index[t.src] for t in T]
    dx = [t.update[0] for t in T]
    dy = [t.update[1] for t in T]
    dsts = [index[t.dst] for t in T]
    start = (index[src.state], *src.counters)
    goal = (index[tgt.state], *tgt.counters)
    found, _, parent = _kernels.region_bfs(srcs, dx, dy, dsts, len(v.states), D, cap, start, goal)
    if not found:
        return None
    return _kernels.trace_path(parent, srcs, dx, dy, D, cap, start, goal)


def _expanded_states(v2: Vass, E: int) -> int:
    """State count of the unary expansion of a band product of width E."""
    return len(v2.states) * (E + 1) + len(v2.transitions) * (E + 1) * (v2.norm + 1)


def belt_cap(v2: Vass, D: int, src: Configuration, tgt: Configuration) -> int:
    """Pinned counter ceiling for runs inside LShape(D).

    Each piece between visits to [0, E]^2 is a one-counter run of the expanded
    band product, so the one-counter ceiling applies piece by piece.
    """
    E = D + v2.norm
    return counter_cap(_expanded_states(v2, E), max(max(src.counters), E), max(max(tgt.counters), E))


def belt_length_bound(v2: Vass, D: int) -> int:
    """Pinned bound P2 on belt witness schemes.

    Two starred end pieces of at most P1 on the band product, plus one
    instantiated middle piece per visit to the square [0, E]^2, each no longer
    than a shortest run of the expanded product.
    """
    E = D + v2.norm
    nq = len(v2.states) * (E + 1)
    expanded = _expanded_states(v2, E)
    return 2 * scheme_length_bound(nq, v2.norm) + len(v2.states) * (E + 1) ** 2 * run_length_bound(expanded, E)


def belt_reach(v2: Vass, D: int, src: Configuration, tgt: Configuration,
               max_cells: int = 50_000_000) -> tuple:
    """(scheme, exponents) for a run inside LShape(D), valid inside LShape(D + ||T||).

    A shortest run in the L-shaped region is cut at its visits to the square
    [0, E]^2; every piece between cuts stays in one band and is replaced by a
    one-cycle witness of the band product.  Only the first and last pieces keep
    their cycle starred; the middle ones are instantiated.
    """
    if v2.dim != 2:
        raise DimensionMismatch("belts live in dimension 2")
    L = LShape(D)
    if not (L.contains(src.counters) and L.contains(tgt.counters)):
        raise PreconditionViolated("endpoints must lie in the L-shaped region")
    if src == tgt:
        return LinearPathScheme.path(()), []
    E = D + v2.norm
    run = _lshape_run(v2, src, tgt, D, belt_cap(v2, D, src, tgt), max_cells)
    if run is None:
        raise Unreachable(f"{tgt} not reachable from {src} inside LShape({D})")
    # configurations along the run and the cut points inside [0, E]^2
    confs = [src]
    for i in run:
        confs.append(execute(v2, confs[-1], (i,), N2))
    cuts = [0] + [n for n in range(1, len(run)) if max(confs[n].counters) <= E] + [len(run)]
    pieces = []
    for s, e in zip(cuts, cuts[1:]):
        seg = confs[s:e + 1]
        axis = 1 if all(c.counters[1] <= E for c in seg) else 0
        bp = band_product(v2, BandSpec(axis, E))
        rho, exps = lps_witness_1vass(bp.vass, bp.to_product(seg[0]), bp.to_product(seg[-1]))
        pieces.append((bp.map_scheme(rho), exps))
    alphas, cycles, out_exps = [[]], [], []
    last = len(pieces) - 1
    for n, (rho, exps) in enumerate(pieces):
        if rho.k and (n == 0 or n == last):
            alphas[-1] += rho.alphas[0]
            cycles.append(rho.cycles[0])
            out_exps.append(exps[0])
            alphas.append(list(rho.alphas[1]))
        else:
            alphas[-1] += instantiate_lps(rho, exps)
    scheme = LinearPathScheme(tuple(map(tuple, alphas)), tuple(cycles))
    end = execute_scheme(v2, src, scheme, out_exps, LShape(E))
    assert end == tgt and scheme.k <= 2
    assert len(scheme) <= belt_length_bound(v2, D)
    return scheme, out_exps
