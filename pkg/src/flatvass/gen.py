"""Instance factories: hardness reductions, random systems and the doubling family."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .core import Configuration, Transition, Vass, VassError


class ParamError(VassError):
    pass


# ------------------------------------------------------------ bounded one-counter automata

@dataclass(frozen=True)
class BoundedOCA:
    """One counter restricted to [0, bound]."""
    states: tuple
    transitions: tuple  # (src, update, dst)
    bound: int

    def successors(self, q, z):
        for src, upd, dst in self.transitions:
            if src == q and 0 <= z + upd <= self.bound:
                yield dst, z + upd


@dataclass(frozen=True)
class OcaEmbedding:
    bound: int

    def __call__(self, q, z: int) -> Configuration:
        return Configuration(q, (z, self.bound - z))


def boca_to_2vass(b: BoundedOCA) -> tuple:
    """(v2, phi): (p,z,q) becomes (p,(z,-z),q) and q(z) maps to q(z, b-z)."""
    trans = tuple(Transition(p, (z, -z), q) for p, z, q in b.transitions)
    return Vass(2, tuple(b.states), trans), OcaEmbedding(b.bound)


def oca_reachable(b: BoundedOCA, src: tuple, tgt: tuple) -> bool:
    seen = {src}
    stack = [src]
    while stack:
        q, z = stack.pop()
        for nxt in b.successors(q, z):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return tgt in seen


def random_oca(seed: int, nq: int = 4, nt: int = 6, max_update: int = 5, bound: int = 32) -> BoundedOCA:
    rng = random.Random(seed)
    states = tuple(f"q{i}" for i in range(nq))
    trans = tuple((rng.choice(states), rng.randint(-max_update, max_update), rng.choice(states))
                  for _ in range(nt))
    return BoundedOCA(states, trans, bound)


# ------------------------------------------------------------ digraph reachability

def _vertex_vector(i: int, m: int) -> tuple:
    return (i, m - 1 - i)


def graph_to_flat_2vass(m: int, edges: Sequence[tuple]) -> tuple:
    """(v2, src, tgt) with tgt reachable iff vertex m-1 is reachable from vertex 0.

    Copy j of the gadget simulates edge number j mod n; there are m*n copies.
    """
    n = len(edges)
    if m < 1 or n < 1:
        raise ParamError("need at least one vertex and one edge")
    ell = m * n - 1
    states = []
    trans = []
    for j in range(ell + 1):
        states += [f"q{j}", f"r{j}"]
    for j in range(ell + 1):
        a, c = edges[j % n]
        ha, hc = _vertex_vector(a, m), _vertex_vector(c, m)
        trans.append(Transition(f"q{j}", (-ha[0], -ha[1]), f"r{j}"))
        trans.append(Transition(f"r{j}", hc, f"q{j}"))
        if j < ell:
            trans.append(Transition(f"q{j}", (0, 0), f"q{j + 1}"))
    v = Vass(2, tuple(states), tuple(trans))
    return (v, Configuration("q0", _vertex_vector(0, m)),
            Configuration(f"q{ell}", _vertex_vector(m - 1, m)))


def graph_reachable(m: int, edges: Sequence[tuple], a: int = 0, b=None) -> bool:
    b = m - 1 if b is None else b
    seen = {a}
    stack = [a]
    while stack:
        x = stack.pop()
        for s, t in edges:
            if s == x and t not in seen:
                seen.add(t)
                stack.append(t)
    return b in seen


def random_graph(seed: int, m: int, n: int) -> list:
    rng = random.Random(seed)
    return [(rng.randrange(m), rng.randrange(m)) for _ in range(n)]


def is_flat(v: Vass) -> bool:
    """Every state lies on at most one simple cycle."""
    from .zreach import simple_cycles
    count = {q: 0 for q in v.states}
    for beta in simple_cycles(v):
        for q in {v.src(i) for i in beta}:
            count[q] += 1
            if count[q] > 1:
                return False
    return True


# ------------------------------------------------------------ random systems

def _connected(states, trans) -> bool:
    if not states:
        return True
    adj = {q: set() for q in states}
    for t in trans:
        adj[t.src].add(t.dst)
        adj[t.dst].add(t.src)
    seen = {states[0]}
    stack = [states[0]]
    while stack:
        for y in adj[stack.pop()]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(states)


def gen_random(nq: int, nt: int, norm: int, seed: int, dim: int = 2, tries: int = 1000) -> Vass:
    """Seeded random VASS whose underlying undirected graph is connected."""
    if nq < 1 or nt < 0 or norm < 0 or dim < 1:
        raise ParamError("need nq >= 1 and nonnegative sizes")
    if nt < nq - 1:
        raise ParamError(f"{nt} transitions cannot connect {nq} states")
    rng = random.Random(seed)
    states = tuple(f"q{i}" for i in range(nq))
    for _ in range(tries):
        trans = tuple(Transition(rng.choice(states), tuple(rng.randint(-norm, norm) for _ in range(dim)),
                                 rng.choice(states)) for _ in range(nt))
        if _connected(states, trans):
            return Vass(dim, states, trans)
    raise ParamError("no connected instance found")


def gen_query(v: Vass, seed: int, max_norm: int = 6) -> tuple:
    rng = random.Random(seed)
    pick = lambda: Configuration(rng.choice(v.states), tuple(rng.randint(0, max_norm) for _ in range(v.dim)))
    return pick(), pick()


# ------------------------------------------------------------ doubling family

@dataclass(frozen=True)
class DoublingInstance:
    vass: Vass
    src: Configuration
    tgt: Configuration
    peak: int
    exponents: tuple  # the unique witnessing exponents, one per loop in chain order


def gen_doubling_family(n: int) -> DoublingInstance:
    """A chain of transfer loops whose only run to the target peaks at 2^n.

    Stage i has a loop at a_i moving one unit of x into two units of y and a
    loop at b_i moving y back into x.  The sum x + y grows only on a_i loops,
    so reaching (2^n, 0) forces every transfer to be complete.
    """
    if n < 1:
        raise ParamError("n must be positive")
    states = []
    trans = []
    for i in range(n):
        states += [f"a{i}", f"b{i}"]
        trans.append(Transition(f"a{i}", (-1, 2), f"a{i}"))
        trans.append(Transition(f"a{i}", (0, 0), f"b{i}"))
        trans.append(Transition(f"b{i}", (1, -1), f"b{i}"))
        trans.append(Transition(f"b{i}", (0, 0), f"a{i + 1}" if i + 1 < n else "f"))
    states.append("f")
    exps = []
    for i in range(n):
        exps += [2 ** i, 2 ** (i + 1)]
    v = Vass(2, tuple(states), tuple(trans))
    return DoublingInstance(v, Configuration("a0", (1, 0)), Configuration("f", (2 ** n, 0)),
                            2 ** n, tuple(exps))
