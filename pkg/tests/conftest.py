import random

import pytest
from hypothesis import HealthCheck, settings

from flatvass.core import Configuration, Transition, Vass

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def rand_vass(rng: random.Random, nq: int, nt: int, norm: int, dim: int = 2) -> Vass:
    states = tuple(f"q{i}" for i in range(nq))
    trans = tuple(Transition(rng.choice(states), tuple(rng.randint(-norm, norm) for _ in range(dim)),
                             rng.choice(states)) for _ in range(nt))
    return Vass(dim, states, trans)


def rand_config(rng: random.Random, v: Vass, hi: int = 6, lo: int = 0) -> Configuration:
    return Configuration(rng.choice(v.states), tuple(rng.randint(lo, hi) for _ in range(v.dim)))


def random_walk(rng: random.Random, v: Vass, start, length: int) -> tuple:
    """A path (ignoring counters) of up to ``length`` transitions."""
    pi = []
    q = start
    for _ in range(length):
        out = v.out_edges(q)
        if not out:
            break
        i = rng.choice(out)
        pi.append(i)
        q = v.dst(i)
    return tuple(pi)


def one_state(*updates, state="p") -> Vass:
    return Vass(len(updates[0]), (state,), tuple(Transition(state, tuple(u), state) for u in updates))


@pytest.fixture
def rng():
    return random.Random(20240601)


def rand_loop_scheme(rng: random.Random, max_cycles: int = 3, norm: int = 3):
    """(v, rho): a valid scheme from some state back to itself with <= max_cycles cycles."""
    from flatvass.core import LinearPathScheme, validate_lps
    from flatvass.zreach import simple_cycles
    while True:
        v = rand_vass(rng, rng.randint(1, 3), rng.randint(1, 6), norm)
        at = {}
        for c in simple_cycles(v):
            at.setdefault(v.src(c[0]), []).append(c)
        if not at:
            continue
        word = list(rng.choice(at[rng.choice(sorted(at))]))
        inserts = []
        for _ in range(rng.randint(0, max_cycles)):
            pos = rng.randrange(len(word) + 1)
            st = v.src(word[pos]) if pos < len(word) else v.dst(word[-1])
            if st in at:
                inserts.append((pos, rng.choice(at[st])))
        inserts.sort(key=lambda x: x[0])
        alphas, cycles, j = [[]], [], 0
        for pos in range(len(word) + 1):
            while j < len(inserts) and inserts[j][0] == pos:
                cycles.append(inserts[j][1])
                alphas.append([])
                j += 1
            if pos < len(word):
                alphas[-1].append(word[pos])
        rho = LinearPathScheme(tuple(map(tuple, alphas)), tuple(cycles))
        assert validate_lps(v, rho)
        return v, rho


def scheme_window(v, sigma, window: int) -> set:
    """Displacements of a <= 2-cycle zigzag-free scheme with max-norm <= window."""
    from flatvass.core import displacement
    from flatvass.geometry import LinearSet
    base = displacement(v, sigma.connector())
    return LinearSet(base, tuple(displacement(v, c) for c in sigma.cycles)).points(window)


def walk_inside(rng: random.Random, v: Vass, start: Configuration, region, length: int) -> Configuration:
    """End of a random run from start that never leaves region."""
    cur = start
    for _ in range(length):
        moves = [i for i in v.out_edges(cur.state)
                 if region.contains(tuple(a + b for a, b in zip(cur.counters, v.update(i))))]
        if not moves:
            break
        i = rng.choice(moves)
        cur = Configuration(v.dst(i), tuple(a + b for a, b in zip(cur.counters, v.update(i))))
    return cur
