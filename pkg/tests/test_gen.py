import random

import pytest

from flatvass.core import Configuration, LinearPathScheme, N2, Transition, Vass, execute, execute_scheme
from flatvass.gen import (BoundedOCA, ParamError, boca_to_2vass, gen_doubling_family, gen_query,
                          gen_random, graph_reachable, graph_to_flat_2vass, is_flat, oca_reachable,
                          random_graph, random_oca)
from flatvass.oracle import BfsOutcome, SearchCaps, bfs_reach


def test_oca_image_examples():
    b = BoundedOCA(("p", "q"), (("p", -2, "q"),), 5)
    v, phi = boca_to_2vass(b)
    assert v.transitions == (Transition("p", (-2, 2), "q"),)
    assert phi("q", 3) == Configuration("q", (3, 2))


@pytest.mark.parametrize("seed", range(4))
def test_oca_reduction_equivalence(seed):
    rng = random.Random(seed)
    for k in range(25):
        b = random_oca(seed * 100 + k, nq=rng.randint(1, 5), nt=rng.randint(1, 7), bound=rng.randint(0, 32))
        v, phi = boca_to_2vass(b)
        s = (rng.choice(b.states), rng.randint(0, b.bound))
        t = (rng.choice(b.states), rng.randint(0, b.bound))
        want = oca_reachable(b, s, t)
        got = bfs_reach(v, phi(*s), phi(*t), N2, SearchCaps.uniform(b.bound, node_budget=None))
        assert got.outcome is not BfsOutcome.NOT_FOUND_WITHIN_CAPS
        assert got.found == want
        if got.found:
            # the image run is a bounded OCA run read off the first counter
            cur = s
            for i in got.path:
                tr = v.transitions[i]
                cur = (tr.dst, cur[1] + tr.update[0])
                assert 0 <= cur[1] <= b.bound
            assert cur == t


def test_graph_reduction_example():
    v, s, t = graph_to_flat_2vass(2, [(0, 1)])
    assert s == Configuration("q0", (0, 1)) and t == Configuration("q1", (1, 0))
    # q0(0,1) -> r0(0,0) -> q0(1,0) -> q1(1,0)
    assert execute(v, s, (0, 1, 2)) == t
    assert is_flat(v)
    v, s, t = graph_to_flat_2vass(3, [(1, 2), (2, 1)])
    assert not bfs_reach(v, s, t, caps=SearchCaps.uniform(3, node_budget=None)).found
    with pytest.raises(ParamError):
        graph_to_flat_2vass(2, [])


@pytest.mark.parametrize("seed", range(4))
def test_graph_reduction_equivalence(seed):
    rng = random.Random(seed)
    for k in range(50):
        m, n = rng.randint(1, 6), rng.randint(1, 6)
        edges = random_graph(seed * 1000 + k, m, n)
        v, s, t = graph_to_flat_2vass(m, edges)
        assert is_flat(v)
        assert len(v.states) == 2 * m * n
        res = bfs_reach(v, s, t, caps=SearchCaps.uniform(m, node_budget=None))
        assert res.outcome is not BfsOutcome.NOT_FOUND_WITHIN_CAPS
        assert res.found == graph_reachable(m, edges)


def test_is_flat_detects_shared_states():
    v = Vass(2, ("p",), (Transition("p", (1, 0), "p"), Transition("p", (0, 1), "p")))
    assert not is_flat(v)


def test_gen_random_is_deterministic_and_connected():
    a = gen_random(4, 6, 3, seed=9)
    assert a == gen_random(4, 6, 3, seed=9)
    assert a != gen_random(4, 6, 3, seed=10)
    assert gen_query(a, 1) == gen_query(a, 1)
    assert gen_random(1, 0, 2, seed=0).transitions == ()
    with pytest.raises(ParamError):
        gen_random(4, 2, 1, seed=0)
    with pytest.raises(ParamError):
        gen_random(0, 2, 1, seed=0)


def test_random_generators_are_deterministic():
    assert random_graph(3, 4, 5) == random_graph(3, 4, 5)
    assert random_oca(3) == random_oca(3)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_doubling_small_by_bfs(n):
    inst = gen_doubling_family(n)
    assert inst.peak == 2 ** n
    res = bfs_reach(inst.vass, inst.src, inst.tgt, caps=SearchCaps.uniform(2 ** (n + 1), node_budget=None))
    assert res.found
    top = max(max(c.counters) for c in _trace(inst.vass, inst.src, res.path))
    assert top >= 2 ** n
    rho_cycles = tuple((i,) for i in range(len(inst.vass.transitions)) if i % 2 == 0)
    alphas = ((),) + tuple((i,) for i in range(len(inst.vass.transitions)) if i % 2 == 1)
    rho = LinearPathScheme(alphas, rho_cycles)
    assert execute_scheme(inst.vass, inst.src, rho, list(inst.exponents)) == inst.tgt


def _trace(v, c, path):
    out = [c]
    for i in path:
        out.append(execute(v, out[-1], (i,)))
    return out


def test_doubling_rejects_bad_size():
    with pytest.raises(ParamError):
        gen_doubling_family(0)
