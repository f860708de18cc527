import random
import time
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from flatvass.core import (Configuration, LinearPathScheme, MalformedPath, Transition, Vass, Z_ALL,
                           execute, instantiate_lps, parikh)
from flatvass.gen import graph_to_flat_2vass
from flatvass.oracle import SearchCaps, bfs_reach
from flatvass.zreach import (NoWitness, is_flow_preserving, path_to_lps, simple_cycles, z_reachable,
                             z_short_witness)

from conftest import one_state, rand_vass, random_walk

TWO = Vass(2, ("p", "q"), (Transition("p", (1, 0), "q"), Transition("q", (0, 1), "p"),
                           Transition("q", (0, 0), "q")))


def test_flow_preservation_examples():
    assert is_flow_preserving(TWO, parikh((0, 1)))
    assert not is_flow_preserving(TWO, parikh((0,)))
    assert is_flow_preserving(TWO, Counter())


def test_path_to_lps_examples():
    rho, exps = path_to_lps(TWO, (0, 1))
    assert rho.k == 0 and rho.word() == (0, 1) and exps == []
    e = one_state((1, 0))
    rho, exps = path_to_lps(e, (0,) * 5)
    assert rho == LinearPathScheme(((0,), ()), ((0,),)) and exps == [4]
    with pytest.raises(MalformedPath):
        path_to_lps(TWO, (0, 0))


def test_path_to_lps_interleaved_loops():
    v = Vass(1, ("u", "a", "b"), (Transition("u", (1,), "a"), Transition("a", (0,), "u"),
                                  Transition("u", (2,), "b"), Transition("b", (0,), "u")))
    pi = (0, 1, 2, 3, 0, 1, 2, 3, 2, 3, 0, 1)
    rho, exps = path_to_lps(v, pi)
    assert rho.k <= len(v.transitions)
    assert parikh(instantiate_lps(rho, exps)) == parikh(pi)


def test_z_reachable_examples():
    mono = one_state((1, 0), (0, 1))
    r = z_reachable(mono, Configuration("p", (0, 0)), Configuration("p", (3, 2)))
    assert r
    apart = Vass(2, ("p", "q"), (Transition("p", (1, 1), "p"),))
    assert not z_reachable(apart, Configuration("p", (0, 0)), Configuration("q", (0, 0)))
    swap = one_state((2, -1), (-1, 2))
    r = z_reachable(swap, Configuration("p", (0, 0)), Configuration("p", (1, 1)))
    assert r and sorted(r.exponents) == [1, 1]
    assert z_reachable(swap, Configuration("p", (5, 5)), Configuration("p", (5, 5)))


def test_z_short_witness_examples():
    swap = one_state((2, -1), (-1, 2))
    pi = z_short_witness(swap, Configuration("p", (0, 0)), Configuration("p", (1, 1)))
    assert len(pi) == 2
    assert execute(swap, Configuration("p", (0, 0)), pi, Z_ALL) == Configuration("p", (1, 1))
    assert z_short_witness(swap, Configuration("p", (3, 3)), Configuration("p", (3, 3))) == ()
    chain = Vass(2, ("p", "q"), (Transition("p", (1, -1), "q"),))
    assert z_short_witness(chain, Configuration("p", (0, 0)), Configuration("q", (1, -1))) == (0,)
    with pytest.raises(NoWitness):
        z_short_witness(chain, Configuration("q", (0, 0)), Configuration("p", (0, 0)))


def test_simple_cycles_each_once():
    v = Vass(1, ("a", "b", "c"), (Transition("a", (0,), "b"), Transition("b", (0,), "c"),
                                  Transition("c", (0,), "a"), Transition("b", (0,), "a"),
                                  Transition("c", (0,), "c")))
    cyc = simple_cycles(v)
    assert sorted(map(sorted, cyc)) == sorted([[0, 1, 2], [0, 3], [4]])


@given(st.integers(0, 10**6))
def test_path_to_lps_bounds(seed):
    rng = random.Random(seed)
    nq, ne = rng.randint(1, 5), rng.randint(1, 8)
    v = rand_vass(rng, nq, ne, 1, dim=1)
    pi = random_walk(rng, v, rng.choice(v.states), rng.randint(0, 200))
    rho, exps = path_to_lps(v, pi)
    inst = instantiate_lps(rho, exps)
    assert parikh(inst) == parikh(pi)
    assert len(rho) <= 2 * nq * ne and rho.k <= ne
    if pi:
        assert (v.src(inst[0]), v.dst(inst[-1])) == (v.src(pi[0]), v.dst(pi[-1]))


@given(st.integers(0, 10**6))
def test_z_reachable_agrees_with_integer_bfs(seed):
    rng = random.Random(seed)
    v = rand_vass(rng, rng.randint(1, 4), rng.randint(1, 5), rng.randint(1, 3))
    src = Configuration(rng.choice(v.states), (rng.randint(0, 6), rng.randint(0, 6)))
    tgt = Configuration(rng.choice(v.states), (rng.randint(0, 6), rng.randint(0, 6)))
    res = z_reachable(v, src, tgt)
    oracle = bfs_reach(v, src, tgt, Z_ALL, SearchCaps.uniform(64, node_budget=None))
    if res:
        assert execute(v, src, instantiate_lps(res.scheme, res.exponents), Z_ALL) == tgt
    if oracle.decisive:
        assert bool(res) == oracle.found
    elif not res:
        assert not oracle.found


def test_walked_targets_are_never_refuted(rng):
    for _ in range(300):
        v = rand_vass(rng, rng.randint(1, 5), rng.randint(1, 7), 3)
        src = Configuration(rng.choice(v.states), (rng.randint(0, 6), rng.randint(0, 6)))
        pi = random_walk(rng, v, src.state, rng.randint(0, 30))
        tgt = execute(v, src, pi, Z_ALL)
        res = z_reachable(v, src, tgt)
        assert res and execute(v, src, instantiate_lps(res.scheme, res.exponents), Z_ALL) == tgt


def test_many_independent_cycles_refuted_quickly():
    # 24 two-state cycles hanging off a chain; every cycle moves along (1,-1) backwards
    v, s, t = graph_to_flat_2vass(6, [(1, 0), (4, 3), (5, 0), (4, 1)])
    start = time.monotonic()
    assert not z_reachable(v, s, t)
    assert time.monotonic() - start < 5
    v, s, t = graph_to_flat_2vass(3, [(0, 1), (1, 2)])
    assert z_reachable(v, s, t)
