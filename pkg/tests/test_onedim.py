import random

import pytest

from conftest import rand_config, rand_vass
from flatvass.core import (Configuration, LShape, LinearPathScheme, NonNegative, PreconditionViolated,
                           Transition, Vass, execute, execute_scheme)
from flatvass.onedim import (BandSpec, Unreachable, band_product, belt_length_bound, belt_reach,
                             lps_witness_1vass, run_length_bound, scheme_length_bound,
                             shortest_run_1vass, unary_expand)
from flatvass.oracle import BfsOutcome, SearchCaps, bfs_reach

N = NonNegative()


def C(q, *x):
    return Configuration(q, tuple(x))


def one_counter(rng, nq, nt, norm):
    return rand_vass(rng, nq, nt, norm, dim=1)


def test_unary_expand_chains():
    v = Vass(1, ("p", "q"), (Transition("p", (3,), "q"), Transition("q", (0,), "p"), Transition("q", (-2,), "q")))
    ex = unary_expand(v)
    ups = [[ex.vass.transitions[i].update[0] for i in ch] for ch in ex.chains]
    assert ups == [[0, 1, 1, 1, 0], [0, 0], [0, -1, -1, 0]]
    pi = (0, 2, 1, 0)
    assert ex.lower(ex.lift(pi)) == pi
    assert execute(ex.vass, C("p", 0), ex.lift((0, 2))) == execute(v, C("p", 0), (0, 2))


def test_unary_expand_preserves_reachability(rng):
    checked = 0
    while checked < 200:
        v = one_counter(rng, rng.randint(1, 4), rng.randint(1, 6), 4)
        ex = unary_expand(v)
        s, t = rand_config(rng, v, 10), rand_config(rng, v, 10)
        caps = SearchCaps.uniform(30, d=1, node_budget=None)
        a = bfs_reach(v, s, t, N, caps)
        b = bfs_reach(ex.vass, s, t, N, caps)
        # intermediate chain counters lie between the chain's endpoints, so the caps agree
        assert a.outcome == b.outcome
        if a.found:
            assert ex.lift(a.path) is not None and ex.lower(b.path) is not None
        checked += 1


def test_shortest_run_examples():
    up = Vass(1, ("p",), (Transition("p", (1,), "p"),))
    assert len(shortest_run_1vass(up, C("p", 0), C("p", 5))) == 5
    down = Vass(1, ("p",), (Transition("p", (-1,), "p"),))
    with pytest.raises(Unreachable):
        shortest_run_1vass(down, C("p", 0), C("p", 1))
    with pytest.raises(PreconditionViolated):
        shortest_run_1vass(Vass(1, ("p",), (Transition("p", (2,), "p"),)), C("p", 0), C("p", 2))


def test_pinned_cap_matches_wide_search():
    """Shortest runs with the pinned cap agree with a much wider search."""
    rng = random.Random(11)
    for _ in range(300):
        nq = rng.randint(1, 5)
        v = one_counter(rng, nq, rng.randint(1, 8), 1)
        s, t = rand_config(rng, v, 40), rand_config(rng, v, 40)
        # a cap ten times the largest endpoint stands in for no cap at all
        wide = bfs_reach(v, s, t, N, SearchCaps.uniform(400, d=1, node_budget=None))
        try:
            run = shortest_run_1vass(v, s, t)
        except Unreachable:
            assert not wide.found
            continue
        assert wide.found and len(run) == len(wide.path)
        assert len(run) <= run_length_bound(nq, abs(s.counters[0] - t.counters[0]))


def test_lps_witness_examples():
    up = Vass(1, ("p",), (Transition("p", (1,), "p"),))
    rho, exps = lps_witness_1vass(up, C("p", 0), C("p", 5))
    assert rho == LinearPathScheme(((), ()), ((0,),)) and exps == [5]
    assert lps_witness_1vass(up, C("p", 3), C("p", 3)) == (LinearPathScheme.path(()), [])
    v = Vass(1, ("p", "q"), (Transition("p", (3,), "q"), Transition("q", (-1,), "p")))
    rho, exps = lps_witness_1vass(v, C("p", 0), C("p", 4))
    assert rho.k == 1
    assert execute_scheme(v, C("p", 0), rho, exps) == C("p", 4)
    assert len(rho) <= scheme_length_bound(2, 3)


def test_lps_witness_random(rng):
    for _ in range(150):
        nq = rng.randint(1, 4)
        v = one_counter(rng, nq, rng.randint(1, 6), 3)
        s, t = rand_config(rng, v, 12), rand_config(rng, v, 12)
        try:
            rho, exps = lps_witness_1vass(v, s, t)
        except Unreachable:
            ref = bfs_reach(v, s, t, N, SearchCaps.uniform(300, d=1, node_budget=None))
            assert not ref.found
            continue
        assert rho.k <= 1 and len(rho) <= scheme_length_bound(nq, v.norm)
        assert execute_scheme(v, s, rho, exps, N) == t


def test_band_product_formula():
    v = Vass(2, ("p", "q"), (Transition("p", (1, -1), "q"),))
    bp = band_product(v, BandSpec(1, 2))
    got = {(t.src, t.update, t.dst) for t in bp.vass.transitions}
    assert got == {(("p", 1), (1,), ("q", 0)), (("p", 2), (1,), ("q", 1))}
    assert all(t.dst[1] >= 0 for t in bp.vass.transitions)


def test_band_product_equivalence(rng):
    for _ in range(200):
        v = rand_vass(rng, rng.randint(1, 3), rng.randint(1, 5), 2)
        band = BandSpec(rng.randint(0, 1), rng.randint(0, 4))
        bp = band_product(v, band)
        s, t = rand_config(rng, v, 6), rand_config(rng, v, 6)
        s = bp.from_product(bp.to_product(Configuration(s.state, tuple(
            min(x, band.D) if i == band.axis else x for i, x in enumerate(s.counters)))))
        t = bp.from_product(bp.to_product(Configuration(t.state, tuple(
            min(x, band.D) if i == band.axis else x for i, x in enumerate(t.counters)))))
        caps2 = SearchCaps.uniform(25, node_budget=None)
        a = bfs_reach(v, s, t, band.region(), caps2)
        b = bfs_reach(bp.vass, bp.to_product(s), bp.to_product(t), N, SearchCaps.uniform(25, d=1, node_budget=None))
        assert a.outcome == b.outcome
        if b.found:
            pi = bp.map_path(b.path)
            assert execute(v, s, pi, band.region()) == t
            cyc = bp.to_product(s).state == bp.to_product(t).state
            assert cyc == ((s.state, s.counters[band.axis]) == (t.state, t.counters[band.axis]))


def test_belt_examples():
    v = Vass(2, ("p",), (Transition("p", (1, 0), "p"), Transition("p", (0, 1), "p")))
    assert belt_reach(v, 2, C("p", 5, 1), C("p", 5, 1)) == (LinearPathScheme.path(()), [])
    rho, exps = belt_reach(v, 2, C("p", 0, 1), C("p", 30, 1))
    assert rho.k == 1 and len(rho.alphas[0]) + len(rho.alphas[1]) + exps[0] == 30
    assert execute_scheme(v, C("p", 0, 1), rho, exps, LShape(3)) == C("p", 30, 1)
    with pytest.raises(PreconditionViolated):
        belt_reach(v, 2, C("p", 5, 5), C("p", 0, 0))


@pytest.mark.parametrize("seed", range(4))
def test_belt_matches_region_bfs(seed):
    rng = random.Random(100 + seed)
    D = 3
    L = LShape(D)
    done = 0
    while done < 40:
        v = rand_vass(rng, rng.randint(1, 3), rng.randint(1, 5), 2)
        s, t = rand_config(rng, v, 10), rand_config(rng, v, 10)
        if not (L.contains(s.counters) and L.contains(t.counters)):
            continue
        done += 1
        ref = bfs_reach(v, s, t, L, SearchCaps.uniform(60, node_budget=None))
        try:
            rho, exps = belt_reach(v, D, s, t)
        except Unreachable:
            assert not ref.found
            continue
        assert ref.outcome is not BfsOutcome.EXHAUSTED_COMPLETE
        assert rho.k <= 2 and len(rho) <= belt_length_bound(v, D)
        assert execute_scheme(v, s, rho, exps, LShape(D + v.norm)) == t
