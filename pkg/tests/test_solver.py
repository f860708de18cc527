import random

import pytest

from conftest import one_state, rand_config, rand_vass
from flatvass.core import (Blocked, Configuration, LinearPathScheme, PreconditionViolated, ResourceCap,
                           Transition, Vass, execute, execute_scheme, instantiate_lps)
from flatvass.gen import gen_doubling_family
from flatvass.oracle import BfsOutcome, SearchCaps, bfs_reach, reachable_set
from flatvass.solver import (Certificate, Strategy, bounded, bounded_search, bounded_search_cap,
                             coverable, pump_witness, reach2, verify)


def C(q, *x):
    return Configuration(q, tuple(x))


EXAMPLE = Vass(2, ("p", "q"), (Transition("p", (2, 0), "q"), Transition("q", (-1, 1), "p")))


@pytest.mark.parametrize("strategy", list(Strategy))
def test_reach2_examples(strategy):
    d = reach2(EXAMPLE, C("p", 0, 0), C("p", 0, 0), strategy)
    assert d.reachable and d.certificate.scheme == LinearPathScheme.path(())
    d = reach2(EXAMPLE, C("p", 0, 0), C("q", 3, 1), strategy)
    assert d.reachable and verify(EXAMPLE, d.certificate)
    neg = Vass(2, ("p", "q"), (Transition("p", (-1, 0), "q"),))
    assert not reach2(neg, C("p", 0, 0), C("q", 0, 0), strategy).reachable
    with pytest.raises(PreconditionViolated):
        reach2(EXAMPLE, C("p", -1, 0), C("q", 0, 0), strategy)


def test_verify_rejects_tampering():
    v = one_state((1, -1), (0, 1))
    # y up 3 times, then transfer 3: p(0,0) -> p(3,0)
    rho = LinearPathScheme(((), (), ()), ((1,), (0,)))
    good = Certificate(rho, (3, 3), C("p", 0, 0), C("p", 3, 0))
    assert verify(v, good)
    bad = verify(v, Certificate(rho, (3, 4), C("p", 0, 0), C("p", 4, -1)))
    assert not bad and bad.segment == 3 and bad.coordinate == 1
    off = verify(v, Certificate(rho, (2, 3), C("p", 0, 0), C("p", 3, 0)))
    assert not off and off.segment == 3
    wrong_end = verify(v, Certificate(rho, (3, 2), C("p", 0, 0), C("p", 3, 0)))
    assert not wrong_end and "ends at" in wrong_end.reason
    assert not verify(v, Certificate(rho, (3,), C("p", 0, 0), C("p", 3, 0)))


def test_verify_huge_exponent_without_unrolling():
    v = one_state((1, 1))
    rho = LinearPathScheme(((), ()), ((0,),))
    n = 2 ** 64
    assert verify(v, Certificate(rho, (n,), C("p", 0, 0), C("p", n, n)))
    assert not verify(v, Certificate(rho, (n,), C("p", 0, 0), C("p", n, n + 1)))
    down = one_state((-1, 1))
    assert not verify(down, Certificate(rho, (n,), C("p", n - 1, 0), C("p", -1, n)))


def test_verify_matches_unrolled_replay(rng):
    for _ in range(200):
        v = rand_vass(rng, rng.randint(1, 3), rng.randint(1, 5), 2)
        s = rand_config(rng, v)
        d = bfs_reach(v, s, rand_config(rng, v), caps=SearchCaps.uniform(20))
        if not d.found or not d.path:
            continue
        # fold the path's first repeated transition into a cycle and perturb its exponent
        pi = d.path
        k = next((j for j in range(len(pi)) if v.src(pi[j]) == v.dst(pi[j])), None)
        if k is None:
            continue
        rho = LinearPathScheme((pi[:k], pi[k + 1:]), ((pi[k],),))
        e = rng.randint(0, 4)
        try:
            end = execute_scheme(v, s, rho, [e])
        except Blocked:
            end = None
        cert = Certificate(rho, (e,), s, end if end is not None else s)
        assert bool(verify(v, cert)) == (end is not None and execute(v, s, instantiate_lps(rho, [e])) == end)


def test_bounded_search_caps():
    assert bounded_search_cap(EXAMPLE, C("p", 0, 0), C("q", 3, 1)) == 3 + (2 * 3) ** 2
    with pytest.raises(ResourceCap):
        bounded_search(one_state((1, 1)), C("p", 0, 0), C("p", 5000, 5000))
    with pytest.raises(ResourceCap):
        bounded_search(one_state((1, 0)), C("p", 0, 0), C("p", 2, 1), cap=5)


def test_bounded_search_enlarges_a_truncated_box():
    # from (6,6) the first counter climbs to 12, past the pinned cap 6 + (1*2)^2
    v = one_state((0, -1), (1, -1), (0, -1))
    s, t = C("p", 6, 6), C("p", 1, 1)
    assert bounded_search_cap(v, s, t) == 10
    ref = bfs_reach(v, s, t, caps=SearchCaps.uniform(40, node_budget=None))
    assert ref.outcome is BfsOutcome.EXHAUSTED_COMPLETE
    assert not bounded_search(v, s, t).reachable
    with pytest.raises(ResourceCap):
        bounded_search(v, s, t, cap=10)


@pytest.mark.parametrize("seed", range(3))
def test_strategies_agree_with_oracle(seed):
    rng = random.Random(900 + seed)
    for _ in range(80):
        v = rand_vass(rng, rng.randint(1, 4), rng.randint(1, 6), 3)
        s, t = rand_config(rng, v), rand_config(rng, v)
        ref = bfs_reach(v, s, t, caps=SearchCaps.uniform(80, node_budget=None))
        verdicts = set()
        for strat in Strategy:
            try:
                d = reach2(v, s, t, strat)
            except ResourceCap:
                continue
            verdicts.add(d.reachable)
            if d.reachable:
                assert verify(v, d.certificate)
                assert ref.outcome is not BfsOutcome.EXHAUSTED_COMPLETE
            else:
                assert not ref.found
        assert len(verdicts) <= 1


def test_doubling_certificate():
    inst = gen_doubling_family(10)
    d = reach2(inst.vass, inst.src, inst.tgt, Strategy.FLATTEN)
    assert d.reachable and verify(inst.vass, d.certificate)


def _cover_oracle(v, s, t, slack=12):
    cap = max(max(t.counters), max(s.counters)) + slack
    seen, complete = reachable_set(v, s, caps=SearchCaps.uniform(cap, node_budget=None))
    hit = any(q == t.state and all(a >= b for a, b in zip(x, t.counters)) for q, x in seen)
    return True if hit else (False if complete else None)


def test_coverable_examples():
    v = one_state((1, 1))
    assert coverable(v, C("p", 0, 0), C("p", 0, 0)).path == ()
    r = coverable(v, C("p", 0, 0), C("p", 5, 5))
    assert r and len(r.path) == 5 and r.reached == C("p", 5, 5)
    assert not coverable(one_state((1, -1)), C("p", 0, 0), C("p", 1, 0))


def test_coverable_matches_oracle(rng):
    decided = 0
    for _ in range(300):
        v = rand_vass(rng, rng.randint(1, 3), rng.randint(1, 5), 2)
        s, t = rand_config(rng, v), rand_config(rng, v)
        r = coverable(v, s, t)
        if r:
            end = execute(v, s, r.path)
            assert end.state == t.state and all(a >= b for a, b in zip(end.counters, t.counters))
        ref = _cover_oracle(v, s, t)
        if ref is not None:
            decided += 1
            assert bool(r) == ref
    assert decided > 150


def test_reachable_implies_coverable(rng):
    for _ in range(150):
        v = rand_vass(rng, rng.randint(1, 3), rng.randint(1, 5), 2)
        s, t = rand_config(rng, v), rand_config(rng, v)
        ref = bfs_reach(v, s, t, caps=SearchCaps.uniform(30))
        if ref.found:
            lower = Configuration(t.state, tuple(max(0, x - rng.randint(0, 2)) for x in t.counters))
            assert coverable(v, s, lower)


def test_bounded_examples():
    assert not bounded(Vass(2, ("p", "q"), (Transition("p", (0, 0), "q"), Transition("q", (1, 0), "q"))),
                       C("p", 0, 0))
    assert bounded(Vass(2, ("p", "q"), (Transition("p", (3, 1), "q"),)), C("p", 0, 0))
    assert bounded(one_state((1, -1)), C("p", 0, 4))


def test_unbounded_means_arbitrarily_high_coverage(rng):
    checked = 0
    for _ in range(200):
        v = rand_vass(rng, rng.randint(1, 3), rng.randint(1, 5), 2)
        s = rand_config(rng, v)
        rho = pump_witness(v, s)
        seen, complete = reachable_set(v, s, caps=SearchCaps.uniform(40, node_budget=None))
        assert bounded(v, s) == (rho is None)
        if rho is None:
            assert complete
            continue
        checked += 1
        assert not complete
        for n in (16, 2 ** 16):
            end = execute_scheme(v, s, rho, [n])
            assert max(end.counters) >= n
            assert verify(v, Certificate(rho, (n,), s, end))
        assert coverable(v, s, execute_scheme(v, s, rho, [16]))
    assert checked > 20
