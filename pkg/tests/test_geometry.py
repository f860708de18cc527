import random

import pytest
from hypothesis import given, strategies as st

from conftest import one_state, rand_loop_scheme, scheme_window
from flatvass.core import (LinearPathScheme, PreconditionViolated, QUADRANTS, Quadrant, Transition,
                           Vass, displacement, is_zigzag_free, validate_lps)
from flatvass.geometry import (LinearSet, NotALoopScheme, check_component_witnesses, coefficient_bound,
                               decompose_quadrant, linset_member, member_coefficients,
                               scheme_delta_member, wrapped_delta_set, zigzag_decompose)
from flatvass.oracle import enumerate_linset, linset_window


def test_linset_member_examples():
    ls = LinearSet((1, 1), ((1, 1),))
    assert linset_member(ls, (4, 4)) == (True, (3,))
    assert linset_member(ls, (2, 3))[0] is False
    assert linset_member(ls, (1, 1)) == (True, (0,))
    ok, lam = linset_member(LinearSet((1, -1), ((1, -1), (-1, 2))), (0, 1))
    # relative to the base; counting the base as one use of (1,-1) gives (1,1)
    assert ok and lam == (0, 1)


@given(st.tuples(st.integers(-4, 4), st.integers(-4, 4)),
       st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=0, max_size=3),
       st.tuples(st.integers(-12, 12), st.integers(-12, 12)))
def test_member_coefficients_agree_with_window(b, P, x):
    lam = member_coefficients(b, tuple(P), x)
    assert (lam is not None) == (x in linset_window(b, P, 12))
    if lam is not None:
        acc = list(b)
        for c, p in zip(lam, P):
            acc = [a + c * y for a, y in zip(acc, p)]
        assert tuple(acc) == x and min(lam, default=0) >= 0


def test_decompose_quadrant_examples():
    s = decompose_quadrant((1, 1), [(1, 1)])
    assert [(c.base, c.periods) for c in s] == [((1, 1), ((1, 1),))]
    assert len(decompose_quadrant((-1, -1), [(-1, -1)])) == 0
    b, P = (1, -1), [(1, -1), (-1, 2)]
    s = decompose_quadrant(b, P)
    brute = {x for x in enumerate_linset(b, P, 25, 40) if min(x) >= 0}
    assert s.points(40) >= brute
    assert s.points(40) == {x for x in linset_window(b, P, 40) if min(x) >= 0}


def test_decompose_quadrant_requires_base_in_periods():
    with pytest.raises(PreconditionViolated):
        decompose_quadrant((1, 0), [(0, 1)])


vec = st.tuples(st.integers(-4, 4), st.integers(-4, 4))


@given(st.lists(vec, min_size=1, max_size=4), st.integers(0, 3), st.sampled_from(QUADRANTS))
def test_decompose_quadrant_is_exact(P, bi, z):
    b = P[bi % len(P)]
    s = decompose_quadrant(b, P, z)
    for comp in s:
        assert len(comp.periods) <= 2
        assert all(z.contains(g) for g in comp.periods)
        assert check_component_witnesses(b, P, comp)
        assert max(comp.base_witness, default=0) <= coefficient_bound(max(max(map(abs, p)) for p in P))
    window = 24
    exact = {x for x in linset_window(b, P, window) if z.contains(x)}
    assert s.points(window) == exact


def test_decompose_is_idempotent_on_quadrant_sets(rng):
    for _ in range(40):
        P = [(rng.randint(0, 4), rng.randint(0, 4)) for _ in range(rng.randint(1, 3))]
        b = P[0]
        s = decompose_quadrant(b, P, Quadrant.NN)
        assert s.points(20) == linset_window(b, P, 20)


def _check_zigzag(v, rho, window=30):
    out = zigzag_decompose(v, rho)
    for s in out:
        assert s.k <= 2 and is_zigzag_free(v, s)[0] and validate_lps(v, s)
        q = v.src(s.word()[0]) if s.word() else None
        assert q is None or v.dst(s.word()[-1]) == q
    b, P = wrapped_delta_set(v, rho)
    union = set()
    for s in out:
        union |= scheme_window(v, s, window)
    assert union == linset_window(b, P, window)
    return out


def test_zigzag_single_monotone_cycle():
    v = one_state((1, 1))
    rho = LinearPathScheme(((), ()), ((0,),))
    assert zigzag_decompose(v, rho) == [rho]


def test_zigzag_two_mixed_cycles():
    v = one_state((2, -1), (-1, 2))
    rho = LinearPathScheme(((), (), ()), ((0,), (1,)))
    out = _check_zigzag(v, rho)
    assert len(out) >= 2
    # every point of the input grid is hit by some output scheme
    for e1 in range(16):
        for e2 in range(16):
            x = (2 * e1 - e2, -e1 + 2 * e2)
            assert any(scheme_delta_member(v, s, x) is not None for s in out)


def test_zigzag_plain_loop_gets_wrapped():
    v = Vass(2, ("p", "q"), (Transition("p", (1, -2), "q"), Transition("q", (0, 1), "p")))
    rho = LinearPathScheme.path((0, 1))
    out = _check_zigzag(v, rho)
    pts = set()
    for s in out:
        pts |= scheme_window(v, s, 20)
    assert pts == {(n, -n) for n in range(1, 21)}


def test_zigzag_rejects_open_schemes():
    v = Vass(2, ("p", "q"), (Transition("p", (1, 0), "q"),))
    with pytest.raises(NotALoopScheme):
        zigzag_decompose(v, LinearPathScheme.path((0,)))


@pytest.mark.parametrize("seed", range(6))
def test_zigzag_delta_sets_random(seed):
    rng = random.Random(seed)
    for _ in range(15):
        v, rho = rand_loop_scheme(rng)
        out = _check_zigzag(v, rho)
        # the original displacement grid is covered
        deltas = [displacement(v, c) for c in rho.cycles]
        base = displacement(v, rho.connector())
        for _ in range(30):
            x = base
            for d in deltas:
                e = rng.randint(0, 15)
                x = (x[0] + e * d[0], x[1] + e * d[1])
            assert any(scheme_delta_member(v, s, x) is not None for s in out)
