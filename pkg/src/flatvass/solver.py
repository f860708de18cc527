"""Top-level decisions: reachability in dimension two, coverability, boundedness,
and polynomial-time certificate checking."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from . import _kernels
from .core import (Blocked, Configuration, DimensionMismatch, LinearPathScheme, MalformedPath,
                   N2, NonNegative, PreconditionViolated, Region, ResourceCap, Vass, check_path,
                   displacement, execute, prefix_displacements, validate_lps, vadd, vnorm, vscale)
from .dioph import build_cycle_system
from .flatten import FlattenParams, flatten_reach
from .onedim import Unreachable


class Strategy(enum.Enum):
    BOUNDED = "bounded"
    FLATTEN = "flatten"
    AUTO = "auto"


@dataclass(frozen=True)
class Certificate:
    scheme: LinearPathScheme
    exponents: tuple
    src: Configuration
    tgt: Configuration
    region: Region = N2

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))


@dataclass(frozen=True)
class Decision:
    reachable: bool
    certificate: Optional[Certificate] = None
    strategy: str = ""

    def __bool__(self):
        return self.reachable


# ------------------------------------------------------------ verification

@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    segment: int = -1
    coordinate: int = -1
    reason: str = ""

    def __bool__(self):
        return self.ok


def verify(v: Vass, cert: Certificate) -> VerifyResult:
    """Replay a certificate without unrolling its cycles.

    Segments are numbered in word order: alpha_0 is 0, beta_1 is 1, alpha_1
    is 2 and so on.  ``coordinate`` names the counter that went out of the
    region, when that is the failure.
    """
    rho, exps = cert.scheme, cert.exponents
    d = v.dim
    if len(cert.src.counters) != d or len(cert.tgt.counters) != d:
        return VerifyResult(False, reason="configuration arity differs from the system")
    if len(exps) != rho.k:
        return VerifyResult(False, reason="exponent count differs from the cycle count")
    if any(e < 0 for e in exps):
        return VerifyResult(False, reason="negative exponent")
    chk = validate_lps(v, rho)
    if not chk:
        return VerifyResult(False, segment=chk.index, reason=chk.reason)
    if not cert.region.contains(cert.src.counters):
        return VerifyResult(False, segment=0, reason="source outside the region")
    cur = cert.src
    for n, a in enumerate(rho.alphas):
        if n > 0:
            beta, e = rho.cycles[n - 1], exps[n - 1]
            seg = 2 * n - 1
            if v.src(beta[0]) != cur.state:
                return VerifyResult(False, seg, reason="cycle starts at the wrong state")
            if e > 0:
                bad = _cycle_failure(v, cur.counters, beta, e, cert.region)
                if bad is not None:
                    return VerifyResult(False, seg, bad, "cycle leaves the region")
                cur = Configuration(cur.state, vadd(cur.counters, vscale(e, displacement(v, beta))))
        try:
            check_path(v, a, cur.state)
            cur = execute(v, cur, a, cert.region)
        except MalformedPath:
            return VerifyResult(False, 2 * n, reason="connector starts at the wrong state")
        except Blocked as exc:
            coord = next((i for i in range(d) if not cert.region.contains(
                tuple(x if j == i else 0 for j, x in enumerate(exc.config.counters)))), -1)
            return VerifyResult(False, 2 * n, coord, f"blocked at step {exc.step}")
    if cur != cert.tgt:
        coord = next(i for i in range(d) if cur.counters[i] != cert.tgt.counters[i]) \
            if cur.state == cert.tgt.state else -1
        return VerifyResult(False, len(rho.alphas) * 2 - 2, coord, f"ends at {cur}, expected {cert.tgt}")
    return VerifyResult(True)


def _cycle_failure(v, u, beta, e, region) -> Optional[int]:
    """Coordinate that leaves the region during beta^e from u, or None."""
    if isinstance(region, NonNegative):
        sys = build_cycle_system(v, u, beta)
        if sys.satisfied_by((e,)):
            return None
        if not any(sys.A[0]):  # the canonical infeasible system: the first pass fails
            pre = prefix_displacements(v, beta)
            return next(i for i in range(v.dim) if any(u[i] + p[i] < 0 for p in pre))
        for i in range(v.dim):
            if sys.A[i + 1][0] * e < sys.c[i + 1]:
                return i
        return -1
    delta = displacement(v, beta)
    for p in prefix_displacements(v, beta):
        base = tuple(x + y - z for x, y, z in zip(u, p, delta))
        m = region.first_gap(base, delta, 1, e)
        if m is not None:
            pt = vadd(base, vscale(m, delta))
            return next((i for i in range(v.dim) if not region.contains(
                tuple(x if j == i else max(0, x) for j, x in enumerate(pt)))), -1)
    return None


# ------------------------------------------------------------ reachability

def bounded_search_cap(v: Vass, src: Configuration, tgt: Configuration) -> int:
    """Counter cap for the explicit strategy: endpoints plus (|Q|(||T||+1))^2."""
    return max(vnorm(src.counters), vnorm(tgt.counters)) + (len(v.states) * (v.norm + 1)) ** 2


def bounded_search(v: Vass, src: Configuration, tgt: Configuration, cap: Optional[int] = None,
                   max_cells: int = 8_000_000, use_numba=None) -> Decision:
    """Explicit BFS inside [0, cap]^2.

    A search that never touched the cap is exhaustive, so its negative answer
    is exact.  Without an explicit cap the pinned one is tried first and then
    enlarged (x4, x16) while the box fits in ``max_cells``.
    """
    if cap is not None:
        caps = [cap]
    else:
        pinned = bounded_search_cap(v, src, tgt)
        caps = [pinned] + [c for c in (4 * pinned, 16 * pinned) if len(v.states) * (c + 1) ** 2 <= max_cells]
    if len(v.states) * (caps[0] + 1) ** 2 > max_cells:
        raise ResourceCap(f"box of side {caps[0] + 1} is too large for explicit search")
    if max(src.counters) > caps[-1] or max(tgt.counters) > caps[-1]:
        raise ResourceCap("endpoint above the search cap")
    if src == tgt:
        return Decision(True, Certificate(LinearPathScheme.path(()), (), src, tgt), "bounded")
    index = {q: n for n, q in enumerate(v.states)}
    T = v.transitions
    srcs = [index[t.src] for t in T]
    dx = [t.update[0] for t in T]
    dy = [t.update[1] for t in T]
    dsts = [index[t.dst] for t in T]
    start = (index[src.state], *src.counters)
    goal = (index[tgt.state], *tgt.counters)
    for c in caps:
        if max(src.counters) > c or max(tgt.counters) > c:
            continue
        found, truncated, parent = _kernels.box_bfs(srcs, dx, dy, dsts, len(v.states), c, start, goal,
                                                    use_numba)
        if found:
            path = _kernels.trace_path(parent, srcs, dx, dy, c, c, start, goal)
            return Decision(True, Certificate(LinearPathScheme.path(path), (), src, tgt), "bounded")
        if not truncated:
            return Decision(False, None, "bounded")
    raise ResourceCap("explicit search hit its counter cap")


def reach2(v: Vass, src: Configuration, tgt: Configuration, strategy=Strategy.AUTO,
           cap: Optional[int] = None, params: Optional[FlattenParams] = None,
           node_budget: int = 200_000) -> Decision:
    """Decide src ->* tgt over N^2.  Raises ResourceCap on an explicit give-up."""
    strategy = Strategy(strategy)
    if v.dim != 2:
        raise DimensionMismatch("reach2 handles dimension 2")
    for c in (src, tgt):
        if len(c.counters) != 2:
            raise DimensionMismatch(f"{c} does not have two counters")
        if min(c.counters) < 0:
            raise PreconditionViolated(f"{c} has a negative counter")
        if c.state not in v.states:
            raise PreconditionViolated(f"unknown state {c.state!r}")
    if src == tgt:
        return Decision(True, Certificate(LinearPathScheme.path(()), (), src, tgt), strategy.value)
    if strategy is Strategy.BOUNDED:
        return bounded_search(v, src, tgt, cap)
    if strategy is Strategy.AUTO:
        try:
            return bounded_search(v, src, tgt, cap)
        except ResourceCap:
            pass
    try:
        rho, exps = flatten_reach(v, src, tgt, params, node_budget)
    except Unreachable:
        return Decision(False, None, "flatten")
    except ResourceCap:
        if not coverable(v, src, tgt).coverable:
            return Decision(False, None, "flatten")
        raise
    return Decision(True, Certificate(rho, exps, src, tgt), "flatten")


# ------------------------------------------------------------ coverability

@dataclass(frozen=True)
class CoverResult:
    coverable: bool
    path: Optional[tuple] = None
    reached: Optional[Configuration] = None

    def __bool__(self):
        return self.coverable


def coverable(v: Vass, src: Configuration, tgt: Configuration, budget: int = 1_000_000) -> CoverResult:
    """Backward fixpoint over minimal elements; the witness is replayed forward."""
    d = v.dim
    if len(src.counters) != d or len(tgt.counters) != d:
        raise DimensionMismatch("configuration arity differs from the system")
    goal = (tgt.state, tuple(tgt.counters))
    succ = {goal: None}  # element -> (transition, element it steps into)
    basis = {q: [] for q in v.states}
    basis[tgt.state].append(goal[1])
    work = [goal]
    steps = 0

    def covers(q, m):
        return any(all(a >= b for a, b in zip(m, x)) for x in basis[q])

    while work:
        if covers(src.state, src.counters):
            break
        q, m = work.pop(0)
        if m not in basis[q]:
            continue  # superseded by a smaller element
        for i in v.in_edges(q):
            steps += 1
            if steps > budget:
                raise ResourceCap("coverability budget exhausted")
            p = v.src(i)
            pre = tuple(max(a - z, 0) for a, z in zip(m, v.update(i)))
            if covers(p, pre):
                continue
            basis[p] = [x for x in basis[p] if not all(a >= b for a, b in zip(x, pre))]
            basis[p].append(pre)
            succ.setdefault((p, pre), (i, (q, m)))
            work.append((p, pre))
    hit = next((x for x in basis[src.state] if all(a >= b for a, b in zip(src.counters, x))), None)
    if hit is None:
        return CoverResult(False)
    path = []
    node = (src.state, hit)
    while succ[node] is not None:
        i, node = succ[node]
        path.append(i)
    end = execute(v, src, path)
    assert end.state == tgt.state and all(a >= b for a, b in zip(end.counters, tgt.counters))
    return CoverResult(True, tuple(path), end)


# ------------------------------------------------------------ boundedness

def pump_witness(v: Vass, src: Configuration, budget: int = 1_000_000) -> Optional[LinearPathScheme]:
    """alpha beta* where beta strictly increases some counter and decreases none.

    None when the reachable set is finite.  Depth-first Karp-Miller
    exploration that stops at the first strictly dominating repeat.
    """
    stack = [((src.state, tuple(src.counters)), (), ())]
    steps = 0
    while stack:
        (q, m), nodes, trans = stack.pop()
        nodes = nodes + ((q, m),)
        for i in v.out_edges(q):
            steps += 1
            if steps > budget:
                raise ResourceCap("Karp-Miller budget exhausted")
            nm = tuple(a + z for a, z in zip(m, v.update(i)))
            if min(nm) < 0:
                continue
            r = v.dst(i)
            path = trans + (i,)
            for n, (p, x) in enumerate(nodes):
                if p == r and x != nm and all(a <= b for a, b in zip(x, nm)):
                    return LinearPathScheme((path[:n], ()), (path[n:],))
            if (r, nm) in nodes:
                continue
            stack.append(((r, nm), nodes, path))
    return None


def bounded(v: Vass, src: Configuration, budget: int = 1_000_000) -> bool:
    """True iff finitely many configurations are reachable from src."""
    return pump_witness(v, src, budget) is None
