"""Linear Diophantine systems over the naturals.

Feasibility is decided exactly by integer variable elimination (equality
substitution with symmetric-residue reduction, then real/dark shadows with
splinters).  Minimal solutions come from Contejean-Devie completion.  The
builders translate cycles and linear path schemes into inequality systems
whose solutions are exactly the feasible exponent vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional, Sequence

from .core import (ArityMismatch, LinearPathScheme, MalformedPath, Vass, VassError,
                   displacement, prefix_displacements, validate_lps, vnorm)

INEQ = "ineq"
EQ = "eq"


class BoundOverflow(VassError):
    """The work budget ran out; the caller should give up, not conclude."""


class InvalidScheme(VassError):
    pass


class NotACycle(VassError):
    pass


@dataclass(frozen=True)
class DiophSystem:
    """A x >= c (kind ``ineq``) or A x = c (kind ``eq``) over x in N^k."""
    kind: str
    A: tuple
    c: tuple
    k: int

    def __post_init__(self):
        A = tuple(tuple(int(a) for a in row) for row in self.A)
        c = tuple(int(x) for x in self.c)
        if self.kind not in (INEQ, EQ):
            raise ValueError(f"unknown system kind {self.kind!r}")
        if len(A) != len(c) or any(len(row) != self.k for row in A):
            raise ArityMismatch("inconsistent system dimensions")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "c", c)

    @property
    def r(self) -> int:
        return len(self.A)

    @property
    def norm_A(self) -> int:
        return self.k * max((abs(a) for row in self.A for a in row), default=0)

    @property
    def norm_c(self) -> int:
        return vnorm(self.c)

    def satisfied_by(self, x: Sequence[int]) -> bool:
        if len(x) != self.k or any(xi < 0 for xi in x):
            return False
        for row, ci in zip(self.A, self.c):
            s = sum(a * xi for a, xi in zip(row, x))
            if (s != ci) if self.kind == EQ else (s < ci):
                return False
        return True


def infeasible_system(k: int) -> DiophSystem:
    """The canonical unsatisfiable row 0 x >= 1."""
    return DiophSystem(INEQ, ((0,) * k,), (1,), k)


def ineq_bound(sys: DiophSystem) -> int:
    """Pinned solution-size bound for inequality systems."""
    return ((sys.k + 1) * (sys.norm_A + sys.norm_c + 1)) ** (2 * (sys.k + sys.r))


def inhomogeneous_bound(sys: DiophSystem) -> int:
    return (sys.norm_A + sys.norm_c + 1) ** (sys.r + 1)


def pottier_bound(sys: DiophSystem) -> int:
    return (sys.norm_A + 1) ** sys.r


# ------------------------------------------------------------ elimination

class _Work:
    def __init__(self, budget: int, first_free_var: int):
        self.left = budget
        self.next_var = first_free_var

    def tick(self, n: int = 1):
        self.left -= n
        if self.left < 0:
            raise BoundOverflow("integer elimination exceeded its work budget")

    def fresh(self) -> int:
        v = self.next_var
        self.next_var += 1
        return v


def _substitute(cons, j, sub, subc):
    out = []
    for co, c in cons:
        a = co.get(j, 0)
        if a:
            co = dict(co)
            del co[j]
            for i, b in sub.items():
                nv = co.get(i, 0) + a * b
                if nv:
                    co[i] = nv
                else:
                    co.pop(i, None)
            c = c + a * subc
        out.append((co, c))
    return out


def _symmetric_mod(a: int, m: int) -> int:
    return a - m * ((2 * a + m) // (2 * m))


def _omega(eqs, ineqs, work: _Work) -> bool:
    work.tick()
    # equalities: normalize, then eliminate one variable and recurse
    neqs = []
    for co, c in eqs:
        co = {v: a for v, a in co.items() if a}
        if not co:
            if c != 0:
                return False
            continue
        g = 0
        for a in co.values():
            g = gcd(g, a)
        if c % g:
            return False
        if g > 1:
            co = {v: a // g for v, a in co.items()}
            c //= g
        neqs.append((co, c))
    if neqs:
        neqs.sort(key=lambda e: (min(abs(a) for a in e[0].values()), len(e[0])))
        co, c = neqs[0]
        unit = next((v for v, a in sorted(co.items()) if abs(a) == 1), None)
        if unit is not None:
            s = co[unit]
            sub = {i: -s * a for i, a in co.items() if i != unit}
            subc = -s * c
            rest = neqs[1:]
            return _omega(_substitute(rest, unit, sub, subc), _substitute(ineqs, unit, sub, subc), work)
        j = min(co, key=lambda v: (abs(co[v]), v))
        s = 1 if co[j] > 0 else -1
        m = abs(co[j]) + 1
        sigma = work.fresh()
        sub = {i: s * _symmetric_mod(a, m) for i, a in co.items() if i != j}
        sub[sigma] = -s * m
        subc = s * _symmetric_mod(c, m)
        return _omega(_substitute(neqs, j, sub, subc), _substitute(ineqs, j, sub, subc), work)

    # inequalities only
    tight: dict = {}
    for co, c in ineqs:
        co = {v: a for v, a in co.items() if a}
        if not co:
            if c < 0:
                return False
            continue
        g = 0
        for a in co.values():
            g = gcd(g, a)
        if g > 1:
            co = {v: a // g for v, a in co.items()}
            c = c // g
        key = tuple(sorted(co.items()))
        if key not in tight or c < tight[key]:
            tight[key] = c
    if not tight:
        return True
    for key, c in tight.items():
        neg = tuple((v, -a) for v, a in key)
        if neg in tight:
            c2 = tight[neg]
            if c + c2 < 0:
                return False
            if c + c2 == 0:
                rest = [(dict(k2), c3) for k2, c3 in tight.items() if k2 != key and k2 != neg]
                return _omega([(dict(key), c)], rest, work)
    cons = [(dict(k2), c) for k2, c in tight.items()]
    work.tick(len(cons))

    variables = sorted({v for co, _ in cons for v in co})
    best = None
    for x in variables:
        low = [(co[x], co, c) for co, c in cons if co.get(x, 0) > 0]
        up = [(-co[x], co, c) for co, c in cons if co.get(x, 0) < 0]
        if not low or not up:
            keep = [(co, c) for co, c in cons if x not in co]
            return _omega([], keep, work)
        exact = all(a == 1 for a, _, _ in low) or all(b == 1 for b, _, _ in up)
        score = (0 if exact else 1, len(low) * len(up))
        if best is None or score < best[0]:
            best = (score, x, low, up, exact)
    _, x, low, up, exact = best
    keep = [(co, c) for co, c in cons if x not in co]

    def shadow(dark: bool):
        out = list(keep)
        for a, lco, lc in low:
            for b, uco, uc in up:
                co = {}
                for v, val in lco.items():
                    if v != x:
                        co[v] = co.get(v, 0) + b * val
                for v, val in uco.items():
                    if v != x:
                        co[v] = co.get(v, 0) + a * val
                c = b * lc + a * uc
                if dark:
                    c -= (a - 1) * (b - 1)
                out.append((co, c))
        return out

    if exact:
        return _omega([], shadow(False), work)
    if not _omega([], shadow(False), work):
        return False
    if _omega([], shadow(True), work):
        return True
    bmax = max(b for b, _, _ in up)
    for a, lco, lc in low:
        for i in range((a * bmax - a - bmax) // bmax + 1):
            if _omega([(lco, lc - i)], cons, work):
                return True
    return False


def _constraints(sys: DiophSystem):
    eqs, ineqs = [], []
    for row, ci in zip(sys.A, sys.c):
        co = {j: a for j, a in enumerate(row) if a}
        (eqs if sys.kind == EQ else ineqs).append((co, -ci))
    for j in range(sys.k):
        ineqs.append(({j: 1}, 0))
    return eqs, ineqs


def is_feasible(sys: DiophSystem, budget: int = 500_000) -> bool:
    eqs, ineqs = _constraints(sys)
    return _omega(eqs, ineqs, _Work(budget, sys.k))


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    solution: Optional[tuple] = None
    within_bound: bool = True

    def __bool__(self):
        return self.feasible


def solve_feasible(sys: DiophSystem, budget: int = 500_000) -> Feasibility:
    """Lexicographically least natural solution, or infeasible.

    Coordinates are fixed left to right; each is the least value keeping the
    remaining system feasible, found by doubling then bisection with exact
    feasibility queries, so the search never backtracks.
    """
    work = _Work(budget, sys.k)
    eqs, ineqs = _constraints(sys)
    if not _omega(eqs, ineqs, work):
        return Feasibility(False)
    fixed = []
    for j in range(sys.k):
        def ok(hi):
            work.next_var = sys.k
            return _omega(eqs + fixed, ineqs + [({j: -1}, hi)], work)
        lo, hi = 0, 0
        while not ok(hi):
            lo = hi + 1
            hi = 2 * hi + 1
        while lo < hi:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid + 1
        fixed.append(({j: 1}, -lo))
    x = tuple(-c for _, c in fixed)
    assert sys.satisfied_by(x), "elimination produced a non-solution"
    return Feasibility(True, x, vnorm(x) <= ineq_bound(sys))


# ------------------------------------------------------------ minimal solutions

def _completion(A: Sequence[Sequence[int]], k: int, cap_last: Optional[int] = None,
                budget: int = 2_000_000) -> list:
    """Contejean-Devie: all componentwise-minimal nonzero x in N^k with A x = 0.

    With ``cap_last`` the last coordinate is never increased past that value.
    """
    rows = [tuple(r) for r in A]
    cols = [tuple(r[j] for r in rows) for j in range(k)]
    found: list = []
    frontier = {tuple(1 if i == j else 0 for i in range(k)) for j in range(k)}
    if cap_last is not None and cap_last < 1:
        frontier = {x for x in frontier if x[-1] == 0}
    steps = 0
    while frontier:
        level = sorted(frontier)
        sols = []
        pending = []
        for x in level:
            ax = tuple(sum(r[j] * x[j] for j in range(k)) for r in rows)
            if not any(ax):
                sols.append(x)
            else:
                pending.append((x, ax))
        found.extend(sols)
        nxt = set()
        for x, ax in pending:
            for j in range(k):
                if cap_last is not None and j == k - 1 and x[j] >= cap_last:
                    continue
                if sum(a * b for a, b in zip(ax, cols[j])) < 0:
                    y = x[:j] + (x[j] + 1,) + x[j + 1:]
                    if any(all(s <= t for s, t in zip(sol, y)) for sol in found):
                        continue
                    nxt.add(y)
            steps += 1
            if steps > budget:
                raise BoundOverflow("minimal-solution completion exceeded its budget")
        frontier = nxt
    return sorted(set(found))


def homogeneous_generators(sys: DiophSystem) -> list:
    """Minimal nonzero natural solutions of A x = 0."""
    if sys.kind != EQ or any(sys.c):
        raise ValueError("homogeneous_generators needs an equality system with c = 0")
    if sys.k == 0:
        return []
    return _completion(sys.A, sys.k)


def minimal_solutions(sys: DiophSystem) -> tuple:
    """(minimal solutions of A x = c, minimal nonzero solutions of A x = 0).

    Every solution of A x = c is a minimal one plus a natural combination of
    the homogeneous generators.
    """
    if sys.kind != EQ:
        raise ValueError("minimal_solutions needs an equality system")
    aug = [tuple(row) + (-ci,) for row, ci in zip(sys.A, sys.c)]
    basis = _completion(aug, sys.k + 1, cap_last=1)
    inhom = sorted(x[:-1] for x in basis if x[-1] == 1)
    hom = sorted(x[:-1] for x in basis if x[-1] == 0)
    if sys.k == 0:
        inhom = [()] if not any(sys.c) else []
    elif not any(sys.c) and () not in inhom:
        inhom = [(0,) * sys.k]
    return inhom, hom


# ------------------------------------------------------------ builders

def _cap_norm(bound: int) -> int:
    # a row 1*x >= 1 always exists, so norms are at least 1 even for zero updates
    return max(1, bound)


def build_cycle_system(v: Vass, u: Sequence[int], beta: Sequence[int]) -> DiophSystem:
    """One-variable system whose solutions are the e >= 1 with beta^e executable from u."""
    if not beta:
        raise NotACycle("empty cycle")
    try:
        from .core import check_path
        check_path(v, beta)
    except MalformedPath as exc:
        raise NotACycle(str(exc)) from exc
    if v.src(beta[0]) != v.dst(beta[-1]):
        raise NotACycle("cycle does not return to its start")
    pre = prefix_displacements(v, beta)
    for p in pre:
        if any(ui + pi < 0 for ui, pi in zip(u, p)):
            return infeasible_system(1)
    delta = pre[-1]
    A = [(1,)]
    c = [1]
    for i in range(v.dim):
        A.append((delta[i],))
        c.append(max(delta[i] - p[i] - u[i] for p in pre))
    sys = DiophSystem(INEQ, tuple(A), tuple(c), 1)
    T = v.norm
    assert sys.norm_A <= _cap_norm(len(beta) * T)
    assert sys.norm_c <= _cap_norm(2 * len(beta) * T + vnorm(u))
    return sys


def drop_cycles(rho: LinearPathScheme, keep: Sequence[bool]) -> LinearPathScheme:
    """The scheme with every cycle i where keep[i] is false deleted."""
    alphas = [list(rho.alphas[0])]
    cycles = []
    for b, kp, a in zip(rho.cycles, keep, rho.alphas[1:]):
        if kp:
            cycles.append(b)
            alphas.append(list(a))
        else:
            alphas[-1] += a
    return LinearPathScheme(tuple(map(tuple, alphas)), tuple(cycles))


def build_lps_system(v: Vass, u: Sequence[int], rho: LinearPathScheme,
                     chi: Optional[Sequence[int]] = None) -> DiophSystem:
    """Exponent system for running ``rho`` from u over N^d.

    Cycles with chi(i) = 0 are deleted first, so the variables of the result
    are the cycles with chi(i) = 1, in order.  A solution e (all entries >= 1)
    is exactly an exponent vector for which the instantiation is executable.
    """
    if not validate_lps(v, rho):
        raise InvalidScheme(validate_lps(v, rho).reason)
    if chi is None:
        chi = (1,) * rho.k
    if len(chi) != rho.k:
        raise ArityMismatch("sign pattern arity differs from the cycle count")
    rho = drop_cycles(rho, [bool(s) for s in chi])
    k, d = rho.k, v.dim
    if any(x < 0 for x in u):
        return infeasible_system(k)
    rows: dict = {}

    def add(coef, rhs):
        if coef in rows:
            rows[coef] = max(rows[coef], rhs)
        else:
            rows[coef] = rhs

    offset = tuple(u)
    cyc_delta = [displacement(v, b) for b in rho.cycles]
    for j in range(k + 1):
        # connector alpha_j runs after the last traversal of cycles 1..j
        for p in prefix_displacements(v, rho.alphas[j]):
            for c in range(d):
                coef = tuple(cyc_delta[i][c] if i < j else 0 for i in range(k))
                add((c, coef), -(offset[c] + p[c]))
        offset = tuple(o + x for o, x in zip(offset, displacement(v, rho.alphas[j])))
        if j == k:
            break
        beta = rho.cycles[j]
        delta = cyc_delta[j]
        for p in prefix_displacements(v, beta):
            for c in range(d):
                first = tuple(cyc_delta[i][c] if i < j else 0 for i in range(k))
                add((c, first), -(offset[c] + p[c]))
                last = tuple(cyc_delta[i][c] if i <= j else 0 for i in range(k))
                add((c, last), -(offset[c] - delta[c] + p[c]))
    A = [tuple(1 if i == j else 0 for i in range(k)) for j in range(k)]
    c = [1] * k
    for (_, coef), rhs in sorted(rows.items()):
        if not any(coef):
            if rhs > 0:
                return infeasible_system(k)
            continue
        A.append(coef)
        c.append(rhs)
    # identical coefficient rows from different coordinates fold together too
    folded: dict = {}
    for row, rhs in zip(A, c):
        folded[row] = max(folded.get(row, rhs), rhs)
    sys = DiophSystem(INEQ, tuple(folded), tuple(folded.values()), k)
    T = v.norm
    assert sys.norm_A <= _cap_norm(k * len(rho) * T)
    assert sys.norm_c <= _cap_norm(vnorm(u) + 2 * len(rho) * T)
    return sys


def build_target_equations(v: Vass, u: Sequence[int], w: Sequence[int],
                           rho: LinearPathScheme) -> DiophSystem:
    """e solves iff u + delta(instantiate(rho, e)) = w."""
    if not validate_lps(v, rho):
        raise InvalidScheme(validate_lps(v, rho).reason)
    base = displacement(v, rho.connector())
    deltas = [displacement(v, b) for b in rho.cycles]
    A = tuple(tuple(dl[c] for dl in deltas) for c in range(v.dim))
    d = tuple(w[c] - u[c] - base[c] for c in range(v.dim))
    return DiophSystem(EQ, A, d, rho.k)


def conjoin(ineq: DiophSystem, eq: DiophSystem) -> DiophSystem:
    if ineq.k != eq.k:
        raise ArityMismatch(f"arity {ineq.k} vs {eq.k}")

    def as_rows(s):
        if s.kind == INEQ:
            return list(s.A), list(s.c)
        return list(s.A) + [tuple(-a for a in r) for r in s.A], list(s.c) + [-x for x in s.c]

    A1, c1 = as_rows(ineq)
    A2, c2 = as_rows(eq)
    return DiophSystem(INEQ, tuple(A1 + A2), tuple(c1 + c2), ineq.k)


# ------------------------------------------------------------ text format

def dump_system(sys: DiophSystem) -> str:
    rel = "=" if sys.kind == EQ else ">="
    lines = [f"rows {sys.k} {sys.r}"]
    for row, ci in zip(sys.A, sys.c):
        lines.append(" ".join([*map(str, row), rel, str(ci)]))
    return "\n".join(lines) + "\n"


def load_system(text: str) -> DiophSystem:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if len(head) != 3 or head[0] != "rows":
        raise ValueError("expected header 'rows k r'")
    k, r = int(head[1]), int(head[2])
    if len(lines) - 1 != r:
        raise ValueError(f"header announces {r} rows, found {len(lines) - 1}")
    A, c, kinds = [], [], set()
    for ln in lines[1:]:
        parts = ln.split()
        rel = ">=" if ">=" in parts else "="
        i = parts.index(rel)
        if i != k or len(parts) != k + 2:
            raise ValueError(f"row arity mismatch: {ln!r}")
        A.append(tuple(int(x) for x in parts[:i]))
        c.append(int(parts[-1]))
        kinds.add(rel)
    if len(kinds) > 1:
        raise ValueError("mixed row kinds")
    kind = EQ if kinds == {"="} else INEQ
    return DiophSystem(kind, tuple(A), tuple(c), k)
