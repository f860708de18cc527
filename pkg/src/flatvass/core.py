"""Data model and operational semantics for d-dimensional VASS.

Vectors are plain tuples of Python ints so counters never overflow.
Transitions are addressed by their index in ``Vass.transitions``; every
higher-level choice breaks ties by lowest index.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

Vector = tuple  # tuple[int, ...]
Path = tuple  # tuple[int, ...] of transition indices


class VassError(Exception):
    """Base class for structured errors raised by this package."""


class MalformedPath(VassError):
    def __init__(self, step: int, reason: str):
        super().__init__(f"malformed path at step {step}: {reason}")
        self.step = step
        self.reason = reason


class Blocked(VassError):
    def __init__(self, step: int, config: "Configuration"):
        super().__init__(f"blocked at step {step}: {config}")
        self.step = step
        self.config = config


class ArityMismatch(VassError):
    pass


class DimensionMismatch(VassError):
    pass


class PreconditionViolated(VassError):
    pass


class ResourceCap(VassError):
    """Raised when a configured budget is exhausted; never a verdict."""


def vadd(a: Sequence[int], b: Sequence[int]) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Sequence[int], b: Sequence[int]) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def vscale(k: int, a: Sequence[int]) -> Vector:
    return tuple(k * x for x in a)


def vnorm(a: Iterable[int]) -> int:
    return max((abs(x) for x in a), default=0)


def zero(d: int) -> Vector:
    return (0,) * d


@dataclass(frozen=True)
class Transition:
    src: Hashable
    update: Vector
    dst: Hashable

    def __post_init__(self):
        object.__setattr__(self, "update", tuple(int(x) for x in self.update))


@dataclass(frozen=True)
class Vass:
    dim: int
    states: tuple
    transitions: tuple

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionMismatch("dimension must be positive")
        states = tuple(self.states)
        if len(set(states)) != len(states):
            raise ValueError("duplicate state")
        trans = tuple(t if isinstance(t, Transition) else Transition(*t) for t in self.transitions)
        known = set(states)
        for i, t in enumerate(trans):
            if t.src not in known or t.dst not in known:
                raise ValueError(f"transition {i} uses an undeclared state")
            if len(t.update) != self.dim:
                raise DimensionMismatch(f"transition {i} has arity {len(t.update)}, expected {self.dim}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "transitions", trans)
        out: dict = {q: [] for q in states}
        inc: dict = {q: [] for q in states}
        for i, t in enumerate(trans):
            out[t.src].append(i)
            inc[t.dst].append(i)
        object.__setattr__(self, "_out", {q: tuple(v) for q, v in out.items()})
        object.__setattr__(self, "_in", {q: tuple(v) for q, v in inc.items()})

    @property
    def norm(self) -> int:
        """Largest absolute update entry (0 without transitions)."""
        return max((vnorm(t.update) for t in self.transitions), default=0)

    def out_edges(self, q) -> tuple:
        return self._out[q]

    def in_edges(self, q) -> tuple:
        return self._in[q]

    def update(self, i: int) -> Vector:
        return self.transitions[i].update

    def src(self, i: int):
        return self.transitions[i].src

    def dst(self, i: int):
        return self.transitions[i].dst


@dataclass(frozen=True)
class Configuration:
    state: Hashable
    counters: Vector

    def __post_init__(self):
        object.__setattr__(self, "counters", tuple(int(x) for x in self.counters))

    def __str__(self):
        return f"{self.state}({','.join(map(str, self.counters))})"


# ---------------------------------------------------------------- regions
#
# Every region is kept in disjunctive normal form: a tuple of boxes, each
# box a tuple of per-coordinate (lo, hi) pairs where None means unbounded.
# This keeps membership total and lets ``verify`` reason about an entire
# cycle iteration range with interval arithmetic.

Box_ = tuple


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class Region:
    name = "region"

    def boxes(self, d: int) -> tuple:
        raise NotImplementedError

    def contains(self, vec: Sequence[int]) -> bool:
        for box in self.boxes(len(vec)):
            if all((lo is None or x >= lo) and (hi is None or x <= hi) for x, (lo, hi) in zip(vec, box)):
                return True
        return False

    def line_intervals(self, base: Sequence[int], slope: Sequence[int], lo: int, hi: int) -> list:
        """Sorted, merged integer intervals of m in [lo, hi] with base + m*slope inside."""
        out = []
        for box in self.boxes(len(base)):
            a, b = lo, hi
            for x, s, (blo, bhi) in zip(base, slope, box):
                if s == 0:
                    if (blo is not None and x < blo) or (bhi is not None and x > bhi):
                        a, b = 1, 0
                        break
                    continue
                if s > 0:
                    if blo is not None:
                        a = max(a, _ceil_div(blo - x, s))
                    if bhi is not None:
                        b = min(b, (bhi - x) // s)
                else:
                    if blo is not None:
                        b = min(b, (x - blo) // (-s))
                    if bhi is not None:
                        a = max(a, _ceil_div(x - bhi, -s))
                if a > b:
                    break
            if a <= b:
                out.append((a, b))
        out.sort()
        merged: list = []
        for a, b in out:
            if merged and a <= merged[-1][1] + 1:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        return merged

    def first_gap(self, base, slope, lo: int, hi: int):
        """Smallest m in [lo, hi] whose point leaves the region, or None."""
        m = lo
        for a, b in self.line_intervals(base, slope, lo, hi):
            if a > m:
                return m
            m = max(m, b + 1)
            if m > hi:
                return None
        return m if m <= hi else None

    def __and__(self, other: "Region") -> "Region":
        return Intersection(self, other)


@dataclass(frozen=True)
class AllIntegers(Region):
    name = "Z"

    def boxes(self, d):
        return (((None, None),) * d,)


@dataclass(frozen=True)
class NonNegative(Region):
    name = "N"

    def boxes(self, d):
        return (((0, None),) * d,)


@dataclass(frozen=True)
class Box(Region):
    """Product of intervals; ``None`` as upper end means unbounded."""
    intervals: tuple

    def boxes(self, d):
        if len(self.intervals) != d:
            raise DimensionMismatch("box arity differs from vector arity")
        return (tuple(self.intervals),)


@dataclass(frozen=True)
class LShape(Region):
    D: int

    def boxes(self, d):
        if d != 2:
            raise DimensionMismatch("LShape needs dimension 2")
        return (((0, self.D), (0, None)), ((0, None), (0, self.D)))


@dataclass(frozen=True)
class Outside(Region):
    D: int

    def boxes(self, d):
        if d != 2:
            raise DimensionMismatch("Outside needs dimension 2")
        return (((self.D, None), (self.D, None)),)


def _meet(a, b):
    lo = a[0] if b[0] is None else b[0] if a[0] is None else max(a[0], b[0])
    hi = a[1] if b[1] is None else b[1] if a[1] is None else min(a[1], b[1])
    return (lo, hi)


@dataclass(frozen=True)
class Intersection(Region):
    left: Region
    right: Region

    def boxes(self, d):
        out = []
        for x in self.left.boxes(d):
            for y in self.right.boxes(d):
                box = tuple(_meet(p, q) for p, q in zip(x, y))
                if all(lo is None or hi is None or lo <= hi for lo, hi in box):
                    out.append(box)
        return tuple(out)


N2 = NonNegative()
Z_ALL = AllIntegers()


# ---------------------------------------------------------------- paths

def check_path(v: Vass, pi: Sequence[int], start=None) -> None:
    """Raise MalformedPath unless ``pi`` chains (and starts at ``start`` if given)."""
    n = len(v.transitions)
    cur = start
    for k, i in enumerate(pi):
        if not (0 <= i < n):
            raise MalformedPath(k, f"transition index {i} out of range")
        t = v.transitions[i]
        if cur is not None and t.src != cur:
            raise MalformedPath(k, f"expected source {cur!r}, got {t.src!r}")
        cur = t.dst


def execute(v: Vass, c: Configuration, pi: Sequence[int], region: Region = N2) -> Configuration:
    """Run ``pi`` from ``c``; every configuration after a step must lie in ``region``."""
    check_path(v, pi, c.state)
    x = list(c.counters)
    if len(x) != v.dim:
        raise DimensionMismatch("configuration arity differs from the system")
    state = c.state
    for k, i in enumerate(pi):
        t = v.transitions[i]
        for j, z in enumerate(t.update):
            x[j] += z
        state = t.dst
        if not region.contains(x):
            raise Blocked(k + 1, Configuration(state, tuple(x)))
    return Configuration(state, tuple(x))


def displacement(v: Vass, pi: Sequence[int]) -> Vector:
    check_path(v, pi)
    acc = [0] * v.dim
    for i in pi:
        for j, z in enumerate(v.transitions[i].update):
            acc[j] += z
    return tuple(acc)


def parikh(pi: Iterable[int]) -> Counter:
    return Counter(pi)


def prefix_displacements(v: Vass, pi: Sequence[int]) -> list:
    """delta(pi[1, j]) for j = 1..|pi|."""
    acc = [0] * v.dim
    out = []
    for i in pi:
        for j, z in enumerate(v.transitions[i].update):
            acc[j] += z
        out.append(tuple(acc))
    return out


# ---------------------------------------------------------------- schemes

@dataclass(frozen=True)
class LinearPathScheme:
    """alpha_0 beta_1* alpha_1 ... beta_k* alpha_k, stored as paths of indices."""
    alphas: tuple
    cycles: tuple = ()

    def __post_init__(self):
        alphas = tuple(tuple(a) for a in self.alphas)
        cycles = tuple(tuple(b) for b in self.cycles)
        if len(alphas) != len(cycles) + 1:
            raise ArityMismatch("a scheme with k cycles needs k+1 connectors")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "cycles", cycles)

    @classmethod
    def path(cls, pi: Sequence[int]) -> "LinearPathScheme":
        return cls((tuple(pi),), ())

    @property
    def k(self) -> int:
        return len(self.cycles)

    def word(self) -> Path:
        out = list(self.alphas[0])
        for b, a in zip(self.cycles, self.alphas[1:]):
            out += b
            out += a
        return tuple(out)

    def __len__(self):
        return sum(map(len, self.alphas)) + sum(map(len, self.cycles))

    def connector(self) -> Path:
        return tuple(i for a in self.alphas for i in a)

    def __str__(self):
        parts = [" ".join(f"t{i}" for i in self.alphas[0])]
        for b, a in zip(self.cycles, self.alphas[1:]):
            parts.append("(" + " ".join(f"t{i}" for i in b) + ")*")
            parts.append(" ".join(f"t{i}" for i in a))
        return " ".join(p for p in parts if p) or "eps"


@dataclass(frozen=True)
class LpsCheck:
    ok: bool
    k: int = 0
    length: int = 0
    reason: str = ""
    index: int = -1

    def __bool__(self):
        return self.ok


def validate_lps(v: Vass, rho: LinearPathScheme) -> LpsCheck:
    for j, b in enumerate(rho.cycles):
        if not b:
            return LpsCheck(False, reason="EmptyCycle", index=j)
    segs = []
    for i, a in enumerate(rho.alphas):
        segs.append(("alpha", i, a))
        if i < rho.k:
            segs.append(("cycle", i, rho.cycles[i]))
    cur = None
    for n, (kind, i, seg) in enumerate(segs):
        try:
            check_path(v, seg, cur)
        except MalformedPath:
            return LpsCheck(False, reason="NotAPath", index=n)
        if kind == "cycle" and v.src(seg[0]) != v.dst(seg[-1]):
            return LpsCheck(False, reason="NotACycle", index=i)
        if seg:
            cur = v.dst(seg[-1])
    return LpsCheck(True, k=rho.k, length=len(rho))


def instantiate_lps(rho: LinearPathScheme, exps: Sequence[int]) -> Path:
    if len(exps) != rho.k:
        raise ArityMismatch(f"scheme has {rho.k} cycles, got {len(exps)} exponents")
    out = list(rho.alphas[0])
    for b, e, a in zip(rho.cycles, exps, rho.alphas[1:]):
        if e < 0:
            raise ValueError("exponents are natural numbers")
        out += list(b) * e
        out += a
    return tuple(out)


def scheme_endpoints(v: Vass, rho: LinearPathScheme):
    """(first state, last state) of the scheme's word, or None for the empty word."""
    w = rho.word()
    if not w:
        return None
    return v.src(w[0]), v.dst(w[-1])


class Quadrant(enum.Enum):
    NN = (1, 1)
    MN = (-1, 1)
    NM = (1, -1)
    MM = (-1, -1)

    def contains(self, vec: Sequence[int]) -> bool:
        return all(s * x >= 0 for s, x in zip(self.value, vec))

    def reflect(self, vec: Sequence[int]) -> Vector:
        return tuple(s * x for s, x in zip(self.value, vec))

    def region(self) -> Region:
        return Box(tuple((0, None) if s > 0 else (None, 0) for s in self.value))


QUADRANTS = (Quadrant.NN, Quadrant.MN, Quadrant.NM, Quadrant.MM)


def is_zigzag_free(v: Vass, rho: LinearPathScheme):
    """(True, quadrant) when every cycle displacement fits one quadrant."""
    if v.dim != 2:
        raise DimensionMismatch("zigzag-freeness is defined for dimension 2")
    deltas = [displacement(v, b) for b in rho.cycles]
    for z in QUADRANTS:
        if all(z.contains(d) for d in deltas):
            return True, z
    return False, None


def execute_scheme(v: Vass, c: Configuration, rho: LinearPathScheme, exps: Sequence[int],
                   region: Region = N2) -> Configuration:
    """Run instantiate(rho, exps) from c without unrolling cycle iterations.

    Each cycle beta^e is checked with interval arithmetic per step of beta:
    the position after step j of iteration m is affine in m.  Raises Blocked
    whose ``step`` is the 1-based offset in the full instantiated word.
    """
    if len(exps) != rho.k:
        raise ArityMismatch(f"scheme has {rho.k} cycles, got {len(exps)} exponents")
    cur = c
    done = 0
    for n, a in enumerate(rho.alphas):
        if n > 0:
            beta, e = rho.cycles[n - 1], exps[n - 1]
            if e < 0:
                raise ValueError("exponents are natural numbers")
            if e > 0:
                check_path(v, beta, cur.state)
                if v.dst(beta[-1]) != v.src(beta[0]):
                    raise MalformedPath(done, "starred segment is not a cycle")
                delta = displacement(v, beta)
                pre = prefix_displacements(v, beta)
                for j, p in enumerate(pre):
                    base = tuple(x + y - z for x, y, z in zip(cur.counters, p, delta))
                    m = region.first_gap(base, delta, 1, e)
                    if m is not None:
                        at = vadd(base, vscale(m, delta))
                        raise Blocked(done + (m - 1) * len(beta) + j + 1,
                                      Configuration(v.dst(beta[j]), at))
                cur = Configuration(cur.state, vadd(cur.counters, vscale(e, delta)))
                done += e * len(beta)
        try:
            cur = execute(v, cur, a, region)
        except Blocked as exc:
            raise Blocked(done + exc.step, exc.config) from None
        except MalformedPath as exc:
            raise MalformedPath(done + exc.step, exc.reason) from None
        done += len(a)
    return cur
