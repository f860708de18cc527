"""Brute-force reference procedures.

These are deliberately naive: plain breadth-first search, plain Minkowski
sums, plain box enumeration.  Everything else in the package is checked
against them.
"""
from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Configuration, N2, Region, Vass, execute


@dataclass(frozen=True)
class SearchCaps:
    """Counter caps bound |x_i|; None leaves a coordinate unbounded."""
    counter_caps: Optional[tuple] = None
    node_budget: Optional[int] = 200_000
    depth_budget: Optional[int] = None

    def __post_init__(self):
        if self.counter_caps is None and self.node_budget is None and self.depth_budget is None:
            raise ValueError("at least one budget must be finite")

    @classmethod
    def uniform(cls, cap: int, d: int = 2, **kw) -> "SearchCaps":
        return cls(counter_caps=(cap,) * d, **kw)


class BfsOutcome(enum.Enum):
    FOUND = "Found"
    NOT_FOUND_WITHIN_CAPS = "NotFoundWithinCaps"
    EXHAUSTED_COMPLETE = "ExhaustedComplete"


@dataclass(frozen=True)
class BfsResult:
    outcome: BfsOutcome
    path: Optional[tuple] = None
    explored: int = 0

    @property
    def found(self) -> bool:
        return self.outcome is BfsOutcome.FOUND

    @property
    def decisive(self) -> bool:
        return self.outcome is not BfsOutcome.NOT_FOUND_WITHIN_CAPS


def bfs_reach(v: Vass, src: Configuration, tgt: Configuration,
              region: Region = N2, caps: SearchCaps = SearchCaps()) -> BfsResult:
    caps_vec = caps.counter_caps

    def within_caps(x):
        return caps_vec is None or all(c is None or abs(a) <= c for a, c in zip(x, caps_vec))

    start = (src.state, src.counters)
    goal = (tgt.state, tgt.counters)
    if start == goal:
        return BfsResult(BfsOutcome.FOUND, (), 1)
    parent = {start: None}
    depth = {start: 0}
    queue = deque([start])
    truncated = False
    trans = v.transitions
    while queue:
        node = queue.popleft()
        q, x = node
        dn = depth[node]
        for i in v.out_edges(q):
            t = trans[i]
            y = tuple(a + b for a, b in zip(x, t.update))
            if not region.contains(y):
                continue
            if not within_caps(y):
                truncated = True
                continue
            if caps.depth_budget is not None and dn + 1 > caps.depth_budget:
                truncated = True
                continue
            nxt = (t.dst, y)
            if nxt in parent:
                continue
            parent[nxt] = (node, i)
            depth[nxt] = dn + 1
            if nxt == goal:
                path = []
                cur = nxt
                while parent[cur] is not None:
                    cur, j = parent[cur]
                    path.append(j)
                path.reverse()
                path = tuple(path)
                execute(v, src, path, region)  # self-check
                return BfsResult(BfsOutcome.FOUND, path, len(parent))
            if caps.node_budget is not None and len(parent) > caps.node_budget:
                return BfsResult(BfsOutcome.NOT_FOUND_WITHIN_CAPS, None, len(parent))
            queue.append(nxt)
    outcome = BfsOutcome.NOT_FOUND_WITHIN_CAPS if truncated else BfsOutcome.EXHAUSTED_COMPLETE
    return BfsResult(outcome, None, len(parent))


def reachable_set(v: Vass, src: Configuration, region: Region = N2,
                  caps: SearchCaps = SearchCaps()) -> tuple:
    """(set of (state, counters), complete?) explored by plain BFS."""
    seen = {(src.state, src.counters)}
    queue = deque(seen)
    complete = True
    caps_vec = caps.counter_caps
    while queue:
        q, x = queue.popleft()
        for i in v.out_edges(q):
            t = v.transitions[i]
            y = tuple(a + b for a, b in zip(x, t.update))
            if not region.contains(y):
                continue
            if caps_vec is not None and any(c is not None and abs(a) > c for a, c in zip(y, caps_vec)):
                complete = False
                continue
            nxt = (t.dst, y)
            if nxt not in seen:
                seen.add(nxt)
                if caps.node_budget is not None and len(seen) > caps.node_budget:
                    return seen, False
                queue.append(nxt)
    return seen, complete


def enumerate_linset(base: Sequence[int], periods: Sequence[Sequence[int]],
                     coeff_cap: int, norm_cap: int) -> list:
    """{b + sum lambda_i p_i : lambda_i <= coeff_cap, max-norm <= norm_cap}, sorted."""
    pts = np.asarray([base], dtype=np.int64)
    steps = np.arange(coeff_cap + 1, dtype=np.int64)[:, None]
    for p in periods:
        shift = steps * np.asarray(p, dtype=np.int64)[None, :]
        pts = np.unique((pts[:, None, :] + shift[None, :, :]).reshape(-1, len(base)), axis=0)
    keep = np.abs(pts).max(axis=1) <= norm_cap if len(pts) else np.zeros(0, bool)
    return sorted(tuple(int(a) for a in row) for row in pts[keep])


def linset_window(base: Sequence[int], periods: Sequence[Sequence[int]], window: int) -> set:
    """Exact members of b + cone_N(P) with max-norm <= window, for 2-dim vectors.

    Fixpoint closure of {0} under adding periods inside a bounding box.  A
    reordering argument (partial sums of a representation of t can be kept
    within 4*||P|| of the segment [0, t]) makes the box large enough.
    """
    b = np.asarray(base, dtype=np.int64)
    pers = [np.asarray(p, dtype=np.int64) for p in periods if any(p)]
    B = max((int(np.abs(p).max()) for p in pers), default=0)
    r = 4 * B + 2
    lo = np.minimum(-window - b, 0) - r
    hi = np.maximum(window - b, 0) + r
    shape = tuple(int(h - l + 1) for l, h in zip(lo, hi))
    grid = np.zeros(shape, dtype=bool)
    grid[tuple(-lo)] = True
    while True:
        new = grid.copy()
        for p in pers:
            src = tuple(slice(max(0, -int(s)), n - max(0, int(s))) for s, n in zip(p, shape))
            dst = tuple(slice(max(0, int(s)), n - max(0, -int(s))) for s, n in zip(p, shape))
            new[dst] |= grid[src]
        if (new == grid).all():
            break
        grid = new
    out = set()
    for idx in zip(*np.nonzero(grid)):
        x = tuple(int(i + l + bb) for i, l, bb in zip(idx, lo, b))
        if max(abs(a) for a in x) <= window:
            out.add(x)
    return out


def enumerate_dioph_box(A: Sequence[Sequence[int]], c: Sequence[int], equality: bool,
                        k: int, bound: int) -> np.ndarray:
    """All x in [0, bound]^k with A x >= c (or = c), rows in lexicographic order."""
    if k == 0:
        ok = all((0 == ci) if equality else (0 >= ci) for ci in c)
        return np.zeros((1 if ok else 0, 0), dtype=np.int64)
    grids = np.array(list(itertools.product(range(bound + 1), repeat=k)), dtype=np.int64)
    if len(A) == 0:
        return grids
    Am = np.asarray(A, dtype=np.int64)
    vals = grids @ Am.T
    cv = np.asarray(c, dtype=np.int64)
    mask = (vals == cv).all(axis=1) if equality else (vals >= cv).all(axis=1)
    return grids[mask]


def minimal_elements(rows: np.ndarray) -> list:
    """Componentwise-minimal nonzero rows."""
    rows = [tuple(int(a) for a in r) for r in rows if any(r)]
    out = []
    for r in rows:
        if not any(s != r and all(a <= b for a, b in zip(s, r)) for s in rows):
            out.append(r)
    return sorted(set(out))
