"""Dense breadth-first search over capped regions of 2-VASS configurations.

The searched cells are the points of [0, cap]^2 with x <= D or y <= D
(the whole box when D = cap), stored under a flat index per state.  Two
interchangeable backends: a numba-compiled queue BFS and a pure numpy
level-synchronous BFS.  Set FLATVASS_DISABLE_NUMBA=1 to force numpy.  Both
return the same verdicts and shortest path lengths.
"""
from __future__ import annotations

import os

import numpy as np

DISABLED = os.environ.get("FLATVASS_DISABLE_NUMBA", "") not in ("", "0")

try:
    if DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag
    HAVE_NUMBA = False


def cells_per_state(D: int, cap: int) -> int:
    D = min(D, cap)
    return (D + 1) * (cap + 1) + (cap - D) * (D + 1)


def _encode(x, y, D, cap):
    """Flat index of (x, y); valid for both scalars and arrays."""
    return np.where(x <= D, x * (cap + 1) + y, (D + 1) * (cap + 1) + (x - D - 1) * (D + 1) + y)


def _decode(idx, D, cap):
    split = (D + 1) * (cap + 1)
    rest = idx - split
    x = np.where(idx < split, idx // (cap + 1), D + 1 + rest // (D + 1))
    y = np.where(idx < split, idx % (cap + 1), rest % (D + 1))
    return x, y


def _region_bfs_numpy(src, dx, dy, dst, nq, D, cap, lshape, s0, x0, y0, s1, x1, y1):
    M = cells_per_state(D, cap)
    parent = np.full(nq * M, -1, dtype=np.int64)
    seen = np.zeros(nq * M, dtype=np.bool_)
    start = s0 * M + int(_encode(x0, y0, D, cap))
    goal = s1 * M + int(_encode(x1, y1, D, cap))
    seen[start] = True
    frontier = np.array([start], dtype=np.int64)
    truncated = False
    while len(frontier) and not seen[goal]:
        fs, fi = np.divmod(frontier, M)
        fx, fy = _decode(fi, D, cap)
        found = []
        for t in range(len(src)):
            sel = fs == src[t]
            if not sel.any():
                continue
            nx, ny = fx[sel] + dx[t], fy[sel] + dy[t]
            ok = (nx >= 0) & (ny >= 0)
            if lshape:
                ok &= (nx <= D) | (ny <= D)
            over = ok & ((nx > cap) | (ny > cap))
            if over.any():
                truncated = True
            ok &= ~over
            cells = dst[t] * M + _encode(nx[ok], ny[ok], D, cap)
            cells = np.unique(cells[~seen[cells]])
            parent[cells] = t
            seen[cells] = True
            found.append(cells)
        frontier = np.concatenate(found) if found else np.zeros(0, dtype=np.int64)
    return bool(seen[goal]), truncated, parent


if HAVE_NUMBA:
    @njit(cache=True)
    def _enc1(x, y, D, cap):  # pragma: no cover - compiled
        if x <= D:
            return x * (cap + 1) + y
        return (D + 1) * (cap + 1) + (x - D - 1) * (D + 1) + y

    @njit(cache=True)
    def _region_bfs_numba(src, dx, dy, dst, nq, D, cap, lshape,
                          s0, x0, y0, s1, x1, y1):  # pragma: no cover - compiled
        M = (D + 1) * (cap + 1) + (cap - D) * (D + 1)
        parent = np.full(nq * M, -1, dtype=np.int64)
        seen = np.zeros(nq * M, dtype=np.bool_)
        qs = np.empty(nq * M, dtype=np.int64)
        qx = np.empty(nq * M, dtype=np.int64)
        qy = np.empty(nq * M, dtype=np.int64)
        head = 0
        tail = 1
        qs[0], qx[0], qy[0] = s0, x0, y0
        seen[s0 * M + _enc1(x0, y0, D, cap)] = True
        goal = s1 * M + _enc1(x1, y1, D, cap)
        truncated = False
        if seen[goal]:
            return True, truncated, parent
        while head < tail:
            s, x, y = qs[head], qx[head], qy[head]
            head += 1
            for t in range(src.shape[0]):
                if src[t] != s:
                    continue
                nx = x + dx[t]
                ny = y + dy[t]
                if nx < 0 or ny < 0:
                    continue
                if lshape and nx > D and ny > D:
                    continue
                if nx > cap or ny > cap:
                    truncated = True
                    continue
                d = dst[t]
                c = d * M + _enc1(nx, ny, D, cap)
                if not seen[c]:
                    seen[c] = True
                    parent[c] = t
                    if c == goal:
                        return True, truncated, parent
                    qs[tail], qx[tail], qy[tail] = d, nx, ny
                    tail += 1
        return False, truncated, parent


def region_bfs(src, dx, dy, dst, nq: int, D: int, cap: int, start: tuple, goal: tuple,
               lshape: bool = True, use_numba=None):
    """(found, truncated, parent) for BFS over the capped region.

    With ``lshape`` the region is {x <= D or y <= D}; otherwise it is N^2 and
    D should equal cap.  ``truncated`` records a move that stayed in the
    region but crossed the cap.  ``parent`` is indexed by state * cells +
    flat cell and holds the entering transition (-1 if none).
    """
    D = min(int(D), int(cap))
    args = (np.asarray(src, np.int64), np.asarray(dx, np.int64), np.asarray(dy, np.int64),
            np.asarray(dst, np.int64), int(nq), D, int(cap), bool(lshape),
            *map(int, start), *map(int, goal))
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA:
        found, truncated, parent = _region_bfs_numba(*args)
    else:
        found, truncated, parent = _region_bfs_numpy(*args)
    return bool(found), bool(truncated), parent


def box_bfs(src, dx, dy, dst, nq: int, cap: int, start: tuple, goal: tuple, use_numba=None):
    """``region_bfs`` over the full box [0, cap]^2."""
    return region_bfs(src, dx, dy, dst, nq, cap, cap, start, goal, False, use_numba)


def trace_path(parent, src, dx, dy, D: int, cap: int, start: tuple, goal: tuple) -> tuple:
    D = min(D, cap)
    M = cells_per_state(D, cap)
    path = []
    s, x, y = goal
    while (s, x, y) != tuple(start):
        t = int(parent[s * M + int(_encode(x, y, D, cap))])
        if t < 0:
            raise ValueError("goal cell was not reached")
        path.append(t)
        s, x, y = int(src[t]), x - int(dx[t]), y - int(dy[t])
    return tuple(reversed(path))
