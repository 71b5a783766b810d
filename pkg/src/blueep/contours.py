"""Marching-squares zero contours on a rectangular node grid."""

from __future__ import annotations

from collections import defaultdict

import numpy as np

__all__ = ["marching_squares", "contour_cells"]

# corners: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1); edge k joins corner k and k+1
_EDGE_CORNERS = ((0, 1), (1, 2), (2, 3), (3, 0))


def _edge_key(i: int, j: int, edge: int) -> tuple:
    # global id shared by the two cells that own an edge
    if edge == 0:
        return ("h", i, j)
    if edge == 1:
        return ("v", i + 1, j)
    if edge == 2:
        return ("h", i, j + 1)
    return ("v", i, j)


def _cell_segments(case: int, center_above: bool) -> list[tuple[int, int]]:
    if case == 5:
        return [(0, 1), (2, 3)] if center_above else [(3, 0), (1, 2)]
    if case == 10:
        return [(3, 0), (1, 2)] if center_above else [(0, 1), (2, 3)]
    edges = [e for e, (a, b) in enumerate(_EDGE_CORNERS) if ((case >> a) & 1) != ((case >> b) & 1)]
    return [(edges[0], edges[1])] if len(edges) == 2 else []


def _raw_segments(field: np.ndarray, level: float):
    f = np.asarray(field, dtype=float)
    above = f > level
    c = (
        above[:-1, :-1].astype(int)
        | above[1:, :-1].astype(int) << 1
        | above[1:, 1:].astype(int) << 2
        | above[:-1, 1:].astype(int) << 3
    )
    finite = (
        np.isfinite(f[:-1, :-1]) & np.isfinite(f[1:, :-1])
        & np.isfinite(f[1:, 1:]) & np.isfinite(f[:-1, 1:])
    )
    active = finite & (c != 0) & (c != 15)
    out = []
    for i, j in zip(*np.nonzero(active)):
        i, j = int(i), int(j)
        corners = (f[i, j], f[i + 1, j], f[i + 1, j + 1], f[i, j + 1])
        case = int(c[i, j])
        center_above = 0.25 * sum(corners) > level
        for e0, e1 in _cell_segments(case, center_above):
            out.append(((i, j), _edge_key(i, j, e0), _edge_key(i, j, e1)))
    return out


def _edge_point(key: tuple, f: np.ndarray, x: np.ndarray, y: np.ndarray, level: float):
    kind, i, j = key
    if kind == "h":
        (i0, j0), (i1, j1) = (i, j), (i + 1, j)
    else:
        (i0, j0), (i1, j1) = (i, j), (i, j + 1)
    f0, f1 = f[i0, j0], f[i1, j1]
    t = (level - f0) / (f1 - f0)
    return (x[i0] + t * (x[i1] - x[i0]), y[j0] + t * (y[j1] - y[j0]))


def contour_cells(field: np.ndarray, level: float = 0.0) -> np.ndarray:
    """Boolean mask (shape n1-1 x n2-1) of cells crossed by the level set."""
    f = np.asarray(field, dtype=float)
    mask = np.zeros((f.shape[0] - 1, f.shape[1] - 1), dtype=bool)
    for (i, j), _, _ in _raw_segments(f, level):
        mask[i, j] = True
    return mask


def marching_squares(
    field: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    level: float = 0.0,
) -> list[np.ndarray]:
    """Polylines of ``field == level`` with ``field[i, j]`` at ``(x[i], y[j])``.

    Nodes with NaN make their cells inert. Each returned polyline is a
    (k, 2) array; closed loops repeat their first point at the end. Output
    order is deterministic (chains start from the smallest edge id).
    """
    f = np.asarray(field, dtype=float)
    if f.ndim != 2 or f.shape[0] < 2 or f.shape[1] < 2:
        return []
    adj: dict[tuple, list[tuple]] = defaultdict(list)
    for _, a, b in _raw_segments(f, level):
        if a == b:
            continue
        adj[a].append(b)
        adj[b].append(a)
    seen_edges: set[frozenset] = set()
    lines: list[np.ndarray] = []

    def walk(start):
        chain = [start]
        cur = start
        while True:
            nxt = None
            for cand in sorted(adj[cur]):
                e = frozenset((cur, cand))
                if e not in seen_edges:
                    seen_edges.add(e)
                    nxt = cand
                    break
            if nxt is None:
                return chain
            chain.append(nxt)
            cur = nxt

    ends = sorted(k for k, v in adj.items() if len(v) % 2 == 1)
    for start in ends + sorted(adj):
        if any(frozenset((start, c)) not in seen_edges for c in adj[start]):
            chain = walk(start)
            if len(chain) > 1:
                pts = np.array([_edge_point(k, f, x, y, level) for k in chain])
                lines.append(pts)
    return lines
