"""Boundary-image polylines, simplicity and convexity tests, linear-connectivity estimates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import shapely
from scipy.sparse.csgraph import shortest_path

DUP_TOL = 1e-14
SEG_TOL = 1e-12
VERTEX_PAIR_CAP = 64


class NonSimpleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BoundaryPolyline:
    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        pts = np.array(self.points, dtype=complex).ravel()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size

    @classmethod
    def from_points(cls, pts: Iterable) -> "BoundaryPolyline":
        return cls(_merge_duplicates(np.array(list(pts), dtype=complex)))


def _merge_duplicates(pts: np.ndarray) -> np.ndarray:
    if pts.size < 2:
        return pts
    keep = np.ones(pts.size, dtype=bool)
    keep[1:] = np.abs(np.diff(pts)) >= DUP_TOL
    pts = pts[keep]
    while pts.size > 1 and abs(pts[-1] - pts[0]) < DUP_TOL:
        pts = pts[:-1]
    return pts


def boundary_polyline(f, n: int = 2048) -> BoundaryPolyline:
    """``f(exp(2 pi i j / n))`` for ``j = 0..n-1``, consecutive duplicates merged."""
    if n < 3:
        raise ValueError("boundary polyline needs n >= 3")
    theta = 2 * np.pi * np.arange(n) / n
    return BoundaryPolyline(_merge_duplicates(np.asarray(f(np.exp(1j * theta)))))


# segment predicates --------------------------------------------------------

def _cross(a, b):
    return a.real * b.imag - a.imag * b.real


def _point_segment_distance(p, a, b):
    ab = b - a
    L2 = np.abs(ab) ** 2
    t = np.where(L2 > 0, ((p - a) * np.conj(ab)).real / np.where(L2 > 0, L2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(p - (a + t * ab))


def _segments_touch(a, b, c, d, tol=SEG_TOL):
    o1 = _cross(b - a, c - a)
    o2 = _cross(b - a, d - a)
    o3 = _cross(d - c, a - c)
    o4 = _cross(d - c, b - c)
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    near = (
        (_point_segment_distance(c, a, b) <= tol)
        | (_point_segment_distance(d, a, b) <= tol)
        | (_point_segment_distance(a, c, d) <= tol)
        | (_point_segment_distance(b, c, d) <= tol)
    )
    return proper | near


def _candidate_pairs(a: np.ndarray, b: np.ndarray, tol: float):
    """Index pairs of segments whose bounding boxes overlap (x-sweep, then y filter)."""
    xmin = np.minimum(a.real, b.real) - tol
    xmax = np.maximum(a.real, b.real) + tol
    ymin = np.minimum(a.imag, b.imag) - tol
    ymax = np.maximum(a.imag, b.imag) + tol
    order = np.argsort(xmin, kind="stable")
    xs = xmin[order]
    ends = np.searchsorted(xs, xmax[order], side="right")
    starts = np.arange(order.size) + 1
    counts = np.maximum(ends - starts, 0)
    first = np.repeat(np.arange(order.size), counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    second = np.repeat(starts, counts) + offsets
    i, j = order[first], order[second]
    keep = (ymin[i] <= ymax[j]) & (ymin[j] <= ymax[i])
    i, j = i[keep], j[keep]
    return np.minimum(i, j), np.maximum(i, j)


def is_simple(poly: BoundaryPolyline, tol: float = SEG_TOL) -> bool:
    """True iff no two non-adjacent edges meet and adjacent edges share only their endpoint."""
    P = poly.points
    n = P.size
    if n < 3:
        return False
    a, b = P, np.roll(P, -1)
    e = b - a
    e_next = np.roll(e, -1)
    backtrack = (np.abs(_cross(e, e_next)) <= tol * np.abs(e) * np.abs(e_next)) & (
        (e * np.conj(e_next)).real < 0
    )
    if np.any(backtrack):
        return False
    i, j = _candidate_pairs(a, b, tol)
    gap = j - i
    nonadj = (gap > 1) & (gap < n - 1)
    i, j = i[nonadj], j[nonadj]
    if i.size == 0:
        return True
    return not bool(np.any(_segments_touch(a[i], b[i], a[j], b[j], tol)))


def is_convex(poly: BoundaryPolyline, tol: float = 1e-9) -> bool:
    """All turns share one sign; turns with ``|cross| < tol * |e_i||e_{i+1}|`` count as straight."""
    if not is_simple(poly):
        raise NonSimpleError("convexity test needs a simple polyline")
    e = np.roll(poly.points, -1) - poly.points
    e_next = np.roll(e, -1)
    cr = _cross(e, e_next)
    scale = np.abs(e) * np.abs(e_next)
    sig = cr[np.abs(cr) >= tol * scale]
    return bool(np.all(sig > 0) or np.all(sig < 0))


def signed_area(P: np.ndarray) -> float:
    return 0.5 * float(np.sum(_cross(P, np.roll(P, -1))))


def point_in_polygon(w, P: np.ndarray) -> np.ndarray:
    """Even-odd membership of the points ``w`` in the polygon with vertices ``P``."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    a, b = P[None, :], np.roll(P, -1)[None, :]
    x, y = w.real[:, None], w.imag[:, None]
    straddle = (a.imag > y) != (b.imag > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
    hits = straddle & (x < xcross)
    return (np.count_nonzero(hits, axis=1) % 2) == 1


# linear connectivity -------------------------------------------------------

@dataclass(frozen=True)
class ConnectivityEstimate:
    Mhat: float
    witness_pair: tuple
    path_length: float
    pairs_sampled: int
    path: tuple = ()


def _to_xy(z: np.ndarray) -> np.ndarray:
    return np.stack([z.real, z.imag], axis=-1)


class _Visibility:
    """Segment-inside-closed-polygon tests backed by a prepared shapely polygon."""

    def __init__(self, P: np.ndarray):
        self.polygon = shapely.Polygon(_to_xy(P))
        shapely.prepare(self.polygon)

    def __call__(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
        out = np.ones(a.shape, dtype=bool)
        same = np.abs(a - b) == 0
        idx = np.flatnonzero(~same.ravel())
        if idx.size:
            coords = np.stack([_to_xy(a.ravel()[idx]), _to_xy(b.ravel()[idx])], axis=1)
            lines = shapely.linestrings(coords)
            out.ravel()[idx] = shapely.covers(self.polygon, lines)
        return out


def _reflex_vertices(P: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Indices of reflex vertices of a counter-clockwise polygon."""
    e_prev = P - np.roll(P, 1)
    e_next = np.roll(P, -1) - P
    cr = _cross(e_prev, e_next)
    return np.flatnonzero(cr < -tol * np.abs(e_prev) * np.abs(e_next))


def _sample_interior(rng: np.random.Generator, P: np.ndarray, max_tries: int = 1000):
    """Rejection sampling: random point in a random vertex triangle, kept if inside."""
    n = P.size
    for _ in range(max_tries):
        idx = rng.choice(n, size=3, replace=False)
        w = rng.dirichlet(np.ones(3))
        q = complex(np.dot(w, P[idx]))
        if point_in_polygon(q, P)[0]:
            return q
    return None


def _sample_pairs(P: np.ndarray, pairs: int, seed: int) -> list[tuple[complex, complex]]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(pairs):
        ends = []
        for _ in range(2):
            q = None
            if rng.random() < 0.5:
                q = _sample_interior(rng, P)
            if q is None:
                q = complex(P[rng.integers(P.size)])
            ends.append(q)
        out.append((ends[0], ends[1]))
    return out


def connectivity_estimate(poly: BoundaryPolyline, pairs: int = 2000, seed: int = 0,
                          extra_pairs: Sequence[tuple[complex, complex]] = ()
                          ) -> ConnectivityEstimate:
    """Sampled lower bound on the linear-connectivity constant of the polygon interior.

    For each sampled pair the shortest path inside the closed polygon is found
    on the visibility graph (endpoints plus reflex vertices, where geodesics
    bend); the largest ratio of path length to chord length is returned.
    All vertex pairs are included when the polygon has at most 64 vertices.
    """
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    if not is_simple(poly):
        raise NonSimpleError("connectivity estimate needs a simple polyline")
    P = np.asarray(poly.points)
    if signed_area(P) < 0:
        P = P[::-1]
    V = P.size

    candidates = [(complex(a), complex(b)) for a, b in extra_pairs]
    if V <= VERTEX_PAIR_CAP:
        candidates += [(complex(P[i]), complex(P[j])) for i in range(V) for j in range(i + 1, V)]
    candidates += _sample_pairs(P, pairs, seed)

    reflex = P[_reflex_vertices(P)]
    R = reflex.size
    vis = _Visibility(P) if R else None
    if R:
        iu, ju = np.triu_indices(R, 1)
        ok = vis(reflex[iu], reflex[ju])
        W = np.zeros((R, R))
        W[iu[ok], ju[ok]] = np.abs(reflex[iu[ok]] - reflex[ju[ok]])
        W = W + W.T
        D, pred = shortest_path(W, method="D", directed=False, return_predecessors=True)

    best = None
    for s, t in candidates:
        chord = abs(t - s)
        if chord == 0:
            continue
        if R == 0 or vis(np.array(s), np.array(t)).item():
            length, path = chord, (s, t)
        else:
            vs = vis(np.full(R, s), reflex)
            vt = vis(np.full(R, t), reflex)
            ds = np.where(vs, np.abs(reflex - s), np.inf)
            dt = np.where(vt, np.abs(reflex - t), np.inf)
            tot = ds[:, None] + D + dt[None, :]
            k = int(np.argmin(tot))
            u, v = divmod(k, R)
            length = float(tot[u, v])
            if not np.isfinite(length):
                continue
            chain = [v]
            while chain[-1] != u:
                chain.append(int(pred[u, chain[-1]]))
            path = (s, *[complex(reflex[c]) for c in reversed(chain)], t)
        ratio = length / chord
        if best is None or ratio > best[0]:
            best = (ratio, (s, t), length, path)
    if best is None:
        raise ValueError("no sampled pair with distinct endpoints")
    ratio, pair, length, path = best
    return ConnectivityEstimate(float(ratio), pair, float(length), len(candidates), tuple(path))
