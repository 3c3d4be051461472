"""Theorem-free univalence checks: collisions, Jacobian sign, boundary degree, stable family.

The collision scan evaluates ``f`` on an ``n x n`` grid of the closed disk,
triangulates the grid, and looks for grid points whose image falls inside
(within ``tau`` of) the image of a triangle lying away from the point in the
source.  Each such candidate pair is refined by a derivative-free compass
search on both points followed by a short Newton polish of the second point,
and accepted only if ``|f(z1) - f(z2)| <= 1e-12`` with ``|z1 - z2| >= sigma``.

A ``pass`` is evidence at the stated resolution, not a proof.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .core import TwoTermMap, lam_Lam_J, lower_component
from .parallel import map_chunks, map_ordered, worker_count

RESIDUAL_TOL = 1e-12
PAIR_LIMIT = 4_000_000
PAIR_CHUNK = 200_000


class PointOnCurveError(ValueError):
    pass


class SampleOutOfRangeError(ValueError):
    pass


@dataclass(frozen=True)
class OracleVerdict:
    status: str
    witness: tuple | complex | None = None
    residual: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class JacobianScan:
    min_J: float
    argmin: complex
    verdict: str


def disk_grid(n: int):
    """Square grid on [-1, 1]^2 (row-major) and the mask of points with ``|z| <= 1``."""
    xs = np.linspace(-1.0, 1.0, n)
    Z = (xs[None, :] + 1j * xs[:, None]).ravel()
    return Z, np.abs(Z) <= 1.0


def _eval(f, z, workers):
    return map_chunks(lambda s: np.asarray(f(s), dtype=complex).reshape(s.shape), z, workers)


def _derivs(f, z):
    fz, fzbar = f.derivatives(z)
    return np.asarray(fz, dtype=complex), np.asarray(fzbar, dtype=complex)


# Jacobian ------------------------------------------------------------------

def jacobian_scan(f, n: int = 256, workers: int | None = None) -> JacobianScan:
    """Minimum of ``J_f`` over the disk grid plus ``4n`` points on the unit circle."""
    if n < 64:
        raise ValueError("jacobian scan needs n >= 64")
    Z, inside = disk_grid(n)
    Z = np.concatenate([Z[inside], np.exp(2j * np.pi * np.arange(4 * n) / (4 * n))])

    def J_of(z):
        return lam_Lam_J(*_derivs(f, z))[2]

    J = map_chunks(J_of, Z, workers)
    k = int(np.argmin(J))
    minJ = float(J[k])
    return JacobianScan(minJ, complex(Z[k]), "pass" if minJ > 0 else "jacobian-sign-failure")


# boundary degree -----------------------------------------------------------

def winding_number(poly: geometry.BoundaryPolyline, w: complex) -> int:
    P = poly.points
    Q = np.roll(P, -1)
    if np.min(geometry._point_segment_distance(np.full(P.size, w), P, Q)) < 1e-12:
        raise PointOnCurveError(f"point {w!r} lies on the polyline")
    d = P - w
    turn = np.sum(np.angle(np.roll(d, -1) / d))
    return int(round(turn / (2 * np.pi)))


# collisions ----------------------------------------------------------------

def _grid_triangles(n: int, inside: np.ndarray) -> np.ndarray:
    idx = np.arange(n * n).reshape(n, n)
    a, b = idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel()
    c, d = idx[1:, 1:].ravel(), idx[1:, :-1].ravel()
    tris = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])
    tris = tris[np.all(inside[tris], axis=1)]
    return tris[np.lexsort((tris[:, 2], tris[:, 1], tris[:, 0]))]


def _hash_triangles(Wt: np.ndarray, tau: float):
    lo = np.minimum(np.minimum(Wt[:, 0].real, Wt[:, 1].real), Wt[:, 2].real) - tau
    hi = np.maximum(np.maximum(Wt[:, 0].real, Wt[:, 1].real), Wt[:, 2].real) + tau
    lo_y = np.minimum(np.minimum(Wt[:, 0].imag, Wt[:, 1].imag), Wt[:, 2].imag) - tau
    hi_y = np.maximum(np.maximum(Wt[:, 0].imag, Wt[:, 1].imag), Wt[:, 2].imag) + tau
    ext = np.maximum(hi - lo, hi_y - lo_y)
    s = max(float(np.median(ext)), 1e-12)
    x0, y0 = float(lo.min()), float(lo_y.min())
    while True:
        cx0 = np.floor((lo - x0) / s).astype(np.int64)
        cx1 = np.floor((hi - x0) / s).astype(np.int64)
        cy0 = np.floor((lo_y - y0) / s).astype(np.int64)
        cy1 = np.floor((hi_y - y0) / s).astype(np.int64)
        nx, ny = cx1 - cx0 + 1, cy1 - cy0 + 1
        counts = nx * ny
        if counts.sum() <= PAIR_LIMIT:
            break
        s *= 2.0
    tri = np.repeat(np.arange(Wt.shape[0]), counts)
    off = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    ox, oy = np.divmod(off, np.repeat(ny, counts))
    width = int(cy1.max()) + 2
    keys = (np.repeat(cx0, counts) + ox) * width + np.repeat(cy0, counts) + oy
    order = np.lexsort((tri, keys))
    return keys[order], tri[order], (x0, y0, s, width)


def _point_triangle_distance(w, A, B, C):
    e0, e1 = B - A, C - A
    det = geometry._cross(e0, e1)
    safe = np.where(det != 0, det, 1.0)
    u = geometry._cross(w - A, e1) / safe
    v = geometry._cross(e0, w - A) / safe
    inside = (det != 0) & (u >= 0) & (v >= 0) & (u + v <= 1)
    edge = np.minimum(
        np.minimum(geometry._point_segment_distance(w, A, B),
                   geometry._point_segment_distance(w, B, C)),
        geometry._point_segment_distance(w, C, A),
    )
    return np.where(inside, 0.0, edge), u, v, det != 0


def _project_disk(z):
    r = np.abs(z)
    return np.where(r > 1.0, z / np.where(r > 0, r, 1.0), z)


def _refine_pairs(f, z1, z2, sigma, h, max_iter=500):
    """Batched compass search on (x1, y1, x2, y2) minimizing |f(z1)-f(z2)|^2 + separation penalty."""

    def objective(a, b):
        r = np.abs(f(a) - f(b)) ** 2
        gap = np.maximum(0.0, sigma - np.abs(a - b))
        return r + 1e6 * gap ** 2

    best = objective(z1, z2)
    step = np.full(z1.shape, h / 4)
    units = (1, -1, 1j, -1j)
    for _ in range(max_iter):
        c1 = np.stack([_project_disk(z1 + u * step) for u in units] + [z1] * 4)
        c2 = np.stack([z2] * 4 + [_project_disk(z2 + u * step) for u in units])
        vals = objective(c1, c2)
        k = np.argmin(vals, axis=0)
        idx = np.arange(z1.size)
        top = vals[k, idx]
        better = top < best
        z1 = np.where(better, c1[k, idx], z1)
        z2 = np.where(better, c2[k, idx], z2)
        best = np.where(better, top, best)
        step = np.where(better, step, step * 0.5)
        if np.all((step < 1e-15) | (best < 1e-26)):
            break
    # Newton polish of z2 against the fixed target f(z1)
    target = f(z1)
    for _ in range(8):
        fz, fzbar = _derivs(f, z2)
        J = np.abs(fz) ** 2 - np.abs(fzbar) ** 2
        r = target - f(z2)
        ok = np.abs(J) > 1e-300
        delta = np.where(ok, (np.conj(fz) * r - fzbar * np.conj(r)) / np.where(ok, J, 1.0), 0)
        z2 = _project_disk(z2 + delta)
    return z1, z2, np.abs(f(z1) - f(z2))


def injectivity_scan(f, n: int = 256, sigma: float = 1e-3, tau: float = 1e-6,
                     workers: int | None = None, max_candidates: int = 256,
                     batch: int = 64) -> OracleVerdict:
    if n < 64:
        raise ValueError("injectivity scan needs n >= 64")
    if sigma <= 0 or tau <= 0:
        raise ValueError("sigma and tau must be positive")
    params = {"n": n, "sigma": sigma, "tau": tau}
    h = 2.0 / (n - 1)
    exclusion = max(sigma, 2.5 * h)

    Z, inside = disk_grid(n)
    W = _eval(f, Z, workers)
    tris = _grid_triangles(n, inside)
    Wt, Zt = W[tris], Z[tris]
    keys, tri_sorted, (x0, y0, s, width) = _hash_triangles(Wt, tau)

    queries = np.flatnonzero(inside)
    wq = W[queries]
    qx = np.floor((wq.real - x0) / s).astype(np.int64)
    qy = np.floor((wq.imag - y0) / s).astype(np.int64)
    valid = (qx >= 0) & (qy >= 0) & (qy < width)
    qkey = np.where(valid, qx * width + qy, -1)
    start = np.searchsorted(keys, qkey, side="left")
    stop = np.searchsorted(keys, qkey, side="right")
    counts = np.where(valid, stop - start, 0)

    found_q, found_z2 = [], []
    seen = set()
    ends = np.cumsum(counts)
    q_lo = 0
    while q_lo < queries.size and len(found_q) < max_candidates:
        base = ends[q_lo] - counts[q_lo]
        q_hi = max(int(np.searchsorted(ends, base + PAIR_CHUNK, side="right")), q_lo + 1)
        cnt = counts[q_lo:q_hi]
        qi = np.repeat(np.arange(q_lo, q_hi), cnt)
        off = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        t = tri_sorted[np.repeat(start[q_lo:q_hi], cnt) + off]
        q_lo = q_hi
        zq = Z[queries[qi]]
        far = np.min(np.abs(Zt[t] - zq[:, None]), axis=1) >= exclusion
        qi, t = qi[far], t[far]
        dist, u, v, nondeg = _point_triangle_distance(
            W[queries[qi]], Wt[t, 0], Wt[t, 1], Wt[t, 2])
        hit = dist <= tau
        for q, tt, uu, vv, nd in zip(qi[hit], t[hit], u[hit], v[hit], nondeg[hit]):
            if q in seen:
                continue
            if len(found_q) >= max_candidates:
                break
            seen.add(int(q))
            za, zb, zc = Zt[tt]
            if nd:
                uu, vv = min(max(uu, 0.0), 1.0), min(max(vv, 0.0), 1.0)
                if uu + vv > 1:
                    uu, vv = uu / (uu + vv), vv / (uu + vv)
                z2 = za + uu * (zb - za) + vv * (zc - za)
            else:
                z2 = (za + zb + zc) / 3
            found_q.append(int(q))
            found_z2.append(complex(z2))
    params["candidates"] = len(found_q)
    if not found_q:
        return OracleVerdict("pass", params=params)

    order = np.argsort(np.array(found_q), kind="stable")[:max_candidates]
    qs = np.array(found_q)[order]
    z2s = np.array(found_z2)[order]
    for lo in range(0, qs.size, batch):
        z1 = Z[queries[qs[lo:lo + batch]]]
        z2 = z2s[lo:lo + batch]
        z1, z2, res = _refine_pairs(f, z1.copy(), z2.copy(), sigma, h)
        ok = (res <= RESIDUAL_TOL) & (np.abs(z1 - z2) >= sigma) & (np.abs(z1) <= 1) & (np.abs(z2) <= 1)
        if np.any(ok):
            k = int(np.flatnonzero(ok)[0])
            return OracleVerdict("collision", (complex(z1[k]), complex(z2[k])),
                                 float(res[k]), params)
    return OracleVerdict("pass", params=params)


# combined verdict ----------------------------------------------------------

def univalence_verdict(f, n: int = 256, sigma: float = 1e-3, tau: float = 1e-6,
                       boundary_n: int = 2048, workers: int | None = None) -> OracleVerdict:
    """Jacobian sign, then boundary simplicity and degree around ``f(0)``, then collisions."""
    params = {"n": n, "sigma": sigma, "tau": tau, "boundary_n": boundary_n}
    jac = jacobian_scan(f, n, workers)
    params["min_J"] = jac.min_J
    if jac.verdict != "pass":
        return OracleVerdict("jacobian-sign-failure", jac.argmin, None, params)
    poly = geometry.boundary_polyline(f, boundary_n)
    if not geometry.is_simple(poly):
        return OracleVerdict("boundary-anomaly", None, None, {**params, "reason": "non-simple"})
    w0 = complex(f(0j))
    try:
        wn = winding_number(poly, w0)
    except PointOnCurveError:
        return OracleVerdict("boundary-anomaly", w0, None, {**params, "reason": "f(0) on boundary"})
    if wn != 1:
        return OracleVerdict("boundary-anomaly", w0, None,
                             {**params, "reason": "winding", "winding": wn})
    inj = injectivity_scan(f, n, sigma, tau, workers)
    return OracleVerdict(inj.status, inj.witness, inj.residual, {**params, **inj.params})


# stable family -------------------------------------------------------------

def default_a_samples(n_angles: int = 8, moduli=(0.5, 0.95), include_zero: bool = True):
    out = [0j] if include_zero else []
    for m in moduli:
        out += [complex(m * np.exp(2j * np.pi * k / n_angles)) for k in range(n_angles)]
    return out


def stable_sweep(G, K, p: int, a_samples=None, n: int = 256, sigma: float = 1e-3,
                 tau: float = 1e-6, boundary_n: int = 2048,
                 workers: int | None = None) -> list[tuple[complex, OracleVerdict]]:
    """Oracle verdicts for ``f_a = a |z|^(2(p-1)) G + K`` over the given ``a`` samples."""
    if a_samples is None:
        a_samples = default_a_samples()
    a_samples = [complex(a) for a in a_samples]
    for a in a_samples:
        if not abs(a) < 1:
            raise SampleOutOfRangeError(f"|a| must be < 1, got a={a!r}")
    base = TwoTermMap(p, lower_component(G), K)
    inner = 1 if worker_count(workers) > 1 else workers

    def one(a):
        return a, univalence_verdict(base.with_scale(a), n, sigma, tau, boundary_n, inner)

    return map_ordered(one, a_samples, workers)
