"""Pointwise univalence-criterion ratios, their supremum over the closed disk, and verdicts.

Each ratio compares a size bound on the "perturbation" part of a map with the
smaller singular value ``|lambda|`` of a reference part.  A map is certified
when the supremum of the ratio over the disk is strictly below the threshold
``1/M`` (or ``1/(2M)`` for the stable family and the conservative converse),
where ``M`` is the linear-connectivity constant of the reference image.

Coefficient variants
--------------------
For the full-Almansi ratios (T2, T5) the product rule applied to
``G = sum_k |z|^(2(k-1)) G_{p-k}`` gives the bound
``2|G| + Lambda_G <= sum_k 2k|G_{p-k}| + Lambda_{G_{p-k}}``.  The literal
form carries ``(k-1) Lambda`` (T2) or ``2(k-1) Lambda`` (T5), which drops the
``k = 1`` derivative term and is not a sufficient condition
(``f = 0.4|z|^2 z^2 + z`` has ratio 0.8 but a fold near ``z = -1``).
``coefficients="corrected"`` (default) uses the bound above;
``coefficients="printed"`` reproduces the literal form.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import geometry
from .core import (
    AlmansiMap,
    HarmonicComponent,
    LogPHarmonicMap,
    PolyZZbar,
    TwoTermMap,
    harmonic_from_poly,
    lam_Lam_J,
    lower_component,
)
from .parallel import map_chunks

DEGENERATE = 1e-12


class RatioKind(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"
    T4 = "T4"
    T5 = "T5"
    T6 = "T6"
    T7_CANONICAL = "T7-canonical"
    T7_LITERAL = "T7-literal"

    @classmethod
    def parse(cls, tag: str, *, t7_literal: bool = False) -> "RatioKind":
        if tag == "T7":
            return cls.T7_LITERAL if t7_literal else cls.T7_CANONICAL
        return cls(tag)


class ShapeMismatchError(ValueError):
    pass


class ConvexCheckError(ValueError):
    pass


# pointwise ratios ----------------------------------------------------------

def _finish(num, den):
    num = np.asarray(num, dtype=float)
    den = np.abs(np.asarray(den, dtype=float))
    small = den < DEGENERATE
    safe = np.where(small, 1.0, den)
    out = np.where(small, np.where(num >= DEGENERATE, np.inf, 0.0), num / safe)
    return float(out) if out.ndim == 0 else out


def _mod_Lam(P: PolyZZbar, z):
    val = np.abs(P(z))
    Pz, Pzbar = P.derivatives(z)
    return val, np.abs(Pz) + np.abs(Pzbar)


def _lam(f, z):
    fz, fzbar = f.derivatives(z)
    return lam_Lam_J(fz, fzbar)[0]


def _two_term_numerator(G, p, z):
    mod, Lam = _mod_Lam(lower_component(G), z)
    return 2 * (p - 1) * mod + Lam


def _lambda_coeff(k: int, kind: str, coefficients: str) -> float:
    if coefficients == "corrected":
        return 1.0
    if coefficients != "printed":
        raise ValueError(f"unknown coefficient variant {coefficients!r}")
    return float(k - 1) if kind == "T2" else float(2 * (k - 1))


def _almansi_numerator(A: AlmansiMap, z, kind: str, coefficients: str):
    z = np.asarray(z, dtype=complex)
    num = np.zeros(z.shape)
    for k in range(1, A.p):
        mod, Lam = _mod_Lam(lower_component(A.component(A.p - k)), z)
        num = num + 2 * k * mod + _lambda_coeff(k, kind, coefficients) * Lam
    return num


def ratio_T1(G, K: HarmonicComponent, p: int, z):
    """``(2(p-1)|G| + Lambda_G) / |lambda_K|``."""
    return _finish(_two_term_numerator(G, p, z), _lam(lower_component(K), z))


def ratio_T4(G, K: HarmonicComponent, p: int, z):
    """T1 numerator over ``|lambda_f|`` of ``f = |z|^(2(p-1)) G + K``."""
    f = TwoTermMap(p, G, K)
    return _finish(_two_term_numerator(G, p, z), _lam(f, z))


ratio_T6 = ratio_T4


def ratio_T2(A, z, coefficients: str = "corrected"):
    A = as_almansi(A)
    top = lower_component(A.component(A.p))
    return _finish(_almansi_numerator(A, z, "T2", coefficients), _lam(top, z))


def ratio_T5(A, z, coefficients: str = "corrected"):
    A = as_almansi(A)
    return _finish(_almansi_numerator(A, z, "T5", coefficients), _lam(A, z))


def ratio_T7(L: LogPHarmonicMap, z, variant: str = "canonical",
             coefficients: str = "corrected"):
    """Log-p-harmonic ratio.

    ``canonical`` is the full-Almansi ratio of ``log f``.  ``literal``
    evaluates ``|g_p| sum (2k|g_{p-k}||log g_{p-k}| + (k-1) Lambda_{g_{p-k}})
    / |lambda_{g_p}|`` term by term, using the principal logarithm.
    """
    if variant == "canonical":
        return ratio_T2(L.log_map, z, coefficients)
    if variant != "literal":
        raise ValueError(f"unknown T7 variant {variant!r}")
    z = np.asarray(z, dtype=complex)
    p = L.p
    gp, gpz, gpzbar = L.factor_derivatives(p, z)
    num = np.zeros(z.shape)
    for k in range(1, p):
        g, gz, gzbar = L.factor_derivatives(p - k, z)
        g = np.asarray(g)
        num = num + 2 * k * np.abs(g) * np.abs(np.log(g)) + (k - 1) * (
            np.abs(gz) + np.abs(gzbar)
        )
    num = np.abs(gp) * num
    return _finish(num, lam_Lam_J(gpz, gpzbar)[0])


# map shapes ----------------------------------------------------------------

def as_almansi(data) -> AlmansiMap:
    if isinstance(data, AlmansiMap):
        return data
    if isinstance(data, (HarmonicComponent, PolyZZbar)):
        return AlmansiMap(1, (data,))
    if isinstance(data, TwoTermMap):
        comps = [data.G] + [PolyZZbar()] * (data.p - 2) + [data.K]
        return AlmansiMap(data.p, comps)
    raise ShapeMismatchError(f"expected an Almansi map, got {type(data).__name__}")


def as_two_term(data) -> TwoTermMap:
    if isinstance(data, TwoTermMap):
        return data
    if isinstance(data, AlmansiMap):
        try:
            return TwoTermMap.from_almansi(data)
        except ValueError as exc:
            raise ShapeMismatchError(str(exc)) from None
    raise ShapeMismatchError(f"expected a two-term map, got {type(data).__name__}")


def _require_harmonic_top(A: AlmansiMap):
    if not lower_component(A.component(A.p)).is_harmonic():
        raise ShapeMismatchError(f"G_{A.p} must be harmonic")


def ratio_function(kind: RatioKind, data, *, coefficients: str = "corrected"
                   ) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized ``z -> ratio`` for ``kind`` on ``data``; validates the shape."""
    kind = RatioKind(kind)
    if kind in (RatioKind.T1, RatioKind.T4, RatioKind.T6):
        if isinstance(data, LogPHarmonicMap):
            raise ShapeMismatchError(f"{kind.value} needs a polyharmonic map")
        t = as_two_term(data)
        fn = ratio_T1 if kind is RatioKind.T1 else ratio_T4
        return lambda z: fn(t.G, t.K, t.p, z)
    if kind in (RatioKind.T2, RatioKind.T5):
        if isinstance(data, LogPHarmonicMap):
            raise ShapeMismatchError(f"{kind.value} needs a polyharmonic map")
        A = as_almansi(data)
        _require_harmonic_top(A)
        fn = ratio_T2 if kind is RatioKind.T2 else ratio_T5
        return lambda z: fn(A, z, coefficients)
    if not isinstance(data, LogPHarmonicMap):
        raise ShapeMismatchError(f"{kind.value} needs a log-p-harmonic map")
    variant = "canonical" if kind is RatioKind.T7_CANONICAL else "literal"
    return lambda z: ratio_T7(data, z, variant, coefficients)


def reference_map(kind: RatioKind, data):
    """The map whose image supplies ``M`` for ``kind``."""
    kind = RatioKind(kind)
    if kind is RatioKind.T1:
        return as_two_term(data).K
    if kind is RatioKind.T2:
        A = as_almansi(data)
        return A.component(A.p)
    if kind in (RatioKind.T4, RatioKind.T6):
        return as_two_term(data)
    if kind is RatioKind.T5:
        return as_almansi(data)
    top = data.log_components[-1]
    return top if not isinstance(top, PolyZZbar) else harmonic_from_poly(top)


# supremum over the disk ----------------------------------------------------

@dataclass(frozen=True)
class SupPlan:
    nr: int = 64
    ntheta: int = 256
    refine_top: int = 10
    max_iter: int = 200

    def __post_init__(self):
        if self.nr < 8 or self.ntheta < 16:
            raise ValueError("sup plan needs nr >= 8 and ntheta >= 16")


@dataclass(frozen=True)
class SupEstimate:
    value: float
    arg_point: complex
    samples_used: int
    refined: bool

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)


def polar_grid(nr: int, ntheta: int):
    r = np.arange(nr) / (nr - 1)
    theta = 2 * np.pi * np.arange(ntheta) / ntheta
    return r, theta


def _grid_local_maxima(V: np.ndarray) -> np.ndarray:
    """Flat indices of 8-neighbour local maxima, theta periodic, origin row collapsed."""
    nr, nt = V.shape
    padded = np.pad(V, ((1, 1), (0, 0)), constant_values=-np.inf)
    padded = np.concatenate([padded[:, -1:], padded, padded[:, :1]], axis=1)
    is_max = np.ones_like(V, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = padded[1 + di:1 + di + nr, 1 + dj:1 + dj + nt]
            is_max &= V >= nb
    is_max[0, 1:] = False
    return np.flatnonzero(is_max)


def _compass_maximize(fn, r0, t0, dr, dt, max_iter):
    """Batched compass search in (r, theta); r clamped to [0, 1], theta periodic."""
    r, t = r0.copy(), t0.copy()
    best = np.asarray(fn(r * np.exp(1j * t)), dtype=float)
    evals = best.size
    moves = ((1, 0), (-1, 0), (0, 1), (0, -1))
    for _ in range(max_iter):
        cand_r = np.stack([np.clip(r + a * dr, 0.0, 1.0) for a, _ in moves])
        cand_t = np.stack([np.mod(t + b * dt, 2 * np.pi) for _, b in moves])
        vals = np.asarray(fn(cand_r * np.exp(1j * cand_t)), dtype=float)
        evals += vals.size
        k = np.argmax(vals, axis=0)
        idx = np.arange(r.size)
        top = vals[k, idx]
        better = top > best
        r = np.where(better, cand_r[k, idx], r)
        t = np.where(better, cand_t[k, idx], t)
        best = np.where(better, top, best)
        dr = np.where(better, dr, dr * 0.5)
        dt = np.where(better, dt, dt * 0.5)
        if np.all(dr < 1e-15):
            break
    return r, t, best, evals


def sup_of(fn: Callable[[np.ndarray], np.ndarray], plan: SupPlan = SupPlan(),
           workers: int | None = None) -> SupEstimate:
    """Supremum of ``fn`` over the closed unit disk (polar scan plus local refinement)."""
    r, theta = polar_grid(plan.nr, plan.ntheta)
    Z = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    V = map_chunks(lambda z: np.asarray(fn(z), dtype=float).reshape(z.shape), Z, workers)
    i0 = int(np.argmax(V))
    if np.isinf(V[i0]):
        return SupEstimate(math.inf, complex(Z[i0]), Z.size, False)
    best_val, best_z = float(V[i0]), complex(Z[i0])
    Vg = V.reshape(plan.nr, plan.ntheta)
    maxima = _grid_local_maxima(Vg)
    order = maxima[np.argsort(-V[maxima], kind="stable")][: plan.refine_top]
    evals = Z.size
    if order.size and plan.max_iter > 0:
        ii, jj = np.divmod(order, plan.ntheta)
        rr, tt, vals, n_ev = _compass_maximize(
            fn, r[ii], theta[jj],
            np.full(order.size, 1.0 / (plan.nr - 1)),
            np.full(order.size, 2 * np.pi / plan.ntheta),
            plan.max_iter,
        )
        evals += n_ev
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_z = complex(rr[k] * np.exp(1j * tt[k]))
    return SupEstimate(best_val, best_z, int(evals), True)


def sup_disk(kind: RatioKind, data, plan: SupPlan = SupPlan(), *,
             coefficients: str = "corrected", workers: int | None = None) -> SupEstimate:
    return sup_of(ratio_function(kind, data, coefficients=coefficients), plan, workers)


# certification -------------------------------------------------------------

@dataclass(frozen=True)
class CriterionReport:
    kind: RatioKind
    sup: SupEstimate
    threshold: float
    threshold_basis: str
    M: float
    margin: float
    verdict: str
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


def threshold_for(kind: RatioKind, M: float, *, as_stated: bool = False) -> float:
    kind = RatioKind(kind)
    if kind is RatioKind.T6 or (kind is RatioKind.T5 and not as_stated):
        return 1.0 / (2.0 * M)
    return 1.0 / M


def certify(data, kind: RatioKind, basis="convex", plan: SupPlan = SupPlan(), *,
            as_stated: bool = False, coefficients: str = "corrected",
            boundary_n: int = 2048, pairs: int = 2000, seed: int = 0,
            workers: int | None = None) -> CriterionReport:
    """Evaluate the ``kind`` criterion and assemble a verdict.

    ``basis`` is a number (user-supplied ``M``), ``"convex"`` (``M = 1`` after
    checking the reference boundary image), ``"estimate"`` (sampled lower bound
    on ``M``; can only yield ``heuristic-pass``) or ``"auto"`` (convex when the
    check succeeds, otherwise estimate).
    """
    kind = RatioKind(kind)
    fn = ratio_function(kind, data, coefficients=coefficients)
    ref = reference_map(kind, data)

    if isinstance(basis, (int, float)) and not isinstance(basis, bool):
        M = float(basis)
        if not (math.isfinite(M) and M >= 1.0):
            raise ValueError(f"M must be a finite number >= 1, got {basis!r}")
        basis_tag = "userM"
    elif basis in ("convex", "auto", "estimate"):
        poly = geometry.boundary_polyline(ref, boundary_n)
        simple = geometry.is_simple(poly)
        convex = simple and geometry.is_convex(poly)
        if basis == "convex" and not convex:
            raise ConvexCheckError(
                "reference boundary image is not "
                + ("simple" if not simple else "convex")
            )
        if convex and basis != "estimate":
            M, basis_tag = 1.0, "convexUnit"
        elif simple:
            est = geometry.connectivity_estimate(poly, pairs, seed)
            M, basis_tag = est.Mhat, "estimatedM"
        else:
            M, basis_tag = math.inf, "estimatedM"
    else:
        raise ValueError(f"unknown M basis {basis!r}")

    sup = sup_of(fn, plan, workers)
    threshold = 0.0 if math.isinf(M) else threshold_for(kind, M, as_stated=as_stated)
    if sup.infinite:
        margin, verdict = -math.inf, "degenerate"
    else:
        margin = threshold - sup.value
        if margin > 0:
            verdict = "certified" if basis_tag != "estimatedM" else "heuristic-pass"
        else:
            verdict = "not-certified"
    options = {"coefficients": coefficients, "as_stated": as_stated,
               "plan": asdict(plan)}
    if basis_tag == "estimatedM":
        options.update(pairs=pairs, seed=seed, boundary_n=boundary_n)
    elif basis_tag == "convexUnit":
        options.update(boundary_n=boundary_n)
    return CriterionReport(kind, sup, threshold, basis_tag, M, margin, verdict, options)
