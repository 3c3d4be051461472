"""Polynomials in z and conj(z), harmonic components, Almansi and log-p-harmonic maps.

Every map type here lowers to a :class:`PolyZZbar`, a finite sum of terms
``c * z**m * conj(z)**n``.  Wirtinger derivatives of such a sum are exact, so
all the point metrics (Jacobian, ``lambda``, ``Lambda``, dilatation) are
computed without numerical differentiation.

Almansi components are stored in subscript order ``[G_1, ..., G_p]``; the
component ``G_j`` carries the weight ``|z|**(2*(p-j))``, so ``G_p`` is the
unweighted term and ``G_1`` carries ``|z|**(2*(p-1))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from numbers import Number
from typing import Iterable, Sequence, Union

import numpy as np

ZERO_COEFF = 1e-15
UNDEFINED_DENOM = 1e-14


def _as_complex_array(z):
    return np.asarray(z, dtype=complex)


def _unwrap(out):
    if out.ndim == 0:
        return complex(out)
    return out


class DegeneratePointError(ValueError):
    """Raised when a quotient is requested at a point where its denominator vanishes."""


@dataclass(frozen=True, init=False)
class PolyZZbar:
    """Finite polynomial sum of ``c * z**m * conj(z)**n`` terms in canonical form.

    Terms are kept sorted by ``(m, n)``, duplicates merged, and coefficients
    with modulus below ``1e-15`` dropped.
    """

    terms: tuple

    def __init__(self, terms: Iterable = ()):
        acc: dict[tuple[int, int], complex] = {}
        for m, n, c in terms:
            m, n = int(m), int(n)
            if m < 0 or n < 0:
                raise ValueError(f"negative exponent in term ({m}, {n})")
            acc[(m, n)] = acc.get((m, n), 0j) + complex(c)
        canon = tuple(
            (m, n, c) for (m, n), c in sorted(acc.items()) if abs(c) >= ZERO_COEFF
        )
        object.__setattr__(self, "terms", canon)

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, c) -> "PolyZZbar":
        return cls([(0, 0, c)])

    @classmethod
    def z(cls, c=1.0) -> "PolyZZbar":
        return cls([(1, 0, c)])

    @classmethod
    def zbar(cls, c=1.0) -> "PolyZZbar":
        return cls([(0, 1, c)])

    @classmethod
    def abs2_power(cls, k: int) -> "PolyZZbar":
        """``|z|**(2k)`` as the single term ``z**k conj(z)**k``."""
        return cls([(k, k, 1.0)])

    # algebra ------------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        return PolyZZbar(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return PolyZZbar((m, n, -c) for m, n, c in self.terms)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Number):
            return PolyZZbar((m, n, c * other) for m, n, c in self.terms)
        other = _coerce(other)
        return PolyZZbar(
            (m1 + m2, n1 + n2, c1 * c2)
            for m1, n1, c1 in self.terms
            for m2, n2, c2 in other.terms
        )

    __rmul__ = __mul__

    def conj(self) -> "PolyZZbar":
        """Complex conjugate: ``c z^m zbar^n`` becomes ``conj(c) z^n zbar^m``."""
        return PolyZZbar((n, m, c.conjugate()) for m, n, c in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((m + n for m, n, _ in self.terms), default=0)

    def is_harmonic(self) -> bool:
        return all(m == 0 or n == 0 for m, n, _ in self.terms)

    # calculus -----------------------------------------------------------
    @cached_property
    def _derivs(self) -> tuple["PolyZZbar", "PolyZZbar"]:
        dz = PolyZZbar((m - 1, n, m * c) for m, n, c in self.terms if m >= 1)
        dzbar = PolyZZbar((m, n - 1, n * c) for m, n, c in self.terms if n >= 1)
        return dz, dzbar

    def wirtinger(self) -> tuple["PolyZZbar", "PolyZZbar"]:
        return self._derivs

    def laplacian(self) -> "PolyZZbar":
        """``4 d^2/dz dzbar``."""
        return 4 * self._derivs[0]._derivs[1]

    # evaluation ---------------------------------------------------------
    def __call__(self, z):
        z = _as_complex_array(z)
        out = np.zeros(z.shape, dtype=complex)
        if not self.terms:
            return _unwrap(out)
        zb = np.conj(z)
        zpow = _powers(z, max(m for m, _, _ in self.terms))
        zbpow = _powers(zb, max(n for _, n, _ in self.terms))
        for m, n, c in self.terms:
            out = out + c * (zpow[m] * zbpow[n])
        return _unwrap(out)

    def derivatives(self, z):
        dz, dzbar = self._derivs
        return dz(z), dzbar(z)

    def lower(self) -> "PolyZZbar":
        return self

    def __repr__(self):
        if not self.terms:
            return "PolyZZbar(0)"
        body = " + ".join(f"({c:.6g})z^{m}zb^{n}" for m, n, c in self.terms)
        return f"PolyZZbar({body})"


def _powers(z: np.ndarray, k: int) -> list[np.ndarray]:
    out = [np.ones(z.shape, dtype=complex)]
    for _ in range(k):
        out.append(out[-1] * z)
    return out


def _coerce(x) -> PolyZZbar:
    if isinstance(x, PolyZZbar):
        return x
    if isinstance(x, Number):
        return PolyZZbar.const(x)
    if hasattr(x, "lower"):
        return x.lower()
    raise TypeError(f"cannot interpret {type(x).__name__} as PolyZZbar")


@dataclass(frozen=True)
class HarmonicComponent:
    """``h(z) + conj(g(z))`` with ``h``, ``g`` given by ascending coefficient lists."""

    h: tuple = (0j,)
    g: tuple = (0j,)

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(complex(c) for c in self.h))
        object.__setattr__(self, "g", tuple(complex(c) for c in self.g))

    @cached_property
    def _lowered(self) -> PolyZZbar:
        terms = [(k, 0, c) for k, c in enumerate(self.h)]
        terms += [(0, k, c.conjugate()) for k, c in enumerate(self.g)]
        return PolyZZbar(terms)

    def lower(self) -> PolyZZbar:
        return self._lowered

    def __call__(self, z):
        return self._lowered(z)

    def derivatives(self, z):
        return self._lowered.derivatives(z)

    def scaled(self, a) -> "HarmonicComponent":
        """Multiply the component by a complex constant ``a``."""
        a = complex(a)
        return HarmonicComponent(
            tuple(a * c for c in self.h), tuple(a.conjugate() * c for c in self.g)
        )


Component = Union[HarmonicComponent, PolyZZbar]


def lower_component(c) -> PolyZZbar:
    if isinstance(c, (PolyZZbar, HarmonicComponent)):
        return c.lower()
    raise TypeError(f"unsupported component type {type(c).__name__}")


@dataclass(frozen=True)
class AlmansiMap:
    """``f(z) = sum_{k=1}^{p} |z|^(2(k-1)) G_{p-k+1}(z)`` with components ``[G_1..G_p]``."""

    p: int
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")
        if len(self.components) != self.p:
            raise ValueError(
                f"components length {len(self.components)} ≠ p {self.p}"
            )
        for c in self.components:
            lower_component(c)

    def component(self, j: int) -> Component:
        """``G_j`` using 1-based subscripts."""
        if not 1 <= j <= self.p:
            raise IndexError(f"component index {j} outside 1..{self.p}")
        return self.components[j - 1]

    @cached_property
    def _lowered(self) -> PolyZZbar:
        total = PolyZZbar()
        for k in range(1, self.p + 1):
            total = total + PolyZZbar.abs2_power(k - 1) * lower_component(
                self.component(self.p - k + 1)
            )
        return total

    def lower(self) -> PolyZZbar:
        return self._lowered

    def __call__(self, z):
        return self._lowered(z)

    def derivatives(self, z):
        return self._lowered.derivatives(z)

    def all_harmonic(self) -> bool:
        return all(lower_component(c).is_harmonic() for c in self.components)


@dataclass(frozen=True)
class TwoTermMap:
    """``f(z) = |z|^(2(p-1)) G(z) + K(z)`` with ``K`` harmonic and ``G`` arbitrary."""

    p: int
    G: Component
    K: HarmonicComponent

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"two-term form needs p >= 2, got {self.p}")
        if not lower_component(self.K).is_harmonic():
            raise ValueError("K must be harmonic")

    @cached_property
    def _weighted(self) -> PolyZZbar:
        return PolyZZbar.abs2_power(self.p - 1) * lower_component(self.G)

    @cached_property
    def _lowered(self) -> PolyZZbar:
        return self._weighted + lower_component(self.K)

    def lower(self) -> PolyZZbar:
        return self._lowered

    def __call__(self, z):
        return self._lowered(z)

    def derivatives(self, z):
        return self._lowered.derivatives(z)

    def with_scale(self, a) -> "TwoTermMap":
        """The stable family member ``a |z|^(2(p-1)) G + K``."""
        return TwoTermMap(self.p, lower_component(self.G) * complex(a), self.K)

    @classmethod
    def from_almansi(cls, A: AlmansiMap) -> "TwoTermMap":
        if A.p < 2:
            raise ValueError("two-term form needs p >= 2")
        middle = [lower_component(A.component(j)) for j in range(2, A.p)]
        if any(not c.is_zero() for c in middle):
            raise ValueError(
                "two-term form needs G_2..G_{p-1} identically zero"
            )
        K = A.component(A.p)
        if isinstance(K, PolyZZbar):
            K = harmonic_from_poly(K)
        return cls(A.p, A.component(1), K)


def harmonic_from_poly(P: PolyZZbar) -> HarmonicComponent:
    """Inverse of :meth:`HarmonicComponent.lower` for harmonic polynomials."""
    if not P.is_harmonic():
        raise ValueError("polynomial has mixed z, conj(z) terms; not harmonic")
    deg = P.degree
    h = [0j] * (deg + 1)
    g = [0j] * (deg + 1)
    for m, n, c in P.terms:
        if n == 0:
            h[m] += c
        else:
            g[n] += c.conjugate()
    return HarmonicComponent(tuple(h), tuple(g))


@dataclass(frozen=True)
class LogPHarmonicMap:
    """``f = exp(sum_k |z|^(2(k-1)) G_{p-k+1})`` with harmonic ``G_j = log g_j``."""

    p: int
    log_components: tuple

    def __post_init__(self):
        object.__setattr__(self, "log_components", tuple(self.log_components))
        if self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")
        if len(self.log_components) != self.p:
            raise ValueError(
                f"components length {len(self.log_components)} ≠ p {self.p}"
            )
        for c in self.log_components:
            if not lower_component(c).is_harmonic():
                raise ValueError("log-p-harmonic components must be harmonic")

    @cached_property
    def log_map(self) -> AlmansiMap:
        return AlmansiMap(self.p, self.log_components)

    def lower(self) -> PolyZZbar:
        """Lowered ``log f``."""
        return self.log_map.lower()

    def __call__(self, z):
        return eval_logp(self, z)

    def derivatives(self, z):
        F = self.lower()
        f = np.exp(_as_complex_array(F(z)))
        Fz, Fzbar = F.derivatives(z)
        return _unwrap(f * Fz), _unwrap(f * Fzbar)

    def factor(self, j: int):
        """``g_j = exp(G_j)`` as a callable."""
        G = lower_component(self.log_components[j - 1])
        return lambda z: np.exp(G(z))

    def factor_derivatives(self, j: int, z):
        G = lower_component(self.log_components[j - 1])
        g = np.exp(_as_complex_array(G(z)))
        Gz, Gzbar = G.derivatives(z)
        return _unwrap(g), _unwrap(g * Gz), _unwrap(g * Gzbar)


AnyMap = Union[PolyZZbar, HarmonicComponent, AlmansiMap, TwoTermMap, LogPHarmonicMap]


@dataclass(frozen=True)
class PointMetrics:
    fz: complex
    fzbar: complex
    lam: float
    Lam: float
    J: float
    omega: complex | None

    @property
    def omega_defined(self) -> bool:
        return self.omega is not None


# free-function surface -----------------------------------------------------

def eval_poly(P: PolyZZbar, z):
    return P(z)


def wirtinger(P: PolyZZbar) -> tuple[PolyZZbar, PolyZZbar]:
    return P.wirtinger()


def lower(obj) -> PolyZZbar:
    return obj.lower()


def eval_logp(L: LogPHarmonicMap, z):
    return _unwrap(np.exp(_as_complex_array(L.lower()(z))))


def evaluate(f: AnyMap, z):
    return f(z)


def lam_Lam_J(fz, fzbar):
    """Signed ``|fz|-|fzbar|``, ``|fz|+|fzbar|`` and ``|fz|^2-|fzbar|^2``."""
    a, b = np.abs(fz), np.abs(fzbar)
    return a - b, a + b, a * a - b * b


def metrics(f: AnyMap, z: complex) -> PointMetrics:
    fz, fzbar = f.derivatives(z)
    fz, fzbar = complex(fz), complex(fzbar)
    lam, Lam, J = lam_Lam_J(fz, fzbar)
    omega = fzbar / fz if abs(fz) >= UNDEFINED_DENOM else None
    return PointMetrics(fz, fzbar, float(lam), float(Lam), float(J), omega)


def second_dilatation(L: LogPHarmonicMap, j: int, z: complex) -> complex:
    """Second dilatation ``mu`` of ``g_j = exp(G_j)`` at ``z``.

    Since ``g_z = g G_z`` and ``g_zbar = g G_zbar``, ``mu`` reduces to
    ``conj(G_zbar) / G_z``.
    """
    G = lower_component(L.log_components[j - 1])
    Gz, Gzbar = G.derivatives(z)
    if abs(Gz) < UNDEFINED_DENOM:
        raise DegeneratePointError(f"(G_{j})_z vanishes at z={z!r}")
    return complex(np.conj(Gzbar) / Gz)


def as_map(obj) -> AnyMap:
    """Accept a bare component where a map is expected (``p = 1``)."""
    if isinstance(obj, (PolyZZbar, HarmonicComponent, AlmansiMap, TwoTermMap, LogPHarmonicMap)):
        return obj
    raise TypeError(f"not a map: {type(obj).__name__}")


def poly(*terms: Sequence) -> PolyZZbar:
    """Shorthand: ``poly((1, 0, 1), (1, 1, 0.3))``."""
    return PolyZZbar(terms)
