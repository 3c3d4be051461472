import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uniharm import oracle
from uniharm.core import AlmansiMap, HarmonicComponent, LogPHarmonicMap, PolyZZbar, TwoTermMap
from uniharm.criteria import (
    ConvexCheckError,
    RatioKind,
    ShapeMismatchError,
    SupPlan,
    certify,
    ratio_T1,
    ratio_T2,
    ratio_T4,
    ratio_T5,
    ratio_T6,
    ratio_T7,
    sup_disk,
    sup_of,
    threshold_for,
)

from .conftest import Z, random_disk_points, random_poly

const = PolyZZbar.const
SMALL = SupPlan(nr=16, ntheta=64)


def biharmonic(c):
    return AlmansiMap(2, [const(c), Z])


# pointwise ratios ---------------------------------------------------------

@pytest.mark.parametrize("z", [0, 0.5, -0.3 + 0.8j])
def test_T1_constant_G(z):
    assert ratio_T1(const(0.3), Z, 2, z) == pytest.approx(0.6)
    assert ratio_T1(PolyZZbar(), Z, 2, z) == 0


def test_T1_analytic_G():
    assert ratio_T1(PolyZZbar.z(), Z, 3, 0.5) == pytest.approx(3.0)


def test_T2_p1_is_zero():
    A = AlmansiMap(1, [HarmonicComponent((0, 1), (0, 0.3))])
    assert np.all(ratio_T2(A, random_disk_points(np.random.default_rng(0), 50)) == 0)


@pytest.mark.parametrize("coefficients", ["corrected", "printed"])
def test_T2_constant_lower_component(coefficients):
    z = random_disk_points(np.random.default_rng(1), 50)
    assert np.allclose(ratio_T2(biharmonic(0.3 - 0.4j), z, coefficients), 1.0)


def test_T2_three_components_at_origin():
    A = AlmansiMap(3, [const(0.1), PolyZZbar(), Z])
    assert ratio_T2(A, 0) == pytest.approx(0.4)


def test_T4_examples():
    assert ratio_T4(PolyZZbar(), Z, 2, 0.4j) == 0
    assert ratio_T4(const(0.25j), Z, 2, 0) == pytest.approx(0.5)
    assert ratio_T6 is ratio_T4


def test_T5_example():
    assert ratio_T5(biharmonic(0.2), 0) == pytest.approx(0.4)


def test_T2_corrected_counts_first_derivative_term():
    # G_1 = z contributes Lambda = 1 at k = 1; the printed coefficient (k-1) drops it
    A = AlmansiMap(2, [PolyZZbar.z(), Z])
    assert ratio_T2(A, 0.5, "printed") == pytest.approx(1.0)
    assert ratio_T2(A, 0.5, "corrected") == pytest.approx(2.0)


def test_T7_examples():
    L = LogPHarmonicMap(2, [HarmonicComponent((0,)), Z])
    z = random_disk_points(np.random.default_rng(2), 20)
    assert np.all(ratio_T7(L, z, "canonical") == 0)
    assert np.all(ratio_T7(L, z, "literal") == 0)
    c = 0.3 + 0.1j
    L = LogPHarmonicMap(2, [HarmonicComponent((c,)), Z])
    assert np.allclose(ratio_T7(L, z, "canonical"), 2 * abs(c))


def test_T7_literal_diverges_from_canonical():
    L = LogPHarmonicMap(2, [HarmonicComponent((0.3,)), Z])
    assert ratio_T7(L, 0, "literal") == pytest.approx(0.6 * math.exp(0.3), rel=1e-14)
    assert ratio_T7(L, 0, "literal") == pytest.approx(0.8099, abs=1e-4)
    assert ratio_T7(L, 0, "canonical") == pytest.approx(0.6)


def test_degeneracy_flags():
    # lambda of zbar + z vanishes identically
    A = AlmansiMap(2, [const(0.1), HarmonicComponent((0, 1), (0, 1))])
    assert ratio_T2(A, 0.3) == math.inf
    A = AlmansiMap(2, [PolyZZbar(), HarmonicComponent((0, 1), (0, 1))])
    assert ratio_T2(A, 0.3) == 0


def test_ratio_unknown_variant():
    with pytest.raises(ValueError):
        ratio_T2(biharmonic(0.1), 0, "other")


# supremum -----------------------------------------------------------------

def test_sup_constant():
    est = sup_disk(RatioKind.T2, biharmonic(0.3))
    assert est.value == pytest.approx(0.6)
    assert est.refined and not est.infinite


def test_sup_on_boundary_printed():
    A = AlmansiMap(2, [PolyZZbar.z(), Z])
    est = sup_disk(RatioKind.T2, A, coefficients="printed")
    assert est.value == pytest.approx(2.0, abs=1e-12)
    assert abs(est.arg_point) == pytest.approx(1.0)


def test_sup_on_boundary_corrected():
    A = AlmansiMap(2, [PolyZZbar.z(), Z])
    assert sup_disk(RatioKind.T2, A).value == pytest.approx(3.0, abs=1e-12)


def test_sup_infinite_at_interior_zero_of_lambda():
    # G_2 = z + zbar^2 / ... : lambda vanishes on |z| = 1/2 which the grid hits (r = 0.5 for nr = 9)
    G2 = HarmonicComponent((0, 1), (0, 0, 1))
    A = AlmansiMap(2, [const(0.1), G2])
    est = sup_disk(RatioKind.T2, A, SupPlan(nr=9, ntheta=16))
    assert est.infinite
    assert est.value == math.inf


def test_sup_plan_validation():
    with pytest.raises(ValueError):
        SupPlan(nr=4)
    with pytest.raises(ValueError):
        SupPlan(ntheta=8)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_sup_dominates_samples(seed):
    rng = np.random.default_rng(seed)
    A = AlmansiMap(2, [random_poly(rng, 3), Z])
    est = sup_disk(RatioKind.T2, A, SMALL)
    pts = random_disk_points(rng, 1000)
    vals = ratio_T2(A, pts)
    # a fresh sample above the estimate means the estimate missed a local maximum
    assert np.max(vals) <= est.value * (1 + 1e-6) + 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_refinement_is_monotone(seed):
    rng = np.random.default_rng(100 + seed)
    A = AlmansiMap(3, [random_poly(rng, 2), random_poly(rng, 3), Z])
    vals = [sup_disk(RatioKind.T2, A, SupPlan(nr=n, ntheta=4 * n)).value for n in (16, 32, 64)]
    assert vals[0] <= vals[1] * (1 + 1e-9)
    assert vals[1] <= vals[2] * (1 + 1e-9)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 5.0))
def test_homogeneity_of_G_scaling(seed, t):
    """Scaling the lower components scales ratio T1/T2 linearly."""
    rng = np.random.default_rng(seed)
    G = random_poly(rng, 3)
    A, B = AlmansiMap(2, [G, Z]), AlmansiMap(2, [G * t, Z])
    z = random_disk_points(rng, 200)
    assert np.allclose(ratio_T2(B, z), t * ratio_T2(A, z), rtol=1e-12)
    assert np.allclose(ratio_T1(G * t, Z, 2, z), t * ratio_T1(G, Z, 2, z), rtol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 2 * np.pi))
def test_rotation_invariance(seed, alpha):
    u = cmath.exp(1j * alpha)
    rng = np.random.default_rng(seed)
    comps = [random_poly(rng, 2), random_poly(rng, 3)]
    A = AlmansiMap(3, comps + [Z])
    B = AlmansiMap(3, [c * u for c in comps] + [Z.scaled(u)])
    z = random_disk_points(rng, 200)
    for kind in ("corrected", "printed"):
        assert np.allclose(ratio_T2(A, z, kind), ratio_T2(B, z, kind), rtol=1e-12)
        # lambda_f can come close to zero, so T5 gets a looser relative tolerance
        assert np.allclose(ratio_T5(A, z, kind), ratio_T5(B, z, kind), rtol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_T7_canonical_is_T2_of_logs(seed):
    rng = np.random.default_rng(seed)
    logs = [HarmonicComponent(tuple(rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)),
                              tuple(rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)))
            for _ in range(2)]
    L = LogPHarmonicMap(3, logs + [Z])
    z = random_disk_points(rng, 200)
    assert np.array_equal(ratio_T7(L, z, "canonical"), ratio_T2(AlmansiMap(3, logs + [Z]), z))


# certify ------------------------------------------------------------------

def test_certify_convex_T2():
    rep = certify(biharmonic(0.3), RatioKind.T2, "convex")
    assert rep.sup.value == pytest.approx(0.6)
    assert rep.threshold == 1.0
    assert rep.threshold_basis == "convexUnit"
    assert rep.verdict == "certified"
    assert rep.margin == pytest.approx(0.4)


def test_certify_oracle_confirms_T2_example():
    assert oracle.univalence_verdict(biharmonic(0.3).lower(), n=256).passed


def test_certify_user_M():
    rep = certify(biharmonic(0.3), RatioKind.T2, 2.0)
    assert rep.threshold == 0.5
    assert rep.threshold_basis == "userM"
    assert rep.verdict == "not-certified"


def test_certify_T6_denominator_is_lambda_f():
    # lambda_f = |1 + 0.2 zbar| - 0.2|z| is smallest at z = -1, where it equals 0.6
    t = TwoTermMap(2, const(0.2), Z)
    rep = certify(t, RatioKind.T6, "convex")
    assert rep.sup.value == pytest.approx(0.4 / 0.6, abs=1e-12)
    assert rep.sup.arg_point == pytest.approx(-1)
    assert rep.threshold == 0.5
    assert rep.verdict == "not-certified"


def test_certify_T6_small_G():
    t = TwoTermMap(2, const(0.1), Z)
    rep = certify(t, RatioKind.T6, "convex")
    assert rep.sup.value == pytest.approx(0.2 / 0.8, abs=1e-12)
    assert rep.verdict == "certified"


def test_thresholds():
    assert threshold_for(RatioKind.T1, 2) == 0.5
    assert threshold_for(RatioKind.T6, 2) == 0.25
    assert threshold_for(RatioKind.T5, 2) == 0.25
    assert threshold_for(RatioKind.T5, 2, as_stated=True) == 0.5
    assert threshold_for(RatioKind.T7_CANONICAL, 1) == 1.0


def test_certify_degenerate():
    A = AlmansiMap(2, [const(0.1), HarmonicComponent((0, 1), (0, 0, 1))])
    rep = certify(A, RatioKind.T2, 1.0, SupPlan(nr=9, ntheta=16))
    assert rep.verdict == "degenerate"
    assert rep.margin == -math.inf


def test_certify_estimate_is_heuristic():
    rep = certify(biharmonic(0.3), RatioKind.T2, "estimate", SMALL, pairs=50)
    assert rep.threshold_basis == "estimatedM"
    assert rep.verdict == "heuristic-pass"


def test_certify_auto_non_simple_reference():
    A = AlmansiMap(2, [const(0.01), HarmonicComponent((0, 0, 1))])
    rep = certify(A, RatioKind.T2, "auto", SMALL)
    assert rep.M == math.inf
    assert rep.verdict != "certified"


def test_convex_check_failure():
    A = AlmansiMap(2, [const(0.01), HarmonicComponent((0, 0, 1))])
    with pytest.raises(ConvexCheckError):
        certify(A, RatioKind.T2, "convex", SMALL)


def test_invalid_M():
    with pytest.raises(ValueError):
        certify(biharmonic(0.1), RatioKind.T2, 0.5)


@pytest.mark.parametrize("kind, data", [
    (RatioKind.T1, AlmansiMap(3, [const(0.1), const(0.1), Z])),
    (RatioKind.T2, LogPHarmonicMap(1, [Z])),
    (RatioKind.T7_CANONICAL, biharmonic(0.1)),
    (RatioKind.T2, AlmansiMap(2, [const(0.1), PolyZZbar([(1, 1, 1)])])),
])
def test_shape_mismatch(kind, data):
    with pytest.raises(ShapeMismatchError):
        certify(data, kind, 1.0, SMALL)


def test_report_invariants():
    for basis in ("convex", 1.5, "estimate"):
        rep = certify(biharmonic(0.3), RatioKind.T2, basis, SMALL, pairs=50)
        if rep.verdict == "certified":
            assert rep.margin > 0 and rep.threshold_basis in ("userM", "convexUnit")
        if rep.verdict == "heuristic-pass":
            assert rep.margin > 0 and rep.threshold_basis == "estimatedM"


# the printed T2 coefficient is not sufficient -----------------------------

def test_printed_T2_certifies_a_folding_map():
    """0.4|z|^2 z^2 + z: printed sup 0.8 < 1, yet J < 0 near z = -1."""
    A = AlmansiMap(2, [PolyZZbar([(2, 0, 0.4)]), Z])
    printed = certify(A, RatioKind.T2, "convex", coefficients="printed")
    assert printed.sup.value == pytest.approx(0.8)
    assert printed.verdict == "certified"
    jac = oracle.jacobian_scan(A.lower(), 128)
    assert jac.min_J < 0
    corrected = certify(A, RatioKind.T2, "convex")
    assert corrected.verdict == "not-certified"
