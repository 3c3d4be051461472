"""Acceptance gate: one PASS/FAIL line per criterion, printed even under output capture.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import math
import time

import numpy as np
import pytest

from uniharm import cli, criteria, geometry, oracle
from uniharm.core import AlmansiMap, HarmonicComponent, LogPHarmonicMap, PolyZZbar, TwoTermMap, metrics
from uniharm.criteria import RatioKind
from uniharm.mapspec import canonical_dumps, parse_spec

from .conftest import CORPUS, Z, random_disk_points, random_poly
from .test_geometry import L_SHAPE, in_closed_L, one_bend_shortest


@pytest.fixture
def announce(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        return ok
    return emit


def _fd(P, z, h=1e-6):
    dx = (P(z + h) - P(z - h)) / (2 * h)
    dy = (P(z + 1j * h) - P(z - 1j * h)) / (2 * h)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


# 1 ---------------------------------------------------------------------------

def t2_instance(i):
    rng = np.random.default_rng([1, i])
    p = int(rng.integers(2, 4))
    comps = [random_poly(rng, int(rng.integers(0, 5))) for _ in range(p - 1)]
    s = criteria.sup_disk(RatioKind.T2, AlmansiMap(p, comps + [Z])).value
    return AlmansiMap(p, [c * (0.9 / s) for c in comps] + [Z])


def test_1_T2_soundness_sweep(announce):
    start = time.perf_counter()
    collisions, other, uncertified, worst = 0, 0, 0, 0.0
    for i in range(200):
        A = t2_instance(i)
        rep = criteria.certify(A, RatioKind.T2, "convex")
        worst = max(worst, rep.sup.value)
        uncertified += rep.verdict != "certified"
        v = oracle.univalence_verdict(A.lower(), 256, 1e-3, 1e-6)
        collisions += v.status == "collision"
        other += v.status not in ("pass", "collision")
    elapsed = time.perf_counter() - start
    ok = collisions == 0 and other == 0 and uncertified == 0 and worst <= 0.9 * (1 + 1e-9) \
        and elapsed <= 120
    assert announce(1, "T2 soundness sweep", ok,
                    f"200 instances, max sup {worst:.12g}, uncertified {uncertified}, "
                    f"collisions {collisions}, other failures {other}, {elapsed:.1f}s (limit 120s)")


# 2 ---------------------------------------------------------------------------

def t6_instance(i):
    """``f = |z|^(2(p-1)) G + z`` with sup T1 = 0.3, which forces sup T6 <= 0.3/0.7."""
    rng = np.random.default_rng([2, i])
    p = int(rng.integers(2, 4))
    G = random_poly(rng, int(rng.integers(0, 4)))
    s = criteria.sup_disk(RatioKind.T1, TwoTermMap(p, G, Z)).value
    return p, G * (0.3 / s)


def test_2_T6_stable_sweep(announce):
    samples = oracle.default_a_samples(include_zero=False)
    runs, collisions, failures, worst = 0, 0, 0, 0.0
    for i in range(50):
        p, G = t6_instance(i)
        sup = criteria.sup_disk(RatioKind.T6, TwoTermMap(p, G, Z)).value
        assert sup <= 0.45
        worst = max(worst, sup)
        for _, v in oracle.stable_sweep(G, Z, p, samples):
            runs += 1
            collisions += v.status == "collision"
            failures += not v.passed
    ok = runs == 800 and failures == 0
    assert announce(2, "T6 stable sweep", ok,
                    f"50 instances (max sup T6 {worst:.4f}), {runs} oracle runs, "
                    f"collisions {collisions}, non-pass {failures}")


# 3 ---------------------------------------------------------------------------

def test_3_violation_sensitivity(announce):
    A = AlmansiMap(2, [PolyZZbar.const(5.0), Z])
    f = A.lower()
    rep = criteria.certify(A, RatioKind.T2, "convex")
    v = oracle.injectivity_scan(f, 256, 1e-3, 1e-6)
    z1, z2 = v.witness if v.status == "collision" else (0j, 0j)
    recheck = abs(f(z1) - f(z2))
    # every collision of 5(x^2 + y^2) + x + iy pairs y1 = y2 with x1 + x2 = -0.2
    family = abs(z1.imag - z2.imag) < 1e-9 and abs(z1.real + z2.real + 0.2) < 1e-9
    ok = (rep.sup.value == pytest.approx(10.0) and rep.verdict == "not-certified"
          and v.status == "collision" and recheck <= 1e-12 and family
          and f(0) == 0 and abs(f(-0.2)) <= 1e-12)
    assert announce(3, "violation sensitivity", ok,
                    f"sup {rep.sup.value:.6g} ({rep.verdict}); oracle {v.status} at "
                    f"({z1:.6f}, {z2:.6f}) residual {recheck:.2e}; f(0)=0, |f(-0.2)|={abs(f(-0.2)):.1e}")


# 4 ---------------------------------------------------------------------------

def test_4_counterexample(announce):
    spec = parse_spec(CORPUS / "logharmonic_z4.json")
    f = spec.to_map()
    v = oracle.univalence_verdict(f)
    inj = oracle.injectivity_scan(f)
    quarter = False
    if inj.status == "collision":
        z1, z2 = inj.witness
        quarter = min(abs(z2 / z1 - u) for u in (1j, -1, -1j)) < 1e-6
    ok = not v.passed and inj.status == "collision" and quarter
    assert announce(4, "|z|^4 z^4 flagged", ok,
                    f"univalence_verdict {v.status} ({v.params.get('reason', '')}); injectivity "
                    f"{inj.status} with z2/z1 a nontrivial fourth root of unity: {quarter}")


# 5 ---------------------------------------------------------------------------

def test_5_wirtinger(announce):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        degree = int(rng.integers(1, 7))
        terms = [(int(m), int(n), complex(*rng.uniform(-1, 1, 2)))
                 for m, n in rng.integers(0, degree + 1, size=(int(rng.integers(1, 8)), 2))
                 if m + n <= degree]
        P = PolyZZbar(terms or [(degree, 0, 1.0)])
        z = random_disk_points(rng, 10, 0.95)
        exact = P.derivatives(z)
        approx = _fd(P, z)
        for e, a in zip(exact, approx):
            worst = max(worst, float(np.max(np.abs(e - a) / np.maximum(np.abs(a), 1.0))))
    ok = worst <= 1e-6
    assert announce(5, "Wirtinger vs finite differences", ok,
                    f"1000 polynomials x 10 points, max relative error {worst:.2e} (limit 1e-6)")


# 6 ---------------------------------------------------------------------------

def test_6_metric_identity(announce):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        P = random_poly(rng, int(rng.integers(1, 5)))
        for z in random_disk_points(rng, 100):
            m = metrics(P, complex(z))
            worst = max(worst, abs(m.J - m.lam * m.Lam) / max(abs(m.J), 1.0))
    ok = worst <= 1e-12
    assert announce(6, "J = lambda * Lambda", ok,
                    f"10^4 points, max relative deviation {worst:.2e} (limit 1e-12)")


# 7 ---------------------------------------------------------------------------

def test_7_geometry(announce):
    disk = geometry.connectivity_estimate(geometry.boundary_polyline(Z, 2048), 2000, 0)
    L = geometry.connectivity_estimate(geometry.BoundaryPolyline.from_points(L_SHAPE), 2000, 0)
    s, t = L.witness_pair
    brute = one_bend_shortest(s, t, in_closed_L)
    ok = (1.0 <= disk.Mhat <= 1.0 + 1e-3 and L.Mhat >= 1.414 - 1e-3 and 1 + 1j in L.path
          and abs(L.path_length - brute) <= 1e-3)
    assert announce(7, "linear connectivity", ok,
                    f"disk Mhat {disk.Mhat:.9f}; L-shape Mhat {L.Mhat:.6f} witness {s}->{t} "
                    f"via {L.path[1:-1]}, brute-force path {brute:.6f}")


# 8 ---------------------------------------------------------------------------

def test_8_T7_reduction(announce):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(10):
        p = int(rng.integers(2, 5))
        logs = [HarmonicComponent(tuple(rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)),
                                  tuple(rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)))
                for _ in range(p - 1)]
        top = HarmonicComponent((0, 1, complex(*rng.uniform(-0.2, 0.2, 2))), (0, 0.2))
        L = LogPHarmonicMap(p, logs + [top])
        z = random_disk_points(rng, 1000)
        a = criteria.ratio_T7(L, z, "canonical")
        b = criteria.ratio_T2(AlmansiMap(p, logs + [top]), z)
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1.0))))
    ok = worst <= 1e-12
    assert announce(8, "T7 canonical equals T2 on logs", ok,
                    f"10^4 points, max deviation {worst:.2e} (limit 1e-12)")


# 9 ---------------------------------------------------------------------------

def test_9_p1_reduction(announce):
    bare = [HarmonicComponent((0, 1), (0,)),
            HarmonicComponent((0, 1), (0, 0.3)),
            HarmonicComponent((0.1 + 0.2j, 1, 0.3j), (0, 0.2 - 0.1j, 0.05)),
            HarmonicComponent((0, 0, 1), (0,))]
    mismatches = 0
    for G in bare:
        outs = []
        for f in (G, AlmansiMap(1, [G])):
            rep = criteria.certify(f, RatioKind.T2, "auto", pairs=200)
            v = oracle.univalence_verdict(f)
            outs.append(canonical_dumps([cli.criterion_obj(rep), cli.verdict_obj(v)]).encode())
        mismatches += outs[0] != outs[1]
    ok = mismatches == 0
    assert announce(9, "p=1 reduction byte match", ok,
                    f"{len(bare)} harmonic maps, certify(T2) + univalence_verdict, "
                    f"mismatches {mismatches}")


# 10 --------------------------------------------------------------------------

def _corpus_outputs(workers):
    out = {}
    for path in sorted(CORPUS.glob("*.json")):
        spec = parse_spec(path)
        f = spec.to_map()
        kind = RatioKind.T7_CANONICAL if spec.kind == "log-p-harmonic" else RatioKind.T2
        rep = criteria.certify(f, kind, "auto", workers=workers)
        v = oracle.univalence_verdict(f, workers=workers)
        out[path.stem] = canonical_dumps([cli.criterion_obj(rep), cli.verdict_obj(v)]).encode()
    return out


def test_10_determinism(announce):
    runs = {w: _corpus_outputs(w) for w in (1, 4, 8)}
    differing = [k for k in runs[1] if not (runs[1][k] == runs[4][k] == runs[8][k])]
    ok = not differing and len(runs[1]) >= 10
    assert announce(10, "determinism across 1/4/8 workers", ok,
                    f"{len(runs[1])} corpus maps, differing outputs: {differing or 'none'}")


# informational ---------------------------------------------------------------

def test_printed_T2_coefficient_is_not_sufficient(announce):
    """Not a criterion: the same sweep as criterion 1 under the printed Lambda coefficient."""
    bad = 0
    for i in range(40):
        rng = np.random.default_rng([3, i])
        comps = [random_poly(rng, int(rng.integers(1, 5)))]
        A0 = AlmansiMap(2, comps + [Z])
        s = criteria.sup_disk(RatioKind.T2, A0, coefficients="printed").value
        A = AlmansiMap(2, [comps[0] * (0.9 / s), Z])
        bad += oracle.jacobian_scan(A.lower(), 128).min_J <= 0
    with_fold = oracle.jacobian_scan(AlmansiMap(2, [PolyZZbar([(2, 0, 0.4)]), Z]).lower()).min_J
    announce("i", "printed T2 coefficient (informational)", True,
             f"{bad}/40 instances with printed sup 0.9 have J <= 0 somewhere; "
             f"0.4|z|^2 z^2 + z: printed sup 0.8, min J {with_fold:.3f}")
    assert with_fold < 0
