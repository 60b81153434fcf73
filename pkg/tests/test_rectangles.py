import math

import numpy as np
import pytest

from frontkit.kernels import DelayKernel
from frontkit.models import (LotkaVolterraModel, NicholsonModel, ZouModel,
                             nicholson_f, nicholson_square, positive_equilibrium)
from frontkit.rectangles import (HypothesisViolatedError, NotContractingError,
                                 find_lv_epsilon, limit_verdict, lv_family,
                                 nicholson_family, verify_strict_contraction,
                                 zou_family)
from frontkit.waves import WaveProfile

K1 = math.exp(3.0 - math.e)


def _const_profile(xi, state):
    vals = np.repeat(np.asarray(state, dtype=float)[:, None], len(xi), axis=1)
    tails = tuple((float(s), 0.0) for s in state)
    return WaveProfile(xi, vals, tails, tuple(float(s) for s in state), 1.0)


def test_lv_family_endpoints(benchmark_model):
    fam = lv_family(benchmark_model, 0.05)
    u_star = positive_equilibrium(benchmark_model).positive
    assert fam.a(1.0) == pytest.approx(u_star)
    assert fam.b(1.0) == pytest.approx(u_star)
    assert fam.a(0.0) == pytest.approx([0.0, 0.0])
    assert fam.b(0.0) == pytest.approx(benchmark_model.carrying_caps + 0.05)


def test_lv_family_midpoint(benchmark_model):
    fam = lv_family(benchmark_model, 0.05)
    assert fam.a(0.5) == pytest.approx([0.3830, 0.2128], abs=5e-5)


def test_lv_family_refuses_without_weak_coupling():
    bad = LotkaVolterraModel.undelayed((1.0, 1.0), (1.0, 1.0),
                                       ((1.0, 1.5), (1.5, 1.0)))
    with pytest.raises(NotContractingError):
        lv_family(bad, 0.05)
    fam = lv_family(bad, 0.05, require_weak_coupling=False)
    assert fam.nesting_ok()


def test_nicholson_family_endpoints():
    fam = nicholson_family(0.5)
    assert fam.a(1.0) == pytest.approx([2.0])
    assert fam.b(1.0) == pytest.approx([nicholson_f(2.0)])
    # at s = 0: a = k1 + eps*h(0) and b = f(k1) = f(f(e))
    h0 = 0.5 * (nicholson_square(K1) - K1)
    assert h0 > 0
    assert fam.a(0.0) == pytest.approx([K1 + 0.5 * h0])
    assert fam.b(0.0) == pytest.approx([nicholson_square(math.e)])
    # ordering chain at the outer box
    assert fam.a(0.0)[0] < nicholson_square(K1) < nicholson_square(math.e)


def test_nicholson_family_epsilon_guard():
    with pytest.raises(NotContractingError):
        nicholson_family(1.5)
    with pytest.raises(NotContractingError):
        nicholson_family(-0.1)


def test_zou_family_values():
    fam = zou_family(1.0)
    assert fam.a(1.0) == pytest.approx([1.0]) and fam.b(1.0) == pytest.approx([1.0])
    assert fam.a(0.0) == pytest.approx([0.0]) and fam.b(0.0) == pytest.approx([2.0])
    assert fam.a(0.5) == pytest.approx([0.5]) and fam.b(0.5) == pytest.approx([1.5])


def test_families_nest(benchmark_model):
    assert lv_family(benchmark_model, 0.1).nesting_ok()
    assert nicholson_family(0.5).nesting_ok()
    assert zou_family(2.0).nesting_ok()


def test_lv_contraction_with_searched_epsilon(benchmark_model):
    eps = find_lv_epsilon(benchmark_model)
    fam = lv_family(benchmark_model, eps)
    report = verify_strict_contraction(fam, benchmark_model)
    assert report.passed, report.format()


def test_lv_contraction_fails_without_weak_coupling():
    bad = LotkaVolterraModel.undelayed((1.0, 1.0), (1.0, 1.0),
                                       ((1.0, 1.5), (1.5, 1.0)))
    fam = lv_family(bad, 0.05, require_weak_coupling=False)
    report = verify_strict_contraction(fam, bad, face_samples=200)
    assert not report.passed


def test_nicholson_faces_match_analytic_margin():
    eps = 0.5
    fam = nicholson_family(eps)
    model = NicholsonModel(kernel=DelayKernel.point_mass(-1.0))
    ys = np.linspace(0.1, 0.9, 9)
    report = verify_strict_contraction(fam, model, y_samples=ys, face_samples=500)
    assert report.passed, report.format()
    for k, y in enumerate(ys):
        base = y * 2.0 + (1.0 - y) * K1
        h = 0.5 * (nicholson_square(base) - base)
        # worst a-face value is -a + f(b) = (2 - eps) h, attained at a corner
        assert report.a_face_min[k, 0] == pytest.approx((2.0 - eps) * h, rel=1e-9)


def test_zou_faces_signs():
    fam = zou_family(1.0)
    model = ZouModel()
    report = verify_strict_contraction(fam, model, face_samples=500)
    assert report.passed, report.format()
    # corner values: a-face minimum is s(1-s)*r, b-face maximum -s k (1-s)
    for k, y in enumerate(report.y_samples):
        assert report.a_face_min[k, 0] == pytest.approx(y * (1.0 - y), rel=1e-9)
        assert report.b_face_max[k, 0] == pytest.approx(-y * (1.0 - y), rel=1e-9)


def test_lv_margins_pinch_linearly(benchmark_model):
    eps = 0.05
    fam = lv_family(benchmark_model, eps)
    report = verify_strict_contraction(fam, benchmark_model,
                                       y_samples=[0.9, 0.99], face_samples=100)
    m9, m99 = report.a_face_min[:, 0]
    # margins scale like y (1 - y): the 0.99 margin is ~10x smaller
    assert m99 < m9
    assert m99 / (0.99 * 0.01) == pytest.approx(m9 / (0.9 * 0.1), rel=0.25)


def test_face_sampling_deterministic(benchmark_model):
    fam = lv_family(benchmark_model, 0.05)
    r1 = verify_strict_contraction(fam, benchmark_model, face_samples=300, seed=42)
    r2 = verify_strict_contraction(fam, benchmark_model, face_samples=300, seed=42)
    assert np.array_equal(r1.a_face_min, r2.a_face_min)
    assert np.array_equal(r1.b_face_max, r2.b_face_max)


def test_limit_verdict_constant_target(benchmark_model):
    fam = lv_family(benchmark_model, 0.05)
    u_star = positive_equilibrium(benchmark_model).positive
    xi = np.linspace(-10.0, 10.0, 101)
    ok, _, trace = limit_verdict(_const_profile(xi, u_star), fam)
    assert ok
    assert np.all(trace >= 1.0 - 1e-9)


def test_limit_verdict_interior_constant(benchmark_model):
    fam = lv_family(benchmark_model, 0.05)
    # state on the a-face at y = 0.3: largest admissible y is exactly 0.3
    state = fam.a(0.3) + 1e-9
    xi = np.linspace(-10.0, 10.0, 101)
    ok, _, trace = limit_verdict(_const_profile(xi, state), fam)
    assert not ok
    assert trace[-1] == pytest.approx(0.3, abs=1e-6)


def test_limit_verdict_rejects_escaping_profile(benchmark_model):
    fam = lv_family(benchmark_model, 0.05)
    xi = np.linspace(-10.0, 10.0, 101)
    too_big = 2.0 * (benchmark_model.carrying_caps + 1.0)
    with pytest.raises(HypothesisViolatedError):
        limit_verdict(_const_profile(xi, too_big), fam)


def test_limit_verdict_on_converged_wave(benchmark_solution, benchmark_model):
    profile, _ = benchmark_solution
    fam = lv_family(benchmark_model, find_lv_epsilon(benchmark_model))
    ok, xi_tr, trace = limit_verdict(profile, fam)
    assert ok
    # the trace climbs from the leading edge toward 1
    assert trace[0] < 0.2
    assert trace[-1] > 0.98
