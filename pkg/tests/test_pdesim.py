import numpy as np
import pytest

from frontkit.models import LotkaVolterraModel, positive_equilibrium
from frontkit.pdesim import (InapplicableError, NoFrontError,
                             SimulationDivergedError, StabilityError,
                             advection_check, nonexistence_probe, simulate,
                             spreading_speed)
from frontkit.waves import WaveProfile


def _const_history(state):
    state = np.asarray(state, dtype=float)
    return lambda xs, s: np.repeat(state[:, None], len(xs), axis=1)


def _bump_history(amp=0.5, width=2.0):
    return lambda xs, s: (amp * np.exp(-(xs / width) ** 2))[None, :]


def test_equilibrium_is_stationary(benchmark_model):
    u_star = positive_equilibrium(benchmark_model).positive
    field = simulate(benchmark_model, _const_history(u_star), horizon=2.0,
                     x_span=(-10.0, 10.0), dx=0.1)
    assert np.max(np.abs(field.snapshots[-1] - u_star[:, None])) < 1e-8


def test_zero_is_stationary(benchmark_model):
    field = simulate(benchmark_model, _const_history([0.0, 0.0]), horizon=2.0,
                     x_span=(-10.0, 10.0), dx=0.1)
    assert np.max(np.abs(field.snapshots[-1])) == 0.0


def test_equilibrium_stationary_with_delay(benchmark_delayed_model):
    u_star = positive_equilibrium(benchmark_delayed_model).positive
    field = simulate(benchmark_delayed_model, _const_history(u_star), horizon=2.0,
                     x_span=(-5.0, 5.0), dx=0.1)
    assert np.max(np.abs(field.snapshots[-1] - u_star[:, None])) < 1e-8


def test_comparison_preserves_order():
    m = LotkaVolterraModel.fisher(1.0, 1.0)

    def lo_hist(xs, s):
        return (0.3 * np.exp(-(xs / 2.0) ** 2))[None, :]

    def hi_hist(xs, s):
        return (0.3 * np.exp(-(xs / 2.0) ** 2) + 0.2)[None, :]

    lo = simulate(m, lo_hist, horizon=4.0, x_span=(-20.0, 20.0), dx=0.1)
    hi = simulate(m, hi_hist, horizon=4.0, x_span=(-20.0, 20.0), dx=0.1)
    assert np.all(hi.snapshots >= lo.snapshots - 1e-10)


def test_comparison_preserves_order_with_delay(benchmark_delayed_model):
    # ordered initial histories (not just initial data) stay ordered
    caps = benchmark_delayed_model.carrying_caps

    def lo_hist(xs, s):
        base = 0.2 * np.exp(-(xs / 3.0) ** 2) * (1.0 + 0.1 * s)
        return np.stack([base, 0.5 * base])

    def hi_hist(xs, s):
        lo = lo_hist(xs, s)
        return lo + 0.1

    lo = simulate(benchmark_delayed_model, lo_hist, horizon=3.0,
                  x_span=(-10.0, 10.0), dx=0.2)
    hi = simulate(benchmark_delayed_model, hi_hist, horizon=3.0,
                  x_span=(-10.0, 10.0), dx=0.2)
    assert np.all(hi.snapshots >= lo.snapshots - 1e-10)
    assert np.max(hi.snapshots) <= caps.max() + 1e-8


def test_box_invariance(benchmark_model):
    caps = benchmark_model.carrying_caps
    rng = np.random.default_rng(0)

    def hist(xs, s):
        base = 0.5 + 0.5 * np.sin(np.outer([1.0, 2.0], xs))
        return base * caps[:, None]

    field = simulate(benchmark_model, hist, horizon=3.0, x_span=(-10.0, 10.0), dx=0.1)
    assert field.min_value >= -1e-8
    assert np.max(field.snapshots) <= caps.max() + 1e-8


def test_grid_refinement_order():
    m = LotkaVolterraModel.fisher(1.0, 1.0)
    T = 1.0
    sols = {}
    for dx in (0.2, 0.1, 0.05):
        f = simulate(m, _bump_history(), horizon=T, x_span=(-10.0, 10.0), dx=dx,
                     dt=0.2 * dx * dx, snapshot_dt=T)
        sols[dx] = f.snapshots[-1][0]
    # compare on the coarse nodes
    d1 = np.max(np.abs(sols[0.2] - sols[0.1][::2]))
    d2 = np.max(np.abs(sols[0.1][::2] - sols[0.05][::4][: len(sols[0.2])]))
    order = np.log2(d1 / d2)
    assert order >= 1.8


def test_translation_invariance():
    m = LotkaVolterraModel.fisher(1.0, 1.0)
    shift = 1.0  # 10 cells at dx = 0.1
    a = simulate(m, _bump_history(), horizon=2.0, x_span=(-20.0, 20.0), dx=0.1,
                 snapshot_dt=2.0)
    b = simulate(m, lambda xs, s: _bump_history()(xs - shift, s), horizon=2.0,
                 x_span=(-20.0, 20.0), dx=0.1, snapshot_dt=2.0)
    k = int(round(shift / 0.1))
    interior = slice(k + 5, -5)
    assert np.max(np.abs(b.snapshots[-1][0][interior]
                         - a.snapshots[-1][0][interior.start - k:-5 - k])) < 1e-10


def test_stability_refusal():
    m = LotkaVolterraModel.fisher(1.0, 1.0)
    with pytest.raises(StabilityError) as err:
        simulate(m, _bump_history(), horizon=1.0, x_span=(-5.0, 5.0), dx=0.1,
                 dt=0.1)
    assert err.value.suggested_dt == pytest.approx(0.1 * 0.1 / 2.0)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_detected():
    m = LotkaVolterraModel.fisher(1.0, 1.0)
    with pytest.raises(SimulationDivergedError):
        simulate(m, _const_history([1e160]), horizon=1.0, x_span=(-5.0, 5.0), dx=0.5)


def test_spreading_speed_fisher_small():
    m = LotkaVolterraModel.fisher(1.0, 1.0)
    field = simulate(m, _bump_history(), horizon=25.0, x_span=(-60.0, 60.0), dx=0.1)
    speed = spreading_speed(field, 0.5, (10.0, 25.0))
    assert speed == pytest.approx(2.0, rel=0.06)


def test_spreading_speed_stationary_zero_slope(benchmark_model):
    u_star = positive_equilibrium(benchmark_model).positive
    field = simulate(benchmark_model, _const_history(u_star), horizon=5.0,
                     x_span=(-10.0, 10.0), dx=0.1)
    assert spreading_speed(field, 0.5 * u_star[0], (0.0, 5.0)) == pytest.approx(0.0)


def test_spreading_speed_no_front():
    m = LotkaVolterraModel.fisher(1.0, 1.0)
    field = simulate(m, _const_history([0.0]), horizon=2.0,
                     x_span=(-10.0, 10.0), dx=0.1)
    with pytest.raises(NoFrontError):
        spreading_speed(field, 0.5, (0.0, 2.0))


def test_advection_equilibrium_profile(benchmark_model):
    u_star = positive_equilibrium(benchmark_model).positive
    xi = np.linspace(-30.0, 30.0, 601)
    vals = np.repeat(u_star[:, None], len(xi), axis=1)
    prof = WaveProfile(xi, vals, ((u_star[0], 0.0), (u_star[1], 0.0)),
                       (u_star[0], u_star[1]), 1.0)
    rep = advection_check(prof, benchmark_model, T=2.0, dx=0.1)
    assert rep.shape_error < 1e-7


def test_advection_detects_perturbation(benchmark_solution, benchmark_model):
    profile, _ = benchmark_solution
    bad = profile.values.copy()
    mid = bad.shape[1] // 2
    bad[0, mid - 100:mid + 100] += 0.1
    prof = WaveProfile.with_matched_tails(profile.xi, bad,
                                          [r for _, r in profile.left_tail], 1.0)
    rep = advection_check(prof, benchmark_model, T=2.0, dx=0.1)
    assert rep.shape_error > 0.02


def test_advection_rigid_with_delay(benchmark_delayed_model):
    # profile seeded as its own history must advect rigidly through the
    # history ring, large delay included
    from frontkit.waves import solve_wave
    profile, report = solve_wave(benchmark_delayed_model, 1.0)
    assert report.converged
    rep = advection_check(profile, benchmark_delayed_model, T=10.0, dx=0.05)
    assert rep.shape_error < 2e-2
    assert abs(rep.drift_error) < 0.02 * rep.expected_shift


def test_probe_inapplicable_at_threshold(benchmark_model):
    with pytest.raises(InapplicableError):
        nonexistence_probe(benchmark_model, benchmark_model.wave_speed_threshold)


def test_probe_near_threshold(benchmark_model):
    c = 0.99 * benchmark_model.wave_speed_threshold
    probe = nonexistence_probe(benchmark_model, c, window=(60.0, 180.0))
    assert probe.verdict == "nonexistence-consistent"
    assert probe.complex_roots
    assert probe.measured_speed > c
