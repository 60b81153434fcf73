import numpy as np
import pytest

from frontkit.kernels import DelayKernel, KernelError


def test_point_mass_dirac_identity():
    g = lambda s: np.sin(s) + 3.0
    assert DelayKernel.point_mass(0.0).stieltjes(g) == pytest.approx(g(0.0), abs=0)
    k = DelayKernel.point_mass(-2.0)
    assert k.tau == 2.0
    assert k.stieltjes(g) == pytest.approx(g(-2.0), abs=0)


def test_point_mass_has_unit_mass():
    k = DelayKernel.point_mass(-0.5, tau=1.0)
    assert k.weights.sum() == 1.0


def test_point_mass_outside_domain():
    with pytest.raises(KernelError):
        DelayKernel.point_mass(0.5)
    with pytest.raises(KernelError):
        DelayKernel.point_mass(-2.0, tau=1.0)


def test_uniform_single_midpoint():
    k = DelayKernel.uniform_quadrature(1.0, 1)
    assert k.atoms == ((-0.5, 1.0),)


def test_uniform_two_midpoints():
    k = DelayKernel.uniform_quadrature(1.0, 2)
    assert k.locations == pytest.approx([-0.75, -0.25])
    assert k.weights == pytest.approx([0.5, 0.5])


def test_uniform_mean_matches_density():
    # mean of the uniform density on [-2, 0] is -1
    k = DelayKernel.uniform_quadrature(2.0, 1000)
    assert k.stieltjes(lambda s: s) == pytest.approx(-1.0, abs=1e-6)


def test_uniform_needs_atoms():
    with pytest.raises(KernelError):
        DelayKernel.uniform_quadrature(1.0, 0)


def test_stieltjes_hand_sum():
    k = DelayKernel.from_atoms([(-1.0, 0.5), (0.0, 0.5)])
    assert k.stieltjes(lambda s: s) == pytest.approx(-0.5, abs=0)


def test_stieltjes_constant_is_mass():
    k = DelayKernel.uniform_quadrature(3.0, 7)
    assert k.stieltjes(lambda s: 4.25) == pytest.approx(4.25, abs=1e-15)


def test_stieltjes_linear_in_integrand():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = rng.integers(1, 6)
        locs = np.sort(rng.uniform(-2.0, 0.0, n))
        locs = np.unique(locs)
        w = rng.uniform(0.1, 1.0, len(locs))
        w /= w.sum()
        k = DelayKernel.from_atoms(list(zip(locs, w)))
        coeffs1 = rng.uniform(-2, 2, 4)
        coeffs2 = rng.uniform(-2, 2, 4)
        alpha = rng.uniform(-3, 3)
        g1 = lambda s: np.polyval(coeffs1, s)
        g2 = lambda s: np.polyval(coeffs2, s)
        combined = k.stieltjes(lambda s: alpha * g1(s) + g2(s))
        assert combined == pytest.approx(alpha * k.stieltjes(g1) + k.stieltjes(g2),
                                         abs=1e-12)


def test_stieltjes_monotone():
    rng = np.random.default_rng(11)
    k = DelayKernel.uniform_quadrature(2.0, 9)
    lo = rng.uniform(-1, 1, 9)
    hi = lo + rng.uniform(0, 1, 9)
    table_lo = dict(zip(k.locations, lo))
    table_hi = dict(zip(k.locations, hi))
    assert k.stieltjes(lambda s: table_lo[s]) <= k.stieltjes(lambda s: table_hi[s])


def test_diagonal_split_pure_instantaneous():
    a, rest = DelayKernel.point_mass(0.0).diagonal_split()
    assert a == 1.0 and rest == ()


def test_diagonal_split_no_zero_atom():
    k = DelayKernel.point_mass(-1.5)
    a, rest = k.diagonal_split()
    assert a == 0.0 and rest == k.atoms


def test_diagonal_split_mixed():
    k = DelayKernel.from_atoms([(-1.0, 0.4), (0.0, 0.6)])
    a, rest = k.diagonal_split()
    assert a == pytest.approx(0.6)
    assert rest == ((-1.0, 0.4),)


def test_split_then_merge_is_identity():
    rng = np.random.default_rng(3)
    for _ in range(10):
        locs = np.unique(np.sort(rng.uniform(-2.0, 0.0, 4)))
        w = rng.uniform(0.1, 1.0, len(locs))
        w /= w.sum()
        k = DelayKernel.from_atoms(list(zip(locs, w)))
        a, rest = k.diagonal_split()
        merged = list(rest) + ([(0.0, a)] if a > 0 else [])
        assert sorted(merged) == sorted(k.atoms)


def test_coalescing_merges_duplicates():
    k = DelayKernel.from_atoms([(-1.0, 0.25), (-1.0 + 1e-15, 0.25), (0.0, 0.5)])
    assert len(k.atoms) == 2
    assert k.atoms[0][1] == pytest.approx(0.5)


def test_invariants_rejected():
    with pytest.raises(KernelError):
        DelayKernel(((-0.5, 0.5),), 1.0)  # mass != 1
    with pytest.raises(KernelError):
        DelayKernel(((-0.5, 0.5), (-0.7, 0.5)), 1.0)  # not increasing
    with pytest.raises(KernelError):
        DelayKernel(((-0.5, -0.2), (0.0, 1.2)), 1.0)  # negative weight
    with pytest.raises(KernelError):
        DelayKernel(((-2.0, 1.0),), 1.0)  # outside [-tau, 0]
    with pytest.raises(KernelError):
        DelayKernel(((0.0, 1.0),), -1.0)  # bad tau


def test_tau_zero_undelayed_limit():
    k = DelayKernel.point_mass(0.0, tau=0.0)
    assert k.tau == 0.0
    assert k.stieltjes(lambda s: s + 9.0) == pytest.approx(9.0)
