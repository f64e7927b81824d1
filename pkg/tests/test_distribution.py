import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import dblquad, quad
from scipy.special import betainc

from largest_root.distribution import (
    EnsembleParams,
    Spike,
    cdf_max_eig,
    cdf_max_eig_alpha0,
    cdf_precision_check,
    joint_density,
    log_k1,
    null_joint_density,
)
from largest_root.exceptions import DegenerateInputError, DomainError, NumericalError
from largest_root.montecarlo import SimConfig, empirical_cdf, simulate_max_eig


def beta_prime_cdf(n, p, eta, t):
    """m = 1: lambda / (1 + eta) is beta-prime(p, n)."""
    x = t / (1.0 + eta)
    return betainc(p, n, x / (1.0 + x))


def density_on_unit_square(params, eta):
    """Joint density in x = lambda / (1 + lambda); ties (probability zero) count as 0."""
    def f(x1, x2):
        l1, l2 = x1 / (1 - x1), x2 / (1 - x2)
        try:
            d = joint_density(params, eta, [l1, l2])
        except DegenerateInputError:
            return 0.0
        return d / ((1 - x1) ** 2 * (1 - x2) ** 2)
    return f


def quadrature_cdf_m2(params, eta, t):
    xt = t / (1 + t)
    v, _ = dblquad(density_on_unit_square(params, eta), 0, xt, 0, lambda x2: x2, epsabs=1e-12, epsrel=1e-12)
    return v


# -- parameter validation

def test_ensemble_params_derived():
    e = EnsembleParams(2, 5, 3)
    assert (e.alpha, e.beta, e.kappa) == (3, 1, 0.6)


@pytest.mark.parametrize("args", [(3, 2, 5), (3, 5, 2), (0, 1, 1), (2.5, 3, 3), (-1, 2, 2)])
def test_ensemble_params_rejects(args):
    with pytest.raises(DomainError):
        EnsembleParams(*args)


def test_spike_rejects_negative():
    with pytest.raises(DomainError):
        Spike(-0.1)


def test_negative_t_rejected():
    with pytest.raises(DomainError):
        cdf_max_eig(EnsembleParams(2, 3, 3), 1.0, -0.5)
    with pytest.raises(DomainError):
        cdf_max_eig_alpha0(2, 3, 1.0, -0.5)


# -- closed-form examples

def test_alpha0_example():
    # (1/2)^4 (1 + 3/2)^-2
    assert cdf_max_eig(EnsembleParams(2, 2, 2), 3.0, 1.0) == pytest.approx(0.01, rel=1e-12)
    assert cdf_max_eig_alpha0(2, 2, 3.0, 1.0) == pytest.approx(0.01, rel=1e-12)


def test_alpha0_null_example():
    assert cdf_max_eig_alpha0(2, 2, 0.0, 1.0) == pytest.approx(0.0625, rel=1e-14)


@pytest.mark.parametrize("eta, t", [(0.0, 1.0), (2.0, 0.3), (50.0, 7.0)])
def test_alpha0_m1_p1(eta, t):
    assert cdf_max_eig_alpha0(1, 1, eta, t) == pytest.approx(t / (1 + eta + t), rel=1e-14)


def test_alpha0_cross_path():
    assert cdf_max_eig(EnsembleParams(3, 3, 5), 10.0, 4.0) == pytest.approx(cdf_max_eig_alpha0(3, 5, 10.0, 4.0), rel=1e-12)


@pytest.mark.parametrize("params", [EnsembleParams(2, 3, 4), EnsembleParams(1, 1, 1), EnsembleParams(5, 8, 10),
                                    EnsembleParams(2, 5, 2)])
@pytest.mark.parametrize("eta", [0.0, 1.0, 20.0])
def test_limits(params, eta):
    assert cdf_max_eig(params, eta, 0.0) == 0.0
    assert cdf_max_eig(params, eta, 1e-13) == 0.0
    assert cdf_max_eig(params, eta, 1e9) == pytest.approx(1.0, abs=1e-6)
    assert cdf_max_eig(params, eta, np.inf) == 1.0


def test_accepts_spike_object_and_arrays():
    e = EnsembleParams(2, 4, 3)
    t = np.array([0.5, 2.0])
    np.testing.assert_array_equal(cdf_max_eig(e, Spike(1.0), t), cdf_max_eig(e, 1.0, t))
    assert isinstance(cdf_max_eig(e, 1.0, 2.0), float)


# -- frozen oracle values

# Null case: Andreief integration of the F-matrix eigenvalue density gives a
# Hankel determinant of incomplete beta integrals, det[B_x(beta+i+j+1, alpha+1)]
# / det[B(beta+i+j+1, alpha+1)]; evaluated in 40-digit arithmetic.
NULL_ORACLE = [
    ((2, 3, 3), 2.0, 0.29263831732967535),
    ((2, 4, 4), 1.5, 0.21888755712),
    ((3, 5, 6), 4.0, 0.32074276258162483),
    ((2, 5, 2), 2.0, 0.85461227116462599),
    ((3, 7, 4), 3.0, 0.78269167103213633),
    ((4, 6, 5), 5.0, 0.40623782026601474),
    ((5, 8, 10), 3.0, 0.0050161490410922295),
]

# m = 1: regularised incomplete beta function.
M1_ORACLE = [
    ((1, 3, 2), 1.0, 1.7, 0.62436524930355502),
    ((1, 5, 4), 3.0, 10.0, 0.95243964188876598),
    ((1, 10, 3), 0.5, 0.8, 0.84503981982786117),
    ((1, 2, 1), 20.0, 50.0, 0.91251735766712954),
]

# m = 2 with a spike: 2-D adaptive quadrature of the joint density.
M2_SPIKED_ORACLE = [
    ((2, 3, 3), 1.0, 2.0, 0.14814814814814797),
    ((2, 4, 3), 2.0, 3.0, 0.37408447265625044),
    ((2, 5, 2), 1.0, 2.0, 0.6934156378600818),
    ((2, 4, 4), 2.0, 5.0, 0.48610183764223674),
]


@pytest.mark.parametrize("mnp, t, expected", NULL_ORACLE)
def test_null_cdf_frozen(mnp, t, expected):
    assert cdf_max_eig(EnsembleParams(*mnp), 0.0, t) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("mnp, eta, t, expected", M1_ORACLE)
def test_m1_cdf_frozen(mnp, eta, t, expected):
    assert cdf_max_eig(EnsembleParams(*mnp), eta, t) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("mnp, eta, t, expected", M2_SPIKED_ORACLE)
def test_m2_spiked_cdf_frozen(mnp, eta, t, expected):
    assert cdf_max_eig(EnsembleParams(*mnp), eta, t) == pytest.approx(expected, rel=1e-9)


def test_m2_spiked_quadrature_live():
    e = EnsembleParams(2, 4, 3)
    assert cdf_max_eig(e, 2.0, 3.0) == pytest.approx(quadrature_cdf_m2(e, 2.0, 3.0), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 9), p=st.integers(1, 9), eta=st.sampled_from([0.0, 0.3, 1.0, 4.0, 20.0]),
       t=st.floats(0.05, 50.0))
def test_m1_matches_beta_prime(n, p, eta, t):
    got = cdf_max_eig(EnsembleParams(1, n, p), eta, t, precision="auto")
    assert got == pytest.approx(beta_prime_cdf(n, p, eta, t), rel=1e-8, abs=1e-12)


# -- invariants

def test_path_identity_grid():
    t = np.logspace(-2, 3, 20)
    for m in range(1, 9):
        for p in range(m, m + 7):
            for eta in (0.0, 0.5, 1.0, 5.0, 20.0):
                np.testing.assert_allclose(cdf_max_eig(EnsembleParams(m, m, p), eta, t),
                                           cdf_max_eig_alpha0(m, p, eta, t), rtol=1e-9)


@pytest.mark.parametrize("mnp", [(2, 4, 4), (3, 5, 6), (2, 5, 2), (5, 8, 10), (2, 3, 4)])
@pytest.mark.parametrize("eta", [0.0, 2.0, 10.0])
def test_monotone_in_t(mnp, eta):
    t = np.logspace(-3, 3, 1000)
    F = cdf_max_eig(EnsembleParams(*mnp), eta, t)
    assert np.all(np.diff(F) >= -1e-12)
    assert np.all((F >= 0) & (F <= 1))


@pytest.mark.parametrize("eta", [0.0, 2.0, 10.0])
def test_monotone_in_t_ill_conditioned(eta):
    # m = 1 with alpha = 5: double rounding near F = 1 reaches ~1e-9, "auto" repairs it
    # down to the AUTO_RTOL level
    t = np.logspace(-3, 3, 1000)
    F = cdf_max_eig(EnsembleParams(1, 6, 2), eta, t, precision="auto")
    assert np.all(np.diff(F) >= -1e-10)


@pytest.mark.parametrize("mnp", [(2, 4, 4), (3, 5, 6), (2, 5, 2), (5, 8, 10)])
def test_monotone_in_eta(mnp):
    e = EnsembleParams(*mnp)
    t = np.logspace(-1, 2, 30)
    F = np.array([cdf_max_eig(e, eta, t) for eta in (0.0, 0.5, 1.0, 2.0, 5.0, 20.0)])
    assert np.all(np.diff(F, axis=0) <= 1e-12)


@pytest.mark.parametrize("mnp", [(2, 4, 4), (3, 5, 6), (2, 5, 2), (4, 9, 5)])
def test_eta_continuity(mnp):
    e = EnsembleParams(*mnp)
    t = np.logspace(-1, 2, 20)
    np.testing.assert_allclose(cdf_max_eig(e, 1e-12, t), cdf_max_eig(e, 0.0, t), atol=1e-6)


@pytest.mark.parametrize("n, p, eta", [(1, 1, 0.0), (2, 2, 1.0), (3, 5, 2.0), (6, 2, 0.5)])
def test_m1_derivative_matches_density(n, p, eta):
    e = EnsembleParams(1, n, p)
    for t in (0.2, 0.9, 3.0, 12.0):
        h = 1e-4 * t
        deriv = (cdf_max_eig(e, eta, t + h) - cdf_max_eig(e, eta, t - h)) / (2 * h)
        assert deriv == pytest.approx(joint_density(e, eta, [t]), rel=1e-5)


# -- precision modes

@pytest.mark.parametrize("mnp, eta, t", [((2, 4, 4), 2.0, 3.0), ((3, 7, 4), 5.0, 0.8), ((4, 9, 6), 1.0, 20.0)])
def test_high_precision_agrees(mnp, eta, t):
    e = EnsembleParams(*mnp)
    assert cdf_max_eig(e, eta, t) == pytest.approx(cdf_max_eig(e, eta, t, precision="high"), rel=1e-10)


def test_ill_conditioned_case_needs_auto():
    # small m, large alpha, large eta and t: the double determinant cancels
    e = EnsembleParams(1, 10, 1)
    t = np.array([10.0, 30.0, 100.0])
    with pytest.raises(NumericalError):
        cdf_max_eig(e, 10.0, t)
    np.testing.assert_allclose(cdf_max_eig(e, 10.0, t, precision="auto"), beta_prime_cdf(10, 1, 10.0, t), rtol=1e-12)


def test_precision_check_flags_cancellation():
    assert cdf_precision_check(EnsembleParams(2, 4, 4), 2.0, 3.0).ok
    assert not cdf_precision_check(EnsembleParams(1, 10, 1), 10.0, 30.0, rtol=1e-9).ok


def test_unknown_precision():
    with pytest.raises(DomainError):
        cdf_max_eig(EnsembleParams(1, 1, 1), 0.0, 1.0, precision="quad")


# -- densities

def test_null_density_m1_beta_prime():
    # Gamma(4) / (Gamma(2) Gamma(2)) * 2 / 3^4 = 4/27
    assert null_joint_density(EnsembleParams(1, 2, 2), [2.0]) == pytest.approx(4 / 27, rel=1e-14)
    assert joint_density(EnsembleParams(1, 2, 2), 0.0, [2.0]) == pytest.approx(4 / 27, rel=1e-14)


@pytest.mark.parametrize("n, p, eta", [(2, 2, 1.0), (3, 5, 4.0), (1, 7, 0.2)])
def test_spiked_density_m1_closed_form(n, p, eta):
    e = EnsembleParams(1, n, p)
    for lam in (0.1, 1.0, 6.0):
        expected = math.exp(log_k1(1, n, p)) * lam ** (p - 1) * (1 + eta) ** n / (1 + eta + lam) ** (p + n)
        assert joint_density(e, eta, [lam]) == pytest.approx(expected, rel=1e-12)
    total, _ = quad(lambda x: joint_density(e, eta, [x]), 0, np.inf, epsabs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_null_density_vanishes_on_ties():
    assert null_joint_density(EnsembleParams(2, 2, 2), [1.0, 1.0]) == 0.0


def test_density_rejects_ties_and_unsorted():
    e = EnsembleParams(2, 3, 3)
    with pytest.raises(DegenerateInputError):
        joint_density(e, 1.0, [1.0, 1.0 + 1e-12])
    with pytest.raises(DomainError):
        joint_density(e, 1.0, [2.0, 1.0])
    with pytest.raises(DomainError):
        null_joint_density(e, [2.0, 1.0])
    with pytest.raises(DomainError):
        null_joint_density(e, [-1.0, 1.0])


@pytest.mark.parametrize("mnp, eta", [((2, 2, 2), 1.0), ((2, 3, 4), 5.0), ((2, 3, 3), 0.0)])
def test_density_normalisation(mnp, eta):
    v, _ = dblquad(density_on_unit_square(EnsembleParams(*mnp), eta), 0, 1, 0, lambda x2: x2,
                   epsabs=1e-10, epsrel=1e-10)
    assert v == pytest.approx(1.0, abs=1e-4)


def test_density_stack():
    e = EnsembleParams(3, 4, 5)
    lam = np.array([[0.2, 0.9, 3.0], [0.1, 0.5, 0.6]])
    got = joint_density(e, 2.0, lam)
    assert got.shape == (2,)
    assert got[1] == pytest.approx(joint_density(e, 2.0, lam[1]), rel=1e-14)


# -- Monte Carlo examples

@pytest.mark.slow
def test_cdf_matches_simulation_1e6():
    e = EnsembleParams(2, 3, 4)
    eta = 2.0
    samples = simulate_max_eig(SimConfig(e, eta, 1_000_000, seed=7))
    t = np.array([0.5, 1.0, 2.0, 5.0])
    np.testing.assert_allclose(empirical_cdf(samples, t), cdf_max_eig(e, eta, t), atol=0.005)


def test_negative_jacobi_degree_case_matches_simulation():
    # n > 2m makes some Jacobi degrees negative; those entries are zero
    e = EnsembleParams(2, 5, 2)
    samples = simulate_max_eig(SimConfig(e, 1.0, 200_000, seed=11))
    assert empirical_cdf(samples, 2.0) == pytest.approx(cdf_max_eig(e, 1.0, 2.0), abs=0.005)
