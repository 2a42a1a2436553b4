"""Tests for empirical coupling distances, theoretical bounds and verification."""

import math

import numpy as np
import pytest

from ergoline.analysis import RateKernel, decompose, drift_check
from ergoline.analysis.estimators import (
    empirical_U_distance,
    levy_stationary_bound,
    stochastic_max_expectation,
    theoretical_bound,
    theoretical_bound_law,
    verify_bound,
    verify_bound_laws,
)
from ergoline.errors import PreconditionError
from ergoline.models.lyapunov import AffineV
from ergoline.models.process import (
    DiffusionModel,
    ExponentialInitial,
    PointInitial,
    SimConfig,
)
from ergoline.models.rates import ConstantPhi, LinearPhi
from ergoline.models.reports import VerdictStatus
from ergoline.simulation import coupled_paths


@pytest.fixture
def exp_certificate(reflected_bm, exp_v):
    return drift_check(reflected_bm, exp_v, LinearPhi(k=0.5))


@pytest.fixture
def exp_decomposition(linear_kernel, exp_v):
    return decompose(linear_kernel, exp_v, family="exponential-exact")


@pytest.fixture
def falling_sample():
    """Deterministic pair (0, 0.5) with drift -1; meets at t = 0.5."""
    model = DiffusionModel(drift="-1", sigma="0")
    sim = SimConfig(dt=0.125, horizon=1.0, n_paths=16, master_seed=0)
    return coupled_paths(model, 0.0, 0.5, sim, [0.25, 0.75])


class TestTheoreticalBound:
    """Tests for 2 V(x2) / h(t)."""

    def test_exponential(self, exp_decomposition, exp_v):
        """2 e^2 e^(-0.5 * 2) = 2e."""
        bound = theoretical_bound(exp_decomposition, exp_v, 2.0, 2.0)
        assert bound == pytest.approx(2.0 * math.e)
        assert bound == pytest.approx(5.4366, abs=1e-4)

    def test_total_variation(self, constant_kernel, affine_v):
        """2 V(0) / Psi(1) = 2 / (1 + 2)."""
        decomp = decompose(constant_kernel, affine_v, family="total-variation")
        assert theoretical_bound(decomp, affine_v, 0.0, 1.0) == pytest.approx(2.0 / 3.0)

    def test_infinite_at_zero(self, constant_kernel, affine_v):
        """The Young split has h(0) = 0, so the bound is infinite at t = 0."""
        decomp = decompose(constant_kernel, affine_v, family="constant-young")
        values = theoretical_bound(decomp, affine_v, 1.0, np.array([0.0, 1.0]))
        assert values[0] == math.inf
        assert math.isfinite(values[1])

    def test_law_weight(self, exp_decomposition):
        """At t = 0 the law bound is twice the weight."""
        assert theoretical_bound_law(exp_decomposition, 3.0, 0.0) == pytest.approx(6.0)

    def test_levy_stationary(self, exp_v):
        """(pi, V) bound from k(lambda) < 0 decays like e^(k t)."""
        value = levy_stationary_bound(-0.13, exp_v, 0.0, 2.0, 10.0)
        assert value == pytest.approx(3.0 * math.exp(-1.3))

    def test_levy_needs_negative_exponent(self, exp_v):
        """k(lambda) must be negative."""
        with pytest.raises(PreconditionError):
            levy_stationary_bound(0.0, exp_v, 0.0, 2.0, 1.0)


class TestStochasticMax:
    """Tests for (rho1 v rho2, V)."""

    def test_point_laws(self, affine_v):
        """max(1, 3) = 3, so (rho, V) = V(3) = 4."""
        assert stochastic_max_expectation([1.0], [3.0], affine_v) == pytest.approx(4.0)

    def test_identical_samples(self, affine_v):
        """Swapped samples give the same comonotone maximum."""
        value = stochastic_max_expectation([0.0, 2.0], [2.0, 0.0], affine_v)
        assert value == pytest.approx(2.0)

    def test_dominates_both(self, affine_v):
        """The maximum dominates each marginal expectation."""
        rng = np.random.default_rng(3)
        a = rng.exponential(1.0, 500)
        b = rng.uniform(0.0, 2.0, 500)
        value = stochastic_max_expectation(a, b, affine_v)
        assert value >= np.mean(affine_v(a)) - 1e-12
        assert value >= np.mean(affine_v(b)) - 1e-12

    def test_rejects_empty_and_negative(self, affine_v):
        """Samples must be nonempty and nonnegative."""
        with pytest.raises(PreconditionError):
            stochastic_max_expectation([], [1.0], affine_v)
        with pytest.raises(PreconditionError):
            stochastic_max_expectation([-1.0], [1.0], affine_v)


class TestEmpiricalDistance:
    """Tests for E[(U(X1) + U(X2)) 1{tau_0 > t}]."""

    def test_unit_weight_is_twice_survival(self, falling_sample):
        """U = 1 gives twice the unmet fraction."""
        estimate, lo, hi = empirical_U_distance(falling_sample, lambda x: np.ones_like(x), 0.25)
        assert (estimate, lo, hi) == pytest.approx((2.0, 2.0, 2.0))

    def test_after_meeting(self, falling_sample):
        """Met pairs contribute nothing."""
        estimate, lo, _ = empirical_U_distance(falling_sample, lambda x: 1.0 + x, 0.75)
        assert estimate == 0.0
        assert lo == 0.0

    def test_state_weight(self, falling_sample):
        """U(0) + U(0.25) for U = 1 + x."""
        estimate, _, _ = empirical_U_distance(falling_sample, lambda x: 1.0 + x, 0.25)
        assert estimate == pytest.approx(2.25)


class TestVerifyBound:
    """Tests for the PASS / FAIL / INCONCLUSIVE verdicts."""

    def test_pass(self, reflected_bm, exp_certificate, exp_decomposition, small_sim):
        """The certified exponential bound passes."""
        report = verify_bound(
            reflected_bm, exp_certificate, exp_decomposition, 0.0, 2.0, small_sim, [0.5, 1.0]
        )
        assert report.status is VerdictStatus.PASS
        assert report.weight == pytest.approx(math.exp(2.0))
        assert report.order_violations == 0
        assert all(row.ci_lo <= row.bound for row in report.rows)

    def test_wrong_rate_fails(self, reflected_bm, exp_certificate, exp_v, small_sim):
        """A bound claiming rate e^(-20 t) is rejected."""
        decomp = decompose(RateKernel(LinearPhi(k=20.0)), exp_v, family="exponential-exact")
        report = verify_bound(
            reflected_bm, exp_certificate, decomp, 0.0, 2.0, small_sim, [0.5, 1.0]
        )
        assert report.status is VerdictStatus.FAIL
        assert not any(row.passed for row in report.rows)

    def test_failed_certificate_refused(
        self, reflected_bm, exp_v, exp_decomposition, small_sim
    ):
        """A failed certificate is refused before simulation."""
        bad = drift_check(reflected_bm, exp_v, LinearPhi(k=2.0))
        with pytest.raises(PreconditionError):
            verify_bound(reflected_bm, bad, exp_decomposition, 0.0, 2.0, small_sim, [1.0])

    def test_tainted_run_is_inconclusive(self, constant_kernel):
        """A tainted run can neither pass nor fail."""
        model = DiffusionModel(drift="-2", sigma="1+2*x")
        V = AffineV(c=1.0)
        cert = drift_check(model, V, ConstantPhi(k=2.0))
        assert cert.passed
        decomp = decompose(constant_kernel, V, family="total-variation")
        sim = SimConfig(dt=0.05, horizon=1.0, n_paths=200, master_seed=11)
        report = verify_bound(model, cert, decomp, 0.0, 1.0, sim, [0.5, 1.0])
        assert report.status is VerdictStatus.INCONCLUSIVE
        assert report.taint

    def test_initial_laws(self, reflected_bm, exp_certificate, exp_decomposition, small_sim):
        """Initial laws are weighted by (rho1 v rho2, V)."""
        report = verify_bound_laws(
            reflected_bm,
            exp_certificate,
            exp_decomposition,
            PointInitial(value=0.0),
            ExponentialInitial(mean=0.25),
            small_sim,
            [1.0],
        )
        assert report.x1 is None
        assert report.weight > 1.0
        assert report.status is VerdictStatus.PASS
