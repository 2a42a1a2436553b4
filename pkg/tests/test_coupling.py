"""Tests for coupled runs, survival estimates, dt validation and the K audit."""

import math

import numpy as np
import pytest

from ergoline.analysis import RateKernel, drift_check
from ergoline.errors import CheckpointError, PreconditionError, SimulationConfigError
from ergoline.expr import parse
from ergoline.models.lyapunov import AffineV
from ergoline.models.process import (
    DiffusionModel,
    ExponentialInitial,
    LevyModel,
    PointInitial,
    SimConfig,
    UniformInitial,
)
from ergoline.models.rates import ConstantPhi, LinearPhi
from ergoline.simulation import (
    coupled_paths,
    lipschitz_estimate,
    supermartingale_audit,
    survival,
    validate_dt,
    wilson_interval,
)


@pytest.fixture
def falling() -> DiffusionModel:
    """Noise-free drift -1: X(t) = max(0, x - t)."""
    return DiffusionModel(name="falling", drift="-1", sigma="0")


@pytest.fixture
def exact_sim() -> SimConfig:
    """Binary-exact step so that deterministic paths hit 0 on a grid point."""
    return SimConfig(dt=0.125, horizon=1.0, n_paths=8, master_seed=1)


class TestDtValidation:
    """Tests for the step-size check."""

    def test_lipschitz_linear(self):
        """The slope of 3x - 1 is 3."""
        assert lipschitz_estimate(parse("3*x - 1")) == pytest.approx(3.0)

    def test_lipschitz_constant(self):
        """A constant has Lipschitz constant 0."""
        assert lipschitz_estimate(parse("-2")) == 0.0

    def test_lipschitz_singular_at_zero(self):
        """x^-0.5 is sampled away from 0."""
        value = lipschitz_estimate(parse("x^-0.5"))
        assert math.isfinite(value)
        assert value > 1.0

    def test_monotone_step_ok(self, reflected_bm):
        """A constant sigma with a monotone step passes."""
        assert validate_dt(reflected_bm, 0.01) == []

    def test_constant_sigma_too_large(self):
        """dt * L >= 1 breaks monotonicity and is refused."""
        model = DiffusionModel(drift="-50*x", sigma="1")
        with pytest.raises(SimulationConfigError):
            validate_dt(model, 0.05)

    def test_state_sigma_taint(self):
        """A coarse dt with state-dependent sigma is flagged, not refused."""
        model = DiffusionModel(drift="-2", sigma="1+2*x")
        messages = validate_dt(model, 0.05)
        assert len(messages) == 1
        assert "discretization" in messages[0]

    def test_state_sigma_small_dt(self):
        """A small enough dt clears the flag."""
        model = DiffusionModel(drift="-2", sigma="1+2*x")
        assert validate_dt(model, 1e-4) == []

    def test_levy_not_checked(self, levy_model):
        """Levy steps do not depend on the state."""
        assert validate_dt(levy_model, 0.5) == []


class TestCoupledPaths:
    """Tests for coupled_paths."""

    def test_equal_starts_meet_at_zero(self, reflected_bm, small_sim):
        """Equal starts meet at step 0."""
        sample = coupled_paths(reflected_bm, 1.0, 1.0, small_sim, [0.5, 1.0])
        assert np.all(sample.meet_step == 0)
        assert survival(sample, 0.5)[0] == 0.0

    def test_deterministic_meeting(self, falling, exact_sim):
        """From (0, 0.5) the upper copy reaches 0 at t = 0.5 and the pair meets."""
        sample = coupled_paths(falling, 0.0, 0.5, exact_sim, [0.25, 0.75])
        np.testing.assert_allclose(sample.meet_time, 0.5)
        np.testing.assert_allclose(sample.hit_time, 0.5)
        assert sample.hit_before_meet == 0
        assert np.all(sample.unmet_at(0.25))
        assert not np.any(sample.unmet_at(0.75))
        np.testing.assert_allclose(sample.x2_at(0.25), 0.25)
        np.testing.assert_allclose(sample.x1_at(0.75), 0.0)

    def test_never_meeting(self, exact_sim):
        """Two copies with drift +1 never meet within the horizon."""
        rising = DiffusionModel(drift="1", sigma="0")
        sample = coupled_paths(rising, 0.0, 0.5, exact_sim, [1.0])
        assert np.all(sample.meet_step == sample.never)
        assert np.all(np.isinf(sample.meet_time))
        assert survival(sample, 1.0)[0] == 1.0

    def test_paths_fuse_after_meeting(self, reflected_bm, small_sim):
        """Copies stay equal once met and ordered before."""
        sample = coupled_paths(reflected_bm, 0.0, 0.5, small_sim, [0.25, 0.5, 1.0])
        for t in (0.25, 0.5, 1.0):
            met = ~sample.unmet_at(t)
            np.testing.assert_array_equal(sample.x1_at(t)[met], sample.x2_at(t)[met])
            assert np.all(sample.x1_at(t) <= sample.x2_at(t))

    def test_no_order_violations(self, reflected_bm, small_sim):
        """Shared noise keeps X1 <= X2."""
        sample = coupled_paths(reflected_bm, 0.0, 2.0, small_sim, [1.0])
        assert sample.order_violations == 0
        assert not sample.tainted

    def test_thread_count_does_not_matter(self, reflected_bm):
        """Results depend on seed and block size only."""
        sim = SimConfig(dt=0.01, horizon=1.0, n_paths=450, master_seed=99)
        one = coupled_paths(reflected_bm, 0.0, 1.0, sim, [0.5, 1.0], threads=1, block_size=64)
        four = coupled_paths(reflected_bm, 0.0, 1.0, sim, [0.5, 1.0], threads=4, block_size=64)
        np.testing.assert_array_equal(one.meet_step, four.meet_step)
        np.testing.assert_array_equal(one.x2_states, four.x2_states)

    def test_seed_changes_paths(self, reflected_bm, small_sim):
        """Another master seed gives other paths."""
        other = small_sim.model_copy(update={"master_seed": 8})
        a = coupled_paths(reflected_bm, 0.0, 1.0, small_sim, [1.0])
        b = coupled_paths(reflected_bm, 0.0, 1.0, other, [1.0])
        assert not np.array_equal(a.x2_states, b.x2_states)

    def test_rejects_unordered_starts(self, reflected_bm, small_sim):
        """x1 must not exceed x2."""
        with pytest.raises(SimulationConfigError):
            coupled_paths(reflected_bm, 2.0, 1.0, small_sim, [1.0])

    def test_rejects_negative_start(self, reflected_bm, small_sim):
        """Starts must lie in [0, inf)."""
        with pytest.raises(SimulationConfigError):
            coupled_paths(reflected_bm, -1.0, 1.0, small_sim, [1.0])

    def test_checkpoint_outside_horizon(self, reflected_bm, small_sim):
        """Checkpoints past the horizon are refused."""
        with pytest.raises(CheckpointError):
            coupled_paths(reflected_bm, 0.0, 1.0, small_sim, [2.0])

    def test_unknown_checkpoint(self, reflected_bm, small_sim):
        """Only recorded checkpoints can be read back."""
        sample = coupled_paths(reflected_bm, 0.0, 1.0, small_sim, [1.0])
        with pytest.raises(CheckpointError):
            sample.x1_at(0.3)

    def test_state_sigma_run_is_tainted(self):
        """A flagged dt taints the coupled run."""
        model = DiffusionModel(drift="-2", sigma="1+2*x")
        sim = SimConfig(dt=0.05, horizon=0.5, n_paths=50, master_seed=3)
        sample = coupled_paths(model, 0.0, 1.0, sim, [0.5])
        assert sample.tainted

    def test_levy_run(self, levy_model, small_sim):
        """Levy copies stay ordered and give a valid interval."""
        sample = coupled_paths(levy_model, 0.0, 1.0, small_sim, [1.0])
        assert sample.order_violations == 0
        estimate, lo, hi = survival(sample, 1.0)
        assert lo <= estimate <= hi


class TestInitialLaws:
    """Tests for comonotone initial draws."""

    def test_ordered_laws(self, reflected_bm, small_sim):
        """A point mass at 0 lies below any Exp draw."""
        sample = coupled_paths(
            reflected_bm, PointInitial(value=0.0), ExponentialInitial(mean=1.0), small_sim, [1.0]
        )
        assert sample.initial_order_ok
        assert np.all(sample.x1_start == 0.0)
        assert np.all(sample.x2_start >= 0.0)

    def test_unordered_laws_are_swapped_and_tainted(self, reflected_bm, small_sim):
        """U(0, 2) and Exp(1) cross, so some comonotone draws are swapped."""
        sample = coupled_paths(
            reflected_bm,
            UniformInitial(low=0.0, high=2.0),
            ExponentialInitial(mean=1.0),
            small_sim,
            [1.0],
        )
        assert not sample.initial_order_ok
        assert sample.tainted
        assert np.all(sample.x1_start <= sample.x2_start)


class TestSurvival:
    """Tests for Wilson intervals."""

    def test_zero_successes(self):
        """No successes put the lower end exactly at 0."""
        lo, hi = wilson_interval(0, 100)
        assert lo == 0.0
        assert 0.0 < hi < 0.05

    def test_symmetric(self):
        """The interval is symmetric about 1/2."""
        lo, hi = wilson_interval(50, 100)
        assert 0.5 - lo == pytest.approx(hi - 0.5)

    def test_empty(self):
        """No trials give the whole unit interval."""
        assert wilson_interval(0, 0) == (0.0, 1.0)

    def test_all_successes(self):
        """n successes out of n put the upper end exactly at 1."""
        lo, hi = wilson_interval(100, 100)
        assert hi == 1.0
        assert 0.95 < lo < 1.0


class TestSupermartingaleAudit:
    """Tests for E[K(t)] with K = G(t ^ tau, V(X(t ^ tau)))."""

    def test_deterministic_k_is_constant(self, falling, exact_sim):
        """LV = -1 = -phi(V): K stays at 1.5 before and after the hit at t = 0.5."""
        kernel = RateKernel(ConstantPhi(k=1.0))
        report = supermartingale_audit(
            falling, AffineV(c=1.0), kernel, 0.5, exact_sim, [1.0, 0.0, 0.25, 0.75]
        )
        assert [row.t for row in report.rows] == [0.0, 0.25, 0.75, 1.0]
        for row in report.rows:
            assert row.mean == pytest.approx(1.5)
            assert row.se == 0.0
        assert report.nonincreasing

    def test_rate_too_fast_is_detected(self, falling, exact_sim):
        """phi = 3 overstates the drift, so K grows."""
        kernel = RateKernel(ConstantPhi(k=3.0))
        report = supermartingale_audit(
            falling, AffineV(c=1.0), kernel, 0.5, exact_sim, [0.0, 0.25, 0.75]
        )
        assert not report.nonincreasing

    def test_first_row(self, reflected_bm, exp_v, linear_kernel, small_sim):
        """At t = 0, K = V(x0)."""
        report = supermartingale_audit(
            reflected_bm, exp_v, linear_kernel, 2.0, small_sim, [0.0, 0.5, 1.0]
        )
        assert report.rows[0].mean == pytest.approx(math.exp(2.0))
        assert report.rows[0].ok
        assert report.x0 == 2.0

    def test_negative_start(self, reflected_bm, exp_v, linear_kernel, small_sim):
        """Negative starts are refused."""
        with pytest.raises(PreconditionError):
            supermartingale_audit(reflected_bm, exp_v, linear_kernel, -1.0, small_sim, [0.0])

    def test_levy_model_runs(self, small_sim):
        """The audit also runs for Levy models."""
        model = LevyModel(drift=-1.0, sigma=1.0)
        report = supermartingale_audit(
            model, AffineV(c=1.0), RateKernel(ConstantPhi(k=1.0)), 1.0, small_sim, [0.0, 1.0]
        )
        assert len(report.rows) == 2

    def test_failed_certificate_refused(self, reflected_bm, exp_v, linear_kernel, small_sim):
        """A rate the certificate rejects cannot be audited."""
        cert = drift_check(reflected_bm, exp_v, LinearPhi(k=2.0))
        assert not cert.passed
        with pytest.raises(PreconditionError):
            supermartingale_audit(
                reflected_bm, exp_v, linear_kernel, 1.0, small_sim, [0.0, 1.0], certificate=cert
            )

    def test_passed_certificate_accepted(self, reflected_bm, exp_v, linear_kernel, small_sim):
        """A passing certificate lets the audit run untainted."""
        cert = drift_check(reflected_bm, exp_v, LinearPhi(k=0.5))
        report = supermartingale_audit(
            reflected_bm, exp_v, linear_kernel, 1.0, small_sim, [0.0, 1.0], certificate=cert
        )
        assert not report.tainted
        assert report.taint == []

    def test_state_sigma_audit_is_tainted(self):
        """A dt too coarse for a state-dependent sigma is carried into the report."""
        model = DiffusionModel(drift="-2", sigma="1+2*x")
        sim = SimConfig(dt=0.05, horizon=0.5, n_paths=50, master_seed=3)
        report = supermartingale_audit(
            model, AffineV(c=1.0), RateKernel(ConstantPhi(k=1.0)), 1.0, sim, [0.0, 0.5]
        )
        assert report.tainted
        assert any("discretization" in reason for reason in report.taint)
