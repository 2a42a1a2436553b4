"""Tests for reflected one-step kernels and per-block random streams."""

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from ergoline.analysis.jumps import mean_jump
from ergoline.models.process import (
    CompoundMeasure,
    DensityMeasure,
    DiffusionModel,
    ExpDisplacementKernel,
    JumpDiffusionModel,
    LevyModel,
    PointLaw,
    TranslationKernel,
    UniformInitial,
)
from ergoline.simulation import (
    LevyJumpSource,
    Stream,
    StepKernel,
    block_generator,
    diffusion_increment,
    jump_events,
    levy_increment,
    reflect_step,
    run_blocks,
    split_blocks,
    step,
)


@pytest.fixture
def rng() -> np.random.Generator:
    return block_generator(123, Stream.SINGLE, 0)


class TestReflection:
    """Tests for the discrete Skorokhod map."""

    def test_interior(self):
        """A step that stays above zero is not pushed."""
        assert reflect_step(1.0, -0.25) == (0.75, 0.0)

    def test_pushed_at_zero(self):
        """Overshooting below zero is pushed back exactly to zero."""
        new, pushed = reflect_step(1.0, -3.0)
        assert new == 0.0
        assert pushed == pytest.approx(2.0)

    def test_arrays(self):
        """Arrays reflect elementwise."""
        new, pushed = reflect_step(np.array([0.0, 2.0]), np.array([-1.0, 1.0]))
        np.testing.assert_allclose(new, [0.0, 3.0])
        np.testing.assert_allclose(pushed, [1.0, 0.0])

    def test_local_time_identity(self, rng):
        """new = x + increment + pushed, with pushing only at zero."""
        x = rng.exponential(1.0, 5000)
        increment = rng.normal(-0.5, 1.0, 5000)
        new, pushed = reflect_step(x, increment)
        np.testing.assert_allclose(new, x + increment + pushed, atol=1e-12)
        assert np.all(pushed >= 0.0)
        assert np.all(new[pushed > 0.0] == 0.0)
        assert np.any(pushed > 0.0)


class TestScalarSteps:
    """Tests for the scalar reference kernels."""

    def test_diffusion_increment(self, reflected_bm):
        """g dt + sigma sqrt(dt) N with g = -1, sigma = 1."""
        assert diffusion_increment(reflected_bm, 1.0, 0.01, 2.0) == pytest.approx(0.19)

    def test_deterministic_step(self, rng):
        """Without noise a step is a reflected Euler drift step."""
        model = DiffusionModel(drift="-1", sigma="0")
        assert step(model, 0.5, 0.1, rng) == pytest.approx(0.4)
        assert step(model, 0.05, 0.1, rng) == 0.0

    def test_no_jumps_without_intensity(self, rng):
        """Zero intensity never produces a jump."""
        model = JumpDiffusionModel(
            base=DiffusionModel(drift="-1", sigma="1"),
            intensity=0.0,
            kernel=ExpDisplacementKernel(rate="1"),
        )
        assert jump_events(model, 1.0, 0.1, rng) == []

    def test_translation_jumps(self, rng):
        """Point-law jumps of size 1 at a high intensity: every event moves by 1."""
        measure = CompoundMeasure(rate=50.0, law=PointLaw(value=1.0))
        model = JumpDiffusionModel(
            base=DiffusionModel(drift="0", sigma="0"),
            intensity=50.0,
            kernel=TranslationKernel(measure=measure),
        )
        events = jump_events(model, 0.0, 0.1, rng)
        assert all(d == pytest.approx(1.0) for d in events)

    def test_levy_pure_drift(self, rng):
        """A Levy process without noise or jumps moves by g dt."""
        model = LevyModel(drift=-2.0, sigma=0.0)
        assert levy_increment(model, 0.01, rng) == pytest.approx(-0.02)

    def test_levy_increment_mean(self, rng):
        """E[increment] = (g + int z mu(dz)) dt; Exp(1) density has first moment 1."""
        model = LevyModel(drift=-2.0, sigma=1.0, measure=DensityMeasure(density="exp(-z)"))
        source = LevyJumpSource.build(model.measure, 0.05)
        dt = 0.1
        draws = np.array([levy_increment(model, dt, rng, jumps=source) for _ in range(20000)])
        assert draws.mean() == pytest.approx((-2.0 + 1.0) * dt, abs=0.02)


class TestJumpLaws:
    """Tests for state-dependent jump displacements and counts."""

    def test_exp_displacement_mean(self, rng):
        """Rate (x+1)^(1/2) at x = 3 gives a mean displacement of 1/2."""
        kernel = ExpDisplacementKernel(rate="(x+1)^0.5")
        draws = kernel.displacement(rng.random(200000), 3.0)
        assert np.all(draws >= 0.0)
        assert draws.mean() == pytest.approx(0.5, abs=0.01)

    def test_mean_jump_matches_kernel(self, jump_example):
        """M * E[D] at x = 3 is 2 * 1/2."""
        assert mean_jump(jump_example, 3.0) == pytest.approx(1.0, rel=1e-9)

    def test_poisson_counts(self, jump_example):
        """Jump counts per step average M * dt."""
        kernel = StepKernel(jump_example, 0.05)
        noise = kernel.draw(block_generator(3, Stream.COUPLED, 0), 100000)
        assert noise.counts.mean() == pytest.approx(2.0 * 0.05, abs=0.005)

    def test_zero_intensity_matches_diffusion(self):
        """With M = 0 the jump-diffusion has the law of its base diffusion."""
        base = DiffusionModel(drift="-1", sigma="1")
        jumpy = JumpDiffusionModel(
            base=base, intensity=0.0, kernel=ExpDisplacementKernel(rate="(x+1)^0.5")
        )
        finals = []
        for model, seed in ((base, 11), (jumpy, 12)):
            kernel = StepKernel(model, 0.01)
            gen = block_generator(seed, Stream.SINGLE, 0)
            x = np.ones(4000)
            for _ in range(100):
                x, _ = kernel.advance(x, kernel.draw(gen, x.size))
            finals.append(x)
        assert stats.ks_2samp(finals[0], finals[1]).pvalue > 1e-3

    def test_zero_intensity_same_draws_same_path(self):
        """Same seed, M = 0: the two kernels produce identical paths."""
        base = DiffusionModel(drift="-1", sigma="1")
        jumpy = JumpDiffusionModel(base=base, intensity=0.0, kernel=ExpDisplacementKernel(rate="1"))
        paths = []
        for model in (base, jumpy):
            kernel = StepKernel(model, 0.01)
            gen = block_generator(4, Stream.SINGLE, 0)
            x = np.ones(100)
            for _ in range(50):
                x, _ = kernel.advance(x, kernel.draw(gen, x.size))
            paths.append(x)
        np.testing.assert_array_equal(paths[0], paths[1])


class TestModelValidation:
    """Tests for constraints checked when models are built."""

    def test_negative_sigma_rejected(self):
        """sigma(x) = x - 1 is negative near zero."""
        with pytest.raises(ValidationError, match="sigma"):
            DiffusionModel(drift="-1", sigma="x-1")

    def test_negative_constant_sigma_rejected(self):
        """A negative constant sigma is rejected."""
        with pytest.raises(ValidationError):
            DiffusionModel(drift="-1", sigma="-0.5")

    def test_state_sigma_accepted(self):
        """A nonnegative state-dependent sigma passes."""
        model = DiffusionModel(drift="-2", sigma="1+2*x")
        assert model.sigma_at(1.0) == pytest.approx(3.0)

    def test_singular_sigma_checked_away_from_zero(self):
        """Points where sigma is undefined are skipped by the check."""
        model = DiffusionModel(drift="-1", sigma="sqrt(x)+1/x")
        assert model.sigma_at(1.0) == pytest.approx(2.0)

    def test_uniform_initial_order(self):
        """A uniform initial law needs low < high."""
        with pytest.raises(ValidationError, match="low"):
            UniformInitial(low=2.0, high=1.0)
        with pytest.raises(ValidationError):
            UniformInitial(low=1.0, high=1.0)
        assert UniformInitial(low=0.0, high=1.0).inverse_cdf(0.5) == pytest.approx(0.5)


class TestStepKernel:
    """Tests for the block kernel shared by coupled copies."""

    def test_shared_noise_keeps_order(self, reflected_bm):
        """Constant sigma and a monotone drift keep X1 <= X2 under shared noise."""
        kernel = StepKernel(reflected_bm, 0.01)
        gen = block_generator(5, Stream.COUPLED, 0)
        x1 = np.zeros(200)
        x2 = np.full(200, 1.5)
        for _ in range(300):
            noise = kernel.draw(gen, 200)
            x2, _ = kernel.advance(x2, noise)
            x1, _ = kernel.advance(x1, noise)
            assert np.all(x1 <= x2)

    def test_equal_states_stay_equal(self, jump_example):
        """Equal states fed the same noise stay equal, jumps included."""
        kernel = StepKernel(jump_example, 0.01)
        gen = block_generator(5, Stream.COUPLED, 0)
        x = np.linspace(0.0, 3.0, 50)
        for _ in range(20):
            noise = kernel.draw(gen, 50)
            a, _ = kernel.advance(x, noise)
            b, _ = kernel.advance(x.copy(), noise)
            np.testing.assert_array_equal(a, b)
            x = a

    def test_jump_draws_present(self, jump_example):
        """Jump models draw counts and uniforms for every path."""
        kernel = StepKernel(jump_example, 0.5)
        noise = kernel.draw(block_generator(1, Stream.COUPLED, 0), 1000)
        assert noise.counts is not None
        assert noise.uniforms.shape[0] == 1000

    def test_diffusion_has_no_jump_draws(self, reflected_bm):
        """Pure diffusions draw Gaussians only."""
        noise = StepKernel(reflected_bm, 0.01).draw(block_generator(1, Stream.COUPLED, 0), 10)
        assert noise.counts is None
        assert noise.uniforms is None

    def test_levy_density_compensator(self):
        """Small jumps of a density become drift; large ones have mass mu([eps, inf))."""
        model = LevyModel(drift=-2.0, sigma=1.0, measure=DensityMeasure(density="exp(-z)"))
        kernel = StepKernel(model, 0.01, epsilon=0.05)
        assert kernel.levy.compensator > 0.0
        assert kernel.jump_rate == pytest.approx(np.exp(-0.05), rel=1e-8)

    def test_unsupported_model(self):
        """Unknown model types are rejected."""
        with pytest.raises(TypeError):
            StepKernel(object(), 0.01)


class TestStreams:
    """Tests for block generators and scheduling."""

    def test_generator_is_reproducible(self):
        """The same (seed, stream, block) gives the same draws."""
        a = block_generator(9, Stream.COUPLED, 3).random(5)
        b = block_generator(9, Stream.COUPLED, 3).random(5)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        """Different streams give different draws."""
        a = block_generator(9, Stream.COUPLED, 0).random(5)
        b = block_generator(9, Stream.SINGLE, 0).random(5)
        assert not np.array_equal(a, b)

    def test_split_blocks(self):
        """Blocks cover the paths in order with a short last block."""
        blocks = split_blocks(10, 4)
        assert [(b.start, b.stop) for b in blocks] == [(0, 4), (4, 8), (8, 10)]
        assert blocks[-1].size == 2

    def test_run_blocks_keeps_order(self):
        """Results come back in block order for any thread count."""
        blocks = split_blocks(100, 7)
        serial = run_blocks(lambda b: b.index, blocks, threads=1)
        parallel = run_blocks(lambda b: b.index, blocks, threads=4)
        assert serial == parallel == list(range(len(blocks)))
