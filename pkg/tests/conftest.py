"""Pytest fixtures and test utilities."""

import json
from pathlib import Path

import pytest

from ergoline.analysis import RateKernel
from ergoline.models.lyapunov import AffineV, ExpV, PowerAffineV
from ergoline.models.process import (
    CompoundMeasure,
    DiffusionModel,
    ExpDisplacementKernel,
    ExponentialLaw,
    JumpDiffusionModel,
    LevyModel,
    SimConfig,
)
from ergoline.models.rates import ConstantPhi, LinearPhi, PowerPhi

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def constant_drift() -> DiffusionModel:
    """Reflected BM with drift -2 and unit noise."""
    return DiffusionModel(name="constant-drift", drift="-2", sigma="1")


@pytest.fixture
def reflected_bm() -> DiffusionModel:
    """Reflected BM with drift -1 and unit noise."""
    return DiffusionModel(name="reflected-bm", drift="-1", sigma="1")


@pytest.fixture
def sqrt_drift() -> DiffusionModel:
    """Drift -3(1+x)^(-1/2): subexponential convergence."""
    return DiffusionModel(name="sqrt-drift", drift="-3*(1+x)^-0.5", sigma="1")


@pytest.fixture
def jump_example() -> JumpDiffusionModel:
    """Diffusion with state-dependent exponential jumps and m(x) = -(x+1)^(-1/2)."""
    return JumpDiffusionModel(
        name="jump-example",
        base=DiffusionModel(drift="-3*(x+1)^-0.5", sigma="1"),
        intensity=2.0,
        kernel=ExpDisplacementKernel(rate="(x+1)^0.5"),
    )


@pytest.fixture
def levy_model() -> LevyModel:
    """Reflected Levy process: drift -2, sigma 1, rate-1 Exp(1) jumps."""
    return LevyModel(
        name="levy-exp-jumps",
        drift=-2.0,
        sigma=1.0,
        measure=CompoundMeasure(rate=1.0, law=ExponentialLaw(mean=1.0)),
    )


@pytest.fixture
def affine_v() -> AffineV:
    return AffineV(c=1.0)


@pytest.fixture
def exp_v() -> ExpV:
    return ExpV(lam=1.0)


@pytest.fixture
def power_affine_v() -> PowerAffineV:
    return PowerAffineV(lam=1.0, beta=2.0)


@pytest.fixture
def linear_kernel() -> RateKernel:
    return RateKernel(LinearPhi(k=0.5))


@pytest.fixture
def power_kernel() -> RateKernel:
    return RateKernel(PowerPhi(c=1.0, gamma=0.5))


@pytest.fixture
def constant_kernel() -> RateKernel:
    return RateKernel(ConstantPhi(k=2.0))


@pytest.fixture
def small_sim() -> SimConfig:
    """Short, cheap simulation used by the fast tests."""
    return SimConfig(dt=0.01, horizon=1.0, n_paths=500, master_seed=7)


@pytest.fixture
def config_file(tmp_path):
    """Write a config dict to a JSON file and return its path."""

    def _write(data: dict, name: str = "experiment.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def shipped_config():
    """Load one of the configs under configs/ as a dict."""

    def _load(name: str) -> dict:
        return json.loads((CONFIG_DIR / name).read_text(encoding="utf-8"))

    return _load
