"""Full-size Monte Carlo runs of the shipped experiment configs.

These take minutes each; deselect with ``pytest -m "not slow"``.
"""

import io
import json

import pytest
from rich.console import Console

from ergoline.experiments.reporter import ConsoleReporter
from ergoline.experiments.runner import run_command

from .conftest import CONFIG_DIR

pytestmark = pytest.mark.slow


@pytest.fixture
def reporter() -> ConsoleReporter:
    return ConsoleReporter(Console(file=io.StringIO(), width=120))


def report_of(out_dir) -> dict:
    return json.loads((out_dir / "report.json").read_text(encoding="utf-8"))["result"]["report"]


class TestExponentialRate:
    """Reflected BM with drift -1, V = e^x, phi(s) = s/2."""

    @pytest.mark.parametrize("seed", [None, 11, 12])
    def test_verify_passes(self, tmp_path, reporter, seed):
        """The certified bound holds at every checkpoint for several seeds."""
        code = run_command(
            "verify", CONFIG_DIR / "exponential_rate.json", seed=seed, threads=4,
            out_dir=tmp_path, reporter=reporter,
        )
        report = report_of(tmp_path)
        assert code == 0
        assert report["status"] == "PASS"
        assert report["order_violations"] == 0
        assert all(row["passed"] for row in report["rows"])

    def test_k_process_is_nonincreasing(self, tmp_path, reporter):
        """E[G(t, V(X(t)))] does not increase along the checkpoints."""
        code = run_command(
            "audit", CONFIG_DIR / "exponential_rate.json", threads=4, out_dir=tmp_path,
            reporter=reporter,
        )
        audit = json.loads((tmp_path / "audit.json").read_text(encoding="utf-8"))["result"]
        assert code == 0
        assert audit["lemma_g"]["passed"]
        assert audit["supermartingale"]["nonincreasing"]
        assert not audit["supermartingale"]["tainted"]

    @pytest.mark.parametrize("seed", [None, 21, 22])
    def test_doubled_rate_fails(self, tmp_path, reporter, seed):
        """Claiming twice the certified rate is caught already at t = 1."""
        code = run_command(
            "verify", CONFIG_DIR / "doubled_rate.json", seed=seed, threads=4,
            out_dir=tmp_path, reporter=reporter,
        )
        report = report_of(tmp_path)
        assert code == 1
        assert report["status"] == "FAIL"
        assert report["rows"][0]["t"] == 1.0
        assert not report["rows"][0]["passed"]
        assert not any(row["passed"] for row in report["rows"])


class TestSubexponentialRate:
    """Drift -3(1+x)^-1/2 with a fitted power phi and a total-variation bound."""

    @pytest.mark.parametrize("seed", [None, 31, 32])
    def test_verify_passes(self, tmp_path, reporter, seed):
        """The subexponential bound holds for several seeds."""
        code = run_command(
            "verify", CONFIG_DIR / "subexponential_rate.json", seed=seed, threads=4,
            out_dir=tmp_path, reporter=reporter,
        )
        report = report_of(tmp_path)
        assert code == 0
        assert report["status"] == "PASS"
        assert report["decomposition"] == "total-variation"


class TestReproducibility:
    """Result files do not depend on the worker count."""

    def test_verify_csv_identical_across_threads(self, tmp_path, reporter):
        """verify.csv is byte-identical for 1, 4 and 8 threads."""
        outputs = []
        for threads in (1, 4, 8):
            out = tmp_path / f"threads-{threads}"
            run_command(
                "verify", CONFIG_DIR / "exponential_rate.json", threads=threads, out_dir=out,
                reporter=reporter,
            )
            outputs.append((out / "verify.csv").read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]
