"""Experiment configs, pipelines and the ``ergoline`` command line."""

from .loader import config_hash, load_config, parse_config
from .pipelines import (
    AuditResult,
    build_certificate,
    build_decomposition,
    run_audit,
    run_bound,
    run_certify,
    run_simulate,
    run_stationary,
    run_verify,
)

__all__ = [
    "AuditResult",
    "build_certificate",
    "build_decomposition",
    "config_hash",
    "load_config",
    "parse_config",
    "run_audit",
    "run_bound",
    "run_certify",
    "run_simulate",
    "run_stationary",
    "run_verify",
]
