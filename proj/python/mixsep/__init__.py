"""Proportion and distribution of the unknown component in a mixture with a known background."""

import json as _json

from ._core import (
    Distribution,
    alpha0,
    asymptotic_cvm_quantile,
    criterion,
    criterion_curve,
    default_cn,
    elbow_estimate,
    estimate_alpha,
    generate,
    homogeneity_test,
    isotonic_regression,
    lfdr,
    lower_bound,
    recover_signal,
    simulate_hn_quantile,
)
from ._core import run_simulation as _run_simulation

__version__ = "0.1.0"


def run_simulation(config):
    """Run a simulation config (dict or JSON text) and return the metrics table as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_simulation(text))


__all__ = [
    "Distribution",
    "alpha0",
    "asymptotic_cvm_quantile",
    "criterion",
    "criterion_curve",
    "default_cn",
    "elbow_estimate",
    "estimate_alpha",
    "generate",
    "homogeneity_test",
    "isotonic_regression",
    "lfdr",
    "lower_bound",
    "recover_signal",
    "run_simulation",
    "simulate_hn_quantile",
]
