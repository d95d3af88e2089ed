"""Pyramid ORAM: hierarchical oblivious RAM with Zigzag hash tables."""

import json
from fractions import Fraction

from ._core import (
    PAYLOAD_BYTES,
    BuildFailure,
    CapacityExceeded,
    InsufficientData,
    InvalidParameter,
    PyramidConfig,
    PyramidOram,
    amortized_cost,
    bucket_overflow_prob_bound,
    expected_spill_bound,
    mc_throw_spill as _mc_throw_spill,
    online_cost,
    rebuild_target,
    run_cli,
    total_cost,
    zigzag_failure_bound,
)


def mc_throw_spill(m, n, c, trials, seed=0, workers=1):
    """Monte Carlo spill statistics as a dict."""
    return json.loads(_mc_throw_spill(m, n, c, trials, seed, workers))


def exact_fraction(bound):
    """The exact value of a bound dict as a Fraction, or None."""
    return None if bound["exact"] is None else Fraction(bound["exact"])


__all__ = [
    "PAYLOAD_BYTES",
    "BuildFailure",
    "CapacityExceeded",
    "InsufficientData",
    "InvalidParameter",
    "PyramidConfig",
    "PyramidOram",
    "amortized_cost",
    "bucket_overflow_prob_bound",
    "exact_fraction",
    "expected_spill_bound",
    "mc_throw_spill",
    "online_cost",
    "rebuild_target",
    "run_cli",
    "total_cost",
    "zigzag_failure_bound",
]
