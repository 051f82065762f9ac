"""Level-set discontinuity tracking and piecewise polynomial surrogates."""

import json as _json

from ._lstrack import (
    LstrackError,
    burgers_indicator,
    burgers_qoi,
    solve_lad,
    solve_ols,
    track_burgers,
)
from ._lstrack import run_experiment as _run_experiment

__all__ = [
    "LstrackError",
    "burgers_indicator",
    "burgers_qoi",
    "run_experiment",
    "solve_lad",
    "solve_ols",
    "track_burgers",
]


def run_experiment(config, out_root="runs"):
    """Run an experiment from a config dict or a path to a JSON file."""
    if isinstance(config, dict):
        text = _json.dumps(config)
    else:
        with open(config) as f:
            text = f.read()
    return _run_experiment(text, str(out_root))
