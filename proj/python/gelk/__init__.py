"""Bilinear coagulation systems: gelation, gel data, moments, simulation and random graphs."""

import json as _json
import os as _os

from . import _gelk
from ._gelk import (
    AtomicMeasure,
    BilinearSystem,
    BudgetError,
    ConfigError,
    GelkError,
    Model,
    NumericError,
    TypeVector,
    __version__,
    coupling_test,
    critical_slope,
    explosion_time,
    gel_data,
    gelation_time,
    graph_trajectory,
    kbar,
    load_model,
    merge,
    simulate,
    size_bias,
    sol_moments,
    spectrum,
    survival_coefficients,
    truncated_flory,
)


def run_config(config, base_dir=None):
    """Run an experiment config (dict or path). Returns (artifacts, config_hash)."""
    if isinstance(config, (str, _os.PathLike)):
        path = _os.fspath(config)
        with open(path) as f:
            doc = _json.load(f)
        base_dir = base_dir or _os.path.dirname(path) or "."
    else:
        doc = config
    return _gelk._run_config(_json.dumps(doc), base_dir or ".")

