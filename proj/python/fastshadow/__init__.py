"""Python front end for the fermionic correlation estimators."""

import csv
import io
import json
import os

from ._core import (
    CapacityError,
    ConfigError,
    MappingKind,
    PauliString,
    choose_regime,
    majoranas,
    majority_select,
    oracle_config,
    run_config,
    scaling_config,
)

__all__ = [
    "CapacityError",
    "ConfigError",
    "MappingKind",
    "PauliString",
    "choose_regime",
    "majoranas",
    "majority_select",
    "oracle",
    "run",
    "scaling",
]


def _text(config):
    if isinstance(config, dict):
        return json.dumps(config)
    if isinstance(config, (str, os.PathLike)) and os.path.exists(config):
        with open(config) as fh:
            return fh.read()
    return str(config)


def run(config, max_workers=0):
    """Run an experiment. `config` is a dict, a JSON string or a path.

    Returns a dict with the parsed result document plus the raw CSV and report.
    """
    table, doc, report, passed = run_config(_text(config), max_workers)
    result = json.loads(doc)
    result["csv"] = table
    result["report"] = report
    result["passed"] = passed
    return result


def oracle(config):
    """Exact correlations as a list of CSV rows (dicts)."""
    return list(csv.DictReader(io.StringIO(oracle_config(_text(config)))))


def scaling(sweep):
    table, summary, passed = scaling_config(_text(sweep))
    return {"rows": list(csv.DictReader(io.StringIO(table))), "table": summary, "passed": passed}
