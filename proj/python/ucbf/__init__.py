"""Adaptive safety filters under unmatched parametric uncertainty."""

import json

from . import _ucbf
from ._ucbf import (
    ConfigError,
    DomainError,
    InconsistentMeasurement,
    InfeasibleStart,
    UcbfError,
    UnsupportedFeature,
    pointwise_filter,
    project_halfspace,
    solve_min_norm,
    tightened_threshold,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "InconsistentMeasurement",
    "InfeasibleStart",
    "UcbfError",
    "UnsupportedFeature",
    "check_premises",
    "config",
    "list_scenarios",
    "parse_report",
    "pointwise_filter",
    "project_halfspace",
    "run",
    "solve_min_norm",
    "sweep",
    "tightened_threshold",
    "verify",
]


def _source(scenario):
    if isinstance(scenario, dict):
        return json.dumps(scenario)
    return scenario


def _sets(overrides):
    if not overrides:
        return []
    return [(k, v if isinstance(v, str) else json.dumps(v)) for k, v in overrides.items()]


def parse_report(text):
    """`key: value` lines to a dict; numeric values become floats."""
    out = {}
    for line in text.splitlines():
        key, sep, value = line.partition(": ")
        if not sep:
            continue
        try:
            parsed = float(value)
        except ValueError:
            parsed = value
        if key in out:
            if not isinstance(out[key], list):
                out[key] = [out[key]]
            out[key].append(parsed)
        else:
            out[key] = parsed
    return out


def list_scenarios():
    return json.loads(_ucbf.gallery_json())["scenarios"]


def config(scenario, overrides=None):
    """Resolved scenario config as a dict (built-in id, JSON text or dict)."""
    return json.loads(_ucbf.resolve_config_json(_source(scenario), _sets(overrides)))


def check_premises(scenario, overrides=None):
    return _ucbf.check_premises(_source(scenario), _sets(overrides))


def verify(scenario, overrides=None, jobs=1):
    return _ucbf.verify(_source(scenario), _sets(overrides), jobs)


def run(scenario, overrides=None):
    res = _ucbf.run(_source(scenario), _sets(overrides))
    res["report"] = parse_report(res.pop("report_text"))
    return res


def sweep(scenario, param, values, overrides=None, jobs=1):
    return _ucbf.sweep(_source(scenario), _sets(overrides), param, list(values), jobs)
