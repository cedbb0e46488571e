"""Gain-scheduled admittance force control of a long-reach boom arm."""

import json

from ._boomforce import (
    BoomforceError,
    admittance_step,
    default_config_json,
    dls_inverse,
    equivalent_stiffness,
    fit_second_order,
    forward_kinematics,
    jacobian,
    resolved_rate,
    run_scenario_json,
    schedule_gains,
    series_stiffness,
    stability_bound,
    task_normal_stiffness,
)

__all__ = [
    "BoomforceError",
    "admittance_step",
    "default_config",
    "dls_inverse",
    "equivalent_stiffness",
    "fit_second_order",
    "forward_kinematics",
    "jacobian",
    "resolved_rate",
    "run_scenario",
    "schedule_gains",
    "series_stiffness",
    "stability_bound",
    "task_normal_stiffness",
]


def default_config():
    """Default scenario as a nested dict."""
    return json.loads(default_config_json())


def run_scenario(config=None, overrides=()):
    """Run a closed-loop scenario.

    ``config`` is a dict, a JSON string, or None for defaults; missing keys
    take default values. ``overrides`` are ``"section.key=value"`` strings.
    Returns ``(trace, summary)``: trace maps column names to lists, summary is
    the same dict written to summary.json.
    """
    if config is None:
        text = "{}"
    elif isinstance(config, str):
        text = config
    else:
        text = json.dumps(config)
    trace, summary = run_scenario_json(text, list(overrides))
    return trace, json.loads(summary)
