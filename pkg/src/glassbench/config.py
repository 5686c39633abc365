"""JSON experiment configs.

A config is a single JSON object::

    {
      "sizes": [25, 50, 75, 100, 150, 200],
      "params": [{"variant": "alg2", "lambda1_0": 1.0, "k": 0.98}],
      "nreal": 50,
      "restarts_per_sample": "min(N,50)",
      "protocol": "fixed_restarts",
      "budget_per_sample": null,
      "master_seed": 20070301,
      "h_n_mode": "best_visited"
    }

Every key except ``params`` is optional.  ``budget_per_sample`` defaults to
2 seconds when ``protocol`` is ``"fixed_budget"``.  Each ``params`` entry accepts the
fields of ``TrajectoryParams``.  A ``manifest.json`` written by ``sweep`` is
also accepted; its ``config_echo`` is used.
"""

from __future__ import annotations

import json
from dataclasses import fields

from .dynamics import TrajectoryParams
from .harness import ExperimentConfig

DESK_SIZES = [25, 50, 75, 100, 150, 200]
DEFAULT_BUDGET = 2.0  # seconds per realization under fixed_budget
SEED_ENV = "GLASSBENCH_SEED"

_TOP_KEYS = {"sizes", "params", "nreal", "restarts_per_sample", "protocol",
             "budget_per_sample", "master_seed", "h_n_mode"}
_PARAM_KEYS = {f.name for f in fields(TrajectoryParams)}


class ConfigError(ValueError):
    pass


def parse_config(doc: dict, overrides: dict | None = None) -> ExperimentConfig:
    if "config_echo" in doc:
        doc = doc["config_echo"]
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    doc = {**doc, **{k: v for k, v in (overrides or {}).items() if v is not None}}
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    if "params" not in doc or not isinstance(doc["params"], list):
        raise ConfigError("params: required list of parameter points")
    grid = []
    for i, p in enumerate(doc["params"]):
        if not isinstance(p, dict):
            raise ConfigError(f"params[{i}]: must be an object")
        bad = set(p) - _PARAM_KEYS
        if bad:
            raise ConfigError(f"params[{i}]: unknown keys {sorted(bad)}")
        if "variant" not in p or "lambda1_0" not in p:
            raise ConfigError(f"params[{i}]: 'variant' and 'lambda1_0' are required")
        try:
            grid.append(TrajectoryParams(**p))
        except ValueError as exc:
            raise ConfigError(f"params[{i}].{exc}") from None
    protocol = doc.get("protocol", "fixed_restarts")
    budget = doc.get("budget_per_sample")
    if protocol == "fixed_budget" and budget is None:
        budget = DEFAULT_BUDGET
    try:
        return ExperimentConfig(
            sizes=[int(n) for n in doc.get("sizes", DESK_SIZES)],
            params_grid=grid,
            nreal=int(doc.get("nreal", 50)),
            restarts_per_sample=doc.get("restarts_per_sample", "min(N,50)"),
            protocol=protocol,
            budget_per_sample=budget,
            master_seed=int(doc.get("master_seed", 20070301)),
            h_n_mode=doc.get("h_n_mode", "best_visited"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    return parse_config(doc, overrides)


def config_echo(cfg: ExperimentConfig) -> dict:
    """Fully resolved config in the same schema ``parse_config`` reads."""
    return {
        "sizes": list(cfg.sizes),
        "params": [p.to_dict() for p in cfg.params_grid],
        "nreal": cfg.nreal,
        "restarts_per_sample": cfg.restarts_per_sample,
        "protocol": cfg.protocol,
        "budget_per_sample": cfg.budget_per_sample,
        "master_seed": cfg.master_seed,
        "h_n_mode": cfg.h_n_mode,
    }
