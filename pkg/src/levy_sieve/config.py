"""Flat ``key = value`` experiment configuration files.

One assignment per line, dotted keys, ``#`` starts a comment.  Values are
Python literals (numbers, strings, tuples, lists, booleans); anything that
does not parse as a literal is taken as a bare string, so
``model.name = constant`` works without quotes.
"""
from __future__ import annotations

import ast
import inspect
from typing import Any, Mapping

from .discrete import ThresholdRule
from .estimate import PenaltyConfig
from .experiments import STAT_FUNCTIONS, ExperimentConfig
from .model import CATALOG

EXPERIMENTS = ("risk", "rate", "concentration", "discrete")

# key -> ExperimentConfig field; ``None`` marks keys consumed elsewhere
_SCALAR_KEYS = {
    "experiment": "experiment",
    "measure": "measure",
    "basis.k": "k",
    "basis.mmax": "mmax",
    "basis.m": "discrete_m",
    "t": "T",
    "t.grid": "t_grid",
    "reps": "reps",
    "seed": "seed",
    "threads": "threads",
    "sigma": "sigma",
    "drift": "drift",
    "discrete.grid": "discrete_grid",
    "discrete.f": "stat",
    "concentration.lambda": "conc_lambda",
    "concentration.u_grid": "u_grid",
    "concentration.eps": "eps",
    "rate.tail3": "rate_tail3",
}
_OTHER_KEYS = {"model.name", "window.lo", "window.hi", "penalty.form", "penalty.c", "penalty.c1",
               "penalty.c2", "discrete.n", "threshold.kappa", "threshold.gamma"}
_TUPLE_FIELDS = {"t_grid", "discrete_grid", "u_grid"}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; the message names the key."""


def _literal(text: str) -> Any:
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_text(text: str) -> dict[str, Any]:
    """Parse the file body into an ordered ``{key: value}`` map."""
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _literal(value.strip())
    return out


def _model_params(name: str, raw: Mapping[str, Any]) -> dict[str, Any]:
    ctor = CATALOG[name]
    allowed = set(inspect.signature(ctor).parameters) - {"window", "measure"}
    params = {}
    for key, value in raw.items():
        if not key.startswith("model.") or key == "model.name":
            continue
        param = key[len("model."):]
        if (param if param != "lambda" else "lam") not in allowed:
            raise ConfigError(f"{key}: model {name!r} takes {sorted(allowed)}")
        params[param] = value
    return params


def _number(raw, key, kind=float):
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if kind is int and value != int(value):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return kind(value)


def build_config(raw: Mapping[str, Any], seed: int | None = None, reps: int | None = None,
                 threads: int | None = None) -> ExperimentConfig:
    """Validate a parsed map and turn it into an :class:`ExperimentConfig`.

    ``seed``, ``reps`` and ``threads`` override the file when given.
    """
    for key in raw:
        if key not in _SCALAR_KEYS and key not in _OTHER_KEYS and not key.startswith("model."):
            raise ConfigError(f"unknown key {key!r}")
    if "experiment" not in raw:
        raise ConfigError(f"missing key 'experiment' (one of {', '.join(EXPERIMENTS)})")
    exp = raw["experiment"]
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {exp!r}; valid options: {', '.join(EXPERIMENTS)}")

    kw: dict[str, Any] = {}
    for key, fld in _SCALAR_KEYS.items():
        if key not in raw:
            continue
        value = raw[key]
        if fld in _TUPLE_FIELDS:
            if not isinstance(value, (list, tuple)) or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
                raise ConfigError(f"{key}: expected a list of numbers, got {value!r}")
            value = tuple(float(v) for v in value) if fld != "discrete_grid" else tuple(int(v) for v in value)
        elif fld in ("k", "mmax", "discrete_m", "reps", "seed", "threads"):
            value = _number(raw, key, int)
        elif fld in ("T", "sigma", "drift", "conc_lambda", "eps"):
            value = _number(raw, key)
        elif fld == "rate_tail3":
            if not isinstance(value, bool):
                raise ConfigError(f"{key}: expected true/false, got {value!r}")
        elif fld == "stat" and value not in STAT_FUNCTIONS:
            raise ConfigError(f"{key}: unknown function {value!r}; valid: {', '.join(STAT_FUNCTIONS)}")
        kw[fld] = value
    if "discrete.n" in raw:
        if "discrete.grid" in raw:
            raise ConfigError("discrete.n: give either discrete.n or discrete.grid, not both")
        kw["discrete_grid"] = (_number(raw, "discrete.n", int),)

    if exp != "concentration":
        if "model.name" not in raw:
            raise ConfigError("missing key 'model.name'")
        name = raw["model.name"]
        if name not in CATALOG:
            raise ConfigError(f"model.name: unknown model {name!r}; valid: {', '.join(sorted(CATALOG))}")
        kw["model_name"] = name
        kw["model_params"] = _model_params(name, raw)
        if ("window.lo" in raw) != ("window.hi" in raw):
            raise ConfigError(f"missing key {'window.hi' if 'window.lo' in raw else 'window.lo'!r}")
        kw["window"] = (_number(raw, "window.lo"), _number(raw, "window.hi")) if "window.lo" in raw else None

    if exp in ("risk", "rate"):
        if "penalty.c" not in raw:
            raise ConfigError("missing key 'penalty.c'")
        pk = {"form": str(raw.get("penalty.form", "c")), "c": _number(raw, "penalty.c")}
        for key in ("penalty.c1", "penalty.c2"):
            if key in raw:
                pk[key.split(".")[1]] = _number(raw, key)
        try:
            kw["penalty"] = PenaltyConfig(**pk)
        except ValueError as exc:
            raise ConfigError(f"penalty: {exc}") from None
    if exp == "rate" and "t.grid" not in raw:
        raise ConfigError("missing key 't.grid'")
    if exp == "discrete" and "discrete_grid" not in kw:
        raise ConfigError("missing key 'discrete.grid' (or 'discrete.n')")

    if "threshold.kappa" in raw or "threshold.gamma" in raw:
        tk = {}
        for key in ("threshold.kappa", "threshold.gamma"):
            if key in raw:
                tk[key.split(".")[1]] = _number(raw, key)
        try:
            kw["threshold"] = ThresholdRule(**tk)
        except ValueError as exc:
            raise ConfigError(f"threshold: {exc}") from None

    for name, value in (("seed", seed), ("reps", reps), ("threads", threads)):
        if value is not None:
            kw[name] = value
    if kw.get("seed", 0) < 0:
        raise ConfigError("seed: must be a non-negative integer")
    if kw.get("threads", 1) < 1:
        raise ConfigError("threads: must be >= 1")
    try:
        return ExperimentConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, **overrides) -> tuple[ExperimentConfig, dict[str, Any]]:
    """Read ``path``; returns the config and the raw map for echoing."""
    with open(path, encoding="utf-8") as fh:
        raw = parse_text(fh.read())
    return build_config(raw, **overrides), raw
