"""Experiment configuration documents.

Configs are versioned JSON with a fixed schema; unknown keys are hard errors
so that a typo in a scientific parameter cannot silently fall back to a
default.  See README for the full schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

from .delays import (
    AlternatingParityDelay,
    ConstantDelay,
    ConstantStepDelay,
    DelayModel,
    LogLagDelay,
    PiecewiseLinearDelay,
    ProportionalDelay,
    ProportionalStepDelay,
    SinusoidalDelay,
)
from .model import CONTINUOUS, DISCRETE, Dilation, PolyVectorField, SystemModel
from .simulate import constant_history, tabulated_history

SCHEMA_VERSION = 1

KNOWN_BOUNDS = ("auto", "eta", "theta", "xi", "beta")


class ConfigError(ValueError):
    """Malformed experiment document (wrong keys, types, or references)."""


def _require_mapping(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object, got {type(obj).__name__}")
    return obj


def _check_keys(d: dict, required: set[str], optional: set[str], where: str) -> None:
    keys = set(d)
    missing = required - keys
    if missing:
        raise ConfigError(f"{where} is missing required keys: {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise ConfigError(f"{where} has unknown keys: {sorted(unknown)}")


def _field_from(doc, where: str) -> PolyVectorField:
    doc = _require_mapping(doc, where)
    _check_keys(doc, {"n", "components"}, set(), where)
    try:
        return PolyVectorField.from_dict(doc)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


_DELAY_FAMILIES: dict[str, tuple[type, set[str]]] = {
    "constant": (ConstantDelay, {"tau"}),
    "sinusoidal": (SinusoidalDelay, {"a", "b"}),
    "piecewise_linear": (PiecewiseLinearDelay, {"knots"}),
    "proportional": (ProportionalDelay, {"alpha"}),
    "log_lag": (LogLagDelay, set()),
    "constant_steps": (ConstantStepDelay, {"d"}),
    "alternating_parity": (AlternatingParityDelay, set()),
    "proportional_steps": (ProportionalStepDelay, {"alpha"}),
}


def delay_from(doc, where: str = "delay") -> DelayModel:
    doc = _require_mapping(doc, where)
    family = doc.get("family")
    if family not in _DELAY_FAMILIES:
        raise ConfigError(
            f"{where}.family must be one of {sorted(_DELAY_FAMILIES)}, got {family!r}"
        )
    cls, params = _DELAY_FAMILIES[family]
    _check_keys(doc, {"family"} | params, set(), where)
    kwargs = {k: doc[k] for k in params}
    if family == "piecewise_linear":
        kwargs["knots"] = tuple((float(t), float(tau)) for t, tau in kwargs["knots"])
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass(frozen=True)
class SimSettings:
    h: float
    horizon: float


@dataclass(frozen=True)
class AnalysisSettings:
    v: tuple[float, ...] | None = None
    gamma: float = 0.9
    settle_fraction: float = 0.5
    bounds: tuple[str, ...] = ("auto",)
    alpha: float | None = None
    tau_sup: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    version: int
    system: SystemModel
    delays: tuple[DelayModel, ...]
    history_doc: dict
    sim: SimSettings
    analysis: AnalysisSettings
    seed: int = 0

    def history_continuous(self) -> Callable[[float], Sequence[float]]:
        doc = self.history_doc
        if "constant" in doc:
            return constant_history(doc["constant"])
        table = doc["table"]
        return tabulated_history(table["times"], table["states"])

    def history_discrete(self) -> dict[int, tuple[float, ...]]:
        doc = self.history_doc
        if "constant" in doc:
            # a constant history answers any index the simulator asks for
            return _ConstantMap(tuple(float(x) for x in doc["constant"]))
        table = doc["table"]
        return {int(k): tuple(map(float, xs)) for k, xs in zip(table["times"], table["states"])}


class _ConstantMap(dict):
    def __init__(self, vec):
        super().__init__()
        self._vec = vec

    def __getitem__(self, key):
        return self._vec


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(doc)


def parse_config(doc) -> ExperimentConfig:
    doc = _require_mapping(doc, "config")
    _check_keys(
        doc,
        {"version", "system", "delay", "initial_history", "sim"},
        {"analysis", "seed"},
        "config",
    )
    if doc["version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config version {doc['version']!r} (expected {SCHEMA_VERSION})")

    sys_doc = _require_mapping(doc["system"], "system")
    _check_keys(sys_doc, {"kind", "f", "delayed", "dilation", "degree"}, set(), "system")
    if sys_doc["kind"] not in (CONTINUOUS, DISCRETE):
        raise ConfigError(f"system.kind must be 'continuous' or 'discrete', got {sys_doc['kind']!r}")
    f = _field_from(sys_doc["f"], "system.f")
    delayed_docs = sys_doc["delayed"]
    if not isinstance(delayed_docs, list) or not delayed_docs:
        raise ConfigError("system.delayed must be a non-empty list of vector fields")
    gs = tuple(_field_from(g, f"system.delayed[{q}]") for q, g in enumerate(delayed_docs))
    try:
        dilation = Dilation(tuple(sys_doc["dilation"]))
        system = SystemModel(
            kind=sys_doc["kind"], f=f, delayed_terms=gs,
            dilation=dilation, degree=float(sys_doc["degree"]),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"system: {exc}") from exc

    delay_doc = doc["delay"]
    if isinstance(delay_doc, list):
        if len(delay_doc) != len(gs):
            raise ConfigError(
                f"delay list has {len(delay_doc)} entries for {len(gs)} delayed terms"
            )
        delays = tuple(delay_from(d, f"delay[{q}]") for q, d in enumerate(delay_doc))
    else:
        delays = (delay_from(delay_doc),) * len(gs)
    for q, d in enumerate(delays):
        if d.is_discrete != system.is_discrete:
            raise ConfigError(f"delay[{q}] time kind does not match the system kind")

    hist_doc = _require_mapping(doc["initial_history"], "initial_history")
    if set(hist_doc) == {"constant"}:
        vec = hist_doc["constant"]
        if not isinstance(vec, list) or len(vec) != system.n:
            raise ConfigError(f"initial_history.constant must be a vector of length {system.n}")
    elif set(hist_doc) == {"table"}:
        table = _require_mapping(hist_doc["table"], "initial_history.table")
        _check_keys(table, {"times", "states"}, set(), "initial_history.table")
        if len(table["times"]) != len(table["states"]):
            raise ConfigError("initial_history.table times and states must have equal length")
    else:
        raise ConfigError("initial_history must have exactly one of: constant, table")

    sim_doc = _require_mapping(doc["sim"], "sim")
    _check_keys(sim_doc, {"horizon"}, {"h"}, "sim")
    if system.is_discrete:
        if "h" in sim_doc:
            raise ConfigError("sim.h does not apply to discrete systems")
        sim = SimSettings(h=1.0, horizon=float(int(sim_doc["horizon"])))
    else:
        if "h" not in sim_doc:
            raise ConfigError("sim.h is required for continuous systems")
        sim = SimSettings(h=float(sim_doc["h"]), horizon=float(sim_doc["horizon"]))
    if sim.h <= 0.0 or sim.horizon <= 0.0:
        raise ConfigError("sim.h and sim.horizon must be positive")

    ana_doc = _require_mapping(doc.get("analysis", {}), "analysis")
    _check_keys(
        ana_doc, set(),
        {"v", "gamma", "settle_fraction", "bounds", "alpha", "tau_sup"},
        "analysis",
    )
    v = ana_doc.get("v")
    if v is not None:
        if not isinstance(v, list) or len(v) != system.n:
            raise ConfigError(f"analysis.v must be a vector of length {system.n}")
        v = tuple(float(x) for x in v)
    bounds = tuple(ana_doc.get("bounds", ["auto"]))
    for b in bounds:
        if b not in KNOWN_BOUNDS:
            raise ConfigError(f"analysis.bounds entries must be in {KNOWN_BOUNDS}, got {b!r}")
    gamma = float(ana_doc.get("gamma", 0.9))
    settle = float(ana_doc.get("settle_fraction", 0.5))
    if not 0.0 <= gamma < 1.0:
        raise ConfigError("analysis.gamma must lie in [0, 1)")
    if not 0.0 <= settle < 1.0:
        raise ConfigError("analysis.settle_fraction must lie in [0, 1)")
    alpha = ana_doc.get("alpha")
    if alpha is not None:
        alpha = float(alpha)
        if not 0.0 <= alpha < 1.0:
            raise ConfigError("analysis.alpha must lie in [0, 1)")
    tau_sup = ana_doc.get("tau_sup")
    if tau_sup is not None and float(tau_sup) < 0.0:
        raise ConfigError("analysis.tau_sup must be nonnegative")
    analysis = AnalysisSettings(
        v=v, gamma=gamma, settle_fraction=settle, bounds=bounds,
        alpha=alpha, tau_sup=None if tau_sup is None else float(tau_sup),
    )

    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")

    return ExperimentConfig(
        version=SCHEMA_VERSION, system=system, delays=delays,
        history_doc=hist_doc, sim=sim, analysis=analysis, seed=seed,
    )
