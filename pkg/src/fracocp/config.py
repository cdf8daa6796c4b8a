"""JSON scenario configuration.

A document has the blocks ``model``, ``initial_state`` (required) and
``weights``, ``grid``, ``sweep``, ``alphas``, ``output_dir`` (optional).
Every error message starts with the dotted path of the offending key.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from .fracode import TimeGrid
from .focp import AdjointMode, SweepConfig
from .model import ModelParams, ObjectiveWeights, State

DEFAULT_TF = 100.0
DEFAULT_N_STEPS = 1000
DEFAULT_OUTPUT_DIR = "results"
TOP_LEVEL_KEYS = ("model", "weights", "initial_state", "grid", "sweep", "alphas", "output_dir")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    model: ModelParams
    weights: ObjectiveWeights
    initial_state: State
    grid: TimeGrid
    sweep: SweepConfig
    alphas: tuple[float, ...]
    output_dir: Path = field(default_factory=lambda: Path(DEFAULT_OUTPUT_DIR))


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _block(doc: dict, name: str, required: bool = False) -> dict:
    if name not in doc:
        if required:
            raise ConfigError(f"{name}: missing required block")
        return {}
    block = doc[name]
    if not isinstance(block, dict):
        raise ConfigError(f"{name}: expected an object")
    return block


def _check_keys(block: dict, allowed, path: str, required=()) -> None:
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")
    for key in required:
        if key not in block:
            raise ConfigError(f"{path}.{key}: missing required key")


def _build(cls, kwargs: dict, path: str):
    # dataclass validators report "<field>: <reason>"
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}.{exc}") from None


def _parse_model(doc) -> ModelParams:
    block = _block(doc, "model", required=True)
    names = [f.name for f in fields(ModelParams)]
    _check_keys(block, names, "model", required=[n for n in names if n != "alpha"])
    kwargs = {k: _number(v, f"model.{k}") for k, v in block.items()}
    return _build(ModelParams, kwargs, "model")


def _parse_weights(doc) -> ObjectiveWeights:
    block = _block(doc, "weights")
    _check_keys(block, [f.name for f in fields(ObjectiveWeights)], "weights")
    kwargs = {k: _number(v, f"weights.{k}") for k, v in block.items()}
    return _build(ObjectiveWeights, kwargs, "weights")


def _parse_state(doc) -> State:
    block = _block(doc, "initial_state", required=True)
    _check_keys(block, State._fields, "initial_state", required=State._fields)
    values = {}
    for k in State._fields:
        values[k] = _number(block[k], f"initial_state.{k}")
        if values[k] < 0:
            raise ConfigError(f"initial_state.{k}: must be non-negative")
    return State(**values)


def _parse_grid(doc) -> TimeGrid:
    block = _block(doc, "grid")
    _check_keys(block, ("tf", "n_steps"), "grid")
    tf = _number(block.get("tf", DEFAULT_TF), "grid.tf")
    n_steps = _integer(block.get("n_steps", DEFAULT_N_STEPS), "grid.n_steps")
    if tf <= 0:
        raise ConfigError("grid.tf: must be positive")
    if n_steps < 2:
        raise ConfigError("grid.n_steps: must be at least 2")
    return TimeGrid(tf, n_steps)


def _parse_sweep(doc) -> SweepConfig:
    block = _block(doc, "sweep")
    allowed = (
        "max_iterations", "omega", "delta", "bounds",
        "adjoint_mode", "adjoint_rl_correction", "corrector_iterations",
    )
    _check_keys(block, allowed, "sweep")
    kwargs = {}
    for key in ("max_iterations", "corrector_iterations"):
        if key in block:
            kwargs[key] = _integer(block[key], f"sweep.{key}")
    for key in ("omega", "delta"):
        if key in block:
            kwargs[key] = _number(block[key], f"sweep.{key}")
    if "bounds" in block:
        bounds = block["bounds"]
        if not isinstance(bounds, list) or len(bounds) != 2:
            raise ConfigError("sweep.bounds: expected [u_min, u_max]")
        kwargs["u_min"] = _number(bounds[0], "sweep.bounds[0]")
        kwargs["u_max"] = _number(bounds[1], "sweep.bounds[1]")
    if "adjoint_mode" in block:
        try:
            kwargs["adjoint_mode"] = AdjointMode(block["adjoint_mode"])
        except ValueError:
            modes = ", ".join(m.value for m in AdjointMode)
            raise ConfigError(f"sweep.adjoint_mode: must be one of {modes}") from None
    if "adjoint_rl_correction" in block:
        if not isinstance(block["adjoint_rl_correction"], bool):
            raise ConfigError("sweep.adjoint_rl_correction: expected true or false")
        kwargs["adjoint_rl_correction"] = block["adjoint_rl_correction"]
    try:
        return SweepConfig(**kwargs)
    except ValueError as exc:
        msg = str(exc).replace("u_min:", "bounds:")
        raise ConfigError(f"sweep.{msg}") from None


def _parse_alphas(doc, model: ModelParams) -> tuple[float, ...]:
    if "alphas" not in doc:
        return (model.alpha,)
    alphas = doc["alphas"]
    if not isinstance(alphas, list) or not alphas:
        raise ConfigError("alphas: expected a non-empty list")
    out = []
    for i, a in enumerate(alphas):
        a = _number(a, f"alphas[{i}]")
        if not (0 < a <= 1):
            raise ConfigError(f"alphas[{i}]: must lie in (0,1]")
        out.append(a)
    return tuple(out)


def parse_config(text: str) -> ScenarioConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<document>: malformed JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError("<document>: expected a JSON object")
    for key in doc:
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(f"{key}: unknown key")
    model = _parse_model(doc)
    output_dir = doc.get("output_dir", DEFAULT_OUTPUT_DIR)
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("output_dir: expected a non-empty string")
    return ScenarioConfig(
        model=model,
        weights=_parse_weights(doc),
        initial_state=_parse_state(doc),
        grid=_parse_grid(doc),
        sweep=_parse_sweep(doc),
        alphas=_parse_alphas(doc, model),
        output_dir=Path(output_dir),
    )


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"<document>: cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def paper_scenario_text() -> str:
    return resources.files("fracocp").joinpath("data/paper_scenario.json").read_text()


def paper_scenario() -> ScenarioConfig:
    """The bundled scenario: published parameters and initial values, four orders."""
    return parse_config(paper_scenario_text())
