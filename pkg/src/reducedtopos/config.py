"""System descriptions read from YAML or JSON.

Example::

    hilbert_dim: 2
    operators:
      sz: [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]
      sx: [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]
    contexts: {Vz: [sz], Vx: [sx]}
    selector: {operators: [sz]}
    states:
      up: {vector: [[1, 0], [0, 0]]}
      mixed: maximally_mixed
    propositions:
      z_up: {operator: sz, values: [1]}
    thresholds: [1.0]
    levels: [0, 0.25, 0.5, 0.75, 1]

Matrix entries are ``[re, im]`` pairs; a bare number is read as a real entry.
"""
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import operators as ops
from .errors import ConfigError

DEFAULT_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass
class SystemConfig:
    hilbert_dim: int
    operators: dict
    contexts: dict
    selector: dict
    states: dict = field(default_factory=dict)
    propositions: dict = field(default_factory=dict)
    thresholds: tuple = (1.0,)
    levels: tuple = DEFAULT_LEVELS
    verify: dict = field(default_factory=dict)
    max_enum: int = None
    seed: int = 0


def _matrix(data, dim, where):
    try:
        arr = np.asarray(data, dtype=object)
        if arr.ndim == 3:
            m = ops.matrix_from_pairs(data)
        elif arr.ndim == 2:
            m = ops.as_matrix(np.asarray(data, dtype=float))
        else:
            raise ValueError("expected a square array")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad matrix: {exc}", where) from None
    if m.shape != (dim, dim):
        raise ConfigError(f"expected {dim}x{dim}, got {m.shape[0]}x{m.shape[1]}", where)
    return m


def _vector(data, dim, where):
    try:
        arr = np.asarray(data, dtype=float)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad vector: {exc}", where) from None
    if arr.ndim == 2 and arr.shape[1] == 2:
        vec = arr[:, 0] + 1j * arr[:, 1]
    elif arr.ndim == 1:
        vec = arr.astype(complex)
    else:
        raise ConfigError("vector must be a list of numbers or [re, im] pairs", where)
    if vec.shape[0] != dim:
        raise ConfigError(f"expected length {dim}, got {vec.shape[0]}", where)
    return vec


def _names(items, known, where):
    if not isinstance(items, list):
        raise ConfigError("expected a list of operator names", where)
    missing = [x for x in items if x not in known]
    if missing:
        raise ConfigError(f"unknown operator(s) {missing}", where)
    return list(items)


def parse_config(doc):
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a mapping")
    try:
        dim = int(doc["hilbert_dim"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("missing or invalid integer", "hilbert_dim") from None
    if dim < 1:
        raise ConfigError("must be positive", "hilbert_dim")
    operators = {}
    for name, data in (doc.get("operators") or {}).items():
        operators[name] = _matrix(data, dim, f"operators.{name}")
    raw_ctx = doc.get("contexts") or {}
    if isinstance(raw_ctx, list):
        raw_ctx = {f"V{k + 1}": g for k, g in enumerate(raw_ctx)}
    contexts = {lab: _names(g, operators, f"contexts.{lab}") for lab, g in raw_ctx.items()}
    for lab, names in contexts.items():
        for a in names:
            if not ops.is_hermitian(operators[a]):
                raise ConfigError(f"operator {a} is not Hermitian", f"contexts.{lab}")
    selector = doc.get("selector", "identity")
    if selector == "identity" or selector is None:
        selector = {"identity": True}
    elif not isinstance(selector, dict) or len(selector) != 1:
        raise ConfigError("use one of operators / explicit / identity", "selector")
    if "operators" in selector:
        _names(selector["operators"], operators, "selector.operators")
    elif "explicit" in selector:
        if not isinstance(selector["explicit"], dict):
            raise ConfigError("expected a mapping of context labels", "selector.explicit")
    elif "identity" not in selector:
        raise ConfigError(f"unknown selector kind {next(iter(selector))!r}", "selector")
    states = {}
    for name, spec in (doc.get("states") or {}).items():
        where = f"states.{name}"
        try:
            if spec == "maximally_mixed":
                states[name] = ops.DensityMatrix.maximally_mixed(dim)
            elif isinstance(spec, dict) and "vector" in spec:
                states[name] = ops.DensityMatrix.from_vector(_vector(spec["vector"], dim, where))
            elif isinstance(spec, dict) and "density" in spec:
                states[name] = ops.DensityMatrix(_matrix(spec["density"], dim, where))
            else:
                raise ConfigError("give vector, density or maximally_mixed", where)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), where) from None
    propositions = {}
    for name, spec in (doc.get("propositions") or {}).items():
        where = f"propositions.{name}"
        if not isinstance(spec, dict) or spec.get("operator") not in operators:
            raise ConfigError("needs a known operator", where)
        if not ops.is_hermitian(operators[spec["operator"]]):
            raise ConfigError("operator is not Hermitian", where)
        try:
            if "values" in spec:
                delta = ops.BorelSelection.of(*spec["values"])
            elif "interval" in spec:
                delta = ops.BorelSelection.between(*spec["interval"])
            else:
                raise ConfigError("give values or interval", where)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), where) from None
        propositions[name] = (spec["operator"], delta)
    thresholds = tuple(float(x) for x in doc.get("thresholds", (1.0,)))
    levels = tuple(float(x) for x in doc.get("levels", DEFAULT_LEVELS))
    for x in thresholds + levels:
        if not 0.0 <= x <= 1.0:
            raise ConfigError(f"{x} outside [0, 1]", "thresholds/levels")
    return SystemConfig(
        hilbert_dim=dim,
        operators=operators,
        contexts=contexts,
        selector=selector,
        states=states,
        propositions=propositions,
        thresholds=thresholds,
        levels=levels,
        verify=dict(doc.get("verify") or {}),
        max_enum=doc.get("max_enum"),
        seed=int(doc.get("seed", 0)),
    )


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark else None
        raise ConfigError(f"parse error: {getattr(exc, 'problem', exc)}", where) from None
    return parse_config(doc)
