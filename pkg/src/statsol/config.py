"""Experiment configuration: JSON schema, dataclasses and builders."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import cylinder
from .measure import (DiracEnsemble, Sampler, choice_sampler, constant_sampler, discretize,
                      ensemble_new, gaussian_sampler)
from .models import ModelSpec, build_model
from .trajectory import TimeGrid


class ConfigError(ValueError):
    pass


_num = {"type": "number"}
_int = {"type": "integer"}
_forcing = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "mode": {"oneOf": [_int, {"type": "array", "items": _int}]},
        "amplitude": _num,
        "omega": _num,
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "initial_measure", "grid", "checks"],
    "properties": {
        "name": {"type": "string"},
        "model": {
            "type": "object",
            "required": ["name"],
            "oneOf": [
                {"additionalProperties": False,
                 "properties": {"name": {"const": "linear"}, "dim": _int, "rate": _num, "cubic": _num}},
                {"additionalProperties": False,
                 "properties": {"name": {"const": "reacdiff"}, "n_modes": _int, "diffusivity": _num,
                                "p": _num, "reaction_coef": _num, "length": _num, "forcing": _forcing}},
                {"additionalProperties": False,
                 "properties": {"name": {"const": "wave"}, "n_modes": _int, "r": _num,
                                "length": _num, "forcing": _forcing}},
                {"additionalProperties": False,
                 "properties": {"name": {"const": "nse"}, "kmax": _num, "ndim": {"enum": [2, 3]},
                                "viscosity": _num, "lengths": {"type": "array", "items": _num},
                                "forcing": _forcing}},
            ],
        },
        "initial_measure": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "atoms": {"type": "array", "minItems": 1,
                          "items": {"oneOf": [_num, {"type": "array", "items": _num}]}},
                "weights": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "sampler": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["family"],
                    "properties": {
                        "family": {"enum": ["gaussian", "choice", "constant"]},
                        "mean": {"oneOf": [_num, {"type": "array", "items": _num}]},
                        "std": _num,
                        "decay": _num,
                        "states": {"type": "array"},
                        "probs": {"type": "array", "items": _num},
                        "state": {"oneOf": [_num, {"type": "array", "items": _num}]},
                    },
                },
                "n": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
            "oneOf": [{"required": ["atoms"]}, {"required": ["sampler", "n", "seed"]}],
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["dt", "steps"],
            "properties": {
                "t0": _num,
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "steps": {"type": "integer", "minimum": 1},
            },
        },
        "scheme": {"enum": ["rk4", "imex"]},
        "dictionary": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["family"],
                "additionalProperties": False,
                "properties": {
                    "family": {"enum": ["monomial", "product", "radial", "tanh", "constant"]},
                    "coord": _int,
                    "coords": {"type": "array", "items": _int},
                    "power": _int,
                    "powers": {"type": "array", "items": _int, "minItems": 2, "maxItems": 2},
                    "radius": {"type": "number", "exclusiveMinimum": 0},
                    "value": _num,
                },
            },
        },
        "checks": {
            "type": "array",
            "items": {"type": "object", "required": ["name"], "properties": {"name": {"type": "string"}}},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"report": {"type": "string"}, "curves": {"type": ["string", "null"]}},
        },
    },
}


@dataclass
class CheckConfig:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    name: str
    model: dict
    initial_measure: dict
    grid: TimeGrid
    scheme: str = "rk4"
    dictionary: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    report: str = "report.ndjson"
    curves: str | None = None

    @property
    def seed(self) -> int:
        return int(self.initial_measure.get("seed", 0))

    def build_model(self) -> ModelSpec:
        try:
            return build_model(self.model)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model: {exc}") from exc

    def build_sampler(self, model: ModelSpec) -> Sampler:
        block = self.initial_measure.get("sampler")
        if block is None:
            raise ConfigError("initial_measure: no sampler declared")
        fam = block["family"]
        if fam == "gaussian":
            mean = np.broadcast_to(np.asarray(block.get("mean", 0.0), float), (model.dim,))
            std = block.get("std", 1.0) * model.mode_scale() ** (-block.get("decay", 0.0))
            return gaussian_sampler(mean, std)
        if fam == "choice":
            return choice_sampler(block["states"], block.get("probs"))
        return constant_sampler(block["state"])

    def build_measure(self, model: ModelSpec) -> DiracEnsemble:
        im = self.initial_measure
        if "atoms" in im:
            atoms = np.asarray(im["atoms"], dtype=float)
            if atoms.ndim == 1:
                atoms = atoms[:, None]
            mu = ensemble_new(atoms, im.get("weights"))
        else:
            mu = discretize(self.build_sampler(model), im["n"], im["seed"])
        if mu.dim != model.dim:
            raise ConfigError(f"initial_measure: atom dimension {mu.dim} != model dimension {model.dim}")
        return mu

    def build_dictionary(self, model: ModelSpec) -> list[cylinder.CylindricalTestFunction]:
        out = []
        eye = np.eye(model.dim)
        for i, d in enumerate(self.dictionary):
            try:
                fam = d["family"]
                r = d.get("radius", 10.0)
                if fam == "monomial":
                    out.append(cylinder.cutoff_monomial(eye[d.get("coord", 0)], d.get("power", 1), r))
                elif fam == "product":
                    a, b = d.get("coords", [0, 1])
                    out.append(cylinder.cutoff_product(eye[a], eye[b], tuple(d.get("powers", [1, 1])), r))
                elif fam == "radial":
                    out.append(cylinder.radial_bump(eye[d.get("coords", [0])], r))
                elif fam == "tanh":
                    out.append(cylinder.tanh_coordinate(eye[d.get("coord", 0)]))
                else:
                    out.append(cylinder.constant(eye[0], d.get("value", 1.0)))
            except IndexError:
                raise ConfigError(f"dictionary[{i}]: coordinate out of range for dim {model.dim}") from None
        return out


def _location(path) -> str:
    return "/".join(str(p) for p in path) or "<root>"


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{source}: {_location(e.absolute_path)}: {e.message}" for e in errors]
        raise ConfigError("\n".join(lines))
    from .checks import validate_check  # registry lives with the check code

    checks = []
    for i, c in enumerate(doc["checks"]):
        params = {k: v for k, v in c.items() if k != "name"}
        try:
            validate_check(c["name"], params, doc["model"]["name"])
        except ConfigError as exc:
            raise ConfigError(f"{source}: checks/{i}: {exc}") from None
        checks.append(CheckConfig(c["name"], params))
    g = doc["grid"]
    out = doc.get("output", {})
    return ExperimentConfig(
        name=doc.get("name", Path(source).stem),
        model=doc["model"],
        initial_measure=doc["initial_measure"],
        grid=TimeGrid(float(g.get("t0", 0.0)), float(g["dt"]), int(g["steps"])),
        scheme=doc.get("scheme", "rk4"),
        dictionary=doc.get("dictionary", []),
        checks=checks,
        report=out.get("report", f"{Path(source).stem}.report.ndjson"),
        curves=out.get("curves"),
    )


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    return parse_config(text, str(p))
