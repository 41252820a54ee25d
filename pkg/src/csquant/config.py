"""Run configuration: JSON files validated against a fixed schema."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
from scipy import constants as sc

from .convolution import (
    GaussianWell,
    Harmonic,
    HamiltonianSpec,
    Morse,
    PowerLaw,
    Polynomial1D,
    Step,
    Tabulated,
    compton_scales,
)
from .fock import PhaseSpaceScales
from .spectroscopy import BandSystem, ElectronicState, IsotopePair

__all__ = ["ConfigError", "RunConfig", "load_config", "bundled_config_path", "potential_from_dict"]


class ConfigError(ValueError):
    pass


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

_POTENTIAL = {
    "type": "object",
    "oneOf": [
        {"properties": {"type": {"const": "harmonic"}, "k": _POS}, "required": ["type", "k"],
         "additionalProperties": False},
        {"properties": {"type": {"const": "harmonic"}, "omega": _POS}, "required": ["type", "omega"],
         "additionalProperties": False},
        {"properties": {"type": {"const": "gaussian"}, "depth": _NUM, "width": _POS},
         "required": ["type", "depth", "width"], "additionalProperties": False},
        {"properties": {"type": {"const": "morse"}, "d_e": _NUM, "alpha": _POS},
         "required": ["type", "d_e", "alpha"], "additionalProperties": False},
        {"properties": {"type": {"const": "inverse_sqrt"}, "strength": _NUM},
         "required": ["type"], "additionalProperties": False},
        {"properties": {"type": {"const": "step"}, "height": _NUM, "edge": _NUM},
         "required": ["type", "height"], "additionalProperties": False},
        {"properties": {"type": {"const": "polynomial"}, "coeffs": {"type": "array", "items": _NUM,
                                                                    "minItems": 1}},
         "required": ["type", "coeffs"], "additionalProperties": False},
        {"properties": {"type": {"const": "tabulated"},
                        "grid": {"type": "array", "items": _NUM, "minItems": 4},
                        "values": {"type": "array", "items": _NUM, "minItems": 4}},
         "required": ["type", "grid", "values"], "additionalProperties": False},
    ],
}

_STATE = {
    "type": "object",
    "properties": {"name": {"type": "string"}, "omega_e": _POS, "omega_e_x_e": _NUM,
                   "omega_e_y_e": _NUM, "t_min": _NUM},
    "required": ["omega_e"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "mode": {"enum": ["dimensionless", "physical"]},
        "scales": {
            "type": "object",
            "properties": {"hbar": _POS, "ell": _POS, "mass": _POS, "c": _POS},
            "additionalProperties": False,
        },
        "truncation": {
            "type": "object",
            "properties": {"N": {"type": "integer", "minimum": 2}, "guard": {"type": "integer", "minimum": 0}},
            "additionalProperties": False,
        },
        "quadrature": {
            "type": "object",
            "properties": {"radial": {"type": "integer", "minimum": 1},
                           "angular": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
        "output": {"type": "object", "properties": {"path": {"type": "string"}},
                   "additionalProperties": False},
        "hamiltonian": {
            "type": "object",
            "properties": {
                "potential": {"oneOf": [_POTENTIAL, {"type": "null"}]},
                "vector_potential": {"oneOf": [_POTENTIAL, {"type": "null"}]},
                "charge": _NUM,
                "classical_proper_energy": _NUM,
                "include_rest_mass": {"type": "boolean"},
                "levels": {"type": "integer", "minimum": 1},
                "tol": _POS,
                "max_dim": {"type": "integer", "minimum": 16},
                "basis_length": {"oneOf": [_POS, {"const": "auto"}, {"const": "ell"}]},
            },
            "additionalProperties": False,
        },
        "spectroscopy": {
            "type": "object",
            "properties": {
                "molecule": {"type": "string"},
                "band": {"type": "string"},
                "provenance": {"type": "string"},
                "ground": _STATE,
                "excited": _STATE,
                "masses": {
                    "type": "object",
                    "properties": {
                        "reference": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
                        "isotopologue": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
                    },
                    "required": ["reference", "isotopologue"],
                    "additionalProperties": False,
                },
                "rho": _POS,
                "n_lower": {"type": "integer", "minimum": 0},
                "n_upper": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
                "observed": {"type": "array", "items": {"oneOf": [_NUM, {"type": "null"}]}},
            },
            "required": ["ground", "excited", "masses"],
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


def potential_from_dict(d: dict | None, mass: float = 1.0):
    if d is None:
        return None
    kind = d["type"]
    if kind == "harmonic":
        return Harmonic(d["k"]) if "k" in d else Harmonic.from_mass_frequency(mass, d["omega"])
    if kind == "gaussian":
        return GaussianWell(d["depth"], d["width"])
    if kind == "morse":
        return Morse(d["d_e"], d["alpha"])
    if kind == "inverse_sqrt":
        return PowerLaw(d.get("strength", 1.0), 0.5)
    if kind == "step":
        return Step(d["height"], d.get("edge", 0.0))
    if kind == "polynomial":
        return Polynomial1D(tuple(d["coeffs"]))
    if kind == "tabulated":
        return Tabulated(tuple(d["grid"]), tuple(d["values"]))
    raise ConfigError(f"unknown potential type {kind!r}")


@dataclass(frozen=True)
class RunConfig:
    raw: dict

    @property
    def mode(self) -> str:
        return self.raw.get("mode", "dimensionless")

    @property
    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    @property
    def dim(self) -> int:
        return int(self.raw.get("truncation", {}).get("N", 32))

    @property
    def guard(self) -> int | None:
        return self.raw.get("truncation", {}).get("guard")

    @property
    def quadrature(self) -> tuple[int, int] | None:
        q = self.raw.get("quadrature")
        if not q:
            return None
        return q.get("radial"), q.get("angular")

    @property
    def output_path(self) -> str | None:
        return self.raw.get("output", {}).get("path")

    def scales(self) -> PhaseSpaceScales:
        s = dict(self.raw.get("scales", {}))
        if self.mode == "physical":
            hbar = s.get("hbar", sc.hbar)
        else:
            hbar = s.get("hbar", 1.0)
        if "ell" in s:
            return PhaseSpaceScales(hbar=hbar, ell=s["ell"], mass=s.get("mass"), c=s.get("c"))
        if "mass" in s and "c" in s:
            return compton_scales(s["mass"], s["c"], hbar=hbar)
        return PhaseSpaceScales(hbar=hbar, ell=1.0, mass=s.get("mass"), c=s.get("c"))

    def hamiltonian(self) -> tuple[HamiltonianSpec, dict]:
        h = self.raw.get("hamiltonian")
        if h is None:
            raise ConfigError("config has no 'hamiltonian' section")
        scales = self.scales()
        if scales.mass is None:
            raise ConfigError("spectrum runs need scales.mass")
        spec = HamiltonianSpec(
            mass=scales.mass,
            scales=scales,
            potential=potential_from_dict(h.get("potential"), scales.mass),
            vector_potential=potential_from_dict(h.get("vector_potential"), scales.mass),
            charge=h.get("charge", 1.0),
            classical_proper_energy=h.get("classical_proper_energy", 0.0),
            include_rest_mass=h.get("include_rest_mass", True),
        )
        return spec, h

    def band_system(self) -> tuple[BandSystem, IsotopePair, dict]:
        s = self.raw.get("spectroscopy")
        if s is None:
            raise ConfigError("config has no 'spectroscopy' section")
        ground = ElectronicState(**s["ground"])
        excited = ElectronicState(**s["excited"])
        pair = IsotopePair.from_atoms(s["masses"]["reference"], s["masses"]["isotopologue"])
        if "rho" in s:
            pair = IsotopePair.from_rho(s["rho"], pair.mu)
        return BandSystem(ground, excited, "QM", mass_u=pair.mu), pair, s


def _validate(raw: Any) -> None:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from None
    if raw.get("mode") == "physical":
        s = raw.get("scales", {})
        if "mass" not in s or "c" not in s:
            raise ConfigError("physical mode requires scales.mass and scales.c")
    h = raw.get("hamiltonian", {})
    for key in ("potential", "vector_potential"):
        t = (h.get(key) or {})
        if t.get("type") == "tabulated" and len(t["grid"]) != len(t["values"]):
            raise ConfigError(f"hamiltonian/{key}: grid and values differ in length")


def load_config(source: str | Path | dict) -> RunConfig:
    if isinstance(source, dict):
        raw = source
    else:
        try:
            raw = json.loads(Path(source).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: not valid JSON ({exc})") from None
        except OSError as exc:
            raise ConfigError(f"cannot read {source}: {exc}") from None
    _validate(raw)
    return RunConfig(raw)


def bundled_config_path(name: str = "bo_alpha.json") -> Path:
    return Path(str(resources.files("csquant") / "data" / name))
