"""Named parameter sets for the command-line tools."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ValidationError
from .medium import (Profile, ParticleConfig, load_profile, match_electron_to_photon,
                     photon_for_r, step)


@dataclass(frozen=True)
class Scenario:
    """Photon waveguide, electron matching ratio, R sweep and SO exaggeration.

    The photon radius is either given directly (``radius_a``) or derived from
    a target normalized frequency ``r_value``. Sweeps vary the radius at fixed
    material parameters.
    """

    name: str
    n0: float
    delta: float
    lambda0: float
    lambda_db_over_lambda_c: float = 10.0
    r_value: Optional[float] = None
    radius_a: Optional[float] = None
    r_min: float = 0.025
    r_max: float = 10.0
    samples: int = 400
    exaggeration: float = 1.0
    profile: Profile = step()

    def __post_init__(self):
        for key in ("n0", "delta", "lambda0", "lambda_db_over_lambda_c"):
            val = getattr(self, key)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ValidationError(f"scenario field {key} must be a positive number")
        if (self.r_value is None) == (self.radius_a is None):
            raise ValidationError("scenario needs exactly one of R or radius_a")
        if not (self.r_min > 0 and self.r_max > self.r_min):
            raise ValidationError("sweep needs 0 < R_min < R_max")
        if int(self.samples) != self.samples or self.samples < 2:
            raise ValidationError("sweep needs at least 2 samples")
        if not (math.isfinite(self.exaggeration) and self.exaggeration >= 1.0):
            raise ValidationError("exaggeration must be >= 1")

    def photon(self, r_value: Optional[float] = None) -> ParticleConfig:
        """Photon configuration, optionally overriding R (radius rescaled)."""
        if r_value is not None:
            return photon_for_r(r_value, self.delta, self.n0, self.lambda0)
        if self.r_value is not None:
            return photon_for_r(self.r_value, self.delta, self.n0, self.lambda0)
        return ParticleConfig.photon(self.delta, self.radius_a, self.n0, self.lambda0)

    def electron(self, r_value: Optional[float] = None) -> ParticleConfig:
        return match_electron_to_photon(self.photon(r_value), self.lambda_db_over_lambda_c)

    def config(self, particle: str, r_value: Optional[float] = None) -> ParticleConfig:
        return self.electron(r_value) if particle == "electron" else self.photon(r_value)

    def sweep(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, int(self.samples))

    def with_overrides(self, **kw) -> "Scenario":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "r_value" in kw:
            kw["radius_a"] = None
        return replace(self, **kw)


BUILTIN = {
    # helium-neon light in a weakly guiding silica fibre, SO splitting exaggerated for plotting
    "hene-smf": Scenario(
        name="hene-smf", n0=1.46, delta=0.014, lambda0=632.8e-9,
        lambda_db_over_lambda_c=10.0, r_value=5.0,
        r_min=0.025, r_max=10.0, samples=400, exaggeration=50.0),
}


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a scenario from the JSON layout::

        {"name": ..., "photon": {"n0": ..., "delta": ..., "lambda0": ..., "R" | "radius_a": ...},
         "lambda_db_over_lambda_c": ..., "sweep": {"R_min": ..., "R_max": ..., "samples": ...},
         "exaggeration": ..., "profile": {...}}
    """
    try:
        ph = doc["photon"]
        sweep = doc.get("sweep", {})
        kw = dict(
            name=str(doc.get("name", "custom")),
            n0=float(ph["n0"]), delta=float(ph["delta"]), lambda0=float(ph["lambda0"]),
            r_value=None if ph.get("R") is None else float(ph["R"]),
            radius_a=None if ph.get("radius_a") is None else float(ph["radius_a"]),
            lambda_db_over_lambda_c=float(doc.get("lambda_db_over_lambda_c", 10.0)),
            r_min=float(sweep.get("R_min", 0.025)), r_max=float(sweep.get("R_max", 10.0)),
            samples=sweep.get("samples", 400),
            exaggeration=float(doc.get("exaggeration", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed scenario: {exc}") from None
    if "profile" in doc:
        kw["profile"] = load_profile(doc["profile"])
    return Scenario(**kw)


def load_scenario(source) -> Scenario:
    """Built-in scenario name, path to a JSON file, or an already-parsed dict."""
    if isinstance(source, Scenario):
        return source
    if isinstance(source, dict):
        return scenario_from_dict(source)
    if source in BUILTIN:
        return BUILTIN[source]
    path = Path(source)
    if not path.is_file():
        raise ValidationError(f"unknown scenario {source!r}: not a built-in name or a file "
                              f"(built-ins: {', '.join(sorted(BUILTIN))})")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario file {path} is not valid JSON: {exc}") from None
    return scenario_from_dict(doc)
