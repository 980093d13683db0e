"""Confining media: radial profiles, particle configurations and the waveguide parameter.

A waveguide is described by a dimensionless profile ``chi(rho)`` that rises
monotonically from 0 on the axis to 1 at the boundary (``rho = r / a``) and a
step strength ``delta``. For electrons the normalized potential energy is
``W(rho) = delta * chi``; for photons the normalized permittivity is
``W(rho) = 1 - delta * chi``. Both lead to a local squared wavenumber ``k^2(rho)``
and a normalized frequency ``R`` with ``R^2 = a^2 (k^2(0) - k^2(a))``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from scipy import constants
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, ValidationError

__all__ = [
    "LAMBDA_C",
    "MAX_DELTA",
    "Particle",
    "Profile",
    "StepProfile",
    "SmoothProfile",
    "ParticleConfig",
    "NormalizedFrequency",
    "step",
    "ramp",
    "power_law",
    "smoothstep",
    "from_samples",
    "load_profile",
    "profile_from_dict",
    "normalized_w",
    "k_squared",
    "waveguide_parameter",
    "match_electron_to_photon",
    "photon_for_r",
    "angular_frequency",
]

#: Reduced Compton wavelength of the electron (m), CODATA via scipy.
LAMBDA_C = constants.physical_constants["reduced Compton wavelength"][0]

#: Weak-guidance ceiling on the step strength.
MAX_DELTA = 0.1


class Particle(str, enum.Enum):
    ELECTRON = "electron"
    PHOTON = "photon"


# --------------------------------------------------------------------------
# Profiles
# --------------------------------------------------------------------------


class Profile:
    """Base class for radial profiles ``chi(rho)``."""

    kind = "abstract"

    #: chi equals 1 for every rho >= outer_edge.
    outer_edge = 1.0
    #: points where chi' has a kink; quadrature is split there.
    breakpoints = ()
    has_second_derivative = False

    def chi(self, rho):
        raise NotImplementedError

    def chi_prime(self, rho):
        raise NotImplementedError

    @property
    def is_step(self):
        return False


class StepProfile(Profile):
    """Symbolic step ``chi = theta(rho - 1)``, ``chi' = delta(rho - 1)``.

    ``chi_prime`` is a distribution and is never sampled; consumers collapse
    it analytically at ``rho = 1``.
    """

    kind = "step"

    def chi(self, rho):
        rho = np.asarray(rho, dtype=float)
        val = np.where(rho >= 1.0, 1.0, 0.0)
        return float(val) if val.ndim == 0 else val

    def chi_prime(self, rho):
        raise DomainError("chi' of the step profile is a Dirac delta; it cannot be sampled")

    @property
    def is_step(self):
        return True

    def to_dict(self):
        return {"kind": "step"}

    def __repr__(self):
        return "StepProfile()"

    def __eq__(self, other):
        return isinstance(other, StepProfile)

    def __hash__(self):
        return hash("step")


@dataclass(frozen=True, eq=False)
class SmoothProfile(Profile):
    """A profile given by callables ``chi`` and ``chi_prime``.

    Parameters
    ----------
    chi, chi_prime : callable
        Vectorized functions of ``rho``.
    chi_double_prime : callable, optional
        Second derivative. When supplied, kernels containing ``chi''`` are
        integrated directly instead of through integration by parts.
    breakpoints : tuple of float
        Abscissae where ``chi'`` or ``chi''`` is not smooth; used to split
        quadrature intervals.
    outer_edge : float
        ``chi`` is 1 and ``chi'`` is 0 beyond this radius. 1 for ordinary
        profiles; ``1 + w/2`` for a centred ramp.
    validate : bool
        Check the monotone-profile invariants at construction.
    """

    chi_fn: Callable
    chi_prime_fn: Callable
    chi_double_prime_fn: Optional[Callable] = None
    breakpoints: tuple = ()
    outer_edge: float = 1.0
    name: str = "smooth"
    validate: bool = field(default=True, repr=False)
    spec: Optional[dict] = field(default=None, repr=False)

    kind = "smooth"

    def __post_init__(self):
        if self.outer_edge < 1.0:
            raise ValidationError("outer_edge must be >= 1")
        if self.validate:
            _check_profile(self)

    def chi(self, rho):
        rho = np.asarray(rho, dtype=float)
        val = np.where(rho >= self.outer_edge, 1.0, self.chi_fn(np.minimum(rho, self.outer_edge)))
        return float(val) if val.ndim == 0 else val

    def chi_prime(self, rho):
        rho = np.asarray(rho, dtype=float)
        val = np.where(rho >= self.outer_edge, 0.0, self.chi_prime_fn(np.minimum(rho, self.outer_edge)))
        return float(val) if val.ndim == 0 else val

    def chi_double_prime(self, rho):
        if self.chi_double_prime_fn is None:
            raise DomainError(f"profile {self.name!r} has no second derivative")
        rho = np.asarray(rho, dtype=float)
        val = np.where(rho >= self.outer_edge, 0.0, self.chi_double_prime_fn(np.minimum(rho, self.outer_edge)))
        return float(val) if val.ndim == 0 else val

    @property
    def has_second_derivative(self):
        return self.chi_double_prime_fn is not None

    def to_dict(self):
        if self.spec is None:
            raise ValidationError(f"profile {self.name!r} is not serializable")
        return dict(self.spec)


def _check_profile(profile, n=2001, fd_tol=1e-4):
    edge = profile.outer_edge
    if abs(profile.chi(0.0)) > 1e-12:
        raise ValidationError(f"chi(0) must be 0, got {profile.chi(0.0)!r}")
    grid = np.linspace(0.0, edge, n)
    vals = profile.chi(grid)
    if np.any(vals < -1e-12) or np.any(vals > 1 + 1e-12):
        raise ValidationError("chi must stay within [0, 1]")
    if np.any(np.diff(vals) < -1e-12):
        raise ValidationError("chi must be non-decreasing")
    outside = profile.chi(np.linspace(edge, edge + 3.0, 31))
    if np.any(np.abs(outside - 1.0) > 1e-12):
        raise ValidationError("chi must equal 1 beyond the outer edge")
    # chi' against central differences, away from the axis and declared kinks
    h = 1e-6
    probe = np.linspace(h, edge - h, 401)
    kinks = np.asarray((0.0,) + tuple(profile.breakpoints) + (edge,), dtype=float)
    probe = probe[np.min(np.abs(probe[:, None] - kinks[None, :]), axis=1) > 1e-3]
    fd = (profile.chi(probe + h) - profile.chi(probe - h)) / (2 * h)
    err = np.abs(fd - profile.chi_prime(probe))
    if np.any(err > fd_tol * np.maximum(1.0, np.abs(fd))):
        raise ValidationError("chi_prime is inconsistent with finite differences of chi")


def step():
    """The step profile."""
    return StepProfile()


def ramp(width):
    """Linear ramp of total width ``width`` centred on ``rho = 1``.

    A regularization of the step used for convergence studies:
    ``chi`` rises linearly on ``[1 - w/2, 1 + w/2]``.
    """
    w = float(width)
    if not (0.0 < w < 2.0):
        raise ValidationError(f"ramp width must lie in (0, 2), got {width!r}")
    lo, hi = 1.0 - w / 2, 1.0 + w / 2

    def chi(rho):
        return np.clip((np.asarray(rho, dtype=float) - lo) / w, 0.0, 1.0)

    def chi_prime(rho):
        rho = np.asarray(rho, dtype=float)
        return np.where((rho > lo) & (rho < hi), 1.0 / w, 0.0)

    return SmoothProfile(chi, chi_prime, breakpoints=(lo, hi), outer_edge=hi,
                         name=f"ramp(w={w:g})", spec={"kind": "ramp", "width": w})


def power_law(p):
    """Graded profile ``chi = rho**p`` inside the core, ``p >= 1``."""
    p = float(p)
    if p < 1.0:
        raise ValidationError("power-law exponent must be >= 1")

    def chi(rho):
        return np.clip(np.asarray(rho, dtype=float), 0.0, 1.0) ** p

    def chi_prime(rho):
        rho = np.asarray(rho, dtype=float)
        return np.where(rho < 1.0, p * np.clip(rho, 0.0, 1.0) ** (p - 1.0), 0.0)

    return SmoothProfile(chi, chi_prime, breakpoints=(1.0,), name=f"power(p={p:g})",
                         spec={"kind": "power", "p": p})


def smoothstep():
    """C1 profile ``chi = 3 rho^2 - 2 rho^3``; chi' vanishes at both ends."""

    def chi(rho):
        r = np.clip(np.asarray(rho, dtype=float), 0.0, 1.0)
        return r * r * (3.0 - 2.0 * r)

    def chi_prime(rho):
        r = np.clip(np.asarray(rho, dtype=float), 0.0, 1.0)
        return 6.0 * r * (1.0 - r)

    def chi_double_prime(rho):
        rho = np.asarray(rho, dtype=float)
        return np.where(rho < 1.0, 6.0 - 12.0 * np.clip(rho, 0.0, 1.0), 0.0)

    return SmoothProfile(chi, chi_prime, chi_double_prime, breakpoints=(1.0,),
                         name="smoothstep", spec={"kind": "smoothstep"})


def from_samples(rho, chi, clamp_tol=1e-9):
    """Monotone cubic (PCHIP) interpolant through sampled ``(rho, chi)``.

    ``chi'`` is the interpolant's derivative. Samples must start at
    ``rho = 0`` with ``chi = 0`` and reach ``chi = 1`` at or before
    ``rho = 1``; values within ``clamp_tol`` of [0, 1] are clamped.
    """
    r = np.asarray(rho, dtype=float)
    c = np.asarray(chi, dtype=float)
    if r.ndim != 1 or r.shape != c.shape or r.size < 2:
        raise ValidationError("rho and chi must be 1-d arrays of equal length >= 2")
    if not np.all(np.isfinite(r)) or not np.all(np.isfinite(c)):
        raise ValidationError("profile samples must be finite")
    if np.any(np.diff(r) <= 0):
        raise ValidationError("rho grid must be strictly increasing")
    if r[0] != 0.0:
        raise ValidationError("rho grid must start at 0")
    if np.any(c < -clamp_tol) or np.any(c > 1 + clamp_tol):
        raise ValidationError("chi samples must lie in [0, 1]")
    c = np.clip(c, 0.0, 1.0)
    if abs(c[0]) > 0:
        raise ValidationError("chi(0) must be 0")
    if np.any(np.diff(c) < 0):
        raise ValidationError("chi samples must be non-decreasing")
    inside = r <= 1.0
    r_in, c_in = r[inside], c[inside]
    if np.any(c[~inside] != 1.0):
        raise ValidationError("chi must equal 1 for rho >= 1")
    if r_in[-1] != 1.0:
        if c_in[-1] != 1.0:
            raise ValidationError("chi must reach 1 at rho = 1")
        r_in = np.append(r_in, 1.0)
        c_in = np.append(c_in, 1.0)
    if c_in[-1] != 1.0:
        raise ValidationError("chi must reach 1 at rho = 1")
    interp = PchipInterpolator(r_in, c_in, extrapolate=False)
    deriv = interp.derivative()

    def chi_fn(x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return interp(x)

    def chi_prime_fn(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 1.0, deriv(np.clip(x, 0.0, 1.0)), 0.0)

    knots = tuple(float(v) for v in r_in[1:-1])
    return SmoothProfile(chi_fn, chi_prime_fn, breakpoints=knots + (1.0,), name="sampled",
                         spec={"kind": "smooth", "rho": r.tolist(), "chi": c.tolist()})


def profile_from_dict(doc):
    """Build a profile from its JSON document form."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValidationError("profile document must be an object with a 'kind' key")
    kind = doc["kind"]
    if kind == "step":
        return step()
    if kind == "smooth":
        if "rho" not in doc or "chi" not in doc:
            raise ValidationError("smooth profile requires 'rho' and 'chi' arrays")
        return from_samples(doc["rho"], doc["chi"])
    if kind == "ramp":
        return ramp(doc["width"])
    if kind == "power":
        return power_law(doc["p"])
    if kind == "smoothstep":
        return smoothstep()
    raise ValidationError(f"unknown profile kind {kind!r}")


def load_profile(source: Union[str, Path, dict]):
    """Load a profile from a JSON file path or an already-parsed document."""
    if isinstance(source, dict):
        return profile_from_dict(source)
    try:
        with open(source) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read profile {source}: {exc}") from exc
    return profile_from_dict(doc)


# --------------------------------------------------------------------------
# Particle configurations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizedFrequency:
    r_value: float

    def __post_init__(self):
        if not (math.isfinite(self.r_value) and self.r_value > 0):
            raise ValidationError(f"normalized frequency must be positive and finite, got {self.r_value!r}")

    def __float__(self):
        return float(self.r_value)


@dataclass(frozen=True)
class ParticleConfig:
    """Physical scales of one waveguide/particle pair.

    Lengths in metres. Use :meth:`electron` or :meth:`photon` to build one.
    """

    kind: Particle
    delta: float
    radius_a: float
    lambda_c: Optional[float] = None
    lambda_db: Optional[float] = None
    lambda_gamma: Optional[float] = None
    n0: Optional[float] = None
    lambda0_vacuum: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Particle(self.kind))
        if not (math.isfinite(self.delta) and 0.0 < self.delta <= MAX_DELTA):
            raise ValidationError(f"delta must lie in (0, {MAX_DELTA}] (weak guidance), got {self.delta!r}")
        if not (math.isfinite(self.radius_a) and self.radius_a > 0):
            raise ValidationError("radius_a must be positive")
        if self.kind is Particle.ELECTRON:
            if not (self.lambda_c and self.lambda_c > 0 and self.lambda_db and self.lambda_db > 0):
                raise ValidationError("electron config needs positive lambda_c and lambda_db")
            if self.lambda_db < self.lambda_c:
                raise ValidationError("lambda_db < lambda_c: outside the nonrelativistic regime")
        else:
            if not (self.n0 and self.n0 > 0 and self.lambda0_vacuum and self.lambda0_vacuum > 0):
                raise ValidationError("photon config needs positive n0 and lambda0_vacuum")
            expected = self.lambda0_vacuum / (2 * math.pi * self.n0)
            if self.lambda_gamma is None:
                object.__setattr__(self, "lambda_gamma", expected)
            elif not math.isclose(self.lambda_gamma, expected, rel_tol=1e-12):
                raise ValidationError("lambda_gamma must equal lambda0_vacuum / (2 pi n0)")

    @classmethod
    def electron(cls, delta, radius_a, lambda_db, lambda_c=LAMBDA_C):
        return cls(Particle.ELECTRON, delta, radius_a, lambda_c=lambda_c, lambda_db=lambda_db)

    @classmethod
    def photon(cls, delta, radius_a, n0, lambda0_vacuum):
        return cls(Particle.PHOTON, delta, radius_a, n0=n0, lambda0_vacuum=lambda0_vacuum)

    @property
    def is_electron(self):
        return self.kind is Particle.ELECTRON

    @property
    def wavelength(self):
        """Reduced wavelength on the axis: lambda_db (electron) or lambda_gamma (photon)."""
        return self.lambda_db if self.is_electron else self.lambda_gamma

    @property
    def energy_ratio(self):
        """hbar*omega / m c^2 for the electron, fixed by k^2(0) = 1 / lambda_db^2."""
        if not self.is_electron:
            raise DomainError("energy_ratio is defined for electrons only")
        return self.lambda_c ** 2 / (2.0 * self.lambda_db ** 2)

    @property
    def k0(self):
        """Axial wavenumber ``k(0)`` (1/m)."""
        return 1.0 / self.wavelength

    @property
    def k_clad(self):
        """``k(a)`` (1/m); NaN if ``k^2(a) < 0``."""
        ksq = k_squared(self, StepProfile(), 1.0)
        return math.sqrt(ksq) if ksq >= 0 else float("nan")

    def to_dict(self):
        out = {"kind": self.kind.value, "delta": self.delta, "radius_a": self.radius_a}
        if self.is_electron:
            out.update(lambda_c=self.lambda_c, lambda_db=self.lambda_db)
        else:
            out.update(n0=self.n0, lambda0_vacuum=self.lambda0_vacuum, lambda_gamma=self.lambda_gamma)
        return out


def _check_rho(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or not np.all(np.isfinite(rho)):
        raise DomainError("rho must be finite and >= 0")
    return rho


def normalized_w(config: ParticleConfig, profile: Profile, rho):
    """Normalized potential (electron, ``delta*chi``) or permittivity (photon, ``1 - delta*chi``)."""
    rho = _check_rho(rho)
    chi = profile.chi(rho)
    if config.is_electron:
        return config.delta * chi
    return 1.0 - config.delta * chi


def k_squared(config: ParticleConfig, profile: Profile, rho):
    """Local squared wavenumber ``k^2(rho)`` in 1/m^2."""
    rho = _check_rho(rho)
    chi = profile.chi(rho)
    if config.is_electron:
        return (2.0 / config.lambda_c ** 2) * (config.energy_ratio - config.delta * chi)
    return (1.0 - config.delta * chi) / config.lambda_gamma ** 2


def waveguide_parameter(config: ParticleConfig) -> NormalizedFrequency:
    """Normalized frequency ``R`` of a configuration."""
    if config.is_electron:
        r = config.radius_a / config.lambda_c * math.sqrt(2.0 * config.delta)
    else:
        r = config.radius_a / config.lambda_gamma * math.sqrt(config.delta)
    return NormalizedFrequency(r)


def photon_for_r(r_value, delta, n0, lambda0_vacuum):
    """Photon configuration whose radius is chosen to give normalized frequency ``r_value``."""
    r = float(NormalizedFrequency(float(r_value)))
    lam = lambda0_vacuum / (2 * math.pi * n0)
    return ParticleConfig.photon(delta, r * lam / math.sqrt(delta), n0, lambda0_vacuum)


def match_electron_to_photon(photon: ParticleConfig, lambda_db_over_lambda_c: float,
                             lambda_c: float = LAMBDA_C) -> ParticleConfig:
    """Electron configuration sharing the photon's ``a/lambda`` and ``R``.

    The electron radius satisfies ``a_e / lambda_db = a_g / lambda_g`` and the
    step strength ``delta_e = (lambda_c / lambda_db)^2 * delta_g / 2``, which
    together force ``R_e = R_g``.
    """
    if photon.is_electron:
        raise DomainError("match_electron_to_photon expects a photon configuration")
    ratio = float(lambda_db_over_lambda_c)
    if not (math.isfinite(ratio) and ratio >= 1.0):
        raise ValidationError("lambda_db / lambda_c must be >= 1 (nonrelativistic electron)")
    lambda_db = ratio * lambda_c
    a_e = photon.radius_a / photon.lambda_gamma * lambda_db
    delta_e = 0.5 * photon.delta / ratio ** 2
    return ParticleConfig.electron(delta_e, a_e, lambda_db, lambda_c)


def angular_frequency(config: ParticleConfig) -> float:
    """Angular frequency omega (rad/s) of the monoenergetic particle.

    Photon: ``2 pi c / lambda0``. Electron: ``hbar omega = m c^2 * energy_ratio``,
    i.e. ``omega = c * energy_ratio / lambda_c``.
    """
    if config.is_electron:
        return constants.c * config.energy_ratio / config.lambda_c
    return 2 * math.pi * constants.c / config.lambda0_vacuum
