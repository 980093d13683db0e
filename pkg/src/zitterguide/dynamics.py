"""Propagation of two-state superpositions under the first-order phases.

A superposition ``c_N |north> + c_S |south>`` is parametrized by Bloch angles
with ``c_N = cos(theta/2) exp(-i phi/2)`` and ``c_S = sin(theta/2) exp(i phi/2)``.
The north state is the supplied mode ``|n m_ell sigma>``; the south state is
``|n m_ell -sigma>`` for a spin pair and ``|n -m_ell sigma>`` for an orbital
pair. Each component picks up ``exp(i dbeta z)`` with
``dbeta = dbeta_common - sign(sigma m_ell) |dbeta_SO|``, so the Bloch azimuth
advances as ``phi(z) = phi0 + 2 sigma mu |dbeta_SO| z`` while the physical
polarization (or orbital pattern) turns at half that rate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, ScopeError, ValidationError
from .medium import Particle, angular_frequency
from .modesolver import ModeIndex, ModeSolution
from .perturb import ShiftBreakdown

__all__ = [
    "PairKind",
    "SuperpositionSpec",
    "BlochState",
    "mode_phase",
    "evolve_z",
    "evolve_t",
    "delta_omega",
    "polarization_vector",
    "spin_expectation",
    "pattern_angle",
    "beat_length",
    "trajectory",
]


class PairKind(str, enum.Enum):
    SAM = "sam"  # sigma vs -sigma at fixed m_ell
    OAM = "oam"  # m_ell vs -m_ell at fixed sigma


@dataclass(frozen=True)
class SuperpositionSpec:
    """Two-state superposition built on ``base`` (the north-pole state)."""

    base: ModeSolution
    pair_kind: PairKind = PairKind.SAM
    theta: float = math.pi / 2
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "pair_kind", PairKind(self.pair_kind))
        if not (0.0 <= self.theta <= math.pi):
            raise ValidationError(f"theta must lie in [0, pi], got {self.theta}")
        if not math.isfinite(self.phi):
            raise ValidationError("phi must be finite")
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * math.pi))
        if self.base.index.m_ell == 0:
            raise ValidationError("m_ell = 0 has no spin-orbit splitting; precession needs |m_ell| >= 1")
        if self.base.particle is Particle.PHOTON and self.base.m_abs == 1:
            raise ScopeError("photon |m_ell| = 1 states are outside the perturbative scope")

    @property
    def mu(self):
        return self.base.index.mu

    @property
    def sigma(self):
        return self.base.index.sigma

    @property
    def north(self) -> ModeIndex:
        return self.base.index

    @property
    def south(self) -> ModeIndex:
        i = self.base.index
        if self.pair_kind is PairKind.SAM:
            return ModeIndex(i.n, i.m_ell, -i.sigma)
        return ModeIndex(i.n, -i.m_ell, i.sigma)

    def amplitudes(self):
        return (math.cos(self.theta / 2) * np.exp(-0.5j * self.phi),
                math.sin(self.theta / 2) * np.exp(0.5j * self.phi))


@dataclass(frozen=True)
class BlochState:
    """Evolved superposition.

    ``amplitudes`` are ``(c_N, c_S)`` with the common phase divided out;
    ``accumulated_common_phase`` carries it separately.
    """

    spec: SuperpositionSpec
    amplitudes: tuple
    accumulated_common_phase: float
    bloch_vector: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cn, cs = self.amplitudes
        cross = np.conj(cn) * cs
        vec = np.array([2.0 * cross.real, 2.0 * cross.imag, abs(cn) ** 2 - abs(cs) ** 2])
        vec.setflags(write=False)
        object.__setattr__(self, "bloch_vector", vec)

    @property
    def theta(self):
        # atan2 of the moduli keeps full precision near the poles, unlike acos(z)
        cn, cs = self.amplitudes
        return 2.0 * math.atan2(abs(cs), abs(cn))

    @property
    def phi(self):
        return math.atan2(self.bloch_vector[1], self.bloch_vector[0]) % (2.0 * math.pi)

    @property
    def norm(self):
        cn, cs = self.amplitudes
        return math.sqrt(abs(cn) ** 2 + abs(cs) ** 2)

    def as_spec(self) -> SuperpositionSpec:
        """Initial condition for continuing the evolution from this state."""
        return replace(self.spec, theta=self.theta, phi=self.phi)


def _check_shifts(index: ModeIndex, shifts: ShiftBreakdown):
    if shifts.index.n != index.n or shifts.index.m_abs != index.m_abs:
        raise ValidationError(f"shifts belong to {shifts.index}, not to (n, |m_ell|) of {index}")


def _dbeta(index: ModeIndex, shifts: ShiftBreakdown):
    return shifts.delta_beta_common - index.sigma_m_sign * shifts.delta_beta_so


def mode_phase(mode, shifts: ShiftBreakdown, z):
    """Propagation phase factor ``exp(i dbeta z)`` of a single eigenstate.

    ``mode`` may be a :class:`ModeSolution` or a :class:`ModeIndex`. The
    Darwin (and, for electrons, relativistic) part is common to the whole
    degenerate subspace; the spin-orbit part has sign ``-sign(sigma m_ell)``.
    """
    index = mode.index if isinstance(mode, ModeSolution) else mode
    _check_shifts(index, shifts)
    return np.exp(1j * _dbeta(index, shifts) * np.asarray(z, dtype=float))


def _evolve(spec, shifts, phase_arg_common, phase_arg_split):
    _check_shifts(spec.north, shifts)
    cn, cs = spec.amplitudes()
    # relative phases only; exp(i dbeta_common z) is kept as a scalar
    cn = cn * np.exp(-1j * spec.north.sigma_m_sign * phase_arg_split)
    cs = cs * np.exp(-1j * spec.south.sigma_m_sign * phase_arg_split)
    return BlochState(spec, (complex(cn), complex(cs)), float(phase_arg_common))


def evolve_z(spec: SuperpositionSpec, shifts: ShiftBreakdown, z: float) -> BlochState:
    """State after propagating a distance ``z`` (metres)."""
    return _evolve(spec, shifts, shifts.delta_beta_common * z, shifts.delta_beta_so * z)


def delta_omega(mode: ModeSolution, shifts: ShiftBreakdown) -> float:
    """Frequency splitting ``|d omega| = (omega / beta0) |dbeta_SO|`` in rad/s."""
    if mode.config is None:
        raise ValidationError("mode has no particle configuration attached")
    return angular_frequency(mode.config) / mode.beta0 * shifts.delta_beta_so


def evolve_t(spec: SuperpositionSpec, shifts: ShiftBreakdown, z: float, t: float) -> BlochState:
    """State at position ``z`` and time ``t``.

    The split phase is ``|dbeta_SO| z + |d omega| t``, so at ``z = 0`` the time
    evolution matches :func:`evolve_z` under ``|dbeta_SO| z -> |d omega| t``.
    """
    scale = delta_omega(spec.base, shifts) / shifts.delta_beta_so if shifts.delta_beta_so else 0.0
    split = shifts.delta_beta_so * z + (scale * shifts.delta_beta_so) * t
    common = shifts.delta_beta_common * (z + scale * t)
    return _evolve(spec, shifts, common, split)


def polarization_vector(state: BlochState) -> np.ndarray:
    """Photon transverse polarization ``(e_x, e_y)`` of a balanced spin pair.

    Built from the Jones vector ``c_N e_sigma + c_S e_-sigma`` with circular
    unit vectors ``e_pm = (x + i y)/sqrt(2)``.
    """
    spec = state.spec
    if spec.base.particle is not Particle.PHOTON or spec.pair_kind is not PairKind.SAM:
        raise DomainError("polarization vectors are defined for photon spin pairs")
    if abs(spec.theta - math.pi / 2) > 1e-12:
        raise DomainError("the polarization is linear only for theta = pi/2")
    cn, cs = state.amplitudes
    s = spec.sigma
    jones = np.array([(cn + cs), 1j * s * (cn - cs)]) / math.sqrt(2.0)
    # balanced pair: jones is real up to rounding
    return jones.real


def spin_expectation(state: BlochState) -> np.ndarray:
    """Electron ``<S>`` in units of hbar for a spin pair."""
    spec = state.spec
    if spec.base.particle is not Particle.ELECTRON or spec.pair_kind is not PairKind.SAM:
        raise DomainError("spin expectations are defined for electron spin pairs")
    cn, cs = state.amplitudes
    up, down = (cn, cs) if spec.sigma == 1 else (cs, cn)
    cross = np.conj(up) * down
    return 0.5 * np.array([2.0 * cross.real, 2.0 * cross.imag, abs(up) ** 2 - abs(down) ** 2])


def pattern_angle(state: BlochState) -> float:
    """Azimuth of an intensity maximum of a balanced orbital pair, in (-pi/|m|, pi/|m|]."""
    spec = state.spec
    if spec.pair_kind is not PairKind.OAM:
        raise DomainError("pattern angles are defined for orbital pairs")
    cn, cs = state.amplitudes
    # |c_N e^{i mu |m| phi} + c_S e^{-i mu |m| phi}|^2 peaks where 2 mu |m| phi = arg(c_S / c_N)
    rel = np.angle(cs * np.conj(cn))
    return float(spec.mu * rel / (2 * spec.base.m_abs))


def beat_length(shifts: ShiftBreakdown) -> float:
    """Axial period ``pi / |dbeta_SO|`` of the orbital-pattern rotation (metres)."""
    if shifts.delta_beta_so == 0.0:
        raise DomainError("zero spin-orbit splitting: infinite beat length")
    return math.pi / shifts.delta_beta_so


def trajectory(spec: SuperpositionSpec, shifts: ShiftBreakdown, zs=None, ts=None, z=0.0):
    """Evolve over a grid of ``z`` (or of ``t`` at fixed ``z``).

    Returns a dict of equal-length arrays: the grid, ``bloch_x``, ``bloch_y``,
    ``bloch_z``, ``common_phase`` and, where defined, ``pol_x``, ``pol_y``,
    ``polarization_angle_deg`` (photon spin pair), ``spin_x``, ``spin_y``,
    ``spin_z`` (electron spin pair) or ``pattern_angle`` (orbital pair).
    """
    if (zs is None) == (ts is None):
        raise ValidationError("give exactly one of zs or ts")
    if zs is not None:
        key, grid = "z", np.asarray(zs, dtype=float)
        states = [evolve_z(spec, shifts, v) for v in grid]
    else:
        key, grid = "t", np.asarray(ts, dtype=float)
        states = [evolve_t(spec, shifts, z, v) for v in grid]
    bloch = np.array([s.bloch_vector for s in states]).reshape(-1, 3)
    out = {key: grid, "bloch_x": bloch[:, 0], "bloch_y": bloch[:, 1], "bloch_z": bloch[:, 2],
           "common_phase": np.array([s.accumulated_common_phase for s in states])}
    particle = spec.base.particle
    if spec.pair_kind is PairKind.SAM and particle is Particle.PHOTON and abs(spec.theta - math.pi / 2) <= 1e-12:
        pol = np.array([polarization_vector(s) for s in states]).reshape(-1, 2)
        out["pol_x"], out["pol_y"] = pol[:, 0], pol[:, 1]
        out["polarization_angle_deg"] = np.degrees(np.arctan2(pol[:, 1], pol[:, 0]))
    elif spec.pair_kind is PairKind.SAM and particle is Particle.ELECTRON:
        spin = np.array([spin_expectation(s) for s in states]).reshape(-1, 3)
        out["spin_x"], out["spin_y"], out["spin_z"] = spin[:, 0], spin[:, 1], spin[:, 2]
    elif spec.pair_kind is PairKind.OAM:
        out["pattern_angle"] = np.array([pattern_angle(s) for s in states])
    return out
