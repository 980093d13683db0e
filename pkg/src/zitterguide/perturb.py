"""First-order (and second-order) corrections to the propagation constant.

Matrix elements are taken between unperturbed step-profile eigenstates
``|n m_ell sigma>`` whose radial functions have unit norm over the full
transverse plane. With that convention the diagonal elements are

electron::

    d(beta0^2) = (2 pi / lambda_c^2) <(E - delta chi)^2>
                 - (pi delta / a^2) (1/2 <chi'' + chi'/rho> + sigma m <chi'/rho>)

photon::

    d(beta0^2) = -(pi delta / a^2) (<chi'' + chi'/rho + chi' d/drho> + sigma m <chi'/rho>)

where ``<O>`` is the radial integral ``int psi' O psi rho drho`` and
``E = hbar omega / m c^2``. Integrating ``chi''`` by parts turns both Darwin
brackets into ``-<chi' d/drho>``, so the Darwin and spin-orbit parts coincide
for the two particles. ``d(beta0) = d(beta0^2) / (2 beta0)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import DomainError, IllConditionedError, NotGuidedError, ScopeError, ValidationError
from .medium import Particle, ParticleConfig, Profile
from .modesolver import ModeIndex, ModeSolution, _j_signed, guided_modes, norm_brace
from .specfun import bessel_j, bessel_j_prime

__all__ = [
    "Kernel",
    "ShiftBreakdown",
    "ConditionsReport",
    "ModeBasis",
    "radial_bracket",
    "diagonal_shift",
    "delta_beta_step_closed_form",
    "effective_hamiltonian_expectation",
    "selection_allowed",
    "matrix_element",
    "basis_order",
    "assemble_matrix",
    "degenerate_blocks",
    "check_conditions",
    "second_order_shift",
]

# K_m(w rho) has decayed below 1e-17 of its boundary value once w * rho_max >= 40
_DECAY_ARGUMENT = 40.0
_QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-12, limit=400)


class Kernel(str, enum.Enum):
    """Radial operators available to :func:`radial_bracket`."""

    CHI_PRIME_D_RHO = "chi' d/drho"
    CHI_PRIME_OVER_RHO = "chi'/rho"
    CHI_PRIME = "chi'"
    #: photon Darwin operator chi'' + chi'/rho + chi' d/drho
    CHI_DOUBLE_PRIME_PLUS = "chi'' + chi'/rho + chi' d/drho"
    #: electron Darwin operator chi'' + chi'/rho
    CHI_DOUBLE_PRIME_OVER_RHO = "chi'' + chi'/rho"
    REL_SQUARED = "(E - delta chi)^2"


def _require_photon_scope(mode: ModeSolution):
    if mode.particle is Particle.PHOTON and mode.m_abs == 1:
        raise ScopeError(
            "photon states with |m_ell| = 1 are excluded: their degenerate block is not "
            "diagonal in the |n m_ell sigma> basis, so first-order shifts are not defined here")


def _config(mode: ModeSolution) -> ParticleConfig:
    if mode.config is None:
        raise ValidationError("mode has no particle configuration attached")
    return mode.config


# --------------------------------------------------------------------------
# Radial brackets
# --------------------------------------------------------------------------


def _step_bracket(bra, ket, kernel):
    # chi' = delta(rho - 1); psi' taken from the inside branch at the step
    pa, pb = bra.psi(1.0), ket.psi(1.0)
    if kernel is Kernel.CHI_PRIME_D_RHO:
        return pa * ket.psi_prime_inside()
    if kernel in (Kernel.CHI_PRIME_OVER_RHO, Kernel.CHI_PRIME):
        return pa * pb
    # chi'' = delta'(rho - 1): integrate by parts before collapsing
    if kernel is Kernel.CHI_DOUBLE_PRIME_PLUS:
        return -bra.psi_prime_inside() * pb
    if kernel is Kernel.CHI_DOUBLE_PRIME_OVER_RHO:
        return -(bra.psi_prime_inside() * pb + pa * ket.psi_prime_inside())
    raise AssertionError(kernel)


def _intervals(points):
    pts = sorted(set(float(p) for p in points))
    return list(zip(pts[:-1], pts[1:]))


def _quad(fn, points):
    total = 0.0
    for lo, hi in _intervals(points):
        val, _ = integrate.quad(fn, lo, hi, **_QUAD_OPTS)
        total += val
    return total


def _smooth_bracket(bra, ket, kernel, profile):
    pa, pb = bra.psi, ket.psi
    da, db = bra.psi_prime, ket.psi_prime
    cp = profile.chi_prime
    direct = profile.has_second_derivative
    if kernel is Kernel.CHI_PRIME_D_RHO:
        fn = lambda r: cp(r) * pa(r) * db(r) * r
    elif kernel is Kernel.CHI_PRIME_OVER_RHO:
        fn = lambda r: cp(r) * pa(r) * pb(r)
    elif kernel is Kernel.CHI_PRIME:
        fn = lambda r: cp(r) * pa(r) * pb(r) * r
    elif kernel is Kernel.CHI_DOUBLE_PRIME_PLUS:
        if direct:
            cpp = profile.chi_double_prime
            fn = lambda r: (cpp(r) * pa(r) * pb(r) * r + cp(r) * pa(r) * pb(r)
                            + cp(r) * pa(r) * db(r) * r)
        else:
            fn = lambda r: -cp(r) * da(r) * pb(r) * r
    elif kernel is Kernel.CHI_DOUBLE_PRIME_OVER_RHO:
        if direct:
            cpp = profile.chi_double_prime
            fn = lambda r: cpp(r) * pa(r) * pb(r) * r + cp(r) * pa(r) * pb(r)
        else:
            fn = lambda r: -cp(r) * (da(r) * pb(r) + pa(r) * db(r)) * r
    else:
        raise AssertionError(kernel)
    points = [0.0, 1.0, profile.outer_edge, *profile.breakpoints]
    return _quad(fn, [p for p in points if 0.0 <= p <= profile.outer_edge])


def _step_rel_diagonal(mode, eps, delta):
    # core share of the unit 2D norm: int_0^1 N^2 J_m(x rho)^2 rho drho
    m, x = mode.m_abs, mode.kappa0_a
    core = 0.5 * mode.norm_n ** 2 * (bessel_j(m, x) ** 2 - _j_signed(m - 1, x) * bessel_j(m + 1, x))
    total = 1.0 / (2.0 * math.pi)
    return eps ** 2 * core + (eps - delta) ** 2 * (total - core)


def _rel_bracket(bra, ket, profile, analytic=True):
    cfg = _config(ket)
    if not cfg.is_electron:
        raise DomainError("the relativistic kernel applies to electrons only")
    eps, delta = cfg.energy_ratio, cfg.delta
    if analytic and profile.is_step and bra.index.n == ket.index.n and bra.m_abs == ket.m_abs:
        return _step_rel_diagonal(ket, eps, delta)
    pa, pb = bra.psi, ket.psi
    edge = max(1.0, profile.outer_edge)
    w = min(bra.kappa_tilde0_a, ket.kappa_tilde0_a)
    rho_max = max(edge + 1.0, _DECAY_ARGUMENT / w)
    points = [0.0, 1.0, edge, rho_max]
    if not profile.is_step:
        points += [p for p in profile.breakpoints if 0.0 <= p <= edge]

    def fn(r):
        return (eps - delta * profile.chi(r)) ** 2 * pa(r) * pb(r) * r

    return _quad(fn, points)


def radial_bracket(bra_psi: ModeSolution, ket_psi: ModeSolution, kernel: Kernel, profile: Profile,
                   analytic: bool = True) -> float:
    """Radial integral ``int psi_bra (O psi_ket) rho drho`` for the operator ``kernel``.

    Step profiles collapse ``chi' = delta(rho - 1)`` exactly; smooth profiles
    use adaptive Gauss-Kronrod quadrature split at ``rho = 1`` and at the
    profile's breakpoints. Kernels containing ``chi''`` are integrated by parts
    unless the profile supplies ``chi''``. The diagonal relativistic bracket on
    the step uses the closed-form core fraction of the norm unless
    ``analytic=False``.
    """
    kernel = Kernel(kernel)
    if (bra_psi.config is not None and ket_psi.config is not None
            and bra_psi.config != ket_psi.config):
        raise ValidationError("bra and ket belong to different configurations")
    if kernel is Kernel.REL_SQUARED:
        return _rel_bracket(bra_psi, ket_psi, profile, analytic)
    if profile.is_step:
        return _step_bracket(bra_psi, ket_psi, kernel)
    return _smooth_bracket(bra_psi, ket_psi, kernel, profile)


# --------------------------------------------------------------------------
# Diagonal shifts
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftBreakdown:
    """First-order corrections for one state.

    ``relativistic``, ``darwin`` and ``spin_orbit`` are signed contributions to
    ``d(beta0^2)`` in 1/m^2. ``delta_beta_d`` and ``delta_beta_rel`` are the
    signed Darwin and relativistic parts of ``d(beta0)``; ``delta_beta_so`` is
    the magnitude of the spin-orbit part, whose sign is ``-sign(sigma m_ell)``.
    """

    index: ModeIndex
    particle: Particle
    beta0: float
    relativistic: float
    darwin: float
    spin_orbit: float

    @property
    def delta_beta_sq(self):
        return self.relativistic + self.darwin + self.spin_orbit

    @property
    def delta_beta(self):
        return self.delta_beta_sq / (2.0 * self.beta0)

    @property
    def delta_beta_d(self):
        return self.darwin / (2.0 * self.beta0)

    @property
    def delta_beta_rel(self):
        return self.relativistic / (2.0 * self.beta0)

    @property
    def delta_beta_so(self):
        return abs(self.spin_orbit) / (2.0 * self.beta0)

    @property
    def delta_beta_so_signed(self):
        return self.spin_orbit / (2.0 * self.beta0)

    @property
    def delta_beta_common(self):
        """Part of ``d(beta0)`` shared by all four degenerate states."""
        return (self.relativistic + self.darwin) / (2.0 * self.beta0)

    def to_dict(self):
        return {
            "particle": self.particle.value,
            "n": self.index.n,
            "m_ell": self.index.m_ell,
            "sigma": self.index.sigma,
            "beta0": self.beta0,
            "relativistic": self.relativistic,
            "darwin": self.darwin,
            "spin_orbit": self.spin_orbit,
            "delta_beta_sq": self.delta_beta_sq,
            "delta_beta": self.delta_beta,
            "delta_beta_rel": self.delta_beta_rel,
            "delta_beta_d": self.delta_beta_d,
            "delta_beta_so": self.delta_beta_so,
        }


def diagonal_shift(mode: ModeSolution, profile: Profile) -> ShiftBreakdown:
    """First-order shift of ``beta0^2`` for ``mode``, split by physical origin."""
    _require_photon_scope(mode)
    cfg = _config(mode)
    pref = math.pi * cfg.delta / cfg.radius_a ** 2
    sm = mode.index.sigma * mode.index.m_ell
    so = -pref * sm * radial_bracket(mode, mode, Kernel.CHI_PRIME_OVER_RHO, profile) if sm else 0.0
    if cfg.is_electron:
        rel = 2.0 * math.pi / cfg.lambda_c ** 2 * radial_bracket(mode, mode, Kernel.REL_SQUARED, profile)
        dar = -pref * 0.5 * radial_bracket(mode, mode, Kernel.CHI_DOUBLE_PRIME_OVER_RHO, profile)
    else:
        rel = 0.0
        dar = -pref * radial_bracket(mode, mode, Kernel.CHI_DOUBLE_PRIME_PLUS, profile)
    return ShiftBreakdown(mode.index, cfg.kind, mode.beta0, rel, dar, so)


def delta_beta_step_closed_form(mode: ModeSolution) -> float:
    """Closed-form Darwin + spin-orbit ``d(beta0)`` for the step profile.

    ``delta / (2 beta0 a^2) * (x J_m'(x) / J_m(x) - sigma m_ell) / brace``.
    Excludes the electron relativistic term.
    """
    cfg = _config(mode)
    x, m = mode.kappa0_a, mode.m_abs
    jm = bessel_j(m, x)
    if jm == 0.0:
        raise DomainError("J_m(kappa0 a) = 0: degenerate root")
    brace = norm_brace(x, mode.kappa_tilde0_a, m)
    sm = mode.index.sigma * mode.index.m_ell
    return (cfg.delta / (2.0 * mode.beta0 * cfg.radius_a ** 2)
            * (x * bessel_j_prime(m, x) / jm - sm) / brace)


def effective_hamiltonian_expectation(mode: ModeSolution, profile: Profile) -> float:
    """``<n m sigma| H_eff |n m sigma>`` with ``H_eff = delta/(4 beta0 a^2) chi' (d/drho - sigma_z l_z / rho)``."""
    cfg = _config(mode)
    sm = mode.index.sigma * mode.index.m_ell
    bracket = radial_bracket(mode, mode, Kernel.CHI_PRIME_D_RHO, profile)
    if sm:
        bracket -= sm * radial_bracket(mode, mode, Kernel.CHI_PRIME_OVER_RHO, profile)
    # the angular integral contributes 2 pi
    return 2.0 * math.pi * cfg.delta / (4.0 * mode.beta0 * cfg.radius_a ** 2) * bracket


# --------------------------------------------------------------------------
# Perturbation matrices
# --------------------------------------------------------------------------


class ModeBasis:
    """Cache of solved radial functions keyed by ``(n, |m_ell|)``."""

    def __init__(self, config: ParticleConfig, m_max: int, n_max: int):
        self.config = config
        self.m_max = int(m_max)
        self.n_max = int(n_max)
        self._modes = {(s.index.n, s.m_abs): s for s in guided_modes(config, m_max, n_max)}

    def __contains__(self, key):
        return key in self._modes

    def radial(self, n, m_abs) -> ModeSolution:
        try:
            return self._modes[(n, abs(m_abs))]
        except KeyError:
            raise NotGuidedError(f"no guided radial solution for n = {n}, |m_ell| = {abs(m_abs)}") from None

    def solution(self, index: ModeIndex) -> ModeSolution:
        return self.radial(index.n, index.m_abs).with_index(index.m_ell, index.sigma)

    def radial_count(self, m_abs):
        return sum(1 for (_, m) in self._modes if m == abs(m_abs))

    @property
    def particle(self):
        return self.config.kind


def _block_states(m_abs):
    if m_abs == 0:
        return [(0, 1), (0, -1)]
    return [(m_abs, -1), (-m_abs, 1), (m_abs, 1), (-m_abs, -1)]


def basis_order(basis: ModeBasis) -> list:
    """Row/column ordering: by ``n``, then ``|m_ell|``, then the within-block order
    ``(0+, 0-)`` or ``(+m-, -m+, +m+, -m-)``. Only guided radial functions appear."""
    out = []
    for n in range(1, basis.n_max + 1):
        for m in range(basis.m_max + 1):
            if (n, m) in basis:
                out.extend(ModeIndex(n, ml, s) for ml, s in _block_states(m))
    return out


def selection_allowed(bra: ModeIndex, ket: ModeIndex, particle) -> bool:
    """True when ``<bra|H'|ket>`` is not a structural zero."""
    particle = Particle(particle)
    dm = bra.m_ell - ket.m_ell
    if dm == 0 and bra.sigma == ket.sigma:
        return True
    if particle is Particle.ELECTRON:
        # sigma_+ l_- lowers m_ell and raises sigma, sigma_- l_+ the reverse
        return (dm == -1 and ket.sigma == -1 and bra.sigma == 1) or (
            dm == 1 and ket.sigma == 1 and bra.sigma == -1)
    return (dm == -2 and ket.sigma == -1 and bra.sigma == 1) or (
        dm == 2 and ket.sigma == 1 and bra.sigma == -1)


def matrix_element(bra: ModeIndex, ket: ModeIndex, profile: Profile, basis: ModeBasis) -> complex:
    """``<bra|H'|ket>`` in 1/m^2. Structural zeros are returned as exact ``0j``."""
    particle = basis.particle
    if not selection_allowed(bra, ket, particle):
        return 0j
    cfg = basis.config
    pref = math.pi * cfg.delta / cfg.radius_a ** 2
    a = basis.radial(bra.n, bra.m_abs)
    b = basis.radial(ket.n, ket.m_abs)
    diagonal = bra.m_ell == ket.m_ell and bra.sigma == ket.sigma
    if particle is Particle.ELECTRON:
        if diagonal:
            rel = 2.0 * math.pi / cfg.lambda_c ** 2 * radial_bracket(a, b, Kernel.REL_SQUARED, profile)
            dar = 0.5 * radial_bracket(a, b, Kernel.CHI_DOUBLE_PRIME_OVER_RHO, profile)
            sm = ket.sigma * ket.m_ell
            so = sm * radial_bracket(a, b, Kernel.CHI_PRIME_OVER_RHO, profile) if sm else 0.0
            return complex(rel - pref * (dar + so))
        coupling = pref * b.beta0 * radial_bracket(a, b, Kernel.CHI_PRIME, profile)
        # <m-1, +| ... |m, -> carries -i, <m+1, -| ... |m, +> carries +i
        return complex(0.0, -coupling if ket.sigma == -1 else coupling)
    dar = radial_bracket(a, b, Kernel.CHI_DOUBLE_PRIME_PLUS, profile)
    sm = bra.sigma * bra.m_ell
    so = sm * radial_bracket(a, b, Kernel.CHI_PRIME_OVER_RHO, profile) if sm else 0.0
    return complex(-pref * (dar + so))


def assemble_matrix(basis: ModeBasis, profile: Profile):
    """Full perturbation matrix over the basis.

    Returns ``(labels, matrix)`` with ``matrix[i, j] = <labels[i]|H'|labels[j]>``.
    """
    labels = basis_order(basis)
    size = len(labels)
    mat = np.zeros((size, size), dtype=complex)
    for i, bra in enumerate(labels):
        for j, ket in enumerate(labels):
            mat[i, j] = matrix_element(bra, ket, profile, basis)
    return labels, mat


def degenerate_blocks(labels) -> dict:
    """Positions of each degenerate subspace, keyed by ``(n, |m_ell|)``."""
    blocks = {}
    for i, idx in enumerate(labels):
        blocks.setdefault((idx.n, idx.m_abs), []).append(i)
    return blocks


# --------------------------------------------------------------------------
# Validity and second order
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionsReport:
    """Dimensionless checks of first-order validity.

    ``c_a = |H_nn| / beta0_n^2``; ``c_b = max |H_n'n| / |beta0_n^2 - beta0_n'^2|``;
    ``c_c = max |H_n'n H_nn'| / (|beta0_n^2 - beta0_n'^2| |H_nn|)``, the size of
    each second-order term relative to the first-order shift. ``c_b`` and
    ``c_c`` are ``None`` when no other radial mode of the same ``|m_ell|`` is
    guided.
    """

    index: ModeIndex
    c_a: float
    c_b: Optional[float]
    c_c: Optional[float]
    threshold: float = 0.1

    @property
    def valid(self):
        return all(c is None or c < self.threshold for c in (self.c_a, self.c_b, self.c_c))

    def to_dict(self):
        return {"c_a": self.c_a, "c_b": self.c_b, "c_c": self.c_c,
                "threshold": self.threshold, "valid": self.valid}


def _basis_for(mode, n_max, basis):
    if basis is not None:
        return basis
    return ModeBasis(_config(mode), mode.m_abs, n_max)


def check_conditions(mode: ModeSolution, profile: Profile, n_max: int = 4,
                     threshold: float = 0.1, basis: Optional[ModeBasis] = None) -> ConditionsReport:
    """Evaluate the three first-order validity ratios for ``mode``."""
    basis = _basis_for(mode, n_max, basis)
    idx = mode.index
    h_nn = matrix_element(idx, idx, profile, basis)
    c_a = abs(h_nn) / mode.beta0 ** 2
    c_b = c_c = None
    for n2 in range(1, n_max + 1):
        if n2 == idx.n or (n2, idx.m_abs) not in basis:
            continue
        other = ModeIndex(n2, idx.m_ell, idx.sigma)
        gap = abs(mode.beta0 ** 2 - basis.radial(n2, idx.m_abs).beta0 ** 2)
        h_up = matrix_element(other, idx, profile, basis)
        h_down = matrix_element(idx, other, profile, basis)
        b = abs(h_up) / gap
        c = abs(h_up * h_down) / (gap * abs(h_nn))
        c_b = b if c_b is None else max(c_b, b)
        c_c = c if c_c is None else max(c_c, c)
    return ConditionsReport(idx, c_a, c_b, c_c, threshold)


def second_order_shift(mode: ModeSolution, profile: Profile, n_max: int = 4,
                       basis: Optional[ModeBasis] = None, rtol_imag: float = 1e-9) -> float:
    """Second-order correction to ``beta0^2`` from same-``(m_ell, sigma)`` states.

    Uses ``sum_{n' != n} <n'|H'|n><n|H'|n'> / (beta0_n^2 - beta0_n'^2)``,
    the ordering appropriate to a non-Hermitian perturbation.
    """
    basis = _basis_for(mode, n_max, basis)
    idx = mode.index
    b2 = mode.beta0 ** 2
    total = 0j
    for n2 in range(1, n_max + 1):
        if n2 == idx.n or (n2, idx.m_abs) not in basis:
            continue
        other = ModeIndex(n2, idx.m_ell, idx.sigma)
        gap = b2 - basis.radial(n2, idx.m_abs).beta0 ** 2
        if abs(gap) < 1e-6 * b2:
            raise IllConditionedError(f"near-degenerate radial modes n = {idx.n}, {n2}")
        total += matrix_element(other, idx, profile, basis) * matrix_element(idx, other, profile, basis) / gap
    if abs(total.imag) > rtol_imag * max(abs(total.real), np.finfo(float).tiny):
        raise IllConditionedError(f"second-order correction is not real: {total!r}")
    return float(total.real)
