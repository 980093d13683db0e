"""Guided modes of the step profile.

Inside the core the radial function is ``N J_m(x rho)`` and outside it is
``N (J_m(x) / K_m(w)) K_m(w rho)``, with ``x = kappa0 a``, ``w = kappa~0 a``
and ``x^2 + w^2 = R^2``. Matching logarithmic derivatives at ``rho = 1`` gives
the characteristic equation, solved here in the pole-free cleared form

    F(x) = x J_{m+1}(x) K_m(w) - w K_{m+1}(w) J_m(x).

``N`` normalizes over the full transverse plane: ``2 pi int psi^2 rho drho = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import optimize, special

from .errors import DomainError, InconsistentRootError, NotGuidedError, ValidationError
from .medium import NormalizedFrequency, Particle, ParticleConfig, waveguide_parameter
from .specfun import bessel_j, bessel_j_prime, bessel_k

__all__ = [
    "ModeIndex",
    "ModeSolution",
    "char_residual",
    "solve_modes",
    "beta0",
    "normalization",
    "norm_brace",
    "solve_mode",
    "guided_modes",
    "mode_count",
    "lp_label",
]

_ROOT_XTOL = 1e-13
# smallest kappa~0 a searched: keeps K_1(w)^2 in the normalization finite
_W_FLOOR = 1e-150


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Quantum numbers ``|n m_ell sigma>``."""

    n: int
    m_ell: int
    sigma: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"radial index n must be an integer >= 1, got {self.n!r}")
        if int(self.m_ell) != self.m_ell:
            raise ValidationError(f"m_ell must be an integer, got {self.m_ell!r}")
        if self.sigma not in (1, -1):
            raise ValidationError(f"sigma must be +1 or -1, got {self.sigma!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m_ell", int(self.m_ell))
        object.__setattr__(self, "sigma", int(self.sigma))

    @property
    def m_abs(self):
        return abs(self.m_ell)

    @property
    def mu(self):
        """Sign of ``m_ell``; 0 when ``m_ell == 0``."""
        return (self.m_ell > 0) - (self.m_ell < 0)

    @property
    def sigma_m_sign(self):
        """Sign of ``sigma * m_ell`` (0 for ``m_ell == 0``)."""
        return self.sigma * self.mu

    def label(self):
        return f"|{self.n} {self.m_ell:+d} {'+' if self.sigma > 0 else '-'}>"


def lp_label(index: ModeIndex) -> str:
    """LP label with a trailing ``+``/``-`` for the sign of ``sigma * m_ell``."""
    base = f"LP{index.m_abs}{index.n}"
    if index.m_ell == 0:
        return base
    return base + ("+" if index.sigma_m_sign > 0 else "-")


def _check_interval(kappa0_a, r):
    if not (0.0 < kappa0_a < r):
        raise DomainError(f"kappa0_a must lie in (0, R) = (0, {r}), got {kappa0_a!r}")


def _r(r) -> float:
    return float(r.r_value) if isinstance(r, NormalizedFrequency) else float(NormalizedFrequency(float(r)))


def char_residual(kappa0_a, r, m_abs) -> float:
    """Cleared characteristic function ``F(kappa0 a)``; its roots are the guided modes."""
    rv = _r(r)
    x = float(kappa0_a)
    _check_interval(x, rv)
    w = math.sqrt(rv * rv - x * x)
    return (x * bessel_j(m_abs + 1, x) * bessel_k(m_abs, w)
            - w * bessel_k(m_abs + 1, w) * bessel_j(m_abs, x))


def _residual_array(x, rv, m):
    w = np.sqrt(rv * rv - x * x)
    return x * special.jv(m + 1, x) * special.kv(m, w) - w * special.kv(m + 1, w) * special.jv(m, x)


def _j_signed(m, x):
    # J_{-1} = -J_1 is the only negative order the formulas need
    return -bessel_j(1, x) if m == -1 else bessel_j(m, x)


def norm_brace(kappa0_a, kappa_tilde0_a, m_abs) -> float:
    """``K_{m-1}K_{m+1}/K_m^2 - J_{m-1}J_{m+1}/J_m^2`` (K at kappa~0 a, J at kappa0 a)."""
    x, w, m = float(kappa0_a), float(kappa_tilde0_a), int(m_abs)
    jm = bessel_j(m, x)
    if jm == 0.0:
        raise InconsistentRootError("J_m(kappa0 a) = 0: degenerate root")
    km = bessel_k(m, w)
    k_term = bessel_k(abs(m - 1), w) * bessel_k(m + 1, w) / km ** 2
    j_term = _j_signed(m - 1, x) * bessel_j(m + 1, x) / jm ** 2
    return k_term - j_term


def normalization(kappa0_a, kappa_tilde0_a, m_abs) -> float:
    """Normalization factor ``N`` with ``2 pi int psi^2 rho drho = 1``."""
    brace = norm_brace(kappa0_a, kappa_tilde0_a, m_abs)
    if not brace > 0.0:
        raise InconsistentRootError(f"normalization brace is non-positive ({brace!r}); spurious root")
    return 1.0 / (math.sqrt(math.pi) * bessel_j(m_abs, kappa0_a) * math.sqrt(brace))


def _f_of_x(x, rv, m):
    w = math.sqrt(rv * rv - x * x)
    return x * special.jv(m + 1, x) * special.kv(m, w) - w * special.kv(m + 1, w) * special.jv(m, x)


def _f_of_w(w, rv, m):
    x = math.sqrt(rv * rv - w * w)
    return x * special.jv(m + 1, x) * special.kv(m, w) - w * special.kv(m + 1, w) * special.jv(m, x)


def _sign_changes(f):
    ok = np.isfinite(f[:-1]) & np.isfinite(f[1:])
    return np.flatnonzero(ok & (np.sign(f[:-1]) * np.sign(f[1:]) <= 0) & (f[1:] != 0.0))


def _refine(fn, lo, hi, flo, rv, m):
    if flo == 0.0:
        return lo
    # relative tolerance at machine precision; the absolute floor only matters for tiny w
    return optimize.brentq(fn, lo, hi, args=(rv, m), xtol=1e-300, rtol=4 * np.finfo(float).eps,
                           maxiter=200)


def solve_pairs(r, m_abs) -> list:
    """Roots as ``(kappa0 a, kappa~0 a)`` pairs, ascending in ``kappa0 a``.

    Near ``kappa0 a = R`` the scan switches to a log-spaced grid in
    ``kappa~0 a`` so weakly bound modes (``kappa~0 a`` down to ~1e-150) keep
    an accurate decay constant.
    """
    rv = _r(r)
    m = int(m_abs)
    if m < 0:
        raise DomainError("m_abs must be >= 0")
    eps = min(1e-9 * rv, 1e-9)
    # consecutive roots of one order are roughly pi apart; this grid cannot straddle two
    step = min(0.05, rv / 200.0)
    npts = int(math.ceil((rv - 2 * eps) / step)) + 1
    grid = np.linspace(eps, rv - eps, npts)
    with np.errstate(all="ignore"):
        f = _residual_array(grid, rv, m)
    pairs = []
    for i in _sign_changes(f):
        x = _refine(_f_of_x, float(grid[i]), float(grid[i + 1]), float(f[i]), rv, m)
        pairs.append((x, math.sqrt(rv * rv - x * x)))
    # gap between the last x sample and x = R, scanned in w (descending w is ascending x)
    w_top = math.sqrt(rv * rv - float(grid[-1]) ** 2)
    wgrid = np.geomspace(w_top, _W_FLOOR, 200)
    with np.errstate(all="ignore"):
        xg = np.sqrt(rv * rv - wgrid * wgrid)
        g = xg * special.jv(m + 1, xg) * special.kv(m, wgrid) - wgrid * special.kv(m + 1, wgrid) * special.jv(m, xg)
    for i in _sign_changes(g):
        w = _refine(_f_of_w, float(wgrid[i + 1]), float(wgrid[i]), float(g[i + 1]), rv, m)
        pairs.append((math.sqrt(rv * rv - w * w), w))
    out = []
    for x, w in pairs:
        try:
            if not norm_brace(x, w, m) > 0.0:
                continue
        except (InconsistentRootError, DomainError):
            continue
        out.append((x, w))
    return out


def solve_modes(r, m_abs) -> list:
    """All roots ``kappa0 a`` of the characteristic equation on ``(0, R)``, ascending.

    The k-th root is radial index ``n = k``. Roots failing the normalization
    positivity test are discarded.
    """
    return [x for x, _ in solve_pairs(r, m_abs)]


def mode_count(r, m_abs) -> int:
    return len(solve_modes(r, m_abs))


def beta0(config: ParticleConfig, kappa0_a) -> float:
    """Unperturbed propagation constant (1/m) for a transverse wavenumber ``kappa0 a``."""
    a = config.radius_a
    ka = a / config.wavelength
    arg = ka * ka - float(kappa0_a) ** 2
    if arg <= 0:
        raise NotGuidedError(f"kappa0 a = {kappa0_a} >= a k(0) = {ka}: beta0 is not real")
    return math.sqrt(arg) / a


@dataclass(frozen=True)
class ModeSolution:
    """A solved step-profile eigenstate and its radial wavefunction.

    ``config`` may be ``None`` for solutions reloaded from JSON, in which case
    only the dimensionless radial function is available.
    """

    index: ModeIndex
    r_value: float
    kappa0_a: float
    kappa_tilde0_a: float
    beta0: float
    norm_n: float
    config: Optional[ParticleConfig] = None
    particle: Optional[Particle] = None

    def __post_init__(self):
        if self.particle is None and self.config is not None:
            object.__setattr__(self, "particle", self.config.kind)
        if self.particle is not None:
            object.__setattr__(self, "particle", Particle(self.particle))

    @property
    def m_abs(self):
        return self.index.m_abs

    @property
    def outer_scale(self):
        """``J_m(x) / K_m(w)``; makes psi continuous at the boundary."""
        return bessel_j(self.m_abs, self.kappa0_a) / bessel_k(self.m_abs, self.kappa_tilde0_a)

    def with_index(self, m_ell=None, sigma=None):
        """Same radial solution relabelled with another ``(m_ell, sigma)`` of equal ``|m_ell|``."""
        m_ell = self.index.m_ell if m_ell is None else m_ell
        sigma = self.index.sigma if sigma is None else sigma
        if abs(m_ell) != self.m_abs:
            raise ValidationError("with_index must keep |m_ell|")
        return replace(self, index=ModeIndex(self.index.n, m_ell, sigma))

    def psi(self, rho):
        """Radial wavefunction ``psi(rho)``; vectorized."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0):
            raise DomainError("rho must be >= 0")
        m = self.m_abs
        inside = self.norm_n * special.jv(m, self.kappa0_a * np.minimum(rho, 1.0))
        with np.errstate(all="ignore"):
            outside = (self.norm_n * self.outer_scale
                       * special.kv(m, self.kappa_tilde0_a * np.maximum(rho, 1.0)))
        outside = np.nan_to_num(outside, nan=0.0)
        val = np.where(rho <= 1.0, inside, outside)
        return float(val) if val.ndim == 0 else val

    def psi_prime(self, rho):
        """``d psi / d rho``; the inside branch is used at ``rho = 1``."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0):
            raise DomainError("rho must be >= 0")
        m, x, w = self.m_abs, self.kappa0_a, self.kappa_tilde0_a
        ri = np.minimum(rho, 1.0)
        inside = self.norm_n * x * _jp_array(m, x * ri)
        ro = np.maximum(rho, 1.0)
        with np.errstate(all="ignore"):
            outside = self.norm_n * self.outer_scale * w * _kp_array(m, w * ro)
        outside = np.nan_to_num(outside, nan=0.0)
        val = np.where(rho <= 1.0, inside, outside)
        return float(val) if val.ndim == 0 else val

    def psi_prime_inside(self):
        """Inside limit of ``psi'`` at the boundary: ``N x J_m'(x)``."""
        return self.norm_n * self.kappa0_a * bessel_j_prime(self.m_abs, self.kappa0_a)

    def psi_prime_outside(self):
        """Outside limit of ``psi'`` at the boundary."""
        return self.norm_n * self.outer_scale * self.kappa_tilde0_a * float(_kp_array(self.m_abs, self.kappa_tilde0_a))

    def residual(self):
        return char_residual(self.kappa0_a, self.r_value, self.m_abs)

    def to_dict(self):
        return {
            "particle": self.particle.value if self.particle is not None else None,
            "R": self.r_value,
            "n": self.index.n,
            "m_ell": self.index.m_ell,
            "sigma": self.index.sigma,
            "kappa0_a": self.kappa0_a,
            "kappa_tilde0_a": self.kappa_tilde0_a,
            "beta0": self.beta0,
            "N": self.norm_n,
        }

    @classmethod
    def from_dict(cls, doc, config: Optional[ParticleConfig] = None):
        try:
            index = ModeIndex(doc["n"], doc["m_ell"], doc["sigma"])
            sol = cls(index, float(doc["R"]), float(doc["kappa0_a"]), float(doc["kappa_tilde0_a"]),
                      float(doc["beta0"]), float(doc["N"]), config, doc.get("particle"))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed mode document: {exc}") from exc
        return sol


def _jp_array(m, x):
    if m == 0:
        return -special.jv(1, x)
    return 0.5 * (special.jv(m - 1, x) - special.jv(m + 1, x))


def _kp_array(m, x):
    return -0.5 * (special.kv(abs(m - 1), x) + special.kv(m + 1, x))


def solve_mode(config: ParticleConfig, index: ModeIndex) -> ModeSolution:
    """Solve the eigenstate ``index`` for ``config``; raises if it is not guided."""
    r = waveguide_parameter(config)
    roots = solve_pairs(r, index.m_abs)
    if index.n > len(roots):
        raise NotGuidedError(
            f"{lp_label(index)} is not guided at R = {r.r_value:.6g} "
            f"({len(roots)} radial mode(s) for |m_ell| = {index.m_abs})")
    return mode_from_root(config, r.r_value, index, *roots[index.n - 1])


def mode_from_root(config: ParticleConfig, rv: float, index: ModeIndex, x: float,
                   w: Optional[float] = None) -> ModeSolution:
    """Assemble a solution from an already-located root ``x = kappa0 a`` at ``R = rv``."""
    if w is None:
        w = math.sqrt(rv * rv - x * x)
    return ModeSolution(index, rv, x, w, beta0(config, x), normalization(x, w, index.m_abs), config)


def guided_modes(config: ParticleConfig, m_abs_max: int, n_max: Optional[int] = None) -> list:
    """Every guided radial solution with ``|m_ell| <= m_abs_max``.

    Returned with ``m_ell = |m_ell|`` and ``sigma = +1``; relabel with
    :meth:`ModeSolution.with_index`. Ordered by ``(|m_ell|, n)``.
    """
    r = waveguide_parameter(config)
    out = []
    for m in range(int(m_abs_max) + 1):
        for n, (x, w) in enumerate(solve_pairs(r, m), start=1):
            if n_max is not None and n > n_max:
                break
            out.append(mode_from_root(config, r.r_value, ModeIndex(n, m, 1), x, w))
    return out
