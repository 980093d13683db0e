"""Independent reference implementations used only by the tests.

None of these share code with the package: Bessel functions come from the
power series (J) and the integral representation (K), roots from a scan of
the uncleared log-derivative matching condition refined with mpmath, and
radial integrals from direct quadrature of the sampled wavefunctions.
"""

import math

import mpmath
import numpy as np
from scipy import integrate

mpmath.mp.dps = 30


def bessel_j_series(m, x, terms=200):
    """J_m(x) from its power series in 30-digit arithmetic."""
    x = mpmath.mpf(x)
    half = x / 2
    total = mpmath.mpf(0)
    term = half ** m / mpmath.factorial(m)
    for k in range(terms):
        total += term
        term *= -half * half / ((k + 1) * (k + 1 + m))
        if abs(term) < mpmath.mpf(10) ** -35 * max(abs(total), 1):
            break
    return float(total)


def bessel_k_integral(m, x):
    """K_m(x) = int_0^inf exp(-x cosh t) cosh(m t) dt."""
    upper = math.acosh(1.0 + 800.0 / x) + 1.0
    val, _ = integrate.quad(lambda t: math.exp(-x * math.cosh(t)) * math.cosh(m * t), 0.0, upper,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def _mp_mismatch(x, r, m):
    # uncleared condition x J_{m+1}/J_m - w K_{m+1}/K_m, evaluated by mpmath
    w = mpmath.sqrt(r * r - x * x)
    return x * mpmath.besselj(m + 1, x) / mpmath.besselj(m, x) - w * mpmath.besselk(m + 1, w) / mpmath.besselk(m, w)


def char_roots(r, m, samples=4000):
    """Roots of the matching condition on (0, R), found independently.

    The uncleared form has poles at the zeros of J_m; sign changes across
    those poles are rejected by checking the refined value.
    """
    r = mpmath.mpf(r)
    xs = np.linspace(1e-6, float(r) * (1 - 1e-12), samples)
    vals = [float(_mp_mismatch(mpmath.mpf(x), r, m)) for x in xs]
    roots = []
    for i in range(len(xs) - 1):
        a, b = vals[i], vals[i + 1]
        if not (math.isfinite(a) and math.isfinite(b)) or a * b > 0:
            continue
        lo, hi = mpmath.mpf(xs[i]), mpmath.mpf(xs[i + 1])
        flo = _mp_mismatch(lo, r, m)
        for _ in range(56):
            mid = (lo + hi) / 2
            fmid = _mp_mismatch(mid, r, m)
            if (fmid < 0) == (flo < 0):
                lo, flo = mid, fmid
            else:
                hi = mid
        # a pole of the ratio form also changes sign, but blows up instead of vanishing
        if abs(_mp_mismatch((lo + hi) / 2, r, m)) < 1e-6:
            roots.append(float((lo + hi) / 2))
    return roots


def plane_norm(mode, rho_max=None):
    """2 pi int psi^2 rho drho by quadrature of the sampled wavefunction."""
    if rho_max is None:
        rho_max = 1.0 + 60.0 / mode.kappa_tilde0_a
    f = lambda r: mode.psi(r) ** 2 * r
    inner, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
    outer, _ = integrate.quad(f, 1.0, rho_max, epsabs=1e-14, epsrel=1e-12, limit=400)
    return 2 * math.pi * (inner + outer)


def central_difference(fn, x, h=1e-6):
    return (fn(x + h) - fn(x - h)) / (2 * h)


def richardson_derivative(fn, x, h=1e-3):
    """Fourth-order central difference."""
    return (-fn(x + 2 * h) + 8 * fn(x + h) - 8 * fn(x - h) + fn(x - 2 * h)) / (12 * h)


def observed_order(widths, errors):
    """Least-squares slope of log(error) against log(width)."""
    return float(np.polyfit(np.log(widths), np.log(errors), 1)[0])


# Symbolic nonzero entries of the reference perturbation matrices within one (n', n) pair,
# as (bra (m_ell, sigma), ket (m_ell, sigma), symbol), rows |m_ell| <= 4.
ELECTRON_REFERENCE = [
    ((0, 1), (0, 1), "A0"), ((0, 1), (1, -1), "-iB1"),
    ((0, -1), (0, -1), "A0"), ((0, -1), (-1, 1), "+iB1"),
    ((1, -1), (0, 1), "+iB0"), ((1, -1), (1, -1), "A1+"),
    ((-1, 1), (0, -1), "-iB0"), ((-1, 1), (-1, 1), "A1+"),
    ((1, 1), (1, 1), "A1-"), ((1, 1), (2, -1), "-iB2"),
    ((-1, -1), (-1, -1), "A1-"), ((-1, -1), (-2, 1), "+iB2"),
    ((2, -1), (1, 1), "+iB1"), ((2, -1), (2, -1), "A2+"),
    ((-2, 1), (-1, -1), "-iB1"), ((-2, 1), (-2, 1), "A2+"),
    ((2, 1), (2, 1), "A2-"), ((2, 1), (3, -1), "-iB3"),
    ((-2, -1), (-2, -1), "A2-"), ((-2, -1), (-3, 1), "+iB3"),
    ((3, -1), (2, 1), "+iB2"), ((3, -1), (3, -1), "A3+"),
    ((-3, 1), (-2, -1), "-iB2"), ((-3, 1), (-3, 1), "A3+"),
    ((3, 1), (3, 1), "A3-"), ((3, 1), (4, -1), "-iB4"),
    ((-3, -1), (-3, -1), "A3-"), ((-3, -1), (-4, 1), "+iB4"),
    ((4, -1), (3, 1), "+iB3"), ((4, -1), (4, -1), "A4+"),
    ((-4, 1), (-3, -1), "-iB3"), ((-4, 1), (-4, 1), "A4+"),
    ((4, 1), (4, 1), "A4-"),
    ((-4, -1), (-4, -1), "A4-"),
]

PHOTON_REFERENCE = [
    ((0, 1), (0, 1), "A0"), ((0, 1), (2, -1), "B2-"),
    ((0, -1), (0, -1), "A0"), ((0, -1), (-2, 1), "B2-"),
    ((1, -1), (1, -1), "A1+"), ((1, -1), (-1, 1), "A1+"),
    ((-1, 1), (1, -1), "A1+"), ((-1, 1), (-1, 1), "A1+"),
    ((1, 1), (1, 1), "A1-"), ((1, 1), (3, -1), "B3-"),
    ((-1, -1), (-1, -1), "A1-"), ((-1, -1), (-3, 1), "B3-"),
    ((2, -1), (0, 1), "B0+"), ((2, -1), (2, -1), "A2+"),
    ((-2, 1), (0, -1), "B0+"), ((-2, 1), (-2, 1), "A2+"),
    ((2, 1), (2, 1), "A2-"), ((2, 1), (4, -1), "B4-"),
    ((-2, -1), (-2, -1), "A2-"), ((-2, -1), (-4, 1), "B4-"),
    ((3, -1), (1, 1), "B1+"), ((3, -1), (3, -1), "A3+"),
    ((-3, 1), (-1, -1), "B1+"), ((-3, 1), (-3, 1), "A3+"),
    ((3, 1), (3, 1), "A3-"),
    ((-3, -1), (-3, -1), "A3-"),
    ((4, -1), (2, 1), "B2+"), ((4, -1), (4, -1), "A4+"),
    ((-4, 1), (-2, -1), "B2+"), ((-4, 1), (-4, 1), "A4+"),
    ((4, 1), (4, 1), "A4-"),
    ((-4, -1), (-4, -1), "A4-"),
]

REFERENCE_ORDER = [(0, 1), (0, -1)] + [s for m in range(1, 5) for s in ((m, -1), (-m, 1), (m, 1), (-m, -1))]


def reference_mask(entries, n_values=(1, 2)):
    """Boolean nonzero mask over (n, m_ell, sigma) in the reference ordering, for every (n', n)."""
    labels = [(n, m, s) for n in n_values for (m, s) in REFERENCE_ORDER]
    pos = {lbl: i for i, lbl in enumerate(labels)}
    mask = np.zeros((len(labels), len(labels)), dtype=bool)
    for nb in n_values:
        for nk in n_values:
            for (bm, bs), (km, ks), _ in entries:
                mask[pos[(nb, bm, bs)], pos[(nk, km, ks)]] = True
    return labels, mask
