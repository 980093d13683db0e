"""Integer-order Bessel functions used by the step-profile solver.

Thin, validated wrappers over :mod:`scipy.special`. Orders are non-negative
integers; callers fold negative orders (``J_{-m} = (-1)^m J_m``,
``K_{-m} = K_m``) before calling in.
"""

import numbers

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = ["bessel_j", "bessel_j_prime", "bessel_k"]


def _check_order(m):
    if isinstance(m, (bool, np.bool_)) or not isinstance(m, numbers.Integral):
        raise DomainError(f"Bessel order must be an integer, got {m!r}")
    if m < 0:
        raise DomainError(f"Bessel order must be non-negative, got {m}")
    return int(m)


def _as_real(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Bessel argument must be finite")
    return arr


def _out(arr, value):
    return float(value) if arr.ndim == 0 else value


def bessel_j(m, x):
    """Bessel function of the first kind ``J_m(x)`` for ``x >= 0``.

    Accepts scalars or arrays; returns a float for scalar input.
    """
    m = _check_order(m)
    arr = _as_real(x)
    if np.any(arr < 0):
        raise DomainError("bessel_j requires x >= 0")
    return _out(arr, special.jv(m, arr))


def bessel_j_prime(m, x):
    """Derivative ``J_m'(x) = (J_{m-1}(x) - J_{m+1}(x)) / 2``."""
    m = _check_order(m)
    arr = _as_real(x)
    if np.any(arr < 0):
        raise DomainError("bessel_j_prime requires x >= 0")
    if m == 0:
        return _out(arr, -special.jv(1, arr))
    return _out(arr, 0.5 * (special.jv(m - 1, arr) - special.jv(m + 1, arr)))


def bessel_k(m, x):
    """Modified Bessel function of the second kind ``K_m(x)`` for ``x > 0``."""
    m = _check_order(m)
    arr = _as_real(x)
    if np.any(arr <= 0):
        raise DomainError("bessel_k requires x > 0 (K_m diverges at the origin)")
    val = special.kv(m, arr)
    # kv underflows to 0 around x ~ 700; keep the strict-positivity contract.
    if np.any(val <= 0):
        raise DomainError(f"K_{m}(x) underflows for x = {np.max(arr):g}")
    return _out(arr, val)

