"""
Duffing-Van der Pol Survey - Elliptic Kernel
Complete elliptic integrals K(m), E(m) and the nome ratio, parameter convention m = k^2
"""

import math
from typing import Union

import numpy as np

import config
from .errors import DomainError

ArrayLike = Union[float, np.ndarray]


def _as_array(m: ArrayLike) -> np.ndarray:
    return np.asarray(m, dtype=float)


def _agm(m: np.ndarray):
    """
    Arithmetic-geometric mean of (1, sqrt(1-m)) together with the
    weighted sum of c_n^2 needed for E.

    Returns:
        (agm, csum) with E/K = 1 - csum
    """
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    c2 = m.copy()
    csum = 0.5 * c2
    power = 0.5
    tol = config.AGM_EPS_FACTOR * np.finfo(float).eps

    for _ in range(config.AGM_MAX_ITER):
        if np.all(np.abs(a - b) <= tol * a):
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        power *= 2.0
        csum = csum + power * c * c

    return a, csum


def complete_K(m: ArrayLike) -> ArrayLike:
    """
    Complete elliptic integral of the first kind K(m) = int_0^{pi/2} dt / sqrt(1 - m sin^2 t)

    Args:
        m: parameter in [0, 1), scalar or array

    Returns:
        K with the shape of m
    """
    arr = _as_array(m)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"complete_K needs 0 <= m < 1, got {m}")

    a, _ = _agm(np.atleast_1d(arr))
    value = math.pi / (2.0 * a)
    return float(value[0]) if arr.ndim == 0 else value.reshape(arr.shape)


def complete_E(m: ArrayLike) -> ArrayLike:
    """
    Complete elliptic integral of the second kind E(m) = int_0^{pi/2} sqrt(1 - m sin^2 t) dt

    Args:
        m: parameter in [0, 1], scalar or array

    Returns:
        E with the shape of m (E(1) = 1 exactly)
    """
    arr = _as_array(m)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"complete_E needs 0 <= m <= 1, got {m}")

    flat = np.atleast_1d(arr).astype(float)
    out = np.ones_like(flat)
    inner = flat < 1.0
    if np.any(inner):
        a, csum = _agm(flat[inner])
        out[inner] = (math.pi / (2.0 * a)) * (1.0 - csum)
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def nome_ratio(m: ArrayLike) -> ArrayLike:
    """
    Nome a(m) = exp(-pi K(1-m) / K(m)), the geometric decay factor of
    the Fourier coefficients of the dn/cn orbits.

    Args:
        m: parameter in (0, 1)
    """
    arr = _as_array(m)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"nome_ratio needs 0 < m < 1, got {m}")
    value = np.exp(-math.pi * complete_K(1.0 - arr) / complete_K(arr))
    return float(value) if arr.ndim == 0 else value


def dK_dm(m: ArrayLike) -> ArrayLike:
    """dK/dm = (E - (1-m) K) / (2 m (1-m)), valid on (0, 1)"""
    arr = _as_array(m)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"dK_dm needs 0 < m < 1, got {m}")
    k = complete_K(arr)
    e = complete_E(arr)
    return (e - (1.0 - arr) * k) / (2.0 * arr * (1.0 - arr))


def dE_dm(m: ArrayLike) -> ArrayLike:
    """dE/dm = (E - K) / (2 m), valid on (0, 1)"""
    arr = _as_array(m)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"dE_dm needs 0 < m < 1, got {m}")
    return (complete_E(arr) - complete_K(arr)) / (2.0 * arr)


def legendre_defect(m: ArrayLike) -> ArrayLike:
    """E(m)K(1-m) + E(1-m)K(m) - K(m)K(1-m) - pi/2 (zero up to rounding)"""
    arr = _as_array(m)
    k, kp = complete_K(arr), complete_K(1.0 - arr)
    e, ep = complete_E(arr), complete_E(1.0 - arr)
    return e * kp + ep * k - k * kp - math.pi / 2.0


# ==================== TESTING ====================

if __name__ == "__main__":
    for m in (0.0, 0.5, 0.9):
        print(f"m={m:<4} K={complete_K(m):.16f} E={complete_E(m):.16f}")
    print(f"a(0.5) = {nome_ratio(0.5):.12f}  (exp(-pi) = {math.exp(-math.pi):.12f})")
    print(f"Legendre defect at 0.3: {legendre_defect(0.3):.2e}")
