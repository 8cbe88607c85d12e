"""
Duffing-Van der Pol Survey - Unperturbed Geometry
Energy levels, orbits, frequencies and actions of x'' - x + x^3 = 0
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np
from scipy import integrate, special

import config
from .elliptic_kernel import complete_K
from .errors import DomainError, QuadratureFailure, StepUnderflow


class DomainTag(str, Enum):
    """Region of the unperturbed phase plane filled by closed orbits"""

    G1_PLUS = "G1_PLUS"
    G1_MINUS = "G1_MINUS"
    G2 = "G2"

    @property
    def inside_loop(self) -> bool:
        return self is not DomainTag.G2

    @property
    def sign(self) -> float:
        """Sign of x on the orbit (0 for the exterior orbits)"""
        if self is DomainTag.G1_PLUS:
            return 1.0
        if self is DomainTag.G1_MINUS:
            return -1.0
        return 0.0

    @property
    def rho_range(self) -> Tuple[float, float]:
        return (0.0, 1.0) if self.inside_loop else (0.5, 1.0)


@dataclass(frozen=True)
class EnergyLevel:
    """Unperturbed orbit H = h, labelled by its domain and elliptic parameter rho"""

    domain: DomainTag
    h: float
    rho: float


@dataclass(frozen=True)
class OrbitPoint:
    x: float
    y: float
    t: float


def hamiltonian(x, y):
    """H(x, y) = y^2/2 - x^2/2 + x^4/4"""
    return 0.5 * y * y - 0.5 * x * x + 0.25 * x ** 4


def rho_from_h(h: float, domain: DomainTag) -> float:
    s = math.sqrt(1.0 + 4.0 * h)
    if domain.inside_loop:
        return 2.0 * s / (1.0 + s)
    return (1.0 + s) / (2.0 * s)


def h_from_rho(rho: float, domain: DomainTag) -> float:
    """
    Closed-form inverse of the rho(h) maps

    Args:
        rho: elliptic parameter, (0,1) in G1 and (1/2,1) in G2
        domain: DomainTag
    """
    lo, hi = domain.rho_range
    if not (lo < rho < hi):
        raise DomainError(f"rho={rho} outside ({lo}, {hi}) for {domain.value}")
    if domain.inside_loop:
        s = rho / (2.0 - rho)
    else:
        s = 1.0 / (2.0 * rho - 1.0)
    return 0.25 * (s * s - 1.0)


def level_from_h(h: float, domain: DomainTag) -> EnergyLevel:
    """
    Build the energy level for h in the range of the domain

    Args:
        h: energy; (-1/4, 0) for G1+/G1-, (0, inf) for G2
        domain: DomainTag

    Returns:
        EnergyLevel
    """
    domain = DomainTag(domain)
    if not math.isfinite(h):
        raise DomainError(f"h must be finite, got {h}")
    if domain.inside_loop and not (-0.25 < h < 0.0):
        raise DomainError(f"h={h} outside (-1/4, 0) for {domain.value}")
    if not domain.inside_loop and not (h > 0.0):
        raise DomainError(f"h={h} must be positive for G2")
    return EnergyLevel(domain=domain, h=float(h), rho=rho_from_h(h, domain))


def level_from_rho(rho: float, domain: DomainTag) -> EnergyLevel:
    domain = DomainTag(domain)
    return EnergyLevel(domain=domain, h=h_from_rho(rho, domain), rho=float(rho))


def turning_points(level: EnergyLevel) -> Tuple[float, float]:
    """
    x-range of the orbit

    Returns:
        (x_lo, x_hi); in G1- both negative, in G2 symmetric
    """
    s = math.sqrt(1.0 + 4.0 * level.h)
    x_max = math.sqrt(1.0 + s)
    if level.domain is DomainTag.G2:
        return -x_max, x_max
    x_min = math.sqrt(max(1.0 - s, 0.0))
    if level.domain is DomainTag.G1_PLUS:
        return x_min, x_max
    return -x_max, -x_min


def _orbit_scales(level: EnergyLevel) -> Tuple[float, float]:
    """Amplitude and time scale of the dn / cn representation"""
    rho = level.rho
    if level.domain.inside_loop:
        lam = 1.0 / math.sqrt(2.0 - rho)
        amp = math.sqrt(2.0) * lam
    else:
        lam = 1.0 / math.sqrt(2.0 * rho - 1.0)
        amp = math.sqrt(2.0 * rho) * lam
    return amp, lam


def orbit_arrays(level: EnergyLevel, t) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised closed-form orbit starting at the right-most turning point (x_lo in G1-)"""
    amp, lam = _orbit_scales(level)
    sn, cn, dn, _ = special.ellipj(lam * np.asarray(t, dtype=float), level.rho)
    if level.domain.inside_loop:
        sign = level.domain.sign
        x = sign * amp * dn
        y = -sign * amp * lam * level.rho * sn * cn
    else:
        x = amp * cn
        y = -amp * lam * sn * dn
    return x, y


def orbit_solution(level: EnergyLevel, t: float) -> OrbitPoint:
    """
    Point of the closed-form periodic orbit at time t

    G1+/G1-: x = +-A dn(t/sqrt(2-rho), rho), A^2 = 2/(2-rho)
    G2:      x = A cn(t/sqrt(2rho-1), rho), A^2 = 2rho/(2rho-1)

    Args:
        level: EnergyLevel
        t: time measured from the outer turning point

    Returns:
        OrbitPoint
    """
    x, y = orbit_arrays(level, t)
    return OrbitPoint(x=float(x), y=float(y), t=float(t))


def sample_orbit(level: EnergyLevel, n: int = 200) -> np.ndarray:
    """One period of orbit points as rows (t, x, y)"""
    t = np.linspace(0.0, period(level), n)
    x, y = orbit_arrays(level, t)
    return np.column_stack([t, x, y])


def frequency(level: EnergyLevel) -> float:
    """Angular frequency omega = 2 pi / T"""
    rho = level.rho
    if level.domain.inside_loop:
        return math.pi / (math.sqrt(2.0 - rho) * complete_K(rho))
    return math.pi / (2.0 * math.sqrt(2.0 * rho - 1.0) * complete_K(rho))


def frequency_of_rho(rho: float, domain: DomainTag) -> float:
    if domain is DomainTag.G2:
        return math.pi / (2.0 * math.sqrt(2.0 * rho - 1.0) * complete_K(rho))
    return math.pi / (math.sqrt(2.0 - rho) * complete_K(rho))


def period(level: EnergyLevel) -> float:
    return 2.0 * math.pi / frequency(level)


# ==================== QUADRATURE ORACLES ====================


def _quad(func, a: float, b: float) -> float:
    value, _ = integrate.quad(
        func,
        a,
        b,
        epsabs=config.QUAD_EPSABS,
        epsrel=config.QUAD_EPSREL,
        limit=config.QUAD_LIMIT,
    )
    if not math.isfinite(value):
        raise QuadratureFailure(f"non-finite quadrature on [{a}, {b}]")
    return value


def _poly(coeffs: Sequence[float], x: float) -> float:
    """g(x) = sum_k coeffs[k] x^k"""
    return sum(c * x ** k for k, c in enumerate(coeffs))


def _weighted_integrals(level: EnergyLevel, coeffs: Sequence[float]) -> Tuple[float, float]:
    """
    Returns:
        (int g(x)|y| dx, int g(x) dx/|y|) over the upper half of the orbit,
        both computed with the sin-substitution that removes the turning-point
        singularities
    """
    s = math.sqrt(1.0 + 4.0 * level.h)
    b = 1.0 + s
    if level.domain.inside_loop:
        a = 1.0 - s
        width = b - a
        sign = level.domain.sign

        def xs(phi):
            return math.sqrt(a + width * math.sin(phi) ** 2)

        def f_area(phi):
            x = xs(phi)
            sc = math.sin(phi) * math.cos(phi)
            return _poly(coeffs, sign * x) * width * width * sc * sc / (math.sqrt(2.0) * x)

        def f_time(phi):
            x = xs(phi)
            return _poly(coeffs, sign * x) * math.sqrt(2.0) / x

        return _quad(f_area, 0.0, math.pi / 2.0), _quad(f_time, 0.0, math.pi / 2.0)

    a = 1.0 - s
    x_max = math.sqrt(b)

    def g_area(phi):
        x = x_max * math.sin(phi)
        c = math.cos(phi)
        return _poly(coeffs, x) * x_max * x_max * c * c * math.sqrt(0.5 * (x * x - a))

    def g_time(phi):
        x = x_max * math.sin(phi)
        return _poly(coeffs, x) / math.sqrt(0.5 * (x * x - a))

    half = math.pi / 2.0
    return _quad(g_area, -half, half), _quad(g_time, -half, half)


def loop_integral(level: EnergyLevel, coeffs: Sequence[float]) -> float:
    """
    (1/2pi) closed integral of g(x) y dx along the orbit, traversed in time direction

    Args:
        level: EnergyLevel
        coeffs: polynomial coefficients of g, lowest degree first
    """
    area, _ = _weighted_integrals(level, coeffs)
    return area / math.pi


def period_quadrature(level: EnergyLevel) -> float:
    _, time = _weighted_integrals(level, (1.0,))
    return 2.0 * time


def orbit_average(level: EnergyLevel, coeffs: Sequence[float]) -> float:
    """Time average of g(x) over one period"""
    _, weighted = _weighted_integrals(level, coeffs)
    _, time = _weighted_integrals(level, (1.0,))
    return weighted / time


def action(level: EnergyLevel) -> float:
    """I(h) = (1/2pi) closed integral of y dx"""
    return loop_integral(level, (1.0,))


def domega_dI(level: EnergyLevel, step: float = None) -> float:
    """
    b = d omega / dI from centered differences in rho

    Args:
        level: EnergyLevel
        step: rho step (default config.FD_RHO_STEP)

    Returns:
        (d omega/d rho) / (d I/d rho)
    """
    step = step or config.FD_RHO_STEP
    lo, hi = level.domain.rho_range
    rho = level.rho
    if rho - step <= lo or rho + step >= hi:
        raise StepUnderflow(f"rho={rho} too close to ({lo}, {hi}) for step {step}")

    left = level_from_rho(rho - step, level.domain)
    right = level_from_rho(rho + step, level.domain)
    d_omega = frequency(right) - frequency(left)
    d_action = action(right) - action(left)
    return d_omega / d_action


def separatrix_curve(n: int = 400, side: str = "right") -> np.ndarray:
    """Points (x, y) of one loop of the figure-eight, y^2 = x^2 - x^4/2"""
    t = np.linspace(-1.0, 1.0, n) * 12.0
    x = math.sqrt(2.0) / np.cosh(t)
    y = -math.sqrt(2.0) * np.tanh(t) / np.cosh(t)
    if side == "left":
        x, y = -x, -y
    return np.column_stack([x, y])


# ==================== TESTING ====================

if __name__ == "__main__":
    lvl = level_from_h(-0.16, DomainTag.G1_PLUS)
    print(f"rho(-0.16) = {lvl.rho} (expected 0.75)")
    print(f"omega closed form {frequency(lvl):.12f}, quadrature {2 * math.pi / period_quadrature(lvl):.12f}")
    print(f"action {action(lvl):.12f}")
