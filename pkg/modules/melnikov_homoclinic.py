"""
Duffing-Van der Pol Survey - Melnikov Homoclinic
First-order splitting of the separatrix loops under periodic forcing,
transversality thresholds and the analytic tangency lines of the (p2, p3) plane
"""

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

import config
from .errors import DomainError, PreconditionWarning

# (pi sqrt(2) / 8): weight of p2 in the loop condition
LOOP_P2 = math.pi * math.sqrt(2.0) / 8.0

# p1 at which both loop conditions share the p2 = 0 vertex
COINCIDENCE_P1 = 0.8


def _log(msg: str) -> None:
    print(f"[Melnikov] {msg}")


class LoopSide(str, Enum):
    RIGHT = "RIGHT"
    LEFT = "LEFT"

    @property
    def sign(self) -> float:
        return 1.0 if self is LoopSide.RIGHT else -1.0

    @property
    def other(self) -> "LoopSide":
        return LoopSide.LEFT if self is LoopSide.RIGHT else LoopSide.RIGHT


class Verdict(str, Enum):
    TRANSVERSAL = "TRANSVERSAL"
    TANGENT = "TANGENT"
    NO_INTERSECTION = "NO_INTERSECTION"


@dataclass(frozen=True)
class MelnikovResult:
    """Delta1(t0) = mean + amplitude * cos(p4 t0)"""

    mean: float
    amplitude: float
    verdict: Verdict

    def value(self, t0, p4: float):
        return self.mean + self.amplitude * np.cos(p4 * np.asarray(t0, dtype=float))


def x1_correction(t, p3: float, p4: float):
    """Forced response x1(t) = -p3 / (1 + p4^2) sin(p4 t) removed by the transformation x = xi + eps x1"""
    return -p3 / (1.0 + p4 * p4) * np.sin(p4 * np.asarray(t, dtype=float))


def transformed_forcing_amplitude(p3: float, p4: float) -> float:
    """Coefficient of xi^2 sin(p4 t) in the transformed equation"""
    return 3.0 * p3 / (1.0 + p4 * p4)


def loop_condition(p1: float, p2: float, side: LoopSide) -> float:
    """(2/3) p1 +- (pi sqrt(2) / 8) p2 - 8/15; zero on the autonomous loop line"""
    return (2.0 / 3.0) * p1 + LoopSide(side).sign * LOOP_P2 * p2 - 8.0 / 15.0


def forcing_weight(p4: float) -> float:
    """3 pi p4 / (2 cosh(pi p4 / 2))"""
    return 3.0 * math.pi * p4 / (2.0 * math.cosh(math.pi * p4 / 2.0))


def _verdict(mean: float, amplitude: float) -> Verdict:
    gap = abs(amplitude) - abs(mean)
    if abs(gap) <= config.TANGENCY_TOL * max(1.0, abs(mean)):
        return Verdict.TANGENT
    return Verdict.TRANSVERSAL if gap > 0.0 else Verdict.NO_INTERSECTION


def melnikov_result(p1: float, p2: float, p3: float, p4: float, side: LoopSide) -> MelnikovResult:
    mean = 2.0 * loop_condition(p1, p2, side)
    amplitude = forcing_weight(p4) * p3
    return MelnikovResult(mean=mean, amplitude=amplitude, verdict=_verdict(mean, amplitude))


def delta1(t0, p1: float, p2: float, p3: float, p4: float, side: LoopSide):
    """
    Melnikov function of the right (side=RIGHT) or left loop

    Args:
        t0: section phase (scalar or array)
        p1, p2, p3, p4: parameters of the transformed equation
        side: LoopSide

    Returns:
        (Delta1(t0), MelnikovResult)
    """
    result = melnikov_result(p1, p2, p3, p4, side)
    value = result.value(t0, p4)
    if np.ndim(value) == 0:
        value = float(value)
    return value, result


def threshold_p3_star(p1: float, p2: float, p4: float, side: LoopSide) -> float:
    """
    Forcing amplitude above which the loop splits transversally

    p3* = (4/3) |((2/3) p1 +- (pi sqrt 2 / 8) p2 - 8/15) cosh(pi p4 / 2) / (pi p4)|
    """
    if p4 == 0.0:
        raise DomainError("threshold_p3_star needs p4 != 0")
    return (4.0 / 3.0) * abs(loop_condition(p1, p2, side) * math.cosh(math.pi * p4 / 2.0) / (math.pi * p4))


def threshold_curve(p1: float, p4: float, p2_values: Sequence[float], side: LoopSide) -> np.ndarray:
    """p3* along p2, rows (p2, p3*)"""
    p2_values = np.asarray(p2_values, dtype=float)
    p3 = np.array([threshold_p3_star(p1, p2, p4, side) for p2 in p2_values])
    return np.column_stack([p2_values, p3])


def right_loop_p2(p1: float) -> float:
    """p2 on the right-loop line of the autonomous equation"""
    return (8.0 / 15.0 - (2.0 / 3.0) * p1) / LOOP_P2


def left_loop_p2(p1: float) -> float:
    return -right_loop_p2(p1)


def left_loop_delta1(t0, p2: float, p3: float, p4: float, p1: Optional[float] = None):
    """
    Melnikov function of the left loop while the right loop persists

    Delta1 = -(pi sqrt 2 / 2) p2 + 3 pi p4 / (2 cosh(pi p4 / 2)) p3 cos(p4 t0)

    Args:
        p1: when given, the right-loop condition is checked and a
            PreconditionWarning is issued if it does not hold
    """
    if p1 is not None:
        deviation = abs(loop_condition(p1, p2, LoopSide.RIGHT))
        if deviation > config.LEFT_LOOP_PRECONDITION_TOL:
            warnings.warn(
                f"right-loop condition off by {deviation:.3g} at p1={p1}, p2={p2}",
                PreconditionWarning,
                stacklevel=2,
            )
    mean = -0.5 * math.pi * math.sqrt(2.0) * p2
    value = mean + forcing_weight(p4) * p3 * np.cos(p4 * np.asarray(t0, dtype=float))
    return float(value) if np.ndim(value) == 0 else value


def left_loop_tangency_p3(p2: float, p4: float) -> float:
    """p3 at which the left-loop Melnikov function touches zero"""
    return 0.5 * math.pi * math.sqrt(2.0) * abs(p2) / forcing_weight(p4)


# ==================== DIRECT INTEGRAL ====================


def vertex_amplitude(p3: float, p4: float, side: LoopSide) -> float:
    """
    cos(p4 t0) coefficient of the Melnikov integral with t0 the vertex passage time

    Equals -+ sqrt(2) pi p4 p3 / cosh(pi p4 / 2); the closed form above carries
    3 pi / 2 in place of sqrt(2) pi (ratio 3 / (2 sqrt 2), see DESIGN.md).
    """
    return -LoopSide(side).sign * math.sqrt(2.0) * math.pi * p4 * p3 / math.cosh(math.pi * p4 / 2.0)


def melnikov_integral(t0: float, p1: float, p2: float, p3: float, p4: float, side: LoopSide) -> float:
    """
    Melnikov function of the transformed equation by quadrature

    int y [(p1 + p2 x - x^2) y + 3 p3 / (1 + p4^2) x^2 sin(p4 t)] dt along
    x = +-sqrt(2) sech(t - t0), the loop passing its vertex at t = t0.
    Equals H_u - H_s to first order in eps.
    """
    sign = LoopSide(side).sign
    coef = transformed_forcing_amplitude(p3, p4)

    def integrand(s):
        sech = 1.0 / math.cosh(s)
        x = sign * math.sqrt(2.0) * sech
        y = -sign * math.sqrt(2.0) * sech * math.tanh(s)
        return y * ((p1 + p2 * x - x * x) * y + coef * x * x * math.sin(p4 * (s + t0)))

    value, _ = integrate.quad(integrand, -40.0, 40.0, limit=400, epsabs=1e-13, epsrel=1e-12)
    return value


def integrated_threshold_p3(p1: float, p2: float, p4: float, side: LoopSide) -> float:
    """Transversality threshold from the directly integrated Melnikov function"""
    if p4 == 0.0:
        raise DomainError("integrated_threshold_p3 needs p4 != 0")
    mean = 2.0 * loop_condition(p1, p2, side)
    return abs(mean) / abs(vertex_amplitude(1.0, p4, side))


# ==================== TANGENCY LINES ====================


@dataclass(frozen=True)
class TangencyLine:
    """
    Straight tangency line p3 = intercept + slope * p2 on [p2_min, p2_max]

    sides lists the loops whose splitting is tangent along the line (two
    entries on the coincidence line).
    """

    label: str
    sides: Tuple[LoopSide, ...]
    slope: float
    intercept: float
    p2_min: float
    p2_max: float

    def p3(self, p2):
        return self.intercept + self.slope * np.asarray(p2, dtype=float)

    def sample(self, n: int = 100) -> np.ndarray:
        p2 = np.linspace(self.p2_min, self.p2_max, n)
        return np.column_stack([p2, self.p3(p2)])

    def mirrored(self) -> "TangencyLine":
        sides = tuple(side.other for side in self.sides)
        return TangencyLine(
            self.label + "'", sides, -self.slope, self.intercept, -self.p2_max, -self.p2_min
        )


def diagram_letter(p1: float, tol: float = 1e-9) -> str:
    if abs(p1 - COINCIDENCE_P1) <= tol:
        return "N"
    return "M" if p1 < COINCIDENCE_P1 else "R"


def analytic_tangency_lines(
    p1: float, p4: float, epsilon: Optional[float] = None, p2_max: float = 2.5, tol: float = 1e-9
) -> List[TangencyLine]:
    """
    Analytic tangency lines of the half plane p2 >= 0, p3 >= 0

    Each loop gives p3 = kappa |loop_condition(p1, p2)| with
    kappa = (4/3) cosh(pi p4 / 2) / (pi p4). Line 1 belongs to the loop
    whose condition keeps its sign for p2 > 0; lines 2 and 3 are the
    ascending and descending arms of the other loop, meeting on the p2 axis.
    At p1 = 0.8 lines 1 and 2 coincide and line 3 shrinks to the origin.

    epsilon does not enter the first-order lines and is accepted for
    symmetry with the numeric tracer.
    """
    if p4 == 0.0:
        raise DomainError("analytic_tangency_lines needs p4 != 0")
    kappa = (4.0 / 3.0) * math.cosh(math.pi * p4 / 2.0) / (math.pi * p4)
    offset = (2.0 / 3.0) * p1 - 8.0 / 15.0
    letter = diagram_letter(p1, tol)
    slope = kappa * LOOP_P2

    if letter == "N":
        line = TangencyLine(
            "N1", (LoopSide.RIGHT, LoopSide.LEFT), slope, kappa * abs(offset), 0.0, p2_max
        )
        return [line]

    # M: right condition changes sign at p2 > 0, left does not; R: the reverse
    vee, plain = (LoopSide.RIGHT, LoopSide.LEFT) if offset < 0.0 else (LoopSide.LEFT, LoopSide.RIGHT)
    vertex = abs(offset) / LOOP_P2
    lines = [
        TangencyLine(f"{letter}1", (plain,), slope, kappa * abs(offset), 0.0, p2_max),
        TangencyLine(f"{letter}2", (vee,), slope, -kappa * abs(offset), vertex, max(p2_max, vertex)),
        TangencyLine(f"{letter}3", (vee,), -slope, kappa * abs(offset), 0.0, vertex),
    ]
    if config.DEBUG:
        _log(f"p1={p1}: vertex of the {vee.value.lower()} loop at p2={vertex:.6f}")
    return lines


# ==================== TESTING ====================

if __name__ == "__main__":
    print(f"left-loop tangency p3 (fig 8b): {left_loop_tangency_p3(0.053875454, 4.0):.4f}")
    for line in analytic_tangency_lines(0.78, 4.0):
        print(f"{line.label}: p3 = {line.intercept:.4f} + {line.slope:.4f} p2 on [{line.p2_min:.4f}, {line.p2_max:.4f}]")
