"""
Duffing-Van der Pol Survey - Autonomous Analysis
Limit cycles of the autonomous equation (p3 = 0) from the zeros of the
Poincare-Pontryagin generating functions, and the (p1, p2) bifurcation set
"""

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import ndimage, optimize

import config
from .elliptic_kernel import complete_E, complete_K, dE_dm, dK_dm
from .errors import DomainError, NearSeparatrixWarning, NoSolution, ProbeNotFound, TraceStall
from .unperturbed_geometry import DomainTag, h_from_rho

# Coefficient of p2 in B10 and in the loop lines L2
C_P2 = 15.0 * math.sqrt(2.0) * math.pi / 16.0

# Leading coefficient of B10 near the focus: B10 ~ (p1 +- p2 - 1) * C_FOCUS * rho^2
C_FOCUS = 30.0 * math.pi / 16.0

# Published cycle types of the upper half plane
DOMAIN_TYPES: Dict[str, Tuple[int, int, int]] = {
    "D1": (0, 0, 0),
    "D2": (0, 0, 2),
    "D3": (0, 0, 1),
    "D4": (0, 1, 1),
    "D5": (0, 0, 1),
    "D6": (1, 1, 1),
    "D7": (1, 0, 1),
    "D8": (1, 0, 2),
    "D9": (0, 0, 2),
    "D10": (0, 0, 0),
    "D11": (1, 0, 0),
    "D12": (2, 0, 0),
    "D13": (1, 0, 0),
}


def _log(msg: str) -> None:
    print(f"[AutonomousAnalysis] {msg}")


# ==================== BASIS FUNCTIONS ====================


@lru_cache(maxsize=2)
def _focus_series(order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Power-series coefficients of (P, S, Q) about rho = 0

    Summed in exact rational arithmetic, so the vanishing constant and
    linear terms of P and Q are exact zeros.

    Returns:
        (P, S, Q) coefficient arrays, lowest degree first, in units of pi/2
    """
    k = [Fraction(math.comb(2 * n, n), 4 ** n) ** 2 for n in range(order + 1)]
    e = [a / (1 - 2 * n) for n, a in enumerate(k)]
    root = [Fraction(1)]  # sqrt(1 - rho/2)
    for n in range(1, order + 1):
        root.append(root[-1] * (Fraction(1, 2) - (n - 1)) / n * Fraction(-1, 2))

    def times(poly, series):
        out = [Fraction(0)] * (order + 1)
        for i, c in enumerate(poly):
            for n in range(order + 1 - i):
                out[i + n] += c * series[n]
        return out

    # (rho - 1)(2 - rho), (2 - rho)^2, rho^2 - rho + 1
    a, b, c = [-2, 3, -1], [4, -4, 1], [1, -1, 1]
    p = [10 * x + 5 * y for x, y in zip(times(a, k), times(b, e))]
    q = [-2 * x - 4 * y for x, y in zip(times(a, k), times(c, e))]
    s = [Fraction(0), Fraction(0)] + [Fraction(15, 4) * r for r in root[: order - 1]]
    return tuple(np.array([float(x) for x in coeffs]) for coeffs in (p, s, q))


def _near_focus(rho: np.ndarray) -> np.ndarray:
    return rho < config.FOCUS_SERIES_CUTOFF


def g1_basis(rho):
    """
    B10+-(rho) = p1 * P(rho) +- p2 * S(rho) + Q(rho)

    Returns:
        (P, S, Q) evaluated at rho (scalar or array in (0, 1))
    """
    rho = np.asarray(rho, dtype=float)
    k, e = complete_K(rho), complete_E(rho)
    t = 2.0 - rho
    p = 10.0 * (rho - 1.0) * t * k + 5.0 * t * t * e
    s = C_P2 * rho * rho * np.sqrt(t)
    q = -2.0 * (rho - 1.0) * t * k - 4.0 * (rho * rho - rho + 1.0) * e
    near = _near_focus(rho)
    if np.any(near):
        cp, _, cq = _focus_series(config.FOCUS_SERIES_ORDER)
        p = np.where(near, 0.5 * math.pi * npoly.polyval(rho, cp), p)
        q = np.where(near, 0.5 * math.pi * npoly.polyval(rho, cq), q)
    return p, s, q


def g1_basis_derivative(rho):
    """d/drho of (P, S, Q)"""
    rho = np.asarray(rho, dtype=float)
    k, e = complete_K(rho), complete_E(rho)
    dk, de = dK_dm(rho), dE_dm(rho)
    t = 2.0 - rho
    dp = (
        10.0 * ((3.0 - 2.0 * rho) * k + (rho - 1.0) * t * dk)
        - 10.0 * t * e
        + 5.0 * t * t * de
    )
    ds = C_P2 * (2.0 * rho * np.sqrt(t) - rho * rho / (2.0 * np.sqrt(t)))
    dq = (
        -2.0 * ((3.0 - 2.0 * rho) * k + (rho - 1.0) * t * dk)
        - 4.0 * (2.0 * rho - 1.0) * e
        - 4.0 * (rho * rho - rho + 1.0) * de
    )
    near = _near_focus(rho)
    if np.any(near):
        cp, _, cq = _focus_series(config.FOCUS_SERIES_ORDER)
        dp = np.where(near, 0.5 * math.pi * npoly.polyval(rho, npoly.polyder(cp)), dp)
        dq = np.where(near, 0.5 * math.pi * npoly.polyval(rho, npoly.polyder(cq)), dq)
    return dp, ds, dq


def g2_basis(rho):
    """
    B20(rho) = p1 * P2(rho) + Q2(rho)

    Returns:
        (P2, Q2) at rho in (1/2, 1)
    """
    rho = np.asarray(rho, dtype=float)
    k, e = complete_K(rho), complete_E(rho)
    w = 2.0 * rho - 1.0
    p = 5.0 * (w * (1.0 - rho) * k + w * w * e)
    q = -2.0 * (rho - 1.0) * (2.0 - rho) * k - 4.0 * (rho * rho - rho + 1.0) * e
    return p, q


def g2_basis_derivative(rho):
    rho = np.asarray(rho, dtype=float)
    k, e = complete_K(rho), complete_E(rho)
    dk, de = dK_dm(rho), dE_dm(rho)
    w = 2.0 * rho - 1.0
    dp = 5.0 * ((3.0 - 4.0 * rho) * k + w * (1.0 - rho) * dk + 4.0 * w * e + w * w * de)
    dq = (
        -2.0 * ((3.0 - 2.0 * rho) * k + (rho - 1.0) * (2.0 - rho) * dk)
        - 4.0 * w * e
        - 4.0 * (rho * rho - rho + 1.0) * de
    )
    return dp, dq


def _sign_value(sign) -> float:
    if sign in ("+", 1, 1.0, "plus"):
        return 1.0
    if sign in ("-", -1, -1.0, "minus"):
        return -1.0
    raise DomainError(f"sign must be '+' or '-', got {sign!r}")


# ==================== GENERATING FUNCTIONS ====================


def B10(rho: float, p1: float, p2: float, sign="+") -> float:
    """Bracketed polynomial-elliptic part of B1+- (same zeros, no prefactor)"""
    if not (0.0 < rho < 1.0):
        raise DomainError(f"B10 needs 0 < rho < 1, got {rho}")
    p, s, q = g1_basis(rho)
    return float(p1 * p + _sign_value(sign) * p2 * s + q)


def B1(rho: float, p1: float, p2: float, sign="+") -> float:
    """
    Generating function of the loop domains G1+ / G1-

    B1 = 4 / (30 pi (2 - rho)^{5/2}) * B10, equal to
    (1/2pi) closed integral of (p1 + p2 x - x^2) y dx over the orbit

    Args:
        rho: elliptic parameter in (0, 1)
        p1, p2: dissipation parameters
        sign: '+' for the right loop, '-' for the left loop
    """
    prefactor = 4.0 / (30.0 * math.pi * (2.0 - rho) ** 2.5)
    return prefactor * B10(rho, p1, p2, sign)


def B20(rho: float, p1: float) -> float:
    if not (0.5 < rho < 1.0):
        raise DomainError(f"B20 needs 1/2 < rho < 1, got {rho}")
    p, q = g2_basis(rho)
    return float(p1 * p + q)


def B2(rho: float, p1: float, p2: float = 0.0) -> float:
    """
    Generating function of the exterior domain G2 (independent of p2)

    B2 = 8 / (30 pi (2 rho - 1)^{5/2}) * B20
    """
    prefactor = 8.0 / (30.0 * math.pi * (2.0 * rho - 1.0) ** 2.5)
    return prefactor * B20(rho, p1)


def generating_function(rho: float, p1: float, p2: float, domain: DomainTag) -> float:
    """Signed B_j with prefactor for the domain of the level"""
    domain = DomainTag(domain)
    if domain is DomainTag.G1_PLUS:
        return B1(rho, p1, p2, "+")
    if domain is DomainTag.G1_MINUS:
        return B1(rho, p1, p2, "-")
    return B2(rho, p1, p2)


# ==================== SCAN GRIDS ====================


@lru_cache(maxsize=8)
def _scan_grid(domain_inside: bool, n: int, clip: float):
    """Cached rho grid and basis values used by the sign scans"""
    if domain_inside:
        rho = np.linspace(clip, 1.0 - clip, n)
        p, s, q = g1_basis(rho)
        return rho, (p, s, q)
    rho = np.linspace(0.5 + clip, 1.0 - clip, n)
    p, q = g2_basis(rho)
    return rho, (p, q)


def _g1_values(p1, p2, sign: float, n: int, clip: float) -> Tuple[np.ndarray, np.ndarray]:
    """B10 on the scan grid for vectors of parameters, one row per parameter pair"""
    rho, (p, s, q) = _scan_grid(True, n, clip)
    p1 = np.atleast_1d(np.asarray(p1, dtype=float))[:, None]
    p2 = np.atleast_1d(np.asarray(p2, dtype=float))[:, None]
    return rho, p1 * p + sign * p2 * s + q


def _g2_values(p1, n: int, clip: float) -> Tuple[np.ndarray, np.ndarray]:
    rho, (p, q) = _scan_grid(False, n, clip)
    p1 = np.atleast_1d(np.asarray(p1, dtype=float))[:, None]
    return rho, p1 * p + q


def _sign_changes(values: np.ndarray) -> np.ndarray:
    neg = np.signbit(values)
    return np.sum(neg[:, 1:] != neg[:, :-1], axis=1)


def census_counts(p1, p2, n: int = None, clip: float = None) -> np.ndarray:
    """
    Fast cycle counts (simple roots only) for vectors of parameters

    Args:
        p1, p2: arrays of equal length (or scalars)

    Returns:
        int array of shape (N, 3) with columns (i, j, k)
    """
    n = n or config.ROOT_SCAN_POINTS
    clip = clip or config.RHO_CLIP
    p1 = np.atleast_1d(np.asarray(p1, dtype=float))
    p2 = np.atleast_1d(np.asarray(p2, dtype=float))
    p1, p2 = np.broadcast_arrays(p1, p2)

    _, right = _g1_values(p1, p2, 1.0, n, clip)
    _, left = _g1_values(p1, p2, -1.0, n, clip)
    _, outer = _g2_values(p1, n, clip)
    return np.column_stack(
        [_sign_changes(right), _sign_changes(left), _sign_changes(outer)]
    ).astype(int)


# ==================== CYCLE CENSUS ====================


@dataclass(frozen=True)
class LimitCycle:
    """One root of a generating function"""

    domain: DomainTag
    rho: float
    h: float
    multiplicity: int
    stable: Optional[bool]


@dataclass(frozen=True)
class CycleCensus:
    """(i, j, k): cycles in the right loop, left loop and outside the figure-eight"""

    i: int
    j: int
    k: int
    cycles: Tuple[LimitCycle, ...] = field(default_factory=tuple)

    @property
    def type(self) -> Tuple[int, int, int]:
        return (self.i, self.j, self.k)

    def mirrored(self) -> "CycleCensus":
        swap = {
            DomainTag.G1_PLUS: DomainTag.G1_MINUS,
            DomainTag.G1_MINUS: DomainTag.G1_PLUS,
            DomainTag.G2: DomainTag.G2,
        }
        cycles = tuple(
            LimitCycle(swap[c.domain], c.rho, c.h, c.multiplicity, c.stable)
            for c in self.cycles
        )
        return CycleCensus(self.j, self.i, self.k, cycles)


def _stability(domain: DomainTag, slope: float) -> bool:
    """Stable iff dB/dh < 0; rho grows with h in G1 and shrinks with h in G2"""
    if domain is DomainTag.G2:
        return slope > 0.0
    return slope < 0.0


def _roots_on_grid(
    func, rho: np.ndarray, values: np.ndarray, domain: DomainTag, scale: float
) -> List[LimitCycle]:
    """Simple roots from sign changes, double roots from grazing extrema"""
    cycles: List[LimitCycle] = []
    neg = np.signbit(values)

    for idx in np.nonzero(neg[1:] != neg[:-1])[0]:
        a, b = rho[idx], rho[idx + 1]
        if np.signbit(func(a)) == np.signbit(func(b)):
            # the scan and the scalar evaluation disagree on the sign: no bracket
            if config.DEBUG:
                _log(f"{domain.value}: dropped unbracketed sign change in [{a:.3g}, {b:.3g}]")
            continue
        root = optimize.brentq(func, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        slope = _derivative(func, root, rho[1] - rho[0])
        cycles.append(
            LimitCycle(domain, float(root), h_from_rho(root, domain), 1, _stability(domain, slope))
        )

    # grazing extrema without a sign change
    diffs = np.diff(values)
    for idx in np.nonzero(diffs[:-1] * diffs[1:] < 0.0)[0] + 1:
        if neg[idx - 1] != neg[idx] or neg[idx] != neg[idx + 1]:
            continue
        if abs(values[idx]) > 1e3 * config.DOUBLE_ROOT_TOL * scale:
            continue
        res = optimize.minimize_scalar(
            lambda r: abs(func(r)),
            bounds=(rho[idx - 1], rho[idx + 1]),
            method="bounded",
            options={"xatol": 1e-13},
        )
        if abs(func(res.x)) < config.DOUBLE_ROOT_TOL * scale:
            cycles.append(LimitCycle(domain, float(res.x), h_from_rho(res.x, domain), 2, None))

    return cycles


def _derivative(func, x: float, grid_step: float) -> float:
    step = min(1e-6, 0.25 * grid_step, 0.5 * x, 0.5 * (1.0 - x))
    return (func(x + step) - func(x - step)) / (2.0 * step)


def _tail_root(func, rho_last: float, domain: DomainTag) -> Optional[LimitCycle]:
    """Root hidden between the clipped grid end and the separatrix"""
    end = 1.0 - 1e-15
    f_last, f_end = func(rho_last), func(end)
    if np.signbit(f_last) == np.signbit(f_end):
        return None
    root = optimize.brentq(func, rho_last, end, xtol=1e-16)
    slope = _derivative(func, root, 1.0 - root)
    return LimitCycle(domain, float(root), h_from_rho(root, domain), 1, _stability(domain, slope))


def find_cycles(p1: float, p2: float, n: int = None, clip: float = None) -> CycleCensus:
    """
    Census of limit cycles of the autonomous equation

    Args:
        p1, p2: dissipation parameters
        n: scan resolution per generating function (default config.ROOT_SCAN_POINTS)
        clip: distance of the scan grid from the rho endpoints

    Returns:
        CycleCensus with every simple and double root
    """
    n = n or config.ROOT_SCAN_POINTS
    clip = clip or config.RHO_CLIP
    found: List[LimitCycle] = []

    for sign, domain in ((1.0, DomainTag.G1_PLUS), (-1.0, DomainTag.G1_MINUS)):
        rho, values = _g1_values(p1, p2, sign, n, clip)
        # B10 / rho^2: same zeros, no near-zero extremum at the focus
        func = lambda r, s=sign: B10(r, p1, p2, s) / (r * r)
        scale = abs(p1) + abs(p2) + 1.0
        roots = _roots_on_grid(func, rho, values[0] / (rho * rho), domain, 10.0 * scale)
        tail = _tail_root(func, rho[-1], domain)
        if tail is not None:
            roots.append(tail)
        found.extend(sorted(roots, key=lambda c: c.rho))

    rho, values = _g2_values(p1, n, clip)
    func2 = lambda r: B20(r, p1)
    roots = _roots_on_grid(func2, rho, values[0], DomainTag.G2, 10.0 * (abs(p1) + 1.0))
    tail = _tail_root(func2, rho[-1], DomainTag.G2)
    if tail is not None:
        roots.append(tail)
    found.extend(sorted(roots, key=lambda c: c.rho))

    near = [c for c in found if c.rho > config.NEAR_SEPARATRIX_RHO]
    if near:
        warnings.warn(
            f"{len(near)} cycle(s) within 1e-4 of the separatrix at p1={p1}, p2={p2}",
            NearSeparatrixWarning,
            stacklevel=2,
        )

    counts = {tag: sum(1 for c in found if c.domain is tag) for tag in DomainTag}
    census = CycleCensus(
        counts[DomainTag.G1_PLUS], counts[DomainTag.G1_MINUS], counts[DomainTag.G2], tuple(found)
    )
    if config.DEBUG:
        _log(f"census({p1:.6g}, {p2:.6g}) = {census.type}")
    return census


def census_plane(p1_values: Sequence[float], p2_values: Sequence[float]) -> np.ndarray:
    """
    Cycle types on a (p1, p2) grid

    Returns:
        int array (len(p1_values), len(p2_values), 3)
    """
    p1_values = np.asarray(p1_values, dtype=float)
    p2_values = np.asarray(p2_values, dtype=float)
    out = np.empty((p1_values.size, p2_values.size, 3), dtype=int)
    for row, p1 in enumerate(p1_values):
        out[row] = census_counts(np.full_like(p2_values, p1), p2_values)
    return out


# ==================== BIFURCATION SET ====================


@dataclass
class BifurcationLine:
    """
    Analytic line a*p1 + b*p2 + c = 0 or a traced polyline in (p1, p2)
    """

    name: str
    coefficients: Optional[Tuple[float, float, float]] = None
    points: Optional[np.ndarray] = None

    @property
    def analytic(self) -> bool:
        return self.coefficients is not None

    def residual(self, p1: float, p2: float) -> float:
        a, b, c = self.coefficients
        return a * p1 + b * p2 + c

    def sample(self, p1_range: Tuple[float, float], p2_range: Tuple[float, float], n: int = 200):
        """Points of the line clipped to the box (for overlays)"""
        if not self.analytic:
            return self.points
        a, b, c = self.coefficients
        if abs(b) < 1e-15:
            p2 = np.linspace(p2_range[0], p2_range[1], n)
            return np.column_stack([np.full(n, -c / a), p2])
        p1 = np.linspace(p1_range[0], p1_range[1], n)
        p2 = -(a * p1 + c) / b
        keep = (p2 >= p2_range[0]) & (p2 <= p2_range[1])
        return np.column_stack([p1[keep], p2[keep]])


def _double_cycle_point(rho: float, sign: float = 1.0) -> Tuple[float, float]:
    p, s, q = g1_basis(rho)
    dp, ds, dq = g1_basis_derivative(rho)
    s, ds = sign * s, sign * ds
    det = p * ds - s * dp
    if not np.isfinite(det) or abs(det) < 1e-300:
        raise TraceStall(f"double-cycle system singular at rho={rho}")
    p1 = (s * dq - q * ds) / det
    p2 = (q * dp - p * dq) / det
    return float(p1), float(p2)


def double_cycle_curve(n: int = 400, sign="+", rho_range: Tuple[float, float] = (1e-3, 1.0 - 1e-9)):
    """
    Double-cycle line of G1: B10 = 0 and dB10/drho = 0, solved for (p1, p2) at each rho

    Returns:
        array of rows (rho, p1, p2)
    """
    sgn = _sign_value(sign)
    rhos = np.linspace(rho_range[0], rho_range[1], n)
    rows = []
    for rho in rhos:
        p1, p2 = _double_cycle_point(rho, sgn)
        rows.append((rho, p1, p2))
    return np.array(rows)


def double_cycle_endpoints(sign="+"):
    """
    Endpoints of the double-cycle line

    rho -> 0: B10 / rho^2 and its slope vanish together. The rho^3 coefficients
    are -1/4 of the rho^2 ones, so the point A on L1 is fixed by the rho^2 and
    rho^4 coefficients of the focus series.
    rho -> 1: exact limit; the logarithmically divergent part of dB10/drho
    is proportional to p1, so the curve ends at p1 = 0 on L2.

    Returns:
        dict with 'focus' and 'separatrix' (p1, p2) pairs
    """
    sgn = _sign_value(sign)
    cp, cs, cq = _focus_series(config.FOCUS_SERIES_ORDER)
    matrix = np.array([[cp[2], sgn * cs[2]], [cp[4], sgn * cs[4]]])
    focus = np.linalg.solve(matrix, -np.array([cq[2], cq[4]]))
    separatrix = (0.0, sgn * 4.0 / C_P2)
    return {"focus": (float(focus[0]), float(focus[1])), "separatrix": separatrix}


def double_cycle_p1(p2: float, sign="+", n: int = 200) -> float:
    """
    p1 where the double-cycle line of G1 crosses the given p2

    Raises:
        NoSolution: p2 outside the span of the line
    """
    sgn = _sign_value(sign)
    ends = double_cycle_endpoints(sign)
    rhos = np.linspace(1e-3, 1.0 - 1e-9, n)
    offsets = np.array([_double_cycle_point(r, sgn)[1] for r in rhos]) - p2
    flips = np.nonzero(np.signbit(offsets[1:]) != np.signbit(offsets[:-1]))[0]
    if flips.size == 0:
        span = sorted((ends["focus"][1], ends["separatrix"][1]))
        raise NoSolution(f"p2={p2} outside the double-cycle line span {span}")
    idx = int(flips[0])
    rho = optimize.brentq(
        lambda r: _double_cycle_point(r, sgn)[1] - p2, rhos[idx], rhos[idx + 1], xtol=1e-14
    )
    return _double_cycle_point(rho, sgn)[0]


def l3_value(n: int = None) -> Tuple[float, float]:
    """
    Double-cycle value of the exterior generating function

    B20 = P2 * (p1 - p1(rho)) with p1(rho) = -Q2/P2; its minimum on (1/2, 1)
    is where B20 and dB20/drho vanish together.

    Returns:
        (p1*, rho*)
    """
    n = n or config.ROOT_SCAN_POINTS
    rho, (p, q) = _scan_grid(False, n, 1e-4)
    curve = -q / p
    idx = int(np.argmin(curve))
    lo, hi = rho[max(idx - 1, 0)], rho[min(idx + 1, rho.size - 1)]

    def p1_of_rho(r):
        pp, qq = g2_basis(r)
        return float(-qq / pp)

    res = optimize.minimize_scalar(p1_of_rho, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return float(res.fun), float(res.x)


def bifurcation_lines(
    p1_range: Tuple[float, float] = None,
    include_big_loop: bool = False,
    epsilon: float = None,
    n: int = 400,
) -> List[BifurcationLine]:
    """
    Bifurcation set of the autonomous equation on the (p1, p2) plane

    Args:
        p1_range: p1 interval for the traced big-loop line
        include_big_loop: also trace L4 numerically (slow)
        epsilon: perturbation size used for L4

    Returns:
        list of BifurcationLine (L1+, L1-, L2+, L2-, L3, DoubleCycleG1+, DoubleCycleG1-, [L4])
    """
    p1_star, _ = l3_value()
    lines = [
        BifurcationLine("L1+", (1.0, 1.0, -1.0)),
        BifurcationLine("L1-", (1.0, -1.0, -1.0)),
        BifurcationLine("L2+", (5.0, C_P2, -4.0)),
        BifurcationLine("L2-", (5.0, -C_P2, -4.0)),
        BifurcationLine("L3", (1.0, 0.0, -p1_star)),
    ]
    for sign, name in (("+", "DoubleCycleG1+"), ("-", "DoubleCycleG1-")):
        curve = double_cycle_curve(n, sign)
        lines.append(BifurcationLine(name, points=curve[:, 1:]))

    if include_big_loop:
        lines.append(BifurcationLine("L4", points=big_loop_line(p1_range, epsilon)))
    return lines


def big_loop_line(p1_range: Tuple[float, float] = None, epsilon: float = None, n: int = 9) -> np.ndarray:
    """L4 traced by bisecting the big-loop defect of the autonomous flow"""
    from .flow_engine import scan_connections

    p1_range = p1_range or (0.76, 0.84)
    points = []
    for p1 in np.linspace(p1_range[0], p1_range[1], n):
        for p2 in scan_connections(p1, (0.0, 3.0), kind="BIG_LOOP", epsilon=epsilon):
            points.append((p1, p2))
    return np.array(points).reshape(-1, 2)


# ==================== DOMAIN PROBES ====================


def _lens_point(n: int = 60) -> Tuple[float, float]:
    """Midpoint of the widest cross-section of the two-cycle lens of G1+"""
    ends = double_cycle_endpoints("+")
    lo_p2, hi_p2 = ends["separatrix"][1], ends["focus"][1]
    curve = double_cycle_curve()
    order = np.argsort(curve[:, 2])
    p2s = np.linspace(lo_p2, hi_p2, n + 2)[1:-1]
    inner = np.interp(p2s, curve[order, 2], curve[order, 1])
    outer = np.minimum(1.0 - p2s, (4.0 - C_P2 * p2s) / 5.0)
    p2 = float(p2s[int(np.argmax(outer - inner))])
    left = double_cycle_p1(p2, "+")
    right = min(1.0 - p2, (4.0 - C_P2 * p2) / 5.0)
    return 0.5 * (left + right), p2


def domain_masks(p1_values: np.ndarray, p2_values: np.ndarray) -> Dict[str, np.ndarray]:
    """
    Published domains D1..D13 (except the lens D12) as boolean grids

    Each domain is a set of strict sides of L1+-, L2+-, L3, the line p1 = 4/5
    where the exterior cycle meets the figure-eight, and the double-cycle line.
    Pairs of equal type are told apart by these sides, not by connectivity.
    """
    p1, p2 = np.meshgrid(np.asarray(p1_values, float), np.asarray(p2_values, float), indexing="ij")
    p1_star, _ = l3_value()
    l2_right, l1_right = (4.0 - C_P2 * p2) / 5.0, 1.0 - p2
    l2_left, l1_left = (4.0 + C_P2 * p2) / 5.0, 1.0 + p2
    lo, hi = np.minimum(l2_right, l1_right), np.maximum(l2_right, l1_right)
    crossing = 1.0 / (5.0 - C_P2)

    curve = double_cycle_curve()
    order = np.argsort(curve[:, 2])
    dc_p1 = np.interp(p2, curve[order, 2], curve[order, 1], left=np.inf, right=np.inf)
    lens = (p1 > dc_p1) & (p1 < lo)

    outer0 = p1 < p1_star
    outer2 = (p1 > p1_star) & (p1 < 0.8)
    outer1 = p1 > 0.8
    right_cycle = (p1 > lo) & (p1 < hi)
    upper = p2 > 0.0
    masks = {
        "D1": outer0 & (p1 > hi),
        "D2": outer2 & (p1 > hi),
        "D3": outer1 & (p1 < l2_left) & (p1 > l1_right),
        "D4": (p1 > l2_left) & (p1 < l1_left) & (p1 > l1_right),
        "D5": p1 > l1_left,
        "D6": (p1 > l2_left) & (p1 < l1_left) & (p1 < l1_right),
        "D7": outer1 & (p1 < l2_left) & (p1 < l1_right),
        "D8": outer2 & right_cycle,
        "D9": outer2 & (p1 < lo),
        "D10": outer0 & (p1 < lo) & ~lens,
        "D11": outer0 & right_cycle & (p2 < crossing),
        "D13": outer0 & right_cycle & (p2 > crossing),
    }
    return {name: mask & upper for name, mask in masks.items()}


def locate_domain_samples(
    p1_range: Tuple[float, float] = None,
    p2_range: Tuple[float, float] = None,
    resolution: Tuple[int, int] = None,
) -> Dict[str, Tuple[float, float]]:
    """
    One certified probe point per published domain D1..D13

    The probe is the grid cell deepest inside the analytic domain; the lens
    D12, narrower than any census grid, is probed at its widest cross-section.
    Every probe is re-verified against the cycle census.

    Returns:
        {'D1': (p1, p2), ...}

    Raises:
        ProbeNotFound: a domain misses the grid or its probe has the wrong census
    """
    p1_range = p1_range or config.CENSUS_P1_RANGE
    p2_range = p2_range or config.CENSUS_P2_RANGE
    resolution = resolution or config.CENSUS_RESOLUTION

    p1_values = np.linspace(p1_range[0], p1_range[1], resolution[0])
    p2_values = np.linspace(p2_range[0], p2_range[1], resolution[1])
    spacing = (
        (p1_values[1] - p1_values[0]) if p1_values.size > 1 else 1.0,
        (p2_values[1] - p2_values[0]) if p2_values.size > 1 else 1.0,
    )

    points: Dict[str, Tuple[float, float]] = {"D12": _lens_point()}
    for name, mask in domain_masks(p1_values, p2_values).items():
        if not np.any(mask):
            raise ProbeNotFound(f"{name}: no grid cell inside the domain")
        depth = ndimage.distance_transform_edt(np.pad(mask, 1), sampling=spacing)[1:-1, 1:-1]
        row, col = np.unravel_index(int(np.argmax(depth)), depth.shape)
        points[name] = (float(p1_values[row]), float(p2_values[col]))

    probes: Dict[str, Tuple[float, float]] = {}
    for name in sorted(points, key=lambda d: int(d[1:])):
        point = points[name]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearSeparatrixWarning)
            census = find_cycles(*point)
        if census.type != DOMAIN_TYPES[name]:
            raise ProbeNotFound(f"{name}: probe {point} has census {census.type}, expected {DOMAIN_TYPES[name]}")
        probes[name] = point
        if config.DEBUG:
            _log(f"{name} {census.type} probe at p1={point[0]:.4f}, p2={point[1]:.4f}")
    return probes


# ==================== TESTING ====================

if __name__ == "__main__":
    p1_star, rho_star = l3_value()
    print(f"L3: p1* = {p1_star:.6f} at rho = {rho_star:.6f}")
    ends = double_cycle_endpoints()
    print(f"A+ = {ends['focus']}, As+ = {ends['separatrix']}")
    print(f"census(-2, 0) = {find_cycles(-2.0, 0.0).type}")
