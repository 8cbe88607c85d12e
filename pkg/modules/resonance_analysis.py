"""
Duffing-Van der Pol Survey - Resonance Analysis
Resonance levels, the averaged pendulum model and the classification of
resonance zones as passable, partially passable or impassable
"""

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from multiprocessing import Pool
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

import config
from .autonomous_analysis import C_P2, double_cycle_p1, find_cycles, generating_function
from .elliptic_kernel import complete_E, complete_K, nome_ratio
from .errors import (
    DegenerateCase,
    DomainError,
    NearSeparatrixWarning,
    NoResonance,
    NoSolution,
    QuadratureFailure,
)
from .parameters import Params
from .unperturbed_geometry import (
    DomainTag,
    EnergyLevel,
    frequency,
    frequency_of_rho,
    level_from_rho,
    orbit_arrays,
    orbit_average,
)


def _log(msg: str) -> None:
    print(f"[ResonanceAnalysis] {msg}")


class ZoneClass(str, Enum):
    PASSABLE = "PASSABLE"
    PARTIALLY_PASSABLE = "PARTIALLY_PASSABLE"
    IMPASSABLE = "IMPASSABLE"

    @property
    def splittable(self) -> bool:
        return self is not ZoneClass.PASSABLE


@dataclass(frozen=True)
class ResonancePair:
    """omega(I_pq) = (q/p) p4 with p, q coprime"""

    p: int
    q: int = 1

    def __post_init__(self):
        if int(self.p) != self.p or int(self.q) != self.q or self.p < 1 or self.q < 1:
            raise DomainError(f"p, q must be positive integers, got ({self.p}, {self.q})")
        if math.gcd(int(self.p), int(self.q)) != 1:
            raise DomainError(f"p={self.p} and q={self.q} are not coprime")

    @property
    def ratio(self) -> float:
        return self.q / self.p


@dataclass(frozen=True)
class ResonanceZone:
    """
    Coefficients of the averaged pendulum at one resonance level

    b is the closed-form frequency slope d omega / dh, which is
    (d omega / dI) / omega. sigma is the closed-form damping p1 - <x^2>;
    sigma_quadrature is the orbit average of p1 + p2 x - x^2 (they differ
    by p2 <x> inside a loop).
    The second derivative d^2 omega / 2 dI^2 (curvature_b1) enters only at
    higher order and is not computed.
    """

    pair: ResonancePair
    level: EnergyLevel
    b: float
    sigma: float
    sigma_quadrature: float
    amplitude_A: float
    B_value: float
    p4: float
    classification: Optional[ZoneClass] = None

    @property
    def cos_term(self) -> bool:
        return has_cos_term(self.pair, self.level.domain)


@dataclass(frozen=True)
class PendulumModel:
    """v'' - b (p3 A cos(p v) + B) = mu sigma v'"""

    b: float
    A: float
    B: float
    sigma: float
    p: int
    mu: float
    p3: float = 1.0

    @property
    def forcing(self) -> float:
        return self.p3 * self.A

    @property
    def trusted(self) -> bool:
        return self.mu <= config.PENDULUM_MU_MAX

    @property
    def has_equilibria(self) -> bool:
        return abs(self.B) < abs(self.forcing)

    def rhs(self, tau, state):
        v, u = state
        return [u, self.b * (self.forcing * np.cos(self.p * v) + self.B) + self.mu * self.sigma * u]

    def equilibria(self) -> np.ndarray:
        """Equilibria v in [0, 2pi)"""
        if not self.has_equilibria:
            return np.array([])
        base = math.acos(-self.B / self.forcing)
        points = []
        for k in range(self.p):
            for angle in (base, 2.0 * math.pi - base):
                points.append(((angle + 2.0 * math.pi * k) / self.p) % (2.0 * math.pi))
        return np.unique(np.round(np.array(points), 14))


# ==================== RESONANCE LEVELS ====================


def resonance_level(pair: ResonancePair, p4: float, domain: DomainTag) -> EnergyLevel:
    """
    Level where omega = (q/p) p4

    Args:
        pair: ResonancePair
        p4: forcing frequency
        domain: DomainTag

    Returns:
        EnergyLevel

    Raises:
        NoResonance: target outside the frequency range of the domain
    """
    domain = DomainTag(domain)
    target = pair.ratio * p4
    if target <= 0.0:
        raise NoResonance(f"target frequency {target} must be positive")
    if domain.inside_loop and target >= math.sqrt(2.0):
        raise NoResonance(f"target frequency {target} >= sqrt(2) in {domain.value}")

    lo = config.RHO_CLIP if domain.inside_loop else 0.5 + 1e-12
    hi = 1.0 - 1e-15
    func = lambda r: frequency_of_rho(r, domain) - target
    if func(lo) < 0.0 or func(hi) > 0.0:
        raise NoResonance(f"target frequency {target} not attained in {domain.value}")

    rho = optimize.brentq(func, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    level = level_from_rho(rho, domain)
    if abs(frequency(level) - target) > config.RESONANCE_OMEGA_TOL:
        raise NoResonance(f"frequency inversion stalled at rho={rho}")
    if config.DEBUG:
        _log(f"{domain.value} ({pair.p},{pair.q}) p4={p4}: rho={rho:.12f}")
    return level


def has_cos_term(pair: ResonancePair, domain: DomainTag) -> bool:
    """q = 1 in the loops; q = 1 and odd p outside the figure-eight"""
    if pair.q != 1:
        return False
    return DomainTag(domain).inside_loop or pair.p % 2 == 1


# ==================== CLOSED-FORM COEFFICIENTS ====================


def coefficients_case1(level: EnergyLevel, p1: float, p: int, p4: float) -> Tuple[float, float, float]:
    """
    Averaged coefficients inside a loop (G1+ or G1-)

    Returns:
        (b1, sigma1, A1)
    """
    if not level.domain.inside_loop:
        raise DomainError(f"case 1 needs a G1 level, got {level.domain.value}")
    rho = level.rho
    k, e = complete_K(rho), complete_E(rho)
    b1 = (
        0.5 * math.pi * (2.0 - rho) ** 1.5 * (2.0 * (1.0 - rho) * k - (2.0 - rho) * e)
        / (rho * rho * (1.0 - rho) * k * k)
    )
    sigma1 = p1 - 2.0 * e / ((2.0 - rho) * k)
    a = nome_ratio(rho)
    A1 = -math.sqrt(2.0) * p4 * a ** p / (1.0 + a ** (2 * p))
    return b1, sigma1, A1


def coefficients_case2(level: EnergyLevel, p1: float, p: int, p4: float) -> Tuple[float, float, float]:
    """
    Averaged coefficients outside the figure-eight (G2)

    Returns:
        (b2, sigma2, A2)
    """
    if level.domain is not DomainTag.G2:
        raise DomainError(f"case 2 needs a G2 level, got {level.domain.value}")
    rho = level.rho
    k, e = complete_K(rho), complete_E(rho)
    w = 2.0 * rho - 1.0
    b2 = 0.25 * math.pi * w ** 1.5 * ((1.0 - rho) * k + w * e) / (rho * (1.0 - rho) * k * k)
    sigma2 = p1 - 2.0 * (e + (rho - 1.0) * k) / (w * k)
    a = nome_ratio(rho)
    A2 = -2.0 * math.sqrt(2.0) * p4 * a ** (p / 2.0) / (1.0 + a ** p)
    return b2, sigma2, A2


def coefficients(level: EnergyLevel, p1: float, p: int, p4: float) -> Tuple[float, float, float]:
    if level.domain.inside_loop:
        return coefficients_case1(level, p1, p, p4)
    return coefficients_case2(level, p1, p, p4)


def sigma_quadrature(level: EnergyLevel, p1: float, p2: float) -> float:
    """Orbit average of p1 + p2 x - x^2"""
    return orbit_average(level, (p1, p2, -1.0))


# ==================== AVERAGED FORCING ====================


def A0_numeric(level: EnergyLevel, pair: ResonancePair, v, params: Params, samples: int = None):
    """
    Averaged right-hand side of the action equation

    A0(v) = (1/2pi p) int_0^{2pi p} [(p1 + p2 x - x^2) y + p3 sin(phi)] dx/dtheta dphi
    with theta = v + q phi / p, evaluated with the periodic trapezoid rule.

    Args:
        level: resonance level
        pair: ResonancePair
        v: slow phase (scalar or array)
        params: Params (p1, p2, p3 used)
        samples: nodes per 2pi of phi (default config.A0_SAMPLES_PER_P)

    Returns:
        A0 with the shape of v
    """
    samples = samples or config.A0_SAMPLES_PER_P
    n = samples * pair.p
    phi = 2.0 * math.pi * pair.p * np.arange(n) / n
    omega = frequency(level)

    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    theta = v_arr[:, None] + pair.q * phi[None, :] / pair.p
    x, y = orbit_arrays(level, theta / omega)
    g = params.p1 + params.p2 * x - x * x
    integrand = (g * y + params.p3 * np.sin(phi)[None, :]) * y / omega
    values = integrand.mean(axis=1)
    if not np.all(np.isfinite(values)):
        raise QuadratureFailure("non-finite averaged forcing")
    return float(values[0]) if np.ndim(v) == 0 else values.reshape(np.shape(v))


def fourier_amplitude(level: EnergyLevel, pair: ResonancePair, params: Params, nodes: int = 16):
    """
    (B, A) from A0_numeric by projection onto 1 and cos(p v)

    A is returned per unit p3. In G1- the orbit origin sits at the left
    turning point, so A comes out with the opposite sign of A1.
    """
    p3 = params.p3 if params.p3 != 0.0 else 1.0
    forced = replace(params, p3=p3)
    v = 2.0 * math.pi * np.arange(nodes) / (nodes * pair.p)
    values = A0_numeric(level, pair, v, forced)
    B = float(values.mean())
    A = float(2.0 * np.mean((values - B) * np.cos(pair.p * v))) / p3
    return B, A


# ==================== ZONES ====================


def resonance_zone(pair: ResonancePair, params: Params, domain: DomainTag, classify_zone: bool = True) -> ResonanceZone:
    """Resonance level with its pendulum coefficients (optionally classified)"""
    domain = DomainTag(domain)
    level = resonance_level(pair, params.p4, domain)
    b, sigma, A = coefficients(level, params.p1, pair.p, params.p4)
    if not has_cos_term(pair, domain):
        A = 0.0
    zone = ResonanceZone(
        pair=pair,
        level=level,
        b=b,
        sigma=sigma,
        sigma_quadrature=sigma_quadrature(level, params.p1, params.p2),
        amplitude_A=A,
        B_value=generating_function(level.rho, params.p1, params.p2, domain),
        p4=params.p4,
    )
    if classify_zone:
        zone = replace(zone, classification=classify(zone, params.p3, params.epsilon or None))
    return zone


def classify(zone: ResonanceZone, p3: float, epsilon: Optional[float] = None) -> ZoneClass:
    """
    Passability of a resonance zone

    A0 = p3 A cos(p v) + B. Equilibria (splittable level) exist iff |B| < |p3 A|.
    A splittable level is impassable when B = 0; with epsilon given, B counts as
    zero while |B / (p3 A)| stays below the loop threshold of the scaled
    pendulum, otherwise an absolute test with config.B_ZERO_TOL is used.

    Raises:
        DegenerateCase: no cos term and B = 0
    """
    forcing = abs(p3 * zone.amplitude_A)
    B = abs(zone.B_value)

    if forcing == 0.0:
        if B <= config.B_ZERO_TOL:
            raise DegenerateCase(
                f"A0 vanishes identically at rho={zone.level.rho} ({zone.pair.p},{zone.pair.q})"
            )
        return ZoneClass.PASSABLE

    if B >= forcing:
        return ZoneClass.PASSABLE

    if epsilon is None:
        return ZoneClass.IMPASSABLE if B <= config.B_ZERO_TOL else ZoneClass.PARTIALLY_PASSABLE

    beta = B / forcing
    alpha = math.sqrt(epsilon) * abs(zone.sigma) / math.sqrt(zone.pair.p * abs(zone.b) * forcing)
    if config.DEBUG:
        _log(f"classify p={zone.pair.p}: beta={beta:.6g}, alpha={alpha:.6g}")
    return ZoneClass.IMPASSABLE if beta < loop_threshold(alpha) else ZoneClass.PARTIALLY_PASSABLE


# ==================== PENDULUM MODEL ====================


def _separatrix_rotates(alpha: float, beta: float) -> bool:
    """Does the forward unstable separatrix of w'' = cos w + beta - alpha w' reach the next saddle?"""
    w_center = math.acos(-beta)
    w_saddle = -w_center
    kappa = math.sqrt(max(1.0 - beta * beta, 0.0))
    lam = 0.5 * (-alpha + math.sqrt(alpha * alpha + 4.0 * kappa))
    d = 1e-8

    def rhs(t, s):
        return [s[1], math.cos(s[0]) + beta - alpha * s[1]]

    def falls_back(t, s):
        return s[1]

    falls_back.terminal = True
    falls_back.direction = -1

    def next_saddle(t, s):
        return s[0] - (w_saddle + 2.0 * math.pi)

    next_saddle.terminal = True
    next_saddle.direction = 1

    t_end = 200.0 / max(lam, 1e-3) + 200.0
    sol = integrate.solve_ivp(
        rhs,
        (0.0, t_end),
        np.array([w_saddle + d, lam * d]),
        method="DOP853",
        rtol=1e-10,
        atol=1e-12,
        events=(falls_back, next_saddle),
    )
    return len(sol.t_events[1]) > 0


@lru_cache(maxsize=512)
def _loop_threshold(alpha: float, tol: float) -> float:
    lo, hi = 0.0, 1.0 - 1e-9
    if not _separatrix_rotates(alpha, hi):
        return 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _separatrix_rotates(alpha, mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def loop_threshold(alpha: float, tol: float = 1e-8) -> float:
    """
    Critical tilt beta_c(alpha) of w'' = cos w + beta - alpha w'

    For beta below beta_c every separatrix falls back and no rotating limit
    cycle encloses the cylinder; at beta_c the unstable separatrix closes a
    loop around it. Small alpha gives beta_c ~ 4 alpha / pi.
    """
    alpha = abs(float(alpha))
    if alpha == 0.0:
        return 0.0
    return _loop_threshold(round(alpha, 12), tol)


def pendulum_model(zone: ResonanceZone, p3: float, epsilon: float) -> PendulumModel:
    if epsilon < 0.0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    return PendulumModel(
        b=zone.b,
        A=zone.amplitude_A,
        B=zone.B_value,
        sigma=zone.sigma,
        p=zone.pair.p,
        mu=math.sqrt(epsilon),
        p3=p3,
    )


def simulate_pendulum(model: PendulumModel, v0: float, u0: float, tau_end: float, n: int = 400) -> np.ndarray:
    """
    Trajectory of the averaged model

    Returns:
        rows (tau, v, dv/dtau)
    """
    taus = np.linspace(0.0, tau_end, n)
    sol = integrate.solve_ivp(
        model.rhs,
        (0.0, tau_end),
        np.array([v0, u0], dtype=float),
        method="DOP853",
        t_eval=taus,
        rtol=config.RTOL_SWEEP,
        atol=config.ATOL_SWEEP,
    )
    return np.column_stack([sol.t, sol.y[0], sol.y[1]])


def pendulum_portrait(model: PendulumModel, n_v: int = 6, n_u: int = 5, tau_end: float = 40.0, n: int = 400):
    """
    Sampled trajectories on a seed grid over one period in v

    Returns:
        list of (seed_index, trajectory rows)
    """
    scale = math.sqrt(abs(model.b) * (abs(model.forcing) + abs(model.B))) or 1.0
    period = 2.0 * math.pi / model.p
    portraits = []
    index = 0
    for v0 in np.linspace(0.0, period, n_v, endpoint=False):
        for u0 in np.linspace(-2.5, 2.5, n_u) * scale:
            portraits.append((index, simulate_pendulum(model, v0, u0, tau_end, n)))
            index += 1
    return portraits


def detect_rotation(model: PendulumModel, tau_end: float = 200.0) -> bool:
    """
    True when a long run settles on an orbit running around the cylinder

    The run goes in the direction of time in which mu * sigma damps.
    """
    scale = math.sqrt(abs(model.b) * (abs(model.forcing) + abs(model.B))) or 1.0
    direction = -1.0 if model.mu * model.sigma > 0.0 else 1.0
    kick = 3.0 * scale * (1.0 if model.b * model.B >= 0.0 else -1.0) * direction
    traj = simulate_pendulum(model, 0.0, kick, direction * tau_end, 2000)
    tail = traj[traj.shape[0] // 2 :, 2]
    advance = abs(traj[-1, 1] - traj[traj.shape[0] // 2, 1])
    return bool(np.all(tail > 0.0) or np.all(tail < 0.0)) and advance > 2.0 * 2.0 * math.pi / model.p


# ==================== CENSUS OF SPLITTABLE LEVELS ====================


def splittable_census(params: Params, domain: DomainTag, p_max: int = None) -> List[ResonanceZone]:
    """q = 1 resonance levels up to p_max whose zone is split"""
    p_max = p_max or config.RESONANCE_P_MAX
    zones = []
    for p in range(1, p_max + 1):
        try:
            zone = resonance_zone(ResonancePair(p, 1), params, domain)
        except NoResonance:
            continue
        if zone.classification.splittable:
            zones.append(zone)
    return zones


def amplitude_ratio(level: EnergyLevel, p: int, p4: float) -> float:
    """|A(p+1) / A(p)| at a fixed level (tends to the nome a)"""
    _, _, a_p = coefficients(level, 0.0, p, p4)
    _, _, a_next = coefficients(level, 0.0, p + 1, p4)
    return abs(a_next / a_p)


def _zone_task(args):
    pair, params, domain = args
    try:
        return resonance_zone(pair, params, domain)
    except (NoResonance, DegenerateCase) as exc:
        return exc


def enumerate_zones(
    params: Params,
    domains: Iterable[DomainTag] = tuple(DomainTag),
    p_max: int = None,
    q_max: int = 1,
    workers: int = 1,
) -> List[ResonanceZone]:
    """
    All resonance zones with p <= p_max and q <= q_max in the given domains

    Pairs without a resonance level are skipped. With workers > 1 the pairs
    are mapped over a process pool; the result order does not depend on it.
    """
    p_max = p_max or config.RESONANCE_P_MAX
    tasks = [
        (ResonancePair(p, q), params, DomainTag(domain))
        for domain in domains
        for p in range(1, p_max + 1)
        for q in range(1, q_max + 1)
        if math.gcd(p, q) == 1
    ]
    if workers > 1:
        with Pool(workers) as pool:
            results = pool.map(_zone_task, tasks)
    else:
        results = [_zone_task(task) for task in tasks]

    zones = [r for r in results if isinstance(r, ResonanceZone)]
    if config.DEBUG:
        _log(f"{len(zones)} zone(s) out of {len(tasks)} pair(s)")
    return zones


# ==================== CYCLE-RESONANCE ALIGNMENT ====================


def _loop_roots(p1: float, p2: float) -> Sequence[float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearSeparatrixWarning)
        census = find_cycles(p1, p2)
    return [c.rho for c in census.cycles if c.domain is DomainTag.G1_PLUS and c.multiplicity == 1]


def align_cycles_with_resonances(
    p2: float,
    pairs: Tuple[Tuple[int, int], Tuple[int, int]] = ((2, 1), (3, 1)),
    n_scan: int = 41,
) -> Tuple[float, float, float, float]:
    """
    Place both right-loop limit cycles on resonance levels of one forcing frequency

    Solves B10+(rho1) = B10+(rho2) = 0 together with
    (p_a / q_a) omega(rho1) = (p_b / q_b) omega(rho2) = p4. At fixed p2 the
    two cycles exist for p1 between the double-cycle line and the nearer of
    L1+ and L2+; the frequency ratio runs from 1 at the double cycle upwards.

    Returns:
        (p1, rho1, rho2, p4) with rho1 the inner cycle

    Raises:
        NoSolution: no p1 with two right-loop cycles meets the frequency ratio
    """
    inner, outer = ResonancePair(*pairs[0]), ResonancePair(*pairs[1])
    target = outer.p * inner.q / (inner.p * outer.q)

    left = double_cycle_p1(p2, "+")
    right = min(1.0 - p2, (4.0 - C_P2 * p2) / 5.0)
    if not left < right:
        raise NoSolution(f"no two-cycle interval of B1+ at p2={p2}")

    def mismatch(p1):
        roots = _loop_roots(p1, p2)
        if len(roots) != 2:
            raise NoSolution(f"p1={p1}: {len(roots)} right-loop cycle(s)")
        w1 = frequency_of_rho(roots[0], DomainTag.G1_PLUS)
        w2 = frequency_of_rho(roots[1], DomainTag.G1_PLUS)
        return w1 / w2 - target

    candidates = np.linspace(left, right, n_scan + 2)[1:-1]
    values = []
    for p1 in candidates:
        try:
            values.append(mismatch(p1))
        except NoSolution:
            values.append(np.nan)
    values = np.array(values)

    for idx in range(len(candidates) - 1):
        a, b = values[idx], values[idx + 1]
        if not (np.isfinite(a) and np.isfinite(b)) or np.sign(a) == np.sign(b):
            continue
        p1 = optimize.brentq(mismatch, candidates[idx], candidates[idx + 1], xtol=1e-13)
        rho1, rho2 = _loop_roots(p1, p2)
        p4 = inner.p * frequency_of_rho(rho1, DomainTag.G1_PLUS) / inner.q
        if config.DEBUG:
            _log(f"aligned p1={p1:.9f}, rho=({rho1:.6f}, {rho2:.6f}), p4={p4:.6f}")
        return float(p1), float(rho1), float(rho2), float(p4)

    raise NoSolution(f"frequency ratio {target} not met on p1 in ({left:.6f}, {right:.6f}) at p2={p2}")


# ==================== TESTING ====================

if __name__ == "__main__":
    fig6a = Params(epsilon=0.1, p1=1.0, p2=-0.1, p3=0.5, p4=2.5)
    zone = resonance_zone(ResonancePair(2, 1), fig6a, DomainTag.G1_PLUS)
    print(f"fig6a: rho={zone.level.rho:.6f}, B={zone.B_value:.5f}, A={zone.amplitude_A:.5f}")
    print(f"sigma={zone.sigma:.5f}, sigma_quad={zone.sigma_quadrature:.5f}, class={zone.classification.value}")
    print(f"alignment at p2=1.22: {align_cycles_with_resonances(1.22)}")
