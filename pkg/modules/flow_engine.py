"""
Duffing-Van der Pol Survey - Flow Engine
Direct numerics: integration, stroboscopic map, saddle fixed point,
invariant manifolds, separatrix splitting and autonomous connections
"""

import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate as scipy_integrate
from scipy import optimize

import config
from .errors import (
    BisectionAmbiguity,
    BudgetExhausted,
    DomainError,
    FoldResolutionFailure,
    NoConvergence,
    NonFinite,
    NoSolution,
    SectionAmbiguity,
    SeedAccuracyWarning,
    StepFailure,
)
from .melnikov_homoclinic import LoopSide, transformed_forcing_amplitude
from .parameters import Params
from .unperturbed_geometry import hamiltonian

# Section abscissa (half the loop vertex) and the unperturbed time from vertex to section
SECTION_X = math.sqrt(2.0) / 2.0
SECTION_LAG = math.acosh(2.0)


def _log(msg: str) -> None:
    print(f"[FlowEngine] {msg}")


class Variant(str, Enum):
    """ORIGINAL: forcing p3 sin(p4 t); TRANSFORMED: 3 p3 / (1 + p4^2) x^2 sin(p4 t)"""

    ORIGINAL = "ORIGINAL"
    TRANSFORMED = "TRANSFORMED"


class SplitVerdict(str, Enum):
    TRANSVERSAL = "TRANSVERSAL"
    TANGENT = "TANGENT"
    DISJOINT = "DISJOINT"


class ConnectionKind(str, Enum):
    RIGHT_LOOP = "RIGHT_LOOP"
    LEFT_LOOP = "LEFT_LOOP"
    BIG_LOOP = "BIG_LOOP"
    NONE = "NONE"


@dataclass(frozen=True)
class State:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise NonFinite(f"state ({self.x}, {self.y}) is not finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @classmethod
    def from_array(cls, z) -> "State":
        return cls(float(z[0]), float(z[1]))

    def energy(self) -> float:
        return float(hamiltonian(self.x, self.y))


# ==================== VECTOR FIELD ====================


def _forcing_coefficient(params: Params, variant: Variant) -> float:
    if Variant(variant) is Variant.ORIGINAL:
        return params.p3
    return transformed_forcing_amplitude(params.p3, params.p4)


def _make_rhs(params: Params, variant: Variant, offsets=0.0):
    """
    Right-hand side for a batch of states packed as [x_0..x_n-1, y_0..y_n-1]

    offsets shifts the forcing phase of each state (t -> t + offset).
    """
    eps, p1, p2, p4 = params.epsilon, params.p1, params.p2, params.p4
    coef = _forcing_coefficient(params, variant)
    quadratic = Variant(variant) is Variant.TRANSFORMED

    def rhs(t, flat):
        n = flat.shape[0] // 2
        x, y = flat[:n], flat[n:]
        force = coef * np.sin(p4 * (t + offsets))
        if quadratic:
            force = force * x * x
        ydot = x - x ** 3 + eps * ((p1 + p2 * x - x * x) * y + force)
        return np.concatenate([y, ydot])

    return rhs


def _make_variational_rhs(params: Params, variant: Variant):
    """State plus the 2x2 fundamental matrix, [x, y, a, b, c, d]"""
    eps, p1, p2, p4 = params.epsilon, params.p1, params.p2, params.p4
    coef = _forcing_coefficient(params, variant)
    quadratic = Variant(variant) is Variant.TRANSFORMED

    def rhs(t, s):
        x, y, a, b, c, d = s
        sin_t = math.sin(p4 * t)
        force = coef * sin_t * (x * x if quadratic else 1.0)
        fx = 1.0 - 3.0 * x * x + eps * (p2 - 2.0 * x) * y
        if quadratic:
            fx += eps * coef * sin_t * 2.0 * x
        fy = eps * (p1 + p2 * x - x * x)
        ydot = x - x ** 3 + eps * ((p1 + p2 * x - x * x) * y + force)
        return [y, ydot, c, d, fx * a + fy * c, fx * b + fy * d]

    return rhs


def _seed_atol(delta: float, atol: float = None) -> float:
    """Absolute tolerance for states that start delta away from a saddle"""
    return (atol or config.ATOL_MANIFOLD) * min(delta, 1.0)


def _solve(rhs, t0: float, t1: float, y0, rtol: float, atol: float, **kwargs):
    y0 = np.asarray(y0, dtype=float)
    sol = scipy_integrate.solve_ivp(
        rhs, (t0, t1), y0, method="DOP853", rtol=rtol, atol=atol, **kwargs
    )
    if sol.status == -1:
        raise StepFailure(f"integration from t={t0} to t={t1} failed: {sol.message}")
    if not np.all(np.isfinite(sol.y[:, -1])):
        raise NonFinite(f"non-finite state at t={sol.t[-1]}")
    return sol


def integrate_batch(
    points,
    t0: float,
    t1: float,
    params: Params,
    variant: Variant = Variant.ORIGINAL,
    offsets=0.0,
    rtol: float = None,
    atol: float = None,
    dense: bool = False,
    events=None,
):
    """
    Integrate many states over the same time span in one vectorised call

    Args:
        points: array (n, 2)
        offsets: per-state forcing phase shifts (scalar or array (n,))

    Returns:
        (end points (n, 2), solve_ivp solution)
    """
    rtol = rtol or config.RTOL_SWEEP
    atol = atol or config.ATOL_SWEEP
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    rhs = _make_rhs(params, variant, offsets)
    sol = _solve(
        rhs, t0, t1, np.concatenate([pts[:, 0], pts[:, 1]]), rtol, atol,
        dense_output=dense, events=events,
    )
    end = sol.y[:, -1]
    return np.column_stack([end[:n], end[n:]]), sol


def integrate(
    s0: State,
    t0: float,
    t1: float,
    params: Params,
    variant: Variant = Variant.ORIGINAL,
    rtol: float = None,
    atol: float = None,
    samples: int = 0,
):
    """
    Integrate one state from t0 to t1 (t1 < t0 runs backward)

    Args:
        s0: initial State
        samples: when > 0, also return rows (t, x, y) on a uniform grid

    Returns:
        State, or (State, trajectory) when samples > 0
    """
    if samples <= 0:
        end, _ = integrate_batch(s0.as_array(), t0, t1, params, variant, rtol=rtol, atol=atol)
        return State.from_array(end[0])

    rhs = _make_rhs(params, variant)
    sol = _solve(
        rhs, t0, t1, s0.as_array(), rtol or config.RTOL_SWEEP, atol or config.ATOL_SWEEP,
        t_eval=np.linspace(t0, t1, samples),
    )
    final = State(float(sol.y[0, -1]), float(sol.y[1, -1]))
    return final, np.column_stack([sol.t, sol.y[0], sol.y[1]])


# ==================== STROBOSCOPIC MAP ====================


@dataclass(frozen=True)
class StroboscopicMap:
    """
    Time-2pi/p4 flow map sampled at t = phase (mod 2pi/p4)

    Attributes:
        params: Params (p4 != 0)
        variant: ORIGINAL or TRANSFORMED equation
        phase: strobe time
    """

    params: Params
    variant: Variant = Variant.ORIGINAL
    phase: float = 0.0
    rtol: float = field(default_factory=lambda: config.RTOL_MANIFOLD)
    atol: float = field(default_factory=lambda: config.ATOL_MANIFOLD)

    def __post_init__(self):
        if self.params.p4 == 0.0:
            raise DomainError("stroboscopic map needs p4 != 0")

    @property
    def period(self) -> float:
        return self.params.forcing_period

    def apply(self, points, inverse: bool = False) -> np.ndarray:
        """One forward (or inverse) application to an array of points (n, 2)"""
        t0, t1 = self.phase, self.phase + self.period
        if inverse:
            t0, t1 = t1, t0
        end, _ = integrate_batch(
            points, t0, t1, self.params, self.variant, rtol=self.rtol, atol=self.atol
        )
        return end

    def __call__(self, state: State) -> State:
        return State.from_array(self.apply(state.as_array())[0])

    def inverse(self, state: State) -> State:
        return State.from_array(self.apply(state.as_array(), inverse=True)[0])

    def jacobian(self, z) -> Tuple[np.ndarray, np.ndarray]:
        """
        Image of z and the Jacobian of the map from the variational equations

        Returns:
            (P(z), DP(z))
        """
        z = np.asarray(z, dtype=float)
        rhs = _make_variational_rhs(self.params, self.variant)
        s0 = [z[0], z[1], 1.0, 0.0, 0.0, 1.0]
        sol = _solve(rhs, self.phase, self.phase + self.period, s0, self.rtol, self.atol)
        end = sol.y[:, -1]
        return end[:2], end[2:].reshape(2, 2)


def poincare(strobe: StroboscopicMap, s: State, n: int) -> List[State]:
    """
    n applications of the stroboscopic map

    Returns:
        [s, P(s), ..., P^n(s)]
    """
    orbit = [s]
    z = s.as_array()
    for _ in range(n):
        z = strobe.apply(z)[0]
        orbit.append(State.from_array(z))
    return orbit


def poincare_cloud(strobe: StroboscopicMap, seeds, n: int, skip: int = 0) -> np.ndarray:
    """
    Iterate a batch of seeds together

    Returns:
        rows (seed_index, iterate, x, y) for iterates > skip
    """
    z = np.atleast_2d(np.asarray(seeds, dtype=float))
    rows = []
    for k in range(1, n + 1):
        z = strobe.apply(z)
        if k > skip:
            for idx, (x, y) in enumerate(z):
                rows.append((idx, k, x, y))
    return np.array(rows).reshape(-1, 4)


# ==================== SADDLE ====================


@dataclass(frozen=True)
class SaddleFixedPoint:
    location: State
    eigenvalues: Tuple[float, float]
    eigenvectors: Tuple[Tuple[float, float], Tuple[float, float]]
    strobe: StroboscopicMap
    residual: float = 0.0

    @property
    def unstable_direction(self) -> np.ndarray:
        return np.array(self.eigenvectors[0])

    @property
    def stable_direction(self) -> np.ndarray:
        return np.array(self.eigenvectors[1])


def _orient(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    if v[0] < 0.0 or (abs(v[0]) < 1e-14 and v[1] < 0.0):
        v = -v
    return v


def find_saddle(strobe: StroboscopicMap, guess=(0.0, 0.0), tol: float = None, max_iter: int = None) -> SaddleFixedPoint:
    """
    Saddle fixed point of the stroboscopic map by Newton iteration on P(z) - z

    Args:
        strobe: StroboscopicMap
        guess: starting point (the unperturbed saddle by default)

    Returns:
        SaddleFixedPoint with eigenvalues (lambda_u, lambda_s) and unit eigenvectors

    Raises:
        NoConvergence: Newton failed or the fixed point is not a saddle
    """
    tol = tol or config.SADDLE_NEWTON_TOL
    max_iter = max_iter or config.SADDLE_NEWTON_MAX_ITER
    z = np.asarray(guess, dtype=float)

    for iteration in range(max_iter):
        image, jac = strobe.jacobian(z)
        residual = image - z
        if np.linalg.norm(residual) < tol:
            break
        z = z - np.linalg.solve(jac - np.eye(2), residual)
    else:
        raise NoConvergence(f"saddle Newton did not converge in {max_iter} iterations")

    image, jac = strobe.jacobian(z)
    residual = float(np.linalg.norm(image - z))
    values, vectors = np.linalg.eig(jac)
    if np.any(np.abs(values.imag) > 1e-12):
        raise NoConvergence(f"complex multipliers {values} at {z}")
    values = values.real
    order = np.argsort(-np.abs(values))
    lam_u, lam_s = values[order]
    if not (abs(lam_u) > 1.0 > abs(lam_s) > 0.0):
        raise NoConvergence(f"fixed point {z} is not a saddle (multipliers {values})")

    vu = _orient(vectors[:, order[0]].real)
    vs = _orient(vectors[:, order[1]].real)
    if config.DEBUG:
        _log(f"saddle converged in {iteration} iterations at ({z[0]:.3e}, {z[1]:.3e}), multipliers ({lam_u:.6g}, {lam_s:.6g})")
    return SaddleFixedPoint(
        location=State.from_array(z),
        eigenvalues=(float(lam_u), float(lam_s)),
        eigenvectors=(tuple(vu), tuple(vs)),
        strobe=strobe,
        residual=residual,
    )


# ==================== MANIFOLDS ====================


@dataclass
class ManifoldBranch:
    """Polyline of one branch of the stable or unstable manifold"""

    side: str
    sign: int
    points: np.ndarray
    truncated: bool = False

    @property
    def gaps(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.points, axis=0), axis=1)

    @property
    def arclength(self) -> float:
        return float(self.gaps.sum())

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max()) if len(self.points) > 1 else 0.0


def _refine(pre: np.ndarray, img: np.ndarray, step, spacing: float, max_points: int):
    """Insert preimage midpoints until every image gap is below spacing"""
    for _ in range(config.MANIFOLD_MAX_REFINE):
        gaps = np.linalg.norm(np.diff(img, axis=0), axis=1)
        bad = np.nonzero(gaps > spacing)[0]
        if bad.size == 0:
            return pre, img
        mids = 0.5 * (pre[bad] + pre[bad + 1])
        new = step(mids)
        pre = np.insert(pre, bad + 1, mids, axis=0)
        img = np.insert(img, bad + 1, new, axis=0)
        if img.shape[0] > max_points:
            raise BudgetExhausted(f"refinement exceeded {max_points} points")
    raise FoldResolutionFailure(f"gaps above {spacing} after {config.MANIFOLD_MAX_REFINE} refinements")


def _truncate(points: np.ndarray, budget: float) -> np.ndarray:
    lengths = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(points, axis=0), axis=1))])
    keep = np.searchsorted(lengths, budget, side="right")
    return points[: max(keep, 2)]


def grow_manifold(
    fp: SaddleFixedPoint,
    side: str = "unstable",
    sign: int = 1,
    budget: float = 5.0,
    spacing: float = None,
    seed_distance: float = None,
    seed_points: int = None,
    max_points: int = None,
) -> ManifoldBranch:
    """
    Grow one branch of a saddle's invariant manifold

    A fundamental domain between delta and lambda * delta along the
    eigenvector is iterated; gaps above the spacing bound are closed by
    inserting preimage midpoints. The stable side uses the inverse map.

    Args:
        fp: SaddleFixedPoint
        side: 'unstable' or 'stable'
        sign: +1 or -1, half of the eigenline
        budget: arclength to reach

    Returns:
        ManifoldBranch (truncated=True when growth stopped at the escape radius)
    """
    if side not in ("stable", "unstable"):
        raise DomainError(f"side must be 'stable' or 'unstable', got {side!r}")
    spacing = spacing or config.MANIFOLD_SPACING
    delta = seed_distance or config.MANIFOLD_SEED_DISTANCE
    seed_points = seed_points or config.MANIFOLD_SEED_POINTS
    max_points = max_points or config.MANIFOLD_MAX_POINTS

    strobe = replace(fp.strobe, atol=_seed_atol(delta, fp.strobe.atol))
    inverse = side == "stable"
    if inverse:
        lam, v = 1.0 / fp.eigenvalues[1], fp.stable_direction
    else:
        lam, v = fp.eigenvalues[0], fp.unstable_direction
    repeats = 2 if lam < 0.0 else 1
    lam = abs(lam) ** repeats

    def step(points):
        out = points
        for _ in range(repeats):
            out = strobe.apply(out, inverse=inverse)
        return out

    z0 = fp.location.as_array()
    probe = step((z0 + sign * delta * v)[None, :])[0]
    deviation = float(np.linalg.norm(probe - (z0 + sign * delta * lam * v)))
    if deviation > 1e-8:
        warnings.warn(
            f"seed at distance {delta} leaves the linear regime by {deviation:.2e}",
            SeedAccuracyWarning,
            stacklevel=2,
        )

    scales = lam ** (np.arange(seed_points + 1) / seed_points)
    segment = z0 + sign * delta * np.outer(scales, v)
    pieces = [segment]
    length = float(np.linalg.norm(np.diff(segment, axis=0), axis=1).sum())
    count = segment.shape[0]
    truncated = False

    while length < budget:
        try:
            image = step(segment)
            segment, image = _refine(segment, image, step, spacing, max_points)
        except (StepFailure, NonFinite):
            truncated = True
            break
        far = np.nonzero(np.linalg.norm(image, axis=1) > config.ESCAPE_RADIUS)[0]
        if far.size:
            image = image[: far[0]]
            truncated = True
        pieces.append(image[1:])
        length += float(np.linalg.norm(np.diff(image, axis=0), axis=1).sum())
        count += image.shape[0] - 1
        if count > max_points:
            raise BudgetExhausted(f"{count} points before arclength {budget} (reached {length:.3f})")
        if truncated or image.shape[0] < 2:
            truncated = True
            break
        segment = image

    points = _truncate(np.vstack(pieces), budget)
    if config.DEBUG:
        _log(f"{side} branch sign {sign:+d}: {points.shape[0]} points, arclength {min(length, budget):.3f}")
    return ManifoldBranch(side=side, sign=sign, points=points, truncated=truncated)


# ==================== POLYLINE GEOMETRY ====================


def branches_intersect(a, b, exclude_center=None, exclude_radius: float = 0.0, chunk: int = 256) -> np.ndarray:
    """
    Intersection points of two polylines

    Args:
        a, b: arrays (n, 2) and (m, 2)
        exclude_center, exclude_radius: drop intersections within this disc

    Returns:
        array (k, 2) of intersection points
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[0] < 2 or b.shape[0] < 2:
        return np.empty((0, 2))

    b0, b1 = b[:-1], b[1:]
    db = b1 - b0
    b_lo, b_hi = np.minimum(b0, b1), np.maximum(b0, b1)
    found = []
    for start in range(0, a.shape[0] - 1, chunk):
        a0 = a[start : start + chunk]
        a1 = a[start + 1 : start + chunk + 1]
        a0 = a0[: a1.shape[0]]
        da = a1 - a0
        a_lo, a_hi = np.minimum(a0, a1), np.maximum(a0, a1)

        overlap = (
            (a_lo[:, None, 0] <= b_hi[None, :, 0]) & (a_hi[:, None, 0] >= b_lo[None, :, 0])
            & (a_lo[:, None, 1] <= b_hi[None, :, 1]) & (a_hi[:, None, 1] >= b_lo[None, :, 1])
        )
        ia, ib = np.nonzero(overlap)
        if ia.size == 0:
            continue
        p, r = a0[ia], da[ia]
        q, s = b0[ib], db[ib]
        denom = r[:, 0] * s[:, 1] - r[:, 1] * s[:, 0]
        ok = np.abs(denom) > 1e-300
        qp = q - p
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom
            u = (qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]) / denom
        hit = ok & (t >= 0.0) & (t <= 1.0) & (u >= 0.0) & (u <= 1.0)
        if np.any(hit):
            found.append(p[hit] + t[hit, None] * r[hit])

    points = np.vstack(found) if found else np.empty((0, 2))
    if exclude_center is not None and points.size:
        far = np.linalg.norm(points - np.asarray(exclude_center), axis=1) > exclude_radius
        points = points[far]
    return points


def _segment_distance(points: np.ndarray, polyline: np.ndarray) -> np.ndarray:
    """Distance from each point to a polyline"""
    p0, p1 = polyline[:-1], polyline[1:]
    d = p1 - p0
    length2 = np.maximum(np.sum(d * d, axis=1), 1e-300)
    out = np.empty(points.shape[0])
    for idx, pt in enumerate(points):
        t = np.clip(np.sum((pt - p0) * d, axis=1) / length2, 0.0, 1.0)
        proj = p0 + t[:, None] * d
        out[idx] = np.min(np.linalg.norm(proj - pt, axis=1))
    return out


def _section_crossings(points: np.ndarray, x_section: float) -> np.ndarray:
    """Points where a polyline crosses x = x_section, rows (x, y)"""
    f = points[:, 0] - x_section
    idx = np.nonzero(np.signbit(f[:-1]) != np.signbit(f[1:]))[0]
    if idx.size == 0:
        return np.empty((0, 2))
    t = f[idx] / (f[idx] - f[idx + 1])
    return points[idx] + t[:, None] * (points[idx + 1] - points[idx])


@dataclass
class SplittingReport:
    """Relative position of an unstable and a stable branch"""

    verdict: SplitVerdict
    min_distance: float
    intersections: np.ndarray
    profile: np.ndarray


def splitting_report(
    u: ManifoldBranch, s: ManifoldBranch, section_side: LoopSide = LoopSide.RIGHT, exclude_radius: float = 0.1
) -> SplittingReport:
    """
    Verdict for two branches of the same map

    Transversal when the polylines cross away from the saddle; otherwise
    tangent if they come within the grazing tolerance, else disjoint. The
    profile lists, for every crossing of the unstable branch with the
    section x = +-sqrt(2)/2, its signed y-offset to the nearest stable crossing.

    Raises:
        SectionAmbiguity: a branch never reaches the section
    """
    if u.side != "unstable" or s.side != "stable":
        raise DomainError("splitting_report expects (unstable, stable) branches")
    x_section = LoopSide(section_side).sign * SECTION_X
    cu = _section_crossings(u.points, x_section)
    cs = _section_crossings(s.points, x_section)
    if cu.shape[0] == 0 or cs.shape[0] == 0:
        raise SectionAmbiguity(f"branch does not reach the section x={x_section:+.4f}")

    offsets = []
    for x, y in cu:
        nearest = cs[np.argmin(np.abs(cs[:, 1] - y)), 1]
        offsets.append((y, y - nearest))
    profile = np.array(offsets)

    origin = u.points[0]
    hits = branches_intersect(u.points, s.points, exclude_center=origin, exclude_radius=exclude_radius)
    mask_u = np.linalg.norm(u.points - origin, axis=1) > exclude_radius
    mask_s = np.linalg.norm(s.points - origin, axis=1) > exclude_radius
    distance = float(np.min(_segment_distance(s.points[mask_s], u.points))) if mask_s.any() and mask_u.any() else math.inf

    if hits.shape[0] > 0:
        verdict = SplitVerdict.TRANSVERSAL
    elif distance < config.SPLITTING_GRAZE_TOL:
        verdict = SplitVerdict.TANGENT
    else:
        verdict = SplitVerdict.DISJOINT
    return SplittingReport(verdict=verdict, min_distance=distance, intersections=hits, profile=profile)


# ==================== SECTION SPLITTING PROFILES ====================


@dataclass(frozen=True)
class SectionFamily:
    """Which unstable and stable branches are compared, and where"""

    name: str
    unstable_loop: LoopSide
    stable_loop: LoopSide
    section: LoopSide

    @property
    def y_sign(self) -> float:
        return -1.0 if self.section is LoopSide.RIGHT else 1.0

    @property
    def crosses(self) -> bool:
        return self.unstable_loop is not self.stable_loop


FAMILIES: Dict[str, SectionFamily] = {
    "right": SectionFamily("right", LoopSide.RIGHT, LoopSide.RIGHT, LoopSide.RIGHT),
    "left": SectionFamily("left", LoopSide.LEFT, LoopSide.LEFT, LoopSide.LEFT),
    "right_to_left": SectionFamily("right_to_left", LoopSide.RIGHT, LoopSide.LEFT, LoopSide.LEFT),
    "left_to_right": SectionFamily("left_to_right", LoopSide.LEFT, LoopSide.RIGHT, LoopSide.RIGHT),
}


@dataclass
class SplittingProfile:
    """
    H_u - H_s on the section as a function of the vertex passage time t0

    First-order value: eps * melnikov_integral(t0).
    """

    family: str
    t0: np.ndarray
    delta_h: np.ndarray
    verdict: SplitVerdict
    minimum: float
    maximum: float

    @property
    def margin(self) -> float:
        """Positive with a sign change (distance to tangency), negative without"""
        if self.minimum < 0.0 < self.maximum:
            return min(self.maximum, -self.minimum)
        return -min(abs(self.minimum), abs(self.maximum))


def _linear_multipliers(params: Params) -> Tuple[float, float]:
    """Eigenvalues of the flow linearised at the origin: l^2 - eps p1 l - 1 = 0"""
    a = params.epsilon * params.p1
    root = math.sqrt(a * a + 4.0)
    return 0.5 * (a + root), 0.5 * (a - root)


def _first_crossings(sol, n: int, s_end: float, x_section: float, y_sign: float) -> Tuple[np.ndarray, np.ndarray]:
    """First crossing of x = x_section with sign(y) = y_sign for each batch member"""
    grid = np.linspace(0.0, s_end, config.SECTION_GRID_POINTS)
    values = sol.sol(grid)
    xs, ys = values[:n], values[n:]
    times = np.full(n, np.nan)
    heights = np.full(n, np.nan)
    f = xs - x_section
    for k in range(n):
        change = np.nonzero(np.signbit(f[k, :-1]) != np.signbit(f[k, 1:]))[0]
        for idx in change:
            if np.sign(ys[k, idx]) != y_sign or np.sign(ys[k, idx + 1]) != y_sign:
                continue
            root = optimize.brentq(lambda s: sol.sol(s)[k] - x_section, grid[idx], grid[idx + 1], xtol=1e-13)
            times[k] = root
            heights[k] = sol.sol(root)[n + k]
            break
    return times, heights


def _crossing_profile(params: Params, loop: LoopSide, unstable: bool, family: SectionFamily, phases: np.ndarray, delta: float):
    """Integrate seeds launched at the given phases to their first section crossing"""
    lam_u, lam_s = _linear_multipliers(params)
    lam = lam_u if unstable else lam_s
    seed = loop.sign * delta * np.array([1.0, lam])
    points = np.tile(seed, (phases.size, 1))

    extra = config.SECTION_CROSS_EXTRA_TIME if (unstable and family.crosses) else config.SECTION_EXTRA_TIME
    horizon = math.log(1.0 / delta) / abs(lam) + extra
    s_end = horizon if unstable else -horizon
    x_section = family.section.sign * SECTION_X

    _, sol = integrate_batch(
        points, 0.0, s_end, params, Variant.TRANSFORMED, offsets=phases,
        rtol=config.RTOL_MANIFOLD, atol=_seed_atol(delta), dense=True,
    )
    times, heights = _first_crossings(sol, phases.size, s_end, x_section, family.y_sign)
    return (phases + times) % params.forcing_period, heights


def _upsampled_extrema(values: np.ndarray) -> Tuple[float, float]:
    spectrum = np.fft.rfft(values)
    dense = np.fft.irfft(spectrum, n=config.PROFILE_UPSAMPLE) * (config.PROFILE_UPSAMPLE / values.size)
    return float(dense.min()), float(dense.max())


def splitting_profile(params: Params, family: str = "right", n_phases: int = None, delta: float = None) -> SplittingProfile:
    """
    Energy splitting of the loop separatrices of the transformed equation

    Unstable and stable seeds of the origin are launched at n_phases strobe
    phases, integrated as one batch to the section x = +-sqrt(2)/2, and
    H_u - H_s = (y_u^2 - y_s^2) / 2 is compared at equal crossing phase.

    Raises:
        SectionAmbiguity: a branch misses the section at some phase
    """
    fam = FAMILIES[family]
    n_phases = n_phases or config.SPLITTING_PHASES
    delta = delta or config.MANIFOLD_SEED_DISTANCE
    period = params.forcing_period
    phases = period * np.arange(n_phases) / n_phases

    phi_u, y_u = _crossing_profile(params, fam.unstable_loop, True, fam, phases, delta)
    phi_s, y_s = _crossing_profile(params, fam.stable_loop, False, fam, phases, delta)
    if np.any(~np.isfinite(y_u)) or np.any(~np.isfinite(y_s)):
        missing = int(np.sum(~np.isfinite(y_u)) + np.sum(~np.isfinite(y_s)))
        raise SectionAmbiguity(f"{family}: {missing} seed(s) miss the section")

    grid = phases
    yu = np.interp(grid, np.sort(phi_u), y_u[np.argsort(phi_u)], period=period)
    ys = np.interp(grid, np.sort(phi_s), y_s[np.argsort(phi_s)], period=period)
    delta_h = 0.5 * (yu * yu - ys * ys)
    lo, hi = _upsampled_extrema(delta_h)

    if lo < 0.0 < hi:
        verdict = SplitVerdict.TRANSVERSAL
    elif min(abs(lo), abs(hi)) < config.SPLITTING_GRAZE_TOL:
        verdict = SplitVerdict.TANGENT
    else:
        verdict = SplitVerdict.DISJOINT
    t0 = (grid - SECTION_LAG) % period
    order = np.argsort(t0)
    if config.DEBUG:
        _log(f"{family} splitting: min {lo:.3e}, max {hi:.3e} -> {verdict.value}")
    return SplittingProfile(family, t0[order], delta_h[order], verdict, lo, hi)


def tangency_p3(params: Params, family: str, p3_lo: float, p3_hi: float, xtol: float = 1e-8, n_phases: int = None) -> float:
    """
    Forcing amplitude at which the splitting profile of a family grazes zero

    Raises:
        BisectionAmbiguity: the bracket does not isolate one verdict flip
    """

    def margin(p3):
        try:
            return splitting_profile(params.with_(p3=p3), family, n_phases).margin
        except SectionAmbiguity:
            return math.nan

    m_lo, m_hi = margin(p3_lo), margin(p3_hi)
    if not (np.isfinite(m_lo) and np.isfinite(m_hi)) or np.sign(m_lo) == np.sign(m_hi):
        raise BisectionAmbiguity(f"{family}: no verdict flip in p3 in [{p3_lo}, {p3_hi}]")
    try:
        return optimize.brentq(margin, p3_lo, p3_hi, xtol=xtol)
    except ValueError as exc:
        raise BisectionAmbiguity(str(exc)) from exc


@dataclass
class TangencyTrace:
    """Numerically traced tangency curves of one family in the (p2, p3) plane"""

    family: str
    curves: List[np.ndarray]
    intersections: np.ndarray
    ambiguous: List[Tuple[float, float, float]]


def _tangency_column(args):
    """All tangency p3 values at one p2 (worker task)"""
    params, family, p3_grid = args
    margins = []
    for p3 in p3_grid:
        try:
            margins.append(splitting_profile(params.with_(p3=p3), family).margin)
        except SectionAmbiguity:
            margins.append(math.nan)
    margins = np.array(margins)

    roots, ambiguous = [], []
    for idx in range(p3_grid.size - 1):
        a, b = margins[idx], margins[idx + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            if np.isfinite(a) != np.isfinite(b):
                ambiguous.append((params.p2, p3_grid[idx], p3_grid[idx + 1]))
            continue
        if np.sign(a) == np.sign(b):
            continue
        try:
            roots.append(tangency_p3(params, family, p3_grid[idx], p3_grid[idx + 1], xtol=config.TANGENCY_P3_BRACKET))
        except BisectionAmbiguity:
            ambiguous.append((params.p2, p3_grid[idx], p3_grid[idx + 1]))
    return roots, ambiguous


def _stitch(columns: Sequence[Tuple[float, List[float]]]) -> List[np.ndarray]:
    """Join per-p2 roots into curves by nearest continuation in p3"""
    curves: List[List[Tuple[float, float]]] = []
    for p2, roots in columns:
        free = list(roots)
        for curve in curves:
            if not free:
                break
            last = curve[-1][1]
            best = min(free, key=lambda r: abs(r - last))
            curve.append((p2, best))
            free.remove(best)
        for root in free:
            curves.append([(p2, root)])
    return [np.array(c) for c in curves]


def trace_tangency_curve(
    p1: float,
    p4: float,
    epsilon: float,
    family: str = "right",
    p2_values: Sequence[float] = (),
    p3_range: Tuple[float, float] = (0.0, 5.0),
    n_p3: int = 21,
    workers: int = 1,
) -> TangencyTrace:
    """
    Tangency curves of a family in the (p2, p3) plane

    For every p2 the splitting margin is scanned over p3 and each sign change
    is bisected. Points are stitched into curves by continuity; crossings of
    different curves (double tangencies) are reported as intersections.
    Brackets where the profile is undefined on one side are reported in
    ambiguous instead of guessed.
    """
    base = Params(epsilon=epsilon, p1=p1, p4=p4)
    p3_grid = np.linspace(p3_range[0], p3_range[1], n_p3)
    tasks = [(base.with_(p2=float(p2)), family, p3_grid) for p2 in p2_values]
    if workers > 1:
        with Pool(workers) as pool:
            results = pool.map(_tangency_column, tasks)
    else:
        results = [_tangency_column(task) for task in tasks]

    columns = [(float(p2), roots) for p2, (roots, _) in zip(p2_values, results)]
    ambiguous = [item for _, amb in results for item in amb]
    curves = _stitch(columns)

    crossings = []
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            hits = branches_intersect(curves[i], curves[j])
            if hits.size:
                crossings.append(hits)
    intersections = np.vstack(crossings) if crossings else np.empty((0, 2))
    if config.DEBUG:
        _log(f"{family} at p1={p1}: {len(curves)} curve(s), {len(ambiguous)} ambiguous bracket(s)")
    return TangencyTrace(family, curves, intersections, ambiguous)


# ==================== AUTONOMOUS CONNECTIONS ====================


@dataclass(frozen=True)
class ConnectionResult:
    """
    Return defects of the right unstable separatrix of the autonomous flow

    right_defect: H at the first close approach to the saddle (0 on a right loop)
    big_defect: H at the close approach after a right lap and a left lap
    left_defect: right_defect of the mirrored parameters
    """

    kind: ConnectionKind
    defect: float
    right_defect: float
    left_defect: float
    big_defect: float
    escaped: bool = False


def _return_energies(p1: float, p2: float, epsilon: float, t_max: float = None) -> Tuple[List[float], List[float], bool]:
    """Energies and radii at successive minima of |z| of the right unstable separatrix"""
    t_max = t_max or config.CONNECTION_T_MAX
    params = Params(epsilon=epsilon, p1=p1, p2=p2, p3=0.0, p4=1.0)
    lam_u, _ = _linear_multipliers(params)
    delta = config.MANIFOLD_SEED_DISTANCE
    rhs = _make_rhs(params, Variant.ORIGINAL)

    def radial_rate(t, z):
        dz = rhs(t, z)
        return z[0] * dz[0] + z[1] * dz[1]

    radial_rate.direction = 1

    def far(t, z):
        return z[0] * z[0] + z[1] * z[1] - config.CONNECTION_FAR_RADIUS ** 2

    def escape(t, z):
        return z[0] * z[0] + z[1] * z[1] - config.ESCAPE_RADIUS ** 2

    escape.terminal = True

    sol = _solve(
        rhs, 0.0, t_max, np.array([delta, delta * lam_u]), config.RTOL_MANIFOLD, _seed_atol(delta),
        events=(radial_rate, far, escape),
    )
    escaped = len(sol.t_events[2]) > 0
    far_times = sol.t_events[1]
    energies, radii = [], []
    last = -math.inf
    for t, z in zip(sol.t_events[0], sol.y_events[0]):
        # a close approach counts once per excursion beyond the far radius
        if not np.any((far_times > last) & (far_times < t)):
            continue
        energies.append(float(hamiltonian(z[0], z[1])))
        radii.append(float(math.hypot(z[0], z[1])))
        last = t
    return energies, radii, escaped


def autonomous_connection(p1: float, p2: float, epsilon: float = None, tol: float = None) -> ConnectionResult:
    """
    Separatrix connections of the autonomous flow (p3 = 0)

    Args:
        p1, p2: dissipation parameters
        epsilon: perturbation size (default config.DIAGRAM_EPSILON)
        tol: |defect| below which a connection is reported

    Returns:
        ConnectionResult; kind NONE when no defect vanishes or the branch escapes
    """
    epsilon = config.DIAGRAM_EPSILON if epsilon is None else epsilon
    tol = tol or config.CONNECTION_DEFECT_TOL
    energies, radii, escaped = _return_energies(p1, p2, epsilon)
    mirrored, mirrored_radii, _ = _return_energies(p1, -p2, epsilon)

    right = energies[0] if energies else math.nan
    left = mirrored[0] if mirrored else math.nan
    big = energies[1] if len(energies) > 1 and right > 0.0 else math.nan

    near = config.CONNECTION_NEAR_RADIUS
    candidates = [
        (ConnectionKind.RIGHT_LOOP, right, radii[0] if radii else math.inf),
        (ConnectionKind.LEFT_LOOP, left, mirrored_radii[0] if mirrored_radii else math.inf),
        (ConnectionKind.BIG_LOOP, big, radii[1] if len(radii) > 1 else math.inf),
    ]
    kind, defect = ConnectionKind.NONE, right
    for name, value, radius in candidates:
        if np.isfinite(value) and abs(value) < tol and radius < near:
            kind, defect = name, value
            break
    if escaped and kind is ConnectionKind.NONE and config.DEBUG:
        _log(f"separatrix escaped at p1={p1}, p2={p2}")
    return ConnectionResult(kind, defect, right, left, big, escaped)


def _connection_defect(p1: float, p2: float, kind: ConnectionKind, epsilon: float) -> float:
    result = autonomous_connection(p1, p2, epsilon)
    return {
        ConnectionKind.RIGHT_LOOP: result.right_defect,
        ConnectionKind.LEFT_LOOP: result.left_defect,
        ConnectionKind.BIG_LOOP: result.big_defect,
    }[ConnectionKind(kind)]


def locate_connection(p1: float, p2_lo: float, p2_hi: float, kind: str = "BIG_LOOP", epsilon: float = None, xtol: float = 1e-10) -> float:
    """
    p2 at which a connection defect changes sign

    Raises:
        NoSolution: the defect is undefined or keeps its sign on the bracket
    """
    epsilon = config.DIAGRAM_EPSILON if epsilon is None else epsilon
    kind = ConnectionKind(kind)
    f = lambda p2: _connection_defect(p1, p2, kind, epsilon)
    lo, hi = f(p2_lo), f(p2_hi)
    if not (np.isfinite(lo) and np.isfinite(hi)) or np.sign(lo) == np.sign(hi):
        raise NoSolution(f"{kind.value} defect does not change sign on [{p2_lo}, {p2_hi}]")
    return optimize.brentq(f, p2_lo, p2_hi, xtol=xtol)


def scan_connections(p1: float, p2_range: Tuple[float, float], kind: str = "BIG_LOOP", epsilon: float = None, n: int = 61) -> List[float]:
    """All sign changes of a connection defect on a p2 grid, bisected"""
    epsilon = config.DIAGRAM_EPSILON if epsilon is None else epsilon
    kind = ConnectionKind(kind)
    grid = np.linspace(p2_range[0], p2_range[1], n)
    values = np.array([_connection_defect(p1, p2, kind, epsilon) for p2 in grid])
    roots = []
    for idx in range(n - 1):
        a, b = values[idx], values[idx + 1]
        if np.isfinite(a) and np.isfinite(b) and np.sign(a) != np.sign(b):
            roots.append(locate_connection(p1, grid[idx], grid[idx + 1], kind, epsilon))
    return roots


# ==================== PORTRAITS ====================


def sample_portrait(params: Params, seeds, t_end: float, variant: Variant = Variant.ORIGINAL, n: int = 800) -> List[np.ndarray]:
    """
    Trajectories from a list of seeds

    Returns:
        one array of rows (t, x, y) per seed; a seed that blows up keeps
        the samples computed before the failure
    """
    out = []
    t_eval = np.linspace(0.0, t_end, n)
    rhs = _make_rhs(params, variant)

    def escape(t, z):
        return z[0] * z[0] + z[1] * z[1] - config.ESCAPE_RADIUS ** 2

    escape.terminal = True
    for seed in np.atleast_2d(np.asarray(seeds, dtype=float)):
        sol = scipy_integrate.solve_ivp(
            rhs, (0.0, t_end), seed, method="DOP853", t_eval=t_eval,
            rtol=config.RTOL_SWEEP, atol=config.ATOL_SWEEP, events=escape,
        )
        out.append(np.column_stack([sol.t, sol.y[0], sol.y[1]]))
    return out


# ==================== SCENARIOS ====================

# Separatrix pictures of the transformed equation (p4 = 4)
SCENARIOS: Dict[str, Params] = {
    "fig8a": Params(epsilon=0.3, p1=0.7551195621, p2=0.053875454, p3=1.13, p4=4.0),
    "fig8b": Params(epsilon=0.3, p1=0.7551195621, p2=0.053875454, p3=1.7, p4=4.0),
    "fig8c": Params(epsilon=0.3, p1=0.7551195621, p2=0.053875454, p3=2.83, p4=4.0),
    "fig9a": Params(epsilon=0.1, p1=0.78549, p2=1.6, p3=1.02, p4=4.0),
    "fig9b": Params(epsilon=0.1, p1=0.78549, p2=-1.6, p3=1.02, p4=4.0),
    "fig10a": Params(epsilon=0.175, p1=0.78549, p2=1.6, p3=1.02, p4=4.0),
    "fig10b": Params(epsilon=0.175, p1=0.78549, p2=-1.6, p3=1.02, p4=4.0),
    "fig10c": Params(epsilon=0.175, p1=0.7850145, p2=0.5, p3=0.57, p4=4.0),
    "fig10d": Params(epsilon=0.175, p1=0.7850145, p2=-0.5, p3=0.57, p4=4.0),
}

# Tangency sets at eps = 0.12, p4 = 4: (p1, p2, p3, family whose splitting grazes)
TANGENCY_SETS: Dict[str, Tuple[float, float, float, str]] = {
    "fig11a": (0.7, 0.3, 3.0, "right"),
    "fig11b": (0.86, 0.2, 4.55, "right"),
    "fig11c": (0.6, 0.1, 2.34, "right"),
    "fig11d": (0.86, 0.25, 2.96, "left"),
    "fig11e": (1.0, 0.1, 2.32, "left"),
    "fig11f": (0.7, 0.0, 2.0, "right"),
    "fig11g": (0.8, 0.2, 3.34, "right"),
    "fig11h": (0.9, 0.0, 1.98, "right"),
    "fig11i": (0.65, 0.35, 2.82, "right"),
    "fig11j": (0.9, 0.3, 2.97, "left"),
}

for _name, (_p1, _p2, _p3, _) in TANGENCY_SETS.items():
    SCENARIOS[_name] = Params(epsilon=config.DIAGRAM_EPSILON, p1=_p1, p2=_p2, p3=_p3, p4=config.DIAGRAM_P4)


def scenario_map(name: str) -> StroboscopicMap:
    """Stroboscopic map of the transformed equation for a stored scenario"""
    if name not in SCENARIOS:
        raise DomainError(f"unknown scenario {name!r}")
    return StroboscopicMap(SCENARIOS[name], Variant.TRANSFORMED)


def separatrix_branches(strobe: StroboscopicMap, budget: float = 6.0) -> Dict[str, ManifoldBranch]:
    """The four saddle branches: unstable/stable, right (+) and left (-)"""
    fp = find_saddle(strobe)
    return {
        f"{side}_{'right' if sign > 0 else 'left'}": grow_manifold(fp, side, sign, budget)
        for side in ("unstable", "stable")
        for sign in (1, -1)
    }


# ==================== TESTING ====================

if __name__ == "__main__":
    strobe = StroboscopicMap(Params(epsilon=0.0, p4=4.0), Variant.TRANSFORMED)
    fp = find_saddle(strobe)
    print(f"eps=0 saddle multipliers {fp.eigenvalues}, expected ({math.exp(math.pi / 2):.6f}, {math.exp(-math.pi / 2):.6f})")
    profile = splitting_profile(Params(epsilon=0.01, p1=0.7, p2=0.3, p3=3.5, p4=4.0), "right")
    print(f"right splitting at eps=0.01: [{profile.minimum:.3e}, {profile.maximum:.3e}] {profile.verdict.value}")
