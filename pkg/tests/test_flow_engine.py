"""Integration, stroboscopic map, saddle, manifolds and connections"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from modules.errors import DomainError, NonFinite, SectionAmbiguity
from modules.flow_engine import (
    SCENARIOS,
    ConnectionKind,
    ManifoldBranch,
    SplitVerdict,
    State,
    StroboscopicMap,
    Variant,
    autonomous_connection,
    branches_intersect,
    find_saddle,
    grow_manifold,
    integrate,
    locate_connection,
    poincare,
    poincare_cloud,
    sample_portrait,
    scenario_map,
    splitting_profile,
    splitting_report,
    tangency_p3,
    trace_tangency_curve,
)
from modules.flow_engine import _make_rhs, _solve
from modules.melnikov_homoclinic import LoopSide, integrated_threshold_p3, loop_condition, melnikov_integral
from modules.parameters import Params
from modules.unperturbed_geometry import hamiltonian


# ==================== STATES AND INTEGRATION ====================


def test_state_rejects_non_finite():
    with pytest.raises(NonFinite):
        State(math.nan, 0.0)


def test_state_energy():
    assert State(1.0, 0.0).energy() == pytest.approx(-0.25)


def test_unperturbed_flow_keeps_energy():
    s0 = State(0.5, 0.1)
    end, traj = integrate(s0, 0.0, 10.0, Params(epsilon=0.0), samples=101)
    assert traj.shape == (101, 3)
    assert_allclose(hamiltonian(traj[:, 1], traj[:, 2]), s0.energy(), atol=1e-7)
    assert end.x == pytest.approx(traj[-1, 1])


def test_backward_integration_returns():
    params = Params(0.1, 0.7, 0.3, 1.0, 4.0)
    s0 = State(0.3, -0.2)
    forward = integrate(s0, 0.0, 2.0, params, rtol=1e-11, atol=1e-11)
    back = integrate(forward, 2.0, 0.0, params, rtol=1e-11, atol=1e-11)
    assert back.x == pytest.approx(s0.x, abs=1e-8)
    assert back.y == pytest.approx(s0.y, abs=1e-8)


def test_solve_accepts_a_list_seed_with_events():
    rhs = _make_rhs(Params(epsilon=0.0), Variant.ORIGINAL)

    def crossing(t, z):
        return rhs(t, z)[0]

    sol = _solve(rhs, 0.0, 20.0, [0.1, 0.01], 1e-10, 1e-12, events=crossing)
    assert sol.y.shape[0] == 2
    assert len(sol.t_events[0]) >= 1


# ==================== STROBOSCOPIC MAP ====================


def test_map_needs_forcing_frequency():
    with pytest.raises(DomainError):
        StroboscopicMap(Params(p4=0.0))


def test_map_inverse_round_trip():
    strobe = StroboscopicMap(Params(0.1, 0.7, 0.3, 1.0, 4.0))
    points = np.array([[0.2, -0.1], [-0.3, 0.05], [1.0, 0.0]])
    assert_allclose(strobe.apply(strobe.apply(points), inverse=True), points, atol=1e-8)
    s = State(0.2, -0.1)
    back = strobe.inverse(strobe(s))
    assert back.x == pytest.approx(s.x, abs=1e-8)


def test_jacobian_matches_finite_differences():
    strobe = StroboscopicMap(Params(0.1, 0.7, 0.3, 1.0, 4.0))
    z = np.array([0.2, -0.1])
    image, jac = strobe.jacobian(z)
    assert_allclose(image, strobe.apply(z)[0], atol=1e-10)
    h = 1e-6
    for col in range(2):
        dz = np.zeros(2)
        dz[col] = h
        fd = (strobe.apply(z + dz)[0] - strobe.apply(z - dz)[0]) / (2 * h)
        assert_allclose(jac[:, col], fd, atol=1e-5)


def test_poincare_orbit_and_cloud():
    strobe = StroboscopicMap(Params(0.1, 0.0, 0.0, 0.5, 2.0))
    orbit = poincare(strobe, State(1.0, 0.0), 3)
    assert len(orbit) == 4
    assert orbit[0] == State(1.0, 0.0)
    cloud = poincare_cloud(strobe, [[1.0, 0.0], [-1.0, 0.1]], 4, skip=1)
    assert cloud.shape == (6, 4)
    assert set(cloud[:, 1]) == {2.0, 3.0, 4.0}
    assert_allclose(cloud[cloud[:, 0] == 0][0, 2:], poincare(strobe, State(1.0, 0.0), 2)[-1].as_array())


def test_unforced_map_keeps_energy_over_a_thousand_iterates():
    strobe = StroboscopicMap(Params(epsilon=0.0, p1=0.7, p2=0.3, p3=1.0, p4=4.0))
    orbit = poincare(strobe, State(1.2, 0.0), 1000)
    energies = np.array([s.energy() for s in orbit])
    assert np.max(np.abs(energies - energies[0])) < 1e-9


# ==================== SADDLE ====================


def test_unperturbed_saddle_multipliers():
    fp = find_saddle(StroboscopicMap(Params(epsilon=0.0, p4=4.0), Variant.TRANSFORMED))
    lam_u, lam_s = fp.eigenvalues
    assert lam_u == pytest.approx(math.exp(math.pi / 2), rel=1e-8)
    assert lam_s == pytest.approx(math.exp(-math.pi / 2), rel=1e-8)
    assert_allclose(fp.unstable_direction, [math.sqrt(0.5), math.sqrt(0.5)], atol=1e-8)
    assert_allclose(fp.stable_direction, [math.sqrt(0.5), -math.sqrt(0.5)], atol=1e-8)


def test_transformed_saddle_stays_at_origin():
    params = Params(0.1, 0.7, 0.3, 1.0, 4.0)
    fp = find_saddle(StroboscopicMap(params, Variant.TRANSFORMED))
    assert_allclose(fp.location.as_array(), [0.0, 0.0], atol=1e-10)
    # area contraction over one period: exp(eps p1 T)
    lam_u, lam_s = fp.eigenvalues
    assert lam_u * lam_s == pytest.approx(math.exp(params.epsilon * params.p1 * params.forcing_period), rel=1e-8)


def test_original_saddle_follows_forced_response():
    params = Params(epsilon=0.01, p1=0.0, p2=0.0, p3=1.0, p4=4.0)
    fp = find_saddle(StroboscopicMap(params))
    expected_y = -params.epsilon * params.p3 * params.p4 / (1.0 + params.p4 ** 2)
    assert fp.location.x == pytest.approx(0.0, abs=1e-8)
    assert fp.location.y == pytest.approx(expected_y, abs=1e-8)
    assert fp.residual < 1e-10


# ==================== POLYLINES ====================


def test_branches_intersect_crossing_segments():
    hits = branches_intersect([[0.0, 0.0], [1.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]])
    assert_allclose(hits, [[0.5, 0.5]])
    assert branches_intersect([[0.0, 0.0], [1.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]], exclude_center=(0.5, 0.5), exclude_radius=0.1).shape == (0, 2)


def test_branches_intersect_misses():
    assert branches_intersect([[0.0, 0.0], [1.0, 0.0]], [[0.0, 1.0], [1.0, 1.0]]).shape == (0, 2)
    assert branches_intersect([[0.0, 0.0]], [[0.0, 1.0], [1.0, 0.0]]).shape == (0, 2)


def test_branches_intersect_counts_every_crossing():
    x = np.linspace(0.0, 4.5 * math.pi, 401)
    wave = np.column_stack([x, np.sin(x)])
    axis = np.array([[-1.0, 0.0], [20.0, 0.0]])
    hits = branches_intersect(wave, axis, exclude_center=(0.0, 0.0), exclude_radius=0.5)
    assert hits.shape[0] == 4
    assert_allclose(np.sort(hits[:, 0]), [math.pi, 2 * math.pi, 3 * math.pi, 4 * math.pi], atol=1e-3)


def _branch(side, points):
    return ManifoldBranch(side=side, sign=1, points=np.array(points, dtype=float))


def test_splitting_report_verdicts():
    u = _branch("unstable", [[0.0, 0.0], [2.0, 1.0]])
    crossing = _branch("stable", [[0.0, 0.0], [0.5, 0.5], [1.5, -0.5]])
    report = splitting_report(u, crossing)
    assert report.verdict is SplitVerdict.TRANSVERSAL
    assert_allclose(report.intersections, [[2.0 / 3.0, 1.0 / 3.0]])
    assert report.profile.shape == (1, 2)

    apart = _branch("stable", [[0.0, 0.0], [0.5, -1.0], [1.5, -1.0]])
    assert splitting_report(u, apart).verdict is SplitVerdict.DISJOINT


def test_splitting_report_argument_checks():
    u = _branch("unstable", [[0.0, 0.0], [0.1, 0.1]])
    s = _branch("stable", [[0.0, 0.0], [0.1, -0.1]])
    with pytest.raises(DomainError):
        splitting_report(s, u)
    with pytest.raises(SectionAmbiguity):
        splitting_report(u, s)


def test_grow_manifold_side():
    fp = find_saddle(StroboscopicMap(Params(epsilon=0.0, p4=4.0), Variant.TRANSFORMED))
    with pytest.raises(DomainError):
        grow_manifold(fp, side="sideways")


# ==================== AUTONOMOUS CONNECTIONS ====================


@pytest.mark.parametrize("p1", [0.5, 1.1])
def test_return_defect_follows_the_loop_condition(p1):
    eps = 0.12
    result = autonomous_connection(p1, 0.0, eps)
    assert result.kind is ConnectionKind.NONE
    # first order: eps times the Melnikov mean
    assert result.right_defect == pytest.approx(2 * eps * loop_condition(p1, 0.0, LoopSide.RIGHT), rel=0.3)


def test_left_defect_is_the_mirrored_right_defect():
    a = autonomous_connection(0.7, 0.4, 0.12)
    b = autonomous_connection(0.7, -0.4, 0.12)
    assert a.left_defect == b.right_defect
    assert a.right_defect == b.left_defect


# ==================== PORTRAITS AND SCENARIOS ====================


def test_sample_portrait_shape():
    params = Params(epsilon=0.1, p1=0.0, p2=0.0, p3=0.0, p4=1.0)
    trajectories = sample_portrait(params, [[0.5, 0.0], [-1.2, 0.1]], 5.0, n=50)
    assert len(trajectories) == 2
    assert all(traj.shape == (50, 3) for traj in trajectories)
    assert_allclose(trajectories[0][0], [0.0, 0.5, 0.0])


def test_scenarios():
    strobe = scenario_map("fig8b")
    assert strobe.variant is Variant.TRANSFORMED
    assert strobe.params.p3 == 1.7
    assert SCENARIOS["fig11a"].epsilon == 0.12
    with pytest.raises(DomainError):
        scenario_map("fig99")


# ==================== LONG CHECKS ====================


@pytest.mark.slow
def test_unperturbed_manifold_lies_on_the_separatrix():
    fp = find_saddle(StroboscopicMap(Params(epsilon=0.0, p4=4.0), Variant.TRANSFORMED))
    branch = grow_manifold(fp, "unstable", 1, budget=2.0)
    assert not branch.truncated
    assert branch.arclength == pytest.approx(2.0, abs=0.05)
    assert branch.max_gap <= 0.02 + 1e-12
    assert_allclose(hamiltonian(branch.points[:, 0], branch.points[:, 1]), 0.0, atol=1e-8)
    assert np.all(branch.points[1:, 0] > 0.0)


@pytest.mark.slow
def test_small_eps_splitting_follows_the_melnikov_integral():
    params = Params(epsilon=0.01, p1=0.7, p2=0.3, p3=3.5, p4=4.0)
    profile = splitting_profile(params, "right")
    expected = np.array([melnikov_integral(t0, 0.7, 0.3, 3.5, 4.0, LoopSide.RIGHT) for t0 in profile.t0])
    assert_allclose(profile.delta_h / params.epsilon, expected, atol=0.05)
    assert profile.verdict is SplitVerdict.TRANSVERSAL


@pytest.mark.slow
def test_splitting_error_shrinks_with_eps():
    errors = []
    for eps in (0.01, 0.005, 0.002):
        profile = splitting_profile(Params(epsilon=eps, p1=0.7, p2=0.3, p3=3.5, p4=4.0), "right")
        expected = np.array([melnikov_integral(t0, 0.7, 0.3, 3.5, 4.0, LoopSide.RIGHT) for t0 in profile.t0])
        errors.append(np.max(np.abs(profile.delta_h / eps - expected)) / np.max(np.abs(expected)))
    assert max(errors) <= 0.2
    assert errors[0] > errors[1] > errors[2]


@pytest.mark.slow
def test_tangency_near_the_integrated_threshold():
    params = Params(epsilon=0.12, p1=0.7, p2=0.3, p4=4.0)
    p3 = tangency_p3(params, "right", 2.4, 3.6, xtol=1e-4)
    assert p3 == pytest.approx(integrated_threshold_p3(0.7, 0.3, 4.0, LoopSide.RIGHT), rel=0.1)


@pytest.mark.slow
@pytest.mark.parametrize(
    "p1,bracket,expected",
    [
        (0.78, (0.2, 0.32), 0.25838),
        (0.78, (1.0, 1.2), 1.0983),
        (0.8, (1.7, 1.9), 1.788),
        (0.82, (2.2, 2.4), 2.28515),
    ],
)
def test_big_loop_points(p1, bracket, expected):
    p2 = locate_connection(p1, *bracket, kind=ConnectionKind.BIG_LOOP, epsilon=0.12, xtol=1e-6)
    assert p2 == pytest.approx(expected, abs=0.01)


@pytest.mark.slow
def test_traced_tangency_column():
    trace = trace_tangency_curve(0.7, 4.0, 0.12, "right", [0.3], (2.0, 4.0), n_p3=5)
    assert len(trace.curves) == 1
    assert trace.curves[0].shape == (1, 2)
    assert trace.curves[0][0, 1] == pytest.approx(integrated_threshold_p3(0.7, 0.3, 4.0, LoopSide.RIGHT), rel=0.1)
    assert trace.ambiguous == []
    assert trace.intersections.shape == (0, 2)
