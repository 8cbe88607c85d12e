"""Generating functions, cycle census and the autonomous bifurcation set"""

import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from modules.autonomous_analysis import (
    B1,
    B10,
    B2,
    C_FOCUS,
    C_P2,
    DOMAIN_TYPES,
    bifurcation_lines,
    census_counts,
    census_plane,
    double_cycle_curve,
    double_cycle_endpoints,
    double_cycle_p1,
    domain_masks,
    find_cycles,
    g1_basis,
    g1_basis_derivative,
    g2_basis,
    g2_basis_derivative,
    generating_function,
    l3_value,
    locate_domain_samples,
)
from modules.errors import DomainError, NearSeparatrixWarning, NoSolution
from modules.unperturbed_geometry import DomainTag, level_from_rho, loop_integral


@pytest.mark.parametrize("rho", [0.1, 0.5, 0.9, 0.999])
@pytest.mark.parametrize("sign,domain", [("+", DomainTag.G1_PLUS), ("-", DomainTag.G1_MINUS)])
def test_B1_is_the_loop_integral(rho, sign, domain):
    p1, p2 = 0.7, 0.4
    direct = loop_integral(level_from_rho(rho, domain), (p1, p2, -1.0))
    assert B1(rho, p1, p2, sign) == pytest.approx(direct, rel=1e-7, abs=1e-13)


@pytest.mark.parametrize("rho", [0.55, 0.75, 0.95])
def test_B2_is_the_loop_integral(rho):
    direct = loop_integral(level_from_rho(rho, DomainTag.G2), (0.9, 0.4, -1.0))
    assert B2(rho, 0.9) == pytest.approx(direct, rel=1e-7, abs=1e-13)


def test_generating_function_dispatch():
    assert generating_function(0.5, 1.0, 0.2, DomainTag.G1_MINUS) == B1(0.5, 1.0, 0.2, "-")
    assert generating_function(0.7, 1.0, 5.0, DomainTag.G2) == B2(0.7, 1.0)


def test_separatrix_limit():
    p1, p2 = 0.6, 0.3
    assert B10(1.0 - 1e-12, p1, p2, "+") == pytest.approx(5 * p1 + C_P2 * p2 - 4.0, abs=1e-8)
    assert B10(1.0 - 1e-12, p1, p2, "-") == pytest.approx(5 * p1 - C_P2 * p2 - 4.0, abs=1e-8)


def test_focus_limit():
    p1, p2, rho = 2.0, 0.5, 1e-3
    assert B10(rho, p1, p2) / (C_FOCUS * rho * rho) == pytest.approx(p1 + p2 - 1.0, abs=0.02)


@pytest.mark.parametrize("rho", [0.2, 0.55, 0.8])
def test_basis_derivatives_match_differences(rho):
    h = 1e-6
    assert_allclose(
        g1_basis_derivative(rho),
        (np.array(g1_basis(rho + h)) - np.array(g1_basis(rho - h))) / (2 * h),
        rtol=1e-6,
        atol=1e-8,
    )
    rho2 = 0.5 + rho / 2
    assert_allclose(
        g2_basis_derivative(rho2),
        (np.array(g2_basis(rho2 + h)) - np.array(g2_basis(rho2 - h))) / (2 * h),
        rtol=1e-6,
        atol=1e-8,
    )


def test_B10_domain():
    with pytest.raises(DomainError):
        B10(1.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        B10(0.5, 0.0, 0.0, sign="x")


@pytest.mark.parametrize(
    "p1,p2,expected",
    [(0.5, 0.0, (0, 0, 0)), (0.9, 0.0, (1, 1, 1)), (2.0, 0.0, (0, 0, 1))],
)
def test_census_examples(p1, p2, expected):
    assert find_cycles(p1, p2).type == expected
    assert tuple(census_counts(p1, p2)[0]) == expected


def test_stability():
    outer = find_cycles(2.0, 0.0).cycles[0]
    assert outer.domain is DomainTag.G2
    assert outer.stable is True
    loops = find_cycles(0.9, 0.0).cycles
    assert all(c.stable is False for c in loops if c.domain.inside_loop)


def test_cycles_are_roots():
    census = find_cycles(0.9, 0.2)
    for cycle in census.cycles:
        assert generating_function(cycle.rho, 0.9, 0.2, cycle.domain) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("p1,p2", [(0.9, 0.3), (0.2, 1.0), (-0.2, 1.3)])
def test_mirror_symmetry(p1, p2):
    assert find_cycles(p1, p2).mirrored().type == find_cycles(p1, -p2).type


def test_random_draws_respect_the_cycle_bounds():
    rng = np.random.default_rng(7)
    p1 = rng.uniform(-1.5, 2.5, 400)
    p2 = rng.uniform(-2.5, 2.5, 400)
    counts = census_counts(p1, p2)
    assert counts.max() <= 2
    assert counts.sum(axis=1).max() <= 3
    assert_allclose(census_counts(p1, -p2), counts[:, [1, 0, 2]])


def test_draws_along_the_focus_lines_respect_the_cycle_bounds():
    rng = np.random.default_rng(11)
    p1 = rng.uniform(-3.0, 3.0, 4000)
    offset = rng.uniform(-1e-3, 1e-3, 4000)
    for sign in (1.0, -1.0):
        p2 = sign * (1.0 - p1) + offset
        counts = census_counts(p1, p2)
        assert counts.max() <= 2
        assert counts.sum(axis=1).max() <= 3
        assert_allclose(census_counts(p1, -p2), counts[:, [1, 0, 2]])


@pytest.mark.slow
def test_hundred_thousand_draws_respect_the_cycle_bounds():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        p1, p2 = rng.uniform(-3.0, 3.0, (2, 2000))
        counts = census_counts(p1, p2)
        assert counts.max() <= 2
        assert counts.sum(axis=1).max() <= 3
        assert_allclose(census_counts(p1, -p2), counts[:, [1, 0, 2]])


def test_census_plane_shape_and_symmetry():
    p1 = np.linspace(-0.5, 1.5, 5)
    p2 = np.linspace(-1.0, 1.0, 9)
    grid = census_plane(p1, p2)
    assert grid.shape == (5, 9, 3)
    assert_allclose(grid[:, ::-1, 0], grid[:, :, 1])


def test_l3_value():
    p1, rho = l3_value()
    assert p1 == pytest.approx(0.7523, abs=1e-3)
    assert 0.5 < rho < 1.0


def test_double_cycle_endpoints():
    ends = double_cycle_endpoints()
    assert_allclose(ends["focus"], (-1.0 / 3.0, 4.0 / 3.0), atol=1e-6)
    assert_allclose(double_cycle_endpoints("-")["focus"], (-1.0 / 3.0, -4.0 / 3.0), atol=1e-6)
    assert ends["separatrix"][0] == 0.0
    assert ends["separatrix"][1] == pytest.approx(64.0 / (15.0 * math.sqrt(2.0) * math.pi))
    assert ends["separatrix"][1] == pytest.approx(0.96, abs=0.01)
    assert double_cycle_endpoints("-")["separatrix"][1] < 0.0


def test_focus_end_of_the_double_cycle_curve():
    _, p1, p2 = double_cycle_curve(2, rho_range=(1e-3, 0.5))[0]
    assert (p1, p2) == pytest.approx(double_cycle_endpoints()["focus"], abs=1e-2)


def test_double_cycle_p1_brackets_the_two_cycle_lens():
    p1 = double_cycle_p1(1.22)
    assert p1 == pytest.approx(-0.2241, abs=5e-4)
    assert find_cycles(0.5 * (p1 + 1.0 - 1.22), 1.22).type == (2, 0, 0)
    with pytest.raises(NoSolution):
        double_cycle_p1(2.0)


def test_B10_keeps_its_precision_near_the_focus():
    rho, p1, p2 = 1e-4, 0.5, 0.5 + 1e-6
    delta = p1 + p2 - 1.0
    quartic = (-480.0 * p1 - 1920.0 * p2 + 2400.0) / 16384.0
    expected = 0.5 * math.pi * rho ** 2 * (3.75 * delta - 0.9375 * delta * rho + quartic * rho ** 2)
    assert B10(rho, p1, p2) == pytest.approx(expected, rel=1e-7)


def test_no_spurious_cycles_on_the_focus_line():
    assert find_cycles(-0.33, 1.33).i <= 2
    below = find_cycles(-0.33, 1.33 - 1e-9)
    assert below.i == 2
    assert min(c.rho for c in below.cycles if c.domain is DomainTag.G1_PLUS) < 0.01
    assert find_cycles(-0.33, 1.33 + 1e-9).i == 1


def test_double_cycle_curve_is_a_double_root():
    curve = double_cycle_curve(20)
    for rho, p1, p2 in curve[1:-1]:
        assert B10(rho, p1, p2) == pytest.approx(0.0, abs=1e-8)
        h = 1e-6
        slope = (B10(rho + h, p1, p2) - B10(rho - h, p1, p2)) / (2 * h)
        assert slope == pytest.approx(0.0, abs=1e-5)


def test_bifurcation_lines():
    lines = {line.name: line for line in bifurcation_lines(n=50)}
    assert set(lines) == {"L1+", "L1-", "L2+", "L2-", "L3", "DoubleCycleG1+", "DoubleCycleG1-"}
    assert lines["L1+"].residual(0.5, 0.5) == 0.0
    assert lines["L2+"].residual(0.0, 4.0 / C_P2) == pytest.approx(0.0, abs=1e-14)
    pts = lines["L1-"].sample((-1.0, 2.0), (-2.0, 2.0), n=31)
    assert_allclose(pts[:, 0] - pts[:, 1], 1.0)
    vertical = lines["L3"].sample((-1.0, 2.0), (-2.0, 2.0), n=5)
    assert np.all(vertical[:, 0] == vertical[0, 0])


def test_domain_samples_have_their_published_types():
    samples = locate_domain_samples()
    assert list(samples) == sorted(DOMAIN_TYPES, key=lambda d: int(d[1:]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearSeparatrixWarning)
        for name, point in samples.items():
            assert find_cycles(*point).type == DOMAIN_TYPES[name]


def test_domain_masks_are_disjoint():
    masks = domain_masks(np.linspace(-1.5, 1.5, 121), np.linspace(0.0, 2.5, 101))
    assert set(masks) == set(DOMAIN_TYPES) - {"D12"}
    assert all(mask.any() for mask in masks.values())
    assert np.sum([mask.astype(int) for mask in masks.values()], axis=0).max() == 1

