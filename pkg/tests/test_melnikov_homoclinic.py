"""Melnikov functions of the separatrix loops and the analytic tangency lines"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from modules.errors import DomainError, PreconditionWarning
from modules.melnikov_homoclinic import (
    LOOP_P2,
    LoopSide,
    Verdict,
    analytic_tangency_lines,
    delta1,
    diagram_letter,
    forcing_weight,
    integrated_threshold_p3,
    left_loop_delta1,
    left_loop_p2,
    left_loop_tangency_p3,
    loop_condition,
    melnikov_integral,
    melnikov_result,
    right_loop_p2,
    threshold_curve,
    threshold_p3_star,
    vertex_amplitude,
    x1_correction,
)


def test_loop_condition_vanishes_on_the_loop_line():
    for p1 in (0.5, 0.78, 1.1):
        assert loop_condition(p1, right_loop_p2(p1), LoopSide.RIGHT) == pytest.approx(0.0, abs=1e-14)
        assert loop_condition(p1, left_loop_p2(p1), LoopSide.LEFT) == pytest.approx(0.0, abs=1e-14)


def test_loops_coincide_at_p2_zero():
    assert right_loop_p2(0.8) == pytest.approx(0.0, abs=1e-14)


def test_mean_is_twice_the_loop_condition():
    _, result = delta1(0.0, 0.7, 0.3, 1.0, 4.0, LoopSide.RIGHT)
    assert result.mean == pytest.approx(2 * loop_condition(0.7, 0.3, LoopSide.RIGHT))
    assert result.amplitude == pytest.approx(forcing_weight(4.0))


def test_delta1_shape():
    t0 = np.linspace(0.0, 2.0, 7)
    values, result = delta1(t0, 0.7, 0.3, 1.0, 4.0, LoopSide.LEFT)
    assert values.shape == (7,)
    assert_allclose(values, result.mean + result.amplitude * np.cos(4.0 * t0))
    scalar, _ = delta1(0.5, 0.7, 0.3, 1.0, 4.0, LoopSide.LEFT)
    assert isinstance(scalar, float)


def test_threshold_is_a_tangency():
    p1, p2, p4 = 0.7, 0.3, 4.0
    p3 = threshold_p3_star(p1, p2, p4, LoopSide.RIGHT)
    assert melnikov_result(p1, p2, p3, p4, LoopSide.RIGHT).verdict is Verdict.TANGENT
    assert melnikov_result(p1, p2, 1.1 * p3, p4, LoopSide.RIGHT).verdict is Verdict.TRANSVERSAL
    assert melnikov_result(p1, p2, 0.9 * p3, p4, LoopSide.RIGHT).verdict is Verdict.NO_INTERSECTION


def test_threshold_curve_has_a_vertex_on_the_loop_line():
    p2 = np.linspace(-1.0, 1.0, 41)
    curve = threshold_curve(0.78, 4.0, p2, LoopSide.RIGHT)
    assert curve.shape == (41, 2)
    assert threshold_p3_star(0.78, right_loop_p2(0.78), 4.0, LoopSide.RIGHT) == pytest.approx(0.0, abs=1e-12)


def test_threshold_needs_forcing_frequency():
    with pytest.raises(DomainError):
        threshold_p3_star(0.7, 0.3, 0.0, LoopSide.RIGHT)
    with pytest.raises(DomainError):
        integrated_threshold_p3(0.7, 0.3, 0.0, LoopSide.RIGHT)


@pytest.mark.parametrize("side", list(LoopSide))
def test_integral_matches_mean_and_vertex_amplitude(side):
    p1, p2, p3, p4 = 0.7, 0.3, 1.5, 4.0
    mean = 2 * loop_condition(p1, p2, side)
    amp = vertex_amplitude(p3, p4, side)
    for t0 in (0.0, 0.3, 0.9, 1.4):
        assert melnikov_integral(t0, p1, p2, p3, p4, side) == pytest.approx(mean + amp * math.cos(p4 * t0), abs=1e-9)


def test_amplitude_ratio_of_closed_form_to_integral():
    for p4 in (1.0, 2.5, 4.0):
        ratio = forcing_weight(p4) / abs(vertex_amplitude(1.0, p4, LoopSide.RIGHT))
        assert ratio == pytest.approx(3.0 / (2.0 * math.sqrt(2.0)), rel=1e-14)


def test_integrated_threshold_is_larger():
    closed = threshold_p3_star(0.7, 0.3, 4.0, LoopSide.RIGHT)
    direct = integrated_threshold_p3(0.7, 0.3, 4.0, LoopSide.RIGHT)
    assert direct / closed == pytest.approx(3.0 / (2.0 * math.sqrt(2.0)))


def test_forced_response():
    t = np.linspace(0.0, 3.0, 11)
    x1 = x1_correction(t, 2.0, 4.0)
    # x1'' - x1 = p3 sin(p4 t)
    assert_allclose(-(4.0 ** 2) * x1 - x1, 2.0 * np.sin(4.0 * t), atol=1e-14)


def test_left_loop_tangency():
    assert left_loop_tangency_p3(0.053875454, 4.0) == pytest.approx(1.70, abs=1e-2)


def test_left_loop_delta1_touches_zero_at_tangency():
    p2, p4 = 0.053875454, 4.0
    p3 = left_loop_tangency_p3(p2, p4)
    t0 = np.linspace(0.0, 2 * math.pi / p4, 401)
    values = left_loop_delta1(t0, p2, p3, p4)
    assert values.min() == pytest.approx(-2 * 0.5 * math.pi * math.sqrt(2.0) * p2, rel=1e-3)
    assert values.max() == pytest.approx(0.0, abs=1e-6)


def test_left_loop_precondition_warning():
    with pytest.warns(PreconditionWarning):
        left_loop_delta1(0.0, 0.3, 1.0, 4.0, p1=0.0)


def test_diagram_letters():
    assert diagram_letter(0.78) == "M"
    assert diagram_letter(0.8) == "N"
    assert diagram_letter(0.82) == "R"


def test_coincidence_line():
    lines = analytic_tangency_lines(0.8, 4.0)
    assert [line.label for line in lines] == ["N1"]
    assert set(lines[0].sides) == {LoopSide.RIGHT, LoopSide.LEFT}
    assert lines[0].intercept == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("p1,vee", [(0.78, LoopSide.RIGHT), (0.82, LoopSide.LEFT)])
def test_three_lines_off_coincidence(p1, vee):
    lines = {line.label[1]: line for line in analytic_tangency_lines(p1, 4.0)}
    assert sorted(lines) == ["1", "2", "3"]
    vertex = abs(loop_condition(p1, 0.0, LoopSide.RIGHT)) / LOOP_P2
    assert lines["2"].sides == (vee,)
    assert lines["2"].p3(vertex) == pytest.approx(0.0, abs=1e-12)
    assert lines["3"].p3(vertex) == pytest.approx(0.0, abs=1e-12)
    # every line follows the threshold of its loop
    for line in lines.values():
        p2 = 0.5 * (line.p2_min + line.p2_max)
        assert line.p3(p2) == pytest.approx(threshold_p3_star(p1, p2, 4.0, line.sides[0]), rel=1e-10)


def test_mirrored_line():
    line = analytic_tangency_lines(0.78, 4.0)[0]
    image = line.mirrored()
    assert image.label == "M1'"
    assert image.p3(-0.4) == pytest.approx(line.p3(0.4))
    assert image.sides == (line.sides[0].other,)
