import math

import numpy as np
import pytest

from drplane import Ellipse, Line, PSphere, gap_attaining_point, reflect, set_distance
from drplane.divergence import (
    estimate_minimal_displacement,
    separating_functional,
    shadow_limit,
    verify_linear_divergence,
)
from drplane.dynamics import dr_step
from drplane.exceptions import NotSeparable, TheoremNotApplicable, UnsupportedPair

RNG = np.random.default_rng(7)

CIRCLE = PSphere(2.0)
LINE_Y2 = Line.from_slope_intercept(0.0, 2.0)
E2 = Ellipse(2.0)
FAR_LINE = Line.from_slope_intercept(1.0, 10.0)


def test_separating_functional_circle():
    cert = separating_functional(CIRCLE, LINE_Y2)
    assert np.allclose(cert.normal, [0.0, 1.0], atol=1e-12)
    assert abs(cert.gap - 1.0) <= 1e-12
    # hyperplane y = 1.5
    assert abs(cert.offset - 1.5) <= 1e-9


def test_separating_functional_signs_dense():
    cert = separating_functional(E2, FAR_LINE)
    samples = E2.boundary_samples(10_000)
    assert np.all(cert.value(samples) < 0.0)
    pts = FAR_LINE.points_along(10_000, 50.0)
    assert np.all(cert.value(pts) > 0.0)
    assert abs(cert.gap - (10.0 - math.sqrt(5.0)) / math.sqrt(2.0)) <= 1e-10


def test_separating_functional_swapped_slots():
    cert = separating_functional(LINE_Y2, CIRCLE)
    # now the line is A: negative on the line, positive on the circle
    pts = LINE_Y2.points_along(1000, 20.0)
    assert np.all(cert.value(pts) < 0.0)
    assert np.all(cert.value(CIRCLE.boundary_samples(1000)) > 0.0)


def test_separating_functional_feasible_raises():
    with pytest.raises(NotSeparable):
        separating_functional(E2, Line.from_slope_intercept(2.0, 0.0))


def test_separating_functional_two_compacts_unsupported():
    with pytest.raises(UnsupportedPair):
        separating_functional(E2, CIRCLE)


def test_verify_linear_divergence_circle():
    rep = verify_linear_divergence(CIRCLE, LINE_Y2, np.array([0.0, 0.0]), 1000)
    assert rep.monotone
    assert rep.min_functional_increment >= 1.0 - 1e-9
    assert abs(rep.gap - 1.0) <= 1e-12


def test_verify_linear_divergence_ellipse():
    rep = verify_linear_divergence(E2, FAR_LINE, np.array([5.0, -5.0]), 1000)
    assert rep.monotone
    assert rep.min_functional_increment >= rep.gap - 1e-9


def test_verify_linear_divergence_nonconvex_curve():
    rep = verify_linear_divergence(PSphere(0.5), LINE_Y2, np.array([0.3, 0.1]), 500)
    assert rep.monotone


def test_step_membership_identity_along_run():
    x = np.array([0.2, -0.3])
    for _ in range(200):
        nxt = dr_step(CIRCLE, LINE_Y2, x)
        rhs = LINE_Y2.project(reflect(CIRCLE, x)) - CIRCLE.project(x)
        assert np.linalg.norm((nxt - x) - rhs) <= 1e-12
        x = nxt


def test_norm_growth_linear():
    n = 2000
    x = np.array([0.1, 0.0])
    cert = separating_functional(CIRCLE, LINE_Y2)
    for _ in range(n):
        x = dr_step(CIRCLE, LINE_Y2, x)
    assert np.linalg.norm(x) >= n * cert.gap - 10.0


def test_displacement_estimate_circle():
    v = estimate_minimal_displacement(CIRCLE, LINE_Y2, np.array([0.2, 0.1]), 2000)
    assert np.allclose(v, [0.0, 1.0], atol=1e-6)


def test_displacement_estimate_feasible_vanishes():
    v = estimate_minimal_displacement(E2, Line.from_slope_intercept(2.0, 0.0), np.array([0.3, 0.3]), 500)
    assert np.linalg.norm(v) <= 1e-8


def test_displacement_estimate_ellipse_parallel_to_normal():
    v = estimate_minimal_displacement(E2, FAR_LINE, np.array([0.0, 0.0]), 4000)
    gap = set_distance(E2, FAR_LINE)
    assert abs(np.linalg.norm(v) - gap) <= 1e-5
    n = FAR_LINE.normal
    cosang = abs(np.dot(v, n)) / np.linalg.norm(v)
    assert abs(cosang - 1.0) <= 1e-8


def test_shadow_limit_circle():
    rep = shadow_limit(CIRCLE, LINE_Y2, np.array([3.0, 0.0]), 2000)
    assert np.allclose(rep.point, [0.0, 1.0], atol=1e-6)
    assert rep.on_set_residual <= 1e-10
    assert rep.translate_residual <= 1e-6
    assert abs(np.linalg.norm(rep.displacement) - 1.0) <= 1e-6


def test_shadow_limit_ellipse_hits_gap_attainer():
    rep = shadow_limit(E2, FAR_LINE, np.array([0.0, 0.0]), 4000)
    want = gap_attaining_point(E2, FAR_LINE)
    assert np.linalg.norm(rep.point - want) <= 1e-6


def test_shadow_limit_constant_start():
    # start at the gap attaining point of the circle
    rep = shadow_limit(CIRCLE, LINE_Y2, np.array([0.0, 1.0]), 1000)
    assert np.allclose(rep.point, [0.0, 1.0], atol=1e-8)


def test_shadow_limit_refuses_nonconvex():
    with pytest.raises(TheoremNotApplicable):
        shadow_limit(PSphere(0.5), LINE_Y2, np.array([0.0, 0.0]), 1000)


def test_shadow_limit_feasible_raises():
    with pytest.raises(NotSeparable):
        shadow_limit(E2, Line.from_slope_intercept(2.0, 0.0), np.array([0.0, 0.0]), 1000)
