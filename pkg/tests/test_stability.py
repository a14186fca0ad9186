import math

import numpy as np
import pytest

from drplane import Ellipse, Line, PSphere, feasible_points
from drplane.dynamics import dr_step, dr_step_two_lines
from drplane.exceptions import (
    DegenerateLine,
    EvaluationFailure,
    NonMinimalPeriod,
    OffSet,
    PeriodicPointNotFound,
    SingularGradient,
)
from drplane.geometry import Region
from drplane.stability import (
    ATTRACTIVE,
    NEUTRAL,
    REPELLING,
    eigen_modulus_sq,
    find_periodic_point,
    local_convergence_certificate,
    numeric_jacobian,
    periodic_scan,
    tangent_line_at,
    tangent_projection_matrix,
    two_line_dr_matrix,
    two_line_projection_matrix,
)

RNG = np.random.default_rng(99)

E2 = Ellipse(2.0)
L2 = Line.from_slope_intercept(2.0, 0.0)
XAXIS = Line.from_slope_intercept(0.0, 0.0)
DIAG = Line.from_slope_intercept(1.0, 0.0)
F = np.array([1.0, 2.0]) / math.sqrt(2.0)


def test_numeric_jacobian_identity():
    J = numeric_jacobian(lambda x: x, np.array([0.4, -2.0]))
    assert np.allclose(J, np.eye(2), atol=1e-10)


def test_numeric_jacobian_two_lines():
    J = numeric_jacobian(lambda x: dr_step_two_lines(XAXIS, DIAG, x), np.array([0.3, 0.9]))
    assert np.allclose(J, [[0.5, 0.5], [-0.5, 0.5]], atol=1e-6)


def test_numeric_jacobian_projection_at_vertex():
    J = numeric_jacobian(lambda x: E2.project(x), np.array([1.0, 0.0]))
    assert np.allclose(J, [[0.0, 0.0], [0.0, 1.0]], atol=1e-5)


def test_numeric_jacobian_failure():
    def bad(x):
        raise RuntimeError("boom")

    with pytest.raises(EvaluationFailure):
        numeric_jacobian(bad, np.array([0.0, 0.0]))


def test_projection_matrix_axes():
    assert np.allclose(two_line_projection_matrix(XAXIS), [[1, 0], [0, 0]], atol=1e-15)
    yaxis = Line.from_normal(1.0, 0.0, 0.0)
    assert np.allclose(two_line_projection_matrix(yaxis), [[0, 0], [0, 1]], atol=1e-15)


def test_projection_matrix_diagonal():
    M = two_line_projection_matrix(DIAG)
    assert np.allclose(M, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)
    # symmetric idempotent with unit trace
    assert np.allclose(M, M.T)
    assert np.allclose(M @ M, M, atol=1e-15)
    assert abs(np.trace(M) - 1.0) <= 1e-15


def test_projection_matrix_requires_origin():
    with pytest.raises(DegenerateLine):
        two_line_projection_matrix(Line.from_slope_intercept(1.0, 1.0))


def test_dr_matrix_cases():
    assert np.allclose(two_line_dr_matrix(DIAG, DIAG), np.eye(2), atol=1e-15)
    yaxis = Line.from_normal(1.0, 0.0, 0.0)
    assert np.allclose(two_line_dr_matrix(XAXIS, yaxis), np.zeros((2, 2)), atol=1e-15)
    assert np.allclose(two_line_dr_matrix(XAXIS, DIAG), [[0.5, 0.5], [-0.5, 0.5]], atol=1e-15)


def test_eigen_modulus_cases():
    yaxis = Line.from_normal(1.0, 0.0, 0.0)
    assert eigen_modulus_sq(XAXIS, yaxis) == 0.0
    assert abs(eigen_modulus_sq(DIAG, DIAG) - 1.0) <= 1e-15
    assert abs(eigen_modulus_sq(XAXIS, DIAG) - 0.5) <= 1e-15


def test_analytic_numeric_jacobian_agreement():
    for _ in range(100):
        m1, m2 = RNG.uniform(-8, 8, 2)
        L1 = Line.from_slope_intercept(m1, 0.0)
        L2_ = Line.from_slope_intercept(m2, 0.0)
        J = numeric_jacobian(lambda x: dr_step_two_lines(L1, L2_, x), RNG.normal(size=2))
        M = two_line_dr_matrix(L1, L2_)
        assert np.abs(J - M).max() <= 1e-5


def test_eigen_consistency_with_numeric_eigvals():
    for _ in range(50):
        m1, m2 = RNG.uniform(-5, 5, 2)
        L1 = Line.from_slope_intercept(m1, 0.0)
        L2_ = Line.from_slope_intercept(m2, 0.0)
        ev = np.linalg.eigvals(two_line_dr_matrix(L1, L2_))
        want = eigen_modulus_sq(L1, L2_)
        for lam in ev:
            assert abs(abs(lam) ** 2 - want) <= 1e-10


def test_tangent_line_examples():
    t1 = tangent_line_at(E2, np.array([1.0, 0.0]))
    assert np.allclose([abs(t1.alpha), abs(t1.beta)], [1.0, 0.0], atol=1e-12)
    t2 = tangent_line_at(E2, np.array([0.0, 2.0]))
    assert np.allclose([abs(t2.alpha), abs(t2.beta)], [0.0, 1.0], atol=1e-12)
    t3 = tangent_line_at(E2, F)
    n = np.array([F[0], F[1] / 4.0])
    n /= np.linalg.norm(n)
    assert np.allclose([t3.alpha, t3.beta], n, atol=1e-12)
    assert t3.residual(F) <= 1e-12


def test_tangent_line_off_set():
    with pytest.raises(OffSet):
        tangent_line_at(E2, np.array([5.0, 5.0]))


def test_tangent_line_cusp_singular():
    with pytest.raises(SingularGradient):
        tangent_line_at(PSphere(0.5), np.array([1.0, 0.0]))


def test_tangent_projection_matrix_vertices():
    assert np.allclose(tangent_projection_matrix(E2, [1.0, 0.0]), [[0, 0], [0, 1]], atol=1e-14)
    assert np.allclose(tangent_projection_matrix(E2, [0.0, 2.0]), [[1, 0], [0, 0]], atol=1e-14)


def test_tangent_projection_matrix_is_projection_derivative():
    M = tangent_projection_matrix(E2, F)
    J = numeric_jacobian(lambda x: E2.project(x), F)
    assert np.abs(M - J).max() <= 1e-5
    # rank-1 symmetric idempotent
    assert np.allclose(M, M.T, atol=1e-13)
    assert np.allclose(M @ M, M, atol=1e-13)


def test_certificate_e2_l2():
    for f in feasible_points(E2, L2):
        cert = local_convergence_certificate(E2, L2, f)
        assert abs(cert.eigen_modulus_sq - 0.36) <= 1e-9
        assert cert.locally_convergent


def test_certificate_tangential():
    b = 2.0
    cert = local_convergence_certificate(Ellipse(b), Line.from_slope_intercept(0.0, b), np.array([0.0, b]))
    assert abs(cert.eigen_modulus_sq - 1.0) <= 1e-12
    assert not cert.locally_convergent


def test_certificate_circle_secant():
    line = Line.from_slope_intercept(0.5, 0.3)
    circle = PSphere(2.0)
    for f in feasible_points(circle, line):
        cert = local_convergence_certificate(circle, line, f)
        assert cert.eigen_modulus_sq < 1.0
        assert cert.locally_convergent


def test_certificate_soundness_empirical():
    # orbits started near a certified point converge to it
    for f in feasible_points(E2, L2):
        cert = local_convergence_certificate(E2, L2, f)
        assert cert.eigen_modulus_sq <= 0.9
        for _ in range(10):
            x = f + RNG.normal(scale=1e-4, size=2)
            for _ in range(500):
                x = dr_step(E2, L2, x)
            assert np.linalg.norm(x - f) <= 1e-10


def test_find_fixed_point_near_feasible():
    pp = find_periodic_point(E2, L2, F + [1e-3, -1e-3], 1)
    assert pp.period == 1
    assert np.linalg.norm(pp.point - F) <= 1e-9
    assert pp.classification == ATTRACTIVE
    assert pp.residual <= 1e-9


def test_find_periodic_point_continuum():
    seed = np.array([-0.2, 0.2])
    pp = find_periodic_point(PSphere(0.5), DIAG, seed, 2)
    assert pp.period == 2
    assert np.linalg.norm(pp.point - seed) <= 1e-6
    assert pp.classification == NEUTRAL
    assert pp.residual <= 1e-9


def test_find_periodic_point_nonminimal():
    with pytest.raises(NonMinimalPeriod) as ei:
        find_periodic_point(E2, L2, F + [1e-4, 1e-4], 2)
    assert ei.value.found.period == 1


def test_find_periodic_point_not_found():
    with pytest.raises(PeriodicPointNotFound):
        # divergent configuration has no periodic points
        find_periodic_point(PSphere(2.0), Line.from_slope_intercept(0.0, 2.0), np.array([0.1, 0.1]), 2)


def test_scan_e2_l2_finds_repelling_pair():
    pts = periodic_scan(E2, L2, Region(-4, 4, -4, 4), 2)
    periods = sorted(p.period for p in pts)
    assert periods == [1, 1, 2]
    two = [p for p in pts if p.period == 2][0]
    assert two.classification == REPELLING
    # frozen regression fixture (independently confirmed by plain iteration:
    # two applications of the step return the point to ~1e-12)
    assert np.allclose(np.abs(two.point), [0.42332030273319, 0.32442330242242], atol=1e-9)
    # orbit-shift closure: the image is an equally valid period-2 point
    img = dr_step(E2, L2, two.point)
    x = img
    for _ in range(2):
        x = dr_step(E2, L2, x)
    assert np.linalg.norm(x - img) <= 1e-8
    # the orbit is the symmetric pair {z, -z}
    assert np.linalg.norm(img + two.point) <= 1e-6


def test_scan_circle_secant_no_higher_periods():
    circle = PSphere(2.0)
    line = Line.from_slope_intercept(0.7, 0.1)
    pts = periodic_scan(circle, line, Region(-2, 2, -2, 2), 3, grid=16)
    assert all(p.period == 1 for p in pts)


def test_scan_classification_soundness():
    pts = periodic_scan(E2, Line.from_slope_intercept(1.0, 0.0), Region(-4, 4, -4, 4), 2)
    for pp in pts:
        if pp.classification == ATTRACTIVE:
            x = pp.point + np.array([1e-5, 0.0])
            for _ in range(100):
                for _ in range(pp.period):
                    x = dr_step(E2, Line.from_slope_intercept(1.0, 0.0), x)
            assert np.linalg.norm(x - pp.point) <= 1e-5
        elif pp.classification == REPELLING:
            x = pp.point + np.array([1e-5, 0.0])
            escaped = False
            for _ in range(2000):
                for _ in range(pp.period):
                    x = dr_step(E2, Line.from_slope_intercept(1.0, 0.0), x)
                if np.linalg.norm(x - pp.point) > 1e-3:
                    escaped = True
                    break
            assert escaped


def test_scan_sorted_and_deduplicated():
    pts = periodic_scan(E2, L2, Region(-4, 4, -4, 4), 3)
    keys = [(p.period, p.point[0], p.point[1]) for p in pts]
    assert keys == sorted(keys)
    for i, a in enumerate(pts):
        for b in pts[i + 1 :]:
            if a.period == b.period:
                assert np.linalg.norm(a.point - b.point) > 1e-6
