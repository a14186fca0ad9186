"""Infeasible-case machinery.

When the sets are strictly separated, every step of the iteration moves by
an element of B - A, so the value of a separating functional grows by at
least the gap per step: the iterates march to infinity linearly.  The
projected iterates (the shadow sequence) still converge, to a point of the
compact set attaining the gap; the asymptotic per-step drift estimates the
minimal displacement vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    NonConvergedShadow,
    NotSeparable,
    TheoremNotApplicable,
    UnsupportedPair,
)
from .geometry import ConstraintSet, Ellipse, Line, PSphere, as_point, set_distance
from .dynamics import dr_step
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "SeparationCertificate",
    "DivergenceReport",
    "ShadowReport",
    "separating_functional",
    "verify_linear_divergence",
    "estimate_minimal_displacement",
    "shadow_limit",
]


@dataclass(frozen=True)
class SeparationCertificate:
    """Functional f(x) = <normal, x> - offset, negative on A, positive on B."""

    normal: np.ndarray
    offset: float
    gap: float

    def value(self, q):
        q = np.asarray(q, dtype=float)
        return q[..., 0] * self.normal[0] + q[..., 1] * self.normal[1] - self.offset


@dataclass(frozen=True)
class DivergenceReport:
    steps: int
    min_functional_increment: float
    gap: float
    monotone: bool
    displacement_estimate: np.ndarray


@dataclass(frozen=True)
class ShadowReport:
    point: np.ndarray
    on_set_residual: float
    translate_residual: float
    displacement: np.ndarray


def _split_line_compact(A, B):
    if isinstance(A, Line) and not isinstance(B, Line):
        return A, B, "A"
    if isinstance(B, Line) and not isinstance(A, Line):
        return B, A, "B"
    raise UnsupportedPair("expected exactly one line and one compact curve")


def separating_functional(A: ConstraintSet, B: ConstraintSet, tols: Tolerances = DEFAULT) -> SeparationCertificate:
    """Hyperplane parallel to the line, midway across the gap.

    Oriented so the functional is negative on A and positive on B,
    whichever of the two is the line.
    """
    line, comp, line_slot = _split_line_compact(A, B)
    gap = set_distance(A, B, tols)
    if gap <= 1e-12:
        raise NotSeparable("sets intersect or touch; no strictly separating hyperplane")
    n = line.normal
    c_line = line.gamma  # <n, x> on the line
    # sign of <n, x> - c_line on the compact set
    probe = comp.parametric(np.array([0.0]))[0]
    side = math.copysign(1.0, float(np.dot(n, probe)) - c_line)
    # orient so the functional increases from the compact set toward the line
    if line_slot == "B":
        normal = -side * n
    else:
        normal = side * n
    c_line_oriented = float(np.dot(normal, line.normal)) * line.gamma
    # hyperplane midway between the line and the compact set's nearest point
    if line_slot == "B":
        offset = c_line_oriented - 0.5 * gap
    else:
        offset = c_line_oriented + 0.5 * gap
    return SeparationCertificate(normal=normal, offset=offset, gap=gap)


def verify_linear_divergence(
    A: ConstraintSet,
    B: ConstraintSet,
    x0,
    n: int,
    tols: Tolerances = DEFAULT,
) -> DivergenceReport:
    """Run n steps and check f(x_{k+1}) >= f(x_k) + gap for the certificate f.

    Also reports the tail-averaged displacement (the minimal-displacement
    estimate for the same run).
    """
    cert = separating_functional(A, B, tols)
    x = as_point(x0)
    traj = np.empty((n + 1, 2))
    traj[0] = x
    for k in range(1, n + 1):
        x = dr_step(A, B, x)
        traj[k] = x
    vals = cert.value(traj)
    increments = np.diff(vals)
    min_inc = float(increments.min())
    steps = np.diff(traj, axis=0)
    tail = max(1, n // 10)
    displacement = steps[-tail:].mean(axis=0)
    return DivergenceReport(
        steps=n,
        min_functional_increment=min_inc,
        gap=cert.gap,
        monotone=bool(min_inc >= cert.gap - 1e-9),
        displacement_estimate=displacement,
    )


def estimate_minimal_displacement(A: ConstraintSet, B: ConstraintSet, x0, n: int):
    """Average of x_{k+1} - x_k over the last n/10 steps."""
    if n < 100:
        raise ValueError("need at least 100 iterations for a tail estimate")
    x = as_point(x0)
    tail = max(1, n // 10)
    buf = np.empty((tail, 2))
    prev = x
    for k in range(1, n + 1):
        nxt = dr_step(A, B, prev)
        if k > n - tail:
            buf[k - (n - tail) - 1] = nxt - prev
        prev = nxt
    return buf.mean(axis=0)


def _is_convex_body_boundary(C) -> bool:
    if isinstance(C, Ellipse):
        return True
    if isinstance(C, PSphere):
        return C.p >= 1.0
    return False


def shadow_limit(A: ConstraintSet, B: ConstraintSet, x0, n: int, tols: Tolerances = DEFAULT) -> ShadowReport:
    """Final projected iterate P_A(x_n), with its membership residuals.

    Requires the boundaries of two disjoint closed convex sets (one
    compact): for the p-sphere that means p >= 1, otherwise the convexity
    hypothesis fails and no certificate is issued.  The report carries the
    distance of (shadow - v') to B, v' the tail-averaged displacement.
    """
    line, comp, _ = _split_line_compact(A, B)
    if not _is_convex_body_boundary(comp):
        raise TheoremNotApplicable(
            "compact set does not bound a convex body (p < 1); shadow limit not certified"
        )
    gap = set_distance(A, B, tols)
    if gap <= 1e-12:
        raise NotSeparable("sets intersect; the feasible theory applies instead")

    x = as_point(x0)
    prev_shadow = A.project(x)
    tail = max(1, n // 10)
    buf = np.empty((tail, 2))
    prev = x
    for k in range(1, n + 1):
        nxt = dr_step(A, B, prev)
        if k > n - tail:
            buf[k - (n - tail) - 1] = nxt - prev
        if k == n - 1:
            prev_shadow = A.project(nxt)
        prev = nxt
    shadow = A.project(prev)
    if float(np.linalg.norm(shadow - prev_shadow)) > 1e-6:
        raise NonConvergedShadow(
            f"shadow still moving by {np.linalg.norm(shadow - prev_shadow):.2e} after {n} steps"
        )
    displacement = buf.mean(axis=0)
    on_set = float(A.residual(shadow))
    # the limit lies in A intersected with the translate of B by the minimal
    # displacement vector of Id - T, which is MINUS the per-step drift; so
    # membership of (shadow + drift) in B is the statement being checked
    translate = shadow + displacement
    translate_residual = float(np.linalg.norm(B.project(translate) - translate))
    return ShadowReport(
        point=shadow,
        on_set_residual=on_set,
        translate_residual=translate_residual,
        displacement=displacement,
    )
