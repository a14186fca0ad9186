"""Local stability analysis and periodic-point detection.

Two ingredients: the closed-form operator algebra for a pair of lines
through the origin (projection matrix, iteration matrix, eigenvalue
modulus), and numeric machinery (finite-difference Jacobians, Newton
refinement of roots of T^m - I) for the nonlinear pairs.

The local-convergence certificate at a feasible point f linearizes the
conic by its tangent line at f and reports the squared eigenvalue modulus
of the two-line operator for (tangent - f, line - f); the iteration is
locally convergent when that modulus is below one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DegenerateLine,
    EvaluationFailure,
    NonMinimalPeriod,
    OffSet,
    PeriodicPointNotFound,
    SingularGradient,
)
from .geometry import ConstraintSet, Ellipse, Line, PSphere, Region, as_point
from .dynamics import dr_step, dr_orbit_batch

__all__ = [
    "ATTRACTIVE",
    "REPELLING",
    "NEUTRAL",
    "ConvergenceCertificate",
    "PeriodicPoint",
    "numeric_jacobian",
    "two_line_projection_matrix",
    "two_line_dr_matrix",
    "eigen_modulus_sq",
    "tangent_line_at",
    "tangent_projection_matrix",
    "local_convergence_certificate",
    "find_periodic_point",
    "periodic_scan",
]

ATTRACTIVE = "attractive"
REPELLING = "repelling"
NEUTRAL = "neutral"

# spectral-radius band treated as neutral (unit multipliers are exact on the
# tangential and continuum configurations)
_NEUTRAL_BAND = 1e-6

_NEWTON_RESIDUAL = 1e-11
_MINIMALITY_TOL = 1e-6
_DEDUP_TOL = 1e-6


@dataclass(frozen=True)
class ConvergenceCertificate:
    feasible_point: np.ndarray
    tangent_line: Line
    eigen_modulus_sq: float
    locally_convergent: bool


@dataclass(frozen=True)
class PeriodicPoint:
    point: np.ndarray
    period: int
    multipliers: tuple
    classification: str
    residual: float

    def spectral_radius(self):
        return max(abs(m) for m in self.multipliers)


# ---------------------------------------------------------------------------
# jacobians and the two-line theory

def numeric_jacobian(F, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a planar map with step h*(1 + |x|)."""
    x = as_point(x)
    if h <= 0.0:
        raise ValueError("step must be positive")
    d = h * (1.0 + float(np.linalg.norm(x)))
    J = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = d
        try:
            fp = np.asarray(F(x + e), dtype=float)
            fm = np.asarray(F(x - e), dtype=float)
        except Exception as exc:  # noqa: BLE001 - surface as domain error
            raise EvaluationFailure(f"map evaluation failed near {x}: {exc}") from exc
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise EvaluationFailure(f"map returned non-finite values near {x}")
        J[:, j] = (fp - fm) / (2.0 * d)
    return J


def two_line_projection_matrix(L: Line) -> np.ndarray:
    """Matrix of the orthogonal projection onto a line through the origin."""
    if abs(L.gamma) > 1e-12:
        raise DegenerateLine("projection matrix requires a line through the origin")
    a, b = L.alpha, L.beta
    n = a * a + b * b
    return np.array([[b * b, -a * b], [-a * b, a * a]]) / n


def two_line_dr_matrix(L1: Line, L2: Line) -> np.ndarray:
    """Matrix (psi/Delta) [[psi, omega], [-omega, psi]] of the two-line step.

    psi = alpha*A + beta*B, omega = alpha*B - beta*A for normals (alpha, beta)
    of L1 and (A, B) of L2; Delta is the product of the squared normal
    lengths.  This is the matrix of ``dr_step_two_lines(L1, L2, .)``, i.e.
    the step with L2 as the reflect-first set.
    """
    a, b = L1.alpha, L1.beta
    A, B = L2.alpha, L2.beta
    if math.hypot(a, b) == 0.0 or math.hypot(A, B) == 0.0:
        raise DegenerateLine("zero line normal")
    psi = a * A + b * B
    omega = a * B - b * A
    delta = (a * a + b * b) * (A * A + B * B)
    return (psi / delta) * np.array([[psi, omega], [-omega, psi]])


def eigen_modulus_sq(L1: Line, L2: Line) -> float:
    """Squared modulus of both eigenvalues of the two-line step matrix.

    Equals (alpha*A + beta*B)^2 / ((alpha^2+beta^2)(A^2+B^2)), the squared
    cosine of the angle between the normals; lies in [0, 1].
    """
    a, b = L1.alpha, L1.beta
    A, B = L2.alpha, L2.beta
    if math.hypot(a, b) == 0.0 or math.hypot(A, B) == 0.0:
        raise DegenerateLine("zero line normal")
    psi = a * A + b * B
    delta = (a * a + b * b) * (A * A + B * B)
    return psi * psi / delta


def tangent_line_at(C: ConstraintSet, f) -> Line:
    """Tangent (supporting) line to the conic at an on-curve point f."""
    f = as_point(f)
    if isinstance(C, Line):
        return C
    if C.residual(f) > 1e-8:
        raise OffSet(f"point {f} is not on the set (residual {C.residual(f):.2e})")
    g = np.asarray(C.grad(f), dtype=float)
    norm = float(np.hypot(g[0], g[1]))
    if not np.all(np.isfinite(g)) or norm < 1e-12 or norm > 1e12:
        raise SingularGradient(f"gradient unusable at {f}: {g}")
    a, b = g[0] / norm, g[1] / norm
    return Line(a, b, a * f[0] + b * f[1])


def tangent_projection_matrix(E: Ellipse, f) -> np.ndarray:
    """Projection matrix onto the tangent direction of the ellipse at f.

    b^4/(b^4 x0^2 + y0^2) * [[y0^2/b^4, -x0 y0/b^2], [-x0 y0/b^2, x0^2]];
    this also equals the derivative of the ellipse projection at f.
    """
    f = as_point(f)
    if E.residual(f) > 1e-8:
        raise OffSet(f"point {f} is not on the ellipse (residual {E.residual(f):.2e})")
    x0, y0 = f
    b = E.b
    den = b ** 4 * x0 * x0 + y0 * y0
    return (b ** 4 / den) * np.array(
        [
            [y0 * y0 / b ** 4, -x0 * y0 / b ** 2],
            [-x0 * y0 / b ** 2, x0 * x0],
        ]
    )


def local_convergence_certificate(C: ConstraintSet, L: Line, f) -> ConvergenceCertificate:
    """Perron-style certificate at a feasible point f of (C, L).

    Builds the tangent line at f, translates both lines to the origin and
    evaluates the two-line eigenvalue modulus; a tangential intersection
    yields modulus 1 and is flagged (not an error).
    """
    f = as_point(f)
    if L.residual(f) > 1e-8:
        raise OffSet(f"point {f} is not on the line (residual {L.residual(f):.2e})")
    H = tangent_line_at(C, f)
    mod2 = eigen_modulus_sq(H.translated_to_origin(), L.translated_to_origin())
    return ConvergenceCertificate(
        feasible_point=f,
        tangent_line=H,
        eigen_modulus_sq=mod2,
        locally_convergent=mod2 < 1.0 - 1e-9,
    )


# ---------------------------------------------------------------------------
# periodic points

def _tm_batch(A, B, X, m):
    for _ in range(m):
        X = dr_step(A, B, X)
    return X


def _newton_periodic_batch(A, B, seeds, m, bound, max_steps=50, h=1e-6):
    """Newton iteration on G = T^m - I from many seeds at once.

    Returns the converged roots (may contain near-duplicates).  The Jacobian
    is a central difference evaluated in one stacked batch per iteration;
    near-singular systems fall back to the pseudo-inverse step, which handles
    the continuum configurations where G' drops rank along the family.
    """
    X = np.atleast_2d(np.asarray(seeds, dtype=float)).copy()
    idx = np.arange(X.shape[0])
    roots = []
    for _ in range(max_steps):
        if X.shape[0] == 0:
            break
        G = _tm_batch(A, B, X, m) - X
        res = np.linalg.norm(G, axis=1)
        ok = np.isfinite(res)
        conv = ok & (res <= _NEWTON_RESIDUAL)
        if conv.any():
            roots.append(X[conv])
        out = ~ok | conv | (np.max(np.abs(X), axis=1) > bound)
        if out.any():
            keep = ~out
            X, idx, G = X[keep], idx[keep], G[keep]
        if X.shape[0] == 0:
            break
        n = X.shape[0]
        d = h * (1.0 + np.linalg.norm(X, axis=1))
        stencil = np.concatenate(
            [
                X + np.stack([d, np.zeros(n)], axis=1),
                X - np.stack([d, np.zeros(n)], axis=1),
                X + np.stack([np.zeros(n), d], axis=1),
                X - np.stack([np.zeros(n), d], axis=1),
            ]
        )
        F = _tm_batch(A, B, stencil, m)
        fxp, fxm, fyp, fym = F[:n], F[n : 2 * n], F[2 * n : 3 * n], F[3 * n :]
        J = np.empty((n, 2, 2))
        J[:, :, 0] = (fxp - fxm) / (2.0 * d)[:, None]
        J[:, :, 1] = (fyp - fym) / (2.0 * d)[:, None]
        J[:, 0, 0] -= 1.0
        J[:, 1, 1] -= 1.0
        bad = ~np.all(np.isfinite(J), axis=(1, 2))
        if bad.any():
            keep = ~bad
            X, idx, G, J = X[keep], idx[keep], G[keep], J[keep]
            if X.shape[0] == 0:
                break
        with np.errstate(all="ignore"):
            Ji = np.linalg.pinv(J, rcond=1e-12)
        dx = -np.einsum("nij,nj->ni", Ji, G)
        norm = np.linalg.norm(dx, axis=1)
        scale = np.where(norm > 1.0, 1.0 / np.where(norm > 0, norm, 1.0), 1.0)
        X = X + dx * scale[:, None]
    if not roots:
        return np.empty((0, 2))
    return np.concatenate(roots)


def _orbit_of(A, B, x, m):
    pts = [np.asarray(x, dtype=float)]
    for _ in range(m - 1):
        pts.append(dr_step(A, B, pts[-1]))
    return np.array(pts)


def _true_period(A, B, x, m):
    """Smallest k in [1, m] with |T^k(x) - x| below the minimality threshold."""
    y = np.asarray(x, dtype=float)
    for k in range(1, m + 1):
        y = dr_step(A, B, y)
        if float(np.linalg.norm(y - x)) <= _MINIMALITY_TOL:
            return k
    return m


def _classify_root(A, B, x, m) -> PeriodicPoint:
    Tm = lambda z: _tm_batch(A, B, np.asarray(z, dtype=float), m)
    res = float(np.linalg.norm(Tm(x) - x))
    J = numeric_jacobian(Tm, x)
    eig = np.linalg.eigvals(J)
    eig = sorted(eig, key=lambda z: (-abs(z), -z.real, -z.imag))
    rho = abs(eig[0])
    if rho < 1.0 - _NEUTRAL_BAND:
        cls = ATTRACTIVE
    elif rho > 1.0 + _NEUTRAL_BAND:
        cls = REPELLING
    else:
        cls = NEUTRAL
    return PeriodicPoint(
        point=np.asarray(x, dtype=float),
        period=m,
        multipliers=(complex(eig[0]), complex(eig[1])),
        classification=cls,
        residual=res,
    )


def find_periodic_point(A, B, seed, m: int, region: Region | None = None) -> PeriodicPoint:
    """Newton refinement of a period-m point from one seed.

    Raises ``PeriodicPointNotFound`` when Newton fails or escapes, and
    ``NonMinimalPeriod`` (carrying the reclassified point) when the root's
    true period is a proper divisor of the request.
    """
    if m < 1:
        raise ValueError("period must be at least 1")
    seed = as_point(seed)
    if region is None:
        bound = 1e3
    else:
        big = region.scaled(3.0)
        bound = max(abs(big.xmin), abs(big.xmax), abs(big.ymin), abs(big.ymax))
    roots = _newton_periodic_batch(A, B, seed.reshape(1, 2), m, bound)
    if roots.shape[0] == 0:
        raise PeriodicPointNotFound(f"no period-{m} point from seed {seed}")
    x = roots[0]
    true_m = _true_period(A, B, x, m)
    if true_m < m:
        raise NonMinimalPeriod(_classify_root(A, B, x, true_m))
    return _classify_root(A, B, x, m)


def periodic_scan(
    A,
    B,
    region: Region,
    max_period: int,
    *,
    grid: int = 32,
    burn_in: int = 500,
    extra_seeds=None,
) -> list:
    """Best-effort sweep for periodic points of period <= max_period.

    Newton runs from an n-by-n grid of seeds over the region; the grid's
    images after a burn-in of plain iteration are added as seeds as well,
    which lands starts directly on whatever attracts them and makes small
    attractive orbits much harder to miss.  Roots are deduplicated across
    orbit shifts (one entry per orbit, represented by its lexicographically
    largest point) and classified; output is sorted by period then point.
    """
    if max_period < 1:
        raise ValueError("max_period must be at least 1")
    seeds = region.grid_points(grid)
    if burn_in > 0:
        evolved, _ = dr_orbit_batch(A, B, seeds, burn_in, bailout=1e6, freeze_tol=1e-14)
        good = np.all(np.isfinite(evolved), axis=1) & region.scaled(3.0).contains(evolved)
        seeds = np.concatenate([seeds, evolved[good]])
    if extra_seeds is not None and len(extra_seeds):
        seeds = np.concatenate([seeds, np.atleast_2d(np.asarray(extra_seeds, dtype=float))])

    big = region.scaled(3.0)
    bound = max(abs(big.xmin), abs(big.xmax), abs(big.ymin), abs(big.ymax))

    found = []  # (period, canonical_point, orbit)

    def register(x, m):
        true_m = _true_period(A, B, x, m)
        orbit = _orbit_of(A, B, x, true_m)
        if not np.all(np.isfinite(orbit)):
            return
        if not np.any(region.contains(orbit)):
            return
        rep = max(map(tuple, orbit))
        for period, kept, _ in found:
            if period == true_m and math.hypot(rep[0] - kept[0], rep[1] - kept[1]) <= _DEDUP_TOL:
                return
        found.append((true_m, rep, orbit))

    for m in range(1, max_period + 1):
        roots = _newton_periodic_batch(A, B, seeds, m, bound)
        for x in roots:
            register(x, m)

    out = []
    for period, rep, _ in found:
        # re-polish the canonical representative: walking T around the orbit
        # amplified the Newton residual by the multiplier
        refined = _newton_periodic_batch(A, B, np.asarray(rep).reshape(1, 2), period, bound)
        point = refined[0] if refined.shape[0] else np.asarray(rep)
        out.append(_classify_root(A, B, point, period))
    out.sort(key=lambda pp: (pp.period, pp.point[0], pp.point[1]))
    return out
