"""Planar constraint sets and their nearest-point machinery.

Three set families are supported:

* ``Line``     alpha*x + beta*y = gamma, with unit normal (alpha, beta);
* ``Ellipse``  x^2 + (y/b)^2 = 1, semi-axis b along y (b = 1 is the circle);
* ``PSphere``  |x|^p + |y|^p = 1 for p > 0.

Each set carries its projection rule.  ``project`` accepts a single point
(shape ``(2,)``) or a batch (shape ``(n, 2)``) and preserves the shape; it
returns the deterministic selection used throughout the iteration.  The
projection onto a nonconvex or symmetric target can be multivalued, so the
scalar ``project_info`` additionally reports every global minimizer found.

Tie-breaking: among equidistant minimizers the lexicographically largest
(x, y) pair is selected.  The selection is deterministic and commutes with
the quadrant symmetries of the ellipse and p-sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import (
    CenterOfCircle,
    DegenerateLine,
    NonFiniteInput,
    UnsupportedPair,
)
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "Line",
    "Ellipse",
    "PSphere",
    "ConstraintSet",
    "ProjectionResult",
    "Region",
    "as_point",
    "line_from_slope_intercept",
    "project_line",
    "project_ellipse",
    "project_psphere",
    "reflect",
    "feasible_points",
    "set_distance",
]


# ---------------------------------------------------------------------------
# points

def as_point(x, y=None) -> np.ndarray:
    """Validate and return a point as a float64 array of shape (2,)."""
    if y is None:
        q = np.asarray(x, dtype=float)
        if q.shape != (2,):
            raise NonFiniteInput(f"expected a planar point, got shape {q.shape}")
    else:
        q = np.array([x, y], dtype=float)
    if not np.all(np.isfinite(q)):
        raise NonFiniteInput(f"point has non-finite coordinates: {q}")
    return q


def _as_batch(q):
    """Return (points (n,2), was_scalar)."""
    a = np.asarray(q, dtype=float)
    if a.ndim == 1:
        return a.reshape(1, 2), True
    if a.ndim != 2 or a.shape[1] != 2:
        raise NonFiniteInput(f"expected points of shape (n, 2), got {a.shape}")
    return a, False


def _lex_key(p):
    return (-p[0], -p[1])


# ---------------------------------------------------------------------------
# result record

@dataclass(frozen=True)
class ProjectionResult:
    """Selected nearest point plus every global minimizer found."""

    point: np.ndarray
    candidates: list
    multivalued: bool


def _finish_result(query, cands, tols: Tolerances) -> ProjectionResult:
    """Filter candidates to the global minimizers and apply the tie-break."""
    pts = np.asarray(cands, dtype=float)
    d = np.hypot(pts[:, 0] - query[0], pts[:, 1] - query[1])
    dmin = float(d.min())
    keep = pts[d <= dmin + tols.equidistant]
    # dedupe near-identical candidates, keeping lexicographically larger first
    keep = sorted(map(tuple, keep), key=_lex_key)
    uniq = []
    for p in keep:
        if all(math.hypot(p[0] - u[0], p[1] - u[1]) > tols.candidate_dedupe for u in uniq):
            uniq.append(p)
    candidates = [np.array(p) for p in uniq]
    return ProjectionResult(
        point=candidates[0].copy(),
        candidates=candidates,
        multivalued=len(candidates) > 1,
    )


# ---------------------------------------------------------------------------
# region (viewport plumbing shared by scans, basins, CLI and service)

@dataclass(frozen=True)
class Region:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.xmax, self.ymin, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise NonFiniteInput(f"region bounds must be finite: {vals}")
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"degenerate region: {vals}")

    @property
    def width(self):
        return self.xmax - self.xmin

    @property
    def height(self):
        return self.ymax - self.ymin

    def contains(self, q, pad=0.0):
        q = np.asarray(q, dtype=float)
        return (
            self.xmin - pad <= q[..., 0]
        ) & (q[..., 0] <= self.xmax + pad) & (
            self.ymin - pad <= q[..., 1]
        ) & (q[..., 1] <= self.ymax + pad)

    def scaled(self, factor):
        cx = 0.5 * (self.xmin + self.xmax)
        cy = 0.5 * (self.ymin + self.ymax)
        hw = 0.5 * self.width * factor
        hh = 0.5 * self.height * factor
        return Region(cx - hw, cx + hw, cy - hh, cy + hh)

    def grid_points(self, nx, ny=None):
        """Cell midpoints of an nx-by-ny subdivision, row-major from ymax down."""
        ny = nx if ny is None else ny
        xs = self.xmin + (np.arange(nx) + 0.5) * (self.width / nx)
        ys = self.ymax - (np.arange(ny) + 0.5) * (self.height / ny)
        X, Y = np.meshgrid(xs, ys)
        return np.stack([X.ravel(), Y.ravel()], axis=-1)


# ---------------------------------------------------------------------------
# lines

@dataclass(frozen=True)
class Line:
    """The line {(x, y) : alpha*x + beta*y = gamma} with unit normal."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma)
        if not all(math.isfinite(v) for v in vals):
            raise NonFiniteInput(f"line coefficients must be finite: {vals}")
        n = math.hypot(self.alpha, self.beta)
        if n == 0.0:
            raise DegenerateLine("line normal has zero length")
        if abs(n - 1.0) > 1e-12:
            object.__setattr__(self, "alpha", self.alpha / n)
            object.__setattr__(self, "beta", self.beta / n)
            object.__setattr__(self, "gamma", self.gamma / n)

    @staticmethod
    def from_normal(a, b, c) -> "Line":
        return Line(a, b, c)

    @staticmethod
    def from_slope_intercept(m, c) -> "Line":
        """y = m*x + c as a normalized line with (alpha, beta) ∝ (m, -1)."""
        if not (math.isfinite(m) and math.isfinite(c)):
            raise NonFiniteInput(f"slope/intercept must be finite: {m}, {c}")
        n = math.hypot(m, 1.0)
        return Line(m / n, -1.0 / n, -c / n)

    @property
    def normal(self):
        return np.array([self.alpha, self.beta])

    @property
    def direction(self):
        return np.array([-self.beta, self.alpha])

    @property
    def through_origin(self):
        return self.gamma == 0.0

    def translated_to_origin(self) -> "Line":
        return Line(self.alpha, self.beta, 0.0)

    def perpendicular_through_origin(self) -> "Line":
        return Line(-self.beta, self.alpha, 0.0)

    def signed_value(self, q):
        q = np.asarray(q, dtype=float)
        return q[..., 0] * self.alpha + q[..., 1] * self.beta - self.gamma

    def residual(self, q):
        return np.abs(self.signed_value(q))

    def base_point(self):
        """Point of the line nearest the origin."""
        return self.gamma * self.normal

    def project(self, q):
        """Foot of the perpendicular from q (exact closed form)."""
        Q, scalar = _as_batch(q)
        s = self.signed_value(Q)
        out = Q - s[:, None] * self.normal
        return out[0] if scalar else out

    def project_info(self, q, tols: Tolerances = DEFAULT) -> ProjectionResult:
        p = self.project(as_point(q))
        return ProjectionResult(point=p, candidates=[p], multivalued=False)

    def points_along(self, n, span):
        """n points of the line with arclength parameter in [-span, span]."""
        s = np.linspace(-span, span, n)
        return self.base_point() + s[:, None] * self.direction


def line_from_slope_intercept(m, c) -> Line:
    return Line.from_slope_intercept(m, c)


def project_line(L: Line, q):
    return L.project(q)


# ---------------------------------------------------------------------------
# vectorized quartic machinery (ellipse projections)

def _largest_real_cubic_root(B, C, D):
    """Largest real root of z^3 + B z^2 + C z + D, elementwise."""
    with np.errstate(all="ignore"):
        P = C - B * B / 3.0
        Q = 2.0 * B ** 3 / 27.0 - B * C / 3.0 + D
        disc = (Q / 2.0) ** 2 + (P / 3.0) ** 3
        sq = np.sqrt(np.maximum(disc, 0.0))
        one_real = np.cbrt(-Q / 2.0 + sq) + np.cbrt(-Q / 2.0 - sq)
        Pneg = np.where(P < 0.0, P, -1.0)
        rad = np.sqrt(-Pneg / 3.0)
        arg = np.clip(3.0 * Q / (2.0 * Pneg) * np.sqrt(-3.0 / Pneg), -1.0, 1.0)
        three_real = 2.0 * rad * np.cos(np.arccos(arg) / 3.0)
        w = np.where(disc > 0.0, one_real, np.where(P < 0.0, three_real, one_real))
        return w - B / 3.0


def _real_quartic_roots(c3, c2, c1, c0):
    """Real roots of t^4 + c3 t^3 + c2 t^2 + c1 t + c0, shape (..., 4), NaN padded.

    Closed-form resolvent-cubic factorization followed by a short Newton
    polish of every root against the original quartic; nearby incorrect
    roots are tolerable because callers select candidates by true distance.
    """
    with np.errstate(all="ignore"):
        a = c3
        p = c2 - 3.0 * a * a / 8.0
        q = c1 - a * c2 / 2.0 + a ** 3 / 8.0
        r = c0 - a * c1 / 4.0 + a * a * c2 / 16.0 - 3.0 * a ** 4 / 256.0

        z = np.maximum(_largest_real_cubic_root(2.0 * p, p * p - 4.0 * r, -q * q), 0.0)
        s = np.sqrt(z)
        ssafe = np.where(s > 0.0, s, 1.0)
        w1 = (p + z - q / ssafe) / 2.0
        w2 = (p + z + q / ssafe) / 2.0
        d1 = s * s - 4.0 * w1
        d2 = s * s - 4.0 * w2
        sq1 = np.sqrt(np.maximum(d1, 0.0))
        sq2 = np.sqrt(np.maximum(d2, 0.0))
        y = np.stack(
            [
                np.where(d1 >= 0.0, 0.5 * (-s + sq1), np.nan),
                np.where(d1 >= 0.0, 0.5 * (-s - sq1), np.nan),
                np.where(d2 >= 0.0, 0.5 * (s + sq2), np.nan),
                np.where(d2 >= 0.0, 0.5 * (s - sq2), np.nan),
            ],
            axis=-1,
        )

        # biquadratic fallback when the odd coefficient vanishes
        biq = np.abs(q) <= 1e-12 * (1.0 + np.abs(p) + np.abs(r))
        db = p * p - 4.0 * r
        sb = np.sqrt(np.maximum(db, 0.0))
        u1 = 0.5 * (-p + sb)
        u2 = 0.5 * (-p - sb)
        r1 = np.sqrt(np.maximum(u1, 0.0))
        r2 = np.sqrt(np.maximum(u2, 0.0))
        yb = np.stack(
            [
                np.where((db >= 0.0) & (u1 >= 0.0), r1, np.nan),
                np.where((db >= 0.0) & (u1 >= 0.0), -r1, np.nan),
                np.where((db >= 0.0) & (u2 >= 0.0), r2, np.nan),
                np.where((db >= 0.0) & (u2 >= 0.0), -r2, np.nan),
            ],
            axis=-1,
        )
        y = np.where(biq[..., None], yb, y)
        t = y - a[..., None] / 4.0

        for _ in range(3):
            f = (((t + c3[..., None]) * t + c2[..., None]) * t + c1[..., None]) * t + c0[..., None]
            fp = ((4.0 * t + 3.0 * c3[..., None]) * t + 2.0 * c2[..., None]) * t + c1[..., None]
            t = t - np.where(np.abs(fp) > 1e-30, f / np.where(fp != 0.0, fp, 1.0), 0.0)
        return t


# ---------------------------------------------------------------------------
# ellipse

@dataclass(frozen=True)
class Ellipse:
    """x^2 + (y/b)^2 = 1; by convention b >= 1 so the major axis is vertical."""

    b: float

    def __post_init__(self):
        if not math.isfinite(self.b) or self.b <= 0.0:
            raise NonFiniteInput(f"ellipse semi-axis must be finite and positive: {self.b}")

    def value(self, q):
        q = np.asarray(q, dtype=float)
        return q[..., 0] ** 2 + (q[..., 1] / self.b) ** 2

    def residual(self, q):
        return np.abs(self.value(q) - 1.0)

    def grad(self, q):
        q = np.asarray(q, dtype=float)
        return np.stack([2.0 * q[..., 0], 2.0 * q[..., 1] / self.b ** 2], axis=-1)

    def parametric(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.cos(t), self.b * np.sin(t)], axis=-1)

    def boundary_samples(self, n):
        return self.parametric(np.linspace(0.0, 2.0 * np.pi, n, endpoint=False))

    def vertices(self):
        return np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, self.b], [0.0, -self.b]])

    # -- candidate enumeration ------------------------------------------------

    def _candidates(self, Q, tols: Tolerances = DEFAULT):
        """(n, k, 2) candidate array, NaN padded; all rows lie on the ellipse.

        Real roots t = 2*lambda of the cleared-denominator quartic give
        candidates (x/(1+t), b^2 y/(b^2+t)); the four vertices are always
        included and the on-axis branches (t = -1 and t = -b^2) are added
        for queries within ``tols.axis_branch`` of an axis, where the
        rational candidate formula degenerates.
        """
        b = self.b
        Z, E = Q[:, 0], Q[:, 1]
        n = Q.shape[0]
        parts = []

        if b == 1.0:
            # circle: q/|q| is the unique minimizer away from the center
            r = np.hypot(Z, E)
            with np.errstate(invalid="ignore", divide="ignore"):
                u = np.where(r > 0.0, Z / r, np.nan)
                v = np.where(r > 0.0, E / r, np.nan)
            parts.append(np.stack([u, v], axis=-1)[:, None, :])
        else:
            c1v, c0v = 1.0 + b * b, b * b
            C3 = np.full(n, 2.0 * c1v)
            C2 = c1v * c1v + 2.0 * c0v - Z * Z - b * b * E * E
            C1 = 2.0 * c0v * c1v - 2.0 * b * b * (Z * Z + E * E)
            C0 = c0v * c0v - b ** 4 * Z * Z - b * b * E * E
            T = _real_quartic_roots(C3, C2, C1, C0)
            den_u = 1.0 + T
            den_v = b * b + T
            eps = tols.degenerate_division
            ok = np.isfinite(T) & (np.abs(den_u) > eps) & (np.abs(den_v) > eps)
            with np.errstate(invalid="ignore", divide="ignore"):
                U = np.where(ok, Z[:, None] / np.where(ok, den_u, 1.0), np.nan)
                V = np.where(ok, b * b * E[:, None] / np.where(ok, den_v, 1.0), np.nan)
            parts.append(np.stack([U, V], axis=-1))

            # t = -1 branch: minimizers off the major axis for queries on it
            near0 = np.abs(Z) <= tols.axis_branch
            v0 = b * b * E / (b * b - 1.0)
            okz = near0 & (np.abs(v0) <= b)
            with np.errstate(invalid="ignore"):
                ux = np.sqrt(np.maximum(1.0 - (v0 / b) ** 2, 0.0))
            bz = np.stack(
                [
                    np.stack([np.where(okz, ux, np.nan), np.where(okz, v0, np.nan)], axis=-1),
                    np.stack([np.where(okz, -ux, np.nan), np.where(okz, v0, np.nan)], axis=-1),
                ],
                axis=1,
            )
            parts.append(bz)

            # t = -b^2 branch (stationary pair for queries on the minor axis)
            nearE = np.abs(E) <= tols.axis_branch
            u0 = Z / (1.0 - b * b)
            oke = nearE & (np.abs(u0) <= 1.0)
            with np.errstate(invalid="ignore"):
                vy = b * np.sqrt(np.maximum(1.0 - u0 ** 2, 0.0))
            be = np.stack(
                [
                    np.stack([np.where(oke, u0, np.nan), np.where(oke, vy, np.nan)], axis=-1),
                    np.stack([np.where(oke, u0, np.nan), np.where(oke, -vy, np.nan)], axis=-1),
                ],
                axis=1,
            )
            parts.append(be)

        parts.append(np.broadcast_to(self.vertices(), (n, 4, 2)).copy())
        C = np.concatenate(parts, axis=1)

        # exact membership by radial rescale (no-op for well-computed roots)
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.sqrt(C[..., 0] ** 2 + (C[..., 1] / b) ** 2)
            C = C / np.where(s > 0.0, s, np.nan)[..., None]
        return C

    def project(self, q, tols: Tolerances = DEFAULT):
        """Deterministic selected projection; batch aware."""
        Q, scalar = _as_batch(q)
        C = self._candidates(Q, tols)
        out = _pick_candidates(Q, C, tols)
        return out[0] if scalar else out

    def project_info(self, q, tols: Tolerances = DEFAULT) -> ProjectionResult:
        q = as_point(q)
        C = self._candidates(q.reshape(1, 2), tols)[0]
        cands = C[np.all(np.isfinite(C), axis=-1)]
        return _finish_result(q, cands, tols)


def _pick_candidates(Q, C, tols: Tolerances):
    """Min-distance selection with the lexicographic tie-break, vectorized."""
    d = np.linalg.norm(C - Q[:, None, :], axis=-1)
    d = np.where(np.isfinite(d), d, np.inf)
    dmin = d.min(axis=1)
    tie = d <= dmin[:, None] + tols.equidistant
    allnan = ~np.isfinite(dmin)
    x = np.where(tie, C[..., 0], -np.inf)
    xbest = x.max(axis=1)
    tie2 = tie & (C[..., 0] >= xbest[:, None])
    y = np.where(tie2, C[..., 1], -np.inf)
    ybest = y.max(axis=1)
    pick = np.argmax(tie2 & (C[..., 1] >= ybest[:, None]), axis=1)
    out = C[np.arange(Q.shape[0]), pick]
    return np.where(allnan[:, None], np.nan, out)


def project_ellipse(E: Ellipse, q, tols: Tolerances = DEFAULT) -> ProjectionResult:
    return E.project_info(q, tols)


# ---------------------------------------------------------------------------
# p-sphere

_ARC_CACHE: dict = {}


def _quadrant_arc(p, m):
    """Cached (phi, points, kdtree) polyline of the first-quadrant arc."""
    key = (float(p), int(m))
    hit = _ARC_CACHE.get(key)
    if hit is None:
        phi = np.linspace(0.0, 0.5 * np.pi, m)
        pts = _arc_point(p, phi)
        hit = (phi, pts, cKDTree(pts))
        if len(_ARC_CACHE) > 32:
            _ARC_CACHE.clear()
        _ARC_CACHE[key] = hit
    return hit


def _arc_point(p, phi):
    """Point of the quadrant arc at angle parameter phi in [0, pi/2]."""
    e = 2.0 / p
    c = np.cos(phi)
    s = np.sin(phi)
    return np.stack([np.abs(c) ** e, np.abs(s) ** e], axis=-1)


@dataclass(frozen=True)
class PSphere:
    """|x|^p + |y|^p = 1 for p > 0 (p = 2 is the unit circle, p = 1 the diamond)."""

    p: float

    def __post_init__(self):
        if not math.isfinite(self.p) or self.p <= 0.0:
            raise NonFiniteInput(f"p-sphere exponent must be finite and positive: {self.p}")

    def value(self, q):
        q = np.asarray(q, dtype=float)
        return np.abs(q[..., 0]) ** self.p + np.abs(q[..., 1]) ** self.p

    def residual(self, q):
        return np.abs(self.value(q) - 1.0)

    def grad(self, q):
        """Gradient of the level function; infinite at axis points when p < 1."""
        q = np.asarray(q, dtype=float)
        p = self.p
        with np.errstate(divide="ignore", invalid="ignore"):
            gx = p * np.sign(q[..., 0]) * np.abs(q[..., 0]) ** (p - 1.0)
            gy = p * np.sign(q[..., 1]) * np.abs(q[..., 1]) ** (p - 1.0)
        return np.stack([gx, gy], axis=-1)

    def parametric(self, t):
        """Signed angle parametrization covering the whole curve for t in [0, 2pi)."""
        t = np.asarray(t, dtype=float)
        e = 2.0 / self.p
        c, s = np.cos(t), np.sin(t)
        return np.stack(
            [np.sign(c) * np.abs(c) ** e, np.sign(s) * np.abs(s) ** e], axis=-1
        )

    def boundary_samples(self, n):
        return self.parametric(np.linspace(0.0, 2.0 * np.pi, n, endpoint=False))

    def vertices(self):
        return np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])

    # -- batch projection ------------------------------------------------------

    def project(self, q, tols: Tolerances = DEFAULT):
        """Deterministic selected projection; batch aware.

        p = 2 and p = 1 use closed forms.  Otherwise the first-quadrant arc
        is searched: global nearest sample by k-d tree, then a golden-section
        refinement of the angle parameter inside the bracketing samples, with
        the two axis vertices kept as competing candidates (they are cusps
        for p < 1).  The unique circle center degeneracy yields NaN rows.
        """
        Q, scalar = _as_batch(q)
        A = np.abs(Q)
        if self.p == 2.0:
            r = np.hypot(Q[..., 0], Q[..., 1])
            with np.errstate(invalid="ignore", divide="ignore"):
                # at the exact center every circle point minimizes; take the
                # lexicographically largest, (1, 0), like every other tie
                out = np.where(
                    (r > 0.0)[:, None],
                    Q / np.where(r > 0.0, r, 1.0)[:, None],
                    np.array([1.0, 0.0]),
                )
        else:
            if self.p == 1.0:
                best = self._diamond_quadrant(A)
            else:
                best = self._arc_quadrant(A, tols)
            out = np.where(Q < 0.0, -best, best)
        return out[0] if scalar else out

    def _diamond_quadrant(self, A):
        """Nearest point of the segment u + v = 1 (u, v >= 0) to each |q|."""
        a, b = A[:, 0], A[:, 1]
        u = np.clip(0.5 * (a - b + 1.0), 0.0, 1.0)
        return np.stack([u, 1.0 - u], axis=-1)

    def _arc_quadrant(self, A, tols: Tolerances):
        phi, pts, tree = _quadrant_arc(self.p, tols.psphere_samples)
        m = phi.size
        _, idx = tree.query(A)
        lo = phi[np.maximum(idx - 1, 0)]
        hi = phi[np.minimum(idx + 1, m - 1)]
        best_phi = _golden_min_phi(self.p, A, lo, hi)
        # golden section bottoms out near sqrt(eps); finish with Newton on the
        # stationarity condition of the squared distance along the arc
        best_phi = _newton_polish_phi(self.p, A, best_phi)
        out = _arc_point(self.p, best_phi)
        d = np.linalg.norm(out - A, axis=-1)
        # on-diagonal queries: the stationary point (2^(-1/p), 2^(-1/p)) in
        # closed form, bit-exact for p = 1/n, so the symmetric dynamics stay
        # exactly antisymmetric instead of inheriting power-function noise
        diag = A[:, 0] == A[:, 1]
        if np.any(diag):
            u = 2.0 ** (-1.0 / self.p)
            dd = np.hypot(u - A[:, 0], u - A[:, 1])
            better = diag & (dd <= d)
            out = np.where(better[:, None], np.array([u, u]), out)
            d = np.where(better, dd, d)
        # let the exact vertices compete (cusp handling for p < 1)
        for v in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
            dv = np.linalg.norm(A - v, axis=-1)
            better = dv < d
            out = np.where(better[:, None], v, out)
            d = np.where(better, dv, d)
        return out

    # -- scalar contract path --------------------------------------------------

    def project_info(self, q, tols: Tolerances = DEFAULT) -> ProjectionResult:
        """Projection with the full multivalued candidate set.

        The quadrant problem is solved by dense sampling of u in [0, 1] with
        v = (1 - u^p)^(1/p) (the grid merged with its x/y mirror so both steep
        ends are resolved), Newton refinement of each sampled local minimum on
        the constrained stationarity system, the two endpoints always kept as
        candidates, and adaptive doubling of the sample count until the two
        best distinct minima either separate or agree.
        """
        q = as_point(q)
        if self.p == 2.0:
            r = math.hypot(q[0], q[1])
            if r == 0.0:
                raise CenterOfCircle("projection of the origin onto the circle is the whole circle")
            pnt = q / r
            return ProjectionResult(point=pnt, candidates=[pnt], multivalued=False)

        a, b = abs(q[0]), abs(q[1])
        if self.p == 1.0:
            quad = [self._diamond_quadrant(np.array([[a, b]]))[0]]
        else:
            quad = self._quadrant_candidates(a, b, tols)
        cands = []
        sx = [1.0, -1.0] if q[0] == 0.0 else [1.0 if q[0] > 0.0 else -1.0]
        sy = [1.0, -1.0] if q[1] == 0.0 else [1.0 if q[1] > 0.0 else -1.0]
        for u, v in quad:
            for s1 in sx if u > tols.candidate_dedupe else [1.0]:
                for s2 in sy if v > tols.candidate_dedupe else [1.0]:
                    cands.append((s1 * u, s2 * v))
        return _finish_result(q, cands, tols)

    def _quadrant_candidates(self, a, b, tols: Tolerances):
        p = self.p
        n = tols.psphere_samples
        while True:
            us = np.linspace(0.0, 1.0, n + 1)
            with np.errstate(invalid="ignore"):
                vs = np.clip(1.0 - us ** p, 0.0, None) ** (1.0 / p)
            ug = np.unique(np.concatenate([us, vs]))
            with np.errstate(invalid="ignore"):
                vg = np.clip(1.0 - ug ** p, 0.0, None) ** (1.0 / p)
            h = (ug - a) ** 2 + (vg - b) ** 2
            hp = np.concatenate([[np.inf], h, [np.inf]])
            loc = np.nonzero((h <= hp[:-2]) & (h <= hp[2:]))[0]

            cands = [(1.0, 0.0), (0.0, 1.0)]
            if a == b:
                u = 2.0 ** (-1.0 / p)
                cands.append((u, u))
            for i in loc:
                ilo, ihi = max(i - 1, 0), min(i + 1, ug.size - 1)
                cands.append(
                    _polish_quadrant_minimum(p, a, b, ug[i], vg[i], ug[ilo], ug[ihi], tols)
                )
            pts = np.array(cands)
            d = np.hypot(pts[:, 0] - a, pts[:, 1] - b)
            order = np.argsort(d, kind="stable")
            pts, d = pts[order], d[order]
            # find the best second minimum at a genuinely different location
            resolved = True
            for j in range(1, len(d)):
                if np.hypot(*(pts[j] - pts[0])) > tols.candidate_dedupe:
                    resolved = (d[j] - d[0] > tols.ambiguity_separation)
                    break
            if resolved or n >= tols.psphere_max_samples:
                return [tuple(pt) for pt in pts]
            n *= 2


def _golden_scalar(g, lo, hi, iters=80):
    """Scalar golden-section minimizer of g over [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = g(x1), g(x2)
    for _ in range(iters):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = g(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = g(x2)
    return 0.5 * (lo + hi)


def _polish_quadrant_minimum(p, a, b, u0, v0, ulo, uhi, tols: Tolerances):
    """Refine one sampled local minimum of the quadrant distance problem.

    Newton on the stationarity system. Falls back to a golden-section search
    in whichever coordinate varies more slowly when Newton leaves the
    quadrant or stalls (it does near the p < 1 cusps).
    """
    u, v = float(u0), float(v0)
    lam = 0.0
    if u > 1e-8:
        lam = (a - u) / (p * u ** (p - 1.0))
    elif v > 1e-8:
        lam = (b - v) / (p * v ** (p - 1.0))
    ok = False
    if min(u, v) > 1e-10:
        for _ in range(40):
            up = u ** (p - 1.0)
            vp = v ** (p - 1.0)
            F = np.array([
                u - a + lam * p * up,
                v - b + lam * p * vp,
                u ** p + v ** p - 1.0,
            ])
            if np.linalg.norm(F) <= tols.psphere_newton_tol:
                ok = True
                break
            J = np.array([
                [1.0 + lam * p * (p - 1.0) * u ** (p - 2.0), 0.0, p * up],
                [0.0, 1.0 + lam * p * (p - 1.0) * v ** (p - 2.0), p * vp],
                [p * up, p * vp, 0.0],
            ])
            try:
                du, dv, dl = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                break
            u, v, lam = u + du, v + dv, lam + dl
            if not (0.0 < u < 1.0 + 1e-9 and 0.0 < v < 1.0 + 1e-9):
                ok = False
                break
    if ok:
        u = min(max(u, 0.0), 1.0)
        return u, (max(1.0 - u ** p, 0.0)) ** (1.0 / p)

    # golden section in the flatter coordinate over the sample bracket
    swap = v0 > u0  # curve steep in u near u=0: walk the v side instead
    if swap:
        vlo = (max(1.0 - uhi ** p, 0.0)) ** (1.0 / p)
        vhi = (max(1.0 - ulo ** p, 0.0)) ** (1.0 / p)
        lo, hi, qa, qb = vlo, vhi, b, a
    else:
        lo, hi, qa, qb = ulo, uhi, a, b

    def g(w):
        other = (max(1.0 - w ** p, 0.0)) ** (1.0 / p)
        return (w - qa) ** 2 + (other - qb) ** 2

    w = _golden_scalar(g, lo, hi)
    other = (max(1.0 - w ** p, 0.0)) ** (1.0 / p)
    return (other, w) if swap else (w, other)


def _newton_polish_phi(p, A, phi, iters=4):
    """Newton steps on d/dphi |arc(phi) - A|^2 = 0, elementwise and guarded.

    Only applied where the curvature term is usable; lanes near the vertices
    (where the parametrization derivatives degenerate) keep the golden-section
    result, and any step that does not reduce the distance is rejected.
    """
    e = 2.0 / p
    a, b = A[:, 0], A[:, 1]

    def dist2(ph):
        pt = _arc_point(p, ph)
        return (pt[..., 0] - a) ** 2 + (pt[..., 1] - b) ** 2

    best = dist2(phi)
    for _ in range(iters):
        with np.errstate(all="ignore"):
            c = np.cos(phi)
            s = np.sin(phi)
            ce1 = c ** (e - 1.0)
            se1 = s ** (e - 1.0)
            ce2 = c ** (e - 2.0)
            se2 = s ** (e - 2.0)
            x = c ** e
            y = s ** e
            xp = -e * s * ce1
            yp = e * c * se1
            xpp = -e * (x - (e - 1.0) * s * s * ce2)
            ypp = e * ((e - 1.0) * c * c * se2 - y)
            g1 = (x - a) * xp + (y - b) * yp
            g2 = xp * xp + (x - a) * xpp + yp * yp + (y - b) * ypp
            step = np.where(np.isfinite(g1) & np.isfinite(g2) & (np.abs(g2) > 1e-30), g1 / g2, 0.0)
            step = np.clip(step, -1e-3, 1e-3)
        cand = np.clip(phi - step, 0.0, 0.5 * np.pi)
        dc = dist2(cand)
        # the squared distance is flat at the minimum, so allow steps that the
        # distance metric cannot resolve (the derivative still can)
        improve = np.isfinite(dc) & (dc <= best + 1e-12 * np.maximum(best, 1e-30))
        phi = np.where(improve, cand, phi)
        best = np.where(improve, np.minimum(dc, best), best)
    return phi


def _golden_min_phi(p, A, lo, hi, iters=48):
    """Vectorized golden-section minimization of |arc(phi) - A|^2 over [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def g(phi):
        pt = _arc_point(p, phi)
        return (pt[..., 0] - A[:, 0]) ** 2 + (pt[..., 1] - A[:, 1]) ** 2

    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = g(x1), g(x2)
    for _ in range(iters):
        takes1 = f1 < f2
        hi = np.where(takes1, x2, hi)
        lo = np.where(takes1, lo, x1)
        x1n = np.where(takes1, hi - invphi * (hi - lo), x2)
        x2n = np.where(takes1, x1, lo + invphi * (hi - lo))
        fx = g(np.where(takes1, x1n, x2n))
        f1n = np.where(takes1, fx, f2)
        f2n = np.where(takes1, f1, fx)
        x1, x2, f1, f2 = x1n, x2n, f1n, f2n
    return 0.5 * (lo + hi)


def project_psphere(S: PSphere, q, tols: Tolerances = DEFAULT) -> ProjectionResult:
    return S.project_info(q, tols)


# ---------------------------------------------------------------------------
# generic operations

ConstraintSet = Union[Line, Ellipse, PSphere]


def reflect(C: ConstraintSet, q):
    """2 P_C(q) - q using the selected projection; batch aware."""
    Q, scalar = _as_batch(q)
    out = 2.0 * C.project(Q) - Q
    return out[0] if scalar else out


def feasible_points(C: ConstraintSet, L: Line, tols: Tolerances = DEFAULT):
    """All intersection points of a compact set with a line.

    Ellipse: substitute the line parametrization into the quadric and solve
    the quadratic exactly (0, 1 tangency, or 2 roots).  P-sphere: bracket
    sign changes of the level function along the line and bisect each to
    ``tols.bisect_tol``.
    """
    if isinstance(C, Line):
        raise UnsupportedPair("feasible_points expects a compact set and a line")
    base = L.base_point()
    d = L.direction
    if isinstance(C, Ellipse):
        b = C.b
        A = d[0] ** 2 + (d[1] / b) ** 2
        Bc = 2.0 * (base[0] * d[0] + base[1] * d[1] / b ** 2)
        Cc = base[0] ** 2 + (base[1] / b) ** 2 - 1.0
        disc = Bc * Bc - 4.0 * A * Cc
        scale = max(Bc * Bc, abs(4.0 * A * Cc), 1e-30)
        if abs(disc) <= tols.tangency_rel * scale:
            roots = [-Bc / (2.0 * A)]
        elif disc < 0.0:
            roots = []
        elif Bc == 0.0:
            s = math.sqrt(disc) / (2.0 * A)
            roots = [s, -s]  # exactly symmetric pair for origin lines
        else:
            r1 = (-Bc - math.copysign(math.sqrt(disc), Bc)) / (2.0 * A)
            roots = [r1, Cc / (A * r1)]
        pts = [base + s * d for s in roots]
    else:
        # compact curve lies in [-sqrt(2), sqrt(2)]^2; outside that the line misses it
        if abs(L.gamma) > math.sqrt(2.0) + 1e-12:
            return []
        span = 2.0
        ns = 4097
        s = np.linspace(-span, span, ns)
        f = C.value(base + s[:, None] * d) - 1.0
        roots = [float(s[i]) for i in np.nonzero(f == 0.0)[0]]
        sign_change = np.nonzero(f[:-1] * f[1:] < 0.0)[0]
        for i in sign_change:
            lo, hi = s[i], s[i + 1]
            flo = f[i]
            while hi - lo > tols.bisect_tol:
                mid = 0.5 * (lo + hi)
                fm = float(C.value(base + mid * d) - 1.0)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
        uniq = []
        for r in sorted(roots):
            if not uniq or r - uniq[-1] > 1e-9:
                uniq.append(r)
        pts = [base + r * d for r in uniq]
    pts.sort(key=lambda p: (p[0], p[1]))
    return [np.asarray(p) for p in pts]


def set_distance(A: ConstraintSet, B: ConstraintSet, tols: Tolerances = DEFAULT) -> float:
    """inf distance between the sets; 0 when they intersect.

    Requires at least one line.  For a line paired with a compact curve the
    curve is densely sampled and the best sample refined by a golden-section
    search of the curve parameter.
    """
    if isinstance(A, Line) and isinstance(B, Line):
        cross = A.alpha * B.beta - A.beta * B.alpha
        if abs(cross) > 1e-12:
            return 0.0
        sign = 1.0 if (A.alpha * B.alpha + A.beta * B.beta) > 0.0 else -1.0
        return abs(A.gamma - sign * B.gamma)
    if isinstance(A, Line):
        line, comp = A, B
    elif isinstance(B, Line):
        line, comp = B, A
    else:
        raise UnsupportedPair("set_distance requires at least one line")
    if feasible_points(comp, line, tols):
        return 0.0
    t = _nearest_parameter_to_line(comp, line, tols)
    return float(np.abs(line.signed_value(comp.parametric(np.array([t]))))[0])


def gap_attaining_point(C: ConstraintSet, L: Line, tols: Tolerances = DEFAULT):
    """Point of the compact set nearest to the line (companion to set_distance)."""
    if isinstance(C, Line):
        raise UnsupportedPair("expected a compact set")
    t = _nearest_parameter_to_line(C, L, tols)
    return C.parametric(np.array([t]))[0]


def _nearest_parameter_to_line(comp, line, tols: Tolerances):
    """Curve parameter minimizing distance to the line: dense scan + polish."""
    m = tols.distance_samples
    t = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    d = np.abs(line.signed_value(comp.parametric(t)))
    i = int(np.argmin(d))

    def g(tt):
        return float(np.abs(line.signed_value(comp.parametric(np.array([tt]))))[0])

    step = 2.0 * np.pi / m
    return _golden_scalar(g, t[i] - step, t[i] + step)
