"""The Douglas-Rachford operator and orbit generation.

The step is T(x) = (x + R_B(R_A(x))) / 2 with A the reflect-first set; the
two-line specialization and the twisted operator for origin lines are also
provided, together with shadow sequences (projected iterates).

``dr_step`` is batch aware: a single point (2,) or a stack (n, 2) of
independent states may be advanced at once.  ``dr_orbit_batch`` is the
workhorse behind basin rendering, seeding scans and bulk experiments; it
freezes converged or escaped rows so the remaining work shrinks as the
iteration settles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateLine, ProjectionFailure
from .geometry import ConstraintSet, Line, as_point, reflect
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "DRConfig",
    "Orbit",
    "Terminated",
    "dr_step",
    "dr_iterate",
    "dr_orbit_batch",
    "dr_step_two_lines",
    "twisted_dr_step",
    "shadow_sequence",
]

# complete orbit storage up to this many iterations; thinned beyond
_FULL_STORAGE_LIMIT = 100_000


class Terminated(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class DRConfig:
    max_iter: int = 1000
    convergence_tol: float = 1e-10
    divergence_bailout: float = 1e6

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not (self.convergence_tol > 0.0 and self.divergence_bailout > 0.0):
            raise ValueError("tolerances must be positive")


@dataclass
class Orbit:
    """Recorded trajectory: points (n+1, 2), step_norms (n,), termination reason.

    Up to the full-storage limit every iterate is recorded; for longer runs
    interior iterates are thinned to every k-th (the final two are always
    kept consecutively so the last step norm is the true one).
    """

    points: np.ndarray
    step_norms: np.ndarray
    terminated: Terminated

    def __post_init__(self):
        assert self.points.ndim == 2 and self.points.shape[1] == 2
        assert self.step_norms.shape == (self.points.shape[0] - 1,)

    @property
    def final(self):
        return self.points[-1]

    def __len__(self):
        return self.points.shape[0]


def dr_step(A: ConstraintSet, B: ConstraintSet, x):
    """One step of the iteration: (x + R_B(R_A(x))) / 2; batch aware."""
    ra = reflect(A, x)
    rb = reflect(B, ra)
    return 0.5 * (np.asarray(x, dtype=float) + rb)


def dr_iterate(A: ConstraintSet, B: ConstraintSet, x0, cfg: DRConfig = DRConfig()) -> Orbit:
    """Iterate until the step norm drops below tolerance, the iterate norm
    exceeds the bailout radius, or ``cfg.max_iter`` steps have run."""
    x = as_point(x0)
    thin = max(1, math.ceil(cfg.max_iter / _FULL_STORAGE_LIMIT))
    pts = [x]
    prev_recorded = x
    prev = x
    norms = []
    terminated = Terminated.MAX_ITER
    for k in range(1, cfg.max_iter + 1):
        nxt = dr_step(A, B, prev)
        if not np.all(np.isfinite(nxt)):
            raise ProjectionFailure("projection produced a non-finite iterate", k)
        step = float(np.linalg.norm(nxt - prev))
        done = False
        if step <= cfg.convergence_tol:
            terminated = Terminated.CONVERGED
            done = True
        elif float(np.linalg.norm(nxt)) >= cfg.divergence_bailout:
            terminated = Terminated.DIVERGED
            done = True
        if done or k % thin == 0 or k == cfg.max_iter:
            if done and thin > 1 and pts[-1] is not prev:
                # keep the last two iterates adjacent so the final recorded
                # step norm is the actual step that triggered termination
                pts.append(prev)
                norms.append(float(np.linalg.norm(prev - prev_recorded)))
            norms.append(float(np.linalg.norm(nxt - pts[-1])))
            pts.append(nxt)
            prev_recorded = nxt
        prev = nxt
        if done:
            break
    return Orbit(np.array(pts), np.array(norms), terminated)


def dr_orbit_batch(
    A: ConstraintSet,
    B: ConstraintSet,
    X0,
    iters: int,
    *,
    bailout: float = 1e6,
    freeze_tol: float = 0.0,
    tail: int = 1,
):
    """Advance every row of X0 through ``iters`` steps.

    Rows whose step norm falls to ``freeze_tol`` (converged), whose norm
    reaches ``bailout`` (escaped) or that go non-finite are frozen in place;
    frozen rows cost nothing in later iterations, and escaped/non-finite
    rows simply classify as nothing downstream.

    Returns ``(final, history)`` where ``history`` has shape
    ``(tail, n, 2)`` and holds the last ``tail`` states in recency order
    (``history[0]`` is the final state).
    """
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    n = X0.shape[0]
    tail = max(1, int(tail))
    final = X0.copy()
    ring = np.repeat(X0[None, :, :], tail, axis=0)
    idx = np.arange(n)
    X = X0.copy()

    bad = ~np.all(np.isfinite(X), axis=1)
    if bad.any():
        X[bad] = np.nan
        final[bad] = np.nan
        ring[:, bad] = np.nan
        keep = ~bad
        idx, X = idx[keep], X[keep]

    for k in range(1, iters + 1):
        if idx.size == 0:
            break
        Xn = dr_step(A, B, X)
        finite = np.all(np.isfinite(Xn), axis=1)
        step = np.where(finite, np.linalg.norm(Xn - X, axis=1), np.inf)
        norm = np.where(finite, np.linalg.norm(Xn, axis=1), np.inf)
        done = (~finite) | (step <= freeze_tol) | (norm >= bailout)
        if done.any():
            di = idx[done]
            final[di] = Xn[done]
            ring[:, di] = Xn[done]
            keep = ~done
            idx, Xn = idx[keep], Xn[keep]
        ring[(k - 1) % tail, idx] = Xn
        final[idx] = Xn
        X = Xn

    if tail > 1:
        order = [(iters - 1 - j) % tail for j in range(tail)]
        history = ring[order]
    else:
        history = ring
    return final, history


def _require_origin_line(L: Line, name: str):
    if not isinstance(L, Line):
        raise DegenerateLine(f"{name} must be a line")
    if abs(L.gamma) > 1e-12:
        raise DegenerateLine(f"{name} must pass through the origin (gamma={L.gamma})")


def dr_step_two_lines(L1: Line, L2: Line, x):
    """Expanded linear form 2 P1 P2 - P1 - P2 + I for origin lines.

    L2 is the reflect-first set, so this equals dr_step(L2, L1, x); both
    routes are kept because their agreement cross-checks the projections
    against the closed-form operator algebra.
    """
    _require_origin_line(L1, "L1")
    _require_origin_line(L2, "L2")
    x = np.asarray(x, dtype=float)
    p2 = L2.project(x)
    return 2.0 * L1.project(p2) - L1.project(x) - p2 + x


def twisted_dr_step(M: Line, N: Line, x):
    """P_M P_N + P_{N⊥} P_{M⊥} for origin lines (decouples into two
    alternating-projection sequences; contraction factor cos^2 of the angle
    between the lines)."""
    _require_origin_line(M, "M")
    _require_origin_line(N, "N")
    x = np.asarray(x, dtype=float)
    mp = M.perpendicular_through_origin()
    np_ = N.perpendicular_through_origin()
    return M.project(N.project(x)) + np_.project(mp.project(x))


def shadow_sequence(A: ConstraintSet, B: ConstraintSet, x0, n: int):
    """P_A(x_k) for k = 0..n along the orbit started at x0; shape (n+1, 2)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    x = as_point(x0)
    out = np.empty((n + 1, 2))
    out[0] = A.project(x)
    for k in range(1, n + 1):
        x = dr_step(A, B, x)
        if not np.all(np.isfinite(x)):
            raise ProjectionFailure("projection produced a non-finite iterate", k)
        out[k] = A.project(x)
    return out
