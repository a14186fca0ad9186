"""Basin-of-attraction rendering.

Each pixel midpoint is iterated for a fixed number of steps and the tail of
its orbit is matched against a table of attractors (feasible points plus the
phase points of every periodic orbit found by the scan); the pixel takes the
label of the nearest table entry within the match tolerance, measuring
nearness of the last m iterates against the entry's full m-cycle, with ties
between phases of one cycle resolved by the final iterate.  Unmatched,
escaped or failed pixels stay label 0.

Rendering parallelizes over fixed-size pixel chunks; chunk boundaries do not
depend on the thread count, every chunk is a pure function of its midpoints,
and results land in disjoint slices, so the output is bit-identical for any
degree of parallelism.
"""

from __future__ import annotations

import colorsys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyTable, PaletteTooSmall, UnsupportedPair
from .geometry import ConstraintSet, Line, Region, feasible_points
from .dynamics import dr_orbit_batch, dr_step
from .stability import periodic_scan
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "AttractorEntry",
    "AttractorTable",
    "BasinGrid",
    "build_attractor_table",
    "render_basins",
    "classify_orbit_tails",
    "label_start_points",
    "encode_ppm",
    "default_palette",
    "grid_to_json",
    "pixel_midpoints",
]

_CHUNK = 8192           # pixels per work unit; fixed so threading cannot reorder math
_FREEZE_TOL = 1e-14     # converged-step freeze inside the renderer
_ENTRY_SEPARATION = 1e-6

FEASIBLE = "feasible"
PERIODIC = "periodic"


@dataclass(frozen=True)
class AttractorEntry:
    label: int
    kind: str            # "feasible" or "periodic"
    period: int
    point: np.ndarray    # this entry's phase point (= cycle[0])
    cycle: np.ndarray    # (period, 2) full orbit of the phase point


@dataclass(frozen=True)
class AttractorTable:
    entries: tuple

    def __len__(self):
        return len(self.entries)

    @property
    def max_period(self):
        return max((e.period for e in self.entries), default=1)

    def points(self):
        return np.array([e.point for e in self.entries])


@dataclass
class BasinGrid:
    width: int
    height: int
    region: Region
    labels: np.ndarray       # (height, width) int32, row 0 at ymax
    iterations_used: int


def pixel_midpoints(region: Region, width: int, height: int):
    """Row-major midpoints, top row at ymax (matches the image layout)."""
    return region.grid_points(width, height)


# ---------------------------------------------------------------------------
# attractor table

def _split_conic_line(A, B):
    if isinstance(A, Line) and not isinstance(B, Line):
        return B, A
    if isinstance(B, Line) and not isinstance(A, Line):
        return A, B
    raise UnsupportedPair("expected one conic (ellipse or p-sphere) and one line")


def build_attractor_table(
    A: ConstraintSet,
    B: ConstraintSet,
    region: Region,
    max_period: int,
    *,
    grid: int = 32,
    extra_seeds=None,
    tols: Tolerances = DEFAULT,
) -> AttractorTable:
    """Feasible points plus the scan's periodic orbits, expanded per phase.

    Entries are labeled densely from 1: feasible points first (sorted), then
    periodic orbits by (period, canonical point), each orbit contributing one
    entry per phase point in cycle order.  For intercept-zero lines the table
    is exactly symmetrized under negation so renders inherit the
    configuration's point symmetry bit-for-bit.
    """
    conic, line = _split_conic_line(A, B)
    feas = [np.asarray(f, dtype=float) for f in feasible_points(conic, line, tols)]
    found = periodic_scan(A, B, region, max_period, grid=grid, extra_seeds=extra_seeds)

    orbits = []
    for pp in found:
        cyc = [np.asarray(pp.point, dtype=float)]
        for _ in range(pp.period - 1):
            cyc.append(dr_step(A, B, cyc[-1]))
        cyc = np.array(cyc)
        if pp.period == 1 and any(np.linalg.norm(pp.point - f) <= _ENTRY_SEPARATION for f in feas):
            continue  # the scan rediscovered a feasible point
        orbits.append((pp.period, cyc))

    if line.through_origin:
        feas, orbits = _symmetrize(feas, orbits)

    feas.sort(key=lambda p: (p[0], p[1]))
    orbits.sort(key=lambda t: (t[0], t[1][0][0], t[1][0][1]))

    entries = []
    for f in feas:
        entries.append(
            AttractorEntry(
                label=len(entries) + 1,
                kind=FEASIBLE,
                period=1,
                point=f,
                cycle=f.reshape(1, 2),
            )
        )
    for period, cyc in orbits:
        for k in range(period):
            rolled = np.roll(cyc, -k, axis=0)
            entries.append(
                AttractorEntry(
                    label=len(entries) + 1,
                    kind=PERIODIC,
                    period=period,
                    point=rolled[0],
                    cycle=rolled,
                )
            )
    if not entries:
        raise EmptyTable("no feasible or periodic points found for this configuration")
    return AttractorTable(entries=tuple(entries))


def _symmetrize(feas, orbits):
    """Snap the table to exact invariance under (x, y) -> (-x, -y)."""
    feas = [f.copy() for f in feas]
    done = set()
    for i in range(len(feas)):
        if i in done:
            continue
        for j in range(i + 1, len(feas)):
            if j in done:
                continue
            if np.linalg.norm(feas[j] + feas[i]) <= _ENTRY_SEPARATION:
                feas[j] = -feas[i]
                done.update((i, j))
                break

    def orbit_gap(c1, c2):
        # treat cycles as point sets
        d = np.linalg.norm(c1[:, None, :] - c2[None, :, :], axis=-1)
        return max(d.min(axis=0).max(), d.min(axis=1).max())

    orbits = [(m, c.copy()) for m, c in orbits]
    handled = set()
    for i, (m, cyc) in enumerate(orbits):
        if i in handled:
            continue
        if orbit_gap(cyc, -cyc) <= _ENTRY_SEPARATION:
            # self-symmetric orbit: pair each phase with its negation
            fixed = cyc.copy()
            paired = set()
            for k in range(m):
                if k in paired:
                    continue
                kk = int(np.argmin(np.linalg.norm(cyc + cyc[k], axis=1)))
                if kk != k:
                    fixed[kk] = -fixed[k]
                    paired.update((k, kk))
            orbits[i] = (m, fixed)
            handled.add(i)
            continue
        for j in range(i + 1, len(orbits)):
            mj, cj = orbits[j]
            if j in handled or mj != m:
                continue
            if orbit_gap(cj, -cyc) <= _ENTRY_SEPARATION:
                # phase-align the negated partner
                shift = int(np.argmin([np.linalg.norm(cj[0] + cyc[k]) for k in range(m)]))
                orbits[j] = (m, -np.roll(cyc, -shift, axis=0))
                handled.update((i, j))
                break
    return feas, orbits


# ---------------------------------------------------------------------------
# classification and rendering

def classify_orbit_tails(table: AttractorTable, final, history, match_tol: float):
    """Labels for orbit tails: ``history`` is (k, n, 2) in recency order.

    Primary key: min distance of the entry's last-period iterates to the
    entry's cycle; ties between phase entries of one cycle (their cycle sets
    are identical) resolve by the final iterate's distance to the entry's own
    phase point; remaining ties keep the lowest label.
    """
    n = final.shape[0]
    best_cycle = np.full(n, np.inf)
    best_phase = np.full(n, np.inf)
    labels = np.zeros(n, dtype=np.int32)
    for e in table.entries:
        rows = min(e.period, history.shape[0])
        D = np.full(n, np.inf)
        for j in range(rows):
            d = np.linalg.norm(history[j][:, None, :] - e.cycle[None, :, :], axis=-1)
            d = np.where(np.isfinite(d), d, np.inf).min(axis=1)
            D = np.minimum(D, d)
        df = np.linalg.norm(final - e.point, axis=1)
        df = np.where(np.isfinite(df), df, np.inf)
        take = (D < best_cycle) | ((D == best_cycle) & (df < best_phase))
        labels = np.where(take, np.int32(e.label), labels)
        best_phase = np.where(take, df, best_phase)
        best_cycle = np.where(take, D, best_cycle)
    return np.where(best_cycle <= match_tol, labels, 0).astype(np.int32)


def label_start_points(
    A: ConstraintSet,
    B: ConstraintSet,
    table: AttractorTable,
    X0,
    iters: int = 1000,
    match_tol: float = 1e-3,
    bailout: float = 1e6,
):
    """Run orbits from each row of X0 and label them against the table."""
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    final, history = dr_orbit_batch(
        A, B, X0, iters, bailout=bailout, freeze_tol=_FREEZE_TOL, tail=table.max_period
    )
    return classify_orbit_tails(table, final, history, match_tol)


def render_basins(
    A: ConstraintSet,
    B: ConstraintSet,
    table: AttractorTable,
    region: Region,
    width: int,
    height: int,
    iters: int = 1000,
    match_tol: float = 1e-3,
    *,
    threads: int = 1,
    bailout: float = 1e6,
) -> BasinGrid:
    """Label every pixel midpoint; deterministic for any thread count."""
    if iters < 1:
        raise ValueError("iters must be at least 1")
    if match_tol <= 0.0:
        raise ValueError("match_tol must be positive")
    mids = pixel_midpoints(region, width, height)
    n = mids.shape[0]
    labels = np.zeros(n, dtype=np.int32)
    bounds = [(lo, min(lo + _CHUNK, n)) for lo in range(0, n, _CHUNK)]

    def work(span):
        lo, hi = span
        labels[lo:hi] = label_start_points(
            A, B, table, mids[lo:hi], iters=iters, match_tol=match_tol, bailout=bailout
        )

    if threads <= 1 or len(bounds) == 1:
        for span in bounds:
            work(span)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, bounds))
    return BasinGrid(
        width=width,
        height=height,
        region=region,
        labels=labels.reshape(height, width),
        iterations_used=iters,
    )


# ---------------------------------------------------------------------------
# output encodings

def default_palette(n_labels: int):
    """Black for unclassified, then n_labels distinct colors, deterministic."""
    base = [
        (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
        (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
        (210, 245, 60), (250, 190, 212), (0, 128, 128), (220, 190, 255),
        (170, 110, 40), (255, 250, 200), (128, 0, 0), (170, 255, 195),
        (128, 128, 0), (255, 215, 180), (0, 0, 128), (128, 128, 128),
    ]
    colors = [(0, 0, 0)]
    for i in range(n_labels):
        if i < len(base):
            colors.append(base[i])
        else:
            h = (i * 0.61803398875) % 1.0
            r, g, b = colorsys.hsv_to_rgb(h, 0.85, 0.95)
            colors.append((int(r * 255), int(g * 255), int(b * 255)))
    return colors


def encode_ppm(grid: BasinGrid, palette) -> bytes:
    """Binary PPM (P6, maxval 255); top row at ymax; byte-exact output."""
    maxlab = int(grid.labels.max(initial=0))
    if len(palette) < maxlab + 1:
        raise PaletteTooSmall(f"palette has {len(palette)} colors, need {maxlab + 1}")
    lut = np.asarray(palette, dtype=np.uint8)
    img = lut[grid.labels]
    header = f"P6\n{grid.width} {grid.height}\n255\n".encode("ascii")
    return header + img.tobytes()


def grid_to_json(grid: BasinGrid, table: AttractorTable) -> dict:
    """Label-grid dump; the one schema shared by the CLI and the service."""
    return {
        "schema": 1,
        "width": grid.width,
        "height": grid.height,
        "iterations": grid.iterations_used,
        "region": {
            "xmin": grid.region.xmin,
            "xmax": grid.region.xmax,
            "ymin": grid.region.ymin,
            "ymax": grid.region.ymax,
        },
        "attractors": [
            {
                "label": e.label,
                "kind": e.kind,
                "period": e.period,
                "point": [float(e.point[0]), float(e.point[1])],
                "cycle": [[float(x), float(y)] for x, y in e.cycle],
            }
            for e in table.entries
        ],
        "labels": [int(v) for v in grid.labels.ravel()],
    }
