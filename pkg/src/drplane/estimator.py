"""Scikit-learn style front end for basin classification.

``BasinClassifier`` is shaped like a clustering estimator: ``fit`` discovers
the attractor table for a configuration (feasible points plus periodic
orbits, optionally seeded from user-supplied start points), and ``predict``
assigns each planar start point the label of the attractor its orbit
settles on (0 = unclassified).  Parameters follow the usual get_params /
set_params protocol so the classifier composes with pipelines and grid
search.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .basins import build_attractor_table, label_start_points, render_basins
from .geometry import Ellipse, Line, PSphere, Region

__all__ = ["BasinClassifier"]


def _validate_points(X):
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected planar points of shape (n, 2), got {X.shape}")
    return X


class BasinClassifier(BaseEstimator):
    """Assign Douglas-Rachford start points to their attractors.

    Parameters
    ----------
    set_kind : "ellipse", "psphere" or "circle"
    set_param : semi-axis b (ellipse) or exponent p (p-sphere); ignored for
        "circle"
    slope, intercept : the line y = slope*x + intercept
    region : (xmin, xmax, ymin, ymax) scanned for periodic points
    max_period : largest orbit period searched for
    iters : orbit length used to classify a start point
    match_tol : final-cycle distance accepted as "settled on the attractor"
    scan_grid : n for the n-by-n grid of scan seeds
    threads : worker threads used by render()
    """

    def __init__(
        self,
        set_kind="ellipse",
        set_param=2.0,
        slope=1.0,
        intercept=0.0,
        region=(-4.0, 4.0, -4.0, 4.0),
        max_period=5,
        iters=1000,
        match_tol=1e-3,
        scan_grid=32,
        threads=1,
    ):
        self.set_kind = set_kind
        self.set_param = set_param
        self.slope = slope
        self.intercept = intercept
        self.region = region
        self.max_period = max_period
        self.iters = iters
        self.match_tol = match_tol
        self.scan_grid = scan_grid
        self.threads = threads

    def _sets(self):
        if self.set_kind == "ellipse":
            conic = Ellipse(float(self.set_param))
        elif self.set_kind == "psphere":
            conic = PSphere(float(self.set_param))
        elif self.set_kind == "circle":
            conic = PSphere(2.0)
        else:
            raise ValueError(f"unknown set_kind {self.set_kind!r}")
        line = Line.from_slope_intercept(float(self.slope), float(self.intercept))
        return conic, line

    def _region(self):
        return Region(*map(float, self.region))

    def fit(self, X=None, y=None):
        """Discover the attractor table; X optionally adds scan seed points."""
        conic, line = self._sets()
        region = self._region()
        extra = _validate_points(X) if X is not None else None
        table = build_attractor_table(
            conic,
            line,
            region,
            int(self.max_period),
            grid=int(self.scan_grid),
            extra_seeds=extra,
        )
        self.sets_ = (conic, line)
        self.attractor_table_ = table
        self.n_attractors_ = len(table)
        self.feasible_points_ = np.array(
            [e.point for e in table.entries if e.kind == "feasible"]
        )
        return self

    def predict(self, X):
        """Label each start point by the attractor its orbit reaches (0 = none)."""
        check_is_fitted(self, "attractor_table_")
        X = _validate_points(X)
        conic, line = self.sets_
        return label_start_points(
            conic,
            line,
            self.attractor_table_,
            X,
            iters=int(self.iters),
            match_tol=float(self.match_tol),
        )

    def fit_predict(self, X, y=None):
        return self.fit(X).predict(X)

    def render(self, width, height, region=None):
        """Basin image over the fitted (or given) region as a BasinGrid."""
        check_is_fitted(self, "attractor_table_")
        conic, line = self.sets_
        reg = Region(*map(float, region)) if region is not None else self._region()
        return render_basins(
            conic,
            line,
            self.attractor_table_,
            reg,
            int(width),
            int(height),
            iters=int(self.iters),
            match_tol=float(self.match_tol),
            threads=int(self.threads),
        )
