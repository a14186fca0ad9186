"""Central record of numerical tolerances.

Every knob the geometry and dynamics layers consult lives here so that the
defaults are stated once.  Functions accept an optional ``Tolerances``
instance; ``DEFAULT`` is used when none is given.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # projections
    membership: float = 1e-10        # residual bound for points reported on a set
    equidistant: float = 1e-9        # distance window treated as an exact tie
    candidate_dedupe: float = 1e-8   # candidates closer than this are one point
    axis_branch: float = 1e-6        # |coordinate| below which on-axis ellipse branches are added
    degenerate_division: float = 1e-12

    # p-sphere sampling (multistart along the quadrant arc)
    psphere_samples: int = 4096
    psphere_max_samples: int = 65536
    psphere_newton_tol: float = 1e-13
    ambiguity_separation: float = 1e-10  # stop doubling once best two minima separate by this

    # feasibility / distances
    bisect_tol: float = 1e-12
    tangency_rel: float = 1e-12
    distance_samples: int = 8192

    def __post_init__(self):
        if self.psphere_samples < 8 or self.psphere_max_samples < self.psphere_samples:
            raise ValueError("invalid p-sphere sampling configuration")


DEFAULT = Tolerances()
