"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class DrplaneError(Exception):
    """Base class for domain errors (CLI maps these to exit code 1)."""


class NonFiniteInput(DrplaneError):
    """A coordinate or parameter was NaN or infinite."""


class DegenerateLine(DrplaneError):
    """A line normal of zero length (or other unusable line data)."""


class CenterOfCircle(DrplaneError):
    """Projection of the origin onto the unit circle is the whole circle."""


class UnsupportedPair(DrplaneError):
    """Set pair outside the supported line/compact-set combinations."""


class SingularGradient(DrplaneError):
    """Level-set gradient vanishes or blows up (p-sphere cusp)."""


class OffSet(DrplaneError):
    """A point required to lie on a set does not (membership residual too big)."""


class EvaluationFailure(DrplaneError):
    """A map could not be evaluated at a finite-difference stencil point."""


class ProjectionFailure(DrplaneError):
    """A projection failed mid-orbit; ``index`` is the failing iteration."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (iteration {index})")
        self.index = index


class PeriodicPointNotFound(DrplaneError):
    """Newton refinement failed or escaped the search region."""


class NonMinimalPeriod(DrplaneError):
    """Root found, but its actual period divides the requested one.

    ``found`` carries the point classified at its true (smaller) period.
    """

    def __init__(self, found):
        super().__init__(
            f"root has true period {found.period}, not the requested one"
        )
        self.found = found


class NotSeparable(DrplaneError):
    """The sets intersect (or touch): no strictly separating hyperplane."""


class NonConvergedShadow(DrplaneError):
    """Shadow sequence still moving after the requested iterations."""


class TheoremNotApplicable(DrplaneError):
    """Hypotheses of the shadow-limit statement fail (e.g. nonconvex body)."""


class EmptyTable(DrplaneError):
    """No feasible or periodic points were found for the configuration."""


class PaletteTooSmall(DrplaneError):
    """Fewer palette colors than labels to draw."""
