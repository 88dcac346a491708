"""Exception taxonomy shared across the package.

Integration failures near a singular endpoint (flight-time blow-up, step
caps) are expected operating conditions for some systems, so callers often
catch `FlowError` subclasses per grid point and record them instead of
aborting a whole sweep.
"""

from __future__ import annotations


class PseudoHopfError(Exception):
    """Base class for all package errors."""


class ConfigError(PseudoHopfError):
    """Invalid system descriptor, gallery name, or run configuration."""


class ClassificationError(PseudoHopfError):
    """Declared component class contradicts the field's jet coefficients."""


class FlowError(PseudoHopfError):
    """Base class for event-detected integration failures."""


class WrongLaunchDirection(FlowError):
    """Vertical velocity at the start point pushes out of the requested half-plane."""


class TimeCapExceeded(FlowError):
    """|t| exceeded the flight-time cap before the orbit returned to the section."""


class StepCapExceeded(FlowError):
    """Accepted-step budget exhausted before the orbit returned to the section."""


class HalfPlaneViolation(FlowError):
    """Orbit crossed y=0 before clearing the launch collar (tangency too close to the start)."""


class DegenerateCenter(PseudoHopfError):
    """Displacement is zero within provider noise: the unperturbed pairing is a center."""


class SignInstability(PseudoHopfError):
    """Sign probes disagree across the window; the window is too large for sign data."""


class NoSignChange(PseudoHopfError):
    """Displacement has one sign on the whole scan grid: no crossing cycle detected.

    This is the theorem-conformant outcome for the wrong sign of the
    translation parameter, not a numerical failure.
    """

    def __init__(self, message: str, b: float, n_evaluated: int, n_failed: int):
        super().__init__(message)
        self.b = b
        self.n_evaluated = n_evaluated
        self.n_failed = n_failed


class NotSliding(PseudoHopfError):
    """Both fields cross the segment between 0 and b; it is not a sliding segment."""


class ModelBackendUnavailable(PseudoHopfError):
    """Operation requires a polynomial vector field but the side is model-backed."""


class FitError(PseudoHopfError):
    """Fit preconditions violated (sample count, positivity, span)."""


class DivergentSamples(FitError):
    """Sample spread grows toward small |b|; no finite limit to extrapolate."""
