"""Crossing-cycle laboratory for planar piecewise-smooth vector fields.

Builds half-return maps of the two component fields (by event-detected
integration or from analytic models), locates the crossing limit cycle
born when the upper field is translated along the switching line, and
verifies predicted asymptotic laws for the cycle's position and period
against swept measurements.
"""

from .bifurcation import (
    CycleRecord,
    SignTriple,
    SlidingSegment,
    cycle_period,
    displacement,
    find_crossing_cycle,
    sign_data,
    sliding_segment,
)
from .asymptotics import (
    AsymptoticLaw,
    DisplacementLeading,
    GasullCoefficients,
    dulac_invert_leading,
    efocus_alpha1,
    gasull_coeffs,
    nfocus_alpha1,
    polar_components,
    predict_period_law,
    predict_position_dulac,
    predict_position_smooth,
    table_law,
)
from .errors import (
    ClassificationError,
    ConfigError,
    DegenerateCenter,
    DivergentSamples,
    FitError,
    FlowError,
    HalfPlaneViolation,
    ModelBackendUnavailable,
    NoSignChange,
    NotSliding,
    PseudoHopfError,
    SignInstability,
    StepCapExceeded,
    TimeCapExceeded,
    WrongLaunchDirection,
)
from .fields import (
    ComponentClass,
    FlowComponent,
    GalleryEntry,
    ModelComponent,
    ModelFlight,
    ModelMap,
    PiecewiseSystem,
    PlanarField,
    classify_component,
    eval_field,
    gallery_names,
    make_builtin,
    system_from_json,
    system_to_json,
    validate_h1,
)
from .flow import DEFAULT_LIMITS, IntegrationLimits, SectionHit, flow_to_section, invariant_drift
from .returns import (
    LocalCoeffEstimate,
    ReturnData,
    estimate_local_coeffs,
    half_return,
    inverse_half_return,
)
from .sweepfit import (
    FitResult,
    SweepGrid,
    SweepResult,
    Verdict,
    classify_law,
    compare,
    fit_constant,
    fit_log,
    fit_power,
    sweep,
)

__version__ = "0.1.0"
