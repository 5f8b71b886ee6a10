"""Open-system propagation by Lie-algebraic disentangling and Liouville
coherent states, with a brute-force Lindblad reference integrator."""

from .core import (
    AlgebraKind,
    Generator,
    apply_superop,
    devectorize,
    hs_inner,
    superop_matrix,
    vectorize,
)
from .errors import (
    DimensionMismatch,
    LCSError,
    NumericalFailure,
    ParameterSingularity,
    PropagatorBlowUp,
    StepSizeUnderflow,
    TruncationLeak,
    UnphysicalState,
)
from .lcs import (
    CircleImage,
    CoherentState,
    GParams,
    circle_map,
    coherent_vector,
    evolve_params,
    identity_resolution_check_su2,
    su11_assemble,
    su2_decompose,
)
from .models import OscillatorBathParams, SpinBosonParams, chi, su11_rates, su2_rates
from .oracle import Trajectory, observables, trace_distance
from .riccati import (
    Coefficients,
    DisentangleCoefficients,
    RateFunctions,
    apply_propagator,
    solve_const,
    solve_ode,
)

__version__ = "0.1.0"
