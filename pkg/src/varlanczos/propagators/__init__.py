from .chebyshev import (
    ChebyshevPlan,
    ChebyshevPropagator,
    SpectralBoundsError,
    bessel_j,
    bessel_j_sequence,
    chebyshev_propagate,
)
from .extended import (
    BasisEntry,
    BasisWindow,
    DependentStateError,
    ExtendedLanczosPropagator,
    extended_step,
    first_step_basis,
    replace_dependent,
)
from .lanczos import LanczosPropagator, lanczos_step
