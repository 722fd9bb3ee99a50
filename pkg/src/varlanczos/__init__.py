"""Short-time quantum propagation with Krylov subspaces that recycle earlier basis states."""
from .grid import (
    DenseHermitianOracle,
    Grid2D,
    GridHamiltonian,
    HenonHeilesParams,
    exact_evolve_dense,
    gaussian_packet,
    henon_heiles_potential,
    spectral_bounds,
)
from .harness import RunConfig, RunRecord, run_comparison, run_propagation
from .observables import TimeSeries, autocorrelation, energy_spectrum, error_metric, spectrum
from .oracle_suite import run_oracle_suite
from .propagators import (
    ChebyshevPlan,
    ChebyshevPropagator,
    ExtendedLanczosPropagator,
    LanczosPropagator,
    chebyshev_propagate,
    extended_step,
    lanczos_step,
)
from .state import HermitianOperator, inner, norm, normalize
from .subspace import SubspaceSystem, evolve_subspace, thresholded_cholesky

__version__ = "0.1.0"
