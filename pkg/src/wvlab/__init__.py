"""Weak values, ABL statistics and von Neumann pointer simulations for
pre- and post-selected quantum systems."""
from .hilbert import (
    OperatorMatrix,
    SpaceShape,
    SpectralDecomposition,
    StateVector,
    identity,
    inner,
    pauli,
    pauli_on,
    product_state,
    projector,
    qubit,
    qubit_projector,
    spectral,
    tensor,
)
from .tsvf import (
    AblDistribution,
    AllOutcomesForbidden,
    OrthogonalSelection,
    TwoStateVector,
    abl_distribution,
    abl_expectation,
    correlation,
    dichotomic_strong_check,
    pauli_identity_residual,
    weak_value,
)
from .pointer import (
    PointerConfig,
    estimate_weak_value,
    post_selected_pointer,
    sample,
    strong_outcome_frequencies,
)
from .opexpr import ParseError, parse
from .scenarios import builtin, verify

__version__ = "0.1.0"
