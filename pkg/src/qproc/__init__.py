"""Achievable precision bounds and optimal measurement protocols for
estimating one scalar function of many quantum-process parameters."""

from .errors import (
    ArgumentError,
    ChainViolation,
    ConvergenceError,
    DegenerateModelError,
    EstimationError,
    InconsistentDerivativeError,
    InvariantViolation,
    QprocError,
    ResourceLimitError,
    SchemaError,
    UnboundedVarianceError,
    UnsupportedDimensionError,
    UnsupportedProtocolError,
)
from .families import (
    BlochFamily,
    EpsilonPairFamily,
    GeometryExport,
    NormMinimizer,
    PauliZFamily,
    ProcessFamily,
    cross_polytope_decomposition,
    dual_norm,
    generator,
    minimize_norm,
    process_norm,
    unit_ball_mesh,
)
from .operators import (
    DensityOperator,
    HermitianOperator,
    Povm,
    PureState,
    born_probabilities,
    evolve_density,
    evolve_pure,
    identity,
    matrix_from_pairs,
    matrix_to_pairs,
    max_dim,
    pauli_z_generators,
    seminorm,
    tensor,
)
from .protocols import (
    Branch,
    Protocol,
    SignString,
    ZooAmplitudes,
    bloch_protocol,
    corner_protocol,
    corner_strategy,
    hyperedge_protocol,
    hyperface_protocol,
    kissing_residual,
    mixture,
    optimal_protocol,
    parity_eigenvalue,
    parity_operator,
    protocol_fisher,
    zoo_protocol,
)
from .qfisher import (
    ChainReport,
    MeasurementModel,
    SldResult,
    bloch_direction_grid,
    brute_force_qubit_fisher,
    classical_fisher,
    qfi_from_sld,
    qfi_pure,
    qubit_fisher_scan,
    qubit_projective_povm,
    qubit_state,
    sinusoid_model,
    sld,
    verify_chain,
)
from .simulate import (
    BiasCorrection,
    EstimatorReport,
    OutcomeRecord,
    apportion_shots,
    branch_distribution,
    branch_rng,
    debias,
    estimate_q,
    fit_bias_correction,
    fit_bias_polynomial,
    report,
    sample_estimates,
    simulate,
)
from .tangent import (
    CanonicalForm,
    FisherMatrix,
    OneForm,
    TangentVector,
    canonicalize,
    fisher_dual,
    fisher_form,
    fisher_orthogonal_vector,
    pair,
)

__version__ = "0.1.0"
