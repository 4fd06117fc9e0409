"""Deep thermalization of free-fermion circuits in the covariance-matrix picture."""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CollapseUndefinedError,
    ConfigError,
    ContractError,
    DimensionError,
    DomainError,
    InvalidCovarianceError,
    NumericalConsistencyError,
    ParityError,
    SizeError,
)
from .gaussian_state import (  # noqa: E402
    BrickworkCircuit,
    BrickworkEvolution,
    CovarianceMatrix,
    apply_local_gate,
    apply_rotation,
    global_random_state,
    run_brickwork,
    subsystem_block,
    vacuum,
)
from .measurement import (  # noqa: E402
    MeasurementRecord,
    ProjectedEnsemble,
    block_collapse,
    block_probability,
    build_projected_ensemble,
    sample_outcome,
    single_mode_collapse,
    single_mode_probability,
)
from .numerics import (  # noqa: E402
    canonical_singular_values,
    digamma,
    haar_special_orthogonal,
    pfaffian,
    symmetric_beta_cdf,
)
from .observables import (  # noqa: E402
    GheSpec,
    correlator_element,
    ghe_element_cdf,
    ghe_element_pdf,
    ghe_sample,
    ghe_sample_batch,
    npoint_correlator,
    page_mean,
    page_variance_limit,
    parse_observable,
    renyi_entropy,
    singular_value_joint_pdf,
    von_neumann_entropy,
)
from .statistics import (  # noqa: E402
    EmpiricalDistribution,
    concentration_probe,
    design_distance_term,
    ghe_moment,
    pe_moment,
    wasserstein1_empirical,
    wasserstein1_vs_analytic,
)
