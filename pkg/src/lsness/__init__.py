"""Exact matrix-product steady states of the boundary-driven Lai-Sutherland chain."""

__version__ = "0.1.0"

from .auxrep import (  # noqa: E402
    AuxState,
    LaxComponents,
    ReprParams,
    VertexComponents,
    apply_chemical_weight,
    build_conjugate,
    build_generators,
    build_two_leg,
    check_levi_structure,
    check_lie_algebra,
    check_vacuum_conditions,
    check_weyl_heisenberg,
)
from .estimator import NESSEstimator, ScalingFit  # noqa: E402
from .exceptions import *  # noqa: E402,F401,F403
from .mpo import (  # noqa: E402
    build_density,
    check_boundary_system,
    check_defining_relation,
    check_parities,
    check_sutherland,
    check_transfer_commutation,
    contract_cholesky,
    grand_canonical_density,
    project_sector,
    wgs_contract,
)
from .observables import (  # noqa: E402
    check_aux_symmetries,
    current_expectation,
    doping,
    local_expectation,
    partition_function,
    scaling_fit,
)
from .oracle import (  # noqa: E402
    build_currents,
    build_dissipator,
    build_hamiltonian,
    build_model,
    build_symmetry_maps,
    liouvillian_residual,
    steady_states,
)
from .physical import PhysicalOperator  # noqa: E402
from .report import CheckResult, Report  # noqa: E402
from .scalars import ExactScalar, GaussInt  # noqa: E402
