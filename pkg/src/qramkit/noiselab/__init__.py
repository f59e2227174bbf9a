"""Error models, branch simulation, good sets, fidelity estimates and Haar averages."""

from __future__ import annotations

from .branches import (
    BACKEND,
    AddressOutcome,
    BranchState,
    GoodSet,
    branch_propagate,
    compile_layout,
    good_set,
    good_set_sizes,
    good_sets,
    merge_branches,
)
from .fidelity import (
    CSV_COLUMNS,
    ESTIMATORS,
    FidelityEstimate,
    FirstOrder,
    enumerate_first_order,
    estimate_fidelity,
    fidelity_bound_avg,
    fidelity_bound_pointwise,
    fidelity_s2,
    fidelity_threshold,
    fit_scaling,
    scaling_sweep,
)
from .haar import (
    amplitudes_pdf,
    beta,
    beta_inc,
    f_aux,
    j_integral,
    moment_s,
    moment_z,
    overlap_pdf,
    reg_beta_inc,
    simplex_samples,
    threshold_integral,
    threshold_lower,
)
from .layout import (
    MODELS,
    ErrorConfig,
    ErrorModel,
    QueryLayout,
    event_count_probability,
    locations,
    query_layout,
    sample_error_config,
    single_event_configs,
)

__all__ = [name for name in dir() if not name.startswith("_")]
