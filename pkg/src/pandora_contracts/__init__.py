"""Exploration-contract solvers over Pandora's-box search instances."""

from .model import (
    EPS,
    Box,
    Contract,
    Instance,
    LinearContract,
    Prize,
    build_instance,
    instance_digest,
    load_json,
    save_json,
    validate,
    validate_contract,
    zero_contract,
)
from .weitzman import (
    CONTINUE,
    NEVER_TAKE_YET,
    STOP_AND_TAKE,
    FairCapProfile,
    ResolvedPolicy,
    SimulationResult,
    UtilityPair,
    evaluate_detailed,
    evaluate_exact,
    fair_cap,
    fair_cap_principal,
    fair_cap_profile,
    simulate,
)
from .tie_breaking import contract_utilities, optimal_policy, partition_phases, tau_index
from .linear import alpha_sweep, build_faircap_curve, critical_values, optimal_linear
from .general import (
    canonical_contract,
    first_best,
    phase2_success_probability,
    solve_binary,
    solve_iid_single_prize,
    solve_no_agent_value,
)
from .generators import (
    gen_linear_gap_family,
    gen_paper_example_iid,
    gen_random,
    random_contract,
)

__version__ = "0.1.0"
