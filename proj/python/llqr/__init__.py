"""Localized LQR synthesis, feasibility tests and closed-loop simulation."""

from ._core import (
    ClosedLoopMaps,
    ColumnSynthesis,
    ColumnVerdict,
    ConstraintSpace,
    CostWeights,
    Direction,
    GlobalSolveResult,
    LocalizabilityReport,
    LocalizedConstraints,
    Plant,
    ReducedPlant,
    RiccatiSolution,
    Scheme,
    SensitivityReport,
    SimTrace,
    SparsityPattern,
    SynthesisResult,
    awgn_disturbance,
    build_localized_fir_constraints,
    centralized_h2_objective,
    check_localizable,
    embed_control,
    embed_state,
    evaluate_awgn_cost,
    feasibility_tolerance,
    graph_distance,
    impulse_disturbance,
    is_d_localized,
    load_maps,
    load_plant,
    localized_region,
    make_chain_benchmark,
    pattern_power,
    pattern_power_union,
    pattern_product,
    perturb_maps,
    recursion_residual,
    reduce,
    save_maps,
    save_plant,
    sensitivity_experiment,
    simulate,
    solve_dare,
    solve_global,
    spectral_radius,
    support,
    synthesize_llqr,
    validate_localized_fir_constraints,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
