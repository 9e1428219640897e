"""Simulator and analysis toolkit for leveled quantum branching programs."""

from .analysis import (
    DerivedObdd,
    LevelConfigurations,
    ObddWidths,
    SeparationReport,
    ThetaPartition,
    derive_deterministic_obdd,
    lower_bound_width,
    measured_separation,
    min_obdd_width,
    packing_width_bound,
    reachable_configurations,
    separation_report,
    theta_bounds,
    theta_components,
)
from .constructions import (
    GoodSet,
    GoodSetError,
    ModBlockSpec,
    PermutationBp,
    amplify,
    block_final_amplitudes,
    build_mod_program,
    compose_parallel,
    failing_residues,
    good_multipliers,
    greedy_good_set,
    is_prime,
    mod_block,
    mod_truth_table,
    permutation_bp_to_qbp,
    sample_good_set,
    target_set_size,
    universal_exact_qbp,
)
from .program import (
    CheckReport,
    Classification,
    Margin,
    OneSided,
    ProgramFormatError,
    QbProgram,
    QuantumTransformation,
    SampledReport,
    StableProbObdd,
    TruthTable,
    accept_probability,
    bits_of_value,
    classify,
    classify_probability,
    computes,
    computes_sampled,
    evaluate,
    evaluate_all,
    evaluate_stable_prob_obdd,
    final_configuration,
    is_read_once,
    is_stable,
    load_program,
    program_digest,
    program_from_obj,
    program_to_obj,
    save_program,
    state_distributions,
    value_of_bits,
)
from .realify import realify_matrix, realify_program, realify_vector

__version__ = "0.1.0"

__all__ = [
    "CheckReport",
    "Classification",
    "DerivedObdd",
    "GoodSet",
    "GoodSetError",
    "LevelConfigurations",
    "Margin",
    "ModBlockSpec",
    "ObddWidths",
    "OneSided",
    "PermutationBp",
    "ProgramFormatError",
    "QbProgram",
    "QuantumTransformation",
    "SampledReport",
    "SeparationReport",
    "StableProbObdd",
    "ThetaPartition",
    "TruthTable",
    "accept_probability",
    "amplify",
    "bits_of_value",
    "block_final_amplitudes",
    "build_mod_program",
    "classify",
    "classify_probability",
    "compose_parallel",
    "computes",
    "computes_sampled",
    "derive_deterministic_obdd",
    "evaluate",
    "evaluate_all",
    "evaluate_stable_prob_obdd",
    "failing_residues",
    "final_configuration",
    "good_multipliers",
    "greedy_good_set",
    "is_prime",
    "is_read_once",
    "is_stable",
    "load_program",
    "lower_bound_width",
    "measured_separation",
    "min_obdd_width",
    "mod_block",
    "mod_truth_table",
    "packing_width_bound",
    "permutation_bp_to_qbp",
    "program_digest",
    "program_from_obj",
    "program_to_obj",
    "reachable_configurations",
    "realify_matrix",
    "realify_program",
    "realify_vector",
    "sample_good_set",
    "save_program",
    "separation_report",
    "state_distributions",
    "target_set_size",
    "theta_bounds",
    "theta_components",
    "universal_exact_qbp",
    "value_of_bits",
]
