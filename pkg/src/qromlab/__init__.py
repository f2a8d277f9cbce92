"""Desk-scale quantum-query-model laboratory.

Exact (enumeration-based, no sampling) verification of random-oracle
simulation bounds, measure-and-reprogram, one-way-to-hiding, and
black-box zero-knowledge decision pipelines on tiny interactive
arguments. Everything runs on dense state vectors of a few thousand
amplitudes with probabilities carried as exact rationals wherever a
bound is asserted.
"""

from qromlab.qsim import (
    DensityOnRegister,
    RegisterLayout,
    StateVector,
    apply_unitary,
    measure_register,
    partial_trace,
    swap_test,
    swap_test_circuit,
    trace_distance,
)
from qromlab.oracle import (
    ClassicalOracle,
    ReprogramEvent,
    SparseOracleDist,
    prefix_domain,
    prefixes,
    quantum_query,
    reprogram,
    sparse_advantage,
    sparse_vs_zero_bound,
)
from qromlab.hashfam import (
    AdjustingUnitary,
    PolynomialFamily,
    TableFamily,
    TwoQWiseFamily,
    build_efficient_adjuster,
    build_exact_adjuster,
    family_exactness_check,
    flagged_table_superposition,
    joint_is_uniform,
    random_function_vs_family,
    table_superposition,
)
from qromlab.protocol import (
    ProtocolSpec,
    Transcript,
    acceptance_set,
    honest_execution,
    soundness_exact,
    toy_guess,
    toy_qr,
    toy_table,
)
from qromlab.adversary import (
    CallOracle,
    CallVerifier,
    ExpectedAlgorithm,
    Measure,
    QueryAlgorithm,
    SimulationResult,
    Unitary,
    VerifierMachine,
    build_verifier,
    challenge_structure,
    cont_density,
    expected_wrappers,
    final_cont_state,
    give_up,
    honest_wrapper,
    oracle_zoo,
    ordered_zoo,
    output_distribution,
    pr_budget,
    pr_joint_budget,
    pr_register,
    run_query_algorithm,
    run_simulator,
)
from qromlab.transforms import (
    MarOutcome,
    MarReport,
    MarSchedule,
    O2HReport,
    apply_schedule,
    enumerate_schedules,
    mar_check_general,
    mar_check_ordered,
    mar_general,
    mar_ordered,
    o2h_corollary_C,
    truncate,
)
from qromlab.pipeline import (
    THEOREMS,
    Check,
    ExperimentConfig,
    ExperimentReport,
    decide_constant_round,
    decide_public_coin,
    decide_three_round,
    default_config,
    eps_star,
    expected_time_pipeline,
    extraction_prover_value,
    fs_forgery_exact,
    report_csv,
    report_json,
    run_experiment,
    simulator_trace,
    write_report,
)

__all__ = [
    "AdjustingUnitary",
    "CallOracle",
    "CallVerifier",
    "Check",
    "ClassicalOracle",
    "DensityOnRegister",
    "ExpectedAlgorithm",
    "ExperimentConfig",
    "ExperimentReport",
    "MarOutcome",
    "MarReport",
    "MarSchedule",
    "Measure",
    "O2HReport",
    "PolynomialFamily",
    "ProtocolSpec",
    "QueryAlgorithm",
    "RegisterLayout",
    "ReprogramEvent",
    "SimulationResult",
    "SparseOracleDist",
    "StateVector",
    "THEOREMS",
    "TableFamily",
    "Transcript",
    "TwoQWiseFamily",
    "Unitary",
    "VerifierMachine",
    "acceptance_set",
    "apply_schedule",
    "apply_unitary",
    "build_efficient_adjuster",
    "build_exact_adjuster",
    "build_verifier",
    "challenge_structure",
    "cont_density",
    "decide_constant_round",
    "decide_public_coin",
    "decide_three_round",
    "default_config",
    "enumerate_schedules",
    "eps_star",
    "expected_time_pipeline",
    "expected_wrappers",
    "extraction_prover_value",
    "family_exactness_check",
    "final_cont_state",
    "flagged_table_superposition",
    "fs_forgery_exact",
    "give_up",
    "honest_execution",
    "honest_wrapper",
    "joint_is_uniform",
    "mar_check_general",
    "mar_check_ordered",
    "mar_general",
    "mar_ordered",
    "measure_register",
    "o2h_corollary_C",
    "oracle_zoo",
    "ordered_zoo",
    "output_distribution",
    "partial_trace",
    "pr_budget",
    "pr_joint_budget",
    "pr_register",
    "prefix_domain",
    "prefixes",
    "quantum_query",
    "random_function_vs_family",
    "report_csv",
    "report_json",
    "reprogram",
    "run_experiment",
    "run_query_algorithm",
    "run_simulator",
    "simulator_trace",
    "soundness_exact",
    "sparse_advantage",
    "sparse_vs_zero_bound",
    "swap_test",
    "swap_test_circuit",
    "table_superposition",
    "toy_guess",
    "toy_qr",
    "toy_table",
    "trace_distance",
    "truncate",
    "write_report",
]

__version__ = "0.1.0"
