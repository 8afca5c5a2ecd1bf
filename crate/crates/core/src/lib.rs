//! Simulation library for refrigeration through a quantum SWITCH.
//!
//! The crate builds up in layers: dense complex matrices (`tensor`),
//! quantum states and thermalizing channels (`channels`), the coherent
//! superposition of channel orderings with its conditional outputs
//! (`switch`), a gate-level realization with noise and shot sampling
//! (`circuit`), cooling-cycle statistics (`fridge`), and the scenario
//! configs consumed by the command-line driver (`scenario`).

pub mod channels;
pub mod circuit;
pub mod error;
pub mod fridge;
pub mod rng;
pub mod scenario;
pub mod switch;
pub mod tensor;

pub use channels::{
    apply_channel, effective_beta, thermal_state, thermalizing_channel, DensityMatrix,
    KrausChannel, ThermalSpec,
};
pub use circuit::{
    build_unitary, decompose_cswap, decompose_to_2q, decompose_toffoli, format_outcome_label,
    gate_metrics, mixed_input_run, simulate_density, simulate_shots, switch_circuit_full,
    switch_circuit_simplified, switch_experiment_circuit, Circuit, Gate, GateKind, GateMetrics,
    NoiseSpec, ShotResult,
};
pub use error::{Error, Result};
pub use fridge::{
    conditional_marginals, cycles_to_target, fixed_point_beta, fixed_point_beta_bracketed,
    ico_cooling_step, run_cycle, run_cycle_sequence, summarize_cycles, trajectory_all_plus,
    BranchMarginals, ConditionalMarginals, ControlOutcome, CycleRecord, CycleSummary,
    CyclesToTarget, FixedPoint, FridgeConfig, InitNoiseParams, NoiseModel, QubitMarginal,
    SimpleNoiseParams,
};
pub use scenario::{
    parse_scenario, CycleMcScenario, HistogramScenario, NoiseCompareScenario, NoiseEntry,
    Scenario, ScenarioConfig, SweepScenario, TrajectoryScenario,
};
pub use switch::{
    conditional_thermal_output, control_plus_state, measure_control_in_basis, measure_control_pm,
    switch_compose, switch_compose_n, ConditionalOutcome, ControlBasis, SwitchChannel,
};
pub use tensor::{Complex64, ComplexMatrix};
