//! Refrigeration cycle built on the SWITCH of two thermalizing channels:
//! the conditional cooling step, noise models, heat bookkeeping per cycle,
//! temperature trajectories, fixed points, and cycle-count estimates.
//!
//! All heats are in units of the qubit energy gap, i.e. they are excited
//! population differences; positive `heat_from_cold` means energy left the
//! cold bath.

use crate::channels::{effective_beta, thermal_state, DensityMatrix, ThermalSpec};
use crate::circuit::{simulate_density, switch_experiment_circuit, NoiseSpec};
use crate::error::{Error, Result};
use crate::rng::ChaCha8Rng;
use crate::switch::{
    conditional_thermal_output, measure_control_in_basis, ConditionalOutcome, ControlBasis,
};
use crate::tensor::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Branch mixing of the conditional outputs: each branch state becomes
/// p_suc * state + (1 - p_suc) * rho_fail, where only the excited
/// population of rho_fail is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleNoiseParams {
    pub p_suc: f64,
    pub rho_fail_excited_pop: f64,
}

impl SimpleNoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_suc) {
            return Err(Error::InvalidNoise("p_suc must lie in [0,1]".into()));
        }
        if !(0.0..=1.0).contains(&self.rho_fail_excited_pop) {
            return Err(Error::InvalidNoise(
                "rho_fail_excited_pop must lie in [0,1]".into(),
            ));
        }
        Ok(())
    }
}

/// Faulty initialization: the input is prepared at the intended
/// temperature only with probability p_init_suc, otherwise at beta_fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitNoiseParams {
    pub p_init_suc: f64,
    pub beta_fail: f64,
}

impl InitNoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_init_suc) {
            return Err(Error::InvalidNoise("p_init_suc must lie in [0,1]".into()));
        }
        if !self.beta_fail.is_finite() {
            return Err(Error::InvalidNoise("beta_fail must be finite".into()));
        }
        Ok(())
    }
}

/// How imperfections enter the cooling step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Exact closed-form step.
    #[default]
    None,
    /// Output-mixing model applied identically to both branches.
    Simple {
        #[serde(flatten)]
        params: SimpleNoiseParams,
    },
    /// Faulty input initialization, optionally combined with the output
    /// mixing model.
    WithInit {
        init: InitNoiseParams,
        #[serde(default)]
        simple: Option<SimpleNoiseParams>,
    },
    /// Full gate-level simulation of the simplified SWITCH circuit with
    /// per-gate Pauli errors.
    GateLevel {
        #[serde(flatten)]
        spec: NoiseSpec,
    },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::None => Ok(()),
            NoiseModel::Simple { params } => params.validate(),
            NoiseModel::WithInit { init, simple } => {
                init.validate()?;
                if let Some(s) = simple {
                    s.validate()?;
                }
                Ok(())
            }
            NoiseModel::GateLevel { spec } => spec.validate(),
        }
    }
}

/// One cooling cycle's configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FridgeConfig {
    pub beta_cold: f64,
    pub beta_hot: f64,
    #[serde(default)]
    pub noise: NoiseModel,
    pub seed: u64,
}

impl FridgeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beta_cold.is_nan() || self.beta_hot.is_nan() {
            return Err(Error::InvalidScenario("reservoir temperatures are NaN".into()));
        }
        if self.beta_hot >= self.beta_cold {
            return Err(Error::InvalidScenario(format!(
                "beta_hot ({}) must be below beta_cold ({}); hotter means smaller inverse temperature",
                self.beta_hot, self.beta_cold
            )));
        }
        self.noise.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlOutcome {
    Plus,
    Minus,
}

/// Bookkeeping for one cycle. Heats are signed population differences in
/// units of the gap: positive heat_from_cold drains the cold bath,
/// positive heat_to_hot feeds the hot bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleRecord {
    pub control_outcome: ControlOutcome,
    pub beta_work_after_switch: f64,
    pub heat_from_cold: f64,
    pub heat_to_hot: f64,
    pub beta_work_end: f64,
}

/// One application of the SWITCH of two thermalizing channels to a thermal
/// input at the same temperature, under the chosen noise model.
pub fn ico_cooling_step(beta_in: f64, noise: &NoiseModel) -> Result<ConditionalOutcome> {
    cooling_outcome(beta_in, beta_in, noise)
}

/// General form with separate reservoir and input temperatures; there is
/// no closed form for distinct channel temperatures, so everything routes
/// through the same machinery with t fixed by `t_beta`.
fn cooling_outcome(t_beta: f64, rho_beta: f64, noise: &NoiseModel) -> Result<ConditionalOutcome> {
    noise.validate()?;
    match noise {
        NoiseModel::None => {
            let t = thermal_state(ThermalSpec::new(t_beta)?);
            let rho = thermal_state(ThermalSpec::new(rho_beta)?);
            conditional_thermal_output(&t, &rho)
        }
        NoiseModel::Simple { params } => {
            let base = cooling_outcome(t_beta, rho_beta, &NoiseModel::None)?;
            apply_simple_noise(base, params)
        }
        NoiseModel::WithInit { init, simple } => {
            let t = thermal_state(ThermalSpec::new(t_beta)?);
            let intended = thermal_state(ThermalSpec::new(rho_beta)?);
            let faulty = thermal_state(ThermalSpec::new(init.beta_fail)?);
            let mixed = intended
                .mat()
                .scale_re(init.p_init_suc)
                .add(&faulty.mat().scale_re(1.0 - init.p_init_suc));
            let rho = DensityMatrix::from_matrix(mixed)?;
            let base = conditional_thermal_output(&t, &rho)?;
            match simple {
                Some(params) => apply_simple_noise(base, params),
                None => Ok(base),
            }
        }
        NoiseModel::GateLevel { spec } => gate_level_outcome(t_beta, rho_beta, spec),
    }
}

fn apply_simple_noise(
    base: ConditionalOutcome,
    params: &SimpleNoiseParams,
) -> Result<ConditionalOutcome> {
    let fail = DensityMatrix::qubit_diag(
        1.0 - params.rho_fail_excited_pop,
        params.rho_fail_excited_pop,
    )?;
    let mix = |state: Option<DensityMatrix>| -> Result<Option<DensityMatrix>> {
        state
            .map(|s| {
                let m = s
                    .mat()
                    .scale_re(params.p_suc)
                    .add(&fail.mat().scale_re(1.0 - params.p_suc));
                DensityMatrix::from_matrix(m)
            })
            .transpose()
    };
    Ok(ConditionalOutcome {
        plus_state: mix(base.plus_state)?,
        plus_prob: base.plus_prob,
        minus_state: mix(base.minus_state)?,
        minus_prob: base.minus_prob,
    })
}

/// Gate-level step: control |0>, work and both reservoir qubits thermal,
/// run through the simplified SWITCH experiment circuit (the Hadamards in
/// the circuit handle |+> preparation and the +/- readout), then reduce to
/// the work qubit. Readout flips affect only sampled classical bits, so
/// they do not enter this density-matrix path.
fn gate_level_outcome(t_beta: f64, rho_beta: f64, spec: &NoiseSpec) -> Result<ConditionalOutcome> {
    let circuit = switch_experiment_circuit(true);
    let t = thermal_state(ThermalSpec::new(t_beta)?);
    let work = thermal_state(ThermalSpec::new(rho_beta)?);
    let ground = DensityMatrix::qubit_diag(1.0, 0.0)?;
    let joint = ground.mat().kron(work.mat()).kron(t.mat()).kron(t.mat());
    let evolved = simulate_density(&circuit, &DensityMatrix::from_matrix(joint)?, Some(spec))?;
    // the trailing H already mapped +/- onto the computational basis
    let basis = ControlBasis::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))?;
    let cond = measure_control_in_basis(&evolved, &basis)?;
    let reduce = |state: Option<DensityMatrix>| -> Result<Option<DensityMatrix>> {
        state
            .map(|s| {
                let m = s.mat().partial_trace(&[2, 2, 2], &[0])?;
                DensityMatrix::from_matrix(m)
            })
            .transpose()
    };
    Ok(ConditionalOutcome {
        plus_state: reduce(cond.plus_state)?,
        plus_prob: cond.plus_prob,
        minus_state: reduce(cond.minus_state)?,
        minus_prob: cond.minus_prob,
    })
}

/// Samples one cycle: SWITCH step on the work qubit (reservoir channels at
/// beta_cold), control measurement, then the prescribed rethermalizations.
/// A plus outcome rethermalizes with the cold bath directly; a minus
/// outcome first dumps to the hot bath, then rethermalizes cold. The work
/// qubit always ends the cycle at beta_cold.
pub fn run_cycle(
    beta_work_start: f64,
    cfg: &FridgeConfig,
    rng: &mut ChaCha8Rng,
) -> Result<CycleRecord> {
    cfg.validate()?;
    let outcome = cooling_outcome(cfg.beta_cold, beta_work_start, &cfg.noise)?;
    let u: f64 = rng.gen();
    let branch = if u < outcome.plus_prob && outcome.plus_state.is_some() {
        ControlOutcome::Plus
    } else if outcome.minus_state.is_some() {
        ControlOutcome::Minus
    } else {
        ControlOutcome::Plus
    };
    build_record(branch, &outcome, cfg)
}

fn build_record(
    branch: ControlOutcome,
    outcome: &ConditionalOutcome,
    cfg: &FridgeConfig,
) -> Result<CycleRecord> {
    let q_cold = ThermalSpec::new(cfg.beta_cold)?.excited_population();
    let q_hot = ThermalSpec::new(cfg.beta_hot)?.excited_population();
    let state = match branch {
        ControlOutcome::Plus => &outcome.plus_state,
        ControlOutcome::Minus => &outcome.minus_state,
    };
    let state = state
        .as_ref()
        .ok_or_else(|| Error::InvalidState("sampled branch has no state".into()))?;
    let q_after = state.population(1);
    let beta_after = effective_beta(state);
    let record = match branch {
        ControlOutcome::Plus => CycleRecord {
            control_outcome: branch,
            beta_work_after_switch: beta_after,
            // cold bath refills the work qubit from q_plus back to q_cold
            heat_from_cold: q_cold - q_after,
            heat_to_hot: 0.0,
            beta_work_end: cfg.beta_cold,
        },
        ControlOutcome::Minus => CycleRecord {
            control_outcome: branch,
            beta_work_after_switch: beta_after,
            // hot bath absorbs q_minus - q_hot, cold bath then refills
            heat_from_cold: q_cold - q_hot,
            heat_to_hot: q_after - q_hot,
            beta_work_end: cfg.beta_cold,
        },
    };
    Ok(record)
}

/// Runs `n_cycles` independent cycles, all starting from beta_cold; cycle
/// i draws from RNG substream i of the config seed.
pub fn run_cycle_sequence(cfg: &FridgeConfig, n_cycles: u64) -> Result<Vec<CycleRecord>> {
    cfg.validate()?;
    let mut records = Vec::with_capacity(n_cycles as usize);
    for i in 0..n_cycles {
        let mut rng = crate::rng::substream(cfg.seed, i);
        records.push(run_cycle(cfg.beta_cold, cfg, &mut rng)?);
    }
    Ok(records)
}

/// Aggregates over a cycle log.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CycleSummary {
    pub n_cycles: u64,
    pub n_plus: u64,
    pub n_minus: u64,
    pub mean_heat_from_cold: f64,
    pub mean_heat_to_hot: f64,
    pub stderr_heat_from_cold: f64,
}

pub fn summarize_cycles(records: &[CycleRecord]) -> CycleSummary {
    let n = records.len() as f64;
    let n_plus = records
        .iter()
        .filter(|r| r.control_outcome == ControlOutcome::Plus)
        .count() as u64;
    let mean_hfc = records.iter().map(|r| r.heat_from_cold).sum::<f64>() / n.max(1.0);
    let mean_hth = records.iter().map(|r| r.heat_to_hot).sum::<f64>() / n.max(1.0);
    let var = if records.len() > 1 {
        records
            .iter()
            .map(|r| (r.heat_from_cold - mean_hfc).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    CycleSummary {
        n_cycles: records.len() as u64,
        n_plus,
        n_minus: records.len() as u64 - n_plus,
        mean_heat_from_cold: mean_hfc,
        mean_heat_to_hot: mean_hth,
        stderr_heat_from_cold: (var / n.max(1.0)).sqrt(),
    }
}

/// Iterates the plus-branch map: beta_{k+1} = effective temperature of the
/// plus output at beta_k. Returns n_steps + 1 values including the start.
pub fn trajectory_all_plus(
    beta_start: f64,
    n_steps: usize,
    noise: &NoiseModel,
) -> Result<Vec<f64>> {
    let mut betas = Vec::with_capacity(n_steps + 1);
    let mut beta = beta_start;
    betas.push(beta);
    for _ in 0..n_steps {
        beta = plus_branch_beta(beta, noise)?;
        betas.push(beta);
    }
    Ok(betas)
}

fn plus_branch_beta(beta: f64, noise: &NoiseModel) -> Result<f64> {
    let out = ico_cooling_step(beta, noise)?;
    let state = out
        .plus_state
        .ok_or_else(|| Error::InvalidState("plus branch vanished".into()))?;
    Ok(effective_beta(&state))
}

/// Where the plus-branch map stops cooling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FixedPoint {
    /// beta with beta_out(beta) == beta, to within the bisection tolerance.
    Finite(f64),
    /// No sign change of beta_out(beta) - beta inside the bracket. For the
    /// noiseless map this is the expected answer: cooling is unbounded.
    NotBracketed,
}

pub const FIXED_POINT_BRACKET: (f64, f64) = (1e-6, 20.0);
pub const FIXED_POINT_TOL: f64 = 1e-9;

pub fn fixed_point_beta(noise: &NoiseModel) -> Result<FixedPoint> {
    fixed_point_beta_bracketed(noise, FIXED_POINT_BRACKET)
}

/// Bisection on g(beta) = beta_out(beta) - beta over the given bracket.
pub fn fixed_point_beta_bracketed(
    noise: &NoiseModel,
    bracket: (f64, f64),
) -> Result<FixedPoint> {
    let (mut lo, mut hi) = bracket;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidScenario(format!(
            "fixed-point bracket ({lo}, {hi}) is not an increasing finite pair"
        )));
    }
    let g = |b: f64| -> Result<f64> { Ok(plus_branch_beta(b, noise)? - b) };
    let mut g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo == 0.0 {
        return Ok(FixedPoint::Finite(lo));
    }
    if g_hi == 0.0 {
        return Ok(FixedPoint::Finite(hi));
    }
    if (g_lo > 0.0) == (g_hi > 0.0) {
        return Ok(FixedPoint::NotBracketed);
    }
    while hi - lo > FIXED_POINT_TOL {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid)?;
        if g_mid == 0.0 {
            return Ok(FixedPoint::Finite(mid));
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(FixedPoint::Finite(0.5 * (lo + hi)))
}

/// Cycle counts needed to cool from beta_start to beta_target when every
/// measurement comes out plus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CyclesToTarget {
    Reached {
        /// Steps of the ideal all-plus trajectory.
        n_ideal: u32,
        /// Exact expected number of attempts: product of 1/p_plus along
        /// the trajectory.
        expected_exact: f64,
        /// The coarse half-half estimate 2^n_ideal.
        expected_pow2: f64,
    },
    Unreachable {
        /// Temperature at which the trajectory stopped making progress.
        limiting_beta: f64,
    },
}

const MAX_TRAJECTORY_STEPS: u32 = 10_000;

pub fn cycles_to_target(
    beta_start: f64,
    beta_target: f64,
    noise: &NoiseModel,
) -> Result<CyclesToTarget> {
    if beta_target <= beta_start {
        return Ok(CyclesToTarget::Reached {
            n_ideal: 0,
            expected_exact: 1.0,
            expected_pow2: 1.0,
        });
    }
    let mut beta = beta_start;
    let mut expected_exact = 1.0;
    for n in 0..MAX_TRAJECTORY_STEPS {
        if beta >= beta_target {
            return Ok(CyclesToTarget::Reached {
                n_ideal: n,
                expected_exact,
                expected_pow2: 2.0f64.powi(n as i32),
            });
        }
        let out = ico_cooling_step(beta, noise)?;
        let state = out
            .plus_state
            .ok_or_else(|| Error::InvalidState("plus branch vanished".into()))?;
        let next = effective_beta(&state);
        if next <= beta || next.is_nan() {
            return Ok(CyclesToTarget::Unreachable { limiting_beta: beta });
        }
        expected_exact /= out.plus_prob;
        beta = next;
    }
    Ok(CyclesToTarget::Unreachable { limiting_beta: beta })
}

/// Effective temperatures of each thermal qubit after the gate-level
/// SWITCH experiment, conditioned on the control outcome.
#[derive(Debug, Clone)]
pub struct QubitMarginal {
    pub state: DensityMatrix,
    pub beta: f64,
}

#[derive(Debug, Clone)]
pub struct BranchMarginals {
    pub prob: f64,
    pub work: QubitMarginal,
    pub res_a: QubitMarginal,
    pub res_b: QubitMarginal,
}

#[derive(Debug, Clone)]
pub struct ConditionalMarginals {
    pub plus: Option<BranchMarginals>,
    pub minus: Option<BranchMarginals>,
}

/// Runs the 4-qubit SWITCH experiment circuit on thermal inputs at
/// `beta_in` and reports each qubit's conditional marginal.
pub fn conditional_marginals(
    beta_in: f64,
    noise: Option<&NoiseSpec>,
    use_simplified: bool,
) -> Result<ConditionalMarginals> {
    let circuit = switch_experiment_circuit(use_simplified);
    let t = thermal_state(ThermalSpec::new(beta_in)?);
    let ground = DensityMatrix::qubit_diag(1.0, 0.0)?;
    let joint = ground.mat().kron(t.mat()).kron(t.mat()).kron(t.mat());
    let evolved = simulate_density(&circuit, &DensityMatrix::from_matrix(joint)?, noise)?;
    let basis = ControlBasis::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))?;
    let cond = measure_control_in_basis(&evolved, &basis)?;
    let branch = |state: Option<DensityMatrix>, prob: f64| -> Result<Option<BranchMarginals>> {
        state
            .map(|s| {
                let single = |keep: usize| -> Result<QubitMarginal> {
                    let m = s.mat().partial_trace(&[2, 2, 2], &[keep])?;
                    let state = DensityMatrix::from_matrix(m)?;
                    let beta = effective_beta(&state);
                    Ok(QubitMarginal { state, beta })
                };
                Ok(BranchMarginals {
                    prob,
                    work: single(0)?,
                    res_a: single(1)?,
                    res_b: single(2)?,
                })
            })
            .transpose()
    };
    Ok(ConditionalMarginals {
        plus: branch(cond.plus_state, cond.plus_prob)?,
        minus: branch(cond.minus_state, cond.minus_prob)?,
    })
}
