//! Scenario execution: turns a validated config into a [`Table`].

use std::collections::BTreeMap;

use icofridge::circuit::format_outcome_label;
use icofridge::scenario::{
    CycleMcScenario, HistogramScenario, NoiseCompareScenario, Scenario, ScenarioConfig,
    SweepScenario, TrajectoryScenario,
};
use icofridge::tensor::{Complex64, ComplexMatrix};
use icofridge::{
    build_unitary, conditional_thermal_output, control_plus_state, decompose_cswap,
    decompose_to_2q, effective_beta, fixed_point_beta, gate_metrics, ico_cooling_step,
    measure_control_pm, run_cycle_sequence, simulate_density, simulate_shots, summarize_cycles,
    switch_circuit_full, switch_circuit_simplified, switch_compose, switch_compose_n,
    switch_experiment_circuit, thermal_state, trajectory_all_plus, Circuit, ControlOutcome,
    DensityMatrix, FixedPoint, Gate, GateMetrics, KrausChannel, NoiseModel, Result, ThermalSpec,
};

use crate::table::{Cell, Table};

/// Runs one scenario. The boolean is false only when a verify check
/// failed; the table is still produced so the report can be inspected.
pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<(Table, bool)> {
    let echo = ScenarioConfig {
        scenario: cfg.scenario.clone(),
        seed: Some(seed),
        out: None,
    }
    .to_toml()?;
    let table = match &cfg.scenario {
        Scenario::Sweep(s) => run_sweep(s, echo)?,
        Scenario::Trajectory(s) => run_trajectory(s, echo)?,
        Scenario::Histogram(s) => run_histogram(s, seed, echo)?,
        Scenario::NoiseCompare(s) => run_noise_compare(s, echo)?,
        Scenario::Verify => {
            let (table, all_ok) = run_verify(echo);
            return Ok((table, all_ok));
        }
        Scenario::CycleMc(s) => run_cycle_mc(s, seed, echo)?,
    };
    Ok((table, true))
}

fn branch_beta(state: &Option<DensityMatrix>) -> f64 {
    state.as_ref().map(effective_beta).unwrap_or(f64::NAN)
}

fn run_sweep(s: &SweepScenario, echo: String) -> Result<Table> {
    let mut columns = vec![
        "beta_in".to_string(),
        "beta_out_plus".to_string(),
        "beta_out_minus".to_string(),
        "beta_out_classical".to_string(),
        "p_plus".to_string(),
    ];
    for entry in &s.noise {
        columns.push(format!("beta_plus_{}", entry.label));
        columns.push(format!("beta_minus_{}", entry.label));
        columns.push(format!("p_plus_{}", entry.label));
    }
    let mut rows = Vec::with_capacity(s.beta_grid.len());
    for &beta in &s.beta_grid {
        let ideal = ico_cooling_step(beta, &NoiseModel::None)?;
        let mut row = vec![
            Cell::Float(beta),
            Cell::Float(branch_beta(&ideal.plus_state)),
            Cell::Float(branch_beta(&ideal.minus_state)),
            // channels applied in a definite order leave a thermal input
            // at its own temperature
            Cell::Float(beta),
            Cell::Float(ideal.plus_prob),
        ];
        for entry in &s.noise {
            let noisy = ico_cooling_step(beta, &entry.model)?;
            row.push(Cell::Float(branch_beta(&noisy.plus_state)));
            row.push(Cell::Float(branch_beta(&noisy.minus_state)));
            row.push(Cell::Float(noisy.plus_prob));
        }
        rows.push(row);
    }
    Ok(Table {
        command: "sweep".into(),
        config_echo: echo,
        meta: vec![("points".into(), Cell::Int(s.beta_grid.len() as u64))],
        columns,
        rows,
    })
}

fn run_trajectory(s: &TrajectoryScenario, echo: String) -> Result<Table> {
    let betas = trajectory_all_plus(s.beta_start, s.n_steps, &s.noise)?;
    let fixed = match fixed_point_beta(&s.noise)? {
        FixedPoint::Finite(b) => Cell::Float(b),
        FixedPoint::NotBracketed => Cell::Text("none".into()),
    };
    let rows = betas
        .iter()
        .enumerate()
        .map(|(k, &b)| vec![Cell::Int(k as u64), Cell::Float(b)])
        .collect();
    Ok(Table {
        command: "trajectory".into(),
        config_echo: echo,
        meta: vec![("fixed_point".into(), fixed)],
        columns: vec!["step".into(), "beta".into()],
        rows,
    })
}

fn run_histogram(s: &HistogramScenario, seed: u64, echo: String) -> Result<Table> {
    let circuit = if s.identity_circuit {
        Circuit::new(4)?
    } else {
        switch_experiment_circuit(s.simplified)
    };
    let input_internal = format!("0{}{}{}", s.work, s.res_a, s.res_b);

    // dense probabilities of the noiseless run, as the reference column
    let dim = circuit.dim();
    let input_index = usize::from_str_radix(&input_internal, 2).expect("binary label");
    let mut rho = ComplexMatrix::zeros(dim, dim);
    rho.set(input_index, input_index, Complex64::new(1.0, 0.0));
    let dense = simulate_density(&circuit, &DensityMatrix::from_matrix(rho)?, None)?;

    let noiseless = simulate_shots(&circuit, &input_internal, None, s.shots, seed)?;
    let noisy = match &s.noise {
        Some(spec) => Some(simulate_shots(&circuit, &input_internal, Some(spec), s.shots, seed)?),
        None => None,
    };

    let mut columns = vec![
        "outcome".to_string(),
        "prob_noiseless".to_string(),
        "count_noiseless".to_string(),
    ];
    if noisy.is_some() {
        columns.push("count_noisy".to_string());
    }

    // outcomes in display-label order; the display convention reverses
    // the measured bit string
    let mut labelled: Vec<(String, usize)> = (0..16)
        .map(|idx| {
            let bits = [
                ((idx >> 3) & 1) as u8,
                ((idx >> 2) & 1) as u8,
                ((idx >> 1) & 1) as u8,
                (idx & 1) as u8,
            ];
            (format_outcome_label(bits), idx)
        })
        .collect();
    labelled.sort();

    let mut rows = Vec::with_capacity(16);
    for (label, idx) in labelled {
        let internal = format!("{idx:04b}");
        let mut row = vec![
            Cell::Text(label),
            Cell::Float(dense.mat().get(idx, idx).re),
            Cell::Int(*noiseless.counts.get(&internal).unwrap_or(&0)),
        ];
        if let Some(noisy) = &noisy {
            row.push(Cell::Int(*noisy.counts.get(&internal).unwrap_or(&0)));
        }
        rows.push(row);
    }
    Ok(Table {
        command: "histogram".into(),
        config_echo: echo,
        meta: vec![
            ("shots".into(), Cell::Int(s.shots)),
            ("input".into(), Cell::Text(input_internal)),
            (
                "bit_order".into(),
                Cell::Text("res_b work res_a control (most to least significant)".into()),
            ),
        ],
        columns,
        rows,
    })
}

fn run_noise_compare(s: &NoiseCompareScenario, echo: String) -> Result<Table> {
    let simple = NoiseModel::Simple { params: s.simple };
    let with_init = NoiseModel::WithInit {
        init: s.init,
        simple: None,
    };
    let mut rows = Vec::new();
    for (name, model) in [("simple", simple), ("with_init", with_init)] {
        let out = ico_cooling_step(0.0, &model)?;
        let beta_plus = branch_beta(&out.plus_state);
        let beta_minus = branch_beta(&out.minus_state);
        rows.push(vec![
            Cell::Text(name.into()),
            Cell::Float(beta_plus),
            Cell::Float(beta_minus),
            Cell::Float((beta_plus - beta_minus).abs()),
        ]);
    }
    Ok(Table {
        command: "noise_compare".into(),
        config_echo: echo,
        meta: vec![("beta_in".into(), Cell::Float(0.0))],
        columns: vec![
            "model".into(),
            "beta_plus".into(),
            "beta_minus".into(),
            "splitting".into(),
        ],
        rows,
    })
}

fn run_cycle_mc(s: &CycleMcScenario, seed: u64, echo: String) -> Result<Table> {
    let cfg = s.fridge_config(seed);
    let records = run_cycle_sequence(&cfg, s.n_cycles)?;
    let summary = summarize_cycles(&records);
    let rows = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let outcome = match r.control_outcome {
                ControlOutcome::Plus => "plus",
                ControlOutcome::Minus => "minus",
            };
            vec![
                Cell::Int(i as u64),
                Cell::Text(outcome.into()),
                Cell::Float(r.beta_work_after_switch),
                Cell::Float(r.heat_from_cold),
                Cell::Float(r.heat_to_hot),
                Cell::Float(r.beta_work_end),
            ]
        })
        .collect();
    Ok(Table {
        command: "cycle_mc".into(),
        config_echo: echo,
        meta: vec![
            ("n_plus".into(), Cell::Int(summary.n_plus)),
            ("n_minus".into(), Cell::Int(summary.n_minus)),
            (
                "mean_heat_from_cold".into(),
                Cell::Float(summary.mean_heat_from_cold),
            ),
            (
                "mean_heat_to_hot".into(),
                Cell::Float(summary.mean_heat_to_hot),
            ),
            (
                "stderr_heat_from_cold".into(),
                Cell::Float(summary.stderr_heat_from_cold),
            ),
        ],
        columns: vec![
            "cycle".into(),
            "outcome".into(),
            "beta_work_after_switch".into(),
            "heat_from_cold".into(),
            "heat_to_hot".into(),
            "beta_work_end".into(),
        ],
        rows,
    })
}

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn check(name: &'static str, ok: bool, detail: String) -> Check {
    Check { name, ok, detail }
}

/// The embedded consistency suite: fast oracle checks that a build must
/// pass before its output is worth looking at.
fn run_verify(echo: String) -> (Table, bool) {
    let checks = vec![
        verify_circuit_identity(),
        verify_branch_formula(),
        verify_reference_points(),
        verify_completeness(),
        verify_decompositions(),
        verify_gate_budget(),
        verify_sampling_determinism(),
    ];
    let all_ok = checks.iter().all(|c| c.ok);
    let rows = checks
        .into_iter()
        .map(|c| {
            vec![
                Cell::Text(c.name.into()),
                Cell::Text(if c.ok { "pass" } else { "fail" }.into()),
                Cell::Text(c.detail),
            ]
        })
        .collect();
    let table = Table {
        command: "verify".into(),
        config_echo: echo,
        meta: vec![(
            "status".into(),
            Cell::Text(if all_ok { "pass" } else { "fail" }.into()),
        )],
        columns: vec!["check".into(), "status".into(), "detail".into()],
        rows,
    };
    (table, all_ok)
}

fn verify_circuit_identity() -> Check {
    let diff = build_unitary(&switch_circuit_full())
        .max_abs_diff(&build_unitary(&switch_circuit_simplified()));
    check(
        "circuit_identity",
        diff <= 1e-12,
        format!("full vs simplified unitary differs by {diff:.2e}"),
    )
}

fn verify_branch_formula() -> Check {
    let circuit = switch_circuit_full();
    let mut worst: f64 = 0.0;
    for beta in [0.0, 2.0f64.ln(), 1.3, -0.7] {
        let t = thermal_state(ThermalSpec::new(beta).expect("finite beta"));
        let joint = control_plus_state()
            .mat()
            .kron(t.mat())
            .kron(t.mat())
            .kron(t.mat());
        let evolved = match DensityMatrix::from_matrix(joint)
            .and_then(|rho| simulate_density(&circuit, &rho, None))
            .and_then(|out| measure_control_pm(&out))
        {
            Ok(v) => v,
            Err(e) => return check("branch_formula", false, format!("simulation failed: {e}")),
        };
        let formula = match conditional_thermal_output(&t, &t) {
            Ok(v) => v,
            Err(e) => return check("branch_formula", false, format!("formula failed: {e}")),
        };
        worst = worst.max((evolved.plus_prob - formula.plus_prob).abs());
        if let (Some(a), Some(b)) = (&evolved.plus_state, &formula.plus_state) {
            let work = a
                .mat()
                .partial_trace(&[2, 2, 2], &[0])
                .expect("4-qubit state reduces");
            worst = worst.max(work.max_abs_diff(b.mat()));
        }
    }
    check(
        "branch_formula",
        worst <= 1e-10,
        format!("circuit vs conditional formula differs by {worst:.2e}"),
    )
}

fn verify_reference_points() -> Check {
    let at_zero = match ico_cooling_step(0.0, &NoiseModel::None) {
        Ok(v) => v,
        Err(e) => return check("reference_points", false, format!("{e}")),
    };
    let zero_ok = branch_beta(&at_zero.plus_state).abs() <= 1e-9
        && branch_beta(&at_zero.minus_state).abs() <= 1e-9;
    let worked = match ico_cooling_step(2.0f64.ln(), &NoiseModel::None) {
        Ok(v) => v,
        Err(e) => return check("reference_points", false, format!("{e}")),
    };
    let p_err = (worked.plus_prob - 2.0 / 3.0).abs();
    let pop_err = worked
        .plus_state
        .as_ref()
        .map(|s| (s.population(1) - 5.0 / 18.0).abs())
        .unwrap_or(f64::INFINITY);
    check(
        "reference_points",
        zero_ok && p_err <= 1e-12 && pop_err <= 1e-12,
        format!("flat point holds: {zero_ok}; worked-point errors {p_err:.1e} and {pop_err:.1e}"),
    )
}

fn amplitude_damping(gamma: f64) -> KrausChannel {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let k0 = ComplexMatrix::new(2, 2, vec![one, z, z, Complex64::new((1.0 - gamma).sqrt(), 0.0)])
        .expect("static");
    let k1 = ComplexMatrix::new(2, 2, vec![z, Complex64::new(gamma.sqrt(), 0.0), z, z])
        .expect("static");
    KrausChannel::new(2, 2, vec![k0, k1]).expect("damping channel is complete")
}

fn phase_damping(lambda: f64) -> KrausChannel {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let k0 = ComplexMatrix::new(2, 2, vec![one, z, z, Complex64::new((1.0 - lambda).sqrt(), 0.0)])
        .expect("static");
    let k1 = ComplexMatrix::new(2, 2, vec![z, z, z, Complex64::new(lambda.sqrt(), 0.0)])
        .expect("static");
    KrausChannel::new(2, 2, vec![k0, k1]).expect("dephasing channel is complete")
}

fn completeness_defect(ch: &KrausChannel) -> f64 {
    let dim = ch.in_dim();
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for k in ch.kraus_ops() {
        sum = sum.add(&k.dagger().matmul(k).expect("square ops"));
    }
    sum.max_abs_diff(&ComplexMatrix::identity(dim))
}

fn verify_completeness() -> Check {
    let t = thermal_state(ThermalSpec::new(0.8).expect("finite"));
    let therm = match icofridge::thermalizing_channel(&t) {
        Ok(c) => c,
        Err(e) => return check("switch_completeness", false, format!("{e}")),
    };
    let amp = amplitude_damping(0.3);
    let deph = phase_damping(0.2);
    let mut worst: f64 = 0.0;
    match switch_compose(&therm, &amp) {
        Ok(sw) => worst = worst.max(completeness_defect(sw.composite())),
        Err(e) => return check("switch_completeness", false, format!("{e}")),
    }
    let orders: Vec<Vec<usize>> = vec![
        vec![0, 1, 2],
        vec![0, 2, 1],
        vec![1, 0, 2],
        vec![1, 2, 0],
        vec![2, 0, 1],
        vec![2, 1, 0],
    ];
    match switch_compose_n(&[therm, amp, deph], &orders) {
        Ok(sw) => worst = worst.max(completeness_defect(sw.composite())),
        Err(e) => return check("switch_completeness", false, format!("{e}")),
    }
    check(
        "switch_completeness",
        worst <= 1e-9,
        format!("worst Kraus completeness defect {worst:.2e}"),
    )
}

fn verify_decompositions() -> Check {
    let mut worst: f64 = 0.0;
    for gate in [
        Gate::cswap(0, 1, 2).expect("distinct"),
        Gate::anti_cswap(0, 1, 2).expect("distinct"),
    ] {
        let direct = Circuit::with_gates(3, vec![gate.clone()]).expect("fits");
        let coarse = match decompose_cswap(&gate).and_then(|gs| Circuit::with_gates(3, gs)) {
            Ok(c) => c,
            Err(e) => return check("swap_decomposition", false, format!("{e}")),
        };
        let fine = match decompose_to_2q(&direct) {
            Ok(c) => c,
            Err(e) => return check("swap_decomposition", false, format!("{e}")),
        };
        let u = build_unitary(&direct);
        worst = worst.max(u.max_abs_diff(&build_unitary(&coarse)));
        worst = worst.max(u.max_abs_diff(&build_unitary(&fine)));
    }
    check(
        "swap_decomposition",
        worst <= 1e-12,
        format!("controlled-swap rewrites differ by {worst:.2e}"),
    )
}

fn verify_gate_budget() -> Check {
    let rewritten = match decompose_to_2q(&switch_circuit_simplified()) {
        Ok(c) => c,
        Err(e) => return check("gate_budget", false, format!("{e}")),
    };
    let metrics = gate_metrics(&rewritten);
    let expected = GateMetrics {
        depth: 27,
        total_gates: 37,
        two_qubit_gates: 17,
    };
    check(
        "gate_budget",
        metrics == expected,
        format!(
            "decomposed simplified SWITCH: depth {} gates {} two-qubit {}",
            metrics.depth, metrics.total_gates, metrics.two_qubit_gates
        ),
    )
}

fn verify_sampling_determinism() -> Check {
    let circuit = switch_experiment_circuit(true);
    let run = |seed: u64| -> Result<BTreeMap<String, u64>> {
        Ok(simulate_shots(&circuit, "0100", None, 2000, seed)?.counts)
    };
    match (run(5), run(5), run(6)) {
        (Ok(a), Ok(b), Ok(c)) => check(
            "sampling_determinism",
            a == b && a != c,
            format!(
                "same seed identical: {}; different seed differs: {}",
                a == b,
                a != c
            ),
        ),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
            check("sampling_determinism", false, format!("{e}"))
        }
    }
}
