//! Coherent superposition of channel orderings controlled by a qubit,
//! and the conditional target states after measuring the control.
//!
//! For two channels with Kraus sets {K1_i} and {K2_j}, the composite has
//! one Kraus operator per index pair:
//!
//! ```text
//! W_ij = |0><0|_c (x) K1_i K2_j  +  |1><1|_c (x) K2_j K1_i
//! ```
//!
//! i.e. the |0> control branch applies channel 2 first (rightmost factor
//! acts first). The generalization to N channels attaches one operator
//! product per ordering to each control basis state.

use crate::channels::{DensityMatrix, KrausChannel, STATE_TOL};
use crate::error::{Error, Result};
use crate::tensor::{Complex64, ComplexMatrix};

/// Probabilities below this are treated as an impossible branch; the
/// conditional state is then reported as absent instead of 0/0.
pub const PROB_FLOOR: f64 = 1e-12;

/// Channel orderings in superposition, stored as the flat Kraus channel
/// on control (x) target.
#[derive(Debug, Clone)]
pub struct SwitchChannel {
    control_dim: usize,
    composite: KrausChannel,
}

impl SwitchChannel {
    pub fn control_dim(&self) -> usize {
        self.control_dim
    }

    pub fn composite(&self) -> &KrausChannel {
        &self.composite
    }
}

/// Conditional target states and outcome probabilities after a two-outcome
/// control measurement. A branch whose probability is below `PROB_FLOOR`
/// carries no state.
#[derive(Debug, Clone)]
pub struct ConditionalOutcome {
    pub plus_state: Option<DensityMatrix>,
    pub plus_prob: f64,
    pub minus_state: Option<DensityMatrix>,
    pub minus_prob: f64,
}

/// Orthonormal measurement basis for the control qubit: the "plus" ket is
/// a|0> + b|1>, the "minus" ket its orthogonal complement.
#[derive(Debug, Clone, Copy)]
pub struct ControlBasis {
    a: Complex64,
    b: Complex64,
}

impl ControlBasis {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::InvalidState("control basis ket is null".into()));
        }
        Ok(Self {
            a: a / norm,
            b: b / norm,
        })
    }

    /// The {|+>, |->} basis.
    pub fn pm() -> Self {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { a: r, b: r }
    }

    pub fn plus_ket(&self) -> ComplexMatrix {
        ComplexMatrix::new(2, 1, vec![self.a, self.b]).expect("finite basis ket")
    }

    pub fn minus_ket(&self) -> ComplexMatrix {
        ComplexMatrix::new(2, 1, vec![-self.b.conj(), self.a.conj()]).expect("finite basis ket")
    }
}

/// |+><+| for the control register.
pub fn control_plus_state() -> DensityMatrix {
    DensityMatrix::pure(&ControlBasis::pm().plus_ket()).expect("|+> is a valid state")
}

/// Two-channel SWITCH. Both channels must act on the same target
/// dimension (square, input dim == output dim).
pub fn switch_compose(ch1: &KrausChannel, ch2: &KrausChannel) -> Result<SwitchChannel> {
    switch_compose_n(
        &[ch1.clone(), ch2.clone()],
        &[vec![0, 1], vec![1, 0]],
    )
}

/// N-channel SWITCH over an explicit set of orderings.
///
/// `orders[k]` lists 0-based channel indices as an operator product read
/// left to right, so the LAST listed channel acts on the state first;
/// control basis state |k> selects that product. Each order must use
/// every channel exactly once. The control dimension equals the number
/// of orders, which may be any nonempty subset of the N! permutations.
pub fn switch_compose_n(channels: &[KrausChannel], orders: &[Vec<usize>]) -> Result<SwitchChannel> {
    if channels.is_empty() {
        return Err(Error::InvalidChannel("no channels to compose".into()));
    }
    if orders.is_empty() {
        return Err(Error::InvalidChannel("no orders given".into()));
    }
    let n = channels.len();
    let d = channels[0].in_dim();
    for (i, ch) in channels.iter().enumerate() {
        if ch.in_dim() != d || ch.out_dim() != d {
            return Err(Error::DimMismatch(format!(
                "channel {i} is {}x{}, all must be {d}x{d} on the shared target",
                ch.out_dim(),
                ch.in_dim()
            )));
        }
    }
    for order in orders {
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::InvalidChannel(format!(
                "order {order:?} does not use all {n} channels"
            )));
        }
        for &c in order {
            if c >= n || seen[c] {
                return Err(Error::InvalidChannel(format!(
                    "order {order:?} is not a permutation of 0..{n}"
                )));
            }
            seen[c] = true;
        }
    }

    let control_dim = orders.len();
    let comp_dim = control_dim * d;
    // one composite operator per choice of a Kraus index for every channel
    let counts: Vec<usize> = channels.iter().map(|ch| ch.kraus_ops().len()).collect();
    let total: usize = counts.iter().product();
    let mut ops = Vec::with_capacity(total);
    let mut multi = vec![0usize; n];
    for _ in 0..total {
        let mut w = ComplexMatrix::zeros(comp_dim, comp_dim);
        for (k, order) in orders.iter().enumerate() {
            let mut prod = ComplexMatrix::identity(d);
            for &c in order {
                prod = prod.matmul(&channels[c].kraus_ops()[multi[c]])?;
            }
            w = w.add(&ComplexMatrix::unit(control_dim, k, k).kron(&prod));
        }
        ops.push(w);
        // odometer over the per-channel Kraus indices
        for c in (0..n).rev() {
            multi[c] += 1;
            if multi[c] < counts[c] {
                break;
            }
            multi[c] = 0;
        }
    }
    let composite = KrausChannel::new(comp_dim, comp_dim, ops)?;
    Ok(SwitchChannel {
        control_dim,
        composite,
    })
}

/// Closed-form conditional output of the SWITCH of two identical
/// thermalizing channels with target `t`, control prepared along |+>:
/// the unnormalized branches are t/2 +/- (t rho t)/2, and their traces
/// are the outcome probabilities.
pub fn conditional_thermal_output(
    t: &DensityMatrix,
    rho_in: &DensityMatrix,
) -> Result<ConditionalOutcome> {
    if t.n_qubits() != 1 || rho_in.n_qubits() != 1 {
        return Err(Error::InvalidState(
            "conditional output is defined for single-qubit target and input".into(),
        ));
    }
    let off = t.mat().get(0, 1).norm().max(t.mat().get(1, 0).norm());
    if off > STATE_TOL {
        return Err(Error::InvalidState(
            "thermal target must be diagonal in the energy basis".into(),
        ));
    }
    let trt = t.mat().matmul(rho_in.mat())?.matmul(t.mat())?;
    let sigma_plus = t.mat().add(&trt).scale_re(0.5);
    let sigma_minus = t.mat().sub(&trt).scale_re(0.5);
    branch_pair(sigma_plus, sigma_minus)
}

/// Projects the first qubit of `joint` onto the {|+>, |->} basis and
/// returns the conditional states of the remaining qubits.
pub fn measure_control_pm(joint: &DensityMatrix) -> Result<ConditionalOutcome> {
    measure_control_in_basis(joint, &ControlBasis::pm())
}

/// Same as `measure_control_pm` with an arbitrary orthonormal control
/// basis.
pub fn measure_control_in_basis(
    joint: &DensityMatrix,
    basis: &ControlBasis,
) -> Result<ConditionalOutcome> {
    if joint.n_qubits() < 2 {
        return Err(Error::InvalidState(
            "control measurement needs a control qubit plus a target".into(),
        ));
    }
    let d_target = joint.dim() / 2;
    let collapse = |ket: &ComplexMatrix| -> Result<ComplexMatrix> {
        let proj = ket.matmul(&ket.dagger())?.kron(&ComplexMatrix::identity(d_target));
        let sandwiched = proj.matmul(joint.mat())?.matmul(&proj)?;
        sandwiched.partial_trace(&[2, d_target], &[1])
    };
    let sigma_plus = collapse(&basis.plus_ket())?;
    let sigma_minus = collapse(&basis.minus_ket())?;
    branch_pair(sigma_plus, sigma_minus)
}

fn branch_pair(
    sigma_plus: ComplexMatrix,
    sigma_minus: ComplexMatrix,
) -> Result<ConditionalOutcome> {
    let finish = |sigma: ComplexMatrix| -> Result<(Option<DensityMatrix>, f64)> {
        let p = sigma.trace().re;
        if p < PROB_FLOOR {
            return Ok((None, p.max(0.0)));
        }
        let state = DensityMatrix::from_matrix(sigma.scale_re(1.0 / p))?;
        Ok((Some(state), p))
    };
    let (plus_state, plus_prob) = finish(sigma_plus)?;
    let (minus_state, minus_prob) = finish(sigma_minus)?;
    Ok(ConditionalOutcome {
        plus_state,
        plus_prob,
        minus_state,
        minus_prob,
    })
}
