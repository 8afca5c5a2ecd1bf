//! Quantum states, Kraus channels, thermal qubits, and effective
//! inverse temperature.
//!
//! Temperatures appear only through the dimensionless product beta * Delta
//! (inverse temperature times energy gap); no absolute energy scale exists
//! anywhere in the crate. |0> is the ground state.

use crate::error::{Error, Result};
use crate::tensor::{Complex64, ComplexMatrix};
use serde::{Deserialize, Serialize};

/// Validation tolerance for state and channel invariants.
pub const STATE_TOL: f64 = 1e-9;

/// Populations below this are treated as zero when forming population
/// ratios, so that log-ratios saturate at +/- infinity instead of blowing
/// up on denormals.
pub const POPULATION_FLOOR: f64 = 1e-12;

/// Normalized n-qubit state. Construction enforces hermiticity, unit
/// trace, and positivity, all within `STATE_TOL`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(n_qubits: usize, mat: ComplexMatrix) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidState("zero qubits".into()));
        }
        let dim = 1usize
            .checked_shl(n_qubits as u32)
            .ok_or_else(|| Error::InvalidState("qubit count overflows dimension".into()))?;
        if mat.rows() != dim || mat.cols() != dim {
            return Err(Error::InvalidState(format!(
                "{} qubits need a {dim}x{dim} matrix, got {}x{}",
                n_qubits,
                mat.rows(),
                mat.cols()
            )));
        }
        if !mat.is_hermitian(STATE_TOL) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = mat.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {} is not 1", tr.re)));
        }
        if !mat.is_psd(STATE_TOL) {
            return Err(Error::InvalidState("negative eigenvalue".into()));
        }
        Ok(Self { n_qubits, mat })
    }

    /// Infers the qubit count from the matrix dimension.
    pub fn from_matrix(mat: ComplexMatrix) -> Result<Self> {
        let dim = mat.rows();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidState(format!("dimension {dim} is not 2^n")));
        }
        Self::new(dim.trailing_zeros() as usize, mat)
    }

    /// Pure state |psi><psi| from an unnormalized column vector.
    pub fn pure(ket: &ComplexMatrix) -> Result<Self> {
        if ket.cols() != 1 {
            return Err(Error::InvalidState("pure state needs a column vector".into()));
        }
        let norm_sq: f64 = (0..ket.rows()).map(|i| ket.get(i, 0).norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let proj = ket.matmul(&ket.dagger())?.scale_re(1.0 / norm_sq);
        Self::from_matrix(proj)
    }

    /// Single-qubit diagonal state diag(p0, p1).
    pub fn qubit_diag(p0: f64, p1: f64) -> Result<Self> {
        Self::new(1, ComplexMatrix::diag_re(&[p0, p1]))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Diagonal population (real part) of basis state `i`.
    pub fn population(&self, i: usize) -> f64 {
        self.mat.get(i, i).re
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n_qubits == other.n_qubits && self.mat.approx_eq(&other.mat, tol)
    }
}

/// CPTP map given by Kraus operators; construction checks the
/// completeness relation sum K^dag K = I within `STATE_TOL`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus_ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(in_dim: usize, out_dim: usize, kraus_ops: Vec<ComplexMatrix>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidChannel("zero dimension".into()));
        }
        if kraus_ops.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        for (k, op) in kraus_ops.iter().enumerate() {
            if op.rows() != out_dim || op.cols() != in_dim {
                return Err(Error::InvalidChannel(format!(
                    "operator {k} is {}x{}, expected {out_dim}x{in_dim}",
                    op.rows(),
                    op.cols()
                )));
            }
        }
        let mut sum = ComplexMatrix::zeros(in_dim, in_dim);
        for op in &kraus_ops {
            sum = sum.add(&op.dagger().matmul(op)?);
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(in_dim));
        if dev > STATE_TOL {
            return Err(Error::InvalidChannel(format!(
                "completeness violated by {dev:.3e}"
            )));
        }
        Ok(Self {
            in_dim,
            out_dim,
            kraus_ops,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            in_dim: dim,
            out_dim: dim,
            kraus_ops: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }
}

/// Thermal qubit parameterized by the dimensionless product beta * Delta.
/// +inf means the ground state, 0 the maximally mixed state, negative
/// values a population inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalSpec {
    pub beta_delta: f64,
}

impl ThermalSpec {
    pub fn new(beta_delta: f64) -> Result<Self> {
        if beta_delta.is_nan() {
            return Err(Error::InvalidState("beta_delta is NaN".into()));
        }
        Ok(Self { beta_delta })
    }

    /// Excited-state population q = 1 / (1 + e^{beta_delta}).
    /// IEEE arithmetic gives the right limits at +/- infinity.
    pub fn excited_population(&self) -> f64 {
        1.0 / (1.0 + self.beta_delta.exp())
    }
}

/// Gibbs state diag(1-q, q) of a single qubit.
pub fn thermal_state(spec: ThermalSpec) -> DensityMatrix {
    let q = spec.excited_population();
    DensityMatrix::qubit_diag(1.0 - q, q).expect("thermal populations are a distribution")
}

/// Constant channel sending every input to the energy-diagonal state `t`,
/// realized by the four rank-one operators sqrt(t_ii) |i><j|.
pub fn thermalizing_channel(t: &DensityMatrix) -> Result<KrausChannel> {
    if t.n_qubits() != 1 {
        return Err(Error::InvalidChannel("thermalizing channel wants a single qubit".into()));
    }
    let off = t.mat().get(0, 1).norm().max(t.mat().get(1, 0).norm());
    if off > STATE_TOL {
        return Err(Error::InvalidChannel(
            "target state has energy-basis coherences; thermal states are diagonal".into(),
        ));
    }
    let mut ops = Vec::with_capacity(4);
    for i in 0..2 {
        // populations can round to tiny negatives; clamp before sqrt
        let w = t.population(i).max(0.0).sqrt();
        for j in 0..2 {
            ops.push(ComplexMatrix::unit(2, i, j).scale_re(w));
        }
    }
    KrausChannel::new(2, 2, ops)
}

/// Applies the channel at the matrix level without density-matrix
/// validation. Used internally where intermediate objects are
/// deliberately unnormalized.
pub fn apply_channel_matrix(ch: &KrausChannel, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.rows() != ch.in_dim() || m.cols() != ch.in_dim() {
        return Err(Error::DimMismatch(format!(
            "channel input dim {} vs matrix {}x{}",
            ch.in_dim(),
            m.rows(),
            m.cols()
        )));
    }
    let mut out = ComplexMatrix::zeros(ch.out_dim(), ch.out_dim());
    for k in ch.kraus_ops() {
        out = out.add(&k.matmul(m)?.matmul(&k.dagger())?);
    }
    Ok(out)
}

/// sum_k K rho K^dag, validated as a state on output.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = apply_channel_matrix(ch, rho.mat())?;
    DensityMatrix::from_matrix(out)
}

/// Dimensionless inverse temperature ln(p0/p1) of a single-qubit state,
/// read off the diagonal populations only (coherences carry no
/// temperature information here). Saturates to +/- infinity when a
/// population falls below `POPULATION_FLOOR`.
pub fn effective_beta(rho: &DensityMatrix) -> f64 {
    assert_eq!(rho.n_qubits(), 1, "effective temperature of a single qubit only");
    let p0 = rho.population(0);
    let p1 = rho.population(1);
    if p1 < POPULATION_FLOOR {
        f64::INFINITY
    } else if p0 < POPULATION_FLOOR {
        f64::NEG_INFINITY
    } else {
        (p0 / p1).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus_state() -> DensityMatrix {
        DensityMatrix::from_matrix(ComplexMatrix::from_fn(2, 2, |_, _| c(0.5, 0.0))).unwrap()
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::qubit_diag(0.5, 0.5).is_ok());
        // wrong trace
        assert!(DensityMatrix::qubit_diag(0.6, 0.6).is_err());
        // negative eigenvalue
        assert!(DensityMatrix::qubit_diag(1.5, -0.5).is_err());
        // non-Hermitian
        let m = ComplexMatrix::new(2, 2, vec![c(0.5, 0.0), c(0.3, 0.0), c(0.0, 0.0), c(0.5, 0.0)])
            .unwrap();
        assert!(DensityMatrix::from_matrix(m).is_err());
        // dimension not a power of two
        assert!(DensityMatrix::from_matrix(ComplexMatrix::identity(3).scale_re(1.0 / 3.0)).is_err());
    }

    #[test]
    fn pure_state_normalizes() {
        let ket = ComplexMatrix::new(2, 1, vec![c(3.0, 0.0), c(4.0, 0.0)]).unwrap();
        let rho = DensityMatrix::pure(&ket).unwrap();
        assert!((rho.population(0) - 0.36).abs() < 1e-15);
        assert!((rho.population(1) - 0.64).abs() < 1e-15);
    }

    #[test]
    fn thermal_state_limits_and_gibbs_point() {
        let hot = thermal_state(ThermalSpec::new(0.0).unwrap());
        assert!(hot.mat().approx_eq(&ComplexMatrix::diag_re(&[0.5, 0.5]), 0.0));

        let ground = thermal_state(ThermalSpec::new(f64::INFINITY).unwrap());
        assert!(ground.mat().approx_eq(&ComplexMatrix::diag_re(&[1.0, 0.0]), 0.0));

        let inverted = thermal_state(ThermalSpec::new(f64::NEG_INFINITY).unwrap());
        assert!(inverted.mat().approx_eq(&ComplexMatrix::diag_re(&[0.0, 1.0]), 0.0));

        // beta*Delta = ln 2 gives populations (2/3, 1/3)
        let t = thermal_state(ThermalSpec::new(2.0f64.ln()).unwrap());
        assert!((t.population(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.population(1) - 1.0 / 3.0).abs() < 1e-15);

        assert!(ThermalSpec::new(f64::NAN).is_err());
    }

    #[test]
    fn thermalizing_channel_is_constant() {
        let t = thermal_state(ThermalSpec::new(2.0f64.ln()).unwrap());
        let ch = thermalizing_channel(&t).unwrap();
        assert_eq!(ch.kraus_ops().len(), 4);

        let out_plus = apply_channel(&ch, &plus_state()).unwrap();
        assert!(out_plus.approx_eq(&t, 1e-15));
        let out_excited = apply_channel(&ch, &DensityMatrix::qubit_diag(0.0, 1.0).unwrap()).unwrap();
        assert!(out_excited.approx_eq(&t, 1e-15));
    }

    #[test]
    fn thermalizing_channel_reset_case() {
        let ground = DensityMatrix::qubit_diag(1.0, 0.0).unwrap();
        let ch = thermalizing_channel(&ground).unwrap();
        let out = apply_channel(&ch, &plus_state()).unwrap();
        assert!(out.approx_eq(&ground, 1e-15));
    }

    #[test]
    fn thermalizing_channel_maximally_mixed_case() {
        let mixed = DensityMatrix::qubit_diag(0.5, 0.5).unwrap();
        let ch = thermalizing_channel(&mixed).unwrap();
        let out = apply_channel(&ch, &plus_state()).unwrap();
        assert!(out.approx_eq(&mixed, 1e-15));
    }

    #[test]
    fn thermalizing_channel_completeness_tight() {
        let t = thermal_state(ThermalSpec::new(2.0f64.ln()).unwrap());
        let ch = thermalizing_channel(&t).unwrap();
        let mut sum = ComplexMatrix::zeros(2, 2);
        for k in ch.kraus_ops() {
            sum = sum.add(&k.dagger().matmul(k).unwrap());
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(2)) <= 1e-15);
    }

    #[test]
    fn thermalizing_channel_rejects_coherent_target() {
        assert!(thermalizing_channel(&plus_state()).is_err());
    }

    #[test]
    fn apply_channel_identity_and_dim_check() {
        let rho = plus_state();
        let id = KrausChannel::identity(2);
        assert!(apply_channel(&id, &rho).unwrap().approx_eq(&rho, 0.0));

        let id4 = KrausChannel::identity(4);
        assert!(apply_channel(&id4, &rho).is_err());
    }

    #[test]
    fn kraus_completeness_enforced() {
        // half an identity is not trace preserving
        let bad = vec![ComplexMatrix::identity(2).scale_re(0.5)];
        assert!(KrausChannel::new(2, 2, bad).is_err());
    }

    #[test]
    fn effective_beta_examples() {
        let mixed = DensityMatrix::qubit_diag(0.5, 0.5).unwrap();
        assert_eq!(effective_beta(&mixed), 0.0);

        let cooled = DensityMatrix::qubit_diag(13.0 / 18.0, 5.0 / 18.0).unwrap();
        assert!((effective_beta(&cooled) - (13.0f64 / 5.0).ln()).abs() < 1e-12);

        let inverted = DensityMatrix::qubit_diag(0.3, 0.7).unwrap();
        assert!((effective_beta(&inverted) - (3.0f64 / 7.0).ln()).abs() < 1e-12);
        assert!(effective_beta(&inverted) < 0.0);

        assert_eq!(
            effective_beta(&DensityMatrix::qubit_diag(1.0, 0.0).unwrap()),
            f64::INFINITY
        );
        assert_eq!(
            effective_beta(&DensityMatrix::qubit_diag(0.0, 1.0).unwrap()),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn effective_beta_inverts_thermal_state() {
        for beta in [-2.0, -0.5, 0.0, 0.3, 1.0, 3.0] {
            let t = thermal_state(ThermalSpec::new(beta).unwrap());
            assert!(
                (effective_beta(&t) - beta).abs() < 1e-12,
                "beta {beta} round trip"
            );
        }
    }

    #[test]
    fn effective_beta_ignores_coherences() {
        let m = ComplexMatrix::new(
            2,
            2,
            vec![c(0.7, 0.0), c(0.1, 0.05), c(0.1, -0.05), c(0.3, 0.0)],
        )
        .unwrap();
        let rho = DensityMatrix::from_matrix(m).unwrap();
        assert!((effective_beta(&rho) - (0.7f64 / 0.3).ln()).abs() < 1e-12);
    }
}
