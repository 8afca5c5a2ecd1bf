//! Dense complex linear algebra for small multi-qubit systems.
//!
//! Everything here is row-major dense storage. System sizes in this crate
//! are at most 2^5, so naive O(d^3) algorithms are the right choice; there
//! is deliberately no sparse or tensor-network machinery.
//!
//! Convention used throughout the crate: qubit index 0 is the MOST
//! significant bit of a computational-basis index. Any other bit order
//! (in particular the histogram label order) is produced by an explicit
//! conversion at the formatting boundary, never inside the math.

use crate::error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries. Rejects entry-count
    /// mismatches and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix("zero dimension".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, dim, |r, c| {
            Complex64::new(if r == c { 1.0 } else { 0.0 }, 0.0)
        })
    }

    /// Matrix unit |i><j| of the given dimension.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        assert!(i < dim && j < dim, "matrix unit index out of range");
        let mut m = Self::zeros(dim, dim);
        m.set(i, j, Complex64::new(1.0, 0.0));
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diag_re(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |r, c| {
            Complex64::new(if r == c { entries[r] } else { 0.0 }, 0.0)
        })
    }

    /// Column basis vector e_index of the given dimension.
    pub fn basis_vector(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut m = Self::zeros(dim, 1);
        m.set(index, 0, Complex64::new(1.0, 0.0));
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.data[r * self.cols + c] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, f: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * f).collect(),
        }
    }

    pub fn scale_re(&self, f: f64) -> Self {
        self.scale(Complex64::new(f, 0.0))
    }

    /// Matrix product; the only structurally fallible arithmetic operation,
    /// since callers can combine matrices from independent sources.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimMismatch(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.data[k * other.cols + c];
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product; dimensions multiply.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = vec![Complex64::new(0.0, 0.0); rows * cols];
        for ar in 0..self.rows {
            for ac in 0..self.cols {
                let a = self.data[ar * self.cols + ac];
                for br in 0..other.rows {
                    for bc in 0..other.cols {
                        let r = ar * other.rows + br;
                        let c = ac * other.cols + bc;
                        data[r * cols + c] = a * other.data[br * other.cols + bc];
                    }
                }
            }
        }
        Self { rows, cols, data }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// Largest entrywise absolute difference; shapes must match.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "max_abs_diff: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols) && self.max_abs_diff(other) <= tol
    }

    /// Partial trace over the complement of `keep`.
    ///
    /// `subsystem_dims` lists the tensor factors with index 0 as the most
    /// significant; `keep` selects the factors to retain, returned in their
    /// original relative order.
    pub fn partial_trace(&self, subsystem_dims: &[usize], keep: &[usize]) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimMismatch("partial_trace: non-square matrix".into()));
        }
        if subsystem_dims.contains(&0) {
            return Err(Error::DimMismatch("partial_trace: zero subsystem dimension".into()));
        }
        let total: usize = subsystem_dims.iter().product();
        if total != self.rows {
            return Err(Error::DimMismatch(format!(
                "partial_trace: subsystem dims multiply to {}, matrix is {}x{}",
                total, self.rows, self.cols
            )));
        }
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(Error::DimMismatch("partial_trace: empty keep set".into()));
        }
        if keep.iter().any(|&k| k >= subsystem_dims.len()) {
            return Err(Error::DimMismatch("partial_trace: keep index out of range".into()));
        }

        let n_sub = subsystem_dims.len();
        // stride of subsystem i inside a flat basis index
        let mut stride = vec![1usize; n_sub];
        for i in (0..n_sub.saturating_sub(1)).rev() {
            stride[i] = stride[i + 1] * subsystem_dims[i + 1];
        }
        let digit = |x: usize, i: usize| (x / stride[i]) % subsystem_dims[i];

        let kept_dim: usize = keep.iter().map(|&k| subsystem_dims[k]).product();
        let mut out = Self::zeros(kept_dim, kept_dim);
        let kept_index = |x: usize| -> usize {
            keep.iter().fold(0, |acc, &k| acc * subsystem_dims[k] + digit(x, k))
        };
        let traced: Vec<usize> = (0..n_sub).filter(|i| !keep.contains(i)).collect();

        for row in 0..total {
            for col in 0..total {
                if traced.iter().any(|&t| digit(row, t) != digit(col, t)) {
                    continue;
                }
                let v = self.data[row * self.cols + col];
                let (kr, kc) = (kept_index(row), kept_index(col));
                out.data[kr * kept_dim + kc] += v;
            }
        }
        Ok(out)
    }

    /// Max-abs-entry hermiticity check.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for r in 0..self.rows {
            for c in r..self.cols {
                if (self.get(r, c) - self.get(c, r).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Max-abs-entry unitarity check on A†A - I.
    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let prod = self.dagger().matmul(self).expect("square product");
        prod.max_abs_diff(&Self::identity(self.rows)) <= tol
    }

    /// Positive semidefiniteness via the eigenvalue floor: minimum
    /// eigenvalue of the Hermitian part must be >= -tol. Noise and roundoff
    /// legitimately produce tiny negative eigenvalues, hence the floor.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let eigs = self.hermitian_eigenvalues();
        eigs.into_iter().fold(f64::INFINITY, f64::min) >= -tol
    }

    /// Eigenvalues of the Hermitian part (A + A†)/2, ascending.
    ///
    /// A Hermitian H = A + iB embeds into the real symmetric
    /// [[A, -B], [B, A]], whose spectrum is that of H doubled; a cyclic
    /// Jacobi pass on the embedding then yields the eigenvalues. Intended
    /// for the dimensions used here (<= 32); not a general eigensolver.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert!(self.is_square(), "eigenvalues of a non-square matrix");
        let n = self.rows;
        let m = 2 * n;
        let mut a = vec![0.0f64; m * m];
        for i in 0..n {
            for j in 0..n {
                let h = (self.get(i, j) + self.get(j, i).conj()).scale(0.5);
                a[i * m + j] = h.re;
                a[i * m + (j + n)] = -h.im;
                a[(i + n) * m + j] = h.im;
                a[(i + n) * m + (j + n)] = h.re;
            }
        }
        let mut vals = jacobi_symmetric_eigenvalues(m, &mut a);
        vals.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        // the embedding doubles every eigenvalue; average adjacent pairs
        (0..n).map(|k| 0.5 * (vals[2 * k] + vals[2 * k + 1])).collect()
    }
}

/// Cyclic Jacobi eigenvalues of a real symmetric matrix (row-major,
/// destroyed in place).
fn jacobi_symmetric_eigenvalues(n: usize, a: &mut [f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    if n == 1 {
        return vec![a[0]];
    }
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = 1e-14 * (frob + f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if (2.0 * off).sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let phi = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = phi.signum() / (phi.abs() + (phi * phi + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
    }

    fn hadamard() -> ComplexMatrix {
        let h = 1.0 / 2.0_f64.sqrt();
        ComplexMatrix::new(2, 2, vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]).unwrap()
    }

    #[test]
    fn new_rejects_bad_shapes_and_nonfinite() {
        assert!(ComplexMatrix::new(2, 2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::new(0, 2, vec![]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn kron_identity_case() {
        let i2 = ComplexMatrix::identity(2);
        assert!(i2.kron(&i2).approx_eq(&ComplexMatrix::identity(4), 0.0));
    }

    #[test]
    fn kron_projector_product() {
        let a = ComplexMatrix::diag_re(&[1.0, 0.0]);
        let b = ComplexMatrix::diag_re(&[0.0, 1.0]);
        let expect = ComplexMatrix::diag_re(&[0.0, 1.0, 0.0, 0.0]);
        assert!(a.kron(&b).approx_eq(&expect, 0.0));
    }

    #[test]
    fn kron_xx_flips_both_qubits() {
        // hand-multiplied 4x4 oracle: (X tensor X) |00> = |11>
        let xx = pauli_x().kron(&pauli_x());
        let ket00 = ComplexMatrix::basis_vector(4, 0);
        let out = xx.matmul(&ket00).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::basis_vector(4, 3), 0.0));
    }

    #[test]
    fn matmul_identity_and_pauli_involution() {
        let a = ComplexMatrix::new(2, 2, vec![c(1.0, 2.0), c(0.5, 0.0), c(0.0, -1.0), c(3.0, 0.0)])
            .unwrap();
        assert!(ComplexMatrix::identity(2).matmul(&a).unwrap().approx_eq(&a, 0.0));
        let x = pauli_x();
        assert!(x.matmul(&x).unwrap().approx_eq(&ComplexMatrix::identity(2), 0.0));
    }

    #[test]
    fn matmul_hadamard_squares_to_identity() {
        let h = hadamard();
        let hh = h.matmul(&h).unwrap();
        assert!(hh.approx_eq(&ComplexMatrix::identity(2), 1e-14));
    }

    #[test]
    fn matmul_dimension_mismatch_errors() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 3);
        assert!(a.matmul(&b).is_err());
    }

    #[test]
    fn dagger_examples() {
        let i4 = ComplexMatrix::identity(4);
        assert!(i4.dagger().approx_eq(&i4, 0.0));
        let a = ComplexMatrix::new(2, 3, vec![c(1.0, 2.0); 6]).unwrap();
        assert!(a.dagger().dagger().approx_eq(&a, 0.0));
        // |0><1| daggers to |1><0|
        let ket0bra1 = ComplexMatrix::unit(2, 0, 1);
        assert!(ket0bra1.dagger().approx_eq(&ComplexMatrix::unit(2, 1, 0), 0.0));
    }

    #[test]
    fn partial_trace_product_state_recovers_factor() {
        let rho_a = ComplexMatrix::new(
            2,
            2,
            vec![c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)],
        )
        .unwrap();
        let rho_b = ComplexMatrix::diag_re(&[0.25, 0.75]);
        let joint = rho_a.kron(&rho_b);
        let back = joint.partial_trace(&[2, 2], &[0]).unwrap();
        assert!(back.approx_eq(&rho_a, 1e-14));
        let back_b = joint.partial_trace(&[2, 2], &[1]).unwrap();
        assert!(back_b.approx_eq(&rho_b, 1e-14));
    }

    #[test]
    fn partial_trace_bell_marginal_is_maximally_mixed() {
        // |Phi+> = (|00> + |11>)/sqrt(2)
        let mut phi = ComplexMatrix::zeros(4, 1);
        let r = 1.0 / 2.0_f64.sqrt();
        phi.set(0, 0, c(r, 0.0));
        phi.set(3, 0, c(r, 0.0));
        let rho = phi.matmul(&phi.dagger()).unwrap();
        let marginal = rho.partial_trace(&[2, 2], &[1]).unwrap();
        assert!(marginal.approx_eq(&ComplexMatrix::identity(2).scale_re(0.5), 1e-15));
    }

    #[test]
    fn partial_trace_preserves_trace() {
        // fixed pseudo-random Hermitian on 4 qubits
        let n = 16;
        let mut seedling = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seedling = seedling.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seedling >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let raw = ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()));
        let herm = raw.add(&raw.dagger()).scale_re(0.5);
        let reduced = herm.partial_trace(&[2, 2, 2, 2], &[0, 2]).unwrap();
        assert!((reduced.trace() - herm.trace()).norm() <= 1e-12);
    }

    #[test]
    fn partial_trace_validates_inputs() {
        let m = ComplexMatrix::identity(4);
        assert!(m.partial_trace(&[2, 2], &[]).is_err());
        assert!(m.partial_trace(&[2, 3], &[0]).is_err());
        assert!(m.partial_trace(&[2, 2], &[7]).is_err());
    }

    #[test]
    fn hermiticity_check_examples() {
        assert!(ComplexMatrix::identity(3).is_hermitian(1e-12));
        let skew = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)])
            .unwrap();
        assert!(!skew.is_hermitian(1e-12));
        assert!(!ComplexMatrix::zeros(2, 3).is_hermitian(1e-12));
    }

    #[test]
    fn psd_check_eigenvalue_floor() {
        assert!(!ComplexMatrix::diag_re(&[1.0, -1e-6]).is_psd(1e-12));
        assert!(ComplexMatrix::diag_re(&[1.0, -1e-10]).is_psd(1e-9));
        assert!(ComplexMatrix::diag_re(&[0.5, 0.5]).is_psd(1e-12));
    }

    #[test]
    fn unitary_check_hadamard() {
        assert!(hadamard().is_unitary(1e-12));
        assert!(!ComplexMatrix::diag_re(&[1.0, 0.5]).is_unitary(1e-12));
    }

    #[test]
    fn hermitian_eigenvalues_known_spectra() {
        let eigs = ComplexMatrix::diag_re(&[3.0, -1.0, 2.0]).hermitian_eigenvalues();
        assert!((eigs[0] + 1.0).abs() < 1e-12);
        assert!((eigs[1] - 2.0).abs() < 1e-12);
        assert!((eigs[2] - 3.0).abs() < 1e-12);

        let x_eigs = pauli_x().hermitian_eigenvalues();
        assert!((x_eigs[0] + 1.0).abs() < 1e-12 && (x_eigs[1] - 1.0).abs() < 1e-12);

        // [[2, i], [-i, 2]] has spectrum {1, 3}
        let m = ComplexMatrix::new(2, 2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)])
            .unwrap();
        let eigs = m.hermitian_eigenvalues();
        assert!((eigs[0] - 1.0).abs() < 1e-12 && (eigs[1] - 3.0).abs() < 1e-12);
    }
}
