//! Random quantum objects for the property and acceptance suites, plus an
//! independent partial-trace oracle to check the library against.

use icofridge::tensor::{Complex64, ComplexMatrix};
use icofridge::{DensityMatrix, KrausChannel};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn random_complex_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Ginibre-normalized density matrix: G G^dag / tr, full rank almost surely.
pub fn random_density(rng: &mut impl Rng, n_qubits: usize) -> DensityMatrix {
    let dim = 1 << n_qubits;
    let g = random_complex_matrix(rng, dim, dim);
    let gg = g.matmul(&g.dagger()).expect("square product");
    let rho = gg.scale_re(1.0 / gg.trace().re);
    DensityMatrix::new(n_qubits, rho).expect("ginibre state is valid")
}

/// Random CPTP channel: orthonormalize the columns of a tall Gaussian
/// matrix into an isometry, then slice it into `n_ops` Kraus blocks.
pub fn random_kraus_channel(rng: &mut impl Rng, dim: usize, n_ops: usize) -> KrausChannel {
    let tall = random_complex_matrix(rng, n_ops * dim, dim);
    let iso = orthonormalize_columns(&tall);
    let ops = (0..n_ops)
        .map(|b| ComplexMatrix::from_fn(dim, dim, |r, c| iso.get(b * dim + r, c)))
        .collect();
    KrausChannel::new(dim, dim, ops).expect("isometry blocks are complete")
}

/// Modified Gram-Schmidt run twice; plenty for the tiny matrices here.
fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let mut v: Vec<Vec<Complex64>> = (0..cols)
        .map(|c| (0..rows).map(|r| m.get(r, c)).collect())
        .collect();
    for _ in 0..2 {
        for c in 0..cols {
            let (done, rest) = v.split_at_mut(c);
            let col = &mut rest[0];
            for prev in done.iter() {
                let proj: Complex64 = prev.iter().zip(col.iter()).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in col.iter_mut().zip(prev) {
                    *x -= proj * p;
                }
            }
            let norm: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(norm > 1e-9, "degenerate random draw");
            for x in col.iter_mut() {
                *x /= norm;
            }
        }
    }
    ComplexMatrix::from_fn(rows, cols, |r, c| v[c][r])
}

/// Index-summation partial trace, written independently of the library's
/// stride walk: keep subsystem `keep` of a uniform-qubit state.
#[allow(dead_code)] // each test target compiles its own copy of this module
pub fn partial_trace_oracle(mat: &ComplexMatrix, n_qubits: usize, keep: &[usize]) -> ComplexMatrix {
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !keep.contains(q)).collect();
    let kd = 1 << keep.len();
    let td = 1 << traced.len();
    let expand = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut x = 0usize;
        for (pos, &q) in keep.iter().enumerate() {
            x |= ((kept_bits >> (keep.len() - 1 - pos)) & 1) << (n_qubits - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            x |= ((traced_bits >> (traced.len() - 1 - pos)) & 1) << (n_qubits - 1 - q);
        }
        x
    };
    ComplexMatrix::from_fn(kd, kd, |i, j| {
        (0..td)
            .map(|t| mat.get(expand(i, t), expand(j, t)))
            .sum()
    })
}
