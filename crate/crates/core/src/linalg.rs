// SPDX-License-Identifier: Apache-2.0

//! Dense symmetric eigendecompositions and the matrix functions built on them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenvalues below this are treated as non-positive by the matrix-function helpers.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Eigendecomposition `A = U diag(λ) Uᵀ` of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymmetricSpectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymmetricSpectrum {
    pub fn new(matrix: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(matrix.clone());
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `U diag(f(λ)) Uᵀ`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            scaled.column_mut(j).scale_mut(s);
        }
        let mut out = &scaled * self.vectors.transpose();
        symmetrize_mut(&mut out);
        out
    }
}

/// Symplectic form `[[0, I], [-I, 0]]` for `n` modes in (q…, p…) ordering.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut sigma = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        sigma[(i, n + i)] = 1.0;
        sigma[(n + i, i)] = -1.0;
    }
    sigma
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize_mut(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `B · M · Bᵀ` for a block-diagonal `B = diag(U, U)` acting on (q…, p…) blocks.
pub(crate) fn congruence_blockdiag(u: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.nrows();
    let ut = u.transpose();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for bi in 0..2 {
        for bj in 0..2 {
            let block = m.view((bi * n, bj * n), (n, n));
            let t = u * block * &ut;
            out.view_mut((bi * n, bj * n), (n, n)).copy_from(&t);
        }
    }
    symmetrize_mut(&mut out);
    out
}
