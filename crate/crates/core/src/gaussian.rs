// SPDX-License-Identifier: Apache-2.0

//! Covariance matrices of Gaussian states.
//!
//! Convention: `Γ_{R,S} = 2 Re⟨(R − ⟨R⟩)(S − ⟨S⟩)⟩` over the canonical
//! coordinates ordered `(q_1 … q_N, p_1 … p_N)`, so the vacuum is the identity.
//! First moments are never tracked.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::entanglement::symplectic_eigenvalues;
use crate::error::{Error, Result};
use crate::lattice::PotentialMatrix;
use crate::linalg::{max_abs, max_asymmetry, symmetrize_mut, SymmetricSpectrum, EIGEN_FLOOR};

/// Symplectic eigenvalues may undershoot 1 by this much before a state counts as unphysical.
pub const VALIDITY_TOL: f64 = 1e-8;

/// Relative asymmetry accepted by [`CovarianceMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    /// Wraps a square, even-dimensional, symmetric matrix (symmetrizing away round-off).
    pub fn new(mut m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: 2 * (m.nrows() / 2).max(1), actual: m.ncols() });
        }
        let asymmetry = max_asymmetry(&m);
        if asymmetry > SYMMETRY_TOL * max_abs(&m).max(1.0) {
            return Err(Error::Asymmetric { asymmetry });
        }
        symmetrize_mut(&mut m);
        Ok(Self(m))
    }

    pub(crate) fn from_symmetric(mut m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square() && m.nrows().is_multiple_of(2));
        symmetrize_mut(&mut m);
        Self(m)
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn q(&self, i: usize) -> usize {
        i
    }

    pub fn p(&self, i: usize) -> usize {
        self.n_modes() + i
    }

    /// `Γ_A ⊕ Γ_B`, modes of `self` first.
    pub fn direct_sum(&self, other: &CovarianceMatrix) -> CovarianceMatrix {
        let (na, nb) = (self.n_modes(), other.n_modes());
        let n = na + nb;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (src, offset, k) in [(self, 0, na), (other, na, nb)] {
            for bi in 0..2 {
                for bj in 0..2 {
                    let block = src.0.view((bi * k, bj * k), (k, k));
                    m.view_mut((bi * n + offset, bj * n + offset), (k, k)).copy_from(&block);
                }
            }
        }
        CovarianceMatrix(m)
    }

    /// Principal submatrix for `sites` (0-based), re-packed in (q…, p…) order.
    ///
    /// Tracing out a Gaussian subsystem is exactly this selection.
    pub fn reduce(&self, sites: &[usize]) -> Result<CovarianceMatrix> {
        let n = self.n_modes();
        check_sites(sites, n)?;
        let k = sites.len();
        let idx: Vec<usize> = sites.iter().copied().chain(sites.iter().map(|s| s + n)).collect();
        let m = DMatrix::from_fn(2 * k, 2 * k, |i, j| self.0[(idx[i], idx[j])]);
        Ok(CovarianceMatrix(m))
    }
}

pub(crate) fn check_sites(sites: &[usize], n_modes: usize) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::InvalidSites("no sites selected".into()));
    }
    for (i, &s) in sites.iter().enumerate() {
        if s >= n_modes {
            return Err(Error::InvalidSites(format!("site index {s} out of range 0..{n_modes}")));
        }
        if sites[..i].contains(&s) {
            return Err(Error::InvalidSites(format!("site index {s} listed twice")));
        }
    }
    Ok(())
}

/// Ground state of `n_modes` uncoupled unit oscillators.
pub fn vacuum(n_modes: usize) -> CovarianceMatrix {
    CovarianceMatrix(DMatrix::identity(2 * n_modes, 2 * n_modes))
}

/// Canonical thermal state of `H = ½(pᵀp + qᵀVq)` at dimensionless temperature `k_B T / ħω`.
pub fn gibbs_state(v: &PotentialMatrix, temperature: f64) -> Result<CovarianceMatrix> {
    gibbs_from_spectrum(&SymmetricSpectrum::new(v.matrix()), temperature)
}

/// As [`gibbs_state`], from a precomputed eigendecomposition of `V`.
pub fn gibbs_from_spectrum(spec: &SymmetricSpectrum, temperature: f64) -> Result<CovarianceMatrix> {
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::param("temperature", format!("must be finite and >= 0, got {temperature}")));
    }
    let min = spec.min_value();
    if min <= EIGEN_FLOOR {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let occupation = |w: f64| {
        if temperature == 0.0 {
            1.0
        } else {
            1.0 / (w / (2.0 * temperature)).tanh()
        }
    };
    let n = spec.dim();
    let qq = spec.apply(|l| {
        let w = l.sqrt();
        occupation(w) / w
    });
    let pp = spec.apply(|l| {
        let w = l.sqrt();
        occupation(w) * w
    });
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&qq);
    m.view_mut((n, n), (n, n)).copy_from(&pp);
    Ok(CovarianceMatrix(m))
}

/// Two-mode squeezed vacuum with squeezing parameter `r`.
pub fn two_mode_squeezed(r: f64) -> Result<CovarianceMatrix> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("squeezing must be finite and >= 0, got {r}")));
    }
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let mut m = DMatrix::identity(4, 4) * ch;
    m[(0, 1)] = sh;
    m[(1, 0)] = sh;
    m[(2, 3)] = -sh;
    m[(3, 2)] = -sh;
    Ok(CovarianceMatrix(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    /// Smallest symplectic eigenvalue.
    pub min_nu: f64,
    /// `min_nu − 1`; physical states have margin ≥ −[`VALIDITY_TOL`].
    pub margin: f64,
    pub passed: bool,
}

/// Uncertainty-principle check `Γ + iσ ⪰ 0`, via the symplectic spectrum.
pub fn check_valid(gamma: &CovarianceMatrix) -> Result<ValidityReport> {
    let asym = max_asymmetry(gamma.matrix());
    if asym > SYMMETRY_TOL * max_abs(gamma.matrix()).max(1.0) {
        return Err(Error::Asymmetric { asymmetry: asym });
    }
    let min_nu = match symplectic_eigenvalues(gamma) {
        Ok(nu) => nu[0],
        // Indefinite Γ cannot be physical; report the failure instead of erroring.
        Err(Error::NotPositiveSemidefinite { .. }) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(ValidityReport { min_nu, margin: min_nu - 1.0, passed: min_nu >= 1.0 - VALIDITY_TOL })
}
