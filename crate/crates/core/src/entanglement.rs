// SPDX-License-Identifier: Apache-2.0

//! Symplectic spectra, partial transposition and entanglement measures.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{check_sites, CovarianceMatrix, VALIDITY_TOL};
use crate::linalg::{max_abs, symplectic_form, SymmetricSpectrum};

/// Logarithm base in which entanglement values are reported.
///
/// Internally every measure is computed in base 2 (ebits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    /// Converts a base-2 value into this base.
    pub fn from_bits(self, bits: f64) -> f64 {
        match self {
            LogBase::Two => bits,
            LogBase::E => bits * LN_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LogBase::Two => "2",
            LogBase::E => "e",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" => Ok(LogBase::E),
            other => Err(format!("log base must be `2` or `e`, got `{other}`")),
        }
    }
}

/// Symplectic eigenvalues `ν_1 ≤ … ≤ ν_N` of `Γ`.
///
/// With `K = Γ^{1/2} σ Γ^{1/2}` (real antisymmetric, eigenvalues `±iν`), the
/// symmetric matrix `KᵀK` carries every `ν²` twice.
pub fn symplectic_eigenvalues(gamma: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = gamma.n_modes();
    let spec = SymmetricSpectrum::new(gamma.matrix());
    let scale = max_abs(gamma.matrix()).max(1.0);
    let min = spec.min_value();
    if min < -1e-12 * scale {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
    }
    let root = spec.apply(|l| l.max(0.0).sqrt());
    let k = &root * symplectic_form(n) * &root;
    let ktk = k.transpose() * &k;
    let mu = SymmetricSpectrum::new(&ktk).values;
    Ok((0..n).map(|i| (0.5 * (mu[2 * i] + mu[2 * i + 1])).max(0.0).sqrt()).collect())
}

/// Subsystem `A` of a bipartition; `B` is the complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    subset: Vec<usize>,
    n_modes: usize,
}

impl Partition {
    pub fn new(subset: Vec<usize>, n_modes: usize) -> Result<Self> {
        if subset.is_empty() || subset.len() >= n_modes {
            return Err(Error::InvalidPartition(format!(
                "subset of size {} is not a nonempty proper subset of {n_modes} modes",
                subset.len()
            )));
        }
        check_sites(&subset, n_modes).map_err(|e| Error::InvalidPartition(e.to_string()))?;
        Ok(Self { subset, n_modes })
    }

    /// `{0} | {1}` split of a two-mode state.
    pub fn first_of_two() -> Self {
        Self { subset: vec![0], n_modes: 2 }
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn complement(&self) -> Partition {
        let subset = (0..self.n_modes).filter(|i| !self.subset.contains(i)).collect();
        Partition { subset, n_modes: self.n_modes }
    }
}

/// Momentum reversal on subsystem `A`.
pub fn partial_transpose(gamma: &CovarianceMatrix, partition: &Partition) -> Result<CovarianceMatrix> {
    let n = gamma.n_modes();
    if partition.n_modes != n {
        return Err(Error::InvalidPartition(format!("partition is over {} modes, state has {n}", partition.n_modes)));
    }
    let mut m: DMatrix<f64> = gamma.matrix().clone();
    for &a in &partition.subset {
        let p = n + a;
        m.row_mut(p).neg_mut();
        m.column_mut(p).neg_mut();
    }
    Ok(CovarianceMatrix::from_symmetric(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativityReport {
    /// Logarithmic negativity in ebits (base 2).
    pub log_negativity: f64,
    /// Smallest symplectic eigenvalue of the partially transposed state.
    pub min_nu_pt: f64,
    /// Smallest symplectic eigenvalue of the state itself.
    pub min_nu: f64,
}

/// Logarithmic negativity together with the spectra it was computed from.
pub fn negativity_report(gamma: &CovarianceMatrix, partition: &Partition) -> Result<NegativityReport> {
    let min_nu = symplectic_eigenvalues(gamma)?[0];
    if min_nu < 1.0 - VALIDITY_TOL {
        return Err(Error::Unphysical { min_nu, tolerance: VALIDITY_TOL });
    }
    let nu_pt = symplectic_eigenvalues(&partial_transpose(gamma, partition)?)?;
    let log_negativity =
        nu_pt.iter().map(|&nu| if nu >= 1.0 - VALIDITY_TOL { 1.0 } else { nu }).map(|nu| (-nu.log2()).max(0.0)).sum();
    Ok(NegativityReport { log_negativity, min_nu_pt: nu_pt[0], min_nu })
}

/// `E_N = Σ max(0, −log₂ ν̃_i)` over the partially transposed symplectic spectrum.
pub fn log_negativity(gamma: &CovarianceMatrix, partition: &Partition) -> Result<f64> {
    negativity_report(gamma, partition).map(|r| r.log_negativity)
}

/// EPR-variance lower bound on `E_N` (base 2) for modes `n`, `m`.
pub fn epr_witness_bound(gamma: &CovarianceMatrix, n: usize, m: usize) -> Result<f64> {
    if n == m {
        return Err(Error::InvalidSites("witness needs two distinct modes".into()));
    }
    check_sites(&[n, m], gamma.n_modes())?;
    let g = gamma.matrix();
    let (qn, qm, pn, pm) = (gamma.q(n), gamma.q(m), gamma.p(n), gamma.p(m));
    // Γ holds doubled moments; ⟨(q_n − q_m)²⟩ = (Γ_nn + Γ_mm − 2Γ_nm)/2.
    let var_q_diff = 0.5 * (g[(qn, qn)] + g[(qm, qm)] - 2.0 * g[(qn, qm)]);
    let var_p_sum = 0.5 * (g[(pn, pn)] + g[(pm, pm)] + 2.0 * g[(pn, pm)]);
    Ok((-(0.5 * (var_q_diff + var_p_sum)).log2()).max(0.0))
}
