// SPDX-License-Identifier: Apache-2.0

//! Potential matrices of the nearest-neighbour oscillator chain.
//!
//! All quantities are dimensionless: unit mass, unit bare frequency and
//! `ħ = 1`, so the Hamiltonian is `H = ½ (pᵀp + qᵀ V q)`.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::decoherence::BathSpec;
use crate::error::{Error, Result};
use crate::linalg::{max_asymmetry, SymmetricSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Open,
}

/// On-site coefficient used for the two end sites of an open chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpenEnds {
    /// `Σ q² + c Σ (q_k − q_{k+1})²`: end sites get `1 + c`.
    #[default]
    Spring,
    /// Every site gets `1 + 2c`, as in the periodic chain.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub coupling: f64,
    pub boundary: Boundary,
    #[serde(default, skip_serializing_if = "is_default_ends")]
    pub open_ends: OpenEnds,
}

fn is_default_ends(e: &OpenEnds) -> bool {
    *e == OpenEnds::Spring
}

impl ChainSpec {
    pub fn new(n_sites: usize, coupling: f64, boundary: Boundary) -> Result<Self> {
        let spec = Self { n_sites, coupling, boundary, open_ends: OpenEnds::Spring };
        spec.validate()?;
        Ok(spec)
    }

    pub fn periodic(n_sites: usize, coupling: f64) -> Result<Self> {
        Self::new(n_sites, coupling, Boundary::Periodic)
    }

    pub fn open(n_sites: usize, coupling: f64) -> Result<Self> {
        Self::new(n_sites, coupling, Boundary::Open)
    }

    pub fn with_open_ends(mut self, ends: OpenEnds) -> Self {
        self.open_ends = ends;
        self
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::param("chain.n_sites", format!("must be >= 2, got {}", self.n_sites)));
        }
        check_coupling(self.coupling)
    }

    /// Number of sites between `a` and `b` (0-based) along the chain.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        match self.boundary {
            Boundary::Periodic => d.min(self.n_sites - d),
            Boundary::Open => d,
        }
    }
}

fn check_coupling(c: f64) -> Result<()> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::param("chain.coupling", format!("must be finite and >= 0, got {c}")));
    }
    Ok(())
}

/// Symmetric positive-definite matrix of the quadratic potential.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialMatrix(DMatrix<f64>);

impl PotentialMatrix {
    /// Wraps `m` after checking it is exactly symmetric and positive definite.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), actual: m.ncols() });
        }
        let asym = max_asymmetry(&m);
        if asym != 0.0 {
            return Err(Error::Asymmetric { asymmetry: asym });
        }
        if Cholesky::new(m.clone()).is_none() {
            let min_eigenvalue = SymmetricSpectrum::new(&m).min_value();
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

/// Potential matrix of `spec`'s geometry at coupling `c_value`.
///
/// Each bond `(k, k+1)` contributes `c (q_k − q_{k+1})²`; in the periodic
/// chain with two sites the wrap-around bond doubles the single link.
pub fn build_potential(spec: &ChainSpec, c_value: f64) -> Result<PotentialMatrix> {
    spec.validate()?;
    check_coupling(c_value)?;
    let n = spec.n_sites;
    let mut v = DMatrix::zeros(n, n);
    let bonds = match spec.boundary {
        Boundary::Periodic => n,
        Boundary::Open => n - 1,
    };
    for k in 0..bonds {
        let j = (k + 1) % n;
        v[(k, j)] -= c_value;
        v[(j, k)] -= c_value;
    }
    for k in 0..n {
        v[(k, k)] = match (spec.boundary, spec.open_ends) {
            (Boundary::Open, OpenEnds::Spring) if k == 0 || k == n - 1 => 1.0 + c_value,
            _ => 1.0 + 2.0 * c_value,
        };
    }
    PotentialMatrix::new(v)
}

/// Normal-mode frequency `ω_k = (1 + 4c sin²(πk/N))^{1/2}` of a periodic chain, `1 ≤ k ≤ N`.
pub fn dispersion(spec: &ChainSpec, mode_index: usize) -> Result<f64> {
    if spec.boundary != Boundary::Periodic {
        return Err(Error::UnsupportedBoundary("analytic dispersion"));
    }
    if mode_index == 0 || mode_index > spec.n_sites {
        return Err(Error::param("mode_index", format!("must lie in 1..={}, got {mode_index}", spec.n_sites)));
    }
    let s = (PI * mode_index as f64 / spec.n_sites as f64).sin();
    Ok((1.0 + 4.0 * spec.coupling * s * s).sqrt())
}

/// Frequencies `ω̃_i = iΛ/M` and couplings `ζ ω̃_i` of one discrete Ohmic bath.
pub fn bath_modes(bath: &BathSpec) -> Vec<(f64, f64)> {
    let m = bath.modes_per_oscillator;
    (1..=m)
        .map(|i| {
            let w = i as f64 * bath.cutoff / m as f64;
            (w, bath.coupling * w)
        })
        .collect()
}

/// Appends `M` bath modes to every system coordinate.
///
/// Layout: system coordinates first, then the bath of oscillator `j`
/// occupies indices `N + jM .. N + (j+1)M`.
pub fn augment_with_baths(v_sys: &PotentialMatrix, bath: &BathSpec) -> Result<PotentialMatrix> {
    bath.validate()?;
    let n = v_sys.dim();
    let m = bath.modes_per_oscillator;
    if m == 0 {
        return Ok(v_sys.clone());
    }
    let total = n * (m + 1);
    let mut v = DMatrix::zeros(total, total);
    v.view_mut((0, 0), (n, n)).copy_from(v_sys.matrix());
    let modes = bath_modes(bath);
    for j in 0..n {
        for (i, &(w, g)) in modes.iter().enumerate() {
            let b = n + j * m + i;
            v[(b, b)] = w * w;
            v[(j, b)] = g;
            v[(b, j)] = g;
        }
    }
    PotentialMatrix::new(v).map_err(|e| match e {
        Error::NotPositiveDefinite { min_eigenvalue } => Error::UnstableAugmentedPotential { min_eigenvalue },
        other => other,
    })
}
