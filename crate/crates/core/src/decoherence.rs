// SPDX-License-Identifier: Apache-2.0

//! Discrete Ohmic heat baths attached to every oscillator of the chain.
//!
//! Each oscillator `j` couples through `ζ ω̃_i q_j q_j^i` to `M` bath modes of
//! frequency `ω̃_i = iΛ/M` (unit mass, free Hamiltonian `½(p² + ω̃²q²)`).
//! Temperature only enters through the correlated Gibbs state the chain and
//! its baths start in; afterwards the supersystem evolves unitarily.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{NormalModes, TrackedMoments};
use crate::error::{Error, Result};
use crate::gaussian::{gibbs_state, CovarianceMatrix};
use crate::lattice::{augment_with_baths, build_potential, ChainSpec, PotentialMatrix};

pub const DEFAULT_BATH_MODES: usize = 300;
pub const DEFAULT_CUTOFF: f64 = 5.0;

/// Relative accuracy the calibration loop aims for (well inside the 2 % contract).
const CALIBRATION_TARGET: f64 = 1e-3;
/// Sampling step for the energy trace used by the decay fit.
const CALIBRATION_DT: f64 = 0.05;
/// Excess `Γ_qq` added to the system mode before the decay is observed.
const EXCESS_GAMMA_QQ: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    pub modes_per_oscillator: usize,
    pub cutoff: f64,
    /// System–bath coupling `ζ`.
    pub coupling: f64,
    /// Dimensionless temperature `k_B T / ħω`.
    pub temperature: f64,
}

impl BathSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::param("bath.cutoff", format!("must be finite and > 0, got {}", self.cutoff)));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(Error::param("bath.coupling", format!("must be finite and >= 0, got {}", self.coupling)));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::param("bath.temperature", format!("must be finite and >= 0, got {}", self.temperature)));
        }
        Ok(())
    }

    /// `2πM/Λ`: the discrete bath returns energy to the system after this time.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI * self.modes_per_oscillator as f64 / self.cutoff
    }

    /// Fails unless `horizon < 2πM/Λ`.
    pub fn check_horizon(&self, horizon: f64) -> Result<()> {
        let recurrence = self.recurrence_time();
        if horizon >= recurrence {
            let required_modes = (horizon * self.cutoff / (2.0 * PI)).floor() as usize + 1;
            return Err(Error::RecurrenceGuard {
                horizon,
                recurrence,
                modes: self.modes_per_oscillator,
                required_modes,
            });
        }
        Ok(())
    }
}

/// Outcome of [`calibrate_zeta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub q_factor: f64,
    pub modes: usize,
    pub cutoff: f64,
    pub zeta: f64,
    /// Fitted energy-decay rate at `zeta`.
    pub fitted_rate: f64,
    /// RMS residual of the log-linear envelope fit.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub residual: f64,
    pub points: usize,
}

/// Largest `ζ` keeping a unit oscillator with `M` bath modes stable: `1 − Mζ² > 0`.
pub fn stability_bound(modes: usize) -> f64 {
    1.0 / (modes as f64).sqrt()
}

/// Fit window `[0, min(5Q, 0.8 · 2πM/Λ)]`.
pub fn fit_window(q_factor: f64, modes: usize, cutoff: f64) -> f64 {
    (5.0 * q_factor).min(0.8 * 2.0 * PI * modes as f64 / cutoff)
}

fn single_oscillator_modes(zeta: f64, modes: usize, cutoff: f64) -> Result<NormalModes> {
    let bath = BathSpec { modes_per_oscillator: modes, cutoff, coupling: zeta, temperature: 0.0 };
    let v = augment_with_baths(&PotentialMatrix::identity(1), &bath)?;
    NormalModes::new(&v)
}

/// Excess energy of a single bath-coupled oscillator whose equilibrium `Γ_qq`
/// was raised by `amplitude` at `t = 0`.
///
/// The equilibrium part is stationary, so only `S(t) e_q` matters:
/// `ε(t) = amplitude/4 · (S_qq(t)₀₀² + S_pq(t)₀₀²)`.
pub fn excess_energy_trace(zeta: f64, modes: usize, cutoff: f64, amplitude: f64, times: &[f64]) -> Result<Vec<f64>> {
    let nm = single_oscillator_modes(zeta, modes, cutoff)?;
    let weights: Vec<f64> = nm.basis().row(0).iter().map(|u| u * u).collect();
    let freqs = nm.frequencies();
    Ok(times
        .iter()
        .map(|&t| {
            let (mut rq, mut rp) = (0.0, 0.0);
            for (w2, &w) in weights.iter().zip(freqs) {
                let (s, c) = (w * t).sin_cos();
                rq += w2 * c;
                rp -= w2 * w * s;
            }
            0.25 * amplitude * (rq * rq + rp * rp)
        })
        .collect())
}

/// Log-linear least-squares fit of the local maxima of an energy trace.
pub fn fit_decay(times: &[f64], energy: &[f64]) -> Result<DecayFit> {
    let mut pts: Vec<(f64, f64)> = (1..energy.len().saturating_sub(1))
        .filter(|&i| energy[i] >= energy[i - 1] && energy[i] > energy[i + 1] && energy[i] > 0.0)
        .map(|i| (times[i], energy[i].ln()))
        .collect();
    if pts.len() < 3 {
        pts = times.iter().zip(energy).filter(|(_, e)| **e > 0.0).map(|(t, e)| (*t, e.ln())).collect();
    }
    if pts.len() < 2 {
        return Err(Error::Calibration("energy trace has fewer than two usable points".into()));
    }
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / k).sqrt();
    Ok(DecayFit { rate: -slope, residual, points: pts.len() })
}

/// Fitted energy-decay rate of a unit oscillator coupled with strength `zeta`.
pub fn decay_rate(zeta: f64, modes: usize, cutoff: f64, window: f64, amplitude: f64) -> Result<DecayFit> {
    let steps = (window / CALIBRATION_DT).floor() as usize;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * CALIBRATION_DT).collect();
    let energy = excess_energy_trace(zeta, modes, cutoff, amplitude, &times)?;
    fit_decay(&times, &energy)
}

/// Finds `ζ` such that a single oscillator dissipates energy at rate `1/Q`.
pub fn calibrate_zeta(q_factor: f64, modes: usize, cutoff: f64) -> Result<Calibration> {
    if !(q_factor > 0.0) {
        return Err(Error::param("q_factor", format!("must be > 0, got {q_factor}")));
    }
    if modes < 10 {
        return Err(Error::param("bath.modes_per_oscillator", format!("calibration needs M >= 10, got {modes}")));
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::param("bath.cutoff", format!("must be finite and > 0, got {cutoff}")));
    }
    if q_factor.is_infinite() {
        return Ok(Calibration { q_factor, modes, cutoff, zeta: 0.0, fitted_rate: 0.0, residual: 0.0 });
    }
    let target = 1.0 / q_factor;
    let window = fit_window(q_factor, modes, cutoff);
    let rate = |z: f64| decay_rate(z, modes, cutoff, window, EXCESS_GAMMA_QQ);
    let bound = stability_bound(modes);
    let ceiling = 0.95 * bound;

    // Continuum estimate γ = πζ²M/(2Λ) seeds the bracket.
    let guess = (2.0 * cutoff * target / (PI * modes as f64)).sqrt().min(0.5 * ceiling);
    let mut hi = guess;
    while rate(hi)?.rate < target {
        if hi >= ceiling {
            return Err(Error::Calibration(format!(
                "no coupling below the stability bound reaches rate {target:e}; stable range is 0 <= zeta < {bound:.6}"
            )));
        }
        hi = (hi * 1.5).min(ceiling);
    }
    let mut lo = hi / 1.5;
    while lo > 0.0 && rate(lo)?.rate > target {
        lo /= 1.5;
        if lo < 1e-12 {
            lo = 0.0;
        }
    }

    let mut best = None;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fit = rate(mid)?;
        best = Some((mid, fit));
        if (fit.rate / target - 1.0).abs() < CALIBRATION_TARGET {
            break;
        }
        if fit.rate < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (zeta, fit) = best.expect("bisection runs at least once");
    Ok(Calibration { q_factor, modes, cutoff, zeta, fitted_rate: fit.rate, residual: fit.residual })
}

/// Correlated equilibrium of the uncoupled chain with its baths attached.
pub fn coupled_gibbs_initial(chain: &ChainSpec, bath: &BathSpec) -> Result<CovarianceMatrix> {
    let v0 = augment_with_baths(&build_potential(chain, 0.0)?, bath)?;
    gibbs_state(&v0, bath.temperature)
}

/// Sudden switch of the chain coupling to `c_target` with the baths attached.
///
/// Returns the reduced covariance matrices of `sites` at `times`.
pub fn decoherent_quench(
    chain: &ChainSpec,
    bath: &BathSpec,
    c_target: f64,
    times: &[f64],
    sites: &[usize],
) -> Result<Vec<CovarianceMatrix>> {
    let tracker = decoherent_tracker(chain, bath, c_target, times, sites)?;
    Ok(times.iter().map(|&t| tracker.at(t)).collect())
}

pub(crate) fn decoherent_tracker(
    chain: &ChainSpec,
    bath: &BathSpec,
    c_target: f64,
    times: &[f64],
    sites: &[usize],
) -> Result<TrackedMoments> {
    bath.validate()?;
    let horizon = times.iter().copied().fold(0.0, f64::max);
    bath.check_horizon(horizon)?;
    if let Some(&s) = sites.iter().find(|&&s| s >= chain.n_sites) {
        return Err(Error::InvalidSites(format!("site index {s} out of range 0..{}", chain.n_sites)));
    }
    let gamma0 = coupled_gibbs_initial(chain, bath)?;
    let v1 = augment_with_baths(&build_potential(chain, c_target)?, bath)?;
    TrackedMoments::with_modes(Arc::new(NormalModes::new(&v1)?), &gamma0, sites)
}
