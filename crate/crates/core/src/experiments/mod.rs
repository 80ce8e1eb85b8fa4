// SPDX-License-Identifier: Apache-2.0

//! Scenario runners: sudden and ramped quenches, decoherent quenches, channel
//! transport and distance falloff, plus the series post-processing they share.

mod config;
mod runners;
mod suite;

pub use config::{
    BathConfig, ChannelConfig, FalloffConfig, OutputConfig, RampConfig, RampScanConfig, ScenarioConfig, ScenarioKind,
    TimeConfig, TrackedConfig, DEFAULT_DT_SAMPLE,
};
pub use runners::{
    falloff_scan, resolve_bath, run_calibrate, run_channel, run_decohere, run_quench, run_ramp_scan, Arrival,
    ChannelResult, FalloffResult, FalloffRow, RampPoint, RampScanResult, ResolvedBath,
};
pub use suite::{validate_suite, Check};

use serde::{Deserialize, Serialize};

use crate::decoherence::Calibration;
use crate::entanglement::{epr_witness_bound, negativity_report, LogBase, Partition};
use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::units::Dimensionless;

/// Entanglement threshold (ebits) separating "separable" from "entangled".
pub const ONSET_EPS: f64 = 1e-6;
/// Slack allowed when checking `witness ≤ E_N`.
pub const WITNESS_SLACK: f64 = 1e-9;

/// One row of a time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    /// Logarithmic negativity in the reporting base.
    pub e_n: f64,
    /// EPR-variance lower bound, same base.
    pub witness: f64,
    pub nu_min_pt: f64,
    /// Smallest symplectic eigenvalue of the pair state minus one.
    pub validity_margin: f64,
}

/// Entanglement measures of a two-mode state at time `t`.
///
/// Fails with a validity error if the state is unphysical or the witness
/// exceeds the negativity.
pub fn sample_pair(t: f64, pair: &CovarianceMatrix, base: LogBase) -> Result<Sample> {
    let report = negativity_report(pair, &Partition::first_of_two())?;
    let witness = epr_witness_bound(pair, 0, 1)?;
    if witness > report.log_negativity + WITNESS_SLACK {
        return Err(Error::Validity(format!(
            "witness {witness:.12} exceeds log-negativity {:.12} at t = {t}",
            report.log_negativity
        )));
    }
    Ok(Sample {
        t,
        e_n: base.from_bits(report.log_negativity),
        witness: base.from_bits(witness),
        nu_min_pt: report.min_nu_pt,
        validity_margin: report.min_nu - 1.0,
    })
}

/// First time `values` exceeds `eps`, linearly interpolated from the previous sample.
pub fn onset_time(times: &[f64], values: &[f64], eps: f64) -> Option<f64> {
    let i = values.iter().position(|&v| v > eps)?;
    if i == 0 {
        return Some(times[0]);
    }
    let (t0, t1, v0, v1) = (times[i - 1], times[i], values[i - 1], values[i]);
    Some(t0 + (eps - v0) / (v1 - v0) * (t1 - t0))
}

/// Largest value (and its time) over the whole series.
pub fn global_peak(times: &[f64], values: &[f64]) -> (f64, f64) {
    let mut best = (0.0, times.first().copied().unwrap_or(0.0));
    for (&t, &v) in times.iter().zip(values) {
        if v > best.0 {
            best = (v, t);
        }
    }
    best
}

/// Peak of the first contiguous stretch with `value > eps`.
pub fn first_episode_peak(times: &[f64], values: &[f64], eps: f64) -> Option<(f64, f64)> {
    let start = values.iter().position(|&v| v > eps)?;
    let mut best = (values[start], times[start]);
    for (&t, &v) in times[start..].iter().zip(&values[start..]) {
        if v <= eps {
            break;
        }
        if v > best.0 {
            best = (v, t);
        }
    }
    Some(best)
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl LinearFit {
    /// `None` with fewer than two points or no spread in `x`.
    pub fn fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
        let n = x.len().min(y.len());
        if n < 2 {
            return None;
        }
        let mx = x[..n].iter().sum::<f64>() / n as f64;
        let my = y[..n].iter().sum::<f64>() / n as f64;
        let sxx: f64 = x[..n].iter().map(|a| (a - mx).powi(2)).sum();
        let syy: f64 = y[..n].iter().map(|b| (b - my).powi(2)).sum();
        let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum();
        if sxx == 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
        Some(LinearFit { slope, intercept: my - slope * mx, r_squared, points: n })
    }
}

/// Outcome of a single-pair scenario (quench or decoherent quench).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub log_base: LogBase,
    pub samples: Vec<Sample>,
    pub onset: Option<f64>,
    pub peak: f64,
    pub peak_time: f64,
    pub calibration: Option<Calibration>,
    pub dimensionless: Option<Dimensionless>,
}

impl ScenarioResult {
    pub(crate) fn from_samples(
        config: &ScenarioConfig,
        samples: Vec<Sample>,
        calibration: Option<Calibration>,
        dimensionless: Option<Dimensionless>,
    ) -> ScenarioResult {
        let base = config.output.log_base;
        let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let values: Vec<f64> = samples.iter().map(|s| s.e_n).collect();
        let onset = onset_time(&times, &values, base.from_bits(ONSET_EPS));
        let (peak, peak_time) = global_peak(&times, &values);
        ScenarioResult {
            config: config.clone(),
            log_base: base,
            samples,
            onset,
            peak,
            peak_time,
            calibration,
            dimensionless,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn negativities(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.e_n).collect()
    }

    /// Peak in ebits regardless of the reporting base.
    pub fn peak_bits(&self) -> f64 {
        match self.log_base {
            LogBase::Two => self.peak,
            LogBase::E => self.peak / std::f64::consts::LN_2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{two_mode_squeezed, vacuum};

    #[test]
    fn onset_of_zero_series_is_none() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(onset_time(&t, &[0.0; 3], ONSET_EPS), None);
    }

    #[test]
    fn onset_interpolates_inside_the_step() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let v: Vec<f64> = (0..20).map(|i| if i <= 10 { 0.0 } else { 0.5 }).collect();
        let t0 = onset_time(&t, &v, ONSET_EPS).unwrap();
        assert!(t0 > t[10] && t0 < t[11], "{t0}");
        assert!((t0 - (5.0 + 0.5 * ONSET_EPS / 0.5)).abs() < 1e-15);
    }

    #[test]
    fn onset_at_first_sample() {
        assert_eq!(onset_time(&[0.0, 1.0], &[0.3, 0.2], ONSET_EPS), Some(0.0));
    }

    #[test]
    fn onset_tie_at_threshold_waits_for_strict_excess() {
        let t = [0.0, 1.0, 2.0];
        let v = [0.0, ONSET_EPS, 2.0 * ONSET_EPS];
        assert_eq!(onset_time(&t, &v, ONSET_EPS), Some(1.0));
    }

    #[test]
    fn first_episode_ignores_later_larger_peaks() {
        let t: Vec<f64> = (0..8).map(f64::from).collect();
        let v = [0.0, 0.1, 0.3, 0.2, 0.0, 0.9, 0.4, 0.0];
        assert_eq!(first_episode_peak(&t, &v, ONSET_EPS), Some((0.3, 2.0)));
        assert_eq!(global_peak(&t, &v), (0.9, 5.0));
        assert_eq!(first_episode_peak(&t, &[0.0; 8], ONSET_EPS), None);
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let f = LinearFit::fit(&x, &y).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(LinearFit::fit(&[1.0], &[1.0]).is_none());
        assert!(LinearFit::fit(&[2.0, 2.0], &[1.0, 3.0]).is_none());
    }

    #[test]
    fn sample_of_squeezed_pair() {
        let s = sample_pair(0.0, &two_mode_squeezed(1.0).unwrap(), LogBase::E).unwrap();
        assert!((s.e_n - 2.0).abs() < 1e-10);
        assert!((s.witness - s.e_n).abs() < 1e-9);
        assert!((s.nu_min_pt - (-2.0f64).exp()).abs() < 1e-10);
        assert!(s.validity_margin.abs() < 1e-10);
        let v = sample_pair(1.0, &vacuum(2), LogBase::Two).unwrap();
        assert_eq!(v.e_n, 0.0);
    }
}
