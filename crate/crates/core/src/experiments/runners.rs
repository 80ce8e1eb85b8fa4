// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    first_episode_peak, global_peak, onset_time, sample_pair, LinearFit, Sample, ScenarioConfig, ScenarioKind,
    ScenarioResult, ONSET_EPS,
};
use crate::decoherence::{calibrate_zeta, decoherent_tracker, BathSpec, Calibration};
use crate::dynamics::{evolve_ramp, NormalModes, RampKind, RampSchedule, TimeGrid, TrackedMoments};
use crate::entanglement::LogBase;
use crate::error::{Error, Result};
use crate::gaussian::{gibbs_state, two_mode_squeezed, vacuum, CovarianceMatrix};
use crate::io::CalibrationCache;
use crate::lattice::{build_potential, PotentialMatrix};
use crate::units::{to_dimensionless, Dimensionless};

fn expect_kind(config: &ScenarioConfig, kind: ScenarioKind) -> Result<()> {
    if config.kind != kind {
        return Err(Error::Config {
            path: "kind".into(),
            message: format!("expected `{}`, got `{}`", kind.label(), config.kind.label()),
        });
    }
    config.validate()
}

fn sample_tracker(tracker: &TrackedMoments, times: &[f64], base: LogBase) -> Result<Vec<Sample>> {
    times.par_iter().map(|&t| sample_pair(t, &tracker.at(t), base)).collect()
}

/// Vacuum of the uncoupled chain, then a sudden or linear switch to `c`.
pub fn run_quench(config: &ScenarioConfig) -> Result<ScenarioResult> {
    expect_kind(config, ScenarioKind::Quench)?;
    let chain = config.chain()?;
    let pair = config.tracked_pair()?;
    let grid = config.time_grid()?;
    let schedule = config.ramp_schedule()?;
    let base = config.output.log_base;
    let gamma0 = vacuum(chain.n_sites);

    let samples = match schedule.kind() {
        RampKind::Sudden => {
            let v = build_potential(chain, schedule.target_coupling())?;
            let tracker = TrackedMoments::new(&v, &gamma0, &pair)?;
            sample_tracker(&tracker, &grid.times(), base)?
        }
        RampKind::Linear => {
            let traj = evolve_ramp(&gamma0, chain, &schedule, config.dt(), &grid)?;
            traj.times
                .iter()
                .zip(&traj.states)
                .map(|(&t, g)| sample_pair(t, &g.reduce(&pair)?, base))
                .collect::<Result<_>>()?
        }
    };
    Ok(ScenarioResult::from_samples(config, samples, None, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RampPoint {
    pub duration: f64,
    /// Peak of the first entangled episode between the chain ends.
    pub first_peak: Option<f64>,
    pub first_peak_time: Option<f64>,
    pub onset: Option<f64>,
    pub peak: f64,
    pub peak_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampScanResult {
    pub config: ScenarioConfig,
    pub log_base: LogBase,
    /// End-to-end pair, zero-based.
    pub pair: [usize; 2],
    pub points: Vec<RampPoint>,
}

/// First-maximum entanglement between the chain ends for each ramp duration.
///
/// Each point is evolved to `t′ + horizon`.
pub fn run_ramp_scan(config: &ScenarioConfig) -> Result<RampScanResult> {
    expect_kind(config, ScenarioKind::RampScan)?;
    let chain = *config.chain()?;
    let pair = [0, chain.n_sites - 1];
    let base = config.output.log_base;
    let horizon = config.horizon();
    let dt_sample = config.dt_sample();
    let dt = config.dt();

    let points = config
        .ramp_durations()
        .par_iter()
        .map(|&duration| {
            let schedule = RampSchedule::linear(duration, chain.coupling)?;
            let grid = TimeGrid::new(duration + horizon, dt_sample)?;
            let traj = evolve_ramp(&vacuum(chain.n_sites), &chain, &schedule, dt, &grid)?;
            let samples = traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(&t, g)| sample_pair(t, &g.reduce(&pair)?, base))
                .collect::<Result<Vec<_>>>()?;
            let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
            let values: Vec<f64> = samples.iter().map(|s| s.e_n).collect();
            let eps = base.from_bits(ONSET_EPS);
            let first = first_episode_peak(&times, &values, eps);
            let (peak, peak_time) = global_peak(&times, &values);
            Ok(RampPoint {
                duration,
                first_peak: first.map(|f| f.0),
                first_peak_time: first.map(|f| f.1),
                onset: onset_time(&times, &values, eps),
                peak,
                peak_time,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RampScanResult { config: config.clone(), log_base: base, pair, points })
}

/// Bath parameters after unit conversion and calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedBath {
    pub spec: BathSpec,
    pub calibration: Option<Calibration>,
    pub dimensionless: Option<Dimensionless>,
}

/// Turns the bath and physical sections into a concrete [`BathSpec`],
/// calibrating `ζ` (through `cache` when given) if only a Q factor is known.
pub fn resolve_bath(config: &ScenarioConfig, cache: Option<&CalibrationCache>) -> Result<ResolvedBath> {
    let bath = config.bath.ok_or_else(|| Error::Config { path: "bath".into(), message: "missing section".into() })?;
    let dimensionless = config.physical.as_ref().map(to_dimensionless).transpose()?;
    let (zeta, calibration) = match bath.coupling {
        Some(z) => (z, None),
        None => {
            let q = config
                .q_factor()
                .ok_or_else(|| Error::Config { path: "bath.q_factor".into(), message: "missing".into() })?;
            let cal = match cache {
                Some(c) => c.get_or_calibrate(q, bath.modes_per_oscillator, bath.cutoff)?,
                None => calibrate_zeta(q, bath.modes_per_oscillator, bath.cutoff)?,
            };
            (cal.zeta, Some(cal))
        }
    };
    let temperature = bath.temperature.or(dimensionless.map(|d| d.temperature)).unwrap_or(0.0);
    let spec =
        BathSpec { modes_per_oscillator: bath.modes_per_oscillator, cutoff: bath.cutoff, coupling: zeta, temperature };
    spec.validate()?;
    Ok(ResolvedBath { spec, calibration, dimensionless })
}

/// Chain in equilibrium with its baths, then a sudden switch to `c`.
pub fn run_decohere(config: &ScenarioConfig, cache: Option<&CalibrationCache>) -> Result<ScenarioResult> {
    expect_kind(config, ScenarioKind::Decohere)?;
    let chain = config.chain()?;
    let pair = config.tracked_pair()?;
    let times = config.time_grid()?.times();
    let resolved = resolve_bath(config, cache)?;
    let tracker = decoherent_tracker(chain, &resolved.spec, chain.coupling, &times, &pair)?;
    let samples = sample_tracker(&tracker, &times, config.output.log_base)?;
    Ok(ScenarioResult::from_samples(config, samples, resolved.calibration, resolved.dimensionless))
}

/// Calibrated `ζ` for the configured Q factor and bath size.
pub fn run_calibrate(config: &ScenarioConfig, cache: Option<&CalibrationCache>) -> Result<Calibration> {
    expect_kind(config, ScenarioKind::Calibrate)?;
    resolve_bath(config, cache)?
        .calibration
        .ok_or_else(|| Error::Config { path: "bath.q_factor".into(), message: "missing".into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arrival {
    /// Chain site, 1-based.
    pub site: usize,
    pub arrival: Option<f64>,
    pub peak: f64,
    pub peak_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelResult {
    pub config: ScenarioConfig,
    pub log_base: LogBase,
    pub squeezing: f64,
    pub arrivals: Vec<Arrival>,
    /// Linear fit of arrival time against site for sites 2..=N that were reached.
    pub fit: Option<LinearFit>,
}

/// Initial state for the channel: mode 0 is kept outside the chain and
/// two-mode squeezed with site 1; sites 2..=N are the reduced coupled ground state.
pub(crate) fn channel_initial(ground: &CovarianceMatrix, r: f64) -> Result<CovarianceMatrix> {
    let n = ground.n_modes();
    let rest: Vec<usize> = (1..n).collect();
    let tail = ground.reduce(&rest)?;
    Ok(two_mode_squeezed(r)?.direct_sum(&tail))
}

/// Sends half of a two-mode squeezed pair into site 1 and records when
/// entanglement with the kept mode reaches each site.
pub fn run_channel(config: &ScenarioConfig) -> Result<ChannelResult> {
    expect_kind(config, ScenarioKind::Channel)?;
    let chain = config.chain()?;
    let n = chain.n_sites;
    let r = config.squeezing();
    let base = config.output.log_base;
    let times = config.time_grid()?.times();

    let v_chain = build_potential(chain, chain.coupling)?;
    let ground = gibbs_state(&v_chain, 0.0)?;
    let gamma0 = channel_initial(&ground, r)?;
    // The kept mode rotates freely at unit frequency.
    let mut v = DMatrix::zeros(n + 1, n + 1);
    v[(0, 0)] = 1.0;
    v.view_mut((1, 1), (n, n)).copy_from(v_chain.matrix());
    let v = PotentialMatrix::new(v)?;

    let sites: Vec<usize> = (0..=n).collect();
    let tracker = TrackedMoments::new(&v, &gamma0, &sites)?;
    let rows: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let g = tracker.at(t);
            (1..=n).map(|j| Ok(sample_pair(t, &g.reduce(&[0, j])?, base)?.e_n)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let eps = base.from_bits(ONSET_EPS);
    let arrivals: Vec<Arrival> = (1..=n)
        .map(|site| {
            let values: Vec<f64> = rows.iter().map(|row| row[site - 1]).collect();
            let (peak, peak_time) = global_peak(&times, &values);
            Arrival { site, arrival: onset_time(&times, &values, eps), peak, peak_time }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        arrivals.iter().filter(|a| a.site >= 2).filter_map(|a| a.arrival.map(|t| (a.site as f64, t))).unzip();
    let fit = LinearFit::fit(&xs, &ys);
    Ok(ChannelResult { config: config.clone(), log_base: base, squeezing: r, arrivals, fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FalloffRow {
    pub distance: usize,
    pub onset: Option<f64>,
    pub peak: f64,
    pub peak_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalloffResult {
    pub config: ScenarioConfig,
    pub log_base: LogBase,
    pub rows: Vec<FalloffRow>,
    /// Onset time against distance for `2 ≤ n ≤ 8`.
    pub onset_fit: Option<LinearFit>,
    /// `log peak` against `log n` for `4 ≤ n ≤ 32`.
    pub slope_fit: Option<LinearFit>,
}

/// Peak entanglement between site 1 and site `1 + n` over the horizon,
/// for each requested distance `n`.
pub fn falloff_scan(config: &ScenarioConfig) -> Result<FalloffResult> {
    expect_kind(config, ScenarioKind::Falloff)?;
    let chain = config.chain()?;
    let base = config.output.log_base;
    let times = config.time_grid()?.times();
    let mut distances = config.falloff_distances();
    distances.sort_unstable();
    distances.dedup();

    let mut sites = vec![0];
    sites.extend(distances.iter().copied());
    let v = build_potential(chain, chain.coupling)?;
    let tracker = TrackedMoments::with_modes(Arc::new(NormalModes::new(&v)?), &vacuum(chain.n_sites), &sites)?;
    let rows: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let g = tracker.at(t);
            (1..sites.len()).map(|j| Ok(sample_pair(t, &g.reduce(&[0, j])?, base)?.e_n)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let eps = base.from_bits(ONSET_EPS);
    let rows: Vec<FalloffRow> = distances
        .iter()
        .enumerate()
        .map(|(j, &distance)| {
            let values: Vec<f64> = rows.iter().map(|row| row[j]).collect();
            let (peak, peak_time) = global_peak(&times, &values);
            FalloffRow { distance, onset: onset_time(&times, &values, eps), peak, peak_time }
        })
        .collect();

    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| (2..=8).contains(&r.distance))
        .filter_map(|r| r.onset.map(|t| (r.distance as f64, t)))
        .unzip();
    let onset_fit = LinearFit::fit(&xs, &ys);
    let (lx, ly): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| (4..=32).contains(&r.distance) && r.peak > 0.0)
        .map(|r| ((r.distance as f64).ln(), r.peak.ln()))
        .unzip();
    let slope_fit = LinearFit::fit(&lx, &ly);
    Ok(FalloffResult { config: config.clone(), log_base: base, rows, onset_fit, slope_fit })
}
