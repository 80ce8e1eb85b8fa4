// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass criterion numbers (e.g. `6 11`) as
//! arguments to run a subset.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nems_chain::decoherence::calibrate_zeta;
use nems_chain::dynamics::{evolve, evolve_ramp, fg_covariance, NormalModes, RampSchedule, TimeGrid};
use nems_chain::entanglement::{epr_witness_bound, log_negativity, symplectic_eigenvalues, LogBase, Partition};
use nems_chain::experiments::{
    falloff_scan, first_episode_peak, run_channel, run_decohere, run_quench, run_ramp_scan, BathConfig, ChannelConfig,
    FalloffConfig, RampScanConfig, ScenarioConfig, ScenarioKind, ScenarioResult, TimeConfig, TrackedConfig, ONSET_EPS,
};
use nems_chain::gaussian::{gibbs_state, two_mode_squeezed, vacuum, CovarianceMatrix};
use nems_chain::io::write_series;
use nems_chain::lattice::{build_potential, Boundary, ChainSpec};
use nems_chain::linalg::max_abs;
use nems_chain::units::PhysicalParams;
use nems_chain::Result;

const VALIDITY_TOL: f64 = 1e-8;
const SYMPLECTIC_TOL: f64 = 1e-10;
const WITNESS_SLACK: f64 = 1e-9;

/// Observations shared between criteria (physicality and witness checks
/// cover every scenario the other criteria run).
#[derive(Default)]
struct Ledger {
    scenarios: Vec<String>,
    min_margin: f64,
    max_witness_excess: f64,
    samples: usize,
}

impl Ledger {
    fn record(&mut self, name: String, r: &ScenarioResult) {
        for s in &r.samples {
            self.min_margin = self.min_margin.min(s.validity_margin);
            self.max_witness_excess = self.max_witness_excess.max(s.witness - s.e_n);
        }
        self.samples += r.samples.len();
        self.scenarios.push(name);
    }

    /// Runners reject unphysical samples and witness violations themselves,
    /// so a scenario that returns `Ok` without stored samples is still covered.
    fn record_checked(&mut self, name: String) {
        self.scenarios.push(name);
    }
}

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { passed, detail: detail.into() })
}

fn chain(n: usize, c: f64, boundary: Boundary) -> ChainSpec {
    ChainSpec::new(n, c, boundary).unwrap()
}

fn quench_config(spec: ChainSpec, sites: [usize; 2], t_end: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(ScenarioKind::Quench);
    cfg.chain = Some(spec);
    cfg.tracked = Some(TrackedConfig { sites });
    cfg.time = TimeConfig { t_end: Some(t_end), ..TimeConfig::default() };
    cfg
}

fn two_oscillators(frequency_hz: f64, modes: usize, cutoff: f64, base: LogBase) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(ScenarioKind::Decohere);
    cfg.chain = Some(chain(2, 0.4, Boundary::Periodic));
    cfg.tracked = Some(TrackedConfig { sites: [1, 2] });
    cfg.bath = Some(BathConfig { modes_per_oscillator: modes, cutoff, ..BathConfig::default() });
    cfg.physical = Some(PhysicalParams { frequency_hz, temperature_k: 0.01, q_factor: 1e3 });
    cfg.time = TimeConfig { t_end: Some(40.0), ..TimeConfig::default() };
    cfg.output.log_base = base;
    cfg
}

fn ac1(_: &mut Ledger) -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for c in [0.1, 0.2, 0.3] {
        let spec = ChainSpec::periodic(8, c)?;
        let modes = NormalModes::new(&build_potential(&spec, c)?)?;
        for t in [0.5, 1.0, 5.0, 20.0] {
            let spectral = evolve(&vacuum(8), &modes.propagator(t))?;
            worst = worst.max(max_abs(&(fg_covariance(&spec, t)?.matrix() - spectral.matrix())));
        }
    }
    verdict(worst <= 1e-10, format!("max |fg - spectral| = {worst:.2e} (tol 1e-10)"))
}

fn ac2(ledger: &mut Ledger) -> Result<Verdict> {
    let mut defect: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let chains = [
        chain(8, 0.1, Boundary::Periodic),
        chain(8, 0.3, Boundary::Periodic),
        chain(8, 0.1, Boundary::Open),
        chain(8, 0.3, Boundary::Open),
        chain(2, 0.4, Boundary::Periodic),
    ];
    for spec in &chains {
        let modes = NormalModes::new(&build_potential(spec, spec.coupling)?)?;
        for step in 0..=200 {
            let s = modes.propagator(0.5 * step as f64);
            defect = defect.max(s.symplectic_defect());
            for nu in symplectic_eigenvalues(&evolve(&vacuum(spec.n_sites), &s)?)? {
                drift = drift.max((nu - 1.0).abs());
            }
        }
    }
    // Ramped closed dynamics (RK4 during the ramp).
    let spec = chain(8, 0.1, Boundary::Open);
    let traj = evolve_ramp(&vacuum(8), &spec, &RampSchedule::linear(20.0, 0.1)?, 1e-3, &TimeGrid::new(100.0, 0.5)?)?;
    let mut ramp_drift: f64 = 0.0;
    for g in &traj.states {
        for nu in symplectic_eigenvalues(g)? {
            ramp_drift = ramp_drift.max((nu - 1.0).abs());
        }
    }

    let mut cfgs = vec![quench_config(chain(8, 0.3, Boundary::Periodic), [1, 5], 100.0)];
    cfgs.push(quench_config(chain(8, 0.1, Boundary::Open), [1, 8], 100.0));
    let mut ramped = quench_config(chain(8, 0.1, Boundary::Open), [1, 8], 60.0);
    ramped.ramp =
        Some(nems_chain::experiments::RampConfig { kind: nems_chain::dynamics::RampKind::Linear, duration: 5.0 });
    cfgs.push(ramped);
    for cfg in &cfgs {
        let r = run_quench(cfg)?;
        ledger.record(format!("quench {:?}", cfg.chain.unwrap().boundary), &r);
    }

    let margin_ok = ledger.min_margin >= -VALIDITY_TOL;
    verdict(
        defect <= SYMPLECTIC_TOL && drift <= 1e-8 && ramp_drift <= 1e-8 && margin_ok,
        format!(
            "symplectic defect {defect:.2e} (tol 1e-10); purity drift spectral {drift:.2e}, ramped {ramp_drift:.2e} \
             (tol 1e-8); min validity margin {:.2e} over {} samples (tol -1e-8)",
            ledger.min_margin, ledger.samples
        ),
    )
}

fn ac3(ledger: &mut Ledger) -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (boundary, sites) in [(Boundary::Periodic, [1, 5]), (Boundary::Open, [1, 8])] {
        let mut prev: Option<(f64, f64)> = None;
        let mut row = Vec::new();
        for c in [0.1, 0.2, 0.3] {
            let r = run_quench(&quench_config(chain(8, c, boundary), sites, 80.0))?;
            ledger.record(format!("eight-site {boundary:?} c={c}"), &r);
            let Some(onset) = r.onset else {
                ok = false;
                row.push(format!("c={c}: never entangled"));
                continue;
            };
            let quiet = r.samples.iter().take_while(|s| s.t < onset).all(|s| s.e_n <= ONSET_EPS);
            let starts_zero = r.samples[0].e_n == 0.0 && onset > 0.0;
            ok &= quiet && starts_zero && r.peak > 0.0;
            if let Some((t0, p)) = prev {
                ok &= onset < t0 && r.peak > p;
            }
            prev = Some((onset, r.peak));
            row.push(format!("c={c}: t0 {onset:.3}, peak {:.4}", r.peak));
        }
        parts.push(format!("{boundary:?} {sites:?}: {}", row.join("; ")));
    }
    verdict(ok, parts.join(" | "))
}

fn ac4(_: &mut Ledger) -> Result<Verdict> {
    let mut worst: (f64, String) = (0.0, String::new());
    let mut pairs = 0usize;
    let mut violations = std::collections::BTreeMap::<String, Vec<usize>>::new();
    for boundary in [Boundary::Periodic, Boundary::Open] {
        for n in 3..=16 {
            let mut bad = false;
            for c in [0.05, 0.1, 0.2, 0.3, 0.4, 0.5] {
                let spec = chain(n, c, boundary);
                let ground = gibbs_state(&build_potential(&spec, c)?, 0.0)?;
                for a in 0..n {
                    for b in a + 1..n {
                        if spec.distance(a, b) < 2 {
                            continue;
                        }
                        let e = log_negativity(&ground.reduce(&[a, b])?, &Partition::first_of_two())?;
                        pairs += 1;
                        bad |= e > 0.0;
                        if e > worst.0 {
                            worst = (e, format!("{boundary:?} N={n} c={c} sites ({}, {})", a + 1, b + 1));
                        }
                    }
                }
            }
            if bad {
                violations.entry(format!("{boundary:?}")).or_default().push(n);
            }
        }
    }
    let summary = if violations.is_empty() {
        "none".to_string()
    } else {
        violations.iter().map(|(b, ns)| format!("{b} N in {ns:?}")).collect::<Vec<_>>().join("; ")
    };
    verdict(
        worst.0 == 0.0,
        format!(
            "{pairs} pairs at distance >= 2, N = 3..16, c in (0, 0.5]; max E_N = {:e}{}; chains with entangled \
             pairs: {summary} (must be exactly 0)",
            worst.0,
            if worst.0 > 0.0 { format!(" ({})", worst.1) } else { String::new() }
        ),
    )
}

fn ac5(ledger: &mut Ledger) -> Result<Verdict> {
    let mut cfg = ScenarioConfig::new(ScenarioKind::RampScan);
    cfg.chain = Some(chain(8, 0.1, Boundary::Open));
    let durations = vec![0.0, 0.25, 0.5, 0.75, 1.0, 2.0, 5.0, 10.0, 20.0];
    cfg.ramp_scan = Some(RampScanConfig { durations: durations.clone() });
    let scan = run_ramp_scan(&cfg)?;
    ledger.record_checked("ramp scan".into());
    let first = |d: f64| scan.points.iter().find(|p| p.duration == d).and_then(|p| p.first_peak).unwrap_or(0.0);
    let sudden = first(0.0);

    let mut fast_ok = true;
    let mut fast = Vec::new();
    for &d in durations.iter().filter(|&&d| d > 0.0 && d <= 1.0) {
        let rel = (first(d) - sudden) / sudden;
        fast_ok &= rel.abs() <= 0.10;
        fast.push(format!("{d}: {:+.1}%", 100.0 * rel));
    }
    let slow: Vec<f64> = [2.0, 5.0, 10.0, 20.0].iter().map(|&d| first(d)).collect();
    let decreasing = slow.windows(2).all(|w| w[1] < w[0]);
    let lost = first(20.0) < 0.5 * sudden;

    // The t' = 0 point must agree with a sudden quench on the same grid.
    let q = run_quench(&quench_config(chain(8, 0.1, Boundary::Open), [1, 8], 60.0))?;
    ledger.record("ramp reference quench".into(), &q);
    let (qpeak, _) = first_episode_peak(&q.times(), &q.negativities(), ONSET_EPS).unwrap_or((0.0, 0.0));
    let consistent = (qpeak - sudden).abs() <= 1e-12;

    verdict(
        fast_ok && decreasing && lost && consistent,
        format!(
            "sudden {sudden:.6}; t'<=1 within 10%: {} [{}]; t' in {{2,5,10,20}} strictly decreasing: {} [{}]; \
             t'=20 below half: {}; t'=0 matches quench: {}",
            fast_ok,
            fast.join(", "),
            decreasing,
            slow.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", "),
            lost,
            consistent
        ),
    )
}

fn ac6(ledger: &mut Ledger) -> Result<Verdict> {
    let bits = run_decohere(&two_oscillators(5e9, 300, 5.0, LogBase::Two), None)?;
    let nats = run_decohere(&two_oscillators(5e9, 300, 5.0, LogBase::E), None)?;
    ledger.record("two oscillators 5 GHz (base 2)".into(), &bits);
    ledger.record("two oscillators 5 GHz (base e)".into(), &nats);
    let zeta = bits.calibration.map(|c| c.zeta).unwrap_or(f64::NAN);

    let mut sens = Vec::new();
    for (m, lambda) in [(200, 5.0), (400, 5.0), (300, 4.0), (300, 6.0)] {
        let r = run_decohere(&two_oscillators(5e9, m, lambda, LogBase::Two), None)?;
        ledger.record(format!("two oscillators M={m} cutoff={lambda}"), &r);
        sens.push(format!("M={m},L={lambda}: {:.4}", r.peak));
    }

    let passing: Vec<&str> =
        [(bits.peak, "2"), (nats.peak, "e")].iter().filter(|(p, _)| *p > 0.6).map(|(_, b)| *b).collect();
    let escalate = passing.is_empty() && bits.peak.max(nats.peak) >= 0.5;
    verdict(
        !passing.is_empty(),
        format!(
            "peak E_N base 2 = {:.4}, base e = {:.4} (threshold 0.6, passing base: {}){}; zeta = {zeta:.4e}; \
             sensitivity (base 2): {}",
            bits.peak,
            nats.peak,
            if passing.is_empty() { "none".to_string() } else { passing.join(", ") },
            if escalate { "; only within [0.5, 0.6]: bath-model ambiguity" } else { "" },
            sens.join(", ")
        ),
    )
}

fn ac7(ledger: &mut Ledger) -> Result<Verdict> {
    let r = run_decohere(&two_oscillators(2e9, 300, 5.0, LogBase::Two), None)?;
    ledger.record("two oscillators 2 GHz".into(), &r);
    let t_dim = r.dimensionless.map(|d| d.temperature).unwrap_or(f64::NAN);
    verdict(r.peak > 0.0, format!("peak E_N = {:.4} at t = {:.2} (k_B T / h f = {t_dim:.4})", r.peak, r.peak_time))
}

fn ac8(ledger: &mut Ledger) -> Result<Verdict> {
    let mut cfg = ScenarioConfig::new(ScenarioKind::Falloff);
    cfg.chain = Some(chain(128, 0.1, Boundary::Periodic));
    cfg.falloff = Some(FalloffConfig { distances: (1..=32).collect() });
    cfg.time = TimeConfig { t_end: Some(200.0), ..TimeConfig::default() };
    let r = falloff_scan(&cfg)?;
    ledger.record_checked("falloff N=128".into());

    let onsets: Vec<Option<f64>> =
        (2..=8).map(|n| r.rows.iter().find(|row| row.distance == n).and_then(|row| row.onset)).collect();
    let all_found = onsets.iter().all(Option::is_some);
    let onsets: Vec<f64> = onsets.into_iter().flatten().collect();
    let increasing = all_found && onsets.windows(2).all(|w| w[1] > w[0]);
    let r2 = r.onset_fit.map(|f| f.r_squared).unwrap_or(0.0);
    let slope = r.slope_fit.map(|f| f.slope).unwrap_or(f64::NAN);
    let slope_ok = (-1.5..=-0.5).contains(&slope);
    verdict(
        increasing && r2 > 0.95 && slope_ok,
        format!(
            "onsets n=2..8 [{}] strictly increasing: {increasing}, R^2 = {r2:.4} (> 0.95); \
             log-log slope n=4..32 = {slope:.4} (in [-1.5, -0.5]: {slope_ok})",
            onsets.iter().map(|t| format!("{t:.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn ac9(ledger: &mut Ledger) -> Result<Verdict> {
    let mut cfg = ScenarioConfig::new(ScenarioKind::Channel);
    cfg.chain = Some(chain(8, 0.1, Boundary::Open));
    cfg.channel = Some(ChannelConfig { squeezing: 1.0 });
    let r = run_channel(&cfg)?;
    ledger.record_checked("channel".into());
    let reached = r.arrivals.iter().filter(|a| a.site >= 2).all(|a| a.arrival.is_some());
    let r2 = r.fit.map(|f| f.r_squared).unwrap_or(0.0);
    let slope = r.fit.map(|f| f.slope).unwrap_or(f64::NAN);
    verdict(
        reached && r2 > 0.95,
        format!(
            "arrivals [{}]; fit n=2..8 slope {slope:.3}, R^2 = {r2:.4} (> 0.95)",
            r.arrivals
                .iter()
                .map(|a| a.arrival.map_or("-".into(), |t| format!("{t:.2}")))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn ac10(ledger: &mut Ledger) -> Result<Verdict> {
    if ledger.scenarios.is_empty() {
        for c in [0.1, 0.2, 0.3] {
            let r = run_quench(&quench_config(chain(8, c, Boundary::Periodic), [1, 5], 80.0))?;
            ledger.record(format!("eight-site periodic c={c}"), &r);
        }
    }
    let mut gap: f64 = 0.0;
    for r in [0.1, 0.5, 1.0, 2.0] {
        let tms: CovarianceMatrix = two_mode_squeezed(r)?;
        let e = log_negativity(&tms, &Partition::first_of_two())?;
        gap = gap.max((epr_witness_bound(&tms, 0, 1)? - e).abs());
    }
    let excess = ledger.max_witness_excess;
    verdict(
        excess <= WITNESS_SLACK && gap <= 1e-9,
        format!(
            "max witness - E_N = {excess:.2e} over {} stored samples in {} scenarios (slack 1e-9); \
             squeezed-state gap {gap:.2e} (tol 1e-9)",
            ledger.samples,
            ledger.scenarios.len()
        ),
    )
}

fn ac11(_: &mut Ledger) -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for q in [1e2, 1e3] {
        let cal = calibrate_zeta(q, 300, 5.0)?;
        let rel = cal.fitted_rate * q - 1.0;
        ok &= rel.abs() <= 0.02;
        parts.push(format!("Q={q}: zeta {:.5e}, rate {:.5e} ({:+.2}%)", cal.zeta, cal.fitted_rate, 100.0 * rel));
    }
    verdict(ok, format!("{} (tol 2%)", parts.join("; ")))
}

fn ac12(_: &mut Ledger) -> Result<Verdict> {
    let dir = tempfile::tempdir().map_err(|e| nems_chain::Error::Validity(e.to_string()))?;
    let mut ramped = quench_config(chain(8, 0.1, Boundary::Open), [1, 8], 30.0);
    ramped.ramp =
        Some(nems_chain::experiments::RampConfig { kind: nems_chain::dynamics::RampKind::Linear, duration: 2.0 });
    let mut bathed = two_oscillators(5e9, 300, 5.0, LogBase::Two);
    bathed.bath = Some(BathConfig { coupling: Some(3.2563e-3), temperature: Some(0.0417), ..BathConfig::default() });
    bathed.physical = None;
    let configs = [quench_config(chain(8, 0.3, Boundary::Periodic), [1, 5], 40.0), ramped, bathed];

    let mut identical = true;
    for (i, cfg) in configs.iter().enumerate() {
        let mut files = Vec::new();
        for run in 0..2 {
            let r = match cfg.kind {
                ScenarioKind::Decohere => run_decohere(cfg, None)?,
                _ => run_quench(cfg)?,
            };
            let path = dir.path().join(format!("{i}-{run}.csv"));
            write_series(&r.samples, &path)?;
            files.push(std::fs::read(&path).map_err(|e| nems_chain::Error::Validity(e.to_string()))?);
        }
        identical &= files[0] == files[1];
    }
    verdict(identical, format!("{} configs run twice, CSV byte-identical: {identical}", configs.len()))
}

type Criterion = (u32, &'static str, Duration, fn(&mut Ledger) -> Result<Verdict>);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (1, "fg route equals spectral route", Duration::from_secs(1), ac1),
        (2, "physicality suite", Duration::from_secs(10), ac2),
        (3, "ordinal onset and peak ordering", Duration::from_secs(5), ac3),
        (4, "ground-state separability", Duration::from_secs(5), ac4),
        (5, "ramp-duration scan", Duration::from_secs(120), ac5),
        (6, "two oscillators at 5 GHz exceed 0.6", Duration::from_secs(30), ac6),
        (7, "two oscillators at 2 GHz entangle", Duration::from_secs(30), ac7),
        (8, "propagation and falloff", Duration::from_secs(300), ac8),
        (9, "channel arrival times", Duration::from_secs(60), ac9),
        (10, "witness soundness", Duration::from_secs(60), ac10),
        (11, "bath calibration", Duration::from_secs(120), ac11),
        (12, "determinism", Duration::from_secs(10), ac12),
    ];
    let selected: BTreeSet<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();

    let mut ledger = Ledger { min_margin: f64::INFINITY, ..Ledger::default() };
    let mut failed = Vec::new();
    for (id, name, budget, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run(&mut ledger);
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok(v) => (v.passed && elapsed <= budget, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "AC{id:02} {} {name}: {detail} [{:.2}s, budget {}s]",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
