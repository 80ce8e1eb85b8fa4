// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use nems_chain::entanglement::LogBase;
use nems_chain::experiments::{
    self, BathConfig, ChannelConfig, FalloffConfig, RampScanConfig, ScenarioConfig, ScenarioKind, ScenarioResult,
    TrackedConfig,
};
use nems_chain::io::{self, CalibrationCache, RunManifest, Tolerances};
use nems_chain::lattice::ChainSpec;
use nems_chain::units::PhysicalParams;
use nems_chain::{Error, Result};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "nems-chain", version, about = "Entanglement dynamics in quenched oscillator chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML). Without it the built-in default for the subcommand is used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root directory for run output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Sample spacing.
    #[arg(long, global = true)]
    dt: Option<f64>,

    /// Simulation horizon (after the ramp, for ramp scans).
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,

    /// Logarithm base for reported entanglement: 2 or e.
    #[arg(long = "log-base", global = true)]
    log_base: Option<LogBase>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Sudden or ramped quench of an ideal chain.
    Quench,
    /// First-maximum end-to-end entanglement against ramp duration.
    RampScan,
    /// Quench with local Ohmic baths attached.
    Decohere,
    /// Transport of a two-mode squeezed half along the chain.
    Channel,
    /// Peak entanglement against distance on a long ring.
    Falloff,
    /// Calibrate the bath coupling for a Q factor.
    Calibrate,
    /// Run the invariant suite (and check `--config` if given).
    Validate,
}

impl Command {
    fn kind(self) -> Option<ScenarioKind> {
        Some(match self {
            Command::Quench => ScenarioKind::Quench,
            Command::RampScan => ScenarioKind::RampScan,
            Command::Decohere => ScenarioKind::Decohere,
            Command::Channel => ScenarioKind::Channel,
            Command::Falloff => ScenarioKind::Falloff,
            Command::Calibrate => ScenarioKind::Calibrate,
            Command::Validate => return None,
        })
    }
}

fn chain(n: usize, c: f64, periodic: bool) -> ChainSpec {
    let spec = if periodic { ChainSpec::periodic(n, c) } else { ChainSpec::open(n, c) };
    spec.expect("built-in chain is valid")
}

/// Built-in scenario for each subcommand.
fn default_config(kind: ScenarioKind) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(kind);
    let resonator = PhysicalParams { frequency_hz: 5e9, temperature_k: 0.01, q_factor: 1e3 };
    match kind {
        ScenarioKind::Quench => {
            c.chain = Some(chain(8, 0.3, true));
            c.tracked = Some(TrackedConfig { sites: [1, 5] });
        }
        ScenarioKind::RampScan => {
            c.chain = Some(chain(8, 0.1, false));
            c.ramp_scan = Some(RampScanConfig { durations: vec![0.0, 0.25, 0.5, 0.75, 1.0, 2.0, 5.0, 10.0, 20.0] });
        }
        ScenarioKind::Decohere => {
            c.chain = Some(chain(2, 0.4, true));
            c.tracked = Some(TrackedConfig { sites: [1, 2] });
            c.bath = Some(BathConfig::default());
            c.physical = Some(resonator);
        }
        ScenarioKind::Channel => {
            c.chain = Some(chain(8, 0.1, false));
            c.channel = Some(ChannelConfig { squeezing: 1.0 });
        }
        ScenarioKind::Falloff => {
            c.chain = Some(chain(128, 0.1, true));
            c.falloff = Some(FalloffConfig { distances: (1..=32).collect() });
        }
        ScenarioKind::Calibrate => {
            c.bath = Some(BathConfig { q_factor: Some(1e3), ..BathConfig::default() });
        }
    }
    c
}

fn load(cli: &Cli, kind: ScenarioKind) -> Result<ScenarioConfig> {
    let mut config = match &cli.config {
        Some(path) => io::load_config(path)?,
        None => default_config(kind),
    };
    if config.kind != kind {
        return Err(Error::Config {
            path: "kind".into(),
            message: format!("config describes `{}` but the subcommand runs `{}`", config.kind.label(), kind.label()),
        });
    }
    if let Some(dt) = cli.dt {
        config.time.dt_sample = Some(dt);
    }
    if let Some(t) = cli.t_end {
        config.time.t_end = Some(t);
    }
    if let Some(b) = cli.log_base {
        config.output.log_base = b;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.display().to_string();
    }
    config.validate()?;
    Ok(config)
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    config: &'a ScenarioConfig,
    config_hash: &'a str,
    tolerances: Tolerances,
    wall_clock_seconds: f64,
    result: T,
}

#[derive(Serialize)]
struct SeriesSummary<'a> {
    log_base: LogBase,
    onset: Option<f64>,
    peak: f64,
    peak_time: f64,
    peak_log2: f64,
    peak_ln: f64,
    samples: usize,
    calibration: Option<&'a nems_chain::decoherence::Calibration>,
    dimensionless: Option<&'a nems_chain::units::Dimensionless>,
}

struct Run {
    dir: PathBuf,
    manifest: RunManifest,
    files: Vec<String>,
    started: Instant,
}

impl Run {
    fn begin(config: &ScenarioConfig) -> Result<Run> {
        let manifest = RunManifest::start(config)?;
        let dir = io::create_run_dir(Path::new(&config.output.dir), &manifest.config_hash)?;
        let mut run = Run { dir, manifest, files: Vec::new(), started: Instant::now() };
        let text = io::to_toml(config)?;
        run.write("config.toml", |p| io::write_atomic(p, text.as_bytes()))?;
        Ok(run)
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        f(&self.dir.join(name))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn summary<T: Serialize>(&mut self, config: &ScenarioConfig, result: T) -> Result<()> {
        let hash = self.manifest.config_hash.clone();
        let summary = Summary {
            config,
            config_hash: &hash,
            tolerances: Tolerances::default(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            result,
        };
        self.write("summary.json", |p| io::write_json(&summary, p))
    }

    fn finish(mut self) -> Result<PathBuf> {
        let mut files = std::mem::take(&mut self.files);
        files.push("manifest.json".into());
        self.manifest.finish(files);
        io::write_json(&self.manifest, &self.dir.join("manifest.json"))?;
        Ok(self.dir)
    }
}

fn series_summary(r: &ScenarioResult) -> SeriesSummary<'_> {
    let bits = r.peak_bits();
    SeriesSummary {
        log_base: r.log_base,
        onset: r.onset,
        peak: r.peak,
        peak_time: r.peak_time,
        peak_log2: bits,
        peak_ln: bits * std::f64::consts::LN_2,
        samples: r.samples.len(),
        calibration: r.calibration.as_ref(),
        dimensionless: r.dimensionless.as_ref(),
    }
}

fn cache_for(config: &ScenarioConfig) -> CalibrationCache {
    CalibrationCache::new(Path::new(&config.output.dir).join("calibration_cache.toml"))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

fn run_series(config: &ScenarioConfig, result: ScenarioResult) -> Result<()> {
    let mut run = Run::begin(config)?;
    run.write("series.csv", |p| io::write_series(&result.samples, p))?;
    run.summary(config, series_summary(&result))?;
    let base = result.log_base.label();
    if let Some(d) = &result.dimensionless {
        println!("k_B T / h f = {:.6}", d.temperature);
    }
    if let Some(c) = &result.calibration {
        println!("zeta = {:.6e} (fitted rate {:.6e}, Q = {})", c.zeta, c.fitted_rate, c.q_factor);
    }
    println!("onset t0 = {}", fmt_opt(result.onset));
    println!("peak E_N = {:.6} (log base {base}) at t = {:.3}", result.peak, result.peak_time);
    println!("{}", run.finish()?.display());
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let Some(kind) = cli.command.kind() else {
        return validate(cli);
    };
    let config = load(cli, kind)?;
    match kind {
        ScenarioKind::Quench => run_series(&config, experiments::run_quench(&config)?),
        ScenarioKind::Decohere => {
            let cache = cache_for(&config);
            run_series(&config, experiments::run_decohere(&config, Some(&cache))?)
        }
        ScenarioKind::RampScan => {
            let result = experiments::run_ramp_scan(&config)?;
            let mut run = Run::begin(&config)?;
            let rows: Vec<Vec<Option<f64>>> = result
                .points
                .iter()
                .map(|p| {
                    vec![Some(p.duration), p.first_peak, p.first_peak_time, p.onset, Some(p.peak), Some(p.peak_time)]
                })
                .collect();
            run.write("scan.csv", |p| {
                io::write_table(p, &["duration", "first_peak", "first_peak_time", "onset", "peak", "peak_time"], &rows)
            })?;
            for p in &result.points {
                println!("t' = {:>6.2}  first maximum {}", p.duration, fmt_opt(p.first_peak));
            }
            run.summary(&config, &result.points)?;
            println!("{}", run.finish()?.display());
            Ok(())
        }
        ScenarioKind::Channel => {
            let result = experiments::run_channel(&config)?;
            let mut run = Run::begin(&config)?;
            let rows: Vec<Vec<Option<f64>>> = result
                .arrivals
                .iter()
                .map(|a| vec![Some(a.site as f64), a.arrival, Some(a.peak), Some(a.peak_time)])
                .collect();
            run.write("arrivals.csv", |p| io::write_table(p, &["site", "arrival", "peak", "peak_time"], &rows))?;
            for a in &result.arrivals {
                println!("site {:>3}  arrival {}", a.site, fmt_opt(a.arrival));
            }
            if let Some(f) = result.fit {
                println!("arrival fit: slope {:.4}, R^2 {:.4}", f.slope, f.r_squared);
            }
            run.summary(&config, (&result.arrivals, result.fit))?;
            println!("{}", run.finish()?.display());
            Ok(())
        }
        ScenarioKind::Falloff => {
            let result = experiments::falloff_scan(&config)?;
            let mut run = Run::begin(&config)?;
            let rows: Vec<Vec<Option<f64>>> = result
                .rows
                .iter()
                .map(|r| vec![Some(r.distance as f64), r.onset, Some(r.peak), Some(r.peak_time)])
                .collect();
            run.write("falloff.csv", |p| io::write_table(p, &["distance", "onset", "peak", "peak_time"], &rows))?;
            if let Some(f) = result.onset_fit {
                println!("onset fit (n = 2..8): slope {:.4}, R^2 {:.4}", f.slope, f.r_squared);
            }
            if let Some(f) = result.slope_fit {
                println!("log-log falloff slope (n = 4..32): {:.4}", f.slope);
            }
            run.summary(&config, (&result.rows, result.onset_fit, result.slope_fit))?;
            println!("{}", run.finish()?.display());
            Ok(())
        }
        ScenarioKind::Calibrate => {
            let cal = experiments::run_calibrate(&config, Some(&cache_for(&config)))?;
            let mut run = Run::begin(&config)?;
            run.summary(&config, cal)?;
            println!("zeta = {:.6e}  fitted rate {:.6e}  target {:.6e}", cal.zeta, cal.fitted_rate, 1.0 / cal.q_factor);
            println!("{}", run.finish()?.display());
            Ok(())
        }
    }
}

fn validate(cli: &Cli) -> Result<()> {
    if let Some(path) = &cli.config {
        let config = io::load_config(path)?;
        println!("config ok: {} ({})", path.display(), config.kind.label());
    }
    let checks = experiments::validate_suite()?;
    let mut failed = 0;
    for c in &checks {
        println!("{} {:<42} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(Error::Validity(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
