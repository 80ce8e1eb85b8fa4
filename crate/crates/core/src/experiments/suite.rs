// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use crate::dynamics::{evolve, fg_covariance, NormalModes};
use crate::entanglement::{epr_witness_bound, log_negativity, symplectic_eigenvalues, LogBase, Partition};
use crate::error::Result;
use crate::gaussian::{gibbs_state, two_mode_squeezed, vacuum, VALIDITY_TOL};
use crate::lattice::{build_potential, Boundary, ChainSpec};
use crate::linalg::max_abs;

use super::{run_quench, ScenarioConfig, ScenarioKind, TimeConfig, TrackedConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Fast invariant checks over the closed dynamics and the entanglement measures.
pub fn validate_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let mut fg_err: f64 = 0.0;
    let mut defect: f64 = 0.0;
    for c in [0.1, 0.2, 0.3] {
        let spec = ChainSpec::periodic(8, c)?;
        let modes = NormalModes::new(&build_potential(&spec, c)?)?;
        for t in [0.5, 1.0, 5.0, 20.0] {
            let s = modes.propagator(t);
            defect = defect.max(s.symplectic_defect());
            let spectral = evolve(&vacuum(8), &s)?;
            fg_err = fg_err.max(max_abs(&(fg_covariance(&spec, t)?.matrix() - spectral.matrix())));
        }
    }
    out.push(check("fg_matches_spectral", fg_err <= 1e-10, format!("max deviation {fg_err:.3e}")));

    let spec = ChainSpec::new(8, 0.3, Boundary::Open)?;
    let modes = NormalModes::new(&build_potential(&spec, 0.3)?)?;
    let mut drift: f64 = 0.0;
    for step in 0..=20 {
        let s = modes.propagator(5.0 * step as f64);
        defect = defect.max(s.symplectic_defect());
        let nu = symplectic_eigenvalues(&evolve(&vacuum(8), &s)?)?;
        drift = drift.max(nu.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max));
    }
    out.push(check("propagators_symplectic", defect <= 1e-10, format!("max defect {defect:.3e}")));
    out.push(check("closed_purity", drift <= 1e-8, format!("max |nu - 1| {drift:.3e} up to t = 100")));

    let spec = ChainSpec::periodic(16, 0.5)?;
    let ground = gibbs_state(&build_potential(&spec, 0.5)?, 0.0)?;
    let mut worst: f64 = 0.0;
    for d in 2..=8 {
        worst = worst.max(log_negativity(&ground.reduce(&[0, d])?, &Partition::first_of_two())?);
    }
    out.push(check("ground_state_separable_beyond_neighbours", worst == 0.0, format!("max E_N {worst:e}")));

    let tms = two_mode_squeezed(1.0)?;
    let gap = (epr_witness_bound(&tms, 0, 1)? - log_negativity(&tms, &Partition::first_of_two())?).abs();
    out.push(check("witness_tight_on_squeezed_pair", gap <= 1e-9, format!("gap {gap:.3e}")));

    let mut cfg = ScenarioConfig::new(ScenarioKind::Quench);
    cfg.chain = Some(ChainSpec::periodic(8, 0.3)?);
    cfg.tracked = Some(TrackedConfig { sites: [1, 5] });
    cfg.time = TimeConfig { t_end: Some(40.0), ..TimeConfig::default() };
    cfg.output.log_base = LogBase::Two;
    let result = run_quench(&cfg)?;
    let margin = result.samples.iter().map(|s| s.validity_margin).fold(f64::INFINITY, f64::min);
    let excess = result.samples.iter().map(|s| s.witness - s.e_n).fold(f64::NEG_INFINITY, f64::max);
    out.push(check("quench_samples_physical", margin >= -VALIDITY_TOL, format!("min validity margin {margin:.3e}")));
    out.push(check("witness_below_negativity", excess <= 1e-9, format!("max witness - E_N {excess:.3e}")));
    Ok(out)
}
