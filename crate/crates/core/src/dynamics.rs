// SPDX-License-Identifier: Apache-2.0

//! Time evolution of covariance matrices under quadratic Hamiltonians.
//!
//! Three routes are provided:
//! * exact propagators built from one eigendecomposition of `V`,
//! * the circulant `f`/`g` convolution sums for periodic chains,
//! * classical RK4 on `dΓ/dt = AΓ + ΓAᵀ` while the coupling is being ramped.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{check_sites, CovarianceMatrix};
use crate::lattice::{build_potential, Boundary, ChainSpec, PotentialMatrix};
use crate::linalg::{congruence_blockdiag, max_abs, symmetrize_mut, symplectic_form, SymmetricSpectrum, EIGEN_FLOOR};

/// Tolerance on the relative purity drift accepted during RK4 integration.
pub const PURITY_DRIFT_TOL: f64 = 1e-6;

/// Default RK4 step in units of the inverse bare frequency.
pub const DEFAULT_DT: f64 = 1e-3;

/// Normal-mode decomposition `V = U diag(ω²) Uᵀ`, shared by every propagator of `V`.
#[derive(Debug, Clone)]
pub struct NormalModes {
    spectrum: SymmetricSpectrum,
    freqs: Vec<f64>,
}

impl NormalModes {
    pub fn new(v: &PotentialMatrix) -> Result<Self> {
        let spectrum = SymmetricSpectrum::new(v.matrix());
        let min = spectrum.min_value();
        if min <= EIGEN_FLOOR {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        let freqs = spectrum.values.iter().map(|l| l.sqrt()).collect();
        Ok(Self { spectrum, freqs })
    }

    pub fn dim(&self) -> usize {
        self.freqs.len()
    }

    /// Angular frequencies `ω_k`, ascending.
    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.spectrum.vectors
    }

    pub fn spectrum(&self) -> &SymmetricSpectrum {
        &self.spectrum
    }

    pub fn propagator(&self, t: f64) -> Propagator {
        let n = self.dim();
        let u = &self.spectrum.vectors;
        let block = |f: &dyn Fn(f64) -> f64| {
            let mut scaled = u.clone();
            for (j, &w) in self.freqs.iter().enumerate() {
                scaled.column_mut(j).scale_mut(f(w));
            }
            &scaled * u.transpose()
        };
        let cos = block(&|w| (w * t).cos());
        let sin_over = block(&|w| (w * t).sin() / w);
        let sin_times = block(&|w| -(w * t).sin() * w);
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        s.view_mut((0, 0), (n, n)).copy_from(&cos);
        s.view_mut((0, n), (n, n)).copy_from(&sin_over);
        s.view_mut((n, 0), (n, n)).copy_from(&sin_times);
        s.view_mut((n, n), (n, n)).copy_from(&cos);
        Propagator(s)
    }

    /// `Γ` expressed in the normal-mode basis, `diag(Uᵀ, Uᵀ) Γ diag(U, U)`.
    pub fn to_modal(&self, gamma: &CovarianceMatrix) -> Result<DMatrix<f64>> {
        if gamma.n_modes() != self.dim() {
            return Err(Error::DimensionMismatch { expected: 2 * self.dim(), actual: gamma.matrix().nrows() });
        }
        Ok(congruence_blockdiag(&self.spectrum.vectors.transpose(), gamma.matrix()))
    }
}

/// Symplectic matrix `S(t)` acting on (q…, p…).
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator(DMatrix<f64>);

impl Propagator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn then(&self, later: &Propagator) -> Propagator {
        Propagator(&later.0 * &self.0)
    }

    /// `‖SσSᵀ − σ‖_max`.
    pub fn symplectic_defect(&self) -> f64 {
        let n = self.0.nrows() / 2;
        let sigma = symplectic_form(n);
        (&self.0 * &sigma * self.0.transpose() - sigma).amax()
    }
}

/// `S(t)` for the time-independent potential `V`.
pub fn propagator(v: &PotentialMatrix, t: f64) -> Result<Propagator> {
    Ok(NormalModes::new(v)?.propagator(t))
}

/// `S Γ₀ Sᵀ`.
pub fn evolve(gamma0: &CovarianceMatrix, s: &Propagator) -> Result<CovarianceMatrix> {
    let dim = s.0.nrows();
    if gamma0.matrix().nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: gamma0.matrix().nrows() });
    }
    let m = &s.0 * gamma0.matrix() * s.0.transpose();
    Ok(CovarianceMatrix::from_symmetric(m))
}

fn require_periodic(spec: &ChainSpec, what: &'static str) -> Result<()> {
    spec.validate()?;
    if spec.boundary != Boundary::Periodic {
        return Err(Error::UnsupportedBoundary(what));
    }
    Ok(())
}

struct Circulant {
    f: Vec<f64>,
    g: Vec<f64>,
    /// ∂ₜf
    h: Vec<f64>,
}

fn circulant_kernels(spec: &ChainSpec, t: f64) -> Circulant {
    let n = spec.n_sites;
    let nf = n as f64;
    let c = spec.coupling;
    let omega: Vec<f64> = (1..=n)
        .map(|l| {
            let s = (PI * l as f64 / nf).sin();
            (1.0 + 4.0 * c * s * s).sqrt()
        })
        .collect();
    let mut out = Circulant { f: vec![0.0; n], g: vec![0.0; n], h: vec![0.0; n] };
    for k in 0..n {
        for (idx, &w) in omega.iter().enumerate() {
            let l = idx + 1;
            // cos(2πkl/N); the sine parts cancel between l and N − l.
            let phase = (2.0 * PI * ((k * l) % n) as f64 / nf).cos();
            let (s, co) = (w * t).sin_cos();
            out.f[k] += phase * co / nf;
            out.g[k] += phase * s / (nf * w);
            out.h[k] -= phase * w * s / nf;
        }
    }
    out
}

/// Displacement response `f_k(t)` and momentum response `g_k(t)` of a periodic chain.
///
/// `q_k(t) = Σ_r q_r(0) f_{r−k}(t) + p_r(0) g_{r−k}(t)` with `f = ∂ₜg`.
pub fn fg_functions(spec: &ChainSpec, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    require_periodic(spec, "f/g propagation functions")?;
    let k = circulant_kernels(spec, t);
    Ok((k.f, k.g))
}

/// Covariance matrix at time `t` after a sudden switch from the uncoupled
/// vacuum, assembled from the circulant convolution sums.
///
/// With `Γ(0) = I`:
/// `Γ_qq = Σ_r f f + g g`, `Γ_qp = Σ_r f ∂ₜf + g f`, `Γ_pp = Σ_r ∂ₜf ∂ₜf + f f`,
/// all evaluated at index offsets `r − n`, `r − m`.
pub fn fg_covariance(spec: &ChainSpec, t: f64) -> Result<CovarianceMatrix> {
    require_periodic(spec, "f/g covariance")?;
    let n = spec.n_sites;
    let Circulant { f, g, h } = circulant_kernels(spec, t);
    let at = |v: &[f64], r: usize, s: usize| v[(r + n - s) % n];
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            let (mut qq, mut qp, mut pp) = (0.0, 0.0, 0.0);
            for r in 0..n {
                qq += at(&f, r, a) * at(&f, r, b) + at(&g, r, a) * at(&g, r, b);
                qp += at(&f, r, a) * at(&h, r, b) + at(&g, r, a) * at(&f, r, b);
                pp += at(&h, r, a) * at(&h, r, b) + at(&f, r, a) * at(&f, r, b);
            }
            m[(a, b)] = qq;
            m[(a, n + b)] = qp;
            m[(n + b, a)] = qp;
            m[(n + a, n + b)] = pp;
        }
    }
    Ok(CovarianceMatrix::from_symmetric(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampKind {
    Sudden,
    Linear,
}

/// Coupling `c(t) = c · min(t/t′, 1)`, or a step at `t = 0` when sudden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSchedule {
    kind: RampKind,
    duration: f64,
    target_coupling: f64,
}

impl RampSchedule {
    pub fn sudden(target_coupling: f64) -> Result<Self> {
        Self::new(RampKind::Sudden, 0.0, target_coupling)
    }

    /// Linear ramp over `[0, duration]`; a zero duration is the sudden switch.
    pub fn linear(duration: f64, target_coupling: f64) -> Result<Self> {
        if duration == 0.0 {
            return Self::sudden(target_coupling);
        }
        Self::new(RampKind::Linear, duration, target_coupling)
    }

    pub fn new(kind: RampKind, duration: f64, target_coupling: f64) -> Result<Self> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::param("ramp.duration", format!("must be finite and >= 0, got {duration}")));
        }
        if (kind == RampKind::Sudden) != (duration == 0.0) {
            return Err(Error::param("ramp.duration", "sudden switching needs duration 0 and vice versa"));
        }
        if !(target_coupling >= 0.0 && target_coupling.is_finite()) {
            return Err(Error::param("coupling", format!("must be finite and >= 0, got {target_coupling}")));
        }
        Ok(Self { kind, duration, target_coupling })
    }

    pub fn kind(&self) -> RampKind {
        self.kind
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn target_coupling(&self) -> f64 {
        self.target_coupling
    }

    pub fn coupling_at(&self, t: f64) -> f64 {
        match self.kind {
            RampKind::Sudden => self.target_coupling,
            RampKind::Linear => self.target_coupling * (t / self.duration).min(1.0),
        }
    }
}

/// Uniform sampling grid `t_j = j·dt_sample`, `0 ≤ t_j ≤ t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_end: f64,
    pub dt_sample: f64,
}

impl TimeGrid {
    pub fn new(t_end: f64, dt_sample: f64) -> Result<Self> {
        let grid = Self { t_end, dt_sample };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("time.t_end", format!("must be finite and > 0, got {}", self.t_end)));
        }
        if !(self.dt_sample > 0.0 && self.dt_sample <= self.t_end) {
            return Err(Error::param("time.dt_sample", format!("must lie in (0, t_end], got {}", self.dt_sample)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (self.t_end / self.dt_sample + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| j as f64 * self.dt_sample).collect()
    }
}

/// Sampled covariance matrices.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CovarianceMatrix>,
}

/// Gaussian purity `1/√det Γ` in this convention.
fn purity(m: &DMatrix<f64>) -> f64 {
    1.0 / m.determinant().sqrt()
}

fn rk4_rhs(gamma: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let n = v.nrows();
    let mut ag = DMatrix::zeros(2 * n, 2 * n);
    // A = [[0, I], [−V, 0]]: top rows of AΓ are Γ's bottom rows, bottom rows are −V·(top rows).
    ag.rows_mut(0, n).copy_from(&gamma.rows(n, n));
    let lower = -(v * gamma.rows(0, n));
    ag.rows_mut(n, n).copy_from(&lower);
    let t = ag.transpose();
    ag + t
}

/// Evolves `gamma0` through the coupling ramp with RK4 steps of at most `dt`,
/// then exactly under the final constant potential.
///
/// Samples are taken on `grid`; each is symmetrized and must stay within
/// [`PURITY_DRIFT_TOL`] of the initial purity.
pub fn evolve_ramp(
    gamma0: &CovarianceMatrix,
    spec: &ChainSpec,
    schedule: &RampSchedule,
    dt: f64,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    spec.validate()?;
    grid.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be finite and > 0, got {dt}")));
    }
    if grid.t_end < schedule.duration() {
        return Err(Error::param("time.t_end", "must not precede the end of the ramp"));
    }
    let n = spec.n_sites;
    if gamma0.n_modes() != n {
        return Err(Error::DimensionMismatch { expected: 2 * n, actual: gamma0.matrix().nrows() });
    }
    let c = schedule.target_coupling();
    let v_final = build_potential(spec, c)?;
    let modes = NormalModes::new(&v_final)?;
    let times = grid.times();
    let purity0 = purity(gamma0.matrix());
    let check = |m: &DMatrix<f64>, t: f64| -> Result<()> {
        let drift = (purity(m) / purity0 - 1.0).abs();
        if !(drift <= PURITY_DRIFT_TOL) {
            return Err(Error::StepRejected { drift, tolerance: PURITY_DRIFT_TOL, time: t, dt });
        }
        Ok(())
    };

    let t_ramp = schedule.duration();
    let mut states = Vec::with_capacity(times.len());
    let mut gamma = gamma0.matrix().clone();
    let mut t = 0.0;
    let mut next = 0;

    if schedule.kind() == RampKind::Linear {
        let v0 = build_potential(spec, 0.0)?.into_matrix();
        let v1 = build_potential(spec, 1.0)?.into_matrix();
        let slope = &v1 - &v0;
        let v_at = |s: f64| &v0 + &slope * schedule.coupling_at(s);
        let mut targets: Vec<f64> = times.iter().copied().filter(|&s| s < t_ramp).collect();
        targets.push(t_ramp);
        for target in targets {
            let span = target - t;
            if span > 0.0 {
                let steps = (span / dt).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                for i in 0..steps {
                    let s = t + i as f64 * h;
                    let (va, vm, vb) = (v_at(s), v_at(s + 0.5 * h), v_at(s + h));
                    let k1 = rk4_rhs(&gamma, &va);
                    let k2 = rk4_rhs(&(&gamma + &k1 * (0.5 * h)), &vm);
                    let k3 = rk4_rhs(&(&gamma + &k2 * (0.5 * h)), &vm);
                    let k4 = rk4_rhs(&(&gamma + &k3 * h), &vb);
                    gamma += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                }
                symmetrize_mut(&mut gamma);
                t = target;
            }
            check(&gamma, t)?;
            if next < times.len() && times[next] < t_ramp && times[next] == target {
                states.push(CovarianceMatrix::from_symmetric(gamma.clone()));
                next += 1;
            }
        }
    }

    let start = CovarianceMatrix::from_symmetric(gamma);
    for &s in &times[next..] {
        let state = evolve(&start, &modes.propagator(s - t))?;
        check(state.matrix(), s)?;
        states.push(state);
    }
    Ok(Trajectory { times, states })
}

/// Reduced covariance matrices of a few tracked sites, evaluated without
/// forming the full propagator.
///
/// With the state held in the normal-mode basis, the tracked rows of `S(t)`
/// cost `O(kn)` and each sample `O(kn²)`; when the initial state has no
/// correlations between distinct normal modes this drops to `O(k²n)`.
#[derive(Debug, Clone)]
pub struct TrackedMoments {
    modes: Arc<NormalModes>,
    sites: Vec<usize>,
    /// Upper triangle of the modal-basis `Γ̃`, packed column by column.
    packed: Vec<f64>,
    /// Per-mode (qq, qp, pp) blocks when `modal` is mode-local.
    local_blocks: Option<Vec<[f64; 3]>>,
}

/// Off-mode correlations below this fraction of `max|Γ̃|` are treated as zero.
const MODE_LOCAL_TOL: f64 = 1e-13;

impl TrackedMoments {
    pub fn new(v: &PotentialMatrix, gamma0: &CovarianceMatrix, sites: &[usize]) -> Result<Self> {
        Self::with_modes(Arc::new(NormalModes::new(v)?), gamma0, sites)
    }

    pub fn with_modes(modes: Arc<NormalModes>, gamma0: &CovarianceMatrix, sites: &[usize]) -> Result<Self> {
        let n = modes.dim();
        check_sites(sites, n)?;
        let modal = modes.to_modal(gamma0)?;
        let scale = max_abs(&modal);
        let mut off: f64 = 0.0;
        for i in 0..2 * n {
            for j in 0..2 * n {
                if i % n != j % n {
                    off = off.max(modal[(i, j)].abs());
                }
            }
        }
        let local_blocks = (off <= MODE_LOCAL_TOL * scale)
            .then(|| (0..n).map(|k| [modal[(k, k)], modal[(k, n + k)], modal[(n + k, n + k)]]).collect());
        let packed = (0..2 * n).flat_map(|j| (0..=j).map(move |i| (i, j))).map(|(i, j)| modal[(i, j)]).collect();
        Ok(Self { modes, sites: sites.to_vec(), packed, local_blocks })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn modes(&self) -> &Arc<NormalModes> {
        &self.modes
    }

    /// Reduced `2k × 2k` covariance matrix of the tracked sites at time `t`.
    pub fn at(&self, t: f64) -> CovarianceMatrix {
        match &self.local_blocks {
            Some(blocks) => self.at_mode_local(blocks, t),
            None => self.at_general(t),
        }
    }

    fn at_general(&self, t: f64) -> CovarianceMatrix {
        let n = self.modes.dim();
        let k = self.sites.len();
        let kk = 2 * k;
        let u = self.modes.basis();
        let w = self.modes.frequencies();
        // Tracked rows of S(t) in the modal basis, stored column by column:
        // r[i * kk + a] is row a, modal coordinate i.
        let mut r = vec![0.0; 2 * n * kk];
        for (m, &wm) in w.iter().enumerate() {
            let (s, c) = (wm * t).sin_cos();
            for (a, &site) in self.sites.iter().enumerate() {
                let um = u[(site, m)];
                r[m * kk + a] = um * c;
                r[(n + m) * kk + a] = um * s / wm;
                r[m * kk + k + a] = -um * wm * s;
                r[(n + m) * kk + k + a] = um * c;
            }
        }
        let out = match kk {
            4 => packed_congruence_fixed::<4>(&self.packed, &r),
            _ => packed_congruence(&self.packed, &r, kk),
        };
        CovarianceMatrix::from_symmetric(out)
    }

    fn at_mode_local(&self, blocks: &[[f64; 3]], t: f64) -> CovarianceMatrix {
        let k = self.sites.len();
        let u = self.modes.basis();
        let w = self.modes.frequencies();
        // Evolved per-mode blocks D_m G_m D_mᵀ.
        let evolved: Vec<[f64; 3]> = blocks
            .iter()
            .zip(w)
            .map(|(&[a, b, d], &wm)| {
                let (s, c) = (wm * t).sin_cos();
                let (d00, d01, d10, d11) = (c, s / wm, -wm * s, c);
                let qq = d00 * d00 * a + 2.0 * d00 * d01 * b + d01 * d01 * d;
                let qp = d00 * d10 * a + (d00 * d11 + d01 * d10) * b + d01 * d11 * d;
                let pp = d10 * d10 * a + 2.0 * d10 * d11 * b + d11 * d11 * d;
                [qq, qp, pp]
            })
            .collect();
        let mut out = DMatrix::zeros(2 * k, 2 * k);
        for (i, &si) in self.sites.iter().enumerate() {
            for (j, &sj) in self.sites.iter().enumerate() {
                let (mut qq, mut qp, mut pp) = (0.0, 0.0, 0.0);
                for (m, e) in evolved.iter().enumerate() {
                    let uu = u[(si, m)] * u[(sj, m)];
                    qq += uu * e[0];
                    qp += uu * e[1];
                    pp += uu * e[2];
                }
                out[(i, j)] = qq;
                out[(i, k + j)] = qp;
                out[(k + i, k + j)] = pp;
            }
        }
        for i in 0..k {
            for j in 0..k {
                out[(k + j, i)] = out[(i, k + j)];
            }
        }
        CovarianceMatrix::from_symmetric(out)
    }
}

/// `R Γ̃ Rᵀ` from the packed upper triangle of `Γ̃`, one pass over `Γ̃`.
/// `r` holds the `kk` rows of `R` interleaved per column.
fn packed_congruence(packed: &[f64], r: &[f64], kk: usize) -> DMatrix<f64> {
    let dim = r.len() / kk;
    let mut out = DMatrix::zeros(kk, kk);
    let mut acc = vec![0.0; kk];
    let mut offset = 0;
    for j in 0..dim {
        let col = &packed[offset..offset + j + 1];
        offset += j + 1;
        acc.iter_mut().for_each(|v| *v = 0.0);
        for (i, &g) in col[..j].iter().enumerate() {
            for (dst, &ri) in acc.iter_mut().zip(&r[i * kk..(i + 1) * kk]) {
                *dst += ri * g;
            }
        }
        let rj = &r[j * kk..(j + 1) * kk];
        let d = col[j];
        for a in 0..kk {
            for b in 0..kk {
                out[(a, b)] += acc[a] * rj[b] + rj[a] * acc[b] + rj[a] * rj[b] * d;
            }
        }
    }
    out
}

fn packed_congruence_fixed<const KK: usize>(packed: &[f64], r: &[f64]) -> DMatrix<f64> {
    let dim = r.len() / KK;
    let rows: &[[f64; KK]] = &r.chunks_exact(KK).map(|c| <[f64; KK]>::try_from(c).unwrap()).collect::<Vec<_>>();
    let mut out = [[0.0; KK]; KK];
    let mut offset = 0;
    for j in 0..dim {
        let col = &packed[offset..offset + j + 1];
        offset += j + 1;
        let mut acc = [0.0; KK];
        for (ri, &g) in rows[..j].iter().zip(&col[..j]) {
            for a in 0..KK {
                acc[a] += ri[a] * g;
            }
        }
        let rj = rows[j];
        let d = col[j];
        for a in 0..KK {
            for b in 0..KK {
                out[a][b] += acc[a] * rj[b] + rj[a] * acc[b] + rj[a] * rj[b] * d;
            }
        }
    }
    DMatrix::from_fn(KK, KK, |a, b| out[a][b])
}

/// Reduced states of `sites` at each of `times`.
pub fn tracked_moments(
    v: &PotentialMatrix,
    gamma0: &CovarianceMatrix,
    sites: &[usize],
    times: &[f64],
) -> Result<Vec<CovarianceMatrix>> {
    let tracker = TrackedMoments::new(v, gamma0, sites)?;
    Ok(times.iter().map(|&t| tracker.at(t)).collect())
}
