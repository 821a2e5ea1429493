//! Blowup-time extraction: the trial blowup time `T` enters the similarity
//! data through the rescaling `(T v0(T .), T^2 v1(T .))`, and the component of
//! the evolved perturbation along the growing gauge mode changes sign as `T`
//! crosses the true blowup time.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::evolver::{Evolver, EvolverConfig, LightconeDiagnostics, Mode};
use crate::grid::{make_grid, RadialGrid};
use crate::profiles::ProfileParams;
use crate::simvars::{initial_data_u, PhysicalPair, TailModel};

use super::config::ExperimentConfig;

/// Light-cone sup-norm at which a trial evolution is stopped; its sign
/// information is kept.
pub const SATURATION: f64 = 0.5;

/// Step tolerance of the coarse stage when a refining stage follows.
pub const COARSE_TOLERANCE: f64 = 1e-10;

/// One evaluation of `D(T)`, the gauge projection after evolving to `tau_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DSample {
    pub t: f64,
    pub d: f64,
    /// The evolution hit [`SATURATION`] before `tau_f`.
    pub saturated: bool,
    pub stage: usize,
    pub tau_f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub t: f64,
    /// Width of the final bracket.
    pub width: f64,
    pub trace: Vec<DSample>,
}

impl Extraction {
    pub fn trace_pairs(&self) -> Vec<(f64, f64)> {
        self.trace.iter().map(|s| (s.t, s.d)).collect()
    }
}

struct Probe<'a> {
    p: &'a PhysicalPair,
    grid: Arc<RadialGrid>,
    params: ProfileParams,
    tail: TailModel,
    evolver: Evolver,
    diag: LightconeDiagnostics,
    mode: Mode,
    cfl: f64,
    trace: Vec<DSample>,
}

impl Probe<'_> {
    fn eval(&mut self, t: f64, tau_f: f64, stage: usize) -> Result<DSample> {
        let s0 = initial_data_u(self.p, t, &self.grid, &self.params, &self.tail)?;
        let mut cfg = EvolverConfig::for_grid(&self.grid, tau_f, self.mode, self.cfl, tau_f)?;
        cfg.stop_above = Some(SATURATION);
        let traj = match self.evolver.evolve(&s0, &cfg, &self.diag) {
            Ok(traj) => traj,
            Err(LabError::Divergence { step, tau }) => {
                return Err(LabError::Extraction {
                    reason: format!("trial evolution at T = {t} diverged at step {step} (tau = {tau})"),
                    trace: self.pairs(),
                })
            }
            Err(e) => return Err(e),
        };
        let last = traj.diagnostics.last().expect("trajectory has at least one record");
        let sample = DSample { t, d: last.gauge_proj, saturated: traj.saturated, stage, tau_f };
        self.trace.push(sample);
        Ok(sample)
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        self.trace.iter().map(|s| (s.t, s.d)).collect()
    }

    /// Secant iteration on the latest two unsaturated samples, kept inside
    /// the sign-change bracket; falls back to regula falsi or bisection when
    /// the secant step leaves the bracket or samples are saturated. Stops
    /// once a step is below `tol` or the bracket is narrower than `tol`.
    fn solve(&mut self, lo: DSample, hi: DSample, tau_f: f64, stage: usize, tol: f64, max_iter: usize) -> Result<(f64, f64)> {
        let (mut a, mut b) = (lo, hi);
        for s in [a, b] {
            if s.d == 0.0 {
                return Ok((s.t, 0.0));
            }
        }
        if a.d.signum() == b.d.signum() {
            return Err(LabError::Extraction {
                reason: format!("no sign change of D on [{}, {}] at tau_f = {tau_f}", a.t, b.t),
                trace: self.pairs(),
            });
        }
        let mut recent: Vec<DSample> = [a, b].into_iter().filter(|s| !s.saturated).collect();
        let mut best: Option<(f64, f64)> = None;
        for _ in 0..max_iter {
            if b.t - a.t <= tol {
                break;
            }
            let inside = |c: f64| c > a.t && c < b.t;
            let secant = |p: &DSample, q: &DSample| {
                (p.d != q.d).then(|| q.t - q.d * (q.t - p.t) / (q.d - p.d)).filter(|c| c.is_finite())
            };
            let c = match recent.as_slice() {
                [.., p, q] => secant(p, q).filter(|&c| inside(c)),
                _ => None,
            }
            .or_else(|| (!a.saturated && !b.saturated).then(|| secant(&a, &b)).flatten().filter(|&c| inside(c)))
            .unwrap_or(0.5 * (a.t + b.t));
            if let Some(q) = recent.last() {
                if (c - q.t).abs() <= tol {
                    return Ok((q.t, (c - q.t).abs()));
                }
            }
            let s = self.eval(c, tau_f, stage)?;
            if s.d == 0.0 {
                return Ok((c, 0.0));
            }
            if !s.saturated {
                if let Some(q) = recent.last() {
                    best = Some((c, (c - q.t).abs()));
                }
                recent.push(s);
            }
            if s.d.signum() == a.d.signum() {
                a = s;
            } else {
                b = s;
            }
        }
        let width = b.t - a.t;
        Ok(match best {
            Some((c, step)) => (c, step.min(width)),
            None => (0.5 * (a.t + b.t), width),
        })
    }
}

/// Physical grid that covers `r <= T rho_max` for every admissible trial `T`,
/// with the similarity grid's spacing.
pub fn physical_grid_for(grid: &RadialGrid) -> Result<Arc<RadialGrid>> {
    let factor = super::config::BRACKET_LIMITS.1;
    grid.extended((factor * grid.cells() as f64).ceil() as usize)
}

/// Blowup time of the physical data `p`: a coarse root of `D(T)` at
/// `tau_f`, then, if `tau_f_refine > 0`, a refinement at the longer horizon
/// on a small bracket around it.
pub fn extract_blowup_time(p: &PhysicalPair, cfg: &ExperimentConfig) -> Result<Extraction> {
    cfg.validate()?;
    if cfg.mode == Mode::Free {
        return Err(LabError::Config("blowup-time extraction needs the linearized or nonlinear flow".into()));
    }
    if p.grid().n() != cfg.n() {
        return Err(LabError::Contract("physical data dimension differs from the configuration".into()));
    }
    let grid = make_grid(cfg.n(), cfg.r_max, cfg.cells)?;
    let params = ProfileParams::from_d(cfg.dim)?;
    let mut probe = Probe {
        p,
        evolver: Evolver::new(Arc::clone(&grid), params)?,
        diag: LightconeDiagnostics::new(&grid, &params, cfg.mode, None)?,
        grid,
        params,
        tail: TailModel::for_dimension(cfg.n()),
        mode: cfg.mode,
        cfl: cfg.cfl,
        trace: Vec::new(),
    };
    let (lo, hi) = cfg.bracket;
    let mut a = probe.eval(lo, cfg.tau_f, 1)?;
    let mut b = probe.eval(hi, cfg.tau_f, 1)?;
    if cfg.nominal_t > lo && cfg.nominal_t < hi {
        let m = probe.eval(cfg.nominal_t, cfg.tau_f, 1)?;
        if m.d == 0.0 {
            return Ok(Extraction { t: m.t, width: 0.0, trace: probe.trace });
        }
        if m.d.signum() == a.d.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    let coarse_tol = if cfg.tau_f_refine > 0.0 { cfg.extract_tol.max(COARSE_TOLERANCE) } else { cfg.extract_tol };
    let (mut t, mut width) = probe.solve(a, b, cfg.tau_f, 1, coarse_tol, cfg.extract_max_iter)?;

    if cfg.tau_f_refine > 0.0 {
        let mut half = 1e-6f64.max(10.0 * width);
        let mut bracket = None;
        for _ in 0..6 {
            let (l, r) = ((t - half).max(lo), (t + half).min(hi));
            let sl = probe.eval(l, cfg.tau_f_refine, 2)?;
            let sr = probe.eval(r, cfg.tau_f_refine, 2)?;
            if sl.d.signum() != sr.d.signum() || sl.d == 0.0 || sr.d == 0.0 {
                bracket = Some((sl, sr));
                break;
            }
            half *= 10.0;
        }
        let (sl, sr) = bracket.ok_or_else(|| LabError::Extraction {
            reason: format!("no sign change of D near T = {t} at tau_f = {}", cfg.tau_f_refine),
            trace: probe.pairs(),
        })?;
        (t, width) = probe.solve(sl, sr, cfg.tau_f_refine, 2, cfg.extract_tol, cfg.extract_max_iter)?;
    }
    if !t.is_finite() {
        return Err(LabError::Extraction { reason: "non-finite root".into(), trace: probe.pairs() });
    }
    Ok(Extraction { t, width, trace: probe.trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{phi, phi1};
    use crate::simvars::exact_blowup_data;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig { cells: 64, tau_f: 2.0, tau_f_refine: 0.0, extract_tol: 1e-10, ..ExperimentConfig::default() }
    }

    #[test]
    fn unperturbed_profile_returns_the_nominal_time() {
        let grid = make_grid(5, 4.0, 64).unwrap();
        let params = ProfileParams::from_d(3).unwrap();
        let pg = physical_grid_for(&grid).unwrap();
        let data = PhysicalPair::new(
            pg.sample(crate::grid::Parity::Even, |r| phi(r, &params)),
            pg.sample(crate::grid::Parity::Even, |r| phi1(r, &params)),
        )
        .unwrap();
        let s = initial_data_u(&data, 1.0, &grid, &params, &TailModel::for_dimension(5)).unwrap();
        assert!(s.psi1.values().iter().chain(s.psi2.values()).all(|v| *v == 0.0));
        let ex = extract_blowup_time(&data, &cfg()).unwrap();
        assert_eq!(ex.t, 1.0);
        assert_eq!(ex.width, 0.0);
    }

    #[test]
    fn shifted_blowup_time_is_found_at_low_resolution() {
        let grid = make_grid(5, 4.0, 64).unwrap();
        let params = ProfileParams::from_d(3).unwrap();
        let data = exact_blowup_data(1.05, &physical_grid_for(&grid).unwrap(), &params).unwrap();
        let ex = extract_blowup_time(&data, &cfg()).unwrap();
        assert!((ex.t - 1.05).abs() < 1e-2, "T = {}", ex.t);
        assert!(ex.trace.iter().all(|s| s.stage == 1));
    }

    #[test]
    fn free_flow_is_rejected() {
        let grid = make_grid(5, 4.0, 64).unwrap();
        let params = ProfileParams::from_d(3).unwrap();
        let data = exact_blowup_data(1.0, &physical_grid_for(&grid).unwrap(), &params).unwrap();
        let c = ExperimentConfig { mode: Mode::Free, ..cfg() };
        assert!(matches!(extract_blowup_time(&data, &c), Err(LabError::Config(_))));
    }
}
