//! End-to-end experiments: stability runs with blowup-time extraction and
//! decay fits, spectrum scans, free/linearized/nonlinear evolutions, the
//! inequality harnesses, and their CSV artifacts.

pub mod config;
pub mod extract;
pub mod fit;
pub mod io;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::evolver::{Evolver, EvolverConfig, LightconeDiagnostics, Mode, Trajectory};
use crate::grid::{make_grid, Parity, RadialGrid};
use crate::profiles::{phi, phi1, ProfileParams};
use crate::simvars::{from_similarity, initial_data_u, PhysicalPair, TailModel};
use crate::sobolev::{schauder_ratio, strauss_ratio, GaussianSum, InequalityHarness};
use crate::sobolev::{LightconeNorm, SobolevNorms};
use crate::spectral::{connection_mismatch, eigenvalue_scan, gauge_mode_residual, Rect, SpectralProblem, SpectralRoot};

pub use config::{ExperimentConfig, Family};
pub use extract::{extract_blowup_time, DSample, Extraction};
pub use fit::{fit_decay_rate, fit_log_linear, monotone_decreasing_with_ripple, DecayFit};

/// Physical Cauchy data of the blowup solution with blowup time
/// `cfg.nominal_t`, plus `amplitude * family` in the field component.
pub fn perturbed_data(cfg: &ExperimentConfig, grid: &Arc<RadialGrid>) -> Result<PhysicalPair> {
    let params = ProfileParams::from_d(cfg.dim)?;
    let t0 = cfg.nominal_t;
    PhysicalPair::new(
        grid.sample(Parity::Even, |r| {
            phi(r / t0, &params) / t0 + cfg.amplitude * cfg.family.profile(r, cfg.center, cfg.width)
        }),
        grid.sample(Parity::Even, |r| phi1(r / t0, &params) / (t0 * t0)),
    )
}

/// Resolution-dependent outcome of one extraction and fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub t: f64,
    pub omega: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub extraction: Extraction,
    /// `None` when the perturbation vanishes identically.
    pub fit: Option<DecayFit>,
    pub fit_window: (f64, f64),
    /// Light-cone `H_{s,k}` diagnostic is decreasing on the fit window up to 1% ripple.
    pub monotone_on_window: bool,
    /// `psi1(tau, 0)` of the total field at the end of the run.
    pub origin_final: f64,
    /// `psi1(tau, 0)` at the end of the fit window.
    pub origin_at_window_end: f64,
    /// `phi(0)`, the limit of `psi1(tau, 0)`.
    pub origin_target: f64,
    pub final_hsk: f64,
    /// Physical time of the reconstructed snapshot and its field at `r = 0`.
    pub snapshot_t: f64,
    pub snapshot_origin: f64,
    pub convergence: Vec<ConvergenceRow>,
    pub trajectory: Trajectory,
    pub trajectory_file: PathBuf,
    pub extraction_file: PathBuf,
    pub snapshot_file: PathBuf,
    pub report_file: PathBuf,
}

impl StabilityReport {
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut e: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| e.push((k.to_string(), v));
        put("extracted_t", io::num(self.extraction.t));
        put("extraction_width", io::num(self.extraction.width));
        put("extraction_evaluations", self.extraction.trace.len().to_string());
        match &self.fit {
            Some(f) => {
                put("omega_fit", io::num(f.omega));
                put("fit_rms", io::num(f.rms));
                put("omega_band95_lo", io::num(f.band95.0));
                put("omega_band95_hi", io::num(f.band95.1));
                put("fit_points", f.points.to_string());
            }
            None => put("fit_status", "zero-perturbation".into()),
        }
        put("fit_window_lo", io::num(self.fit_window.0));
        put("fit_window_hi", io::num(self.fit_window.1));
        put("monotone_on_window", self.monotone_on_window.to_string());
        put("origin_final", io::num(self.origin_final));
        put("origin_at_window_end", io::num(self.origin_at_window_end));
        put("origin_target", io::num(self.origin_target));
        put("final_hsk_lightcone", io::num(self.final_hsk));
        put("snapshot_t", io::num(self.snapshot_t));
        put("snapshot_origin_v", io::num(self.snapshot_origin));
        for row in &self.convergence {
            put(&format!("convergence_m{}_t", row.cells), io::num(row.t));
            if let Some(w) = row.omega {
                put(&format!("convergence_m{}_omega", row.cells), io::num(w));
            }
        }
        put("trajectory_file", file_name(&self.trajectory_file));
        put("extraction_file", file_name(&self.extraction_file));
        put("snapshot_file", file_name(&self.snapshot_file));
        e
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

struct StabilityCore {
    extraction: Extraction,
    trajectory: Trajectory,
    fit: Option<DecayFit>,
}

fn stability_core(cfg: &ExperimentConfig) -> Result<StabilityCore> {
    let grid = make_grid(cfg.n(), cfg.r_max, cfg.cells)?;
    let params = ProfileParams::from_d(cfg.dim)?;
    let pgrid = extract::physical_grid_for(&grid)?;
    let data = perturbed_data(cfg, &pgrid)?;
    let extraction = extract_blowup_time(&data, cfg)?;
    let s0 = initial_data_u(&data, extraction.t, &grid, &params, &TailModel::for_dimension(cfg.n()))?;
    let norm = Arc::new(LightconeNorm::new(&grid, cfg.norm_spec()?)?);
    let diag = LightconeDiagnostics::new(&grid, &params, cfg.mode, Some(norm))?;
    let mut ecfg = EvolverConfig::for_grid(&grid, cfg.tau_end, cfg.mode, cfg.cfl, cfg.snapshot_dtau)?;
    ecfg.store_states = false;
    let trajectory = Evolver::new(Arc::clone(&grid), params)?.evolve(&s0, &ecfg, &diag)?;
    let identically_zero = trajectory.diagnostics.iter().all(|d| d.hsk_lightcone == Some(0.0));
    let fit = if identically_zero { None } else { Some(fit_decay_rate(&trajectory, cfg.fit_window)?) };
    Ok(StabilityCore { extraction, trajectory, fit })
}

/// Extracts the blowup time of perturbed blowup data, re-evolves at that
/// time, fits the decay of the light-cone norm and writes
/// `trajectory.csv`, `extraction.csv`, `snapshot.csv` and `report.csv`.
pub fn run_stability(cfg: &ExperimentConfig) -> Result<StabilityReport> {
    cfg.validate()?;
    let core = stability_core(cfg)?;
    let convergence = if cfg.convergence_study {
        let coarse = ExperimentConfig { cells: cfg.cells / 2, ..cfg.clone() };
        let c = stability_core(&coarse)?;
        vec![
            ConvergenceRow { cells: coarse.cells, t: c.extraction.t, omega: c.fit.map(|f| f.omega) },
            ConvergenceRow { cells: cfg.cells, t: core.extraction.t, omega: core.fit.map(|f| f.omega) },
        ]
    } else {
        Vec::new()
    };
    let traj = core.trajectory;
    let hsk: Vec<f64> = traj.diagnostics.iter().map(|d| d.hsk_lightcone.unwrap_or(0.0)).collect();
    let (_, window_vals) = fit::window_points(&traj.times, &hsk, cfg.fit_window);
    let origin_at_window_end = traj
        .times
        .iter()
        .zip(&traj.diagnostics)
        .rev()
        .find(|(t, _)| **t <= cfg.fit_window.1 + 1e-9)
        .map(|(_, d)| d.origin_psi1)
        .unwrap_or(f64::NAN);
    let params = ProfileParams::from_d(cfg.dim)?;
    let (snapshot, snapshot_t) = from_similarity(&add_profile(&traj.last, &params)?, traj.final_tau(), core.extraction.t)?;

    let out = &cfg.out_dir;
    let report = StabilityReport {
        fit: core.fit,
        fit_window: cfg.fit_window,
        monotone_on_window: monotone_decreasing_with_ripple(&window_vals, 0.01),
        origin_final: traj.diagnostics.last().map_or(f64::NAN, |d| d.origin_psi1),
        origin_at_window_end,
        origin_target: phi(0.0, &params),
        final_hsk: *hsk.last().unwrap_or(&f64::NAN),
        snapshot_t,
        snapshot_origin: snapshot.v0.values()[0],
        convergence,
        extraction: core.extraction,
        trajectory_file: out.join("trajectory.csv"),
        extraction_file: out.join("extraction.csv"),
        snapshot_file: out.join("snapshot.csv"),
        report_file: out.join("report.csv"),
        trajectory: traj,
    };
    let entries = report.entries();
    if let Some((k, v)) = entries.iter().find(|(_, v)| v.parse::<f64>().is_ok_and(|x| !x.is_finite())) {
        return Err(LabError::Solver(format!("report entry {k} is not finite ({v})")));
    }
    io::write_trajectory(&report.trajectory_file, &report.trajectory)?;
    let ex_rows: Vec<Vec<String>> = report
        .extraction
        .trace
        .iter()
        .map(|s| vec![s.stage.to_string(), io::num(s.tau_f), io::num(s.t), io::num(s.d), s.saturated.to_string()])
        .collect();
    io::write_csv(&report.extraction_file, &io::EXTRACTION_COLUMNS, &ex_rows)?;
    let pg = snapshot.grid();
    let snap_rows: Vec<Vec<String>> = (0..pg.len())
        .map(|i| vec![io::num(pg.rho(i)), io::num(snapshot.v0.values()[i]), io::num(snapshot.v1.values()[i])])
        .collect();
    io::write_csv(&report.snapshot_file, &io::SNAPSHOT_COLUMNS, &snap_rows)?;
    io::write_report(&report.report_file, &entries)?;
    Ok(report)
}

fn add_profile(s: &crate::state::State, params: &ProfileParams) -> Result<crate::state::State> {
    let bg = crate::profiles::static_state(s.grid(), params)?;
    s.axpy(1.0, &bg)
}

/// Evolves the perturbed data at the nominal blowup time (no extraction)
/// in the configured mode and writes `trajectory.csv`.
pub fn run_evolve(cfg: &ExperimentConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = make_grid(cfg.n(), cfg.r_max, cfg.cells)?;
    let params = ProfileParams::from_d(cfg.dim)?;
    let s0 = match cfg.mode {
        Mode::Free => {
            let f = grid.sample(Parity::Even, |r| cfg.amplitude * cfg.family.profile(r, cfg.center, cfg.width));
            crate::state::State::new(f, grid.zeros())?
        }
        _ => {
            let pgrid = extract::physical_grid_for(&grid)?;
            let data = perturbed_data(cfg, &pgrid)?;
            initial_data_u(&data, cfg.nominal_t, &grid, &params, &TailModel::for_dimension(cfg.n()))?
        }
    };
    let norm = Arc::new(LightconeNorm::new(&grid, cfg.norm_spec()?)?);
    let diag = LightconeDiagnostics::new(&grid, &params, cfg.mode, Some(norm))?;
    let ecfg = EvolverConfig::for_grid(&grid, cfg.tau_end, cfg.mode, cfg.cfl, cfg.snapshot_dtau)?;
    let traj = Evolver::new(grid, params)?.evolve(&s0, &ecfg, &diag)?;
    io::write_trajectory(&cfg.out_dir.join("trajectory.csv"), &traj)?;
    Ok(traj)
}

/// Eigenvalues found for one dimension plus the gauge-mode residual.
#[derive(Debug, Clone)]
pub struct SpectrumEntry {
    pub n: usize,
    pub roots: Vec<SpectralRoot>,
    /// Largest residual of `v = r/(r^2+n-4)` at `lambda = 1` over 1000 points of (0, 2).
    pub gauge_residual: f64,
}

/// Max residual of the closed-form gauge eigenfunction on 1000 points of (0, 2).
pub fn gauge_residual_max(n: usize) -> Result<f64> {
    (1..=1000).map(|i| gauge_mode_residual(n, 2.0 * i as f64 / 1001.0)).try_fold(0.0, |a, r| Ok(f64::max(a, r?)))
}

/// Scans the configured rectangle for every requested dimension and writes
/// `spectrum.csv`, `gauge_residual.csv` and, if enabled, `spectrum_map.csv`.
pub fn run_spectrum(cfg: &ExperimentConfig) -> Result<Vec<SpectrumEntry>> {
    cfg.validate()?;
    let rect = Rect::new(cfg.spectrum_re.0, cfg.spectrum_re.1, cfg.spectrum_im.0, cfg.spectrum_im.1)?;
    let entries = cfg
        .spectrum_dims
        .par_iter()
        .map(|&n| {
            Ok(SpectrumEntry { n, roots: eigenvalue_scan(n, rect, cfg.scan_density)?, gauge_residual: gauge_residual_max(n)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = entries
        .iter()
        .flat_map(|e| {
            e.roots.iter().map(move |r| {
                vec![e.n.to_string(), io::num(r.lambda.re), io::num(r.lambda.im), io::num(r.mismatch_abs), io::num(r.newton_step)]
            })
        })
        .collect();
    io::write_csv(&cfg.out_dir.join("spectrum.csv"), &io::SPECTRUM_COLUMNS, &rows)?;
    let gauge_rows: Vec<Vec<String>> = entries.iter().map(|e| vec![e.n.to_string(), io::num(e.gauge_residual)]).collect();
    io::write_csv(&cfg.out_dir.join("gauge_residual.csv"), &["n", "max_residual"], &gauge_rows)?;
    if cfg.map_resolution > 0 {
        let k = cfg.map_resolution;
        let mut map = Vec::new();
        for &n in &cfg.spectrum_dims {
            let pts: Vec<Complex64> = (0..k)
                .flat_map(|i| (0..k).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let fr = (i as f64 + 0.5) / k as f64;
                    let fi = (j as f64 + 0.5) / k as f64;
                    Complex64::new(rect.re0 + fr * (rect.re1 - rect.re0), rect.im0 + fi * (rect.im1 - rect.im0))
                })
                .collect();
            let vals = pts
                .par_iter()
                .map(|&z| Ok(connection_mismatch(&SpectralProblem::new(n, z)?)?.norm()))
                .collect::<Result<Vec<f64>>>()?;
            for (z, v) in pts.iter().zip(vals) {
                map.push(vec![n.to_string(), io::num(z.re), io::num(z.im), io::num(v)]);
            }
        }
        io::write_csv(&cfg.out_dir.join("spectrum_map.csv"), &io::SPECTRUM_MAP_COLUMNS, &map)?;
    }
    Ok(entries)
}

/// Radius and resolution of the grid used by the inequality harnesses.
pub const HARNESS_GRID: (f64, usize) = (16.0, 2000);
pub const STRAUSS_FAMILY: usize = 50;
pub const SCHAUDER_FAMILY: usize = 30;

#[derive(Debug, Clone)]
pub struct NormsReport {
    /// Strauss ratios for derivative orders 0 and 1.
    pub strauss: [InequalityHarness; 2],
    /// Largest relative change of a Strauss ratio under the dilation `r -> 1.5 r`.
    pub dilation_spread: f64,
    pub schauder: InequalityHarness,
}

/// Samples the Strauss and Schauder ratios over seeded random Gaussian
/// families and writes `ratios.csv`.
pub fn run_norms(cfg: &ExperimentConfig) -> Result<NormsReport> {
    cfg.validate()?;
    let spec = cfg.norm_spec()?;
    let grid = make_grid(cfg.n(), HARNESS_GRID.0, HARNESS_GRID.1)?;
    let norms = SobolevNorms::for_grid(&grid)?;
    let family = GaussianSum::random_family(cfg.seed, STRAUSS_FAMILY);
    let mut strauss = Vec::new();
    let mut spread: f64 = 0.0;
    let mut rows = Vec::new();
    for alpha in [0usize, 1] {
        let ratios = family
            .par_iter()
            .map(|f| {
                let a = strauss_ratio(&norms, &f.sample(&grid, 1.0), spec.s, alpha)?;
                let b = strauss_ratio(&norms, &f.sample(&grid, 1.5), spec.s, alpha)?;
                Ok((a, ((a - b) / a).abs()))
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, (r, d)) in ratios.iter().enumerate() {
            spread = spread.max(*d);
            rows.push(vec!["strauss".to_string(), alpha.to_string(), i.to_string(), io::num(*r)]);
        }
        strauss.push(InequalityHarness::from_ratios(ratios.into_iter().map(|x| x.0).collect()));
    }
    let sfam = GaussianSum::random_family(cfg.seed.wrapping_add(1), 4 * SCHAUDER_FAMILY);
    let schauder = (0..SCHAUDER_FAMILY)
        .into_par_iter()
        .map(|j| {
            let f: Vec<_> = (0..4).map(|i| sfam[4 * j + i].sample(&grid, 1.0)).collect();
            let v = f[3].scaled(0.1);
            schauder_ratio(&norms, [&f[0], &f[1], &f[2]], &v, &spec)
        })
        .collect::<Result<Vec<f64>>>()?;
    for (i, r) in schauder.iter().enumerate() {
        rows.push(vec!["schauder".to_string(), String::new(), i.to_string(), io::num(*r)]);
    }
    io::write_csv(&cfg.out_dir.join("ratios.csv"), &io::RATIO_COLUMNS, &rows)?;
    let [s0, s1]: [InequalityHarness; 2] = strauss.try_into().expect("two derivative orders");
    Ok(NormsReport { strauss: [s0, s1], dilation_spread: spread, schauder: InequalityHarness::from_ratios(schauder) })
}

/// Quick consistency checks with closed-form answers.
#[derive(Debug, Clone)]
pub struct SelfTest {
    pub checks: Vec<(String, f64, f64, bool)>,
}

impl SelfTest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.3)
    }
}

/// Static residual, gauge eigenrelation, gauge mismatch and Hankel
/// calibration, each compared against a tolerance.
pub fn run_selftest(cfg: &ExperimentConfig) -> Result<SelfTest> {
    cfg.validate()?;
    let n = cfg.n();
    let mut checks = Vec::new();
    let mut check = |name: &str, value: f64, tol: f64| checks.push((name.to_string(), value, tol, value <= tol));
    let params = ProfileParams::from_d(cfg.dim)?;
    let grid = make_grid(n, 4.0, 400)?;
    let ev = Evolver::new(Arc::clone(&grid), params)?;
    check("static_residual_m400", ev.static_residual()?, 1e-5);
    let gm = crate::profiles::gauge_mode(&grid, &params)?;
    let lg = ev.rhs_linearized(&gm)?;
    let end = grid.index_at_or_below(2.0);
    let rel = (0..=end)
        .map(|i| {
            let a = (lg.psi1.values()[i] - gm.psi1.values()[i]).abs() / gm.psi1.values()[i].abs();
            let b = (lg.psi2.values()[i] - gm.psi2.values()[i]).abs() / gm.psi2.values()[i].abs().max(1e-300);
            a.max(b)
        })
        .fold(0.0, f64::max);
    check("gauge_eigenrelation_m400", rel, 1e-3);
    check("gauge_ode_residual", gauge_residual_max(n)?, 1e-10);
    check("gauge_mismatch", connection_mismatch(&SpectralProblem::new(n, Complex64::new(1.0, 0.0))?)?.norm(), 1e-9);
    let hgrid = make_grid(n, 10.0, 1000)?;
    let norms = SobolevNorms::for_grid(&hgrid)?;
    check("hankel_calibration", (norms.plan().gaussian_calibration() - 1.0).abs(), 1e-6);
    let rows: Vec<Vec<String>> =
        checks.iter().map(|(k, v, t, ok)| vec![k.clone(), io::num(*v), io::num(*t), ok.to_string()]).collect();
    io::write_csv(&cfg.out_dir.join("selftest.csv"), &["check", "value", "tolerance", "pass"], &rows)?;
    Ok(SelfTest { checks })
}
