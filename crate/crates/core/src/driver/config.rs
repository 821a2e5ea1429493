//! Experiment configuration and its flat `key = value` file format.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{LabError, Result};
use crate::evolver::Mode;
use crate::profiles::Dimension;
use crate::sobolev::NormSpec;

/// Largest admissible perturbation amplitude.
pub const MAX_AMPLITUDE: f64 = 0.05;
/// Admissible range for the blowup-time bracket.
pub const BRACKET_LIMITS: (f64, f64) = (0.8, 1.2);

/// Shape of the initial perturbation added to the blowup data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `exp(-(r-c)^2/w^2)`, even-reflected about the origin.
    GaussianBump,
    /// `(1 - ((r-c)/w)^2)^4` on `|r - c| < w`, even-reflected.
    PolynomialBump,
}

impl FromStr for Family {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-bump" => Ok(Family::GaussianBump),
            "polynomial-bump" => Ok(Family::PolynomialBump),
            other => Err(LabError::Config(format!("unknown perturbation family '{other}'"))),
        }
    }
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GaussianBump => "gaussian-bump",
            Family::PolynomialBump => "polynomial-bump",
        }
    }

    /// Unit-amplitude profile at radius `r`.
    pub fn profile(&self, r: f64, center: f64, width: f64) -> f64 {
        let one = |x: f64| {
            let y = (x - center) / width;
            match self {
                Family::GaussianBump => (-y * y).exp(),
                Family::PolynomialBump => {
                    if y.abs() < 1.0 {
                        (1.0 - y * y).powi(4)
                    } else {
                        0.0
                    }
                }
            }
        };
        if center == 0.0 {
            one(r)
        } else {
            one(r) + one(-r)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Target dimension `d` of the wave map; the radial problem lives in `n = d + 2`.
    pub dim: usize,
    pub family: Family,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    /// Blowup time of the unperturbed data.
    pub nominal_t: f64,
    pub r_max: f64,
    pub cells: usize,
    pub cfl: f64,
    pub mode: Mode,
    pub tau_end: f64,
    pub snapshot_dtau: f64,
    /// Fractional exponent; defaults to 60% into the admissible window.
    pub norm_s: Option<f64>,
    /// Integer exponent; defaults to `n + 1`.
    pub norm_k: Option<usize>,
    pub bracket: (f64, f64),
    pub extract_tol: f64,
    pub extract_max_iter: usize,
    /// Evolution horizon of the coarse extraction stage.
    pub tau_f: f64,
    /// Evolution horizon of the refining extraction stage; 0 disables it.
    pub tau_f_refine: f64,
    pub fit_window: (f64, f64),
    /// Also run the extraction and fit at half the resolution.
    pub convergence_study: bool,
    pub spectrum_dims: Vec<usize>,
    pub spectrum_re: (f64, f64),
    pub spectrum_im: (f64, f64),
    pub scan_density: usize,
    /// Samples per axis of the mismatch map; 0 disables it.
    pub map_resolution: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            family: Family::GaussianBump,
            amplitude: 1e-3,
            center: 0.0,
            width: 0.5,
            nominal_t: 1.0,
            r_max: 4.0,
            cells: 400,
            cfl: 0.5,
            mode: Mode::Nonlinear,
            tau_end: 15.0,
            snapshot_dtau: 0.1,
            norm_s: None,
            norm_k: None,
            bracket: (0.9, 1.1),
            extract_tol: 1e-15,
            extract_max_iter: 80,
            tau_f: 6.0,
            tau_f_refine: 18.0,
            fit_window: (4.0, 12.0),
            convergence_study: false,
            spectrum_dims: vec![5, 7, 9],
            spectrum_re: (-0.1, 3.0),
            spectrum_im: (-2.0, 2.0),
            scan_density: 32,
            map_resolution: 0,
            seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| LabError::Config(format!("cannot parse value '{v}' for key '{key}'")))
}

fn parse_pair(key: &str, v: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok((parse_num(key, a)?, parse_num(key, b)?)),
        _ => Err(LabError::Config(format!("key '{key}' expects two comma-separated numbers, got '{v}'"))),
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(LabError::Config(format!("key '{key}' expects a boolean, got '{v}'"))),
    }
}

impl ExperimentConfig {
    /// Parses the flat config format on top of the defaults. Blank lines
    /// and `#` comments are ignored; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LabError::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(LabError::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "dim" => self.dim = parse_num(key, v)?,
            "family" => self.family = v.parse()?,
            "amplitude" => self.amplitude = parse_num(key, v)?,
            "center" => self.center = parse_num(key, v)?,
            "width" => self.width = parse_num(key, v)?,
            "nominal_t" => self.nominal_t = parse_num(key, v)?,
            "r_max" => self.r_max = parse_num(key, v)?,
            "cells" => self.cells = parse_num(key, v)?,
            "cfl" => self.cfl = parse_num(key, v)?,
            "mode" => self.mode = v.parse()?,
            "tau_end" => self.tau_end = parse_num(key, v)?,
            "snapshot_dtau" => self.snapshot_dtau = parse_num(key, v)?,
            "norm_s" => self.norm_s = Some(parse_num(key, v)?),
            "norm_k" => self.norm_k = Some(parse_num(key, v)?),
            "bracket" => self.bracket = parse_pair(key, v)?,
            "extract_tol" => self.extract_tol = parse_num(key, v)?,
            "extract_max_iter" => self.extract_max_iter = parse_num(key, v)?,
            "tau_f" => self.tau_f = parse_num(key, v)?,
            "tau_f_refine" => self.tau_f_refine = parse_num(key, v)?,
            "fit_window" => self.fit_window = parse_pair(key, v)?,
            "convergence_study" => self.convergence_study = parse_bool(key, v)?,
            "spectrum_dims" => {
                self.spectrum_dims = v.split(',').map(|x| parse_num(key, x.trim())).collect::<Result<_>>()?
            }
            "spectrum_re" => self.spectrum_re = parse_pair(key, v)?,
            "spectrum_im" => self.spectrum_im = parse_pair(key, v)?,
            "scan_density" => self.scan_density = parse_num(key, v)?,
            "map_resolution" => self.map_resolution = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            other => return Err(LabError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.dim + 2
    }

    pub fn norm_spec(&self) -> Result<NormSpec> {
        let n = self.n();
        let nf = n as f64;
        let default_s = nf / 2.0 - 1.0 + 0.6 / (2.0 * (nf - 2.0));
        NormSpec::new(n, self.norm_s.unwrap_or(default_s), self.norm_k.unwrap_or(n + 1))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::Config(msg));
        Dimension::from_d(self.dim)?;
        if !(0.0..=MAX_AMPLITUDE).contains(&self.amplitude) {
            return bad(format!("amplitude {} outside [0, {MAX_AMPLITUDE}]", self.amplitude));
        }
        if !(self.width > 0.0) || !(self.center >= 0.0) {
            return bad("perturbation needs width > 0 and center >= 0".into());
        }
        self.norm_spec()?;
        let (lo, hi) = self.bracket;
        if !(BRACKET_LIMITS.0 <= lo && lo < hi && hi <= BRACKET_LIMITS.1) {
            return bad(format!("bracket ({lo}, {hi}) must be an interval inside {BRACKET_LIMITS:?}"));
        }
        if !(self.nominal_t > 0.0) {
            return bad("nominal_t must be positive".into());
        }
        if !(self.r_max >= 2.0) || self.cells < 16 {
            return bad("grid needs r_max >= 2 and at least 16 cells".into());
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl {} outside (0, 1]", self.cfl));
        }
        if !(self.tau_end > 0.0) || !(self.snapshot_dtau > 0.0) || self.snapshot_dtau > self.tau_end {
            return bad("need tau_end > 0 and 0 < snapshot_dtau <= tau_end".into());
        }
        if !(self.extract_tol > 0.0) || self.extract_max_iter == 0 {
            return bad("extraction needs a positive tolerance and iteration budget".into());
        }
        if !(self.tau_f > 0.0) || !(self.tau_f_refine == 0.0 || self.tau_f_refine > self.tau_f) {
            return bad("need tau_f > 0 and tau_f_refine either 0 or above tau_f".into());
        }
        let (a, b) = self.fit_window;
        if !(0.0 <= a && a < b && b <= self.tau_end) {
            return bad(format!("fit window ({a}, {b}) must lie inside [0, tau_end]"));
        }
        if self.spectrum_dims.iter().any(|&n| n < 5) {
            return bad("spectrum dimensions must be at least 5".into());
        }
        if self.scan_density < 4 {
            return bad("scan_density must be at least 4".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_pairs() {
        let cfg = ExperimentConfig::parse(
            "# stability run\n dim = 5\namplitude=0.002 # small\nbracket = 0.95, 1.05\nmode = linearized\n\nspectrum_dims = 5,7\n",
        )
        .unwrap();
        assert_eq!(cfg.dim, 5);
        assert_eq!(cfg.amplitude, 0.002);
        assert_eq!(cfg.bracket, (0.95, 1.05));
        assert_eq!(cfg.mode, Mode::Linearized);
        assert_eq!(cfg.spectrum_dims, vec![5, 7]);
    }

    #[test]
    fn unknown_and_duplicate_keys_are_errors() {
        assert!(matches!(ExperimentConfig::parse("colour = red"), Err(LabError::Config(_))));
        assert!(matches!(ExperimentConfig::parse("dim = 3\ndim = 4"), Err(LabError::Config(_))));
        assert!(matches!(ExperimentConfig::parse("dim 3"), Err(LabError::Config(_))));
    }

    #[test]
    fn default_norm_exponents() {
        let spec = ExperimentConfig::default().norm_spec().unwrap();
        assert!((spec.s - 1.6).abs() < 1e-15 && spec.k == 6);
        let spec = ExperimentConfig::parse("dim = 5").unwrap().norm_spec().unwrap();
        assert!(spec.s > 2.5 && spec.s < 2.6 && spec.k == 8);
    }

    #[test]
    fn validation_bounds() {
        assert!(ExperimentConfig::parse("amplitude = 0.06").is_err());
        assert!(ExperimentConfig::parse("bracket = 0.7, 1.1").is_err());
        assert!(ExperimentConfig::parse("norm_s = 1.7").is_err());
        assert!(ExperimentConfig::parse("norm_k = 5").is_err());
        assert!(ExperimentConfig::parse("fit_window = 4, 20").is_err());
        assert!(ExperimentConfig::parse("dim = 2").is_err());
        assert!(ExperimentConfig::parse("").is_ok());
    }

    #[test]
    fn families_are_even_and_normalized() {
        for f in [Family::GaussianBump, Family::PolynomialBump] {
            assert_eq!(f.profile(0.0, 0.0, 0.5), 1.0);
            assert_eq!(f.profile(0.3, 0.4, 0.5), f.profile(-0.3, 0.4, 0.5));
        }
        assert_eq!(Family::PolynomialBump.profile(0.6, 0.0, 0.5), 0.0);
    }
}
