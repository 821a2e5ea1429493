//! Discrete radial Fourier (Hankel) transform
//!
//! `u_hat(k) = int_0^R f(r) J_nu(kr)/(kr)^nu r^{n-1} dr`, `nu = n/2 - 1`,
//! which for the unitary Fourier convention in `R^n` needs no further
//! constant. The integral uses 4 Gauss-Legendre points per grid cell and a
//! 6-point Lagrange interpolant of the nodal values; the resulting linear
//! map is precomputed once per (grid, wavenumber grid) pair.

use std::sync::Arc;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;

use super::bessel::BesselKernel;
use crate::error::{LabError, Result};
use crate::grid::{Parity, RadialField, RadialGrid};

/// Relative size of `f(R)` above which the zero-padding assumption is flagged.
pub const TAIL_TOLERANCE: f64 = 1e-12;

const POINTS_PER_CELL: usize = 4;
const STENCIL: usize = 6;

/// Wavenumbers with positive quadrature weights for `int_0^inf dk`.
#[derive(Debug, Clone)]
pub struct WavenumberGrid {
    pub k: Vec<f64>,
    pub w: Vec<f64>,
    /// Lower end of the first panel; `[0, k_start]` is not sampled.
    pub k_start: f64,
}

impl WavenumberGrid {
    /// Log-spaced Gauss-Legendre panels on `[k_min, k_mid]` followed by
    /// uniform panels on `[k_mid, k_max]`.
    pub fn hybrid(k_min: f64, k_mid: f64, k_max: f64, log_panels: usize, lin_panels: usize, per_panel: usize) -> Result<Self> {
        if !(0.0 < k_min && k_min < k_mid && k_mid < k_max) || per_panel < 2 {
            return Err(LabError::Config("wavenumber grid needs 0 < k_min < k_mid < k_max".into()));
        }
        let gl = GaussLegendre::new(per_panel.try_into().expect("panel order"));
        let (mut k, mut w) = (Vec::new(), Vec::new());
        let (la, lb) = (k_min.ln(), k_mid.ln());
        for p in 0..log_panels {
            let a = la + (lb - la) * p as f64 / log_panels as f64;
            let b = la + (lb - la) * (p + 1) as f64 / log_panels as f64;
            for (x, wx) in gl.nodes().zip(gl.weights()) {
                let t = 0.5 * (a + b) + 0.5 * (b - a) * x;
                let kk = t.exp();
                k.push(kk);
                w.push(0.5 * (b - a) * wx * kk);
            }
        }
        for p in 0..lin_panels {
            let a = k_mid + (k_max - k_mid) * p as f64 / lin_panels as f64;
            let b = k_mid + (k_max - k_mid) * (p + 1) as f64 / lin_panels as f64;
            for (x, wx) in gl.nodes().zip(gl.weights()) {
                k.push(0.5 * (a + b) + 0.5 * (b - a) * x);
                w.push(0.5 * (b - a) * wx);
            }
        }
        let mut idx: Vec<usize> = (0..k.len()).collect();
        idx.sort_by(|&a, &b| k[a].total_cmp(&k[b]));
        Ok(Self { k: idx.iter().map(|&i| k[i]).collect(), w: idx.iter().map(|&i| w[i]).collect(), k_start: k_min })
    }

    /// 512 points on `[0.01, 64]`: 8 logarithmic panels below `k = 1`,
    /// 24 uniform panels above, 16 points each.
    pub fn standard() -> Self {
        Self::hybrid(0.01, 1.0, 64.0, 8, 24, 16).expect("fixed parameters")
    }

    pub fn k_min(&self) -> f64 {
        self.k[0]
    }
}

/// Transform samples `u_hat(k_j)` together with the wavenumber quadrature.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub kgrid: Arc<WavenumberGrid>,
    pub values: Vec<f64>,
    pub n: usize,
    /// Set if the input did not decay to the tail tolerance at the outer radius.
    pub truncated: bool,
    /// Lower edge of the wavenumber range; `[0, k_low]` is added analytically.
    pub k_low: f64,
}

impl SpectralField {
    /// `int_0^inf k^{2s} |u_hat|^2 k^{n-1} dk`, with the unresolved range
    /// `[0, k_low]` treated as constant `u_hat`.
    pub fn weighted_square(&self, s: f64) -> Result<f64> {
        let p = 2.0 * s + self.n as f64;
        if !(p > 0.0) {
            return Err(LabError::Domain(format!("need s > -n/2, got s = {s}")));
        }
        let body: f64 = self
            .kgrid
            .k
            .iter()
            .zip(&self.kgrid.w)
            .zip(&self.values)
            .map(|((k, w), u)| w * k.powf(p - 1.0) * u * u)
            .sum();
        let u0 = self.values[0];
        Ok(body + u0 * u0 * self.k_low.powf(p) / p)
    }
}

/// Precomputed linear map from nodal values on `[0, r_support]` to the
/// transform on a wavenumber grid.
pub struct HankelPlan {
    grid: Arc<RadialGrid>,
    kgrid: Arc<WavenumberGrid>,
    nodes_used: usize,
    /// Row-major `k x nodes_used`.
    matrix: Vec<f64>,
    /// Weights of `int_0^{r_support} f^2 r^{n-1} dr` on the same quadrature,
    /// as (cell point, node weights) pairs flattened for reuse.
    points: Vec<QuadPoint>,
}

#[derive(Clone)]
struct QuadPoint {
    r: f64,
    weight: f64,
    start: isize,
    lagrange: [f64; STENCIL],
}

fn node_value(f: &[f64], idx: isize, parity: Parity) -> f64 {
    if idx >= 0 {
        f[idx as usize]
    } else {
        match parity {
            Parity::Even => f[(-idx) as usize],
            Parity::Odd => -f[(-idx) as usize],
        }
    }
}

impl HankelPlan {
    /// Plan for fields whose support lies in `[0, r_support]` (clamped to `R`).
    pub fn new(grid: &Arc<RadialGrid>, kgrid: Arc<WavenumberGrid>, r_support: f64) -> Result<Self> {
        let m = grid.cells();
        if m < STENCIL {
            return Err(LabError::Config("grid too coarse for the transform".into()));
        }
        let r_support = r_support.min(grid.r_max());
        let cells = ((r_support / grid.h()).round() as usize).clamp(1, m);
        let gl = GaussLegendre::new(POINTS_PER_CELL.try_into().expect("order"));
        let h = grid.h();
        let n = grid.n() as i32;
        let mut points = Vec::with_capacity(cells * POINTS_PER_CELL);
        let mut max_node = 0usize;
        for j in 0..cells {
            let start = if j + 3 <= m { j as isize - 2 } else { (m - 5) as isize };
            for (x, wx) in gl.nodes().zip(gl.weights()) {
                let t = j as f64 + 0.5 * (1.0 + x); // position in units of h
                let r = t * h;
                let mut lagrange = [0.0; STENCIL];
                for (a, la) in lagrange.iter_mut().enumerate() {
                    let xa = (start + a as isize) as f64;
                    let mut v = 1.0;
                    for b in 0..STENCIL {
                        if b != a {
                            let xb = (start + b as isize) as f64;
                            v *= (t - xb) / (xa - xb);
                        }
                    }
                    *la = v;
                }
                points.push(QuadPoint { r, weight: 0.5 * h * wx * r.powi(n - 1), start, lagrange });
            }
            max_node = max_node.max((start + STENCIL as isize - 1) as usize);
        }
        let nodes_used = max_node + 1;
        let kern = BesselKernel::for_dimension(grid.n());
        let matrix: Vec<f64> = kgrid
            .k
            .par_iter()
            .flat_map_iter(|&k| {
                let mut row = vec![0.0; nodes_used];
                for p in &points {
                    let c = p.weight * kern.eval(k * p.r);
                    for (a, la) in p.lagrange.iter().enumerate() {
                        let idx = p.start + a as isize;
                        // even reflection folds ghost indices onto interior nodes
                        row[idx.unsigned_abs()] += c * la;
                    }
                }
                row.into_iter()
            })
            .collect();
        Ok(Self { grid: Arc::clone(grid), kgrid, nodes_used, matrix, points })
    }

    /// Plan over the whole grid with the standard wavenumber grid.
    pub fn full(grid: &Arc<RadialGrid>) -> Result<Self> {
        Self::new(grid, Arc::new(WavenumberGrid::standard()), grid.r_max())
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn kgrid(&self) -> &Arc<WavenumberGrid> {
        &self.kgrid
    }

    fn check_field(&self, f: &RadialField) -> Result<()> {
        if f.parity() != Parity::Even {
            return Err(LabError::Contract("the radial transform needs an even field".into()));
        }
        if **f.grid() != *self.grid {
            return Err(LabError::Contract("field and transform plan use different grids".into()));
        }
        Ok(())
    }

    /// Transform of nodal values (only the first `nodes_used` are read).
    pub fn apply_slice(&self, f: &[f64]) -> Vec<f64> {
        let f = &f[..self.nodes_used];
        self.matrix.chunks_exact(self.nodes_used).map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn forward(&self, f: &RadialField) -> Result<SpectralField> {
        self.check_field(f)?;
        let scale = f.max_abs();
        let edge = f.values()[self.nodes_used - 1].abs().max(f.values()[self.grid.cells()].abs());
        let truncated = scale > 0.0 && edge > TAIL_TOLERANCE * scale;
        let values = self.apply_slice(f.values());
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Solver("transform quadrature produced non-finite values".into()));
        }
        Ok(SpectralField {
            kgrid: Arc::clone(&self.kgrid),
            values,
            n: self.grid.n(),
            truncated,
            k_low: self.kgrid.k_start,
        })
    }

    /// `int_0^{r_support} f^2 r^{n-1} dr` on the transform's own quadrature.
    pub fn l2_squared(&self, f: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| {
                let v: f64 = p
                    .lagrange
                    .iter()
                    .enumerate()
                    .map(|(a, la)| la * node_value(f, p.start + a as isize, Parity::Even))
                    .sum();
                p.weight * v * v
            })
            .sum()
    }

    /// Transform of the Gaussian `exp(-r^2/2)` at the smallest wavenumber;
    /// equals 1 up to quadrature error, reported as a calibration check.
    pub fn gaussian_calibration(&self) -> f64 {
        let f: Vec<f64> = self.grid.nodes().iter().map(|r| (-0.5 * r * r).exp()).collect();
        let u = self.apply_slice(&f)[0];
        let k = self.kgrid.k[0];
        u / (-0.5 * k * k).exp()
    }
}

/// One-shot transform on the standard wavenumber grid.
pub fn hankel_forward(f: &RadialField, kgrid: Arc<WavenumberGrid>) -> Result<SpectralField> {
    let plan = HankelPlan::new(f.grid(), kgrid, f.grid().r_max())?;
    plan.forward(f)
}
