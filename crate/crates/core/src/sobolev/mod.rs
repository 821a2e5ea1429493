//! Radial homogeneous Sobolev norms.
//!
//! Fractional norms `||u||_{H^s}^2 = int k^{2s} |u_hat(k)|^2 k^{n-1} dk` use the
//! Hankel transform; integer orders use grid stencils, `||Delta^{k/2} u||` for
//! even `k` and `||d_rho Delta^{(k-1)/2} u||` for odd `k`. Every norm omits the
//! area of the unit sphere, on both the physical and the Fourier side.

mod bessel;
mod hankel;
mod inequalities;

use std::sync::Arc;

pub use bessel::BesselKernel;
pub use hankel::{hankel_forward, HankelPlan, SpectralField, WavenumberGrid, TAIL_TOLERANCE};
pub use inequalities::{schauder_ratio, strauss_ratio, GaussianSum, InequalityHarness};

use crate::error::{LabError, Result};
use crate::evolver::simpson_weights;
use crate::grid::{apply_derivative, apply_laplacian, Parity, RadialField, RadialGrid};
use crate::state::State;

/// Exponents of the `H_{s,k}` norm in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub s: f64,
    pub k: usize,
    pub n: usize,
}

impl NormSpec {
    /// Requires `n/2 - 1 < s <= n/2 - 1 + 1/(2(n-2))` and integer `k > n`.
    pub fn new(n: usize, s: f64, k: usize) -> Result<Self> {
        let nf = n as f64;
        let lo = nf / 2.0 - 1.0;
        let hi = lo + 1.0 / (2.0 * (nf - 2.0));
        if n < 5 || !(s > lo && s <= hi + 1e-12) {
            return Err(LabError::Config(format!(
                "fractional exponent s = {s} outside ({lo}, {hi}] for n = {n}"
            )));
        }
        if k <= n {
            return Err(LabError::Config(format!("integer exponent k = {k} must exceed n = {n}")));
        }
        Ok(Self { s, k, n })
    }

    /// The same bounds written in the map dimension `d = n - 2`:
    /// `d/2 < s' < d/2 + 1/(2d)` with `s' = s - 1`... shifted by one
    /// because the similarity unknown is `v = u / r`.
    pub fn map_dimension_window(d: usize) -> (f64, f64) {
        let df = d as f64;
        (df / 2.0, df / 2.0 + 1.0 / (2.0 * df))
    }
}

/// Squared integer-order homogeneous norm by stencils.
pub fn integer_norm_squared(f: &RadialField, order: usize) -> Result<f64> {
    let mut g = f.clone();
    for _ in 0..order / 2 {
        g = apply_laplacian(&g)?;
    }
    if order % 2 == 1 {
        g = apply_derivative(&g);
    }
    Ok(weighted_l2_squared(&g))
}

/// `int_0^R g^2 r^{n-1} dr` by composite Simpson.
pub fn weighted_l2_squared(g: &RadialField) -> f64 {
    let grid = g.grid();
    let w = simpson_weights(grid, grid.r_max());
    let n = grid.n() as i32;
    w.iter()
        .enumerate()
        .map(|(i, wi)| {
            let v = g.values()[i];
            wi * grid.rho(i).powi(n - 1) * v * v
        })
        .sum()
}

fn is_integer(s: f64) -> Option<usize> {
    if s >= 0.0 && (s - s.round()).abs() < 1e-12 {
        Some(s.round() as usize)
    } else {
        None
    }
}

/// Norm engine sharing one transform plan across many evaluations.
pub struct SobolevNorms {
    plan: HankelPlan,
}

impl SobolevNorms {
    pub fn new(plan: HankelPlan) -> Self {
        Self { plan }
    }

    pub fn for_grid(grid: &Arc<RadialGrid>) -> Result<Self> {
        Ok(Self { plan: HankelPlan::full(grid)? })
    }

    pub fn plan(&self) -> &HankelPlan {
        &self.plan
    }

    /// `||f||_{H^s}` through the transform.
    pub fn hs(&self, f: &RadialField, s: f64) -> Result<f64> {
        let spec = self.plan.forward(f)?;
        Ok(spec.weighted_square(s)?.sqrt())
    }

    /// `||f||_{H^s}`, by stencils at integer `s`, by the transform otherwise.
    pub fn hs_mixed(&self, f: &RadialField, s: f64) -> Result<f64> {
        match is_integer(s) {
            Some(k) => Ok(integer_norm_squared(f, k)?.sqrt()),
            None => self.hs(f, s),
        }
    }

    /// `(||psi1||_{H^s}^2 + ||psi1||_{H^k}^2 + ||psi2||_{H^{s-1}}^2 + ||psi2||_{H^{k-1}}^2)^{1/2}`.
    pub fn hsk(&self, state: &State, spec: &NormSpec) -> Result<f64> {
        state.require_even()?;
        let a = self.hs_mixed(&state.psi1, spec.s)?;
        let b = integer_norm_squared(&state.psi1, spec.k)?;
        let c = self.hs_mixed(&state.psi2, spec.s - 1.0)?;
        let d = integer_norm_squared(&state.psi2, spec.k - 1)?;
        Ok((a * a + b + c * c + d).sqrt())
    }

    /// `||f||_{H^a \cap H^b}`.
    pub fn intersection(&self, f: &RadialField, a: f64, b: f64) -> Result<f64> {
        let x = self.hs_mixed(f, a)?;
        let y = self.hs_mixed(f, b)?;
        Ok((x * x + y * y).sqrt())
    }
}

/// `||f||_{H^s}` through the transform on the standard wavenumber grid.
pub fn hs_norm(f: &RadialField, s: f64) -> Result<f64> {
    SobolevNorms::for_grid(f.grid())?.hs(f, s)
}

/// The `H_{s,k}` norm of a state over the whole grid.
pub fn hsk_norm(state: &State, spec: &NormSpec) -> Result<f64> {
    if state.grid().n() != spec.n {
        return Err(LabError::Contract("norm dimension differs from grid dimension".into()));
    }
    SobolevNorms::for_grid(state.grid())?.hsk(state, spec)
}

/// Smooth cutoff equal to 1 on `[0, 1]` and 0 beyond 2.
pub fn lightcone_cutoff(rho: f64) -> f64 {
    let bump = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let r = rho.abs();
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = bump(2.0 - r);
        a / (a + bump(r - 1.0))
    }
}

/// The `H_{s,k}` norm of a state localized to the backward light cone by
/// the smooth cutoff, with a transform plan restricted to its support.
pub struct LightconeNorm {
    norms: SobolevNorms,
    spec: NormSpec,
    chi: Vec<f64>,
}

impl LightconeNorm {
    pub fn new(grid: &Arc<RadialGrid>, spec: NormSpec) -> Result<Self> {
        if grid.n() != spec.n {
            return Err(LabError::Contract("norm dimension differs from grid dimension".into()));
        }
        let plan = HankelPlan::new(grid, Arc::new(WavenumberGrid::standard()), 2.0)?;
        let chi = grid.nodes().iter().map(|&r| lightcone_cutoff(r)).collect();
        Ok(Self { norms: SobolevNorms::new(plan), spec, chi })
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn localize(&self, f: &RadialField) -> Result<RadialField> {
        let values = f.values().iter().zip(&self.chi).map(|(a, b)| a * b).collect();
        RadialField::new(Arc::clone(f.grid()), values, Parity::Even)
    }

    pub fn hsk(&self, state: &State) -> Result<f64> {
        let loc = State::new(self.localize(&state.psi1)?, self.localize(&state.psi2)?)?;
        self.norms.hsk(&loc, &self.spec)
    }

    /// `||chi f||_{H^s}`.
    pub fn hs(&self, f: &RadialField, s: f64) -> Result<f64> {
        self.norms.hs_mixed(&self.localize(f)?, s)
    }
}
