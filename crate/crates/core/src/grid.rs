//! Uniform radial mesh on `[0, R]` and 4th-order finite-difference operators.
//!
//! Even fields are reflected through the origin with ghost values
//! `f(-rho_k) = f(rho_k)`; the two outermost nodes use one-sided stencils that
//! only look inward, which is the upwind choice for the outflow boundary of
//! the similarity system.

use std::sync::Arc;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n: usize,
    r_max: f64,
    m: usize,
    h: f64,
}

/// Builds a similarity-space grid. The domain must contain the backward
/// light cone `rho <= 1` with a margin, hence `R >= 2`.
pub fn make_grid(n: usize, r_max: f64, m: usize) -> Result<Arc<RadialGrid>> {
    if n < 5 {
        return Err(LabError::Config(format!("dimension n = {n} must be at least 5")));
    }
    if !(r_max >= 2.0) || !r_max.is_finite() {
        return Err(LabError::Config(format!(
            "outer radius R = {r_max} must be at least 2 (light cone plus margin)"
        )));
    }
    if m < 16 {
        return Err(LabError::Config(format!("cell count m = {m} must be at least 16")));
    }
    Ok(Arc::new(RadialGrid { n, r_max, m, h: r_max / m as f64 }))
}

impl RadialGrid {
    /// Grid without the light-cone requirement, used for physical-space
    /// samples whose extent shrinks like `T - t`.
    pub fn physical(n: usize, r_max: f64, m: usize) -> Result<Arc<RadialGrid>> {
        if n < 1 || !(r_max > 0.0) || !r_max.is_finite() || m < 16 {
            return Err(LabError::Config(format!(
                "invalid physical grid (n = {n}, R = {r_max}, m = {m})"
            )));
        }
        Ok(Arc::new(RadialGrid { n, r_max, m, h: r_max / m as f64 }))
    }

    /// Physical grid with this grid's spacing and `cells` cells, so that at
    /// unit scale its nodes coincide with ours.
    pub fn extended(&self, cells: usize) -> Result<Arc<RadialGrid>> {
        if cells < self.m {
            return Err(LabError::Config(format!("extension to {cells} cells is shorter than {}", self.m)));
        }
        Ok(Arc::new(RadialGrid { n: self.n, r_max: self.h * cells as f64, m: cells, h: self.h }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn cells(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn rho(&self, i: usize) -> f64 {
        if i == self.m {
            self.r_max
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.m).map(|i| self.rho(i)).collect()
    }

    /// Index of the last node with `rho <= r`.
    pub fn index_at_or_below(&self, r: f64) -> usize {
        let i = (r / self.h + 1e-9).floor();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.m)
        }
    }

    /// Samples a closed-form function on the nodes.
    pub fn sample(self: &Arc<Self>, parity: Parity, f: impl Fn(f64) -> f64) -> RadialField {
        let values = (0..=self.m).map(|i| f(self.rho(i))).collect();
        let mut field = RadialField { grid: Arc::clone(self), values, parity };
        if parity == Parity::Odd {
            field.values[0] = 0.0;
        }
        field
    }

    pub fn zeros(self: &Arc<Self>) -> RadialField {
        RadialField { grid: Arc::clone(self), values: vec![0.0; self.m + 1], parity: Parity::Even }
    }

    /// Writes `rho * f'` into `out`.
    pub fn lambda_into(&self, f: &[f64], parity: Parity, out: &mut [f64]) {
        let m = self.m;
        let inv = 1.0 / (12.0 * self.h);
        let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
        let ghost = |k: usize| sign * f[k];
        out[0] = 0.0;
        // i = 1: f_{-1} is a reflected ghost
        out[1] = self.rho(1) * (ghost(1) - 8.0 * f[0] + 8.0 * f[2] - f[3]) * inv;
        for i in 2..m - 1 {
            out[i] = self.rho(i) * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * inv;
        }
        out[m - 1] = self.rho(m - 1) * d1_offset(f, m - 1) * inv;
        out[m] = self.rho(m) * d1_edge(f, m) * inv;
    }

    /// Writes the radial Laplacian `f'' + (n-1)/rho f'` of an even field into `out`.
    pub fn laplacian_into(&self, f: &[f64], out: &mut [f64]) {
        let m = self.m;
        let h = self.h;
        let i12h = 1.0 / (12.0 * h);
        let i12h2 = 1.0 / (12.0 * h * h);
        let nm1 = (self.n - 1) as f64;
        out[0] = self.n as f64 * (-2.0 * f[2] + 32.0 * f[1] - 30.0 * f[0]) * i12h2;
        {
            let (fm2, fm1) = (f[1], f[0]);
            let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f[1] + 16.0 * f[2] - f[3]) * i12h2;
            let d1 = (fm2 - 8.0 * fm1 + 8.0 * f[2] - f[3]) * i12h;
            out[1] = d2 + nm1 / h * d1;
        }
        for i in 2..m - 1 {
            let d2 = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * i12h2;
            let d1 = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * i12h;
            out[i] = d2 + nm1 / self.rho(i) * d1;
        }
        let i = m - 1;
        out[i] = d2_offset(f, i) * i12h2 + nm1 / self.rho(i) * d1_offset(f, i) * i12h;
        let i = m;
        out[i] = d2_edge(f, i) * i12h2 + nm1 / self.rho(i) * d1_edge(f, i) * i12h;
    }

    /// Writes `f'` into `out` (odd output for even input).
    pub fn derivative_into(&self, f: &[f64], parity: Parity, out: &mut [f64]) {
        let m = self.m;
        let inv = 1.0 / (12.0 * self.h);
        let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
        out[0] = match parity {
            Parity::Even => 0.0,
            Parity::Odd => (16.0 * f[1] - 2.0 * f[2]) * inv,
        };
        out[1] = (sign * f[1] - 8.0 * f[0] + 8.0 * f[2] - f[3]) * inv;
        for i in 2..m - 1 {
            out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * inv;
        }
        out[m - 1] = d1_offset(f, m - 1) * inv;
        out[m] = d1_edge(f, m) * inv;
    }

    /// Even-field second derivative, used by the Taylor fit at the origin.
    pub fn second_derivative_into(&self, f: &[f64], out: &mut [f64]) {
        let m = self.m;
        let i12h2 = 1.0 / (12.0 * self.h * self.h);
        out[0] = (-2.0 * f[2] + 32.0 * f[1] - 30.0 * f[0]) * i12h2;
        out[1] = (-f[1] + 16.0 * f[0] - 30.0 * f[1] + 16.0 * f[2] - f[3]) * i12h2;
        for i in 2..m - 1 {
            out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * i12h2;
        }
        out[m - 1] = d2_offset(f, m - 1) * i12h2;
        out[m] = d2_edge(f, m) * i12h2;
    }

    /// Four-point Lagrange interpolation with the window clamped to `[0, m]`.
    pub fn interpolate_slice(&self, f: &[f64], rho: f64) -> Result<f64> {
        if !(rho >= 0.0) || rho > self.r_max * (1.0 + 1e-12) {
            return Err(LabError::Domain(format!(
                "interpolation point {rho} outside [0, {}]",
                self.r_max
            )));
        }
        Ok(self.interp_unchecked(f, rho.min(self.r_max)))
    }

    /// Interpolation without the range check; `rho` is clamped to `[0, R]`.
    pub fn interp_unchecked_pub(&self, f: &[f64], rho: f64) -> f64 {
        self.interp_unchecked(f, rho.clamp(0.0, self.r_max))
    }

    pub(crate) fn interp_unchecked(&self, f: &[f64], rho: f64) -> f64 {
        let x = rho / self.h;
        let cell = (x.floor() as isize).clamp(0, self.m as isize - 1);
        let start = (cell - 1).clamp(0, self.m as isize - 3) as usize;
        let t = x - start as f64;
        // nodes at offsets 0..3 relative to start
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        l0 * f[start] + l1 * f[start + 1] + l2 * f[start + 2] + l3 * f[start + 3]
    }
}

#[inline]
fn d1_offset(f: &[f64], i: usize) -> f64 {
    3.0 * f[i + 1] + 10.0 * f[i] - 18.0 * f[i - 1] + 6.0 * f[i - 2] - f[i - 3]
}

#[inline]
fn d1_edge(f: &[f64], i: usize) -> f64 {
    25.0 * f[i] - 48.0 * f[i - 1] + 36.0 * f[i - 2] - 16.0 * f[i - 3] + 3.0 * f[i - 4]
}

#[inline]
fn d2_offset(f: &[f64], i: usize) -> f64 {
    10.0 * f[i + 1] - 15.0 * f[i] - 4.0 * f[i - 1] + 14.0 * f[i - 2] - 6.0 * f[i - 3] + f[i - 4]
}

#[inline]
fn d2_edge(f: &[f64], i: usize) -> f64 {
    45.0 * f[i] - 154.0 * f[i - 1] + 214.0 * f[i - 2] - 156.0 * f[i - 3] + 61.0 * f[i - 4]
        - 10.0 * f[i - 5]
}

/// Samples of a radial function on a grid, tagged with their reflection parity.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    parity: Parity,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, parity: Parity) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::Contract(format!(
                "field has {} samples, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if parity == Parity::Odd && values[0] != 0.0 {
            return Err(LabError::Contract("odd field must vanish at the origin".into()));
        }
        Ok(Self { grid, values, parity })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn scaled(&self, c: f64) -> RadialField {
        RadialField {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| c * v).collect(),
            parity: self.parity,
        }
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> RadialField {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(self.grid.rho(i), v)).collect();
        RadialField { grid: Arc::clone(&self.grid), values, parity: self.parity }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Nodewise product; the parity of the result follows the usual sign rule.
    pub fn product(&self, other: &RadialField) -> Result<RadialField> {
        same_grid(self, other)?;
        let parity = if self.parity == other.parity { Parity::Even } else { Parity::Odd };
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(RadialField { grid: Arc::clone(&self.grid), values, parity })
    }

    pub fn interpolate(&self, rho: f64) -> Result<f64> {
        self.grid.interpolate_slice(&self.values, rho)
    }
}

pub(crate) fn same_grid(a: &RadialField, b: &RadialField) -> Result<()> {
    if Arc::ptr_eq(&a.grid, &b.grid) || *a.grid == *b.grid {
        Ok(())
    } else {
        Err(LabError::Contract("fields live on different grids".into()))
    }
}

/// Radial Laplacian of an even field.
pub fn apply_laplacian(f: &RadialField) -> Result<RadialField> {
    if f.parity != Parity::Even {
        return Err(LabError::Contract("the radial Laplacian needs an even field".into()));
    }
    let mut out = vec![0.0; f.values.len()];
    f.grid.laplacian_into(&f.values, &mut out);
    Ok(RadialField { grid: Arc::clone(&f.grid), values: out, parity: Parity::Even })
}

/// Scaling operator `rho * d/drho`; preserves parity.
pub fn apply_lambda(f: &RadialField) -> RadialField {
    let mut out = vec![0.0; f.values.len()];
    f.grid.lambda_into(&f.values, f.parity, &mut out);
    RadialField { grid: Arc::clone(&f.grid), values: out, parity: f.parity }
}

/// Radial derivative; flips parity.
pub fn apply_derivative(f: &RadialField) -> RadialField {
    let mut out = vec![0.0; f.values.len()];
    f.grid.derivative_into(&f.values, f.parity, &mut out);
    let parity = match f.parity {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
    };
    if parity == Parity::Odd {
        out[0] = 0.0;
    }
    RadialField { grid: Arc::clone(&f.grid), values: out, parity }
}

pub fn interpolate(f: &RadialField, rho: f64) -> Result<f64> {
    f.interpolate(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, m: usize) -> Arc<RadialGrid> {
        make_grid(n, 4.0, m).unwrap()
    }

    #[test]
    fn extended_grid_shares_nodes() {
        let g = grid(5, 64);
        let e = g.extended(77).unwrap();
        assert_eq!(e.h(), g.h());
        assert!((0..=64).all(|i| e.rho(i) == g.rho(i)));
        assert!(g.extended(10).is_err());
    }

    #[test]
    fn grid_arithmetic() {
        let g = make_grid(5, 4.0, 400).unwrap();
        assert!((g.h() - 0.01).abs() < 1e-15);
        assert_eq!(g.len(), 401);
        assert_eq!(g.rho(0), 0.0);
        let g = make_grid(7, 2.0, 100).unwrap();
        assert!((g.h() - 0.02).abs() < 1e-15);
        assert!(matches!(make_grid(5, 0.5, 100), Err(LabError::Config(_))));
        assert!(matches!(make_grid(4, 4.0, 100), Err(LabError::Config(_))));
        assert!(matches!(make_grid(5, 4.0, 8), Err(LabError::Config(_))));
    }

    #[test]
    fn laplacian_polynomial_exactness() {
        let g = grid(5, 64);
        let n = 5.0;
        // p = 1 + rho^2 - 0.3 rho^4, Delta p = 2n - 0.3 * 4 (n + 2) rho^2
        let f = g.sample(Parity::Even, |r| 1.0 + r * r - 0.3 * r.powi(4));
        let lf = apply_laplacian(&f).unwrap();
        for i in 0..g.len() {
            let r = g.rho(i);
            let exact = 2.0 * n - 1.2 * (n + 2.0) * r * r;
            assert!((lf.values()[i] - exact).abs() < 1e-8 * (1.0 + exact.abs()), "node {i}");
        }
        let c = g.sample(Parity::Even, |_| 3.0);
        assert!(apply_laplacian(&c).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn lambda_polynomial_exactness() {
        let g = grid(6, 64);
        let f = g.sample(Parity::Even, |r| r * r + 0.5 * r.powi(4));
        let lf = apply_lambda(&f);
        for i in 0..g.len() {
            let r = g.rho(i);
            let exact = 2.0 * r * r + 2.0 * r.powi(4);
            assert!((lf.values()[i] - exact).abs() < 1e-9 * (1.0 + exact.abs()), "node {i}");
        }
    }

    #[test]
    fn boundary_stencils_exact_for_quartics() {
        // one-sided stencils are exact for polynomials of degree 4
        let g = grid(5, 32);
        let p = |r: f64| 0.7 - r + 2.0 * r * r - 0.4 * r.powi(3) + 0.1 * r.powi(4);
        let dp = |r: f64| -1.0 + 4.0 * r - 1.2 * r * r + 0.4 * r.powi(3);
        let d2p = |r: f64| 4.0 - 2.4 * r + 1.2 * r * r;
        let f: Vec<f64> = g.nodes().iter().map(|&r| p(r)).collect();
        let m = g.cells();
        let h = g.h();
        for i in [m - 1, m] {
            let r = g.rho(i);
            let d1 = if i == m { d1_edge(&f, i) } else { d1_offset(&f, i) } / (12.0 * h);
            let d2 = if i == m { d2_edge(&f, i) } else { d2_offset(&f, i) } / (12.0 * h * h);
            assert!((d1 - dp(r)).abs() < 1e-9, "d1 at {i}");
            assert!((d2 - d2p(r)).abs() < 1e-7, "d2 at {i}: {d2} vs {}", d2p(r));
        }
    }

    #[test]
    fn laplacian_fourth_order_on_gaussian() {
        let n = 5.0;
        let err = |m: usize| {
            let g = grid(5, m);
            let f = g.sample(Parity::Even, |r| (-r * r).exp());
            let lf = apply_laplacian(&f).unwrap();
            (0..g.len())
                .map(|i| {
                    let r = g.rho(i);
                    let exact = (4.0 * r * r - 2.0 * n) * (-r * r).exp();
                    (lf.values()[i] - exact).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(100), err(200));
        assert!(e1 / e2 >= 12.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn lambda_fourth_order_on_gaussian() {
        let err = |m: usize| {
            let g = grid(5, m);
            let f = g.sample(Parity::Even, |r| (-r * r).exp());
            let lf = apply_lambda(&f);
            (0..g.len())
                .map(|i| {
                    let r = g.rho(i);
                    (lf.values()[i] + 2.0 * r * r * (-r * r).exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(100), err(200));
        assert!(e1 / e2 >= 12.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn laplacian_rejects_odd_fields() {
        let g = grid(5, 32);
        let f = g.sample(Parity::Odd, |r| r);
        assert!(matches!(apply_laplacian(&f), Err(LabError::Contract(_))));
    }

    #[test]
    fn interpolation_exact_for_cubics() {
        let g = make_grid(5, 4.0, 400).unwrap();
        let f = g.sample(Parity::Odd, |r| r.powi(3));
        let v = f.interpolate(0.015).unwrap();
        assert!((v - 3.375e-6).abs() < 1e-18);
        let v = f.interpolate(3.9951).unwrap();
        assert!((v - 3.9951f64.powi(3)).abs() < 1e-11);
        assert!(f.interpolate(4.1).is_err());
        assert!(f.interpolate(-0.1).is_err());
    }

    #[test]
    fn interpolation_reproduces_nodes_and_converges() {
        let g = make_grid(5, 4.0, 100).unwrap();
        let f = g.sample(Parity::Even, |r| (-r).exp());
        for i in [0usize, 7, 50, 100] {
            assert_eq!(f.interpolate(g.rho(i)).unwrap(), f.values()[i]);
        }
        let err = |m: usize| {
            let g = make_grid(5, 4.0, m).unwrap();
            let f = g.sample(Parity::Even, |r| (-r).exp());
            (0..97).map(|j| 0.0123 + j as f64 * 0.0411)
                .map(|r| (f.interpolate(r).unwrap() - (-r).exp()).abs())
                .fold(0.0, f64::max)
        };
        assert!(err(100) / err(200) > 12.0);
    }

    #[test]
    fn derivative_of_even_field_is_odd() {
        let g = grid(5, 200);
        let f = g.sample(Parity::Even, |r| (-r * r).exp());
        let d = apply_derivative(&f);
        assert_eq!(d.parity(), Parity::Odd);
        for i in 0..g.len() {
            let r = g.rho(i);
            assert!((d.values()[i] + 2.0 * r * (-r * r).exp()).abs() < 1e-6);
        }
    }
}
