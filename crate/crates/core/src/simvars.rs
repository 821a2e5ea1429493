//! Maps between physical variables `(t, r, v, v_t)` and similarity variables
//! `tau = ln(T/(T-t))`, `rho = r/(T-t)`, `psi1 = (T-t) v`, `psi2 = (T-t)^2 v_t`.
//!
//! The second component follows from `psi2 = (d_tau + Lambda + 1) psi1` and
//! the chain rule `d_t = e^tau/T (d_tau + Lambda)`.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{same_grid, Parity, RadialField, RadialGrid};
use crate::profiles::{phi, phi1, ProfileParams};
use crate::state::State;

/// Relative distance beyond the sampled radius that may be filled by the tail model.
pub const MAX_TAIL_EXTENSION: f64 = 0.05;

/// Physical Cauchy data `(v, d_t v)` at one instant, sampled on a physical grid.
#[derive(Debug, Clone)]
pub struct PhysicalPair {
    pub v0: RadialField,
    pub v1: RadialField,
}

impl PhysicalPair {
    pub fn new(v0: RadialField, v1: RadialField) -> Result<Self> {
        same_grid(&v0, &v1)?;
        if v0.parity() != Parity::Even || v1.parity() != Parity::Even {
            return Err(LabError::Contract("physical data must be even".into()));
        }
        Ok(Self { v0, v1 })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.v0.grid()
    }
}

/// Power-law decay model `f(r) = f(R) (r/R)^e` used just beyond the sampled
/// radius, with `e = s - n/2 - 1` for the field and one less for its time
/// derivative.
#[derive(Debug, Clone, Copy)]
pub struct TailModel {
    pub s: f64,
}

impl TailModel {
    pub fn for_dimension(n: usize) -> Self {
        let nf = n as f64;
        Self { s: nf / 2.0 - 1.0 + 1.0 / (4.0 * (nf - 2.0)) }
    }

    fn exponent(&self, n: usize, component: usize) -> f64 {
        self.s - n as f64 / 2.0 - 1.0 - component as f64
    }
}

fn resample(f: &RadialField, r: f64, tail: &TailModel, component: usize) -> Result<f64> {
    let grid = f.grid();
    let r_max = grid.r_max();
    if r <= r_max {
        return f.interpolate(r);
    }
    if r > r_max * (1.0 + MAX_TAIL_EXTENSION) {
        return Err(LabError::Domain(format!(
            "resampling at r = {r} is more than {}% beyond the sampled radius {r_max}",
            MAX_TAIL_EXTENSION * 100.0
        )));
    }
    let edge = f.values()[grid.cells()];
    Ok(edge * (r / r_max).powf(tail.exponent(grid.n(), component)))
}

/// Returns `(tau, scale)` with `scale = 1/(T - t)`.
pub fn coords_to_similarity(t: f64, big_t: f64) -> Result<(f64, f64)> {
    if !(big_t > 0.0) || !(t >= 0.0) || t >= big_t {
        return Err(LabError::Domain(format!("need 0 <= t < T, got t = {t}, T = {big_t}")));
    }
    Ok(((big_t / (big_t - t)).ln(), 1.0 / (big_t - t)))
}

/// Similarity state of physical data given at time `t` for blowup time `T`.
pub fn fields_to_similarity(
    p: &PhysicalPair,
    t: f64,
    big_t: f64,
    grid: &Arc<RadialGrid>,
    tail: &TailModel,
) -> Result<State> {
    let (_, scale) = coords_to_similarity(t, big_t)?;
    let l = 1.0 / scale;
    scaled_resample(p, l, grid, tail)
}

fn scaled_resample(p: &PhysicalPair, l: f64, grid: &Arc<RadialGrid>, tail: &TailModel) -> Result<State> {
    let mut psi1 = grid.zeros();
    let mut psi2 = grid.zeros();
    for i in 0..grid.len() {
        let r = l * grid.rho(i);
        psi1.values_mut()[i] = l * resample(&p.v0, r, tail, 0)?;
        psi2.values_mut()[i] = l * l * resample(&p.v1, r, tail, 1)?;
    }
    State::new(psi1, psi2)
}

/// Perturbation data `(T v0(T .) - phi, T^2 v1(T .) - phi1)` for trial blowup time `T`.
pub fn initial_data_u(
    p: &PhysicalPair,
    big_t: f64,
    grid: &Arc<RadialGrid>,
    params: &ProfileParams,
    tail: &TailModel,
) -> Result<State> {
    if !(big_t > 0.0) {
        return Err(LabError::Domain(format!("blowup time must be positive, got {big_t}")));
    }
    let mut s = scaled_resample(p, big_t, grid, tail)?;
    for i in 0..grid.len() {
        let r = grid.rho(i);
        s.psi1.values_mut()[i] -= phi(r, params);
        s.psi2.values_mut()[i] -= phi1(r, params);
    }
    Ok(s)
}

/// Physical data at `t = T(1 - e^{-tau})` reconstructed from a similarity state.
/// The physical grid has radius `(T - t) R` and the same node count.
pub fn from_similarity(s: &State, tau: f64, big_t: f64) -> Result<(PhysicalPair, f64)> {
    if !(tau >= 0.0) || !(big_t > 0.0) {
        return Err(LabError::Domain(format!("need tau >= 0 and T > 0, got {tau}, {big_t}")));
    }
    let l = big_t * (-tau).exp();
    let t = big_t - l;
    let g = s.grid();
    let pg = RadialGrid::physical(g.n(), l * g.r_max(), g.cells())?;
    let v0: Vec<f64> = s.psi1.values().iter().map(|v| v / l).collect();
    let v1: Vec<f64> = s.psi2.values().iter().map(|v| v / (l * l)).collect();
    let pair = PhysicalPair::new(
        RadialField::new(Arc::clone(&pg), v0, Parity::Even)?,
        RadialField::new(pg, v1, Parity::Even)?,
    )?;
    Ok((pair, t))
}

/// Cauchy data at `t = 0` of the self-similar solution blowing up at `T*`:
/// `v0 = phi(r/T*)/T*`, `v1 = phi1(r/T*)/T*^2`.
pub fn exact_blowup_data(t_star: f64, grid: &Arc<RadialGrid>, params: &ProfileParams) -> Result<PhysicalPair> {
    if !(t_star > 0.0) {
        return Err(LabError::Domain(format!("blowup time must be positive, got {t_star}")));
    }
    PhysicalPair::new(
        grid.sample(Parity::Even, |r| phi(r / t_star, params) / t_star),
        grid.sample(Parity::Even, |r| phi1(r / t_star, params) / (t_star * t_star)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::profiles::{gauge_mode, static_state};
    use std::f64::consts::E;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn similarity_coordinates() {
        let (tau, sc) = coords_to_similarity(0.0, 1.0).unwrap();
        assert!(close(tau, 0.0, 1e-15) && close(sc, 1.0, 1e-15));
        let (tau, sc) = coords_to_similarity(1.0 - (-1.0f64).exp(), 1.0).unwrap();
        assert!(close(tau, 1.0, 1e-14) && close(sc, E, 1e-14));
        let (tau, sc) = coords_to_similarity(0.5, 1.0).unwrap();
        assert!(close(tau, 2f64.ln(), 1e-15) && close(sc, 2.0, 1e-15));
        assert!(matches!(coords_to_similarity(1.0, 1.0), Err(LabError::Domain(_))));
    }

    #[test]
    fn chain_rule_for_second_component() {
        // psi(tau, xi) = (T - t) v(t, (T - t) xi) with v = u_T; check that
        // (d_tau + Lambda + 1) psi equals (T - t)^2 d_t v at a sample point.
        let pp = ProfileParams::from_d(3).unwrap();
        let big_t = 1.3;
        let v = |t: f64, r: f64| phi(r / (big_t - t) * 0.9, &pp) * (1.0 + 0.2 * t) / (big_t - t);
        let psi = |tau: f64, xi: f64| {
            let l = big_t * (-tau).exp();
            l * v(big_t - l, l * xi)
        };
        let (tau, xi, h) = (0.4, 0.7, 1e-4);
        let d_tau = (psi(tau + h, xi) - psi(tau - h, xi)) / (2.0 * h);
        let lam = xi * (psi(tau, xi + h) - psi(tau, xi - h)) / (2.0 * h);
        let lhs = d_tau + lam + psi(tau, xi);
        let l = big_t * (-tau).exp();
        let t = big_t - l;
        let vt = (v(t + h, l * xi) - v(t - h, l * xi)) / (2.0 * h);
        assert!(close(lhs, l * l * vt, 1e-6), "{lhs} vs {}", l * l * vt);
    }

    #[test]
    fn exact_solution_maps_to_static_state() {
        let pp = ProfileParams::from_d(3).unwrap();
        let g = make_grid(5, 4.0, 400).unwrap();
        let stat = static_state(&g, &pp).unwrap();
        let tail = TailModel::for_dimension(5);
        for (big_t, t) in [(1.0, 0.0), (2.0, 0.0), (1.0, 0.6), (2.0, 1.5)] {
            // data of u_T at time t on a physical grid covering (T - t) R
            let l = big_t - t;
            let pg = RadialGrid::physical(5, l * 4.0 * 1.01, 800).unwrap();
            let p = PhysicalPair::new(
                pg.sample(Parity::Even, |r| phi(r / l, &pp) / l),
                pg.sample(Parity::Even, |r| phi1(r / l, &pp) / (l * l)),
            )
            .unwrap();
            let s = fields_to_similarity(&p, t, big_t, &g, &tail).unwrap();
            let d = s.axpy(-1.0, &stat).unwrap().max_abs();
            assert!(d < 1e-8, "T={big_t} t={t}: {d}");
        }
    }

    #[test]
    fn zero_data_maps_to_zero() {
        let g = make_grid(5, 4.0, 64).unwrap();
        let pg = RadialGrid::physical(5, 5.0, 64).unwrap();
        let p = PhysicalPair::new(pg.zeros(), pg.zeros()).unwrap();
        let tail = TailModel::for_dimension(5);
        assert_eq!(fields_to_similarity(&p, 0.0, 1.0, &g, &tail).unwrap().max_abs(), 0.0);
        let (back, t) = from_similarity(&State::zeros(&g), 0.7, 1.0).unwrap();
        assert_eq!(back.v0.max_abs() + back.v1.max_abs(), 0.0);
        assert!(close(t, 1.0 - (-0.7f64).exp(), 1e-15));
    }

    #[test]
    fn initial_data_map() {
        let pp = ProfileParams::from_d(3).unwrap();
        let g = make_grid(5, 4.0, 400).unwrap();
        let pg = make_grid(5, 5.0, 1000).unwrap();
        let tail = TailModel::for_dimension(5);
        let data = exact_blowup_data(1.0, &pg, &pp).unwrap();
        assert!(initial_data_u(&data, 1.0, &g, &pp, &tail).unwrap().max_abs() < 1e-15);

        let h = 1e-4;
        let u = initial_data_u(&data, 1.0 + h, &g, &pp, &tail).unwrap();
        let gm = gauge_mode(&g, &pp).unwrap().scaled(h * 2.0 * pp.a);
        let d = u.axpy(-1.0, &gm).unwrap().max_abs();
        assert!(d < 20.0 * h * h, "{d}");

        let eps = 1e-3;
        let chi = |r: f64| (-(r - 1.0) * (r - 1.0) / 0.1).exp() + (-(r + 1.0) * (r + 1.0) / 0.1).exp();
        let bumped = PhysicalPair::new(
            data.v0.map(|r, v| v + eps * chi(r)),
            data.v1.clone(),
        )
        .unwrap();
        let u = initial_data_u(&bumped, 1.0, &g, &pp, &tail).unwrap();
        for i in 0..g.len() {
            assert!(close(u.psi1.values()[i], eps * chi(g.rho(i)), 1e-15));
            assert!(u.psi2.values()[i].abs() < 1e-15);
        }
    }

    #[test]
    fn tail_extension_is_capped() {
        let pp = ProfileParams::from_d(3).unwrap();
        let g = make_grid(5, 4.0, 400).unwrap();
        let pg = make_grid(5, 4.0, 400).unwrap();
        let tail = TailModel::for_dimension(5);
        let data = exact_blowup_data(1.0, &pg, &pp).unwrap();
        assert!(initial_data_u(&data, 1.04, &g, &pp, &tail).is_ok());
        assert!(matches!(initial_data_u(&data, 1.06, &g, &pp, &tail), Err(LabError::Domain(_))));
    }

    #[test]
    fn static_state_reconstructs_self_similar_solution() {
        let pp = ProfileParams::from_d(3).unwrap();
        let g = make_grid(5, 4.0, 400).unwrap();
        let s = static_state(&g, &pp).unwrap();
        let (p, t) = from_similarity(&s, 1.2, 1.0).unwrap();
        let l = 1.0 - t;
        for (i, r) in p.grid().nodes().into_iter().enumerate() {
            assert!(close(p.v0.values()[i], phi(r / l, &pp) / l, 1e-12 / l));
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let g = make_grid(5, 4.0, 400).unwrap();
        let tail = TailModel::for_dimension(5);
        let s = State::new(
            g.sample(Parity::Even, |r| 1.0 + 0.5 * r * r - 0.1 * r.powi(3)),
            g.sample(Parity::Even, |r| 2.0 - r * r),
        )
        .unwrap();
        for (tau, big_t) in [(0.0, 1.0), (0.8, 0.9), (2.0, 1.1)] {
            let (p, t) = from_similarity(&s, tau, big_t).unwrap();
            let back = fields_to_similarity(&p, t, big_t, &g, &tail).unwrap();
            let d = back.axpy(-1.0, &s).unwrap().max_abs();
            assert!(d < 1e-10, "tau={tau}: {d}");
        }
    }
}
