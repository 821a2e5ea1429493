//! Closed-form ingredients of the similarity system: the self-similar
//! profile, the linearization potential, the nonlinearity and the gauge mode
//! generated by time translation of the blowup point.
//!
//! Removable singularities at `rho = 0` are evaluated through even Taylor
//! series so every function is finite and smooth through the origin.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{Parity, RadialGrid};
use crate::state::State;

/// Map-domain dimension `d` and the derived radial dimension `n = d + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimension {
    d: usize,
    n: usize,
}

impl Dimension {
    pub fn from_d(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(LabError::Config(format!("map dimension d = {d} must be at least 3")));
        }
        Ok(Self { d, n: d + 2 })
    }

    pub fn from_n(n: usize) -> Result<Self> {
        if n < 5 {
            return Err(LabError::Config(format!("dimension n = {n} must be at least 5")));
        }
        Self::from_d(n - 2)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    pub dim: Dimension,
    /// Profile scale `sqrt(n - 4)`.
    pub a: f64,
}

impl ProfileParams {
    pub fn new(dim: Dimension) -> Self {
        Self { dim, a: ((dim.n - 4) as f64).sqrt() }
    }

    pub fn from_n(n: usize) -> Result<Self> {
        Ok(Self::new(Dimension::from_n(n)?))
    }

    pub fn from_d(d: usize) -> Result<Self> {
        Ok(Self::new(Dimension::from_d(d)?))
    }

    pub fn n(&self) -> usize {
        self.dim.n
    }

    /// `n - 4 = a^2`, as an exact integer conversion.
    pub fn b(&self) -> f64 {
        (self.dim.n - 4) as f64
    }

    fn half_nm3(&self) -> f64 {
        0.5 * (self.dim.n - 3) as f64
    }
}

/// The blowup profile `(2/rho) arctan(rho/a)`.
pub fn phi(rho: f64, p: &ProfileParams) -> f64 {
    let x = rho / p.a;
    if x.abs() < 1e-3 {
        let x2 = x * x;
        2.0 / p.a * (1.0 - x2 / 3.0 + x2 * x2 / 5.0 - x2 * x2 * x2 / 7.0)
    } else {
        2.0 * x.atan() / rho
    }
}

/// `phi + Lambda phi = (rho phi)' = 2a / (rho^2 + a^2)`.
pub fn phi1(rho: f64, p: &ProfileParams) -> f64 {
    2.0 * p.a / (rho * rho + p.b())
}

/// `Lambda phi = rho phi'`, with its even series near the origin.
pub fn lambda_phi(rho: f64, p: &ProfileParams) -> f64 {
    let x = rho / p.a;
    if x.abs() < 0.1 {
        let x2 = x * x;
        let mut pow = x2;
        let mut sum = 0.0;
        for k in 1..=10 {
            let kf = k as f64;
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            sum += sign * 2.0 * kf * pow / (2.0 * kf + 1.0);
            pow *= x2;
        }
        2.0 / p.a * sum
    } else {
        phi1(rho, p) - phi(rho, p)
    }
}

/// Profile derivative `phi'`.
pub fn phi_prime(rho: f64, p: &ProfileParams) -> f64 {
    if rho.abs() < 1e-3 * p.a {
        let a3 = p.a * p.a * p.a;
        -4.0 * rho / (3.0 * a3) + 8.0 * rho.powi(3) / (5.0 * a3 * p.a * p.a)
    } else {
        lambda_phi(rho, p) / rho
    }
}

/// Linearization potential `8(n-4)(n-3) / (rho^2 + n - 4)^2`.
pub fn potential_v(rho: f64, p: &ProfileParams) -> f64 {
    let b = p.b();
    let den = rho * rho + b;
    8.0 * b * (p.n() as f64 - 3.0) / (den * den)
}

/// `eta(y) = 2y - sin(2y)` and its first three derivatives.
pub fn eta(y: f64, order: u8) -> Result<f64> {
    match order {
        0 => Ok(2.0 * y - (2.0 * y).sin()),
        1 => Ok(2.0 - 2.0 * (2.0 * y).cos()),
        2 => Ok(4.0 * (2.0 * y).sin()),
        3 => Ok(8.0 * (2.0 * y).cos()),
        _ => Err(LabError::Domain(format!("eta derivative order {order} not in 0..=3"))),
    }
}

/// `eta(y) / y^3`, even in `y`, equal to 4/3 at the origin.
pub fn eta_over_cube(y: f64) -> f64 {
    if y.abs() < 1.0 {
        // sum_{j>=1} (-1)^{j+1} 2^{2j+1} y^{2j-2} / (2j+1)!
        let y2 = y * y;
        let mut term = 8.0 / 6.0;
        let mut sum = term;
        for j in 2..=12 {
            let jf = j as f64;
            term *= -4.0 * y2 / ((2.0 * jf) * (2.0 * jf + 1.0));
            sum += term;
        }
        sum
    } else {
        (2.0 * y - (2.0 * y).sin()) / (y * y * y)
    }
}

/// `sin(x) / x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x.sin() / x
    }
}

/// Total-field nonlinearity `(n-3)/(2 rho^3) eta(rho psi1)`.
pub fn nonlin_n0(rho: f64, psi1: f64, p: &ProfileParams) -> f64 {
    p.half_nm3() * psi1 * psi1 * psi1 * eta_over_cube(rho * psi1)
}

/// Quadratic-and-higher remainder of the nonlinearity around the profile.
///
/// With `w = rho phi` and `z = rho u`, the remainder
/// `eta(w + z) - eta(w) - eta'(w) z` equals `2 sin(2w) sin^2(z) + cos(2w) eta(z)`
/// exactly, so after dividing by `rho^3` no cancellation is left.
pub fn nonlin_n(rho: f64, u1: f64, p: &ProfileParams) -> f64 {
    let ph = phi(rho, p);
    remainder_with_profile(rho, ph, u1, p)
}

pub(crate) fn remainder_with_profile(rho: f64, ph: f64, u1: f64, p: &ProfileParams) -> f64 {
    let w2 = 2.0 * rho * ph;
    let z = rho * u1;
    let sz = sinc(z);
    p.half_nm3() * u1 * u1 * (4.0 * ph * sinc(w2) * sz * sz + w2.cos() * u1 * eta_over_cube(z))
}

/// The gauge profile `g = 1/(rho^2 + n - 4)`.
pub fn gauge_g(rho: f64, p: &ProfileParams) -> f64 {
    1.0 / (rho * rho + p.b())
}

/// `Lambda g = -2 rho^2 / (rho^2 + n - 4)^2`.
pub fn lambda_gauge_g(rho: f64, p: &ProfileParams) -> f64 {
    let den = rho * rho + p.b();
    -2.0 * rho * rho / (den * den)
}

fn check_grid(grid: &RadialGrid, p: &ProfileParams) -> Result<()> {
    if grid.n() != p.n() {
        return Err(LabError::Contract(format!(
            "grid dimension {} differs from profile dimension {}",
            grid.n(),
            p.n()
        )));
    }
    Ok(())
}

/// The static solution `(phi, phi + Lambda phi)` sampled on the grid.
pub fn static_state(grid: &Arc<RadialGrid>, p: &ProfileParams) -> Result<State> {
    check_grid(grid, p)?;
    State::new(
        grid.sample(Parity::Even, |r| phi(r, p)),
        grid.sample(Parity::Even, |r| phi1(r, p)),
    )
}

/// The unstable eigenfunction `(g, Lambda g + 2 g)` belonging to eigenvalue 1.
pub fn gauge_mode(grid: &Arc<RadialGrid>, p: &ProfileParams) -> Result<State> {
    check_grid(grid, p)?;
    State::new(
        grid.sample(Parity::Even, |r| gauge_g(r, p)),
        grid.sample(Parity::Even, |r| lambda_gauge_g(r, p) + 2.0 * gauge_g(r, p)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn p(d: usize) -> ProfileParams {
        ProfileParams::from_d(d).unwrap()
    }

    /// Five-point Richardson-extrapolated central difference.
    fn num_deriv(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let d = |h: f64| (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        let (a, b) = (d(1e-3), d(5e-4));
        b + (b - a) / 15.0
    }

    #[test]
    fn profile_values() {
        assert!((phi(0.0, &p(3)) - 2.0).abs() < 1e-15);
        assert!((phi(1.0, &p(3)) - FRAC_PI_2).abs() < 1e-15);
        assert!((phi(2.0, &p(6)) - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(p(3).dim.n(), 5);
        assert!((p(7).a * p(7).a - 5.0).abs() < 1e-14);
    }

    #[test]
    fn profile_series_matches_direct_form() {
        for d in [3, 4, 5, 8] {
            let pp = p(d);
            for &r in &[9.9e-4 * pp.a, 1.01e-3 * pp.a, 0.05, 0.099 * pp.a, 0.101 * pp.a] {
                let direct = 2.0 * (r / pp.a).atan() / r;
                assert!((phi(r, &pp) - direct).abs() < 1e-14);
                let lp = -2.0 * (r / pp.a).atan() / r + 2.0 * pp.a / (r * r + pp.a * pp.a);
                assert!((lambda_phi(r, &pp) - lp).abs() < 1e-13, "d={d} r={r}");
            }
        }
    }

    #[test]
    fn static_state_against_numerical_derivative() {
        let g = make_grid(5, 4.0, 400).unwrap();
        let pp = p(3);
        let s = static_state(&g, &pp).unwrap();
        assert!((s.psi1.values()[0] - 2.0).abs() < 1e-15);
        assert!((s.psi2.values()[0] - 2.0).abs() < 1e-15);
        let i = 100; // rho = 1
        assert!((s.psi1.values()[i] - FRAC_PI_2).abs() < 1e-14);
        let oracle = FRAC_PI_2 + num_deriv(|r| 2.0 * r.atan() / r, 1.0);
        assert!((s.psi2.values()[i] - oracle).abs() < 1e-9);
        assert!((s.psi2.values()[i] - 1.0).abs() < 1e-14);
        // psi2 - psi1 = O(rho^2) near the origin
        for i in 1..5 {
            let r = g.rho(i);
            let diff = s.psi2.values()[i] - s.psi1.values()[i];
            assert!(diff.abs() <= 2.0 * r * r);
        }
    }

    #[test]
    fn potential_values() {
        let pp = p(3);
        assert!((potential_v(0.0, &pp) - 16.0).abs() < 1e-14);
        assert!((potential_v(1.0, &pp) - 4.0).abs() < 1e-14);
        let r = 1e4;
        assert!((potential_v(r, &pp) * r.powi(4) / 16.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn potential_is_derivative_of_n0_at_profile() {
        for d in [3, 4, 5] {
            let pp = p(d);
            for &r in &[0.0, 0.3, 1.0, 2.5] {
                let ph = phi(r, &pp);
                let dn = num_deriv(|u| nonlin_n0(r, u, &pp), ph);
                assert!((dn - potential_v(r, &pp)).abs() < 1e-8, "d={d} r={r}");
            }
        }
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(0.0, 0).unwrap(), 0.0);
        assert_eq!(eta(0.0, 3).unwrap(), 8.0);
        assert!((eta(FRAC_PI_2, 0).unwrap() - PI).abs() < 1e-15);
        assert!(matches!(eta(1.0, 4), Err(LabError::Domain(_))));
        for &y in &[0.3, 1.7] {
            for k in 0..3u8 {
                let dnum = num_deriv(|x| eta(x, k).unwrap(), y);
                assert!((dnum - eta(y, k + 1).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eta_over_cube_series_continuity() {
        for &y in &[0.999_999f64, 1.000_001, 0.5, 1e-3] {
            let direct = (2.0 * y - (2.0 * y).sin()) / (y * y * y);
            let tol = if y < 0.1 { 1e-6 } else { 1e-13 };
            assert!((eta_over_cube(y) - direct).abs() < tol, "y={y}");
        }
        assert!((eta_over_cube(0.0) - 4.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn n0_values() {
        let pp = p(3);
        let c = 1.3;
        assert!((nonlin_n0(0.0, c, &pp) - 4.0 / 3.0 * c * c * c).abs() < 1e-14);
        assert_eq!(nonlin_n0(0.7, 0.0, &pp), 0.0);
        assert!((nonlin_n0(1.0, FRAC_PI_2, &pp) - PI).abs() < 1e-14);
    }

    #[test]
    fn remainder_values() {
        let pp = p(3);
        for &r in &[0.0, 0.4, 1.0, 3.0] {
            assert_eq!(nonlin_n(r, 0.0, &pp), 0.0);
        }
        let (r, u) = (1.0, 0.1);
        let lhs = nonlin_n0(r, phi(r, &pp) + u, &pp) - nonlin_n0(r, phi(r, &pp), &pp) - potential_v(r, &pp) * u;
        assert!((lhs - nonlin_n(r, u, &pp)).abs() < 1e-14);
    }

    /// Independent oracle: Taylor remainder in integral form,
    /// `z^2 int_0^1 (1 - t) eta''(w + t z) dt`, by Gauss-Legendre quadrature.
    fn remainder_oracle(r: f64, u: f64, pp: &ProfileParams) -> f64 {
        let w = r * phi(r, pp);
        let gl = gauss_quad::GaussLegendre::new(40.try_into().unwrap());
        let integral = gl.integrate(0.0, 1.0, |t| (1.0 - t) * 4.0 * (2.0 * (w + t * r * u)).sin());
        0.5 * (pp.n() - 3) as f64 * u * u * integral / r
    }

    #[test]
    fn remainder_matches_integral_form() {
        for d in [3, 5] {
            let pp = p(d);
            for &r in &[0.01, 0.2, 0.9, 1.5, 3.7] {
                for &u in &[-0.8, -1e-3, 1e-8, 0.05, 0.6] {
                    let a = nonlin_n(r, u, &pp);
                    let b = remainder_oracle(r, u, &pp);
                    assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "d={d} r={r} u={u}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn remainder_is_quadratically_small() {
        let g = make_grid(5, 4.0, 400).unwrap();
        let pp = p(3);
        let u = 1e-8;
        let c = g.nodes().iter().map(|&r| nonlin_n(r, u, &pp).abs() / (u * u)).fold(0.0, f64::max);
        assert!(c < 20.0, "C = {c}");
    }

    #[test]
    fn gauge_values() {
        let pp = p(3);
        let g = make_grid(5, 4.0, 400).unwrap();
        let s = gauge_mode(&g, &pp).unwrap();
        assert!((s.psi1.values()[0] - 1.0).abs() < 1e-15);
        assert!((s.psi2.values()[0] - 2.0).abs() < 1e-15);
        assert!((s.psi1.values()[100] - 0.5).abs() < 1e-15);
        assert!((s.psi2.values()[100] - 0.5).abs() < 1e-15);
        let lg = num_deriv(|r| gauge_g(r, &pp), 1.3) * 1.3;
        assert!((lg - lambda_gauge_g(1.3, &pp)).abs() < 1e-10);
        let wrong = make_grid(7, 4.0, 400).unwrap();
        assert!(gauge_mode(&wrong, &pp).is_err());
    }

    #[test]
    fn time_translation_generates_gauge_mode() {
        // d/dT (T phi(T rho), T^2 phi1(T rho)) at T = 1 equals 2a (g, Lambda g + 2g)
        for d in [3, 4, 5] {
            let pp = p(d);
            for &r in &[0.0, 0.5, 1.0, 2.0, 3.5] {
                let d1 = num_deriv(|t| t * phi(t * r, &pp), 1.0);
                let d2 = num_deriv(|t| t * t * phi1(t * r, &pp), 1.0);
                let g = gauge_g(r, &pp);
                assert!((d1 - 2.0 * pp.a * g).abs() < 1e-9);
                assert!((d2 - 2.0 * pp.a * (lambda_gauge_g(r, &pp) + 2.0 * g)).abs() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn linearization_identity(d in 3usize..8, r in 0.0f64..4.0, u in -1.0f64..1.0) {
            let pp = p(d);
            let ph = phi(r, &pp);
            let lhs = nonlin_n0(r, ph + u, &pp) - nonlin_n0(r, ph, &pp) - potential_v(r, &pp) * u;
            prop_assert!((lhs - nonlin_n(r, u, &pp)).abs() <= 1e-12);
        }

        #[test]
        fn closed_forms_are_even(d in 3usize..9, r in 0.0f64..5.0, c in -2.0f64..2.0) {
            let pp = p(d);
            prop_assert!((phi(r, &pp) - phi(-r, &pp)).abs() < 1e-15);
            prop_assert_eq!(potential_v(r, &pp), potential_v(-r, &pp));
            prop_assert_eq!(gauge_g(r, &pp), gauge_g(-r, &pp));
            prop_assert!((nonlin_n0(r, c, &pp) - nonlin_n0(-r, c, &pp)).abs() < 1e-15);
        }
    }
}
