//! Variation-of-constants solution of the radial resolvent equation
//!
//! `(1 - r^2) v'' + ((n-1)/r - (n+2) r) v' - (n/2)(n/2+1) v = h(r)`
//!
//! for `h` supported in `r < 0.9`. The homogeneous branches analytic at
//! `r = 0` and at `r = 1` are continued along the axis by Taylor patches;
//! their Wronskian is `c (1 - r^2)^{-3/2} r^{1-n}`.

use gauss_quad::GaussLegendre;

use super::frobenius::{frobenius_coefficients, AnalyticChain, Patch, PolyOde};
use crate::error::{LabError, Result};

/// Right end of the admissible support of `h`.
pub const SUPPORT_LIMIT: f64 = 0.9;
/// Below this radius the solution is interpolated in `r^2` from its value
/// at the origin.
const NEAR_ORIGIN: f64 = 1e-3;
const FAR_END: f64 = 2.1;
const PANEL_WIDTH: f64 = 0.0125;
const PANEL_NODES: usize = 12;
const SAMPLES: usize = 401;

type Source = Box<dyn Fn(f64) -> f64 + Send + Sync>;

pub struct ResolventSolution {
    n: usize,
    h: Source,
    v0: AnalyticChain,
    v1: AnalyticChain,
    wronskian_c: f64,
    i0_total: f64,
    v_origin: f64,
    v_near: f64,
    rule: GaussLegendre,
    samples: Vec<(f64, f64)>,
}

impl std::fmt::Debug for ResolventSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResolventSolution")
            .field("n", &self.n)
            .field("wronskian_c", &self.wronskian_c)
            .field("samples", &self.samples.len())
            .finish()
    }
}

/// The homogeneous operator multiplied through by `r`.
fn homogeneous(n: usize) -> PolyOde<f64> {
    let nf = n as f64;
    PolyOde {
        p2: vec![0.0, 1.0, 0.0, -1.0],
        p1: vec![nf - 1.0, 0.0, -(nf + 2.0)],
        p0: vec![0.0, -(nf / 2.0) * (nf / 2.0 + 1.0)],
    }
}

fn branch(ode: &PolyOde<f64>, center: f64, lo: f64, hi: f64, terms: usize) -> Result<AnalyticChain> {
    let coeffs = frobenius_coefficients(ode, center, 0, terms, None)?;
    let seed = Patch { center, reach: 0.5, mu: 0, coeffs };
    AnalyticChain::build(ode, seed, lo, hi, &[-1.0, 0.0, 1.0], terms)
}

impl ResolventSolution {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Constant `c` of the Wronskian `W(v0, v1) = v0 v1' - v0' v1`.
    pub fn wronskian_constant(&self) -> f64 {
        self.wronskian_c
    }

    /// Closed-form Wronskian at `r`.
    pub fn wronskian(&self, r: f64) -> f64 {
        self.wronskian_c * (1.0 - r * r).abs().powf(-1.5) * r.powi(1 - self.n as i32)
    }

    /// Wronskian of the continued branches at `r`, from their values.
    pub fn wronskian_from_branches(&self, r: f64) -> Result<f64> {
        let (a, da, _) = self.v0.eval(r)?;
        let (b, db, _) = self.v1.eval(r)?;
        Ok(a * db - da * b)
    }

    /// Homogeneous branch regular at the origin, `v0(0) = 1`.
    pub fn regular_at_origin(&self, r: f64) -> Result<(f64, f64, f64)> {
        self.v0.eval(r)
    }

    /// Homogeneous branch regular at `r = 1`, `v1(1) = 1`.
    pub fn regular_at_one(&self, r: f64) -> Result<(f64, f64, f64)> {
        self.v1.eval(r)
    }

    fn weight(&self, s: f64) -> f64 {
        (self.h)(s) * (1.0 - s * s).sqrt() * s.powi(self.n as i32 - 1) / self.wronskian_c
    }

    fn integrate(&self, a: f64, b: f64, g: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let panels = ((b - a) / PANEL_WIDTH).ceil().max(1.0) as usize;
        let w = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * w;
            let mut acc = 0.0;
            for (x, wt) in self.rule.iter() {
                acc += wt * g(lo + 0.5 * w * (x + 1.0))?;
            }
            total += 0.5 * w * acc;
        }
        if !total.is_finite() {
            return Err(LabError::Solver(format!("non-finite quadrature on [{a}, {b}]")));
        }
        Ok(total)
    }

    fn i0(&self, r: f64) -> Result<f64> {
        self.integrate(0.0, r.min(SUPPORT_LIMIT), |s| Ok(self.v0.eval(s)?.0 * self.weight(s)))
    }

    fn i1(&self, r: f64) -> Result<f64> {
        self.integrate(r, SUPPORT_LIMIT, |s| Ok(self.v1.eval(s)?.0 * self.weight(s)))
    }

    fn raw(&self, r: f64) -> Result<(f64, f64, f64)> {
        if r >= SUPPORT_LIMIT {
            let (b, db, ddb) = self.v1.eval(r)?;
            return Ok((b * self.i0_total, db * self.i0_total, ddb * self.i0_total));
        }
        let (i0, i1) = (self.i0(r)?, self.i1(r)?);
        let (a, da, dda) = self.v0.eval(r)?;
        let (b, db, ddb) = self.v1.eval(r)?;
        let f = (self.h)(r) / (1.0 - r * r);
        Ok((a * i1 + b * i0, da * i1 + db * i0, dda * i1 + ddb * i0 + f))
    }

    /// `(v, v', v'')` at `r` in `[0, 2]`.
    pub fn derivatives(&self, r: f64) -> Result<(f64, f64, f64)> {
        if !(0.0..=2.0).contains(&r) {
            return Err(LabError::Domain(format!("resolvent solution is available on [0, 2], got r = {r}")));
        }
        if r < NEAR_ORIGIN {
            let q = (self.v_near - self.v_origin) / (NEAR_ORIGIN * NEAR_ORIGIN);
            return Ok((self.v_origin + q * r * r, 2.0 * q * r, 2.0 * q));
        }
        self.raw(r)
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        Ok(self.derivatives(r)?.0)
    }

    /// Left-hand side minus `h` at `r` for given `(v, v', v'')`.
    pub fn ode_residual(n: usize, r: f64, h: f64, (v, dv, ddv): (f64, f64, f64)) -> f64 {
        let nf = n as f64;
        (1.0 - r * r) * ddv + ((nf - 1.0) / r - (nf + 2.0) * r) * dv - (nf / 2.0) * (nf / 2.0 + 1.0) * v - h
    }

    /// `(r, v(r))` on an equispaced grid of [0, 2].
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }
}

/// Solves the resolvent equation for an even source `h` vanishing on
/// `[0.9, 2]`, with `terms` coefficients per series patch.
pub fn resolvent_solve(
    n: usize,
    h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    terms: usize,
) -> Result<ResolventSolution> {
    if n < 5 {
        return Err(LabError::Config(format!("resolvent needs n >= 5, got {n}")));
    }
    if terms < 20 {
        return Err(LabError::Contract(format!("series need at least 20 terms, got {terms}")));
    }
    if (0..=220).map(|i| SUPPORT_LIMIT + i as f64 * (2.0 - SUPPORT_LIMIT) / 220.0).any(|r| h(r) != 0.0) {
        return Err(LabError::Domain(format!("source must vanish for r >= {SUPPORT_LIMIT}")));
    }
    let ode = homogeneous(n);
    let v0 = branch(&ode, 0.0, 0.0, SUPPORT_LIMIT + 0.01, terms)?;
    // quadrature nodes on the first panel sit above 1e-5
    let v1 = branch(&ode, 1.0, 1e-5, FAR_END, terms)?;
    let r_ref = 0.5;
    let (a, da, _) = v0.eval(r_ref)?;
    let (b, db, _) = v1.eval(r_ref)?;
    let w_ref = a * db - da * b;
    let wronskian_c = w_ref * (1.0 - r_ref * r_ref).powf(1.5) * r_ref.powi(n as i32 - 1);
    if !wronskian_c.is_finite() || wronskian_c.abs() < 1e-300 {
        return Err(LabError::Solver("homogeneous branches are linearly dependent".into()));
    }
    let mut sol = ResolventSolution {
        n,
        h: Box::new(h),
        v0,
        v1,
        wronskian_c,
        i0_total: 0.0,
        v_origin: 0.0,
        v_near: 0.0,
        rule: GaussLegendre::new(std::num::NonZeroUsize::new(PANEL_NODES).expect("nonzero node count")),
        samples: Vec::new(),
    };
    sol.i0_total = sol.i0(SUPPORT_LIMIT)?;
    sol.v_origin = sol.i1(0.0)?;
    sol.v_near = sol.raw(NEAR_ORIGIN)?.0;
    sol.samples = (0..SAMPLES)
        .map(|i| {
            let r = 2.0 * i as f64 / (SAMPLES - 1) as f64;
            sol.value(r).map(|v| (r, v))
        })
        .collect::<Result<_>>()?;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(r: f64) -> f64 {
        let x = r / 0.8;
        if x < 1.0 {
            (-1.0 / (1.0 - x * x)).exp() * (1.0 + r * r)
        } else {
            0.0
        }
    }

    #[test]
    fn zero_source_gives_zero() {
        let sol = resolvent_solve(5, |_| 0.0, 40).unwrap();
        assert!(sol.samples().iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn wronskian_has_the_closed_form() {
        for n in [5, 6, 8] {
            let sol = resolvent_solve(n, bump, 60).unwrap();
            for r in [0.05, 0.3, 0.7, 0.93] {
                let (w, wc) = (sol.wronskian_from_branches(r).unwrap(), sol.wronskian(r));
                assert!((w - wc).abs() <= 1e-10 * wc.abs(), "n={n} r={r}: {w} vs {wc}");
            }
        }
    }

    #[test]
    fn branches_are_normalized() {
        let sol = resolvent_solve(6, bump, 60).unwrap();
        assert!((sol.regular_at_origin(0.0).unwrap().0 - 1.0).abs() < 1e-15);
        assert!((sol.regular_at_one(1.0).unwrap().0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_derivatives_satisfy_the_equation() {
        let sol = resolvent_solve(5, bump, 60).unwrap();
        for r in [0.01, 0.2, 0.5, 0.79, 0.85, 0.95, 1.2, 1.9] {
            let res = ResolventSolution::ode_residual(5, r, bump(r), sol.derivatives(r).unwrap());
            assert!(res.abs() < 1e-10, "r={r}: {res:e}");
        }
    }

    #[test]
    fn rejects_wide_support() {
        assert!(matches!(resolvent_solve(5, |r: f64| (-r * r).exp(), 40), Err(LabError::Domain(_))));
    }
}
