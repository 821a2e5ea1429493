//! Power-series solutions of `P2 v'' + P1 v' + P0 v = 0` with polynomial
//! coefficients: Frobenius series at regular singular points and plain
//! Taylor patches at regular points, generic over the scalar type.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use super::dd::DdComplex;
use crate::error::{LabError, Result};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
    fn from_f64(x: f64) -> Self {
        Self::from_c64(Complex64::new(x, 0.0))
    }
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn magnitude(self) -> f64 {
        self.to_c64().norm()
    }
}

impl Scalar for f64 {
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(self) -> Complex64 {
        self
    }
}

impl Scalar for DdComplex {
    fn from_c64(z: Complex64) -> Self {
        DdComplex::from_c64(z)
    }
    fn to_c64(self) -> Complex64 {
        DdComplex::to_c64(self)
    }
}

/// Polynomial with ascending coefficients.
pub type Poly<S> = Vec<S>;

pub fn poly_mul<S: Scalar>(a: &[S], b: &[S]) -> Poly<S> {
    let mut out = vec![S::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j] + x * y;
        }
    }
    out
}

pub fn poly_add<S: Scalar>(a: &[S], b: &[S]) -> Poly<S> {
    let mut out = vec![S::zero(); a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] = out[i] + x;
    }
    for (i, &x) in b.iter().enumerate() {
        out[i] = out[i] + x;
    }
    out
}

pub fn poly_scale<S: Scalar>(a: &[S], c: S) -> Poly<S> {
    a.iter().map(|&x| x * c).collect()
}

/// Coefficients of `p(c + t)` in powers of `t`.
pub fn poly_shift<S: Scalar>(p: &[S], c: f64) -> Poly<S> {
    let mut q = p.to_vec();
    let cs = S::from_f64(c);
    let d = q.len();
    for i in 0..d {
        for j in (i..d - 1).rev() {
            q[j] = q[j] + cs * q[j + 1];
        }
    }
    q
}

/// The ODE `P2 v'' + P1 v' + P0 v = 0`.
#[derive(Debug, Clone)]
pub struct PolyOde<S> {
    pub p2: Poly<S>,
    pub p1: Poly<S>,
    pub p0: Poly<S>,
}

impl<S: Scalar> PolyOde<S> {
    pub fn eval_coeffs(&self, r: S) -> (S, S, S) {
        (horner(&self.p2, r), horner(&self.p1, r), horner(&self.p0, r))
    }

    pub fn shifted(&self, c: f64) -> PolyOde<S> {
        PolyOde { p2: poly_shift(&self.p2, c), p1: poly_shift(&self.p1, c), p0: poly_shift(&self.p0, c) }
    }
}

pub fn horner<S: Scalar>(p: &[S], x: S) -> S {
    p.iter().rev().fold(S::zero(), |acc, &c| acc * x + c)
}

fn coef<S: Scalar>(p: &[S], i: usize) -> S {
    p.get(i).copied().unwrap_or_else(S::zero)
}

/// Local form `t^2 A v'' + t B v' + C v = 0` about a regular singular point.
struct LocalForm<S> {
    a: Poly<S>,
    b: Poly<S>,
    c: Poly<S>,
}

fn is_zero<S: Scalar>(x: S) -> bool {
    x.magnitude() == 0.0
}

fn local_form<S: Scalar>(ode: &PolyOde<S>, center: f64) -> Result<LocalForm<S>> {
    let q = ode.shifted(center);
    let z = q.p2.iter().position(|&x| !is_zero(x)).ok_or_else(|| LabError::Solver("vanishing leading coefficient".into()))?;
    if z == 0 || z > 2 {
        return Err(LabError::Solver(format!("point {center} is not a regular singular point of order 1 or 2")));
    }
    let a = q.p2[z..].to_vec();
    let b = if z == 2 {
        if !is_zero(coef(&q.p1, 0)) {
            return Err(LabError::Solver(format!("irregular singular point at {center}")));
        }
        q.p1[1..].to_vec()
    } else {
        q.p1.clone()
    };
    let c = if z == 2 {
        q.p0.clone()
    } else {
        let mut c = vec![S::zero()];
        c.extend_from_slice(&q.p0);
        c
    };
    Ok(LocalForm { a, b, c })
}

/// Indicial polynomial `F(mu) = A0 mu (mu - 1) + B0 mu + C0` at `center`.
pub fn indicial<S: Scalar>(ode: &PolyOde<S>, center: f64) -> Result<(S, S, S)> {
    let lf = local_form(ode, center)?;
    Ok((coef(&lf.a, 0), coef(&lf.b, 0), coef(&lf.c, 0)))
}

/// Frobenius coefficients `c_j` of `v = t^mu sum c_j t^j`, `c_0 = 1`.
///
/// With `regularize = Some((kappa, n_max))` (index-0 branch whose partner
/// index is `kappa`), every lattice step `N <= n_max` multiplies the
/// earlier coefficients by `N - kappa` and divides by `A0 N` instead of
/// `F(N) = A0 N (N - kappa)`. The result is entire in `kappa` and stays
/// finite when `kappa` hits the lattice.
pub fn frobenius_coefficients<S: Scalar>(
    ode: &PolyOde<S>,
    center: f64,
    mu: usize,
    terms: usize,
    regularize: Option<(S, usize)>,
) -> Result<Vec<S>> {
    let lf = local_form(ode, center)?;
    let (a0, b0, c0) = (coef(&lf.a, 0), coef(&lf.b, 0), coef(&lf.c, 0));
    let deg = lf.a.len().max(lf.b.len()).max(lf.c.len());
    let mut c = vec![S::zero(); terms];
    c[0] = S::from_f64(1.0);
    let muf = mu as f64;
    for nn in 1..terms {
        let mut num = S::zero();
        let lo = nn.saturating_sub(deg - 1);
        for i in lo..nn {
            let k = nn - i;
            let e = S::from_f64(i as f64 + muf);
            let em1 = S::from_f64(i as f64 + muf - 1.0);
            num = num + c[i] * (coef(&lf.a, k) * e * em1 + coef(&lf.b, k) * e + coef(&lf.c, k));
        }
        num = -num;
        let e = S::from_f64(nn as f64 + muf);
        match regularize {
            Some((kappa, n_max)) if nn <= n_max => {
                let factor = S::from_f64(nn as f64) - kappa;
                for x in c.iter_mut().take(nn) {
                    *x = *x * factor;
                }
                c[nn] = num / (a0 * S::from_f64(nn as f64));
            }
            _ => {
                let den = a0 * e * (e - S::from_f64(1.0)) + b0 * e + c0;
                if den.magnitude() < 1e-14 * (a0.magnitude() + b0.magnitude() + c0.magnitude()) * (nn as f64).powi(2) {
                    return Err(LabError::Solver(format!(
                        "zero pivot at order {nn} of the Frobenius recurrence at r = {center}"
                    )));
                }
                c[nn] = num / den;
            }
        }
    }
    Ok(c)
}

/// Taylor coefficients at a regular point from the value and slope there.
pub fn taylor_coefficients<S: Scalar>(ode: &PolyOde<S>, center: f64, v: S, dv: S, terms: usize) -> Result<Vec<S>> {
    let q = ode.shifted(center);
    let q20 = coef(&q.p2, 0);
    if q20.magnitude() == 0.0 {
        return Err(LabError::Solver(format!("{center} is a singular point")));
    }
    let deg = q.p2.len().max(q.p1.len()).max(q.p0.len());
    let mut c = vec![S::zero(); terms.max(2)];
    c[0] = v;
    c[1] = dv;
    for j in 0..terms.saturating_sub(2) {
        let mut acc = S::zero();
        for i in 0..=j.min(deg) {
            if i >= 1 {
                let m = j - i + 2;
                acc = acc + coef(&q.p2, i) * S::from_f64((m * (m - 1)) as f64) * c[m];
            }
            let m1 = j - i + 1;
            acc = acc + coef(&q.p1, i) * S::from_f64(m1 as f64) * c[m1];
            acc = acc + coef(&q.p0, i) * c[j - i];
        }
        c[j + 2] = -acc / (q20 * S::from_f64(((j + 2) * (j + 1)) as f64));
    }
    Ok(c)
}

/// `(v, v', v'')` of `t^mu sum c_j t^j` at `t`, for `mu` in {0, 1}.
pub fn eval_series<S: Scalar>(c: &[S], mu: usize, t: S) -> (S, S, S) {
    let mut s = S::zero();
    let mut ds = S::zero();
    let mut dds = S::zero();
    for &cj in c.iter().rev() {
        dds = dds * t + ds * S::from_f64(2.0);
        ds = ds * t + s;
        s = s * t + cj;
    }
    // s = sum c_j t^j, ds its first derivative, dds its second
    match mu {
        0 => (s, ds, dds),
        _ => (t * s, s + t * ds, S::from_f64(2.0) * ds + t * dds),
    }
}

/// One Taylor patch: a series about `center` trusted for `|r - center| <= reach`.
#[derive(Debug, Clone)]
pub struct Patch {
    pub center: f64,
    pub reach: f64,
    pub mu: usize,
    pub coeffs: Vec<f64>,
}

impl Patch {
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        eval_series(&self.coeffs, self.mu, r - self.center)
    }
}

/// Analytic continuation of one real solution along the axis by a chain of
/// Taylor patches, each centred at the edge of its predecessor's reach.
#[derive(Debug, Clone)]
pub struct AnalyticChain {
    pub patches: Vec<Patch>,
}

impl AnalyticChain {
    /// Extends `seed` until `[lo, hi]` is covered; `singular` lists the
    /// singular points that limit each patch's reach (half the distance).
    pub fn build(ode: &PolyOde<f64>, seed: Patch, lo: f64, hi: f64, singular: &[f64], terms: usize) -> Result<Self> {
        let mut patches = vec![seed.clone()];
        for dir in [-1.0f64, 1.0] {
            let mut cur = seed.clone();
            loop {
                let edge = cur.center + dir * cur.reach;
                if (dir < 0.0 && edge <= lo) || (dir > 0.0 && edge >= hi) {
                    break;
                }
                let (v, dv, _) = cur.eval(edge);
                let dist = singular.iter().map(|s| (s - edge).abs()).fold(f64::INFINITY, f64::min);
                if dist < 1e-6 {
                    return Err(LabError::Solver("continuation ran into a singular point".into()));
                }
                let coeffs = taylor_coefficients(ode, edge, v, dv, terms)?;
                cur = Patch { center: edge, reach: 0.5 * dist, mu: 0, coeffs };
                patches.push(cur.clone());
                if patches.len() > 200 {
                    return Err(LabError::Solver("continuation needs too many patches".into()));
                }
            }
        }
        Ok(Self { patches })
    }

    pub fn eval(&self, r: f64) -> Result<(f64, f64, f64)> {
        let best = self
            .patches
            .iter()
            .map(|p| ((r - p.center).abs() / p.reach, p))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .ok_or_else(|| LabError::Solver("empty continuation chain".into()))?;
        if best.0 > 1.0 + 1e-12 {
            return Err(LabError::Domain(format!("r = {r} outside the continued range")));
        }
        Ok(best.1.eval(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_and_multiply() {
        // (1 + t)^2 = 1 + 2t + t^2 shifted by 1 gives 4 + 4t + t^2
        let p: Vec<f64> = vec![1.0, 2.0, 1.0];
        assert_eq!(poly_shift(&p, 1.0), vec![4.0, 4.0, 1.0]);
        assert_eq!(poly_mul(&[1.0, 1.0], &[1.0, -1.0]), vec![1.0, 0.0, -1.0]);
        assert_eq!(horner(&p, 2.0), 9.0);
    }

    #[test]
    fn series_derivatives() {
        let c = vec![1.0, 2.0, 3.0];
        let (v, dv, ddv) = eval_series(&c, 1, 0.5);
        // t + 2t^2 + 3t^3
        assert!((v - (0.5 + 0.5 + 0.375)).abs() < 1e-15);
        assert!((dv - (1.0 + 2.0 + 2.25)).abs() < 1e-15);
        assert!((ddv - (4.0 + 9.0)).abs() < 1e-15);
    }

    #[test]
    fn bessel_equation_frobenius() {
        // r^2 v'' + r v' + r^2 v = 0 has the J_0 branch with index 0 at 0
        let ode = PolyOde { p2: vec![0.0, 0.0, 1.0], p1: vec![0.0, 1.0], p0: vec![0.0, 0.0, 1.0] };
        let c = frobenius_coefficients(&ode, 0.0, 0, 40, None).unwrap();
        let (v, _, _) = eval_series(&c, 0, 1.0);
        assert!((v - 0.765_197_686_557_966_6).abs() < 1e-15);
    }

    #[test]
    fn taylor_patch_chain_follows_exponential() {
        // v'' - v = 0, v = e^r
        let ode = PolyOde { p2: vec![1.0], p1: vec![0.0], p0: vec![-1.0] };
        let seed = Patch { center: 0.0, reach: 0.5, mu: 0, coeffs: taylor_coefficients(&ode, 0.0, 1.0, 1.0, 40).unwrap() };
        let chain = AnalyticChain::build(&ode, seed, -1.0, 3.0, &[10.0], 40).unwrap();
        for r in [-0.9, 0.2, 1.7, 2.9] {
            let (v, dv, ddv) = chain.eval(r).unwrap();
            let e = f64::exp(r);
            assert!((v - e).abs() < 1e-13 * e && (dv - e).abs() < 1e-13 * e && (ddv - e).abs() < 1e-12 * e);
        }
    }
}
