//! Mode stability of the self-similar profile and the resolvent equation.
//!
//! Eigenvalues of the linearized flow are values of `lambda` for which
//!
//! `(1 - r^2) v'' + ((n-3)/r - 2(lambda+1) r) v' - lambda(lambda+1) v - V(r) v = 0`
//!
//! with `V(r) = (n-3)(r^4 - 6br^2 + b^2) / (r^2 (r^2+b)^2)`, `b = n - 4`, has
//! a solution analytic on `[0, 1]`. The analytic branches at `r = 0`
//! (index 1) and at `r = 1` (index 0) are built as Frobenius series and
//! compared through their Wronskian at `r = 1/2`.

pub mod dd;
pub mod frobenius;
pub mod resolvent;
pub mod scan;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use dd::DdComplex;
use frobenius::{eval_series, frobenius_coefficients, poly_add, poly_mul, poly_scale, PolyOde, Scalar};

pub use resolvent::{resolvent_solve, ResolventSolution};
pub use scan::{eigenvalue_scan, Rect, SpectralRoot};

/// Distance from an integer below which the index-0 branch at `r = 1` is
/// reported as resonant.
pub const RESONANCE_TOLERANCE: f64 = 1e-3;

/// Evaluation point of the connection Wronskian.
pub const MATCH_POINT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralProblem {
    n: usize,
    lambda: Complex64,
}

impl SpectralProblem {
    pub fn new(n: usize, lambda: Complex64) -> Result<Self> {
        if n < 5 {
            return Err(LabError::Config(format!("spectral problem needs n >= 5, got {n}")));
        }
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(LabError::Domain("non-finite spectral parameter".into()));
        }
        Ok(Self { n, lambda })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    fn b(&self) -> f64 {
        self.n as f64 - 4.0
    }

    /// Second index at `r = 1`, `(n-3)/2 - lambda`.
    pub fn kappa(&self) -> Complex64 {
        Complex64::new((self.n as f64 - 3.0) / 2.0, 0.0) - self.lambda
    }

    /// The eigenvalue ODE multiplied through by `r^2 (r^2+b)^2`.
    pub fn ode<S: Scalar>(&self) -> PolyOde<S> {
        let f = S::from_f64;
        let b = self.b();
        let n3 = self.n as f64 - 3.0;
        let lam = S::from_c64(self.lambda);
        let q = vec![f(b * b), f(0.0), f(2.0 * b), f(0.0), f(1.0)]; // (r^2+b)^2
        let r2q = poly_mul(&[f(0.0), f(0.0), f(1.0)], &q);
        let p2 = poly_mul(&r2q, &[f(1.0), f(0.0), f(-1.0)]);
        let two_l1 = f(2.0) * (lam + f(1.0));
        let p1 = poly_mul(&poly_mul(&[f(0.0), f(1.0)], &q), &[f(n3), f(0.0), -two_l1]);
        let ll1 = lam * (lam + f(1.0));
        let p0 = poly_add(
            &poly_scale(&r2q, -ll1),
            &[f(-n3 * b * b), f(0.0), f(6.0 * n3 * b), f(0.0), f(-n3)],
        );
        PolyOde { p2, p1, p0 }
    }

    /// Potential term `V(r)`.
    pub fn potential(&self, r: f64) -> f64 {
        let b = self.b();
        let r2 = r * r;
        (self.n as f64 - 3.0) * (r2 * r2 - 6.0 * b * r2 + b * b) / (r2 * (r2 + b).powi(2))
    }

    /// Left-hand side of the eigenvalue ODE for given `(v, v', v'')` at `r`.
    pub fn residual(&self, r: f64, v: Complex64, dv: Complex64, ddv: Complex64) -> Complex64 {
        let lam = self.lambda;
        (1.0 - r * r) * ddv + ((self.n as f64 - 3.0) / r - 2.0 * (lam + 1.0) * r) * dv
            - lam * (lam + 1.0) * v
            - self.potential(r) * v
    }

    /// Number of series terms used by [`connection_mismatch`].
    pub fn default_terms(&self) -> usize {
        60 + 6 * self.lambda.norm().ceil() as usize
    }

    /// Whether the series should run in double-double arithmetic.
    pub fn needs_extended_precision(&self, terms: usize) -> bool {
        self.lambda.norm() >= 5.0 || terms >= 80
    }

    /// Largest lattice order regularized in the index-0 branch at `r = 1`.
    fn lattice_max(&self) -> usize {
        ((self.n as f64 - 3.0) / 2.0 + 0.5).floor() as usize
    }
}

/// A Frobenius series `(r - center)^index * sum coeffs[j] (r - center)^j`.
#[derive(Debug, Clone)]
pub struct FrobeniusSolution {
    pub center: f64,
    pub index: usize,
    pub coeffs: Vec<Complex64>,
    pub radius: f64,
}

impl FrobeniusSolution {
    /// `(v, v', v'')` at `r`.
    pub fn eval(&self, r: f64) -> (Complex64, Complex64, Complex64) {
        eval_series(&self.coeffs, self.index, Complex64::new(r - self.center, 0.0))
    }

    /// Eigenvalue-ODE residual of the truncated series at `r`.
    pub fn residual(&self, p: &SpectralProblem, r: f64) -> f64 {
        let (v, dv, ddv) = self.eval(r);
        p.residual(r, v, dv, ddv).norm()
    }
}

fn check_terms(terms: usize) -> Result<()> {
    if terms < 20 {
        return Err(LabError::Contract(format!("series need at least 20 terms, got {terms}")));
    }
    Ok(())
}

fn to_c64_vec<S: Scalar>(c: Vec<S>) -> Vec<Complex64> {
    c.into_iter().map(Scalar::to_c64).collect()
}

/// Analytic branch at `r = 0`, `v ~ r`.
pub fn series_at_zero(p: &SpectralProblem, terms: usize) -> Result<FrobeniusSolution> {
    check_terms(terms)?;
    let coeffs = if p.needs_extended_precision(terms) {
        to_c64_vec(frobenius_coefficients(&p.ode::<DdComplex>(), 0.0, 1, terms, None)?)
    } else {
        frobenius_coefficients(&p.ode::<Complex64>(), 0.0, 1, terms, None)?
    };
    Ok(FrobeniusSolution { center: 0.0, index: 1, coeffs, radius: 0.5 })
}

/// Analytic branch at `r = 1`, `v(1) = 1`. Fails when the second index
/// `(n-3)/2 - lambda` is near a positive integer, where this branch is
/// not determined by the plain recurrence.
pub fn series_at_one(p: &SpectralProblem, terms: usize) -> Result<FrobeniusSolution> {
    check_terms(terms)?;
    let kappa = p.kappa();
    let k = kappa.re.round();
    if k >= 1.0 && (kappa - k).norm() < RESONANCE_TOLERANCE {
        return Err(LabError::Solver(format!(
            "resonance at r = 1: second index {kappa} is within {RESONANCE_TOLERANCE} of the integer {k}"
        )));
    }
    let coeffs = if p.needs_extended_precision(terms) {
        to_c64_vec(frobenius_coefficients(&p.ode::<DdComplex>(), 1.0, 0, terms, None)?)
    } else {
        frobenius_coefficients(&p.ode::<Complex64>(), 1.0, 0, terms, None)?
    };
    Ok(FrobeniusSolution { center: 1.0, index: 0, coeffs, radius: 0.5 })
}

fn mismatch_in<S: Scalar>(p: &SpectralProblem, terms: usize) -> Result<Complex64> {
    let ode = p.ode::<S>();
    let c0 = frobenius_coefficients(&ode, 0.0, 1, terms, None)?;
    let kappa = S::from_c64(p.kappa());
    let c1 = frobenius_coefficients(&ode, 1.0, 0, terms, Some((kappa, p.lattice_max())))?;
    let (v0, d0, _) = eval_series(&c0, 1, S::from_f64(MATCH_POINT));
    let (v1, d1, _) = eval_series(&c1, 0, S::from_f64(MATCH_POINT - 1.0));
    Ok((v0 * d1 - d0 * v1).to_c64())
}

/// Wronskian at `r = 1/2` of the analytic branches at `r = 0` and `r = 1`.
///
/// The branch at `r = 1` is the regularized one: finite and entire in
/// `lambda`, including on the resonance lattice, and a nonzero multiple of
/// the normalized branch away from it. Zeros are the eigenvalues.
pub fn connection_mismatch(p: &SpectralProblem) -> Result<Complex64> {
    connection_mismatch_with(p, p.default_terms())
}

pub fn connection_mismatch_with(p: &SpectralProblem, terms: usize) -> Result<Complex64> {
    check_terms(terms)?;
    if p.needs_extended_precision(terms) {
        mismatch_in::<DdComplex>(p, terms)
    } else {
        mismatch_in::<Complex64>(p, terms)
    }
}

/// Residual of the eigenvalue ODE at `lambda = 1` for `v = r/(r^2+b)`,
/// evaluated in closed form.
pub fn gauge_mode_residual(n: usize, r: f64) -> Result<f64> {
    let p = SpectralProblem::new(n, Complex64::new(1.0, 0.0))?;
    let b = p.b();
    let q = r * r + b;
    let v = r / q;
    let dv = (b - r * r) / (q * q);
    let ddv = 2.0 * r * (r * r - 3.0 * b) / (q * q * q);
    Ok(p.residual(r, v.into(), dv.into(), ddv.into()).norm())
}
