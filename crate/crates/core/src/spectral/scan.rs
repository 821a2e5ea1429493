//! Argument-principle search for zeros of the connection mismatch.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{connection_mismatch, SpectralProblem};
use crate::error::{LabError, Result};

/// Lower bound on `Re lambda` of scan regions.
pub const MIN_REAL_PART: f64 = -0.4;
/// Upper bound on `|lambda|` of scan regions.
pub const MAX_MODULUS: f64 = 10.0;

const MAX_ARG_STEP: f64 = PI / 4.0;
const MAX_EDGE_DEPTH: u32 = 24;
const SPLIT: f64 = 0.4618;
const LEAF_SIZE: f64 = 0.05;

/// Axis-aligned rectangle `[re0, re1] x [im0, im1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Result<Self> {
        if !(re0 < re1 && im0 < im1) || ![re0, re1, im0, im1].iter().all(|x| x.is_finite()) {
            return Err(LabError::Config(format!("degenerate scan rectangle [{re0}, {re1}] x [{im0}, {im1}]")));
        }
        Ok(Self { re0, re1, im0, im1 })
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re0, self.im0),
            Complex64::new(self.re1, self.im0),
            Complex64::new(self.re1, self.im1),
            Complex64::new(self.re0, self.im1),
        ]
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }

    fn diameter(&self) -> f64 {
        (self.re1 - self.re0).hypot(self.im1 - self.im0)
    }

    fn contains(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.re0 - margin && z.re <= self.re1 + margin && z.im >= self.im0 - margin && z.im <= self.im1 + margin
    }

    fn split(&self, frac: f64) -> (Rect, Rect) {
        if self.re1 - self.re0 >= self.im1 - self.im0 {
            let m = self.re0 + frac * (self.re1 - self.re0);
            (Rect { re1: m, ..*self }, Rect { re0: m, ..*self })
        } else {
            let m = self.im0 + frac * (self.im1 - self.im0);
            (Rect { im1: m, ..*self }, Rect { im0: m, ..*self })
        }
    }
}

/// A polished eigenvalue with its certificates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRoot {
    pub lambda: Complex64,
    /// `|mismatch|` at the polished root.
    pub mismatch_abs: f64,
    /// Size of the last Newton step.
    pub newton_step: f64,
}

struct Scanner {
    n: usize,
    density: usize,
}

impl Scanner {
    fn f(&self, z: Complex64) -> Result<Complex64> {
        connection_mismatch(&SpectralProblem::new(self.n, z)?)
    }

    fn arg_change(&self, a: Complex64, fa: Complex64, b: Complex64, fb: Complex64, depth: u32) -> Result<f64> {
        let d = (fb / fa).arg();
        if d.abs() < MAX_ARG_STEP {
            return Ok(d);
        }
        if depth >= MAX_EDGE_DEPTH {
            return Err(LabError::Solver(format!("mismatch vanishes on or near the contour between {a} and {b}")));
        }
        let m = 0.5 * (a + b);
        let fm = self.f(m)?;
        Ok(self.arg_change(a, fa, m, fm, depth + 1)? + self.arg_change(m, fm, b, fb, depth + 1)?)
    }

    fn winding(&self, rect: &Rect, density: usize) -> Result<usize> {
        let c = rect.corners();
        let mut total = 0.0;
        for e in 0..4 {
            let (a, b) = (c[e], c[(e + 1) % 4]);
            let pts: Vec<Complex64> = (0..=density).map(|i| a + (b - a) * (i as f64 / density as f64)).collect();
            let vals = pts.iter().map(|&z| self.f(z)).collect::<Result<Vec<_>>>()?;
            for i in 0..density {
                total += self.arg_change(pts[i], vals[i], pts[i + 1], vals[i + 1], 0)?;
            }
        }
        let w = total / (2.0 * PI);
        let k = w.round();
        if (w - k).abs() > 0.1 || k < 0.0 {
            return Err(LabError::Solver(format!("non-integral winding number {w:.3} on {rect:?}")));
        }
        Ok(k as usize)
    }

    fn newton(&self, z0: Complex64) -> Result<(Complex64, f64)> {
        let mut z = z0;
        let mut step = f64::INFINITY;
        for _ in 0..60 {
            let h = 1e-6 * z.norm().max(1.0);
            let fz = self.f(z)?;
            if fz.norm() == 0.0 {
                return Ok((z, 0.0));
            }
            let df = (self.f(z + h)? - self.f(z - h)?) / (2.0 * h);
            let dz = fz / df;
            z -= dz;
            step = dz.norm();
            if step < 1e-13 * z.norm().max(1.0) {
                break;
            }
        }
        Ok((z, step))
    }

    fn search(&self, rect: Rect, count: usize, depth: u32) -> Result<Vec<SpectralRoot>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        if count == 1 && rect.diameter() <= LEAF_SIZE {
            let (z, step) = self.newton(rect.center())?;
            if !rect.contains(z, 1e-9) {
                return Err(LabError::Solver(format!("Newton left the isolating box {rect:?}")));
            }
            return Ok(vec![SpectralRoot { lambda: z, mismatch_abs: self.f(z)?.norm(), newton_step: step }]);
        }
        if depth > 40 {
            return Err(LabError::Solver(format!("{count} roots could not be separated in {rect:?}")));
        }
        let mut last_err = None;
        for (frac, density) in [(SPLIT, self.density), (1.0 - SPLIT, self.density), (SPLIT, 2 * self.density)] {
            let (r1, r2) = rect.split(frac);
            let counts = rayon::join(|| self.winding(&r1, density), || self.winding(&r2, density));
            match counts {
                (Ok(c1), Ok(c2)) if c1 + c2 == count => {
                    let (a, b) = rayon::join(|| self.search(r1, c1, depth + 1), || self.search(r2, c2, depth + 1));
                    let mut roots = a?;
                    roots.extend(b?);
                    return Ok(roots);
                }
                (Ok(c1), Ok(c2)) => {
                    last_err = Some(LabError::Solver(format!(
                        "winding numbers {c1} + {c2} do not add up to {count} on {rect:?}; increase the density"
                    )))
                }
                (Err(e), _) | (_, Err(e)) => last_err = Some(e),
            }
        }
        Err(last_err.expect("at least one split attempted"))
    }
}

/// Eigenvalues of the mode-stability problem in `region`, located by
/// counting zeros of the connection mismatch along rectangle boundaries
/// (`grid_density` samples per edge, refined adaptively) and bisecting
/// until each root is isolated, then polished by Newton's method.
pub fn eigenvalue_scan(n: usize, region: Rect, grid_density: usize) -> Result<Vec<SpectralRoot>> {
    SpectralProblem::new(n, Complex64::new(0.0, 0.0))?;
    if region.re0 < MIN_REAL_PART {
        return Err(LabError::Domain(format!("scan region reaches Re lambda = {} < {MIN_REAL_PART}", region.re0)));
    }
    if region.corners().iter().any(|z| z.norm() > MAX_MODULUS) {
        return Err(LabError::Domain(format!("scan region leaves |lambda| <= {MAX_MODULUS}")));
    }
    if grid_density < 4 {
        return Err(LabError::Config(format!("grid density must be at least 4, got {grid_density}")));
    }
    let scanner = Scanner { n, density: grid_density };
    let count = scanner.winding(&region, grid_density).or_else(|_| scanner.winding(&region, 2 * grid_density))?;
    let mut roots = scanner.search(region, count, 0)?;
    roots.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_eigenvalues_right_of_the_gauge_mode() {
        let roots = eigenvalue_scan(5, Rect::new(2.0, 3.0, -1.0, 1.0).unwrap(), 16).unwrap();
        assert!(roots.is_empty(), "{roots:?}");
    }

    #[test]
    fn isolates_the_gauge_eigenvalue() {
        let roots = eigenvalue_scan(6, Rect::new(0.5, 1.6, -0.5, 0.5).unwrap(), 16).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].lambda - 1.0).norm() < 1e-9);
        assert!(roots[0].newton_step < 1e-10);
    }

    #[test]
    fn rejects_regions_outside_the_trust_region() {
        assert!(matches!(eigenvalue_scan(5, Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap(), 16), Err(LabError::Domain(_))));
        assert!(matches!(eigenvalue_scan(5, Rect::new(0.0, 9.0, -6.0, 6.0).unwrap(), 16), Err(LabError::Domain(_))));
        assert!(Rect::new(1.0, 1.0, 0.0, 1.0).is_err());
    }
}
