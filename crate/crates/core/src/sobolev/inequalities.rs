//! Sampled-ratio harnesses for the weighted `L^inf` (Strauss-type) bound and
//! the product estimate used for the nonlinearity.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{integer_norm_squared, NormSpec, SobolevNorms};
use crate::error::{LabError, Result};
use crate::grid::{apply_derivative, Parity, RadialField, RadialGrid};

/// `sum_j a_j (exp(-((r - c_j)/w_j)^2) + exp(-((r + c_j)/w_j)^2))`,
/// an even Schwartz function with closed-form dilations.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSum {
    pub terms: Vec<(f64, f64, f64)>,
}

impl GaussianSum {
    pub fn eval(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(a, c, w)| a * ((-((r - c) / w).powi(2)).exp() + (-((r + c) / w).powi(2)).exp()))
            .sum()
    }

    /// Samples `r -> f(lambda r)`.
    pub fn sample(&self, grid: &Arc<RadialGrid>, lambda: f64) -> RadialField {
        grid.sample(Parity::Even, |r| self.eval(lambda * r))
    }

    /// A seeded family of members with 1 to 3 terms, amplitudes in
    /// `[-1, 1]`, centres in `[0, 1]` and widths in `[0.4, 1]`.
    pub fn random_family(seed: u64, count: usize) -> Vec<GaussianSum> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let terms = rng.gen_range(1..=3);
                let mut t: Vec<(f64, f64, f64)> = (0..terms)
                    .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.4..1.0)))
                    .collect();
                // keep the member away from the zero function
                if t.iter().map(|x| x.0.abs()).sum::<f64>() < 0.2 {
                    t[0].0 = 0.5;
                }
                GaussianSum { terms: t }
            })
            .collect()
    }
}

/// Largest value of `rho^{n/2 - s} |g(rho)|`, refined between nodes by
/// golden-section search on the interpolant.
fn weighted_sup(g: &RadialField, weight_exp: f64) -> f64 {
    let grid = g.grid();
    let w = |r: f64| r.powf(weight_exp) * grid.interp_unchecked_pub(g.values(), r).abs();
    let (imax, _) = (0..grid.len())
        .map(|i| (i, grid.rho(i).powf(weight_exp) * g.values()[i].abs()))
        .fold((0, f64::MIN), |best, x| if x.1 > best.1 { x } else { best });
    let lo = grid.rho(imax.saturating_sub(1));
    let hi = grid.rho((imax + 1).min(grid.cells()));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (w(c), w(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = w(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = w(d);
        }
        if b - a < 1e-13 {
            break;
        }
    }
    w(0.5 * (a + b)).max(grid.rho(imax).powf(weight_exp) * g.values()[imax].abs())
}

/// `sup rho^{n/2-s} |f^{(alpha)}| / ||f||_{H^{s+alpha}}`.
pub fn strauss_ratio(norms: &SobolevNorms, f: &RadialField, s: f64, alpha: usize) -> Result<f64> {
    let n = f.grid().n() as f64;
    if !(s > 0.5 && s < n / 2.0) {
        return Err(LabError::Domain(format!("need 1/2 < s < n/2, got s = {s}")));
    }
    let mut g = f.clone();
    for _ in 0..alpha {
        g = apply_derivative(&g);
    }
    let num = weighted_sup(&g, n / 2.0 - s);
    let den = norms.hs_mixed(f, s + alpha as f64)?;
    if den == 0.0 {
        return Err(LabError::Domain("zero function has no Strauss ratio".into()));
    }
    Ok(num / den)
}

/// `||u1 u2 u3 F(rho v)||_{H^{s-1} \cap H^k}` divided by
/// `prod ||u_i||_{H^s \cap H^k} sum_{j=0}^{k} ||v||^{2j}_{H^s \cap H^k}`,
/// with `F(x) = 8 cos(2x)`.
pub fn schauder_ratio(
    norms: &SobolevNorms,
    u: [&RadialField; 3],
    v: &RadialField,
    spec: &NormSpec,
) -> Result<f64> {
    let prod: Vec<f64> = (0..v.values().len())
        .map(|i| {
            let r = v.grid().rho(i);
            u[0].values()[i] * u[1].values()[i] * u[2].values()[i] * 8.0 * (2.0 * r * v.values()[i]).cos()
        })
        .collect();
    let p = RadialField::new(Arc::clone(v.grid()), prod, Parity::Even)?;
    let lhs_frac = norms.hs_mixed(&p, spec.s - 1.0)?;
    let lhs = (lhs_frac * lhs_frac + integer_norm_squared(&p, spec.k)?).sqrt();
    if lhs == 0.0 {
        return Ok(0.0);
    }
    let mut rhs = 1.0;
    for ui in u {
        rhs *= norms.intersection(ui, spec.s, spec.k as f64)?;
    }
    let vn = norms.intersection(v, spec.s, spec.k as f64)?;
    let series: f64 = (0..=spec.k).map(|j| vn.powi(2 * j as i32)).sum();
    Ok(lhs / (rhs * series))
}

/// Summary of a sampled-ratio experiment; the constant is empirical only.
#[derive(Debug, Clone)]
pub struct InequalityHarness {
    pub ratios: Vec<f64>,
    pub max: f64,
    pub min: f64,
}

impl InequalityHarness {
    pub fn from_ratios(ratios: Vec<f64>) -> Self {
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        Self { ratios, max, min }
    }

    pub fn all_finite(&self) -> bool {
        self.ratios.iter().all(|r| r.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::sobolev::HankelPlan;
    use crate::sobolev::WavenumberGrid;

    fn setup() -> (Arc<RadialGrid>, SobolevNorms) {
        let g = make_grid(5, 16.0, 2000).unwrap();
        let plan = HankelPlan::new(&g, Arc::new(WavenumberGrid::standard()), 16.0).unwrap();
        (g, SobolevNorms::new(plan))
    }

    #[test]
    fn strauss_ratio_is_dilation_invariant() {
        let (g, norms) = setup();
        let f = GaussianSum { terms: vec![(1.0, 0.0, 0.8), (-0.4, 0.7, 0.5)] };
        for alpha in [0usize, 1] {
            let base = strauss_ratio(&norms, &f.sample(&g, 1.0), 1.6, alpha).unwrap();
            assert!(base > 0.0);
            for lam in [0.5, 2.0] {
                let r = strauss_ratio(&norms, &f.sample(&g, lam), 1.6, alpha).unwrap();
                assert!((r / base - 1.0).abs() < 1e-6, "alpha={alpha} lambda={lam}: {}", r / base - 1.0);
            }
        }
        assert!(strauss_ratio(&norms, &f.sample(&g, 1.0), 0.4, 0).is_err());
    }

    #[test]
    fn schauder_ratio_degenerate_cases() {
        let g = make_grid(5, 8.0, 800).unwrap();
        let norms = SobolevNorms::for_grid(&g).unwrap();
        let spec = NormSpec::new(5, 1.6, 6).unwrap();
        let u = g.sample(Parity::Even, |r| (-r * r).exp());
        let z = g.zeros();
        assert_eq!(schauder_ratio(&norms, [&u, &z, &u], &u, &spec).unwrap(), 0.0);
        let r = schauder_ratio(&norms, [&u, &u, &u], &z, &spec).unwrap();
        assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn family_is_deterministic() {
        assert_eq!(GaussianSum::random_family(7, 5), GaussianSum::random_family(7, 5));
        assert_ne!(GaussianSum::random_family(7, 5), GaussianSum::random_family(8, 5));
    }
}
