//! The radial Fourier kernel `J_nu(x) / x^nu` for `nu = n/2 - 1`.

use std::f64::consts::PI;

/// Evaluates `J_nu(x) / x^nu` for integer or half-integer `nu >= 0`.
#[derive(Debug, Clone, Copy)]
pub struct BesselKernel {
    nu: f64,
    /// `Gamma(nu + 1)`.
    gamma: f64,
    series_below: f64,
    half_integer: bool,
}

impl BesselKernel {
    pub fn for_dimension(n: usize) -> Self {
        let nu = n as f64 / 2.0 - 1.0;
        let half_integer = n % 2 == 1;
        let mut gamma = if half_integer { PI.sqrt() / 2.0 } else { 1.0 };
        let mut z = if half_integer { 1.5 } else { 1.0 };
        while z < nu + 1.0 - 1e-9 {
            gamma *= z;
            z += 1.0;
        }
        Self { nu, gamma, series_below: 4.0f64.max(2.0 * nu), half_integer }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Value at `x = 0`: `1 / (2^nu Gamma(nu + 1))`.
    pub fn at_zero(&self) -> f64 {
        1.0 / (2f64.powf(self.nu) * self.gamma)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        if x < self.series_below {
            self.series(x)
        } else if self.half_integer {
            self.spherical(x)
        } else {
            puruspe::Jn(self.nu as u32, x) / x.powf(self.nu)
        }
    }

    fn series(&self, x: f64) -> f64 {
        // sum_k (-1)^k (x/2)^{2k} / (k! Gamma(nu + k + 1)), times 2^{-nu}
        let q = 0.25 * x * x;
        let mut term = 1.0 / self.gamma;
        let mut sum = term;
        let mut k = 1.0;
        while k < 200.0 {
            term *= -q / (k * (self.nu + k));
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
            k += 1.0;
        }
        sum / 2f64.powf(self.nu)
    }

    /// `sqrt(2/pi) j_l(x) / x^l` with `l = nu - 1/2`, by upward recurrence.
    fn spherical(&self, x: f64) -> f64 {
        let l = (self.nu - 0.5).round() as usize;
        let (s, c) = x.sin_cos();
        let mut jm = s / x;
        if l == 0 {
            return (2.0 / PI).sqrt() * jm;
        }
        let mut j = s / (x * x) - c / x;
        for k in 1..l {
            let next = (2 * k + 1) as f64 / x * j - jm;
            jm = j;
            j = next;
        }
        (2.0 / PI).sqrt() * j / x.powi(l as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `J_m(x) = (1/pi) int_0^pi cos(m t - x sin t) dt`; the periodic
    /// trapezoid rule converges geometrically.
    fn bessel_integral(m: u32, x: f64) -> f64 {
        let k = 400;
        let h = PI / k as f64;
        let f = |t: f64| (m as f64 * t - x * t.sin()).cos();
        let mut s = 0.5 * (f(0.0) + f(PI));
        for i in 1..k {
            s += f(i as f64 * h);
        }
        s * h / PI
    }

    #[test]
    fn integer_order_against_integral_representation() {
        for n in [6usize, 8, 10] {
            let kern = BesselKernel::for_dimension(n);
            let m = (n / 2 - 1) as u32;
            for &x in &[0.3, 2.0, 3.999, 4.001, 7.5, 13.0, 40.0, 100.0] {
                let want = bessel_integral(m, x) / x.powi(m as i32);
                let got = kern.eval(x);
                assert!((got - want).abs() < 1e-14 * (1.0 + want.abs() * x.powi(m as i32)), "n={n} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn half_integer_closed_forms() {
        let kern = BesselKernel::for_dimension(5);
        for &x in &[0.5f64, 3.9, 4.1, 10.0, 55.0] {
            let j1 = x.sin() / (x * x) - x.cos() / x;
            let want = (2.0 / PI).sqrt() * j1 / x;
            assert!((kern.eval(x) - want).abs() < 1e-13, "x={x}");
        }
        let k3 = BesselKernel::for_dimension(3);
        assert!((k3.eval(2.0) - (2.0 / PI).sqrt() * 2f64.sin() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn series_and_recurrence_agree_at_switch() {
        for n in [5usize, 7, 9, 11] {
            let kern = BesselKernel::for_dimension(n);
            let x = kern.series_below;
            let a = kern.series(x);
            let b = kern.spherical(x);
            assert!((a - b).abs() < 1e-12 * a.abs().max(1e-3), "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn value_at_zero() {
        for n in 5..10 {
            let kern = BesselKernel::for_dimension(n);
            assert!((kern.eval(0.0) - kern.at_zero()).abs() < 1e-16);
            assert!((kern.eval(1e-4) - kern.at_zero()).abs() < 1e-8);
        }
        // n = 5: 1 / (2^{3/2} Gamma(5/2)) = sqrt(2/pi) / 3
        assert!((BesselKernel::for_dimension(5).at_zero() - (2.0 / PI).sqrt() / 3.0).abs() < 1e-15);
    }
}
