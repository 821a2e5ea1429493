//! Log-linear decay fits of trajectory diagnostics.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{LabError, Result};
use crate::evolver::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Decay rate `-slope` of `log(value)` against `tau`.
    pub omega: f64,
    /// Root-mean-square residual of the log fit.
    pub rms: f64,
    /// 95% confidence band of `omega`.
    pub band95: (f64, f64),
    pub points: usize,
}

/// Least-squares fit of `log(values)` against `times`.
pub fn fit_log_linear(times: &[f64], values: &[f64]) -> Result<DecayFit> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(LabError::Solver(format!("decay fit needs at least 3 points, got {}", times.len())));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(LabError::Solver(format!("decay fit needs positive finite diagnostics, got {v}")));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let k = times.len() as f64;
    let mt = times.iter().sum::<f64>() / k;
    let ml = logs.iter().sum::<f64>() / k;
    let sxx: f64 = times.iter().map(|t| (t - mt).powi(2)).sum();
    let sxy: f64 = times.iter().zip(&logs).map(|(t, l)| (t - mt) * (l - ml)).sum();
    if sxx == 0.0 {
        return Err(LabError::Solver("decay fit window has no extent".into()));
    }
    let slope = sxy / sxx;
    let sse: f64 = times.iter().zip(&logs).map(|(t, l)| (l - ml - slope * (t - mt)).powi(2)).sum();
    let rms = (sse / k).sqrt();
    let dof = k - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let q = if dof > 0.0 {
        StudentsT::new(0.0, 1.0, dof).map_err(|e| LabError::Solver(e.to_string()))?.inverse_cdf(0.975)
    } else {
        f64::INFINITY
    };
    let omega = -slope;
    Ok(DecayFit { omega, rms, band95: (omega - q * se, omega + q * se), points: times.len() })
}

/// Points of `(times, values)` with time inside `window`.
pub fn window_points(times: &[f64], values: &[f64], window: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    let eps = 1e-9;
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window.0 - eps && **t <= window.1 + eps)
        .map(|(t, v)| (*t, *v))
        .unzip()
}

/// Fits the light-cone `H_{s,k}` diagnostic of a trajectory on `window`.
pub fn fit_decay_rate(traj: &Trajectory, window: (f64, f64)) -> Result<DecayFit> {
    let values = traj
        .diagnostics
        .iter()
        .map(|d| d.hsk_lightcone.ok_or_else(|| LabError::Contract("trajectory has no Sobolev diagnostic".into())))
        .collect::<Result<Vec<_>>>()?;
    let (t, v) = window_points(&traj.times, &values, window);
    fit_log_linear(&t, &v)
}

/// True if `values` never increases by more than the relative `ripple`
/// between consecutive samples.
pub fn monotone_decreasing_with_ripple(values: &[f64], ripple: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + ripple))
}
