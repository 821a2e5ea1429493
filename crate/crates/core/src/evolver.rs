//! Method-of-lines integration of the similarity system
//!
//! ```text
//! d_tau psi1 = -Lambda psi1 - psi1 + psi2
//! d_tau psi2 = Delta psi1 - Lambda psi2 - 2 psi2 + V psi1 + N(psi1)
//! ```
//!
//! for a perturbation of the static profile, in three flavours: the free wave
//! operator alone, its linearization around the profile, and the full
//! nonlinear flow. Time stepping is classical RK4; the outer boundary is pure
//! outflow and gets no boundary condition, only inward-looking stencils.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{Parity, RadialField, RadialGrid};
use crate::profiles::{self, ProfileParams};
use crate::sobolev::LightconeNorm;
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Free,
    Linearized,
    Nonlinear,
}

impl std::str::FromStr for Mode {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Mode::Free),
            "linearized" => Ok(Mode::Linearized),
            "nonlinear" => Ok(Mode::Nonlinear),
            other => Err(LabError::Config(format!("unknown evolution mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolverConfig {
    pub dtau: f64,
    pub tau_end: f64,
    pub cfl: f64,
    pub mode: Mode,
    pub snapshot_every: usize,
    /// Keep full states at snapshots, not only diagnostics.
    pub store_states: bool,
    /// Stop early once the light-cone sup-norm exceeds this value.
    pub stop_above: Option<f64>,
}

impl EvolverConfig {
    /// Largest stable step `cfl * h / (R + 1)`, shrunk so that `tau_end` is
    /// hit exactly, with snapshots roughly every `snapshot_dtau`.
    pub fn for_grid(grid: &RadialGrid, tau_end: f64, mode: Mode, cfl: f64, snapshot_dtau: f64) -> Result<Self> {
        if !(tau_end > 0.0) {
            return Err(LabError::Config(format!("tau_end must be positive, got {tau_end}")));
        }
        let max_dt = cfl * grid.h() / (grid.r_max() + 1.0);
        let per_snap = (snapshot_dtau / max_dt).ceil().max(1.0) as usize;
        let snap_dt = snapshot_dtau / per_snap as f64;
        let snaps = (tau_end / snapshot_dtau).round().max(1.0);
        let (dtau, tau_end) = if (snaps * snapshot_dtau - tau_end).abs() < 1e-12 * tau_end {
            (snap_dt, tau_end)
        } else {
            let steps = (tau_end / max_dt).ceil();
            (tau_end / steps, tau_end)
        };
        let snapshot_every = ((snapshot_dtau / dtau).round() as usize).max(1);
        Ok(Self { dtau, tau_end, cfl, mode, snapshot_every, store_states: false, stop_above: None })
    }

    pub fn validate(&self, grid: &RadialGrid) -> Result<()> {
        if !(self.tau_end > 0.0) || self.snapshot_every == 0 || !(self.dtau > 0.0) {
            return Err(LabError::Config("evolver needs tau_end > 0, dtau > 0, snapshot_every >= 1".into()));
        }
        let limit = self.cfl * grid.h() / (grid.r_max() + 1.0);
        if self.dtau > limit * (1.0 + 1e-12) {
            return Err(LabError::Config(format!(
                "CFL violation: dtau = {} exceeds cfl * h / (R + 1) = {limit}",
                self.dtau
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRecord {
    pub hsk_lightcone: Option<f64>,
    pub sup_lightcone: f64,
    pub origin_psi1: f64,
    pub gauge_proj: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub diagnostics: Vec<DiagnosticRecord>,
    /// Final state, always kept.
    pub last: State,
    /// True if the run stopped early at the configured sup-norm cap.
    pub saturated: bool,
}

impl Trajectory {
    pub fn final_tau(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }
}

/// Weighted pairing `<Phi, g> = int_0^2 (Phi1 g1 + Phi2 g2) rho^{n-1} drho`
/// against the gauge mode, by composite Simpson quadrature.
#[derive(Debug, Clone)]
pub struct GaugeFunctional {
    weights1: Vec<f64>,
    weights2: Vec<f64>,
}

pub const DIAGNOSTIC_RADIUS: f64 = 2.0;

impl GaugeFunctional {
    pub fn new(grid: &Arc<RadialGrid>, params: &ProfileParams) -> Result<Self> {
        let gm = profiles::gauge_mode(grid, params)?;
        let w = simpson_weights(grid, DIAGNOSTIC_RADIUS);
        let n = grid.n() as i32;
        let mut weights1 = vec![0.0; w.len()];
        let mut weights2 = vec![0.0; w.len()];
        for i in 0..w.len() {
            let rn = grid.rho(i).powi(n - 1);
            weights1[i] = w[i] * rn * gm.psi1.values()[i];
            weights2[i] = w[i] * rn * gm.psi2.values()[i];
        }
        Ok(Self { weights1, weights2 })
    }

    pub fn apply(&self, s: &State) -> f64 {
        self.apply_slices(s.psi1.values(), s.psi2.values())
    }

    fn apply_slices(&self, u1: &[f64], u2: &[f64]) -> f64 {
        let a: f64 = self.weights1.iter().zip(u1).map(|(w, v)| w * v).sum();
        let b: f64 = self.weights2.iter().zip(u2).map(|(w, v)| w * v).sum();
        a + b
    }
}

/// Composite Simpson weights on nodes `0..=i_max` with `rho_{i_max} <= r`;
/// an odd interval count closes with the 3/8 rule.
pub fn simpson_weights(grid: &RadialGrid, r: f64) -> Vec<f64> {
    let imax = grid.index_at_or_below(r);
    let h = grid.h();
    let mut w = vec![0.0; imax + 1];
    let (simpson_end, tail) = if imax.is_multiple_of(2) { (imax, false) } else { (imax - 3, true) };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if tail {
        let j = simpson_end;
        for (k, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[j + k] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

/// Per-snapshot diagnostics over the light cone.
pub struct LightconeDiagnostics {
    gauge: GaugeFunctional,
    cone_end: usize,
    origin_background: f64,
    norm: Option<Arc<LightconeNorm>>,
}

impl LightconeDiagnostics {
    /// `norm = None` skips the Sobolev norm (used by the blowup-time search).
    pub fn new(
        grid: &Arc<RadialGrid>,
        params: &ProfileParams,
        mode: Mode,
        norm: Option<Arc<LightconeNorm>>,
    ) -> Result<Self> {
        let origin_background = match mode {
            Mode::Free => 0.0,
            Mode::Linearized | Mode::Nonlinear => profiles::phi(0.0, params),
        };
        Ok(Self {
            gauge: GaugeFunctional::new(grid, params)?,
            cone_end: grid.index_at_or_below(1.0),
            origin_background,
            norm,
        })
    }

    pub fn sup_lightcone(&self, s: &State) -> f64 {
        s.psi1.values()[..=self.cone_end]
            .iter()
            .chain(&s.psi2.values()[..=self.cone_end])
            .fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn gauge(&self) -> &GaugeFunctional {
        &self.gauge
    }

    pub fn record(&self, s: &State) -> Result<DiagnosticRecord> {
        let hsk_lightcone = match &self.norm {
            Some(nrm) => Some(nrm.hsk(s)?),
            None => None,
        };
        Ok(DiagnosticRecord {
            hsk_lightcone,
            sup_lightcone: self.sup_lightcone(s),
            origin_psi1: self.origin_background + s.psi1.values()[0],
            gauge_proj: self.gauge.apply(s),
        })
    }
}

/// Right-hand sides of the similarity system on a fixed grid, with the
/// profile-dependent coefficients precomputed per node.
pub struct Evolver {
    grid: Arc<RadialGrid>,
    params: ProfileParams,
    potential: Vec<f64>,
    /// `4 phi sinc(2 rho phi)` and `cos(2 rho phi)` from the remainder identity.
    rem_a: Vec<f64>,
    rem_b: Vec<f64>,
}

struct Workspace {
    k1: [Vec<f64>; 2],
    k2: [Vec<f64>; 2],
    k3: [Vec<f64>; 2],
    k4: [Vec<f64>; 2],
    tmp: [Vec<f64>; 2],
    scratch: Vec<f64>,
}

impl Workspace {
    fn new(len: usize) -> Self {
        let z = || [vec![0.0; len], vec![0.0; len]];
        Self { k1: z(), k2: z(), k3: z(), k4: z(), tmp: z(), scratch: vec![0.0; len] }
    }
}

impl Evolver {
    pub fn new(grid: Arc<RadialGrid>, params: ProfileParams) -> Result<Self> {
        if grid.n() != params.n() {
            return Err(LabError::Contract(format!(
                "grid dimension {} differs from profile dimension {}",
                grid.n(),
                params.n()
            )));
        }
        let nodes = grid.nodes();
        let potential = nodes.iter().map(|&r| profiles::potential_v(r, &params)).collect();
        let phi: Vec<f64> = nodes.iter().map(|&r| profiles::phi(r, &params)).collect();
        let rem_a = nodes.iter().zip(&phi).map(|(&r, &p)| 4.0 * p * profiles::sinc(2.0 * r * p)).collect();
        let rem_b = nodes.iter().zip(&phi).map(|(&r, &p)| (2.0 * r * p).cos()).collect();
        Ok(Self { grid, params, potential, rem_a, rem_b })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn params(&self) -> &ProfileParams {
        &self.params
    }

    fn check(&self, s: &State) -> Result<()> {
        s.require_even()?;
        if **s.grid() != *self.grid {
            return Err(LabError::Contract("state lives on a different grid".into()));
        }
        Ok(())
    }

    fn rhs_slices(&self, mode: Mode, u1: &[f64], u2: &[f64], out: &mut [Vec<f64>; 2], scratch: &mut [f64]) {
        let g = &*self.grid;
        let [o1, o2] = out;
        g.lambda_into(u1, Parity::Even, o1);
        for i in 0..u1.len() {
            o1[i] = -o1[i] - u1[i] + u2[i];
        }
        g.lambda_into(u2, Parity::Even, scratch);
        g.laplacian_into(u1, o2);
        for i in 0..u1.len() {
            o2[i] += -scratch[i] - 2.0 * u2[i];
        }
        match mode {
            Mode::Free => {}
            Mode::Linearized => {
                for i in 0..u1.len() {
                    o2[i] += self.potential[i] * u1[i];
                }
            }
            Mode::Nonlinear => {
                let c = 0.5 * (self.params.n() - 3) as f64;
                for i in 0..u1.len() {
                    let u = u1[i];
                    let z = g.rho(i) * u;
                    let sz = profiles::sinc(z);
                    let rem = c * u * u * (self.rem_a[i] * sz * sz + self.rem_b[i] * u * profiles::eta_over_cube(z));
                    o2[i] += self.potential[i] * u + rem;
                }
            }
        }
    }

    fn rhs(&self, mode: Mode, s: &State) -> Result<State> {
        self.check(s)?;
        let len = self.grid.len();
        let mut out = [vec![0.0; len], vec![0.0; len]];
        let mut scratch = vec![0.0; len];
        self.rhs_slices(mode, s.psi1.values(), s.psi2.values(), &mut out, &mut scratch);
        let [a, b] = out;
        State::new(
            RadialField::new(Arc::clone(&self.grid), a, Parity::Even)?,
            RadialField::new(Arc::clone(&self.grid), b, Parity::Even)?,
        )
    }

    /// Free wave operator in similarity variables.
    pub fn rhs_free(&self, s: &State) -> Result<State> {
        self.rhs(Mode::Free, s)
    }

    /// Free operator plus the potential term.
    pub fn rhs_linearized(&self, s: &State) -> Result<State> {
        self.rhs(Mode::Linearized, s)
    }

    /// Full perturbation flow including the remainder nonlinearity.
    pub fn rhs_nonlinear(&self, s: &State) -> Result<State> {
        self.rhs(Mode::Nonlinear, s)
    }

    pub fn rhs_mode(&self, mode: Mode, s: &State) -> Result<State> {
        self.rhs(mode, s)
    }

    /// Right-hand side for the total field, with the nonlinearity `N0` in
    /// place of potential plus remainder. Vanishes on the static profile.
    pub fn rhs_total(&self, s: &State) -> Result<State> {
        let mut out = self.rhs(Mode::Free, s)?;
        let g = Arc::clone(&self.grid);
        for i in 0..g.len() {
            out.psi2.values_mut()[i] += profiles::nonlin_n0(g.rho(i), s.psi1.values()[i], &self.params);
        }
        Ok(out)
    }

    /// Total-field right-hand side at the static profile, sampled on
    /// `rho <= R - 2h`.
    pub fn static_residual(&self) -> Result<f64> {
        let stat = profiles::static_state(&self.grid, &self.params)?;
        let r = self.rhs_total(&stat)?;
        let end = self.grid.cells() - 2;
        Ok(r.psi1.values()[..=end]
            .iter()
            .chain(&r.psi2.values()[..=end])
            .fold(0.0, |a, v| a.max(v.abs())))
    }

    fn rk4_in_place(&self, mode: Mode, u: &mut [Vec<f64>; 2], dt: f64, ws: &mut Workspace) {
        let len = u[0].len();
        self.rhs_slices(mode, &u[0], &u[1], &mut ws.k1, &mut ws.scratch);
        for c in 0..2 {
            for i in 0..len {
                ws.tmp[c][i] = u[c][i] + 0.5 * dt * ws.k1[c][i];
            }
        }
        self.rhs_slices(mode, &ws.tmp[0], &ws.tmp[1], &mut ws.k2, &mut ws.scratch);
        for c in 0..2 {
            for i in 0..len {
                ws.tmp[c][i] = u[c][i] + 0.5 * dt * ws.k2[c][i];
            }
        }
        self.rhs_slices(mode, &ws.tmp[0], &ws.tmp[1], &mut ws.k3, &mut ws.scratch);
        for c in 0..2 {
            for i in 0..len {
                ws.tmp[c][i] = u[c][i] + dt * ws.k3[c][i];
            }
        }
        self.rhs_slices(mode, &ws.tmp[0], &ws.tmp[1], &mut ws.k4, &mut ws.scratch);
        for c in 0..2 {
            for i in 0..len {
                u[c][i] += dt / 6.0 * (ws.k1[c][i] + 2.0 * ws.k2[c][i] + 2.0 * ws.k3[c][i] + ws.k4[c][i]);
            }
        }
    }

    /// One classical RK4 step.
    pub fn step_rk4(&self, s: &State, dtau: f64, mode: Mode) -> Result<State> {
        self.check(s)?;
        let mut u = [s.psi1.values().to_vec(), s.psi2.values().to_vec()];
        let mut ws = Workspace::new(self.grid.len());
        self.rk4_in_place(mode, &mut u, dtau, &mut ws);
        if !u.iter().flatten().all(|v| v.is_finite()) {
            return Err(LabError::Divergence { step: 1, tau: dtau });
        }
        self.state_from(u)
    }

    fn state_from(&self, u: [Vec<f64>; 2]) -> Result<State> {
        let [a, b] = u;
        State::new(
            RadialField::new(Arc::clone(&self.grid), a, Parity::Even)?,
            RadialField::new(Arc::clone(&self.grid), b, Parity::Even)?,
        )
    }

    /// Integrates from `s0` at `tau = 0` to `cfg.tau_end`, recording
    /// diagnostics at `tau = 0` and every `snapshot_every` steps.
    pub fn evolve(&self, s0: &State, cfg: &EvolverConfig, diag: &LightconeDiagnostics) -> Result<Trajectory> {
        self.check(s0)?;
        cfg.validate(&self.grid)?;
        let steps = (cfg.tau_end / cfg.dtau).round() as usize;
        let steps = if (steps as f64 * cfg.dtau - cfg.tau_end).abs() < 1e-9 * cfg.tau_end {
            steps
        } else {
            (cfg.tau_end / cfg.dtau).ceil() as usize
        };
        let mut u = [s0.psi1.values().to_vec(), s0.psi2.values().to_vec()];
        let mut ws = Workspace::new(self.grid.len());
        let mut traj = Trajectory {
            times: vec![0.0],
            states: Vec::new(),
            diagnostics: vec![diag.record(s0)?],
            last: s0.clone(),
            saturated: false,
        };
        if cfg.store_states {
            traj.states.push(s0.clone());
        }
        let mut tau = 0.0;
        for step in 1..=steps {
            let dt = if step == steps { cfg.tau_end - tau } else { cfg.dtau };
            self.rk4_in_place(cfg.mode, &mut u, dt, &mut ws);
            tau = if step == steps { cfg.tau_end } else { step as f64 * cfg.dtau };
            let snapshot = step % cfg.snapshot_every == 0 || step == steps;
            let check_cap = cfg.stop_above.is_some() && step % 8 == 0;
            if (snapshot || check_cap) && !u.iter().flatten().all(|v| v.is_finite()) {
                return Err(LabError::Divergence { step, tau });
            }
            let over = match cfg.stop_above {
                Some(cap) if snapshot || check_cap => {
                    let end = self.grid.index_at_or_below(1.0);
                    u[0][..=end].iter().chain(&u[1][..=end]).any(|v| v.abs() > cap)
                }
                _ => false,
            };
            if snapshot || over {
                let s = self.state_from(u.clone())?;
                let rec = diag.record(&s)?;
                if !(rec.sup_lightcone.is_finite()
                    && rec.gauge_proj.is_finite()
                    && rec.hsk_lightcone.is_none_or(f64::is_finite))
                {
                    return Err(LabError::Divergence { step, tau });
                }
                traj.times.push(tau);
                traj.diagnostics.push(rec);
                if cfg.store_states {
                    traj.states.push(s.clone());
                }
                traj.last = s;
            }
            if over {
                traj.saturated = true;
                break;
            }
        }
        Ok(traj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::profiles::{gauge_mode, static_state};

    fn setup(d: usize, m: usize) -> (Arc<RadialGrid>, ProfileParams, Evolver) {
        let p = ProfileParams::from_d(d).unwrap();
        let g = make_grid(p.n(), 4.0, m).unwrap();
        let e = Evolver::new(Arc::clone(&g), p).unwrap();
        (g, p, e)
    }

    #[test]
    fn free_rhs_on_simple_states() {
        let (g, _, e) = setup(3, 64);
        let s = State::new(g.sample(Parity::Even, |r| r * r), g.zeros()).unwrap();
        let r = e.rhs_free(&s).unwrap();
        for i in 0..g.len() {
            let rho = g.rho(i);
            assert!((r.psi1.values()[i] + 3.0 * rho * rho).abs() < 1e-9);
            assert!((r.psi2.values()[i] - 10.0).abs() < 1e-8);
        }
        let c = 0.7;
        let s = State::new(g.zeros(), g.sample(Parity::Even, |_| c)).unwrap();
        let r = e.rhs_free(&s).unwrap();
        assert!(r.psi1.values().iter().all(|v| (v - c).abs() < 1e-12));
        assert!(r.psi2.values().iter().all(|v| (v + 2.0 * c).abs() < 1e-12));
    }

    #[test]
    fn potential_term_on_gauge_profile() {
        let (g, p, e) = setup(3, 64);
        let s = State::new(g.sample(Parity::Even, |r| profiles::gauge_g(r, &p)), g.zeros()).unwrap();
        let lin = e.rhs_linearized(&s).unwrap();
        let free = e.rhs_free(&s).unwrap();
        for i in 0..g.len() {
            let r = g.rho(i);
            let vg = 8.0 * 1.0 * 2.0 / (r * r + 1.0).powi(3);
            assert!((lin.psi2.values()[i] - free.psi2.values()[i] - vg).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let (g, _, e) = setup(3, 64);
        let z = State::zeros(&g);
        for mode in [Mode::Free, Mode::Linearized, Mode::Nonlinear] {
            assert_eq!(e.rhs_mode(mode, &z).unwrap().max_abs(), 0.0);
            assert_eq!(e.step_rk4(&z, 1e-3, mode).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn odd_states_are_rejected() {
        let (g, _, e) = setup(3, 64);
        let s = State::new(g.sample(Parity::Odd, |r| r), g.zeros()).unwrap();
        assert!(matches!(e.rhs_free(&s), Err(LabError::Contract(_))));
    }

    #[test]
    fn gauge_mode_is_eigenfunction() {
        for d in [3, 4, 5] {
            let (g, p, e) = setup(d, 800);
            let gm = gauge_mode(&g, &p).unwrap();
            let r = e.rhs_linearized(&gm).unwrap();
            let end = g.index_at_or_below(2.0);
            for i in 0..=end {
                for (a, b) in [(&r.psi1, &gm.psi1), (&r.psi2, &gm.psi2)] {
                    let rel = (a.values()[i] - b.values()[i]).abs() / b.values()[i].abs();
                    assert!(rel < 1e-5, "d={d} i={i} rel={rel}");
                }
            }
        }
    }

    #[test]
    fn static_residual_converges() {
        for d in [3, 5] {
            let r1 = setup(d, 200).2.static_residual().unwrap();
            let r2 = setup(d, 400).2.static_residual().unwrap();
            assert!(r1 / r2 >= 12.0, "d={d}: {r1} / {r2}");
        }
    }

    #[test]
    fn nonlinear_matches_total_field_rhs() {
        let (g, p, e) = setup(3, 200);
        let stat = static_state(&g, &p).unwrap();
        let pert = State::new(
            g.sample(Parity::Even, |r| 0.3 * (-r * r).exp()),
            g.sample(Parity::Even, |r| -0.2 * (-2.0 * r * r).exp()),
        )
        .unwrap();
        let total = stat.axpy(1.0, &pert).unwrap();
        let a = e.rhs_total(&total).unwrap().axpy(-1.0, &e.rhs_total(&stat).unwrap()).unwrap();
        let b = e.rhs_nonlinear(&pert).unwrap();
        let d = a.axpy(-1.0, &b).unwrap().max_abs();
        // rounding is amplified by the 1/h^2 stencil weights
        assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn small_states_are_nearly_linear() {
        let (g, _, e) = setup(3, 200);
        let s = State::new(g.sample(Parity::Even, |r| 1e-6 * (-r * r).exp()), g.zeros()).unwrap();
        let d = e.rhs_nonlinear(&s).unwrap().axpy(-1.0, &e.rhs_linearized(&s).unwrap()).unwrap();
        assert!(d.max_abs() < 20.0 * 1e-12);
    }

    #[test]
    fn rk4_step_error_is_fifth_order() {
        // free flow of (rho^2, 0): with a = psi1, b = psi2 the exact flow stays in
        // span{rho^2, 1} and solves a linear ODE system; compare with a fine reference.
        let (g, _, e) = setup(3, 64);
        let s = State::new(g.sample(Parity::Even, |r| r * r), g.zeros()).unwrap();
        let reference = |dt: f64| {
            let mut x = s.clone();
            for _ in 0..64 {
                x = e.step_rk4(&x, dt / 64.0, Mode::Free).unwrap();
            }
            x
        };
        let err = |dt: f64| e.step_rk4(&s, dt, Mode::Free).unwrap().axpy(-1.0, &reference(dt)).unwrap().max_abs();
        let ratio = err(4e-3) / err(2e-3);
        assert!(ratio > 28.0, "ratio {ratio}");
    }

    #[test]
    fn cfl_violation_is_a_config_error() {
        let (g, p, e) = setup(3, 64);
        let mut cfg = EvolverConfig::for_grid(&g, 1.0, Mode::Free, 0.5, 0.1).unwrap();
        cfg.dtau *= 2.0;
        let diag = LightconeDiagnostics::new(&g, &p, Mode::Free, None).unwrap();
        assert!(matches!(e.evolve(&State::zeros(&g), &cfg, &diag), Err(LabError::Config(_))));
    }

    #[test]
    fn zero_data_stays_zero() {
        let (g, p, e) = setup(3, 64);
        for mode in [Mode::Free, Mode::Linearized, Mode::Nonlinear] {
            let cfg = EvolverConfig::for_grid(&g, 1.0, mode, 0.5, 0.25).unwrap();
            let diag = LightconeDiagnostics::new(&g, &p, mode, None).unwrap();
            let t = e.evolve(&State::zeros(&g), &cfg, &diag).unwrap();
            assert_eq!(t.last.max_abs(), 0.0);
            assert_eq!(t.times.len(), 5);
            assert!(t.diagnostics.iter().all(|d| d.sup_lightcone == 0.0 && d.gauge_proj == 0.0));
        }
    }

    #[test]
    fn simpson_weights_integrate_polynomials() {
        for m in [64, 66, 70] {
            let g = make_grid(5, 4.0, m).unwrap();
            let w = simpson_weights(&g, 2.0);
            let end = g.rho(w.len() - 1);
            let q: f64 = w.iter().enumerate().map(|(i, w)| w * g.rho(i).powi(3)).sum();
            assert!((q - end.powi(4) / 4.0).abs() < 1e-12, "m={m}");
        }
    }
}
