//! Vorticity-streamfunction time stepping with unit viscosity.
//!
//! One step advances `d_t omega + u . grad omega = Delta omega` by an IMEX
//! scheme: Crank-Nicolson diffusion solved mode by mode, and (when advection is
//! on) a two-stage Heun treatment of the Arakawa Jacobian
//! `u . grad omega = r^-2 J(psi, omega)`. With advection off the map is the
//! discrete Stokes semigroup.
//!
//! In no-slip mode the wall vorticity follows Thom's formula
//! `omega_wall = 2 psi_1 / (r_wall ds)^2`, imposed implicitly at the new time
//! level through the per-mode response to a unit wall vorticity, and the outer
//! ring carries `omega = 0`.

use std::fmt;
use std::sync::Arc;

use realfft::num_complex::Complex64;

use crate::analytic::{blob_vorticity, oseen_streamfunction_at, oseen_vorticity_at, BlobSpec, OseenParams};
use crate::elliptic::{poisson_rhs_into, thom_coefficient, ModalWorkspace, StreamBoundary};
use crate::error::{Error, Result};
use crate::fields::{lp_norm, ScalarField, VectorField};
use crate::geometry::Grid;

/// Largest advective Courant number accepted by [`Stepper::step`].
pub const CFL_LIMIT: f64 = 0.5;

/// Flow state at one instant. The streamfunction and velocity are derived from
/// the vorticity and kept consistent with it.
#[derive(Debug, Clone)]
pub struct State {
    t: f64,
    omega: ScalarField,
    psi: ScalarField,
    velocity: VectorField,
    gamma_infinity: f64,
}

impl State {
    /// Builds a state from vorticity, deriving `psi` and the velocity.
    pub fn from_vorticity(
        ws: &mut ModalWorkspace,
        t: f64,
        omega: ScalarField,
        gamma_infinity: f64,
        bc: &StreamBoundary,
    ) -> Result<Self> {
        let psi = ws.solve_streamfunction_with(&omega, bc)?;
        let velocity = ws.velocity(&psi)?;
        Ok(State {
            t,
            omega,
            psi,
            velocity,
            gamma_infinity,
        })
    }

    pub fn zero(grid: &Arc<Grid>, t: f64) -> Self {
        State {
            t,
            omega: ScalarField::zeros(grid),
            psi: ScalarField::zeros(grid),
            velocity: VectorField::zeros(grid),
            gamma_infinity: 0.0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn omega(&self) -> &ScalarField {
        &self.omega
    }

    pub fn psi(&self) -> &ScalarField {
        &self.psi
    }

    pub fn velocity(&self) -> &VectorField {
        &self.velocity
    }

    pub fn gamma_infinity(&self) -> f64 {
        self.gamma_infinity
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.omega.grid()
    }

    /// `||u||_{L^2}` over the annulus.
    pub fn kinetic_norm(&self) -> f64 {
        lp_norm(&self.velocity, 2.0).expect("p = 2 is valid")
    }

    /// Largest velocity magnitude on the wall row.
    pub fn wall_slip(&self) -> f64 {
        let g = self.grid();
        (0..g.n_theta())
            .map(|j| {
                let [a, b] = self.velocity.at(0, j);
                a.hypot(b)
            })
            .fold(0.0, f64::max)
    }

    /// Counterclockwise circulation on the outer ring.
    pub fn outer_circulation(&self) -> f64 {
        self.velocity.circulation_at_ring(self.grid().n_s() - 1)
    }

    /// Advective Courant number `dt (|u_r| / (r ds) + |u_theta| / (r dtheta))`.
    pub fn courant_number(&self, dt: f64) -> f64 {
        let g = self.grid();
        let (u1, u2) = (self.velocity.u1(), self.velocity.u2());
        let mut worst = 0.0_f64;
        for i in 0..g.n_s() {
            let r = g.radius(i);
            for j in 0..g.n_theta() {
                let k = g.index(i, j);
                let (c, s) = (g.cos_theta(j), g.sin_theta(j));
                let ur = u1[k] * c + u2[k] * s;
                let ut = -u1[k] * s + u2[k] * c;
                worst = worst.max(ur.abs() / (r * g.ds()) + ut.abs() / (r * g.dtheta()));
            }
        }
        dt * worst
    }

    /// Largest step keeping the Courant number at [`CFL_LIMIT`].
    pub fn max_stable_dt(&self) -> f64 {
        let c = self.courant_number(1.0);
        if c == 0.0 {
            f64::INFINITY
        } else {
            CFL_LIMIT / c
        }
    }
}

/// Ring values of vorticity and streamfunction on the wall and the outer ring.
#[derive(Debug, Clone, PartialEq)]
pub struct RingValues {
    pub omega_wall: Vec<f64>,
    pub omega_outer: Vec<f64>,
    pub psi_wall: Vec<f64>,
    pub psi_outer: Vec<f64>,
}

/// Time-dependent boundary data for the prescribed wall mode.
pub trait BoundaryData: Send + Sync + fmt::Debug {
    fn rings(&self, t: f64, grid: &Grid) -> RingValues;
}

/// Exact trace of the Lamb-Oseen vortex `alpha Theta(t)` on both rings.
#[derive(Debug, Clone, Copy)]
pub struct OseenBoundary {
    pub alpha: f64,
}

impl BoundaryData for OseenBoundary {
    fn rings(&self, t: f64, grid: &Grid) -> RingValues {
        let p = OseenParams { alpha: self.alpha, t };
        let ring = |i: usize| {
            let r = grid.radius(i);
            let omega = oseen_vorticity_at(p, [r, 0.0]);
            let psi = oseen_streamfunction_at(p, r, grid.r_wall());
            (vec![omega; grid.n_theta()], vec![psi; grid.n_theta()])
        };
        let (omega_wall, psi_wall) = ring(0);
        let (omega_outer, psi_outer) = ring(grid.n_s() - 1);
        RingValues {
            omega_wall,
            omega_outer,
            psi_wall,
            psi_outer,
        }
    }
}

#[derive(Debug, Clone)]
pub enum WallMode {
    NoSlip,
    Prescribed(Arc<dyn BoundaryData>),
}

#[derive(Debug, Clone)]
pub struct StepPolicy {
    pub dt: f64,
    /// Step used while `t < startup_until`.
    pub startup_dt: f64,
    pub startup_until: f64,
    pub advection: bool,
    pub wall: WallMode,
}

impl StepPolicy {
    pub fn new(dt: f64, advection: bool, wall: WallMode) -> Self {
        StepPolicy {
            dt,
            startup_dt: dt,
            startup_until: 0.0,
            advection,
            wall,
        }
    }

    /// No-slip policy with the startup refinement: while `t < 0.1 r_wall^2` the
    /// step is at most `(r_wall ds)^2 / 4`, which resolves the initial wall sheet.
    pub fn noslip(grid: &Grid, dt: f64, advection: bool) -> Self {
        let h = grid.r_wall() * grid.ds();
        StepPolicy {
            dt,
            startup_dt: dt.min(0.25 * h * h),
            startup_until: 0.1 * grid.r_wall() * grid.r_wall(),
            advection,
            wall: WallMode::NoSlip,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite() && self.startup_dt > 0.0 && self.startup_dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time steps must be positive (dt = {}, startup_dt = {})",
                self.dt, self.startup_dt
            )));
        }
        Ok(())
    }

    pub fn nominal_dt(&self, t: f64) -> f64 {
        if t < self.startup_until {
            self.startup_dt
        } else {
            self.dt
        }
    }
}

/// `u_0 = u~_0 + alpha H`: vorticity from the blobs (the harmonic part carries
/// none) and far-field circulation `-alpha` plus the blobs' total vorticity,
/// which leaves `u~_0` with zero circulation on the wall.
pub fn init_state(ws: &mut ModalWorkspace, alpha: f64, blobs: &BlobSpec) -> Result<State> {
    let grid = ws.grid().clone();
    if !alpha.is_finite() {
        return Err(Error::NonFinite("alpha".into()));
    }
    let omega = if blobs.is_empty() {
        ScalarField::zeros(&grid)
    } else {
        blob_vorticity(blobs, &grid)?
    };
    let gamma = -alpha + omega.integral();
    State::from_vorticity(ws, 0.0, omega, gamma, &StreamBoundary::Circulation(gamma))
}

/// Owns the workspace for one grid and advances states under a [`StepPolicy`].
pub struct Stepper {
    grid: Arc<Grid>,
    ws: ModalWorkspace,
    policy: StepPolicy,
    spec_omega: Vec<Complex64>,
    spec_explicit: Vec<Complex64>,
    spec_adv0: Vec<Complex64>,
    spec_adv1: Vec<Complex64>,
    spec_rhs: Vec<Complex64>,
    spec_psi: Vec<Complex64>,
    column: Vec<Complex64>,
}

impl fmt::Debug for Stepper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stepper").field("policy", &self.policy).field("ws", &self.ws).finish()
    }
}

/// Boundary data in spectral form for one stage.
struct StageBoundary {
    omega_wall: Vec<Complex64>,
    omega_outer: Vec<Complex64>,
    psi_wall: Vec<Complex64>,
    psi_outer: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: &Arc<Grid>, policy: StepPolicy) -> Result<Self> {
        policy.validate()?;
        let ws = ModalWorkspace::new(grid)?;
        let len = grid.n_s() * ws.n_modes();
        let zero = Complex64::new(0.0, 0.0);
        Ok(Stepper {
            grid: grid.clone(),
            ws,
            policy,
            spec_omega: vec![zero; len],
            spec_explicit: vec![zero; len],
            spec_adv0: vec![zero; len],
            spec_adv1: vec![zero; len],
            spec_rhs: vec![zero; len],
            spec_psi: vec![zero; len],
            column: vec![zero; grid.n_s()],
        })
    }

    pub fn policy(&self) -> &StepPolicy {
        &self.policy
    }

    pub fn workspace(&mut self) -> &mut ModalWorkspace {
        &mut self.ws
    }

    /// Streamfunction boundary condition matching the wall mode at time `t`.
    pub fn stream_boundary(&self, t: f64, gamma: f64) -> StreamBoundary {
        match &self.policy.wall {
            WallMode::NoSlip => StreamBoundary::Circulation(gamma),
            WallMode::Prescribed(data) => {
                let rings = data.rings(t, &self.grid);
                StreamBoundary::Dirichlet {
                    wall: rings.psi_wall,
                    outer: rings.psi_outer,
                }
            }
        }
    }

    /// State with the given vorticity, consistent with this stepper's wall mode.
    pub fn state_from_vorticity(&mut self, t: f64, omega: ScalarField, gamma: f64) -> Result<State> {
        let bc = self.stream_boundary(t, gamma);
        State::from_vorticity(&mut self.ws, t, omega, gamma, &bc)
    }

    /// One step of size `policy.dt`.
    pub fn step(&mut self, state: &State) -> Result<State> {
        let dt = self.policy.dt;
        self.step_by(state, dt, state.t + dt)
    }

    /// One step of size `dt`, stamping the result with time `t_new`.
    pub fn step_by(&mut self, state: &State, dt: f64, t_new: f64) -> Result<State> {
        if **state.grid() != *self.grid {
            return Err(Error::GridMismatch);
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if self.policy.advection {
            let courant = state.courant_number(dt);
            if courant > CFL_LIMIT {
                return Err(Error::Cfl {
                    courant,
                    limit: CFL_LIMIT,
                });
            }
        }
        let n_s = self.grid.n_s();
        let n_modes = self.ws.n_modes();
        let gamma = state.gamma_infinity;
        let bnd = self.stage_boundary(t_new);

        let mut spec_omega = std::mem::take(&mut self.spec_omega);
        self.ws.forward(state.omega.values(), &mut spec_omega);
        self.explicit_diffusion(&spec_omega, dt);
        self.spec_omega = spec_omega;

        let (omega_new, psi_new) = if self.policy.advection {
            let adv = advection_term(&state.psi, &state.omega);
            let mut spec_adv0 = std::mem::take(&mut self.spec_adv0);
            self.ws.forward(&adv, &mut spec_adv0);
            for idx in 0..n_s * n_modes {
                self.spec_rhs[idx] = self.spec_explicit[idx] - spec_adv0[idx] * dt;
            }
            let (omega_pred, psi_pred) = self.implicit_stage(dt, gamma, &bnd)?;

            let adv = advection_term(&psi_pred, &omega_pred);
            let mut spec_adv1 = std::mem::take(&mut self.spec_adv1);
            self.ws.forward(&adv, &mut spec_adv1);
            for idx in 0..n_s * n_modes {
                self.spec_rhs[idx] = self.spec_explicit[idx] - (spec_adv0[idx] + spec_adv1[idx]) * (0.5 * dt);
            }
            self.spec_adv0 = spec_adv0;
            self.spec_adv1 = spec_adv1;
            self.implicit_stage(dt, gamma, &bnd)?
        } else {
            self.spec_rhs.copy_from_slice(&self.spec_explicit);
            self.implicit_stage(dt, gamma, &bnd)?
        };

        if omega_new.values().iter().chain(psi_new.values()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("step to t = {t_new}")));
        }
        let velocity = self.ws.velocity(&psi_new)?;
        Ok(State {
            t: t_new,
            omega: omega_new,
            psi: psi_new,
            velocity,
            gamma_infinity: gamma,
        })
    }

    fn stage_boundary(&mut self, t_new: f64) -> Option<StageBoundary> {
        match &self.policy.wall {
            WallMode::NoSlip => None,
            WallMode::Prescribed(data) => {
                let rings = data.rings(t_new, &self.grid);
                let n_modes = self.ws.n_modes();
                let zero = Complex64::new(0.0, 0.0);
                let mut spectral = |v: &[f64]| {
                    let mut out = vec![zero; n_modes];
                    self.ws.forward_ring(v, &mut out);
                    out
                };
                Some(StageBoundary {
                    omega_wall: spectral(&rings.omega_wall),
                    omega_outer: spectral(&rings.omega_outer),
                    psi_wall: spectral(&rings.psi_wall),
                    psi_outer: spectral(&rings.psi_outer),
                })
            }
        }
    }

    /// `spec_explicit = (I + dt/2 L_k) omega_k` on interior rows.
    fn explicit_diffusion(&mut self, spec_omega: &[Complex64], dt: f64) {
        let n_s = self.grid.n_s();
        let h2 = self.grid.ds() * self.grid.ds();
        let radii = self.grid.radii();
        for k in 0..self.ws.n_modes() {
            let k2h2 = (k * k) as f64 * h2;
            let w = &spec_omega[k * n_s..(k + 1) * n_s];
            let out = &mut self.spec_explicit[k * n_s..(k + 1) * n_s];
            out[0] = w[0];
            out[n_s - 1] = w[n_s - 1];
            for i in 1..n_s - 1 {
                let beta = 0.5 * dt / (radii[i] * radii[i] * h2);
                out[i] = w[i] + (w[i + 1] + w[i - 1] - w[i] * (2.0 + k2h2)) * beta;
            }
        }
    }

    /// Solves the implicit diffusion and the streamfunction for every mode from
    /// `spec_rhs`, closing the wall vorticity, and returns physical fields.
    fn implicit_stage(&mut self, dt: f64, gamma: f64, bnd: &Option<StageBoundary>) -> Result<(ScalarField, ScalarField)> {
        let n_s = self.grid.n_s();
        let n_modes = self.ws.n_modes();
        let zero = Complex64::new(0.0, 0.0);
        let responses = match bnd {
            None => Some(self.ws.wall_responses(dt)?),
            Some(_) => None,
        };
        let thom = thom_coefficient(&self.grid);
        for k in 0..n_modes {
            let helm = self.ws.helmholtz(k, dt)?;
            let slab = &mut self.spec_rhs[k * n_s..(k + 1) * n_s];
            match bnd {
                None => {
                    slab[0] = zero;
                    slab[n_s - 1] = zero;
                }
                Some(b) => {
                    slab[0] = b.omega_wall[k];
                    slab[n_s - 1] = b.omega_outer[k];
                }
            }
            helm.solve_in_place(slab);
            let psi = &mut self.spec_psi[k * n_s..(k + 1) * n_s];
            match bnd {
                None => {
                    let flux = if k == 0 { gamma / (2.0 * std::f64::consts::PI) } else { 0.0 };
                    poisson_rhs_into(&self.grid, slab, zero, zero, k == 0, flux, &mut self.column);
                    self.ws.poisson(k, true).solve_in_place(&mut self.column);
                    let resp = &responses.as_ref().expect("no-slip responses")[k];
                    let w0 = self.column[1] * (thom / resp.denom);
                    for i in 0..n_s {
                        slab[i] += w0 * resp.omega[i];
                        psi[i] = self.column[i] + w0 * resp.psi[i];
                    }
                }
                Some(b) => {
                    poisson_rhs_into(&self.grid, slab, b.psi_wall[k], b.psi_outer[k], false, 0.0, &mut self.column);
                    self.ws.poisson(k, false).solve_in_place(&mut self.column);
                    psi.copy_from_slice(&self.column);
                }
            }
        }
        let mut omega = vec![0.0; self.grid.n_nodes()];
        let mut psi = vec![0.0; self.grid.n_nodes()];
        let spec_rhs = std::mem::take(&mut self.spec_rhs);
        self.ws.inverse(&spec_rhs, &mut omega);
        self.spec_rhs = spec_rhs;
        let spec_psi = std::mem::take(&mut self.spec_psi);
        self.ws.inverse(&spec_psi, &mut psi);
        self.spec_psi = spec_psi;
        if matches!(bnd, None) {
            let last = self.grid.n_s() - 1;
            let n_theta = self.grid.n_theta();
            omega[last * n_theta..].iter_mut().for_each(|v| *v = 0.0);
        }
        Ok((
            ScalarField::from_values_unchecked(&self.grid, omega),
            ScalarField::from_values_unchecked(&self.grid, psi),
        ))
    }

    /// Advances to `t_end`, landing exactly on every probe time.
    ///
    /// Each segment between consecutive targets is covered by uniform steps of
    /// the nominal size with the last one shrunk to land on the target. The
    /// observer sees every intermediate state.
    pub fn evolve_to(
        &mut self,
        state: &State,
        t_end: f64,
        probes: &[f64],
        mut observer: impl FnMut(&State),
    ) -> Result<(State, Vec<State>)> {
        if !(t_end > state.t) {
            return Err(Error::InvalidArgument(format!(
                "final time {t_end} must exceed the current time {}",
                state.t
            )));
        }
        for w in probes.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidArgument("probe times must be strictly increasing".into()));
            }
        }
        if let (Some(first), Some(last)) = (probes.first(), probes.last()) {
            if !(*first > state.t && *last <= t_end) {
                return Err(Error::InvalidArgument(format!(
                    "probe times must lie in ({}, {t_end}]",
                    state.t
                )));
            }
        }

        let mut targets: Vec<(f64, bool)> = probes.iter().map(|&p| (p, true)).collect();
        if probes.last() != Some(&t_end) {
            targets.push((t_end, false));
        }
        if self.policy.startup_until > state.t && self.policy.startup_until < t_end && !probes.contains(&self.policy.startup_until) {
            targets.push((self.policy.startup_until, false));
            targets.sort_by(|a, b| a.0.total_cmp(&b.0));
        }

        let mut current = state.clone();
        let mut snapshots = Vec::with_capacity(probes.len());
        for (target, is_probe) in targets {
            let start = current.t;
            let dt = self.policy.nominal_dt(start);
            let n = ((target - start) / dt - 1e-9).ceil().max(1.0) as usize;
            for m in 1..=n {
                let t_new = if m == n { target } else { start + m as f64 * dt };
                let mut h = t_new - current.t;
                if (h - dt).abs() <= 1e-9 * dt {
                    h = dt;
                }
                current = self
                    .step_by(&current, h, t_new)
                    .map_err(|e| e.context(format!("step to t = {t_new}")))?;
                observer(&current);
            }
            if is_probe {
                snapshots.push(current.clone());
            }
        }
        Ok((current, snapshots))
    }
}

/// `r^-2 J(psi, omega)` with Arakawa's energy- and enstrophy-conserving
/// Jacobian in `(s, theta)`; zero on the two boundary rows.
pub(crate) fn advection_term(psi: &ScalarField, omega: &ScalarField) -> Vec<f64> {
    let g = psi.grid();
    let (n_s, nt) = (g.n_s(), g.n_theta());
    let p = psi.values();
    let w = omega.values();
    let mut out = vec![0.0; n_s * nt];
    let scale = 1.0 / (12.0 * g.ds() * g.dtheta());
    for i in 1..n_s - 1 {
        let factor = scale / (g.radius(i) * g.radius(i));
        let (rm, r0, rp) = ((i - 1) * nt, i * nt, (i + 1) * nt);
        for j in 0..nt {
            let jp = if j + 1 == nt { 0 } else { j + 1 };
            let jm = if j == 0 { nt - 1 } else { j - 1 };
            let j1 = (p[rp + j] - p[rm + j]) * (w[r0 + jp] - w[r0 + jm])
                - (p[r0 + jp] - p[r0 + jm]) * (w[rp + j] - w[rm + j]);
            let j2 = p[rp + j] * (w[rp + jp] - w[rp + jm]) - p[rm + j] * (w[rm + jp] - w[rm + jm])
                - p[r0 + jp] * (w[rp + jp] - w[rm + jp])
                + p[r0 + jm] * (w[rp + jm] - w[rm + jm]);
            let j3 = w[r0 + jp] * (p[rp + jp] - p[rm + jp]) - w[r0 + jm] * (p[rp + jm] - p[rm + jm])
                - w[rp + j] * (p[rp + jp] - p[rp + jm])
                + w[rm + j] * (p[rm + jp] - p[rm + jm]);
            out[r0 + j] = (j1 + j2 + j3) * factor;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{harmonic_velocity, Blob};

    fn grid(ns: usize, nt: usize) -> Arc<Grid> {
        Arc::new(Grid::new(1.0, 64f64.ln(), ns, nt).unwrap())
    }

    fn pair() -> BlobSpec {
        BlobSpec::new(vec![
            Blob {
                center: [3.0, 1.0],
                width: 0.5,
                mass: 1.0,
            },
            Blob {
                center: [3.0, -1.0],
                width: 0.5,
                mass: -1.0,
            },
        ])
    }

    #[test]
    fn init_with_pure_harmonic_part() {
        let g = grid(48, 16);
        let mut ws = ModalWorkspace::new(&g).unwrap();
        let s = init_state(&mut ws, 1.0, &BlobSpec::empty()).unwrap();
        assert!(s.omega().values().iter().all(|v| *v == 0.0));
        let h = harmonic_velocity(&g).unwrap();
        assert!(lp_norm(&s.velocity().subtract(&h).unwrap(), f64::INFINITY).unwrap() < 1e-8);
        assert_eq!(s.gamma_infinity(), -1.0);

        let z = init_state(&mut ws, 0.0, &BlobSpec::empty()).unwrap();
        assert_eq!(z.kinetic_norm(), 0.0);
    }

    #[test]
    fn init_with_blob_pair() {
        let g = grid(96, 64);
        let mut ws = ModalWorkspace::new(&g).unwrap();
        let s = init_state(&mut ws, 0.0, &pair()).unwrap();
        assert!(s.kinetic_norm() > 0.0 && s.kinetic_norm().is_finite());
        assert!(s.outer_circulation().abs() < 1e-6);
        let bad = BlobSpec::new(vec![Blob {
            center: [1.2, 0.0],
            width: 0.2,
            mass: 1.0,
        }]);
        assert!(init_state(&mut ws, 0.0, &bad).is_err());
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let g = grid(24, 16);
        for advection in [false, true] {
            let mut st = Stepper::new(&g, StepPolicy::noslip(&g, 1e-2, advection)).unwrap();
            let z = State::zero(&g, 0.0);
            let next = st.step(&z).unwrap();
            assert!(next.omega().values().iter().all(|v| *v == 0.0));
            assert!(next.psi().values().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn arakawa_vanishes_for_radial_fields() {
        let g = grid(24, 16);
        let a = ScalarField::sample(&g, |[x, y]| (-(x * x + y * y) / 5.0).exp()).unwrap();
        let b = ScalarField::sample(&g, |[x, y]| (x * x + y * y).ln()).unwrap();
        assert!(advection_term(&b, &a).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn rejects_cfl_violation() {
        let g = grid(24, 16);
        let mut st = Stepper::new(&g, StepPolicy::new(10.0, true, WallMode::NoSlip)).unwrap();
        let s = init_state(st.workspace(), 0.0, &pair()).unwrap();
        assert!(matches!(st.step(&s), Err(Error::Cfl { .. })));
    }

    #[test]
    fn evolve_to_argument_checks() {
        let g = grid(16, 8);
        let mut st = Stepper::new(&g, StepPolicy::noslip(&g, 1e-2, false)).unwrap();
        let s = State::zero(&g, 1.0);
        assert!(st.evolve_to(&s, 0.5, &[], |_| {}).is_err());
        assert!(st.evolve_to(&s, 2.0, &[1.5, 1.2], |_| {}).is_err());
        assert!(st.evolve_to(&s, 2.0, &[2.5], |_| {}).is_err());
        let (fin, snaps) = st.evolve_to(&s, 1.1, &[], |_| {}).unwrap();
        assert!(snaps.is_empty());
        assert_eq!(fin.t(), 1.1);
    }
}
