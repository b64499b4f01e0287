//! Azimuthal-spectral, radial finite-difference solvers on the log-polar grid.
//!
//! In `(s, theta)` the Laplacian is `r^-2 (d_ss + d_thetatheta)` with
//! `r = r_wall e^s`. After a real FFT in `theta` every mode `k` decouples into
//! a tridiagonal system in `s`:
//!
//! * streamfunction: `r^-2 (psi_ss - k^2 psi) = omega`;
//! * implicit diffusion: `(I - dt/2 r^-2 (d_ss - k^2)) w = rhs`.
//!
//! Spectral coefficients are normalised so that mode 0 is the ring average.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Mul, Sub};
use std::sync::Arc;

use realfft::num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::fields::{ScalarField, VectorField};
use crate::geometry::{diff_s, Grid};

/// Thomas factorisation of `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    pub(crate) fn factor(lower: Vec<f64>, diag: &[f64], upper: &[f64], mode: usize) -> Result<Self> {
        let n = diag.len();
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        for i in 0..n {
            let pivot = if i == 0 {
                diag[0]
            } else {
                diag[i] - lower[i] * upper_mod[i - 1]
            };
            if !pivot.is_finite() || pivot.abs() < 1e-300 {
                return Err(Error::SingularSystem { mode, pivot });
            }
            inv_pivot[i] = 1.0 / pivot;
            upper_mod[i] = upper[i] * inv_pivot[i];
        }
        Ok(Tridiagonal {
            lower,
            upper_mod,
            inv_pivot,
        })
    }

    pub(crate) fn solve_in_place<T>(&self, x: &mut [T])
    where
        T: Copy + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let n = x.len();
        x[0] = x[0] * self.inv_pivot[0];
        for i in 1..n {
            x[i] = (x[i] - x[i - 1] * self.lower[i]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            x[i] = x[i] - x[i + 1] * self.upper_mod[i];
        }
    }
}

/// Boundary data for the streamfunction problem.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamBoundary {
    /// `psi = 0` on the wall; on the outer ring the ring average satisfies
    /// `d_s psi = gamma / (2 pi)` (total counterclockwise circulation `gamma`)
    /// and every other azimuthal mode vanishes.
    Circulation(f64),
    /// Ring values of `psi` on the wall and on the outer ring.
    Dirichlet { wall: Vec<f64>, outer: Vec<f64> },
}

/// Influence of a unit wall vorticity on mode `k` for one step size.
#[derive(Debug, Clone)]
pub(crate) struct WallResponse {
    pub omega: Vec<f64>,
    pub psi: Vec<f64>,
    /// `1 - thom * psi[1]`, the denominator of the wall-vorticity closure.
    pub denom: f64,
}

/// FFT plans, scratch buffers and cached per-mode factorisations for one grid.
pub struct ModalWorkspace {
    grid: Arc<Grid>,
    n_modes: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    ring: Vec<f64>,
    half: Vec<Complex64>,
    scratch_fwd: Vec<Complex64>,
    scratch_inv: Vec<Complex64>,
    poisson_dirichlet: Vec<Tridiagonal>,
    poisson_neumann0: Tridiagonal,
    helmholtz: HashMap<(usize, u64), Arc<Tridiagonal>>,
    wall_response: HashMap<u64, Arc<Vec<WallResponse>>>,
}

impl std::fmt::Debug for ModalWorkspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModalWorkspace")
            .field("n_s", &self.grid.n_s())
            .field("n_theta", &self.grid.n_theta())
            .field("cached_helmholtz", &self.helmholtz.len())
            .finish()
    }
}

impl ModalWorkspace {
    pub fn new(grid: &Arc<Grid>) -> Result<Self> {
        let n_theta = grid.n_theta();
        let mut planner = RealFftPlanner::<f64>::new();
        let r2c = planner.plan_fft_forward(n_theta);
        let c2r = planner.plan_fft_inverse(n_theta);
        let scratch_fwd = r2c.make_scratch_vec();
        let scratch_inv = c2r.make_scratch_vec();
        let n_modes = n_theta / 2 + 1;
        let mut poisson_dirichlet = Vec::with_capacity(n_modes);
        for k in 0..n_modes {
            poisson_dirichlet.push(poisson_factor(grid, k, false)?);
        }
        let poisson_neumann0 = poisson_factor(grid, 0, true)?;
        Ok(ModalWorkspace {
            grid: grid.clone(),
            n_modes,
            r2c,
            c2r,
            ring: vec![0.0; n_theta],
            half: vec![Complex64::new(0.0, 0.0); n_modes],
            scratch_fwd,
            scratch_inv,
            poisson_dirichlet,
            poisson_neumann0,
            helmholtz: HashMap::new(),
            wall_response: HashMap::new(),
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Number of retained azimuthal modes, `n_theta / 2 + 1`.
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Azimuthal transform of a radial-major nodal array into a mode-major
    /// spectrum `spec[k * n_s + i]`.
    pub fn forward(&mut self, values: &[f64], spec: &mut [Complex64]) {
        let (n_s, n_theta) = (self.grid.n_s(), self.grid.n_theta());
        let norm = 1.0 / n_theta as f64;
        for i in 0..n_s {
            self.ring.copy_from_slice(&values[i * n_theta..(i + 1) * n_theta]);
            self.r2c
                .process_with_scratch(&mut self.ring, &mut self.half, &mut self.scratch_fwd)
                .expect("FFT buffer sizes are fixed by the plan");
            for k in 0..self.n_modes {
                spec[k * n_s + i] = self.half[k] * norm;
            }
        }
    }

    /// Inverse of [`ModalWorkspace::forward`].
    pub fn inverse(&mut self, spec: &[Complex64], values: &mut [f64]) {
        let (n_s, n_theta) = (self.grid.n_s(), self.grid.n_theta());
        let last = self.n_modes - 1;
        for i in 0..n_s {
            for k in 0..self.n_modes {
                self.half[k] = spec[k * n_s + i];
            }
            self.half[0].im = 0.0;
            self.half[last].im = 0.0;
            self.c2r
                .process_with_scratch(&mut self.half, &mut self.ring, &mut self.scratch_inv)
                .expect("FFT buffer sizes are fixed by the plan");
            values[i * n_theta..(i + 1) * n_theta].copy_from_slice(&self.ring);
        }
    }

    /// Transform of a single ring of `n_theta` values into `n_modes` coefficients.
    pub(crate) fn forward_ring(&mut self, values: &[f64], out: &mut [Complex64]) {
        let norm = 1.0 / self.grid.n_theta() as f64;
        self.ring.copy_from_slice(values);
        self.r2c
            .process_with_scratch(&mut self.ring, &mut self.half, &mut self.scratch_fwd)
            .expect("FFT buffer sizes are fixed by the plan");
        for (o, h) in out.iter_mut().zip(&self.half) {
            *o = *h * norm;
        }
    }

    pub(crate) fn poisson(&self, k: usize, neumann: bool) -> &Tridiagonal {
        if neumann && k == 0 {
            &self.poisson_neumann0
        } else {
            &self.poisson_dirichlet[k]
        }
    }

    pub(crate) fn helmholtz(&mut self, k: usize, dt: f64) -> Result<Arc<Tridiagonal>> {
        let key = (k, dt.to_bits());
        if let Some(f) = self.helmholtz.get(&key) {
            return Ok(f.clone());
        }
        let f = Arc::new(helmholtz_factor(&self.grid, k, dt)?);
        self.helmholtz.insert(key, f.clone());
        Ok(f)
    }

    /// Per-mode response to a unit wall vorticity with homogeneous data elsewhere,
    /// used to close the no-slip condition implicitly.
    pub(crate) fn wall_responses(&mut self, dt: f64) -> Result<Arc<Vec<WallResponse>>> {
        if let Some(r) = self.wall_response.get(&dt.to_bits()) {
            return Ok(r.clone());
        }
        let n_s = self.grid.n_s();
        let thom = thom_coefficient(&self.grid);
        let mut out = Vec::with_capacity(self.n_modes);
        for k in 0..self.n_modes {
            let mut omega = vec![0.0; n_s];
            omega[0] = 1.0;
            self.helmholtz(k, dt)?.solve_in_place(&mut omega);
            let mut psi = poisson_rhs(&self.grid, &omega, 0.0, 0.0, k == 0, 0.0);
            self.poisson(k, true).solve_in_place(&mut psi);
            let denom = 1.0 - thom * psi[1];
            out.push(WallResponse { omega, psi, denom });
        }
        let out = Arc::new(out);
        self.wall_response.insert(dt.to_bits(), out.clone());
        Ok(out)
    }

    /// Solves `(I - dt/2 r^-2 (d_ss - k^2)) w = rhs` with identity rows at both
    /// radial ends (boundary values are carried in `rhs[0]` and `rhs[n_s - 1]`).
    pub fn helmholtz_step_solve(&mut self, k: usize, dt: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        if k >= self.n_modes {
            return Err(Error::InvalidArgument(format!("mode {k} exceeds {}", self.n_modes - 1)));
        }
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be nonnegative, got {dt}")));
        }
        if rhs.len() != self.grid.n_s() {
            return Err(Error::InvalidArgument(format!(
                "rhs length {} differs from n_s = {}",
                rhs.len(),
                self.grid.n_s()
            )));
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("helmholtz rhs".into()));
        }
        let mut w = rhs.to_vec();
        self.helmholtz(k, dt)?.solve_in_place(&mut w);
        Ok(w)
    }

    /// Velocity `(-d psi/dy, d psi/dx)` through `u_r = -psi_theta / r` and
    /// `u_theta = psi_s / r`, with `psi_theta` spectral and `psi_s` centred
    /// (one-sided on the two boundary rings).
    pub fn velocity(&mut self, psi: &ScalarField) -> Result<VectorField> {
        if **psi.grid() != *self.grid {
            return Err(Error::GridMismatch);
        }
        let g = self.grid.clone();
        let (n_s, n_theta) = (g.n_s(), g.n_theta());
        let v = psi.values();
        let norm = 1.0 / n_theta as f64;
        let nyquist = self.n_modes - 1;
        let mut u1 = Vec::with_capacity(n_s * n_theta);
        let mut u2 = Vec::with_capacity(n_s * n_theta);
        for i in 0..n_s {
            self.ring.copy_from_slice(&v[i * n_theta..(i + 1) * n_theta]);
            self.r2c
                .process_with_scratch(&mut self.ring, &mut self.half, &mut self.scratch_fwd)
                .expect("FFT buffer sizes are fixed by the plan");
            for (k, h) in self.half.iter_mut().enumerate() {
                *h = Complex64::new(-h.im, h.re) * (k as f64 * norm);
            }
            self.half[nyquist] = Complex64::new(0.0, 0.0);
            self.c2r
                .process_with_scratch(&mut self.half, &mut self.ring, &mut self.scratch_inv)
                .expect("FFT buffer sizes are fixed by the plan");
            let r = g.radius(i);
            for j in 0..n_theta {
                let ur = -self.ring[j] / r;
                let ut = diff_s(v, n_s, n_theta, i, j, g.ds()) / r;
                let (c, s) = (g.cos_theta(j), g.sin_theta(j));
                u1.push(ur * c - ut * s);
                u2.push(ur * s + ut * c);
            }
        }
        VectorField::from_components(&g, u1, u2)
    }

    /// `psi` with `Delta psi = omega` and the far-field circulation `gamma_total`.
    pub fn solve_streamfunction(&mut self, omega: &ScalarField, gamma_total: f64) -> Result<ScalarField> {
        self.solve_streamfunction_with(omega, &StreamBoundary::Circulation(gamma_total))
    }

    pub fn solve_streamfunction_with(&mut self, omega: &ScalarField, bc: &StreamBoundary) -> Result<ScalarField> {
        if **omega.grid() != *self.grid {
            return Err(Error::GridMismatch);
        }
        if omega.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vorticity".into()));
        }
        let (n_s, n_theta) = (self.grid.n_s(), self.grid.n_theta());
        let zero = Complex64::new(0.0, 0.0);
        let mut spec = vec![zero; n_s * self.n_modes];
        self.forward(omega.values(), &mut spec);

        let mut wall = vec![zero; self.n_modes];
        let mut outer = vec![zero; self.n_modes];
        let mut gamma = 0.0;
        let neumann = match bc {
            StreamBoundary::Circulation(g) => {
                if !g.is_finite() {
                    return Err(Error::NonFinite("circulation".into()));
                }
                gamma = *g;
                true
            }
            StreamBoundary::Dirichlet { wall: w, outer: o } => {
                if w.len() != n_theta || o.len() != n_theta {
                    return Err(Error::InvalidArgument("ring data must have n_theta values".into()));
                }
                if w.iter().chain(o).any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("streamfunction ring data".into()));
                }
                self.forward_ring(w, &mut wall);
                self.forward_ring(o, &mut outer);
                false
            }
        };

        let mut column = vec![zero; n_s];
        for k in 0..self.n_modes {
            let slab = &mut spec[k * n_s..(k + 1) * n_s];
            let flux = if neumann && k == 0 { gamma / (2.0 * PI) } else { 0.0 };
            poisson_rhs_into(&self.grid, slab, wall[k], outer[k], neumann && k == 0, flux, &mut column);
            self.poisson(k, neumann).solve_in_place(&mut column);
            slab.copy_from_slice(&column);
        }
        let mut psi = vec![0.0; n_s * n_theta];
        self.inverse(&spec, &mut psi);
        ScalarField::from_values(&self.grid, psi)
    }
}

/// `2 / (r_wall^2 ds^2)`: Thom's closure gives wall vorticity `thom * psi_1`
/// when `psi` vanishes on the wall.
pub(crate) fn thom_coefficient(grid: &Grid) -> f64 {
    2.0 / (grid.r_wall() * grid.r_wall() * grid.ds() * grid.ds())
}

/// Scaled radial Poisson operator for mode `k`:
/// rows `(psi_{i-1} - (2 + k^2 ds^2) psi_i + psi_{i+1}) = ds^2 r_i^2 omega_i`,
/// identity at the wall, identity or the mode-0 ghost-point Neumann row outside.
fn poisson_factor(grid: &Grid, k: usize, neumann: bool) -> Result<Tridiagonal> {
    let n = grid.n_s();
    let kh2 = (k as f64 * grid.ds()).powi(2);
    let mut lower = vec![1.0; n];
    let mut diag = vec![-(2.0 + kh2); n];
    let mut upper = vec![1.0; n];
    lower[0] = 0.0;
    diag[0] = 1.0;
    upper[0] = 0.0;
    upper[n - 1] = 0.0;
    if neumann {
        lower[n - 1] = 2.0;
        diag[n - 1] = -2.0;
    } else {
        lower[n - 1] = 0.0;
        diag[n - 1] = 1.0;
    }
    Tridiagonal::factor(lower, &diag, &upper, k)
}

fn helmholtz_factor(grid: &Grid, k: usize, dt: f64) -> Result<Tridiagonal> {
    let n = grid.n_s();
    let h2 = grid.ds() * grid.ds();
    let k2 = (k * k) as f64;
    let mut lower = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut upper = vec![0.0; n];
    for i in 1..n - 1 {
        let r = grid.radius(i);
        let beta = 0.5 * dt / (r * r * h2);
        lower[i] = -beta;
        upper[i] = -beta;
        diag[i] = 1.0 + beta * (2.0 + k2 * h2);
    }
    Tridiagonal::factor(lower, &diag, &upper, k)
}

fn poisson_rhs(grid: &Grid, omega: &[f64], wall: f64, outer: f64, neumann: bool, flux: f64) -> Vec<f64> {
    let n = grid.n_s();
    let h = grid.ds();
    let mut rhs: Vec<f64> = (0..n).map(|i| h * h * grid.radius(i).powi(2) * omega[i]).collect();
    rhs[0] = wall;
    rhs[n - 1] = if neumann {
        h * h * grid.radius(n - 1).powi(2) * omega[n - 1] - 2.0 * h * flux
    } else {
        outer
    };
    rhs
}

pub(crate) fn poisson_rhs_into(
    grid: &Grid,
    omega: &[Complex64],
    wall: Complex64,
    outer: Complex64,
    neumann: bool,
    flux: f64,
    rhs: &mut [Complex64],
) {
    let n = grid.n_s();
    let h = grid.ds();
    let radii = grid.radii();
    for i in 0..n {
        rhs[i] = omega[i] * (h * h * radii[i] * radii[i]);
    }
    rhs[0] = wall;
    rhs[n - 1] = if neumann {
        omega[n - 1] * (h * h * radii[n - 1] * radii[n - 1]) - Complex64::new(2.0 * h * flux, 0.0)
    } else {
        outer
    };
}

/// Velocity `(-d psi/dy, d psi/dx)` from a streamfunction, through the polar
/// components `u_r = -psi_theta / r`, `u_theta = psi_s / r`. See
/// [`ModalWorkspace::velocity`].
pub fn velocity_from_streamfunction(psi: &ScalarField) -> Result<VectorField> {
    ModalWorkspace::new(psi.grid())?.velocity(psi)
}

/// Convenience wrapper building a throwaway workspace.
pub fn solve_streamfunction(omega: &ScalarField, gamma_total: f64) -> Result<ScalarField> {
    ModalWorkspace::new(omega.grid())?.solve_streamfunction(omega, gamma_total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::harmonic_velocity;

    fn grid(ns: usize, nt: usize) -> Arc<Grid> {
        Arc::new(Grid::new(1.0, 3.0, ns, nt).unwrap())
    }

    #[test]
    fn transform_round_trip() {
        let g = grid(9, 16);
        let mut ws = ModalWorkspace::new(&g).unwrap();
        let f = ScalarField::sample(&g, |[x, y]| x * x - 0.3 * y + (x * y).sin()).unwrap();
        let mut spec = vec![Complex64::new(0.0, 0.0); g.n_s() * ws.n_modes()];
        ws.forward(f.values(), &mut spec);
        let mut back = vec![0.0; g.n_nodes()];
        ws.inverse(&spec, &mut back);
        for (a, b) in back.iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        // mode 0 is the ring average
        let mean0: f64 = (0..16).map(|j| f.at(0, j)).sum::<f64>() / 16.0;
        assert!((spec[0].re - mean0).abs() < 1e-14);
    }

    #[test]
    fn harmonic_streamfunction_is_exact() {
        let g = grid(48, 16);
        let omega = ScalarField::zeros(&g);
        let psi = solve_streamfunction(&omega, -1.0).unwrap();
        for i in 0..g.n_s() {
            for j in 0..g.n_theta() {
                assert!((psi.at(i, j) + g.s(i) / (2.0 * PI)).abs() < 1e-12);
            }
        }
        let u = velocity_from_streamfunction(&psi).unwrap();
        let h = harmonic_velocity(&g).unwrap();
        let diff = u.subtract(&h).unwrap();
        assert!(crate::fields::lp_norm(&diff, f64::INFINITY).unwrap() < 1e-8);
    }

    #[test]
    fn homogeneous_problem_has_zero_solution() {
        let g = grid(20, 8);
        let psi = solve_streamfunction(&ScalarField::zeros(&g), 0.0).unwrap();
        assert!(psi.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn helmholtz_trivial_cases() {
        let g = grid(16, 8);
        let mut ws = ModalWorkspace::new(&g).unwrap();
        let rhs: Vec<f64> = (0..16).map(|i| (i as f64 * 0.3).cos()).collect();
        assert_eq!(ws.helmholtz_step_solve(3, 0.0, &rhs).unwrap(), rhs);
        let zero = ws.helmholtz_step_solve(2, 0.1, &[0.0; 16]).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        assert!(ws.helmholtz_step_solve(5, 0.1, &[0.0; 15]).is_err());
        assert!(ws.helmholtz_step_solve(5, -0.1, &[0.0; 16]).is_err());
        assert!(ws.helmholtz_step_solve(99, 0.1, &[0.0; 16]).is_err());
    }

    #[test]
    fn rejects_non_finite_vorticity() {
        let g = grid(9, 8);
        let mut vals = vec![0.0; g.n_nodes()];
        vals[3] = 1.0;
        let omega = ScalarField::from_values(&g, vals).unwrap();
        let mut ws = ModalWorkspace::new(&g).unwrap();
        assert!(ws.solve_streamfunction(&omega, f64::NAN).is_err());
    }
}
