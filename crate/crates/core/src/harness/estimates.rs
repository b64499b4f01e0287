//! Empirical constants of the Stokes semigroup bounds.

use std::sync::Arc;

use super::config::{ExperimentConfig, Mode};
use super::runs::{harmonic_trajectory, policy_for, simulate, Trajectory};
use crate::analytic::BlobSpec;
use crate::error::{Error, Result};
use crate::evolve::{State, Stepper};
use crate::fields::{lp_norm, weak_l2_quasinorm, ScalarField, VectorField};
use crate::geometry::Grid;

/// Time of the comparison with the free heat flow.
pub const FREE_HEAT_TIME: f64 = 0.25;
/// Probes at or after this time form the tail checked for monotonicity.
pub const TAIL_START: f64 = 10.0;
/// Constant matrix of the divergence-form data `F = phi M`.
pub const DIVERGENCE_MATRIX: [[f64; 2]; 2] = [[1.0, 0.5], [-0.3, 2.0]];

#[derive(Debug, Clone, PartialEq)]
pub struct PairEstimate {
    pub q: f64,
    pub p: f64,
    /// `sup_t t^(1/q - 1/p) ||S(t) v0||_p / ||v0||_q`.
    pub k1: f64,
    /// `sup_t t^(1/q) ||grad S(t) v0||_2 / ||v0||_q`, defined for `q <= 2`.
    pub k3: Option<f64>,
    /// `sup_t t^(1/2 - 1/p + 1/r) ||S(t) P div F||_p / ||F||_r` with
    /// `r = max(q, 2)`, defined for finite `p`.
    pub k4: Option<f64>,
    /// `t^(1/q - 1/p) ||S(t) v0||_p` never increases over the tail probes.
    pub tail_non_increasing: bool,
    /// `(t, t^(1/q - 1/p) ||S(t) v0||_p / ||v0||_q)` at every probe.
    pub k1_series: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub pairs: Vec<PairEstimate>,
    /// `sup_t ||S(t) v0||_{2,inf} / ||v0||_{2,inf}`.
    pub k2: f64,
    /// `sup_t ||S(t) H||_{2,inf} / ||H||_{2,inf}`.
    pub harmonic_k2: f64,
    /// Relative `L^2` gap between `S(t) v0` and the free heat flow of the
    /// blobs at [`FREE_HEAT_TIME`], when that time is probed.
    pub free_heat_error: Option<f64>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 && den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn sup(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// Vorticity of `P div F` for `F = phi M`, `phi = sum mass_b g_b`:
/// `M21 phi_xx + (M22 - M11) phi_xy - M12 phi_yy`.
pub fn divergence_data_vorticity_at(blobs: &BlobSpec, x: [f64; 2]) -> f64 {
    let m = DIVERGENCE_MATRIX;
    blobs
        .blobs
        .iter()
        .map(|b| {
            let g = b.vorticity_at(x);
            let (dx, dy) = (x[0] - b.center[0], x[1] - b.center[1]);
            let w2 = b.width * b.width;
            let w4 = w2 * w2;
            let gxx = g * (dx * dx / w4 - 1.0 / w2);
            let gxy = g * dx * dy / w4;
            let gyy = g * (dy * dy / w4 - 1.0 / w2);
            m[1][0] * gxx + (m[1][1] - m[0][0]) * gxy - m[0][1] * gyy
        })
        .sum()
}

pub fn divergence_data_vorticity(blobs: &BlobSpec, grid: &Arc<Grid>) -> Result<ScalarField> {
    ScalarField::sample(grid, |x| divergence_data_vorticity_at(blobs, x))
}

/// `||F||_r` for `F = phi M` with the Frobenius norm pointwise.
pub fn divergence_data_norm(blobs: &BlobSpec, grid: &Arc<Grid>, r: f64) -> Result<f64> {
    let frob = DIVERGENCE_MATRIX.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let phi = ScalarField::sample(grid, |x| blobs.vorticity_at(x))?;
    Ok(frob * lp_norm(&phi, r)?)
}

fn estimate_probes(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut probes = cfg.probes.clone();
    if FREE_HEAT_TIME < cfg.t_final && !probes.contains(&FREE_HEAT_TIME) {
        probes.push(FREE_HEAT_TIME);
        probes.sort_by(f64::total_cmp);
    }
    if probes.last() != Some(&cfg.t_final) {
        probes.push(cfg.t_final);
    }
    probes
}

/// Runs the Stokes evolutions of the blob data, of `H`, and of `P div F`,
/// and forms the empirical constants.
pub fn verify_semigroup_estimates(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    if cfg.mode != Mode::Estimates {
        return Err(Error::InvalidArgument(format!("expected mode estimates, config has {}", cfg.mode)));
    }
    let h = harmonic_trajectory(cfg, &estimate_probes(cfg))?;
    estimates_with_harmonic(cfg, &h)
}

/// As [`verify_semigroup_estimates`], reusing a Stokes evolution of `H` on the
/// same grid and probes.
pub fn estimates_with_harmonic(cfg: &ExperimentConfig, harmonic: &Trajectory) -> Result<EstimateReport> {
    let grid = Arc::new(cfg.grid()?);
    if **harmonic.grid() != *grid {
        return Err(Error::GridMismatch);
    }
    let blobs = cfg.blob_spec()?;
    let probes = estimate_probes(cfg);
    let v = simulate(cfg, &grid, false, 0.0, &blobs, &probes).map_err(|e| e.context("Stokes evolution of v0"))?;
    let f = divergence_run(cfg, &grid, &blobs, &probes)?;

    let v0 = v.initial.velocity();
    let v0_weak = weak_l2_quasinorm(v0);
    let k2 = sup(v.snapshots.iter().map(|s| ratio(weak_l2_quasinorm(s.velocity()), v0_weak)));
    let h0_weak = weak_l2_quasinorm(harmonic.initial.velocity());
    let harmonic_k2 = sup(harmonic.snapshots.iter().map(|s| weak_l2_quasinorm(s.velocity()) / h0_weak));

    let free_heat_error = match v.snapshots.iter().find(|s| s.t() == FREE_HEAT_TIME) {
        Some(s) if !blobs.is_empty() => {
            let heat = VectorField::sample(&grid, |x| blobs.free_velocity_at(FREE_HEAT_TIME, x))?;
            Some(ratio(lp_norm(&s.velocity().subtract(&heat)?, 2.0)?, lp_norm(&heat, 2.0)?))
        }
        _ => None,
    };

    let mut pairs = Vec::with_capacity(cfg.pairs.len());
    for &(q, p) in &cfg.pairs {
        let v0_q = lp_norm(v0, q)?;
        let mut k1_series = Vec::with_capacity(v.snapshots.len());
        for s in &v.snapshots {
            let w = s.t().powf(1.0 / q - 1.0 / p);
            k1_series.push((s.t(), ratio(w * lp_norm(s.velocity(), p)?, v0_q)));
        }
        let k1 = sup(k1_series.iter().map(|x| x.1));
        let tail: Vec<f64> = k1_series.iter().filter(|x| x.0 >= TAIL_START).map(|x| x.1).collect();
        let tail_non_increasing = tail.windows(2).all(|w| w[1] <= w[0]);

        let k3 = if q <= 2.0 {
            let mut best = 0.0_f64;
            for s in &v.snapshots {
                let g = lp_norm(&s.velocity().gradient_magnitude(), 2.0)?;
                best = best.max(ratio(s.t().powf(1.0 / q) * g, v0_q));
            }
            Some(best)
        } else {
            None
        };

        let k4 = if p.is_finite() {
            let r = q.max(2.0);
            let f_norm = divergence_data_norm(&blobs, &grid, r)?;
            let mut best = 0.0_f64;
            for s in &f {
                let w = s.t().powf(0.5 - 1.0 / p + 1.0 / r);
                best = best.max(ratio(w * lp_norm(s.velocity(), p)?, f_norm));
            }
            Some(best)
        } else {
            None
        };

        pairs.push(PairEstimate {
            q,
            p,
            k1,
            k3,
            k4,
            tail_non_increasing,
            k1_series,
        });
    }
    Ok(EstimateReport {
        pairs,
        k2,
        harmonic_k2,
        free_heat_error,
    })
}

fn divergence_run(cfg: &ExperimentConfig, grid: &Arc<Grid>, blobs: &BlobSpec, probes: &[f64]) -> Result<Vec<State>> {
    let mut stepper = Stepper::new(grid, policy_for(cfg, grid, false))?;
    let omega = divergence_data_vorticity(blobs, grid)?;
    let initial = stepper.state_from_vorticity(0.0, omega, 0.0)?;
    let t_end = *probes.last().expect("probes end at t_final");
    let (_, snaps) = stepper
        .evolve_to(&initial, t_end, probes, |_| {})
        .map_err(|e| e.context("Stokes evolution of P div F"))?;
    Ok(snaps)
}
