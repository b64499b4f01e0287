//! Amplitude-scaling and rescaling studies.

use std::sync::Arc;

use super::config::{ExperimentConfig, Mode};
use super::runs::{harmonic_trajectory, simulate, Trajectory};
use crate::analytic::BlobSpec;
use crate::error::{Error, Result};
use crate::fields::{lp_norm, VectorField};

/// Measurements before this time are excluded from the studies.
pub const STARTUP_EXCLUSION: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaScalingRow {
    pub alpha: f64,
    /// `sup ||u(t) - u~(t) - alpha S(t) H||_2` over probes in `[1, t0]`.
    pub sup_z: f64,
}

fn study_probes(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut probes: Vec<f64> = cfg
        .probes
        .iter()
        .copied()
        .filter(|&t| t >= STARTUP_EXCLUSION && t < cfg.t0)
        .collect();
    probes.push(cfg.t0);
    probes
}

/// For each amplitude, evolves `u~0 + alpha H` and compares it with the flow
/// of `u~0` alone plus `alpha` times the Stokes evolution of `H`.
pub fn alpha_scaling_study(cfg: &ExperimentConfig, alphas: &[f64]) -> Result<Vec<AlphaScalingRow>> {
    if cfg.mode != Mode::AlphaStudy {
        return Err(Error::InvalidArgument(format!("expected mode alpha_study, config has {}", cfg.mode)));
    }
    let probes = study_probes(cfg);
    let grid = Arc::new(cfg.grid()?);
    let blobs = cfg.blob_spec()?;
    let base = simulate(cfg, &grid, true, 0.0, &blobs, &probes).map_err(|e| e.context("flow of u~0"))?;
    let h = harmonic_trajectory(cfg, &probes)?;
    alphas
        .iter()
        .map(|&alpha| {
            let u = simulate(cfg, &grid, true, alpha, &blobs, &probes)
                .map_err(|e| e.context(format!("flow with alpha = {alpha}")))?;
            Ok(AlphaScalingRow {
                alpha,
                sup_z: sup_remainder(&u, &base, &h, alpha)?,
            })
        })
        .collect()
}

fn sup_remainder(u: &Trajectory, base: &Trajectory, h: &Trajectory, alpha: f64) -> Result<f64> {
    let mut best = 0.0_f64;
    for ((su, sb), sh) in u.snapshots.iter().zip(&base.snapshots).zip(&h.snapshots) {
        if su.t() < STARTUP_EXCLUSION {
            continue;
        }
        let z = su.velocity().subtract(sb.velocity())?.axpy(-alpha, sh.velocity())?;
        best = best.max(lp_norm(&z, 2.0)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescalingReport {
    pub lambda: f64,
    pub t: f64,
    /// `||v_small - v_scaled||_4 / ||v_small||_4` on the small annulus.
    pub discrepancy: f64,
    pub reference_norm: f64,
}

/// Compares the Stokes evolution of `H` on the obstacle of radius
/// `r_wall / lambda` at time `t` with `lambda v(lambda^2 t, lambda x)` for the
/// evolution on the original obstacle. Both runs use the configured step.
pub fn rescaling_check(cfg: &ExperimentConfig, lambda: f64, t: f64) -> Result<RescalingReport> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be at least 1, got {lambda}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be positive, got {t}")));
    }
    let big = Arc::new(cfg.grid()?);
    let small = Arc::new(big.rescaled(lambda)?);
    let mut small_cfg = cfg.clone();
    small_cfg.r_wall = small.r_wall();
    let t_big = lambda * lambda * t;
    let run_big = simulate(cfg, &big, false, 1.0, &BlobSpec::empty(), &[t_big])?;
    let run_small = simulate(&small_cfg, &small, false, 1.0, &BlobSpec::empty(), &[t])?;
    let vb = run_big.snapshots[0].velocity();
    let scaled = VectorField::from_components(
        &small,
        vb.u1().iter().map(|v| lambda * v).collect(),
        vb.u2().iter().map(|v| lambda * v).collect(),
    )?;
    let vs = run_small.snapshots[0].velocity();
    let reference_norm = lp_norm(vs, 4.0)?;
    let discrepancy = lp_norm(&vs.subtract(&scaled)?, 4.0)? / reference_norm;
    Ok(RescalingReport {
        lambda,
        t,
        discrepancy,
        reference_norm,
    })
}

/// Grid refined by two in each direction.
pub fn refined(cfg: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        n_s: 2 * cfg.n_s - 1,
        n_theta: 2 * cfg.n_theta,
        dt: 0.5 * cfg.dt,
        ..cfg.clone()
    }
}
