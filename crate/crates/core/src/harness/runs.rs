//! Configured simulations and their decay measurements.

use std::fs::File;
use std::io::BufWriter;
use std::sync::Arc;

use super::config::{ExperimentConfig, Mode};
use super::series::{oseen_tail_bound, DecaySeries};
use super::snapshot::Snapshot;
use crate::analytic::{oseen_velocity, BlobSpec, OseenParams};
use crate::error::{Error, Result};
use crate::evolve::{init_state, State, StepPolicy, Stepper, WallMode};
use crate::fields::{lp_norm, weak_l2_quasinorm, VectorField};
use crate::geometry::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub kinetic_norm: f64,
    pub outer_circulation: f64,
}

/// Result of one simulation: probe snapshots and a per-step history.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial: State,
    pub snapshots: Vec<State>,
    /// One record per step, starting with the initial state.
    pub history: Vec<StepRecord>,
}

impl Trajectory {
    pub fn grid(&self) -> &Arc<Grid> {
        self.initial.grid()
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&State> {
        self.snapshots.iter().find(|s| s.t() == t)
    }
}

fn record(s: &State) -> StepRecord {
    StepRecord {
        t: s.t(),
        kinetic_norm: s.kinetic_norm(),
        outer_circulation: s.outer_circulation(),
    }
}

/// Step policy for a configuration: no-slip, with the startup refinement
/// when `cfg.startup` is set.
pub fn policy_for(cfg: &ExperimentConfig, grid: &Grid, advection: bool) -> StepPolicy {
    if cfg.startup {
        StepPolicy::noslip(grid, cfg.dt, advection)
    } else {
        StepPolicy::new(cfg.dt, advection, WallMode::NoSlip)
    }
}

/// Evolves `u0 = u~0 + alpha H` to the last probe (or `cfg.t_final` without
/// probes), snapshotting at every probe.
pub fn simulate(
    cfg: &ExperimentConfig,
    grid: &Arc<Grid>,
    advection: bool,
    alpha: f64,
    blobs: &BlobSpec,
    probes: &[f64],
) -> Result<Trajectory> {
    let mut stepper = Stepper::new(grid, policy_for(cfg, grid, advection))?;
    let initial = init_state(stepper.workspace(), alpha, blobs)?;
    let t_end = probes.last().copied().unwrap_or(cfg.t_final);
    let mut history = vec![record(&initial)];
    let (_, snapshots) = stepper.evolve_to(&initial, t_end, probes, |s| history.push(record(s)))?;
    Ok(Trajectory {
        initial,
        snapshots,
        history,
    })
}

/// Runs the configured initial data under the configuration's own probes.
pub fn simulate_config(cfg: &ExperimentConfig, advection: bool) -> Result<Trajectory> {
    let grid = Arc::new(cfg.grid()?);
    let blobs = cfg.blob_spec()?;
    let probes = probes_through(cfg, cfg.t_final);
    let traj = simulate(cfg, &grid, advection, cfg.alpha, &blobs, &probes)
        .map_err(|e| e.context(format!("{} run `{}`", cfg.mode, cfg.label())))?;
    write_snapshots(cfg, &traj)?;
    Ok(traj)
}

/// The configured probes up to `t_end`, with `t_end` itself appended.
pub(crate) fn probes_through(cfg: &ExperimentConfig, t_end: f64) -> Vec<f64> {
    let mut probes: Vec<f64> = cfg.probes.iter().copied().filter(|&t| t < t_end).collect();
    probes.push(t_end);
    probes
}

fn write_snapshots(cfg: &ExperimentConfig, traj: &Trajectory) -> Result<()> {
    let Some(dir) = &cfg.snapshot_dir else {
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    for s in &traj.snapshots {
        let path = dir.join(format!("{}_t{}.osn", cfg.label(), s.t()));
        let file = File::create(&path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        Snapshot::of_state(s).write(BufWriter::new(file))?;
    }
    Ok(())
}

/// `t^(1/2 - 1/p) ||u(t) - alpha Theta(t)||_p` at every snapshot and exponent.
pub fn measure_against_oseen(label: &str, snapshots: &[State], alpha: f64, exponents: &[f64]) -> Result<DecaySeries> {
    let mut series = DecaySeries::new(label);
    for s in snapshots {
        let grid = s.grid();
        let diff = if alpha == 0.0 {
            s.velocity().clone()
        } else {
            let theta = oseen_velocity(OseenParams::new(alpha, s.t())?, grid)?;
            s.velocity().subtract(&theta)?
        };
        for &p in exponents {
            let raw = lp_norm(&diff, p)?;
            series.record(s.t(), p, raw, oseen_tail_bound(alpha, s.t(), p, grid.outer_radius()))?;
        }
    }
    Ok(series)
}

fn require_mode(cfg: &ExperimentConfig, mode: Mode) -> Result<()> {
    if cfg.mode != mode {
        return Err(Error::InvalidArgument(format!("expected mode {mode}, config has {}", cfg.mode)));
    }
    Ok(())
}

fn probe_states(traj: &Trajectory, cfg: &ExperimentConfig) -> Vec<State> {
    traj.snapshots
        .iter()
        .filter(|s| cfg.probes.contains(&s.t()))
        .cloned()
        .collect()
}

/// Navier-Stokes flow from `u~0 + alpha H`, measured against `alpha Theta`.
pub fn run_theorem_main(cfg: &ExperimentConfig) -> Result<DecaySeries> {
    require_mode(cfg, Mode::Nonlinear)?;
    let traj = simulate_config(cfg, true)?;
    measure_against_oseen(&cfg.label(), &probe_states(&traj, cfg), cfg.alpha, &cfg.exponents)
}

/// Stokes flow from `u~0 + alpha H`, measured against `alpha Theta`.
pub fn run_linear(cfg: &ExperimentConfig) -> Result<DecaySeries> {
    require_mode(cfg, Mode::Linear)?;
    let traj = simulate_config(cfg, false)?;
    measure_against_oseen(&cfg.label(), &probe_states(&traj, cfg), cfg.alpha, &cfg.exponents)
}

/// `S(t) H - Theta(t)` for the unit-amplitude vortex.
pub fn run_linear_oseen(cfg: &ExperimentConfig) -> Result<DecaySeries> {
    require_mode(cfg, Mode::LinearH)?;
    let traj = harmonic_trajectory(cfg, &probes_through(cfg, cfg.t_final))?;
    measure_against_oseen(&cfg.label(), &probe_states(&traj, cfg), 1.0, &cfg.exponents)
}

/// Stokes evolution of `H` on the configured grid.
pub fn harmonic_trajectory(cfg: &ExperimentConfig, probes: &[f64]) -> Result<Trajectory> {
    let grid = Arc::new(cfg.grid()?);
    simulate(cfg, &grid, false, 1.0, &BlobSpec::empty(), probes).map_err(|e| e.context("Stokes evolution of H"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakL2Table {
    pub rows: Vec<(f64, f64)>,
    /// The values never increase from one checkpoint to the next.
    pub monotone_envelope: bool,
}

/// Weak-`L^2` quasinorm of the Navier-Stokes velocity at checkpoint times.
pub fn weak_l2_checkpoint(cfg: &ExperimentConfig, times: &[f64]) -> Result<WeakL2Table> {
    let grid = Arc::new(cfg.grid()?);
    let blobs = cfg.blob_spec()?;
    let mut probes: Vec<f64> = times.to_vec();
    if probes.is_empty() {
        return Ok(WeakL2Table {
            rows: Vec::new(),
            monotone_envelope: true,
        });
    }
    probes.dedup();
    let traj = simulate(cfg, &grid, true, cfg.alpha, &blobs, &probes)?;
    Ok(weak_l2_table(traj.snapshots.iter().map(|s| (s.t(), s.velocity()))))
}

pub(crate) fn weak_l2_table<'a>(fields: impl Iterator<Item = (f64, &'a VectorField)>) -> WeakL2Table {
    let rows: Vec<(f64, f64)> = fields.map(|(t, u)| (t, weak_l2_quasinorm(u))).collect();
    let monotone_envelope = rows.windows(2).all(|w| w[1].1 <= w[0].1);
    WeakL2Table {
        rows,
        monotone_envelope,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> ExperimentConfig {
        ExperimentConfig {
            mode,
            n_s: 24,
            n_theta: 16,
            dt: 0.01,
            t_final: 1.0,
            probes: vec![0.5, 1.0],
            exponents: vec![4.0, 8.0],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn zero_data_gives_zero_series() {
        let s = run_theorem_main(&small(Mode::Nonlinear)).unwrap();
        assert_eq!(s.rows().len(), 4);
        assert!(s.rows().iter().all(|r| r.raw_norm == 0.0 && r.weighted_value == 0.0 && r.truncation_bound == 0.0));
        let w = weak_l2_checkpoint(&small(Mode::Nonlinear), &[0.5, 1.0]).unwrap();
        assert!(w.rows.iter().all(|r| r.1 == 0.0));
    }

    #[test]
    fn wrong_mode_is_rejected() {
        assert!(run_linear(&small(Mode::Nonlinear)).is_err());
        assert!(run_linear_oseen(&small(Mode::Linear)).is_err());
    }

    #[test]
    fn probe_only_rows_are_reported() {
        let mut cfg = small(Mode::LinearH);
        cfg.probes = vec![0.5];
        let s = run_linear_oseen(&cfg).unwrap();
        assert_eq!(s.rows().len(), 2);
        assert!(s.rows().iter().all(|r| r.t == 0.5 && r.raw_norm > 0.0));
    }
}
