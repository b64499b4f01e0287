use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use exterior_ns::harness::{
    alpha_scaling_study, fit_rate, read_csv, rescaling_check, run_linear, run_linear_oseen, run_theorem_main,
    verify_semigroup_estimates, write_csv, ExperimentConfig, Mode, Snapshot,
};
use exterior_ns::{Error, Result, ScalarField};

#[derive(Parser)]
#[command(name = "exterior-ns", version, about = "Navier-Stokes flow outside a disk with Lamb-Oseen diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a nonlinear, linear or linear_H configuration and write its decay CSV.
    Run {
        config: PathBuf,
        /// Overrides the config's `output`; `-` writes to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Empirical semigroup constants for an `estimates` configuration.
    Estimates { config: PathBuf },
    /// Amplitude-scaling study for an `alpha_study` configuration.
    AlphaStudy { config: PathBuf },
    /// Rescaling discrepancy for a `rescaling` configuration.
    Rescale {
        config: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        time: Option<f64>,
    },
    /// Power-law fit of weighted values from a decay CSV.
    RateFit {
        csv: PathBuf,
        #[arg(short, long, default_value_t = 4.0)]
        p: f64,
        #[arg(long, default_value_t = 5.0)]
        from: f64,
        #[arg(long, default_value_t = 50.0)]
        to: f64,
        /// Series label; defaults to every series in the file.
        #[arg(long)]
        label: Option<String>,
    },
    /// Print the header and vorticity summary of a snapshot file.
    SnapshotDump { path: PathBuf },
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::from(e).context(path.display().to_string()))
}

fn load(path: &Path, mode: &[Mode]) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::from_file(path)?;
    if !mode.contains(&cfg.mode) {
        let names: Vec<String> = mode.iter().map(|m| m.to_string()).collect();
        return Err(Error::InvalidArgument(format!(
            "{}: mode {} is not one of {}",
            path.display(),
            cfg.mode,
            names.join(", ")
        )));
    }
    Ok(cfg)
}

fn execute(cmd: Command) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cmd {
        Command::Run { config, output } => {
            let cfg = load(&config, &[Mode::Nonlinear, Mode::Linear, Mode::LinearH])?;
            let series = match cfg.mode {
                Mode::Nonlinear => run_theorem_main(&cfg)?,
                Mode::Linear => run_linear(&cfg)?,
                _ => run_linear_oseen(&cfg)?,
            };
            match output.or(cfg.output.clone()) {
                Some(path) if path.as_os_str() != "-" => {
                    let file = File::create(&path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
                    write_csv(BufWriter::new(file), &[series])?;
                    writeln!(out, "wrote {}", path.display())?;
                }
                _ => write_csv(&mut out, &[series])?,
            }
        }
        Command::Estimates { config } => {
            let cfg = load(&config, &[Mode::Estimates])?;
            let r = verify_semigroup_estimates(&cfg)?;
            writeln!(out, "q,p,K1,K3,K4,tail_non_increasing")?;
            let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
            for pe in &r.pairs {
                writeln!(
                    out,
                    "{},{},{:.6e},{},{},{}",
                    pe.q,
                    pe.p,
                    pe.k1,
                    opt(pe.k3),
                    opt(pe.k4),
                    pe.tail_non_increasing
                )?;
            }
            writeln!(out, "K2 (blob data) = {:.6e}", r.k2)?;
            writeln!(out, "K2 (harmonic field) = {:.6e}", r.harmonic_k2)?;
            writeln!(out, "free heat gap = {}", opt(r.free_heat_error))?;
        }
        Command::AlphaStudy { config } => {
            let cfg = load(&config, &[Mode::AlphaStudy])?;
            let rows = alpha_scaling_study(&cfg, &cfg.alphas)?;
            writeln!(out, "alpha,sup_z")?;
            for r in &rows {
                writeln!(out, "{:.16e},{:.16e}", r.alpha, r.sup_z)?;
            }
            for w in rows.windows(2) {
                writeln!(out, "ratio {} / {} = {:.6}", w[0].alpha, w[1].alpha, w[0].sup_z / w[1].sup_z)?;
            }
        }
        Command::Rescale { config, lambda, time } => {
            let cfg = load(&config, &[Mode::Rescaling])?;
            let r = rescaling_check(&cfg, lambda.unwrap_or(cfg.lambda), time.unwrap_or(cfg.rescale_time))?;
            writeln!(
                out,
                "lambda = {}, t = {}, relative L4 discrepancy = {:.6e}",
                r.lambda, r.t, r.discrepancy
            )?;
        }
        Command::RateFit {
            csv,
            p,
            from,
            to,
            label,
        } => {
            let series = read_csv(BufReader::new(open(&csv)?)).map_err(|e| e.context(csv.display().to_string()))?;
            let mut found = false;
            for s in series.iter().filter(|s| label.as_deref().map_or(true, |l| l == s.label)) {
                found = true;
                let fit = fit_rate(s, p, (from, to)).map_err(|e| e.context(s.label.clone()))?;
                writeln!(
                    out,
                    "{}: slope = {:.6}, intercept = {:.6}, residual = {:.3e}, points = {}",
                    s.label, fit.slope, fit.intercept, fit.residual, fit.n_points
                )?;
            }
            if !found {
                return Err(Error::InvalidArgument(format!("no matching series in {}", csv.display())));
            }
        }
        Command::SnapshotDump { path } => {
            let snap = Snapshot::read(BufReader::new(open(&path)?)).map_err(|e| e.context(path.display().to_string()))?;
            let grid = Arc::new(snap.grid()?);
            let omega = ScalarField::from_values(&grid, snap.omega.clone())?;
            let (lo, hi) = snap
                .omega
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            writeln!(out, "grid: n_s = {}, n_theta = {}", snap.n_s, snap.n_theta)?;
            writeln!(out, "r_wall = {}, s_max = {}, outer radius = {}", snap.r_wall, snap.s_max, grid.outer_radius())?;
            writeln!(out, "t = {}", snap.t)?;
            writeln!(out, "gamma_infinity = {}", snap.gamma_infinity)?;
            writeln!(out, "vorticity: min = {lo:.6e}, max = {hi:.6e}, integral = {:.6e}", omega.integral())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
