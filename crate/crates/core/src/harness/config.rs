//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{Blob, BlobSpec};
use crate::error::{Error, Result};
use crate::geometry::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Nonlinear,
    Linear,
    LinearH,
    AlphaStudy,
    Rescaling,
    Estimates,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "nonlinear" => Mode::Nonlinear,
            "linear" => Mode::Linear,
            "linear_H" => Mode::LinearH,
            "alpha_study" => Mode::AlphaStudy,
            "rescaling" => Mode::Rescaling,
            "estimates" => Mode::Estimates,
            other => return Err(format!("unknown mode `{other}`")),
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Nonlinear => "nonlinear",
            Mode::Linear => "linear",
            Mode::LinearH => "linear_H",
            Mode::AlphaStudy => "alpha_study",
            Mode::Rescaling => "rescaling",
            Mode::Estimates => "estimates",
        })
    }
}

/// Seeded placement of blobs with alternating signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomBlobs {
    pub count: usize,
    pub width: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub label: Option<String>,
    pub r_wall: f64,
    pub s_max: f64,
    pub n_s: usize,
    pub n_theta: usize,
    pub alpha: f64,
    pub blobs: Vec<Blob>,
    pub random_blobs: Option<RandomBlobs>,
    pub seed: u64,
    pub dt: f64,
    /// Small steps while the initial wall sheet forms.
    pub startup: bool,
    pub t_final: f64,
    pub probes: Vec<f64>,
    pub exponents: Vec<f64>,
    /// `(q, p)` pairs for the semigroup estimates; `p` may be infinite.
    pub pairs: Vec<(f64, f64)>,
    pub alphas: Vec<f64>,
    pub t0: f64,
    pub lambda: f64,
    pub rescale_time: f64,
    pub output: Option<PathBuf>,
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Nonlinear,
            label: None,
            r_wall: 1.0,
            s_max: 64f64.ln(),
            n_s: 192,
            n_theta: 128,
            alpha: 0.0,
            blobs: Vec::new(),
            random_blobs: None,
            seed: 0,
            dt: 1e-3,
            startup: true,
            t_final: 50.0,
            probes: vec![1.0, 5.0, 10.0, 20.0, 35.0, 50.0],
            exponents: vec![4.0],
            pairs: vec![(2.0, 4.0), (1.5, 3.0), (2.0, f64::INFINITY)],
            alphas: vec![0.1, 0.05, 0.025],
            t0: 5.0,
            lambda: 2.0,
            rescale_time: 1.0,
            output: None,
            snapshot_dir: None,
        }
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v = match s {
        "inf" | "infinity" => f64::INFINITY,
        _ => s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if v.is_nan() {
        return Err("NaN is not allowed".into());
    }
    Ok(v)
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| parse_f64(x.trim())).collect()
}

fn parse_usize(s: &str) -> std::result::Result<usize, String> {
    s.parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<String> = Vec::new();
        let (mut rb_count, mut rb_width, mut rb_mass) = (None, None, None);
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key != "blob" {
                if seen.iter().any(|k| k == key) {
                    return Err(err(format!("duplicate key `{key}`")));
                }
                seen.push(key.to_string());
            }
            let result: std::result::Result<(), String> = (|| {
                match key {
                    "mode" => cfg.mode = value.parse()?,
                    "label" => cfg.label = Some(value.to_string()),
                    "r_wall" => cfg.r_wall = parse_f64(value)?,
                    "s_max" => cfg.s_max = parse_f64(value)?,
                    "n_s" => cfg.n_s = parse_usize(value)?,
                    "n_theta" => cfg.n_theta = parse_usize(value)?,
                    "alpha" => cfg.alpha = parse_f64(value)?,
                    "blob" => {
                        let v = parse_list(value)?;
                        if v.len() != 4 {
                            return Err("blob needs `x, y, width, mass`".into());
                        }
                        cfg.blobs.push(Blob {
                            center: [v[0], v[1]],
                            width: v[2],
                            mass: v[3],
                        });
                    }
                    "random_blobs" => rb_count = Some(parse_usize(value)?),
                    "blob_width" => rb_width = Some(parse_f64(value)?),
                    "blob_mass" => rb_mass = Some(parse_f64(value)?),
                    "seed" => cfg.seed = value.parse().map_err(|_| format!("`{value}` is not a seed"))?,
                    "dt" => cfg.dt = parse_f64(value)?,
                    "startup" => cfg.startup = parse_bool(value)?,
                    "t_final" => cfg.t_final = parse_f64(value)?,
                    "probes" => cfg.probes = parse_list(value)?,
                    "exponents" => cfg.exponents = parse_list(value)?,
                    "pairs" => {
                        cfg.pairs = value
                            .split(',')
                            .map(|pair| {
                                let (q, p) = pair
                                    .trim()
                                    .split_once(':')
                                    .ok_or_else(|| format!("pair `{}` is not `q:p`", pair.trim()))?;
                                Ok((parse_f64(q.trim())?, parse_f64(p.trim())?))
                            })
                            .collect::<std::result::Result<_, String>>()?
                    }
                    "alphas" => cfg.alphas = parse_list(value)?,
                    "t0" => cfg.t0 = parse_f64(value)?,
                    "lambda" => cfg.lambda = parse_f64(value)?,
                    "rescale_time" => cfg.rescale_time = parse_f64(value)?,
                    "output" => cfg.output = Some(PathBuf::from(value)),
                    "snapshot_dir" => cfg.snapshot_dir = Some(PathBuf::from(value)),
                    _ => return Err(format!("unknown key `{key}`")),
                }
                Ok(())
            })();
            result.map_err(err)?;
        }
        if let Some(count) = rb_count {
            cfg.random_blobs = Some(RandomBlobs {
                count,
                width: rb_width.unwrap_or(0.5),
                mass: rb_mass.unwrap_or(1.0),
            });
        } else if rb_width.is_some() || rb_mass.is_some() {
            return Err(Error::Config {
                line: 0,
                message: "blob_width and blob_mass require random_blobs".into(),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Err(Error::Config { line: 0, message });
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if !self.alpha.is_finite() {
            return bad("alpha must be finite".into());
        }
        for w in self.probes.windows(2) {
            if !(w[0] < w[1]) {
                return bad("probes must be strictly increasing".into());
            }
        }
        if let (Some(first), Some(last)) = (self.probes.first(), self.probes.last()) {
            if !(*first > 0.0 && *last <= self.t_final) {
                return bad(format!("probes must lie in (0, {}]", self.t_final));
            }
        }
        for &p in &self.exponents {
            if !(p > 2.0 && p.is_finite()) {
                return bad(format!("exponent {p} is outside (2, inf)"));
            }
        }
        for &(q, p) in &self.pairs {
            if !(q > 1.0 && q.is_finite() && p >= q) {
                return bad(format!("pair ({q}, {p}) needs 1 < q <= p"));
            }
        }
        if self.alphas.iter().any(|a| !a.is_finite()) {
            return bad("alphas must be finite".into());
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return bad(format!("t0 must be positive, got {}", self.t0));
        }
        if self.mode == Mode::AlphaStudy && self.t0 > self.t_final {
            return bad(format!("t0 must lie in (0, {}]", self.t_final));
        }
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be at least 1, got {}", self.lambda));
        }
        if !(self.rescale_time > 0.0 && self.rescale_time.is_finite()) {
            return bad("rescale_time must be positive".into());
        }
        if let Some(rb) = self.random_blobs {
            if !(rb.width > 0.0 && rb.mass.is_finite()) {
                return bad("random blob width must be positive".into());
            }
        }
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.r_wall, self.s_max, self.n_s, self.n_theta)
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.mode.to_string())
    }

    /// Explicit blobs followed by the seeded random ones, validated on the grid.
    pub fn blob_spec(&self) -> Result<BlobSpec> {
        let mut blobs = self.blobs.clone();
        if let Some(rb) = self.random_blobs {
            blobs.extend(place_random_blobs(rb, self.seed, self.r_wall));
        }
        let spec = BlobSpec::new(blobs);
        spec.validate(self.r_wall, Some(self.r_wall * self.s_max.exp()))?;
        Ok(spec)
    }
}

/// Centers uniform in angle and in radius over a band starting three widths
/// plus one unit off the wall; signs alternate so an even count has zero mass.
pub fn place_random_blobs(rb: RandomBlobs, seed: u64, r_wall: f64) -> Vec<Blob> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_min = r_wall + 3.0 * rb.width + 1.0;
    (0..rb.count)
        .map(|k| {
            let r = rng.gen_range(r_min..r_min + 4.0);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            Blob {
                center: [r * theta.cos(), r * theta.sin()],
                width: rb.width,
                mass: if k % 2 == 0 { rb.mass } else { -rb.mass },
            }
        })
        .collect()
}
