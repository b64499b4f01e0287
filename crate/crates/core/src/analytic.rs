//! Closed-form reference fields: the Lamb-Oseen vortex, the harmonic field of
//! the disk, Gaussian vorticity blobs and whole-plane norms of radial fields.
//!
//! Orientation: `x_perp = (x2, -x1)`, so a positive amplitude swirls clockwise
//! and carries counterclockwise circulation `-alpha`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{ScalarField, VectorField};
use crate::geometry::Grid;

/// Below this value of `|x|^2 / 4t` the Oseen profile uses its Taylor expansion.
const OSEEN_SERIES_SWITCH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OseenParams {
    pub alpha: f64,
    pub t: f64,
}

impl OseenParams {
    pub fn new(alpha: f64, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("Oseen time must be positive, got {t}")));
        }
        Ok(OseenParams { alpha, t })
    }
}

/// `(1 - exp(-|x|^2 / 4t)) / |x|^2`, continuous at the origin.
fn oseen_profile(r2: f64, t: f64) -> f64 {
    let q = r2 / (4.0 * t);
    if q < OSEEN_SERIES_SWITCH {
        (1.0 - q * (0.5 - q / 6.0)) / (4.0 * t)
    } else {
        -(-q).exp_m1() / r2
    }
}

/// Velocity of the Lamb-Oseen vortex at a point.
pub fn oseen_velocity_at(p: OseenParams, x: [f64; 2]) -> [f64; 2] {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let c = p.alpha * oseen_profile(r2, p.t) / (2.0 * PI);
    [c * x[1], -c * x[0]]
}

/// Vorticity `-alpha exp(-|x|^2 / 4t) / (4 pi t)` of the Lamb-Oseen vortex.
pub fn oseen_vorticity_at(p: OseenParams, x: [f64; 2]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    -p.alpha * (-r2 / (4.0 * p.t)).exp() / (4.0 * PI * p.t)
}

/// Streamfunction of the Lamb-Oseen vortex normalised to vanish on `|x| = r_ref`.
///
/// The azimuthal velocity is `d psi / dr`, so
/// `psi(r) = -alpha / (4 pi) * [ln(r^2) + E1(r^2 / 4t)] + const`.
pub fn oseen_streamfunction_at(p: OseenParams, r: f64, r_ref: f64) -> f64 {
    let g = |r: f64| {
        let q = r * r / (4.0 * p.t);
        (r * r).ln() + exp_integral_e1(q)
    };
    -p.alpha / (4.0 * PI) * (g(r) - g(r_ref))
}

/// Exponential integral `E1(x)` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    if x <= 1.0 {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        // Continued fraction (modified Lentz), valid and fast for x > 1.
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..200 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// The harmonic vector field `x_perp / (2 pi |x|^2)` of the disk `|x| < r_wall`.
pub fn harmonic_velocity_at(x: [f64; 2], r_wall: f64) -> Result<[f64; 2]> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2.sqrt() < r_wall * (1.0 - 1e-12) {
        return Err(Error::InsideObstacle {
            x: x[0],
            y: x[1],
            r_wall,
        });
    }
    let c = 1.0 / (2.0 * PI * r2);
    Ok([c * x[1], -c * x[0]])
}

pub fn oseen_velocity(p: OseenParams, grid: &Arc<Grid>) -> Result<VectorField> {
    VectorField::sample(grid, |x| oseen_velocity_at(p, x))
}

pub fn oseen_vorticity(p: OseenParams, grid: &Arc<Grid>) -> Result<ScalarField> {
    ScalarField::sample(grid, |x| oseen_vorticity_at(p, x))
}

pub fn harmonic_velocity(grid: &Arc<Grid>) -> Result<VectorField> {
    let r_wall = grid.r_wall();
    VectorField::try_sample(grid, |x| harmonic_velocity_at(x, r_wall))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blob {
    pub center: [f64; 2],
    pub width: f64,
    pub mass: f64,
}

impl Blob {
    pub fn vorticity_at(&self, x: [f64; 2]) -> f64 {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        let w2 = self.width * self.width;
        self.mass * (-(dx * dx + dy * dy) / (2.0 * w2)).exp() / (2.0 * PI * w2)
    }

    /// Whole-plane velocity of the blob evolved by the heat equation for time `t`.
    ///
    /// A Gaussian of variance `w^2` is an Oseen vorticity at time `w^2 / 2`
    /// with amplitude `-mass`.
    pub fn free_velocity_at(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        let p = OseenParams {
            alpha: -self.mass,
            t: 0.5 * self.width * self.width + t,
        };
        oseen_velocity_at(p, [x[0] - self.center[0], x[1] - self.center[1]])
    }
}

/// A list of Gaussian vorticity blobs realising a square-integrable velocity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlobSpec {
    pub blobs: Vec<Blob>,
}

impl BlobSpec {
    pub fn new(blobs: Vec<Blob>) -> Self {
        BlobSpec { blobs }
    }

    pub fn empty() -> Self {
        BlobSpec::default()
    }

    pub fn is_empty(&self) -> bool {
        self.blobs.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.blobs.iter().map(|b| b.mass).sum()
    }

    /// Checks that every blob's three-width disk avoids the obstacle and, when
    /// `outer` is given, stays inside the outer ring.
    pub fn validate(&self, r_wall: f64, outer: Option<f64>) -> Result<()> {
        for (index, b) in self.blobs.iter().enumerate() {
            if !(b.width > 0.0 && b.width.is_finite()) {
                return Err(Error::BlobPlacement {
                    index,
                    reason: format!("width must be positive, got {}", b.width),
                });
            }
            if !(b.mass.is_finite() && b.center.iter().all(|c| c.is_finite())) {
                return Err(Error::BlobPlacement {
                    index,
                    reason: "non-finite parameters".into(),
                });
            }
            let rc = b.center[0].hypot(b.center[1]);
            if rc - 3.0 * b.width <= r_wall {
                return Err(Error::BlobPlacement {
                    index,
                    reason: format!("three-width disk reaches the obstacle (|c| = {rc}, width = {})", b.width),
                });
            }
            if let Some(r_out) = outer {
                if rc + 3.0 * b.width >= r_out {
                    return Err(Error::BlobPlacement {
                        index,
                        reason: format!("three-width disk leaves the grid (outer radius {r_out})"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn vorticity_at(&self, x: [f64; 2]) -> f64 {
        self.blobs.iter().map(|b| b.vorticity_at(x)).sum()
    }

    pub fn free_velocity_at(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        self.blobs.iter().fold([0.0, 0.0], |acc, b| {
            let v = b.free_velocity_at(t, x);
            [acc[0] + v[0], acc[1] + v[1]]
        })
    }
}

pub fn blob_vorticity(spec: &BlobSpec, grid: &Arc<Grid>) -> Result<ScalarField> {
    spec.validate(grid.r_wall(), Some(grid.outer_radius()))?;
    ScalarField::sample(grid, |x| spec.vorticity_at(x))
}

/// `L^p(R^2)` norm of a radial function by composite Simpson in `log r`.
///
/// The integrand `|f(r)|^p 2 pi r^2` is integrated over `ln r` between
/// `r_min` and `r_max` with `n` (even) panels.
pub fn radial_lp_norm(f: impl Fn(f64) -> f64, p: f64, r_min: f64, r_max: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let (a, b) = (r_min.ln(), r_max.ln());
    let h = (b - a) / n as f64;
    let g = |s: f64| {
        let r = s.exp();
        f(r).abs().powf(p) * 2.0 * PI * r * r
    };
    let mut sum = g(a) + g(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * g(a + k as f64 * h);
    }
    (sum * h / 3.0).powf(1.0 / p)
}

/// `(t - t0)^{1/2 - 1/p} || Theta(t) - Theta(t - t0) ||_{L^p(R^2)}` for unit amplitude.
///
/// By self-similarity this equals `|| Theta(1) - Theta(t / (t - t0)) ||_p`,
/// which is what gets integrated.
pub fn oseen_time_shift_distance(t: f64, t0: f64, p: f64) -> Result<f64> {
    if !(t0 >= 0.0 && t > t0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("need t > t0 >= 0, got t = {t}, t0 = {t0}")));
    }
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must lie in (2, inf), got {p}")));
    }
    if t0 == 0.0 {
        return Ok(0.0);
    }
    let tau = t / (t - t0);
    let diff = |r: f64| ((-r * r / (4.0 * tau)).exp() - (-r * r / 4.0).exp()) / (2.0 * PI * r);
    let r_max = (4.0 * tau * 60.0).sqrt();
    Ok(radial_lp_norm(diff, p, 1e-8, r_max, 100_000))
}
