//! Log-polar discretisation of the exterior of a centered disk.
//!
//! Nodes sit at `r = r_wall * exp(s_i)`, `theta_j = j * 2 pi / n_theta`,
//! with `s_i = i * ds` uniformly spaced on `[0, s_max]`. Row `i = 0` lies
//! on the obstacle, row `n_s - 1` on the artificial outer ring. Values are
//! stored radial-major: `index(i, j) = i * n_theta + j`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Grid {
    r_wall: f64,
    s_max: f64,
    n_s: usize,
    n_theta: usize,
    ds: f64,
    dtheta: f64,
    s: Vec<f64>,
    radius: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    weights: Vec<f64>,
    inv_metric: Vec<[f64; 4]>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.r_wall == other.r_wall
            && self.s_max == other.s_max
            && self.n_s == other.n_s
            && self.n_theta == other.n_theta
    }
}

/// Exact `(cos, sin)` of `2 pi j / n`, with quarter turns returned exactly.
fn unit_circle(j: usize, n: usize) -> (f64, f64) {
    if (4 * j) % n == 0 {
        match (4 * j) / n {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        let a = 2.0 * PI * j as f64 / n as f64;
        (a.cos(), a.sin())
    }
}

/// Second-order radial difference of a ring-major array at row `i`,
/// one-sided at the two boundary rows.
#[inline]
pub(crate) fn diff_s(values: &[f64], n_s: usize, n_theta: usize, i: usize, j: usize, ds: f64) -> f64 {
    let at = |ii: usize| values[ii * n_theta + j];
    if i == 0 {
        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * ds)
    } else if i == n_s - 1 {
        (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * ds)
    } else {
        (at(i + 1) - at(i - 1)) / (2.0 * ds)
    }
}

/// Centered periodic azimuthal difference.
#[inline]
pub(crate) fn diff_theta(values: &[f64], n_theta: usize, i: usize, j: usize, dtheta: f64) -> f64 {
    let jp = if j + 1 == n_theta { 0 } else { j + 1 };
    let jm = if j == 0 { n_theta - 1 } else { j - 1 };
    (values[i * n_theta + jp] - values[i * n_theta + jm]) / (2.0 * dtheta)
}

impl Grid {
    pub fn new(r_wall: f64, s_max: f64, n_s: usize, n_theta: usize) -> Result<Self> {
        if !(r_wall.is_finite() && r_wall > 0.0) {
            return Err(Error::InvalidGrid(format!("r_wall must be positive, got {r_wall}")));
        }
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(Error::InvalidGrid(format!("s_max must be positive, got {s_max}")));
        }
        if n_s < 8 {
            return Err(Error::InvalidGrid(format!("n_s must be at least 8, got {n_s}")));
        }
        if n_theta < 8 || n_theta % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_theta must be even and at least 8, got {n_theta}"
            )));
        }
        let ds = s_max / (n_s - 1) as f64;
        let dtheta = 2.0 * PI / n_theta as f64;
        let s: Vec<f64> = (0..n_s)
            .map(|i| if i == n_s - 1 { s_max } else { i as f64 * ds })
            .collect();
        let radius: Vec<f64> = s.iter().map(|&si| r_wall * si.exp()).collect();
        let (cos, sin): (Vec<f64>, Vec<f64>) = (0..n_theta).map(|j| unit_circle(j, n_theta)).unzip();

        // Dual-cell areas: the radial cell of node i spans [s_i - ds/2, s_i + ds/2]
        // clipped to [0, s_max]; the areas telescope to the exact annulus area.
        let ring_area = |a: f64, b: f64| 0.5 * r_wall * r_wall * ((2.0 * b).exp() - (2.0 * a).exp()) * dtheta;
        let mut weights = Vec::with_capacity(n_s * n_theta);
        for i in 0..n_s {
            let lo = if i == 0 { 0.0 } else { s[i] - 0.5 * ds };
            let hi = if i == n_s - 1 { s_max } else { s[i] + 0.5 * ds };
            let w = ring_area(lo, hi);
            weights.extend(std::iter::repeat(w).take(n_theta));
        }

        let mut grid = Grid {
            r_wall,
            s_max,
            n_s,
            n_theta,
            ds,
            dtheta,
            s,
            radius,
            cos,
            sin,
            weights,
            inv_metric: Vec::new(),
        };
        grid.inv_metric = grid.discrete_inverse_metric();
        Ok(grid)
    }

    /// Inverse of the discrete Jacobian `d(x, y)/d(s, theta)` obtained by applying
    /// the same difference operators used on fields to the node coordinates.
    /// Gradients built from it are exact for fields linear in `(x, y)`.
    fn discrete_inverse_metric(&self) -> Vec<[f64; 4]> {
        let pts = self.cartesian_coords();
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
        let mut out = Vec::with_capacity(self.n_nodes());
        for i in 0..self.n_s {
            for j in 0..self.n_theta {
                let x_s = diff_s(&xs, self.n_s, self.n_theta, i, j, self.ds);
                let y_s = diff_s(&ys, self.n_s, self.n_theta, i, j, self.ds);
                let x_t = diff_theta(&xs, self.n_theta, i, j, self.dtheta);
                let y_t = diff_theta(&ys, self.n_theta, i, j, self.dtheta);
                let det = x_s * y_t - y_s * x_t;
                out.push([y_t / det, -y_s / det, -x_t / det, x_s / det]);
            }
        }
        out
    }

    pub fn r_wall(&self) -> f64 {
        self.r_wall
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_nodes(&self) -> usize {
        self.n_s * self.n_theta
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    pub fn outer_radius(&self) -> f64 {
        self.radius[self.n_s - 1]
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s[i]
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radius[i]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radius
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta
    }

    pub fn cos_theta(&self, j: usize) -> f64 {
        self.cos[j]
    }

    pub fn sin_theta(&self, j: usize) -> f64 {
        self.sin[j]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let r = self.radius[i];
        [r * self.cos[j], r * self.sin[j]]
    }

    /// Node positions in radial-major order.
    pub fn cartesian_coords(&self) -> Vec<[f64; 2]> {
        let mut pts = Vec::with_capacity(self.n_nodes());
        for i in 0..self.n_s {
            for j in 0..self.n_theta {
                pts.push(self.point(i, j));
            }
        }
        pts
    }

    /// Quadrature weight of every node (area of its dual cell).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_area(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub(crate) fn inv_metric(&self, idx: usize) -> [f64; 4] {
        self.inv_metric[idx]
    }

    /// Radial row whose level equals `s_probe`.
    pub fn ring_of_level(&self, s_probe: f64) -> Result<usize> {
        let tol = 1e-9 * self.ds;
        let k = (s_probe / self.ds).round();
        if !(k >= 0.0 && k <= (self.n_s - 1) as f64) {
            return Err(Error::OffGridProbe(s_probe));
        }
        let i = k as usize;
        if (self.s[i] - s_probe).abs() > tol {
            return Err(Error::OffGridProbe(s_probe));
        }
        Ok(i)
    }

    /// The same discretisation of the domain shrunk by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        Grid::new(self.r_wall / lambda, self.s_max, self.n_s, self.n_theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn nodes_of_unit_annulus() {
        let g = Grid::new(1.0, 2f64.ln(), 9, 8).unwrap();
        assert_eq!(g.point(0, 0), [1.0, 0.0]);
        let p = g.point(8, 0);
        assert!(close(p[0], 2.0, 1e-15) && p[1] == 0.0);
        let p = g.point(0, 2);
        assert_eq!(p, [0.0, 1.0]);
        let p = g.point(8, 4);
        assert!(close(p[0], -2.0, 1e-15) && p[1] == 0.0);
    }

    #[test]
    fn total_weight_is_annulus_area() {
        let g = Grid::new(1.0, 2f64.ln(), 9, 8).unwrap();
        let area = g.total_area();
        assert!(((area - 3.0 * PI) / (3.0 * PI)).abs() < 1e-12, "{area}");

        let g = Grid::new(0.7, 64f64.ln(), 33, 16).unwrap();
        let exact = PI * 0.49 * (4096.0 - 1.0);
        assert!(((g.total_area() - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn outer_radius() {
        let g = Grid::new(0.5, 4f64.ln(), 17, 16).unwrap();
        assert!(close(g.outer_radius(), 2.0, 1e-15));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::new(1.0, 1.0, 9, 9).is_err());
        assert!(Grid::new(1.0, 1.0, 9, 6).is_err());
        assert!(Grid::new(1.0, 1.0, 7, 8).is_err());
        assert!(Grid::new(0.0, 1.0, 9, 8).is_err());
        assert!(Grid::new(1.0, -1.0, 9, 8).is_err());
        assert!(Grid::new(f64::NAN, 1.0, 9, 8).is_err());
    }

    #[test]
    fn coordinate_round_trip() {
        let g = Grid::new(1.3, 3.0, 31, 12).unwrap();
        for i in 0..g.n_s() {
            for j in 0..g.n_theta() {
                let [x, y] = g.point(i, j);
                let s = ((x * x + y * y).sqrt() / g.r_wall()).ln();
                assert!((s - g.s(i)).abs() <= 1e-12 * g.s(i).max(1e-3), "{i} {j}");
            }
        }
    }

    #[test]
    fn rescaling_divides_coordinates() {
        let g = Grid::new(1.0, 3.0, 17, 16).unwrap();
        let h = g.rescaled(2.0).unwrap();
        for (a, b) in g.cartesian_coords().iter().zip(h.cartesian_coords()) {
            assert_eq!(a[0] / 2.0, b[0]);
            assert_eq!(a[1] / 2.0, b[1]);
        }
        let h = g.rescaled(3.0).unwrap();
        for (a, b) in g.cartesian_coords().iter().zip(h.cartesian_coords()) {
            assert!((a[0] / 3.0 - b[0]).abs() <= 1e-15 * a[0].abs().max(1.0));
            assert!((a[1] / 3.0 - b[1]).abs() <= 1e-15 * a[1].abs().max(1.0));
        }
    }

    #[test]
    fn ring_levels() {
        let g = Grid::new(1.0, 2.0, 21, 8).unwrap();
        assert_eq!(g.ring_of_level(0.0).unwrap(), 0);
        assert_eq!(g.ring_of_level(1.0).unwrap(), 10);
        assert_eq!(g.ring_of_level(2.0).unwrap(), 20);
        assert!(g.ring_of_level(0.05).is_err());
        assert!(g.ring_of_level(2.1).is_err());
    }
}
