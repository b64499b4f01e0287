//! Nodal fields on a [`Grid`] and the discrete calculus used to measure them.
//!
//! Derivatives are second-order: centered in `s` and `theta`, one-sided at the
//! two radial boundary rows, periodic in `theta`. Cartesian derivatives go
//! through the discrete metric of the grid, so they are exact on fields that
//! are linear in `(x, y)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{diff_s, diff_theta, Grid};

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

/// Cartesian vector field `(u1, u2)` sampled at every node.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Arc<Grid>,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![0.0; grid.n_nodes()],
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.n_nodes(),
                values.len()
            )));
        }
        check_finite(&values, "scalar field")?;
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    pub(crate) fn from_values_unchecked(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_nodes());
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    /// Samples `f(x)` at every node.
    pub fn sample(grid: &Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = grid.cartesian_coords().into_iter().map(f).collect();
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `a * x + self`.
    pub fn axpy(&self, a: f64, x: &ScalarField) -> Result<Self> {
        same_grid(&self.grid, &x.grid)?;
        let values = self
            .values
            .iter()
            .zip(&x.values)
            .map(|(y, x)| a * x + y)
            .collect();
        Ok(ScalarField {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn subtract(&self, other: &ScalarField) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Quadrature of the field over the annulus.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v * w)
            .sum()
    }

    /// Cartesian gradient `(d/dx, d/dy)`.
    pub fn gradient(&self) -> VectorField {
        let g = &self.grid;
        let n = g.n_nodes();
        let (mut gx, mut gy) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..g.n_s() {
            for j in 0..g.n_theta() {
                let fs = diff_s(&self.values, g.n_s(), g.n_theta(), i, j, g.ds());
                let ft = diff_theta(&self.values, g.n_theta(), i, j, g.dtheta());
                let m = g.inv_metric(g.index(i, j));
                gx.push(m[0] * fs + m[1] * ft);
                gy.push(m[2] * fs + m[3] * ft);
            }
        }
        VectorField {
            grid: g.clone(),
            u1: gx,
            u2: gy,
        }
    }
}

impl VectorField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        VectorField {
            grid: grid.clone(),
            u1: vec![0.0; grid.n_nodes()],
            u2: vec![0.0; grid.n_nodes()],
        }
    }

    pub fn from_components(grid: &Arc<Grid>, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        if u1.len() != grid.n_nodes() || u2.len() != grid.n_nodes() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values per component",
                grid.n_nodes()
            )));
        }
        check_finite(&u1, "vector field")?;
        check_finite(&u2, "vector field")?;
        Ok(VectorField {
            grid: grid.clone(),
            u1,
            u2,
        })
    }

    pub fn sample(grid: &Arc<Grid>, f: impl Fn([f64; 2]) -> [f64; 2]) -> Result<Self> {
        let (u1, u2) = grid.cartesian_coords().into_iter().map(|p| {
            let v = f(p);
            (v[0], v[1])
        }).unzip();
        Self::from_components(grid, u1, u2)
    }

    /// Like [`VectorField::sample`] for fallible samplers.
    pub fn try_sample(grid: &Arc<Grid>, f: impl Fn([f64; 2]) -> Result<[f64; 2]>) -> Result<Self> {
        let pts = grid.cartesian_coords();
        let mut u1 = Vec::with_capacity(pts.len());
        let mut u2 = Vec::with_capacity(pts.len());
        for p in pts {
            let v = f(p)?;
            u1.push(v[0]);
            u2.push(v[1]);
        }
        Self::from_components(grid, u1, u2)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn u1(&self) -> &[f64] {
        &self.u1
    }

    pub fn u2(&self) -> &[f64] {
        &self.u2
    }

    pub fn at(&self, i: usize, j: usize) -> [f64; 2] {
        let k = self.grid.index(i, j);
        [self.u1[k], self.u2[k]]
    }

    pub fn scaled(&self, c: f64) -> Self {
        VectorField {
            grid: self.grid.clone(),
            u1: self.u1.iter().map(|v| c * v).collect(),
            u2: self.u2.iter().map(|v| c * v).collect(),
        }
    }

    /// `a * x + self`.
    pub fn axpy(&self, a: f64, x: &VectorField) -> Result<Self> {
        same_grid(&self.grid, &x.grid)?;
        let comb = |y: &[f64], x: &[f64]| y.iter().zip(x).map(|(y, x)| a * x + y).collect();
        Ok(VectorField {
            grid: self.grid.clone(),
            u1: comb(&self.u1, &x.u1),
            u2: comb(&self.u2, &x.u2),
        })
    }

    pub fn subtract(&self, other: &VectorField) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// `d u2/dx - d u1/dy`.
    pub fn curl(&self) -> ScalarField {
        let g1 = ScalarField::from_values_unchecked(&self.grid, self.u1.clone()).gradient();
        let g2 = ScalarField::from_values_unchecked(&self.grid, self.u2.clone()).gradient();
        let values = g2.u1.iter().zip(&g1.u2).map(|(a, b)| a - b).collect();
        ScalarField::from_values_unchecked(&self.grid, values)
    }

    /// `d u1/dx + d u2/dy`.
    pub fn divergence(&self) -> ScalarField {
        let g1 = ScalarField::from_values_unchecked(&self.grid, self.u1.clone()).gradient();
        let g2 = ScalarField::from_values_unchecked(&self.grid, self.u2.clone()).gradient();
        let values = g1.u1.iter().zip(&g2.u2).map(|(a, b)| a + b).collect();
        ScalarField::from_values_unchecked(&self.grid, values)
    }

    /// Row-wise divergence of `u ⊗ u`: component `k` is `d(u_k u1)/dx + d(u_k u2)/dy`.
    pub fn self_advection(&self) -> VectorField {
        let product = |a: &[f64], b: &[f64]| {
            let values = a.iter().zip(b).map(|(x, y)| x * y).collect();
            ScalarField::from_values_unchecked(&self.grid, values).gradient()
        };
        let g11 = product(&self.u1, &self.u1);
        let g12 = product(&self.u1, &self.u2);
        let g22 = product(&self.u2, &self.u2);
        VectorField {
            grid: self.grid.clone(),
            u1: g11.u1.iter().zip(&g12.u2).map(|(a, b)| a + b).collect(),
            u2: g12.u1.iter().zip(&g22.u2).map(|(a, b)| a + b).collect(),
        }
    }

    /// Pointwise Frobenius norm of the velocity gradient.
    pub fn gradient_magnitude(&self) -> ScalarField {
        let g1 = ScalarField::from_values_unchecked(&self.grid, self.u1.clone()).gradient();
        let g2 = ScalarField::from_values_unchecked(&self.grid, self.u2.clone()).gradient();
        let values = (0..self.grid.n_nodes())
            .map(|k| (g1.u1[k].powi(2) + g1.u2[k].powi(2) + g2.u1[k].powi(2) + g2.u2[k].powi(2)).sqrt())
            .collect();
        ScalarField::from_values_unchecked(&self.grid, values)
    }

    /// Counterclockwise circulation on the ring at level `s_probe`.
    pub fn circulation(&self, s_probe: f64) -> Result<f64> {
        let i = self.grid.ring_of_level(s_probe)?;
        Ok(self.circulation_at_ring(i))
    }

    /// Counterclockwise circulation on radial row `i` (trapezoid rule in theta).
    pub fn circulation_at_ring(&self, i: usize) -> f64 {
        let g = &self.grid;
        let r = g.radius(i);
        let sum: f64 = (0..g.n_theta())
            .map(|j| {
                let k = g.index(i, j);
                -self.u1[k] * g.sin_theta(j) + self.u2[k] * g.cos_theta(j)
            })
            .sum();
        sum * r * g.dtheta()
    }
}

/// Anything with a nonnegative magnitude per node.
pub trait NodeMagnitudes {
    fn grid(&self) -> &Arc<Grid>;
    fn magnitudes(&self) -> Vec<f64>;
}

impl NodeMagnitudes for ScalarField {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.abs()).collect()
    }
}

impl NodeMagnitudes for VectorField {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn magnitudes(&self) -> Vec<f64> {
        self.u1.iter().zip(&self.u2).map(|(a, b)| a.hypot(*b)).collect()
    }
}

/// `L^p` norm on the grid quadrature; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm<F: NodeMagnitudes + ?Sized>(field: &F, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 1.0 {
        return Err(Error::InvalidArgument(format!("p must exceed 1, got {p}")));
    }
    let mags = field.magnitudes();
    if p.is_infinite() {
        return Ok(mags.iter().cloned().fold(0.0, f64::max));
    }
    let w = field.grid().weights();
    let sum: f64 = if p == 2.0 {
        mags.iter().zip(w).map(|(m, w)| w * m * m).sum()
    } else {
        mags.iter().zip(w).map(|(m, w)| w * m.powf(p)).sum()
    };
    Ok(if p == 2.0 { sum.sqrt() } else { sum.powf(1.0 / p) })
}

/// Weak-`L^2` quasinorm `sup_R R |{|u| > R}|^{1/2}` on the discrete measure.
///
/// Sorting the magnitudes in decreasing order, the supremum is attained just
/// below one of them, so it equals `max_k m_k * sqrt(W_k)` with `W_k` the total
/// weight of the `k` largest nodes.
pub fn weak_l2_quasinorm<F: NodeMagnitudes + ?Sized>(field: &F) -> f64 {
    let mags = field.magnitudes();
    let w = field.grid().weights();
    let mut order: Vec<usize> = (0..mags.len()).collect();
    order.sort_unstable_by(|&a, &b| mags[b].total_cmp(&mags[a]));
    let mut cumulated = 0.0;
    let mut best = 0.0_f64;
    for k in order {
        cumulated += w[k];
        best = best.max(mags[k] * cumulated.sqrt());
    }
    best
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn grid(r: f64, smax: f64, ns: usize, nt: usize) -> Arc<Grid> {
        Arc::new(Grid::new(r, smax, ns, nt).unwrap())
    }

    fn interior_rows(g: &Grid) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..g.n_s() - 1).flat_map(move |i| (0..g.n_theta()).map(move |j| (i, j)))
    }

    #[test]
    fn curl_of_linear_rotation_is_exact() {
        for g in [grid(1.0, 2f64.ln(), 9, 8), grid(0.6, 3.0, 40, 24)] {
            let u = VectorField::sample(&g, |[x, y]| [y, -x]).unwrap();
            let c = u.curl();
            for k in 0..g.n_nodes() {
                assert!((c.values()[k] + 2.0).abs() < 1e-8, "{}", c.values()[k]);
            }
        }
    }

    #[test]
    fn harmonic_field_is_discretely_curl_and_divergence_free() {
        let h = |[x, y]: [f64; 2]| {
            let r2 = x * x + y * y;
            [y / (2.0 * PI * r2), -x / (2.0 * PI * r2)]
        };
        for n in [32, 64, 128] {
            let g = grid(1.0, 3.0, n, n);
            let u = VectorField::sample(&g, h).unwrap();
            let c = u.curl();
            let d = u.divergence();
            let e = interior_rows(&g)
                .map(|(i, j)| c.at(i, j).abs().max(d.at(i, j).abs()))
                .fold(0.0, f64::max);
            assert!(e < 1e-12, "{n}: {e}");
        }
    }

    #[test]
    fn lp_norm_of_annulus_indicator() {
        let g = grid(1.0, 2f64.ln(), 33, 16);
        let f = ScalarField::sample(&g, |_| 1.0).unwrap();
        let v = lp_norm(&f, 2.0).unwrap();
        assert!(((v - (3.0 * PI).sqrt()) / (3.0 * PI).sqrt()).abs() < 0.01);
        assert_eq!(lp_norm(&ScalarField::zeros(&g), 3.0).unwrap(), 0.0);
        assert_eq!(lp_norm(&VectorField::zeros(&g), f64::INFINITY).unwrap(), 0.0);
        assert!(lp_norm(&f, 1.0).is_err());
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn weak_l2_of_indicator_is_sqrt_measure() {
        let g = grid(1.0, 2.0, 21, 16);
        let u = VectorField::sample(&g, |[x, y]| {
            let r = x.hypot(y);
            if r < 3.0 {
                [x / r, y / r]
            } else {
                [0.0, 0.0]
            }
        })
        .unwrap();
        let measure: f64 = u
            .magnitudes()
            .iter()
            .zip(g.weights())
            .filter(|(m, _)| **m > 0.5)
            .map(|(_, w)| w)
            .sum();
        assert!((weak_l2_quasinorm(&u) - measure.sqrt()).abs() < 1e-12);
        assert_eq!(weak_l2_quasinorm(&VectorField::zeros(&g)), 0.0);
    }

    #[test]
    fn circulation_of_harmonic_field() {
        let g = grid(1.0, 2.0, 21, 32);
        let u = VectorField::sample(&g, |[x, y]| {
            let r2 = x * x + y * y;
            [y / (2.0 * PI * r2), -x / (2.0 * PI * r2)]
        })
        .unwrap();
        for i in [0, 7, 20] {
            assert!((u.circulation(g.s(i)).unwrap() + 1.0).abs() < 1e-8);
        }
        assert!(u.circulation(0.05).is_err());
        assert_eq!(VectorField::zeros(&g).circulation(1.0).unwrap(), 0.0);
    }

    #[test]
    fn arithmetic() {
        let g = grid(1.0, 2.0, 9, 8);
        let f = ScalarField::sample(&g, |[x, y]| x * y + 1.0).unwrap();
        assert!(f.subtract(&f).unwrap().values().iter().all(|v| *v == 0.0));
        let twice = ScalarField::zeros(&g).axpy(2.0, &f).unwrap();
        for (a, b) in twice.values().iter().zip(f.values()) {
            assert_eq!(*a, 2.0 * b);
        }
        let other = grid(1.0, 2.0, 9, 10);
        assert!(matches!(
            f.axpy(1.0, &ScalarField::zeros(&other)),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = grid(1.0, 2.0, 9, 8);
        assert!(ScalarField::sample(&g, |_| f64::NAN).is_err());
        assert!(VectorField::sample(&g, |_| [0.0, f64::INFINITY]).is_err());
    }
}
