use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default number of momentum points for the Gaussian apparatus.
pub const DEFAULT_GRID_POINTS: usize = 2048;

/// Trapezoidal quadrature on a uniform momentum interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    /// `n` equally spaced points on `[lo, hi]` with trapezoid weights.
    pub fn trapezoid(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidGrid(format!("bad interval [{lo}, {hi}]")));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let points = (0..n).map(|i| lo + h * i as f64).collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Ok(Self { points, weights })
    }

    /// Symmetric grid covering the Gaussian pointer of width `sigma`.
    ///
    /// The half-width `max(4/sigma, 6)` spans 8 standard deviations of
    /// `exp(-2 p^2 sigma^2)` and at least three periods of `cos(pi p)`.
    pub fn for_gaussian(sigma: f64, n: usize) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
                reason: "must be positive and finite",
            });
        }
        let half = (4.0 / sigma).max(6.0);
        Self::trapezoid(-half, half, n)
    }

    /// Builds a grid from explicit nodes and weights after validating them.
    pub fn from_parts(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("points must be strictly increasing".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidGrid(format!("non-positive weight {w}")));
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i f(p_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }

    /// `Σ w_i |f_i|^2`.
    pub fn norm_sqr(&self, f: &[Complex64]) -> Result<f64> {
        Ok(grid_inner(self, f, f)?.re)
    }

    /// Rescales `f` so that its discrete norm is one.
    pub fn normalize(&self, f: &mut [Complex64]) -> Result<()> {
        let n = self.norm_sqr(f)?.sqrt();
        if n == 0.0 {
            return Err(Error::InvalidGrid("cannot normalize a zero amplitude".into()));
        }
        for z in f.iter_mut() {
            *z /= n;
        }
        Ok(())
    }
}

/// `Σ_i w_i conj(f_i) g_i`.
///
/// Each term is formed as `w_i (conj(f_i) g_i)` and summed in index order, so
/// swapping the arguments yields the exact complex conjugate.
pub fn grid_inner(grid: &QuadratureGrid, f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
    let n = grid.len();
    for len in [f.len(), g.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let mut re = 0.0;
    let mut im = 0.0;
    for i in 0..n {
        let (a, b) = (f[i], g[i]);
        let w = grid.weights[i];
        // conj(a) b = (a.re b.re + a.im b.im) + i (a.re b.im - a.im b.re)
        re += w * (a.re * b.re + a.im * b.im);
        im += w * (a.re * b.im - a.im * b.re);
    }
    Ok(Complex64::new(re, im))
}
