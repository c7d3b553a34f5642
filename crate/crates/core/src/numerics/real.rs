use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use crate::{Error, Result};

/// Determinant magnitude below which inversion is refused.
pub const SINGULAR_DET: f64 = 1e-14;

/// Small dense real square matrix; the carrier for `F`, `Q`, `H` and covariances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_fn(self.dim, |i, j| self[(i, j)] + other[(i, j)]))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_fn(self.dim, |i, j| self[(i, j)] - other[(i, j)]))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_fn(self.dim, |i, j| c * self[(i, j)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.dim;
        Ok(Self::from_fn(n, |i, j| {
            (0..n).map(|k| self[(i, k)] * other[(k, j)]).sum()
        }))
    }

    /// `u^T A u`.
    pub fn quadratic_form(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        let n = self.dim;
        Ok((0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| u[i] * self[(i, j)] * u[j])
            .sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.max_abs_diff(&self.transpose()).unwrap_or(f64::INFINITY)
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, |i, j| Complex64::new(self[(i, j)], 0.0))
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_eig(&self) -> Result<f64> {
        let sym = Self::from_fn(self.dim, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]));
        super::psd_min_eig(&sym.to_complex())
    }

    /// Eigenvalues of the symmetric part, descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let sym = Self::from_fn(self.dim, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]));
        Ok(super::eig_hermitian(&sym.to_complex())?.values)
    }

    /// Largest eigenvalue magnitude of the symmetric part.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs())))
    }

    pub fn determinant(&self) -> f64 {
        let (_, det) = self.gauss_jordan();
        det
    }

    /// Inverse; 2x2 inputs go through [`invert_sym_2x2`].
    pub fn inverse(&self) -> Result<Self> {
        if self.dim == 2 {
            return invert_sym_2x2(self);
        }
        let (inv, det) = self.gauss_jordan();
        match inv {
            Some(inv) if det.abs() > SINGULAR_DET => Ok(inv),
            _ => Err(Error::Singular { det }),
        }
    }

    /// Gauss-Jordan with partial pivoting; returns (inverse, determinant).
    fn gauss_jordan(&self) -> (Option<Self>, f64) {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .unwrap_or(col);
            if a[(pivot, col)] == 0.0 {
                return (None, 0.0);
            }
            if pivot != col {
                for k in 0..n {
                    a.data.swap(pivot * n + k, col * n + k);
                    inv.data.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for k in 0..n {
                a[(col, k)] /= p;
                inv[(col, k)] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == 0.0 {
                    continue;
                }
                for k in 0..n {
                    a[(r, k)] -= f * a[(col, k)];
                    inv[(r, k)] -= f * inv[(col, k)];
                }
            }
        }
        (Some(inv), det)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Inverse of a 2x2 real symmetric matrix by the adjugate formula.
pub fn invert_sym_2x2(a: &RealMatrix) -> Result<RealMatrix> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: a.dim(),
        });
    }
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let det = p * s - q * r;
    if det.abs() <= SINGULAR_DET {
        return Err(Error::Singular { det });
    }
    RealMatrix::from_rows(&[&[s / det, -q / det], &[-r / det, p / det]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invert_examples() {
        let id = RealMatrix::identity(2);
        assert_eq!(invert_sym_2x2(&id).unwrap(), id);
        let inv = invert_sym_2x2(&RealMatrix::from_diag(&[2.0, 4.0])).unwrap();
        assert_eq!(inv, RealMatrix::from_diag(&[0.5, 0.25]));
    }

    #[test]
    fn invert_sensor_qfim_at_half() {
        // diag(e^{-0.5}, 1/(e^{0.5}-1)) -> diag(e^{0.5}, e^{0.5}-1)
        let h = RealMatrix::from_diag(&[(-0.5f64).exp(), 1.0 / (0.5f64.exp() - 1.0)]);
        let inv = invert_sym_2x2(&h).unwrap();
        assert!((inv[(0, 0)] - 1.648_721_270_700_128).abs() < 1e-12);
        assert!((inv[(1, 1)] - 0.648_721_270_700_128).abs() < 1e-12);
        assert!(inv[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn invert_rejects_singular() {
        let a = RealMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        match invert_sym_2x2(&a) {
            Err(Error::Singular { det }) => assert_eq!(det, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn general_inverse_3x3() {
        let a = RealMatrix::from_rows(&[&[4.0, 1.0, 0.5], &[1.0, 3.0, 0.2], &[0.5, 0.2, 2.0]]).unwrap();
        let inv = a.inverse().unwrap();
        let prod = a.matmul(&inv).unwrap();
        assert!(prod.max_abs_diff(&RealMatrix::identity(3)).unwrap() < 1e-14);
        let det = a.determinant();
        let expected = 4.0 * (6.0 - 0.04) - 1.0 * (2.0 - 0.1) + 0.5 * (0.2 - 1.5);
        assert!((det - expected).abs() < 1e-12);
    }

    #[test]
    fn min_eig_and_norm() {
        let a = RealMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        assert!((a.min_eig().unwrap() - 1.0).abs() < 1e-14);
        assert!((a.spectral_norm().unwrap() - 3.0).abs() < 1e-14);
    }
}
