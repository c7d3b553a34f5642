//! Cyclic Jacobi eigensolver for dense Hermitian matrices.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HERMITIAN_TOL};
use crate::Result;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * self.values[k] * v[(j, k)].conj())
                .sum()
        })
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// Expresses `op` in the eigenbasis: `V† op V`.
    pub fn to_eigenbasis(&self, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.vectors.adjoint().matmul(op)?.matmul(&self.vectors)
    }

    /// Inverse of [`Self::to_eigenbasis`].
    pub fn from_eigenbasis(&self, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.vectors.matmul(op)?.matmul(&self.vectors.adjoint())
    }
}

/// Diagonalizes a Hermitian matrix.
///
/// The input is checked against the relative tolerance [`HERMITIAN_TOL`] and
/// then symmetrized, so residual round-off asymmetry never reaches the
/// rotations.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigen> {
    a.check_hermitian(HERMITIAN_TOL)?;
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let frob: f64 = m.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = f64::EPSILON * frob;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let values = order.iter().map(|&k| m[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn psd_min_eig(a: &ComplexMatrix) -> Result<f64> {
    let eig = eig_hermitian(a)?;
    Ok(eig.values.last().copied().unwrap_or(0.0))
}

/// One unitary rotation in the (p, q) plane that annihilates `m[p][q]`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = m.dim();

    // A <- A J with J_pp = J_qq = c, J_pq = s e^{ia}, J_qp = -s e^{-ia}.
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * c - phase.conj() * akq * s;
        m[(k, q)] = phase * akp * s + akq * c;
    }
    // A <- J† A
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * c - phase * aqk * s;
        m[(q, k)] = phase.conj() * apk * s + aqk * c;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - phase.conj() * vkq * s;
        v[(k, q)] = phase * vkp * s + vkq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn orthonormality_defect(v: &ComplexMatrix) -> f64 {
        v.adjoint()
            .matmul(v)
            .unwrap()
            .max_abs_diff(&ComplexMatrix::identity(v.dim()))
            .unwrap()
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let eig = eig_hermitian(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0]);
        assert!(orthonormality_defect(&eig.vectors) < 1e-15);
    }

    #[test]
    fn pauli_x() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let eig = eig_hermitian(&x).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-15);
        assert!((eig.values[1] + 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = eig.vector(0);
        // eigenvector of +1 is (1, 1)/sqrt2 up to a global phase
        let overlap = (v0[0] * h + v0[1] * h).norm();
        assert!((overlap - 1.0).abs() < 1e-14);
        let v1 = eig.vector(1);
        let overlap = (v1[0] * h - v1[1] * h).norm();
        assert!((overlap - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, -1.0), c(0.0, 0.5)],
            vec![c(1.0, 1.0), c(-1.0, 0.0), c(0.3, 0.0)],
            vec![c(0.0, -0.5), c(0.3, 0.0), c(0.7, 0.0)],
        ])
        .unwrap();
        let eig = eig_hermitian(&a).unwrap();
        assert!(eig.reconstruct().max_abs_diff(&a).unwrap() < 1e-13);
        assert!(orthonormality_defect(&eig.vectors) < 1e-13);
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        let sum: f64 = eig.values.iter().sum();
        assert!((sum - a.trace().re).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(eig_hermitian(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn min_eig_examples() {
        assert_eq!(psd_min_eig(&ComplexMatrix::zeros(2)).unwrap(), 0.0);
        assert!((psd_min_eig(&ComplexMatrix::from_diag(&[3.0, -2.0])).unwrap() + 2.0).abs() < 1e-15);
    }
}
