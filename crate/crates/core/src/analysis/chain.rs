use serde::Serialize;

use crate::fisher::FisherReport;
use crate::numerics::RealMatrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainTolerances {
    /// Allowed negativity of `Q - F`, `H - Q` and `H - Q - ℱ`.
    pub matrix: f64,
    /// Allowed negativity of the weight-information quadratic form.
    pub weight_information: f64,
    /// Allowed negativity of `M C - F^-1`, absolute.
    pub covariance: f64,
}

impl Default for ChainTolerances {
    fn default() -> Self {
        Self {
            matrix: 1e-9,
            weight_information: 1e-10,
            covariance: 0.0,
        }
    }
}

/// One `A >= B` link: smallest eigenvalue of `A - B` and its verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Link {
    pub min_eig: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Link {
    fn new(min_eig: f64, tolerance: f64) -> Self {
        Self {
            min_eig,
            tolerance,
            pass: min_eig >= -tolerance,
        }
    }

    fn of(upper: &RealMatrix, lower: &RealMatrix, tolerance: f64) -> Result<Self> {
        Ok(Self::new(upper.sub(lower)?.min_eig()?, tolerance))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainVerdict {
    pub q_minus_f: Link,
    pub h_minus_q: Link,
    /// `ℱ >= 0`, when the weight information was supplied.
    pub weight_information: Option<Link>,
    /// `H - Q - ℱ >= 0`, when the weight information was supplied.
    pub h_minus_q_minus_weight: Option<Link>,
    /// `M C - F^-1 >= 0`, when a scaled covariance was supplied.
    pub covariance_minus_bound: Option<Link>,
}

impl ChainVerdict {
    pub fn links(&self) -> Vec<(&'static str, Link)> {
        let mut out = vec![("Q-F", self.q_minus_f), ("H-Q", self.h_minus_q)];
        if let Some(l) = self.weight_information {
            out.push(("weight_information", l));
        }
        if let Some(l) = self.h_minus_q_minus_weight {
            out.push(("H-Q-weight_information", l));
        }
        if let Some(l) = self.covariance_minus_bound {
            out.push(("MC-F^-1", l));
        }
        out
    }

    pub fn pass(&self) -> bool {
        self.links().iter().all(|(_, l)| l.pass)
    }
}

/// Checks `F <= Q <= H`, optionally `ℱ >= 0`, `Q + ℱ <= H` and `M C >= F^-1`.
pub fn verify_chain(
    f: &RealMatrix,
    q: &RealMatrix,
    h: &RealMatrix,
    weight_information: Option<&RealMatrix>,
    scaled_covariance: Option<&RealMatrix>,
    tol: &ChainTolerances,
) -> Result<ChainVerdict> {
    let d = h.dim();
    for m in [Some(f), Some(q), weight_information, scaled_covariance].into_iter().flatten() {
        if m.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: m.dim(),
            });
        }
    }
    let (weight, h_minus_q_minus_weight) = match weight_information {
        Some(w) => (
            Some(Link::new(w.min_eig()?, tol.weight_information)),
            Some(Link::of(&h.sub(q)?, w, tol.matrix)?),
        ),
        None => (None, None),
    };
    let covariance_minus_bound = scaled_covariance
        .map(|c| Link::of(c, &f.inverse()?, tol.covariance))
        .transpose()?;
    Ok(ChainVerdict {
        q_minus_f: Link::of(q, f, tol.matrix)?,
        h_minus_q: Link::of(h, q, tol.matrix)?,
        weight_information: weight,
        h_minus_q_minus_weight,
        covariance_minus_bound,
    })
}

/// [`verify_chain`] on a report, including its weight information.
pub fn verify_report(report: &FisherReport, tol: &ChainTolerances) -> Result<ChainVerdict> {
    verify_chain(
        &report.f,
        &report.q,
        &report.h,
        Some(&report.classical.weight_information),
        None,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_matrices_pass_with_zero_gap() {
        let m = RealMatrix::from_rows(&[&[1.0, 0.2], &[0.2, 0.5]]).unwrap();
        let v = verify_chain(&m, &m, &m, None, None, &ChainTolerances::default()).unwrap();
        assert!(v.pass());
        assert!(v.q_minus_f.min_eig.abs() < 1e-15);
        assert!(v.h_minus_q.min_eig.abs() < 1e-15);
    }

    #[test]
    fn inflated_q_fails_upper_link() {
        let h = RealMatrix::from_diag(&[1.0, 2.0]);
        let v = verify_chain(&h.scale(0.5), &h.scale(1.5), &h, None, None, &ChainTolerances::default()).unwrap();
        assert!(v.q_minus_f.pass);
        assert!(!v.h_minus_q.pass);
        assert!((v.h_minus_q.min_eig + 1.0).abs() < 1e-14);
        assert!(!v.pass());
    }

    #[test]
    fn covariance_link() {
        let f = RealMatrix::from_diag(&[4.0, 2.0]);
        let h = RealMatrix::from_diag(&[5.0, 5.0]);
        let c = RealMatrix::from_diag(&[0.3, 0.45]);
        let v = verify_chain(&f, &f, &h, None, Some(&c), &ChainTolerances::default()).unwrap();
        let link = v.covariance_minus_bound.unwrap();
        assert!((link.min_eig + 0.05).abs() < 1e-14);
        assert!(!link.pass);
    }

    #[test]
    fn dimension_mismatch() {
        let a = RealMatrix::identity(2);
        let b = RealMatrix::identity(3);
        assert!(verify_chain(&a, &b, &a, None, None, &ChainTolerances::default()).is_err());
    }
}
