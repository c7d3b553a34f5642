//! Symmetric logarithmic derivatives in the eigenbasis of the state.

use num_complex::Complex64;

use super::jet::StateJet;
use crate::numerics::{eig_hermitian, ComplexMatrix, HermitianEigen, RealMatrix};
use crate::{Error, Result};

/// Relative support cutoff: pairs with `λ_i + λ_j <= SUPPORT_REL · λ_max` are dropped.
pub const SUPPORT_REL: f64 = 1e-10;

/// Above this dimension the QFIM is assembled from the spectral double sum
/// instead of explicit SLD products.
pub const EXPLICIT_PRODUCT_MAX_DIM: usize = 8;

const KERNEL_LEAK_TOL: f64 = 1e-8;

/// Default support cutoff for a state with the given spectrum.
pub fn default_support_eps(values: &[f64]) -> f64 {
    let max = values.iter().fold(0.0f64, |m, &v| m.max(v));
    SUPPORT_REL * max
}

/// SLDs of one state for several derivative directions, kept in the state's
/// eigenbasis.
#[derive(Clone, Debug)]
pub struct SldSet {
    eigen: HermitianEigen,
    support_eps: f64,
    derivatives: Vec<ComplexMatrix>,
    slds: Vec<ComplexMatrix>,
}

impl SldSet {
    pub fn new(rho: &ComplexMatrix, drho: &[ComplexMatrix], support_eps: Option<f64>) -> Result<Self> {
        let eigen = eig_hermitian(rho)?;
        let eps = support_eps.unwrap_or_else(|| default_support_eps(&eigen.values));
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter {
                name: "support_eps",
                value: eps,
                reason: "must be positive",
            });
        }
        let mut derivatives = Vec::with_capacity(drho.len());
        let mut slds = Vec::with_capacity(drho.len());
        for d in drho {
            let de = eigen.to_eigenbasis(d)?;
            slds.push(sld_in_eigenbasis(&eigen.values, &de, eps)?);
            derivatives.push(de);
        }
        Ok(Self {
            eigen,
            support_eps: eps,
            derivatives,
            slds,
        })
    }

    pub fn from_jet(jet: &StateJet) -> Result<Self> {
        Self::new(&jet.rho, &jet.drho, None)
    }

    pub fn len(&self) -> usize {
        self.slds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slds.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn support_eps(&self) -> f64 {
        self.support_eps
    }

    /// SLD for parameter `a` in the computational basis.
    pub fn sld(&self, a: usize) -> Result<ComplexMatrix> {
        self.eigen.from_eigenbasis(&self.slds[a])
    }

    pub fn slds(&self) -> Result<Vec<ComplexMatrix>> {
        (0..self.len()).map(|a| self.sld(a)).collect()
    }

    /// QFIM of the state.
    pub fn qfim(&self) -> RealMatrix {
        let n = self.len();
        let mut h = RealMatrix::zeros(n);
        let explicit = self.eigen.values.len() <= EXPLICIT_PRODUCT_MAX_DIM;
        for a in 0..n {
            for b in a..n {
                let v = if explicit {
                    self.anticommutator_expectation(a, b)
                } else {
                    self.double_sum(a, b)
                };
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        h
    }

    /// `Tr[ρ (L_a L_b - L_b L_a)]`.
    pub fn commutator_trace(&self, a: usize, b: usize) -> Complex64 {
        let (la, lb) = (&self.slds[a], &self.slds[b]);
        let n = la.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &lam) in self.eigen.values.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            let mut ab = Complex64::new(0.0, 0.0);
            let mut ba = Complex64::new(0.0, 0.0);
            for k in 0..n {
                ab += la[(i, k)] * lb[(k, i)];
                ba += lb[(i, k)] * la[(k, i)];
            }
            acc += (ab - ba) * lam;
        }
        acc
    }

    /// Largest entry of `Lρ + ρL - 2∂ρ` over the retained support.
    pub fn residual(&self, a: usize) -> f64 {
        let l = &self.slds[a];
        let d = &self.derivatives[a];
        let lam = &self.eigen.values;
        let n = lam.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if lam[i] + lam[j] <= self.support_eps {
                    continue;
                }
                let r = l[(i, j)] * (lam[i] + lam[j]) - d[(i, j)] * 2.0;
                worst = worst.max(r.norm());
            }
        }
        worst
    }

    fn anticommutator_expectation(&self, a: usize, b: usize) -> f64 {
        // Re Tr[ρ L_a L_b] with ρ diagonal.
        let (la, lb) = (&self.slds[a], &self.slds[b]);
        let n = la.dim();
        let mut acc = 0.0;
        for (i, &lam) in self.eigen.values.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += la[(i, k)] * lb[(k, i)];
            }
            acc += lam * s.re;
        }
        acc
    }

    fn double_sum(&self, a: usize, b: usize) -> f64 {
        let (da, db) = (&self.derivatives[a], &self.derivatives[b]);
        let lam = &self.eigen.values;
        let n = lam.len();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s = lam[i] + lam[j];
                if s <= self.support_eps {
                    continue;
                }
                acc += 2.0 * (da[(i, j)] * db[(i, j)].conj()).re / s;
            }
        }
        acc
    }
}

fn sld_in_eigenbasis(values: &[f64], d: &ComplexMatrix, eps: f64) -> Result<ComplexMatrix> {
    let n = values.len();
    let tol = KERNEL_LEAK_TOL * d.max_abs().max(1.0);
    let mut leak = 0.0f64;
    let mut l = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let s = values[i] + values[j];
            if s > eps {
                l[(i, j)] = d[(i, j)] * (2.0 / s);
            } else {
                leak = leak.max(d[(i, j)].norm());
            }
        }
    }
    if leak > tol {
        return Err(Error::OutsideSupport { weight: leak });
    }
    Ok(l)
}

/// SLD of `rho` along `drho`.
pub fn sld(rho: &ComplexMatrix, drho: &ComplexMatrix, support_eps: f64) -> Result<ComplexMatrix> {
    let set = SldSet::new(rho, std::slice::from_ref(drho), Some(support_eps))?;
    set.sld(0)
}

/// SLDs for every derivative of a jet, in the computational basis.
pub fn slds(jet: &StateJet) -> Result<Vec<ComplexMatrix>> {
    SldSet::from_jet(jet)?.slds()
}

/// QFIM of a single state jet.
pub fn qfim_of_jet(jet: &StateJet) -> Result<RealMatrix> {
    Ok(SldSet::from_jet(jet)?.qfim())
}

/// `Tr[ρ (L_a L_b - L_b L_a)]` for SLDs given in the computational basis.
pub fn commutator_trace(rho: &ComplexMatrix, la: &ComplexMatrix, lb: &ComplexMatrix) -> Result<Complex64> {
    let ab = la.matmul(lb)?;
    let ba = lb.matmul(la)?;
    rho.trace_product(&(&ab - &ba))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn commuting_diagonal_case() {
        let rho = ComplexMatrix::from_diag(&[0.3, 0.7]);
        let d = ComplexMatrix::from_diag(&[1.0, -1.0]);
        let l = sld(&rho, &d, 1e-12).unwrap();
        assert!((l[(0, 0)].re - 1.0 / 0.3).abs() < 1e-13);
        assert!((l[(1, 1)].re + 1.0 / 0.7).abs() < 1e-13);
        assert!(l[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn maximally_mixed_gives_twice_the_derivative() {
        let rho = ComplexMatrix::from_diag(&[0.5, 0.5]);
        let d = ComplexMatrix::from_real_rows(&[&[0.0, 0.5], &[0.5, 0.0]]).unwrap();
        let l = sld(&rho, &d, 1e-12).unwrap();
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(l.max_abs_diff(&x).unwrap() < 1e-14);
    }

    #[test]
    fn classical_family_reduces_to_fisher_information() {
        let (q, dq) = (0.2, 0.7);
        let jet = StateJet::new(
            ComplexMatrix::from_diag(&[q, 1.0 - q]),
            vec![ComplexMatrix::from_diag(&[dq, -dq])],
        )
        .unwrap();
        let h = qfim_of_jet(&jet).unwrap();
        assert!((h[(0, 0)] - dq * dq / (q * (1.0 - q))).abs() < 1e-12);
    }

    #[test]
    fn leak_outside_support_is_reported() {
        let rho = ComplexMatrix::from_diag(&[1.0, 0.0]);
        let d = ComplexMatrix::from_diag(&[0.0, 0.1]);
        assert!(matches!(sld(&rho, &d, 1e-10), Err(Error::OutsideSupport { .. })));
    }

    #[test]
    fn pure_state_qfim_is_four_times_variance() {
        // |ψ(t)> = (1, e^{it})/√2, QFIM = 1
        let t: f64 = 0.4;
        let e = c(t.cos(), t.sin());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(h, 0.0), e * h];
        let dpsi = [c(0.0, 0.0), c(0.0, 1.0) * e * h];
        let rho = ComplexMatrix::outer(&psi, &psi).unwrap();
        let drho = &ComplexMatrix::outer(&dpsi, &psi).unwrap() + &ComplexMatrix::outer(&psi, &dpsi).unwrap();
        let jet = StateJet::new(rho, vec![drho]).unwrap();
        assert!((qfim_of_jet(&jet).unwrap()[(0, 0)] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn both_assembly_routes_agree() {
        let rho = ComplexMatrix::from_rows(&[
            vec![c(0.5, 0.0), c(0.1, 0.05), c(0.0, 0.0)],
            vec![c(0.1, -0.05), c(0.3, 0.0), c(0.02, 0.0)],
            vec![c(0.0, 0.0), c(0.02, 0.0), c(0.2, 0.0)],
        ])
        .unwrap();
        let d1 = ComplexMatrix::from_rows(&[
            vec![c(0.1, 0.0), c(0.0, 0.2), c(0.05, 0.0)],
            vec![c(0.0, -0.2), c(-0.05, 0.0), c(0.0, 0.0)],
            vec![c(0.05, 0.0), c(0.0, 0.0), c(-0.05, 0.0)],
        ])
        .unwrap();
        let d2 = ComplexMatrix::from_real_rows(&[&[0.0, 0.1, 0.0], &[0.1, 0.2, -0.1], &[0.0, -0.1, -0.2]]).unwrap();
        let set = SldSet::new(&rho, &[d1, d2], None).unwrap();
        for a in 0..2 {
            assert!(set.residual(a) < 1e-12);
            for b in 0..2 {
                assert!((set.anticommutator_expectation(a, b) - set.double_sum(a, b)).abs() < 1e-12);
            }
        }
        assert_eq!(set.commutator_trace(0, 0), c(0.0, 0.0));
        let ls = set.slds().unwrap();
        let ct = commutator_trace(&rho, &ls[0], &ls[1]).unwrap();
        assert!((ct - set.commutator_trace(0, 1)).norm() < 1e-12);
        assert!(ct.re.abs() < 1e-12);
    }
}
