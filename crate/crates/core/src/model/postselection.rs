use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::apparatus::{sensor_sign, MaModel};
use super::sensor::SensorModel;
use crate::fisher::StateJet;
use crate::numerics::{grid_inner, ComplexMatrix, QuadratureGrid};
use crate::{Error, Result};

/// Modes with weight below this carry no conditional state.
pub const DEGENERATE_WEIGHT: f64 = 1e-12;

/// Relative residual norm below which a vector is dropped from the subspace basis.
const SUBSPACE_DROP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeLabel {
    Success,
    Failure(usize),
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Success => write!(f, "success"),
            Self::Failure(0) => write!(f, "failure"),
            Self::Failure(i) => write!(f, "failure_{i}"),
        }
    }
}

/// Postselection of the sensor on `sin(γ/2)|0⟩ + cos(γ/2)|1⟩` (success) or the
/// orthogonal `cos(γ/2)|0⟩ - sin(γ/2)|1⟩` (failure).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostselectionSpec {
    pub gamma_ps: f64,
}

impl PostselectionSpec {
    pub fn new(gamma_ps: f64) -> Result<Self> {
        if !gamma_ps.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gamma_ps",
                value: gamma_ps,
                reason: "must be finite",
            });
        }
        Ok(Self { gamma_ps })
    }

    /// Sensor postselection vectors, one per mode.
    pub fn postselectors(&self) -> Vec<(ModeLabel, [Complex64; 2])> {
        let (s, c) = (self.gamma_ps / 2.0).sin_cos();
        let r = |x: f64| Complex64::new(x, 0.0);
        vec![
            (ModeLabel::Success, [r(s), r(c)]),
            (ModeLabel::Failure(0), [r(c), r(-s)]),
        ]
    }
}

/// Pure components `λ_k |ξ_k⟩⟨ξ_k|` of a conditional pointer state on a grid.
#[derive(Clone, Debug)]
pub struct LowRankComponent {
    pub lambda: f64,
    pub dlambda: Vec<f64>,
    /// Grid amplitudes of `ξ_k` (unnormalized, norm² is the mode constant).
    pub amplitude: Vec<Complex64>,
    pub damplitude: Vec<Vec<Complex64>>,
}

/// Conditional pointer state carried as a short sum of outer products.
#[derive(Clone, Debug)]
pub struct LowRankState {
    pub grid: Arc<QuadratureGrid>,
    pub components: Vec<LowRankComponent>,
}

impl LowRankState {
    pub fn n_params(&self) -> usize {
        self.components.first().map_or(0, |c| c.dlambda.len())
    }

    pub fn trace(&self) -> Result<f64> {
        let mut t = 0.0;
        for c in &self.components {
            t += c.lambda * self.grid.norm_sqr(&c.amplitude)?;
        }
        Ok(t)
    }

    /// Dense `N × N` jet in the coordinates `u_i = √w_i f(p_i)`.
    pub fn to_dense(&self) -> Result<StateJet> {
        let sw: Vec<f64> = self.grid.weights().iter().map(|w| w.sqrt()).collect();
        let to_u = |f: &[Complex64]| -> Vec<Complex64> { f.iter().zip(&sw).map(|(z, s)| z * *s).collect() };
        let n = self.grid.len();
        let d = self.n_params();
        let mut rho = ComplexMatrix::zeros(n);
        let mut drho = vec![ComplexMatrix::zeros(n); d];
        for c in &self.components {
            let u = to_u(&c.amplitude);
            let du: Vec<Vec<Complex64>> = c.damplitude.iter().map(|f| to_u(f)).collect();
            rho = &rho + &ComplexMatrix::outer(&u, &u)?.scale_real(c.lambda);
            for a in 0..d {
                let outer = &ComplexMatrix::outer(&du[a], &u)? + &ComplexMatrix::outer(&u, &du[a])?;
                let term = &ComplexMatrix::outer(&u, &u)?.scale_real(c.dlambda[a]) + &outer.scale_real(c.lambda);
                drho[a] = &drho[a] + &term;
            }
        }
        StateJet::new(rho, drho)
    }

    /// Exact jet restricted to the span of all amplitudes and their
    /// derivatives, in a grid-orthonormal basis of that span.
    pub fn compact_jet(&self) -> Result<StateJet> {
        let mut candidates: Vec<&[Complex64]> = Vec::new();
        for c in &self.components {
            candidates.push(&c.amplitude);
            for d in &c.damplitude {
                candidates.push(d);
            }
        }
        let basis = orthonormal_basis(&self.grid, &candidates)?;
        let r = basis.len();
        let coords = |f: &[Complex64]| -> Result<Vec<Complex64>> {
            basis.iter().map(|e| grid_inner(&self.grid, e, f)).collect()
        };
        let d = self.n_params();
        let mut rho = ComplexMatrix::zeros(r);
        let mut drho = vec![ComplexMatrix::zeros(r); d];
        for c in &self.components {
            let x = coords(&c.amplitude)?;
            let xx = ComplexMatrix::outer(&x, &x)?;
            rho = &rho + &xx.scale_real(c.lambda);
            for a in 0..d {
                let dx = coords(&c.damplitude[a])?;
                let sym = &ComplexMatrix::outer(&dx, &x)? + &ComplexMatrix::outer(&x, &dx)?;
                drho[a] = &(&drho[a] + &xx.scale_real(c.dlambda[a])) + &sym.scale_real(c.lambda);
            }
        }
        StateJet::new(rho, drho)
    }

    /// Momentum outcome probabilities `w_i ρ(p_i, p_i)` and their derivatives.
    pub fn momentum_distribution(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let w = self.grid.weights();
        let n = w.len();
        let d = self.n_params();
        let mut p = vec![0.0; n];
        let mut dp = vec![vec![0.0; n]; d];
        for c in &self.components {
            for i in 0..n {
                let z = c.amplitude[i];
                p[i] += w[i] * c.lambda * z.norm_sqr();
                for a in 0..d {
                    let dz = c.damplitude[a][i];
                    dp[a][i] += w[i] * (c.dlambda[a] * z.norm_sqr() + 2.0 * c.lambda * (z.conj() * dz).re);
                }
            }
        }
        (p, dp)
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
fn orthonormal_basis(grid: &QuadratureGrid, vectors: &[&[Complex64]]) -> Result<Vec<Vec<Complex64>>> {
    let mut scale = 0.0f64;
    for v in vectors {
        scale = scale.max(grid.norm_sqr(v)?.sqrt());
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in vectors {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for e in &basis {
                let ov = grid_inner(grid, e, &r)?;
                for (ri, ei) in r.iter_mut().zip(e) {
                    *ri -= ov * ei;
                }
            }
        }
        let norm = grid.norm_sqr(&r)?.sqrt();
        if norm > SUBSPACE_DROP * scale {
            for z in r.iter_mut() {
                *z /= norm;
            }
            basis.push(r);
        }
    }
    Ok(basis)
}

#[derive(Clone, Debug)]
pub enum ModeState {
    Dense(StateJet),
    LowRank(LowRankState),
}

impl ModeState {
    /// Jet on which SLDs are computed: the dense jet itself or the compact
    /// subspace jet of a low-rank state.
    pub fn fisher_jet(&self) -> Result<StateJet> {
        match self {
            Self::Dense(j) => Ok(j.clone()),
            Self::LowRank(l) => l.compact_jet(),
        }
    }

    pub fn dense(&self) -> Result<StateJet> {
        match self {
            Self::Dense(j) => Ok(j.clone()),
            Self::LowRank(l) => l.to_dense(),
        }
    }

    pub fn trace(&self) -> Result<f64> {
        match self {
            Self::Dense(j) => Ok(j.rho.trace().re),
            Self::LowRank(l) => l.trace(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Mode {
    pub label: ModeLabel,
    pub weight: f64,
    pub dweight: Vec<f64>,
    /// `None` when the mode is degenerate (weight below [`DEGENERATE_WEIGHT`]).
    pub state: Option<ModeState>,
}

impl Mode {
    pub fn is_degenerate(&self) -> bool {
        self.state.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct ModeEnsemble {
    pub modes: Vec<Mode>,
}

impl ModeEnsemble {
    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.weight).sum()
    }

    pub fn mode(&self, label: ModeLabel) -> Option<&Mode> {
        self.modes.iter().find(|m| m.label == label)
    }

    pub fn n_params(&self) -> usize {
        self.modes.first().map_or(0, |m| m.dweight.len())
    }
}

fn condition(op: &ComplexMatrix, psi: &[Complex64; 2], n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 0..2 {
            for t in 0..2 {
                acc += psi[s].conj() * psi[t] * op[(s * n + i, t * n + j)];
            }
        }
        acc
    })
}

fn degenerate(label: ModeLabel, weight: f64, dweight: Vec<f64>) -> Mode {
    log::warn!("mode {label} has weight {weight:e}; conditional state left undefined");
    Mode {
        label,
        weight,
        dweight,
        state: None,
    }
}

/// Conditions a dense joint jet (index `s·N + i`) on each sensor postselector.
pub fn postselect(joint: &StateJet, ps: &PostselectionSpec) -> Result<ModeEnsemble> {
    let dim = joint.dim();
    if dim % 2 != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim + 1,
            got: dim,
        });
    }
    let n = dim / 2;
    let mut modes = Vec::new();
    for (label, psi) in ps.postselectors() {
        let tilde = condition(&joint.rho, &psi, n);
        let dtilde: Vec<ComplexMatrix> = joint.drho.iter().map(|d| condition(d, &psi, n)).collect();
        let weight = tilde.trace().re;
        let dweight: Vec<f64> = dtilde.iter().map(|d| d.trace().re).collect();
        if weight < DEGENERATE_WEIGHT {
            modes.push(degenerate(label, weight, dweight));
            continue;
        }
        let rho = tilde.scale_real(1.0 / weight);
        let drho = dtilde
            .iter()
            .zip(&dweight)
            .map(|(d, dw)| (d - &rho.scale_real(*dw)).scale_real(1.0 / weight))
            .collect();
        modes.push(Mode {
            label,
            weight,
            dweight,
            state: Some(ModeState::Dense(StateJet::new(rho, drho)?)),
        });
    }
    Ok(ModeEnsemble { modes })
}

/// Postselection of a grid pointer carried through the sensor eigen-decomposition.
///
/// Each sensor eigenvector `ψ_k` maps to the pointer amplitude
/// `η_k(p) = Σ_s conj(ψf_s) e^{-i g p s} ψ_{k,s} ξ(p)`, so the conditional state is
/// `Σ_k λ_k η_k η_k† / w`.
pub fn postselect_low_rank(sensor: &SensorModel, ma: &MaModel, ps: &PostselectionSpec) -> Result<ModeEnsemble> {
    let grid = ma
        .grid()
        .ok_or_else(|| Error::Unsupported("low-rank postselection needs a grid apparatus".into()))?
        .clone();
    let xi = ma.initial_amplitudes()?;
    let phases = [ma.interaction_phases(sensor_sign(0)), ma.interaction_phases(sensor_sign(1))];
    let pairs = sensor.eigenpairs();
    let n = grid.len();
    let d = 2;

    let mut modes = Vec::new();
    for (label, psi_f) in ps.postselectors() {
        let filter: Vec<[Complex64; 2]> = (0..n)
            .map(|i| [psi_f[0].conj() * phases[0][i] * xi[i], psi_f[1].conj() * phases[1][i] * xi[i]])
            .collect();
        let mut raw = Vec::with_capacity(2);
        for pair in &pairs {
            let eta: Vec<Complex64> = filter
                .iter()
                .map(|f| f[0] * pair.vector[0] + f[1] * pair.vector[1])
                .collect();
            let deta: Vec<Vec<Complex64>> = (0..d)
                .map(|a| {
                    filter
                        .iter()
                        .map(|f| f[0] * pair.dvector[a][0] + f[1] * pair.dvector[a][1])
                        .collect()
                })
                .collect();
            raw.push((pair, eta, deta));
        }

        let mut weight = 0.0;
        let mut dweight = vec![0.0; d];
        for (pair, eta, deta) in &raw {
            let nrm = grid.norm_sqr(eta)?;
            weight += pair.value * nrm;
            for a in 0..d {
                dweight[a] += pair.dvalue[a] * nrm + 2.0 * pair.value * grid_inner(&grid, eta, &deta[a])?.re;
            }
        }
        if weight < DEGENERATE_WEIGHT {
            modes.push(degenerate(label, weight, dweight));
            continue;
        }

        let sw = weight.sqrt();
        let components = raw
            .into_iter()
            .map(|(pair, eta, deta)| {
                let damplitude = (0..d)
                    .map(|a| {
                        eta.iter()
                            .zip(&deta[a])
                            .map(|(e, de)| de / sw - e * (0.5 * dweight[a] / (weight * sw)))
                            .collect()
                    })
                    .collect();
                LowRankComponent {
                    lambda: pair.value,
                    dlambda: pair.dvalue.to_vec(),
                    amplitude: eta.iter().map(|e| e / sw).collect(),
                    damplitude,
                }
            })
            .collect();
        modes.push(Mode {
            label,
            weight,
            dweight,
            state: Some(ModeState::LowRank(LowRankState {
                grid: grid.clone(),
                components,
            })),
        });
    }
    Ok(ModeEnsemble { modes })
}
