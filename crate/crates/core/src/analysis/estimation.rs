use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::Serialize;

use num_complex::Complex64;

use crate::model::{EffectiveOutcome, EffectivePovm, ModeLabel, Scheme, SensorModel, CLIP_TOL};
use crate::{Error, Result};

/// Search box for `gamma_fluct`.
pub const GAMMA_MIN: f64 = 1e-3;
pub const GAMMA_MAX: f64 = 2.0;

/// One shot: the postselection mode and the pointer outcome within it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Record {
    pub mode: usize,
    pub outcome: usize,
}

/// Simulated data set.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub scheme: Scheme,
    pub truth: SensorModel,
    pub shots: usize,
    pub seed: u64,
    pub labels: Vec<ModeLabel>,
    pub records: Vec<Record>,
}

impl Experiment {
    /// Counts per (mode, outcome), flattened mode-major like [`EffectivePovm::probabilities`].
    pub fn counts(&self, povm: &EffectivePovm) -> Vec<u64> {
        let offsets: Vec<usize> = (0..povm.modes.len()).map(|m| povm.mode_range(m).start).collect();
        let mut counts = vec![0u64; povm.n_outcomes()];
        for r in &self.records {
            counts[offsets[r.mode] + r.outcome] += 1;
        }
        counts
    }

    pub fn mode_fraction(&self, mode: usize) -> f64 {
        self.records.iter().filter(|r| r.mode == mode).count() as f64 / self.records.len() as f64
    }
}

fn clip_probabilities(probs: &mut [f64]) -> Result<()> {
    for p in probs.iter_mut() {
        if *p < -CLIP_TOL {
            return Err(Error::NegativeProbability(*p));
        }
        *p = p.max(0.0);
    }
    Ok(())
}

/// Draws `shots` i.i.d. records: a mode from the weights, then an outcome
/// from the conditional distribution of that mode.
pub fn sample_experiment(scheme: &Scheme, truth: &SensorModel, shots: usize, seed: u64) -> Result<Experiment> {
    if shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            value: 0.0,
            reason: "need at least one shot",
        });
    }
    let povm = scheme.effective_povm()?;
    let mut joint = povm.probabilities(truth);
    clip_probabilities(&mut joint)?;

    let mut weights = Vec::new();
    let mut conditionals = Vec::new();
    let mut alive = Vec::new();
    for m in 0..povm.modes.len() {
        let slice = &joint[povm.mode_range(m)];
        let w: f64 = slice.iter().sum();
        weights.push(w);
        if w > 0.0 {
            let dist = WeightedIndex::new(slice).map_err(|e| Error::InvalidPovm(e.to_string()))?;
            conditionals.push(Some(dist));
            alive.push(m);
        } else {
            conditionals.push(None);
        }
    }
    let mode_dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidPovm(e.to_string()))?;

    let mut rng = Pcg64::seed_from_u64(seed);
    let records = (0..shots)
        .map(|_| {
            let mode = mode_dist.sample(&mut rng);
            let outcome = conditionals[mode].as_ref().expect("sampled a zero-weight mode").sample(&mut rng);
            Record { mode, outcome }
        })
        .collect();
    Ok(Experiment {
        scheme: scheme.clone(),
        truth: *truth,
        shots,
        seed,
        labels: povm.modes.iter().map(|m| m.label).collect(),
        records,
    })
}

/// An estimated coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Estimated {
    Value(f64),
    /// Maximizer sits on the edge of the search box.
    AtBoundary(f64),
    /// The likelihood does not depend on this parameter.
    Unidentifiable,
}

impl Estimated {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Self::Value(v) | Self::AtBoundary(v) => Some(v),
            Self::Unidentifiable => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MleEstimate {
    pub phi: Estimated,
    pub gamma_fluct: Estimated,
    pub log_likelihood: f64,
    pub iterations: usize,
}

impl MleEstimate {
    pub fn point(&self) -> Option<[f64; 2]> {
        Some([self.phi.value()?, self.gamma_fluct.value()?])
    }
}

/// Which likelihood the estimator maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Likelihood {
    /// `Σ log[w^△ P(k|△)]` over mode and outcome.
    Joint,
    /// `Σ log P(k|△)`, treating the mode counts as given.
    Conditional,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MleOptions {
    pub likelihood: Likelihood,
    /// Coarse grid resolution per axis.
    pub grid: usize,
    /// Relative convergence tolerance of the simplex refinement.
    pub rel_tol: f64,
    pub max_iter: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            likelihood: Likelihood::Joint,
            grid: 64,
            rel_tol: 1e-8,
            max_iter: 2000,
            gamma_min: GAMMA_MIN,
            gamma_max: GAMMA_MAX,
        }
    }
}

/// Relative spread below which the likelihood counts as flat.
const FLAT_REL: f64 = 1e-9;
/// Distance from a box edge reported as a boundary estimate.
const BOUNDARY_ABS: f64 = 1e-6;

fn wrap_phase(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

pub fn mle(experiment: &Experiment) -> Result<MleEstimate> {
    mle_with(experiment, &MleOptions::default())
}

/// Maximum-likelihood `(phi, gamma_fluct)` from the full records.
pub fn mle_with(experiment: &Experiment, opts: &MleOptions) -> Result<MleEstimate> {
    if experiment.records.is_empty() {
        return Err(Error::EmptyExperiment);
    }
    let povm = experiment.scheme.effective_povm()?;
    let counts = experiment.counts(&povm);
    let terms: Vec<(f64, EffectiveOutcome)> = povm
        .modes
        .iter()
        .flat_map(|m| m.outcomes.iter().copied())
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(o, &n)| (n as f64, o))
        .collect();
    // per mode: (shots in the mode, summed outcome giving the mode weight)
    let mode_terms: Vec<(f64, EffectiveOutcome)> = (0..povm.modes.len())
        .map(|m| {
            let range = povm.mode_range(m);
            let n = counts[range].iter().sum::<u64>() as f64;
            let sum = povm.modes[m].outcomes.iter().fold(
                EffectiveOutcome {
                    a: 0.0,
                    b: Complex64::new(0.0, 0.0),
                },
                |acc, o| EffectiveOutcome {
                    a: acc.a + o.a,
                    b: acc.b + o.b,
                },
            );
            (n, sum)
        })
        .filter(|(n, _)| *n > 0.0)
        .collect();
    let conditional = opts.likelihood == Likelihood::Conditional;
    let (g_lo, g_hi) = (opts.gamma_min, opts.gamma_max);
    let loglik = |phi: f64, gamma: f64| -> f64 {
        let c = SensorModel {
            phi,
            gamma_fluct: gamma,
        }
        .coherence();
        let mut acc = 0.0;
        for (n, o) in &terms {
            let p = o.probability(c);
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += n * p.ln();
        }
        if conditional {
            for (n, o) in &mode_terms {
                acc -= n * o.probability(c).ln();
            }
        }
        acc
    };

    let n = opts.grid.max(2);
    let phis: Vec<f64> = (0..n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect();
    let gammas: Vec<f64> = (0..n).map(|j| g_lo + (g_hi - g_lo) * j as f64 / (n - 1) as f64).collect();
    let table: Vec<Vec<f64>> = phis.iter().map(|&p| gammas.iter().map(|&g| loglik(p, g)).collect()).collect();
    let (mut bi, mut bj) = (0, 0);
    for i in 0..n {
        for j in 0..n {
            if table[i][j] > table[bi][bj] {
                (bi, bj) = (i, j);
            }
        }
    }

    let clamp = |x: [f64; 2]| [wrap_phase(x[0]), x[1].clamp(g_lo, g_hi)];
    let objective = |x: [f64; 2]| {
        let [p, g] = clamp(x);
        -loglik(p, g)
    };
    let steps = [2.0 * PI / n as f64, (g_hi - g_lo) / (n - 1) as f64];
    let (best, value, iterations) = nelder_mead(objective, [phis[bi], gammas[bj]], steps, opts.rel_tol, opts.max_iter);
    let [phi, gamma] = clamp(best);
    let log_likelihood = -value;

    let scale = log_likelihood.abs().max(1.0);
    let spread = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        hi - lo
    };
    let phi_flat = spread(&mut phis.iter().map(|&p| loglik(p, gamma))) <= FLAT_REL * scale;
    let gamma_flat = spread(&mut gammas.iter().map(|&g| loglik(phi, g))) <= FLAT_REL * scale;

    let phi_est = if phi_flat { Estimated::Unidentifiable } else { Estimated::Value(phi) };
    let gamma_est = if gamma_flat {
        Estimated::Unidentifiable
    } else if gamma - g_lo <= BOUNDARY_ABS || g_hi - gamma <= BOUNDARY_ABS {
        Estimated::AtBoundary(gamma)
    } else {
        Estimated::Value(gamma)
    };
    Ok(MleEstimate {
        phi: phi_est,
        gamma_fluct: gamma_est,
        log_likelihood,
        iterations,
    })
}

/// Nelder-Mead minimizer on the plane; returns (argmin, min, iterations).
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, x0: [f64; 2], step: [f64; 2], rel_tol: f64, max_iter: usize) -> ([f64; 2], f64, usize) {
    let mut simplex = [x0, [x0[0] + step[0], x0[1]], [x0[0], x0[1] + step[1]]];
    let mut values = simplex.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let mut iter = 0;
    while iter < max_iter {
        iter += 1;
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);

        let spread = (values[2] - values[0]).abs();
        let size = (1..3)
            .map(|k| (simplex[k][0] - simplex[0][0]).abs().max((simplex[k][1] - simplex[0][1]).abs()))
            .fold(0.0, f64::max);
        let xscale = simplex[0][0].abs().max(simplex[0][1].abs()).max(1.0);
        if spread <= rel_tol * values[0].abs().max(1.0) && size <= rel_tol * xscale {
            break;
        }

        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(centroid, simplex[2], -1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = lerp(centroid, simplex[2], -2.0);
            let fe = f(expanded);
            if fe < fr {
                (simplex[2], values[2]) = (expanded, fe);
            } else {
                (simplex[2], values[2]) = (reflected, fr);
            }
        } else if fr < values[1] {
            (simplex[2], values[2]) = (reflected, fr);
        } else {
            let (toward, fref) = if fr < values[2] { (reflected, fr) } else { (simplex[2], values[2]) };
            let contracted = lerp(centroid, toward, 0.5);
            let fc = f(contracted);
            if fc < fref {
                (simplex[2], values[2]) = (contracted, fc);
            } else {
                for k in 1..3 {
                    simplex[k] = lerp(simplex[0], simplex[k], 0.5);
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    (simplex[best], values[best], iter)
}

/// Sub-seed of replication `index`, a SplitMix64 step on the pair.
pub fn replication_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `replications` independent experiments and their MLEs, in index order.
pub fn run_replications(
    scheme: &Scheme,
    truth: &SensorModel,
    shots: usize,
    replications: usize,
    seed: u64,
    opts: &MleOptions,
) -> Result<Vec<MleEstimate>> {
    (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let exp = sample_experiment(scheme, truth, shots, replication_seed(seed, r))?;
            mle_with(&exp, opts)
        })
        .collect()
}
