use serde::Serialize;

use psmet::analysis::{
    covariance_vs_bound, run_replications, CovarianceReport, EstimateSet, Estimated, Likelihood, MleEstimate,
};
use psmet::numerics::RealMatrix;

use crate::config::{LikelihoodConfig, Point, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, Csv, Provenance};
use crate::sweep::evaluate_point;

/// Either a comparison or the reason it could not be formed.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Report(CovarianceReport),
    Unavailable(String),
}

impl Comparison {
    fn against(set: &Result<EstimateSet, String>, info: &RealMatrix, shots: usize) -> Self {
        match set {
            Ok(set) => match covariance_vs_bound(set, info, shots) {
                Ok(r) => Self::Report(r),
                Err(e) => Self::Unavailable(e.to_string()),
            },
            Err(e) => Self::Unavailable(e.clone()),
        }
    }

    pub fn unavailable_reason(&self) -> Option<&str> {
        match self {
            Self::Report(_) => None,
            Self::Unavailable(r) => Some(r),
        }
    }

    fn report(&self) -> Option<&CovarianceReport> {
        match self {
            Self::Report(r) => Some(r),
            Self::Unavailable(_) => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateSummary {
    pub point: Point,
    pub shots: usize,
    pub replications: usize,
    pub likelihood: LikelihoodConfig,
    pub identified: usize,
    pub at_boundary: usize,
    pub mean: Option<[f64; 2]>,
    pub f: RealMatrix,
    /// `F + ℱ`, the information in the full record including the mode counts.
    pub total_information: RealMatrix,
    /// `M Ĉ` against `F^-1`.
    pub vs_classical: Comparison,
    /// `M Ĉ` against `(F + ℱ)^-1`.
    pub vs_total: Comparison,
    /// The bound the chosen estimator is expected to reach: `classical` or `total`.
    pub target: &'static str,
    pub max_relative_diag_gap: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl SimulateSummary {
    pub fn target_comparison(&self) -> &Comparison {
        match self.likelihood {
            LikelihoodConfig::Conditional => &self.vs_classical,
            LikelihoodConfig::Joint => &self.vs_total,
        }
    }
}

pub struct SimulateOutput {
    pub csv: String,
    pub summary: SimulateSummary,
}

fn field(e: Estimated) -> String {
    e.value().map_or_else(|| "nan".into(), fmt_f64)
}

pub fn run(config: &RunConfig) -> Result<SimulateOutput, CliError> {
    let point = config.base_point();
    let scheme = point.scheme()?;
    let truth = point.sensor()?;
    let report = evaluate_point(&point)?;
    let opts = config.mle_options();
    let estimates: Vec<MleEstimate> =
        run_replications(&scheme, &truth, config.shots, config.replications, config.seed, &opts)?;

    let mut csv = Csv::new(&Provenance::of(config), &["replication", "phi_hat", "gamma_hat"]);
    for (i, e) in estimates.iter().enumerate() {
        csv.row([i.to_string(), field(e.phi), field(e.gamma_fluct)]);
    }

    let points: Vec<[f64; 2]> = estimates.iter().filter_map(MleEstimate::point).collect();
    let identified = points.len();
    let at_boundary = estimates
        .iter()
        .filter(|e| matches!(e.phi, Estimated::AtBoundary(_)) || matches!(e.gamma_fluct, Estimated::AtBoundary(_)))
        .count();
    let set = if identified < estimates.len() {
        Err(format!("{} of {} replications were unidentifiable", estimates.len() - identified, estimates.len()))
    } else {
        EstimateSet::from_points(points).map_err(|e| e.to_string())
    };

    let total = report.classical.total()?;
    let vs_classical = Comparison::against(&set, &report.f, config.shots);
    let vs_total = Comparison::against(&set, &total, config.shots);
    let (target, chosen) = match opts.likelihood {
        Likelihood::Conditional => ("classical", &vs_classical),
        Likelihood::Joint => ("total", &vs_total),
    };
    let gap = chosen.report().map(CovarianceReport::max_relative_diag_gap);
    let tolerance = config.tolerances.covariance_rel;

    let summary = SimulateSummary {
        point,
        shots: config.shots,
        replications: config.replications,
        likelihood: config.likelihood,
        identified,
        at_boundary,
        mean: set.as_ref().ok().map(|s| s.mean),
        f: report.f.clone(),
        total_information: total,
        pass: gap.is_some_and(|g| g <= tolerance),
        vs_classical,
        vs_total,
        target,
        max_relative_diag_gap: gap,
        tolerance,
    };
    Ok(SimulateOutput {
        csv: csv.into_string(),
        summary,
    })
}
