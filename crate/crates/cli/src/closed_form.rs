use rayon::prelude::*;
use serde::Serialize;

use psmet::closed_form::{
    gaussian_mode_geometry, gaussian_q, gaussian_tradeoff_quantum, gaussian_w, qubit_commutator_traces,
    qubit_conditional_matrices, qubit_q, qubit_tradeoffs, qubit_w, sensor_h, CommutatorReading, Domain, Flagged,
    GaussianModeGeometry, GaussianParams, ModeMatrices, QubitParams,
};
use psmet::model::ModeLabel;
use psmet::numerics::{ComplexMatrix, RealMatrix};

use crate::config::{Point, RunConfig};
use crate::error::CliError;

/// Rows of `[re, im]` pairs.
type JsonMatrix = Vec<Vec<[f64; 2]>>;

fn json_matrix(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.dim()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct JsonModeMatrices {
    pub label: ModeLabel,
    pub rho: JsonMatrix,
    pub drho_phi: JsonMatrix,
    pub drho_gamma: JsonMatrix,
    pub l_phi: JsonMatrix,
    pub l_gamma: Option<JsonMatrix>,
}

impl From<&ModeMatrices> for JsonModeMatrices {
    fn from(m: &ModeMatrices) -> Self {
        Self {
            label: m.label,
            rho: json_matrix(&m.rho),
            drho_phi: json_matrix(&m.drho[0]),
            drho_gamma: json_matrix(&m.drho[1]),
            l_phi: json_matrix(&m.l_phi),
            l_gamma: m.l_gamma.as_ref().map(json_matrix),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "pointer", rename_all = "lowercase")]
pub enum PointValues {
    Qubit {
        point: Point,
        sensor_h: RealMatrix,
        w_success: f64,
        w_failure: f64,
        q: Flagged<RealMatrix>,
        tradeoff_quantum: Flagged<f64>,
        tradeoff_classical: Flagged<f64>,
        commutator_sin_gamma: Flagged<[[f64; 2]; 2]>,
        commutator_sin_theta: Flagged<[[f64; 2]; 2]>,
        success: JsonModeMatrices,
        failure: JsonModeMatrices,
    },
    Gaussian {
        point: Point,
        sensor_h: RealMatrix,
        w_success: f64,
        w_failure: f64,
        q: Flagged<RealMatrix>,
        tradeoff_quantum: Flagged<f64>,
        geometry: Flagged<GaussianModeGeometry>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormReport {
    /// Every formula assumes the full-strength coupling; values are still evaluated otherwise.
    pub full_coupling: bool,
    pub points: Vec<PointValues>,
}

fn flag<T>(value: T, domain: Domain, p: &Point) -> Flagged<T> {
    Flagged::new(value, domain, p.gamma_ps, p.phi)
}

fn point_values(p: &Point) -> Result<PointValues, CliError> {
    let h = sensor_h(p.gamma_fluct);
    if let (Some(theta), Some(theta_meas)) = (p.theta, p.theta_meas) {
        let params = QubitParams::new(theta, p.gamma_fluct, p.gamma_ps, p.phi, theta_meas)?;
        let (tq, tc) = qubit_tradeoffs(theta, p.gamma_fluct);
        let pairs = |reading| {
            let t = qubit_commutator_traces(&params, reading);
            Flagged {
                value: t.value.map(|z| [z.re, z.im]),
                domain: t.domain,
                in_domain: t.in_domain,
            }
        };
        let m = qubit_conditional_matrices(&params);
        return Ok(PointValues::Qubit {
            point: *p,
            sensor_h: h,
            w_success: qubit_w(&params, ModeLabel::Success),
            w_failure: qubit_w(&params, ModeLabel::Failure(0)),
            q: flag(qubit_q(theta, p.gamma_fluct), Domain::BalancedSmallPhase, p),
            tradeoff_quantum: flag(tq, Domain::BalancedSmallPhase, p),
            tradeoff_classical: flag(tc, Domain::BalancedSmallPhase, p),
            commutator_sin_gamma: pairs(CommutatorReading::SinGamma),
            commutator_sin_theta: pairs(CommutatorReading::SinTheta),
            success: (&m.success).into(),
            failure: (&m.failure).into(),
        });
    }
    let sigma = p.sigma.expect("gaussian point");
    let params = GaussianParams::new(sigma, p.gamma_fluct, p.gamma_ps, p.phi)?;
    Ok(PointValues::Gaussian {
        point: *p,
        sensor_h: h,
        w_success: gaussian_w(&params, ModeLabel::Success)?,
        w_failure: gaussian_w(&params, ModeLabel::Failure(0))?,
        q: flag(gaussian_q(p.gamma_fluct, sigma)?, Domain::BalancedSmallPhase, p),
        tradeoff_quantum: flag(gaussian_tradeoff_quantum(p.gamma_fluct, sigma)?, Domain::BalancedSmallPhase, p),
        geometry: gaussian_mode_geometry(&params)?,
    })
}

pub fn run(config: &RunConfig) -> Result<ClosedFormReport, CliError> {
    let pts = config.points();
    let points = pts.par_iter().map(|(_, p)| point_values(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(ClosedFormReport {
        full_coupling: pts
            .iter()
            .all(|(_, p)| (p.coupling - std::f64::consts::FRAC_PI_2).abs() <= 1e-12),
        points,
    })
}
