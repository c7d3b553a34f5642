use crate::fisher::{pcfim, pqfim, qfim, FisherReport};
use crate::model::{Scheme, SensorFamily, SensorModel, PARAM_NAMES};
use crate::Result;

use super::tradeoff::tradeoffs;

/// `H`, `Q`, `F` and both tradeoffs of `scheme` at one sensor point.
pub fn evaluate(scheme: &Scheme, sensor: &SensorModel) -> Result<FisherReport> {
    let h = qfim(&SensorFamily, &sensor.point())?;
    let ensemble = scheme.ensemble(sensor)?;
    let (q, quantum_modes) = pqfim(&ensemble)?;
    let classical = pcfim(&ensemble, &scheme.povm())?;
    let t = tradeoffs(&classical.f, &q, &h)?;
    Ok(FisherReport {
        params: PARAM_NAMES.to_vec(),
        h,
        q,
        f: classical.f.clone(),
        quantum_modes,
        classical,
        tradeoff_classical: t.classical,
        tradeoff_quantum: t.quantum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{qubit_q, qubit_tradeoffs, sensor_h};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    #[test]
    fn qubit_report_matches_closed_form() {
        let scheme = Scheme::qubit(FRAC_PI_3, FRAC_PI_2, 0.8).unwrap();
        let sensor = SensorModel::new(1e-6, 0.3).unwrap();
        let r = evaluate(&scheme, &sensor).unwrap();
        assert!(r.h.max_abs_diff(&sensor_h(0.3)).unwrap() < 1e-10);
        assert!(r.q.max_abs_diff(&qubit_q(FRAC_PI_3, 0.3)).unwrap() < 1e-8);
        let (tq, tc) = qubit_tradeoffs(FRAC_PI_3, 0.3);
        assert!((r.tradeoff_quantum - tq).abs() < 1e-8);
        assert!((r.tradeoff_classical - tc).abs() < 1e-8);
        assert!((r.success_weight() - 0.5 * (1.0 - 0.5 * (-0.09f64).exp())).abs() < 1e-12);
    }
}
