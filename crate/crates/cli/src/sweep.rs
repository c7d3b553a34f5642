use rayon::prelude::*;

use psmet::analysis::evaluate;
use psmet::fisher::FisherReport;

use crate::config::{Point, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, Csv, Provenance};

pub const COLUMNS: [&str; 11] = [
    "w_success",
    "Q_pp",
    "Q_GG",
    "H_pp",
    "H_GG",
    "F_pp",
    "F_GG",
    "tradeoff_quantum",
    "tradeoff_classical",
    "commutator_trace_abs_success",
    "commutator_trace_abs_failure",
];

pub fn evaluate_point(point: &Point) -> Result<FisherReport, CliError> {
    Ok(evaluate(&point.scheme()?, &point.sensor()?)?)
}

pub fn row_values(r: &FisherReport) -> [f64; 11] {
    let commutator = |i: usize| r.quantum_modes.get(i).map_or(0.0, |m| m.commutator_trace.norm());
    [
        r.success_weight(),
        r.q[(0, 0)],
        r.q[(1, 1)],
        r.h[(0, 0)],
        r.h[(1, 1)],
        r.f[(0, 0)],
        r.f[(1, 1)],
        r.tradeoff_quantum,
        r.tradeoff_classical,
        commutator(0),
        commutator(1),
    ]
}

pub fn run(config: &RunConfig) -> Result<String, CliError> {
    let points = config.points();
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|(coords, point)| {
            let report = evaluate_point(point)?;
            let mut row = coords.clone();
            row.extend(row_values(&report));
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;

    let mut header: Vec<&str> = config.axes.iter().map(|a| a.name.as_str()).collect();
    header.extend(&COLUMNS);
    let mut csv = Csv::new(&Provenance::of(config), &header);
    for row in rows {
        csv.row(row.into_iter().map(fmt_f64));
    }
    Ok(csv.into_string())
}
