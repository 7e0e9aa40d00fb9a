use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::output::{report_json, resolve, sweep_csv, write_file};
use super::scenario::{analyze, simulate};
use super::{ExperimentError, SweepConfig};

/// Outcome for one axis value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub final_concurrence: Option<f64>,
    pub final_v: Option<f64>,
    pub t_first: Option<f64>,
    pub rate: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axis: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

fn run_row(cfg: &SweepConfig, index: usize, value: f64) -> SweepRow {
    let mut row = SweepRow {
        index,
        value,
        final_concurrence: None,
        final_v: None,
        t_first: None,
        rate: None,
        error: None,
    };
    let result = cfg.axis.apply(&cfg.base, value).and_then(|scenario| {
        let traj = simulate(&scenario)?;
        analyze(&scenario, &traj)
    });
    match result {
        Ok(s) => {
            row.final_concurrence = Some(s.final_concurrence);
            row.final_v = Some(s.final_v);
            row.t_first = s.peak.t_first;
            row.rate = s.convergence.map(|c| c.rate);
        }
        Err(e) => {
            log::warn!("sweep value {value}: {e}");
            row.error = Some(e.to_string());
        }
    }
    row
}

/// Runs every axis value on a pool of `cfg.parallel` workers.
///
/// Rows come back in input order whatever the worker count; a failing row is
/// recorded and the sweep carries on.
pub fn run_sweep(cfg: &SweepConfig, out_dir: Option<&Path>) -> Result<SweepTable, ExperimentError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallel)
        .build()
        .map_err(|e| ExperimentError::invalid("sweep.parallel", e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        cfg.values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| run_row(cfg, i, v))
            .collect()
    });
    let table = SweepTable {
        axis: cfg.axis.to_string(),
        rows,
    };
    if let Some(p) = &cfg.output {
        write_file(&resolve(out_dir, p), &sweep_csv(&table))?;
    }
    if let Some(p) = &cfg.report_json {
        write_file(&resolve(out_dir, p), &report_json(&table))?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::parse_document;

    #[test]
    fn worker_count_does_not_change_results() {
        let text = "
            law = geometric
            law.t0 = 4
            model.B = 0.4
            initial = |00>
            integrator.t_max = 4
            sweep.axis = law.t0
            sweep.values = 3.5, 3.9, 4.0, 2.0
        ";
        let mut cfg = parse_document(text).unwrap().sweep.unwrap();
        cfg.parallel = 1;
        let serial = run_sweep(&cfg, None).unwrap();
        cfg.parallel = 4;
        let parallel = run_sweep(&cfg, None).unwrap();
        assert_eq!(serial, parallel);
        let values: Vec<f64> = parallel.rows.iter().map(|r| r.value).collect();
        assert_eq!(values, vec![3.5, 3.9, 4.0, 2.0]);
    }

    #[test]
    fn failing_row_does_not_stop_the_sweep() {
        let text = "
            integrator.t_max = 2
            sweep.axis = integrator.max_steps_placeholder
        ";
        assert!(parse_document(text).is_err());

        let text = "
            integrator.t_max = 2
            integrator.rel_tol = 1e-300
            integrator.max_steps = 100000
            sweep.axis = integrator.abs_tol
            sweep.values = 1e-8, 1e-300
            sweep.parallel = 2
        ";
        let cfg = parse_document(text).unwrap().sweep.unwrap();
        let table = run_sweep(&cfg, None).unwrap();
        assert!(table.rows[0].error.is_none());
        assert!(table.rows[1].error.is_some(), "{:?}", table.rows[1]);
        assert_eq!(table.failures(), 1);
    }
}
