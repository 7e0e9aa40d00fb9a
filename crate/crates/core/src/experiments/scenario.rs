use std::path::Path;

use serde::Serialize;

use super::output::{report_json, resolve, trajectory_csv, write_file};
use super::{ExperimentError, ScenarioConfig};
use crate::dynamics::{integrate, invariant_report, IntegratorConfig, InvariantReport, Trajectory};
use crate::metrics::{
    concurrence_deficit, convergence_report, exponential_fit, lasalle_distance, mid_decay_window, peak_of,
    ConvergenceReport, LasalleDistance, LineFit, PeakReport, V_FLOOR,
};
use crate::model::{embed_state, hamiltonians, restrict_subspace, subspace_reduce, Basis, HamiltonianPair, ModelParams};
use crate::state::Density;

/// Hamiltonians and initial states ready for integration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub h: HamiltonianPair<f64>,
    pub rho0: Density<f64>,
    pub rho_d0: Density<f64>,
}

pub fn prepare(cfg: &ScenarioConfig) -> Result<Prepared, ExperimentError> {
    cfg.validate()?;
    let full = hamiltonians(&cfg.model, cfg.paradigm, cfg.basis);
    let state = |field: &str, spec: &super::StateSpec| {
        spec.ket(cfg.basis)
            .map(|k| k.outer())
            .map_err(|msg| ExperimentError::invalid(field, msg))
    };
    let rho0 = state("initial", &cfg.initial)?;
    let rho_d0 = state("target", &cfg.target)?;
    if !cfg.reduced {
        return Ok(Prepared { h: full, rho0, rho_d0 });
    }
    let h = subspace_reduce(&full).map_err(|e| ExperimentError::invalid("reduced", e.to_string()))?;
    let shrink = |rho: &Density<f64>| Density::new_unchecked(restrict_subspace(rho.mat(), cfg.basis));
    Ok(Prepared {
        h,
        rho0: shrink(&rho0),
        rho_d0: shrink(&rho_d0),
    })
}

/// Integrates the scenario and tags the trajectory with its model and seed.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Trajectory<f64>, ExperimentError> {
    let p = prepare(cfg)?;
    let mut traj = integrate(&p.h, &cfg.law, &p.rho0, &p.rho_d0, &cfg.integrator)?.with_model(cfg.model, cfg.paradigm);
    traj.meta.seed = cfg.seed;
    Ok(traj)
}

/// Derived quantities of a finished run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub samples: usize,
    pub t_final: f64,
    pub final_v: f64,
    pub final_f: f64,
    pub final_concurrence: f64,
    pub final_fidelity: f64,
    pub final_purity: f64,
    pub max_abs_f: f64,
    /// Smallest `f_bound − |f|` over the samples (Lyapunov runs only).
    pub min_bound_margin: Option<f64>,
    pub convergence: Option<ConvergenceReport<f64>>,
    pub convergence_window: Option<(f64, f64)>,
    pub convergence_note: Option<String>,
    /// Exponential fit of `1 − C` over its mid-decay window.
    pub concurrence_decay: Option<LineFit<f64>>,
    pub concurrence_window: Option<(f64, f64)>,
    pub peak: PeakReport<f64>,
    /// Distance of the final state from the equator family.
    pub lasalle: Option<LasalleDistance<f64>>,
    pub stalled: bool,
    /// Largest `‖f·H₁‖ / ‖H₀‖`; large values leave the regime the effective model is derived for.
    pub max_control_ratio: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub invariants: InvariantReport<f64>,
}

pub fn analyze(cfg: &ScenarioConfig, traj: &Trajectory<f64>) -> Result<RunSummary, ExperimentError> {
    let last = traj.last();
    let ts = traj.times();
    let vs = traj.values();
    let lyapunov = traj.meta.law.is_lyapunov();

    let (convergence, convergence_window, convergence_note) = if lyapunov {
        let window = mid_decay_window(&ts, &vs).unwrap_or((ts[0], last.t));
        match convergence_report(traj, window) {
            Ok(r) => (Some(r), Some(window), None),
            Err(e) => (None, Some(window), Some(e.to_string())),
        }
    } else {
        (None, None, None)
    };

    let deficit = concurrence_deficit(traj);
    let concurrence_window = mid_decay_window(&ts, &deficit);
    let concurrence_decay = concurrence_window.and_then(|w| exponential_fit(&ts, &deficit, w, V_FLOOR).ok());

    let full = if traj.meta.reduced {
        embed_state(&last.rho, traj.meta.basis)
    } else {
        last.rho.clone()
    };
    let in_x = full.transformed(&traj.meta.basis.change_to(Basis::XProduct));

    let min_bound_margin = lyapunov.then(|| {
        traj.samples
            .iter()
            .map(|s| s.f_bound - s.f.abs())
            .fold(f64::INFINITY, f64::min)
    });

    Ok(RunSummary {
        samples: traj.samples.len(),
        t_final: last.t,
        final_v: last.v,
        final_f: last.f,
        final_concurrence: last.concurrence,
        final_fidelity: last.fidelity,
        final_purity: last.purity,
        max_abs_f: traj.samples.iter().map(|s| s.f.abs()).fold(0.0, f64::max),
        min_bound_margin,
        convergence,
        convergence_window,
        convergence_note,
        concurrence_decay,
        concurrence_window,
        peak: peak_of(
            &ts,
            &traj.concurrences(),
            cfg.analysis.threshold,
            cfg.analysis.fluctuation_window,
        ),
        lasalle: lasalle_distance(&in_x).ok(),
        stalled: traj.meta.stalled,
        max_control_ratio: traj.meta.max_control_ratio,
        steps_accepted: traj.meta.steps_accepted,
        steps_rejected: traj.meta.steps_rejected,
        invariants: invariant_report(traj)?,
    })
}

/// Structured record of one scenario, written as JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    /// `ok` or `aborted`.
    pub status: String,
    pub error: Option<String>,
    pub model: ModelParams<f64>,
    pub paradigm: String,
    pub law: String,
    pub initial: String,
    pub target: String,
    pub basis: String,
    pub reduced: bool,
    pub integrator: IntegratorConfig<f64>,
    pub seed: Option<u64>,
    pub summary: Option<RunSummary>,
}

impl Report {
    pub fn new(cfg: &ScenarioConfig, outcome: Result<RunSummary, String>) -> Self {
        let (status, error, summary) = match outcome {
            Ok(s) => ("ok", None, Some(s)),
            Err(e) => ("aborted", Some(e), None),
        };
        Self {
            name: cfg.name.clone(),
            status: status.into(),
            error,
            model: cfg.model,
            paradigm: cfg.paradigm.to_string(),
            law: cfg.law.to_string(),
            initial: cfg.initial.to_string(),
            target: cfg.target.to_string(),
            basis: cfg.basis.to_string(),
            reduced: cfg.reduced,
            integrator: cfg.integrator,
            seed: cfg.seed,
            summary,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub trajectory: Trajectory<f64>,
    pub report: Report,
}

/// Runs one scenario and writes the files named in its `outputs`.
///
/// On an integrator abort the report (with the diagnostic) is still written
/// before the error is returned.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<ScenarioOutcome, ExperimentError> {
    cfg.validate()?;
    let result = simulate(cfg).and_then(|traj| analyze(cfg, &traj).map(|s| (traj, s)));
    let report_path = cfg.outputs.report_json.as_deref().map(|p| resolve(out_dir, p));
    match result {
        Ok((trajectory, summary)) => {
            let report = Report::new(cfg, Ok(summary));
            if let Some(p) = &cfg.outputs.trajectory_csv {
                write_file(&resolve(out_dir, p), &trajectory_csv(&trajectory))?;
            }
            if let Some(p) = &report_path {
                write_file(p, &report_json(&report))?;
            }
            Ok(ScenarioOutcome { trajectory, report })
        }
        Err(e) => {
            if let (Some(p), ExperimentError::Integrate(_)) = (&report_path, &e) {
                write_file(p, &report_json(&Report::new(cfg, Err(e.to_string()))))?;
            }
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{ControlLaw, Sign};
    use crate::model::{NamedState, Paradigm};

    fn short(law: ControlLaw<f64>) -> ScenarioConfig {
        let mut cfg = ScenarioConfig {
            law,
            ..ScenarioConfig::default()
        };
        cfg.integrator.t_max = 20.0;
        cfg
    }

    #[test]
    fn reduced_and_full_runs_agree() {
        let mut cfg = short(ControlLaw::lyapunov(1.0, Sign::Plus).unwrap());
        cfg.basis = Basis::Bell;
        let full = simulate(&cfg).unwrap();
        cfg.reduced = true;
        let red = simulate(&cfg).unwrap();
        assert_eq!(red.samples[0].rho.dim(), 2);
        assert_eq!(full.samples.len(), red.samples.len());
        for (a, b) in full.samples.iter().zip(&red.samples) {
            assert!((a.v - b.v).abs() < 1e-8);
            assert!((a.concurrence - b.concurrence).abs() < 1e-8);
        }
    }

    #[test]
    fn lyapunov_summary_is_populated() {
        let cfg = short(ControlLaw::lyapunov(2.0, Sign::Plus).unwrap());
        let traj = simulate(&cfg).unwrap();
        let s = analyze(&cfg, &traj).unwrap();
        assert!(s.convergence.unwrap().rate > 0.0);
        assert!(s.min_bound_margin.unwrap() >= 0.0);
        assert!(s.invariants.within_tolerances());
        assert_eq!(s.samples, 201);
    }

    #[test]
    fn geometric_summary_has_no_rate() {
        let mut cfg = short(ControlLaw::geometric(5.0).unwrap());
        cfg.initial = crate::experiments::StateSpec::Named(NamedState::Z(0));
        cfg.paradigm = Paradigm::LocalControl;
        let traj = simulate(&cfg).unwrap();
        assert_eq!(traj.last().t, 5.0);
        let s = analyze(&cfg, &traj).unwrap();
        assert!(s.convergence.is_none() && s.min_bound_margin.is_none());
    }

    #[test]
    fn integrator_abort_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = short(ControlLaw::lyapunov(1.0, Sign::Plus).unwrap());
        cfg.integrator.max_steps = 3;
        cfg.outputs.report_json = Some("r.json".into());
        let err = run_scenario(&cfg, Some(dir.path())).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
        assert!(text.contains("\"aborted\""));
    }
}
