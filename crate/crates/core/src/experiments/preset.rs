//! Named reproductions of the four reference figures.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::output::{report_json, trajectory_csv, write_file};
use super::scenario::{analyze, simulate, Report};
use super::{ExperimentError, ScenarioConfig, StateSpec};
use crate::control::{ControlLaw, Sign};
use crate::dynamics::{IntegratorConfig, Trajectory};
use crate::model::{Basis, BellState, ModelParams, NamedState, Paradigm};

/// Field strengths of the geometric scheme, at `J = 1`.
pub const GEOMETRIC_B: [f64; 3] = [0.1, 0.2, 0.4];
/// Feedback gains of the Lyapunov presets.
pub const KAPPAS: [f64; 3] = [0.5, 1.0, 2.0];
/// `η` of the Lyapunov presets.
pub const LYAPUNOV_ETA: f64 = 0.1;
/// Horizon of the Lyapunov presets.
pub const LYAPUNOV_T_MAX: f64 = 300.0;
/// Horizon (and switch-off time) of the geometric preset; past the first peak at `B = 0.1`.
pub const GEOMETRIC_T_MAX: f64 = 200.0;
/// Sampling of the concurrence preset, fine enough to resolve the fast interaction-control rise.
pub const FIGURE4_SAMPLE_EVERY: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    /// Geometric scheme for several field strengths.
    Figure1,
    /// Local control for several gains.
    Figure2,
    /// Interaction control for several gains.
    Figure3,
    /// Concurrence under both paradigms.
    Figure4,
}

impl PresetName {
    pub const ALL: [PresetName; 4] = [
        PresetName::Figure1,
        PresetName::Figure2,
        PresetName::Figure3,
        PresetName::Figure4,
    ];
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            PresetName::Figure1 => 1,
            PresetName::Figure2 => 2,
            PresetName::Figure3 => 3,
            PresetName::Figure4 => 4,
        };
        write!(f, "figure{n}")
    }
}

impl FromStr for PresetName {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.to_string() == s.trim())
            .ok_or_else(|| ExperimentError::invalid("preset", format!("unknown preset `{s}` (expected figure1..figure4)")))
    }
}

fn lyapunov(name: String, paradigm: Paradigm, kappa: f64) -> ScenarioConfig {
    ScenarioConfig {
        name,
        model: ModelParams {
            j: 1.0,
            eta: LYAPUNOV_ETA,
            k: 1.0,
        },
        paradigm,
        law: ControlLaw::Lyapunov { kappa, sign: Sign::Plus },
        initial: StateSpec::Named(NamedState::X(0)),
        target: StateSpec::Named(NamedState::Bell(BellState::PhiPlus)),
        basis: Basis::XProduct,
        integrator: IntegratorConfig::with_horizon(LYAPUNOV_T_MAX),
        ..ScenarioConfig::default()
    }
}

/// Scenarios of a preset; each name doubles as its CSV file stem.
pub fn preset(name: PresetName) -> Vec<ScenarioConfig> {
    let mut runs: Vec<ScenarioConfig> = match name {
        PresetName::Figure1 => GEOMETRIC_B
            .iter()
            .map(|&b| ScenarioConfig {
                name: format!("figure1_B{b}"),
                model: ModelParams { j: 1.0, eta: b, k: 1.0 },
                paradigm: Paradigm::LocalControl,
                law: ControlLaw::Geometric { t0: GEOMETRIC_T_MAX },
                initial: StateSpec::Named(NamedState::Z(0)),
                target: StateSpec::Named(NamedState::Bell(BellState::PhiPlus)),
                basis: Basis::ZProduct,
                integrator: IntegratorConfig::with_horizon(GEOMETRIC_T_MAX),
                ..ScenarioConfig::default()
            })
            .collect(),
        PresetName::Figure2 => KAPPAS
            .iter()
            .map(|&k| lyapunov(format!("figure2_k{k}"), Paradigm::LocalControl, k))
            .collect(),
        PresetName::Figure3 => KAPPAS
            .iter()
            .map(|&k| lyapunov(format!("figure3_k{k}"), Paradigm::InteractionControl, k))
            .collect(),
        PresetName::Figure4 => [Paradigm::LocalControl, Paradigm::InteractionControl]
            .iter()
            .flat_map(|&p| {
                KAPPAS.iter().map(move |&k| {
                    let mut cfg = lyapunov(format!("figure4_{p}_k{k}"), p, k);
                    cfg.integrator.sample_every = FIGURE4_SAMPLE_EVERY;
                    cfg
                })
            })
            .collect(),
    };
    for cfg in &mut runs {
        cfg.outputs.trajectory_csv = Some(format!("{}.csv", cfg.name).into());
    }
    runs
}

#[derive(Debug, Clone, Serialize)]
pub struct PresetReport<'a> {
    pub preset: String,
    pub runs: &'a [Report],
}

#[derive(Debug, Clone)]
pub struct PresetOutcome {
    pub name: PresetName,
    pub scenarios: Vec<ScenarioConfig>,
    /// `None` where the integrator aborted; the matching report holds the diagnostic.
    pub trajectories: Vec<Option<Trajectory<f64>>>,
    pub reports: Vec<Report>,
}

impl PresetOutcome {
    pub fn aborted(&self) -> usize {
        self.reports.iter().filter(|r| !r.is_ok()).count()
    }
}

/// Runs every scenario of the preset in parallel. With `out_dir`, writes one CSV
/// per scenario and a combined `report.json`.
pub fn run_preset(name: PresetName, out_dir: Option<&Path>, seed: Option<u64>) -> Result<PresetOutcome, ExperimentError> {
    let mut scenarios = preset(name);
    for cfg in &mut scenarios {
        cfg.seed = seed;
    }
    let results: Vec<(Option<Trajectory<f64>>, Report)> = scenarios
        .par_iter()
        .map(|cfg| match simulate(cfg).and_then(|t| analyze(cfg, &t).map(|s| (t, s))) {
            Ok((traj, summary)) => (Some(traj), Report::new(cfg, Ok(summary))),
            Err(e) => {
                log::error!("{}: {e}", cfg.name);
                (None, Report::new(cfg, Err(e.to_string())))
            }
        })
        .collect();
    let (trajectories, reports): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    if let Some(dir) = out_dir {
        for (cfg, traj) in scenarios.iter().zip(&trajectories) {
            if let (Some(traj), Some(file)) = (traj, &cfg.outputs.trajectory_csv) {
                write_file(&dir.join(file), &trajectory_csv(traj))?;
            }
        }
        let combined = PresetReport {
            preset: name.to_string(),
            runs: &reports,
        };
        write_file(&dir.join("report.json"), &report_json(&combined))?;
    }
    Ok(PresetOutcome {
        name,
        scenarios,
        trajectories,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_file_names() {
        let names = |p| preset(p).into_iter().map(|c| c.name).collect::<Vec<_>>();
        assert_eq!(names(PresetName::Figure1), ["figure1_B0.1", "figure1_B0.2", "figure1_B0.4"]);
        assert_eq!(names(PresetName::Figure2), ["figure2_k0.5", "figure2_k1", "figure2_k2"]);
        assert_eq!(names(PresetName::Figure3), ["figure3_k0.5", "figure3_k1", "figure3_k2"]);
        assert_eq!(names(PresetName::Figure4).len(), 6);
        assert_eq!(names(PresetName::Figure4)[3], "figure4_interaction_k0.5");
    }

    #[test]
    fn presets_validate() {
        for p in PresetName::ALL {
            for cfg in preset(p) {
                cfg.validate().unwrap();
            }
            assert_eq!(p.to_string().parse::<PresetName>().unwrap(), p);
        }
        assert!("figure5".parse::<PresetName>().is_err());
    }
}
