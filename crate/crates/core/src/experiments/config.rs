//! Flat `key = value` configuration files.
//!
//! ```text
//! # comments run to the end of the line
//! name = local-k1
//! model.J = 1
//! model.eta = 0.1
//! paradigm = local
//! law = lyapunov
//! law.kappa = 1
//! initial = |++>
//! target = basis:Bell; amps = (0,0),(1,0),(0,0),(0,0)
//! integrator.t_max = 300
//! output.trajectory_csv = local.csv
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::ExperimentError;
use crate::control::{ControlLaw, Sign};
use crate::dynamics::IntegratorConfig;
use crate::metrics::{DEFAULT_FLUCTUATION_WINDOW, DEFAULT_THRESHOLD};
use crate::model::{
    hamiltonians, subspace_populations, subspace_reduce, Basis, BellState, ModelError, ModelParams, NamedState,
    Paradigm,
};
use crate::scalar::C;
use crate::state::Ket;

/// Norm tolerance for explicit amplitudes typed into a config file.
pub const CONFIG_NORM_TOL: f64 = 1e-9;

/// Population outside the subspace tolerated for states of a reduced run.
const SUBSPACE_TOL: f64 = 1e-9;

/// A named state or explicit amplitudes tagged with their basis.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Named(NamedState),
    Amplitudes { basis: Basis, amps: Vec<(f64, f64)> },
}

impl StateSpec {
    /// The state in `basis` coordinates.
    pub fn ket(&self, basis: Basis) -> Result<Ket<f64>, String> {
        match self {
            StateSpec::Named(n) => Ok(n.ket(basis)),
            StateSpec::Amplitudes { basis: from, amps } => {
                if amps.len() != 4 {
                    return Err(format!("expected 4 amplitudes, got {}", amps.len()));
                }
                let norm = amps.iter().map(|(re, im)| re * re + im * im).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > CONFIG_NORM_TOL {
                    return Err(format!("amplitudes are not normalized (norm {norm})"));
                }
                let ket = Ket::normalized(amps.iter().map(|&(re, im)| C::new(re, im)).collect())
                    .map_err(|e| e.to_string())?;
                Ok(ket.transformed(&from.change_to(basis)))
            }
        }
    }
}

impl FromStr for StateSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let Some(rest) = s.strip_prefix("basis:") else {
            return NamedState::from_str(s).map(StateSpec::Named).map_err(|e| e.to_string());
        };
        let (basis, amps) = rest
            .split_once(';')
            .ok_or_else(|| "expected `basis:<Z|X|Bell>; amps = (re,im),...`".to_string())?;
        let basis = Basis::from_str(basis).map_err(|e| e.to_string())?;
        let list = amps
            .trim()
            .strip_prefix("amps")
            .and_then(|r| r.trim_start().strip_prefix('='))
            .ok_or_else(|| "expected `amps = (re,im),...` after the basis".to_string())?;
        Ok(StateSpec::Amplitudes {
            basis,
            amps: parse_amplitudes(list)?,
        })
    }
}

fn parse_amplitudes(list: &str) -> Result<Vec<(f64, f64)>, String> {
    let compact: String = list.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = compact
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| format!("malformed amplitude list `{list}`"))?;
    inner
        .split("),(")
        .map(|pair| {
            let (re, im) = pair
                .split_once(',')
                .ok_or_else(|| format!("amplitude `({pair})` needs a real and an imaginary part"))?;
            let num = |x: &str| {
                x.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("`{x}` is not a number"))
            };
            Ok((num(re)?, num(im)?))
        })
        .collect()
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Named(n) => write!(f, "{n}"),
            StateSpec::Amplitudes { basis, amps } => {
                write!(f, "basis:{basis}; amps = ")?;
                for (i, (re, im)) in amps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "({re},{im})")?;
                }
                Ok(())
            }
        }
    }
}

/// Peak-analysis knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub threshold: f64,
    pub fluctuation_window: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            fluctuation_window: DEFAULT_FLUCTUATION_WINDOW,
        }
    }
}

/// Where a run writes its files. Relative paths resolve against `--out` when given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub trajectory_csv: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: ModelParams<f64>,
    pub paradigm: Paradigm,
    pub law: ControlLaw<f64>,
    pub initial: StateSpec,
    pub target: StateSpec,
    /// Coordinates the simulation runs in.
    pub basis: Basis,
    /// Integrate the two-level reduction on `span{|++⟩, |−−⟩}`.
    pub reduced: bool,
    pub integrator: IntegratorConfig<f64>,
    pub analysis: AnalysisConfig,
    pub outputs: Outputs,
    pub seed: Option<u64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            model: ModelParams {
                j: 1.0,
                eta: 0.1,
                k: 1.0,
            },
            paradigm: Paradigm::LocalControl,
            law: ControlLaw::Lyapunov {
                kappa: 1.0,
                sign: Sign::Plus,
            },
            initial: StateSpec::Named(NamedState::X(0)),
            target: StateSpec::Named(NamedState::Bell(BellState::PhiPlus)),
            basis: Basis::XProduct,
            reduced: false,
            integrator: IntegratorConfig::default(),
            analysis: AnalysisConfig::default(),
            outputs: Outputs::default(),
            seed: None,
        }
    }
}

impl ScenarioConfig {
    /// Checks every field, naming the first offending one.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let m = &self.model;
        ModelParams::new(m.j, m.eta, m.k).map_err(|e| match e {
            ModelError::NonPositiveCoupling(_) => ExperimentError::invalid("model.J", e.to_string()),
            ModelError::BadAsymmetry(_) => ExperimentError::invalid("model.k", e.to_string()),
            _ => ExperimentError::invalid("model.eta", e.to_string()),
        })?;
        match self.law {
            ControlLaw::Lyapunov { .. } => self
                .law
                .validate()
                .map_err(|e| ExperimentError::invalid("law.kappa", e.to_string()))?,
            ControlLaw::Geometric { .. } => self
                .law
                .validate()
                .map_err(|e| ExperimentError::invalid("law.t0", e.to_string()))?,
            ControlLaw::None => {}
        }
        let ic = &self.integrator;
        for (field, v) in [
            ("integrator.dt", ic.dt),
            ("integrator.t_max", ic.t_max),
            ("integrator.rel_tol", ic.rel_tol),
            ("integrator.abs_tol", ic.abs_tol),
            ("integrator.sample_every", ic.sample_every),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ExperimentError::invalid(field, format!("must be positive, got {v}")));
            }
        }
        if let Some(v) = ic.v_stop {
            if !(v > 0.0) {
                return Err(ExperimentError::invalid("integrator.v_stop", format!("must be positive, got {v}")));
            }
        }
        if ic.max_steps == 0 {
            return Err(ExperimentError::invalid("integrator.max_steps", "must be positive"));
        }
        let a = &self.analysis;
        if !(a.threshold > 0.0 && a.threshold <= 1.0) {
            return Err(ExperimentError::invalid(
                "analysis.threshold",
                format!("must lie in (0, 1], got {}", a.threshold),
            ));
        }
        if !(a.fluctuation_window > 0.0 && a.fluctuation_window.is_finite()) {
            return Err(ExperimentError::invalid(
                "analysis.window",
                format!("must be positive, got {}", a.fluctuation_window),
            ));
        }
        for (field, spec) in [("initial", &self.initial), ("target", &self.target)] {
            let ket = spec.ket(self.basis).map_err(|msg| ExperimentError::invalid(field, msg))?;
            if self.reduced {
                let (_, p_perp) = subspace_populations(&ket.outer(), self.basis);
                if p_perp.abs() > SUBSPACE_TOL {
                    return Err(ExperimentError::invalid(
                        field,
                        format!("population {p_perp:.3e} outside span{{|++>, |-->}}, but reduced = true"),
                    ));
                }
            }
        }
        if self.reduced {
            subspace_reduce(&hamiltonians(&self.model, self.paradigm, self.basis))
                .map_err(|e| ExperimentError::invalid("reduced", e.to_string()))?;
        }
        Ok(())
    }
}

/// Numeric field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    ModelJ,
    ModelEta,
    /// `B = ηJ`, varied at fixed `J`.
    ModelB,
    ModelK,
    LawKappa,
    LawT0,
    TMax,
    Dt,
    RelTol,
    AbsTol,
    SampleEvery,
}

impl SweepAxis {
    const NAMES: [(&'static str, SweepAxis); 11] = [
        ("model.J", SweepAxis::ModelJ),
        ("model.eta", SweepAxis::ModelEta),
        ("model.B", SweepAxis::ModelB),
        ("model.k", SweepAxis::ModelK),
        ("law.kappa", SweepAxis::LawKappa),
        ("law.t0", SweepAxis::LawT0),
        ("integrator.t_max", SweepAxis::TMax),
        ("integrator.dt", SweepAxis::Dt),
        ("integrator.rel_tol", SweepAxis::RelTol),
        ("integrator.abs_tol", SweepAxis::AbsTol),
        ("integrator.sample_every", SweepAxis::SampleEvery),
    ];

    /// Returns `cfg` with this field set to `value`.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, ExperimentError> {
        let mut out = cfg.clone();
        match self {
            SweepAxis::ModelJ => out.model.j = value,
            SweepAxis::ModelEta => out.model.eta = value,
            SweepAxis::ModelB => out.model.eta = value / out.model.j,
            SweepAxis::ModelK => out.model.k = value,
            SweepAxis::LawKappa => match &mut out.law {
                ControlLaw::Lyapunov { kappa, .. } => *kappa = value,
                _ => return Err(ExperimentError::invalid("sweep.axis", "law.kappa needs law = lyapunov")),
            },
            SweepAxis::LawT0 => match &mut out.law {
                ControlLaw::Geometric { t0 } => *t0 = value,
                _ => return Err(ExperimentError::invalid("sweep.axis", "law.t0 needs law = geometric")),
            },
            SweepAxis::TMax => out.integrator.t_max = value,
            SweepAxis::Dt => out.integrator.dt = value,
            SweepAxis::RelTol => out.integrator.rel_tol = value,
            SweepAxis::AbsTol => out.integrator.abs_tol = value,
            SweepAxis::SampleEvery => out.integrator.sample_every = value,
        }
        Ok(out)
    }
}

impl FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::NAMES
            .iter()
            .find(|(n, _)| *n == s.trim())
            .map(|(_, a)| *a)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::NAMES.iter().map(|(n, _)| *n).collect();
                format!("unknown axis `{s}` (expected one of {})", known.join(", "))
            })
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = Self::NAMES.iter().find(|(_, a)| a == self).map(|(n, _)| *n).unwrap_or("?");
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: ScenarioConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Worker threads.
    pub parallel: usize,
    /// Table of per-value results as CSV.
    pub output: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.base.validate()?;
        if self.values.is_empty() {
            return Err(ExperimentError::invalid("sweep.values", "no values given"));
        }
        if self.parallel == 0 {
            return Err(ExperimentError::invalid("sweep.parallel", "must be at least 1"));
        }
        for &v in &self.values {
            let cfg = self.axis.apply(&self.base, v)?;
            cfg.validate().map_err(|e| ExperimentError::invalid("sweep.values", format!("value {v}: {e}")))?;
        }
        Ok(())
    }
}

/// A parsed file: one scenario, plus sweep settings when `sweep.*` keys are present.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub scenario: ScenarioConfig,
    pub sweep: Option<SweepConfig>,
}

struct Entry {
    line: usize,
    value: String,
}

struct Reader {
    entries: BTreeMap<String, Entry>,
}

impl Reader {
    fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ExperimentError::Syntax {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ExperimentError::Syntax {
                    line,
                    msg: "missing key".into(),
                });
            }
            if value.is_empty() {
                return Err(ExperimentError::Syntax {
                    line,
                    msg: format!("missing value for `{key}`"),
                });
            }
            if let Some(prev) = entries.get(key) {
                return Err(ExperimentError::Syntax {
                    line,
                    msg: format!("`{key}` already set on line {}", prev.line),
                });
            }
            entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|e| e.value)
    }

    fn take_parsed<T>(&mut self, key: &str, parse: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, ExperimentError> {
        self.take(key)
            .map(|v| parse(&v).map_err(|msg| ExperimentError::invalid(key, msg)))
            .transpose()
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>, ExperimentError> {
        self.take_parsed(key, parse_f64)
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.entries.keys().any(|k| k.starts_with(prefix))
    }

    fn finish(self) -> Result<(), ExperimentError> {
        match self.entries.into_iter().next() {
            Some((key, e)) => Err(ExperimentError::Syntax {
                line: e.line,
                msg: format!("unknown key `{key}`"),
            }),
            None => Ok(()),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("expected a number, got `{s}`"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s.to_ascii_lowercase().as_str() {
        "+" | "+1" | "1" | "plus" => Ok(Sign::Plus),
        "-" | "-1" | "minus" => Ok(Sign::Minus),
        _ => Err(format!("expected + or -, got `{s}`")),
    }
}

/// Parses and validates a configuration file.
pub fn parse_document(text: &str) -> Result<ConfigDocument, ExperimentError> {
    let mut r = Reader::parse(text)?;
    let mut cfg = ScenarioConfig::default();

    if let Some(name) = r.take("name") {
        cfg.name = name;
    }
    if let Some(j) = r.take_f64("model.J")? {
        cfg.model.j = j;
    }
    if r.has("model.eta") && r.has("model.B") {
        return Err(ExperimentError::invalid("model.B", "give either model.eta or model.B, not both"));
    }
    if let Some(eta) = r.take_f64("model.eta")? {
        cfg.model.eta = eta;
    }
    if let Some(b) = r.take_f64("model.B")? {
        cfg.model.eta = b / cfg.model.j;
    }
    if let Some(k) = r.take_f64("model.k")? {
        cfg.model.k = k;
    }
    if let Some(p) = r.take_parsed("paradigm", |s| Paradigm::from_str(s).map_err(|e| e.to_string()))? {
        cfg.paradigm = p;
    }

    let law = r.take("law").unwrap_or_else(|| "lyapunov".into());
    let kappa = r.take_f64("law.kappa")?;
    let sign = r.take_parsed("law.sign", parse_sign)?;
    let t0 = r.take_f64("law.t0")?;
    cfg.law = match law.to_ascii_lowercase().as_str() {
        "lyapunov" => {
            if t0.is_some() {
                return Err(ExperimentError::invalid("law.t0", "only meaningful for law = geometric"));
            }
            ControlLaw::Lyapunov {
                kappa: kappa.unwrap_or(1.0),
                sign: sign.unwrap_or(Sign::Plus),
            }
        }
        "geometric" => {
            if kappa.is_some() || sign.is_some() {
                return Err(ExperimentError::invalid(
                    if kappa.is_some() { "law.kappa" } else { "law.sign" },
                    "only meaningful for law = lyapunov",
                ));
            }
            ControlLaw::Geometric {
                t0: t0.ok_or_else(|| ExperimentError::invalid("law.t0", "required for law = geometric"))?,
            }
        }
        "none" => ControlLaw::None,
        other => {
            return Err(ExperimentError::invalid(
                "law",
                format!("unknown law `{other}` (expected lyapunov, geometric or none)"),
            ))
        }
    };

    if let Some(s) = r.take_parsed("initial", StateSpec::from_str)? {
        cfg.initial = s;
    }
    if let Some(s) = r.take_parsed("target", StateSpec::from_str)? {
        cfg.target = s;
    }
    if let Some(b) = r.take_parsed("basis", |s| Basis::from_str(s).map_err(|e| e.to_string()))? {
        cfg.basis = b;
    }
    if let Some(b) = r.take_parsed("reduced", parse_bool)? {
        cfg.reduced = b;
    }

    let ic = &mut cfg.integrator;
    for (key, slot) in [
        ("integrator.dt", &mut ic.dt),
        ("integrator.t_max", &mut ic.t_max),
        ("integrator.rel_tol", &mut ic.rel_tol),
        ("integrator.abs_tol", &mut ic.abs_tol),
        ("integrator.sample_every", &mut ic.sample_every),
    ] {
        if let Some(v) = r.take_f64(key)? {
            *slot = v;
        }
    }
    ic.v_stop = r.take_f64("integrator.v_stop")?.or(ic.v_stop);
    if let Some(n) = r.take_parsed("integrator.max_steps", |s| {
        s.parse::<usize>().map_err(|_| format!("expected a step count, got `{s}`"))
    })? {
        ic.max_steps = n;
    }

    if let Some(v) = r.take_f64("analysis.threshold")? {
        cfg.analysis.threshold = v;
    }
    if let Some(v) = r.take_f64("analysis.window")? {
        cfg.analysis.fluctuation_window = v;
    }
    cfg.outputs.trajectory_csv = r.take("output.trajectory_csv").map(PathBuf::from);
    cfg.outputs.report_json = r.take("output.report_json").map(PathBuf::from);
    cfg.seed = r.take_parsed("seed", |s| s.parse::<u64>().map_err(|_| format!("expected an integer, got `{s}`")))?;

    let sweep = if r.has_prefix("sweep.") {
        let axis = r
            .take_parsed("sweep.axis", SweepAxis::from_str)?
            .ok_or_else(|| ExperimentError::invalid("sweep.axis", "required when sweep.* keys are present"))?;
        let values = r
            .take_parsed("sweep.values", |s| s.split(',').map(|v| parse_f64(v.trim())).collect())?
            .ok_or_else(|| ExperimentError::invalid("sweep.values", "required when sweep.* keys are present"))?;
        let parallel = r
            .take_parsed("sweep.parallel", |s| {
                s.parse::<usize>().map_err(|_| format!("expected a worker count, got `{s}`"))
            })?
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
        Some(SweepConfig {
            base: cfg.clone(),
            axis,
            values,
            parallel,
            output: r.take("sweep.output").map(PathBuf::from),
            report_json: r.take("sweep.report_json").map(PathBuf::from),
        })
    } else {
        None
    };
    r.finish()?;

    match &sweep {
        Some(s) => s.validate()?,
        None => cfg.validate()?,
    }
    Ok(ConfigDocument { scenario: cfg, sweep })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_field(text: &str) -> String {
        match parse_document(text).unwrap_err() {
            ExperimentError::Invalid { field, .. } => field,
            other => panic!("expected a field error, got {other}"),
        }
    }

    #[test]
    fn defaults_from_empty_file() {
        let doc = parse_document("# nothing\n\n").unwrap();
        assert_eq!(doc.scenario, ScenarioConfig::default());
        assert!(doc.sweep.is_none());
    }

    #[test]
    fn full_scenario() {
        let text = "
            name = geo
            model.J = 2
            model.B = 0.4   # eta = 0.2
            paradigm = interaction
            law = geometric
            law.t0 = 12.5
            initial = |00>
            target = PsiMinus
            basis = Bell
            integrator.t_max = 20
            integrator.sample_every = 0.5
            output.trajectory_csv = geo.csv
            seed = 7
        ";
        let cfg = parse_document(text).unwrap().scenario;
        assert_eq!(cfg.name, "geo");
        assert_eq!(cfg.model.j, 2.0);
        assert!((cfg.model.eta - 0.2).abs() < 1e-15);
        assert_eq!(cfg.paradigm, Paradigm::InteractionControl);
        assert_eq!(cfg.law, ControlLaw::Geometric { t0: 12.5 });
        assert_eq!(cfg.initial, StateSpec::Named(NamedState::Z(0)));
        assert_eq!(cfg.target, StateSpec::Named(NamedState::Bell(BellState::PsiMinus)));
        assert_eq!(cfg.basis, Basis::Bell);
        assert_eq!(cfg.integrator.t_max, 20.0);
        assert_eq!(cfg.outputs.trajectory_csv, Some(PathBuf::from("geo.csv")));
        assert_eq!(cfg.seed, Some(7));
    }

    #[test]
    fn explicit_amplitudes() {
        let spec: StateSpec = "basis:X; amps = (0.6,0), (0, 0), (0,0),(0,0.8)".parse().unwrap();
        let ket = spec.ket(Basis::XProduct).unwrap();
        assert!((ket.amplitudes()[3] - C::new(0.0, 0.8)).norm() < 1e-15);
        // Same state expressed in Z coordinates has Z-basis amplitude on |00⟩ of (0.6 + 0.8i)/2.
        let z = spec.ket(Basis::ZProduct).unwrap();
        assert!((z.amplitudes()[0] - C::new(0.3, 0.4)).norm() < 1e-15);
        assert_eq!(spec.to_string().parse::<StateSpec>().unwrap(), spec);
    }

    #[test]
    fn non_normalized_state_names_the_field() {
        let text = "initial = basis:Z; amps = (1,0),(1,0),(0,0),(0,0)";
        assert_eq!(err_field(text), "initial");
        let text = "target = basis:Z; amps = (1,0),(0,0)";
        assert_eq!(err_field(text), "target");
    }

    #[test]
    fn bad_fields_are_named() {
        assert_eq!(err_field("model.J = -1"), "model.J");
        assert_eq!(err_field("model.eta = abc"), "model.eta");
        assert_eq!(err_field("law.kappa = 0"), "law.kappa");
        assert_eq!(err_field("law = geometric"), "law.t0");
        assert_eq!(err_field("law = geometric\nlaw.t0 = -2"), "law.t0");
        assert_eq!(err_field("law = magic"), "law");
        assert_eq!(err_field("paradigm = both"), "paradigm");
        assert_eq!(err_field("integrator.dt = 0"), "integrator.dt");
        assert_eq!(err_field("model.k = 0.5\nreduced = true"), "reduced");
        assert_eq!(err_field("initial = |01>\nreduced = true"), "initial");
        assert_eq!(err_field("sweep.axis = law.t0\nsweep.values = 1"), "sweep.axis");
        assert_eq!(err_field("sweep.axis = law.kappa\nsweep.values = 1, -1"), "sweep.values");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        match parse_document("name = a\njust words\n").unwrap_err() {
            ExperimentError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("{other}"),
        }
        match parse_document("name = a\nname = b\n").unwrap_err() {
            ExperimentError::Syntax { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("line 1"));
            }
            other => panic!("{other}"),
        }
        match parse_document("model.q = 1\n").unwrap_err() {
            ExperimentError::Syntax { msg, .. } => assert!(msg.contains("model.q")),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn sweep_section() {
        let text = "
            law = geometric
            law.t0 = 10
            model.B = 0.4
            sweep.axis = law.t0
            sweep.values = 9.8, 10, 10.2
            sweep.parallel = 3
        ";
        let sweep = parse_document(text).unwrap().sweep.unwrap();
        assert_eq!(sweep.axis, SweepAxis::LawT0);
        assert_eq!(sweep.values, vec![9.8, 10.0, 10.2]);
        assert_eq!(sweep.parallel, 3);
        let cfg = sweep.axis.apply(&sweep.base, 9.8).unwrap();
        assert_eq!(cfg.law, ControlLaw::Geometric { t0: 9.8 });
    }

    #[test]
    fn axis_names_round_trip() {
        for (name, axis) in SweepAxis::NAMES {
            assert_eq!(name.parse::<SweepAxis>().unwrap(), axis);
            assert_eq!(axis.to_string(), name);
        }
    }
}
