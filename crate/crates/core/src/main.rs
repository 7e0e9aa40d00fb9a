use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use entangle::experiments::{
    parse_document, report_json, run_preset, run_scenario, run_sweep, ConfigDocument, ExperimentError, PresetName,
};

#[derive(Parser)]
#[command(name = "bellctl", version, about = "Simulate Bell-state preparation between two distant atoms")]
struct Cli {
    /// Recorded in the run metadata; the dynamics themselves are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        config: PathBuf,
        /// Directory for relative output paths.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep (`sweep.*` keys).
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override `sweep.parallel`.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Reproduce one of the reference figures.
    Preset {
        name: Preset,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Parse and check a config file without running it.
    Validate { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Figure1,
    Figure2,
    Figure3,
    Figure4,
}

impl From<Preset> for PresetName {
    fn from(p: Preset) -> Self {
        match p {
            Preset::Figure1 => PresetName::Figure1,
            Preset::Figure2 => PresetName::Figure2,
            Preset::Figure3 => PresetName::Figure3,
            Preset::Figure4 => PresetName::Figure4,
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ConfigDocument, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut doc = parse_document(&text)?;
    if seed.is_some() {
        doc.scenario.seed = seed;
        if let Some(s) = &mut doc.sweep {
            s.base.seed = seed;
        }
    }
    Ok(doc)
}

fn execute(cli: Cli) -> Result<u8, ExperimentError> {
    match cli.command {
        Command::Run { config, out } => {
            let doc = load(&config, cli.seed)?;
            let cfg = doc.scenario;
            let outcome = run_scenario(&cfg, out.as_deref())?;
            if cfg.outputs.report_json.is_none() {
                print!("{}", report_json(&outcome.report));
            }
            Ok(0)
        }
        Command::Sweep { config, out, parallel } => {
            let doc = load(&config, cli.seed)?;
            let mut sweep = doc
                .sweep
                .ok_or_else(|| ExperimentError::Invalid {
                    field: "sweep.axis".into(),
                    msg: "config has no sweep section".into(),
                })?;
            if let Some(n) = parallel {
                sweep.parallel = n;
            }
            let table = run_sweep(&sweep, out.as_deref())?;
            if sweep.output.is_none() && sweep.report_json.is_none() {
                print!("{}", report_json(&table));
            }
            let failed = table.failures();
            if failed > 0 {
                eprintln!("{failed} of {} sweep values failed", table.rows.len());
                return Ok(3);
            }
            Ok(0)
        }
        Command::Preset { name, out } => {
            let outcome = run_preset(name.into(), Some(&out), cli.seed)?;
            for r in &outcome.reports {
                match &r.error {
                    None => eprintln!("{}: ok", r.name),
                    Some(e) => eprintln!("{}: aborted: {e}", r.name),
                }
            }
            Ok(if outcome.aborted() > 0 { 3 } else { 0 })
        }
        Command::Validate { config } => {
            let doc = load(&config, cli.seed)?;
            match &doc.sweep {
                Some(s) => println!("ok: sweep over {} with {} values", s.axis, s.values.len()),
                None => println!("ok: scenario {}", doc.scenario.name),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
