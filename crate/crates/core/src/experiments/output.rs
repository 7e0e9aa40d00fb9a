use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{ExperimentError, SweepTable};
use crate::dynamics::Trajectory;

pub const CSV_HEADER: &str = "t,V,f,concurrence,fidelity,p_S,purity";

/// Seventeen significant digits: enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn trajectory_csv(traj: &Trajectory<f64>) -> String {
    let mut out = String::with_capacity(64 + traj.samples.len() * 7 * 24);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let row = [s.t, s.v, s.f, s.concurrence, s.fidelity, s.p_s, s.purity].map(num);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("value,status,final_concurrence,final_V,t_first,rate,error\n");
    for r in &table.rows {
        let status = if r.error.is_none() { "ok" } else { "failed" };
        let error = r.error.as_deref().unwrap_or("").replace(['"', '\n'], "'");
        let _ = writeln!(
            out,
            "{},{status},{},{},{},{},\"{error}\"",
            num(r.value),
            opt(r.final_concurrence),
            opt(r.final_v),
            opt(r.t_first),
            opt(r.rate),
        );
    }
    out
}

pub fn report_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize infallibly");
    s.push('\n');
    s
}

/// Relative paths land under `out_dir` when one is given.
pub(crate) fn resolve(out_dir: Option<&Path>, path: &Path) -> PathBuf {
    match out_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    let io = |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 157.0, f64::MIN_POSITIVE] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn resolve_only_touches_relative_paths() {
        let out = Path::new("/tmp/out");
        assert_eq!(resolve(Some(out), Path::new("a.csv")), PathBuf::from("/tmp/out/a.csv"));
        assert_eq!(resolve(Some(out), Path::new("/abs/a.csv")), PathBuf::from("/abs/a.csv"));
        assert_eq!(resolve(None, Path::new("a.csv")), PathBuf::from("a.csv"));
    }
}
