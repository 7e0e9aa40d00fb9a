use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bellctl(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellctl"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn bellctl")
}

const SHORT_RUN: &str = "
name = short
paradigm = interaction
law.kappa = 2
integrator.t_max = 20
output.trajectory_csv = traj.csv
output.report_json = report.json
";

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), SHORT_RUN).unwrap();
    let mut csvs = Vec::new();
    for out in ["a", "b"] {
        let o = bellctl(&["run", "run.cfg", "--out", out, "--seed", "3"], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        csvs.push(fs::read(dir.path().join(out).join("traj.csv")).unwrap());
        let report = fs::read_to_string(dir.path().join(out).join("report.json")).unwrap();
        assert!(report.contains("\"seed\": 3"), "{report}");
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    assert_eq!(text.lines().next(), Some("t,V,f,concurrence,fidelity,p_S,purity"));
    assert_eq!(text.lines().count(), 1 + 201);
}

#[test]
fn validate_names_the_bad_field() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "law.kappa = -1\n").unwrap();
    let o = bellctl(&["validate", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("law.kappa"));

    fs::write(dir.path().join("good.cfg"), SHORT_RUN).unwrap();
    let o = bellctl(&["validate", "good.cfg"], dir.path());
    assert!(o.status.success());
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bellctl(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(bellctl(&["run", "missing.cfg"], dir.path()).status.code(), Some(2));
    assert_eq!(bellctl(&["preset", "figure9"], dir.path()).status.code(), Some(2));
}

#[test]
fn integrator_abort_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("abort.cfg"),
        "integrator.t_max = 5\nintegrator.max_steps = 3\noutput.report_json = r.json\n",
    )
    .unwrap();
    let o = bellctl(&["run", "abort.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(dir.path().join("r.json")).unwrap();
    assert!(report.contains("\"aborted\""));
}

#[test]
fn sweep_writes_rows_in_order() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("sweep.cfg"),
        "law = geometric\nlaw.t0 = 5\nmodel.B = 0.4\ninitial = |00>\nbasis = z\nintegrator.t_max = 5\n\
         sweep.axis = law.t0\nsweep.values = 5, 1, 3\nsweep.output = sweep.csv\n",
    )
    .unwrap();
    let o = bellctl(&["sweep", "sweep.cfg", "--parallel", "3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let values: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values, [5.0, 1.0, 3.0]);
}

#[test]
fn preset_writes_every_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = bellctl(&["preset", "figure2", "--out", "fig"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in ["0.5", "1", "2"] {
        assert!(dir.path().join(format!("fig/figure2_k{k}.csv")).is_file());
    }
    let report = fs::read_to_string(dir.path().join("fig/report.json")).unwrap();
    assert!(report.contains("\"preset\": \"figure2\""));
}
