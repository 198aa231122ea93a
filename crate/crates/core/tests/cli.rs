use std::path::Path;
use std::process::{Command, Output};

const SECTION_IV: &str = r#"{
    "dimension": 2,
    "kind": "linear",
    "objective": {"linear": {"c": [-4, -3], "d0": 36}},
    "constraints": [
        {"h": [3, 6], "d": -48}, {"h": [4, 2], "d": -32}, {"h": [1, 1], "d": -10},
        {"h": [-1, 0], "d": 0}, {"h": [0, -1], "d": 0}
    ]
}"#;

fn plfilter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plfilter"))
        .args(args)
        .env("PLFILTER_THREADS", "2")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

#[test]
fn transform_mode_sum_json() {
    let dir = tempfile::tempdir().unwrap();
    let lp = write(dir.path(), "lp.json", SECTION_IV);
    let out = stdout(&plfilter(&["transform", "--input", &lp, "--beta", "0.1,1,10", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let gammas: Vec<f64> = v["modes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["gamma"].as_f64().unwrap())
        .collect();
    assert_eq!(gammas.len(), 5);
    for (g, e) in gammas.iter().zip([0.0, 2.0, 4.0, 12.0, 36.0]) {
        assert!((g - e).abs() < 1e-10);
    }
}

#[test]
fn transform_sweep_and_oracle_agree() {
    let dir = tempfile::tempdir().unwrap();
    let lp = write(dir.path(), "lp.json", SECTION_IV);
    let sweep = stdout(&plfilter(&["transform", "-i", &lp, "--beta", "0.1,1,10"]));
    assert!(sweep.starts_with("beta,T,logZ,mean_O,var_O\n"));
    assert_eq!(sweep.lines().count(), 4);
    let oracle = stdout(&plfilter(&["oracle", "-i", &lp, "--beta", "1", "--resolution", "2000"]));
    assert!(oracle.starts_with("beta,T,Z,logZ\n"));
    let exact = column(&sweep, "logZ")[1];
    let grid = column(&oracle, "logZ")[0];
    assert!((exact.exp() / grid.exp() - 1.0).abs() < 1e-3, "{exact} vs {grid}");
}

#[test]
fn default_grid_has_forty_rows() {
    let dir = tempfile::tempdir().unwrap();
    let lp = write(dir.path(), "lp.json", SECTION_IV);
    let out = stdout(&plfilter(&["transform", "-i", &lp]));
    let betas = column(&out, "beta");
    assert_eq!(betas.len(), 40);
    assert!((betas[0] - 0.01).abs() < 1e-15);
}

#[test]
fn sample_is_deterministic_and_analyzable() {
    let dir = tempfile::tempdir().unwrap();
    let lp = write(dir.path(), "lp.json", SECTION_IV);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = plfilter(&[
            "sample", "-i", &lp, "--schedule", "0.05:5:8", "--seed", "7", "--chains", "2", "--steps", "3000",
            "--burn-in", "500", "-o", out.to_str().unwrap(),
        ]);
        stdout(&o);
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("beta,T,mean_O,stderr_O,var_O\n"));

    let sweep = dir.path().join("a.csv");
    let report = stdout(&plfilter(&["analyze", "-i", sweep.to_str().unwrap(), "--window", "0.2,5"]));
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(v["dof_fit"]["slope"].as_f64().unwrap() > 0.0);
}

#[test]
fn landau_table() {
    let dir = tempfile::tempdir().unwrap();
    let lp = write(dir.path(), "lp.json", SECTION_IV);
    let out = stdout(&plfilter(&[
        "landau", "-i", &lp, "--beta", "0.5", "--bins", "6", "--steps", "3000", "--burn-in", "500",
    ]));
    assert!(out.starts_with("bin_lo,bin_hi,count,betaF\n"));
    assert_eq!(out.lines().count(), 7);
    assert!(column(&out, "betaF").iter().any(|&f| f == 0.0));
}

#[test]
fn modes_and_geodesic_tables() {
    let dir = tempfile::tempdir().unwrap();
    let vm = write(
        dir.path(),
        "vm.json",
        r#"{"kind": "two_minima", "gamma_g": 1, "gamma_l": 1, "n_g": 2, "n_l": 2, "nu": 2, "o_g": 0, "o_l": 1.5}"#,
    );
    let out = stdout(&plfilter(&["modes", "-i", &vm, "--beta", "1,2", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["crossover_temperature"].as_f64().unwrap(), 1.5);
    assert_eq!(v["table"].as_array().unwrap().len(), 2);

    let g = write(dir.path(), "g.json", r#"{"dimension": 3, "o1": 0, "o2": 2, "alpha": 0.5}"#);
    let out = stdout(&plfilter(&["geodesic", "-i", &g, "--schedule", "0.1:10:5"]));
    assert!(out.starts_with("beta,T,delta_x,length\n"));
    let dx = column(&out, "delta_x");
    assert!(dx.iter().all(|&d| d > 0.0));
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = write(dir.path(), "m.json", r#"{"objective": {"linear": {"c": [1]}}}"#);
    let o = plfilter(&["transform", "-i", &missing]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension"));

    let empty = write(
        dir.path(),
        "e.json",
        r#"{"dimension": 1, "objective": {"linear": {"c": [1]}},
            "constraints": [{"h": [1], "d": 1}, {"h": [-1], "d": 1}]}"#,
    );
    assert_eq!(plfilter(&["transform", "-i", &empty]).status.code(), Some(10));

    let open = write(dir.path(), "u.json", r#"{"dimension": 1, "objective": {"linear": {"c": [1]}}, "constraints": [{"h": [-1], "d": 0}]}"#);
    assert_eq!(plfilter(&["transform", "-i", &open]).status.code(), Some(11));

    let nofile = dir.path().join("nope.json");
    assert_eq!(plfilter(&["transform", "-i", nofile.to_str().unwrap()]).status.code(), Some(4));

    let lp = write(dir.path(), "lp.json", SECTION_IV);
    assert_eq!(plfilter(&["oracle", "-i", &lp, "--resolution", "5"]).status.code(), Some(2));

    let help = stdout(&plfilter(&["--help"]));
    assert!(help.contains("Exit codes") && help.contains("PLFILTER_THREADS"));
}
