use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sogkit::io::{from_json, parse_csv, ApproximantFile};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sogkit"))
        .args(args)
        .current_dir(dir)
        .env_remove("SOGKIT_PRECISION_BITS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {line}"))
        .parse()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> ApproximantFile {
    from_json(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn build_imq_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["build", "--kernel", "imq", "--n", "50", "--nc", "13", "--out", "imq.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    assert_eq!(field(&line, "p"), 100.0);
    assert!((field(&line, "s_min") - 0.3624).abs() < 1e-4);
    assert_eq!(field(&line, "precision_bits"), 856.0);
    match read(dir.path(), "imq.json") {
        ApproximantFile::Ladder(a) => assert_eq!(a.weights.len(), 100),
        _ => panic!("expected a ladder"),
    }
}

#[test]
fn exact_gaussian_recovery_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["build", "--kernel", "gauss", "--param", "h=0.1", "--n", "2", "--nc", "0.01", "--out", "g.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let ladder = match read(dir.path(), "g.json") {
        ApproximantFile::Ladder(a) => a,
        _ => panic!(),
    };
    for (j, w) in ladder.weights.iter().enumerate() {
        let expect = if j == 1 { 1.0 } else { 0.0 };
        assert!((w.to_f64() - expect).abs() < 1e-30, "w_{j}");
    }
    let o = run(&["eval", "--in", "g.json", "--at", "0,0.05", "--out", "rep.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(field(out.lines().next().unwrap(), "eps_inf") < 1e-30);
    assert_eq!(out.lines().count(), 3);
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(rep["m"], 1000);
    assert_eq!(rep["seed"], 2021);
}

#[test]
fn default_nc_and_precision_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["build", "--kernel", "ewald", "--param", "alpha=1", "--n", "10", "--out", "e.json"], dir.path());
    assert_eq!(field(&stdout(&o), "n_c"), 3.0);
    assert_eq!(field(&stdout(&o), "precision_bits"), 376.0);
    let o = Command::new(env!("CARGO_BIN_EXE_sogkit"))
        .args(["build", "--kernel", "imq", "--n", "10", "--out", "e2.json"])
        .current_dir(dir.path())
        .env("SOGKIT_PRECISION_BITS", "512")
        .output()
        .unwrap();
    assert_eq!(field(&stdout(&o), "precision_bits"), 512.0);
    let o = run(&["build", "--kernel", "imq", "--n", "10", "--precision", "300", "--out", "e3.json"], dir.path());
    assert_eq!(field(&stdout(&o), "precision_bits"), 300.0);
    assert_eq!(read(dir.path(), "e3.json").precision_bits(), 300);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(run(&[], p).status.code(), Some(2));
    assert_eq!(run(&["build", "--kernel", "nope", "--n", "3", "--out", "x.json"], p).status.code(), Some(2));
    assert_eq!(run(&["build", "--kernel", "gauss", "--n", "3", "--out", "x.json"], p).status.code(), Some(2));
    assert_eq!(run(&["build", "--kernel", "imq", "--n", "3", "--nc", "-1", "--out", "x.json"], p).status.code(), Some(2));
    assert_eq!(run(&["eval", "--in", "missing.json"], p).status.code(), Some(2));
    // a lossy low-precision build is a numerical failure
    let o = run(&["build", "--kernel", "imq", "--n", "50", "--nc", "13", "--precision", "200", "--out", "x.json"], p);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error in build"));

    assert_eq!(run(&["build", "--kernel", "imq", "--n", "6", "--nc", "2", "--out", "s.json"], p).status.code(), Some(0));
    assert_eq!(run(&["reduce", "--in", "s.json", "--delta", "-1", "--out", "r.json"], p).status.code(), Some(2));
    assert_eq!(run(&["reduce", "--in", "s.json", "--q", "0", "--out", "r.json"], p).status.code(), Some(2));
    assert_eq!(run(&["reduce", "--in", "s.json", "--out", "r.json"], p).status.code(), Some(2));
    assert_eq!(run(&["reduce", "--in", "s.json", "--q", "4", "--out", "r.json"], p).status.code(), Some(0));
    // reduced files and non-ladder files are refused
    let o = run(&["reduce", "--in", "r.json", "--q", "2", "--out", "r2.json"], p);
    assert_eq!(o.status.code(), Some(2));
    let text = fs::read_to_string(p.join("s.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["terms"][3]["t"] = "2.75".into();
    fs::write(p.join("bent.json"), v.to_string()).unwrap();
    let o = run(&["reduce", "--in", "bent.json", "--q", "2", "--out", "r3.json"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a ladder"));
}

#[test]
fn reduce_imq_full_and_by_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    run(&["build", "--kernel", "imq", "--n", "50", "--nc", "13", "--out", "imq.json"], p);
    let base = field(&stdout(&run(&["eval", "--in", "imq.json"], p)), "eps_inf");
    let o = run(&["reduce", "--in", "imq.json", "--q", "99", "--out", "full.json"], p);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "q"), 99.0);
    let full = field(&stdout(&run(&["eval", "--in", "full.json"], p)), "eps_inf");
    assert!((full / base - 1.0).abs() < 0.1, "{full} vs {base}");

    let o = run(&["reduce", "--in", "imq.json", "--delta", "1e-4", "--out", "tol.json"], p);
    let line = stdout(&o);
    assert!(field(&line, "hankel_bound") <= 1e-4);
    // 2 Σ_{l>54} sigma_l = 1.06e-4 > 1e-4 >= 2 Σ_{l>55} sigma_l
    assert_eq!(field(&line, "q"), 55.0, "{line}");
    let o = run(&["reduce", "--in", "imq.json", "--q", "54", "--out", "q54.json"], p);
    assert!(field(&stdout(&o), "hankel_bound") > 1e-4);
}

#[test]
fn sweep_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = run(&["sweep", "--mode", "p", "--kernel", "imq", "--n-list", "8,16,32", "--m", "200"], p);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("swept_var,p,n_c,s_min,eps_inf,w_max,wall_ms\n"));
    let eps: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert!(eps.windows(2).all(|w| w[1] < w[0]), "{eps:?}");
    // regression values of the first verified run
    assert!((eps[2] / 3.3765e-6 - 1.0).abs() < 1e-3, "{eps:?}");

    let o = run(
        &["sweep", "--mode", "bandwidth", "--kernel", "imq", "--n", "8", "--nc-list", "1,2,4", "--timing"],
        p,
    );
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(String::from).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| !r.ends_with(',')));

    run(&["build", "--kernel", "imq", "--n", "6", "--nc", "2", "--out", "s.json"], p);
    run(&["reduce", "--in", "s.json", "--q", "5", "--out", "r.json"], p);
    let o = run(&["export", "--in", "r.json", "--out", "r.csv"], p);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let rows = parse_csv(&fs::read_to_string(p.join("r.csv")).unwrap()).unwrap();
    let red = match read(p, "r.json") {
        ApproximantFile::Reduced(r) => r,
        _ => panic!(),
    };
    assert_eq!(rows.len(), red.q() + 1);
    for (row, t) in rows[1..].iter().zip(&red.terms) {
        assert_eq!(row[0], t.w.re.to_f64());
        assert_eq!(row[2], t.t.re.to_f64());
    }
}
