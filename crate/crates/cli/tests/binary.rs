//! End-to-end runs of the `infobound` binary.

use std::path::Path;
use std::process::{Command, Output};

use infobound_tool::table::Table;

fn infobound(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infobound")).current_dir(dir).args(args).output().unwrap()
}

fn read_table(path: &Path) -> Table {
    Table::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fig1_default_output_path_and_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = infobound(dir.path(), &["fig", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("fig1.csv"));
    assert_eq!(t.header, ["a_xbar", "b", "mi_exact", "mi_lower_bound"]);
    assert_eq!(t.rows.len(), 180);
    let (mi, lb) = (t.column("mi_exact").unwrap(), t.column("mi_lower_bound").unwrap());
    assert!(mi.iter().zip(&lb).all(|(m, l)| l <= m));
    let s = t.column("a_xbar").unwrap();
    assert_eq!((s[0], s[59]), (0.5, 200.0));
}

#[test]
fn fig2_override_changes_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = infobound(dir.path(), &["fig", "2", "--out", "f2.csv", "--override", "points=5", "--override", "a_xbar=1,10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("f2.csv"));
    assert_eq!(t.rows.len(), 10);
    assert!(t.metadata.contains("points=5"), "{}", t.metadata);
}

#[test]
fn fig3_alpha_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = infobound(dir.path(), &["fig", "3", "--out", "f3.csv", "--alpha", "0,3", "--override", "points=11"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("f3.csv"));
    assert_eq!(t.rows.len(), 2 * 2 * 11);
    let alphas = t.column("alpha").unwrap();
    assert!(alphas.iter().all(|&a| a == 0.0 || a == 3.0));
}

#[test]
fn fig4_rows_respect_the_mmse_ordering() {
    let dir = tempfile::tempdir().unwrap();
    assert!(infobound(dir.path(), &["fig", "4"]).status.success());
    let t = read_table(&dir.path().join("fig4.csv"));
    assert_eq!(t.rows.len(), 80 * 4 * 2);
    let (plus, minus) = (t.column("mmse_plus").unwrap(), t.column("mmse_minus").unwrap());
    assert!(plus.iter().zip(&minus).all(|(p, m)| p >= m));
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["fig", "5"][..],
        &["fig", "1", "--override", "colour=3"],
        &["fig", "1", "--override", "points"],
        &["fig", "1", "--alpha", "1"],
        &["verify", "everything"],
        &["sweep", "--config", "missing.toml"],
        &[],
    ] {
        let o = infobound(dir.path(), args);
        assert_eq!(o.status.code(), Some(64), "{args:?}: {}", stderr(&o));
    }
    let o = infobound(dir.path(), &["fig", "1", "--override", "colour=3"]);
    assert!(stderr(&o).contains("a_xbar_max"), "valid keys should be listed: {}", stderr(&o));
    assert_eq!(infobound(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn unreadable_sweep_config_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = infobound(dir.path(), &["sweep", "--config", "absent.toml", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("absent.toml"));
}

#[test]
fn poisson_sweep_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("p.toml"),
        r#"
model = "poisson"
quantities = ["mmse", "mi_exact", "mi_lower_bound"]

[sweep]
param = "a_xbar"
start = 0.1
stop = 100.0
count = 50
scale = "log"

[poisson]
xbar = 1.0
b = 0.0
"#,
    )
    .unwrap();
    let o = infobound(dir.path(), &["sweep", "--config", "p.toml", "--out", "p.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("p.csv"));
    assert_eq!(t.rows.len(), 50);
    let s = t.column("a_xbar").unwrap();
    assert_eq!((s[0], s[49]), (0.1, 100.0));
    for (s, m) in s.iter().zip(t.column("mmse").unwrap()) {
        assert!((m - 1.0 / (1.0 + s)).abs() < 1e-10 * m, "{s}: {m}");
    }
}

#[test]
fn gaussian_snr_sweep() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("g.toml"),
        "model = \"gaussian\"\nquantities = [\"mi_exact\"]\n[sweep]\nparam = \"snr\"\nstart = 0.0\nstop = 10.0\ncount = 21\n",
    )
    .unwrap();
    let o = infobound(dir.path(), &["sweep", "--config", "g.toml", "--out", "g.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("g.csv"));
    for (snr, mi) in t.column("snr").unwrap().iter().zip(t.column("mi_exact").unwrap()) {
        assert!((mi - 0.5 * snr.ln_1p()).abs() < 1e-9, "{snr}: {mi}");
    }
}

#[test]
fn bad_sweep_configs_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let base = "model = \"gaussian\"\n[sweep]\nparam = \"snr\"\nstart = 0.0\nstop = 1.0\ncount = 3\n";
    let cases = [
        (format!("quantities = []\n{base}"), "quantities"),
        (format!("quantities = [\"mi_plus\"]\n{base}"), "quantities"),
        (format!("quantities = [\"mmse\"]\n{base}colour = 1\n"), "sweep.colour"),
        (format!("quantities = [\"mmse\"]\n{base}scale = \"log\"\n"), "sweep"),
        (format!("quantities = [\"mmse\"]\n{base}[poisson]\nxbar = 1.0\n"), "poisson"),
    ];
    for (i, (text, key)) in cases.iter().enumerate() {
        let name = format!("bad{i}.toml");
        std::fs::write(dir.path().join(&name), text).unwrap();
        let o = infobound(dir.path(), &["sweep", "--config", &name, "--out", "x.csv"]);
        assert_eq!(o.status.code(), Some(64), "case {i}: {}", stderr(&o));
        assert!(stderr(&o).contains(key), "case {i}: {}", stderr(&o));
    }
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn verify_nuisance_writes_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = infobound(dir.path(), &["verify", "nuisance", "--report", "r.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().last().unwrap().ends_with("0 failed"), "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert_eq!(c["pass"], true, "{c}");
        assert!(["==", ">=", "<="].contains(&c["relation"].as_str().unwrap()));
        assert!(c["name"].is_string() && c["tolerance"].is_number());
    }
}

#[test]
fn verify_bounds_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = infobound(dir.path(), &["verify", "bounds"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.lines().filter(|l| !l.is_empty()).all(|l| l.starts_with("PASS") || l.ends_with("0 failed")), "{stdout}");
}
