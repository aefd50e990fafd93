use infobound_tool::error::{EXIT_INCONSISTENT, EXIT_USAGE};
use infobound_tool::figures::{build_figure, fig4_model, Figure, FigureParams};
use infobound_tool::sweep::{run_sweep, SweepConfig};
use infobound_tool::table::Table;
use infobound_tool::CliError;
use infobound_core::nuisance::mmse_with_without_nuisance;
use infobound_core::QuadConfig;

#[test]
fn exit_codes() {
    assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
    assert_eq!(CliError::Config { key: "k".into(), message: "bad".into() }.exit_code(), EXIT_USAGE);
    assert_eq!(CliError::Inconsistent("row 3".into()).exit_code(), EXIT_INCONSISTENT);
    assert_eq!(EXIT_INCONSISTENT, 2);
    assert_eq!(EXIT_USAGE, 64);
}

#[test]
fn figure_numbers() {
    for n in 1..=4 {
        assert_eq!(Figure::from_number(n).unwrap().number(), n);
    }
    assert!(matches!(Figure::from_number(0), Err(CliError::Usage(_))));
}

#[test]
fn overrides_are_validated() {
    let p = FigureParams::defaults(Figure::One);
    assert!(p.clone().with_overrides(&["b=0,10", "points=7"]).is_ok());
    for bad in ["points=1", "points=2.5", "xbar=1,2", "a_xbar_min=abc", "nope=1", "b"] {
        assert!(matches!(p.clone().with_overrides(&[bad]), Err(CliError::Usage(_))), "{bad}");
    }
    assert!(p.with_alpha(&[1.0]).is_err());
    assert!(FigureParams::defaults(Figure::Three).with_alpha(&[0.0, 2.0]).is_ok());
}

#[test]
fn figure_table_round_trips_through_csv() {
    let params = FigureParams::defaults(Figure::Four).with_overrides(&["points=9"]).unwrap();
    let t = build_figure(&params, &QuadConfig::default()).unwrap();
    let back = Table::parse(&t.to_csv_string().unwrap()).unwrap();
    assert_eq!(back, t);
    assert!(t.to_csv_string().unwrap().starts_with("# infobound fig 4:"));
}

#[test]
fn fig4_model_has_the_named_coordinates() {
    let p = fig4_model(2.5, 0.5, 10.0).unwrap();
    assert!((p.chi() - 2.5).abs() < 1e-15 && (p.eta() - 0.5).abs() < 1e-15 && (p.snr_u() - 10.0).abs() < 1e-15);
    let (plus, minus) = mmse_with_without_nuisance(&fig4_model(1.0, 1.0, 10.0).unwrap());
    assert!((plus - minus).abs() < 1e-15);
}

#[test]
fn nuisance_sweep_over_alpha() {
    let sc = SweepConfig::parse(
        r#"
model = "nuisance_gaussian"
quantities = ["mmse_plus", "mmse_minus", "mi_plus", "mi_minus"]

[sweep]
param = "alpha"
start = -2.0
stop = 2.0
count = 9

[nuisance_gaussian]
a = 1.0
b = 1.0
var_x_given_u = 1.0
var_u = 10.0
"#,
    )
    .unwrap();
    let t = run_sweep(&sc, &QuadConfig::default()).unwrap();
    assert_eq!(t.rows.len(), 9);
    let (plus, minus) = (t.column("mmse_plus").unwrap(), t.column("mmse_minus").unwrap());
    assert!(plus.iter().zip(&minus).all(|(p, m)| p >= m));
    // α = a b σ_X|U² / σ_N² = 1 is the equality point
    assert!((plus[6] - minus[6]).abs() < 1e-15, "{} {}", plus[6], minus[6]);
}

#[test]
fn sweep_rejects_non_positive_variances_and_bad_counts() {
    let head = "model = \"gaussian\"\nquantities = [\"mmse\"]\n";
    for (sweep, key) in [
        ("param = \"var_x\"\nstart = -1.0\nstop = 1.0\ncount = 3", "var_x"),
        ("param = \"snr\"\nstart = 0.0\nstop = 1.0\ncount = 1", "count"),
        ("param = \"snr\"\nstart = 0.0\nstop = 1.0\ncount = 3\nscale = \"cubic\"", "scale"),
    ] {
        let err = SweepConfig::parse(&format!("{head}[sweep]\n{sweep}\n")).unwrap_err();
        assert!(matches!(&err, CliError::Config { .. }), "{err}");
        assert!(err.to_string().contains(key), "{err}");
    }
}
