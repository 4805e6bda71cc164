use std::process::{Command, Output};

use clap::Parser;
use hartogs_bergman_cli::output::{
    csv_seed, read_csv, CoefficientRecord, KernelRecord, LpRecord, SchurRecord, ThresholdRecord,
    VerifyRecord,
};
use hartogs_bergman_cli::{execute, Cli, Format, Records};

fn bergman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

const BALL_11: &str = r#"{"kind":"HartogsBall","n":1,"k":1}"#;

#[test]
fn threshold_prints_exact_endpoints() {
    let out = bergman(&["threshold", "--n", "1", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<ThresholdRecord> = read_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].p_low, "4/3");
    assert_eq!(rows[0].p_high, "4");
    assert_eq!(rows[0].p_low_decimal, 4.0 / 3.0);
    assert_eq!(rows[0].p_high_decimal, 4.0);
}

#[test]
fn threshold_classifies_an_exponent() {
    let out = bergman(&["threshold", "--n", "2", "--k", "1", "--pexp", "2.5"]);
    let rows: Vec<ThresholdRecord> = read_csv(&stdout(&out)).unwrap();
    assert_eq!(rows[0].p.as_deref(), Some("5/2"));
    assert_eq!(rows[0].bounded, Some(true));
    assert!(rows[0].radial_integral.is_some());

    let out = bergman(&["threshold", "--n", "2", "--k", "1", "--pexp", "3"]);
    let rows: Vec<ThresholdRecord> = read_csv(&stdout(&out)).unwrap();
    assert_eq!(rows[0].bounded, Some(false));
    assert_eq!(rows[0].radial_integral, None);
}

#[test]
fn kernel_example_value() {
    let out = bergman(&[
        "kernel",
        "--spec",
        BALL_11,
        "--p",
        "(0.5,0.1)",
        "--q",
        "(0.5,0.1)",
        "--method",
        "all",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows: Vec<KernelRecord> = read_csv(&stdout(&out)).unwrap();
    let methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    assert_eq!(methods, ["closed", "series", "transform"]);
    for r in &rows {
        assert!((r.re - 0.78181).abs() < 2e-5, "{r:?}");
        assert!(r.im.abs() < 1e-12);
    }
}

#[test]
fn kernel_json_records_carry_the_value_pair() {
    let out = bergman(&[
        "kernel",
        "--spec",
        BALL_11,
        "--p",
        "(0.5,0.1)",
        "--q",
        "(0.5,0.1)",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rec = &doc["records"][0];
    assert_eq!(rec["spec"], "HartogsBall(n=1,k=1)");
    let value = rec["value"].as_array().unwrap();
    assert_eq!(value.len(), 2);
    assert!((value[0].as_f64().unwrap() - 0.78181).abs() < 2e-5);
    assert!(doc.get("seed").is_none());
}

#[test]
fn contract_violations_exit_2_with_one_line() {
    for args in [
        &["kernel", "--p", "(0.5,0.6)", "--q", "(0.5,0.1)"][..],
        &["kernel", "--p", "(0,0)", "--q", "(0.5,0.1)"],
        &["kernel", "--p", "(0.5,0.1,0.1)", "--q", "(0.5,0.1)"],
        &[
            "kernel",
            "--spec",
            "{not json}",
            "--p",
            "(0.5,0.1)",
            "--q",
            "(0.5,0.1)",
        ],
        &["lpnorm", "--pexp", "abc"],
        &["threshold", "--n", "0"],
        &[
            "schur",
            "--eps",
            "0.5",
            "--spec",
            r#"{"kind":"HartogsPolydisc","n":2,"k":1}"#,
            "--pairing",
            "swapped",
        ],
        &["lpnorm", "--pexp", "2", "--count", "0"],
        &["frobnicate"],
        &["kernel", "--p", "(0.5,0.1)"],
    ] {
        let out = bergman(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        let err = stderr(&out);
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error[contract]: "), "{err}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn series_non_convergence_exits_3() {
    let out = bergman(&[
        "kernel",
        "--p",
        "(0.999,0)",
        "--q",
        "(0.999,0)",
        "--method",
        "series",
        "--tol",
        "1e-15",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[numerical]: "), "{err}");
}

#[test]
fn verify_all_passes_with_seed_zero() {
    let out = bergman(&["verify", "--suite", "all", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(csv_seed(&text), Some(0));
    let rows: Vec<VerifyRecord> = read_csv(&text).unwrap();
    for suite in ["kernels", "basis", "projection", "lp", "schur"] {
        assert!(rows.iter().any(|r| r.suite == suite), "{suite}");
    }
    assert!(rows.iter().all(|r| r.passed));
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "lpnorm", "--pexp", "2,7/2", "--count", "20000", "--seed", "11",
    ];
    let a = bergman(&args);
    let b = bergman(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let other = bergman(&[
        "lpnorm", "--pexp", "2,7/2", "--count", "20000", "--seed", "12",
    ]);
    assert_ne!(a.stdout, other.stdout);

    let schur = [
        "schur", "--eps", "0.5,0.7", "--count", "2000", "--format", "json",
    ];
    assert_eq!(bergman(&schur).stdout, bergman(&schur).stdout);
}

#[test]
fn out_path_receives_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lp.csv");
    let args = ["lpnorm", "--pexp", "2", "--count", "5000"];
    let direct = bergman(&args);
    let mut with_out = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    let out = bergman(&with_out);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn randomized_commands_announce_their_seed() {
    let out = bergman(&["lpnorm", "--pexp", "2", "--count", "1000", "--seed", "7"]);
    assert_eq!(csv_seed(&stdout(&out)), Some(7));
    let out = bergman(&[
        "lpnorm", "--pexp", "2", "--count", "1000", "--seed", "7", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["seed"], 7);
    let out = bergman(&["threshold"]);
    assert_eq!(csv_seed(&stdout(&out)), None);
}

fn run_in_process(args: &[&str]) -> (Records, String) {
    let cli = Cli::parse_from(std::iter::once("bergman").chain(args.iter().copied()));
    let report = execute(&cli).unwrap();
    let mut buf = Vec::new();
    report
        .records
        .write(&mut buf, Format::Csv, report.command, report.seed)
        .unwrap();
    (report.records, String::from_utf8(buf).unwrap())
}

#[test]
fn csv_round_trips_exactly() {
    let (records, text) = run_in_process(&[
        "lpnorm",
        "--pexp",
        "2,3,4,7/3",
        "--count",
        "3000",
        "--diagnose",
    ]);
    let Records::Lp(rows) = records else { panic!() };
    assert_eq!(read_csv::<LpRecord>(&text).unwrap(), rows);
    assert!(rows.iter().all(|r| r.growth_sigmas.is_some()));

    let (records, text) = run_in_process(&[
        "schur",
        "--spec",
        r#"{"kind":"HartogsBall","n":2,"k":1}"#,
        "--eps",
        "0.5,0.9",
        "--count",
        "500",
    ]);
    let Records::Schur(rows) = records else {
        panic!()
    };
    assert_eq!(read_csv::<SchurRecord>(&text).unwrap(), rows);
    assert_eq!(rows.iter().filter(|r| r.is_max).count(), 2);

    let (records, text) = run_in_process(&[
        "kernel",
        "--n",
        "2",
        "--k",
        "2",
        "--p",
        "(0.5+0.1i, 0.1, -0.05i)",
        "--q",
        "(0.3, 0.02i, 0.01)",
        "--method",
        "all",
    ]);
    let Records::Kernel(rows) = records else {
        panic!()
    };
    assert_eq!(read_csv::<KernelRecord>(&text).unwrap(), rows);

    let (records, text) = run_in_process(&[
        "project",
        "--spec",
        BALL_11,
        "--function",
        "series",
        "--series",
        r#"[{"alpha":-1,"beta":[1],"coeff":[0.25,-1.5]}]"#,
    ]);
    let Records::Coefficients(rows) = records else {
        panic!()
    };
    assert_eq!(read_csv::<CoefficientRecord>(&text).unwrap(), rows);
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].alpha, rows[0].beta.as_str()), (-1, "1"));

    let (records, text) = run_in_process(&["threshold", "--n", "3", "--k", "2", "--pexp", "1.2"]);
    let Records::Threshold(rows) = records else {
        panic!()
    };
    assert_eq!(read_csv::<ThresholdRecord>(&text).unwrap(), rows);
}

#[test]
fn projection_of_conj_base_is_a_single_term() {
    for (n, k) in [(1, 1), (2, 1), (1, 3)] {
        let (records, _) =
            run_in_process(&["project", "--n", &n.to_string(), "--k", &k.to_string()]);
        let Records::Coefficients(rows) = records else {
            panic!()
        };
        assert_eq!(rows.len(), 1, "n={n} k={k}");
        let kn = (n * k) as f64;
        assert_eq!(rows[0].alpha, -(n * k) as i64);
        assert!((rows[0].re - 1.0 / (kn + 1.0)).abs() < 1e-12);
    }
}

#[test]
fn kernel_evaluation_of_a_projection_matches_its_series() {
    let out = bergman(&[
        "project",
        "--function",
        "series",
        "--series",
        r#"[{"alpha":-1,"beta":[1],"coeff":[1,0]}]"#,
        "--at",
        "(0.5,0.1)",
        "--at",
        "(0.4i,0.05)",
        "--count",
        "100000",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows: Vec<hartogs_bergman_cli::output::EvaluationRecord> = read_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let z = (r.re - r.series_re).hypot(r.im - r.series_im) / r.std_error;
        assert!(z <= 4.0, "{r:?}");
    }
}
