use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cqc_core::io::state_to_json;
use cqc_core::states::{asymmetric_werner, bell_phi_plus, maximally_mixed, WernerParams};
use cqc_core::DensityMatrix;
use tempfile::TempDir;

fn cqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_state(dir: &TempDir, name: &str, rho: &DensityMatrix) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, state_to_json(rho)).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Value of a `key   value` line from the bounds text report.
fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).filter(|rest| rest.starts_with(' ')))
        .unwrap_or_else(|| panic!("no {key} line in\n{text}"))
        .trim()
}

/// Parses a CSV file into its header and rows of fields.
fn read_csv(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn num(v: &str) -> f64 {
    assert!(!v.contains(['e', 'E']), "{v} is not plain decimal");
    v.parse().unwrap()
}

#[test]
fn bounds_on_bell_state() {
    let dir = TempDir::new().unwrap();
    let path = write_state(&dir, "bell.json", &bell_phi_plus(2).unwrap());
    let out = cqc(&["bounds", s(&path)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(field(&text, "gap"), "0.000000");
    assert!(field(&text, "steering_witness").starts_with("true"));
    assert!(text.contains("conditional on the CQC conjecture"));
}

#[test]
fn bounds_on_maximally_mixed_state() {
    let dir = TempDir::new().unwrap();
    let path = write_state(&dir, "mm.json", &maximally_mixed(2, 3).unwrap());
    let out = cqc(&["bounds", s(&path)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for key in ["mi_qq", "mi_rr", "cqc_sum", "qmi", "gap", "key_rate_lower"] {
        assert_eq!(field(&text, key), "0.000000", "{key}");
    }
    assert!(field(&text, "entanglement_witness").starts_with("false"));
    assert!(field(&text, "steering_witness").starts_with("false"));
}

#[test]
fn bounds_on_werner_state_with_pauli_bases() {
    let dir = TempDir::new().unwrap();
    let rho = asymmetric_werner(WernerParams::new(0.75, 0.5).unwrap()).unwrap();
    let path = write_state(&dir, "werner.json", &rho);
    let out = cqc(&["bounds", s(&path), "--bases", "pauli-xy", "--csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut csv = text.lines().skip_while(|l| !l.starts_with("dim_a,"));
    let header: Vec<&str> = csv.next().unwrap().split(',').collect();
    let row: Vec<&str> = csv.next().unwrap().split(',').collect();
    let col = |name: &str| num(row[header.iter().position(|h| *h == name).unwrap()]);
    assert!((col("cqc_sum") - 0.912872).abs() <= 1e-6);
    assert!((col("qmi") - 1.006607).abs() <= 1e-6);
}

#[test]
fn bounds_exit_codes() {
    let dir = TempDir::new().unwrap();
    let malformed = dir.path().join("bad.json");
    fs::write(&malformed, r#"{"dim_a":2,"dim_b":2,"entries":[[1,0]]}"#).unwrap();
    assert_eq!(code(&cqc(&["bounds", s(&malformed)])), 64);

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&cqc(&["bounds", s(&missing)])), 64);

    let not_state = dir.path().join("neg.json");
    fs::write(
        &not_state,
        r#"{"dim_a":1,"dim_b":2,"entries":[[1.5,0],[0,0],[0,0],[-0.5,0]]}"#,
    )
    .unwrap();
    assert_eq!(code(&cqc(&["bounds", s(&not_state)])), 65);

    let qutrits = write_state(&dir, "mm.json", &maximally_mixed(3, 3).unwrap());
    assert_eq!(
        code(&cqc(&["bounds", s(&qutrits), "--bases", "pauli-zx"])),
        64
    );
    assert_eq!(
        code(&cqc(&["bounds", s(&qutrits), "--bases", "nonsense"])),
        64
    );
}

#[test]
fn usage_errors_exit_64_and_help_exits_0() {
    assert_eq!(code(&cqc(&[])), 64);
    assert_eq!(code(&cqc(&["frobnicate"])), 64);
    assert_eq!(code(&cqc(&["search", "--dims", "2by2"])), 64);
    assert_eq!(
        code(&cqc(&["search", "--dims", "1x2", "--samples", "5"])),
        64
    );
    assert_eq!(
        code(&cqc(&["search", "--dims", "2x2", "--samples", "0"])),
        64
    );
    assert_eq!(
        code(&cqc(&["scatter", "--dims", "2x3", "--samples", "5"])),
        64
    );
    assert_eq!(code(&cqc(&["werner-sweep", "--p", "1.5"])), 64);
    assert_eq!(code(&cqc(&["--help"])), 0);
    assert_eq!(code(&cqc(&["--version"])), 0);
}

#[test]
fn unwritable_output_exits_73() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("no/such/dir/out.csv");
    assert_eq!(code(&cqc(&["werner-sweep", "--out", s(&target)])), 73);
    assert_eq!(
        code(&cqc(&[
            "search",
            "--dims",
            "2x2",
            "--samples",
            "3",
            "--out",
            s(&target)
        ])),
        73
    );
}

#[test]
fn werner_sweep_csv() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("w.csv");
    let out = cqc(&[
        "werner-sweep",
        "--p",
        "0.75",
        "--grid",
        "201",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    let (header, rows) = read_csv(&out_path);
    assert_eq!(header, "eta,qmi,cqc_sum,berta_bound,residual_a");
    assert_eq!(rows.len(), 201);
    for r in &rows {
        let v: Vec<f64> = r.iter().map(|x| num(x)).collect();
        assert!(v[2] >= v[3] - 1e-9, "cqc_sum < berta_bound at eta={}", v[0]);
    }
    // Closed-form values at eta = 1/2.
    let mid: Vec<f64> = rows[100].iter().map(|x| num(x)).collect();
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let s_ab = -(13.0 / 16.0) * (13.0f64 / 16.0).log2() + 3.0 / 16.0 * 4.0;
    assert_eq!(mid[0], 0.5);
    assert!((mid[1] - (2.0 - s_ab)).abs() <= 1e-6);
    assert!((mid[2] - 2.0 * (1.0 - h(0.125))).abs() <= 1e-6);
    assert!((mid[3] - 2.0 * (1.0 - h(0.125))).abs() <= 1e-6);
}

#[test]
fn werner_sweep_at_zero_visibility_is_all_zero() {
    let out = cqc(&["werner-sweep", "--p", "0", "--grid", "11"]);
    assert_eq!(code(&out), 0);
    for line in stdout(&out).lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert!(cols[1..].iter().all(|c| *c == "0"), "{line}");
    }
}

#[test]
fn search_is_deterministic_and_reports() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let report = dir.path().join("report.txt");
    let run = |out: &Path, workers: &str| {
        cqc(&[
            "search",
            "--dims",
            "2x2,2x3",
            "--samples",
            "3000",
            "--seed",
            "11",
            "--workers",
            workers,
            "--out",
            s(out),
            "--report",
            s(&report),
        ])
    };
    assert_eq!(code(&run(&a, "1")), 0);
    assert_eq!(code(&run(&b, "3")), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let (header, rows) = read_csv(&a);
    assert_eq!(header, "dim_a,dim_b,index,cqc_sum,qmi,gap");
    assert_eq!(rows.len(), 6000);
    assert_eq!(rows[3000][..3], ["2", "3", "0"]);

    // Report is appended, once per run.
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(text.matches("[summary]").count(), 2);
    assert!(text.contains("[dim 2x3]"));
    assert!(text.contains("counterexamples = 0"));
    assert!(text.contains("conditional on the CQC conjecture"));
}

#[test]
fn search_2x2_at_full_desk_scale_finds_nothing() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("s.csv");
    let out = cqc(&[
        "search",
        "--dims",
        "2x2",
        "--samples",
        "100000",
        "--seed",
        "7",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    assert!(!dir.path().join("s.csv.flagged.jsonl").exists());
}

fn scatter_rows(dir: &TempDir, n: &str, extra: &[&str]) -> Vec<Vec<String>> {
    let out_path = dir.path().join(format!("scatter{n}.csv"));
    let mut args = vec![
        "scatter",
        "--dims",
        n,
        "--samples",
        "4000",
        "--seed",
        "3",
        "--out",
        s(&out_path),
    ];
    args.extend_from_slice(extra);
    assert_eq!(code(&cqc(&args)), 0);
    let (header, rows) = read_csv(&out_path);
    assert_eq!(header, "n,family,lambda,epsilon,cqc_sum,qmi");
    rows
}

#[test]
fn scatter_stays_on_the_allowed_side_of_the_diagonal() {
    let dir = TempDir::new().unwrap();
    for n in [2usize, 3, 4] {
        let rows = scatter_rows(&dir, &format!("{n}x{n}"), &[]);
        let cap = 2.0 * (n as f64).log2();
        for r in &rows {
            assert_eq!(r[0], n.to_string());
            assert!(r[1] == "bell-with-mcm" || r[1] == "mcm-with-mm");
            let (cqc_sum, qmi) = (num(&r[4]), num(&r[5]));
            // Nine significant digits of each column bound the rounding.
            assert!(qmi - cqc_sum >= -1e-7, "{r:?}");
            assert!(qmi <= cap + 1e-9, "{r:?}");
        }
    }
}

#[test]
fn scatter_points_approach_the_boundary_as_epsilon_shrinks() {
    // Off the boundary the gap grows like ε²·log(1/ε): a few 1e-5 bits at
    // ε ≈ 1e-3 and below 1e-6 once ε ≤ 1e-4.
    let dir = TempDir::new().unwrap();
    for n in ["2", "3", "4"] {
        for r in scatter_rows(&dir, n, &[]) {
            if num(&r[3]) <= 1.1e-3 {
                assert!((num(&r[5]) - num(&r[4])).abs() <= 1e-4, "{r:?}");
            }
        }
        for r in scatter_rows(&dir, n, &["--eps-min", "1e-6", "--eps-max", "1e-4"]) {
            assert!((num(&r[5]) - num(&r[4])).abs() <= 1e-6, "{r:?}");
        }
    }
}

#[test]
fn pure_check_passes() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("p.csv");
    let out = cqc(&[
        "pure-check",
        "--dims",
        "2x2,3x3",
        "--samples",
        "2000",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    let (header, rows) = read_csv(&out_path);
    assert_eq!(header, "dim_a,dim_b,index,cqc_sum,qmi,gap");
    assert_eq!(rows.len(), 4000);
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("mode = pure-states"), "{summary}");
}

#[test]
fn flagged_samples_round_trip_through_the_dump() {
    // Near-saturating scatter points land a few ulps below the diagonal;
    // those are dumped as noise negatives without failing the run.
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("sc.csv");
    let dump = dir.path().join("flagged.jsonl");
    let args = [
        "scatter",
        "--dims",
        "2",
        "--samples",
        "4000",
        "--eps-max",
        "1e-2",
        "--out",
        s(&out_path),
        "--dump",
        s(&dump),
    ];
    assert_eq!(code(&cqc(&args)), 0);
    let text = fs::read_to_string(&dump).expect("some sample was flagged");
    for line in text.lines() {
        let d: cqc_core::io::SampleDump = serde_json::from_str(line).unwrap();
        assert_eq!(d.kind, "noise-negative");
        assert!(d.gap < 0.0 && d.gap > -1e-7);
        assert_eq!(d.bases.len(), 4);
        let rho = d.state.into_state().unwrap();
        let report =
            cqc_core::evaluate(&rho, &cqc_core::BasisQuadruple::computational_fourier(2, 2))
                .unwrap();
        assert!((report.gap - d.gap).abs() < 1e-12);
    }
}
