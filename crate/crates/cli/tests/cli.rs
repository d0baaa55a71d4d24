use std::path::PathBuf;
use std::process::{Command, Output};

use expexp_core::density::shift_frac_oracle;

fn expexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expexp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("expexp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn champernowne_fracs_match_the_digit_shift() {
    let o = expexp(&["fracs", "-s", "line=champernowne", "-s", "count=64"]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["k", "frac", "error_bound"]);
    let mut even = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let k: u64 = rec[0].parse().unwrap();
        if k % 2 == 1 {
            continue;
        }
        // The printed digits are decimal; compare in double precision with
        // the stated bound plus one unit of f64 rounding.
        let frac: f64 = rec[1].parse().unwrap();
        let bound: f64 = rec[2].parse().unwrap();
        let oracle = shift_frac_oracle(k / 2, 128).unwrap().value_f64();
        let d = (frac - oracle).abs();
        assert!(
            d.min(1.0 - d) <= bound + 2e-16,
            "k = {k}: {frac} vs {oracle}"
        );
        even += 1;
    }
    assert_eq!(even, 32);
}

#[test]
fn vertical_line_renders_a_circle() {
    let o = expexp(&[
        "render",
        "-s",
        "curve=spiral",
        "-s",
        "alpha=0",
        "-s",
        "window=-2,2,-2,2",
        "-s",
        "resolution=400",
    ]);
    assert!(o.status.success());
    let svg = stdout(&o);
    let points = svg
        .split("points=\"")
        .nth(1)
        .unwrap()
        .split('"')
        .next()
        .unwrap();
    // 800 px span 4 units; the unit circle has pixel radius 200 around (400, 400).
    for p in points.split(' ') {
        let (x, y) = p.split_once(',').unwrap();
        let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
        assert!(((x - 400.0).hypot(y - 400.0) - 200.0).abs() < 1e-3);
    }
}

#[test]
fn empty_window_is_an_error() {
    let o = expexp(&["render", "-s", "alpha=0", "-s", "window=5,6,5,6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("window"));
}

#[test]
fn config_errors_carry_line_and_column() {
    let path = scratch("bad.cfg");
    std::fs::write(&path, "# run\nalpha = 0.1\ncount = ten\n").unwrap();
    let o = expexp(&["fracs", "-c", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains("bad.cfg:3:9:"), "{err}");

    let o = expexp(&["fracs", "-s", "colour=red"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--set:1:1:"));

    assert_eq!(expexp(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(expexp(&["--help"]).status.code(), Some(0));
}

#[test]
fn overrides_apply_after_the_file() {
    let path = scratch("run.cfg");
    std::fs::write(&path, "alpha = 0.1\nk_max = 5\n").unwrap();
    let o = expexp(&["crossings", "-c", path.to_str().unwrap(), "-s", "k_max=2"]);
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("{\"k\":0,\"t\":\""));
    let rec: serde_json::Value = serde_json::from_str(&lines[2]).unwrap();
    assert_eq!(rec["k"], 2);
    assert!(rec["frac"].is_string() && rec["err"].is_string());
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let runs: [&[&str]; 3] = [
        &["gaps", "-s", "alpha=0.2", "-s", "count=300"],
        &["render", "-s", "curve=fig3", "-s", "resolution=300"],
        &[
            "sample-thm1",
            "-s",
            "lines=3",
            "-s",
            "count=300",
            "-s",
            "n_logr=8",
            "-s",
            "n_theta=8",
        ],
    ];
    for args in runs {
        let a = expexp(args);
        let b = expexp(args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn distribution_csv_has_the_masses() {
    let out = scratch("dist.csv");
    let o = expexp(&[
        "distribution",
        "-s",
        "t=50,200",
        "-s",
        "samples=20000",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rdr.headers().unwrap(),
        vec![
            "T",
            "M",
            "eta",
            "mass_0",
            "mass_1",
            "mass_inf",
            "mass_other"
        ]
    );
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let total: f64 = (3..7).map(|i| r[i].parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn missing_witness_exits_two() {
    let o = expexp(&[
        "witness",
        "-s",
        "alpha=0.3",
        "-s",
        "target_re=1e6",
        "-s",
        "count=10",
        "-s",
        "eps=1e-9",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("\"error\""));
}

#[test]
fn precision_ceiling_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_expexp"))
        .args([
            "crossings",
            "-s",
            "alpha=1",
            "-s",
            "k_min=400",
            "-s",
            "k_max=400",
        ])
        .env("EXPEXP_PRECISION_CEILING", "200")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ceiling"));
}

#[test]
fn cantor_tree_round_trips_through_mdp() {
    let tree = scratch("tree.txt");
    let o = expexp(&[
        "cantor",
        "-s",
        "p_im=0.4",
        "-s",
        "cap=4",
        "-s",
        "depth=2",
        "-s",
        "verify=true",
        "-o",
        tree.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = expexp(&["mdp", "-s", &format!("tree_in={}", tree.display())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("true,"));
}
