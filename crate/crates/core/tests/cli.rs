use std::process::{Command, Output};

use stbc::cli;
use stbc::codebook::{by_name, parse_datasheet};
use stbc::fastdecode::SplitPolicy;
use stbc::sim::parse_csv;

fn stbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stbc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn line_value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no `{key}` line in\n{text}"))
}

#[test]
fn list_codes_reports_kappa() {
    let o = stbc(&["list-codes"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().find(|l| l.starts_with("mido_a4_half_imag ")).unwrap();
    assert!(row.contains("kappa=10"), "{row}");
    assert!(row.contains("worst=4|S|^10"), "{row}");
    let alamouti = out.lines().find(|l| l.starts_with("alamouti ")).unwrap();
    assert!(alamouti.contains("kappa=1 "), "{alamouti}");
    assert_eq!(out.lines().count(), stbc::codebook::CODE_NAMES.len());
    assert_eq!(out, cli::list_codes().unwrap());
}

#[test]
fn bounds_for_rational_center() {
    let o = stbc(&["bounds", "--center", "Q", "--index", "4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(line_value(&out, "min_discriminant"), "2^12*3^12");
    assert_eq!(line_value(&out, "min_discriminant_value"), "2176782336");
    assert!(line_value(&out, "delta_bound").starts_with("0.0680"));
    assert_eq!(line_value(&out, "orthogonal_reference"), "0.0625");
    assert_eq!(line_value(&out, "volume"), "46656");
}

#[test]
fn analyze_c1() {
    let o = stbc(&["analyze", "--code", "mido_c1", "--range", "1", "--seed", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(line_value(&out, "volume"), "160000");
    assert_eq!(line_value(&out, "delta"), "0.05");
    assert_eq!(line_value(&out, "zero_dets"), "0");
    assert_eq!(line_value(&out, "seed"), "3");
    assert_eq!(out, cli::analyze_report("mido_c1", 1, 3).unwrap());
}

#[test]
fn analyze_default_seed_is_printed() {
    let out = stdout(&stbc(&["analyze", "--code", "alamouti", "--range", "2"]));
    assert_eq!(line_value(&out, "seed"), stbc::lattice::DEFAULT_SEED.to_string());
    assert_eq!(line_value(&out, "mindet"), "1");
}

#[test]
fn pattern_alamouti_is_fully_orthogonal() {
    let o = stbc(&["pattern", "--code", "alamouti", "--samples", "50", "--seed", "9"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mask: Vec<&str> = out.lines().skip_while(|l| *l != "mask").skip(1).take(4).collect();
    assert_eq!(mask, ["0 1 1 1", "1 0 1 1", "1 1 0 1", "1 1 1 0"]);
    assert_eq!(line_value(&out, "kappa"), "1");
    assert_eq!(out, cli::pattern_report("alamouti", 50, 9, SplitPolicy::BestPrefix).unwrap());
}

#[test]
fn decode_test_matches_oracle() {
    let o = stbc(&["decode-test", "--code", "mido_c2", "--alphabet", "pam:2", "--trials", "5", "--seed", "4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(line_value(&out, "metric_mismatches"), "0");
    assert_eq!(line_value(&out, "argmin_mismatches"), "0");
    assert_eq!(line_value(&out, "grouped"), "2|S|^12");
}

#[test]
fn oversized_oracle_exits_numerical() {
    let o = stbc(&["decode-test", "--code", "code_6x3", "--alphabet", "pam:2", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(stbc(&["analyze", "--code", "nope"]).status.code(), Some(2));
    assert_eq!(stbc(&["analyze"]).status.code(), Some(2));
    assert_eq!(stbc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(stbc(&["bounds", "--center", "Q(sqrt7)", "--index", "4"]).status.code(), Some(2));
    assert_eq!(stbc(&["analyze", "--code", "alamouti", "--range", "0"]).status.code(), Some(2));
    assert_eq!(stbc(&["decode-test", "--code", "alamouti", "--alphabet", "pam:3"]).status.code(), Some(2));
}

#[test]
fn simulate_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# smoke run\ncode = alamouti\nn_r = 1\nalphabet = pam:2\nsnr = 0, 6\nframes = 400\nseed = 5\n").unwrap();
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert!(stbc(&args).status.success());
        (
            std::fs::read_to_string(&out).unwrap(),
            std::fs::read_to_string(dir.path().join(format!("{name}.meta"))).unwrap(),
        )
    };
    let (a, meta) = run("a.csv", &[]);
    let (b, _) = run("b.csv", &["--workers", "3"]);
    let (c, meta_c) = run("c.csv", &["--seed", "6"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(meta.lines().any(|l| l == "seed=5"));
    assert!(meta_c.lines().any(|l| l == "seed=6"));
    let pts = parse_csv(&a).unwrap();
    assert_eq!(pts.len(), 2);
    assert!(pts.iter().all(|p| p.frames == 400));
}

#[test]
fn simulate_default_seed_recorded() {
    let o = stbc(&["simulate", "--code", "alamouti", "--snr", "inf", "--frames", "20"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == format!("# seed={}", stbc::sim::DEFAULT_SEED)));
    assert!(out.lines().any(|l| l.starts_with("inf,20,0,0,")));
}

#[test]
fn simulate_rejects_unknown_config_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "code = alamouti\nsnr = 1\ncolour = red\n").unwrap();
    let o = stbc(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn hasse_file_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("inv.txt");
    std::fs::write(&f, "# primes above 2 and 3\nfinite p2 2 1 4\nfinite p3 3 1 4\nreal 1\n").unwrap();
    let out = stdout(&stbc(&["hasse", "--file", f.to_str().unwrap()]));
    assert_eq!(line_value(&out, "admissible"), "true");
    assert_eq!(line_value(&out, "index"), "4");
    assert_eq!(line_value(&out, "discriminant_value"), "2176782336");

    std::fs::write(&f, "finite p3 3 1 3\n").unwrap();
    let out = stdout(&stbc(&["hasse", "--file", f.to_str().unwrap()]));
    assert_eq!(out, "admissible false\n");

    std::fs::write(&f, "finite p3 3 2 4\n").unwrap();
    assert_eq!(stbc(&["hasse", "--file", f.to_str().unwrap()]).status.code(), Some(2));

    let table = stdout(&stbc(&["hasse", "--table"]));
    assert!(table.lines().filter(|l| !l.contains("excluded")).all(|l| l.contains("admissible=true")));
    for l in table.lines().filter(|l| !l.contains("excluded")) {
        assert_eq!(line_kv(l, "index"), line_kv(l, "expected"), "{l}");
    }
}

fn line_kv<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace().find_map(|w| w.strip_prefix(key).and_then(|r| r.strip_prefix('='))).unwrap()
}

#[test]
fn datasheet_round_trips() {
    let out = stdout(&stbc(&["datasheet", "--code", "mido_a4_integral"]));
    let back = parse_datasheet(&out).unwrap();
    let code = by_name("mido_a4_integral").unwrap();
    assert_eq!(back.k(), code.k());
    for (a, b) in back.basis.iter().zip(&code.basis) {
        assert!(a.max_abs_diff(b) < 1e-12);
    }
}
