use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn dgof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgof")).args(args).output().expect("runs dgof")
}

fn ok(args: &[&str]) -> String {
    let out = dgof(args);
    assert!(
        out.status.success(),
        "dgof {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    dgof(args).status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn constant_matrix(n: usize, p: f64) -> String {
    let mut t = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| if i == j { "0".into() } else { p.to_string() }).collect();
        t.push_str(&row.join(","));
        t.push('\n');
    }
    t
}

fn field(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
        .to_owned()
}

#[test]
fn sample_constant_zero_gives_empty_edge_list() {
    let dir = TempDir::new().unwrap();
    let model = write(dir.path(), "zero.json", r#"{"type": "constant", "value": 0.0}"#);
    let out = dir.path().join("o");
    ok(&["sample", s(&model), "--n", "20", "--seed", "4", "--out", s(&out)]);
    assert_eq!(fs::read_to_string(out.join("sample.edges")).unwrap(), "");
    let latent = fs::read_to_string(out.join("sample.latent.csv")).unwrap();
    assert_eq!(latent.lines().count(), 21);
    let config = fs::read_to_string(out.join("sample.config")).unwrap();
    assert!(config.contains("seed = 4") && config.contains("n = 20"), "{config}");
}

#[test]
fn sample_is_deterministic_and_needs_n_for_graphons() {
    let dir = TempDir::new().unwrap();
    let model = write(dir.path(), "p.csv", &constant_matrix(30, 0.2));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["sample", s(&model), "--seed", "9", "--out", s(&a)]);
    ok(&["sample", s(&model), "--seed", "9", "--out", s(&b)]);
    assert_eq!(fs::read(a.join("sample.edges")).unwrap(), fs::read(b.join("sample.edges")).unwrap());
    let graphon = write(dir.path(), "g.json", r#"{"type": "constant", "value": 0.5}"#);
    assert_eq!(code(&["sample", s(&graphon), "--out", s(&a)]), 2);
}

#[test]
fn sampled_er_density_is_calibrated() {
    let dir = TempDir::new().unwrap();
    let n = 50;
    let model = write(dir.path(), "p.csv", &constant_matrix(n, 0.3));
    let runs = 100;
    let mut edges = 0usize;
    for seed in 0..runs {
        let out = dir.path().join(format!("r{seed}"));
        ok(&["sample", s(&model), "--seed", &seed.to_string(), "--out", s(&out)]);
        edges += fs::read_to_string(out.join("sample.edges")).unwrap().lines().count();
    }
    let pairs = (n * (n - 1) / 2 * runs as usize) as f64;
    let density = edges as f64 / pairs;
    let se = (0.3 * 0.7 / pairs).sqrt();
    assert!((density - 0.3).abs() < 4.0 * se, "density {density}");
}

#[test]
fn er_null_on_a_cycle_is_not_rejected() {
    let dir = TempDir::new().unwrap();
    let cycle: String = (0..12).map(|i| format!("{i} {}\n", (i + 1) % 12)).collect();
    let g = write(dir.path(), "cycle.edges", &cycle);
    let report = ok(&["test", s(&g), "--null", "er"]);
    assert!(field(&report, "z").parse::<f64>().unwrap() < 0.0);
    assert_eq!(field(&report, "decision"), "do not reject");
    assert_eq!(field(&report, "n"), "12");
    // Nothing is written without --out.
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn her_and_eg_nulls_and_report_file() {
    let dir = TempDir::new().unwrap();
    let model = write(dir.path(), "p.csv", &constant_matrix(40, 0.25));
    let out = dir.path().join("o");
    ok(&["sample", s(&model), "--seed", "1", "--out", s(&out)]);
    let g = out.join("sample.edges");
    let her = ok(&["test", s(&g), "--null", &format!("her:{}", s(&model)), "--alpha", "0.1", "--out", s(&out)]);
    assert_eq!(field(&her, "alpha"), "0.1");
    assert_eq!(fs::read_to_string(out.join("test.report")).unwrap(), her);
    let graphon = write(dir.path(), "c.json", r#"{"type": "constant", "value": 0.25}"#);
    let eg = ok(&["test", s(&g), "--null", &format!("eg:{}", s(&graphon)), "--nodes", "40"]);
    let p: f64 = field(&eg, "p_value").parse().unwrap();
    assert!((0.0..=1.0).contains(&p));
}

fn covariate_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    // Two covariates on 30 nodes, graph drawn by hand from a deterministic rule.
    let n = 30;
    let mut cov = String::from("i,j,x1,x2\n");
    let mut edges = String::new();
    for i in 0..n {
        for j in i + 1..n {
            let x1 = ((i * 7 + j * 3) % 11) as f64 / 10.0;
            let x2 = ((i + j) % 5) as f64 / 4.0;
            cov.push_str(&format!("{i},{j},{x1},{x2}\n"));
            if (i * 13 + j * 29) % 7 < 2 + (x1 * 2.0) as usize {
                edges.push_str(&format!("{i} {j}\n"));
            }
        }
    }
    (write(dir, "g.edges", &edges), write(dir, "cov.csv", &cov))
}

#[test]
fn covariate_null_fits_then_tests() {
    let dir = TempDir::new().unwrap();
    let (g, cov) = covariate_fixture(dir.path());
    let report = ok(&["test", s(&g), "--null", &format!("covariates:{}", s(&cov))]);
    for key in ["coef_intercept", "coef_x1", "coef_x2", "fit_converged", "statistic", "p_value"] {
        field(&report, key);
    }
    let out = dir.path().join("fit");
    ok(&["fit-null", s(&g), "--covariates", s(&cov), "--out", s(&out)]);
    let table = fs::read_to_string(out.join("fit.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("term,estimate,std_error"));
    assert_eq!(table.lines().count(), 4);
    let via_matrix = ok(&["test", s(&g), "--null", &format!("her:{}", s(&out.join("null_matrix.csv")))]);
    // Same decision as the one-step covariate mode.
    assert_eq!(field(&via_matrix, "decision"), field(&report, "decision"));
}

#[test]
fn exit_codes_and_no_partial_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    // Usage: clap-level and config-level.
    assert_eq!(code(&["test"]), 2);
    assert_eq!(code(&["bogus"]), 2);
    let bad_cfg = write(dir.path(), "bad.cfg", "[study]\ndesign = her\ncolour = red\n[grid]\nsize = 3\n");
    let o = dgof(&["power", s(&bad_cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("study.colour") && err.contains("grid.size"), "{err}");
    let g = write(dir.path(), "g.edges", "0 1\n1 2\n");
    assert_eq!(code(&["test", s(&g), "--null", "er", "--alpha", "1.5"]), 2);
    // Data: missing and malformed files, dimension mismatch.
    assert_eq!(code(&["test", s(&dir.path().join("none.edges")), "--null", "er"]), 3);
    let junk = write(dir.path(), "junk.edges", "0 x\n");
    assert_eq!(code(&["test", s(&junk), "--null", "er"]), 3);
    let model = write(dir.path(), "p.csv", &constant_matrix(3, 0.5));
    let big = write(dir.path(), "big.edges", "0 7\n");
    assert_eq!(code(&["test", s(&big), "--null", &format!("her:{}", s(&model))]), 3);
    // Numerical: degenerate null on an empty graph.
    let empty = write(dir.path(), "empty.edges", "");
    assert_eq!(code(&["test", s(&empty), "--null", "er", "--nodes", "10", "--out", s(&out)]), 4);
    assert!(!out.exists(), "failed runs must not leave output");
}

fn power_config(dir: &Path, body: &str) -> PathBuf {
    write(dir, "power.cfg", body)
}

#[test]
fn minimal_power_config_runs_with_ten_replicates() {
    let dir = TempDir::new().unwrap();
    let cfg = power_config(
        dir.path(),
        "[study]\ndesign = her\nreplicates = 10\nseed = 5\n[grid]\nn = 40\nrho_star = 0.1\nbeta = 0, 1, 2\n",
    );
    let out = dir.path().join("o");
    let o = dgof(&["power", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let csv = fs::read_to_string(out.join("power.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,rho_star,beta,power_analytic,power_empirical,ci_halfwidth,replicates");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 7 && l.ends_with(",10")));
    let echo = fs::read_to_string(out.join("power.config")).unwrap();
    assert!(echo.contains("seed = 5") && echo.contains("alpha = 0.05") && echo.contains("beta = 0, 1, 2"));
}

#[test]
fn figure_panel_config_gives_monotone_analytic_power() {
    let dir = TempDir::new().unwrap();
    let cfg = power_config(
        dir.path(),
        "[study]\ndesign = her\nreplicates = 10\n[grid]\nn = 316\nrho_star = 0.0316227766\n",
    );
    let out = dir.path().join("o");
    ok(&["power", s(&cfg), "--out", s(&out), "--seed", "2"]);
    let csv = fs::read_to_string(out.join("power.csv")).unwrap();
    let analytic: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(analytic.len(), 11);
    assert!(analytic.windows(2).all(|w| w[1] >= w[0]), "{analytic:?}");
    assert!((analytic[0] - 0.05).abs() < 1e-6);
}

#[test]
fn studies_are_byte_identical_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let configs = [
        ("power", "power.csv", "[study]\ndesign = eg\nreplicates = 40\n[grid]\nn = 60\nrho_star = 0.1\nbeta = 1, 1.5, 2\n"),
        ("power", "power.csv", "[study]\ndesign = her\nreplicates = 40\n[grid]\nn = 60\nrho_star = 0.1\nbeta = 0, 2\n"),
        ("qq", "qq.csv", "[study]\nreplicates = 60\n[grid]\nn = 50\n[scenarios]\nvanish = 0, 0.8\nthin = 0.5\n"),
        ("simulate", "size.csv", "[study]\nreplicates = 50\n[grid]\nn = 30, 60\np = 0.5\n"),
    ];
    for (k, (cmd, file, body)) in configs.iter().enumerate() {
        let cfg = write(dir.path(), &format!("c{k}.cfg"), body);
        let mut outputs = Vec::new();
        for threads in ["1", "4", "1"] {
            let out = dir.path().join(format!("o{k}_{}", outputs.len()));
            ok(&[cmd, s(&cfg), "--seed", "31", "--threads", threads, "--out", s(&out)]);
            outputs.push((fs::read(out.join(file)).unwrap(), fs::read(out.join(file.replace(".csv", ".config"))).unwrap()));
        }
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{cmd} output depends on threads");
    }
}

#[test]
fn seed_flag_changes_output_and_overrides_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.cfg", "[study]\nreplicates = 30\nseed = 1\n[grid]\nn = 40\n");
    let run = |extra: &[&str], name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["simulate", s(&cfg), "--out", s(&out)];
        args.extend_from_slice(extra);
        ok(&args);
        fs::read(out.join("size.csv")).unwrap()
    };
    let from_config = run(&[], "a");
    assert_eq!(from_config, run(&["--seed", "1"], "b"));
    assert_ne!(from_config, run(&["--seed", "2"], "c"));
}
