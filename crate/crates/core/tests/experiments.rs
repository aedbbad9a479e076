use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use polyak::experiment::{
    emit_rate_curves, emit_step_histogram, histogram_from_trace, read_table, run_experiment,
    write_curve_csv, write_histogram_csv, CurveRule, ExperimentConfig, FStarPolicy, ProblemKind,
    SUMMARY_HEADER, TRACE_HEADER,
};
use polyak::methods::MethodSpec;
use polyak::oracles::{Confidence, RegularityClass};
use polyak::Execution;

fn small(out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        rows: 40,
        dim: 10,
        mu: 0.01,
        max_iter: 300,
        methods: MethodSpec::ALL.to_vec(),
        out_dir: out.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn contents(files: &[PathBuf]) -> Vec<Vec<u8>> {
    files.iter().map(|f| fs::read(f).unwrap()).collect()
}

#[test]
fn experiments_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_experiment(&small(&dir.path().join("a")), Execution::Parallel).unwrap();
    let b = run_experiment(&small(&dir.path().join("b")), Execution::Parallel).unwrap();
    let c = run_experiment(&small(&dir.path().join("c")), Execution::Sequential).unwrap();
    assert_eq!(a.files.len(), MethodSpec::ALL.len() + 1);
    assert_eq!(contents(&a.files), contents(&b.files));
    assert_eq!(contents(&a.files), contents(&c.files));
}

#[test]
fn empty_method_list_gives_empty_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        methods: Vec::new(),
        ..small(dir.path())
    };
    let out = run_experiment(&cfg, Execution::Parallel).unwrap();
    assert!(out.summary.is_empty());
    let t = read_table(dir.path().join("summary.csv")).unwrap();
    assert_eq!(t.headers, SUMMARY_HEADER);
    assert!(t.rows.is_empty());
}

#[test]
fn emitted_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&small(dir.path()), Execution::Parallel).unwrap();
    for (m, trace) in &out.traces {
        let t = read_table(dir.path().join(format!("trace_{}.csv", m.name()))).unwrap();
        assert_eq!(t.headers, TRACE_HEADER);
        assert_eq!(t.rows.len(), trace.rows.len());
        for (row, r) in t.rows.iter().zip(&trace.rows) {
            assert_eq!(row[0], Some(r.k as f64));
            assert_eq!(row[1], Some(r.f_gap));
            assert_eq!(row[2], Some(r.best_gap));
            assert_eq!(row[3], Some(r.grad_sq));
            assert_eq!(row[4], r.step_or_mu);
            assert_eq!(row[5], r.beta);
        }
    }
    let s = read_table(dir.path().join("summary.csv")).unwrap();
    let names = s.text_column("method").unwrap();
    for (row, (i, sum)) in s.rows.iter().zip(out.summary.iter().enumerate()) {
        assert_eq!(names[i], sum.method.name());
        assert_eq!(row[1], Some(sum.iterations as f64));
        assert_eq!(row[3], Some(sum.final_gap));
        assert_eq!(row[4], Some(sum.best_gap));
    }
    assert!(s
        .text_column("termination")
        .unwrap()
        .iter()
        .all(|t| !t.is_empty()));

    let c = RegularityClass::new(0.1, 1.0).unwrap();
    let curve = emit_rate_curves(c, CurveRule::RegularPolyak, 51, Execution::Sequential).unwrap();
    let path = dir.path().join("curve.csv");
    write_curve_csv(&curve, &path).unwrap();
    let t = read_table(&path).unwrap();
    for (row, p) in t.rows.iter().zip(&curve) {
        assert_eq!(
            (row[0], row[1], row[2]),
            (Some(p.gamma), Some(p.rho), p.rho_analytic)
        );
    }

    let trace = dir.path().join("trace_variant1.csv");
    let hist = histogram_from_trace(&trace, None, 20).unwrap();
    let path = dir.path().join("hist.csv");
    write_histogram_csv(&hist, &path).unwrap();
    let t = read_table(&path).unwrap();
    let total: f64 = t
        .column("proportion")
        .unwrap()
        .iter()
        .map(|p| p.unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn histogram_of_constant_steps_is_one_bin() {
    let steps = vec![1.0; 40];
    let h = emit_step_histogram(&steps, 1.0, 100.0, 25).unwrap();
    assert_eq!(h.iter().filter(|b| b.proportion > 0.0).count(), 1);
    assert_eq!(h[0].proportion, 1.0);
    let mixed: Vec<f64> = (0..97).map(|i| 1.0 + i as f64).collect();
    let h = emit_step_histogram(&mixed, 1.0, 100.0, 7).unwrap();
    assert!((h.iter().map(|b| b.proportion).sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn logistic_and_lasso_pipelines() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let mut text = String::new();
    for i in 0..60 {
        let x = (i as f64 * 0.37).sin();
        let z = (i as f64 * 1.3).cos();
        text.push_str(&format!(
            "{x},{z},{}\n",
            if x + 0.5 * z > 0.1 { "a" } else { "b" }
        ));
    }
    fs::write(&data, text).unwrap();
    let base = format!(
        "dataset = {}\nmethods = gd, variant1, acc2\nmax_iter = 2000\ntol = 1e-6\nfstar = presolve\nout_dir = {}\n",
        data.display(),
        dir.path().join("out").display()
    );
    let cfg = ExperimentConfig::parse(
        &format!("problem = logistic\nreg = 0.01\n{base}"),
        dir.path(),
    )
    .unwrap();
    assert_eq!(cfg.f_star, FStarPolicy::Presolve);
    let out = run_experiment(&cfg, Execution::Parallel).unwrap();
    assert_eq!(out.f_star_confidence, Confidence::Converged);
    assert!(out.summary.iter().all(|s| s.best_gap >= -1e-9));
    let acc = out
        .summary
        .iter()
        .find(|s| s.method == MethodSpec::AccII)
        .unwrap();
    assert!(acc.iterations_to_tol.is_some());

    let target = dir.path().join("t.csv");
    fs::write(
        &target,
        fs::read_to_string(&data)
            .unwrap()
            .replace(",a\n", ",1.5\n")
            .replace(",b\n", ",-0.25\n"),
    )
    .unwrap();
    let lasso = base
        .replace("gd, variant1, acc2", "agm, acc2")
        .replace(&data.display().to_string(), &target.display().to_string());
    let cfg = ExperimentConfig::parse(&format!("problem = lasso\nl1 = 0.1\n{lasso}"), dir.path())
        .unwrap();
    let out = run_experiment(&cfg, Execution::Parallel).unwrap();
    assert!(
        out.summary.iter().all(|s| s.iterations_to_tol.is_some()),
        "{:?}",
        out.summary
    );

    let cfg = ExperimentConfig {
        problem: ProblemKind::Logistic { reg: 0.01 },
        dataset: None,
        ..small(dir.path())
    };
    assert!(run_experiment(&cfg, Execution::Parallel).is_err());
}

fn polyak(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_polyak"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn cli_subcommands_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("exp.cfg"),
        "# small run\nrows = 30\ndim = 8\nmu = 0.05\nmethods = gd, acc1\n",
    )
    .unwrap();

    let (code, stdout, _) = polyak(&["run", "exp.cfg", "--out-dir", "o1", "--seed", "3"], d);
    assert_eq!(code, 0, "{stdout}");
    let (code, _, _) = polyak(
        &[
            "run",
            "exp.cfg",
            "--out-dir",
            "o2",
            "--seed",
            "3",
            "--sequential",
        ],
        d,
    );
    assert_eq!(code, 0);
    for f in ["trace_gd.csv", "trace_acc1.csv", "summary.csv"] {
        assert_eq!(
            fs::read(d.join("o1").join(f)).unwrap(),
            fs::read(d.join("o2").join(f)).unwrap(),
            "{f}"
        );
    }

    let (code, stdout, _) = polyak(&["rates", "--mu", "0.1", "--out-dir", "r"], d);
    assert_eq!(code, 0);
    assert!(stdout.contains("0.669421"), "{stdout}");
    assert_eq!(
        read_table(d.join("r/rates_variant1.csv"))
            .unwrap()
            .rows
            .len(),
        1001
    );
    let (code, _, _) = polyak(
        &[
            "rates",
            "--mu",
            "0",
            "--rule",
            "variant2",
            "--kappas",
            "0.01,0.1,1",
            "--out-dir",
            "r",
        ],
        d,
    );
    assert_eq!(code, 0);
    assert_eq!(
        read_table(d.join("r/kappa_sweep_variant2.csv"))
            .unwrap()
            .rows
            .len(),
        3
    );

    let (code, stdout, _) = polyak(
        &[
            "pep",
            "--mu",
            "0.01",
            "--rule",
            "polyak",
            "--sweep",
            "--out-dir",
            "p",
        ],
        d,
    );
    assert_eq!(code, 0);
    assert!(stdout.contains("max rho = 0.970591"), "{stdout}");
    let (code, stdout, _) = polyak(&["pep", "--mu", "0.1", "--gamma", "1.8181818181818181"], d);
    assert_eq!(code, 0);
    assert!(stdout.contains("rho = 0.669421"), "{stdout}");

    let (code, stdout, _) = polyak(
        &[
            "certify",
            "--tags",
            "distance,robust",
            "--samples",
            "50",
            "--out-dir",
            "c",
        ],
        d,
    );
    assert_eq!(code, 0, "{stdout}");
    assert_eq!(
        read_table(d.join("c/certificates.csv")).unwrap().rows.len(),
        40
    );

    let (code, _, _) = polyak(
        &[
            "hist",
            "o1/trace_acc1.csv",
            "--bins",
            "10",
            "--out-dir",
            "h",
        ],
        d,
    );
    assert_eq!(code, 0);
    assert_eq!(
        read_table(d.join("h/histogram.csv")).unwrap().rows.len(),
        10
    );
    let (code, _, _) = polyak(
        &["hist", "o1/trace_gd.csv", "--bins", "10", "--out-dir", "h"],
        d,
    );
    assert_eq!(code, 0);
    assert_eq!(read_table(d.join("h/histogram.csv")).unwrap().rows.len(), 1);

    // config errors
    fs::write(d.join("bad.cfg"), "colour = blue\n").unwrap();
    assert_eq!(polyak(&["run", "bad.cfg"], d).0, 2);
    assert_eq!(polyak(&["run", "exp.cfg", "--fstar", "presolve"], d).0, 2);
    fs::write(
        d.join("missing.cfg"),
        "problem = logistic\ndataset = nowhere.csv\nfstar = presolve\n",
    )
    .unwrap();
    assert_eq!(polyak(&["run", "missing.cfg"], d).0, 2);
    // data errors
    fs::write(d.join("broken.csv"), "1,2,1\n3,4\n").unwrap();
    fs::write(
        d.join("data.cfg"),
        "problem = logistic\ndataset = broken.csv\nfstar = presolve\n",
    )
    .unwrap();
    let (code, _, stderr) = polyak(&["run", "data.cfg"], d);
    assert_eq!(code, 3, "{stderr}");
    assert!(stderr.contains("broken.csv"));
    // numerical aborts
    assert_eq!(polyak(&["rates", "--mu", "2", "--l", "1"], d).0, 4);
    assert_eq!(polyak(&["pep", "--mu", "0.1", "--gamma", "50"], d).0, 4);
}
