use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dantzig::io;
use dantzig_core::bench::gen_instance;
use dantzig_core::classify::{
    gen_planted, misdiagnosis_count, predict_labels, select_top_variance, train_reduced_default, LabeledDataset,
    PlantedSpec, DELTA_GRID,
};
use dantzig_core::fpsolver::solve_with_operator;
use dantzig_core::linop::POWER_SEED;
use dantzig_core::{DantzigOperator, Matrix, NullClock, SolverConfig};
use serde_json::Value;

fn dantzig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dantzig"))
        .args(args)
        .env_remove("DANTZIG_JOBS")
        .output()
        .expect("binary runs")
}

fn summary(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().last().expect("one JSON line");
    let v: Value = serde_json::from_str(line).expect("valid JSON");
    assert_eq!(v["schema"], 1);
    v
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes a synthetic (12, 8) instance and returns the paths of X and y.
fn write_instance(dir: &Path, seed: u64) -> (PathBuf, PathBuf) {
    let inst = gen_instance(12, 8, 2, 0.05, seed).unwrap();
    let (x, y) = (dir.join("x.csv"), dir.join("y.csv"));
    io::write_matrix(&x, inst.problem.x()).unwrap();
    io::write_vector(&y, inst.problem.y()).unwrap();
    (x, y)
}

#[test]
fn solve_matches_the_library_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = write_instance(dir.path(), 3);
    let out = dir.path().join("beta.csv");
    let run = dantzig(&["solve", "--x", p(&x), "--y", p(&y), "--delta", "0.2", "--out", p(&out)]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let s = summary(&run);
    assert_eq!(s["command"], "solve");
    for key in [
        "iterations",
        "seconds",
        "termination",
        "l1_norm",
        "feasibility_violation",
    ] {
        assert!(!s[key].is_null(), "missing {key}");
    }

    let problem =
        dantzig_core::ProblemInstance::from_design(io::read_matrix(&x).unwrap(), io::read_vector(&y).unwrap(), 0.2)
            .unwrap();
    let op = DantzigOperator::with_seed(&problem, POWER_SEED).unwrap();
    let n = op.norm_estimate();
    let cfg = SolverConfig {
        tol: 0.1,
        ..SolverConfig::new(0.2 * n * n)
    };
    let res = solve_with_operator(&op, &cfg, &NullClock).unwrap();
    let written = io::read_vector(&out).unwrap();
    assert_eq!(written.len(), res.beta_hat.len());
    for (a, b) in written.iter().zip(&res.beta_hat) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert_eq!(s["iterations"], res.iterations);
    assert_eq!(s["termination"], res.termination.as_str());
}

#[test]
fn solve_honours_scheme_and_postprocess_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = write_instance(dir.path(), 5);
    let run = dantzig(&[
        "solve",
        "--x",
        p(&x),
        "--y",
        p(&y),
        "--delta",
        "0.2",
        "--scheme",
        "beta-first",
        "--no-postprocess",
        "--epsilon",
        "1e-8",
        "--eta",
        "1000000",
        "--change-measure",
        "primal-dual",
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let s = summary(&run);
    assert_eq!(s["termination"], "RelChange");
}

#[test]
fn solve_rejects_bad_input_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = write_instance(dir.path(), 1);

    let short_y = dir.path().join("short.csv");
    io::write_vector(&short_y, &[1.0, 2.0, 3.0]).unwrap();
    let run = dantzig(&["solve", "--x", p(&x), "--y", p(&short_y), "--delta", "0.2"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("--y"));

    let zero_col = dir.path().join("zero.csv");
    let mut m = io::read_matrix(&x).unwrap();
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            data.push(if j == 2 { 0.0 } else { m.get(i, j) });
        }
    }
    m = Matrix::from_row_major(rows, cols, data).unwrap();
    io::write_matrix(&zero_col, &m).unwrap();
    let run = dantzig(&["solve", "--x", p(&zero_col), "--y", p(&y), "--delta", "0.2"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("--x"));

    let run = dantzig(&["solve", "--x", p(&x), "--y", p(&y), "--delta", "-0.5"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("--delta"));

    let run = dantzig(&["solve", "--x", p(&x), "--y", p(&y), "--delta", "0.2", "--lambda", "1e9"]);
    assert_eq!(run.status.code(), Some(2));

    let run = dantzig(&["solve", "--x", "/nonexistent/x.csv", "--y", p(&y), "--delta", "0.2"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("--x"));

    let run = dantzig(&["solve", "--x", p(&x)]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(dantzig(&["--help"]).status.code(), Some(0));
    assert_eq!(dantzig(&["--version"]).status.code(), Some(0));
    assert_eq!(dantzig(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn oracle_check_passes_and_validates_sizes() {
    let run = dantzig(&[
        "oracle-check",
        "--n",
        "12",
        "--p",
        "8",
        "--delta",
        "0.2",
        "--seed",
        "7",
        "--trials",
        "10",
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let s = summary(&run);
    assert!(s["max_gap"].as_f64().unwrap() <= 1e-4);
    assert!(s["max_violation"].as_f64().unwrap() <= 1e-6);

    for bad in [
        ["--n", "25", "--p", "8", "--trials", "1"],
        ["--n", "12", "--p", "30", "--trials", "1"],
        ["--n", "12", "--p", "8", "--trials", "0"],
    ] {
        let mut args = vec!["oracle-check", "--delta", "0.2", "--seed", "1"];
        args.extend(bad);
        assert_eq!(dantzig(&args).status.code(), Some(2), "{bad:?}");
    }
}

fn strip_wall_seconds(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "wall_seconds").unwrap();
    text.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(col);
            f.join(",")
        })
        .collect()
}

#[test]
fn bench_output_is_independent_of_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut lines = Vec::new();
    for jobs in ["1", "3"] {
        let out_dir = dir.path().join(format!("jobs{jobs}"));
        let run = dantzig(&[
            "bench",
            "--m-list",
            "1,2",
            "--sigma-list",
            "0.01,0.05",
            "--reps",
            "2",
            "--seed",
            "11",
            "--methods",
            "fp,ladm",
            "--out-dir",
            p(&out_dir),
            "--scale",
            "8,20,1",
            "--jobs",
            jobs,
        ]);
        assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
        let s = summary(&run);
        assert_eq!(s["records"], 16);
        assert_eq!(s["failed"], 0);
        assert!(out_dir.join("aggregate.csv").exists());
        lines.push(strip_wall_seconds(&out_dir.join("records.csv")));
    }
    assert_eq!(lines[0], lines[1]);
    assert_eq!(lines[0].len(), 17);
}

#[test]
fn bench_rejects_bad_flags() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "bench",
        "--m-list",
        "1",
        "--sigma-list",
        "0.05",
        "--seed",
        "1",
        "--out-dir",
        p(dir.path()),
    ];
    let mut args = base.to_vec();
    args.extend(["--reps", "0"]);
    assert_eq!(dantzig(&args).status.code(), Some(2));
    let mut args = base.to_vec();
    args.extend(["--reps", "1", "--scale", "8,20"]);
    assert_eq!(dantzig(&args).status.code(), Some(2));
    let mut args = base.to_vec();
    args.extend(["--reps", "1", "--methods", "simplex"]);
    assert_eq!(dantzig(&args).status.code(), Some(2));
    let mut args = base.to_vec();
    args.extend(["--reps", "1", "--jobs", "0"]);
    assert_eq!(dantzig(&args).status.code(), Some(2));
}

struct ClassifyFiles {
    train_x: PathBuf,
    train_y: PathBuf,
    test_x: PathBuf,
    test_y: PathBuf,
}

fn write_planted(dir: &Path, spec: &PlantedSpec, seed: u64) -> ClassifyFiles {
    let data = gen_planted(spec, seed).unwrap();
    let files = ClassifyFiles {
        train_x: dir.join("train_x.csv"),
        train_y: dir.join("train_y.csv"),
        test_x: dir.join("test_x.csv"),
        test_y: dir.join("test_y.csv"),
    };
    io::write_matrix(&files.train_x, &data.train.raw_features()).unwrap();
    io::write_labels(&files.train_y, data.train.labels()).unwrap();
    io::write_matrix(&files.test_x, &data.test.raw_features()).unwrap();
    io::write_labels(&files.test_y, data.test.labels()).unwrap();
    files
}

#[test]
fn classify_matches_the_library_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let spec = PlantedSpec {
        n_features: 120,
        ..PlantedSpec::default()
    };
    let f = write_planted(dir.path(), &spec, 2);
    let out = dir.path().join("classify.csv");
    let raw = dir.path().join("raw.csv");
    let run = dantzig(&[
        "classify",
        "--train-x",
        p(&f.train_x),
        "--train-y",
        p(&f.train_y),
        "--test-x",
        p(&f.test_x),
        "--test-y",
        p(&f.test_y),
        "--n-top",
        "20",
        "--out",
        p(&out),
        "--emit-raw",
        p(&raw),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let s = summary(&run);
    assert_eq!(s["deltas"], DELTA_GRID.len());

    let train = LabeledDataset::new(
        io::read_matrix(&f.train_x).unwrap(),
        io::read_labels(&f.train_y).unwrap(),
    )
    .unwrap();
    let test = LabeledDataset::new(io::read_matrix(&f.test_x).unwrap(), io::read_labels(&f.test_y).unwrap()).unwrap();
    let support = select_top_variance(&train, 20).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), DELTA_GRID.len());
    for (row, &delta) in rows.iter().zip(DELTA_GRID.iter()) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0].parse::<f64>().unwrap(), delta);
        let model = train_reduced_default(&train, &support, delta).unwrap();
        let (_, labels) = predict_labels(test.features(), &model.beta_hat).unwrap();
        let expected = misdiagnosis_count(&labels, test.labels()).unwrap();
        assert_eq!(fields[1].parse::<usize>().unwrap(), expected, "delta {delta}");
        assert_eq!(fields[2].parse::<usize>().unwrap(), model.result.iterations);
    }
    let raw_lines = std::fs::read_to_string(&raw).unwrap().lines().count();
    assert_eq!(raw_lines, 1 + DELTA_GRID.len() * test.n_samples());
}

#[test]
fn classify_rejects_mismatched_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = PlantedSpec {
        n_features: 40,
        ..PlantedSpec::default()
    };
    let (wide_dir, narrow_dir) = (dir.path().join("wide"), dir.path().join("narrow"));
    std::fs::create_dir(&wide_dir).unwrap();
    std::fs::create_dir(&narrow_dir).unwrap();
    let f = write_planted(&wide_dir, &spec, 4);
    let narrow = write_planted(&narrow_dir, &PlantedSpec { n_features: 30, ..spec }, 4);
    let out = dir.path().join("c.csv");
    let run = |tx: &Path, ty: &Path, sx: &Path, sy: &Path, n_top: &str| {
        dantzig(&[
            "classify",
            "--train-x",
            p(tx),
            "--train-y",
            p(ty),
            "--test-x",
            p(sx),
            "--test-y",
            p(sy),
            "--n-top",
            n_top,
            "--out",
            p(&out),
        ])
    };

    let cases = [
        (run(&f.train_x, &f.test_y, &f.test_x, &f.test_y, "10"), "--train-y"),
        (run(&f.train_x, &f.train_y, &f.test_x, &f.train_y, "10"), "--test-y"),
        (
            run(&f.train_x, &f.train_y, &narrow.test_x, &narrow.test_y, "10"),
            "--test-x",
        ),
        (run(&f.train_x, &f.train_y, &f.test_x, &f.test_y, "41"), "--n-top"),
    ];
    for (out, flag) in cases {
        assert_eq!(out.status.code(), Some(2), "{flag}");
        assert!(stderr(&out).contains(flag), "{flag}: {}", stderr(&out));
    }
}
