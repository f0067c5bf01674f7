use std::path::Path;
use std::process::{Command, Output};

fn nisb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nisb"))
        .current_dir(dir)
        .env_remove("NISB_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| {
            l.strip_prefix(key)?
                .strip_prefix(' ')?
                .trim_end_matches('%')
                .parse()
                .ok()
        })
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn stages_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    stdout(&nisb(
        d,
        &["gen", "--n", "9", "--seed", "3", "--out", "g.txt"],
    ));
    let common = [
        "--instance",
        "g.txt",
        "--weights",
        "21",
        "--batch",
        "30",
        "--out",
        "run",
    ];
    let solved = stdout(&nisb(d, &[&["solve"][..], &common].concat()));
    assert_eq!(value(&solved, "samples"), 630.0);
    stdout(&nisb(
        d,
        &[&["pareto", "--pool", "run/pool.csv"][..], &common].concat(),
    ));
    let fast = std::fs::read(d.join("run/archive.csv")).unwrap();
    stdout(&nisb(
        d,
        &[
            &["pareto", "--naive", "--pool", "run/pool.csv"][..],
            &common,
        ]
        .concat(),
    ));
    assert_eq!(std::fs::read(d.join("run/archive.csv")).unwrap(), fast);

    let scored = stdout(&nisb(
        d,
        &["hv", "--archive", "run/archive.csv", "--instance", "g.txt"],
    ));
    let hv = value(&scored, "hv");
    let ratio = value(&scored, "hv_ratio");
    assert!(hv > 0.0 && ratio > 0.0 && ratio <= 1.0);

    stdout(&nisb(
        d,
        &[
            "oracle",
            "--instance",
            "g.txt",
            "--weights",
            "10",
            "--out",
            "exact",
        ],
    ));
    let exact = stdout(&nisb(
        d,
        &[
            "hv",
            "--archive",
            "exact/exact_archive.csv",
            "--instance",
            "g.txt",
        ],
    ));
    assert_eq!(value(&exact, "hv_ratio"), 1.0);
    assert_eq!(value(&exact, "hv"), value(&scored, "hv_max"));
}

#[test]
fn explicit_reference_point() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("a.csv"), "c1,c2,spins\n10,5,2:00\n5,10,2:02\n").unwrap();
    let out = stdout(&nisb(
        d,
        &[
            "hv",
            "--archive",
            "a.csv",
            "--point",
            "0,0",
            "--hv-max",
            "84",
        ],
    ));
    assert_eq!(value(&out, "hv"), 75.0);
    assert_eq!(value(&out, "hv_difference"), 10.0);
}

#[test]
fn bench_writes_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = stdout(&nisb(
        d,
        &[
            "bench",
            "--n",
            "8",
            "--batch",
            "20",
            "--weights",
            "res:6",
            "--plot",
            "--out",
            "b",
        ],
    ));
    assert!(value(&out, "end_to_end_s") > 0.0);
    for f in ["report.toml", "trace.csv", "archive.csv", "front.svg"] {
        assert!(d.join("b").join(f).exists(), "{f}");
    }
    let report = nisb::pipeline::RunReport::read(d.join("b/report.toml")).unwrap();
    assert_eq!(report.sampling.weight_vectors, 10);
    assert_eq!(report.sampling.pool_size, 200);
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("c.toml"),
        "n = 7\nbatch = 11\nweights = \"3\"\nalpha = 0.4\n",
    )
    .unwrap();
    let out = stdout(&nisb(
        d,
        &["bench", "--config", "c.toml", "--batch", "5", "--out", "b"],
    ));
    assert!(out.contains("wrote"));
    let report = nisb::pipeline::RunReport::read(d.join("b/report.toml")).unwrap();
    assert_eq!(report.instance.n, 7);
    assert_eq!(report.solver.batch_size, 5);
    assert_eq!(report.solver.alpha, 0.4);
    assert_eq!(report.solver.n_iterations, 50);
    assert_eq!(report.sampling.pool_size, 15);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let code = |args: &[&str]| nisb(d, args).status.code();
    assert_eq!(code(&["solve", "--frobnicate"]), Some(2));
    assert_eq!(code(&["bench", "--runs", "0", "--out", "x"]), Some(2));
    assert_eq!(code(&["solve", "--variant", "qsb", "--out", "x"]), Some(2));
    assert_eq!(
        code(&["hv", "--archive", "missing.csv", "--point", "0,0"]),
        Some(2)
    );

    std::fs::write(d.join("c.toml"), "alhpa = 0.1\n").unwrap();
    assert_ne!(code(&["solve", "--config", "c.toml"]), Some(0));

    stdout(&nisb(
        d,
        &[
            "solve",
            "--n",
            "6",
            "--weights",
            "3",
            "--batch",
            "4",
            "--out",
            "p",
        ],
    ));
    let mismatch = nisb(
        d,
        &["pareto", "--pool", "p/pool.csv", "--n", "8", "--out", "p"],
    );
    assert_eq!(mismatch.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("error"));
}
