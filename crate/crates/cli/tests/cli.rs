//! End-to-end tests of the `gspsim` binary: exit codes, file round trips,
//! determinism of emitted artifacts, and the verification report.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gspsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gspsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn generate_verify_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = gspsim(
        &[
            "generate",
            "--n",
            "5",
            "--t",
            "1",
            "--m",
            "4",
            "--k",
            "2",
            "--seed",
            "7",
            "--out",
            "inst.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let out = gspsim(&["verify", "--instance", "inst.json"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("[promise] ok"));
    assert!(text.contains("[signature-equivalence] ok"));
    assert!(text.contains("[coset-count] ok"));

    let solve = |trace: &str| {
        gspsim(
            &[
                "solve",
                "--instance",
                "inst.json",
                "--seed",
                "3",
                "--algorithm",
                "full",
                "--out",
                trace,
            ],
            dir.path(),
        )
    };
    let out = solve("trace_a.json");
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("exact: true"));

    // Same instance and seed: byte-identical trace.
    let out = solve("trace_b.json");
    assert!(out.status.success());
    let a = fs::read(dir.path().join("trace_a.json")).unwrap();
    let b = fs::read(dir.path().join("trace_b.json")).unwrap();
    assert_eq!(a, b);

    // The instance file round-trips byte-exactly through a regenerate.
    let first = fs::read(dir.path().join("inst.json")).unwrap();
    let out = gspsim(
        &[
            "generate",
            "--n",
            "5",
            "--t",
            "1",
            "--m",
            "4",
            "--k",
            "2",
            "--seed",
            "7",
            "--out",
            "again.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(first, fs::read(dir.path().join("again.json")).unwrap());
}

#[test]
fn infeasible_generation_exits_with_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = gspsim(
        &[
            "generate", "--n", "4", "--t", "1", "--m", "1", "--k", "1", "--out", "x.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("m >= n-k"), "{}", stderr(&out));

    // 2^(n-k) = 16 distinct values cannot fit into 2^3 = 8 codomain words.
    let out = gspsim(
        &[
            "generate", "--n", "4", "--t", "1", "--m", "3", "--k", "0", "--out", "x.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = gspsim(&["solve", "--no-such-flag"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = gspsim(&["solve", "--instance", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.json"));

    let out = gspsim(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn corrupted_table_is_reported_with_a_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let out = gspsim(
        &[
            "generate",
            "--n",
            "4",
            "--t",
            "1",
            "--m",
            "3",
            "--k",
            "1",
            "--seed",
            "5",
            "--out",
            "inst.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());

    // Flip one table entry.
    let path = dir.path().join("inst.json");
    let text = fs::read_to_string(&path).unwrap();
    let mut file: serde_json::Value = serde_json::from_str(&text).unwrap();
    let table = file["f_table"].as_array_mut().unwrap();
    let first = u64::from_str_radix(table[0].as_str().unwrap(), 16).unwrap();
    table[0] = serde_json::Value::String(format!("{:01x}", first ^ 1));
    fs::write(&path, serde_json::to_string_pretty(&file).unwrap()).unwrap();

    let out = gspsim(&["verify", "--instance", "inst.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("[promise] FAIL"), "{text}");
    // Both equivalence checks are reported independently.
    assert!(text.contains("[signature-equivalence]"), "{text}");
    assert!(text.contains("[coset-count]"), "{text}");
}

#[test]
fn perturbed_assembly_reports_inexactness_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    // Planted s = 111: the left projection is spanned by 11 only, so a
    // perturbed (over-large) candidate basis misses it.
    let json = r#"{
        "n": 3, "t": 1, "m": 2, "k": 1, "seed": 0,
        "s_basis": ["111"],
        "f_table": ["0", "1", "2", "3", "3", "2", "1", "0"]
    }"#;
    fs::write(dir.path().join("crafted.json"), json).unwrap();

    let out = gspsim(
        &[
            "solve",
            "--instance",
            "crafted.json",
            "--seed",
            "1",
            "--algorithm",
            "ds",
            "--perturb-sl",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("exact: false"), "{text}");
    assert!(text.contains("missing"), "{text}");
}

#[test]
fn remaining_algorithms_run_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = gspsim(
        &[
            "generate",
            "--n",
            "5",
            "--t",
            "2",
            "--m",
            "3",
            "--k",
            "2",
            "--seed",
            "11",
            "--out",
            "inst.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    for algorithm in ["dsl", "ds", "edsl", "eds"] {
        let out = gspsim(
            &[
                "solve",
                "--instance",
                "inst.json",
                "--seed",
                "2",
                "--algorithm",
                algorithm,
                "--out",
                "report.json",
            ],
            dir.path(),
        );
        assert!(
            out.status.success(),
            "algorithm {algorithm}: {}",
            stderr(&out)
        );
        assert!(dir.path().join("report.json").exists());
    }
}

#[test]
fn bench_release_gate_trips_on_an_impossible_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = gspsim(
        &[
            "bench",
            "--n",
            "3",
            "--t",
            "1",
            "--k",
            "0",
            "--trials",
            "1",
            "--out",
            "gate.csv",
            "--tolerance",
            "0.0",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("tolerance"));
}

#[test]
fn bench_writes_reproducible_rows() {
    let dir = tempfile::tempdir().unwrap();
    let run = |path: &str| {
        let out = gspsim(
            &[
                "bench", "--n", "3..4", "--t", "1", "--trials", "2", "--seed", "9", "--out", path,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stdout(&out).contains("success rate 1.000"));
    };
    run("a.csv");
    run("b.csv");

    let read_rows = |name: &str| {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            gspsim_cli::bench::CSV_HEADER,
            "fixed header"
        );
        // Strip the wall-time column; it is the one legitimately varying field.
        lines
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    let a = read_rows("a.csv");
    let b = read_rows("b.csv");
    assert_eq!(a, b);
    // k defaults to 0..=n per n: 4 + 5 combos, two trials each.
    assert_eq!(a.len(), 18);
    for row in &a {
        assert!(row.ends_with("true,0e0") || row.contains(",true,"), "{row}");
    }
}
