//! End-to-end checks of the binary: exit codes, reproducible outputs, and
//! the documented file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lpcoresets"))
}

fn tmpdir(tag: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("lpcs_cli_{}_{tag}", std::process::id()));
    std::fs::create_dir_all(&p).unwrap();
    p
}

fn write_instance(dir: &Path) -> (PathBuf, PathBuf) {
    // 40x3 design with a planted solution plus noise, 40x2 targets.
    let mut a = String::new();
    let mut b = String::new();
    let mut state = 88172645463325252u64;
    let mut rng = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for _ in 0..40 {
        let row: Vec<f64> = (0..3).map(|_| rng() * 4.0).collect();
        a.push_str(&format!("{},{},{}\n", row[0], row[1], row[2]));
        let y0 = row[0] + 2.0 * row[1] - row[2] + rng();
        let y1 = -row[0] + 0.5 * row[2] + rng();
        b.push_str(&format!("{y0},{y1}\n"));
    }
    let ap = dir.join("a.csv");
    let bp = dir.join("b.csv");
    std::fs::write(&ap, a).unwrap();
    std::fs::write(&bp, b).unwrap();
    (ap, bp)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["strong-coreset"]); // missing --input
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["verify", "--coreset", "/nonexistent", "--input", "/nonexistent", "--target", "/nonexistent"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["strong-coreset", "weak-coreset", "power-means", "subspace", "verify", "lb-gen", "bench"] {
        assert!(text.contains(sub), "help missing {sub}");
    }
}

#[test]
fn strong_then_verify_round_trip() {
    let dir = tmpdir("round");
    let (a, b) = write_instance(&dir);
    let s = dir.join("s.csv");
    let out = run(&[
        "strong-coreset",
        "--input", a.to_str().unwrap(),
        "--target", b.to_str().unwrap(),
        "--p", "1.5", "--eps", "0.4", "--seed", "3",
        "--output", s.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&s).unwrap().starts_with("row_index,scale"));

    let out = run(&[
        "verify",
        "--input", a.to_str().unwrap(),
        "--target", b.to_str().unwrap(),
        "--coreset", s.to_str().unwrap(),
        "--p", "1.5", "--eps", "0.4",
        "--probes", "60",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("passed=true"), "got: {text}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verification_failure_exits_3() {
    let dir = tmpdir("fail");
    let (a, b) = write_instance(&dir);
    // A single kept row cannot represent the other 39.
    let s = dir.join("tiny.csv");
    std::fs::write(&s, "row_index,scale\n0,40.0\n").unwrap();
    let out = run(&[
        "verify",
        "--input", a.to_str().unwrap(),
        "--target", b.to_str().unwrap(),
        "--coreset", s.to_str().unwrap(),
        "--p", "1.0", "--eps", "0.1",
        "--probes", "40",
    ]);
    assert_eq!(out.status.code(), Some(3), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn identical_seeds_reproduce_identical_bytes() {
    let dir = tmpdir("repro");
    let (a, b) = write_instance(&dir);
    let s1 = dir.join("s1.csv");
    let s2 = dir.join("s2.csv");
    let s3 = dir.join("s3.csv");
    for (s, seed) in [(&s1, "9"), (&s2, "9"), (&s3, "10")] {
        let out = run(&[
            "strong-coreset",
            "--input", a.to_str().unwrap(),
            "--target", b.to_str().unwrap(),
            "--p", "1.0", "--eps", "0.6", "--seed", seed,
            "--output", s.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&s1).unwrap(), std::fs::read(&s2).unwrap());
    assert_ne!(std::fs::read(&s1).unwrap(), std::fs::read(&s3).unwrap());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_supplies_defaults_flags_override() {
    let dir = tmpdir("config");
    let (a, b) = write_instance(&dir);
    let cfg = dir.join("run.conf");
    std::fs::write(
        &cfg,
        format!(
            "# defaults\ninput={}\ntarget={}\np=1.5\neps=0.4\nseed=5\n",
            a.display(),
            b.display()
        ),
    )
    .unwrap();
    let from_file = dir.join("file.csv");
    let out = run(&[
        "strong-coreset",
        "--config", cfg.to_str().unwrap(),
        "--output", from_file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let line = String::from_utf8_lossy(&out.stdout);
    assert!(line.contains("p=1.5") && line.contains("seed=5"), "record: {line}");

    // A flag beats the file.
    let out = run(&[
        "strong-coreset",
        "--config", cfg.to_str().unwrap(),
        "--seed", "6",
        "--output", from_file.to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("seed=6"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn lb_gen_outputs_load_back() {
    let dir = tmpdir("lbgen");
    let prefix = dir.join("lb");
    let out = run(&[
        "lb-gen", "--kind", "strong",
        "--d", "7", "--p", "3", "--eps", "0.5", "--seed", "2",
        "--output", prefix.to_str().unwrap(),
        "--format", "bin",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let record = String::from_utf8_lossy(&out.stdout);
    assert!(record.contains("multiplicity=8"), "record: {record}");
    let a = lp_coresets::io::load_matrix(dir.join("lb.A.bin")).unwrap();
    let b = lp_coresets::io::load_matrix(dir.join("lb.B.bin")).unwrap();
    assert_eq!(a.rows(), b.rows());
    assert_eq!(b.rows(), b.cols());
    assert!(a.data().iter().all(|&v| v == 1.0 || v == -1.0));

    let span = dir.join("span.csv");
    let out = run(&[
        "lb-gen", "--kind", "spanning", "--n", "3", "--k", "1", "--r", "2",
        "--output", span.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(&span).unwrap(),
        "2.0,1.0,0.0,0.0\n2.0,0.0,1.0,0.0\n2.0,0.0,0.0,1.0\n"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn power_means_sweep_emits_expected_csv() {
    let dir = tmpdir("sweep");
    let table = dir.join("table.csv");
    let out = run(&[
        "power-means",
        "--surrogate-n", "600", "--surrogate-dim", "40",
        "--p", "1", "--seed", "4",
        "--sweep", "50,200",
        "--m-list", "10,20",
        "--trials", "2",
        "--output", table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&table).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,sample_size,relative_error,seed"));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);

    // Reruns are byte-identical.
    let table2 = dir.join("table2.csv");
    let out = run(&[
        "power-means",
        "--surrogate-n", "600", "--surrogate-dim", "40",
        "--p", "1", "--seed", "4",
        "--sweep", "50,200",
        "--m-list", "10,20",
        "--trials", "2",
        "--output", table2.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&table).unwrap(), std::fs::read(&table2).unwrap());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn empty_input_is_usage_error_with_warning() {
    let dir = tmpdir("empty");
    let empty = dir.join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = run(&[
        "weak-coreset",
        "--input", empty.to_str().unwrap(),
        "--p", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn subspace_emits_orthonormal_basis() {
    let dir = tmpdir("subspace");
    // Rank-2 structured input.
    let mut text = String::new();
    for i in 0..50 {
        let t = i as f64 / 10.0;
        text.push_str(&format!("{},{},{},{}\n", t, 2.0 * t, t.sin(), 2.0 * t.sin()));
    }
    let a = dir.join("a.csv");
    std::fs::write(&a, text).unwrap();
    let basis = dir.join("basis.csv");
    let out = run(&[
        "subspace",
        "--input", a.to_str().unwrap(),
        "--k", "2", "--p", "2", "--eps", "0.3", "--seed", "1",
        "--output", basis.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let m = lp_coresets::io::load_matrix(&basis).unwrap();
    assert_eq!(m.cols(), 4);
    assert!(m.rows() <= 2);
    for i in 0..m.rows() {
        for j in i..m.rows() {
            let dot: f64 = m.row(i).iter().zip(m.row(j)).map(|(x, y)| x * y).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((dot - expect).abs() < 1e-8);
        }
    }
    // The record reports an exactly-rank-2 input as (near) zero cost.
    let record = String::from_utf8_lossy(&out.stdout);
    assert!(record.contains("cost="), "record: {record}");
    std::fs::remove_dir_all(&dir).ok();
}
