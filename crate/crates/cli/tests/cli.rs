use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfdm-lmmse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_small_system_succeeds() {
    let o = run(&[
        "verify",
        "--k",
        "4",
        "--m",
        "3",
        "--sigma2",
        "0.1",
        "--chan-len",
        "4",
        "--seed",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn verify_reads_config_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.txt");
    std::fs::write(&path, "K=5\nM=3\nalpha=0\nsigma_n2=1e-3\nchannel_len=4\nseed=3\n").unwrap();
    let cfg = path.to_str().unwrap();
    let o = run(&["verify", "--config", cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("K=5 M=3 alpha=0"));
    let o = run(&["verify", "--config", cfg, "--m", "4"]);
    assert!(stdout(&o).contains("K=5 M=4"));
}

#[test]
fn verify_exports_eigen_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("filter");
    let o = run(&["verify", "--k", "4", "--m", "3", "--export-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for u in 0..3 {
        assert!(out.join(format!("dw_{u:03}.txt")).exists());
    }
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("K=4") && manifest.contains("channel_hash="));
}

#[test]
fn sweep_row_for_k8_m4() {
    let o = run(&["sweep", "--grid", "8x4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "K,M,N,c_sparse,c_direct,measured_mults,t_fast_ns,t_direct_ns,filter_err"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..4], &["8", "4", "32", "3456"]);
    assert!(lines.next().is_none());
}

#[test]
fn sweep_output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let o = run(&["sweep", "--grid", "8x4,16x4,5x3", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn simulate_without_noise_recovers_symbols() {
    let o = run(&[
        "simulate", "--k", "5", "--m", "3", "--snr-db", "inf", "--blocks", "20", "--seed", "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for key in ["mse fast", "mse direct"] {
        let line = text.lines().find(|l| l.contains(key)).unwrap();
        let mse: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
        assert!(mse <= 1e-16, "{line}");
    }
}

#[test]
fn bench_prints_stage_table() {
    let o = run(&["bench", "--k", "8", "--m", "4", "--repeats", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let solve = text.lines().find(|l| l.contains("(c) solve")).unwrap();
    assert_eq!(solve.split_whitespace().nth(2), Some("1344"));
}

#[test]
fn bad_input_is_a_usage_error() {
    assert_eq!(run(&["verify", "--k", "x"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--k", "2"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--grid", "8by4"]).status.code(), Some(2));
    assert_eq!(
        run(&["verify", "--config", "/nonexistent/params.txt"]).status.code(),
        Some(1)
    );
}
