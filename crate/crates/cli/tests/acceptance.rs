//! Acceptance criterion 11: every CLI workflow repeated with the same seed
//! and different worker counts produces byte-identical machine outputs.

use std::fs;
use std::path::Path;
use std::process::Command;

fn regevlab(args: &[&str], dir: &Path) {
    let out = Command::new(env!("CARGO_BIN_EXE_regevlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).expect("output file exists")
}

#[test]
fn criterion_11_byte_identical_machine_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // robustness sweep across 1, 2, and 8 workers plus a repeat
    for (out, workers) in [("r_w1.csv", "1"), ("r_w2.csv", "2"), ("r_w8.csv", "8"), ("r_again.csv", "1")] {
        regevlab(
            &[
                "robust", "--kind", "synthetic", "--bits", "16", "--d", "4", "--task", "dlog",
                "--c-grid", "2,4", "--m2-grid", "0,2", "--trials", "5", "--seed", "31",
                "--workers", workers, "--out", out,
            ],
            dir,
        );
    }
    let reference = read(dir, "r_w1.csv");
    for name in ["r_w2.csv", "r_w8.csv", "r_again.csv"] {
        assert_eq!(reference, read(dir, name), "{name} differs");
    }

    // instance -> simulate -> post chain, repeated
    for suffix in ["a", "b"] {
        regevlab(
            &[
                "instance", "--kind", "synthetic", "--bits", "25", "--d", "4", "--task", "dlog",
                "--seed", "12", "--out", &format!("inst_{suffix}.json"),
            ],
            dir,
        );
        regevlab(
            &[
                "simulate", "--instance", &format!("inst_{suffix}.json"), "--C", "4", "--m", "8",
                "--seed", "12", "--out", &format!("runs_{suffix}.jsonl"),
            ],
            dir,
        );
        regevlab(
            &[
                "post", "--in", &format!("runs_{suffix}.jsonl"), "--instance",
                &format!("inst_{suffix}.json"), "--out", &format!("report_{suffix}.json"),
            ],
            dir,
        );
    }
    assert_eq!(read(dir, "inst_a.json"), read(dir, "inst_b.json"));
    assert_eq!(read(dir, "runs_a.jsonl"), read(dir, "runs_b.jsonl"));
    assert_eq!(read(dir, "report_a.json"), read(dir, "report_b.json"));

    // end-to-end answers repeat byte-identically
    for (name, cmd) in [
        ("dlog.json", "dlog"),
        ("order.json", "order"),
        ("phi.json", "phi"),
    ] {
        let kind = if cmd == "dlog" { "synthetic" } else { "safe-prime" };
        for round in ["x", "y"] {
            regevlab(
                &[
                    cmd, "--kind", kind, "--bits", "16", "--d", "4", "--C", "4", "--seed", "21",
                    "--out", &format!("{round}_{name}"),
                ],
                dir,
            );
        }
        assert_eq!(
            read(dir, &format!("x_{name}")),
            read(dir, &format!("y_{name}")),
            "{cmd} not byte-stable"
        );
    }

    println!("acceptance 11: PASS - machine outputs byte-identical across workers and repeats");
}
