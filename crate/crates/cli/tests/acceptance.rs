//! Acceptance suite: one PASS/FAIL line per criterion. Criterion 10 additionally
//! runs the real binary with 1 and 8 threads and compares the CSV files.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use spinlab_cli::acceptance::{self, Outcome};

fn binary_determinism() -> Outcome {
    let start = Instant::now();
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_determinism");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("scan.json");
    std::fs::write(&config, serde_json::to_string(&acceptance::determinism_config()).unwrap()).unwrap();
    let run = |threads: &str| -> Result<Vec<u8>, String> {
        let prefix = dir.join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_spinlab"))
            .args(["scan", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&prefix)
            .args(["--threads", threads])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        std::fs::read(format!("{}_scan.csv", prefix.display())).map_err(|e| e.to_string())
    };
    let (pass, detail) = match (run("1"), run("8")) {
        (Ok(a), Ok(b)) if a == b => (true, format!("binary: {} CSV bytes identical at --threads 1 and 8", a.len())),
        (Ok(_), Ok(_)) => (false, "binary: scan CSV differs between thread counts".to_string()),
        (Err(e), _) | (_, Err(e)) => (false, format!("binary failed: {e}")),
    };
    Outcome {
        id: 10,
        title: "determinism (spinlab scan)",
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

fn main() -> ExitCode {
    let mut outcomes = Vec::new();
    let mut report = |o: Outcome| {
        println!("{}", o.line());
        outcomes.push(o);
    };
    report(acceptance::multipliers());
    report(acceptance::cube_spin());
    report(acceptance::commutation(0));
    report(acceptance::spin_consistency(0));
    report(acceptance::inversion(0));
    report(acceptance::poisson(0));
    report(acceptance::zonotopes(0));
    report(acceptance::octahedron());
    report(acceptance::scans());
    let in_process = acceptance::determinism();
    let binary = binary_determinism();
    report(Outcome {
        pass: in_process.pass && binary.pass,
        detail: format!("{}; {}", in_process.detail, binary.detail),
        elapsed: in_process.elapsed + binary.elapsed,
        ..in_process
    });
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
