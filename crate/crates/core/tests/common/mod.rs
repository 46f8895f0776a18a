#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use seriation::milp::ExternalSolverConfig;
use seriation::DenseMatrix;

/// Random matrix with integer entries in `0..=max` (binary when `max == 1`).
pub fn random_matrix(rng: &mut StdRng, n: usize, m: usize, max: u32) -> DenseMatrix {
    let data = (0..n * m).map(|_| rng.gen_range(0..=max) as f64).collect();
    DenseMatrix::new(n, m, data).unwrap()
}

/// Random matrix with continuous entries in `[0, 1)`.
pub fn random_continuous(rng: &mut StdRng, n: usize, m: usize) -> DenseMatrix {
    let data = (0..n * m).map(|_| rng.gen::<f64>()).collect();
    DenseMatrix::new(n, m, data).unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn highs_script() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts/highs_solve.py")
}

/// HiGHS-backed solver configuration when `python3` can import `highspy`.
pub fn highs_config() -> Option<ExternalSolverConfig> {
    let ok = Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false);
    if !ok {
        eprintln!("highspy not importable; skipping external-solver checks");
        return None;
    }
    let cmd = format!("python3 '{}' {{model}} {{solution}}", highs_script().display());
    let dir = std::env::temp_dir().join(format!("seriation-it-{}", std::process::id()));
    Some(ExternalSolverConfig::new(cmd, Duration::from_secs(600)).unwrap().with_work_dir(dir))
}
