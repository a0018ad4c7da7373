//! One test per acceptance criterion, each held to its wall-clock budget.

use std::process::Command;
use std::time::Instant;

use contring::suite::{name, run_criterion, runtime_limit};

const SEED: u64 = 20_241_018;

fn criterion(id: u8) {
    let start = Instant::now();
    let r = run_criterion(id, SEED).expect("known criterion");
    let elapsed = start.elapsed();
    let limit = runtime_limit(id).expect("timed criterion");
    println!(
        "criterion {id:>2} {} {} ({:.2}s of {}s)",
        if r.passed { "PASS" } else { "FAIL" },
        name(id),
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(r.passed, "criterion {id} failed: {}", r.details);
    assert!(elapsed < limit, "criterion {id} took {elapsed:?}, limit {limit:?}");
}

#[test]
fn criterion_01_rank_axioms() {
    criterion(1);
}

#[test]
fn criterion_02_rational_canonical_form() {
    criterion(2);
}

#[test]
fn criterion_03_index_bound() {
    criterion(3);
}

#[test]
fn criterion_04_coverage_by_index() {
    criterion(4);
}

#[test]
fn criterion_05_coverage_by_distance() {
    criterion(5);
}

#[test]
fn criterion_06_geodesics() {
    criterion(6);
}

#[test]
fn criterion_07_unit_geodesics() {
    criterion(7);
}

#[test]
fn criterion_08_star_geodesics() {
    criterion(8);
}

#[test]
fn criterion_09_ball_factorization() {
    criterion(9);
}

#[test]
fn criterion_10_invertible_approximation() {
    criterion(10);
}

#[test]
fn criterion_11_sl_projection_and_density() {
    criterion(11);
}

#[test]
fn criterion_12_center() {
    criterion(12);
}

#[test]
fn criterion_13_determinism() {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_contring"))
            .args(["verify-suite", "--seed", &SEED.to_string()])
            .env_remove("CONTRING_SEED")
            .output()
            .expect("binary runs")
    };
    let first = run();
    let second = run();
    let identical = first.stdout == second.stdout;
    println!(
        "criterion 13 {} {}",
        if identical { "PASS" } else { "FAIL" },
        name(13)
    );
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stdout));
    assert!(!first.stdout.is_empty());
    assert!(identical, "verify-suite output differs between runs");
}
