#![allow(dead_code)]

use blc_lab::case::{CaseConfig, CaseId};
use blc_lab::field::{AnalyticSolution, Grid};
use blc_lab::seeds::{example_solution, kink_seed, SeedKind, SeedSpec};
use std::f64::consts::PI;

pub fn golden_log() -> f64 {
    ((1.0 + 5f64.sqrt()) / 2.0).ln()
}

pub fn silver_log() -> f64 {
    (1.0 + 2f64.sqrt()).ln()
}

/// Parameter used for the one-kink checks of each case.
pub fn kink_phi(id: CaseId) -> f64 {
    match id {
        CaseId::One => 1.0,
        CaseId::Two | CaseId::Three => 0.8,
        CaseId::Four => PI / 3.0,
        CaseId::Five | CaseId::Six => 0.5,
    }
}

/// Constant that keeps an r=1 kink at `xi <= -0.75` on `[-w, w]^2`.
pub fn kink_c(case: &CaseConfig, phi: f64, w: f64) -> f64 {
    if case.r == 0 {
        return 0.0;
    }
    let p = blc_lab::case::congruence_params(case, phi).unwrap();
    let a = 1.0 / p.lambda;
    let b = p.big_lambda / p.lambda;
    -0.75 - w * (a.abs() + b.abs())
}

pub fn kink(case: &CaseConfig, phi: f64, c: f64) -> AnalyticSolution {
    kink_seed(case, phi, c).unwrap()
}

pub fn ex4(kind: SeedKind, phi: f64) -> AnalyticSolution {
    example_solution(&SeedSpec::new(kind, CaseId::Six).phi(phi)).unwrap()
}

pub fn grid(a1: f64, b1: f64, a2: f64, b2: f64, h: f64) -> Grid {
    Grid::rect(a1, b1, a2, b2, h).unwrap()
}

pub fn report(n: u32, name: &str, pass: bool, detail: &str) {
    println!("[{}] criterion {n}: {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}
