//! Superposition for the elliptic sine-Gordon equation: from 4 arctan e^x1 and
//! its two closed-form transforms (phi = 0 and phi = ln(1 + sqrt 2)) to a new
//! elliptic sine-Gordon solution, checked against both Backlund transformations.
//!
//! cargo run --release --example elliptic_sine_superposition

use blc_lab::backlund::{bt_residual, max_residual};
use blc_lab::pde::{equation_residual, Derivatives};
use blc_lab::{
    example_solution, superpose_elliptic_sine, BtSystem, CaseConfig, CaseId, Grid, SeedKind, SeedSpec,
    SuperposeInput, SuperposeOptions,
};

fn main() -> blc_lab::Result<()> {
    let case = CaseConfig::new(CaseId::Six, 1);
    let (phi1, phi2) = (0.0, (1.0 + 2f64.sqrt()).ln());
    let named = |kind, phi| example_solution(&SeedSpec::new(kind, CaseId::Six).phi(phi));
    let alpha = named(SeedKind::Example4Alpha, 0.0)?;
    let alpha1 = named(SeedKind::Example4Alpha1, phi1)?;
    let alpha2 = named(SeedKind::Example4Alpha2, phi2)?;

    for h in [0.02, 0.01, 0.005] {
        let grid = Grid::rect(-2.0, 2.0, -0.5, 0.5, h)?;
        let (a, a1, a2) = (alpha.sample(&grid), alpha1.sample(&grid), alpha2.sample(&grid));
        let star = superpose_elliptic_sine(
            &SuperposeInput {
                case,
                alpha: &a,
                alpha1: &a1,
                alpha2: &a2,
                phi1,
                phi2,
            },
            &SuperposeOptions::default(),
        )?
        .field;
        let partner = case.partner();
        let r2 = max_residual(&bt_residual(&BtSystem::new(partner, phi2)?, &alpha1, &star, &grid)?);
        let r1 = max_residual(&bt_residual(&BtSystem::new(partner, phi1)?, &alpha2, &star, &grid)?);
        let pde = equation_residual(&star, &grid, &case.original_equation(), Derivatives::Differences)?.max_abs();
        println!("h={h:<6} BT residuals {r2:.2e} / {r1:.2e}, elliptic sine-Gordon residual {pde:.2e}");
    }
    Ok(())
}
