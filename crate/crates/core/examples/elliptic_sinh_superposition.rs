//! Superposition for the elliptic sinh-Gordon equation: two kinks of the zero
//! solution (phi = 0 and phi = ln((1 + sqrt 5)/2)) give an elliptic
//! sine-Gordon solution, singular along two curves.
//!
//! cargo run --release --example elliptic_sinh_superposition

use blc_lab::backlund::{bt_residual, max_residual};
use blc_lab::pde::{equation_residual, Derivatives};
use blc_lab::{
    kink_seed, superpose_elliptic_sinh, BtSystem, CaseConfig, CaseId, Grid, ScalarField, SuperposeInput,
    SuperposeOptions,
};

fn main() -> blc_lab::Result<()> {
    let case = CaseConfig::new(CaseId::Five, 1);
    let (phi1, phi2) = (0.0, ((1.0 + 5f64.sqrt()) / 2.0).ln());
    let grid = Grid::rect(-3.0, 3.0, -3.0, 3.0, 0.01)?;
    let k1 = kink_seed(&case, phi1, 0.0)?;
    let k2 = kink_seed(&case, phi2, 0.0)?;
    let (a1, a2) = (k1.sample(&grid), k2.sample(&grid));
    let zero = ScalarField::constant(grid, 0.0);
    let input = SuperposeInput {
        case,
        alpha: &zero,
        alpha1: &a1,
        alpha2: &a2,
        phi1,
        phi2,
    };
    let sup = superpose_elliptic_sinh(&input, &SuperposeOptions::default())?;
    println!(
        "alpha_12 masked on {} of {} nodes (singular curves)",
        sup.field.masked_count(),
        grid.len()
    );

    // away from the curves the result closes the diamond and solves the equation
    let window = Grid::rect(-2.0, 2.0, -0.5, 0.5, 0.01)?;
    let (b1, b2) = (k1.sample(&window), k2.sample(&window));
    let z = ScalarField::constant(window, 0.0);
    let inner = superpose_elliptic_sinh(
        &SuperposeInput {
            alpha: &z,
            alpha1: &b1,
            alpha2: &b2,
            ..input
        },
        &SuperposeOptions::default(),
    )?
    .field;
    let partner = case.partner();
    let r2 = max_residual(&bt_residual(&BtSystem::new(partner, phi2)?, &k1, &inner, &window)?);
    let r1 = max_residual(&bt_residual(&BtSystem::new(partner, phi1)?, &k2, &inner, &window)?);
    let eq = case.original_equation();
    let pde = equation_residual(&inner, &window, &eq, Derivatives::Differences)?.max_abs();
    println!("on [-2,2]x[-0.5,0.5]: BT residuals {r2:.2e} / {r1:.2e}, {} residual {pde:.2e}", eq.name());
    Ok(())
}
