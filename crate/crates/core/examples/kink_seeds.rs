//! The one-kink solution of every case and the equation it solves.
//!
//! cargo run --release --example kink_seeds

use blc_lab::backlund::{bt_residual, max_residual};
use blc_lab::pde::{equation_residual, Derivatives};
use blc_lab::{kink_seed, zero_seed, BtSystem, CaseConfig, CaseId, Grid, IndexFlag};

fn main() -> blc_lab::Result<()> {
    let grid = Grid::rect(-1.0, 1.0, -1.0, 1.0, 0.01)?;
    println!("case  equation                         phi    BT residual  PDE residual (h=0.01)");
    for id in CaseId::ALL {
        let case = CaseConfig::new(id, 1);
        let phi = match id {
            CaseId::One | CaseId::Four => 1.0,
            _ => 0.7,
        };
        // r = 1 kinks live on xi < 0; push the window inside
        let c = if case.r == 1 { -4.0 } else { 0.0 };
        let kink = kink_seed(&case, phi, c)?;
        let sys = BtSystem::new(case, phi)?;
        let bt = max_residual(&bt_residual(&sys, &zero_seed(), &kink, &grid)?);
        let eq = case.equation(IndexFlag::Transformed);
        let pde = equation_residual(&kink, &grid, &eq, Derivatives::Differences)?.max_abs();
        println!("{id:>4}  {:<32} {phi:<6} {bt:<12.1e} {pde:.2e}", format!("{} ({})", eq.describe(), eq.name()));
    }
    Ok(())
}
