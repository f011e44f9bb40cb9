//! Integrate a Backlund transformation numerically and compare with the
//! closed form: the elliptic sine-Gordon solution 4 arctan e^x1 is carried to
//! the elliptic sinh-Gordon solution with tanh(a1/4) = -x2 sech x1.
//!
//! cargo run --release --example backlund_integration

use blc_lab::{
    example_solution, integrate_bt, BtSystem, CaseConfig, CaseId, Grid, IntegrateOptions, SeedKind, SeedSpec,
    SweepOrder,
};

fn main() -> blc_lab::Result<()> {
    let case = CaseConfig::new(CaseId::Six, 1);
    let alpha = example_solution(&SeedSpec::new(SeedKind::Example4Alpha, CaseId::Six))?;
    let exact = example_solution(&SeedSpec::new(SeedKind::Example4Alpha1, CaseId::Six))?;
    let sys = BtSystem::new(case, 0.0)?;
    let grid = Grid::rect(-1.5, 1.5, -2.5, 2.5, 0.01)?;

    for order in [SweepOrder::RowsFirst, SweepOrder::ColumnsFirst] {
        let opts = IntegrateOptions {
            order,
            ..Default::default()
        };
        let a1 = integrate_bt(&sys, &alpha, &grid, (0.0, 0.0), 0.0, &opts)?;
        // a1 blows up on x2 = +-cosh x1; compare 0.1 inside that.
        // Marching columns first runs along x2 straight into the blow-up, so it
        // reaches fewer nodes and loses accuracy near the edge.
        let keep: Vec<bool> = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.ij(k);
                let (x1, x2) = grid.point(i, j);
                x2.abs() <= x1.cosh() - 0.1
            })
            .collect();
        let mut inside = a1.clone();
        inside.restrict(&keep);
        let err = inside.max_diff(&exact.sample(&grid))?;
        println!(
            "{order:?}: {} of {} nodes reached, max error {err:.2e} on {} nodes inside |x2| < cosh x1",
            a1.valid_count(),
            grid.len(),
            inside.valid_count()
        );
    }
    Ok(())
}
