//! The two built-in surfaces, their curvature, and one Backlund transform of
//! each with its line-congruence check. Pass a directory to write OBJ meshes.
//!
//! cargo run --release --example surfaces -- [out-dir]

use std::f64::consts::PI;
use std::path::Path;

use blc_lab::geometry::detect_index;
use blc_lab::io::write_obj;
use blc_lab::{
    builtin_surface, congruence_check, congruence_params, example_solution, kink_seed, numerical_curvature,
    superpose_hyperbolic, transform_surface, BuiltinSurface, CaseId, Grid, ScalarField, SeedKind, SeedSpec,
    SuperposeInput, SuperposeOptions, SurfaceMesh,
};

fn describe(name: &str, mesh: &SurfaceMesh, out: Option<&Path>) -> blc_lab::Result<()> {
    let k = numerical_curvature(mesh)?;
    let vals: Vec<f64> = k.values.iter().zip(&k.valid).filter(|(_, ok)| **ok).map(|(v, _)| *v).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    println!("{name:<5} K mean {mean:+.6}, index {:?}", detect_index(mesh));
    if let Some(dir) = out {
        write_obj(&dir.join(format!("{name}.obj")), mesh)?;
    }
    Ok(())
}

fn main() -> blc_lab::Result<()> {
    let out = std::env::args().nth(1);
    let out = out.as_deref().map(Path::new);

    // K = 1 in R^3_1 and the transform by the second kink of the sinh-Gordon lattice
    let grid = Grid::rect(-1.7, -1.3, 1.0, 1.4, 1e-3)?;
    let x1 = builtin_surface(BuiltinSurface::TimelikeK1, &grid)?;
    let case = x1.case;
    let a1 = x1.alpha.sample(&grid);
    let a2 = kink_seed(&case, PI / 3.0, 0.0)?.sample(&grid);
    let zero = ScalarField::constant(grid, 0.0);
    let a12 = superpose_hyperbolic(
        &SuperposeInput {
            case,
            alpha: &zero,
            alpha1: &a1,
            alpha2: &a2,
            phi1: PI / 2.0,
            phi2: PI / 3.0,
        },
        &SuperposeOptions::default(),
    )?
    .field;
    let params = congruence_params(&case, PI / 3.0)?;
    let x12 = transform_surface(&x1.mesh, &a1, &a12, &case, &params)?;
    describe("X_1", &x1.mesh, out)?;
    describe("X_12", &x12, out)?;
    let rep = congruence_check(&x1.mesh, &x12, &case, &params)?;
    println!(
        "      |v| - lambda {:.1e}, |<N,Nbar>| - |Lambda| {:.1e}, tangency {:.1e}",
        rep.length.max, rep.normal.max, rep.tangency_bar.max
    );

    // K = -1 in R^3_1: the transform is space-like, the index flips
    let grid = Grid::rect(-0.7, -0.3, 0.1, 0.5, 1e-3)?;
    let x = builtin_surface(BuiltinSurface::TimelikeKminus1, &grid)?;
    let alpha = x.alpha.sample(&grid);
    let aj = example_solution(&SeedSpec::new(SeedKind::Example4Alpha1, CaseId::Six))?.sample(&grid);
    let params = congruence_params(&x.case, 0.0)?;
    let xj = transform_surface(&x.mesh, &alpha, &aj, &x.case, &params)?;
    describe("X", &x.mesh, out)?;
    describe("X_j", &xj, out)?;
    let rep = congruence_check(&x.mesh, &xj, &x.case, &params)?;
    println!("      predicted index {}, detected {:?}", rep.predicted_index_bar, rep.index_bar);
    Ok(())
}
