use std::f64::consts::PI;

use blc_lab::geometry::{detect_index, Vec3};
use blc_lab::{
    builtin_surface, congruence_params, example_solution, kink_seed, numerical_curvature, superpose_hyperbolic,
    transform_surface, BuiltinSurface, CaseId, Grid, ScalarField, SeedKind, SeedSpec, SuperposeInput,
    SuperposeOptions, SurfaceMesh,
};

fn mean_valid(f: &ScalarField) -> f64 {
    let v: Vec<f64> = f.values.iter().zip(&f.valid).filter(|(_, ok)| **ok).map(|(v, _)| *v).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

// The closed-form X_j of the K = -1 example against the general transform.
#[test]
fn kminus1_transforms_match_closed_form() {
    let grid = Grid::rect(-0.7, -0.3, 0.1, 0.5, 0.01).unwrap();
    let x = builtin_surface(BuiltinSurface::TimelikeKminus1, &grid).unwrap();
    let alpha = x.alpha.sample(&grid);
    let silver = (1.0 + 2f64.sqrt()).ln();
    for (kind, phi) in [(SeedKind::Example4Alpha1, 0.0), (SeedKind::Example4Alpha2, silver)] {
        let aj = example_solution(&SeedSpec::new(kind, CaseId::Six).phi(phi)).unwrap();
        let field = aj.sample(&grid);
        let params = congruence_params(&x.case, phi).unwrap();
        let xj = transform_surface(&x.mesh, &alpha, &field, &x.case, &params).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..grid.len() {
            let (i, j) = grid.ij(k);
            let (x1, x2) = grid.point(i, j);
            let a = field.values[k];
            let (se, th) = (1.0 / x1.cosh(), x1.tanh());
            let xx1 = Vec3::new(th * th, -se * th * x2.cosh(), -se * th * x2.sinh());
            let xx2 = Vec3::new(0.0, se * x2.sinh(), se * x2.cosh());
            let closed = x.mesh.points[k]
                + phi.cosh() * (-(a / 2.0).cosh() / th * xx1 + (a / 2.0).sinh() * x1.cosh() * xx2);
            worst = worst.max((xj.points[k] - closed).norm());
        }
        assert!(worst < 1e-12, "{kind:?}: {worst:e}");
        assert_eq!(detect_index(&xj), Some(0));
    }
}

// The K = 1 transform with sinh(a1/2) in the first denominator is not a K = 1
// surface; with cosh(a1/2) it is.
#[test]
fn k1_transform_needs_cosh_denominator() {
    let grid = Grid::rect(-1.7, -1.3, 1.0, 1.4, 2e-3).unwrap();
    let x1 = builtin_surface(BuiltinSurface::TimelikeK1, &grid).unwrap();
    let case = x1.case;
    let a1 = x1.alpha.sample(&grid);
    let a2 = kink_seed(&case, PI / 3.0, 0.0).unwrap().sample(&grid);
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
    )
    .unwrap()
    .field;
    let params = congruence_params(&case, PI / 3.0).unwrap();
    let good = transform_surface(&x1.mesh, &a1, &a12, &case, &params).unwrap();
    let k_good = mean_valid(&numerical_curvature(&good).unwrap());
    assert!((k_good - 1.0).abs() < 5e-3, "K = {k_good}");

    let typo = SurfaceMesh::from_fn(grid, 1, |p1, p2| {
        let (i, j) = grid.node_of(p1, p2)?;
        let k = grid.idx(i, j);
        let [t1, t2] = x1.mesh.tangents_at(i, j)?;
        let (b, a) = (a1.values[k] / 2.0, a12.values[k] / 2.0);
        Some(x1.mesh.points[k] + params.lambda * (a.cosh() / b.sinh() * t1 + a.sinh() / b.sinh() * t2))
    });
    let k_typo = mean_valid(&numerical_curvature(&typo).unwrap());
    assert!((k_typo - 1.0).abs() > 0.1, "K = {k_typo}");
}
