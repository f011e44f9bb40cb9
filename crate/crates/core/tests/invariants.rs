use proptest::prelude::*;

use blc_lab::case::{gen_atan, gen_trig};
use blc_lab::geometry::{pseudo_cross, pseudo_dot, Vec3};
use blc_lab::io::{field_from_csv, field_to_csv};
use blc_lab::superpose::{elliptic_constants, hyperbolic_node};
use blc_lab::{congruence_params, CaseConfig, CaseId, Grid, ScalarField};

fn case_id() -> impl Strategy<Value = CaseId> {
    (1u8..=6).prop_map(|k| CaseId::from_index(k).unwrap())
}

fn tau() -> impl Strategy<Value = i8> {
    prop_oneof![Just(1i8), Just(-1i8)]
}

fn vec3() -> impl Strategy<Value = Vec3> {
    (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b, c)| Vec3::new(a, b, c))
}

proptest! {
    #[test]
    fn gen_trig_identity(xi in prop_oneof![Just(1i8), Just(-1i8)], phi in -5.0..5.0f64) {
        let (c, s, t) = gen_trig(xi, phi);
        let scale = 1.0 + c * c;
        prop_assert!((c * c + xi as f64 * s * s - 1.0).abs() <= 1e-12 * scale);
        prop_assert!((t - s / c).abs() <= 1e-12 * (1.0 + t.abs()));
        if xi < 0 || phi.abs() < 1.5 {
            prop_assert!((gen_atan(xi, t) - phi).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn lambda_relation(id in case_id(), tau in tau(), u in 0.01..0.99f64) {
        let case = CaseConfig::new(id, tau);
        let phi = match id {
            CaseId::One | CaseId::Four => u * std::f64::consts::PI,
            _ => 3.0 * u,
        };
        if let Ok(p) = congruence_params(&case, phi) {
            let scale = 1.0 + p.lambda * p.lambda + p.big_lambda * p.big_lambda;
            prop_assert!((p.relation(&case) - 1.0).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn elliptic_constants_identity(tau in tau(), p1 in 0.0..2.0f64, p2 in 0.0..2.0f64) {
        let (a, b, l) = elliptic_constants(tau, p1, p2);
        prop_assert!((b * b - l * l - a * a).abs() <= 1e-12);
    }

    #[test]
    fn hyperbolic_swap(r in 0u8..=1, k in -3.0..3.0f64, a in -2.0..2.0f64, a1 in -2.0..2.0f64, a2 in -2.0..2.0f64) {
        // swapping the operands flips the sign of the coefficient's contribution
        let (s1, arg1) = hyperbolic_node(r, k, a, a1, a2);
        let (s2, arg2) = hyperbolic_node(r, -k, a, a2, a1);
        prop_assert!((arg1 - arg2).abs() <= 1e-12 * (1.0 + arg1.abs()));
        if r == 0 || arg1.abs() < 0.99 {
            prop_assert!((s1 - s2).abs() <= 1e-9);
        }
    }

    #[test]
    fn pseudo_dot_symmetric_bilinear(s in 0u8..=1, u in vec3(), v in vec3(), w in vec3(), c in -5.0..5.0f64) {
        prop_assert!((pseudo_dot(s, &u, &v) - pseudo_dot(s, &v, &u)).abs() <= 1e-12);
        let lhs = pseudo_dot(s, &(u * c + w), &v);
        let rhs = c * pseudo_dot(s, &u, &v) + pseudo_dot(s, &w, &v);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        let n = pseudo_cross(s, &u, &v);
        prop_assert!(pseudo_dot(s, &n, &u).abs() <= 1e-9 * (1.0 + n.norm() * u.norm()));
        prop_assert!(pseudo_dot(s, &n, &v).abs() <= 1e-9 * (1.0 + n.norm() * v.norm()));
    }

    #[test]
    fn csv_round_trip(
        x0 in -5.0..5.0f64,
        h in 0.01..1.0f64,
        n1 in 1usize..12,
        n2 in 1usize..12,
        vals in proptest::collection::vec(-1e6..1e6f64, 144),
        mask in proptest::collection::vec(any::<bool>(), 144),
    ) {
        let grid = Grid::rect(x0, x0 + h * (n1 - 1) as f64, -x0, -x0 + h * (n2 - 1) as f64, h).unwrap();
        let mut f = ScalarField::from_fn(grid, |_, _| Some(0.0));
        for k in 0..grid.len() {
            f.values[k] = vals[k % vals.len()];
            f.valid[k] = mask[k % mask.len()];
        }
        let back = field_from_csv(&field_to_csv(&f)).unwrap();
        prop_assert_eq!(back.grid.len(), grid.len());
        prop_assert_eq!(&back.valid, &f.valid);
        for k in 0..grid.len() {
            prop_assert_eq!(back.values[k].to_bits(), f.values[k].to_bits());
        }
    }
}
