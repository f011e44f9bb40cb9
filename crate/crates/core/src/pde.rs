//! Residual of the Gordon-type equations on a grid.

use rayon::prelude::*;

use crate::case::{CaseConfig, GordonEquation, IndexFlag};
use crate::error::Result;
use crate::field::{Grid, Operand, ScalarField};

/// How second derivatives are obtained for closed-form inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivatives {
    /// Exact second derivatives when the solution supplies them, else differences.
    Best,
    /// Always second-order central differences of grid samples.
    Differences,
}

/// `L(a) + eps delta S(a)` at the interior nodes of `grid`.
///
/// Boundary nodes and nodes whose stencil touches an invalid node come back
/// invalid.
pub fn pde_residual<'a>(
    alpha: impl Into<Operand<'a>>,
    grid: &Grid,
    case: &CaseConfig,
    flag: IndexFlag,
) -> Result<ScalarField> {
    equation_residual(alpha, grid, &case.equation(flag), Derivatives::Best)
}

pub fn equation_residual<'a>(
    alpha: impl Into<Operand<'a>>,
    grid: &Grid,
    eq: &GordonEquation,
    mode: Derivatives,
) -> Result<ScalarField> {
    grid.require(3)?;
    let alpha = alpha.into();
    alpha.check_grid(grid)?;
    let sampled;
    let field = match alpha {
        Operand::Field(f) => f,
        Operand::Analytic(a) if mode == Derivatives::Best && a.has_exact_second() => {
            return Ok(ScalarField::from_fn(*grid, |x1, x2| {
                let v = a.value(x1, x2)?;
                let [a11, a22] = a.exact_second(x1, x2)?;
                Some(eq.residual(a11, a22, v))
            }));
        }
        Operand::Analytic(a) => {
            sampled = a.sample(grid);
            &sampled
        }
    };
    Ok(residual_of_field(field, eq))
}

fn residual_of_field(field: &ScalarField, eq: &GordonEquation) -> ScalarField {
    let grid = field.grid;
    let (values, valid) = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = grid.ij(k);
            match field.second(i, j) {
                Some((v, [a11, a22])) => (eq.residual(a11, a22, v), true),
                None => (f64::NAN, false),
            }
        })
        .unzip();
    ScalarField::new(grid, values, valid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::{CaseConfig, CaseId};
    use crate::field::AnalyticSolution;

    #[test]
    fn zero_has_zero_residual() {
        let g = Grid::rect(-1.0, 1.0, -1.0, 1.0, 0.1).unwrap();
        let z = AnalyticSolution::new("zero", |_, _| 0.0);
        for id in CaseId::ALL {
            let c = CaseConfig::new(id, 1);
            for flag in [IndexFlag::Original, IndexFlag::Transformed] {
                let r = pde_residual(&z, &g, &c, flag).unwrap();
                assert_eq!(r.max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn tiny_grid_rejected() {
        let g = Grid::rect(0.0, 0.1, 0.0, 1.0, 0.1).unwrap();
        let z = ScalarField::constant(g, 0.0);
        let c = CaseConfig::new(CaseId::One, 1);
        assert!(pde_residual(&z, &g, &c, IndexFlag::Original).is_err());
    }
}
