//! The Backlund systems, a grid integrator for them, and a residual check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::case::{congruence_params, gen_cos, gen_sin, CaseConfig, CongruenceParams};
use crate::error::{Error, Result};
use crate::field::{FieldSource, Grid, Operand, ScalarField};

/// Exponent clamp for the hyperbolic functions.
const EXP_CLAMP: f64 = 700.0;

#[inline]
fn clamped(xi: i8, x: f64) -> f64 {
    if xi < 0 {
        x.clamp(-EXP_CLAMP, EXP_CLAMP)
    } else {
        x
    }
}

/// A case together with the congruence parameters of one transformation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BtSystem {
    pub case: CaseConfig,
    pub params: CongruenceParams,
}

/// Which sheet of `(C, S)(a'/2)` enters the system. The opposite sheet negates
/// both and only differs from the principal one when they are hyperbolic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Sheet {
    #[default]
    Principal,
    Opposite,
}

impl BtSystem {
    pub fn new(case: CaseConfig, phi: f64) -> Result<BtSystem> {
        Ok(BtSystem {
            case,
            params: congruence_params(&case, phi)?,
        })
    }

    /// `(a'_x1, a'_x2)` from the value and gradient of `a` and the value of `a'`.
    #[inline]
    pub fn gradient(&self, a: f64, grad: [f64; 2], ap: f64) -> [f64; 2] {
        self.gradient_on(a, grad, ap, Sheet::Principal)
    }

    pub fn gradient_on(&self, a: f64, grad: [f64; 2], ap: f64, sheet: Sheet) -> [f64; 2] {
        let c = &self.case;
        let rs = c.r_sign();
        let l = c.l;
        let (d, s_sign, t) = (c.delta as f64, c.s_sign() as f64, c.tau as f64);
        let (lam, big) = (self.params.lambda, self.params.big_lambda);
        let hp = clamped(rs, ap / 2.0);
        let h = clamped(l, a / 2.0);
        let flip = if sheet == Sheet::Opposite { -1.0 } else { 1.0 };
        let (cr, sr) = (flip * gen_cos(rs, hp), flip * gen_sin(rs, hp));
        let (cl, sl) = (gen_cos(l, h), gen_sin(l, h));
        let k = 2.0 / lam;
        let d1 = s_sign * d * grad[1] + k * sr * cl - k * s_sign * t * big * cr * sl;
        let d2 = -grad[0] - k * cr * sl - k * d * t * big * sr * cl;
        [d1, d2]
    }
}

/// Free-function form of [`BtSystem::gradient`].
pub fn bt_gradient(sys: &BtSystem, alpha_val: f64, alpha_grad: [f64; 2], alpha_prime_val: f64) -> [f64; 2] {
    sys.gradient(alpha_val, alpha_grad, alpha_prime_val)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SweepOrder {
    /// Along the row through `p0` (varying x1), then every column.
    #[default]
    RowsFirst,
    /// Along the column through `p0`, then every row.
    ColumnsFirst,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub order: SweepOrder,
    /// RK4 steps per grid spacing.
    pub substeps: usize,
    /// Nodes with |a'| above this are masked and stop the sweep.
    pub blowup: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            order: SweepOrder::RowsFirst,
            substeps: 1,
            blowup: 50.0,
        }
    }
}

/// March `y' = f(t, y)` from `t0` for `n` grid steps of signed size `h`.
/// Entries after the first failure are `None`.
fn march<F>(y0: f64, t0: f64, h: f64, n: usize, opts: &IntegrateOptions, f: F) -> Vec<Option<f64>>
where
    F: Fn(f64, f64) -> Option<f64>,
{
    let m = opts.substeps.max(1);
    let dt = h / m as f64;
    let mut out = vec![None; n];
    let mut y = y0;
    let mut t = t0;
    'steps: for slot in out.iter_mut() {
        for _ in 0..m {
            let step = || -> Option<f64> {
                let k1 = f(t, y)?;
                let k2 = f(t + dt / 2.0, y + dt / 2.0 * k1)?;
                let k3 = f(t + dt / 2.0, y + dt / 2.0 * k2)?;
                let k4 = f(t + dt, y + dt * k3)?;
                Some(y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
            };
            match step() {
                Some(next) if next.is_finite() && next.abs() <= opts.blowup => {
                    y = next;
                    t += dt;
                }
                _ => break 'steps,
            }
        }
        *slot = Some(y);
    }
    out
}

/// Both directions from index `k0` of an axis of `len` nodes.
fn march_line<F>(y0: f64, axis: &crate::field::Axis, k0: usize, opts: &IntegrateOptions, f: F) -> Vec<Option<f64>>
where
    F: Fn(f64, f64) -> Option<f64>,
{
    let mut line = vec![None; axis.len];
    line[k0] = Some(y0);
    let t0 = axis.at(k0);
    let up = march(y0, t0, axis.step, axis.len - 1 - k0, opts, &f);
    for (n, v) in up.into_iter().enumerate() {
        line[k0 + 1 + n] = v;
    }
    let down = march(y0, t0, -axis.step, k0, opts, &f);
    for (n, v) in down.into_iter().enumerate() {
        line[k0 - 1 - n] = v;
    }
    line
}

/// Integrate the BT of `sys` for `a'` over `grid`, starting from
/// `a'(p0) = alpha_prime_0`.
pub fn integrate_bt(
    sys: &BtSystem,
    alpha: &dyn FieldSource,
    grid: &Grid,
    p0: (f64, f64),
    alpha_prime_0: f64,
    opts: &IntegrateOptions,
) -> Result<ScalarField> {
    let (i0, j0) = grid.node_of(p0.0, p0.1).ok_or(Error::SeedNotOnGrid(p0.0, p0.1))?;
    let (x10, x20) = grid.point(i0, j0);
    if alpha.jet_at(x10, x20).is_none() {
        return Err(Error::AlphaUndefinedOnGrid(p0.0, p0.1));
    }
    let rhs1 = |x1: f64, x2: f64, y: f64| {
        let (a, g) = alpha.jet_at(x1, x2)?;
        Some(sys.gradient(a, g, y)[0])
    };
    let rhs2 = |x1: f64, x2: f64, y: f64| {
        let (a, g) = alpha.jet_at(x1, x2)?;
        Some(sys.gradient(a, g, y)[1])
    };
    let mut values = vec![f64::NAN; grid.len()];
    let mut valid = vec![false; grid.len()];
    match opts.order {
        SweepOrder::RowsFirst => {
            let row = march_line(alpha_prime_0, &grid.x1, i0, opts, |x1, y| rhs1(x1, x20, y));
            let cols: Vec<Vec<Option<f64>>> = (0..grid.n1())
                .into_par_iter()
                .map(|i| match row[i] {
                    Some(y0) => {
                        let x1 = grid.x1.at(i);
                        march_line(y0, &grid.x2, j0, opts, |x2, y| rhs2(x1, x2, y))
                    }
                    None => vec![None; grid.n2()],
                })
                .collect();
            for (i, col) in cols.into_iter().enumerate() {
                for (j, v) in col.into_iter().enumerate() {
                    if let Some(v) = v {
                        values[grid.idx(i, j)] = v;
                        valid[grid.idx(i, j)] = true;
                    }
                }
            }
        }
        SweepOrder::ColumnsFirst => {
            let col = march_line(alpha_prime_0, &grid.x2, j0, opts, |x2, y| rhs2(x10, x2, y));
            let rows: Vec<Vec<Option<f64>>> = (0..grid.n2())
                .into_par_iter()
                .map(|j| match col[j] {
                    Some(y0) => {
                        let x2 = grid.x2.at(j);
                        march_line(y0, &grid.x1, i0, opts, |x1, y| rhs1(x1, x2, y))
                    }
                    None => vec![None; grid.n1()],
                })
                .collect();
            for (j, row) in rows.into_iter().enumerate() {
                for (i, v) in row.into_iter().enumerate() {
                    if let Some(v) = v {
                        values[grid.idx(i, j)] = v;
                        valid[grid.idx(i, j)] = true;
                    }
                }
            }
        }
    }
    Ok(ScalarField::new(*grid, values, valid))
}

/// Left-minus-right of both equations of the system at every node.
pub fn bt_residual<'a>(
    sys: &BtSystem,
    alpha: impl Into<Operand<'a>>,
    alpha_prime: impl Into<Operand<'a>>,
    grid: &Grid,
) -> Result<(ScalarField, ScalarField)> {
    bt_residual_on(sys, alpha, alpha_prime, grid, Sheet::Principal)
}

pub fn bt_residual_on<'a>(
    sys: &BtSystem,
    alpha: impl Into<Operand<'a>>,
    alpha_prime: impl Into<Operand<'a>>,
    grid: &Grid,
    sheet: Sheet,
) -> Result<(ScalarField, ScalarField)> {
    let (alpha, alpha_prime) = (alpha.into(), alpha_prime.into());
    alpha.check_grid(grid)?;
    alpha_prime.check_grid(grid)?;
    let per_node: Vec<Option<[f64; 2]>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = grid.ij(k);
            let (a, g) = alpha.node_jet(grid, i, j)?;
            let (ap, gp) = alpha_prime.node_jet(grid, i, j)?;
            let rhs = sys.gradient_on(a, g, ap, sheet);
            Some([gp[0] - rhs[0], gp[1] - rhs[1]])
        })
        .collect();
    let split = |e: usize| {
        let values = per_node.iter().map(|r| r.map_or(f64::NAN, |r| r[e])).collect();
        let valid = per_node.iter().map(|r| r.is_some_and(|r| r[e].is_finite())).collect();
        ScalarField::new(*grid, values, valid)
    };
    Ok((split(0), split(1)))
}

/// Largest residual of either equation.
pub fn max_residual(res: &(ScalarField, ScalarField)) -> f64 {
    res.0.max_abs().max(res.1.max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::CaseId;
    use crate::seeds::{kink_seed, zero_seed};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn gradient_examples() {
        let s1 = BtSystem::new(CaseConfig::new(CaseId::One, 1), PI / 2.0).unwrap();
        let g = bt_gradient(&s1, 0.0, [0.0, 0.0], PI);
        assert_abs_diff_eq!(g[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-15);

        let s5 = BtSystem::new(CaseConfig::new(CaseId::Five, 1), 0.0).unwrap();
        let g = bt_gradient(&s5, 0.0, [0.0, 0.0], PI / 2.0);
        assert_abs_diff_eq!(g[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn case4_gradient_matches_kink() {
        let c4 = CaseConfig::new(CaseId::Four, -1);
        let sys = BtSystem::new(c4, PI / 3.0).unwrap();
        let k = kink_seed(&c4, PI / 3.0, 0.0).unwrap();
        // pick the point on the x2 = 0 line where the kink equals -1
        let (mut lo, mut hi) = (-10.0, -1e-3);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if k.value(mid, 0.0).unwrap() < -1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let x1 = 0.5 * (lo + hi);
        let g = bt_gradient(&sys, 0.0, [0.0, 0.0], -1.0);
        let exact = k.gradient(x1, 0.0).unwrap();
        assert_abs_diff_eq!(g[0], exact[0], epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], exact[1], epsilon = 1e-12);
    }

    #[test]
    fn zero_to_kink_residual_vanishes() {
        let g = Grid::rect(-2.0, 2.0, -2.0, 2.0, 0.1).unwrap();
        for id in CaseId::ALL {
            let case = CaseConfig::new(id, -1);
            let phi = if id.is_hyperbolic() { 1.0 } else { 0.4 };
            let c = if case.r == 1 { -8.0 } else { 0.0 };
            let sys = BtSystem::new(case, phi).unwrap();
            let k = kink_seed(&case, phi, c).unwrap();
            let res = bt_residual(&sys, &zero_seed(), &k, &g).unwrap();
            assert!(max_residual(&res) < 1e-10, "case {id}");
            assert!(res.0.valid_count() > 0);
        }
    }

    #[test]
    fn start_must_be_a_node() {
        let g = Grid::rect(-1.0, 1.0, -1.0, 1.0, 0.1).unwrap();
        let sys = BtSystem::new(CaseConfig::new(CaseId::One, 1), 1.0).unwrap();
        let z = zero_seed();
        let r = integrate_bt(&sys, &z, &g, (0.05, 0.0), 0.0, &IntegrateOptions::default());
        assert!(matches!(r, Err(Error::SeedNotOnGrid(..))));
        let k = kink_seed(&CaseConfig::new(CaseId::Three, 1), 1.0, 0.0).unwrap();
        let sys3 = BtSystem::new(CaseConfig::new(CaseId::Three, 1), 1.0).unwrap();
        let r = integrate_bt(&sys3, &k, &g, (0.9, -0.5), 0.0, &IntegrateOptions::default());
        assert!(matches!(r, Err(Error::AlphaUndefinedOnGrid(..))));
    }

    #[test]
    fn blowup_masks_and_stops() {
        // case 3 kinks run off to -inf at xi = 0, so the sweep must stop there
        let case = CaseConfig::new(CaseId::Three, 1);
        let sys = BtSystem::new(case, 1.0).unwrap();
        let k = kink_seed(&case, 1.0, -1.0).unwrap();
        let g = Grid::rect(-1.0, 3.0, 0.0, 0.0, 0.01).unwrap();
        let out = integrate_bt(&sys, &zero_seed(), &g, (-1.0, 0.0), k.value(-1.0, 0.0).unwrap(), &Default::default()).unwrap();
        assert!(out.masked_count() > 0);
        let first_bad = (0..g.n1()).find(|&i| out.get(i, 0).is_none()).unwrap();
        assert!((first_bad..g.n1()).all(|i| out.get(i, 0).is_none()));
    }
}
