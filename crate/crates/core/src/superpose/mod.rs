//! Algebraic superposition formulas, their singular sets, and the lattice
//! built from them.

mod lattice;

pub use lattice::{bianchi_lattice, integrate_level_one, Lattice, LatticeEdge, LatticeNode};

use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::case::{congruence_params, gen_sin, CaseConfig, CaseId};
use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField};

/// Inputs shared by the three formulas. `alpha1` comes from `alpha` by the
/// transformation with `phi1`, `alpha2` by the one with `phi2`.
#[derive(Clone, Copy, Debug)]
pub struct SuperposeInput<'a> {
    pub case: CaseConfig,
    pub alpha: &'a ScalarField,
    pub alpha1: &'a ScalarField,
    pub alpha2: &'a ScalarField,
    pub phi1: f64,
    pub phi2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperposeOptions {
    /// Band excluded around |tanh-argument| = 1.
    pub guard: f64,
    /// Relative guard for vanishing denominators.
    pub denominator_guard: f64,
    /// Largest admissible jump between neighbours when choosing branches.
    pub max_jump: f64,
}

impl Default for SuperposeOptions {
    fn default() -> Self {
        SuperposeOptions {
            guard: 1e-6,
            denominator_guard: 1e-10,
            max_jump: FRAC_PI_2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Must stay inside (-1, 1).
    UnitBound,
    /// Must stay away from 0.
    NonZero,
}

/// A functional whose critical value marks the singular set of a formula.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub values: ScalarField,
}

/// True where the constraint is safely away from its critical value.
pub fn singularity_mask(c: &Constraint, guard: f64) -> Vec<bool> {
    c.values
        .values
        .iter()
        .zip(&c.values.valid)
        .map(|(&v, &ok)| {
            ok && match c.kind {
                ConstraintKind::UnitBound => v.abs() < 1.0 - guard,
                ConstraintKind::NonZero => v.abs() > guard,
            }
        })
        .collect()
}

/// `delta tau S_{-delta eps}((phi2+phi1)/2) / S_{-delta eps}((phi2-phi1)/2)`.
pub fn hyperbolic_coefficient(case: &CaseConfig, phi1: f64, phi2: f64) -> f64 {
    let xi = -case.delta * case.epsilon;
    (case.delta * case.tau) as f64 * gen_sin(xi, (phi2 + phi1) / 2.0) / gen_sin(xi, (phi2 - phi1) / 2.0)
}

/// Structure constants `(A, B, L)` of the elliptic formulas.
pub fn elliptic_constants(tau: i8, phi1: f64, phi2: f64) -> (f64, f64, f64) {
    let a = tau as f64 * (phi2.sinh() - phi1.sinh());
    let b = phi1.cosh() * phi2.cosh();
    let l = 1.0 + phi1.sinh() * phi2.sinh();
    (a, b, l)
}

/// Hyperbolic formula at one node: `(a*, argument)`. For r = 1 the argument
/// must lie in (-1, 1); for r = 0 the value is a principal branch.
pub fn hyperbolic_node(r: u8, k: f64, a: f64, a1: f64, a2: f64) -> (f64, f64) {
    let q = (a1 - a2) / 4.0;
    if r == 1 {
        let arg = k * q.tanh();
        (a + 4.0 * arg.atanh(), arg)
    } else {
        let (s, c) = q.sin_cos();
        (a + 4.0 * (k * s).atan2(c), k * q.tan())
    }
}

/// Elliptic sinh formula at one node: `(a*, tanh(a*/2), normalized denominator)`.
pub fn elliptic_sinh_node(tau: i8, phi1: f64, phi2: f64, a: f64, a1: f64, a2: f64) -> (f64, f64, f64) {
    let (ca, b, l) = elliptic_constants(tau, phi1, phi2);
    let (s, c) = ((a2 - a1) / 2.0).sin_cos();
    let p = ca * s;
    let q = l * c - b;
    let t = (a / 2.0).tanh();
    let num = p - q * t;
    let den = q - p * t;
    let ratio = num / den;
    (2.0 * ratio.atanh(), ratio, den / (p.abs() + q.abs()))
}

/// Elliptic sine formula at one node as the unit pair `(sin(a*/2), cos(a*/2))`.
pub fn elliptic_sine_node(tau: i8, phi1: f64, phi2: f64, a: f64, a1: f64, a2: f64) -> (f64, f64) {
    let (ca, b, l) = elliptic_constants(tau, phi1, phi2);
    let d = (a2 - a1) / 2.0;
    let (ch, sh) = (d.cosh(), d.sinh());
    let p = ca * sh;
    let q = l * ch - b;
    let den = l - b * ch;
    let (s, c) = (a / 2.0).sin_cos();
    ((p * c - q * s) / den, (q * c + p * s) / den)
}

fn check_input(inp: &SuperposeInput, family: &'static str, ok: fn(CaseId) -> bool) -> Result<()> {
    if !ok(inp.case.id) {
        return Err(Error::WrongCaseFamily {
            case: inp.case.id.index(),
            family,
        });
    }
    if inp.phi1 == inp.phi2 {
        return Err(Error::EqualPhis(inp.phi1));
    }
    congruence_params(&inp.case, inp.phi1)?;
    congruence_params(&inp.case, inp.phi2)?;
    let g = &inp.alpha.grid;
    if !g.same_nodes(&inp.alpha1.grid) || !g.same_nodes(&inp.alpha2.grid) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Per-node result of a formula: value plus constraint functionals.
struct Evaluated {
    values: Vec<f64>,
    valid: Vec<bool>,
    constraints: Vec<(ConstraintKind, Vec<f64>, f64)>,
}

fn evaluate<F>(inp: &SuperposeInput, n_constraints: usize, f: F) -> Evaluated
where
    F: Fn(f64, f64, f64) -> (f64, [f64; 2]) + Sync,
{
    let nodes: Vec<Option<(f64, [f64; 2])>> = (0..inp.alpha.grid.len())
        .into_par_iter()
        .map(|k| {
            if !(inp.alpha.valid[k] && inp.alpha1.valid[k] && inp.alpha2.valid[k]) {
                return None;
            }
            Some(f(inp.alpha.values[k], inp.alpha1.values[k], inp.alpha2.values[k]))
        })
        .collect();
    let values = nodes.iter().map(|n| n.map_or(f64::NAN, |n| n.0)).collect();
    let valid = nodes.iter().map(|n| n.is_some_and(|n| n.0.is_finite())).collect();
    let constraints = (0..n_constraints)
        .map(|c| {
            (
                ConstraintKind::UnitBound,
                nodes.iter().map(|n| n.map_or(f64::NAN, |n| n.1[c])).collect(),
                0.0,
            )
        })
        .collect();
    Evaluated {
        values,
        valid,
        constraints,
    }
}

/// Result of a superposition: the field (masked and branch-unwrapped) and the
/// constraint functionals that define its singular set.
#[derive(Clone, Debug)]
pub struct Superposition {
    pub field: ScalarField,
    pub constraints: Vec<(Constraint, f64)>,
}

impl Evaluated {
    fn finish(mut self, grid: Grid, unwrap: Option<f64>, opts: &SuperposeOptions) -> Superposition {
        let mut constraints = Vec::new();
        for (kind, vals, guard) in self.constraints.drain(..) {
            let c = Constraint {
                kind,
                values: ScalarField::new(grid, vals, self.valid.clone()),
            };
            let keep = singularity_mask(&c, guard);
            for (v, k) in self.valid.iter_mut().zip(&keep) {
                *v &= *k;
            }
            constraints.push((c, guard));
        }
        let mut field = ScalarField::new(grid, self.values, self.valid);
        if let Some(period) = unwrap {
            unwrap_branches(&mut field, period, opts.max_jump);
        }
        Superposition { field, constraints }
    }
}

/// Hyperbolic formula for cases 1-4.
pub fn superpose_hyperbolic(inp: &SuperposeInput, opts: &SuperposeOptions) -> Result<Superposition> {
    check_input(inp, "hyperbolic", CaseId::is_hyperbolic)?;
    let k = hyperbolic_coefficient(&inp.case, inp.phi1, inp.phi2);
    let r = inp.case.r;
    let mut ev = evaluate(inp, usize::from(r == 1), |a, a1, a2| {
        let (v, arg) = hyperbolic_node(r, k, a, a1, a2);
        (v, [arg, 0.0])
    });
    if r == 1 {
        ev.constraints[0].2 = opts.guard;
    }
    let unwrap = (r == 0).then_some(4.0 * PI);
    Ok(ev.finish(inp.alpha.grid, unwrap, opts))
}

/// Elliptic sinh formula (case 5): `a` solves the elliptic sinh-Gordon equation,
/// `alpha1`, `alpha2` the elliptic sine-Gordon one.
pub fn superpose_elliptic_sinh(inp: &SuperposeInput, opts: &SuperposeOptions) -> Result<Superposition> {
    check_input(inp, "elliptic sinh", |c| c == CaseId::Five)?;
    let (tau, p1, p2) = (inp.case.tau, inp.phi1, inp.phi2);
    let mut ev = evaluate(inp, 2, |a, a1, a2| {
        let (v, ratio, den) = elliptic_sinh_node(tau, p1, p2, a, a1, a2);
        (v, [ratio, den])
    });
    ev.constraints[0].2 = opts.guard;
    ev.constraints[1].0 = ConstraintKind::NonZero;
    ev.constraints[1].2 = opts.denominator_guard;
    Ok(ev.finish(inp.alpha.grid, None, opts))
}

/// Elliptic sine formula (case 6): `a` solves the elliptic sine-Gordon equation,
/// `alpha1`, `alpha2` the elliptic sinh-Gordon one.
pub fn superpose_elliptic_sine(inp: &SuperposeInput, opts: &SuperposeOptions) -> Result<Superposition> {
    check_input(inp, "elliptic sine", |c| c == CaseId::Six)?;
    let (tau, p1, p2) = (inp.case.tau, inp.phi1, inp.phi2);
    let ev = evaluate(inp, 0, |a, a1, a2| {
        let (s, c) = elliptic_sine_node(tau, p1, p2, a, a1, a2);
        (2.0 * s.atan2(c), [0.0; 2])
    });
    Ok(ev.finish(inp.alpha.grid, Some(4.0 * PI), opts))
}

/// Dispatch on the case of `inp`.
pub fn superpose(inp: &SuperposeInput, opts: &SuperposeOptions) -> Result<Superposition> {
    match inp.case.id {
        CaseId::Five => superpose_elliptic_sinh(inp, opts),
        CaseId::Six => superpose_elliptic_sine(inp, opts),
        _ => superpose_hyperbolic(inp, opts),
    }
}

/// Shift values by multiples of `period` so that neighbours differ by less
/// than `max_jump`, starting from the valid node closest to the coordinate
/// origin and sweeping its row, then every column. Nodes that cannot be
/// matched are masked.
pub fn unwrap_branches(field: &mut ScalarField, period: f64, max_jump: f64) {
    let g = field.grid;
    let Some(start) = (0..g.len())
        .filter(|&k| field.valid[k])
        .min_by(|&a, &b| {
            let d = |k: usize| {
                let (i, j) = g.ij(k);
                let (x, y) = g.point(i, j);
                x * x + y * y
            };
            d(a).total_cmp(&d(b))
        })
    else {
        return;
    };
    let (i0, j0) = g.ij(start);
    let align = |v: f64, reference: f64| -> Option<f64> {
        let w = v - period * ((v - reference) / period).round();
        ((w - reference).abs() <= max_jump).then_some(w)
    };
    // the reference row
    let mut row: Vec<Option<f64>> = vec![None; g.n1()];
    row[i0] = Some(field.values[start]);
    for dir in [1isize, -1] {
        let mut last = field.values[start];
        let mut i = i0 as isize + dir;
        while i >= 0 && (i as usize) < g.n1() {
            let k = g.idx(i as usize, j0);
            if field.valid[k] {
                if let Some(w) = align(field.values[k], last) {
                    row[i as usize] = Some(w);
                    last = w;
                }
            }
            i += dir;
        }
    }
    let cols: Vec<Vec<Option<f64>>> = (0..g.n1())
        .into_par_iter()
        .map(|i| {
            let mut col = vec![None; g.n2()];
            let Some(r) = row[i] else {
                return col;
            };
            col[j0] = Some(r);
            for dir in [1isize, -1] {
                let mut last = r;
                let mut j = j0 as isize + dir;
                while j >= 0 && (j as usize) < g.n2() {
                    let k = g.idx(i, j as usize);
                    if field.valid[k] {
                        if let Some(w) = align(field.values[k], last) {
                            col[j as usize] = Some(w);
                            last = w;
                        }
                    }
                    j += dir;
                }
            }
            col
        })
        .collect();
    for (i, col) in cols.into_iter().enumerate() {
        for (j, v) in col.into_iter().enumerate() {
            let k = g.idx(i, j);
            match v {
                Some(w) => field.values[k] = w,
                None => field.valid[k] = false,
            }
        }
    }
}
