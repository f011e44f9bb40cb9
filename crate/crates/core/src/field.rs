//! Grids, sampled fields and closed-form solutions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Uniformly spaced, strictly increasing samples `start + k * step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    /// Samples from `min` to `max` inclusive; `max` is snapped to the last node
    /// not exceeding it (with a small tolerance for round-off).
    pub fn new(min: f64, max: f64, step: f64) -> Result<Axis> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= 0.0 || max < min {
            return Err(Error::InvalidGrid(format!(
                "axis {min}:{max}:{step} needs min <= max and step > 0"
            )));
        }
        let n = ((max - min) / step + 1e-9).floor() as usize + 1;
        Ok(Axis {
            start: min,
            step,
            len: n,
        })
    }

    pub fn from_len(start: f64, step: f64, len: usize) -> Axis {
        Axis { start, step, len }
    }

    #[inline]
    pub fn at(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.at(self.len.saturating_sub(1))
    }

    /// Index of the node at `x`, if `x` is within 1e-6 steps of one.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.start) / self.step;
        let k = t.round();
        if k < 0.0 || k >= self.len as f64 || (t - k).abs() > 1e-6 {
            return None;
        }
        Some(k as usize)
    }

    /// Same axis with half the spacing over the same interval.
    pub fn refined(&self) -> Axis {
        Axis {
            start: self.start,
            step: self.step / 2.0,
            len: 2 * self.len - 1,
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.at(k))
    }
}

/// Rectangular grid. Node `(i, j)` sits at `(x1.at(i), x2.at(j))`; storage is
/// row-major with rows of constant `x2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x1: Axis,
    pub x2: Axis,
}

impl Grid {
    pub fn new(x1: Axis, x2: Axis) -> Grid {
        Grid { x1, x2 }
    }

    /// Square-ish grid helper: `[a1, b1] x [a2, b2]` with step `h` on both axes.
    pub fn rect(a1: f64, b1: f64, a2: f64, b2: f64, h: f64) -> Result<Grid> {
        Ok(Grid {
            x1: Axis::new(a1, b1, h)?,
            x2: Axis::new(a2, b2, h)?,
        })
    }

    /// Parse `min:max:h,min:max:h`.
    pub fn parse(spec: &str) -> Result<Grid> {
        let bad = || Error::InvalidGrid(format!("'{spec}' is not of the form min:max:h,min:max:h"));
        let axes: Vec<&str> = spec.split(',').map(str::trim).collect();
        if axes.len() != 2 {
            return Err(bad());
        }
        let mut parsed = Vec::with_capacity(2);
        for a in axes {
            let nums: Vec<f64> = a
                .split(':')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            if nums.len() != 3 {
                return Err(bad());
            }
            parsed.push(Axis::new(nums[0], nums[1], nums[2])?);
        }
        Ok(Grid::new(parsed[0], parsed[1]))
    }

    #[inline]
    pub fn n1(&self) -> usize {
        self.x1.len
    }

    #[inline]
    pub fn n2(&self) -> usize {
        self.x2.len
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n1() * self.n2()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n1() + i
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x1.at(i), self.x2.at(j))
    }

    /// `(i, j)` of the flat index.
    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.n1(), k / self.n1())
    }

    pub fn node_of(&self, x1: f64, x2: f64) -> Option<(usize, usize)> {
        Some((self.x1.index_of(x1)?, self.x2.index_of(x2)?))
    }

    pub fn refined(&self) -> Grid {
        Grid::new(self.x1.refined(), self.x2.refined())
    }

    /// Nodes with all four axis neighbours inside the grid.
    #[inline]
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i > 0 && j > 0 && i + 1 < self.n1() && j + 1 < self.n2()
    }

    /// Same nodes up to round-off in the axis description.
    pub fn same_nodes(&self, other: &Grid) -> bool {
        let close = |a: &Axis, b: &Axis| {
            a.len == b.len
                && (a.step - b.step).abs() <= 1e-12 * a.step.abs()
                && (a.start - b.start).abs() <= 1e-9 * a.step.abs()
        };
        close(&self.x1, &other.x1) && close(&self.x2, &other.x2)
    }

    pub(crate) fn require(&self, needed: usize) -> Result<()> {
        let got = self.n1().min(self.n2());
        if got < needed {
            return Err(Error::GridTooSmall { needed, got });
        }
        Ok(())
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{},{}:{}:{}",
            self.x1.start,
            self.x1.end(),
            self.x1.step,
            self.x2.start,
            self.x2.end(),
            self.x2.step
        )
    }
}

/// A field sampled on a grid with a validity mask.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>, valid: Vec<bool>) -> ScalarField {
        assert_eq!(values.len(), grid.len());
        assert_eq!(valid.len(), grid.len());
        ScalarField {
            grid,
            values,
            valid,
        }
    }

    pub fn constant(grid: Grid, v: f64) -> ScalarField {
        ScalarField::new(grid, vec![v; grid.len()], vec![true; grid.len()])
    }

    /// Sample `f` at every node in parallel; `None` or non-finite marks a node invalid.
    pub fn from_fn<F>(grid: Grid, f: F) -> ScalarField
    where
        F: Fn(f64, f64) -> Option<f64> + Sync,
    {
        let (values, valid): (Vec<f64>, Vec<bool>) = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = grid.ij(k);
                let (x1, x2) = grid.point(i, j);
                match f(x1, x2) {
                    Some(v) if v.is_finite() => (v, true),
                    _ => (f64::NAN, false),
                }
            })
            .unzip();
        ScalarField::new(grid, values, valid)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = self.grid.idx(i, j);
        if self.valid[k] {
            Some(self.values[k])
        } else {
            None
        }
    }

    /// Value at the node nearest to `(x1, x2)` if that is exactly a node.
    pub fn at_point(&self, x1: f64, x2: f64) -> Option<f64> {
        let (i, j) = self.grid.node_of(x1, x2)?;
        self.get(i, j)
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn masked_count(&self) -> usize {
        self.grid.len() - self.valid_count()
    }

    /// Apply `f` to valid values; the result is valid where `f` returns a finite value.
    pub fn map<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> ScalarField {
        let (values, valid) = self
            .values
            .par_iter()
            .zip(self.valid.par_iter())
            .map(|(&v, &ok)| {
                let w = if ok { f(v) } else { f64::NAN };
                (w, ok && w.is_finite())
            })
            .unzip();
        ScalarField::new(self.grid, values, valid)
    }

    /// Nodewise combination over nodes valid in both.
    pub fn zip_with<F: Fn(f64, f64) -> f64 + Sync>(&self, other: &ScalarField, f: F) -> Result<ScalarField> {
        if !self.grid.same_nodes(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let (values, valid) = (0..self.grid.len())
            .into_par_iter()
            .map(|k| {
                if self.valid[k] && other.valid[k] {
                    let w = f(self.values[k], other.values[k]);
                    (w, w.is_finite())
                } else {
                    (f64::NAN, false)
                }
            })
            .unzip();
        Ok(ScalarField::new(self.grid, values, valid))
    }

    /// Invalidate nodes where `keep` is false.
    pub fn restrict(&mut self, keep: &[bool]) {
        for (v, k) in self.valid.iter_mut().zip(keep) {
            *v &= *k;
        }
    }

    /// Copy whose valid nodes are those with every node within `margin` cells
    /// (Chebyshev distance, grid edges excluded) valid in `self`.
    pub fn eroded(&self, margin: usize) -> ScalarField {
        let g = self.grid;
        let (n1, n2) = (g.n1(), g.n2());
        let keep: Vec<bool> = (0..g.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = g.ij(k);
                if i < margin || j < margin || i + margin >= n1 || j + margin >= n2 {
                    return false;
                }
                (j - margin..=j + margin).all(|jj| (i - margin..=i + margin).all(|ii| self.valid[g.idx(ii, jj)]))
            })
            .collect();
        let mut out = self.clone();
        out.restrict(&keep);
        out
    }

    /// Maximum of |value| over valid nodes (0 when none are valid).
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, ok)| **ok)
            .fold(0.0, |m, (v, _)| m.max(v.abs()))
    }

    /// Maximum of |value| over valid nodes accepted by `keep(x1, x2)`.
    pub fn max_abs_where<F: Fn(f64, f64) -> bool>(&self, keep: F) -> f64 {
        let mut m: f64 = 0.0;
        for k in 0..self.grid.len() {
            if !self.valid[k] {
                continue;
            }
            let (i, j) = self.grid.ij(k);
            let (x1, x2) = self.grid.point(i, j);
            if keep(x1, x2) {
                m = m.max(self.values[k].abs());
            }
        }
        m
    }

    /// Max |self - other| over nodes valid in both.
    pub fn max_diff(&self, other: &ScalarField) -> Result<f64> {
        Ok(self.zip_with(other, |a, b| a - b)?.max_abs())
    }

    /// Value and central-difference gradient at an interior node whose four
    /// neighbours are valid.
    pub fn jet(&self, i: usize, j: usize) -> Option<(f64, [f64; 2])> {
        if !self.grid.is_interior(i, j) {
            return None;
        }
        let v = self.get(i, j)?;
        let e = self.get(i + 1, j)?;
        let w = self.get(i - 1, j)?;
        let n = self.get(i, j + 1)?;
        let s = self.get(i, j - 1)?;
        let h1 = self.grid.x1.step;
        let h2 = self.grid.x2.step;
        Some((v, [(e - w) / (2.0 * h1), (n - s) / (2.0 * h2)]))
    }

    /// Value with central second differences `(a11, a22)`.
    pub fn second(&self, i: usize, j: usize) -> Option<(f64, [f64; 2])> {
        if !self.grid.is_interior(i, j) {
            return None;
        }
        let v = self.get(i, j)?;
        let e = self.get(i + 1, j)?;
        let w = self.get(i - 1, j)?;
        let n = self.get(i, j + 1)?;
        let s = self.get(i, j - 1)?;
        let h1 = self.grid.x1.step;
        let h2 = self.grid.x2.step;
        Some((v, [(e - 2.0 * v + w) / (h1 * h1), (n - 2.0 * v + s) / (h2 * h2)]))
    }
}

type ValueFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
type PairFn = dyn Fn(f64, f64) -> [f64; 2] + Send + Sync;
type DomainFn = dyn Fn(f64, f64) -> bool + Send + Sync;

/// A closed-form solution with an optional exact gradient and exact
/// second derivatives `(a11, a22)`.
#[derive(Clone)]
pub struct AnalyticSolution {
    name: String,
    eval: Arc<ValueFn>,
    grad: Option<Arc<PairFn>>,
    second: Option<Arc<PairFn>>,
    domain: Arc<DomainFn>,
}

impl fmt::Debug for AnalyticSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticSolution")
            .field("name", &self.name)
            .field("exact_grad", &self.grad.is_some())
            .field("exact_second", &self.second.is_some())
            .finish()
    }
}

/// Step for difference gradients of closed forms without an exact one.
const FD_STEP: f64 = 1e-5;

impl AnalyticSolution {
    pub fn new<F>(name: impl Into<String>, eval: F) -> AnalyticSolution
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        AnalyticSolution {
            name: name.into(),
            eval: Arc::new(eval),
            grad: None,
            second: None,
            domain: Arc::new(|_, _| true),
        }
    }

    pub fn with_grad<G>(mut self, grad: G) -> Self
    where
        G: Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_second<G>(mut self, second: G) -> Self
    where
        G: Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    {
        self.second = Some(Arc::new(second));
        self
    }

    pub fn with_domain<D>(mut self, domain: D) -> Self
    where
        D: Fn(f64, f64) -> bool + Send + Sync + 'static,
    {
        self.domain = Arc::new(domain);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_exact_grad(&self) -> bool {
        self.grad.is_some()
    }

    pub fn has_exact_second(&self) -> bool {
        self.second.is_some()
    }

    pub fn in_domain(&self, x1: f64, x2: f64) -> bool {
        (self.domain)(x1, x2)
    }

    pub fn value(&self, x1: f64, x2: f64) -> Option<f64> {
        if !self.in_domain(x1, x2) {
            return None;
        }
        let v = (self.eval)(x1, x2);
        v.is_finite().then_some(v)
    }

    /// Exact gradient when supplied, else central differences of the closed form.
    pub fn gradient(&self, x1: f64, x2: f64) -> Option<[f64; 2]> {
        if !self.in_domain(x1, x2) {
            return None;
        }
        if let Some(g) = &self.grad {
            let g = g(x1, x2);
            return (g[0].is_finite() && g[1].is_finite()).then_some(g);
        }
        let d1 = (self.value(x1 + FD_STEP, x2)? - self.value(x1 - FD_STEP, x2)?) / (2.0 * FD_STEP);
        let d2 = (self.value(x1, x2 + FD_STEP)? - self.value(x1, x2 - FD_STEP)?) / (2.0 * FD_STEP);
        Some([d1, d2])
    }

    /// Exact `(a11, a22)` if supplied.
    pub fn exact_second(&self, x1: f64, x2: f64) -> Option<[f64; 2]> {
        if !self.in_domain(x1, x2) {
            return None;
        }
        self.second.as_ref().map(|s| s(x1, x2))
    }

    pub fn sample(&self, grid: &Grid) -> ScalarField {
        ScalarField::from_fn(*grid, |x1, x2| self.value(x1, x2))
    }
}

/// Anything that can report a value and gradient at an arbitrary point.
pub trait FieldSource: Sync {
    fn jet_at(&self, x1: f64, x2: f64) -> Option<(f64, [f64; 2])>;
}

impl FieldSource for AnalyticSolution {
    fn jet_at(&self, x1: f64, x2: f64) -> Option<(f64, [f64; 2])> {
        Some((self.value(x1, x2)?, self.gradient(x1, x2)?))
    }
}

/// Cubic Lagrange weights and their derivatives at offset `t` from node 0 of
/// the stencil `{-1, 0, 1, 2}`.
fn cubic_weights(t: f64) -> ([f64; 4], [f64; 4]) {
    let w = [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ];
    let d = [
        -(3.0 * t * t - 6.0 * t + 2.0) / 6.0,
        (3.0 * t * t - 4.0 * t - 1.0) / 2.0,
        -(3.0 * t * t - 2.0 * t - 2.0) / 2.0,
        (3.0 * t * t - 1.0) / 6.0,
    ];
    (w, d)
}

/// Bicubic interpolation over a 4x4 stencil of valid nodes.
impl FieldSource for ScalarField {
    fn jet_at(&self, x1: f64, x2: f64) -> Option<(f64, [f64; 2])> {
        let g = &self.grid;
        if g.n1() < 4 || g.n2() < 4 {
            return None;
        }
        let locate = |a: &Axis, x: f64| -> Option<(usize, f64)> {
            let t = (x - a.start) / a.step;
            if t < -1e-9 || t > (a.len - 1) as f64 + 1e-9 {
                return None;
            }
            let k = (t.floor() as isize).clamp(1, a.len as isize - 3) as usize;
            Some((k, t - k as f64))
        };
        let (i0, t1) = locate(&g.x1, x1)?;
        let (j0, t2) = locate(&g.x2, x2)?;
        let (w1, d1) = cubic_weights(t1);
        let (w2, d2) = cubic_weights(t2);
        let (mut v, mut g1, mut g2) = (0.0, 0.0, 0.0);
        for b in 0..4 {
            for a in 0..4 {
                let f = self.get(i0 + a - 1, j0 + b - 1)?;
                v += w1[a] * w2[b] * f;
                g1 += d1[a] * w2[b] * f;
                g2 += w1[a] * d2[b] * f;
            }
        }
        Some((v, [g1 / g.x1.step, g2 / g.x2.step]))
    }
}

/// Either kind of input accepted by the residual operators.
#[derive(Clone, Copy, Debug)]
pub enum Operand<'a> {
    Field(&'a ScalarField),
    Analytic(&'a AnalyticSolution),
}

impl<'a> From<&'a ScalarField> for Operand<'a> {
    fn from(f: &'a ScalarField) -> Self {
        Operand::Field(f)
    }
}

impl<'a> From<&'a AnalyticSolution> for Operand<'a> {
    fn from(f: &'a AnalyticSolution) -> Self {
        Operand::Analytic(f)
    }
}

impl Operand<'_> {
    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        match self {
            Operand::Field(f) if !f.grid.same_nodes(grid) => Err(Error::GridMismatch),
            _ => Ok(()),
        }
    }

    /// Value and gradient at node `(i, j)`: exact for closed forms, central
    /// differences for sampled fields.
    pub(crate) fn node_jet(&self, grid: &Grid, i: usize, j: usize) -> Option<(f64, [f64; 2])> {
        match self {
            Operand::Field(f) => f.jet(i, j),
            Operand::Analytic(a) => {
                let (x1, x2) = grid.point(i, j);
                a.jet_at(x1, x2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_parse_and_index() {
        let g = Grid::parse("-4:0:0.01, -4:4:0.01").unwrap();
        assert_eq!((g.n1(), g.n2()), (401, 801));
        assert_eq!(g.node_of(-2.0, 0.0), Some((200, 400)));
        assert_eq!(g.node_of(-2.005, 0.0), None);
        assert!(Grid::parse("0:1").is_err());
        assert!(Grid::parse("1:0:0.1,0:1:0.1").is_err());
        assert!(Grid::parse("0:1:0,0:1:0.1").is_err());
    }

    #[test]
    fn erosion() {
        let g = Grid::rect(0.0, 1.0, 0.0, 1.0, 0.1).unwrap();
        let mut f = ScalarField::constant(g, 1.0);
        assert_eq!(f.eroded(0).valid_count(), 121);
        assert_eq!(f.eroded(1).valid_count(), 81);
        f.valid[g.idx(5, 5)] = false;
        assert_eq!(f.eroded(1).valid_count(), 72);
    }

    #[test]
    fn refined_grid_contains_coarse_nodes() {
        let g = Grid::rect(-1.0, 1.0, 0.0, 0.5, 0.1).unwrap();
        let f = g.refined();
        assert_eq!(f.n1(), 2 * g.n1() - 1);
        assert_abs_diff_eq!(f.x1.at(2 * 7), g.x1.at(7), epsilon = 1e-15);
    }

    #[test]
    fn bicubic_reproduces_cubics() {
        let g = Grid::rect(-1.0, 1.0, -1.0, 1.0, 0.1).unwrap();
        let p = |x: f64, y: f64| x * x * x - 2.0 * x * y * y + y + 0.5;
        let f = ScalarField::from_fn(g, |x, y| Some(p(x, y)));
        let (v, gr) = f.jet_at(0.237, -0.419).unwrap();
        assert_abs_diff_eq!(v, p(0.237, -0.419), epsilon = 1e-12);
        let (x, y) = (0.237, -0.419);
        assert_abs_diff_eq!(gr[0], 3.0 * x * x - 2.0 * y * y, epsilon = 1e-11);
        assert_abs_diff_eq!(gr[1], -4.0 * x * y + 1.0, epsilon = 1e-11);
        assert!(f.jet_at(1.2, 0.0).is_none());
    }

    #[test]
    fn analytic_fallback_gradient() {
        let a = AnalyticSolution::new("q", |x, y| x.sin() * y);
        let g = a.gradient(0.3, 2.0).unwrap();
        assert_abs_diff_eq!(g[0], 0.3f64.cos() * 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g[1], 0.3f64.sin(), epsilon = 1e-9);
    }
}
