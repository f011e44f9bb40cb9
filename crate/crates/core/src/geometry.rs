//! Surfaces in R^3_s: fundamental forms from solutions, two built-in
//! surfaces, numerical curvature, the Backlund surface transformation and a
//! line-congruence check.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use crate::case::{gen_cos, gen_sin, CaseConfig, CaseId, CongruenceParams};
use crate::error::{Error, Result};
use crate::field::{AnalyticSolution, Grid, ScalarField};
use crate::seeds::{example_solution, SeedKind, SeedSpec};

pub type Vec3 = Vector3<f64>;

/// `u1 v1 + u2 v2 + (-1)^s u3 v3`.
#[inline]
pub fn pseudo_dot(s: u8, u: &Vec3, v: &Vec3) -> f64 {
    let t = u.z * v.z;
    u.x * v.x + u.y * v.y + if s % 2 == 0 { t } else { -t }
}

/// Vector pseudo-orthogonal to both `u` and `v`: the Euclidean cross product
/// with its third component multiplied by `(-1)^s`.
#[inline]
pub fn pseudo_cross(s: u8, u: &Vec3, v: &Vec3) -> Vec3 {
    let c = u.cross(v);
    if s % 2 == 0 {
        c
    } else {
        Vec3::new(c.x, c.y, -c.z)
    }
}

/// Sampled immersion with optional exact tangents `(X_x1, X_x2)`.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub grid: Grid,
    pub points: Vec<Vec3>,
    pub tangents: Option<Vec<[Vec3; 2]>>,
    pub s: u8,
    pub valid: Vec<bool>,
}

impl SurfaceMesh {
    pub fn from_fn<P>(grid: Grid, s: u8, point: P) -> SurfaceMesh
    where
        P: Fn(f64, f64) -> Option<Vec3> + Sync,
    {
        let pts: Vec<Option<Vec3>> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = grid.ij(k);
                let (x1, x2) = grid.point(i, j);
                point(x1, x2).filter(|p| p.iter().all(|c| c.is_finite()))
            })
            .collect();
        SurfaceMesh {
            grid,
            valid: pts.iter().map(Option::is_some).collect(),
            points: pts.into_iter().map(|p| p.unwrap_or(Vec3::from_element(f64::NAN))).collect(),
            tangents: None,
            s,
        }
    }

    pub fn with_tangents<T>(mut self, tangents: T) -> SurfaceMesh
    where
        T: Fn(f64, f64) -> [Vec3; 2] + Sync,
    {
        let g = self.grid;
        let t: Vec<[Vec3; 2]> = (0..g.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = g.ij(k);
                let (x1, x2) = g.point(i, j);
                tangents(x1, x2)
            })
            .collect();
        self.tangents = Some(t);
        self
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    #[inline]
    fn p(&self, i: usize, j: usize) -> Option<Vec3> {
        let k = self.grid.idx(i, j);
        self.valid[k].then(|| self.points[k])
    }

    /// Tangents at a node: exact if available, else central differences.
    pub fn tangents_at(&self, i: usize, j: usize) -> Option<[Vec3; 2]> {
        let k = self.grid.idx(i, j);
        if !self.valid[k] {
            return None;
        }
        if let Some(t) = &self.tangents {
            return Some(t[k]);
        }
        if !self.grid.is_interior(i, j) {
            return None;
        }
        let (h1, h2) = (self.grid.x1.step, self.grid.x2.step);
        Some([
            (self.p(i + 1, j)? - self.p(i - 1, j)?) / (2.0 * h1),
            (self.p(i, j + 1)? - self.p(i, j - 1)?) / (2.0 * h2),
        ])
    }

    /// Second derivatives `(X_11, X_12, X_22)`.
    fn second_at(&self, i: usize, j: usize) -> Option<[Vec3; 3]> {
        if !self.grid.is_interior(i, j) {
            return None;
        }
        let (h1, h2) = (self.grid.x1.step, self.grid.x2.step);
        if self.tangents.is_some() {
            let e = self.tangents_at(i + 1, j)?;
            let w = self.tangents_at(i - 1, j)?;
            let n = self.tangents_at(i, j + 1)?;
            let s = self.tangents_at(i, j - 1)?;
            return Some([
                (e[0] - w[0]) / (2.0 * h1),
                (n[0] - s[0]) / (2.0 * h2),
                (n[1] - s[1]) / (2.0 * h2),
            ]);
        }
        let c = self.p(i, j)?;
        let x11 = (self.p(i + 1, j)? - 2.0 * c + self.p(i - 1, j)?) / (h1 * h1);
        let x22 = (self.p(i, j + 1)? - 2.0 * c + self.p(i, j - 1)?) / (h2 * h2);
        let x12 = (self.p(i + 1, j + 1)? - self.p(i + 1, j - 1)? - self.p(i - 1, j + 1)? + self.p(i - 1, j - 1)?)
            / (4.0 * h1 * h2);
        Some([x11, x12, x22])
    }

    /// Unit normal and its causal sign `sign<N, N>`.
    pub fn normal_at(&self, i: usize, j: usize) -> Option<(Vec3, f64)> {
        let [t1, t2] = self.tangents_at(i, j)?;
        unit_normal(self.s, &t1, &t2)
    }
}

/// Guard on |<N, N>| relative to |t1|^2 |t2|^2.
const NORMAL_GUARD: f64 = 1e-12;

fn unit_normal(s: u8, t1: &Vec3, t2: &Vec3) -> Option<(Vec3, f64)> {
    let n = pseudo_cross(s, t1, t2);
    let nn = pseudo_dot(s, &n, &n);
    let scale = t1.norm_squared() * t2.norm_squared();
    if !(nn.abs() > NORMAL_GUARD * scale) {
        return None;
    }
    Some((n / nn.abs().sqrt(), nn.signum()))
}

/// Coefficients of the first and second fundamental forms.
#[derive(Clone, Debug)]
pub struct FormCoefficients {
    pub e: ScalarField,
    pub f: ScalarField,
    pub g: ScalarField,
    pub l: ScalarField,
    pub m: ScalarField,
    pub n: ScalarField,
}

/// Forms of the surface associated with `alpha` in curvature-line coordinates.
pub fn fundamental_forms_from_alpha(alpha: &ScalarField, case: &CaseConfig) -> FormCoefficients {
    let (eps, rs, l, tau) = (case.epsilon as f64, case.r_sign() as f64, case.l, case.tau as f64);
    let cs = |a: f64| (gen_cos(l, a / 2.0), gen_sin(l, a / 2.0));
    let e = alpha.map(|a| eps * cs(a).0.powi(2));
    let g = alpha.map(|a| rs * eps * cs(a).1.powi(2));
    let lf = alpha.map(|a| {
        let (c, s) = cs(a);
        tau * eps * s * c
    });
    let nf = alpha.map(|a| {
        let (c, s) = cs(a);
        -tau * rs * eps * l as f64 * s * c
    });
    let zero = alpha.map(|_| 0.0);
    FormCoefficients {
        e,
        f: zero.clone(),
        g,
        l: lf,
        m: zero,
        n: nf,
    }
}

/// `eps_N (LN - M^2)/(EG - F^2)` with `eps_N = (-1)^(s+r)` the causal sign of
/// the normal. Nodes with a degenerate metric are invalid.
pub fn forms_curvature(forms: &FormCoefficients, case: &CaseConfig) -> ScalarField {
    let eps_n = crate::case::parity(case.s + case.r) as f64;
    let grid = forms.e.grid;
    ScalarField::from_fn(grid, |x1, x2| {
        let (i, j) = grid.node_of(x1, x2)?;
        let det = forms.e.get(i, j)? * forms.g.get(i, j)? - forms.f.get(i, j)?.powi(2);
        if det.abs() < 1e-14 {
            return None;
        }
        Some(eps_n * (forms.l.get(i, j)? * forms.n.get(i, j)? - forms.m.get(i, j)?.powi(2)) / det)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinSurface {
    /// Time-like surface with K = 1 in R^3_1, paired with the case-4 kink.
    TimelikeK1,
    /// Time-like surface with K = -1 in R^3_1, paired with `4 arctan e^x1`.
    TimelikeKminus1,
}

impl BuiltinSurface {
    pub fn as_str(self) -> &'static str {
        match self {
            BuiltinSurface::TimelikeK1 => "timelike-k1",
            BuiltinSurface::TimelikeKminus1 => "timelike-kminus1",
        }
    }

    /// Case whose transformations act on the paired solution.
    pub fn case(self) -> CaseConfig {
        match self {
            BuiltinSurface::TimelikeK1 => CaseConfig::new(CaseId::Four, -1),
            BuiltinSurface::TimelikeKminus1 => CaseConfig::new(CaseId::Six, 1),
        }
    }

    /// Parameter of the paired solution as a lattice node (TimelikeK1 only).
    pub fn paired_phi(self) -> Option<f64> {
        match self {
            BuiltinSurface::TimelikeK1 => Some(FRAC_PI_2),
            BuiltinSurface::TimelikeKminus1 => None,
        }
    }
}

impl fmt::Display for BuiltinSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BuiltinSurface {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "timelike-k1" => Ok(BuiltinSurface::TimelikeK1),
            "timelike-kminus1" => Ok(BuiltinSurface::TimelikeKminus1),
            _ => Err(Error::Config(format!("unknown surface '{s}'"))),
        }
    }
}

/// A built-in surface sampled on `grid`, with exact tangents, and its paired solution.
#[derive(Clone, Debug)]
pub struct SurfacePair {
    pub mesh: SurfaceMesh,
    pub alpha: AnalyticSolution,
    pub case: CaseConfig,
}

pub fn builtin_surface(name: BuiltinSurface, grid: &Grid) -> Result<SurfacePair> {
    match name {
        BuiltinSurface::TimelikeK1 => {
            if grid.x1.values().any(|x| x.abs() < 1e-12) {
                return Err(Error::GridContainsSingularAxis);
            }
            let mesh = SurfaceMesh::from_fn(*grid, 1, |x1, x2| {
                let sh = x1.sinh();
                Some(Vec3::new(x2.cos() / sh, x2.sin() / sh, x1 - x1.cosh() / sh))
            })
            .with_tangents(|x1, x2| {
                let (sh, ch) = (x1.sinh(), x1.cosh());
                let (s2, c2) = x2.sin_cos();
                [
                    Vec3::new(-c2 * ch / (sh * sh), -s2 * ch / (sh * sh), 1.0 + 1.0 / (sh * sh)),
                    Vec3::new(-s2 / sh, c2 / sh, 0.0),
                ]
            });
            let alpha = example_solution(&SeedSpec::new(SeedKind::Example2Alpha, CaseId::Four).phi(FRAC_PI_2))?;
            Ok(SurfacePair {
                mesh,
                alpha,
                case: name.case(),
            })
        }
        BuiltinSurface::TimelikeKminus1 => {
            let mesh = SurfaceMesh::from_fn(*grid, 1, |x1, x2| {
                let se = 1.0 / x1.cosh();
                Some(Vec3::new(x1 - x1.tanh(), se * x2.cosh(), se * x2.sinh()))
            })
            .with_tangents(|x1, x2| {
                let (se, th) = (1.0 / x1.cosh(), x1.tanh());
                [
                    Vec3::new(th * th, -se * th * x2.cosh(), -se * th * x2.sinh()),
                    Vec3::new(0.0, se * x2.sinh(), se * x2.cosh()),
                ]
            });
            let alpha = example_solution(&SeedSpec::new(SeedKind::Example4Alpha, CaseId::Six))?;
            Ok(SurfacePair {
                mesh,
                alpha,
                case: name.case(),
            })
        }
    }
}

/// Unit sphere `(cos u cos v, cos u sin v, sin u)` in R^3_0, for checks.
pub fn unit_sphere(grid: &Grid) -> SurfaceMesh {
    SurfaceMesh::from_fn(*grid, 0, |u, v| Some(Vec3::new(u.cos() * v.cos(), u.cos() * v.sin(), u.sin())))
}

/// Relative guard on `EG - F^2`.
const METRIC_GUARD: f64 = 1e-12;

/// Gaussian curvature from differences of the mesh (or of its exact tangents).
pub fn numerical_curvature(x: &SurfaceMesh) -> Result<ScalarField> {
    let g = x.grid;
    g.require(3)?;
    let k = ScalarField::from_fn(g, |x1, x2| {
        let (i, j) = g.node_of(x1, x2)?;
        let [t1, t2] = x.tangents_at(i, j)?;
        let [x11, x12, x22] = x.second_at(i, j)?;
        let (n, eps_n) = unit_normal(x.s, &t1, &t2)?;
        let e = pseudo_dot(x.s, &t1, &t1);
        let f = pseudo_dot(x.s, &t1, &t2);
        let gg = pseudo_dot(x.s, &t2, &t2);
        let det = e * gg - f * f;
        if det.abs() <= METRIC_GUARD * (e.abs() + gg.abs()).powi(2) {
            return None;
        }
        let l = pseudo_dot(x.s, &x11, &n);
        let m = pseudo_dot(x.s, &x12, &n);
        let nn = pseudo_dot(x.s, &x22, &n);
        Some(eps_n * (l * nn - m * m) / det)
    });
    if k.valid_count() == 0 {
        return Err(Error::DegenerateMetric);
    }
    Ok(k)
}

/// Index of the induced metric by majority over nodes: 0 Riemannian, 1 Lorentzian.
pub fn detect_index(x: &SurfaceMesh) -> Option<u8> {
    let g = x.grid;
    let (mut pos, mut neg) = (0usize, 0usize);
    for k in 0..g.len() {
        let (i, j) = g.ij(k);
        let Some([t1, t2]) = x.tangents_at(i, j) else {
            continue;
        };
        let det = pseudo_dot(x.s, &t1, &t1) * pseudo_dot(x.s, &t2, &t2) - pseudo_dot(x.s, &t1, &t2).powi(2);
        if det > 0.0 {
            pos += 1;
        } else if det < 0.0 {
            neg += 1;
        }
    }
    match (pos, neg) {
        (0, 0) => None,
        (p, n) if p >= n => Some(0),
        _ => Some(1),
    }
}

/// Guard on `|C_l(a/2)|`, `|S_l(a/2)|` in the transformation.
const ALPHA_GUARD: f64 = 1e-12;

/// `X + lambda (C_R(a'/2)/C_l(a/2) X_x1 + S_R(a'/2)/S_l(a/2) X_x2)`.
pub fn transform_surface(
    x: &SurfaceMesh,
    alpha: &ScalarField,
    alpha_prime: &ScalarField,
    case: &CaseConfig,
    params: &CongruenceParams,
) -> Result<SurfaceMesh> {
    if !x.grid.same_nodes(&alpha.grid) || !x.grid.same_nodes(&alpha_prime.grid) {
        return Err(Error::GridMismatch);
    }
    let (rs, l, lam) = (case.r_sign(), case.l, params.lambda);
    let g = x.grid;
    let out = SurfaceMesh::from_fn(g, x.s, |x1, x2| {
        let (i, j) = g.node_of(x1, x2)?;
        let a = alpha.get(i, j)?;
        let ap = alpha_prime.get(i, j)?;
        let [t1, t2] = x.tangents_at(i, j)?;
        let (cl, sl) = (gen_cos(l, a / 2.0), gen_sin(l, a / 2.0));
        if cl.abs() < ALPHA_GUARD || sl.abs() < ALPHA_GUARD {
            return None;
        }
        let (cr, sr) = (gen_cos(rs, ap / 2.0), gen_sin(rs, ap / 2.0));
        Some(x.points[g.idx(i, j)] + lam * (cr / cl * t1 + sr / sl * t2))
    });
    if out.valid_count() == 0 {
        return Err(Error::DegenerateAlpha);
    }
    Ok(out)
}

/// Max and mean of a nodewise deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Stat {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

impl Stat {
    fn from_iter(it: impl Iterator<Item = f64>) -> Stat {
        let (mut max, mut sum, mut count) = (0.0f64, 0.0, 0usize);
        for v in it {
            max = if v.is_nan() { f64::INFINITY } else { max.max(v) };
            sum += v;
            count += 1;
        }
        Stat {
            max,
            mean: if count > 0 { sum / count as f64 } else { 0.0 },
            count,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CongruenceTolerances {
    pub length: f64,
    pub normal: f64,
    pub tangency: f64,
}

impl CongruenceTolerances {
    /// `c h^2` for all three deviations, `h` the larger grid step.
    pub fn scaled(grid: &Grid, c: f64) -> Self {
        let h = grid.x1.step.max(grid.x2.step);
        CongruenceTolerances {
            length: c * h * h,
            normal: c * h * h,
            tangency: c * h * h,
        }
    }
}

/// Deviations of a surface pair from the line-congruence conditions.
#[derive(Clone, Debug, Serialize)]
pub struct CongruenceReport {
    /// `|sqrt|<v,v>| - lambda|`.
    pub length: Stat,
    /// Nodes where the causal type of `v` disagrees with epsilon.
    pub causal_mismatches: usize,
    /// `||<N, Nbar>| - |Lambda||`.
    pub normal: Stat,
    /// `|<v, N>| / |v|` and `|<v, Nbar>| / |v|`; infinite when `v = 0`.
    pub tangency: Stat,
    pub tangency_bar: Stat,
    pub index: Option<u8>,
    pub index_bar: Option<u8>,
    pub predicted_index_bar: u8,
}

impl CongruenceReport {
    pub fn index_ok(&self) -> bool {
        self.index_bar == Some(self.predicted_index_bar)
    }

    pub fn passes(&self, tol: &CongruenceTolerances) -> bool {
        self.length.count > 0
            && self.length.max <= tol.length
            && self.causal_mismatches == 0
            && self.normal.max <= tol.normal
            && self.tangency.max <= tol.tangency
            && self.tangency_bar.max <= tol.tangency
            && self.index_ok()
    }
}

pub fn congruence_check(
    x: &SurfaceMesh,
    xbar: &SurfaceMesh,
    case: &CaseConfig,
    params: &CongruenceParams,
) -> Result<CongruenceReport> {
    if !x.grid.same_nodes(&xbar.grid) || x.s != xbar.s {
        return Err(Error::GridMismatch);
    }
    let g = x.grid;
    let s = x.s;
    let nodes: Vec<Option<[f64; 5]>> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = g.ij(k);
            let (n, _) = x.normal_at(i, j)?;
            let (nb, _) = xbar.normal_at(i, j)?;
            let v = xbar.points[k] - x.points[k];
            let vv = pseudo_dot(s, &v, &v);
            let causal_bad = if (vv > 0.0) != (case.epsilon > 0) { 1.0 } else { 0.0 };
            let norm = v.norm();
            let tang = |m: &Vec3| {
                if norm > 0.0 {
                    pseudo_dot(s, &v, m).abs() / norm
                } else {
                    f64::INFINITY
                }
            };
            Some([
                (vv.abs().sqrt() - params.lambda).abs(),
                causal_bad,
                (pseudo_dot(s, &n, &nb).abs() - params.big_lambda.abs()).abs(),
                tang(&n),
                tang(&nb),
            ])
        })
        .collect();
    let col = |c: usize| Stat::from_iter(nodes.iter().flatten().map(|r| r[c]));
    Ok(CongruenceReport {
        length: col(0),
        causal_mismatches: nodes.iter().flatten().filter(|r| r[1] > 0.0).count(),
        normal: col(2),
        tangency: col(3),
        tangency_bar: col(4),
        index: detect_index(x),
        index_bar: detect_index(xbar),
        predicted_index_bar: case.transformed_index(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pseudo_dot_examples() {
        let e3 = Vec3::new(0.0, 0.0, 1.0);
        assert_eq!(pseudo_dot(0, &e3, &e3), 1.0);
        assert_eq!(pseudo_dot(1, &e3, &e3), -1.0);
        let u = Vec3::new(1.0, 0.0, 1.0);
        assert_eq!(pseudo_dot(1, &u, &u), 0.0);
    }

    #[test]
    fn builtin_values() {
        let g = Grid::rect(1.0, 1.5, -0.5, 0.5, 0.5).unwrap();
        let p = builtin_surface(BuiltinSurface::TimelikeK1, &g).unwrap();
        let x = p.mesh.points[g.idx(0, 1)];
        let sh = 1f64.sinh();
        assert_abs_diff_eq!(x.x, 1.0 / sh, epsilon = 1e-15);
        assert_abs_diff_eq!(x.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x.z, 1.0 - 1f64.cosh() / sh, epsilon = 1e-15);

        let g = Grid::rect(-0.5, 0.5, -0.5, 0.5, 0.5).unwrap();
        assert!(matches!(
            builtin_surface(BuiltinSurface::TimelikeK1, &g),
            Err(Error::GridContainsSingularAxis)
        ));
        let p = builtin_surface(BuiltinSurface::TimelikeKminus1, &g).unwrap();
        assert_eq!(p.mesh.points[g.idx(1, 1)], Vec3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn forms_give_delta() {
        let g = Grid::rect(-1.0, -0.1, 0.0, 0.5, 0.1).unwrap();
        for id in CaseId::ALL {
            let case = CaseConfig::new(id, -1);
            let a = ScalarField::from_fn(g, |x, y| Some(0.7 * x - 0.3 * y + 0.1));
            let f = fundamental_forms_from_alpha(&a, &case);
            assert_eq!(f.f.max_abs(), 0.0);
            let k = forms_curvature(&f, &case);
            let err = k.map(|v| v - case.delta as f64).max_abs();
            assert!(err < 1e-10, "case {id}: {err}");
        }
    }

    #[test]
    fn sphere_curvature() {
        let g = Grid::rect(-0.5, 0.5, 0.0, 1.0, 0.01).unwrap();
        let k = numerical_curvature(&unit_sphere(&g)).unwrap();
        assert!(k.map(|v| v - 1.0).max_abs() < 1e-3);
    }
}
