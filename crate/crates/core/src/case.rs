//! Discrete case algebra: parameter constraints, generalized trigonometric
//! functions, the lambda/Lambda relation and the Gordon-type operators.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Generalized trigonometric triple `(C, S, T)`.
///
/// `xi = 1` gives `(cos, sin, tan)`, `xi = -1` gives `(cosh, sinh, tanh)`,
/// so that `C^2 + xi S^2 = 1`. Any real argument is accepted.
pub fn gen_trig(xi: i8, phi: f64) -> (f64, f64, f64) {
    if xi >= 0 {
        let (s, c) = phi.sin_cos();
        (c, s, phi.tan())
    } else {
        (phi.cosh(), phi.sinh(), phi.tanh())
    }
}

#[inline]
pub fn gen_cos(xi: i8, phi: f64) -> f64 {
    if xi >= 0 {
        phi.cos()
    } else {
        phi.cosh()
    }
}

#[inline]
pub fn gen_sin(xi: i8, phi: f64) -> f64 {
    if xi >= 0 {
        phi.sin()
    } else {
        phi.sinh()
    }
}

#[inline]
pub fn gen_tan(xi: i8, phi: f64) -> f64 {
    if xi >= 0 {
        phi.tan()
    } else {
        phi.tanh()
    }
}

/// Inverse of `gen_tan` on its principal branch.
#[inline]
pub fn gen_atan(xi: i8, t: f64) -> f64 {
    if xi >= 0 {
        t.atan()
    } else {
        t.atanh()
    }
}

#[inline]
pub(crate) fn parity(k: u8) -> i8 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The six admissible cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum CaseId {
    One = 1,
    Two = 2,
    Three = 3,
    Four = 4,
    Five = 5,
    Six = 6,
}

impl CaseId {
    pub const ALL: [CaseId; 6] = [
        CaseId::One,
        CaseId::Two,
        CaseId::Three,
        CaseId::Four,
        CaseId::Five,
        CaseId::Six,
    ];

    pub fn from_index(k: u8) -> Result<CaseId> {
        match k {
            1 => Ok(CaseId::One),
            2 => Ok(CaseId::Two),
            3 => Ok(CaseId::Three),
            4 => Ok(CaseId::Four),
            5 => Ok(CaseId::Five),
            6 => Ok(CaseId::Six),
            _ => Err(Error::Config(format!("case id {k} is not in 1..=6"))),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    /// `(delta, epsilon, r, s)` of this case.
    pub fn tuple(self) -> (i8, i8, u8, u8) {
        match self {
            CaseId::One => (-1, 1, 0, 0),
            CaseId::Two => (1, 1, 0, 1),
            CaseId::Three => (1, 1, 1, 1),
            CaseId::Four => (1, -1, 1, 1),
            CaseId::Five => (-1, 1, 0, 1),
            CaseId::Six => (-1, 1, 1, 1),
        }
    }

    /// Cases 1-4 transform an equation into itself; 5 and 6 swap.
    pub fn partner(self) -> CaseId {
        match self {
            CaseId::Five => CaseId::Six,
            CaseId::Six => CaseId::Five,
            other => other,
        }
    }

    pub fn is_hyperbolic(self) -> bool {
        !matches!(self, CaseId::Five | CaseId::Six)
    }

    /// Open/closed interval of admissible phi.
    pub fn phi_range(self) -> PhiRange {
        match self {
            CaseId::One | CaseId::Four => PhiRange::OpenPi,
            CaseId::Two | CaseId::Three => PhiRange::Positive,
            CaseId::Five | CaseId::Six => PhiRange::NonNegative,
        }
    }
}

impl TryFrom<u8> for CaseId {
    type Error = Error;
    fn try_from(k: u8) -> Result<Self> {
        CaseId::from_index(k)
    }
}

impl From<CaseId> for u8 {
    fn from(c: CaseId) -> u8 {
        c.index()
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiRange {
    /// (0, pi)
    OpenPi,
    /// (0, inf)
    Positive,
    /// [0, inf)
    NonNegative,
}

impl PhiRange {
    pub fn contains(self, phi: f64) -> bool {
        if !phi.is_finite() {
            return false;
        }
        match self {
            PhiRange::OpenPi => phi > 0.0 && phi < PI,
            PhiRange::Positive => phi > 0.0,
            PhiRange::NonNegative => phi >= 0.0,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            PhiRange::OpenPi => "(0, pi)",
            PhiRange::Positive => "(0, inf)",
            PhiRange::NonNegative => "[0, inf)",
        }
    }
}

/// Validated parameter tuple. Build it with [`derive_case`] or [`CaseConfig::new`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseConfig {
    pub delta: i8,
    pub epsilon: i8,
    pub r: u8,
    pub s: u8,
    pub tau: i8,
    pub l: i8,
    pub id: CaseId,
}

/// Validate `(delta, epsilon, r, s, tau)` and identify the case.
pub fn derive_case(delta: i32, epsilon: i32, r: i32, s: i32, tau: i32) -> Result<CaseConfig> {
    let bad = || Error::InvalidCase {
        delta,
        epsilon,
        r,
        s,
        tau,
    };
    let unit = |v: i32| v == 1 || v == -1;
    let bit = |v: i32| v == 0 || v == 1;
    if !(unit(delta) && unit(epsilon) && unit(tau) && bit(r) && bit(s)) {
        return Err(bad());
    }
    if r > s || (delta == 1 && s != 1) {
        return Err(bad());
    }
    if epsilon == -1 && !(delta == 1 && r == 1 && s == 1) {
        return Err(bad());
    }
    let id = CaseId::ALL
        .into_iter()
        .find(|c| c.tuple() == (delta as i8, epsilon as i8, r as u8, s as u8))
        .ok_or_else(bad)?;
    Ok(CaseConfig::new(id, tau as i8))
}

impl CaseConfig {
    pub fn new(id: CaseId, tau: i8) -> CaseConfig {
        let (delta, epsilon, r, s) = id.tuple();
        CaseConfig {
            delta,
            epsilon,
            r,
            s,
            tau: if tau >= 0 { 1 } else { -1 },
            l: parity(r + s + 1) * delta,
            id,
        }
    }

    /// `(-1)^r`, the subscript used for the transformed field.
    pub fn r_sign(&self) -> i8 {
        parity(self.r)
    }

    pub fn s_sign(&self) -> i8 {
        parity(self.s)
    }

    /// The same case with the opposite orientation.
    pub fn with_tau(&self, tau: i8) -> CaseConfig {
        CaseConfig::new(self.id, tau)
    }

    /// Configuration of the BT that acts on the output of this one.
    pub fn partner(&self) -> CaseConfig {
        CaseConfig::new(self.id.partner(), self.tau)
    }

    /// Equation solved by the input of the BT.
    pub fn original_equation(&self) -> GordonEquation {
        self.equation(IndexFlag::Original)
    }

    /// Equation solved by the BT output.
    pub fn transformed_equation(&self) -> GordonEquation {
        self.equation(IndexFlag::Transformed)
    }

    pub fn equation(&self, flag: IndexFlag) -> GordonEquation {
        let xi = match flag {
            IndexFlag::Original => self.l,
            IndexFlag::Transformed => self.r_sign(),
        };
        GordonEquation {
            operator_sign: self.delta * self.s_sign(),
            coupling: self.epsilon * self.delta,
            xi,
        }
    }

    /// Index predicted for the transformed surface: `(-1)^rbar = delta (-1)^(s+r+1)`.
    pub fn transformed_index(&self) -> u8 {
        if self.delta * parity(self.s + self.r + 1) == 1 {
            0
        } else {
            1
        }
    }
}

/// Selects which nonlinearity enters the residual: `S_l` or `S_{(-1)^r}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexFlag {
    Original,
    Transformed,
}

impl IndexFlag {
    pub fn from_int(k: u8) -> Result<IndexFlag> {
        match k {
            0 => Ok(IndexFlag::Original),
            1 => Ok(IndexFlag::Transformed),
            _ => Err(Error::Config(format!("index flag {k} is not 0 or 1"))),
        }
    }
}

/// `a11 + operator_sign * a22 + coupling * S_xi(a) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GordonEquation {
    pub operator_sign: i8,
    pub coupling: i8,
    pub xi: i8,
}

impl GordonEquation {
    #[inline]
    pub fn residual(&self, a11: f64, a22: f64, a: f64) -> f64 {
        a11 + self.operator_sign as f64 * a22 + self.coupling as f64 * gen_sin(self.xi, a)
    }

    pub fn is_elliptic(&self) -> bool {
        self.operator_sign > 0
    }

    pub fn name(&self) -> &'static str {
        match (self.is_elliptic(), self.xi > 0) {
            (false, true) => "sine-Gordon",
            (false, false) => "sinh-Gordon",
            (true, true) => "elliptic sine-Gordon",
            (true, false) => "elliptic sinh-Gordon",
        }
    }

    /// Human readable form, e.g. `a11 - a22 = sin(a)`.
    pub fn describe(&self) -> String {
        let op = if self.is_elliptic() { "+" } else { "-" };
        let f = if self.xi > 0 { "sin" } else { "sinh" };
        let rhs = if self.coupling > 0 { "-" } else { "" };
        format!("a11 {op} a22 = {rhs}{f}(a)")
    }
}

/// `(phi, lambda, Lambda)` for one congruence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CongruenceParams {
    pub phi: f64,
    pub lambda: f64,
    pub big_lambda: f64,
    pub case_id: CaseId,
}

pub fn congruence_params(case: &CaseConfig, phi: f64) -> Result<CongruenceParams> {
    let range = case.id.phi_range();
    if !range.contains(phi) {
        return Err(Error::PhiOutOfRange {
            phi,
            case: case.id.index(),
            range: range.describe(),
        });
    }
    Ok(congruence_params_unchecked(case.id, phi))
}

/// Same as [`congruence_params`] without the range check, for limits and
/// superposition coefficients.
pub fn congruence_params_unchecked(id: CaseId, phi: f64) -> CongruenceParams {
    let (lambda, big_lambda) = match id {
        CaseId::One | CaseId::Four => (phi.sin(), phi.cos()),
        CaseId::Two | CaseId::Three => (phi.sinh(), phi.cosh()),
        CaseId::Five | CaseId::Six => (phi.cosh(), phi.sinh()),
    };
    CongruenceParams {
        phi,
        lambda,
        big_lambda,
        case_id: id,
    }
}

impl CongruenceParams {
    /// `delta [(-1)^(s+1) Lambda^2 - lambda^2 epsilon]`, equal to 1 for valid params.
    pub fn relation(&self, case: &CaseConfig) -> f64 {
        let d = case.delta as f64;
        let e = case.epsilon as f64;
        let s1 = -(case.s_sign() as f64);
        d * (s1 * self.big_lambda * self.big_lambda - self.lambda * self.lambda * e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn derive_case_examples() {
        let c = derive_case(-1, 1, 0, 0, -1).unwrap();
        assert_eq!((c.id, c.l), (CaseId::One, 1));
        let c = derive_case(1, -1, 1, 1, -1).unwrap();
        assert_eq!((c.id, c.l), (CaseId::Four, -1));
        assert!(matches!(
            derive_case(1, -1, 0, 1, 1),
            Err(Error::InvalidCase { .. })
        ));
    }

    #[test]
    fn exactly_six_tuples_are_admissible() {
        let mut found = Vec::new();
        for d in [-1, 1] {
            for e in [-1, 1] {
                for r in [0, 1] {
                    for s in [0, 1] {
                        if let Ok(c) = derive_case(d, e, r, s, 1) {
                            assert_eq!(c.l * parity(c.r + c.s + 1) * c.delta, 1);
                            found.push(c.id);
                        }
                    }
                }
            }
        }
        found.sort();
        assert_eq!(found, CaseId::ALL.to_vec());
    }

    #[test]
    fn params_examples() {
        let c1 = CaseConfig::new(CaseId::One, 1);
        let p = congruence_params(&c1, PI / 2.0).unwrap();
        assert_abs_diff_eq!(p.lambda, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.big_lambda, 0.0, epsilon = 1e-15);

        let c5 = CaseConfig::new(CaseId::Five, 1);
        let p = congruence_params(&c5, 0.0).unwrap();
        assert_eq!((p.lambda, p.big_lambda), (1.0, 0.0));

        let c2 = CaseConfig::new(CaseId::Two, 1);
        let p = congruence_params(&c2, (1.0 + 2f64.sqrt()).ln()).unwrap();
        assert_abs_diff_eq!(p.lambda, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.big_lambda, 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(p.relation(&c2), 1.0, epsilon = 1e-14);

        assert!(congruence_params(&c1, 0.0).is_err());
        assert!(congruence_params(&c1, PI).is_err());
        assert!(congruence_params(&c2, 0.0).is_err());
        assert!(congruence_params(&c5, -0.1).is_err());
    }

    #[test]
    fn gen_trig_examples() {
        assert_eq!(gen_trig(1, 0.0), (1.0, 0.0, 0.0));
        assert_eq!(gen_trig(-1, 0.0), (1.0, 0.0, 0.0));
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(gen_trig(-1, g.ln()).1, 0.5, epsilon = 1e-15);
    }

    // The six equations written out by hand.
    #[test]
    fn equations_per_case() {
        let eq = |id| CaseConfig::new(id, 1);
        let table = [
            (CaseId::One, (-1, -1, 1), (-1, -1, 1)),
            (CaseId::Two, (-1, 1, 1), (-1, 1, 1)),
            (CaseId::Three, (-1, 1, -1), (-1, 1, -1)),
            (CaseId::Four, (-1, -1, -1), (-1, -1, -1)),
            (CaseId::Five, (1, -1, -1), (1, -1, 1)),
            (CaseId::Six, (1, -1, 1), (1, -1, -1)),
        ];
        for (id, orig, trans) in table {
            let c = eq(id);
            let o = c.original_equation();
            let t = c.transformed_equation();
            assert_eq!((o.operator_sign, o.coupling, o.xi), orig, "case {id}");
            assert_eq!((t.operator_sign, t.coupling, t.xi), trans, "case {id}");
        }
        assert_eq!(eq(CaseId::Two).original_equation().describe(), "a11 - a22 = -sin(a)");
        assert_eq!(eq(CaseId::Five).original_equation().name(), "elliptic sinh-Gordon");
    }

    #[test]
    fn index_flip() {
        for id in CaseId::ALL {
            let c = CaseConfig::new(id, 1);
            let flips = matches!(id, CaseId::Five | CaseId::Six);
            assert_eq!(c.transformed_index() != c.r, flips, "case {id}");
        }
    }
}
