//! Closed-form solutions used as starting points.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::case::{congruence_params, gen_sin, CaseConfig, CaseId};
use crate::error::{Error, Result};
use crate::field::AnalyticSolution;

/// Default width of the excluded band around singular sets, measured in the
/// argument of tanh/artanh.
pub const DEFAULT_DOMAIN_GUARD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedKind {
    Zero,
    Kink,
    /// One-kink of case 4 with tau = -1, the K = 1 surface solution.
    Example2Alpha,
    /// `4 arctan(e^x1)`, elliptic sine-Gordon.
    Example4Alpha,
    /// `tanh(a/4) = (-x2 + c) sech x1`, elliptic sinh-Gordon.
    Example4Alpha1,
    /// Second elliptic sinh-Gordon solution of the same seed, parameter phi.
    Example4Alpha2,
}

impl SeedKind {
    pub const ALL: [SeedKind; 6] = [
        SeedKind::Zero,
        SeedKind::Kink,
        SeedKind::Example2Alpha,
        SeedKind::Example4Alpha,
        SeedKind::Example4Alpha1,
        SeedKind::Example4Alpha2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeedKind::Zero => "zero",
            SeedKind::Kink => "kink",
            SeedKind::Example2Alpha => "example2-alpha",
            SeedKind::Example4Alpha => "example4-alpha",
            SeedKind::Example4Alpha1 => "example4-alpha1",
            SeedKind::Example4Alpha2 => "example4-alpha2",
        }
    }

    /// Case the example kinds are pinned to.
    pub fn pinned_case(self) -> Option<CaseId> {
        match self {
            SeedKind::Zero | SeedKind::Kink => None,
            SeedKind::Example2Alpha => Some(CaseId::Four),
            _ => Some(CaseId::Six),
        }
    }
}

impl fmt::Display for SeedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeedKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<SeedKind> {
        SeedKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown seed '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub kind: SeedKind,
    pub case_id: CaseId,
    pub phi: f64,
    pub c: f64,
    pub extra: Option<f64>,
    pub tau: i8,
    pub guard: f64,
}

impl SeedSpec {
    pub fn new(kind: SeedKind, case_id: CaseId) -> SeedSpec {
        SeedSpec {
            kind,
            case_id,
            phi: 0.0,
            c: 0.0,
            extra: None,
            tau: 1,
            guard: DEFAULT_DOMAIN_GUARD,
        }
    }

    pub fn phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn tau(mut self, tau: i8) -> Self {
        self.tau = tau;
        self
    }
}

pub fn zero_seed() -> AnalyticSolution {
    AnalyticSolution::new("zero", |_, _| 0.0)
        .with_grad(|_, _| [0.0, 0.0])
        .with_second(|_, _| [0.0, 0.0])
}

/// `ln tanh(u)` for `u > 0`, accurate for large `u`.
fn ln_tanh(u: f64) -> f64 {
    let e = (-2.0 * u).exp();
    (-e).ln_1p() - e.ln_1p()
}

/// One-kink solution obtained from the zero solution by the BT of `case`.
///
/// `xi = x1/lambda - delta tau (Lambda/lambda) x2 + c`; the kink is
/// `4 arctan e^xi` for r = 0 and `2 ln tanh(-xi/2)` on `xi < 0` for r = 1.
pub fn kink_seed(case: &CaseConfig, phi: f64, c: f64) -> Result<AnalyticSolution> {
    kink_seed_guarded(case, phi, c, DEFAULT_DOMAIN_GUARD)
}

pub fn kink_seed_guarded(case: &CaseConfig, phi: f64, c: f64, guard: f64) -> Result<AnalyticSolution> {
    let p = congruence_params(case, phi)?;
    let a = 1.0 / p.lambda;
    let b = -(case.delta * case.tau) as f64 * p.big_lambda / p.lambda;
    let xi = move |x1: f64, x2: f64| a * x1 + b * x2 + c;
    let rs = case.r_sign();
    let name = format!("kink(case {}, phi={phi}, c={c})", case.id);
    let f = move |x1: f64, x2: f64| {
        let t = xi(x1, x2);
        if rs > 0 {
            4.0 * t.exp().atan()
        } else {
            2.0 * ln_tanh(-t / 2.0)
        }
    };
    let sol = AnalyticSolution::new(name, f)
        .with_grad(move |x1, x2| {
            let d = 2.0 * gen_sin(rs, f(x1, x2) / 2.0);
            [a * d, b * d]
        })
        .with_second(move |x1, x2| {
            let d2 = gen_sin(rs, f(x1, x2));
            [a * a * d2, b * b * d2]
        });
    Ok(if rs > 0 {
        sol
    } else {
        let limit = -2.0 * guard.atanh();
        sol.with_domain(move |x1, x2| xi(x1, x2) < limit)
    })
}

/// Named closed forms of the worked examples.
pub fn example_solution(spec: &SeedSpec) -> Result<AnalyticSolution> {
    let unknown = || Error::UnknownSpec {
        kind: spec.kind.to_string(),
        case: spec.case_id.index(),
    };
    match spec.kind.pinned_case() {
        Some(c) if c == spec.case_id => {}
        _ => return Err(unknown()),
    }
    let guard = spec.guard;
    match spec.kind {
        SeedKind::Example2Alpha => {
            kink_seed_guarded(&CaseConfig::new(CaseId::Four, -1), spec.phi, spec.c, guard)
        }
        SeedKind::Example4Alpha => Ok(example4_alpha()),
        SeedKind::Example4Alpha1 => Ok(example4_alpha1(spec.c, guard)),
        SeedKind::Example4Alpha2 => {
            let case = CaseConfig::new(CaseId::Six, 1);
            congruence_params(&case, spec.phi)?;
            Ok(example4_alpha2(spec.phi, spec.extra.unwrap_or(spec.c), guard))
        }
        SeedKind::Zero | SeedKind::Kink => Err(unknown()),
    }
}

/// Any seed kind, dispatching the kink to [`kink_seed`].
pub fn seed_solution(spec: &SeedSpec) -> Result<AnalyticSolution> {
    match spec.kind {
        SeedKind::Zero => Ok(zero_seed()),
        SeedKind::Kink => kink_seed_guarded(&CaseConfig::new(spec.case_id, spec.tau), spec.phi, spec.c, spec.guard),
        _ => example_solution(spec),
    }
}

fn example4_alpha() -> AnalyticSolution {
    AnalyticSolution::new("example4-alpha", |x1, _| 4.0 * x1.exp().atan())
        .with_grad(|x1, _| [2.0 / x1.cosh(), 0.0])
        .with_second(|x1, _| [-2.0 * x1.tanh() / x1.cosh(), 0.0])
}

fn example4_alpha1(c1: f64, guard: f64) -> AnalyticSolution {
    let u = move |x1: f64, x2: f64| (-x2 + c1) / x1.cosh();
    AnalyticSolution::new(format!("example4-alpha1(c={c1})"), move |x1, x2| 4.0 * u(x1, x2).atanh())
        .with_grad(move |x1, x2| {
            let v = u(x1, x2);
            let k = 4.0 / (1.0 - v * v);
            [-k * v * x1.tanh(), -k / x1.cosh()]
        })
        .with_domain(move |x1, x2| u(x1, x2).abs() < 1.0 - guard)
}

fn example4_alpha2(phi2: f64, c2: f64, guard: f64) -> AnalyticSolution {
    let (sh, ch) = (phi2.sinh(), phi2.cosh());
    let ratio = move |x1: f64, x2: f64| {
        let xi = (x1 + sh * x2) / ch + c2;
        sh * (xi.sinh() - x1.sinh()) / (xi.sinh() * x1.sinh() + 1.0 - ch * xi.cosh() * x1.cosh())
    };
    AnalyticSolution::new(
        format!("example4-alpha2(phi={phi2}, c={c2})"),
        move |x1, x2| 2.0 * ratio(x1, x2).atanh(),
    )
    .with_domain(move |x1, x2| {
        let q = ratio(x1, x2);
        q.is_finite() && q.abs() < 1.0 - guard
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn zero_seed_is_zero() {
        let z = zero_seed();
        assert_eq!(z.value(0.0, 0.0), Some(0.0));
        assert_eq!(z.value(5.0, -3.0), Some(0.0));
    }

    #[test]
    fn kink_examples() {
        let c1 = CaseConfig::new(CaseId::One, 1);
        let k = kink_seed(&c1, PI / 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(k.value(0.0, 7.0).unwrap(), PI, epsilon = 1e-15);

        let c4 = CaseConfig::new(CaseId::Four, -1);
        let k = kink_seed(&c4, PI / 2.0, 0.0).unwrap();
        let x1: f64 = -0.8;
        assert_abs_diff_eq!(
            k.value(x1, 3.0).unwrap(),
            2.0 * (-x1 / 2.0).tanh().ln(),
            epsilon = 1e-14
        );
        assert!(k.value(0.1, 0.0).is_none());

        let k = kink_seed(&c4, PI / 3.0, 0.0).unwrap();
        let xi = 2.0 / 3f64.sqrt() * -2.0;
        assert_abs_diff_eq!(xi, -2.3094010767585, epsilon = 1e-12);
        assert_abs_diff_eq!(
            k.value(-2.0, 0.0).unwrap(),
            2.0 * (-xi / 2.0).tanh().ln(),
            epsilon = 1e-14
        );
        assert!(k.value(-1.0, 0.0).unwrap() < 0.0);
    }

    #[test]
    fn kink_rejects_bad_phi() {
        let c2 = CaseConfig::new(CaseId::Two, 1);
        assert!(kink_seed(&c2, 0.0, 0.0).is_err());
    }

    #[test]
    fn example4_values() {
        let a = example_solution(&SeedSpec::new(SeedKind::Example4Alpha, CaseId::Six)).unwrap();
        assert_abs_diff_eq!(a.value(0.0, 0.0).unwrap(), PI, epsilon = 1e-15);

        let a1 = example_solution(&SeedSpec::new(SeedKind::Example4Alpha1, CaseId::Six)).unwrap();
        assert_eq!(a1.value(0.0, 0.0), Some(0.0));
        assert!(a1.value(0.0, 1.0).is_none());
        assert!(a1.value(0.0, 0.9999).unwrap() < -17.0);
        assert!(a1.value(0.0, -0.9999).unwrap() > 17.0);
    }

    #[test]
    fn example_kinds_pinned_to_cases() {
        let bad = SeedSpec::new(SeedKind::Example4Alpha, CaseId::Five);
        assert!(matches!(example_solution(&bad), Err(Error::UnknownSpec { .. })));
        let bad = SeedSpec::new(SeedKind::Kink, CaseId::Five);
        assert!(matches!(example_solution(&bad), Err(Error::UnknownSpec { .. })));
        assert!("example4-alpha2".parse::<SeedKind>().is_ok());
        assert!("breather".parse::<SeedKind>().is_err());
    }
}
