//! Step-size rules producing `(gamma1, gamma2)` per epoch.
//!
//! `gamma2` is the extrapolation step and `gamma1` the update step. The
//! theoretical rules tie them by a fixed multiplier: 2 for strongly monotone
//! and monotone operators, 4 for affine ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemConstants;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizePair {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl StepSizePair {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self> {
        let ok = |g: f64| g.is_finite() && g >= 0.0;
        if !ok(gamma1) || !ok(gamma2) {
            return Err(Error::param(format!(
                "step sizes must be finite and nonnegative, got ({gamma1}, {gamma2})"
            )));
        }
        Ok(Self { gamma1, gamma2 })
    }

    fn positive(gamma1: f64, gamma2: f64) -> Result<Self> {
        if !(gamma1 > 0.0 && gamma2 > 0.0 && gamma1.is_finite() && gamma2.is_finite()) {
            return Err(Error::param(format!(
                "step sizes must be positive and finite, got ({gamma1}, {gamma2})"
            )));
        }
        Ok(Self { gamma1, gamma2 })
    }
}

/// Operator class a theoretical step size is derived for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremRegime {
    StronglyMonotone,
    Affine,
    Monotone,
}

impl TheoremRegime {
    /// `gamma2 / gamma1`.
    pub fn multiplier(self) -> f64 {
        match self {
            TheoremRegime::StronglyMonotone | TheoremRegime::Monotone => 2.0,
            TheoremRegime::Affine => 4.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TheoremRegime::StronglyMonotone => "strongly-monotone",
            TheoremRegime::Affine => "affine",
            TheoremRegime::Monotone => "monotone",
        }
    }

    fn check(self, c: &ProblemConstants) -> Result<()> {
        if !(c.l_max > 0.0) {
            return Err(Error::RegimeMismatch(
                "L_max is 0; every step size formula divides by it".into(),
            ));
        }
        match self {
            TheoremRegime::StronglyMonotone if !(c.mu > 0.0) => Err(Error::RegimeMismatch(
                "strongly monotone step size needs mu > 0, measured mu = 0".into(),
            )),
            TheoremRegime::Affine if c.lambda_min_plus.is_none() => Err(Error::RegimeMismatch(
                "affine step size needs a nonzero averaged operator".into(),
            )),
            _ => Ok(()),
        }
    }

    fn modulus(self, c: &ProblemConstants) -> f64 {
        match self {
            TheoremRegime::StronglyMonotone => c.mu,
            TheoremRegime::Affine => c.lambda_min_plus.unwrap_or(0.0),
            TheoremRegime::Monotone => 1.0,
        }
    }
}

fn max_gamma1(regime: TheoremRegime, c: &ProblemConstants, n: usize) -> f64 {
    let n = n as f64;
    let l = c.l_max;
    match regime {
        TheoremRegime::StronglyMonotone => {
            c.mu / (10.0 * l * l * (10.0 * n * n + 2.0 * n + 54.0).sqrt())
        }
        TheoremRegime::Affine => regime.modulus(c) / (2.0 * 120f64.sqrt() * n * l * l),
        TheoremRegime::Monotone => 1.0 / (3.0 * 2f64.sqrt() * n * l),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n must be positive"));
    }
    Ok(())
}

/// Largest constant step size covered by the convergence guarantee.
pub fn max_stepsize(
    regime: TheoremRegime,
    constants: &ProblemConstants,
    n: usize,
) -> Result<StepSizePair> {
    check_n(n)?;
    regime.check(constants)?;
    let g = max_gamma1(regime, constants, n);
    StepSizePair::positive(g, regime.multiplier() * g)
}

/// Constant step size tuned to a known horizon of `horizon` epochs.
pub fn horizon_stepsize(
    regime: TheoremRegime,
    constants: &ProblemConstants,
    n: usize,
    horizon: u64,
) -> Result<StepSizePair> {
    check_n(n)?;
    if horizon < 2 {
        return Err(Error::param(format!("horizon needs K >= 2, got {horizon}")));
    }
    regime.check(constants)?;
    let nk = n as f64 * horizon as f64;
    let log_term = ((n as f64).sqrt() * horizon as f64).ln();
    let candidate = match regime {
        TheoremRegime::StronglyMonotone => 4.0 * log_term / (constants.mu * nk),
        TheoremRegime::Affine => 2.0 * log_term / (regime.modulus(constants) * nk),
        TheoremRegime::Monotone => nk.powf(-1.0 / 3.0),
    };
    let g = max_gamma1(regime, constants, n).min(candidate);
    StepSizePair::positive(g, regime.multiplier() * g)
}

impl std::str::FromStr for TheoremRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            TheoremRegime::StronglyMonotone,
            TheoremRegime::Affine,
            TheoremRegime::Monotone,
        ]
        .into_iter()
        .find(|r| r.label() == s)
        .ok_or_else(|| Error::param(format!("unknown regime `{s}`")))
    }
}

/// Decay `gamma = scale / (t + offset)^exponent` over the inner-iteration
/// counter `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialDecay {
    pub scale1: f64,
    pub exponent1: f64,
    pub scale2: f64,
    pub exponent2: f64,
    pub offset: f64,
}

impl Default for PolynomialDecay {
    fn default() -> Self {
        Self {
            scale1: 0.1,
            exponent1: 0.7,
            scale2: 1.0,
            exponent2: 0.0,
            offset: 19.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    Constant(StepSizePair),
    TheoremConstant {
        regime: TheoremRegime,
        pair: StepSizePair,
    },
    HorizonAware {
        regime: TheoremRegime,
        horizon: u64,
        pair: StepSizePair,
    },
    /// `gamma_max` until epoch `k_star`, then `scale (2k+1) / (modulus (k+1)^2)`.
    Switching {
        regime: TheoremRegime,
        gamma_max: f64,
        modulus: f64,
        k_star: u64,
    },
    PolynomialDecay(PolynomialDecay),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    rule: Rule,
    n: usize,
    multiplier: Option<f64>,
}

impl Schedule {
    pub fn constant(gamma1: f64, gamma2: f64) -> Result<Self> {
        Ok(Self {
            rule: Rule::Constant(StepSizePair::new(gamma1, gamma2)?),
            n: 1,
            multiplier: None,
        })
    }

    pub fn theorem_constant(
        regime: TheoremRegime,
        constants: &ProblemConstants,
        n: usize,
    ) -> Result<Self> {
        Ok(Self {
            rule: Rule::TheoremConstant {
                regime,
                pair: max_stepsize(regime, constants, n)?,
            },
            n,
            multiplier: None,
        })
    }

    pub fn horizon_aware(
        regime: TheoremRegime,
        constants: &ProblemConstants,
        n: usize,
        horizon: u64,
    ) -> Result<Self> {
        Ok(Self {
            rule: Rule::HorizonAware {
                regime,
                horizon,
                pair: horizon_stepsize(regime, constants, n, horizon)?,
            },
            n,
            multiplier: None,
        })
    }

    /// Switching rule. `gamma_max` defaults to the theorem constant. With
    /// `unchecked` a larger `gamma_max` is accepted and the requirement
    /// that the decreasing branch starts at or below it is not enforced.
    pub fn switching(
        regime: TheoremRegime,
        constants: &ProblemConstants,
        n: usize,
        gamma_max: Option<f64>,
        unchecked: bool,
    ) -> Result<Self> {
        check_n(n)?;
        let numerator = match regime {
            TheoremRegime::StronglyMonotone => 64.0,
            TheoremRegime::Affine => 16.0,
            TheoremRegime::Monotone => {
                return Err(Error::RegimeMismatch(
                    "switching rule is defined for strongly monotone and affine operators only"
                        .into(),
                ))
            }
        };
        regime.check(constants)?;
        let theory = max_gamma1(regime, constants, n);
        let gamma_max = gamma_max.unwrap_or(theory);
        if !(gamma_max > 0.0 && gamma_max.is_finite()) {
            return Err(Error::param(format!(
                "gamma_max must be positive, got {gamma_max}"
            )));
        }
        if !unchecked && gamma_max > theory {
            return Err(Error::param(format!(
                "gamma_max {gamma_max:e} exceeds the guaranteed bound {theory:e}"
            )));
        }
        let modulus = regime.modulus(constants);
        let k_star = (numerator / (modulus * modulus * gamma_max * gamma_max)).ceil();
        if !(k_star.is_finite() && k_star < u64::MAX as f64) {
            return Err(Error::param(format!(
                "switch epoch {k_star:e} is not representable"
            )));
        }
        let s = Self {
            rule: Rule::Switching {
                regime,
                gamma_max,
                modulus,
                k_star: k_star as u64,
            },
            n,
            multiplier: None,
        };
        if !unchecked {
            let at_switch = s.at(k_star as u64).gamma1;
            if at_switch > gamma_max {
                return Err(Error::param(format!(
                    "decreasing branch starts at {at_switch:e}, above gamma_max {gamma_max:e}"
                )));
            }
        }
        Ok(s)
    }

    pub fn polynomial_decay(decay: PolynomialDecay, n: usize) -> Result<Self> {
        check_n(n)?;
        let d = decay;
        let finite = [d.scale1, d.exponent1, d.scale2, d.exponent2, d.offset]
            .iter()
            .all(|v| v.is_finite());
        if !finite
            || d.scale1 <= 0.0
            || d.scale2 <= 0.0
            || d.offset < 1.0
            || d.exponent1 < 0.0
            || d.exponent2 < 0.0
        {
            return Err(Error::param(format!("invalid decay parameters {d:?}")));
        }
        Ok(Self {
            rule: Rule::PolynomialDecay(decay),
            n,
            multiplier: None,
        })
    }

    /// Replaces `gamma2` by `multiplier * gamma1` at every step.
    pub fn with_multiplier(mut self, multiplier: f64) -> Result<Self> {
        if !(multiplier > 0.0 && multiplier.is_finite()) {
            return Err(Error::param(format!(
                "multiplier must be positive, got {multiplier}"
            )));
        }
        self.multiplier = Some(multiplier);
        Ok(self)
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    /// Switch epoch of a switching rule.
    pub fn k_star(&self) -> Option<u64> {
        match self.rule {
            Rule::Switching { k_star, .. } => Some(k_star),
            _ => None,
        }
    }

    /// True when the pair changes between inner iterations of one epoch.
    pub fn varies_within_epoch(&self) -> bool {
        matches!(self.rule, Rule::PolynomialDecay(_))
    }

    /// Pair for epoch `k` (its first inner iteration).
    pub fn at(&self, k: u64) -> StepSizePair {
        self.at_inner(k, 0)
    }

    /// Pair for inner iteration `i` of epoch `k`.
    pub fn at_inner(&self, k: u64, i: usize) -> StepSizePair {
        let base = match &self.rule {
            Rule::Constant(p) => *p,
            Rule::TheoremConstant { pair, .. } | Rule::HorizonAware { pair, .. } => *pair,
            Rule::Switching {
                regime,
                gamma_max,
                modulus,
                k_star,
            } => {
                let g = if k < *k_star {
                    *gamma_max
                } else {
                    let scale = match regime {
                        TheoremRegime::StronglyMonotone => 4.0,
                        _ => 2.0,
                    };
                    let kf = k as f64;
                    scale * (2.0 * kf + 1.0) / (modulus * (kf + 1.0) * (kf + 1.0))
                };
                StepSizePair {
                    gamma1: g,
                    gamma2: regime.multiplier() * g,
                }
            }
            Rule::PolynomialDecay(d) => {
                let t = k as f64 * self.n as f64 + i as f64;
                let base = t + d.offset;
                StepSizePair {
                    gamma1: d.scale1 / base.powf(d.exponent1),
                    gamma2: d.scale2 / base.powf(d.exponent2),
                }
            }
        };
        match self.multiplier {
            Some(m) => StepSizePair {
                gamma1: base.gamma1,
                gamma2: m * base.gamma1,
            },
            None => base,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    Constant,
    TheoremConstant,
    HorizonAware,
    Switching,
    PolynomialDecay,
}

/// Declarative schedule description as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub rule: RuleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<TheoremRegime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_max: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(
        rename = "multiplier-override",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub multiplier_override: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<PolynomialDecay>,
    /// Skip theoretical preconditions. Theorem rules then take an explicit
    /// `gamma1` when one is given.
    #[serde(default)]
    pub unchecked: bool,
}

impl ScheduleSpec {
    pub fn new(rule: RuleKind) -> Self {
        Self {
            rule,
            regime: None,
            gamma1: None,
            gamma2: None,
            gamma_max: None,
            horizon: None,
            multiplier_override: None,
            decay: None,
            unchecked: false,
        }
    }

    pub fn with_regime(mut self, regime: TheoremRegime) -> Self {
        self.regime = Some(regime);
        self
    }

    /// Builds the schedule. `default_horizon` is used by the horizon-aware
    /// rule when `K` is absent.
    pub fn build(
        &self,
        constants: &ProblemConstants,
        n: usize,
        default_horizon: u64,
    ) -> Result<Schedule> {
        let regime = || {
            self.regime.ok_or_else(|| {
                Error::config(
                    "schedule.regime",
                    format!("rule {:?} needs a regime", self.rule),
                )
            })
        };
        let explicit = self.unchecked && self.gamma1.is_some();
        let schedule = match self.rule {
            RuleKind::TheoremConstant | RuleKind::HorizonAware if explicit => {
                let g1 = self.gamma1.unwrap_or_default();
                let g2 = self.gamma2.unwrap_or(regime()?.multiplier() * g1);
                Schedule::constant(g1, g2)?
            }
            RuleKind::Constant => {
                let g1 = self.gamma1.ok_or_else(|| {
                    Error::config("schedule.gamma1", "constant rule needs gamma1")
                })?;
                let g2 = match (self.gamma2, self.regime) {
                    (Some(g2), _) => g2,
                    (None, Some(r)) => r.multiplier() * g1,
                    (None, None) => g1,
                };
                Schedule::constant(g1, g2)?
            }
            RuleKind::TheoremConstant => Schedule::theorem_constant(regime()?, constants, n)?,
            RuleKind::HorizonAware => Schedule::horizon_aware(
                regime()?,
                constants,
                n,
                self.horizon.unwrap_or(default_horizon),
            )?,
            RuleKind::Switching => {
                Schedule::switching(regime()?, constants, n, self.gamma_max, self.unchecked)?
            }
            RuleKind::PolynomialDecay => {
                Schedule::polynomial_decay(self.decay.unwrap_or_default(), n)?
            }
        };
        match self.multiplier_override {
            Some(m) => schedule.with_multiplier(m),
            None => Ok(schedule),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts(mu: f64, lambda: Option<f64>, l_max: f64) -> ProblemConstants {
        ProblemConstants {
            l_i: vec![l_max],
            l_max,
            l: l_max,
            mu,
            lambda_min_plus: lambda,
            a: 2.0 * l_max * l_max,
            sigma_star_sq: 0.0,
            kappa: (mu > 0.0).then(|| l_max / mu),
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-15 * b.abs()
    }

    #[test]
    fn max_stepsize_examples() {
        let c = consts(1.0, Some(1.0), 1.0);
        let sm = max_stepsize(TheoremRegime::StronglyMonotone, &c, 1).unwrap();
        assert!(close(sm.gamma1, 0.012309149097933273));
        assert_eq!(sm.gamma2, 2.0 * sm.gamma1);
        let af = max_stepsize(TheoremRegime::Affine, &c, 1).unwrap();
        assert!(close(af.gamma1, 0.04564354645876384));
        assert_eq!(af.gamma2, 4.0 * af.gamma1);
        let mo = max_stepsize(TheoremRegime::Monotone, &c, 1).unwrap();
        assert!(close(mo.gamma1, 0.23570226039551584));
        assert_eq!(mo.gamma2, 2.0 * mo.gamma1);
    }

    #[test]
    fn regime_mismatch() {
        let c = consts(0.0, Some(1.0), 1.0);
        assert!(matches!(
            max_stepsize(TheoremRegime::StronglyMonotone, &c, 3),
            Err(Error::RegimeMismatch(_))
        ));
        let z = consts(0.0, None, 1.0);
        assert!(matches!(
            max_stepsize(TheoremRegime::Affine, &z, 3),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn horizon_examples() {
        let c = consts(1.0, Some(1.0), 1.0);
        let h = horizon_stepsize(TheoremRegime::StronglyMonotone, &c, 4, 100).unwrap();
        assert!(close(h.gamma1, 0.006711560552140243));
        let m = horizon_stepsize(TheoremRegime::Monotone, &c, 1, 8).unwrap();
        assert!(close(m.gamma1, 0.23570226039551584));
        assert!(matches!(
            horizon_stepsize(TheoremRegime::Monotone, &c, 1, 1),
            Err(Error::Parameter(_))
        ));
        let big = horizon_stepsize(TheoremRegime::StronglyMonotone, &c, 4, 10_000_000).unwrap();
        assert!(big.gamma1 < h.gamma1);
    }

    #[test]
    fn switching_examples() {
        let c = consts(1.0, Some(1.0), 1.0);
        let s =
            Schedule::switching(TheoremRegime::StronglyMonotone, &c, 1, Some(0.1), true).unwrap();
        assert_eq!(s.k_star(), Some(6400));
        assert_eq!(s.at(0).gamma1, 0.1);
        assert_eq!(s.at(6399).gamma1, 0.1);
        assert!(close(s.at(6400).gamma1, 0.0012497070922732376));
        assert_eq!(s.at(6400).gamma2, 2.0 * s.at(6400).gamma1);
    }

    #[test]
    fn switching_rejects_large_gamma_without_override() {
        let c = consts(1.0, Some(1.0), 1.0);
        assert!(matches!(
            Schedule::switching(TheoremRegime::StronglyMonotone, &c, 1, Some(0.1), false),
            Err(Error::Parameter(_))
        ));
        let s = Schedule::switching(TheoremRegime::Affine, &c, 2, None, false).unwrap();
        assert_eq!(s.at(0).gamma2, 4.0 * s.at(0).gamma1);
        assert!(matches!(
            Schedule::switching(TheoremRegime::Monotone, &c, 2, None, false),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn polynomial_decay_start() {
        let s = Schedule::polynomial_decay(PolynomialDecay::default(), 5).unwrap();
        let p = s.at(0);
        assert!(close(p.gamma1, 0.012731292007829408));
        assert_eq!(p.gamma2, 1.0);
        assert_eq!(s.at(2), s.at_inner(1, 5));
        assert!(s.at_inner(0, 1).gamma1 < p.gamma1);
    }

    #[test]
    fn multiplier_override_applies() {
        let c = consts(1.0, Some(1.0), 1.0);
        let s = Schedule::theorem_constant(TheoremRegime::Monotone, &c, 1)
            .unwrap()
            .with_multiplier(1.0)
            .unwrap();
        assert_eq!(s.at(3).gamma1, s.at(3).gamma2);
    }

    #[test]
    fn spec_parse_and_build() {
        let spec: ScheduleSpec = serde_json::from_str(
            r#"{"rule":"horizon-aware","regime":"strongly-monotone","K":100}"#,
        )
        .unwrap();
        let s = spec.build(&consts(1.0, Some(1.0), 1.0), 4, 5).unwrap();
        assert!(close(s.at(0).gamma1, 0.006711560552140243));
        assert!(serde_json::from_str::<ScheduleSpec>(r#"{"rule":"constant","bogus":1}"#).is_err());
        let missing = ScheduleSpec::new(RuleKind::TheoremConstant);
        assert!(matches!(
            missing.build(&consts(1.0, None, 1.0), 1, 2),
            Err(Error::Config { .. })
        ));
    }
}
