//! Scenario parameters and the quantities the warden's detector sees.
//!
//! Powers are linear and relative to unit noise. Channel gains are unit-variance
//! Rayleigh, split into a known part of variance `1 - beta` and an unknown part of
//! variance `beta` at each receiver.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result, ValidationReport};
use crate::scalar::{lit, Real};

/// Physical scenario: powers, geometry, noise, channel uncertainty and the covertness level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T = f64> {
    /// Power of the always-on cover transmission to Carol.
    pub p_ac: T,
    /// Power of the covert transmission to Bob; zero means no covert traffic.
    pub p_ab: T,
    pub d_ac: T,
    pub d_ab: T,
    pub d_aw: T,
    /// Path-loss exponent.
    pub alpha: T,
    pub sigma2_c: T,
    pub sigma2_b: T,
    pub sigma2_w: T,
    /// Variance of the unknown channel part at Carol.
    pub beta_c: T,
    /// Variance of the unknown channel part at Bob.
    pub beta_b: T,
    /// Variance of the unknown channel part at Willie.
    pub beta_w: T,
    /// Covertness level: the warden's averaged error sum must stay at or above `1 - epsilon`.
    pub epsilon: T,
    /// Total transmit power budget.
    pub p_total: T,
}

impl<T: Real> SystemParams<T> {
    /// The evaluation scenario: unit noise everywhere, 30 dB budget, `alpha = 3`, all
    /// distances 5, `beta = 0.2` at every receiver and `epsilon = 0.2`.
    ///
    /// The power split defaults to `p_ac = 500`, `p_ab = 10`.
    pub fn reference() -> Self {
        SystemParams {
            p_ac: lit(500.0),
            p_ab: lit(10.0),
            d_ac: lit(5.0),
            d_ab: lit(5.0),
            d_aw: lit(5.0),
            alpha: lit(3.0),
            sigma2_c: T::one(),
            sigma2_b: T::one(),
            sigma2_w: T::one(),
            beta_c: lit(0.2),
            beta_b: lit(0.2),
            beta_w: lit(0.2),
            epsilon: lit(0.2),
            p_total: db_to_linear(lit(30.0)),
        }
    }

    /// Sets the same uncertainty variance at all three receivers.
    pub fn with_beta(mut self, beta: T) -> Self {
        self.beta_c = beta;
        self.beta_b = beta;
        self.beta_w = beta;
        self
    }

    pub fn with_powers(mut self, p_ac: T, p_ab: T) -> Self {
        self.p_ac = p_ac;
        self.p_ab = p_ab;
        self
    }

    /// Path loss `d^alpha` on the link to `receiver`.
    pub fn path_loss(&self, receiver: Node) -> T {
        let d = match receiver {
            Node::Carol => self.d_ac,
            Node::Bob => self.d_ab,
            Node::Willie => self.d_aw,
        };
        d.powf(self.alpha)
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let report = self.violations();
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(report))
        }
    }

    pub fn violations(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let zero = T::zero();
        let one = T::one();

        if !(self.p_ac > zero) {
            report.push("p_ac", format!("p_ac must be positive (got {})", self.p_ac));
        }
        if !(self.p_ab >= zero) {
            report.push("p_ab", format!("p_ab must be non-negative (got {})", self.p_ab));
        }
        for (field, d) in [("d_ac", self.d_ac), ("d_ab", self.d_ab), ("d_aw", self.d_aw)] {
            if !(d > zero) || !d.is_finite() {
                report.push(field, format!("{field} must be a positive distance (got {d})"));
            }
        }
        if !(self.alpha >= lit(2.0)) || !self.alpha.is_finite() {
            report.push("alpha", format!("alpha below 2 (got {})", self.alpha));
        }
        for (field, s) in [
            ("sigma2_c", self.sigma2_c),
            ("sigma2_b", self.sigma2_b),
            ("sigma2_w", self.sigma2_w),
        ] {
            if !(s > zero) || !s.is_finite() {
                report.push(field, format!("{field} must be a positive variance (got {s})"));
            }
        }
        for (field, b) in [
            ("beta_c", self.beta_c),
            ("beta_b", self.beta_b),
            ("beta_w", self.beta_w),
        ] {
            if !(b > zero && b < one) {
                report.push(field, format!("{field} out of open interval (0,1) (got {b})"));
            }
        }
        if !(self.epsilon > zero && self.epsilon < one) {
            report.push(
                "epsilon",
                format!("epsilon out of open interval (0,1) (got {})", self.epsilon),
            );
        }
        if !(self.p_total > zero) || !self.p_total.is_finite() {
            report.push("p_total", format!("p_total must be positive (got {})", self.p_total));
        } else {
            // A split computed as `p_total - p_ac` may overshoot by an ulp.
            let slack = self.p_total * T::epsilon() * lit(4.0);
            if !(self.p_ac + self.p_ab <= self.p_total + slack) {
                report.push(
                    "p_total",
                    format!(
                        "p_ac + p_ab = {} exceeds the power budget {}",
                        self.p_ac + self.p_ab,
                        self.p_total
                    ),
                );
            }
        }
        report
    }

    pub fn willie_view(&self) -> Result<WillieChannelView<T>> {
        derive_willie_view(self)
    }
}

/// Free-function form of [`SystemParams::validate`].
pub fn validate<T: Real>(params: &SystemParams<T>) -> Result<()> {
    params.validate()
}

/// Converts a power in dB to linear scale.
pub fn db_to_linear<T: Real>(db: T) -> T {
    lit::<T>(10.0).powf(db / lit(10.0))
}

/// Receivers in the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Carol,
    Bob,
    Willie,
}

/// Received-power scales at the warden under each hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WillieChannelView<T = f64> {
    /// `p_ac / d_aw^alpha`.
    pub zeta0: T,
    /// `(p_ac + p_ab) / d_aw^alpha`.
    pub zeta1: T,
    pub beta_w: T,
    pub sigma2_w: T,
    /// `(zeta1 - zeta0) / zeta0`, kept separately so it stays exact for tiny covert power.
    pub contrast: T,
}

/// Derives the warden's view. Rejects `p_ab = 0`, where the hypotheses coincide.
pub fn derive_willie_view<T: Real>(params: &SystemParams<T>) -> Result<WillieChannelView<T>> {
    params.validate()?;
    if !(params.p_ab > T::zero()) {
        return Err(Error::DegenerateHypotheses);
    }
    let loss = params.path_loss(Node::Willie);
    Ok(WillieChannelView {
        zeta0: params.p_ac / loss,
        zeta1: (params.p_ac + params.p_ab) / loss,
        beta_w: params.beta_w,
        sigma2_w: params.sigma2_w,
        contrast: params.p_ab / params.p_ac,
    })
}

impl<T: Real> WillieChannelView<T> {
    /// Builds a view directly from the two power scales.
    pub fn new(zeta0: T, zeta1: T, beta_w: T, sigma2_w: T) -> Result<Self> {
        if !(zeta0 > T::zero()) || !zeta1.is_finite() {
            return Err(Error::argument("zeta0", "must be positive and finite"));
        }
        if !(beta_w > T::zero() && beta_w < T::one()) {
            return Err(Error::argument("beta_w", "out of open interval (0,1)"));
        }
        if !(sigma2_w > T::zero()) {
            return Err(Error::argument("sigma2_w", "must be positive"));
        }
        if !(zeta1 > zeta0) {
            return Err(Error::DegenerateHypotheses);
        }
        Ok(WillieChannelView {
            zeta0,
            zeta1,
            beta_w,
            sigma2_w,
            contrast: (zeta1 - zeta0) / zeta0,
        })
    }

    /// Fixes the realized known-channel gain `|h_aw|^2`.
    pub fn at(&self, g_hat: T) -> Result<RealizedView<T>> {
        if !(g_hat >= T::zero()) || !g_hat.is_finite() {
            return Err(Error::argument(
                "g_hat",
                format!("must be finite and >= 0 (got {g_hat})"),
            ));
        }
        Ok(RealizedView { view: *self, g_hat })
    }

    /// Mean of the known-channel gain, `1 - beta_w`.
    pub fn known_gain_mean(&self) -> T {
        T::one() - self.beta_w
    }
}

/// A warden view together with one realization of the known channel gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizedView<T = f64> {
    pub view: WillieChannelView<T>,
    pub g_hat: T,
}

/// Scalar fields of [`SystemParams`], addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamField {
    PAc,
    PAb,
    DAc,
    DAb,
    DAw,
    Alpha,
    Sigma2C,
    Sigma2B,
    Sigma2W,
    BetaC,
    BetaB,
    BetaW,
    Epsilon,
    PTotal,
}

impl ParamField {
    pub const ALL: [ParamField; 14] = [
        ParamField::PAc,
        ParamField::PAb,
        ParamField::DAc,
        ParamField::DAb,
        ParamField::DAw,
        ParamField::Alpha,
        ParamField::Sigma2C,
        ParamField::Sigma2B,
        ParamField::Sigma2W,
        ParamField::BetaC,
        ParamField::BetaB,
        ParamField::BetaW,
        ParamField::Epsilon,
        ParamField::PTotal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamField::PAc => "p_ac",
            ParamField::PAb => "p_ab",
            ParamField::DAc => "d_ac",
            ParamField::DAb => "d_ab",
            ParamField::DAw => "d_aw",
            ParamField::Alpha => "alpha",
            ParamField::Sigma2C => "sigma2_c",
            ParamField::Sigma2B => "sigma2_b",
            ParamField::Sigma2W => "sigma2_w",
            ParamField::BetaC => "beta_c",
            ParamField::BetaB => "beta_b",
            ParamField::BetaW => "beta_w",
            ParamField::Epsilon => "epsilon",
            ParamField::PTotal => "p_total",
        }
    }

    pub fn get<T: Copy>(self, p: &SystemParams<T>) -> T {
        *self.slot_ref(p)
    }

    pub fn set<T: Copy>(self, p: &mut SystemParams<T>, value: T) {
        *self.slot(p) = value;
    }

    fn slot<T>(self, p: &mut SystemParams<T>) -> &mut T {
        match self {
            ParamField::PAc => &mut p.p_ac,
            ParamField::PAb => &mut p.p_ab,
            ParamField::DAc => &mut p.d_ac,
            ParamField::DAb => &mut p.d_ab,
            ParamField::DAw => &mut p.d_aw,
            ParamField::Alpha => &mut p.alpha,
            ParamField::Sigma2C => &mut p.sigma2_c,
            ParamField::Sigma2B => &mut p.sigma2_b,
            ParamField::Sigma2W => &mut p.sigma2_w,
            ParamField::BetaC => &mut p.beta_c,
            ParamField::BetaB => &mut p.beta_b,
            ParamField::BetaW => &mut p.beta_w,
            ParamField::Epsilon => &mut p.epsilon,
            ParamField::PTotal => &mut p.p_total,
        }
    }

    fn slot_ref<T>(self, p: &SystemParams<T>) -> &T {
        match self {
            ParamField::PAc => &p.p_ac,
            ParamField::PAb => &p.p_ab,
            ParamField::DAc => &p.d_ac,
            ParamField::DAb => &p.d_ab,
            ParamField::DAw => &p.d_aw,
            ParamField::Alpha => &p.alpha,
            ParamField::Sigma2C => &p.sigma2_c,
            ParamField::Sigma2B => &p.sigma2_b,
            ParamField::Sigma2W => &p.sigma2_w,
            ParamField::BetaC => &p.beta_c,
            ParamField::BetaB => &p.beta_b,
            ParamField::BetaW => &p.beta_w,
            ParamField::Epsilon => &p.epsilon,
            ParamField::PTotal => &p.p_total,
        }
    }
}

impl fmt::Display for ParamField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamField {
    type Err = Error;

    /// Accepts the field name with either `_` or `-` separators.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        ParamField::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::argument("field", format!("`{s}` is not a SystemParams field")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn base() -> SystemParams<f64> {
        SystemParams::reference().with_powers(10.0, 10.0)
    }

    #[test]
    fn willie_view_matches_definitions() {
        let v = base().willie_view().unwrap();
        assert!((v.zeta0 - 0.08).abs() < 1e-15);
        assert!((v.zeta1 - 0.16).abs() < 1e-15);
        assert_eq!(v.zeta1, 2.0 * v.zeta0);
        assert_eq!(v.contrast, 1.0);
    }

    #[test]
    fn zero_covert_power_is_degenerate() {
        let p = base().with_powers(1.0, 0.0);
        assert!(p.validate().is_ok());
        assert!(matches!(p.willie_view(), Err(Error::DegenerateHypotheses)));
    }

    #[test]
    fn beta_w_boundary_rejected() {
        let mut p = base();
        p.beta_w = 0.0;
        let Err(Error::Invalid(report)) = p.validate() else {
            panic!("expected a validation failure");
        };
        assert_eq!(report.fields().collect::<Vec<_>>(), vec!["beta_w"]);
        assert!(report.to_string().contains("beta_w out of open interval (0,1)"));
        p.beta_w = 1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn budget_boundary_is_feasible() {
        let p = base().with_powers(400.0, 600.0);
        assert_eq!(p.p_ac + p.p_ab, p.p_total);
        assert!(p.validate().is_ok());
        assert!(base().with_powers(400.0, 600.5).validate().is_err());
    }

    #[test]
    fn alpha_below_two_rejected() {
        let mut p = base();
        p.alpha = 1.5;
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("alpha below 2"), "{err}");
    }

    #[test]
    fn every_violation_is_reported() {
        let mut p = base();
        p.p_ac = -1.0;
        p.d_aw = 0.0;
        p.sigma2_b = f64::NAN;
        p.epsilon = 1.0;
        let fields: Vec<_> = p.violations().fields().collect();
        assert_eq!(fields, vec!["p_ac", "d_aw", "sigma2_b", "epsilon"]);
    }

    #[test]
    fn reference_budget_is_thirty_db() {
        let p = SystemParams::<f64>::reference();
        assert!((p.p_total - 1000.0).abs() < 1e-9);
        let p32 = SystemParams::<f32>::reference();
        assert!((p32.p_total - 1000.0).abs() < 1e-3);
    }

    #[test]
    fn param_field_roundtrip() {
        let mut p = base();
        for (i, f) in ParamField::ALL.into_iter().enumerate() {
            assert_eq!(f.name().parse::<ParamField>().unwrap(), f);
            f.set(&mut p, i as f64);
            assert_eq!(f.get(&p), i as f64);
        }
        assert_eq!("sigma2-w".parse::<ParamField>().unwrap(), ParamField::Sigma2W);
        assert!("g_hat".parse::<ParamField>().is_err());
    }

    fn field_value(valid: bool) -> impl Strategy<Value = f64> {
        if valid {
            (0.05f64..0.95).boxed()
        } else {
            prop_oneof![Just(0.0), Just(1.0), Just(-0.3), Just(1.7), Just(f64::NAN)].boxed()
        }
    }

    proptest! {
        #[test]
        fn power_scaling_scales_zetas(p_ac in 0.1f64..100.0, p_ab in 0.1f64..100.0, c in 0.1f64..9.0) {
            let roomy = SystemParams { p_total: 1e4, ..base() };
            let p = roomy.with_powers(p_ac, p_ab);
            let q = roomy.with_powers(c * p_ac, c * p_ab);
            let (v, w) = (p.willie_view().unwrap(), q.willie_view().unwrap());
            prop_assert!((w.zeta0 - c * v.zeta0).abs() <= 1e-12 * w.zeta0);
            prop_assert!((w.zeta1 - c * v.zeta1).abs() <= 1e-12 * w.zeta1);
        }

        #[test]
        fn validate_accepts_exactly_valid_structs(
            flags in proptest::collection::vec(any::<bool>(), 4),
            bc in field_value(true), bb in field_value(true),
        ) {
            let mut p = base();
            p.beta_c = bc;
            p.beta_b = bb;
            let (beta_ok, eps_ok, alpha_ok, budget_ok) = (flags[0], flags[1], flags[2], flags[3]);
            if !beta_ok { p.beta_w = 1.25; }
            if !eps_ok { p.epsilon = 0.0; }
            if !alpha_ok { p.alpha = 1.99; }
            if !budget_ok { p.p_ab = p.p_total; }
            let all_ok = beta_ok && eps_ok && alpha_ok && budget_ok;
            prop_assert_eq!(p.validate().is_ok(), all_ok);
            let expected = [!beta_ok, !eps_ok, !alpha_ok, !budget_ok].iter().filter(|b| **b).count();
            prop_assert_eq!(p.violations().violations.len(), expected);
        }

        #[test]
        fn invalid_beta_values_always_rejected(b in field_value(false)) {
            let mut p = base();
            p.beta_c = b;
            prop_assert!(p.validate().is_err());
        }
    }
}
