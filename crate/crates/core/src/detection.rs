//! The warden's radiometer: error probabilities for a given threshold, the optimal
//! threshold, and the error sum averaged over the known channel gain.
//!
//! Everything here is in the large-block regime, where the normalized received power
//! `P_w / n` equals its variance `sigma2_w + (g_hat + g_tilde) * zeta`. The unknown gain
//! `g_tilde` is exponential with mean `beta_w`, the known gain `g_hat` exponential with
//! mean `1 - beta_w`.

use crate::error::Result;
use crate::model::{derive_willie_view, RealizedView, SystemParams, WillieChannelView};
use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};
use crate::scalar::{exp_prob, lit, one_minus_exp_prob, Real};

/// Error probabilities of the radiometer at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult<T = f64> {
    pub lambda: T,
    pub p_fa: T,
    pub p_md: T,
    pub error_sum: T,
}

/// Which case of the optimal-threshold rule applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// The realization-independent stationary point `lambda_dagger` is reachable.
    Dagger,
    /// The known gain is large, so the threshold sits at `g_hat * zeta1 + sigma2_w`.
    Clamp,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Dagger => "dagger",
            Branch::Clamp => "clamp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdDecision<T = f64> {
    pub lambda_star: T,
    pub branch: Branch,
    pub lambda_dagger: T,
}

/// `lambda_dagger - sigma2_w`, i.e. `(zeta1 zeta0 beta_w / (zeta1 - zeta0)) ln(zeta1 / zeta0)`.
///
/// Written as `zeta1 beta_w ln(1 + c) / c` with `c = (zeta1 - zeta0) / zeta0`, which stays
/// accurate as the covert power vanishes.
fn dagger_offset<T: Real>(view: &WillieChannelView<T>) -> T {
    let c = view.contrast;
    view.zeta1 * view.beta_w * (c.ln_1p() / c)
}

/// The stationary point of the error sum in the threshold. It does not depend on `g_hat`.
pub fn lambda_dagger<T: Real>(view: &WillieChannelView<T>) -> T {
    view.sigma2_w + dagger_offset(view)
}

/// Known-gain value at which the optimal threshold switches from dagger to clamp.
pub fn branch_boundary<T: Real>(view: &WillieChannelView<T>) -> T {
    dagger_offset(view) / view.zeta1
}

/// False-alarm probability at threshold `lambda`.
pub fn p_fa<T: Real>(rv: &RealizedView<T>, lambda: T) -> T {
    let v = &rv.view;
    let floor = rv.g_hat * v.zeta0 + v.sigma2_w;
    if lambda >= floor {
        exp_prob((floor - lambda) / (v.zeta0 * v.beta_w))
    } else {
        T::one()
    }
}

/// Missed-detection probability at threshold `lambda`.
pub fn p_md<T: Real>(rv: &RealizedView<T>, lambda: T) -> T {
    let v = &rv.view;
    let floor = rv.g_hat * v.zeta1 + v.sigma2_w;
    if lambda >= floor {
        one_minus_exp_prob((floor - lambda) / (v.zeta1 * v.beta_w))
    } else {
        T::zero()
    }
}

/// `P_FA + P_MD` at threshold `lambda`. Constant at 1 below `g_hat zeta0 + sigma2_w`,
/// pure false alarm up to `g_hat zeta1 + sigma2_w`, both terms above.
pub fn error_sum<T: Real>(rv: &RealizedView<T>, lambda: T) -> DetectionResult<T> {
    let p_fa = p_fa(rv, lambda);
    let p_md = p_md(rv, lambda);
    DetectionResult {
        lambda,
        p_fa,
        p_md,
        error_sum: p_fa + p_md,
    }
}

/// The threshold minimizing the error sum for this realization.
///
/// At `g_hat` exactly on the branch boundary both cases give the same threshold; this
/// reports `Dagger`.
pub fn optimal_threshold<T: Real>(rv: &RealizedView<T>) -> ThresholdDecision<T> {
    let v = &rv.view;
    let lambda_dagger = lambda_dagger(v);
    if rv.g_hat <= branch_boundary(v) {
        ThresholdDecision {
            lambda_star: lambda_dagger,
            branch: Branch::Dagger,
            lambda_dagger,
        }
    } else {
        ThresholdDecision {
            lambda_star: rv.g_hat * v.zeta1 + v.sigma2_w,
            branch: Branch::Clamp,
            lambda_dagger,
        }
    }
}

/// The error sum at the optimal threshold.
pub fn conditional_error_at_optimum<T: Real>(rv: &RealizedView<T>) -> T {
    let v = &rv.view;
    let decision = optimal_threshold(rv);
    let lambda_dagger = decision.lambda_dagger;
    let g = rv.g_hat;
    match decision.branch {
        Branch::Dagger => {
            let kappa1 = exp_prob((g * v.zeta1 + v.sigma2_w - lambda_dagger) / (v.zeta1 * v.beta_w));
            let kappa0 = exp_prob((g * v.zeta0 + v.sigma2_w - lambda_dagger) / (v.zeta0 * v.beta_w));
            T::one() - kappa1 + kappa0
        }
        // g (zeta0 - zeta1) / (zeta0 beta_w)
        Branch::Clamp => exp_prob(-g * v.contrast / v.beta_w),
    }
}

/// Half-width around `beta_w = 1/2` inside which the closed form is replaced by quadrature.
pub const SINGULAR_BAND: f64 = 1e-6;

/// Tolerance of the quadrature path.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// The error sum at the optimal threshold averaged over the known gain.
///
/// Uses the closed form except for `|2 beta_w - 1| < 1e-6`, where its removable
/// singularity is integrated numerically instead.
pub fn average_detection_error<T: Real>(params: &SystemParams<T>) -> Result<T> {
    let view = derive_willie_view(params)?;
    average_error_for_view(&view)
}

pub fn average_error_for_view<T: Real>(view: &WillieChannelView<T>) -> Result<T> {
    let skew = lit::<T>(2.0) * view.beta_w - T::one();
    if skew.abs() < lit(SINGULAR_BAND) {
        average_error_by_quadrature(view)
    } else {
        Ok(average_error_closed_form(view))
    }
}

/// Closed form of the averaged error sum.
///
/// With `L = lambda_dagger - sigma2_w`, `tau = L / zeta1`, `m = 1 - beta_w`,
/// `q = zeta0 / zeta1` and `E = exp(-tau / m)`:
///
/// ```text
/// P = (1 - E) + beta_w (1 - q) / (1 - 2 beta_w) * (exp(-tau / beta_w) - E)
///             + E q beta_w zeta0 / ((1 - beta_w) zeta1 + (2 beta_w - 1) zeta0)
/// ```
///
/// The first two terms integrate the dagger branch over `[0, tau)`, the last the clamp
/// branch over `[tau, inf)`.
pub fn average_error_closed_form<T: Real>(view: &WillieChannelView<T>) -> T {
    let one = T::one();
    let beta = view.beta_w;
    let mean = one - beta;
    let c = view.contrast;
    let tau = branch_boundary(view);
    let q = one / (one + c);

    let e = exp_prob(-tau / mean);
    let dagger_mass = one_minus_exp_prob(-tau / mean);
    // beta / (1 - 2beta) * (exp(-tau/beta) - E) = -E (tau / m) expm1(x) / x,
    // x = tau (2beta - 1) / (beta m); finite through beta = 1/2.
    let skew = lit::<T>(2.0) * beta - one;
    let x = tau * skew / (beta * mean);
    let dagger_excess = -(one - q) * e * (tau / mean) * expm1_over_x(x);
    // beta_w zeta0 / ((1 - beta_w) zeta1 + (2 beta_w - 1) zeta0) = beta_w / ((1 - beta_w) c + beta_w)
    let clamp = e * q * beta / (mean * c + beta);

    (dagger_mass + dagger_excess + clamp).min(one).max(T::zero())
}

fn expm1_over_x<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        x.exp_m1() / x
    }
}

/// Averaged error sum by adaptive quadrature of the conditional error against the
/// known-gain density, split at the branch boundary.
pub fn average_error_by_quadrature<T: Real>(view: &WillieChannelView<T>) -> Result<T> {
    let mean = view.known_gain_mean();
    let tau = branch_boundary(view);
    let integrand = |g: T| {
        let rv = RealizedView { view: *view, g_hat: g };
        conditional_error_at_optimum(&rv) * (-g / mean).exp() / mean
    };
    let opts = QuadOptions::with_tolerance(QUADRATURE_TOL);
    let head = integrate(integrand, T::zero(), tau, opts)?;
    // Clamp-branch decay length.
    let scale = T::one() / (T::one() / mean + view.contrast / view.beta_w);
    let tail = integrate_to_infinity(integrand, tau, scale, opts)?;
    Ok((head.value + tail.value).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_view() -> WillieChannelView<f64> {
        WillieChannelView::new(0.08, 0.16, 0.2, 1.0).unwrap()
    }

    #[test]
    fn lambda_dagger_example() {
        let v = example_view();
        let ld = lambda_dagger(&v);
        assert!((ld - (1.0 + 0.032 * 2f64.ln())).abs() < 1e-15);
        assert!((ld - 1.022_180_7).abs() < 1e-7);
    }

    #[test]
    fn lambda_dagger_limits() {
        let z: f64 = 0.3;
        let v = WillieChannelView::new(z, z * (1.0 + 1e-12), 0.4, 2.0).unwrap();
        assert!((lambda_dagger(&v) - (2.0 + 0.4 * z)).abs() < 1e-12);
        let v = WillieChannelView::new(0.08, 0.16, 1e-300, 1.0).unwrap();
        assert_eq!(lambda_dagger(&v), 1.0);
    }

    #[test]
    fn lambda_dagger_ignores_realization() {
        let v = example_view();
        let a = optimal_threshold(&v.at(0.0).unwrap()).lambda_dagger;
        let b = optimal_threshold(&v.at(7.5).unwrap()).lambda_dagger;
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn false_alarm_cases() {
        let rv = example_view().at(0.5).unwrap();
        let floor = 0.5 * 0.08 + 1.0;
        assert_eq!(p_fa(&rv, floor), 1.0);
        assert_eq!(p_fa(&rv, floor - 1e-3), 1.0);
        let rv0 = example_view().at(0.0).unwrap();
        assert!((p_fa(&rv0, 1.022_180_7) - (-0.022_180_7f64 / 0.016).exp()).abs() < 1e-15);
        assert!((p_fa(&rv0, lambda_dagger(&rv0.view)) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn missed_detection_cases() {
        let rv = example_view().at(0.5).unwrap();
        let floor = 0.5 * 0.16 + 1.0;
        assert_eq!(p_md(&rv, floor), 0.0);
        assert_eq!(p_md(&rv, floor - 0.01), 0.0);
        assert_eq!(p_md(&rv, 1e6), 1.0);
        let rv0 = example_view().at(0.0).unwrap();
        assert!((p_md(&rv0, lambda_dagger(&rv0.view)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn error_sum_regimes() {
        let v = example_view();
        let g = 1.3;
        let rv = v.at(g).unwrap();
        assert_eq!(error_sum(&rv, g * v.zeta0 + 1.0 - 1e-9).error_sum, 1.0);
        let at_upper = error_sum(&rv, g * v.zeta1 + 1.0);
        let expected = (g * (v.zeta0 - v.zeta1) / (v.zeta0 * v.beta_w)).exp();
        assert!((at_upper.error_sum - expected).abs() < 1e-14);
        assert_eq!(at_upper.p_md, 0.0);
        let r = error_sum(&rv, 1.5);
        assert_eq!(r.error_sum, r.p_fa + r.p_md);
    }

    #[test]
    fn optimal_threshold_branches() {
        let v = example_view();
        let d0 = optimal_threshold(&v.at(0.0).unwrap());
        assert_eq!(d0.branch, Branch::Dagger);
        assert_eq!(d0.lambda_star, d0.lambda_dagger);

        let boundary = branch_boundary(&v);
        assert!((boundary - 0.032 * 2f64.ln() / 0.16).abs() < 1e-15);
        assert!((boundary - 0.1386).abs() < 1e-4);
        let d = optimal_threshold(&v.at(0.05).unwrap());
        assert_eq!(d.branch, Branch::Dagger);
        assert!((d.lambda_star - 1.022_180_7).abs() < 1e-7);

        let g = 100.0 * v.known_gain_mean();
        let d = optimal_threshold(&v.at(g).unwrap());
        assert_eq!(d.branch, Branch::Clamp);
        assert_eq!(d.lambda_star, g * v.zeta1 + v.sigma2_w);
        assert!(d.lambda_star >= v.sigma2_w);

        let tie = optimal_threshold(&v.at(boundary).unwrap());
        assert_eq!(tie.branch, Branch::Dagger);
        assert!((tie.lambda_star - (boundary * v.zeta1 + v.sigma2_w)).abs() < 1e-15);
    }

    #[test]
    fn conditional_error_examples() {
        let v = example_view();
        let ld = lambda_dagger(&v);
        let dagger = conditional_error_at_optimum(&v.at(0.0).unwrap());
        let expected = 1.0 - ((1.0 - ld) / (v.zeta1 * v.beta_w)).exp() + ((1.0 - ld) / (v.zeta0 * v.beta_w)).exp();
        assert!((dagger - expected).abs() < 1e-15);
        assert!((dagger - 0.75).abs() < 1e-12);

        let g = 2.0;
        let clamp = conditional_error_at_optimum(&v.at(g).unwrap());
        assert!((clamp - (g * (v.zeta0 - v.zeta1) / (v.zeta0 * v.beta_w)).exp()).abs() < 1e-15);
    }

    #[test]
    fn conditional_error_matches_error_sum_at_optimum() {
        let v = WillieChannelView::new(1.7, 2.9, 0.35, 1.2).unwrap();
        for i in 0..200 {
            let rv = v.at(i as f64 * 0.01).unwrap();
            let star = optimal_threshold(&rv).lambda_star;
            let direct = error_sum(&rv, star).error_sum;
            assert!((conditional_error_at_optimum(&rv) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_band_uses_quadrature() {
        let mut p = SystemParams::<f64>::reference().with_beta(0.5);
        p.p_ab = 50.0;
        let view = p.willie_view().unwrap();
        let avg = average_detection_error(&p).unwrap();
        assert_eq!(avg, average_error_by_quadrature(&view).unwrap());
        // The expm1 form of the closed expression has no pole at 1/2 either.
        assert!((avg - average_error_closed_form(&view)).abs() < 1e-10);
        let near = p.with_beta(0.5 + 1e-4);
        let closed = average_detection_error(&near).unwrap();
        assert!((closed - avg).abs() < 1e-4);
    }

    #[test]
    fn silent_limit_is_one() {
        let p = SystemParams::<f64>::reference().with_powers(500.0, 1e-9);
        let avg = average_detection_error(&p).unwrap();
        assert!(avg <= 1.0 && avg > 1.0 - 1e-9, "{avg}");
    }

    #[test]
    fn degenerate_pair_rejected() {
        let p = SystemParams::<f64>::reference().with_powers(500.0, 0.0);
        assert!(average_detection_error(&p).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let v = WillieChannelView::<f32>::new(0.08, 0.16, 0.2, 1.0).unwrap();
        assert!((lambda_dagger(&v) - 1.022_180_7).abs() < 1e-6);
        let closed = average_error_closed_form(&v);
        let quad = average_error_by_quadrature(&v).unwrap();
        assert!((closed - quad).abs() < 1e-5);
        let v64 = WillieChannelView::<f64>::new(0.08, 0.16, 0.2, 1.0).unwrap();
        assert!((closed as f64 - average_error_closed_form(&v64)).abs() < 1e-5);
    }
}
