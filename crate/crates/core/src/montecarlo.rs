//! Monte Carlo oracle for the closed forms.
//!
//! Each trial draws its own generator from `(seed, trial index)`, so the sample set does
//! not depend on how trials are split across workers. Trials are tallied in fixed-size
//! blocks and the block tallies are merged in index order; estimates are bit-identical
//! for any worker count.
//!
//! The radiometer statistic for a complex block of variance `v` is
//! `P_w / n = v * chi2_{2n} / (2n)`, whose mean is exactly `v`. In asymptotic mode the
//! factor `chi2_{2n} / (2n)` is replaced by 1.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};
use rand_pcg::Pcg64Mcg;
use rayon::prelude::*;

use crate::detection::optimal_threshold;
use crate::error::{Error, Result};
use crate::model::{Node, SystemParams, WillieChannelView};
use crate::outage::{snr_threshold, Hypothesis, Receiver};

/// Sampling controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    /// Channel uses per block; `None` for the large-block limit.
    pub n_uses: Option<u64>,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        McConfig {
            trials,
            n_uses: None,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_n_uses(mut self, n_uses: Option<u64>) -> Self {
        self.n_uses = n_uses;
        self
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::argument("trials", "must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::argument("workers", "must be at least 1"));
        }
        if self.n_uses == Some(0) {
            return Err(Error::argument("n_uses", "must be at least 1"));
        }
        Ok(())
    }

    /// The same configuration on an independent stream, for a second quantity.
    pub fn substream(&self, label: u64) -> Self {
        McConfig {
            seed: mix(self.seed ^ mix(label.wrapping_add(0x5851_F42D_4C95_7F2D))),
            ..*self
        }
    }
}

/// A binomial proportion estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// `sqrt(p (1 - p) / trials)`.
    pub std_error: f64,
    pub trials: u64,
    /// Set when the sample is too small to resolve the proportion to 3 sigma.
    pub warning: Option<String>,
}

impl Estimate {
    pub fn from_count(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        let std_error = (p * (1.0 - p) / trials as f64).sqrt();
        let rarer = hits.min(trials - hits);
        let warning = (rarer > 0 && rarer < 10)
            .then(|| format!("only {rarer} of {trials} trials in the rarer outcome; 3-sigma resolution not reached"));
        Estimate {
            value: p,
            std_error,
            trials,
            warning,
        }
    }

    /// `(value - reference) / std_error`; 0 when both agree exactly.
    pub fn sigmas_from(&self, reference: f64) -> f64 {
        let diff = self.value - reference;
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }

    pub fn within_sigmas(&self, reference: f64, k: f64) -> bool {
        (self.value - reference).abs() <= k * self.std_error
    }
}

/// Empirical false-alarm and missed-detection rates.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSumEstimate {
    pub p_fa: Estimate,
    pub p_md: Estimate,
}

impl ErrorSumEstimate {
    pub fn error_sum(&self) -> f64 {
        self.p_fa.value + self.p_md.value
    }

    /// H0 and H1 trials are drawn independently, so the variances add.
    pub fn error_sum_std(&self) -> f64 {
        self.p_fa.std_error.hypot(self.p_md.std_error)
    }
}

/// How the known warden gain is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KnownGain {
    /// Held at the given value in every trial.
    Conditioned(f64),
    /// Drawn per trial from its exponential distribution.
    Marginalized,
}

/// How the radiometer threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    Fixed(f64),
    /// The optimal threshold for each trial's known gain.
    Optimal,
}

/// Squared magnitudes of the known and unknown channel parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    pub g_hat: f64,
    pub g_tilde: f64,
}

/// Draws `|h_hat|^2 ~ Exp(mean 1 - beta)` and an independent `|h_tilde|^2 ~ Exp(mean beta)`.
pub fn sample_channel<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> ChannelDraw {
    let unit = Exp::new(1.0).expect("unit rate");
    ChannelDraw {
        g_hat: (1.0 - beta) * unit.sample(rng),
        g_tilde: beta * unit.sample(rng),
    }
}

/// Largest `n` for which the chi-squared factor is summed from normals.
pub const EXPLICIT_CHI2_MAX_N: u64 = 1000;

/// `chi2_{2n} / (2n)`: mean 1, variance `1 / n`.
pub fn chi2_factor<R: Rng + ?Sized>(n: u64, rng: &mut R) -> f64 {
    if n <= EXPLICIT_CHI2_MAX_N {
        let sum: f64 = (0..2 * n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z * z
            })
            .sum();
        sum / (2 * n) as f64
    } else {
        let g = Gamma::new(n as f64, 1.0).expect("positive shape");
        g.sample(rng) / n as f64
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> Pcg64Mcg {
    Pcg64Mcg::seed_from_u64(mix(seed ^ mix(index)))
}

const BLOCK: u64 = 1 << 14;

/// Counts, per tally slot, the trials for which `trial` reports a hit.
fn tally<const K: usize, F>(config: &McConfig, trial: F) -> Result<[u64; K]>
where
    F: Fn(&mut Pcg64Mcg) -> [bool; K] + Sync,
{
    config.check()?;
    let blocks = config.trials.div_ceil(BLOCK);
    let run_block = |b: u64| {
        let mut counts = [0u64; K];
        let end = ((b + 1) * BLOCK).min(config.trials);
        for i in b * BLOCK..end {
            let mut rng = trial_rng(config.seed, i);
            for (c, hit) in counts.iter_mut().zip(trial(&mut rng)) {
                *c += hit as u64;
            }
        }
        counts
    };
    let per_block: Vec<[u64; K]> = if config.workers == 1 {
        (0..blocks).map(run_block).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::argument("workers", e.to_string()))?;
        pool.install(|| (0..blocks).into_par_iter().map(run_block).collect())
    };
    let mut total = [0u64; K];
    for counts in per_block {
        for (t, c) in total.iter_mut().zip(counts) {
            *t += c;
        }
    }
    Ok(total)
}

/// Empirical `P_FA` and `P_MD` of the radiometer.
///
/// Each trial draws the known gain (unless conditioned), then independent unknown gains
/// and chi-squared factors for an H0 block and an H1 block, and compares both received
/// powers with the threshold.
pub fn empirical_error_sum(
    params: &SystemParams<f64>,
    threshold: ThresholdRule,
    gain: KnownGain,
    config: &McConfig,
) -> Result<ErrorSumEstimate> {
    let view = params.willie_view()?;
    if let KnownGain::Conditioned(g) = gain {
        view.at(g)?;
    }
    if let ThresholdRule::Fixed(l) = threshold {
        if !l.is_finite() {
            return Err(Error::argument("lambda", "must be finite"));
        }
    }
    let hits = tally::<2, _>(config, |rng| {
        radiometer_trial(&view, threshold, gain, config.n_uses, rng)
    })?;
    Ok(ErrorSumEstimate {
        p_fa: Estimate::from_count(hits[0], config.trials),
        p_md: Estimate::from_count(hits[1], config.trials),
    })
}

fn radiometer_trial(
    view: &WillieChannelView<f64>,
    threshold: ThresholdRule,
    gain: KnownGain,
    n_uses: Option<u64>,
    rng: &mut Pcg64Mcg,
) -> [bool; 2] {
    let unit = Exp::new(1.0).expect("unit rate");
    let g_hat = match gain {
        KnownGain::Conditioned(g) => g,
        KnownGain::Marginalized => view.known_gain_mean() * unit.sample(rng),
    };
    let lambda = match threshold {
        ThresholdRule::Fixed(l) => l,
        ThresholdRule::Optimal => {
            let rv = view.at(g_hat).expect("sampled gain is non-negative");
            optimal_threshold(&rv).lambda_star
        }
    };
    let g0 = view.beta_w * unit.sample(rng);
    let g1 = view.beta_w * unit.sample(rng);
    let (f0, f1) = match n_uses {
        Some(n) => (chi2_factor(n, rng), chi2_factor(n, rng)),
        None => (1.0, 1.0),
    };
    let power_h0 = (view.sigma2_w + (g_hat + g0) * view.zeta0) * f0;
    let power_h1 = (view.sigma2_w + (g_hat + g1) * view.zeta1) * f1;
    [power_h0 > lambda, power_h1 < lambda]
}

/// Empirical outage: the fraction of channel draws whose SNR falls below `2^rate - 1`.
pub fn empirical_outage(
    params: &SystemParams<f64>,
    receiver: Receiver,
    hypothesis: Hypothesis,
    rate: f64,
    config: &McConfig,
) -> Result<Estimate> {
    // Validates parameters and the receiver/hypothesis pairing.
    crate::outage::outage(params, receiver, hypothesis, rate)?;
    let delta = snr_threshold(rate);
    let (signal, interference, beta, noise) = match (receiver, hypothesis) {
        (Receiver::Carol, Hypothesis::H1) => (
            params.p_ac,
            params.p_ab,
            params.beta_c,
            params.path_loss(Node::Carol) * params.sigma2_c,
        ),
        (Receiver::Carol, Hypothesis::H0) => (
            params.p_ac,
            0.0,
            params.beta_c,
            params.path_loss(Node::Carol) * params.sigma2_c,
        ),
        (Receiver::Bob, _) => (
            params.p_ab,
            params.p_ac,
            params.beta_b,
            params.path_loss(Node::Bob) * params.sigma2_b,
        ),
    };
    let total = signal + interference;
    let hits = tally::<1, _>(config, |rng| {
        let ch = sample_channel(beta, rng);
        let snr = ch.g_hat * signal / (ch.g_hat * interference + ch.g_tilde * total + noise);
        [snr < delta]
    })?;
    Ok(Estimate::from_count(hits[0], config.trials))
}

/// Sample mean and standard error of `f(g_hat)` over the known warden gain.
///
/// Block sums are merged in index order, so the result does not depend on `workers`.
pub fn empirical_mean_over_known_gain<F>(view: &WillieChannelView<f64>, f: F, config: &McConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64 + Sync,
{
    config.check()?;
    let blocks = config.trials.div_ceil(BLOCK);
    let run_block = |b: u64| {
        let (mut s, mut s2) = (0.0, 0.0);
        let end = ((b + 1) * BLOCK).min(config.trials);
        for i in b * BLOCK..end {
            let mut rng = trial_rng(config.seed, i);
            let g = sample_channel(view.beta_w, &mut rng).g_hat;
            let y = f(g);
            s += y;
            s2 += y * y;
        }
        (s, s2)
    };
    let sums: Vec<(f64, f64)> = if config.workers == 1 {
        (0..blocks).map(run_block).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::argument("workers", e.to_string()))?;
        pool.install(|| (0..blocks).into_par_iter().map(run_block).collect())
    };
    let (s, s2) = sums.into_iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = config.trials as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    Ok((mean, (var / n).sqrt()))
}
