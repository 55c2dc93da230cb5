//! Outage probabilities at Carol and Bob and the largest rates meeting an outage cap.
//!
//! Each receiver decodes its own stream and treats everything else as noise: the other
//! user's signal through the known channel part, and both signals through the unknown
//! part. With signal power `S`, interference power `I`, SNR threshold `D = 2^R - 1` and
//! `P = (1 - beta)(S - I D)`, the outage probability is
//!
//! ```text
//! 1 - P / (beta D (S + I) + P) * exp(-D d^alpha sigma^2 / P)
//! ```
//!
//! and 1 whenever `P <= 0`, because the SNR never exceeds `S / I`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Node, SystemParams};
use crate::scalar::{lit, tolerance, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Receiver {
    Carol,
    Bob,
}

impl Receiver {
    pub fn as_str(self) -> &'static str {
        match self {
            Receiver::Carol => "carol",
            Receiver::Bob => "bob",
        }
    }
}

impl fmt::Display for Receiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Receiver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "carol" | "c" => Ok(Receiver::Carol),
            "bob" | "b" => Ok(Receiver::Bob),
            _ => Err(Error::argument("receiver", format!("unknown receiver `{s}`"))),
        }
    }
}

/// Whether Alice is transmitting to Bob in the block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Hypothesis::H0 => "h0",
            Hypothesis::H1 => "h1",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h0" | "0" => Ok(Hypothesis::H0),
            "h1" | "1" => Ok(Hypothesis::H1),
            _ => Err(Error::argument("hypothesis", format!("unknown hypothesis `{s}`"))),
        }
    }
}

/// A receiver, target rate, hypothesis and outage cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageSpec<T = f64> {
    pub receiver: Receiver,
    pub rate: T,
    pub hypothesis: Hypothesis,
    pub delta_cap: T,
}

impl<T: Real> OutageSpec<T> {
    pub fn new(receiver: Receiver, rate: T, hypothesis: Hypothesis, delta_cap: T) -> Result<Self> {
        check_link(receiver, hypothesis)?;
        if !(rate >= T::zero()) || !rate.is_finite() {
            return Err(Error::argument("rate", format!("must be finite and >= 0 (got {rate})")));
        }
        check_cap(delta_cap)?;
        Ok(OutageSpec {
            receiver,
            rate,
            hypothesis,
            delta_cap,
        })
    }

    /// `2^R - 1`.
    pub fn snr_threshold(&self) -> T {
        snr_threshold(self.rate)
    }

    pub fn outage(&self, params: &SystemParams<T>) -> Result<T> {
        outage(params, self.receiver, self.hypothesis, self.rate)
    }

    pub fn is_met(&self, params: &SystemParams<T>) -> Result<bool> {
        Ok(self.outage(params)? <= self.delta_cap)
    }
}

fn check_link(receiver: Receiver, hypothesis: Hypothesis) -> Result<()> {
    if receiver == Receiver::Bob && hypothesis == Hypothesis::H0 {
        return Err(Error::argument("hypothesis", "Bob receives nothing under H0"));
    }
    Ok(())
}

fn check_cap<T: Real>(delta_cap: T) -> Result<()> {
    if !(delta_cap > T::zero() && delta_cap < T::one()) {
        return Err(Error::argument(
            "delta_cap",
            format!("out of open interval (0,1) (got {delta_cap})"),
        ));
    }
    Ok(())
}

/// `2^R - 1`, accurate for small rates.
pub fn snr_threshold<T: Real>(rate: T) -> T {
    (rate * T::LN_2()).exp_m1()
}

/// One link's outage under interference-as-noise decoding.
#[derive(Debug, Clone, Copy)]
struct Link<T> {
    signal: T,
    interference: T,
    /// `d^alpha sigma^2`.
    noise: T,
    beta: T,
}

impl<T: Real> Link<T> {
    fn outage(&self, rate: T) -> T {
        let delta = snr_threshold(rate);
        let one = T::one();
        let p_delta = (one - self.beta) * (self.signal - self.interference * delta);
        if !(p_delta > T::zero()) {
            return one;
        }
        // 1 - P/(beta D (S+I) + P) exp(-D N / P) = -expm1(-ln1p(beta D (S+I) / P) - D N / P)
        let spread = self.beta * delta * (self.signal + self.interference) / p_delta;
        let fade = delta * self.noise / p_delta;
        (-(-spread.ln_1p() - fade).exp_m1()).min(one).max(T::zero())
    }

    /// Rate at which the SNR ceiling `S / I` is reached, if there is interference.
    fn ceiling(&self) -> Option<T> {
        (self.interference > T::zero()).then(|| (self.signal / self.interference).ln_1p() / T::LN_2())
    }
}

fn link<T: Real>(params: &SystemParams<T>, receiver: Receiver, hypothesis: Hypothesis) -> Link<T> {
    match (receiver, hypothesis) {
        (Receiver::Carol, Hypothesis::H1) => Link {
            signal: params.p_ac,
            interference: params.p_ab,
            noise: params.path_loss(Node::Carol) * params.sigma2_c,
            beta: params.beta_c,
        },
        (Receiver::Carol, Hypothesis::H0) => Link {
            signal: params.p_ac,
            interference: T::zero(),
            noise: params.path_loss(Node::Carol) * params.sigma2_c,
            beta: params.beta_c,
        },
        (Receiver::Bob, _) => Link {
            signal: params.p_ab,
            interference: params.p_ac,
            noise: params.path_loss(Node::Bob) * params.sigma2_b,
            beta: params.beta_b,
        },
    }
}

/// Carol's outage at rate `rate` while Bob's signal is also on the air.
pub fn outage_carol_h1<T: Real>(params: &SystemParams<T>, rate: T) -> T {
    link(params, Receiver::Carol, Hypothesis::H1).outage(rate)
}

/// Carol's outage at rate `rate` with no covert transmission. Does not depend on `p_ab`.
pub fn outage_carol_h0<T: Real>(params: &SystemParams<T>, rate: T) -> T {
    link(params, Receiver::Carol, Hypothesis::H0).outage(rate)
}

/// Bob's outage at rate `rate`, with Carol's cover signal as interference.
pub fn outage_bob_h1<T: Real>(params: &SystemParams<T>, rate: T) -> T {
    link(params, Receiver::Bob, Hypothesis::H1).outage(rate)
}

/// Dispatches on receiver and hypothesis after validating the inputs.
pub fn outage<T: Real>(params: &SystemParams<T>, receiver: Receiver, hypothesis: Hypothesis, rate: T) -> Result<T> {
    params.validate()?;
    check_link(receiver, hypothesis)?;
    if !(rate >= T::zero()) {
        return Err(Error::argument("rate", format!("must be >= 0 (got {rate})")));
    }
    if receiver == Receiver::Bob && !(params.p_ab > T::zero()) {
        return Err(Error::argument("p_ab", "Bob's outage needs p_ab > 0"));
    }
    Ok(link(params, receiver, hypothesis).outage(rate))
}

/// Absolute rate tolerance of [`max_rate`].
pub const RATE_TOL: f64 = 1e-9;

/// Largest rate whose outage stays at or below `delta_cap`, to within 1e-9 bits.
///
/// The bracket's upper end is the interference ceiling `log2(1 + S / I)` when there is
/// interference; otherwise it starts at 64 bits and doubles until infeasible. The
/// returned rate always satisfies the cap. Bob with `p_ab = 0` gets rate 0.
pub fn max_rate<T: Real>(
    params: &SystemParams<T>,
    receiver: Receiver,
    hypothesis: Hypothesis,
    delta_cap: T,
) -> Result<T> {
    params.validate()?;
    check_link(receiver, hypothesis)?;
    check_cap(delta_cap)?;
    let link = link(params, receiver, hypothesis);
    if !(link.signal > T::zero()) {
        return Ok(T::zero());
    }
    let feasible = |r: T| link.outage(r) <= delta_cap;

    let mut hi = match link.ceiling() {
        Some(c) => c,
        None => {
            let mut hi = lit::<T>(64.0);
            while feasible(hi) {
                hi = hi + hi;
                if !hi.is_finite() {
                    return Err(Error::argument("rate", "outage never exceeds the cap"));
                }
            }
            hi
        }
    };
    let mut lo = T::zero();
    if feasible(hi) {
        // Only reachable through rounding right at the ceiling.
        return Ok(hi);
    }
    let tol = tolerance::<T>(RATE_TOL);
    while hi - lo > tol.max(hi * T::epsilon() * lit(4.0)) {
        let mid = lo + (hi - lo) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
