//! Analysis toolkit for covert communication over block-fading channels with imperfect
//! channel knowledge.
//!
//! Alice transmits to Carol all the time and, in some blocks, also to Bob. Willie runs a
//! radiometer to decide whether Bob's transmission is present. The crate provides
//!
//! * [`detection`]: Willie's error probabilities, optimal threshold and the error sum
//!   averaged over his known channel gain,
//! * [`outage`]: Carol's and Bob's outage probabilities and maximum rates,
//! * [`region`]: the covertness-constrained rate region,
//! * [`montecarlo`]: a seeded, parallel sampler used to check the closed forms.
//!
//! The analytic modules are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar type.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod outage;
pub mod quadrature;
pub mod region;
pub mod scalar;

pub use detection::{
    average_detection_error, conditional_error_at_optimum, error_sum, lambda_dagger, optimal_threshold, p_fa, p_md,
    Branch,
};
pub use error::{Error, Result, ValidationReport, Violation};
pub use model::{derive_willie_view, validate, Node, ParamField};
pub use montecarlo::{empirical_error_sum, empirical_outage, sample_channel, McConfig};
pub use outage::{max_rate, outage_bob_h1, outage_carol_h0, outage_carol_h1, Hypothesis, Receiver};
pub use region::{max_covert_power, no_covert_baseline, region_boundary};
pub use scalar::Real;

pub type SystemParams = model::SystemParams<f64>;
pub type SystemParams32 = model::SystemParams<f32>;
pub type WillieChannelView = model::WillieChannelView<f64>;
pub type WillieChannelView32 = model::WillieChannelView<f32>;
pub type RealizedView = model::RealizedView<f64>;
pub type RealizedView32 = model::RealizedView<f32>;
pub type DetectionResult = detection::DetectionResult<f64>;
pub type DetectionResult32 = detection::DetectionResult<f32>;
pub type ThresholdDecision = detection::ThresholdDecision<f64>;
pub type ThresholdDecision32 = detection::ThresholdDecision<f32>;
pub type OutageSpec = outage::OutageSpec<f64>;
pub type OutageSpec32 = outage::OutageSpec<f32>;
pub type OutageCaps = region::OutageCaps<f64>;
pub type OutageCaps32 = region::OutageCaps<f32>;
pub type RegionPoint = region::RegionPoint<f64>;
pub type RegionPoint32 = region::RegionPoint<f32>;
