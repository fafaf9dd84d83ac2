//! Covert-communication design algorithms for links assisted by an
//! intelligent reflecting surface (IRS).
//!
//! Alice transmits to Bob while a warden, Willie, tries to detect the
//! transmission. The designs choose Alice's power and the surface's reflection
//! coefficients to maximize Bob's SNR under a KL-divergence covertness budget:
//!
//! - [`psca`]: penalized SCA on the semidefinite relaxation (full CSI);
//! - [`two_stage`]: phase search plus closed-form power, and the
//!   perfect-covertness construction (full CSI);
//! - [`no_csi`]: designs that only know Willie's channel statistics.
//!
//! Every routine is generic over the scalar (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covertness;
pub mod error;
pub mod no_csi;
pub mod numerics;
pub mod psca;
pub mod scalar;
pub mod scenario;
pub mod two_stage;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

pub type C64 = Complex<f64>;
pub type SystemParams = scenario::SystemParams<f64>;
pub type Geometry = scenario::Geometry<f64>;
pub type Position = scenario::Position<f64>;
pub type PathGains = scenario::PathGains<f64>;
pub type ChannelSet = scenario::ChannelSet<f64>;
pub type ReflectDesign = scenario::ReflectDesign<f64>;
pub type CovertnessBudget = covertness::CovertnessBudget<f64>;
pub type HermitianMatrix = numerics::HermitianMatrix<f64>;
pub type RootBracket = numerics::RootBracket<f64>;
pub type QuadraticForms = psca::QuadraticForms<f64>;
pub type PscaConfig = psca::PscaConfig<f64>;
pub type PscaResult = psca::PscaResult<f64>;
pub type TwoStageConfig = two_stage::TwoStageConfig<f64>;
pub type TwoStageResult = two_stage::TwoStageResult<f64>;
pub type NoCsiInstance = no_csi::NoCsiInstance<f64>;
pub type NoCsiSuite = no_csi::NoCsiSuite<f64>;
