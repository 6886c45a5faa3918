//! Polar code construction toolkit.
//!
//! - [`index`]: channel indices, the no-11 attractor and its Fibonacci counts.
//! - [`order`]: universal partial order operators, closures and antichains.
//! - [`ga`]: Gaussian-approximation density evolution and its geometry checks.
//! - [`bec`]: exact Bhattacharyya recursion on the erasure channel.
//! - [`soundness`]: numeric validation of operator orderings.
//! - [`designer`]: GA, polarization-weight and accelerated frozen-set design.
//! - [`coding`]: encoder, SC decoder and Monte-Carlo estimation.
//!
//! Numeric code is generic over [`Real`]; the aliases below fix `f64`.

pub mod bec;
pub mod coding;
pub mod designer;
pub mod error;
pub mod ga;
pub mod index;
pub mod order;
pub mod quadrature;
pub mod scalar;
pub mod soundness;

pub use designer::{CodeDesign, DesignMethod, DesignSpec};
pub use error::{Error, Result};
pub use ga::GaMethod;
pub use index::{AttractorCase, AttractorSpec, ChannelIndex};
pub use order::{Comparison, PosetRelation};
pub use scalar::Real;

/// Double-precision channel parameter.
pub type ChannelParam = ga::ChannelParam<f64>;
/// Double-precision mean-LLR vector.
pub type LlrMeanVector = ga::LlrMeanVector<f64>;
/// Double-precision SC decoder.
pub type ScDecoder = coding::ScDecoder<f64>;
