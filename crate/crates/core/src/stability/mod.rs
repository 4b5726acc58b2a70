pub mod maxop;
pub mod measure;
pub mod range;
pub mod weight;

pub use maxop::max_operator;
pub use range::{stability_range, Degree, NormKind, PInterval, StabilityVerdict};
pub use weight::{layer_decomposition, Weight};
