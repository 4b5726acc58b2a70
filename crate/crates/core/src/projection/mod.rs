pub mod project;
pub mod pwpoly;

pub use project::Projector;
pub use pwpoly::PiecewisePoly;
pub mod operator_c;

pub use operator_c::{OperatorC, OperatorId};
pub mod certify;
pub mod chebyshev;
pub mod decay;

pub use certify::{certify, q_new, SpectralCertificate};
pub use decay::DecayMeasurement;
