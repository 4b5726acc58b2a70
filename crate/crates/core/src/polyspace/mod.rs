//! Exact polynomial algebra on simplices and finite element spaces.

pub mod decomposition;
pub mod multiindex;
pub mod poly;
pub mod quadrature;
pub mod reference;
pub mod space;

pub use multiindex::MultiIndex;
pub use poly::{integrate_monomial, BarycentricPoly};
pub use space::{FeSpace, SpaceKind};
