//! Reference-element polynomial bases and quadrature rules.

mod legendre;
mod quadrature;
mod simplex;
mod tables;

pub use legendre::{legendre_with_derivative, FacetBasis, LegendreBasis};
pub use quadrature::{gauss_legendre, quadrature, QuadratureDomain, QuadratureRule, MAX_QUADRATURE_DEGREE};
pub use simplex::{simplex_dim, SimplexBasis};
pub use tables::{edge_point, ReferenceTables, SideTable, REFERENCE_VERTICES};

/// Smallest and largest supported spatial degree.
pub const SPATIAL_DEGREES: std::ops::RangeInclusive<usize> = 1..=4;
/// Smallest and largest supported temporal degree.
pub const TEMPORAL_DEGREES: std::ops::RangeInclusive<usize> = 0..=3;
