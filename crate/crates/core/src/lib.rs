//! Model Radon-like averaging operators and the numerics around them: polynomial
//! frames and brackets, curvature weights, sublevel functionals, the dyadic
//! interpolation inequality, TT*-type refinements and Knapp scaling families.

pub mod complex_det;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod incidence;
pub mod knapp;
pub mod lattice;
pub mod linalg;
pub mod marc;
pub mod mc;
pub mod models;
pub mod nondegeneracy;
pub mod operator;
pub mod poly;
pub mod scalar;
pub mod sublevel;
pub mod triangle;
pub mod ttt;

pub use error::{Error, Result};
pub use field::{lie_bracket, FramePair, PolyVectorField};
pub use incidence::{CurvatureMaps, IncidenceGeometry, IncidenceTriple, Layout};
pub use lattice::LatticeSet;
pub use marc::{DyadicSeq, MarcParams};
pub use mc::{Estimate, McConfig};
pub use models::{Model, ParamRegion, QuadraticModel};
pub use operator::{AveragingOperator, Indicator, Kernel};
pub use poly::MultiPoly;
pub use scalar::Scalar;
pub use triangle::{DimensionTriple, Ext, RationalPoint, SublevelExponents};

/// Exact exponent arithmetic.
pub type Rational = num_rational::Rational64;
/// Exact arithmetic for polynomial identities without overflow concerns.
pub type Exact = num_rational::BigRational;

pub type Poly = MultiPoly<f64>;
pub type ExactPoly = MultiPoly<Exact>;
pub type VectorField = PolyVectorField<f64>;
pub type ExactVectorField = PolyVectorField<Exact>;
pub type Frames = FramePair<f64>;
pub type Geometry = IncidenceGeometry<f64>;
pub type ExactGeometry = IncidenceGeometry<Exact>;
pub type Triple = IncidenceTriple<f64>;
