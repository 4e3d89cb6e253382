//! Exact algebraic toolkit for valued constraint satisfaction.
//!
//! The crate covers weighted relations and VCSP instances, finitary
//! operations and clones, weightings and weighted polymorphisms, an exact
//! rational simplex with Farkas certificates, the two constructive Galois
//! membership deciders (weighted relational clones and weighted clones), and
//! the complete tractable/NP-hard classifier for Boolean valued constraint
//! languages.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases at the crate
//! root fix the scalar to arbitrary-precision [`Rational`].

pub mod classify;
pub mod error;
pub mod galois;
pub mod lp;
pub mod operation;
pub mod polymorphism;
pub mod relation;
pub mod scalar;
pub mod text;
pub mod vcsp;
pub mod weighting;

pub use error::{Error, Result};
pub use operation::{CloneSlices, Operation};
pub use relation::{Domain, Tuple};
pub use scalar::Scalar;

/// Arbitrary-precision exact fraction; the default weight type.
pub type Rational = num_rational::BigRational;

pub type WeightedRelation = relation::WeightedRelation<Rational>;
pub type VcspInstance = vcsp::VcspInstance<Rational>;
pub type Weighting = weighting::Weighting<Rational>;
pub type RawWeighting = weighting::RawWeighting<Rational>;
pub type LinearSystem = lp::LinearSystem<Rational>;
pub type LpOutcome = lp::LpOutcome<Rational>;
pub type RelMembershipResult = galois::RelMembershipResult<Rational>;
pub type CloneMembershipResult = galois::CloneMembershipResult<Rational>;
pub type BooleanVerdict = classify::BooleanVerdict<Rational>;
