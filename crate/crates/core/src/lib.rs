//! Trustworthy recommendation policies for insider compliance.
//!
//! The crate models an organization (the defender) that audits insiders and
//! recommends actions. It computes recommendation policies the insider can
//! trust and that maximize the average compliance enhancement, solves the
//! KL-regularized customization program and its duals, characterizes the
//! trusted-policy geometry as convex polytopes, and learns that geometry
//! from behavioral queries alone when the insider's incentives are unknown.
//!
//! All numerics are generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the `*64` aliases below fix the common `f64` choice.

pub mod belief;
pub mod geometry;
pub mod insider;
pub mod learner;
pub mod mat;
pub mod metrics;
pub mod optimizer;
pub mod scalar;
pub mod scenario;
pub mod schema;
pub mod simplex;

pub use scalar::Real;

/// `f64` instantiations of the core types.
pub type Scenario64 = scenario::ScenarioModel<f64>;
pub type Policy64 = belief::PolicyMatrix<f64>;
pub type Posterior64 = belief::Posterior<f64>;
pub type CaseStudyParams64 = scenario::CaseStudyParams<f64>;
pub type MetricReport64 = metrics::MetricReport<f64>;
pub type SolveResult64 = optimizer::SolveResult<f64>;
pub type SolverConfig64 = optimizer::SolverConfig<f64>;
pub type VRep64 = geometry::PolytopeVRep<f64>;
pub type HRep64 = geometry::PolytopeHRep<f64>;
pub type Oracle64 = insider::InsiderOracle<f64>;
pub type LearnerConfig64 = learner::LearnerConfig<f64>;
pub type LearnReport64 = learner::LearnReport<f64>;
