//! Single-space hidden-variable machinery.
//!
//! [`joint`] holds the sixteen-outcome joint distribution and the CHSH
//! theorem check; [`region`] and [`density`] model events and epistemic
//! states on the circle; [`conditional`] covers conditioning on events and on
//! ontic states; [`polytope`] decides whether contextual statistics admit a
//! single joint distribution.

pub mod conditional;
pub mod density;
pub mod joint;
pub mod polytope;
pub mod quadrature;
pub mod region;

pub use conditional::{bell_locality_check, conditional_density, ontic_conditional, total_probability_check};
pub use density::{Density, Term};
pub use joint::JointDistribution16;
pub use polytope::{polytope_membership, Certificate, ContextTables, Membership, MembershipReport};
pub use region::{canonical_angle, EventRegion, OnticState, TAU};
