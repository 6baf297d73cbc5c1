//! Conditioning on events and on ontic states.

use super::density::{Density, QUAD_TOL};
use super::quadrature::simpson_pieces;
use super::region::{EventRegion, OnticState};
use crate::error::{Error, Result};

/// `ρ(λ)·δ_B(λ) / P(B)`: the density restricted to `B` with unit mass.
pub fn conditional_density(rho: &Density, event: &EventRegion) -> Result<Density> {
    let restricted = rho.restricted(event)?;
    if restricted.total_mass() <= f64::EPSILON * rho.total_mass() {
        return Err(Error::NullEvent);
    }
    Ok(restricted.normalized())
}

/// `P(B | λ) = δ_B(λ)`: 1 iff the ontic state lies in the event.
pub fn ontic_conditional(event: &EventRegion, lambda: OnticState) -> u8 {
    u8::from(event.contains(lambda))
}

/// Both sides of `P(B) = ∫ ρ(λ) P(B|λ) dλ`, relative to the density's mass.
///
/// The left side integrates `ρ` over the arcs of `B`. The right side
/// integrates `ρ(λ)·δ_B(λ)` over the whole support, cut at the boundaries of
/// `B` so the indicator is constant on each open piece; it is sampled there
/// through [`ontic_conditional`].
pub fn total_probability_check(rho: &Density, event: &EventRegion) -> (f64, f64) {
    let lhs = rho.probability(event);
    let profile = |x: f64| rho.terms().iter().map(|t| t.eval(x)).sum::<f64>();
    let pieces = rho.pieces(&EventRegion::full(), &event.boundaries());
    let per = QUAD_TOL / pieces.len().max(1) as f64;
    let rhs: f64 = pieces
        .into_iter()
        .map(|(a, b)| {
            let indicator = f64::from(ontic_conditional(event, OnticState::new(0.5 * (a + b))));
            let integrand = |x: f64| profile(x) * indicator;
            simpson_pieces(&integrand, &[a, b], per)
        })
        .sum();
    (lhs, rhs / rho.total_mass())
}

/// `δ_{A∩B}(λ) == δ_A(λ)·δ_B(λ)`.
pub fn bell_locality_check(a_region: &EventRegion, b_region: &EventRegion, lambda: OnticState) -> bool {
    let joint = ontic_conditional(&a_region.intersection(b_region), lambda);
    joint == ontic_conditional(a_region, lambda) * ontic_conditional(b_region, lambda)
}
