//! Piecewise-smooth densities on the circle.
//!
//! A [`Density`] is a nonnegative sum of [`Term`]s restricted to an
//! [`EventRegion`]. Every term is smooth except at known kink points, so
//! integrals split at kinks and arc endpoints and converge quickly.
//! `total_mass` need not be 1: unnormalised context measures are allowed and
//! probabilities are reported relative to it.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::quadrature::simpson_pieces;
use super::region::{canonical_angle, EventRegion, OnticState, TAU};
use crate::error::{Error, Result};

/// Absolute quadrature tolerance used throughout.
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Term {
    /// `value` everywhere on the support.
    Constant { value: f64 },
    /// `amplitude * |cos(λ - phase)|`.
    AbsCos { amplitude: f64, phase: f64 },
}

impl Term {
    pub fn eval(&self, lambda: f64) -> f64 {
        match *self {
            Term::Constant { value } => value,
            Term::AbsCos { amplitude, phase } => amplitude * (lambda - phase).cos().abs(),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match *self {
            Term::Constant { .. } => Vec::new(),
            Term::AbsCos { phase, .. } => vec![canonical_angle(phase - FRAC_PI_2), canonical_angle(phase + FRAC_PI_2)],
        }
    }

    fn scaled(&self, k: f64) -> Term {
        match *self {
            Term::Constant { value } => Term::Constant { value: value * k },
            Term::AbsCos { amplitude, phase } => Term::AbsCos { amplitude: amplitude * k, phase },
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            Term::Constant { value } => value.is_finite() && value >= 0.0,
            Term::AbsCos { amplitude, phase } => amplitude.is_finite() && amplitude >= 0.0 && phase.is_finite(),
        }
    }

    /// Closed-form integral over `[a, b]`, valid when no kink lies strictly
    /// inside the interval.
    pub fn segment_mass(&self, a: f64, b: f64) -> f64 {
        match *self {
            Term::Constant { value } => value * (b - a),
            Term::AbsCos { amplitude, phase } => amplitude * ((b - phase).sin() - (a - phase).sin()).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    terms: Vec<Term>,
    support: EventRegion,
    total_mass: f64,
}

impl Density {
    /// Builds a density and computes its mass by quadrature.
    pub fn new(terms: Vec<Term>, support: EventRegion) -> Result<Self> {
        if terms.is_empty() || !terms.iter().all(Term::is_valid) {
            return Err(Error::validation("density terms must be finite and nonnegative"));
        }
        let mut d = Density { terms, support, total_mass: 0.0 };
        d.total_mass = d.mass_on(&EventRegion::full());
        if d.total_mass.is_nan() || d.total_mass <= 0.0 {
            return Err(Error::validation("density has zero total mass"));
        }
        Ok(d)
    }

    pub fn uniform() -> Self {
        Density::new(vec![Term::Constant { value: 1.0 / TAU }], EventRegion::full()).unwrap()
    }

    /// `amplitude * |cos(λ - phase)|` on the whole circle (mass `4 * amplitude`).
    pub fn abs_cos(amplitude: f64, phase: f64) -> Result<Self> {
        Density::new(vec![Term::AbsCos { amplitude, phase }], EventRegion::full())
    }

    /// Weighted sum of densities sharing one support.
    pub fn mixture(parts: &[(f64, &Density)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::validation("empty mixture"))?;
        let support = first.1.support.clone();
        let mut terms = Vec::new();
        for (w, d) in parts {
            if d.support != support {
                return Err(Error::validation("mixture components must share a support"));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::validation(format!("mixture weight {w} must be nonnegative")));
            }
            if *w > 0.0 {
                terms.extend(d.terms.iter().map(|t| t.scaled(*w)));
            }
        }
        Density::new(terms, support)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn support(&self) -> &EventRegion {
        &self.support
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn eval(&self, lambda: OnticState) -> f64 {
        if self.support.contains(lambda) {
            self.eval_unrestricted(lambda.value())
        } else {
            0.0
        }
    }

    fn eval_unrestricted(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn kinks(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.terms.iter().flat_map(Term::kinks).collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    /// The arcs of `support ∩ region`, each cut at every kink and at every
    /// extra break point, as consecutive `[a, b]` pieces.
    pub fn pieces(&self, region: &EventRegion, extra_breaks: &[f64]) -> Vec<(f64, f64)> {
        let mut cuts = self.kinks();
        cuts.extend_from_slice(extra_breaks);
        cuts.sort_by(f64::total_cmp);
        let mut out = Vec::new();
        for &(s, e) in self.support.intersection(region).arcs() {
            let mut prev = s;
            for &c in cuts.iter().filter(|c| **c > s && **c < e) {
                if c > prev {
                    out.push((prev, c));
                    prev = c;
                }
            }
            out.push((prev, e));
        }
        out
    }

    /// `∫_region ρ` by quadrature.
    pub fn mass_on(&self, region: &EventRegion) -> f64 {
        let f = |x: f64| self.eval_unrestricted(x);
        self.pieces(region, &[])
            .into_iter()
            .map(|(a, b)| simpson_pieces(&f, &[a, b], QUAD_TOL))
            .sum()
    }

    /// Closed-form `∫_region ρ`, summing term integrals piece by piece.
    pub fn mass_on_analytic(&self, region: &EventRegion) -> f64 {
        self.pieces(region, &[])
            .into_iter()
            .map(|(a, b)| self.terms.iter().map(|t| t.segment_mass(a, b)).sum::<f64>())
            .sum()
    }

    /// Probability of `region` relative to the total mass.
    pub fn probability(&self, region: &EventRegion) -> f64 {
        self.mass_on(region) / self.total_mass
    }

    pub fn scaled(&self, k: f64) -> Result<Density> {
        Density::new(self.terms.iter().map(|t| t.scaled(k)).collect(), self.support.clone())
    }

    pub fn normalized(&self) -> Density {
        let k = 1.0 / self.total_mass;
        Density {
            terms: self.terms.iter().map(|t| t.scaled(k)).collect(),
            support: self.support.clone(),
            total_mass: self.total_mass * k,
        }
    }

    /// Same profile on `support ∩ region`, not renormalised.
    pub fn restricted(&self, region: &EventRegion) -> Result<Density> {
        let support = self.support.intersection(region);
        let mut d = Density { terms: self.terms.clone(), support, total_mass: 0.0 };
        d.total_mass = d.mass_on(&EventRegion::full());
        if d.total_mass > 0.0 {
            Ok(d)
        } else {
            Err(Error::NullEvent)
        }
    }
}
