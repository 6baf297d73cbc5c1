//! The CHSH functional `f = <AB> + <AB'> - <A'B> + <A'B'>`.
//!
//! For correlations that come from one joint distribution `|f| <= 2`; for
//! correlations collected context by context the only algebraic bound is 4.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Semantics {
    SingleSpace,
    Contextual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationQuad {
    pub ab: f64,
    pub ab_prime: f64,
    pub a_prime_b: f64,
    pub a_prime_b_prime: f64,
    pub semantics: Semantics,
}

impl CorrelationQuad {
    pub fn new(ab: f64, ab_prime: f64, a_prime_b: f64, a_prime_b_prime: f64, semantics: Semantics) -> Result<Self> {
        let q = CorrelationQuad { ab, ab_prime, a_prime_b, a_prime_b_prime, semantics };
        q.validate()?;
        Ok(q)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.ab, self.ab_prime, self.a_prime_b, self.a_prime_b_prime]
    }

    fn validate(&self) -> Result<()> {
        // allow rounding noise from sums of probabilities
        const SLACK: f64 = 1e-12;
        for v in self.as_array() {
            if !(v.is_finite() && (-1.0 - SLACK..=1.0 + SLACK).contains(&v)) {
                return Err(Error::validation(format!("correlation {v} outside [-1, 1]")));
            }
        }
        Ok(())
    }
}

/// Signed CHSH value with the minus sign on `<A'B>`.
pub fn chsh_f(q: &CorrelationQuad) -> Result<f64> {
    q.validate()?;
    Ok(q.ab + q.ab_prime - q.a_prime_b + q.a_prime_b_prime)
}

/// One member of the CHSH family: which term carries the minus sign, and the
/// overall sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Variant {
    /// Index into `[ab, ab', a'b, a'b']`.
    pub minus_at: usize,
    pub negated: bool,
}

impl Variant {
    pub fn all() -> impl Iterator<Item = Variant> {
        (0..4).flat_map(|minus_at| [false, true].map(|negated| Variant { minus_at, negated }))
    }

    pub fn eval(&self, corr: [f64; 4]) -> f64 {
        let s: f64 = corr.iter().enumerate().map(|(i, c)| if i == self.minus_at { -c } else { *c }).sum();
        if self.negated {
            -s
        } else {
            s
        }
    }

    pub fn name(&self) -> String {
        let labels = ["AB", "AB'", "A'B", "A'B'"];
        let body: Vec<String> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| format!("{}{}", if i == self.minus_at { "-" } else { "+" }, l))
            .collect();
        if self.negated {
            format!("-({})", body.join(""))
        } else {
            body.join("")
        }
    }
}

/// Values of all eight variants, in [`Variant::all`] order.
pub fn chsh_all_variants(q: &CorrelationQuad) -> Vec<f64> {
    let corr = q.as_array();
    Variant::all().map(|v| v.eval(corr)).collect()
}

/// The variant with the largest value and that value (always `>= 0`).
pub fn chsh_max(q: &CorrelationQuad) -> (Variant, f64) {
    let corr = q.as_array();
    Variant::all()
        .map(|v| (v, v.eval(corr)))
        .fold(None, |best: Option<(Variant, f64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad(a: f64, b: f64, c: f64, d: f64) -> CorrelationQuad {
        CorrelationQuad::new(a, b, c, d, Semantics::Contextual).unwrap()
    }

    #[test]
    fn fixed_pattern() {
        assert_eq!(chsh_f(&quad(1.0, 1.0, -1.0, 1.0)).unwrap(), 4.0);
        assert_eq!(chsh_f(&quad(1.0, 1.0, 1.0, 1.0)).unwrap(), 2.0);
        assert!(CorrelationQuad::new(1.5, 0.0, 0.0, 0.0, Semantics::SingleSpace).is_err());
        assert!(CorrelationQuad::new(f64::NAN, 0.0, 0.0, 0.0, Semantics::SingleSpace).is_err());
    }

    #[test]
    fn variants() {
        let v = chsh_all_variants(&quad(1.0, 1.0, 1.0, 1.0));
        assert_eq!(v.len(), 8);
        assert!(v.iter().all(|x| x.abs() == 2.0));
        assert_eq!(chsh_max(&quad(1.0, 1.0, -1.0, 1.0)).1, 4.0);
        assert_eq!(chsh_max(&quad(1.0, 1.0, -1.0, 1.0)).0.name(), "+AB+AB'-A'B+A'B'");
    }

    #[test]
    fn singlet_at_optimal_angles() {
        let e = |x: f64, y: f64| -(x - y).to_radians().cos();
        let q = quad(e(0.0, 45.0), e(0.0, 135.0), e(90.0, 45.0), e(90.0, 135.0));
        let (_, m) = chsh_max(&q);
        assert!((m - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn bounded_by_four(a in -1.0..=1.0f64, b in -1.0..=1.0f64, c in -1.0..=1.0f64, d in -1.0..=1.0f64) {
            let q = quad(a, b, c, d);
            prop_assert!(chsh_f(&q).unwrap().abs() <= 4.0);
            prop_assert!(chsh_max(&q).1 <= 4.0);
        }

        #[test]
        fn linear_in_each_argument(
            a in -1.0..=1.0f64, b in -1.0..=1.0f64, c in -1.0..=1.0f64, d in -1.0..=1.0f64,
            x in -1.0..=1.0f64, t in 0.0..=1.0f64, slot in 0usize..4,
        ) {
            let base = [a, b, c, d];
            let mut other = base;
            other[slot] = x;
            let mut mixed = base;
            mixed[slot] = t * base[slot] + (1.0 - t) * x;
            let f = |v: [f64; 4]| chsh_f(&quad(v[0], v[1], v[2], v[3])).unwrap();
            let lhs = f(mixed);
            let rhs = t * f(base) + (1.0 - t) * f(other);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
