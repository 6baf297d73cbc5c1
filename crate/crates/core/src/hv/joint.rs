//! Joint distributions over the sixteen outcome assignments `(A, A', B, B')`.

use serde::Serialize;

use crate::chsh::{chsh_f, CorrelationQuad, Semantics};
use crate::error::{Error, Result};
use crate::table::{left_right, Outcome, Setting, Table, TableKind};

/// Outcome assignment for all four settings, indexed by [`Setting::index`].
pub type Vertex = [Outcome; 4];

/// Index of a vertex: bit `Setting::index()` is set when that slot is `-1`.
pub fn vertex_index(v: &Vertex) -> usize {
    v.iter().enumerate().map(|(i, o)| usize::from(*o == Outcome::Minus) << i).sum()
}

pub fn vertex(index: usize) -> Vertex {
    std::array::from_fn(|slot| if index >> slot & 1 == 1 { Outcome::Minus } else { Outcome::Plus })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution16 {
    p: [f64; 16],
}

const SUM_TOL: f64 = 1e-12;

impl JointDistribution16 {
    pub fn new(p: [f64; 16]) -> Result<Self> {
        if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::validation("joint distribution weights must be finite and nonnegative"));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::validation(format!("joint distribution sums to {s}, not 1")));
        }
        Ok(JointDistribution16 { p })
    }

    pub fn uniform() -> Self {
        JointDistribution16 { p: [1.0 / 16.0; 16] }
    }

    pub fn point_mass(v: &Vertex) -> Self {
        let mut p = [0.0; 16];
        p[vertex_index(v)] = 1.0;
        JointDistribution16 { p }
    }

    /// Empirical distribution of the rows of a complete table.
    pub fn from_complete_table(t: &Table) -> Result<Self> {
        if t.kind() != TableKind::Complete {
            return Err(Error::validation("empirical joint distribution needs a complete table"));
        }
        let mut p = [0.0; 16];
        for run in t.runs() {
            let v: Vertex = std::array::from_fn(|i| run.entries()[i].known().unwrap());
            p[vertex_index(&v)] += 1.0;
        }
        let n = t.len() as f64;
        p.iter_mut().for_each(|x| *x /= n);
        Ok(JointDistribution16 { p })
    }

    pub fn weights(&self) -> &[f64; 16] {
        &self.p
    }

    pub fn weight(&self, v: &Vertex) -> f64 {
        self.p[vertex_index(v)]
    }

    /// Probability that every listed setting shows the listed outcome,
    /// summing over the unconstrained slots.
    pub fn marginal(&self, constraints: &[(Setting, Outcome)]) -> f64 {
        (0..16)
            .filter(|&i| {
                let v = vertex(i);
                constraints.iter().all(|(s, o)| v[s.index()] == *o)
            })
            .map(|i| self.p[i])
            .sum()
    }

    pub fn average(&self, c: Setting) -> f64 {
        Outcome::BOTH.iter().map(|&j| j.value() as f64 * self.marginal(&[(c, j)])).sum()
    }

    pub fn correlation(&self, c: Setting, c2: Setting) -> f64 {
        let mut acc = 0.0;
        for j in Outcome::BOTH {
            for k in Outcome::BOTH {
                acc += (j.value() * k.value()) as f64 * self.marginal(&[(c, j), (c2, k)]);
            }
        }
        acc
    }

    /// `<C>` for A, A', B, B' and the four cross correlations.
    pub fn averages(&self) -> ([f64; 4], CorrelationQuad) {
        let singles = Setting::ALL.map(|s| self.average(s));
        let e = |c, c2| self.correlation(c, c2).clamp(-1.0, 1.0);
        let quad = CorrelationQuad {
            ab: e(Setting::A, Setting::B),
            ab_prime: e(Setting::A, Setting::BPrime),
            a_prime_b: e(Setting::APrime, Setting::B),
            a_prime_b_prime: e(Setting::APrime, Setting::BPrime),
            semantics: Semantics::SingleSpace,
        };
        (singles, quad)
    }

    /// Pairwise table `p(j, k)` for a left/right context, ordered
    /// `[++, +-, -+, --]`.
    pub fn pair_table(&self, c: Setting, c2: Setting) -> Result<[f64; 4]> {
        let (l, r) = left_right(c, c2)?;
        Ok(PAIR_ORDER.map(|(j, k)| self.marginal(&[(l, j), (r, k)])))
    }

    /// `|f|` of the induced correlations; at most 2 for every distribution.
    pub fn chsh_theorem_check(&self) -> f64 {
        let (_, q) = self.averages();
        chsh_f(&q).expect("correlations of a distribution lie in [-1, 1]").abs()
    }
}

pub const PAIR_ORDER: [(Outcome, Outcome); 4] = [
    (Outcome::Plus, Outcome::Plus),
    (Outcome::Plus, Outcome::Minus),
    (Outcome::Minus, Outcome::Plus),
    (Outcome::Minus, Outcome::Minus),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::build_table;
    use crate::table::fixtures::complete_row;
    use proptest::prelude::*;
    use Outcome::*;
    use Setting::*;

    #[test]
    fn vertex_indexing_round_trips() {
        for i in 0..16 {
            assert_eq!(vertex_index(&vertex(i)), i);
        }
        assert_eq!(vertex_index(&[Plus; 4]), 0);
        assert_eq!(vertex_index(&[Minus, Plus, Plus, Plus]), 1);
    }

    #[test]
    fn marginals() {
        assert!((JointDistribution16::uniform().marginal(&[(A, Plus)]) - 0.5).abs() < 1e-15);
        let pm = JointDistribution16::point_mass(&[Plus; 4]);
        assert_eq!(pm.marginal(&[(A, Plus), (B, Plus)]), 1.0);

        // p(+,k,l,m) = 1/8, by direct summation
        let mut p = [0.0; 16];
        for (i, w) in p.iter_mut().enumerate() {
            if vertex(i)[0] == Plus {
                *w = 0.125;
            }
        }
        let d = JointDistribution16::new(p).unwrap();
        assert_eq!(d.marginal(&[(A, Plus)]), 1.0);
        assert_eq!(d.marginal(&[(A, Minus)]), 0.0);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(JointDistribution16::new([0.0; 16]).is_err());
        let mut p = [1.0 / 16.0; 16];
        p[0] = -0.01;
        p[1] += 0.01;
        assert!(JointDistribution16::new(p).is_err());
    }

    #[test]
    fn averages_examples() {
        let pm = JointDistribution16::point_mass(&[Plus; 4]);
        let (s, q) = pm.averages();
        assert_eq!(s, [1.0; 4]);
        assert_eq!(q.as_array(), [1.0; 4]);
        assert_eq!(pm.chsh_theorem_check(), 2.0);

        let (_, q) = JointDistribution16::uniform().averages();
        assert!(q.as_array().iter().all(|x| x.abs() < 1e-15));
        assert_eq!(JointDistribution16::uniform().chsh_theorem_check(), 0.0);

        let mut p = [0.0; 16];
        p[vertex_index(&[Plus, Plus, Minus, Minus])] = 0.5;
        p[vertex_index(&[Minus, Minus, Plus, Plus])] = 0.5;
        let d = JointDistribution16::new(p).unwrap();
        assert_eq!(d.correlation(A, B), -1.0);
    }

    #[test]
    fn deterministic_vertices_hit_zero_or_two() {
        let mut max: f64 = 0.0;
        for i in 0..16 {
            let f = JointDistribution16::point_mass(&vertex(i)).chsh_theorem_check();
            assert!(f == 0.0 || f == 2.0, "vertex {i}: {f}");
            max = max.max(f);
        }
        assert_eq!(max, 2.0);
    }

    #[test]
    fn empirical_distribution_matches_table() {
        let t = build_table(&[
            complete_row(Plus, Minus, Plus, Minus),
            complete_row(Minus, Minus, Plus, Plus),
            complete_row(Plus, Plus, Minus, Plus),
            complete_row(Plus, Minus, Plus, Minus),
        ])
        .unwrap();
        let d = JointDistribution16::from_complete_table(&t).unwrap();
        let ratio_f = |r: crate::table::Rational| *r.numer() as f64 / *r.denom() as f64;
        for c in Setting::LEFT {
            for c2 in Setting::RIGHT {
                let expect = ratio_f(t.table_correlation(c, c2).unwrap());
                assert!((d.correlation(c, c2) - expect).abs() < 1e-15);
            }
        }
    }

    fn distribution() -> impl Strategy<Value = JointDistribution16> {
        prop::array::uniform16(0.0..1.0f64).prop_filter_map("nonzero", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-9).then(|| {
                let mut p = w.map(|x| x / s);
                let r: f64 = p.iter().sum();
                p[0] += 1.0 - r;
                JointDistribution16::new(p.map(|x| x.max(0.0))).ok()
            })?
        })
    }

    proptest! {
        #[test]
        fn chsh_theorem(d in distribution()) {
            prop_assert!(d.chsh_theorem_check() <= 2.0 + 1e-12);
        }

        /// Single-slot marginals do not depend on which partner is summed out.
        #[test]
        fn no_signalling_is_automatic(d in distribution()) {
            for c in Setting::LEFT {
                for j in Outcome::BOTH {
                    let via_b: f64 = Outcome::BOTH.iter().map(|&k| d.marginal(&[(c, j), (B, k)])).sum();
                    let via_bp: f64 = Outcome::BOTH.iter().map(|&k| d.marginal(&[(c, j), (BPrime, k)])).sum();
                    prop_assert!((via_b - via_bp).abs() < 1e-12);
                }
            }
        }
    }
}
