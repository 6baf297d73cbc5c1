//! Multi-valued maps over a [`Table`] and the lower/upper probabilities they
//! induce.
//!
//! A known cell maps to the singleton `{j}`; an unknown cell maps to the
//! whole outcome set. The lower probability of `j` counts runs whose focal
//! set lies inside `{j}`, the upper probability counts runs whose focal set
//! meets `{j}`. The gap between the two is the "don't know" mass carried by
//! the unmeasured cells.
//!
//! Context-restricted statistics normalise over the runs where the context
//! was actually measured (its domain of certainty) instead of over all `N`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::table::{left_right, Entry, Outcome, Rational, Setting, Table};

/// Nonempty image of a multi-valued map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FocalSet<T: Ord>(BTreeSet<T>);

impl<T: Ord + Copy> FocalSet<T> {
    pub fn members(&self) -> &BTreeSet<T> {
        &self.0
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }

    pub fn contains(&self, x: &T) -> bool {
        self.0.contains(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn entry_focal(e: Entry) -> BTreeSet<Outcome> {
    match e {
        Entry::Known(o) => BTreeSet::from([o]),
        Entry::Unknown => BTreeSet::from(Outcome::BOTH),
    }
}

pub fn gamma_single(t: &Table, c: Setting, run: usize) -> Result<FocalSet<Outcome>> {
    Ok(FocalSet(entry_focal(t.cell(run, c)?)))
}

/// Product of the two single-context focal sets, ordered (left, right).
pub fn gamma_joint(t: &Table, c: Setting, c2: Setting, run: usize) -> Result<FocalSet<(Outcome, Outcome)>> {
    let (l, r) = left_right(c, c2)?;
    let left = entry_focal(t.cell(run, l)?);
    let right = entry_focal(t.cell(run, r)?);
    let set = left.iter().flat_map(|&j| right.iter().map(move |&k| (j, k))).collect();
    Ok(FocalSet(set))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbabilityInterval {
    pub lower: Rational,
    pub upper: Rational,
}

impl ProbabilityInterval {
    pub fn width(&self) -> Rational {
        self.upper - self.lower
    }

    pub fn contains(&self, p: Rational) -> bool {
        self.lower <= p && p <= self.upper
    }
}

fn over_n(t: &Table, count: usize) -> Rational {
    Rational::new(count as i64, t.len() as i64)
}

pub fn lower_upper_single(t: &Table, c: Setting, j: Outcome) -> ProbabilityInterval {
    let known = t.count(c, j);
    let unknown = t.unknown_count(c);
    ProbabilityInterval { lower: over_n(t, known), upper: over_n(t, known + unknown) }
}

/// Interval for the joint outcome `(j, k)` at settings `(c, c2)`; `j`
/// belongs to `c` and `k` to `c2`, whichever side each is on.
pub fn lower_upper_joint(
    t: &Table,
    c: Setting,
    j: Outcome,
    c2: Setting,
    k: Outcome,
) -> Result<ProbabilityInterval> {
    left_right(c, c2)?;
    let (mut lower, mut upper) = (0, 0);
    for run in t.runs() {
        let (x, y) = (run.get(c), run.get(c2));
        if x == Entry::Known(j) && y == Entry::Known(k) {
            lower += 1;
        }
        let hits = |e: Entry, o: Outcome| e == Entry::Known(o) || e == Entry::Unknown;
        if hits(x, j) && hits(y, k) {
            upper += 1;
        }
    }
    Ok(ProbabilityInterval { lower: over_n(t, lower), upper: over_n(t, upper) })
}

/// Mass left unassigned by the multi-valued map for column `c`.
pub fn dont_know(t: &Table, c: Setting) -> Rational {
    over_n(t, t.unknown_count(c))
}

pub fn dont_know_joint(t: &Table, c: Setting, c2: Setting) -> Result<Rational> {
    left_right(c, c2)?;
    let n = t.runs().iter().filter(|r| !(r.get(c).is_known() && r.get(c2).is_known())).count();
    Ok(over_n(t, n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleContextStats {
    pub context: Setting,
    /// Size of the domain of certainty.
    pub support: usize,
    pub probabilities: BTreeMap<Outcome, Rational>,
    pub average: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointContextStats {
    /// (left, right).
    pub context: (Setting, Setting),
    pub support: usize,
    pub probabilities: BTreeMap<(Outcome, Outcome), Rational>,
    pub correlation: Rational,
}

impl JointContextStats {
    pub fn p(&self, j: Outcome, k: Outcome) -> Rational {
        self.probabilities[&(j, k)]
    }
}

pub fn context_stats_single(t: &Table, c: Setting) -> Result<SingleContextStats> {
    let support = t.len() - t.unknown_count(c);
    if support == 0 {
        return Err(Error::NoDataInContext(c.to_string()));
    }
    let probabilities: BTreeMap<_, _> = Outcome::BOTH
        .iter()
        .map(|&j| (j, Rational::new(t.count(c, j) as i64, support as i64)))
        .collect();
    let average = probabilities.iter().map(|(j, p)| p * j.value()).sum();
    Ok(SingleContextStats { context: c, support, probabilities, average })
}

pub fn context_stats_joint(t: &Table, c: Setting, c2: Setting) -> Result<JointContextStats> {
    let (l, r) = left_right(c, c2)?;
    let mut counts: BTreeMap<(Outcome, Outcome), usize> = BTreeMap::new();
    for j in Outcome::BOTH {
        for k in Outcome::BOTH {
            counts.insert((j, k), 0);
        }
    }
    let mut support = 0;
    for run in t.runs() {
        if let (Entry::Known(j), Entry::Known(k)) = (run.get(l), run.get(r)) {
            *counts.get_mut(&(j, k)).unwrap() += 1;
            support += 1;
        }
    }
    if support == 0 {
        return Err(Error::NoDataInContext(format!("{l}{r}")));
    }
    let probabilities: BTreeMap<_, _> =
        counts.into_iter().map(|(jk, n)| (jk, Rational::new(n as i64, support as i64))).collect();
    let correlation = probabilities.iter().map(|((j, k), p)| p * (j.value() * k.value())).sum();
    Ok(JointContextStats { context: (l, r), support, probabilities, correlation })
}
