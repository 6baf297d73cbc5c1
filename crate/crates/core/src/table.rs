//! EPRB data tables with counterfactual gaps.
//!
//! A run of an experiment measures one setting on each side; the other two
//! cells of the run are [`Entry::Unknown`]. A [`Table`] of such runs is
//! `Experimental`. Filling every gap yields a `Complete` table, which is what
//! a single joint probability space implicitly assumes.
//!
//! All statistics are exact rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Rational64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> i64 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(Error::validation(format!("outcome must be +1 or -1, got {other}"))),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Plus => f.write_str("+1"),
            Outcome::Minus => f.write_str("-1"),
        }
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" | "+" => Ok(Outcome::Plus),
            "-1" | "-" => Ok(Outcome::Minus),
            other => Err(Error::validation(format!("bad outcome {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Setting {
    A,
    APrime,
    B,
    BPrime,
}

impl Setting {
    pub const ALL: [Setting; 4] = [Setting::A, Setting::APrime, Setting::B, Setting::BPrime];
    pub const LEFT: [Setting; 2] = [Setting::A, Setting::APrime];
    pub const RIGHT: [Setting; 2] = [Setting::B, Setting::BPrime];

    pub fn side(self) -> Side {
        match self {
            Setting::A | Setting::APrime => Side::Left,
            Setting::B | Setting::BPrime => Side::Right,
        }
    }

    /// Column position in a run: A, A', B, B'.
    pub fn index(self) -> usize {
        match self {
            Setting::A => 0,
            Setting::APrime => 1,
            Setting::B => 2,
            Setting::BPrime => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Setting::A => "A",
            Setting::APrime => "A'",
            Setting::B => "B",
            Setting::BPrime => "B'",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Setting::A),
            "A'" | "a'" | "A′" | "Ap" | "A_prime" => Ok(Setting::APrime),
            "B" | "b" => Ok(Setting::B),
            "B'" | "b'" | "B′" | "Bp" | "B_prime" => Ok(Setting::BPrime),
            other => Err(Error::validation(format!("bad setting {other:?}"))),
        }
    }
}

/// Orders a pair of settings as (left, right), rejecting same-side pairs.
pub fn left_right(c: Setting, c2: Setting) -> Result<(Setting, Setting)> {
    match (c.side(), c2.side()) {
        (Side::Left, Side::Right) => Ok((c, c2)),
        (Side::Right, Side::Left) => Ok((c2, c)),
        _ => Err(Error::SameSide(c.to_string(), c2.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entry {
    Known(Outcome),
    Unknown,
}

impl Entry {
    pub fn known(self) -> Option<Outcome> {
        match self {
            Entry::Known(o) => Some(o),
            Entry::Unknown => None,
        }
    }

    pub fn is_known(self) -> bool {
        matches!(self, Entry::Known(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Run {
    entries: [Entry; 4],
}

impl Run {
    pub fn get(&self, s: Setting) -> Entry {
        self.entries[s.index()]
    }

    pub fn entries(&self) -> &[Entry; 4] {
        &self.entries
    }

    fn known_on(&self, side: [Setting; 2]) -> usize {
        side.iter().filter(|s| self.get(**s).is_known()).count()
    }

    fn is_experimental(&self) -> bool {
        self.known_on(Setting::LEFT) == 1 && self.known_on(Setting::RIGHT) == 1
    }

    fn is_complete(&self) -> bool {
        self.entries.iter().all(|e| e.is_known())
    }

    /// The (left, right) settings measured in an experimental run.
    pub fn context(&self) -> Option<(Setting, Setting)> {
        let l = Setting::LEFT.into_iter().find(|s| self.get(*s).is_known())?;
        let r = Setting::RIGHT.into_iter().find(|s| self.get(*s).is_known())?;
        Some((l, r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Experimental,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    runs: Vec<Run>,
    kind: TableKind,
}

/// One measured row: the (setting, outcome) pairs that were observed.
pub type RowSpec = Vec<(Setting, Outcome)>;

/// Builds a table from rows of known (setting, outcome) pairs.
///
/// Settings absent from a row become [`Entry::Unknown`]. Rows naming exactly
/// one setting per side give an experimental table; rows naming all four give
/// a complete table. Mixing the two is rejected.
pub fn build_table(rows: &[RowSpec]) -> Result<Table> {
    if rows.is_empty() {
        return Err(Error::validation("table needs at least one run"));
    }
    let mut runs = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let mut entries = [Entry::Unknown; 4];
        for &(s, o) in row {
            if entries[s.index()].is_known() {
                return Err(Error::validation(format!("run {i}: setting {s} given twice")));
            }
            entries[s.index()] = Entry::Known(o);
        }
        let run = Run { entries };
        if !run.is_experimental() && !run.is_complete() {
            return Err(Error::validation(format!(
                "run {i}: need exactly one known left and one known right setting, or all four"
            )));
        }
        runs.push(run);
    }
    let kind = if runs.iter().all(Run::is_complete) {
        TableKind::Complete
    } else if runs.iter().all(Run::is_experimental) {
        TableKind::Experimental
    } else {
        return Err(Error::validation("table mixes complete and experimental runs"));
    };
    Ok(Table { runs, kind })
}

fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(num as i64, den as i64)
}

impl Table {
    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn cell(&self, run: usize, s: Setting) -> Result<Entry> {
        self.runs
            .get(run)
            .map(|r| r.get(s))
            .ok_or(Error::RunIndex { index: run, len: self.runs.len() })
    }

    pub fn count(&self, c: Setting, j: Outcome) -> usize {
        self.runs.iter().filter(|r| r.get(c) == Entry::Known(j)).count()
    }

    pub fn unknown_count(&self, c: Setting) -> usize {
        self.runs.iter().filter(|r| !r.get(c).is_known()).count()
    }

    pub fn total_unknown(&self) -> usize {
        Setting::ALL.iter().map(|s| self.unknown_count(*s)).sum()
    }

    /// Number of ways to fill in every unknown cell: `2^(#unknown)`.
    pub fn completions_count(&self) -> BigUint {
        BigUint::from(1u8) << self.total_unknown()
    }

    /// Fills the unknown cells from `assignment`, which must cover exactly
    /// the unknown cells.
    pub fn complete(&self, assignment: &BTreeMap<(usize, Setting), Outcome>) -> Result<Table> {
        let mut runs = self.runs.clone();
        for (&(i, s), &o) in assignment {
            let run = runs.get_mut(i).ok_or(Error::RunIndex { index: i, len: self.runs.len() })?;
            if self.runs[i].get(s).is_known() {
                return Err(Error::validation(format!("assignment overrides known cell ({i}, {s})")));
            }
            run.entries[s.index()] = Entry::Known(o);
        }
        if let Some((i, r)) = runs.iter().enumerate().find(|(_, r)| !r.is_complete()) {
            let s = Setting::ALL.into_iter().find(|s| !r.get(*s).is_known()).unwrap();
            return Err(Error::validation(format!("assignment misses cell ({i}, {s})")));
        }
        Ok(Table { runs, kind: TableKind::Complete })
    }

    /// Unknown cells in row-major (run, A, A', B, B') order.
    pub fn unknown_cells(&self) -> Vec<(usize, Setting)> {
        self.runs
            .iter()
            .enumerate()
            .flat_map(|(i, r)| {
                Setting::ALL.into_iter().filter(move |s| !r.get(*s).is_known()).map(move |s| (i, s))
            })
            .collect()
    }

    /// `N_c^j / N` over the whole table.
    pub fn frequency(&self, c: Setting, j: Outcome) -> Rational {
        ratio(self.count(c, j), self.len())
    }

    pub fn unknown_fraction(&self, c: Setting) -> Rational {
        ratio(self.unknown_count(c), self.len())
    }

    pub fn joint_count(&self, c: Setting, j: Outcome, c2: Setting, k: Outcome) -> usize {
        self.runs
            .iter()
            .filter(|r| r.get(c) == Entry::Known(j) && r.get(c2) == Entry::Known(k))
            .count()
    }

    /// `N_cc'^jk / N`; `c` and `c2` must be on opposite sides.
    pub fn joint_frequency(&self, c: Setting, j: Outcome, c2: Setting, k: Outcome) -> Result<Rational> {
        left_right(c, c2)?;
        Ok(ratio(self.joint_count(c, j, c2, k), self.len()))
    }

    pub fn table_average(&self, c: Setting) -> Rational {
        Outcome::BOTH.iter().map(|&j| self.frequency(c, j) * j.value()).sum()
    }

    pub fn table_correlation(&self, c: Setting, c2: Setting) -> Result<Rational> {
        left_right(c, c2)?;
        let mut acc = Rational::from_integer(0);
        for j in Outcome::BOTH {
            for k in Outcome::BOTH {
                acc += self.joint_frequency(c, j, c2, k)? * (j.value() * k.value());
            }
        }
        Ok(acc)
    }

    /// Reads the `run,setting_left,outcome_left,setting_right,outcome_right`
    /// format into an experimental table.
    pub fn read_csv<R: Read>(reader: R) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["run", "setting_left", "outcome_left", "setting_right", "outcome_right"];
        if headers.iter().ne(expected.iter().copied()) {
            return Err(Error::validation(format!("unexpected csv header {headers:?}")));
        }
        let mut rows = Vec::new();
        let mut last_run: Option<u64> = None;
        for rec in rdr.records() {
            let rec = rec?;
            let run: u64 = rec[0]
                .parse()
                .map_err(|_| Error::validation(format!("bad run index {:?}", &rec[0])))?;
            if last_run.is_some_and(|prev| run <= prev) {
                return Err(Error::validation(format!("run indices must increase (at {run})")));
            }
            last_run = Some(run);
            let sl: Setting = rec[1].parse()?;
            let sr: Setting = rec[3].parse()?;
            if sl.side() != Side::Left || sr.side() != Side::Right {
                return Err(Error::validation(format!("run {run}: settings {sl}/{sr} on wrong sides")));
            }
            rows.push(vec![(sl, rec[2].parse()?), (sr, rec[4].parse()?)]);
        }
        build_table(&rows)
    }

    /// Writes an experimental table; run ids are the row positions.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        if self.kind != TableKind::Experimental {
            return Err(Error::validation("only experimental tables have a csv form"));
        }
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["run", "setting_left", "outcome_left", "setting_right", "outcome_right"])?;
        for (i, r) in self.runs.iter().enumerate() {
            let (l, rt) = r.context().expect("experimental run");
            wtr.write_record([
                i.to_string(),
                l.to_string(),
                r.get(l).known().unwrap().to_string(),
                rt.to_string(),
                r.get(rt).known().unwrap().to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use Outcome::*;
    use Setting::*;

    /// Rows 1-4 of the canonical example table.
    pub fn four_row_table() -> Table {
        build_table(&[
            vec![(A, Plus), (B, Plus)],
            vec![(APrime, Plus), (BPrime, Minus)],
            vec![(A, Minus), (B, Plus)],
            vec![(APrime, Minus), (BPrime, Minus)],
        ])
        .unwrap()
    }

    pub fn complete_row(a: Outcome, ap: Outcome, b: Outcome, bp: Outcome) -> RowSpec {
        vec![(A, a), (APrime, ap), (B, b), (BPrime, bp)]
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use num_traits::Signed;
    use proptest::prelude::*;
    use Outcome::*;
    use Setting::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn builds_four_row_table() {
        let t = four_row_table();
        assert_eq!(t.kind(), TableKind::Experimental);
        assert_eq!(t.len(), 4);
        assert_eq!(t.cell(0, A).unwrap(), Entry::Known(Plus));
        assert_eq!(t.cell(0, APrime).unwrap(), Entry::Unknown);
        assert_eq!(t.cell(0, B).unwrap(), Entry::Known(Plus));
        assert_eq!(t.cell(0, BPrime).unwrap(), Entry::Unknown);
        assert_eq!(t.cell(1, BPrime).unwrap(), Entry::Known(Minus));
        assert!(t.cell(4, A).is_err());
    }

    #[test]
    fn builds_complete_table() {
        let t = build_table(&[complete_row(Plus, Plus, Plus, Plus)]).unwrap();
        assert_eq!(t.kind(), TableKind::Complete);
        assert_eq!(t.completions_count(), BigUint::from(1u8));
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(build_table(&[vec![(A, Plus), (APrime, Minus), (B, Plus)]]).is_err());
        assert!(build_table(&[]).is_err());
        assert!(build_table(&[vec![(A, Plus)]]).is_err());
        assert!(build_table(&[vec![(A, Plus), (A, Minus), (B, Plus)]]).is_err());
        // mixed kinds
        assert!(build_table(&[vec![(A, Plus), (B, Plus)], complete_row(Plus, Plus, Plus, Plus)]).is_err());
    }

    #[test]
    fn completion_counts() {
        assert_eq!(four_row_table().completions_count(), BigUint::from(256u32));
        let one = build_table(&[vec![(A, Plus), (B, Plus)]]).unwrap();
        assert_eq!(one.completions_count(), BigUint::from(4u32));
    }

    #[test]
    fn complete_substitutes_unknowns() {
        let t = build_table(&[vec![(A, Plus), (B, Plus)]]).unwrap();
        let asg = BTreeMap::from([((0, APrime), Minus), ((0, BPrime), Plus)]);
        let c = t.complete(&asg).unwrap();
        assert_eq!(c, build_table(&[complete_row(Plus, Minus, Plus, Plus)]).unwrap());

        let bad = BTreeMap::from([((0, A), Minus), ((0, APrime), Minus), ((0, BPrime), Plus)]);
        assert!(t.complete(&bad).is_err());
        let partial = BTreeMap::from([((0, APrime), Minus)]);
        assert!(t.complete(&partial).is_err());

        let full = build_table(&[complete_row(Plus, Minus, Plus, Plus)]).unwrap();
        assert_eq!(full.complete(&BTreeMap::new()).unwrap(), full);
    }

    #[test]
    fn frequencies() {
        let c = build_table(&[
            complete_row(Plus, Plus, Plus, Plus),
            complete_row(Minus, Plus, Plus, Plus),
            complete_row(Plus, Plus, Plus, Plus),
            complete_row(Plus, Plus, Plus, Plus),
        ])
        .unwrap();
        assert_eq!(c.frequency(A, Plus), r(3, 4));

        let t = four_row_table();
        assert_eq!(t.frequency(A, Plus), r(1, 4));
        assert_eq!(t.frequency(A, Minus), r(1, 4));
        assert_eq!(t.unknown_fraction(A), r(1, 2));
    }

    #[test]
    fn joint_frequencies_and_correlations() {
        let t = four_row_table();
        assert_eq!(t.joint_frequency(A, Plus, B, Plus).unwrap(), r(1, 4));
        assert_eq!(t.table_correlation(A, B).unwrap(), r(0, 1));
        assert!(t.joint_frequency(A, Plus, APrime, Plus).is_err());

        let all_plus = build_table(&vec![complete_row(Plus, Plus, Plus, Plus); 3]).unwrap();
        assert_eq!(all_plus.joint_frequency(A, Plus, B, Plus).unwrap(), r(1, 1));
        assert_eq!(all_plus.table_correlation(A, B).unwrap(), r(1, 1));
        assert_eq!(all_plus.table_average(A), r(1, 1));

        let anti = build_table(&[complete_row(Plus, Plus, Minus, Plus), complete_row(Minus, Plus, Plus, Plus)])
            .unwrap();
        assert_eq!(anti.table_correlation(A, B).unwrap(), r(-1, 1));
        // argument order does not matter
        assert_eq!(anti.table_correlation(B, A).unwrap(), r(-1, 1));
    }

    #[test]
    fn csv_round_trip() {
        let t = four_row_table();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("run,setting_left,outcome_left,setting_right,outcome_right\n0,A,+1,B,+1\n"));
        assert_eq!(Table::read_csv(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn csv_rejects_garbage() {
        let bad_header = "run,a,b,c,d\n0,A,+1,B,+1\n";
        assert!(Table::read_csv(bad_header.as_bytes()).is_err());
        let wrong_side = "run,setting_left,outcome_left,setting_right,outcome_right\n0,B,+1,A,+1\n";
        assert!(Table::read_csv(wrong_side.as_bytes()).is_err());
        let bad_outcome = "run,setting_left,outcome_left,setting_right,outcome_right\n0,A,2,B,+1\n";
        assert!(Table::read_csv(bad_outcome.as_bytes()).is_err());
        let unordered = "run,setting_left,outcome_left,setting_right,outcome_right\n1,A,+1,B,+1\n0,A,+1,B,+1\n";
        assert!(Table::read_csv(unordered.as_bytes()).is_err());
    }

    fn outcome() -> impl Strategy<Value = Outcome> {
        prop_oneof![Just(Plus), Just(Minus)]
    }

    fn experimental_row() -> impl Strategy<Value = RowSpec> {
        (prop_oneof![Just(A), Just(APrime)], outcome(), prop_oneof![Just(B), Just(BPrime)], outcome())
            .prop_map(|(l, j, r, k)| vec![(l, j), (r, k)])
    }

    proptest! {
        #[test]
        fn partition_holds(rows in prop::collection::vec(experimental_row(), 1..40)) {
            let t = build_table(&rows).unwrap();
            for c in Setting::ALL {
                prop_assert_eq!(t.count(c, Plus) + t.count(c, Minus) + t.unknown_count(c), t.len());
                prop_assert_eq!(
                    t.frequency(c, Plus) + t.frequency(c, Minus) + t.unknown_fraction(c),
                    Rational::from_integer(1)
                );
            }
        }

        #[test]
        fn complete_tables_obey_chsh(rows in prop::collection::vec(
            (outcome(), outcome(), outcome(), outcome()).prop_map(|(a, b, c, d)| complete_row(a, b, c, d)),
            1..40,
        )) {
            let t = build_table(&rows).unwrap();
            let e = |x, y| t.table_correlation(x, y).unwrap();
            let f = e(A, B) + e(A, BPrime) - e(APrime, B) + e(APrime, BPrime);
            prop_assert!(f.abs() <= Rational::from_integer(2));
        }

        #[test]
        fn csv_round_trips(rows in prop::collection::vec(experimental_row(), 1..30)) {
            let t = build_table(&rows).unwrap();
            let mut buf = Vec::new();
            t.write_csv(&mut buf).unwrap();
            prop_assert_eq!(Table::read_csv(buf.as_slice()).unwrap(), t);
        }
    }
}
