//! End-to-end analysis of a table: lower/upper probabilities per context,
//! context-restricted statistics, the contextual CHSH value and, for
//! comparison, the naive whole-table frequencies.
//!
//! Outcome keys in the JSON report are `"+1"`/`"-1"` for single contexts and
//! `"+1,+1"`, `"+1,-1"`, `"-1,+1"`, `"-1,-1"` (left first) for joint ones.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chsh::{chsh_f, CorrelationQuad, Semantics, Variant};
use crate::dempster_shafer::{
    context_stats_joint, context_stats_single, dont_know, dont_know_joint, lower_upper_joint, lower_upper_single,
};
use crate::error::{Error, Result};
use crate::hv::joint::PAIR_ORDER;
use crate::hv::polytope::{ContextTables, CONTEXTS};
use crate::table::{Outcome, Rational, Setting, Table, TableKind};

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn pair_key(j: Outcome, k: Outcome) -> String {
    format!("{j},{k}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleBlock {
    pub context: String,
    pub lower: BTreeMap<String, f64>,
    pub upper: BTreeMap<String, f64>,
    pub dont_know: f64,
    /// `None` when the setting was never measured.
    pub p: Option<BTreeMap<String, f64>>,
    pub average: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointBlock {
    pub context: String,
    pub lower: BTreeMap<String, f64>,
    pub upper: BTreeMap<String, f64>,
    pub dont_know: f64,
    pub p: Option<BTreeMap<String, f64>>,
    /// The correlation `<CC'>` restricted to this context.
    pub average: Option<f64>,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantValue {
    pub variant: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshBlock {
    /// `<AB> + <AB'> - <A'B> + <A'B'>`.
    pub f: f64,
    pub variants: Vec<VariantValue>,
    pub max_abs: f64,
    pub max_variant: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBlock {
    /// `N_c^j / N` over all runs.
    pub frequencies: BTreeMap<String, BTreeMap<String, f64>>,
    /// `Σ jk N_cc'^jk / N` over all runs.
    pub correlations: BTreeMap<String, f64>,
    pub chsh_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub runs: usize,
    pub complete: bool,
    pub singles: Vec<SingleBlock>,
    pub joints: Vec<JointBlock>,
    /// Contextual CHSH; absent when some joint context has no data.
    pub chsh: Option<ChshBlock>,
    pub naive: NaiveBlock,
}

pub fn analyze(t: &Table) -> Result<AnalysisReport> {
    let mut singles = Vec::new();
    for c in Setting::ALL {
        let lower = Outcome::BOTH.iter().map(|&j| (j.to_string(), to_f64(lower_upper_single(t, c, j).lower))).collect();
        let upper = Outcome::BOTH.iter().map(|&j| (j.to_string(), to_f64(lower_upper_single(t, c, j).upper))).collect();
        let (p, average) = match context_stats_single(t, c) {
            Ok(s) => (
                Some(s.probabilities.iter().map(|(j, p)| (j.to_string(), to_f64(*p))).collect()),
                Some(to_f64(s.average)),
            ),
            Err(Error::NoDataInContext(_)) => (None, None),
            Err(e) => return Err(e),
        };
        singles.push(SingleBlock { context: c.to_string(), lower, upper, dont_know: to_f64(dont_know(t, c)), p, average });
    }

    let mut joints = Vec::new();
    let mut corr = Vec::new();
    for (l, r) in CONTEXTS {
        let mut lower = BTreeMap::new();
        let mut upper = BTreeMap::new();
        for (j, k) in PAIR_ORDER {
            let iv = lower_upper_joint(t, l, j, r, k)?;
            lower.insert(pair_key(j, k), to_f64(iv.lower));
            upper.insert(pair_key(j, k), to_f64(iv.upper));
        }
        let (p, average, support) = match context_stats_joint(t, l, r) {
            Ok(s) => {
                let p = PAIR_ORDER.iter().map(|&(j, k)| (pair_key(j, k), to_f64(s.p(j, k)))).collect();
                (Some(p), Some(to_f64(s.correlation)), s.support)
            }
            Err(Error::NoDataInContext(_)) => (None, None, 0),
            Err(e) => return Err(e),
        };
        corr.push(average);
        joints.push(JointBlock {
            context: format!("{l}{r}"),
            lower,
            upper,
            dont_know: to_f64(dont_know_joint(t, l, r)?),
            p,
            average,
            support,
        });
    }

    let chsh = match corr[..] {
        [Some(ab), Some(abp), Some(apb), Some(apbp)] => {
            Some(chsh_block(&CorrelationQuad::new(ab, abp, apb, apbp, Semantics::Contextual)?)?)
        }
        _ => None,
    };

    Ok(AnalysisReport { runs: t.len(), complete: t.kind() == TableKind::Complete, singles, joints, chsh, naive: naive(t)? })
}

pub fn chsh_block(q: &CorrelationQuad) -> Result<ChshBlock> {
    let corr = q.as_array();
    let variants: Vec<VariantValue> =
        Variant::all().map(|v| VariantValue { variant: v.name(), value: v.eval(corr) }).collect();
    let best = variants.iter().max_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
    Ok(ChshBlock { f: chsh_f(q)?, max_abs: best.value, max_variant: best.variant.clone(), variants })
}

fn naive(t: &Table) -> Result<NaiveBlock> {
    let frequencies = Setting::ALL
        .iter()
        .map(|&c| {
            let m = Outcome::BOTH.iter().map(|&j| (j.to_string(), to_f64(t.frequency(c, j)))).collect();
            (c.to_string(), m)
        })
        .collect();
    let mut correlations = BTreeMap::new();
    let mut e = Vec::new();
    for (l, r) in CONTEXTS {
        let v = to_f64(t.table_correlation(l, r)?);
        correlations.insert(format!("{l}{r}"), v);
        e.push(v);
    }
    Ok(NaiveBlock { frequencies, correlations, chsh_f: e[0] + e[1] - e[2] + e[3] })
}

impl AnalysisReport {
    /// Contextual pairwise tables for a polytope check.
    pub fn context_tables(&self) -> Result<ContextTables> {
        let mut out = [[0.0; 4]; 4];
        for (slot, (l, r)) in CONTEXTS.iter().enumerate() {
            let name = format!("{l}{r}");
            let block = self
                .joints
                .iter()
                .find(|b| b.context == name)
                .ok_or_else(|| Error::validation(format!("report has no joint block for {name}")))?;
            let p = block
                .p
                .as_ref()
                .ok_or_else(|| Error::validation(format!("context {name} has no data")))?;
            for (i, (j, k)) in PAIR_ORDER.iter().enumerate() {
                out[slot][i] = *p
                    .get(&pair_key(*j, *k))
                    .ok_or_else(|| Error::validation(format!("context {name} lacks outcome {}", pair_key(*j, *k))))?;
            }
        }
        ContextTables::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::build_table;
    use crate::table::fixtures::{complete_row, four_row_table};
    use Outcome::*;

    #[test]
    fn four_row_report() {
        let rep = analyze(&four_row_table()).unwrap();
        let a = &rep.singles[0];
        assert_eq!(a.context, "A");
        assert_eq!(a.lower["+1"], 0.25);
        assert_eq!(a.upper["+1"], 0.75);
        assert_eq!(a.dont_know, 0.5);
        assert_eq!(a.p.as_ref().unwrap()["+1"], 0.5);
        assert_eq!(a.average, Some(0.0));
        let ab = &rep.joints[0];
        assert_eq!(ab.context, "AB");
        assert_eq!(ab.p.as_ref().unwrap()["+1,+1"], 0.5);
        assert_eq!(ab.lower["+1,+1"], 0.25);
        assert_eq!(ab.upper["+1,+1"], 0.75);
        // AB' never measured jointly
        assert!(rep.joints[1].p.is_none());
        assert!(rep.chsh.is_none());
        assert!(rep.context_tables().is_err());
    }

    #[test]
    fn complete_table_collapses() {
        let t = build_table(&[
            complete_row(Plus, Minus, Plus, Minus),
            complete_row(Minus, Minus, Plus, Plus),
            complete_row(Plus, Plus, Minus, Plus),
        ])
        .unwrap();
        let rep = analyze(&t).unwrap();
        for b in &rep.singles {
            assert_eq!(b.lower, b.upper);
            assert_eq!(b.dont_know, 0.0);
        }
        for b in &rep.joints {
            assert_eq!(b.lower, b.upper);
        }
        assert!(rep.chsh.as_ref().unwrap().max_abs <= 2.0);
        assert_eq!(rep.chsh.as_ref().unwrap().f, rep.naive.chsh_f);
    }

    #[test]
    fn json_round_trip() {
        let rep = analyze(&four_row_table()).unwrap();
        let s = serde_json::to_string(&rep).unwrap();
        let back: AnalysisReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rep);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        for key in ["context", "lower", "upper", "dont_know", "p", "average"] {
            assert!(v["singles"][0].get(key).is_some(), "{key}");
            assert!(v["joints"][0].get(key).is_some(), "{key}");
        }
    }
}
