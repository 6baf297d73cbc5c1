//! Membership of contextual statistics in the local (Bell) polytope.
//!
//! Four pairwise tables `p_cc'(j, k)` come from a single joint distribution
//! iff some convex combination of the sixteen deterministic vertices
//! reproduces all of them. That is a linear feasibility problem in sixteen
//! nonnegative weights, solved here with a phase-one simplex. When it is
//! infeasible the report carries a violated inequality: the largest CHSH
//! variant, or a signalling marginal mismatch if the CHSH family holds.

use serde::{Deserialize, Serialize};

use super::joint::{vertex, JointDistribution16, PAIR_ORDER};
use crate::chsh::{chsh_max, CorrelationQuad, Semantics};
use crate::error::{Error, Result};
use crate::table::{Setting, Table};

/// Contexts in the order used everywhere: AB, AB', A'B, A'B'.
pub const CONTEXTS: [(Setting, Setting); 4] = [
    (Setting::A, Setting::B),
    (Setting::A, Setting::BPrime),
    (Setting::APrime, Setting::B),
    (Setting::APrime, Setting::BPrime),
];

/// Tolerance for matching a witness to its inputs.
pub const WITNESS_TOL: f64 = 1e-9;
const INPUT_SUM_TOL: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-12;

/// One `[++, +-, -+, --]` table per context in [`CONTEXTS`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextTables(pub [[f64; 4]; 4]);

impl ContextTables {
    pub fn new(tables: [[f64; 4]; 4]) -> Result<Self> {
        for (ctx, t) in CONTEXTS.iter().zip(tables.iter()) {
            if t.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::validation(format!("context {}{}: negative or non-finite entry", ctx.0, ctx.1)));
            }
            let s: f64 = t.iter().sum();
            if (s - 1.0).abs() > INPUT_SUM_TOL {
                return Err(Error::validation(format!("context {}{} sums to {s}", ctx.0, ctx.1)));
            }
        }
        Ok(ContextTables(tables))
    }

    pub fn from_joint(d: &JointDistribution16) -> Self {
        ContextTables(CONTEXTS.map(|(l, r)| d.pair_table(l, r).unwrap()))
    }

    /// Context-restricted frequencies of an experimental or complete table.
    pub fn from_table(t: &Table) -> Result<Self> {
        let mut out = [[0.0; 4]; 4];
        for (slot, (l, r)) in CONTEXTS.iter().enumerate() {
            let st = crate::dempster_shafer::context_stats_joint(t, *l, *r)?;
            for (i, (j, k)) in PAIR_ORDER.iter().enumerate() {
                let p = st.p(*j, *k);
                out[slot][i] = *p.numer() as f64 / *p.denom() as f64;
            }
        }
        ContextTables::new(out)
    }

    pub fn correlations(&self) -> CorrelationQuad {
        let e = |t: &[f64; 4]| (t[0] - t[1] - t[2] + t[3]).clamp(-1.0, 1.0);
        CorrelationQuad {
            ab: e(&self.0[0]),
            ab_prime: e(&self.0[1]),
            a_prime_b: e(&self.0[2]),
            a_prime_b_prime: e(&self.0[3]),
            semantics: Semantics::Contextual,
        }
    }

    /// Largest gap between a single-setting marginal computed in the two
    /// contexts that contain it, with the setting it concerns.
    pub fn signalling_gap(&self) -> (Setting, f64) {
        let t = &self.0;
        let plus_left = |ctx: usize| t[ctx][0] + t[ctx][1];
        let plus_right = |ctx: usize| t[ctx][0] + t[ctx][2];
        [
            (Setting::A, (plus_left(0) - plus_left(1)).abs()),
            (Setting::APrime, (plus_left(2) - plus_left(3)).abs()),
            (Setting::B, (plus_right(0) - plus_right(2)).abs()),
            (Setting::BPrime, (plus_right(1) - plus_right(3)).abs()),
        ]
        .into_iter()
        .fold((Setting::A, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub variant: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    Feasible(JointDistribution16),
    Infeasible(Certificate),
}

/// Serialised form: `{feasible, witness, certificate}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub feasible: bool,
    pub witness: Option<Vec<f64>>,
    pub certificate: Option<Certificate>,
}

impl From<&Membership> for MembershipReport {
    fn from(m: &Membership) -> Self {
        match m {
            Membership::Feasible(d) => {
                MembershipReport { feasible: true, witness: Some(d.weights().to_vec()), certificate: None }
            }
            Membership::Infeasible(c) => {
                MembershipReport { feasible: false, witness: None, certificate: Some(c.clone()) }
            }
        }
    }
}

pub fn polytope_membership(tables: &ContextTables) -> Result<Membership> {
    let tables = ContextTables::new(tables.0)?;
    if let Some(w) = phase_one(&tables) {
        if let Ok(d) = JointDistribution16::new(w) {
            if max_residual(&d, &tables) <= WITNESS_TOL {
                return Ok(Membership::Feasible(d));
            }
        }
    }
    Ok(Membership::Infeasible(certificate(&tables)))
}

fn certificate(tables: &ContextTables) -> Certificate {
    let (variant, value) = chsh_max(&tables.correlations());
    let (setting, gap) = tables.signalling_gap();
    if value <= 2.0 && gap > 0.0 {
        Certificate { variant: format!("no-signalling:{setting}"), value: gap }
    } else {
        Certificate { variant: variant.name(), value }
    }
}

pub fn max_residual(d: &JointDistribution16, tables: &ContextTables) -> f64 {
    let got = ContextTables::from_joint(d);
    got.0
        .iter()
        .flatten()
        .zip(tables.0.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Phase-one simplex (Bland's rule) for `M w = p, w >= 0` where row
/// `(ctx, jk)` of `M` selects the vertices agreeing with `(j, k)` on `ctx`.
/// Returns normalised weights when the artificial objective reaches zero.
fn phase_one(tables: &ContextTables) -> Option<[f64; 16]> {
    const N: usize = 16;
    const M: usize = 16;
    let width = N + M + 1;
    let mut tab = vec![vec![0.0; width]; M];
    for (ctx, (l, r)) in CONTEXTS.iter().enumerate() {
        for (jk, (j, k)) in PAIR_ORDER.iter().enumerate() {
            let row = &mut tab[ctx * 4 + jk];
            for (col, cell) in row.iter_mut().take(N).enumerate() {
                let v = vertex(col);
                if v[l.index()] == *j && v[r.index()] == *k {
                    *cell = 1.0;
                }
            }
            row[N + ctx * 4 + jk] = 1.0;
            row[width - 1] = tables.0[ctx][jk];
        }
    }
    let mut basis: Vec<usize> = (N..N + M).collect();
    // reduced costs of the artificial objective
    let mut cost = vec![0.0; width];
    for row in &tab {
        for (c, v) in cost.iter_mut().zip(row) {
            *c -= v;
        }
    }
    for c in cost.iter_mut().skip(N).take(M) {
        *c += 1.0;
    }

    for _ in 0..10_000 {
        let Some(enter) = (0..N + M).find(|&j| cost[j] < -PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for (i, r) in tab.iter().enumerate() {
            let a = r[enter];
            if a <= PIVOT_EPS {
                continue;
            }
            let ratio = r[width - 1] / a;
            let take = match leave {
                None => true,
                Some((li, lr)) => ratio < lr - PIVOT_EPS || (ratio <= lr + PIVOT_EPS && basis[i] < basis[li]),
            };
            if take {
                leave = Some((i, ratio));
            }
        }
        // the phase-one objective is bounded below, so a pivot row exists
        let (row, _) = leave?;
        let piv = tab[row][enter];
        tab[row].iter_mut().for_each(|v| *v /= piv);
        let pivot_row = tab[row].clone();
        for (i, r) in tab.iter_mut().enumerate() {
            if i != row {
                let f = r[enter];
                if f != 0.0 {
                    r.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
                }
            }
        }
        let f = cost[enter];
        cost.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
        basis[row] = enter;
    }

    let infeasibility = -cost[width - 1];
    if infeasibility > WITNESS_TOL {
        return None;
    }
    let mut w = [0.0; N];
    for (i, &b) in basis.iter().enumerate() {
        if b < N {
            w[b] = tab[i][width - 1].max(0.0);
        }
    }
    let s: f64 = w.iter().sum();
    if s <= 0.0 {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= s);
    let r: f64 = w.iter().sum();
    let imax = (0..N).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
    w[imax] += 1.0 - r;
    Some(w)
}
