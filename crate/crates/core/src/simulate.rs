//! Seeded Monte Carlo runs of the local spin model.
//!
//! Every run draws a joint context from the schedule, draws `λ` from that
//! context's mixture density by inverse CDF, and records the two outcomes
//! the devices read. The two unmeasured cells stay unknown, so the result is
//! an experimental [`Table`].
//!
//! Run `i` uses its own ChaCha8 stream (seed, stream = `i`), which makes the
//! output independent of how runs are spread over threads.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chsh::{chsh_max, CorrelationQuad, Semantics};
use crate::error::{Error, Result};
use crate::hv::polytope::CONTEXTS;
use crate::hv::{Density, OnticState, Term};
use crate::model::{ModelConfig, SpinFunction};
use crate::table::{build_table, left_right, Outcome, Setting, Table};

pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

/// Piecewise inverse-CDF sampler for a [`Density`].
///
/// The support is cut at every kink so each term is smooth and monotone in
/// sign on each piece. A (term, piece) cell is picked with probability equal
/// to its exact mass, then `λ` is found by inverting that term's CDF on the
/// piece (a sine for `|cos|` terms, linear for constants).
#[derive(Debug, Clone)]
pub struct Sampler {
    cells: Vec<Cell>,
    cumulative: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    term: Term,
    a: f64,
    b: f64,
}

impl Sampler {
    pub fn new(density: &Density) -> Result<Self> {
        let mut cells = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (a, b) in density.pieces(density.support(), &[]) {
            for &term in density.terms() {
                let m = term.segment_mass(a, b);
                if m > 0.0 {
                    acc += m;
                    cells.push(Cell { term, a, b });
                    cumulative.push(acc);
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::validation("cannot sample a density with no mass"));
        }
        Ok(Sampler { cells, cumulative })
    }

    /// Maps two uniforms in `[0, 1)` to a point of the density.
    pub fn sample_with(&self, u_cell: f64, u_pos: f64) -> OnticState {
        let total = *self.cumulative.last().unwrap();
        let target = u_cell * total;
        let idx = self.cumulative.partition_point(|c| *c <= target).min(self.cells.len() - 1);
        let Cell { term, a, b } = self.cells[idx];
        let x = match term {
            Term::Constant { .. } => a + u_pos * (b - a),
            Term::AbsCos { phase, .. } => invert_sine(a, b, phase, u_pos),
        };
        OnticState::new(x.clamp(a, b))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> OnticState {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        self.sample_with(u1, u2)
    }
}

/// Solves `∫_a^x |cos(t - phase)| dt = u ∫_a^b |cos(t - phase)| dt` for `x`
/// when `cos(t - phase)` keeps one sign on `[a, b]`.
fn invert_sine(a: f64, b: f64, phase: f64, u: f64) -> f64 {
    use std::f64::consts::PI;
    let (sa, sb) = ((a - phase).sin(), (b - phase).sin());
    let t = (sa + u * (sb - sa)).clamp(-1.0, 1.0);
    let mid = 0.5 * (a + b) - phase;
    let base = if mid.cos() >= 0.0 { t.asin() } else { PI - t.asin() };
    let k = ((mid - base) / (2.0 * PI)).round();
    phase + base + 2.0 * PI * k
}

/// `sample_lambda`: one draw of `λ` from `density`.
pub fn sample_lambda<R: Rng + ?Sized>(density: &Density, rng: &mut R) -> Result<OnticState> {
    Ok(Sampler::new(density)?.sample(rng))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Schedule {
    /// Every run uses the same (left, right) context.
    Fixed(Setting, Setting),
    /// Probabilities over AB, AB', A'B, A'B'.
    RandomSwitch([f64; 4]),
}

impl Schedule {
    pub fn uniform() -> Self {
        Schedule::RandomSwitch([0.25; 4])
    }

    fn validate(&self) -> Result<()> {
        match self {
            Schedule::Fixed(c, c2) => left_right(*c, *c2).map(|_| ()),
            Schedule::RandomSwitch(p) => {
                if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::validation("switch probabilities must be nonnegative"));
                }
                let s: f64 = p.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::validation(format!("switch probabilities sum to {s}")));
                }
                Ok(())
            }
        }
    }

    /// Parses `fixed:AB`, `fixed:A'B'`, ... or `random`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "random" {
            return Ok(Schedule::uniform());
        }
        let ctx = s
            .strip_prefix("fixed:")
            .ok_or_else(|| Error::validation(format!("bad schedule {s:?}; use fixed:AB or random")))?;
        let split = ctx
            .char_indices()
            .skip(1)
            .find(|(_, ch)| ch.is_ascii_alphabetic())
            .map(|(i, _)| i)
            .ok_or_else(|| Error::validation(format!("bad context {ctx:?}")))?;
        let (l, r) = left_right(ctx[..split].parse()?, ctx[split..].parse()?)?;
        Ok(Schedule::Fixed(l, r))
    }

    fn pick(&self, u: f64) -> (Setting, Setting) {
        match self {
            Schedule::Fixed(c, c2) => left_right(*c, *c2).expect("validated"),
            Schedule::RandomSwitch(p) => {
                let mut acc = 0.0;
                for (i, w) in p.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return CONTEXTS[i];
                    }
                }
                // u landed in the rounding gap above the last partial sum
                CONTEXTS[p.iter().rposition(|w| *w > 0.0).unwrap_or(3)]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub model: ModelConfig,
    pub runs: usize,
    pub seed: u64,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRecord {
    pub index: usize,
    pub context: (Setting, Setting),
    pub lambda: OnticState,
    pub outcomes: (Outcome, Outcome),
}

pub struct Simulation {
    pub table: Table,
    pub records: Vec<RunRecord>,
}

struct ContextKit {
    sampler: Sampler,
    left: SpinFunction,
    right: SpinFunction,
}

/// Runs the simulation on the global rayon pool, or on a dedicated pool of
/// `threads` workers.
pub fn simulate(cfg: &SimConfig, threads: Option<usize>) -> Result<Simulation> {
    if cfg.runs == 0 {
        return Err(Error::validation("runs must be positive"));
    }
    cfg.schedule.validate()?;
    let kits: Vec<ContextKit> = CONTEXTS
        .iter()
        .map(|&(l, r)| {
            Ok(ContextKit {
                sampler: Sampler::new(&cfg.model.joint_density(l, r)?)?,
                left: cfg.model.spin(l),
                right: cfg.model.spin(r),
            })
        })
        .collect::<Result<_>>()?;

    let one = |index: usize| -> RunRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index as u64);
        let context = cfg.schedule.pick(rng.random());
        let slot = CONTEXTS.iter().position(|c| *c == context).unwrap();
        let kit = &kits[slot];
        let lambda = kit.sampler.sample(&mut rng);
        RunRecord { index, context, lambda, outcomes: (kit.left.value(lambda), kit.right.value(lambda)) }
    };

    let records: Vec<RunRecord> = match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::validation(format!("thread pool: {e}")))?;
            pool.install(|| (0..cfg.runs).into_par_iter().map(one).collect())
        }
        None => (0..cfg.runs).into_par_iter().map(one).collect(),
    };
    let rows: Vec<_> = records
        .iter()
        .map(|r| vec![(r.context.0, r.outcomes.0), (r.context.1, r.outcomes.1)])
        .collect();
    Ok(Simulation { table: build_table(&rows)?, records })
}

/// Provenance written next to a simulated table.
#[derive(Debug, Clone, Serialize)]
pub struct SimMetadata<'a> {
    pub rng: &'static str,
    pub seed: u64,
    pub substream: &'static str,
    pub runs: usize,
    pub schedule: &'a Schedule,
    pub model: &'a ModelConfig,
}

impl SimConfig {
    pub fn metadata(&self) -> SimMetadata<'_> {
        SimMetadata {
            rng: RNG_ALGORITHM,
            seed: self.seed,
            substream: "ChaCha8Rng::seed_from_u64(seed) with set_stream(run index)",
            runs: self.runs,
            schedule: &self.schedule,
            model: &self.model,
        }
    }
}

/// Formats with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub theta_deg: f64,
    pub p_pp: f64,
    pub p_pm: f64,
    pub corr: f64,
    pub chsh_variant_max: f64,
}

/// Analytic curves along `θ`: `p_pp`, `p_pm`, `corr` use a = 0, b = θ; the
/// CHSH column uses a = 0, b = θ, a' = 2θ, b' = 3θ and takes the largest
/// of the eight variants.
pub fn scan(model: &ModelConfig, from_deg: f64, to_deg: f64, step_deg: f64) -> Result<Vec<ScanRow>> {
    if !(step_deg.is_finite() && step_deg > 0.0) || !(from_deg.is_finite() && to_deg.is_finite()) || to_deg < from_deg {
        return Err(Error::validation("empty angle grid"));
    }
    let count = ((to_deg - from_deg) / step_deg + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| {
            let theta = from_deg + i as f64 * step_deg;
            let pair = ModelConfig::from_degrees([0.0, 0.0, theta, 0.0], model.alpha, model.norm)?;
            let quadcfg = ModelConfig::from_degrees([0.0, 2.0 * theta, theta, 3.0 * theta], model.alpha, model.norm)?;
            let (_, best) = chsh_max(&quadcfg.correlation_quad());
            Ok(ScanRow {
                theta_deg: theta,
                p_pp: pair.joint_prob(Setting::A, Outcome::Plus, Setting::B, Outcome::Plus)?,
                p_pm: pair.joint_prob(Setting::A, Outcome::Plus, Setting::B, Outcome::Minus)?,
                corr: pair.correlation(Setting::A, Setting::B)?,
                chsh_variant_max: best,
            })
        })
        .collect()
}

pub fn write_scan_csv<W: Write>(rows: &[ScanRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["theta_deg", "p_pp", "p_pm", "corr", "chsh_variant_max"])?;
    for r in rows {
        w.write_record([
            format!("{}", r.theta_deg),
            sig12(r.p_pp),
            sig12(r.p_pm),
            sig12(r.corr),
            sig12(r.chsh_variant_max),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Contextual correlations estimated from simulated records.
pub fn empirical_quad(records: &[RunRecord]) -> Result<CorrelationQuad> {
    let mut sum = [0i64; 4];
    let mut n = [0i64; 4];
    for r in records {
        let slot = CONTEXTS.iter().position(|c| *c == r.context).unwrap();
        sum[slot] += r.outcomes.0.value() * r.outcomes.1.value();
        n[slot] += 1;
    }
    if n.contains(&0) {
        return Err(Error::NoDataInContext("some joint context was never selected".into()));
    }
    let e: [f64; 4] = std::array::from_fn(|i| sum[i] as f64 / n[i] as f64);
    CorrelationQuad::new(e[0], e[1], e[2], e[3], Semantics::Contextual)
}
