use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use eprb::dempster_shafer::lower_upper_joint;
use eprb::hv::joint::PAIR_ORDER;
use eprb::hv::polytope::CONTEXTS;
use eprb::hv::TAU;
use eprb::model::ModelConfig;
use eprb::simulate::{simulate, Sampler, Schedule, SimConfig, Simulation};
use eprb::table::{Outcome, Rational};

use eprb::table::Setting::{A, B};

fn optimal() -> ModelConfig {
    ModelConfig::from_degrees([0.0, 90.0, 45.0, 135.0], 0.5, 0.25).unwrap()
}

fn uniform_run() -> &'static Simulation {
    static SIM: OnceLock<Simulation> = OnceLock::new();
    SIM.get_or_init(|| {
        let cfg = SimConfig { model: optimal(), runs: 1_000_000, seed: 42, schedule: Schedule::uniform() };
        simulate(&cfg, None).unwrap()
    })
}

/// Composite Simpson on a fine grid; kinks cost accuracy but far below what
/// the chi-square needs.
fn bin_mass(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let n = 2000;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn sampler_histogram_chi_square() {
    let phase = 0.7;
    let m = ModelConfig::new([phase, 0.0, 0.0, 0.0], 0.5, 0.25).unwrap();
    let sampler = Sampler::new(&m.density(A, true)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 200_000;
    let bins = 64;
    let mut counts = vec![0usize; bins];
    for _ in 0..n {
        let x = sampler.sample(&mut rng).value();
        counts[((x / TAU * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let width = TAU / bins as f64;
    let chi2: f64 = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let p = bin_mass(|x| 0.25 * (x - phase).cos().abs(), i as f64 * width, (i + 1) as f64 * width);
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(chi2 < critical, "chi2 = {chi2}, critical = {critical}");
}

#[test]
fn half_of_the_samples_land_in_the_plus_arc() {
    let m = optimal();
    let sampler = Sampler::new(&m.density(A, true)).unwrap();
    let plus = m.spin(A).region(Outcome::Plus).clone();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 1_000_000;
    let hits = (0..n).filter(|_| plus.contains(sampler.sample(&mut rng))).count();
    let frac = hits as f64 / n as f64;
    assert!((frac - 0.5).abs() < 0.002, "{frac}");
}

#[test]
fn fixed_context_at_sixty_degrees() {
    let model = ModelConfig::from_degrees([0.0, 90.0, 60.0, 135.0], 0.5, 0.25).unwrap();
    let n = 1_000_000;
    let cfg = SimConfig { model, runs: n, seed: 3, schedule: Schedule::Fixed(A, B) };
    let sim = simulate(&cfg, None).unwrap();
    let pp = sim.records.iter().filter(|r| r.outcomes == (Outcome::Plus, Outcome::Plus)).count();
    let p = pp as f64 / n as f64;
    let sigma = (0.125 * 0.875 / n as f64).sqrt();
    assert!((p - 0.125).abs() < 3.0 * sigma, "P(+,+) = {p}");
}

#[test]
fn random_switch_counts() {
    let sim = uniform_run();
    let n = sim.records.len() as f64;
    let sigma = (n * 0.25 * 0.75).sqrt();
    for ctx in CONTEXTS {
        let c = sim.records.iter().filter(|r| r.context == ctx).count() as f64;
        assert!((c - n / 4.0).abs() < 4.0 * sigma, "{ctx:?}: {c}");
    }
}

#[test]
fn empirical_probabilities_converge() {
    let sim = uniform_run();
    let m = optimal();
    for (l, r) in CONTEXTS {
        let runs: Vec<_> = sim.records.iter().filter(|x| x.context == (l, r)).collect();
        let n = runs.len() as f64;
        for (j, k) in PAIR_ORDER {
            let p = m.joint_prob(l, j, r, k).unwrap();
            let hits = runs.iter().filter(|x| x.outcomes == (j, k)).count() as f64;
            let sigma = (p * (1.0 - p) / n).sqrt().max(1.0 / n);
            assert!((hits / n - p).abs() < 4.0 * sigma, "{l}{r} {j},{k}: {} vs {p}", hits / n);
        }
    }
}

#[test]
fn analytic_probability_inside_ds_interval() {
    let sim = uniform_run();
    let m = optimal();
    for (l, r) in CONTEXTS {
        for (j, k) in PAIR_ORDER {
            let iv = lower_upper_joint(&sim.table, l, j, r, k).unwrap();
            let p = m.joint_prob(l, j, r, k).unwrap();
            let lo = *iv.lower.numer() as f64 / *iv.lower.denom() as f64;
            let hi = *iv.upper.numer() as f64 / *iv.upper.denom() as f64;
            assert!(lo <= p && p <= hi, "{l}{r}: {p} not in [{lo}, {hi}]");
            assert!(iv.width() > Rational::from_integer(0));
        }
    }
}
