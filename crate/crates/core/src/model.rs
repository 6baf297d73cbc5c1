//! The contextual local spin model in the xz-plane.
//!
//! The hidden variable is the spin angle `λ`. A device at angle `λ_c` splits
//! the circle into two half-open hemispheres; the left particle reads `+`
//! on `[λ_c - π/2, λ_c + π/2)`, the right particle (spin `-S`) on the
//! opposite hemisphere. Within a context the epistemic state is
//! `ρ'_c(λ) = |cos(λ - λ_c)| / 4`, and a joint context `cc'` mixes the two
//! single-context densities with weights `α` and `1 - α`. Joint outcome
//! probabilities then equal the singlet predictions for every `α`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hv::{canonical_angle, Density, EventRegion, OnticState};
use crate::table::{left_right, Outcome, Setting, Side};

/// Normalisation that makes `N|cos|` a probability density.
pub const UNIT_NORM: f64 = 0.25;
/// Normalisation under which a single context has mass 1/2, read as the
/// probability that the device setting is selected.
pub const SELECTION_NORM: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceSetting {
    pub label: Setting,
    /// Radians in `[0, 2π)`.
    pub angle: f64,
}

impl DeviceSetting {
    pub fn new(label: Setting, angle: f64) -> Self {
        DeviceSetting { label, angle: canonical_angle(angle) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConfig {
    /// Device angles in radians, indexed by [`Setting::index`].
    pub angles: [f64; 4],
    /// Mixture weight of the left-hand density; the right gets `1 - alpha`.
    pub alpha: f64,
    /// `N` in `ρ_c = N|cos(λ - λ_c)|`.
    pub norm: f64,
}

impl Default for ModelConfig {
    /// CHSH-optimal angles a = 0°, a' = 90°, b = 45°, b' = 135°.
    fn default() -> Self {
        ModelConfig::from_degrees([0.0, 90.0, 45.0, 135.0], 0.5, UNIT_NORM).unwrap()
    }
}

impl ModelConfig {
    pub fn new(angles: [f64; 4], alpha: f64, norm: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::validation(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::validation(format!("norm must be positive, got {norm}")));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::validation("angles must be finite"));
        }
        Ok(ModelConfig { angles: angles.map(canonical_angle), alpha, norm })
    }

    pub fn from_degrees(deg: [f64; 4], alpha: f64, norm: f64) -> Result<Self> {
        ModelConfig::new(deg.map(f64::to_radians), alpha, norm)
    }

    pub fn angle(&self, s: Setting) -> f64 {
        self.angles[s.index()]
    }

    pub fn device(&self, s: Setting) -> DeviceSetting {
        DeviceSetting::new(s, self.angle(s))
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        ModelConfig::new(self.angles, alpha, self.norm)
    }

    /// `N|cos(λ - λ_c)|`, or the unit-mass version when `normalized`.
    pub fn density(&self, s: Setting, normalized: bool) -> Density {
        let amp = if normalized { UNIT_NORM } else { self.norm };
        Density::abs_cos(amp, self.angle(s)).expect("validated config")
    }

    /// `α ρ'_c + (1 - α) ρ'_c'` for a left setting `c` and right `c'`.
    pub fn joint_density(&self, c: Setting, c2: Setting) -> Result<Density> {
        let (l, r) = left_right(c, c2)?;
        let (dl, dr) = (self.density(l, true), self.density(r, true));
        Density::mixture(&[(self.alpha, &dl), (1.0 - self.alpha, &dr)])
    }

    pub fn spin(&self, s: Setting) -> SpinFunction {
        SpinFunction::new(self.device(s))
    }

    /// Mass of the joint-context density on `j̃_c ∩ k̃_c'`, integrated in
    /// closed form arc by arc; `j` is the outcome at `c`, `k` at `c2`.
    pub fn joint_prob(&self, c: Setting, j: Outcome, c2: Setting, k: Outcome) -> Result<f64> {
        let rho = self.joint_density(c, c2)?;
        let region = self.spin(c).region(j).intersection(self.spin(c2).region(k));
        Ok(rho.mass_on_analytic(&region) / rho.mass_on_analytic(rho.support()))
    }

    /// The same probability by integrating the joint-context density over
    /// the intersection of the two outcome arcs.
    pub fn joint_prob_quadrature(&self, c: Setting, j: Outcome, c2: Setting, k: Outcome) -> Result<f64> {
        let rho = self.joint_density(c, c2)?;
        let region = self.spin(c).region(j).intersection(self.spin(c2).region(k));
        Ok(rho.probability(&region))
    }

    pub fn correlation(&self, c: Setting, c2: Setting) -> Result<f64> {
        let mut acc = 0.0;
        for j in Outcome::BOTH {
            for k in Outcome::BOTH {
                acc += (j.value() * k.value()) as f64 * self.joint_prob(c, j, c2, k)?;
            }
        }
        Ok(acc)
    }

    /// Correlations for AB, AB', A'B, A'B'.
    pub fn correlation_quad(&self) -> crate::chsh::CorrelationQuad {
        let e = |c, c2| self.correlation(c, c2).unwrap().clamp(-1.0, 1.0);
        crate::chsh::CorrelationQuad {
            ab: e(Setting::A, Setting::B),
            ab_prime: e(Setting::A, Setting::BPrime),
            a_prime_b: e(Setting::APrime, Setting::B),
            a_prime_b_prime: e(Setting::APrime, Setting::BPrime),
            semantics: crate::chsh::Semantics::Contextual,
        }
    }

    /// Checks that single-side marginals do not depend on the remote
    /// setting and agree with the single-particle value 1/2.
    pub fn parameter_independence(&self) -> ParameterIndependence {
        let mut left: f64 = 0.0;
        let mut right: f64 = 0.0;
        for j in Outcome::BOTH {
            for c in Setting::LEFT {
                let m = |r: Setting| Outcome::BOTH.iter().map(|&k| self.joint_prob(c, j, r, k).unwrap()).sum::<f64>();
                let (mb, mbp) = (m(Setting::B), m(Setting::BPrime));
                let single = single_prob(j);
                left = left.max((mb - mbp).abs()).max((mb - single).abs()).max((mbp - single).abs());
            }
            for r in Setting::RIGHT {
                let m = |c: Setting| Outcome::BOTH.iter().map(|&k| self.joint_prob(c, k, r, j).unwrap()).sum::<f64>();
                let (ma, map) = (m(Setting::A), m(Setting::APrime));
                let single = single_prob(j);
                right = right.max((ma - map).abs()).max((ma - single).abs()).max((map - single).abs());
            }
        }
        ParameterIndependence { left_max_deviation: left, right_max_deviation: right, max_deviation: left.max(right) }
    }

    /// Context masses under the `N = 1/8` reading: each setting is selected
    /// with probability 1/2, each joint context with 1/4.
    pub fn device_selection_measure(&self) -> Result<DeviceSelection> {
        if (self.norm - SELECTION_NORM).abs() > 1e-15 {
            return Err(Error::validation(format!(
                "device-selection reading needs norm = 1/8, got {}",
                self.norm
            )));
        }
        let single: [f64; 4] = Setting::ALL.map(|s| self.density(s, false).total_mass());
        let mut joint = [0.0; 4];
        for (i, (l, r)) in crate::hv::polytope::CONTEXTS.iter().enumerate() {
            joint[i] = single[l.index()] * single[r.index()];
        }
        Ok(DeviceSelection { single_context_mass: single, joint_context_mass: joint })
    }

    /// Outcome probability given that context `(c, c2)` was selected, from
    /// the joint-context measure scaled to mass `P_c · P_c'`.
    pub fn selected_outcome_prob(&self, c: Setting, j: Outcome, c2: Setting, k: Outcome) -> Result<f64> {
        let sel = self.device_selection_measure()?;
        let (l, r) = left_right(c, c2)?;
        let mass = sel.single_context_mass[l.index()] * sel.single_context_mass[r.index()];
        let measure = self.joint_density(l, r)?.scaled(mass)?;
        let region = self.spin(c).region(j).intersection(self.spin(c2).region(k));
        Ok(measure.mass_on(&region) / measure.total_mass())
    }

    /// Best CHSH value on a grid of whole-degree steps, with the angles
    /// (degrees) that reach it. A is pinned at 0° since only angle
    /// differences enter.
    pub fn chsh_grid_max(&self, step_deg: u32) -> Result<([u32; 4], f64)> {
        if step_deg == 0 || 360 % step_deg != 0 {
            return Err(Error::validation("grid step must divide 360"));
        }
        let n = (360 / step_deg) as usize;
        // correlation as a function of the angle difference
        let table: Vec<f64> = (0..n)
            .map(|d| {
                let cfg = ModelConfig::from_degrees([0.0, 0.0, (d as u32 * step_deg) as f64, 0.0], self.alpha, self.norm)
                    .unwrap();
                cfg.correlation(Setting::A, Setting::B).unwrap()
            })
            .collect();
        let e = |x: usize, y: usize| table[(x + n - y) % n];
        let mut best = (0.0, [0usize; 4]);
        for ap in 0..n {
            for b in 0..n {
                for bp in 0..n {
                    let corr = [e(0, b), e(0, bp), e(ap, b), e(ap, bp)];
                    for v in crate::chsh::Variant::all() {
                        let f = v.eval(corr);
                        if f > best.0 {
                            best = (f, [0, ap, b, bp]);
                        }
                    }
                }
            }
        }
        Ok((best.1.map(|i| i as u32 * step_deg), best.0))
    }
}

/// Probability of either outcome for one particle in its own context.
pub fn single_prob(_j: Outcome) -> f64 {
    0.5
}

/// Singlet-state prediction `(1 - jk a·b) / 4` from the device unit vectors
/// in the xz-plane. Used as an independent reference for the model.
pub fn quantum_oracle(j: Outcome, k: Outcome, angle_a: f64, angle_b: f64) -> f64 {
    let a = (angle_a.sin(), angle_a.cos());
    let b = (angle_b.sin(), angle_b.cos());
    let dot = a.0 * b.0 + a.1 * b.1;
    0.25 * (1.0 - (j.value() * k.value()) as f64 * dot)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterIndependence {
    pub left_max_deviation: f64,
    pub right_max_deviation: f64,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceSelection {
    /// `P_c(Ω_c)` for A, A', B, B'.
    pub single_context_mass: [f64; 4],
    /// `P_cc'(Ω_c ∩ Ω_c')` for AB, AB', A'B, A'B'.
    pub joint_context_mass: [f64; 4],
}

/// The `+` and `-` hemispheres for a device at `angle` on the given side.
pub fn domain_arcs(angle: f64, side: Side) -> (EventRegion, EventRegion) {
    let north = EventRegion::between(angle - FRAC_PI_2, angle + FRAC_PI_2);
    let south = EventRegion::between(angle + FRAC_PI_2, angle - FRAC_PI_2);
    match side {
        Side::Left => (north, south),
        Side::Right => (south, north),
    }
}

/// Deterministic outcome of one device as a function of `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinFunction {
    pub setting: DeviceSetting,
    pub side: Side,
    plus: EventRegion,
    minus: EventRegion,
}

impl SpinFunction {
    pub fn new(setting: DeviceSetting) -> Self {
        let side = setting.label.side();
        let (plus, minus) = domain_arcs(setting.angle, side);
        SpinFunction { setting, side, plus, minus }
    }

    pub fn region(&self, j: Outcome) -> &EventRegion {
        match j {
            Outcome::Plus => &self.plus,
            Outcome::Minus => &self.minus,
        }
    }

    pub fn value(&self, lambda: OnticState) -> Outcome {
        if self.plus.contains(lambda) {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

/// `observable(λ, setting)`: the outcome the device reads for spin angle `λ`.
pub fn observable(lambda: OnticState, setting: DeviceSetting) -> Outcome {
    SpinFunction::new(setting).value(lambda)
}

impl fmt::Display for ModelConfig {
    /// Plain `key=value` lines, angles in degrees.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let keys = ["angle_a", "angle_a_prime", "angle_b", "angle_b_prime"];
        for (k, a) in keys.iter().zip(self.angles) {
            writeln!(f, "{k}={}", a.to_degrees())?;
        }
        writeln!(f, "alpha={}", self.alpha)?;
        writeln!(f, "norm={}", self.norm)
    }
}

impl FromStr for ModelConfig {
    type Err = Error;

    /// Parses `key=value` lines; `#` starts a comment. Missing keys take
    /// their defaults.
    fn from_str(s: &str) -> Result<Self> {
        let mut deg = [0.0, 90.0, 45.0, 135.0];
        let mut alpha = 0.5;
        let mut norm = UNIT_NORM;
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::validation(format!("line {}: expected key=value", lineno + 1)))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::validation(format!("line {}: bad number {:?}", lineno + 1, value.trim())))?;
            match key.trim() {
                "angle_a" => deg[0] = value,
                "angle_a_prime" => deg[1] = value,
                "angle_b" => deg[2] = value,
                "angle_b_prime" => deg[3] = value,
                "alpha" => alpha = value,
                "norm" => norm = value,
                other => return Err(Error::validation(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        ModelConfig::from_degrees(deg, alpha, norm)
    }
}
