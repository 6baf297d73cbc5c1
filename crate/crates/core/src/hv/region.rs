//! Finite unions of half-open arcs on the circle `[0, 2π)`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

pub const TAU: f64 = 2.0 * PI;

/// Reduces an angle to `[0, 2π)`.
pub fn canonical_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A point on the circle: the hidden variable of a single run.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct OnticState(f64);

impl OnticState {
    pub fn new(lambda: f64) -> Self {
        OnticState(canonical_angle(lambda))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Disjoint, sorted, non-touching arcs `[start, end)` with
/// `0 <= start < end <= 2π`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EventRegion {
    arcs: Vec<(f64, f64)>,
}

impl EventRegion {
    pub fn empty() -> Self {
        EventRegion { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        EventRegion { arcs: vec![(0.0, TAU)] }
    }

    /// The arc running counter-clockwise from `start` to `end`.
    ///
    /// Endpoints may lie anywhere on the real line; a span of `2π` or more
    /// is the full circle and a non-positive span is empty.
    pub fn arc(start: f64, end: f64) -> Self {
        let span = end - start;
        if span.is_nan() || span <= 0.0 {
            return Self::empty();
        }
        if span >= TAU {
            return Self::full();
        }
        let (s, e) = (canonical_angle(start), canonical_angle(end));
        Self::between(s, e)
    }

    /// Arc between two canonical angles, wrapping through zero when
    /// `end <= start`. Equal endpoints give the full circle.
    pub fn between(start: f64, end: f64) -> Self {
        let (s, e) = (canonical_angle(start), canonical_angle(end));
        if s < e {
            EventRegion { arcs: vec![(s, e)] }
        } else if e == 0.0 {
            EventRegion { arcs: vec![(s, TAU)] }
        } else if s == e {
            Self::full()
        } else {
            Self::from_arcs(vec![(0.0, e), (s, TAU)])
        }
    }

    /// Normalises an arbitrary list of `[start, end)` pairs inside `[0, 2π]`.
    pub fn from_arcs(mut arcs: Vec<(f64, f64)>) -> Self {
        arcs.retain(|(s, e)| s < e);
        arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(arcs.len());
        for (s, e) in arcs {
            let s = s.max(0.0);
            let e = e.min(TAU);
            if s >= e {
                continue;
            }
            match out.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => out.push((s, e)),
            }
        }
        EventRegion { arcs: out }
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.arcs == [(0.0, TAU)]
    }

    pub fn contains(&self, lambda: OnticState) -> bool {
        let x = lambda.value();
        let idx = self.arcs.partition_point(|(s, _)| *s <= x);
        idx > 0 && x < self.arcs[idx - 1].1
    }

    /// Lebesgue measure (total arc length).
    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(|(s, e)| e - s).sum()
    }

    pub fn union(&self, other: &EventRegion) -> EventRegion {
        let mut all = self.arcs.clone();
        all.extend_from_slice(&other.arcs);
        Self::from_arcs(all)
    }

    pub fn intersection(&self, other: &EventRegion) -> EventRegion {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.arcs.len() && j < other.arcs.len() {
            let (a0, a1) = self.arcs[i];
            let (b0, b1) = other.arcs[j];
            let s = a0.max(b0);
            let e = a1.min(b1);
            if s < e {
                out.push((s, e));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        EventRegion { arcs: out }
    }

    pub fn complement(&self) -> EventRegion {
        let mut out = Vec::new();
        let mut cursor = 0.0;
        for &(s, e) in &self.arcs {
            if s > cursor {
                out.push((cursor, s));
            }
            cursor = e;
        }
        if cursor < TAU {
            out.push((cursor, TAU));
        }
        EventRegion { arcs: out }
    }

    /// Arc endpoints, sorted, without duplicates.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.arcs.iter().flat_map(|(s, e)| [*s, *e]).collect();
        b.dedup();
        b
    }
}

impl fmt::Display for EventRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.arcs.is_empty() {
            return f.write_str("∅");
        }
        let parts: Vec<String> = self.arcs.iter().map(|(s, e)| format!("[{s:.6}, {e:.6})")).collect();
        f.write_str(&parts.join(" ∪ "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn wrapping_arc() {
        let r = EventRegion::arc(-FRAC_PI_2, FRAC_PI_2);
        assert_eq!(r.arcs().len(), 2);
        assert_eq!(r.arcs()[0], (0.0, FRAC_PI_2));
        assert!((r.arcs()[1].0 - 3.0 * FRAC_PI_2).abs() < 1e-15);
        assert_eq!(r.arcs()[1].1, TAU);
        assert!((r.measure() - PI).abs() < 1e-12);
        assert!(r.contains(OnticState::new(0.0)));
        assert!(!r.contains(OnticState::new(FRAC_PI_2)));
        assert!(r.contains(OnticState::new(-FRAC_PI_2)));
    }

    #[test]
    fn degenerate_arcs() {
        assert!(EventRegion::arc(1.0, 1.0).is_empty());
        assert!(EventRegion::arc(1.0, 0.5).is_empty());
        assert!(EventRegion::arc(0.3, 0.3 + TAU).is_full());
        assert!(EventRegion::arc(0.3, 10.0 * TAU).is_full());
    }

    #[test]
    fn half_open_boundaries() {
        let r = EventRegion::arc(0.0, PI);
        assert!(r.contains(OnticState::new(0.0)));
        assert!(!r.contains(OnticState::new(PI)));
        assert!(r.contains(OnticState::new(1.0)));
        assert!(!r.contains(OnticState::new(4.0)));
    }

    #[test]
    fn set_algebra() {
        let a = EventRegion::arc(0.0, PI);
        let b = EventRegion::arc(FRAC_PI_2, 3.0 * FRAC_PI_2);
        let i = a.intersection(&b);
        assert_eq!(i.arcs(), &[(FRAC_PI_2, PI)]);
        let u = a.union(&b);
        assert_eq!(u.arcs(), &[(0.0, 3.0 * FRAC_PI_2)]);
        assert_eq!(a.complement().arcs(), &[(PI, TAU)]);
        assert!(EventRegion::full().complement().is_empty());
        assert!(EventRegion::empty().complement().is_full());
    }

    #[test]
    fn canonical_angle_never_returns_tau() {
        assert_eq!(canonical_angle(-1e-300), 0.0);
        assert_eq!(canonical_angle(TAU), 0.0);
        assert!((canonical_angle(-FRAC_PI_2) - 3.0 * FRAC_PI_2).abs() < 1e-15);
    }

    fn region() -> impl Strategy<Value = EventRegion> {
        prop::collection::vec((-10.0..10.0f64, 0.0..7.0f64), 0..5).prop_map(|arcs| {
            arcs.into_iter()
                .map(|(s, len)| EventRegion::arc(s, s + len))
                .fold(EventRegion::empty(), |acc, r| acc.union(&r))
        })
    }

    proptest! {
        #[test]
        fn canonical_form(r in region()) {
            for w in r.arcs().windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
            for &(s, e) in r.arcs() {
                prop_assert!(0.0 <= s && s < e && e <= TAU);
            }
        }

        #[test]
        fn membership_matches_set_algebra(a in region(), b in region(), x in 0.0..TAU) {
            let p = OnticState::new(x);
            prop_assert_eq!(a.intersection(&b).contains(p), a.contains(p) && b.contains(p));
            prop_assert_eq!(a.union(&b).contains(p), a.contains(p) || b.contains(p));
            prop_assert_eq!(a.complement().contains(p), !a.contains(p));
        }

        #[test]
        fn measures_add_up(a in region()) {
            prop_assert!((a.measure() + a.complement().measure() - TAU).abs() < 1e-12);
        }
    }
}
