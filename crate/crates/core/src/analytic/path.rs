//! Integration paths between poles.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fuchsian::FuchsianSystem;
use crate::scalar::C64;

/// Polyline from one pole to another (or to a regular point).
#[derive(Clone, Debug, PartialEq)]
pub struct PathSpec {
    pub waypoints: Vec<C64>,
}

/// Points used to approximate each detour arc.
const ARC_POINTS: usize = 8;

fn distance_to_segment(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a) * d.conj()).re / len2;
    (p - (a + d * s.clamp(0.0, 1.0))).norm()
}

impl PathSpec {
    pub fn new(waypoints: Vec<C64>) -> Self {
        Self { waypoints }
    }

    pub fn start(&self) -> C64 {
        self.waypoints[0]
    }

    pub fn end(&self) -> C64 {
        *self.waypoints.last().expect("path has waypoints")
    }

    /// Smallest distance from the path to a pole, ignoring a pole that is
    /// itself a path endpoint on the segment touching it.
    pub fn clearance(&self, sys: &FuchsianSystem<C64>) -> f64 {
        let w = &self.waypoints;
        let last = w.len().saturating_sub(2);
        let mut best = f64::INFINITY;
        for (s, pair) in w.windows(2).enumerate() {
            for p in sys.poles() {
                let touches = (s == 0 && *p == pair[0]) || (s == last && *p == pair[1]);
                if touches {
                    // Only the endpoint may touch: measure from the far half.
                    let mid = (pair[0] + pair[1]) * 0.5;
                    let far = if *p == pair[0] { (mid, pair[1]) } else { (pair[0], mid) };
                    best = best.min(distance_to_segment(*p, far.0, far.1));
                } else {
                    best = best.min(distance_to_segment(*p, pair[0], pair[1]));
                }
            }
        }
        best
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|p| (p[1] - p[0]).norm()).sum()
    }

    /// Checks endpoints and that the path stays away from every pole.
    pub fn validate(&self, sys: &FuchsianSystem<C64>, from: C64, to: C64) -> Result<()> {
        if self.waypoints.len() < 2 || self.start() != from || self.end() != to {
            return Err(Error::Invalid(format!("path must run from {from} to {to}")));
        }
        if self.waypoints.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::Invalid("path has repeated consecutive waypoints".into()));
        }
        let clearance = self.clearance(sys);
        if clearance <= 1e-9 * (1.0 + self.length()) {
            return Err(Error::Invalid(format!("path passes through a pole (clearance {clearance:e})")));
        }
        Ok(())
    }
}

/// Straight path from `from` to `to`, bulging along a circular arc of radius
/// `bulge · (min pole gap)` around every pole it would otherwise pass closer
/// than that radius to. Arcs are taken on the left of the direction of travel.
pub fn default_path(sys: &FuchsianSystem<C64>, from: C64, to: C64, bulge: f64) -> PathSpec {
    let r = bulge * sys.min_pole_gap();
    let d = to - from;
    let len = d.norm();
    let dir = d / len;
    let mut hits: Vec<(f64, C64)> = sys
        .poles()
        .iter()
        .filter(|&&p| p != from && p != to)
        .filter_map(|&p| {
            let s = ((p - from) * dir.conj()).re;
            let off = distance_to_segment(p, from, to);
            (s > 0.0 && s < len && off < r).then_some((s, p))
        })
        .collect();
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut waypoints = vec![from];
    let alpha = dir.arg();
    for (_, p) in hits {
        for m in 0..=ARC_POINTS {
            let phi = alpha + PI - PI * m as f64 / ARC_POINTS as f64;
            waypoints.push(p + C64::from_polar(r, phi));
        }
    }
    waypoints.push(to);
    PathSpec { waypoints }
}
