//! Evaluation of the corrected solution `y` and its analyticity certificate.

use std::sync::Arc;

use super::march::nearest_pole_distance;
use super::path::{default_path, PathSpec};
use super::series::coefficient_series;
use crate::correction::{local_taylor, TaylorSolution};
use crate::error::{Error, Result};
use crate::fuchsian::FuchsianSystem;
use crate::matrix::vector;
use crate::poly::VecPoly;
use crate::rhs::{reciprocal_product_series, scalar_times_vector_series, SeriesProvider};
use crate::scalar::{Scalar, C64};

const LOCAL_ORDER: usize = 60;
/// Local series are trusted within this fraction of their radius.
const LOCAL_FRACTION: f64 = 0.5;
const MAX_STEP_ORDER: usize = 60;
const STEP_FRACTION: f64 = 0.4;

/// `g - φ`.
pub struct CorrectedRhs {
    pub g: Arc<dyn SeriesProvider<C64>>,
    pub phi: VecPoly<C64>,
}

impl SeriesProvider<C64> for CorrectedRhs {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn taylor(&self, center: &C64, order: usize) -> Vec<Vec<C64>> {
        let g = self.g.taylor(center, order);
        let phi = self.phi.taylor(center, order);
        g.iter().zip(&phi).map(|(a, b)| vector::sub(a, b)).collect()
    }

    fn as_polynomial(&self) -> Option<VecPoly<C64>> {
        self.g.as_polynomial().map(|g| g.sub(&self.phi))
    }
}

/// Mismatch between the continuation from `p_0` and the local analytic
/// solution at one pole.
#[derive(Clone, Debug)]
pub struct PoleCertificate {
    pub pole: usize,
    pub point: C64,
    pub continued: Vec<C64>,
    pub local: Vec<C64>,
    /// `max|continued - local| / (1 + max|local|)`.
    pub mismatch: f64,
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub poles: Vec<PoleCertificate>,
    pub threshold: f64,
    pub passed: bool,
}

/// The solution `y` of `y' + B y = (g - φ) / Q` analytic at every pole.
pub struct AnalyticSolution {
    system: FuchsianSystem<C64>,
    rhs: CorrectedRhs,
    locals: Vec<TaylorSolution<C64>>,
    radii: Vec<f64>,
    tol: f64,
    bulge: f64,
}

impl AnalyticSolution {
    pub fn new(
        system: FuchsianSystem<C64>,
        g: Arc<dyn SeriesProvider<C64>>,
        phi: VecPoly<C64>,
        tol: f64,
        bulge: f64,
    ) -> Result<Self> {
        let rhs = CorrectedRhs { g, phi };
        let mut locals = Vec::new();
        let mut radii = Vec::new();
        for (j, p) in system.poles().iter().enumerate() {
            locals.push(local_taylor(&system, j, &rhs, LOCAL_ORDER, 1e-14)?);
            let r = system
                .poles()
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, q)| (q - p).norm())
                .fold(f64::INFINITY, f64::min);
            radii.push(r);
        }
        Ok(Self { system, rhs, locals, radii, tol, bulge })
    }

    pub fn system(&self) -> &FuchsianSystem<C64> {
        &self.system
    }

    pub fn phi(&self) -> &VecPoly<C64> {
        &self.rhs.phi
    }

    pub fn local(&self, j: usize) -> &TaylorSolution<C64> {
        &self.locals[j]
    }

    /// `y(x)`: the local series near a pole, otherwise continuation from the
    /// local series at `p_0`.
    pub fn eval(&self, x: C64) -> Result<Vec<C64>> {
        for (j, p) in self.system.poles().iter().enumerate() {
            if (x - p).norm() <= LOCAL_FRACTION * self.radii[j] {
                return Ok(self.locals[j].eval(&x));
            }
        }
        let p0 = self.system.poles()[0];
        let path = default_path(&self.system, p0, x, self.bulge);
        let start = self.start_point(&path, 0.4);
        self.continue_from(start, &path.waypoints[1..])
    }

    fn start_point(&self, path: &PathSpec, fraction: f64) -> C64 {
        let p0 = path.start();
        let d = path.waypoints[1] - p0;
        p0 + d * ((fraction * self.radii[0]).min(0.5 * d.norm()) / d.norm())
    }

    fn continue_from(&self, start: C64, points: &[C64]) -> Result<Vec<C64>> {
        let mut pos = start;
        let mut y = self.locals[0].eval(&start);
        for &target in points {
            while pos != target {
                let remaining = target - pos;
                let rho = nearest_pole_distance(&self.system, pos);
                let mut len = (STEP_FRACTION * rho).min(remaining.norm());
                loop {
                    let full = len >= remaining.norm();
                    let h = if full { remaining } else { remaining * (len / remaining.norm()) };
                    if let Some(next) = self.taylor_step(pos, &y, h) {
                        y = next;
                        pos = if full { target } else { pos + h };
                        break;
                    }
                    len *= 0.5;
                    if len < 1e-12 * (1.0 + pos.norm()) {
                        return Err(Error::Numeric(format!("step size underflow near {pos}")));
                    }
                }
            }
        }
        Ok(y)
    }

    /// One step of `y' = -B y + (g - φ)/Q` by its Taylor series at `c`.
    fn taylor_step(&self, c: C64, y0: &[C64], h: C64) -> Option<Vec<C64>> {
        let eps = (self.tol * 1e-3).max(1e-16);
        let bser = coefficient_series(&self.system, c, None, MAX_STEP_ORDER);
        let qinv = reciprocal_product_series(&c, self.system.poles(), MAX_STEP_ORDER);
        let r = scalar_times_vector_series(&qinv, &self.rhs.taylor(&c, MAX_STEP_ORDER), MAX_STEP_ORDER);
        let mut ys = vec![y0.to_vec()];
        let mut sum = y0.to_vec();
        let mut hpow = C64::one();
        let mut scale = vector::max_abs(y0);
        let mut quiet = 0;
        for n in 0..MAX_STEP_ORDER {
            let mut next = r[n].clone();
            for l in 0..=n {
                next = vector::sub(&next, &bser[l].mul_vec(&ys[n - l]));
            }
            let next = vector::scale(&next, &C64::new(1.0 / (n as f64 + 1.0), 0.0));
            hpow *= h;
            let term = vector::scale(&next, &hpow);
            let t = vector::max_abs(&term);
            scale = scale.max(t);
            sum = vector::add(&sum, &term);
            ys.push(next);
            if n >= 6 && t <= eps * scale.max(f64::MIN_POSITIVE) {
                quiet += 1;
                if quiet == 2 {
                    return Some(sum);
                }
            } else {
                quiet = 0;
            }
        }
        None
    }

    /// Continues from `p_0` along each path and compares with the local
    /// analytic solution at its far pole, `eps_scale` of the way in.
    pub fn certify(&self, paths: &[(usize, PathSpec)], eps_scale: f64) -> Result<Certificate> {
        let threshold = 10.0 * self.tol;
        let mut poles = Vec::new();
        for (j, path) in paths {
            let w = &path.waypoints;
            let pj = path.end();
            let back = w[w.len() - 2] - pj;
            let point = pj + back * ((eps_scale * self.radii[*j]).min(0.5 * back.norm()) / back.norm());
            let start = self.start_point(path, eps_scale);
            let mut points: Vec<C64> = w[1..w.len() - 1].to_vec();
            points.push(point);
            let continued = self.continue_from(start, &points)?;
            let local = self.locals[*j].eval(&point);
            let diff = vector::max_abs(&vector::sub(&continued, &local));
            let mismatch = diff / (1.0 + vector::max_abs(&local));
            poles.push(PoleCertificate { pole: *j, point, continued, local, mismatch });
        }
        let passed = poles.iter().all(|p| p.mismatch <= threshold);
        Ok(Certificate { poles, threshold, passed })
    }
}
