//! Corrections for analytic right-hand sides.
//!
//! With `W' = W B` and every residue spectrum in the right half plane, the
//! solution `y = W⁻¹ ∫_{p_0}^x W (g - φ)/Q` is analytic at `p_0`, and it is
//! analytic at `p_j` exactly when `Σ_i M_{ji} φ_i = ξ_j` with the moments
//! `M_{ji} = ∫_{p_0}^{p_j} x^i Q⁻¹ W` and `ξ_j = ∫_{p_0}^{p_j} Q⁻¹ W g`.
//! Systems with other spectra are first moved up the shift ladder.
//!
//! `W` is normalized by `W = (x - p_0)^{B_0} Φ_0(x)`, `Φ_0(p_0) = I`, with
//! `arg(x - p_0)` anchored to the departure direction of each path. Moments
//! therefore differ from those of any other normalization `C·W` by the
//! constant left factor `C`; `φ` does not depend on it.

mod frobenius;
mod ladder;
mod march;
mod path;
mod series;
mod solution;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use frobenius::{check_linear_nonresonance, frobenius_local, FundamentalSolution};
pub use ladder::{shift_up_analytic, ShiftedRhs};
pub use march::continue_w;
pub use path::{default_path, PathSpec};
pub use solution::{AnalyticSolution, Certificate, CorrectedRhs, PoleCertificate};

use march::{endpoint, march, Columns};

use crate::correction::{pull_back_correction, shift_count};
use crate::error::{Error, Result};
use crate::fuchsian::{check_linear_assumption, FuchsianSystem, RESONANCE_TOL};
use crate::matrix::{mat_eigenvalues, solve_linear, CMatrix, Matrix};
use crate::poly::VecPoly;
use crate::rhs::SeriesProvider;
use crate::scalar::C64;

/// Knobs of the analytic route.
#[derive(Clone, Debug)]
pub struct AnalyticOptions {
    pub tol: f64,
    /// Endpoint series are integrated out to `eps_scale` times the distance
    /// to the nearest other pole.
    pub eps_scale: f64,
    /// Detour radius around intervening poles, relative to the min pole gap.
    pub bulge: f64,
    /// Paths from `p_0` to `p_j`, keyed by `j`; defaults elsewhere.
    pub paths: BTreeMap<usize, PathSpec>,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        Self { tol: 1e-10, eps_scale: 0.2, bulge: 0.1, paths: BTreeMap::new() }
    }
}

impl AnalyticOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn path(&self, sys: &FuchsianSystem<C64>, j: usize) -> PathSpec {
        self.paths
            .get(&j)
            .cloned()
            .unwrap_or_else(|| default_path(sys, sys.poles()[0], sys.poles()[j], self.bulge))
    }
}

/// Moments `M_{j,0..S}` (and `ξ_j` when a right-hand side was given).
#[derive(Clone, Debug)]
pub struct MomentData {
    pub target: usize,
    pub moments: Vec<CMatrix>,
    pub rhs: Option<Vec<C64>>,
    /// Sum of the truncation estimates of all series pieces.
    pub error: f64,
}

fn require_positive_spectrum(sys: &FuchsianSystem<C64>, j: usize, tol: f64) -> Result<()> {
    for l in mat_eigenvalues(&sys.residues()[j], tol)? {
        if l.re <= RESONANCE_TOL {
            return Err(Error::Assumption(format!(
                "eigenvalue {l} of B_{j} needs a positive real part for the moment integrals"
            )));
        }
    }
    Ok(())
}

fn moment_data(
    sys: &FuchsianSystem<C64>,
    j: usize,
    g: Option<Arc<dyn SeriesProvider<C64>>>,
    opts: &AnalyticOptions,
) -> Result<MomentData> {
    if j == 0 || j >= sys.poles().len() {
        return Err(Error::Invalid(format!("moment target must be a pole index in 1..={}", sys.s() + 1)));
    }
    require_positive_spectrum(sys, 0, opts.tol)?;
    require_positive_spectrum(sys, j, opts.tol)?;
    let n = sys.dim();
    let cols = Columns { powers: sys.s() + 1, dim: n, rhs: g };
    let path = opts.path(sys, j);
    let (p0, pj) = (sys.poles()[0], sys.poles()[j]);
    path.validate(sys, p0, pj)?;
    let w = &path.waypoints;

    let out = w[1] - p0;
    let r0 = march::nearest_pole_distance_excluding(sys, 0);
    let a_off = out * ((opts.eps_scale * r0).min(0.5 * out.norm()) / out.norm());
    let start = endpoint(sys, 0, a_off, out.arg(), &cols, opts.tol)?;

    let back = w[w.len() - 2] - pj;
    let rj = march::nearest_pole_distance_excluding(sys, j);
    let b_off = back * ((opts.eps_scale * rj).min(0.5 * back.norm()) / back.norm());
    let finish = endpoint(sys, j, b_off, back.arg(), &cols, opts.tol)?;

    let mut points = vec![p0 + a_off];
    points.extend_from_slice(&w[1..w.len() - 1]);
    points.push(pj + b_off);
    let interior = march(sys, &points, start.w.clone(), Some(&cols), opts.tol)?;
    let transfer = finish.w.inverse(1e-14).map(|inv| interior.w.mul(&inv))?;
    let total = start
        .piece
        .add(interior.integral.as_ref().expect("columns requested"))
        .sub(&transfer.mul(&finish.piece));

    let moments = (0..=sys.s())
        .map(|i| {
            let mut m = Matrix::zeros(n, n);
            for r in 0..n {
                for c in 0..n {
                    m[(r, c)] = total[(r, i * n + c)];
                }
            }
            m
        })
        .collect();
    let rhs = cols.rhs.as_ref().map(|_| total.column(cols.width() - 1));
    Ok(MomentData { target: j, moments, rhs, error: start.error + interior.error + finish.error })
}

/// `M_{j,i} = ∫_{p_0}^{p_j} x^i Q⁻¹ W dx` for `i = 0..=S`.
pub fn moments(sys: &FuchsianSystem<C64>, j: usize, opts: &AnalyticOptions) -> Result<MomentData> {
    moment_data(sys, j, None, opts)
}

/// `ξ_j = ∫_{p_0}^{p_j} Q⁻¹ W g dx`.
pub fn rhs_moment(
    sys: &FuchsianSystem<C64>,
    j: usize,
    g: Arc<dyn SeriesProvider<C64>>,
    opts: &AnalyticOptions,
) -> Result<Vec<C64>> {
    Ok(moment_data(sys, j, Some(g), opts)?.rhs.expect("rhs requested"))
}

/// Solves the block moment system for `φ` on a system whose residue spectra
/// all lie in the right half plane.
pub fn solve_moments(
    sys: &FuchsianSystem<C64>,
    g: Arc<dyn SeriesProvider<C64>>,
    opts: &AnalyticOptions,
) -> Result<(VecPoly<C64>, Vec<MomentData>)> {
    let n = sys.dim();
    let s = sys.s();
    let size = n * (s + 1);
    let data: Vec<MomentData> =
        (1..=s + 1).map(|j| moment_data(sys, j, Some(g.clone()), opts)).collect::<Result<_>>()?;
    let mut a = Matrix::zeros(size, size);
    let mut b = Vec::with_capacity(size);
    for (row, d) in data.iter().enumerate() {
        for (i, m) in d.moments.iter().enumerate() {
            a.set_block(row * n, i * n, m);
        }
        b.extend(d.rhs.clone().expect("rhs requested"));
    }
    let x = solve_linear(&a, &b, 1e-13).map_err(|_| Error::Singular("moment system".into()))?;
    let phi = VecPoly::new(n, x.chunks(n).map(<[C64]>::to_vec).collect())?;
    Ok((phi, data))
}

/// `φ`, the solution handle, and the a-posteriori analyticity certificate.
pub struct AnalyticCorrection {
    pub phi: VecPoly<C64>,
    pub solution: AnalyticSolution,
    pub certificate: Certificate,
    /// Moments of the top rung of the ladder.
    pub moments: Vec<MomentData>,
    pub shifts: usize,
}

/// Correction for an analytic right-hand side: climbs the shift ladder until
/// every residue spectrum has positive real part, solves the moment system
/// there, and transports `φ` back down.
pub fn solve_analytic(
    sys: &FuchsianSystem<C64>,
    g: Arc<dyn SeriesProvider<C64>>,
    opts: &AnalyticOptions,
) -> Result<AnalyticCorrection> {
    if g.dim() != sys.dim() {
        return Err(Error::Shape(format!("right-hand side of dimension {}, system of size {}", g.dim(), sys.dim())));
    }
    let report = check_linear_assumption(sys, 0, RESONANCE_TOL)?;
    if !report.passed {
        return Err(Error::Assumption(format!("{} resonant residue factor(s)", report.violations.len())));
    }
    for j in 0..sys.poles().len() {
        check_linear_nonresonance(sys, j, opts.tol)?;
    }
    let shifts = shift_count(sys, RESONANCE_TOL)?;
    let mut levels = vec![sys.clone()];
    let mut rhs = g.clone();
    for _ in 0..shifts {
        let (step, next) = shift_up_analytic(levels.last().expect("nonempty"), rhs, opts.tol)?;
        levels.push(step.system);
        rhs = next;
    }
    let top = levels.last().expect("nonempty");
    let (mut phi, moments) = solve_moments(top, rhs, opts)?;
    for level in levels[..shifts].iter().rev() {
        phi = pull_back_correction(level, &phi, 1e-14)?.0;
    }
    let solution = AnalyticSolution::new(sys.clone(), g, phi.clone(), opts.tol, opts.bulge)?;
    let paths: Vec<(usize, PathSpec)> = (1..sys.poles().len()).map(|j| (j, opts.path(sys, j))).collect();
    let certificate = solution.certify(&paths, opts.eps_scale)?;
    Ok(AnalyticCorrection { phi, solution, certificate, moments, shifts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::solve_polynomial;
    use crate::rhs::ExpPolyRhs;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar_system(b: [f64; 2]) -> FuchsianSystem<C64> {
        FuchsianSystem::new(
            vec![c(-1.0, 0.0), c(1.0, 0.0)],
            b.iter().map(|&v| Matrix::scalar(1, c(v, 0.0))).collect(),
            1e-12,
        )
        .unwrap()
    }

    fn spoly(coeffs: &[f64]) -> Arc<dyn SeriesProvider<C64>> {
        Arc::new(VecPoly::new(1, coeffs.iter().map(|&v| vec![c(v, 0.0)]).collect()).unwrap())
    }

    #[test]
    fn scalar_moment_examples() {
        let sys = scalar_system([1.0, 1.0]);
        let opts = AnalyticOptions::with_tol(1e-12);
        // W = (x+1)(x-1)/(-2) here; the product normalization (x+1)(x-1) is -2 times it.
        let m = moments(&sys, 1, &opts).unwrap();
        assert!((m.moments[0][(0, 0)] * -2.0 - 2.0).norm() < 1e-10);
        let xi = rhs_moment(&sys, 1, spoly(&[0.0, 0.0, 1.0]), &opts).unwrap();
        assert!((xi[0] * -2.0 - 2.0 / 3.0).norm() < 1e-10);
        let xi = rhs_moment(&sys, 1, spoly(&[]), &opts).unwrap();
        assert_eq!(xi[0], c(0.0, 0.0));
    }

    #[test]
    fn quadratic_rhs_matches_algebraic_route() {
        let sys = scalar_system([1.0, 1.0]);
        let r = solve_analytic(&sys, spoly(&[0.0, 0.0, 1.0]), &AnalyticOptions::with_tol(1e-12)).unwrap();
        assert_eq!(r.shifts, 0);
        assert!((r.phi.coeff(0)[0] - 1.0 / 3.0).norm() < 1e-10);
        assert!(r.certificate.passed, "{:?}", r.certificate);
        let y = r.solution.eval(c(0.3, 0.8)).unwrap();
        assert!((y[0] - c(0.3, 0.8) / 3.0).norm() < 1e-9);
    }

    #[test]
    fn low_degree_rhs_is_its_own_correction() {
        let sys = FuchsianSystem::new(
            vec![c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
            vec![Matrix::scalar(1, c(0.5, 0.0)), Matrix::scalar(1, c(1.5, 0.2)), Matrix::scalar(1, c(0.8, 0.0))],
            1e-12,
        )
        .unwrap();
        let r = solve_analytic(&sys, spoly(&[0.3, -1.2]), &AnalyticOptions::with_tol(1e-12)).unwrap();
        assert!((r.phi.coeff(0)[0] - 0.3).norm() < 1e-9);
        assert!((r.phi.coeff(1)[0] + 1.2).norm() < 1e-9);
        assert!(r.certificate.passed);
    }

    #[test]
    fn ladder_example() {
        let sys = scalar_system([-0.25, -0.25]);
        let opts = AnalyticOptions::with_tol(1e-12);
        let r = solve_analytic(&sys, spoly(&[1.0]), &opts).unwrap();
        assert_eq!(r.shifts, 1);
        assert!((r.phi.coeff(0)[0] - 1.0).norm() < 1e-10);
        assert!(r.solution.eval(c(0.1, 0.7)).unwrap()[0].norm() < 1e-10);
        assert!(r.certificate.passed);
    }

    #[test]
    fn exponential_rhs_against_polynomial_truncation() {
        let b0 = Matrix::from_rows(vec![vec![c(0.5, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.3, 0.0)]]).unwrap();
        let b1 = Matrix::from_rows(vec![vec![c(2.0, 0.0), c(0.0, 0.0)], vec![c(-1.0, 0.3), c(1.4, 0.0)]]).unwrap();
        let sys = FuchsianSystem::new(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![b0, b1], 1e-12).unwrap();
        let poly = VecPoly::new(2, vec![vec![c(1.0, 0.0), c(0.0, 1.0)]]).unwrap();
        let g = ExpPolyRhs { alpha: c(0.5, 0.0), poly: poly.clone() };
        let r = solve_analytic(&sys, Arc::new(g.clone()), &AnalyticOptions::with_tol(1e-12)).unwrap();
        assert!(r.certificate.passed, "{:?}", r.certificate);
        // Degree-30 Taylor truncation of exp(x/2) is exact to rounding on [-1, 1].
        let trunc = VecPoly::new(2, g.taylor(&c(0.0, 0.0), 30)).unwrap();
        let algebraic = solve_polynomial(&sys, &trunc, 1e-15).unwrap();
        assert!(r.phi.sub(&algebraic.phi).max_abs() < 1e-8);
    }

    #[test]
    fn path_choice_and_endpoint_radius_do_not_move_phi() {
        let sys = FuchsianSystem::new(
            vec![c(-1.0, 0.0), c(1.0, 0.0), c(0.2, 1.0)],
            vec![Matrix::scalar(1, c(0.6, 0.0)), Matrix::scalar(1, c(1.1, -0.3)), Matrix::scalar(1, c(0.9, 0.0))],
            1e-12,
        )
        .unwrap();
        let g = spoly(&[0.5, 0.0, -1.0, 2.0, 0.25]);
        let tol = 1e-11;
        let base = solve_analytic(&sys, g.clone(), &AnalyticOptions::with_tol(tol)).unwrap();
        let mut detour = AnalyticOptions::with_tol(tol);
        detour.paths.insert(1, PathSpec::new(vec![c(-1.0, 0.0), c(0.0, -0.6), c(1.0, 0.0)]));
        detour.paths.insert(2, PathSpec::new(vec![c(-1.0, 0.0), c(-0.5, 0.9), c(0.2, 1.0)]));
        let moved = solve_analytic(&sys, g.clone(), &detour).unwrap();
        assert!(base.phi.sub(&moved.phi).max_abs() <= 2.0 * tol);
        let mut shrunk = AnalyticOptions::with_tol(tol);
        shrunk.eps_scale = 0.1;
        let shrunk = solve_analytic(&sys, g, &shrunk).unwrap();
        assert!(base.phi.sub(&shrunk.phi).max_abs() <= 4.0 * tol);
    }

    #[test]
    fn nonpositive_spectrum_rejected_for_moments() {
        let sys = scalar_system([-0.25, 1.0]);
        assert!(matches!(moments(&sys, 1, &AnalyticOptions::default()), Err(Error::Assumption(_))));
    }
}
