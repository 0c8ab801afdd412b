//! Command implementations. Each returns a JSON report and, separately, the
//! failure that decides the exit code, so that failing checks still print
//! their diagnostics.

use std::path::PathBuf;
use std::sync::Arc;

use fuchsnorm_core::analytic::PathSpec;
use fuchsnorm_core::correction::residual;
use fuchsnorm_core::fuchsian::{check_linear_assumption, check_nonlinear_assumption};
use fuchsnorm_core::linearize::{normalize, Mode};
use fuchsnorm_core::rhs::SeriesProvider;
use fuchsnorm_core::{
    solve_analytic, solve_polynomial, verify_conjugacy, AnalyticOptions, ConjugacyReport, LinearizeOptions,
    RodriguesFamily, SeriesTable, C64, RESONANCE_TOL,
};
use serde_json::{json, Value};

use crate::document::{convert, convert_table, mode_name, read_value, table, Document};
use crate::error::{CliError, CliResult};
use crate::output::{self, float, JsonScalar};
use fuchsnorm_core::CRational;

pub const DEFAULT_ORDER: usize = 6;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_POLYS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Check,
    Polys { n: Option<usize> },
    Correct { analytic: bool },
    Linearize,
    NormalForm,
    Verify { tables: Option<PathBuf> },
}

/// Flag and environment settings; document options fill the gaps.
#[derive(Clone, Debug)]
pub struct Settings {
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub default_tol: f64,
    pub resonance_tol: f64,
    pub mode: Option<Mode>,
    pub exact: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self { order: None, tol: None, default_tol: DEFAULT_TOL, resonance_tol: RESONANCE_TOL, mode: None, exact: false }
    }
}

impl Settings {
    fn order(&self, doc: &Document) -> usize {
        self.order.or(doc.options.order).unwrap_or(DEFAULT_ORDER)
    }

    fn tol(&self, doc: &Document) -> f64 {
        self.tol.or(doc.options.tol).unwrap_or(self.default_tol)
    }

    fn mode(&self, doc: &Document) -> Mode {
        self.mode.or(doc.options.mode).unwrap_or(Mode::Obstruction)
    }

    fn linearize_options(&self, doc: &Document) -> LinearizeOptions {
        LinearizeOptions { tol: self.tol(doc), resonance_tol: self.resonance_tol, ..LinearizeOptions::default() }
    }
}

/// A report plus the failure, if any, that sets a nonzero exit code.
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Self { report, failure: None }
    }

    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, CliError::exit_code)
    }
}

pub fn run(command: &Command, doc: &Document, settings: &Settings) -> CliResult<Outcome> {
    if settings.exact {
        run_in::<CRational>(command, doc, settings)
    } else {
        run_in::<C64>(command, doc, settings)
    }
}

fn run_in<T: JsonScalar>(command: &Command, doc: &Document, st: &Settings) -> CliResult<Outcome> {
    match command {
        Command::Check => check::<T>(doc, st),
        Command::Polys { n } => polys::<T>(doc, st, n.unwrap_or(DEFAULT_POLYS)),
        Command::Correct { analytic: true } => {
            if st.exact {
                return Err(CliError::Usage("the analytic route runs in floating point; drop --exact".into()));
            }
            correct_analytic(doc, st)
        }
        Command::Correct { analytic: false } => correct::<T>(doc, st),
        Command::Linearize => pipeline::<T>(doc, st, Mode::Obstruction),
        Command::NormalForm => pipeline::<T>(doc, st, Mode::NormalForm),
        Command::Verify { tables } => verify::<T>(doc, st, tables.as_ref()),
    }
}

fn assumption_report<T: JsonScalar>(doc: &Document, st: &Settings) -> CliResult<(Value, bool)> {
    let nsys = doc.nonlinear::<T>()?;
    let lin = check_linear_assumption(nsys.linear(), 0, st.resonance_tol)?;
    let non = check_nonlinear_assumption(&nsys, st.order(doc), st.resonance_tol)?;
    let report = json!({
        "passed": lin.passed && non.passed,
        "linear": {
            "passed": lin.passed,
            "k_bound": lin.k_bound,
            "violations": lin.violations.iter().map(|v| json!({
                "residue": v.residue.to_string(),
                "k": v.k,
                "eigenvalue": output::c64(v.eigenvalue),
            })).collect::<Vec<_>>(),
        },
        "nonlinear": {
            "passed": non.passed,
            "order_max": non.order_max,
            "violations": non.violations.iter().map(|v| json!({
                "residue": v.residue.to_string(),
                "k": v.k,
                "multiindex": v.m.exponents(),
                "i": v.i,
                "value": output::c64(v.value),
            })).collect::<Vec<_>>(),
        },
    });
    Ok((report, lin.passed && non.passed))
}

fn check<T: JsonScalar>(doc: &Document, st: &Settings) -> CliResult<Outcome> {
    let (report, passed) = assumption_report::<T>(doc, st)?;
    let failure = (!passed).then(|| CliError::Assumption("nonresonance conditions fail; see report".into()));
    Ok(Outcome { report, failure })
}

fn polys<T: JsonScalar>(doc: &Document, st: &Settings, n: usize) -> CliResult<Outcome> {
    let mut family = RodriguesFamily::new(doc.system::<T>()?);
    let tol = st.tol(doc);
    let mut items = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let p = output::mat_poly(family.p_n(k));
        let lead = family.leading_coeff(k, tol);
        items.push(json!({ "n": k, "coeffs": p, "leading": output::matrix(&lead.matrix), "invertible": lead.invertible }));
    }
    Ok(Outcome::ok(json!({ "exact": st.exact, "polys": items })))
}

fn linear_gate<T: JsonScalar>(doc: &Document, st: &Settings) -> CliResult<()> {
    let report = check_linear_assumption(&doc.system::<T>()?, 0, st.resonance_tol)?;
    if report.passed {
        return Ok(());
    }
    let v = &report.violations[0];
    Err(CliError::Assumption(format!("k + B_{} is singular for k = {} (eigenvalue {})", v.residue, v.k, v.eigenvalue)))
}

fn correct<T: JsonScalar>(doc: &Document, st: &Settings) -> CliResult<Outcome> {
    linear_gate::<T>(doc, st)?;
    let sys = doc.system::<T>()?;
    let g = doc.rhs::<T>()?;
    let solved = solve_polynomial(&sys, &g, st.tol(doc))?;
    let r = residual(&sys, &g, &solved.phi, &solved.y);
    Ok(Outcome::ok(json!({
        "route": "polynomial",
        "exact": st.exact,
        "phi": output::vec_poly(&solved.phi),
        "y": output::vec_poly(&solved.y),
        "residual": float(r.max_abs()),
    })))
}

fn analytic_options(doc: &Document, st: &Settings, sys: &fuchsnorm_core::FuchsianSystem<C64>) -> AnalyticOptions {
    let mut opts = AnalyticOptions::with_tol(st.tol.or(doc.options.tol).unwrap_or(AnalyticOptions::default().tol));
    if let Some(e) = doc.options.eps_scale {
        opts.eps_scale = e;
    }
    if let Some(b) = doc.options.bulge {
        opts.bulge = b;
    }
    for (&j, inner) in &doc.options.paths {
        let mut waypoints = vec![sys.poles()[0]];
        waypoints.extend(inner.iter().map(convert::<C64>));
        waypoints.push(sys.poles()[j]);
        opts.paths.insert(j, PathSpec::new(waypoints));
    }
    opts
}

fn correct_analytic(doc: &Document, st: &Settings) -> CliResult<Outcome> {
    linear_gate::<C64>(doc, st)?;
    let sys = doc.system::<C64>()?;
    let g: Arc<dyn SeriesProvider<C64>> = Arc::new(doc.rhs::<C64>()?);
    let opts = analytic_options(doc, st, &sys);
    let result = solve_analytic(&sys, g, &opts)?;
    let cert = &result.certificate;
    let report = json!({
        "route": "analytic",
        "phi": output::vec_poly(&result.phi),
        "shifts": result.shifts,
        "moments": result.moments.iter().map(|m| json!({ "target": m.target, "error": float(m.error) })).collect::<Vec<_>>(),
        "certificate": {
            "passed": cert.passed,
            "threshold": float(cert.threshold),
            "poles": cert.poles.iter().map(|p| json!({
                "pole": p.pole,
                "point": output::c64(p.point),
                "mismatch": float(p.mismatch),
            })).collect::<Vec<_>>(),
        },
    });
    let failure = (!cert.passed).then(|| CliError::Verification("continuation and local solutions disagree".into()));
    Ok(Outcome { report, failure })
}

fn conjugacy_json(report: &ConjugacyReport) -> Value {
    json!({
        "passed": report.passed,
        "max_residual": float(report.max_residual),
        "threshold": float(report.threshold),
        "orders": report.orders.iter().map(|o| json!({ "n": o.n, "residual": float(o.residual) })).collect::<Vec<_>>(),
    })
}

fn verification_failure(report: &ConjugacyReport) -> Option<CliError> {
    (!report.passed).then(|| {
        CliError::Verification(format!("conjugacy residual {:e} exceeds {:e}", report.max_residual, report.threshold))
    })
}

fn pipeline<T: JsonScalar>(doc: &Document, st: &Settings, mode: Mode) -> CliResult<Outcome> {
    let nsys = doc.nonlinear::<T>()?;
    let order = st.order(doc);
    let result = normalize(&nsys, order, mode, &st.linearize_options(doc))?;
    let check = verify_conjugacy(&nsys, &result.correction, &result.h, order, mode)?;
    let report = json!({
        "mode": mode_name(mode),
        "order": order,
        "exact": st.exact,
        "correction": output::table(&result.correction.terms),
        "h": output::table(&result.h.terms),
        "blocks": result.blocks.iter().map(|b| json!({
            "n": b.n,
            "size": b.size,
            "spectrum_mismatch": float(b.spectrum_mismatch),
        })).collect::<Vec<_>>(),
        "verify": conjugacy_json(&check),
    });
    Ok(Outcome { report, failure: verification_failure(&check) })
}

fn verify<T: JsonScalar>(doc: &Document, st: &Settings, tables: Option<&PathBuf>) -> CliResult<Outcome> {
    let nsys = doc.nonlinear::<T>()?;
    let order = st.order(doc);
    let (mode, correction, h) = match tables {
        Some(path) => {
            let v = read_value(path)?;
            let stored = v.get("mode").and_then(Value::as_str).and_then(crate::document::parse_mode);
            let mode = st.mode.or(stored).or(doc.options.mode).unwrap_or(Mode::Obstruction);
            let read = |key: &str| -> CliResult<SeriesTable<T>> {
                let t = v.get(key).ok_or_else(|| CliError::schema("/", format!("tables file lacks `{key}`")))?;
                let terms = convert_table(&table(t, doc.d, &format!("/{key}"))?);
                Ok(SeriesTable { d: doc.d, order, terms })
            };
            (mode, read("correction")?, read("h")?)
        }
        None => {
            let mode = st.mode(doc);
            let result = normalize(&nsys, order, mode, &st.linearize_options(doc))?;
            (mode, result.correction, result.h)
        }
    };
    let check = verify_conjugacy(&nsys, &correction, &h, order, mode)?;
    let report = json!({ "mode": mode_name(mode), "order": order, "verify": conjugacy_json(&check) });
    Ok(Outcome { report, failure: verification_failure(&check) })
}
