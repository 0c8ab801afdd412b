//! System documents: parsing, validation and conversion to core types.
//!
//! All numbers are read exactly as rationals from their textual form and
//! only then converted to the working scalar type.

use std::collections::BTreeMap;
use std::path::Path;

use fuchsnorm_core::linearize::Mode;
use fuchsnorm_core::scalar::parse_rational;
use fuchsnorm_core::{CRational, FuchsianSystem, Matrix, MultiIndex, NonlinearSystem, Scalar, VecPoly};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub type Table = BTreeMap<MultiIndex, VecPoly<CRational>>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DocOptions {
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub mode: Option<Mode>,
    pub eps_scale: Option<f64>,
    pub bulge: Option<f64>,
    /// Waypoints of the integration path from `p_0` to `p_j`, keyed by `j`.
    pub paths: BTreeMap<usize, Vec<CRational>>,
}

/// A parsed system document.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub d: usize,
    pub s: usize,
    pub poles: Vec<CRational>,
    pub matrices: Vec<Matrix<CRational>>,
    pub nonlinearity: Table,
    pub rhs: Option<VecPoly<CRational>>,
    pub options: DocOptions,
}

pub fn parse_mode(text: &str) -> Option<Mode> {
    match text {
        "obstruction" => Some(Mode::Obstruction),
        "normal-form" => Some(Mode::NormalForm),
        _ => None,
    }
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Obstruction => "obstruction",
        Mode::NormalForm => "normal-form",
    }
}

/// Reads a JSON or (by `.toml` extension) TOML file into a JSON value.
pub fn read_value(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| CliError::schema("/", format!("invalid TOML: {e}")))
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::schema("/", format!("invalid JSON: {e}")))
    }
}

fn field<'a>(obj: &'a Value, ptr: &str, key: &str) -> CliResult<&'a Value> {
    let at = if ptr.is_empty() { "/" } else { ptr };
    obj.get(key).ok_or_else(|| CliError::schema(at, format!("missing field `{key}`")))
}

fn array<'a>(v: &'a Value, ptr: &str) -> CliResult<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| CliError::schema(ptr, "expected an array"))
}

fn natural(v: &Value, ptr: &str) -> CliResult<usize> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| CliError::schema(ptr, "expected a natural number"))
}

fn positive_f64(v: &Value, ptr: &str) -> CliResult<f64> {
    match v.as_f64() {
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(CliError::schema(ptr, "expected a positive number")),
    }
}

fn real(v: &Value, ptr: &str) -> CliResult<BigRational> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(CliError::schema(ptr, "expected a number or a rational string")),
    };
    parse_rational(&text).ok_or_else(|| CliError::schema(ptr, format!("cannot read `{text}` as a rational")))
}

/// A complex number: a real literal or an `[re, im]` pair.
pub fn complex(v: &Value, ptr: &str) -> CliResult<CRational> {
    match v {
        Value::Array(pair) if pair.len() == 2 => {
            Ok(Complex::new(real(&pair[0], &format!("{ptr}/0"))?, real(&pair[1], &format!("{ptr}/1"))?))
        }
        Value::Array(_) => Err(CliError::schema(ptr, "complex values are [re, im] pairs")),
        _ => Ok(Complex::new(real(v, ptr)?, BigRational::zero())),
    }
}

/// `coeffs[k][i]`: component `i` of the `x^k` coefficient.
pub fn vec_poly(v: &Value, d: usize, ptr: &str) -> CliResult<VecPoly<CRational>> {
    let powers = array(v, ptr)?;
    let mut coeffs = Vec::with_capacity(powers.len());
    for (k, row) in powers.iter().enumerate() {
        let p = format!("{ptr}/{k}");
        let entries = array(row, &p)?;
        if entries.len() != d {
            return Err(CliError::schema(&p, format!("expected {d} components, got {}", entries.len())));
        }
        coeffs.push(entries.iter().enumerate().map(|(i, e)| complex(e, &format!("{p}/{i}"))).collect::<CliResult<_>>()?);
    }
    VecPoly::new(d, coeffs).map_err(|e| CliError::schema(ptr, e.to_string()))
}

fn matrix(v: &Value, d: usize, ptr: &str) -> CliResult<Matrix<CRational>> {
    let rows = array(v, ptr)?;
    if rows.len() != d {
        return Err(CliError::schema(ptr, format!("expected {d} rows, got {}", rows.len())));
    }
    let mut out = Vec::with_capacity(d);
    for (r, row) in rows.iter().enumerate() {
        let p = format!("{ptr}/{r}");
        let entries = array(row, &p)?;
        if entries.len() != d {
            return Err(CliError::schema(&p, format!("expected {d} columns, got {}", entries.len())));
        }
        out.push(entries.iter().enumerate().map(|(c, e)| complex(e, &format!("{p}/{c}"))).collect::<CliResult<_>>()?);
    }
    Matrix::from_rows(out).map_err(|e| CliError::schema(ptr, e.to_string()))
}

/// A series table: a list of `{multiindex, coeff}` entries with `|m| ≥ 2`.
pub fn table(v: &Value, d: usize, ptr: &str) -> CliResult<Table> {
    let mut out = Table::new();
    for (t, entry) in array(v, ptr)?.iter().enumerate() {
        let p = format!("{ptr}/{t}");
        let mp = format!("{p}/multiindex");
        let exps = array(field(entry, &p, "multiindex")?, &mp)?
            .iter()
            .enumerate()
            .map(|(i, e)| natural(e, &format!("{mp}/{i}")).map(|n| n as u32))
            .collect::<CliResult<Vec<u32>>>()?;
        if exps.len() != d {
            return Err(CliError::schema(&mp, format!("expected {d} exponents, got {}", exps.len())));
        }
        let m = MultiIndex::new(exps);
        if m.order() < 2 {
            return Err(CliError::schema(&mp, "total degree must be at least 2"));
        }
        let coeff = vec_poly(field(entry, &p, "coeff")?, d, &format!("{p}/coeff"))?;
        if out.contains_key(&m) {
            return Err(CliError::schema(&mp, format!("duplicate multi-index {m}")));
        }
        out.insert(m, coeff);
    }
    Ok(out)
}

fn options(v: Option<&Value>) -> CliResult<DocOptions> {
    let mut opts = DocOptions::default();
    let Some(v) = v else { return Ok(opts) };
    if !v.is_object() {
        return Err(CliError::schema("/options", "expected an object"));
    }
    if let Some(x) = v.get("order") {
        opts.order = Some(natural(x, "/options/order")?);
    }
    if let Some(x) = v.get("tol") {
        opts.tol = Some(positive_f64(x, "/options/tol")?);
    }
    if let Some(x) = v.get("eps_scale") {
        opts.eps_scale = Some(positive_f64(x, "/options/eps_scale")?);
    }
    if let Some(x) = v.get("bulge") {
        opts.bulge = Some(positive_f64(x, "/options/bulge")?);
    }
    if let Some(x) = v.get("mode") {
        let mode = x.as_str().and_then(parse_mode);
        opts.mode = Some(mode.ok_or_else(|| CliError::schema("/options/mode", "expected \"obstruction\" or \"normal-form\""))?);
    }
    if let Some(x) = v.get("paths") {
        let obj = x.as_object().ok_or_else(|| CliError::schema("/options/paths", "expected an object keyed by pole index"))?;
        for (key, pts) in obj {
            let p = format!("/options/paths/{key}");
            let j: usize = key.parse().map_err(|_| CliError::schema(&p, "keys are pole indices"))?;
            let waypoints = array(pts, &p)?
                .iter()
                .enumerate()
                .map(|(i, w)| complex(w, &format!("{p}/{i}")))
                .collect::<CliResult<Vec<_>>>()?;
            opts.paths.insert(j, waypoints);
        }
    }
    Ok(opts)
}

impl Document {
    pub fn from_value(v: &Value) -> CliResult<Self> {
        if !v.is_object() {
            return Err(CliError::schema("/", "expected an object"));
        }
        let d = natural(field(v, "", "d")?, "/d")?;
        if d == 0 {
            return Err(CliError::schema("/d", "dimension must be positive"));
        }
        let s = natural(field(v, "", "S")?, "/S")?;
        let poles = array(field(v, "", "poles")?, "/poles")?
            .iter()
            .enumerate()
            .map(|(j, p)| complex(p, &format!("/poles/{j}")))
            .collect::<CliResult<Vec<_>>>()?;
        if poles.len() != s + 2 {
            return Err(CliError::schema("/poles", format!("S = {s} needs {} poles, got {}", s + 2, poles.len())));
        }
        let matrices = array(field(v, "", "matrices")?, "/matrices")?
            .iter()
            .enumerate()
            .map(|(j, m)| matrix(m, d, &format!("/matrices/{j}")))
            .collect::<CliResult<Vec<_>>>()?;
        if matrices.len() != s + 2 {
            return Err(CliError::schema("/matrices", format!("S = {s} needs {} matrices, got {}", s + 2, matrices.len())));
        }
        let nonlinearity = match v.get("nonlinearity") {
            Some(t) => table(t, d, "/nonlinearity")?,
            None => Table::new(),
        };
        let rhs = v.get("rhs").map(|r| vec_poly(r, d, "/rhs")).transpose()?;
        let options = options(v.get("options"))?;
        for &j in options.paths.keys() {
            if j == 0 || j >= poles.len() {
                return Err(CliError::schema(format!("/options/paths/{j}"), "paths run from p_0 to p_j with 1 ≤ j ≤ S+1"));
            }
        }
        let doc = Self { d, s, poles, matrices, nonlinearity, rhs, options };
        doc.system::<CRational>()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_value(&read_value(path)?)
    }

    pub fn system<T: Scalar>(&self) -> CliResult<FuchsianSystem<T>> {
        let poles = self.poles.iter().map(convert).collect();
        let residues = self.matrices.iter().map(|m| m.map(convert)).collect();
        FuchsianSystem::new(poles, residues, 0.0).map_err(|e| CliError::schema("/poles", e.to_string()))
    }

    pub fn nonlinear<T: Scalar>(&self) -> CliResult<NonlinearSystem<T>> {
        NonlinearSystem::new(self.system()?, convert_table(&self.nonlinearity))
            .map_err(|e| CliError::schema("/nonlinearity", e.to_string()))
    }

    pub fn rhs<T: Scalar>(&self) -> CliResult<VecPoly<T>> {
        self.rhs.as_ref().map(|g| g.map(convert)).ok_or_else(|| CliError::schema("/rhs", "this command needs a right-hand side"))
    }
}

pub fn convert<T: Scalar>(c: &CRational) -> T {
    T::from_rationals(&c.re, &c.im)
}

pub fn convert_table<T: Scalar>(t: &Table) -> BTreeMap<MultiIndex, VecPoly<T>> {
    t.iter().map(|(m, p)| (m.clone(), p.map(convert))).collect()
}
