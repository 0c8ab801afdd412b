//! JSON encoding of results. Complex values are `[re, im]` pairs; floats use
//! a fixed 17-significant-digit format and exact values are `"p/q"` strings,
//! so identical inputs give byte-identical output.

use std::collections::BTreeMap;

use fuchsnorm_core::scalar::format_rational;
use fuchsnorm_core::{CRational, MatPoly, Matrix, MultiIndex, Scalar, VecPoly, C64};
use serde_json::{json, Number, Value};

pub fn float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format!("{x:.16e}");
    Value::Number(text.parse::<Number>().expect("formatted float is a JSON number"))
}

pub fn c64(z: C64) -> Value {
    json!([float(z.re), float(z.im)])
}

/// Scalars that can be written to a report.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Value;
}

impl JsonScalar for C64 {
    fn to_json(&self) -> Value {
        c64(*self)
    }
}

impl JsonScalar for CRational {
    fn to_json(&self) -> Value {
        json!([format_rational(&self.re), format_rational(&self.im)])
    }
}

pub fn vector<T: JsonScalar>(v: &[T]) -> Value {
    Value::Array(v.iter().map(T::to_json).collect())
}

pub fn matrix<T: JsonScalar>(m: &Matrix<T>) -> Value {
    Value::Array((0..m.rows()).map(|r| vector(m.row(r))).collect())
}

/// Ascending `x`-power coefficients, each a vector.
pub fn vec_poly<T: JsonScalar>(p: &VecPoly<T>) -> Value {
    Value::Array(p.coeffs().iter().map(|c| vector(c)).collect())
}

/// Ascending `x`-power coefficients, each a matrix.
pub fn mat_poly<T: JsonScalar>(p: &MatPoly<T>) -> Value {
    Value::Array(p.coeffs().iter().map(matrix).collect())
}

/// The same `{multiindex, coeff}` list layout documents use.
pub fn table<T: JsonScalar>(t: &BTreeMap<MultiIndex, VecPoly<T>>) -> Value {
    Value::Array(
        t.iter()
            .map(|(m, p)| json!({ "multiindex": m.exponents(), "coeff": vec_poly(p) }))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_fixed_width_scientific_format() {
        assert_eq!(float(1.0 / 3.0).to_string(), "3.3333333333333331e-1");
        assert_eq!(float(-2.0).to_string(), "-2.0000000000000000e+0");
        assert_eq!(float(f64::NAN), Value::Null);
    }

    #[test]
    fn exact_values_are_fraction_strings() {
        let z = CRational::from_ratio(-3, 4);
        assert_eq!(z.to_json(), json!(["-3/4", "0"]));
    }
}
