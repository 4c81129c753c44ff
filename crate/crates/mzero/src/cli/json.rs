//! JSON encoding helpers with a fixed float format.
//!
//! Every float is written with 17 significant digits in scientific
//! notation (`{:.16e}`), non-finite values become `null`, and complex
//! numbers become `{"re": …, "im": …}`. Together with order-preserving
//! maps and arbitrary-precision numbers this makes the output byte-stable
//! under a parse/re-emit round trip.

use nalgebra::DMatrix;
use serde_json::{Map, Number, Value};

use crate::C64;

/// A float as a JSON number with 17 significant digits (`null` if not
/// finite).
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let s = format!("{x:.16e}");
    match s.parse::<Number>() {
        Ok(n) => Value::Number(n),
        Err(_) => Value::Null,
    }
}

/// An integer as a JSON number.
pub fn int(x: usize) -> Value {
    Value::Number(Number::from(x as u64))
}

/// A complex number as `{"re": …, "im": …}`.
pub fn complex(c: C64) -> Value {
    let mut m = Map::new();
    m.insert("re".into(), num(c.re));
    m.insert("im".into(), num(c.im));
    Value::Object(m)
}

/// A list of floats.
pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// A list of complex numbers.
pub fn complexes(cs: &[C64]) -> Value {
    Value::Array(cs.iter().map(|&c| complex(c)).collect())
}

/// A complex matrix as a list of rows.
pub fn matrix(m: &DMatrix<C64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect())).collect())
}

/// Builds an object from key/value pairs, keeping their order.
pub fn obj<I: IntoIterator<Item = (&'static str, Value)>>(pairs: I) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

/// Pretty-prints a value (two-space indentation, trailing newline).
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_else(|_| "null".into());
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        let two = num(-2.0).to_string();
        let mantissa = two.split('e').next().unwrap();
        assert_eq!(mantissa, "-2.0000000000000000");
        assert_eq!(two.parse::<f64>().unwrap(), -2.0);
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(num(f64::INFINITY), Value::Null);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let v = obj([
            ("a", num(1.0 / 3.0)),
            ("z", complex(C64::new(1e-300, -7.25))),
            ("b", nums(&[f64::MIN_POSITIVE, 5e-324, f64::MAX])),
        ]);
        let s = render(&v);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(render(&back), s);
    }
}
