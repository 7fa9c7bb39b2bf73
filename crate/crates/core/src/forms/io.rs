//! JSON file formats for forms, linear systems and decompositions.
//!
//! Indices in files are 1-based; rationals are `"p/q"` strings (plain
//! integers are accepted too). Problems are reported as [`Diagnostic`]s
//! carrying a JSON-pointer-like location.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::cubic::CubicForm;
use super::decomp::{HDecomposition, HPair};
use super::linear::{LinearForm, LinearSystem};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

fn config_error(diags: Vec<Diagnostic>) -> Error {
    Error::Config(
        diags
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join("; "),
    )
}

/// Parse `"p/q"`, `"p"` or a JSON integer as an exact rational.
pub fn parse_rational(v: &Value) -> std::result::Result<BigRational, String> {
    match v {
        Value::String(s) => {
            let s = s.trim();
            let (p, q) = match s.split_once('/') {
                Some((p, q)) => (p.trim(), q.trim()),
                None => (s, "1"),
            };
            let p: BigInt = p.parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let q: BigInt = q.parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            if q.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(BigRational::new(p, q))
        }
        Value::Number(n) if n.is_i64() => Ok(BigRational::from_integer(n.as_i64().unwrap().into())),
        other => Err(format!("expected a rational string \"p/q\", got {other}")),
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn get_usize(obj: &Value, key: &str, diags: &mut Vec<Diagnostic>) -> Option<usize> {
    match obj.get(key) {
        Some(Value::Number(n)) if n.as_u64().is_some() => Some(n.as_u64().unwrap() as usize),
        Some(other) => {
            diags.push(Diagnostic::new(format!("/{key}"), format!("expected a nonnegative integer, got {other}")));
            None
        }
        None => {
            diags.push(Diagnostic::new(format!("/{key}"), "missing field"));
            None
        }
    }
}

/// A cubic form read from a file, with the denominator-clearing factor.
#[derive(Clone, Debug)]
pub struct LoadedForm {
    pub form: CubicForm,
    pub scale: BigInt,
}

pub fn check_form_value(v: &Value) -> (Option<LoadedForm>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let n = get_usize(v, "n", &mut diags);
    if n == Some(0) {
        diags.push(Diagnostic::new("/n", "n must be at least 1"));
    }
    let mut terms = Vec::new();
    match v.get("monomials") {
        Some(Value::Array(ms)) => {
            for (idx, m) in ms.iter().enumerate() {
                let loc = format!("/monomials/{idx}");
                let mut ijk = [0usize; 3];
                let mut ok = true;
                for (slot, key) in ["i", "j", "k"].iter().enumerate() {
                    match m.get(*key).and_then(|x| x.as_u64()) {
                        Some(x) if x >= 1 => ijk[slot] = x as usize,
                        _ => {
                            diags.push(Diagnostic::new(format!("{loc}/{key}"), "expected a 1-based index"));
                            ok = false;
                        }
                    }
                }
                if ok && !(ijk[0] <= ijk[1] && ijk[1] <= ijk[2]) {
                    diags.push(Diagnostic::new(loc.clone(), "index order: require i <= j <= k"));
                    ok = false;
                }
                if let Some(n) = n {
                    if ok && ijk[2] > n {
                        diags.push(Diagnostic::new(loc.clone(), format!("index {} exceeds n = {n}", ijk[2])));
                        ok = false;
                    }
                }
                let c = match m.get("c") {
                    Some(c) => parse_rational(c).map_err(|e| {
                        diags.push(Diagnostic::new(format!("{loc}/c"), e));
                    }),
                    None => {
                        diags.push(Diagnostic::new(format!("{loc}/c"), "missing coefficient"));
                        Err(())
                    }
                };
                if let (true, Ok(c)) = (ok, c) {
                    terms.push(([ijk[0] - 1, ijk[1] - 1, ijk[2] - 1], c));
                }
            }
        }
        _ => diags.push(Diagnostic::new("/monomials", "expected an array of monomials")),
    }
    if !diags.is_empty() {
        return (None, diags);
    }
    match CubicForm::from_rational(n.unwrap(), terms) {
        Ok((form, scale)) => (Some(LoadedForm { form, scale }), diags),
        Err(e) => {
            diags.push(Diagnostic::new("/monomials", e.to_string()));
            (None, diags)
        }
    }
}

pub fn form_from_value(v: &Value) -> Result<LoadedForm> {
    match check_form_value(v) {
        (Some(f), _) => Ok(f),
        (None, d) => Err(config_error(d)),
    }
}

pub fn form_to_value(c: &CubicForm) -> Value {
    let monomials: Vec<Value> = c
        .terms()
        .map(|(&[i, j, k], coef)| {
            serde_json::json!({"i": i + 1, "j": j + 1, "k": k + 1, "c": coef.to_string()})
        })
        .collect();
    serde_json::json!({"n": c.n(), "monomials": monomials})
}

pub fn check_linsys_value(v: &Value) -> (Option<LinearSystem>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let r = get_usize(v, "r", &mut diags);
    let n = get_usize(v, "n", &mut diags);
    let assume = match v.get("assume_irrational") {
        Some(Value::Bool(b)) => *b,
        None => false,
        Some(other) => {
            diags.push(Diagnostic::new("/assume_irrational", format!("expected a boolean, got {other}")));
            false
        }
    };
    let mut rows = Vec::new();
    match v.get("rows") {
        Some(Value::Array(rs)) => {
            if let Some(r) = r {
                if rs.len() != r {
                    diags.push(Diagnostic::new("/rows", format!("expected {r} rows, got {}", rs.len())));
                }
            }
            for (ri, row) in rs.iter().enumerate() {
                let Value::Array(entries) = row else {
                    diags.push(Diagnostic::new(format!("/rows/{ri}"), "expected an array"));
                    continue;
                };
                if let Some(n) = n {
                    if entries.len() != n {
                        diags.push(Diagnostic::new(format!("/rows/{ri}"), format!("expected {n} entries, got {}", entries.len())));
                        continue;
                    }
                }
                let all_exact = entries.iter().all(|e| e.is_string() || e.is_i64());
                if all_exact {
                    let parsed: std::result::Result<Vec<_>, _> = entries.iter().map(parse_rational).collect();
                    match parsed {
                        Ok(q) => rows.push(LinearForm::Rational(q)),
                        Err(e) => diags.push(Diagnostic::new(format!("/rows/{ri}"), e)),
                    }
                } else {
                    let mut reals = Vec::new();
                    for (ci, e) in entries.iter().enumerate() {
                        let val = match e {
                            Value::Number(x) => x.as_f64(),
                            s @ Value::String(_) => parse_rational(s).ok().and_then(|q| q.to_f64()),
                            _ => None,
                        };
                        match val {
                            Some(x) if x.is_finite() => reals.push(x),
                            _ => diags.push(Diagnostic::new(format!("/rows/{ri}/{ci}"), "expected a finite number")),
                        }
                    }
                    rows.push(LinearForm::Real(reals));
                }
            }
        }
        _ => diags.push(Diagnostic::new("/rows", "expected an array of rows")),
    }
    if !diags.is_empty() {
        return (None, diags);
    }
    match LinearSystem::new(n.unwrap(), rows, assume) {
        Ok(s) => (Some(s), diags),
        Err(e) => {
            diags.push(Diagnostic::new("/rows", e.to_string()));
            (None, diags)
        }
    }
}

pub fn linsys_from_value(v: &Value) -> Result<LinearSystem> {
    match check_linsys_value(v) {
        (Some(s), _) => Ok(s),
        (None, d) => Err(config_error(d)),
    }
}

pub fn linsys_to_value(s: &LinearSystem) -> Value {
    let rows: Vec<Value> = s
        .rows()
        .iter()
        .map(|row| match row {
            LinearForm::Rational(q) => Value::Array(q.iter().map(|x| Value::String(format_rational(x))).collect()),
            LinearForm::Real(x) => serde_json::json!(x),
        })
        .collect();
    serde_json::json!({"r": s.r(), "n": s.n(), "rows": rows, "assume_irrational": s.assume_irrational()})
}

/// Decomposition file: `{"n": int, "pairs": [{"a": [rational, ...],
/// "b": [{"i": int, "j": int, "c": rational}, ...]}, ...]}`.
#[derive(Debug, Deserialize)]
struct RawDecomp {
    n: usize,
    pairs: Vec<RawPair>,
}

#[derive(Debug, Deserialize)]
struct RawPair {
    a: Vec<Value>,
    b: Vec<RawQuadTerm>,
}

#[derive(Debug, Deserialize)]
struct RawQuadTerm {
    i: usize,
    j: usize,
    c: Value,
}

pub fn decomposition_from_value(v: &Value) -> Result<HDecomposition> {
    let raw: RawDecomp = serde_json::from_value(v.clone())?;
    let mut pairs = Vec::new();
    for (pi, p) in raw.pairs.iter().enumerate() {
        if p.a.len() != raw.n {
            return Err(Error::Config(format!("/pairs/{pi}/a: expected {} entries", raw.n)));
        }
        let a = p
            .a
            .iter()
            .map(parse_rational)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("/pairs/{pi}/a: {e}")))?;
        let mut b = BTreeMap::new();
        for (ti, t) in p.b.iter().enumerate() {
            if t.i == 0 || t.j == 0 || t.i > raw.n || t.j > raw.n {
                return Err(Error::Config(format!("/pairs/{pi}/b/{ti}: index out of range")));
            }
            let c = parse_rational(&t.c).map_err(|e| Error::Config(format!("/pairs/{pi}/b/{ti}/c: {e}")))?;
            b.insert((t.i - 1, t.j - 1), c);
        }
        pairs.push(HPair::new(a, b));
    }
    Ok(HDecomposition::new(pairs))
}

pub fn decomposition_to_value(d: &HDecomposition, n: usize) -> Value {
    let pairs: Vec<Value> = d
        .pairs
        .iter()
        .map(|p| {
            let a: Vec<String> = p.linear.iter().map(format_rational).collect();
            let b: Vec<Value> = p
                .quadratic
                .iter()
                .map(|(&(i, j), c)| serde_json::json!({"i": i + 1, "j": j + 1, "c": format_rational(c)}))
                .collect();
            serde_json::json!({"a": a, "b": b})
        })
        .collect();
    serde_json::json!({"n": n, "pairs": pairs})
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_form(path: &Path) -> Result<LoadedForm> {
    form_from_value(&read_json(path)?)
}

pub fn load_linsys(path: &Path) -> Result<LinearSystem> {
    linsys_from_value(&read_json(path)?)
}

pub fn load_decomposition(path: &Path) -> Result<HDecomposition> {
    decomposition_from_value(&read_json(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn taxicab_file() {
        let v = json!({"n": 4, "monomials": [
            {"i": 1, "j": 1, "k": 1, "c": "1"},
            {"i": 2, "j": 2, "k": 2, "c": "1"},
            {"i": 3, "j": 3, "k": 3, "c": "-1"},
            {"i": 4, "j": 4, "k": 4, "c": "-1"}
        ]});
        let f = form_from_value(&v).unwrap();
        assert_eq!(f.form, CubicForm::diagonal(&[1, 1, -1, -1]).unwrap());
        assert_eq!(f.scale, BigInt::from(1));
        let back = form_from_value(&form_to_value(&f.form)).unwrap();
        assert_eq!(back.form, f.form);
    }

    #[test]
    fn index_order_violation_is_located() {
        let v = json!({"n": 2, "monomials": [{"i": 2, "j": 1, "k": 2, "c": "1"}]});
        let (f, d) = check_form_value(&v);
        assert!(f.is_none());
        assert_eq!(d[0].location, "/monomials/0");
        assert!(d[0].message.contains("index order"));
    }

    #[test]
    fn rational_coefficients_are_rescaled() {
        let v = json!({"n": 1, "monomials": [{"i": 1, "j": 1, "k": 1, "c": "3/4"}]});
        let f = form_from_value(&v).unwrap();
        assert_eq!(f.scale, BigInt::from(4));
        assert_eq!(f.form.coeff([0, 0, 0]), BigInt::from(3));
    }

    #[test]
    fn linear_system_mixed_rows() {
        let v = json!({"r": 1, "n": 3, "rows": [[1.5, "1/2", 2]], "assume_irrational": true});
        let s = linsys_from_value(&v).unwrap();
        assert_eq!(s.rows()[0], LinearForm::Real(vec![1.5, 0.5, 2.0]));
        let v = json!({"r": 1, "n": 2, "rows": [["1/2", "1/3"]], "assume_irrational": false});
        let s = linsys_from_value(&v).unwrap();
        assert!(matches!(s.rows()[0], LinearForm::Rational(_)));
        let back = linsys_from_value(&linsys_to_value(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn linear_system_shape_errors() {
        let v = json!({"r": 2, "n": 3, "rows": [[1.0, 2.0, 3.0]]});
        assert!(linsys_from_value(&v).is_err());
    }

    #[test]
    fn decomposition_roundtrip() {
        let v = json!({"n": 2, "pairs": [{"a": ["1", "1"], "b": [
            {"i": 1, "j": 1, "c": "1"}, {"i": 1, "j": 2, "c": "-1"}, {"i": 2, "j": 2, "c": "1"}]}]});
        let d = decomposition_from_value(&v).unwrap();
        let c = CubicForm::diagonal(&[1, 1]).unwrap();
        assert!(crate::forms::verify_h_decomposition(&c, &d));
        let back = decomposition_from_value(&decomposition_to_value(&d, 2)).unwrap();
        assert_eq!(back, d);
    }
}
