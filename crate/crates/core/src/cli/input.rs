//! Potential documents and point lists.
//!
//! ```json
//! { "n": 1, "mode": "exact", "terms": [ { "d": 2, "k": 1, "t": "1/2" } ] }
//! ```
//!
//! EXACT coefficients are integers or `"p/q"` strings; FLOAT coefficients
//! are numbers or `[re, im]` pairs.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::potential::GeometricPotential;
use crate::scalar::{format_rational, parse_rational, Coeff, Complex, Mode, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum AnyPotential {
    Exact(GeometricPotential<Rational>),
    Float(GeometricPotential<Complex>),
}

impl AnyPotential {
    pub fn mode(&self) -> Mode {
        match self {
            AnyPotential::Exact(_) => Mode::Exact,
            AnyPotential::Float(_) => Mode::Float,
        }
    }

    pub fn n(&self) -> u32 {
        match self {
            AnyPotential::Exact(p) => p.n(),
            AnyPotential::Float(p) => p.n(),
        }
    }

    /// The document form accepted by [`parse_potential`].
    pub fn to_json(&self) -> Value {
        fn terms<C: Coeff>(p: &GeometricPotential<C>) -> Vec<Value> {
            p.terms()
                .map(|(d, k, t)| json!({ "d": d, "k": k, "t": scalar_to_json(&t.to_scalar()) }))
                .collect()
        }
        let terms = match self {
            AnyPotential::Exact(p) => terms(p),
            AnyPotential::Float(p) => terms(p),
        };
        json!({ "n": self.n(), "mode": self.mode().name(), "terms": terms })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedPotential {
    pub potential: AnyPotential,
    pub warnings: Vec<String>,
}

pub fn scalar_to_json(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(q) => Value::String(format_rational(q)),
        Scalar::Float(c) if c.im == 0.0 => json!(c.re),
        Scalar::Float(c) => json!([c.re, c.im]),
    }
}

pub fn scalar_from_json(v: &Value, mode: Mode) -> Result<Scalar> {
    let mismatch = |what: &str| {
        Error::Input(format!(
            "coefficient {v} is {what}, which does not match declared mode \"{}\"",
            mode.name()
        ))
    };
    match (mode, v) {
        (Mode::Exact, Value::String(s)) => Ok(Scalar::Exact(parse_rational(s)?)),
        (Mode::Exact, Value::Number(num)) => match num.as_i64() {
            Some(i) => Ok(Scalar::Exact(Rational::from_int(i))),
            None if num.is_f64() => Err(mismatch("a floating-point literal")),
            None => Ok(Scalar::Exact(parse_rational(&num.to_string())?)),
        },
        (Mode::Exact, Value::Array(_)) => Err(mismatch("a complex pair")),
        (Mode::Float, Value::Number(num)) => num
            .as_f64()
            .map(|re| Scalar::Float(Complex::new(re, 0.0)))
            .ok_or_else(|| Error::Input(format!("not a finite number: {num}"))),
        (Mode::Float, Value::Array(parts)) => match parts.as_slice() {
            [re, im] => match (re.as_f64(), im.as_f64()) {
                (Some(re), Some(im)) => Ok(Scalar::Float(Complex::new(re, im))),
                _ => Err(Error::Input(format!(
                    "complex pair must hold two numbers: {v}"
                ))),
            },
            _ => Err(Error::Input(format!(
                "complex pair must hold two numbers: {v}"
            ))),
        },
        (Mode::Float, Value::String(_)) => Err(mismatch("a rational string")),
        _ => Err(Error::Input(format!("non-numeric coefficient {v}"))),
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Input(format!("missing field \"{key}\"")))
}

fn as_int(v: &Value, what: &str) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| Error::Input(format!("\"{what}\" must be an integer, got {v}")))
}

pub fn parse_mode(text: &str) -> Result<Mode> {
    match text {
        "exact" => Ok(Mode::Exact),
        "float" => Ok(Mode::Float),
        other => Err(Error::Input(format!(
            "mode must be \"exact\" or \"float\", got {other:?}"
        ))),
    }
}

/// Parses and validates a potential document (before normalization).
/// Duplicate `(d, k)` entries are summed; `d = 0` entries are dropped with a
/// warning.
pub fn parse_potential(document: &str) -> Result<ParsedPotential> {
    let root: Value =
        serde_json::from_str(document).map_err(|e| Error::Input(format!("malformed JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Input("document must be a JSON object".into()))?;
    let n = as_int(field(obj, "n")?, "n")?;
    let n = u32::try_from(n)
        .map_err(|_| Error::Input(format!("\"n\" must be nonnegative, got {n}")))?;
    let mode = parse_mode(
        field(obj, "mode")?
            .as_str()
            .ok_or_else(|| Error::Input("\"mode\" must be a string".into()))?,
    )?;
    let terms = field(obj, "terms")?
        .as_array()
        .ok_or_else(|| Error::Input("\"terms\" must be an array".into()))?;

    let mut warnings = Vec::new();
    let mut parsed = Vec::with_capacity(terms.len());
    for (idx, term) in terms.iter().enumerate() {
        let t_obj = term
            .as_object()
            .ok_or_else(|| Error::Input(format!("term #{idx} must be an object")))?;
        let d = as_int(field(t_obj, "d")?, "d")?;
        let k = as_int(field(t_obj, "k")?, "k")?;
        let t = scalar_from_json(field(t_obj, "t")?, mode)?;
        if d < 0 {
            return Err(Error::Input(format!(
                "term #{idx}: d must be >= 1, got {d}"
            )));
        }
        if d == 0 {
            warnings.push(format!(
                "term #{idx} (d=0, k={k}) does not depend on omega and was dropped"
            ));
            continue;
        }
        let d = u32::try_from(d).map_err(|_| Error::Input(format!("term #{idx}: d too large")))?;
        parsed.push((d, k, t));
    }

    let potential = match mode {
        Mode::Exact => AnyPotential::Exact(build(n, &parsed)?),
        Mode::Float => AnyPotential::Float(build(n, &parsed)?),
    };
    Ok(ParsedPotential {
        potential,
        warnings,
    })
}

fn build<C: Coeff>(n: u32, terms: &[(u32, i64, Scalar)]) -> Result<GeometricPotential<C>> {
    let mut p = GeometricPotential::zero(n);
    for (d, k, t) in terms {
        p.add_term(*d, *k, C::from_scalar(t)?)?;
    }
    Ok(p)
}

/// Parses a JSON array of points, each an array of `n + 1` coefficients.
pub fn parse_points(document: &str, mode: Mode, n: u32) -> Result<Vec<Vec<Scalar>>> {
    let root: Value =
        serde_json::from_str(document).map_err(|e| Error::Input(format!("malformed JSON: {e}")))?;
    let pts = root
        .as_array()
        .ok_or_else(|| Error::Input("points document must be a JSON array".into()))?;
    pts.iter()
        .enumerate()
        .map(|(i, p)| {
            let coords = p
                .as_array()
                .ok_or_else(|| Error::Input(format!("point #{i} must be an array")))?;
            if coords.len() != n as usize + 1 {
                return Err(Error::Input(format!(
                    "point #{i} has {} coordinates, expected {}",
                    coords.len(),
                    n + 1
                )));
            }
            coords.iter().map(|c| scalar_from_json(c, mode)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    #[test]
    fn parses_exact_document() {
        let p =
            parse_potential(r#"{"n":1,"mode":"exact","terms":[{"d":2,"k":1,"t":"1/1"}]}"#).unwrap();
        assert!(p.warnings.is_empty());
        assert_eq!(
            p.potential,
            AnyPotential::Exact(GeometricPotential::new(1, [(2, 1, q(1))]).unwrap())
        );
    }

    #[test]
    fn out_of_window_terms_are_accepted() {
        let p =
            parse_potential(r#"{"n":1,"mode":"exact","terms":[{"d":1,"k":-1,"t":5}]}"#).unwrap();
        let AnyPotential::Exact(p) = p.potential else {
            panic!()
        };
        assert_eq!(p.coeff(1, -1), q(5));
        assert!(!p.is_normalized());
        let p = parse_potential(r#"{"n":0,"mode":"exact","terms":[{"d":2,"k":1,"t":1}]}"#).unwrap();
        let AnyPotential::Exact(p) = p.potential else {
            panic!()
        };
        assert!(p.normalize().0.is_empty());
    }

    #[test]
    fn degree_zero_dropped_with_warning() {
        let p = parse_potential(
            r#"{"n":0,"mode":"exact","terms":[{"d":0,"k":0,"t":1},{"d":2,"k":0,"t":"3/6"}]}"#,
        )
        .unwrap();
        assert_eq!(p.warnings.len(), 1);
        let AnyPotential::Exact(p) = p.potential else {
            panic!()
        };
        assert_eq!(p.terms().count(), 1);
        assert_eq!(p.coeff(2, 0), Rational::new(1.into(), 2.into()));
    }

    #[test]
    fn duplicates_are_summed() {
        let p = parse_potential(
            r#"{"n":1,"mode":"float","terms":[{"d":2,"k":1,"t":0.5},{"d":2,"k":1,"t":[0.25,1.0]}]}"#,
        )
        .unwrap();
        let AnyPotential::Float(p) = p.potential else {
            panic!()
        };
        assert_eq!(p.coeff(2, 1), Complex::new(0.75, 1.0));
    }

    #[test]
    fn rejects_bad_documents() {
        for doc in [
            "{not json",
            "[]",
            r#"{"n":1,"mode":"exact"}"#,
            r#"{"n":-1,"mode":"exact","terms":[]}"#,
            r#"{"n":1,"mode":"weird","terms":[]}"#,
            r#"{"n":1,"mode":"exact","terms":[{"d":-1,"k":0,"t":1}]}"#,
            r#"{"n":1,"mode":"exact","terms":[{"d":1,"k":0,"t":"abc"}]}"#,
            r#"{"n":1,"mode":"exact","terms":[{"d":1,"k":0,"t":true}]}"#,
            r#"{"n":1,"mode":"exact","terms":[{"d":1,"k":0,"t":0.5}]}"#,
            r#"{"n":1,"mode":"float","terms":[{"d":1,"k":0,"t":"1/2"}]}"#,
        ] {
            assert!(
                matches!(parse_potential(doc), Err(Error::Input(_))),
                "{doc}"
            );
        }
    }

    #[test]
    fn echo_round_trips() {
        for doc in [
            r#"{"n":2,"mode":"exact","terms":[{"d":2,"k":1,"t":"-3/4"},{"d":1,"k":-2,"t":7},{"d":3,"k":9,"t":"1/9"}]}"#,
            r#"{"n":1,"mode":"float","terms":[{"d":2,"k":1,"t":0.1},{"d":3,"k":2,"t":[1.5,-2.0]}]}"#,
        ] {
            let p = parse_potential(doc).unwrap().potential;
            let again = parse_potential(&p.to_json().to_string()).unwrap().potential;
            assert_eq!(again, p);
        }
    }

    #[test]
    fn parses_points() {
        let pts = parse_points(r#"[[0, "-1/3"], [1, 2]]"#, Mode::Exact, 1).unwrap();
        assert_eq!(
            pts[0][1],
            Scalar::Exact(Rational::new((-1).into(), 3.into()))
        );
        assert!(parse_points(r#"[[0]]"#, Mode::Exact, 1).is_err());
        assert!(parse_points(r#"[[0.5, 1]]"#, Mode::Exact, 1).is_err());
    }
}
