//! JSON document holding a fan, a structure group and named collections.
//!
//! Rationals are written as `"p/q"` strings (`"p"` when integral); JSON
//! integers are accepted as rationals on input, floats never are.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charmat::{GroupTag, TorusHom};
use crate::collection::AdmissibleCollection;
use crate::fan::{Cone, Fan};
use crate::lattice::IntVector;
use crate::qmat::{QMatrix, Rational};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("{path}: integer {value} does not fit in 64 bits")]
    Overflow { path: String, value: BigInt },
}

fn field(path: impl Into<String>, message: impl Into<String>) -> DocumentError {
    DocumentError::Field {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub fan: Fan,
    pub group: GroupTag,
    pub collections: BTreeMap<String, AdmissibleCollection>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    schema_version: String,
    fan: RawFan,
    group: String,
    collections: BTreeMap<String, RawCollection>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFan {
    rank: usize,
    cones: Vec<Vec<Vec<i64>>>,
    maximal: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCollection {
    rho: BTreeMap<String, RawHom>,
    #[serde(rename = "P")]
    p: BTreeMap<String, Vec<Vec<RawRational>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHom {
    #[serde(rename = "A")]
    a: Vec<Vec<RawRational>>,
    weights: Vec<Vec<i64>>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum RawRational {
    Int(i64),
    Text(String),
}

impl<'de> Deserialize<'de> for RawRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = RawRational;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an integer or a \"p/q\" string")
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<RawRational, E> {
                Ok(RawRational::Int(v))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<RawRational, E> {
                i64::try_from(v)
                    .map(RawRational::Int)
                    .map_err(|_| E::custom(format!("integer {v} out of range; write it as a string")))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<RawRational, E> {
                Ok(RawRational::Text(v.to_string()))
            }
        }
        d.deserialize_any(Visitor)
    }
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`; the denominator must be positive.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).ok()?;
    if den.starts_with(['+', '-']) {
        return None;
    }
    let den = BigInt::from_str(den).ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rational_of(raw: &RawRational, path: &str) -> Result<Rational, DocumentError> {
    match raw {
        RawRational::Int(n) => Ok(Rational::from_integer(BigInt::from(*n))),
        RawRational::Text(s) => parse_rational(s).ok_or_else(|| field(path, format!("malformed rational \"{s}\""))),
    }
}

fn matrix_of(rows: &[Vec<RawRational>], n: usize, path: &str) -> Result<QMatrix, DocumentError> {
    if rows.len() != n {
        return Err(field(path, format!("expected {n} rows, got {}", rows.len())));
    }
    let mut out = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(field(
                format!("{path}[{i}]"),
                format!("expected {n} entries, got {}", row.len()),
            ));
        }
        let row = row
            .iter()
            .enumerate()
            .map(|(j, x)| rational_of(x, &format!("{path}[{i}][{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(row);
    }
    Ok(QMatrix::from_rows(out).expect("rows checked"))
}

fn int_vector(v: &[i64], rank: usize, path: &str) -> Result<IntVector, DocumentError> {
    if v.len() != rank {
        return Err(field(path, format!("expected {rank} entries, got {}", v.len())));
    }
    Ok(v.iter().map(|&x| BigInt::from(x)).collect())
}

fn cone_index(key: &str, fan: &Fan, path: &str) -> Result<usize, DocumentError> {
    let i: usize = key
        .trim()
        .parse()
        .map_err(|_| field(path, format!("\"{key}\" is not a cone index")))?;
    if !fan.is_maximal(i) {
        return Err(field(path, format!("cone {i} is not a maximal cone")));
    }
    Ok(i)
}

fn fan_of(raw: &RawFan) -> Result<Fan, DocumentError> {
    let mut cones = Vec::with_capacity(raw.cones.len());
    for (i, rays) in raw.cones.iter().enumerate() {
        let path = format!("fan.cones[{i}]");
        let rays = rays
            .iter()
            .enumerate()
            .map(|(j, r)| int_vector(r, raw.rank, &format!("{path}[{j}] (cone {i})")))
            .collect::<Result<Vec<_>, _>>()?;
        cones.push(Cone::new(raw.rank, rays).map_err(|e| field(&path, format!("cone {i}: {e}")))?);
    }
    Fan::new(raw.rank, cones, raw.maximal.clone()).map_err(|e| field("fan", e.to_string()))
}

fn collection_of(
    name: &str,
    raw: &RawCollection,
    fan: &Fan,
    group: GroupTag,
) -> Result<AdmissibleCollection, DocumentError> {
    let n = group.n();
    let rank = fan.ambient_rank();
    let base = format!("collections.{name}");
    let mut rho = BTreeMap::new();
    for (key, h) in &raw.rho {
        let path = format!("{base}.rho.\"{key}\"");
        let s = cone_index(key, fan, &path)?;
        let a = matrix_of(&h.a, n, &format!("{path}.A"))?;
        if h.weights.len() != n {
            return Err(field(
                format!("{path}.weights"),
                format!("expected {n} weights, got {}", h.weights.len()),
            ));
        }
        let weights = h
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| int_vector(w, rank, &format!("{path}.weights[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let hom = TorusHom::new(a, weights, rank).map_err(|e| field(&path, e.to_string()))?;
        if rho.insert(s, hom).is_some() {
            return Err(field(&path, format!("duplicate entry for cone {s}")));
        }
    }
    let mut p = BTreeMap::new();
    for (key, m) in &raw.p {
        let path = format!("{base}.P.\"{key}\"");
        let (t, s) = key
            .split_once(',')
            .ok_or_else(|| field(&path, "key must be \"tau,sigma\""))?;
        let t = cone_index(t, fan, &path)?;
        let s = cone_index(s, fan, &path)?;
        if p.insert((t, s), matrix_of(m, n, &path)?).is_some() {
            return Err(field(&path, format!("duplicate entry for pair ({t},{s})")));
        }
    }
    AdmissibleCollection::new(fan.clone(), group, rho, p).map_err(|e| field(base, e.to_string()))
}

/// Parses and structurally checks a document. Admissibility is not checked.
pub fn parse(text: &str) -> Result<Document, DocumentError> {
    let raw: RawDocument = serde_json::from_str(text)?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(field(
            "schema_version",
            format!(
                "unsupported version \"{}\" (expected \"{SCHEMA_VERSION}\")",
                raw.schema_version
            ),
        ));
    }
    let fan = fan_of(&raw.fan)?;
    let group: GroupTag = raw
        .group
        .parse()
        .map_err(|e: crate::charmat::ParseGroupError| field("group", e.to_string()))?;
    let mut collections = BTreeMap::new();
    for (name, c) in &raw.collections {
        collections.insert(name.clone(), collection_of(name, c, &fan, group)?);
    }
    Ok(Document {
        fan,
        group,
        collections,
    })
}

fn small(v: &BigInt, path: &str) -> Result<i64, DocumentError> {
    v.to_i64().ok_or_else(|| DocumentError::Overflow {
        path: path.to_string(),
        value: v.clone(),
    })
}

fn small_vector(v: &[BigInt], path: &str) -> Result<Vec<i64>, DocumentError> {
    v.iter().map(|x| small(x, path)).collect()
}

fn raw_matrix(m: &QMatrix) -> Vec<Vec<RawRational>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(|x| RawRational::Text(format_rational(x))).collect())
        .collect()
}

/// Canonical pretty-printed form, newline terminated.
pub fn emit(doc: &Document) -> Result<String, DocumentError> {
    let fan = RawFan {
        rank: doc.fan.ambient_rank(),
        cones: doc
            .fan
            .cones()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.rays()
                    .iter()
                    .map(|r| small_vector(r, &format!("fan.cones[{i}]")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?,
        maximal: doc.fan.maximal().to_vec(),
    };
    let mut collections = BTreeMap::new();
    for (name, c) in &doc.collections {
        let mut rho = BTreeMap::new();
        for (s, h) in c.rho_map() {
            let path = format!("collections.{name}.rho.\"{s}\".weights");
            rho.insert(
                s.to_string(),
                RawHom {
                    a: raw_matrix(h.base_change()),
                    weights: h
                        .weights()
                        .iter()
                        .map(|w| small_vector(w, &path))
                        .collect::<Result<_, _>>()?,
                },
            );
        }
        let p = c
            .p_map()
            .iter()
            .map(|((t, s), m)| (format!("{t},{s}"), raw_matrix(m)))
            .collect();
        collections.insert(name.clone(), RawCollection { rho, p });
    }
    let raw = RawDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        fan,
        group: doc.group.to_string(),
        collections,
    };
    let mut out = serde_json::to_string_pretty(&raw)?;
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::projective_line;
    use crate::qmat::{rat, ratio};

    const P1: &str = r#"{
  "schema_version": "1",
  "fan": {"rank": 1, "cones": [[[1]], [[-1]], []], "maximal": [0, 1]},
  "group": "GeneralLinear(1)",
  "collections": {
    "O(1)": {
      "rho": {"0": {"A": [[1]], "weights": [[0]]}, "1": {"A": [["1"]], "weights": [[1]]}},
      "P": {"0,0": [["1"]], "1,1": [["1"]], "1,0": [["2/4"]], "0,1": [["2"]]}
    }
  }
}"#;

    #[test]
    fn rational_syntax() {
        assert_eq!(parse_rational("3"), Some(rat(3)));
        assert_eq!(parse_rational("-6/4"), Some(ratio(-3, 2)));
        assert_eq!(parse_rational(" 1 / 3 "), Some(ratio(1, 3)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("1/-2"), None);
        assert_eq!(parse_rational("0.5"), None);
        assert_eq!(format_rational(&ratio(-3, 2)), "-3/2");
        assert_eq!(format_rational(&rat(4)), "4");
    }

    #[test]
    fn parses_line_bundle() {
        let d = parse(P1).unwrap();
        assert_eq!(d.fan.maximal(), &[0, 1]);
        assert_eq!(d.fan.cones()[0], projective_line().cones()[0]);
        let c = &d.collections["O(1)"];
        assert_eq!(c.p(1, 0), &QMatrix::scalar(1, ratio(1, 2)));
        assert!(c.validate().ok);
    }

    #[test]
    fn emit_is_a_fixed_point() {
        let once = emit(&parse(P1).unwrap()).unwrap();
        let twice = emit(&parse(&once).unwrap()).unwrap();
        assert_eq!(once, twice);
        assert!(once.contains("\"1/2\""));
    }

    #[test]
    fn ragged_ray_names_the_cone() {
        let text = P1.replace("[[[1]], [[-1]], []]", "[[[1]], [[-1, 0, 2]], []]");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("cone 1"), "{err}");
        assert!(err.contains("expected 1 entries, got 3"), "{err}");
    }

    #[test]
    fn floats_are_rejected_with_position() {
        let text = P1.replace("\"2/4\"", "0.5");
        let err = parse(&text).unwrap_err();
        assert!(matches!(err, DocumentError::Json(ref e) if e.line() == 8), "{err}");
        assert!(
            err.to_string().starts_with("invalid type: floating point `0.5`"),
            "{err}"
        );
    }

    #[test]
    fn malformed_rational_has_field_path() {
        let text = P1.replace("\"2/4\"", "\"2/x\"");
        let err = parse(&text).unwrap_err().to_string();
        assert_eq!(err, "collections.O(1).P.\"1,0\"[0][0]: malformed rational \"2/x\"");
    }

    #[test]
    fn missing_transition_is_reported() {
        let text = P1.replace(", \"0,1\": [[\"2\"]]", "");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("pair (0,1)"), "{err}");
    }

    #[test]
    fn unknown_schema_version() {
        let text = P1.replace("\"schema_version\": \"1\"", "\"schema_version\": \"2\"");
        assert!(parse(&text).unwrap_err().to_string().starts_with("schema_version"));
    }

    #[test]
    fn non_maximal_key_rejected() {
        let text = P1.replace("\"1,1\"", "\"2,2\"");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("cone 2 is not a maximal cone"), "{err}");
    }
}
