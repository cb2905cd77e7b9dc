//! Problem files: JSON schema, validation with field-level diagnostics, and
//! conversion into the core types.
//!
//! ```json
//! {
//!   "p": 5,
//!   "A": [[2]],
//!   "domain": {"tags": ["full"], "e": 1},
//!   "queries": [["100"], ["3/7"], [{"v": 2, "u": 4, "n": 6}]],
//!   "verify_box": 8,
//!   "precision": 20,
//!   "caps": {"subgroup": 1000000, "enumeration": 100000000, "formula_nodes": 1000000}
//! }
//! ```
//!
//! A domain is either tags plus ideal exponent, or a ball
//! `{"center": ["7", "5"], "radius_exp": 2}`. Rationals are decimal strings
//! `"num"` or `"num/den"`; query coordinates may instead be class triples
//! `{"v": ..., "u": ..., "n": ...}` meaning `p^v (u + O(p^n))`.

use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::Deserialize;

use padic_qe_core::image::Limits;
use padic_qe_core::monomial::{BallDomain, CoordinateTag, MonomialMap, StandardDomain};
use padic_qe_core::padic::PAdicNumber;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemJson {
    pub p: u64,
    #[serde(rename = "A")]
    pub matrix: Vec<Vec<i64>>,
    pub domain: DomainJson,
    #[serde(default)]
    pub queries: Vec<Vec<QueryCoord>>,
    #[serde(default)]
    pub verify_box: Option<i64>,
    #[serde(default)]
    pub precision: Option<u32>,
    #[serde(default)]
    pub caps: Option<CapsJson>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum DomainJson {
    Standard {
        tags: Vec<String>,
        #[serde(default = "default_ideal_exp")]
        e: u32,
    },
    Ball {
        center: Vec<String>,
        radius_exp: u32,
    },
}

fn default_ideal_exp() -> u32 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum QueryCoord {
    Integer(i64),
    Rational(String),
    Class { v: i64, u: u64, n: u32 },
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CapsJson {
    #[serde(default)]
    pub subgroup: Option<u64>,
    #[serde(default)]
    pub enumeration: Option<u64>,
    #[serde(default)]
    pub formula_nodes: Option<u64>,
}

/// A validated problem, ready for the core modules.
pub struct Problem {
    pub p: u64,
    pub map: MonomialMap,
    pub domain: ProblemDomain,
    pub queries: Vec<Vec<PAdicNumber>>,
    pub verify_box: Option<i64>,
    pub precision: Option<u32>,
    pub limits: Limits,
    /// The whole problem as parsed (keys sorted), embedded in outputs so an
    /// emitted description reloads as a problem file.
    pub echo: serde_json::Value,
}

pub enum ProblemDomain {
    Standard(StandardDomain),
    Ball(BallDomain),
}

pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    let bad = || CliError::Parse(format!("`{s}` is not a rational (use \"num\" or \"num/den\")"));
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den == BigInt::from(0) {
            return Err(CliError::Parse(format!("`{s}` has a zero denominator")));
        }
        Ok(BigRational::new(num, den))
    } else {
        Ok(BigRational::from_integer(
            BigInt::from_str(s.trim()).map_err(|_| bad())?,
        ))
    }
}

pub fn load(path: &std::path::Path, cap_flag: Option<u64>) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    // Accept a previously emitted description file: it embeds its problem.
    let problem_value = value.get("problem").cloned().unwrap_or(value);
    let json: ProblemJson = serde_json::from_value(problem_value.clone())
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    validate(json, problem_value, cap_flag)
}

fn validate(
    json: ProblemJson,
    echo: serde_json::Value,
    cap_flag: Option<u64>,
) -> Result<Problem, CliError> {
    let map = MonomialMap::new(json.matrix.clone())
        .map_err(|e| CliError::Parse(format!("field A: {e}")))?;

    let domain = match &json.domain {
        DomainJson::Standard { tags, e } => {
            let parsed: Vec<CoordinateTag> = tags
                .iter()
                .enumerate()
                .map(|(i, t)| match t.as_str() {
                    "full" => Ok(CoordinateTag::Full),
                    "unit_ball" => Ok(CoordinateTag::UnitBall),
                    other => Err(CliError::Parse(format!(
                        "domain.tags[{i}]: `{other}` is not `full` or `unit_ball`"
                    ))),
                })
                .collect::<Result<_, _>>()?;
            if parsed.len() != map.cols() {
                return Err(CliError::Parse(format!(
                    "domain.tags: {} tags for a map with {} columns",
                    parsed.len(),
                    map.cols()
                )));
            }
            let domain = StandardDomain::new(parsed, *e)
                .map_err(|e| CliError::Parse(format!("domain: {e}")))?;
            ProblemDomain::Standard(domain)
        }
        DomainJson::Ball { center, radius_exp } => {
            let parsed: Vec<BigRational> = center
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<_, _>>()?;
            if parsed.len() != map.cols() {
                return Err(CliError::Parse(format!(
                    "domain.center: {} coordinates for a map with {} columns",
                    parsed.len(),
                    map.cols()
                )));
            }
            let ball = BallDomain::new(parsed, *radius_exp)
                .map_err(|e| CliError::Parse(format!("domain: {e}")))?;
            ProblemDomain::Ball(ball)
        }
    };

    let query_prec = json.precision.unwrap_or(20).max(20) + 20;
    let mut queries = Vec::with_capacity(json.queries.len());
    for (qi, query) in json.queries.iter().enumerate() {
        if query.len() != map.rows() {
            return Err(CliError::Parse(format!(
                "queries[{qi}]: {} coordinates for a map with {} rows",
                query.len(),
                map.rows()
            )));
        }
        let mut point = Vec::with_capacity(query.len());
        for (ci, coord) in query.iter().enumerate() {
            let value = match coord {
                QueryCoord::Integer(n) => PAdicNumber::from_rational(
                    &BigInt::from(*n),
                    &BigInt::from(1),
                    json.p,
                    query_prec,
                ),
                QueryCoord::Rational(s) => {
                    let r = parse_rational(s)?;
                    PAdicNumber::from_big_rational(r, json.p, query_prec)
                }
                QueryCoord::Class { v, u, n } => {
                    PAdicNumber::from_unit_class(json.p, *v, BigUint::from(*u), *n)
                }
            }
            .map_err(|e| CliError::Parse(format!("queries[{qi}][{ci}]: {e}")))?;
            point.push(value);
        }
        queries.push(point);
    }

    let mut limits = Limits::default();
    if let Some(caps) = &json.caps {
        if let Some(c) = caps.subgroup {
            limits.subgroup_cap = c;
        }
        if let Some(c) = caps.enumeration {
            limits.enumeration_cap = c;
        }
        if let Some(c) = caps.formula_nodes {
            limits.formula_nodes = c;
        }
    }
    // The --cap flag overrides every file cap.
    if let Some(c) = cap_flag {
        limits.subgroup_cap = c;
        limits.enumeration_cap = c;
        limits.formula_nodes = c;
    }

    Ok(Problem {
        p: json.p,
        map,
        domain,
        queries,
        verify_box: json.verify_box,
        precision: json.precision,
        limits,
        echo,
    })
}
