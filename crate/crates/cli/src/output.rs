//! Output structures. Everything serializes with fixed field order and
//! sorted collections, so identical inputs produce byte-identical JSON.

use num_rational::BigRational;
use serde::Serialize;

use padic_qe_core::image::{BallImageDescription, ImageDescription, VerifyReport};
use padic_qe_core::padic::{PAdicNumber, Valuation};
use padic_qe_core::presburger;
use padic_qe_core::semialg;

/// How many subgroup elements an image description prints.
pub const SUBGROUP_PRINT_CAP: usize = 200;

#[derive(Serialize)]
pub struct DescriptionBody {
    pub d: u64,
    pub minor_columns: Vec<usize>,
    pub e: u32,
    #[serde(rename = "M")]
    pub modulus_exp: u32,
    pub valuation_formula: String,
    pub subgroup_size: usize,
    pub subgroup_elements: Vec<Vec<u64>>,
    pub subgroup_elements_truncated: bool,
    pub formula_pretty: String,
    pub formula_extended: String,
    pub formula_lowered: String,
    pub formula_json: serde_json::Value,
}

impl DescriptionBody {
    pub fn from_description(desc: &ImageDescription) -> Self {
        let elements = desc.angular_set().sorted_elements();
        let truncated = elements.len() > SUBGROUP_PRINT_CAP;
        let formula_json: serde_json::Value =
            serde_json::from_str(&semialg::text::to_json(desc.extended_formula()))
                .expect("formula JSON mirror is valid JSON");
        DescriptionBody {
            d: desc.minor().det_abs(),
            minor_columns: desc.minor().columns().iter().map(|c| c + 1).collect(),
            e: desc.ideal_exp(),
            modulus_exp: desc.modulus_exp(),
            valuation_formula: presburger::text::to_sexpr(desc.valuation_formula()),
            subgroup_size: elements.len(),
            subgroup_elements: elements.into_iter().take(SUBGROUP_PRINT_CAP).collect(),
            subgroup_elements_truncated: truncated,
            formula_pretty: semialg::text::pretty(desc.extended_formula()),
            formula_extended: semialg::text::to_sexpr(desc.extended_formula()),
            formula_lowered: semialg::text::to_sexpr(desc.lowered_formula()),
            formula_json,
        }
    }
}

#[derive(Serialize)]
pub struct ImageOutput {
    pub problem: serde_json::Value,
    pub p: u64,
    #[serde(flatten)]
    pub body: DescriptionBody,
}

#[derive(Serialize)]
pub struct PieceOutput {
    pub scale: Vec<String>,
    #[serde(flatten)]
    pub body: DescriptionBody,
}

#[derive(Serialize)]
pub struct BallImageOutput {
    pub problem: serde_json::Value,
    pub p: u64,
    pub pieces: Vec<PieceOutput>,
}

impl BallImageOutput {
    pub fn new(problem: serde_json::Value, p: u64, desc: &BallImageDescription) -> Self {
        let pieces = desc
            .pieces()
            .iter()
            .map(|piece| PieceOutput {
                scale: piece.coordinate_scale.iter().map(rational_string).collect(),
                body: DescriptionBody::from_description(&piece.description),
            })
            .collect();
        BallImageOutput { problem, p, pieces }
    }
}

pub fn rational_string(r: &BigRational) -> String {
    if *r.denom() == 1.into() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Serialize)]
pub struct DecideOutput {
    pub problem: serde_json::Value,
    pub decisions: Vec<bool>,
}

#[derive(Serialize)]
pub struct ClassTriple {
    pub v: i64,
    pub u: String,
    pub n: u32,
}

impl ClassTriple {
    pub fn from_value(x: &PAdicNumber, prec: u32) -> Self {
        match x.ord() {
            Valuation::Infinite => ClassTriple {
                v: 0,
                u: "0".to_string(),
                n: prec,
            },
            Valuation::Finite(v) => ClassTriple {
                v,
                u: x.unit_mod(prec).expect("witness carries enough digits").to_string(),
                n: prec,
            },
        }
    }
}

#[derive(Serialize)]
pub struct PreimageOutput {
    pub problem: serde_json::Value,
    pub precision: u32,
    pub witnesses: Vec<Option<Vec<ClassTriple>>>,
}

#[derive(Serialize)]
pub struct VerifyOutput {
    pub problem: serde_json::Value,
    #[serde(rename = "box")]
    pub box_max: i64,
    pub pieces: usize,
    pub classes_checked: u64,
    pub mismatches: u64,
    pub examples: Vec<String>,
}

impl VerifyOutput {
    pub fn aggregate(
        problem: serde_json::Value,
        box_max: i64,
        reports: &[VerifyReport],
    ) -> Self {
        VerifyOutput {
            problem,
            box_max,
            pieces: reports.len(),
            classes_checked: reports.iter().map(|r| r.classes_checked).sum(),
            mismatches: reports.iter().map(|r| r.mismatches).sum(),
            examples: reports
                .iter()
                .flat_map(|r| r.examples.iter().cloned())
                .take(10)
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct LowerOutput {
    pub p: u64,
    pub input: String,
    pub lowered: String,
    pub pretty: String,
}

#[derive(Serialize)]
pub struct QeOutput {
    pub input: String,
    pub eliminated: String,
}

/// Canonical rendering: two-space pretty JSON with a trailing newline.
pub fn render<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    text
}
