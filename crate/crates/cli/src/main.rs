//! Batch interface: read a problem file, emit image descriptions and
//! membership decisions, produce preimage witnesses, and run the
//! enumeration-oracle verification.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 resource cap exceeded,
//! 3 verification mismatch.

mod output;
mod problem;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use padic_qe_core::image::{
    self, BallImageDescription, ClassBox, ImageDescription, ImageError,
};
use padic_qe_core::lifting::LiftError;
use padic_qe_core::padic::{PAdicError, PAdicNumber};
use padic_qe_core::presburger::{self, EliminationConfig, PresburgerError};
use padic_qe_core::semialg;
use padic_qe_core::unitgroup::UnitGroupError;

use output::{render, ClassTriple};
use problem::{Problem, ProblemDomain};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Resource(String),
}

#[derive(Parser)]
#[command(
    name = "padic-qe",
    about = "Images of monomial maps over Q_p: quantifier-free descriptions, membership, preimages, verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Valuation box bound for `verify` (overrides the problem file).
    #[arg(long = "box", global = true, value_name = "N")]
    box_bound: Option<i64>,
    /// Output precision for `preimage` (overrides the problem file).
    #[arg(long, global = true, value_name = "N")]
    precision: Option<u32>,
    /// Cap on subgroup size, enumeration work and formula nodes
    /// (overrides every cap in the problem file).
    #[arg(long, global = true, value_name = "N")]
    cap: Option<u64>,
    /// Also write the JSON output to this file.
    #[arg(long, global = true, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the image description of the problem's map and domain.
    Image { file: PathBuf },
    /// Decide membership of every query point.
    Decide { file: PathBuf },
    /// Produce exact preimages for the query points that are members.
    Preimage { file: PathBuf },
    /// Compare the description against the brute-force oracle on a box.
    Verify { file: PathBuf },
    /// Rewrite a semi-algebraic formula into pure power-predicate atoms.
    Lower { file: PathBuf },
    /// Eliminate quantifiers from a linear integer arithmetic formula.
    #[command(name = "presburger-qe")]
    PresburgerQe { file: PathBuf },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own help/version output still goes to stdout with code 0
            if e.use_stderr() {
                eprint!("{e}");
                return 1;
            }
            print!("{e}");
            return 0;
        }
    };
    match dispatch(&cli) {
        Ok((text, code)) => {
            print!("{text}");
            if let Some(path) = &cli.json {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 1;
                }
            }
            code
        }
        Err(CliError::Parse(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Resource(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(String, i32), CliError> {
    match &cli.command {
        Command::Image { file } => cmd_image(file, cli),
        Command::Decide { file } => cmd_decide(file, cli),
        Command::Preimage { file } => cmd_preimage(file, cli),
        Command::Verify { file } => cmd_verify(file, cli),
        Command::Lower { file } => cmd_lower(file),
        Command::PresburgerQe { file } => cmd_presburger_qe(file, cli),
    }
}

fn cmd_image(file: &Path, cli: &Cli) -> Result<(String, i32), CliError> {
    let problem = problem::load(file, cli.cap)?;
    match &problem.domain {
        ProblemDomain::Standard(domain) => {
            let desc =
                image::compute_image_with(&problem.map, domain, problem.p, &problem.limits)
                    .map_err(image_error)?;
            let out = output::ImageOutput {
                problem: problem.echo.clone(),
                p: problem.p,
                body: output::DescriptionBody::from_description(&desc),
            };
            Ok((render(&out), 0))
        }
        ProblemDomain::Ball(ball) => {
            let desc =
                BallImageDescription::compute(&problem.map, ball, problem.p, &problem.limits)
                    .map_err(image_error)?;
            let out = output::BallImageOutput::new(problem.echo.clone(), problem.p, &desc);
            Ok((render(&out), 0))
        }
    }
}

fn cmd_decide(file: &Path, cli: &Cli) -> Result<(String, i32), CliError> {
    let problem = problem::load(file, cli.cap)?;
    let decisions = decide_all(&problem)?;
    let out = output::DecideOutput {
        problem: problem.echo.clone(),
        decisions,
    };
    Ok((render(&out), 0))
}

fn decide_all(problem: &Problem) -> Result<Vec<bool>, CliError> {
    match &problem.domain {
        ProblemDomain::Standard(domain) => {
            let desc =
                image::compute_image_with(&problem.map, domain, problem.p, &problem.limits)
                    .map_err(image_error)?;
            problem
                .queries
                .iter()
                .map(|y| desc.decide_membership(y).map_err(image_error))
                .collect()
        }
        ProblemDomain::Ball(ball) => {
            let desc =
                BallImageDescription::compute(&problem.map, ball, problem.p, &problem.limits)
                    .map_err(image_error)?;
            problem
                .queries
                .iter()
                .map(|y| desc.decide_membership(y).map_err(image_error))
                .collect()
        }
    }
}

fn cmd_preimage(file: &Path, cli: &Cli) -> Result<(String, i32), CliError> {
    let problem = problem::load(file, cli.cap)?;
    let precision = cli.precision.or(problem.precision).unwrap_or(20);
    let witnesses = match &problem.domain {
        ProblemDomain::Standard(domain) => {
            let desc =
                image::compute_image_with(&problem.map, domain, problem.p, &problem.limits)
                    .map_err(image_error)?;
            problem
                .queries
                .iter()
                .map(|y| preimage_triples(&desc, y, precision))
                .collect::<Result<Vec<_>, _>>()?
        }
        ProblemDomain::Ball(ball) => {
            let desc =
                BallImageDescription::compute(&problem.map, ball, problem.p, &problem.limits)
                    .map_err(image_error)?;
            problem
                .queries
                .iter()
                .map(|y| ball_preimage_triples(&desc, y, precision))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    let out = output::PreimageOutput {
        problem: problem.echo.clone(),
        precision,
        witnesses,
    };
    Ok((render(&out), 0))
}

fn preimage_triples(
    desc: &ImageDescription,
    y: &[PAdicNumber],
    precision: u32,
) -> Result<Option<Vec<ClassTriple>>, CliError> {
    let x = desc.find_preimage(y, precision).map_err(image_error)?;
    Ok(x.map(|x| {
        x.iter()
            .map(|xi| ClassTriple::from_value(xi, precision))
            .collect()
    }))
}

fn ball_preimage_triples(
    desc: &BallImageDescription,
    y: &[PAdicNumber],
    precision: u32,
) -> Result<Option<Vec<ClassTriple>>, CliError> {
    let x = desc.find_preimage(y, precision).map_err(image_error)?;
    Ok(x.map(|x| {
        x.iter()
            .map(|xi| ClassTriple::from_value(xi, precision))
            .collect()
    }))
}

fn cmd_verify(file: &Path, cli: &Cli) -> Result<(String, i32), CliError> {
    let problem = problem::load(file, cli.cap)?;
    let box_max = cli.box_bound.or(problem.verify_box).unwrap_or(8);
    if box_max < 0 {
        return Err(CliError::Parse("--box must be non-negative".into()));
    }
    let mut reports = Vec::new();
    match &problem.domain {
        ProblemDomain::Standard(domain) => {
            let desc =
                image::compute_image_with(&problem.map, domain, problem.p, &problem.limits)
                    .map_err(image_error)?;
            let class_box =
                ClassBox::uniform(problem.map.rows(), box_max, desc.modulus_exp());
            reports.push(
                image::verify_against_oracle(&desc, &class_box, &problem.limits)
                    .map_err(image_error)?,
            );
        }
        ProblemDomain::Ball(ball) => {
            let desc =
                BallImageDescription::compute(&problem.map, ball, problem.p, &problem.limits)
                    .map_err(image_error)?;
            for piece in desc.pieces() {
                let class_box = ClassBox::uniform(
                    problem.map.rows(),
                    box_max,
                    piece.description.modulus_exp(),
                );
                reports.push(
                    image::verify_against_oracle(&piece.description, &class_box, &problem.limits)
                        .map_err(image_error)?,
                );
            }
        }
    }
    let out = output::VerifyOutput::aggregate(problem.echo.clone(), box_max, &reports);
    let code = if out.mismatches == 0 { 0 } else { 3 };
    Ok((render(&out), code))
}

#[derive(Deserialize)]
struct LowerInput {
    p: u64,
    formula: String,
}

fn cmd_lower(file: &Path) -> Result<(String, i32), CliError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", file.display())))?;
    let input: LowerInput = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", file.display())))?;
    let (formula, dim) = semialg::text::from_sexpr(&input.formula, input.p)
        .map_err(|e| CliError::Parse(format!("formula: {e}")))?;
    let lowered = semialg::lower(&formula, input.p, dim).map_err(|e| match e {
        semialg::LowerError::UnitGroup(inner) => unit_group_error(inner),
        other => CliError::Parse(other.to_string()),
    })?;
    let out = output::LowerOutput {
        p: input.p,
        input: input.formula,
        lowered: semialg::text::to_sexpr(&lowered),
        pretty: semialg::text::pretty(&lowered),
    };
    Ok((render(&out), 0))
}

#[derive(Deserialize)]
struct QeInput {
    formula: String,
    #[serde(default)]
    max_nodes: Option<u64>,
}

fn cmd_presburger_qe(file: &Path, cli: &Cli) -> Result<(String, i32), CliError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", file.display())))?;
    let input: QeInput = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", file.display())))?;
    let formula = presburger::text::from_sexpr(&input.formula)
        .map_err(|e| CliError::Parse(format!("formula: {e}")))?;
    let config = EliminationConfig {
        max_nodes: cli.cap.or(input.max_nodes).unwrap_or(1_000_000),
    };
    let eliminated =
        presburger::eliminate_with(&formula, &config).map_err(presburger_error)?;
    let out = output::QeOutput {
        input: input.formula,
        eliminated: presburger::text::to_sexpr(&eliminated),
    };
    Ok((render(&out), 0))
}

fn image_error(e: ImageError) -> CliError {
    match e {
        ImageError::EnumerationTooLarge { .. } | ImageError::RenderTooLarge(_) => {
            CliError::Resource(e.to_string())
        }
        ImageError::UnitGroup(inner) => unit_group_error(inner),
        ImageError::Presburger(inner) => presburger_error(inner),
        ImageError::Padic(PAdicError::CapExceeded { .. }) => CliError::Resource(e.to_string()),
        ImageError::Lift(LiftError::Padic(PAdicError::CapExceeded { .. })) => {
            CliError::Resource(e.to_string())
        }
        other => CliError::Parse(other.to_string()),
    }
}

fn unit_group_error(e: UnitGroupError) -> CliError {
    match e {
        UnitGroupError::CapExceeded(..) | UnitGroupError::TableCapExceeded(_) => {
            CliError::Resource(e.to_string())
        }
        other => CliError::Parse(other.to_string()),
    }
}

fn presburger_error(e: PresburgerError) -> CliError {
    match e {
        PresburgerError::ResourceLimit(_) | PresburgerError::Overflow => {
            CliError::Resource(e.to_string())
        }
        other => CliError::Parse(other.to_string()),
    }
}
