//! Command-line surface: every subcommand reads JSON (file or stdin) and
//! writes a single JSON document to standard output.

use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;

use crate::bound_engine::{thm2_bound, BoundParams, DegreeConvention, DEFAULT_PRECISION};
use crate::divisor_calculus::{degree_int, gael_check};
use crate::error::{Error, Result};
use crate::io::{
    format_rational, parse_rational, ClassWire, ElemWire, MatrixWire, OrderOpWire,
    PipelineInputWire, RowFamilyWire, SaturationWire, SCHEMA_VERSION,
};
use crate::minor_saturation::saturate_minors;
use crate::morphism_matrix::{dual_isogeny, Isogeny};
use crate::pipeline::{run_pipeline, PipelineInput};
use crate::suite::{run_suite, SuiteConfig};

#[derive(Parser)]
#[command(name = "isocalc", version, about = "Exact isogeny-matrix calculus and certified lower bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Arithmetic in the endomorphism order: add, sub, mul, conj, norm, try-div
    Order {
        #[arg(long)]
        op: String,
        /// JSON file with {order, x, y?}; "-" reads stdin
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Determinant of a square matrix
    Det {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Dual isogeny with its minimal integer multiplier
    Dual {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Column permutation and unimodular transform making all minors nonzero
    Saturate {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Intersection degree of a divisor class
    Degree {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Tensor-degree identity check for a row family
    #[command(name = "gael-check")]
    GaelCheck {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Certified lower bound from explicit degrees
    Bound {
        #[arg(long = "N")]
        big_n: u32,
        #[arg(long = "n")]
        n: u32,
        #[arg(long = "d")]
        d: u32,
        /// rational, e.g. "1/100"
        #[arg(long)]
        eta: String,
        /// positive rational; the opaque base constant
        #[arg(long)]
        c0: String,
        #[arg(long = "degH")]
        deg_h: String,
        #[arg(long = "degV")]
        deg_v: String,
        /// "norm" or "paper"
        #[arg(long, default_value = "norm")]
        convention: String,
        /// working precision in bits (ISOCALC_PRECISION overrides the default)
        #[arg(long)]
        precision: Option<u32>,
        /// apply the translate halving to the final constant
        #[arg(long)]
        translate: bool,
    },
    /// Full construction from an isogeny presenting a subvariety
    Pipeline {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        precision: Option<u32>,
    },
    /// Run the verification suite
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// enumeration budget in points
        #[arg(long)]
        budget: Option<u128>,
    },
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn effective_precision(flag: Option<u32>) -> u32 {
    if let Some(p) = flag {
        return p;
    }
    if let Ok(v) = std::env::var("ISOCALC_PRECISION") {
        if let Ok(p) = v.parse::<u32>() {
            return p;
        }
    }
    DEFAULT_PRECISION
}

fn parse_convention(s: &str) -> Result<DegreeConvention> {
    match s {
        "norm" => Ok(DegreeConvention::Norm),
        "paper" => Ok(DegreeConvention::Paper),
        other => Err(Error::InvalidInput(format!(
            "unknown convention {other:?}; expected \"norm\" or \"paper\""
        ))),
    }
}

fn emit<T: Serialize>(doc: &T) -> Result<()> {
    println!("{}", serde_json::to_string(doc)?);
    Ok(())
}

#[derive(Serialize)]
struct OrderOutDoc {
    schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<ElemWire>,
    #[serde(skip_serializing_if = "Option::is_none")]
    norm: Option<String>,
}

#[derive(Serialize)]
struct DetDoc {
    schema_version: u32,
    det: ElemWire,
    norm_det: String,
}

#[derive(Serialize)]
struct DualDoc {
    schema_version: u32,
    alpha: String,
    dual: MatrixWire,
}

#[derive(Serialize)]
struct DegreeDoc {
    schema_version: u32,
    n: usize,
    degree: String,
}

#[derive(Serialize)]
struct GaelDoc {
    schema_version: u32,
    lhs: String,
    rhs: String,
    equal: bool,
}

#[derive(Serialize)]
struct BoundDoc {
    schema_version: u32,
    convention: DegreeConvention,
    #[serde(flatten)]
    bound: crate::bound_engine::CertifiedBound,
}

/// Run one parsed command. Returns the process exit code for successful
/// dispatch; domain errors surface as `Err`.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Order { op, input } => {
            let wire: OrderOpWire = serde_json::from_str(&read_input(&input)?)?;
            let x = wire.x.to_elem(wire.order)?;
            let y = wire.y.as_ref().map(|y| y.to_elem(wire.order)).transpose()?;
            let need_y = || y.clone().ok_or_else(|| Error::InvalidInput("op needs y".into()));
            let doc = match op.as_str() {
                "add" => OrderOutDoc {
                    schema_version: SCHEMA_VERSION,
                    result: Some(ElemWire::from_elem(&x.checked_add(&need_y()?)?)),
                    norm: None,
                },
                "sub" => OrderOutDoc {
                    schema_version: SCHEMA_VERSION,
                    result: Some(ElemWire::from_elem(&x.checked_sub(&need_y()?)?)),
                    norm: None,
                },
                "mul" => OrderOutDoc {
                    schema_version: SCHEMA_VERSION,
                    result: Some(ElemWire::from_elem(&x.checked_mul(&need_y()?)?)),
                    norm: None,
                },
                "try-div" => OrderOutDoc {
                    schema_version: SCHEMA_VERSION,
                    result: Some(ElemWire::from_elem(&x.try_div(&need_y()?)?)),
                    norm: None,
                },
                "conj" => OrderOutDoc {
                    schema_version: SCHEMA_VERSION,
                    result: Some(ElemWire::from_elem(&x.conj())),
                    norm: None,
                },
                "norm" => OrderOutDoc {
                    schema_version: SCHEMA_VERSION,
                    result: None,
                    norm: Some(x.norm().to_string()),
                },
                other => {
                    return Err(Error::InvalidInput(format!("unknown op {other:?}")));
                }
            };
            emit(&doc)?;
        }
        Command::Det { input } => {
            let wire: MatrixWire = serde_json::from_str(&read_input(&input)?)?;
            let m = wire.to_matrix()?;
            let det = m.det()?;
            emit(&DetDoc {
                schema_version: SCHEMA_VERSION,
                norm_det: det.norm().to_string(),
                det: ElemWire::from_elem(&det),
            })?;
        }
        Command::Dual { input } => {
            let wire: MatrixWire = serde_json::from_str(&read_input(&input)?)?;
            let iso = Isogeny::new(wire.to_matrix()?)?;
            let dual = dual_isogeny(&iso);
            emit(&DualDoc {
                schema_version: SCHEMA_VERSION,
                alpha: dual.alpha.to_string(),
                dual: MatrixWire::from_matrix(dual.dual.matrix()),
            })?;
        }
        Command::Saturate { input } => {
            let wire: MatrixWire = serde_json::from_str(&read_input(&input)?)?;
            let psi = wire.to_matrix()?;
            let sat = saturate_minors(&psi)?;
            let verified = sat.verify(&psi).is_ok();
            emit(&SaturationWire::from_result(&sat, verified))?;
        }
        Command::Degree { input } => {
            let wire: ClassWire = serde_json::from_str(&read_input(&input)?)?;
            let class = wire.to_class()?;
            emit(&DegreeDoc {
                schema_version: SCHEMA_VERSION,
                n: class.dim(),
                degree: degree_int(&class).to_string(),
            })?;
        }
        Command::GaelCheck { input } => {
            let wire: RowFamilyWire = serde_json::from_str(&read_input(&input)?)?;
            let rows = wire.to_rows()?;
            let check = gael_check(&rows, wire.n)?;
            emit(&GaelDoc {
                schema_version: SCHEMA_VERSION,
                lhs: check.lhs.to_string(),
                rhs: check.rhs.to_string(),
                equal: check.equal,
            })?;
        }
        Command::Bound {
            big_n,
            n,
            d,
            eta,
            c0,
            deg_h,
            deg_v,
            convention,
            precision,
            translate,
        } => {
            let convention = parse_convention(&convention)?;
            let params =
                BoundParams::new(big_n, n, d, parse_rational(&eta)?, parse_rational(&c0)?, convention)?;
            let deg_h = parse_rational(&deg_h)?;
            let deg_v = parse_rational(&deg_v)?;
            let prec = effective_precision(precision);
            let bound = thm2_bound(&deg_h, &deg_v, &params, translate, prec)?;
            emit(&BoundDoc { schema_version: SCHEMA_VERSION, convention, bound })?;
        }
        Command::Pipeline { input, precision } => {
            let wire: PipelineInputWire = serde_json::from_str(&read_input(&input)?)?;
            let parsed = PipelineInput::from_wire(&wire)?;
            let prec = effective_precision(precision);
            let report = run_pipeline(&parsed, prec)?;
            emit(&report)?;
        }
        Command::Verify { seed, budget } => {
            let config = SuiteConfig {
                seed,
                budget: budget.unwrap_or(crate::torsion_oracle::DEFAULT_BUDGET),
            };
            let report = run_suite(config);
            emit(&report)?;
            if !report.all_passed {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

impl PipelineInput {
    pub fn from_wire(wire: &PipelineInputWire) -> Result<Self> {
        let mat = MatrixWire { order: wire.order, entries: wire.phi.clone() }.to_matrix()?;
        let phi = Isogeny::new(mat)?;
        let deg_v = wire.deg_v.as_deref().map(parse_rational).transpose()?;
        if let Some(v) = &deg_v {
            if v < &num_rational::BigRational::from_integer(BigInt::from(1)) {
                return Err(Error::InvalidParams("deg_v must be >= 1".into()));
            }
        }
        Ok(PipelineInput {
            phi,
            n: wire.n,
            d: wire.d,
            deg_v,
            eta: parse_rational(&wire.eta)?,
            c0: parse_rational(&wire.c0)?,
            convention: wire.convention,
            h_is_translate: wire.h_is_translate,
        })
    }
}

// keep the formatter import alive for report rendering helpers
#[allow(unused_imports)]
use format_rational as _format_rational;
