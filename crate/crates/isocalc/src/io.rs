//! JSON wire formats. Big integers travel as decimal strings, rationals as
//! "p" or "p/q" strings, multi-indices and trace indices as 1-based values.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::divisor_calculus::{DivisorClass, KernelRow};
use crate::error::{Error, Result};
use crate::minor_saturation::{SaturationResult, TraceRound};
use crate::morphism_matrix::MorphMatrix;
use crate::quad_order::{OrderDesc, OrderElem};

pub const SCHEMA_VERSION: u32 = 1;

pub fn parse_bigint(s: &str) -> Result<BigInt> {
    s.parse::<BigInt>()
        .map_err(|_| Error::InvalidInput(format!("not a decimal integer: {s:?}")))
}

pub fn parse_biguint(s: &str) -> Result<BigUint> {
    s.parse::<BigUint>()
        .map_err(|_| Error::InvalidInput(format!("not a nonnegative decimal integer: {s:?}")))
}

/// Accepts "p" or "p/q" with q > 0.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_bigint(num.trim())?;
        let den = parse_bigint(den.trim())?;
        if den.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        if den.is_negative() {
            return Err(Error::InvalidInput("denominator must be positive".into()));
        }
        Ok(BigRational::new(num, den))
    } else {
        Ok(BigRational::from_integer(parse_bigint(s.trim())?))
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElemWire {
    pub a: String,
    pub b: String,
}

impl ElemWire {
    pub fn from_elem(e: &OrderElem) -> Self {
        ElemWire { a: e.coeff_a().to_string(), b: e.coeff_b().to_string() }
    }

    pub fn to_elem(&self, order: OrderDesc) -> Result<OrderElem> {
        OrderElem::new(order, parse_bigint(&self.a)?, parse_bigint(&self.b)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixWire {
    pub order: OrderDesc,
    pub entries: Vec<Vec<ElemWire>>,
}

impl MatrixWire {
    pub fn from_matrix(m: &MorphMatrix) -> Self {
        let entries = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| ElemWire::from_elem(m.at(i, j))).collect())
            .collect();
        MatrixWire { order: m.order(), entries }
    }

    pub fn to_matrix(&self) -> Result<MorphMatrix> {
        if let OrderDesc::Quadratic { t, q } = self.order {
            // reject descriptors that are not imaginary quadratic
            OrderDesc::quadratic(t, q)?;
        }
        let rows = self
            .entries
            .iter()
            .map(|row| row.iter().map(|e| e.to_elem(self.order)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        MorphMatrix::from_rows(self.order, rows)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RowMultWire {
    pub row: Vec<ElemWire>,
    pub multiplicity: String,
}

/// A divisor class: rows with multiplicities on `E^n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassWire {
    pub order: OrderDesc,
    pub n: usize,
    pub rows: Vec<RowMultWire>,
}

impl ClassWire {
    pub fn to_class(&self) -> Result<DivisorClass> {
        let parts = self
            .rows
            .iter()
            .map(|rm| {
                let row = rm
                    .row
                    .iter()
                    .map(|e| e.to_elem(self.order))
                    .collect::<Result<Vec<_>>>()?;
                Ok((KernelRow::new(row)?, parse_biguint(&rm.multiplicity)?))
            })
            .collect::<Result<Vec<_>>>()?;
        DivisorClass::from_parts(self.order, self.n, parts)
    }
}

/// A plain family of rows on `E^n` (for the tensor-degree identity).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RowFamilyWire {
    pub order: OrderDesc,
    pub n: usize,
    pub rows: Vec<Vec<ElemWire>>,
}

impl RowFamilyWire {
    pub fn to_rows(&self) -> Result<Vec<Vec<OrderElem>>> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|e| e.to_elem(self.order)).collect())
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceRoundWire {
    /// 1-based column that received the update.
    pub column: usize,
    pub round: usize,
    /// 1-based source column index.
    pub index: usize,
    pub lambda: String,
    pub forbidden_values: usize,
    pub forbidden_indices: usize,
    pub bound: String,
}

impl TraceRoundWire {
    pub fn from_round(r: &TraceRound) -> Self {
        TraceRoundWire {
            column: r.column + 1,
            round: r.round,
            index: r.index + 1,
            lambda: r.lambda.to_string(),
            forbidden_values: r.forbidden_values,
            forbidden_indices: r.forbidden_indices,
            bound: r.bound.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SaturationWire {
    pub schema_version: u32,
    /// 1-based permutation: position k of `psi J` holds column `j[k]`.
    pub j: Vec<usize>,
    pub t: MatrixWire,
    pub trace: Vec<TraceRoundWire>,
    pub verified: bool,
}

impl SaturationWire {
    pub fn from_result(s: &SaturationResult, verified: bool) -> Self {
        SaturationWire {
            schema_version: SCHEMA_VERSION,
            j: s.j_perm.iter().map(|&c| c + 1).collect(),
            t: MatrixWire::from_matrix(&s.t_mat),
            trace: s.trace.iter().map(TraceRoundWire::from_round).collect(),
            verified,
        }
    }
}

/// Input for the order-arithmetic subcommand.
#[derive(Clone, Debug, Deserialize)]
pub struct OrderOpWire {
    pub order: OrderDesc,
    pub op: String,
    pub x: ElemWire,
    #[serde(default)]
    pub y: Option<ElemWire>,
}

/// Input for the end-to-end pipeline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineInputWire {
    pub order: OrderDesc,
    pub phi: Vec<Vec<ElemWire>>,
    pub n: usize,
    #[serde(default)]
    pub d: Option<u32>,
    #[serde(default)]
    pub deg_v: Option<String>,
    #[serde(default = "default_eta")]
    pub eta: String,
    #[serde(default = "default_c0")]
    pub c0: String,
    #[serde(default = "default_convention")]
    pub convention: crate::bound_engine::DegreeConvention,
    #[serde(default)]
    pub h_is_translate: bool,
}

fn default_eta() -> String {
    "1/100".to_string()
}

fn default_c0() -> String {
    "1".to_string()
}

fn default_convention() -> crate::bound_engine::DegreeConvention {
    crate::bound_engine::DegreeConvention::Norm
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorWire {
    pub schema_version: u32,
    pub error: String,
}

impl ErrorWire {
    pub fn new(e: &Error) -> Self {
        ErrorWire { schema_version: SCHEMA_VERSION, error: e.to_string() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3").unwrap(), BigRational::from_integer(3.into()));
        assert_eq!(
            parse_rational("1/100").unwrap(),
            BigRational::new(1.into(), 100.into())
        );
        assert_eq!(parse_rational("-7/2").unwrap(), BigRational::new((-7).into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&parse_rational("4/2").unwrap()), "2");
    }

    #[test]
    fn matrix_round_trip() {
        let json = r#"{"order":{"kind":"quadratic","t":0,"q":1},
                       "entries":[[{"a":"1","b":"1"},{"a":"0","b":"0"}],
                                  [{"a":"2","b":"-1"},{"a":"1","b":"0"}]]}"#;
        let wire: MatrixWire = serde_json::from_str(json).unwrap();
        let m = wire.to_matrix().unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.at(0, 0).norm(), BigInt::from(2));
        let back = MatrixWire::from_matrix(&m);
        assert_eq!(back.entries[1][0].a, "2");
        assert_eq!(back.entries[1][0].b, "-1");
    }

    #[test]
    fn rational_order_kind_round_trip() {
        let json = r#"{"order":{"kind":"rational"},"entries":[[{"a":"5","b":"0"}]]}"#;
        let wire: MatrixWire = serde_json::from_str(json).unwrap();
        let m = wire.to_matrix().unwrap();
        assert!(m.order().is_rational());
        // a nonzero b in a rational order is rejected
        let bad = r#"{"order":{"kind":"rational"},"entries":[[{"a":"5","b":"1"}]]}"#;
        let wire: MatrixWire = serde_json::from_str(bad).unwrap();
        assert!(wire.to_matrix().is_err());
    }

    #[test]
    fn invalid_descriptor_rejected() {
        let bad = r#"{"order":{"kind":"quadratic","t":3,"q":1},"entries":[[{"a":"1","b":"0"}]]}"#;
        let wire: MatrixWire = serde_json::from_str(bad).unwrap();
        assert!(wire.to_matrix().is_err());
    }
}
