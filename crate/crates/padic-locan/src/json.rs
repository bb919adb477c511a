//! JSON input schemas and report assembly for the diagnostics.
//!
//! Inputs accept scalars either as plain integers (exact at the ambient
//! precision) or as the full `{"val","unit","prec"}` encoding. Reports are
//! always emitted in the full canonical encoding, field order fixed by the
//! struct definitions, and contain no floating point anywhere.

use crate::banach::{BoundedOperator, Exactness, TruncatedSpace};
use crate::iwasawa::{GroupAction, PolydiscFunction};
use crate::locan::OperatorAnalysis;
use crate::mahler::{AnalyticityReport, MahlerSeries, Tail, ToyAdmissible};
use crate::padic::{PadicScalar, ScalarRepr, Valuation, DEFAULT_PRECISION};
use crate::poly::PadicPoly;
use crate::pseudorep::{GroupTable, ReducibilityReport, TraceFunction, TraceReport};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("json parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("matrix row {row} has length {got}, expected {want}")]
    RowLength { row: usize, want: usize, got: usize },
    #[error("matrix has {got} rows, expected {want}")]
    RowCount { want: usize, got: usize },
    #[error("scalar at row {row}, column {col} is invalid: {reason}")]
    BadScalar { row: usize, col: usize, reason: String },
    #[error("prime {0} is not prime")]
    NotPrime(u64),
    #[error("precision must be ≥ 1, got {0}")]
    BadPrecision(i64),
    #[error("filtration length {got} does not match basis length {want}")]
    FiltrationLength { want: usize, got: usize },
    #[error("declared identity {declared} does not match the table identity {actual}")]
    IdentityMismatch { declared: usize, actual: usize },
    #[error("declared inverse table does not match the multiplication table at element {0}")]
    InverseMismatch(usize),
    #[error("{0}")]
    Invalid(String),
}

/// A scalar in input position: a bare integer or the full encoding.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Int(i64),
    Full(ScalarRepr),
}

impl ScalarSpec {
    pub fn to_scalar(&self, prime: u64, prec: u32) -> Result<PadicScalar, SchemaError> {
        match self {
            ScalarSpec::Int(n) => Ok(PadicScalar::from_int(prime, *n, prec)),
            ScalarSpec::Full(repr) => PadicScalar::from_repr(prime, repr)
                .map_err(|e| SchemaError::Invalid(e.to_string())),
        }
    }
}

/// Operator input: `{"prime", "prec", "basis", "filtration", "matrix", "exact"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub prime: u64,
    #[serde(default = "default_prec")]
    pub prec: u32,
    pub basis: Vec<String>,
    #[serde(default)]
    pub filtration: Option<Vec<u32>>,
    pub matrix: Vec<Vec<ScalarSpec>>,
    #[serde(default = "default_true")]
    pub exact: bool,
}

fn default_prec() -> u32 {
    DEFAULT_PRECISION
}

fn default_true() -> bool {
    true
}

impl OperatorSpec {
    pub fn validate_shape(&self) -> Result<(), SchemaError> {
        if !crate::padic::is_prime_u64(self.prime) {
            return Err(SchemaError::NotPrime(self.prime));
        }
        if self.prec < 1 {
            return Err(SchemaError::BadPrecision(self.prec as i64));
        }
        let d = self.basis.len();
        if self.matrix.len() != d {
            return Err(SchemaError::RowCount { want: d, got: self.matrix.len() });
        }
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != d {
                return Err(SchemaError::RowLength { row: i, want: d, got: row.len() });
            }
            for (j, s) in row.iter().enumerate() {
                s.to_scalar(self.prime, self.prec).map_err(|e| SchemaError::BadScalar {
                    row: i,
                    col: j,
                    reason: e.to_string(),
                })?;
            }
        }
        if let Some(f) = &self.filtration {
            if f.len() != d {
                return Err(SchemaError::FiltrationLength { want: d, got: f.len() });
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<BoundedOperator, SchemaError> {
        self.validate_shape()?;
        let space = TruncatedSpace::new(self.prime, self.basis.clone(), self.filtration.clone())
            .map_err(|e| SchemaError::Invalid(e.to_string()))?;
        let matrix = self
            .matrix
            .iter()
            .map(|row| {
                row.iter().map(|s| s.to_scalar(self.prime, self.prec)).collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let exactness = if self.exact { Exactness::FiltrationExact } else { Exactness::Approximate };
        BoundedOperator::new(space, matrix, exactness).map_err(|e| SchemaError::Invalid(e.to_string()))
    }

    pub fn from_operator(op: &BoundedOperator) -> Self {
        OperatorSpec {
            prime: op.prime(),
            prec: DEFAULT_PRECISION,
            basis: op.space.basis_labels.clone(),
            filtration: op.space.filtration.clone(),
            matrix: op
                .matrix
                .iter()
                .map(|row| row.iter().map(|s| ScalarSpec::Full(s.to_repr())).collect())
                .collect(),
            exact: op.exactness == Exactness::FiltrationExact,
        }
    }
}

/// Action input: a list of operator specs over one space.
pub type ActionSpec = Vec<OperatorSpec>;

pub fn build_action(specs: &ActionSpec) -> Result<GroupAction, SchemaError> {
    let gens = specs.iter().map(|s| s.build()).collect::<Result<Vec<_>, _>>()?;
    GroupAction::new(gens).map_err(|e| SchemaError::Invalid(e.to_string()))
}

/// One polydisc term: coefficient times `U^u * S^s` (multi-indices).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    pub coeff: ScalarSpec,
    pub u: Vec<u32>,
    pub s: Vec<u32>,
}

/// Polydisc function input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub prime: u64,
    #[serde(default = "default_prec")]
    pub prec: u32,
    pub arity: usize,
    pub terms: Vec<TermSpec>,
}

impl FunctionSpec {
    pub fn build(&self) -> Result<PolydiscFunction, SchemaError> {
        if !crate::padic::is_prime_u64(self.prime) {
            return Err(SchemaError::NotPrime(self.prime));
        }
        let mut f = PolydiscFunction::new(self.prime, self.arity);
        for (i, t) in self.terms.iter().enumerate() {
            let c = t.coeff.to_scalar(self.prime, self.prec)?;
            f.add_term(t.u.clone(), t.s.clone(), c)
                .map_err(|e| SchemaError::Invalid(format!("term {i}: {e}")))?;
        }
        Ok(f)
    }
}

/// Samples of a continuous function at consecutive integers `0..=M`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplesSpec {
    pub prime: u64,
    #[serde(default = "default_prec")]
    pub prec: u32,
    pub samples: Vec<ScalarSpec>,
    /// `"zero"`, an integer bound, or absent.
    #[serde(default)]
    pub tail: Option<serde_json::Value>,
}

impl SamplesSpec {
    pub fn build(&self) -> Result<(Vec<PadicScalar>, Tail), SchemaError> {
        if !crate::padic::is_prime_u64(self.prime) {
            return Err(SchemaError::NotPrime(self.prime));
        }
        let samples = self
            .samples
            .iter()
            .map(|s| s.to_scalar(self.prime, self.prec))
            .collect::<Result<Vec<_>, _>>()?;
        let tail = match &self.tail {
            None => Tail::Unknown,
            Some(serde_json::Value::Null) => Tail::Unknown,
            Some(serde_json::Value::String(s)) if s == "zero" => Tail::Zero,
            Some(serde_json::Value::Number(n)) => {
                let bound = n
                    .as_i64()
                    .ok_or_else(|| SchemaError::Invalid("tail bound must be an integer".into()))?;
                Tail::AtLeast { bound }
            }
            Some(other) => {
                return Err(SchemaError::Invalid(format!("bad tail: {other}")));
            }
        };
        Ok((samples, tail))
    }
}

/// Toy admissible model input: A-generators as matrices on the `p^j`-point
/// function space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub prime: u64,
    pub j: u32,
    pub level: u32,
    #[serde(default = "default_prec")]
    pub prec: u32,
    pub generators: Vec<Vec<Vec<ScalarSpec>>>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<ToyAdmissible, SchemaError> {
        if !crate::padic::is_prime_u64(self.prime) {
            return Err(SchemaError::NotPrime(self.prime));
        }
        let dim = (self.prime as usize).pow(self.j);
        let space = TruncatedSpace::plain(self.prime, dim);
        let mut gens = Vec::with_capacity(self.generators.len());
        for (gi, rows) in self.generators.iter().enumerate() {
            if rows.len() != dim {
                return Err(SchemaError::RowCount { want: dim, got: rows.len() });
            }
            let mut matrix = Vec::with_capacity(dim);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != dim {
                    return Err(SchemaError::RowLength { row: i, want: dim, got: row.len() });
                }
                matrix.push(
                    row.iter()
                        .map(|s| s.to_scalar(self.prime, self.prec))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            gens.push(
                BoundedOperator::new(space.clone(), matrix, Exactness::FiltrationExact)
                    .map_err(|e| SchemaError::Invalid(format!("generator {gi}: {e}")))?,
            );
        }
        ToyAdmissible::new(self.prime, self.j, self.level, gens, self.prec)
            .map_err(|e| SchemaError::Invalid(e.to_string()))
    }
}

/// Group input: multiplication table, with optional declared identity and
/// inverse table that are verified against the table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSpec {
    pub mul: Vec<Vec<usize>>,
    #[serde(default)]
    pub identity: Option<usize>,
    #[serde(default)]
    pub inverse: Option<Vec<usize>>,
}

impl GroupSpec {
    pub fn build(&self) -> Result<GroupTable, SchemaError> {
        let table = GroupTable::new(self.mul.clone()).map_err(|e| SchemaError::Invalid(e.to_string()))?;
        if let Some(declared) = self.identity {
            if declared != table.identity() {
                return Err(SchemaError::IdentityMismatch {
                    declared,
                    actual: table.identity(),
                });
            }
        }
        if let Some(inv) = &self.inverse {
            for (i, &j) in inv.iter().enumerate() {
                if i >= table.order() || j != table.inv(i) {
                    return Err(SchemaError::InverseMismatch(i));
                }
            }
        }
        Ok(table)
    }
}

/// Trace input: one value per element plus the distinguished involution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceSpec {
    pub prime: u64,
    #[serde(default = "default_prec")]
    pub prec: u32,
    pub values: Vec<ScalarSpec>,
    pub sigma_star: usize,
}

impl TraceSpec {
    pub fn build(&self, table: GroupTable) -> Result<TraceFunction, SchemaError> {
        if !crate::padic::is_prime_u64(self.prime) {
            return Err(SchemaError::NotPrime(self.prime));
        }
        let values = self
            .values
            .iter()
            .map(|s| s.to_scalar(self.prime, self.prec))
            .collect::<Result<Vec<_>, _>>()?;
        TraceFunction::new(table, values, self.sigma_star)
            .map_err(|e| SchemaError::Invalid(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

pub fn poly_to_repr(f: &PadicPoly) -> Vec<ScalarRepr> {
    f.coeffs().iter().map(|c| c.to_repr()).collect()
}

pub fn matrix_to_repr(op: &BoundedOperator) -> Vec<Vec<ScalarRepr>> {
    op.matrix.iter().map(|row| row.iter().map(|s| s.to_repr()).collect()).collect()
}

/// Full operator-analysis report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub prime: u64,
    pub top_nilpotent: bool,
    pub nilpotency_index: Option<u32>,
    pub locan_degree: Option<u32>,
    pub witness_poly: Vec<ScalarRepr>,
    pub closure_rank_mod_p: usize,
    pub valid_on_truncation_only: bool,
}

pub fn analyze_report(
    op: &BoundedOperator,
    analysis: &OperatorAnalysis,
    witness: &PadicPoly,
) -> AnalyzeReport {
    AnalyzeReport {
        prime: op.prime(),
        top_nilpotent: analysis.top_nilpotent,
        nilpotency_index: analysis.nilpotency_index,
        locan_degree: analysis.locan_degree,
        witness_poly: poly_to_repr(witness),
        closure_rank_mod_p: analysis.closure_rank_mod_p,
        valid_on_truncation_only: op.exactness == Exactness::Approximate,
    }
}

/// Report of a polydisc evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtendReport {
    pub prime: u64,
    pub n_min: u32,
    pub n_used: u32,
    pub result_matrix: Vec<Vec<ScalarRepr>>,
    /// Norm as a valuation bound: the norm is `p^(-norm_exponent)`.
    pub norm: Valuation,
}

/// Report of a Mahler analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MahlerReport {
    pub prime: u64,
    pub coefficients: Vec<ScalarRepr>,
    pub sup_valuation: Valuation,
    pub analyticity: AnalyticityReport,
}

pub fn mahler_report(series: &MahlerSeries, analyticity: AnalyticityReport) -> MahlerReport {
    MahlerReport {
        prime: series.prime,
        coefficients: series.coeffs.iter().map(|c| c.to_repr()).collect(),
        sup_valuation: series.sup_valuation(),
        analyticity,
    }
}

/// Full pseudo-representation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PseudorepReport {
    pub prime: u64,
    pub validation: TraceReport,
    pub reducibility: Option<ReducibilityReport>,
    pub reconstruction: Option<ReconstructionReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub pivot: Option<(usize, usize)>,
    pub multiplicative: bool,
    pub trace_matches: bool,
    pub det_matches: bool,
    pub matrices: Option<Vec<Vec<Vec<ScalarRepr>>>>,
    pub failure: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_spec_round_trip() {
        let text = r#"{
            "prime": 2,
            "prec": 20,
            "basis": ["X^0", "X^1", "X^2"],
            "filtration": [0, 1, 2],
            "matrix": [[1, 1, 1], [0, 1, 2], [0, 0, 1]],
            "exact": true
        }"#;
        let spec: OperatorSpec = serde_json::from_str(text).unwrap();
        let op = spec.build().unwrap();
        let expected = crate::fixtures::translation_operator(2, 2, 20);
        assert!(op.agrees_with(&expected));
        // Canonical re-serialization is byte-stable.
        let round = OperatorSpec::from_operator(&op);
        let a = serde_json::to_string_pretty(&round).unwrap();
        let b = serde_json::to_string_pretty(&round).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shape_errors_name_the_row() {
        let text = r#"{
            "prime": 2,
            "basis": ["a", "b"],
            "matrix": [[1, 0], [0]],
            "exact": true
        }"#;
        let spec: OperatorSpec = serde_json::from_str(text).unwrap();
        match spec.validate_shape() {
            Err(SchemaError::RowLength { row: 1, want: 2, got: 1 }) => {}
            other => panic!("expected row-length error, got {other:?}"),
        }
    }

    #[test]
    fn scalar_spec_rejects_non_coprime_unit() {
        let text = r#"{
            "prime": 5,
            "basis": ["a"],
            "matrix": [[{"val": 0, "unit": "10", "prec": 4}]],
            "exact": true
        }"#;
        let spec: OperatorSpec = serde_json::from_str(text).unwrap();
        assert!(matches!(spec.validate_shape(), Err(SchemaError::BadScalar { row: 0, col: 0, .. })));
    }

    #[test]
    fn full_scalar_encoding_round_trips() {
        let s = PadicScalar::from_int(7, -21, 6);
        let repr = s.to_repr();
        let back = PadicScalar::from_repr(7, &repr).unwrap();
        assert_eq!(s, back);
        let z = PadicScalar::zero(7, 4);
        assert_eq!(PadicScalar::from_repr(7, &z.to_repr()).unwrap(), z);
    }
}
