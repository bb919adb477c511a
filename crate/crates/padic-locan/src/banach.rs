//! Finite orthonormal truncations of p-adic Banach spaces and bounded
//! operators on them.
//!
//! The basis is declared orthonormal, so the operator norm is the sup of
//! entry norms: `‖T‖ = p^(-m)` with `m` the minimum entry valuation, and
//! `T(L) ⊆ p^k L` is certified exactly by `m ≥ k`.

use crate::padic::{PadicError, PadicScalar, Valuation, DEFAULT_PRECISION};
use crate::poly::PadicPoly;
use crate::residue::ResidueMatrix;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperatorError {
    #[error("operators live on different spaces")]
    SpaceMismatch,
    #[error("matrix shape {got} does not match space dimension {want}")]
    ShapeMismatch { want: usize, got: usize },
    #[error("operator norm exceeds 1 (an entry has valuation {min_val}); it does not stabilize the lattice")]
    NormExceedsOne { min_val: i64 },
    #[error("filtration must be nonnegative and nondecreasing")]
    BadFiltration,
    #[error("basis labels must be distinct")]
    DuplicateLabels,
    #[error("entry ({row},{col}) breaks filtration-exactness")]
    NotFiltrationExact { row: usize, col: usize },
    #[error("operator is not invertible modulo p")]
    ResidueNotInvertible,
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Residue(#[from] crate::residue::ResidueError),
}

/// A finite orthonormal truncation of a p-adic Banach space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedSpace {
    pub prime: u64,
    pub dimension: usize,
    pub basis_labels: Vec<String>,
    /// Optional nondecreasing level per basis vector. When present,
    /// operators preserving it are exact on the truncation.
    pub filtration: Option<Vec<u32>>,
}

impl TruncatedSpace {
    pub fn new(
        prime: u64,
        basis_labels: Vec<String>,
        filtration: Option<Vec<u32>>,
    ) -> Result<Arc<Self>, OperatorError> {
        let dimension = basis_labels.len();
        let mut seen = std::collections::HashSet::new();
        for l in &basis_labels {
            if !seen.insert(l) {
                return Err(OperatorError::DuplicateLabels);
            }
        }
        if let Some(f) = &filtration {
            if f.len() != dimension {
                return Err(OperatorError::ShapeMismatch { want: dimension, got: f.len() });
            }
            if f.windows(2).any(|w| w[0] > w[1]) {
                return Err(OperatorError::BadFiltration);
            }
        }
        Ok(Arc::new(TruncatedSpace { prime, dimension, basis_labels, filtration }))
    }

    /// Plain d-dimensional space with labels e0..e(d-1) and no filtration.
    pub fn plain(prime: u64, dimension: usize) -> Arc<Self> {
        Self::new(prime, (0..dimension).map(|i| format!("e{i}")).collect(), None)
            .expect("distinct labels")
    }

    /// Polynomial truncation of degree ≤ d with the degree filtration.
    pub fn poly_degrees(prime: u64, max_degree: usize) -> Arc<Self> {
        Self::new(
            prime,
            (0..=max_degree).map(|i| format!("X^{i}")).collect(),
            Some((0..=max_degree as u32).collect()),
        )
        .expect("distinct labels")
    }
}

/// Whether truncation introduces error for an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exactness {
    /// The operator preserves the declared filtration, so every statement
    /// proved on the truncation holds for the represented operator.
    #[serde(rename = "filtration-exact")]
    FiltrationExact,
    /// Diagnostics are valid on the truncation only.
    #[serde(rename = "approximate")]
    Approximate,
}

/// A norm-testable linear map on a truncated space. Column `j` of the
/// matrix is the image of basis vector `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedOperator {
    pub space: Arc<TruncatedSpace>,
    /// Row-major: `matrix[i][j]` = coefficient of basis `i` in `T(basis j)`.
    pub matrix: Vec<Vec<PadicScalar>>,
    pub exactness: Exactness,
}

/// Entrywise reduction of a norm-≤1 operator modulo `p^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueOperator {
    pub exponent: u32,
    pub matrix: ResidueMatrix,
}

impl BoundedOperator {
    pub fn new(
        space: Arc<TruncatedSpace>,
        matrix: Vec<Vec<PadicScalar>>,
        exactness: Exactness,
    ) -> Result<Self, OperatorError> {
        let d = space.dimension;
        if matrix.len() != d {
            return Err(OperatorError::ShapeMismatch { want: d, got: matrix.len() });
        }
        for row in &matrix {
            if row.len() != d {
                return Err(OperatorError::ShapeMismatch { want: d, got: row.len() });
            }
        }
        let op = BoundedOperator { space, matrix, exactness };
        if op.exactness == Exactness::FiltrationExact {
            if let Some((i, j)) = op.filtration_violation() {
                return Err(OperatorError::NotFiltrationExact { row: i, col: j });
            }
        }
        Ok(op)
    }

    pub fn from_int_matrix(
        space: Arc<TruncatedSpace>,
        rows: &[Vec<i64>],
        rel_prec: u32,
        exactness: Exactness,
    ) -> Result<Self, OperatorError> {
        let p = space.prime;
        let matrix = rows
            .iter()
            .map(|r| r.iter().map(|&x| PadicScalar::from_int(p, x, rel_prec)).collect())
            .collect();
        Self::new(space, matrix, exactness)
    }

    pub fn identity(space: Arc<TruncatedSpace>, rel_prec: u32) -> Self {
        let d = space.dimension;
        let p = space.prime;
        let matrix = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        if i == j {
                            PadicScalar::one(p, rel_prec)
                        } else {
                            PadicScalar::zero(p, rel_prec as i64)
                        }
                    })
                    .collect()
            })
            .collect();
        BoundedOperator { space, matrix, exactness: Exactness::FiltrationExact }
    }

    pub fn zero(space: Arc<TruncatedSpace>, abs_prec: i64) -> Self {
        let d = space.dimension;
        let p = space.prime;
        let matrix = vec![vec![PadicScalar::zero(p, abs_prec); d]; d];
        BoundedOperator { space, matrix, exactness: Exactness::FiltrationExact }
    }

    pub fn prime(&self) -> u64 {
        self.space.prime
    }

    pub fn dim(&self) -> usize {
        self.space.dimension
    }

    fn filtration_violation(&self) -> Option<(usize, usize)> {
        let f = self.space.filtration.as_ref()?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if f[i] > f[j] && !self.matrix[i][j].is_zero() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Operator norm as a valuation bound: `‖T‖ = p^(-m)` with `m` the
    /// minimum entry valuation. `T(L) ⊆ p^k L` iff `m ≥ k`.
    pub fn norm_valuation(&self) -> Valuation {
        let mut acc: Option<Valuation> = None;
        for row in &self.matrix {
            for e in row {
                let v = e.valuation();
                acc = Some(match acc {
                    None => v,
                    Some(a) => a.min_with(v),
                });
            }
        }
        acc.unwrap_or(Valuation::Infinite { at_precision: DEFAULT_PRECISION as i64 })
    }

    /// Certify `T(L) ⊆ p^k L`: true iff every entry valuation is certified ≥ k.
    pub fn certify_image(&self, k: i64) -> bool {
        self.matrix.iter().flatten().all(|e| e.valuation().at_least(k))
    }

    pub fn norm_at_most_one(&self) -> bool {
        self.certify_image(0)
    }

    pub fn compose(&self, other: &Self) -> Result<Self, OperatorError> {
        if self.space != other.space {
            return Err(OperatorError::SpaceMismatch);
        }
        let d = self.dim();
        let p = self.prime();
        let mut out = vec![vec![PadicScalar::zero(p, 2 * DEFAULT_PRECISION as i64); d]; d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = PadicScalar::zero(p, 2 * DEFAULT_PRECISION as i64);
                for k in 0..d {
                    acc = acc.add(&self.matrix[i][k].mul(&other.matrix[k][j])?)?;
                }
                out[i][j] = acc;
            }
        }
        let exactness = match (self.exactness, other.exactness) {
            (Exactness::FiltrationExact, Exactness::FiltrationExact) => Exactness::FiltrationExact,
            _ => Exactness::Approximate,
        };
        Ok(BoundedOperator { space: self.space.clone(), matrix: out, exactness })
    }

    pub fn add(&self, other: &Self) -> Result<Self, OperatorError> {
        if self.space != other.space {
            return Err(OperatorError::SpaceMismatch);
        }
        let d = self.dim();
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let mut row = Vec::with_capacity(d);
            for j in 0..d {
                row.push(self.matrix[i][j].add(&other.matrix[i][j])?);
            }
            out.push(row);
        }
        let exactness = match (self.exactness, other.exactness) {
            (Exactness::FiltrationExact, Exactness::FiltrationExact) => Exactness::FiltrationExact,
            _ => Exactness::Approximate,
        };
        Ok(BoundedOperator { space: self.space.clone(), matrix: out, exactness })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, OperatorError> {
        self.add(&other.scale_entries(|e| e.neg()))
    }

    fn scale_entries(&self, f: impl Fn(&PadicScalar) -> PadicScalar) -> Self {
        BoundedOperator {
            space: self.space.clone(),
            matrix: self.matrix.iter().map(|r| r.iter().map(&f).collect()).collect(),
            exactness: self.exactness,
        }
    }

    pub fn scale(&self, c: &PadicScalar) -> Result<Self, OperatorError> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let mut row = Vec::with_capacity(d);
            for j in 0..d {
                row.push(self.matrix[i][j].mul(c)?);
            }
            out.push(row);
        }
        Ok(BoundedOperator { space: self.space.clone(), matrix: out, exactness: self.exactness })
    }

    /// Divide every entry by `p^k`, losslessly. The caller certifies
    /// integrality of the result (e.g. via `certify_image(k)`).
    pub fn shift(&self, k: i64) -> Self {
        self.scale_entries(|e| e.shift(k))
    }

    pub fn pow(&self, e: u32) -> Result<Self, OperatorError> {
        let mut acc = BoundedOperator::identity(self.space.clone(), DEFAULT_PRECISION);
        for _ in 0..e {
            acc = acc.compose(self)?;
        }
        Ok(acc)
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: &[PadicScalar]) -> Result<Vec<PadicScalar>, OperatorError> {
        let d = self.dim();
        if v.len() != d {
            return Err(OperatorError::ShapeMismatch { want: d, got: v.len() });
        }
        let p = self.prime();
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let mut acc = PadicScalar::zero(p, 2 * DEFAULT_PRECISION as i64);
            for j in 0..d {
                acc = acc.add(&self.matrix[i][j].mul(&v[j])?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Entrywise reduction mod `p^n`; requires norm ≤ 1.
    pub fn reduce(&self, n: u32) -> Result<ResidueOperator, OperatorError> {
        if !self.norm_at_most_one() {
            let min_val = self.norm_valuation().lower_bound();
            return Err(OperatorError::NormExceedsOne { min_val });
        }
        let d = self.dim();
        let mut entries = Vec::with_capacity(d * d);
        for row in &self.matrix {
            for e in row {
                entries.push(e.residue(n)?);
            }
        }
        Ok(ResidueOperator {
            exponent: n,
            matrix: ResidueMatrix { prime: self.prime(), exponent: n, dim: d, entries },
        })
    }

    /// True when both operators' entries agree at their common precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.space == other.space
            && self
                .matrix
                .iter()
                .flatten()
                .zip(other.matrix.iter().flatten())
                .all(|(a, b)| a.agrees_with(b))
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool, OperatorError> {
        Ok(self.compose(other)?.agrees_with(&other.compose(self)?))
    }

    /// Characteristic polynomial `det(X·I - T)`, computed division-free
    /// (Berkowitz), so it is exact at tracked precision for any dimension.
    pub fn charpoly(&self) -> Result<PadicPoly, OperatorError> {
        let d = self.dim();
        let p = self.prime();
        let one = PadicScalar::one(p, DEFAULT_PRECISION);
        if d == 0 {
            return Ok(PadicPoly::new(p, vec![one])?);
        }
        // Coefficient vectors hold the charpoly of the leading r x r block,
        // highest degree first.
        let mut coeffs: Vec<PadicScalar> = vec![one.clone()];
        for r in 1..=d {
            // Toeplitz column: t_0 = 1, t_1 = -a_rr, t_k = -(R * M^(k-2) * C).
            let a = &self.matrix[r - 1][r - 1];
            let mut t: Vec<PadicScalar> = vec![one.clone(), a.neg()];
            if r >= 2 {
                let row: Vec<&PadicScalar> = (0..r - 1).map(|j| &self.matrix[r - 1][j]).collect();
                let col: Vec<PadicScalar> =
                    (0..r - 1).map(|i| self.matrix[i][r - 1].clone()).collect();
                let mut cur = col;
                for _k in 2..=r {
                    // t_k = - row . cur
                    let mut acc = PadicScalar::zero(p, 2 * DEFAULT_PRECISION as i64);
                    for (x, y) in row.iter().zip(cur.iter()) {
                        acc = acc.add(&x.mul(y)?)?;
                    }
                    t.push(acc.neg());
                    // cur <- M * cur with M the leading (r-1) block.
                    let mut next = Vec::with_capacity(r - 1);
                    for i in 0..r - 1 {
                        let mut acc = PadicScalar::zero(p, 2 * DEFAULT_PRECISION as i64);
                        for j in 0..r - 1 {
                            acc = acc.add(&self.matrix[i][j].mul(&cur[j])?)?;
                        }
                        next.push(acc);
                    }
                    cur = next;
                }
            }
            // coeffs <- Toeplitz(t) * coeffs, shape (r+1) x r.
            let mut next = Vec::with_capacity(r + 1);
            for i in 0..=r {
                let mut acc = PadicScalar::zero(p, 2 * DEFAULT_PRECISION as i64);
                for j in 0..r {
                    if i >= j && i - j < t.len() {
                        acc = acc.add(&t[i - j].mul(&coeffs[j])?)?;
                    }
                }
                next.push(acc);
            }
            coeffs = next;
        }
        // Highest degree first -> index = degree.
        coeffs.reverse();
        Ok(PadicPoly::new(p, coeffs)?)
    }

    /// Principal block on the first `k` basis vectors. For filtration-exact
    /// operators this is the operator induced on the smaller truncation.
    pub fn principal_block(&self, k: usize) -> Result<Self, OperatorError> {
        let sub_space = TruncatedSpace::new(
            self.prime(),
            self.space.basis_labels[..k].to_vec(),
            self.space.filtration.as_ref().map(|f| f[..k].to_vec()),
        )?;
        let matrix = self.matrix[..k].iter().map(|r| r[..k].to_vec()).collect();
        BoundedOperator::new(sub_space, matrix, self.exactness)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::forward_difference;

    #[test]
    fn norm_examples() {
        let space = TruncatedSpace::plain(3, 2);
        let id = BoundedOperator::identity(space.clone(), DEFAULT_PRECISION);
        assert_eq!(id.norm_valuation(), Valuation::finite(0));
        let p_id = id.scale(&PadicScalar::from_int(3, 3, DEFAULT_PRECISION)).unwrap();
        assert_eq!(p_id.norm_valuation(), Valuation::finite(1));
        // Forward difference on degree ≤ 2 at p=2 has norm 1.
        let delta = forward_difference(2, 2, DEFAULT_PRECISION);
        assert_eq!(delta.norm_valuation(), Valuation::finite(0));
    }

    #[test]
    fn compose_and_certify() {
        let delta = forward_difference(2, 2, DEFAULT_PRECISION);
        let delta2 = delta.compose(&delta).unwrap();
        // Δ²(X²) = 2, Δ²(X) = 0: the only nonzero entry is 2 at (0, 2).
        assert!(delta2.matrix[0][2].agrees_with(&PadicScalar::from_int(2, 2, DEFAULT_PRECISION)));
        assert!(delta2.matrix[1][2].is_zero());
        assert!(delta2.certify_image(1));
        assert!(!delta.certify_image(1));
        let delta3 = delta2.compose(&delta).unwrap();
        assert!(delta3.certify_image(DEFAULT_PRECISION as i64 - 2));
        // At p=3, Δ² is not in 3L.
        let delta_3 = forward_difference(3, 2, DEFAULT_PRECISION);
        assert!(!delta_3.compose(&delta_3).unwrap().certify_image(1));
    }

    #[test]
    fn reduce_is_entrywise() {
        let space = TruncatedSpace::plain(2, 2);
        let id = BoundedOperator::identity(space.clone(), DEFAULT_PRECISION);
        let r = id.reduce(3).unwrap();
        assert_eq!(r.matrix, ResidueMatrix::identity(2, 3, 2));
        let p_id = id.scale(&PadicScalar::from_int(2, 2, DEFAULT_PRECISION)).unwrap();
        assert!(p_id.reduce(1).unwrap().matrix.is_zero());
        let half = id.shift(-1);
        assert!(half.reduce(1).is_err());
    }

    #[test]
    fn charpoly_matches_cofactor_oracle() {
        // Oracle for 2x2: X^2 - tr X + det.
        let space = TruncatedSpace::plain(5, 2);
        let t = BoundedOperator::from_int_matrix(
            space,
            &[vec![0, 1], vec![5, 0]],
            DEFAULT_PRECISION,
            Exactness::FiltrationExact,
        )
        .unwrap();
        let f = t.charpoly().unwrap();
        let expected = PadicPoly::from_ints(5, &[-5, 0, 1], DEFAULT_PRECISION);
        for i in 0..=2 {
            assert!(f.coeff(i).agrees_with(&expected.coeff(i)), "coeff {i}");
        }
        // diag(1,2) at p=7 -> X^2 - 3X + 2.
        let space = TruncatedSpace::plain(7, 2);
        let t = BoundedOperator::from_int_matrix(
            space,
            &[vec![1, 0], vec![0, 2]],
            DEFAULT_PRECISION,
            Exactness::FiltrationExact,
        )
        .unwrap();
        let f = t.charpoly().unwrap();
        let expected = PadicPoly::from_ints(7, &[2, -3, 1], DEFAULT_PRECISION);
        for i in 0..=2 {
            assert!(f.coeff(i).agrees_with(&expected.coeff(i)), "coeff {i}");
        }
        // identity d=3 -> (X-1)^3 = X^3 - 3X^2 + 3X - 1.
        let id = BoundedOperator::identity(TruncatedSpace::plain(3, 3), DEFAULT_PRECISION);
        let f = id.charpoly().unwrap();
        let expected = PadicPoly::from_ints(3, &[-1, 3, -3, 1], DEFAULT_PRECISION);
        for i in 0..=3 {
            assert!(f.coeff(i).agrees_with(&expected.coeff(i)), "coeff {i}");
        }
    }

    #[test]
    fn filtration_exactness_is_enforced() {
        let space = TruncatedSpace::poly_degrees(2, 1);
        // Lower-triangular entry (1,0) breaks degree preservation.
        let bad = BoundedOperator::from_int_matrix(
            space.clone(),
            &[vec![1, 0], vec![1, 1]],
            DEFAULT_PRECISION,
            Exactness::FiltrationExact,
        );
        assert!(matches!(bad, Err(OperatorError::NotFiltrationExact { row: 1, col: 0 })));
        let ok = BoundedOperator::from_int_matrix(
            space,
            &[vec![1, 0], vec![1, 1]],
            DEFAULT_PRECISION,
            Exactness::Approximate,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn truncation_consistency_for_filtration_exact() {
        // Products of filtration-exact operators restrict to principal blocks.
        let big = crate::fixtures::translation_operator(2, 5, DEFAULT_PRECISION);
        let small = crate::fixtures::translation_operator(2, 3, DEFAULT_PRECISION);
        let big_sq = big.compose(&big).unwrap();
        let small_sq = small.compose(&small).unwrap();
        let block = big_sq.principal_block(4).unwrap();
        assert!(block.agrees_with(&small_sq));
    }
}
