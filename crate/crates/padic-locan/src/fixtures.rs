//! Deterministic generators for test objects: translation operators on
//! polynomial truncations, seeded norm-≤1 matrices with nilpotent residue,
//! finite-group trace fixtures, and toy admissible models.
//!
//! Reproducibility contract: identical parameters + seed yield bit-identical
//! fixtures on every platform. The PRNG is SplitMix64 (Steele-Lea-Flood),
//! with its published constants inlined below; iteration order is fixed.

use crate::banach::{BoundedOperator, Exactness, TruncatedSpace};
use crate::mahler::ToyAdmissible;
use crate::padic::PadicScalar;
use crate::pseudorep::{GroupTable, PseudorepError, TraceFunction};
use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixtureError {
    #[error("prime {0} unsupported for this fixture: {1}")]
    UnsupportedPrime(u64, &'static str),
    #[error(transparent)]
    Pseudorep(#[from] PseudorepError),
}

/// SplitMix64. One 64-bit word of state; full period 2^64.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, bound)` by rejection, `bound ≥ 1`.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound >= 1);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }
}

/// Binomial coefficient as an exact big integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Translation `F(X) -> F(X+1)` on the degree ≤ `max_degree` truncation of
/// `Q_p<X>`: column `j` holds the binomial coefficients of `(X+1)^j`.
/// Degree-filtration-exact by construction.
pub fn translation_operator(prime: u64, max_degree: usize, rel_prec: u32) -> BoundedOperator {
    let space = TruncatedSpace::poly_degrees(prime, max_degree);
    let d = max_degree + 1;
    let mut matrix = vec![vec![PadicScalar::zero(prime, rel_prec as i64); d]; d];
    for j in 0..d {
        for i in 0..=j {
            matrix[i][j] =
                PadicScalar::from_bigint(prime, &binomial(j as u64, i as u64), rel_prec);
        }
    }
    BoundedOperator::new(space, matrix, Exactness::FiltrationExact).expect("upper triangular")
}

/// Forward difference `Δ = T - I` on the same truncation.
pub fn forward_difference(prime: u64, max_degree: usize, rel_prec: u32) -> BoundedOperator {
    let t = translation_operator(prime, max_degree, rel_prec);
    let id = BoundedOperator::identity(t.space.clone(), rel_prec);
    t.sub(&id).expect("same space")
}

/// Seeded norm-≤1 operator whose mod-p residue is strictly triangular after
/// a change of basis, hence nilpotent. Deterministic in `(p, d, seed)`.
///
/// Construction: strictly upper triangular digits in `[0, p)`, plus `p`
/// times a dense digit matrix, conjugated by a few elementary shears (which
/// are unimodular, so the conjugation is exact over `Z`).
pub fn random_nilres_operator(
    prime: u64,
    d: usize,
    seed: u64,
    rel_prec: u32,
) -> BoundedOperator {
    let mut rng = SplitMix64::new(seed ^ (prime.wrapping_mul(0xD6E8FEB86659FD93)) ^ d as u64);
    let mut m = vec![vec![BigInt::from(0); d]; d];
    for i in 0..d {
        for j in 0..d {
            if j > i {
                m[i][j] = BigInt::from(rng.below(prime));
            }
            // p * (dense digits): keeps the residue unchanged.
            m[i][j] += BigInt::from(prime) * BigInt::from(rng.below(prime * prime));
        }
    }
    // Conjugate by elementary shears E_{a,b}(c): row_a += c * row_b, then
    // col_b -= c * col_a, which applies E M E^{-1} without inverting.
    for _ in 0..2 * d {
        let a = rng.below(d as u64) as usize;
        let mut b = rng.below(d as u64) as usize;
        if a == b {
            b = (b + 1) % d;
        }
        if d == 1 {
            break;
        }
        let c = BigInt::from(rng.below(prime));
        for j in 0..d {
            let add = &c * &m[b][j];
            m[a][j] += add;
        }
        for i in 0..d {
            let sub = &c * &m[i][a];
            m[i][b] -= sub;
        }
    }
    let space = TruncatedSpace::plain(prime, d);
    let matrix = m
        .iter()
        .map(|row| row.iter().map(|x| PadicScalar::from_bigint(prime, x, rel_prec)).collect())
        .collect();
    BoundedOperator::new(space, matrix, Exactness::FiltrationExact).expect("plain space")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupTraceKind {
    /// Trace of the standard 2-dimensional representation of S3.
    S3Standard,
    /// Sum of two characters of the Klein four-group; reducible by design.
    CharSum,
    /// Standard 2-dimensional representation of the dihedral group of order 8.
    Dihedral,
}

/// A generated trace fixture together with the oracle matrices it came from.
pub struct GroupTraceFixture {
    pub table: GroupTable,
    pub trace: TraceFunction,
    /// Explicit 2x2 integer matrices realizing the trace, when the fixture
    /// comes from an actual representation; element order matches the table.
    pub oracle_matrices: Option<Vec<[[i64; 2]; 2]>>,
}

fn mat_mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Build a group table by closing a generating set of 2x2 integer matrices
/// under multiplication. Element 0 is the identity.
fn close_matrix_group(gens: &[[[i64; 2]; 2]]) -> (Vec<[[i64; 2]; 2]>, GroupTable) {
    let id = [[1, 0], [0, 1]];
    let mut elems: Vec<[[i64; 2]; 2]> = vec![id];
    loop {
        let mut added = false;
        let snapshot = elems.clone();
        for e in &snapshot {
            for g in gens {
                let prod = mat_mul(*e, *g);
                if !elems.contains(&prod) {
                    elems.push(prod);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    let order = elems.len();
    let mut mul = vec![vec![0usize; order]; order];
    for (i, a) in elems.iter().enumerate() {
        for (j, b) in elems.iter().enumerate() {
            let prod = mat_mul(*a, *b);
            mul[i][j] = elems.iter().position(|e| *e == prod).expect("closed");
        }
    }
    let table = GroupTable::new(mul).expect("group axioms hold for a matrix group");
    (elems, table)
}

pub fn make_group_trace(
    kind: GroupTraceKind,
    prime: u64,
    rel_prec: u32,
) -> Result<GroupTraceFixture, FixtureError> {
    match kind {
        GroupTraceKind::S3Standard => {
            if prime < 5 {
                return Err(FixtureError::UnsupportedPrime(
                    prime,
                    "s3-standard needs p ≥ 5 (2 and 3 must be units)",
                ));
            }
            // c of order 3, s a reflection: s c s = c^2.
            let c = [[0, -1], [1, -1]];
            let s = [[0, 1], [1, 0]];
            let (elems, table) = close_matrix_group(&[c, s]);
            let values: Vec<PadicScalar> = elems
                .iter()
                .map(|m| PadicScalar::from_int(prime, m[0][0] + m[1][1], rel_prec))
                .collect();
            let sigma_star = elems.iter().position(|e| *e == s).expect("s in group");
            let trace = TraceFunction::new(table.clone(), values, sigma_star)?;
            Ok(GroupTraceFixture { table, trace, oracle_matrices: Some(elems) })
        }
        GroupTraceKind::CharSum => {
            // Klein four-group as diagonal sign matrices; trace = chi1 + chi2
            // with chi1 trivial and chi2 the first-coordinate sign.
            let a = [[-1, 0], [0, 1]];
            let b = [[1, 0], [0, -1]];
            let (elems, table) = close_matrix_group(&[a, b]);
            let values: Vec<PadicScalar> = elems
                .iter()
                .map(|m| PadicScalar::from_int(prime, 1 + m[0][0], rel_prec))
                .collect();
            let sigma_star = elems.iter().position(|e| *e == a).expect("a in group");
            let trace = TraceFunction::new(table.clone(), values, sigma_star)?;
            Ok(GroupTraceFixture { table, trace, oracle_matrices: None })
        }
        GroupTraceKind::Dihedral => {
            if prime == 2 {
                return Err(FixtureError::UnsupportedPrime(
                    prime,
                    "dihedral of order 8 needs an odd prime",
                ));
            }
            let r = [[0, -1], [1, 0]];
            let s = [[1, 0], [0, -1]];
            let (elems, table) = close_matrix_group(&[r, s]);
            debug_assert_eq!(elems.len(), 8);
            let values: Vec<PadicScalar> = elems
                .iter()
                .map(|m| PadicScalar::from_int(prime, m[0][0] + m[1][1], rel_prec))
                .collect();
            let sigma_star = elems.iter().position(|e| *e == s).expect("s in group");
            let trace = TraceFunction::new(table.clone(), values, sigma_star)?;
            Ok(GroupTraceFixture { table, trace, oracle_matrices: Some(elems) })
        }
    }
}

/// Toy admissible model: functions on `Z/p^j` with the translation K-action,
/// and an A-action generated by the shift itself plus (optionally) a
/// `K'`-periodic diagonal character.
pub fn make_toy_admissible(
    prime: u64,
    j: u32,
    level: u32,
    with_character: bool,
    rel_prec: u32,
) -> ToyAdmissible {
    let dim = (prime as usize).pow(j);
    let space = TruncatedSpace::plain(prime, dim);
    let shift = shift_matrix(prime, j, 1, rel_prec);
    let mut gens = vec![shift];
    if with_character {
        // Diagonal unit character of period p^min(level, j): x -> (1+p)^(x mod p^level).
        let period = (prime as usize).pow(level.min(j));
        let mut matrix =
            vec![vec![PadicScalar::zero(prime, rel_prec as i64); dim]; dim];
        let base = PadicScalar::from_int(prime, 1 + prime as i64, rel_prec);
        for x in 0..dim {
            matrix[x][x] = base.pow((x % period) as u32).expect("unit power");
        }
        gens.push(
            BoundedOperator::new(space, matrix, Exactness::FiltrationExact).expect("diagonal"),
        );
    }
    ToyAdmissible::new(prime, j, level, gens, rel_prec).expect("shift model is admissible")
}

/// Permutation matrix of translation by `step` on functions over `Z/p^j`:
/// `(S f)(x) = f(x + step)`.
pub fn shift_matrix(prime: u64, j: u32, step: usize, rel_prec: u32) -> BoundedOperator {
    let dim = (prime as usize).pow(j);
    let space = TruncatedSpace::plain(prime, dim);
    let mut matrix = vec![vec![PadicScalar::zero(prime, rel_prec as i64); dim]; dim];
    for x in 0..dim {
        // Basis = indicator functions; S e_x = e_{x - step mod p^j}.
        matrix[(x + dim - step % dim) % dim][x] = PadicScalar::one(prime, rel_prec);
    }
    BoundedOperator::new(space, matrix, Exactness::FiltrationExact).expect("permutation")
}
