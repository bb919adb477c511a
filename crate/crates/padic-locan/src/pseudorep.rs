//! Constructive algebra of 2-dimensional determinants on a finite group:
//! trace-identity validation, the odd splitting into `a`, `d`, `x`, the
//! reducibility ideal, and explicit matrix reconstruction when the ideal
//! has an invertible value.
//!
//! The validation contract is the degree-2 trace identity
//! `T(σ)T(τ) = T(στ) + det(σ) T(σ⁻¹τ)` with `det(σ) = (T(σ)² - T(σ²))/2`,
//! which characterizes traces of 2-dimensional representations.

use crate::padic::{PadicError, PadicScalar, Valuation, DEFAULT_PRECISION};
use crate::poly::PadicPoly;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PseudorepError {
    #[error("multiplication table is not square")]
    TableNotSquare,
    #[error("table entry out of range at ({0},{1})")]
    EntryOutOfRange(usize, usize),
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("associativity fails at ({0},{1},{2})")]
    NotAssociative(usize, usize, usize),
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("trace needs one value per group element: {got} for order {want}")]
    ValueCountMismatch { want: usize, got: usize },
    #[error("distinguished involution index {0} out of range")]
    SigmaStarOutOfRange(usize),
    #[error("the odd splitting divides by 2; p = 2 is unsupported")]
    EvenPrime,
    #[error("no invertible pivot x(σ0,τ0) exists; the trace is reducible at precision")]
    PivotNotInvertible,
    #[error("l = p: l⁻¹ is not integral")]
    HeckePrimeCollision,
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// A finite group by its multiplication table. `mul[i][j]` is the index of
/// the product `g_i g_j`; validated for identity, associativity, inverses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    mul: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl GroupTable {
    pub fn new(mul: Vec<Vec<usize>>) -> Result<Self, PseudorepError> {
        let n = mul.len();
        for (i, row) in mul.iter().enumerate() {
            if row.len() != n {
                return Err(PseudorepError::TableNotSquare);
            }
            for (j, &e) in row.iter().enumerate() {
                if e >= n {
                    return Err(PseudorepError::EntryOutOfRange(i, j));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mul[e][x] == x && mul[x][e] == x))
            .ok_or(PseudorepError::NoIdentity)?;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if mul[mul[i][j]][k] != mul[i][mul[j][k]] {
                        return Err(PseudorepError::NotAssociative(i, j, k));
                    }
                }
            }
        }
        let inverse = (0..n)
            .map(|i| {
                (0..n)
                    .find(|&j| mul[i][j] == identity && mul[j][i] == identity)
                    .ok_or(PseudorepError::NoInverse(i))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroupTable { mul, identity, inverse })
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.mul[i][j]
    }

    pub fn inv(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn table(&self) -> &Vec<Vec<usize>> {
        &self.mul
    }
}

/// Coefficient rings the trace machinery runs over: exact p-adic scalars by
/// default, and the truncated dual numbers `Z_p[ε]/(ε²)` for exhibiting
/// non-principal reducibility ideals.
pub trait TraceRing: Clone + PartialEq + std::fmt::Debug {
    fn add(&self, other: &Self) -> Result<Self, PadicError>;
    fn sub(&self, other: &Self) -> Result<Self, PadicError>;
    fn mul(&self, other: &Self) -> Result<Self, PadicError>;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Multiplicative inverse when the element is a unit at precision.
    fn invert(&self) -> Option<Self>;
    /// Division by 2.
    fn halve(&self) -> Result<Self, PadicError>;
    /// A constant with the same prime/precision shape as `self`.
    fn constant_like(&self, n: i64) -> Self;
    fn two_is_invertible(&self) -> bool;
}

impl TraceRing for PadicScalar {
    fn add(&self, other: &Self) -> Result<Self, PadicError> {
        PadicScalar::add(self, other)
    }
    fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        PadicScalar::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        PadicScalar::mul(self, other)
    }
    fn neg(&self) -> Self {
        PadicScalar::neg(self)
    }
    fn is_zero(&self) -> bool {
        PadicScalar::is_zero(self)
    }
    fn invert(&self) -> Option<Self> {
        PadicScalar::inv(self).ok()
    }
    fn halve(&self) -> Result<Self, PadicError> {
        let two = PadicScalar::from_int(self.prime(), 2, self.rel_precision().max(DEFAULT_PRECISION));
        self.div(&two)
    }
    fn constant_like(&self, n: i64) -> Self {
        PadicScalar::from_int(self.prime(), n, self.rel_precision().max(DEFAULT_PRECISION))
    }
    fn two_is_invertible(&self) -> bool {
        self.prime() != 2
    }
}

/// Truncated dual numbers `a + b ε` with `ε² = 0` over `Q_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualScalar {
    pub base: PadicScalar,
    pub infinitesimal: PadicScalar,
}

impl DualScalar {
    pub fn new(base: PadicScalar, infinitesimal: PadicScalar) -> Self {
        DualScalar { base, infinitesimal }
    }
}

impl TraceRing for DualScalar {
    fn add(&self, other: &Self) -> Result<Self, PadicError> {
        Ok(DualScalar {
            base: self.base.add(&other.base)?,
            infinitesimal: self.infinitesimal.add(&other.infinitesimal)?,
        })
    }
    fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        Ok(DualScalar {
            base: self.base.sub(&other.base)?,
            infinitesimal: self.infinitesimal.sub(&other.infinitesimal)?,
        })
    }
    fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        Ok(DualScalar {
            base: self.base.mul(&other.base)?,
            infinitesimal: self
                .base
                .mul(&other.infinitesimal)?
                .add(&self.infinitesimal.mul(&other.base)?)?,
        })
    }
    fn neg(&self) -> Self {
        DualScalar { base: self.base.neg(), infinitesimal: self.infinitesimal.neg() }
    }
    fn is_zero(&self) -> bool {
        self.base.is_zero() && self.infinitesimal.is_zero()
    }
    fn invert(&self) -> Option<Self> {
        // (a + bε)^-1 = a^-1 - b a^-2 ε, defined when a is invertible.
        let a_inv = self.base.inv().ok()?;
        let minus = a_inv.mul(&a_inv).ok()?.mul(&self.infinitesimal).ok()?.neg();
        Some(DualScalar { base: a_inv, infinitesimal: minus })
    }
    fn halve(&self) -> Result<Self, PadicError> {
        Ok(DualScalar { base: self.base.halve()?, infinitesimal: self.infinitesimal.halve()? })
    }
    fn constant_like(&self, n: i64) -> Self {
        DualScalar {
            base: self.base.constant_like(n),
            infinitesimal: PadicScalar::zero(self.base.prime(), DEFAULT_PRECISION as i64),
        }
    }
    fn two_is_invertible(&self) -> bool {
        self.base.two_is_invertible()
    }
}

/// A candidate trace of a 2-dimensional determinant: one value per group
/// element, with a distinguished involution where the trace vanishes.
#[derive(Debug, Clone)]
pub struct TraceFunction<R: TraceRing = PadicScalar> {
    pub group: GroupTable,
    pub values: Vec<R>,
    pub sigma_star: usize,
}

/// One validated axiom, with the first counterexample when it fails.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub name: String,
    pub pass: bool,
    pub counterexample: Option<Vec<usize>>,
}

impl AxiomCheck {
    fn passed(name: &str) -> Self {
        AxiomCheck { name: name.to_string(), pass: true, counterexample: None }
    }

    fn failed(name: &str, counterexample: Option<Vec<usize>>) -> Self {
        AxiomCheck { name: name.to_string(), pass: false, counterexample }
    }
}

/// Outcome of `validate`: all axioms with pass/fail and counterexamples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceReport {
    pub checks: Vec<AxiomCheck>,
}

impl TraceReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_violation(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

impl<R: TraceRing> TraceFunction<R> {
    pub fn new(group: GroupTable, values: Vec<R>, sigma_star: usize) -> Result<Self, PseudorepError> {
        if values.len() != group.order() {
            return Err(PseudorepError::ValueCountMismatch {
                want: group.order(),
                got: values.len(),
            });
        }
        if sigma_star >= group.order() {
            return Err(PseudorepError::SigmaStarOutOfRange(sigma_star));
        }
        Ok(TraceFunction { group, values, sigma_star })
    }

    fn det(&self, s: usize) -> Result<R, PadicError> {
        // det(σ) = (T(σ)² - T(σ²)) / 2.
        let t = &self.values[s];
        let t_sq = &self.values[self.group.mul(s, s)];
        t.mul(t)?.sub(t_sq)?.halve()
    }

    /// Check every axiom: `T(1) = 2`, central symmetry, oddness at the
    /// involution, and the degree-2 determinant identity on all pairs.
    pub fn validate(&self) -> TraceReport {
        let g = &self.group;
        let two = self.values[g.identity()].constant_like(2);
        let mut checks = Vec::new();

        let dim_ok = self.values[g.identity()]
            .sub(&two)
            .map(|d| d.is_zero())
            .unwrap_or(false);
        checks.push(if dim_ok {
            AxiomCheck::passed("dimension")
        } else {
            AxiomCheck::failed("dimension", None)
        });

        let mut sym = AxiomCheck::passed("class-function");
        'sym: for s in 0..g.order() {
            for t in 0..g.order() {
                let lhs = &self.values[g.mul(s, t)];
                let rhs = &self.values[g.mul(t, s)];
                if !lhs.sub(rhs).map(|d| d.is_zero()).unwrap_or(false) {
                    sym = AxiomCheck::failed("class-function", Some(vec![s, t]));
                    break 'sym;
                }
            }
        }
        checks.push(sym);

        let invol = g.mul(self.sigma_star, self.sigma_star) == g.identity();
        let vanishes = self.values[self.sigma_star].is_zero();
        checks.push(if invol && vanishes {
            AxiomCheck::passed("oddness")
        } else {
            AxiomCheck::failed("oddness", Some(vec![self.sigma_star]))
        });

        let mut det_check = AxiomCheck::passed("determinant-identity");
        'det: for s in 0..g.order() {
            let det_s = match self.det(s) {
                Ok(d) => d,
                Err(_) => {
                    det_check = AxiomCheck::failed("determinant-identity", Some(vec![s]));
                    break 'det;
                }
            };
            for t in 0..g.order() {
                // T(σ)T(τ) - T(στ) - det(σ) T(σ⁻¹τ) = 0.
                let result = (|| -> Result<bool, PadicError> {
                    let prod = self.values[s].mul(&self.values[t])?;
                    let st = &self.values[g.mul(s, t)];
                    let inv_t = &self.values[g.mul(g.inv(s), t)];
                    Ok(prod.sub(st)?.sub(&det_s.mul(inv_t)?)?.is_zero())
                })();
                if !result.unwrap_or(false) {
                    det_check = AxiomCheck::failed("determinant-identity", Some(vec![s, t]));
                    break 'det;
                }
            }
        }
        checks.push(det_check);
        TraceReport { checks }
    }

    /// The odd splitting: `a(σ) = (T(σ*σ) + T(σ))/2`, `d = T - a`, and
    /// `x(σ,τ) = a(στ) - a(σ)a(τ)`. Requires 2 invertible.
    pub fn odd_split(&self) -> Result<SplitData<R>, PseudorepError> {
        if !self.values[self.group.identity()].two_is_invertible() {
            return Err(PseudorepError::EvenPrime);
        }
        let g = &self.group;
        let n = g.order();
        let mut a = Vec::with_capacity(n);
        for s in 0..n {
            let t_star_s = &self.values[g.mul(self.sigma_star, s)];
            a.push(t_star_s.add(&self.values[s])?.halve()?);
        }
        let d: Vec<R> = (0..n)
            .map(|s| self.values[s].sub(&a[s]))
            .collect::<Result<_, _>>()?;
        let mut x = vec![vec![self.values[0].constant_like(0); n]; n];
        for s in 0..n {
            for t in 0..n {
                x[s][t] = a[g.mul(s, t)].sub(&a[s].mul(&a[t])?)?;
            }
        }
        Ok(SplitData { group: g.clone(), trace: self.values.clone(), a, d, x })
    }
}

/// The split functions and the values generating the reducibility ideal.
#[derive(Debug, Clone)]
pub struct SplitData<R: TraceRing = PadicScalar> {
    pub group: GroupTable,
    trace: Vec<R>,
    pub a: Vec<R>,
    pub d: Vec<R>,
    /// `x[s][t] = a(st) - a(s)a(t)`.
    pub x: Vec<Vec<R>>,
}

/// Verdict on the ideal generated by the `x` values, at working precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ReducibilityVerdict {
    /// Every generator vanishes at precision.
    #[serde(rename = "reducible")]
    Reducible,
    /// Some generator is a unit: certified irreducible.
    #[serde(rename = "irreducible")]
    Irreducible,
    /// All generators vanish mod `p^depth` but not all at precision:
    /// reducible to that depth only.
    #[serde(rename = "reducible-mod")]
    ReducibleMod { depth: i64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducibilityReport {
    /// Nonzero generators `((s, t), valuation)`.
    pub generators: Vec<((usize, usize), Valuation)>,
    pub verdict: ReducibilityVerdict,
}

impl<R: TraceRing> SplitData<R> {
    pub fn recombined_trace_matches(&self) -> bool {
        self.a
            .iter()
            .zip(&self.d)
            .zip(&self.trace)
            .all(|((a, d), t)| a.add(d).and_then(|s| s.sub(t)).map(|z| z.is_zero()).unwrap_or(false))
    }

    pub fn nonzero_ideal_generators(&self) -> Vec<(usize, usize)> {
        let n = self.group.order();
        let mut out = Vec::new();
        for s in 0..n {
            for t in 0..n {
                if !self.x[s][t].is_zero() {
                    out.push((s, t));
                }
            }
        }
        out
    }

    /// First pivot (σ0, τ0) with invertible `x(σ0,τ0)`, in lexicographic
    /// order; `None` when the trace is reducible at precision.
    pub fn find_pivot(&self) -> Option<(usize, usize)> {
        let n = self.group.order();
        for s in 0..n {
            for t in 0..n {
                if self.x[s][t].invert().is_some() {
                    return Some((s, t));
                }
            }
        }
        None
    }

    /// Reconstruct the 2x2 matrix representation from a pivot:
    /// `R(σ) = [[a(σ), x(σ,τ0)/x(σ0,τ0)], [x(σ0,σ), d(σ)]]`, then verify
    /// multiplicativity, trace, and determinant on all pairs.
    pub fn reconstruct(&self, sigma0: usize, tau0: usize) -> Result<Reconstruction<R>, PseudorepError> {
        let pivot = self.x[sigma0][tau0].invert().ok_or(PseudorepError::PivotNotInvertible)?;
        let g = &self.group;
        let n = g.order();
        let mut matrices = Vec::with_capacity(n);
        for s in 0..n {
            let upper = self.x[s][tau0].mul(&pivot)?;
            matrices.push([
                [self.a[s].clone(), upper],
                [self.x[sigma0][s].clone(), self.d[s].clone()],
            ]);
        }
        let mut multiplicative = true;
        'outer: for s in 0..n {
            for t in 0..n {
                let prod = mat2_mul(&matrices[s], &matrices[t])?;
                if !mat2_eq(&prod, &matrices[g.mul(s, t)]) {
                    multiplicative = false;
                    break 'outer;
                }
            }
        }
        let mut trace_matches = true;
        let mut det_matches = true;
        for s in 0..n {
            let tr = matrices[s][0][0].add(&matrices[s][1][1])?;
            if !tr.sub(&self.trace[s])?.is_zero() {
                trace_matches = false;
            }
            let det = matrices[s][0][0]
                .mul(&matrices[s][1][1])?
                .sub(&matrices[s][0][1].mul(&matrices[s][1][0])?)?;
            let expected = self.trace[s]
                .mul(&self.trace[s])?
                .sub(&self.trace[g.mul(s, s)])?
                .halve()?;
            if !det.sub(&expected)?.is_zero() {
                det_matches = false;
            }
        }
        Ok(Reconstruction { pivot: (sigma0, tau0), matrices, multiplicative, trace_matches, det_matches })
    }

    /// Reconstruct from the first invertible pivot.
    pub fn reconstruct_auto(&self) -> Result<Reconstruction<R>, PseudorepError> {
        let (s, t) = self.find_pivot().ok_or(PseudorepError::PivotNotInvertible)?;
        self.reconstruct(s, t)
    }
}

impl SplitData<PadicScalar> {
    /// Scalar-ring report: generators with valuations and the verdict.
    pub fn reducibility_report(&self) -> ReducibilityReport {
        let n = self.group.order();
        let mut generators = Vec::new();
        let mut min_val: Option<i64> = None;
        let mut all_zero = true;
        for s in 0..n {
            for t in 0..n {
                let v = self.x[s][t].valuation();
                if !self.x[s][t].is_zero() {
                    all_zero = false;
                    generators.push(((s, t), v));
                    if let Valuation::Finite { v } = v {
                        min_val = Some(min_val.map_or(v, |m| m.min(v)));
                    }
                }
            }
        }
        let verdict = if all_zero {
            ReducibilityVerdict::Reducible
        } else {
            match min_val {
                Some(0) | None => ReducibilityVerdict::Irreducible,
                Some(v) if v <= 0 => ReducibilityVerdict::Irreducible,
                Some(v) => ReducibilityVerdict::ReducibleMod { depth: v },
            }
        };
        ReducibilityReport { generators, verdict }
    }
}

/// A reconstructed representation with its verification bits.
#[derive(Debug, Clone)]
pub struct Reconstruction<R: TraceRing = PadicScalar> {
    pub pivot: (usize, usize),
    pub matrices: Vec<[[R; 2]; 2]>,
    pub multiplicative: bool,
    pub trace_matches: bool,
    pub det_matches: bool,
}

impl<R: TraceRing> Reconstruction<R> {
    pub fn verified(&self) -> bool {
        self.multiplicative && self.trace_matches && self.det_matches
    }
}

fn mat2_mul<R: TraceRing>(a: &[[R; 2]; 2], b: &[[R; 2]; 2]) -> Result<[[R; 2]; 2], PadicError> {
    let e = |i: usize, j: usize| -> Result<R, PadicError> {
        a[i][0].mul(&b[0][j])?.add(&a[i][1].mul(&b[1][j])?)
    };
    Ok([[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]])
}

fn mat2_eq<R: TraceRing>(a: &[[R; 2]; 2], b: &[[R; 2]; 2]) -> bool {
    (0..2).all(|i| {
        (0..2).all(|j| a[i][j].sub(&b[i][j]).map(|d| d.is_zero()).unwrap_or(false))
    })
}

/// The spherical quadratic `X² - l⁻¹ T_l X + l⁻¹ S_l` attached to
/// eigenvalue data at a prime `l ≠ p`; `l` must be a unit, so its inverse
/// is integral.
pub fn hecke_charpoly(
    t_l: &PadicScalar,
    s_l: &PadicScalar,
    l: u64,
) -> Result<PadicPoly, PseudorepError> {
    let p = t_l.prime();
    if !crate::padic::is_prime_u64(l) {
        return Err(PseudorepError::Padic(PadicError::NotPrime(l)));
    }
    if l == p {
        return Err(PseudorepError::HeckePrimeCollision);
    }
    let l_inv = PadicScalar::from_int(p, l as i64, t_l.rel_precision().max(DEFAULT_PRECISION)).inv()?;
    let linear = t_l.mul(&l_inv)?.neg();
    let constant = s_l.mul(&l_inv)?;
    Ok(PadicPoly::new(
        p,
        vec![constant, linear, PadicScalar::one(p, t_l.rel_precision().max(DEFAULT_PRECISION))],
    )?)
}
