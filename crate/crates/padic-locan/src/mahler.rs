//! Mahler-coefficient analysis of continuous functions on `Z_p`, analytic
//! vectors of `Z_p`-actions, and the invariant-factoring harness for toy
//! admissible models.
//!
//! The transform is the classical one: `a_n = (Δ^n f)(0)`, computed by an
//! exact difference table; the binomial basis is orthonormal for the sup
//! norm, so `min val(a_n)` is the sup-norm valuation. Analyticity on cosets
//! `a + p^h Z_p` is read off the decay `val(a_n) ≳ n / ((p-1) p^h)`.

use crate::banach::{BoundedOperator, OperatorError};
use crate::fixtures::binomial;
use crate::locan::{algebra_closure_residues, LocanError};
use crate::padic::{PadicError, PadicScalar, Valuation, DEFAULT_PRECISION};
use crate::residue::{kernel_mod_pn, CoordSpan, ResidueMatrix};
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of Mahler coefficients examined.
pub const DEFAULT_COEFF_COUNT: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MahlerError {
    #[error("need at least one sample")]
    NoSamples,
    #[error("model is too shallow: j = {j} but n + level = {needed} digits are required")]
    ModelTooShallow { j: u32, needed: u32 },
    #[error("invariant space has rank {got}, exceeding the declared admissibility bound {bound}")]
    NotAdmissible { got: usize, bound: usize },
    #[error("the translation generator does not have exact order p^j on the model")]
    ShiftOrderBroken,
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Locan(#[from] LocanError),
}

/// Certified knowledge about coefficients beyond the computed range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Tail {
    /// All higher coefficients are exactly zero (polynomial case).
    #[serde(rename = "zero")]
    Zero,
    /// All higher coefficients have valuation ≥ the bound.
    #[serde(rename = "at-least")]
    AtLeast { bound: i64 },
    /// Nothing asserted.
    #[serde(rename = "unknown")]
    Unknown,
}

/// Mahler coefficients `a_0..a_M` of a continuous function on `Z_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MahlerSeries {
    pub prime: u64,
    pub coeffs: Vec<PadicScalar>,
    pub tail: Tail,
}

/// `a_n = (Δ^n f)(0)` from samples `f(0..=M)`, by an exact difference table.
pub fn mahler_transform(samples: &[PadicScalar]) -> Result<MahlerSeries, MahlerError> {
    let first = samples.first().ok_or(MahlerError::NoSamples)?;
    let prime = first.prime();
    let mut row = samples.to_vec();
    let mut coeffs = Vec::with_capacity(samples.len());
    coeffs.push(row[0].clone());
    while row.len() > 1 {
        let mut next = Vec::with_capacity(row.len() - 1);
        for i in 0..row.len() - 1 {
            next.push(row[i + 1].sub(&row[i])?);
        }
        coeffs.push(next[0].clone());
        row = next;
    }
    Ok(MahlerSeries { prime, coeffs, tail: Tail::Unknown })
}

impl MahlerSeries {
    /// Evaluate at a nonnegative integer via `f(x) = Σ a_n C(x, n)`.
    pub fn eval_at_integer(&self, x: u64) -> Result<PadicScalar, MahlerError> {
        let mut acc = PadicScalar::zero(self.prime, 2 * DEFAULT_PRECISION as i64);
        for (n, a) in self.coeffs.iter().enumerate() {
            let b = binomial(x, n as u64);
            if b.is_zero() {
                continue;
            }
            let c = PadicScalar::from_bigint(self.prime, &b, a.rel_precision().max(DEFAULT_PRECISION));
            acc = acc.add(&a.mul(&c)?)?;
        }
        Ok(acc)
    }

    /// Coefficients of `Δf` from those of `f`: the shift `a_{n+1}`.
    pub fn difference(&self) -> MahlerSeries {
        MahlerSeries {
            prime: self.prime,
            coeffs: self.coeffs.iter().skip(1).cloned().collect(),
            tail: self.tail,
        }
    }

    /// Sup-norm valuation over the sampled range: `min val(a_n)`.
    pub fn sup_valuation(&self) -> Valuation {
        let mut acc: Option<Valuation> = None;
        for a in &self.coeffs {
            let v = a.valuation();
            acc = Some(match acc {
                None => v,
                Some(x) => x.min_with(v),
            });
        }
        acc.unwrap_or(Valuation::Infinite { at_precision: DEFAULT_PRECISION as i64 })
    }
}

/// Exact rational, serialized as a num/den pair (no floats anywhere).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioRepr {
    pub num: i64,
    pub den: i64,
}

impl From<Ratio<i64>> for RatioRepr {
    fn from(r: Ratio<i64>) -> Self {
        RatioRepr { num: *r.numer(), den: *r.denom() }
    }
}

/// Measured decay slack at the detected level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Margin {
    #[serde(rename = "infinite")]
    Infinite,
    #[serde(rename = "finite")]
    Finite { value: RatioRepr },
}

/// Analyticity verdict: the smallest coset level `p^h Z_p` whose decay
/// criterion the coefficients certify, or not-detected up to the computed
/// range. Inconclusive verdicts are first-class: `level = None` never means
/// "not analytic".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticityReport {
    pub level: Option<u32>,
    pub margin: Option<Margin>,
    pub max_level_tested: u32,
    pub coeff_count: usize,
}

/// Decide the analyticity level from coefficient decay.
///
/// For level `h` the reference slope is `s_h = 1/((p-1) p^h)`; the excesses
/// `e_n = val(a_n) - n s_h` must trend upward. Concretely, with everything
/// scaled by `D = (p-1) p^h` to stay in integers: the minimum scaled excess
/// over the second half of the range must strictly exceed the minimum over
/// the first half. A certified zero tail short-circuits to level 0
/// (polynomials are entire). Levels are searched up to the measurement
/// resolution `(p-1) p^h > M`.
pub fn amice_level(series: &MahlerSeries) -> AnalyticityReport {
    let p = series.prime;
    let m_count = series.coeffs.len();
    if series.tail == Tail::Zero || series.coeffs.iter().all(|c| c.is_zero()) {
        return AnalyticityReport {
            level: Some(0),
            margin: Some(Margin::Infinite),
            max_level_tested: 0,
            coeff_count: m_count,
        };
    }
    let m_top = (m_count.saturating_sub(1)) as i64;
    let mut h = 0u32;
    loop {
        let d = (p as i64 - 1) * (p as i64).pow(h);
        let max_level = h;
        if let Some(margin) = trend_margin(series, d) {
            return AnalyticityReport {
                level: Some(h),
                margin: Some(margin),
                max_level_tested: max_level,
                coeff_count: m_count,
            };
        }
        if d > m_top {
            // The slope fell below one valuation digit across the whole
            // range; further levels are indistinguishable from flat.
            return AnalyticityReport {
                level: None,
                margin: None,
                max_level_tested: max_level,
                coeff_count: m_count,
            };
        }
        h += 1;
    }
}

/// Whether the decay criterion passes at exactly level `h` (zero tails pass
/// every level). Exposed so the monotonicity of detection in `h` is testable.
pub fn amice_detects(series: &MahlerSeries, h: u32) -> Option<Margin> {
    if series.tail == Tail::Zero || series.coeffs.iter().all(|c| c.is_zero()) {
        return Some(Margin::Infinite);
    }
    let p = series.prime as i64;
    let d = (p - 1) * p.pow(h);
    trend_margin(series, d)
}

/// Scaled-trend test at slope `1/d`: split the range in half, compare the
/// minimum of `d*val(a_n) - n` across halves. Zero coefficients enter with
/// their certified lower bound; an all-zero tail yields an infinite margin.
fn trend_margin(series: &MahlerSeries, d: i64) -> Option<Margin> {
    let m = series.coeffs.len();
    if m < 2 {
        return None;
    }
    let mid = (m - 1) / 2;
    let scaled = |n: usize| -> Option<i64> {
        let c = &series.coeffs[n];
        match c.valuation() {
            Valuation::Finite { v } => Some(d * v - n as i64),
            Valuation::Infinite { at_precision } => Some(d * at_precision - n as i64),
        }
    };
    let head_min = (0..=mid).filter(|&n| !series.coeffs[n].is_zero()).filter_map(scaled).min();
    let tail_entries: Vec<(usize, bool)> =
        ((mid + 1)..m).map(|n| (n, series.coeffs[n].is_zero())).collect();
    if tail_entries.is_empty() {
        return None;
    }
    if tail_entries.iter().all(|(_, z)| *z) {
        // Every measured tail coefficient vanishes at precision: treat as an
        // unbounded climb relative to any finite head.
        return Some(Margin::Infinite);
    }
    let tail_min = tail_entries.iter().filter_map(|&(n, _)| scaled(n)).min()?;
    let head_min = head_min.unwrap_or(0);
    if tail_min > head_min {
        Some(Margin::Finite { value: Ratio::new(tail_min - head_min, d).into() })
    } else {
        None
    }
}

/// Joint verdict for one vector under a `Z_p`-action generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticVectorReport {
    /// Level detected per component (max is the vector's level).
    pub component_levels: Vec<Option<u32>>,
    /// Max over components, when every component was detected.
    pub mahler_level: Option<u32>,
    /// Mahler verdict at the requested level: `None` when inconclusive.
    pub analytic_at_level: Option<bool>,
    /// Lattice criterion `(g^(p^m) - 1) v ∈ pL` at the requested level.
    pub lattice_certified: bool,
}

/// Decide whether `v` is an analytic vector at level `m` for the action of
/// `g`, two ways: Mahler decay of the orbit samples `k -> g^k v` (component
/// by component), and the lattice criterion `(g^(p^m) - 1)(v) ∈ pL`.
pub fn analytic_vectors(
    g: &BoundedOperator,
    v: &[PadicScalar],
    m: u32,
    coeff_count: usize,
) -> Result<AnalyticVectorReport, MahlerError> {
    let d = g.dim();
    let mut orbit: Vec<Vec<PadicScalar>> = Vec::with_capacity(coeff_count + 1);
    let mut cur = v.to_vec();
    for _ in 0..=coeff_count {
        orbit.push(cur.clone());
        cur = g.apply(&cur)?;
    }
    let mut component_levels = Vec::with_capacity(d);
    for i in 0..d {
        let samples: Vec<PadicScalar> = orbit.iter().map(|w| w[i].clone()).collect();
        let series = mahler_transform(&samples)?;
        component_levels.push(amice_level(&series).level);
    }
    let mahler_level = component_levels.iter().copied().try_fold(0u32, |acc, l| l.map(|x| acc.max(x)));
    let analytic_at_level = mahler_level.map(|l| l <= m);
    // Lattice criterion at level m.
    let pm = (g.prime() as u32).pow(m);
    let power = g.pow(pm)?;
    let id = BoundedOperator::identity(g.space.clone(), DEFAULT_PRECISION);
    let moved = power.sub(&id)?.apply(v)?;
    let lattice_certified = moved.iter().all(|e| e.valuation().at_least(1));
    Ok(AnalyticVectorReport { component_levels, mahler_level, analytic_at_level, lattice_certified })
}

/// A finite model of an admissible Banach representation: functions on
/// `Z/p^j` (indicator basis) with the translation K-action, an A-action by
/// commuting-with-`K'` norm-≤1 operators, and the declared invariant bound.
#[derive(Debug, Clone)]
pub struct ToyAdmissible {
    pub prime: u64,
    pub j: u32,
    /// Level of the subgroup `K' = p^level Z_p` whose invariants are taken.
    pub level: u32,
    pub a_generators: Vec<BoundedOperator>,
    /// Declared bound on the invariant rank; `p^level` for the shift model.
    pub invariant_bound: usize,
    shift: BoundedOperator,
}

impl ToyAdmissible {
    pub fn new(
        prime: u64,
        j: u32,
        level: u32,
        a_generators: Vec<BoundedOperator>,
        rel_prec: u32,
    ) -> Result<Self, MahlerError> {
        let shift = crate::fixtures::shift_matrix(prime, j, 1, rel_prec);
        let dim = shift.dim();
        for g in &a_generators {
            if g.dim() != dim {
                return Err(MahlerError::Operator(OperatorError::ShapeMismatch {
                    want: dim,
                    got: g.dim(),
                }));
            }
        }
        // Translation by 1 must have exact order p^j on the model.
        let order = (prime as u32).pow(j);
        let id = BoundedOperator::identity(shift.space.clone(), rel_prec);
        if !shift.pow(order)?.agrees_with(&id) {
            return Err(MahlerError::ShiftOrderBroken);
        }
        if j >= 1 && shift.pow(order / prime as u32)?.agrees_with(&id) {
            return Err(MahlerError::ShiftOrderBroken);
        }
        let invariant_bound = (prime as usize).pow(level);
        Ok(ToyAdmissible { prime, j, level, a_generators, invariant_bound, shift })
    }

    pub fn shift(&self) -> &BoundedOperator {
        &self.shift
    }

    pub fn dim(&self) -> usize {
        self.shift.dim()
    }
}

/// Report of the invariant-factoring harness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarnessReport {
    pub exponent: u32,
    pub level: u32,
    /// Howell rank of `(W°/p^n)^{K'}`.
    pub invariant_rank: usize,
    pub admissible: bool,
    /// Every A-generator maps the invariants into themselves.
    pub preserves_invariants: bool,
    /// Invariant basis vectors satisfy the level-`level` lattice criterion.
    pub analytic_sublattice_contained: bool,
    pub closure_rank_full: usize,
    pub closure_rank_invariants: usize,
}

/// Compute `(W°/p^n)^{K'}` for `K' = p^level Z_p` acting through the model,
/// verify the A-action restricts to it (so the A-image on the analytic
/// sublattice factors through the finite invariant image), and report the
/// closure ranks of both images.
pub fn invariant_factoring_harness(
    model: &ToyAdmissible,
    n: u32,
) -> Result<HarnessReport, MahlerError> {
    if model.j < n + model.level {
        return Err(MahlerError::ModelTooShallow { j: model.j, needed: n + model.level });
    }
    let p = model.prime;
    let dim = model.dim();
    // K' is generated by translation by p^level; at level ≥ j it acts trivially.
    let step = (p as usize).pow(model.level.min(model.j)) % dim;
    let sigma = if step == 0 {
        BoundedOperator::identity(model.shift.space.clone(), DEFAULT_PRECISION)
    } else {
        crate::fixtures::shift_matrix(p, model.j, step, DEFAULT_PRECISION)
    };

    // Invariants: kernel of (sigma - 1) over Z/p^n.
    let id = BoundedOperator::identity(sigma.space.clone(), DEFAULT_PRECISION);
    let diff = sigma.sub(&id)?.reduce(n)?;
    let kernel = kernel_mod_pn(p, n, dim, dim, &diff.matrix.entries);
    let coord_span = CoordSpan::new(p, n, &kernel);
    let invariant_rank = coord_span.rank();
    let admissible = invariant_rank <= model.invariant_bound;
    if !admissible {
        return Err(MahlerError::NotAdmissible {
            got: invariant_rank,
            bound: model.invariant_bound,
        });
    }

    // Analytic sublattice containment: each invariant basis vector, lifted
    // to the lattice, satisfies (S^(p^level) - 1) v ≡ 0 mod p^n.
    let power = model.shift.pow((p as u32).pow(model.level))?;
    let shift_diff = power.sub(&id)?;
    let mut analytic_sublattice_contained = true;
    for v in &kernel {
        let lifted: Vec<PadicScalar> = v
            .iter()
            .map(|c| {
                PadicScalar::from_bigint(p, &num_bigint::BigInt::from(c.clone()), DEFAULT_PRECISION)
            })
            .collect();
        let moved = shift_diff.apply(&lifted)?;
        if !moved.iter().all(|e| e.valuation().at_least(n as i64)) {
            analytic_sublattice_contained = false;
        }
    }

    // Restriction of each A-generator to the invariants.
    let k = kernel.len();
    let mut preserves = true;
    let mut restricted: Vec<ResidueMatrix> = Vec::new();
    let mut a_residues: Vec<ResidueMatrix> = Vec::new();
    for gen in &model.a_generators {
        let r = gen.reduce(n)?.matrix;
        let mut columns: Vec<Vec<BigUint>> = Vec::with_capacity(k);
        for v in &kernel {
            let image = mat_vec(&r, v);
            match coord_span.express(&image) {
                Some(c) => columns.push(c),
                None => {
                    preserves = false;
                    break;
                }
            }
        }
        if preserves {
            let mut m = ResidueMatrix::zero(p, n, k);
            for (j_col, col) in columns.iter().enumerate() {
                for i in 0..k {
                    m.set(i, j_col, col[i].clone());
                }
            }
            restricted.push(m);
        }
        a_residues.push(r);
    }

    let closure_full = algebra_closure_residues(p, n, dim, &a_residues);
    let closure_inv = if preserves && k > 0 {
        algebra_closure_residues(p, n, k, &restricted).rank
    } else {
        0
    };
    Ok(HarnessReport {
        exponent: n,
        level: model.level,
        invariant_rank,
        admissible,
        preserves_invariants: preserves,
        analytic_sublattice_contained,
        closure_rank_full: closure_full.rank,
        closure_rank_invariants: closure_inv,
    })
}

fn mat_vec(m: &ResidueMatrix, v: &[BigUint]) -> Vec<BigUint> {
    let d = m.dim;
    let modulus = m.modulus();
    let mut out = vec![BigUint::zero(); d];
    for i in 0..d {
        let mut acc = BigUint::zero();
        for j in 0..d {
            acc += m.at(i, j) * &v[j];
        }
        out[i] = acc % &modulus;
    }
    out
}
