//! `Z_p^k`-actions through their completed group algebra, extension of
//! scalars to a closed polydisc, group-theoretic contraction certificates,
//! and the eigenvalue congruence check.
//!
//! For commuting invertible generators `g_1..g_k` of norm ≤ 1, the
//! difference operators `T_i = g_i - 1` drive everything: once some uniform
//! `n` has `T_i^n(L) ⊆ pL` for all `i`, the substitutions `U_i = T_i^n / p`
//! (a lossless shift of valuations) and `S_i = T_i` evaluate any integral
//! function on the closed polydisc to a norm-≤1 operator.

use crate::banach::{BoundedOperator, OperatorError};
use crate::locan::{locan_degree, LocanError};
use crate::padic::{PadicError, PadicScalar, Valuation, DEFAULT_PRECISION};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IwasawaError {
    #[error("generators {0} and {1} do not commute on the truncation")]
    NonCommutingGenerators(usize, usize),
    #[error("generator {0} is not invertible modulo p")]
    GeneratorNotInvertible(usize),
    #[error("generator {0} has norm exceeding 1")]
    GeneratorNormExceedsOne(usize),
    #[error("no generators supplied")]
    EmptyAction,
    #[error("exponent {given} is too small: substitution needs at least {needed} for exact division by p")]
    ExponentTooSmall { given: u32, needed: u32 },
    #[error("no uniform exponent exists: generator {0} is not topologically unipotent on the truncation")]
    NoUniformExponent(usize),
    #[error("polydisc function is not integral")]
    FunctionNotIntegral,
    #[error("function arity {got} does not match the action arity {want}")]
    ArityMismatch { want: usize, got: usize },
    #[error("contraction certificate holds but g^(p^m) does not fix L/pL; arithmetic bug")]
    ImplicationViolated,
    #[error("eigen-system {0} does not appear in the lattice at working precision")]
    EigenSystemAbsent(usize),
    #[error("residue signatures differ at generator {0}; the congruence hypothesis is vacuous")]
    ResidueMismatch(usize),
    #[error("eigen extraction needs a triangular family (entry ({0},{1}) below the diagonal is nonzero)")]
    NotTriangular(usize, usize),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Locan(#[from] LocanError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// `k` commuting invertible norm-≤1 generators of a `Z_p^k`-action, with
/// the derived difference operators `T_i = g_i - 1`.
#[derive(Debug, Clone)]
pub struct GroupAction {
    generators: Vec<BoundedOperator>,
    differences: Vec<BoundedOperator>,
}

impl GroupAction {
    pub fn new(generators: Vec<BoundedOperator>) -> Result<Self, IwasawaError> {
        if generators.is_empty() {
            return Err(IwasawaError::EmptyAction);
        }
        for (i, g) in generators.iter().enumerate() {
            if !g.norm_at_most_one() {
                return Err(IwasawaError::GeneratorNormExceedsOne(i));
            }
            let residue = g.reduce(1).map_err(|_| IwasawaError::GeneratorNormExceedsOne(i))?;
            if residue.matrix.det_mod_p() == 0 {
                return Err(IwasawaError::GeneratorNotInvertible(i));
            }
        }
        for i in 0..generators.len() {
            for j in (i + 1)..generators.len() {
                if !generators[i].commutes_with(&generators[j])? {
                    return Err(IwasawaError::NonCommutingGenerators(i, j));
                }
            }
        }
        let differences = generators
            .iter()
            .map(|g| {
                let id = BoundedOperator::identity(g.space.clone(), DEFAULT_PRECISION);
                g.sub(&id)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroupAction { generators, differences })
    }

    pub fn arity(&self) -> usize {
        self.generators.len()
    }

    pub fn prime(&self) -> u64 {
        self.generators[0].prime()
    }

    pub fn generators(&self) -> &[BoundedOperator] {
        &self.generators
    }

    pub fn differences(&self) -> &[BoundedOperator] {
        &self.differences
    }

    /// Least `n` with `T_i^n(L) ⊆ pL` for every `i`; `None` when some
    /// difference operator never contracts on the truncation.
    pub fn minimal_uniform_exponent(&self) -> Result<Option<u32>, IwasawaError> {
        let mut n = 0u32;
        for (i, t) in self.differences.iter().enumerate() {
            match locan_degree(t)? {
                Some(d) => n = n.max(d),
                None => {
                    let _ = i;
                    return Ok(None);
                }
            }
        }
        Ok(Some(n.max(1)))
    }
}

/// A finitely supported function on the closed polydisc: terms
/// `c * U^a * S^b` meant for the substitution `U_i = T_i^n / p`, `S_i = T_i`.
/// Terms are keyed by the exponent pair for canonical ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolydiscFunction {
    prime: u64,
    arity: usize,
    terms: BTreeMap<(Vec<u32>, Vec<u32>), PadicScalar>,
}

impl PolydiscFunction {
    pub fn new(prime: u64, arity: usize) -> Self {
        PolydiscFunction { prime, arity, terms: BTreeMap::new() }
    }

    pub fn constant(prime: u64, arity: usize, c: PadicScalar) -> Self {
        let mut f = Self::new(prime, arity);
        f.add_term(vec![0; arity], vec![0; arity], c).expect("matching arity");
        f
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Vec<u32>, Vec<u32>), &PadicScalar)> {
        self.terms.iter()
    }

    pub fn add_term(
        &mut self,
        u_exp: Vec<u32>,
        s_exp: Vec<u32>,
        coeff: PadicScalar,
    ) -> Result<(), IwasawaError> {
        if u_exp.len() != self.arity || s_exp.len() != self.arity {
            return Err(IwasawaError::ArityMismatch {
                want: self.arity,
                got: u_exp.len().max(s_exp.len()),
            });
        }
        let key = (u_exp, s_exp);
        match self.terms.remove(&key) {
            None => {
                self.terms.insert(key, coeff);
            }
            Some(existing) => {
                let sum = existing.add(&coeff)?;
                self.terms.insert(key, sum);
            }
        }
        Ok(())
    }

    /// Gauss norm as a valuation bound: min over coefficient valuations.
    pub fn gauss_valuation(&self) -> Valuation {
        let mut acc: Option<Valuation> = None;
        for c in self.terms.values() {
            let v = c.valuation();
            acc = Some(match acc {
                None => v,
                Some(a) => a.min_with(v),
            });
        }
        acc.unwrap_or(Valuation::Infinite { at_precision: DEFAULT_PRECISION as i64 })
    }

    pub fn is_integral(&self) -> bool {
        self.gauss_valuation().at_least(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self, IwasawaError> {
        let mut out = self.clone();
        for (key, c) in &other.terms {
            out.add_term(key.0.clone(), key.1.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, IwasawaError> {
        let mut out = PolydiscFunction::new(self.prime, self.arity);
        for ((ua, sa), ca) in &self.terms {
            for ((ub, sb), cb) in &other.terms {
                let u: Vec<u32> = ua.iter().zip(ub).map(|(x, y)| x + y).collect();
                let s: Vec<u32> = sa.iter().zip(sb).map(|(x, y)| x + y).collect();
                out.add_term(u, s, ca.mul(cb)?)?;
            }
        }
        Ok(out)
    }
}

/// Substitute `U_i = T_i^n / p`, `S_i = T_i` into an integral polydisc
/// function. Requires `n ≥ minimal_uniform_exponent` so the division by p
/// is certified exact; the result then has norm ≤ the Gauss norm of `f`.
pub fn polydisc_eval(
    f: &PolydiscFunction,
    action: &GroupAction,
    n: u32,
) -> Result<BoundedOperator, IwasawaError> {
    if f.arity != action.arity() {
        return Err(IwasawaError::ArityMismatch { want: action.arity(), got: f.arity });
    }
    if !f.is_integral() {
        return Err(IwasawaError::FunctionNotIntegral);
    }
    let needed = action
        .minimal_uniform_exponent()?
        .ok_or_else(|| IwasawaError::NoUniformExponent(0))?;
    if n < needed {
        return Err(IwasawaError::ExponentTooSmall { given: n, needed });
    }
    let space = action.generators[0].space.clone();
    // U_i = T_i^n / p: the certificate guarantees entries of T_i^n have
    // valuation ≥ 1, so the shift by -1 stays integral and loses no digits.
    let mut u_ops = Vec::with_capacity(action.arity());
    for t in action.differences() {
        let power = t.pow(n)?;
        debug_assert!(power.certify_image(1));
        u_ops.push(power.shift(-1));
    }
    let mut acc = BoundedOperator::zero(space.clone(), 2 * DEFAULT_PRECISION as i64);
    let id = BoundedOperator::identity(space, DEFAULT_PRECISION);
    for ((u_exp, s_exp), coeff) in f.terms() {
        let mut term = id.scale(coeff)?;
        for (i, &e) in u_exp.iter().enumerate() {
            for _ in 0..e {
                term = term.compose(&u_ops[i])?;
            }
        }
        for (i, &e) in s_exp.iter().enumerate() {
            for _ in 0..e {
                term = term.compose(&action.differences()[i])?;
            }
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Report of the group-theoretic contraction certificate at exponent `m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerFixReport {
    pub exponent: u32,
    /// `(g-1)^(p^m)(L) ⊆ pL` certified.
    pub contraction: bool,
    /// `g^(p^m) ≡ 1` on `L/pL` (only evaluated when the contraction holds).
    pub fixes_mod_p: bool,
}

/// Verify `(g-1)^(p^m)(L) ⊆ pL`, and on success check the consequence that
/// `g^(p^m)` fixes `L/pL` (a binomial identity over `F_p`, so a failure
/// here can only mean an arithmetic bug, reported as `ImplicationViolated`).
pub fn power_fix_certificate(g: &BoundedOperator, m: u32) -> Result<PowerFixReport, IwasawaError> {
    if !g.norm_at_most_one() {
        return Err(IwasawaError::GeneratorNormExceedsOne(0));
    }
    let residue = g.reduce(1)?;
    if residue.matrix.det_mod_p() == 0 {
        return Err(IwasawaError::GeneratorNotInvertible(0));
    }
    let id = BoundedOperator::identity(g.space.clone(), DEFAULT_PRECISION);
    let t = g.sub(&id)?;
    let pm = (g.prime() as u64).pow(m);
    let contraction = t.pow(pm as u32)?.certify_image(1);
    if !contraction {
        return Ok(PowerFixReport { exponent: m, contraction, fixes_mod_p: false });
    }
    let g_power = residue.matrix.pow(pm as u32).map_err(OperatorError::from)?;
    let fixes_mod_p = g_power == crate::residue::ResidueMatrix::identity(g.prime(), 1, g.dim());
    if !fixes_mod_p {
        return Err(IwasawaError::ImplicationViolated);
    }
    Ok(PowerFixReport { exponent: m, contraction, fixes_mod_p })
}

/// An assignment of one eigenvalue per generator of a commuting family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenSystem {
    pub eigenvalues: Vec<PadicScalar>,
}

impl EigenSystem {
    pub fn new(eigenvalues: Vec<PadicScalar>) -> Self {
        EigenSystem { eigenvalues }
    }

    /// Residues mod p; eigenvalues must be integral.
    pub fn residue_signature(&self) -> Result<Vec<u64>, PadicError> {
        self.eigenvalues
            .iter()
            .map(|e| Ok(e.residue(1)?.to_u64_digits().first().copied().unwrap_or(0)))
            .collect()
    }
}

/// Extract the eigen-systems of an upper-triangular commuting family: the
/// j-th system reads the j-th diagonal entry of every generator. Errors on
/// families that are not triangular as given (extraction is restricted to
/// operators triangularizable over `Z_p` at working precision).
pub fn triangular_eigen_systems(gens: &[BoundedOperator]) -> Result<Vec<EigenSystem>, IwasawaError> {
    let Some(first) = gens.first() else {
        return Ok(vec![]);
    };
    let d = first.dim();
    for g in gens {
        for i in 0..d {
            for j in 0..i {
                if !g.matrix[i][j].is_zero() {
                    return Err(IwasawaError::NotTriangular(i, j));
                }
            }
        }
    }
    Ok((0..d)
        .map(|j| EigenSystem::new(gens.iter().map(|g| g.matrix[j][j].clone()).collect()))
        .collect())
}

/// Verify that an eigen-system appears in the lattice at working precision:
/// `det(g_i - λ_i)` must vanish at precision for every generator.
pub fn eigen_system_appears(
    gens: &[BoundedOperator],
    system: &EigenSystem,
) -> Result<bool, IwasawaError> {
    for (g, lambda) in gens.iter().zip(&system.eigenvalues) {
        let id = BoundedOperator::identity(g.space.clone(), DEFAULT_PRECISION);
        let shifted = g.sub(&id.scale(lambda)?)?;
        // det via the constant term of the characteristic polynomial:
        // charpoly(M)(0) = det(-M) = ±det(M).
        let det = shifted.charpoly()?.coeff(0);
        if !det.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact rational threshold, serialized as a num/den pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kappa {
    pub num: i64,
    pub den: i64,
}

impl Kappa {
    pub fn new(num: i64, den: i64) -> Self {
        let r = Ratio::new(num, den);
        Kappa { num: *r.numer(), den: *r.denom() }
    }

    fn ratio(&self) -> Ratio<i64> {
        Ratio::new(self.num, self.den)
    }
}

impl std::fmt::Display for Kappa {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Outcome of the eigenvalue congruence check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CongruenceReport {
    pub kappa: Kappa,
    /// Per-generator valuation of `λ_i - λ'_i`.
    pub valuations: Vec<Valuation>,
    /// Minimum over generators: the observed congruence exponent.
    pub kappa_observed: Valuation,
    /// Every difference valuation is ≥ kappa.
    pub pass: bool,
}

/// Check `λ ≡ λ' mod p^κ` for two eigen-systems with equal residue
/// signatures. `κ` defaults to `1/n` with `n` the minimal uniform exponent
/// of the family. Systems with mismatching signatures make the hypothesis
/// vacuous and are reported as `ResidueMismatch`.
pub fn congruence_check(
    family: &GroupAction,
    lambda: &EigenSystem,
    lambda_prime: &EigenSystem,
    kappa: Option<Kappa>,
) -> Result<CongruenceReport, IwasawaError> {
    if lambda.eigenvalues.len() != family.arity() || lambda_prime.eigenvalues.len() != family.arity()
    {
        return Err(IwasawaError::ArityMismatch {
            want: family.arity(),
            got: lambda.eigenvalues.len(),
        });
    }
    if !eigen_system_appears(family.generators(), lambda)? {
        return Err(IwasawaError::EigenSystemAbsent(0));
    }
    if !eigen_system_appears(family.generators(), lambda_prime)? {
        return Err(IwasawaError::EigenSystemAbsent(1));
    }
    let sig = lambda.residue_signature()?;
    let sig_prime = lambda_prime.residue_signature()?;
    for (i, (a, b)) in sig.iter().zip(&sig_prime).enumerate() {
        if a != b {
            return Err(IwasawaError::ResidueMismatch(i));
        }
    }
    let kappa = match kappa {
        Some(k) => k,
        None => {
            let n = family
                .minimal_uniform_exponent()?
                .ok_or(IwasawaError::NoUniformExponent(0))?;
            Kappa::new(1, n as i64)
        }
    };
    let mut valuations = Vec::with_capacity(family.arity());
    let mut observed: Option<Valuation> = None;
    let mut pass = true;
    for (a, b) in lambda.eigenvalues.iter().zip(&lambda_prime.eigenvalues) {
        let diff = a.sub(b)?;
        let v = diff.valuation();
        // v ≥ κ  ⟺  v * den ≥ num (den > 0). Infinite bounds pass at their
        // certified precision.
        let meets = match v {
            Valuation::Finite { v } => Ratio::from_integer(v) >= kappa.ratio(),
            Valuation::Infinite { at_precision } => {
                Ratio::from_integer(at_precision) >= kappa.ratio()
            }
        };
        pass &= meets;
        observed = Some(match observed {
            None => v,
            Some(o) => o.min_with(v),
        });
        valuations.push(v);
    }
    Ok(CongruenceReport {
        kappa,
        valuations,
        kappa_observed: observed.unwrap_or(Valuation::Infinite {
            at_precision: DEFAULT_PRECISION as i64,
        }),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banach::{Exactness, TruncatedSpace};
    use crate::fixtures::translation_operator;

    fn diag(p: u64, entries: &[i64]) -> BoundedOperator {
        let space = TruncatedSpace::plain(p, entries.len());
        let rows: Vec<Vec<i64>> = (0..entries.len())
            .map(|i| {
                (0..entries.len()).map(|j| if i == j { entries[i] } else { 0 }).collect()
            })
            .collect();
        BoundedOperator::from_int_matrix(space, &rows, DEFAULT_PRECISION, Exactness::FiltrationExact)
            .unwrap()
    }

    #[test]
    fn uniform_exponent_for_translation() {
        let a2 = GroupAction::new(vec![translation_operator(2, 2, DEFAULT_PRECISION)]).unwrap();
        assert_eq!(a2.minimal_uniform_exponent().unwrap(), Some(2));
        let a3 = GroupAction::new(vec![translation_operator(3, 2, DEFAULT_PRECISION)]).unwrap();
        assert_eq!(a3.minimal_uniform_exponent().unwrap(), Some(3));
        // g = I + pN with N nilpotent: T = pN contracts at once.
        let space = TruncatedSpace::plain(3, 2);
        let g = BoundedOperator::from_int_matrix(
            space,
            &[vec![1, 3], vec![0, 1]],
            DEFAULT_PRECISION,
            Exactness::FiltrationExact,
        )
        .unwrap();
        let a = GroupAction::new(vec![g]).unwrap();
        assert_eq!(a.minimal_uniform_exponent().unwrap(), Some(1));
    }

    #[test]
    fn polydisc_substitution_examples() {
        let action = GroupAction::new(vec![translation_operator(2, 2, DEFAULT_PRECISION)]).unwrap();
        // f = U_1 evaluates to Δ²/2, which maps X² to 1.
        let mut f = PolydiscFunction::new(2, 1);
        f.add_term(vec![1], vec![0], PadicScalar::one(2, DEFAULT_PRECISION)).unwrap();
        let op = polydisc_eval(&f, &action, 2).unwrap();
        assert!(op.matrix[0][2].agrees_with(&PadicScalar::one(2, DEFAULT_PRECISION)));
        assert!(op.norm_at_most_one());

        // f = 1 is the identity.
        let one = PolydiscFunction::constant(2, 1, PadicScalar::one(2, DEFAULT_PRECISION));
        let op = polydisc_eval(&one, &action, 2).unwrap();
        assert!(op.agrees_with(&BoundedOperator::identity(op.space.clone(), DEFAULT_PRECISION)));

        // f = S_1 * U_1 evaluates to Δ³/2 = 0 on degree ≤ 2.
        let mut f = PolydiscFunction::new(2, 1);
        f.add_term(vec![1], vec![1], PadicScalar::one(2, DEFAULT_PRECISION)).unwrap();
        let op = polydisc_eval(&f, &action, 2).unwrap();
        assert!(op.matrix.iter().flatten().all(|e| e.is_zero()));

        // Exponent below the minimum is rejected.
        let err = polydisc_eval(&one, &action, 1).unwrap_err();
        assert!(matches!(err, IwasawaError::ExponentTooSmall { given: 1, needed: 2 }));
    }

    #[test]
    fn power_fix_examples() {
        let g = translation_operator(2, 2, DEFAULT_PRECISION);
        let rep = power_fix_certificate(&g, 1).unwrap();
        assert!(rep.contraction && rep.fixes_mod_p);
        // m = 0 does not contract the translation.
        let rep = power_fix_certificate(&g, 0).unwrap();
        assert!(!rep.contraction);
        let id = BoundedOperator::identity(TruncatedSpace::plain(5, 2), DEFAULT_PRECISION);
        let rep = power_fix_certificate(&id, 0).unwrap();
        assert!(rep.contraction && rep.fixes_mod_p);
    }

    #[test]
    fn congruence_examples() {
        // diag(1, 1+p²) at p=3, κ=1: v(λ-λ') = 2 ≥ 1.
        let g = diag(3, &[1, 10]);
        let family = GroupAction::new(vec![g.clone()]).unwrap();
        let systems = triangular_eigen_systems(std::slice::from_ref(&g)).unwrap();
        let report =
            congruence_check(&family, &systems[0], &systems[1], Some(Kappa::new(1, 1))).unwrap();
        assert!(report.pass);
        assert_eq!(report.kappa_observed, Valuation::finite(2));

        // diag(1, 2) at p=5: residues differ, hypothesis vacuous.
        let g = diag(5, &[1, 2]);
        let family = GroupAction::new(vec![g.clone()]).unwrap();
        let systems = triangular_eigen_systems(std::slice::from_ref(&g)).unwrap();
        let err = congruence_check(&family, &systems[0], &systems[1], Some(Kappa::new(1, 1)));
        assert!(matches!(err, Err(IwasawaError::ResidueMismatch(0))));

        // Equal systems: infinite observed exponent.
        let g = diag(7, &[3, 3]);
        let family = GroupAction::new(vec![g.clone()]).unwrap();
        let systems = triangular_eigen_systems(std::slice::from_ref(&g)).unwrap();
        let report =
            congruence_check(&family, &systems[0], &systems[1], Some(Kappa::new(5, 1))).unwrap();
        assert!(report.pass);
        assert!(!report.kappa_observed.is_finite());
    }

    #[test]
    fn commuting_validation() {
        let space = TruncatedSpace::plain(5, 2);
        let a = BoundedOperator::from_int_matrix(
            space.clone(),
            &[vec![1, 1], vec![0, 1]],
            DEFAULT_PRECISION,
            Exactness::FiltrationExact,
        )
        .unwrap();
        let b = BoundedOperator::from_int_matrix(
            space,
            &[vec![1, 0], vec![1, 1]],
            DEFAULT_PRECISION,
            Exactness::FiltrationExact,
        )
        .unwrap();
        assert!(matches!(
            GroupAction::new(vec![a, b]),
            Err(IwasawaError::NonCommutingGenerators(0, 1))
        ));
    }
}
