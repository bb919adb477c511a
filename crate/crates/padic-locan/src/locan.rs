//! Local analyticity of operators and algebra actions.
//!
//! An operator `T` of norm ≤ 1 is locally analytic when some monic integral
//! polynomial `f` satisfies `f(T)(L) ⊆ pL`. On a truncation this is
//! decidable: for topologically nilpotent `T` the power `T^n` eventually
//! contracts, the characteristic polynomial always works (Cayley-Hamilton),
//! and the witness factors mod p as `X^k g(X)` with `g(0) ≠ 0`, forcing
//! `T^k ≡ 0 mod p`. Algebra actions are certified by computing the finite
//! image of the generated ring in `End(L/p^n L)`.

use crate::banach::{BoundedOperator, OperatorError};
use crate::padic::DEFAULT_PRECISION;
use crate::poly::PadicPoly;
use crate::residue::{fp_express, HowellSpan, ResidueMatrix};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocanError {
    #[error("operator norm exceeds 1")]
    NormExceedsOne,
    #[error("witness polynomial must be monic and integral")]
    WitnessNotMonicIntegral,
    #[error("witness does not certify: f(T)(L) ⊄ pL at available precision")]
    WitnessDoesNotCertify,
    #[error("operator is not topologically nilpotent on the truncation")]
    NotTopNilpotent,
    #[error("residue cofactor g(T) is not invertible mod p; T is not topologically nilpotent")]
    CofactorNotInvertible,
    #[error("kernel-ideal product does not vanish mod p^{exponent}: indices {indices:?}")]
    CounterexampleFound { exponent: u32, indices: Vec<usize> },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Padic(#[from] crate::padic::PadicError),
    #[error(transparent)]
    Residue(#[from] crate::residue::ResidueError),
}

/// How a local-analyticity witness was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessMode {
    #[serde(rename = "charpoly")]
    CharPoly,
    #[serde(rename = "power")]
    Power,
    #[serde(rename = "minimal-poly-lift")]
    MinimalPolyLift,
}

/// A verified witness: `witness_poly` is monic integral and
/// `witness_poly(T)(L) ⊆ pL` has been re-checked on construction.
#[derive(Debug, Clone)]
pub struct LocAnCertificate {
    pub witness_poly: PadicPoly,
    /// Degree of the witness; for `mode = Power` this is the contraction
    /// exponent `n` with `T^n(L) ⊆ pL`.
    pub verified_exponent: u32,
    pub mode: WitnessMode,
}

/// Evaluate a polynomial at an operator by Horner; the exactness flag
/// propagates through the operator arithmetic.
pub fn poly_apply(f: &PadicPoly, t: &BoundedOperator) -> Result<BoundedOperator, LocanError> {
    let mut acc = BoundedOperator::zero(t.space.clone(), 2 * DEFAULT_PRECISION as i64);
    let id = BoundedOperator::identity(t.space.clone(), DEFAULT_PRECISION);
    for c in f.coeffs().iter().rev() {
        acc = acc.compose(t)?.add(&id.scale(c)?)?;
    }
    // An empty polynomial is the zero operator.
    if f.coeffs().is_empty() {
        acc = BoundedOperator::zero(t.space.clone(), DEFAULT_PRECISION as i64);
    }
    Ok(acc)
}

/// Topological nilpotence on the truncation: the mod-p residue matrix is
/// nilpotent. Returns the nilpotency index of the residue.
pub fn top_nilpotency(t: &BoundedOperator) -> Result<Option<u32>, LocanError> {
    let r = t.reduce(1)?;
    Ok(r.matrix.nilpotency_index_mod_p())
}

/// Minimal `n` with `T^n(L) ⊆ pL`, found by repeated composition, searched
/// up to `dim * p` (the residue nilpotency index is ≤ dim, so the bound is
/// never the binding constraint for genuinely nilpotent residues).
pub fn locan_degree(t: &BoundedOperator) -> Result<Option<u32>, LocanError> {
    if !t.norm_at_most_one() {
        return Err(LocanError::NormExceedsOne);
    }
    let bound = (t.dim() as u64 * t.prime()).max(1);
    let mut power = t.clone();
    for n in 1..=bound {
        if power.certify_image(1) {
            return Ok(Some(n as u32));
        }
        if n < bound {
            power = power.compose(t)?;
        }
    }
    Ok(None)
}

/// Certificate from the characteristic polynomial: `f(T) = 0` exactly on a
/// finite truncation, so `f(T)(L) ⊆ pL` for free.
pub fn charpoly_witness(t: &BoundedOperator) -> Result<LocAnCertificate, LocanError> {
    if !t.norm_at_most_one() {
        return Err(LocanError::NormExceedsOne);
    }
    let f = t.charpoly()?;
    finish_certificate(f, t, WitnessMode::CharPoly)
}

/// Certificate `f = X^n` from the contraction degree, when one exists.
pub fn power_witness(t: &BoundedOperator) -> Result<Option<LocAnCertificate>, LocanError> {
    match locan_degree(t)? {
        None => Ok(None),
        Some(n) => {
            let f = PadicPoly::power(t.prime(), n as usize, DEFAULT_PRECISION);
            Ok(Some(finish_certificate(f, t, WitnessMode::Power)?))
        }
    }
}

/// Certificate from a monic integral lift of the residue minimal polynomial:
/// `f(T) ≡ minpoly(T mod p)(T) ≡ 0 mod p`. Usually lower degree than the
/// characteristic polynomial.
pub fn minimal_poly_witness(t: &BoundedOperator) -> Result<LocAnCertificate, LocanError> {
    if !t.norm_at_most_one() {
        return Err(LocanError::NormExceedsOne);
    }
    let coeffs = t.reduce(1)?.matrix.minimal_poly_mod_p();
    let f = PadicPoly::from_ints(
        t.prime(),
        &coeffs.iter().map(|&c| c as i64).collect::<Vec<_>>(),
        DEFAULT_PRECISION,
    );
    finish_certificate(f, t, WitnessMode::MinimalPolyLift)
}

fn finish_certificate(
    f: PadicPoly,
    t: &BoundedOperator,
    mode: WitnessMode,
) -> Result<LocAnCertificate, LocanError> {
    if !f.is_monic() || !f.is_integral() {
        return Err(LocanError::WitnessNotMonicIntegral);
    }
    let applied = poly_apply(&f, t)?;
    if !applied.certify_image(1) {
        return Err(LocanError::WitnessDoesNotCertify);
    }
    let verified_exponent = f.degree_bound().unwrap_or(0) as u32;
    Ok(LocAnCertificate { witness_poly: f, verified_exponent, mode })
}

/// Outcome of factoring a witness modulo p for a topologically nilpotent
/// operator: `f mod p = X^k g(X)` with `g(0) ≠ 0`, `g(T)` invertible mod p,
/// and the verified conclusion `T^k ≡ 0` in `End(L/pL)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessSplit {
    pub power: u32,
    /// Coefficients of `g` mod p, constant term first.
    pub cofactor: Vec<u64>,
    pub cofactor_invertible: bool,
    pub power_annihilates_mod_p: bool,
}

/// Split a verified witness into its nilpotent part: writes `f mod p` as
/// `X^k g(X)` with `g(0) ≠ 0`, checks `g(T)` is invertible over `F_p`
/// (true whenever `T` is topologically nilpotent), and confirms the
/// conclusion `T^k ≡ 0 mod p`.
pub fn witness_split(t: &BoundedOperator, f: &PadicPoly) -> Result<WitnessSplit, LocanError> {
    if !f.is_monic() || !f.is_integral() {
        return Err(LocanError::WitnessNotMonicIntegral);
    }
    if !poly_apply(f, t)?.certify_image(1) {
        return Err(LocanError::WitnessDoesNotCertify);
    }
    if top_nilpotency(t)?.is_none() {
        return Err(LocanError::NotTopNilpotent);
    }
    let res = f.residue_coeffs()?;
    let k = res.iter().position(|&c| c != 0).unwrap_or(res.len()) as u32;
    let cofactor: Vec<u64> = res[k as usize..].to_vec();
    // g(T) over F_p, then invertibility via det.
    let residue_t = t.reduce(1)?.matrix;
    let mut g_at_t = ResidueMatrix::zero(t.prime(), 1, t.dim());
    let mut power = ResidueMatrix::identity(t.prime(), 1, t.dim());
    for (i, &c) in cofactor.iter().enumerate() {
        if c != 0 {
            let mut term = power.clone();
            for e in term.entries.iter_mut() {
                *e = (&*e * c) % BigUint::from(t.prime());
            }
            for (dst, src) in g_at_t.entries.iter_mut().zip(term.entries.iter()) {
                *dst = (&*dst + src) % BigUint::from(t.prime());
            }
        }
        if i + 1 < cofactor.len() {
            power = power.mul(&residue_t)?;
        }
    }
    let cofactor_invertible = g_at_t.det_mod_p() != 0;
    if !cofactor_invertible {
        return Err(LocanError::CofactorNotInvertible);
    }
    let power_annihilates_mod_p = residue_t.pow(k)?.is_zero();
    Ok(WitnessSplit { power: k, cofactor, cofactor_invertible, power_annihilates_mod_p })
}

/// The finite image of the ring generated by operator residues inside
/// `End(L/p^n L)`: a spanning set in Howell form, its rank, and the
/// resulting size bound `(p^n)^rank`.
#[derive(Debug, Clone)]
pub struct AlgebraImage {
    pub prime: u64,
    pub exponent: u32,
    pub generator_residues: Vec<ResidueMatrix>,
    pub closure_basis: Vec<ResidueMatrix>,
    pub rank: usize,
}

impl AlgebraImage {
    /// `log_p` of the size bound `(p^n)^rank`.
    pub fn size_bound_exponent(&self) -> u64 {
        self.exponent as u64 * self.rank as u64
    }
}

/// Compute the unital subring of `End(L/p^n L)` generated by the reductions
/// of `gens`, as a `Z/p^n`-span closed under right multiplication by each
/// generator (which, starting from the identity, reaches every word).
pub fn algebra_closure(
    gens: &[BoundedOperator],
    n: u32,
) -> Result<AlgebraImage, LocanError> {
    // With no generators the unital closure is the scalars: rank 1 on a
    // one-dimensional stand-in space.
    let (prime, dim) = match gens.first() {
        Some(g) => (g.prime(), g.dim()),
        None => (2, 1),
    };
    for g in gens {
        if g.prime() != prime || g.dim() != dim {
            return Err(LocanError::Operator(OperatorError::SpaceMismatch));
        }
        if !g.norm_at_most_one() {
            return Err(LocanError::NormExceedsOne);
        }
    }
    let residues: Vec<ResidueMatrix> = gens
        .iter()
        .map(|g| g.reduce(n).map(|r| r.matrix))
        .collect::<Result<_, _>>()?;
    Ok(algebra_closure_residues(prime, n, dim, &residues))
}

/// Closure over already-reduced matrices; shared with the harness.
pub fn algebra_closure_residues(
    prime: u64,
    n: u32,
    dim: usize,
    residues: &[ResidueMatrix],
) -> AlgebraImage {
    let mut span = HowellSpan::new(prime, n, dim * dim);
    let mut basis: Vec<ResidueMatrix> = Vec::new();
    let mut queue: Vec<ResidueMatrix> = Vec::new();
    let id = ResidueMatrix::identity(prime, n, dim);
    if span.insert(&id.entries) {
        basis.push(id.clone());
        queue.push(id);
    }
    while let Some(b) = queue.pop() {
        for r in residues {
            let prod = b.mul(r).expect("same shape");
            if span.insert(&prod.entries) {
                basis.push(prod.clone());
                queue.push(prod);
            }
        }
    }
    AlgebraImage {
        prime,
        exponent: n,
        generator_residues: residues.to_vec(),
        closure_basis: basis,
        rank: span.rank(),
    }
}

impl AlgebraImage {
    /// Closure invariant: the basis is closed (up to span) under
    /// multiplication by every generator residue.
    pub fn verify_closed(&self) -> bool {
        let dim = self.closure_basis.first().map(|m| m.dim).unwrap_or(1);
        let mut span = HowellSpan::new(self.prime, self.exponent, dim * dim);
        for b in &self.closure_basis {
            span.insert(&b.entries);
        }
        for b in &self.closure_basis {
            for g in &self.generator_residues {
                let prod = b.mul(g).expect("same shape");
                if !span.contains(&prod.entries) {
                    return false;
                }
            }
        }
        true
    }
}

/// Report of the kernel-ideal power check: a basis of
/// `I_1 = {a in the image ring : a(L) ⊆ pL}` was computed, and every product
/// of `n` basis elements annihilated `L/p^n L`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelIdealReport {
    pub exponent: u32,
    pub kernel_rank: usize,
    pub products_checked: u64,
}

/// Verify, inside the finite image ring mod `p^n`, that every product of
/// `n` elements of the mod-p kernel ideal `I_1` vanishes. A counterexample
/// would contradict the containment `I_1^n ⊆ I_n` and signals an arithmetic
/// bug upstream.
pub fn kernel_ideal_power_check(
    gens: &[BoundedOperator],
    n: u32,
) -> Result<KernelIdealReport, LocanError> {
    let image = algebra_closure(gens, n)?;
    let prime = image.prime;
    let dim = image.closure_basis.first().map(|m| m.dim).unwrap_or(1);
    let modulus = BigUint::from(prime).pow(n);

    // I_1 = kernel of (closure mod p^n) -> End(L/pL). Generated by p * basis
    // together with lifts of the F_p-kernel of the reduction of the basis.
    let basis_mod_p: Vec<Vec<u64>> = image
        .closure_basis
        .iter()
        .map(|b| {
            b.entries
                .iter()
                .map(|e| (e % prime).to_u64_digits().first().copied().unwrap_or(0))
                .collect()
        })
        .collect();
    let mut kernel_gens: Vec<ResidueMatrix> = Vec::new();
    for b in &image.closure_basis {
        let mut scaled = b.clone();
        for e in scaled.entries.iter_mut() {
            *e = (&*e * prime) % &modulus;
        }
        if !scaled.is_zero() {
            kernel_gens.push(scaled);
        }
    }
    // F_p-kernel of the span map: combinations of basis elements that die mod p.
    for mask in combination_kernel(prime, &basis_mod_p) {
        let mut acc = ResidueMatrix::zero(prime, n, dim);
        for (c, b) in mask.iter().zip(image.closure_basis.iter()) {
            if *c != 0 {
                for (dst, src) in acc.entries.iter_mut().zip(b.entries.iter()) {
                    *dst = (&*dst + src * BigUint::from(*c)) % &modulus;
                }
            }
        }
        if !acc.is_zero() {
            kernel_gens.push(acc);
        }
    }

    // Howell-normalize the kernel generators to a deterministic echelon basis.
    let mut span = HowellSpan::new(prime, n, dim * dim);
    for g in &kernel_gens {
        span.insert(&g.entries);
    }
    let kernel_basis: Vec<ResidueMatrix> = span
        .basis()
        .into_iter()
        .map(|entries| ResidueMatrix { prime, exponent: n, dim, entries })
        .collect();

    // Every ordered product of n kernel elements must vanish mod p^n.
    let k = kernel_basis.len();
    let mut products_checked = 0u64;
    if k > 0 && n >= 1 {
        let mut indices = vec![0usize; n as usize];
        loop {
            let mut prod = ResidueMatrix::identity(prime, n, dim);
            for &i in &indices {
                prod = prod.mul(&kernel_basis[i]).expect("same shape");
            }
            products_checked += 1;
            if !prod.is_zero() {
                return Err(LocanError::CounterexampleFound {
                    exponent: n,
                    indices: indices.clone(),
                });
            }
            // Odometer over k^n tuples.
            let mut pos = 0;
            loop {
                if pos == indices.len() {
                    break;
                }
                indices[pos] += 1;
                if indices[pos] < k {
                    break;
                }
                indices[pos] = 0;
                pos += 1;
            }
            if pos == indices.len() {
                break;
            }
        }
    }
    Ok(KernelIdealReport { exponent: n, kernel_rank: k, products_checked })
}

/// Basis of `{c : sum c_i b_i ≡ 0 mod p}`: row-reduce the `b_i` with
/// coordinate tracking; rows that vanish give kernel combinations.
fn combination_kernel(p: u64, basis: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let k = basis.len();
    if k == 0 {
        return vec![];
    }
    let n = basis[0].len();
    // Row-reduce [basis_i] as rows with coordinate tracking; rows that reduce
    // to zero give kernel combinations.
    let mut reduced: Vec<(usize, Vec<u64>, Vec<u64>)> = Vec::new();
    let mut kernel = Vec::new();
    for (i, b) in basis.iter().enumerate() {
        let mut vec: Vec<u64> = b.iter().map(|&x| x % p).collect();
        let mut coord = vec![0u64; k];
        coord[i] = 1;
        for (pc, pv, pcd) in &reduced {
            let f = vec[*pc];
            if f != 0 {
                for j in 0..n {
                    vec[j] = (vec[j] + (p - f) * pv[j] % p) % p;
                }
                for j in 0..k {
                    coord[j] = (coord[j] + (p - f) * pcd[j] % p) % p;
                }
            }
        }
        if let Some(lead) = (0..n).find(|&j| vec[j] != 0) {
            let inv = super_mod_inverse(vec[lead], p);
            for j in 0..n {
                vec[j] = vec[j] * inv % p;
            }
            for j in 0..k {
                coord[j] = coord[j] * inv % p;
            }
            reduced.push((lead, vec, coord));
        } else {
            kernel.push(coord);
        }
    }
    kernel
}

fn super_mod_inverse(a: u64, p: u64) -> u64 {
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// Summary produced for the operator-analysis report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorAnalysis {
    pub top_nilpotent: bool,
    pub nilpotency_index: Option<u32>,
    pub locan_degree: Option<u32>,
    pub witness_degree: u32,
    pub closure_rank_mod_p: usize,
}

/// One-call analysis used by the CLI.
pub fn analyze_operator(t: &BoundedOperator) -> Result<(OperatorAnalysis, PadicPoly), LocanError> {
    let nil = top_nilpotency(t)?;
    let degree = locan_degree(t)?;
    let cert = charpoly_witness(t)?;
    let closure = algebra_closure(std::slice::from_ref(t), 1)?;
    Ok((
        OperatorAnalysis {
            top_nilpotent: nil.is_some(),
            nilpotency_index: nil,
            locan_degree: degree,
            witness_degree: cert.verified_exponent,
            closure_rank_mod_p: closure.rank,
        },
        cert.witness_poly,
    ))
}

/// Brute-force span enumeration oracle over F_p: enumerate every word in the
/// generators length by length, collect the F_p-span with naive elimination,
/// and stop after a full extra length adds nothing. Deliberately independent
/// of the Howell machinery.
pub fn brute_force_word_span_rank(prime: u64, dim: usize, residues: &[ResidueMatrix]) -> usize {
    let to_vec = |m: &ResidueMatrix| -> Vec<u64> {
        m.entries
            .iter()
            .map(|e| (e % prime).to_u64_digits().first().copied().unwrap_or(0))
            .collect()
    };
    let gens: Vec<ResidueMatrix> = residues.iter().map(|r| r.reduce_to(1)).collect();
    let mut span_vecs: Vec<Vec<u64>> = Vec::new();
    let mut current_length: Vec<ResidueMatrix> = vec![ResidueMatrix::identity(prime, 1, dim)];
    span_vecs.push(to_vec(&current_length[0]));
    loop {
        let mut next_length: Vec<ResidueMatrix> = Vec::new();
        let mut seen: std::collections::HashSet<Vec<u64>> = std::collections::HashSet::new();
        let mut grew = false;
        for w in &current_length {
            for g in &gens {
                let prod = w.mul(g).expect("same shape");
                let v = to_vec(&prod);
                if fp_express(prime, &span_vecs, &v).is_none() {
                    span_vecs.push(v.clone());
                    grew = true;
                }
                if seen.insert(v) {
                    next_length.push(prod);
                }
            }
        }
        // If a whole length added no direction, longer words cannot either:
        // every longer word is (shorter word) * generator, and the span is
        // stable under right multiplication once a length contributes nothing.
        if !grew || next_length.is_empty() || next_length.len() > 4096 {
            break;
        }
        current_length = next_length;
    }
    span_vecs.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banach::{Exactness, TruncatedSpace};
    use crate::fixtures::{forward_difference, random_nilres_operator, translation_operator};
    use crate::padic::PadicScalar;

    #[test]
    fn translation_witness_certifies() {
        // (T^p - 1) F = F(X+p) - F(X) lands in p Z_p[X].
        for p in [2u64, 3, 5] {
            let t = translation_operator(p, 2, DEFAULT_PRECISION);
            let f = PadicPoly::power_minus_one(p, p as usize, DEFAULT_PRECISION);
            let applied = poly_apply(&f, &t).unwrap();
            assert!(applied.certify_image(1), "p = {p}");
        }
    }

    #[test]
    fn poly_apply_identity_and_cayley_hamilton() {
        let t = forward_difference(2, 2, DEFAULT_PRECISION);
        let x = PadicPoly::from_ints(2, &[0, 1], DEFAULT_PRECISION);
        assert!(poly_apply(&x, &t).unwrap().agrees_with(&t));
        // (X-1)^2 kills [[1,1],[0,1]].
        let space = TruncatedSpace::plain(5, 2);
        let u = BoundedOperator::from_int_matrix(
            space,
            &[vec![1, 1], vec![0, 1]],
            DEFAULT_PRECISION,
            Exactness::FiltrationExact,
        )
        .unwrap();
        let f = u.charpoly().unwrap();
        let applied = poly_apply(&f, &u).unwrap();
        assert!(applied.matrix.iter().flatten().all(|e| e.is_zero()));
    }

    #[test]
    fn top_nilpotency_examples() {
        // Residue indices: Δ² = 2·E dies mod 2 (index 2) but survives mod 3
        // (index 3); these equal the contraction degrees below.
        let delta = forward_difference(2, 2, DEFAULT_PRECISION);
        assert_eq!(top_nilpotency(&delta).unwrap(), Some(2));
        let delta = forward_difference(3, 2, DEFAULT_PRECISION);
        assert_eq!(top_nilpotency(&delta).unwrap(), Some(3));
        let t = translation_operator(2, 2, DEFAULT_PRECISION);
        assert_eq!(top_nilpotency(&t).unwrap(), None);
        let id = BoundedOperator::identity(TruncatedSpace::plain(3, 2), DEFAULT_PRECISION);
        let p_id = id.scale(&PadicScalar::from_int(3, 3, DEFAULT_PRECISION)).unwrap();
        assert_eq!(top_nilpotency(&p_id).unwrap(), Some(1));
    }

    #[test]
    fn locan_degree_examples() {
        let delta2 = forward_difference(2, 2, DEFAULT_PRECISION);
        assert_eq!(locan_degree(&delta2).unwrap(), Some(2));
        let delta3 = forward_difference(3, 2, DEFAULT_PRECISION);
        assert_eq!(locan_degree(&delta3).unwrap(), Some(3));
        let id = BoundedOperator::identity(TruncatedSpace::plain(3, 2), DEFAULT_PRECISION);
        assert_eq!(locan_degree(&id).unwrap(), None);
    }

    #[test]
    fn witness_split_examples() {
        // Δ at p=2 with f = X^3: k = 3, g = 1, Δ^3 ≡ 0.
        let delta = forward_difference(2, 2, DEFAULT_PRECISION);
        let f = PadicPoly::power(2, 3, DEFAULT_PRECISION);
        let split = witness_split(&delta, &f).unwrap();
        assert_eq!(split.power, 3);
        assert_eq!(split.cofactor, vec![1]);
        assert!(split.power_annihilates_mod_p);

        // pI with f = X - p: f mod p = X, k = 1.
        let id = BoundedOperator::identity(TruncatedSpace::plain(3, 2), DEFAULT_PRECISION);
        let p_id = id.scale(&PadicScalar::from_int(3, 3, DEFAULT_PRECISION)).unwrap();
        let f = PadicPoly::from_ints(3, &[-3, 1], DEFAULT_PRECISION);
        let split = witness_split(&p_id, &f).unwrap();
        assert_eq!(split.power, 1);
        assert!(split.power_annihilates_mod_p);

        // Δ at p=3 with f = X^3.
        let delta = forward_difference(3, 2, DEFAULT_PRECISION);
        let f = PadicPoly::power(3, 3, DEFAULT_PRECISION);
        let split = witness_split(&delta, &f).unwrap();
        assert_eq!(split.power, 3);
        assert!(split.power_annihilates_mod_p);
    }

    #[test]
    fn closure_rank_examples() {
        let space = TruncatedSpace::plain(5, 2);
        let diag = BoundedOperator::from_int_matrix(
            space,
            &[vec![1, 0], vec![0, 2]],
            DEFAULT_PRECISION,
            Exactness::FiltrationExact,
        )
        .unwrap();
        let img = algebra_closure(std::slice::from_ref(&diag), 1).unwrap();
        assert_eq!(img.rank, 2);
        assert!(img.verify_closed());

        let empty = algebra_closure(&[], 1).unwrap();
        assert_eq!(empty.rank, 1);

        // Mod 2 the square of the difference operator vanishes: rank 2.
        let delta = forward_difference(2, 2, DEFAULT_PRECISION);
        let img = algebra_closure(std::slice::from_ref(&delta), 1).unwrap();
        assert_eq!(img.rank, 2); // I, Δ
        assert_eq!(brute_force_word_span_rank(2, 3, &img.generator_residues), 2);
        // Mod 3 it survives one more step: I, Δ, Δ².
        let delta = forward_difference(3, 2, DEFAULT_PRECISION);
        let img = algebra_closure(std::slice::from_ref(&delta), 1).unwrap();
        assert_eq!(img.rank, 3);
        assert_eq!(brute_force_word_span_rank(3, 3, &img.generator_residues), 3);
    }

    #[test]
    fn closure_rank_monotone_in_exponent() {
        let delta = forward_difference(2, 3, DEFAULT_PRECISION);
        let mut last = None;
        for n in 1..=4u32 {
            let rank = algebra_closure(std::slice::from_ref(&delta), n).unwrap().rank;
            if let Some(prev) = last {
                assert!(rank >= prev, "rank mod p^{n} = {rank} < {prev}");
            }
            last = Some(rank);
        }
    }

    #[test]
    fn kernel_ideal_products_vanish() {
        // {pI}, n=2.
        let id = BoundedOperator::identity(TruncatedSpace::plain(2, 2), DEFAULT_PRECISION);
        let p_id = id.scale(&PadicScalar::from_int(2, 2, DEFAULT_PRECISION)).unwrap();
        let rep = kernel_ideal_power_check(std::slice::from_ref(&p_id), 2).unwrap();
        assert!(rep.kernel_rank >= 1);

        // {Δ} at p=2, deg ≤ 2, n=2.
        let delta = forward_difference(2, 2, DEFAULT_PRECISION);
        let rep = kernel_ideal_power_check(std::slice::from_ref(&delta), 2).unwrap();
        assert!(rep.products_checked > 0);

        // {I}, n=3: I_1 = (p), cubes vanish mod 8.
        let rep = kernel_ideal_power_check(std::slice::from_ref(&id), 3).unwrap();
        assert!(rep.products_checked > 0);
    }

    #[test]
    fn witness_equivalence_on_seeded_fixtures() {
        // locan_degree exists iff the charpoly witness certifies, and the
        // witness split power dominates the residue nilpotency index.
        for seed in 0..20u64 {
            for p in [2u64, 3, 5] {
                let t = random_nilres_operator(p, 3, seed, DEFAULT_PRECISION);
                let degree = locan_degree(&t).unwrap();
                assert!(degree.is_some(), "nilres fixture must contract (p={p}, seed={seed})");
                let cert = charpoly_witness(&t).unwrap();
                let split = witness_split(&t, &cert.witness_poly).unwrap();
                let nil = top_nilpotency(&t).unwrap().unwrap();
                assert!(split.power >= nil);
                assert_eq!(degree.unwrap(), nil);
            }
        }
    }
}
