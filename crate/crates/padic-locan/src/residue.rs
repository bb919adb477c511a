//! Exact linear algebra over `Z/p^n`: matrices, span closure in Howell
//! form, kernels, and the mod-p tools (nilpotency, minimal polynomials)
//! that the diagnostics are built on.
//!
//! Submodules of `(Z/p^n)^m` are not free, so plain Gaussian elimination
//! does not test membership correctly; the Howell construction (insert
//! `p^(n-a) * row` whenever a pivot row leads with `p^a`) repairs that.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResidueError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("modulus mismatch")]
    ModulusMismatch,
}

fn pow_p(p: u64, e: u32) -> BigUint {
    BigUint::from(p).pow(e)
}

/// Valuation of `x` in `[0, p^n)`, capped at `n` for `x = 0`.
fn val_mod(p: u64, n: u32, x: &BigUint) -> u32 {
    if x.is_zero() {
        return n;
    }
    let p = BigUint::from(p);
    let mut v = 0;
    let mut cur = x.clone();
    loop {
        let (q, r) = cur.div_rem(&p);
        if r.is_zero() {
            v += 1;
            cur = q;
        } else {
            return v;
        }
    }
}

fn unit_inverse(p: u64, n: u32, u: &BigUint) -> BigUint {
    // u is a unit mod p^n; extended Euclid on BigInt.
    use num_bigint::BigInt;
    use num_traits::Signed;
    let m = BigInt::from(pow_p(p, n));
    let e = BigInt::from(u.clone()).extended_gcd(&m);
    debug_assert!(e.gcd.is_one());
    let mut inv = e.x % &m;
    if inv.is_negative() {
        inv += &m;
    }
    inv.to_biguint().expect("nonnegative")
}

/// A square matrix over `Z/p^n` with canonical entries in `[0, p^n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueMatrix {
    pub prime: u64,
    pub exponent: u32,
    pub dim: usize,
    /// Row-major, `entries[i * dim + j]` = row i, column j.
    pub entries: Vec<BigUint>,
}

impl ResidueMatrix {
    pub fn zero(prime: u64, exponent: u32, dim: usize) -> Self {
        ResidueMatrix { prime, exponent, dim, entries: vec![BigUint::zero(); dim * dim] }
    }

    pub fn identity(prime: u64, exponent: u32, dim: usize) -> Self {
        let mut m = Self::zero(prime, exponent, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = BigUint::one();
        }
        m
    }

    pub fn modulus(&self) -> BigUint {
        pow_p(self.prime, self.exponent)
    }

    pub fn at(&self, i: usize, j: usize) -> &BigUint {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigUint) {
        self.entries[i * self.dim + j] = v % self.modulus();
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ResidueError> {
        if self.dim != other.dim {
            return Err(ResidueError::DimensionMismatch(self.dim, other.dim));
        }
        if self.prime != other.prime || self.exponent != other.exponent {
            return Err(ResidueError::ModulusMismatch);
        }
        let d = self.dim;
        let m = self.modulus();
        let mut out = Self::zero(self.prime, self.exponent, d);
        for i in 0..d {
            for k in 0..d {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let cur = out.at(i, j) + a * other.at(k, j);
                    out.entries[i * d + j] = cur % &m;
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self, ResidueError> {
        let mut acc = Self::identity(self.prime, self.exponent, self.dim);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Reduce modulo a smaller power of p.
    pub fn reduce_to(&self, exponent: u32) -> Self {
        assert!(exponent <= self.exponent);
        let m = pow_p(self.prime, exponent);
        ResidueMatrix {
            prime: self.prime,
            exponent,
            dim: self.dim,
            entries: self.entries.iter().map(|e| e % &m).collect(),
        }
    }

    /// Nilpotency index over `Z/p`: the least `k ≤ dim` with `M^k = 0`,
    /// after reduction mod p. `None` when the mod-p matrix is not nilpotent.
    pub fn nilpotency_index_mod_p(&self) -> Option<u32> {
        let m = self.reduce_to(1);
        let mut acc = m.clone();
        for k in 1..=(self.dim.max(1) as u32) {
            if acc.is_zero() {
                return Some(k);
            }
            acc = acc.mul(&m).ok()?;
        }
        None
    }

    /// Determinant mod p, by Gaussian elimination over `F_p`.
    pub fn det_mod_p(&self) -> u64 {
        let p = self.prime;
        let d = self.dim;
        let mut a: Vec<u64> = self
            .entries
            .iter()
            .map(|e| (e % p).to_u64_digits().first().copied().unwrap_or(0))
            .collect();
        let mut det = 1u64;
        for col in 0..d {
            let pivot = (col..d).find(|&r| a[r * d + col] % p != 0);
            let Some(pr) = pivot else { return 0 };
            if pr != col {
                for j in 0..d {
                    a.swap(pr * d + j, col * d + j);
                }
                det = (p - det % p) % p;
            }
            let inv = mod_inverse_u64(a[col * d + col] % p, p);
            det = det * (a[col * d + col] % p) % p;
            for r in (col + 1)..d {
                let factor = a[r * d + col] % p * inv % p;
                if factor == 0 {
                    continue;
                }
                for j in col..d {
                    let sub = factor * (a[col * d + j] % p) % p;
                    a[r * d + j] = (a[r * d + j] % p + p - sub) % p;
                }
            }
        }
        det % p
    }

    /// Minimal polynomial of the mod-p reduction, as coefficients in
    /// `[0, p)` with monic leading 1, constant term first.
    pub fn minimal_poly_mod_p(&self) -> Vec<u64> {
        let p = self.prime;
        let d = self.dim;
        let m = self.reduce_to(1);
        // Vectorized powers I, M, M^2, ... ; find the first dependency.
        let mut powers: Vec<Vec<u64>> = Vec::new();
        let mut acc = ResidueMatrix::identity(p, 1, d);
        loop {
            let vec: Vec<u64> = acc
                .entries
                .iter()
                .map(|e| (e % p).to_u64_digits().first().copied().unwrap_or(0))
                .collect();
            if let Some(combo) = fp_express(p, &powers, &vec) {
                // M^k = sum combo_i M^i  ->  min poly = X^k - sum combo_i X^i.
                let k = powers.len();
                let mut coeffs = vec![0u64; k + 1];
                for (i, c) in combo.iter().enumerate() {
                    coeffs[i] = (p - c % p) % p;
                }
                coeffs[k] = 1;
                return coeffs;
            }
            powers.push(vec);
            acc = acc.mul(&m).expect("same shape");
        }
    }
}

fn mod_inverse_u64(a: u64, p: u64) -> u64 {
    // Fermat; p prime, a a unit.
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

/// Express `target` as an `F_p`-combination of `basis` vectors, if possible.
/// Returns the coefficients in basis order. Naive elimination; the vectors
/// here are small (dim ≤ a few hundred).
pub fn fp_express(p: u64, basis: &[Vec<u64>], target: &[u64]) -> Option<Vec<u64>> {
    let n = target.len();
    let k = basis.len();
    // Row-reduce the augmented system [basis^T | target] over F_p.
    let mut rows: Vec<(Vec<u64>, Vec<u64>)> = basis
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut coord = vec![0u64; k];
            coord[i] = 1;
            (b.iter().map(|&x| x % p).collect(), coord)
        })
        .collect();
    let mut t: Vec<u64> = target.iter().map(|&x| x % p).collect();
    let mut t_coord = vec![0u64; k];
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut reduced: Vec<(usize, Vec<u64>, Vec<u64>)> = Vec::new();
    for (vec, coord) in rows.drain(..) {
        let (mut vec, mut coord) = (vec, coord);
        for (pc, pv, pcd) in &reduced {
            let f = vec[*pc];
            if f != 0 {
                for j in 0..n {
                    vec[j] = (vec[j] + (p - f) * pv[j]) % p;
                }
                for j in 0..k {
                    coord[j] = (coord[j] + (p - f) * pcd[j]) % p;
                }
            }
        }
        if let Some(lead) = (0..n).find(|&j| vec[j] != 0) {
            let inv = mod_inverse_u64(vec[lead], p);
            for j in 0..n {
                vec[j] = vec[j] * inv % p;
            }
            for j in 0..k {
                coord[j] = coord[j] * inv % p;
            }
            pivot_cols.push(lead);
            reduced.push((lead, vec, coord));
        }
    }
    for (pc, pv, pcd) in &reduced {
        let f = t[*pc];
        if f != 0 {
            for j in 0..n {
                t[j] = (t[j] + (p - f) * pv[j]) % p;
            }
            for j in 0..k {
                t_coord[j] = (t_coord[j] + f * pcd[j]) % p;
            }
        }
    }
    if t.iter().all(|&x| x == 0) {
        Some(t_coord)
    } else {
        None
    }
}

/// A span of vectors in `(Z/p^n)^len` kept in Howell-style echelon form:
/// one pivot row per column, each leading with `p^a` after unit scaling,
/// and for every pivot with `a > 0` the completion `p^(n-a) * row` is also
/// inserted so that membership testing is exact for non-free submodules.
#[derive(Debug, Clone)]
pub struct HowellSpan {
    prime: u64,
    exponent: u32,
    len: usize,
    /// pivots[c] = row with leading column c (entry `p^a`), plus its lead valuation.
    pivots: Vec<Option<(u32, Vec<BigUint>)>>,
}

impl HowellSpan {
    pub fn new(prime: u64, exponent: u32, len: usize) -> Self {
        HowellSpan { prime, exponent, len, pivots: vec![None; len] }
    }

    pub fn rank(&self) -> usize {
        self.pivots.iter().filter(|p| p.is_some()).count()
    }

    /// Pivot rows ordered by leading column.
    pub fn basis(&self) -> Vec<Vec<BigUint>> {
        self.pivots
            .iter()
            .filter_map(|p| p.as_ref().map(|(_, row)| row.clone()))
            .collect()
    }

    /// Insert a vector; returns true when it enlarged the span.
    pub fn insert(&mut self, v: &[BigUint]) -> bool {
        assert_eq!(v.len(), self.len);
        let modulus = pow_p(self.prime, self.exponent);
        let mut grew = false;
        let mut queue: Vec<Vec<BigUint>> = vec![v.iter().map(|x| x % &modulus).collect()];
        while let Some(mut cur) = queue.pop() {
            let mut col = 0;
            while col < self.len {
                if cur[col].is_zero() {
                    col += 1;
                    continue;
                }
                let a_v = val_mod(self.prime, self.exponent, &cur[col]);
                match &self.pivots[col] {
                    Some((a_r, row)) if *a_r <= a_v => {
                        // Reduce cur by the pivot: q = cur[col] / p^{a_r} * lead_unit^{-1}.
                        // Pivot rows are normalized so their lead is exactly p^{a_r}.
                        let q = &cur[col] / pow_p(self.prime, *a_r);
                        for j in col..self.len {
                            let sub = (&q * &row[j]) % &modulus;
                            let cj = (&cur[j] + (&modulus - sub)) % &modulus;
                            cur[j] = cj;
                        }
                        debug_assert!(cur[col].is_zero());
                    }
                    Some((_, _)) => {
                        // New vector has a smaller lead valuation: it becomes
                        // the pivot, and the old pivot re-enters the queue.
                        let normalized = normalize_row(self.prime, self.exponent, &cur, col, a_v);
                        let old = self.pivots[col].take().expect("present");
                        self.pivots[col] = Some((a_v, normalized.clone()));
                        grew = true;
                        if a_v > 0 {
                            queue.push(scale_row(&normalized, &pow_p(self.prime, self.exponent - a_v), &modulus));
                        }
                        queue.push(old.1);
                        break;
                    }
                    None => {
                        let normalized = normalize_row(self.prime, self.exponent, &cur, col, a_v);
                        self.pivots[col] = Some((a_v, normalized.clone()));
                        grew = true;
                        if a_v > 0 {
                            queue.push(scale_row(&normalized, &pow_p(self.prime, self.exponent - a_v), &modulus));
                        }
                        break;
                    }
                }
            }
        }
        grew
    }

    /// Membership test without mutation.
    pub fn contains(&self, v: &[BigUint]) -> bool {
        let modulus = pow_p(self.prime, self.exponent);
        let mut cur: Vec<BigUint> = v.iter().map(|x| x % &modulus).collect();
        for col in 0..self.len {
            if cur[col].is_zero() {
                continue;
            }
            let a_v = val_mod(self.prime, self.exponent, &cur[col]);
            match &self.pivots[col] {
                Some((a_r, row)) if *a_r <= a_v => {
                    let q = &cur[col] / pow_p(self.prime, *a_r);
                    for j in col..self.len {
                        let sub = (&q * &row[j]) % &modulus;
                        cur[j] = (&cur[j] + (&modulus - sub)) % &modulus;
                    }
                }
                _ => return false,
            }
        }
        true
    }
}

fn normalize_row(p: u64, n: u32, row: &[BigUint], col: usize, lead_val: u32) -> Vec<BigUint> {
    // Scale by the inverse of the lead's unit part so the lead is p^lead_val.
    let modulus = pow_p(p, n);
    let unit = &row[col] / pow_p(p, lead_val);
    let inv = unit_inverse(p, n, &(unit % &modulus));
    row.iter().map(|x| (x * &inv) % &modulus).collect()
}

fn scale_row(row: &[BigUint], c: &BigUint, modulus: &BigUint) -> Vec<BigUint> {
    row.iter().map(|x| (x * c) % modulus).collect()
}

/// A span with coordinate tracking: vectors are stored augmented by unit
/// coordinates, so members can be expressed in terms of the inserted
/// spanning set. Used to restrict operators to invariant submodules.
#[derive(Debug, Clone)]
pub struct CoordSpan {
    span: HowellSpan,
    dim: usize,
    count: usize,
    prime: u64,
    exponent: u32,
}

impl CoordSpan {
    pub fn new(prime: u64, exponent: u32, vectors: &[Vec<BigUint>]) -> Self {
        let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
        let count = vectors.len();
        let mut span = HowellSpan::new(prime, exponent, dim + count);
        for (i, v) in vectors.iter().enumerate() {
            let mut aug = vec![BigUint::zero(); dim + count];
            aug[..dim].clone_from_slice(v);
            aug[dim + i] = BigUint::one();
            span.insert(&aug);
        }
        CoordSpan { span, dim, count, prime, exponent }
    }

    /// Number of pivots inside the vector block: the Howell rank of the span.
    pub fn rank(&self) -> usize {
        self.span.pivots[..self.dim].iter().filter(|p| p.is_some()).count()
    }

    /// Coordinates `c` with `w = sum c_i v_i`, when `w` lies in the span.
    /// Reduces only against pivots leading in the vector block; the negated
    /// augmentation then holds one valid coordinate vector.
    pub fn express(&self, w: &[BigUint]) -> Option<Vec<BigUint>> {
        assert_eq!(w.len(), self.dim);
        let modulus = pow_p(self.prime, self.exponent);
        let mut cur = vec![BigUint::zero(); self.dim + self.count];
        for (dst, src) in cur.iter_mut().zip(w.iter()) {
            *dst = src % &modulus;
        }
        for col in 0..self.dim {
            if cur[col].is_zero() {
                continue;
            }
            let a_v = val_mod(self.prime, self.exponent, &cur[col]);
            match &self.span.pivots[col] {
                Some((a_r, row)) if *a_r <= a_v => {
                    let q = &cur[col] / pow_p(self.prime, *a_r);
                    for j in col..self.dim + self.count {
                        let sub = (&q * &row[j]) % &modulus;
                        cur[j] = (&cur[j] + (&modulus - sub)) % &modulus;
                    }
                }
                _ => return None,
            }
        }
        // w = sum (-aug_i) v_i.
        Some(
            cur[self.dim..]
                .iter()
                .map(|x| (&modulus - (x % &modulus)) % &modulus)
                .collect(),
        )
    }

    pub fn contains(&self, w: &[BigUint]) -> bool {
        self.express(w).is_some()
    }
}

/// Kernel of the linear map `x -> M x` on `(Z/p^n)^cols`, where `M` is given
/// row-major with `rows x cols` shape. Returns spanning vectors of the kernel.
///
/// Method: Howell-reduce the rows `(column_j(M), e_j)` of `[M^T | I]`; rows
/// whose first block vanished give kernel generators in the second block.
pub fn kernel_mod_pn(
    prime: u64,
    exponent: u32,
    rows: usize,
    cols: usize,
    entries: &[BigUint],
) -> Vec<Vec<BigUint>> {
    let mut span = HowellSpan::new(prime, exponent, rows + cols);
    for j in 0..cols {
        let mut v = vec![BigUint::zero(); rows + cols];
        for i in 0..rows {
            v[i] = entries[i * cols + j].clone();
        }
        v[rows + j] = BigUint::one();
        span.insert(&v);
    }
    let mut kernel = Vec::new();
    for row in span.basis() {
        if row[..rows].iter().all(|x| x.is_zero()) {
            let tail = row[rows..].to_vec();
            if tail.iter().any(|x| !x.is_zero()) {
                kernel.push(tail);
            }
        }
    }
    kernel
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u64, n: u32, d: usize, ints: &[u64]) -> ResidueMatrix {
        ResidueMatrix {
            prime: p,
            exponent: n,
            dim: d,
            entries: ints.iter().map(|&x| BigUint::from(x) % pow_p(p, n)).collect(),
        }
    }

    #[test]
    fn nilpotency_of_strict_triangular() {
        let a = m(2, 1, 3, &[0, 1, 1, 0, 0, 2, 0, 0, 0]); // mod 2: strictly upper
        assert_eq!(a.nilpotency_index_mod_p(), Some(2)); // the (1,2) entry dies mod 2
        let b = m(2, 1, 3, &[0, 1, 1, 0, 0, 1, 0, 0, 0]);
        assert_eq!(b.nilpotency_index_mod_p(), Some(3));
        let id = ResidueMatrix::identity(3, 1, 2);
        assert_eq!(id.nilpotency_index_mod_p(), None);
    }

    #[test]
    fn howell_handles_non_free_submodules() {
        // span{(p, 1)} over Z/p^2 contains p*(p,1) = (0, p).
        let p = 3u64;
        let mut span = HowellSpan::new(p, 2, 2);
        span.insert(&[BigUint::from(3u32), BigUint::from(1u32)]);
        assert!(span.contains(&[BigUint::zero(), BigUint::from(3u32)]));
        assert!(!span.contains(&[BigUint::zero(), BigUint::one()]));
        assert!(span.contains(&[BigUint::from(3u32), BigUint::from(1u32)]));
        assert!(span.contains(&[BigUint::from(6u32), BigUint::from(2u32)]));
    }

    #[test]
    fn kernel_of_shift_minus_one() {
        // Shift on Z/4 (p=2, j=2): kernel of (S - I) mod 2 is the constants.
        let p = 2u64;
        let d = 4usize;
        let mut entries = vec![BigUint::zero(); d * d];
        for x in 0..d {
            // S e_x = e_{x+1}; (S - I) column x has +1 at x+1 and -1 at x.
            entries[((x + 1) % d) * d + x] = BigUint::one();
            entries[x * d + x] = BigUint::one(); // -1 mod 2
        }
        let ker = kernel_mod_pn(p, 1, d, d, &entries);
        // Constants: the all-ones vector, rank 1.
        let mut span = HowellSpan::new(p, 1, d);
        for k in &ker {
            span.insert(k);
        }
        assert_eq!(span.rank(), 1);
        assert!(span.contains(&vec![BigUint::one(); d]));
    }

    #[test]
    fn coord_span_expresses_members() {
        let p = 2u64;
        let vecs = vec![
            vec![BigUint::from(1u32), BigUint::from(0u32), BigUint::from(1u32)],
            vec![BigUint::from(0u32), BigUint::from(2u32), BigUint::from(2u32)],
        ];
        let span = CoordSpan::new(p, 2, &vecs);
        assert_eq!(span.rank(), 2);
        // w = v0 + v1 = (1, 2, 3).
        let w = vec![BigUint::from(1u32), BigUint::from(2u32), BigUint::from(3u32)];
        let c = span.express(&w).unwrap();
        // Recombine and compare mod 4.
        let modulus = BigUint::from(4u32);
        for j in 0..3 {
            let got = (&c[0] * &vecs[0][j] + &c[1] * &vecs[1][j]) % &modulus;
            assert_eq!(got, &w[j] % &modulus);
        }
        assert!(!span.contains(&vec![
            BigUint::from(0u32),
            BigUint::from(1u32),
            BigUint::from(0u32)
        ]));
    }

    #[test]
    fn minimal_poly_examples() {
        // diag(1,2) mod 5: min poly (X-1)(X-2) = X^2 - 3X + 2 -> [2, 2, 1] mod 5.
        let a = m(5, 1, 2, &[1, 0, 0, 2]);
        assert_eq!(a.minimal_poly_mod_p(), vec![2, 2, 1]);
        // identity: X - 1 -> [p-1, 1].
        let id = ResidueMatrix::identity(5, 1, 3);
        assert_eq!(id.minimal_poly_mod_p(), vec![4, 1]);
    }

    #[test]
    fn det_mod_p() {
        let a = m(5, 1, 2, &[1, 2, 3, 4]);
        assert_eq!(a.det_mod_p(), (1 * 4 + 5 * 5 - 2 * 3) as u64 % 5);
        let sing = m(5, 1, 2, &[1, 2, 2, 4]);
        assert_eq!(sing.det_mod_p(), 0);
    }
}
