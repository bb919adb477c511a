//! Exact truncated arithmetic in `Q_p`.
//!
//! A scalar is stored as `p^v * u` with the unit `u` known modulo `p^N`
//! (relative precision `N`), or as an explicit "zero at absolute precision
//! `k`" marker when nothing beyond `x ≡ 0 mod p^k` is known. Every
//! operation propagates precision so that results never claim more digits
//! than the inputs justify.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative precision (number of p-adic digits).
pub const DEFAULT_PRECISION: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("division by a scalar that is zero at precision p^{at_precision}")]
    DivisionByZero { at_precision: i64 },
    #[error("precision exhausted: needed {needed} digits, have {available}")]
    PrecisionExhausted { needed: i64, available: i64 },
    #[error("negative valuation {0} where an integral element is required")]
    NegativeValuation(i64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("unit part {0} is divisible by the prime")]
    UnitNotCoprime(String),
}

/// p-adic valuation of a scalar known to finite precision.
///
/// For a nonzero scalar the valuation is exact. For a scalar that is
/// indistinguishable from zero, all that is known is `v ≥ at_precision`,
/// recorded as `Infinite { at_precision }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Valuation {
    #[serde(rename = "finite")]
    Finite { v: i64 },
    #[serde(rename = "infinite")]
    Infinite { at_precision: i64 },
}

impl Valuation {
    pub fn finite(v: i64) -> Self {
        Valuation::Finite { v }
    }

    /// Certified lower bound on the true valuation.
    pub fn lower_bound(&self) -> i64 {
        match *self {
            Valuation::Finite { v } => v,
            Valuation::Infinite { at_precision } => at_precision,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Valuation::Finite { .. })
    }

    /// True when the valuation is certified to be `≥ k`.
    pub fn at_least(&self, k: i64) -> bool {
        self.lower_bound() >= k
    }

    /// Minimum of two valuation bounds. Exact when the minimum is attained
    /// by a finite valuation below every infinite bound.
    pub fn min_with(self, other: Valuation) -> Valuation {
        use Valuation::*;
        match (self, other) {
            (Finite { v: a }, Finite { v: b }) => Finite { v: a.min(b) },
            (Finite { v }, Infinite { at_precision }) | (Infinite { at_precision }, Finite { v }) => {
                if v <= at_precision {
                    Finite { v }
                } else {
                    // The zero side could hide anything in [at_precision, ∞).
                    Infinite { at_precision }
                }
            }
            (Infinite { at_precision: a }, Infinite { at_precision: b }) => {
                Infinite { at_precision: a.min(b) }
            }
        }
    }
}

impl std::fmt::Display for Valuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Valuation::Finite { v } => write!(f, "{v}"),
            Valuation::Infinite { at_precision } => write!(f, "inf@{at_precision}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// Known to satisfy `x ≡ 0 mod p^abs_prec`; nothing more.
    Zero { abs_prec: i64 },
    /// `p^val * unit mod p^(val + rel_prec)` with `0 < unit < p^rel_prec`, `p ∤ unit`.
    NonZero { val: i64, unit: BigUint, rel_prec: u32 },
}

/// An element of `Q_p` known to finite precision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    prime: u64,
    repr: Repr,
}

fn pow_p(p: u64, e: u32) -> BigUint {
    BigUint::from(p).pow(e)
}

/// Exact p-adic valuation of a nonzero big integer.
fn bigint_val(p: u64, x: &BigUint) -> u32 {
    debug_assert!(!x.is_zero());
    let p = BigUint::from(p);
    let mut v = 0u32;
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

/// Inverse of `u` modulo `m` via extended Euclid. `u` must be coprime to `m`.
fn mod_inverse(u: &BigUint, m: &BigUint) -> BigUint {
    let u = BigInt::from(u.clone());
    let m_int = BigInt::from(m.clone());
    let e = u.extended_gcd(&m_int);
    debug_assert!(e.gcd.is_one(), "inverse of non-unit");
    let mut inv = e.x % &m_int;
    if inv.is_negative() {
        inv += &m_int;
    }
    inv.to_biguint().expect("nonnegative")
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl PadicScalar {
    /// Zero known modulo `p^abs_prec`.
    pub fn zero(prime: u64, abs_prec: i64) -> Self {
        PadicScalar { prime, repr: Repr::Zero { abs_prec } }
    }

    pub fn one(prime: u64, rel_prec: u32) -> Self {
        PadicScalar {
            prime,
            repr: Repr::NonZero { val: 0, unit: BigUint::one(), rel_prec },
        }
    }

    /// Encode an exact integer with relative precision `rel_prec`.
    /// The integer 0 encodes as zero at absolute precision `rel_prec`.
    pub fn from_bigint(prime: u64, n: &BigInt, rel_prec: u32) -> Self {
        if n.is_zero() {
            return PadicScalar::zero(prime, rel_prec as i64);
        }
        let mag = n.abs().to_biguint().expect("abs");
        let v = bigint_val(prime, &mag) as i64;
        let modulus = pow_p(prime, rel_prec);
        let mut unit = (mag / pow_p(prime, v as u32)) % &modulus;
        if n.is_negative() {
            unit = &modulus - unit;
        }
        PadicScalar { prime, repr: Repr::NonZero { val: v, unit, rel_prec } }
    }

    pub fn from_int(prime: u64, n: i64, rel_prec: u32) -> Self {
        Self::from_bigint(prime, &BigInt::from(n), rel_prec)
    }

    /// Encode an exact rational `num/den` with `p ∤ den`.
    pub fn from_rational(prime: u64, num: i64, den: i64, rel_prec: u32) -> Result<Self, PadicError> {
        let d = Self::from_int(prime, den, rel_prec);
        let n = Self::from_int(prime, num, rel_prec);
        n.div(&d)
    }

    /// Raw constructor from canonical parts; normalizes the unit mod `p^rel_prec`.
    pub fn from_parts(prime: u64, val: i64, unit: BigUint, rel_prec: u32) -> Result<Self, PadicError> {
        let modulus = pow_p(prime, rel_prec);
        let unit = unit % &modulus;
        if unit.is_zero() || (&unit % prime).is_zero() {
            return Err(PadicError::UnitNotCoprime(unit.to_string()));
        }
        Ok(PadicScalar { prime, repr: Repr::NonZero { val, unit, rel_prec } })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// Valuation: exact for nonzero scalars, a lower bound marker for zeros.
    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Zero { abs_prec } => Valuation::Infinite { at_precision: *abs_prec },
            Repr::NonZero { val, .. } => Valuation::Finite { v: *val },
        }
    }

    /// Absolute precision: the scalar is known modulo `p^abs_precision()`.
    pub fn abs_precision(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs_prec } => *abs_prec,
            Repr::NonZero { val, rel_prec, .. } => val + *rel_prec as i64,
        }
    }

    /// Relative precision (p-adic digits of the unit); 0 for zeros.
    pub fn rel_precision(&self) -> u32 {
        match &self.repr {
            Repr::Zero { .. } => 0,
            Repr::NonZero { rel_prec, .. } => *rel_prec,
        }
    }

    /// Unit part as a big integer (0 for zeros).
    pub fn unit(&self) -> BigUint {
        match &self.repr {
            Repr::Zero { .. } => BigUint::zero(),
            Repr::NonZero { unit, .. } => unit.clone(),
        }
    }

    fn check_prime(&self, other: &Self) -> Result<(), PadicError> {
        if self.prime != other.prime {
            Err(PadicError::PrimeMismatch(self.prime, other.prime))
        } else {
            Ok(())
        }
    }

    /// Canonical representative in `[0, p^m)` of the scalar modulo `p^m`.
    /// Requires valuation ≥ 0 and absolute precision ≥ m.
    pub fn residue(&self, m: u32) -> Result<BigUint, PadicError> {
        if self.abs_precision() < m as i64 {
            return Err(PadicError::PrecisionExhausted {
                needed: m as i64,
                available: self.abs_precision(),
            });
        }
        match &self.repr {
            Repr::Zero { .. } => Ok(BigUint::zero()),
            Repr::NonZero { val, unit, .. } => {
                if *val < 0 {
                    return Err(PadicError::NegativeValuation(*val));
                }
                if *val >= m as i64 {
                    return Ok(BigUint::zero());
                }
                let rep = pow_p(self.prime, *val as u32) * unit;
                Ok(rep % pow_p(self.prime, m))
            }
        }
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::NonZero { val, unit, rel_prec } => {
                let modulus = pow_p(self.prime, *rel_prec);
                PadicScalar {
                    prime: self.prime,
                    repr: Repr::NonZero { val: *val, unit: &modulus - unit, rel_prec: *rel_prec },
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        let p = self.prime;
        match (&self.repr, &other.repr) {
            (Repr::Zero { abs_prec: a }, Repr::Zero { abs_prec: b }) => {
                Ok(PadicScalar::zero(p, (*a).min(*b)))
            }
            (Repr::Zero { abs_prec }, Repr::NonZero { .. }) => {
                other.truncate_abs((*abs_prec).min(other.abs_precision()))
            }
            (Repr::NonZero { .. }, Repr::Zero { abs_prec }) => {
                self.truncate_abs((*abs_prec).min(self.abs_precision()))
            }
            (
                Repr::NonZero { val: va, unit: ua, .. },
                Repr::NonZero { val: vb, unit: ub, .. },
            ) => {
                let m = self.abs_precision().min(other.abs_precision());
                // Shift both to the common valuation floor to combine digits.
                let floor = (*va).min(*vb);
                let width = (m - floor) as u32;
                let modulus = pow_p(p, width);
                let ra = (pow_p(p, (*va - floor) as u32) * ua) % &modulus;
                let rb = (pow_p(p, (*vb - floor) as u32) * ub) % &modulus;
                let sum = (ra + rb) % &modulus;
                Ok(Self::from_shifted_residue(p, sum, floor, m))
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.add(&other.neg())
    }

    /// Build a scalar from `p^floor * digits` where `digits` is known mod `p^(m-floor)`.
    fn from_shifted_residue(p: u64, digits: BigUint, floor: i64, m: i64) -> Self {
        if digits.is_zero() {
            return PadicScalar::zero(p, m);
        }
        let extra = bigint_val(p, &digits);
        let val = floor + extra as i64;
        debug_assert!(val < m);
        let rel = (m - val) as u32;
        let unit = (digits / pow_p(p, extra)) % pow_p(p, rel);
        PadicScalar { prime: p, repr: Repr::NonZero { val, unit, rel_prec: rel } }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        let p = self.prime;
        match (&self.repr, &other.repr) {
            (Repr::Zero { abs_prec: a }, Repr::Zero { abs_prec: b }) => {
                Ok(PadicScalar::zero(p, a + b))
            }
            (Repr::Zero { abs_prec }, Repr::NonZero { val, .. })
            | (Repr::NonZero { val, .. }, Repr::Zero { abs_prec }) => {
                Ok(PadicScalar::zero(p, abs_prec + val))
            }
            (
                Repr::NonZero { val: va, unit: ua, rel_prec: na },
                Repr::NonZero { val: vb, unit: ub, rel_prec: nb },
            ) => {
                let rel = (*na).min(*nb);
                let unit = (ua * ub) % pow_p(p, rel);
                Ok(PadicScalar { prime: p, repr: Repr::NonZero { val: va + vb, unit, rel_prec: rel } })
            }
        }
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        match &self.repr {
            Repr::Zero { abs_prec } => Err(PadicError::DivisionByZero { at_precision: *abs_prec }),
            Repr::NonZero { val, unit, rel_prec } => {
                let modulus = pow_p(self.prime, *rel_prec);
                let inv = mod_inverse(unit, &modulus);
                Ok(PadicScalar {
                    prime: self.prime,
                    repr: Repr::NonZero { val: -val, unit: inv, rel_prec: *rel_prec },
                })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, PadicError> {
        self.mul(&other.inv()?)
    }

    /// Multiply by `p^k` (negative `k` divides). Lossless: shifts the
    /// valuation and keeps every known digit.
    pub fn shift(&self, k: i64) -> Self {
        match &self.repr {
            Repr::Zero { abs_prec } => PadicScalar::zero(self.prime, abs_prec + k),
            Repr::NonZero { val, unit, rel_prec } => PadicScalar {
                prime: self.prime,
                repr: Repr::NonZero { val: val + k, unit: unit.clone(), rel_prec: *rel_prec },
            },
        }
    }

    pub fn pow(&self, e: u32) -> Result<Self, PadicError> {
        let mut acc = PadicScalar::one(self.prime, self.rel_precision().max(DEFAULT_PRECISION));
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Forget digits beyond absolute precision `m`.
    pub fn truncate_abs(&self, m: i64) -> Result<Self, PadicError> {
        match &self.repr {
            Repr::Zero { abs_prec } => Ok(PadicScalar::zero(self.prime, (*abs_prec).min(m))),
            Repr::NonZero { val, unit, rel_prec } => {
                let abs = val + *rel_prec as i64;
                if m >= abs {
                    return Ok(self.clone());
                }
                if m <= *val {
                    return Ok(PadicScalar::zero(self.prime, m));
                }
                let rel = (m - val) as u32;
                let u = unit % pow_p(self.prime, rel);
                debug_assert!(!u.is_zero());
                Ok(PadicScalar {
                    prime: self.prime,
                    repr: Repr::NonZero { val: *val, unit: u, rel_prec: rel },
                })
            }
        }
    }

    /// True when `self` and `other` agree modulo the coarser of the two
    /// absolute precisions. This is the right notion of equality for
    /// results that went through different precision-propagation paths.
    pub fn agrees_with(&self, other: &Self) -> bool {
        match self.sub(other) {
            Ok(d) => d.is_zero(),
            Err(_) => false,
        }
    }

    /// Decimal rendering of the canonical representative, `p^v * u`.
    pub fn to_decimal_string(&self) -> String {
        match &self.repr {
            Repr::Zero { abs_prec } => format!("O({}^{})", self.prime, abs_prec),
            Repr::NonZero { val, unit, rel_prec } => {
                format!("{}*{}^{} + O({}^{})", unit, self.prime, val, self.prime, val + *rel_prec as i64)
            }
        }
    }
}

impl std::fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

/// Wire encoding: `{"val": v|null, "unit": "<decimal>", "prec": n}`.
/// A null `val` marks zero-at-precision, with `prec` the absolute precision;
/// otherwise `prec` is the relative precision of the unit. The prime is
/// carried by the enclosing object.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ScalarRepr {
    pub val: Option<i64>,
    pub unit: String,
    pub prec: i64,
}

impl PadicScalar {
    pub fn to_repr(&self) -> ScalarRepr {
        match &self.repr {
            Repr::Zero { abs_prec } => {
                ScalarRepr { val: None, unit: "0".to_string(), prec: *abs_prec }
            }
            Repr::NonZero { val, unit, rel_prec } => ScalarRepr {
                val: Some(*val),
                unit: unit.to_str_radix(10),
                prec: *rel_prec as i64,
            },
        }
    }

    pub fn from_repr(prime: u64, repr: &ScalarRepr) -> Result<Self, PadicError> {
        match repr.val {
            None => Ok(PadicScalar::zero(prime, repr.prec)),
            Some(v) => {
                let unit = repr
                    .unit
                    .parse::<BigUint>()
                    .map_err(|_| PadicError::UnitNotCoprime(repr.unit.clone()))?;
                if repr.prec < 1 {
                    return Err(PadicError::PrecisionExhausted { needed: 1, available: repr.prec });
                }
                PadicScalar::from_parts(prime, v, unit, repr.prec as u32)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: u64, n: i64) -> PadicScalar {
        PadicScalar::from_int(p, n, DEFAULT_PRECISION)
    }

    #[test]
    fn valuation_of_integers() {
        assert_eq!(s(5, 50).valuation(), Valuation::finite(2));
        assert_eq!(s(3, 1).valuation(), Valuation::finite(0));
        let z = PadicScalar::zero(2, 8);
        assert_eq!(z.valuation(), Valuation::Infinite { at_precision: 8 });
    }

    #[test]
    fn add_with_carry_truncates_relative_precision() {
        // 50 + 75 = 125 = 5^3 at p=5: both inputs have valuation 2, the sum
        // gains a digit, so one digit of relative precision is spent.
        let sum = s(5, 50).add(&s(5, 75)).unwrap();
        assert_eq!(sum.valuation(), Valuation::finite(3));
        assert_eq!(sum.unit(), BigUint::from(1u32));
        assert_eq!(sum.rel_precision(), DEFAULT_PRECISION - 1);
        assert!(sum.agrees_with(&s(5, 125)));
    }

    #[test]
    fn mul_is_val_additive() {
        let prod = s(3, 3).mul(&s(3, 6)).unwrap();
        assert_eq!(prod.valuation(), Valuation::finite(2));
        assert!(prod.agrees_with(&s(3, 18)));
    }

    #[test]
    fn inverse_of_two_mod_343() {
        // Oracle: brute-force search for 2u ≡ 1 mod 7^3.
        let mut expected = 0u64;
        for u in 0..343u64 {
            if (2 * u) % 343 == 1 {
                expected = u;
                break;
            }
        }
        assert_eq!(expected, 172);
        let inv = PadicScalar::from_int(7, 2, 3).inv().unwrap();
        assert_eq!(inv.unit(), BigUint::from(172u32));
        assert_eq!(inv.valuation(), Valuation::finite(0));
    }

    #[test]
    fn zero_handling() {
        let z = PadicScalar::zero(5, 6);
        let x = s(5, 25);
        let prod = z.mul(&x).unwrap();
        assert_eq!(prod.valuation(), Valuation::Infinite { at_precision: 8 });
        assert!(z.inv().is_err());
        // adding a zero caps the absolute precision
        let sum = x.add(&PadicScalar::zero(5, 3)).unwrap();
        assert_eq!(sum.abs_precision(), 3);
        assert_eq!(sum.valuation(), Valuation::finite(2));
    }

    #[test]
    fn shift_is_lossless() {
        let x = s(3, 18); // 2*3^2
        let y = x.shift(-1);
        assert_eq!(y.valuation(), Valuation::finite(1));
        assert_eq!(y.rel_precision(), x.rel_precision());
        assert!(y.shift(1).agrees_with(&x));
    }

    #[test]
    fn canonical_negatives() {
        let a = s(7, -3);
        let b = s(7, 4).sub(&s(7, 7)).unwrap();
        assert!(a.agrees_with(&b));
        assert_eq!(a.sub(&a).unwrap().is_zero(), true);
    }

    #[test]
    fn residue_extraction() {
        assert_eq!(s(2, 6).residue(3).unwrap(), BigUint::from(6u32));
        assert_eq!(s(2, 8).residue(3).unwrap(), BigUint::zero());
        assert!(PadicScalar::zero(2, 2).residue(3).is_err());
    }
}
