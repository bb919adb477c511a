//! Polynomials over `Q_p` with Gauss norms, index = degree.

use crate::padic::{PadicError, PadicScalar, Valuation, DEFAULT_PRECISION};
use num_bigint::BigUint;
use num_traits::One;

/// A polynomial with `PadicScalar` coefficients, all sharing one prime.
/// `coeffs[i]` is the degree-`i` coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicPoly {
    prime: u64,
    coeffs: Vec<PadicScalar>,
}

impl PadicPoly {
    pub fn new(prime: u64, coeffs: Vec<PadicScalar>) -> Result<Self, PadicError> {
        for c in &coeffs {
            if c.prime() != prime {
                return Err(PadicError::PrimeMismatch(prime, c.prime()));
            }
        }
        Ok(PadicPoly { prime, coeffs })
    }

    pub fn from_ints(prime: u64, coeffs: &[i64], rel_prec: u32) -> Self {
        PadicPoly {
            prime,
            coeffs: coeffs.iter().map(|&c| PadicScalar::from_int(prime, c, rel_prec)).collect(),
        }
    }

    pub fn zero(prime: u64) -> Self {
        PadicPoly { prime, coeffs: vec![] }
    }

    /// `X^n - 1`, the witness shape used for translation-type operators.
    pub fn power_minus_one(prime: u64, n: usize, rel_prec: u32) -> Self {
        let mut coeffs = vec![PadicScalar::zero(prime, rel_prec as i64); n + 1];
        coeffs[0] = PadicScalar::from_int(prime, -1, rel_prec);
        coeffs[n] = PadicScalar::one(prime, rel_prec);
        PadicPoly { prime, coeffs }
    }

    /// `X^n`.
    pub fn power(prime: u64, n: usize, rel_prec: u32) -> Self {
        let mut coeffs = vec![PadicScalar::zero(prime, rel_prec as i64); n + 1];
        coeffs[n] = PadicScalar::one(prime, rel_prec);
        PadicPoly { prime, coeffs }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> PadicScalar {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| PadicScalar::zero(self.prime, DEFAULT_PRECISION as i64))
    }

    /// Index of the highest coefficient slot (zero coefficients included).
    pub fn degree_bound(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Monic in the strict sense: leading coefficient is exactly 1.
    pub fn is_monic(&self) -> bool {
        match self.coeffs.last() {
            Some(c) => c.valuation() == Valuation::finite(0) && c.unit() == BigUint::one(),
            None => false,
        }
    }

    /// Gauss norm as a valuation bound: `‖f‖ = p^(-m)` where `m` is the
    /// minimum coefficient valuation. For zero coefficients only the lower
    /// bound at their precision is known. `f ∈ Z_p[X]` iff `m ≥ 0`,
    /// `f ∈ p^k Z_p[X]` iff `m ≥ k`.
    pub fn gauss_valuation(&self) -> Valuation {
        let mut acc: Option<Valuation> = None;
        for c in &self.coeffs {
            let v = c.valuation();
            acc = Some(match acc {
                None => v,
                Some(a) => a.min_with(v),
            });
        }
        acc.unwrap_or(Valuation::Infinite { at_precision: DEFAULT_PRECISION as i64 })
    }

    /// All coefficients certified integral.
    pub fn is_integral(&self) -> bool {
        self.gauss_valuation().at_least(0)
    }

    /// Horner evaluation with precision tracking.
    pub fn eval(&self, x: &PadicScalar) -> Result<PadicScalar, PadicError> {
        let mut acc = PadicScalar::zero(self.prime, x.abs_precision().max(DEFAULT_PRECISION as i64));
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x)?.add(c)?;
        }
        Ok(acc)
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        if self.prime != other.prime {
            return Err(PadicError::PrimeMismatch(self.prime, other.prime));
        }
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            out.push(self.coeff(i).add(&other.coeff(i))?);
        }
        Ok(PadicPoly { prime: self.prime, coeffs: out })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        if self.prime != other.prime {
            return Err(PadicError::PrimeMismatch(self.prime, other.prime));
        }
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(PadicPoly::zero(self.prime));
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = PadicScalar::zero(self.prime, DEFAULT_PRECISION as i64 * 2);
            for i in 0..=k {
                if i < self.coeffs.len() && k - i < other.coeffs.len() {
                    acc = acc.add(&self.coeffs[i].mul(&other.coeffs[k - i])?)?;
                }
            }
            out.push(acc);
        }
        Ok(PadicPoly { prime: self.prime, coeffs: out })
    }

    pub fn scale(&self, c: &PadicScalar) -> Result<Self, PadicError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| a.mul(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PadicPoly { prime: self.prime, coeffs })
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Result<Self, PadicError> {
        if self.coeffs.len() <= 1 {
            return Ok(PadicPoly::zero(self.prime));
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            let k = PadicScalar::from_int(self.prime, i as i64, c.rel_precision().max(DEFAULT_PRECISION));
            out.push(c.mul(&k)?);
        }
        Ok(PadicPoly { prime: self.prime, coeffs: out })
    }

    /// Coefficients reduced mod p, for integral polynomials.
    /// Trailing (high-degree) zero coefficients are kept.
    pub fn residue_coeffs(&self) -> Result<Vec<u64>, PadicError> {
        self.coeffs
            .iter()
            .map(|c| {
                let r = c.residue(1)?;
                Ok(r.to_u64_digits().first().copied().unwrap_or(0))
            })
            .collect()
    }

    /// Roots in `Z_p` lifted by Newton iteration from simple roots of the
    /// reduction mod p. Returns one lift per simple residue root; multiple
    /// residue roots are skipped (lifting is not unique there).
    pub fn simple_root_lifts(&self, rel_prec: u32) -> Result<Vec<PadicScalar>, PadicError> {
        let p = self.prime;
        let res = self.residue_coeffs()?;
        let deriv = self.derivative()?;
        let eval_mod_p = |coeffs: &[u64], x: u64| -> u64 {
            let mut acc = 0u64;
            for c in coeffs.iter().rev() {
                acc = (acc * x + c) % p;
            }
            acc
        };
        let deriv_res = deriv.residue_coeffs()?;
        let mut roots = Vec::new();
        for r in 0..p {
            if eval_mod_p(&res, r) == 0 && eval_mod_p(&deriv_res, r) != 0 {
                // Newton: x <- x - f(x)/f'(x); converges quadratically from a
                // simple residue root.
                let mut x = PadicScalar::from_int(p, r as i64, rel_prec);
                for _ in 0..(32 - (rel_prec.leading_zeros())) + 2 {
                    let fx = self.eval(&x)?;
                    if fx.is_zero() {
                        break;
                    }
                    let dfx = deriv.eval(&x)?;
                    x = x.sub(&fx.div(&dfx)?)?;
                }
                roots.push(x);
            }
        }
        Ok(roots)
    }
}

impl std::fmt::Display for PadicPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| format!("({})*X^{}", c, i))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        // f = X^2 - p at p=3, x=0 -> -3
        let f = PadicPoly::from_ints(3, &[-3, 0, 1], DEFAULT_PRECISION);
        let v = f.eval(&PadicScalar::from_int(3, 0, DEFAULT_PRECISION)).unwrap();
        assert!(v.agrees_with(&PadicScalar::from_int(3, -3, DEFAULT_PRECISION)));
        assert_eq!(v.valuation(), Valuation::finite(1));

        // f = X^p - 1 at p=2, x=1 -> 0 at precision
        let f = PadicPoly::power_minus_one(2, 2, DEFAULT_PRECISION);
        let v = f.eval(&PadicScalar::one(2, DEFAULT_PRECISION)).unwrap();
        assert!(v.is_zero());

        // f = X^2 + X + 1 at p=5, x=5 -> 31
        let f = PadicPoly::from_ints(5, &[1, 1, 1], DEFAULT_PRECISION);
        let v = f.eval(&PadicScalar::from_int(5, 5, DEFAULT_PRECISION)).unwrap();
        assert!(v.agrees_with(&PadicScalar::from_int(5, 31, DEFAULT_PRECISION)));
        assert_eq!(v.valuation(), Valuation::finite(0));
    }

    #[test]
    fn gauss_norm_examples() {
        // F(X+2) - F(X) for F = X^2 is 4X + 4: in 4*Z_2[X].
        let f = PadicPoly::from_ints(2, &[4, 4], DEFAULT_PRECISION);
        assert_eq!(f.gauss_valuation(), Valuation::finite(2));
        let x = PadicPoly::from_ints(2, &[0, 1], DEFAULT_PRECISION);
        assert_eq!(x.gauss_valuation(), Valuation::finite(0));
        let z = PadicPoly::zero(2);
        assert!(!z.gauss_valuation().is_finite());
    }

    #[test]
    fn monic_detection() {
        assert!(PadicPoly::from_ints(5, &[2, 3, 1], DEFAULT_PRECISION).is_monic());
        assert!(!PadicPoly::from_ints(5, &[2, 3, 5], DEFAULT_PRECISION).is_monic());
        assert!(!PadicPoly::from_ints(5, &[2, 3, 2], DEFAULT_PRECISION).is_monic());
    }

    #[test]
    fn hensel_lift_simple_roots() {
        // X^2 - 2 over Z_7: residue roots 3 and 4, both simple.
        let f = PadicPoly::from_ints(7, &[-2, 0, 1], DEFAULT_PRECISION);
        let roots = f.simple_root_lifts(DEFAULT_PRECISION).unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            let v = f.eval(r).unwrap();
            assert!(v.is_zero(), "f(root) = {v}");
        }
        // X^2 over Z_5: the double root 0 must not be lifted.
        let g = PadicPoly::from_ints(5, &[0, 0, 1], DEFAULT_PRECISION);
        assert!(g.simple_root_lifts(DEFAULT_PRECISION).unwrap().is_empty());
    }
}
