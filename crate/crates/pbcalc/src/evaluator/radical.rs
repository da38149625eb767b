//! Exact arithmetic for p-norm values.
//!
//! An ℓ_p norm of a rational vector is (Σ|x_i|^p)^(1/p): a p-th root of a
//! nonnegative rational. Those roots are rarely rational themselves, but
//! every comparison the evaluator needs — root against rational threshold,
//! root against root, ratio of roots against ratio of roots — can be
//! decided exactly by cross-powering, because x ↦ x^k is strictly
//! monotone on the nonnegative reals. No floating point anywhere.

use crate::rational::{pow_nat, Rational};
use crate::{Error, Result};
use num::traits::{Signed, Zero};
use std::cmp::Ordering;

/// The real number `base^(1/root)` with `base ≥ 0` and `root ≥ 1`.
#[derive(Debug, Clone)]
pub struct RadicalValue {
    base: Rational,
    root: u32,
}

impl RadicalValue {
    pub fn new(base: Rational, root: u32) -> Result<RadicalValue> {
        if root == 0 {
            return Err(Error::Exactness("radical root must be at least 1".into()));
        }
        if base.is_negative() {
            return Err(Error::Exactness("radical base must be nonnegative".into()));
        }
        Ok(RadicalValue { base, root })
    }

    pub fn from_rational(q: Rational) -> Result<RadicalValue> {
        RadicalValue::new(q, 1)
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero()
    }

    /// Compare `base^(1/root)` with the rational `q` exactly.
    /// Every radical is nonnegative, so negative thresholds sort below.
    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        if q.is_negative() {
            return Ordering::Greater;
        }
        self.base.cmp(&pow_nat(q, self.root))
    }

    /// Compare two radicals exactly: a^(1/p) vs b^(1/q) by a^q vs b^p.
    pub fn cmp_radical(&self, other: &RadicalValue) -> Ordering {
        pow_rat(&self.base, other.root).cmp(&pow_rat(&other.base, self.root))
    }

    /// Multiply two radicals: a^(1/p) · b^(1/q) = (a^q · b^p)^(1/pq).
    pub fn product(&self, other: &RadicalValue) -> Result<RadicalValue> {
        let root = self
            .root
            .checked_mul(other.root)
            .ok_or_else(|| Error::Exactness("radical root overflow in product".into()))?;
        Ok(RadicalValue {
            base: pow_rat(&self.base, other.root) * pow_rat(&other.base, self.root),
            root,
        })
    }

    /// Multiply by a nonnegative rational scalar: q · a^(1/p) = (q^p · a)^(1/p).
    pub fn scale(&self, q: &Rational) -> Result<RadicalValue> {
        if q.is_negative() {
            return Err(Error::Exactness("radical scale factor must be nonnegative".into()));
        }
        Ok(RadicalValue {
            base: pow_nat(q, self.root) * self.base.clone(),
            root: self.root,
        })
    }
}

fn pow_rat(q: &Rational, k: u32) -> Rational {
    pow_nat(q, k)
}

/// An exact ratio of two radicals, `num / den` with `den > 0`.
/// This is the shape of a distortion bound: a quotient of two p-norms.
#[derive(Debug, Clone)]
pub struct RadicalRatio {
    num: RadicalValue,
    den: RadicalValue,
}

impl RadicalRatio {
    pub fn new(num: RadicalValue, den: RadicalValue) -> Result<RadicalRatio> {
        if den.is_zero() {
            return Err(Error::Exactness("radical ratio denominator must be positive".into()));
        }
        Ok(RadicalRatio { num, den })
    }

    pub fn one() -> RadicalRatio {
        let unit = RadicalValue { base: Rational::from_integer(1.into()), root: 1 };
        RadicalRatio { num: unit.clone(), den: unit }
    }

    pub fn num(&self) -> &RadicalValue {
        &self.num
    }

    pub fn den(&self) -> &RadicalValue {
        &self.den
    }

    /// Compare with a rational threshold: num/den vs q ⟺ num vs q·den.
    pub fn cmp_rational(&self, q: &Rational) -> Result<Ordering> {
        if q.is_negative() {
            return Ok(Ordering::Greater);
        }
        Ok(self.num.cmp_radical(&self.den.scale(q)?))
    }

    /// Compare two ratios: n1/d1 vs n2/d2 ⟺ n1·d2 vs n2·d1 (denominators positive).
    pub fn cmp_ratio(&self, other: &RadicalRatio) -> Result<Ordering> {
        let lhs = self.num.product(&other.den)?;
        let rhs = other.num.product(&self.den)?;
        Ok(lhs.cmp_radical(&rhs))
    }

    pub fn is_one(&self) -> bool {
        self.num.cmp_radical(&self.den) == Ordering::Equal
    }

    /// Render as `base^(1/root) / base^(1/root)`, collapsing exact
    /// rationals (root 1 or an integral base) to plain numbers.
    pub fn display(&self) -> String {
        fn side(v: &RadicalValue) -> String {
            if v.root == 1 {
                crate::rational::format_rational(&v.base)
            } else {
                format!("({})^(1/{})", crate::rational::format_rational(&v.base), v.root)
            }
        }
        if self.is_one() {
            "1".to_string()
        } else {
            format!("{} / {}", side(&self.num), side(&self.den))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    #[test]
    fn rational_threshold_comparisons() {
        let r = RadicalValue::new(rat_int(8), 3).unwrap();
        assert_eq!(r.cmp_rational(&rat_int(2)), Ordering::Equal);
        let r = RadicalValue::new(rat_int(2), 2).unwrap();
        assert_eq!(r.cmp_rational(&rat(3, 2)), Ordering::Less);
        let r = RadicalValue::new(rat_int(5), 1).unwrap();
        assert_eq!(r.cmp_rational(&rat_int(-1)), Ordering::Greater);
    }

    #[test]
    fn radical_vs_radical() {
        // 2^(1/2) vs 3^(1/3): cross-power to 8 vs 9.
        let a = RadicalValue::new(rat_int(2), 2).unwrap();
        let b = RadicalValue::new(rat_int(3), 3).unwrap();
        assert_eq!(a.cmp_radical(&b), Ordering::Less);
        // 4^(1/2) vs 8^(1/3): both are 2.
        let a = RadicalValue::new(rat_int(4), 2).unwrap();
        let b = RadicalValue::new(rat_int(8), 3).unwrap();
        assert_eq!(a.cmp_radical(&b), Ordering::Equal);
    }

    #[test]
    fn products_and_scales() {
        // 2^(1/2) · 2^(1/2) = 2.
        let a = RadicalValue::new(rat_int(2), 2).unwrap();
        let p = a.product(&a).unwrap();
        assert_eq!(p.cmp_rational(&rat_int(2)), Ordering::Equal);
        // 3 · 2^(1/2) = 18^(1/2).
        let s = a.scale(&rat_int(3)).unwrap();
        assert_eq!(s.cmp_radical(&RadicalValue::new(rat_int(18), 2).unwrap()), Ordering::Equal);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(RadicalValue::new(rat_int(-1), 2).is_err());
        assert!(RadicalValue::new(rat_int(1), 0).is_err());
        let a = RadicalValue::new(rat_int(2), 2).unwrap();
        assert!(a.scale(&rat_int(-1)).is_err());
        let zero = RadicalValue::new(rat_int(0), 1).unwrap();
        assert!(RadicalRatio::new(a, zero).is_err());
    }

    #[test]
    fn ratio_comparisons() {
        // (2^(1/2)) / 1 vs 3/2: 2 vs 9/4, so the ratio is smaller.
        let num = RadicalValue::new(rat_int(2), 2).unwrap();
        let den = RadicalValue::new(rat_int(1), 1).unwrap();
        let ratio = RadicalRatio::new(num, den).unwrap();
        assert_eq!(ratio.cmp_rational(&rat(3, 2)).unwrap(), Ordering::Less);
        assert_eq!(ratio.cmp_rational(&rat_int(1)).unwrap(), Ordering::Greater);
        assert!(!ratio.is_one());

        // (8^(1/3)) / 2 is exactly 1.
        let num = RadicalValue::new(rat_int(8), 3).unwrap();
        let den = RadicalValue::new(rat_int(2), 1).unwrap();
        let unit = RadicalRatio::new(num, den).unwrap();
        assert!(unit.is_one());
        assert_eq!(unit.cmp_ratio(&ratio).unwrap(), Ordering::Less);
        assert_eq!(unit.display(), "1");
    }

    #[test]
    fn ratio_display_shows_roots() {
        let num = RadicalValue::new(rat_int(2), 2).unwrap();
        let den = RadicalValue::new(rat_int(1), 1).unwrap();
        let ratio = RadicalRatio::new(num, den).unwrap();
        assert_eq!(ratio.display(), "(2)^(1/2) / 1");
    }
}
