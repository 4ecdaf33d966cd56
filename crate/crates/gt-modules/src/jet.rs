//! Truncated Laurent series in one formal parameter.
//!
//! A [`Jet`] records the coefficients of `e^k` for `k` in a window
//! `[min_exp, trunc_order]`. Every coefficient below `min_exp` is exactly
//! zero; everything above `trunc_order` is unknown. Jets are how rational
//! functions get evaluated along a path through a critical point: the `e^0`
//! coefficient is the value at the point, the `e^1` coefficient is the
//! directional derivative, and any nonzero coefficient at a negative
//! exponent witnesses a pole.
//!
//! All coefficients are exact rationals. Binary operations propagate the
//! truncation window: unknown tails stay unknown, they are never silently
//! treated as zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::Error;
use crate::rat::Rat;

/// Default highest tracked exponent for reported jets.
pub const DEFAULT_TRUNC: i64 = 2;

/// Default lowest admissible exponent; anything deeper is reported as a
/// structural error rather than silently truncated.
pub const DEFAULT_FLOOR: i64 = -4;

/// A truncated Laurent series: exact coefficients for exponents in
/// `[min_exp, trunc_order]`, known-zero below, unknown above.
#[derive(Clone, PartialEq, Eq)]
pub struct Jet {
    /// Exponent of the first stored coefficient. Canonical form keeps the
    /// first stored coefficient nonzero; for the zero jet `lo == hi + 1`
    /// and no coefficients are stored.
    lo: i64,
    /// Highest exponent known exactly.
    hi: i64,
    /// Coefficients for exponents `lo..=hi`.
    coeffs: Vec<Rat>,
}

impl Jet {
    /// The zero jet, known to be zero through order `trunc`.
    pub fn zero(trunc: i64) -> Self {
        Jet { lo: trunc + 1, hi: trunc, coeffs: Vec::new() }
    }

    /// A constant jet.
    pub fn constant(value: Rat, trunc: i64) -> Self {
        Jet::monomial(value, 0, trunc)
    }

    /// `coeff * e^exp`, tracked through order `trunc`.
    pub fn monomial(coeff: Rat, exp: i64, trunc: i64) -> Self {
        if coeff.is_zero() || exp > trunc {
            return Jet::zero(trunc);
        }
        let mut coeffs = vec![coeff];
        coeffs.extend(std::iter::repeat_with(Rat::zero).take((trunc - exp) as usize));
        Jet { lo: exp, hi: trunc, coeffs }
    }

    /// The formal parameter itself.
    pub fn eps(trunc: i64) -> Self {
        Jet::monomial(Rat::one(), 1, trunc)
    }

    /// Builds a jet from coefficients starting at exponent `lo`.
    pub fn from_coeffs(lo: i64, coeffs: Vec<Rat>) -> Self {
        let hi = lo + coeffs.len() as i64 - 1;
        Jet { lo, hi, coeffs }.canonical()
    }

    fn canonical(mut self) -> Self {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(0) => self,
            Some(k) => {
                self.coeffs.drain(..k);
                self.lo += k as i64;
                self
            }
            None => Jet::zero(self.hi),
        }
    }

    /// Lowest tracked exponent (`hi + 1` for the zero jet).
    pub fn min_exp(&self) -> i64 {
        self.lo
    }

    /// Highest exponent known exactly.
    pub fn trunc_order(&self) -> i64 {
        self.hi
    }

    /// True iff every known coefficient is zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponent of the leading (first nonzero) coefficient, if any.
    pub fn leading_exp(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.lo)
        }
    }

    /// The coefficient of `e^k`. Below the window it is exactly zero;
    /// above the truncation order it is unknown and an error.
    pub fn coeff(&self, k: i64) -> Result<Rat, Error> {
        if k > self.hi {
            return Err(Error::InsufficientTruncation { want: k, have: self.hi });
        }
        if k < self.lo {
            return Ok(Rat::zero());
        }
        Ok(self.coeffs[(k - self.lo) as usize].clone())
    }

    /// True iff no nonzero coefficient sits at a negative exponent.
    pub fn is_regular(&self) -> bool {
        self.is_zero() || self.lo >= 0
    }

    /// Errors if the leading exponent lies below `floor`.
    pub fn check_floor(&self, floor: i64) -> Result<(), Error> {
        match self.leading_exp() {
            Some(lead) if lead < floor => {
                Err(Error::PoleDepthExceeded { leading: lead, floor })
            }
            _ => Ok(()),
        }
    }

    /// Multiplies every coefficient by an exact scalar.
    pub fn scale(&self, s: &Rat) -> Jet {
        if s.is_zero() {
            return Jet::zero(self.hi);
        }
        Jet {
            lo: self.lo,
            hi: self.hi,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Division. The divisor must have a nonzero known coefficient; its
    /// leading exponent shifts the result window. `floor` bounds how deep
    /// the result may reach before the division is reported as an error.
    pub fn div(&self, rhs: &Jet, floor: i64) -> Result<Jet, Error> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZeroJet);
        }
        let d = rhs.lo;
        // Invert the unit part of rhs = e^d * (u_0 + u_1 e + ...) through
        // its relative order.
        let rel = (rhs.hi - d) as usize;
        let u = &rhs.coeffs;
        let mut inv = Vec::with_capacity(rel + 1);
        inv.push(Rat::one().checked_div(&u[0]).expect("leading coefficient nonzero"));
        for m in 1..=rel {
            let mut acc = Rat::zero();
            for r in 1..=m {
                acc += &(&u[r] * &inv[m - r]);
            }
            inv.push(-acc.checked_div(&u[0]).expect("leading coefficient nonzero"));
        }
        let inverse = Jet::from_coeffs(-d, inv);
        let out = self * &inverse;
        out.check_floor(floor)?;
        Ok(out)
    }

    /// Formal derivative with respect to the parameter.
    pub fn derivative(&self) -> Jet {
        if self.is_zero() {
            return Jet::zero(self.hi - 1);
        }
        let coeffs = (self.lo..=self.hi)
            .map(|k| self.coeffs[(k - self.lo) as usize].clone() * Rat::from_int(k))
            .collect();
        Jet::from_coeffs(self.lo - 1, coeffs)
    }

    /// Substitutes `e -> -e` (negates the coefficients of odd exponents).
    pub fn flip_eps(&self) -> Jet {
        let coeffs = (self.lo..=self.hi)
            .map(|k| {
                let c = self.coeffs[(k - self.lo) as usize].clone();
                if k.rem_euclid(2) == 1 {
                    -c
                } else {
                    c
                }
            })
            .collect();
        Jet { lo: self.lo, hi: self.hi, coeffs }
    }
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let hi = self.hi.min(rhs.hi);
        let lo = self.lo.min(rhs.lo).min(hi + 1);
        let coeffs = (lo..=hi)
            .map(|k| {
                let a = if k >= self.lo && k <= self.hi {
                    self.coeffs[(k - self.lo) as usize].clone()
                } else {
                    Rat::zero()
                };
                let b = if k >= rhs.lo && k <= rhs.hi {
                    rhs.coeffs[(k - rhs.lo) as usize].clone()
                } else {
                    Rat::zero()
                };
                a + b
            })
            .collect();
        Jet { lo, hi, coeffs }.canonical()
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self + &(-rhs)
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        // The product coefficient at exponent m is fully known as long as
        // every unknown coefficient of one factor meets a known-zero
        // coefficient of the other.
        let hi = (self.hi + rhs.lo).min(rhs.hi + self.lo);
        let lo = self.lo + rhs.lo;
        if lo > hi {
            return Jet::zero(hi);
        }
        let mut coeffs = vec![Rat::zero(); (hi - lo + 1) as usize];
        for (p, a) in (self.lo..=self.hi).zip(self.coeffs.iter()) {
            if a.is_zero() {
                continue;
            }
            for (q, b) in (rhs.lo..=rhs.hi).zip(rhs.coeffs.iter()) {
                let m = p + q;
                if m > hi {
                    break;
                }
                coeffs[(m - lo) as usize] += &(a * b);
            }
        }
        Jet { lo, hi, coeffs }.canonical()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            lo: self.lo,
            hi: self.hi,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $trait::$method(&self, &rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $trait::$method(&self, rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $trait::$method(self, &rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O(e^{})", self.hi + 1);
        }
        let mut first = true;
        for (k, c) in (self.lo..=self.hi).zip(self.coeffs.iter()) {
            if c.is_zero() {
                continue;
            }
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*e")?,
                _ => write!(f, "{c}*e^{k}")?,
            }
        }
        write!(f, " + O(e^{})", self.hi + 1)
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d).unwrap()
    }

    #[test]
    fn exponents_cancel_in_products() {
        let e = Jet::eps(6);
        let inv_e = Jet::constant(Rat::one(), 6).div(&e, DEFAULT_FLOOR).unwrap();
        let prod = &e * &inv_e;
        assert_eq!(prod.coeff(0).unwrap(), Rat::one());
        assert!(prod.is_regular());
        assert_eq!(inv_e.coeff(-1).unwrap(), Rat::one());
    }

    #[test]
    fn factor_cancellation_in_division() {
        // (e + e^2) / e = 1 + e
        let num = Jet::from_coeffs(1, vec![Rat::one(), Rat::one(), Rat::zero()]);
        let q = num.div(&Jet::eps(3), DEFAULT_FLOOR).unwrap();
        assert_eq!(q.coeff(0).unwrap(), Rat::one());
        assert_eq!(q.coeff(1).unwrap(), Rat::one());
        assert_eq!(q.coeff(2).unwrap(), Rat::zero());
    }

    #[test]
    fn geometric_series_inverse() {
        // 1 / (1 - e) = 1 + e + e^2 + ...; the oracle multiplies back and
        // demands the product be 1 through the shared window.
        let one = Jet::constant(Rat::one(), 2);
        let denom = Jet::from_coeffs(0, vec![Rat::one(), -Rat::one(), Rat::zero()]);
        let geo = one.div(&denom, DEFAULT_FLOOR).unwrap();
        for k in 0..=2 {
            assert_eq!(geo.coeff(k).unwrap(), Rat::one());
        }
        let back = &geo * &denom;
        assert_eq!(back.coeff(0).unwrap(), Rat::one());
        for k in 1..=back.trunc_order() {
            assert_eq!(back.coeff(k).unwrap(), Rat::zero());
        }
    }

    #[test]
    fn coefficient_window_semantics() {
        let j = Jet::from_coeffs(0, vec![Rat::one(), r(2, 1), Rat::zero()]);
        assert_eq!(j.coeff(1).unwrap(), r(2, 1));
        // below the window: exactly zero
        assert_eq!(j.coeff(-3).unwrap(), Rat::zero());
        // above the window: unknown
        assert_eq!(
            j.coeff(3),
            Err(Error::InsufficientTruncation { want: 3, have: 2 })
        );
        let inv = Jet::constant(Rat::one(), 4).div(&Jet::eps(4), DEFAULT_FLOOR).unwrap();
        assert_eq!(inv.coeff(-1).unwrap(), Rat::one());
    }

    #[test]
    fn regularity() {
        let e = Jet::eps(4);
        let inv_e = Jet::constant(Rat::one(), 4).div(&e, DEFAULT_FLOOR).unwrap();
        assert!(!inv_e.is_regular());
        // (e^2)/e is regular
        let e2 = &e * &e;
        assert!(e2.div(&e, DEFAULT_FLOOR).unwrap().is_regular());
        assert!(Jet::zero(2).is_regular());
    }

    #[test]
    fn division_by_zero_jet_fails() {
        let z = Jet::zero(3);
        assert_eq!(
            Jet::eps(3).div(&z, DEFAULT_FLOOR),
            Err(Error::DivisionByZeroJet)
        );
    }

    #[test]
    fn pole_floor_is_enforced() {
        let e = Jet::eps(12);
        let mut e5 = Jet::constant(Rat::one(), 12);
        for _ in 0..5 {
            e5 = &e5 * &e;
        }
        let err = Jet::constant(Rat::one(), 12).div(&e5, DEFAULT_FLOOR);
        assert_eq!(
            err,
            Err(Error::PoleDepthExceeded { leading: -5, floor: DEFAULT_FLOOR })
        );
    }

    #[test]
    fn derivative_and_flip() {
        // d/de (2 + 3e + e^2) = 3 + 2e
        let j = Jet::from_coeffs(0, vec![r(2, 1), r(3, 1), r(1, 1)]);
        let d = j.derivative();
        assert_eq!(d.coeff(0).unwrap(), r(3, 1));
        assert_eq!(d.coeff(1).unwrap(), r(2, 1));
        let flipped = j.flip_eps();
        assert_eq!(flipped.coeff(1).unwrap(), r(-3, 1));
        assert_eq!(flipped.coeff(2).unwrap(), r(1, 1));
    }

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (-12i64..=12, 1i64..=5).prop_map(|(n, d)| Rat::new(n, d).unwrap())
    }

    fn arb_jet() -> impl Strategy<Value = Jet> {
        (-2i64..=1, proptest::collection::vec(arb_rat(), 3..=5))
            .prop_map(|(lo, coeffs)| Jet::from_coeffs(lo, coeffs))
    }

    proptest! {
        #[test]
        fn ring_axioms_up_to_truncation(a in arb_jet(), b in arb_jet(), c in arb_jet()) {
            let assoc_l = &(&a + &b) + &c;
            let assoc_r = &a + &(&b + &c);
            prop_assert_eq!(assoc_l, assoc_r);

            let distrib_l = &a * &(&b + &c);
            let distrib_r = &(&a * &b) + &(&a * &c);
            // The two routes may end up with different truncation windows;
            // compare through the shared one.
            let hi = distrib_l.trunc_order().min(distrib_r.trunc_order());
            for k in (-8..=hi).rev() {
                prop_assert_eq!(distrib_l.coeff(k).unwrap(), distrib_r.coeff(k).unwrap());
            }
        }

        #[test]
        fn division_undoes_multiplication(a in arb_jet(), b in arb_jet()) {
            prop_assume!(!b.is_zero());
            let prod = &a * &b;
            let back = prod.div(&b, -20).unwrap();
            let hi = back.trunc_order().min(a.trunc_order());
            for k in -8..=hi {
                prop_assert_eq!(back.coeff(k).unwrap(), a.coeff(k).unwrap());
            }
        }

        #[test]
        fn leibniz_at_order_one(a in arb_jet(), b in arb_jet()) {
            prop_assume!(a.is_regular() && b.is_regular());
            let prod = &a * &b;
            prop_assume!(prod.trunc_order() >= 1);
            let lhs = prod.coeff(1).unwrap();
            let rhs = a.coeff(0).unwrap() * b.coeff(1).unwrap()
                + a.coeff(1).unwrap() * b.coeff(0).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
