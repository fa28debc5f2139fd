//! Gaussian rational arithmetic: the exact coefficient field `a + b i`
//! with `a`, `b` arbitrary-precision rationals.

use num::{BigInt, BigRational, Signed, Zero as NumZero};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// A Gaussian rational `re + im * i`. `BigRational` keeps both parts in
/// lowest terms with positive denominators, so no normalization pass is
/// needed here.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ExactScalar {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactScalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        ExactScalar { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        ExactScalar {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    /// `num / den` as a real rational.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        ExactScalar {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        ExactScalar {
            re: BigRational::zero(),
            im: BigRational::from_integer(BigInt::from(1)),
        }
    }

    /// `a + b i` from integer parts.
    pub fn gauss(a: i64, b: i64) -> Self {
        ExactScalar {
            re: BigRational::from_integer(BigInt::from(a)),
            im: BigRational::from_integer(BigInt::from(b)),
        }
    }

    pub fn conj(&self) -> Self {
        ExactScalar {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Real part as a new scalar.
    pub fn real_part(&self) -> Self {
        ExactScalar {
            re: self.re.clone(),
            im: BigRational::zero(),
        }
    }

    /// Imaginary part (as a real scalar).
    pub fn imag_part(&self) -> Self {
        ExactScalar {
            re: self.im.clone(),
            im: BigRational::zero(),
        }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero");
        let norm = &self.re * &self.re + &self.im * &self.im;
        ExactScalar {
            re: &self.re / &norm,
            im: -&self.im / &norm,
        }
    }

    /// Best-effort float value, for display and for the toy model bridge.
    pub fn to_f64(&self) -> (f64, f64) {
        fn r2f(r: &BigRational) -> f64 {
            let n = r.numer();
            let d = r.denom();
            // good enough for diagnostics; exact paths never round
            let nf: f64 = n.to_string().parse().unwrap_or(f64::NAN);
            let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
            nf / df
        }
        (r2f(&self.re), r2f(&self.im))
    }
}

impl From<i32> for ExactScalar {
    fn from(n: i32) -> Self {
        ExactScalar::from_int(n as i64)
    }
}

impl Zero for ExactScalar {
    fn zero() -> Self {
        ExactScalar {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for ExactScalar {
    fn one() -> Self {
        ExactScalar::from_int(1)
    }
}

impl Add for ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: ExactScalar) -> ExactScalar {
        ExactScalar {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl AddAssign for ExactScalar {
    fn add_assign(&mut self, rhs: ExactScalar) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: ExactScalar) -> ExactScalar {
        ExactScalar {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl SubAssign for ExactScalar {
    fn sub_assign(&mut self, rhs: ExactScalar) {
        self.re -= rhs.re;
        self.im -= rhs.im;
    }
}

impl Mul for ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: ExactScalar) -> ExactScalar {
        ExactScalar {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl MulAssign for ExactScalar {
    fn mul_assign(&mut self, rhs: ExactScalar) {
        *self = self.clone() * rhs;
    }
}

impl Div for ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: ExactScalar) -> ExactScalar {
        self * rhs.inv()
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_spot() {
        let a = ExactScalar::gauss(3, -2);
        let b = ExactScalar::ratio(5, 7);
        let c = ExactScalar::i();
        assert_eq!(
            a.clone() * (b.clone() + c.clone()),
            a.clone() * b.clone() + a.clone() * c.clone()
        );
        assert_eq!(a.clone() * a.inv(), ExactScalar::one());
        assert_eq!(c.clone() * c, ExactScalar::from_int(-1));
        assert_eq!(b.clone() - b, ExactScalar::zero());
    }

    #[test]
    fn conjugation() {
        let a = ExactScalar::gauss(2, 5);
        assert_eq!(a.conj().conj(), a);
        assert!((a.clone() * a.conj()).is_real());
    }
}
