//! Sign + log-magnitude representation for quantities that overflow f64
//! (matching counts of K_n exceed 10^300 well before n = 100).

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// A real number stored as (sign, ln |x|). sign = 0 encodes exact zero.
/// Multiplication adds logs; addition goes through stable log-sum-exp.
#[derive(Clone, Copy, Debug)]
pub struct LogReal {
    sign: i8,
    ln_mag: f64,
}

impl LogReal {
    pub fn zero() -> Self {
        LogReal {
            sign: 0,
            ln_mag: f64::NEG_INFINITY,
        }
    }

    pub fn one() -> Self {
        LogReal { sign: 1, ln_mag: 0.0 }
    }

    pub fn from_parts(sign: i8, ln_mag: f64) -> Self {
        assert!(matches!(sign, -1 | 0 | 1));
        if sign == 0 || ln_mag == f64::NEG_INFINITY {
            LogReal::zero()
        } else {
            LogReal { sign, ln_mag }
        }
    }

    /// Positive value given by its natural log.
    pub fn exp_ln(ln_mag: f64) -> Self {
        LogReal::from_parts(1, ln_mag)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            LogReal::zero()
        } else {
            LogReal {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_mag: x.abs().ln(),
            }
        }
    }

    pub fn from_biguint(x: &BigUint) -> Self {
        if x.is_zero() {
            LogReal::zero()
        } else {
            LogReal {
                sign: 1,
                ln_mag: ln_biguint(x),
            }
        }
    }

    pub fn from_bigint(x: &BigInt) -> Self {
        match x.sign() {
            Sign::NoSign => LogReal::zero(),
            Sign::Plus => LogReal::from_biguint(x.magnitude()),
            Sign::Minus => LogReal {
                sign: -1,
                ln_mag: ln_biguint(x.magnitude()),
            },
        }
    }

    pub fn from_rational(x: &BigRational) -> Self {
        if x.is_zero() {
            return LogReal::zero();
        }
        let num = LogReal::from_bigint(x.numer());
        let den = LogReal::from_bigint(x.denom());
        num.div(den)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// ln |x|; NEG_INFINITY for zero.
    pub fn ln_magnitude(&self) -> f64 {
        self.ln_mag
    }

    /// ln(x) for positive values.
    pub fn ln(&self) -> Option<f64> {
        (self.sign > 0).then_some(self.ln_mag)
    }

    pub fn to_f64(&self) -> f64 {
        self.sign as f64 * self.ln_mag.exp()
    }

    pub fn abs(&self) -> Self {
        LogReal {
            sign: self.sign.abs(),
            ln_mag: self.ln_mag,
        }
    }

    pub fn neg(&self) -> Self {
        LogReal {
            sign: -self.sign,
            ln_mag: self.ln_mag,
        }
    }

    pub fn mul(&self, other: LogReal) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return LogReal::zero();
        }
        LogReal {
            sign: self.sign * other.sign,
            ln_mag: self.ln_mag + other.ln_mag,
        }
    }

    pub fn div(&self, other: LogReal) -> Self {
        assert!(other.sign != 0, "division by zero LogReal");
        if self.sign == 0 {
            return LogReal::zero();
        }
        LogReal {
            sign: self.sign * other.sign,
            ln_mag: self.ln_mag - other.ln_mag,
        }
    }

    pub fn add(&self, other: LogReal) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return *self;
        }
        let (hi, lo) = if self.ln_mag >= other.ln_mag {
            (*self, other)
        } else {
            (other, *self)
        };
        let d = lo.ln_mag - hi.ln_mag; // <= 0
        if hi.sign == lo.sign {
            LogReal {
                sign: hi.sign,
                ln_mag: hi.ln_mag + d.exp().ln_1p(),
            }
        } else {
            // |hi| - |lo|; cancels to zero when magnitudes match exactly
            let diff = -d.exp_m1(); // 1 - e^d in (0, 1]
            if diff == 0.0 {
                LogReal::zero()
            } else {
                LogReal {
                    sign: hi.sign,
                    ln_mag: hi.ln_mag + diff.ln(),
                }
            }
        }
    }

    pub fn sub(&self, other: LogReal) -> Self {
        self.add(other.neg())
    }

    /// Integer power; x^0 = 1.
    pub fn powi(&self, e: i64) -> Self {
        if e == 0 {
            return LogReal::one();
        }
        if self.sign == 0 {
            assert!(e > 0, "zero to a negative power");
            return LogReal::zero();
        }
        let sign = if self.sign < 0 && e % 2 != 0 { -1 } else { 1 };
        LogReal {
            sign,
            ln_mag: self.ln_mag * e as f64,
        }
    }

    /// x^(1/r) for positive x.
    pub fn nth_root(&self, r: u32) -> Self {
        assert!(self.sign >= 0, "root of a negative LogReal");
        if self.sign == 0 {
            return LogReal::zero();
        }
        LogReal {
            sign: 1,
            ln_mag: self.ln_mag / r as f64,
        }
    }

    pub fn sqrt(&self) -> Self {
        self.nth_root(2)
    }
}

impl PartialEq for LogReal {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == 0 || self.ln_mag == other.ln_mag)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        Some(match (self.sign, other.sign) {
            (a, b) if a < b => Less,
            (a, b) if a > b => Greater,
            (0, 0) => Equal,
            (1, 1) => self.ln_mag.partial_cmp(&other.ln_mag)?,
            _ => other.ln_mag.partial_cmp(&self.ln_mag)?, // both negative
        })
    }
}

impl std::fmt::Display for LogReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "exp({})", self.ln_mag),
            _ => write!(f, "-exp({})", self.ln_mag),
        }
    }
}

/// ln of a positive big integer, accurate to f64 precision at any size.
pub fn ln_biguint(x: &BigUint) -> f64 {
    debug_assert!(!x.is_zero());
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("fits f64 range").ln()
    } else {
        let shift = bits - 64;
        let top: BigUint = x >> shift;
        top.to_f64().expect("64-bit value").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs())),
            "{a} vs {b}"
        );
    }

    #[test]
    fn round_trips() {
        for &x in &[0.0, 1.0, -2.5, 1e-200, -1e200, 3.25] {
            close(LogReal::from_f64(x).to_f64(), x, 1e-13);
        }
    }

    #[test]
    fn add_mixed_signs() {
        let a = LogReal::from_f64(5.0);
        let b = LogReal::from_f64(-3.0);
        close(a.add(b).to_f64(), 2.0, 1e-14);
        close(b.add(a).to_f64(), 2.0, 1e-14);
        close(a.add(a.neg()).to_f64(), 0.0, 1e-14);
        assert!(a.add(a.neg()).is_zero());
    }

    #[test]
    fn mul_div_pow() {
        let a = LogReal::from_f64(-4.0);
        close(a.mul(a).to_f64(), 16.0, 1e-14);
        close(a.powi(3).to_f64(), -64.0, 1e-13);
        close(a.powi(0).to_f64(), 1.0, 0.0);
        close(LogReal::from_f64(16.0).sqrt().to_f64(), 4.0, 1e-14);
        close(a.div(LogReal::from_f64(8.0)).to_f64(), -0.5, 1e-14);
    }

    #[test]
    fn huge_values_survive() {
        // 10^600 is representable even though f64 overflows
        let big = LogReal::exp_ln(600.0 * std::f64::consts::LN_10);
        let ratio = big.div(big);
        close(ratio.to_f64(), 1.0, 1e-14);
        assert!(big.to_f64().is_infinite());
    }

    #[test]
    fn ln_biguint_large() {
        let x = BigUint::one() << 5000;
        close(ln_biguint(&x), 5000.0 * std::f64::consts::LN_2, 1e-14);
        let y = BigUint::from(12345u32);
        close(ln_biguint(&y), (12345f64).ln(), 1e-14);
    }

    #[test]
    fn ordering() {
        let a = LogReal::from_f64(-2.0);
        let b = LogReal::from_f64(1.0);
        let z = LogReal::zero();
        assert!(a < z && z < b && a < b);
        assert!(LogReal::from_f64(-1.0) > LogReal::from_f64(-3.0));
    }
}
