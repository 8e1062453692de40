//! Helpers over MPFR floats (`rug`) used by the numeric layers: exact-input
//! conversions, rational roots of unity, and integer rounding with an error
//! report.

use num_bigint::BigInt;
use num_rational::BigRational;
use rug::float::Constant;
use rug::{Complex, Float, Integer};

/// Pi at the given precision.
pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// `2 pi`.
pub fn two_pi(prec: u32) -> Float {
    Float::with_val(prec, 2) * pi(prec)
}

/// `(4 pi)^e`.
pub fn four_pi_pow(prec: u32, e: u32) -> Float {
    let base = Float::with_val(prec, 4) * pi(prec);
    Float::with_val(prec, rug::ops::Pow::pow(base, e))
}

pub fn float_from_bigint(n: &BigInt, prec: u32) -> Float {
    let (sign, digits) = n.to_u64_digits();
    let mag = Integer::from_digits(&digits, rug::integer::Order::Lsf);
    let f = Float::with_val(prec, mag);
    if sign == num_bigint::Sign::Minus {
        -f
    } else {
        f
    }
}

pub fn float_from_rational(r: &BigRational, prec: u32) -> Float {
    let num = float_from_bigint(r.numer(), prec);
    let den = float_from_bigint(r.denom(), prec);
    num / den
}

/// `e(num/den) = exp(2 pi i num / den)` computed from the reduced fraction.
pub fn root_of_unity(num: i64, den: i64, prec: u32) -> Complex {
    assert!(den > 0);
    let r = num.rem_euclid(den);
    let angle = Float::with_val(prec, 2u32) * pi(prec) * Float::with_val(prec, r)
        / Float::with_val(prec, den);
    let (sin, cos) = angle.sin_cos(Float::new(prec));
    Complex::with_val(prec, (cos, sin))
}

/// Table of `e(j/c)` for `j = 0..c`, for exponential sums modulo `c`.
pub struct UnityTable {
    pub modulus: i64,
    table: Vec<Complex>,
}

impl UnityTable {
    pub fn new(modulus: i64, prec: u32) -> Self {
        assert!(modulus > 0);
        let base = root_of_unity(1, modulus, prec);
        let mut table = Vec::with_capacity(modulus as usize);
        let mut cur = Complex::with_val(prec, (1, 0));
        for _ in 0..modulus {
            table.push(cur.clone());
            cur *= &base;
        }
        UnityTable { modulus, table }
    }

    /// `e(j/c)` for any integer `j`.
    pub fn e(&self, j: i64) -> &Complex {
        &self.table[j.rem_euclid(self.modulus) as usize]
    }
}

/// Round a real to the nearest integer; returns the integer and the
/// rounding distance as `f64`.
pub fn round_to_integer(x: &Float) -> (BigInt, f64) {
    let rounded = x.clone().round();
    let err = Float::with_val(53, x - &rounded).abs().to_f64();
    let int = rounded.to_integer().expect("finite float expected");
    let big = BigInt::parse_bytes(int.to_string_radix(16).as_bytes(), 16).expect("radix parse");
    (big, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn constants_and_conversions() {
        let p = pi(128);
        assert!((p.to_f64() - std::f64::consts::PI).abs() < 1e-15);
        let r = BigRational::new(BigInt::from(1), BigInt::from(3));
        let f = float_from_rational(&r, 128);
        assert!((f.to_f64() - 1.0 / 3.0).abs() < 1e-16);
        let big = BigInt::parse_bytes(b"-123456789012345678901234567890", 10).unwrap();
        let f = float_from_bigint(&big, 160);
        assert!((f.to_f64() + 1.2345678901234568e29).abs() / 1.23e29 < 1e-14);
    }

    #[test]
    fn roots_of_unity() {
        let z = root_of_unity(1, 4, 128);
        assert!((z.real().to_f64()).abs() < 1e-30);
        assert!((z.imag().to_f64() - 1.0).abs() < 1e-30);
        let z = root_of_unity(-1, 4, 128);
        assert!((z.imag().to_f64() + 1.0).abs() < 1e-30);

        let t = UnityTable::new(12, 128);
        for j in [-5i64, 0, 3, 7, 25] {
            let direct = root_of_unity(j, 12, 128);
            let diff = Complex::with_val(128, t.e(j) - &direct);
            assert!(diff.abs().real().to_f64() < 1e-35);
        }
    }

    #[test]
    fn rounding() {
        let x = Float::with_val(64, 41.99993);
        let (n, err) = round_to_integer(&x);
        assert_eq!(n, BigInt::from(42));
        assert!((err - 7e-5).abs() < 1e-6);

        let y = Float::with_val(64, -3.5001);
        let (n, err) = round_to_integer(&y);
        assert_eq!(n, BigInt::from(-4));
        assert!(err < 0.5);

        // round-trip a huge integer through Float
        let big = BigInt::one() << 300;
        let f = float_from_bigint(&big, 400);
        let (n, err) = round_to_integer(&f);
        assert_eq!(n, big);
        assert_eq!(err, 0.0);
    }
}
