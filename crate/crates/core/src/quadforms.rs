//! Positive definite integral binary quadratic forms: Gauss reduction,
//! enumeration of reduced forms per discriminant, stabilizer orders, and
//! Hurwitz-Kronecker class numbers `H(d)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::isqrt;
use crate::{Error, Result};

/// The form `[A, B, C] = A X^2 + B X Y + C Y^2` with `A > 0` and
/// `B^2 - 4AC < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let q = QuadForm { a, b, c };
        if a <= 0 || q.discriminant() >= 0 {
            return Err(Error::NotPositiveDefinite { a, b, c });
        }
        Ok(q)
    }

    /// `B^2 - 4AC`, negative for positive definite forms.
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// `-A < B <= A <= C`, with `B >= 0` when `A = C`.
    pub fn is_reduced(&self) -> bool {
        (-self.a < self.b && self.b <= self.a && self.a <= self.c)
            && (self.a != self.c || self.b >= 0)
    }

    /// Order of the stabilizer in `PSL_2(Z)`: 3 for forms equivalent to
    /// `a(X^2 + XY + Y^2)`, 2 for `a(X^2 + Y^2)`, 1 otherwise.
    pub fn stabilizer_order(&self) -> i64 {
        let r = reduce(*self);
        if r.a == r.b && r.b == r.c {
            3
        } else if r.b == 0 && r.a == r.c {
            2
        } else {
            1
        }
    }
}

/// Gauss reduction to the canonical representative of the `PSL_2(Z)`-orbit.
pub fn reduce(q: QuadForm) -> QuadForm {
    debug_assert!(q.a > 0 && q.discriminant() < 0);
    let (mut a, mut b, mut c) = (q.a, q.b, q.c);
    loop {
        // translate: B -> B - 2kA into (-A, A]
        if b > a || b <= -a {
            let mut k = (b + a).div_euclid(2 * a);
            if b - 2 * k * a == -a {
                k -= 1;
            }
            let nb = b - 2 * k * a;
            let nc = a * k * k - b * k + c;
            b = nb;
            c = nc;
        }
        if a > c {
            // flip: [A,B,C] -> [C,-B,A]
            (a, b, c) = (c, -b, a);
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        break;
    }
    QuadForm { a, b, c }
}

/// All reduced forms of discriminant `-d` (requires `d > 0`,
/// `d = 0, 3 mod 4`), sorted lexicographically.
pub fn enumerate_reduced(d: i64) -> Result<Vec<QuadForm>> {
    if d <= 0 || !matches!(d.rem_euclid(4), 0 | 3) {
        return Err(Error::BadDiscriminant(d));
    }
    let mut out = Vec::new();
    let a_max = isqrt(d / 3);
    for a in 1..=a_max {
        for b in (-a + 1)..=a {
            let num = b * b + d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if a == c && b < 0 {
                continue;
            }
            out.push(QuadForm { a, b, c });
        }
    }
    out.sort();
    Ok(out)
}

/// Class number `h(-d)`: the number of reduced forms.
pub fn class_number(d: i64) -> Result<usize> {
    Ok(enumerate_reduced(d)?.len())
}

/// Hurwitz-Kronecker class number:
/// `H(0) = -1/12`, `H(d) = sum_Q 1/#Gamma_Q` over reduced forms of
/// discriminant `-d`, and `H(d) = 0` for `d = 1, 2 mod 4`.
pub fn hurwitz(d: i64) -> Result<BigRational> {
    if d < 0 {
        return Err(Error::BadDiscriminant(d));
    }
    if d == 0 {
        return Ok(BigRational::new(BigInt::from(-1), BigInt::from(12)));
    }
    if !matches!(d.rem_euclid(4), 0 | 3) {
        return Ok(BigRational::zero());
    }
    let mut acc = BigRational::zero();
    for q in enumerate_reduced(d)? {
        acc += BigRational::new(BigInt::from(1), BigInt::from(q.stabilizer_order()));
    }
    Ok(acc)
}
