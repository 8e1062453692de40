//! Small elementary number-theory helpers shared across modules.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// All positive divisors of `n > 0`, ascending.
pub fn divisors(n: i64) -> Vec<i64> {
    assert!(n > 0, "divisors of nonpositive {n}");
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

/// Divisor power sum `sigma_k(n) = sum_{d | n} d^k` for `n >= 1`.
pub fn sigma(k: u32, n: i64) -> BigInt {
    divisors(n)
        .into_iter()
        .map(|d| BigInt::from(d).pow(k))
        .sum()
}

/// `sigma_1(n)` as an `i64` (safe for the ranges used here).
pub fn sigma1(n: i64) -> i64 {
    divisors(n).into_iter().sum()
}

/// Mobius function.
pub fn moebius(n: i64) -> i64 {
    assert!(n > 0);
    let mut n = n;
    let mut primes = 0;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            primes += 1;
        }
        p += 1;
    }
    if n > 1 {
        primes += 1;
    }
    if primes % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Euler totient.
pub fn euler_phi(n: i64) -> i64 {
    assert!(n > 0);
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Integer square root of `n >= 0`.
pub fn isqrt(n: i64) -> i64 {
    if n < 2 {
        return n.max(0);
    }
    let mut x = (n as f64).sqrt() as i64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Returns `Some(r)` with `r >= 0` and `r^2 == n` when `n` is a perfect square.
pub fn perfect_sqrt(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// Extended gcd: returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b)`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        let s = if a < 0 { -1 } else { 1 };
        return (a.abs(), s, 0);
    }
    let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
    (g, y, x - (a.div_euclid(b)) * y)
}

/// Inverse of `a` modulo `n > 0`; requires `gcd(a, n) = 1`.
pub fn mod_inverse(a: i64, n: i64) -> Option<i64> {
    let (g, x, _) = ext_gcd(a.rem_euclid(n), n);
    (g == 1).then(|| x.rem_euclid(n))
}

/// Exact binomial coefficient.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// Exact factorial.
pub fn factorial(n: u64) -> BigInt {
    let mut out = BigInt::one();
    for i in 2..=n {
        out *= i;
    }
    out
}

/// Bernoulli number `B_n` (convention `B_1 = -1/2`), by the defining recursion.
pub fn bernoulli(n: u32) -> BigRational {
    let mut b: Vec<BigRational> = Vec::with_capacity(n as usize + 1);
    for m in 0..=(n as i64) {
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from_integer(binomial(m + 1, j as i64)) * bj;
        }
        let bm = if m == 0 {
            BigRational::one()
        } else {
            -acc / BigRational::from_integer(BigInt::from(m + 1))
        };
        b.push(bm);
    }
    b.pop().unwrap()
}
