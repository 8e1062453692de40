//! Truncated Laurent series in `q` with exact big-rational coefficients.
//!
//! Every series carries an explicit window `[valuation, precision)`:
//! coefficients below the valuation are exactly zero, coefficients at or
//! above the precision bound are unknown and reading them is an error.
//! Operators that consume coefficients (Hecke `T_m`, Atkin `U_m`) shrink the
//! window instead of silently truncating.
//!
//! Constructors for the standard level-1 forms (`E_{2k}`, `Delta`, `j`,
//! `theta`), the Hecke system `j_m`, the derivative `D = q d/dq`, and the
//! Rankin-Cohen brackets all live here.

pub mod tau;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{bernoulli, divisors, sigma};
use crate::{Error, Result};

/// A half-integer, stored as twice its value. Used for the weights appearing
/// in Rankin-Cohen brackets (`3/2`, `1/2`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub fn from_int(k: i64) -> Self {
        HalfInt(2 * k)
    }

    /// `n/2` as a half-integer.
    pub fn halves(n: i64) -> Self {
        HalfInt(n)
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.0), BigInt::from(2))
    }
}

/// Truncated Laurent series with exact rational coefficients.
///
/// Invariants: every stored exponent `n` satisfies
/// `valuation <= n < precision`, and no stored coefficient is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    valuation: i64,
    precision: i64,
    coeffs: BTreeMap<i64, BigRational>,
}

impl QSeries {
    /// The zero series on the window `[valuation, precision)`.
    pub fn zero(valuation: i64, precision: i64) -> Result<Self> {
        if precision <= valuation {
            return Err(Error::PrecisionUnderflow {
                valuation,
                precision,
            });
        }
        Ok(QSeries {
            valuation,
            precision,
            coeffs: BTreeMap::new(),
        })
    }

    /// The constant series `1` known through `q^(precision-1)`.
    pub fn one(precision: i64) -> Result<Self> {
        let mut s = Self::zero(0, precision)?;
        s.coeffs.insert(0, BigRational::one());
        Ok(s)
    }

    /// `c * q^n`, known on `[n, precision)`.
    pub fn monomial(n: i64, c: BigRational, precision: i64) -> Result<Self> {
        let mut s = Self::zero(n, precision)?;
        if !c.is_zero() {
            s.coeffs.insert(n, c);
        }
        Ok(s)
    }

    /// Build from `(exponent, coefficient)` pairs; all exponents must lie in
    /// the window.
    pub fn from_terms<I>(valuation: i64, precision: i64, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, BigRational)>,
    {
        let mut s = Self::zero(valuation, precision)?;
        for (n, c) in terms {
            assert!(
                n >= valuation && n < precision,
                "term q^{n} outside window [{valuation}, {precision})"
            );
            if !c.is_zero() {
                s.coeffs.insert(n, c);
            }
        }
        Ok(s)
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    /// Exclusive upper exponent bound.
    pub fn precision(&self) -> i64 {
        self.precision
    }

    /// Lowest exponent with a nonzero coefficient, if any.
    pub fn order(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Coefficient of `q^n`. Exact zero below the valuation, error at or
    /// above the precision bound.
    pub fn coeff(&self, n: i64) -> Result<BigRational> {
        if n >= self.precision {
            return Err(Error::PrecisionExceeded {
                wanted: n,
                precision: self.precision,
            });
        }
        Ok(self.coeffs.get(&n).cloned().unwrap_or_else(BigRational::zero))
    }

    /// Coefficient of `q^n`, panicking on a window violation. Test helper.
    pub fn c(&self, n: i64) -> BigRational {
        self.coeff(n).expect("coefficient out of window")
    }

    /// Nonzero terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.coeffs.iter().map(|(n, c)| (*n, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Restrict to a smaller window `[valuation, new_precision)`.
    pub fn truncated(&self, new_precision: i64) -> Result<Self> {
        if new_precision > self.precision {
            return Err(Error::PrecisionExceeded {
                wanted: new_precision,
                precision: self.precision,
            });
        }
        if new_precision <= self.valuation {
            return Err(Error::PrecisionUnderflow {
                valuation: self.valuation,
                precision: new_precision,
            });
        }
        let mut s = QSeries {
            valuation: self.valuation,
            precision: new_precision,
            coeffs: self.coeffs.clone(),
        };
        s.coeffs.retain(|n, _| *n < new_precision);
        Ok(s)
    }

    /// Multiply by `q^k` (shifts the window).
    pub fn shifted(&self, k: i64) -> Self {
        QSeries {
            valuation: self.valuation + k,
            precision: self.precision + k,
            coeffs: self.coeffs.iter().map(|(n, c)| (n + k, c.clone())).collect(),
        }
    }

    /// Multiply every coefficient by the scalar `r`.
    pub fn scaled(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return QSeries {
                valuation: self.valuation,
                precision: self.precision,
                coeffs: BTreeMap::new(),
            };
        }
        QSeries {
            valuation: self.valuation,
            precision: self.precision,
            coeffs: self.coeffs.iter().map(|(n, c)| (*n, c * r)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scaled(&-BigRational::one())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let valuation = self.valuation.min(other.valuation);
        let precision = self.precision.min(other.precision);
        if precision <= valuation {
            return Err(Error::PrecisionUnderflow {
                valuation,
                precision,
            });
        }
        let mut coeffs = BTreeMap::new();
        for (n, c) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if *n >= precision {
                continue;
            }
            let entry = coeffs.entry(*n).or_insert_with(BigRational::zero);
            *entry += c;
        }
        coeffs.retain(|_, c: &mut BigRational| !c.is_zero());
        Ok(QSeries {
            valuation,
            precision,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    fn all_integer(&self) -> bool {
        self.coeffs.values().all(|c| c.is_integer())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let valuation = self.valuation + other.valuation;
        let precision = (self.precision + other.valuation).min(other.precision + self.valuation);
        if precision <= valuation {
            return Err(Error::PrecisionUnderflow {
                valuation,
                precision,
            });
        }
        let len = (precision - valuation) as usize;
        // Integer coefficients are the common case for the standard forms;
        // BigInt convolution avoids the per-term rational renormalization.
        let coeffs = if self.all_integer() && other.all_integer() {
            let a: Vec<(i64, BigInt)> = self
                .coeffs
                .iter()
                .map(|(n, c)| (*n, c.to_integer()))
                .collect();
            let b: Vec<(i64, BigInt)> = other
                .coeffs
                .iter()
                .map(|(n, c)| (*n, c.to_integer()))
                .collect();
            let mut acc: Vec<BigInt> = vec![BigInt::zero(); len];
            for (i, ai) in &a {
                for (j, bj) in &b {
                    let n = i + j;
                    if n >= precision {
                        break;
                    }
                    acc[(n - valuation) as usize] += ai * bj;
                }
            }
            acc.into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (valuation + k as i64, BigRational::from_integer(c)))
                .collect()
        } else {
            let mut acc: Vec<BigRational> = vec![BigRational::zero(); len];
            for (i, a) in self.coeffs.iter() {
                for (j, b) in other.coeffs.iter() {
                    let n = i + j;
                    if n >= precision {
                        break;
                    }
                    acc[(n - valuation) as usize] += a * b;
                }
            }
            acc.into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (valuation + k as i64, c))
                .collect()
        };
        Ok(QSeries {
            valuation,
            precision,
            coeffs,
        })
    }

    /// Integer power by repeated squaring; `pow(0)` is `1` with the window
    /// length of `self` transplanted to exponent zero.
    pub fn pow(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Self::one(self.precision - self.valuation);
        }
        let mut base = self.clone();
        let mut k = k;
        let mut acc: Option<QSeries> = None;
        loop {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base)?,
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.mul(&base)?;
        }
        Ok(acc.unwrap())
    }

    /// Multiplicative inverse. The leading (lowest-order) coefficient must be
    /// nonzero; the result window is `[-w, p - 2w)` for input order `w`.
    pub fn invert(&self) -> Result<Self> {
        let w = self.order().ok_or(Error::InvertZero)?;
        let lead = self.coeffs[&w].clone();
        let len = (self.precision - w) as usize;
        let out_val = -w;
        let out_prec = self.precision - 2 * w;
        if out_prec <= out_val {
            return Err(Error::PrecisionUnderflow {
                valuation: out_val,
                precision: out_prec,
            });
        }
        // Fast path: an integer series with unit leading coefficient has an
        // integer inverse (covers Delta and its powers).
        let unit_lead = lead == BigRational::one() || lead == -BigRational::one();
        let b: Vec<BigRational> = if self.all_integer() && unit_lead {
            let mut a = vec![BigInt::zero(); len];
            for (n, c) in &self.coeffs {
                a[(n - w) as usize] = c.to_integer();
            }
            let lead_int = a[0].clone();
            let mut b = vec![BigInt::zero(); len];
            b[0] = lead_int.clone(); // 1/(+-1) = +-1
            for t in 1..len {
                let mut s = BigInt::zero();
                for k in 1..=t {
                    if !a[k].is_zero() && !b[t - k].is_zero() {
                        s += &a[k] * &b[t - k];
                    }
                }
                if !s.is_zero() {
                    b[t] = -s * &lead_int;
                }
            }
            b.into_iter().map(BigRational::from_integer).collect()
        } else {
            let mut a = vec![BigRational::zero(); len];
            for (n, c) in &self.coeffs {
                a[(n - w) as usize] = c.clone();
            }
            let mut b = vec![BigRational::zero(); len];
            b[0] = BigRational::one() / &lead;
            for t in 1..len {
                let mut s = BigRational::zero();
                for k in 1..=t {
                    if !a[k].is_zero() && !b[t - k].is_zero() {
                        s += &a[k] * &b[t - k];
                    }
                }
                if !s.is_zero() {
                    b[t] = -s / &lead;
                }
            }
            b
        };
        let coeffs = b
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(t, c)| (out_val + t as i64, c))
            .collect();
        Ok(QSeries {
            valuation: out_val,
            precision: out_prec,
            coeffs,
        })
    }

    /// `D^order` where `D = q d/dq` multiplies the `q^n` coefficient by `n^order`.
    pub fn derivative(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(n, _)| **n != 0)
            .map(|(n, c)| (*n, c * BigRational::from_integer(BigInt::from(*n).pow(order))))
            .collect();
        QSeries {
            valuation: self.valuation,
            precision: self.precision,
            coeffs,
        }
    }

    /// Atkin operator `U_m`: picks coefficients at exponents divisible by `m`.
    pub fn u_operator(&self, m: i64) -> Result<Self> {
        assert!(m >= 1);
        let valuation = self.valuation.div_euclid(m) + i64::from(self.valuation.rem_euclid(m) != 0);
        let precision = (self.precision - 1).div_euclid(m) + 1;
        if precision <= valuation {
            return Err(Error::PrecisionUnderflow {
                valuation,
                precision,
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(n, _)| *n % m == 0)
            .map(|(n, c)| (*n / m, c.clone()))
            .collect();
        Ok(QSeries {
            valuation,
            precision,
            coeffs,
        })
    }

    /// Hecke operator `T_m` in weight `weight >= 0`:
    /// the output `q^n` coefficient is
    /// `sum_{d | gcd(m,n), d > 0} d^(weight-1) a(m n / d^2)`,
    /// with `gcd(m, 0) = m`. Valid on principal parts (negative `n`) as well.
    /// In weight `0` the factor `d^(-1)` is an exact rational.
    pub fn hecke(&self, weight: i64, m: i64) -> Result<Self> {
        assert!(m >= 1);
        assert!(weight >= 0 && weight % 2 == 0, "weight must be even >= 0");
        let out_prec = self.precision.div_euclid(m);
        let out_val = if self.valuation < 0 {
            self.valuation * m
        } else {
            self.valuation.div_euclid(m)
        };
        if out_prec <= out_val {
            return Err(Error::InsufficientPrecision {
                needed: m * (out_val + 2),
                available: self.precision,
            });
        }
        let mut out = QSeries {
            valuation: out_val,
            precision: out_prec,
            coeffs: BTreeMap::new(),
        };
        for n in out_val..out_prec {
            let g = if n == 0 { m } else { num_integer::gcd(m, n.abs()) };
            let mut acc = BigRational::zero();
            for d in divisors(g) {
                let idx = m * n / (d * d);
                if idx < self.valuation {
                    continue;
                }
                let a = self.coeff(idx)?;
                if a.is_zero() {
                    continue;
                }
                let factor = if weight == 0 {
                    BigRational::new(BigInt::one(), BigInt::from(d))
                } else {
                    BigRational::from_integer(BigInt::from(d).pow(weight as u32 - 1))
                };
                acc += a * factor;
            }
            if !acc.is_zero() {
                out.coeffs.insert(n, acc);
            }
        }
        Ok(out)
    }

    /// True when the two series agree exactly on the intersection of their
    /// windows (which must be nonempty).
    pub fn agrees_with(&self, other: &Self) -> bool {
        let lo = self.valuation.min(other.valuation);
        let hi = self.precision.min(other.precision);
        if hi <= lo {
            return false;
        }
        for n in lo..hi {
            let a = self.coeffs.get(&n).cloned().unwrap_or_else(BigRational::zero);
            let b = other.coeffs.get(&n).cloned().unwrap_or_else(BigRational::zero);
            if a != b {
                return false;
            }
        }
        true
    }

    /// First exponent in the common window where the two series differ.
    pub fn first_difference(&self, other: &Self) -> Option<i64> {
        let lo = self.valuation.min(other.valuation);
        let hi = self.precision.min(other.precision);
        (lo..hi).find(|n| {
            self.coeffs.get(n).cloned().unwrap_or_else(BigRational::zero)
                != other.coeffs.get(n).cloned().unwrap_or_else(BigRational::zero)
        })
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        } else {
            for (i, (n, c)) in self.coeffs.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                match n {
                    0 => write!(f, "{c}")?,
                    1 => write!(f, "{c}*q")?,
                    _ => write!(f, "{c}*q^{n}")?,
                }
            }
        }
        write!(f, " + O(q^{})", self.precision)
    }
}

// JSON form: {"valuation": v, "precision": p, "coeffs": {"n": "p/q", ...}}
impl Serialize for QSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("QSeries", 3)?;
        st.serialize_field("valuation", &self.valuation)?;
        st.serialize_field("precision", &self.precision)?;
        let coeffs: BTreeMap<String, String> = self
            .coeffs
            .iter()
            .map(|(n, c)| (n.to_string(), c.to_string()))
            .collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for QSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            valuation: i64,
            precision: i64,
            coeffs: BTreeMap<String, String>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut coeffs = BTreeMap::new();
        for (k, v) in raw.coeffs {
            let n: i64 = k.parse().map_err(D::Error::custom)?;
            let c: BigRational = v.parse().map_err(|_| D::Error::custom("bad rational"))?;
            if n < raw.valuation || n >= raw.precision {
                return Err(D::Error::custom("exponent outside window"));
            }
            if !c.is_zero() {
                coeffs.insert(n, c);
            }
        }
        if raw.precision <= raw.valuation {
            return Err(D::Error::custom("empty window"));
        }
        Ok(QSeries {
            valuation: raw.valuation,
            precision: raw.precision,
            coeffs,
        })
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Eisenstein series `E_{2k} = 1 - (4k / B_{2k}) sum sigma_{2k-1}(n) q^n`
/// for even `weight = 2k >= 4`.
pub fn eisenstein(weight: i64, precision: i64) -> Result<QSeries> {
    if weight < 4 || weight % 2 != 0 {
        return Err(Error::BadWeight(weight));
    }
    let k2 = weight as u32;
    let factor = -rat(2 * weight) / bernoulli(k2);
    let mut s = QSeries::zero(0, precision.max(1))?;
    s.coeffs.insert(0, BigRational::one());
    for n in 1..precision {
        let c = &factor * BigRational::from_integer(sigma(k2 - 1, n));
        s.coeffs.insert(n, c);
    }
    Ok(s)
}

/// The Dedekind eta product `prod_{n>=1} (1 - q^n)` through `q^(precision-1)`,
/// by the pentagonal number theorem (sparse, exact).
pub fn euler_product(precision: i64) -> Result<QSeries> {
    let mut s = QSeries::zero(0, precision.max(1))?;
    let mut k = 0i64;
    loop {
        // generalized pentagonal exponents k(3k-1)/2 for k in Z
        let mut done = true;
        for kk in [k, -k] {
            let e = kk * (3 * kk - 1) / 2;
            if e < precision {
                done = false;
                let sign = if kk.rem_euclid(2) == 0 { 1 } else { -1 };
                s.coeffs.insert(e, rat(sign));
            }
            if kk == 0 {
                break;
            }
        }
        if done {
            break;
        }
        k += 1;
    }
    Ok(s)
}

/// `Delta = q prod (1 - q^n)^24`, the normalized weight-12 cusp form.
///
/// Computed by the logarithmic-derivative recursion
/// `n f(n) = -24 sum_{k<=n} sigma_1(k) f(n-k)` for `f = prod (1-q^n)^24`.
pub fn delta(precision: i64) -> Result<QSeries> {
    if precision <= 1 {
        return Err(Error::PrecisionUnderflow {
            valuation: 1,
            precision,
        });
    }
    let n_f = (precision - 1) as usize; // need f through q^(precision-2)
    let sig: Vec<BigInt> = (0..n_f).map(|k| if k == 0 { BigInt::zero() } else { sigma(1, k as i64) }).collect();
    let mut f: Vec<BigInt> = vec![BigInt::zero(); n_f];
    f[0] = BigInt::one();
    for n in 1..n_f {
        let mut acc = BigInt::zero();
        for k in 1..=n {
            if !f[n - k].is_zero() {
                acc += &sig[k] * &f[n - k];
            }
        }
        f[n] = acc * (-24) / BigInt::from(n as u64);
    }
    let mut s = QSeries::zero(1, precision)?;
    for (n, c) in f.into_iter().enumerate() {
        if !c.is_zero() {
            s.coeffs.insert(n as i64 + 1, BigRational::from_integer(c));
        }
    }
    Ok(s)
}

/// Jacobi theta `theta = 1 + 2 sum q^(n^2)`.
pub fn theta(precision: i64) -> Result<QSeries> {
    let mut s = QSeries::zero(0, precision.max(1))?;
    s.coeffs.insert(0, BigRational::one());
    let mut n = 1i64;
    while n * n < precision {
        s.coeffs.insert(n * n, rat(2));
        n += 1;
    }
    Ok(s)
}

/// Klein's `j = E_4^3 / Delta`, with window `[-1, precision)`.
/// Coefficients are served from a process-wide cache; [`j_uncached`] is the
/// direct-division route it is tested against.
pub fn j_function(precision: i64) -> Result<QSeries> {
    let coeffs = j1_coefficients(precision - 1);
    let mut s = QSeries::zero(-1, precision.max(0))?;
    for n in -1..precision {
        let c = if n == 0 {
            BigInt::from(744)
        } else {
            coeffs[(n + 1) as usize].clone()
        };
        if !c.is_zero() {
            s.coeffs.insert(n, BigRational::from_integer(c));
        }
    }
    Ok(s)
}

/// `j = E_4^3 / Delta` computed directly by series division (no cache).
pub fn j_uncached(precision: i64) -> Result<QSeries> {
    // E4^3 and Delta to precision+2 give the quotient below q^(precision).
    let p = precision + 2;
    let e4 = eisenstein(4, p)?;
    let num = e4.pow(3)?;
    let den = delta(p)?;
    num.mul(&den.invert()?)?.truncated(precision)
}

// Cached coefficients of j - 744: index k holds the coefficient of q^(k-1)
// (index 0 is the principal 1, index 1 the constant 0).
static J_CACHE: Mutex<Option<Arc<Vec<BigInt>>>> = Mutex::new(None);

/// Coefficients of `j - 744` for exponents `-1..=n_max`, cached globally and
/// grown geometrically on demand.
pub fn j1_coefficients(n_max: i64) -> Arc<Vec<BigInt>> {
    let mut guard = J_CACHE.lock().unwrap();
    let need = (n_max.max(0) + 2) as usize;
    let have = guard.as_ref().map_or(0, |v| v.len());
    if have < need {
        let target = need.next_power_of_two().max(256) as i64 - 2;
        let j = j_uncached(target + 1).expect("j expansion");
        let mut v = Vec::with_capacity((target + 2) as usize);
        for n in -1..=target {
            let c = j.c(n);
            debug_assert!(c.is_integer());
            v.push(if n == 0 { BigInt::zero() } else { c.to_integer() });
        }
        *guard = Some(Arc::new(v));
    }
    guard.as_ref().unwrap().clone()
}

/// Integer coefficients of `j_m = m T_m(j - 744)` for exponents
/// `-m..=n_max` (index 0 is the `q^(-m)` coefficient):
/// `c_m(n) = sum_{e | gcd(m,n)} (m/e) a(m n / e^2)` with `a` the
/// coefficients of `j - 744`.
pub fn jm_coefficients(m: i64, n_max: i64) -> Vec<BigInt> {
    assert!(m >= 1);
    let j1 = j1_coefficients(m * n_max.max(1));
    let a = |idx: i64| -> &BigInt { &j1[(idx + 1) as usize] };
    let mut out = Vec::with_capacity((n_max + m + 1) as usize);
    for n in -m..=n_max {
        let g = if n == 0 { m } else { num_integer::gcd(m, n.abs()) };
        let mut acc = BigInt::zero();
        for e in divisors(g) {
            let idx = m * n / (e * e);
            if idx >= -1 {
                let c = a(idx);
                if !c.is_zero() {
                    acc += (m / e) * c;
                }
            }
        }
        out.push(acc);
    }
    out
}

/// Hecke system `j_m = m T_m (j - 744)`, `j_0 = 1`; principal part `q^(-m)`,
/// constant term `0`.
pub fn faber_jm(m: i64, precision: i64) -> Result<QSeries> {
    assert!(m >= 0);
    if m == 0 {
        return QSeries::one(precision);
    }
    let coeffs = jm_coefficients(m, precision - 1);
    let mut s = QSeries::zero(-m, precision.max(1 - m))?;
    for (k, c) in coeffs.into_iter().enumerate() {
        if !c.is_zero() {
            s.coeffs.insert(k as i64 - m, BigRational::from_integer(c));
        }
    }
    Ok(s)
}

/// Rankin-Cohen bracket `[f, g]_nu` for weights `k` and `l`:
/// `sum_{r+s=nu} (-1)^r Gamma(k+nu) Gamma(l+nu) / (s! Gamma(k+r) r! Gamma(l+s))
///  D^r(f) D^s(g)`.
///
/// The Gamma ratios are finite products of rationals, so the result is exact.
/// Requires `k, l > 0` so no Gamma argument hits a nonpositive integer.
pub fn rc_bracket(f: &QSeries, k: HalfInt, g: &QSeries, l: HalfInt, nu: u32) -> Result<QSeries> {
    if k.0 <= 0 || l.0 <= 0 {
        return Err(Error::BadArgument(format!(
            "bracket weights must be positive, got {}/2 and {}/2",
            k.0, l.0
        )));
    }
    let kq = k.to_rational();
    let lq = l.to_rational();
    // rising(x, a, b) = Gamma(x+b)/Gamma(x+a) = prod_{t=a}^{b-1} (x+t)
    let rising = |x: &BigRational, a: u32, b: u32| -> BigRational {
        let mut acc = BigRational::one();
        for t in a..b {
            acc *= x + rat(t as i64);
        }
        acc
    };
    let mut out: Option<QSeries> = None;
    for r in 0..=nu {
        let s = nu - r;
        let mut coeff = rising(&kq, r, nu) * rising(&lq, s, nu);
        coeff /= BigRational::from_integer(crate::arith::factorial(r as u64))
            * BigRational::from_integer(crate::arith::factorial(s as u64));
        if r % 2 == 1 {
            coeff = -coeff;
        }
        let term = f.derivative(r).mul(&g.derivative(s))?.scaled(&coeff);
        out = Some(match out {
            None => term,
            Some(acc) => acc.add(&term)?,
        });
    }
    Ok(out.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, prec: i64) -> QSeries {
        QSeries::monomial(n, BigRational::one(), prec).unwrap()
    }

    #[test]
    fn window_rules() {
        let s = q(-2, 5);
        assert_eq!(s.coeff(-3).unwrap(), BigRational::zero());
        assert_eq!(s.coeff(-2).unwrap(), BigRational::one());
        assert!(matches!(
            s.coeff(5),
            Err(Error::PrecisionExceeded { wanted: 5, .. })
        ));
    }

    #[test]
    fn difference_of_squares() {
        let one = QSeries::one(3).unwrap();
        let a = one.add(&q(1, 3)).unwrap();
        let b = one.sub(&q(1, 3)).unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.c(0), rat(1));
        assert_eq!(p.c(1), rat(0));
        assert_eq!(p.c(2), rat(-1));
        assert_eq!(p.precision(), 3);
    }

    #[test]
    fn geometric_series_inverse() {
        let s = QSeries::one(4).unwrap().sub(&q(1, 4)).unwrap();
        let inv = s.invert().unwrap();
        for n in 0..4 {
            assert_eq!(inv.c(n), rat(1));
        }
    }

    #[test]
    fn invert_zero_fails() {
        let z = QSeries::zero(0, 5).unwrap();
        assert!(matches!(z.invert(), Err(Error::InvertZero)));
    }

    #[test]
    fn eisenstein_first_coefficients() {
        let e4 = eisenstein(4, 4).unwrap();
        assert_eq!(e4.c(0), rat(1));
        assert_eq!(e4.c(1), rat(240));
        assert_eq!(e4.c(2), rat(2160));
        let e6 = eisenstein(6, 3).unwrap();
        assert_eq!(e6.c(1), rat(-504));
        assert_eq!(e6.c(2), rat(-16632));
        assert!(eisenstein(5, 3).is_err());
        assert!(eisenstein(2, 3).is_err());
    }

    #[test]
    fn delta_matches_eta_product_power() {
        // Oracle: expand (prod (1-q^n))^24 directly by repeated squaring.
        let e = euler_product(10).unwrap();
        let oracle = e.pow(24).unwrap().shifted(1);
        let d = delta(10).unwrap();
        assert!(d.agrees_with(&oracle));
        assert_eq!(d.c(1), rat(1));
        assert_eq!(d.c(2), rat(-24));
        assert_eq!(d.c(3), rat(252));
        assert_eq!(d.c(6), rat(-6048));
    }

    #[test]
    fn discriminant_identity() {
        // E4^3 - E6^2 = 1728 Delta, classical cross-check of the constructors.
        let p = 50;
        let lhs = eisenstein(4, p)
            .unwrap()
            .pow(3)
            .unwrap()
            .sub(&eisenstein(6, p).unwrap().pow(2).unwrap())
            .unwrap();
        let rhs = delta(p).unwrap().scaled(&rat(1728));
        assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn j_expansion() {
        let j = j_function(3).unwrap();
        assert_eq!(j.c(-1), rat(1));
        assert_eq!(j.c(0), rat(744));
        assert_eq!(j.c(1), rat(196884));
        assert_eq!(j.c(2), rat(21493760));
        // cached route agrees with direct division
        let direct = j_uncached(40).unwrap();
        assert!(j_function(40).unwrap().agrees_with(&direct));
    }

    #[test]
    fn faber_polynomials() {
        let j0 = faber_jm(0, 5).unwrap();
        assert_eq!(j0.c(0), rat(1));
        assert!(j0.order() == Some(0));

        let j1 = faber_jm(1, 3).unwrap();
        assert_eq!(j1.c(-1), rat(1));
        assert_eq!(j1.c(0), rat(0));
        assert_eq!(j1.c(1), rat(196884));
        assert_eq!(j1.c(2), rat(21493760));

        let j2 = faber_jm(2, 2).unwrap();
        assert_eq!(j2.c(-2), rat(1));
        assert_eq!(j2.c(-1), rat(0));
        assert_eq!(j2.c(0), rat(0));
        assert_eq!(j2.c(1), rat(42987520));

        let j3 = faber_jm(3, 2).unwrap();
        assert_eq!(j3.c(-3), rat(1));
        assert_eq!(j3.c(1), rat(2592899910));
    }

    #[test]
    fn hecke_t2_on_j1_is_polynomial_identity() {
        // 2 T_2 (j - 744) = j^2 - 1488 j + 159768 as q-series.
        let p = 20;
        let j = j_function(2 * p + 2).unwrap();
        let j1 = j.sub(&QSeries::monomial(0, rat(744), 2 * p + 2).unwrap()).unwrap();
        let lhs = j1.hecke(0, 2).unwrap().scaled(&rat(2));
        let rhs = j
            .pow(2)
            .unwrap()
            .sub(&j.scaled(&rat(1488)))
            .unwrap()
            .add(&QSeries::monomial(0, rat(159768), 2 * p).unwrap())
            .unwrap();
        assert!(lhs.agrees_with(&rhs), "differ at {:?}", lhs.first_difference(&rhs));
    }

    #[test]
    fn hecke_t1_is_identity() {
        let d = delta(12).unwrap();
        assert!(d.hecke(12, 1).unwrap().agrees_with(&d));
    }

    #[test]
    fn hecke_commutes_and_composes() {
        let prec = 61;
        let d = delta(prec).unwrap();
        let a = d.hecke(12, 2).unwrap().hecke(12, 3).unwrap();
        let b = d.hecke(12, 3).unwrap().hecke(12, 2).unwrap();
        let c = d.hecke(12, 6).unwrap();
        assert!(a.agrees_with(&b));
        assert!(a.agrees_with(&c));
    }

    #[test]
    fn derivative_rules() {
        let j1 = faber_jm(1, 3).unwrap();
        let dj = j1.derivative(1);
        assert_eq!(dj.c(-1), rat(-1));
        assert_eq!(dj.c(1), rat(196884));
        assert_eq!(dj.c(2), rat(2 * 21493760));

        let one = QSeries::one(5).unwrap();
        assert!(one.derivative(1).is_zero());

        let q3 = q(3, 6);
        assert_eq!(q3.derivative(2).c(3), rat(9));
    }

    #[test]
    fn leibniz_rule() {
        let f = eisenstein(4, 15).unwrap();
        let g = delta(15).unwrap();
        let lhs = f.mul(&g).unwrap().derivative(1);
        let rhs = f
            .derivative(1)
            .mul(&g)
            .unwrap()
            .add(&f.mul(&g.derivative(1)).unwrap())
            .unwrap();
        assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn u_operator_reindexes() {
        let th = theta(17).unwrap();
        let u = th.u_operator(4).unwrap();
        assert_eq!(u.c(0), rat(1));
        assert_eq!(u.c(1), rat(2)); // q^4 coefficient of theta
        assert_eq!(u.c(2), rat(0));

        let j1 = faber_jm(1, 5).unwrap();
        let u2 = j1.u_operator(2).unwrap();
        assert_eq!(u2.c(1), rat(21493760));

        // U_m o U_n = U_mn
        let s = j_function(37).unwrap();
        let a = s.u_operator(2).unwrap().u_operator(3).unwrap();
        let b = s.u_operator(6).unwrap();
        assert!(a.agrees_with(&b));
    }

    #[test]
    fn bracket_nu0_is_product() {
        let f = eisenstein(4, 10).unwrap();
        let g = eisenstein(6, 10).unwrap();
        let br = rc_bracket(&f, HalfInt::from_int(4), &g, HalfInt::from_int(6), 0).unwrap();
        assert!(br.agrees_with(&f.mul(&g).unwrap()));
    }

    #[test]
    fn bracket_nu1_weight_one() {
        // For k = l = 1 the nu = 1 sum collapses to f Dg - Df g
        // (the (-1)^r sign rides on the f-derivative index r).
        let f = eisenstein(4, 10).unwrap();
        let g = delta(10).unwrap();
        let br = rc_bracket(&f, HalfInt::from_int(1), &g, HalfInt::from_int(1), 1).unwrap();
        let expect = f
            .mul(&g.derivative(1))
            .unwrap()
            .sub(&f.derivative(1).mul(&g).unwrap())
            .unwrap();
        assert!(br.agrees_with(&expect));
    }

    #[test]
    fn bracket_antisymmetry() {
        let f = eisenstein(4, 12).unwrap();
        let g = eisenstein(4, 12).unwrap().pow(2).unwrap();
        for nu in 0..4 {
            let a = rc_bracket(&f, HalfInt::halves(3), &g, HalfInt::halves(3), nu).unwrap();
            let b = rc_bracket(&g, HalfInt::halves(3), &f, HalfInt::halves(3), nu).unwrap();
            let b = if nu % 2 == 1 { b.neg() } else { b };
            assert!(a.agrees_with(&b), "nu = {nu}");
        }
    }

    #[test]
    fn serde_roundtrip() {
        let j1 = faber_jm(1, 4).unwrap();
        let text = serde_json::to_string(&j1).unwrap();
        assert!(text.contains("\"valuation\":-1"));
        let back: QSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, j1);

        let half = QSeries::monomial(2, BigRational::new(BigInt::from(3), BigInt::from(2)), 5).unwrap();
        let text = serde_json::to_string(&half).unwrap();
        assert!(text.contains("3/2"));
        let back: QSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, half);
    }

    #[test]
    fn precision_shrinks_under_hecke_and_u() {
        let j = j_function(100).unwrap();
        let t3 = j.hecke(0, 3).unwrap();
        assert_eq!(t3.precision(), 33);
        assert_eq!(t3.valuation(), -3);
        let u4 = j.u_operator(4).unwrap();
        assert_eq!(u4.precision(), 25);
    }
}
