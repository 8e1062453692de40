//! The Weil representation on the metaplectic double cover of `SL_2(Z)`,
//! with exact matrix values in the 8th cyclotomic field, plus the Kronecker
//! symbol, `epsilon_d`, and half-integral-weight Kloosterman sums.
//!
//! `rho` is generated by `rho(T) = diag(1, i)` and
//! `rho(S) = (1/sqrt(2i)) [[1, 1], [1, -1]]`; since `1/sqrt(2i) = (1-i)/2`,
//! every matrix entry lies in `Q(zeta_8)` exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rug::{Complex, Float};

use crate::arith::{ext_gcd, mod_inverse};
use crate::mp::UnityTable;
use crate::{Error, Result};

/// An element `a_0 + a_1 z + a_2 z^2 + a_3 z^3` of `Q(zeta_8)`,
/// `z = e^(i pi / 4)`, so `z^4 = -1` and `i = z^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zeta8(pub [BigRational; 4]);

impl Zeta8 {
    pub fn zero() -> Self {
        Zeta8(std::array::from_fn(|_| BigRational::zero()))
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        let mut z = Self::zero();
        z.0[0] = BigRational::from_integer(BigInt::from(n));
        z
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut z = Self::zero();
        z.0[0] = r;
        z
    }

    /// `i^k` for any integer `k`.
    pub fn i_pow(k: i64) -> Self {
        Self::zeta_pow(2 * k)
    }

    /// `zeta_8^k` for any integer `k`.
    pub fn zeta_pow(k: i64) -> Self {
        let k = k.rem_euclid(8);
        let mut z = Self::zero();
        let (idx, sign) = if k < 4 { (k, 1) } else { (k - 4, -1) };
        z.0[idx as usize] = BigRational::from_integer(BigInt::from(sign));
        z
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        Zeta8(std::array::from_fn(|k| &self.0[k] + &other.0[k]))
    }

    pub fn neg(&self) -> Self {
        Zeta8(std::array::from_fn(|k| -self.0[k].clone()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut acc = [
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
        ];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let k = i + j;
                if k < 4 {
                    acc[k] += a * b;
                } else {
                    acc[k - 4] -= a * b;
                }
            }
        }
        Zeta8(acc)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Zeta8(std::array::from_fn(|k| &self.0[k] * r))
    }

    /// Complex conjugation (`zeta -> zeta^-1`).
    pub fn conj(&self) -> Self {
        Zeta8([
            self.0[0].clone(),
            -self.0[3].clone(),
            -self.0[2].clone(),
            -self.0[1].clone(),
        ])
    }

    pub fn to_complex(&self, prec: u32) -> Complex {
        let half_sqrt2 = Float::with_val(prec, 2).sqrt() / 2u32;
        let zeta = Complex::with_val(prec, (half_sqrt2.clone(), half_sqrt2));
        let mut acc = Complex::with_val(prec, (0, 0));
        let mut zp = Complex::with_val(prec, (1, 0));
        for c in &self.0 {
            if !c.is_zero() {
                acc += zp.clone() * crate::mp::float_from_rational(c, prec);
            }
            zp *= &zeta;
        }
        acc
    }
}

/// A 2x2 matrix over `Q(zeta_8)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zeta8Matrix(pub [[Zeta8; 2]; 2]);

impl Zeta8Matrix {
    pub fn identity() -> Self {
        Zeta8Matrix([
            [Zeta8::one(), Zeta8::zero()],
            [Zeta8::zero(), Zeta8::one()],
        ])
    }

    pub fn mul(&self, other: &Self) -> Self {
        Zeta8Matrix(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                self.0[i][0]
                    .mul(&other.0[0][j])
                    .add(&self.0[i][1].mul(&other.0[1][j]))
            })
        }))
    }

    pub fn scale(&self, s: &Zeta8) -> Self {
        Zeta8Matrix(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j].mul(s))
        }))
    }

    pub fn neg(&self) -> Self {
        self.scale(&Zeta8::from_int(-1))
    }

    pub fn conj_transpose(&self) -> Self {
        Zeta8Matrix(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[j][i].conj())
        }))
    }

    /// Entrywise complex conjugate (the dual representation's value).
    pub fn conj(&self) -> Self {
        Zeta8Matrix(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j].conj())
        }))
    }

    pub fn is_unitary(&self) -> bool {
        self.mul(&self.conj_transpose()) == Self::identity()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Zeta8 {
        &self.0[i][j]
    }
}

/// `epsilon_d` for odd `d`: `1` when `d = 1 mod 4`, `i` when `d = 3 mod 4`.
/// Returned as the exponent `e` with `epsilon_d = i^e`.
pub fn epsilon_exponent(d: i64) -> Result<i64> {
    if d % 2 == 0 {
        return Err(Error::BadArgument(format!("epsilon_d needs odd d, got {d}")));
    }
    Ok(if d.rem_euclid(4) == 1 { 0 } else { 1 })
}

/// `epsilon_d` as an exact cyclotomic value.
pub fn epsilon_d(d: i64) -> Result<Zeta8> {
    Ok(Zeta8::i_pow(epsilon_exponent(d)?))
}

/// Extended Kronecker symbol `(a/n)` for arbitrary integers.
pub fn kronecker(a: i64, n: i64) -> i64 {
    if n == 0 {
        return i64::from(a == 1 || a == -1);
    }
    let mut result = 1i64;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    // factor out 2s: (a/2) depends on a mod 8
    let mut e2 = 0u32;
    while n % 2 == 0 {
        n /= 2;
        e2 += 1;
    }
    if e2 > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if e2 % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            result = -result;
        }
    }
    // Jacobi symbol (a/n) for odd n > 0
    let mut a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// An element of the metaplectic group over an integer matrix: the pair
/// `(gamma, branch)` where `branch = false` selects the principal branch of
/// `j(gamma, tau)^(1/2)` and `branch = true` its negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetaplecticElement {
    pub gamma: [[i64; 2]; 2],
    pub branch: bool,
}

impl MetaplecticElement {
    pub fn new(gamma: [[i64; 2]; 2]) -> Result<Self> {
        let det = gamma[0][0] * gamma[1][1] - gamma[0][1] * gamma[1][0];
        if det != 1 {
            return Err(Error::BadArgument(format!(
                "matrix {gamma:?} has determinant {det}, expected 1"
            )));
        }
        Ok(MetaplecticElement {
            gamma,
            branch: false,
        })
    }
}

/// The explicit Weil-representation formula for `c >= 0` (three cases by
/// `c mod 4`); `c < 0` and the lower branch reduce through the center.
pub fn rho_matrix(elt: &MetaplecticElement) -> Zeta8Matrix {
    let [[a, b], [c, d]] = elt.gamma;
    debug_assert_eq!(a * d - b * c, 1);
    let base = if c > 0 || (c == 0 && d > 0) {
        rho_closed_formula(a, b, c, d)
    } else if c < 0 {
        // (gamma, principal) = (-I, i) * (-gamma, principal) * (I, -1)
        rho_closed_formula(-a, -b, -c, -d).scale(&Zeta8::i_pow(1))
    } else {
        // c = 0, d < 0: gamma = -T^(-b), and the principal branches compose
        // without a flip.
        rho_closed_formula(-a, -b, 0, -d).scale(&Zeta8::i_pow(-1))
    };
    if elt.branch {
        base.neg()
    } else {
        base
    }
}

fn rho_closed_formula(a: i64, b: i64, c: i64, d: i64) -> Zeta8Matrix {
    debug_assert!(c > 0 || (c == 0 && d > 0));
    if c % 2 != 0 {
        // (epsilon_c / (1+i)) (a/c) [[1, i^cd], [i^ac, -i^((a+d)c)]]
        let eps = epsilon_exponent(c).expect("odd c");
        let inv_one_plus_i = Zeta8([
            BigRational::new(BigInt::one(), BigInt::from(2)),
            BigRational::zero(),
            BigRational::new(BigInt::from(-1), BigInt::from(2)),
            BigRational::zero(),
        ]);
        let pref = Zeta8::i_pow(eps)
            .mul(&inv_one_plus_i)
            .scale(&BigRational::from_integer(BigInt::from(kronecker(a, c))));
        Zeta8Matrix([
            [pref.clone(), pref.mul(&Zeta8::i_pow(c * d))],
            [
                pref.mul(&Zeta8::i_pow(a * c)),
                pref.mul(&Zeta8::i_pow((a + d) * c)).neg(),
            ],
        ])
    } else {
        // a is odd here; prefactor epsilon_a^(-1) (c/a)
        let eps = epsilon_exponent(a).expect("odd a");
        let pref = Zeta8::i_pow(-eps)
            .scale(&BigRational::from_integer(BigInt::from(kronecker(c, a))));
        let iab = pref.mul(&Zeta8::i_pow(a * b));
        if c.rem_euclid(4) == 2 {
            Zeta8Matrix([[Zeta8::zero(), iab], [pref, Zeta8::zero()]])
        } else {
            Zeta8Matrix([[pref, Zeta8::zero()], [Zeta8::zero(), iab]])
        }
    }
}

/// `rho` of the generators: `T`.
pub fn rho_t() -> Zeta8Matrix {
    Zeta8Matrix([
        [Zeta8::one(), Zeta8::zero()],
        [Zeta8::zero(), Zeta8::i_pow(1)],
    ])
}

/// `rho` of the generators: `S`.
pub fn rho_s() -> Zeta8Matrix {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let w = Zeta8([
        half.clone(),
        BigRational::zero(),
        -half.clone(),
        BigRational::zero(),
    ]); // 1/(1+i)
    Zeta8Matrix([
        [w.clone(), w.clone()],
        [w.clone(), w.neg()],
    ])
}

/// Decompose `gamma` as `(-I)^e T^(n_0) S T^(n_1) S ... S T^(n_k)`.
/// Returns `(e, [n_0, ..., n_k])`.
pub fn st_word(gamma: [[i64; 2]; 2]) -> (bool, Vec<i64>) {
    let mut g = gamma;
    let mut powers = Vec::new();
    loop {
        let [[a, b], [c, d]] = g;
        if c == 0 {
            // g = +-T^b
            if a > 0 {
                powers.push(b);
                return (false, powers);
            }
            powers.push(-b);
            return (true, powers);
        }
        let n = a.div_euclid(c);
        powers.push(n);
        // g <- S^(-1) T^(-n) g, which strictly reduces |c|
        let r = a - n * c;
        let bb = b - n * d;
        g = [[c, d], [-r, -bb]];
    }
}

/// Multiply out `rho` along the S,T word of `gamma` and fix the branch so
/// the result is `rho` of the *principal-branch* lift. Used as an
/// independent oracle for [`rho_matrix`].
pub fn rho_by_generators(gamma: [[i64; 2]; 2]) -> Zeta8Matrix {
    let (minus, powers) = st_word(gamma);
    let mut mat = if minus {
        Zeta8Matrix::identity().scale(&Zeta8::i_pow(-1)) // rho(-I tilde) = -i I
    } else {
        Zeta8Matrix::identity()
    };
    // phi of the accumulated word, tracked numerically at tau_0 to detect
    // which branch the generator product lands on.
    let prec = 64;
    let tau0 = Complex::with_val(prec, (0.31, 1.42));
    let mobius = |m: [[i64; 2]; 2], z: &Complex| -> Complex {
        let num = Complex::with_val(prec, z * Float::with_val(prec, m[0][0]))
            + Float::with_val(prec, m[0][1]);
        let den = Complex::with_val(prec, z * Float::with_val(prec, m[1][0]))
            + Float::with_val(prec, m[1][1]);
        num / den
    };
    // word elements left to right: (-I)^e, then T^(n0), S, T^(n1), S, ...
    let mut elements: Vec<[[i64; 2]; 2]> = Vec::new();
    let mut phis: Vec<u8> = Vec::new(); // 0: phi = 1, 1: phi = i, 2: phi = sqrt(tau)
    if minus {
        elements.push([[-1, 0], [0, -1]]);
        phis.push(1);
    }
    for (idx, &n) in powers.iter().enumerate() {
        if idx > 0 {
            elements.push([[0, -1], [1, 0]]);
            phis.push(2);
            mat = mat.mul(&rho_s());
        }
        elements.push([[1, n], [0, 1]]);
        phis.push(0);
        if n != 0 {
            let tn = Zeta8Matrix([
                [Zeta8::one(), Zeta8::zero()],
                [Zeta8::zero(), Zeta8::i_pow(n)],
            ]);
            mat = mat.mul(&tn);
        }
    }
    // phi_total(tau0) = prod phi_i(gamma_{i+1} ... gamma_k tau0)
    let mut phi_total = Complex::with_val(prec, (1, 0));
    for (i, kind) in phis.iter().enumerate() {
        let mut z = tau0.clone();
        for m in elements[i + 1..].iter().rev() {
            z = mobius(*m, &z);
        }
        match kind {
            0 => {}
            1 => phi_total *= Complex::with_val(prec, (0, 1)),
            _ => phi_total *= z.sqrt(),
        }
    }
    let [[_, _], [c, d]] = gamma;
    let j_principal = Complex::with_val(
        prec,
        (Float::with_val(prec, d), Float::with_val(prec, 0)),
    ) + tau0.clone() * Float::with_val(prec, c);
    let ratio = Complex::with_val(prec, phi_total / j_principal.sqrt());
    if ratio.real().to_f64() < 0.0 {
        mat.neg()
    } else {
        mat
    }
}

/// Half-integral-weight Kloosterman sum `K_k(m, n, c)` for `k = two_k / 2`
/// with `two_k` odd and `4 | c`:
/// `sum_{d (c)*} (c/d) epsilon_d^(2k) e((m dbar + n d) / c)`.
pub fn kloosterman_half(two_k: i64, m: i64, n: i64, c: i64, prec: u32) -> Result<Complex> {
    if two_k % 2 == 0 {
        return Err(Error::BadArgument(format!(
            "half-integral weight required, got {two_k}/2"
        )));
    }
    if c <= 0 || c % 4 != 0 {
        return Err(Error::BadArgument(format!("modulus {c} is not a positive multiple of 4")));
    }
    let table = UnityTable::new(c, prec);
    let mut acc = Complex::with_val(prec, (0, 0));
    for d in (1..c).step_by(2) {
        let Some(dbar) = mod_inverse(d, c) else {
            continue;
        };
        let kr = kronecker(c, d);
        if kr == 0 {
            continue;
        }
        let eps_pow = epsilon_exponent(d)? * two_k; // epsilon_d^(2k) = i^(e * 2k)
        let mut term = table.e(m * dbar + n * d).clone();
        match eps_pow.rem_euclid(4) {
            0 => {}
            1 => term.mul_i_mut(false),
            2 => term = -term,
            _ => term.mul_i_mut(true),
        }
        if kr < 0 {
            term = -term;
        }
        acc += term;
    }
    Ok(acc)
}

/// Classical integer-weight Kloosterman sum
/// `S(m, n; c) = sum_{d (c)*} e((m dbar + n d) / c)`, a real number.
pub fn kloosterman_int(m: i64, n: i64, c: i64, prec: u32) -> Result<Float> {
    if c < 1 {
        return Err(Error::BadArgument(format!("modulus {c} must be positive")));
    }
    if c == 1 {
        return Ok(Float::with_val(prec, 1));
    }
    let table = UnityTable::new(c, prec);
    let mut acc = Complex::with_val(prec, (0, 0));
    for d in 1..c {
        if let Some(dbar) = mod_inverse(d, c) {
            acc += table.e(m * dbar + n * d);
        }
    }
    Ok(acc.into_real_imag().0)
}

/// Check the proposition relating the Weil representation to `K_{3/2}`:
/// `(1/4)(1 + (4/c)) K_{3/2}(m, n, 4c) =
///  sum_{d (c)*} rho(gamma)_{alpha beta} e((m a + n d) / 4c)`.
///
/// Requires `m = -alpha mod 4`, `n = -beta mod 4`. Returns the absolute
/// residual between the two sides.
pub fn verify_weil_kloosterman(
    alpha: u8,
    beta: u8,
    m: i64,
    n: i64,
    c: i64,
    prec: u32,
) -> Result<f64> {
    assert!(alpha < 2 && beta < 2 && c > 0);
    if (m + alpha as i64).rem_euclid(4) != 0 || (n + beta as i64).rem_euclid(4) != 0 {
        return Err(Error::BadArgument(
            "need m = -alpha (mod 4) and n = -beta (mod 4)".into(),
        ));
    }
    let lhs = {
        let k = kloosterman_half(3, m, n, 4 * c, prec)?;
        let factor = Float::with_val(prec, 1 + kronecker(4, c)) / Float::with_val(prec, 4);
        k * factor
    };
    let table = UnityTable::new(4 * c, prec);
    let mut rhs = Complex::with_val(prec, (0, 0));
    for d in 0..c {
        if num_integer::gcd(d, c) != 1 && c != 1 {
            continue;
        }
        // complete (c, d) to an SL_2(Z) matrix via extended gcd
        let (g, x, y) = ext_gcd(d, c);
        debug_assert_eq!(g, 1);
        // a*d - b*c = 1 with a = x, b = -y
        let a = x;
        let b = -y;
        debug_assert_eq!(a * d - b * c, 1);
        let elt = MetaplecticElement::new([[a, b], [c, d]])?;
        let entry = rho_matrix(&elt).0[alpha as usize][beta as usize].to_complex(prec);
        rhs += entry * table.e(m * a + n * d);
    }
    let diff = Complex::with_val(prec, lhs - rhs);
    Ok(diff.abs().real().to_f64())
}

/// Exhaustive scan of the proposition over `alpha, beta in {0,1}`,
/// `|m|, |n| <= mn_max` (with the congruence conditions), `c <= c_max`.
/// Returns the maximum residual and the parameters attaining it.
pub fn weil_kloosterman_scan(mn_max: i64, c_max: i64, prec: u32) -> Result<(f64, String)> {
    use rayon::prelude::*;
    let mut cases = Vec::new();
    for alpha in 0..2u8 {
        for beta in 0..2u8 {
            for m in -mn_max..=mn_max {
                if (m + alpha as i64).rem_euclid(4) != 0 {
                    continue;
                }
                for n in -mn_max..=mn_max {
                    if (n + beta as i64).rem_euclid(4) != 0 {
                        continue;
                    }
                    for c in 1..=c_max {
                        cases.push((alpha, beta, m, n, c));
                    }
                }
            }
        }
    }
    let results: Result<Vec<(f64, (u8, u8, i64, i64, i64))>> = cases
        .par_iter()
        .map(|&(alpha, beta, m, n, c)| {
            verify_weil_kloosterman(alpha, beta, m, n, c, prec)
                .map(|r| (r, (alpha, beta, m, n, c)))
        })
        .collect();
    let results = results?;
    let (max_residual, worst) = results
        .into_iter()
        .fold((0.0f64, (0, 0, 0, 0, 0)), |acc, x| {
            if x.0 > acc.0 {
                x
            } else {
                acc
            }
        });
    Ok((
        max_residual,
        format!(
            "(alpha,beta,m,n,c)=({},{},{},{},{})",
            worst.0, worst.1, worst.2, worst.3, worst.4
        ),
    ))
}
