//! Weakly holomorphic Poincare series `P_{2k,-h}`.
//!
//! For the cusp-free weights `2k in {4, 6, 8, 10, 14}` the series have exact
//! closed forms (`E_4 (j - 984)` and friends) and the Hecke formula
//! `P_{2k,-h} = h^(1-2k) T_h P_{2k,-1}` produces every index exactly.
//!
//! For weights with cusp forms, the series splits as an exact weakly
//! holomorphic part (gauge: principal part `q^(-h)`, constant term 0, and
//! vanishing `q^1..q^d` coefficients) plus a cusp component whose `d_{2k}`
//! coordinates are the only transcendental data. Those coordinates come from
//! the classical Petersson coefficient formula: a Kloosterman-Bessel series
//! with `I`-Bessel kernels for negative index (`J` for positive index, used
//! by the Petersson-norm route in `lfunc`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rug::ops::Pow;
use rug::Float;

use crate::modforms::{dim_cusp, full_basis, hecke_matrix, miller_basis};
use crate::qseries::{self, HalfInt, QSeries};
use crate::weilrep::kloosterman_int;
use crate::{Error, Result};

/// A weakly holomorphic Poincare series of weight `2k` and index `-h <= 0`:
/// exact part plus cusp-component coordinates in the eigenform basis.
#[derive(Debug, Clone)]
pub struct PoincareForm {
    pub weight: i64,
    /// `-h <= 0`.
    pub index: i64,
    pub exact_part: QSeries,
    /// Coordinates of the cusp component in the (numeric) eigenform basis.
    pub cusp_coeffs: Vec<Float>,
    /// Eigenform expansions `c_{f_j}(n)` for `n = 1..=precision-1`, one row
    /// per cusp dimension (`eigen_basis[j][n-1]` is `c_{f_j}(n)`).
    pub eigen_basis: Vec<Vec<Float>>,
    /// Cutoff-halving drift of each cusp coordinate, for error reporting.
    pub cusp_drift: Vec<f64>,
}

impl PoincareForm {
    /// Full coefficient `c(n)`: exact part plus the cusp combination.
    pub fn coefficient(&self, n: i64, prec: u32) -> Result<Float> {
        let mut acc = crate::mp::float_from_rational(&self.exact_part.coeff(n)?, prec);
        for (beta, row) in self.cusp_coeffs.iter().zip(&self.eigen_basis) {
            if n >= 1 && (n as usize) <= row.len() {
                acc += Float::with_val(prec, beta * &row[n as usize - 1]);
            }
        }
        Ok(acc)
    }
}

// P_(k,-1) products are reused heavily by the relation checks; cache the
// widest expansion computed so far per weight.
static BASE_CACHE: std::sync::Mutex<Option<std::collections::HashMap<i64, QSeries>>> =
    std::sync::Mutex::new(None);

/// Closed form of `P_{2k,-1}` for the cusp-free weights (`j` here is the
/// Klein invariant with constant term 744 included).
fn base_series(weight: i64, precision: i64) -> Result<QSeries> {
    if !matches!(weight, 4 | 6 | 8 | 10 | 14) {
        return Err(Error::BadWeight(weight));
    }
    let mut guard = BASE_CACHE.lock().unwrap();
    let cache = guard.get_or_insert_with(std::collections::HashMap::new);
    if let Some(s) = cache.get(&weight) {
        if s.precision() >= precision {
            return s.truncated(precision);
        }
    }
    let grown = (precision.max(1) as u64).next_power_of_two().max(64) as i64;
    let p = grown + 2;
    let j = qseries::j_function(p)?;
    let shift = |c: i64| -> Result<QSeries> {
        j.sub(&QSeries::monomial(0, BigRational::from_integer(BigInt::from(c)), p)?)
    };
    let e4 = qseries::eisenstein(4, p)?;
    let e6 = qseries::eisenstein(6, p)?;
    let f = match weight {
        4 => e4.mul(&shift(984)?)?,
        6 => e6.mul(&shift(240)?)?,
        8 => e4.pow(2)?.mul(&shift(1224)?)?,
        10 => e4.mul(&e6)?.mul(&shift(480)?)?,
        14 => e4.pow(2)?.mul(&e6)?.mul(&shift(720)?)?,
        _ => unreachable!(),
    };
    let f = f.truncated(grown)?;
    cache.insert(weight, f.clone());
    f.truncated(precision)
}

/// Exact `P_{2k,-h}` for weights without cusp forms, via the Hecke formula
/// `P_{2k,-h} = h^(1-2k) T_h P_{2k,-1}`.
pub fn poincare_exact(weight: i64, h: i64, precision: i64) -> Result<PoincareForm> {
    if dim_cusp(weight) != 0 || !matches!(weight, 4 | 6 | 8 | 10 | 14) {
        return Err(Error::BadWeight(weight));
    }
    assert!(h >= 1);
    let exact_part = if h == 1 {
        base_series(weight, precision)?
    } else {
        let base = base_series(weight, h * precision.max(2) + h)?;
        let scale = BigRational::new(BigInt::one(), BigInt::from(h).pow(weight as u32 - 1));
        base.hecke(weight, h)?.scaled(&scale).truncated(precision)?
    };
    // principal part q^(-h), zero constant term
    debug_assert_eq!(exact_part.coeff(-h).unwrap(), BigRational::one());
    debug_assert!(exact_part.coeff(0).unwrap().is_zero());
    Ok(PoincareForm {
        weight,
        index: -h,
        exact_part,
        cusp_coeffs: Vec::new(),
        eigen_basis: Vec::new(),
        cusp_drift: Vec::new(),
    })
}

/// The unique weight-`w` weakly holomorphic form `q^(-h) + O(q^(d+1))` with
/// vanishing constant and `q^1..q^d` coefficients (the exact-part gauge).
pub fn duke_jenkins_element(weight: i64, h: i64, precision: i64) -> Result<QSeries> {
    assert!(h >= 1);
    let d = dim_cusp(weight) as i64;
    let big_weight = weight + 12 * h;
    let basis = full_basis(big_weight, precision + h + 1)?;
    debug_assert_eq!(basis.len() as i64, d + h + 1);
    let delta_inv_h = qseries::delta(precision + 2 * h + 2)?
        .pow(h as u32)?
        .invert()?;
    let forms: Vec<QSeries> = basis
        .iter()
        .map(|b| b.mul(&delta_inv_h))
        .collect::<Result<_>>()?;
    // forms[i] = q^(i-h) + tails; clear the slots above the pivot -h.
    let mut f = forms[0].clone();
    for t in (-h + 1)..=d {
        let c = f.coeff(t)?;
        if !c.is_zero() {
            f = f.sub(&forms[(t + h) as usize].scaled(&c))?;
        }
    }
    f.truncated(precision)
}

/// One Kloosterman-Bessel sum with its audit data.
#[derive(Debug, Clone)]
pub struct KbSum {
    pub value: Float,
    /// Relative change when the cutoff is halved (measures convergence).
    pub drift: f64,
    /// Crude bound on the truncated tail.
    pub tail_bound: f64,
}

/// Petersson-formula coefficient sum for the Poincare series of weight `w`
/// and index `m != 0` at coefficient `n >= 1` (without the `delta_{mn}`
/// term): `2 pi (-1)^(w/2) (n/|m|)^((w-1)/2)
///         sum_{c=1}^cutoff S(m,n;c)/c B_{w-1}(4 pi sqrt(|m| n)/c)`,
/// where `B = J` for `m > 0` and `B = I` for `m < 0`.
pub fn kloosterman_bessel_sum(
    w: i64,
    m: i64,
    n: i64,
    cutoff: i64,
    prec: u32,
) -> Result<KbSum> {
    assert!(m != 0 && n >= 1 && cutoff >= 2);
    let kind = if m > 0 { BesselKind::J } else { BesselKind::I };
    let order = HalfInt::from_int(w - 1);
    let x = {
        let t = Float::with_val(prec, (m.abs() * n) as u64).sqrt();
        Float::with_val(prec, 4) * crate::mp::pi(prec) * t
    };
    let mut acc = Float::new(prec);
    let mut at_half = Float::new(prec);
    for c in 1..=cutoff {
        let s = kloosterman_int(m, n, c, prec)?;
        if s.is_zero() {
            continue;
        }
        let arg = Float::with_val(prec, &x / Float::with_val(prec, c));
        let b = bessel(kind, order, &arg, prec)?;
        acc += s * b / Float::with_val(prec, c);
        if c == cutoff / 2 {
            at_half = acc.clone();
        }
    }
    let prefactor = {
        let ratio = Float::with_val(prec, n) / Float::with_val(prec, m.abs() as u64);
        let exponent = Float::with_val(prec, w - 1) / 2u32;
        let sign = if (w / 2) % 2 == 0 { 1 } else { -1 };
        crate::mp::two_pi(prec) * ratio.pow(exponent) * Float::with_val(prec, sign)
    };
    let value = Float::with_val(prec, &prefactor * &acc);
    let scale = value.clone().abs().to_f64().max(1e-300);
    let drift = (Float::with_val(prec, &acc - &at_half).abs().to_f64()
        * prefactor.clone().abs().to_f64())
        / scale;
    // tail: |S| <= phi(c) <= c and B_(w-1)(y) <= (y/2)^(w-1)/(w-1)! e^y for
    // the arguments y = x/c <= x/cutoff in play
    let tail_bound = {
        let xf = x.to_f64();
        let yc = xf / cutoff as f64;
        let nu = (w - 1) as f64;
        // sum_{c > C} c (x/2c)^(w-1)/(w-1)! e^(x/c)
        //   <= e^(x/C) (x/2C)^(w-1)/(w-1)! * C^2/(w-3)
        let log_lead = nu * (yc / 2.0).ln() + yc - ln_factorial(w - 1);
        let log_tail = log_lead + 2.0 * (cutoff as f64).ln() - ((w - 3) as f64).ln();
        prefactor.clone().abs().to_f64() * log_tail.exp()
    };
    if tail_bound > 1e-10 * scale {
        return Err(Error::NumericInstability(format!(
            "Kloosterman-Bessel tail {tail_bound:.3e} too large at cutoff {cutoff}"
        )));
    }
    Ok(KbSum {
        value,
        drift,
        tail_bound,
    })
}

fn ln_factorial(n: i64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Numeric eigenform coefficient rows for `S_weight` (supported for
/// `dim <= 2`), normalized so `c_f(1) = 1`.
fn numeric_eigenbasis(weight: i64, precision: i64, prec: u32) -> Result<Vec<Vec<Float>>> {
    let d = dim_cusp(weight);
    match d {
        0 => Ok(Vec::new()),
        1 => {
            let f = miller_basis(weight, precision)?.basis.remove(0);
            Ok(vec![(1..precision)
                .map(|n| crate::mp::float_from_rational(&f.c(n), prec))
                .collect()])
        }
        2 => {
            // Eigenvectors of the T_2 matrix in the Miller basis: eigenvalues
            // (tr +- sqrt(tr^2 - 4 det))/2, eigenform = b1 + t b2 with
            // t = (lambda - m11)/m12 in coefficient coordinates.
            let mat = hecke_matrix(weight, 2)?;
            let to_f = |r: &BigRational| crate::mp::float_from_rational(r, prec);
            let (m11, m12) = (to_f(&mat[0][0]), to_f(&mat[0][1]));
            let (m21, m22) = (to_f(&mat[1][0]), to_f(&mat[1][1]));
            let tr = Float::with_val(prec, &m11 + &m22);
            let det = Float::with_val(prec, &m11 * &m22) - Float::with_val(prec, &m12 * &m21);
            let disc = (tr.clone().square() - Float::with_val(prec, 4) * det).sqrt();
            let basis = miller_basis(weight, precision)?.basis;
            if m21.is_zero() {
                return Err(Error::NumericInstability(
                    "degenerate Hecke matrix in eigenbasis solve".into(),
                ));
            }
            let _ = &m12;
            let mut rows = Vec::new();
            for sign in [1i32, -1] {
                let lambda = (tr.clone() + disc.clone() * sign) / 2u32;
                // eigen-coordinates (1, t): the normalized eigenform is
                // g = b_1 + t b_2 with m11 + m21 t = lambda
                let t = Float::with_val(prec, (lambda - &m11) / &m21);
                let row: Vec<Float> = (1..precision)
                    .map(|n| {
                        let b1 = crate::mp::float_from_rational(&basis[0].c(n), prec);
                        let b2 = crate::mp::float_from_rational(&basis[1].c(n), prec);
                        b1 + Float::with_val(prec, &t * &b2)
                    })
                    .collect();
                rows.push(row);
            }
            Ok(rows)
        }
        _ => Err(Error::BadArgument(format!(
            "eigenform basis for dim {d} cusp space not supported"
        ))),
    }
}

/// Poincare series for weights with cusp forms (`weight >= 12` even), or
/// `h = 0` which is the Eisenstein series for any even weight >= 4.
pub fn poincare_cuspful(
    weight: i64,
    h: i64,
    precision: i64,
    cutoff_c: i64,
    prec: u32,
) -> Result<PoincareForm> {
    assert!(h >= 0);
    if h == 0 {
        let d = dim_cusp(weight);
        return Ok(PoincareForm {
            weight,
            index: 0,
            exact_part: qseries::eisenstein(weight, precision)?,
            cusp_coeffs: vec![Float::new(prec); d],
            eigen_basis: numeric_eigenbasis(weight, precision, prec)?,
            cusp_drift: vec![0.0; d],
        });
    }
    if weight < 12 || weight % 2 != 0 {
        return Err(Error::BadWeight(weight));
    }
    let d = dim_cusp(weight);
    let exact_part = duke_jenkins_element(weight, h, precision)?;
    let eigen_basis = numeric_eigenbasis(weight, precision, prec)?;
    // Match the Kloosterman-Bessel coefficients on n = 1..=d. The exact part
    // vanishes there, so the cusp combination carries them alone.
    let mut targets = Vec::with_capacity(d);
    let mut drifts = Vec::with_capacity(d);
    for n in 1..=d as i64 {
        let kb = kloosterman_bessel_sum(weight, -h, n, cutoff_c, prec)?;
        targets.push(kb.value);
        drifts.push(kb.drift);
    }
    let cusp_coeffs = match d {
        0 => Vec::new(),
        1 => vec![targets.remove(0)], // c_f(1) = 1
        2 => {
            // solve [f1(1) f2(1); f1(2) f2(2)] beta = targets
            let a = &eigen_basis[0];
            let b = &eigen_basis[1];
            let det = Float::with_val(prec, &a[0] * &b[1]) - Float::with_val(prec, &b[0] * &a[1]);
            let beta0 = (Float::with_val(prec, &targets[0] * &b[1])
                - Float::with_val(prec, &b[0] * &targets[1]))
                / det.clone();
            let beta1 = (Float::with_val(prec, &a[0] * &targets[1])
                - Float::with_val(prec, &targets[0] * &a[1]))
                / det;
            vec![beta0, beta1]
        }
        _ => {
            return Err(Error::BadArgument(format!(
                "cusp dimension {d} not supported"
            )))
        }
    };
    Ok(PoincareForm {
        weight,
        index: -h,
        exact_part,
        cusp_coeffs,
        eigen_basis,
        cusp_drift: drifts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    J,
    I,
}

/// Bessel `J_nu` / `I_nu` by direct power-series summation, for `nu >= 0`
/// integer or half-integer. Errors when `x` is outside the regime where the
/// alternating `J` series can deliver the requested precision.
pub fn bessel(kind: BesselKind, order: HalfInt, x: &Float, prec: u32) -> Result<Float> {
    if order.0 < 0 {
        return Err(Error::BadArgument("bessel order must be >= 0".into()));
    }
    let xf = x.to_f64();
    if !(xf > 0.0) {
        return Err(Error::BadArgument(format!("bessel argument {xf} must be positive")));
    }
    // J loses ~x log2(e) bits to cancellation; I is a positive series.
    let cancel_bits = if kind == BesselKind::J {
        (xf * std::f64::consts::LOG2_E).ceil() as u32
    } else {
        0
    };
    if cancel_bits > 8 * prec {
        return Err(Error::NumericInstability(format!(
            "bessel series at x = {xf} needs more than the working precision"
        )));
    }
    let work = prec + cancel_bits + 64;
    let nu = Float::with_val(work, order.0) / 2u32;
    let half_x = Float::with_val(work, x) / 2u32;
    let x2_over_4 = half_x.clone().square();
    let mut term = half_x.pow(&nu) / Float::with_val(work, &nu + Float::with_val(work, 1)).gamma();
    let mut acc = term.clone();
    let mut j = 1u64;
    loop {
        let denom = Float::with_val(work, j) * Float::with_val(work, &nu + Float::with_val(work, j));
        term = term * &x2_over_4 / denom;
        if kind == BesselKind::J {
            term = -term;
        }
        acc += &term;
        // past the hump, terms decay monotonically
        let hump_passed = (j as f64) * ((order.0 as f64) / 2.0 + j as f64) > xf * xf / 4.0;
        if hump_passed {
            let scale = acc.clone().abs().max(&Float::with_val(work, 1));
            let bound = scale >> (work - 16);
            if term.clone().abs() < bound {
                break;
            }
        }
        j += 1;
        if j > 100_000 {
            return Err(Error::NumericInstability(
                "bessel series failed to converge".into(),
            ));
        }
    }
    Ok(Float::with_val(prec, acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::pi;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn bessel_i0_against_independent_series() {
        // direct series oracle at higher precision: I_0(1) = sum 1/(4^k k!^2)
        let prec = 320;
        let mut oracle = Float::new(prec);
        let mut term = Float::with_val(prec, 1);
        for k in 1..60u32 {
            oracle += &term;
            term = term / Float::with_val(prec, 4 * k * k);
        }
        let got = bessel(BesselKind::I, HalfInt::from_int(0), &Float::with_val(prec, 1), 256).unwrap();
        let diff = Float::with_val(prec, &got - &oracle).abs().to_f64();
        assert!(diff < 1e-70, "diff = {diff}");
        assert!((got.to_f64() - 1.2660658777520084).abs() < 1e-15);
    }

    #[test]
    fn bessel_half_integer_closed_forms() {
        // J_(1/2)(x) = sqrt(2/(pi x)) sin x, I_(1/2)(x) = sqrt(2/(pi x)) sinh x
        let prec = 192;
        for xv in [0.7f64, 1.7, 6.3] {
            let x = Float::with_val(prec, xv);
            let scale = (Float::with_val(prec, 2) / (pi(prec) * x.clone())).sqrt();
            let j = bessel(BesselKind::J, HalfInt::halves(1), &x, prec).unwrap();
            let expect = scale.clone() * x.clone().sin();
            assert!(Float::with_val(prec, &j - &expect).abs().to_f64() < 1e-40);
            let i = bessel(BesselKind::I, HalfInt::halves(1), &x, prec).unwrap();
            let expect = scale * x.clone().sinh();
            assert!(Float::with_val(prec, &i - &expect).abs().to_f64() < 1e-40);
        }
    }

    #[test]
    fn bessel_small_argument_leading_term() {
        // I_11(x) ~ (x/2)^11 / 11! as x -> 0
        let prec = 256;
        let x = Float::with_val(prec, 1e-3);
        let i = bessel(BesselKind::I, HalfInt::from_int(11), &x, prec).unwrap();
        let lead = Float::with_val(prec, &x / 2u32).pow(11u32)
            / crate::mp::float_from_bigint(&crate::arith::factorial(11), prec);
        let ratio = Float::with_val(prec, &i / &lead).to_f64();
        assert!((ratio - 1.0).abs() < 1e-6, "ratio = {ratio}");
    }

    #[test]
    fn bessel_rejects_bad_regime() {
        let x = Float::with_val(64, 1000);
        assert!(bessel(BesselKind::J, HalfInt::from_int(0), &x, 64).is_err());
    }

    #[test]
    fn exact_poincare_base_forms() {
        // spot checks of the closed forms: principal part and constant term
        for w in [4i64, 6, 8, 10, 14] {
            let p = poincare_exact(w, 1, 12).unwrap();
            assert_eq!(p.exact_part.c(-1), rat(1), "weight {w}");
            assert_eq!(p.exact_part.c(0), rat(0), "weight {w}");
            assert!(p.cusp_coeffs.is_empty());
        }
        assert!(poincare_exact(12, 1, 8).is_err());
    }

    #[test]
    fn hecke_consistency_of_exact_poincare() {
        // h^(1-k) T_h P_(k,-1) keeps principal part q^(-h), constant 0
        for w in [4i64, 6, 8, 10, 14] {
            for h in 2..=6 {
                let p = poincare_exact(w, h, 8).unwrap();
                assert_eq!(p.exact_part.c(-h), rat(1), "w={w} h={h}");
                for t in (-h + 1)..=0 {
                    assert_eq!(p.exact_part.c(t), rat(0), "w={w} h={h} t={t}");
                }
            }
        }
    }

    #[test]
    fn duke_jenkins_gauge() {
        let f = duke_jenkins_element(12, 1, 12).unwrap();
        assert_eq!(f.c(-1), rat(1));
        for t in 0..=1 {
            assert_eq!(f.c(t), rat(0));
        }
        // weight 12, h = 1: the paper's displayed product
        // Delta (j_2 + 24 j_1 + 324) has exactly this gauge.
        let p = 12;
        let inner = qseries::faber_jm(2, p + 2)
            .unwrap()
            .add(&qseries::faber_jm(1, p + 2).unwrap().scaled(&rat(24)))
            .unwrap()
            .add(&QSeries::monomial(0, rat(324), p + 2).unwrap())
            .unwrap();
        let product = qseries::delta(p + 3).unwrap().mul(&inner).unwrap();
        assert!(f.agrees_with(&product), "differ at {:?}", f.first_difference(&product));

        let g = duke_jenkins_element(16, 2, 10).unwrap();
        assert_eq!(g.c(-2), rat(1));
        for t in -1..=1 {
            assert_eq!(g.c(t), rat(0), "t = {t}");
        }
        let h = duke_jenkins_element(24, 1, 10).unwrap();
        assert_eq!(h.c(-1), rat(1));
        for t in 0..=2 {
            assert_eq!(h.c(t), rat(0), "t = {t}");
        }
    }

    #[test]
    fn alpha_coefficient_of_p12_minus1() {
        // c_(12,-1)(1) = 1842.894... (also the Delta-coordinate of the cusp
        // component in the decomposition above)
        let p = poincare_cuspful(12, 1, 8, 1000, 192).unwrap();
        assert_eq!(p.cusp_coeffs.len(), 1);
        let alpha = p.cusp_coeffs[0].to_f64();
        assert!((alpha - 1842.894).abs() < 1e-3, "alpha = {alpha}");
        assert!(p.cusp_drift[0] < 1e-8);
        // full coefficient at n = 1 equals alpha; at n = 2 it is
        // exact(2) + alpha tau(2)
        let c1 = p.coefficient(1, 192).unwrap().to_f64();
        assert!((c1 - alpha).abs() < 1e-12);
        let c2 = p.coefficient(2, 192).unwrap().to_f64();
        let expect = p.exact_part.c(2).to_integer().to_string().parse::<f64>().unwrap()
            + alpha * -24.0;
        assert!((c2 - expect).abs() < 1e-9);
    }

    #[test]
    fn eisenstein_index_zero() {
        let p = poincare_cuspful(12, 0, 10, 100, 64).unwrap();
        assert!(p
            .exact_part
            .agrees_with(&qseries::eisenstein(12, 10).unwrap()));
        assert_eq!(p.cusp_coeffs.len(), 1);
        assert!(p.cusp_coeffs[0].is_zero());
    }
}
