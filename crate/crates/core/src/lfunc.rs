//! Symmetrized shifted convolution L-values, Petersson norms, and the
//! modified traces built from them.
//!
//! `Lhat(f, m; s) = sum c_f(n) c_f(n+m) (n^-s - (n+m)^-s)` converges only
//! conditionally, so two routes are kept side by side:
//!
//! - `direct`: Cesaro-averaged partial sums of the defining series (the
//!   weight-12 path runs on the fast tau pipeline);
//! - `invert`: solve the cusp-component decomposition of `G_{m,nu}` for
//!   `Lhat` using exact trace data, the Poincare cusp coordinates, and the
//!   Petersson norm.
//!
//! The norm itself comes from the holomorphic Poincare series route:
//! `||f||^2 = Gamma(2k-1)/(4pi)^(2k-1) / a_1` where `a_1` is the `q`
//! coefficient of `P_{2k,1}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rug::Float;
use serde::Serialize;

use crate::arith::{divisors, moebius, sigma1};
use crate::cmtrace::TraceStore;
use crate::modforms::{dim_cusp, eigenform};
use crate::poincare::{kloosterman_bessel_sum, poincare_cuspful, PoincareForm};
use crate::qseries;
use crate::relations::{g_series, p_poly_rat};
use crate::report::VerifyReport;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LMethod {
    DirectSum,
    Thm14Inversion,
}

/// A computed `Lhat(f, m; s)` value with provenance.
#[derive(Debug, Clone)]
pub struct LValueResult {
    /// Eigenform label, e.g. "Delta" for weight 12.
    pub f: String,
    pub m: i64,
    pub s: i64,
    pub value: Float,
    pub method: LMethod,
    pub reported_error: f64,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn eigenform_label(weight: i64) -> String {
    if weight == 12 {
        "Delta".to_string()
    } else {
        format!("f{weight}")
    }
}

/// Eigenform coefficients `c_f(1..=n)` as `f64` (exact tau pipeline for
/// weight 12; exact Miller expansion otherwise, capped at moderate cutoffs).
fn eigen_coeffs_f64(weight: i64, n: usize) -> Result<Vec<f64>> {
    if weight == 12 {
        let tau = qseries::tau::tau_cached(n);
        return Ok(tau[1..=n].iter().map(|&t| t as f64).collect());
    }
    if n > 40_000 {
        return Err(Error::BadArgument(format!(
            "direct summation for weight {weight} is limited to N <= 40000"
        )));
    }
    let f = eigenform(weight, n as i64 + 1)?;
    Ok((1..=n as i64)
        .map(|k| {
            let c = f.c(k);
            c.numer().to_string().parse::<f64>().unwrap() / c.denom().to_string().parse::<f64>().unwrap()
        })
        .collect())
}

/// Direct evaluation of `Lhat(f, m; 2k-1)` by Cesaro-averaged partial sums:
/// the last `sqrt(N)` partial sums are averaged and their spread is the
/// reported error.
pub fn shifted_conv_direct(weight: i64, m: i64, s: i64, n_cutoff: usize) -> Result<LValueResult> {
    assert!(m >= 0 && s >= 1);
    let label = eigenform_label(weight);
    if m == 0 {
        return Ok(LValueResult {
            f: label,
            m,
            s,
            value: Float::new(64),
            method: LMethod::DirectSum,
            reported_error: 0.0,
        });
    }
    let window = (n_cutoff as f64).sqrt() as usize;
    if n_cutoff < 4 * window.max(16) {
        return Err(Error::BadArgument(format!(
            "cutoff {n_cutoff} too small for the averaging window"
        )));
    }
    let coeffs = eigen_coeffs_f64(weight, n_cutoff + m as usize)?;
    let c = |n: usize| coeffs[n - 1];
    let mut partial = 0.0f64;
    let mut tail_sums = Vec::with_capacity(window);
    for n in 1..=n_cutoff {
        let term = c(n) * c(n + m as usize)
            * ((n as f64).powi(-(s as i32)) - ((n + m as usize) as f64).powi(-(s as i32)));
        partial += term;
        if n > n_cutoff - window {
            tail_sums.push(partial);
        }
    }
    let mean = tail_sums.iter().sum::<f64>() / tail_sums.len() as f64;
    let spread = tail_sums.iter().cloned().fold(f64::MIN, f64::max)
        - tail_sums.iter().cloned().fold(f64::MAX, f64::min);
    Ok(LValueResult {
        f: label,
        m,
        s,
        value: Float::with_val(64, mean),
        method: LMethod::DirectSum,
        reported_error: spread / 2.0,
    })
}

/// Petersson norm of the normalized eigenform of a one-dimensional cusp
/// space: `||f||^2 = Gamma(2k-1)/(4 pi)^(2k-1) / a_1(P_{2k,1})`, where the
/// Poincare coefficient `a_1` comes from the J-Bessel Kloosterman series.
/// Returns the norm and the relative cutoff-halving drift.
pub fn petersson_norm(weight: i64, cutoff: i64, prec: u32) -> Result<(Float, f64)> {
    if dim_cusp(weight) != 1 {
        return Err(Error::WrongDimension {
            weight,
            dim: dim_cusp(weight),
            expected: 1,
        });
    }
    let mut cutoff = cutoff.max(64);
    for _ in 0..4 {
        let kb = kloosterman_bessel_sum(weight, 1, 1, cutoff, prec)?;
        let a1 = Float::with_val(prec, 1 + kb.value.clone()); // delta_(1,1) term
        let gamma = Float::with_val(prec, weight as u32 - 1).gamma();
        let norm = gamma / crate::mp::four_pi_pow(prec, weight as u32 - 1) / a1.clone();
        let drift = kb.drift * kb.value.clone().abs().to_f64() / a1.to_f64().abs();
        if drift < 1e-8 {
            return Ok((norm, drift));
        }
        cutoff *= 2;
    }
    Err(Error::NumericInstability(format!(
        "Petersson norm did not stabilize below 1e-8 (weight {weight})"
    )))
}

/// Everything the Theorem-1.4 inversion produces for one `(m, nu)`.
pub struct Thm14Data {
    pub lhat: LValueResult,
    /// Exact eigencoefficient of the cusp projection of `G_{m,nu}`
    /// (e.g. `-82104/691` for `(m,nu) = (1,5)`).
    pub g_cusp_coefficient: BigRational,
    /// The Poincare forms `P_{2nu+2, -r(kappa-r)}` used, keyed by `h`.
    pub poincare: Vec<(i64, PoincareForm)>,
    pub norm: Float,
    pub norm_drift: f64,
}

/// Solve the decomposition
/// `G_{m,nu} = sum_{kappa|m} sum_{0<r<=kappa} r^(2nu+1) P_{2nu+2,-r(kappa-r)}
///             - (24 sigma_1(m) - Gamma(2nu+1)/(4pi)^(2nu+1)
///                Lhat(f, m; 2nu+1)/||f||^2) f`
/// for `Lhat`, on one-dimensional cusp spaces.
pub fn thm14_invert(
    store: &TraceStore,
    m: i64,
    nu: u32,
    cutoff: i64,
    prec: u32,
) -> Result<Thm14Data> {
    thm14_invert_with_precision(store, m, nu, cutoff, prec, 6)
}

/// As [`thm14_invert`], with the exact-series window extended through
/// `q^precision` (so downstream consumers can read Poincare coefficients
/// beyond the solve itself).
pub fn thm14_invert_with_precision(
    store: &TraceStore,
    m: i64,
    nu: u32,
    cutoff: i64,
    prec: u32,
    precision: i64,
) -> Result<Thm14Data> {
    let weight = 2 * nu as i64 + 2;
    if dim_cusp(weight) != 1 {
        return Err(Error::WrongDimension {
            weight,
            dim: dim_cusp(weight),
            expected: 1,
        });
    }
    let n_max = precision.max(3);
    let g = g_series(store, m, nu, n_max)?.series;

    // Exact layer: G minus the exact parts of the Poincare combination must
    // be an exact rational multiple of the eigenform.
    let mut exact_combo = qseries::QSeries::zero(-(m * m) / 4 - 1, n_max + 1)?;
    let mut poincare_forms: Vec<(i64, PoincareForm)> = Vec::new();
    let mut beta_total = Float::new(prec);
    let mut beta_err = 0.0f64;
    for kappa in divisors(m) {
        for r in 1..=kappa {
            let factor = rat(r).pow(2 * nu as i32 + 1);
            let h = r * (kappa - r);
            if r == kappa {
                let e = qseries::eisenstein(weight, n_max + 1)?;
                exact_combo = exact_combo.add(&e.scaled(&factor))?;
            } else {
                let p = match poincare_forms.iter().find(|(hh, _)| *hh == h) {
                    Some((_, p)) => p.clone(),
                    None => {
                        let p = poincare_cuspful(weight, h, n_max + 1, cutoff, prec)?;
                        poincare_forms.push((h, p.clone()));
                        p
                    }
                };
                exact_combo = exact_combo.add(&p.exact_part.scaled(&factor))?;
                let factor_f = crate::mp::float_from_rational(&factor, prec);
                beta_total += Float::with_val(prec, &p.cusp_coeffs[0] * &factor_f);
                beta_err += p.cusp_drift[0]
                    * p.cusp_coeffs[0].clone().abs().to_f64()
                    * factor_f.abs().to_f64();
            }
        }
    }
    let diff = g.sub(&exact_combo)?;
    // Structural consequence of the theorem: the difference is a cusp form,
    // i.e. proportional to the eigenform with exact rational coefficient.
    let f = eigenform(weight, n_max + 1)?;
    let gamma_exact = diff.coeff(1)?;
    let residue = diff.sub(&f.scaled(&gamma_exact))?;
    if !residue.is_zero() {
        return Err(Error::NumericInstability(format!(
            "G_({m},{nu}) minus its Poincare combination is not a multiple of \
             the eigenform (first stray term at q^{})",
            residue.order().unwrap()
        )));
    }

    let (norm, norm_drift) = petersson_norm(weight, cutoff, prec)?;
    // gamma_exact = beta_total - 24 sigma_1(m) + C Lhat / ||f||^2
    // with C = Gamma(2nu+1)/(4pi)^(2nu+1)
    let c_factor = Float::with_val(prec, 2 * nu + 1).gamma()
        / crate::mp::four_pi_pow(prec, 2 * nu + 1);
    let gamma_f = crate::mp::float_from_rational(&gamma_exact, prec);
    let lhat = (gamma_f - &beta_total + Float::with_val(prec, 24 * sigma1(m)))
        * norm.clone()
        / c_factor.clone();
    let reported_error = {
        let norm_f = norm.to_f64();
        let c_f = c_factor.to_f64();
        (beta_err * norm_f / c_f).abs() + lhat.to_f64().abs() * norm_drift
    };
    Ok(Thm14Data {
        lhat: LValueResult {
            f: eigenform_label(weight),
            m,
            s: 2 * nu as i64 + 1,
            value: lhat,
            method: LMethod::Thm14Inversion,
            reported_error,
        },
        g_cusp_coefficient: gamma_exact,
        poincare: poincare_forms,
        norm,
        norm_drift,
    })
}

/// The modified trace
/// `Tr_m(n; 2k) = Gamma(2k-1)/(4pi)^(2k-1) Lhat(f, m; 2k-1)/||f||^2 c_f(n)`
/// on one-dimensional cusp spaces.
pub fn tr_m(store: &TraceStore, n: i64, weight: i64, m: i64, cutoff: i64, prec: u32) -> Result<Float> {
    assert!(weight >= 12 && weight % 2 == 0);
    let nu = (weight / 2 - 1) as u32;
    let data = thm14_invert(store, m, nu, cutoff, prec)?;
    let c_factor = Float::with_val(prec, weight as u32 - 1).gamma()
        / crate::mp::four_pi_pow(prec, weight as u32 - 1);
    let cf = crate::mp::float_from_rational(&eigenform(weight, n + 1)?.coeff(n)?, prec);
    Ok(c_factor * data.lhat.value / data.norm * cf)
}

/// Corollary check at weight 12: reconstruct `Tr(n; 12) = tau(n)` from
/// `(1/(24 sigma_1(m))) (Tr_m(n;12) + (1/2) sum_r p_12(r,n) t_m(4n-r^2)
///  + sum_{kappa|m} sum_{0<r<=kappa} r^11 c_(12,-r(kappa-r))(n))`.
pub fn verify_cor_1_5(
    store: &TraceStore,
    m: i64,
    n_max: i64,
    cutoff: i64,
    prec: u32,
) -> Result<VerifyReport> {
    let identity = format!("cor15[m={m}]");
    let range = format!("n <= {n_max}");
    let weight = 12i64;
    let nu = 5u32;
    let data = thm14_invert_with_precision(store, m, nu, cutoff, prec, n_max)?;
    let c_factor = Float::with_val(prec, weight as u32 - 1).gamma()
        / crate::mp::four_pi_pow(prec, weight as u32 - 1);
    let trm_unit = Float::with_val(prec, &c_factor * &data.lhat.value) / &data.norm;
    let f = eigenform(weight, n_max + 1)?;
    let e12 = qseries::eisenstein(weight, n_max + 1)?;
    store.ensure_range(m as u32, 4 * n_max)?;
    for n in 1..=n_max {
        let tau_n = crate::mp::float_from_rational(&f.coeff(n)?, prec);
        // Tr_m(n; 12)
        let trm = Float::with_val(prec, &trm_unit * &tau_n);
        // (1/2) sum_r p_12(r, n) t_m(4n - r^2), exact
        let mut mid = BigRational::zero();
        let mut r = 0i64;
        while r * r <= 4 * n + m * m {
            let t = store.value(m as u32, 4 * n - r * r)?;
            if !t.is_zero() {
                let p = p_poly_rat(weight, &rat(r), &rat(n))?;
                let pm = if r == 0 {
                    p
                } else {
                    &p + &p_poly_rat(weight, &rat(-r), &rat(n))?
                };
                mid += pm * t;
            }
            r += 1;
        }
        mid /= rat(2);
        // sum over Poincare coefficients (exact part + cusp coordinate)
        let mut pc = Float::new(prec);
        for kappa in divisors(m) {
            for r in 1..=kappa {
                let factor = rat(r).pow(2 * nu as i32 + 1);
                let factor_f = crate::mp::float_from_rational(&factor, prec);
                if r == kappa {
                    let c = e12.coeff(n)?;
                    pc += factor_f * crate::mp::float_from_rational(&c, prec);
                } else {
                    let h = r * (kappa - r);
                    let p = data
                        .poincare
                        .iter()
                        .find(|(hh, _)| *hh == h)
                        .map(|(_, p)| p)
                        .expect("poincare form computed by inversion");
                    let c =
                        crate::mp::float_from_rational(&p.exact_part.coeff(n)?, prec)
                            + Float::with_val(prec, &p.cusp_coeffs[0] * &tau_n);
                    pc += factor_f * c;
                }
            }
        }
        let reconstructed = (trm + crate::mp::float_from_rational(&mid, prec) + pc)
            / Float::with_val(prec, 24 * sigma1(m));
        let tau_f = tau_n.to_f64();
        let rel = (reconstructed.to_f64() - tau_f).abs() / tau_f.abs().max(1.0);
        if rel >= 1e-4 {
            return Ok(VerifyReport::fail(
                identity,
                range,
                format!(
                    "n = {n}: reconstructed {:.6} vs tau(n) {tau_f} (rel {rel:.2e})",
                    reconstructed.to_f64()
                ),
            ));
        }
    }
    Ok(VerifyReport::pass(identity, range))
}

/// Mobius recombination consistency: summing the per-divisor plus-part
/// values `sum_{d|n} mu(d) Lhat(f, n/d)` over `n | m` telescopes back to
/// `Lhat(f, m)`. Checked across methods: inversion values on the left,
/// direct-sum values inside the recombination.
pub fn verify_moebius_recombination(
    store: &TraceStore,
    m: i64,
    direct_n: usize,
    cutoff: i64,
    prec: u32,
) -> Result<VerifyReport> {
    let identity = format!("moebius-recombination[m={m}]");
    let range = format!("direct N = {direct_n}");
    let inv = thm14_invert(store, m, 5, cutoff, prec)?;
    let mut recombined = 0.0f64;
    let mut err = inv.lhat.reported_error;
    for n in divisors(m) {
        for d in divisors(n) {
            let mu = moebius(d);
            if mu == 0 {
                continue;
            }
            let direct = shifted_conv_direct(12, n / d, 11, direct_n)?;
            recombined += mu as f64 * direct.value.to_f64();
            err += direct.reported_error;
        }
    }
    let diff = (recombined - inv.lhat.value.to_f64()).abs();
    let tol = (err + 0.5).max(1.0);
    Ok(if diff < tol {
        VerifyReport::pass(identity, range)
    } else {
        VerifyReport::fail(
            identity,
            range,
            format!("recombined {recombined:.3} vs inverted {:.3}", inv.lhat.value.to_f64()),
        )
    })
}
