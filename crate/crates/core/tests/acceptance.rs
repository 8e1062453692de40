//! Acceptance suite: every numbered criterion below runs at its stated
//! tolerance and prints one PASS line. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use selberg_core::cmtrace::TraceStore;
use selberg_core::lfunc;
use selberg_core::poincare;
use selberg_core::qseries;
use selberg_core::relations;
use selberg_core::weilrep;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pass(criterion: &str, detail: &str) {
    println!("ACCEPTANCE PASS {criterion}: {detail}");
}

/// 1. Kaneko identities, exact for n <= 50, within the 2 minute budget.
#[test]
fn criterion_01_kaneko_identities() {
    let started = Instant::now();
    let store = TraceStore::in_memory();
    store.ensure_range(1, 200).unwrap();
    store.ensure_range(2, 200).unwrap();
    let j1 = qseries::faber_jm(1, 51).unwrap();
    for n in 1..=50i64 {
        let sum = |m: u32| {
            let mut acc = BigRational::zero();
            let mut r = 0i64;
            while r * r <= 4 * n + (m as i64).pow(2) {
                let t = store.value(m, 4 * n - r * r).unwrap();
                acc += if r == 0 { t } else { &t + &t };
                r += 1;
            }
            acc
        };
        assert_eq!(sum(1), BigRational::zero(), "sum_r t_1(4n-r^2) at n = {n}");
        let c1n = j1.c(n);
        assert_eq!(sum(2), rat(2 * n) * c1n, "sum_r t_2(4n-r^2) at n = {n}");
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 120,
        "runtime budget exceeded: {elapsed:?}"
    );
    pass(
        "criterion-01",
        &format!("Kaneko identities exact for n <= 50 in {elapsed:.2?}"),
    );
}

/// 2. sum_r r^2 t_1(4n - r^2) = -480 sigma_3(n) for n <= 50, exact.
#[test]
fn criterion_02_weighted_kaneko() {
    let store = TraceStore::in_memory();
    store.ensure_range(1, 200).unwrap();
    for n in 1..=50i64 {
        let mut acc = BigRational::zero();
        let mut r = 1i64;
        while r * r <= 4 * n + 1 {
            let t = store.value(1, 4 * n - r * r).unwrap();
            acc += rat(2 * r * r) * t;
            r += 1;
        }
        let expect = rat(-480) * BigRational::from_integer(selberg_core::arith::sigma(3, n));
        assert_eq!(acc, expect, "n = {n}");
    }
    pass("criterion-02", "sum_r r^2 t_1(4n-r^2) = -480 sigma_3(n), n <= 50");
}

/// 3. Eichler-Selberg for 2k in {12,16,18,20,22,26}, n <= 30, exact.
#[test]
fn criterion_03_eichler_selberg() {
    for weight in [12i64, 16, 18, 20, 22, 26] {
        let report = relations::verify_eichler_selberg(weight, 30).unwrap();
        assert!(report.passed(), "weight {weight}: {:?}", report.first_failure);
    }
    pass("criterion-03", "trace formula exact for 2k in {12,16,18,20,22,26}, n <= 30");
}

/// 4. Theorem on G_(m,0), m <= 8, through q^50, exact.
#[test]
fn criterion_04_derivative_relation() {
    let store = TraceStore::in_memory();
    for m in 1..=8i64 {
        let report = relations::verify_thm_1_2(&store, m, 50).unwrap();
        assert!(report.passed(), "m = {m}: {:?}", report.first_failure);
    }
    pass("criterion-04", "G_(m,0) derivative relation exact for m <= 8 through q^50");
}

/// 5. Poincare relation for nu in {1,2,3,4,6}, m <= 6, through q^30, exact.
#[test]
fn criterion_05_poincare_relation() {
    let store = TraceStore::in_memory();
    for nu in [1u32, 2, 3, 4, 6] {
        for m in 1..=6i64 {
            let report = relations::verify_thm_1_3(&store, m, nu, 30).unwrap();
            assert!(report.passed(), "m={m} nu={nu}: {:?}", report.first_failure);
        }
    }
    pass("criterion-05", "closed-form Poincare relation exact for nu in {1,2,3,4,6}, m <= 6, q^30");
}

/// 6. alpha = c_(12,-1)(1) = 1842.894 within 1e-3 at cutoff 1000, with
///    cutoff-doubling drift below 1e-8.
#[test]
fn criterion_06_alpha() {
    let started = Instant::now();
    let form = poincare::poincare_cuspful(12, 1, 4, 1000, 192).unwrap();
    let alpha = form.cusp_coeffs[0].to_f64();
    assert!((alpha - 1842.894).abs() < 1e-3, "alpha = {alpha}");
    assert!(form.cusp_drift[0] < 1e-8, "drift = {}", form.cusp_drift[0]);
    pass(
        "criterion-06",
        &format!(
            "alpha = {alpha:.6} (drift {:.1e}) in {:.2?}",
            form.cusp_drift[0],
            started.elapsed()
        ),
    );
}

/// 7. ||Delta||^2 = 1.0353e-6 within 1e-4 relative.
#[test]
fn criterion_07_petersson_norm() {
    let (norm, drift) = lfunc::petersson_norm(12, 1000, 192).unwrap();
    let v = norm.to_f64();
    let rel = (v - 1.0353e-6).abs() / 1.0353e-6;
    assert!(rel < 1e-4, "norm = {v:.8e}, rel err {rel:.2e}");
    pass(
        "criterion-07",
        &format!("||Delta||^2 = {v:.6e} (rel {rel:.1e}, drift {drift:.1e})"),
    );
}

/// 8. G_(1,5) = E_12 - (82104/691) Delta exactly; G_(2,5) matches the
///    decomposition P_(12,-1) + 2049 E_12 - (alpha - 1746612/691) Delta.
#[test]
fn criterion_08_g_series_decompositions() {
    let store = TraceStore::in_memory();
    let n_max = 12i64;

    let g15 = relations::g_series(&store, 1, 5, n_max).unwrap().series;
    let e12 = qseries::eisenstein(12, n_max + 1).unwrap();
    let delta = qseries::delta(n_max + 1).unwrap();
    let frac = BigRational::new(BigInt::from(-82104), BigInt::from(691));
    let expect = e12.add(&delta.scaled(&frac)).unwrap();
    assert!(g15.agrees_with(&expect), "G_(1,5) mismatch");

    // exact eigencoefficient from the inversion machinery
    let data = lfunc::thm14_invert(&store, 1, 5, 800, 192).unwrap();
    assert_eq!(
        data.g_cusp_coefficient,
        BigRational::new(BigInt::from(-82104), BigInt::from(691))
    );

    // G_(2,5): exact rearrangement (the alpha-terms cancel) ...
    let g25 = relations::g_series(&store, 2, 5, n_max).unwrap().series;
    let p12m1 = poincare::poincare_cuspful(12, 1, n_max + 1, 1000, 192).unwrap();
    let exact_rhs = p12m1
        .exact_part
        .add(&e12.scaled(&rat(2049)))
        .unwrap()
        .add(&delta.scaled(&BigRational::new(BigInt::from(1746612), BigInt::from(691))))
        .unwrap();
    assert!(
        g25.agrees_with(&exact_rhs),
        "exact G_(2,5) rearrangement fails at {:?}",
        g25.first_difference(&exact_rhs)
    );

    // ... and the stated numeric form with alpha inserted, to 1e-6.
    let alpha = p12m1.cusp_coeffs[0].to_f64();
    for n in 1..=n_max {
        let tau_n = delta.c(n).to_f64().unwrap();
        let lhs = g25.c(n).to_f64().unwrap();
        let rhs = p12m1.coefficient(n, 192).unwrap().to_f64()
            + 2049.0 * e12.c(n).to_f64().unwrap()
            - (alpha - 1746612.0 / 691.0) * tau_n;
        let scale = lhs.abs().max(1.0);
        assert!(
            ((lhs - rhs) / scale).abs() < 1e-6,
            "numeric G_(2,5) at n = {n}: {lhs} vs {rhs}"
        );
    }
    pass(
        "criterion-08",
        "G_(1,5) and G_(2,5) match the displayed decompositions (exact + 1e-6 numeric)",
    );
}

/// 9. Inversion gives Lhat(Delta,1;11) = -33.383 and Lhat(Delta,2;11) =
///    266.439 within 1e-2; direct summation at N = 10^6 agrees within 0.5.
#[test]
fn criterion_09_shifted_convolution_values() {
    let store = TraceStore::in_memory();
    let mut details = Vec::new();
    for (m, expect) in [(1i64, -33.383f64), (2, 266.439)] {
        let inv = lfunc::thm14_invert(&store, m, 5, 1000, 192).unwrap();
        let vi = inv.lhat.value.to_f64();
        assert!(
            (vi - expect).abs() < 1e-2,
            "inversion Lhat(Delta,{m};11) = {vi}, expected {expect}"
        );
        let direct = lfunc::shifted_conv_direct(12, m, 11, 1_000_000).unwrap();
        let vd = direct.value.to_f64();
        let diff = (vd - vi).abs();
        assert!(
            diff < 0.5,
            "direct {vd} vs inversion {vi} differ by {diff} (reported err {})",
            direct.reported_error
        );
        details.push(format!(
            "m={m}: invert {vi:.4}, direct {vd:.4} (achieved |diff| {diff:.3}, reported {:.3})",
            direct.reported_error
        ));
    }
    pass("criterion-09", &details.join("; "));
}

/// 10. Corollary at 2k = 12: reconstructed Tr(n;12) = tau(n) within 1e-4
///     relative for m in {1,2}, n <= 10.
#[test]
fn criterion_10_corollary_reconstruction() {
    let store = TraceStore::in_memory();
    for m in [1i64, 2] {
        let report = lfunc::verify_cor_1_5(&store, m, 10, 1000, 192).unwrap();
        assert!(report.passed(), "m = {m}: {:?}", report.first_failure);
    }
    pass("criterion-10", "Tr(n;12) reconstructed to tau(n) within 1e-4, m in {1,2}, n <= 10");
}

/// 11. Weil representation / Kloosterman proposition: exhaustive scan,
///     max residual < 1e-20 at 128-bit precision.
#[test]
fn criterion_11_weil_kloosterman_scan() {
    let (max_residual, worst) = weilrep::weil_kloosterman_scan(8, 50, 128).unwrap();
    assert!(max_residual < 1e-20, "max residual {max_residual:.3e} at {worst}");
    pass(
        "criterion-11",
        &format!("exhaustive scan max residual {max_residual:.2e} < 1e-20 (at {worst})"),
    );
}

/// 12a. Kernel identities: p(r,D,l) recursion, Q_(nu,0), identity (2.6).
#[test]
fn criterion_12a_kernel_identities() {
    // p(r,D,l) recursion vs definition, nu <= 6, l <= 6
    for nu in 1..=6u32 {
        for l in 0..=6u32 {
            for r in -5..=5i64 {
                for dv in [-7i64, -2, 0, 3, 9] {
                    let d = rat(dv);
                    let lhs = relations::p_rdl(nu, r, &d, l);
                    let c = BigRational::new(BigInt::from(r * r), BigInt::from(4))
                        * (BigRational::one()
                            + BigRational::new(
                                BigInt::from(4 * nu as i64 - 1),
                                BigInt::from(2 * l as i64 + 1),
                            ));
                    let rhs = -&d * relations::p_rdl(nu - 1, r, &d, l)
                        + c * relations::p_rdl(nu - 1, r, &d, l + 1);
                    assert_eq!(lhs, rhs, "recursion nu={nu} l={l} r={r} D={dv}");
                }
            }
        }
    }
    // Q_(nu,0)(n,r) = p_(2nu+2)(r, (r^2-n^2)/4), nu <= 6, |n|,|r| <= 12
    for nu in 0..=6u32 {
        for n in -12..=12i64 {
            for r in -12..=12i64 {
                let q = relations::q_poly(nu, 0, n, r).unwrap();
                let d = BigRational::new(BigInt::from(r * r - n * n), BigInt::from(4));
                let p = relations::p_poly_rat(2 * nu as i64 + 2, &rat(r), &d).unwrap();
                assert_eq!(q, p, "nu={nu} n={n} r={r}");
            }
        }
    }
    let report = relations::verify_identity_2_6(8, 12).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure);
    pass("criterion-12a", "p(r,D,l) recursion, Q_(nu,0) identity, and (2.6) scans exact");
}

/// 12b. Kloosterman identities K_(k+2) = K_k and the 3/2 <-> 1/2 duality,
///      to 1e-25, c <= 200.
#[test]
fn criterion_12b_kloosterman_identities() {
    use rayon::prelude::*;
    let prec = 160;
    let cs: Vec<i64> = (1..=50).map(|k| 4 * k).collect();
    let worst = cs
        .par_iter()
        .map(|&c| {
            let mut w = 0.0f64;
            for (m, n) in [(0i64, 0i64), (1, 1), (-3, 5), (7, -2), (12, 9), (-11, -13)] {
                let k32 = weilrep::kloosterman_half(3, m, n, c, prec).unwrap();
                let k72 = weilrep::kloosterman_half(7, m, n, c, prec).unwrap();
                let d1 = rug::Complex::with_val(prec, &k72 - &k32)
                    .abs()
                    .real()
                    .to_f64();
                let mut k12 = weilrep::kloosterman_half(1, -m, -n, c, prec).unwrap();
                k12.mul_i_mut(true);
                let d2 = rug::Complex::with_val(prec, &k32 - &k12)
                    .abs()
                    .real()
                    .to_f64();
                w = w.max(d1).max(d2);
            }
            w
        })
        .reduce(|| 0.0f64, f64::max);
    assert!(worst < 1e-25, "worst residual {worst:.3e}");
    pass(
        "criterion-12b",
        &format!("periodicity and duality residuals < 1e-25 (worst {worst:.2e}), c <= 200"),
    );
}

/// 12c. Kronecker-Hurwitz class number relation for n <= 200.
#[test]
fn criterion_12c_kronecker_hurwitz() {
    for n in 1..=200i64 {
        let mut lhs = BigRational::zero();
        let mut r = 0i64;
        while r * r <= 4 * n {
            let h = selberg_core::quadforms::hurwitz(4 * n - r * r).unwrap();
            lhs += if r == 0 { h } else { &h + &h };
            r += 1;
        }
        let rhs = 2 * selberg_core::arith::sigma1(n)
            - selberg_core::arith::divisors(n)
                .into_iter()
                .map(|d| d.min(n / d))
                .sum::<i64>();
        assert_eq!(lhs, rat(rhs), "n = {n}");
    }
    pass("criterion-12c", "Kronecker-Hurwitz relation exact for n <= 200");
}

/// 12d. CM trace integrality: err < 1e-4 for all d <= 2000, m <= 5.
#[test]
fn criterion_12d_trace_integrality() {
    let started = Instant::now();
    let store = TraceStore::in_memory();
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for m in 1..=5u32 {
        store.ensure_range(m, 2000).unwrap();
        for d in 1..=2000i64 {
            if matches!(d % 4, 0 | 3) {
                let rec = store.get(m, d).unwrap();
                assert!(
                    rec.err < 1e-4,
                    "t_{m}({d}) rounding error {} at {} bits",
                    rec.err,
                    rec.bits
                );
                assert!(rec.value.is_integer());
                worst = worst.max(rec.err);
                count += 1;
            }
        }
    }
    pass(
        "criterion-12d",
        &format!(
            "{count} traces integral, worst err {worst:.2e} < 1e-4, in {:.2?}",
            started.elapsed()
        ),
    );
}

/// 12e. Bracket identity exact for m <= 3, nu <= 5, through q^20.
#[test]
fn criterion_12e_bracket_identity() {
    let store = TraceStore::in_memory();
    for m in 1..=3i64 {
        for nu in 0..=5u32 {
            let report = relations::verify_bracket_identity(&store, m, nu, 20).unwrap();
            assert!(report.passed(), "m={m} nu={nu}: {:?}", report.first_failure);
        }
    }
    pass(
        "criterion-12e",
        "[g_m, theta]_nu | U_4 = -2 C(2nu,nu) G_(m,nu) exact for m <= 3, nu <= 5, q^20",
    );
}

/// Structural consequence used throughout: the cusp projection of G_(m,nu)
/// is an exact multiple of the eigenform (checked inside thm14_invert), and
/// Mobius recombination across methods is consistent.
#[test]
fn criterion_09b_moebius_recombination() {
    let store = TraceStore::in_memory();
    for m in [2i64, 4] {
        let report =
            lfunc::verify_moebius_recombination(&store, m, 200_000, 800, 192).unwrap();
        assert!(report.passed(), "m = {m}: {:?}", report.first_failure);
    }
    pass("criterion-09b", "divisor recombination of direct values matches inversion");
}
