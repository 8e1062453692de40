//! Ramanujan tau to large cutoffs.
//!
//! `Delta = q * E^24` with `E = prod (1 - q^n)`. By Jacobi's identity
//! `E^3 = sum_{k>=0} (-1)^k (2k+1) q^(k(k+1)/2)` is sparse with O(sqrt N)
//! terms, so `E^24` is reached by one sparse-sparse convolution (`E^6`)
//! followed by six dense-sparse convolutions, each O(N sqrt N) machine-word
//! multiplies. Coefficients stay inside `i128` (|tau(n)| <= d(n) n^{11/2}
//! is about 10^35 at n = 10^6); all accumulation is overflow-checked.

use rayon::prelude::*;

/// Exponent/coefficient pairs of `E^3` below `q^n_max`.
fn eta_cubed_sparse(n_max: usize) -> Vec<(usize, i64)> {
    let mut terms = Vec::new();
    let mut k = 0usize;
    loop {
        let e = k * (k + 1) / 2;
        if e >= n_max {
            break;
        }
        let c = (2 * k + 1) as i64;
        terms.push((e, if k % 2 == 0 { c } else { -c }));
        k += 1;
    }
    terms
}

/// Dense-times-sparse product truncated below `q^n_max`. The caller-facing
/// overflow guarantee is the headroom assertion: the worst accumulated sum
/// is bounded by `max|dense| * sum|sparse|`, which must fit in `i128`.
fn mul_sparse(dense: &[i128], sparse: &[(usize, i64)], n_max: usize) -> Vec<i128> {
    let max_in = dense.iter().map(|d| d.unsigned_abs()).max().unwrap_or(0);
    let weight: u128 = sparse.iter().map(|&(_, c)| c.unsigned_abs() as u128).sum();
    assert!(
        max_in < i128::MAX as u128 / weight.max(1),
        "tau pipeline headroom exhausted"
    );
    (0..n_max)
        .into_par_iter()
        .map(|n| {
            let mut acc: i128 = 0;
            for &(g, c) in sparse {
                if g > n {
                    break;
                }
                // in-range by the headroom assertion; wrapping ops skip the
                // per-step overflow checks of debug builds
                acc = acc.wrapping_add(dense[n - g].wrapping_mul(c as i128));
            }
            acc
        })
        .collect()
}

// process-wide cache: computing to 10^6 is a few seconds, so share it
static TAU_CACHE: std::sync::Mutex<Option<std::sync::Arc<Vec<i128>>>> =
    std::sync::Mutex::new(None);

/// Cached `tau(n)` table covering at least `0..=n_max`.
pub fn tau_cached(n_max: usize) -> std::sync::Arc<Vec<i128>> {
    let mut guard = TAU_CACHE.lock().unwrap();
    let have = guard.as_ref().map_or(0, |v| v.len());
    if have < n_max + 1 {
        let target = (n_max + 1).next_power_of_two().max(4096) - 1;
        *guard = Some(std::sync::Arc::new(tau_upto(target)));
    }
    guard.as_ref().unwrap().clone()
}

/// `tau(n)` for `0 <= n <= n_max` (`tau(0) = 0`).
pub fn tau_upto(n_max: usize) -> Vec<i128> {
    if n_max == 0 {
        return vec![0];
    }
    let len = n_max; // coefficients of E^24 below q^n_max suffice for tau(n_max)
    let e3 = eta_cubed_sparse(len);

    // E^6 from the sparse square.
    let mut e6 = vec![0i128; len];
    for (i, &(g1, c1)) in e3.iter().enumerate() {
        for &(g2, c2) in &e3[i..] {
            let e = g1 + g2;
            if e >= len {
                break;
            }
            let prod = (c1 as i128) * (c2 as i128);
            e6[e] += if g1 == g2 { prod } else { 2 * prod };
        }
    }

    let mut cur = e6;
    for _ in 0..6 {
        cur = mul_sparse(&cur, &e3, len);
    }

    let mut tau = vec![0i128; n_max + 1];
    for n in 1..=n_max {
        tau[n] = cur[n - 1];
    }
    tau
}
