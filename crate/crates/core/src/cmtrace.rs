//! Traces of singular moduli.
//!
//! `t_m(d)` sums `j_m(alpha_Q) / #Gamma_Q` over the reduced forms of
//! discriminant `-d`. The evaluation is numerical (MPFR complex at a
//! precision scaled to the expected magnitude `exp(pi m sqrt(d))`) but the
//! result is an integer for `m >= 1`, so each record carries the rounding
//! distance as an auditable error bound. For `d <= 0` the values follow the
//! closed-form conventions (`2 sigma_1(m)` at `d = 0`, `-kappa` at
//! `d = -kappa^2` with `kappa | m`), and `t_0` delegates to the Hurwitz
//! class numbers.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::arith::{perfect_sqrt, sigma1};
use crate::mp::{float_from_bigint, round_to_integer};
use crate::quadforms::{enumerate_reduced, hurwitz, QuadForm};
use crate::{Error, Result};

/// One computed trace value with its numeric audit trail.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub m: u32,
    pub d: i64,
    pub value: BigRational,
    /// Distance of the float evaluation from the rounded value (0 for the
    /// exact `d <= 0` conventions).
    pub err: f64,
    /// Working precision used, 0 when no evaluation was needed.
    pub bits: u32,
}

#[derive(Serialize, Deserialize)]
struct RawRecord {
    m: u32,
    d: i64,
    t: String,
    err: f64,
    bits: u32,
}

impl TraceRecord {
    fn to_raw(&self) -> RawRecord {
        RawRecord {
            m: self.m,
            d: self.d,
            t: self.value.to_string(),
            err: self.err,
            bits: self.bits,
        }
    }

    fn from_raw(raw: RawRecord) -> Result<Self> {
        let value: BigRational = raw
            .t
            .parse()
            .map_err(|_| Error::BadArgument(format!("bad rational '{}' in cache", raw.t)))?;
        Ok(TraceRecord {
            m: raw.m,
            d: raw.d,
            value,
            err: raw.err,
            bits: raw.bits,
        })
    }
}

/// CM point of a positive definite form: the root
/// `alpha_Q = (-B + i sqrt(d)) / (2A)` of `Q(tau, 1) = 0`.
pub fn cm_point(q: &QuadForm, prec: u32) -> Complex {
    let d = -q.discriminant();
    assert!(d > 0 && q.a > 0);
    let sqrt_d = Float::with_val(prec, d).sqrt();
    let re = Float::with_val(prec, -q.b) / Float::with_val(prec, 2 * q.a);
    let im = sqrt_d / Float::with_val(prec, 2 * q.a);
    Complex::with_val(prec, (re, im))
}

/// Truncation order for evaluating `j_m` at height `v`: past the returned
/// `N`, terms `c_m(n) q^n` are below `2^-(bits+32)` times the leading
/// `q^(-m)` scale (using `|c_m(n)| <= e^(4 pi sqrt(mn))` growth).
fn truncation_order(m: i64, v: f64, bits: u32) -> i64 {
    let log_q = -2.0 * std::f64::consts::PI * v; // ln |q|
    let target = -((bits + 32) as f64) * std::f64::consts::LN_2 + (m as f64) * (-log_q);
    let mut n = (4 * m).max(8);
    loop {
        let log_term = 4.0 * std::f64::consts::PI * ((m * n) as f64).sqrt() + (n as f64) * log_q;
        if log_term < target {
            return n;
        }
        n += (n / 4).max(4);
    }
}

/// Horner evaluation of a `q`-expansion with float coefficients starting at
/// exponent `-m`.
fn eval_expansion(coeffs: &[Float], m: i64, tau: &Complex, bits: u32) -> Complex {
    let i_two_pi = Complex::with_val(bits, (Float::new(bits), crate::mp::two_pi(bits)));
    let q = Complex::with_val(bits, tau * &i_two_pi).exp();
    // Horner from the top exponent down to -m, then restore the q^-m scale.
    let mut acc = Complex::with_val(bits, (0, 0));
    for c in coeffs.iter().rev() {
        acc *= &q;
        if !c.is_zero() {
            acc += c;
        }
    }
    let q_inv_m = Complex::with_val(bits, rug::ops::Pow::pow(&q, -(m as i32)));
    acc * q_inv_m
}

fn jm_float_coefficients(m: i64, n_max: i64, bits: u32) -> Vec<Float> {
    crate::qseries::jm_coefficients(m, n_max)
        .iter()
        .map(|c| float_from_bigint(c, bits))
        .collect()
}

/// Evaluate `j_m` at `tau` (which must satisfy `Im tau >= sqrt(3)/2`) by
/// Horner summation of the truncated `q`-expansion.
pub fn eval_jm(m: i64, tau: &Complex, bits: u32) -> Result<Complex> {
    assert!(m >= 0);
    let v = tau.imag().to_f64();
    if v < 3f64.sqrt() / 2.0 - 1e-9 {
        return Err(Error::BadArgument(format!(
            "Im(tau) = {v} below the fundamental-domain height sqrt(3)/2"
        )));
    }
    if m == 0 {
        return Ok(Complex::with_val(bits, (1, 0)));
    }
    let n_max = truncation_order(m, v, bits);
    let coeffs = jm_float_coefficients(m, n_max, bits);
    Ok(eval_expansion(&coeffs, m, tau, bits))
}

/// Working precision for `t_m(d)`: 64 bits plus the expected digit count of
/// the dominant singular modulus `exp(pi m sqrt(d))`.
fn working_bits(m: u32, d: i64) -> u32 {
    let digits = std::f64::consts::PI * (m as f64) * (d as f64).sqrt() / std::f64::consts::LN_10;
    64 + (3.33 * digits).ceil() as u32
}

/// The trace `t_m(d)`, including the closed-form conventions at `d <= 0`.
pub fn trace_tm(m: u32, d: i64) -> Result<TraceRecord> {
    let exact = |value: BigRational| TraceRecord {
        m,
        d,
        value,
        err: 0.0,
        bits: 0,
    };
    if m == 0 {
        // t_0 = H; the paper leaves t_0 at negative arguments undefined and
        // no relation consumes it, so treat it as 0.
        let value = if d >= 0 {
            hurwitz(d)?
        } else {
            debug_assert!(false, "t_0 requested at negative discriminant {d}");
            BigRational::zero()
        };
        return Ok(exact(value));
    }
    let m_i = m as i64;
    if d == 0 {
        return Ok(exact(BigRational::from_integer(BigInt::from(
            2 * sigma1(m_i),
        ))));
    }
    if d < 0 {
        let v = match perfect_sqrt(-d) {
            Some(kappa) if m_i % kappa == 0 => -kappa,
            _ => 0,
        };
        return Ok(exact(BigRational::from_integer(BigInt::from(v))));
    }
    if !matches!(d.rem_euclid(4), 0 | 3) {
        return Err(Error::BadDiscriminant(d));
    }

    let forms = enumerate_reduced(d)?;
    let mut bits = working_bits(m, d);
    for attempt in 0..4 {
        // Truncation for the lowest height sqrt(3)/2 covers every form.
        let n_max = truncation_order(m_i, 3f64.sqrt() / 2.0, bits);
        let coeffs = jm_float_coefficients(m_i, n_max, bits);
        // Sum 6 j_m(alpha_Q) / #Gamma_Q to keep stabilizer weights integral.
        let mut acc = Complex::with_val(bits, (0, 0));
        for q in &forms {
            let alpha = cm_point(q, bits);
            let val = eval_expansion(&coeffs, m_i, &alpha, bits);
            acc += val * Float::with_val(bits, 6 / q.stabilizer_order());
        }
        acc /= Float::with_val(bits, 6);
        let (int, round_err) = round_to_integer(acc.real());
        let err = round_err + acc.imag().clone().abs().to_f64();
        if err < 0.4 {
            return Ok(TraceRecord {
                m,
                d,
                value: BigRational::from_integer(int),
                err,
                bits,
            });
        }
        if attempt == 3 {
            return Err(Error::RoundingAmbiguity { m, d, err });
        }
        bits *= 2;
    }
    unreachable!()
}

/// On-disk/in-memory store of computed traces, keyed by `(m, d)`.
///
/// The file format is newline-delimited JSON records
/// `{"m":..,"d":..,"t":"..","err":..,"bits":..}`. One store is the single
/// writer; concurrent readers go through the in-memory map.
pub struct TraceStore {
    path: Option<PathBuf>,
    map: Mutex<HashMap<(u32, i64), TraceRecord>>,
}

impl TraceStore {
    pub fn in_memory() -> Self {
        TraceStore {
            path: None,
            map: Mutex::new(HashMap::new()),
        }
    }

    /// Open (and create if needed) a cache file, loading existing records.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut map = HashMap::new();
        if path.exists() {
            for line in fs::read_to_string(&path)?.lines() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let raw: RawRecord = serde_json::from_str(line)?;
                let rec = TraceRecord::from_raw(raw)?;
                map.insert((rec.m, rec.d), rec);
            }
        }
        Ok(TraceStore {
            path: Some(path),
            map: Mutex::new(map),
        })
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn append_to_file(&self, recs: &[TraceRecord]) -> Result<()> {
        if let Some(path) = &self.path {
            let mut file = fs::OpenOptions::new().create(true).append(true).open(path)?;
            let mut buf = String::new();
            for rec in recs {
                buf.push_str(&serde_json::to_string(&rec.to_raw())?);
                buf.push('\n');
            }
            file.write_all(buf.as_bytes())?;
        }
        Ok(())
    }

    /// Fetch `t_m(d)`, computing and persisting it if missing.
    pub fn get(&self, m: u32, d: i64) -> Result<TraceRecord> {
        if m >= 1 {
            if let Some(rec) = self.map.lock().unwrap().get(&(m, d)) {
                return Ok(rec.clone());
            }
        }
        let rec = trace_tm(m, d)?;
        if m >= 1 && d > 0 {
            self.map.lock().unwrap().insert((m, d), rec.clone());
            self.append_to_file(std::slice::from_ref(&rec))?;
        }
        Ok(rec)
    }

    /// Trace value only.
    pub fn value(&self, m: u32, d: i64) -> Result<BigRational> {
        Ok(self.get(m, d)?.value)
    }

    /// Compute all missing `t_m(d)` for `0 < d <= d_max`, `d = 0, 3 mod 4`,
    /// in parallel over `d`.
    pub fn ensure_range(&self, m: u32, d_max: i64) -> Result<()> {
        if m == 0 {
            return Ok(());
        }
        let missing: Vec<i64> = {
            let map = self.map.lock().unwrap();
            (1..=d_max)
                .filter(|d| matches!(d % 4, 0 | 3) && !map.contains_key(&(m, *d)))
                .collect()
        };
        if missing.is_empty() {
            return Ok(());
        }
        let computed: Result<Vec<TraceRecord>> = missing
            .par_iter()
            .map(|&d| trace_tm(m, d))
            .collect();
        let computed = computed?;
        {
            let mut map = self.map.lock().unwrap();
            for rec in &computed {
                map.insert((rec.m, rec.d), rec.clone());
            }
        }
        self.append_to_file(&computed)
    }
}
