//! Level-1 cusp form spaces: dimension formula, Miller (echelon) bases built
//! from the Delta-E4-E6 monomial lattice, Hecke matrices, and exact traces.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::qseries::{self, QSeries};
use crate::{Error, Result};

/// Dimension of the full space `M_k` of level-1 modular forms (`k` even).
pub fn dim_modular(weight: i64) -> usize {
    if weight < 0 || weight % 2 != 0 || weight == 2 {
        return if weight == 2 { 0 } else { usize::from(weight == 0) };
    }
    let w = weight as usize;
    if w % 12 == 2 {
        w / 12
    } else {
        w / 12 + 1
    }
}

/// Dimension `d_{2k}` of the cusp space `S_k` at level 1.
pub fn dim_cusp(weight: i64) -> usize {
    if weight < 12 {
        0
    } else {
        dim_modular(weight) - 1
    }
}

/// A cusp space with its echelonized (Miller) basis: basis element `i`
/// has expansion `q^(i+1) + O(q^(dim+1))`.
#[derive(Debug, Clone)]
pub struct CuspSpace {
    pub weight: i64,
    pub dim: usize,
    pub basis: Vec<QSeries>,
}

/// Monomial `Delta^a E4^b E6^c` of the given weight with `a` prescribed.
fn monomial_form(weight: i64, a: i64, precision: i64) -> Result<QSeries> {
    let rem = weight - 12 * a;
    assert!(rem >= 0 && rem % 2 == 0);
    let (b6, rem4) = if rem % 4 == 0 { (0, rem) } else { (1, rem - 6) };
    assert!(rem4 >= 0 && rem4 % 4 == 0);
    let b4 = rem4 / 4;
    let mut f = QSeries::one(precision)?;
    if a > 0 {
        f = f.mul(&qseries::delta(precision)?.pow(a as u32)?)?;
    }
    if b4 > 0 {
        f = f.mul(&qseries::eisenstein(4, precision)?.pow(b4 as u32)?)?;
    }
    if b6 == 1 {
        f = f.mul(&qseries::eisenstein(6, precision)?)?;
    }
    f.truncated(precision)
}

/// Miller basis of `S_weight` to the given precision (`precision > dim`).
///
/// Weights with no cusp forms yield an empty basis.
pub fn miller_basis(weight: i64, precision: i64) -> Result<CuspSpace> {
    if weight < 0 || weight % 2 != 0 {
        return Err(Error::BadWeight(weight));
    }
    let dim = dim_cusp(weight);
    if dim == 0 {
        return Ok(CuspSpace {
            weight,
            dim,
            basis: Vec::new(),
        });
    }
    if precision <= dim as i64 {
        return Err(Error::InsufficientPrecision {
            needed: dim as i64 + 1,
            available: precision,
        });
    }
    // Delta^i * (E4, E6 monomial) starts at q^i; i = 1..=dim spans S_weight.
    let mut rows: Vec<QSeries> = (1..=dim as i64)
        .map(|a| monomial_form(weight, a, precision))
        .collect::<Result<_>>()?;
    // Echelonize so that rows[i] = q^(i+1) + O(q^(dim+1)).
    for i in 0..dim {
        let pivot = (i + 1) as i64;
        let lead = rows[i].coeff(pivot)?;
        assert!(!lead.is_zero(), "Miller pivot vanished");
        rows[i] = rows[i].scaled(&(BigRational::one() / lead));
        for k in 0..dim {
            if k == i {
                continue;
            }
            let c = rows[k].coeff(pivot)?;
            if !c.is_zero() {
                rows[k] = rows[k].sub(&rows[i].scaled(&c))?;
            }
        }
    }
    Ok(CuspSpace {
        weight,
        dim,
        basis: rows,
    })
}

/// Echelon basis of the full space `M_weight`: element `i` has expansion
/// `q^i + O(q^(dim M))` for `i = 0..dim M`.
pub fn full_basis(weight: i64, precision: i64) -> Result<Vec<QSeries>> {
    if weight < 4 || weight % 2 != 0 {
        return Err(Error::BadWeight(weight));
    }
    let dim = dim_modular(weight);
    if precision < dim as i64 {
        return Err(Error::InsufficientPrecision {
            needed: dim as i64,
            available: precision,
        });
    }
    let mut rows: Vec<QSeries> = (0..dim as i64)
        .map(|a| monomial_form(weight, a, precision))
        .collect::<Result<_>>()?;
    for i in 0..dim {
        let pivot = i as i64;
        let lead = rows[i].coeff(pivot)?;
        assert!(!lead.is_zero());
        rows[i] = rows[i].scaled(&(BigRational::one() / lead));
        for k in 0..dim {
            if k == i {
                continue;
            }
            let c = rows[k].coeff(pivot)?;
            if !c.is_zero() {
                rows[k] = rows[k].sub(&rows[i].scaled(&c))?;
            }
        }
    }
    Ok(rows)
}

/// Matrix of `T_n` on the Miller basis, row-major: entry `(i, j)` is the
/// coefficient of basis vector `j` in `T_n(basis[i])`.
pub fn hecke_matrix(weight: i64, n: i64) -> Result<Vec<Vec<BigRational>>> {
    assert!(n >= 1);
    let dim = dim_cusp(weight);
    if dim == 0 {
        return Ok(Vec::new());
    }
    // T_n reads coefficients up to n * dim, so build the basis beyond that.
    let space = miller_basis(weight, n * (dim as i64 + 1) + 1)?;
    let mut mat = vec![vec![BigRational::zero(); dim]; dim];
    for (i, f) in space.basis.iter().enumerate() {
        let tf = f.hecke(weight, n)?;
        for (j, row) in mat[i].iter_mut().enumerate().take(dim) {
            // Echelon basis: coordinates are the q^1..q^dim coefficients.
            *row = tf.coeff(j as i64 + 1)?;
        }
    }
    Ok(mat)
}

/// Exact trace of `T_n` on `S_weight`.
pub fn trace_tn(weight: i64, n: i64) -> Result<BigRational> {
    let mat = hecke_matrix(weight, n)?;
    let mut tr = BigRational::zero();
    for (i, row) in mat.iter().enumerate() {
        tr += &row[i];
    }
    Ok(tr)
}

/// The unique normalized Hecke eigenform when `dim S_weight = 1`.
pub fn eigenform(weight: i64, precision: i64) -> Result<QSeries> {
    let space = miller_basis(weight, precision)?;
    if space.dim != 1 {
        return Err(Error::WrongDimension {
            weight,
            dim: space.dim,
            expected: 1,
        });
    }
    Ok(space.basis.into_iter().next().unwrap())
}
