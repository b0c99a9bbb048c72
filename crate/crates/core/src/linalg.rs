//! Small dense linear-algebra helpers shared by the numeric modules.

use nalgebra::Cholesky;

use crate::{CMat, Error, RMat, Result, C64};

/// `log det` of a real symmetric positive definite matrix via Cholesky.
pub fn logdet_spd(m: &RMat, what: &'static str) -> Result<f64> {
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite(what))?;
    Ok(2.0
        * chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|d| d.ln())
            .sum::<f64>())
}

/// `log det` of a complex Hermitian positive definite matrix via Cholesky.
pub fn logdet_hpd(m: &CMat, what: &'static str) -> Result<f64> {
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite(what))?;
    Ok(2.0
        * chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|d| d.re.ln())
            .sum::<f64>())
}

/// Inverse of a real symmetric positive definite matrix.
pub fn inverse_spd(m: &RMat, what: &'static str) -> Result<RMat> {
    Cholesky::new(m.clone())
        .map(|c| c.inverse())
        .ok_or(Error::NotPositiveDefinite(what))
}

/// Inverse of a complex Hermitian positive definite matrix.
pub fn inverse_hpd(m: &CMat, what: &'static str) -> Result<CMat> {
    Cholesky::new(m.clone())
        .map(|c| c.inverse())
        .ok_or(Error::NotPositiveDefinite(what))
}

/// Real inner product `Re tr(Aᴴ B)` on complex matrices.
pub fn re_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `Re tr(Aᴴ B)` expressed as the complex trace, for callers that need the
/// imaginary part too.
pub fn trace_ah_b(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Symmetrizes in place: `(A + Aᵀ)/2`.
pub fn symmetrize(m: &mut RMat) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Hermitizes in place: `(A + Aᴴ)/2`.
pub fn hermitize(m: &mut CMat) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

/// Real part of a complex matrix.
pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

/// Real embedding `[[Re A, −Im A], [Im A, Re A]]` of a complex square matrix.
pub fn real_embedding(a: &CMat) -> RMat {
    let n = a.nrows();
    let mut out = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
            out[(i + n, j + n)] = z.re;
        }
    }
    out
}
