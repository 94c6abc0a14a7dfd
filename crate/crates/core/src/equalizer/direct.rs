//! Dense reference LMMSE receiver.
//!
//! `W = G·(Gᴴ·G + σ²·I)⁻¹` with `G = H·A`, computed by a Cholesky factorization
//! of the Gram matrix and `N` forward/backward substitutions. This is the
//! oracle the structured path is checked against.

use crate::complexity::{OpCounter, Stage};
use crate::error::{Error, Result};
use crate::gfdm::Channel;
use crate::linalg::CMat;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Direct,
    Fast,
}

/// Dense `N × N` LMMSE filter; column `i` is the receive filter for symbol `i`.
#[derive(Clone, Debug)]
pub struct LmmseFilter {
    pub w: CMat,
    pub provenance: Provenance,
}

fn count(counter: Option<&OpCounter>, stage: Stage, n: u64) {
    if let Some(c) = counter {
        c.add(stage, n);
    }
}

/// Lower-triangular `L` with `L·Lᴴ = a`.
pub fn cholesky(a: &CMat, counter: Option<&OpCounter>) -> Result<CMat> {
    if !a.is_square() {
        return Err(Error::dims("square matrix", format!("{:?}", a.shape())));
    }
    let n = a.rows();
    let scale = (0..n).map(|i| a[(i, i)].re.abs()).fold(0.0, f64::max);
    let mut l = CMat::zeros(n, n);
    let mut mults = 0u64;
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        mults += j as u64;
        if d.is_nan() || d <= scale * 1e-14 {
            count(counter, Stage::Cholesky, mults);
            return Err(Error::NotPositiveDefinite { column: j });
        }
        let ljj = d.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        let inv = 1.0 / ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s * inv;
        }
        mults += ((n - j - 1) * (j + 1)) as u64;
    }
    count(counter, Stage::Cholesky, mults);
    Ok(l)
}

/// Solves `L·Lᴴ·X = b` given the Cholesky factor.
pub fn cholesky_solve(l: &CMat, b: &CMat, counter: Option<&OpCounter>) -> Result<CMat> {
    let n = l.rows();
    if b.rows() != n {
        return Err(Error::dims(format!("{n} rows"), format!("{} rows", b.rows())));
    }
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)].re;
        }
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)].re;
        }
    }
    count(counter, Stage::Substitution, (n * (n + 1)) as u64 * b.cols() as u64);
    Ok(x)
}

/// `G = H·A`, column by column through the channel's frequency response.
pub fn effective_channel(a_dense: &CMat, ch: &Channel) -> Result<CMat> {
    let n = a_dense.rows();
    if a_dense.cols() != n || ch.n() != n {
        return Err(Error::dims(
            format!("{n} x {n} with channel length {n}"),
            format!("{:?} with channel length {}", a_dense.shape(), ch.n()),
        ));
    }
    let zero = vec![C64::default(); n];
    let mut g = CMat::zeros(n, n);
    for c in 0..n {
        g.set_column(c, &ch.apply(&a_dense.column(c), &zero)?);
    }
    Ok(g)
}

/// `Gᴴ·G + σ²·I`, filling the lower triangle by symmetry.
pub fn regularized_gram(g: &CMat, sigma_n2: f64) -> CMat {
    let n = g.cols();
    let gh = g.adjoint();
    let mut gram = CMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: C64 = gh.row(i).iter().zip(gh.row(j)).map(|(a, b)| a * b.conj()).sum();
            gram[(i, j)] = v;
            gram[(j, i)] = v.conj();
        }
        gram[(i, i)] = C64::new(gram[(i, i)].re + sigma_n2, 0.0);
    }
    gram
}

/// Dense LMMSE filter. Only the Cholesky factorization and the substitutions
/// are counted.
pub fn lmmse_direct(a_dense: &CMat, ch: &Channel, sigma_n2: f64, counter: Option<&OpCounter>) -> Result<LmmseFilter> {
    if sigma_n2.is_nan() || sigma_n2 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be >= 0, got {sigma_n2}"
        )));
    }
    let g = effective_channel(a_dense, ch)?;
    let gram = regularized_gram(&g, sigma_n2);
    let l = cholesky(&gram, counter)?;
    // Gram·Wᴴ = Gᴴ
    let wh = cholesky_solve(&l, &g.adjoint(), counter)?;
    Ok(LmmseFilter {
        w: wh.adjoint(),
        provenance: Provenance::Direct,
    })
}

/// `d̂ = Wᴴ·y`.
pub fn equalize_direct(filter: &LmmseFilter, y: &[C64]) -> Result<Vec<C64>> {
    let w = &filter.w;
    if y.len() != w.rows() {
        return Err(Error::dims(
            format!("length {}", w.rows()),
            format!("length {}", y.len()),
        ));
    }
    Ok((0..w.cols())
        .map(|c| (0..w.rows()).map(|r| w[(r, c)].conj() * y[r]).sum())
        .collect())
}
