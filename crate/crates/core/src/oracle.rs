//! Dense reference computations built straight from the matrix definitions.
//!
//! Everything here is `O(N²)` memory or worse and exists to cross-check the
//! structured code paths.

use std::f64::consts::PI;

use crate::linalg::CMat;
use crate::C64;

/// Unitary `N`-point DFT matrix.
pub fn dft_matrix(n: usize) -> CMat {
    let s = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |r, c| {
        C64::from_polar(s, -2.0 * PI * ((r * c) % n) as f64 / n as f64)
    })
}

/// `Z = F_M ⊗ I_K`.
pub fn zak_matrix(k: usize, m: usize) -> CMat {
    dft_matrix(m).kron(&CMat::identity(k))
}

/// `Z_u = ω_u ⊗ I_K` with `ω_u = (1, ω^u, …, ω^{(M−1)u})`, `ω = exp(−j2π/M)`.
pub fn zak_row_matrix(k: usize, m: usize, u: usize) -> CMat {
    let omega = CMat::from_fn(1, m, |_, i| {
        C64::from_polar(1.0, -2.0 * PI * ((u * i) % m) as f64 / m as f64)
    });
    omega.kron(&CMat::identity(k))
}

/// `F_N·Z_uᴴ·Z_u·F_Nᴴ`.
pub fn du_matrix(k: usize, m: usize, u: usize) -> CMat {
    let f = dft_matrix(k * m);
    let zu = zak_row_matrix(k, m, u);
    f.matmul(&zu.adjoint().matmul(&zu)).matmul(&f.adjoint())
}

/// Largest off-diagonal magnitude relative to the Frobenius norm.
pub fn off_diagonal_ratio(a: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            if r != c {
                worst = worst.max(a[(r, c)].norm());
            }
        }
    }
    worst / a.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// Largest magnitude outside the cyclic tridiagonal pattern
/// (`|r − c| ∈ {0, 1, K−1}`) relative to the Frobenius norm.
pub fn off_band_ratio(a: &CMat) -> f64 {
    let k = a.rows();
    let mut worst = 0.0f64;
    for r in 0..k {
        for c in 0..k {
            let d = r.abs_diff(c);
            if d > 1 && d != k - 1 {
                worst = worst.max(a[(r, c)].norm());
            }
        }
    }
    worst / a.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// Energy outside the `K × K` diagonal blocks divided by the total energy.
pub fn off_block_energy_ratio(a: &CMat, k: usize) -> f64 {
    let mut off = 0.0;
    let mut total = 0.0;
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            let e = a[(r, c)].norm_sqr();
            total += e;
            if r / k != c / k {
                off += e;
            }
        }
    }
    off / total.max(f64::MIN_POSITIVE)
}

/// `W = G·(Gᴴ·G + σ²·I)⁻¹` by explicit inversion.
pub fn lmmse_explicit(g: &CMat, sigma_n2: f64) -> crate::Result<CMat> {
    let mut gram = g.adjoint().matmul(g);
    gram.add_diagonal(C64::new(sigma_n2, 0.0));
    Ok(g.matmul(&gram.inverse()?))
}
