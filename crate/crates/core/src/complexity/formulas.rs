//! Closed-form complex-multiplication counts.

/// `ld M`, exact for powers of two.
pub fn ld(m: u64) -> f64 {
    if m.is_power_of_two() {
        m.trailing_zeros() as f64
    } else {
        (m as f64).log2()
    }
}

/// Fast filter cost, stage by stage:
/// `2MK + M(3K·4M + 2K + 5K²) + K²M·ld M`.
pub fn c_sparse(k: u64, m: u64) -> f64 {
    let (kf, mf) = (k as f64, m as f64);
    2.0 * mf * kf + mf * (3.0 * kf * 4.0 * mf + 2.0 * kf + 5.0 * kf * kf) + kf * kf * mf * ld(m)
}

/// Same count, collected by powers of `K`: `K²(5M + M·ld M) + K(12M² + 4M)`.
pub fn c_sparse_collected(k: u64, m: u64) -> f64 {
    let (kf, mf) = (k as f64, m as f64);
    kf * kf * (5.0 * mf + mf * ld(m)) + kf * (12.0 * mf * mf + 4.0 * mf)
}

/// Integer count when `M` is a power of two.
pub fn c_sparse_exact(k: u64, m: u64) -> Option<u64> {
    if !m.is_power_of_two() {
        return None;
    }
    let ldm = m.trailing_zeros() as u64;
    Some(k * k * (5 * m + m * ldm) + k * (12 * m * m + 4 * m))
}

/// Dense Cholesky solve: `N³/3 + N·2N² = 7N³/3` with `N = K·M`.
pub fn c_direct(k: u64, m: u64) -> f64 {
    let n = (k * m) as f64;
    7.0 * n * n * n / 3.0
}

/// Extra cost of forming the right-hand sides `D_{G,u}` by a column-wise ZAK
/// transform, `K²M·ld M`.
pub fn dgu_zak_cost(k: u64, m: u64) -> f64 {
    (k * k * m) as f64 * ld(m)
}
