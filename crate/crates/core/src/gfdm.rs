//! GFDM system model: prototype filter, modulation matrix, circulant multipath
//! channel, noise and symbol sources.
//!
//! One block carries `N = K·M` samples. Symbol `d_{k,m}` (subcarrier `k`,
//! subsymbol `m`) sits at `d[m·K + k]` and is carried by the column
//!
//! ```text
//! g_{k,m}[n] = g[⟨n − m·K⟩_N] · exp(j2π·k·M·n / N)
//! ```
//!
//! so the modulation matrix is block circulant with `K × K` blocks.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{dft, BlockCirculant, CMat, DftPlan, Direction};
use crate::C64;

/// Threshold on the smallest singular value of the modulation matrix below
/// which it is treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GfdmParams {
    k: usize,
    m: usize,
    sigma_n2: f64,
    rolloff: f64,
}

impl GfdmParams {
    pub fn new(k: usize, m: usize, sigma_n2: f64, rolloff: f64) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter(format!("K must be at least 3, got {k}")));
        }
        if m < 1 {
            return Err(Error::InvalidParameter("M must be at least 1".into()));
        }
        if !(sigma_n2 >= 0.0 && sigma_n2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be >= 0, got {sigma_n2}"
            )));
        }
        if !(0.0..=1.0).contains(&rolloff) {
            return Err(Error::InvalidParameter(format!(
                "rolloff must be in [0, 1], got {rolloff}"
            )));
        }
        Ok(Self {
            k,
            m,
            sigma_n2,
            rolloff,
        })
    }

    /// Subcarriers.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Subsymbols.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.k * self.m
    }

    pub fn sigma_n2(&self) -> f64 {
        self.sigma_n2
    }

    pub fn rolloff(&self) -> f64 {
        self.rolloff
    }

    pub fn with_sigma_n2(self, sigma_n2: f64) -> Result<Self> {
        Self::new(self.k, self.m, sigma_n2, self.rolloff)
    }
}

/// Frequency bins `c − M + 1, …, c + M` (mod `N`): the two-subcarrier window
/// centred on bin `c`.
pub fn window_bins(center: usize, m: usize, n: usize) -> impl Iterator<Item = usize> {
    (0..2 * m).map(move |i| (center + n + i + 1 - m) % n)
}

/// Frequency response at signed bin offset `offset ∈ [−M+1, M]`.
///
/// Flat inside `|f| ≤ 1 − α` (in subcarrier units `f = offset / M`) with a
/// raised-cosine taper reaching zero at `|f| = 1`. With `α = 0` all `2M` bins
/// are equal.
fn rolloff_shape(offset: i64, m: usize, alpha: f64) -> f64 {
    let f = (offset.unsigned_abs() as f64) / m as f64;
    let edge = 1.0 - alpha;
    if f <= edge {
        1.0
    } else if f >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 + (PI * (f - edge) / alpha).cos())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeFilter {
    g: Vec<C64>,
    g_freq: Vec<C64>,
}

impl PrototypeFilter {
    /// Frequency-sampled raised-cosine prototype spanning two subcarriers.
    ///
    /// When the noise variance is zero the modulation matrix must be
    /// invertible, and a singular configuration is rejected.
    pub fn build(params: &GfdmParams) -> Result<Self> {
        let (m, n) = (params.m(), params.n());
        let mut g_freq = vec![C64::default(); n];
        for bin in window_bins(0, m, n) {
            let offset = if bin <= m { bin as i64 } else { bin as i64 - n as i64 };
            g_freq[bin] = C64::new(rolloff_shape(offset, m, params.rolloff()), 0.0);
        }
        let energy = g_freq.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in g_freq.iter_mut() {
            *v /= energy;
        }
        let g = dft(&g_freq, Direction::Inverse)?;
        let proto = Self { g, g_freq };
        if params.sigma_n2() == 0.0 {
            let smin = proto.min_singular_value(params)?;
            if smin < SINGULAR_THRESHOLD {
                return Err(Error::SingularModulation {
                    min_singular_value: smin,
                });
            }
        }
        Ok(proto)
    }

    /// Arbitrary time-domain prototype (normalized to unit energy). Need not
    /// be band-limited.
    pub fn from_time_domain(g: &[C64]) -> Result<Self> {
        let energy = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if energy == 0.0 {
            return Err(Error::InvalidParameter("prototype filter has zero energy".into()));
        }
        let g: Vec<C64> = g.iter().map(|v| v / energy).collect();
        let g_freq = dft(&g, Direction::Forward)?;
        Ok(Self { g, g_freq })
    }

    pub fn g(&self) -> &[C64] {
        &self.g
    }

    /// Unitary DFT of `g`.
    pub fn g_freq(&self) -> &[C64] {
        &self.g_freq
    }

    /// True when all spectral energy lies in the `2M`-bin window around bin 0.
    pub fn is_band_limited(&self, m: usize, rel_tol: f64) -> bool {
        let n = self.g_freq.len();
        if 2 * m > n {
            return false;
        }
        let mut inside = vec![false; n];
        for b in window_bins(0, m, n) {
            inside[b] = true;
        }
        let total = self.g_freq.iter().map(|v| v.norm()).fold(0.0, f64::max);
        self.g_freq
            .iter()
            .zip(&inside)
            .filter(|(_, &ins)| !ins)
            .all(|(v, _)| v.norm() <= rel_tol * total)
    }

    /// Smallest singular value of the modulation matrix, taken over its
    /// eigen-blocks.
    pub fn min_singular_value(&self, params: &GfdmParams) -> Result<f64> {
        let a = modulation_matrix(params, self)?;
        let d = a.diagonalize();
        let k = params.k();
        Ok(d.blocks()
            .iter()
            .map(|b| {
                let mat = DMatrix::from_fn(k, k, |r, c| b[(r, c)]);
                mat.singular_values().min()
            })
            .fold(f64::INFINITY, f64::min))
    }
}

/// Compact modulation matrix: first block column `A_s[n, k] = g[n]·exp(j2πkn/K)`.
pub fn modulation_matrix(params: &GfdmParams, proto: &PrototypeFilter) -> Result<BlockCirculant> {
    let (k, n) = (params.k(), params.n());
    if proto.g.len() != n {
        return Err(Error::dims(format!("prototype length {n}"), proto.g.len()));
    }
    let a_s = CMat::from_fn(n, k, |row, col| {
        let phase = 2.0 * PI * ((col * row) % k) as f64 / k as f64;
        proto.g[row] * C64::from_polar(1.0, phase)
    });
    BlockCirculant::from_first_columns(&a_s, k)
}

/// Dense modulation matrix built column by column from `g_{k,m}`.
pub fn modulation_matrix_dense(params: &GfdmParams, proto: &PrototypeFilter) -> Result<CMat> {
    let (k, m, n) = (params.k(), params.m(), params.n());
    if proto.g.len() != n {
        return Err(Error::dims(format!("prototype length {n}"), proto.g.len()));
    }
    Ok(CMat::from_fn(n, n, |row, col| {
        let (sub, car) = (col / k, col % k);
        let shifted = proto.g[(row + n - sub * k) % n];
        let phase = 2.0 * PI * ((car * m * row) % n) as f64 / n as f64;
        shifted * C64::from_polar(1.0, phase)
    }))
}

/// One block of data symbols, `d[m·K + k] = d_{k,m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataBlock(pub Vec<C64>);

impl DataBlock {
    pub fn symbol(&self, k: usize, m: usize, subcarriers: usize) -> C64 {
        self.0[m * subcarriers + k]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }
}

/// `x = A·d`.
pub fn modulate(a: &BlockCirculant, d: &DataBlock) -> Result<Vec<C64>> {
    a.apply(&d.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    h: Vec<C64>,
    h_diag: Vec<C64>,
}

impl Channel {
    /// Circulant channel of block length `n`. Taps beyond `n` wrap around
    /// (circular convolution aliases lag `l` onto `l mod n`).
    pub fn from_taps(h: &[C64], n: usize) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::EmptyInput);
        }
        if n == 0 {
            return Err(Error::InvalidParameter("block length must be positive".into()));
        }
        let scale = (n as f64).sqrt();
        let h_diag = dft(&fold_taps(h, n), Direction::Forward)?
            .into_iter()
            .map(|v| v * scale)
            .collect();
        Ok(Self { h: h.to_vec(), h_diag })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_taps(&[C64::new(1.0, 0.0)], n).expect("n >= 1")
    }

    /// Random taps with an exponential power-delay profile, normalized to
    /// unit total power.
    pub fn exponential(len: usize, n: usize, seed: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyInput);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let decay = (len as f64 / 3.0).max(1.0);
        let mut h: Vec<C64> = (0..len)
            .map(|l| complex_gaussian(&mut rng) * (-(l as f64) / decay).exp().sqrt())
            .collect();
        let power = h.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in h.iter_mut() {
            *v /= power;
        }
        Self::from_taps(&h, n)
    }

    pub fn taps(&self) -> &[C64] {
        &self.h
    }

    /// Diagonal of `F_N·H·F_Nᴴ` (non-normalized DFT of the padded taps).
    pub fn h_diag(&self) -> &[C64] {
        &self.h_diag
    }

    pub fn n(&self) -> usize {
        self.h_diag.len()
    }

    /// Dense circulant matrix with the folded taps as first column.
    pub fn to_dense(&self) -> CMat {
        let n = self.n();
        let col = fold_taps(&self.h, n);
        CMat::from_fn(n, n, |r, c| col[(r + n - c) % n])
    }

    /// `y = H·x + noise`, via the frequency domain.
    pub fn apply(&self, x: &[C64], noise: &[C64]) -> Result<Vec<C64>> {
        let n = self.n();
        if x.len() != n || noise.len() != n {
            return Err(Error::dims(
                format!("length {n}"),
                format!("signal {}, noise {}", x.len(), noise.len()),
            ));
        }
        let plan = DftPlan::new(n)?;
        let mut buf = plan.transform(x, Direction::Forward)?;
        for (v, h) in buf.iter_mut().zip(&self.h_diag) {
            *v *= h;
        }
        plan.process(&mut buf, Direction::Inverse)?;
        Ok(buf.iter().zip(noise).map(|(a, b)| a + b).collect())
    }

    /// Short hex digest of the taps.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for v in &self.h {
            hasher.update(v.re.to_le_bytes());
            hasher.update(v.im.to_le_bytes());
        }
        hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Taps summed into `n` circular lags.
fn fold_taps(h: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::default(); n];
    for (l, v) in h.iter().enumerate() {
        out[l % n] += v;
    }
    out
}

/// Unit-variance circularly-symmetric complex Gaussian sample.
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

#[derive(Clone, Debug, PartialEq)]
pub enum Constellation {
    /// Unit-energy QPSK `(±1 ± j)/√2`.
    Qpsk,
    Custom(Vec<C64>),
}

impl Constellation {
    pub fn points(&self) -> Vec<C64> {
        match self {
            Constellation::Qpsk => {
                let a = std::f64::consts::FRAC_1_SQRT_2;
                vec![C64::new(a, a), C64::new(-a, a), C64::new(-a, -a), C64::new(a, -a)]
            }
            Constellation::Custom(p) => p.clone(),
        }
    }
}

pub fn draw_noise_with<R: Rng + ?Sized>(n: usize, sigma_n2: f64, rng: &mut R) -> Vec<C64> {
    if sigma_n2 == 0.0 {
        return vec![C64::default(); n];
    }
    let s = sigma_n2.sqrt();
    (0..n).map(|_| complex_gaussian(rng) * s).collect()
}

/// `w ~ CN(0, σ²·I_N)`, deterministic in `seed`.
pub fn draw_noise(params: &GfdmParams, seed: u64) -> Vec<C64> {
    draw_noise_with(params.n(), params.sigma_n2(), &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn draw_symbols_with<R: Rng + ?Sized>(n: usize, constellation: &Constellation, rng: &mut R) -> Result<DataBlock> {
    let points = constellation.points();
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty constellation".into()));
    }
    Ok(DataBlock(
        (0..n).map(|_| points[rng.random_range(0..points.len())]).collect(),
    ))
}

/// I.i.d. symbols drawn uniformly from `constellation`, deterministic in `seed`.
pub fn draw_symbols(params: &GfdmParams, constellation: &Constellation, seed: u64) -> Result<DataBlock> {
    draw_symbols_with(params.n(), constellation, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `key=value` parameter file. Blank lines and `#` comments are ignored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamFile {
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub alpha: Option<f64>,
    pub sigma_n2: Option<f64>,
    pub channel_len: Option<usize>,
    pub seed: Option<u64>,
}

impl ParamFile {
    pub fn parse(text: &str) -> Result<Self> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Parse(format!("invalid value `{v}` for `{key}`")))
        }
        let mut out = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "K" | "k" => out.k = Some(num(key, value)?),
                "M" | "m" => out.m = Some(num(key, value)?),
                "alpha" => out.alpha = Some(num(key, value)?),
                "sigma_n2" => out.sigma_n2 = Some(num(key, value)?),
                "channel_len" => out.channel_len = Some(num(key, value)?),
                "seed" => out.seed = Some(num(key, value)?),
                other => return Err(Error::Parse(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, m: usize, alpha: f64) -> GfdmParams {
        GfdmParams::new(k, m, 0.1, alpha).unwrap()
    }

    #[test]
    fn params_validated() {
        assert!(GfdmParams::new(2, 3, 0.1, 0.5).is_err());
        assert!(GfdmParams::new(4, 0, 0.1, 0.5).is_err());
        assert!(GfdmParams::new(4, 3, -1.0, 0.5).is_err());
        assert!(GfdmParams::new(4, 3, 0.1, 1.5).is_err());
        assert_eq!(GfdmParams::new(4, 3, 0.0, 0.0).unwrap().n(), 12);
    }

    #[test]
    fn zero_rolloff_is_flat_over_window() {
        let p = params(4, 3, 0.0);
        let proto = PrototypeFilter::build(&p).unwrap();
        let expected = 1.0 / (2.0 * 3.0f64).sqrt();
        let mut nonzero = 0;
        for (bin, v) in proto.g_freq().iter().enumerate() {
            if window_bins(0, 3, 12).any(|b| b == bin) {
                assert!((v.re - expected).abs() < 1e-15 && v.im == 0.0);
                nonzero += 1;
            } else {
                assert_eq!(*v, C64::default());
            }
        }
        assert_eq!(nonzero, 6);
    }

    #[test]
    fn prototype_has_unit_energy_and_exact_band_limit() {
        let p = params(8, 5, 0.5);
        let proto = PrototypeFilter::build(&p).unwrap();
        let e: f64 = proto.g().iter().map(|v| v.norm_sqr()).sum();
        assert!((e - 1.0).abs() < 1e-12);
        let window: Vec<usize> = window_bins(0, 5, 40).collect();
        let outside = proto
            .g_freq()
            .iter()
            .enumerate()
            .filter(|(b, _)| !window.contains(b))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        assert_eq!(outside, 0.0);
        assert!(proto.is_band_limited(5, 0.0));
    }

    #[test]
    fn nonzero_bins_bounded_by_two_m() {
        for &(k, m) in &[(3, 1), (4, 3), (8, 4), (5, 7)] {
            for &alpha in &[0.0, 0.3, 0.5, 1.0] {
                let proto = PrototypeFilter::build(&params(k, m, alpha)).unwrap();
                let count = proto.g_freq().iter().filter(|v| v.norm() > 0.0).count();
                assert!(count <= 2 * m, "K={k} M={m} alpha={alpha}: {count}");
            }
        }
    }

    #[test]
    fn singular_modulation_rejected_without_noise() {
        // A flat window with an even number of subcarriers makes the
        // modulation matrix singular.
        let p = GfdmParams::new(4, 3, 0.0, 0.0).unwrap();
        assert!(matches!(
            PrototypeFilter::build(&p),
            Err(Error::SingularModulation { .. })
        ));
        let p = GfdmParams::new(5, 3, 0.0, 0.5).unwrap();
        assert!(PrototypeFilter::build(&p).is_ok());
    }

    #[test]
    fn impulse_prototype_gives_unit_entries() {
        let p = params(4, 3, 0.5);
        let mut g = vec![C64::default(); 12];
        g[0] = C64::new(1.0, 0.0);
        let proto = PrototypeFilter::from_time_domain(&g).unwrap();
        let a = modulation_matrix_dense(&p, &proto).unwrap();
        for r in 0..12 {
            for c in 0..12 {
                let expected = if r == (c / 4) * 4 { 1.0 } else { 0.0 };
                assert!((a[(r, c)] - C64::new(expected, 0.0)).norm() < 1e-12, "({r},{c})");
            }
        }
    }

    #[test]
    fn channel_identity_and_delay() {
        let x: Vec<C64> = (0..6).map(|i| C64::new(i as f64, 1.0 - i as f64)).collect();
        let zero = vec![C64::default(); 6];
        let y = Channel::identity(6).apply(&x, &zero).unwrap();
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
        let delay = Channel::from_taps(&[C64::default(), C64::new(1.0, 0.0)], 6).unwrap();
        let y = delay.apply(&x, &zero).unwrap();
        for i in 0..6 {
            assert!((y[(i + 1) % 6] - x[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn long_channel_folds() {
        // Seven unit taps on a 6-sample block: lag 0 collects two of them.
        let ch = Channel::from_taps(&[C64::new(1.0, 0.0); 7], 6).unwrap();
        assert_eq!(ch.to_dense()[(0, 0)], C64::new(2.0, 0.0));
        assert_eq!(ch.to_dense()[(1, 0)], C64::new(1.0, 0.0));
        assert!(Channel::from_taps(&[], 6).is_err());
        assert!(Channel::from_taps(&[C64::new(1.0, 0.0)], 0).is_err());
    }

    #[test]
    fn exponential_channel_is_deterministic() {
        let a = Channel::exponential(4, 12, 9).unwrap();
        let b = Channel::exponential(4, 12, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        let p: f64 = a.taps().iter().map(|v| v.norm_sqr()).sum();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_and_qpsk_magnitudes() {
        let p = GfdmParams::new(4, 3, 0.0, 0.5).unwrap();
        assert!(draw_noise(&p, 1).iter().all(|v| *v == C64::default()));
        let d = draw_symbols(&p, &Constellation::Qpsk, 5).unwrap();
        assert!(d.as_slice().iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
        assert_eq!(d, draw_symbols(&p, &Constellation::Qpsk, 5).unwrap());
    }

    #[test]
    fn param_file_parses() {
        let text = "# system\nK=8\nM = 4\nalpha=0.5\nsigma_n2=0.1\nchannel_len=4\nseed=7\n";
        let pf = ParamFile::parse(text).unwrap();
        assert_eq!(pf.k, Some(8));
        assert_eq!(pf.m, Some(4));
        assert_eq!(pf.alpha, Some(0.5));
        assert_eq!(pf.sigma_n2, Some(0.1));
        assert_eq!(pf.channel_len, Some(4));
        assert_eq!(pf.seed, Some(7));
        assert!(ParamFile::parse("K=eight").is_err());
        assert!(ParamFile::parse("foo=1").is_err());
        assert!(ParamFile::parse("K 8").is_err());
    }
}
