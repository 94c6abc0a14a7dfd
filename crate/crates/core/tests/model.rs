mod common;

use std::f64::consts::PI;

use common::*;
use gfdm_lmmse::gfdm::{
    draw_noise_with, draw_symbols_with, modulate, modulation_matrix, modulation_matrix_dense, window_bins,
    Constellation, DataBlock, ParamFile,
};
use gfdm_lmmse::{BlockCirculant, Channel, Error, GfdmParams, PrototypeFilter, C64};
use proptest::prelude::*;

fn system(k: usize, m: usize, alpha: f64) -> (GfdmParams, PrototypeFilter) {
    let p = GfdmParams::new(k, m, 0.1, alpha).unwrap();
    let proto = PrototypeFilter::build(&p).unwrap();
    (p, proto)
}

/// `x[n] = Σ_k Σ_m d_{k,m}·g[(n − mK) mod N]·exp(j2πkn/K)`.
fn modulate_by_sum(g: &[C64], d: &[C64], k: usize, m: usize) -> Vec<C64> {
    let n = k * m;
    (0..n)
        .map(|t| {
            let mut acc = C64::default();
            for sub in 0..m {
                for car in 0..k {
                    let tone = C64::from_polar(1.0, 2.0 * PI * (car * t) as f64 / k as f64);
                    acc += d[sub * k + car] * g[(t + n - sub * k) % n] * tone;
                }
            }
            acc
        })
        .collect()
}

#[test]
fn compact_modulation_matches_dense() {
    for k in 3..=8 {
        for m in 1..=6 {
            let (p, proto) = system(k, m, 0.5);
            let compact = modulation_matrix(&p, &proto).unwrap().to_dense();
            let dense = modulation_matrix_dense(&p, &proto).unwrap();
            assert!(compact.sub(&dense).max_abs() <= 1e-12, "K={k} M={m}");
        }
    }
}

#[test]
fn modulation_matrix_is_block_circulant() {
    let (p, proto) = system(4, 5, 0.3);
    let a = modulation_matrix_dense(&p, &proto).unwrap();
    let bc = BlockCirculant::from_dense(&a, 4).unwrap();
    assert_eq!(bc.m(), 5);
    assert!(bc.to_dense().sub(&a).max_abs() <= 1e-15);
}

#[test]
fn modulation_columns_occupy_two_subcarriers() {
    let (k, m) = (6, 4);
    let n = k * m;
    let (p, proto) = system(k, m, 0.5);
    let a = modulation_matrix_dense(&p, &proto).unwrap();
    for col in 0..k {
        let spectrum = naive_dft(&a.column(col), -1.0);
        let inside: Vec<usize> = window_bins(col * m, m, n).collect();
        let peak = spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (bin, v) in spectrum.iter().enumerate() {
            if !inside.contains(&bin) {
                assert!(v.norm() <= 1e-12 * peak, "col {col} bin {bin}");
            }
        }
    }
}

#[test]
fn modulate_matches_double_sum() {
    let mut r = rng(20);
    let (k, m) = (5, 4);
    let (p, proto) = system(k, m, 0.5);
    let a = modulation_matrix(&p, &proto).unwrap();
    let d = DataBlock(cvec(&mut r, k * m));
    let x = modulate(&a, &d).unwrap();
    assert!(max_abs_diff(&x, &modulate_by_sum(proto.g(), &d.0, k, m)) <= 1e-12);
}

#[test]
fn unit_symbol_gives_prototype() {
    let (p, proto) = system(4, 3, 0.5);
    let a = modulation_matrix(&p, &proto).unwrap();
    let mut d = vec![C64::default(); 12];
    d[0] = C64::new(1.0, 0.0);
    assert!(max_abs_diff(&modulate(&a, &DataBlock(d)).unwrap(), proto.g()) <= 1e-15);
    let zero = modulate(&a, &DataBlock(vec![C64::default(); 12])).unwrap();
    assert!(zero.iter().all(|v| *v == C64::default()));
}

#[test]
fn data_block_indexing() {
    let d = DataBlock((0..12).map(|i| C64::new(i as f64, 0.0)).collect());
    assert_eq!(d.symbol(2, 1, 4), C64::new(6.0, 0.0));
}

#[test]
fn channel_matches_circular_convolution() {
    let mut r = rng(21);
    let taps = cvec(&mut r, 4);
    let ch = Channel::from_taps(&taps, 12).unwrap();
    let x = cvec(&mut r, 12);
    let y = ch.apply(&x, &[C64::default(); 12]).unwrap();
    let conv: Vec<C64> = (0..12)
        .map(|t| (0..4).map(|l| taps[l] * x[(t + 12 - l) % 12]).sum())
        .collect();
    assert!(max_abs_diff(&y, &conv) <= 1e-12);
    assert!(max_abs_diff(&ch.to_dense().mul_vec(&x), &conv) <= 1e-12);
    let unnormalized: Vec<C64> = {
        let mut padded = taps.clone();
        padded.resize(12, C64::default());
        naive_dft(&padded, -1.0).into_iter().map(|v| v * 12f64.sqrt()).collect()
    };
    assert!(max_abs_diff(ch.h_diag(), &unnormalized) <= 1e-12);
}

#[test]
fn long_channel_wraps_around_block() {
    let mut r = rng(26);
    let taps = cvec(&mut r, 16);
    let ch = Channel::from_taps(&taps, 12).unwrap();
    let x = cvec(&mut r, 12);
    // Circular convolution over the block with every tap at lag l mod 12.
    let conv: Vec<C64> = (0..12)
        .map(|t| (0..16).map(|l| taps[l] * x[(t + 48 - l) % 12]).sum())
        .collect();
    assert!(max_abs_diff(&ch.apply(&x, &[C64::default(); 12]).unwrap(), &conv) <= 1e-12);
    assert!(max_abs_diff(&ch.to_dense().mul_vec(&x), &conv) <= 1e-12);
    assert_eq!(ch.taps().len(), 16);
}

#[test]
fn channel_adds_noise_linearly() {
    let mut r = rng(22);
    let ch = Channel::exponential(3, 10, 1).unwrap();
    let (x1, x2, w) = (cvec(&mut r, 10), cvec(&mut r, 10), cvec(&mut r, 10));
    let z = vec![C64::default(); 10];
    let c = C64::new(0.3, -1.2);
    let mix: Vec<C64> = x1.iter().zip(&x2).map(|(a, b)| a + c * b).collect();
    let lhs = ch.apply(&mix, &w).unwrap();
    let (y1, y2) = (ch.apply(&x1, &z).unwrap(), ch.apply(&x2, &z).unwrap());
    let rhs: Vec<C64> = (0..10).map(|i| y1[i] + c * y2[i] + w[i]).collect();
    assert!(max_abs_diff(&lhs, &rhs) <= 1e-12);
}

#[test]
fn channel_validation_and_identity() {
    assert!(matches!(Channel::from_taps(&[], 4), Err(Error::EmptyInput)));
    let id = Channel::identity(6);
    assert!(id.h_diag().iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-15));
    let ch = Channel::exponential(16, 32, 9).unwrap();
    assert!((ch.taps().iter().map(|v| v.norm_sqr()).sum::<f64>() - 1.0).abs() <= 1e-12);
    assert_eq!(ch.hash(), Channel::exponential(16, 32, 9).unwrap().hash());
    assert_ne!(ch.hash(), Channel::exponential(16, 32, 10).unwrap().hash());
}

#[test]
fn noise_has_requested_variance() {
    let mut r = rng(23);
    let sigma = 0.37;
    let w = draw_noise_with(100_000, sigma, &mut r);
    let var = w.iter().map(|v| v.norm_sqr()).sum::<f64>() / w.len() as f64;
    assert!((var / sigma - 1.0).abs() <= 0.02, "{var}");
    let re = w.iter().map(|v| v.re * v.re).sum::<f64>() / w.len() as f64;
    assert!((re / (sigma / 2.0) - 1.0).abs() <= 0.02);
    assert!(draw_noise_with(8, 0.0, &mut r).iter().all(|v| *v == C64::default()));
}

#[test]
fn symbols_are_white_with_unit_power() {
    let mut r = rng(24);
    let n = 6;
    let blocks = 20_000;
    let mut cov = vec![C64::default(); n * n];
    for _ in 0..blocks {
        let d = draw_symbols_with(n, &Constellation::Qpsk, &mut r).unwrap();
        for i in 0..n {
            for j in 0..n {
                cov[i * n + j] += d.0[i] * d.0[j].conj();
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let c = cov[i * n + j] / blocks as f64;
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((c - C64::new(target, 0.0)).norm() <= 0.03, "({i},{j}) {c}");
        }
    }
    assert!(draw_symbols_with(3, &Constellation::Custom(vec![]), &mut r).is_err());
}

#[test]
fn band_limit_holds_on_grid() {
    for k in [3, 4, 8, 16] {
        for m in [1, 2, 3, 4, 5] {
            for alpha in [0.0, 0.5, 1.0] {
                let (p, proto) = system(k, m, alpha);
                assert!(proto.is_band_limited(m, 1e-12), "K={k} M={m} a={alpha}");
                let e: f64 = proto.g().iter().map(|v| v.norm_sqr()).sum();
                assert!((e - 1.0).abs() <= 1e-12);
                assert_eq!(proto.g().len(), p.n());
            }
        }
    }
}

#[test]
fn time_domain_prototype_round_trip() {
    let mut r = rng(25);
    let g = cvec(&mut r, 12);
    let proto = PrototypeFilter::from_time_domain(&g).unwrap();
    assert!(!proto.is_band_limited(3, 1e-12));
    assert!(PrototypeFilter::from_time_domain(&[C64::default(); 4]).is_err());
}

#[test]
fn singular_modulation_rejected_without_noise() {
    // Even K with a flat or even-M symmetric spectrum makes an eigen-block singular.
    for (k, m, alpha) in [(4, 3, 0.0), (4, 4, 0.5)] {
        let p = GfdmParams::new(k, m, 0.0, alpha).unwrap();
        assert!(matches!(
            PrototypeFilter::build(&p),
            Err(Error::SingularModulation { .. })
        ));
        assert!(PrototypeFilter::build(&p.with_sigma_n2(0.1).unwrap()).is_ok());
    }
    let ok = GfdmParams::new(5, 3, 0.0, 0.5).unwrap();
    let proto = PrototypeFilter::build(&ok).unwrap();
    assert!(proto.min_singular_value(&ok).unwrap() > 1e-8);
}

#[test]
fn param_file_parsing() {
    let f = ParamFile::parse("# system\nK = 8\nm=4\nalpha=0.5 # rolloff\nsigma_n2=1e-3\n\nchannel_len=4\nseed=7\n")
        .unwrap();
    assert_eq!(f.k, Some(8));
    assert_eq!(f.m, Some(4));
    assert_eq!(f.alpha, Some(0.5));
    assert_eq!(f.sigma_n2, Some(1e-3));
    assert_eq!(f.channel_len, Some(4));
    assert_eq!(f.seed, Some(7));
    assert!(ParamFile::parse("K=x").is_err());
    assert!(ParamFile::parse("Q=1").is_err());
    assert!(ParamFile::parse("K 8").is_err());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    std::fs::write(&path, "M=3\n").unwrap();
    assert_eq!(ParamFile::load(&path).unwrap().m, Some(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn modulation_is_linear(k in 3usize..=6, m in 1usize..=5, seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let (p, proto) = system(k, m, 0.5);
        let a = modulation_matrix(&p, &proto).unwrap();
        let mut r = rng(seed);
        let n = k * m;
        let (d1, d2) = (cvec(&mut r, n), cvec(&mut r, n));
        let c = C64::new(re, im);
        let mix = DataBlock(d1.iter().zip(&d2).map(|(a, b)| a + c * b).collect());
        let x1 = modulate(&a, &DataBlock(d1)).unwrap();
        let x2 = modulate(&a, &DataBlock(d2)).unwrap();
        let expected: Vec<C64> = x1.iter().zip(&x2).map(|(a, b)| a + c * b).collect();
        prop_assert!(max_abs_diff(&modulate(&a, &mix).unwrap(), &expected) <= 1e-12);
    }

    #[test]
    fn channel_is_circulant(len in 1usize..=12, seed in any::<u64>()) {
        let ch = Channel::exponential(len, 12, seed).unwrap();
        let h = ch.to_dense();
        for r in 0..12 {
            for c in 0..12 {
                prop_assert_eq!(h[((r + 1) % 12, (c + 1) % 12)], h[(r, c)]);
            }
        }
    }
}
