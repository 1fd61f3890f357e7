#![allow(dead_code)]

use mprk_core::{LinearPdsMatrix, SchemeParams, Variant};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on the half-open interval `(lo, hi]`.
pub fn open_closed(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    hi - rng.gen::<f64>() * (hi - lo)
}

pub fn random_variant(rng: &mut impl Rng) -> Variant {
    if rng.gen::<bool>() {
        Variant::ConservativeStages
    } else {
        Variant::NonConservativeStages
    }
}

pub fn random_params(rng: &mut impl Rng, alpha_lo: f64, alpha_hi: f64) -> SchemeParams {
    let alpha = rng.gen_range(alpha_lo..=alpha_hi);
    SchemeParams::new(alpha, random_variant(rng)).unwrap()
}

/// Random positive, conservative linear PDS matrix; about a third of the
/// off-diagonal rates are zero.
pub fn random_linear_pds(rng: &mut impl Rng, n: usize, max_rate: f64) -> LinearPdsMatrix {
    let mut entries = vec![0.0; n * n];
    for j in 0..n {
        let mut col_sum = 0.0;
        for i in (0..n).filter(|&i| i != j) {
            if rng.gen_range(0..3) > 0 {
                let v = rng.gen_range(0.0..max_rate);
                entries[i * n + j] = v;
                col_sum += v;
            }
        }
        entries[j * n + j] = -col_sum;
    }
    LinearPdsMatrix::from_rows(n, &entries).unwrap()
}

pub fn rel_diff(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}
