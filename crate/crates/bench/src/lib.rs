//! Shared fixtures for the benchmarks.

use mprk_core::{LinearPdsMatrix, StateVector};

/// Linear PDS on a ring of `n` species with rate `k + 1` from species `k`
/// to its right neighbour and rate `1` to its left neighbour.
pub fn ring_system(n: usize) -> LinearPdsMatrix {
    assert!(n >= 3);
    let mut entries = vec![0.0; n * n];
    for k in 0..n {
        let right = (k + 1) % n;
        let left = (k + n - 1) % n;
        let fwd = (k + 1) as f64;
        entries[right * n + k] = fwd;
        entries[left * n + k] = 1.0;
        entries[k * n + k] = -(fwd + 1.0);
    }
    LinearPdsMatrix::from_rows(n, &entries).expect("ring matrix is a valid linear PDS")
}

/// `(1, 2, ..., n) / n`.
pub fn ramp_state(n: usize) -> StateVector {
    StateVector::new((1..=n).map(|k| k as f64 / n as f64).collect()).expect("finite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_is_valid() {
        let a = ring_system(5);
        assert_eq!(a.dimension(), 5);
        assert_eq!(ramp_state(5).len(), 5);
    }
}
