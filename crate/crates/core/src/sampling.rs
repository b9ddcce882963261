//! Seeded Haar-random pure states.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, PureStateVector};

/// Haar-random pure state of dimension `dim`: normalized i.i.d. complex Gaussian amplitudes.
pub fn haar_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureStateVector {
    loop {
        let amps = (0..dim)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(v) = PureStateVector::new(amps) {
            return v;
        }
    }
}

/// `count` Haar-random qubit states from a ChaCha8 stream seeded with `seed`.
pub fn haar_pure_qubits(count: usize, seed: u64) -> Vec<PureStateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| haar_pure_state(2, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_for_a_seed() {
        assert_eq!(haar_pure_qubits(5, 42), haar_pure_qubits(5, 42));
        assert_ne!(haar_pure_qubits(5, 42), haar_pure_qubits(5, 43));
    }

    #[test]
    fn bloch_vectors_average_to_zero() {
        let states = haar_pure_qubits(4000, 1);
        let mean_z: f64 = states
            .iter()
            .map(|s| s.amplitudes()[0].norm_sqr() - s.amplitudes()[1].norm_sqr())
            .sum::<f64>()
            / states.len() as f64;
        // std of the mean is 1/sqrt(3 * 4000) ≈ 0.009
        assert!(mean_z.abs() < 0.04);
    }
}
