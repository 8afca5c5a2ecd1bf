//! Splittable random-number streams.
//!
//! Every stochastic routine in this crate draws from a dedicated substream
//! of a ChaCha8 generator: shot `i` of a sampling run uses
//! `substream(seed, i)`, and a Monte-Carlo cycle sequence uses one substream
//! per independent sequence. Results therefore do not depend on execution
//! order, chunking, or parallel schedule.

use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Independent generator for substream `index` of the given seed.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substream_is_reproducible() {
        let a: Vec<f64> = (0..8).map(|_| substream(7, 3).gen()).collect();
        let b: Vec<f64> = (0..8).map(|_| substream(7, 3).gen()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn substreams_differ_by_index_and_seed() {
        let base: f64 = substream(7, 0).gen();
        assert_ne!(base, substream(7, 1).gen::<f64>());
        assert_ne!(base, substream(8, 0).gen::<f64>());
    }

    #[test]
    fn substream_state_is_independent_of_creation_order() {
        let mut early = substream(42, 5);
        let _ = substream(42, 6); // interleaved creation must not matter
        let from_early: f64 = early.gen();
        assert_eq!(from_early, substream(42, 5).gen::<f64>());
    }
}
