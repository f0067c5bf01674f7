use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies the random stream of one trajectory.
///
/// The ChaCha key is built from `(seed, run, weight)` and the stream id is the
/// trajectory index, so every trajectory draws from its own sequence no matter
/// how the work is partitioned across threads. Within a stream the draws are
/// consumed in a fixed order: initial positions, initial momenta, then `n`
/// Gaussians per integration step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub run: u64,
    pub weight: u64,
    pub trajectory: u64,
}

const DOMAIN: u64 = 0x6e69_7362_2d73_7472; // "nisb-str"

impl StreamKey {
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.run.to_le_bytes());
        key[16..24].copy_from_slice(&self.weight.to_le_bytes());
        key[24..].copy_from_slice(&DOMAIN.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.trajectory);
        rng
    }
}

/// One RNG per trajectory of a batch.
pub struct NoiseStreams {
    rngs: Vec<ChaCha8Rng>,
}

impl NoiseStreams {
    /// Streams for trajectories `first .. first + count` of `(seed, run, weight)`.
    pub fn new(seed: u64, run: u64, weight: u64, first: usize, count: usize) -> Self {
        let rngs = (first..first + count)
            .map(|t| {
                StreamKey {
                    seed,
                    run,
                    weight,
                    trajectory: t as u64,
                }
                .rng()
            })
            .collect();
        Self { rngs }
    }

    pub fn len(&self) -> usize {
        self.rngs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rngs.is_empty()
    }

    pub(crate) fn get_mut(&mut self, trajectory: usize) -> &mut ChaCha8Rng {
        &mut self.rngs[trajectory]
    }
}
