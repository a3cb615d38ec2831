//! Deterministic point streams and the counter-based key scheme that assigns
//! one stream to every (phase, iteration, bidder, control point).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sobol::SobolSequence;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RngKind {
    Sobol,
    Pseudo,
}

impl std::str::FromStr for RngKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sobol" => Ok(RngKind::Sobol),
            "pseudo" => Ok(RngKind::Pseudo),
            _ => Err(crate::Error::Config(format!("unknown rng `{s}` (expected sobol or pseudo)"))),
        }
    }
}

pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of counters into a root seed.
pub fn derive_key(seed: u64, words: &[u64]) -> u64 {
    words.iter().fold(splitmix64(seed), |h, &w| splitmix64(h ^ w))
}

/// A reproducible sequence of points in the unit hypercube.
///
/// Sobol streams start at index `skip` and may carry a random digital shift
/// (XOR of every coordinate with a fixed 32-bit mask), which keeps the dyadic
/// stratification while decorrelating streams that share indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleStream {
    pub kind: RngKind,
    pub dimension: usize,
    pub skip: u64,
    pub seed: u64,
    pub shifted: bool,
}

impl SampleStream {
    pub fn sobol(dimension: usize, skip: u64) -> Result<Self> {
        SobolSequence::new(dimension)?;
        Ok(SampleStream { kind: RngKind::Sobol, dimension, skip, seed: 0, shifted: false })
    }

    pub fn pseudo(dimension: usize, seed: u64) -> Self {
        SampleStream { kind: RngKind::Pseudo, dimension, skip: 0, seed, shifted: false }
    }

    /// The stream owned by `key`: a digitally shifted Sobol stream or a
    /// pseudo-random stream seeded by the key.
    pub fn keyed(kind: RngKind, dimension: usize, key: u64) -> Result<Self> {
        Ok(match kind {
            RngKind::Sobol => SampleStream { seed: key, shifted: true, ..SampleStream::sobol(dimension, 0)? },
            RngKind::Pseudo => SampleStream::pseudo(dimension, key),
        })
    }

    /// First `n` points, row-major (`n × dimension`).
    pub fn generate(&self, n: usize) -> Result<Vec<f64>> {
        let d = self.dimension;
        let mut out = vec![0.0; n * d];
        match self.kind {
            RngKind::Sobol => {
                let seq = SobolSequence::new(d)?;
                let shift: Vec<u32> = (0..d as u64)
                    .map(|k| if self.shifted { derive_key(self.seed, &[k]) as u32 } else { 0 })
                    .collect();
                let mut bits = vec![0u32; d];
                for (i, row) in out.chunks_exact_mut(d).enumerate() {
                    seq.point_bits(self.skip + i as u64, &mut bits);
                    for ((o, &b), &s) in row.iter_mut().zip(&bits).zip(&shift) {
                        *o = f64::from(b ^ s) / 4_294_967_296.0;
                    }
                }
            }
            RngKind::Pseudo => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                for o in out.iter_mut() {
                    *o = rng.gen::<f64>();
                }
            }
        }
        Ok(out)
    }
}
