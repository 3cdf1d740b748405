//! Reproducible uniform streams for parallel Monte Carlo.
//!
//! Every stream is a ChaCha8 keystream. The 256-bit key is expanded from the
//! master seed (`ChaCha8Rng::seed_from_u64`) and the 64-bit ChaCha stream
//! (nonce) word is the stream index, so a draw is a pure function of
//! `(master_seed, stream_index, position)`. The generator is counter based:
//! samples can be evaluated on any thread, in any order, and reproduce the
//! same numbers on every platform.
//!
//! Uniforms are built from the upper 53 bits of one 64-bit word,
//! `k * 2^-53`; the single value `k = 0` is rejected and redrawn, so every
//! draw lies in the open interval `(0, 1)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RandomStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
    counter: u64,
}

impl RandomStream {
    pub fn derive(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
            counter: 0,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Number of 64-bit words consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Next `tau ~ U(0, 1)`, strictly inside the open interval.
    pub fn draw_tau(&mut self) -> f64 {
        loop {
            let bits = self.rng.next_u64() >> 11;
            self.counter += 1;
            if bits != 0 {
                return bits as f64 * TWO_POW_M53;
            }
        }
    }
}

/// SplitMix64 finalizer. Used to derive independent master seeds for
/// refinement levels and re-seed attempts.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
