//! Counter-based random streams.
//!
//! Every draw is a pure function of `(seed, stream, index, counter)`, so a
//! slot of a simulation can be replayed in isolation and independent slots
//! never share state. The mixer is the SplitMix64 finaliser.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Logical purpose of a random stream. Each purpose gets its own key so that,
/// for example, adding a sleep decision never shifts the symbol draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Harvest = 1,
    Sleep = 2,
    Symbol = 3,
    Processing = 4,
    Noise = 5,
}

/// A random stream keyed on `(seed, stream, index)`.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: Stream, index: u64) -> Self {
        let base = mix64(mix64(seed) ^ (stream as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
        let key = mix64(base ^ index.wrapping_mul(GOLDEN));
        Self { key, counter: 0 }
    }
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let out = mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter = self.counter.wrapping_add(1);
        out
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// The random sources available to one slot of a simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotRng {
    pub seed: u64,
    pub slot: u64,
}

impl SlotRng {
    pub fn new(seed: u64, slot: u64) -> Self {
        Self { seed, slot }
    }

    pub fn stream(&self, stream: Stream) -> CounterRng {
        CounterRng::new(self.seed, stream, self.slot)
    }
}
