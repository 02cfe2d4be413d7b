//! Counter-based random substreams.
//!
//! Every substream is a ChaCha8 generator whose key is derived from
//! `(seed, domain)` and whose 64-bit stream id is the substream index, so a
//! year or replicate always sees the same numbers no matter which other
//! years or replicates are generated, or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SubstreamRng = ChaCha8Rng;

/// What a substream index counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    /// Calendar year of a simulated catalog.
    Year,
    /// Replicate number of a fixed-year ensemble.
    Replicate,
    /// Catalog number of a multi-catalog study.
    Catalog,
}

impl StreamDomain {
    fn tag(self) -> u64 {
        match self {
            StreamDomain::Year => 0x5945_4152,
            StreamDomain::Replicate => 0x5245_504c,
            StreamDomain::Catalog => 0x4341_5441,
        }
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn substream(seed: u64, domain: StreamDomain, index: u64) -> SubstreamRng {
    let key = mix64(seed ^ mix64(domain.tag()));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Substream for a calendar year (negative years are valid keys).
pub fn year_stream(seed: u64, year: i64) -> SubstreamRng {
    substream(seed, StreamDomain::Year, year as u64)
}

/// Derive a child seed, e.g. the seed of catalog `index` in a replicate study.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ StreamDomain::Catalog.tag()) ^ index)
}
