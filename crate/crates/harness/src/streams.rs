//! RNG stream layout. Each experiment draws from `Seed::rng(stream)` with a
//! stream id built from a domain tag and up to two indices, so results do not
//! depend on scheduling order.

pub const EVOLUTION: u8 = 1;
pub const BASIN: u8 = 2;
pub const BER_WATERMARK: u8 = 3;
pub const BER_PADDING: u8 = 4;
pub const BER_NOISE: u8 = 5;
pub const CORPUS: u8 = 6;
pub const CLI_WATERMARK: u8 = 7;

/// `tag` in the top byte, `a` in the next 28 bits, `b` in the low 28 bits.
pub fn stream(tag: u8, a: usize, b: usize) -> u64 {
    const MASK: u64 = (1 << 28) - 1;
    (u64::from(tag) << 56) | ((a as u64 & MASK) << 28) | (b as u64 & MASK)
}
