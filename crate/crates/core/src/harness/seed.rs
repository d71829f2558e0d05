/// Odd multiplier applied to the replication index.
pub const REPLICATION_MIX: u64 = 0x9E37_79B9_7F4A_7C15;
/// Odd multiplier applied to the grid index.
pub const GRID_MIX: u64 = 0xC2B2_AE3D_27D4_EB4F;

/// SplitMix64 output function; a bijection on `u64`.
fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `replication` at grid point `grid_index`:
/// `finalize(master ⊕ replication·P₁ ⊕ grid_index·P₂)`.
pub fn derive_replication_seed(master: u64, replication: u64, grid_index: u64) -> u64 {
    splitmix64_finalize(
        master ^ replication.wrapping_mul(REPLICATION_MIX) ^ grid_index.wrapping_mul(GRID_MIX),
    )
}
