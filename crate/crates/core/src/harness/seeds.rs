//! Seed derivation: every random stream in an experiment is a pure
//! function of the master seed and the coordinates of the work item, so
//! drops can run in any order — or in parallel — without changing any
//! result, and adding an algorithm or threshold to a run never perturbs
//! the rows of the others.

/// SplitMix64 finalizer: a bijective avalanche mix.
fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Folds `salt` into `seed`; chaining `mix` over a tuple of components
/// gives a deterministic seed for that tuple.
fn mix(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}

const DROP_DOMAIN: u64 = 0x44524F50; // "DROP"
const SOLVER_DOMAIN: u64 = 0x534F4C56; // "SOLV"

/// Seed of drop number `drop` under `master`: drives user positions,
/// shadowing and fading of that drop.
pub fn drop_seed(master: u64, drop: u64) -> u64 {
    mix(mix(master, DROP_DOMAIN), drop)
}

/// Seed of one algorithm run on one drop. The algorithm's stable numeric
/// id, the effective cooperation threshold and the edge SNR are folded in
/// (floating-point values by their bit patterns), so each cell of the
/// experiment grid owns an independent stream.
pub fn solver_seed(
    master: u64,
    drop: u64,
    algorithm_id: u64,
    threshold_db: f64,
    edge_snr_db: f64,
) -> u64 {
    let mut seed = mix(mix(master, SOLVER_DOMAIN), drop);
    seed = mix(seed, algorithm_id);
    seed = mix(seed, threshold_db.to_bits());
    mix(seed, edge_snr_db.to_bits())
}
