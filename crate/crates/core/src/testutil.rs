//! Shared fixtures for unit tests: hand-built toy instances with known
//! closed-form answers, plus deterministic random instances.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::feedback::{mask_csi, relative_threshold, CooperationMap, MaskedCsi};
use crate::metrics::Precoder;
use crate::scenario::{draw_drop, ChannelRealization, Scenario};

/// Two base stations, two single-antenna users, unit-real channels:
/// `B_0 = {0}`, `B_1 = {0, 1}`, so base station 1 is unknown at user 0.
/// Noise power 0.5, per-antenna budget 4.
pub(crate) fn toy_two_user() -> (ChannelRealization, MaskedCsi) {
    let mut h = BTreeMap::new();
    h.insert((0, 0), vec![Complex64::new(1.0, 0.0)]);
    h.insert((1, 0), vec![Complex64::new(0.3, 0.0)]);
    h.insert((0, 1), vec![Complex64::new(0.8, 0.0)]);
    h.insert((1, 1), vec![Complex64::new(1.2, 0.0)]);
    let mut lambda_sq = BTreeMap::new();
    lambda_sq.insert((0, 0), 1.0);
    lambda_sq.insert((1, 0), 0.25);
    lambda_sq.insert((0, 1), 0.64);
    lambda_sq.insert((1, 1), 1.44);
    let realization = ChannelRealization {
        num_bs: 2,
        num_users: 2,
        n_t: 1,
        bs_positions: vec![[0.0, 0.0], [1.0, 0.0]],
        user_positions: vec![[0.0, 0.0], [1.0, 0.0]],
        h,
        lambda_sq,
        seed: 0,
    };
    let serving = vec![
        [0].into_iter().collect(),
        [0, 1].into_iter().collect(),
    ];
    let coop = CooperationMap::from_serving_sets(serving, 2, 3.0).unwrap();
    let mut known = BTreeMap::new();
    for (b, u) in coop.links() {
        known.insert((b, u), realization.h[&(b, u)].clone());
    }
    let masked = MaskedCsi {
        num_bs: 2,
        num_users: 2,
        n_t: 1,
        known,
        lambda_sq: realization.lambda_sq.clone(),
        coop,
        noise_power: 0.5,
        per_antenna_power: 4.0,
        weights: vec![1.0, 1.0],
    };
    (realization, masked)
}

/// One base station serving one single-antenna user over channel `h`,
/// with noise power `n0` and per-antenna budget `p`. The capacity-achieving
/// SINR is `p * |h|^2 / n0`.
pub(crate) fn single_user(h: Complex64, n0: f64, p: f64) -> (ChannelRealization, MaskedCsi) {
    let mut channels = BTreeMap::new();
    channels.insert((0, 0), vec![h]);
    let mut lambda_sq = BTreeMap::new();
    lambda_sq.insert((0, 0), h.norm_sqr());
    let realization = ChannelRealization {
        num_bs: 1,
        num_users: 1,
        n_t: 1,
        bs_positions: vec![[0.0, 0.0]],
        user_positions: vec![[0.0, 0.0]],
        h: channels.clone(),
        lambda_sq: lambda_sq.clone(),
        seed: 0,
    };
    let coop = CooperationMap::full(1, 1);
    let masked = MaskedCsi {
        num_bs: 1,
        num_users: 1,
        n_t: 1,
        known: channels,
        lambda_sq,
        coop,
        noise_power: n0,
        per_antenna_power: p,
        weights: vec![1.0],
    };
    (realization, masked)
}

/// Deterministic strictly feasible precoder on the cooperation support,
/// scaled so the loudest antenna sits at 90 % of the budget.
pub(crate) fn random_precoder(masked: &MaskedCsi, seed: u64) -> Precoder {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut precoder = Precoder::zero(&masked.coop, masked.n_t);
    for (b, u) in masked.coop.links() {
        let vector: Vec<Complex64> = (0..masked.n_t)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        precoder.set(b, u, vector).unwrap();
    }
    let loudest = precoder.max_antenna_power();
    precoder.scale((0.9 * masked.per_antenna_power / loudest).sqrt());
    precoder
}

/// A drawn instance of the reference cluster masked at `threshold_db`.
pub(crate) fn masked_instance(
    n_t: usize,
    seed: u64,
    threshold_db: f64,
) -> (Scenario, ChannelRealization, MaskedCsi) {
    let scenario = Scenario::small_cluster(n_t);
    let drop = draw_drop(&scenario, seed);
    let map = relative_threshold(&drop, threshold_db).unwrap();
    let masked = mask_csi(&scenario, &drop, &map).unwrap();
    (scenario, drop, masked)
}
