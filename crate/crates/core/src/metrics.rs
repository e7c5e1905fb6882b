//! Precoders, SINR models, rates and MSE quantities.
//!
//! Two SINR notions coexist. The *true* SINR evaluates a precoder against the
//! actual channel realization. The *design* SINR is what an optimiser can
//! compute from masked CSI; it comes in four flavours ([`SinrMode`])
//! differing in how interference from unknown links is modelled.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::feedback::{CooperationMap, MaskedCsi};
use crate::scenario::ChannelRealization;

/// Relative headroom allowed on the per-antenna power check, absorbing
/// interior-point feasibility tolerances.
pub const POWER_TOLERANCE: f64 = 1e-6;

/// How a design treats interference from links outside the cooperation map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SinrMode {
    /// Full channel knowledge. On a full cooperation map every interfering
    /// link is known and this equals the true SINR; on limited maps the
    /// unknown links simply do not appear, which coincides with
    /// [`SinrMode::LimitedZero`].
    Full,
    /// Unknown interference is ignored (treated as zero).
    LimitedZero,
    /// Unknown interference is upper-bounded through the long-term gains:
    /// each interferer `i` contributes `|B_i \ B_u|` times the sum of
    /// `lambda_sq * ||w||^2` over its unknown links. Pessimistic: the true
    /// mean interference never exceeds it.
    LimitedLambda,
    /// Unknown channel vectors are replaced by the deterministic surrogate
    /// `lambda * (1, ..., 1)` inside the full-CSI expression.
    LimitedNaive,
}

impl SinrMode {
    /// Token used in CSV output and configuration files.
    pub fn token(&self) -> &'static str {
        match self {
            SinrMode::Full => "full",
            SinrMode::LimitedZero => "limited_zero",
            SinrMode::LimitedLambda => "limited_lambda",
            SinrMode::LimitedNaive => "limited_naive",
        }
    }
}

/// Transmit precoder: one length-`n_t` weight vector per active link.
///
/// Only links inside some cooperation map are ever stored; a zero vector on
/// an active link is fine, a vector on an inactive link is a support
/// violation.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    n_t: usize,
    weights: BTreeMap<(usize, usize), Vec<Complex64>>,
}

impl Precoder {
    /// All-zero precoder on the support of `map`.
    pub fn zero(map: &CooperationMap, n_t: usize) -> Self {
        let mut weights = BTreeMap::new();
        for (b, u) in map.links() {
            weights.insert((b, u), vec![Complex64::new(0.0, 0.0); n_t]);
        }
        Precoder { n_t, weights }
    }

    /// Wraps explicit per-link weight vectors, checking their lengths.
    pub fn from_weights(
        weights: BTreeMap<(usize, usize), Vec<Complex64>>,
        n_t: usize,
    ) -> Result<Self> {
        for ((b, u), vector) in &weights {
            if vector.len() != n_t {
                return Err(Error::Dimension(format!(
                    "weight vector at (bs {b}, user {u}) has length {}, expected {n_t}",
                    vector.len()
                )));
            }
        }
        Ok(Precoder { n_t, weights })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn get(&self, bs: usize, user: usize) -> Option<&[Complex64]> {
        self.weights.get(&(bs, user)).map(Vec::as_slice)
    }

    pub fn set(&mut self, bs: usize, user: usize, vector: Vec<Complex64>) -> Result<()> {
        if vector.len() != self.n_t {
            return Err(Error::Dimension(format!(
                "weight vector at (bs {bs}, user {user}) has length {}, expected {}",
                vector.len(),
                self.n_t
            )));
        }
        self.weights.insert((bs, user), vector);
        Ok(())
    }

    /// Active links in deterministic `(bs, user)` order.
    pub fn links(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<Complex64>)> {
        self.weights.iter()
    }

    /// Errors if any stored link lies outside `map`.
    pub fn validate_support(&self, map: &CooperationMap) -> Result<()> {
        for &(b, u) in self.weights.keys() {
            if u >= map.num_users() || !map.contains(b, u) {
                return Err(Error::SupportViolation { bs: b, user: u });
            }
        }
        Ok(())
    }

    /// Power radiated by antenna `antenna` of base station `bs`, summed over
    /// the users it serves.
    pub fn antenna_power(&self, bs: usize, antenna: usize) -> f64 {
        self.weights
            .iter()
            .filter(|((b, _), _)| *b == bs)
            .map(|(_, vector)| vector[antenna].norm_sqr())
            .sum()
    }

    /// The loudest per-antenna power across the cluster.
    pub fn max_antenna_power(&self) -> f64 {
        let mut per_antenna: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for ((b, _), vector) in &self.weights {
            for (k, entry) in vector.iter().enumerate() {
                *per_antenna.entry((*b, k)).or_insert(0.0) += entry.norm_sqr();
            }
        }
        per_antenna.values().copied().fold(0.0, f64::max)
    }

    /// Errors if any antenna exceeds `budget * (1 + POWER_TOLERANCE)`.
    pub fn validate_power(&self, budget: f64) -> Result<()> {
        let mut per_antenna: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for ((b, _), vector) in &self.weights {
            for (k, entry) in vector.iter().enumerate() {
                *per_antenna.entry((*b, k)).or_insert(0.0) += entry.norm_sqr();
            }
        }
        for ((b, k), power) in per_antenna {
            if power > budget * (1.0 + POWER_TOLERANCE) {
                return Err(Error::PowerViolation {
                    bs: b,
                    antenna: k,
                    power,
                    budget,
                });
            }
        }
        Ok(())
    }

    /// Scales every weight by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for vector in self.weights.values_mut() {
            for entry in vector.iter_mut() {
                *entry *= factor;
            }
        }
    }

    /// Sum of |w|^2 over all links and antennas.
    pub fn total_power(&self) -> f64 {
        self.weights
            .values()
            .flat_map(|v| v.iter())
            .map(|w| w.norm_sqr())
            .sum()
    }
}

fn dot(h: &[Complex64], w: &[Complex64]) -> Complex64 {
    h.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Intended receive signal `sum_{b in B_u} h_{b,u} w_{b,u}` from known CSI.
pub(crate) fn signal_term(masked: &MaskedCsi, precoder: &Precoder, user: usize) -> Complex64 {
    let mut signal = Complex64::new(0.0, 0.0);
    for &b in masked.coop.serving(user) {
        if let (Some(h), Some(w)) = (masked.known.get(&(b, user)), precoder.get(b, user)) {
            signal += dot(h, w);
        }
    }
    signal
}

/// Design-model power of interferer `i` at user `u` under `mode`.
pub(crate) fn interferer_power(
    masked: &MaskedCsi,
    precoder: &Precoder,
    mode: SinrMode,
    interferer: usize,
    user: usize,
) -> f64 {
    // Known part: links serving `i` whose channel to `u` is fed back.
    let mut known = Complex64::new(0.0, 0.0);
    for &b in masked.coop.serving(interferer) {
        if !masked.coop.contains(b, user) {
            continue;
        }
        if let (Some(h), Some(w)) = (masked.known.get(&(b, user)), precoder.get(b, interferer)) {
            known += dot(h, w);
        }
    }
    let unknown = masked.unknown_links(interferer, user);
    match mode {
        SinrMode::Full | SinrMode::LimitedZero => known.norm_sqr(),
        SinrMode::LimitedLambda => {
            let mut stat = 0.0;
            for &b in &unknown {
                if let Some(w) = precoder.get(b, interferer) {
                    let power: f64 = w.iter().map(|x| x.norm_sqr()).sum();
                    stat += masked.lambda_sq[&(b, user)] * power;
                }
            }
            known.norm_sqr() + unknown.len() as f64 * stat
        }
        SinrMode::LimitedNaive => {
            let mut total = known;
            for &b in &unknown {
                if let Some(w) = precoder.get(b, interferer) {
                    let amplitude = masked.lambda_sq[&(b, user)].sqrt();
                    let sum: Complex64 = w.iter().sum();
                    total += amplitude * sum;
                }
            }
            total.norm_sqr()
        }
    }
}

/// Design-model interference-plus-noise power at `user`.
pub(crate) fn design_denominator(
    masked: &MaskedCsi,
    precoder: &Precoder,
    mode: SinrMode,
    user: usize,
) -> f64 {
    let mut denom = masked.noise_power;
    for i in 0..masked.num_users {
        if i != user {
            denom += interferer_power(masked, precoder, mode, i, user);
        }
    }
    denom
}

/// Per-user design SINR under `mode`, computed from masked CSI only.
pub fn design_sinr(masked: &MaskedCsi, precoder: &Precoder, mode: SinrMode) -> Result<Vec<f64>> {
    precoder.validate_support(&masked.coop)?;
    let mut out = Vec::with_capacity(masked.num_users);
    for u in 0..masked.num_users {
        let signal = signal_term(masked, precoder, u).norm_sqr();
        out.push(signal / design_denominator(masked, precoder, mode, u));
    }
    Ok(out)
}

/// Pessimistic statistical SINR: the [`SinrMode::LimitedLambda`] design model.
pub fn pessimistic_sinr(masked: &MaskedCsi, precoder: &Precoder) -> Result<Vec<f64>> {
    design_sinr(masked, precoder, SinrMode::LimitedLambda)
}

/// Naive substitution SINR: the [`SinrMode::LimitedNaive`] design model.
pub fn naive_pl_sinr(masked: &MaskedCsi, precoder: &Precoder) -> Result<Vec<f64>> {
    design_sinr(masked, precoder, SinrMode::LimitedNaive)
}

/// Per-user SINR against the actual channel realization.
pub fn true_sinr(
    realization: &ChannelRealization,
    precoder: &Precoder,
    noise_power: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(realization.num_users);
    for u in 0..realization.num_users {
        let mut received = vec![Complex64::new(0.0, 0.0); realization.num_users];
        for (&(b, i), w) in precoder.links() {
            if b >= realization.num_bs || i >= realization.num_users {
                return Err(Error::Dimension(
                    "precoder references a link outside the realization".into(),
                ));
            }
            received[i] += dot(&realization.h[&(b, u)], w);
        }
        let mut denom = noise_power;
        for (i, amplitude) in received.iter().enumerate() {
            if i != u {
                denom += amplitude.norm_sqr();
            }
        }
        out.push(received[u].norm_sqr() / denom);
    }
    Ok(out)
}

/// Weighted sum rate `sum_u alpha_u log2(1 + gamma_u)` in bits/s/Hz.
pub fn weighted_sum_rate(sinrs: &[f64], weights: &[f64]) -> Result<f64> {
    if sinrs.len() != weights.len() {
        return Err(Error::Dimension(format!(
            "{} SINRs but {} weights",
            sinrs.len(),
            weights.len()
        )));
    }
    let mut rate = 0.0;
    for (&gamma, &alpha) in sinrs.iter().zip(weights) {
        if gamma < 0.0 || !gamma.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidInput(format!(
                "SINRs must be finite and nonnegative (gamma {gamma}, alpha {alpha})"
            )));
        }
        rate += alpha * (1.0 + gamma).log2();
    }
    Ok(rate)
}

/// Per-user SINRs together with the induced weighted sum rate.
#[derive(Debug, Clone)]
pub struct SinrReport {
    pub per_user: Vec<f64>,
    pub weighted_sum_rate: f64,
}

pub fn sinr_report(sinrs: Vec<f64>, weights: &[f64]) -> Result<SinrReport> {
    let rate = weighted_sum_rate(&sinrs, weights)?;
    Ok(SinrReport {
        per_user: sinrs,
        weighted_sum_rate: rate,
    })
}

/// Receive power `c_u` at `user`: noise plus own-signal power plus the
/// design-model interference under `mode`. This is the variance the MMSE
/// receive scalar normalises by.
pub fn receive_variance(
    masked: &MaskedCsi,
    precoder: &Precoder,
    mode: SinrMode,
    user: usize,
) -> f64 {
    let signal = signal_term(masked, precoder, user).norm_sqr();
    signal + design_denominator(masked, precoder, mode, user)
}

/// MMSE receive scalar `a_u = conj(s_u) / c_u`.
pub fn mmse_receiver(
    masked: &MaskedCsi,
    precoder: &Precoder,
    mode: SinrMode,
    user: usize,
) -> Complex64 {
    let signal = signal_term(masked, precoder, user);
    signal.conj() / receive_variance(masked, precoder, mode, user)
}

/// Mean square error of user `user` under receive scalar `receiver`:
/// `1 - 2 Re(a s) + |a|^2 c`.
pub fn user_mse(
    masked: &MaskedCsi,
    precoder: &Precoder,
    mode: SinrMode,
    receiver: Complex64,
    user: usize,
) -> f64 {
    let signal = signal_term(masked, precoder, user);
    let variance = receive_variance(masked, precoder, mode, user);
    1.0 - 2.0 * (receiver * signal).re + receiver.norm_sqr() * variance
}

/// Weight `d = 1 / mse` used to linearise the rate around the current MSE.
pub fn linearizing_coefficient(mse: f64) -> Result<f64> {
    if mse <= 0.0 || !mse.is_finite() {
        return Err(Error::InvalidInput(format!(
            "MSE must be positive and finite, got {mse}"
        )));
    }
    Ok(1.0 / mse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::{mask_csi, relative_threshold};
    use crate::scenario::{draw_drop, rescale_for_conditioning, Scenario};
    use crate::testutil;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn single_link_sinr_is_snr() {
        let (_, masked) = testutil::toy_two_user();
        // Single-user view: zero the second user's weights.
        let mut precoder = Precoder::zero(&masked.coop, 1);
        precoder
            .set(0, 0, vec![Complex64::new(2.0, 0.0)])
            .unwrap();
        let gammas = design_sinr(&masked, &precoder, SinrMode::LimitedLambda).unwrap();
        // h_{0,0} = 1, w = 2, N0 = 0.5 -> SINR = 4 / 0.5 = 8.
        assert_relative_eq!(gammas[0], 8.0, max_relative = 1e-12);
        assert_eq!(gammas[1], 0.0);
    }

    #[test]
    fn pessimistic_adds_the_statistical_term() {
        let (_, masked) = testutil::toy_two_user();
        let mut precoder = Precoder::zero(&masked.coop, 1);
        precoder.set(0, 0, vec![Complex64::new(1.0, 0.0)]).unwrap();
        precoder.set(1, 1, vec![Complex64::new(3.0, 0.0)]).unwrap();
        // User 0 does not know bs 1 (unknown interferer of power lambda^2 * 9).
        let zero = design_sinr(&masked, &precoder, SinrMode::LimitedZero).unwrap();
        let pess = design_sinr(&masked, &precoder, SinrMode::LimitedLambda).unwrap();
        assert!(pess[0] < zero[0]);
        let lambda_sq = masked.lambda_sq[&(1, 0)];
        assert_relative_eq!(
            pess[0],
            1.0 / (lambda_sq * 9.0 + masked.noise_power),
            max_relative = 1e-12
        );
        // User 1 knows both base stations; its two models agree.
        assert_relative_eq!(pess[1], zero[1], max_relative = 1e-12);
    }

    #[test]
    fn naive_mode_substitutes_flat_surrogate_channels() {
        let (_, masked) = testutil::toy_two_user();
        let mut precoder = Precoder::zero(&masked.coop, 1);
        precoder.set(0, 0, vec![Complex64::new(1.0, 0.0)]).unwrap();
        precoder.set(1, 1, vec![Complex64::new(3.0, 0.0)]).unwrap();
        let naive = design_sinr(&masked, &precoder, SinrMode::LimitedNaive).unwrap();
        let lambda = masked.lambda_sq[&(1, 0)].sqrt();
        // Surrogate interference amplitude lambda * w = 3 lambda, coherent.
        assert_relative_eq!(
            naive[0],
            1.0 / ((3.0 * lambda).powi(2) + masked.noise_power),
            max_relative = 1e-12
        );
    }

    /// On a full cooperation map every design mode reduces to the true SINR.
    #[test]
    fn design_modes_coincide_with_true_sinr_under_full_feedback() {
        let scenario = Scenario::small_cluster(2);
        let drop = draw_drop(&scenario, 5);
        let map = relative_threshold(&drop, f64::INFINITY).unwrap();
        let masked = mask_csi(&scenario, &drop, &map).unwrap();
        let precoder = testutil::random_precoder(&masked, 99);
        let truth = true_sinr(&drop, &precoder, scenario.noise_power).unwrap();
        for mode in [
            SinrMode::Full,
            SinrMode::LimitedZero,
            SinrMode::LimitedLambda,
            SinrMode::LimitedNaive,
        ] {
            let design = design_sinr(&masked, &precoder, mode).unwrap();
            for (a, b) in design.iter().zip(&truth) {
                assert_relative_eq!(a, b, max_relative = 1e-10);
            }
        }
    }

    /// Monte-Carlo oracle: redrawing the unknown channels, the mean true
    /// interference stays below the pessimistic bound.
    #[test]
    fn pessimistic_bound_dominates_mean_interference() {
        let scenario = Scenario::small_cluster(2);
        let drop = draw_drop(&scenario, 17);
        let map = relative_threshold(&drop, 3.0).unwrap();
        let masked = mask_csi(&scenario, &drop, &map).unwrap();
        let precoder = testutil::random_precoder(&masked, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(1234);

        for u in 0..masked.num_users {
            let pess = design_denominator(&masked, &precoder, SinrMode::LimitedLambda, u);
            let draws = 10_000;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..draws {
                let mut denom = masked.noise_power;
                for i in 0..masked.num_users {
                    if i == u {
                        continue;
                    }
                    let mut amplitude = Complex64::new(0.0, 0.0);
                    for &b in masked.coop.serving(i) {
                        let w = precoder.get(b, i).unwrap();
                        if masked.coop.contains(b, u) {
                            amplitude += dot(&masked.known[&(b, u)], w);
                        } else {
                            // Redraw the unknown vector from its statistics.
                            let lambda = masked.lambda_sq[&(b, u)].sqrt();
                            let fresh: Vec<Complex64> = (0..masked.n_t)
                                .map(|_| {
                                    let re: f64 = rng.sample(rand_distr::StandardNormal);
                                    let im: f64 = rng.sample(rand_distr::StandardNormal);
                                    lambda * Complex64::new(re, im) / 2f64.sqrt()
                                })
                                .collect();
                            amplitude += dot(&fresh, w);
                        }
                    }
                    denom += amplitude.norm_sqr();
                }
                sum += denom;
                sum_sq += denom * denom;
            }
            let mean = sum / draws as f64;
            let var = (sum_sq / draws as f64 - mean * mean).max(0.0);
            let stderr = (var / draws as f64).sqrt();
            // The 1e-9 relative slack absorbs accumulation roundoff when a
            // user has no unknown links and the draw is deterministic.
            assert!(
                mean <= pess + 3.0 * stderr + 1e-9 * pess.abs(),
                "user {u}: mean interference {mean} exceeds bound {pess}"
            );
        }
    }

    #[test]
    fn rate_handles_weights_and_rejects_bad_input() {
        assert_relative_eq!(
            weighted_sum_rate(&[1.0, 99.0], &[2.0, 0.0]).unwrap(),
            2.0,
            max_relative = 1e-12
        );
        assert_eq!(weighted_sum_rate(&[], &[]).unwrap(), 0.0);
        assert!(weighted_sum_rate(&[-0.1], &[1.0]).is_err());
        assert!(weighted_sum_rate(&[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn sinrs_are_invariant_under_conditioning_rescale() {
        let scenario = Scenario::small_cluster(2);
        let drop = draw_drop(&scenario, 23);
        let map = relative_threshold(&drop, 9.0).unwrap();
        let masked = mask_csi(&scenario, &drop, &map).unwrap();
        let precoder = testutil::random_precoder(&masked, 7);

        let rescaled = rescale_for_conditioning(&drop, scenario.noise_power);
        let before = true_sinr(&drop, &precoder, scenario.noise_power).unwrap();
        let after = true_sinr(&rescaled.realization, &precoder, rescaled.noise_power).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }

        let (masked_scaled, _) = masked.rescaled();
        for mode in [SinrMode::LimitedLambda, SinrMode::LimitedNaive] {
            let x = design_sinr(&masked, &precoder, mode).unwrap();
            let y = design_sinr(&masked_scaled, &precoder, mode).unwrap();
            for (a, b) in x.iter().zip(&y) {
                assert_relative_eq!(a, b, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn mmse_receiver_attains_the_sinr_identity() {
        let scenario = Scenario::small_cluster(3);
        let drop = draw_drop(&scenario, 31);
        let map = relative_threshold(&drop, 3.0).unwrap();
        let masked = mask_csi(&scenario, &drop, &map).unwrap();
        let precoder = testutil::random_precoder(&masked, 11);
        for mode in [SinrMode::LimitedLambda, SinrMode::LimitedZero] {
            let gammas = design_sinr(&masked, &precoder, mode).unwrap();
            for u in 0..masked.num_users {
                let a = mmse_receiver(&masked, &precoder, mode, u);
                let mse = user_mse(&masked, &precoder, mode, a, u);
                assert_relative_eq!(mse, 1.0 / (1.0 + gammas[u]), max_relative = 1e-10);
                // Any other receiver does worse.
                let worse = user_mse(&masked, &precoder, mode, a * 1.1, u);
                assert!(worse >= mse - 1e-12);
                let coefficient = linearizing_coefficient(mse).unwrap();
                assert_relative_eq!(coefficient, 1.0 + gammas[u], max_relative = 1e-10);
            }
        }
        assert!(linearizing_coefficient(0.0).is_err());
    }

    #[test]
    fn precoder_support_and_power_checks() {
        let (_, masked) = testutil::toy_two_user();
        let mut precoder = Precoder::zero(&masked.coop, 1);
        precoder.set(0, 0, vec![Complex64::new(1.0, 1.0)]).unwrap();
        // Base station 1 does not serve user 0, so this link is off-support.
        precoder.set(1, 0, vec![Complex64::new(1.0, 0.0)]).unwrap();
        assert!(precoder.validate_support(&masked.coop).is_err());

        let mut ok = Precoder::zero(&masked.coop, 1);
        ok.set(0, 0, vec![Complex64::new(1.0, 1.0)]).unwrap();
        ok.validate_support(&masked.coop).unwrap();
        assert_relative_eq!(ok.antenna_power(0, 0), 2.0);
        assert_relative_eq!(ok.max_antenna_power(), 2.0);
        assert!(ok.validate_power(2.0).is_ok());
        assert!(ok.validate_power(2.0 - 1e-3).is_err());
        // Exactly at the tolerance boundary still passes.
        assert!(ok.validate_power(2.0 / (1.0 + POWER_TOLERANCE)).is_ok());

        ok.scale(0.5);
        assert_relative_eq!(ok.antenna_power(0, 0), 0.5);

        assert!(Precoder::zero(&masked.coop, 1)
            .set(0, 0, vec![Complex64::new(0.0, 0.0); 3])
            .is_err());
    }

    #[test]
    fn antenna_power_sums_across_users() {
        let scenario = Scenario::small_cluster(2);
        let drop = draw_drop(&scenario, 2);
        let map = relative_threshold(&drop, f64::INFINITY).unwrap();
        let mut precoder = Precoder::zero(&map, 2);
        for u in 0..3 {
            precoder
                .set(0, u, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)])
                .unwrap();
        }
        assert_relative_eq!(precoder.antenna_power(0, 0), 3.0);
        assert_relative_eq!(precoder.antenna_power(0, 1), 12.0);
        assert_relative_eq!(precoder.max_antenna_power(), 12.0);
        assert_eq!(precoder.antenna_power(1, 0), 0.0);
    }
}
