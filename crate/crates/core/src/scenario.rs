//! Cluster geometry, channel draws and power calibration.
//!
//! The evaluation scenario is a single cluster of `num_bs` base stations with
//! `n_t` antennas each, placed uniformly on a circle of radius
//! `cell_radius_m` around the cluster centre. Single-antenna users are
//! dropped uniformly in a disk of radius `drop_radius_m` at the centre, which
//! keeps every user near the joint cell edge of all base stations.
//!
//! Each link (base station `b`, user `u`) carries a frequency-flat channel
//! vector `h = sqrt(lambda_sq) * f`, where `lambda_sq` is the long-term gain
//! (pathloss times log-normal shadowing) and `f` has i.i.d. unit-variance
//! circularly symmetric complex Gaussian entries.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// Boltzmann constant in joules per kelvin.
pub const BOLTZMANN: f64 = 1.38e-23;

/// Static description of the cluster: geometry, fading statistics and the
/// calibrated per-antenna power budget.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub num_bs: usize,
    pub n_t: usize,
    pub num_users: usize,
    pub cell_radius_m: f64,
    pub drop_radius_m: f64,
    pub cell_edge_snr_db: f64,
    /// Standard deviation of the log-normal shadowing in dB.
    pub shadow_sigma_db: f64,
    pub pathloss_exponent: f64,
    /// Receiver noise power in watts.
    pub noise_power: f64,
    /// Per-antenna transmit power budget in watts.
    pub per_antenna_power: f64,
    /// Rate weights `alpha_u`, one per user, all finite and nonnegative.
    pub user_weights: Vec<f64>,
}

/// One Monte-Carlo drop: positions plus the channel vectors and long-term
/// gains of every (base station, user) link.
///
/// Link maps are keyed `(bs, user)` in a [`BTreeMap`] so that iteration order
/// (and hence every downstream computation) is deterministic.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelRealization {
    pub num_bs: usize,
    pub num_users: usize,
    pub n_t: usize,
    pub bs_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    /// Channel vectors `h_{b,u}` of length `n_t`, keyed `(b, u)`.
    pub h: BTreeMap<(usize, usize), Vec<Complex64>>,
    /// Long-term link gains `lambda_sq_{b,u}` (pathloss times shadowing).
    pub lambda_sq: BTreeMap<(usize, usize), f64>,
    /// Seed this drop was generated from.
    pub seed: u64,
}

/// A channel realization rescaled for numerical conditioning, together with
/// the matching noise power.
#[derive(Debug, Clone)]
pub struct RescaledChannels {
    pub realization: ChannelRealization,
    pub noise_power: f64,
    /// Amplitude factor the channels were divided by.
    pub amplitude_factor: f64,
}

/// Thermal noise power `k * T * B` in watts.
pub fn noise_power(temperature_k: f64, bandwidth_hz: f64) -> f64 {
    BOLTZMANN * temperature_k * bandwidth_hz
}

/// Distance-based pathloss gain `(d / 1 m)^(-exponent)`.
///
/// Distances below the 1 m reference are clamped, so the gain never exceeds
/// one.
pub fn pathloss_gain(distance_m: f64, exponent: f64) -> f64 {
    distance_m.max(1.0).powf(-exponent)
}

/// Per-antenna power budget that places the mean single-antenna SNR at the
/// cell edge (distance `cell_radius_m`, unit shadowing) at `snr_db`.
pub fn calibrate_power(
    snr_db: f64,
    noise_power: f64,
    cell_radius_m: f64,
    pathloss_exponent: f64,
) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    snr * noise_power / pathloss_gain(cell_radius_m, pathloss_exponent)
}

fn required(map: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let raw = map
        .get(key)
        .ok_or_else(|| Error::config(key, "missing required key"))?;
    raw.trim()
        .parse::<f64>()
        .map_err(|_| Error::config(key, format!("cannot parse `{raw}` as a number")))
}

fn optional(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::config(key, format!("cannot parse `{raw}` as a number"))),
    }
}

fn positive_count(map: &BTreeMap<String, String>, key: &str) -> Result<usize> {
    let value = required(map, key)?;
    if value.fract() != 0.0 || !(1.0..=1e6).contains(&value) {
        return Err(Error::config(key, "must be a positive integer"));
    }
    Ok(value as usize)
}

impl Scenario {
    /// Builds a scenario from flat `key = value` configuration pairs.
    ///
    /// Required keys: `num_bs`, `n_t`, `num_users`, `cell_radius_m`,
    /// `cell_edge_snr_db`. The remaining keys default to the evaluation
    /// setup: `drop_radius_m` = 0.1 * cell radius, `shadow_sigma_db` =
    /// sqrt(8), `pathloss_exponent` = 3.5, `bandwidth_hz` = 1e7,
    /// `temperature_k` = 290 and unit `user_weights`.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let num_bs = positive_count(map, "num_bs")?;
        let n_t = positive_count(map, "n_t")?;
        let num_users = positive_count(map, "num_users")?;
        let cell_radius_m = required(map, "cell_radius_m")?;
        if !(cell_radius_m.is_finite() && cell_radius_m > 0.0) {
            return Err(Error::config("cell_radius_m", "must be positive"));
        }
        let drop_radius_m = optional(map, "drop_radius_m", 0.1 * cell_radius_m)?;
        if !(drop_radius_m.is_finite() && drop_radius_m > 0.0) {
            return Err(Error::config("drop_radius_m", "must be positive"));
        }
        let cell_edge_snr_db = required(map, "cell_edge_snr_db")?;
        let shadow_sigma_db = optional(map, "shadow_sigma_db", 8f64.sqrt())?;
        if !(shadow_sigma_db.is_finite() && shadow_sigma_db >= 0.0) {
            return Err(Error::config("shadow_sigma_db", "must be nonnegative"));
        }
        let pathloss_exponent = optional(map, "pathloss_exponent", 3.5)?;
        if !(pathloss_exponent.is_finite() && pathloss_exponent > 0.0) {
            return Err(Error::config("pathloss_exponent", "must be positive"));
        }
        let bandwidth_hz = optional(map, "bandwidth_hz", 1e7)?;
        let temperature_k = optional(map, "temperature_k", 290.0)?;
        if !(bandwidth_hz > 0.0 && temperature_k > 0.0) {
            return Err(Error::config(
                "bandwidth_hz",
                "bandwidth and temperature must be positive",
            ));
        }
        let noise = noise_power(temperature_k, bandwidth_hz);
        let per_antenna_power =
            calibrate_power(cell_edge_snr_db, noise, cell_radius_m, pathloss_exponent);
        if !(per_antenna_power.is_finite() && per_antenna_power > 0.0) {
            return Err(Error::config(
                "cell_edge_snr_db",
                "calibrated power budget must be positive and finite",
            ));
        }
        let user_weights = match map.get("user_weights") {
            None => vec![1.0; num_users],
            Some(raw) => parse_weights(raw, num_users)?,
        };
        Ok(Scenario {
            num_bs,
            n_t,
            num_users,
            cell_radius_m,
            drop_radius_m,
            cell_edge_snr_db,
            shadow_sigma_db,
            pathloss_exponent,
            noise_power: noise,
            per_antenna_power,
            user_weights,
        })
    }

    /// The reference evaluation cluster: three base stations on a 500 m
    /// circle, three users dropped within 50 m of the centre, 15 dB cell-edge
    /// SNR, sqrt(8) dB shadowing and thermal noise over 10 MHz at 290 K.
    pub fn small_cluster(n_t: usize) -> Self {
        let noise = noise_power(290.0, 1e7);
        let per_antenna_power = calibrate_power(15.0, noise, 500.0, 3.5);
        Scenario {
            num_bs: 3,
            n_t,
            num_users: 3,
            cell_radius_m: 500.0,
            drop_radius_m: 50.0,
            cell_edge_snr_db: 15.0,
            shadow_sigma_db: 8f64.sqrt(),
            pathloss_exponent: 3.5,
            noise_power: noise,
            per_antenna_power,
            user_weights: vec![1.0; 3],
        }
    }

    /// Re-derives the power budget for a different cell-edge SNR, leaving
    /// geometry and noise untouched.
    pub fn with_edge_snr(&self, snr_db: f64) -> Self {
        let mut out = self.clone();
        out.cell_edge_snr_db = snr_db;
        out.per_antenna_power = calibrate_power(
            snr_db,
            self.noise_power,
            self.cell_radius_m,
            self.pathloss_exponent,
        );
        out
    }
}

fn parse_weights(raw: &str, num_users: usize) -> Result<Vec<f64>> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::config("user_weights", format!("cannot parse `{p}`")))
        })
        .collect::<Result<_>>()?;
    let weights = if parts.len() == 1 {
        vec![parts[0]; num_users]
    } else if parts.len() == num_users {
        parts
    } else {
        return Err(Error::config(
            "user_weights",
            format!("expected 1 or {num_users} entries, got {}", parts.len()),
        ));
    };
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::config(
            "user_weights",
            "weights must be finite and nonnegative",
        ));
    }
    if weights.iter().all(|w| *w == 0.0) {
        return Err(Error::config(
            "user_weights",
            "at least one weight must be positive",
        ));
    }
    Ok(weights)
}

/// Draws one Monte-Carlo drop from `seed`.
///
/// The generator is a `ChaCha12` stream seeded with `seed`, consumed in a
/// fixed order so identical `(scenario, seed)` pairs reproduce the drop
/// exactly: first two uniforms per user for the position (radius via square
/// root, then angle), then per user and per base station one shadowing
/// normal followed by `2 * n_t` fading normals (real, imaginary per
/// antenna).
pub fn draw_drop(scenario: &Scenario, seed: u64) -> ChannelRealization {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let bs_positions: Vec<[f64; 2]> = (0..scenario.num_bs)
        .map(|b| {
            let angle = 2.0 * std::f64::consts::PI * b as f64 / scenario.num_bs as f64;
            [
                scenario.cell_radius_m * angle.cos(),
                scenario.cell_radius_m * angle.sin(),
            ]
        })
        .collect();
    let user_positions: Vec<[f64; 2]> = (0..scenario.num_users)
        .map(|_| {
            let radius = scenario.drop_radius_m * rng.gen::<f64>().sqrt();
            let angle = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            [radius * angle.cos(), radius * angle.sin()]
        })
        .collect();

    let mut h = BTreeMap::new();
    let mut lambda_sq = BTreeMap::new();
    for u in 0..scenario.num_users {
        for (b, bs) in bs_positions.iter().enumerate() {
            let dx = bs[0] - user_positions[u][0];
            let dy = bs[1] - user_positions[u][1];
            let distance = (dx * dx + dy * dy).sqrt();
            let shadow_db = scenario.shadow_sigma_db * rng.sample::<f64, _>(StandardNormal);
            let gain = pathloss_gain(distance, scenario.pathloss_exponent)
                * 10f64.powf(shadow_db / 10.0);
            let amplitude = gain.sqrt();
            let vector: Vec<Complex64> = (0..scenario.n_t)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    amplitude * Complex64::new(re, im) / 2f64.sqrt()
                })
                .collect();
            h.insert((b, u), vector);
            lambda_sq.insert((b, u), gain);
        }
    }

    ChannelRealization {
        num_bs: scenario.num_bs,
        num_users: scenario.num_users,
        n_t: scenario.n_t,
        bs_positions,
        user_positions,
        h,
        lambda_sq,
        seed,
    }
}

/// Rescales a drop so the weakest link has unit amplitude gain.
///
/// Every channel vector and amplitude gain is divided by the smallest link
/// amplitude `g`, and the noise power by `g^2`. All SINRs — and therefore
/// every rate and every optimal precoder — are invariant under this scaling;
/// it only moves the dynamic range of interior-point solves towards one.
pub fn rescale_for_conditioning(
    realization: &ChannelRealization,
    noise_power: f64,
) -> RescaledChannels {
    let min_gain = realization
        .lambda_sq
        .values()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let factor = if min_gain.is_finite() && min_gain > 0.0 {
        min_gain.sqrt()
    } else {
        1.0
    };
    let mut scaled = realization.clone();
    for vector in scaled.h.values_mut() {
        for entry in vector.iter_mut() {
            *entry /= factor;
        }
    }
    for gain in scaled.lambda_sq.values_mut() {
        *gain /= factor * factor;
    }
    RescaledChannels {
        realization: scaled,
        noise_power: noise_power / (factor * factor),
        amplitude_factor: factor,
    }
}
