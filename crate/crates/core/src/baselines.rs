//! Reference schemes: zero-forcing with rescaled power, and a multi-start
//! particle-swarm search directly over precoder coefficients.
//!
//! Zero forcing is a full-CSI baseline: it aggregates every channel row into
//! one matrix, inverts, and rescales the whole precoding matrix with a single
//! scalar so the loudest antenna transmits at the budget. The particle swarm
//! searches the stacked real/imaginary coordinates of the active precoder
//! entries, scoring candidates by the design-model weighted sum rate after
//! the same single-scalar power rescale.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::feedback::{CooperationMap, MaskedCsi};
use crate::metrics::{design_sinr, weighted_sum_rate, Precoder, SinrMode};
use crate::scenario::ChannelRealization;
use crate::ssocp::{init_precoder, RestartTrace, SolveTrace};

/// Pivot magnitudes below this times the largest initial entry declare the
/// aggregated channel rank deficient.
const PIVOT_TOL: f64 = 1e-12;

/// Zero-forcing precoder `W = H^H (H H^H)^{-1}` on the aggregated channel
/// (one row per user, columns all transmit antennas), rescaled by one scalar
/// so the loudest antenna meets `p_max` with equality. Full cooperation
/// support: zero forcing assumes every link is shared.
pub fn zf_precoder(realization: &ChannelRealization, p_max: f64) -> Result<Precoder> {
    let users = realization.num_users;
    let antennas = realization.num_bs * realization.n_t;
    if users > antennas {
        return Err(Error::InvalidInput(format!(
            "zero forcing needs at least as many transmit antennas as users, got {antennas} < {users}"
        )));
    }

    // Aggregated rows h_u and the Gram matrix G = H H^H.
    let rows: Vec<Vec<Complex64>> = (0..users)
        .map(|u| {
            let mut row = Vec::with_capacity(antennas);
            for b in 0..realization.num_bs {
                row.extend_from_slice(&realization.h[&(b, u)]);
            }
            row
        })
        .collect();
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); users]; users];
    for i in 0..users {
        for j in 0..users {
            gram[i][j] = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| a * b.conj())
                .sum();
        }
    }

    let inverse = invert(gram)?;

    // W = H^H G^{-1}: column u of W is sum_j conj(h_j) * G^{-1}[j][u].
    let map = CooperationMap::full(realization.num_bs, realization.num_users);
    let mut precoder = Precoder::zero(&map, realization.n_t);
    for u in 0..users {
        for b in 0..realization.num_bs {
            let mut w = vec![Complex64::new(0.0, 0.0); realization.n_t];
            for j in 0..users {
                let coef = inverse[j][u];
                for (k, entry) in w.iter_mut().enumerate() {
                    *entry += rows[j][b * realization.n_t + k].conj() * coef;
                }
            }
            precoder.set(b, u, w)?;
        }
    }

    let loudest = precoder.max_antenna_power();
    if loudest <= 0.0 {
        return Err(Error::RankDeficient);
    }
    precoder.scale((p_max / loudest).sqrt());
    Ok(precoder)
}

/// Gauss-Jordan inverse with partial pivoting over complex matrices.
fn invert(mut a: Vec<Vec<Complex64>>) -> Result<Vec<Vec<Complex64>>> {
    let n = a.len();
    let scale = a
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if scale <= 0.0 {
        return Err(Error::RankDeficient);
    }
    let mut inv = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("column range is non-empty");
        if a[pivot_row][col].norm() <= PIVOT_TOL * scale {
            return Err(Error::RankDeficient);
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = a[col][col];
        for k in 0..n {
            a[col][k] /= pivot;
            inv[col][k] /= pivot;
        }
        for row in 0..n {
            if row != col {
                let factor = a[row][col];
                if factor.norm_sqr() > 0.0 {
                    for k in 0..n {
                        let a_val = a[col][k];
                        let inv_val = inv[col][k];
                        a[row][k] -= factor * a_val;
                        inv[row][k] -= factor * inv_val;
                    }
                }
            }
        }
    }
    Ok(inv)
}

#[derive(Debug, Clone)]
pub struct PsoOptions {
    pub swarm_size: usize,
    pub iterations: usize,
    /// Velocity carry-over weight.
    pub inertia: f64,
    /// Pull towards each particle's own best.
    pub cognitive: f64,
    /// Pull towards the swarm best.
    pub social: f64,
    /// Independent swarms; the best swarm's best particle wins.
    pub restarts: usize,
    /// Interference model the fitness optimises against.
    pub mode: SinrMode,
    pub seed: u64,
}

impl Default for PsoOptions {
    fn default() -> Self {
        PsoOptions {
            swarm_size: 40,
            iterations: 300,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            restarts: 5,
            mode: SinrMode::Full,
            seed: 0,
        }
    }
}

/// Stacks the active precoder entries into one real coordinate vector,
/// link-major in cooperation-map order, antenna-major within a link,
/// real before imaginary per entry.
fn pack(masked: &MaskedCsi, precoder: &Precoder) -> Vec<f64> {
    let mut coords = Vec::with_capacity(2 * masked.n_t * masked.coop.num_links());
    for (b, u) in masked.coop.links() {
        let w = precoder.get(b, u).expect("precoder covers the map");
        for entry in w {
            coords.push(entry.re);
            coords.push(entry.im);
        }
    }
    coords
}

fn unpack(masked: &MaskedCsi, coords: &[f64]) -> Precoder {
    let mut precoder = Precoder::zero(&masked.coop, masked.n_t);
    let mut at = 0;
    for (b, u) in masked.coop.links() {
        let w: Vec<Complex64> = (0..masked.n_t)
            .map(|_| {
                let z = Complex64::new(coords[at], coords[at + 1]);
                at += 2;
                z
            })
            .collect();
        precoder.set(b, u, w).expect("map links are sized n_t");
    }
    precoder
}

/// Candidate precoder after the single-scalar rescale that puts the loudest
/// antenna exactly at the budget, and its design-model weighted sum rate.
/// An all-zero candidate scores zero.
fn fitness(masked: &MaskedCsi, mode: SinrMode, coords: &[f64]) -> Result<(f64, Precoder)> {
    let mut precoder = unpack(masked, coords);
    let loudest = precoder.max_antenna_power();
    if loudest <= 0.0 {
        return Ok((0.0, precoder));
    }
    precoder.scale((masked.per_antenna_power / loudest).sqrt());
    let gammas = design_sinr(masked, &precoder, mode)?;
    let rate = weighted_sum_rate(&gammas, &masked.weights)?;
    Ok((rate, precoder))
}

/// Multi-start global-best particle swarm over the active precoder
/// coefficients. Positions are seeded with random full-power precoders,
/// velocities start at zero, and both are clamped to the per-coordinate
/// box `[-sqrt(p), sqrt(p)]` whose corners already dominate every feasible
/// entry magnitude. Each swarm's best fitness history becomes one restart
/// trace; the best swarm supplies the returned precoder.
pub fn pso_solve(masked: &MaskedCsi, options: &PsoOptions) -> Result<(Precoder, SolveTrace)> {
    if options.swarm_size == 0 || options.restarts == 0 {
        return Err(Error::InvalidInput(
            "particle swarm needs at least one particle and one restart".into(),
        ));
    }
    let mode = options.mode;
    let bound = masked.per_antenna_power.sqrt();
    let v_max = bound;
    let mut rng = ChaCha12Rng::seed_from_u64(options.seed);

    let mut best: Option<(f64, Precoder, usize)> = None;
    let mut restarts = Vec::with_capacity(options.restarts);
    for restart in 0..options.restarts {
        let mut positions: Vec<Vec<f64>> = (0..options.swarm_size)
            .map(|_| {
                let start = init_precoder(
                    &masked.coop,
                    masked.n_t,
                    masked.per_antenna_power,
                    &mut rng,
                );
                pack(masked, &start)
            })
            .collect();
        let dim = positions[0].len();
        let mut velocities = vec![vec![0.0; dim]; options.swarm_size];
        let mut personal_best = positions.clone();
        let mut personal_fitness = Vec::with_capacity(options.swarm_size);
        let mut swarm_best: Option<(f64, Vec<f64>)> = None;
        for position in &positions {
            let (rate, _) = fitness(masked, mode, position)?;
            personal_fitness.push(rate);
            if swarm_best.as_ref().is_none_or(|(r, _)| rate > *r) {
                swarm_best = Some((rate, position.clone()));
            }
        }
        let (mut g_rate, mut g_position) = swarm_best.expect("swarm is non-empty");
        let mut trace = RestartTrace {
            objectives: vec![g_rate],
            completed: true,
        };

        for _ in 0..options.iterations {
            for p in 0..options.swarm_size {
                for k in 0..dim {
                    let r1: f64 = rng.gen();
                    let r2: f64 = rng.gen();
                    let v = options.inertia * velocities[p][k]
                        + options.cognitive * r1 * (personal_best[p][k] - positions[p][k])
                        + options.social * r2 * (g_position[k] - positions[p][k]);
                    velocities[p][k] = v.clamp(-v_max, v_max);
                    positions[p][k] =
                        (positions[p][k] + velocities[p][k]).clamp(-bound, bound);
                }
                let (rate, _) = fitness(masked, mode, &positions[p])?;
                if rate > personal_fitness[p] {
                    personal_fitness[p] = rate;
                    personal_best[p] = positions[p].clone();
                }
                if rate > g_rate {
                    g_rate = rate;
                    g_position = positions[p].clone();
                }
            }
            trace.objectives.push(g_rate);
        }

        restarts.push(trace);
        let (rate, precoder) = fitness(masked, mode, &g_position)?;
        if best.as_ref().is_none_or(|(r, _, _)| rate > *r) {
            best = Some((rate, precoder, restart));
        }
    }

    let (_, precoder, chosen_restart) = best.expect("at least one restart ran");
    precoder.validate_support(&masked.coop)?;
    precoder.validate_power(masked.per_antenna_power)?;
    Ok((
        precoder,
        SolveTrace {
            restarts,
            chosen_restart,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::true_sinr;
    use crate::testutil;
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    fn two_user_realization(h: [[Complex64; 2]; 2]) -> ChannelRealization {
        let mut channels = BTreeMap::new();
        let mut lambda_sq = BTreeMap::new();
        for b in 0..2 {
            for u in 0..2 {
                channels.insert((b, u), vec![h[b][u]]);
                lambda_sq.insert((b, u), h[b][u].norm_sqr().max(1e-3));
            }
        }
        ChannelRealization {
            num_bs: 2,
            num_users: 2,
            n_t: 1,
            bs_positions: vec![[0.0, 0.0], [1.0, 0.0]],
            user_positions: vec![[0.0, 0.0], [1.0, 0.0]],
            h: channels,
            lambda_sq,
            seed: 0,
        }
    }

    #[test]
    fn identity_channel_gives_unit_sinr() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let realization = two_user_realization([[one, zero], [zero, one]]);
        let precoder = zf_precoder(&realization, 1.0).unwrap();
        let gammas = true_sinr(&realization, &precoder, 1.0).unwrap();
        for g in gammas {
            assert_relative_eq!(g, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn cross_terms_are_annihilated() {
        let (_, drop, _) = testutil::masked_instance(1, 31, f64::INFINITY);
        let precoder = zf_precoder(&drop, 2.0).unwrap();
        for u in 0..drop.num_users {
            let mut signal = Complex64::new(0.0, 0.0);
            for b in 0..drop.num_bs {
                signal += drop.h[&(b, u)][0] * precoder.get(b, u).unwrap()[0];
            }
            for i in 0..drop.num_users {
                if i == u {
                    continue;
                }
                let mut cross = Complex64::new(0.0, 0.0);
                for b in 0..drop.num_bs {
                    cross += drop.h[&(b, u)][0] * precoder.get(b, i).unwrap()[0];
                }
                assert!(
                    cross.norm() <= 1e-8 * signal.norm(),
                    "residual interference {} vs signal {}",
                    cross.norm(),
                    signal.norm()
                );
            }
        }
        assert_relative_eq!(precoder.max_antenna_power(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn duplicate_rows_are_rank_deficient() {
        let h = Complex64::new(0.6, -0.2);
        let g = Complex64::new(-0.1, 0.9);
        let realization = two_user_realization([[h, h], [g, g]]);
        assert!(matches!(
            zf_precoder(&realization, 1.0),
            Err(Error::RankDeficient)
        ));
    }

    #[test]
    fn more_users_than_antennas_is_rejected() {
        let (mut realization, _) = testutil::single_user(Complex64::new(1.0, 0.0), 1.0, 1.0);
        realization.num_users = 2;
        realization.h.insert((0, 1), vec![Complex64::new(0.5, 0.5)]);
        realization.lambda_sq.insert((0, 1), 0.5);
        assert!(matches!(
            zf_precoder(&realization, 1.0),
            Err(Error::InvalidInput(_))
        ));
    }

    fn quick_pso(mode: SinrMode, seed: u64) -> PsoOptions {
        PsoOptions {
            swarm_size: 20,
            iterations: 60,
            restarts: 2,
            mode,
            seed,
            ..PsoOptions::default()
        }
    }

    #[test]
    fn pso_single_user_near_capacity() {
        let (_, masked) = testutil::single_user(Complex64::new(1.5, 0.0), 0.5, 2.0);
        let capacity = (1.0_f64 + 2.0 * 2.25 / 0.5).log2();
        let (precoder, _) = pso_solve(&masked, &quick_pso(SinrMode::Full, 8)).unwrap();
        let gammas = design_sinr(&masked, &precoder, SinrMode::Full).unwrap();
        let rate = weighted_sum_rate(&gammas, &masked.weights).unwrap();
        assert!(
            rate >= 0.99 * capacity,
            "swarm reached {rate} of {capacity}"
        );
    }

    #[test]
    fn swarm_best_is_monotone() {
        let (_, _, masked) = testutil::masked_instance(1, 14, 3.0);
        let (_, trace) = pso_solve(&masked, &quick_pso(SinrMode::LimitedLambda, 2)).unwrap();
        for restart in &trace.restarts {
            for pair in restart.objectives.windows(2) {
                assert!(pair[1] >= pair[0], "swarm best decreased");
            }
        }
    }

    #[test]
    fn pso_respects_support_and_power() {
        let (_, _, masked) = testutil::masked_instance(1, 25, 3.0);
        let (precoder, _) = pso_solve(&masked, &quick_pso(SinrMode::LimitedZero, 5)).unwrap();
        precoder.validate_support(&masked.coop).unwrap();
        precoder.validate_power(masked.per_antenna_power).unwrap();
        assert_relative_eq!(
            precoder.max_antenna_power(),
            masked.per_antenna_power,
            max_relative = 1e-9
        );
    }

    #[test]
    fn pso_is_deterministic() {
        let (_, _, masked) = testutil::masked_instance(1, 33, 6.0);
        let options = quick_pso(SinrMode::LimitedLambda, 77);
        let (a, trace_a) = pso_solve(&masked, &options).unwrap();
        let (b, trace_b) = pso_solve(&masked, &options).unwrap();
        assert_eq!(a, b);
        assert_eq!(trace_a.chosen_restart, trace_b.chosen_restart);
    }
}
