//! Experiment execution: the drop × SNR × threshold × algorithm grid,
//! branch-and-bound certification, and single-instance convergence traces.
//!
//! Row order is deterministic: edge SNR outermost, then drop index, then
//! threshold, then the configured algorithm order. Drops run in parallel
//! and are merged back in index order, and every random stream is derived
//! from the master seed and the cell coordinates, so neither the worker
//! count nor the execution order can change a single value.

use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{pso_solve, zf_precoder};
use crate::bnb::branch_and_bound;
use crate::error::{Error, Result};
use crate::feedback::{backhaul_load, mask_csi, relative_threshold, MaskedCsi};
use crate::harness::config::{Algorithm, RunConfig};
use crate::harness::seeds;
use crate::metrics::{design_sinr, true_sinr, weighted_sum_rate, Precoder, SinrMode};
use crate::scenario::{draw_drop, ChannelRealization, Scenario};
use crate::ssocp::ssocp_solve;
use crate::wmmse::wmmse_solve;

/// One cell of the rate experiment grid.
#[derive(Debug, Clone)]
pub struct RateRow {
    pub drop_id: usize,
    /// Seed the drop's channels were drawn from.
    pub seed: u64,
    pub algorithm: String,
    pub mode: String,
    /// Threshold of the grid cell; full-CSI schemes ignore it.
    pub threshold_db: f64,
    pub edge_snr_db: f64,
    pub n_t: usize,
    pub num_users: usize,
    /// Design-model weighted sum rate the optimizer believes in.
    pub expected_rate_bps_hz: f64,
    /// Weighted sum rate against the realized channels.
    pub actual_rate_bps_hz: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    /// Wall-clock solve time; 0 unless timing is enabled, keeping output
    /// machine-independent by default.
    pub wall_ms: f64,
    pub csi_coeffs: usize,
    pub precoder_weights: usize,
}

/// One branch-and-bound certification row.
#[derive(Debug, Clone)]
pub struct BoundsRow {
    pub drop_id: usize,
    pub mode: String,
    pub bb_ub: f64,
    pub bb_lb: f64,
    /// Design rate of the cone-programming heuristic on the same instance.
    pub ssocp_rate: f64,
    pub rounds: usize,
    pub feasibility_calls: usize,
}

/// One objective sample of a convergence trace.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub drop_id: usize,
    pub algorithm: String,
    pub restart: usize,
    pub iteration: usize,
    pub objective: f64,
}

fn with_pool<T: Send>(workers: usize, run: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(run());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(run))
}

/// The masked instance an algorithm designs on: full-CSI schemes always
/// see the complete map; limited schemes see the thresholded map.
fn masked_for(
    algorithm: Algorithm,
    scenario: &Scenario,
    realization: &ChannelRealization,
    threshold_db: f64,
) -> Result<(MaskedCsi, f64)> {
    let effective = if algorithm.is_full_csi() {
        f64::INFINITY
    } else {
        threshold_db
    };
    let map = relative_threshold(realization, effective)?;
    let masked = mask_csi(scenario, realization, &map)?;
    Ok((masked, effective))
}

/// Runs one algorithm on one masked instance. Returns the precoder and
/// the (iterations, restarts) accounting of the winning trace.
fn dispatch(
    config: &RunConfig,
    algorithm: Algorithm,
    masked: &MaskedCsi,
    realization: &ChannelRealization,
    seed: u64,
) -> Result<(Precoder, usize, usize)> {
    match algorithm {
        Algorithm::Ssocp(mode) => {
            let mut options = config.ssocp_options()?;
            options.mode = mode;
            options.seed = seed;
            let (precoder, trace) = ssocp_solve(masked, &options)?;
            Ok((precoder, trace.iterations(), trace.restarts_used()))
        }
        Algorithm::Wmmse(mode) => {
            let mut options = config.wmmse_options()?;
            options.mode = mode;
            options.seed = seed;
            let (precoder, trace) = wmmse_solve(masked, &options)?;
            Ok((precoder, trace.iterations(), trace.restarts_used()))
        }
        Algorithm::Pso(mode) => {
            let mut options = config.pso_options()?;
            options.mode = mode;
            options.seed = seed;
            let (precoder, trace) = pso_solve(masked, &options)?;
            Ok((precoder, trace.iterations(), trace.restarts_used()))
        }
        Algorithm::Zf => {
            let precoder = zf_precoder(realization, masked.per_antenna_power)?;
            Ok((precoder, 0, 0))
        }
    }
}

fn rate_rows_for_drop(
    config: &RunConfig,
    scenario: &Scenario,
    edge_snr_db: f64,
    drop_id: usize,
) -> Result<Vec<RateRow>> {
    let drop_seed = seeds::drop_seed(config.seed, drop_id as u64);
    let realization = draw_drop(scenario, drop_seed);
    let mut rows = Vec::new();
    for &threshold_db in &config.thresholds_db {
        for &algorithm in &config.algorithms {
            let (masked, effective) =
                masked_for(algorithm, scenario, &realization, threshold_db)?;
            let solver_seed = seeds::solver_seed(
                config.seed,
                drop_id as u64,
                algorithm.id(),
                effective,
                edge_snr_db,
            );
            let started = Instant::now();
            let solved = dispatch(config, algorithm, &masked, &realization, solver_seed);
            let wall_ms = if config.timing {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            let (expected, actual, iterations, restarts_used) = match solved {
                Ok((precoder, iterations, restarts_used)) => {
                    precoder.validate_support(&masked.coop)?;
                    precoder.validate_power(masked.per_antenna_power)?;
                    let design = design_sinr(&masked, &precoder, algorithm.sinr_mode())?;
                    let expected = weighted_sum_rate(&design, &masked.weights)?;
                    let truth =
                        true_sinr(&realization, &precoder, scenario.noise_power)?;
                    let actual = weighted_sum_rate(&truth, &masked.weights)?;
                    (expected, actual, iterations, restarts_used)
                }
                // A failed cell is recorded, not fatal: the sweep goes on.
                Err(Error::Solver(_))
                | Err(Error::AllRestartsFailed(_))
                | Err(Error::RankDeficient) => (f64::NAN, f64::NAN, 0, 0),
                Err(other) => return Err(other),
            };
            let (csi_coeffs, precoder_weights) = backhaul_load(&masked.coop, masked.n_t);
            rows.push(RateRow {
                drop_id,
                seed: drop_seed,
                algorithm: algorithm.token(),
                mode: algorithm.sinr_mode().token().to_string(),
                threshold_db,
                edge_snr_db,
                n_t: scenario.n_t,
                num_users: scenario.num_users,
                expected_rate_bps_hz: expected,
                actual_rate_bps_hz: actual,
                iterations,
                restarts_used,
                wall_ms,
                csi_coeffs,
                precoder_weights,
            });
        }
    }
    Ok(rows)
}

/// Runs the full rate experiment grid. Zero drops yield an empty table.
pub fn run_experiment(config: &RunConfig) -> Result<Vec<RateRow>> {
    let drops = config.rate_drops();
    with_pool(config.workers, || -> Result<Vec<RateRow>> {
        let mut rows = Vec::new();
        for &edge_snr_db in &config.edge_snrs_db {
            let scenario = config.scenario.with_edge_snr(edge_snr_db);
            let per_drop: Vec<Vec<RateRow>> = (0..drops)
                .into_par_iter()
                .map(|drop_id| rate_rows_for_drop(config, &scenario, edge_snr_db, drop_id))
                .collect::<Result<_>>()?;
            rows.extend(per_drop.into_iter().flatten());
        }
        Ok(rows)
    })?
}

/// Branch-and-bound certification on the first configured threshold and
/// edge SNR: for each drop, brackets the optimum under the full,
/// limited-zero and limited-lambda models and runs the cone-programming
/// heuristic on the identical instance for comparison.
pub fn certify(config: &RunConfig) -> Result<Vec<BoundsRow>> {
    let drops = config.certify_drops();
    let edge_snr_db = config.edge_snrs_db[0];
    let threshold_db = config.thresholds_db[0];
    let scenario = config.scenario.with_edge_snr(edge_snr_db);
    let bnb_options = config.bnb_options()?;
    with_pool(config.workers, || -> Result<Vec<BoundsRow>> {
        let per_drop: Vec<Vec<BoundsRow>> = (0..drops)
            .into_par_iter()
            .map(|drop_id| -> Result<Vec<BoundsRow>> {
                let drop_seed = seeds::drop_seed(config.seed, drop_id as u64);
                let realization = draw_drop(&scenario, drop_seed);
                let mut rows = Vec::new();
                for mode in [
                    SinrMode::Full,
                    SinrMode::LimitedZero,
                    SinrMode::LimitedLambda,
                ] {
                    let algorithm = Algorithm::Ssocp(mode);
                    let (masked, effective) =
                        masked_for(algorithm, &scenario, &realization, threshold_db)?;
                    let outcome = branch_and_bound(&masked, mode, &bnb_options)?;
                    let mut options = config.ssocp_options()?;
                    options.mode = mode;
                    options.seed = seeds::solver_seed(
                        config.seed,
                        drop_id as u64,
                        algorithm.id(),
                        effective,
                        edge_snr_db,
                    );
                    let ssocp_rate = match ssocp_solve(&masked, &options) {
                        Ok((precoder, _)) => {
                            let gammas = design_sinr(&masked, &precoder, mode)?;
                            weighted_sum_rate(&gammas, &masked.weights)?
                        }
                        Err(Error::Solver(_)) | Err(Error::AllRestartsFailed(_)) => f64::NAN,
                        Err(other) => return Err(other),
                    };
                    rows.push(BoundsRow {
                        drop_id,
                        mode: mode.token().to_string(),
                        bb_ub: outcome.upper,
                        bb_lb: outcome.lower,
                        ssocp_rate,
                        rounds: outcome.rounds,
                        feasibility_calls: outcome.feasibility_calls,
                    });
                }
                Ok(rows)
            })
            .collect::<Result<_>>()?;
        Ok(per_drop.into_iter().flatten().collect())
    })?
}

/// Convergence dump of drop 0 on the first threshold and edge SNR: one
/// row per (restart, iteration) objective sample of every iterative
/// algorithm in the configured list (zero forcing has no trace).
pub fn trace_run(config: &RunConfig) -> Result<Vec<TraceRow>> {
    let edge_snr_db = config.edge_snrs_db[0];
    let threshold_db = config.thresholds_db[0];
    let scenario = config.scenario.with_edge_snr(edge_snr_db);
    let drop_id = 0;
    let drop_seed = seeds::drop_seed(config.seed, drop_id as u64);
    let realization = draw_drop(&scenario, drop_seed);
    let mut rows = Vec::new();
    for &algorithm in &config.algorithms {
        if algorithm == Algorithm::Zf {
            continue;
        }
        let (masked, effective) =
            masked_for(algorithm, &scenario, &realization, threshold_db)?;
        let seed = seeds::solver_seed(
            config.seed,
            drop_id as u64,
            algorithm.id(),
            effective,
            edge_snr_db,
        );
        let trace = match algorithm {
            Algorithm::Ssocp(mode) => {
                let mut options = config.ssocp_options()?;
                options.mode = mode;
                options.seed = seed;
                ssocp_solve(&masked, &options)?.1
            }
            Algorithm::Wmmse(mode) => {
                let mut options = config.wmmse_options()?;
                options.mode = mode;
                options.seed = seed;
                wmmse_solve(&masked, &options)?.1
            }
            Algorithm::Pso(mode) => {
                let mut options = config.pso_options()?;
                options.mode = mode;
                options.seed = seed;
                pso_solve(&masked, &options)?.1
            }
            Algorithm::Zf => unreachable!("filtered above"),
        };
        for (restart, history) in trace.restarts.iter().enumerate() {
            for (iteration, &objective) in history.objectives.iter().enumerate() {
                rows.push(TraceRow {
                    drop_id,
                    algorithm: algorithm.token(),
                    restart,
                    iteration,
                    objective,
                });
            }
        }
    }
    Ok(rows)
}
