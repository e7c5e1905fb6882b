//! Successive second-order-cone programming for weighted sum-rate
//! maximisation.
//!
//! The weighted sum rate `sum_u alpha_u log2(1 + gamma_u)` is maximised by
//! introducing per-user variables `t_u >= (1 + gamma_u)^alpha_u` and
//! maximising the geometric mean of the `t_u`. The SINR constraint is split
//! into
//!
//! * an interference cone: design-model interference plus noise `<= beta_u`,
//!   via the rotated-cone identity `||(r, sqrt(N0), (beta - 1)/2)|| <=
//!   (beta + 1)/2  <=>  ||r||^2 + N0 <= beta`, and
//! * a signal constraint `|s_u|^2 / beta_u + 1 >= t_u^(1/alpha_u)`, whose
//!   left side (jointly convex in `(Re s, Im s, beta)`) is replaced by its
//!   first-order expansion around the previous iterate, and whose right side
//!   is kept exact for `alpha_u = 1` and replaced by its tangent for
//!   `alpha_u > 1`.
//!
//! Each outer iteration solves the resulting cone program and re-expands
//! around the returned precoder, with the expansion `beta` taken as the
//! actual interference-plus-noise of that precoder. The expansion point is
//! then itself feasible for the next subproblem, which makes the recomputed
//! design rate non-decreasing across iterations (up to the small-SINR guard
//! below). Several randomized restarts guard against bad starting points.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::conic::{self, ConicProgram, LinExpr, SolveStatus};
use crate::error::{Error, Result};
use crate::feedback::{CooperationMap, MaskedCsi};
use crate::linkvars::{add_scaled, LinkVars};
use crate::metrics::{design_sinr, design_denominator, signal_term, weighted_sum_rate, Precoder, SinrMode};

/// Design SINRs below this are clamped when forming the expansion point, so
/// the linearization never divides by a vanishing `t - 1`.
pub const SMALL_SINR_GUARD: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SsocpOptions {
    /// Randomized restarts; the best design rate wins.
    pub max_retries: usize,
    /// Outer (linearize, solve) iterations per restart.
    pub max_iterations: usize,
    /// Stop a restart when the design rate improves by less than this,
    /// relative to `max(1, rate)`.
    pub rel_tolerance: f64,
    /// Interference model the design optimises against.
    pub mode: SinrMode,
    /// Seed for the restart initial points.
    pub seed: u64,
}

impl Default for SsocpOptions {
    fn default() -> Self {
        SsocpOptions {
            max_retries: 5,
            max_iterations: 30,
            rel_tolerance: 1e-3,
            mode: SinrMode::LimitedLambda,
            seed: 0,
        }
    }
}

/// Objective values of one restart, in iteration order. Index 0 is the rate
/// of the random initial precoder; each further entry is the design rate
/// after one subproblem solve.
#[derive(Debug, Clone)]
pub struct RestartTrace {
    pub objectives: Vec<f64>,
    /// False when the restart was abandoned on a solver failure.
    pub completed: bool,
}

/// Iteration history of a multi-restart solve.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub restarts: Vec<RestartTrace>,
    /// Index of the restart that produced the returned precoder.
    pub chosen_restart: usize,
}

impl SolveTrace {
    /// Subproblem solves performed by the winning restart.
    pub fn iterations(&self) -> usize {
        self.restarts[self.chosen_restart].objectives.len().saturating_sub(1)
    }

    pub fn restarts_used(&self) -> usize {
        self.restarts.len()
    }
}

/// Random full-power starting point: circularly symmetric Gaussian weights
/// on the cooperation support, scaled so the loudest antenna meets the
/// per-antenna budget exactly.
pub fn init_precoder(
    map: &CooperationMap,
    n_t: usize,
    per_antenna_power: f64,
    rng: &mut impl Rng,
) -> Precoder {
    let mut precoder = Precoder::zero(map, n_t);
    for (b, u) in map.links() {
        let vector: Vec<Complex64> = (0..n_t)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        precoder.set(b, u, vector).expect("map links are sized n_t");
    }
    let loudest = precoder.max_antenna_power();
    if loudest > 0.0 {
        precoder.scale((per_antenna_power / loudest).sqrt());
    }
    precoder
}

/// Expansion point of one user's signal constraint.
#[derive(Debug, Clone, Copy)]
pub struct Expansion {
    /// Re and Im of the intended signal at the expansion precoder.
    pub p: f64,
    pub q: f64,
    /// Interference-plus-noise at the expansion precoder (always positive).
    pub beta: f64,
    /// Target epigraph value `(1 + gamma)^alpha`, guarded away from 1.
    pub t: f64,
}

/// Coefficients of the linearized signal expression
/// `L = (2 p~ p + 2 q~ q - (p~^2 + q~^2) beta / beta~) / beta~ + 1`,
/// the tangent of `(p^2 + q^2) / beta + 1` at the expansion point.
///
/// Because `(p^2 + q^2) / beta` is jointly convex for `beta > 0`, the
/// tangent never over-estimates it, which keeps every iterate of the
/// successive approximation feasible for the true problem.
pub fn linearize_signal(point: &Expansion) -> Result<(f64, f64, f64, f64)> {
    if !(point.beta > 0.0 && point.beta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "linearization requires positive interference-plus-noise, got {}",
            point.beta
        )));
    }
    let p_coef = 2.0 * point.p / point.beta;
    let q_coef = 2.0 * point.q / point.beta;
    let beta_coef = -(point.p * point.p + point.q * point.q) / (point.beta * point.beta);
    Ok((p_coef, q_coef, beta_coef, 1.0))
}

/// Re-expands around `precoder`: signal components from the known CSI, `beta`
/// as the actual design-model interference-plus-noise, and `t = (1 +
/// gamma)^alpha` with the small-SINR guard.
pub(crate) fn expansion_from(
    masked: &MaskedCsi,
    precoder: &Precoder,
    mode: SinrMode,
    user: usize,
    alpha: f64,
) -> Expansion {
    let signal = signal_term(masked, precoder, user);
    let beta = design_denominator(masked, precoder, mode, user);
    let gamma = signal.norm_sqr() / beta;
    let t = if gamma < SMALL_SINR_GUARD {
        1.0 + SMALL_SINR_GUARD
    } else {
        (1.0 + gamma).powf(alpha)
    };
    Expansion {
        p: signal.re,
        q: signal.im,
        beta,
        t,
    }
}

/// Builds the convex subproblem around the given expansion points.
/// `expansions[u]` is `None` for zero-weight users, which are excluded from
/// the objective and carry no SINR constraints (interference they cause is
/// still fully modelled).
fn build_subproblem(
    masked: &MaskedCsi,
    mode: SinrMode,
    expansions: &[Option<Expansion>],
) -> Result<(ConicProgram, LinkVars)> {
    let mut prog = ConicProgram::new();
    let vars = LinkVars::allocate(&mut prog, masked);
    vars.add_power_cones(&mut prog, masked);

    let mut t_vars = Vec::new();
    for (u, expansion) in expansions.iter().enumerate() {
        let Some(point) = expansion else { continue };
        let alpha = masked.weights[u];
        let t = prog.add_var();
        let beta = prog.add_var();
        t_vars.push(t);

        // Interference cone: ||(rows, sqrt(N0), (beta - 1)/2)|| <= (beta + 1)/2.
        let mut head = vars.interference_rows_all(masked, mode, u);
        head.push(LinExpr::constant(masked.noise_power.sqrt()));
        let mut beta_minus = LinExpr::term(beta, 0.5);
        beta_minus.add_constant(-0.5);
        head.push(beta_minus);
        let mut beta_plus = LinExpr::term(beta, 0.5);
        beta_plus.add_constant(0.5);
        prog.add_soc(head, beta_plus);

        // Signal constraint: rhs(t) - L(p, q, beta) <= 0.
        let (p_coef, q_coef, beta_coef, offset) = linearize_signal(point)?;
        let (p_row, q_row) = vars.signal_rows(masked, u);
        let mut expr = LinExpr::new();
        if (alpha - 1.0).abs() < 1e-12 {
            expr.add_term(t, 1.0);
        } else {
            // Tangent of the concave t^(1/alpha) at the expansion t.
            let root = point.t.powf(1.0 / alpha);
            let slope = root / (alpha * point.t);
            expr.add_constant(root - slope * point.t);
            expr.add_term(t, slope);
        }
        add_scaled(&mut expr, &p_row, -p_coef);
        add_scaled(&mut expr, &q_row, -q_coef);
        expr.add_term(beta, -beta_coef);
        expr.add_constant(-offset);
        prog.add_le(expr);
    }

    let epigraph = conic::geo_mean_epigraph(&mut prog, &t_vars)?;
    prog.maximize_term(epigraph, 1.0);
    Ok((prog, vars))
}

/// Maximises the design-model weighted sum rate by successive convex
/// approximation, returning the best precoder across restarts together with
/// the full iteration trace.
pub fn ssocp_solve(masked: &MaskedCsi, options: &SsocpOptions) -> Result<(Precoder, SolveTrace)> {
    validate_weights(masked)?;
    let (scaled, _) = masked.rescaled();
    let mode = options.mode;
    let mut rng = ChaCha12Rng::seed_from_u64(options.seed);

    let mut best: Option<(f64, Precoder, usize)> = None;
    let mut restarts = Vec::with_capacity(options.max_retries);
    for restart in 0..options.max_retries {
        let mut precoder = init_precoder(&scaled.coop, scaled.n_t, scaled.per_antenna_power, &mut rng);
        let mut rate = design_rate(&scaled, &precoder, mode)?;
        let mut trace = RestartTrace {
            objectives: vec![rate],
            completed: true,
        };
        // Best iterate of this restart; the random start alone never counts.
        let mut local_best: Option<(f64, Precoder)> = None;
        for _ in 0..options.max_iterations {
            let expansions: Vec<Option<Expansion>> = (0..scaled.num_users)
                .map(|u| {
                    (scaled.weights[u] > 0.0)
                        .then(|| expansion_from(&scaled, &precoder, mode, u, scaled.weights[u]))
                })
                .collect();
            let (prog, vars) = build_subproblem(&scaled, mode, &expansions)?;
            let solution = conic::solve(&prog);
            if solution.status != SolveStatus::Optimal {
                trace.completed = false;
                break;
            }
            let candidate = vars.extract(&solution.x);
            let candidate_rate = design_rate(&scaled, &candidate, mode)?;
            trace.objectives.push(candidate_rate);
            let improved = candidate_rate - rate;
            precoder = candidate;
            if local_best.as_ref().is_none_or(|(r, _)| candidate_rate > *r) {
                local_best = Some((candidate_rate, precoder.clone()));
            }
            rate = candidate_rate;
            if improved.abs() <= options.rel_tolerance * rate.abs().max(1.0) {
                break;
            }
        }
        restarts.push(trace);
        if let Some((local_rate, local_precoder)) = local_best {
            if best.as_ref().is_none_or(|(r, _, _)| local_rate > *r) {
                best = Some((local_rate, local_precoder, restart));
            }
        }
    }

    let Some((_, precoder, chosen_restart)) = best else {
        return Err(Error::AllRestartsFailed(options.max_retries));
    };
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

fn design_rate(masked: &MaskedCsi, precoder: &Precoder, mode: SinrMode) -> Result<f64> {
    let gammas = design_sinr(masked, precoder, mode)?;
    weighted_sum_rate(&gammas, &masked.weights)
}

fn validate_weights(masked: &MaskedCsi) -> Result<()> {
    if masked.weights.iter().all(|&a| a == 0.0) {
        return Err(Error::InvalidInput(
            "at least one user weight must be positive".into(),
        ));
    }
    for &alpha in &masked.weights {
        if alpha != 0.0 && alpha < 1.0 {
            return Err(Error::InvalidInput(format!(
                "rate weights must be 0 or >= 1 for the cone formulation, got {alpha}"
            )));
        }
    }
    Ok(())
}

impl LinkVars {
    /// Interference rows of every interferer of `user`, concatenated.
    pub(crate) fn interference_rows_all(
        &self,
        masked: &MaskedCsi,
        mode: SinrMode,
        user: usize,
    ) -> Vec<LinExpr> {
        let mut rows = Vec::new();
        for i in 0..masked.num_users {
            if i != user {
                rows.extend(self.interference_rows(masked, mode, i, user));
            }
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil;
    use approx::assert_relative_eq;

    fn quick_options(mode: SinrMode, seed: u64) -> SsocpOptions {
        SsocpOptions {
            max_retries: 2,
            max_iterations: 12,
            rel_tolerance: 1e-4,
            mode,
            seed,
        }
    }

    #[test]
    fn init_precoder_hits_the_power_budget() {
        let (_, _, masked) = testutil::masked_instance(3, 1, 3.0);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let precoder = init_precoder(&masked.coop, masked.n_t, masked.per_antenna_power, &mut rng);
        precoder.validate_support(&masked.coop).unwrap();
        precoder.validate_power(masked.per_antenna_power).unwrap();
        assert_relative_eq!(
            precoder.max_antenna_power(),
            masked.per_antenna_power,
            max_relative = 1e-9
        );
    }

    /// At the expansion point the linearized signal expression reproduces
    /// `(p^2 + q^2) / beta + 1` exactly (tangency).
    #[test]
    fn linearization_is_tight_at_the_expansion_point() {
        let point = Expansion {
            p: 1.5,
            q: -0.5,
            beta: 2.0,
            t: 2.25,
        };
        let (cp, cq, cb, offset) = linearize_signal(&point).unwrap();
        let value = cp * point.p + cq * point.q + cb * point.beta + offset;
        let exact = (point.p * point.p + point.q * point.q) / point.beta + 1.0;
        assert_relative_eq!(value, exact, max_relative = 1e-12);
        // And it under-estimates elsewhere (convexity of the exact lhs).
        for (p, q, beta) in [(2.0, 0.0, 2.0), (1.5, -0.5, 3.0), (0.5, 0.5, 1.0)] {
            let lin = cp * p + cq * q + cb * beta + offset;
            let exact = (p * p + q * q) / beta + 1.0;
            assert!(lin <= exact + 1e-12);
        }
        assert!(linearize_signal(&Expansion {
            p: 0.0,
            q: 0.0,
            beta: 0.0,
            t: 1.0
        })
        .is_err());
    }

    /// With unit weights the expansion beta coincides with the classic
    /// `|s|^2 / gamma` update away from zero SINR.
    #[test]
    fn expansion_beta_is_interference_plus_noise() {
        let (_, masked) = testutil::toy_two_user();
        let precoder = testutil::random_precoder(&masked, 21);
        let point = expansion_from(&masked, &precoder, SinrMode::LimitedLambda, 0, 1.0);
        let signal = point.p * point.p + point.q * point.q;
        let gamma = signal / point.beta;
        assert_relative_eq!(point.t, 1.0 + gamma, max_relative = 1e-12);
        assert_relative_eq!(signal / gamma, point.beta, max_relative = 1e-12);
    }

    /// Single-user case has a closed form: per-antenna matched filtering at
    /// full power, giving SINR `P (sum_k |h_k|)^2 / N0` for one base station.
    #[test]
    fn single_user_reaches_the_matched_filter_bound() {
        let (_, mut masked) = testutil::toy_two_user();
        // Restrict to one active user by zeroing the other's weight.
        masked.weights = vec![1.0, 0.0];
        let options = quick_options(SinrMode::LimitedLambda, 3);
        let (precoder, _) = ssocp_solve(&masked, &options).unwrap();
        let gammas = design_sinr(&masked, &precoder, SinrMode::LimitedLambda).unwrap();
        // User 0 is served by bs 0 alone with h = 1: gamma* = P / N0 = 8.
        let optimum = masked.per_antenna_power / masked.noise_power;
        assert!(
            gammas[0] >= 0.99 * optimum,
            "gamma {} vs optimum {optimum}",
            gammas[0]
        );
        // The idle user's weights shrink to (numerical) zero.
        let idle: f64 = masked
            .coop
            .serving(1)
            .iter()
            .map(|&b| {
                precoder.get(b, 1).unwrap().iter().map(|w| w.norm_sqr()).sum::<f64>()
            })
            .sum();
        assert!(idle <= 1e-6 * masked.per_antenna_power, "idle power {idle}");
    }

    /// The recomputed design rate never drops across iterations (up to the
    /// small-SINR guard), in every interference mode.
    #[test]
    fn traces_are_monotone() {
        for (seed, mode) in [
            (2u64, SinrMode::LimitedLambda),
            (3, SinrMode::LimitedZero),
            (4, SinrMode::LimitedNaive),
            (5, SinrMode::Full),
        ] {
            let threshold = if mode == SinrMode::Full { f64::INFINITY } else { 3.0 };
            let (_, _, masked) = testutil::masked_instance(1, seed, threshold);
            let (_, trace) = ssocp_solve(&masked, &quick_options(mode, seed)).unwrap();
            for restart in &trace.restarts {
                for pair in restart.objectives.windows(2) {
                    assert!(
                        pair[1] >= pair[0] - 1e-6,
                        "trace decreased: {} -> {} (mode {mode:?})",
                        pair[0],
                        pair[1]
                    );
                }
            }
        }
    }

    #[test]
    fn returned_precoder_is_feasible_and_deterministic() {
        let (_, _, masked) = testutil::masked_instance(2, 6, 3.0);
        let options = quick_options(SinrMode::LimitedLambda, 11);
        let (a, trace_a) = ssocp_solve(&masked, &options).unwrap();
        let (b, trace_b) = ssocp_solve(&masked, &options).unwrap();
        assert_eq!(a, b);
        assert_eq!(trace_a.chosen_restart, trace_b.chosen_restart);
        assert_eq!(
            trace_a.restarts[0].objectives, trace_b.restarts[0].objectives
        );
        a.validate_support(&masked.coop).unwrap();
        a.validate_power(masked.per_antenna_power).unwrap();
    }

    #[test]
    fn fractional_weights_are_rejected() {
        let (_, mut masked) = testutil::toy_two_user();
        masked.weights = vec![0.5, 1.0];
        assert!(ssocp_solve(&masked, &SsocpOptions::default()).is_err());
        masked.weights = vec![0.0, 0.0];
        assert!(ssocp_solve(&masked, &SsocpOptions::default()).is_err());
    }

    /// Weights >= 1 are supported through the tangent upper bound on
    /// t^(1/alpha); the weighted user ends up favoured.
    #[test]
    fn integer_weights_skew_the_allocation() {
        let (_, _, masked) = testutil::masked_instance(1, 9, f64::INFINITY);
        let mut weighted = masked.clone();
        weighted.weights = vec![3.0, 1.0, 1.0];
        let options = quick_options(SinrMode::Full, 2);
        let (balanced, _) = ssocp_solve(&masked, &options).unwrap();
        let (skewed, _) = ssocp_solve(&weighted, &options).unwrap();
        let base = design_sinr(&masked, &balanced, SinrMode::Full).unwrap();
        let favored = design_sinr(&weighted, &skewed, SinrMode::Full).unwrap();
        assert!(favored[0] > base[0], "{} vs {}", favored[0], base[0]);
    }
}
