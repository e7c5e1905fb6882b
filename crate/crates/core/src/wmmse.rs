//! Alternating weighted-MMSE optimizer for the weighted sum rate.
//!
//! The rate objective is reformulated through per-user mean square errors:
//! for a fixed precoder the MMSE receive scalar gives `xi_u = 1/(1 + gamma_u)`,
//! so maximising `-sum_u alpha_u log2 xi_u` is the same problem as maximising
//! the weighted sum rate. The log is linearised with weights `d_u = 1/xi_u`,
//! leaving three exact coordinate updates per outer iteration:
//!
//! 1. precoder: minimise `sum_u alpha_u d_u xi_u(w; a_u)` over the power
//!    region (a cone program, see [`wmmse_subproblem`]),
//! 2. receive scalars `a_u` (closed form),
//! 3. linearising weights `d_u` (closed form).
//!
//! Each stage minimises the same upper bound exactly, so the convergence
//! metric `-sum_u alpha_u log2 xi_u` is non-decreasing across outer
//! iterations. All receive variances use the selected design model, so the
//! optimizer sees exactly the same limited-feedback interference picture as
//! the cone-programming route.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::conic::{self, ConicProgram, LinExpr, SolveStatus};
use crate::error::{Error, Result};
use crate::feedback::MaskedCsi;
use crate::linkvars::{add_scaled, LinkVars};
use crate::metrics::{linearizing_coefficient, mmse_receiver, user_mse, Precoder, SinrMode};
use crate::ssocp::{init_precoder, RestartTrace, SolveTrace};

#[derive(Debug, Clone)]
pub struct WmmseOptions {
    /// Outer (precoder, receiver, weight) update rounds.
    pub max_iterations: usize,
    /// Stop when the convergence metric improves by less than this,
    /// relative to `max(1, metric)`.
    pub rel_tolerance: f64,
    /// Interference model the design optimises against.
    pub mode: SinrMode,
    /// Seed for the initial precoder.
    pub seed: u64,
}

impl Default for WmmseOptions {
    fn default() -> Self {
        WmmseOptions {
            max_iterations: 200,
            rel_tolerance: 1e-4,
            mode: SinrMode::LimitedLambda,
            seed: 0,
        }
    }
}

/// Minimises `sum_u alpha_u d_u xi_u(w; a_u)` over precoders on the
/// cooperation support under the per-antenna power budget, for fixed
/// receive scalars `receivers` and weights `coefficients`.
///
/// Each user's quadratic MSE term is lifted to an epigraph variable `y_u`
/// bounding `|a_u|^2 (|s_u|^2 + interference_u)` through one second-order
/// cone, leaving a linear objective. Users whose receiver, weight or rate
/// weight is zero contribute a constant and are skipped; if every user is
/// skipped the objective is constant in `w` and the zero precoder is
/// returned without invoking the solver.
pub fn wmmse_subproblem(
    masked: &MaskedCsi,
    mode: SinrMode,
    receivers: &[Complex64],
    coefficients: &[f64],
) -> Result<Precoder> {
    if receivers.len() != masked.num_users || coefficients.len() != masked.num_users {
        return Err(Error::Dimension(format!(
            "expected {} receivers and coefficients, got {} and {}",
            masked.num_users,
            receivers.len(),
            coefficients.len()
        )));
    }
    for (u, &d) in coefficients.iter().enumerate() {
        if d < 0.0 || !d.is_finite() {
            return Err(Error::InvalidInput(format!(
                "MSE weight of user {u} must be finite and nonnegative, got {d}"
            )));
        }
    }

    let active: Vec<usize> = (0..masked.num_users)
        .filter(|&u| {
            masked.weights[u] > 0.0
                && coefficients[u] > 0.0
                && receivers[u].norm_sqr() > 0.0
        })
        .collect();
    if active.is_empty() {
        return Ok(Precoder::zero(&masked.coop, masked.n_t));
    }

    let mut prog = ConicProgram::new();
    let vars = LinkVars::allocate(&mut prog, masked);
    vars.add_power_cones(&mut prog, masked);

    // Normalizing by the largest objective weight leaves the argmin
    // unchanged but keeps the program well scaled even when a
    // linearizing coefficient grows like the SINR itself.
    let normal = active
        .iter()
        .map(|&u| masked.weights[u] * coefficients[u])
        .fold(0.0f64, f64::max);

    for &u in &active {
        let scale = masked.weights[u] * coefficients[u] / normal;
        let a = receivers[u];
        let (p_row, q_row) = vars.signal_rows(masked, u);

        // maximize 2 Re(a s_u) scaled: Re(a s) = Re(a) p - Im(a) q.
        for &(var, coef) in &p_row.terms {
            prog.maximize_term(var, 2.0 * scale * a.re * coef);
        }
        for &(var, coef) in &q_row.terms {
            prog.maximize_term(var, -2.0 * scale * a.im * coef);
        }

        // y_u >= |a|^2 (|s_u|^2 + interference_u) via
        // ||(|a| g, (y-1)/2)|| <= (y+1)/2 with g the stacked signal and
        // interference rows.
        let y = prog.add_var();
        prog.maximize_term(y, -scale);
        let magnitude = receivers[u].norm();
        let mut head = Vec::new();
        for row in [&p_row, &q_row] {
            let mut scaled_row = LinExpr::new();
            add_scaled(&mut scaled_row, row, magnitude);
            head.push(scaled_row);
        }
        for row in vars.interference_rows_all(masked, mode, u) {
            let mut scaled_row = LinExpr::new();
            add_scaled(&mut scaled_row, &row, magnitude);
            head.push(scaled_row);
        }
        let mut y_minus = LinExpr::term(y, 0.5);
        y_minus.add_constant(-0.5);
        head.push(y_minus);
        let mut y_plus = LinExpr::term(y, 0.5);
        y_plus.add_constant(0.5);
        prog.add_soc(head, y_plus);
    }

    let solution = conic::solve(&prog);
    if solution.status != SolveStatus::Optimal {
        return Err(Error::Solver(format!(
            "MSE subproblem did not solve: {}",
            solution.message.as_deref().unwrap_or("no backend message")
        )));
    }
    Ok(vars.extract(&solution.x))
}

/// Receive scalars, linearising weights, and the convergence metric
/// `-sum_u alpha_u log2 xi_u` of `precoder`, with every `xi_u` evaluated at
/// its own MMSE receiver.
fn stage_updates(
    masked: &MaskedCsi,
    precoder: &Precoder,
    mode: SinrMode,
) -> Result<(Vec<Complex64>, Vec<f64>, f64)> {
    let mut receivers = Vec::with_capacity(masked.num_users);
    let mut coefficients = Vec::with_capacity(masked.num_users);
    let mut metric = 0.0;
    for u in 0..masked.num_users {
        let a = mmse_receiver(masked, precoder, mode, u);
        let mse = user_mse(masked, precoder, mode, a, u);
        coefficients.push(linearizing_coefficient(mse)?);
        receivers.push(a);
        if masked.weights[u] > 0.0 {
            metric -= masked.weights[u] * mse.log2();
        }
    }
    Ok((receivers, coefficients, metric))
}

/// Alternating MMSE solve: random full-power start, then outer rounds of
/// (precoder subproblem, receiver update, weight update) until the metric
/// stalls. Returns the best iterate and the metric history; the history is
/// a single-restart trace whose first entry is the initial point's metric.
pub fn wmmse_solve(masked: &MaskedCsi, options: &WmmseOptions) -> Result<(Precoder, SolveTrace)> {
    validate_weights(masked)?;
    let (scaled, _) = masked.rescaled();
    let mode = options.mode;
    let mut rng = ChaCha12Rng::seed_from_u64(options.seed);

    let mut precoder = init_precoder(&scaled.coop, scaled.n_t, scaled.per_antenna_power, &mut rng);
    let (mut receivers, mut coefficients, mut metric) = stage_updates(&scaled, &precoder, mode)?;
    let mut trace = RestartTrace {
        objectives: vec![metric],
        completed: true,
    };
    let mut best = (metric, precoder.clone());

    for _ in 0..options.max_iterations {
        precoder = wmmse_subproblem(&scaled, mode, &receivers, &coefficients)?;
        let (a, d, new_metric) = stage_updates(&scaled, &precoder, mode)?;
        receivers = a;
        coefficients = d;
        trace.objectives.push(new_metric);
        if new_metric > best.0 {
            best = (new_metric, precoder.clone());
        }
        let improved = new_metric - metric;
        metric = new_metric;
        if improved.abs() <= options.rel_tolerance * metric.abs().max(1.0) {
            break;
        }
    }

    let (_, chosen) = best;
    chosen.validate_support(&masked.coop)?;
    chosen.validate_power(masked.per_antenna_power)?;
    Ok((
        chosen,
        SolveTrace {
            restarts: vec![trace],
            chosen_restart: 0,
        },
    ))
}

fn validate_weights(masked: &MaskedCsi) -> Result<()> {
    if masked.weights.iter().all(|&a| a == 0.0) {
        return Err(Error::InvalidInput(
            "at least one user weight must be positive".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{design_sinr, weighted_sum_rate};
    use crate::testutil;
    use approx::assert_relative_eq;

    fn quick_options(mode: SinrMode, seed: u64) -> WmmseOptions {
        WmmseOptions {
            max_iterations: 60,
            rel_tolerance: 1e-6,
            mode,
            seed,
        }
    }

    /// The subproblem objective recomputed from first principles.
    fn bound_objective(
        masked: &MaskedCsi,
        precoder: &Precoder,
        mode: SinrMode,
        receivers: &[Complex64],
        coefficients: &[f64],
    ) -> f64 {
        (0..masked.num_users)
            .map(|u| {
                masked.weights[u]
                    * coefficients[u]
                    * user_mse(masked, precoder, mode, receivers[u], u)
            })
            .sum()
    }

    #[test]
    fn metric_is_monotone_and_matches_design_rate() {
        for mode in [SinrMode::Full, SinrMode::LimitedLambda, SinrMode::LimitedNaive] {
            let (_, _, masked) = testutil::masked_instance(1, 42, 3.0);
            let (precoder, trace) = wmmse_solve(&masked, &quick_options(mode, 7)).unwrap();
            let objectives = &trace.restarts[0].objectives;
            assert!(objectives.len() >= 2);
            for pair in objectives.windows(2) {
                assert!(
                    pair[1] >= pair[0] - 1e-8,
                    "metric decreased under {mode:?}: {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
            // The metric is the design rate: xi at the MMSE receiver is
            // 1/(1 + gamma).
            let gammas = design_sinr(&masked, &precoder, mode).unwrap();
            let rate = weighted_sum_rate(&gammas, &masked.weights).unwrap();
            let best = objectives.iter().cloned().fold(f64::MIN, f64::max);
            assert_relative_eq!(best, rate, max_relative = 1e-9);
        }
    }

    #[test]
    fn single_winner_gets_full_power_matched_transmission() {
        let (_, masked) = testutil::toy_two_user();
        // User 1's MSE term is switched off; user 0 is served only by base
        // station 0. The receiver magnitude is small enough that the
        // unconstrained MSE optimum lies outside the power region, so the
        // solution is full power along the matched direction, and every
        // interfering weight collapses to zero.
        let receivers = vec![Complex64::new(0.1, 0.0), Complex64::new(0.0, 0.0)];
        let coefficients = vec![1.0, 0.0];
        let precoder =
            wmmse_subproblem(&masked, SinrMode::LimitedLambda, &receivers, &coefficients)
                .unwrap();
        let budget = masked.per_antenna_power.sqrt();
        let w00 = precoder.get(0, 0).unwrap()[0];
        assert!(w00.re >= 0.999 * budget, "got {w00}");
        assert!(w00.im.abs() <= 1e-3);
        assert!(precoder.get(0, 1).unwrap()[0].norm() <= 1e-2);
        assert!(precoder.get(1, 1).unwrap()[0].norm() <= 1e-2);
    }

    #[test]
    fn all_zero_receivers_return_zero_precoder() {
        let (_, masked) = testutil::toy_two_user();
        let receivers = vec![Complex64::new(0.0, 0.0); 2];
        let coefficients = vec![1.0, 1.0];
        let precoder =
            wmmse_subproblem(&masked, SinrMode::LimitedLambda, &receivers, &coefficients)
                .unwrap();
        assert_eq!(precoder.total_power(), 0.0);
        precoder.validate_support(&masked.coop).unwrap();
    }

    #[test]
    fn subproblem_is_locally_optimal() {
        let (_, masked) = testutil::toy_two_user();
        let mode = SinrMode::LimitedLambda;
        let reference = testutil::random_precoder(&masked, 11);
        let (receivers, coefficients, _) = stage_updates(&masked, &reference, mode).unwrap();
        let optimum =
            wmmse_subproblem(&masked, mode, &receivers, &coefficients).unwrap();
        let base = bound_objective(&masked, &optimum, mode, &receivers, &coefficients);
        for seed in 0..20u64 {
            let direction = testutil::random_precoder(&masked, 1000 + seed);
            let mut perturbed = optimum.clone();
            for (&(b, u), w) in direction.links() {
                let mut moved = perturbed.get(b, u).unwrap().to_vec();
                for (entry, delta) in moved.iter_mut().zip(w) {
                    *entry += 1e-4 * delta;
                }
                perturbed.set(b, u, moved).unwrap();
            }
            let loudest = perturbed.max_antenna_power();
            if loudest > masked.per_antenna_power {
                perturbed.scale((masked.per_antenna_power / loudest).sqrt());
            }
            let moved = bound_objective(&masked, &perturbed, mode, &receivers, &coefficients);
            assert!(
                moved >= base - 1e-5 * base.abs().max(1.0),
                "feasible move improved the bound: {base} -> {moved}"
            );
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let (_, _, masked) = testutil::masked_instance(1, 9, 6.0);
        let options = quick_options(SinrMode::LimitedLambda, 21);
        let (a, trace_a) = wmmse_solve(&masked, &options).unwrap();
        let (b, trace_b) = wmmse_solve(&masked, &options).unwrap();
        assert_eq!(a, b);
        assert_eq!(trace_a.restarts[0].objectives, trace_b.restarts[0].objectives);
    }

    #[test]
    fn single_user_reaches_capacity() {
        let (_, masked) = testutil::single_user(Complex64::new(1.5, 0.0), 0.5, 2.0);
        let capacity = (1.0_f64 + 2.0 * 2.25 / 0.5).log2();
        let (precoder, _) = wmmse_solve(&masked, &quick_options(SinrMode::Full, 3)).unwrap();
        let gammas = design_sinr(&masked, &precoder, SinrMode::Full).unwrap();
        let rate = weighted_sum_rate(&gammas, &masked.weights).unwrap();
        assert_relative_eq!(rate, capacity, max_relative = 1e-3);
    }

    #[test]
    fn fixed_point_satisfies_mmse_identity() {
        let (_, _, masked) = testutil::masked_instance(1, 4, 3.0);
        let mode = SinrMode::LimitedLambda;
        let (precoder, _) = wmmse_solve(&masked, &quick_options(mode, 5)).unwrap();
        let gammas = design_sinr(&masked, &precoder, mode).unwrap();
        for u in 0..masked.num_users {
            let a = mmse_receiver(&masked, &precoder, mode, u);
            let mse = user_mse(&masked, &precoder, mode, a, u);
            assert_relative_eq!(mse, 1.0 / (1.0 + gammas[u]), epsilon = 1e-9);
            let d = linearizing_coefficient(mse).unwrap();
            assert_relative_eq!(d, 1.0 + gammas[u], max_relative = 1e-9);
        }
    }
}
