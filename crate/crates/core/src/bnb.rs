//! Branch-and-bound certification of the weighted-sum-rate optimum in SINR
//! space.
//!
//! The achievable SINR region is downward closed, so a hyperrectangle
//! `[gamma_min, gamma_max]` brackets the optimum whenever its lower corner is
//! feasible. Each box contributes an upper bound (the weighted rate of its
//! upper corner) and a certified lower bound (the weighted rate of a corner
//! proven feasible by an SOCP oracle). The search repeatedly splits the box
//! with the largest upper bound along its longest edge, measured in weighted
//! rate, until the global bounds meet.
//!
//! The feasibility oracle restricts each user's received signal inner
//! product to be real and nonnegative — lossless, since rotating one user's
//! precoder block by a common phase changes no power and no interference —
//! which turns the SINR target into a plain second-order cone row.

use crate::conic::{self, ConicProgram, LinExpr, SolveStatus};
use crate::error::{Error, Result};
use crate::feedback::MaskedCsi;
use crate::linkvars::{add_scaled, LinkVars};
use crate::metrics::{weighted_sum_rate, Precoder, SinrMode};

#[derive(Debug, Clone)]
pub struct BnbOptions {
    /// Terminate once the global bounds are within this many bps/Hz.
    pub epsilon: f64,
    /// Maximum number of split rounds.
    pub max_rounds: usize,
    /// Bracket width at which per-coordinate bisection stops.
    pub bisection_epsilon: f64,
    /// Debug: record each examined box's own `(b_lb, b_ub)` pair in the
    /// history instead of the global bound trajectory. The search itself
    /// is unaffected.
    pub verbatim_bounds: bool,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            epsilon: 0.1,
            max_rounds: 100,
            bisection_epsilon: 0.01,
            verbatim_bounds: false,
        }
    }
}

/// A hyperrectangle of per-user SINR targets with its rate bounds.
#[derive(Debug, Clone)]
pub struct BnbBox {
    pub gamma_min: Vec<f64>,
    pub gamma_max: Vec<f64>,
    /// Weighted rate of the (tightened) upper corner.
    pub b_ub: f64,
    /// Weighted rate of a corner certified feasible by the oracle.
    pub b_lb: f64,
    /// Precoder attaining at least `b_lb`.
    pub best_precoder: Option<Precoder>,
}

/// Verdict of the SINR-target feasibility oracle.
#[derive(Debug, Clone)]
pub enum Feasibility {
    Feasible(Box<Precoder>),
    Infeasible,
    /// The backend neither solved nor produced an infeasibility
    /// certificate. Callers must treat this as "unproven", never as
    /// evidence.
    SolverFailure,
}

/// Root box: `gamma_min = 0` and the Cauchy-Schwarz power bound
/// `gamma_max_u = |B_u| N_T P sum_{b in B_u} ||h_{b,u}||^2 / N_0`, which no
/// feasible precoder can exceed even with all interference removed.
pub fn initial_box(masked: &MaskedCsi) -> BnbBox {
    let mut gamma_max = Vec::with_capacity(masked.num_users);
    for u in 0..masked.num_users {
        let serving = masked.coop.serving(u);
        let channel_power: f64 = serving
            .iter()
            .map(|&b| {
                masked.known[&(b, u)]
                    .iter()
                    .map(|h| h.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        let cap = serving.len() as f64 * masked.n_t as f64 * masked.per_antenna_power
            * channel_power
            / masked.noise_power;
        gamma_max.push(cap);
    }
    BnbBox {
        gamma_min: vec![0.0; masked.num_users],
        gamma_max,
        b_ub: f64::INFINITY,
        b_lb: 0.0,
        best_precoder: None,
    }
}

/// Decides whether the per-user SINR targets `gammas` are jointly
/// achievable under the design model `mode`, returning an attaining
/// precoder when they are. Targets of zero impose no constraint; the
/// all-zero target is feasible with the zero precoder without invoking
/// the solver.
pub fn feasibility_check(
    gammas: &[f64],
    masked: &MaskedCsi,
    mode: SinrMode,
) -> Result<Feasibility> {
    if gammas.len() != masked.num_users {
        return Err(Error::Dimension(format!(
            "expected {} SINR targets, got {}",
            masked.num_users,
            gammas.len()
        )));
    }
    for &g in gammas {
        if g < 0.0 || !g.is_finite() {
            return Err(Error::InvalidInput(format!(
                "SINR targets must be finite and nonnegative, got {g}"
            )));
        }
    }
    if gammas.iter().all(|&g| g == 0.0) {
        return Ok(Feasibility::Feasible(Box::new(Precoder::zero(
            &masked.coop,
            masked.n_t,
        ))));
    }

    let (scaled, _) = masked.rescaled();
    let mut prog = ConicProgram::new();
    let vars = LinkVars::allocate(&mut prog, &scaled);
    vars.add_power_cones(&mut prog, &scaled);
    for (u, &gamma) in gammas.iter().enumerate() {
        if gamma == 0.0 {
            continue;
        }
        let (p_row, q_row) = vars.signal_rows(&scaled, u);
        // Phase rotation: pin the signal inner product to the real axis.
        prog.add_eq(q_row);
        // gamma <= |s|^2 / (I + N_0)  <=>
        // ||(s, interference, sqrt(N_0))|| <= sqrt(1 + 1/gamma) * s.
        let mut head = vec![p_row.clone()];
        head.extend(vars.interference_rows_all(&scaled, mode, u));
        head.push(LinExpr::constant(scaled.noise_power.sqrt()));
        let mut bound = LinExpr::new();
        add_scaled(&mut bound, &p_row, (1.0 + 1.0 / gamma).sqrt());
        prog.add_soc(head, bound);
    }

    let solution = conic::solve(&prog);
    match solution.status {
        SolveStatus::Optimal => Ok(Feasibility::Feasible(Box::new(vars.extract(&solution.x)))),
        SolveStatus::Infeasible => Ok(Feasibility::Infeasible),
        SolveStatus::NumericalFailure => Ok(Feasibility::SolverFailure),
    }
}

/// Counters shared by the tightening and bounding passes.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleStats {
    pub feasibility_calls: usize,
    pub solver_warnings: usize,
}

/// Per-coordinate bisection of `gamma_max` towards the feasible boundary,
/// holding the other coordinates at `gamma_min`. A coordinate whose corner
/// probe is already feasible is left untouched. The tightened value is the
/// upper end of the final bracket, so it never cuts off a feasible point;
/// a solver failure stops the coordinate at the best proven bracket.
pub fn bisection_tighten(
    bnb_box: &BnbBox,
    masked: &MaskedCsi,
    mode: SinrMode,
    epsilon: f64,
    stats: &mut OracleStats,
) -> Result<Vec<f64>> {
    let mut tightened = bnb_box.gamma_max.clone();
    for u in 0..masked.num_users {
        let mut lo = bnb_box.gamma_min[u];
        let mut hi = bnb_box.gamma_max[u];
        if hi - lo <= epsilon {
            continue;
        }
        let probe_at = |x: f64| {
            let mut point = bnb_box.gamma_min.clone();
            point[u] = x;
            point
        };
        stats.feasibility_calls += 1;
        match feasibility_check(&probe_at(hi), masked, mode)? {
            Feasibility::Feasible(_) => continue,
            Feasibility::SolverFailure => {
                stats.solver_warnings += 1;
                continue;
            }
            Feasibility::Infeasible => {}
        }
        while hi - lo > epsilon {
            let mid = 0.5 * (lo + hi);
            stats.feasibility_calls += 1;
            match feasibility_check(&probe_at(mid), masked, mode)? {
                Feasibility::Feasible(_) => lo = mid,
                Feasibility::Infeasible => hi = mid,
                Feasibility::SolverFailure => {
                    stats.solver_warnings += 1;
                    break;
                }
            }
        }
        tightened[u] = hi;
    }
    Ok(tightened)
}

/// Rate bounds of a tightened box.
#[derive(Debug, Clone)]
pub struct BoxBounds {
    pub b_ub: f64,
    pub b_lb: f64,
    pub certificate: Option<Precoder>,
}

/// Bounds a tightened box: the upper bound is the weighted rate of the
/// upper corner; the lower bound is the weighted rate of the corner the
/// oracle certifies — the upper corner when jointly feasible, else the
/// lower corner. A box whose lower corner is infeasible contains no
/// feasible point at all (the region is downward closed) and gets (0, 0).
pub fn box_bounds(
    bnb_box: &BnbBox,
    masked: &MaskedCsi,
    mode: SinrMode,
    stats: &mut OracleStats,
) -> Result<BoxBounds> {
    let weights = &masked.weights;
    let corner_rate = weighted_sum_rate(&bnb_box.gamma_max, weights)?;
    let floor_rate = weighted_sum_rate(&bnb_box.gamma_min, weights)?;

    let floor_zero = bnb_box.gamma_min.iter().all(|&g| g == 0.0);
    if !floor_zero {
        stats.feasibility_calls += 1;
    }
    let floor_certificate = match feasibility_check(&bnb_box.gamma_min, masked, mode)? {
        Feasibility::Feasible(precoder) => Some(*precoder),
        Feasibility::Infeasible => {
            return Ok(BoxBounds {
                b_ub: 0.0,
                b_lb: 0.0,
                certificate: None,
            });
        }
        Feasibility::SolverFailure => {
            stats.solver_warnings += 1;
            None
        }
    };

    stats.feasibility_calls += 1;
    match feasibility_check(&bnb_box.gamma_max, masked, mode)? {
        Feasibility::Feasible(precoder) => Ok(BoxBounds {
            b_ub: corner_rate,
            b_lb: corner_rate,
            certificate: Some(*precoder),
        }),
        Feasibility::Infeasible => Ok(BoxBounds {
            b_ub: corner_rate,
            b_lb: if floor_certificate.is_some() {
                floor_rate
            } else {
                0.0
            },
            certificate: floor_certificate,
        }),
        Feasibility::SolverFailure => {
            stats.solver_warnings += 1;
            Ok(BoxBounds {
                b_ub: corner_rate,
                b_lb: if floor_certificate.is_some() {
                    floor_rate
                } else {
                    0.0
                },
                certificate: floor_certificate,
            })
        }
    }
}

/// Result of a branch-and-bound run.
#[derive(Debug, Clone)]
pub struct BnbOutcome {
    /// Certified upper bound on the weighted sum rate.
    pub upper: f64,
    /// Certified achievable weighted sum rate.
    pub lower: f64,
    /// Precoder attaining at least `lower`.
    pub precoder: Precoder,
    pub rounds: usize,
    pub feasibility_calls: usize,
    pub solver_warnings: usize,
    /// Global `(upper, lower)` after the root round and after each split
    /// round; with `verbatim_bounds`, each examined box's `(b_lb, b_ub)`
    /// pair instead.
    pub history: Vec<(f64, f64)>,
    /// True when the gap closed within `epsilon` before `max_rounds`.
    pub converged: bool,
}

fn tighten_and_bound(
    mut bnb_box: BnbBox,
    masked: &MaskedCsi,
    mode: SinrMode,
    options: &BnbOptions,
    stats: &mut OracleStats,
) -> Result<BnbBox> {
    bnb_box.gamma_max =
        bisection_tighten(&bnb_box, masked, mode, options.bisection_epsilon, stats)?;
    let bounds = box_bounds(&bnb_box, masked, mode, stats)?;
    bnb_box.b_ub = bounds.b_ub;
    bnb_box.b_lb = bounds.b_lb;
    bnb_box.best_precoder = bounds.certificate;
    Ok(bnb_box)
}

/// Weighted-rate length of edge `u`, the splitting metric.
fn edge_length(bnb_box: &BnbBox, weights: &[f64], u: usize) -> f64 {
    weights[u] * ((1.0 + bnb_box.gamma_max[u]).log2() - (1.0 + bnb_box.gamma_min[u]).log2())
}

/// Brackets the optimal weighted sum rate under design model `mode` between
/// a certified achievable rate and a certified upper bound.
pub fn branch_and_bound(
    masked: &MaskedCsi,
    mode: SinrMode,
    options: &BnbOptions,
) -> Result<BnbOutcome> {
    if options.epsilon <= 0.0 || options.bisection_epsilon <= 0.0 {
        return Err(Error::InvalidInput(
            "branch-and-bound tolerances must be positive".into(),
        ));
    }
    let weights = masked.weights.clone();
    let mut stats = OracleStats::default();

    let root = tighten_and_bound(initial_box(masked), masked, mode, options, &mut stats)?;
    let mut best_lower = root.b_lb;
    let mut best_precoder = root
        .best_precoder
        .clone()
        .unwrap_or_else(|| Precoder::zero(&masked.coop, masked.n_t));
    let mut active = vec![root];
    let mut upper = global_upper(best_lower, &active);
    let mut history = vec![(upper, best_lower)];
    let mut rounds = 0;

    while upper - best_lower > options.epsilon && rounds < options.max_rounds {
        let Some(selected) = active
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.b_ub.total_cmp(&b.1.b_ub).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
        else {
            break;
        };
        let parent = active.swap_remove(selected);
        rounds += 1;

        let split = (0..masked.num_users)
            .max_by(|&a, &b| {
                edge_length(&parent, &weights, a).total_cmp(&edge_length(&parent, &weights, b))
            })
            .expect("boxes have at least one edge");
        // Midpoint halving the edge's rate contribution, not its SINR span.
        let mid =
            ((1.0 + parent.gamma_min[split]) * (1.0 + parent.gamma_max[split])).sqrt() - 1.0;

        for half in 0..2 {
            let mut child = parent.clone();
            if half == 0 {
                child.gamma_max[split] = mid;
            } else {
                child.gamma_min[split] = mid;
            }
            let child = tighten_and_bound(child, masked, mode, options, &mut stats)?;
            if child.b_lb > best_lower {
                best_lower = child.b_lb;
                if let Some(precoder) = &child.best_precoder {
                    best_precoder = precoder.clone();
                }
            }
            if options.verbatim_bounds {
                history.push((child.b_lb, child.b_ub));
            }
            if child.b_ub > best_lower {
                active.push(child);
            }
        }
        active.retain(|b| b.b_ub > best_lower);
        upper = global_upper(best_lower, &active);
        if !options.verbatim_bounds {
            history.push((upper, best_lower));
        }
    }

    best_precoder.validate_support(&masked.coop)?;
    best_precoder.validate_power(masked.per_antenna_power)?;
    Ok(BnbOutcome {
        upper,
        lower: best_lower,
        precoder: best_precoder,
        rounds,
        feasibility_calls: stats.feasibility_calls,
        solver_warnings: stats.solver_warnings,
        history,
        converged: upper - best_lower <= options.epsilon,
    })
}

fn global_upper(best_lower: f64, active: &[BnbBox]) -> f64 {
    active
        .iter()
        .map(|b| b.b_ub)
        .fold(best_lower, f64::max)
}
