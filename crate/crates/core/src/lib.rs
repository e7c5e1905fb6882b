//! Joint-transmission coordinated multi-point (CoMP) precoder design under
//! limited channel-state feedback and finite backhaul.
//!
//! A cluster of base stations jointly serves a set of single-antenna users.
//! Each user feeds back full channel vectors only for the strongest base
//! stations (selected by a relative threshold) and long-term statistics for
//! the rest, so every precoder design here works from a [`feedback::MaskedCsi`]
//! view of the channel rather than the full realization.
//!
//! The crate is organised bottom-up:
//!
//! * [`scenario`] — cell geometry, pathloss/shadowing/fading draws, power
//!   calibration.
//! * [`feedback`] — relative-threshold base-station selection and CSI masking.
//! * [`metrics`] — precoder containers, SINR models (true, pessimistic
//!   statistical, naive), rates and MSE quantities.
//! * [`conic`] — a small second-order-cone program builder with an interior
//!   point backend and an independent residual checker.
//! * [`ssocp`] — successive second-order-cone programming for weighted
//!   sum-rate maximisation.
//! * [`wmmse`] — weighted MMSE alternating optimisation adapted to the
//!   statistical interference model.
//! * [`baselines`] — zero-forcing and particle-swarm reference designs.
//! * [`bnb`] — a branch-and-bound certifier producing global upper/lower
//!   bounds on the attainable weighted sum rate.
//! * [`harness`] — Monte-Carlo experiment driver, seed derivation and CSV
//!   emission.

// Indexed user/base-station loops mirror the per-user math throughout;
// iterator rewrites would obscure which set is being summed over.
#![allow(clippy::needless_range_loop)]

pub mod baselines;
pub mod bnb;
pub mod conic;
pub mod error;
pub mod feedback;
pub mod harness;
pub mod metrics;
pub mod scenario;
pub mod ssocp;
pub mod wmmse;

mod linkvars;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use feedback::{CooperationMap, MaskedCsi};
pub use metrics::{Precoder, SinrMode};
pub use scenario::{ChannelRealization, Scenario};
