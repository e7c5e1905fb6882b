//! Relative-threshold base-station selection and CSI masking.
//!
//! Each user ranks the base stations by mean received power `n_t *
//! lambda_sq_{b,u}` and feeds back full channel vectors only for those within
//! `threshold_db` of its strongest base station. For the remaining links the
//! network knows nothing but the long-term gain, so precoder design sees a
//! [`MaskedCsi`] view: exact vectors on the cooperation links, statistics
//! everywhere else.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scenario::{ChannelRealization, Scenario};

/// Per-user serving sets `B_u` (and the transposed per-base-station view).
#[derive(Debug, Clone, PartialEq)]
pub struct CooperationMap {
    serving: Vec<BTreeSet<usize>>,
    served: Vec<BTreeSet<usize>>,
    /// Threshold the map was built with; `f64::INFINITY` for full cooperation.
    pub threshold_db: f64,
}

impl CooperationMap {
    /// Builds a map from explicit serving sets, validating that none is empty.
    pub fn from_serving_sets(
        serving: Vec<BTreeSet<usize>>,
        num_bs: usize,
        threshold_db: f64,
    ) -> Result<Self> {
        if serving.iter().any(|set| set.is_empty()) {
            return Err(Error::InvalidInput(
                "every user must be served by at least one base station".into(),
            ));
        }
        if serving
            .iter()
            .any(|set| set.iter().any(|&b| b >= num_bs))
        {
            return Err(Error::Dimension(
                "serving set references a base station outside the cluster".into(),
            ));
        }
        let mut served = vec![BTreeSet::new(); num_bs];
        for (user, set) in serving.iter().enumerate() {
            for &b in set {
                served[b].insert(user);
            }
        }
        Ok(CooperationMap {
            serving,
            served,
            threshold_db,
        })
    }

    /// Full cooperation: every base station serves every user.
    pub fn full(num_bs: usize, num_users: usize) -> Self {
        let all: BTreeSet<usize> = (0..num_bs).collect();
        let serving = vec![all; num_users];
        CooperationMap::from_serving_sets(serving, num_bs, f64::INFINITY)
            .expect("full map is always valid")
    }

    /// Base stations serving user `u`.
    pub fn serving(&self, user: usize) -> &BTreeSet<usize> {
        &self.serving[user]
    }

    /// Users served by base station `b`.
    pub fn served(&self, bs: usize) -> &BTreeSet<usize> {
        &self.served[bs]
    }

    pub fn contains(&self, bs: usize, user: usize) -> bool {
        self.serving[user].contains(&bs)
    }

    pub fn num_users(&self) -> usize {
        self.serving.len()
    }

    pub fn num_bs(&self) -> usize {
        self.served.len()
    }

    /// Active links `(bs, user)` in deterministic (bs, user) order.
    pub fn links(&self) -> Vec<(usize, usize)> {
        let mut links = Vec::new();
        for (b, users) in self.served.iter().enumerate() {
            for &u in users {
                links.push((b, u));
            }
        }
        links
    }

    pub fn num_links(&self) -> usize {
        self.serving.iter().map(BTreeSet::len).sum()
    }
}

/// Selects each user's serving base stations by relative thresholding.
///
/// Base station `b` enters `B_u` when its mean received power is within
/// `threshold_db` of the user's strongest base station:
/// `10 log10(max_b' n_t lambda_sq_{b',u}) - 10 log10(n_t lambda_sq_{b,u}) <=
/// threshold_db`. Ties sit exactly on the boundary and are included. The
/// strongest base station always passes, so serving sets are never empty;
/// `threshold_db = inf` yields full cooperation.
pub fn relative_threshold(
    realization: &ChannelRealization,
    threshold_db: f64,
) -> Result<CooperationMap> {
    if threshold_db.is_nan() || threshold_db < 0.0 {
        return Err(Error::InvalidInput(
            "threshold_db must be nonnegative (or inf for full cooperation)".into(),
        ));
    }
    let n_t = realization.n_t as f64;
    let mut serving = Vec::with_capacity(realization.num_users);
    for u in 0..realization.num_users {
        let mut best = f64::NEG_INFINITY;
        for b in 0..realization.num_bs {
            best = best.max(n_t * realization.lambda_sq[&(b, u)]);
        }
        let mut set = BTreeSet::new();
        for b in 0..realization.num_bs {
            let mean_power = n_t * realization.lambda_sq[&(b, u)];
            let gap_db = 10.0 * (best / mean_power).log10();
            if gap_db <= threshold_db {
                set.insert(b);
            }
        }
        serving.push(set);
    }
    CooperationMap::from_serving_sets(serving, realization.num_bs, threshold_db)
}

/// Feedback and backhaul volume implied by a cooperation map: complex CSI
/// coefficients fed back by the users and complex precoder weights moved
/// over the backhaul. Both count `n_t` coefficients per selected link.
pub fn backhaul_load(map: &CooperationMap, n_t: usize) -> (usize, usize) {
    let coefficients = n_t * map.num_links();
    (coefficients, coefficients)
}

/// The CSI actually available to the precoder designs: exact channel vectors
/// on the cooperation links, long-term gains everywhere, plus the scenario
/// constants the optimisation needs.
#[derive(Debug, Clone)]
pub struct MaskedCsi {
    pub num_bs: usize,
    pub num_users: usize,
    pub n_t: usize,
    /// Channel vectors for links inside the cooperation map only.
    pub known: BTreeMap<(usize, usize), Vec<Complex64>>,
    /// Long-term gains `lambda_sq` for every link in the cluster.
    pub lambda_sq: BTreeMap<(usize, usize), f64>,
    pub coop: CooperationMap,
    pub noise_power: f64,
    pub per_antenna_power: f64,
    pub weights: Vec<f64>,
}

/// Restricts a drop to the CSI visible under `map`.
pub fn mask_csi(
    scenario: &Scenario,
    realization: &ChannelRealization,
    map: &CooperationMap,
) -> Result<MaskedCsi> {
    if scenario.num_bs != realization.num_bs
        || scenario.num_users != realization.num_users
        || scenario.n_t != realization.n_t
    {
        return Err(Error::Dimension(
            "scenario and realization disagree on cluster dimensions".into(),
        ));
    }
    if map.num_users() != realization.num_users || map.num_bs() != realization.num_bs {
        return Err(Error::Dimension(
            "cooperation map does not match the realization".into(),
        ));
    }
    let mut known = BTreeMap::new();
    for &(b, u) in &map.links() {
        known.insert((b, u), realization.h[&(b, u)].clone());
    }
    Ok(MaskedCsi {
        num_bs: realization.num_bs,
        num_users: realization.num_users,
        n_t: realization.n_t,
        known,
        lambda_sq: realization.lambda_sq.clone(),
        coop: map.clone(),
        noise_power: scenario.noise_power,
        per_antenna_power: scenario.per_antenna_power,
        weights: scenario.user_weights.clone(),
    })
}

impl MaskedCsi {
    /// Rescales channels and noise so the weakest link has unit amplitude,
    /// returning the scaled view and the amplitude factor. SINRs, rates and
    /// optimal precoders are unchanged; interior-point conditioning improves.
    pub fn rescaled(&self) -> (MaskedCsi, f64) {
        let min_gain = self
            .lambda_sq
            .values()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let factor = if min_gain.is_finite() && min_gain > 0.0 {
            min_gain.sqrt()
        } else {
            1.0
        };
        let mut scaled = self.clone();
        for vector in scaled.known.values_mut() {
            for entry in vector.iter_mut() {
                *entry /= factor;
            }
        }
        for gain in scaled.lambda_sq.values_mut() {
            *gain /= factor * factor;
        }
        scaled.noise_power /= factor * factor;
        (scaled, factor)
    }

    /// Interfering links `(b, u)` with `b` serving interferer `i` but unknown
    /// at user `u`, i.e. `b` in `B_i \ B_u`.
    pub fn unknown_links(&self, interferer: usize, user: usize) -> Vec<usize> {
        self.coop
            .serving(interferer)
            .difference(self.coop.serving(user))
            .copied()
            .collect()
    }
}
