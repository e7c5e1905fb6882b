//! Flat `key = value` experiment configuration.
//!
//! One text file (plus CLI overrides) describes a whole experiment: the
//! scenario geometry, the threshold/SNR grid, the algorithm list, and
//! dotted per-solver option keys such as `ssocp.max_iter`. Unknown keys
//! are rejected so that a typo cannot silently fall back to a default.

use std::collections::BTreeMap;

use crate::bnb::BnbOptions;
use crate::baselines::PsoOptions;
use crate::error::{Error, Result};
use crate::metrics::SinrMode;
use crate::scenario::Scenario;
use crate::ssocp::SsocpOptions;
use crate::wmmse::WmmseOptions;

/// One precoder-design scheme of the comparison set. The interference
/// model is part of the scheme's identity, so each (family, model) pair
/// has its own legend token and stable numeric id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Ssocp(SinrMode),
    Wmmse(SinrMode),
    Pso(SinrMode),
    Zf,
}

fn mode_suffix(mode: SinrMode) -> &'static str {
    match mode {
        SinrMode::Full => "",
        SinrMode::LimitedZero => "_0",
        SinrMode::LimitedLambda => "_lambda_pl_0",
        SinrMode::LimitedNaive => "_pl_0",
    }
}

fn mode_id(mode: SinrMode) -> u64 {
    match mode {
        SinrMode::Full => 0,
        SinrMode::LimitedZero => 1,
        SinrMode::LimitedLambda => 2,
        SinrMode::LimitedNaive => 3,
    }
}

impl Algorithm {
    /// Legend token, e.g. `ssocp_lambda_pl_0` or `mse`.
    pub fn token(&self) -> String {
        match self {
            Algorithm::Ssocp(mode) => format!("ssocp{}", mode_suffix(*mode)),
            Algorithm::Wmmse(mode) => format!("mse{}", mode_suffix(*mode)),
            Algorithm::Pso(mode) => format!("pso{}", mode_suffix(*mode)),
            Algorithm::Zf => "zf".to_string(),
        }
    }

    /// Inverse of [`Algorithm::token`].
    pub fn parse(token: &str) -> Result<Algorithm> {
        type Family = fn(SinrMode) -> Algorithm;
        let families: [(&str, Family); 3] = [
            ("ssocp", Algorithm::Ssocp),
            ("mse", Algorithm::Wmmse),
            ("pso", Algorithm::Pso),
        ];
        if token == "zf" {
            return Ok(Algorithm::Zf);
        }
        for (base, build) in families {
            for mode in [
                SinrMode::Full,
                SinrMode::LimitedZero,
                SinrMode::LimitedLambda,
                SinrMode::LimitedNaive,
            ] {
                if token == format!("{base}{}", mode_suffix(mode)) {
                    return Ok(build(mode));
                }
            }
        }
        Err(Error::UnknownAlgorithm(token.to_string()))
    }

    /// Stable numeric id used in seed derivation; never reordered.
    pub fn id(&self) -> u64 {
        match self {
            Algorithm::Ssocp(mode) => 10 + mode_id(*mode),
            Algorithm::Wmmse(mode) => 20 + mode_id(*mode),
            Algorithm::Pso(mode) => 30 + mode_id(*mode),
            Algorithm::Zf => 40,
        }
    }

    /// The interference model the scheme designs against.
    pub fn sinr_mode(&self) -> SinrMode {
        match self {
            Algorithm::Ssocp(mode) | Algorithm::Wmmse(mode) | Algorithm::Pso(mode) => *mode,
            Algorithm::Zf => SinrMode::Full,
        }
    }

    /// Full-CSI schemes design on the complete channel map regardless of
    /// the configured threshold.
    pub fn is_full_csi(&self) -> bool {
        matches!(self.sinr_mode(), SinrMode::Full)
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are
/// skipped, later duplicates overwrite earlier ones.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (number, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(at) => &raw_line[..at],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                "config",
                format!("line {}: expected `key = value`, got `{line}`", number + 1),
            ));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

const SCENARIO_KEYS: [&str; 12] = [
    "num_bs",
    "n_t",
    "num_users",
    "cell_radius_m",
    "drop_radius_m",
    "cell_edge_snr_db",
    "shadow_sigma_db",
    "pathloss_exponent",
    "bandwidth_hz",
    "temperature_k",
    "user_weights",
    "seed",
];

const HARNESS_KEYS: [&str; 7] = [
    "thresholds_db",
    "edge_snrs_db",
    "algorithms",
    "drops",
    "workers",
    "timing",
    "out_dir",
];

const SOLVER_KEYS: [&str; 18] = [
    "ssocp.max_retries",
    "ssocp.max_iter",
    "ssocp.rel_tol",
    "ssocp.mode",
    "wmmse.max_iter",
    "wmmse.rel_tol",
    "wmmse.mode",
    "bnb.epsilon",
    "bnb.max_iter",
    "bnb.bisection_epsilon",
    "bnb.verbatim_bounds",
    "pso.swarm_size",
    "pso.iterations",
    "pso.inertia",
    "pso.cognitive",
    "pso.social",
    "pso.restarts",
    "pso.mode",
];

/// A fully parsed experiment description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Cooperation thresholds in dB; `inf` means full cooperation.
    pub thresholds_db: Vec<f64>,
    pub edge_snrs_db: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    /// Monte-Carlo drops; when unset, `run` uses 200 and `certify` 20.
    pub drops: Option<usize>,
    /// Master seed every stream is derived from.
    pub seed: u64,
    /// Worker threads for parallel drops; 0 picks the runtime default.
    pub workers: usize,
    /// Record wall-clock times. Off by default so that output is
    /// byte-identical across machines and runs.
    pub timing: bool,
    raw: BTreeMap<String, String>,
}

fn parse_value<T: std::str::FromStr>(raw: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match raw.get(key) {
        None => Ok(None),
        Some(text) => text
            .trim()
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::config(key, format!("cannot parse `{text}`"))),
    }
}

fn parse_list(raw: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<f64>>> {
    let Some(text) = raw.get(key) else {
        return Ok(None);
    };
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(
            part.parse::<f64>()
                .map_err(|_| Error::config(key, format!("cannot parse `{part}` as a number")))?,
        );
    }
    if out.is_empty() {
        return Err(Error::config(key, "list must not be empty"));
    }
    Ok(Some(out))
}

fn parse_mode(text: &str) -> Result<SinrMode> {
    match text {
        "full" => Ok(SinrMode::Full),
        "limited_zero" => Ok(SinrMode::LimitedZero),
        "limited_lambda" => Ok(SinrMode::LimitedLambda),
        "limited_naive" => Ok(SinrMode::LimitedNaive),
        other => Err(Error::config(
            "mode",
            format!("unknown interference model `{other}`"),
        )),
    }
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<RunConfig> {
        RunConfig::from_map(parse_config_text(text)?)
    }

    /// Builds a configuration from parsed key-value pairs. When none of
    /// the required scenario keys is present the reference three-cell
    /// cluster is used; unknown keys are an error.
    pub fn from_map(raw: BTreeMap<String, String>) -> Result<RunConfig> {
        for key in raw.keys() {
            let known = SCENARIO_KEYS.contains(&key.as_str())
                || HARNESS_KEYS.contains(&key.as_str())
                || SOLVER_KEYS.contains(&key.as_str());
            if !known {
                return Err(Error::config(key, "unknown configuration key"));
            }
        }

        let scenario = if ["num_bs", "n_t", "num_users", "cell_radius_m", "cell_edge_snr_db"]
            .iter()
            .any(|k| raw.contains_key(*k))
        {
            Scenario::from_map(&raw)?
        } else {
            Scenario::small_cluster(1)
        };

        let thresholds_db =
            parse_list(&raw, "thresholds_db")?.unwrap_or_else(|| vec![f64::INFINITY]);
        for &t in &thresholds_db {
            if t < 0.0 || t.is_nan() {
                return Err(Error::config(
                    "thresholds_db",
                    format!("thresholds must be nonnegative or inf, got {t}"),
                ));
            }
        }
        let edge_snrs_db =
            parse_list(&raw, "edge_snrs_db")?.unwrap_or_else(|| vec![scenario.cell_edge_snr_db]);
        for &s in &edge_snrs_db {
            if !s.is_finite() {
                return Err(Error::config("edge_snrs_db", "SNR points must be finite"));
            }
        }

        let algorithms = match raw.get("algorithms") {
            None => vec![
                Algorithm::Ssocp(SinrMode::Full),
                Algorithm::Ssocp(SinrMode::LimitedZero),
                Algorithm::Ssocp(SinrMode::LimitedLambda),
                Algorithm::Ssocp(SinrMode::LimitedNaive),
            ],
            Some(text) => {
                let mut list = Vec::new();
                for token in text.split(',') {
                    let token = token.trim();
                    if !token.is_empty() {
                        list.push(Algorithm::parse(token)?);
                    }
                }
                if list.is_empty() {
                    return Err(Error::config("algorithms", "list must not be empty"));
                }
                list
            }
        };

        let drops = parse_value::<usize>(&raw, "drops")?;
        let seed = parse_value::<u64>(&raw, "seed")?.unwrap_or(1);
        let workers = parse_value::<usize>(&raw, "workers")?.unwrap_or(0);
        let timing = parse_value::<bool>(&raw, "timing")?.unwrap_or(false);

        let config = RunConfig {
            scenario,
            thresholds_db,
            edge_snrs_db,
            algorithms,
            drops,
            seed,
            workers,
            timing,
            raw,
        };
        // Surface malformed solver keys at load time, not mid-run.
        config.ssocp_options()?;
        config.wmmse_options()?;
        config.pso_options()?;
        config.bnb_options()?;
        Ok(config)
    }

    /// Raw access for keys owned by the caller (e.g. `out_dir`).
    pub fn get(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(|s| s.as_str())
    }

    pub fn rate_drops(&self) -> usize {
        self.drops.unwrap_or(200)
    }

    pub fn certify_drops(&self) -> usize {
        self.drops.unwrap_or(20)
    }

    /// Cone-programming solver options; the experiment runner overrides
    /// `mode` per algorithm token and `seed` per grid cell.
    pub fn ssocp_options(&self) -> Result<SsocpOptions> {
        let mut options = SsocpOptions::default();
        if let Some(v) = parse_value(&self.raw, "ssocp.max_retries")? {
            options.max_retries = v;
        }
        if let Some(v) = parse_value(&self.raw, "ssocp.max_iter")? {
            options.max_iterations = v;
        }
        if let Some(v) = parse_value(&self.raw, "ssocp.rel_tol")? {
            options.rel_tolerance = v;
        }
        if let Some(text) = self.raw.get("ssocp.mode") {
            options.mode = parse_mode(text)?;
        }
        Ok(options)
    }

    pub fn wmmse_options(&self) -> Result<WmmseOptions> {
        let mut options = WmmseOptions::default();
        if let Some(v) = parse_value(&self.raw, "wmmse.max_iter")? {
            options.max_iterations = v;
        }
        if let Some(v) = parse_value(&self.raw, "wmmse.rel_tol")? {
            options.rel_tolerance = v;
        }
        if let Some(text) = self.raw.get("wmmse.mode") {
            options.mode = parse_mode(text)?;
        }
        Ok(options)
    }

    pub fn pso_options(&self) -> Result<PsoOptions> {
        let mut options = PsoOptions::default();
        if let Some(v) = parse_value(&self.raw, "pso.swarm_size")? {
            options.swarm_size = v;
        }
        if let Some(v) = parse_value(&self.raw, "pso.iterations")? {
            options.iterations = v;
        }
        if let Some(v) = parse_value(&self.raw, "pso.inertia")? {
            options.inertia = v;
        }
        if let Some(v) = parse_value(&self.raw, "pso.cognitive")? {
            options.cognitive = v;
        }
        if let Some(v) = parse_value(&self.raw, "pso.social")? {
            options.social = v;
        }
        if let Some(v) = parse_value(&self.raw, "pso.restarts")? {
            options.restarts = v;
        }
        if let Some(text) = self.raw.get("pso.mode") {
            options.mode = parse_mode(text)?;
        }
        Ok(options)
    }

    pub fn bnb_options(&self) -> Result<BnbOptions> {
        let mut options = BnbOptions::default();
        if let Some(v) = parse_value(&self.raw, "bnb.epsilon")? {
            options.epsilon = v;
        }
        if let Some(v) = parse_value(&self.raw, "bnb.max_iter")? {
            options.max_rounds = v;
        }
        if let Some(v) = parse_value(&self.raw, "bnb.bisection_epsilon")? {
            options.bisection_epsilon = v;
        }
        if let Some(v) = parse_value(&self.raw, "bnb.verbatim_bounds")? {
            options.verbatim_bounds = v;
        }
        Ok(options)
    }
}
