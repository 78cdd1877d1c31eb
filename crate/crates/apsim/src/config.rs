//! Experiment configuration: the TOML schema with its defaults, validation
//! with typo suggestions, dotted-path overrides, and the mapping onto
//! engine, scenario and agent types.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, EpsilonSchedule, Policy, RewardStrategy};
use crate::error::{Error, Result};
use crate::phy::{self, Bandwidth, PathLossParams, RateTable, TimingParams};
use crate::scenario::{
    ApLayout, ApPlacementMode, ChannelMode, LoadMode, LoadModel, StaPlacementMode,
};

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

/// A full experiment: deployment sampling, traffic, radio parameters and
/// the policy variants to compare. Every field has a default, so an empty
/// document is a valid experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Independent deployments to simulate and average over.
    pub seeds: u32,
    /// Base seed every derived stream is keyed from.
    pub master_seed: u64,
    pub rounds: u32,
    pub area: AreaConfig,
    pub aps: ApsConfig,
    pub stas: StasConfig,
    pub load: LoadConfig,
    pub radio: RadioConfig,
    #[serde(rename = "policy")]
    pub policies: Vec<PolicyConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seeds: 100,
            master_seed: 0,
            rounds: 240,
            area: AreaConfig::default(),
            aps: ApsConfig::default(),
            stas: StasConfig::default(),
            load: LoadConfig::default(),
            radio: RadioConfig::default(),
            policies: default_policies(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AreaConfig {
    pub width_m: f64,
    pub height_m: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        AreaConfig { width_m: 80.0, height_m: 80.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApPlacement {
    Grid,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelAllocation {
    /// Fixed tiling over the AP lattice (grid placement only).
    GridPattern,
    /// Greedy coloring of the interference graph.
    GreedyColoring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApsConfig {
    pub count: usize,
    pub placement: ApPlacement,
    pub channels: ChannelAllocation,
    pub bandwidth_mhz: u32,
    /// Interference radius for greedy coloring; omitted means twice the
    /// mean nearest-neighbor AP distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reuse_radius_m: Option<f64>,
}

impl Default for ApsConfig {
    fn default() -> Self {
        ApsConfig {
            count: 16,
            placement: ApPlacement::Grid,
            channels: ChannelAllocation::GridPattern,
            bandwidth_mhz: 20,
            reuse_radius_m: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StaPlacement {
    Uniform,
    Clustered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StasConfig {
    pub count: usize,
    pub placement: StaPlacement,
    /// STAs per 10 m x 10 m cluster box under clustered placement.
    pub cluster_size: usize,
    /// Rounds over which STAs activate, uniformly at random; 1 means
    /// everyone is present from the first round.
    pub arrival_window: u32,
    /// Per-round probability that a STA relocates to a random cluster.
    pub mobility_theta: f64,
}

impl Default for StasConfig {
    fn default() -> Self {
        StasConfig {
            count: 64,
            placement: StaPlacement::Clustered,
            cluster_size: 10,
            arrival_window: 1,
            mobility_theta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadModeConfig {
    Fixed,
    Variable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadConfig {
    pub mode: LoadModeConfig,
    pub mean_mbps: f64,
}

impl Default for LoadConfig {
    fn default() -> Self {
        LoadConfig { mode: LoadModeConfig::Fixed, mean_mbps: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    pub tx_power_dbm: f64,
    pub sensitivity_dbm: f64,
    /// RSSI change that makes a learning agent discard its arms.
    pub reset_delta_db: f64,
    pub reference_loss_db: f64,
    pub exponent: f64,
    pub wall_loss_db: f64,
    pub walls_per_meter: f64,
    pub shadowing: bool,
    pub shadowing_mean_db: f64,
    /// Custom rate table CSV; omitted means the built-in tables.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_table_csv: Option<String>,
}

impl Default for RadioConfig {
    fn default() -> Self {
        let pl = PathLossParams::default();
        RadioConfig {
            tx_power_dbm: 20.0,
            sensitivity_dbm: -82.0,
            reset_delta_db: crate::agents::DEFAULT_RESET_DELTA_DB,
            reference_loss_db: pl.reference_loss_db,
            exponent: pl.exponent,
            wall_loss_db: pl.wall_loss_db,
            walls_per_meter: pl.walls_per_meter,
            shadowing: true,
            shadowing_mean_db: pl.shadowing_mean_db,
            rate_table_csv: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    StrongestSignal,
    EpsGreedy,
    EpsSticky,
    LoadAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleConfig {
    Constant,
    /// epsilon_t = epsilon / sqrt(t).
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardKind {
    /// Mean of every reward seen.
    Average,
    /// Mean of the most recent `window` rewards.
    Window,
    /// Linearly fading weights, newest heaviest.
    Weighted,
}

/// One policy variant in the comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicyConfig {
    /// Report label; empty means one is derived from the parameters.
    pub label: String,
    pub kind: PolicyKind,
    pub epsilon: f64,
    pub epsilon_schedule: ScheduleConfig,
    /// Unsatisfied rounds an epsilon-sticky agent tolerates before it
    /// resumes exploring.
    pub sticky_max: u32,
    pub reward: RewardKind,
    /// Recent rewards kept under the `window` reward kind.
    pub window: u32,
    /// Load-aware jump probability.
    pub rho: f64,
    /// Fraction of STAs running this policy; the rest keep the
    /// strongest-signal baseline.
    pub agent_fraction: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            label: String::new(),
            kind: PolicyKind::EpsGreedy,
            epsilon: 0.05,
            epsilon_schedule: ScheduleConfig::Constant,
            sticky_max: 2,
            reward: RewardKind::Average,
            window: 60,
            rho: 0.03,
            agent_fraction: 1.0,
        }
    }
}

fn default_policies() -> Vec<PolicyConfig> {
    vec![
        PolicyConfig { kind: PolicyKind::StrongestSignal, ..PolicyConfig::default() },
        PolicyConfig { kind: PolicyKind::EpsGreedy, epsilon: 0.05, ..PolicyConfig::default() },
        PolicyConfig {
            kind: PolicyKind::EpsSticky,
            epsilon: 0.1,
            sticky_max: 2,
            ..PolicyConfig::default()
        },
    ]
}

// ---------------------------------------------------------------------------
// Parsing with typo help
// ---------------------------------------------------------------------------

/// Every key the schema accepts, for "did you mean" suggestions.
const KNOWN_KEYS: &[&str] = &[
    "seeds",
    "master_seed",
    "rounds",
    "area",
    "aps",
    "stas",
    "load",
    "radio",
    "policy",
    "width_m",
    "height_m",
    "count",
    "placement",
    "channels",
    "bandwidth_mhz",
    "reuse_radius_m",
    "cluster_size",
    "arrival_window",
    "mobility_theta",
    "mode",
    "mean_mbps",
    "tx_power_dbm",
    "sensitivity_dbm",
    "reset_delta_db",
    "reference_loss_db",
    "exponent",
    "wall_loss_db",
    "walls_per_meter",
    "shadowing",
    "shadowing_mean_db",
    "rate_table_csv",
    "label",
    "kind",
    "epsilon",
    "epsilon_schedule",
    "sticky_max",
    "reward",
    "window",
    "rho",
    "agent_fraction",
];

/// Append a closest-known-key suggestion to unknown-field parse errors.
fn explain_parse_error(err: toml::de::Error) -> Error {
    let message = err.to_string();
    let suggestion = message
        .split_once("unknown field `")
        .and_then(|(_, rest)| rest.split_once('`'))
        .and_then(|(field, _)| {
            KNOWN_KEYS
                .iter()
                .map(|k| (strsim::levenshtein(field, k), *k))
                .filter(|&(d, _)| d <= 2)
                .min()
        });
    match suggestion {
        Some((_, key)) => Error::Parse(format!("{message}\nhint: did you mean `{key}`?")),
        None => Error::Parse(message),
    }
}

impl ExperimentConfig {
    /// Parse a TOML document; an empty document is the default experiment.
    pub fn from_toml_str(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(explain_parse_error)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(&path)?;
        ExperimentConfig::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(Error::config("seeds must be at least 1".to_string()));
        }
        if self.rounds == 0 {
            return Err(Error::config("rounds must be at least 1".to_string()));
        }
        if !(self.area.width_m.is_finite() && self.area.width_m > 0.0)
            || !(self.area.height_m.is_finite() && self.area.height_m > 0.0)
        {
            return Err(Error::config("area dimensions must be positive".to_string()));
        }
        if self.aps.count == 0 {
            return Err(Error::config("at least one AP is required".to_string()));
        }
        if self.aps.placement == ApPlacement::Grid {
            let side = (self.aps.count as f64).sqrt().round() as usize;
            if side * side != self.aps.count {
                return Err(Error::config(format!(
                    "grid placement needs a square AP count, got {}",
                    self.aps.count
                )));
            }
        }
        if self.aps.channels == ChannelAllocation::GridPattern
            && self.aps.placement != ApPlacement::Grid
        {
            return Err(Error::config(
                "the grid-pattern channel plan requires grid AP placement".to_string(),
            ));
        }
        Bandwidth::from_mhz(self.aps.bandwidth_mhz)?;
        if let Some(r) = self.aps.reuse_radius_m {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::config("reuse radius must be positive".to_string()));
            }
        }
        if self.stas.count == 0 {
            return Err(Error::config("at least one STA is required".to_string()));
        }
        if self.stas.placement == StaPlacement::Clustered {
            if self.stas.cluster_size == 0 {
                return Err(Error::config("cluster size must be at least 1".to_string()));
            }
            let side = crate::scenario::CLUSTER_BOX_SIDE_M;
            if self.area.width_m < side || self.area.height_m < side {
                return Err(Error::config(format!(
                    "clustered placement needs an area of at least {side} m per side"
                )));
            }
        }
        if self.stas.arrival_window == 0 {
            return Err(Error::config("arrival window must be at least 1 round".to_string()));
        }
        if self.stas.arrival_window > self.rounds {
            return Err(Error::config(format!(
                "arrival window ({}) cannot exceed the round count ({})",
                self.stas.arrival_window, self.rounds
            )));
        }
        if !(0.0..=1.0).contains(&self.stas.mobility_theta) {
            return Err(Error::config(format!(
                "mobility theta must be in [0, 1], got {}",
                self.stas.mobility_theta
            )));
        }
        if self.stas.mobility_theta > 0.0 && self.stas.placement != StaPlacement::Clustered {
            return Err(Error::config(
                "mobility relocates STAs between clusters, so it requires clustered placement"
                    .to_string(),
            ));
        }
        self.load_model().validate()?;
        let radio = &self.radio;
        for (name, v) in [
            ("tx_power_dbm", radio.tx_power_dbm),
            ("sensitivity_dbm", radio.sensitivity_dbm),
            ("reference_loss_db", radio.reference_loss_db),
        ] {
            if !v.is_finite() {
                return Err(Error::config(format!("{name} must be finite")));
            }
        }
        if !(radio.exponent.is_finite() && radio.exponent > 0.0) {
            return Err(Error::config("path loss exponent must be positive".to_string()));
        }
        for (name, v) in [
            ("wall_loss_db", radio.wall_loss_db),
            ("walls_per_meter", radio.walls_per_meter),
            ("shadowing_mean_db", radio.shadowing_mean_db),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("{name} must be non-negative")));
            }
        }
        if !(radio.reset_delta_db.is_finite() && radio.reset_delta_db > 0.0) {
            return Err(Error::config("reset delta must be positive dB".to_string()));
        }
        if self.policies.is_empty() {
            return Err(Error::config("at least one policy is required".to_string()));
        }
        let mut labels = std::collections::BTreeSet::new();
        for policy in &self.policies {
            policy.validate(self.rounds)?;
            if !labels.insert(policy.display_label()) {
                return Err(Error::config(format!(
                    "duplicate policy label `{}`",
                    policy.display_label()
                )));
            }
        }
        Ok(())
    }

    pub fn bandwidth(&self) -> Bandwidth {
        Bandwidth::from_mhz(self.aps.bandwidth_mhz).expect("validated")
    }

    pub fn load_model(&self) -> LoadModel {
        LoadModel {
            mode: match self.load.mode {
                LoadModeConfig::Fixed => LoadMode::Fixed,
                LoadModeConfig::Variable => LoadMode::Variable,
            },
            mean_mbps: self.load.mean_mbps,
        }
    }

    pub fn ap_placement_mode(&self) -> ApPlacementMode {
        match self.aps.placement {
            ApPlacement::Grid => ApPlacementMode::Grid,
            ApPlacement::Random => ApPlacementMode::Random,
        }
    }

    pub fn sta_placement_mode(&self) -> StaPlacementMode {
        match self.stas.placement {
            StaPlacement::Uniform => StaPlacementMode::Uniform,
            StaPlacement::Clustered => StaPlacementMode::Clustered,
        }
    }

    pub fn channel_mode(&self) -> ChannelMode {
        match self.aps.channels {
            ChannelAllocation::GridPattern => ChannelMode::GridPattern,
            ChannelAllocation::GreedyColoring => ChannelMode::GreedyColoring,
        }
    }

    pub fn ap_layout(&self) -> ApLayout {
        match self.aps.placement {
            ApPlacement::Grid => {
                ApLayout::Grid { cols: (self.aps.count as f64).sqrt().round() as usize }
            }
            ApPlacement::Random => ApLayout::Free,
        }
    }

    pub fn path_loss_params(&self) -> PathLossParams {
        PathLossParams {
            reference_loss_db: self.radio.reference_loss_db,
            exponent: self.radio.exponent,
            wall_loss_db: self.radio.wall_loss_db,
            walls_per_meter: self.radio.walls_per_meter,
            shadowing_enabled: self.radio.shadowing,
            shadowing_mean_db: self.radio.shadowing_mean_db,
        }
    }

    /// Engine parameters, loading the custom rate table when one is set.
    pub fn sim_params(&self) -> Result<crate::engine::SimParams> {
        let bandwidth = Bandwidth::from_mhz(self.aps.bandwidth_mhz)?;
        let rate_table = match &self.radio.rate_table_csv {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                let tables = phy::rate_tables_from_csv(text.as_bytes())?;
                tables.get(&self.aps.bandwidth_mhz).cloned().ok_or_else(|| {
                    Error::config(format!(
                        "rate table file `{path}` has no {} MHz entries",
                        self.aps.bandwidth_mhz
                    ))
                })?
            }
            None => RateTable::builtin(bandwidth),
        };
        Ok(crate::engine::SimParams {
            path_loss: self.path_loss_params(),
            timing: TimingParams::default(),
            rate_table,
            tx_power_dbm: self.radio.tx_power_dbm,
            sensitivity_dbm: self.radio.sensitivity_dbm,
            reset_delta_db: self.radio.reset_delta_db,
            rounds: self.rounds,
        })
    }
}

impl PolicyConfig {
    pub fn validate(&self, rounds: u32) -> Result<()> {
        self.agent_config().validate()?;
        if !(0.0..=1.0).contains(&self.agent_fraction) {
            return Err(Error::config(format!(
                "agent fraction must be in [0, 1], got {}",
                self.agent_fraction
            )));
        }
        if self.reward == RewardKind::Window && self.window > rounds {
            return Err(Error::config(format!(
                "reward window ({}) cannot exceed the round count ({rounds})",
                self.window
            )));
        }
        Ok(())
    }

    /// The label printed in reports: the explicit one, or a derived
    /// `kind-parameter` form.
    pub fn display_label(&self) -> String {
        if !self.label.is_empty() {
            return self.label.clone();
        }
        let mut label = match self.kind {
            PolicyKind::StrongestSignal => "strongest-signal".to_string(),
            PolicyKind::EpsGreedy => format!("eps-greedy-{}", self.epsilon),
            PolicyKind::EpsSticky => format!("eps-sticky-{}", self.epsilon),
            PolicyKind::LoadAware => format!("load-aware-{}", self.rho),
        };
        if matches!(self.kind, PolicyKind::EpsGreedy | PolicyKind::EpsSticky) {
            if self.epsilon_schedule == ScheduleConfig::Decreasing {
                label.push_str("-decreasing");
            }
            match self.reward {
                RewardKind::Average => {}
                RewardKind::Window => label.push_str(&format!("-w{}", self.window)),
                RewardKind::Weighted => label.push_str("-weighted"),
            }
        }
        if self.agent_fraction < 1.0 {
            label.push_str(&format!("-f{}", self.agent_fraction));
        }
        label
    }

    /// The per-STA agent parameters this policy runs with.
    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            policy: match self.kind {
                PolicyKind::StrongestSignal => Policy::StrongestSignal,
                PolicyKind::EpsGreedy => Policy::EpsGreedy,
                PolicyKind::EpsSticky => Policy::EpsSticky,
                PolicyKind::LoadAware => Policy::LoadAware,
            },
            epsilon: self.epsilon,
            schedule: match self.epsilon_schedule {
                ScheduleConfig::Constant => EpsilonSchedule::Fixed,
                ScheduleConfig::Decreasing => EpsilonSchedule::Decreasing,
            },
            sticky_max: self.sticky_max,
            reward_strategy: match self.reward {
                RewardKind::Average => RewardStrategy::Average,
                RewardKind::Window => RewardStrategy::Window(self.window as usize),
                RewardKind::Weighted => RewardStrategy::Weighted,
            },
            rho: self.rho,
        }
    }
}

// ---------------------------------------------------------------------------
// Dotted-path overrides
// ---------------------------------------------------------------------------

/// Parse an override's right-hand side as a TOML value, falling back to a
/// bare string so `load.mode=variable` works without quotes.
fn parse_override_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(table) => table.get("v").cloned().expect("wrapped key exists"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_dotted(value: &mut toml::Value, path: &str, raw: &str) -> Result<()> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::invalid(format!("malformed override path `{path}`")));
    }
    let mut cursor = value;
    for (i, segment) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if let Ok(index) = segment.parse::<usize>() {
            let array = cursor.as_array_mut().ok_or_else(|| {
                Error::invalid(format!("`{path}`: segment `{segment}` indexes a non-array"))
            })?;
            let len = array.len();
            let slot = array.get_mut(index).ok_or_else(|| {
                Error::invalid(format!(
                    "`{path}`: index {index} is out of bounds (length {len})"
                ))
            })?;
            if last {
                *slot = parse_override_value(raw);
                return Ok(());
            }
            cursor = slot;
        } else {
            let table = cursor.as_table_mut().ok_or_else(|| {
                Error::invalid(format!("`{path}`: segment `{segment}` indexes a non-table"))
            })?;
            if last {
                table.insert(segment.to_string(), parse_override_value(raw));
                return Ok(());
            }
            cursor = table
                .entry(segment.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
    }
    unreachable!("loop returns on the last segment");
}

/// Apply `path=value` overrides on top of a TOML document and re-parse.
/// Overrides address the fully resolved document, so paths like
/// `policy.1.epsilon=0.25` reach the default policy list even when the
/// base document never mentions policies.
pub fn with_overrides(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let base = ExperimentConfig::from_toml_str(text)?;
    if overrides.is_empty() {
        return Ok(base);
    }
    let mut value = toml::Value::try_from(&base).map_err(|e| Error::Parse(e.to_string()))?;
    for entry in overrides {
        let (path, raw) = entry.split_once('=').ok_or_else(|| {
            Error::invalid(format!("override `{entry}` is not of the form path=value"))
        })?;
        set_dotted(&mut value, path.trim(), raw.trim())?;
    }
    let merged = toml::to_string(&value).map_err(|e| Error::Parse(e.to_string()))?;
    ExperimentConfig::from_toml_str(&merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_experiment() {
        let config = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(config, ExperimentConfig::default());
        config.validate().unwrap();
        assert_eq!(config.seeds, 100);
        assert_eq!(config.rounds, 240);
        assert_eq!(config.aps.count, 16);
        assert_eq!(config.stas.count, 64);
        assert_eq!(config.load.mean_mbps, 4.0);
        assert_eq!(config.policies.len(), 3);
    }

    #[test]
    fn default_labels_are_distinct() {
        let labels: Vec<String> =
            ExperimentConfig::default().policies.iter().map(|p| p.display_label()).collect();
        assert_eq!(labels, vec!["strongest-signal", "eps-greedy-0.05", "eps-sticky-0.1"]);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut config = ExperimentConfig::default();
        config.stas.mobility_theta = 0.03125;
        config.load.mode = LoadModeConfig::Variable;
        config.policies[1].epsilon = 0.25;
        let text = config.to_toml_string();
        let parsed = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn unknown_top_level_key_suggests_fix() {
        let err = ExperimentConfig::from_toml_str("sedes = 10").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("unknown field"), "{message}");
        assert!(message.contains("did you mean `seeds`?"), "{message}");
    }

    #[test]
    fn unknown_nested_key_suggests_fix() {
        let err = ExperimentConfig::from_toml_str("[stas]\ncluser_size = 5").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("did you mean `cluster_size`?"), "{message}");
    }

    #[test]
    fn unknown_gibberish_key_gets_no_suggestion() {
        let err = ExperimentConfig::from_toml_str("zzqqxx = 1").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("unknown field"), "{message}");
        assert!(!message.contains("did you mean"), "{message}");
    }

    #[test]
    fn validation_rejects_bad_values() {
        let reject = |mutate: fn(&mut ExperimentConfig)| {
            let mut config = ExperimentConfig::default();
            mutate(&mut config);
            assert!(config.validate().is_err(), "expected rejection");
        };
        reject(|c| c.rounds = 0);
        reject(|c| c.seeds = 0);
        reject(|c| c.aps.count = 12); // grid placement needs a square
        reject(|c| c.aps.bandwidth_mhz = 30);
        reject(|c| {
            c.aps.placement = ApPlacement::Random; // grid-pattern channels need a grid
        });
        reject(|c| c.stas.arrival_window = 0);
        reject(|c| c.stas.arrival_window = 500); // exceeds 240 rounds
        reject(|c| c.stas.mobility_theta = 1.5);
        reject(|c| {
            c.stas.placement = StaPlacement::Uniform;
            c.stas.mobility_theta = 0.1;
        });
        reject(|c| c.load.mean_mbps = 0.0);
        reject(|c| c.policies[1].epsilon = 1.5);
        reject(|c| c.policies[1].agent_fraction = 1.5);
        reject(|c| c.policies[2].sticky_max = 0);
        reject(|c| c.policies.clear());
        reject(|c| {
            c.policies[1].reward = RewardKind::Window;
            c.policies[1].window = 0;
        });
        reject(|c| {
            c.policies[1].reward = RewardKind::Window;
            c.policies[1].window = 9999; // exceeds the round count
        });
        reject(|c| c.policies[2] = c.policies[1].clone()); // duplicate label
        reject(|c| c.radio.reset_delta_db = 0.0);
    }

    #[test]
    fn random_placement_with_coloring_is_accepted() {
        let mut config = ExperimentConfig::default();
        config.aps.count = 12;
        config.aps.placement = ApPlacement::Random;
        config.aps.channels = ChannelAllocation::GreedyColoring;
        config.validate().unwrap();
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let config = with_overrides(
            "",
            &[
                "rounds=60".to_string(),
                "load.mode=variable".to_string(),
                "stas.mobility_theta=0.03125".to_string(),
                "policy.1.epsilon=0.25".to_string(),
            ],
        )
        .unwrap();
        assert_eq!(config.rounds, 60);
        assert_eq!(config.load.mode, LoadModeConfig::Variable);
        assert_eq!(config.stas.mobility_theta, 0.03125);
        assert_eq!(config.policies[1].epsilon, 0.25);
        // untouched fields keep their defaults
        assert_eq!(config.seeds, 100);
        assert_eq!(config.policies.len(), 3);
    }

    #[test]
    fn overrides_layer_on_existing_documents() {
        let base = "rounds = 120\n[load]\nmode = \"variable\"\nmean_mbps = 2.0\n";
        let config = with_overrides(base, &["load.mean_mbps=6".to_string()]).unwrap();
        assert_eq!(config.rounds, 120);
        assert_eq!(config.load.mode, LoadModeConfig::Variable);
        assert_eq!(config.load.mean_mbps, 6.0);
    }

    #[test]
    fn override_errors_are_specific() {
        assert!(with_overrides("", &["rounds".to_string()]).is_err());
        assert!(with_overrides("", &["policy.9.epsilon=0.1".to_string()]).is_err());
        assert!(with_overrides("", &["rounds.x=1".to_string()]).is_err());
        // an override introducing an unknown key still fails the schema
        let err = with_overrides("", &["sedes=1".to_string()]).unwrap_err();
        assert!(err.to_string().contains("did you mean `seeds`?"));
    }

    #[test]
    fn quoted_and_bare_strings_both_parse() {
        let a = with_overrides("", &["load.mode=\"variable\"".to_string()]).unwrap();
        let b = with_overrides("", &["load.mode=variable".to_string()]).unwrap();
        assert_eq!(a.load.mode, b.load.mode);
    }

    #[test]
    fn agent_config_mapping_covers_all_kinds() {
        let mut policy = PolicyConfig {
            kind: PolicyKind::EpsSticky,
            epsilon: 0.1,
            sticky_max: 3,
            reward: RewardKind::Window,
            window: 60,
            ..PolicyConfig::default()
        };
        let agent = policy.agent_config();
        assert_eq!(agent.policy, Policy::EpsSticky);
        assert_eq!(agent.sticky_max, 3);
        assert_eq!(agent.reward_strategy, RewardStrategy::Window(60));
        policy.kind = PolicyKind::LoadAware;
        policy.rho = 0.06;
        assert_eq!(policy.agent_config().rho, 0.06);
        policy.epsilon_schedule = ScheduleConfig::Decreasing;
        assert_eq!(policy.agent_config().schedule, EpsilonSchedule::Decreasing);
    }

    #[test]
    fn derived_labels_encode_parameters() {
        let policy = PolicyConfig {
            kind: PolicyKind::EpsGreedy,
            epsilon: 0.25,
            epsilon_schedule: ScheduleConfig::Decreasing,
            reward: RewardKind::Window,
            window: 60,
            agent_fraction: 0.5,
            ..PolicyConfig::default()
        };
        assert_eq!(policy.display_label(), "eps-greedy-0.25-decreasing-w60-f0.5");
        let explicit = PolicyConfig { label: "mine".to_string(), ..policy };
        assert_eq!(explicit.display_label(), "mine");
    }

    #[test]
    fn sim_params_reflect_radio_settings() {
        let mut config = ExperimentConfig::default();
        config.radio.tx_power_dbm = 23.0;
        config.radio.shadowing = false;
        config.aps.bandwidth_mhz = 40;
        let params = config.sim_params().unwrap();
        assert_eq!(params.tx_power_dbm, 23.0);
        assert!(!params.path_loss.shadowing_enabled);
        assert_eq!(params.rounds, 240);
        // 40 MHz table doubles the 20 MHz top rate
        let top = params.rate_table.entries().last().unwrap();
        assert_eq!(top.data_rate_bps, 286.8e6);
    }
}
