//! Canned experiment configurations covering the simulator's main
//! comparisons: policy ordering on the default deployment, channel
//! bonding, the exploration-rate sweep, partial agent deployment,
//! progressive arrivals, mobility and the load-aware baseline.

use crate::config::{
    ChannelAllocation, ExperimentConfig, LoadModeConfig, PolicyConfig, PolicyKind, RewardKind,
    ScheduleConfig,
};
use crate::error::{Error, Result};

/// The embedded two-AP / two-STA scenario with pinned link rates; the
/// smallest instance on which every association outcome is easy to check
/// by hand.
pub const TOY_SCENARIO_TOML: &str = include_str!("../scenarios/toy.toml");

/// What a preset asks the caller to do.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// Enumerate every association of [`TOY_SCENARIO_TOML`] and print the
    /// outcome table.
    ToyEnumeration,
    /// Run each labeled experiment and report per-policy aggregates.
    Experiments(Vec<(String, ExperimentConfig)>),
}

pub const PRESET_NAMES: &[&str] = &[
    "toy",
    "fig4-grid-clusters",
    "fig6-bonding",
    "fig9-epsilon-sweep",
    "fig12-agent-fraction",
    "fig13-arrivals",
    "fig14-mobility",
    "fig17-load-aware",
];

fn ss() -> PolicyConfig {
    PolicyConfig { kind: PolicyKind::StrongestSignal, ..PolicyConfig::default() }
}

fn eps_greedy(epsilon: f64) -> PolicyConfig {
    PolicyConfig { kind: PolicyKind::EpsGreedy, epsilon, ..PolicyConfig::default() }
}

fn eps_sticky(epsilon: f64) -> PolicyConfig {
    PolicyConfig { kind: PolicyKind::EpsSticky, epsilon, sticky_max: 2, ..PolicyConfig::default() }
}

fn load_aware(rho: f64) -> PolicyConfig {
    PolicyConfig { kind: PolicyKind::LoadAware, rho, ..PolicyConfig::default() }
}

/// Shared starting point for the experiment presets: the default
/// deployment with a radio profile tuned for a dense office floor.
///
/// The profile pins three knobs that the defaults leave conservative:
/// light interior partitions (0.07 walls/m), moderate shadowing
/// (uniform on [0, 5] dB) and a -74 dBm association threshold, the kind
/// of roaming cutoff enterprise controllers use. Together they keep
/// every reachable AP fast enough to be a usable alternative while two
/// APs on the same channel stay out of each other's range, which is the
/// regime the policy comparisons are about: concentrating a cluster on
/// its nearest AP overloads that channel, while spreading the same
/// cluster over the neighboring APs serves everyone.
fn experiment_base() -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.radio.walls_per_meter = 0.07;
    config.radio.shadowing_mean_db = 2.5;
    config.radio.sensitivity_dbm = -74.0;
    config
}

/// The three-way baseline comparison on the default deployment: one
/// strongest-signal baseline against both bandit policies at epsilon 0.1.
fn grid_clusters() -> ExperimentConfig {
    ExperimentConfig { policies: vec![ss(), eps_greedy(0.1), eps_sticky(0.1)], ..experiment_base() }
}

fn variable_load(mut config: ExperimentConfig) -> ExperimentConfig {
    config.load.mode = LoadModeConfig::Variable;
    config
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Result<Preset> {
    let preset = match name {
        "toy" => Preset::ToyEnumeration,
        "fig4-grid-clusters" => {
            Preset::Experiments(vec![("grid-clusters".to_string(), grid_clusters())])
        }
        "fig6-bonding" => {
            // same deployment at each channel width; wider channels mean
            // fewer orthogonal channels but faster links
            let variants = [20, 40, 80]
                .into_iter()
                .map(|mhz| {
                    let mut config = grid_clusters();
                    config.aps.bandwidth_mhz = mhz;
                    if mhz == 80 {
                        // only two 80 MHz channels exist, so the lattice
                        // pattern cannot avoid conflicts; color greedily
                        config.aps.channels = ChannelAllocation::GreedyColoring;
                    }
                    (format!("{mhz}mhz"), config)
                })
                .collect();
            Preset::Experiments(variants)
        }
        "fig9-epsilon-sweep" => {
            let mut policies = vec![ss()];
            for epsilon in [0.05, 0.1, 0.25, 0.5, 0.75] {
                policies.push(eps_greedy(epsilon));
                policies.push(eps_sticky(epsilon));
            }
            for kind in [PolicyKind::EpsGreedy, PolicyKind::EpsSticky] {
                policies.push(PolicyConfig {
                    kind,
                    epsilon: 1.0,
                    epsilon_schedule: ScheduleConfig::Decreasing,
                    sticky_max: 2,
                    ..PolicyConfig::default()
                });
            }
            let config = variable_load(ExperimentConfig {
                policies,
                ..experiment_base()
            });
            Preset::Experiments(vec![("epsilon-sweep".to_string(), config)])
        }
        "fig12-agent-fraction" => {
            let mut policies = vec![ss()];
            for fraction in [0.2, 0.5, 1.0] {
                policies.push(PolicyConfig {
                    agent_fraction: fraction,
                    ..eps_sticky(0.1)
                });
            }
            let config = variable_load(ExperimentConfig {
                policies,
                ..experiment_base()
            });
            Preset::Experiments(vec![("agent-fraction".to_string(), config)])
        }
        "fig13-arrivals" => {
            // STAs trickle in over the first 60 rounds; the windowed reward
            // variants forget rewards earned on the emptier network
            let mut config = variable_load(grid_clusters());
            config.stas.arrival_window = 60;
            config.policies.push(PolicyConfig {
                reward: RewardKind::Window,
                window: 60,
                ..eps_greedy(0.1)
            });
            config.policies.push(PolicyConfig {
                reward: RewardKind::Window,
                window: 60,
                ..eps_sticky(0.1)
            });
            Preset::Experiments(vec![("arrivals".to_string(), config)])
        }
        "fig14-mobility" => {
            let mut config = variable_load(ExperimentConfig {
                policies: vec![ss(), eps_greedy(0.05), eps_sticky(0.1)],
                ..experiment_base()
            });
            config.stas.mobility_theta = 2.0 / 64.0;
            Preset::Experiments(vec![("mobility".to_string(), config)])
        }
        "fig17-load-aware" => {
            let policies = || {
                vec![
                    ss(),
                    eps_greedy(0.05),
                    eps_sticky(0.1),
                    load_aware(0.015),
                    load_aware(0.03),
                    load_aware(0.06),
                ]
            };
            // This preset keeps the conservative default radio profile: the
            // load-aware mechanism's failure mode under shifting loads is
            // herding onto stale broadcasts and parking on marginal-rate
            // APs, which requires marginal APs to be joinable at all. Under
            // the office profile's -74 dBm threshold every reachable AP is
            // fast and the pathology disappears.
            let static_load =
                ExperimentConfig { policies: policies(), ..ExperimentConfig::default() };
            let variable = variable_load(static_load.clone());
            let mut mobile = variable.clone();
            mobile.stas.mobility_theta = 2.0 / 64.0;
            Preset::Experiments(vec![
                ("static-load".to_string(), static_load),
                ("variable-load".to_string(), variable),
                ("mobile".to_string(), mobile),
            ])
        }
        other => {
            return Err(Error::config(format!(
                "unknown preset `{other}`; available presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(preset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::FixedScenario;

    #[test]
    fn every_preset_resolves_and_validates() {
        for name in PRESET_NAMES {
            match preset(name).unwrap() {
                Preset::ToyEnumeration => {
                    FixedScenario::from_toml_str(TOY_SCENARIO_TOML).unwrap();
                }
                Preset::Experiments(variants) => {
                    assert!(!variants.is_empty(), "{name} has no variants");
                    for (label, config) in variants {
                        config
                            .validate()
                            .unwrap_or_else(|e| panic!("{name}/{label} invalid: {e}"));
                    }
                }
            }
        }
    }

    #[test]
    fn unknown_preset_lists_alternatives() {
        let err = preset("fig99").unwrap_err().to_string();
        assert!(err.contains("unknown preset"), "{err}");
        assert!(err.contains("fig4-grid-clusters"), "{err}");
    }

    #[test]
    fn bonding_variants_cover_all_widths() {
        let Preset::Experiments(variants) = preset("fig6-bonding").unwrap() else {
            panic!("expected experiments");
        };
        let widths: Vec<u32> = variants.iter().map(|(_, c)| c.aps.bandwidth_mhz).collect();
        assert_eq!(widths, vec![20, 40, 80]);
    }

    #[test]
    fn sweep_covers_both_policies_at_every_epsilon() {
        let Preset::Experiments(variants) = preset("fig9-epsilon-sweep").unwrap() else {
            panic!("expected experiments");
        };
        let config = &variants[0].1;
        // baseline + 5 epsilons x 2 kinds + 2 decreasing variants
        assert_eq!(config.policies.len(), 13);
        assert_eq!(config.load.mode, LoadModeConfig::Variable);
    }

    #[test]
    fn mobility_preset_moves_two_per_round_on_average() {
        let Preset::Experiments(variants) = preset("fig14-mobility").unwrap() else {
            panic!("expected experiments");
        };
        let config = &variants[0].1;
        assert!((config.stas.mobility_theta - 0.03125).abs() < 1e-12);
        assert_eq!(config.stas.count, 64);
    }
}
