//! Flow-level simulator of decentralized access-point selection in
//! enterprise WLANs.
//!
//! STAs treat the APs they can hear as bandit arms, use normalized
//! throughput as the reward, and reassociate according to a policy
//! (strongest signal, epsilon-greedy, epsilon-sticky or load-aware).
//! The engine advances the network in synchronous rounds; per-link capacity
//! comes from a log-distance path loss model, an RSSI-indexed rate table
//! and an airtime cost per offered bit.
//!
//! Start with the runnable examples (`cargo run --release --example <name>`):
//!
//! - `path_loss_and_rates`: propagation curve, rate selection, airtime.
//! - `toy_scenario`: two APs, two STAs, every association enumerated.
//! - `grid_clusters`: policy comparison on the 16-AP / 64-STA campus.
//! - `channel_bonding`: the same comparison at 20/40/80 MHz.
//! - `epsilon_sweep`: exploration rate sweep for both bandit policies.
//! - `reward_strategies`: average vs sliding-window vs weighted rewards.
//! - `partial_agents`: only a fraction of STAs run an agent.
//! - `progressive_arrivals`: STAs join over an arrival window.
//! - `mobility`: STAs hop between clusters; agents reset on change.
//! - `load_aware`: load-broadcast baseline vs the bandit policies.
//!
//! The same capabilities are scriptable through the thin `apsim` binary
//! (`run`, `preset`, `enumerate`, `validate`).

pub mod agents;
pub mod config;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod phy;
pub mod presets;
pub mod report;
pub mod rng;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result};
