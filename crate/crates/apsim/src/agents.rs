//! Association policies. Each STA treats the APs it can hear as bandit
//! arms; the reward for a round is the normalized throughput it obtained
//! from the AP it chose.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};

pub type ApId = usize;
pub type StaId = usize;

/// A round counts as fully satisfied when normalized throughput is within
/// this distance of 1.
pub const SATISFACTION_TOLERANCE: f64 = 1e-9;

/// Default RSSI change (dB) on any arm that invalidates learned rewards.
pub const DEFAULT_RESET_DELTA_DB: f64 = 3.0;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Associate to the loudest AP; rescan only when the signal is lost.
    StrongestSignal,
    /// Explore with probability epsilon, otherwise exploit the best arm.
    EpsGreedy,
    /// Epsilon-greedy plus hysteresis: after a fully satisfied round the
    /// STA stays put until `sticky_max` consecutive unsatisfied rounds.
    EpsSticky,
    /// No learning: an unsatisfied STA jumps (with probability rho) to the
    /// AP currently broadcasting the lowest offered load.
    LoadAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonSchedule {
    Fixed,
    /// epsilon_t = epsilon / sqrt(t), t counting rounds since the agent
    /// started (or last reset), capped at 1.
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardStrategy {
    /// Arithmetic mean of every reward seen.
    Average,
    /// Mean of the most recent n rewards.
    Window(usize),
    /// All rewards, the x-th newest weighted 1 - x/n where n is the count
    /// retained, so old samples fade linearly.
    Weighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub policy: Policy,
    /// Exploration probability; the numerator epsilon_0 under the
    /// decreasing schedule.
    pub epsilon: f64,
    pub schedule: EpsilonSchedule,
    /// Unsatisfied rounds an epsilon-sticky agent tolerates before it
    /// resumes exploring.
    pub sticky_max: u32,
    pub reward_strategy: RewardStrategy,
    /// Load-aware jump probability.
    pub rho: f64,
}

impl AgentConfig {
    pub fn strongest_signal() -> AgentConfig {
        AgentConfig {
            policy: Policy::StrongestSignal,
            epsilon: 0.0,
            schedule: EpsilonSchedule::Fixed,
            sticky_max: 1,
            reward_strategy: RewardStrategy::Average,
            rho: 0.0,
        }
    }

    pub fn eps_greedy(epsilon: f64) -> AgentConfig {
        AgentConfig { policy: Policy::EpsGreedy, epsilon, ..AgentConfig::strongest_signal() }
    }

    pub fn eps_sticky(epsilon: f64, sticky_max: u32) -> AgentConfig {
        AgentConfig {
            policy: Policy::EpsSticky,
            epsilon,
            sticky_max,
            ..AgentConfig::strongest_signal()
        }
    }

    pub fn load_aware(rho: f64) -> AgentConfig {
        AgentConfig { policy: Policy::LoadAware, rho, ..AgentConfig::strongest_signal() }
    }

    pub fn validate(&self) -> Result<()> {
        match self.schedule {
            EpsilonSchedule::Fixed => {
                if !(0.0..=1.0).contains(&self.epsilon) {
                    return Err(Error::config(format!(
                        "epsilon must be in [0, 1], got {}",
                        self.epsilon
                    )));
                }
            }
            EpsilonSchedule::Decreasing => {
                if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
                    return Err(Error::config(format!(
                        "decreasing schedule needs epsilon_0 > 0, got {}",
                        self.epsilon
                    )));
                }
            }
        }
        if self.policy == Policy::EpsSticky && self.sticky_max == 0 {
            return Err(Error::config("sticky counter must be at least 1".to_string()));
        }
        if let RewardStrategy::Window(n) = self.reward_strategy {
            if n == 0 {
                return Err(Error::config("reward window must be at least 1".to_string()));
            }
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::config(format!("rho must be in [0, 1], got {}", self.rho)));
        }
        Ok(())
    }
}

/// Exploration probability for the agent's `t`-th round (1-based) since it
/// started learning.
pub fn epsilon_for_round(config: &AgentConfig, t: u64) -> f64 {
    match config.schedule {
        EpsilonSchedule::Fixed => config.epsilon,
        EpsilonSchedule::Decreasing => (config.epsilon / (t.max(1) as f64).sqrt()).min(1.0),
    }
}

// ---------------------------------------------------------------------------
// Arm statistics
// ---------------------------------------------------------------------------

/// Reward bookkeeping for one arm. `aggregate` is the strategy-dependent
/// summary the exploit step compares.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    pub visits: u64,
    pub aggregate: f64,
    sum: f64,
    history: VecDeque<f64>,
}

impl ArmStats {
    pub fn new() -> ArmStats {
        ArmStats { visits: 0, aggregate: 0.0, sum: 0.0, history: VecDeque::new() }
    }

    pub fn history(&self) -> impl Iterator<Item = f64> + '_ {
        self.history.iter().copied()
    }
}

impl Default for ArmStats {
    fn default() -> Self {
        ArmStats::new()
    }
}

/// Fold one reward into the arm under the given strategy.
pub fn update_reward(stats: &mut ArmStats, reward: f64, strategy: RewardStrategy) {
    assert!(
        (0.0..=1.0).contains(&reward),
        "reward must be a normalized throughput in [0, 1], got {reward}"
    );
    stats.visits += 1;
    match strategy {
        RewardStrategy::Average => {
            stats.sum += reward;
            stats.aggregate = stats.sum / stats.visits as f64;
        }
        RewardStrategy::Window(n) => {
            stats.history.push_back(reward);
            while stats.history.len() > n {
                stats.history.pop_front();
            }
            stats.aggregate =
                stats.history.iter().sum::<f64>() / stats.history.len() as f64;
        }
        RewardStrategy::Weighted => {
            stats.history.push_back(reward);
            let n = stats.history.len() as f64;
            let mut weighted = 0.0;
            let mut weight_sum = 0.0;
            // x-th newest reward gets weight 1 - x/n
            for (x, r) in stats.history.iter().rev().enumerate() {
                let w = 1.0 - x as f64 / n;
                weighted += w * r;
                weight_sum += w;
            }
            stats.aggregate = weighted / weight_sum;
        }
    }
}

// ---------------------------------------------------------------------------
// Agent state
// ---------------------------------------------------------------------------

/// Mutable per-STA agent state. One instance lives for the whole run; a
/// detected environment change wipes it back to the initial scan.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub arms: BTreeMap<ApId, ArmStats>,
    pub current_ap: Option<ApId>,
    /// True between a fully satisfied round and sticky-counter exhaustion.
    pub sticking: bool,
    pub sticky_counter: u32,
    /// Outcome of the previous round; drives load-aware decisions.
    pub satisfied_last: bool,
    /// Next decision performs a strongest-signal scan (initial association
    /// or post-reset).
    pub force_scan: bool,
    /// Rounds decided since the last reset; drives the decreasing schedule.
    pub decisions: u64,
    /// Visibility snapshot against which changes are measured. Replaced
    /// only when a reset fires, so gradual drift still accumulates.
    pub last_visibility: Vec<(ApId, f64)>,
}

impl AgentState {
    pub fn new() -> AgentState {
        AgentState {
            arms: BTreeMap::new(),
            current_ap: None,
            sticking: false,
            sticky_counter: 0,
            satisfied_last: false,
            force_scan: true,
            decisions: 0,
            last_visibility: Vec::new(),
        }
    }

    pub fn aggregate(&self, ap: ApId) -> f64 {
        self.arms.get(&ap).map(|s| s.aggregate).unwrap_or(0.0)
    }
}

impl Default for AgentState {
    fn default() -> Self {
        AgentState::new()
    }
}

/// Outcome of the exploration coin, separated from the decision logic so
/// tests can force specific flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExplorationDraw {
    Exploit,
    /// Index into the visible-arm slice.
    Explore(usize),
}

// ---------------------------------------------------------------------------
// Decisions
// ---------------------------------------------------------------------------

/// Strongest-signal choice over `(ap, rssi)` pairs; ties break uniformly.
pub fn ss_decide<R: Rng + ?Sized>(visible: &[(ApId, f64)], rng: &mut R) -> Option<ApId> {
    if visible.is_empty() {
        return None;
    }
    let best = visible.iter().map(|&(_, rssi)| rssi).fold(f64::NEG_INFINITY, f64::max);
    Some(pick_uniform(visible.iter().filter(|&&(_, r)| r == best).map(|&(ap, _)| ap), rng))
}

fn pick_uniform<R: Rng + ?Sized>(candidates: impl Iterator<Item = ApId>, rng: &mut R) -> ApId {
    let set: Vec<ApId> = candidates.collect();
    debug_assert!(!set.is_empty());
    if set.len() == 1 {
        set[0]
    } else {
        set[rng.gen_range(0..set.len())]
    }
}

fn exploit<R: Rng + ?Sized>(state: &AgentState, visible: &[(ApId, f64)], rng: &mut R) -> ApId {
    let best = visible
        .iter()
        .map(|&(ap, _)| state.aggregate(ap))
        .fold(f64::NEG_INFINITY, f64::max);
    pick_uniform(
        visible.iter().map(|&(ap, _)| ap).filter(|&ap| state.aggregate(ap) == best),
        rng,
    )
}

/// Epsilon-greedy with a forced coin: explore lands on the drawn arm,
/// exploit takes the best aggregate (unvisited arms count as 0), ties
/// break uniformly.
pub fn eps_greedy_decide_with<R: Rng + ?Sized>(
    state: &AgentState,
    visible: &[(ApId, f64)],
    draw: ExplorationDraw,
    rng: &mut R,
) -> ApId {
    assert!(!visible.is_empty(), "cannot decide over an empty arm set");
    match draw {
        ExplorationDraw::Explore(i) => visible[i].0,
        ExplorationDraw::Exploit => exploit(state, visible, rng),
    }
}

fn sample_draw<R: Rng + ?Sized>(epsilon: f64, arms: usize, rng: &mut R) -> ExplorationDraw {
    if rng.gen::<f64>() < epsilon {
        ExplorationDraw::Explore(rng.gen_range(0..arms))
    } else {
        ExplorationDraw::Exploit
    }
}

/// Epsilon-greedy decision. The exploration set includes the current AP,
/// so an exploration round may stay put.
pub fn eps_greedy_decide<R: Rng + ?Sized>(
    state: &AgentState,
    visible: &[(ApId, f64)],
    epsilon: f64,
    rng: &mut R,
) -> ApId {
    assert!(!visible.is_empty(), "cannot decide over an empty arm set");
    let draw = sample_draw(epsilon, visible.len(), rng);
    eps_greedy_decide_with(state, visible, draw, rng)
}

/// Epsilon-sticky decision: while sticking, stay on the current AP;
/// otherwise behave epsilon-greedy. Counter bookkeeping happens at reward
/// time in [`receive_reward`].
pub fn eps_sticky_decide<R: Rng + ?Sized>(
    state: &AgentState,
    visible: &[(ApId, f64)],
    epsilon: f64,
    rng: &mut R,
) -> ApId {
    if let Some(current) = state.current_ap {
        if state.sticking && visible.iter().any(|&(ap, _)| ap == current) {
            return current;
        }
    }
    eps_greedy_decide(state, visible, epsilon, rng)
}

/// Load-aware decision: a satisfied STA stays; an unsatisfied one jumps
/// with probability rho to the visible AP broadcasting the lowest offered
/// load (its own AP's broadcast includes its own demand).
pub fn load_aware_decide<R: Rng + ?Sized>(
    state: &AgentState,
    visible: &[(ApId, f64)],
    broadcast_load_mbps: &[f64],
    rho: f64,
    rng: &mut R,
) -> ApId {
    let current = state.current_ap.expect("load-aware STA must be associated");
    if state.satisfied_last || visible.is_empty() || rng.gen::<f64>() >= rho {
        return current;
    }
    let lowest = visible
        .iter()
        .map(|&(ap, _)| broadcast_load_mbps[ap])
        .fold(f64::INFINITY, f64::min);
    pick_uniform(
        visible
            .iter()
            .map(|&(ap, _)| ap)
            .filter(|&ap| broadcast_load_mbps[ap] == lowest),
        rng,
    )
}

/// One production decision for scan/bandit policies (load-aware runs in
/// the engine's sequential pass). Applies, in order: the forced initial
/// scan, the strongest-signal keep-until-lost rule, the sticky gate, then
/// the epsilon coin. `draw` overrides the coin when supplied.
pub fn decide<R: Rng + ?Sized>(
    state: &mut AgentState,
    config: &AgentConfig,
    visible: &[(ApId, f64)],
    forced_draw: Option<ExplorationDraw>,
    rng: &mut R,
) -> Option<ApId> {
    state.decisions += 1;
    if visible.is_empty() {
        return None;
    }
    if state.force_scan || state.current_ap.is_none() {
        state.force_scan = false;
        return ss_decide(visible, rng);
    }
    let current = state.current_ap.expect("checked above");
    match config.policy {
        Policy::StrongestSignal => {
            if visible.iter().any(|&(ap, _)| ap == current) {
                Some(current)
            } else {
                ss_decide(visible, rng)
            }
        }
        Policy::EpsGreedy => {
            let draw = forced_draw.unwrap_or_else(|| {
                sample_draw(epsilon_for_round(config, state.decisions), visible.len(), rng)
            });
            Some(eps_greedy_decide_with(state, visible, draw, rng))
        }
        Policy::EpsSticky => {
            if state.sticking && visible.iter().any(|&(ap, _)| ap == current) {
                return Some(current);
            }
            let draw = forced_draw.unwrap_or_else(|| {
                sample_draw(epsilon_for_round(config, state.decisions), visible.len(), rng)
            });
            Some(eps_greedy_decide_with(state, visible, draw, rng))
        }
        Policy::LoadAware => {
            // first association handled by the force_scan branch; later
            // rounds run through the engine's sequential load-aware pass
            Some(current)
        }
    }
}

/// Credit the round's reward to the chosen arm and advance the policy
/// state machines (sticky counter, last-round satisfaction).
pub fn receive_reward(state: &mut AgentState, config: &AgentConfig, ap: ApId, reward: f64) {
    let satisfied = reward >= 1.0 - SATISFACTION_TOLERANCE;
    state.satisfied_last = satisfied;
    match config.policy {
        Policy::EpsGreedy | Policy::EpsSticky => {
            update_reward(state.arms.entry(ap).or_default(), reward, config.reward_strategy);
        }
        Policy::StrongestSignal | Policy::LoadAware => {}
    }
    if config.policy == Policy::EpsSticky {
        if satisfied {
            state.sticking = true;
            state.sticky_counter = config.sticky_max;
        } else if state.sticking {
            state.sticky_counter -= 1;
            if state.sticky_counter == 0 {
                state.sticking = false;
            }
        }
    }
}

/// Reset learned state when the radio environment changed: a different AP
/// set, or any shared AP whose RSSI moved by at least `delta_db`. Returns
/// whether a reset fired. The next decision after a reset is a fresh scan.
pub fn maybe_reset(state: &mut AgentState, visible: &[(ApId, f64)], delta_db: f64) -> bool {
    if state.last_visibility.is_empty() {
        state.last_visibility = visible.to_vec();
        return false;
    }
    let changed = {
        let old = &state.last_visibility;
        if old.len() != visible.len()
            || old.iter().zip(visible).any(|(a, b)| a.0 != b.0)
        {
            true
        } else {
            old.iter()
                .zip(visible)
                .any(|(&(_, old_rssi), &(_, new_rssi))| (new_rssi - old_rssi).abs() >= delta_db)
        }
    };
    if changed {
        state.arms.clear();
        state.sticking = false;
        state.sticky_counter = 0;
        state.satisfied_last = false;
        state.force_scan = true;
        state.decisions = 0;
        state.last_visibility = visible.to_vec();
    }
    changed
}
