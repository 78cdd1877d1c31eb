//! Round-based simulation core: link tables, channel occupancy, throughput
//! and the per-round pipeline wiring scenario, radio model and agents
//! together.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{
    self, AgentConfig, AgentState, ApId, Policy, SATISFACTION_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::phy::{
    self, PathLossParams, RateTable, TimingParams,
};
use crate::scenario::{
    apply_mobility, sample_round_loads, ArrivalSchedule, Deployment, FixedScenario, LinkOverride,
    LoadModel,
};

/// Upper bound on `ap_count ^ sta_count` for exhaustive enumeration.
pub const ENUMERATION_CAP: u64 = 1_000_000;

// ---------------------------------------------------------------------------
// Static run parameters
// ---------------------------------------------------------------------------

/// Radio and engine parameters that hold for a whole run.
#[derive(Debug, Clone)]
pub struct SimParams {
    pub path_loss: PathLossParams,
    pub timing: TimingParams,
    pub rate_table: RateTable,
    pub tx_power_dbm: f64,
    /// Weakest RSSI at which an AP is visible (an arm) and at which a
    /// foreign co-channel STA loads an AP.
    pub sensitivity_dbm: f64,
    /// RSSI change that makes an agent discard learned rewards.
    pub reset_delta_db: f64,
    pub rounds: u32,
}

impl SimParams {
    pub fn for_bandwidth(bandwidth: crate::phy::Bandwidth) -> SimParams {
        SimParams {
            path_loss: PathLossParams::default(),
            timing: TimingParams::default(),
            rate_table: RateTable::builtin(bandwidth),
            tx_power_dbm: 20.0,
            sensitivity_dbm: -82.0,
            reset_delta_db: agents::DEFAULT_RESET_DELTA_DB,
            rounds: 240,
        }
    }
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams::for_bandwidth(crate::phy::Bandwidth::Mhz20)
    }
}

// ---------------------------------------------------------------------------
// Link table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRow {
    pub path_loss_db: f64,
    pub rssi_dbm: f64,
    pub data_rate_bps: f64,
    pub legacy_rate_bps: f64,
    /// RSSI at or above the sensitivity threshold.
    pub in_range: bool,
}

/// Per-(STA, AP) radio state. Row order is STA-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTable {
    rows: Vec<Vec<LinkRow>>,
}

impl LinkTable {
    pub fn sta_count(&self) -> usize {
        self.rows.len()
    }

    pub fn ap_count(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn row(&self, sta: usize) -> &[LinkRow] {
        &self.rows[sta]
    }

    /// Visible arms for one STA: `(ap, rssi)` in ascending AP order.
    pub fn visible_aps(&self, sta: usize) -> Vec<(ApId, f64)> {
        self.rows[sta]
            .iter()
            .enumerate()
            .filter(|(_, link)| link.in_range)
            .map(|(ap, link)| (ap, link.rssi_dbm))
            .collect()
    }

    /// All APs with their RSSI, for the out-of-range fallback scan.
    pub fn all_aps(&self, sta: usize) -> Vec<(ApId, f64)> {
        self.rows[sta]
            .iter()
            .enumerate()
            .map(|(ap, link)| (ap, link.rssi_dbm))
            .collect()
    }
}

fn build_link_row(
    sta: usize,
    deployment: &Deployment,
    params: &SimParams,
    shadowing_db: &[Vec<f64>],
    overrides: &[LinkOverride],
) -> Result<Vec<LinkRow>> {
    let sta_pos = &deployment.sta_positions[sta];
    let mut row = Vec::with_capacity(deployment.ap_count());
    for (ap, ap_pos) in deployment.ap_positions.iter().enumerate() {
        let pl = phy::path_loss_db(sta_pos.distance(ap_pos), &params.path_loss, shadowing_db[sta][ap])?;
        let rssi = params.tx_power_dbm - pl;
        // signal below the whole table still gets the lowest entry's rates
        let entry = params.rate_table.select(rssi).unwrap_or_else(|| params.rate_table.lowest());
        let (mut data_rate, mut legacy_rate) = (entry.data_rate_bps, entry.legacy_rate_bps);
        if let Some(o) = overrides.iter().find(|o| o.sta == sta && o.ap == ap) {
            data_rate = o.data_rate_bps;
            legacy_rate = o.legacy_rate_bps;
        }
        row.push(LinkRow {
            path_loss_db: pl,
            rssi_dbm: rssi,
            data_rate_bps: data_rate,
            legacy_rate_bps: legacy_rate,
            in_range: rssi >= params.sensitivity_dbm,
        });
    }
    Ok(row)
}

/// Build the full link table for a deployment.
pub fn build_link_table(
    deployment: &Deployment,
    params: &SimParams,
    shadowing_db: &[Vec<f64>],
    overrides: &[LinkOverride],
) -> Result<LinkTable> {
    let rows = (0..deployment.sta_count())
        .map(|sta| build_link_row(sta, deployment, params, shadowing_db, overrides))
        .collect::<Result<Vec<_>>>()?;
    Ok(LinkTable { rows })
}

/// One shadowing draw per (STA, AP) link; zeros when shadowing is off.
pub fn build_shadowing<R: Rng + ?Sized>(
    sta_count: usize,
    ap_count: usize,
    params: &PathLossParams,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    (0..sta_count)
        .map(|_| (0..ap_count).map(|_| phy::sample_shadowing_db(params, rng)).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Occupancy and throughput
// ---------------------------------------------------------------------------

/// Airtime each active, associated STA asks from its serving AP's channel.
/// Inactive or unassociated STAs contribute zero.
pub fn sta_airtimes(
    timing: &TimingParams,
    links: &LinkTable,
    association: &[Option<ApId>],
    active: &[bool],
    loads_mbps: &[f64],
) -> Result<Vec<f64>> {
    let mut airtimes = vec![0.0; association.len()];
    for sta in 0..association.len() {
        if !active[sta] {
            continue;
        }
        if let Some(ap) = association[sta] {
            let link = &links.row(sta)[ap];
            airtimes[sta] = phy::required_airtime(
                timing,
                loads_mbps[sta] * 1e6,
                timing.frame_bits,
                link.data_rate_bps,
                link.legacy_rate_bps,
            )?;
        }
    }
    Ok(airtimes)
}

/// Total airtime demanded on `ap`'s channel: its own STAs plus STAs of
/// co-channel APs that `ap` can hear (RSSI at or above sensitivity). Foreign
/// STAs count with the airtime they consume on their own serving link.
/// Uncapped; values above 1 mean the channel is oversubscribed.
pub fn raw_occupancy(
    ap: ApId,
    channels: &[u16],
    links: &LinkTable,
    association: &[Option<ApId>],
    active: &[bool],
    airtimes: &[f64],
) -> f64 {
    let mut total = 0.0;
    for sta in 0..association.len() {
        if !active[sta] {
            continue;
        }
        let Some(serving) = association[sta] else { continue };
        let counts = serving == ap
            || (channels[serving] == channels[ap] && links.row(sta)[ap].in_range);
        if counts {
            total += airtimes[sta];
        }
    }
    total
}

/// Fraction of its demand a STA on a channel with this raw occupancy
/// receives: everyone on an oversubscribed channel is throttled by the
/// same factor.
pub fn normalized_throughput(raw_occupancy: f64) -> f64 {
    1.0 / raw_occupancy.max(1.0)
}

// ---------------------------------------------------------------------------
// Scenario instance and per-round records
// ---------------------------------------------------------------------------

/// Where per-round loads come from.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadSource {
    Model(LoadModel),
    /// Fixed per-STA demand (scenario files).
    PerSta(Vec<f64>),
}

/// Everything sampled per seed that the engine consumes: one concrete
/// deployment with its shadowing, arrivals and load source.
#[derive(Debug, Clone)]
pub struct ScenarioInstance {
    pub deployment: Deployment,
    pub shadowing_db: Vec<Vec<f64>>,
    pub link_overrides: Vec<LinkOverride>,
    pub arrivals: ArrivalSchedule,
    pub load_source: LoadSource,
    /// Per-round probability that a STA moves to a random cluster.
    pub mobility_theta: f64,
}

impl ScenarioInstance {
    /// Wrap a pinned scenario file. Shadowing draws happen here (one per
    /// link) when the file enables them.
    pub fn from_fixed<R: Rng + ?Sized>(
        fixed: &FixedScenario,
        params: &SimParams,
        rng: &mut R,
    ) -> ScenarioInstance {
        let (stas, aps) = (fixed.deployment.sta_count(), fixed.deployment.ap_count());
        let shadowing_db = if fixed.shadowing {
            build_shadowing(stas, aps, &params.path_loss, rng)
        } else {
            vec![vec![0.0; aps]; stas]
        };
        ScenarioInstance {
            deployment: fixed.deployment.clone(),
            shadowing_db,
            link_overrides: fixed.link_overrides.clone(),
            arrivals: ArrivalSchedule::all_at_start(stas),
            load_source: LoadSource::PerSta(fixed.sta_loads_mbps.clone()),
            mobility_theta: 0.0,
        }
    }

    pub fn validate(&self, agent_count: usize) -> Result<()> {
        self.deployment.validate()?;
        let stas = self.deployment.sta_count();
        if agent_count != stas {
            return Err(Error::invalid(format!(
                "expected {stas} agent configs, got {agent_count}"
            )));
        }
        if self.shadowing_db.len() != stas
            || self.shadowing_db.iter().any(|row| row.len() != self.deployment.ap_count())
        {
            return Err(Error::invalid("shadowing table shape mismatch".to_string()));
        }
        if self.arrivals.arrival_round.len() != stas {
            return Err(Error::invalid("arrival schedule length mismatch".to_string()));
        }
        if self.arrivals.arrival_round.iter().any(|&r| r == 0) {
            return Err(Error::invalid("arrival rounds are 1-based".to_string()));
        }
        match &self.load_source {
            LoadSource::Model(model) => model.validate()?,
            LoadSource::PerSta(loads) => {
                if loads.len() != stas {
                    return Err(Error::invalid("per-STA load length mismatch".to_string()));
                }
                if loads.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                    return Err(Error::invalid("per-STA loads must be positive".to_string()));
                }
            }
        }
        if self.mobility_theta > 0.0 && self.deployment.cluster_centers.is_empty() {
            return Err(Error::config("mobility requires a clustered deployment".to_string()));
        }
        Ok(())
    }
}

/// Per-STA outcome of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct StaRound {
    pub active: bool,
    pub ap: Option<ApId>,
    pub load_mbps: f64,
    pub throughput_mbps: f64,
    pub normalized_throughput: f64,
    pub satisfied: bool,
    pub reassociated: bool,
    /// Associated without any AP above sensitivity.
    pub out_of_range: bool,
}

/// Per-AP outcome of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct ApRound {
    pub raw_occupancy: f64,
    /// Sum of its own active STAs' offered loads, Mb/s.
    pub offered_load_mbps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u32,
    pub stas: Vec<StaRound>,
    pub aps: Vec<ApRound>,
}

/// RNG streams the engine consumes, pre-derived by the caller so load and
/// mobility draws stay identical across compared policies.
pub struct SimStreams {
    pub loads: ChaCha8Rng,
    pub mobility: ChaCha8Rng,
    pub decisions: ChaCha8Rng,
}

pub struct SimOutput {
    pub records: Vec<RoundRecord>,
    pub agents: Vec<AgentState>,
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct SimState {
    deployment: Deployment,
    links: LinkTable,
    active: Vec<bool>,
    association: Vec<Option<ApId>>,
    out_of_range: Vec<bool>,
    loads_mbps: Vec<f64>,
    agents: Vec<AgentState>,
}

/// Run a full simulation: `params.rounds` synchronous rounds, one agent
/// per STA. Deterministic given the scenario and stream states.
pub fn run_simulation(
    params: &SimParams,
    scenario: &ScenarioInstance,
    agent_configs: &[AgentConfig],
    streams: &mut SimStreams,
) -> Result<SimOutput> {
    scenario.validate(agent_configs.len())?;
    for config in agent_configs {
        config.validate()?;
    }
    let stas = scenario.deployment.sta_count();
    let mut state = SimState {
        deployment: scenario.deployment.clone(),
        links: build_link_table(
            &scenario.deployment,
            params,
            &scenario.shadowing_db,
            &scenario.link_overrides,
        )?,
        active: vec![false; stas],
        association: vec![None; stas],
        out_of_range: vec![false; stas],
        loads_mbps: vec![0.0; stas],
        agents: (0..stas).map(|_| AgentState::new()).collect(),
    };
    let mut records = Vec::with_capacity(params.rounds as usize);
    for round in 1..=params.rounds {
        records.push(run_round(round, &mut state, params, scenario, agent_configs, streams)?);
    }
    Ok(SimOutput { records, agents: state.agents })
}

fn run_round(
    round: u32,
    state: &mut SimState,
    params: &SimParams,
    scenario: &ScenarioInstance,
    agent_configs: &[AgentConfig],
    streams: &mut SimStreams,
) -> Result<RoundRecord> {
    let stas = state.deployment.sta_count();
    let aps = state.deployment.ap_count();

    // 1. arrivals
    for sta in 0..stas {
        if scenario.arrivals.arrival_round[sta] == round {
            state.active[sta] = true;
            state.agents[sta].last_visibility = state.links.visible_aps(sta);
        }
    }

    // 2. mobility; moved STAs get fresh link rows and a reset check
    if scenario.mobility_theta > 0.0 {
        let moved = apply_mobility(
            &mut state.deployment.sta_positions,
            &state.active,
            &state.deployment.cluster_centers,
            scenario.mobility_theta,
            &mut streams.mobility,
        )?;
        for sta in moved {
            state.links.rows[sta] = build_link_row(
                sta,
                &state.deployment,
                params,
                &scenario.shadowing_db,
                &scenario.link_overrides,
            )?;
            if matches!(agent_configs[sta].policy, Policy::EpsGreedy | Policy::EpsSticky) {
                let row = state.links.visible_aps(sta);
                agents::maybe_reset(&mut state.agents[sta], &row, params.reset_delta_db);
            }
        }
    }

    // 3. this round's offered loads
    match &scenario.load_source {
        LoadSource::Model(model) => {
            state.loads_mbps = sample_round_loads(model, stas, &mut streams.loads);
        }
        LoadSource::PerSta(loads) => state.loads_mbps.clone_from(loads),
    }

    // 4. association decisions
    let prev_association = state.association.clone();
    let mut deferred: Vec<usize> = Vec::new();
    for sta in 0..stas {
        if !state.active[sta] {
            continue;
        }
        let config = &agent_configs[sta];
        let agent = &mut state.agents[sta];
        let needs_scan = agent.force_scan || agent.current_ap.is_none();
        if config.policy == Policy::LoadAware && !needs_scan {
            deferred.push(sta);
            continue;
        }
        let visible = state.links.visible_aps(sta);
        let choice = agents::decide(agent, config, &visible, None, &mut streams.decisions);
        let (ap, fallback) = match choice {
            Some(ap) => (ap, false),
            None => {
                let all = state.links.all_aps(sta);
                let ap = agents::ss_decide(&all, &mut streams.decisions)
                    .ok_or_else(|| Error::Internal("deployment has no APs".to_string()))?;
                (ap, true)
            }
        };
        state.out_of_range[sta] = fallback;
        state.association[sta] = Some(ap);
        state.agents[sta].current_ap = Some(ap);
    }
    if !deferred.is_empty() {
        run_load_aware_pass(state, agent_configs, &deferred, &mut streams.decisions)?;
    }

    // 5. occupancy and throughput
    let airtimes = sta_airtimes(
        &params.timing,
        &state.links,
        &state.association,
        &state.active,
        &state.loads_mbps,
    )?;
    let channels = &state.deployment.ap_channels;
    let occupancy: Vec<f64> = (0..aps)
        .map(|ap| {
            raw_occupancy(ap, channels, &state.links, &state.association, &state.active, &airtimes)
        })
        .collect();

    // 6. rewards and the round record
    let mut sta_rounds = Vec::with_capacity(stas);
    for sta in 0..stas {
        if !state.active[sta] {
            sta_rounds.push(StaRound {
                active: false,
                ap: None,
                load_mbps: 0.0,
                throughput_mbps: 0.0,
                normalized_throughput: 0.0,
                satisfied: false,
                reassociated: false,
                out_of_range: false,
            });
            continue;
        }
        let ap = state.association[sta].expect("active STAs are associated");
        let normalized = normalized_throughput(occupancy[ap]);
        agents::receive_reward(&mut state.agents[sta], &agent_configs[sta], ap, normalized);
        sta_rounds.push(StaRound {
            active: true,
            ap: Some(ap),
            load_mbps: state.loads_mbps[sta],
            throughput_mbps: state.loads_mbps[sta] * normalized,
            normalized_throughput: normalized,
            satisfied: normalized >= 1.0 - SATISFACTION_TOLERANCE,
            reassociated: prev_association[sta].is_some()
                && prev_association[sta] != state.association[sta],
            out_of_range: state.out_of_range[sta],
        });
    }
    let ap_rounds = (0..aps)
        .map(|ap| ApRound {
            raw_occupancy: occupancy[ap],
            offered_load_mbps: (0..stas)
                .filter(|&sta| state.active[sta] && state.association[sta] == Some(ap))
                .map(|sta| state.loads_mbps[sta])
                .sum(),
        })
        .collect();
    Ok(RoundRecord { round, stas: sta_rounds, aps: ap_rounds })
}

/// Sequential load-aware decisions in a fresh uniformly random order, each
/// STA seeing the broadcast loads left by the deciders before it.
fn run_load_aware_pass(
    state: &mut SimState,
    agent_configs: &[AgentConfig],
    deferred: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let aps = state.deployment.ap_count();
    let mut broadcast = vec![0.0; aps];
    for sta in 0..state.active.len() {
        if state.active[sta] {
            if let Some(ap) = state.association[sta] {
                broadcast[ap] += state.loads_mbps[sta];
            }
        }
    }
    let mut order = deferred.to_vec();
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    for &sta in &order {
        let current = state.association[sta]
            .ok_or_else(|| Error::Internal("deferred STA lost its association".to_string()))?;
        let visible = state.links.visible_aps(sta);
        let (chosen, fallback) = if visible.is_empty() {
            let all = state.links.all_aps(sta);
            let ap = agents::ss_decide(&all, rng)
                .ok_or_else(|| Error::Internal("deployment has no APs".to_string()))?;
            (ap, true)
        } else if !visible.iter().any(|&(ap, _)| ap == current) {
            // signal lost: same full-scan rule as every other policy
            let ap = agents::ss_decide(&visible, rng).expect("visible set is non-empty");
            (ap, false)
        } else {
            let ap = agents::load_aware_decide(
                &state.agents[sta],
                &visible,
                &broadcast,
                agent_configs[sta].rho,
                rng,
            );
            (ap, false)
        };
        if chosen != current {
            broadcast[current] -= state.loads_mbps[sta];
            broadcast[chosen] += state.loads_mbps[sta];
        }
        state.out_of_range[sta] = fallback;
        state.association[sta] = Some(chosen);
        state.agents[sta].current_ap = Some(chosen);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Exhaustive association enumeration
// ---------------------------------------------------------------------------

/// One fully specified association vector and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationOutcome {
    /// `association[sta]` is the serving AP.
    pub association: Vec<ApId>,
    pub required_airtime: Vec<f64>,
    /// Airtime each STA actually receives after throttling.
    pub served_airtime: Vec<f64>,
    pub throughput_mbps: Vec<f64>,
    pub normalized_throughput: Vec<f64>,
    /// Every STA fully satisfied.
    pub fully_satisfied: bool,
}

/// Evaluate every possible association of every STA (all active). The
/// instance must stay under [`ENUMERATION_CAP`] combinations.
pub fn enumerate_associations(
    params: &SimParams,
    deployment: &Deployment,
    links: &LinkTable,
    loads_mbps: &[f64],
) -> Result<Vec<AssociationOutcome>> {
    let stas = deployment.sta_count();
    let aps = deployment.ap_count();
    if stas == 0 || aps == 0 {
        return Err(Error::invalid("enumeration needs at least one STA and AP".to_string()));
    }
    if loads_mbps.len() != stas {
        return Err(Error::invalid("one load per STA is required".to_string()));
    }
    let combos = (aps as u64).checked_pow(stas as u32).filter(|&c| c <= ENUMERATION_CAP);
    let Some(combos) = combos else {
        return Err(Error::invalid(format!(
            "{aps}^{stas} association vectors exceed the enumeration cap of {ENUMERATION_CAP}"
        )));
    };
    let active = vec![true; stas];
    let mut outcomes = Vec::with_capacity(combos as usize);
    let mut association: Vec<Option<ApId>> = vec![Some(0); stas];
    for combo in 0..combos {
        let mut rem = combo;
        for sta in 0..stas {
            association[sta] = Some((rem % aps as u64) as usize);
            rem /= aps as u64;
        }
        let airtimes = sta_airtimes(&params.timing, links, &association, &active, loads_mbps)?;
        let occupancy: Vec<f64> = (0..aps)
            .map(|ap| {
                raw_occupancy(
                    ap,
                    &deployment.ap_channels,
                    links,
                    &association,
                    &active,
                    &airtimes,
                )
            })
            .collect();
        let mut outcome = AssociationOutcome {
            association: association.iter().map(|a| a.unwrap()).collect(),
            required_airtime: airtimes.clone(),
            served_airtime: Vec::with_capacity(stas),
            throughput_mbps: Vec::with_capacity(stas),
            normalized_throughput: Vec::with_capacity(stas),
            fully_satisfied: true,
        };
        for sta in 0..stas {
            let ap = outcome.association[sta];
            let normalized = normalized_throughput(occupancy[ap]);
            outcome.served_airtime.push(airtimes[sta] * normalized);
            outcome.throughput_mbps.push(loads_mbps[sta] * normalized);
            outcome.normalized_throughput.push(normalized);
            if normalized < 1.0 - SATISFACTION_TOLERANCE {
                outcome.fully_satisfied = false;
            }
        }
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::ExplorationDraw;
    use crate::phy::Bandwidth;
    use crate::rng::{substream, StreamPurpose};
    use crate::scenario::{Area, Point};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn toy_scenario() -> (SimParams, ScenarioInstance) {
        let fixed = FixedScenario::from_toml_str(include_str!("../scenarios/toy.toml")).unwrap();
        let params = SimParams::default();
        let mut rng = substream(0, 0, StreamPurpose::Shadowing, 0);
        let instance = ScenarioInstance::from_fixed(&fixed, &params, &mut rng);
        (params, instance)
    }

    fn streams(seed: u64) -> SimStreams {
        SimStreams {
            loads: substream(seed, 0, StreamPurpose::Loads, 0),
            mobility: substream(seed, 0, StreamPurpose::Mobility, 0),
            decisions: substream(seed, 0, StreamPurpose::Decisions, 0),
        }
    }

    #[test]
    fn toy_links_have_pinned_rates_and_visibility() {
        let (params, scenario) = toy_scenario();
        let links =
            build_link_table(&scenario.deployment, &params, &scenario.shadowing_db, &scenario.link_overrides)
                .unwrap();
        // both APs visible to both STAs, AP 0 louder for both
        for sta in 0..2 {
            let visible = links.visible_aps(sta);
            assert_eq!(visible.len(), 2);
            assert!(links.row(sta)[0].rssi_dbm > links.row(sta)[1].rssi_dbm);
        }
        assert_eq!(links.row(0)[0].data_rate_bps, 21.5e6);
        assert_eq!(links.row(1)[0].data_rate_bps, 28.8e6);
        assert_eq!(links.row(0)[1].legacy_rate_bps, 6e6);
    }

    #[test]
    fn toy_occupancy_matches_hand_computation() {
        let (params, scenario) = toy_scenario();
        let links =
            build_link_table(&scenario.deployment, &params, &scenario.shadowing_db, &scenario.link_overrides)
                .unwrap();
        let association = vec![Some(0), Some(0)];
        let active = vec![true, true];
        let loads = vec![12.0, 15.0];
        let airtimes =
            sta_airtimes(&params.timing, &links, &association, &active, &loads).unwrap();
        assert!((airtimes[0] - 0.7825).abs() < 1e-12);
        assert!((airtimes[1] - 0.798125).abs() < 1e-12);
        let occ = raw_occupancy(0, &scenario.deployment.ap_channels, &links, &association, &active, &airtimes);
        assert!((occ - 1.580625).abs() < 1e-12);
        // AP 1 is on another channel and carries nothing
        let occ1 = raw_occupancy(1, &scenario.deployment.ap_channels, &links, &association, &active, &airtimes);
        assert_eq!(occ1, 0.0);
    }

    #[test]
    fn empty_channel_has_zero_occupancy() {
        let (params, scenario) = toy_scenario();
        let links =
            build_link_table(&scenario.deployment, &params, &scenario.shadowing_db, &scenario.link_overrides)
                .unwrap();
        let association = vec![None, None];
        let airtimes = sta_airtimes(
            &params.timing,
            &links,
            &association,
            &[false, false],
            &[12.0, 15.0],
        )
        .unwrap();
        assert_eq!(airtimes, vec![0.0, 0.0]);
        let occ = raw_occupancy(0, &scenario.deployment.ap_channels, &links, &association, &[false, false], &airtimes);
        assert_eq!(occ, 0.0);
    }

    #[test]
    fn normalized_throughput_caps_at_one() {
        assert_eq!(normalized_throughput(0.5), 1.0);
        assert_eq!(normalized_throughput(1.0), 1.0);
        assert!((normalized_throughput(1.580625) - 0.632661).abs() < 1e-6);
    }

    /// Two co-channel APs side by side: each AP hears the other's STA, so
    /// both raw occupancies include both airtimes.
    #[test]
    fn co_channel_neighbors_share_occupancy() {
        let deployment = Deployment {
            area: Area { width_m: 80.0, height_m: 80.0 },
            bandwidth: Bandwidth::Mhz20,
            ap_positions: vec![Point { x: 30.0, y: 40.0 }, Point { x: 40.0, y: 40.0 }],
            ap_channels: vec![36, 36],
            sta_positions: vec![Point { x: 28.0, y: 40.0 }, Point { x: 42.0, y: 40.0 }],
            cluster_centers: Vec::new(),
        };
        let params = SimParams {
            path_loss: PathLossParams {
                shadowing_enabled: false,
                ..PathLossParams::default()
            },
            ..SimParams::default()
        };
        let shadow = vec![vec![0.0; 2]; 2];
        let links = build_link_table(&deployment, &params, &shadow, &[]).unwrap();
        assert!(links.row(0)[1].in_range && links.row(1)[0].in_range);
        let association = vec![Some(0), Some(1)];
        let active = vec![true, true];
        let airtimes =
            sta_airtimes(&params.timing, &links, &association, &active, &[4.0, 4.0]).unwrap();
        for ap in 0..2 {
            let occ = raw_occupancy(ap, &deployment.ap_channels, &links, &association, &active, &airtimes);
            assert!((occ - (airtimes[0] + airtimes[1])).abs() < 1e-15);
        }
    }

    /// Same layout on orthogonal channels: occupancies separate.
    #[test]
    fn orthogonal_channels_do_not_interact() {
        let deployment = Deployment {
            area: Area { width_m: 80.0, height_m: 80.0 },
            bandwidth: Bandwidth::Mhz20,
            ap_positions: vec![Point { x: 30.0, y: 40.0 }, Point { x: 40.0, y: 40.0 }],
            ap_channels: vec![36, 40],
            sta_positions: vec![Point { x: 28.0, y: 40.0 }, Point { x: 42.0, y: 40.0 }],
            cluster_centers: Vec::new(),
        };
        let params = SimParams {
            path_loss: PathLossParams {
                shadowing_enabled: false,
                ..PathLossParams::default()
            },
            ..SimParams::default()
        };
        let shadow = vec![vec![0.0; 2]; 2];
        let links = build_link_table(&deployment, &params, &shadow, &[]).unwrap();
        let association = vec![Some(0), Some(1)];
        let active = vec![true, true];
        let airtimes =
            sta_airtimes(&params.timing, &links, &association, &active, &[4.0, 4.0]).unwrap();
        let occ0 = raw_occupancy(0, &deployment.ap_channels, &links, &association, &active, &airtimes);
        let occ1 = raw_occupancy(1, &deployment.ap_channels, &links, &association, &active, &airtimes);
        assert!((occ0 - airtimes[0]).abs() < 1e-15);
        assert!((occ1 - airtimes[1]).abs() < 1e-15);
    }

    #[test]
    fn first_round_uses_strongest_signal() {
        let (params, scenario) = toy_scenario();
        let params = SimParams { rounds: 1, ..params };
        let configs = vec![AgentConfig::eps_greedy(0.1); 2];
        let out = run_simulation(&params, &scenario, &configs, &mut streams(1)).unwrap();
        let record = &out.records[0];
        // both STAs hear AP 0 loudest, overload it, and split the channel
        assert_eq!(record.stas[0].ap, Some(0));
        assert_eq!(record.stas[1].ap, Some(0));
        assert!((record.stas[0].normalized_throughput - 0.632661).abs() < 1e-5);
        assert!(!record.stas[0].satisfied);
        assert!(!record.stas[0].reassociated, "first association is not a reassociation");
        // rewards landed in the arms
        assert!((out.agents[0].aggregate(0) - 0.632661).abs() < 1e-5);
    }

    #[test]
    fn zero_rounds_produce_empty_trace() {
        let (params, scenario) = toy_scenario();
        let params = SimParams { rounds: 0, ..params };
        let configs = vec![AgentConfig::strongest_signal(); 2];
        let out = run_simulation(&params, &scenario, &configs, &mut streams(2)).unwrap();
        assert!(out.records.is_empty());
    }

    #[test]
    fn simulation_is_deterministic() {
        let (params, scenario) = toy_scenario();
        let params = SimParams { rounds: 30, ..params };
        let configs = vec![AgentConfig::eps_sticky(0.3, 2); 2];
        let a = run_simulation(&params, &scenario, &configs, &mut streams(3)).unwrap();
        let b = run_simulation(&params, &scenario, &configs, &mut streams(3)).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.agents, b.agents);
    }

    #[test]
    fn arrivals_gate_activity() {
        let (params, mut scenario) = toy_scenario();
        let params = SimParams { rounds: 5, ..params };
        scenario.arrivals = ArrivalSchedule { arrival_round: vec![1, 3] };
        let configs = vec![AgentConfig::strongest_signal(); 2];
        let out = run_simulation(&params, &scenario, &configs, &mut streams(4)).unwrap();
        assert!(out.records[0].stas[0].active);
        assert!(!out.records[0].stas[1].active);
        assert_eq!(out.records[1].stas[1].ap, None);
        assert!(out.records[2].stas[1].active);
        assert_eq!(out.records[2].stas[1].ap, Some(0));
        assert!(!out.records[2].stas[1].reassociated);
        // STA 0 alone on AP 0 for rounds 1-2 is fully satisfied
        assert!(out.records[0].stas[0].satisfied);
        assert!(!out.records[2].stas[0].satisfied);
    }

    #[test]
    fn all_inactive_round_is_empty() {
        let (params, mut scenario) = toy_scenario();
        let params = SimParams { rounds: 2, ..params };
        scenario.arrivals = ArrivalSchedule { arrival_round: vec![3, 3] };
        let configs = vec![AgentConfig::strongest_signal(); 2];
        let out = run_simulation(&params, &scenario, &configs, &mut streams(5)).unwrap();
        for record in &out.records {
            assert!(record.stas.iter().all(|s| !s.active));
            assert!(record.aps.iter().all(|a| a.raw_occupancy == 0.0));
        }
    }

    #[test]
    fn out_of_range_sta_still_associates_and_is_flagged() {
        // single AP 75 m away with heavy walls: below sensitivity
        let deployment = Deployment {
            area: Area { width_m: 80.0, height_m: 80.0 },
            bandwidth: Bandwidth::Mhz20,
            ap_positions: vec![Point { x: 2.0, y: 2.0 }],
            ap_channels: vec![36],
            sta_positions: vec![Point { x: 77.0, y: 77.0 }],
            cluster_centers: Vec::new(),
        };
        let params = SimParams {
            path_loss: PathLossParams {
                shadowing_enabled: false,
                ..PathLossParams::default()
            },
            rounds: 1,
            ..SimParams::default()
        };
        let scenario = ScenarioInstance {
            deployment,
            shadowing_db: vec![vec![0.0]],
            link_overrides: Vec::new(),
            arrivals: ArrivalSchedule::all_at_start(1),
            load_source: LoadSource::PerSta(vec![1.0]),
            mobility_theta: 0.0,
        };
        let configs = vec![AgentConfig::strongest_signal()];
        let out = run_simulation(&params, &scenario, &configs, &mut streams(6)).unwrap();
        let sta = &out.records[0].stas[0];
        assert_eq!(sta.ap, Some(0));
        assert!(sta.out_of_range);
        // lowest-entry rates apply, so throughput is still computed
        assert!(sta.throughput_mbps > 0.0);
    }

    #[test]
    fn forced_draws_reproduce_decisions() {
        // replay: drive the agents with pinned coins through engine math
        let (params, scenario) = toy_scenario();
        let links =
            build_link_table(&scenario.deployment, &params, &scenario.shadowing_db, &scenario.link_overrides)
                .unwrap();
        let config = AgentConfig::eps_greedy(0.1);
        let mut state = AgentState::new();
        let mut rng = substream(9, 0, StreamPurpose::Decisions, 0);
        let visible = links.visible_aps(0);
        // round 1: forced scan ignores the draw and picks AP 0
        let first = agents::decide(&mut state, &config, &visible, Some(ExplorationDraw::Explore(1)), &mut rng);
        assert_eq!(first, Some(0));
        state.current_ap = first;
        agents::receive_reward(&mut state, &config, 0, 0.632661);
        // round 2: forced exploit stays on AP 0, forced explore jumps
        let exploit =
            agents::decide(&mut state, &config, &visible, Some(ExplorationDraw::Exploit), &mut rng);
        assert_eq!(exploit, Some(0));
        let explore =
            agents::decide(&mut state, &config, &visible, Some(ExplorationDraw::Explore(1)), &mut rng);
        assert_eq!(explore, Some(1));
    }

    #[test]
    fn enumerate_toy_matches_goldens() {
        let (params, scenario) = toy_scenario();
        let links =
            build_link_table(&scenario.deployment, &params, &scenario.shadowing_db, &scenario.link_overrides)
                .unwrap();
        let outcomes =
            enumerate_associations(&params, &scenario.deployment, &links, &[12.0, 15.0]).unwrap();
        assert_eq!(outcomes.len(), 4);
        let find = |assoc: &[usize]| {
            outcomes.iter().find(|o| o.association == assoc).expect("combo present")
        };
        let both0 = find(&[0, 0]);
        assert!((both0.throughput_mbps[0] - 7.5919).abs() < 1e-3);
        assert!((both0.throughput_mbps[1] - 9.4899).abs() < 1e-3);
        assert!(!both0.fully_satisfied);
        let split = find(&[0, 1]);
        assert_eq!(split.throughput_mbps, vec![12.0, 15.0]);
        assert!(split.fully_satisfied);
        let swapped = find(&[1, 0]);
        assert!((swapped.throughput_mbps[0] - 11.3368).abs() < 1e-3);
        assert_eq!(swapped.throughput_mbps[1], 15.0);
        assert!(!swapped.fully_satisfied);
        let both1 = find(&[1, 1]);
        assert!((both1.throughput_mbps[0] - 5.8921).abs() < 1e-3);
        assert!((both1.throughput_mbps[1] - 7.3651).abs() < 1e-3);
        let satisfying: Vec<_> = outcomes.iter().filter(|o| o.fully_satisfied).collect();
        assert_eq!(satisfying.len(), 1);
    }

    #[test]
    fn enumeration_cap_enforced() {
        let (params, scenario) = toy_scenario();
        let links =
            build_link_table(&scenario.deployment, &params, &scenario.shadowing_db, &scenario.link_overrides)
                .unwrap();
        // 2 APs, 2 STAs is fine; the cap triggers through the pow overflow
        // path with absurd inputs, checked via direct call
        assert!(enumerate_associations(&params, &scenario.deployment, &links, &[12.0]).is_err());
    }

    fn random_instance(
        seed: u64,
        aps: usize,
        stas: usize,
    ) -> (SimParams, Deployment, LinkTable, Vec<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let area = Area { width_m: 80.0, height_m: 80.0 };
        let deployment = Deployment {
            area,
            bandwidth: Bandwidth::Mhz20,
            ap_positions: (0..aps)
                .map(|_| Point { x: rng.gen_range(0.0..80.0), y: rng.gen_range(0.0..80.0) })
                .collect(),
            ap_channels: (0..aps)
                .map(|_| {
                    let set = Bandwidth::Mhz20.channel_set();
                    set[rng.gen_range(0..2)] // two channels force co-channel coupling
                })
                .collect(),
            sta_positions: (0..stas)
                .map(|_| Point { x: rng.gen_range(0.0..80.0), y: rng.gen_range(0.0..80.0) })
                .collect(),
            cluster_centers: Vec::new(),
        };
        let params = SimParams::default();
        let shadow = build_shadowing(stas, aps, &params.path_loss, &mut rng);
        let links = build_link_table(&deployment, &params, &shadow, &[]).unwrap();
        let loads: Vec<f64> = (0..stas).map(|_| rng.gen_range(1..=7) as f64).collect();
        (params, deployment, links, loads)
    }

    proptest! {
        /// Dropping one STA never hurts any other STA's normalized
        /// throughput: occupancies only shrink.
        #[test]
        fn removing_a_sta_never_hurts_others(seed in 0u64..300) {
            let (params, deployment, links, loads) = random_instance(seed, 3, 4);
            let stas = loads.len();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let association: Vec<Option<ApId>> =
                (0..stas).map(|_| Some(rng.gen_range(0..3))).collect();
            let all_active = vec![true; stas];
            let airtimes = sta_airtimes(&params.timing, &links, &association, &all_active, &loads).unwrap();
            let base: Vec<f64> = (0..3)
                .map(|ap| raw_occupancy(ap, &deployment.ap_channels, &links, &association, &all_active, &airtimes))
                .collect();
            let removed = seed as usize % stas;
            let mut active = all_active.clone();
            active[removed] = false;
            let airtimes2 = sta_airtimes(&params.timing, &links, &association, &active, &loads).unwrap();
            let after: Vec<f64> = (0..3)
                .map(|ap| raw_occupancy(ap, &deployment.ap_channels, &links, &association, &active, &airtimes2))
                .collect();
            for sta in 0..stas {
                if sta == removed { continue; }
                let ap = association[sta].unwrap();
                prop_assert!(normalized_throughput(after[ap]) >= normalized_throughput(base[ap]) - 1e-15);
            }
        }

        /// An AP never grants more airtime than one channel-second per
        /// second to its own STAs.
        #[test]
        fn served_airtime_is_conserved(seed in 0u64..300) {
            let (params, deployment, links, loads) = random_instance(seed, 3, 4);
            let stas = loads.len();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x1234);
            let association: Vec<Option<ApId>> =
                (0..stas).map(|_| Some(rng.gen_range(0..3))).collect();
            let active = vec![true; stas];
            let airtimes = sta_airtimes(&params.timing, &links, &association, &active, &loads).unwrap();
            for ap in 0..3 {
                let occ = raw_occupancy(ap, &deployment.ap_channels, &links, &association, &active, &airtimes);
                let served: f64 = (0..stas)
                    .filter(|&sta| association[sta] == Some(ap))
                    .map(|sta| airtimes[sta] * normalized_throughput(occ))
                    .sum();
                prop_assert!(served <= 1.0 + 1e-12);
            }
        }

        /// Brute-force recomputation agrees with the engine on every
        /// association vector of small instances.
        #[test]
        fn enumeration_matches_direct_recomputation(seed in 0u64..150) {
            let (params, deployment, links, loads) = random_instance(seed, 3, 4);
            let outcomes = enumerate_associations(&params, &deployment, &links, &loads).unwrap();
            prop_assert_eq!(outcomes.len(), 81);
            for outcome in &outcomes {
                for sta in 0..loads.len() {
                    // independent recomputation with explicit sums
                    let my_ap = outcome.association[sta];
                    let mut occ = 0.0;
                    for other in 0..loads.len() {
                        let other_ap = outcome.association[other];
                        let link = links.row(other)[other_ap];
                        let u = phy::required_airtime(
                            &params.timing,
                            loads[other] * 1e6,
                            params.timing.frame_bits,
                            link.data_rate_bps,
                            link.legacy_rate_bps,
                        ).unwrap();
                        let same_channel = deployment.ap_channels[other_ap] == deployment.ap_channels[my_ap];
                        if other_ap == my_ap || (same_channel && links.row(other)[my_ap].in_range) {
                            occ += u;
                        }
                    }
                    let expected = loads[sta] / occ.max(1.0);
                    prop_assert!((outcome.throughput_mbps[sta] - expected).abs() < 1e-12);
                }
            }
        }
    }
}
