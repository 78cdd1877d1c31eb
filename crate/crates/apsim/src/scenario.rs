//! Deployment generation: AP/STA placement, channel allocation, offered
//! loads, mobility and arrival schedules, plus a file format for pinning a
//! scenario exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::Bandwidth;

/// Side of the square box a cluster of STAs occupies, meters.
pub const CLUSTER_BOX_SIDE_M: f64 = 10.0;

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
}

impl Area {
    pub fn contains(&self, p: &Point) -> bool {
        p.x >= 0.0 && p.x <= self.width_m && p.y >= 0.0 && p.y <= self.height_m
    }
}

// ---------------------------------------------------------------------------
// Placement
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApPlacementMode {
    /// Square lattice with one AP per cell center; the count must be a
    /// perfect square.
    Grid,
    /// Uniform over the area.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaPlacementMode {
    Uniform,
    /// Groups of up to `cluster_size` STAs share a 10 m x 10 m box placed
    /// uniformly (box fully inside the area); the last cluster takes the
    /// remainder.
    Clustered,
}

/// AP positions. Grid placement is deterministic: row-major from the
/// bottom-left cell, each AP at its cell center.
pub fn place_aps<R: Rng + ?Sized>(
    count: usize,
    area: &Area,
    mode: ApPlacementMode,
    rng: &mut R,
) -> Result<Vec<Point>> {
    if count == 0 {
        return Err(Error::invalid("AP count must be at least 1".to_string()));
    }
    match mode {
        ApPlacementMode::Grid => {
            let side = (count as f64).sqrt().round() as usize;
            if side * side != count {
                return Err(Error::invalid(format!(
                    "grid placement needs a perfect-square AP count, got {count}"
                )));
            }
            let pitch_x = area.width_m / side as f64;
            let pitch_y = area.height_m / side as f64;
            let mut positions = Vec::with_capacity(count);
            for j in 0..side {
                for i in 0..side {
                    positions.push(Point {
                        x: pitch_x * (i as f64 + 0.5),
                        y: pitch_y * (j as f64 + 0.5),
                    });
                }
            }
            Ok(positions)
        }
        ApPlacementMode::Random => Ok((0..count)
            .map(|_| Point {
                x: rng.gen_range(0.0..area.width_m),
                y: rng.gen_range(0.0..area.height_m),
            })
            .collect()),
    }
}

/// STA positions plus the cluster centers (empty for uniform placement).
/// Clustered mode fills clusters in order, so STA index / cluster_size
/// identifies the home cluster.
pub fn place_stas<R: Rng + ?Sized>(
    count: usize,
    area: &Area,
    mode: StaPlacementMode,
    cluster_size: usize,
    rng: &mut R,
) -> Result<(Vec<Point>, Vec<Point>)> {
    if count == 0 {
        return Err(Error::invalid("STA count must be at least 1".to_string()));
    }
    match mode {
        StaPlacementMode::Uniform => {
            let positions = (0..count)
                .map(|_| Point {
                    x: rng.gen_range(0.0..area.width_m),
                    y: rng.gen_range(0.0..area.height_m),
                })
                .collect();
            Ok((positions, Vec::new()))
        }
        StaPlacementMode::Clustered => {
            if cluster_size == 0 {
                return Err(Error::invalid("cluster size must be at least 1".to_string()));
            }
            let half = CLUSTER_BOX_SIDE_M / 2.0;
            if area.width_m < CLUSTER_BOX_SIDE_M || area.height_m < CLUSTER_BOX_SIDE_M {
                return Err(Error::invalid(format!(
                    "area must fit a {CLUSTER_BOX_SIDE_M} m cluster box"
                )));
            }
            let n_clusters = count.div_ceil(cluster_size);
            let centers: Vec<Point> = (0..n_clusters)
                .map(|_| Point {
                    x: rng.gen_range(half..=area.width_m - half),
                    y: rng.gen_range(half..=area.height_m - half),
                })
                .collect();
            let mut positions = Vec::with_capacity(count);
            for (c, center) in centers.iter().enumerate() {
                let members = if c + 1 < n_clusters {
                    cluster_size
                } else {
                    count - c * cluster_size
                };
                for _ in 0..members {
                    positions.push(sample_in_cluster(center, rng));
                }
            }
            Ok((positions, centers))
        }
    }
}

fn sample_in_cluster<R: Rng + ?Sized>(center: &Point, rng: &mut R) -> Point {
    let half = CLUSTER_BOX_SIDE_M / 2.0;
    Point {
        x: center.x + rng.gen_range(-half..=half),
        y: center.y + rng.gen_range(-half..=half),
    }
}

// ---------------------------------------------------------------------------
// Channel allocation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    /// Fixed tiling over the AP lattice. With 4 or more channels no two
    /// edge- or diagonal-adjacent APs share a channel; with 2 channels the
    /// pattern checkerboards and only diagonal conflicts remain.
    GridPattern,
    /// Greedy coloring of the interference graph (APs closer than the reuse
    /// radius), most-constrained AP first.
    GreedyColoring,
}

/// How the AP positions were laid out; the grid pattern needs lattice
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApLayout {
    Grid { cols: usize },
    Free,
}

/// Assign one channel per AP from `channels`.
///
/// `reuse_radius_m` only affects greedy coloring; it defaults to twice the
/// mean nearest-neighbor AP distance.
pub fn allocate_channels(
    positions: &[Point],
    layout: ApLayout,
    channels: &[u16],
    mode: ChannelMode,
    reuse_radius_m: Option<f64>,
) -> Result<Vec<u16>> {
    if channels.is_empty() {
        return Err(Error::config("channel set is empty".to_string()));
    }
    if positions.is_empty() {
        return Ok(Vec::new());
    }
    match mode {
        ChannelMode::GridPattern => {
            let cols = match layout {
                ApLayout::Grid { cols } => cols,
                ApLayout::Free => {
                    return Err(Error::config(
                        "grid-pattern channel allocation requires grid AP placement".to_string(),
                    ))
                }
            };
            if cols == 0 || positions.len() % cols != 0 {
                return Err(Error::invalid(format!(
                    "grid layout of {} APs with {cols} columns is not rectangular",
                    positions.len()
                )));
            }
            let c = channels.len();
            Ok((0..positions.len())
                .map(|idx| {
                    let i = idx % cols;
                    let j = idx / cols;
                    let slot = if c == 2 {
                        // Checkerboard: only diagonal conflicts remain.
                        (i + j) % 2
                    } else if c == 8 && cols % 4 == 0 {
                        // Eight channels tile as 2x2 quadrants that alternate
                        // between two channel blocks, so co-channel APs sit two
                        // cells apart on both axes: the largest reuse distance
                        // a 4-column grid allows.
                        let block = 4 * ((i / 2 + j / 2) % 2);
                        block + (i % 2) + 2 * (j % 2)
                    } else {
                        // (i + 2j) mod c keeps all eight lattice neighbors on
                        // distinct channels whenever c >= 4.
                        (i + 2 * j) % c
                    };
                    channels[slot]
                })
                .collect())
        }
        ChannelMode::GreedyColoring => {
            let n = positions.len();
            let radius = match reuse_radius_m {
                Some(r) if r > 0.0 => r,
                Some(r) => {
                    return Err(Error::invalid(format!("reuse radius must be positive, got {r}")))
                }
                None => 2.0 * mean_nearest_neighbor_distance(positions),
            };
            let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
            for a in 0..n {
                for b in a + 1..n {
                    if positions[a].distance(&positions[b]) < radius {
                        neighbors[a].push(b);
                        neighbors[b].push(a);
                    }
                }
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| (std::cmp::Reverse(neighbors[i].len()), i));
            let mut assigned: Vec<Option<usize>> = vec![None; n];
            let mut global_use = vec![0usize; channels.len()];
            for &ap in &order {
                let mut neighbor_use = vec![0usize; channels.len()];
                for &nb in &neighbors[ap] {
                    if let Some(slot) = assigned[nb] {
                        neighbor_use[slot] += 1;
                    }
                }
                let best = (0..channels.len())
                    .min_by_key(|&slot| (neighbor_use[slot], global_use[slot], slot))
                    .expect("channel set is non-empty");
                assigned[ap] = Some(best);
                global_use[best] += 1;
            }
            Ok(assigned
                .into_iter()
                .map(|slot| channels[slot.expect("every AP colored")])
                .collect())
        }
    }
}

fn mean_nearest_neighbor_distance(positions: &[Point]) -> f64 {
    if positions.len() < 2 {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    for (i, p) in positions.iter().enumerate() {
        let nearest = positions
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| p.distance(q))
            .fold(f64::INFINITY, f64::min);
        total += nearest;
    }
    total / positions.len() as f64
}

// ---------------------------------------------------------------------------
// Offered load
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    /// Every STA asks for the mean every round.
    Fixed,
    /// Integer Mb/s drawn uniformly from [1, 2*mean - 1] per STA per round.
    Variable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadModel {
    pub mode: LoadMode,
    pub mean_mbps: f64,
}

impl LoadModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_mbps.is_finite() && self.mean_mbps > 0.0) {
            return Err(Error::config(format!(
                "mean load must be positive, got {}",
                self.mean_mbps
            )));
        }
        if self.mode == LoadMode::Variable && self.variable_upper_mbps() < 1 {
            return Err(Error::config(format!(
                "variable load needs mean >= 1 Mb/s, got {}",
                self.mean_mbps
            )));
        }
        Ok(())
    }

    fn variable_upper_mbps(&self) -> u64 {
        (2.0 * self.mean_mbps).round() as u64 - 1
    }
}

/// Loads for one round, Mb/s per STA. Fixed mode draws nothing.
pub fn sample_round_loads<R: Rng + ?Sized>(
    model: &LoadModel,
    count: usize,
    rng: &mut R,
) -> Vec<f64> {
    match model.mode {
        LoadMode::Fixed => vec![model.mean_mbps; count],
        LoadMode::Variable => {
            let upper = model.variable_upper_mbps().max(1);
            (0..count).map(|_| rng.gen_range(1..=upper) as f64).collect()
        }
    }
}

// ---------------------------------------------------------------------------
// Mobility and arrivals
// ---------------------------------------------------------------------------

/// Move each active STA with probability `theta` to a uniformly chosen
/// cluster (possibly its current one), uniform within the cluster box.
/// Returns the indices that moved. Draw order is fixed: one coin per active
/// STA, then destinations for the movers, so the outcome depends only on
/// the arrival pattern and the RNG.
pub fn apply_mobility<R: Rng + ?Sized>(
    positions: &mut [Point],
    active: &[bool],
    cluster_centers: &[Point],
    theta: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid(format!("theta must be in [0, 1], got {theta}")));
    }
    if theta == 0.0 {
        return Ok(Vec::new());
    }
    if cluster_centers.is_empty() {
        return Err(Error::config(
            "mobility requires a clustered deployment".to_string(),
        ));
    }
    let mut movers = Vec::new();
    for (sta, &is_active) in active.iter().enumerate().take(positions.len()) {
        if is_active && rng.gen::<f64>() < theta {
            movers.push(sta);
        }
    }
    for &sta in &movers {
        let cluster = rng.gen_range(0..cluster_centers.len());
        positions[sta] = sample_in_cluster(&cluster_centers[cluster], rng);
    }
    Ok(movers)
}

/// Round (1-based) at which each STA becomes active.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalSchedule {
    pub arrival_round: Vec<u32>,
}

impl ArrivalSchedule {
    pub fn all_at_start(count: usize) -> ArrivalSchedule {
        ArrivalSchedule { arrival_round: vec![1; count] }
    }
}

/// Uniform arrival round in [1, window] per STA; window 1 means everyone is
/// present from the first round.
pub fn sample_arrivals<R: Rng + ?Sized>(
    count: usize,
    window: u32,
    rng: &mut R,
) -> Result<ArrivalSchedule> {
    if window == 0 {
        return Err(Error::invalid("arrival window must be at least 1".to_string()));
    }
    if window == 1 {
        return Ok(ArrivalSchedule::all_at_start(count));
    }
    Ok(ArrivalSchedule {
        arrival_round: (0..count).map(|_| rng.gen_range(1..=window)).collect(),
    })
}

// ---------------------------------------------------------------------------
// Deployment and scenario files
// ---------------------------------------------------------------------------

/// A concrete radio layout: everything position- and channel-shaped the
/// engine needs, independent of loads and policies.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub area: Area,
    pub bandwidth: Bandwidth,
    pub ap_positions: Vec<Point>,
    pub ap_channels: Vec<u16>,
    pub sta_positions: Vec<Point>,
    pub cluster_centers: Vec<Point>,
}

impl Deployment {
    pub fn ap_count(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn sta_count(&self) -> usize {
        self.sta_positions.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.ap_positions.len() != self.ap_channels.len() {
            return Err(Error::invalid(
                "one channel per AP is required".to_string(),
            ));
        }
        let set = self.bandwidth.channel_set();
        for (i, ch) in self.ap_channels.iter().enumerate() {
            if !set.contains(ch) {
                return Err(Error::config(format!(
                    "AP {i} uses channel {ch}, not valid at {} MHz",
                    self.bandwidth.mhz()
                )));
            }
        }
        for (i, p) in self.ap_positions.iter().chain(self.sta_positions.iter()).enumerate() {
            if !self.area.contains(p) {
                return Err(Error::invalid(format!("position {i} lies outside the area")));
            }
        }
        Ok(())
    }
}

/// Per-link rate override used by fixed scenarios to pin exact airtimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkOverride {
    pub sta: usize,
    pub ap: usize,
    pub data_rate_bps: f64,
    pub legacy_rate_bps: f64,
}

/// A fully pinned scenario: deployment, per-STA loads and optional link
/// rate overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedScenario {
    pub deployment: Deployment,
    pub sta_loads_mbps: Vec<f64>,
    pub link_overrides: Vec<LinkOverride>,
    pub shadowing: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFileToml {
    bandwidth_mhz: u32,
    area: AreaToml,
    #[serde(default = "default_false")]
    shadowing: bool,
    #[serde(rename = "ap")]
    aps: Vec<ApToml>,
    #[serde(rename = "sta")]
    stas: Vec<StaToml>,
    #[serde(default, rename = "link")]
    links: Vec<LinkToml>,
}

fn default_false() -> bool {
    false
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AreaToml {
    width_m: f64,
    height_m: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApToml {
    x: f64,
    y: f64,
    channel: u16,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StaToml {
    x: f64,
    y: f64,
    load_mbps: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkToml {
    sta: usize,
    ap: usize,
    data_rate_mbps: f64,
    legacy_rate_mbps: f64,
}

impl FixedScenario {
    /// Parse and validate a scenario from TOML text.
    pub fn from_toml_str(text: &str) -> Result<FixedScenario> {
        let file: ScenarioFileToml =
            toml::from_str(text).map_err(|e| Error::Parse(format!("scenario file: {e}")))?;
        let bandwidth = Bandwidth::from_mhz(file.bandwidth_mhz)?;
        let deployment = Deployment {
            area: Area { width_m: file.area.width_m, height_m: file.area.height_m },
            bandwidth,
            ap_positions: file.aps.iter().map(|a| Point { x: a.x, y: a.y }).collect(),
            ap_channels: file.aps.iter().map(|a| a.channel).collect(),
            sta_positions: file.stas.iter().map(|s| Point { x: s.x, y: s.y }).collect(),
            cluster_centers: Vec::new(),
        };
        if deployment.ap_positions.is_empty() || deployment.sta_positions.is_empty() {
            return Err(Error::config(
                "scenario needs at least one AP and one STA".to_string(),
            ));
        }
        deployment.validate()?;
        let loads: Vec<f64> = file.stas.iter().map(|s| s.load_mbps).collect();
        for (i, l) in loads.iter().enumerate() {
            if !(l.is_finite() && *l > 0.0) {
                return Err(Error::config(format!("STA {i} load must be positive, got {l}")));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut overrides = Vec::with_capacity(file.links.len());
        for link in &file.links {
            if link.sta >= deployment.sta_count() || link.ap >= deployment.ap_count() {
                return Err(Error::config(format!(
                    "link override references unknown sta {} / ap {}",
                    link.sta, link.ap
                )));
            }
            if !seen.insert((link.sta, link.ap)) {
                return Err(Error::config(format!(
                    "duplicate link override for sta {} / ap {}",
                    link.sta, link.ap
                )));
            }
            if link.data_rate_mbps <= 0.0 || link.legacy_rate_mbps <= 0.0 {
                return Err(Error::config("link override rates must be positive".to_string()));
            }
            overrides.push(LinkOverride {
                sta: link.sta,
                ap: link.ap,
                data_rate_bps: link.data_rate_mbps * 1e6,
                legacy_rate_bps: link.legacy_rate_mbps * 1e6,
            });
        }
        Ok(FixedScenario {
            deployment,
            sta_loads_mbps: loads,
            link_overrides: overrides,
            shadowing: file.shadowing,
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<FixedScenario> {
        let text = std::fs::read_to_string(path)?;
        FixedScenario::from_toml_str(&text)
    }

    /// Serialize back to the TOML scenario format.
    pub fn to_toml_string(&self) -> Result<String> {
        let file = ScenarioFileToml {
            bandwidth_mhz: self.deployment.bandwidth.mhz(),
            area: AreaToml {
                width_m: self.deployment.area.width_m,
                height_m: self.deployment.area.height_m,
            },
            shadowing: self.shadowing,
            aps: self
                .deployment
                .ap_positions
                .iter()
                .zip(&self.deployment.ap_channels)
                .map(|(p, &channel)| ApToml { x: p.x, y: p.y, channel })
                .collect(),
            stas: self
                .deployment
                .sta_positions
                .iter()
                .zip(&self.sta_loads_mbps)
                .map(|(p, &load_mbps)| StaToml { x: p.x, y: p.y, load_mbps })
                .collect(),
            links: self
                .link_overrides
                .iter()
                .map(|l| LinkToml {
                    sta: l.sta,
                    ap: l.ap,
                    data_rate_mbps: l.data_rate_bps / 1e6,
                    legacy_rate_mbps: l.legacy_rate_bps / 1e6,
                })
                .collect(),
        };
        toml::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))
    }
}
