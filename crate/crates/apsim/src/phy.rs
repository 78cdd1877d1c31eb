//! Radio layer: path loss, shadowing, rate selection and airtime.
//!
//! Distances are meters, powers dBm, rates bits per second, times seconds
//! unless a field name says otherwise. Airtime is a dimensionless channel
//! fraction and may exceed 1 when a link asks for more than the channel can
//! carry.

use rand::Rng;

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Path loss and shadowing
// ---------------------------------------------------------------------------

/// Log-distance path loss with a linear wall-crossing term.
///
/// `loss(d) = reference_loss_db + 10 * exponent * log10(d)
///          + wall_loss_db * walls_per_meter * d + shadowing`
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossParams {
    /// Loss at the 1 m reference distance.
    pub reference_loss_db: f64,
    /// Distance exponent.
    pub exponent: f64,
    /// Attenuation per wall crossed.
    pub wall_loss_db: f64,
    /// Expected walls crossed per meter of path.
    pub walls_per_meter: f64,
    /// When false, [`sample_shadowing_db`] returns 0.
    pub shadowing_enabled: bool,
    /// Mean of the uniform shadowing term; draws cover (0, 2 * mean).
    pub shadowing_mean_db: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        PathLossParams {
            reference_loss_db: 54.12,
            exponent: 2.06067,
            wall_loss_db: 5.25,
            walls_per_meter: 0.1,
            shadowing_enabled: true,
            shadowing_mean_db: 5.0,
        }
    }
}

/// Path loss in dB at `distance_m`, with a pre-drawn shadowing term.
/// Distances below 1 m clamp to 1 m so the log term stays valid.
pub fn path_loss_db(distance_m: f64, params: &PathLossParams, shadowing_db: f64) -> Result<f64> {
    if !distance_m.is_finite() || distance_m < 0.0 {
        return Err(Error::invalid(format!(
            "distance must be finite and non-negative, got {distance_m}"
        )));
    }
    if !shadowing_db.is_finite() {
        return Err(Error::invalid("shadowing term must be finite".to_string()));
    }
    let d = distance_m.max(1.0);
    Ok(params.reference_loss_db
        + 10.0 * params.exponent * d.log10()
        + params.wall_loss_db * params.walls_per_meter * d
        + shadowing_db)
}

/// Draw one shadowing term. Uniform over (0, 2 * mean) so the mean matches
/// `shadowing_mean_db`; returns 0 when shadowing is disabled.
pub fn sample_shadowing_db<R: Rng + ?Sized>(params: &PathLossParams, rng: &mut R) -> f64 {
    if !params.shadowing_enabled {
        return 0.0;
    }
    rng.gen_range(0.0..2.0 * params.shadowing_mean_db)
}

// ---------------------------------------------------------------------------
// Frame timing
// ---------------------------------------------------------------------------

/// Channel access timing and frame framing constants.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingParams {
    /// Legacy (non-HT) preamble duration, microseconds.
    pub legacy_preamble_us: f64,
    /// HE single-user preamble duration, microseconds.
    pub he_su_preamble_us: f64,
    /// OFDM symbol duration for data frames, microseconds.
    pub symbol_us: f64,
    /// OFDM symbol duration for legacy control frames, microseconds.
    pub legacy_symbol_us: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
    /// Expected number of idle backoff slots preceding a transmission.
    pub mean_backoff_slots: f64,
    /// Idle slot duration, microseconds.
    pub slot_us: f64,
    /// Service field length, bits.
    pub service_field_bits: u32,
    /// MAC header length, bits.
    pub mac_header_bits: u32,
    /// Tail bits appended to each PPDU.
    pub tail_bits: u32,
    /// ACK frame body length, bits.
    pub ack_bits: u32,
    /// Default data frame payload length, bits.
    pub frame_bits: u32,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            legacy_preamble_us: 20.0,
            he_su_preamble_us: 52.0,
            symbol_us: 16.0,
            legacy_symbol_us: 4.0,
            sifs_us: 16.0,
            difs_us: 34.0,
            mean_backoff_slots: 7.5,
            slot_us: 9.0,
            service_field_bits: 32,
            mac_header_bits: 272,
            tail_bits: 6,
            ack_bits: 112,
            frame_bits: 12_000,
        }
    }
}

/// Time in seconds to deliver one data frame and receive its ACK:
/// data PPDU, SIFS, ACK, DIFS and one trailing idle slot. Symbol counts
/// round up, so low rates pay a quantization penalty.
pub fn frame_tx_time(
    timing: &TimingParams,
    frame_bits: u32,
    data_rate_bps: f64,
    legacy_rate_bps: f64,
) -> Result<f64> {
    if !(data_rate_bps.is_finite() && data_rate_bps > 0.0) {
        return Err(Error::invalid(format!(
            "data rate must be positive, got {data_rate_bps}"
        )));
    }
    if !(legacy_rate_bps.is_finite() && legacy_rate_bps > 0.0) {
        return Err(Error::invalid(format!(
            "legacy rate must be positive, got {legacy_rate_bps}"
        )));
    }
    let data_bits =
        (timing.service_field_bits + timing.mac_header_bits + frame_bits + timing.tail_bits) as f64;
    // bits per symbol = rate (bits/s) * symbol time (s); computed as
    // rate * symbol_us with the 1e6 folded into the numerator to keep the
    // integer products exact.
    let data_symbols = (data_bits * 1e6 / (data_rate_bps * timing.symbol_us)).ceil();
    let data_us = timing.he_su_preamble_us + data_symbols * timing.symbol_us;

    let ack_bits = (timing.service_field_bits + timing.ack_bits + timing.tail_bits) as f64;
    let ack_symbols = (ack_bits * 1e6 / (legacy_rate_bps * timing.legacy_symbol_us)).ceil();
    let ack_us = timing.legacy_preamble_us + ack_symbols * timing.legacy_symbol_us;

    let total_us = data_us + timing.sifs_us + ack_us + timing.difs_us + timing.slot_us;
    Ok(total_us / 1e6)
}

/// Channel fraction a flow of `load_bps` needs on a link with the given
/// rates: frames per second times the per-frame cost (expected backoff plus
/// one full frame exchange). Linear in load and not capped at 1.
pub fn required_airtime(
    timing: &TimingParams,
    load_bps: f64,
    frame_bits: u32,
    data_rate_bps: f64,
    legacy_rate_bps: f64,
) -> Result<f64> {
    if !(load_bps.is_finite() && load_bps >= 0.0) {
        return Err(Error::invalid(format!(
            "load must be finite and non-negative, got {load_bps}"
        )));
    }
    let tx_time = frame_tx_time(timing, frame_bits, data_rate_bps, legacy_rate_bps)?;
    let backoff_s = timing.mean_backoff_slots * timing.slot_us / 1e6;
    Ok(load_bps / frame_bits as f64 * (backoff_s + tx_time))
}

// ---------------------------------------------------------------------------
// Channel bandwidth
// ---------------------------------------------------------------------------

/// Channel width. Wider channels carry higher rates but the 5 GHz band
/// holds fewer of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bandwidth {
    Mhz20,
    Mhz40,
    Mhz80,
}

impl Bandwidth {
    pub fn mhz(self) -> u32 {
        match self {
            Bandwidth::Mhz20 => 20,
            Bandwidth::Mhz40 => 40,
            Bandwidth::Mhz80 => 80,
        }
    }

    pub fn from_mhz(mhz: u32) -> Result<Self> {
        match mhz {
            20 => Ok(Bandwidth::Mhz20),
            40 => Ok(Bandwidth::Mhz40),
            80 => Ok(Bandwidth::Mhz80),
            other => Err(Error::config(format!(
                "unsupported bandwidth {other} MHz (expected 20, 40 or 80)"
            ))),
        }
    }

    /// Non-overlapping 5 GHz channel numbers available at this width.
    pub fn channel_set(self) -> &'static [u16] {
        match self {
            Bandwidth::Mhz20 => &[36, 40, 44, 48, 52, 56, 60, 64],
            Bandwidth::Mhz40 => &[38, 46, 54, 62],
            Bandwidth::Mhz80 => &[42, 58],
        }
    }
}

// ---------------------------------------------------------------------------
// Rate tables
// ---------------------------------------------------------------------------

/// One row of an RSSI-to-rate mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEntry {
    /// Weakest signal at which this entry applies.
    pub min_rssi_dbm: f64,
    /// Data frame rate, bits per second.
    pub data_rate_bps: f64,
    /// Control/ACK rate, bits per second.
    pub legacy_rate_bps: f64,
}

/// RSSI-indexed rate table for one bandwidth, sorted by ascending threshold.
/// Selection picks the highest entry whose threshold the signal meets;
/// signals below the lowest threshold are out of range.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    entries: Vec<RateEntry>,
}

/// Builtin single-spatial-stream tables: (min RSSI dBm, data Mb/s).
/// Thresholds shift +3 dB per bandwidth doubling.
const BUILTIN_20: [(f64, f64); 12] = [
    (-82.0, 8.6),
    (-79.0, 17.2),
    (-77.0, 25.8),
    (-74.0, 34.4),
    (-70.0, 51.6),
    (-66.0, 68.8),
    (-65.0, 77.4),
    (-64.0, 86.0),
    (-59.0, 103.2),
    (-57.0, 114.7),
    (-54.0, 129.0),
    (-52.0, 143.4),
];
const BUILTIN_40: [(f64, f64); 12] = [
    (-79.0, 17.2),
    (-76.0, 34.4),
    (-74.0, 51.6),
    (-71.0, 68.8),
    (-67.0, 103.2),
    (-63.0, 137.6),
    (-62.0, 154.9),
    (-61.0, 172.1),
    (-56.0, 206.5),
    (-54.0, 229.4),
    (-51.0, 258.1),
    (-49.0, 286.8),
];
const BUILTIN_80: [(f64, f64); 12] = [
    (-76.0, 36.0),
    (-73.0, 72.1),
    (-71.0, 108.1),
    (-68.0, 144.1),
    (-64.0, 216.2),
    (-60.0, 288.2),
    (-59.0, 324.3),
    (-58.0, 360.3),
    (-53.0, 432.4),
    (-51.0, 480.4),
    (-48.0, 540.4),
    (-46.0, 600.5),
];

/// Legacy control rate by RSSI: 24 Mb/s from -70 dBm, 12 Mb/s from -77 dBm,
/// 6 Mb/s below.
fn legacy_rate_for(rssi_dbm: f64) -> f64 {
    if rssi_dbm >= -70.0 {
        24e6
    } else if rssi_dbm >= -77.0 {
        12e6
    } else {
        6e6
    }
}

impl RateTable {
    /// Validates and sorts the entries: the table must be non-empty, have
    /// strictly increasing thresholds, positive rates, and data rates that
    /// do not decrease as the signal improves.
    pub fn new(mut entries: Vec<RateEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::config("rate table has no entries".to_string()));
        }
        for e in &entries {
            if !e.min_rssi_dbm.is_finite() {
                return Err(Error::config("rate table threshold must be finite".to_string()));
            }
            if !(e.data_rate_bps.is_finite() && e.data_rate_bps > 0.0)
                || !(e.legacy_rate_bps.is_finite() && e.legacy_rate_bps > 0.0)
            {
                return Err(Error::config("rate table rates must be positive".to_string()));
            }
        }
        entries.sort_by(|a, b| a.min_rssi_dbm.partial_cmp(&b.min_rssi_dbm).unwrap());
        for pair in entries.windows(2) {
            if pair[0].min_rssi_dbm == pair[1].min_rssi_dbm {
                return Err(Error::config(format!(
                    "duplicate rate table threshold {} dBm",
                    pair[0].min_rssi_dbm
                )));
            }
            if pair[1].data_rate_bps < pair[0].data_rate_bps {
                return Err(Error::config(
                    "rate table data rates must not decrease with RSSI".to_string(),
                ));
            }
        }
        Ok(RateTable { entries })
    }

    /// Builtin table for one bandwidth.
    pub fn builtin(bandwidth: Bandwidth) -> RateTable {
        let rows: &[(f64, f64)] = match bandwidth {
            Bandwidth::Mhz20 => &BUILTIN_20,
            Bandwidth::Mhz40 => &BUILTIN_40,
            Bandwidth::Mhz80 => &BUILTIN_80,
        };
        let entries = rows
            .iter()
            .map(|&(rssi, mbps)| RateEntry {
                min_rssi_dbm: rssi,
                data_rate_bps: mbps * 1e6,
                legacy_rate_bps: legacy_rate_for(rssi),
            })
            .collect();
        RateTable::new(entries).expect("builtin table is valid")
    }

    pub fn entries(&self) -> &[RateEntry] {
        &self.entries
    }

    /// Weakest-signal entry; the fallback for out-of-range associations.
    pub fn lowest(&self) -> &RateEntry {
        &self.entries[0]
    }

    /// Highest entry whose threshold `rssi_dbm` meets, or `None` when the
    /// signal is below every threshold (out of range).
    pub fn select(&self, rssi_dbm: f64) -> Option<&RateEntry> {
        self.entries
            .iter()
            .rev()
            .find(|e| rssi_dbm >= e.min_rssi_dbm)
    }
}

/// Parse rate tables from CSV with columns
/// `min_rssi_dbm,data_rate_mbps,legacy_rate_mbps,bandwidth_mhz`.
/// Returns one table per bandwidth present in the file.
pub fn rate_tables_from_csv<R: std::io::Read>(
    reader: R,
) -> Result<std::collections::BTreeMap<u32, RateTable>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| Error::Parse(format!("rate table header: {e}")))?
        .clone();
    let expected = ["min_rssi_dbm", "data_rate_mbps", "legacy_rate_mbps", "bandwidth_mhz"];
    let mut index = [0usize; 4];
    for (slot, name) in expected.iter().enumerate() {
        index[slot] = headers
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| Error::Parse(format!("rate table is missing column `{name}`")))?;
    }
    let mut grouped: std::collections::BTreeMap<u32, Vec<RateEntry>> =
        std::collections::BTreeMap::new();
    for (line, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("rate table row {}: {e}", line + 2)))?;
        let field = |slot: usize| -> Result<f64> {
            record
                .get(index[slot])
                .ok_or_else(|| Error::Parse(format!("rate table row {} is short", line + 2)))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("rate table row {}: {e}", line + 2)))
        };
        let mhz = field(3)?;
        if mhz.fract() != 0.0 || mhz <= 0.0 {
            return Err(Error::Parse(format!(
                "rate table row {}: bandwidth_mhz must be a positive integer",
                line + 2
            )));
        }
        grouped.entry(mhz as u32).or_default().push(RateEntry {
            min_rssi_dbm: field(0)?,
            data_rate_bps: field(1)? * 1e6,
            legacy_rate_bps: field(2)? * 1e6,
        });
    }
    let mut tables = std::collections::BTreeMap::new();
    for (mhz, entries) in grouped {
        tables.insert(mhz, RateTable::new(entries)?);
    }
    if tables.is_empty() {
        return Err(Error::Parse("rate table file has no rows".to_string()));
    }
    Ok(tables)
}

/// Write tables in the CSV format accepted by [`rate_tables_from_csv`].
pub fn rate_tables_to_csv<W: std::io::Write>(
    tables: &std::collections::BTreeMap<u32, RateTable>,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["min_rssi_dbm", "data_rate_mbps", "legacy_rate_mbps", "bandwidth_mhz"])
        .map_err(|e| Error::Parse(e.to_string()))?;
    for (mhz, table) in tables {
        for e in table.entries() {
            w.write_record(&[
                e.min_rssi_dbm.to_string(),
                (e.data_rate_bps / 1e6).to_string(),
                (e.legacy_rate_bps / 1e6).to_string(),
                mhz.to_string(),
            ])
            .map_err(|e| Error::Parse(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}
