//! Propagation and link budget in isolation: path loss over distance, the
//! resulting signal strength, the rate the link gets, the time one frame
//! exchange takes, and the channel fraction a 4 Mb/s flow costs.
//!
//! Run with `cargo run --release --example path_loss_and_rates`.

use apsim::phy::{
    frame_tx_time, path_loss_db, required_airtime, Bandwidth, PathLossParams, RateTable,
    TimingParams,
};

fn main() -> apsim::Result<()> {
    let path = PathLossParams::default();
    let timing = TimingParams::default();
    let tx_power_dbm = 20.0;
    let load_bps = 4e6;

    println!(
        "path loss: {} dB at 1 m, exponent {}, {} dB per wall at {} walls/m",
        path.reference_loss_db, path.exponent, path.wall_loss_db, path.walls_per_meter
    );
    println!(
        "shadowing adds a uniform draw on (0, {} dB) per link; shown here without it",
        2.0 * path.shadowing_mean_db
    );
    println!();

    let table = RateTable::builtin(Bandwidth::Mhz20);
    println!("20 MHz link at {tx_power_dbm} dBm transmit power, offering {} Mb/s:", load_bps / 1e6);
    println!(
        "{:>8} {:>10} {:>11} {:>12} {:>13} {:>9}",
        "dist (m)", "loss (dB)", "rssi (dBm)", "rate (Mb/s)", "tx time (ms)", "airtime"
    );
    for distance in [1.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 55.0, 70.0] {
        let loss = path_loss_db(distance, &path, 0.0)?;
        let rssi = tx_power_dbm - loss;
        match table.select(rssi) {
            Some(entry) => {
                let tx_time = frame_tx_time(
                    &timing,
                    timing.frame_bits,
                    entry.data_rate_bps,
                    entry.legacy_rate_bps,
                )?;
                let airtime = required_airtime(
                    &timing,
                    load_bps,
                    timing.frame_bits,
                    entry.data_rate_bps,
                    entry.legacy_rate_bps,
                )?;
                println!(
                    "{distance:>8.0} {loss:>10.2} {rssi:>11.2} {:>12.1} {:>13.4} {airtime:>9.4}",
                    entry.data_rate_bps / 1e6,
                    tx_time * 1e3,
                );
            }
            None => {
                println!("{distance:>8.0} {loss:>10.2} {rssi:>11.2} {:>12} {:>13} {:>9}",
                    "-", "-", "out of range");
            }
        }
    }
    println!();

    // an AP can spend at most its whole channel: airtime 1.0 marks the load
    // one link can carry alone, and the sum over co-channel STAs is the
    // occupancy the engine normalizes throughput by
    println!("top rate and reach per channel width:");
    for bandwidth in [Bandwidth::Mhz20, Bandwidth::Mhz40, Bandwidth::Mhz80] {
        let table = RateTable::builtin(bandwidth);
        let top = table.entries().last().expect("builtin tables are non-empty");
        let floor = table.lowest();
        println!(
            "  {:>2} MHz: up to {:>5.1} Mb/s (needs {:>3.0} dBm), usable down to {:>3.0} dBm at {:>4.1} Mb/s",
            bandwidth.mhz(),
            top.data_rate_bps / 1e6,
            top.min_rssi_dbm,
            floor.min_rssi_dbm,
            floor.data_rate_bps / 1e6,
        );
    }
    Ok(())
}
