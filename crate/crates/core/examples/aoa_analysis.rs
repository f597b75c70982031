//! Strongest-path elevation AOA along a trajectory away from one gNB.
use uavcov::antenna::ArrayConfig;
use uavcov::channel::ChannelParams;
use uavcov::geometry::GnbKind;
use uavcov::network::{aoa_std_map, reference_site, strongest_path_aoa_sweep, ElementMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let site = reference_site(GnbKind::Standard, 3.5, -12.0, &ArrayConfig::gnb_default());
    let ch = ChannelParams::default();
    let distances: Vec<f64> = (0..=10).map(|i| 50.0 * i as f64).collect();
    let omni = strongest_path_aoa_sweep(&site, 60.0, &distances, 2000, ElementMode::Omnidirectional, &ch, 1)?;
    let dir = strongest_path_aoa_sweep(&site, 60.0, &distances, 2000, ElementMode::Directional, &ch, 1)?;
    println!("  dist   LOS    omni   3gpp");
    for (o, d) in omni.iter().zip(&dir) {
        let los = (60.0f64 - 3.5).atan2(o.distance_m).to_degrees();
        println!(
            "{:>6} {los:6.1} {:6.1} {:6.1}",
            o.distance_m,
            o.mean_elevation_deg.unwrap_or(f64::NAN),
            d.mean_elevation_deg.unwrap_or(f64::NAN)
        );
    }

    let altitudes = [30.0, 60.0, 90.0, 120.0];
    let grid = [100.0, 200.0, 300.0, 400.0];
    let map = aoa_std_map(&site, &altitudes, &grid, 2000, ElementMode::Directional, &ch, 1)?;
    println!("\nelevation AOA std (deg), rows by altitude");
    for (h, row) in altitudes.iter().zip(&map) {
        let cells: Vec<String> = row.iter().map(|s| format!("{s:5.1}")).collect();
        println!("{h:>5} m  {}", cells.join(" "));
    }
    Ok(())
}
