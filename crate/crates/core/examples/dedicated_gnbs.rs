//! Adding uptilted rooftop gNBs to a standard deployment.
//!
//! `cargo run --release --example dedicated_gnbs -- [drops]`
use uavcov::geometry::GnbKind;
use uavcov::network::{self, DropConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let drops = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5);
    let base = DropConfig {
        drops,
        ..Default::default()
    };
    let standard = network::run_drops(&base, None)?;
    println!("ISD_d   alt   attach  NLOS   p5 gain");
    for isd_d in [200.0, 400.0, 800.0] {
        let mut cfg = base.clone();
        cfg.deployment.isd_dedicated_m = Some(isd_d);
        let r = network::run_drops(&cfg, None)?;
        for h in r.altitudes() {
            let (with, without) = (r.at_altitude(h), standard.at_altitude(h));
            let gain = network::snr_quantile(&with, 0.05).zip(network::snr_quantile(&without, 0.05)).map(|(a, b)| a - b);
            println!(
                "{isd_d:>5} {h:>5}   {:.3}  {:.3}  {:+.2} dB",
                network::dedicated_attach_fraction(&with),
                network::nlos_serving_fraction(&with),
                gain.unwrap_or(f64::NAN)
            );
        }
    }

    // Same channels, association with and without the dedicated candidates.
    let mut cfg = base.clone();
    cfg.deployment.isd_dedicated_m = Some(200.0);
    let real = network::realize_drop(&cfg, 60.0, 0)?;
    let only_standard = network::associate(&real, |k| k == GnbKind::Standard);
    let all = network::associate(&real, |_| true);
    let improved = only_standard.iter().zip(&all).filter(|(a, b)| b.snr_db > a.snr_db).count();
    println!("\nreplay at 60 m: {improved} of {} UAVs gain from the dedicated sites", all.len());
    Ok(())
}
