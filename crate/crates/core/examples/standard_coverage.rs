//! SNR distribution of UAVs served by a standard deployment.
//!
//! `cargo run --release --example standard_coverage -- [drops] [isd_m]`
use uavcov::network::{self, DropConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let drops = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10);
    let isd = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200.0);
    let mut cfg = DropConfig {
        drops,
        ..Default::default()
    };
    cfg.deployment.isd_standard_m = isd;
    let report = network::run_drops(&cfg, None)?;
    println!("ISD {isd} m, {drops} drops, {} UAVs per drop", cfg.uav_count);
    for h in report.altitudes() {
        let rs = report.at_altitude(h);
        let cdf = network::snr_cdf(&rs);
        let q: Vec<String> = cdf.quantiles.iter().map(|(p, v)| format!("p{:.0}={v:.1}", p * 100.0)).collect();
        println!(
            "{h:>5} m  P(SNR>0)={:.3}  P(SNR>15)={:.3}  NLOS serving {:.3}  outage {:.3}  {}",
            network::coverage_fraction(&rs, 0.0),
            network::coverage_fraction(&rs, 15.0),
            network::nlos_serving_fraction(&rs),
            cdf.outage_fraction,
            q.join(" ")
        );
        if let Some((lo, hi)) = network::default_regime_thresholds(&rs) {
            let b = network::regime_breakdown(&rs, lo, hi)?;
            println!(
                "         below {lo:.1} dB: {:.0}% NLOS   above {hi:.1} dB: {:.0}% LOS with an NLOS strongest path",
                100.0 * b.lower.nlos,
                100.0 * b.upper.los_strongest_nlos
            );
        }
    }
    println!("counters: {:?}", report.counters);
    Ok(())
}
