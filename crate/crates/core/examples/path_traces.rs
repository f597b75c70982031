//! Writing channel samples as a path trace and driving a drop with it.
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uavcov::channel::{load_path_traces, sample_channel, write_path_traces, LinkGeometry, LinkKey};
use uavcov::network::{self, ChannelBackend, DropConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = DropConfig {
        uav_count: 20,
        uav_altitudes_m: vec![60.0],
        ..Default::default()
    };
    let (sites, uavs) = network::deploy_drop(&cfg, 60.0, 0)?;

    // Stand-in for an external generator: sample every link once and export it.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut rows = Vec::new();
    for s in &sites {
        for u in &uavs {
            let geom = LinkGeometry::between(s.position, u.position, &cfg.universe)?;
            let key = LinkKey { gnb_id: s.id, uav_id: u.id };
            rows.push((format!("g{}u{}", s.id, u.id), key, sample_channel(&geom, s.kind, &cfg.channel, &mut rng)));
        }
    }
    let dir = std::env::temp_dir().join("uavcov_path_traces");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("traces.csv");
    write_path_traces(rows.iter().map(|(id, k, s)| (id.as_str(), *k, s)), std::fs::File::create(&path)?)?;

    let traces = load_path_traces(&path, cfg.channel.carrier_ghz)?;
    println!("loaded {} links from {}", traces.len(), path.display());
    cfg.backend = ChannelBackend::Trace(Arc::new(traces));
    let out = network::run_drop(&cfg, 60.0, 0)?;
    let q = network::snr_quantile(&out.records, 0.5).unwrap_or(f64::NAN);
    println!("median SNR {q:.1} dB, {} links missing from the trace", out.counters.missing_trace_links);
    Ok(())
}
