//! Running a scenario document end to end and reading its outputs back.
use std::path::Path;

use uavcov::cli::{self, RunOptions};

const SCENARIO: &str = r#"{
    "seed": 42,
    "drops": 2,
    "uav_count": 50,
    "uav_altitudes_m": [30, 120],
    "deployment": { "isd_standard_m": 200 },
    "isd_dedicated_sweep_m": [null, 400],
    "budget": { "tx_power_dbm": 23, "bandwidth_hz": 400e6 }
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("uavcov_scenario_example");
    let scenario = cli::parse_scenario_str(SCENARIO, "inline", Path::new("."), false)?;
    let opts = RunOptions {
        out_dir: Some(out.clone()),
        ..Default::default()
    };
    for v in cli::run_scenario(&scenario, &opts)? {
        println!("{}", v.dir.display());
        for a in &v.summary.altitudes {
            println!("  {:>5} m  median {:.1} dB  attach {:.3}", a.altitude_m, a.snr_quantiles_db["p50"], a.dedicated_attach_fraction);
        }
        let records = cli::read_links_csv(std::fs::File::open(v.dir.join("links.csv"))?)?;
        let again = cli::summarize_records(&records, None);
        println!("  links.csv reproduces the summary: {}", again == v.summary.altitudes);
    }
    Ok(())
}
