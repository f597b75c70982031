use std::fs;
use std::path::Path;

use serde_json::Value;
use uavcov::cli::{self, RunOptions};

const SMALL: &str = r#"{
    "seed": 3,
    "drops": 1,
    "uav_count": 20,
    "uav_altitudes_m": [60],
    "universe": { "side_length_m": 500 }
}"#;

fn run(text: &str, out: &Path) -> Vec<cli::VariantOutput> {
    let scen = cli::parse_scenario_str(text, "test", Path::new("."), false).unwrap();
    let opts = RunOptions {
        out_dir: Some(out.to_path_buf()),
        ..Default::default()
    };
    cli::run_scenario(&scen, &opts).unwrap()
}

fn without_timestamp(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("generated_at_unix_s");
    v
}

#[test]
fn minimal_scenario_writes_every_file() {
    let dir = tempfile::tempdir().unwrap();
    run(SMALL, dir.path());
    for f in ["links.csv", "cdf_60.csv", "summary.json", "sites.csv"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let s = without_timestamp(&dir.path().join("summary.json"));
    let q = &s["altitudes"][0]["snr_quantiles_db"];
    for k in ["p05", "p25", "p50", "p75", "p95"] {
        assert!(q[k].is_number(), "quantile {k} missing");
    }
    for k in ["version", "seed", "config", "counters", "noise_power_dbm"] {
        assert!(s.get(k).is_some(), "{k} missing");
    }
    let links = fs::read_to_string(dir.path().join("links.csv")).unwrap();
    assert_eq!(links.lines().count(), 21);
}

#[test]
fn rerun_is_identical_except_the_timestamp() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(SMALL, a.path());
    run(SMALL, b.path());
    assert_eq!(without_timestamp(&a.path().join("summary.json")), without_timestamp(&b.path().join("summary.json")));
    assert_eq!(fs::read(a.path().join("links.csv")).unwrap(), fs::read(b.path().join("links.csv")).unwrap());
}

#[test]
fn links_csv_reproduces_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"seed": 8, "drops": 2, "uav_count": 30, "uav_altitudes_m": [30, 120],
                   "deployment": {"isd_dedicated_m": 400}}"#;
    run(text, dir.path());
    let summary = cli::read_summary(&dir.path().join("summary.json")).unwrap();
    let records = cli::read_links_csv(fs::File::open(dir.path().join("links.csv")).unwrap()).unwrap();
    assert_eq!(cli::summarize_records(&records, summary.config.regime_thresholds_db), summary.altitudes);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(SMALL, a.path());
    let summary = cli::read_summary(&a.path().join("summary.json")).unwrap();
    let echoed = serde_json::to_string(&summary.config).unwrap();
    run(&echoed, b.path());
    assert_eq!(fs::read(a.path().join("links.csv")).unwrap(), fs::read(b.path().join("links.csv")).unwrap());
}

#[test]
fn sweep_matrix_writes_one_directory_per_variant() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"drops": 1, "uav_count": 10, "uav_altitudes_m": [30, 60, 120],
                   "universe": {"side_length_m": 800},
                   "isd_dedicated_sweep_m": [null, 200, 400, 800]}"#;
    let outs = run(text, dir.path());
    assert_eq!(outs.len(), 4);
    let mut cdfs = 0;
    for o in &outs {
        for h in ["30", "60", "120"] {
            assert!(o.dir.join(format!("cdf_{h}.csv")).is_file());
            cdfs += 1;
        }
    }
    assert!(cdfs >= 9);
    let s = cli::read_summary(&dir.path().join("isd_d_400/summary.json")).unwrap();
    assert_eq!(s.config.deployment.isd_dedicated_m, Some(400.0));
}

#[test]
fn scenario_file_on_disk_with_relative_trace() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("traces.csv"),
        "link_id,gnb_id,uav_id,state,path_idx,gain_db,delay_ns,aoa_el_deg,aoa_az_deg,aod_el_deg,aod_az_deg\n\
         a,0,0,los,0,-140,5000,10,20,-10,200\n",
    )
    .unwrap();
    let scen = dir.path().join("s.json");
    fs::write(&scen, r#"{"channel_backend": "trace:traces.csv", "drops": 1, "uav_count": 2, "uav_altitudes_m": [60],
                         "universe": {"side_length_m": 300}}"#)
    .unwrap();
    let s = cli::parse_scenario(&scen, false).unwrap();
    let out = cli::run_scenario(
        &s,
        &RunOptions {
            out_dir: Some(dir.path().join("out")),
            ..Default::default()
        },
    )
    .unwrap();
    let c = out[0].summary.counters;
    assert!(c.missing_trace_links > 0);
    assert!(out[0].report.records.iter().any(|r| r.uav_id == 0 && !r.is_outage()));
}

#[test]
fn aoa_sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"aoa_sweep": {"distances_m": [0, 100, 200], "realizations": 50,
                   "std_altitudes_m": [30, 120], "std_distances_m": [100], "std_realizations": 50}}"#;
    let scen = cli::parse_scenario_str(text, "t", Path::new("."), false).unwrap();
    let o = cli::run_aoa_sweep(
        &scen,
        &RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(fs::read_to_string(o.sweep_csv).unwrap().lines().count(), 4);
    assert_eq!(fs::read_to_string(o.std_csv).unwrap().lines().count(), 3);
}
