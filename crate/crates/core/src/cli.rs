//! Scenario files, batch execution and the CSV/JSON outputs.
//!
//! A scenario is a JSON document. Every key is optional and falls back to
//! the model defaults, so `{}` is a complete scenario. Keys carrying a
//! physical quantity are suffixed with their unit (`_m`, `_deg`, `_dbm`,
//! `_hz`, ...).

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antenna::{self, ArrayConfig, Element, ElementPattern3gpp, PatchPattern, PatternError};
use crate::channel::{self, ChannelParams, TraceError};
use crate::geometry::{self, DeploymentConfig, GnbKind, Universe};
use crate::link::{LinkBudget, PowerIteration};
use crate::network::{
    self, ChannelBackend, Counters, DropConfig, DropReport, ElementMode, NetworkError, RegimeBreakdown, UavRecord,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: at `{at}`: {msg}")]
    Parse { file: String, at: String, msg: String },
    #[error("{file}: unknown keys: {}", .keys.join(", "))]
    UnknownKeys { file: String, keys: Vec<String> },
    #[error("{field}: {msg}")]
    Invalid { field: String, msg: String },
    #[error("pattern file {}: {source}", .path.display())]
    Pattern {
        path: PathBuf,
        #[source]
        source: PatternError,
    },
    #[error("trace file {}: {source}", .path.display())]
    Trace {
        path: PathBuf,
        #[source]
        source: TraceError,
    },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("links.csv line {line}: {msg}")]
    Links { line: u64, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn invalid(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Invalid {
        field: field.to_string(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ElementSpec {
    #[serde(rename = "3gpp")]
    ThreeGpp(ElementPattern3gpp),
    Patch(PatchPattern),
    /// Gain table CSV; relative paths resolve against the scenario file.
    Tabulated { path: PathBuf },
    Isotropic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "half_wavelength")]
    pub element_spacing_wavelengths: f64,
    pub element: ElementSpec,
}

fn half_wavelength() -> f64 {
    0.5
}

impl ArraySpec {
    fn from_config(a: &ArrayConfig, fallback: ElementSpec) -> Self {
        let element = match &a.element {
            Element::ThreeGpp(p) => ElementSpec::ThreeGpp(*p),
            Element::Patch(p) => ElementSpec::Patch(*p),
            Element::Isotropic => ElementSpec::Isotropic,
            Element::Tabulated(_) => fallback,
        };
        Self {
            rows: a.rows,
            cols: a.cols,
            element_spacing_wavelengths: a.element_spacing_wavelengths,
            element,
        }
    }

    fn build(&self, field: &str, base: &Path) -> Result<ArrayConfig, CliError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(invalid(field, "rows and cols must be >= 1"));
        }
        if !(self.element_spacing_wavelengths > 0.0 && self.element_spacing_wavelengths.is_finite()) {
            return Err(invalid(&format!("{field}.element_spacing_wavelengths"), "must be positive"));
        }
        let element = match &self.element {
            ElementSpec::ThreeGpp(p) => {
                p.validate().map_err(|m| invalid(&format!("{field}.element"), m))?;
                Element::ThreeGpp(*p)
            }
            ElementSpec::Patch(p) => {
                p.validate().map_err(|m| invalid(&format!("{field}.element"), m))?;
                Element::Patch(*p)
            }
            ElementSpec::Tabulated { path } => {
                let full = resolve(base, path);
                let t = antenna::load_tabulated_pattern(&full).map_err(|source| CliError::Pattern { path: full, source })?;
                Element::Tabulated(Arc::new(t))
            }
            ElementSpec::Isotropic => Element::Isotropic,
        };
        Ok(ArrayConfig {
            rows: self.rows,
            cols: self.cols,
            element_spacing_wavelengths: self.element_spacing_wavelengths,
            element,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArraysSpec {
    pub gnb: ArraySpec,
    pub dedicated: ArraySpec,
    pub uav: ArraySpec,
}

impl Default for ArraysSpec {
    fn default() -> Self {
        let g = ArraySpec::from_config(&ArrayConfig::gnb_default(), ElementSpec::Isotropic);
        Self {
            dedicated: g.clone(),
            gnb: g,
            uav: ArraySpec::from_config(&ArrayConfig::uav_default(), ElementSpec::Isotropic),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub residual_tol: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let p = PowerIteration::default();
        Self {
            tol: p.tol,
            max_iter: p.max_iter,
            residual_tol: p.residual_tol,
        }
    }
}

/// Fixed-trajectory elevation AOA analyses around one gNB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AoaSweepSpec {
    pub altitude_m: f64,
    pub distances_m: Vec<f64>,
    pub realizations: usize,
    pub gnb_height_m: f64,
    pub std_altitudes_m: Vec<f64>,
    pub std_distances_m: Vec<f64>,
    pub std_realizations: usize,
    pub std_mode: ElementMode,
}

impl Default for AoaSweepSpec {
    fn default() -> Self {
        Self {
            altitude_m: 60.0,
            distances_m: (0..=50).map(|i| 10.0 * i as f64).collect(),
            realizations: 10_000,
            gnb_height_m: 3.5,
            std_altitudes_m: vec![30.0, 60.0, 90.0, 120.0],
            std_distances_m: (1..=10).map(|i| 50.0 * i as f64).collect(),
            std_realizations: 2000,
            std_mode: ElementMode::Directional,
        }
    }
}

/// The scenario document as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioFile {
    pub seed: u64,
    pub drops: usize,
    pub uav_count: usize,
    pub uav_altitudes_m: Vec<f64>,
    /// `"surrogate"` or `"trace:<path>"`.
    pub channel_backend: String,
    pub output_dir: PathBuf,
    pub universe: Universe,
    pub deployment: DeploymentConfig,
    pub channel: ChannelParams,
    pub budget: LinkBudget,
    pub arrays: ArraysSpec,
    pub solver: SolverSpec,
    /// One run per entry, `null` meaning standard sites only. Overrides
    /// `deployment.isd_dedicated_m`.
    pub isd_dedicated_sweep_m: Option<Vec<Option<f64>>>,
    /// Lower/upper regime thresholds; the 20th/80th SNR percentiles when absent.
    pub regime_thresholds_db: Option<(f64, f64)>,
    pub write_sites: bool,
    pub aoa_sweep: AoaSweepSpec,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        let d = DropConfig::default();
        Self {
            seed: d.seed,
            drops: d.drops,
            uav_count: d.uav_count,
            uav_altitudes_m: d.uav_altitudes_m,
            channel_backend: "surrogate".into(),
            output_dir: PathBuf::from("out"),
            universe: d.universe,
            deployment: d.deployment,
            channel: d.channel,
            budget: d.budget,
            arrays: ArraysSpec::default(),
            solver: SolverSpec::default(),
            isd_dedicated_sweep_m: None,
            regime_thresholds_db: None,
            write_sites: true,
            aoa_sweep: AoaSweepSpec::default(),
        }
    }
}

/// One simulation run inside a scenario.
#[derive(Debug, Clone)]
pub struct Variant {
    /// Output subdirectory; empty when the scenario has a single run.
    pub label: String,
    pub config: DropConfig,
}

/// A parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    /// Directory relative paths resolve against.
    pub base_dir: PathBuf,
    pub variants: Vec<Variant>,
    /// Unknown keys tolerated in lenient mode.
    pub warnings: Vec<String>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Parses a scenario document. `origin` names it in error messages.
pub fn parse_scenario_str(text: &str, origin: &str, base_dir: &Path, lenient: bool) -> Result<Scenario, CliError> {
    let mut track = serde_path_to_error::Track::new();
    let mut unknown = Vec::new();
    let mut jd = serde_json::Deserializer::from_str(text);
    let parsed: Result<ScenarioFile, _> = serde_ignored::deserialize(
        serde_path_to_error::Deserializer::new(&mut jd, &mut track),
        |p| unknown.push(p.to_string()),
    );
    let file = parsed.and_then(|f| jd.end().map(|_| f)).map_err(|e| CliError::Parse {
        file: origin.to_string(),
        at: track.path().to_string(),
        msg: e.to_string(),
    })?;
    if !unknown.is_empty() && !lenient {
        return Err(CliError::UnknownKeys {
            file: origin.to_string(),
            keys: unknown,
        });
    }
    let mut s = build_scenario(file, base_dir)?;
    s.warnings = unknown.into_iter().map(|k| format!("{origin}: ignoring unknown key `{k}`")).collect();
    Ok(s)
}

pub fn parse_scenario(path: &Path, lenient: bool) -> Result<Scenario, CliError> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(io_err(path))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scenario_str(&text, &path.display().to_string(), &base, lenient)
}

fn variant_label(isd_d: Option<f64>) -> String {
    match isd_d {
        None => "standard_only".into(),
        Some(d) => format!("isd_d_{d}"),
    }
}

/// Validates a document and expands it into runnable variants.
pub fn build_scenario(file: ScenarioFile, base_dir: &Path) -> Result<Scenario, CliError> {
    let backend = match file.channel_backend.as_str() {
        "surrogate" => ChannelBackend::Surrogate,
        s => match s.strip_prefix("trace:") {
            Some(p) if !p.is_empty() => {
                let full = resolve(base_dir, Path::new(p));
                if !full.is_file() {
                    return Err(invalid("channel_backend", format!("trace file {} does not exist", full.display())));
                }
                let t = channel::load_path_traces(&full, file.channel.carrier_ghz)
                    .map_err(|source| CliError::Trace { path: full, source })?;
                ChannelBackend::Trace(Arc::new(t))
            }
            _ => return Err(invalid("channel_backend", format!("expected `surrogate` or `trace:<path>`, got `{s}`"))),
        },
    };
    let s = &file.solver;
    if !(s.tol > 0.0 && s.residual_tol > 0.0) || s.max_iter == 0 {
        return Err(invalid("solver", "tol and residual_tol must be positive and max_iter >= 1"));
    }
    if let Some((lo, hi)) = file.regime_thresholds_db {
        if !(lo <= hi) {
            return Err(invalid("regime_thresholds_db", format!("thresholds out of order: {lo} > {hi}")));
        }
    }
    let base = DropConfig {
        seed: file.seed,
        uav_count: file.uav_count,
        uav_altitudes_m: file.uav_altitudes_m.clone(),
        drops: file.drops,
        universe: file.universe,
        deployment: file.deployment.clone(),
        channel: file.channel.clone(),
        budget: file.budget,
        gnb_array: file.arrays.gnb.build("arrays.gnb", base_dir)?,
        dedicated_array: file.arrays.dedicated.build("arrays.dedicated", base_dir)?,
        uav_array: file.arrays.uav.build("arrays.uav", base_dir)?,
        solver: PowerIteration {
            tol: s.tol,
            max_iter: s.max_iter,
            residual_tol: s.residual_tol,
        },
        backend,
    };
    let variants: Vec<Variant> = match &file.isd_dedicated_sweep_m {
        None => vec![Variant {
            label: String::new(),
            config: base.clone(),
        }],
        Some(list) if list.is_empty() => return Err(invalid("isd_dedicated_sweep_m", "must not be empty")),
        Some(list) => list
            .iter()
            .map(|&d| {
                let mut c = base.clone();
                c.deployment.isd_dedicated_m = d;
                Variant {
                    label: variant_label(d),
                    config: c,
                }
            })
            .collect(),
    };
    for v in &variants {
        v.config.validate().map_err(|e| match e {
            NetworkError::InvalidConfig(m) => invalid(if v.label.is_empty() { "scenario" } else { &v.label }, m),
            NetworkError::Geometry(g) => invalid("deployment", g.to_string()),
            other => CliError::Network(other),
        })?;
    }
    let aoa = &file.aoa_sweep;
    if aoa.realizations == 0 || aoa.std_realizations == 0 {
        return Err(invalid("aoa_sweep", "realizations must be >= 1"));
    }
    if aoa.std_altitudes_m.is_empty() || aoa.std_distances_m.is_empty() || aoa.distances_m.is_empty() {
        return Err(invalid("aoa_sweep", "grids must not be empty"));
    }
    Ok(Scenario {
        file,
        base_dir: base_dir.to_path_buf(),
        variants,
        warnings: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// Outputs

pub const LINKS_HEADER: [&str; 10] = [
    "altitude_m",
    "drop_index",
    "uav_id",
    "snr_db",
    "serving_gnb_id",
    "serving_sector_id",
    "serving_kind",
    "serving_state",
    "strongest_path_is_los",
    "serving_aoa_elevation_deg",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_links_csv<W: Write>(records: &[UavRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LINKS_HEADER)?;
    for r in records {
        w.write_record([
            r.altitude_m.to_string(),
            r.drop_index.to_string(),
            r.uav_id.to_string(),
            r.snr_db.to_string(),
            opt(r.serving_gnb_id),
            opt(r.serving_sector_id),
            opt(r.serving_kind.map(|k| k.as_str())),
            r.serving_state.as_str().to_string(),
            r.strongest_path_is_los.to_string(),
            opt(r.serving_aoa_elevation_deg),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `links.csv` back into records.
pub fn read_links_csv<R: Read>(input: R) -> Result<Vec<UavRecord>, CliError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(LINKS_HEADER.iter().copied()) {
        return Err(CliError::Links {
            line: 1,
            msg: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |col: &str, v: &str| CliError::Links {
            line,
            msg: format!("bad {col} `{v}`"),
        };
        let num = |i: usize| -> Result<f64, CliError> { row[i].parse::<f64>().map_err(|_| bad(LINKS_HEADER[i], &row[i])) };
        let int = |i: usize| -> Result<usize, CliError> { row[i].parse::<usize>().map_err(|_| bad(LINKS_HEADER[i], &row[i])) };
        let opt_int = |i: usize| -> Result<Option<usize>, CliError> { if row[i].is_empty() { Ok(None) } else { int(i).map(Some) } };
        let kind = match &row[6] {
            "" => None,
            "standard" => Some(GnbKind::Standard),
            "dedicated" => Some(GnbKind::Dedicated),
            v => return Err(bad("serving_kind", v)),
        };
        out.push(UavRecord {
            altitude_m: num(0)?,
            drop_index: int(1)?,
            uav_id: int(2)?,
            snr_db: num(3)?,
            serving_gnb_id: opt_int(4)?,
            serving_sector_id: opt_int(5)?,
            serving_kind: kind,
            serving_state: channel::LinkState::parse(&row[7]).ok_or_else(|| bad("serving_state", &row[7]))?,
            strongest_path_is_los: row[8].parse().map_err(|_| bad("strongest_path_is_los", &row[8]))?,
            serving_aoa_elevation_deg: if row[9].is_empty() { None } else { Some(num(9)?) },
        });
    }
    Ok(out)
}

pub fn write_cdf_csv<W: Write>(cdf: &network::SnrCdf, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["snr_db", "cdf"])?;
    for (x, p) in &cdf.points {
        w.write_record([x.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub count: usize,
    pub nlos: f64,
    pub los_strongest_los: f64,
    pub los_strongest_nlos: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimesSummary {
    pub low_threshold_db: f64,
    pub high_threshold_db: f64,
    pub lower: RegimeSummary,
    pub middle: RegimeSummary,
    pub upper: RegimeSummary,
}

impl From<RegimeBreakdown> for RegimesSummary {
    fn from(b: RegimeBreakdown) -> Self {
        let c = |r: network::RegimeComposition| RegimeSummary {
            count: r.count,
            nlos: r.nlos,
            los_strongest_los: r.los_strongest_los,
            los_strongest_nlos: r.los_strongest_nlos,
        };
        Self {
            low_threshold_db: b.low_threshold_db,
            high_threshold_db: b.high_threshold_db,
            lower: c(b.lower),
            middle: c(b.middle),
            upper: c(b.upper),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltitudeSummary {
    pub altitude_m: f64,
    pub records: usize,
    pub covered: usize,
    pub outage_fraction: f64,
    /// Keys `p05`, `p25`, `p50`, `p75`, `p95`; absent when every UAV is in outage.
    pub snr_quantiles_db: BTreeMap<String, f64>,
    pub fraction_above_0_db: f64,
    pub nlos_serving_fraction: f64,
    pub dedicated_attach_fraction: f64,
    pub regimes: Option<RegimesSummary>,
}

/// Per-altitude aggregates, computed from records alone.
pub fn summarize_records(records: &[UavRecord], thresholds: Option<(f64, f64)>) -> Vec<AltitudeSummary> {
    let report = DropReport {
        records: records.to_vec(),
        counters: Counters::default(),
    };
    report
        .altitudes()
        .into_iter()
        .map(|h| {
            let rs = report.at_altitude(h);
            let cdf = network::snr_cdf(&rs);
            let regimes = thresholds
                .or_else(|| network::default_regime_thresholds(&rs))
                .and_then(|(lo, hi)| network::regime_breakdown(&rs, lo, hi).ok())
                .map(RegimesSummary::from);
            AltitudeSummary {
                altitude_m: h,
                records: rs.len(),
                covered: cdf.covered,
                outage_fraction: cdf.outage_fraction,
                snr_quantiles_db: cdf
                    .quantiles
                    .iter()
                    .map(|(p, q)| (format!("p{:02}", (p * 100.0).round() as u32), *q))
                    .collect(),
                fraction_above_0_db: network::coverage_fraction(&rs, 0.0),
                nlos_serving_fraction: network::nlos_serving_fraction(&rs),
                dedicated_attach_fraction: network::dedicated_attach_fraction(&rs),
                regimes,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub generated_at_unix_s: u64,
    pub seed: u64,
    pub variant: String,
    pub noise_power_dbm: f64,
    pub altitudes: Vec<AltitudeSummary>,
    pub counters: Counters,
    /// Effective scenario, re-runnable as a scenario file.
    pub config: ScenarioFile,
}

/// Overrides applied on top of the scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct VariantOutput {
    pub label: String,
    pub dir: PathBuf,
    pub report: DropReport,
    pub summary: Summary,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn cdf_file_name(altitude_m: f64) -> String {
    format!("cdf_{altitude_m}.csv")
}

/// Runs every variant and writes its files. Returns what was written.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<VariantOutput>, CliError> {
    let root = match &opts.out_dir {
        Some(d) => d.clone(),
        None => resolve(&scenario.base_dir, &scenario.file.output_dir),
    };
    let mut echo = scenario.file.clone();
    if let Some(s) = opts.seed {
        echo.seed = s;
    }
    let mut outputs = Vec::new();
    for v in &scenario.variants {
        let mut cfg = v.config.clone();
        cfg.seed = echo.seed;
        let dir = if v.label.is_empty() { root.clone() } else { root.join(&v.label) };
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let report = network::run_drops(&cfg, opts.threads)?;

        let path = dir.join("links.csv");
        write_links_csv(&report.records, create(&path)?)?;
        for h in report.altitudes() {
            let path = dir.join(cdf_file_name(h));
            write_cdf_csv(&network::snr_cdf(&report.at_altitude(h)), create(&path)?)?;
        }
        if scenario.file.write_sites {
            let h = cfg.uav_altitudes_m[0];
            let (sites, _) = network::deploy_drop(&cfg, h, 0)?;
            let path = dir.join("sites.csv");
            geometry::write_sites_csv(&sites, create(&path)?)?;
        }
        let mut config = echo.clone();
        if !v.label.is_empty() {
            config.deployment.isd_dedicated_m = cfg.deployment.isd_dedicated_m;
            config.isd_dedicated_sweep_m = None;
        }
        let summary = Summary {
            version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            seed: cfg.seed,
            variant: v.label.clone(),
            noise_power_dbm: cfg.budget.noise_power_dbm(),
            altitudes: summarize_records(&report.records, scenario.file.regime_thresholds_db),
            counters: report.counters,
            config,
        };
        let path = dir.join("summary.json");
        let mut w = create(&path)?;
        serde_json::to_writer_pretty(&mut w, &summary)?;
        writeln!(w).and_then(|_| w.flush()).map_err(io_err(&path))?;
        outputs.push(VariantOutput {
            label: v.label.clone(),
            dir,
            report,
            summary,
        });
    }
    Ok(outputs)
}

pub fn read_summary(path: &Path) -> Result<Summary, CliError> {
    let f = File::open(path).map_err(io_err(path))?;
    Ok(serde_json::from_reader(f)?)
}

/// Files written by [`run_aoa_sweep`].
#[derive(Debug, Clone)]
pub struct AoaOutput {
    pub sweep_csv: PathBuf,
    pub std_csv: PathBuf,
}

/// Strongest-path elevation AOA along a straight trajectory away from a
/// standard gNB, with omnidirectional and directional elements, plus the
/// standard-deviation map.
pub fn run_aoa_sweep(scenario: &Scenario, opts: &RunOptions) -> Result<AoaOutput, CliError> {
    let root = match &opts.out_dir {
        Some(d) => d.clone(),
        None => resolve(&scenario.base_dir, &scenario.file.output_dir),
    };
    fs::create_dir_all(&root).map_err(io_err(&root))?;
    let f = &scenario.file;
    let a = &f.aoa_sweep;
    let cfg = &scenario.variants[0].config;
    let seed = opts.seed.unwrap_or(f.seed);
    let site = network::reference_site(GnbKind::Standard, a.gnb_height_m, f.deployment.standard_downtilt_deg, &cfg.gnb_array);
    let run = |mode| network::strongest_path_aoa_sweep(&site, a.altitude_m, &a.distances_m, a.realizations, mode, &cfg.channel, seed);
    let omni = run(ElementMode::Omnidirectional)?;
    let directional = run(ElementMode::Directional)?;

    let sweep_csv = root.join("aoa_sweep.csv");
    let mut w = csv::Writer::from_writer(create(&sweep_csv)?);
    w.write_record(["distance_m", "geometric_elevation_deg", "omni_mean_elevation_deg", "directional_mean_elevation_deg", "samples"])?;
    for (o, d) in omni.iter().zip(&directional) {
        let geometric = (a.altitude_m - a.gnb_height_m).atan2(o.distance_m).to_degrees();
        w.write_record([
            o.distance_m.to_string(),
            geometric.to_string(),
            opt(o.mean_elevation_deg),
            opt(d.mean_elevation_deg),
            o.samples.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(&sweep_csv))?;

    let map = network::aoa_std_map(&site, &a.std_altitudes_m, &a.std_distances_m, a.std_realizations, a.std_mode, &cfg.channel, seed)?;
    let std_csv = root.join("aoa_std.csv");
    let mut w = csv::Writer::from_writer(create(&std_csv)?);
    w.write_record(["altitude_m", "distance_m", "std_elevation_deg"])?;
    for (h, row) in a.std_altitudes_m.iter().zip(&map) {
        for (d, s) in a.std_distances_m.iter().zip(row) {
            w.write_record([h.to_string(), d.to_string(), s.to_string()])?;
        }
    }
    w.flush().map_err(io_err(&std_csv))?;
    Ok(AoaOutput { sweep_csv, std_csv })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Scenario, CliError> {
        parse_scenario_str(text, "test.json", Path::new("."), false)
    }

    #[test]
    fn empty_document_gives_defaults() {
        let s = parse("{}").unwrap();
        let c = &s.variants[0].config;
        assert_eq!(c.channel.carrier_ghz, 28.0);
        assert_eq!(c.budget.bandwidth_hz, 400e6);
        assert_eq!(c.budget.tx_power_dbm, 23.0);
        assert_eq!(c.budget.noise_figure_db, 6.0);
        assert_eq!((c.gnb_array.rows, c.gnb_array.cols), (8, 8));
        assert_eq!((c.uav_array.rows, c.uav_array.cols), (4, 4));
        assert_eq!(c.deployment.standard_downtilt_deg, -12.0);
        assert_eq!(c.deployment.dedicated_uptilt_deg, 45.0);
        assert!(matches!(c.backend, ChannelBackend::Surrogate));
    }

    #[test]
    fn dedicated_denser_than_standard_is_rejected() {
        let e = parse(r#"{"deployment": {"isd_standard_m": 200, "isd_dedicated_m": 100}}"#).unwrap_err();
        assert!(e.to_string().contains("isd_dedicated_m"), "{e}");
    }

    #[test]
    fn unknown_keys() {
        let text = r#"{"deployment": {"isd_standrd_m": 100}}"#;
        let e = parse(text).unwrap_err();
        assert!(e.to_string().contains("deployment.isd_standrd_m"), "{e}");
        let s = parse_scenario_str(text, "t", Path::new("."), true).unwrap();
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn type_errors_name_the_path() {
        let e = parse(r#"{"budget": {"tx_power_dbm": "high"}}"#).unwrap_err();
        assert!(e.to_string().contains("budget.tx_power_dbm"), "{e}");
    }

    #[test]
    fn missing_trace_names_the_path() {
        let e = parse(r#"{"channel_backend": "trace:nowhere/links.csv"}"#).unwrap_err();
        assert!(e.to_string().contains("nowhere/links.csv"), "{e}");
        assert!(parse(r#"{"channel_backend": "magic"}"#).is_err());
    }

    #[test]
    fn sweep_expands_to_variants() {
        let s = parse(r#"{"isd_dedicated_sweep_m": [null, 200, 400, 800]}"#).unwrap();
        let labels: Vec<&str> = s.variants.iter().map(|v| v.label.as_str()).collect();
        assert_eq!(labels, ["standard_only", "isd_d_200", "isd_d_400", "isd_d_800"]);
        assert_eq!(s.variants[2].config.deployment.isd_dedicated_m, Some(400.0));
    }

    #[test]
    fn elements_parse() {
        let s = parse(r#"{"arrays": {"gnb": {"rows": 2, "cols": 2, "element": {"type": "isotropic"}},
                           "uav": {"rows": 1, "cols": 1, "element": {"type": "3gpp", "gain_max_dbi": 5}}}}"#)
        .unwrap();
        let c = &s.variants[0].config;
        assert_eq!(c.gnb_array.element, Element::Isotropic);
        assert_eq!(c.uav_array.element.max_gain_db(), 5.0);
    }

    #[test]
    fn links_round_trip() {
        let recs = vec![
            UavRecord {
                altitude_m: 30.0,
                drop_index: 0,
                uav_id: 1,
                snr_db: 12.345678901234567,
                serving_gnb_id: Some(3),
                serving_sector_id: Some(2),
                serving_kind: Some(GnbKind::Dedicated),
                serving_state: channel::LinkState::Los,
                strongest_path_is_los: true,
                serving_aoa_elevation_deg: Some(-3.25),
            },
            UavRecord {
                altitude_m: 30.0,
                drop_index: 0,
                uav_id: 2,
                snr_db: f64::NEG_INFINITY,
                serving_gnb_id: None,
                serving_sector_id: None,
                serving_kind: None,
                serving_state: channel::LinkState::Outage,
                strongest_path_is_los: false,
                serving_aoa_elevation_deg: None,
            },
        ];
        let mut buf = Vec::new();
        write_links_csv(&recs, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("-inf"));
        assert_eq!(read_links_csv(&buf[..]).unwrap(), recs);
    }
}
