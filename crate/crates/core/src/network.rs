//! Monte Carlo drops, max-SNR association and coverage statistics.
//!
//! Every drop draws its randomness from a seed derived from
//! `(seed, altitude, drop_index)` alone, split into independent streams for
//! the standard deployment, the dedicated deployment, the UAVs and each
//! UAV×site channel. Results are therefore independent of how drops are
//! scheduled across threads, and adding dedicated sites leaves every
//! standard-site realization untouched.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::antenna::{ArrayConfig, Orientation};
use crate::channel::{self, ChannelParams, ChannelSample, LinkGeometry, LinkKey, LinkState, PathTraces};
use crate::geometry::{self, DeploymentConfig, GeometryError, GnbKind, Point3, Site, UavNode, Universe};
use crate::link::{evaluate_link, ArrayMount, LinkBudget, LinkError, LinkResult, PowerIteration};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("drop {drop_index} at {altitude_m} m: {source}")]
    Deployment {
        altitude_m: f64,
        drop_index: usize,
        #[source]
        source: GeometryError,
    },
    #[error("drop {drop_index} at {altitude_m} m, gNB {gnb_id} / UAV {uav_id}: {source}")]
    Link {
        altitude_m: f64,
        drop_index: usize,
        gnb_id: usize,
        uav_id: usize,
        #[source]
        source: LinkError,
    },
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Where channel samples come from.
#[derive(Debug, Clone, Default)]
pub enum ChannelBackend {
    #[default]
    Surrogate,
    /// Links absent from the trace are treated as outage.
    Trace(Arc<PathTraces>),
}

#[derive(Debug, Clone)]
pub struct DropConfig {
    pub seed: u64,
    pub uav_count: usize,
    pub uav_altitudes_m: Vec<f64>,
    pub drops: usize,
    pub universe: Universe,
    pub deployment: DeploymentConfig,
    pub channel: ChannelParams,
    pub budget: LinkBudget,
    pub gnb_array: ArrayConfig,
    pub dedicated_array: ArrayConfig,
    pub uav_array: ArrayConfig,
    pub solver: PowerIteration,
    pub backend: ChannelBackend,
}

impl Default for DropConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            uav_count: 100,
            uav_altitudes_m: vec![30.0, 60.0, 120.0],
            drops: 1,
            universe: Universe::default(),
            deployment: DeploymentConfig::default(),
            channel: ChannelParams::default(),
            budget: LinkBudget::default(),
            gnb_array: ArrayConfig::gnb_default(),
            dedicated_array: ArrayConfig::gnb_default(),
            uav_array: ArrayConfig::uav_default(),
            solver: PowerIteration::default(),
            backend: ChannelBackend::Surrogate,
        }
    }
}

impl DropConfig {
    pub fn validate(&self) -> Result<(), NetworkError> {
        let bad = |m: String| Err(NetworkError::InvalidConfig(m));
        if self.drops == 0 {
            return bad("drops must be >= 1".into());
        }
        if self.uav_count == 0 {
            return bad("uav_count must be >= 1".into());
        }
        if self.uav_altitudes_m.is_empty() {
            return bad("uav_altitudes_m must not be empty".into());
        }
        if let Some(h) = self.uav_altitudes_m.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return bad(format!("UAV altitudes must be positive, got {h}"));
        }
        self.universe.validate()?;
        self.deployment.validate()?;
        self.channel.validate().map_err(|e| NetworkError::InvalidConfig(format!("channel.{e}")))?;
        self.budget.validate().map_err(|e| NetworkError::InvalidConfig(format!("budget.{e}")))?;
        for (name, a) in [("gnb_array", &self.gnb_array), ("dedicated_array", &self.dedicated_array), ("uav_array", &self.uav_array)] {
            if a.num_elements() == 0 {
                return bad(format!("{name} needs at least one element"));
            }
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

const STREAM_STANDARD: u64 = 1;
const STREAM_DEDICATED: u64 = 2;
const STREAM_UAVS: u64 = 3;
const STREAM_CHANNEL: u64 = 4;

/// Seed of one drop, a pure function of its coordinates.
pub fn drop_seed(seed: u64, altitude_m: f64, drop_index: usize) -> u64 {
    mix(mix(seed, altitude_m.to_bits()), drop_index as u64)
}

fn stream(drop_seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(drop_seed, tag))
}

fn kind_tag(kind: GnbKind) -> u64 {
    match kind {
        GnbKind::Standard => STREAM_STANDARD,
        GnbKind::Dedicated => STREAM_DEDICATED,
    }
}

fn link_stream(drop_seed: u64, kind: GnbKind, local_index: usize, uav_id: usize) -> ChaCha8Rng {
    let s = mix(mix(mix(drop_seed, STREAM_CHANNEL), kind_tag(kind)), local_index as u64);
    ChaCha8Rng::seed_from_u64(mix(s, uav_id as u64))
}

/// Standard sites take ids `0..n_s`, dedicated sites follow.
pub fn deploy_drop(cfg: &DropConfig, altitude_m: f64, drop_index: usize) -> Result<(Vec<Site>, Vec<UavNode>), NetworkError> {
    let ctx = |source| NetworkError::Deployment {
        altitude_m,
        drop_index,
        source,
    };
    let ds = drop_seed(cfg.seed, altitude_m, drop_index);
    let u = &cfg.universe;
    let mut sites = geometry::deploy_gnbs(
        &cfg.deployment,
        GnbKind::Standard,
        &cfg.gnb_array,
        u,
        &mut stream(ds, STREAM_STANDARD),
    )
    .map_err(ctx)?;
    if cfg.deployment.site_count(GnbKind::Dedicated, u).is_some() {
        let offset = sites.len();
        let dedicated = geometry::deploy_gnbs(
            &cfg.deployment,
            GnbKind::Dedicated,
            &cfg.dedicated_array,
            u,
            &mut stream(ds, STREAM_DEDICATED),
        )
        .map_err(ctx)?;
        sites.extend(dedicated.into_iter().map(|mut s| {
            s.id += offset;
            s
        }));
    }
    let uavs = geometry::deploy_uavs(
        cfg.uav_count,
        altitude_m,
        &cfg.deployment,
        &sites,
        &cfg.uav_array,
        u,
        &mut stream(ds, STREAM_UAVS),
    )
    .map_err(ctx)?;
    Ok((sites, uavs))
}

/// One evaluated UAV×sector link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub gnb_id: usize,
    pub sector_id: usize,
    pub kind: GnbKind,
    pub result: LinkResult,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Counters {
    pub links_evaluated: u64,
    pub clamped_paths: u64,
    pub unconverged_links: u64,
    pub missing_trace_links: u64,
}

impl Counters {
    pub fn add(&mut self, o: &Counters) {
        self.links_evaluated += o.links_evaluated;
        self.clamped_paths += o.clamped_paths;
        self.unconverged_links += o.unconverged_links;
        self.missing_trace_links += o.missing_trace_links;
    }
}

/// Every candidate link of one drop, kept so association can be replayed
/// over subsets of sites.
#[derive(Debug, Clone)]
pub struct DropRealization {
    pub altitude_m: f64,
    pub drop_index: usize,
    pub sites: Vec<Site>,
    pub uavs: Vec<UavNode>,
    /// Per UAV, in `(gnb_id, sector_id)` order.
    pub candidates: Vec<Vec<Candidate>>,
    pub counters: Counters,
}

fn channel_for(
    cfg: &DropConfig,
    site: &Site,
    local_index: usize,
    uav: &UavNode,
    ds: u64,
    counters: &mut Counters,
) -> Result<ChannelSample, GeometryError> {
    match &cfg.backend {
        ChannelBackend::Surrogate => {
            let geom = LinkGeometry::between(site.position, uav.position, &cfg.universe)?;
            let mut rng = link_stream(ds, site.kind, local_index, uav.id);
            let s = channel::sample_channel(&geom, site.kind, &cfg.channel, &mut rng);
            counters.clamped_paths += s.clamped_paths as u64;
            Ok(s)
        }
        ChannelBackend::Trace(t) => match t.get(LinkKey {
            gnb_id: site.id,
            uav_id: uav.id,
        }) {
            Some(l) => Ok(l.sample.clone()),
            None => {
                counters.missing_trace_links += 1;
                Ok(ChannelSample::outage())
            }
        },
    }
}

/// Deploys one drop and evaluates every UAV×sector link.
pub fn realize_drop(cfg: &DropConfig, altitude_m: f64, drop_index: usize) -> Result<DropRealization, NetworkError> {
    let (sites, uavs) = deploy_drop(cfg, altitude_m, drop_index)?;
    let ds = drop_seed(cfg.seed, altitude_m, drop_index);
    let first_dedicated = sites.iter().position(|s| s.kind == GnbKind::Dedicated).unwrap_or(sites.len());
    let mut counters = Counters::default();
    let mut candidates = Vec::with_capacity(uavs.len());
    for uav in &uavs {
        let tx = ArrayMount::new(&uav.array, uav.orientation);
        let mut list = Vec::with_capacity(sites.len() * 3);
        for site in &sites {
            let local = if site.kind == GnbKind::Dedicated { site.id - first_dedicated } else { site.id };
            let sample = channel_for(cfg, site, local, uav, ds, &mut counters).map_err(|source| NetworkError::Deployment {
                altitude_m,
                drop_index,
                source,
            })?;
            for (sector_id, sector) in site.sectors.iter().enumerate() {
                let rx = ArrayMount::new(&sector.array, sector.orientation());
                let result = evaluate_link(&sample, tx, rx, &cfg.budget, &cfg.solver).map_err(|source| NetworkError::Link {
                    altitude_m,
                    drop_index,
                    gnb_id: site.id,
                    uav_id: uav.id,
                    source,
                })?;
                counters.links_evaluated += 1;
                if !result.eigen_converged {
                    counters.unconverged_links += 1;
                }
                list.push(Candidate {
                    gnb_id: site.id,
                    sector_id,
                    kind: site.kind,
                    result,
                });
            }
        }
        candidates.push(list);
    }
    Ok(DropRealization {
        altitude_m,
        drop_index,
        sites,
        uavs,
        candidates,
        counters,
    })
}

/// Outcome for one UAV in one drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavRecord {
    pub altitude_m: f64,
    pub drop_index: usize,
    pub uav_id: usize,
    /// `-inf` when every candidate is in outage.
    pub snr_db: f64,
    pub serving_gnb_id: Option<usize>,
    pub serving_sector_id: Option<usize>,
    pub serving_kind: Option<GnbKind>,
    pub serving_state: LinkState,
    pub strongest_path_is_los: bool,
    pub serving_aoa_elevation_deg: Option<f64>,
}

impl UavRecord {
    pub fn is_outage(&self) -> bool {
        self.serving_gnb_id.is_none()
    }
}

/// Max-SNR serving sector among candidates passing `allow`. Ties keep the
/// lowest `(gnb_id, sector_id)`.
pub fn associate_uav<'a>(candidates: &'a [Candidate], allow: impl Fn(&Candidate) -> bool) -> Option<&'a Candidate> {
    let mut best: Option<&Candidate> = None;
    for c in candidates.iter().filter(|c| allow(c)) {
        if c.result.is_outage() {
            continue;
        }
        if best.is_none_or(|b| c.result.snr_db > b.result.snr_db) {
            best = Some(c);
        }
    }
    best
}

/// Associates every UAV of a realization, considering only sites of kinds
/// accepted by `allow`.
pub fn associate(r: &DropRealization, allow: impl Fn(GnbKind) -> bool) -> Vec<UavRecord> {
    r.uavs
        .iter()
        .zip(&r.candidates)
        .map(|(uav, cands)| {
            let serving = associate_uav(cands, |c| allow(c.kind));
            debug_assert!(serving.is_none_or(|s| cands
                .iter()
                .filter(|c| allow(c.kind))
                .all(|c| c.result.snr_db <= s.result.snr_db)));
            match serving {
                Some(c) => UavRecord {
                    altitude_m: r.altitude_m,
                    drop_index: r.drop_index,
                    uav_id: uav.id,
                    snr_db: c.result.snr_db,
                    serving_gnb_id: Some(c.gnb_id),
                    serving_sector_id: Some(c.sector_id),
                    serving_kind: Some(c.kind),
                    serving_state: c.result.state,
                    strongest_path_is_los: c.result.strongest_path_is_los,
                    serving_aoa_elevation_deg: c.result.strongest_path_aoa_elevation_deg,
                },
                None => UavRecord {
                    altitude_m: r.altitude_m,
                    drop_index: r.drop_index,
                    uav_id: uav.id,
                    snr_db: f64::NEG_INFINITY,
                    serving_gnb_id: None,
                    serving_sector_id: None,
                    serving_kind: None,
                    serving_state: LinkState::Outage,
                    strongest_path_is_los: false,
                    serving_aoa_elevation_deg: None,
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropOutcome {
    pub records: Vec<UavRecord>,
    pub counters: Counters,
}

pub fn run_drop(cfg: &DropConfig, altitude_m: f64, drop_index: usize) -> Result<DropOutcome, NetworkError> {
    let r = realize_drop(cfg, altitude_m, drop_index)?;
    Ok(DropOutcome {
        records: associate(&r, |_| true),
        counters: r.counters,
    })
}

/// All drops at all altitudes, ordered by `(altitude, drop_index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DropReport {
    pub records: Vec<UavRecord>,
    pub counters: Counters,
}

impl DropReport {
    /// Altitudes in first-seen order.
    pub fn altitudes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.altitude_m) {
                out.push(r.altitude_m);
            }
        }
        out
    }

    pub fn at_altitude(&self, altitude_m: f64) -> Vec<UavRecord> {
        self.records.iter().filter(|r| r.altitude_m == altitude_m).copied().collect()
    }
}

fn run_units(cfg: &DropConfig) -> Result<DropReport, NetworkError> {
    let units: Vec<(f64, usize)> = cfg
        .uav_altitudes_m
        .iter()
        .flat_map(|&h| (0..cfg.drops).map(move |d| (h, d)))
        .collect();
    let outcomes: Vec<Result<DropOutcome, NetworkError>> = units.par_iter().map(|&(h, d)| run_drop(cfg, h, d)).collect();
    let mut report = DropReport {
        records: Vec::with_capacity(units.len() * cfg.uav_count),
        counters: Counters::default(),
    };
    for o in outcomes {
        let o = o?;
        report.records.extend(o.records);
        report.counters.add(&o.counters);
    }
    Ok(report)
}

/// Runs every `(altitude, drop)` unit. `threads = None` uses rayon's
/// global pool.
pub fn run_drops(cfg: &DropConfig, threads: Option<usize>) -> Result<DropReport, NetworkError> {
    cfg.validate()?;
    match threads {
        None => run_units(cfg),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| NetworkError::ThreadPool(e.to_string()))?
            .install(|| run_units(cfg)),
    }
}

// ---------------------------------------------------------------------------
// Statistics

/// Linear interpolation between order statistics: `h = (n - 1) p`,
/// `q = x[⌊h⌋] + (h - ⌊h⌋)(x[⌊h⌋ + 1] - x[⌊h⌋])` on sorted `x`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&p) {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub const REPORTED_QUANTILES: [f64; 5] = [0.05, 0.25, 0.50, 0.75, 0.95];

pub fn default_cdf_grid() -> Vec<f64> {
    (0..=160).map(|i| -20.0 + 0.5 * i as f64).collect()
}

fn covered_sorted(records: &[UavRecord]) -> Vec<f64> {
    let mut v: Vec<f64> = records.iter().filter(|r| !r.is_outage()).map(|r| r.snr_db).collect();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrCdf {
    /// `(snr_db, P(SNR <= snr_db))` over non-outage records.
    pub points: Vec<(f64, f64)>,
    /// `(p, quantile)` for [`REPORTED_QUANTILES`].
    pub quantiles: Vec<(f64, f64)>,
    pub outage_fraction: f64,
    pub total: usize,
    pub covered: usize,
}

pub fn snr_cdf(records: &[UavRecord]) -> SnrCdf {
    snr_cdf_on_grid(records, &default_cdf_grid())
}

pub fn snr_cdf_on_grid(records: &[UavRecord], grid: &[f64]) -> SnrCdf {
    let v = covered_sorted(records);
    let total = records.len();
    let outage_fraction = if total == 0 { 0.0 } else { (total - v.len()) as f64 / total as f64 };
    if v.is_empty() {
        return SnrCdf {
            points: Vec::new(),
            quantiles: Vec::new(),
            outage_fraction: if total == 0 { 0.0 } else { 1.0 },
            total,
            covered: 0,
        };
    }
    let n = v.len() as f64;
    let points = grid
        .iter()
        .map(|&x| (x, v.partition_point(|&s| s <= x) as f64 / n))
        .collect();
    let quantiles = REPORTED_QUANTILES
        .iter()
        .map(|&p| (p, quantile_sorted(&v, p).expect("non-empty")))
        .collect();
    SnrCdf {
        points,
        quantiles,
        outage_fraction,
        total,
        covered: v.len(),
    }
}

/// `p`-quantile of the non-outage SNRs.
pub fn snr_quantile(records: &[UavRecord], p: f64) -> Option<f64> {
    quantile_sorted(&covered_sorted(records), p)
}

fn covered_fraction(records: &[UavRecord], pred: impl Fn(&UavRecord) -> bool) -> f64 {
    let covered: Vec<&UavRecord> = records.iter().filter(|r| !r.is_outage()).collect();
    if covered.is_empty() {
        return 0.0;
    }
    covered.iter().filter(|r| pred(r)).count() as f64 / covered.len() as f64
}

/// `P(SNR > threshold)` over non-outage records.
pub fn coverage_fraction(records: &[UavRecord], threshold_db: f64) -> f64 {
    covered_fraction(records, |r| r.snr_db > threshold_db)
}

pub fn outage_fraction(records: &[UavRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| r.is_outage()).count() as f64 / records.len() as f64
}

/// Fraction of non-outage UAVs served by a dedicated site.
pub fn dedicated_attach_fraction(records: &[UavRecord]) -> f64 {
    covered_fraction(records, |r| r.serving_kind == Some(GnbKind::Dedicated))
}

/// Fraction of non-outage UAVs on an NLOS serving link.
pub fn nlos_serving_fraction(records: &[UavRecord]) -> f64 {
    covered_fraction(records, |r| r.serving_state == LinkState::Nlos)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RegimeComposition {
    pub count: usize,
    pub nlos: f64,
    pub los_strongest_los: f64,
    pub los_strongest_nlos: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeBreakdown {
    pub low_threshold_db: f64,
    pub high_threshold_db: f64,
    /// `SNR < low`.
    pub lower: RegimeComposition,
    pub middle: RegimeComposition,
    /// `SNR > high`.
    pub upper: RegimeComposition,
}

fn compose<'a>(rs: impl Iterator<Item = &'a UavRecord>) -> RegimeComposition {
    let (mut n, mut nlos, mut ll, mut ln) = (0usize, 0usize, 0usize, 0usize);
    for r in rs {
        n += 1;
        match (r.serving_state, r.strongest_path_is_los) {
            (LinkState::Nlos, _) => nlos += 1,
            (_, true) => ll += 1,
            _ => ln += 1,
        }
    }
    let f = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    RegimeComposition {
        count: n,
        nlos: f(nlos),
        los_strongest_los: f(ll),
        los_strongest_nlos: f(ln),
    }
}

/// Link-state composition of the lower tail, middle and upper tail of the
/// non-outage SNRs.
pub fn regime_breakdown(records: &[UavRecord], low_db: f64, high_db: f64) -> Result<RegimeBreakdown, String> {
    if !(low_db <= high_db) {
        return Err(format!("regime thresholds out of order: {low_db} > {high_db}"));
    }
    let covered = || records.iter().filter(|r| !r.is_outage());
    Ok(RegimeBreakdown {
        low_threshold_db: low_db,
        high_threshold_db: high_db,
        lower: compose(covered().filter(|r| r.snr_db < low_db)),
        middle: compose(covered().filter(|r| r.snr_db >= low_db && r.snr_db <= high_db)),
        upper: compose(covered().filter(|r| r.snr_db > high_db)),
    })
}

/// 20th and 80th percentile SNRs.
pub fn default_regime_thresholds(records: &[UavRecord]) -> Option<(f64, f64)> {
    let v = covered_sorted(records);
    Some((quantile_sorted(&v, 0.2)?, quantile_sorted(&v, 0.8)?))
}

// ---------------------------------------------------------------------------
// Elevation AOA at a single gNB

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementMode {
    /// Strongest path by propagation gain alone.
    Omnidirectional,
    /// Strongest path after the facing sector's element gain.
    Directional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoaBin {
    pub distance_m: f64,
    /// `None` when every realization was in outage.
    pub mean_elevation_deg: Option<f64>,
    pub std_elevation_deg: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct AoaExperiment<'a> {
    pub gnb: &'a Site,
    pub channel: &'a ChannelParams,
    pub mode: ElementMode,
    pub realizations: usize,
    pub seed: u64,
}

impl AoaExperiment<'_> {
    /// UAV along the boresight of sector 0, `distance_m` away horizontally.
    fn bin(&self, altitude_m: f64, distance_m: f64) -> Result<AoaBin, NetworkError> {
        let sector = self.gnb.sectors.first().ok_or_else(|| NetworkError::InvalidConfig("gNB has no sectors".into()))?;
        let orientation: Orientation = sector.orientation();
        let az = sector.azimuth_boresight_deg.to_radians();
        let p = self.gnb.position;
        let uav = Point3::new(p.x + distance_m * az.cos(), p.y + distance_m * az.sin(), altitude_m);
        let open = Universe {
            side_length_m: 1e9,
            wrap: false,
        };
        let geom = LinkGeometry::between(p, uav, &open)?;
        let mut rng = ChaCha8Rng::seed_from_u64(mix(mix(self.seed, altitude_m.to_bits()), distance_m.to_bits()));
        let mut els = Vec::with_capacity(self.realizations);
        for _ in 0..self.realizations {
            let s = channel::sample_channel(&geom, self.gnb.kind, self.channel, &mut rng);
            let score = |pc: &channel::PathComponent| match self.mode {
                ElementMode::Omnidirectional => pc.gain_db,
                ElementMode::Directional => {
                    let (t, ph) = crate::antenna::global_to_local(&orientation, pc.aoa_azimuth_deg, pc.aoa_elevation_deg);
                    pc.gain_db + sector.array.element.gain_db(t, ph)
                }
            };
            let best = s.paths.iter().fold(None, |b: Option<(&channel::PathComponent, f64)>, pc| {
                let g = score(pc);
                match b {
                    Some((_, bg)) if bg >= g => b,
                    _ => Some((pc, g)),
                }
            });
            if let Some((pc, _)) = best {
                els.push(pc.aoa_elevation_deg);
            }
        }
        let n = els.len();
        let (mean, std) = if n == 0 {
            (None, None)
        } else {
            let m = els.iter().sum::<f64>() / n as f64;
            let var = els.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / n as f64;
            (Some(m), Some(var.sqrt()))
        };
        Ok(AoaBin {
            distance_m,
            mean_elevation_deg: mean,
            std_elevation_deg: std,
            samples: n,
        })
    }

    /// Mean strongest-path elevation AOA per horizontal distance.
    pub fn sweep(&self, altitude_m: f64, distances_m: &[f64]) -> Result<Vec<AoaBin>, NetworkError> {
        if self.realizations == 0 {
            return Err(NetworkError::InvalidConfig("realizations must be >= 1".into()));
        }
        distances_m.iter().map(|&d| self.bin(altitude_m, d)).collect()
    }

    /// Strongest-path elevation AOA standard deviation, indexed
    /// `[altitude][distance]`. Cells without samples hold `NaN`.
    pub fn std_map(&self, altitudes_m: &[f64], distances_m: &[f64]) -> Result<Vec<Vec<f64>>, NetworkError> {
        if altitudes_m.is_empty() || distances_m.is_empty() {
            return Err(NetworkError::InvalidConfig("AOA grids must not be empty".into()));
        }
        altitudes_m
            .iter()
            .map(|&h| {
                Ok(self
                    .sweep(h, distances_m)?
                    .into_iter()
                    .map(|b| b.std_elevation_deg.unwrap_or(f64::NAN))
                    .collect())
            })
            .collect()
    }
}

pub fn strongest_path_aoa_sweep(
    gnb: &Site,
    altitude_m: f64,
    distances_m: &[f64],
    realizations: usize,
    mode: ElementMode,
    channel: &ChannelParams,
    seed: u64,
) -> Result<Vec<AoaBin>, NetworkError> {
    AoaExperiment {
        gnb,
        channel,
        mode,
        realizations,
        seed,
    }
    .sweep(altitude_m, distances_m)
}

pub fn aoa_std_map(
    gnb: &Site,
    altitudes_m: &[f64],
    distances_m: &[f64],
    realizations: usize,
    mode: ElementMode,
    channel: &ChannelParams,
    seed: u64,
) -> Result<Vec<Vec<f64>>, NetworkError> {
    AoaExperiment {
        gnb,
        channel,
        mode,
        realizations,
        seed,
    }
    .std_map(altitudes_m, distances_m)
}

/// A single standard gNB at the origin with sector 0 facing `+x`.
pub fn reference_site(kind: GnbKind, height_m: f64, tilt_deg: f64, array: &ArrayConfig) -> Site {
    Site {
        id: 0,
        position: Point3::new(0.0, 0.0, height_m),
        kind,
        sectors: (0..3)
            .map(|k| geometry::Sector {
                azimuth_boresight_deg: 120.0 * k as f64,
                tilt_deg,
                array: array.clone(),
            })
            .collect(),
    }
}
