//! Two-stage random channel generation for gNB–UAV links.
//!
//! Stage one draws the link state (LOS, NLOS or outage) from the link
//! geometry and the gNB kind. Stage two draws the multipath components
//! conditioned on that state. The statistical surrogate here stands in for a
//! trained generative model; [`PathTraces`] lets externally generated
//! samples replace it.
//!
//! All path angles are in the global frame. AOA angles are the bearing from
//! the gNB toward the arriving wave, AOD angles the bearing from the UAV
//! toward the departing wave.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, GeometryError, GnbKind, Point3, Universe};

/// Speed of light in meters per nanosecond.
pub const SPEED_OF_LIGHT_M_PER_NS: f64 = 0.299_792_458;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkState {
    Los,
    Nlos,
    Outage,
}

impl LinkState {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinkState::Los => "los",
            LinkState::Nlos => "nlos",
            LinkState::Outage => "outage",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "los" => Some(LinkState::Los),
            "nlos" => Some(LinkState::Nlos),
            "outage" => Some(LinkState::Outage),
            _ => None,
        }
    }
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One multipath component. `gain_db` includes propagation loss but no
/// antenna gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub gain_db: f64,
    pub delay_ns: f64,
    pub aoa_elevation_deg: f64,
    pub aoa_azimuth_deg: f64,
    pub aod_elevation_deg: f64,
    pub aod_azimuth_deg: f64,
    /// The geometric line-of-sight ray.
    pub is_los: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub state: LinkState,
    pub paths: Vec<PathComponent>,
    /// Paths whose sampled gain exceeded free space and were clamped.
    pub clamped_paths: usize,
}

impl ChannelSample {
    pub fn outage() -> Self {
        Self {
            state: LinkState::Outage,
            paths: Vec::new(),
            clamped_paths: 0,
        }
    }

    pub fn los_path(&self) -> Option<&PathComponent> {
        self.paths.iter().find(|p| p.is_los)
    }

    /// Checks the sample against the geometry of the link it is used on.
    pub fn check(&self, geom: &LinkGeometry, carrier_ghz: f64, max_paths: usize) -> Result<(), String> {
        let los_count = self.paths.iter().filter(|p| p.is_los).count();
        match self.state {
            LinkState::Outage if !self.paths.is_empty() => return Err("outage link carries paths".into()),
            LinkState::Outage => return Ok(()),
            _ if self.paths.is_empty() => return Err(format!("{} link has no paths", self.state)),
            LinkState::Los if los_count != 1 => {
                return Err(format!("LOS link has {los_count} line-of-sight paths"))
            }
            LinkState::Nlos if los_count != 0 => return Err("NLOS link has a line-of-sight path".into()),
            _ => {}
        }
        if self.paths.len() > max_paths {
            return Err(format!("{} paths exceed the limit of {max_paths}", self.paths.len()));
        }
        let min_delay = geom.d3d_m / SPEED_OF_LIGHT_M_PER_NS;
        let fs = free_space_gain_db(geom.d3d_m, carrier_ghz);
        for (i, p) in self.paths.iter().enumerate() {
            check_path_ranges(p).map_err(|m| format!("path {i}: {m}"))?;
            if p.delay_ns < min_delay * (1.0 - 1e-9) {
                return Err(format!(
                    "path {i}: delay {} ns is shorter than the propagation time {min_delay} ns",
                    p.delay_ns
                ));
            }
            if p.gain_db > fs + 1e-6 {
                return Err(format!("path {i}: gain {} dB is stronger than free space ({fs} dB)", p.gain_db));
            }
        }
        Ok(())
    }
}

fn check_path_ranges(p: &PathComponent) -> Result<(), String> {
    let fields = [p.gain_db, p.delay_ns, p.aoa_elevation_deg, p.aoa_azimuth_deg, p.aod_elevation_deg, p.aod_azimuth_deg];
    if fields.iter().any(|v| !v.is_finite()) {
        return Err("non-finite value".into());
    }
    if p.delay_ns < 0.0 {
        return Err(format!("negative delay {}", p.delay_ns));
    }
    for el in [p.aoa_elevation_deg, p.aod_elevation_deg] {
        if !(-90.0..=90.0).contains(&el) {
            return Err(format!("elevation {el} outside [-90, 90]"));
        }
    }
    for az in [p.aoa_azimuth_deg, p.aod_azimuth_deg] {
        if !(-180.0..=360.0).contains(&az) {
            return Err(format!("azimuth {az} outside [-180, 360]"));
        }
    }
    Ok(())
}

/// Geometry of one gNB–UAV link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub d2d_m: f64,
    pub d3d_m: f64,
    pub h_uav_m: f64,
    pub h_gnb_m: f64,
    /// Bearing gNB → UAV.
    pub aoa_azimuth_deg: f64,
    pub aoa_elevation_deg: f64,
    /// Bearing UAV → gNB.
    pub aod_azimuth_deg: f64,
    pub aod_elevation_deg: f64,
}

impl LinkGeometry {
    pub fn between(gnb: Point3, uav: Point3, u: &Universe) -> Result<Self, GeometryError> {
        let d = geometry::wrap_displacement(gnb, uav, u);
        let (aoa_az, aoa_el) = geometry::direction_angles(d)?;
        let back = Point3::new(-d.x, -d.y, -d.z);
        let (aod_az, aod_el) = geometry::direction_angles(back)?;
        Ok(Self {
            d2d_m: d.horizontal_norm(),
            d3d_m: d.norm(),
            h_uav_m: uav.z,
            h_gnb_m: gnb.z,
            aoa_azimuth_deg: aoa_az,
            aoa_elevation_deg: aoa_el,
            aod_azimuth_deg: aod_az,
            aod_elevation_deg: aod_el,
        })
    }
}

/// Free-space (Friis) gain in dB, `-20 log10(4π d f / c)`.
pub fn free_space_gain_db(d3d_m: f64, carrier_ghz: f64) -> f64 {
    let wavelength_m = SPEED_OF_LIGHT_M_PER_NS / carrier_ghz;
    -20.0 * (4.0 * PI * d3d_m / wavelength_m).log10()
}

/// `20 log10(4π / c)` with `c` in m·GHz; makes an exponent-2 curve equal to
/// free space.
pub const FREE_SPACE_INTERCEPT_DB: f64 = 32.447_783_221_883_38;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathLossModel {
    pub intercept_db: f64,
    pub exponent: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self {
            intercept_db: FREE_SPACE_INTERCEPT_DB,
            exponent: 2.0,
        }
    }
}

impl PathLossModel {
    /// `intercept + 10 n log10(d) + 20 log10(f_GHz)`, with `d` floored at 1 m.
    pub fn loss_db(&self, d3d_m: f64, carrier_ghz: f64) -> f64 {
        self.intercept_db + 10.0 * self.exponent * d3d_m.max(1.0).log10() + 20.0 * carrier_ghz.log10()
    }
}

/// Stage-one coefficients for one gNB kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkStateModel {
    /// Multiplies the 2D distance fed to the LOS-probability curve; values
    /// below 1 raise the LOS probability.
    pub los_distance_scale: f64,
    pub outage_midpoint_m: f64,
    pub outage_slope_per_m: f64,
}

impl Default for LinkStateModel {
    fn default() -> Self {
        Self {
            // street-level clutter: LOS decays faster than the UMi-AV curve
            los_distance_scale: 3.5,
            outage_midpoint_m: 600.0,
            outage_slope_per_m: 0.01,
        }
    }
}

impl LinkStateModel {
    pub fn dedicated_default() -> Self {
        Self {
            los_distance_scale: 0.5,
            ..Self::default()
        }
    }
}

/// Stage-two coefficients. Angular spreads are Laplacian scale parameters
/// (mean absolute deviation) in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathModel {
    /// Poisson mean of the number of NLOS paths beyond the mandatory one.
    pub mean_extra_paths: f64,
    pub gain_decay_db_per_ns: f64,
    pub delay_scale_ns: f64,
    pub shadowing_std_db: f64,
    pub gnb_azimuth_spread_deg: f64,
    pub uav_azimuth_spread_deg: f64,
    pub uav_elevation_spread_deg: f64,
    /// gNB elevation spread is `base + slope * h_uav / ref_altitude`.
    pub gnb_elevation_spread_base_deg: f64,
    pub gnb_elevation_spread_slope_deg: f64,
    pub gnb_elevation_spread_ref_altitude_m: f64,
    pub los_pathloss: PathLossModel,
    pub nlos_pathloss: PathLossModel,
}

impl Default for PathModel {
    fn default() -> Self {
        Self {
            mean_extra_paths: 8.0,
            gain_decay_db_per_ns: 0.05,
            delay_scale_ns: 150.0,
            shadowing_std_db: 6.0,
            gnb_azimuth_spread_deg: 25.0,
            uav_azimuth_spread_deg: 35.0,
            uav_elevation_spread_deg: 10.0,
            gnb_elevation_spread_base_deg: 3.0,
            gnb_elevation_spread_slope_deg: 20.0,
            gnb_elevation_spread_ref_altitude_m: 120.0,
            los_pathloss: PathLossModel::default(),
            nlos_pathloss: PathLossModel {
                intercept_db: 10.0,
                exponent: 4.0,
            },
        }
    }
}

impl PathModel {
    pub fn gnb_elevation_spread_deg(&self, h_uav_m: f64) -> f64 {
        self.gnb_elevation_spread_base_deg
            + self.gnb_elevation_spread_slope_deg * h_uav_m / self.gnb_elevation_spread_ref_altitude_m
    }

    pub fn pathloss_los(&self, d3d_m: f64, carrier_ghz: f64) -> f64 {
        self.los_pathloss.loss_db(d3d_m, carrier_ghz)
    }

    /// Never below the LOS loss at the same distance.
    pub fn pathloss_nlos(&self, d3d_m: f64, carrier_ghz: f64) -> f64 {
        self.nlos_pathloss
            .loss_db(d3d_m, carrier_ghz)
            .max(self.pathloss_los(d3d_m, carrier_ghz))
    }

    fn validate(&self) -> Result<(), String> {
        let positive = [
            ("delay_scale_ns", self.delay_scale_ns),
            ("gnb_azimuth_spread_deg", self.gnb_azimuth_spread_deg),
            ("uav_azimuth_spread_deg", self.uav_azimuth_spread_deg),
            ("uav_elevation_spread_deg", self.uav_elevation_spread_deg),
            ("gnb_elevation_spread_base_deg", self.gnb_elevation_spread_base_deg),
            ("gnb_elevation_spread_ref_altitude_m", self.gnb_elevation_spread_ref_altitude_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        let non_negative = [
            ("mean_extra_paths", self.mean_extra_paths),
            ("gain_decay_db_per_ns", self.gain_decay_db_per_ns),
            ("shadowing_std_db", self.shadowing_std_db),
            ("gnb_elevation_spread_slope_deg", self.gnb_elevation_spread_slope_deg),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be >= 0, got {v}"));
            }
        }
        if !(self.los_pathloss.exponent >= 2.0) || !(self.nlos_pathloss.exponent >= 2.0) {
            return Err("path-loss exponents must be >= 2".into());
        }
        // a lower NLOS intercept is fine: the LOS curve floors the NLOS loss
        if self.nlos_pathloss.exponent < self.los_pathloss.exponent {
            return Err("NLOS path-loss exponent must not be below the LOS exponent".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    pub carrier_ghz: f64,
    pub max_paths: usize,
    /// Bypasses stage one when set.
    pub forced_state: Option<LinkState>,
    pub standard_link_state: LinkStateModel,
    #[serde(default = "LinkStateModel::dedicated_default")]
    pub dedicated_link_state: LinkStateModel,
    pub paths: PathModel,
    /// Stage-two override for dedicated gNBs; `None` shares `paths`.
    pub dedicated_paths: Option<PathModel>,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_ghz: 28.0,
            max_paths: 25,
            forced_state: None,
            standard_link_state: LinkStateModel::default(),
            dedicated_link_state: LinkStateModel::dedicated_default(),
            paths: PathModel::default(),
            dedicated_paths: None,
        }
    }
}

impl ChannelParams {
    pub fn link_state_model(&self, kind: GnbKind) -> &LinkStateModel {
        match kind {
            GnbKind::Standard => &self.standard_link_state,
            GnbKind::Dedicated => &self.dedicated_link_state,
        }
    }

    pub fn path_model(&self, kind: GnbKind) -> &PathModel {
        match (kind, &self.dedicated_paths) {
            (GnbKind::Dedicated, Some(p)) => p,
            _ => &self.paths,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.carrier_ghz > 0.0 && self.carrier_ghz.is_finite()) {
            return Err(format!("carrier_ghz must be positive, got {}", self.carrier_ghz));
        }
        if self.max_paths == 0 {
            return Err("max_paths must be >= 1".into());
        }
        for (name, m) in [("standard_link_state", &self.standard_link_state), ("dedicated_link_state", &self.dedicated_link_state)] {
            if !(m.los_distance_scale > 0.0 && m.los_distance_scale.is_finite()) {
                return Err(format!("{name}.los_distance_scale must be positive"));
            }
            if !(m.outage_slope_per_m > 0.0 && m.outage_slope_per_m.is_finite() && m.outage_midpoint_m.is_finite()) {
                return Err(format!("{name}: outage curve needs a positive slope and finite midpoint"));
            }
        }
        self.paths.validate().map_err(|e| format!("paths.{e}"))?;
        if let Some(p) = &self.dedicated_paths {
            p.validate().map_err(|e| format!("dedicated_paths.{e}"))?;
        }
        Ok(())
    }
}

pub fn pathloss_los(d3d_m: f64, p: &ChannelParams) -> f64 {
    p.paths.pathloss_los(d3d_m, p.carrier_ghz)
}

pub fn pathloss_nlos(d3d_m: f64, p: &ChannelParams) -> f64 {
    p.paths.pathloss_nlos(d3d_m, p.carrier_ghz)
}

/// UMi aerial-style LOS probability for a UAV at `h_uav_m` and horizontal
/// distance `d2d_m`.
pub fn los_probability(d2d_m: f64, h_uav_m: f64, model: &LinkStateModel) -> f64 {
    if h_uav_m > 300.0 {
        return 1.0;
    }
    let (d1, p1) = if h_uav_m <= 22.5 {
        (18.0, 36.0)
    } else {
        let lh = h_uav_m.log10();
        ((294.05 * lh - 432.94).max(18.0), 233.98 * lh - 0.95)
    };
    let d = d2d_m * model.los_distance_scale;
    if d <= d1 {
        1.0
    } else {
        d1 / d + (-d / p1).exp() * (1.0 - d1 / d)
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateProbabilities {
    pub los: f64,
    pub nlos: f64,
    pub outage: f64,
}

/// `p_LOS` from the LOS curve; the non-LOS mass splits into outage and NLOS
/// by a logistic curve in 3D distance.
pub fn link_state_probabilities(
    d2d_m: f64,
    h_uav_m: f64,
    h_gnb_m: f64,
    kind: GnbKind,
    p: &ChannelParams,
) -> StateProbabilities {
    if let Some(s) = p.forced_state {
        let one = |t: LinkState| if s == t { 1.0 } else { 0.0 };
        return StateProbabilities {
            los: one(LinkState::Los),
            nlos: one(LinkState::Nlos),
            outage: one(LinkState::Outage),
        };
    }
    let m = p.link_state_model(kind);
    let los = los_probability(d2d_m, h_uav_m, m);
    let d3d = d2d_m.hypot(h_uav_m - h_gnb_m);
    let out_share = logistic(m.outage_slope_per_m * (d3d - m.outage_midpoint_m));
    let outage = (1.0 - los) * out_share;
    StateProbabilities {
        los,
        nlos: (1.0 - los) - outage,
        outage,
    }
}

pub fn sample_link_state<R: Rng + ?Sized>(
    d2d_m: f64,
    h_uav_m: f64,
    h_gnb_m: f64,
    kind: GnbKind,
    p: &ChannelParams,
    rng: &mut R,
) -> LinkState {
    let probs = link_state_probabilities(d2d_m, h_uav_m, h_gnb_m, kind, p);
    let u: f64 = rng.random();
    if u < probs.los {
        LinkState::Los
    } else if u < probs.los + probs.nlos {
        LinkState::Nlos
    } else {
        LinkState::Outage
    }
}

/// Zero-mean Laplacian draw with scale `b`.
pub(crate) fn laplace<R: Rng + ?Sized>(b: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

/// Folds an `(azimuth, elevation)` pair over the poles back into range.
fn fold_direction(mut az: f64, mut el: f64) -> (f64, f64) {
    el = (el + 90.0).rem_euclid(360.0) - 90.0;
    if el > 90.0 {
        el = 180.0 - el;
        az += 180.0;
    }
    (geometry::normalize_azimuth(az), el)
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0)
}

/// Stage two: multipath components for a link already in `state`.
pub fn sample_paths<R: Rng + ?Sized>(
    state: LinkState,
    geom: &LinkGeometry,
    kind: GnbKind,
    p: &ChannelParams,
    rng: &mut R,
) -> ChannelSample {
    let m = p.path_model(kind);
    let los_delay = geom.d3d_m / SPEED_OF_LIGHT_M_PER_NS;
    let fs_gain = free_space_gain_db(geom.d3d_m, p.carrier_ghz);
    let (mut paths, nlos_count) = match state {
        LinkState::Outage => return ChannelSample::outage(),
        LinkState::Los => {
            let los = PathComponent {
                gain_db: -m.pathloss_los(geom.d3d_m, p.carrier_ghz),
                delay_ns: los_delay,
                aoa_elevation_deg: geom.aoa_elevation_deg,
                aoa_azimuth_deg: geom.aoa_azimuth_deg,
                aod_elevation_deg: geom.aod_elevation_deg,
                aod_azimuth_deg: geom.aod_azimuth_deg,
                is_los: true,
            };
            (vec![los], poisson(m.mean_extra_paths, rng).min(p.max_paths - 1))
        }
        LinkState::Nlos => (Vec::new(), (1 + poisson(m.mean_extra_paths, rng)).min(p.max_paths)),
    };
    let mut clamped = 0;
    let delays = Exp::new(1.0 / m.delay_scale_ns).expect("delay scale validated positive");
    let shadowing = Normal::new(0.0, m.shadowing_std_db).expect("shadowing std validated");
    let nlos_loss = m.pathloss_nlos(geom.d3d_m, p.carrier_ghz);
    let gnb_el_spread = m.gnb_elevation_spread_deg(geom.h_uav_m);
    for _ in 0..nlos_count {
        let excess: f64 = delays.sample(rng).max(1e-3);
        let mut gain = -nlos_loss - m.gain_decay_db_per_ns * excess - shadowing.sample(rng);
        if gain > fs_gain {
            gain = fs_gain;
            clamped += 1;
        }
        let (aoa_az, aoa_el) = fold_direction(
            geom.aoa_azimuth_deg + laplace(m.gnb_azimuth_spread_deg, rng),
            geom.aoa_elevation_deg + laplace(gnb_el_spread, rng),
        );
        let (aod_az, aod_el) = fold_direction(
            geom.aod_azimuth_deg + laplace(m.uav_azimuth_spread_deg, rng),
            geom.aod_elevation_deg + laplace(m.uav_elevation_spread_deg, rng),
        );
        paths.push(PathComponent {
            gain_db: gain,
            delay_ns: los_delay + excess,
            aoa_elevation_deg: aoa_el,
            aoa_azimuth_deg: aoa_az,
            aod_elevation_deg: aod_el,
            aod_azimuth_deg: aod_az,
            is_los: false,
        });
    }
    paths.sort_by(|a, b| a.delay_ns.total_cmp(&b.delay_ns));
    ChannelSample {
        state,
        paths,
        clamped_paths: clamped,
    }
}

/// Both stages for one link.
pub fn sample_channel<R: Rng + ?Sized>(
    geom: &LinkGeometry,
    kind: GnbKind,
    p: &ChannelParams,
    rng: &mut R,
) -> ChannelSample {
    let state = sample_link_state(geom.d2d_m, geom.h_uav_m, geom.h_gnb_m, kind, p, rng);
    sample_paths(state, geom, kind, p, rng)
}

// ---------------------------------------------------------------------------
// Path traces

pub const TRACE_HEADER: [&str; 11] = [
    "link_id", "gnb_id", "uav_id", "state", "path_idx", "gain_db", "delay_ns", "aoa_el_deg", "aoa_az_deg",
    "aod_el_deg", "aod_az_deg",
];

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read trace file: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace line {line}: {msg}")]
    Schema { line: u64, msg: String },
    #[error("trace link {link_id:?} (line {line}): {msg}")]
    Invariant { link_id: String, line: u64, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkKey {
    pub gnb_id: usize,
    pub uav_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracedLink {
    pub link_id: String,
    pub sample: ChannelSample,
    /// Line of the link's first row, for error reporting.
    pub line: u64,
}

/// Externally generated channel samples keyed by `(gnb_id, uav_id)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathTraces {
    links: BTreeMap<LinkKey, TracedLink>,
}

struct PendingLink {
    key: LinkKey,
    state: LinkState,
    line: u64,
    paths: Vec<PathComponent>,
}

impl PathTraces {
    pub fn get(&self, key: LinkKey) -> Option<&TracedLink> {
        self.links.get(&key)
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LinkKey, &TracedLink)> {
        self.links.iter()
    }

    /// Parses and validates a trace. LOS links must list the line-of-sight
    /// ray as `path_idx = 0`; its delay fixes the link distance used for the
    /// causality and free-space checks of the remaining rows.
    pub fn from_reader<R: Read>(reader: R, carrier_ghz: f64) -> Result<Self, TraceError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| TraceError::Schema { line: 1, msg: e.to_string() })?
            .clone();
        if header.iter().ne(TRACE_HEADER.iter().copied()) {
            return Err(TraceError::Schema {
                line: 1,
                msg: format!("expected header {}", TRACE_HEADER.join(",")),
            });
        }
        let mut pending: BTreeMap<String, PendingLink> = BTreeMap::new();
        let mut order = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| TraceError::Schema {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                msg: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let schema = |msg: String| TraceError::Schema { line, msg };
            let link_id = rec[0].to_string();
            let int = |i: usize| {
                rec[i]
                    .parse::<i64>()
                    .map_err(|_| schema(format!("{} is not an integer: {:?}", TRACE_HEADER[i], &rec[i])))
            };
            let gnb_id = usize::try_from(int(1)?).map_err(|_| schema("gnb_id must be >= 0".into()))?;
            let uav_id = usize::try_from(int(2)?).map_err(|_| schema("uav_id must be >= 0".into()))?;
            let state = LinkState::parse(&rec[3]).ok_or_else(|| schema(format!("unknown state {:?}", &rec[3])))?;
            let path_idx = int(4)?;
            let key = LinkKey { gnb_id, uav_id };
            let invariant = |msg: String| TraceError::Invariant {
                link_id: link_id.clone(),
                line,
                msg,
            };

            let entry = match pending.get_mut(&link_id) {
                Some(e) => {
                    if e.key != key || e.state != state {
                        return Err(invariant("rows disagree on gnb_id, uav_id or state".into()));
                    }
                    if state == LinkState::Outage {
                        return Err(invariant("outage link must be a single row".into()));
                    }
                    e
                }
                None => {
                    order.push(link_id.clone());
                    pending.entry(link_id.clone()).or_insert(PendingLink {
                        key,
                        state,
                        line,
                        paths: Vec::new(),
                    })
                }
            };

            if state == LinkState::Outage {
                if path_idx != -1 || rec.iter().skip(5).any(|f| !f.is_empty()) {
                    return Err(invariant("outage row needs path_idx=-1 and empty numeric fields".into()));
                }
                continue;
            }
            if path_idx != entry.paths.len() as i64 {
                return Err(invariant(format!(
                    "expected path_idx {}, found {path_idx}",
                    entry.paths.len()
                )));
            }
            let mut num = [0.0; 6];
            for (k, slot) in num.iter_mut().enumerate() {
                let i = k + 5;
                *slot = rec[i]
                    .parse::<f64>()
                    .map_err(|_| schema(format!("{} is not a number: {:?}", TRACE_HEADER[i], &rec[i])))?;
            }
            let path = PathComponent {
                gain_db: num[0],
                delay_ns: num[1],
                aoa_elevation_deg: num[2],
                aoa_azimuth_deg: num[3],
                aod_elevation_deg: num[4],
                aod_azimuth_deg: num[5],
                is_los: state == LinkState::Los && path_idx == 0,
            };
            check_path_ranges(&path).map_err(invariant)?;
            if let Some(los) = entry.paths.first().filter(|p| p.is_los) {
                if path.delay_ns <= los.delay_ns {
                    return Err(invariant(format!(
                        "delay {} ns is not after the line-of-sight arrival at {} ns",
                        path.delay_ns, los.delay_ns
                    )));
                }
                let fs = free_space_gain_db(los.delay_ns * SPEED_OF_LIGHT_M_PER_NS, carrier_ghz);
                if path.gain_db > fs + 1e-6 {
                    return Err(invariant(format!(
                        "gain {} dB is stronger than free space ({fs} dB)",
                        path.gain_db
                    )));
                }
            } else if path.is_los {
                let fs = free_space_gain_db(path.delay_ns * SPEED_OF_LIGHT_M_PER_NS, carrier_ghz);
                if path.gain_db > fs + 1e-6 {
                    return Err(invariant(format!(
                        "line-of-sight gain {} dB is stronger than free space ({fs} dB)",
                        path.gain_db
                    )));
                }
            }
            entry.paths.push(path);
        }

        let mut links = BTreeMap::new();
        for link_id in order {
            let p = pending.remove(&link_id).expect("recorded link");
            if links.contains_key(&p.key) {
                return Err(TraceError::Invariant {
                    link_id,
                    line: p.line,
                    msg: format!("duplicate link for gnb {} / uav {}", p.key.gnb_id, p.key.uav_id),
                });
            }
            let sample = ChannelSample {
                state: p.state,
                paths: p.paths,
                clamped_paths: 0,
            };
            links.insert(p.key, TracedLink {
                link_id,
                sample,
                line: p.line,
            });
        }
        Ok(Self { links })
    }
}

pub fn load_path_traces<P: AsRef<Path>>(path: P, carrier_ghz: f64) -> Result<PathTraces, TraceError> {
    PathTraces::from_reader(File::open(path)?, carrier_ghz)
}

/// Writes samples in the trace format, one row per path.
pub fn write_path_traces<'a, W, I>(samples: I, out: W) -> Result<(), csv::Error>
where
    W: std::io::Write,
    I: IntoIterator<Item = (&'a str, LinkKey, &'a ChannelSample)>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for (link_id, key, s) in samples {
        let head = [link_id.to_string(), key.gnb_id.to_string(), key.uav_id.to_string(), s.state.to_string()];
        if s.state == LinkState::Outage {
            let mut row = head.to_vec();
            row.push("-1".into());
            row.extend(std::iter::repeat_n(String::new(), 6));
            w.write_record(&row)?;
            continue;
        }
        for (i, p) in s.paths.iter().enumerate() {
            let mut row = head.to_vec();
            row.push(i.to_string());
            for v in [p.gain_db, p.delay_ns, p.aoa_elevation_deg, p.aoa_azimuth_deg, p.aod_elevation_deg, p.aod_azimuth_deg] {
                row.push(v.to_string());
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}
