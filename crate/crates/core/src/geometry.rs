//! Wrap-around simulation universe, random gNB/UAV deployments and the
//! relative geometry between nodes.
//!
//! Angles produced here are in the global frame: azimuth in `[0, 360)`
//! degrees counterclockwise from `+x`, elevation in `[-90, 90]` degrees with
//! `+90` pointing straight up.

use std::fmt;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antenna::{ArrayConfig, Orientation};

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("degenerate geometry: points coincide after wrapping")]
    CoincidentPoints,
    #[error(
        "could not place {kind} node {index} after {attempts} attempts; \
         requested density is infeasible under the separation constraints"
    )]
    Infeasible {
        kind: &'static str,
        index: usize,
        attempts: usize,
    },
    #[error("invalid deployment configuration: {0}")]
    InvalidConfig(String),
}

/// A point or displacement in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn horizontal_norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Square horizontal domain, optionally toroidal in `x` and `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Universe {
    pub side_length_m: f64,
    pub wrap: bool,
}

impl Default for Universe {
    fn default() -> Self {
        Self {
            side_length_m: 1000.0,
            wrap: true,
        }
    }
}

impl Universe {
    pub fn area_m2(&self) -> f64 {
        self.side_length_m * self.side_length_m
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.side_length_m.is_finite() && self.side_length_m > 0.0) {
            return Err(GeometryError::InvalidConfig(format!(
                "side_length_m must be positive, got {}",
                self.side_length_m
            )));
        }
        Ok(())
    }
}

fn minimal_image(delta: f64, side: f64) -> f64 {
    let wrapped = delta - side * (delta / side).round();
    // `round` sends exact half-sides either way; pin them to +side/2.
    if wrapped <= -side / 2.0 {
        wrapped + side
    } else {
        wrapped
    }
}

/// Displacement `q - p` with the horizontal components reduced to their
/// minimal image on the torus. Height is never wrapped.
pub fn wrap_displacement(p: Point3, q: Point3, u: &Universe) -> Point3 {
    let mut d = Point3::new(q.x - p.x, q.y - p.y, q.z - p.z);
    if u.wrap {
        d.x = minimal_image(d.x, u.side_length_m);
        d.y = minimal_image(d.y, u.side_length_m);
    }
    d
}

pub fn wrapped_distance(p: Point3, q: Point3, u: &Universe) -> f64 {
    wrap_displacement(p, q, u).norm()
}

pub fn wrapped_horizontal_distance(p: Point3, q: Point3, u: &Universe) -> f64 {
    wrap_displacement(p, q, u).horizontal_norm()
}

/// Azimuth/elevation (degrees) of the direction from `from` to `to`.
///
/// Vertical links report azimuth 0.
pub fn relative_angles(from: Point3, to: Point3, u: &Universe) -> Result<(f64, f64), GeometryError> {
    let d = wrap_displacement(from, to, u);
    direction_angles(d)
}

pub(crate) fn direction_angles(d: Point3) -> Result<(f64, f64), GeometryError> {
    let r = d.norm();
    if r == 0.0 {
        return Err(GeometryError::CoincidentPoints);
    }
    let h = d.horizontal_norm();
    let elevation = d.z.atan2(h).to_degrees();
    let azimuth = if h == 0.0 {
        0.0
    } else {
        normalize_azimuth(d.y.atan2(d.x).to_degrees())
    };
    Ok((azimuth, elevation))
}

/// Maps any azimuth to `[0, 360)`.
pub fn normalize_azimuth(az_deg: f64) -> f64 {
    let a = az_deg.rem_euclid(360.0);
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GnbKind {
    /// Street-level, downtilted.
    Standard,
    /// Rooftop, uptilted for aerial service.
    Dedicated,
}

impl GnbKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GnbKind::Standard => "standard",
            GnbKind::Dedicated => "dedicated",
        }
    }
}

impl fmt::Display for GnbKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closed interval `[lo, hi]` in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval(pub f64, pub f64);

impl Interval {
    pub fn lo(&self) -> f64 {
        self.0
    }
    pub fn hi(&self) -> f64 {
        self.1
    }
    pub fn contains(&self, v: f64) -> bool {
        v >= self.0 && v <= self.1
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.0 == self.1 {
            self.0
        } else {
            rng.random_range(self.0..=self.1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeploymentConfig {
    pub isd_standard_m: f64,
    pub isd_dedicated_m: Option<f64>,
    /// Overrides the ISD-derived standard site count.
    pub standard_gnb_count: Option<usize>,
    /// Overrides the ISD-derived dedicated site count.
    pub dedicated_gnb_count: Option<usize>,
    pub min_gnb_separation_m: f64,
    pub min_uav_gnb_separation_m: f64,
    pub standard_height_range_m: Interval,
    pub dedicated_height_range_m: Interval,
    pub standard_downtilt_deg: f64,
    pub dedicated_uptilt_deg: f64,
    /// Rejection budget per placed node.
    pub max_placement_attempts: usize,
}

impl Default for DeploymentConfig {
    fn default() -> Self {
        Self {
            isd_standard_m: 200.0,
            isd_dedicated_m: None,
            standard_gnb_count: None,
            dedicated_gnb_count: None,
            min_gnb_separation_m: 10.0,
            min_uav_gnb_separation_m: 10.0,
            standard_height_range_m: Interval(2.0, 5.0),
            dedicated_height_range_m: Interval(10.0, 30.0),
            standard_downtilt_deg: -12.0,
            dedicated_uptilt_deg: 45.0,
            max_placement_attempts: 10_000,
        }
    }
}

impl DeploymentConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidConfig(m));
        if !(self.isd_standard_m.is_finite() && self.isd_standard_m > 0.0) {
            return bad(format!("isd_standard_m must be positive, got {}", self.isd_standard_m));
        }
        if let Some(d) = self.isd_dedicated_m {
            if !(d.is_finite() && d > 0.0) {
                return bad(format!("isd_dedicated_m must be positive, got {d}"));
            }
            if d < self.isd_standard_m {
                return bad(format!(
                    "isd_dedicated_m ({d}) must be >= isd_standard_m ({})",
                    self.isd_standard_m
                ));
            }
        }
        if !(self.min_gnb_separation_m > 0.0) {
            return bad("min_gnb_separation_m must be positive".into());
        }
        if !(self.min_uav_gnb_separation_m > 0.0) {
            return bad("min_uav_gnb_separation_m must be positive".into());
        }
        for (name, r) in [
            ("standard_height_range_m", self.standard_height_range_m),
            ("dedicated_height_range_m", self.dedicated_height_range_m),
        ] {
            if !(r.lo().is_finite() && r.hi().is_finite() && r.lo() >= 0.0 && r.lo() < r.hi()) {
                return bad(format!("{name} must satisfy 0 <= lo < hi, got [{}, {}]", r.lo(), r.hi()));
            }
        }
        if self.max_placement_attempts == 0 {
            return bad("max_placement_attempts must be >= 1".into());
        }
        Ok(())
    }

    pub fn isd(&self, kind: GnbKind) -> Option<f64> {
        match kind {
            GnbKind::Standard => Some(self.isd_standard_m),
            GnbKind::Dedicated => self.isd_dedicated_m,
        }
    }

    pub fn tilt_deg(&self, kind: GnbKind) -> f64 {
        match kind {
            GnbKind::Standard => self.standard_downtilt_deg,
            GnbKind::Dedicated => self.dedicated_uptilt_deg,
        }
    }

    pub fn height_range(&self, kind: GnbKind) -> Interval {
        match kind {
            GnbKind::Standard => self.standard_height_range_m,
            GnbKind::Dedicated => self.dedicated_height_range_m,
        }
    }

    /// Number of sites of `kind`: the explicit override if set, otherwise
    /// `round(area / ISD²)`. `None` when the kind is not deployed.
    pub fn site_count(&self, kind: GnbKind, u: &Universe) -> Option<usize> {
        let count_override = match kind {
            GnbKind::Standard => self.standard_gnb_count,
            GnbKind::Dedicated => self.dedicated_gnb_count,
        };
        if let Some(n) = count_override {
            return Some(n);
        }
        self.isd(kind)
            .map(|isd| (u.area_m2() / (isd * isd)).round() as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub azimuth_boresight_deg: f64,
    /// Negative values are downtilt.
    pub tilt_deg: f64,
    pub array: ArrayConfig,
}

impl Sector {
    pub fn orientation(&self) -> Orientation {
        Orientation::new(self.azimuth_boresight_deg, self.tilt_deg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: usize,
    pub position: Point3,
    pub kind: GnbKind,
    pub sectors: Vec<Sector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavNode {
    pub id: usize,
    pub position: Point3,
    pub array: ArrayConfig,
    pub orientation: Orientation,
}

/// Random deployment of `kind` sites. Ids run from 0 in placement order.
pub fn deploy_gnbs<R: Rng + ?Sized>(
    cfg: &DeploymentConfig,
    kind: GnbKind,
    array: &ArrayConfig,
    u: &Universe,
    rng: &mut R,
) -> Result<Vec<Site>, GeometryError> {
    let n = cfg.site_count(kind, u).ok_or_else(|| {
        GeometryError::InvalidConfig(format!("no {kind} ISD or site count configured"))
    })?;
    let heights = cfg.height_range(kind);
    let tilt = cfg.tilt_deg(kind);
    let side = u.side_length_m;
    let mut sites: Vec<Site> = Vec::with_capacity(n);
    for index in 0..n {
        let mut placed = None;
        for _ in 0..cfg.max_placement_attempts {
            let candidate = Point3::new(rng.random_range(0.0..side), rng.random_range(0.0..side), 0.0);
            let clear = sites.iter().all(|s| {
                wrapped_horizontal_distance(s.position, candidate, u) >= cfg.min_gnb_separation_m
            });
            if clear {
                placed = Some(candidate);
                break;
            }
        }
        let mut position = placed.ok_or(GeometryError::Infeasible {
            kind: kind.as_str(),
            index,
            attempts: cfg.max_placement_attempts,
        })?;
        position.z = heights.sample(rng);
        let rotation: f64 = rng.random_range(0.0..120.0);
        let sectors = (0..3)
            .map(|k| Sector {
                azimuth_boresight_deg: normalize_azimuth(rotation + 120.0 * k as f64),
                tilt_deg: tilt,
                array: array.clone(),
            })
            .collect();
        sites.push(Site {
            id: index,
            position,
            kind,
            sectors,
        });
    }
    Ok(sites)
}

/// UAVs uniform on the plane `z = altitude_m`, rejected while closer than
/// the configured 3D separation to any site.
pub fn deploy_uavs<R: Rng + ?Sized>(
    count: usize,
    altitude_m: f64,
    cfg: &DeploymentConfig,
    sites: &[Site],
    array: &ArrayConfig,
    u: &Universe,
    rng: &mut R,
) -> Result<Vec<UavNode>, GeometryError> {
    if count == 0 {
        return Err(GeometryError::InvalidConfig("UAV count must be >= 1".into()));
    }
    if !(altitude_m.is_finite() && altitude_m > 0.0) {
        return Err(GeometryError::InvalidConfig(format!("UAV altitude must be positive, got {altitude_m}")));
    }
    let side = u.side_length_m;
    (0..count)
        .map(|id| {
            for _ in 0..cfg.max_placement_attempts {
                let p = Point3::new(rng.random_range(0.0..side), rng.random_range(0.0..side), altitude_m);
                if sites
                    .iter()
                    .all(|s| wrapped_distance(s.position, p, u) >= cfg.min_uav_gnb_separation_m)
                {
                    return Ok(UavNode {
                        id,
                        position: p,
                        array: array.clone(),
                        orientation: Orientation::NADIR,
                    });
                }
            }
            Err(GeometryError::Infeasible {
                kind: "uav",
                index: id,
                attempts: cfg.max_placement_attempts,
            })
        })
        .collect()
}

/// Writes `sites.csv`: `id,kind,x_m,y_m,z_m,sector0_az_deg,tilt_deg`.
pub fn write_sites_csv<W: Write>(sites: &[Site], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "kind", "x_m", "y_m", "z_m", "sector0_az_deg", "tilt_deg"])?;
    for s in sites {
        let (az, tilt) = s
            .sectors
            .first()
            .map(|sec| (sec.azimuth_boresight_deg, sec.tilt_deg))
            .unwrap_or((0.0, 0.0));
        w.write_record([
            s.id.to_string(),
            s.kind.to_string(),
            s.position.x.to_string(),
            s.position.y.to_string(),
            s.position.z.to_string(),
            az.to_string(),
            tilt.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
