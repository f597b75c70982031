//! Element radiation patterns, uniform rectangular array (URA) responses and
//! the rotation between the global frame and an array's local frame.
//!
//! Local frame convention: the array boresight is the local `+x` axis. A
//! local direction is given by the zenith angle `theta` in `[0, 180]`
//! (measured from local `+z`) and the azimuth `phi` in `(-180, 180]`
//! (measured from local `+x`), so boresight is `theta = 90, phi = 0`. The
//! array elements lie in the local `y`-`z` plane.

use std::f64::consts::PI;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 3GPP parametric sector element (horizontal/vertical cuts combined).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElementPattern3gpp {
    pub theta_3db_deg: f64,
    pub phi_3db_deg: f64,
    pub sla_v_db: f64,
    pub a_max_db: f64,
    pub gain_max_dbi: f64,
}

impl Default for ElementPattern3gpp {
    fn default() -> Self {
        Self {
            theta_3db_deg: 65.0,
            phi_3db_deg: 65.0,
            sla_v_db: 30.0,
            a_max_db: 30.0,
            gain_max_dbi: 8.0,
        }
    }
}

impl ElementPattern3gpp {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("theta_3db_deg", self.theta_3db_deg), ("phi_3db_deg", self.phi_3db_deg)] {
            if !(v > 0.0 && v < 180.0) {
                return Err(format!("{name} must be in (0, 180), got {v}"));
            }
        }
        for (name, v) in [("sla_v_db", self.sla_v_db), ("a_max_db", self.a_max_db)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be >= 0, got {v}"));
            }
        }
        if !self.gain_max_dbi.is_finite() {
            return Err("gain_max_dbi must be finite".into());
        }
        Ok(())
    }

    /// Gain in dBi at local zenith angle `theta` and azimuth `phi` (degrees).
    pub fn gain_db(&self, theta_local_deg: f64, phi_local_deg: f64) -> f64 {
        let phi = wrap_pm180(phi_local_deg);
        let a_v = -(12.0 * ((theta_local_deg - 90.0) / self.theta_3db_deg).powi(2)).min(self.sla_v_db);
        let a_h = -(12.0 * (phi / self.phi_3db_deg).powi(2)).min(self.a_max_db);
        self.gain_max_dbi - (-(a_v + a_h)).min(self.a_max_db)
    }
}

/// Free function form of [`ElementPattern3gpp::gain_db`].
pub fn element_gain_3gpp(p: &ElementPattern3gpp, theta_local_deg: f64, phi_local_deg: f64) -> f64 {
    p.gain_db(theta_local_deg, phi_local_deg)
}

/// Cosine-power surrogate for a downward-facing patch element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PatchPattern {
    pub gain_max_dbi: f64,
    /// Exponent `q` of `cos^q`.
    pub cos_exponent: f64,
    /// Back-hemisphere floor `F`, in dB below the peak.
    pub back_floor_db: f64,
}

impl Default for PatchPattern {
    fn default() -> Self {
        Self {
            gain_max_dbi: 6.0,
            cos_exponent: 2.0,
            back_floor_db: 25.0,
        }
    }
}

impl PatchPattern {
    pub fn validate(&self) -> Result<(), String> {
        if !self.gain_max_dbi.is_finite() {
            return Err("gain_max_dbi must be finite".into());
        }
        if !(self.cos_exponent >= 0.0 && self.cos_exponent.is_finite()) {
            return Err(format!("cos_exponent must be >= 0, got {}", self.cos_exponent));
        }
        if !(self.back_floor_db >= 0.0 && self.back_floor_db.is_finite()) {
            return Err(format!("back_floor_db must be >= 0, got {}", self.back_floor_db));
        }
        Ok(())
    }

    /// Gain at angle `theta_from_normal_deg` off the element normal.
    /// The pattern is rotationally symmetric so `phi` is ignored.
    pub fn gain_db(&self, theta_from_normal_deg: f64, _phi_deg: f64) -> f64 {
        let floor = self.gain_max_dbi - self.back_floor_db;
        let c = theta_from_normal_deg.to_radians().cos();
        if theta_from_normal_deg.abs() >= 90.0 || c <= 0.0 {
            return floor;
        }
        (self.gain_max_dbi + self.cos_exponent * 10.0 * c.log10()).max(floor)
    }
}

pub fn patch_gain_surrogate(p: &PatchPattern, theta_local_deg: f64, phi_local_deg: f64) -> f64 {
    p.gain_db(theta_local_deg, phi_local_deg)
}

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("cannot read pattern file: {0}")]
    Io(#[from] std::io::Error),
    #[error("pattern file row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },
}

/// Gain table on an elevation × azimuth grid in the element's local frame
/// (elevation `90 - theta`, azimuth `phi`), bilinearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPattern {
    elevation_deg: Vec<f64>,
    azimuth_deg: Vec<f64>,
    /// Row-major, `gain_dbi[i * azimuth.len() + j]` at `(elevation[i], azimuth[j])`.
    gain_dbi: Vec<f64>,
}

const TABLE_GAIN_RANGE_DBI: (f64, f64) = (-100.0, 60.0);

impl TabulatedPattern {
    pub fn new(elevation_deg: Vec<f64>, azimuth_deg: Vec<f64>, gain_dbi: Vec<f64>) -> Result<Self, PatternError> {
        let err = |row, col, msg: String| PatternError::Parse { row, col, msg };
        check_axis(&elevation_deg, -90.0, 90.0, "elevation").map_err(|(i, m)| err(i + 2, 1, m))?;
        check_axis(&azimuth_deg, -180.0, 180.0, "azimuth").map_err(|(j, m)| err(1, j + 2, m))?;
        if gain_dbi.len() != elevation_deg.len() * azimuth_deg.len() {
            return Err(err(0, 0, "gain grid size does not match axes".into()));
        }
        for (k, g) in gain_dbi.iter().enumerate() {
            if !(g.is_finite() && (TABLE_GAIN_RANGE_DBI.0..=TABLE_GAIN_RANGE_DBI.1).contains(g)) {
                let (i, j) = (k / azimuth_deg.len(), k % azimuth_deg.len());
                return Err(err(i + 2, j + 2, format!("gain {g} dBi is not finite or out of range")));
            }
        }
        Ok(Self {
            elevation_deg,
            azimuth_deg,
            gain_dbi,
        })
    }

    /// Parses the CSV layout `el_deg\az_deg,<az...>` / `<el>,<gains...>`.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, PatternError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut azimuth = Vec::new();
        let mut elevation = Vec::new();
        let mut gains = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let row = r + 1;
            let rec = rec.map_err(|e| PatternError::Parse {
                row,
                col: 0,
                msg: e.to_string(),
            })?;
            let parse = |col: usize, s: &str| {
                s.parse::<f64>().map_err(|_| PatternError::Parse {
                    row,
                    col,
                    msg: format!("not a number: {s:?}"),
                })
            };
            if row == 1 {
                for (c, field) in rec.iter().enumerate().skip(1) {
                    azimuth.push(parse(c + 1, field)?);
                }
                continue;
            }
            if rec.len() != azimuth.len() + 1 {
                return Err(PatternError::Parse {
                    row,
                    col: rec.len(),
                    msg: format!("expected {} fields, found {}", azimuth.len() + 1, rec.len()),
                });
            }
            elevation.push(parse(1, &rec[0])?);
            for (c, field) in rec.iter().enumerate().skip(1) {
                gains.push(parse(c + 1, field)?);
            }
        }
        Self::new(elevation, azimuth, gains)
    }

    /// Bilinear lookup at local elevation/azimuth in degrees.
    pub fn gain_at(&self, elevation_deg: f64, azimuth_deg: f64) -> f64 {
        let el = elevation_deg.clamp(-90.0, 90.0);
        let az = wrap_pm180(azimuth_deg);
        let (i, ti) = bracket(&self.elevation_deg, el);
        let (j, tj) = bracket(&self.azimuth_deg, az);
        let n = self.azimuth_deg.len();
        let g = |a: usize, b: usize| self.gain_dbi[a * n + b];
        let lo = g(i, j) * (1.0 - tj) + g(i, j + 1) * tj;
        let hi = g(i + 1, j) * (1.0 - tj) + g(i + 1, j + 1) * tj;
        lo * (1.0 - ti) + hi * ti
    }

    /// Gain at a local direction in the `(theta, phi)` convention.
    pub fn gain_db(&self, theta_local_deg: f64, phi_local_deg: f64) -> f64 {
        self.gain_at(90.0 - theta_local_deg, phi_local_deg)
    }
}

fn check_axis(v: &[f64], lo: f64, hi: f64, name: &str) -> Result<(), (usize, String)> {
    if v.len() < 2 {
        return Err((0, format!("{name} grid needs at least two nodes")));
    }
    for (i, w) in v.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err((i + 1, format!("{name} grid is not strictly ascending at {}", w[1])));
        }
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err((0, format!("{name} grid contains non-finite values")));
    }
    if v[0] > lo || v[v.len() - 1] < hi {
        return Err((0, format!("{name} grid must cover [{lo}, {hi}]")));
    }
    Ok(())
}

/// Index of the lower node and fractional position for a sorted axis.
fn bracket(axis: &[f64], x: f64) -> (usize, f64) {
    let last = axis.len() - 2;
    let i = match axis.partition_point(|&a| a <= x) {
        0 => 0,
        k => (k - 1).min(last),
    };
    let t = ((x - axis[i]) / (axis[i + 1] - axis[i])).clamp(0.0, 1.0);
    (i, t)
}

pub fn load_tabulated_pattern<P: AsRef<Path>>(path: P) -> Result<TabulatedPattern, PatternError> {
    TabulatedPattern::from_reader(File::open(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    ThreeGpp(ElementPattern3gpp),
    Patch(PatchPattern),
    Tabulated(Arc<TabulatedPattern>),
    Isotropic,
}

impl Element {
    /// Gain (dBi) in the local `(theta, phi)` convention.
    pub fn gain_db(&self, theta_local_deg: f64, phi_local_deg: f64) -> f64 {
        match self {
            Element::ThreeGpp(p) => p.gain_db(theta_local_deg, phi_local_deg),
            Element::Patch(p) => {
                let (t, f) = (theta_local_deg.to_radians(), phi_local_deg.to_radians());
                let off_normal = (t.sin() * f.cos()).clamp(-1.0, 1.0).acos().to_degrees();
                p.gain_db(off_normal, 0.0)
            }
            Element::Tabulated(t) => t.gain_db(theta_local_deg, phi_local_deg),
            Element::Isotropic => 0.0,
        }
    }

    pub fn max_gain_db(&self) -> f64 {
        match self {
            Element::ThreeGpp(p) => p.gain_max_dbi,
            Element::Patch(p) => p.gain_max_dbi,
            Element::Tabulated(t) => t.gain_dbi.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Element::Isotropic => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    pub element_spacing_wavelengths: f64,
    pub element: Element,
}

impl ArrayConfig {
    /// 8×8 URA of 3GPP elements.
    pub fn gnb_default() -> Self {
        Self {
            rows: 8,
            cols: 8,
            element_spacing_wavelengths: 0.5,
            element: Element::ThreeGpp(ElementPattern3gpp::default()),
        }
    }

    /// 4×4 URA of patch-surrogate elements.
    pub fn uav_default() -> Self {
        Self {
            rows: 4,
            cols: 4,
            element_spacing_wavelengths: 0.5,
            element: Element::Patch(PatchPattern::default()),
        }
    }

    pub fn with_element(mut self, element: Element) -> Self {
        self.element = element;
        self
    }

    pub fn num_elements(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub boresight_azimuth_deg: f64,
    /// Tilt above the horizon; negative is downtilt.
    pub boresight_elevation_deg: f64,
}

impl Orientation {
    /// Pointing straight down.
    pub const NADIR: Orientation = Orientation {
        boresight_azimuth_deg: 0.0,
        boresight_elevation_deg: -90.0,
    };

    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Self {
            boresight_azimuth_deg: azimuth_deg,
            boresight_elevation_deg: elevation_deg,
        }
    }
}

fn unit_from_az_el(az_deg: f64, el_deg: f64) -> [f64; 3] {
    let (az, el) = (az_deg.to_radians(), el_deg.to_radians());
    [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()]
}

/// Global direction to local unit vector.
pub fn global_to_local_vector(o: &Orientation, g: [f64; 3]) -> [f64; 3] {
    let (s, c) = o.boresight_azimuth_deg.to_radians().sin_cos();
    let (st, ct) = o.boresight_elevation_deg.to_radians().sin_cos();
    let xp = c * g[0] + s * g[1];
    let yp = -s * g[0] + c * g[1];
    [ct * xp + st * g[2], yp, -st * xp + ct * g[2]]
}

fn local_to_global_vector(o: &Orientation, l: [f64; 3]) -> [f64; 3] {
    let (s, c) = o.boresight_azimuth_deg.to_radians().sin_cos();
    let (st, ct) = o.boresight_elevation_deg.to_radians().sin_cos();
    let xp = ct * l[0] - st * l[2];
    let z = st * l[0] + ct * l[2];
    [c * xp - s * l[1], s * xp + c * l[1], z]
}

/// Global `(azimuth, elevation)` to local `(theta, phi)`, all in degrees.
pub fn global_to_local(o: &Orientation, az_global_deg: f64, el_global_deg: f64) -> (f64, f64) {
    let l = global_to_local_vector(o, unit_from_az_el(az_global_deg, el_global_deg));
    let theta = l[0].hypot(l[1]).atan2(l[2]).to_degrees();
    let phi = if l[0] == 0.0 && l[1] == 0.0 {
        0.0
    } else {
        l[1].atan2(l[0]).to_degrees()
    };
    (theta, phi)
}

/// Inverse of [`global_to_local`]; azimuth returned in `[0, 360)`.
pub fn local_to_global(o: &Orientation, theta_local_deg: f64, phi_local_deg: f64) -> (f64, f64) {
    let (t, f) = (theta_local_deg.to_radians(), phi_local_deg.to_radians());
    let g = local_to_global_vector(o, [t.sin() * f.cos(), t.sin() * f.sin(), t.cos()]);
    let el = g[2].atan2(g[0].hypot(g[1])).to_degrees();
    let az = if g[0] == 0.0 && g[1] == 0.0 {
        0.0
    } else {
        crate::geometry::normalize_azimuth(g[1].atan2(g[0]).to_degrees())
    };
    (az, el)
}

/// URA response for a local direction: unit-modulus entries
/// `exp(j 2π d (m v + n u))` where `m` indexes rows (local `z`), `n`
/// indexes columns (local `y`), `u = sinθ sinφ` and `v = cosθ`.
/// Element `(m, n)` is at index `m * cols + n`.
pub fn steering_vector(a: &ArrayConfig, theta_local_deg: f64, phi_local_deg: f64) -> Vec<Complex64> {
    let (t, f) = (theta_local_deg.to_radians(), phi_local_deg.to_radians());
    let u = t.sin() * f.sin();
    let v = t.cos();
    let k = 2.0 * PI * a.element_spacing_wavelengths;
    let row_phase: Vec<Complex64> = (0..a.rows).map(|m| Complex64::cis(k * m as f64 * v)).collect();
    let col_phase: Vec<Complex64> = (0..a.cols).map(|n| Complex64::cis(k * n as f64 * u)).collect();
    let mut out = Vec::with_capacity(a.num_elements());
    for r in &row_phase {
        out.extend(col_phase.iter().map(|c| r * c));
    }
    out
}

pub(crate) fn wrap_pm180(a: f64) -> f64 {
    let w = (a + 180.0).rem_euclid(360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn three_gpp_anchor_values() {
        let p = ElementPattern3gpp::default();
        assert_eq!(p.gain_db(90.0, 0.0), 8.0);
        assert_abs_diff_eq!(p.gain_db(90.0, 32.5), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.gain_db(90.0, -32.5), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.gain_db(90.0, 180.0), -22.0, epsilon = 1e-12);
        // vertical half-power point
        assert_abs_diff_eq!(p.gain_db(90.0 + 32.5, 0.0), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn patch_surrogate_shape() {
        let p = PatchPattern::default();
        assert_eq!(p.gain_db(0.0, 0.0), 6.0);
        assert_eq!(p.gain_db(90.0, 0.0), 6.0 - 25.0);
        assert_eq!(p.gain_db(150.0, 0.0), 6.0 - 25.0);
        assert_abs_diff_eq!(p.gain_db(60.0, 0.0), 6.0 + 20.0 * 0.5f64.log10(), epsilon = 1e-12);
    }

    #[test]
    fn patch_element_faces_local_boresight() {
        let e = Element::Patch(PatchPattern::default());
        assert_eq!(e.gain_db(90.0, 0.0), 6.0);
        assert_eq!(e.gain_db(90.0, 180.0), -19.0);
    }

    fn constant_table(value: f64) -> TabulatedPattern {
        TabulatedPattern::new(vec![-90.0, 90.0], vec![-180.0, 180.0], vec![value; 4]).unwrap()
    }

    #[test]
    fn tabulated_lookup_examples() {
        let t = constant_table(0.0);
        assert_eq!(t.gain_at(12.0, -77.0), 0.0);
        let t = TabulatedPattern::new(vec![-90.0, 0.0, 90.0], vec![-180.0, 0.0, 180.0], vec![
            1.0, 2.0, 3.0, //
            4.0, 5.0, 6.0, //
            7.0, 8.0, 9.0,
        ])
        .unwrap();
        assert_eq!(t.gain_at(0.0, 0.0), 5.0);
        assert_eq!(t.gain_at(90.0, 180.0), 9.0);
        let mid = TabulatedPattern::new(vec![-90.0, 90.0], vec![-180.0, 180.0], vec![0.0, 0.0, 2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(mid.gain_at(0.0, 0.0), 1.0);
    }

    #[test]
    fn tabulated_csv_parsing_and_errors() {
        let text = "el_deg\\az_deg,-180,0,180\n-90,0,0,0\n0,1,2,1\n90,0,0,0\n";
        let t = TabulatedPattern::from_reader(text.as_bytes()).unwrap();
        assert_eq!(t.gain_at(0.0, 0.0), 2.0);
        assert_abs_diff_eq!(t.gain_db(90.0, 0.0), 2.0);

        let bad_num = "el_deg\\az_deg,-180,180\n-90,0,x\n90,0,0\n";
        match TabulatedPattern::from_reader(bad_num.as_bytes()) {
            Err(PatternError::Parse { row: 2, col: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let non_monotone = "el_deg\\az_deg,-180,180,170\n-90,0,0,0\n90,0,0,0\n";
        assert!(matches!(
            TabulatedPattern::from_reader(non_monotone.as_bytes()),
            Err(PatternError::Parse { row: 1, .. })
        ));
        let huge = "el_deg\\az_deg,-180,180\n-90,0,0\n90,0,1e9\n";
        assert!(matches!(
            TabulatedPattern::from_reader(huge.as_bytes()),
            Err(PatternError::Parse { row: 3, col: 3, .. })
        ));
        let short = "el_deg\\az_deg,-180,180\n-45,0,0\n90,0,0\n";
        assert!(TabulatedPattern::from_reader(short.as_bytes()).is_err());
    }

    #[test]
    fn steering_vector_examples() {
        let a = ArrayConfig::gnb_default();
        let sv = steering_vector(&a, 90.0, 0.0);
        assert_eq!(sv.len(), 64);
        for x in &sv {
            assert_abs_diff_eq!(x.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(x.im, 0.0, epsilon = 1e-12);
        }
        // matched single direction: |aᴴa|²/‖a‖² = N
        let s = steering_vector(&a, 70.0, 20.0);
        let ip: Complex64 = s.iter().map(|x| x.conj() * x).sum();
        let norm2: f64 = s.iter().map(|x| x.norm_sqr()).sum();
        assert_abs_diff_eq!(10.0 * (ip.norm_sqr() / norm2).log10(), 10.0 * 64f64.log10(), epsilon = 1e-9);
        assert_abs_diff_eq!(10.0 * 64f64.log10(), 18.06, epsilon = 0.01);
    }

    #[test]
    fn rotation_examples() {
        let o = Orientation::new(0.0, 0.0);
        let (t, p) = global_to_local(&o, 0.0, 0.0);
        assert_abs_diff_eq!(t, 90.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p, 0.0, epsilon = 1e-12);
        let o = Orientation::new(0.0, -12.0);
        let (t, p) = global_to_local(&o, 0.0, -12.0);
        assert_abs_diff_eq!(t, 90.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p, 0.0, epsilon = 1e-9);
        let (t, p) = global_to_local(&Orientation::NADIR, 123.0, -90.0);
        assert_abs_diff_eq!(t, 90.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p, 0.0, epsilon = 1e-9);
        // sector rotated to 120°: a direction at azimuth 120 is boresight
        let (t, p) = global_to_local(&Orientation::new(120.0, 0.0), 120.0, 0.0);
        assert_abs_diff_eq!(t, 90.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p, 0.0, epsilon = 1e-9);
        // directly behind the sector
        let (_, p) = global_to_local(&Orientation::new(120.0, 0.0), 300.0, 0.0);
        assert_abs_diff_eq!(p.abs(), 180.0, epsilon = 1e-9);
    }

    fn angles() -> impl Strategy<Value = (f64, f64)> {
        (0.0..360.0f64, -89.0..89.0f64)
    }

    proptest! {
        #[test]
        fn three_gpp_symmetry_and_range(theta in 0.0..180.0f64, phi in -180.0..180.0f64) {
            let p = ElementPattern3gpp::default();
            let g = p.gain_db(theta, phi);
            prop_assert!((g - p.gain_db(theta, -phi)).abs() < 1e-12);
            prop_assert!((g - p.gain_db(180.0 - theta, phi)).abs() < 1e-12);
            prop_assert!(g <= 8.0 && g >= 8.0 - 30.0);
        }

        #[test]
        fn patch_range(theta in 0.0..180.0f64, phi in -180.0..180.0f64) {
            let g = PatchPattern::default().gain_db(theta, phi);
            prop_assert!((6.0 - 25.0..=6.0).contains(&g));
        }

        #[test]
        fn steering_entries_unit_modulus(theta in 0.0..180.0f64, phi in -180.0..180.0f64) {
            let a = ArrayConfig::uav_default();
            let sv = steering_vector(&a, theta, phi);
            prop_assert_eq!(sv.len(), 16);
            for x in &sv { prop_assert!((x.norm() - 1.0).abs() < 1e-12); }
        }

        #[test]
        fn round_trip_is_identity(o in angles(), d in angles()) {
            let o = Orientation::new(o.0, o.1);
            let (t, p) = global_to_local(&o, d.0, d.1);
            let (az, el) = local_to_global(&o, t, p);
            prop_assert!((el - d.1).abs() < 1e-9);
            prop_assert!(wrap_pm180(az - d.0).abs() < 1e-9);
        }

        #[test]
        fn rotation_preserves_dot_products(o in angles(), a in angles(), b in angles()) {
            let o = Orientation::new(o.0, o.1);
            let (ga, gb) = (unit_from_az_el(a.0, a.1), unit_from_az_el(b.0, b.1));
            let (la, lb) = (global_to_local_vector(&o, ga), global_to_local_vector(&o, gb));
            let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
            prop_assert!((dot(ga, gb) - dot(la, lb)).abs() < 1e-9);
        }
    }
}
