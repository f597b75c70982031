//! Long-term beamforming and uplink SNR.
//!
//! Each transmit/receive side picks the dominant eigenvector of its
//! long-term channel covariance. Under independent uniform path phases the
//! covariance is `Q = Σ_ℓ w_ℓ a_ℓ a_ℓᴴ` with `w_ℓ` the linear path power
//! including both element gains. Path powers then add non-coherently after
//! beamforming, so for a unit-norm pair `(w_tx, w_rx)` the received power
//! is `P_tx Σ_ℓ w_ℓ |w_rxᴴ a_ℓ,rx|² |w_txᴴ a_ℓ,tx|²`. Steering vectors carry
//! norm `√N`, so a matched single path collects the full `N_tx N_rx` array
//! gain on top of the element maxima.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antenna::{steering_vector, ArrayConfig, Orientation};
use crate::channel::{ChannelSample, LinkState, PathComponent};

/// Thermal noise density at 290 K.
pub const THERMAL_NOISE_DENSITY_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub thermal_noise_density_dbm_hz: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power_dbm: 23.0,
            bandwidth_hz: 400e6,
            noise_figure_db: 6.0,
            thermal_noise_density_dbm_hz: THERMAL_NOISE_DENSITY_DBM_HZ,
        }
    }
}

impl LinkBudget {
    pub fn noise_power_dbm(&self) -> f64 {
        self.thermal_noise_density_dbm_hz + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(format!("bandwidth_hz must be positive, got {}", self.bandwidth_hz));
        }
        for (name, v) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("noise_figure_db", self.noise_figure_db),
            ("thermal_noise_density_dbm_hz", self.thermal_noise_density_dbm_hz),
        ] {
            if !v.is_finite() {
                return Err(format!("{name} must be finite"));
            }
        }
        if self.noise_figure_db < 0.0 {
            return Err("noise_figure_db must be >= 0".into());
        }
        Ok(())
    }
}

/// An array and the direction it faces.
#[derive(Debug, Clone, Copy)]
pub struct ArrayMount<'a> {
    pub array: &'a ArrayConfig,
    pub orientation: Orientation,
}

impl<'a> ArrayMount<'a> {
    pub fn new(array: &'a ArrayConfig, orientation: Orientation) -> Self {
        Self { array, orientation }
    }
}

/// A path with the element gains and array responses at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedPath {
    pub path: PathComponent,
    pub tx_element_gain_db: f64,
    pub rx_element_gain_db: f64,
    pub tx_steering: Vec<Complex64>,
    pub rx_steering: Vec<Complex64>,
}

impl DressedPath {
    pub fn weight_db(&self) -> f64 {
        self.path.gain_db + self.tx_element_gain_db + self.rx_element_gain_db
    }

    pub fn weight(&self) -> f64 {
        10f64.powf(self.weight_db() / 10.0)
    }

    fn steering(&self, side: Side) -> &[Complex64] {
        match side {
            Side::Tx => &self.tx_steering,
            Side::Rx => &self.rx_steering,
        }
    }
}

pub fn dress_paths(sample: &ChannelSample, tx: ArrayMount<'_>, rx: ArrayMount<'_>) -> Vec<DressedPath> {
    sample
        .paths
        .iter()
        .map(|p| {
            let (tt, tp) = crate::antenna::global_to_local(&tx.orientation, p.aod_azimuth_deg, p.aod_elevation_deg);
            let (rt, rp) = crate::antenna::global_to_local(&rx.orientation, p.aoa_azimuth_deg, p.aoa_elevation_deg);
            DressedPath {
                path: *p,
                tx_element_gain_db: tx.array.element.gain_db(tt, tp),
                rx_element_gain_db: rx.array.element.gain_db(rt, rp),
                tx_steering: steering_vector(tx.array, tt, tp),
                rx_steering: steering_vector(rx.array, rt, rp),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Tx,
    Rx,
}

#[derive(Debug, Error, PartialEq)]
pub enum LinkError {
    #[error("covariance needs at least one path")]
    NoPaths,
}

/// A Hermitian linear map `y = Q x`.
pub trait HermitianOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
    fn trace(&self) -> f64;
}

/// Dense row-major Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds from row-major entries. The caller guarantees Hermitian
    /// symmetry; [`HermitianMatrix::hermitian_residual`] measures it.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data has the wrong length");
        Self { dim, data }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// `self += w a aᴴ`.
    pub fn add_outer(&mut self, w: f64, a: &[Complex64]) {
        let n = self.dim;
        for i in 0..n {
            let wi = a[i] * w;
            let row = &mut self.data[i * n..(i + 1) * n];
            for (r, aj) in row.iter_mut().zip(a) {
                *r += wi * aj.conj();
            }
        }
    }

    /// `max |Q - Qᴴ|` over entries.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl HermitianOperator for HermitianMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim;
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            *yi = self.data[i * n..(i + 1) * n].iter().zip(x).map(|(q, xj)| q * xj).sum();
        }
    }

    fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }
}

/// Long-term covariance kept in factored form `Σ w_ℓ a_ℓ a_ℓᴴ`.
#[derive(Debug, Clone)]
pub struct Covariance<'a> {
    dim: usize,
    weights: Vec<f64>,
    vectors: Vec<&'a [Complex64]>,
}

impl<'a> Covariance<'a> {
    pub fn new(dim: usize, terms: impl IntoIterator<Item = (f64, &'a [Complex64])>) -> Self {
        let (weights, vectors) = terms.into_iter().unzip();
        Self { dim, weights, vectors }
    }

    pub fn rank_bound(&self) -> usize {
        self.weights.len()
    }

    pub fn to_dense(&self) -> HermitianMatrix {
        let mut m = HermitianMatrix::zeros(self.dim);
        for (w, a) in self.weights.iter().zip(&self.vectors) {
            m.add_outer(*w, a);
        }
        m
    }
}

impl Covariance<'_> {
    /// `G = W^½ Aᴴ A W^½`, which shares the nonzero spectrum of `Q = A W Aᴴ`.
    pub fn gram(&self) -> HermitianMatrix {
        let l = self.weights.len();
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let mut g = HermitianMatrix::zeros(l);
        for i in 0..l {
            for j in i..l {
                let ip: Complex64 = self.vectors[i].iter().zip(self.vectors[j]).map(|(a, b)| a.conj() * b).sum();
                let v = ip * (sw[i] * sw[j]);
                g.data[i * l + j] = v;
                g.data[j * l + i] = v.conj();
            }
        }
        g
    }

    /// Dominant eigenpair of `Q`, iterating on whichever of `Q` and its Gram
    /// matrix is smaller. The residual is always measured on `Q`.
    pub fn dominant_eigenpair(&self, solver: &PowerIteration) -> Result<Eigenpair, EigenError> {
        let l = self.weights.len();
        if l >= self.dim {
            return solver.solve(self);
        }
        let (small, converged) = match solver.solve(&self.gram()) {
            Ok(p) => (p, true),
            Err(EigenError::NotConverged(p)) => (p, false),
            Err(e) => return Err(e),
        };
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim];
        for ((w, a), u) in self.weights.iter().zip(&self.vectors).zip(&small.vector) {
            let c = u * w.sqrt();
            for (vi, ai) in v.iter_mut().zip(a.iter()) {
                *vi += ai * c;
            }
        }
        let nv = norm(&v);
        if nv == 0.0 {
            return solver.solve(self);
        }
        v.iter_mut().for_each(|z| *z /= nv);
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply(&v, &mut y);
        let value: f64 = v.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum();
        let residual = y.iter().zip(&v).map(|(yi, vi)| (yi - vi * value).norm_sqr()).sum::<f64>().sqrt();
        let pair = Eigenpair {
            value,
            vector: v,
            iterations: small.iterations,
            relative_residual: residual / value.abs().max(f64::MIN_POSITIVE),
        };
        if converged && pair.relative_residual <= solver.residual_tol {
            Ok(pair)
        } else {
            Err(EigenError::NotConverged(pair))
        }
    }
}

impl HermitianOperator for Covariance<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (w, a) in self.weights.iter().zip(&self.vectors) {
            let c: Complex64 = a.iter().zip(x).map(|(ai, xi)| ai.conj() * xi).sum::<Complex64>() * *w;
            for (yi, ai) in y.iter_mut().zip(a.iter()) {
                *yi += ai * c;
            }
        }
    }

    fn trace(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.vectors)
            .map(|(w, a)| w * a.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }
}

pub fn long_term_covariance(dressed: &[DressedPath], side: Side) -> Result<Covariance<'_>, LinkError> {
    let first = dressed.first().ok_or(LinkError::NoPaths)?;
    let dim = first.steering(side).len();
    Ok(Covariance::new(dim, dressed.iter().map(|d| (d.weight(), d.steering(side)))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    /// Unit norm.
    pub vector: Vec<Complex64>,
    pub iterations: usize,
    /// `‖Qv − λv‖ / λ` (zero for a zero operator).
    pub relative_residual: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum EigenError {
    #[error("power iteration did not converge in {} iterations (relative residual {:.3e})", .0.iterations, .0.relative_residual)]
    NotConverged(Eigenpair),
    #[error("operator has dimension zero")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    /// Relative eigenvalue change that ends the iteration.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative residual the returned pair must meet.
    pub residual_tol: f64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 1000,
            residual_tol: 1e-6,
        }
    }
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl PowerIteration {
    pub fn solve<O: HermitianOperator + ?Sized>(&self, q: &O) -> Result<Eigenpair, EigenError> {
        let n = q.dim();
        if n == 0 {
            return Err(EigenError::Empty);
        }
        let trace = q.trace();
        let mut x = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        q.apply(&x, &mut y);
        // Restart from canonical basis vectors while the start is (numerically) in the null space.
        let mut k = 0;
        while norm(&y) <= 1e-12 * trace && k < n {
            x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            x[k] = Complex64::new(1.0, 0.0);
            q.apply(&x, &mut y);
            k += 1;
        }
        if !(trace > 0.0) || norm(&y) == 0.0 {
            return Ok(Eigenpair {
                value: 0.0,
                vector: x,
                iterations: 0,
                relative_residual: 0.0,
            });
        }

        let mut prev = f64::NAN;
        let mut last = (0.0, f64::INFINITY);
        for it in 1..=self.max_iter {
            if it > 1 {
                q.apply(&x, &mut y);
            }
            let lambda: f64 = x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum();
            let residual = y
                .iter()
                .zip(&x)
                .map(|(yi, xi)| (yi - xi * lambda).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let rel_res = residual / lambda.abs().max(f64::MIN_POSITIVE);
            let settled = (lambda - prev).abs() <= self.tol * lambda.abs();
            if (settled && rel_res <= self.residual_tol) || rel_res <= 1e-14 {
                return Ok(Eigenpair {
                    value: lambda,
                    vector: x,
                    iterations: it,
                    relative_residual: rel_res,
                });
            }
            prev = lambda;
            last = (lambda, rel_res);
            let ny = norm(&y);
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = yi / ny;
            }
        }
        Err(EigenError::NotConverged(Eigenpair {
            value: last.0,
            vector: x,
            iterations: self.max_iter,
            relative_residual: last.1,
        }))
    }
}

/// Power iteration from the normalized all-ones start.
pub fn dominant_eigenvector<O: HermitianOperator + ?Sized>(
    q: &O,
    tol: f64,
    max_iter: usize,
) -> Result<Eigenpair, EigenError> {
    PowerIteration {
        tol,
        max_iter,
        ..Default::default()
    }
    .solve(q)
}

fn beam_gain(w: &[Complex64], a: &[Complex64]) -> f64 {
    w.iter().zip(a).map(|(wi, ai)| wi.conj() * ai).sum::<Complex64>().norm_sqr()
}

/// Linear received power per path relative to `P_tx`, after beamforming.
pub fn beamformed_path_powers(dressed: &[DressedPath], w_tx: &[Complex64], w_rx: &[Complex64]) -> Vec<f64> {
    dressed
        .iter()
        .map(|d| d.weight() * beam_gain(w_rx, &d.rx_steering) * beam_gain(w_tx, &d.tx_steering))
        .collect()
}

/// Uplink SNR in dB; `-inf` without paths.
pub fn beamformed_snr(dressed: &[DressedPath], w_tx: &[Complex64], w_rx: &[Complex64], budget: &LinkBudget) -> f64 {
    if dressed.is_empty() {
        return f64::NEG_INFINITY;
    }
    let total: f64 = beamformed_path_powers(dressed, w_tx, w_rx).iter().sum();
    budget.tx_power_dbm + 10.0 * total.log10() - budget.noise_power_dbm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkResult {
    /// `-inf` for outage.
    pub snr_db: f64,
    pub state: LinkState,
    pub strongest_path_is_los: bool,
    /// Global elevation AOA at the gNB of the strongest beamformed path.
    pub strongest_path_aoa_elevation_deg: Option<f64>,
    /// Both eigen-solves met the residual target.
    pub eigen_converged: bool,
    pub max_relative_residual: f64,
}

impl LinkResult {
    pub fn outage() -> Self {
        Self {
            snr_db: f64::NEG_INFINITY,
            state: LinkState::Outage,
            strongest_path_is_los: false,
            strongest_path_aoa_elevation_deg: None,
            eigen_converged: true,
            max_relative_residual: 0.0,
        }
    }

    pub fn is_outage(&self) -> bool {
        self.state == LinkState::Outage || self.snr_db == f64::NEG_INFINITY
    }
}

/// Accepts a non-converged pair; the caller sees it through `eigen_converged`.
fn solve_accepting(q: &Covariance<'_>, solver: &PowerIteration) -> Result<(Eigenpair, bool), LinkError> {
    match q.dominant_eigenpair(solver) {
        Ok(p) => Ok((p, true)),
        Err(EigenError::NotConverged(p)) => Ok((p, false)),
        Err(EigenError::Empty) => Err(LinkError::NoPaths),
    }
}

/// Dress, build both covariances, beamform on their dominant eigenvectors
/// and score the link.
pub fn evaluate_link(
    sample: &ChannelSample,
    tx: ArrayMount<'_>,
    rx: ArrayMount<'_>,
    budget: &LinkBudget,
    solver: &PowerIteration,
) -> Result<LinkResult, LinkError> {
    if sample.state == LinkState::Outage || sample.paths.is_empty() {
        return Ok(LinkResult::outage());
    }
    let dressed = dress_paths(sample, tx, rx);
    let q_tx = long_term_covariance(&dressed, Side::Tx)?;
    let q_rx = long_term_covariance(&dressed, Side::Rx)?;
    let (e_tx, ok_tx) = solve_accepting(&q_tx, solver)?;
    let (e_rx, ok_rx) = solve_accepting(&q_rx, solver)?;
    let powers = beamformed_path_powers(&dressed, &e_tx.vector, &e_rx.vector);
    let total: f64 = powers.iter().sum();
    let snr_db = budget.tx_power_dbm + 10.0 * total.log10() - budget.noise_power_dbm();
    let strongest = powers
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((i, p)),
        })
        .map(|(i, _)| &dressed[i].path);
    Ok(LinkResult {
        snr_db,
        state: sample.state,
        strongest_path_is_los: strongest.is_some_and(|p| p.is_los),
        strongest_path_aoa_elevation_deg: strongest.map(|p| p.aoa_elevation_deg),
        eigen_converged: ok_tx && ok_rx,
        max_relative_residual: e_tx.relative_residual.max(e_rx.relative_residual),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antenna::{Element, ElementPattern3gpp};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path(gain_db: f64, aoa: (f64, f64), aod: (f64, f64), is_los: bool) -> PathComponent {
        PathComponent {
            gain_db,
            delay_ns: 400.0,
            aoa_azimuth_deg: aoa.0,
            aoa_elevation_deg: aoa.1,
            aod_azimuth_deg: aod.0,
            aod_elevation_deg: aod.1,
            is_los,
        }
    }

    #[test]
    fn gram_reduction_matches_direct_solve() {
        let array = ArrayConfig::gnb_default();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let vecs: Vec<Vec<Complex64>> = (0..3)
            .map(|_| crate::antenna::steering_vector(&array, rng.random_range(20.0..160.0), rng.random_range(-80.0..80.0)))
            .collect();
        let weights = [1.0, 0.4, 0.05];
        let q = Covariance::new(64, weights.iter().copied().zip(vecs.iter().map(|v| v.as_slice())));
        assert_eq!(q.rank_bound(), 3);
        let solver = PowerIteration::default();
        let reduced = q.dominant_eigenpair(&solver).unwrap();
        let direct = solver.solve(&q.to_dense()).unwrap();
        assert!((reduced.value - direct.value).abs() <= 1e-9 * direct.value);
        assert!(reduced.relative_residual <= 1e-6);
        let overlap: Complex64 = reduced.vector.iter().zip(&direct.vector).map(|(a, b)| a.conj() * b).sum();
        assert_abs_diff_eq!(overlap.norm(), 1.0, epsilon = 1e-6);
    }

    fn sample(paths: Vec<PathComponent>) -> ChannelSample {
        let state = if paths.iter().any(|p| p.is_los) { LinkState::Los } else { LinkState::Nlos };
        ChannelSample {
            state,
            paths,
            clamped_paths: 0,
        }
    }

    fn mounts() -> (ArrayConfig, ArrayConfig) {
        (ArrayConfig::uav_default(), ArrayConfig::gnb_default())
    }

    const SECTOR: Orientation = Orientation {
        boresight_azimuth_deg: 30.0,
        boresight_elevation_deg: -12.0,
    };

    #[test]
    fn noise_floor_with_defaults() {
        // -174 + 10 log10(4e8) + 6, evaluated by hand: 10 log10(4e8) = 86.0206
        assert_abs_diff_eq!(LinkBudget::default().noise_power_dbm(), -81.9794, epsilon = 1e-4);
    }

    #[test]
    fn boresight_path_collects_element_maxima() {
        let (uav, gnb) = mounts();
        let s = sample(vec![path(-100.0, (30.0, -12.0), (0.0, -90.0), true)]);
        let d = dress_paths(&s, ArrayMount::new(&uav, Orientation::NADIR), ArrayMount::new(&gnb, SECTOR));
        assert_eq!(d.len(), 1);
        assert_abs_diff_eq!(d[0].tx_element_gain_db, 6.0, epsilon = 1e-9);
        assert_abs_diff_eq!(d[0].rx_element_gain_db, 8.0, epsilon = 1e-9);
        assert_eq!(d[0].tx_steering.len(), 16);
        assert_eq!(d[0].rx_steering.len(), 64);
    }

    #[test]
    fn back_lobe_is_front_to_back_below_peak() {
        let (uav, gnb) = mounts();
        let flat = Orientation::new(30.0, 0.0);
        let s = sample(vec![path(-100.0, (210.0, 0.0), (0.0, -90.0), true)]);
        let d = dress_paths(&s, ArrayMount::new(&uav, Orientation::NADIR), ArrayMount::new(&gnb, flat));
        assert_abs_diff_eq!(d[0].rx_element_gain_db, 8.0 - 30.0, epsilon = 1e-9);
    }

    #[test]
    fn single_path_snr_matches_scalar_budget() {
        let (uav, gnb) = mounts();
        let budget = LinkBudget::default();
        let pl = 101.4;
        let s = sample(vec![path(-pl, (30.0, -12.0), (0.0, -90.0), true)]);
        let r = evaluate_link(
            &s,
            ArrayMount::new(&uav, Orientation::NADIR),
            ArrayMount::new(&gnb, SECTOR),
            &budget,
            &PowerIteration::default(),
        )
        .unwrap();
        let oracle = 23.0 - pl + 8.0 + 6.0 + 10.0 * 64f64.log10() + 10.0 * 16f64.log10() + 81.97940008672037;
        assert_abs_diff_eq!(r.snr_db, oracle, epsilon = 1e-6);
        assert!(r.strongest_path_is_los);
        assert!(r.eigen_converged);
    }

    #[test]
    fn orthogonal_beams_receive_nothing() {
        let (uav, gnb) = mounts();
        let s = sample(vec![path(-100.0, (30.0, -12.0), (0.0, -90.0), true)]);
        let d = dress_paths(&s, ArrayMount::new(&uav, Orientation::NADIR), ArrayMount::new(&gnb, SECTOR));
        // the all-ones response is orthogonal to a vector alternating in sign along a row
        let alt = |n: usize, cols: usize| -> Vec<Complex64> {
            (0..n)
                .map(|i| Complex64::new(if (i % cols) % 2 == 0 { 1.0 } else { -1.0 } / (n as f64).sqrt(), 0.0))
                .collect()
        };
        let snr = beamformed_snr(&d, &alt(16, 4), &alt(64, 8), &LinkBudget::default());
        assert!(snr < -200.0 || snr == f64::NEG_INFINITY);
        assert_eq!(beamformed_snr(&[], &alt(16, 4), &alt(64, 8), &LinkBudget::default()), f64::NEG_INFINITY);
    }

    #[test]
    fn reflection_can_beat_the_downtilted_los() {
        let (uav, gnb) = mounts();
        // LOS arrives steeply from above where the downtilted element is weak;
        // a slightly weaker reflection arrives near boresight.
        let s = sample(vec![
            path(-100.0, (30.0, 70.0), (210.0, -70.0), true),
            path(-106.0, (30.0, -10.0), (210.0, -60.0), false),
        ]);
        let r = evaluate_link(
            &s,
            ArrayMount::new(&uav, Orientation::NADIR),
            ArrayMount::new(&gnb, SECTOR),
            &LinkBudget::default(),
            &PowerIteration::default(),
        )
        .unwrap();
        assert!(!r.strongest_path_is_los);
        assert_eq!(r.strongest_path_aoa_elevation_deg, Some(-10.0));
    }

    #[test]
    fn outage_gives_sentinel() {
        let (uav, gnb) = mounts();
        let r = evaluate_link(
            &ChannelSample::outage(),
            ArrayMount::new(&uav, Orientation::NADIR),
            ArrayMount::new(&gnb, SECTOR),
            &LinkBudget::default(),
            &PowerIteration::default(),
        )
        .unwrap();
        assert!(r.is_outage());
        assert_eq!(r.snr_db, f64::NEG_INFINITY);
    }

    #[test]
    fn covariance_examples() {
        let (uav, gnb) = mounts();
        let s = sample(vec![path(-90.0, (30.0, -12.0), (0.0, -90.0), true)]);
        let d = dress_paths(&s, ArrayMount::new(&uav, Orientation::NADIR), ArrayMount::new(&gnb, SECTOR));
        let q = long_term_covariance(&d, Side::Rx).unwrap();
        let dense = q.to_dense();
        let w = d[0].weight();
        assert_abs_diff_eq!(dense.trace() / (w * 64.0), 1.0, epsilon = 1e-12);
        assert!(dense.hermitian_residual() <= 1e-12 * dense.max_abs());
        let e = dominant_eigenvector(&q, 1e-9, 1000).unwrap();
        assert_abs_diff_eq!(e.value / (w * 64.0), 1.0, epsilon = 1e-9);
        assert!(long_term_covariance(&[], Side::Tx).is_err());
    }

    #[test]
    fn orthogonal_paths_give_equal_eigenvalues() {
        // two columns of the 4x4 DFT-like basis: broadside and a π phase ramp
        let a1: Vec<Complex64> = (0..4).map(|_| Complex64::new(1.0, 0.0)).collect();
        let a2: Vec<Complex64> = (0..4).map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        let q = Covariance::new(4, [(2.0, a1.as_slice()), (2.0, a2.as_slice())]).to_dense();
        let ev = dense_eigenvalues(&q);
        assert_abs_diff_eq!(ev[0], 8.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ev[1], 8.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ev[2], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn identity_has_unit_eigenvalue() {
        let e = dominant_eigenvector(&HermitianMatrix::identity(5), 1e-9, 1000).unwrap();
        assert_abs_diff_eq!(e.value, 1.0, epsilon = 1e-12);
        assert!(e.relative_residual <= 1e-6);
        assert_abs_diff_eq!(norm(&e.vector), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn null_space_start_restarts() {
        // Q = b bᴴ with b orthogonal to the all-ones vector
        let b = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)];
        let q = Covariance::new(3, [(1.0, &b[..])]);
        let e = dominant_eigenvector(&q, 1e-9, 1000).unwrap();
        assert_abs_diff_eq!(e.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let a1 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let a2 = [Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
        let q = Covariance::new(2, [(1.0, &a1[..]), (0.9, &a2[..])]);
        match dominant_eigenvector(&q, 1e-15, 2) {
            Err(EigenError::NotConverged(p)) => assert_eq!(p.iterations, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn power_iteration_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for &n in &[2usize, 4, 8] {
            for _ in 0..10 {
                let q = random_psd(n, &mut rng);
                let top = dense_eigenvalues(&q)[0];
                let e = dominant_eigenvector(&q, 1e-9, 100_000).unwrap();
                assert!((e.value - top).abs() <= 1e-6 * top, "n={n}: {} vs {top}", e.value);
            }
        }
    }

    fn random_psd(n: usize, rng: &mut impl Rng) -> HermitianMatrix {
        let vecs: Vec<Vec<Complex64>> = (0..n)
            .map(|_| (0..n).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect())
            .collect();
        let mut m = HermitianMatrix::zeros(n);
        for v in &vecs {
            m.add_outer(rng.random::<f64>(), v);
        }
        m
    }

    fn dense_eigenvalues(q: &HermitianMatrix) -> Vec<f64> {
        let n = q.dim();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| q.get(i, j));
        let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    fn unit(v: Vec<Complex64>) -> Vec<Complex64> {
        let n = norm(&v);
        v.into_iter().map(|z| z / n).collect()
    }

    proptest! {
        #[test]
        fn dominant_beams_beat_random_beams_for_rank_one(
            aoa_az in 0.0..360.0f64, aoa_el in -60.0..60.0f64,
            aod_az in 0.0..360.0f64, aod_el in -89.0..0.0f64,
            seed in 0u64..1000,
        ) {
            let (uav, gnb) = mounts();
            let s = sample(vec![path(-110.0, (aoa_az, aoa_el), (aod_az, aod_el), true)]);
            let tx = ArrayMount::new(&uav, Orientation::NADIR);
            let rx = ArrayMount::new(&gnb, SECTOR);
            let d = dress_paths(&s, tx, rx);
            let budget = LinkBudget::default();
            let e_tx = dominant_eigenvector(&long_term_covariance(&d, Side::Tx).unwrap(), 1e-9, 1000).unwrap();
            let e_rx = dominant_eigenvector(&long_term_covariance(&d, Side::Rx).unwrap(), 1e-9, 1000).unwrap();
            let best = beamformed_snr(&d, &e_tx.vector, &e_rx.vector, &budget);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rand_vec = |n: usize| unit((0..n).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect());
            for _ in 0..100 {
                let snr = beamformed_snr(&d, &rand_vec(16), &rand_vec(64), &budget);
                prop_assert!(best >= snr - 1e-9);
            }
        }

        #[test]
        fn scaling_gains_shifts_snr(shift in -30.0..30.0f64, gains in proptest::collection::vec(-130.0..-90.0f64, 1..6)) {
            let (uav, gnb) = mounts();
            let build = |offset: f64| sample(gains.iter().enumerate().map(|(i, g)| {
                path(g + offset, (30.0 + 15.0 * i as f64, -12.0 + 5.0 * i as f64), (10.0 * i as f64, -80.0 + 7.0 * i as f64), i == 0)
            }).collect());
            let tx = ArrayMount::new(&uav, Orientation::NADIR);
            let rx = ArrayMount::new(&gnb, SECTOR);
            let base = evaluate_link(&build(0.0), tx, rx, &LinkBudget::default(), &PowerIteration::default()).unwrap();
            let moved = evaluate_link(&build(shift), tx, rx, &LinkBudget::default(), &PowerIteration::default()).unwrap();
            prop_assert!((moved.snr_db - base.snr_db - shift).abs() < 1e-6);
            prop_assert_eq!(moved.strongest_path_is_los, base.strongest_path_is_los);
        }

        #[test]
        fn removing_a_path_never_raises_top_eigenvalue(gains in proptest::collection::vec(-130.0..-90.0f64, 2..8), drop in 0usize..8) {
            let (uav, gnb) = mounts();
            let s = sample(gains.iter().enumerate().map(|(i, g)| {
                path(*g, (25.0 * i as f64, -20.0 + 6.0 * i as f64), (40.0 * i as f64, -85.0 + 5.0 * i as f64), i == 0)
            }).collect());
            let d = dress_paths(&s, ArrayMount::new(&uav, Orientation::NADIR), ArrayMount::new(&gnb, SECTOR));
            let mut fewer = d.clone();
            fewer.remove(drop % d.len());
            let full = dense_eigenvalues(&long_term_covariance(&d, Side::Rx).unwrap().to_dense())[0];
            let part = dense_eigenvalues(&long_term_covariance(&fewer, Side::Rx).unwrap().to_dense())[0];
            prop_assert!(part <= full * (1.0 + 1e-12));
        }

        #[test]
        fn covariance_is_hermitian_psd(gains in proptest::collection::vec(-130.0..-90.0f64, 1..8)) {
            let (uav, gnb) = mounts();
            let s = sample(gains.iter().enumerate().map(|(i, g)| {
                path(*g, (33.0 * i as f64, -30.0 + 9.0 * i as f64), (17.0 * i as f64, -85.0 + 6.0 * i as f64), i == 0)
            }).collect());
            let d = dress_paths(&s, ArrayMount::new(&uav, Orientation::NADIR), ArrayMount::new(&gnb, SECTOR));
            for side in [Side::Tx, Side::Rx] {
                let q = long_term_covariance(&d, side).unwrap().to_dense();
                prop_assert!(q.hermitian_residual() <= 1e-12 * q.max_abs());
                let ev = dense_eigenvalues(&q);
                prop_assert!(ev.iter().all(|&v| v >= -1e-9 * ev[0]));
            }
        }
    }

    #[test]
    fn isotropic_elements_have_zero_gain() {
        let iso = ArrayConfig::gnb_default().with_element(Element::Isotropic);
        let uav = ArrayConfig::uav_default().with_element(Element::ThreeGpp(ElementPattern3gpp::default()));
        let s = sample(vec![path(-100.0, (123.0, 40.0), (0.0, -90.0), true)]);
        let d = dress_paths(&s, ArrayMount::new(&uav, Orientation::new(0.0, -90.0)), ArrayMount::new(&iso, SECTOR));
        assert_eq!(d[0].rx_element_gain_db, 0.0);
        assert_abs_diff_eq!(d[0].tx_element_gain_db, 8.0, epsilon = 1e-9);
    }
}
