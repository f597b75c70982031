//! Long-term beams on a sampled channel versus random beams.
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavcov::antenna::{ArrayConfig, Orientation};
use uavcov::channel::{sample_channel, ChannelParams, LinkGeometry};
use uavcov::geometry::{GnbKind, Point3, Universe};
use uavcov::link::{beamformed_snr, dress_paths, long_term_covariance, ArrayMount, LinkBudget, PowerIteration, Side};

fn main() {
    let (gnb, uav) = (ArrayConfig::gnb_default(), ArrayConfig::uav_default());
    let sector = Orientation::new(0.0, -12.0);
    let geom = LinkGeometry::between(Point3::new(0.0, 0.0, 4.0), Point3::new(120.0, 20.0, 60.0), &Universe::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sample = sample_channel(&geom, GnbKind::Standard, &ChannelParams::default(), &mut rng);
    let dressed = dress_paths(&sample, ArrayMount::new(&uav, Orientation::NADIR), ArrayMount::new(&gnb, sector));
    println!("{} link with {} paths", sample.state, dressed.len());

    let solver = PowerIteration::default();
    let q_tx = long_term_covariance(&dressed, Side::Tx).unwrap();
    let q_rx = long_term_covariance(&dressed, Side::Rx).unwrap();
    let tx = q_tx.dominant_eigenpair(&solver).unwrap();
    let rx = q_rx.dominant_eigenpair(&solver).unwrap();
    println!("eigen-solves: {} and {} iterations", tx.iterations, rx.iterations);
    let budget = LinkBudget::default();
    println!("eigenbeams:   {:6.2} dB", beamformed_snr(&dressed, &tx.vector, &rx.vector, &budget));

    let mut random_beam = |n: usize| {
        let v: Vec<Complex64> = (0..n).map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).collect();
        let s = (n as f64).sqrt();
        v.into_iter().map(|z| z / s).collect::<Vec<_>>()
    };
    let best_random = (0..1000)
        .map(|_| beamformed_snr(&dressed, &random_beam(16), &random_beam(64), &budget))
        .fold(f64::NEG_INFINITY, f64::max);
    println!("best of 1000 random beam pairs: {best_random:6.2} dB");
}
