//! Link-state probabilities and one multipath draw per state.
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uavcov::channel::{link_state_probabilities, sample_paths, ChannelParams, LinkGeometry, LinkState};
use uavcov::geometry::{GnbKind, Point3, Universe};

fn main() {
    let params = ChannelParams::default();
    println!("  d2d   h     p_los  p_nlos  p_out   (standard | dedicated p_los)");
    for h in [30.0, 60.0, 120.0] {
        for d in [50.0, 200.0, 500.0, 1000.0] {
            let s = link_state_probabilities(d, h, 3.5, GnbKind::Standard, &params);
            let t = link_state_probabilities(d, h, 20.0, GnbKind::Dedicated, &params);
            println!("{d:>5} {h:>5}  {:.3}  {:.3}  {:.3}   | {:.3}", s.los, s.nlos, s.outage, t.los);
        }
    }

    let u = Universe::default();
    let geom = LinkGeometry::between(Point3::new(0.0, 0.0, 3.5), Point3::new(150.0, 60.0, 60.0), &u).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for state in [LinkState::Los, LinkState::Nlos] {
        let s = sample_paths(state, &geom, GnbKind::Standard, &params, &mut rng);
        println!("\n{state}: {} paths", s.paths.len());
        for p in s.paths.iter().take(5) {
            println!(
                "  {:8.2} dB  {:7.1} ns  aoa ({:6.1}, {:5.1})  aod ({:6.1}, {:5.1}){}",
                p.gain_db,
                p.delay_ns,
                p.aoa_azimuth_deg,
                p.aoa_elevation_deg,
                p.aod_azimuth_deg,
                p.aod_elevation_deg,
                if p.is_los { "  los" } else { "" }
            );
        }
    }
}
