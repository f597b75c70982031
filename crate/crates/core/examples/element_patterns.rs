//! Gain cuts of the sector element and the UAV patch element.
use uavcov::antenna::{ElementPattern3gpp, PatchPattern};

fn main() {
    let sector = ElementPattern3gpp::default();
    let patch = PatchPattern::default();
    println!("azimuth cut at theta = 90");
    for phi in (-180..=180).step_by(30) {
        println!("  phi {phi:>4}  3gpp {:6.2} dBi", sector.gain_db(90.0, phi as f64));
    }
    println!("elevation cut at phi = 0");
    for theta in (0..=180).step_by(15) {
        println!("  theta {theta:>3}  3gpp {:6.2} dBi", sector.gain_db(theta as f64, 0.0));
    }
    println!("patch versus angle off the normal");
    for off in (0..=180).step_by(15) {
        println!("  {off:>3} deg  {:6.2} dBi", patch.gain_db(off as f64, 0.0));
    }
}
