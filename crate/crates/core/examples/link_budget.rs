//! Noise floor and the single-path SNR of a matched link.
use uavcov::channel::free_space_gain_db;
use uavcov::link::LinkBudget;

fn main() {
    let budget = LinkBudget::default();
    let noise = budget.noise_power_dbm();
    println!("noise power over {} MHz: {noise:.2} dBm", budget.bandwidth_hz / 1e6);

    // 8x8 gNB and 4x4 UAV arrays, both beams on the path, element peaks 8 and 6 dBi
    let array_gain = 10.0 * 64f64.log10() + 10.0 * 16f64.log10();
    for d in [50.0, 100.0, 200.0, 400.0, 800.0] {
        let g = free_space_gain_db(d, 28.0);
        let snr = budget.tx_power_dbm + g + 8.0 + 6.0 + array_gain - noise;
        println!("{d:>5} m  path gain {g:7.2} dB  SNR {snr:6.2} dB");
    }
}
