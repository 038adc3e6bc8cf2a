// Draws one channel realization of the default scenario and prints its scale.

use bdris_isac::channel::{bs_ris_pathloss_db, spatial_correlation};
use bdris_isac::{ChannelSet, SystemConfig};

pub fn run_example() -> bdris_isac::Result<ChannelSet> {
    let cfg = SystemConfig::default();
    let channels = cfg.channels(cfg.seed)?;
    let g_power = channels.g.iter().map(|z| z.norm_sqr()).sum::<f64>()
        / (channels.num_elements() * channels.num_antennas()) as f64;
    let d = (0..3)
        .map(|i| (cfg.bs_position[i] - cfg.ris_position[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    println!("N = {}, M = {}, K = {}", channels.num_elements(), channels.num_antennas(), channels.num_users());
    println!("BS-RIS distance {d:.2} m, path loss {:.2} dB", bs_ris_pathloss_db(d));
    println!("mean |G_ij|^2 = {g_power:.3e}");
    for (k, (f, beta)) in channels.f_users.iter().zip(&channels.betas).enumerate() {
        println!("user {k}: beta = {beta:.3e}, |f|^2 / N = {:.3e}", f.norm_squared() / f.len() as f64);
    }
    println!("|f_t| = {:.12}", channels.f_target.norm());
    let r = spatial_correlation(cfg.n1, cfg.n2, cfg.wavelength);
    println!("R[0,1] = {:.2e} (half-wavelength neighbours)", r[(0, 1)]);
    Ok(channels)
}

#[allow(dead_code)]
fn main() -> bdris_isac::Result<()> {
    run_example().map(|_| ())
}
