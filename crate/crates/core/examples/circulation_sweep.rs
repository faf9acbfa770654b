//! Circulatory transport sweep: the plasma curve delayed by the transit time
//! and attenuated by each of the study's five attenuation coefficients.
//!
//! ```bash
//! cargo run -p idrm-sim --example circulation_sweep
//! ```

use idrm_sim::*;
use std::path::PathBuf;

fn main() -> Result<()> {
    let g1 = G1Params::new(1418.0, 0.0547, 0.6073, 0.2461)?;
    let grid = make_time_grid(0.0, 8.0, 1e-3, UnitTag::hours())?;
    let plasma = g1_impulse_response(&g1, 125.0, &grid)?;
    let plasma_peak = plasma.max_value();
    let plasma_peak_t = grid.time_at(plasma.argmax());

    let out = PathBuf::from("target/example-output/circulation_sweep");
    std::fs::create_dir_all(&out)?;
    println!("plasma peak {plasma_peak:.2} at {plasma_peak_t:.4} h; transit delay 0.2 h");
    for a in [0.25, 0.35, 0.50, 0.60, 0.75] {
        let stage = g2_apply(&plasma, &G2Params::new(a, 0.2)?)?;
        let peak_t = grid.time_at(stage.argmax());
        println!(
            "a = {a:.2}: peak {:.2} ({:.0}% of plasma) at {peak_t:.4} h",
            stage.max_value(),
            100.0 * stage.max_value() / plasma_peak
        );
        let path = out.join(format!("circulation_a{a}.csv"));
        stage.write_csv(&mut std::fs::File::create(&path)?)?;
    }
    println!("wrote 5 curves to {}", out.display());
    Ok(())
}
