//! Store-and-release unit: charging from ambient compound, threshold
//! detection of endogenous dopamine pulses, and quantized release.
//!
//! Molecule counts are integers, so the tallies balance exactly:
//! absorbed - released = stored - initial, after every step.
//!
//! ```bash
//! cargo run -p idrm-sim --example idrm_release
//! ```

use idrm_sim::*;
use std::path::PathBuf;

fn main() -> Result<()> {
    let cfg = IdrmConfig {
        capacity: 5_000,
        release_quantum: 800,
        detection_threshold: 1e-6,
        receiver: ReceiverParams::new(1.0, 0.1, 0.0, 15.0)?,
        release_mode: ReleaseMode::Quantum,
    };
    // ambient drive worth ~5 expected molecules per 0.1 s step
    let grid = make_time_grid(0.0, 600.0, 0.1, UnitTag::seconds())?;
    let n = grid.len();
    let ambient = TimeSeries::new(grid.clone(), vec![100.0; n], UnitTag::molecules_per_um3())?;
    // an endogenous pulse every 20 s, well above the detection threshold
    let pulses = EndogenousPulseTrain::periodic(20.0, 20.0, 5e-6, grid.t_end())?;

    let run = simulate_idrm(&cfg, 0, &ambient, &pulses, RngSeed(7))?;
    let s = run.final_state;
    println!("steps: {n}, pulses: {}", pulses.pulses().len());
    println!("absorbed:  {:>10}", s.absorbed_total);
    println!("released:  {:>10}", s.released_total);
    println!("stored:    {:>10}  (capacity {})", s.stored, cfg.capacity);
    println!("overflow:  {:>10}", s.overflow_total);
    println!("balance exact: {}", s.conserves_mass());
    let releases = run.releases.values().iter().filter(|&&r| r > 0.0).count();
    println!("release events: {releases}");

    let out = PathBuf::from("target/example-output/idrm_release");
    std::fs::create_dir_all(&out)?;
    let mut file = std::fs::File::create(out.join("idrm.csv"))?;
    run.write_csv(&mut file)?;
    println!("wrote {}", out.join("idrm.csv").display());
    Ok(())
}
