//! Discrete-event model of the dopamine rate modulator unit.
//!
//! Each step the unit (1) charges: draws a Poisson number of absorbed
//! molecules from the ambient compound concentration through the receiver
//! kernel, clamped by the remaining vesicle capacity with overflow tallied;
//! and (2) releases: when the endogenous dopamine level reaches the detection
//! threshold, a fixed quantum (or a configured fraction) of the store is
//! released. Molecule counts are integers throughout, so
//! `absorbed_total - released_total = stored - initial` holds exactly.

use crate::error::{Error, Result};
use crate::receiver::{p_obs, ReceiverParams};
use crate::rng::{Rng, RngSeed};
use crate::units::{TimeSeries, UnitTag};
use serde::{Deserialize, Serialize};

/// How much of the store leaves on a detection event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ReleaseMode {
    /// Fixed quantum per detection (clamped by the current store).
    Quantum,
    /// Fraction of the current store per detection, rounded down.
    Proportional { fraction: f64 },
}

/// Static configuration of one modulator unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdrmConfig {
    /// Vesicle storage capacity, molecules.
    pub capacity: u64,
    /// Molecules released per detection in quantum mode.
    pub release_quantum: u64,
    /// Endogenous dopamine level that triggers release, molecules/µm³.
    pub detection_threshold: f64,
    /// Charging receiver.
    pub receiver: ReceiverParams,
    #[serde(default = "default_release_mode")]
    pub release_mode: ReleaseMode,
}

fn default_release_mode() -> ReleaseMode {
    ReleaseMode::Quantum
}

impl IdrmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.capacity == 0 {
            return Err(Error::invalid("capacity must be positive"));
        }
        if self.release_quantum == 0 || self.release_quantum > self.capacity {
            return Err(Error::invalid(format!(
                "release quantum must lie in (0, capacity], got {} with capacity {}",
                self.release_quantum, self.capacity
            )));
        }
        if !(self.detection_threshold > 0.0) {
            return Err(Error::invalid(format!(
                "detection threshold must be positive, got {}",
                self.detection_threshold
            )));
        }
        if let ReleaseMode::Proportional { fraction } = self.release_mode {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::invalid(format!(
                    "proportional release fraction must lie in (0, 1], got {fraction}"
                )));
            }
        }
        self.receiver.validate()
    }
}

/// Mutable inventory of one unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdrmState {
    /// Current store, molecules.
    pub stored: u64,
    /// Store at construction (anchor of the conservation identity).
    pub initial: u64,
    /// Molecules accepted into storage since construction.
    pub absorbed_total: u64,
    /// Molecules released since construction.
    pub released_total: u64,
    /// Arrivals discarded because the store was full.
    pub overflow_total: u64,
}

impl IdrmState {
    pub fn new(initial: u64, cfg: &IdrmConfig) -> Result<Self> {
        if initial > cfg.capacity {
            return Err(Error::invalid(format!(
                "initial store {initial} exceeds capacity {}",
                cfg.capacity
            )));
        }
        Ok(IdrmState {
            stored: initial,
            initial,
            absorbed_total: 0,
            released_total: 0,
            overflow_total: 0,
        })
    }

    /// Exact mass balance: absorbed - released = stored - initial.
    pub fn conserves_mass(&self) -> bool {
        self.absorbed_total as i128 - self.released_total as i128
            == self.stored as i128 - self.initial as i128
    }
}

/// Endogenous dopamine events: strictly increasing times (s) with positive
/// amplitudes (molecules/µm³).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndogenousPulseTrain(Vec<(f64, f64)>);

impl EndogenousPulseTrain {
    pub fn new(pulses: Vec<(f64, f64)>) -> Result<Self> {
        for &(t, amp) in &pulses {
            if !t.is_finite() || !(amp > 0.0) {
                return Err(Error::invalid(format!(
                    "pulse ({t}, {amp}) needs a finite time and positive amplitude"
                )));
            }
        }
        if pulses.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("pulse times must be strictly increasing"));
        }
        Ok(EndogenousPulseTrain(pulses))
    }

    /// Evenly spaced train covering `[first, t_end]`.
    pub fn periodic(first: f64, period: f64, amplitude: f64, t_end: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::invalid(format!("pulse period must be positive, got {period}")));
        }
        let mut pulses = Vec::new();
        let mut t = first;
        while t <= t_end {
            pulses.push((t, amplitude));
            t += period;
        }
        EndogenousPulseTrain::new(pulses)
    }

    pub fn pulses(&self) -> &[(f64, f64)] {
        &self.0
    }
}

/// Threshold sensor: fires when the endogenous level reaches `theta`
/// (boundary inclusive).
pub fn detect(endogenous_level: f64, theta: f64) -> bool {
    endogenous_level >= theta
}

/// Outcome of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub arrivals: u64,
    pub accepted: u64,
    pub released: u64,
}

/// Advance one sampling step: charge from the ambient concentration through
/// the per-step elapsed-time kernel, then release on detection.
/// `dt_s` is the step length in seconds (the elapsed time of the newest
/// kernel term).
pub fn step(
    state: &mut IdrmState,
    cfg: &IdrmConfig,
    ambient_dac: f64,
    endogenous: f64,
    dt_s: f64,
    rng: &mut Rng,
) -> Result<StepOutcome> {
    if !(ambient_dac >= 0.0) || !ambient_dac.is_finite() {
        return Err(Error::invalid(format!(
            "ambient concentration must be finite and nonnegative, got {ambient_dac}"
        )));
    }
    if !(dt_s > 0.0) {
        return Err(Error::invalid(format!("step length must be positive, got {dt_s}")));
    }
    // charging
    let lambda = cfg.receiver.lambda_noise + p_obs(&cfg.receiver, ambient_dac, dt_s)?;
    let arrivals = rng.next_poisson(lambda)?;
    let room = cfg.capacity - state.stored;
    let accepted = arrivals.min(room);
    state.stored += accepted;
    state.absorbed_total += accepted;
    state.overflow_total += arrivals - accepted;
    // release
    let released = if detect(endogenous, cfg.detection_threshold) {
        let want = match cfg.release_mode {
            ReleaseMode::Quantum => cfg.release_quantum,
            ReleaseMode::Proportional { fraction } => (fraction * state.stored as f64) as u64,
        };
        let out = want.min(state.stored);
        state.stored -= out;
        state.released_total += out;
        out
    } else {
        0
    };
    debug_assert!(state.conserves_mass());
    Ok(StepOutcome { arrivals, accepted, released })
}

/// Full simulation output: storage and release histories plus tallies.
#[derive(Debug, Clone)]
pub struct IdrmRun {
    pub storage: TimeSeries,
    pub releases: TimeSeries,
    pub final_state: IdrmState,
}

impl IdrmRun {
    /// CSV with columns `t_s,stored,released_this_step,absorbed_total,released_total`.
    /// The running absorbed tally is reconstructed from the exact mass balance
    /// `absorbed = stored - initial + released_so_far`, which holds after
    /// every step.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t_s,stored,released_this_step,absorbed_total,released_total")?;
        let grid = self.storage.grid();
        let initial = self.final_state.initial as i128;
        let mut released_total = 0i128;
        for i in 0..grid.len() {
            let stored = self.storage.values()[i] as i128;
            let released = self.releases.values()[i] as i128;
            released_total += released;
            let absorbed_total = stored - initial + released_total;
            writeln!(
                w,
                "{},{stored},{released},{absorbed_total},{released_total}",
                crate::units::fmt_full(grid.time_at(i)),
            )?;
        }
        Ok(())
    }
}

/// Iterate [`step`] across the ambient trace's grid. Endogenous pulses apply
/// at the first grid sample at or after their time; all pulses must fall
/// inside the trace span. Deterministic for a fixed seed.
pub fn simulate(
    cfg: &IdrmConfig,
    initial_store: u64,
    ambient_trace: &TimeSeries,
    pulses: &EndogenousPulseTrain,
    seed: RngSeed,
) -> Result<IdrmRun> {
    cfg.validate()?;
    let grid = ambient_trace.grid();
    if !grid.is_seconds() {
        return Err(Error::UnitMismatch {
            expected: "s".into(),
            found: grid.unit().symbol.into(),
        });
    }
    for &(t, _) in pulses.pulses() {
        if t < grid.t_start() || t > grid.t_end() {
            return Err(Error::OutsideSpan(format!(
                "pulse at {t} s outside trace span [{}, {}]",
                grid.t_start(),
                grid.t_end()
            )));
        }
    }
    let mut state = IdrmState::new(initial_store, cfg)?;
    let mut rng = Rng::from_seed(seed);
    let dt = grid.dt();
    let mut pulse_iter = pulses.pulses().iter().peekable();
    let mut storage = Vec::with_capacity(grid.len());
    let mut releases = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let t = grid.time_at(i);
        let mut endogenous = 0.0f64;
        while let Some(&&(pt, amp)) = pulse_iter.peek() {
            if pt <= t {
                endogenous = endogenous.max(amp);
                pulse_iter.next();
            } else {
                break;
            }
        }
        let ambient = ambient_trace.values()[i];
        let outcome = step(&mut state, cfg, ambient, endogenous, dt, &mut rng)?;
        storage.push(state.stored as f64);
        releases.push(outcome.released as f64);
    }
    Ok(IdrmRun {
        storage: TimeSeries::new(grid.clone(), storage, UnitTag::count())?,
        releases: TimeSeries::new(grid.clone(), releases, UnitTag::count())?,
        final_state: state,
    })
}
