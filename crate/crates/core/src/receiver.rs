//! Stochastic molecule reception at a spherical passive receiver.
//!
//! The number of molecules adsorbed in one sampling period is a
//! nonstationary Poisson count with intensity
//!
//! ```text
//! λ_Rx(t) = λ_noise + Σ_{j=1}^{⌊t/Ts⌋+1} P_obs(t - (j-1) Ts)
//! ```
//!
//! where each term pairs the concentration at sample `j` with the observation
//! kernel at the elapsed time since that sample,
//!
//! ```text
//! P_obs(c, t) = V_Rx / (4 π D t)^{3/2} · c · V_norm,   V_Rx = (4/3) π d_Rx³
//! ```
//!
//! As printed, the kernel maps a concentration to a count only up to a
//! reference volume; `V_norm` (default 1 µm³) makes that normalization
//! explicit and testable. Terms with zero elapsed time are skipped because
//! the kernel is singular at `t = 0`.

use crate::error::{Error, Result};
use crate::rng::{Rng, RngSeed};
use crate::units::TimeSeries;
use serde::{Deserialize, Serialize};

/// Spherical receiver geometry and sampling configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverParams {
    /// Receiver radius, µm.
    #[serde(rename = "d_Rx")]
    pub d_rx: f64,
    /// Sampling period, s.
    #[serde(rename = "Ts")]
    pub ts: f64,
    /// Additive static noise intensity, counts per sample.
    pub lambda_noise: f64,
    /// Diffusion coefficient of the surrounding medium, µm²/s.
    #[serde(rename = "D")]
    pub d: f64,
    /// Reference volume converting concentration to a count, µm³.
    #[serde(default = "default_v_norm")]
    pub v_norm: f64,
}

fn default_v_norm() -> f64 {
    1.0
}

impl ReceiverParams {
    pub fn new(d_rx: f64, ts: f64, lambda_noise: f64, d: f64) -> Result<Self> {
        let p = ReceiverParams { d_rx, ts, lambda_noise, d, v_norm: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_rx > 0.0) {
            return Err(Error::invalid(format!("d_Rx must be positive, got {}", self.d_rx)));
        }
        if !(self.ts > 0.0) {
            return Err(Error::invalid(format!("Ts must be positive, got {}", self.ts)));
        }
        if !(self.lambda_noise >= 0.0) {
            return Err(Error::invalid(format!(
                "lambda_noise must be nonnegative, got {}",
                self.lambda_noise
            )));
        }
        if !(self.d > 0.0) {
            return Err(Error::invalid(format!("D must be positive, got {}", self.d)));
        }
        if !(self.v_norm > 0.0) {
            return Err(Error::invalid(format!("v_norm must be positive, got {}", self.v_norm)));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        receiver_volume(self.d_rx)
    }
}

/// Volume of the spherical receiver, `(4/3) π d_Rx³`.
pub fn receiver_volume(d_rx: f64) -> f64 {
    4.0 / 3.0 * std::f64::consts::PI * d_rx * d_rx * d_rx
}

/// Expected count contributed by concentration `c_dac` observed over an
/// elapsed time `t > 0`. Decays like `t^{-3/2}`.
pub fn p_obs(params: &ReceiverParams, c_dac: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!(
            "observation kernel is singular at t = 0 (got t = {t})"
        )));
    }
    if !(c_dac >= 0.0) {
        return Err(Error::invalid(format!("concentration must be nonnegative, got {c_dac}")));
    }
    let denom = (4.0 * std::f64::consts::PI * params.d * t).powf(1.5);
    Ok(params.volume() / denom * c_dac * params.v_norm)
}

/// Accumulated intensity at time `t` (seconds) given the ambient
/// concentration trace. Skips the zero-elapsed-time term.
pub fn lambda_rx(params: &ReceiverParams, c_trace: &TimeSeries, t: f64) -> Result<f64> {
    params.validate()?;
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("t must be nonnegative, got {t}")));
    }
    if t > c_trace.grid().t_end() * (1.0 + 1e-12) {
        return Err(Error::OutsideSpan(format!(
            "t = {t} s beyond trace end {} s",
            c_trace.grid().t_end()
        )));
    }
    let terms = (t / params.ts).floor() as usize + 1;
    let mut lambda = params.lambda_noise;
    for j in 1..=terms {
        let sample_time = (j - 1) as f64 * params.ts;
        let elapsed = t - sample_time;
        // a zero-elapsed term is undefined (singular kernel); the slack keeps
        // floating-point near-zeros from blowing the sum up
        if elapsed <= 1e-9 * params.ts {
            continue;
        }
        let c = c_trace.value_at(sample_time)?;
        lambda += p_obs(params, c, elapsed)?;
    }
    Ok(lambda)
}

/// Running receiver: stores every past concentration sample so the decaying
/// kernel can be re-evaluated against the full history each step.
#[derive(Debug, Clone)]
pub struct ReceiverState {
    params: ReceiverParams,
    history: Vec<f64>,
}

impl ReceiverState {
    pub fn new(params: ReceiverParams) -> Result<Self> {
        params.validate()?;
        Ok(ReceiverState { params, history: Vec::new() })
    }

    pub fn params(&self) -> &ReceiverParams {
        &self.params
    }

    /// Number of samples absorbed so far.
    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Record the concentration seen in this sampling period and return the
    /// intensity at the end of the period (elapsed times Ts, 2Ts, ...).
    pub fn advance(&mut self, concentration: f64) -> Result<f64> {
        if !(concentration >= 0.0) || !concentration.is_finite() {
            return Err(Error::invalid(format!(
                "concentration sample must be finite and nonnegative, got {concentration}"
            )));
        }
        self.history.push(concentration);
        let mut lambda = self.params.lambda_noise;
        let n = self.history.len();
        for (j, &c) in self.history.iter().enumerate() {
            let elapsed = (n - j) as f64 * self.params.ts;
            lambda += p_obs(&self.params, c, elapsed)?;
        }
        Ok(lambda)
    }
}

/// One Poisson draw with mean `lambda` from a fresh seeded stream.
pub fn sample_arrivals(lambda: f64, seed: RngSeed) -> Result<u64> {
    Rng::from_seed(seed).next_poisson(lambda)
}

/// Poisson draw from an existing stream (for simulations that own one).
pub fn sample_arrivals_with(rng: &mut Rng, lambda: f64) -> Result<u64> {
    rng.next_poisson(lambda)
}
