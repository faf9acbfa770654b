//! Extracellular-matrix transport of the dopamine compound.
//!
//! A point source of `Q` molecules released just inside the blood-brain
//! barrier diffuses through brain tissue characterized by a volume fraction
//! `alpha` and a tortuosity `lambda`. The concentration seen at distance `r`
//! after time `t` is
//!
//! ```text
//! c(t, r) = Q λ² / (4 π D α r) · erfc( r λ / (2 √(D t)) )
//! ```
//!
//! with `D` the free diffusion coefficient (µm²/s) and distances in µm, so
//! `c` comes out in molecules/µm³. The solution saturates toward
//! `c∞ = Q λ² / (4 π D α r)` because clearance/uptake is not modeled; the
//! long-time plateau is a property of this reduced transport model, not of
//! real tissue.
//!
//! A time-varying source is handled by linear superposition of per-step
//! deposits over the same kernel.

use crate::error::{Error, Result};
use crate::units::{TimeGrid, TimeSeries, UnitTag};
use serde::{Deserialize, Serialize};

/// Physiological range of the extracellular volume fraction. Values outside
/// it are accepted with a warning rather than rejected.
pub const ALPHA_PHYSIOLOGICAL: (f64, f64) = (0.1, 0.3);

/// Diffusion environment: free diffusion coefficient, volume fraction,
/// tortuosity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcmParams {
    /// Free diffusion coefficient, µm²/s.
    pub d: f64,
    /// Extracellular volume fraction (ECM volume over total tissue volume).
    pub alpha: f64,
    /// Tortuosity λ = √(D/D*), ≥ 1.
    pub lambda_tort: f64,
}

impl EcmParams {
    pub fn new(d: f64, alpha: f64, lambda_tort: f64) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::invalid(format!("diffusion coefficient must be positive, got {d}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!(
                "volume fraction must lie in (0, 1), got {alpha}"
            )));
        }
        if !(lambda_tort >= 1.0) {
            return Err(Error::invalid(format!("tortuosity must be >= 1, got {lambda_tort}")));
        }
        Ok(EcmParams { d, alpha, lambda_tort })
    }

    /// Warnings for values that are legal but outside the physiological range.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (lo, hi) = ALPHA_PHYSIOLOGICAL;
        if self.alpha < lo || self.alpha > hi {
            out.push(format!(
                "ecm.alpha = {} is outside the physiological range [{lo}, {hi}]",
                self.alpha
            ));
        }
        out
    }

    /// Effective diffusivity D* = D / λ².
    pub fn d_effective(&self) -> f64 {
        self.d / (self.lambda_tort * self.lambda_tort)
    }

    /// Long-time plateau concentration at distance `r_um`.
    pub fn steady_state(&self, q: f64, r_um: f64) -> f64 {
        let l2 = self.lambda_tort * self.lambda_tort;
        q * l2 / (4.0 * std::f64::consts::PI * self.d * self.alpha * r_um)
    }
}

/// One evaluation request of the point-source solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcmQuery {
    /// Source amount, molecules.
    pub q: f64,
    /// Distance from the source, µm.
    pub r: f64,
    /// Elapsed time since release, s.
    pub t: f64,
}

impl EcmQuery {
    pub fn new(q: f64, r: f64, t: f64) -> Result<Self> {
        if !(q >= 0.0) {
            return Err(Error::invalid(format!("source amount must be nonnegative, got {q}")));
        }
        if !(r > 0.0) {
            return Err(Error::invalid(format!(
                "distance must be positive (the point source is singular at r = 0), got {r}"
            )));
        }
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("elapsed time must be nonnegative, got {t}")));
        }
        Ok(EcmQuery { q, r, t })
    }
}

/// Volume fraction α = V_ecm / V_tissue.
pub fn volume_fraction(v_ecm: f64, v_tissue: f64) -> Result<f64> {
    if !(v_ecm > 0.0) || !(v_tissue > 0.0) {
        return Err(Error::invalid(format!(
            "volumes must be positive, got ECM {v_ecm}, tissue {v_tissue}"
        )));
    }
    if v_ecm > v_tissue {
        return Err(Error::invalid(format!(
            "ECM volume {v_ecm} exceeds tissue volume {v_tissue}"
        )));
    }
    Ok(v_ecm / v_tissue)
}

/// Tortuosity λ = √(D / D*). Requires 0 < D* ≤ D so that λ ≥ 1.
pub fn tortuosity(d: f64, d_star: f64) -> Result<f64> {
    if !(d > 0.0) || !(d_star > 0.0) {
        return Err(Error::invalid(format!(
            "diffusivities must be positive, got D = {d}, D* = {d_star}"
        )));
    }
    if d_star > d {
        return Err(Error::invalid(format!(
            "effective diffusivity {d_star} exceeds free diffusivity {d} (would give tortuosity < 1)"
        )));
    }
    Ok((d / d_star).sqrt())
}

/// Point-source concentration at one (r, t), molecules/µm³.
///
/// Returns 0 at `t = 0` (the erfc argument diverges, and erfc(∞) = 0).
pub fn ecm_concentration(p: &EcmParams, q: &EcmQuery) -> f64 {
    if q.t == 0.0 || q.q == 0.0 {
        return 0.0;
    }
    let arg = q.r * p.lambda_tort / (2.0 * (p.d * q.t).sqrt());
    p.steady_state(q.q, q.r) * erfc(arg)
}

/// Full time profile of a single release of `q` molecules observed at `r_um`.
/// The grid must be in seconds.
pub fn ecm_time_profile(p: &EcmParams, q: f64, r_um: f64, grid: &TimeGrid) -> Result<TimeSeries> {
    require_seconds(grid)?;
    if grid.t_start() < 0.0 {
        return Err(Error::invalid("profile grid must start at t >= 0"));
    }
    let mut values = Vec::with_capacity(grid.len());
    for t in grid.times() {
        values.push(ecm_concentration(p, &EcmQuery::new(q, r_um, t)?));
    }
    TimeSeries::new(grid.clone(), values, UnitTag::molecules_per_um3())
}

/// Superpose a time-varying source over the point-source kernel.
///
/// `source` holds the incremental amount (molecules) deposited at each grid
/// sample; the output is the concentration at distance `r_um`,
/// `c(t_i) = Σ_{j ≤ i} source[j] · g(t_i − t_j)` with `g` the unit-amount
/// kernel. A single nonzero sample therefore reduces to [`ecm_time_profile`].
pub fn superpose_source(source: &TimeSeries, p: &EcmParams, r_um: f64) -> Result<TimeSeries> {
    let grid = source.grid();
    require_seconds(grid)?;
    if let Some(i) = source.values().iter().position(|&v| v < 0.0) {
        return Err(Error::invalid(format!(
            "source trace must be nonnegative, sample {i} is {}",
            source.values()[i]
        )));
    }
    // kernel table on elapsed times k*dt; g(0) = 0 by the t = 0 rule
    let n = grid.len();
    let mut kernel = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * grid.dt();
        kernel.push(ecm_concentration(p, &EcmQuery::new(1.0, r_um, t)?));
    }
    let src = source.values();
    let mut values = vec![0.0; n];
    for (i, value) in values.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..=i {
            acc += src[j] * kernel[i - j];
        }
        *value = acc;
    }
    TimeSeries::new(grid.clone(), values, UnitTag::molecules_per_um3())
}

fn require_seconds(grid: &TimeGrid) -> Result<()> {
    if !grid.is_seconds() {
        return Err(Error::UnitMismatch {
            expected: "s".into(),
            found: grid.unit().symbol.into(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Complementary error function
// ---------------------------------------------------------------------------

/// Complementary error function, absolute error below 1e-13 on |x| <= 10.
///
/// Maclaurin series of erf for |x| < 2; Laplace continued fraction (modified
/// Lentz evaluation) for x >= 2; reflection erfc(-x) = 2 - erfc(x) for
/// negative arguments, which makes the reflection identity exact.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x < 2.0 {
        1.0 - erf_series(x)
    } else if x > 27.5 {
        0.0 // e^{-x²} underflows below the smallest subnormal
    } else {
        erfc_continued_fraction(x)
    }
}

/// erf by Maclaurin series: erf(x) = 2/√π Σ (-1)ⁿ x^{2n+1} / (n! (2n+1)).
/// Converges in under 40 terms for |x| < 2 with mild cancellation.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x; // x^{2n+1} / n! at n = 0
    let mut sum = x;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= -x2 / n as f64;
        let contrib = term / (2 * n + 1) as f64;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(1e-300) || n > 80 {
            break;
        }
    }
    std::f64::consts::FRAC_2_SQRT_PI * sum
}

/// Laplace continued fraction:
/// erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x.max(TINY);
    let mut c = f;
    let mut d = 0.0;
    for k in 1..200 {
        let a = k as f64 / 2.0;
        // b = x for every level; a_k = k/2
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / f
}
