//! Least-squares identification of the plasma-stage parameters from sampled
//! plasma-level data.
//!
//! The objective is the sum of squared residuals of the closed-form plasma
//! response against the samples. Minimization uses a derivative-free
//! Nelder-Mead simplex in transformed coordinates `(ln k, ln T1, ln T2, T0)`:
//! the log parameterization enforces positivity without constraints, and the
//! simplex tolerates the kink the absorption delay puts into the objective
//! (data points cross the delay boundary as T0 moves, so finite-difference
//! gradients are unreliable there). The two-exponential form is symmetric
//! under swapping T1 and T2; results are canonicalized to T1 < T2.

use crate::error::{Error, Result};
use crate::pk::{g1_value, G1Params, CONFLUENT_TOL};
use crate::rng::{Rng, RngSeed};
use serde::{Deserialize, Serialize};

/// One measured plasma level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlasmaSample {
    /// Sampling time, hours.
    pub t: f64,
    /// Plasma level, model units.
    pub value: f64,
}

impl PlasmaSample {
    pub fn new(t: f64, value: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("sample time must be nonnegative, got {t}")));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("plasma sample at t = {t}")));
        }
        Ok(PlasmaSample { t, value })
    }
}

/// Stopping rules for the simplex search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Convergence threshold on the simplex diameter (transformed space).
    pub xtol: f64,
    /// Convergence threshold on the objective spread across the simplex.
    pub ftol: f64,
    pub max_iters: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { xtol: 1e-8, ftol: 1e-12, max_iters: 5000 }
    }
}

/// Outcome of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: G1Params,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Sum of squared errors of the closed-form plasma response against `data`.
pub fn sse(params: &G1Params, data: &[PlasmaSample], dose_mg: f64) -> Result<f64> {
    params.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("sse needs at least one data point"));
    }
    let mut acc = 0.0;
    for s in data {
        let r = g1_value(params, dose_mg, s.t) - s.value;
        acc += r * r;
    }
    Ok(acc)
}

// transformed coordinates: x = [ln k, ln T1, ln T2, T0 (clamped at 0)]
fn encode(p: &G1Params) -> [f64; 4] {
    [p.k.ln(), p.t1.ln(), p.t2.ln(), p.t0]
}

fn decode(x: &[f64; 4]) -> G1Params {
    G1Params { k: x[0].exp(), t1: x[1].exp(), t2: x[2].exp(), t0: x[3].max(0.0) }
}

fn objective(x: &[f64; 4], data: &[PlasmaSample], dose_mg: f64) -> f64 {
    let p = decode(x);
    if !p.k.is_finite() || !p.t1.is_finite() || !p.t2.is_finite() {
        return f64::INFINITY;
    }
    if (p.t1 - p.t2).abs() <= CONFLUENT_TOL {
        return f64::INFINITY; // degenerate two-exponential form
    }
    let mut acc = 0.0;
    for s in data {
        let r = g1_value(&p, dose_mg, s.t) - s.value;
        acc += r * r;
    }
    if acc.is_finite() {
        acc
    } else {
        f64::INFINITY
    }
}

/// Canonical ordering T1 < T2 (the response is invariant under swap).
fn canonicalize(mut p: G1Params) -> G1Params {
    if p.t1 > p.t2 {
        std::mem::swap(&mut p.t1, &mut p.t2);
    }
    p
}

/// Fit the four plasma parameters to `data` by Nelder-Mead from `init`.
///
/// Needs at least 6 points spanning 3 hours (4 parameters want
/// over-determination). Runs to convergence or `max_iters`; on exhaustion the
/// best vertex so far is returned with `converged = false`.
pub fn fit_g1(
    data: &[PlasmaSample],
    dose_mg: f64,
    init: &G1Params,
    opts: &FitOptions,
) -> Result<FitResult> {
    init.validate()?;
    if data.len() < 6 {
        return Err(Error::invalid(format!(
            "fit needs at least 6 data points, got {}",
            data.len()
        )));
    }
    let span = data.iter().map(|s| s.t).fold(0.0f64, f64::max)
        - data.iter().map(|s| s.t).fold(f64::INFINITY, f64::min);
    if span < 3.0 {
        return Err(Error::invalid(format!(
            "fit needs data spanning at least 3 h, got {span:.3} h"
        )));
    }
    if data.iter().any(|s| !s.value.is_finite() || !s.t.is_finite()) {
        return Err(Error::NonFinite("plasma data".into()));
    }
    if !(dose_mg > 0.0) {
        return Err(Error::invalid(format!("dose must be positive, got {dose_mg}")));
    }

    // standard coefficients: reflection 1, expansion 2, contraction 1/2, shrink 1/2
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    let f = |x: &[f64; 4]| objective(x, data, dose_mg);

    let x0 = encode(init);
    let steps = [0.1, 0.1, 0.1, 0.05f64.max(0.2 * init.t0.max(0.05))];
    let mut simplex: Vec<([f64; 4], f64)> = Vec::with_capacity(5);
    simplex.push((x0, f(&x0)));
    for dim in 0..4 {
        let mut v = x0;
        v[dim] += steps[dim];
        simplex.push((v, f(&v)));
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut previous_best = f64::INFINITY;
    while iterations < opts.max_iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        let improvement = previous_best - simplex[0].1;
        // the best vertex is never replaced, so it cannot worsen
        debug_assert!(improvement >= 0.0 || previous_best.is_infinite());
        previous_best = simplex[0].1;
        if diameter < opts.xtol && improvement < opts.ftol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid = {
            let mut c = [0.0f64; 4];
            for (v, _) in &simplex[..4] {
                for (ci, vi) in c.iter_mut().zip(v) {
                    *ci += vi;
                }
            }
            c.map(|ci| ci / 4.0)
        };
        let worst = simplex[4];
        let reflect = point_on_line(&centroid, &worst.0, ALPHA);
        let f_reflect = f(&reflect);

        if f_reflect < simplex[0].1 {
            let expand = point_on_line(&centroid, &worst.0, GAMMA);
            let f_expand = f(&expand);
            simplex[4] = if f_expand < f_reflect {
                (expand, f_expand)
            } else {
                (reflect, f_reflect)
            };
        } else if f_reflect < simplex[3].1 {
            simplex[4] = (reflect, f_reflect);
        } else if f_reflect < worst.1 {
            let contract = point_on_line(&centroid, &worst.0, RHO);
            let f_contract = f(&contract);
            if f_contract <= f_reflect {
                simplex[4] = (contract, f_contract);
            } else {
                shrink(&mut simplex, SIGMA, &f);
            }
        } else {
            let contract = point_on_line(&centroid, &worst.0, -RHO);
            let f_contract = f(&contract);
            if f_contract < worst.1 {
                simplex[4] = (contract, f_contract);
            } else {
                shrink(&mut simplex, SIGMA, &f);
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let params = canonicalize(decode(&simplex[0].0));
    params.validate()?;
    Ok(FitResult { params, sse: simplex[0].1, iterations, converged })
}

/// `centroid + coeff * (centroid - worst)`; negative coefficients contract
/// inside the simplex.
fn point_on_line(centroid: &[f64; 4], worst: &[f64; 4], coeff: f64) -> [f64; 4] {
    let mut out = *centroid;
    for ((o, c), w) in out.iter_mut().zip(centroid).zip(worst) {
        *o = c + coeff * (c - w);
    }
    out
}

fn shrink(simplex: &mut [([f64; 4], f64)], sigma: f64, f: &impl Fn(&[f64; 4]) -> f64) {
    let best = simplex[0].0;
    for entry in simplex.iter_mut().skip(1) {
        for (x, b) in entry.0.iter_mut().zip(&best) {
            *x = b + sigma * (*x - b);
        }
        entry.1 = f(&entry.0);
    }
}

/// Generate samples from the closed form with multiplicative Gaussian noise
/// of relative sigma `noise_rel`; deterministic per seed.
pub fn simulate_observations(
    params: &G1Params,
    dose_mg: f64,
    sample_times: &[f64],
    noise_rel: f64,
    seed: RngSeed,
) -> Result<Vec<PlasmaSample>> {
    params.validate()?;
    if !(noise_rel >= 0.0) {
        return Err(Error::invalid(format!("noise_rel must be nonnegative, got {noise_rel}")));
    }
    if let Some(t) = sample_times.iter().find(|&&t| !(t >= 0.0)) {
        return Err(Error::invalid(format!("sample times must be nonnegative, got {t}")));
    }
    let mut rng = Rng::from_seed(seed);
    sample_times
        .iter()
        .map(|&t| {
            let truth = g1_value(params, dose_mg, t);
            let noisy = if noise_rel == 0.0 {
                truth
            } else {
                truth * (1.0 + noise_rel * rng.next_standard_normal())
            };
            PlasmaSample::new(t, noisy)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_params() -> G1Params {
        G1Params::new(1418.0, 0.0547, 0.6073, 0.2461).unwrap()
    }

    /// 25-point schedule on [0, 5] h, denser through the absorption rise.
    pub(crate) fn sample_schedule() -> Vec<f64> {
        let mut times: Vec<f64> = (0..13).map(|i| i as f64 * 1.0 / 12.0).collect();
        times.extend((1..=12).map(|i| 1.0 + i as f64 * 4.0 / 12.0));
        times
    }

    #[test]
    fn sse_zero_on_self_generated_data() {
        let p = reference_params();
        let data = simulate_observations(&p, 125.0, &sample_schedule(), 0.0, RngSeed(0)).unwrap();
        assert!(sse(&p, &data, 125.0).unwrap() < 1e-18);
    }

    #[test]
    fn sse_detects_perturbation_and_ignores_order() {
        let p = reference_params();
        let mut data =
            simulate_observations(&p, 125.0, &sample_schedule(), 0.0, RngSeed(0)).unwrap();
        let mut bumped = p;
        bumped.k *= 1.01;
        let s = sse(&bumped, &data, 125.0).unwrap();
        assert!(s > 0.0);
        data.reverse();
        let s_rev = sse(&bumped, &data, 125.0).unwrap();
        assert!((s - s_rev).abs() <= 1e-12 * s);
    }

    #[test]
    fn sse_rejects_empty_data() {
        assert!(sse(&reference_params(), &[], 125.0).is_err());
    }

    #[test]
    fn fit_recovers_truth_from_perturbed_init() {
        let truth = reference_params();
        let data =
            simulate_observations(&truth, 125.0, &sample_schedule(), 0.0, RngSeed(0)).unwrap();
        let init = G1Params::new(
            truth.k * 1.2,
            truth.t1 * 0.8,
            truth.t2 * 1.2,
            truth.t0 * 0.8,
        )
        .unwrap();
        let fit = fit_g1(&data, 125.0, &init, &FitOptions::default()).unwrap();
        assert!(fit.converged, "did not converge in {} iterations", fit.iterations);
        assert!((fit.params.k - truth.k).abs() / truth.k < 0.01);
        assert!((fit.params.t1 - truth.t1).abs() / truth.t1 < 0.01);
        assert!((fit.params.t2 - truth.t2).abs() / truth.t2 < 0.01);
        assert!((fit.params.t0 - truth.t0).abs() / truth.t0 < 0.01);
    }

    #[test]
    fn fit_from_truth_converges_fast_with_tiny_sse() {
        let truth = reference_params();
        let data =
            simulate_observations(&truth, 125.0, &sample_schedule(), 0.0, RngSeed(0)).unwrap();
        let fit = fit_g1(&data, 125.0, &truth, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.sse < 1e-12, "sse = {}", fit.sse);
        // shrinking the initial simplex below xtol takes a few hundred
        // contractions; anything near max_iters would signal wandering
        assert!(fit.iterations <= 500, "iterations = {}", fit.iterations);
    }

    #[test]
    fn fit_canonicalizes_swapped_time_constants() {
        let truth = reference_params();
        let data =
            simulate_observations(&truth, 125.0, &sample_schedule(), 0.0, RngSeed(0)).unwrap();
        // init with T1 and T2 swapped lands on the same canonical answer
        let init = G1Params::new(truth.k, truth.t2 * 1.1, truth.t1 * 0.9, truth.t0).unwrap();
        let fit = fit_g1(&data, 125.0, &init, &FitOptions::default()).unwrap();
        assert!(fit.params.t1 < fit.params.t2);
        assert!((fit.params.t1 - truth.t1).abs() / truth.t1 < 0.02);
        assert!((fit.params.t2 - truth.t2).abs() / truth.t2 < 0.02);
    }

    #[test]
    fn fit_rejects_underdetermined_data() {
        let truth = reference_params();
        let data = simulate_observations(&truth, 125.0, &[0.0, 1.0, 2.0, 3.0, 4.0], 0.0, RngSeed(0))
            .unwrap();
        assert!(fit_g1(&data, 125.0, &truth, &FitOptions::default()).is_err());
        // enough points but too narrow a span
        let narrow =
            simulate_observations(&truth, 125.0, &[0.0, 0.2, 0.4, 0.6, 0.8, 1.0], 0.0, RngSeed(0))
                .unwrap();
        assert!(fit_g1(&narrow, 125.0, &truth, &FitOptions::default()).is_err());
    }

    #[test]
    fn fit_exhaustion_returns_best_so_far() {
        let truth = reference_params();
        let data =
            simulate_observations(&truth, 125.0, &sample_schedule(), 0.0, RngSeed(0)).unwrap();
        let init = G1Params::new(truth.k * 1.2, truth.t1 * 0.8, truth.t2 * 1.2, truth.t0 * 0.8)
            .unwrap();
        let opts = FitOptions { max_iters: 3, ..Default::default() };
        let fit = fit_g1(&data, 125.0, &init, &opts).unwrap();
        assert!(!fit.converged);
        assert!(fit.sse.is_finite());
    }

    #[test]
    fn observations_deterministic_and_unbiased() {
        let p = reference_params();
        let times = [0.5, 1.0, 2.0];
        let a = simulate_observations(&p, 125.0, &times, 0.01, RngSeed(42)).unwrap();
        let b = simulate_observations(&p, 125.0, &times, 0.01, RngSeed(42)).unwrap();
        assert_eq!(a, b);
        assert!(simulate_observations(&p, 125.0, &times, -0.1, RngSeed(1)).is_err());

        // mean of value/truth over many seeds is 1 within the CLT bound
        let t = 1.0;
        let truth = g1_value(&p, 125.0, t);
        let noise = 0.05;
        let n = 2000;
        let mean: f64 = (0..n)
            .map(|i| {
                simulate_observations(&p, 125.0, &[t], noise, RngSeed(1000 + i)).unwrap()[0].value
                    / truth
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 3.0 * noise / (n as f64).sqrt());
    }
}
