//! End-to-end orchestration: JSON-configured runs of the full delivery chain,
//! figure-family sweeps, and CSV emission.
//!
//! A run executes the stages in order
//!
//! ```text
//! regimen → G1 (plasma) → G2 (circulation) → G3 (barrier)
//!         → mg→molecules conversion → tissue superposition at each distance
//!         → receiver intensity and sampled arrivals → modulator simulation
//! ```
//!
//! The barrier-stage trace is read as a delivery rate in model-mg per hour
//! when depositing into the tissue kernel, so the total deposited amount is
//! its time integral times `mg_to_molecules`.
//!
//! Everything a run produces is deterministic given the config and seed:
//! CSVs are byte-stable, and `manifest.json` echoes the full config, the seed,
//! the generator name, and a content hash of every emitted file, so a manifest
//! alone reproduces the run.

use crate::ecm::{superpose_source, EcmParams};
use crate::error::{ConfigIssue, Error, Result};
use crate::fit::{fit_g1, FitOptions, FitResult, PlasmaSample};
use crate::idrm::{simulate, EndogenousPulseTrain, IdrmConfig, IdrmRun, ReleaseMode};
use crate::pk::{
    cascade_response, delay_scale, g1_impulse_response, g2_apply, g3_apply, DoseEvent, G1Params,
    G2Params, G3Params, Regimen, REFERENCE_DOSE_MG,
};
use crate::receiver::{ReceiverParams, ReceiverState};
use crate::rng::{Rng, RngSeed, GENERATOR_NAME};
use crate::units::{fmt_full, make_time_grid, resample, TimeGrid, TimeSeries, UnitTag};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Avogadro's number over the dopamine molar mass (153.18 g/mol), per mg.
pub const MG_TO_MOLECULES_DEFAULT: f64 = 6.02214076e23 / 153.18 / 1000.0;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EcmConfig {
    #[serde(rename = "D")]
    pub d: f64,
    pub alpha: f64,
    pub lambda: f64,
    /// Source amount used by the distance-sweep figure, molecules.
    pub q: f64,
}

impl Default for EcmConfig {
    fn default() -> Self {
        EcmConfig { d: 15.0, alpha: 0.2, lambda: 1.6, q: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReceiverConfig {
    #[serde(rename = "d_Rx")]
    pub d_rx: f64,
    #[serde(rename = "Ts")]
    pub ts: f64,
    pub lambda_noise: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub v_norm: f64,
    /// Length of the simulated arrival window, s.
    pub window_s: f64,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig { d_rx: 1.0, ts: 0.1, lambda_noise: 0.0, d: 15.0, v_norm: 1.0, window_s: 300.0 }
    }
}

impl ReceiverConfig {
    pub fn params(&self) -> ReceiverParams {
        ReceiverParams {
            d_rx: self.d_rx,
            ts: self.ts,
            lambda_noise: self.lambda_noise,
            d: self.d,
            v_norm: self.v_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdrmSection {
    pub capacity: u64,
    pub release_quantum: u64,
    pub detection_threshold: f64,
    pub initial_store: u64,
    /// First endogenous pulse time, s.
    pub pulse_first_s: f64,
    pub pulse_period_s: f64,
    /// Pulse amplitude, molecules/µm³.
    pub pulse_amplitude: f64,
    pub release_mode: ReleaseMode,
}

impl Default for IdrmSection {
    fn default() -> Self {
        IdrmSection {
            capacity: 1_000_000,
            release_quantum: 10_000,
            detection_threshold: 1e-6,
            initial_store: 0,
            pulse_first_s: 60.0,
            pulse_period_s: 60.0,
            pulse_amplitude: 2e-6,
            release_mode: ReleaseMode::Quantum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridsConfig {
    pub pk_dt_h: f64,
    pub pk_horizon_h: f64,
    pub ecm_dt_s: f64,
    pub ecm_horizon_s: f64,
}

impl Default for GridsConfig {
    fn default() -> Self {
        GridsConfig { pk_dt_h: 1e-3, pk_horizon_h: 24.0, ecm_dt_s: 60.0, ecm_horizon_s: 86_400.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConversionConfig {
    pub mg_to_molecules: f64,
}

impl Default for ConversionConfig {
    fn default() -> Self {
        ConversionConfig { mg_to_molecules: MG_TO_MOLECULES_DEFAULT }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepsConfig {
    /// Circulation attenuation sweep.
    pub a: Vec<f64>,
    /// Barrier rate sweep, 1/h.
    pub beta: Vec<f64>,
}

impl Default for SweepsConfig {
    fn default() -> Self {
        SweepsConfig {
            a: vec![0.25, 0.35, 0.50, 0.60, 0.75],
            beta: vec![0.5, 0.75, 1.0, 1.25, 1.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub regimen: Vec<DoseEvent>,
    pub g1: G1Params,
    pub g2: G2Params,
    pub g3: G3Params,
    pub ecm: EcmConfig,
    /// Observation distances for the tissue sweep, mm.
    pub distances_mm: Vec<f64>,
    /// Distance used by the receiver and modulator stages, mm.
    pub representative_r_mm: f64,
    pub receiver: ReceiverConfig,
    pub idrm: IdrmSection,
    pub conversion: ConversionConfig,
    pub grids: GridsConfig,
    pub sweeps: SweepsConfig,
    pub seed: u64,
    /// Pinned generator name; only xoshiro256** is recognized.
    pub rng: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            regimen: vec![DoseEvent { time: 0.0, dose: 125.0 }],
            g1: G1Params { k: 1418.0, t1: 0.0547, t2: 0.6073, t0: 0.2461 },
            g2: G2Params { a: 0.5, t3: 0.2 },
            g3: G3Params { beta: 1.0 },
            ecm: EcmConfig::default(),
            distances_mm: vec![1.0, 1.2, 1.3, 1.4, 1.5],
            representative_r_mm: 1.3,
            receiver: ReceiverConfig::default(),
            idrm: IdrmSection::default(),
            conversion: ConversionConfig::default(),
            grids: GridsConfig::default(),
            sweeps: SweepsConfig::default(),
            seed: 42,
            rng: GENERATOR_NAME.to_string(),
        }
    }
}

impl PipelineConfig {
    pub fn ecm_params(&self) -> Result<EcmParams> {
        EcmParams::new(self.ecm.d, self.ecm.alpha, self.ecm.lambda)
    }

    pub fn idrm_config(&self) -> IdrmConfig {
        IdrmConfig {
            capacity: self.idrm.capacity,
            release_quantum: self.idrm.release_quantum,
            detection_threshold: self.idrm.detection_threshold,
            receiver: self.receiver.params(),
            release_mode: self.idrm.release_mode,
        }
    }

    pub fn seed(&self) -> RngSeed {
        RngSeed(self.seed)
    }

    /// Field-by-field validation. Returns every violation, plus soft warnings
    /// (values that are legal but outside their usual range).
    pub fn validate(&self) -> (Vec<ConfigIssue>, Vec<String>) {
        let mut issues = Vec::new();
        let mut warnings = Vec::new();
        let mut bad = |field: &str, message: String| {
            issues.push(ConfigIssue { field: field.into(), message });
        };

        for (i, d) in self.regimen.iter().enumerate() {
            if !(d.dose > 0.0) {
                bad(&format!("regimen[{i}].dose"), format!("must be positive, got {}", d.dose));
            }
            if !d.time.is_finite() || d.time < 0.0 {
                bad(&format!("regimen[{i}].time"), format!("must be finite and >= 0, got {}", d.time));
            }
        }
        if self.regimen.windows(2).any(|w| w[1].time < w[0].time) {
            bad("regimen", "dose times must be non-decreasing".into());
        }
        if let Err(e) = self.g1.validate() {
            bad("g1", e.to_string());
        }
        if !(self.g2.a > 0.0 && self.g2.a < 1.0) {
            bad("g2.a", format!("must lie in the open interval (0, 1), got {}", self.g2.a));
        }
        if !(self.g2.t3 >= 0.0) {
            bad("g2.T3", format!("must be nonnegative, got {}", self.g2.t3));
        }
        if !(self.g3.beta > 0.0) {
            bad("g3.beta", format!("must be positive, got {}", self.g3.beta));
        }
        if !(self.ecm.d > 0.0) {
            bad("ecm.D", format!("must be positive, got {}", self.ecm.d));
        }
        if !(self.ecm.alpha > 0.0 && self.ecm.alpha < 1.0) {
            bad("ecm.alpha", format!("must lie in (0, 1), got {}", self.ecm.alpha));
        } else if let Ok(p) = EcmParams::new(self.ecm.d.max(1e-300), self.ecm.alpha, self.ecm.lambda.max(1.0)) {
            warnings.extend(p.warnings());
        }
        if !(self.ecm.lambda >= 1.0) {
            bad("ecm.lambda", format!("tortuosity must be >= 1, got {}", self.ecm.lambda));
        }
        if !(self.ecm.q >= 0.0) {
            bad("ecm.q", format!("must be nonnegative, got {}", self.ecm.q));
        }
        if self.distances_mm.is_empty() {
            bad("distances_mm", "needs at least one distance".into());
        }
        for (i, r) in self.distances_mm.iter().enumerate() {
            if !(*r > 0.0) {
                bad(&format!("distances_mm[{i}]"), format!("must be positive, got {r}"));
            }
        }
        if !(self.representative_r_mm > 0.0) {
            bad("representative_r_mm", format!("must be positive, got {}", self.representative_r_mm));
        }
        if let Err(e) = self.receiver.params().validate() {
            bad("receiver", e.to_string());
        }
        if !(self.receiver.window_s >= 2.0 * self.receiver.ts) {
            bad(
                "receiver.window_s",
                format!(
                    "must cover at least two sampling periods ({} s), got {}",
                    2.0 * self.receiver.ts,
                    self.receiver.window_s
                ),
            );
        }
        if self.receiver.window_s > self.grids.ecm_horizon_s {
            bad(
                "receiver.window_s",
                format!(
                    "exceeds the tissue horizon {} s",
                    self.grids.ecm_horizon_s
                ),
            );
        }
        if let Err(e) = self.idrm_config().validate() {
            bad("idrm", e.to_string());
        }
        if self.idrm.initial_store > self.idrm.capacity {
            bad("idrm.initial_store", format!("exceeds capacity {}", self.idrm.capacity));
        }
        if !(self.idrm.pulse_period_s > 0.0) {
            bad("idrm.pulse_period_s", format!("must be positive, got {}", self.idrm.pulse_period_s));
        }
        if !(self.idrm.pulse_amplitude > 0.0) {
            bad("idrm.pulse_amplitude", format!("must be positive, got {}", self.idrm.pulse_amplitude));
        }
        if !(self.idrm.pulse_first_s >= 0.0) || self.idrm.pulse_first_s > self.grids.ecm_horizon_s {
            bad(
                "idrm.pulse_first_s",
                format!(
                    "must lie inside [0, {}], got {}",
                    self.grids.ecm_horizon_s, self.idrm.pulse_first_s
                ),
            );
        }
        if !(self.conversion.mg_to_molecules > 0.0) {
            bad(
                "conversion.mg_to_molecules",
                format!("must be positive, got {}", self.conversion.mg_to_molecules),
            );
        }
        for (field, v) in [
            ("grids.pk_dt_h", self.grids.pk_dt_h),
            ("grids.pk_horizon_h", self.grids.pk_horizon_h),
            ("grids.ecm_dt_s", self.grids.ecm_dt_s),
            ("grids.ecm_horizon_s", self.grids.ecm_horizon_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                bad(field, format!("must be positive and finite, got {v}"));
            }
        }
        if self.grids.ecm_horizon_s > self.grids.pk_horizon_h * 3600.0 {
            bad(
                "grids.ecm_horizon_s",
                format!(
                    "tissue horizon {} s extends past the plasma horizon {} s; the barrier trace cannot supply it",
                    self.grids.ecm_horizon_s,
                    self.grids.pk_horizon_h * 3600.0
                ),
            );
        }
        if let Some(last) = self.regimen.last() {
            if last.time > self.grids.pk_horizon_h {
                bad(
                    "grids.pk_horizon_h",
                    format!("horizon {} h does not cover the last dose at {} h", self.grids.pk_horizon_h, last.time),
                );
            }
        }
        if self.sweeps.a.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            bad("sweeps.a", format!("every attenuation must lie in (0, 1), got {:?}", self.sweeps.a));
        }
        if self.sweeps.beta.iter().any(|b| !(*b > 0.0)) {
            bad("sweeps.beta", format!("every rate must be positive, got {:?}", self.sweeps.beta));
        }
        if self.rng != GENERATOR_NAME {
            bad("rng", format!("only {GENERATOR_NAME} is supported, got {:?}", self.rng));
        }
        (issues, warnings)
    }
}

/// Recursively overlay `patch` onto `base`: objects merge key by key, every
/// other value replaces. Lets a partial config (`{"g2": {"a": 0.75}}`) inherit
/// the remaining defaults.
fn merge_json(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parse and validate a raw JSON config. Omitted fields take the documented
/// defaults (an empty object yields the full default config); a manifest (an
/// object with a `config` key) is accepted so a run can be reproduced from
/// its manifest alone. Returns the config plus soft warnings, or the complete
/// list of violations.
pub fn validate_config(raw: &str) -> Result<(PipelineConfig, Vec<String>)> {
    let mut value: serde_json::Value =
        serde_json::from_str(raw).map_err(|e| Error::Json(e.to_string()))?;
    if let Some(inner) = value.get("config") {
        if inner.is_object() {
            value = inner.clone();
        }
    }
    let mut full = serde_json::to_value(PipelineConfig::default())
        .map_err(|e| Error::Json(e.to_string()))?;
    merge_json(&mut full, value);
    let cfg: PipelineConfig =
        serde_json::from_value(full).map_err(|e| Error::Json(e.to_string()))?;
    let (issues, warnings) = cfg.validate();
    if issues.is_empty() {
        Ok((cfg, warnings))
    } else {
        Err(Error::Config(issues))
    }
}

/// Apply `--set key=value` dotted-path overrides onto a raw JSON config.
/// Values parse as JSON when possible (numbers, arrays, booleans), else as
/// strings. Intermediate objects are created on demand.
pub fn apply_override(root: &mut serde_json::Value, path: &str, raw_value: &str) -> Result<()> {
    let parsed: serde_json::Value = serde_json::from_str(raw_value)
        .unwrap_or_else(|_| serde_json::Value::String(raw_value.to_string()));
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::invalid(format!("bad override path: {path:?}")));
    }
    for part in &parts[..parts.len() - 1] {
        if !node.is_object() {
            return Err(Error::invalid(format!("override path {path:?} crosses a non-object")));
        }
        node = node
            .as_object_mut()
            .unwrap()
            .entry(part.to_string())
            .or_insert_with(|| serde_json::json!({}));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Error::invalid(format!("override path {path:?} crosses a non-object")))?;
    obj.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

// ---------------------------------------------------------------------------
// Pipeline execution
// ---------------------------------------------------------------------------

/// All traces produced by one run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub plasma: TimeSeries,
    pub circulation: TimeSeries,
    pub barrier: TimeSeries,
    /// Tissue concentration per configured distance (mm).
    pub ecm: Vec<(f64, TimeSeries)>,
    /// Receiver intensity at the representative distance, one value per
    /// sampling period.
    pub intensity: TimeSeries,
    /// Poisson arrival counts aligned with `intensity`.
    pub arrivals: Vec<u64>,
    pub idrm: IdrmRun,
}

/// Execute every stage; purely in-memory (no files). Deterministic per seed.
pub fn compute_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let (issues, _) = cfg.validate();
    if !issues.is_empty() {
        return Err(Error::Config(issues));
    }
    let regimen = Regimen::new(cfg.regimen.clone())?;
    let pk_grid = make_time_grid(0.0, cfg.grids.pk_horizon_h, cfg.grids.pk_dt_h, UnitTag::hours())?;

    // plasma: superposed dose responses
    let plasma = if regimen.is_empty() {
        TimeSeries::zeros(pk_grid.clone(), UnitTag::model_mg())
    } else {
        let base = g1_impulse_response(&cfg.g1, REFERENCE_DOSE_MG, &pk_grid)?;
        let mut acc = vec![0.0; pk_grid.len()];
        for d in regimen.doses() {
            let shifted = delay_scale(&base, d.time, d.dose / REFERENCE_DOSE_MG)?;
            for (a, b) in acc.iter_mut().zip(shifted.values()) {
                *a += b;
            }
        }
        TimeSeries::new(pk_grid.clone(), acc, UnitTag::model_mg())?
    };
    let circulation = g2_apply(&plasma, &cfg.g2)?;
    let barrier = g3_apply(&circulation, &cfg.g3)?;

    // barrier trace → per-step molecule deposits on the tissue grid
    let ecm_grid = make_time_grid(0.0, cfg.grids.ecm_horizon_s, cfg.grids.ecm_dt_s, UnitTag::seconds())?;
    let barrier_on_ecm = resample(&barrier, &ecm_grid)?;
    let step_h = cfg.grids.ecm_dt_s / 3600.0;
    let deposits = barrier_on_ecm
        .map(|v| v * cfg.conversion.mg_to_molecules * step_h)?
        .with_unit(UnitTag::molecules());

    let ecm_params = cfg.ecm_params()?;
    let mut ecm = Vec::with_capacity(cfg.distances_mm.len());
    for &r_mm in &cfg.distances_mm {
        let trace = superpose_source(&deposits, &ecm_params, r_mm * 1000.0)?;
        ecm.push((r_mm, trace));
    }
    let representative = superpose_source(&deposits, &ecm_params, cfg.representative_r_mm * 1000.0)?;

    // receiver window at the representative distance
    let rx = cfg.receiver.params();
    let n_samples = (cfg.receiver.window_s / rx.ts * (1.0 + 1e-9)).floor() as usize;
    let mut state = ReceiverState::new(rx)?;
    let mut rng = Rng::from_seed(cfg.seed().derive(1));
    let mut lambdas = Vec::with_capacity(n_samples);
    let mut arrivals = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let c = representative.value_at(k as f64 * rx.ts)?;
        let lambda = state.advance(c.max(0.0))?;
        lambdas.push(lambda);
        arrivals.push(rng.next_poisson(lambda)?);
    }
    let intensity_grid = TimeGrid::new(rx.ts, rx.ts, n_samples, UnitTag::seconds())?;
    let intensity = TimeSeries::new(intensity_grid, lambdas, UnitTag::counts_per_sample())?;

    // modulator over the tissue grid
    let pulses = EndogenousPulseTrain::periodic(
        cfg.idrm.pulse_first_s,
        cfg.idrm.pulse_period_s,
        cfg.idrm.pulse_amplitude,
        ecm_grid.t_end(),
    )?;
    let idrm = simulate(
        &cfg.idrm_config(),
        cfg.idrm.initial_store,
        &representative,
        &pulses,
        cfg.seed().derive(2),
    )?;

    Ok(PipelineOutput { plasma, circulation, barrier, ecm, intensity, arrivals, idrm })
}

fn write_trace(dir: &Path, name: &str, trace: &TimeSeries) -> Result<(String, String)> {
    let path = dir.join(name);
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    std::fs::write(&path, &buf)?;
    Ok((name.to_string(), fnv1a64_hex(&buf)))
}

fn write_receiver_csv(dir: &Path, name: &str, intensity: &TimeSeries, arrivals: &[u64]) -> Result<(String, String)> {
    let mut buf = Vec::new();
    writeln!(buf, "t_s,lambda,arrivals")?;
    for (i, (&lam, &arr)) in intensity.values().iter().zip(arrivals).enumerate() {
        writeln!(buf, "{},{},{arr}", fmt_full(intensity.grid().time_at(i)), fmt_full(lam))?;
    }
    std::fs::write(dir.join(name), &buf)?;
    Ok((name.to_string(), fnv1a64_hex(&buf)))
}

fn write_manifest(
    dir: &Path,
    cfg: &PipelineConfig,
    files: BTreeMap<String, String>,
) -> Result<PathBuf> {
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "generator": GENERATOR_NAME,
        "seed": cfg.seed,
        "config": cfg,
        "files": files,
    });
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Json(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Run the pipeline and write one CSV per trace plus `manifest.json` into
/// `out_dir` (created if missing). Returns the in-memory output.
pub fn run_pipeline(cfg: &PipelineConfig, out_dir: &Path) -> Result<PipelineOutput> {
    let out = compute_pipeline(cfg)?;
    std::fs::create_dir_all(out_dir)?;
    let mut files = BTreeMap::new();
    for (name, trace) in [
        ("plasma.csv", &out.plasma),
        ("circulation.csv", &out.circulation),
        ("barrier.csv", &out.barrier),
    ] {
        let (n, h) = write_trace(out_dir, name, trace)?;
        files.insert(n, h);
    }
    for (r_mm, trace) in &out.ecm {
        let (n, h) = write_trace(out_dir, &format!("ecm_r{r_mm}mm.csv"), trace)?;
        files.insert(n, h);
    }
    let (n, h) = write_receiver_csv(out_dir, "receiver.csv", &out.intensity, &out.arrivals)?;
    files.insert(n, h);
    let mut buf = Vec::new();
    out.idrm.write_csv(&mut buf)?;
    std::fs::write(out_dir.join("idrm.csv"), &buf)?;
    files.insert("idrm.csv".into(), fnv1a64_hex(&buf));
    write_manifest(out_dir, cfg, files)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Figure families
// ---------------------------------------------------------------------------

/// Emit the CSV family for one named figure. Returns the written file names.
pub fn reproduce_figure(name: &str, cfg: &PipelineConfig, out_dir: &Path) -> Result<Vec<String>> {
    let (issues, _) = cfg.validate();
    if !issues.is_empty() {
        return Err(Error::Config(issues));
    }
    std::fs::create_dir_all(out_dir)?;
    let pk_grid = make_time_grid(0.0, cfg.grids.pk_horizon_h, cfg.grids.pk_dt_h, UnitTag::hours())?;
    let dose = cfg.regimen.first().map(|d| d.dose).unwrap_or(REFERENCE_DOSE_MG);
    let mut files = BTreeMap::new();
    let mut names = Vec::new();

    match name {
        // single plasma curve for the identified parameters
        "fig5" => {
            let trace = g1_impulse_response(&cfg.g1, dose, &pk_grid)?;
            let (n, h) = write_trace(out_dir, "fig5_plasma.csv", &trace)?;
            names.push(n.clone());
            files.insert(n, h);
        }
        // circulation sweep over the attenuation values
        "fig_circ" => {
            let plasma = g1_impulse_response(&cfg.g1, dose, &pk_grid)?;
            for &a in &cfg.sweeps.a {
                let p = G2Params { a, t3: cfg.g2.t3 };
                let trace = g2_apply(&plasma, &p)?;
                let (n, h) = write_trace(out_dir, &format!("fig_circ_a{a}.csv"), &trace)?;
                names.push(n.clone());
                files.insert(n, h);
            }
        }
        // barrier sweep over crossing rates
        "fig6" => {
            let plasma = g1_impulse_response(&cfg.g1, dose, &pk_grid)?;
            let circulation = g2_apply(&plasma, &cfg.g2)?;
            for &beta in &cfg.sweeps.beta {
                let trace = g3_apply(&circulation, &G3Params { beta })?;
                let (n, h) = write_trace(out_dir, &format!("fig6_beta{beta}.csv"), &trace)?;
                names.push(n.clone());
                files.insert(n, h);
            }
        }
        // tissue concentration sweep over distances
        "fig7" => {
            let ecm_grid =
                make_time_grid(0.0, cfg.grids.ecm_horizon_s, cfg.grids.ecm_dt_s, UnitTag::seconds())?;
            let params = cfg.ecm_params()?;
            for &r_mm in &cfg.distances_mm {
                let trace = crate::ecm::ecm_time_profile(&params, cfg.ecm.q, r_mm * 1000.0, &ecm_grid)?;
                let (n, h) = write_trace(out_dir, &format!("fig7_r{r_mm}mm.csv"), &trace)?;
                names.push(n.clone());
                files.insert(n, h);
            }
        }
        // one curve per stage of the full chain
        "fig8" => {
            let out = compute_pipeline(cfg)?;
            let representative = out
                .ecm
                .iter()
                .find(|(r, _)| (*r - cfg.representative_r_mm).abs() < 1e-12)
                .map(|(_, t)| t.clone())
                .unwrap_or_else(|| out.ecm[0].1.clone());
            for (file, trace) in [
                ("fig8_plasma.csv", &out.plasma),
                ("fig8_circulation.csv", &out.circulation),
                ("fig8_barrier.csv", &out.barrier),
                ("fig8_ecm.csv", &representative),
                ("fig8_intensity.csv", &out.intensity),
            ] {
                let (n, h) = write_trace(out_dir, file, trace)?;
                names.push(n.clone());
                files.insert(n, h);
            }
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown figure {other:?}; expected one of fig5, fig6, fig7, fig8, fig_circ"
            )));
        }
    }
    write_manifest(out_dir, cfg, files)?;
    Ok(names)
}

// ---------------------------------------------------------------------------
// Plasma-data fitting entry point
// ---------------------------------------------------------------------------

/// Read `t_hours,value` samples (header optional) for the fit subcommand.
pub fn read_samples_csv(text: &str) -> Result<Vec<PlasmaSample>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if i == 0 && line.starts_with("t_") {
            continue; // header
        }
        let mut cols = line.split(',');
        let (Some(t), Some(v)) = (cols.next(), cols.next()) else {
            return Err(Error::invalid(format!("bad sample row {i}: {line:?}")));
        };
        let t: f64 = t.trim().parse().map_err(|_| Error::invalid(format!("bad time on row {i}: {t:?}")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::invalid(format!("bad value on row {i}: {v:?}")))?;
        out.push(PlasmaSample::new(t, v)?);
    }
    if out.is_empty() {
        return Err(Error::invalid("no samples in CSV"));
    }
    Ok(out)
}

/// Fit plasma samples starting from the config's plasma parameters and render
/// the result in the fixed output schema.
pub fn fit_samples(cfg: &PipelineConfig, samples: &[PlasmaSample], dose_mg: f64) -> Result<FitResult> {
    fit_g1(samples, dose_mg, &cfg.g1, &FitOptions::default())
}

/// JSON object `{"k", "T1", "T2", "T0", "sse", "converged"}`.
pub fn fit_result_json(fit: &FitResult) -> String {
    format!(
        "{{\"k\":{},\"T1\":{},\"T2\":{},\"T0\":{},\"sse\":{},\"converged\":{}}}",
        fit.params.k, fit.params.t1, fit.params.t2, fit.params.t0, fit.sse, fit.converged
    )
}

// ---------------------------------------------------------------------------

/// FNV-1a 64-bit content hash, rendered as fixed-width hex.
pub fn fnv1a64_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("fnv1a64:{hash:016x}")
}

/// Check a cascade first-arrival property used by the acceptance suite: the
/// first nonzero barrier sample sits one composed delay past the dose.
pub fn first_nonzero_time(trace: &TimeSeries) -> Option<f64> {
    trace
        .values()
        .iter()
        .position(|&v| v != 0.0)
        .map(|i| trace.grid().time_at(i))
}

/// Convenience wrapper used by tests and the demo subcommands: the single
/// reference-dose cascade on the config's grids.
pub fn reference_cascade(cfg: &PipelineConfig) -> Result<TimeSeries> {
    let grid = make_time_grid(0.0, cfg.grids.pk_horizon_h, cfg.grids.pk_dt_h, UnitTag::hours())?;
    cascade_response(&Regimen::single(REFERENCE_DOSE_MG)?, &cfg.g1, &cfg.g2, &cfg.g3, &grid)
}
