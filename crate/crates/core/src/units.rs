//! Time grids, sampled traces, and unit tags shared by every pipeline stage.
//!
//! The pharmacokinetic chain works in hours and milligrams; the diffusion and
//! receiver stages work in seconds and micrometers. Every quantity carries an
//! explicit [`UnitTag`] and all conversions happen at module boundaries, never
//! silently. Grids are uniform: sample `i` sits at `t_start + i * dt`, computed
//! directly so long grids accumulate no drift.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Physical dimension of a tagged quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimension {
    Time,
    Amount,
    Concentration,
    Length,
}

/// Unit tag: dimension plus a scale factor relative to the canonical base of
/// that dimension (hours, mg, molecules/µm³, µm). Serialized by symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitTag {
    pub dimension: Dimension,
    /// Size of one of this unit expressed in the dimension's base unit.
    pub scale: f64,
    pub symbol: &'static str,
}

impl Serialize for UnitTag {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol)
    }
}

impl<'de> Deserialize<'de> for UnitTag {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let symbol = String::deserialize(deserializer)?;
        UnitTag::from_symbol(&symbol)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown unit symbol {symbol:?}")))
    }
}

impl UnitTag {
    pub const fn hours() -> Self {
        UnitTag { dimension: Dimension::Time, scale: 1.0, symbol: "h" }
    }

    pub const fn seconds() -> Self {
        UnitTag { dimension: Dimension::Time, scale: 1.0 / 3600.0, symbol: "s" }
    }

    pub const fn milligrams() -> Self {
        UnitTag { dimension: Dimension::Amount, scale: 1.0, symbol: "mg" }
    }

    /// Plasma-chain output level. Numerically mg-scaled; kept distinct because
    /// the measured plasma axis has no published physical unit.
    pub const fn model_mg() -> Self {
        UnitTag { dimension: Dimension::Amount, scale: 1.0, symbol: "model_mg" }
    }

    pub const fn molecules() -> Self {
        UnitTag { dimension: Dimension::Amount, scale: 1.0, symbol: "molecules" }
    }

    /// Expected-count intensity of the receiver (counts per sampling period).
    pub const fn counts_per_sample() -> Self {
        UnitTag { dimension: Dimension::Amount, scale: 1.0, symbol: "counts_per_sample" }
    }

    pub const fn count() -> Self {
        UnitTag { dimension: Dimension::Amount, scale: 1.0, symbol: "count" }
    }

    pub const fn molecules_per_um3() -> Self {
        UnitTag { dimension: Dimension::Concentration, scale: 1.0, symbol: "molecules_per_um3" }
    }

    pub const fn micrometers() -> Self {
        UnitTag { dimension: Dimension::Length, scale: 1.0, symbol: "um" }
    }

    pub const fn millimeters() -> Self {
        UnitTag { dimension: Dimension::Length, scale: 1000.0, symbol: "mm" }
    }

    /// Look a tag up by the symbol used in CSV headers.
    pub fn from_symbol(symbol: &str) -> Option<UnitTag> {
        let known = [
            UnitTag::hours(),
            UnitTag::seconds(),
            UnitTag::milligrams(),
            UnitTag::model_mg(),
            UnitTag::molecules(),
            UnitTag::counts_per_sample(),
            UnitTag::count(),
            UnitTag::molecules_per_um3(),
            UnitTag::micrometers(),
            UnitTag::millimeters(),
        ];
        known.into_iter().find(|u| u.symbol == symbol)
    }
}

/// Convert a time value between two time-dimensioned tags.
pub fn convert_time(value: f64, from: UnitTag, to: UnitTag) -> Result<f64> {
    if from.dimension != Dimension::Time || to.dimension != Dimension::Time {
        return Err(Error::UnitMismatch {
            expected: "time/time".into(),
            found: format!("{:?}/{:?}", from.dimension, to.dimension),
        });
    }
    Ok(value * from.scale / to.scale)
}

/// Relative slack used when snapping floating-point step counts to integers.
const GRID_SLACK: f64 = 1e-9;

/// Uniform sampling grid with a time unit.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    n: usize,
    unit: UnitTag,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n: usize, unit: UnitTag) -> Result<Self> {
        if unit.dimension != Dimension::Time {
            return Err(Error::UnitMismatch {
                expected: "time".into(),
                found: format!("{:?}", unit.dimension),
            });
        }
        if !t_start.is_finite() || !dt.is_finite() {
            return Err(Error::NonFinite("time grid bounds".into()));
        }
        if dt <= 0.0 {
            return Err(Error::invalid(format!("grid dt must be positive, got {dt}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 samples, got {n}")));
        }
        Ok(TimeGrid { t_start, dt, n, unit })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 2 by construction
    }

    pub fn unit(&self) -> UnitTag {
        self.unit
    }

    /// Sample time of index `i`, computed as `t_start + i * dt` (no drift).
    pub fn time_at(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time_at(self.n - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.time_at(i))
    }

    /// True when the grid's unit is hours.
    pub fn is_hours(&self) -> bool {
        self.unit == UnitTag::hours()
    }

    pub fn is_seconds(&self) -> bool {
        self.unit == UnitTag::seconds()
    }
}

/// Build the grid covering `[t_start, t_end]` with step `dt`:
/// `n = floor((t_end - t_start) / dt) + 1`, last sample at or just below
/// `t_end` (a relative slack of 1e-9 absorbs floating-point step counts that
/// land a few ulp short of an integer).
pub fn make_time_grid(t_start: f64, t_end: f64, dt: f64, unit: UnitTag) -> Result<TimeGrid> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::invalid(format!("grid dt must be positive, got {dt}")));
    }
    if !(t_end > t_start) {
        return Err(Error::invalid(format!(
            "grid needs t_end > t_start, got [{t_start}, {t_end}]"
        )));
    }
    let steps = ((t_end - t_start) / dt * (1.0 + GRID_SLACK)).floor() as usize;
    TimeGrid::new(t_start, dt, steps + 1, unit)
}

/// Uniformly sampled scalar trace; the universal currency between stages.
/// All stored values are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    grid: TimeGrid,
    values: Vec<f64>,
    unit: UnitTag,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>, unit: UnitTag) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "series has {} values for a grid of {} samples",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "series value at index {i} ({})",
                values[i]
            )));
        }
        Ok(TimeSeries { grid, values, unit })
    }

    pub fn zeros(grid: TimeGrid, unit: UnitTag) -> Self {
        let n = grid.len();
        TimeSeries { grid, values: vec![0.0; n], unit }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> UnitTag {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Linear interpolation at time `t` (in the grid's own unit).
    /// Exact at sample times; errors outside the span (with grid slack).
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let pos = (t - self.grid.t_start()) / self.grid.dt();
        let max = (self.len() - 1) as f64;
        if pos < -GRID_SLACK * max.max(1.0) || pos > max * (1.0 + GRID_SLACK) + GRID_SLACK {
            return Err(Error::OutsideSpan(format!(
                "t = {t} {} outside [{}, {}]",
                self.grid.unit().symbol,
                self.grid.t_start(),
                self.grid.t_end()
            )));
        }
        let pos = pos.clamp(0.0, max);
        let i = (pos.floor() as usize).min(self.len() - 2);
        let frac = pos - i as f64;
        Ok(self.values[i] + frac * (self.values[i + 1] - self.values[i]))
    }

    /// Trapezoid integral over the whole span, in value-unit × time-unit.
    pub fn integral(&self) -> f64 {
        let dt = self.grid.dt();
        let inner: f64 = self.values[1..self.len() - 1].iter().sum();
        dt * (inner + 0.5 * (self.values[0] + self.values[self.len() - 1]))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the maximum value (first occurrence).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Map values through `f`, keeping grid and unit.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<TimeSeries> {
        TimeSeries::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect(), self.unit)
    }

    pub fn with_unit(mut self, unit: UnitTag) -> Self {
        self.unit = unit;
        self
    }
}

/// Resample a trace onto `target` by linear interpolation. The target grid
/// must lie within the source span after time-unit conversion. Identical
/// grids reproduce the source bitwise.
pub fn resample(series: &TimeSeries, target: &TimeGrid) -> Result<TimeSeries> {
    if *target == *series.grid() {
        return Ok(series.clone());
    }
    let factor = convert_time(1.0, target.unit(), series.grid().unit())?;
    let mut values = Vec::with_capacity(target.len());
    for t in target.times() {
        values.push(series.value_at(t * factor)?);
    }
    TimeSeries::new(target.clone(), values, series.unit())
}

// ---------------------------------------------------------------------------
// CSV serialization
// ---------------------------------------------------------------------------

/// Format a float with 17 significant digits, enough to round-trip any f64.
pub fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

impl TimeSeries {
    /// Write `t_<unit>,value_<unit>` rows at full double precision.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t_{},value_{}", self.grid.unit().symbol, self.unit.symbol)?;
        for (i, &v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", fmt_full(self.grid.time_at(i)), fmt_full(v))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parse a trace written by [`TimeSeries::write_csv`]. The grid is
    /// reconstructed from the first two sample times.
    pub fn read_csv<R: std::io::BufRead>(r: R) -> Result<TimeSeries> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty CSV"))??;
        let (t_unit, v_unit) = parse_csv_header(&header)?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (t, v) = parse_csv_row(&line)?;
            times.push(t);
            values.push(v);
        }
        if times.len() < 2 {
            return Err(Error::invalid("CSV trace needs at least 2 rows"));
        }
        let dt = times[1] - times[0];
        let grid = TimeGrid::new(times[0], dt, times.len(), t_unit)?;
        TimeSeries::new(grid, values, v_unit)
    }
}

fn parse_csv_header(header: &str) -> Result<(UnitTag, UnitTag)> {
    let mut cols = header.trim().split(',');
    let (Some(tcol), Some(vcol)) = (cols.next(), cols.next()) else {
        return Err(Error::invalid(format!("bad CSV header: {header}")));
    };
    let t_sym = tcol
        .strip_prefix("t_")
        .ok_or_else(|| Error::invalid(format!("bad time column name: {tcol}")))?;
    let v_sym = vcol.strip_prefix("value_").unwrap_or("mg");
    let t_unit = UnitTag::from_symbol(t_sym)
        .ok_or_else(|| Error::invalid(format!("unknown time unit symbol: {t_sym}")))?;
    let v_unit = UnitTag::from_symbol(v_sym).unwrap_or(UnitTag::milligrams());
    Ok((t_unit, v_unit))
}

fn parse_csv_row(line: &str) -> Result<(f64, f64)> {
    let mut cols = line.trim().split(',');
    let (Some(t), Some(v)) = (cols.next(), cols.next()) else {
        return Err(Error::invalid(format!("bad CSV row: {line}")));
    };
    let t: f64 = t
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad time value: {t}")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad sample value: {v}")))?;
    Ok((t, v))
}
