//! Zero-phase low-pass filtering and the displacement metric family.
//!
//! The filter is a cascade of second-order low-pass sections with Butterworth
//! pole placement, run forward and backward so the net phase is zero and the
//! amplitude response is the squared single-pass magnitude. Period metrics
//! are anchored to the drive clock: period `m` spans [m/f, (m+1)/f) in the
//! absolute time carried by the trace, so windows cut from a longer run keep
//! the same segmentation the drive generated.

use crate::actuator::Trace;
use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Low-pass description: cutoff and (even) order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub cutoff_hz: f64,
    pub order: u32,
}

impl Default for FilterSpec {
    /// 50 Hz sits above the fastest drive (40 Hz) and well below the
    /// sensor-noise band at the 10 kHz sample rate.
    fn default() -> Self {
        FilterSpec { cutoff_hz: 50.0, order: 4 }
    }
}

/// One normalized second-order section (a0 = 1).
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn lowpass(cutoff: f64, sample_rate: f64, q: f64) -> Biquad {
        let w0 = 2.0 * std::f64::consts::PI * cutoff / sample_rate;
        let (sin_w0, cos_w0) = w0.sin_cos();
        let alpha = sin_w0 / (2.0 * q);
        let a0 = 1.0 + alpha;
        Biquad {
            b0: (1.0 - cos_w0) / 2.0 / a0,
            b1: (1.0 - cos_w0) / a0,
            b2: (1.0 - cos_w0) / 2.0 / a0,
            a1: -2.0 * cos_w0 / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    fn is_stable(&self) -> bool {
        self.a2.abs() < 1.0 && self.a1.abs() < 1.0 + self.a2
    }

    fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// In-place forward pass (transposed direct form II), with the state
    /// pre-loaded to the steady state of the first sample so a constant
    /// prefix passes through without a start-up transient.
    fn forward(&self, x: &mut [f64]) {
        let g = self.dc_gain();
        let u = x.first().copied().unwrap_or(0.0);
        let mut z1 = u * (g - self.b0);
        let mut z2 = u * (self.b2 - self.a2 * g);
        for v in x.iter_mut() {
            let xi = *v;
            let y = self.b0 * xi + z1;
            z1 = self.b1 * xi - self.a1 * y + z2;
            z2 = self.b2 * xi - self.a2 * y;
            *v = y;
        }
    }

    /// Squared magnitude of the single-pass response at angular frequency
    /// `w` (rad/sample).
    fn squared_magnitude(&self, w: f64) -> f64 {
        let (s1, c1) = w.sin_cos();
        let (s2, c2) = (2.0 * w).sin_cos();
        let num_re = self.b0 + self.b1 * c1 + self.b2 * c2;
        let num_im = -(self.b1 * s1 + self.b2 * s2);
        let den_re = 1.0 + self.a1 * c1 + self.a2 * c2;
        let den_im = -(self.a1 * s1 + self.a2 * s2);
        (num_re * num_re + num_im * num_im) / (den_re * den_re + den_im * den_im)
    }
}

/// Designed zero-phase filter bound to a sample rate.
#[derive(Debug, Clone)]
pub struct ZeroPhaseFilter {
    sections: Vec<Biquad>,
    sample_rate: f64,
    cutoff: f64,
}

impl ZeroPhaseFilter {
    pub fn design(spec: &FilterSpec, sample_rate: f64) -> Result<ZeroPhaseFilter> {
        if !(sample_rate > 0.0) {
            return Err(SimError::invalid("sample_rate must be positive"));
        }
        if !(spec.cutoff_hz > 0.0 && spec.cutoff_hz < sample_rate / 2.0) {
            return Err(SimError::invalid(
                "cutoff must lie strictly inside (0, sample_rate/2)",
            ));
        }
        if spec.order < 2 || spec.order % 2 != 0 {
            return Err(SimError::invalid(
                "order must be an even count of poles (2, 4, ...)",
            ));
        }
        let n = spec.order;
        let mut sections = Vec::with_capacity((n / 2) as usize);
        for k in 0..n / 2 {
            // Butterworth pole pairs: theta_k = pi (2k+1) / (2n).
            let theta = std::f64::consts::PI * (2.0 * k as f64 + 1.0) / (2.0 * n as f64);
            let q = 1.0 / (2.0 * theta.sin());
            let s = Biquad::lowpass(spec.cutoff_hz, sample_rate, q);
            if !s.is_stable() {
                return Err(SimError::Numerical(
                    "designed filter section is unstable".into(),
                ));
            }
            sections.push(s);
        }
        Ok(ZeroPhaseFilter { sections, sample_rate, cutoff: spec.cutoff_hz })
    }

    /// Effective amplitude gain of the forward-backward application at
    /// `freq` Hz (the squared single-pass magnitude).
    pub fn amplitude_response(&self, freq: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * freq / self.sample_rate;
        self.sections
            .iter()
            .map(|s| s.squared_magnitude(w))
            .product()
    }

    fn pad_len(&self, n: usize) -> usize {
        let settle = (6.0 * self.sample_rate / self.cutoff).ceil() as usize;
        settle.min(n - 1)
    }

    /// Forward-backward filtering with odd-reflection end padding.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        if n <= 3 * 2 * self.sections.len() {
            return Err(SimError::invalid("signal too short for the filter order"));
        }
        // Working relative to the first sample keeps a constant signal at
        // exactly zero through both passes, so DC passes through bit-exact.
        let base = x[0];
        let pad = self.pad_len(n);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(-(x[i] - base));
        }
        ext.extend(x.iter().map(|&v| v - base));
        let last = x[n - 1] - base;
        for i in (n - 1 - pad..n - 1).rev() {
            ext.push(2.0 * last - (x[i] - base));
        }

        for s in &self.sections {
            s.forward(&mut ext);
        }
        ext.reverse();
        for s in &self.sections {
            s.forward(&mut ext);
        }
        ext.reverse();

        Ok(ext[pad..pad + n].iter().map(|&v| v + base).collect())
    }
}

/// Filter the deflection channel of a trace; other channels pass through.
pub fn zero_phase_lowpass(trace: &Trace, spec: &FilterSpec) -> Result<Trace> {
    let filter = ZeroPhaseFilter::design(spec, trace.sample_rate)?;
    let mut out = trace.clone();
    out.deflection = filter.apply(&trace.deflection)?;
    Ok(out)
}

/// Indices [i0, i1) of drive period `m` within the trace, if fully covered.
fn period_rows(trace: &Trace, frequency: f64, m: i64) -> Option<(usize, usize)> {
    let fs = trace.sample_rate;
    let t_start = m as f64 / frequency;
    let t_end = (m + 1) as f64 / frequency;
    let i0 = ((t_start - trace.start_time) * fs - 1.0e-9).ceil() as i64;
    let i1 = ((t_end - trace.start_time) * fs - 1.0e-9).ceil() as i64;
    if i0 < 0 || i1 as usize > trace.len() || i1 <= i0 {
        return None;
    }
    Some((i0 as usize, i1 as usize))
}

/// Max-minus-min of deflection per complete drive period, m.
///
/// Periods are anchored at the drive's phase zero: the first scored period
/// is the first one that starts at or after the trace start; a trailing
/// partial period is discarded.
pub fn mado_sequence(trace: &Trace, drive_frequency: f64) -> Result<Vec<f64>> {
    if !(drive_frequency > 0.0) {
        return Err(SimError::invalid("drive_frequency must be positive"));
    }
    if trace.sample_rate / drive_frequency < 10.0 {
        return Err(SimError::invalid(
            "fewer than 10 samples per drive period",
        ));
    }
    let m0 = (trace.start_time * drive_frequency - 1.0e-9).ceil() as i64;
    let mut out = Vec::new();
    let mut m = m0;
    while let Some((i0, i1)) = period_rows(trace, drive_frequency, m) {
        let slice = &trace.deflection[i0..i1];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in slice {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        out.push(hi - lo);
        m += 1;
    }
    if out.is_empty() {
        return Err(SimError::Window(
            "trace does not cover one full drive period".into(),
        ));
    }
    Ok(out)
}

/// Mean and standard error of a metric list.
pub fn amado(mado_values: &[f64]) -> Result<(f64, f64)> {
    if mado_values.is_empty() {
        return Err(SimError::invalid("empty metric list"));
    }
    let n = mado_values.len() as f64;
    let mean = mado_values.iter().sum::<f64>() / n;
    if mado_values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = mado_values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt() / n.sqrt()))
}

/// Average work output: load times mean loaded displacement, J.
pub fn amawo(load: f64, almado_mean: f64) -> Result<f64> {
    if load < 0.0 || almado_mean < 0.0 {
        return Err(SimError::invalid("amawo inputs must be >= 0"));
    }
    Ok(load * almado_mean)
}

/// Worst cycle-to-cycle change of per-period peak and trough, relative to
/// the window's overall swing. Small values mean the tail is settled.
pub fn cycle_peak_drift(trace: &Trace, drive_frequency: f64) -> Result<f64> {
    let m0 = (trace.start_time * drive_frequency - 1.0e-9).ceil() as i64;
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    let mut m = m0;
    while let Some((i0, i1)) = period_rows(trace, drive_frequency, m) {
        let slice = &trace.deflection[i0..i1];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in slice {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        peaks.push((hi, lo));
        m += 1;
    }
    if peaks.len() < 2 {
        return Err(SimError::Window(
            "need at least two full periods to measure drift".into(),
        ));
    }
    let global_hi = peaks.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let global_lo = peaks.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let swing = (global_hi - global_lo).max(1.0e-12);
    let mut worst = 0.0_f64;
    for w in peaks.windows(2) {
        let d = (w[1].0 - w[0].0).abs() + (w[1].1 - w[0].1).abs();
        worst = worst.max(d / swing);
    }
    Ok(worst)
}

/// One aggregated protocol point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    /// Drive frequency, Hz.
    pub frequency: f64,
    /// Duty cycle, fraction.
    pub duty_cycle: f64,
    /// Hanging load, N.
    pub load: f64,
    /// Mean per-period displacement swing, m.
    pub amado_mean: f64,
    /// Standard error of the mean, m.
    pub sem: f64,
    /// load x amado_mean, J.
    pub amawo: f64,
    /// Trials aggregated into this row.
    pub n_trials: u32,
    /// Per-frequency-group normalized AMADO; NaN until normalization runs.
    pub normalized: f64,
    /// Wire exceeded the safety temperature during the run.
    pub overheat: bool,
    /// Cycle-to-cycle peak drift stayed below 1 % in the measured tail.
    pub settled: bool,
    /// The run errored; numeric fields are NaN.
    pub failed: bool,
}

/// Fill the `normalized` column: each row divided by its frequency group's
/// maximum AMADO. Failed rows are ignored for the group max and keep NaN.
pub fn normalize_by_max(rows: &[MetricRow]) -> Result<Vec<MetricRow>> {
    let mut out = rows.to_vec();
    let mut frequencies: Vec<f64> = Vec::new();
    for r in rows {
        if !frequencies.iter().any(|&f| f == r.frequency) {
            frequencies.push(r.frequency);
        }
    }
    for f in frequencies {
        let valid: Vec<f64> = rows
            .iter()
            .filter(|r| r.frequency == f && !r.failed)
            .map(|r| r.amado_mean)
            .collect();
        if valid.is_empty() {
            // Every row in the group already failed; leave them NaN.
            continue;
        }
        let max = valid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0) {
            return Err(SimError::Degenerate(format!(
                "frequency group {f} Hz has no positive AMADO to normalize by"
            )));
        }
        for r in out.iter_mut().filter(|r| r.frequency == f && !r.failed) {
            r.normalized = r.amado_mean / max;
        }
    }
    Ok(out)
}

/// Metric table export: `freq_hz,duty_pct,load_mN,amado_mm,sem_mm,amawo_uJ,normalized`.
pub fn write_metric_csv<W: Write>(rows: &[MetricRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "freq_hz,duty_pct,load_mN,amado_mm,sem_mm,amawo_uJ,normalized")?;
    for r in rows {
        writeln!(
            w,
            "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
            r.frequency,
            r.duty_cycle * 100.0,
            r.load * 1.0e3,
            r.amado_mean * 1.0e3,
            r.sem * 1.0e3,
            r.amawo * 1.0e6,
            r.normalized,
        )?;
    }
    Ok(())
}
