//! The characterization protocols: duty-cycle sweeps, load sweeps, repeat
//! trials with synthetic measurement noise, and summary arithmetic.
//!
//! Every row follows the same pipeline: simulate, keep the steady tail,
//! low-pass the deflection, segment into drive periods, aggregate. The model
//! is deterministic, so repeat trials differ only through seeded additive
//! measurement noise, which reproduces the error-bar semantics of repeated
//! bench experiments. Rows are independent and run in parallel; assembly is
//! order-stable.

use crate::actuator::{simulate, steady_state_window, ActuatorConfig, Trace, DEFAULT_STEP, WARMUP_S};
use crate::defaults;
use crate::error::{Result, SimError};
use crate::signal::{
    amado, amawo, cycle_peak_drift, mado_sequence, normalize_by_max, zero_phase_lowpass,
    FilterSpec, MetricRow,
};
use crate::thermal::DriveSignal;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Settled means cycle peaks drift less than this, relative to the swing.
pub const SETTLED_DRIFT: f64 = 0.01;

/// Protocol description for sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    /// Drive frequencies, Hz.
    pub frequencies: Vec<f64>,
    /// Duty cycles, fractions.
    pub duty_cycles: Vec<f64>,
    /// Hanging loads, N (DC sweeps use the first entry).
    pub loads: Vec<f64>,
    /// Repeat trials per point.
    pub trials: u32,
    /// Steady-state measurement window, s.
    pub window: f64,
    /// Supply voltage while on, V.
    pub on_voltage: f64,
    /// Synthetic measurement noise on deflection, m (0 disables).
    pub noise_sigma: f64,
    /// Seed for the trial noise streams.
    pub seed: u64,
    /// Sensor low-pass applied before metrics.
    pub filter: FilterSpec,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty() || self.duty_cycles.is_empty() || self.loads.is_empty() {
            return Err(SimError::invalid("sweep lists must be non-empty"));
        }
        if self.trials == 0 {
            return Err(SimError::invalid("trials must be >= 1"));
        }
        if !(self.window > 0.0) {
            return Err(SimError::invalid("window must be positive"));
        }
        if !(self.on_voltage > 0.0) {
            return Err(SimError::invalid("on_voltage must be positive"));
        }
        if self.noise_sigma < 0.0 {
            return Err(SimError::invalid("noise_sigma must be >= 0"));
        }
        Ok(())
    }
}

/// The published duty-cycle sweep: {1, 5, 10, 15} Hz x {1..15} %, unloaded,
/// one 15 s measurement per point.
pub fn paper_dc_plan() -> SweepPlan {
    SweepPlan {
        frequencies: vec![1.0, 5.0, 10.0, 15.0],
        duty_cycles: (1..=15).map(|p| p as f64 / 100.0).collect(),
        loads: vec![0.0],
        trials: 1,
        window: 15.0,
        on_voltage: defaults::BENCH_SUPPLY_VOLTAGE,
        noise_sigma: 0.0,
        seed: 7,
        filter: FilterSpec::default(),
    }
}

/// The published load sweep: each frequency at its best duty cycle, loads
/// 0..1.44 mN, five noisy trials per point.
pub fn paper_load_plan() -> SweepPlan {
    SweepPlan {
        frequencies: vec![1.0, 5.0, 10.0, 15.0],
        duty_cycles: vec![0.06, 0.11, 0.10, 0.10],
        loads: defaults::loading().load_levels(),
        trials: 5,
        window: 15.0,
        on_voltage: defaults::BENCH_SUPPLY_VOLTAGE,
        noise_sigma: 10.0e-6,
        seed: 7,
        filter: FilterSpec::default(),
    }
}

/// The four published (frequency, best duty) pairs.
pub fn paper_pairs() -> Vec<(f64, f64)> {
    vec![(1.0, 0.06), (5.0, 0.11), (10.0, 0.10), (15.0, 0.10)]
}

fn trial_seed(seed: u64, row: u64, trial: u64) -> u64 {
    let mut z = seed
        ^ row.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ trial.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn with_noise(window: &Trace, sigma: f64, seed: u64) -> Trace {
    if sigma == 0.0 {
        return window.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma >= 0");
    let mut noisy = window.clone();
    for v in noisy.deflection.iter_mut() {
        *v += normal.sample(&mut rng);
    }
    noisy
}

struct PointMeasure {
    amado_mean: f64,
    sem: f64,
    overheat: bool,
    settled: bool,
}

/// One protocol point: simulate once, measure `trials` noisy copies.
fn measure_point(
    config: &ActuatorConfig,
    drive: &DriveSignal,
    load: f64,
    plan: &SweepPlan,
    row_index: u64,
) -> Result<PointMeasure> {
    let duration = WARMUP_S + plan.window;
    let trace = simulate(config, drive, load, duration, DEFAULT_STEP)?;
    let window = steady_state_window(&trace, plan.window)?;
    let drift = cycle_peak_drift(&window, drive.frequency)?;

    let mut trial_means = Vec::with_capacity(plan.trials as usize);
    let mut single_trial_seq = Vec::new();
    for trial in 0..plan.trials {
        let noisy = with_noise(&window, plan.noise_sigma, trial_seed(plan.seed, row_index, trial as u64));
        let filtered = zero_phase_lowpass(&noisy, &plan.filter)?;
        let seq = mado_sequence(&filtered, drive.frequency)?;
        let (mean, _) = amado(&seq)?;
        trial_means.push(mean);
        if plan.trials == 1 {
            single_trial_seq = seq;
        }
    }
    // With one trial the SEM comes from the period-to-period spread; with
    // several it comes from the spread of trial means, matching how repeated
    // bench experiments are summarized.
    let (amado_mean, sem) = if plan.trials == 1 {
        amado(&single_trial_seq)?
    } else {
        amado(&trial_means)?
    };
    Ok(PointMeasure {
        amado_mean,
        sem,
        overheat: trace.overheat_flag,
        settled: drift < SETTLED_DRIFT,
    })
}

fn build_row(
    config: &ActuatorConfig,
    frequency: f64,
    duty_cycle: f64,
    load: f64,
    plan: &SweepPlan,
    row_index: u64,
) -> MetricRow {
    let drive = DriveSignal::new(frequency, duty_cycle, plan.on_voltage);
    match measure_point(config, &drive, load, plan, row_index) {
        Ok(m) => MetricRow {
            frequency,
            duty_cycle,
            load,
            amado_mean: m.amado_mean,
            sem: m.sem,
            amawo: amawo(load, m.amado_mean).unwrap_or(f64::NAN),
            n_trials: plan.trials,
            normalized: f64::NAN,
            overheat: m.overheat,
            settled: m.settled,
            failed: false,
        },
        Err(_) => MetricRow {
            frequency,
            duty_cycle,
            load,
            amado_mean: f64::NAN,
            sem: f64::NAN,
            amawo: f64::NAN,
            n_trials: plan.trials,
            normalized: f64::NAN,
            overheat: false,
            settled: false,
            failed: true,
        },
    }
}

/// Duty-cycle sweep: one row per (frequency, duty cycle) at the plan's first
/// load, with the per-frequency normalized column filled in. Failed rows are
/// marked and kept; they do not abort the sweep.
pub fn run_dc_sweep(config: &ActuatorConfig, plan: &SweepPlan) -> Result<Vec<MetricRow>> {
    plan.validate()?;
    config.validate()?;
    let load = plan.loads[0];
    let points: Vec<(f64, f64)> = plan
        .frequencies
        .iter()
        .flat_map(|&f| plan.duty_cycles.iter().map(move |&dc| (f, dc)))
        .collect();
    let rows: Vec<MetricRow> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(f, dc))| build_row(config, f, dc, load, plan, i as u64))
        .collect();
    normalize_by_max(&rows)
}

/// Load sweep: one row per (pair, load), each aggregated over `plan.trials`
/// noisy trials. The normalized column stays NaN (absolute values are the
/// point of this table).
pub fn run_load_sweep(
    config: &ActuatorConfig,
    pairs: &[(f64, f64)],
    plan: &SweepPlan,
) -> Result<Vec<MetricRow>> {
    plan.validate()?;
    config.validate()?;
    if pairs.is_empty() {
        return Err(SimError::invalid("no (frequency, duty) pairs"));
    }
    let points: Vec<(f64, f64, f64)> = pairs
        .iter()
        .flat_map(|&(f, dc)| plan.loads.iter().map(move |&l| (f, dc, l)))
        .collect();
    let rows: Vec<MetricRow> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(f, dc, l))| build_row(config, f, dc, l, plan, i as u64))
        .collect();
    Ok(rows)
}

/// Max protocol load over device weight: how many of itself the actuator
/// can hold while still completing the protocol.
pub fn lift_ratio_report(config: &ActuatorConfig) -> f64 {
    let max_load = config
        .loading
        .load_for_beads(config.loading.max_beads)
        .expect("max_beads is within its own bound");
    max_load / (config.device_mass * defaults::GRAVITY)
}

/// Duty cycle with the largest AMADO at `frequency`, optionally skipping
/// overheat-flagged rows. Returns (duty_cycle, amado_mean).
pub fn argmax_duty(
    rows: &[MetricRow],
    frequency: f64,
    exclude_overheat: bool,
) -> Option<(f64, f64)> {
    rows.iter()
        .filter(|r| r.frequency == frequency && !r.failed)
        .filter(|r| !(exclude_overheat && r.overheat))
        .max_by(|a, b| a.amado_mean.partial_cmp(&b.amado_mean).unwrap())
        .map(|r| (r.duty_cycle, r.amado_mean))
}

/// The row at a given protocol point, if present.
pub fn row_at(rows: &[MetricRow], frequency: f64, duty_cycle: f64, load: f64) -> Option<&MetricRow> {
    rows.iter().find(|r| {
        r.frequency == frequency
            && (r.duty_cycle - duty_cycle).abs() < 1.0e-12
            && (r.load - load).abs() < 1.0e-12
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan() -> SweepPlan {
        SweepPlan {
            frequencies: vec![5.0],
            duty_cycles: vec![0.11],
            loads: vec![0.0],
            trials: 1,
            window: 2.0,
            on_voltage: 15.0,
            noise_sigma: 0.0,
            seed: 7,
            filter: FilterSpec::default(),
        }
    }

    #[test]
    fn single_point_sweep_equals_direct_pipeline() {
        let config = defaults::actuator();
        let plan = small_plan();
        let rows = run_dc_sweep(&config, &plan).unwrap();
        assert_eq!(rows.len(), 1);

        let drive = DriveSignal::new(5.0, 0.11, 15.0);
        let trace = simulate(&config, &drive, 0.0, WARMUP_S + 2.0, DEFAULT_STEP).unwrap();
        let window = steady_state_window(&trace, 2.0).unwrap();
        let filtered = zero_phase_lowpass(&window, &plan.filter).unwrap();
        let seq = mado_sequence(&filtered, 5.0).unwrap();
        let (mean, sem) = amado(&seq).unwrap();
        assert_eq!(rows[0].amado_mean, mean);
        assert_eq!(rows[0].sem, sem);
        assert_eq!(rows[0].normalized, 1.0);
    }

    #[test]
    fn load_sweep_at_zero_load_matches_dc_sweep() {
        let config = defaults::actuator();
        let plan = small_plan();
        let dc_rows = run_dc_sweep(&config, &plan).unwrap();
        let load_rows = run_load_sweep(&config, &[(5.0, 0.11)], &plan).unwrap();
        assert_eq!(load_rows.len(), 1);
        assert_eq!(load_rows[0].amado_mean, dc_rows[0].amado_mean);
        assert_eq!(load_rows[0].amawo, 0.0);
    }

    #[test]
    fn noisy_tables_are_seed_deterministic() {
        let config = defaults::actuator();
        let mut plan = small_plan();
        plan.trials = 3;
        plan.noise_sigma = 10.0e-6;
        let a = run_load_sweep(&config, &[(5.0, 0.11)], &plan).unwrap();
        let b = run_load_sweep(&config, &[(5.0, 0.11)], &plan).unwrap();
        let csv = |rows: &[MetricRow]| {
            let mut buf = Vec::new();
            crate::signal::write_metric_csv(rows, &mut buf).unwrap();
            buf
        };
        assert_eq!(csv(&a), csv(&b), "same seed must give byte-identical tables");
        assert!(a[0].sem > 0.0, "noise must spread the trial means");
        plan.seed = 8;
        let c = run_load_sweep(&config, &[(5.0, 0.11)], &plan).unwrap();
        assert_ne!(a[0].sem, c[0].sem);
    }

    #[test]
    fn unmeasurable_rows_are_marked_failed_not_fatal() {
        let config = defaults::actuator();
        let mut plan = small_plan();
        // A 0.05 Hz drive has a 20 s period: no full period fits the window.
        plan.frequencies = vec![0.05, 5.0];
        let rows = run_dc_sweep(&config, &plan).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].failed);
        assert!(rows[0].amado_mean.is_nan());
        assert!(!rows[1].failed);
    }

    #[test]
    fn lift_ratio_is_about_153() {
        let r = lift_ratio_report(&defaults::actuator());
        assert!((r - 152.905).abs() < 0.01, "lift ratio {r}");
    }

    #[test]
    fn paper_plans_have_published_shapes() {
        let dc = paper_dc_plan();
        assert_eq!(dc.frequencies.len() * dc.duty_cycles.len(), 60);
        let load = paper_load_plan();
        assert_eq!(load.loads.len(), 9);
        assert_eq!(load.trials, 5);
        assert_eq!(paper_pairs().len(), 4);
    }
}
