//! Coupled electro-thermo-mechanical time simulation of the actuator.
//!
//! One fixed-step explicit 4th-order integrator drives four accumulated
//! states: wire temperature and the three energy ledgers (electrical input,
//! convected, latent). Each step is split at PWM switching edges so the
//! integrated power is exact regardless of where an edge falls relative to
//! the grid; within a segment the drive is constant and the thermal ODE is
//! smooth. The phase fraction updates once per step from the end-of-step
//! temperature, and the latent sink seen by the thermal equation lags one
//! step behind the phase rate, which keeps every step explicit.

use crate::error::{Result, SimError};
use crate::material::{
    transition_band, update_phase_fraction, wire_contraction, MaterialParams, PhaseState,
};
use crate::mechanics::{tip_deflection, wire_stress, BeamParams, LoadingParams, WireParams};
use crate::thermal::{pwm_voltage, CircuitParams, DriveSignal, ThermalEnv};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Recording rate for every trace, Hz.
pub const SAMPLE_RATE: f64 = 10_000.0;
/// Production integrator step, s (one step per recorded sample).
pub const DEFAULT_STEP: f64 = 1.0e-4;
/// Reference integrator step, s.
pub const REFERENCE_STEP: f64 = 1.0e-6;
/// Settling time discarded before any steady-state measurement, s.
pub const WARMUP_S: f64 = 5.0;
/// Hanging more than this tears the crimps off the device, N.
pub const FAILURE_LOAD: f64 = 1.6e-3;

/// Everything needed to simulate one actuator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorConfig {
    pub material: MaterialParams,
    pub wire: WireParams,
    pub beam: BeamParams,
    pub loading: LoadingParams,
    pub thermal: ThermalEnv,
    pub circuit: CircuitParams,
    /// Wire temperature above which a run is flagged overdriven, degC.
    pub overheat_temperature: f64,
    /// Mass of the complete device, kg (lift-ratio bookkeeping only).
    pub device_mass: f64,
}

fn consistent(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1.0e-9 * a.abs().max(b.abs())
}

impl ActuatorConfig {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.wire.validate()?;
        self.beam.validate()?;
        self.loading.validate()?;
        self.thermal.validate()?;
        self.circuit.validate()?;
        if !consistent(self.thermal.wire_surface_area, self.wire.surface_area()) {
            return Err(SimError::invalid(
                "thermal wire_surface_area disagrees with wire geometry",
            ));
        }
        if !consistent(self.thermal.wire_mass, self.wire.mass(self.material.density)) {
            return Err(SimError::invalid(
                "thermal wire_mass disagrees with wire geometry and density",
            ));
        }
        if !consistent(
            self.circuit.wire_resistance,
            self.wire.resistance(self.material.wire_resistivity),
        ) {
            return Err(SimError::invalid(
                "circuit wire_resistance disagrees with wire geometry and resistivity",
            ));
        }
        if !(self.overheat_temperature > self.thermal.ambient_temperature) {
            return Err(SimError::invalid(
                "overheat_temperature must exceed ambient",
            ));
        }
        if !(self.device_mass > 0.0) {
            return Err(SimError::invalid("device_mass must be positive"));
        }
        Ok(())
    }
}

/// Energy ledger of one run, J. `stored` is the sensible heat left in the
/// wire at the end; the residual measures bookkeeping consistency only.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBalance {
    pub input: f64,
    pub convected: f64,
    pub latent: f64,
    pub stored: f64,
}

impl EnergyBalance {
    pub fn residual(&self) -> f64 {
        self.input - self.convected - self.latent - self.stored
    }

    pub fn relative_residual(&self) -> f64 {
        if self.input == 0.0 {
            self.residual().abs()
        } else {
            self.residual().abs() / self.input
        }
    }
}

/// Time series of one run, sampled on a uniform grid.
///
/// `start_time` is an absolute time on the drive's clock (phase zero is a
/// rising PWM edge); window slices keep it so that period segmentation stays
/// anchored to the drive. `energy` always refers to the whole run the trace
/// was cut from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub sample_rate: f64,
    pub start_time: f64,
    pub voltage: Vec<f64>,
    pub current: Vec<f64>,
    pub temperature: Vec<f64>,
    pub martensite_fraction: Vec<f64>,
    pub deflection: Vec<f64>,
    pub overcurrent_flag: bool,
    pub overheat_flag: bool,
    pub energy: EnergyBalance,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.deflection.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deflection.is_empty()
    }

    /// Absolute time of row `i`, s.
    pub fn time(&self, i: usize) -> f64 {
        self.start_time + i as f64 / self.sample_rate
    }

    /// Time spanned by the rows, s.
    pub fn duration(&self) -> f64 {
        if self.len() < 2 {
            0.0
        } else {
            (self.len() - 1) as f64 / self.sample_rate
        }
    }

    pub fn peak_deflection(&self) -> f64 {
        self.deflection.iter().fold(0.0_f64, |a, &d| a.max(d))
    }

    /// Keep the last `rows` samples.
    pub fn tail_rows(&self, rows: usize) -> Trace {
        let skip = self.len().saturating_sub(rows);
        Trace {
            sample_rate: self.sample_rate,
            start_time: self.time(skip),
            voltage: self.voltage[skip..].to_vec(),
            current: self.current[skip..].to_vec(),
            temperature: self.temperature[skip..].to_vec(),
            martensite_fraction: self.martensite_fraction[skip..].to_vec(),
            deflection: self.deflection[skip..].to_vec(),
            overcurrent_flag: self.overcurrent_flag,
            overheat_flag: self.overheat_flag,
            energy: self.energy,
        }
    }

    /// CSV export: `t,V,I,T,xi,delta`, SI units, 9 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,V,I,T,xi,delta")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
                self.time(i),
                self.voltage[i],
                self.current[i],
                self.temperature[i],
                self.martensite_fraction[i],
                self.deflection[i],
            )?;
        }
        Ok(())
    }
}

/// The final `window` seconds of a trace after a fixed settling discard.
///
/// The caller gets exactly the tail; whether the tail is actually settled is
/// checked separately (`signal::cycle_peak_drift`) so an unsettled run can be
/// flagged instead of silently trimmed differently.
pub fn steady_state_window(trace: &Trace, window: f64) -> Result<Trace> {
    if !(window > 0.0) {
        return Err(SimError::Window("window must be positive".into()));
    }
    let needed = WARMUP_S + window;
    if trace.duration() + 1.0e-9 < needed {
        return Err(SimError::Window(format!(
            "trace spans {:.3} s but warmup + window needs {:.3} s",
            trace.duration(),
            needed
        )));
    }
    let rows = (window * trace.sample_rate).round() as usize + 1;
    Ok(trace.tail_rows(rows))
}

/// PWM switching edges strictly inside (t0, t1), ascending.
fn switch_times(drive: &DriveSignal, t0: f64, t1: f64, out: &mut Vec<f64>) {
    out.clear();
    let period = 1.0 / drive.frequency;
    let on = drive.duty_cycle * period;
    let k0 = (t0 / period).floor() as i64 - 1;
    let k1 = (t1 / period).ceil() as i64 + 1;
    for k in k0..=k1 {
        let rise = k as f64 * period;
        for edge in [rise, rise + on] {
            if edge > t0 && edge < t1 {
                out.push(edge);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
}

struct StepState {
    temperature: f64,
    input: f64,
    convected: f64,
    latent: f64,
}

/// One RK4 advance over [a, b] with constant wire power and latent sink.
fn integrate_segment(
    s: &mut StepState,
    h: f64,
    power: f64,
    latent_power: f64,
    env: &ThermalEnv,
    heat_capacity: f64,
) {
    if h <= 0.0 {
        return;
    }
    let ha = env.conductance();
    let ambient = env.ambient_temperature;
    let conv = |t: f64| ha * (t - ambient);
    let f = |t: f64| (power - conv(t) - latent_power) / heat_capacity;

    let t = s.temperature;
    let k1 = f(t);
    let c1 = conv(t);
    let k2 = f(t + 0.5 * h * k1);
    let c2 = conv(t + 0.5 * h * k1);
    let k3 = f(t + 0.5 * h * k2);
    let c3 = conv(t + 0.5 * h * k2);
    let k4 = f(t + h * k3);
    let c4 = conv(t + h * k3);

    s.temperature = t + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s.input += power * h;
    s.convected += h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    s.latent += latent_power * h;
}

/// Run the coupled model.
///
/// `step` is the integrator step; it must evenly divide the 100 us sample
/// period, and recordings land on the 10 kHz grid regardless of `step`.
pub fn simulate(
    config: &ActuatorConfig,
    drive: &DriveSignal,
    load: f64,
    duration: f64,
    step: f64,
) -> Result<Trace> {
    config.validate()?;
    drive.validate()?;
    if !(load >= 0.0) || !load.is_finite() {
        return Err(SimError::invalid("load must be finite and >= 0"));
    }
    if load > FAILURE_LOAD {
        return Err(SimError::protocol(format!(
            "load {:.3} mN exceeds the {:.1} mN failure threshold",
            load * 1.0e3,
            FAILURE_LOAD * 1.0e3
        )));
    }
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(SimError::invalid("duration must be positive"));
    }
    if !(step > 0.0) || step > DEFAULT_STEP * (1.0 + 1.0e-12) {
        return Err(SimError::invalid(
            "step must be positive and no coarser than the 100 us sample period",
        ));
    }
    let ratio = DEFAULT_STEP / step;
    let record_every = ratio.round() as u64;
    if record_every == 0 || (ratio - record_every as f64).abs() > 1.0e-6 {
        return Err(SimError::invalid(
            "step must evenly divide the 100 us sample period",
        ));
    }
    let n_steps = (duration / step).round() as u64;
    if n_steps == 0 {
        return Err(SimError::invalid("duration shorter than one step"));
    }

    let stress = wire_stress(&config.loading, config.wire.cross_section(), load);
    let band = transition_band(&config.material, stress);
    let heat_capacity = config.thermal.wire_mass * config.material.specific_heat;
    let total_resistance = config.circuit.wire_resistance + config.circuit.series_resistance;
    let limit = config.circuit.current_limit;

    let mut state = StepState {
        temperature: config.thermal.ambient_temperature,
        input: 0.0,
        convected: 0.0,
        latent: 0.0,
    };
    let mut phase = PhaseState::at_rest(state.temperature);
    let mut latent_power = 0.0;
    let mut overcurrent = false;
    let mut overheat = false;

    let n_rows = (n_steps / record_every) as usize + 1;
    let mut trace = Trace {
        sample_rate: SAMPLE_RATE,
        start_time: 0.0,
        voltage: Vec::with_capacity(n_rows),
        current: Vec::with_capacity(n_rows),
        temperature: Vec::with_capacity(n_rows),
        martensite_fraction: Vec::with_capacity(n_rows),
        deflection: Vec::with_capacity(n_rows),
        overcurrent_flag: false,
        overheat_flag: false,
        energy: EnergyBalance::default(),
    };

    let record = |trace: &mut Trace, t: f64, state: &StepState, phase: &PhaseState| {
        let commanded = pwm_voltage(drive, t) / total_resistance;
        let current = commanded.min(limit);
        let contraction =
            wire_contraction(&config.material, phase.martensite_fraction, config.wire.rest_length);
        trace.voltage.push(current * total_resistance);
        trace.current.push(current);
        trace.temperature.push(state.temperature);
        trace.martensite_fraction.push(phase.martensite_fraction);
        trace
            .deflection
            .push(tip_deflection(&config.beam, &config.loading, contraction, load));
    };
    record(&mut trace, 0.0, &state, &phase);

    let mut events: Vec<f64> = Vec::with_capacity(4);
    for i in 0..n_steps {
        let t0 = i as f64 * step;
        let t1 = (i + 1) as f64 * step;
        switch_times(drive, t0, t1, &mut events);

        let mut a = t0;
        for idx in 0..=events.len() {
            let b = if idx < events.len() { events[idx] } else { t1 };
            let h = b - a;
            if h > 0.0 {
                let commanded = pwm_voltage(drive, 0.5 * (a + b)) / total_resistance;
                if commanded > limit + 1.0e-12 {
                    overcurrent = true;
                }
                let current = commanded.min(limit);
                let power = current * current * config.circuit.wire_resistance;
                integrate_segment(&mut state, h, power, latent_power, &config.thermal, heat_capacity);
                if state.temperature > config.overheat_temperature {
                    overheat = true;
                }
                // Update the hysteresis state at every segment boundary, not
                // just on the sample grid: a PWM edge interior to a step is a
                // temperature extremum, and skipping it would feed the branch
                // logic a clipped reversal point.
                let previous_fraction = phase.martensite_fraction;
                phase = update_phase_fraction(&phase, state.temperature, &band);
                latent_power = config.material.latent_heat
                    * config.thermal.wire_mass
                    * (phase.martensite_fraction - previous_fraction).abs()
                    / h;
            }
            a = b;
        }

        if !state.temperature.is_finite() {
            return Err(SimError::Numerical(format!(
                "temperature became non-finite at t = {t1:.6} s"
            )));
        }

        if (i + 1) % record_every == 0 {
            record(&mut trace, t1, &state, &phase);
        }
    }

    trace.overcurrent_flag = overcurrent;
    trace.overheat_flag = overheat;
    trace.energy = EnergyBalance {
        input: state.input,
        convected: state.convected,
        latent: state.latent,
        stored: heat_capacity * (state.temperature - config.thermal.ambient_temperature),
    };
    Ok(trace)
}

/// Same model at the 1 us reference step, recorded on the same 10 kHz grid.
pub fn reference_simulate(
    config: &ActuatorConfig,
    drive: &DriveSignal,
    load: f64,
    duration: f64,
) -> Result<Trace> {
    simulate(config, drive, load, duration, REFERENCE_STEP)
}

/// Divergence of the production integrator from the reference on one drive.
#[derive(Debug, Clone, Copy)]
pub struct OracleReport {
    /// max_t |deflection_fast - deflection_ref|, m.
    pub max_abs_difference: f64,
    /// Peak reference deflection, m.
    pub peak_deflection: f64,
    /// Whole-run energy residual of the production run, relative to input.
    pub energy_residual_fast: f64,
    /// Whole-run energy residual of the reference run, relative to input.
    pub energy_residual_reference: f64,
}

impl OracleReport {
    /// max |difference| / peak reference deflection.
    pub fn relative_divergence(&self) -> f64 {
        if self.peak_deflection == 0.0 {
            self.max_abs_difference
        } else {
            self.max_abs_difference / self.peak_deflection
        }
    }
}

pub fn compare_with_reference(
    config: &ActuatorConfig,
    drive: &DriveSignal,
    load: f64,
    duration: f64,
) -> Result<OracleReport> {
    let fast = simulate(config, drive, load, duration, DEFAULT_STEP)?;
    let reference = reference_simulate(config, drive, load, duration)?;
    if fast.len() != reference.len() {
        return Err(SimError::Numerical(
            "integrators produced different row counts".into(),
        ));
    }
    let max_abs_difference = fast
        .deflection
        .iter()
        .zip(&reference.deflection)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    Ok(OracleReport {
        max_abs_difference,
        peak_deflection: reference.peak_deflection(),
        energy_residual_fast: fast.energy.relative_residual(),
        energy_residual_reference: reference.energy.relative_residual(),
    })
}
