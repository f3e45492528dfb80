//! Fitting free model parameters to measured characterization values.
//!
//! A calibration problem names a handful of free parameters with bounds, a
//! list of protocol points with target AMADO values, and an evaluation
//! budget. The objective is the weighted relative squared error over the
//! targets; the search is the bounded simplex from [`crate::optim`] with a
//! few restarts. Everything is deterministic given the problem seed, and the
//! fitted configuration never leaves the stated bounds.

use crate::actuator::{simulate, steady_state_window, ActuatorConfig, DEFAULT_STEP, WARMUP_S};
use crate::defaults;
use crate::error::{Result, SimError};
use crate::mechanics::deflection_gain;
use crate::optim::{minimize, Bounds, EvalRecord, SimplexOptions, SimplexResult};
use crate::signal::{amado, mado_sequence, zero_phase_lowpass, FilterSpec};
use crate::targets::Targets;
use crate::thermal::DriveSignal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Objective value standing in for "this candidate cannot be simulated".
/// Large but finite, so the simplex contracts away from infeasible corners
/// instead of stalling on infinities.
const INFEASIBLE: f64 = 1.0e9;

/// The free parameters a calibration may move. Each maps onto one scalar
/// field of [`ActuatorConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    /// Convective film coefficient, W/(m^2 degC).
    ConvectionCoefficient,
    /// Zero-stress austenite start, degC.
    AusteniteStart0,
    /// Zero-stress austenite finish, degC.
    AusteniteFinish0,
    /// Zero-stress martensite start, degC.
    MartensiteStart0,
    /// Zero-stress martensite finish, degC.
    MartensiteFinish0,
    /// Maximum recoverable strain eps_L, dimensionless.
    MaxRecoverableStrain,
    /// Wire offset from the bending axis, m.
    WireOffset,
    /// Tip softening under load, m/N.
    LoadCompliance,
}

impl ParamName {
    pub const ALL: [ParamName; 8] = [
        ParamName::ConvectionCoefficient,
        ParamName::AusteniteStart0,
        ParamName::AusteniteFinish0,
        ParamName::MartensiteStart0,
        ParamName::MartensiteFinish0,
        ParamName::MaxRecoverableStrain,
        ParamName::WireOffset,
        ParamName::LoadCompliance,
    ];

    /// Stable text key, used in reports and config files.
    pub fn key(&self) -> &'static str {
        match self {
            ParamName::ConvectionCoefficient => "convection_coefficient",
            ParamName::AusteniteStart0 => "austenite_start_0",
            ParamName::AusteniteFinish0 => "austenite_finish_0",
            ParamName::MartensiteStart0 => "martensite_start_0",
            ParamName::MartensiteFinish0 => "martensite_finish_0",
            ParamName::MaxRecoverableStrain => "max_recoverable_strain",
            ParamName::WireOffset => "wire_offset",
            ParamName::LoadCompliance => "load_compliance",
        }
    }

    pub fn parse(key: &str) -> Result<ParamName> {
        ParamName::ALL
            .iter()
            .copied()
            .find(|p| p.key() == key)
            .ok_or_else(|| SimError::invalid(format!("unknown calibration parameter `{key}`")))
    }

    /// Current value of this parameter in `config`.
    pub fn read(&self, config: &ActuatorConfig) -> f64 {
        match self {
            ParamName::ConvectionCoefficient => config.thermal.convection_coefficient,
            ParamName::AusteniteStart0 => config.material.austenite_start_0,
            ParamName::AusteniteFinish0 => config.material.austenite_finish_0,
            ParamName::MartensiteStart0 => config.material.martensite_start_0,
            ParamName::MartensiteFinish0 => config.material.martensite_finish_0,
            ParamName::MaxRecoverableStrain => config.material.max_recoverable_strain,
            ParamName::WireOffset => config.beam.wire_offset,
            ParamName::LoadCompliance => config.loading.load_compliance,
        }
    }

    /// Write `value` into `config`. Moving the wire offset also moves the
    /// load-to-stress gain: the same lever arm both amplifies contraction
    /// into tip motion and transmits a hanging load back into wire tension.
    pub fn apply(&self, config: &mut ActuatorConfig, value: f64) {
        match self {
            ParamName::ConvectionCoefficient => config.thermal.convection_coefficient = value,
            ParamName::AusteniteStart0 => config.material.austenite_start_0 = value,
            ParamName::AusteniteFinish0 => config.material.austenite_finish_0 = value,
            ParamName::MartensiteStart0 => config.material.martensite_start_0 = value,
            ParamName::MartensiteFinish0 => config.material.martensite_finish_0 = value,
            ParamName::MaxRecoverableStrain => config.material.max_recoverable_strain = value,
            ParamName::WireOffset => {
                config.beam.wire_offset = value;
                config.loading.load_stress_gain = deflection_gain(&config.beam);
            }
            ParamName::LoadCompliance => config.loading.load_compliance = value,
        }
    }
}

/// One free parameter with its search box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParameter {
    pub name: ParamName,
    pub lower: f64,
    pub upper: f64,
}

/// A point of the characterization protocol: drive plus hanging load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolPoint {
    /// Drive frequency, Hz.
    pub frequency: f64,
    /// Duty cycle, fraction.
    pub duty_cycle: f64,
    /// Hanging load, N.
    pub load: f64,
}

/// A measured value the model should reproduce at a protocol point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub point: ProtocolPoint,
    /// Target AMADO, m.
    pub value: f64,
    /// Relative weight in the objective.
    pub weight: f64,
}

/// Full statement of a calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProblem {
    pub free_parameters: Vec<FreeParameter>,
    pub targets: Vec<Target>,
    /// Total objective evaluations, split across restarts.
    pub budget: u32,
    /// Simplex restarts; the first starts from the incumbent config, the
    /// rest from seeded random points inside the box.
    pub restarts: u32,
    /// Steady-state measurement window per protocol point, s.
    pub window: f64,
    /// Supply voltage while on, V.
    pub on_voltage: f64,
    /// Seed for the restart starting points.
    pub seed: u64,
}

impl CalibrationProblem {
    pub fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(SimError::invalid("calibration needs at least one target"));
        }
        for t in &self.targets {
            if !(t.point.frequency > 0.0) {
                return Err(SimError::invalid("target frequency must be positive"));
            }
            if !(t.point.duty_cycle > 0.0 && t.point.duty_cycle < 1.0) {
                return Err(SimError::invalid("target duty cycle must be in (0, 1)"));
            }
            if !(t.point.load >= 0.0 && t.point.load <= crate::actuator::FAILURE_LOAD) {
                return Err(SimError::invalid("target load outside the protocol range"));
            }
            if !(t.value.is_finite() && t.value != 0.0) {
                return Err(SimError::invalid(
                    "target value must be finite and nonzero (relative error)",
                ));
            }
            if !(t.weight > 0.0 && t.weight.is_finite()) {
                return Err(SimError::invalid("target weight must be positive"));
            }
        }
        if self.budget < 50 {
            return Err(SimError::invalid("calibration budget must be >= 50"));
        }
        if self.restarts == 0 {
            return Err(SimError::invalid("restarts must be >= 1"));
        }
        let per_restart = self.budget as usize / self.restarts as usize;
        let need = self.free_parameters.len() + 2;
        if !self.free_parameters.is_empty() && per_restart < need {
            return Err(SimError::invalid(
                "budget per restart too small for a simplex",
            ));
        }
        let mut seen: Vec<ParamName> = Vec::new();
        for fp in &self.free_parameters {
            if !(fp.lower.is_finite() && fp.upper.is_finite() && fp.lower < fp.upper) {
                return Err(SimError::invalid("parameter bounds must be finite and ordered"));
            }
            if seen.contains(&fp.name) {
                return Err(SimError::invalid(format!(
                    "parameter `{}` listed twice",
                    fp.name.key()
                )));
            }
            seen.push(fp.name);
        }
        if !(self.window > 0.0) {
            return Err(SimError::invalid("window must be positive"));
        }
        if !(self.on_voltage > 0.0) {
            return Err(SimError::invalid("on_voltage must be positive"));
        }
        Ok(())
    }
}

/// The stock problem: every free parameter with bounds bracketing the
/// shipped defaults, the four AMADO maxima as equally weighted targets, and
/// the 1 Hz full-load endpoint pinning the load slope.
pub fn default_problem(targets: &Targets) -> CalibrationProblem {
    let free_parameters = vec![
        FreeParameter { name: ParamName::ConvectionCoefficient, lower: 1340.0, upper: 1400.0 },
        FreeParameter { name: ParamName::AusteniteStart0, lower: 4.5, upper: 6.5 },
        FreeParameter { name: ParamName::AusteniteFinish0, lower: 122.0, upper: 138.0 },
        FreeParameter { name: ParamName::MartensiteStart0, lower: 4.4, upper: 5.7 },
        FreeParameter { name: ParamName::MartensiteFinish0, lower: 2.2, upper: 2.9 },
        FreeParameter { name: ParamName::MaxRecoverableStrain, lower: 0.0123, upper: 0.0137 },
        FreeParameter { name: ParamName::WireOffset, lower: 0.162e-3, upper: 0.178e-3 },
        FreeParameter { name: ParamName::LoadCompliance, lower: 0.45, upper: 0.57 },
    ];
    let mut problem_targets: Vec<Target> = targets
        .amado_maxima
        .iter()
        .map(|m| Target {
            point: ProtocolPoint {
                frequency: m.frequency_hz,
                duty_cycle: m.duty_cycle(),
                load: 0.0,
            },
            value: m.amado(),
            weight: 1.0,
        })
        .collect();
    let ls = &targets.load_sweep;
    problem_targets.push(Target {
        point: ProtocolPoint {
            frequency: ls.frequency_hz,
            duty_cycle: ls.duty_cycle(),
            load: ls.full_load(),
        },
        value: ls.full_load_almado(),
        weight: 1.0,
    });
    CalibrationProblem {
        free_parameters,
        targets: problem_targets,
        budget: 500,
        restarts: 3,
        window: 6.0,
        on_voltage: defaults::BENCH_SUPPLY_VOLTAGE,
        seed: 7,
    }
}

/// Deterministic AMADO at one protocol point: simulate past warmup, keep the
/// steady window, low-pass, average the per-period maxima. Same pipeline as
/// the sweep harness, without noise or repeat trials.
pub fn measure_amado(
    config: &ActuatorConfig,
    point: &ProtocolPoint,
    window: f64,
    on_voltage: f64,
) -> Result<f64> {
    let drive = DriveSignal::new(point.frequency, point.duty_cycle, on_voltage);
    let trace = simulate(config, &drive, point.load, WARMUP_S + window, DEFAULT_STEP)?;
    let tail = steady_state_window(&trace, window)?;
    let filtered = zero_phase_lowpass(&tail, &FilterSpec::default())?;
    let seq = mado_sequence(&filtered, point.frequency)?;
    let (mean, _) = amado(&seq)?;
    Ok(mean)
}

fn config_with(base: &ActuatorConfig, free: &[FreeParameter], x: &[f64]) -> ActuatorConfig {
    let mut config = base.clone();
    for (fp, &v) in free.iter().zip(x) {
        fp.name.apply(&mut config, v);
    }
    config
}

/// Weighted relative squared error of candidate `x`; infeasible candidates
/// (invalid config or failed measurement) get a large finite penalty.
fn objective_value(base: &ActuatorConfig, problem: &CalibrationProblem, x: &[f64]) -> f64 {
    let config = config_with(base, &problem.free_parameters, x);
    if config.validate().is_err() {
        return INFEASIBLE;
    }
    // Targets are independent simulations; measure them in parallel, then
    // sum sequentially so the result does not depend on scheduling.
    let terms: Vec<f64> = problem
        .targets
        .par_iter()
        .map(|t| match measure_amado(&config, &t.point, problem.window, problem.on_voltage) {
            Ok(a) => t.weight * ((a - t.value) / t.value).powi(2),
            Err(_) => INFEASIBLE,
        })
        .collect();
    terms.iter().sum()
}

/// Residual of one target at the fitted config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetResidual {
    pub point: ProtocolPoint,
    /// Target value, m.
    pub target: f64,
    /// Achieved value, m.
    pub achieved: f64,
    pub weight: f64,
    /// (achieved - target) / target.
    pub relative_error: f64,
}

/// One fitted parameter with the box it searched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedParameter {
    pub name: ParamName,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Everything a calibration run learned.
#[derive(Debug, Clone)]
pub struct CalibrationReport {
    /// Objective at the incumbent config (clamped into the box).
    pub start_objective: f64,
    /// Objective at the fitted config.
    pub objective: f64,
    /// Whether the search beat the incumbent. A flat landscape leaves this
    /// false; that is a finding, not a failure.
    pub improved: bool,
    /// Objective evaluations actually spent (excluding the report passes).
    pub evaluations: u32,
    pub restarts: u32,
    pub parameters: Vec<FittedParameter>,
    pub residuals: Vec<TargetResidual>,
    /// Every evaluation in restart order: parameter vector and objective.
    pub log: Vec<EvalRecord>,
}

fn residual_pass(
    config: &ActuatorConfig,
    problem: &CalibrationProblem,
) -> Result<Vec<TargetResidual>> {
    let measured: Vec<Result<f64>> = problem
        .targets
        .par_iter()
        .map(|t| measure_amado(config, &t.point, problem.window, problem.on_voltage))
        .collect();
    problem
        .targets
        .iter()
        .zip(measured)
        .map(|(t, m)| {
            let achieved = m?;
            Ok(TargetResidual {
                point: t.point,
                target: t.value,
                achieved,
                weight: t.weight,
                relative_error: (achieved - t.value) / t.value,
            })
        })
        .collect()
}

fn weighted_error(residuals: &[TargetResidual]) -> f64 {
    residuals
        .iter()
        .map(|r| r.weight * r.relative_error * r.relative_error)
        .sum()
}

/// Fit the free parameters of `problem` starting from `config`.
///
/// Restart 0 starts at the incumbent values (clamped into the box), the
/// others at seeded random points; restarts run in parallel, each spending
/// an equal share of the budget. The best vertex across all restarts wins,
/// ties going to the earlier restart. With no free parameters the input
/// config comes back unchanged, with residuals measured as-is.
pub fn calibrate(
    problem: &CalibrationProblem,
    config: &ActuatorConfig,
) -> Result<(ActuatorConfig, CalibrationReport)> {
    problem.validate()?;
    config.validate()?;

    if problem.free_parameters.is_empty() {
        let residuals = residual_pass(config, problem)?;
        let objective = weighted_error(&residuals);
        return Ok((
            config.clone(),
            CalibrationReport {
                start_objective: objective,
                objective,
                improved: false,
                evaluations: 0,
                restarts: 0,
                parameters: Vec::new(),
                residuals,
                log: Vec::new(),
            },
        ));
    }

    let free = &problem.free_parameters;
    let pairs: Vec<(f64, f64)> = free.iter().map(|fp| (fp.lower, fp.upper)).collect();
    let bounds = Bounds::new(&pairs);
    let start: Vec<f64> = free
        .iter()
        .map(|fp| fp.name.read(config).clamp(fp.lower, fp.upper))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
    let mut starts: Vec<Vec<f64>> = vec![start.clone()];
    for _ in 1..problem.restarts {
        starts.push(
            free.iter()
                .map(|fp| fp.lower + rng.gen::<f64>() * (fp.upper - fp.lower))
                .collect(),
        );
    }

    let options = SimplexOptions {
        max_evaluations: problem.budget as usize / problem.restarts as usize,
        ..SimplexOptions::default()
    };
    let runs: Vec<Result<SimplexResult>> = starts
        .par_iter()
        .map(|s| {
            minimize(
                |x| objective_value(config, problem, x),
                s,
                &bounds,
                &options,
            )
        })
        .collect();

    let mut evaluations = 0usize;
    let mut log: Vec<EvalRecord> = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for run in runs {
        let run = run?;
        evaluations += run.evaluations;
        log.extend(run.log);
        let better = match &best {
            Some((value, _)) => run.best_value < *value,
            None => true,
        };
        if better {
            best = Some((run.best_value, run.best));
        }
    }
    let (best_value, best_params) = best.expect("restarts >= 1");

    // If every candidate was infeasible, fall back to the clamped incumbent
    // rather than returning a config the simulator rejected.
    let fitted_params = if best_value.is_finite() && best_value < INFEASIBLE {
        best_params
    } else {
        start.clone()
    };
    let fitted = config_with(config, free, &fitted_params);
    fitted.validate().map_err(|_| {
        SimError::Degenerate("no simulable configuration inside the calibration bounds".into())
    })?;

    let start_config = config_with(config, free, &start);
    let start_residuals = residual_pass(&start_config, problem)?;
    let residuals = residual_pass(&fitted, problem)?;
    let start_objective = weighted_error(&start_residuals);
    let objective = weighted_error(&residuals);

    let parameters = free
        .iter()
        .zip(&fitted_params)
        .map(|(fp, &value)| FittedParameter {
            name: fp.name,
            value,
            lower: fp.lower,
            upper: fp.upper,
        })
        .collect();

    Ok((
        fitted,
        CalibrationReport {
            start_objective,
            objective,
            improved: objective < start_objective,
            evaluations: evaluations as u32,
            restarts: problem.restarts,
            parameters,
            residuals,
            log,
        },
    ))
}
