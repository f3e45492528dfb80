//! Run configuration: a TOML document mapping onto the core config structs.
//!
//! Keys carry explicit units in their names (`_mm`, `_hz`, `_pct`, ...) and
//! are converted to SI here, so a config file never contains a bare number
//! whose unit the reader has to guess. Every section and every key is
//! optional: omitted values fall back to the shipped defaults, and unknown
//! keys are rejected with the offending line number. A handful of derived
//! quantities (wire resistance, series resistance, wire surface area and
//! mass, the lever ratio) may be pinned explicitly but are normally left
//! out and recomputed from geometry, which keeps a config file from going
//! stale when the geometry above it changes.

use crate::actuator::ActuatorConfig;
use crate::calibrate::{default_problem, CalibrationProblem, FreeParameter, ParamName};
use crate::crawler::CrawlerConfig;
use crate::defaults;
use crate::error::{Result, SimError};
use crate::harness::{paper_dc_plan, paper_load_plan, SweepPlan};
use crate::material::MaterialParams;
use crate::mechanics::{deflection_gain, BeamParams, LoadingParams, WireParams};
use crate::signal::FilterSpec;
use crate::strider::StriderConfig;
use crate::targets::{reference_targets, Targets};
use crate::thermal::{CircuitParams, DriveSignal, ThermalEnv};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Whole config document. Every field has a shipped default, so `{}` is a
/// valid config and a file only states what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for every stochastic protocol in the run.
    pub seed: u64,
    /// Output directory for CSVs, plots, and reports.
    pub out_dir: String,
    /// Worker threads for sweep parallelism; 0 uses all cores.
    pub threads: usize,
    pub actuator: ActuatorSection,
    pub drive: DriveSection,
    pub sweep: SweepSection,
    pub load_sweep: SweepSection,
    pub calibration: CalibrationSection,
    pub crawler: CrawlerSection,
    pub strider: StriderSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            out_dir: "out".into(),
            threads: 0,
            actuator: ActuatorSection::default(),
            drive: DriveSection::default(),
            sweep: SweepSection::dc_default(),
            load_sweep: SweepSection::load_default(),
            calibration: CalibrationSection::default(),
            crawler: CrawlerSection::default(),
            strider: StriderSection::default(),
        }
    }
}

impl RunConfig {
    /// Parse a config file. Syntax errors, type errors, and unknown keys
    /// all come back with the line and column they occurred on.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            SimError::Io(format!("cannot read config '{}': {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| SimError::invalid(format!("config error: {e}")))
    }
}

/// Bench actuator description. Geometry in bench units, response constants
/// in SI; derived electrical/thermal values are optional pins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActuatorSection {
    /// Supply rail while the switch is on, V.
    pub supply_v: f64,
    /// Protocol abort temperature, degC.
    pub overheat_c: f64,
    /// Moving mass the work metric uses, mg.
    pub device_mass_mg: f64,
    pub material: MaterialSection,
    pub wire: WireSection,
    pub beam: BeamSection,
    pub loading: LoadingSection,
    pub thermal: ThermalSection,
    pub circuit: CircuitSection,
}

impl Default for ActuatorSection {
    fn default() -> Self {
        ActuatorSection {
            supply_v: defaults::BENCH_SUPPLY_VOLTAGE,
            overheat_c: defaults::OVERHEAT_TEMPERATURE,
            device_mass_mg: defaults::DEVICE_MASS * 1.0e6,
            material: MaterialSection::default(),
            wire: WireSection::default(),
            beam: BeamSection::default(),
            loading: LoadingSection::default(),
            thermal: ThermalSection::default(),
            circuit: CircuitSection::default(),
        }
    }
}

impl ActuatorSection {
    /// Build the SI actuator config, deriving any unpinned values.
    pub fn to_actuator(&self) -> ActuatorConfig {
        let material = self.material.to_material();
        let wire = self.wire.to_wire();
        let beam = self.beam.to_beam();
        ActuatorConfig {
            loading: self.loading.to_loading(&beam),
            thermal: self.thermal.to_thermal(&wire, &material),
            circuit: self.circuit.to_circuit(self.supply_v, &wire, &material),
            material,
            wire,
            beam,
            overheat_temperature: self.overheat_c,
            device_mass: self.device_mass_mg * 1.0e-6,
        }
    }

    /// Express an SI actuator config in config-file units, pinning every
    /// derived value so the emitted section reproduces it exactly.
    pub fn from_actuator(config: &ActuatorConfig) -> ActuatorSection {
        ActuatorSection {
            supply_v: config.circuit.series_resistance * config.circuit.current_limit
                + config.circuit.wire_resistance * config.circuit.current_limit,
            overheat_c: config.overheat_temperature,
            device_mass_mg: config.device_mass * 1.0e6,
            material: MaterialSection::from_material(&config.material),
            wire: WireSection::from_wire(&config.wire),
            beam: BeamSection::from_beam(&config.beam),
            loading: LoadingSection::from_loading(&config.loading),
            thermal: ThermalSection::from_thermal(&config.thermal),
            circuit: CircuitSection::from_circuit(&config.circuit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialSection {
    pub austenite_start_c: f64,
    pub austenite_finish_c: f64,
    pub martensite_start_c: f64,
    pub martensite_finish_c: f64,
    pub stress_coeff_austenite_mpa_per_c: f64,
    pub stress_coeff_martensite_mpa_per_c: f64,
    pub max_recoverable_strain: f64,
    pub latent_heat_j_per_kg: f64,
    pub density_kg_per_m3: f64,
    pub specific_heat_j_per_kg_c: f64,
    pub wire_resistivity_ohm_m: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        MaterialSection::from_material(&defaults::material())
    }
}

impl MaterialSection {
    fn to_material(&self) -> MaterialParams {
        MaterialParams {
            austenite_start_0: self.austenite_start_c,
            austenite_finish_0: self.austenite_finish_c,
            martensite_start_0: self.martensite_start_c,
            martensite_finish_0: self.martensite_finish_c,
            stress_coeff_austenite: self.stress_coeff_austenite_mpa_per_c * 1.0e6,
            stress_coeff_martensite: self.stress_coeff_martensite_mpa_per_c * 1.0e6,
            max_recoverable_strain: self.max_recoverable_strain,
            latent_heat: self.latent_heat_j_per_kg,
            density: self.density_kg_per_m3,
            specific_heat: self.specific_heat_j_per_kg_c,
            wire_resistivity: self.wire_resistivity_ohm_m,
        }
    }

    fn from_material(m: &MaterialParams) -> MaterialSection {
        MaterialSection {
            austenite_start_c: m.austenite_start_0,
            austenite_finish_c: m.austenite_finish_0,
            martensite_start_c: m.martensite_start_0,
            martensite_finish_c: m.martensite_finish_0,
            stress_coeff_austenite_mpa_per_c: m.stress_coeff_austenite / 1.0e6,
            stress_coeff_martensite_mpa_per_c: m.stress_coeff_martensite / 1.0e6,
            max_recoverable_strain: m.max_recoverable_strain,
            latent_heat_j_per_kg: m.latent_heat,
            density_kg_per_m3: m.density,
            specific_heat_j_per_kg_c: m.specific_heat,
            wire_resistivity_ohm_m: m.wire_resistivity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WireSection {
    pub diameter_um: f64,
    pub rest_length_mm: f64,
    pub active_length_mm: f64,
    pub count: u32,
}

impl Default for WireSection {
    fn default() -> Self {
        WireSection::from_wire(&defaults::wire())
    }
}

impl WireSection {
    fn to_wire(&self) -> WireParams {
        WireParams {
            diameter: self.diameter_um * 1.0e-6,
            rest_length: self.rest_length_mm * 1.0e-3,
            active_length: self.active_length_mm * 1.0e-3,
            count: self.count,
        }
    }

    fn from_wire(w: &WireParams) -> WireSection {
        WireSection {
            diameter_um: w.diameter * 1.0e6,
            rest_length_mm: w.rest_length * 1.0e3,
            active_length_mm: w.active_length * 1.0e3,
            count: w.count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamSection {
    pub length_mm: f64,
    pub width_mm: f64,
    pub thickness_mm: f64,
    pub wire_offset_mm: f64,
}

impl Default for BeamSection {
    fn default() -> Self {
        BeamSection::from_beam(&defaults::beam())
    }
}

impl BeamSection {
    fn to_beam(&self) -> BeamParams {
        BeamParams {
            length: self.length_mm * 1.0e-3,
            width: self.width_mm * 1.0e-3,
            thickness: self.thickness_mm * 1.0e-3,
            wire_offset: self.wire_offset_mm * 1.0e-3,
        }
    }

    fn from_beam(b: &BeamParams) -> BeamSection {
        BeamSection {
            length_mm: b.length * 1.0e3,
            width_mm: b.width * 1.0e3,
            thickness_mm: b.thickness * 1.0e3,
            wire_offset_mm: b.wire_offset * 1.0e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadingSection {
    pub bias_stress_mpa: f64,
    /// Lever ratio turning tip load into wire stress; omitted (null) means
    /// "recompute from beam geometry".
    pub load_stress_gain: Option<f64>,
    pub load_compliance: f64,
    pub constant_force_threshold_mn: f64,
    pub hook_force_mn: f64,
    pub first_bead_force_mn: f64,
    pub bead_increment_mn: f64,
    pub max_beads: u32,
}

impl Default for LoadingSection {
    fn default() -> Self {
        let mut section = LoadingSection::from_loading(&defaults::loading());
        section.load_stress_gain = None;
        section
    }
}

impl LoadingSection {
    fn to_loading(&self, beam: &BeamParams) -> LoadingParams {
        LoadingParams {
            bias_stress: self.bias_stress_mpa * 1.0e6,
            load_stress_gain: self.load_stress_gain.unwrap_or_else(|| deflection_gain(beam)),
            load_compliance: self.load_compliance,
            constant_force_threshold: self.constant_force_threshold_mn * 1.0e-3,
            hook_force: self.hook_force_mn * 1.0e-3,
            first_bead_force: self.first_bead_force_mn * 1.0e-3,
            bead_increment: self.bead_increment_mn * 1.0e-3,
            max_beads: self.max_beads,
        }
    }

    fn from_loading(l: &LoadingParams) -> LoadingSection {
        LoadingSection {
            bias_stress_mpa: l.bias_stress / 1.0e6,
            load_stress_gain: Some(l.load_stress_gain),
            load_compliance: l.load_compliance,
            constant_force_threshold_mn: l.constant_force_threshold * 1.0e3,
            hook_force_mn: l.hook_force * 1.0e3,
            first_bead_force_mn: l.first_bead_force * 1.0e3,
            bead_increment_mn: l.bead_increment * 1.0e3,
            max_beads: l.max_beads,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalSection {
    pub ambient_c: f64,
    pub convection_w_per_m2_c: f64,
    /// Omitted means "from wire geometry".
    pub wire_surface_area_mm2: Option<f64>,
    /// Omitted means "from wire geometry and density".
    pub wire_mass_mg: Option<f64>,
}

impl Default for ThermalSection {
    fn default() -> Self {
        ThermalSection {
            ambient_c: defaults::AMBIENT_TEMPERATURE,
            convection_w_per_m2_c: defaults::thermal_env().convection_coefficient,
            wire_surface_area_mm2: None,
            wire_mass_mg: None,
        }
    }
}

impl ThermalSection {
    fn to_thermal(&self, wire: &WireParams, material: &MaterialParams) -> ThermalEnv {
        ThermalEnv {
            ambient_temperature: self.ambient_c,
            convection_coefficient: self.convection_w_per_m2_c,
            wire_surface_area: self
                .wire_surface_area_mm2
                .map_or_else(|| wire.surface_area(), |v| v * 1.0e-6),
            wire_mass: self
                .wire_mass_mg
                .map_or_else(|| wire.mass(material.density), |v| v * 1.0e-6),
        }
    }

    fn from_thermal(t: &ThermalEnv) -> ThermalSection {
        ThermalSection {
            ambient_c: t.ambient_temperature,
            convection_w_per_m2_c: t.convection_coefficient,
            wire_surface_area_mm2: Some(t.wire_surface_area * 1.0e6),
            wire_mass_mg: Some(t.wire_mass * 1.0e6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitSection {
    /// Omitted means "from resistivity and wire geometry".
    pub wire_resistance_ohm: Option<f64>,
    /// Omitted means "sized so the supply rail delivers the current limit".
    pub series_resistance_ohm: Option<f64>,
    pub current_limit_a: f64,
}

impl Default for CircuitSection {
    fn default() -> Self {
        CircuitSection {
            wire_resistance_ohm: None,
            series_resistance_ohm: None,
            current_limit_a: defaults::CURRENT_LIMIT,
        }
    }
}

impl CircuitSection {
    fn to_circuit(
        &self,
        supply_v: f64,
        wire: &WireParams,
        material: &MaterialParams,
    ) -> CircuitParams {
        let wire_resistance = self
            .wire_resistance_ohm
            .unwrap_or_else(|| wire.resistance(material.wire_resistivity));
        CircuitParams {
            wire_resistance,
            series_resistance: self
                .series_resistance_ohm
                .unwrap_or(supply_v / self.current_limit_a - wire_resistance),
            current_limit: self.current_limit_a,
        }
    }

    fn from_circuit(c: &CircuitParams) -> CircuitSection {
        CircuitSection {
            wire_resistance_ohm: Some(c.wire_resistance),
            series_resistance_ohm: Some(c.series_resistance),
            current_limit_a: c.current_limit,
        }
    }
}

/// One drive point for `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    pub frequency_hz: f64,
    pub duty_pct: f64,
    /// Omitted means "the actuator supply rail".
    pub on_voltage_v: Option<f64>,
    pub off_voltage_v: f64,
    pub load_mn: f64,
    pub duration_s: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        DriveSection {
            frequency_hz: 1.0,
            duty_pct: 6.0,
            on_voltage_v: None,
            off_voltage_v: 0.0,
            load_mn: 0.0,
            duration_s: 20.0,
        }
    }
}

impl DriveSection {
    pub fn to_drive(&self, supply_v: f64) -> DriveSignal {
        DriveSignal {
            frequency: self.frequency_hz,
            duty_cycle: self.duty_pct / 100.0,
            on_voltage: self.on_voltage_v.unwrap_or(supply_v),
            off_voltage: self.off_voltage_v,
        }
    }

    pub fn load_n(&self) -> f64 {
        self.load_mn * 1.0e-3
    }
}

/// A sweep grid; used for both the duty-cycle and the load protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default = "SweepSection::dc_default", deny_unknown_fields)]
pub struct SweepSection {
    pub frequencies_hz: Vec<f64>,
    pub duty_cycles_pct: Vec<f64>,
    /// Omitted means "the bead schedule of the loading section".
    pub loads_mn: Option<Vec<f64>>,
    pub trials: u32,
    pub window_s: f64,
    /// Omitted means "the actuator supply rail".
    pub on_voltage_v: Option<f64>,
    pub noise_sigma_um: f64,
    /// Omitted means "the run seed".
    pub seed: Option<u64>,
    pub filter_cutoff_hz: f64,
    pub filter_order: u32,
}

impl SweepSection {
    fn from_plan(plan: &SweepPlan, loads: Option<Vec<f64>>) -> SweepSection {
        SweepSection {
            frequencies_hz: plan.frequencies.clone(),
            duty_cycles_pct: plan.duty_cycles.iter().map(|d| d * 100.0).collect(),
            loads_mn: loads,
            trials: plan.trials,
            window_s: plan.window,
            on_voltage_v: None,
            noise_sigma_um: plan.noise_sigma * 1.0e6,
            seed: None,
            filter_cutoff_hz: plan.filter.cutoff_hz,
            filter_order: plan.filter.order,
        }
    }

    pub fn dc_default() -> SweepSection {
        SweepSection::from_plan(&paper_dc_plan(), Some(vec![0.0]))
    }

    pub fn load_default() -> SweepSection {
        // Loads left unpinned: the bead schedule follows the loading section.
        SweepSection::from_plan(&paper_load_plan(), None)
    }

    pub fn to_plan(
        &self,
        actuator: &ActuatorConfig,
        supply_v: f64,
        run_seed: u64,
    ) -> SweepPlan {
        SweepPlan {
            frequencies: self.frequencies_hz.clone(),
            duty_cycles: self.duty_cycles_pct.iter().map(|d| d / 100.0).collect(),
            loads: match &self.loads_mn {
                Some(loads) => loads.iter().map(|l| l * 1.0e-3).collect(),
                None => actuator.loading.load_levels(),
            },
            trials: self.trials,
            window: self.window_s,
            on_voltage: self.on_voltage_v.unwrap_or(supply_v),
            noise_sigma: self.noise_sigma_um * 1.0e-6,
            seed: self.seed.unwrap_or(run_seed),
            filter: FilterSpec {
                cutoff_hz: self.filter_cutoff_hz,
                order: self.filter_order,
            },
        }
    }
}

/// One free calibration parameter with its search interval (SI units of the
/// parameter named by `key`; see `ParamName` for the catalogue).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParameterSpec {
    pub key: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    pub budget: u32,
    pub restarts: u32,
    pub window_s: f64,
    /// Omitted means "the actuator supply rail".
    pub on_voltage_v: Option<f64>,
    /// Omitted means "the run seed".
    pub seed: Option<u64>,
    /// Omitted means "the shipped search box around the defaults".
    pub free_parameters: Option<Vec<FreeParameterSpec>>,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        CalibrationSection {
            budget: 500,
            restarts: 3,
            window_s: 6.0,
            on_voltage_v: None,
            seed: None,
            free_parameters: None,
        }
    }
}

impl CalibrationSection {
    pub fn to_problem(
        &self,
        targets: &Targets,
        supply_v: f64,
        run_seed: u64,
    ) -> Result<CalibrationProblem> {
        let mut problem = default_problem(targets);
        problem.budget = self.budget;
        problem.restarts = self.restarts;
        problem.window = self.window_s;
        problem.on_voltage = self.on_voltage_v.unwrap_or(supply_v);
        problem.seed = self.seed.unwrap_or(run_seed);
        if let Some(specs) = &self.free_parameters {
            problem.free_parameters = specs
                .iter()
                .map(|s| {
                    Ok(FreeParameter {
                        name: ParamName::parse(&s.key)?,
                        lower: s.lower,
                        upper: s.upper,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
        }
        Ok(problem)
    }
}

/// Crawler fit plus the drive points `crawl` visits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrawlerSection {
    pub supply_v: f64,
    pub body_mass_mg: f64,
    pub foot_mass_mg: f64,
    pub body_length_mm: f64,
    pub friction_sharp: f64,
    pub friction_smooth: f64,
    pub foot_separation_rest_mm: f64,
    pub leg_gain: f64,
    pub leg_stiffness_n_per_m: f64,
    pub leg_damping_ns_per_m: f64,
    pub bounce_stiffness_n_per_m: f64,
    pub bounce_damping_ns_per_m: f64,
    pub lift_gain: f64,
    pub lift_limit_mm: f64,
    pub bristle_lean: f64,
    pub vibration_threshold_hz: f64,
    pub vibration_drift_mm_per_s: f64,
    pub duration_s: f64,
    pub speed_window_s: f64,
    /// Drive points visited by `crawl`: [frequency_hz, duty_pct] rows.
    pub points_hz_pct: Vec<[f64; 2]>,
}

impl Default for CrawlerSection {
    fn default() -> Self {
        let c = defaults::crawler(1.0, 0.06);
        CrawlerSection {
            supply_v: defaults::CRAWLER_SUPPLY_VOLTAGE,
            body_mass_mg: c.body_mass * 1.0e6,
            foot_mass_mg: c.foot_mass * 1.0e6,
            body_length_mm: c.body_length * 1.0e3,
            friction_sharp: c.friction_sharp,
            friction_smooth: c.friction_smooth,
            foot_separation_rest_mm: c.foot_separation_rest * 1.0e3,
            leg_gain: c.leg_gain,
            leg_stiffness_n_per_m: c.leg_stiffness,
            leg_damping_ns_per_m: c.leg_damping,
            bounce_stiffness_n_per_m: c.bounce_stiffness,
            bounce_damping_ns_per_m: c.bounce_damping,
            lift_gain: c.lift_gain,
            lift_limit_mm: c.lift_limit * 1.0e3,
            bristle_lean: c.bristle_lean,
            vibration_threshold_hz: c.vibration_threshold,
            vibration_drift_mm_per_s: c.vibration_drift * 1.0e3,
            duration_s: 15.0,
            speed_window_s: 10.0,
            points_hz_pct: vec![
                [1.0, 6.0],
                [5.0, 11.0],
                [10.0, 10.0],
                [15.0, 10.0],
                [20.0, 10.0],
                [40.0, 10.0],
            ],
        }
    }
}

impl CrawlerSection {
    pub fn to_crawler(
        &self,
        actuator: &ActuatorSection,
        frequency_hz: f64,
        duty_pct: f64,
    ) -> CrawlerConfig {
        let mut device = actuator.to_actuator();
        device.circuit = actuator
            .circuit
            .to_circuit(self.supply_v, &device.wire, &device.material);
        CrawlerConfig {
            body_mass: self.body_mass_mg * 1.0e-6,
            foot_mass: self.foot_mass_mg * 1.0e-6,
            body_length: self.body_length_mm * 1.0e-3,
            friction_sharp: self.friction_sharp,
            friction_smooth: self.friction_smooth,
            foot_separation_rest: self.foot_separation_rest_mm * 1.0e-3,
            leg_gain: self.leg_gain,
            leg_stiffness: self.leg_stiffness_n_per_m,
            leg_damping: self.leg_damping_ns_per_m,
            bounce_stiffness: self.bounce_stiffness_n_per_m,
            bounce_damping: self.bounce_damping_ns_per_m,
            lift_gain: self.lift_gain,
            lift_limit: self.lift_limit_mm * 1.0e-3,
            bristle_lean: self.bristle_lean,
            vibration_threshold: self.vibration_threshold_hz,
            vibration_drift: self.vibration_drift_mm_per_s * 1.0e-3,
            drive: DriveSignal::new(frequency_hz, duty_pct / 100.0, self.supply_v),
            actuator: device,
        }
    }
}

/// Strider fit plus its two recorded drive points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StriderSection {
    pub supply_v: f64,
    pub body_mass_mg: f64,
    pub body_length_mm: f64,
    pub foot_perimeter_mm: f64,
    pub surface_tension_n_per_m: f64,
    pub transmission_gain_rad_per_m: f64,
    pub stroke_limit_rad: f64,
    pub fin_area_mm2: f64,
    pub drag_coefficient: f64,
    pub recovery_factor: f64,
    pub moment_arm_mm: f64,
    pub yaw_drag_nm_s_per_rad: f64,
    pub linear_drag_n_s_per_m: f64,
    pub tether_force_n: f64,
    pub tether_torque_nm: f64,
    pub straight_frequency_hz: f64,
    pub straight_duty_pct: f64,
    pub turn_frequency_hz: f64,
    pub turn_duty_pct: f64,
    pub duration_s: f64,
    pub speed_window_s: f64,
}

impl Default for StriderSection {
    fn default() -> Self {
        let s = defaults::strider();
        let straight = s.left_drive.expect("shipped strider drives both sides");
        StriderSection {
            supply_v: defaults::STRIDER_SUPPLY_VOLTAGE,
            body_mass_mg: s.body_mass * 1.0e6,
            body_length_mm: s.body_length * 1.0e3,
            foot_perimeter_mm: s.foot_perimeter_total * 1.0e3,
            surface_tension_n_per_m: s.water_surface_tension,
            transmission_gain_rad_per_m: s.transmission_gain,
            stroke_limit_rad: s.stroke_limit,
            fin_area_mm2: s.fin_area * 1.0e6,
            drag_coefficient: s.drag_coefficient,
            recovery_factor: s.recovery_factor,
            moment_arm_mm: s.propulsor_moment_arm * 1.0e3,
            yaw_drag_nm_s_per_rad: s.yaw_drag_coefficient,
            linear_drag_n_s_per_m: s.linear_drag_coefficient,
            tether_force_n: s.tether_force_bias,
            tether_torque_nm: s.tether_torque_bias,
            straight_frequency_hz: straight.frequency,
            straight_duty_pct: straight.duty_cycle * 100.0,
            turn_frequency_hz: 5.0,
            turn_duty_pct: 11.0,
            duration_s: 15.0,
            speed_window_s: 10.0,
        }
    }
}

/// Which propulsors a strider run drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StriderMode {
    Straight,
    TurnLeft,
    TurnRight,
}

impl StriderMode {
    pub fn parse(text: &str) -> Result<StriderMode> {
        match text {
            "straight" => Ok(StriderMode::Straight),
            "turn-left" => Ok(StriderMode::TurnLeft),
            "turn-right" => Ok(StriderMode::TurnRight),
            other => Err(SimError::invalid(format!(
                "unknown strider mode '{other}' (straight, turn-left, turn-right)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StriderMode::Straight => "straight",
            StriderMode::TurnLeft => "turn-left",
            StriderMode::TurnRight => "turn-right",
        }
    }
}

impl StriderSection {
    pub fn to_strider(&self, actuator: &ActuatorSection, mode: StriderMode) -> StriderConfig {
        let mut device = actuator.to_actuator();
        device.circuit = actuator
            .circuit
            .to_circuit(self.supply_v, &device.wire, &device.material);
        let straight = DriveSignal::new(
            self.straight_frequency_hz,
            self.straight_duty_pct / 100.0,
            self.supply_v,
        );
        let turn = DriveSignal::new(
            self.turn_frequency_hz,
            self.turn_duty_pct / 100.0,
            self.supply_v,
        );
        let (left_drive, right_drive) = match mode {
            StriderMode::Straight => (Some(straight.clone()), Some(straight)),
            // A left turn flaps the right fin; the left stays passive.
            StriderMode::TurnLeft => (None, Some(turn)),
            StriderMode::TurnRight => (Some(turn), None),
        };
        StriderConfig {
            body_mass: self.body_mass_mg * 1.0e-6,
            body_length: self.body_length_mm * 1.0e-3,
            foot_perimeter_total: self.foot_perimeter_mm * 1.0e-3,
            water_surface_tension: self.surface_tension_n_per_m,
            transmission_gain: self.transmission_gain_rad_per_m,
            stroke_limit: self.stroke_limit_rad,
            fin_area: self.fin_area_mm2 * 1.0e-6,
            drag_coefficient: self.drag_coefficient,
            recovery_factor: self.recovery_factor,
            propulsor_moment_arm: self.moment_arm_mm * 1.0e-3,
            yaw_drag_coefficient: self.yaw_drag_nm_s_per_rad,
            linear_drag_coefficient: self.linear_drag_n_s_per_m,
            tether_force_bias: self.tether_force_n,
            tether_torque_bias: self.tether_torque_nm,
            left_drive,
            right_drive,
            actuator: device,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_shipped_bench() {
        let run = RunConfig::parse("").unwrap();
        assert_eq!(run.actuator.to_actuator(), defaults::actuator());
        assert_eq!(
            run.drive.to_drive(run.actuator.supply_v),
            DriveSignal::new(1.0, 0.06, 15.0)
        );
        assert_eq!(
            run.sweep.to_plan(&defaults::actuator(), 15.0, run.seed),
            paper_dc_plan()
        );
        assert_eq!(
            run.load_sweep.to_plan(&defaults::actuator(), 15.0, run.seed),
            paper_load_plan()
        );
        assert_eq!(
            run.crawler.to_crawler(&run.actuator, 5.0, 11.0),
            defaults::crawler(5.0, 0.11)
        );
        assert_eq!(
            run.strider.to_strider(&run.actuator, StriderMode::Straight),
            defaults::strider()
        );
    }

    #[test]
    fn partial_overrides_leave_the_rest_at_defaults() {
        let run = RunConfig::parse(
            "seed = 11\n[actuator.material]\naustenite_finish_c = 120.0\n",
        )
        .unwrap();
        assert_eq!(run.seed, 11);
        let actuator = run.actuator.to_actuator();
        assert_eq!(actuator.material.austenite_finish_0, 120.0);
        assert_eq!(actuator.material.austenite_start_0, 5.5);
        assert_eq!(actuator.wire, defaults::wire());
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line_number() {
        let err = RunConfig::parse("[actuator]\nsupplied_v = 15.0\n").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("line 2"), "{message}");
        assert!(message.contains("supplied_v"), "{message}");
    }

    #[test]
    fn syntax_errors_carry_a_line_number() {
        let err = RunConfig::parse("[actuator\nsupply_v = 15.0\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn derived_values_follow_geometry_overrides() {
        // Doubling the wire offset halves the lever ratio automatically.
        let run =
            RunConfig::parse("[actuator.beam]\nwire_offset_mm = 0.34\n").unwrap();
        let actuator = run.actuator.to_actuator();
        let base = defaults::actuator();
        assert!(
            (actuator.loading.load_stress_gain - base.loading.load_stress_gain / 2.0)
                .abs()
                < 1.0e-9
        );
        // Pinning it explicitly wins over geometry.
        let pinned = RunConfig::parse(
            "[actuator.beam]\nwire_offset_mm = 0.34\n[actuator.loading]\nload_stress_gain = 17.0\n",
        )
        .unwrap();
        assert_eq!(pinned.actuator.to_actuator().loading.load_stress_gain, 17.0);
    }

    #[test]
    fn actuator_section_round_trips_exactly() {
        let base = defaults::actuator();
        let section = ActuatorSection::from_actuator(&base);
        let text = toml::to_string(&section).unwrap();
        let parsed: ActuatorSection = toml::from_str(&text).unwrap();
        assert_eq!(parsed.to_actuator(), base);
    }

    #[test]
    fn robot_sections_use_their_own_supply() {
        let run = RunConfig::parse("").unwrap();
        let crawler = run.crawler.to_crawler(&run.actuator, 1.0, 6.0);
        assert_eq!(crawler.drive.on_voltage, 18.0);
        let strider = run.strider.to_strider(&run.actuator, StriderMode::TurnLeft);
        assert!(strider.left_drive.is_none());
        let right = strider.right_drive.unwrap();
        assert_eq!(right.on_voltage, 12.0);
        assert_eq!(right.frequency, 5.0);
        // Robot circuits trim their series resistor to the same current cap.
        let limit = crawler.actuator.circuit.current_limit;
        let loop_r = crawler.actuator.circuit.wire_resistance
            + crawler.actuator.circuit.series_resistance;
        assert!((18.0 / loop_r - limit).abs() < 1.0e-12);
    }

    #[test]
    fn calibration_section_builds_the_default_problem() {
        let run = RunConfig::parse("").unwrap();
        let targets = reference_targets();
        let problem = run
            .calibration
            .to_problem(targets, 15.0, run.seed)
            .unwrap();
        let reference = default_problem(targets);
        assert_eq!(problem, reference);
        // Override one bound by key.
        let custom = RunConfig::parse(
            "[calibration]\nbudget = 40\nfree_parameters = [ { key = \"convection\", lower = 1300.0, upper = 1450.0 } ]\n",
        )
        .unwrap();
        let problem = custom
            .calibration
            .to_problem(targets, 15.0, 7)
            .unwrap();
        assert_eq!(problem.budget, 40);
        assert_eq!(problem.free_parameters.len(), 1);
        assert_eq!(problem.free_parameters[0].lower, 1300.0);
    }
}
