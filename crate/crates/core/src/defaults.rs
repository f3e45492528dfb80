//! Shipped parameter set: the bench device every protocol starts from.
//!
//! Two kinds of numbers live here. Geometry and circuit values are direct
//! bench measurements (wire diameter, beam dimensions, supply, bead masses).
//! The rest (transition band, convection coefficient, recoverable strain,
//! load compliance) are fitted quantities produced by the `calibrate` module
//! against the recorded characterization table and frozen so that every
//! consumer starts from the same reproducible device. The transition band is
//! an effective band for this wire under this mounting, not a datasheet one:
//! the fit wants a wide austenite span to reproduce how gradually the stroke
//! collapses as the carrier frequency rises.

use crate::actuator::ActuatorConfig;
use crate::crawler::CrawlerConfig;
use crate::material::MaterialParams;
use crate::mechanics::{deflection_gain, BeamParams, LoadingParams, WireParams};
use crate::strider::StriderConfig;
use crate::thermal::{CircuitParams, DriveSignal, ThermalEnv};

/// Bench supply while the switch is on, V.
pub const BENCH_SUPPLY_VOLTAGE: f64 = 15.0;
/// Crawler battery voltage, V.
pub const CRAWLER_SUPPLY_VOLTAGE: f64 = 18.0;
/// Strider battery voltage, V.
pub const STRIDER_SUPPLY_VOLTAGE: f64 = 12.0;
/// Protocol current ceiling, A.
pub const CURRENT_LIMIT: f64 = 0.2;
/// Temperature above which a run is flagged as overdriven, degC.
pub const OVERHEAT_TEMPERATURE: f64 = 160.0;
/// Mass of the complete actuator (wires, beam, pad), kg.
pub const DEVICE_MASS: f64 = 0.96e-6;
/// Standard gravity, m/s^2.
pub const GRAVITY: f64 = 9.81;
/// Ambient lab temperature, degC.
pub const AMBIENT_TEMPERATURE: f64 = 22.0;

pub fn material() -> MaterialParams {
    MaterialParams {
        austenite_start_0: 5.5,
        austenite_finish_0: 129.8,
        martensite_start_0: 5.05,
        martensite_finish_0: 2.4,
        stress_coeff_austenite: 8.0e6,
        stress_coeff_martensite: 8.0e6,
        max_recoverable_strain: 0.013,
        latent_heat: 0.0,
        density: 6450.0,
        specific_heat: 837.0,
        wire_resistivity: 8.0e-7,
    }
}

pub fn wire() -> WireParams {
    WireParams {
        diameter: 25.4e-6,
        rest_length: 7.0e-3,
        active_length: 6.0e-3,
        count: 2,
    }
}

pub fn beam() -> BeamParams {
    BeamParams {
        length: 6.0e-3,
        width: 0.5e-3,
        thickness: 90.0e-6,
        wire_offset: 0.17e-3,
    }
}

pub fn loading() -> LoadingParams {
    LoadingParams {
        bias_stress: 172.0e6,
        // Lever reciprocity: the same ratio that amplifies contraction into
        // tip motion concentrates tip load into wire tension.
        load_stress_gain: deflection_gain(&beam()),
        load_compliance: 0.51,
        constant_force_threshold: 18.0e-6,
        hook_force: 1.5e-5,
        first_bead_force: 1.65e-4,
        bead_increment: 1.8e-4,
        max_beads: 8,
    }
}

pub fn thermal_env() -> ThermalEnv {
    let w = wire();
    let m = material();
    ThermalEnv {
        ambient_temperature: AMBIENT_TEMPERATURE,
        convection_coefficient: 1370.0,
        wire_surface_area: w.surface_area(),
        wire_mass: w.mass(m.density),
    }
}

/// Loop circuit for a given supply: the bench trims the tether so that the
/// supply drives exactly the current limit through the loop.
pub fn circuit_for_supply(supply_voltage: f64) -> CircuitParams {
    let wire_resistance = wire().resistance(material().wire_resistivity);
    CircuitParams {
        wire_resistance,
        series_resistance: supply_voltage / CURRENT_LIMIT - wire_resistance,
        current_limit: CURRENT_LIMIT,
    }
}

/// The complete device on a loop trimmed for `supply_voltage`.
pub fn actuator_for_supply(supply_voltage: f64) -> ActuatorConfig {
    ActuatorConfig {
        material: material(),
        wire: wire(),
        beam: beam(),
        loading: loading(),
        thermal: thermal_env(),
        circuit: circuit_for_supply(supply_voltage),
        overheat_temperature: OVERHEAT_TEMPERATURE,
        device_mass: DEVICE_MASS,
    }
}

/// The characterization-bench device (15 V supply).
pub fn actuator() -> ActuatorConfig {
    actuator_for_supply(BENCH_SUPPLY_VOLTAGE)
}

/// The terrestrial crawler at a given drive point. Contact and leg numbers
/// are fitted to the recorded speed table. The vertical suspension sits just
/// above the highest strong drive frequency (21 Hz against a 15 Hz gallop),
/// so faster drives pump it harder even as the thermal stroke shrinks, and
/// the travel limit clips the tall low-frequency strokes so they cannot
/// dominate through sheer amplitude.
pub fn crawler(frequency: f64, duty_cycle: f64) -> CrawlerConfig {
    CrawlerConfig {
        body_mass: 8.0e-6,
        foot_mass: 0.5e-6,
        body_length: 8.5e-3,
        friction_sharp: 1.5,
        friction_smooth: 0.3,
        foot_separation_rest: 6.0e-3,
        leg_gain: 0.5,
        leg_stiffness: 0.12,
        leg_damping: 1.22e-3,
        bounce_stiffness: 0.139,
        bounce_damping: 1.27e-3,
        lift_gain: 3.0,
        lift_limit: 0.13e-3,
        bristle_lean: 0.7,
        vibration_threshold: 17.0,
        vibration_drift: 5.78e-3,
        drive: DriveSignal::new(frequency, duty_cycle, CRAWLER_SUPPLY_VOLTAGE),
        actuator: actuator_for_supply(CRAWLER_SUPPLY_VOLTAGE),
    }
}

/// The water strider in its straight-line configuration: both propulsors
/// driven in phase at the recorded cruise point. Fin and drag numbers are
/// fitted to the recorded cruise speed and single-sided turn rate.
pub fn strider() -> StriderConfig {
    StriderConfig {
        body_mass: 56.0e-6,
        body_length: 22.0e-3,
        foot_perimeter_total: 0.04,
        water_surface_tension: 0.072,
        transmission_gain: 322.0,
        stroke_limit: 0.6,
        fin_area: 2.0e-5,
        drag_coefficient: 1.1,
        recovery_factor: 0.3,
        propulsor_moment_arm: 7.0e-3,
        yaw_drag_coefficient: 7.4e-7,
        linear_drag_coefficient: 1.32e-3,
        tether_force_bias: 0.0,
        tether_torque_bias: 0.0,
        left_drive: Some(DriveSignal::new(2.0, 0.075, STRIDER_SUPPLY_VOLTAGE)),
        right_drive: Some(DriveSignal::new(2.0, 0.075, STRIDER_SUPPLY_VOLTAGE)),
        actuator: actuator_for_supply(STRIDER_SUPPLY_VOLTAGE),
    }
}
