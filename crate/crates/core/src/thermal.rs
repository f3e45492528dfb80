//! Joule heating, PWM drive and the lumped wire heat balance.

use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};

/// Square-wave PWM drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSignal {
    /// Carrier frequency, Hz.
    pub frequency: f64,
    /// Duty cycle as a fraction in (0, 1].
    pub duty_cycle: f64,
    /// Supply voltage while on, V.
    pub on_voltage: f64,
    /// Voltage while off, V (normally 0).
    pub off_voltage: f64,
}

impl DriveSignal {
    pub fn new(frequency: f64, duty_cycle: f64, on_voltage: f64) -> Self {
        DriveSignal {
            frequency,
            duty_cycle,
            on_voltage,
            off_voltage: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(SimError::invalid("drive frequency must be positive"));
        }
        if !(self.duty_cycle > 0.0 && self.duty_cycle <= 1.0) {
            return Err(SimError::invalid("duty_cycle must lie in (0, 1]"));
        }
        if !(self.on_voltage >= 0.0 && self.off_voltage >= 0.0)
            || !self.on_voltage.is_finite()
            || !self.off_voltage.is_finite()
        {
            return Err(SimError::invalid("drive voltages must be finite and >= 0"));
        }
        Ok(())
    }

    /// Cycle-average voltage, exact: dc * V_on + (1 - dc) * V_off.
    pub fn mean_voltage(&self) -> f64 {
        self.duty_cycle * self.on_voltage + (1.0 - self.duty_cycle) * self.off_voltage
    }
}

/// Instantaneous PWM voltage at time `t` (seconds from phase zero).
pub fn pwm_voltage(drive: &DriveSignal, t: f64) -> f64 {
    let period = 1.0 / drive.frequency;
    let phase = t.rem_euclid(period);
    if phase < drive.duty_cycle * period {
        drive.on_voltage
    } else {
        drive.off_voltage
    }
}

/// Drive electronics as seen by the wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Resistance of the SMA portion (both parallel wires combined), ohm.
    pub wire_resistance: f64,
    /// Everything else in the loop (tether, source), ohm.
    pub series_resistance: f64,
    /// Protocol current limit, A.
    pub current_limit: f64,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.wire_resistance > 0.0 && self.series_resistance >= 0.0) {
            return Err(SimError::invalid("resistances must be positive"));
        }
        if !(self.current_limit > 0.0) {
            return Err(SimError::invalid("current_limit must be positive"));
        }
        Ok(())
    }

    pub fn exceeds_limit(&self, current: f64) -> bool {
        current > self.current_limit
    }
}

/// Loop current for an applied voltage, A.
pub fn circuit_current(circuit: &CircuitParams, voltage: f64) -> f64 {
    voltage / (circuit.wire_resistance + circuit.series_resistance)
}

/// Joule power dissipated in the SMA portion, W.
pub fn wire_power(circuit: &CircuitParams, current: f64) -> f64 {
    current * current * circuit.wire_resistance
}

/// Thermal surroundings of the wire pair (lumped).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnv {
    /// Ambient temperature, degC.
    pub ambient_temperature: f64,
    /// Convection coefficient h, W/(m^2 degC). The primary calibration knob.
    pub convection_coefficient: f64,
    /// Convective surface area of both wires, m^2.
    pub wire_surface_area: f64,
    /// Mass of both wires, kg.
    pub wire_mass: f64,
}

impl ThermalEnv {
    pub fn validate(&self) -> Result<()> {
        if !(self.convection_coefficient > 0.0
            && self.wire_surface_area > 0.0
            && self.wire_mass > 0.0)
        {
            return Err(SimError::invalid(
                "convection coefficient, surface area and wire mass must be positive",
            ));
        }
        if !self.ambient_temperature.is_finite() {
            return Err(SimError::invalid("ambient_temperature must be finite"));
        }
        Ok(())
    }

    /// h * A, W/degC.
    pub fn conductance(&self) -> f64 {
        self.convection_coefficient * self.wire_surface_area
    }
}

/// dT/dt of the lumped wire, degC/s.
///
/// `latent_term` is the latent power sink in W (zero when latent heat is
/// disabled); `specific_heat` in J/(kg degC).
pub fn thermal_derivative(
    temperature: f64,
    power: f64,
    latent_term: f64,
    env: &ThermalEnv,
    specific_heat: f64,
) -> f64 {
    let convected = env.conductance() * (temperature - env.ambient_temperature);
    (power - convected - latent_term) / (env.wire_mass * specific_heat)
}

/// Equilibrium temperature under constant power, degC.
pub fn steady_state_temperature(power: f64, env: &ThermalEnv) -> f64 {
    env.ambient_temperature + power / env.conductance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults;

    #[test]
    fn pwm_switches_at_duty_boundary() {
        let d = DriveSignal::new(1.0, 0.06, 15.0);
        assert_eq!(pwm_voltage(&d, 0.0), 15.0);
        assert_eq!(pwm_voltage(&d, 0.03), 15.0);
        assert_eq!(pwm_voltage(&d, 0.07), 0.0);
        assert_eq!(pwm_voltage(&d, 1.03), 15.0);
        assert_eq!(pwm_voltage(&d, -0.5), 0.0);
    }

    #[test]
    fn full_duty_is_always_on() {
        let d = DriveSignal::new(10.0, 1.0, 12.0);
        for i in 0..1000 {
            assert_eq!(pwm_voltage(&d, i as f64 * 1.7e-4), 12.0);
        }
    }

    #[test]
    fn bench_current_sits_exactly_at_limit() {
        let c = defaults::circuit_for_supply(15.0);
        let i = circuit_current(&c, 15.0);
        assert!((i - 0.2).abs() < 1e-12);
        assert!(!c.exceeds_limit(i), "0.200 A is at, not over, the limit");
        let i16 = circuit_current(&c, 16.0);
        assert!((i16 - 0.21333333333333335).abs() < 1e-12);
        assert!(c.exceeds_limit(i16));
    }

    #[test]
    fn wire_power_is_i_squared_r() {
        let c = defaults::circuit_for_supply(15.0);
        let p = wire_power(&c, 0.2);
        assert!((p - 0.04 * c.wire_resistance).abs() < 1e-15);
    }

    #[test]
    fn steady_state_is_a_fixed_point_of_the_derivative() {
        let env = defaults::thermal_env();
        let m = defaults::material();
        let p = 0.19;
        let tss = steady_state_temperature(p, &env);
        let d = thermal_derivative(tss, p, 0.0, &env, m.specific_heat);
        assert!(d.abs() < 1e-9, "dT/dt at T_ss should vanish, got {d}");
        assert!(tss > env.ambient_temperature);
    }

    #[test]
    fn mean_voltage_identity() {
        let d = DriveSignal::new(5.0, 0.11, 15.0);
        assert_eq!(d.mean_voltage(), 0.11 * 15.0);
    }
}
