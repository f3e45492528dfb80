//! Water-walking robot: surface-tension statics plus planar paddle dynamics.
//!
//! The robot floats on elliptical feet whose total contact perimeter turns
//! surface tension into lift; [`support_margin`] is that statics check. Two
//! fin propulsors, one per side, paddle the water. Each side's actuator is
//! simulated independently, its tip deflection feeds a transmission that
//! turns millimeters of stroke into tens of degrees of fin sweep, and a
//! quasi-steady drag model turns sweep rate into thrust. Heating is much
//! faster than cooling, so the square-law drag rectifies each drive cycle
//! into net forward thrust all by itself; a flexible fin folds on the way
//! back, so the recovery stroke is additionally scaled by a factor below
//! one. A propulsor with no drive acts as a rigid plate dragging through
//! the water, which is what turns single-sided drive into a steady yaw.

use crate::actuator::{simulate, ActuatorConfig, DEFAULT_STEP};
use crate::defaults;
use crate::error::{Result, SimError};
use crate::thermal::DriveSignal;
use crate::trajectory::PlanarTrajectory;
use serde::{Deserialize, Serialize};

/// Water density at lab temperature, kg/m^3.
pub const WATER_DENSITY: f64 = 1000.0;

/// Which propulsor a force computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Lateral offset of this side's fin from the body axis, m. Left is +y.
    fn lateral_offset(self, config: &StriderConfig) -> f64 {
        match self {
            Side::Left => config.propulsor_moment_arm,
            Side::Right => -config.propulsor_moment_arm,
        }
    }
}

/// Everything that defines one strider run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StriderConfig {
    /// Body mass, kg.
    pub body_mass: f64,
    /// Body length, m (speeds are reported relative to it).
    pub body_length: f64,
    /// Total foot contact perimeter available to surface tension, m.
    pub foot_perimeter_total: f64,
    /// Water surface tension, N/m.
    pub water_surface_tension: f64,
    /// Fin sweep per meter of actuator tip deflection, rad/m.
    pub transmission_gain: f64,
    /// Mechanical limit of the fin sweep, rad.
    pub stroke_limit: f64,
    /// Wetted fin blade area, m^2.
    pub fin_area: f64,
    /// Fin drag coefficient.
    pub drag_coefficient: f64,
    /// Thrust factor applied to the recovery (return) stroke, in (0, 1].
    /// The flexible fin folds when sweeping backward.
    pub recovery_factor: f64,
    /// Lateral distance from the body axis to each fin, m.
    pub propulsor_moment_arm: f64,
    /// Viscous yaw drag, N m s/rad.
    pub yaw_drag_coefficient: f64,
    /// Viscous drag against body translation, N s/m.
    pub linear_drag_coefficient: f64,
    /// Constant tether force along the body axis, N. Zero when untethered.
    pub tether_force_bias: f64,
    /// Constant tether yaw torque, N m. Zero when untethered.
    pub tether_torque_bias: f64,
    /// Drive for the left propulsor; `None` leaves it inactive.
    pub left_drive: Option<DriveSignal>,
    /// Drive for the right propulsor; `None` leaves it inactive.
    pub right_drive: Option<DriveSignal>,
    pub actuator: ActuatorConfig,
}

impl StriderConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("body_mass", self.body_mass),
            ("body_length", self.body_length),
            ("foot_perimeter_total", self.foot_perimeter_total),
            ("water_surface_tension", self.water_surface_tension),
            ("transmission_gain", self.transmission_gain),
            ("stroke_limit", self.stroke_limit),
            ("fin_area", self.fin_area),
            ("drag_coefficient", self.drag_coefficient),
            ("propulsor_moment_arm", self.propulsor_moment_arm),
            ("yaw_drag_coefficient", self.yaw_drag_coefficient),
            ("linear_drag_coefficient", self.linear_drag_coefficient),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SimError::invalid(format!("{name} must be positive")));
            }
        }
        if !(self.recovery_factor > 0.0 && self.recovery_factor <= 1.0) {
            return Err(SimError::invalid("recovery_factor must lie in (0, 1]"));
        }
        if !self.tether_force_bias.is_finite() || !self.tether_torque_bias.is_finite() {
            return Err(SimError::invalid("tether biases must be finite"));
        }
        if let Some(drive) = &self.left_drive {
            drive.validate()?;
        }
        if let Some(drive) = &self.right_drive {
            drive.validate()?;
        }
        self.actuator.validate()?;
        Ok(())
    }
}

/// Surface-tension lift available over body weight. Must exceed 1 to float.
/// Linear in perimeter, inverse in mass; pure statics.
pub fn support_margin(config: &StriderConfig) -> f64 {
    config.water_surface_tension * config.foot_perimeter_total
        / (config.body_mass * defaults::GRAVITY)
}

/// Fin sweep angle commanded by a tip deflection, rad. Linear through the
/// transmission until the mechanical limit, where it saturates.
pub fn stroke_angle(tip_deflection: f64, config: &StriderConfig) -> f64 {
    (config.transmission_gain * tip_deflection.max(0.0)).min(config.stroke_limit)
}

/// Quasi-steady paddle force of one propulsor: thrust along the body axis
/// (N) and the yaw torque it exerts (N m, counter-clockwise positive).
/// Thrust goes with the square of the fin tip speed; the recovery stroke is
/// scaled down by the configured flexibility factor.
pub fn propulsor_force(stroke_rate: f64, side: Side, config: &StriderConfig) -> (f64, f64) {
    let tip_speed = stroke_rate * config.propulsor_moment_arm;
    let magnitude = 0.5
        * WATER_DENSITY
        * config.drag_coefficient
        * config.fin_area
        * tip_speed
        * tip_speed;
    let thrust = if stroke_rate >= 0.0 {
        magnitude
    } else {
        -magnitude * config.recovery_factor
    };
    let torque = -side.lateral_offset(config) * thrust;
    (thrust, torque)
}

/// Resistive force of an inactive propulsor dragged through the water at
/// body-axis speed `velocity`, and the yaw torque that drag exerts.
fn plate_drag(velocity: f64, side: Side, config: &StriderConfig) -> (f64, f64) {
    let force = -0.5
        * WATER_DENSITY
        * config.drag_coefficient
        * config.fin_area
        * velocity
        * velocity.abs();
    let torque = -side.lateral_offset(config) * force;
    (force, torque)
}

/// Planar rigid-body run on the water surface.
pub fn simulate_strider(config: &StriderConfig, duration: f64) -> Result<PlanarTrajectory> {
    config.validate()?;
    if support_margin(config) <= 1.0 {
        return Err(SimError::protocol(
            "strider config cannot float: support margin is not above 1",
        ));
    }
    if !(duration >= 10.0) {
        return Err(SimError::protocol("strider runs must cover at least 10 s"));
    }

    // One independent actuator per driven side.
    let stroke_series = |drive: &Option<DriveSignal>| -> Result<Option<Vec<f64>>> {
        match drive {
            None => Ok(None),
            Some(d) => {
                let trace = simulate(&config.actuator, d, 0.0, duration, DEFAULT_STEP)?;
                Ok(Some(
                    trace
                        .deflection
                        .iter()
                        .map(|&w| stroke_angle(w, config))
                        .collect(),
                ))
            }
        }
    };
    let left = stroke_series(&config.left_drive)?;
    let right = stroke_series(&config.right_drive)?;

    let sample_rate = 1.0 / DEFAULT_STEP;
    let n = (duration * sample_rate).round() as usize + 1;
    let dt = DEFAULT_STEP;
    let inertia = config.body_mass * config.body_length * config.body_length / 12.0;

    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut heading = Vec::with_capacity(n);
    x.push(0.0);
    y.push(0.0);
    heading.push(0.0);
    let (mut px, mut py, mut psi) = (0.0f64, 0.0f64, 0.0f64);
    let (mut vx, mut vy, mut omega) = (0.0f64, 0.0f64, 0.0f64);

    for i in 1..n {
        let (cos_psi, sin_psi) = (psi.cos(), psi.sin());
        // Velocity component along the body axis, what the fins see.
        let v_body = vx * cos_psi + vy * sin_psi;

        let mut thrust = config.tether_force_bias;
        let mut torque = config.tether_torque_bias;
        for (series, side) in [(&left, Side::Left), (&right, Side::Right)] {
            match series {
                Some(angles) => {
                    let rate = (angles[i] - angles[i - 1]) / dt;
                    let (f, tau) = propulsor_force(rate, side, config);
                    thrust += f;
                    torque += tau;
                }
                None => {
                    let (f, tau) = plate_drag(v_body, side, config);
                    thrust += f;
                    torque += tau;
                }
            }
        }

        let fx = thrust * cos_psi - config.linear_drag_coefficient * vx;
        let fy = thrust * sin_psi - config.linear_drag_coefficient * vy;
        vx += fx / config.body_mass * dt;
        vy += fy / config.body_mass * dt;
        px += vx * dt;
        py += vy * dt;
        omega += (torque - config.yaw_drag_coefficient * omega) / inertia * dt;
        psi += omega * dt;

        x.push(px);
        y.push(py);
        heading.push(psi);
    }

    let trajectory = PlanarTrajectory {
        sample_rate,
        start_time: 0.0,
        x,
        y,
        heading,
    };
    trajectory.validate()?;
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> StriderConfig {
        defaults::strider()
    }

    #[test]
    fn shipped_config_floats_with_headroom() {
        let margin = support_margin(&config());
        assert!(margin > 1.0, "margin {margin}");
        // 0.072 N/m over 40 mm of perimeter against 56 mg.
        assert!((margin - 5.24).abs() < 0.05, "margin {margin}");
    }

    #[test]
    fn support_margin_scales_with_perimeter_and_inverse_mass() {
        let base = config();
        let m0 = support_margin(&base);
        let mut doubled = base.clone();
        doubled.foot_perimeter_total *= 2.0;
        assert!((support_margin(&doubled) - 2.0 * m0).abs() < 1.0e-12);
        let mut heavy = base;
        heavy.body_mass *= m0;
        let margin = support_margin(&heavy);
        assert!((margin - 1.0).abs() < 1.0e-9, "boundary margin {margin}");
    }

    #[test]
    fn stroke_angle_is_linear_then_saturates() {
        let c = config();
        // The full bench stroke maps to roughly thirty degrees.
        let at_max = stroke_angle(1.625e-3, &c);
        assert!(
            (at_max - 30.0f64.to_radians()).abs() < 0.1 * at_max,
            "stroke at max deflection {at_max}"
        );
        assert_eq!(stroke_angle(0.0, &c), 0.0);
        let half = stroke_angle(0.8e-3, &c);
        assert!((half - 2.0 * stroke_angle(0.4e-3, &c)).abs() < 1.0e-12);
        assert_eq!(stroke_angle(1.0, &c), c.stroke_limit);
    }

    #[test]
    fn propulsor_thrust_is_signed_and_rectified() {
        let c = config();
        let (f0, t0) = propulsor_force(0.0, Side::Right, &c);
        assert_eq!((f0, t0), (0.0, 0.0));
        let (fwd, tau_right) = propulsor_force(5.0, Side::Right, &c);
        let (back, _) = propulsor_force(-5.0, Side::Right, &c);
        assert!(fwd > 0.0);
        assert!(back < 0.0);
        // Flexible fin: recovery thrust is the scaled-down mirror.
        assert!((back + c.recovery_factor * fwd).abs() < 1.0e-15 * fwd);
        // Right-side forward thrust turns the body left (counter-clockwise).
        assert!(tau_right > 0.0);
        let (_, tau_left) = propulsor_force(5.0, Side::Left, &c);
        assert!((tau_left + tau_right).abs() < 1.0e-15 * tau_right);
    }

    #[test]
    fn both_drives_off_means_no_motion() {
        let mut c = config();
        c.left_drive = None;
        c.right_drive = None;
        let t = simulate_strider(&c, 10.0).unwrap();
        assert_eq!(t.net_x_displacement(10.0).unwrap(), 0.0);
        assert!(t.x.iter().all(|&v| v == 0.0));
        assert!(t.heading.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identical_drives_hold_a_straight_line() {
        let t = simulate_strider(&config(), 10.0).unwrap();
        let drift = t.heading.last().unwrap().abs();
        assert!(drift < 1.0e-12, "heading drift {drift}");
        assert!(t.y.iter().all(|&v| v.abs() < 1.0e-12));
    }

    #[test]
    fn swapping_sides_mirrors_the_trajectory() {
        let mut c = config();
        c.right_drive = None;
        let turn = simulate_strider(&c, 10.0).unwrap();
        let mut mirrored = config();
        mirrored.left_drive = None;
        let other = simulate_strider(&mirrored, 10.0).unwrap();
        for i in (0..turn.x.len()).step_by(1000) {
            assert!((turn.x[i] - other.x[i]).abs() < 1.0e-12);
            assert!((turn.y[i] + other.y[i]).abs() < 1.0e-12);
            assert!((turn.heading[i] + other.heading[i]).abs() < 1.0e-12);
        }
    }

    #[test]
    fn cruise_speed_matches_the_recorded_run() {
        let c = config();
        let t = simulate_strider(&c, 15.0).unwrap();
        let v = t.mean_speed_blps(c.body_length, 10.0).unwrap();
        assert!((v / 0.28 - 1.0).abs() < 0.25, "cruise {v} BL/s");
        assert!(t.heading.last().unwrap().abs() < 0.02);
    }

    #[test]
    fn single_sided_drive_turns_left_at_the_recorded_rate() {
        let mut c = config();
        c.left_drive = None;
        c.right_drive = Some(DriveSignal::new(
            5.0,
            0.11,
            defaults::STRIDER_SUPPLY_VOLTAGE,
        ));
        let t = simulate_strider(&c, 15.0).unwrap();
        let rate = t.mean_turn_rate(10.0).unwrap();
        assert!(rate > 0.0, "left turn must be counter-clockwise");
        assert!((rate / 0.144 - 1.0).abs() < 0.25, "turn rate {rate} rad/s");
    }

    #[test]
    fn unfloatable_configs_are_rejected() {
        let mut c = config();
        c.body_mass *= 10.0;
        assert!(matches!(
            simulate_strider(&c, 10.0),
            Err(SimError::Protocol(_))
        ));
    }

    #[test]
    fn short_runs_are_rejected() {
        assert!(matches!(
            simulate_strider(&config(), 5.0),
            Err(SimError::Protocol(_))
        ));
    }
}
