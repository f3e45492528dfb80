//! Terrestrial crawler: anisotropic-friction stick-slip locomotion.
//!
//! The robot is a trunk riding on two light foot groups through inclined
//! leaf-spring legs. Two couplings move it:
//!
//! * The actuator stroke commands the foot separation. Each foot's sharp
//!   face resists backward slip far harder than its smooth face resists
//!   forward slip, so the stroke ratchets both feet forward. This is the
//!   whole story at low drive frequency.
//! * The legs also carry the body weight and lean like bristles: vertical
//!   compression swings the foot anchor points backward under the trunk.
//!   Fast drives pump the vertical suspension near its resonance, so the
//!   legs alternately grip (loaded, thrusting the trunk forward) and
//!   release (unloaded, feet catching up). This bristle-drive term grows
//!   with drive frequency even as the thermal stroke shrinks, which is why
//!   the robot keeps accelerating toward the gallop.
//!
//! Above a configured vibration threshold the phase swing is essentially
//! zero and the real device transports itself through a mechanism this
//! model does not contain; a constant drift speed stands in for it and is
//! flagged as synthetic in the run result.

use crate::actuator::{simulate, steady_state_window, ActuatorConfig, Trace, DEFAULT_STEP};
use crate::defaults;
use crate::error::{Result, SimError};
use crate::signal::mado_sequence;
use crate::thermal::DriveSignal;
use crate::trajectory::PlanarTrajectory;
use serde::{Deserialize, Serialize};

/// Below this swing fraction of the 1 Hz reference the gait is gliding.
pub const GLIDING_SWING_FRACTION: f64 = 0.10;
/// Above this swing fraction (plus anchoring) the gait is crawling.
pub const CRAWLING_SWING_FRACTION: f64 = 0.50;
/// Anchored-time fraction required for crawling.
pub const CRAWLING_ANCHORED_FRACTION: f64 = 0.50;
/// Frequency separating shuffling from galloping, Hz.
pub const SHUFFLE_GALLOP_SPLIT: f64 = 7.5;
/// Adaptation time of the suspension ride height, s. The travel limit in
/// [`CrawlerConfig::lift_limit`] applies to excursions around this slowly
/// settling baseline, not to the absolute lift.
pub const RIDE_ADAPT_TAU_S: f64 = 0.4;

/// Everything that defines one crawler run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrawlerConfig {
    /// Body mass including legs and feet, kg.
    pub body_mass: f64,
    /// Mass of one foot group (foot plus the moving leg end), kg.
    pub foot_mass: f64,
    /// Body length, m (speeds are reported relative to it).
    pub body_length: f64,
    /// Coulomb coefficient against backward slip (sharp face).
    pub friction_sharp: f64,
    /// Coulomb coefficient against forward slip (smooth face).
    pub friction_smooth: f64,
    /// Foot separation with the actuator at rest, m.
    pub foot_separation_rest: f64,
    /// Commanded separation change per meter of tip deflection, m/m.
    pub leg_gain: f64,
    /// Stiffness of one leg between body and foot, N/m.
    pub leg_stiffness: f64,
    /// Damping of one leg between body and foot, N s/m.
    pub leg_damping: f64,
    /// Vertical leg stiffness carrying the body weight, N/m.
    pub bounce_stiffness: f64,
    /// Vertical leg damping, N s/m.
    pub bounce_damping: f64,
    /// Commanded body lift per meter of tip deflection, m/m.
    pub lift_gain: f64,
    /// Suspension travel limit: lift excursions beyond this saturate, m.
    pub lift_limit: f64,
    /// Tangent of the bristle lean angle: horizontal attachment shift per
    /// meter of vertical leg compression. Zero for straight legs.
    pub bristle_lean: f64,
    /// Drive frequency at or above which the synthetic glide drift applies, Hz.
    pub vibration_threshold: f64,
    /// Synthetic glide drift speed, m/s. Clearly a stand-in, never physics.
    pub vibration_drift: f64,
    pub drive: DriveSignal,
    pub actuator: ActuatorConfig,
}

impl CrawlerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.friction_smooth > 0.0 && self.friction_sharp > self.friction_smooth) {
            return Err(SimError::invalid(
                "need friction_sharp > friction_smooth > 0 for rectified motion",
            ));
        }
        if !(self.body_mass > 0.0 && self.body_length > 0.0) {
            return Err(SimError::invalid("body mass and length must be positive"));
        }
        if !(self.foot_mass > 0.0 && 2.0 * self.foot_mass < self.body_mass) {
            return Err(SimError::invalid(
                "foot_mass must be positive and both feet lighter than the body",
            ));
        }
        if !(self.foot_separation_rest > 0.0) {
            return Err(SimError::invalid("foot_separation_rest must be positive"));
        }
        if !(self.leg_gain > 0.0 && self.leg_stiffness > 0.0 && self.leg_damping >= 0.0) {
            return Err(SimError::invalid("leg kinematics must be positive"));
        }
        if !(self.bounce_stiffness >= 0.0
            && self.bounce_damping >= 0.0
            && self.lift_gain >= 0.0
            && self.lift_limit > 0.0
            && self.bristle_lean >= 0.0)
        {
            return Err(SimError::invalid(
                "vertical suspension terms must be finite and >= 0",
            ));
        }
        if !(self.vibration_threshold > 0.0 && self.vibration_drift >= 0.0) {
            return Err(SimError::invalid("vibration drift settings must be positive"));
        }
        self.drive.validate()?;
        self.actuator.validate()?;
        Ok(())
    }
}

/// The four observed locomotion modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gait {
    Crawling,
    Shuffling,
    Galloping,
    Gliding,
}

impl Gait {
    pub fn label(&self) -> &'static str {
        match self {
            Gait::Crawling => "crawling",
            Gait::Shuffling => "shuffling",
            Gait::Galloping => "galloping",
            Gait::Gliding => "gliding",
        }
    }
}

/// One completed crawl: where the body went plus the gait diagnostics the
/// classifier needs.
#[derive(Debug, Clone, PartialEq)]
pub struct CrawlerRun {
    pub trajectory: PlanarTrajectory,
    /// Drive frequency the run used, Hz.
    pub drive_frequency: f64,
    /// Mean per-cycle deflection swing of the raw actuator trace, m.
    pub cycle_swing: f64,
    /// Fraction of time both feet were stuck.
    pub anchored_fraction: f64,
    /// Worst per-step gap between momentum change and friction impulse, N s.
    pub momentum_residual: f64,
    /// True when the constant glide drift was added to the trajectory.
    pub synthetic_drift: bool,
}

/// One foot group: half the body riding on one Coulomb contact.
struct Foot {
    position: f64,
    velocity: f64,
    stuck: bool,
}

impl Foot {
    /// Advance one step under external force `f_ext` and normal load `n`.
    /// Returns the friction impulse exchanged with the ground.
    fn step(&mut self, f_ext: f64, n: f64, cfg: &CrawlerConfig, mass: f64, dt: f64) -> f64 {
        let hold_limit = if f_ext > 0.0 {
            cfg.friction_smooth * n
        } else {
            cfg.friction_sharp * n
        };
        if self.stuck {
            if f_ext.abs() <= hold_limit {
                // Static friction cancels the applied force exactly.
                return -f_ext * dt;
            }
            self.stuck = false;
        }
        let mu = if (self.velocity != 0.0 && self.velocity > 0.0)
            || (self.velocity == 0.0 && f_ext > 0.0)
        {
            cfg.friction_smooth
        } else {
            cfg.friction_sharp
        };
        let direction = if self.velocity != 0.0 {
            self.velocity.signum()
        } else {
            f_ext.signum()
        };
        let f_kinetic = -direction * mu * n;
        let v_before = self.velocity;
        let mut v_after = v_before + (f_ext + f_kinetic) / mass * dt;
        // A sign change inside the step means the contact re-captured the
        // foot; static friction absorbs the leftover momentum.
        if v_after * v_before < 0.0 || (v_before == 0.0 && v_after * f_ext < 0.0) {
            v_after = 0.0;
            self.stuck = true;
        }
        self.velocity = v_after;
        self.position += v_after * dt;
        // Whatever momentum the applied force did not account for came
        // through the contact.
        mass * (v_after - v_before) - f_ext * dt
    }
}

/// Run the contact model over an existing actuator trace. Exposed so batch
/// studies can reuse one thermal simulation across many contact parameter
/// sets; [`simulate_crawler`] is the everyday entry point.
pub fn simulate_crawler_on_trace(config: &CrawlerConfig, trace: &Trace) -> Result<CrawlerRun> {
    config.validate()?;
    let n = trace.deflection.len();
    if n < 2 {
        return Err(SimError::Window("trace too short for a crawl".into()));
    }
    let duration = (n - 1) as f64 / trace.sample_rate;
    if duration * config.drive.frequency < 10.0 {
        return Err(SimError::protocol(
            "crawl duration must cover at least 10 drive periods",
        ));
    }
    let dt = 1.0 / trace.sample_rate;
    let foot_mass = config.foot_mass;
    let trunk_mass = config.body_mass - 2.0 * foot_mass;
    let weight = config.body_mass * defaults::GRAVITY;
    let half_rest = 0.5 * config.foot_separation_rest;

    let mut front = Foot { position: half_rest, velocity: 0.0, stuck: true };
    let mut rear = Foot { position: -half_rest, velocity: 0.0, stuck: true };
    let mut body_pos = 0.0f64;
    let mut body_vel = 0.0f64;
    let com = |body_pos: f64, front: &Foot, rear: &Foot| {
        (trunk_mass * body_pos + foot_mass * (front.position + rear.position))
            / config.body_mass
    };
    let start_com = com(body_pos, &front, &rear);

    let mut x = Vec::with_capacity(n);
    x.push(0.0);
    let mut anchored_steps = 0usize;
    let mut momentum_residual = 0.0f64;
    let mut previous_command = config.foot_separation_rest;
    // Vertical suspension state: the legs also carry the body weight, and
    // fast strokes pump the body up and down. Near the vertical resonance
    // the leg compression swings hard, which both unloads the contacts and
    // drives the bristle-lean thrust below.
    let mut ride = config.lift_gain * trace.deflection[0];
    let mut height = ride;
    let mut height_rate = 0.0f64;
    let mut previous_lift = ride;

    for i in 1..n {
        let deflection = trace.deflection[i];
        let command = config.foot_separation_rest - config.leg_gain * deflection;
        let command_rate = (command - previous_command) / dt;
        previous_command = command;

        let lift_raw = config.lift_gain * deflection;
        ride += (lift_raw - ride) / RIDE_ADAPT_TAU_S * dt;
        let lift = ride + (lift_raw - ride).clamp(-config.lift_limit, config.lift_limit);
        let lift_rate = (lift - previous_lift) / dt;
        previous_lift = lift;
        let compression = lift - height;
        let compression_rate = lift_rate - height_rate;
        let suspension = config.bounce_stiffness * compression
            + config.bounce_damping * compression_rate;
        height_rate += suspension / config.body_mass * dt;
        height += height_rate * dt;
        // Ground reaction: static weight plus the suspension swing, floored
        // at zero while the body is momentarily airborne.
        let ground_load = (weight + suspension).max(0.0);

        // Compressing an inclined bristle leg swings its foot anchor point
        // backward under the body; releasing swings it forward. While the
        // feet grip, the reaction drives the body forward, and the feet
        // catch up when the load drops. Straight legs (zero lean) skip this.
        let sway = -config.bristle_lean * compression;
        let sway_rate = -config.bristle_lean * compression_rate;

        let target_front = body_pos + 0.5 * command + sway;
        let target_rear = body_pos - 0.5 * command + sway;
        let target_front_rate = body_vel + 0.5 * command_rate + sway_rate;
        let target_rear_rate = body_vel - 0.5 * command_rate + sway_rate;
        let force_front = config.leg_stiffness * (target_front - front.position)
            + config.leg_damping * (target_front_rate - front.velocity);
        let force_rear = config.leg_stiffness * (target_rear - rear.position)
            + config.leg_damping * (target_rear_rate - rear.velocity);

        // Weight splits evenly; the friction anisotropy does all the
        // direction-picking.
        let n_front = 0.5 * ground_load;
        let n_rear = ground_load - n_front;

        let momentum_before =
            trunk_mass * body_vel + foot_mass * (front.velocity + rear.velocity);
        let impulse_front = front.step(force_front, n_front, config, foot_mass, dt);
        let impulse_rear = rear.step(force_rear, n_rear, config, foot_mass, dt);
        // The legs push back on the trunk with the opposite of what they
        // put into the feet.
        body_vel += -(force_front + force_rear) / trunk_mass * dt;
        body_pos += body_vel * dt;
        let momentum_after =
            trunk_mass * body_vel + foot_mass * (front.velocity + rear.velocity);
        // Leg forces are internal; ground friction is the only external
        // horizontal force on the robot.
        let residual = (momentum_after - momentum_before) - (impulse_front + impulse_rear);
        momentum_residual = momentum_residual.max(residual.abs());

        if front.stuck && rear.stuck {
            anchored_steps += 1;
        }
        x.push(com(body_pos, &front, &rear) - start_com);
    }

    let synthetic = config.drive.frequency >= config.vibration_threshold;
    if synthetic && config.vibration_drift > 0.0 {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += config.vibration_drift * i as f64 * dt;
        }
    }

    // Swing from the second half of the run (short runs may not reach the
    // full thermal steady state; the classifier only needs the scale).
    let swing_window = (0.5 * duration).min(10.0);
    let rows = (swing_window * trace.sample_rate).round() as usize + 1;
    let tail = trace.tail_rows(rows);
    let swings = mado_sequence(&tail, config.drive.frequency)?;
    let cycle_swing = swings.iter().sum::<f64>() / swings.len() as f64;

    let trajectory = PlanarTrajectory {
        sample_rate: trace.sample_rate,
        start_time: trace.start_time,
        y: vec![0.0; x.len()],
        heading: vec![0.0; x.len()],
        x,
    };
    trajectory.validate()?;
    Ok(CrawlerRun {
        trajectory,
        drive_frequency: config.drive.frequency,
        cycle_swing,
        anchored_fraction: anchored_steps as f64 / (n - 1) as f64,
        momentum_residual,
        synthetic_drift: synthetic,
    })
}

/// Simulate the actuator from cold start, then crawl on its deflection
/// trace. `duration` must cover at least 10 drive periods.
pub fn simulate_crawler(config: &CrawlerConfig, duration: f64) -> Result<CrawlerRun> {
    config.validate()?;
    let trace = simulate(&config.actuator, &config.drive, 0.0, duration, DEFAULT_STEP)?;
    simulate_crawler_on_trace(config, &trace)
}

/// Mean per-cycle deflection swing of this crawler's actuator at the 1 Hz
/// reference drive, m. The gait classifier measures every run against it.
pub fn reference_cycle_swing(config: &CrawlerConfig) -> Result<f64> {
    let drive = DriveSignal::new(1.0, 0.06, config.drive.on_voltage);
    let trace = simulate(&config.actuator, &drive, 0.0, 12.0, DEFAULT_STEP)?;
    let tail = steady_state_window(&trace, 6.0)?;
    let swings = mado_sequence(&tail, drive.frequency)?;
    Ok(swings.iter().sum::<f64>() / swings.len() as f64)
}

/// Label a run: crawling needs most of the reference stroke plus real
/// anchored phases, gliding means the stroke has essentially vanished, and
/// the middle is split shuffling/galloping by drive frequency.
pub fn classify_gait(run: &CrawlerRun, reference_swing: f64) -> Result<Gait> {
    if !(reference_swing > 0.0) {
        return Err(SimError::Degenerate(
            "reference cycle swing must be positive".into(),
        ));
    }
    let fraction = run.cycle_swing / reference_swing;
    if fraction < GLIDING_SWING_FRACTION {
        return Ok(Gait::Gliding);
    }
    if fraction > CRAWLING_SWING_FRACTION && run.anchored_fraction > CRAWLING_ANCHORED_FRACTION {
        return Ok(Gait::Crawling);
    }
    if run.drive_frequency < SHUFFLE_GALLOP_SPLIT {
        Ok(Gait::Shuffling)
    } else {
        Ok(Gait::Galloping)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(frequency: f64, duty: f64) -> CrawlerConfig {
        defaults::crawler(frequency, duty)
    }

    #[test]
    fn isotropic_friction_is_rejected() {
        let mut c = config(5.0, 0.11);
        c.friction_sharp = c.friction_smooth;
        assert!(matches!(simulate_crawler(&c, 3.0), Err(SimError::InvalidParameter(_))));
    }

    #[test]
    fn too_short_runs_are_rejected() {
        let c = config(1.0, 0.06);
        assert!(matches!(simulate_crawler(&c, 5.0), Err(SimError::Protocol(_))));
    }

    #[test]
    fn anisotropic_friction_rectifies_forward() {
        let run = simulate_crawler(&config(5.0, 0.11), 4.0).unwrap();
        let net = run.trajectory.x.last().unwrap() - run.trajectory.x[0];
        assert!(net > 0.0, "net displacement {net}");
        assert!(!run.synthetic_drift);
    }

    #[test]
    fn momentum_ledger_closes_every_step() {
        let run = simulate_crawler(&config(10.0, 0.10), 3.0).unwrap();
        // Impulse scale of a step: body weight times dt.
        let scale = 8.0e-6 * defaults::GRAVITY * 1.0e-4;
        assert!(
            run.momentum_residual < 1.0e-9 * scale.max(1.0e-12),
            "residual {}",
            run.momentum_residual
        );
    }

    #[test]
    fn drift_above_the_vibration_threshold_is_flagged_synthetic() {
        let c = config(40.0, 0.10);
        let run = simulate_crawler(&c, 3.0).unwrap();
        assert!(run.synthetic_drift);
        let speed = run
            .trajectory
            .mean_speed_blps(c.body_length, 1.0)
            .unwrap();
        let drift_blps = c.vibration_drift / c.body_length;
        assert!(
            (speed - drift_blps).abs() < 0.05 * drift_blps,
            "speed {speed} vs drift {drift_blps}"
        );
    }

    #[test]
    fn shipped_defaults_reproduce_the_recorded_speed_table() {
        // Recorded bench speeds, BL/s, at the strong drive points.
        let table = [
            (1.0, 0.06, 0.10),
            (5.0, 0.11, 0.46),
            (10.0, 0.10, 0.69),
            (15.0, 0.10, 0.76),
        ];
        let mut previous = 0.0;
        for (frequency, duty, expected) in table {
            let c = config(frequency, duty);
            let run = simulate_crawler(&c, 15.0).unwrap();
            let speed = run.trajectory.mean_speed_blps(c.body_length, 10.0).unwrap();
            assert!(
                (speed / expected - 1.0).abs() < 0.25,
                "{frequency} Hz: {speed} vs {expected}"
            );
            assert!(speed >= previous, "{frequency} Hz broke monotonicity");
            previous = speed;
        }
    }

    #[test]
    fn gaits_span_crawling_to_gliding() {
        let reference = reference_cycle_swing(&config(1.0, 0.06)).unwrap();
        let slow = simulate_crawler(&config(1.0, 0.06), 15.0).unwrap();
        assert_eq!(classify_gait(&slow, reference).unwrap(), Gait::Crawling);
        let vibrating = simulate_crawler(&config(40.0, 0.10), 5.0).unwrap();
        assert_eq!(classify_gait(&vibrating, reference).unwrap(), Gait::Gliding);
    }

    #[test]
    fn classifier_brackets_are_ordered() {
        let run = simulate_crawler(&config(5.0, 0.11), 4.0).unwrap();
        // Same run, three reference swings: tiny reference makes the run
        // look huge (never gliding), huge reference makes it look tiny.
        let tiny = classify_gait(&run, run.cycle_swing * 100.0).unwrap();
        assert_eq!(tiny, Gait::Gliding);
        assert!(classify_gait(&run, 0.0).is_err());
    }
}
