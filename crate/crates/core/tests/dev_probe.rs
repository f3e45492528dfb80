//! Scratch probe for locomotion parameter tuning. Ignored by default; run
//! with `cargo test --test dev_probe -- --ignored --nocapture`.
//! DELETE BEFORE RELEASE.

use rayon::prelude::*;
use unimorph::actuator::{simulate, Trace, DEFAULT_STEP};
use unimorph::crawler::{classify_gait, simulate_crawler_on_trace, CrawlerConfig};
use unimorph::defaults;
use unimorph::thermal::DriveSignal;

const DURATION: f64 = 15.0;
const SPEED_WINDOW: f64 = 10.0;
const TARGETS: [(f64, f64, f64); 4] = [
    (1.0, 0.06, 0.10),
    (5.0, 0.11, 0.46),
    (10.0, 0.10, 0.69),
    (15.0, 0.10, 0.76),
];

fn traces() -> Vec<Trace> {
    TARGETS
        .par_iter()
        .map(|&(f, dc, _)| {
            let a = defaults::actuator_for_supply(defaults::CRAWLER_SUPPLY_VOLTAGE);
            let d = DriveSignal::new(f, dc, defaults::CRAWLER_SUPPLY_VOLTAGE);
            simulate(&a, &d, 0.0, DURATION, DEFAULT_STEP).unwrap()
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
struct Knobs {
    leg_gain: f64,
    stiffness: f64,
    zeta: f64,
    mu_sharp: f64,
    mu_smooth: f64,
    bounce_hz: f64,
    bounce_zeta: f64,
    lift: f64,
    lift_cap: f64,
    lean: f64,
}

fn config_with(k: &Knobs, frequency: f64, duty: f64) -> CrawlerConfig {
    let mut c = defaults::crawler(frequency, duty);
    c.leg_gain = k.leg_gain;
    c.leg_stiffness = k.stiffness;
    c.leg_damping = 2.0 * k.zeta * (k.stiffness * c.foot_mass).sqrt();
    c.friction_sharp = k.mu_sharp;
    c.friction_smooth = k.mu_smooth;
    let kz = c.body_mass * (2.0 * std::f64::consts::PI * k.bounce_hz).powi(2);
    c.bounce_stiffness = kz;
    c.bounce_damping = 2.0 * k.bounce_zeta * (kz * c.body_mass).sqrt();
    c.lift_gain = k.lift;
    c.lift_limit = k.lift_cap;
    c.bristle_lean = k.lean;
    c
}

fn speeds(k: &Knobs, traces: &[Trace]) -> Option<[f64; 4]> {
    let mut out = [0.0; 4];
    for (i, &(f, dc, _)) in TARGETS.iter().enumerate() {
        let c = config_with(k, f, dc);
        let run = simulate_crawler_on_trace(&c, &traces[i]).ok()?;
        out[i] = run
            .trajectory
            .mean_speed_blps(c.body_length, SPEED_WINDOW)
            .ok()?;
        // Flag backward drift by negating the reported speed.
        if run.trajectory.net_x_displacement(SPEED_WINDOW).ok()? < 0.0 {
            out[i] = -out[i];
        }
    }
    Some(out)
}

fn worst_error(s: &[f64; 4]) -> f64 {
    let band = TARGETS
        .iter()
        .zip(s)
        .map(|(&(_, _, t), &v)| ((v - t) / t).abs())
        .fold(0.0f64, f64::max);
    // Monotonicity 1 -> 15 Hz is required; penalize violations hard.
    let mono: f64 = s
        .windows(2)
        .map(|w| ((w[0] - w[1]) / w[1].abs().max(1e-9)).max(0.0))
        .sum();
    band + 3.0 * mono
}

#[test]
#[ignore]
fn crawler_grid() {
    let tr = traces();
    println!("traces ready");
    let mut grid = Vec::new();
    for &leg_gain in &[0.5, 0.6, 0.7] {
        for &stiffness in &[0.08, 0.1, 0.12] {
            for &zeta in &[2.0, 2.5] {
                for &bounce_hz in &[19.0, 20.0, 21.0] {
                    for &bounce_zeta in &[0.4, 0.5, 0.6] {
                        for &lift_cap in &[0.13e-3, 0.15e-3, 0.17e-3] {
                            for &lean in &[0.7, 0.8, 0.9] {
                                grid.push(Knobs {
                                    leg_gain,
                                    stiffness,
                                    zeta,
                                    mu_sharp: 1.5,
                                    mu_smooth: 0.3,
                                    bounce_hz,
                                    bounce_zeta,
                                    lift: 3.0,
                                    lift_cap,
                                    lean,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    println!("{} combos", grid.len());
    let mut scored: Vec<(f64, Knobs, [f64; 4])> = grid
        .par_iter()
        .filter_map(|k| speeds(k, &tr).map(|s| (worst_error(&s), *k, s)))
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (err, k, s) in scored.iter().take(25) {
        println!(
            "err {:5.1}% G={:.2} k={:.2} z={:.2} mum={:.2} fz={:4.1} zz={:.2} L={:.1} cap={:.2}mm lean={:.1} | {:.3} {:.3} {:.3} {:.3}",
            err * 100.0,
            k.leg_gain,
            k.stiffness,
            k.zeta,
            k.mu_smooth,
            k.bounce_hz,
            k.bounce_zeta,
            k.lift,
            k.lift_cap * 1e3,
            k.lean,
            s[0],
            s[1],
            s[2],
            s[3]
        );
    }
    println!("targets          {:.3} {:.3} {:.3} {:.3}", 0.10, 0.46, 0.69, 0.76);
}

#[test]
#[ignore]
fn crawler_microscope() {
    // Inline copy of the contact loop with instrumentation. Keep in sync
    // with crawler.rs when the physics changes.
    let freq = 15.0;
    let duty = 0.10;
    let a = defaults::actuator_for_supply(defaults::CRAWLER_SUPPLY_VOLTAGE);
    let d = DriveSignal::new(freq, duty, defaults::CRAWLER_SUPPLY_VOLTAGE);
    let trace = simulate(&a, &d, 0.0, DURATION, DEFAULT_STEP).unwrap();
    let k = Knobs {
        leg_gain: 0.5,
        stiffness: 0.05,
        zeta: 2.0,
        mu_sharp: 1.5,
        mu_smooth: 0.25,
        bounce_hz: 12.0,
        bounce_zeta: 0.4,
        lift: 3.0,
        lift_cap: 0.45e-3,
        lean: 0.6,
    };
    let c = config_with(&k, freq, duty);
    let run = simulate_crawler_on_trace(&c, &trace).unwrap();
    println!(
        "anchored {:.3}  net x {:.4} mm  swing {:.4} mm  speed {:.3} BL/s",
        run.anchored_fraction,
        (run.trajectory.x.last().unwrap() - run.trajectory.x[0]) * 1e3,
        run.cycle_swing * 1e3,
        run.trajectory.mean_speed_blps(c.body_length, SPEED_WINDOW).unwrap()
    );

    // Re-run the physics inline so internal states are visible.
    let dt = 1.0 / trace.sample_rate;
    let mf = c.foot_mass;
    let mt = c.body_mass - 2.0 * mf;
    let weight = c.body_mass * 9.81;
    let hr = 0.5 * c.foot_separation_rest;
    let (mut fp, mut fv, mut fs) = (hr, 0.0f64, true);
    let (mut rp, mut rv, mut rs) = (-hr, 0.0f64, true);
    let (mut bp, mut bv) = (0.0f64, 0.0f64);
    let mut prev_cmd = c.foot_separation_rest;
    let mut ride = c.lift_gain * trace.deflection[0];
    let mut height = ride;
    let mut height_rate = 0.0f64;
    let mut prev_lift = ride;
    let step_foot = |p: &mut f64,
                     v: &mut f64,
                     stuck: &mut bool,
                     f_ext: f64,
                     n_load: f64| {
        let hold = if f_ext > 0.0 { c.friction_smooth * n_load } else { c.friction_sharp * n_load };
        if *stuck {
            if f_ext.abs() <= hold {
                return;
            }
            *stuck = false;
        }
        let mu = if (*v != 0.0 && *v > 0.0) || (*v == 0.0 && f_ext > 0.0) {
            c.friction_smooth
        } else {
            c.friction_sharp
        };
        let dir = if *v != 0.0 { v.signum() } else { f_ext.signum() };
        let fk = -dir * mu * n_load;
        let v0 = *v;
        let mut v1 = v0 + (f_ext + fk) / mf * dt;
        if v1 * v0 < 0.0 || (v0 == 0.0 && v1 * f_ext < 0.0) {
            v1 = 0.0;
            *stuck = true;
        }
        *v = v1;
        *p += v1 * dt;
    };
    let i0 = (8.0 * trace.sample_rate) as usize;
    let period = (trace.sample_rate / freq) as usize;
    for i in 1..trace.deflection.len() {
        let deflection = trace.deflection[i];
        let command = c.foot_separation_rest - c.leg_gain * deflection;
        let cmd_rate = (command - prev_cmd) / dt;
        prev_cmd = command;
        let lift_raw = c.lift_gain * deflection;
        ride += (lift_raw - ride) / unimorph::crawler::RIDE_ADAPT_TAU_S * dt;
        let lift = ride + (lift_raw - ride).clamp(-c.lift_limit, c.lift_limit);
        let lift_rate = (lift - prev_lift) / dt;
        prev_lift = lift;
        let compression = lift - height;
        let compression_rate = lift_rate - height_rate;
        let susp = c.bounce_stiffness * compression + c.bounce_damping * compression_rate;
        height_rate += susp / c.body_mass * dt;
        height += height_rate * dt;
        let ground = (weight + susp).max(0.0);
        let sway = -c.bristle_lean * compression;
        let sway_rate = -c.bristle_lean * compression_rate;
        let tf = bp + 0.5 * command + sway;
        let tr = bp - 0.5 * command + sway;
        let tfr = bv + 0.5 * cmd_rate + sway_rate;
        let trr = bv - 0.5 * cmd_rate + sway_rate;
        let ff = c.leg_stiffness * (tf - fp) + c.leg_damping * (tfr - fv);
        let fr = c.leg_stiffness * (tr - rp) + c.leg_damping * (trr - rv);
        let nf = 0.5 * ground;
        let nr = ground - nf;
        step_foot(&mut fp, &mut fv, &mut fs, ff, nf);
        step_foot(&mut rp, &mut rv, &mut rs, fr, nr);
        bv += -(ff + fr) / mt * dt;
        bp += bv * dt;
        if i >= i0 && i < i0 + 2 * period && (i - i0) % 10 == 0 {
            println!(
                "t+{:>5.1} ms N/W {:>5.2} sway {:>7.4} body v {:>8.4} f(v {:>8.4} s {}) r(v {:>8.4} s {}) x {:>7.4}",
                (i - i0) as f64 * dt * 1e3,
                ground / weight,
                sway * 1e3,
                bv * 1e3,
                fv * 1e3,
                fs as u8,
                rv * 1e3,
                rs as u8,
                (mt * bp + mf * (fp + rp)) / c.body_mass * 1e3
            );
        }
    }
}

#[test]
#[ignore]
fn strider_detail() {
    use unimorph::strider::{simulate_strider, support_margin};
    let c = defaults::strider();
    println!("support margin {:.3}", support_margin(&c));
    let straight = simulate_strider(&c, 15.0).unwrap();
    let v = straight.mean_speed_blps(c.body_length, 10.0).unwrap();
    println!(
        "straight: {:.4} BL/s (target 0.28, {:+.1}%)  heading {:.2e} rad",
        v,
        (v / 0.28 - 1.0) * 100.0,
        straight.heading.last().unwrap()
    );
    let mut turn = defaults::strider();
    turn.left_drive = None;
    turn.right_drive = Some(DriveSignal::new(5.0, 0.11, defaults::STRIDER_SUPPLY_VOLTAGE));
    let t = simulate_strider(&turn, 15.0).unwrap();
    let rate = t.mean_turn_rate(10.0).unwrap();
    let vt = t.mean_speed_blps(turn.body_length, 10.0).unwrap();
    println!(
        "turn: {:.4} rad/s (target 0.144, {:+.1}%)  translation {:.3} BL/s",
        rate,
        (rate / 0.144 - 1.0) * 100.0,
        vt
    );
}

#[test]
#[ignore]
fn crawler_detail() {
    // Shipped-defaults check: per-frequency diagnostics with the frozen
    // rounded values, exactly as acceptance will see them.
    let tr = traces();
    let reference = {
        let c = defaults::crawler(1.0, 0.06);
        unimorph::crawler::reference_cycle_swing(&c).unwrap()
    };
    println!("reference 1 Hz swing {:.4} mm", reference * 1.0e3);
    for (i, &(f, dc, target)) in TARGETS.iter().enumerate() {
        let c = defaults::crawler(f, dc);
        let run = simulate_crawler_on_trace(&c, &tr[i]).unwrap();
        let v = run
            .trajectory
            .mean_speed_blps(c.body_length, SPEED_WINDOW)
            .unwrap();
        let gait = classify_gait(&run, reference).unwrap();
        println!(
            "{:4.0} Hz: speed {:.3} BL/s (target {:.2}, {:+.1}%)  swing {:.4} mm  anchored {:.2}  gait {:?}  mom res {:.2e}",
            f,
            v,
            target,
            (v / target - 1.0) * 100.0,
            run.cycle_swing * 1.0e3,
            run.anchored_fraction,
            gait,
            run.momentum_residual
        );
    }
    for &(f, dc) in &[(20.0, 0.10), (40.0, 0.10)] {
        let c = defaults::crawler(f, dc);
        let run = unimorph::crawler::simulate_crawler(&c, 6.0).unwrap();
        let v = run.trajectory.mean_speed_blps(c.body_length, 3.0).unwrap();
        let gait = classify_gait(&run, reference).unwrap();
        println!(
            "{:4.0} Hz: speed {:.3} BL/s  swing ratio {:.3}  synthetic {}  gait {:?}",
            f,
            v,
            run.cycle_swing / reference,
            run.synthetic_drift,
            gait
        );
    }
}
