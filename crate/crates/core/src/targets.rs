//! Bundled reference characterization values.
//!
//! The numbers live in `data/targets.toml`, compiled into the binary, and are
//! consumed by the default calibration problem and the regression suite.
//! Accessors convert the file's human units (mm, mN, uJ) to SI.

use serde::Deserialize;
use std::sync::OnceLock;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmadoMaximum {
    pub frequency_hz: f64,
    pub duty_pct: f64,
    pub amado_mm: f64,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSweepTargets {
    pub frequency_hz: f64,
    pub duty_pct: f64,
    pub unloaded_almado_mm: f64,
    pub full_load_mn: f64,
    pub full_load_almado_mm: f64,
    pub work_load_mn: f64,
    pub work_uj: f64,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeTargets {
    pub frequency_hz: f64,
    pub duty_pct: f64,
    pub low_mm: f64,
    pub high_mm: f64,
    pub tolerance_mm: f64,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsistencyTargets {
    pub reported_lift_ratio: f64,
    pub failure_load_mn: f64,
    pub band_check_stress_mpa: f64,
    pub band_check_temperature_c: f64,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrawlerSpeed {
    pub frequency_hz: f64,
    pub duty_pct: f64,
    pub speed_blps: f64,
    pub gait: String,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrawlerTargets {
    pub body_mass_mg: f64,
    pub body_length_mm: f64,
    pub supply_v: f64,
    pub speeds: Vec<CrawlerSpeed>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StriderTargets {
    pub body_mass_mg: f64,
    pub body_length_mm: f64,
    pub supply_v: f64,
    pub straight_frequency_hz: f64,
    pub straight_duty_pct: f64,
    pub straight_speed_blps: f64,
    pub straight_heading_tolerance_rad: f64,
    pub turn_frequency_hz: f64,
    pub turn_duty_pct: f64,
    pub turn_rate_rps: f64,
    pub stroke_angle_rad: f64,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Targets {
    pub amado_maxima: Vec<AmadoMaximum>,
    pub load_sweep: LoadSweepTargets,
    pub envelope: EnvelopeTargets,
    pub consistency: ConsistencyTargets,
    pub crawler: CrawlerTargets,
    pub strider: StriderTargets,
}

impl AmadoMaximum {
    /// Target swing in meters.
    pub fn amado(&self) -> f64 {
        self.amado_mm * 1.0e-3
    }

    /// Duty cycle as a fraction.
    pub fn duty_cycle(&self) -> f64 {
        self.duty_pct * 1.0e-2
    }
}

impl LoadSweepTargets {
    pub fn duty_cycle(&self) -> f64 {
        self.duty_pct * 1.0e-2
    }

    pub fn full_load(&self) -> f64 {
        self.full_load_mn * 1.0e-3
    }

    pub fn full_load_almado(&self) -> f64 {
        self.full_load_almado_mm * 1.0e-3
    }

    pub fn work_load(&self) -> f64 {
        self.work_load_mn * 1.0e-3
    }

    pub fn work(&self) -> f64 {
        self.work_uj * 1.0e-6
    }
}

impl CrawlerTargets {
    pub fn body_mass(&self) -> f64 {
        self.body_mass_mg * 1.0e-6
    }

    pub fn body_length(&self) -> f64 {
        self.body_length_mm * 1.0e-3
    }
}

impl StriderTargets {
    pub fn body_mass(&self) -> f64 {
        self.body_mass_mg * 1.0e-6
    }

    pub fn body_length(&self) -> f64 {
        self.body_length_mm * 1.0e-3
    }
}

const TARGETS_TOML: &str = include_str!("../data/targets.toml");

/// The bundled reference values.
pub fn reference_targets() -> &'static Targets {
    static CACHE: OnceLock<Targets> = OnceLock::new();
    CACHE.get_or_init(|| {
        toml::from_str(TARGETS_TOML).expect("bundled targets.toml must parse")
    })
}
