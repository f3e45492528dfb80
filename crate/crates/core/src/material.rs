//! Shape-memory alloy phase kinetics.
//!
//! The wire is described by a martensite fraction `xi` in [0, 1] (1 = fully
//! martensitic, long; 0 = fully austenitic, contracted). Transformation
//! happens inside two stress-shifted temperature bands and follows the usual
//! half-cosine interpolation between band edges. Direction matters: heating
//! converts martensite to austenite inside the austenite band, cooling
//! converts back inside the martensite band, and outside its own band a
//! branch holds the fraction. Reversals restart the cosine from the state at
//! the reversal point, which is what produces minor loops.

use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};

/// Alloy constants. Temperatures are zero-stress band edges in degC; the
/// operating bands are obtained through [`transition_band`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Austenite start at zero stress, degC.
    pub austenite_start_0: f64,
    /// Austenite finish at zero stress, degC.
    pub austenite_finish_0: f64,
    /// Martensite start at zero stress, degC.
    pub martensite_start_0: f64,
    /// Martensite finish at zero stress, degC.
    pub martensite_finish_0: f64,
    /// Clausius-Clapeyron slope for the austenite edges, Pa per degC.
    pub stress_coeff_austenite: f64,
    /// Clausius-Clapeyron slope for the martensite edges, Pa per degC.
    pub stress_coeff_martensite: f64,
    /// Maximum recoverable strain eps_L, dimensionless.
    pub max_recoverable_strain: f64,
    /// Transformation latent heat, J/kg. Zero disables the latent term.
    pub latent_heat: f64,
    /// Wire density, kg/m^3.
    pub density: f64,
    /// Specific heat, J/(kg degC).
    pub specific_heat: f64,
    /// Electrical resistivity, ohm m.
    pub wire_resistivity: f64,
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let m = self;
        if !(m.martensite_finish_0 < m.martensite_start_0) {
            return Err(SimError::invalid(
                "martensite_finish_0 must be below martensite_start_0",
            ));
        }
        if !(m.martensite_start_0 <= m.austenite_start_0) {
            return Err(SimError::invalid(
                "martensite_start_0 must not exceed austenite_start_0",
            ));
        }
        if !(m.austenite_start_0 < m.austenite_finish_0) {
            return Err(SimError::invalid(
                "austenite_start_0 must be below austenite_finish_0",
            ));
        }
        if !(m.stress_coeff_austenite > 0.0 && m.stress_coeff_martensite > 0.0) {
            return Err(SimError::invalid("stress coefficients must be positive"));
        }
        if !(m.max_recoverable_strain > 0.0 && m.max_recoverable_strain < 0.1) {
            return Err(SimError::invalid(
                "max_recoverable_strain must lie in (0, 0.1)",
            ));
        }
        if !(m.latent_heat >= 0.0) {
            return Err(SimError::invalid("latent_heat must be non-negative"));
        }
        if !(m.density > 0.0 && m.specific_heat > 0.0 && m.wire_resistivity > 0.0) {
            return Err(SimError::invalid(
                "density, specific_heat, wire_resistivity must be positive",
            ));
        }
        Ok(())
    }
}

/// Transformation band edges at a given wire stress, degC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionBand {
    pub austenite_start: f64,
    pub austenite_finish: f64,
    pub martensite_start: f64,
    pub martensite_finish: f64,
}

/// Shift the zero-stress edges by sigma / C. Stress in Pa.
pub fn transition_band(material: &MaterialParams, stress: f64) -> TransitionBand {
    let da = stress / material.stress_coeff_austenite;
    let dm = stress / material.stress_coeff_martensite;
    TransitionBand {
        austenite_start: material.austenite_start_0 + da,
        austenite_finish: material.austenite_finish_0 + da,
        martensite_start: material.martensite_start_0 + dm,
        martensite_finish: material.martensite_finish_0 + dm,
    }
}

impl TransitionBand {
    /// Fraction of the heating transformation *remaining* at temperature `t`:
    /// 1 at or below austenite_start, 0 at or above austenite_finish,
    /// half-cosine in between.
    fn heat_remaining(&self, t: f64) -> f64 {
        let w = self.austenite_finish - self.austenite_start;
        let p = ((t - self.austenite_start) / w).clamp(0.0, 1.0);
        0.5 * (1.0 + (std::f64::consts::PI * p).cos())
    }

    /// Fraction of the cooling transformation *completed* at temperature `t`:
    /// 0 at or above martensite_start, 1 at or below martensite_finish.
    fn cool_completed(&self, t: f64) -> f64 {
        let w = self.martensite_start - self.martensite_finish;
        let q = ((self.martensite_start - t) / w).clamp(0.0, 1.0);
        0.5 * (1.0 - (std::f64::consts::PI * q).cos())
    }
}

/// Temperature trend the state is currently following.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Heating,
    Cooling,
    /// Fresh state, no direction seen yet.
    Idle,
}

/// Hysteresis state of the wire pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    /// Martensite fraction xi in [0, 1].
    pub martensite_fraction: f64,
    /// Temperature at the previous update, degC.
    pub last_temperature: f64,
    pub branch: Branch,
    /// xi at the most recent branch reversal.
    pub branch_entry_fraction: f64,
    /// Temperature at the most recent branch reversal, degC.
    pub branch_entry_temperature: f64,
}

impl PhaseState {
    /// Fully martensitic wire equilibrated at `temperature` (the cold rest
    /// state the actuator starts from).
    pub fn at_rest(temperature: f64) -> Self {
        PhaseState {
            martensite_fraction: 1.0,
            last_temperature: temperature,
            branch: Branch::Idle,
            branch_entry_fraction: 1.0,
            branch_entry_temperature: temperature,
        }
    }
}

/// Advance the hysteresis state to a new temperature.
///
/// Saturation (`t >= austenite_finish` -> 0, `t <= martensite_finish` -> 1)
/// always wins; otherwise the active branch evaluates its cosine law scaled
/// so it passes through the branch entry point, which keeps xi continuous
/// through arbitrary reversals.
pub fn update_phase_fraction(state: &PhaseState, t: f64, band: &TransitionBand) -> PhaseState {
    let dt = t - state.last_temperature;
    let (branch, entry_fraction, entry_temperature) = if dt > 0.0 {
        if state.branch == Branch::Heating {
            (
                Branch::Heating,
                state.branch_entry_fraction,
                state.branch_entry_temperature,
            )
        } else {
            (
                Branch::Heating,
                state.martensite_fraction,
                state.last_temperature,
            )
        }
    } else if dt < 0.0 {
        if state.branch == Branch::Cooling {
            (
                Branch::Cooling,
                state.branch_entry_fraction,
                state.branch_entry_temperature,
            )
        } else {
            (
                Branch::Cooling,
                state.martensite_fraction,
                state.last_temperature,
            )
        }
    } else {
        // Unchanged temperature: hold everything.
        return PhaseState {
            last_temperature: t,
            ..*state
        };
    };

    let xi = if t >= band.austenite_finish {
        0.0
    } else if t <= band.martensite_finish {
        1.0
    } else {
        match branch {
            Branch::Heating => {
                let phi_entry = band.heat_remaining(entry_temperature);
                if phi_entry <= 0.0 {
                    0.0
                } else {
                    entry_fraction * band.heat_remaining(t) / phi_entry
                }
            }
            Branch::Cooling => {
                let psi_entry = band.cool_completed(entry_temperature);
                if psi_entry >= 1.0 {
                    1.0
                } else {
                    entry_fraction
                        + (1.0 - entry_fraction) * (band.cool_completed(t) - psi_entry)
                            / (1.0 - psi_entry)
                }
            }
            Branch::Idle => unreachable!("branch resolved above"),
        }
    };

    PhaseState {
        martensite_fraction: xi.clamp(0.0, 1.0),
        last_temperature: t,
        branch,
        branch_entry_fraction: entry_fraction,
        branch_entry_temperature: entry_temperature,
    }
}

/// Axial contraction of a wire of rest length `rest_length` at fraction `xi`,
/// in metres: eps_L * L0 * (1 - xi).
pub fn wire_contraction(material: &MaterialParams, xi: f64, rest_length: f64) -> f64 {
    material.max_recoverable_strain * rest_length * (1.0 - xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults;

    fn mat() -> MaterialParams {
        defaults::material()
    }

    #[test]
    fn validation_rejects_band_disorder() {
        let mut m = mat();
        m.martensite_start_0 = m.austenite_start_0 + 1.0;
        assert!(m.validate().is_err());
        let mut m = mat();
        m.max_recoverable_strain = 0.1;
        assert!(m.validate().is_err());
        assert!(mat().validate().is_ok());
    }

    #[test]
    fn band_shift_is_sigma_over_c() {
        let m = mat();
        let b0 = transition_band(&m, 0.0);
        let b = transition_band(&m, 80.0e6);
        let shift = 80.0e6 / m.stress_coeff_austenite;
        assert!((b.austenite_start - b0.austenite_start - shift).abs() < 1e-9);
        assert!((b.martensite_finish - b0.martensite_finish - shift).abs() < 1e-9);
    }

    #[test]
    fn band_at_bias_stress_straddles_90c() {
        let b = transition_band(&mat(), 172.0e6);
        assert!(
            b.austenite_start <= 90.0 && 90.0 <= b.austenite_finish,
            "austenite band {}..{} must straddle 90 degC at 172 MPa",
            b.austenite_start,
            b.austenite_finish
        );
        assert!(b.martensite_finish < b.martensite_start);
        assert!(b.martensite_start <= b.austenite_start);
    }

    #[test]
    fn contraction_scales_with_strain_and_length() {
        let mut m = mat();
        m.max_recoverable_strain = 0.03;
        // Fully austenitic 7 mm wire at 3 % strain: 210 um.
        let c = wire_contraction(&m, 0.0, 7.0e-3);
        assert!((c - 210.0e-6).abs() < 1e-12);
        assert_eq!(wire_contraction(&m, 1.0, 7.0e-3), 0.0);
    }

    /// Drive a state through a triangular temperature profile sampled densely.
    fn sweep(state: &mut PhaseState, band: &TransitionBand, from: f64, to: f64, steps: usize) {
        for i in 1..=steps {
            let t = from + (to - from) * (i as f64) / (steps as f64);
            *state = update_phase_fraction(state, t, band);
        }
    }

    #[test]
    fn saturating_cycles_close_and_repeat() {
        let m = mat();
        let band = transition_band(&m, 172.0e6);
        let lo = band.martensite_finish - 5.0;
        let hi = band.austenite_finish + 5.0;
        let mut s = PhaseState::at_rest(lo);

        let record = |s: &mut PhaseState| {
            let mut curve = Vec::new();
            for i in 0..=400 {
                let t = lo + (hi - lo) * (i as f64) / 400.0;
                *s = update_phase_fraction(s, t, &band);
                curve.push(s.martensite_fraction);
            }
            for i in (0..=400).rev() {
                let t = lo + (hi - lo) * (i as f64) / 400.0;
                *s = update_phase_fraction(s, t, &band);
                curve.push(s.martensite_fraction);
            }
            curve
        };

        let first = record(&mut s);
        let second = record(&mut s);
        assert_eq!(s.martensite_fraction, 1.0, "saturating sweep must close");
        for (a, b) in first.iter().zip(second.iter()) {
            assert!((a - b).abs() < 1e-12, "loops must retrace exactly");
        }
    }

    #[test]
    fn heating_and_cooling_branches_are_separated() {
        let m = mat();
        let band = transition_band(&m, 172.0e6);
        let lo = band.martensite_finish - 5.0;
        let hi = band.austenite_finish + 5.0;
        let mid = 0.5 * (band.austenite_start + band.austenite_finish);

        let mut s = PhaseState::at_rest(lo);
        sweep(&mut s, &band, lo, mid, 500);
        let xi_heating = s.martensite_fraction;
        sweep(&mut s, &band, mid, hi, 500);
        sweep(&mut s, &band, hi, mid, 500);
        let xi_cooling = s.martensite_fraction;
        assert!(
            xi_heating > xi_cooling + 0.05,
            "expected hysteresis: heating xi {} vs cooling xi {}",
            xi_heating,
            xi_cooling
        );
    }

    #[test]
    fn branch_laws_are_monotone_and_saturate() {
        let m = mat();
        let band = transition_band(&m, 172.0e6);
        let mut s = PhaseState::at_rest(20.0);
        let mut prev = s.martensite_fraction;
        for i in 0..2000 {
            let t = 20.0 + 0.1 * (i as f64);
            s = update_phase_fraction(&s, t, &band);
            assert!(s.martensite_fraction <= prev + 1e-15, "heating must not raise xi");
            prev = s.martensite_fraction;
        }
        assert_eq!(s.martensite_fraction, 0.0, "far above the band xi saturates at 0");
        for i in 0..3000 {
            let t = 220.0 - 0.1 * (i as f64);
            s = update_phase_fraction(&s, t, &band);
            assert!(s.martensite_fraction >= prev - 1e-15, "cooling must not lower xi");
            prev = s.martensite_fraction;
        }
        assert_eq!(s.martensite_fraction, 1.0, "far below the band xi saturates at 1");
    }

    #[test]
    fn reversals_keep_xi_continuous() {
        let m = mat();
        let band = transition_band(&m, 172.0e6);
        let mut s = PhaseState::at_rest(22.0);
        // Zig-zag deep inside the austenite band.
        let mid = 0.5 * (band.austenite_start + band.austenite_finish);
        sweep(&mut s, &band, 22.0, mid, 300);
        let before = s.martensite_fraction;
        s = update_phase_fraction(&s, mid - 0.01, &band);
        let after_rev = s.martensite_fraction;
        assert!((before - after_rev).abs() < 1e-3, "reversal must not jump");
        s = update_phase_fraction(&s, mid + 0.01, &band);
        assert!((s.martensite_fraction - after_rev).abs() < 1e-3);
    }
}
