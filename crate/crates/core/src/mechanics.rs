//! Unimorph leaf-spring mechanics: wire geometry, bending gain, loading.

use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};

/// Geometry of the SMA wire pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireParams {
    /// Wire diameter, m.
    pub diameter: f64,
    /// Unstressed (martensitic) wire length, m.
    pub rest_length: f64,
    /// Bonded span that carries current and contracts, m.
    pub active_length: f64,
    /// Number of wires acting in parallel (mechanically and electrically).
    pub count: u32,
}

impl WireParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.diameter > 0.0 && self.rest_length > 0.0 && self.active_length > 0.0) {
            return Err(SimError::invalid("wire dimensions must be positive"));
        }
        if self.active_length > self.rest_length {
            return Err(SimError::invalid(
                "active_length cannot exceed rest_length",
            ));
        }
        if self.count == 0 {
            return Err(SimError::invalid("wire count must be at least 1"));
        }
        Ok(())
    }

    /// Cross-section of a single wire, m^2.
    pub fn single_cross_section(&self) -> f64 {
        std::f64::consts::PI * (self.diameter / 2.0) * (self.diameter / 2.0)
    }

    /// Combined load-bearing cross-section of the pair, m^2.
    pub fn cross_section(&self) -> f64 {
        self.count as f64 * self.single_cross_section()
    }

    /// Combined convective surface of the active spans, m^2.
    pub fn surface_area(&self) -> f64 {
        self.count as f64 * std::f64::consts::PI * self.diameter * self.active_length
    }

    /// Combined mass of the active spans, kg.
    pub fn mass(&self, density: f64) -> f64 {
        density * self.single_cross_section() * self.active_length * self.count as f64
    }

    /// Electrical resistance of the parallel set, ohm.
    pub fn resistance(&self, resistivity: f64) -> f64 {
        let single = resistivity * self.active_length / self.single_cross_section();
        single / self.count as f64
    }
}

/// Passive leaf-spring substrate the wires bend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    /// Beam length, m.
    pub length: f64,
    /// Beam width, m.
    pub width: f64,
    /// Beam thickness, m.
    pub thickness: f64,
    /// Distance from the beam neutral axis to the wire axis, m.
    pub wire_offset: f64,
}

impl BeamParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.width > 0.0 && self.thickness > 0.0) {
            return Err(SimError::invalid("beam dimensions must be positive"));
        }
        if !(self.wire_offset > 0.0) {
            return Err(SimError::invalid("wire_offset must be positive"));
        }
        Ok(())
    }
}

/// Tip deflection per unit of wire contraction (dimensionless).
///
/// The wire runs the beam at offset `d` from the neutral axis; contraction
/// `c` over the bonded span imposes curvature `kappa = c / (d * L)`, and a
/// uniformly curved cantilever of length `L` deflects `kappa * L^2 / 2` at
/// the tip, so the gain collapses to `L / (2 d)`.
pub fn deflection_gain(beam: &BeamParams) -> f64 {
    beam.length / (2.0 * beam.wire_offset)
}

/// External loading and the bias that pre-stresses the wires.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadingParams {
    /// Pre-stress from the leaf spring with no external load, Pa.
    pub bias_stress: f64,
    /// Extra wire stress per newton of tip load, divided by wire area
    /// (dimensionless lever ratio; reciprocal of the displacement gain).
    pub load_stress_gain: f64,
    /// Tip deflection lost per newton of tip load, m/N.
    pub load_compliance: f64,
    /// Contraction above which the leaf-spring force is flat enough to fold
    /// into `bias_stress` as a constant, m. Every protocol drive swings well
    /// past it; the model assumes the flat regime throughout.
    pub constant_force_threshold: f64,
    /// Weight of the hook and thread used to hang beads, N.
    pub hook_force: f64,
    /// Weight of the first (lighter, crimped) bead, N.
    pub first_bead_force: f64,
    /// Weight of each subsequent bead, N.
    pub bead_increment: f64,
    /// Largest number of beads the protocol hangs.
    pub max_beads: u32,
}

impl LoadingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bias_stress > 0.0 && self.bias_stress.is_finite()) {
            return Err(SimError::invalid("bias_stress must be positive"));
        }
        if !(self.load_stress_gain >= 0.0 && self.load_compliance >= 0.0) {
            return Err(SimError::invalid(
                "load_stress_gain and load_compliance must be >= 0",
            ));
        }
        if self.hook_force < 0.0 || self.first_bead_force < 0.0 || self.bead_increment < 0.0 {
            return Err(SimError::invalid("load weights must be >= 0"));
        }
        if !(self.constant_force_threshold > 0.0) {
            return Err(SimError::invalid("constant_force_threshold must be positive"));
        }
        Ok(())
    }

    /// Tip load with `n` beads hung, N. Zero beads is the free tip (the hook
    /// and thread go on together with the first bead and are counted in that
    /// first step).
    pub fn load_for_beads(&self, n: u32) -> Result<f64> {
        if n > self.max_beads {
            return Err(SimError::protocol(format!(
                "{n} beads exceeds the protocol maximum of {}",
                self.max_beads
            )));
        }
        Ok(match n {
            0 => 0.0,
            _ => self.hook_force + self.first_bead_force + (n - 1) as f64 * self.bead_increment,
        })
    }

    /// The full load-sweep schedule: free tip, then bead by bead.
    pub fn load_levels(&self) -> Vec<f64> {
        (0..=self.max_beads)
            .map(|n| self.load_for_beads(n).expect("n <= max_beads"))
            .collect()
    }
}

/// Free-function spelling of the bead schedule, N.
pub fn load_for_beads(n: u32, schedule: &LoadingParams) -> Result<f64> {
    schedule.load_for_beads(n)
}

/// Uniaxial stress in the wire pair under a tip load, Pa.
pub fn wire_stress(loading: &LoadingParams, wire_area: f64, load: f64) -> f64 {
    loading.bias_stress + loading.load_stress_gain * load / wire_area
}

/// Tip deflection for a given wire contraction and tip load, m.
///
/// The load subtracts deflection through the compliance; the tip cannot be
/// dragged below its powered-off rest pose, which clips the bottom of the
/// stroke under heavy loads.
pub fn tip_deflection(beam: &BeamParams, loading: &LoadingParams, contraction: f64, load: f64) -> f64 {
    let free = deflection_gain(beam) * contraction;
    (free - loading.load_compliance * load).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults;
    use crate::material::wire_contraction;

    #[test]
    fn bench_gain_is_length_over_twice_offset() {
        let beam = defaults::beam();
        let g = deflection_gain(&beam);
        assert!((g - 6.0e-3 / (2.0 * 0.17e-3)).abs() < 1e-12);
        assert!((g - 17.647058823529413).abs() < 1e-9);
    }

    #[test]
    fn full_contraction_gives_rest_deflection_near_1p6_mm() {
        let beam = defaults::beam();
        let loading = defaults::loading();
        let m = defaults::material();
        let wire = defaults::wire();
        let c = wire_contraction(&m, 0.0, wire.rest_length);
        let d = tip_deflection(&beam, &loading, c, 0.0);
        assert!((d - 1.6059e-3).abs() < 5e-6, "got {d}");
    }

    #[test]
    fn load_clips_deflection_at_zero() {
        let beam = defaults::beam();
        let loading = defaults::loading();
        let d = tip_deflection(&beam, &loading, 0.0, 1.44e-3);
        assert_eq!(d, 0.0);
        let d2 = tip_deflection(&beam, &loading, 5.0e-5, 0.0);
        assert!(d2 > 0.0);
    }

    #[test]
    fn compliance_subtracts_linearly_until_the_clip() {
        let beam = defaults::beam();
        let loading = defaults::loading();
        let c = 9.0e-5;
        let d0 = tip_deflection(&beam, &loading, c, 0.0);
        let d1 = tip_deflection(&beam, &loading, c, 1.0e-3);
        assert!((d0 - d1 - loading.load_compliance * 1.0e-3).abs() < 1e-15);
    }

    #[test]
    fn full_load_shifts_stress_by_about_25_mpa() {
        let loading = defaults::loading();
        let wire = defaults::wire();
        let s0 = wire_stress(&loading, wire.cross_section(), 0.0);
        let s1 = wire_stress(&loading, wire.cross_section(), 1.44e-3);
        assert!((s0 - 172.0e6).abs() < 1.0);
        let shift = s1 - s0;
        assert!(
            (shift - 25.0e6).abs() < 1.0e6,
            "expected ~25 MPa shift, got {shift:.3e}"
        );
    }

    #[test]
    fn bead_schedule_is_exact() {
        let loading = defaults::loading();
        // The hook plus the lighter first bead weighs exactly one increment,
        // so every level on the schedule is a whole number of increments.
        assert_eq!(
            loading.hook_force + loading.first_bead_force,
            loading.bead_increment
        );
        assert_eq!(loading.load_for_beads(0).unwrap(), 0.0);
        assert_eq!(loading.load_for_beads(1).unwrap(), 0.18e-3);
        assert_eq!(loading.load_for_beads(7).unwrap(), 1.26e-3);
        assert_eq!(loading.load_for_beads(8).unwrap(), 1.44e-3);
        assert_eq!(8.0 * loading.bead_increment, 1.44e-3);
        assert!(loading.load_for_beads(9).is_err());
        let levels = loading.load_levels();
        assert_eq!(levels.len(), 9);
        assert_eq!(levels[0], 0.0);
        assert_eq!(*levels.last().unwrap(), 1.44e-3);
        // Affine in n with a constant increment from the first bead on.
        for n in 1..8u32 {
            let step = loading.load_for_beads(n + 1).unwrap() - loading.load_for_beads(n).unwrap();
            assert!((step - loading.bead_increment).abs() < 1e-18);
        }
    }

    #[test]
    fn wire_geometry_matches_bench_values() {
        let wire = defaults::wire();
        let m = defaults::material();
        assert!((wire.cross_section() - 1.0134149581949954e-9).abs() < 1e-22);
        assert!((wire.surface_area() - 9.5756e-7).abs() < 1e-10);
        assert!((wire.mass(m.density) - 3.9219e-8).abs() < 1e-11);
        let r = wire.resistance(m.wire_resistivity);
        assert!((r - 4.7365).abs() < 5e-4, "pair resistance {r}");
    }
}
