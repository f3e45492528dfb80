//! Planar trajectories produced by the robot simulators.
//!
//! A trajectory is a uniformly sampled series of pose samples. Summary
//! statistics are always recomputed from the series on demand, so they can
//! never disagree with the data they describe.

use crate::error::{Result, SimError};

/// Time-indexed planar pose: position in m, heading in rad.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarTrajectory {
    /// Samples per second.
    pub sample_rate: f64,
    /// Time of the first sample, s.
    pub start_time: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub heading: Vec<f64>,
}

impl PlanarTrajectory {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn time(&self, index: usize) -> f64 {
        self.start_time + index as f64 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        if self.x.is_empty() {
            0.0
        } else {
            (self.x.len() - 1) as f64 / self.sample_rate
        }
    }

    fn window_start_index(&self, window: f64) -> Result<usize> {
        if !(window > 0.0) {
            return Err(SimError::Window("window must be positive".into()));
        }
        let steps = (window * self.sample_rate).round() as usize;
        if steps == 0 || steps >= self.x.len() {
            return Err(SimError::Window(format!(
                "window {window} s does not fit a {:.3} s trajectory",
                self.duration()
            )));
        }
        Ok(self.x.len() - 1 - steps)
    }

    /// Net displacement magnitude over the final `window` seconds divided by
    /// window and body length: the headline speed in body lengths per second.
    pub fn mean_speed_blps(&self, body_length: f64, window: f64) -> Result<f64> {
        let i0 = self.window_start_index(window)?;
        let last = self.x.len() - 1;
        let dx = self.x[last] - self.x[i0];
        let dy = self.y[last] - self.y[i0];
        Ok(dx.hypot(dy) / window / body_length)
    }

    /// Net heading change over the final `window` seconds divided by window,
    /// rad/s. Positive is counter-clockwise.
    pub fn mean_turn_rate(&self, window: f64) -> Result<f64> {
        let i0 = self.window_start_index(window)?;
        Ok((self.heading[self.x.len() - 1] - self.heading[i0]) / window)
    }

    /// Net forward displacement (signed x) over the final `window` seconds.
    pub fn net_x_displacement(&self, window: f64) -> Result<f64> {
        let i0 = self.window_start_index(window)?;
        Ok(self.x[self.x.len() - 1] - self.x[i0])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0) {
            return Err(SimError::invalid("sample_rate must be positive"));
        }
        if self.x.len() != self.y.len() || self.x.len() != self.heading.len() {
            return Err(SimError::invalid("trajectory channels differ in length"));
        }
        let finite = |v: &[f64]| v.iter().all(|a| a.is_finite());
        if !(finite(&self.x) && finite(&self.y) && finite(&self.heading)) {
            return Err(SimError::Numerical("non-finite trajectory sample".into()));
        }
        Ok(())
    }
}
