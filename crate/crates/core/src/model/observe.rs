//! Measurement model: a detector either returns one pedestrian measurement
//! (position, speed, heading, all with independent Gaussian noise) or
//! nothing. Detection is deterministic given visibility: a visible
//! pedestrian is always measured, a hidden or absent one never is.

use super::ped::PedKinematics;
use crate::fmath;

/// Standard deviations of the measurement channels. Positions share one
/// value for both axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Position noise, both axes (m).
    pub pos_std: f64,
    /// Speed noise (m/s).
    pub speed_std: f64,
    /// Heading noise (rad).
    pub heading_std: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { pos_std: 0.1, speed_std: 0.2, heading_std: 10f64.to_radians() }
    }
}

/// One pedestrian detection in the window frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PedMeasurement {
    pub s: f64,
    pub t: f64,
    pub speed: f64,
    pub heading: f64,
}

/// A sensor frame: at most one detection.
pub type PedObservation = Option<PedMeasurement>;

/// Gaussian density product for a measurement given the true continuous
/// state. Headings are compared by plain difference — the heading range is
/// only a half-circle, so no wrap-around is needed.
pub fn measurement_likelihood(truth: &PedKinematics, m: &PedMeasurement, noise: &NoiseModel) -> f64 {
    fmath::gaussian_pdf(m.s, truth.s, noise.pos_std)
        * fmath::gaussian_pdf(m.t, truth.t, noise.pos_std)
        * fmath::gaussian_pdf(m.speed, truth.speed, noise.speed_std)
        * fmath::gaussian_pdf(m.heading, truth.heading, noise.heading_std)
}

/// Likelihood of an observation for a present pedestrian at `truth` whose
/// visibility is `visible`. Deterministic detection makes two of the four
/// combinations impossible (probability 0).
pub fn cell_likelihood(
    truth: &PedKinematics,
    visible: bool,
    observation: &PedObservation,
    noise: &NoiseModel,
) -> f64 {
    match (visible, observation) {
        (true, Some(m)) => measurement_likelihood(truth, m, noise),
        (true, None) => 0.0,
        (false, Some(_)) => 0.0,
        (false, None) => 1.0,
    }
}

/// Likelihood of an observation when no pedestrian exists.
pub fn absent_likelihood(observation: &PedObservation) -> f64 {
    if observation.is_none() {
        1.0
    } else {
        0.0
    }
}
