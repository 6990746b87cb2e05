//! The driving domain model: a discrete POMDP over joint
//! (ego speed, ego lateral position, pedestrian state) with one distinguished
//! absent-pedestrian state per ego configuration.
//!
//! Coordinates use a straight-road Frenet frame. The pedestrian lives in a
//! window `s ∈ [0, s_max]` ahead of the ego reference point (vehicle center)
//! with road-frame lateral coordinate `t`; the ego tracks speed and lateral
//! offset only — longitudinal translation invariance keeps the ego's own `s`
//! out of the state. All internal units are SI (m, m/s, s, rad); reward
//! speed weights are per km/h to match the conventional parameterisation.
//!
//! Submodules:
//! - [`ego`]: point-mass longitudinal/lateral kinematics;
//! - [`ped`]: pedestrian reachability transitions on the grid;
//! - [`occlusion`]: line-of-sight checks against rectangular obstacles;
//! - [`observe`]: measurement likelihoods (visible/occluded/absent cases);
//! - [`reward`]: immediate reward terms;
//! - [`joint`]: the assembled [`PedestrianPomdp`] with its fused solver
//!   backup.

pub mod ego;
pub mod joint;
pub mod observe;
pub mod occlusion;
pub mod ped;
pub mod reward;

pub use joint::PedestrianPomdp;
pub use observe::{NoiseModel, PedMeasurement, PedObservation};
pub use occlusion::{occlusion_check, OcclusionGeometry, Point, RectObstacle};
pub use ped::{PedCell, PedGrid};
pub use reward::RewardParams;

use crate::grid::Axis;
use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised while assembling or querying the domain model.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("axis {name}: need a finite range with min < max and at least 2 levels")]
    BadAxis { name: &'static str },
    #[error("configuration: {0}")]
    BadConfig(String),
    #[error("obstacle {index} overlaps the ego driving corridor (|t| < {corridor_half_width} m)")]
    ObstacleInCorridor { index: usize, corridor_half_width: f64 },
    #[error("state index {state} out of range ({state_count} states)")]
    StateOutOfRange { state: usize, state_count: usize },
}

pub type Result<T> = core::result::Result<T, ModelError>;

/// One axis of the discretization: `levels` cell centers spanning
/// `[min, max]` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub levels: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, levels: usize) -> Self {
        AxisSpec { min, max, levels }
    }

    fn build(&self, name: &'static str) -> Result<Axis> {
        Axis::new(self.min, self.max, self.levels).ok_or(ModelError::BadAxis { name })
    }
}

/// Grid resolution for every state variable. Speeds in m/s, positions in m,
/// headings in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationSpec {
    pub ego_speed: AxisSpec,
    pub ego_lateral: AxisSpec,
    pub ped_s: AxisSpec,
    pub ped_t: AxisSpec,
    pub ped_speed: AxisSpec,
    pub ped_heading: AxisSpec,
}

impl Default for DiscretizationSpec {
    /// Full-resolution grid: 29 ego speeds over 0–50 km/h, 5 lateral offsets
    /// over ±1 m, 27×11 pedestrian positions over 50 m × ±5 m, 5 speeds over
    /// 0–2 m/s, 7 headings over ±90° — ≈1.5e6 joint states plus the absent
    /// column.
    fn default() -> Self {
        DiscretizationSpec {
            ego_speed: AxisSpec::new(0.0, 50.0 / 3.6, 29),
            ego_lateral: AxisSpec::new(-1.0, 1.0, 5),
            ped_s: AxisSpec::new(0.0, 50.0, 27),
            ped_t: AxisSpec::new(-5.0, 5.0, 11),
            ped_speed: AxisSpec::new(0.0, 2.0, 5),
            ped_heading: AxisSpec::new(-core::f64::consts::FRAC_PI_2, core::f64::consts::FRAC_PI_2, 7),
        }
    }
}

/// One joint action: longitudinal and lateral acceleration in m/s².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionSpec {
    pub longitudinal: f64,
    pub lateral: f64,
}

/// The action set as the product of a longitudinal and a lateral menu,
/// longitudinal-major. Keeping (0, 0) first makes argmax ties resolve to "no
/// intervention".
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    pub longitudinal: Vec<f64>,
    pub lateral: Vec<f64>,
}

impl Default for ActionSet {
    fn default() -> Self {
        ActionSet {
            longitudinal: alloc::vec![0.0, 1.0, -1.0, -2.0, -4.0],
            lateral: alloc::vec![0.0, 1.0, -1.0],
        }
    }
}

impl ActionSet {
    pub fn len(&self) -> usize {
        self.longitudinal.len() * self.lateral.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn action(&self, index: usize) -> ActionSpec {
        let lat_n = self.lateral.len();
        ActionSpec {
            longitudinal: self.longitudinal[index / lat_n],
            lateral: self.lateral[index % lat_n],
        }
    }

    pub fn actions(&self) -> Vec<ActionSpec> {
        (0..self.len()).map(|i| self.action(i)).collect()
    }
}

/// Probability that an absent pedestrian materialises in an occluded cell
/// within one planner step; the mass splits uniformly over all currently
/// occluded cells. With no occlusion, absent is absorbing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppearanceModel {
    pub p_appear: f64,
}

impl Default for AppearanceModel {
    fn default() -> Self {
        AppearanceModel { p_appear: 0.05 }
    }
}

/// Ego footprint used for collision cells, line-of-sight origin offsets, and
/// simulator contact checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleShape {
    pub length: f64,
    pub width: f64,
}

impl Default for VehicleShape {
    fn default() -> Self {
        VehicleShape { length: 4.5, width: 1.8 }
    }
}

impl VehicleShape {
    pub fn half_length(&self) -> f64 {
        self.length * 0.5
    }

    pub fn half_width(&self) -> f64 {
        self.width * 0.5
    }
}

/// Everything needed to assemble the joint model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub discretization: DiscretizationSpec,
    pub actions: ActionSet,
    pub reward: RewardParams,
    pub appearance: AppearanceModel,
    /// Static obstacles in window coordinates, evaluated from the nominal
    /// build pose (ego at lane center, window origin). Empty for open roads.
    pub occlusion: OcclusionGeometry,
    pub vehicle: VehicleShape,
    /// Per-axis pedestrian acceleration menu (m/s²); the reachability set is
    /// the Cartesian product over the two axes with uniform probability.
    pub ped_accel_options: Vec<f64>,
    /// Planner decision period (s).
    pub planner_dt: f64,
    /// Discount factor in [0, 1).
    pub discount: f64,
    /// Measurement noise used by the model's observation likelihood.
    pub noise: NoiseModel,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            discretization: DiscretizationSpec::default(),
            actions: ActionSet::default(),
            reward: RewardParams::default(),
            appearance: AppearanceModel::default(),
            occlusion: OcclusionGeometry::default(),
            vehicle: VehicleShape::default(),
            ped_accel_options: alloc::vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            planner_dt: 0.2,
            discount: 0.93,
            noise: NoiseModel::default(),
        }
    }
}

/// Build the joint discrete model. Validates the discretization, the action
/// set, obstacle placement (nothing may overlap the driving corridor), and
/// basic parameter sanity, then precomputes the transition structure.
pub fn build_model(config: &ModelConfig) -> Result<PedestrianPomdp> {
    PedestrianPomdp::build(config)
}

pub(crate) struct Axes {
    pub ego_speed: Axis,
    pub ego_lateral: Axis,
    pub ped_s: Axis,
    pub ped_t: Axis,
    pub ped_speed: Axis,
    pub ped_heading: Axis,
}

impl DiscretizationSpec {
    pub(crate) fn build_axes(&self) -> Result<Axes> {
        Ok(Axes {
            ego_speed: self.ego_speed.build("ego_speed")?,
            ego_lateral: self.ego_lateral.build("ego_lateral")?,
            ped_s: self.ped_s.build("ped_s")?,
            ped_t: self.ped_t.build("ped_t")?,
            ped_speed: self.ped_speed.build("ped_speed")?,
            ped_heading: self.ped_heading.build("ped_heading")?,
        })
    }

    /// Joint state count including the absent column.
    pub fn state_count(&self) -> usize {
        let ego = self.ego_speed.levels * self.ego_lateral.levels;
        let ped =
            self.ped_s.levels * self.ped_t.levels * self.ped_speed.levels * self.ped_heading.levels;
        ego * (ped + 1)
    }
}
