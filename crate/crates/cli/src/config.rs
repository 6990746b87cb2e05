//! Harness configuration: one JSON file covering the planner model, solver,
//! sensor, vehicle, emergency-braking, simulation, and suite-composition
//! settings, with per-variant parameter overrides.
//!
//! Human-facing units are used in the file (km/h for road speeds, degrees
//! for headings); everything is converted to SI when resolved into the core
//! types. The shipped `config/default.json` spells out every default
//! explicitly and round-trips to [`HarnessConfig::default`].

use anyhow::{bail, Context, Result};
use pedplan_core::aeb::AebConfig;
use pedplan_core::model::{
    ActionSet, AppearanceModel, AxisSpec, DiscretizationSpec, NoiseModel, OcclusionGeometry,
    RewardParams, VehicleShape,
};
use pedplan_core::model::ModelConfig;
use pedplan_core::pomdp::SolverSettings;
use pedplan_core::sim::{PlannerMode, ScenarioKind, SimConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const KMH: f64 = 1.0 / 3.6;
const DEG: f64 = core::f64::consts::PI / 180.0;

/// One discretization axis: `levels` cell centers spanning `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub min: f64,
    pub max: f64,
    pub levels: usize,
}

impl AxisConfig {
    const fn new(min: f64, max: f64, levels: usize) -> Self {
        AxisConfig { min, max, levels }
    }

    fn to_spec(self, scale: f64) -> AxisSpec {
        AxisSpec::new(self.min * scale, self.max * scale, self.levels)
    }
}

/// State-space resolution. Ego speed in km/h and pedestrian heading in
/// degrees for readability; positions in metres, walking speed in m/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub ego_speed_kmh: AxisConfig,
    pub ego_lateral: AxisConfig,
    pub ped_s: AxisConfig,
    pub ped_t: AxisConfig,
    pub ped_speed: AxisConfig,
    pub ped_heading_deg: AxisConfig,
}

impl Default for DiscretizationConfig {
    /// Reduced-resolution grid (~104k joint states): fast to solve while
    /// keeping the qualitative policy structure.
    fn default() -> Self {
        DiscretizationConfig {
            ego_speed_kmh: AxisConfig::new(0.0, 50.0, 15),
            ego_lateral: AxisConfig::new(-1.0, 1.0, 3),
            ped_s: AxisConfig::new(0.0, 50.0, 14),
            ped_t: AxisConfig::new(-5.0, 5.0, 11),
            ped_speed: AxisConfig::new(0.0, 2.0, 3),
            ped_heading_deg: AxisConfig::new(-90.0, 90.0, 5),
        }
    }
}

impl DiscretizationConfig {
    /// Full-resolution grid (~1.5M joint states); slower to solve, exposed
    /// in `config/full.json`.
    pub fn full() -> Self {
        DiscretizationConfig {
            ego_speed_kmh: AxisConfig::new(0.0, 50.0, 29),
            ego_lateral: AxisConfig::new(-1.0, 1.0, 5),
            ped_s: AxisConfig::new(0.0, 50.0, 27),
            ped_t: AxisConfig::new(-5.0, 5.0, 11),
            ped_speed: AxisConfig::new(0.0, 2.0, 5),
            ped_heading_deg: AxisConfig::new(-90.0, 90.0, 7),
        }
    }

    pub fn to_spec(&self) -> DiscretizationSpec {
        DiscretizationSpec {
            ego_speed: self.ego_speed_kmh.to_spec(KMH),
            ego_lateral: self.ego_lateral.to_spec(1.0),
            ped_s: self.ped_s.to_spec(1.0),
            ped_t: self.ped_t.to_spec(1.0),
            ped_speed: self.ped_speed.to_spec(1.0),
            ped_heading: self.ped_heading_deg.to_spec(DEG),
        }
    }
}

/// Acceleration menus (m/s²), longitudinal-major product order with
/// (0, 0) first so argmax ties resolve to "no intervention".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionsConfig {
    pub longitudinal: Vec<f64>,
    pub lateral: Vec<f64>,
}

impl Default for ActionsConfig {
    fn default() -> Self {
        ActionsConfig { longitudinal: vec![0.0, 1.0, -1.0, -2.0, -4.0], lateral: vec![0.0, 1.0, -1.0] }
    }
}

/// Reward shaping. Speeds in km/h where marked; all penalties enter the
/// per-step reward directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardConfig {
    pub collision_penalty: f64,
    /// Cost per km/h short of the desired speed.
    pub velocity_weight: f64,
    /// Cost per metre of lateral offset from lane center.
    pub lane_center_weight: f64,
    pub longitudinal_action_penalty: f64,
    pub lateral_action_penalty: f64,
    pub desired_speed_kmh: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            collision_penalty: -1000.0,
            velocity_weight: 1.0,
            lane_center_weight: 10.0,
            longitudinal_action_penalty: -5.0,
            lateral_action_penalty: -5.0,
            desired_speed_kmh: 50.0,
        }
    }
}

impl RewardConfig {
    fn to_params(self) -> RewardParams {
        RewardParams {
            collision_penalty: self.collision_penalty,
            velocity_weight: self.velocity_weight,
            lane_center_weight: self.lane_center_weight,
            longitudinal_action_penalty: self.longitudinal_action_penalty,
            lateral_action_penalty: self.lateral_action_penalty,
            desired_speed: self.desired_speed_kmh * KMH,
        }
    }
}

/// Planner model section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub discretization: DiscretizationConfig,
    pub actions: ActionsConfig,
    pub reward: RewardConfig,
    /// Probability that an absent walker materialises in an occluded cell
    /// within one planner step.
    pub p_appear: f64,
    /// Per-axis pedestrian acceleration menu (m/s²).
    pub ped_accel_options: Vec<f64>,
    /// Planner decision period (s).
    pub planner_dt: f64,
    /// Discount factor in [0, 1).
    pub discount: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            discretization: DiscretizationConfig::default(),
            actions: ActionsConfig::default(),
            reward: RewardConfig::default(),
            p_appear: 0.05,
            ped_accel_options: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            planner_dt: 0.2,
            discount: 0.93,
        }
    }
}

/// Value-iteration stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { tolerance: 1e-6, max_iterations: 10_000 }
    }
}

/// Measurement generation and the matching observation-likelihood model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    /// Position noise, both axes (m).
    pub position_std: f64,
    /// Speed noise (m/s).
    pub speed_std: f64,
    /// Heading noise (degrees).
    pub heading_std_deg: f64,
    /// Object-tracking latency (s); must be a whole number of ticks.
    pub tracking_delay: f64,
    /// Base seed; each suite episode adds its stable index.
    pub rng_seed: u64,
}

impl Default for SensorSection {
    fn default() -> Self {
        SensorSection {
            position_std: 0.1,
            speed_std: 0.2,
            heading_std_deg: 10.0,
            tracking_delay: 0.2,
            rng_seed: 1,
        }
    }
}

impl SensorSection {
    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            pos_std: self.position_std,
            speed_std: self.speed_std,
            heading_std: self.heading_std_deg * DEG,
        }
    }
}

/// Ego geometry and actuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSection {
    pub length: f64,
    pub width: f64,
    /// Commanded acceleration takes effect this many seconds after issue;
    /// must be a whole number of ticks. Also the delay budgeted by the
    /// emergency-braking trigger.
    pub brake_delay: f64,
    /// Top speed honoured by the planner's speed axis (documentation /
    /// cross-check; the scenario's ego speed sets the cruise target).
    pub max_speed_kmh: f64,
}

impl Default for VehicleSection {
    fn default() -> Self {
        VehicleSection { length: 4.5, width: 1.8, brake_delay: 0.2, max_speed_kmh: 50.0 }
    }
}

impl VehicleSection {
    pub fn shape(&self) -> VehicleShape {
        VehicleShape { length: self.length, width: self.width }
    }
}

/// Emergency-braking supervisor tuning. The actuation delay budgeted in the
/// trigger comes from `vehicle.brake_delay`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AebSection {
    /// Emergency deceleration magnitude (m/s²).
    pub max_brake: f64,
    /// Brake when worst-track risk exceeds this.
    pub risk_threshold: f64,
    /// Tracks need collision probability strictly above this to be assessed.
    pub collision_prob_threshold: f64,
    /// Prediction horizon (s).
    pub horizon: f64,
    /// Prediction step (s).
    pub prediction_dt: f64,
    /// Deterministic sample-cloud size.
    pub sample_count: usize,
    /// Position uncertainty growth rate σ(τ) = rate · τ (m/s).
    pub growth_rate: f64,
}

impl Default for AebSection {
    fn default() -> Self {
        AebSection {
            max_brake: 10.0,
            risk_threshold: 0.99,
            collision_prob_threshold: 0.5,
            horizon: 4.0,
            prediction_dt: 0.05,
            sample_count: 200,
            growth_rate: 0.5,
        }
    }
}

/// Simulation loop settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// Physics tick (s).
    pub tick_dt: f64,
    /// Hard episode cap (s).
    pub max_duration: f64,
    /// Standstill length with a clear corridor that ends an episode (s).
    pub standstill_timeout: f64,
    /// Pedestrian body radius for contact tests and braking prediction (m).
    pub ped_radius: f64,
    /// Sensor range ahead of the ego (m).
    pub detection_range: f64,
    /// Sensor half-width either side of the lane center (m).
    pub detection_half_width: f64,
    /// Disable only for debugging: exact, noise-free measurements.
    pub measurement_noise: bool,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            tick_dt: 0.05,
            max_duration: 40.0,
            standstill_timeout: 5.0,
            ped_radius: 0.3,
            detection_range: 50.0,
            detection_half_width: 8.0,
            measurement_noise: true,
        }
    }
}

/// Suite composition: which scenario families run, at which impact
/// fractions, and where the occlusion geometry is baked into the planner
/// model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    /// Default ego approach speed (km/h); overridable per invocation.
    pub ego_speed_kmh: f64,
    /// Impact fractions (0 = first-met vehicle edge, 0.5 = centreline)
    /// applied to every collision-course family.
    pub impact_fractions: Vec<f64>,
    /// Scenario families by label; collision-course families expand over
    /// the impact fractions, the rest run once each.
    pub kinds: Vec<String>,
    /// Ego-front distance to the crossing line at which the obstruction is
    /// frozen into the planner model for occluded scenarios (m).
    pub occlusion_bake_distance: f64,
}

impl Default for SuiteSection {
    fn default() -> Self {
        SuiteSection {
            ego_speed_kmh: 50.0,
            impact_fractions: vec![0.0, 0.125, 0.25, 0.375, 0.5],
            kinds: ScenarioKind::ALL.iter().map(|k| k.label().to_string()).collect(),
            occlusion_bake_distance: 20.0,
        }
    }
}

/// Per-variant parameter overrides; `null` inherits the base model value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantOverrides {
    pub p_appear: Option<f64>,
    pub velocity_weight: Option<f64>,
    pub longitudinal_action_penalty: Option<f64>,
}

/// Overrides for the two planner-bearing variants. The braking-only variant
/// has no planner parameters to override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantsSection {
    pub pomdp: VariantOverrides,
    pub pomdp_aeb: VariantOverrides,
}

impl Default for VariantsSection {
    fn default() -> Self {
        // Values from the shipped sweep grids: the stand-alone planner takes
        // the cautious corner (cheap to slow down, pessimistic appearance
        // rate), while the variant running above the emergency brake keeps a
        // stronger cruise pull and a lower appearance rate — it may drive
        // faster past blind spots because the reflex layer backstops it.
        VariantsSection {
            pomdp: VariantOverrides {
                p_appear: Some(0.3),
                velocity_weight: Some(0.4),
                longitudinal_action_penalty: Some(-0.5),
            },
            pomdp_aeb: VariantOverrides {
                p_appear: Some(0.1),
                velocity_weight: Some(0.6),
                longitudinal_action_penalty: Some(-0.5),
            },
        }
    }
}

/// The complete harness configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnessConfig {
    pub model: ModelSection,
    pub solver: SolverSection,
    pub sensor: SensorSection,
    pub vehicle: VehicleSection,
    pub aeb: AebSection,
    pub sim: SimSection,
    pub suite: SuiteSection,
    pub variants: VariantsSection,
}

fn ticks_of(delay: f64, tick_dt: f64, what: &str) -> Result<usize> {
    let ratio = delay / tick_dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > 1e-9 || rounded < 0.0 {
        bail!("{what} ({delay} s) must be a whole number of {tick_dt} s ticks");
    }
    Ok(rounded as usize)
}

impl HarnessConfig {
    pub fn load(path: &Path) -> Result<HarnessConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading configuration {}", path.display()))?;
        let cfg: HarnessConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing configuration {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ticks_of(self.sensor.tracking_delay, self.sim.tick_dt, "sensor.tracking_delay")?;
        ticks_of(self.vehicle.brake_delay, self.sim.tick_dt, "vehicle.brake_delay")?;
        ticks_of(self.model.planner_dt, self.sim.tick_dt, "model.planner_dt")?;
        if !(0.0..1.0).contains(&self.model.discount) {
            bail!("model.discount must lie in [0, 1)");
        }
        if self.solver.tolerance <= 0.0 || self.solver.max_iterations == 0 {
            bail!("solver tolerance must be positive and max_iterations nonzero");
        }
        for label in &self.suite.kinds {
            if ScenarioKind::from_label(label).is_none() {
                bail!("unknown scenario kind {label:?} in suite.kinds");
            }
        }
        for &f in &self.suite.impact_fractions {
            if !(0.0..=0.5).contains(&f) {
                bail!("impact fraction {f} outside [0, 0.5]");
            }
        }
        Ok(())
    }

    /// Overrides that apply to a system variant (none for braking-only).
    pub fn overrides_for(&self, mode: PlannerMode) -> VariantOverrides {
        match mode {
            PlannerMode::AebOnly => VariantOverrides::default(),
            PlannerMode::Pomdp => self.variants.pomdp,
            PlannerMode::PomdpAeb => self.variants.pomdp_aeb,
        }
    }

    /// Resolve the planner model for a variant and occlusion geometry
    /// (window frame).
    pub fn model_config(
        &self,
        overrides: &VariantOverrides,
        occlusion: OcclusionGeometry,
    ) -> ModelConfig {
        let mut reward = self.model.reward.to_params();
        if let Some(w) = overrides.velocity_weight {
            reward.velocity_weight = w;
        }
        if let Some(p) = overrides.longitudinal_action_penalty {
            reward.longitudinal_action_penalty = p;
        }
        ModelConfig {
            discretization: self.model.discretization.to_spec(),
            actions: ActionSet {
                longitudinal: self.model.actions.longitudinal.clone(),
                lateral: self.model.actions.lateral.clone(),
            },
            reward,
            appearance: AppearanceModel {
                p_appear: overrides.p_appear.unwrap_or(self.model.p_appear),
            },
            occlusion,
            vehicle: self.vehicle.shape(),
            ped_accel_options: self.model.ped_accel_options.clone(),
            planner_dt: self.model.planner_dt,
            discount: self.model.discount,
            noise: self.sensor.noise(),
        }
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
        }
    }

    pub fn aeb_config(&self) -> AebConfig {
        AebConfig {
            max_brake: self.aeb.max_brake,
            actuation_delay: self.vehicle.brake_delay,
            risk_threshold: self.aeb.risk_threshold,
            collision_prob_threshold: self.aeb.collision_prob_threshold,
            horizon: self.aeb.horizon,
            prediction_dt: self.aeb.prediction_dt,
            sample_count: self.aeb.sample_count,
            growth_rate: self.aeb.growth_rate,
            ped_radius: self.sim.ped_radius,
        }
    }

    pub fn sim_config(&self, seed: u64) -> Result<SimConfig> {
        Ok(SimConfig {
            tick_dt: self.sim.tick_dt,
            sensor_delay_ticks: ticks_of(
                self.sensor.tracking_delay,
                self.sim.tick_dt,
                "sensor.tracking_delay",
            )?,
            actuation_delay_ticks: ticks_of(
                self.vehicle.brake_delay,
                self.sim.tick_dt,
                "vehicle.brake_delay",
            )?,
            planner_period_ticks: ticks_of(
                self.model.planner_dt,
                self.sim.tick_dt,
                "model.planner_dt",
            )?,
            max_duration: self.sim.max_duration,
            standstill_timeout: self.sim.standstill_timeout,
            ped_radius: self.sim.ped_radius,
            detection_range: self.sim.detection_range,
            detection_half_width: self.sim.detection_half_width,
            noise: self.sensor.noise(),
            measurement_noise: self.sim.measurement_noise,
            seed,
            vehicle: self.vehicle.shape(),
        })
    }

    /// Scenario kinds selected by the suite section, in listed order.
    pub fn suite_kinds(&self) -> Vec<ScenarioKind> {
        self.suite
            .kinds
            .iter()
            .filter_map(|label| ScenarioKind::from_label(label))
            .collect()
    }
}

/// Parse a system-variant label.
pub fn parse_variant(label: &str) -> Result<PlannerMode> {
    match label {
        "aeb-only" => Ok(PlannerMode::AebOnly),
        "pomdp" => Ok(PlannerMode::Pomdp),
        "pomdp-aeb" => Ok(PlannerMode::PomdpAeb),
        other => bail!("unknown variant {other:?} (expected aeb-only, pomdp, or pomdp-aeb)"),
    }
}

pub const ALL_VARIANTS: [PlannerMode; 3] =
    [PlannerMode::AebOnly, PlannerMode::Pomdp, PlannerMode::PomdpAeb];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_default_config_round_trips() {
        let text = include_str!("../../../config/default.json");
        let parsed: HarnessConfig = serde_json::from_str(text).expect("default.json parses");
        assert_eq!(parsed, HarnessConfig::default());
        parsed.validate().expect("default config valid");
    }

    #[test]
    fn shipped_full_config_differs_only_in_resolution() {
        let text = include_str!("../../../config/full.json");
        let parsed: HarnessConfig = serde_json::from_str(text).expect("full.json parses");
        let mut expected = HarnessConfig::default();
        expected.model.discretization = DiscretizationConfig::full();
        assert_eq!(parsed, expected);
        parsed.validate().expect("full config valid");
    }

    #[test]
    fn resolved_model_uses_si_units() {
        let cfg = HarnessConfig::default();
        let model = cfg.model_config(&VariantOverrides::default(), OcclusionGeometry::default());
        let spd = model.discretization.ego_speed;
        assert!((spd.max - 50.0 / 3.6).abs() < 1e-12);
        let hd = model.discretization.ped_heading;
        assert!((hd.max - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((model.reward.desired_speed - 50.0 / 3.6).abs() < 1e-12);
        assert!((model.noise.heading_std - 10.0 * core::f64::consts::PI / 180.0).abs() < 1e-12);
    }

    #[test]
    fn variant_overrides_replace_the_right_fields() {
        let cfg = HarnessConfig::default();
        let ov = VariantOverrides {
            p_appear: Some(0.2),
            velocity_weight: Some(0.5),
            longitudinal_action_penalty: Some(-2.0),
        };
        let model = cfg.model_config(&ov, OcclusionGeometry::default());
        assert_eq!(model.appearance.p_appear, 0.2);
        assert_eq!(model.reward.velocity_weight, 0.5);
        assert_eq!(model.reward.longitudinal_action_penalty, -2.0);
        // Untouched fields keep base values.
        assert_eq!(model.reward.lane_center_weight, 10.0);
    }

    #[test]
    fn fractional_tick_delays_are_rejected() {
        let mut cfg = HarnessConfig::default();
        cfg.sensor.tracking_delay = 0.07;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn delays_resolve_to_tick_counts() {
        let cfg = HarnessConfig::default();
        let sim = cfg.sim_config(7).unwrap();
        assert_eq!(sim.sensor_delay_ticks, 4);
        assert_eq!(sim.actuation_delay_ticks, 4);
        assert_eq!(sim.planner_period_ticks, 4);
        assert_eq!(sim.seed, 7);
        let aeb = cfg.aeb_config();
        assert_eq!(aeb.actuation_delay, cfg.vehicle.brake_delay);
    }
}
