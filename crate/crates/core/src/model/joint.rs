//! The assembled joint model over (ego speed, ego lateral offset, pedestrian
//! state ∪ absent), implementing the solver-facing model trait.
//!
//! Everything expensive is precomputed at build time:
//! - per (ego cell, action): the ego successor mixture (≤ 4 cells from the
//!   two independent axis splits) and its comfort reward;
//! - per (ego speed, longitudinal command): one pedestrian transition slab —
//!   the full CSR table of pedestrian rows under that frame shift;
//! - the absent-state appearance row and the collision / visibility masks.
//!
//! The solver backup is overridden with a fused loop over these tables; it
//! computes exactly `R + γ · T·V` like the trait default, just without
//! re-deriving rows. A consistency test pins the two paths together.

use super::ego::{ego_longitudinal, ego_transition};
use super::observe::{absent_likelihood, cell_likelihood, NoiseModel, PedObservation};
use super::occlusion::{occlusion_check, OcclusionGeometry, Point};
use super::ped::PedGrid;
use super::reward::{comfort_reward, RewardParams};
use super::{
    ActionSet, ActionSpec, AppearanceModel, ModelConfig, ModelError, Result, VehicleShape,
};
use crate::grid::Axis;
use crate::pomdp::{DiscretePomdp, PomdpError, Successor};
use alloc::format;
use alloc::vec::Vec;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Ego successor mixture for one (ego cell, action) pair.
#[derive(Debug, Clone, Copy)]
pub struct EgoRow {
    cells: [(u32, f64); 4],
    count: u8,
    /// Longitudinal distance the ego covers during the step (m).
    pub advance: f64,
}

impl EgoRow {
    pub fn cells(&self) -> &[(u32, f64)] {
        &self.cells[..self.count as usize]
    }
}

/// CSR block of pedestrian transition rows for one (ego speed, longitudinal
/// command) pair.
struct Slab {
    offsets: Vec<u32>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl Slab {
    fn row(&self, ped: usize) -> (&[u32], &[f64]) {
        let lo = self.offsets[ped] as usize;
        let hi = self.offsets[ped + 1] as usize;
        (&self.targets[lo..hi], &self.weights[lo..hi])
    }
}

/// The joint discrete model.
pub struct PedestrianPomdp {
    ego_speed: Axis,
    ego_lateral: Axis,
    ped: PedGrid,
    action_set: ActionSet,
    actions: Vec<ActionSpec>,
    reward: RewardParams,
    vehicle: VehicleShape,
    appearance: AppearanceModel,
    occlusion: OcclusionGeometry,
    noise: NoiseModel,
    dt: f64,
    discount: f64,
    ego_rows: Vec<EgoRow>,
    comfort: Vec<f64>,
    /// Per (ego lateral level, position cell): does the cell center lie in
    /// the ego footprint?
    collision_mask: Vec<bool>,
    /// Per (ego lateral level, position cell): line of sight from the sensor.
    visible_mask: Vec<bool>,
    slabs: Vec<Slab>,
    absent_row: Vec<(u32, f64)>,
    occluded_cells: Vec<u32>,
}

impl core::fmt::Debug for PedestrianPomdp {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PedestrianPomdp")
            .field("ego_count", &self.ego_count())
            .field("ped_count", &self.ped_count())
            .field("action_count", &self.actions.len())
            .field("occluded_cells", &self.occluded_cells.len())
            .finish_non_exhaustive()
    }
}

impl PedestrianPomdp {
    pub(super) fn build(config: &ModelConfig) -> Result<PedestrianPomdp> {
        let axes = config.discretization.build_axes()?;
        validate_config(config, &axes)?;

        let ped = PedGrid::new(
            axes.ped_s,
            axes.ped_t,
            axes.ped_speed,
            axes.ped_heading,
            &config.ped_accel_options,
        );
        let actions = config.actions.actions();
        let ego_speed = axes.ego_speed;
        let ego_lateral = axes.ego_lateral;
        let ego_count = ego_speed.levels() * ego_lateral.levels();
        let dt = config.planner_dt;

        // Ego successor mixtures and comfort rewards, action-major per cell.
        let mut ego_rows = Vec::with_capacity(ego_count * actions.len());
        let mut comfort = Vec::with_capacity(ego_count * actions.len());
        for v_idx in 0..ego_speed.levels() {
            for lat_idx in 0..ego_lateral.levels() {
                let speed = ego_speed.center(v_idx);
                let lateral = ego_lateral.center(lat_idx);
                for action in &actions {
                    let motion = ego_transition(
                        speed,
                        lateral,
                        action.longitudinal,
                        action.lateral,
                        dt,
                        ego_speed.max(),
                        ego_lateral.max(),
                    );
                    let sv = ego_speed.split_clamped(motion.speed);
                    let sl = ego_lateral.split_clamped(motion.lateral);
                    let mut cells = [(0u32, 0.0f64); 4];
                    let mut count = 0u8;
                    for &(vi, wv) in &sv.cells[..sv.count] {
                        for &(li, wl) in &sl.cells[..sl.count] {
                            let w = wv * wl;
                            if w > 0.0 {
                                cells[count as usize] =
                                    ((vi * ego_lateral.levels() + li) as u32, w);
                                count += 1;
                            }
                        }
                    }
                    ego_rows.push(EgoRow { cells, count, advance: motion.advance });
                    comfort.push(comfort_reward(&config.reward, speed, lateral, action));
                }
            }
        }

        // Collision and visibility masks per ego lateral level.
        let pos_count = ped.position_count();
        let mut collision_mask = Vec::with_capacity(ego_lateral.levels() * pos_count);
        let mut visible_mask = Vec::with_capacity(ego_lateral.levels() * pos_count);
        for lat_idx in 0..ego_lateral.levels() {
            let lat = ego_lateral.center(lat_idx);
            let sensor = Point::new(0.0, lat);
            for pos in 0..pos_count {
                let c = ped.position_center(pos);
                collision_mask.push(
                    c.s <= config.vehicle.half_length()
                        && (c.t - lat).abs() <= config.vehicle.half_width(),
                );
                visible_mask.push(!occlusion_check(sensor, c, &config.occlusion));
            }
        }

        // Appearance targets from the nominal (lane-center) pose.
        let occluded = ped.occluded_positions(Point::new(0.0, 0.0), &config.occlusion);
        let occluded_cells = ped.positions_to_cells(&occluded);
        let absent_row = ped.appearance_row(&occluded_cells, config.appearance.p_appear);

        // Pedestrian slabs per (ego speed level, longitudinal command).
        let lon = &config.actions.longitudinal;
        let slab_shift = |slab_idx: usize| -> f64 {
            let v = ego_speed.center(slab_idx / lon.len());
            let accel = lon[slab_idx % lon.len()];
            ego_longitudinal(v, accel, dt, ego_speed.max()).1
        };
        let build_slab = |slab_idx: usize| -> Slab {
            let shift = slab_shift(slab_idx);
            let rows = ped.present_count();
            let mut offsets = Vec::with_capacity(rows + 1);
            let mut targets = Vec::new();
            let mut weights = Vec::new();
            let mut scratch = Vec::new();
            offsets.push(0u32);
            for p in 0..rows {
                ped.transition_shifted_into(p, dt, shift, &mut scratch);
                for &(succ, w) in &scratch {
                    targets.push(succ);
                    weights.push(w);
                }
                offsets.push(targets.len() as u32);
            }
            Slab { offsets, targets, weights }
        };
        let slab_count = ego_speed.levels() * lon.len();
        #[cfg(feature = "parallel")]
        let slabs: Vec<Slab> = (0..slab_count).into_par_iter().map(build_slab).collect();
        #[cfg(not(feature = "parallel"))]
        let slabs: Vec<Slab> = (0..slab_count).map(build_slab).collect();

        Ok(PedestrianPomdp {
            ego_speed,
            ego_lateral,
            ped,
            action_set: config.actions.clone(),
            actions,
            reward: config.reward,
            vehicle: config.vehicle,
            appearance: config.appearance,
            occlusion: config.occlusion.clone(),
            noise: config.noise,
            dt,
            discount: config.discount,
            ego_rows,
            comfort,
            collision_mask,
            visible_mask,
            slabs,
            absent_row,
            occluded_cells,
        })
    }

    // --- structure accessors -------------------------------------------------

    pub fn ego_speed_axis(&self) -> &Axis {
        &self.ego_speed
    }

    pub fn ego_lateral_axis(&self) -> &Axis {
        &self.ego_lateral
    }

    pub fn ped(&self) -> &PedGrid {
        &self.ped
    }

    pub fn actions(&self) -> &[ActionSpec] {
        &self.actions
    }

    pub fn action_set(&self) -> &ActionSet {
        &self.action_set
    }

    pub fn planner_dt(&self) -> f64 {
        self.dt
    }

    pub fn vehicle(&self) -> &VehicleShape {
        &self.vehicle
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn occlusion(&self) -> &OcclusionGeometry {
        &self.occlusion
    }

    pub fn appearance(&self) -> &AppearanceModel {
        &self.appearance
    }

    pub fn reward_params(&self) -> &RewardParams {
        &self.reward
    }

    /// Cells an absent pedestrian can appear in (build-pose shadow).
    pub fn occluded_cells(&self) -> &[u32] {
        &self.occluded_cells
    }

    pub fn ego_count(&self) -> usize {
        self.ego_speed.levels() * self.ego_lateral.levels()
    }

    /// Pedestrian state count including absent.
    pub fn ped_count(&self) -> usize {
        self.ped.cell_count()
    }

    pub fn ego_index(&self, speed_idx: usize, lateral_idx: usize) -> usize {
        speed_idx * self.ego_lateral.levels() + lateral_idx
    }

    pub fn ego_of(&self, ego: usize) -> (usize, usize) {
        (ego / self.ego_lateral.levels(), ego % self.ego_lateral.levels())
    }

    /// Ego cell nearest a continuous (speed, lateral) pose.
    pub fn nearest_ego(&self, speed: f64, lateral: f64) -> usize {
        self.ego_index(self.ego_speed.nearest(speed), self.ego_lateral.nearest(lateral))
    }

    pub fn joint_state(&self, ego: usize, ped: usize) -> usize {
        ego * self.ped_count() + ped
    }

    pub fn decompose(&self, state: usize) -> (usize, usize) {
        (state / self.ped_count(), state % self.ped_count())
    }

    pub fn ego_row(&self, ego: usize, action: usize) -> &EgoRow {
        &self.ego_rows[ego * self.actions.len() + action]
    }

    /// Is a pedestrian cell inside the ego footprint at this lateral level?
    /// The absent index never collides.
    pub fn is_collision_cell(&self, lateral_idx: usize, ped: usize) -> bool {
        if ped >= self.ped.present_count() {
            return false;
        }
        self.collision_mask[lateral_idx * self.ped.position_count() + self.ped.position_index(ped)]
    }

    /// Line of sight from the sensor at this lateral level to a present cell
    /// (build-pose geometry).
    pub fn is_visible_cell(&self, lateral_idx: usize, ped: usize) -> bool {
        debug_assert!(ped < self.ped.present_count());
        self.visible_mask[lateral_idx * self.ped.position_count() + self.ped.position_index(ped)]
    }

    fn lon_index(&self, action: usize) -> usize {
        action / self.action_set.lateral.len()
    }

    fn slab_of(&self, speed_idx: usize, action: usize) -> &Slab {
        &self.slabs[speed_idx * self.action_set.longitudinal.len() + self.lon_index(action)]
    }

    /// Fused backup for one ego cell: fills `chunk` (layout `[ped × action]`)
    /// with Q entries for every joint state sharing this ego cell.
    fn backup_ego_block(&self, ego: usize, value: &[f64], chunk: &mut [f64], mixed: &mut Vec<f64>) {
        let a_count = self.actions.len();
        let p_count = self.ped_count();
        let per_pos = self.ped.speed.levels() * self.ped.heading.levels();
        let (v_idx, lat_idx) = self.ego_of(ego);
        let cmask_base = lat_idx * self.ped.position_count();
        let gamma = self.discount;
        let penalty = self.reward.collision_penalty;
        for action in 0..a_count {
            let row = &self.ego_rows[ego * a_count + action];
            mixed.clear();
            mixed.resize(p_count, 0.0);
            for &(e1, we) in row.cells() {
                let base = e1 as usize * p_count;
                let slice = &value[base..base + p_count];
                for (m, &v) in mixed.iter_mut().zip(slice) {
                    *m += we * v;
                }
            }
            let slab = self.slab_of(v_idx, action);
            let base_reward = self.comfort[ego * a_count + action];
            for p in 0..p_count - 1 {
                if self.collision_mask[cmask_base + p / per_pos] {
                    // Absorbing collision cell: self-loop, matching
                    // `successors`' terminal-event treatment entry for entry.
                    chunk[p * a_count + action] =
                        penalty + gamma * value[ego * p_count + p];
                    continue;
                }
                let (targets, weights) = slab.row(p);
                let mut acc = 0.0;
                for (&t, &w) in targets.iter().zip(weights) {
                    acc += w * mixed[t as usize];
                }
                chunk[p * a_count + action] = base_reward + gamma * acc;
            }
            let mut acc = 0.0;
            for &(c, w) in &self.absent_row {
                acc += w * mixed[c as usize];
            }
            chunk[(p_count - 1) * a_count + action] = base_reward + gamma * acc;
        }
    }
}

fn validate_config(config: &ModelConfig, axes: &super::Axes) -> Result<()> {
    if !(config.planner_dt.is_finite() && config.planner_dt > 0.0) {
        return Err(ModelError::BadConfig(format!(
            "planner_dt must be positive and finite, got {}",
            config.planner_dt
        )));
    }
    if !(config.discount.is_finite() && (0.0..1.0).contains(&config.discount)) {
        return Err(ModelError::BadConfig(format!(
            "discount must lie in [0, 1), got {}",
            config.discount
        )));
    }
    if !(0.0..=1.0).contains(&config.appearance.p_appear) {
        return Err(ModelError::BadConfig(format!(
            "p_appear must lie in [0, 1], got {}",
            config.appearance.p_appear
        )));
    }
    if config.actions.longitudinal.is_empty() || config.actions.lateral.is_empty() {
        return Err(ModelError::BadConfig("action menus must be non-empty".into()));
    }
    if config
        .actions
        .longitudinal
        .iter()
        .chain(&config.actions.lateral)
        .any(|a| !a.is_finite())
    {
        return Err(ModelError::BadConfig("action accelerations must be finite".into()));
    }
    if config.ped_accel_options.is_empty()
        || config.ped_accel_options.iter().any(|a| !a.is_finite())
    {
        return Err(ModelError::BadConfig(
            "pedestrian acceleration menu must be non-empty and finite".into(),
        ));
    }
    if !(config.vehicle.length > 0.0 && config.vehicle.width > 0.0) {
        return Err(ModelError::BadConfig("vehicle dimensions must be positive".into()));
    }
    if !(config.noise.pos_std > 0.0 && config.noise.speed_std > 0.0 && config.noise.heading_std > 0.0)
    {
        return Err(ModelError::BadConfig("noise standard deviations must be positive".into()));
    }
    let r = &config.reward;
    if [
        r.collision_penalty,
        r.velocity_weight,
        r.lane_center_weight,
        r.longitudinal_action_penalty,
        r.lateral_action_penalty,
        r.desired_speed,
    ]
    .iter()
    .any(|x| !x.is_finite())
    {
        return Err(ModelError::BadConfig("reward parameters must be finite".into()));
    }
    let corridor_half_width = axes.ego_lateral.max() + config.vehicle.half_width();
    for (index, ob) in config.occlusion.obstacles.iter().enumerate() {
        if !ob.is_well_formed() {
            return Err(ModelError::BadConfig(format!("obstacle {index} is malformed")));
        }
        if ob.t_max > -corridor_half_width && ob.t_min < corridor_half_width {
            return Err(ModelError::ObstacleInCorridor { index, corridor_half_width });
        }
    }
    Ok(())
}

impl DiscretePomdp for PedestrianPomdp {
    type Observation = PedObservation;

    fn state_count(&self) -> usize {
        self.ego_count() * self.ped_count()
    }

    fn action_count(&self) -> usize {
        self.actions.len()
    }

    fn discount(&self) -> f64 {
        self.discount
    }

    fn reward(&self, state: usize, action: usize) -> f64 {
        let (ego, ped) = self.decompose(state);
        let (_, lat_idx) = self.ego_of(ego);
        if self.is_collision_cell(lat_idx, ped) {
            self.reward.collision_penalty
        } else {
            self.comfort[ego * self.actions.len() + action]
        }
    }

    fn successors(&self, state: usize, action: usize, out: &mut Vec<Successor>) {
        out.clear();
        let (ego, ped) = self.decompose(state);
        let p_count = self.ped_count();
        // A collision is a terminal event: collision cells absorb, so their
        // fixed-point value is collision_penalty / (1 - discount) and the
        // planner prices the *probability of ever colliding* rather than
        // accumulating per-step occupancy (which would perversely reward
        // rushing past the pedestrian to shorten the exposure window).
        let (_, lat_idx) = self.ego_of(ego);
        if self.is_collision_cell(lat_idx, ped) {
            out.push((state as u32, 1.0));
            return;
        }
        let row = &self.ego_rows[ego * self.actions.len() + action];
        if ped == p_count - 1 {
            for &(e1, we) in row.cells() {
                let base = e1 as usize * p_count;
                for &(c, w) in &self.absent_row {
                    out.push(((base + c as usize) as u32, we * w));
                }
            }
        } else {
            let (v_idx, _) = self.ego_of(ego);
            let (targets, weights) = self.slab_of(v_idx, action).row(ped);
            for &(e1, we) in row.cells() {
                let base = e1 as usize * p_count;
                for (&t, &w) in targets.iter().zip(weights) {
                    out.push(((base + t as usize) as u32, we * w));
                }
            }
        }
    }

    fn observation_likelihood(&self, observation: &PedObservation, successor: usize) -> f64 {
        let (ego, ped) = self.decompose(successor);
        if ped >= self.ped.present_count() {
            return absent_likelihood(observation);
        }
        let (_, lat_idx) = self.ego_of(ego);
        let truth = self.ped.center(self.ped.cell(ped).expect("present cell"));
        cell_likelihood(&truth, self.is_visible_cell(lat_idx, ped), observation, &self.noise)
    }

    fn backup_sweep(&self, value: &[f64], q_out: &mut [f64]) {
        let block = self.ped_count() * self.actions.len();
        #[cfg(feature = "parallel")]
        {
            q_out
                .par_chunks_mut(block)
                .enumerate()
                .for_each_init(Vec::new, |mixed, (ego, chunk)| {
                    self.backup_ego_block(ego, value, chunk, mixed)
                });
        }
        #[cfg(not(feature = "parallel"))]
        {
            let mut mixed = Vec::new();
            for (ego, chunk) in q_out.chunks_mut(block).enumerate() {
                self.backup_ego_block(ego, value, chunk, &mut mixed);
            }
        }
    }

    /// Structured validation: checks each precomputed table once instead of
    /// walking every joint row (the joint rows are exact products of these).
    fn validate(&self) -> core::result::Result<(), PomdpError> {
        if self.state_count() == 0 || self.action_count() == 0 {
            return Err(PomdpError::EmptyModel);
        }
        let a_count = self.actions.len();
        for (i, row) in self.ego_rows.iter().enumerate() {
            let sum: f64 = row.cells().iter().map(|c| c.1).sum();
            if crate::fmath::abs(sum - 1.0) > 1e-9 {
                return Err(PomdpError::NonStochasticRow { state: i / a_count, action: i % a_count, sum });
            }
        }
        for (slab_idx, slab) in self.slabs.iter().enumerate() {
            for p in 0..self.ped.present_count() {
                let (targets, weights) = slab.row(p);
                let mut sum = 0.0;
                for (&t, &w) in targets.iter().zip(weights) {
                    if !(w.is_finite() && w >= 0.0) || t as usize >= self.ped_count() {
                        return Err(PomdpError::InvalidProbability { state: p, action: slab_idx });
                    }
                    sum += w;
                }
                if crate::fmath::abs(sum - 1.0) > 1e-9 {
                    return Err(PomdpError::NonStochasticRow { state: p, action: slab_idx, sum });
                }
            }
        }
        let absent_sum: f64 = self.absent_row.iter().map(|e| e.1).sum();
        if crate::fmath::abs(absent_sum - 1.0) > 1e-9 {
            return Err(PomdpError::NonStochasticRow {
                state: self.ped_count() - 1,
                action: 0,
                sum: absent_sum,
            });
        }
        for (i, &c) in self.comfort.iter().enumerate() {
            if !c.is_finite() {
                return Err(PomdpError::NonFiniteReward { state: i / a_count, action: i % a_count });
            }
        }
        if !self.reward.collision_penalty.is_finite() {
            return Err(PomdpError::NonFiniteReward { state: 0, action: 0 });
        }
        Ok(())
    }
}
