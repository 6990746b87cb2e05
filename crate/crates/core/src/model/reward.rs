//! Immediate reward: a large penalty in collision cells, otherwise comfort
//! shaping — speed deficit, lane-center deviation, and per-axis actuation
//! penalties. At desired speed, centered in lane, with no actuation and no
//! collision, the reward is exactly zero.

use super::ActionSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    /// Reward in a collision cell, any action (strongly negative).
    pub collision_penalty: f64,
    /// Cost per km/h short of the desired speed (subtracted).
    pub velocity_weight: f64,
    /// Cost per metre of lateral offset from lane center (subtracted).
    pub lane_center_weight: f64,
    /// Added whenever the longitudinal command is nonzero (negative).
    pub longitudinal_action_penalty: f64,
    /// Added whenever the lateral command is nonzero (negative).
    pub lateral_action_penalty: f64,
    /// Target cruising speed (m/s).
    pub desired_speed: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            collision_penalty: -1000.0,
            velocity_weight: 1.0,
            lane_center_weight: 10.0,
            longitudinal_action_penalty: -5.0,
            lateral_action_penalty: -5.0,
            desired_speed: 50.0 / 3.6,
        }
    }
}

/// Comfort part of the reward (no collision).
pub fn comfort_reward(params: &RewardParams, speed: f64, lateral: f64, action: &ActionSpec) -> f64 {
    let deficit_kmh = (params.desired_speed - speed) * 3.6;
    let mut r = -params.velocity_weight * deficit_kmh - params.lane_center_weight * lateral.abs();
    if action.longitudinal != 0.0 {
        r += params.longitudinal_action_penalty;
    }
    if action.lateral != 0.0 {
        r += params.lateral_action_penalty;
    }
    r
}

/// Full immediate reward.
pub fn step_reward(
    params: &RewardParams,
    speed: f64,
    lateral: f64,
    action: &ActionSpec,
    collision: bool,
) -> f64 {
    if collision {
        params.collision_penalty
    } else {
        comfort_reward(params, speed, lateral, action)
    }
}
