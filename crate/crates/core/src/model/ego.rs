//! Ego point-mass kinematics.
//!
//! Longitudinal: speed integrates the commanded acceleration and clamps to
//! `[0, v_max]`; the distance advanced is integrated piecewise-exactly, i.e.
//! if the clamp engages mid-step the remainder of the step runs at the clamp
//! speed. Lateral: a quasi-static nudge of `½·a_lat·dt²` per step, clamped to
//! the lateral corridor.

/// Continuous result of one ego step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoMotion {
    /// Speed after the step (m/s).
    pub speed: f64,
    /// Lateral offset after the step (m).
    pub lateral: f64,
    /// Longitudinal distance covered during the step (m).
    pub advance: f64,
}

/// Longitudinal-only step: returns `(speed', advance)`.
pub fn ego_longitudinal(speed: f64, accel: f64, dt: f64, v_max: f64) -> (f64, f64) {
    debug_assert!(speed >= 0.0 && dt > 0.0 && v_max > 0.0);
    let speed = speed.clamp(0.0, v_max);
    if accel == 0.0 {
        return (speed, speed * dt);
    }
    // Time until the speed would hit the active clamp boundary.
    let t_hit = if accel > 0.0 { (v_max - speed) / accel } else { speed / -accel };
    if t_hit >= dt {
        let end = speed + accel * dt;
        (end, speed * dt + 0.5 * accel * dt * dt)
    } else {
        let boundary = if accel > 0.0 { v_max } else { 0.0 };
        let before = speed * t_hit + 0.5 * accel * t_hit * t_hit;
        (boundary, before + boundary * (dt - t_hit))
    }
}

/// Full ego step including the lateral nudge.
pub fn ego_transition(
    speed: f64,
    lateral: f64,
    accel_lon: f64,
    accel_lat: f64,
    dt: f64,
    v_max: f64,
    lateral_limit: f64,
) -> EgoMotion {
    let (speed_next, advance) = ego_longitudinal(speed, accel_lon, dt, v_max);
    let lateral_next = (lateral + 0.5 * accel_lat * dt * dt).clamp(-lateral_limit, lateral_limit);
    EgoMotion { speed: speed_next, lateral: lateral_next, advance }
}
