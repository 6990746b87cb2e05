//! Autonomous emergency braking: a last-resort reflex evaluated every
//! simulation tick, independent of the planner.
//!
//! Per pedestrian track the module:
//! 1. predicts a constant-velocity mean trajectory with isotropically growing
//!    Gaussian position uncertainty, represented by a fixed deterministic
//!    low-discrepancy sample cloud;
//! 2. rolls the ego forward at its current speed and finds the minimum
//!    separation between the ego footprint and the predicted mean — the
//!    conflict point — plus the per-step probability that the pedestrian
//!    disc overlaps the footprint;
//! 3. computes the braking slack: the time that can still pass before a
//!    full-power stop (after the actuation delay) no longer prevents
//!    reaching the conflict point;
//! 4. converts slack and time-to-conflict into a risk in [0, 1], gated by a
//!    minimum collision probability so mere proximity never triggers.
//!
//! The brake latches once triggered; [`AebController`] holds it until the
//! vehicle stands still.

use crate::fmath;
use crate::model::{Point, VehicleShape};
use alloc::vec::Vec;

/// Tuning parameters. All positive; defaults give a late, hard, low-false-
/// positive reflex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AebConfig {
    /// Magnitude of the emergency deceleration (m/s²).
    pub max_brake: f64,
    /// Brake actuation delay δ accounted in the slack (s).
    pub actuation_delay: f64,
    /// Brake when the worst-track risk exceeds this.
    pub risk_threshold: f64,
    /// Ignore tracks whose maximum collision probability is not strictly
    /// above this.
    pub collision_prob_threshold: f64,
    /// Prediction horizon (s).
    pub horizon: f64,
    /// Prediction time step (s).
    pub prediction_dt: f64,
    /// Size of the deterministic sample cloud.
    pub sample_count: usize,
    /// Position uncertainty growth rate: σ(τ) = rate · τ (m/s).
    pub growth_rate: f64,
    /// Pedestrian disc radius (m).
    pub ped_radius: f64,
}

impl Default for AebConfig {
    fn default() -> Self {
        AebConfig {
            max_brake: 10.0,
            actuation_delay: 0.2,
            risk_threshold: 0.99,
            collision_prob_threshold: 0.5,
            horizon: 4.0,
            prediction_dt: 0.05,
            sample_count: 200,
            growth_rate: 0.5,
            ped_radius: 0.3,
        }
    }
}

/// Ego state as seen by the reflex: front-bumper position along the road,
/// lateral offset of the vehicle center line, and current speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoSnapshot {
    pub front: f64,
    pub lateral: f64,
    pub speed: f64,
}

/// One tracked pedestrian: position and velocity components in the same
/// road frame as the ego snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PedTrack {
    pub s: f64,
    pub t: f64,
    pub speed_s: f64,
    pub speed_t: f64,
}

/// Deterministic unit-Gaussian offsets shared by every prediction, built
/// from the (2, 3) Halton sequence through the normal quantile function.
#[derive(Debug, Clone)]
pub struct SampleCloud {
    offsets: Vec<(f64, f64)>,
}

impl SampleCloud {
    pub fn halton(count: usize) -> Self {
        let offsets = (0..count as u64)
            .map(|i| (fmath::norm_ppf(fmath::halton(i, 2)), fmath::norm_ppf(fmath::halton(i, 3))))
            .collect();
        SampleCloud { offsets }
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// One step of a predicted pedestrian trajectory: mean position and the
/// isotropic position standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredStep {
    pub s: f64,
    pub t: f64,
    pub sigma: f64,
}

/// Constant-velocity prediction with linearly growing uncertainty, sampled
/// at `dt` from τ = 0 to the horizon inclusive.
pub fn predict_pedestrian(track: &PedTrack, horizon: f64, dt: f64, growth_rate: f64) -> Vec<PredStep> {
    debug_assert!(horizon > 0.0 && dt > 0.0);
    let steps = (horizon / dt).ceil() as usize;
    (0..=steps)
        .map(|k| {
            let tau = k as f64 * dt;
            PredStep {
                s: track.s + track.speed_s * tau,
                t: track.t + track.speed_t * tau,
                sigma: growth_rate * tau,
            }
        })
        .collect()
}

/// Axis-aligned footprint rectangle.
#[derive(Debug, Clone, Copy)]
struct Rect {
    s_min: f64,
    s_max: f64,
    t_min: f64,
    t_max: f64,
}

impl Rect {
    /// Euclidean distance from a point to the closed rectangle (0 inside).
    fn distance(&self, s: f64, t: f64) -> f64 {
        let ds = (self.s_min - s).max(0.0).max(s - self.s_max);
        let dt = (self.t_min - t).max(0.0).max(t - self.t_max);
        fmath::hypot(ds, dt)
    }
}

/// Probability that a disc of radius `radius` centered on the predicted
/// distribution overlaps `rect`, estimated over the sample cloud.
fn overlap_probability(step: &PredStep, cloud: &SampleCloud, rect: &Rect, radius: f64) -> f64 {
    let mut hits = 0usize;
    for &(zs, zt) in &cloud.offsets {
        let s = step.s + step.sigma * zs;
        let t = step.t + step.sigma * zt;
        if rect.distance(s, t) <= radius {
            hits += 1;
        }
    }
    hits as f64 / cloud.offsets.len() as f64
}

/// Braking slack: how much time may still pass before even an immediate
/// full-brake command (delayed by `actuation_delay`, then decelerating at
/// `max_brake`) stops short of a conflict `distance` ahead.
///
/// Positive: margin remains. Zero or negative: the conflict point is no
/// longer avoidable by braking. Infinite: the ego is stationary and never
/// reaches the conflict.
pub fn compute_ttb(distance: f64, speed: f64, actuation_delay: f64, max_brake: f64) -> f64 {
    debug_assert!(max_brake > 0.0 && actuation_delay >= 0.0);
    if speed <= 0.0 {
        return f64::INFINITY;
    }
    (distance - speed * actuation_delay - speed * speed / (2.0 * max_brake)) / speed
}

/// Risk of reaching the conflict point before a last-moment brake can stop:
/// the fraction of the time-to-conflict already committed,
/// `(ttc − max(slack, 0)) / ttc`, clamped to [0, 1]. Stationary: 0. Conflict
/// at or behind the front bumper while moving: 1.
pub fn conflict_risk(distance: f64, speed: f64, actuation_delay: f64, max_brake: f64) -> f64 {
    if speed <= 0.0 {
        return 0.0;
    }
    if distance <= 0.0 {
        return 1.0;
    }
    let ttc = distance / speed;
    let slack = compute_ttb(distance, speed, actuation_delay, max_brake);
    let ttb_used = ttc - slack.max(0.0);
    (ttb_used / ttc).clamp(0.0, 1.0)
}

/// Everything the reflex concluded about one track.
#[derive(Debug, Clone, Copy)]
pub struct TrackAssessment {
    /// Maximum per-step probability of footprint overlap.
    pub collision_probability: f64,
    /// Mean pedestrian position at the minimum-separation step.
    pub conflict: Point,
    /// Time of the minimum-separation step (s).
    pub time_to_conflict: f64,
    /// Time for the front bumper to reach the conflict longitudinally (s).
    pub ttc: f64,
    /// Gated risk in [0, 1].
    pub risk: f64,
}

/// Assess one pedestrian track against the ego's constant-speed rollout.
pub fn assess_track(
    config: &AebConfig,
    vehicle: &VehicleShape,
    ego: &EgoSnapshot,
    track: &PedTrack,
    cloud: &SampleCloud,
) -> TrackAssessment {
    let prediction = predict_pedestrian(track, config.horizon, config.prediction_dt, config.growth_rate);
    let mut best_sep = f64::INFINITY;
    let mut best = (&prediction[0], 0.0f64);
    let mut p_max = 0.0f64;
    for (k, step) in prediction.iter().enumerate() {
        let tau = k as f64 * config.prediction_dt;
        let front = ego.front + ego.speed * tau;
        let rect = Rect {
            s_min: front - vehicle.length,
            s_max: front,
            t_min: ego.lateral - vehicle.half_width(),
            t_max: ego.lateral + vehicle.half_width(),
        };
        let sep = rect.distance(step.s, step.t);
        if sep < best_sep {
            best_sep = sep;
            best = (step, tau);
        }
        // The cloud cannot reach the footprint beyond a few sigma.
        if sep <= step.sigma * 6.0 + config.ped_radius {
            let p = overlap_probability(step, cloud, &rect, config.ped_radius);
            if p > p_max {
                p_max = p;
            }
        }
    }
    let (conflict_step, time_to_conflict) = best;
    let distance = conflict_step.s - ego.front;
    let ttc = if ego.speed > 0.0 && distance > 0.0 { distance / ego.speed } else { f64::INFINITY };
    let gated = p_max > config.collision_prob_threshold;
    let risk = if gated {
        conflict_risk(distance, ego.speed, config.actuation_delay, config.max_brake)
    } else {
        0.0
    };
    TrackAssessment {
        collision_probability: p_max,
        conflict: Point::new(conflict_step.s, conflict_step.t),
        time_to_conflict,
        ttc,
        risk,
    }
}

/// The per-tick verdict over all tracks.
#[derive(Debug, Clone, Copy)]
pub struct AebDecision {
    pub brake: bool,
    /// Worst-track values (zeros / infinities when no tracks exist).
    pub risk: f64,
    pub ttc: f64,
    pub collision_probability: f64,
    /// Index of the maximum-risk track, if any were assessed.
    pub worst_track: Option<usize>,
}

impl AebDecision {
    fn idle() -> Self {
        AebDecision {
            brake: false,
            risk: 0.0,
            ttc: f64::INFINITY,
            collision_probability: 0.0,
            worst_track: None,
        }
    }
}

/// Evaluate the reflex for one tick. No tracks means no intervention.
pub fn aeb_step(
    config: &AebConfig,
    vehicle: &VehicleShape,
    ego: &EgoSnapshot,
    tracks: &[PedTrack],
    cloud: &SampleCloud,
) -> AebDecision {
    let mut decision = AebDecision::idle();
    for (index, track) in tracks.iter().enumerate() {
        let a = assess_track(config, vehicle, ego, track, cloud);
        let better = match decision.worst_track {
            None => true,
            // Strict comparison keeps the lowest index on ties.
            Some(_) => a.risk > decision.risk,
        };
        if better {
            decision.risk = a.risk;
            decision.ttc = a.ttc;
            decision.collision_probability = a.collision_probability;
            decision.worst_track = Some(index);
        }
    }
    decision.brake = decision.risk > config.risk_threshold;
    decision
}

/// Latching wrapper: once the reflex fires, full braking holds until the
/// vehicle stands still.
#[derive(Debug, Clone, Default)]
pub struct AebController {
    latched: bool,
}

/// One controller tick: the commanded deceleration override (if any), the
/// raw decision, and whether this tick started a new braking event.
#[derive(Debug, Clone, Copy)]
pub struct AebOutput {
    /// `Some(-max_brake)` while the latch holds.
    pub command: Option<f64>,
    pub decision: AebDecision,
    /// True exactly on ticks where the latch newly engaged.
    pub activated: bool,
}

impl AebController {
    pub fn new() -> Self {
        AebController { latched: false }
    }

    pub fn is_latched(&self) -> bool {
        self.latched
    }

    pub fn update(
        &mut self,
        config: &AebConfig,
        vehicle: &VehicleShape,
        ego: &EgoSnapshot,
        tracks: &[PedTrack],
        cloud: &SampleCloud,
    ) -> AebOutput {
        let decision = aeb_step(config, vehicle, ego, tracks, cloud);
        let mut activated = false;
        if self.latched {
            if ego.speed <= 0.0 {
                // Stopped: release the latch. A fresh hazard must re-trigger.
                self.latched = false;
            }
        } else if decision.brake && ego.speed > 0.0 {
            self.latched = true;
            activated = true;
        }
        let command = if self.latched { Some(-config.max_brake) } else { None };
        AebOutput { command, decision, activated }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const V50: f64 = 13.89;

    fn cfg() -> AebConfig {
        AebConfig::default()
    }

    fn car() -> VehicleShape {
        VehicleShape::default()
    }

    #[test]
    fn slack_matches_the_worked_example() {
        // 20 m to conflict at 13.89 m/s: delay distance 2.778 m, stopping
        // distance 9.647 m, so 7.575 m ≈ 0.545 s of margin remain.
        let slack = compute_ttb(20.0, V50, 0.2, 10.0);
        assert_abs_diff_eq!(slack, 0.5454, epsilon = 1e-4);
    }

    #[test]
    fn slack_edge_cases() {
        assert_eq!(compute_ttb(20.0, 0.0, 0.2, 10.0), f64::INFINITY);
        // Inside the stopping distance: no margin left.
        assert!(compute_ttb(5.0, V50, 0.2, 10.0) < 0.0);
        assert_eq!(compute_ttb(f64::INFINITY, V50, 0.2, 10.0), f64::INFINITY);
    }

    #[test]
    fn risk_has_a_closed_form() {
        // risk = min(committed distance / conflict distance, 1) with
        // committed = v·δ + v²/(2a). Check against the slack construction.
        for d in [5.0, 10.0, 12.0, 12.55, 15.0, 20.0, 40.0, 100.0] {
            for v in [1.0, 5.0, V50, 20.0] {
                let committed = v * 0.2 + v * v / 20.0;
                let expect = (committed / d).min(1.0);
                assert_abs_diff_eq!(conflict_risk(d, v, 0.2, 10.0), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn risk_bounds_monotonicity_and_stationary() {
        let mut last = f64::INFINITY;
        for d in [2.0, 5.0, 8.0, 12.0, 12.5501, 20.0, 50.0, 500.0] {
            let r = conflict_risk(d, V50, 0.2, 10.0);
            assert!((0.0..=1.0).contains(&r));
            assert!(r <= last, "risk must not increase with distance");
            last = r;
        }
        assert_eq!(conflict_risk(10.0, 0.0, 0.2, 10.0), 0.0);
        assert_eq!(conflict_risk(-1.0, V50, 0.2, 10.0), 1.0);
        // Faster is riskier at fixed distance.
        assert!(conflict_risk(14.0, 14.0, 0.2, 10.0) > conflict_risk(14.0, 10.0, 0.2, 10.0));
    }

    #[test]
    fn trigger_distance_sits_just_above_the_committed_distance() {
        // Committed distance at 50 km/h is 12.42 m; the 0.99 threshold fires
        // from 12.55 m inward.
        assert!(conflict_risk(12.0, V50, 0.2, 10.0) > 0.99);
        assert!(conflict_risk(13.0, V50, 0.2, 10.0) < 0.99);
    }

    #[test]
    fn prediction_is_constant_velocity_with_growing_sigma() {
        let track = PedTrack { s: 10.0, t: -3.0, speed_s: 0.0, speed_t: 1.25 };
        let pred = predict_pedestrian(&track, 4.0, 0.05, 0.5);
        assert_eq!(pred.len(), 81);
        assert_eq!(pred[0], PredStep { s: 10.0, t: -3.0, sigma: 0.0 });
        let end = pred[80];
        assert_abs_diff_eq!(end.s, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(end.t, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(end.sigma, 2.0, epsilon = 1e-12);
    }

    /// Independent dense-quadrature oracle for the overlap probability: the
    /// Gaussian mass of the footprint inflated by the disc radius.
    fn quadrature_overlap(step: &PredStep, rect: &Rect, radius: f64) -> f64 {
        let n = 400;
        let span = 6.0 * step.sigma;
        let h = 2.0 * span / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            let s = step.s - span + (i as f64 + 0.5) * h;
            for j in 0..n {
                let t = step.t - span + (j as f64 + 0.5) * h;
                if rect.distance(s, t) <= radius {
                    total += crate::fmath::gaussian_pdf(s, step.s, step.sigma)
                        * crate::fmath::gaussian_pdf(t, step.t, step.sigma)
                        * h
                        * h;
                }
            }
        }
        total
    }

    #[test]
    fn sample_cloud_tracks_dense_quadrature() {
        let cloud = SampleCloud::halton(200);
        let rect = Rect { s_min: -4.5, s_max: 0.0, t_min: -0.9, t_max: 0.9 };
        let cases = [
            PredStep { s: -2.0, t: 0.0, sigma: 0.5 },  // deep inside
            PredStep { s: 0.4, t: 0.0, sigma: 0.5 },   // near the front face
            PredStep { s: 0.8, t: 1.4, sigma: 0.7 },   // corner region
            PredStep { s: 2.5, t: 0.0, sigma: 0.8 },   // mostly outside
            PredStep { s: 0.0, t: 3.0, sigma: 0.6 },   // far to the side
        ];
        for step in &cases {
            let sampled = overlap_probability(step, &cloud, &rect, 0.3);
            let dense = quadrature_overlap(step, &rect, 0.3);
            assert!(
                (sampled - dense).abs() <= 0.02,
                "sampled {sampled} vs dense {dense} at {step:?}"
            );
        }
    }

    #[test]
    fn half_overlap_at_the_inflated_edge() {
        let cloud = SampleCloud::halton(200);
        let rect = Rect { s_min: -4.5, s_max: 0.0, t_min: -0.9, t_max: 0.9 };
        // Mean on the inflated front face, well away from corners: half the
        // mass overlaps.
        let step = PredStep { s: 0.3, t: 0.0, sigma: 0.25 };
        let p = overlap_probability(&step, &cloud, &rect, 0.3);
        assert!((p - 0.5).abs() <= 0.05, "got {p}");
    }

    #[test]
    fn crossing_pedestrian_on_collision_course_triggers() {
        // Conflict 12 m ahead at 50 km/h: inside the trigger distance. The
        // pedestrian reaches the lane center exactly when the ego arrives.
        let ego = EgoSnapshot { front: 0.0, lateral: 0.0, speed: V50 };
        let arrival = 12.0 / V50;
        let track =
            PedTrack { s: 12.0, t: -1.25 * arrival, speed_s: 0.0, speed_t: 1.25 };
        let d = aeb_step(&cfg(), &car(), &ego, &[track], &SampleCloud::halton(200));
        assert!(d.collision_probability > 0.5);
        assert!(d.risk > 0.99);
        assert!(d.brake);
        assert_eq!(d.worst_track, Some(0));
        assert_abs_diff_eq!(d.ttc, arrival, epsilon = 1e-9);
    }

    #[test]
    fn distant_conflict_is_recognized_but_not_braked() {
        let ego = EgoSnapshot { front: 0.0, lateral: 0.0, speed: V50 };
        let arrival = 30.0 / V50;
        let track =
            PedTrack { s: 30.0, t: -1.25 * arrival, speed_s: 0.0, speed_t: 1.25 };
        let d = aeb_step(&cfg(), &car(), &ego, &[track], &SampleCloud::halton(200));
        assert!(d.collision_probability > 0.5, "genuine conflict: {}", d.collision_probability);
        assert!(d.risk < 0.99, "but still avoidable: {}", d.risk);
        assert!(!d.brake);
    }

    #[test]
    fn curb_side_pedestrian_never_triggers() {
        // Standing 1.8 m to the side, outside the inflated footprint; the
        // probability gate must hold the reflex down even as sigma grows.
        let ego = EgoSnapshot { front: 0.0, lateral: 0.0, speed: V50 };
        let track = PedTrack { s: 10.0, t: -1.8, speed_s: 0.0, speed_t: 0.0 };
        let d = aeb_step(&cfg(), &car(), &ego, &[track], &SampleCloud::halton(200));
        assert!(d.collision_probability <= 0.5);
        assert_eq!(d.risk, 0.0);
        assert!(!d.brake);
    }

    #[test]
    fn no_tracks_means_no_intervention() {
        let ego = EgoSnapshot { front: 0.0, lateral: 0.0, speed: V50 };
        let d = aeb_step(&cfg(), &car(), &ego, &[], &SampleCloud::halton(200));
        assert!(!d.brake);
        assert_eq!(d.risk, 0.0);
        assert_eq!(d.ttc, f64::INFINITY);
        assert_eq!(d.worst_track, None);
    }

    #[test]
    fn worst_track_wins_and_ties_keep_the_first() {
        let ego = EgoSnapshot { front: 0.0, lateral: 0.0, speed: V50 };
        let arrival = 12.0 / V50;
        let hot = PedTrack { s: 12.0, t: -1.25 * arrival, speed_s: 0.0, speed_t: 1.25 };
        let cold = PedTrack { s: 45.0, t: 4.0, speed_s: 0.0, speed_t: 0.0 };
        let d = aeb_step(&cfg(), &car(), &ego, &[cold, hot], &SampleCloud::halton(200));
        assert_eq!(d.worst_track, Some(1));
        assert!(d.brake);
        // Two identical no-risk tracks: the first index is reported.
        let d2 = aeb_step(&cfg(), &car(), &ego, &[cold, cold], &SampleCloud::halton(200));
        assert_eq!(d2.worst_track, Some(0));
    }

    #[test]
    fn latch_holds_until_standstill() {
        let cloud = SampleCloud::halton(200);
        let mut ctl = AebController::new();
        let arrival = 12.0 / V50;
        let hot = PedTrack { s: 12.0, t: -1.25 * arrival, speed_s: 0.0, speed_t: 1.25 };
        let moving = EgoSnapshot { front: 0.0, lateral: 0.0, speed: V50 };

        let out = ctl.update(&cfg(), &car(), &moving, &[hot], &cloud);
        assert!(out.activated);
        assert_eq!(out.command, Some(-10.0));

        // Track vanishes mid-brake: the latch still holds.
        let slower = EgoSnapshot { front: 5.0, lateral: 0.0, speed: 6.0 };
        let out = ctl.update(&cfg(), &car(), &slower, &[], &cloud);
        assert!(!out.activated);
        assert_eq!(out.command, Some(-10.0));
        assert!(ctl.is_latched());

        // Standstill releases it; nothing re-triggers on a clear road.
        let stopped = EgoSnapshot { front: 7.0, lateral: 0.0, speed: 0.0 };
        let out = ctl.update(&cfg(), &car(), &stopped, &[], &cloud);
        assert_eq!(out.command, None);
        assert!(!out.activated);
        assert!(!ctl.is_latched());
        let out = ctl.update(&cfg(), &car(), &stopped, &[], &cloud);
        assert!(!out.activated);
        assert_eq!(out.command, None);
    }
}
