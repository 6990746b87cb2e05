//! Scenario descriptions: a straight road with the ego approaching a
//! crossing line, an optionally scripted pedestrian walking along that line,
//! and optional roadside obstructions.
//!
//! World frame: `s` runs along the road, the crossing line is at `s = 0`,
//! and the ego starts with its front bumper `ego_start_distance` metres
//! before the line (at `s = -ego_start_distance`). `t` is lateral, shared
//! with the planner's window frame; the lane centre is `t = 0`.

use crate::model::{RectObstacle, VehicleShape};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// A pedestrian scripted to walk along the crossing line at constant speed.
///
/// The walker stands at `(start_s, start_t)` until `start_delay` elapses
/// (a negative delay means the walk is already underway at episode start),
/// then moves in `direction` along `t` at `speed`, stopping permanently if
/// `stop_t` is reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptedPed {
    pub start_s: f64,
    pub start_t: f64,
    /// Walking speed, m/s, > 0.
    pub speed: f64,
    /// +1.0 walks toward increasing `t`, -1.0 toward decreasing `t`.
    pub direction: f64,
    /// Lateral coordinate at which the walker halts, if any.
    pub stop_t: Option<f64>,
    /// Seconds after episode start at which walking begins.
    pub start_delay: f64,
}

/// Pedestrian state at an instant: position, velocity, and facing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PedState {
    pub s: f64,
    pub t: f64,
    pub speed: f64,
    /// Heading measured from the road direction; ±π/2 is straight across.
    pub heading: f64,
    pub moving: bool,
}

impl ScriptedPed {
    /// State at `time` seconds after episode start.
    pub fn state_at(&self, time: f64) -> PedState {
        let heading = if self.direction >= 0.0 {
            core::f64::consts::FRAC_PI_2
        } else {
            -core::f64::consts::FRAC_PI_2
        };
        let mut progress = self.speed * (time - self.start_delay).max(0.0);
        let mut moving = time >= self.start_delay;
        if let Some(stop) = self.stop_t {
            let cap = (stop - self.start_t) * self.direction;
            if progress >= cap {
                progress = cap.max(0.0);
                moving = false;
            }
        }
        PedState {
            s: self.start_s,
            t: self.start_t + self.direction * progress,
            speed: if moving { self.speed } else { 0.0 },
            heading,
            moving,
        }
    }
}

/// A complete scenario description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    /// Distance from the ego front bumper to the crossing line at t = 0 (m).
    pub ego_start_distance: f64,
    /// Initial speed and cruise target (m/s).
    pub ego_speed: f64,
    pub pedestrian: Option<ScriptedPed>,
    /// World-frame roadside obstructions (sensor occluders).
    pub obstacles: Vec<RectObstacle>,
}

/// Time for the ego front to reach the crossing line at constant speed.
pub fn arrival_time(spec: &ScenarioSpec) -> f64 {
    spec.ego_start_distance / spec.ego_speed
}

/// Walking-start delay that puts the walker at `anchor_t` exactly
/// `time_offset` seconds relative to the ego's constant-speed arrival at the
/// crossing line (`time_offset = 0.0` synchronizes an exact impact).
pub fn start_delay_for(
    ego_distance: f64,
    ego_speed: f64,
    start_t: f64,
    anchor_t: f64,
    ped_speed: f64,
    time_offset: f64,
) -> f64 {
    let walk = (anchor_t - start_t).abs();
    ego_distance / ego_speed + time_offset - walk / ped_speed
}

/// Named scenario families, following EuroNCAP crossing-pedestrian
/// nomenclature (CPAF: adult from the far side; CPAN: adult from the near
/// side at 25% / 75% overlap schedules; CPCN: near-side child-height step-out
/// from behind an obstruction) plus three deliberately benign variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// Adult crosses from the far side at 8 km/h, 6 m approach.
    Cpaf,
    /// Adult crosses from the near side at 5 km/h, 4 m approach.
    Cpan25,
    /// Adult crosses from the near side at 5 km/h, 6 m approach.
    Cpan75,
    /// Walker steps out from behind a roadside obstruction at 5 km/h.
    Cpcn,
    /// False-positive: walker approaches from the far side and halts 0.9 m
    /// beyond the swept corridor, never entering it.
    FpNear,
    /// False-positive: walker approaches from the near side and halts on
    /// the verge, 0.9 m short of the swept corridor.
    FpStopShort,
    /// The obstruction is present but nobody steps out.
    CpcnEmpty,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Cpaf => "cpaf",
            ScenarioKind::Cpan25 => "cpan-25",
            ScenarioKind::Cpan75 => "cpan-75",
            ScenarioKind::Cpcn => "cpcn",
            ScenarioKind::FpNear => "fp-near",
            ScenarioKind::FpStopShort => "fp-stop-short",
            ScenarioKind::CpcnEmpty => "cpcn-empty",
        }
    }

    /// All kinds, collision-course families first.
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::Cpaf,
        ScenarioKind::Cpan25,
        ScenarioKind::Cpan75,
        ScenarioKind::Cpcn,
        ScenarioKind::FpNear,
        ScenarioKind::FpStopShort,
        ScenarioKind::CpcnEmpty,
    ];

    /// True when the scripted walker is on a collision course.
    pub fn is_collision_course(self) -> bool {
        matches!(
            self,
            ScenarioKind::Cpaf
                | ScenarioKind::Cpan25
                | ScenarioKind::Cpan75
                | ScenarioKind::Cpcn
        )
    }

    /// Parse a scenario label as printed by [`label`](Self::label).
    pub fn from_label(label: &str) -> Option<ScenarioKind> {
        ScenarioKind::ALL.iter().copied().find(|k| k.label() == label)
    }
}

/// Impact point across the vehicle width for a given approach side.
///
/// `fraction` is measured from the edge the walker meets first: 0.0 is that
/// edge, 0.5 the vehicle centreline.
pub fn impact_point(vehicle: &VehicleShape, from_far_side: bool, fraction: f64) -> f64 {
    let edge = if from_far_side { vehicle.half_width() } else { -vehicle.half_width() };
    let inward = if from_far_side { -1.0 } else { 1.0 };
    edge + inward * vehicle.width * fraction
}

/// Roadside obstruction used by the occluded scenarios, world frame.
///
/// A 6 m x 2 m box on the near-side verge ending 2 m before the crossing
/// line; its road-side face sits 0.5 m outside a 3.5 m lane (lane boundary
/// at |t| = 1.75 m), so the box occupies t in [-4.25, -2.25].
pub fn standard_obstruction() -> RectObstacle {
    RectObstacle { s_min: -8.0, s_max: -2.0, t_min: -4.25, t_max: -2.25 }
}

const EGO_START_DISTANCE: f64 = 50.0;
const KMH: f64 = 1.0 / 3.6;

/// Generic timed crossing from one side of the road.
#[allow(clippy::too_many_arguments)]
pub fn crossing(
    name: String,
    vehicle: &VehicleShape,
    ego_speed_kmh: f64,
    ped_speed_kmh: f64,
    approach_distance: f64,
    from_far_side: bool,
    impact_fraction: f64,
    obstacles: Vec<RectObstacle>,
) -> ScenarioSpec {
    let ego_speed = ego_speed_kmh * KMH;
    let ped_speed = ped_speed_kmh * KMH;
    let target = impact_point(vehicle, from_far_side, impact_fraction);
    let direction = if from_far_side { -1.0 } else { 1.0 };
    let start_t = target - direction * approach_distance;
    let delay =
        start_delay_for(EGO_START_DISTANCE, ego_speed, start_t, target, ped_speed, 0.0);
    ScenarioSpec {
        name,
        ego_start_distance: EGO_START_DISTANCE,
        ego_speed,
        pedestrian: Some(ScriptedPed {
            start_s: 0.0,
            start_t,
            speed: ped_speed,
            direction,
            stop_t: None,
            start_delay: delay,
        }),
        obstacles,
    }
}

/// Build a named scenario at the given ego speed and impact fraction, using
/// each family's standard walking speed.
pub fn build_scenario(
    kind: ScenarioKind,
    vehicle: &VehicleShape,
    ego_speed_kmh: f64,
    impact_fraction: f64,
) -> ScenarioSpec {
    build_scenario_custom(kind, vehicle, ego_speed_kmh, impact_fraction, None)
}

/// [`build_scenario`] with an optional walking-speed override (km/h) in
/// place of the family default (8 km/h far-side crossing, 5 km/h otherwise).
pub fn build_scenario_custom(
    kind: ScenarioKind,
    vehicle: &VehicleShape,
    ego_speed_kmh: f64,
    impact_fraction: f64,
    ped_speed_kmh: Option<f64>,
) -> ScenarioSpec {
    let name =
        format!("{}-e{:.0}-f{:03.0}", kind.label(), ego_speed_kmh, impact_fraction * 1000.0);
    match kind {
        ScenarioKind::Cpaf => crossing(
            name,
            vehicle,
            ego_speed_kmh,
            ped_speed_kmh.unwrap_or(8.0),
            6.0,
            true,
            impact_fraction,
            Vec::new(),
        ),
        ScenarioKind::Cpan25 => crossing(
            name,
            vehicle,
            ego_speed_kmh,
            ped_speed_kmh.unwrap_or(5.0),
            4.0,
            false,
            impact_fraction,
            Vec::new(),
        ),
        ScenarioKind::Cpan75 => crossing(
            name,
            vehicle,
            ego_speed_kmh,
            ped_speed_kmh.unwrap_or(5.0),
            6.0,
            false,
            impact_fraction,
            Vec::new(),
        ),
        ScenarioKind::Cpcn => {
            let ob = standard_obstruction();
            // Start hidden behind the obstruction's lateral band.
            let target = impact_point(vehicle, false, impact_fraction);
            let start_t = -3.2;
            let ego_speed = ego_speed_kmh * KMH;
            let ped_speed = ped_speed_kmh.unwrap_or(5.0) * KMH;
            let delay = start_delay_for(
                EGO_START_DISTANCE,
                ego_speed,
                start_t,
                target,
                ped_speed,
                0.0,
            );
            ScenarioSpec {
                name,
                ego_start_distance: EGO_START_DISTANCE,
                ego_speed,
                pedestrian: Some(ScriptedPed {
                    start_s: 0.0,
                    start_t,
                    speed: ped_speed,
                    direction: 1.0,
                    stop_t: None,
                    start_delay: delay,
                }),
                obstacles: alloc::vec![ob],
            }
        }
        ScenarioKind::FpStopShort => {
            // Walks toward the lane but halts on the verge, 1.8 m out, well
            // before the ego arrives.
            let ego_speed = ego_speed_kmh * KMH;
            let ped_speed = ped_speed_kmh.unwrap_or(5.0) * KMH;
            let stop_t = -1.8;
            let start_t = stop_t - 4.0;
            let delay = start_delay_for(
                EGO_START_DISTANCE,
                ego_speed,
                start_t,
                stop_t,
                ped_speed,
                -1.5,
            );
            ScenarioSpec {
                name,
                ego_start_distance: EGO_START_DISTANCE,
                ego_speed,
                pedestrian: Some(ScriptedPed {
                    start_s: 0.0,
                    start_t,
                    speed: ped_speed,
                    direction: 1.0,
                    stop_t: Some(stop_t),
                    start_delay: delay,
                }),
                obstacles: Vec::new(),
            }
        }
        ScenarioKind::FpNear => {
            // Far-side mirror of the stop-short case: the walker approaches
            // the lane from above, halts 0.9 m outside the swept corridor,
            // and is standing well before the ego arrives.
            let ego_speed = ego_speed_kmh * KMH;
            let ped_speed = ped_speed_kmh.unwrap_or(5.0) * KMH;
            let stop_t = 1.8;
            let start_t = stop_t + 4.0;
            let delay = start_delay_for(
                EGO_START_DISTANCE,
                ego_speed,
                start_t,
                stop_t,
                ped_speed,
                -1.5,
            );
            ScenarioSpec {
                name,
                ego_start_distance: EGO_START_DISTANCE,
                ego_speed,
                pedestrian: Some(ScriptedPed {
                    start_s: 0.0,
                    start_t,
                    speed: ped_speed,
                    direction: -1.0,
                    stop_t: Some(stop_t),
                    start_delay: delay,
                }),
                obstacles: Vec::new(),
            }
        }
        ScenarioKind::CpcnEmpty => ScenarioSpec {
            name,
            ego_start_distance: EGO_START_DISTANCE,
            ego_speed: ego_speed_kmh * KMH,
            pedestrian: None,
            obstacles: alloc::vec![standard_obstruction()],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vehicle() -> VehicleShape {
        VehicleShape::default()
    }

    #[test]
    fn the_worked_timing_example_yields_zero_delay() {
        // Ego at 50 km/h, 50 m out, arrives in 3.6 s; a walker covering 5 m
        // at 5 km/h needs exactly 3.6 s, so it starts immediately.
        let delay = start_delay_for(50.0, 50.0 / 3.6, -5.0, 0.0, 5.0 / 3.6, 0.0);
        assert_abs_diff_eq!(delay, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn collision_course_walker_meets_the_impact_point_on_time() {
        let v = vehicle();
        for &kind in &[
            ScenarioKind::Cpaf,
            ScenarioKind::Cpan25,
            ScenarioKind::Cpan75,
            ScenarioKind::Cpcn,
        ] {
            for &f in &[0.0, 0.25, 0.5] {
                let spec = build_scenario(kind, &v, 50.0, f);
                let ped = spec.pedestrian.unwrap();
                let t_arr = arrival_time(&spec);
                let state = ped.state_at(t_arr);
                let far = kind == ScenarioKind::Cpaf;
                let target = impact_point(&v, far, f);
                assert_abs_diff_eq!(state.t, target, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn impact_points_span_edge_to_centreline() {
        let v = vehicle();
        assert_abs_diff_eq!(impact_point(&v, false, 0.0), -0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(impact_point(&v, false, 0.5), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(impact_point(&v, true, 0.0), 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(impact_point(&v, true, 0.25), 0.45, epsilon = 1e-12);
    }

    #[test]
    fn walker_halts_at_its_stop_point() {
        let spec = build_scenario(ScenarioKind::FpStopShort, &vehicle(), 50.0, 0.5);
        let ped = spec.pedestrian.unwrap();
        // Shortly before the ego arrives the walker is already parked (the
        // schedule has it reaching the stop point 1.5 s ahead; query just
        // past that to stay clear of the exact float boundary).
        let arrive = arrival_time(&spec);
        let at_stop = ped.state_at(arrive - 1.4);
        assert_abs_diff_eq!(at_stop.t, -1.8, epsilon = 1e-9);
        assert!(!at_stop.moving);
        assert_eq!(at_stop.speed, 0.0);
        let late = ped.state_at(arrive + 5.0);
        assert_abs_diff_eq!(late.t, -1.8, epsilon = 1e-9);
        // Mid-walk it is still moving.
        let mid = ped.state_at(arrive - 3.0);
        assert!(mid.moving && mid.t < -1.8);
    }

    #[test]
    fn negative_delay_means_the_walk_is_underway_at_start() {
        let ped = ScriptedPed {
            start_s: 0.0,
            start_t: -6.0,
            speed: 1.0,
            direction: 1.0,
            stop_t: None,
            start_delay: -2.0,
        };
        let s0 = ped.state_at(0.0);
        assert_abs_diff_eq!(s0.t, -4.0, epsilon = 1e-12);
        assert!(s0.moving);
    }

    #[test]
    fn standing_walker_keeps_its_facing() {
        let ped = ScriptedPed {
            start_s: 0.0,
            start_t: 6.9,
            speed: 2.0,
            direction: -1.0,
            stop_t: None,
            start_delay: 1.0,
        };
        let s0 = ped.state_at(0.5);
        assert_eq!(s0.speed, 0.0);
        assert_abs_diff_eq!(s0.heading, -core::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        assert!(!s0.moving);
    }

    #[test]
    fn obstruction_sits_outside_the_planning_corridor() {
        let ob = standard_obstruction();
        // Corridor half-width for the default model: |t| <= 1.0 + 0.9.
        assert!(ob.t_max <= -1.9);
        assert!(ob.s_max < 0.0);
    }
}
