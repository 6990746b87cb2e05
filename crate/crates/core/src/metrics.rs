//! Episode and suite metrics.
//!
//! Suite aggregation is permutation-invariant bit for bit: per-episode
//! partial sums are computed in tick order (a property of the episode, not
//! of iteration), then combined in a canonical order keyed by episode name,
//! so shuffling the input changes nothing.

use crate::sim::EpisodeLog;
use alloc::string::String;
use alloc::vec::Vec;

/// Metrics of a single episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    /// Mean ego speed over every tick (km/h).
    pub mean_speed_kmh: f64,
    /// Mean applied longitudinal acceleration over ticks with negative
    /// applied acceleration (m/s², ≤ 0; 0 when the episode never brakes).
    pub mean_braking: f64,
    /// Impact speed (km/h, 0 without a collision).
    pub impact_speed_kmh: f64,
    pub collided: bool,
    /// Distinct emergency-braking events.
    pub eb_events: u32,
    pub tick_count: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Partial {
    speed_sum: f64,
    ticks: usize,
    brake_sum: f64,
    brake_ticks: usize,
    impact_sum: f64,
    collisions: u32,
    eb_events: u32,
}

fn partial_of(log: &EpisodeLog) -> Partial {
    let mut p = Partial::default();
    for t in &log.ticks {
        p.speed_sum += t.ego_speed;
        p.ticks += 1;
        if t.applied_lon < 0.0 {
            p.brake_sum += t.applied_lon;
            p.brake_ticks += 1;
        }
    }
    if log.collision {
        p.collisions = 1;
        p.impact_sum = log.impact_speed;
    }
    p.eb_events = log.eb_activations;
    p
}

/// Metrics of one episode.
pub fn episode_metrics(log: &EpisodeLog) -> EpisodeMetrics {
    let p = partial_of(log);
    EpisodeMetrics {
        mean_speed_kmh: if p.ticks > 0 { p.speed_sum / p.ticks as f64 * 3.6 } else { 0.0 },
        mean_braking: if p.brake_ticks > 0 { p.brake_sum / p.brake_ticks as f64 } else { 0.0 },
        impact_speed_kmh: p.impact_sum * 3.6,
        collided: log.collision,
        eb_events: log.eb_activations,
        tick_count: p.ticks,
    }
}

/// Aggregate metrics over a set of episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub episodes: usize,
    pub collisions: u32,
    /// Mean ego speed pooled over every tick of every episode (km/h).
    pub mean_speed_kmh: f64,
    /// Mean applied acceleration pooled over braking ticks (m/s², ≤ 0).
    pub mean_braking: f64,
    /// Mean impact speed over colliding episodes (km/h, 0 if none).
    pub mean_impact_speed_kmh: f64,
    /// Total emergency-braking events.
    pub eb_events: u32,
}

/// Summarize a suite. The result does not depend on the order of `logs`.
pub fn summarize(logs: &[EpisodeLog]) -> SuiteSummary {
    let mut parts: Vec<(&String, Partial)> =
        logs.iter().map(|l| (&l.scenario_name, partial_of(l))).collect();
    parts.sort_by(|a, b| a.0.cmp(b.0));
    let mut total = Partial::default();
    for (_, p) in &parts {
        total.speed_sum += p.speed_sum;
        total.ticks += p.ticks;
        total.brake_sum += p.brake_sum;
        total.brake_ticks += p.brake_ticks;
        total.impact_sum += p.impact_sum;
        total.collisions += p.collisions;
        total.eb_events += p.eb_events;
    }
    SuiteSummary {
        episodes: logs.len(),
        collisions: total.collisions,
        mean_speed_kmh: if total.ticks > 0 {
            total.speed_sum / total.ticks as f64 * 3.6
        } else {
            0.0
        },
        mean_braking: if total.brake_ticks > 0 {
            total.brake_sum / total.brake_ticks as f64
        } else {
            0.0
        },
        mean_impact_speed_kmh: if total.collisions > 0 {
            total.impact_sum / total.collisions as f64 * 3.6
        } else {
            0.0
        },
        eb_events: total.eb_events,
    }
}

/// Convenience for tests: a minimal synthetic episode.
#[cfg(test)]
fn synthetic(name: &str, speeds: &[f64], brakes: &[f64], collision: Option<f64>, eb: u32) -> EpisodeLog {
    use crate::sim::TickRecord;
    use alloc::string::ToString;
    let ticks: Vec<TickRecord> = speeds
        .iter()
        .zip(brakes)
        .enumerate()
        .map(|(i, (&v, &a))| TickRecord {
            time: i as f64 * 0.05,
            ego_center: 0.0,
            ego_speed: v,
            ego_lateral: 0.0,
            commanded_lon: a,
            applied_lon: a,
            applied_lat: 0.0,
            source: crate::sim::CommandSource::Cruise,
            ped_true: None,
            tracked: None,
            detected: false,
            collision_prob: 0.0,
            aeb_risk: 0.0,
            aeb_latched: false,
            belief_present: 0.0,
            collision: false,
        })
        .collect();
    EpisodeLog {
        scenario_name: name.to_string(),
        ticks,
        collision: collision.is_some(),
        impact_speed: collision.unwrap_or(0.0),
        eb_activations: eb,
        outcome: crate::sim::Outcome::Completed,
        duration: speeds.len() as f64 * 0.05,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn episode_metrics_pool_correctly() {
        let log = synthetic("a", &[10.0, 10.0, 5.0, 0.0], &[0.0, -2.0, -4.0, 0.0], Some(2.0), 1);
        let m = episode_metrics(&log);
        assert_abs_diff_eq!(m.mean_speed_kmh, 25.0 / 4.0 * 3.6, epsilon = 1e-12);
        assert_abs_diff_eq!(m.mean_braking, -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.impact_speed_kmh, 7.2, epsilon = 1e-12);
        assert!(m.collided);
        assert_eq!(m.eb_events, 1);
    }

    #[test]
    fn no_braking_reports_zero() {
        let log = synthetic("a", &[10.0, 10.0], &[0.0, 1.0], None, 0);
        let m = episode_metrics(&log);
        assert_eq!(m.mean_braking, 0.0);
        assert_eq!(m.impact_speed_kmh, 0.0);
    }

    #[test]
    fn suite_summary_is_permutation_invariant() {
        let a = synthetic("cross-far", &[14.0, 13.0, 11.0], &[0.0, -4.0, -4.0], None, 1);
        let b = synthetic("cross-near", &[13.0, 9.0], &[-1.0, -2.0], Some(1.5), 0);
        let c = synthetic("empty", &[14.0, 14.0, 14.0, 14.0], &[0.0; 4], None, 0);
        let fwd = summarize(&[a.clone(), b.clone(), c.clone()]);
        let rev = summarize(&[c, a, b.clone()]);
        assert_eq!(fwd, rev);
        assert_eq!(fwd.collisions, 1);
        assert_eq!(fwd.eb_events, 1);
        assert_abs_diff_eq!(fwd.mean_impact_speed_kmh, 5.4, epsilon = 1e-12);
        // Pooled over all 9 ticks.
        let expect = (14.0 + 13.0 + 11.0 + 13.0 + 9.0 + 14.0 * 4.0) / 9.0 * 3.6;
        assert_abs_diff_eq!(fwd.mean_speed_kmh, expect, epsilon = 1e-12);
        // Pooled over the 5 braking ticks.
        assert_abs_diff_eq!(fwd.mean_braking, (-4.0 - 4.0 - 1.0 - 2.0) / 4.0, epsilon = 1e-12);
    }
}
