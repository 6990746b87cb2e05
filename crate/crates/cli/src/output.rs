//! CSV serialization and stdout pretty-printing.
//!
//! Per-tick episode logs use a fixed, documented column order:
//!
//! `time,ego_s,ego_t,ego_v,a_cmd,a_applied,ped_s,ped_t,ped_v,`
//! `ped_s_tracked,ped_t_tracked,ped_v_tracked,p_c,risk,brake,collision,belief_present`
//!
//! where `ego_s` is the vehicle-center road coordinate, true and tracked
//! pedestrian fields are empty when nothing exists or nothing is tracked,
//! flags are 0/1, and `belief_present` is the planner's probability that a
//! walker exists (0 without a planner). Floats print in shortest
//! round-trip form, so identical runs produce identical bytes.

use anyhow::{Context, Result};
use pedplan_core::metrics::{episode_metrics, SuiteSummary};
use pedplan_core::sim::EpisodeLog;
use std::fmt::Write as _;
use std::path::Path;

pub const TICK_HEADER: &str = "time,ego_s,ego_t,ego_v,a_cmd,a_applied,ped_s,ped_t,ped_v,\
ped_s_tracked,ped_t_tracked,ped_v_tracked,p_c,risk,brake,collision,belief_present";

fn opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Render one episode's per-tick log.
pub fn episode_csv(log: &EpisodeLog) -> String {
    let mut out = String::with_capacity(64 + log.ticks.len() * 96);
    out.push_str(TICK_HEADER);
    out.push('\n');
    for t in &log.ticks {
        let tracked_speed = t
            .tracked
            .map(|tr| (tr.speed_s * tr.speed_s + tr.speed_t * tr.speed_t).sqrt());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.time,
            t.ego_center,
            t.ego_lateral,
            t.ego_speed,
            t.commanded_lon,
            t.applied_lon,
            opt(t.ped_true.map(|p| p.s)),
            opt(t.ped_true.map(|p| p.t)),
            opt(t.ped_true.map(|p| p.speed)),
            opt(t.tracked.map(|tr| tr.s)),
            opt(t.tracked.map(|tr| tr.t)),
            opt(tracked_speed),
            t.collision_prob,
            t.aeb_risk,
            flag(t.aeb_latched),
            flag(t.collision),
            t.belief_present,
        );
    }
    out
}

pub fn outcome_label(log: &EpisodeLog) -> &'static str {
    use pedplan_core::sim::Outcome;
    match log.outcome {
        Outcome::Completed => "completed",
        Outcome::Collision => "collision",
        Outcome::Stopped => "stopped",
        Outcome::TimedOut => "timed-out",
    }
}

pub const EPISODE_TABLE_HEADER: &str = "episode,variant,seed,ticks,duration_s,outcome,\
collision,impact_kmh,eb_events,mean_speed_kmh,mean_braking";

/// One row of the per-episode results table.
pub fn episode_row(log: &EpisodeLog, variant: &str, seed: u64) -> String {
    let m = episode_metrics(log);
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        log.scenario_name,
        variant,
        seed,
        m.tick_count,
        log.duration,
        outcome_label(log),
        flag(log.collision),
        m.impact_speed_kmh,
        m.eb_events,
        m.mean_speed_kmh,
        m.mean_braking,
    )
}

pub const SUMMARY_HEADER: &str =
    "variant,episodes,collisions,eb_events,mean_speed_kmh,mean_braking,mean_impact_kmh";

pub fn summary_row(variant: &str, s: &SuiteSummary) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        variant,
        s.episodes,
        s.collisions,
        s.eb_events,
        s.mean_speed_kmh,
        s.mean_braking,
        s.mean_impact_speed_kmh,
    )
}

/// Aligned stdout table for one or more suite summaries.
pub fn print_summaries(rows: &[(String, SuiteSummary)]) {
    println!(
        "{:<10} {:>9} {:>11} {:>10} {:>12} {:>13} {:>15}",
        "variant", "episodes", "collisions", "eb-events", "v-mean-kmh", "a-brake-mean", "impact-mean-kmh"
    );
    for (variant, s) in rows {
        println!(
            "{:<10} {:>9} {:>11} {:>10} {:>12.2} {:>13.2} {:>15.2}",
            variant,
            s.episodes,
            s.collisions,
            s.eb_events,
            s.mean_speed_kmh,
            s.mean_braking,
            s.mean_impact_speed_kmh
        );
    }
}

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pedplan_core::sim::{
        build_scenario, run_episode, PlannerMode, ScenarioKind, SimConfig,
    };

    fn sample_log() -> EpisodeLog {
        let spec = build_scenario(
            ScenarioKind::Cpan75,
            &pedplan_core::model::VehicleShape::default(),
            50.0,
            0.5,
        );
        run_episode(
            &spec,
            PlannerMode::AebOnly,
            &SimConfig::default(),
            &pedplan_core::aeb::AebConfig::default(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn tick_csv_has_the_documented_shape() {
        let log = sample_log();
        let csv = episode_csv(&log);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), TICK_HEADER);
        let columns = TICK_HEADER.split(',').count();
        assert_eq!(columns, 17);
        for line in lines {
            assert_eq!(line.split(',').count(), columns, "bad row: {line}");
        }
        assert_eq!(csv.lines().count(), log.ticks.len() + 1);
    }

    #[test]
    fn identical_logs_serialize_identically() {
        let a = episode_csv(&sample_log());
        let b = episode_csv(&sample_log());
        assert_eq!(a, b);
    }
}
