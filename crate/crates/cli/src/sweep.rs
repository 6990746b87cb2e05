//! Reward-parameter sweeps: a Cartesian grid over the velocity weight, the
//! longitudinal action penalty, and the appearance probability, each point
//! solved (through the cache) and evaluated on the full configured suite.
//!
//! The selection rule mirrors the tuning procedure the planner stack is
//! tuned with: among points with zero collisions, pick the one with the
//! highest mean velocity; report "none feasible" when every point collides.

use crate::config::{parse_variant, HarnessConfig, VariantOverrides};
use crate::qcache::QCache;
use crate::suite::{plan_suite, prepare_assets, run_planned_episode};
use anyhow::{bail, Context, Result};
use pedplan_core::metrics::{summarize, SuiteSummary};
use pedplan_core::sim::PlannerMode;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Sweep description, loaded from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub velocity_weight: Vec<f64>,
    pub longitudinal_action_penalty: Vec<f64>,
    pub p_appear: Vec<f64>,
    /// System variants to evaluate, by label.
    pub variants: Vec<String>,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<SweepSpec> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading sweep spec {}", path.display()))?;
        let spec: SweepSpec = serde_json::from_str(&text)
            .with_context(|| format!("parsing sweep spec {}", path.display()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.velocity_weight.is_empty()
            || self.longitudinal_action_penalty.is_empty()
            || self.p_appear.is_empty()
        {
            bail!("sweep grids must be non-empty");
        }
        if self.variants.is_empty() {
            bail!("sweep needs at least one variant");
        }
        for v in &self.variants {
            parse_variant(v)?;
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &velocity_weight in &self.velocity_weight {
            for &longitudinal_action_penalty in &self.longitudinal_action_penalty {
                for &p_appear in &self.p_appear {
                    out.push(SweepPoint {
                        velocity_weight,
                        longitudinal_action_penalty,
                        p_appear,
                    });
                }
            }
        }
        out
    }
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub velocity_weight: f64,
    pub longitudinal_action_penalty: f64,
    pub p_appear: f64,
}

impl SweepPoint {
    fn overrides(&self) -> VariantOverrides {
        VariantOverrides {
            p_appear: Some(self.p_appear),
            velocity_weight: Some(self.velocity_weight),
            longitudinal_action_penalty: Some(self.longitudinal_action_penalty),
        }
    }
}

/// Result of one (point, variant) evaluation. A point whose solve did not
/// converge is flagged and carries no metrics.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub variant: PlannerMode,
    pub converged: bool,
    pub summary: Option<SuiteSummary>,
}

/// Per-variant winner under the zero-collision / max-mean-velocity rule.
#[derive(Debug, Clone)]
pub struct Selection {
    pub variant: PlannerMode,
    pub best: Option<SweepRow>,
}

pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub selections: Vec<Selection>,
}

/// Evaluate one point for one variant: solve through the cache, then run
/// the full configured suite.
fn evaluate_point(
    cfg: &HarnessConfig,
    cache: &QCache,
    mode: PlannerMode,
    point: SweepPoint,
    ego_speed_kmh: Option<f64>,
) -> Result<SweepRow> {
    // The sweep pins the three knobs directly, replacing any per-variant
    // overrides from the base configuration.
    let mut cfg = cfg.clone();
    match mode {
        PlannerMode::Pomdp => cfg.variants.pomdp = point.overrides(),
        PlannerMode::PomdpAeb => cfg.variants.pomdp_aeb = point.overrides(),
        PlannerMode::AebOnly => {}
    }
    let plans = plan_suite(&cfg)?;
    let ego = ego_speed_kmh.unwrap_or(cfg.suite.ego_speed_kmh);
    let assets = match prepare_assets(&cfg, cache, mode, &plans, true) {
        Ok(a) => a,
        Err(e) => {
            // A non-converged solve flags the point instead of failing the
            // whole sweep.
            if format!("{e}").contains("did not converge") {
                log::warn!("sweep point {point:?} [{}]: {e}", mode.label());
                return Ok(SweepRow { point, variant: mode, converged: false, summary: None });
            }
            return Err(e);
        }
    };
    let logs = plans
        .par_iter()
        .map(|plan| run_planned_episode(&cfg, mode, *plan, &assets, ego, None))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepRow { point, variant: mode, converged: true, summary: Some(summarize(&logs)) })
}

/// Run the whole sweep.
pub fn run_sweep(
    cfg: &HarnessConfig,
    cache: &QCache,
    spec: &SweepSpec,
    ego_speed_kmh: Option<f64>,
) -> Result<SweepReport> {
    spec.validate()?;
    let mut rows = Vec::new();
    for label in &spec.variants {
        let mode = parse_variant(label)?;
        for point in spec.points() {
            rows.push(evaluate_point(cfg, cache, mode, point, ego_speed_kmh)?);
        }
    }
    let mut selections = Vec::new();
    for label in &spec.variants {
        let mode = parse_variant(label)?;
        let best = rows
            .iter()
            .filter(|r| r.variant == mode && r.converged)
            .filter(|r| r.summary.as_ref().is_some_and(|s| s.collisions == 0))
            .max_by(|a, b| {
                let va = a.summary.as_ref().expect("filtered").mean_speed_kmh;
                let vb = b.summary.as_ref().expect("filtered").mean_speed_kmh;
                va.total_cmp(&vb)
            })
            .cloned();
        selections.push(Selection { variant: mode, best });
    }
    Ok(SweepReport { rows, selections })
}

pub const SWEEP_HEADER: &str = "variant,velocity_weight,longitudinal_action_penalty,p_appear,\
converged,episodes,collisions,eb_events,mean_speed_kmh,mean_braking,mean_impact_kmh";

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in &report.rows {
        let p = row.point;
        match &row.summary {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},1,{},{},{},{},{},{}",
                    row.variant.label(),
                    p.velocity_weight,
                    p.longitudinal_action_penalty,
                    p.p_appear,
                    s.episodes,
                    s.collisions,
                    s.eb_events,
                    s.mean_speed_kmh,
                    s.mean_braking,
                    s.mean_impact_speed_kmh,
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},0,,,,,,",
                    row.variant.label(),
                    p.velocity_weight,
                    p.longitudinal_action_penalty,
                    p.p_appear,
                );
            }
        }
    }
    out
}

/// Human-readable selection summary.
pub fn print_selections(report: &SweepReport) {
    for sel in &report.selections {
        match &sel.best {
            Some(row) => {
                let s = row.summary.as_ref().expect("selected rows have metrics");
                println!(
                    "{}: selected velocity_weight={} longitudinal_action_penalty={} p_appear={} \
                     (mean speed {:.2} km/h, 0 collisions)",
                    sel.variant.label(),
                    row.point.velocity_weight,
                    row.point.longitudinal_action_penalty,
                    row.point.p_appear,
                    s.mean_speed_kmh
                );
            }
            None => println!(
                "{}: none feasible (no zero-collision point in the grid)",
                sel.variant.label()
            ),
        }
    }
}
