//! Suite planning and execution: enumerate the configured scenario grid,
//! prepare the per-geometry planner assets, run every episode (in parallel,
//! with a deterministic ordered reduction), and aggregate metrics.

use crate::config::{HarnessConfig, KMH};
use crate::output;
use crate::qcache::{QCache, Solved};
use anyhow::{bail, Context, Result};
use pedplan_core::metrics::{summarize, SuiteSummary};
use pedplan_core::sim::{
    build_scenario_custom, obstacles_in_window, run_episode, standard_obstruction,
    EpisodeLog, PlannerBundle, PlannerMode, ScenarioKind,
};
use pedplan_core::model::OcclusionGeometry;
use rayon::prelude::*;
use std::path::Path;
use std::time::{Duration, Instant};

/// One planned episode: a scenario family at an impact fraction with its
/// deterministic seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodePlan {
    pub kind: ScenarioKind,
    pub fraction: f64,
    pub seed: u64,
}

/// Expand the configured suite: collision-course families sweep the impact
/// fractions, benign families run once each. Seeds are the configured base
/// seed plus the episode's position in this canonical order.
pub fn plan_suite(cfg: &HarnessConfig) -> Result<Vec<EpisodePlan>> {
    let kinds = cfg.suite_kinds();
    let mut plans = Vec::new();
    let mut index = 0u64;
    for kind in kinds {
        if kind.is_collision_course() {
            for &fraction in &cfg.suite.impact_fractions {
                plans.push(EpisodePlan {
                    kind,
                    fraction,
                    seed: cfg.sensor.rng_seed.wrapping_add(index),
                });
                index += 1;
            }
        } else {
            plans.push(EpisodePlan {
                kind,
                fraction: 0.0,
                seed: cfg.sensor.rng_seed.wrapping_add(index),
            });
            index += 1;
        }
    }
    if plans.is_empty() {
        bail!("the configured suite is empty: no scenario kinds or impact fractions selected");
    }
    Ok(plans)
}

fn kind_has_obstruction(kind: ScenarioKind) -> bool {
    matches!(kind, ScenarioKind::Cpcn | ScenarioKind::CpcnEmpty)
}

/// Planner model + table per occlusion geometry. Braking-only runs carry
/// neither.
pub struct PlannerAssets {
    pub open: Option<Solved>,
    pub obstructed: Option<Solved>,
}

impl PlannerAssets {
    pub fn none() -> Self {
        PlannerAssets { open: None, obstructed: None }
    }

    fn for_kind(&self, kind: ScenarioKind) -> Option<&Solved> {
        if kind_has_obstruction(kind) {
            self.obstructed.as_ref()
        } else {
            self.open.as_ref()
        }
    }
}

/// Obstruction geometry translated into the planner window at the
/// configured bake pose (ego front `bake` metres before the crossing line).
pub fn baked_obstruction(cfg: &HarnessConfig) -> OcclusionGeometry {
    let center = -cfg.suite.occlusion_bake_distance - cfg.vehicle.shape().half_length();
    obstacles_in_window(&[standard_obstruction()], center)
}

/// Solve (or load) the value tables a variant needs for the planned kinds.
/// Non-converged tables are refused here: episodes never run on them.
pub fn prepare_assets(
    cfg: &HarnessConfig,
    cache: &QCache,
    mode: PlannerMode,
    plans: &[EpisodePlan],
    allow_solve: bool,
) -> Result<PlannerAssets> {
    if !mode.has_planner() {
        return Ok(PlannerAssets::none());
    }
    let overrides = cfg.overrides_for(mode);
    let solver = cfg.solver_settings();
    let mut assets = PlannerAssets::none();
    let ensure = |geometry: OcclusionGeometry, tag: &str| -> Result<Solved> {
        let model_cfg = cfg.model_config(&overrides, geometry);
        let solved = cache.ensure(
            &model_cfg,
            solver,
            allow_solve,
            &format!("{} {tag}", mode.label()),
        )?;
        if !solved.converged {
            bail!(
                "value table for {} {tag} did not converge (residual {:.3e} > {:.1e}); \
                 raise solver.max_iterations or loosen solver.tolerance",
                mode.label(),
                solved.q.residual,
                solver.tolerance
            );
        }
        Ok(solved)
    };
    if plans.iter().any(|p| !kind_has_obstruction(p.kind)) {
        assets.open = Some(ensure(OcclusionGeometry::default(), "open")?);
    }
    if plans.iter().any(|p| kind_has_obstruction(p.kind)) {
        assets.obstructed = Some(ensure(baked_obstruction(cfg), "obstructed")?);
    }
    Ok(assets)
}

/// Run one planned episode for a variant.
pub fn run_planned_episode(
    cfg: &HarnessConfig,
    mode: PlannerMode,
    plan: EpisodePlan,
    assets: &PlannerAssets,
    ego_speed_kmh: f64,
    ped_speed_kmh: Option<f64>,
) -> Result<EpisodeLog> {
    let vehicle = cfg.vehicle.shape();
    let spec =
        build_scenario_custom(plan.kind, &vehicle, ego_speed_kmh, plan.fraction, ped_speed_kmh);
    let sim = cfg.sim_config(plan.seed)?;
    let bundle = assets
        .for_kind(plan.kind)
        .map(|s| PlannerBundle { model: &s.model, q: &s.q });
    run_episode(&spec, mode, &sim, &cfg.aeb_config(), bundle)
        .with_context(|| format!("episode {} [{}]", spec.name, mode.label()))
}

/// A full suite run for one variant.
pub struct VariantResult {
    pub variant: PlannerMode,
    pub plans: Vec<EpisodePlan>,
    pub logs: Vec<EpisodeLog>,
    pub summary: SuiteSummary,
    pub elapsed: Duration,
}

/// Execute the configured suite for one variant. Episodes run in a parallel
/// pool; the reduction is an ordered collect followed by name-keyed
/// aggregation, so results are independent of scheduling.
pub fn run_suite(
    cfg: &HarnessConfig,
    cache: &QCache,
    mode: PlannerMode,
    ego_speed_kmh: Option<f64>,
    allow_solve: bool,
) -> Result<VariantResult> {
    let ego = ego_speed_kmh.unwrap_or(cfg.suite.ego_speed_kmh);
    let plans = plan_suite(cfg)?;
    let assets = prepare_assets(cfg, cache, mode, &plans, allow_solve)?;
    let started = Instant::now();
    let logs: Vec<EpisodeLog> = plans
        .par_iter()
        .map(|plan| run_planned_episode(cfg, mode, *plan, &assets, ego, None))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&logs);
    Ok(VariantResult {
        variant: mode,
        plans,
        logs,
        summary,
        elapsed: started.elapsed(),
    })
}

/// Write one variant's artifacts: the per-episode table and one per-tick
/// CSV per episode.
pub fn write_variant_outputs(out_dir: &Path, result: &VariantResult) -> Result<()> {
    let variant_dir = out_dir.join(result.variant.label());
    let mut table = String::from(output::EPISODE_TABLE_HEADER);
    table.push('\n');
    for (plan, log) in result.plans.iter().zip(&result.logs) {
        table.push_str(&output::episode_row(log, result.variant.label(), plan.seed));
        table.push('\n');
        let tick_path = variant_dir.join("ticks").join(format!("{}.csv", log.scenario_name));
        output::write_file(&tick_path, &output::episode_csv(log))?;
    }
    output::write_file(&variant_dir.join("episodes.csv"), &table)?;
    Ok(())
}

/// Ego-speed display used in mean-speed sanity messages (km/h).
pub fn mean_speed_kmh(logs: &[EpisodeLog]) -> f64 {
    summarize(logs).mean_speed_kmh
}

/// Convenience: km/h → m/s for callers working in SI.
pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh * KMH
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_enumerates_23_episodes() {
        let cfg = HarnessConfig::default();
        let plans = plan_suite(&cfg).unwrap();
        // 4 collision-course families x 5 fractions + 3 benign families.
        assert_eq!(plans.len(), 23);
        let collision_course = plans.iter().filter(|p| p.kind.is_collision_course()).count();
        assert_eq!(collision_course, 20);
        // Seeds are distinct and stable.
        let mut seeds: Vec<u64> = plans.iter().map(|p| p.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 23);
        assert_eq!(plans[0].seed, cfg.sensor.rng_seed);
    }

    #[test]
    fn empty_composition_is_a_usage_error() {
        let mut cfg = HarnessConfig::default();
        cfg.suite.kinds.clear();
        assert!(plan_suite(&cfg).is_err());

        let mut cfg = HarnessConfig::default();
        cfg.suite.kinds = vec!["cpaf".into()];
        cfg.suite.impact_fractions.clear();
        assert!(plan_suite(&cfg).is_err());
    }

    #[test]
    fn baked_obstruction_lands_ahead_of_the_bake_pose() {
        let cfg = HarnessConfig::default();
        let geo = baked_obstruction(&cfg);
        assert_eq!(geo.obstacles.len(), 1);
        let o = &geo.obstacles[0];
        // World [-8, -2] seen from center -(20 + 2.25): s in [14.25, 20.25].
        assert!((o.s_min - 14.25).abs() < 1e-12);
        assert!((o.s_max - 20.25).abs() < 1e-12);
        assert!((o.t_min - -4.25).abs() < 1e-12);
        assert!((o.t_max - -2.25).abs() < 1e-12);
    }

    #[test]
    fn braking_only_suite_runs_without_assets() {
        let mut cfg = HarnessConfig::default();
        // One quick family keeps this a unit-sized test.
        cfg.suite.kinds = vec!["fp-stop-short".into(), "cpcn-empty".into()];
        let cache = QCache::new(tempfile::tempdir().unwrap().path()).unwrap();
        let result = run_suite(&cfg, &cache, PlannerMode::AebOnly, None, true).unwrap();
        assert_eq!(result.logs.len(), 2);
        assert_eq!(result.summary.collisions, 0);
        assert_eq!(result.summary.eb_events, 0);
    }
}
