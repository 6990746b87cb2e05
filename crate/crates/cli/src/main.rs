//! `pedplan` — scenario harness for the pedestrian collision-avoidance stack.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pedplan_cli::config::{parse_variant, HarnessConfig, ALL_VARIANTS, KMH};
use pedplan_cli::qcache::QCache;
use pedplan_cli::slice::{braking_onset, export_policy_slice, slice_csv};
use pedplan_cli::suite::{
    baked_obstruction, plan_suite, prepare_assets, run_planned_episode, run_suite,
    write_variant_outputs, EpisodePlan,
};
use pedplan_cli::sweep::{print_selections, run_sweep, sweep_csv, SweepSpec};
use pedplan_cli::{output, sweep};
use pedplan_core::model::OcclusionGeometry;
use pedplan_core::sim::ScenarioKind;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "pedplan",
    version,
    about = "Occlusion-aware pedestrian collision avoidance: planner, emergency braking, \
             and a deterministic scenario harness"
)]
struct Cli {
    /// JSON configuration file; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory holding cached value tables.
    #[arg(long, global = true, value_name = "DIR", default_value = "qcache")]
    cache_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and cache the value tables the configured suite needs.
    Solve {
        /// Variant to solve for; repeatable (default: pomdp and pomdp-aeb).
        #[arg(long = "variant", value_name = "NAME")]
        variants: Vec<String>,
    },

    /// Run one episode and write its per-tick CSV.
    Run {
        /// Scenario family label (e.g. cpan-75, cpcn, fp-near).
        #[arg(long, value_name = "LABEL")]
        scenario: String,

        /// System variant: aeb-only, pomdp, or pomdp-aeb.
        #[arg(long, value_name = "NAME")]
        variant: String,

        /// Sensor-noise RNG seed (default: the configured base seed).
        #[arg(long, value_name = "N")]
        seed: Option<u64>,

        /// Impact-point fraction of the vehicle width, 0 to 0.5.
        #[arg(long, value_name = "F", default_value_t = 0.0)]
        fraction: f64,

        /// Ego approach speed in km/h (default: the configured suite speed).
        #[arg(long, value_name = "KMH")]
        ego_speed: Option<f64>,

        /// Pedestrian walking speed in km/h (default: the family's standard speed).
        #[arg(long, value_name = "KMH")]
        ped_speed: Option<f64>,

        /// Destination for the per-tick CSV.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,

        /// Fail instead of solving when the value table is not cached.
        #[arg(long)]
        no_solve: bool,
    },

    /// Run the full scenario suite and write per-episode and summary CSVs.
    Suite {
        /// Variant to run; repeatable (default: all three).
        #[arg(long = "variant", value_name = "NAME")]
        variants: Vec<String>,

        /// Output directory; one subdirectory per variant.
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,

        /// Ego approach speed in km/h (default: the configured suite speed).
        #[arg(long, value_name = "KMH")]
        ego_speed: Option<f64>,

        /// Fail instead of solving when a value table is not cached.
        #[arg(long)]
        no_solve: bool,
    },

    /// Evaluate the suite over a grid of reward parameters.
    Sweep {
        /// JSON sweep description: parameter grids plus variants.
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,

        /// Destination CSV with one row per (variant, grid point).
        #[arg(long, value_name = "FILE")]
        out: PathBuf,

        /// Ego approach speed in km/h (default: the configured suite speed).
        #[arg(long, value_name = "KMH")]
        ego_speed: Option<f64>,
    },

    /// Export the argmax longitudinal action over the pedestrian grid.
    Slice {
        /// Ego speed in km/h.
        #[arg(long, value_name = "KMH")]
        ego_speed: f64,

        /// Pedestrian speed in km/h.
        #[arg(long, value_name = "KMH")]
        ped_speed: f64,

        /// Pedestrian heading in degrees (0 = along the lane, +90 = crossing
        /// towards positive t).
        #[arg(long, value_name = "DEG")]
        ped_heading: f64,

        /// Variant whose value table to slice (default: pomdp).
        #[arg(long, value_name = "NAME", default_value = "pomdp")]
        variant: String,

        /// Slice the table solved with the baked obstruction instead of the
        /// open road.
        #[arg(long)]
        occluded: bool,

        /// Destination CSV.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<HarnessConfig> {
    match &cli.config {
        Some(path) => HarnessConfig::load(path),
        None => {
            let cfg = HarnessConfig::default();
            cfg.validate()?;
            Ok(cfg)
        }
    }
}

fn resolve_variants(labels: &[String], default: &[pedplan_core::sim::PlannerMode]) -> Result<Vec<pedplan_core::sim::PlannerMode>> {
    if labels.is_empty() {
        return Ok(default.to_vec());
    }
    labels.iter().map(|l| parse_variant(l)).collect()
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;
    let cache = QCache::new(&cli.cache_dir)?;
    match &cli.command {
        Command::Solve { variants } => {
            let modes = resolve_variants(
                variants,
                &[pedplan_core::sim::PlannerMode::Pomdp, pedplan_core::sim::PlannerMode::PomdpAeb],
            )?;
            let plans = plan_suite(&cfg)?;
            for mode in modes {
                if !mode.has_planner() {
                    log::info!("{} uses no planner; nothing to solve", mode.label());
                    continue;
                }
                prepare_assets(&cfg, &cache, mode, &plans, true)?;
            }
            println!("value tables ready in {}", cli.cache_dir.display());
        }
        Command::Run {
            scenario,
            variant,
            seed,
            fraction,
            ego_speed,
            ped_speed,
            out,
            no_solve,
        } => {
            let kind = ScenarioKind::from_label(scenario).with_context(|| {
                let known: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.label()).collect();
                format!("unknown scenario {scenario:?}; known: {}", known.join(", "))
            })?;
            if !(0.0..=0.5).contains(fraction) {
                bail!("--fraction must lie in [0, 0.5]");
            }
            let mode = parse_variant(variant)?;
            let plan = EpisodePlan {
                kind,
                fraction: *fraction,
                seed: seed.unwrap_or(cfg.sensor.rng_seed),
            };
            let assets = prepare_assets(&cfg, &cache, mode, std::slice::from_ref(&plan), !no_solve)?;
            let ego = ego_speed.unwrap_or(cfg.suite.ego_speed_kmh);
            let log = run_planned_episode(&cfg, mode, plan, &assets, ego, *ped_speed)?;
            output::write_file(out, &output::episode_csv(&log))?;
            println!("{}", output::EPISODE_TABLE_HEADER);
            println!("{}", output::episode_row(&log, mode.label(), plan.seed));
            println!("wrote {} ticks to {}", log.ticks.len(), out.display());
        }
        Command::Suite { variants, out_dir, ego_speed, no_solve } => {
            let modes = resolve_variants(variants, &ALL_VARIANTS)?;
            let mut summaries = Vec::new();
            let mut summary_csv = String::from(output::SUMMARY_HEADER);
            summary_csv.push('\n');
            for mode in modes {
                let result = run_suite(&cfg, &cache, mode, *ego_speed, !no_solve)?;
                log::info!(
                    "{}: {} episodes in {:.1} s",
                    mode.label(),
                    result.logs.len(),
                    result.elapsed.as_secs_f64()
                );
                write_variant_outputs(out_dir, &result)?;
                summary_csv.push_str(&output::summary_row(mode.label(), &result.summary));
                summary_csv.push('\n');
                summaries.push((mode.label().to_string(), result.summary));
            }
            output::write_file(&out_dir.join("summary.csv"), &summary_csv)?;
            output::print_summaries(&summaries);
            println!("episode and tick CSVs written under {}", out_dir.display());
        }
        Command::Sweep { spec, out, ego_speed } => {
            let spec = SweepSpec::load(spec)?;
            let report = run_sweep(&cfg, &cache, &spec, *ego_speed)?;
            output::write_file(out, &sweep_csv(&report))?;
            println!("{}", sweep::SWEEP_HEADER.replace(',', "  "));
            print_selections(&report);
            println!("sweep rows written to {}", out.display());
        }
        Command::Slice { ego_speed, ped_speed, ped_heading, variant, occluded, out } => {
            let mode = parse_variant(variant)?;
            if !mode.has_planner() {
                bail!("{} has no planner to slice; pick pomdp or pomdp-aeb", mode.label());
            }
            let geometry = if *occluded {
                baked_obstruction(&cfg)
            } else {
                OcclusionGeometry::default()
            };
            let model_cfg = cfg.model_config(&cfg.overrides_for(mode), geometry);
            let solved = cache.ensure(&model_cfg, cfg.solver_settings(), true, mode.label())?;
            if !solved.converged {
                bail!("value table did not converge; raise solver.max_iterations");
            }
            let slice = export_policy_slice(
                &solved.model,
                &solved.q,
                ego_speed * KMH,
                ped_speed * KMH,
                ped_heading.to_radians(),
            )?;
            output::write_file(out, &slice_csv(&slice))?;
            match braking_onset(&slice) {
                Some(s) => println!(
                    "braking onset: s = {s:.3} m (ego {:.2} m/s, pedestrian {:.2} m/s @ {:.1} deg)",
                    slice.ego_speed,
                    slice.ped_speed,
                    slice.ped_heading.to_degrees()
                ),
                None => println!("the slice never commands braking"),
            }
            println!("policy slice written to {}", out.display());
        }
    }
    Ok(())
}
