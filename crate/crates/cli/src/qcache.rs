//! Disk cache for solved action-value tables, keyed by a content hash of
//! everything that influences the solve: discretization, action menus,
//! reward, appearance probability, pedestrian acceleration menu, planner
//! step, discount, vehicle footprint, occlusion geometry, and the solver
//! stopping rule. Measurement noise is deliberately excluded — it shapes
//! belief updates, never the value iteration.
//!
//! Files are written atomically (temp file + rename), so concurrent readers
//! only ever observe complete tables; concurrent writers race benignly to
//! produce identical bytes.

use anyhow::{bail, Context, Result};
use pedplan_core::model::{build_model, ModelConfig, PedestrianPomdp};
use pedplan_core::pomdp::{value_iterate_with, QValueTable, SolverSettings};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 8] = b"PEDQVT01";

fn push_f64(h: &mut Sha256, tag: &str, values: &[f64]) {
    h.update(tag.as_bytes());
    h.update([0u8]);
    h.update((values.len() as u64).to_le_bytes());
    for v in values {
        h.update(v.to_le_bytes());
    }
}

fn push_usize(h: &mut Sha256, tag: &str, value: usize) {
    h.update(tag.as_bytes());
    h.update([0u8]);
    h.update((value as u64).to_le_bytes());
}

/// Stable content key (16 hex chars) for a resolved model + solver setting.
pub fn cache_key(model: &ModelConfig, solver: &SolverSettings) -> String {
    let mut h = Sha256::new();
    h.update(MAGIC);
    let d = &model.discretization;
    for (tag, axis) in [
        ("ego_speed", &d.ego_speed),
        ("ego_lateral", &d.ego_lateral),
        ("ped_s", &d.ped_s),
        ("ped_t", &d.ped_t),
        ("ped_speed", &d.ped_speed),
        ("ped_heading", &d.ped_heading),
    ] {
        push_f64(&mut h, tag, &[axis.min, axis.max]);
        push_usize(&mut h, tag, axis.levels);
    }
    push_f64(&mut h, "act_lon", &model.actions.longitudinal);
    push_f64(&mut h, "act_lat", &model.actions.lateral);
    let r = &model.reward;
    push_f64(
        &mut h,
        "reward",
        &[
            r.collision_penalty,
            r.velocity_weight,
            r.lane_center_weight,
            r.longitudinal_action_penalty,
            r.lateral_action_penalty,
            r.desired_speed,
        ],
    );
    push_f64(&mut h, "p_appear", &[model.appearance.p_appear]);
    push_f64(&mut h, "ped_accel", &model.ped_accel_options);
    push_f64(&mut h, "planner_dt", &[model.planner_dt]);
    push_f64(&mut h, "discount", &[model.discount]);
    push_f64(&mut h, "vehicle", &[model.vehicle.length, model.vehicle.width]);
    push_usize(&mut h, "obstacles", model.occlusion.obstacles.len());
    for o in &model.occlusion.obstacles {
        push_f64(&mut h, "rect", &[o.s_min, o.s_max, o.t_min, o.t_max]);
    }
    push_f64(&mut h, "tolerance", &[solver.tolerance]);
    push_usize(&mut h, "max_iterations", solver.max_iterations);
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// A model with its solved table and the convergence verdict.
#[derive(Debug)]
pub struct Solved {
    pub model: PedestrianPomdp,
    pub q: QValueTable,
    pub converged: bool,
    pub from_cache: bool,
}

pub struct QCache {
    dir: PathBuf,
}

impl QCache {
    pub fn new(dir: &Path) -> Result<QCache> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating cache directory {}", dir.display()))?;
        Ok(QCache { dir: dir.to_path_buf() })
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.qtab"))
    }

    fn read(&self, key: &str) -> Result<Option<(QValueTable, f64)>> {
        let path = self.path_for(key);
        let mut file = match std::fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e).context(format!("opening {}", path.display())),
        };
        let mut header = [0u8; 8 + 8 + 8 + 8 + 8 + 8];
        file.read_exact(&mut header)
            .with_context(|| format!("reading header of {}", path.display()))?;
        if &header[..8] != MAGIC {
            bail!("{} is not a cached value table", path.display());
        }
        let word = |i: usize| {
            let mut b = [0u8; 8];
            b.copy_from_slice(&header[8 * i..8 * (i + 1)]);
            b
        };
        let state_count = u64::from_le_bytes(word(1)) as usize;
        let action_count = u64::from_le_bytes(word(2)) as usize;
        let iterations = u64::from_le_bytes(word(3)) as usize;
        let residual = f64::from_le_bytes(word(4));
        let tolerance = f64::from_le_bytes(word(5));
        let mut payload = Vec::new();
        file.read_to_end(&mut payload)
            .with_context(|| format!("reading {}", path.display()))?;
        let expected = state_count
            .checked_mul(action_count)
            .and_then(|n| n.checked_mul(8))
            .unwrap_or(usize::MAX);
        if payload.len() != expected {
            bail!("{} is truncated", path.display());
        }
        let values: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let q = QValueTable::from_raw(values, state_count, action_count, residual, iterations)
            .with_context(|| format!("assembling table from {}", path.display()))?;
        Ok(Some((q, tolerance)))
    }

    fn write(&self, key: &str, q: &QValueTable, tolerance: f64) -> Result<PathBuf> {
        let path = self.path_for(key);
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        {
            let mut file = std::fs::File::create(&tmp)
                .with_context(|| format!("creating {}", tmp.display()))?;
            file.write_all(MAGIC)?;
            file.write_all(&(q.state_count() as u64).to_le_bytes())?;
            file.write_all(&(q.action_count() as u64).to_le_bytes())?;
            file.write_all(&(q.iterations as u64).to_le_bytes())?;
            file.write_all(&q.residual.to_le_bytes())?;
            file.write_all(&tolerance.to_le_bytes())?;
            let mut buf = Vec::with_capacity(q.values().len() * 8);
            for v in q.values() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            file.write_all(&buf)?;
            file.sync_all()?;
        }
        std::fs::rename(&tmp, &path)
            .with_context(|| format!("publishing {}", path.display()))?;
        Ok(path)
    }

    /// Load the table for a model configuration, or solve and cache it.
    /// With `allow_solve` false, a cache miss is an error (suites can then
    /// be forced to run only against pre-solved tables).
    pub fn ensure(
        &self,
        config: &ModelConfig,
        solver: SolverSettings,
        allow_solve: bool,
        label: &str,
    ) -> Result<Solved> {
        let key = cache_key(config, &solver);
        let model = build_model(config).with_context(|| format!("building model [{label}]"))?;
        let states = model.ego_count() * model.ped_count();
        if let Some((q, _stored_tol)) = self.read(&key)? {
            if q.state_count() != states || q.action_count() != model.actions().len() {
                bail!(
                    "cached table {key} has shape {}x{}, expected {}x{}",
                    q.state_count(),
                    q.action_count(),
                    states,
                    model.actions().len()
                );
            }
            let converged = q.residual <= solver.tolerance;
            log::info!(
                "[{label}] cache hit {key}: {} states, residual {:.3e} after {} sweeps",
                states,
                q.residual,
                q.iterations
            );
            return Ok(Solved { model, q, converged, from_cache: true });
        }
        if !allow_solve {
            bail!("no cached value table {key} for [{label}] and solving is disabled");
        }
        log::info!("[{label}] solving {} states x {} actions...", states, model.actions().len());
        let started = std::time::Instant::now();
        let q = value_iterate_with(&model, solver, |sweep, residual| {
            if sweep % 25 == 0 {
                log::debug!("[{label}] sweep {sweep}: residual {residual:.3e}");
            }
        })
        .with_context(|| format!("value iteration [{label}]"))?;
        let converged = q.residual <= solver.tolerance;
        log::info!(
            "[{label}] solved in {:.1}s: {} sweeps, residual {:.3e}{}",
            started.elapsed().as_secs_f64(),
            q.iterations,
            q.residual,
            if converged { "" } else { " (NOT CONVERGED)" }
        );
        self.write(&key, &q, solver.tolerance)?;
        Ok(Solved { model, q, converged, from_cache: false })
    }
}
