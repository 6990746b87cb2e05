//! Policy-slice export: fix the ego speed, the pedestrian speed and heading,
//! and the ego lateral offset (lane centre), then tabulate the argmax
//! longitudinal acceleration over the pedestrian (s, t) grid.

use anyhow::Result;
use pedplan_core::model::{PedCell, PedestrianPomdp};
use pedplan_core::pomdp::QValueTable;
use std::fmt::Write as _;

/// One exported slice: the snapped query levels plus the longitudinal
/// acceleration matrix, row-major over s then t.
#[derive(Debug, Clone)]
pub struct PolicySlice {
    pub ego_speed: f64,
    pub ped_speed: f64,
    pub ped_heading: f64,
    pub s_centers: Vec<f64>,
    pub t_centers: Vec<f64>,
    /// lon[i][j] is the argmax longitudinal acceleration with the pedestrian
    /// at (s_centers[i], t_centers[j]).
    pub lon: Vec<Vec<f64>>,
}

fn snap(axis: &pedplan_core::grid::Axis, requested: f64, what: &str) -> usize {
    let idx = axis.nearest(requested);
    let center = axis.center(idx);
    if (center - requested).abs() > 1e-6 {
        log::warn!("{what} {requested} is off-grid; using the nearest level {center}");
    }
    idx
}

/// Export the policy slice. Quantities are SI (m/s, radians); off-grid
/// requests snap to the nearest level with a warning.
pub fn export_policy_slice(
    model: &PedestrianPomdp,
    q: &QValueTable,
    ego_speed: f64,
    ped_speed: f64,
    ped_heading: f64,
) -> Result<PolicySlice> {
    let ego = model.nearest_ego(ego_speed, 0.0);
    let ego_speed_snapped = model.ego_speed_axis().center(
        snap(model.ego_speed_axis(), ego_speed, "ego speed (m/s)"),
    );
    let ped = model.ped();
    let speed_idx = snap(&ped.speed, ped_speed, "pedestrian speed (m/s)");
    let heading_idx = snap(&ped.heading, ped_heading, "pedestrian heading (rad)");
    let s_centers = ped.s.centers();
    let t_centers = ped.t.centers();
    let mut lon = Vec::with_capacity(s_centers.len());
    for s in 0..ped.s.levels() {
        let mut row = Vec::with_capacity(t_centers.len());
        for t in 0..ped.t.levels() {
            let cell = PedCell { s, t, speed: speed_idx, heading: heading_idx };
            let state = model.joint_state(ego, ped.index(cell));
            let action = model.action_set().action(q.best_action(state).0);
            row.push(action.longitudinal);
        }
        lon.push(row);
    }
    Ok(PolicySlice {
        ego_speed: ego_speed_snapped,
        ped_speed: ped.speed.center(speed_idx),
        ped_heading: ped.heading.center(heading_idx),
        s_centers,
        t_centers,
        lon,
    })
}

/// CSV matrix: one row per s level (ascending), one column per t level,
/// cells holding the argmax longitudinal acceleration in m/s².
pub fn slice_csv(slice: &PolicySlice) -> String {
    let mut out = String::from("s");
    for t in &slice.t_centers {
        let _ = write!(out, ",t={t}");
    }
    out.push('\n');
    for (i, s) in slice.s_centers.iter().enumerate() {
        let _ = write!(out, "{s}");
        for v in &slice.lon[i] {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Largest s level at which any t column commands a negative longitudinal
/// acceleration — the distance at which braking begins as the pedestrian
/// approach plays out. None when the slice never brakes.
pub fn braking_onset(slice: &PolicySlice) -> Option<f64> {
    slice
        .s_centers
        .iter()
        .enumerate()
        .rev()
        .find(|(i, _)| slice.lon[*i].iter().any(|&a| a < 0.0))
        .map(|(_, s)| *s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pedplan_core::model::{build_model, ActionSet, AxisSpec, DiscretizationSpec, ModelConfig};
    use pedplan_core::pomdp::{value_iterate, SolverSettings};

    fn small_symmetric_model() -> PedestrianPomdp {
        let mut cfg = ModelConfig::default();
        cfg.discretization = DiscretizationSpec {
            ego_speed: AxisSpec::new(0.0, 10.0, 3),
            ego_lateral: AxisSpec::new(-1.0, 1.0, 3),
            ped_s: AxisSpec::new(0.0, 20.0, 6),
            ped_t: AxisSpec::new(-4.0, 4.0, 5),
            ped_speed: AxisSpec::new(0.0, 2.0, 2),
            ped_heading: AxisSpec::new(
                -core::f64::consts::FRAC_PI_2,
                core::f64::consts::FRAC_PI_2,
                3,
            ),
        };
        cfg.actions = ActionSet {
            longitudinal: vec![0.0, 1.0, -2.0],
            lateral: vec![0.0, 1.0, -1.0],
        };
        build_model(&cfg).unwrap()
    }

    /// Longitudinal accelerations within a solver tolerance of the best
    /// utility in this state — the argmax may land on any of them.
    fn near_best_lons(model: &PedestrianPomdp, q: &QValueTable, state: usize) -> Vec<f64> {
        let row = q.row(state);
        let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (0..row.len())
            .filter(|&a| row[a] >= best - 1e-9)
            .map(|a| model.action_set().action(a).longitudinal)
            .collect()
    }

    /// With a laterally centred ego and symmetric axes, reflecting the
    /// pedestrian across the lane axis (t -> -t, heading -> -heading) must
    /// leave the longitudinal policy unchanged.
    #[test]
    fn slice_is_mirror_symmetric() {
        let model = small_symmetric_model();
        let q = value_iterate(&model, SolverSettings { tolerance: 1e-8, max_iterations: 2000 })
            .unwrap();
        let heading = model.ped().heading.center(2); // +90 degrees
        let a = export_policy_slice(&model, &q, 5.0, 2.0, heading).unwrap();
        let b = export_policy_slice(&model, &q, 5.0, 2.0, -heading).unwrap();
        let ego = model.nearest_ego(5.0, 0.0);
        let n_t = a.t_centers.len();
        for i in 0..a.s_centers.len() {
            for j in 0..n_t {
                let lon_a = a.lon[i][j];
                let lon_b = b.lon[i][n_t - 1 - j];
                if lon_a != lon_b {
                    // An exact utility tie may argmax either way; accept it
                    // only when both choices are near-best in both states.
                    let cell = PedCell { s: i, t: j, speed: 1, heading: 2 };
                    let state = model.joint_state(ego, model.ped().index(cell));
                    let lons = near_best_lons(&model, &q, state);
                    assert!(
                        lons.contains(&lon_b),
                        "asymmetric policy at s={} t={}: {} vs {}",
                        a.s_centers[i],
                        a.t_centers[j],
                        lon_a,
                        lon_b
                    );
                }
            }
        }
    }

    #[test]
    fn braking_onset_scans_from_far_side() {
        let slice = PolicySlice {
            ego_speed: 10.0,
            ped_speed: 1.0,
            ped_heading: 0.0,
            s_centers: vec![0.0, 10.0, 20.0],
            t_centers: vec![-1.0, 1.0],
            lon: vec![vec![-4.0, -4.0], vec![0.0, -1.0], vec![0.0, 0.0]],
        };
        assert_eq!(braking_onset(&slice), Some(10.0));
        let never = PolicySlice { lon: vec![vec![0.0; 2]; 3], ..slice };
        assert_eq!(braking_onset(&never), None);
    }

    #[test]
    fn csv_shape_matches_grid() {
        let model = small_symmetric_model();
        let q = value_iterate(&model, SolverSettings { tolerance: 1e-6, max_iterations: 2000 })
            .unwrap();
        let slice = export_policy_slice(&model, &q, 5.0, 2.0, 0.0).unwrap();
        let csv = slice_csv(&slice);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + model.ped().s.levels());
        for line in &lines {
            assert_eq!(line.split(',').count(), 1 + model.ped().t.levels());
        }
    }
}
