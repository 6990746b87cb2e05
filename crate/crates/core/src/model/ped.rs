//! Pedestrian state grid and one-step reachability transitions.
//!
//! A pedestrian cell is (longitudinal position `s`, lateral position `t`,
//! speed, heading); one extra distinguished index represents "no pedestrian
//! present". Headings are bounded so the longitudinal velocity component
//! never points toward the ego; speed is bounded above by the speed axis
//! maximum.
//!
//! The one-step model integrates each acceleration option from the cell
//! center exactly over `dt`, clamps speed and heading to their ranges, then
//! discretizes: every axis splits its point mass linearly between the two
//! neighbouring centers, so sub-spacing increments shift a proportional mass
//! share instead of rounding away. Position mass leaving the window routes
//! to absent; speed and heading clamp to their end levels. Options are
//! equally likely.

use super::occlusion::{occlusion_check, OcclusionGeometry, Point};
use crate::fmath;
use crate::grid::Axis;
use alloc::vec::Vec;

/// Discrete pedestrian cell (all four indices in range; never the absent
/// state).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PedCell {
    pub s: usize,
    pub t: usize,
    pub speed: usize,
    pub heading: usize,
}

/// Continuous pedestrian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PedKinematics {
    pub s: f64,
    pub t: f64,
    pub speed: f64,
    pub heading: f64,
}

/// The pedestrian grid plus the acceleration menu shared by all cells.
#[derive(Debug, Clone)]
pub struct PedGrid {
    pub s: Axis,
    pub t: Axis,
    pub speed: Axis,
    pub heading: Axis,
    /// Product menu of (longitudinal, lateral) acceleration pairs, uniform.
    options: Vec<(f64, f64)>,
}

impl PedGrid {
    /// Build from per-variable axes and a per-axis acceleration menu (the
    /// reachability set is the Cartesian product of the menu with itself).
    pub fn new(s: Axis, t: Axis, speed: Axis, heading: Axis, accel_menu: &[f64]) -> Self {
        assert!(!accel_menu.is_empty(), "pedestrian acceleration menu must be non-empty");
        let mut options = Vec::with_capacity(accel_menu.len() * accel_menu.len());
        for &a_s in accel_menu {
            for &a_t in accel_menu {
                options.push((a_s, a_t));
            }
        }
        PedGrid { s, t, speed, heading, options }
    }

    /// Number of discrete states including the absent index.
    pub fn cell_count(&self) -> usize {
        self.present_count() + 1
    }

    /// Number of in-window cells.
    pub fn present_count(&self) -> usize {
        self.s.levels() * self.t.levels() * self.speed.levels() * self.heading.levels()
    }

    /// The distinguished "no pedestrian" index (largest index).
    pub fn absent_index(&self) -> usize {
        self.present_count()
    }

    pub fn index(&self, cell: PedCell) -> usize {
        ((cell.s * self.t.levels() + cell.t) * self.speed.levels() + cell.speed)
            * self.heading.levels()
            + cell.heading
    }

    /// Decode an index; `None` for the absent index.
    pub fn cell(&self, index: usize) -> Option<PedCell> {
        if index >= self.present_count() {
            return None;
        }
        let heading = index % self.heading.levels();
        let rest = index / self.heading.levels();
        let speed = rest % self.speed.levels();
        let rest = rest / self.speed.levels();
        let t = rest % self.t.levels();
        let s = rest / self.t.levels();
        Some(PedCell { s, t, speed, heading })
    }

    /// Flattened (s, t) position index of a present cell index.
    pub fn position_index(&self, index: usize) -> usize {
        debug_assert!(index < self.present_count());
        index / (self.speed.levels() * self.heading.levels())
    }

    pub fn position_count(&self) -> usize {
        self.s.levels() * self.t.levels()
    }

    pub fn position_center(&self, position: usize) -> Point {
        let s_idx = position / self.t.levels();
        let t_idx = position % self.t.levels();
        Point::new(self.s.center(s_idx), self.t.center(t_idx))
    }

    pub fn center(&self, cell: PedCell) -> PedKinematics {
        PedKinematics {
            s: self.s.center(cell.s),
            t: self.t.center(cell.t),
            speed: self.speed.center(cell.speed),
            heading: self.heading.center(cell.heading),
        }
    }

    /// Integrate one acceleration option exactly over `dt` from a continuous
    /// state, in a frame that itself advances by `shift` (the ego's own
    /// longitudinal progress during the step). Speed clamps to the speed axis
    /// range by rescaling the velocity vector; heading clamps to the heading
    /// range (a stopped pedestrian keeps its previous heading).
    pub fn step_option(
        &self,
        k: &PedKinematics,
        accel_s: f64,
        accel_t: f64,
        dt: f64,
        shift: f64,
    ) -> PedKinematics {
        let v_s = k.speed * fmath::cos(k.heading);
        let v_t = k.speed * fmath::sin(k.heading);
        let mut v_s1 = v_s + accel_s * dt;
        let mut v_t1 = v_t + accel_t * dt;
        let mut mag = fmath::hypot(v_s1, v_t1);
        if mag > self.speed.max() {
            let scale = self.speed.max() / mag;
            v_s1 *= scale;
            v_t1 *= scale;
            mag = self.speed.max();
        }
        let heading = if mag > 1e-12 {
            fmath::atan2(v_t1, v_s1).clamp(self.heading.min(), self.heading.max())
        } else {
            k.heading
        };
        PedKinematics {
            s: k.s + 0.5 * (v_s + v_s1) * dt - shift,
            t: k.t + 0.5 * (v_t + v_t1) * dt,
            speed: mag,
            heading,
        }
    }

    /// One-step distribution from a present cell, written into `out` as
    /// (cell index, probability) pairs sorted by index with the absent index
    /// (if reached) last. The frame advances by `shift` during the step.
    pub fn transition_shifted_into(
        &self,
        index: usize,
        dt: f64,
        shift: f64,
        out: &mut Vec<(u32, f64)>,
    ) {
        out.clear();
        let cell = self.cell(index).expect("transition from a present cell");
        let k = self.center(cell);
        let w_opt = 1.0 / self.options.len() as f64;
        let mut absent_mass = 0.0;
        for &(a_s, a_t) in &self.options {
            let k1 = self.step_option(&k, a_s, a_t, dt, shift);
            // Interpolated deposits on every axis: an increment smaller than
            // the level spacing still shifts the matching share of mass, so
            // coarse grids keep the reachability spread instead of rounding
            // it away. Speed and heading are clamped quantities; position
            // mass leaving the region becomes "absent".
            let split_speed = self.speed.split_clamped(k1.speed);
            let split_heading = self.heading.split_clamped(k1.heading);
            let split_s = self.s.split(k1.s);
            let split_t = self.t.split(k1.t);
            let inside_s: f64 = split_s.cells[..split_s.count].iter().map(|c| c.1).sum();
            let inside_t: f64 = split_t.cells[..split_t.count].iter().map(|c| c.1).sum();
            absent_mass += w_opt * (1.0 - inside_s * inside_t);
            for &(s_idx, w_s) in &split_s.cells[..split_s.count] {
                for &(t_idx, w_t) in &split_t.cells[..split_t.count] {
                    for &(speed_idx, w_speed) in &split_speed.cells[..split_speed.count] {
                        for &(heading_idx, w_heading) in
                            &split_heading.cells[..split_heading.count]
                        {
                            let w = w_opt * w_s * w_t * w_speed * w_heading;
                            if w > 0.0 {
                                let succ = self.index(PedCell {
                                    s: s_idx,
                                    t: t_idx,
                                    speed: speed_idx,
                                    heading: heading_idx,
                                });
                                out.push((succ as u32, w));
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable_by_key(|&(i, _)| i);
        // Merge duplicate successors in place.
        let mut write = 0usize;
        for read in 0..out.len() {
            if write > 0 && out[write - 1].0 == out[read].0 {
                out[write - 1].1 += out[read].1;
            } else {
                out[write] = out[read];
                write += 1;
            }
        }
        out.truncate(write);
        if absent_mass > 0.0 {
            out.push((self.absent_index() as u32, absent_mass));
        }
        let total: f64 = out.iter().map(|e| e.1).sum();
        debug_assert!((total - 1.0).abs() < 1e-9);
        let inv = 1.0 / total;
        for e in out.iter_mut() {
            e.1 *= inv;
        }
    }

    /// One-step distribution from a present cell in a static frame.
    pub fn pedestrian_transition(&self, index: usize, dt: f64) -> Vec<(u32, f64)> {
        let mut out = Vec::new();
        self.transition_shifted_into(index, dt, 0.0, &mut out);
        out
    }

    /// Which position cells are hidden from `sensor` by `geometry`?
    pub fn occluded_positions(&self, sensor: Point, geometry: &OcclusionGeometry) -> Vec<bool> {
        (0..self.position_count())
            .map(|p| occlusion_check(sensor, self.position_center(p), geometry))
            .collect()
    }

    /// Expand a position mask to the ascending list of full cell indices.
    pub fn positions_to_cells(&self, positions: &[bool]) -> Vec<u32> {
        debug_assert_eq!(positions.len(), self.position_count());
        let per_position = self.speed.levels() * self.heading.levels();
        let mut cells = Vec::new();
        for (pos, &hidden) in positions.iter().enumerate() {
            if hidden {
                let base = pos * per_position;
                for k in 0..per_position {
                    cells.push((base + k) as u32);
                }
            }
        }
        cells
    }

    /// Transition row for the absent state: mass `p_appear` splits uniformly
    /// over `occluded` (ascending cell indices); the rest self-loops. With no
    /// occluded cells the absent state is absorbing.
    pub fn appearance_row(&self, occluded: &[u32], p_appear: f64) -> Vec<(u32, f64)> {
        debug_assert!(occluded.windows(2).all(|w| w[0] < w[1]));
        debug_assert!((0.0..=1.0).contains(&p_appear));
        let absent = self.absent_index() as u32;
        if occluded.is_empty() || p_appear <= 0.0 {
            return alloc::vec![(absent, 1.0)];
        }
        let w = p_appear / occluded.len() as f64;
        let mut row: Vec<(u32, f64)> = occluded.iter().map(|&c| (c, w)).collect();
        if p_appear < 1.0 {
            row.push((absent, 1.0 - p_appear));
        }
        row
    }
}
