//! Line-of-sight occlusion against axis-aligned rectangular obstacles.
//!
//! A target point is occluded when the closed segment from the sensor origin
//! to the target intersects any obstacle rectangle (closed: grazing an edge
//! or corner counts as blocked). The test is the standard slab clip of the
//! segment against the two axis intervals.

use alloc::vec::Vec;

/// A point in the (s, t) road frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub s: f64,
    pub t: f64,
}

impl Point {
    pub fn new(s: f64, t: f64) -> Self {
        Point { s, t }
    }
}

/// Closed axis-aligned rectangle `[s_min, s_max] × [t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectObstacle {
    pub s_min: f64,
    pub s_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl RectObstacle {
    pub fn new(s_min: f64, s_max: f64, t_min: f64, t_max: f64) -> Self {
        RectObstacle { s_min, s_max, t_min, t_max }
    }

    pub fn is_well_formed(&self) -> bool {
        self.s_min.is_finite()
            && self.s_max.is_finite()
            && self.t_min.is_finite()
            && self.t_max.is_finite()
            && self.s_min <= self.s_max
            && self.t_min <= self.t_max
    }

    pub fn contains(&self, p: Point) -> bool {
        p.s >= self.s_min && p.s <= self.s_max && p.t >= self.t_min && p.t <= self.t_max
    }
}

/// The static obstacle layout.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OcclusionGeometry {
    pub obstacles: Vec<RectObstacle>,
}

impl OcclusionGeometry {
    pub fn new(obstacles: Vec<RectObstacle>) -> Self {
        OcclusionGeometry { obstacles }
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }
}

/// Clip the closed segment `a → b` against one rectangle; true if any
/// parameter interval survives.
fn segment_hits_rect(a: Point, b: Point, rect: &RectObstacle) -> bool {
    let d = (b.s - a.s, b.t - a.t);
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for (origin, delta, min, max) in
        [(a.s, d.0, rect.s_min, rect.s_max), (a.t, d.1, rect.t_min, rect.t_max)]
    {
        if delta == 0.0 {
            if origin < min || origin > max {
                return false;
            }
            continue;
        }
        let mut t0 = (min - origin) / delta;
        let mut t1 = (max - origin) / delta;
        if t0 > t1 {
            core::mem::swap(&mut t0, &mut t1);
        }
        lo = lo.max(t0);
        hi = hi.min(t1);
        if lo > hi {
            return false;
        }
    }
    true
}

/// Is `target` hidden from a sensor at `sensor` by any obstacle?
pub fn occlusion_check(sensor: Point, target: Point, geometry: &OcclusionGeometry) -> bool {
    geometry.obstacles.iter().any(|rect| segment_hits_rect(sensor, target, rect))
}
