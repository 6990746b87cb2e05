//! Uniformly spaced discretization axes.
//!
//! An axis places `levels ≥ 2` cell centers at uniform spacing including both
//! range endpoints. Continuous coordinates map to cells two ways:
//!
//! - [`Axis::nearest`]: snap to the closest center (used for quantizing query
//!   coordinates, initial states, and slice exports);
//! - [`Axis::split`]: distribute unit mass over the two neighbouring centers
//!   with linear weights (used for successor discretization, where pure
//!   snapping would freeze sub-cell motion). Coordinates beyond the ends
//!   report the out-of-range fraction so callers can route it (e.g. to an
//!   "absent" state) or clamp it.

use alloc::vec::Vec;

/// One uniformly spaced axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    min: f64,
    max: f64,
    levels: usize,
    spacing: f64,
}

/// Result of [`Axis::split`]: up to two in-range cells plus any mass that fell
/// off each end of the range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    /// (cell index, weight) pairs; weights plus the outside parts sum to 1.
    pub cells: [(usize, f64); 2],
    /// Number of valid entries in `cells` (1 or 2).
    pub count: usize,
    /// Mass below the axis minimum.
    pub below: f64,
    /// Mass above the axis maximum.
    pub above: f64,
}

impl Axis {
    /// `levels` centers spanning `[min, max]` inclusive. Requires
    /// `min < max` and `levels ≥ 2`.
    pub fn new(min: f64, max: f64, levels: usize) -> Option<Axis> {
        if !(min.is_finite() && max.is_finite() && min < max) || levels < 2 {
            return None;
        }
        let spacing = (max - min) / (levels - 1) as f64;
        Some(Axis { min, max, levels, spacing })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Center of cell `index`.
    #[inline]
    pub fn center(&self, index: usize) -> f64 {
        debug_assert!(index < self.levels);
        if index == self.levels - 1 {
            self.max // exact endpoint, no accumulation error
        } else {
            self.min + index as f64 * self.spacing
        }
    }

    /// All centers in order.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.levels).map(|i| self.center(i)).collect()
    }

    /// Nearest cell center to `x`; out-of-range coordinates clamp to the ends.
    /// Exact midpoints round up, matching `round`'s half-away-from-zero on the
    /// non-negative cell coordinate.
    #[inline]
    pub fn nearest(&self, x: f64) -> usize {
        let t = (x - self.min) / self.spacing;
        if t <= 0.0 {
            return 0;
        }
        let i = crate::fmath::round(t);
        if i >= (self.levels - 1) as f64 {
            self.levels - 1
        } else {
            i as usize
        }
    }

    /// Whether `x` lies inside the axis range (closed interval).
    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    /// Linearly distribute unit mass at `x` over the neighbouring centers.
    /// Mass beyond either end is reported in `below`/`above` rather than
    /// silently clamped; an exactly-on-center coordinate yields one cell with
    /// weight 1.
    pub fn split(&self, x: f64) -> Split {
        let t = (x - self.min) / self.spacing;
        let last = (self.levels - 1) as f64;
        if t < 0.0 {
            // Between the virtual cell at -1 and cell 0: the in-range share.
            let w0 = (1.0 + t).max(0.0);
            return Split { cells: [(0, w0), (0, 0.0)], count: 1, below: 1.0 - w0, above: 0.0 };
        }
        if t > last {
            let w1 = (1.0 - (t - last)).max(0.0);
            return Split {
                cells: [(self.levels - 1, w1), (0, 0.0)],
                count: 1,
                below: 0.0,
                above: 1.0 - w1,
            };
        }
        let lo = crate::fmath::floor(t);
        let frac = t - lo;
        let lo_idx = lo as usize;
        if frac == 0.0 || lo_idx == self.levels - 1 {
            Split { cells: [(lo_idx, 1.0), (0, 0.0)], count: 1, below: 0.0, above: 0.0 }
        } else {
            Split {
                cells: [(lo_idx, 1.0 - frac), (lo_idx + 1, frac)],
                count: 2,
                below: 0.0,
                above: 0.0,
            }
        }
    }

    /// Like [`Axis::split`] but with the outside mass folded onto the end
    /// cells (for clamped quantities such as speeds).
    pub fn split_clamped(&self, x: f64) -> Split {
        let mut s = self.split(x);
        if s.below > 0.0 {
            s.cells[0].1 += s.below;
            s.below = 0.0;
        }
        if s.above > 0.0 {
            s.cells[0].1 += s.above; // count==1 and cells[0] is the end cell
            s.above = 0.0;
        }
        s
    }
}
