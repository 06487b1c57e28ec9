//! Kalman-free motion model: average the recent per-frame displacement of a
//! track's matched detections (in corner form) and extrapolate linearly.

use std::cmp::Ordering;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CornerBox;

/// Per-frame displacement of the four corner coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Velocity {
    pub dx1: f64,
    pub dy1: f64,
    pub dx2: f64,
    pub dy2: f64,
}

impl Velocity {
    pub const ZERO: Velocity = Velocity {
        dx1: 0.0,
        dy1: 0.0,
        dx2: 0.0,
        dy2: 0.0,
    };

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }
}

/// Sliding window of matched detections, oldest first. Holds at most
/// `n_max + 1` entries so that at most `n_max` displacements are averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionHistory {
    entries: VecDeque<(u32, CornerBox)>,
    n_max: usize,
}

impl MotionHistory {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::invalid("motion window must hold at least one displacement"));
        }
        Ok(Self {
            entries: VecDeque::with_capacity(n_max + 1),
            n_max,
        })
    }

    pub fn push(&mut self, frame: u32, state: CornerBox) -> Result<()> {
        if let Some(&(last, _)) = self.entries.back() {
            if frame <= last {
                return Err(Error::Sequencing {
                    frame,
                    previous: last,
                });
            }
        }
        if self.entries.len() == self.n_max + 1 {
            self.entries.pop_front();
        }
        self.entries.push_back((frame, state));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn last(&self) -> Option<&(u32, CornerBox)> {
        self.entries.back()
    }

    pub fn entries(&self) -> impl Iterator<Item = &(u32, CornerBox)> {
        self.entries.iter()
    }

    /// Number of displacements currently averaged.
    pub fn effective_n(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }
}

/// Mean per-frame displacement over the window.
///
/// Computed as total displacement over frame span, which equals the mean of
/// consecutive deltas when the entries are frame-consecutive and stays in
/// pixels per frame when matches have gaps. Fewer than two entries give the
/// zero velocity.
pub fn average_velocity(hist: &MotionHistory) -> Velocity {
    let (Some(&(f0, first)), Some(&(f1, last))) = (hist.entries.front(), hist.entries.back())
    else {
        return Velocity::ZERO;
    };
    if hist.entries.len() < 2 {
        return Velocity::ZERO;
    }
    let span = f64::from(f1 - f0);
    Velocity {
        dx1: (last.x1 - first.x1) / span,
        dy1: (last.y1 - first.y1) / span,
        dx2: (last.x2 - first.x2) / span,
        dy2: (last.y2 - first.y2) / span,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub state: CornerBox,
    /// Set when the raw extrapolation collapsed an extent and it had to be
    /// re-inflated to one pixel around its center.
    pub degenerate: bool,
}

/// Advance `state` by `delta` frames of velocity `v`.
pub fn predict(state: &CornerBox, v: &Velocity, delta: u32) -> Result<Prediction> {
    if delta == 0 {
        return Err(Error::invalid("prediction horizon must be at least one frame"));
    }
    let d = f64::from(delta);
    let mut out = CornerBox {
        x1: state.x1 + d * v.dx1,
        y1: state.y1 + d * v.dy1,
        x2: state.x2 + d * v.dx2,
        y2: state.y2 + d * v.dy2,
    };
    let mut degenerate = false;
    if out.x2.partial_cmp(&out.x1) != Some(Ordering::Greater) {
        let c = (out.x1 + out.x2) / 2.0;
        (out.x1, out.x2) = (c - 0.5, c + 0.5);
        degenerate = true;
    }
    if out.y2.partial_cmp(&out.y1) != Some(Ordering::Greater) {
        let c = (out.y1 + out.y2) / 2.0;
        (out.y1, out.y2) = (c - 0.5, c + 0.5);
        degenerate = true;
    }
    Ok(Prediction {
        state: out,
        degenerate,
    })
}
