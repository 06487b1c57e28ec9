//! Axis-aligned box algebra and the pairwise similarity kernels used for
//! association: plain IoU, GIoU, DIoU and buffered IoU.
//!
//! Boxes are real-valued and never clipped to an image; a buffered box may
//! extend past any frame border.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Box in top-left / width / height form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(Error::invalid(format!(
                "box ({x}, {y}, {w}, {h}) has non-finite fields"
            )));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::invalid(format!(
                "box ({x}, {y}, {w}, {h}) must have positive extents"
            )));
        }
        Ok(Self { x, y, w, h })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x2(&self) -> f64 {
        self.x + self.w
    }

    pub fn y2(&self) -> f64 {
        self.y + self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        (self.x2() - self.x) * (self.y2() - self.y)
    }

    pub fn to_corners(&self) -> CornerBox {
        CornerBox {
            x1: self.x,
            y1: self.y,
            x2: self.x2(),
            y2: self.y2(),
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self> {
        Self::new(self.x + dx, self.y + dy, self.w, self.h)
    }
}

impl TryFrom<[f64; 4]> for BoundingBox {
    type Error = Error;

    fn try_from([x, y, w, h]: [f64; 4]) -> Result<Self> {
        Self::new(x, y, w, h)
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

/// Box in corner form `(x1, y1, x2, y2)`; the representation the motion
/// model differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl CornerBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let b = Self { x1, y1, x2, y2 };
        if !b.is_valid() {
            return Err(Error::invalid(format!(
                "corner box ({x1}, {y1}, {x2}, {y2}) needs finite corners with x2 > x1 and y2 > y1"
            )));
        }
        Ok(b)
    }

    /// True when every corner is finite and both extents are positive.
    pub fn is_valid(&self) -> bool {
        [self.x1, self.y1, self.x2, self.y2]
            .iter()
            .all(|v| v.is_finite())
            && self.x2 > self.x1
            && self.y2 > self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    pub fn to_bbox(&self) -> Result<BoundingBox> {
        BoundingBox::new(self.x1, self.y1, self.x2 - self.x1, self.y2 - self.y1)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn from_array([x1, y1, x2, y2]: [f64; 4]) -> Self {
        Self { x1, y1, x2, y2 }
    }
}

/// Expand a box by `scale` times its own width and height on every side.
///
/// The center, aspect ratio and shape are kept; the area grows by
/// `(1 + 2 * scale)^2`.
pub fn buffer(bbox: &BoundingBox, scale: f64) -> Result<BoundingBox> {
    check_scale(scale)?;
    let (x, y, w, h) = (bbox.x, bbox.y, bbox.w, bbox.h);
    BoundingBox::new(
        x - scale * w,
        y - scale * h,
        w + 2.0 * scale * w,
        h + 2.0 * scale * h,
    )
}

fn check_scale(scale: f64) -> Result<()> {
    if !scale.is_finite() || scale < 0.0 {
        return Err(Error::invalid(format!(
            "buffer scale must be finite and non-negative, got {scale}"
        )));
    }
    Ok(())
}

fn intersection(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = a.x2().min(b.x2()) - a.x.max(b.x);
    let ih = a.y2().min(b.y2()) - a.y.max(b.y);
    if iw <= 0.0 || ih <= 0.0 {
        0.0
    } else {
        iw * ih
    }
}

/// Smallest enclosing box as `(x1, y1, x2, y2)`.
fn hull(a: &BoundingBox, b: &BoundingBox) -> (f64, f64, f64, f64) {
    (
        a.x.min(b.x),
        a.y.min(b.y),
        a.x2().max(b.x2()),
        a.y2().max(b.y2()),
    )
}

/// `(intersection, union)`.
fn overlap(a: &BoundingBox, b: &BoundingBox) -> (f64, f64) {
    let inter = intersection(a, b);
    (inter, a.area() + b.area() - inter)
}

pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (inter, union) = overlap(a, b);
    inter / union
}

/// IoU of the two boxes after both are buffered with the same scale.
pub fn biou(a: &BoundingBox, b: &BoundingBox, scale: f64) -> Result<f64> {
    Ok(iou(&buffer(a, scale)?, &buffer(b, scale)?))
}

pub fn giou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (inter, union) = overlap(a, b);
    let (x1, y1, x2, y2) = hull(a, b);
    let enclosing = (x2 - x1) * (y2 - y1);
    inter / union - (enclosing - union) / enclosing
}

pub fn diou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (inter, union) = overlap(a, b);
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    let center_dist2 = (ax - bx).powi(2) + (ay - by).powi(2);
    let (x1, y1, x2, y2) = hull(a, b);
    let diag2 = (x2 - x1).powi(2) + (y2 - y1).powi(2);
    inter / union - center_dist2 / diag2
}

/// Pairwise similarity used by one association round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityKind {
    Iou,
    Giou,
    Diou,
    Biou,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 4] = [Self::Iou, Self::Giou, Self::Diou, Self::Biou];

    /// Score `a` against `b`. `scale` is only read for [`SimilarityKind::Biou`].
    pub fn score(self, a: &BoundingBox, b: &BoundingBox, scale: f64) -> Result<f64> {
        Ok(match self {
            Self::Iou => iou(a, b),
            Self::Giou => giou(a, b),
            Self::Diou => diou(a, b),
            Self::Biou => biou(a, b, scale)?,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Iou => "iou",
            Self::Giou => "giou",
            Self::Diou => "diou",
            Self::Biou => "biou",
        }
    }
}

impl std::str::FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iou" => Ok(Self::Iou),
            "giou" => Ok(Self::Giou),
            "diou" => Ok(Self::Diou),
            "biou" => Ok(Self::Biou),
            other => Err(Error::invalid(format!("unknown similarity kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
