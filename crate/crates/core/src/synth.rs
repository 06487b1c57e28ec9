//! Seeded synthetic sequences with irregular motion and occlusion bursts,
//! and the false-negative / false-positive noise protocol.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{iou, BoundingBox};
use crate::metrics::SequenceAnnotations;
use crate::tracker::{Detection, DetectionSequence};

/// Detection-suppression bursts applied independently per object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcclusionSpec {
    /// Per-frame chance that a visible object starts a burst.
    pub probability: f64,
    /// Inclusive burst length range in frames.
    pub duration: (u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub num_objects: usize,
    pub num_frames: u32,
    /// Arena `(width, height)` in pixels.
    pub arena: (f64, f64),
    /// Pixels per frame.
    pub speed_range: (f64, f64),
    /// Per-frame chance of drawing a new heading and speed.
    pub turn_prob: f64,
    /// Box side length range in pixels; width and height drawn separately.
    pub size_range: (f64, f64),
    #[serde(default)]
    pub occlusion: Option<OcclusionSpec>,
    pub seed: u64,
    /// Fraction of the arena, centered, in which objects start.
    #[serde(default = "full_arena")]
    pub spawn_fraction: f64,
}

fn full_arena() -> f64 {
    1.0
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            num_objects: 10,
            num_frames: 300,
            arena: (1920.0, 1080.0),
            speed_range: (2.0, 10.0),
            turn_prob: 0.05,
            size_range: (30.0, 60.0),
            occlusion: None,
            seed: 0,
            spawn_fraction: 1.0,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let range = |name: &str, (lo, hi): (f64, f64)| {
            if lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "{name} must be a positive range, got ({lo}, {hi})"
                )))
            }
        };
        if !(self.arena.0.is_finite() && self.arena.1.is_finite() && self.arena.0 > 0.0 && self.arena.1 > 0.0) {
            return Err(Error::invalid(format!("arena must have positive extents, got {:?}", self.arena)));
        }
        range("speed_range", self.speed_range)?;
        range("size_range", self.size_range)?;
        check_probability("turn_prob", self.turn_prob)?;
        if let Some(occ) = &self.occlusion {
            check_probability("occlusion.probability", occ.probability)?;
            if occ.duration.0 < 1 || occ.duration.0 > occ.duration.1 {
                return Err(Error::invalid(format!(
                    "occlusion.duration must be a range of at least one frame, got {:?}",
                    occ.duration
                )));
            }
        }
        if !(self.spawn_fraction > 0.0 && self.spawn_fraction <= 1.0) {
            return Err(Error::invalid("spawn_fraction must lie in (0, 1]"));
        }
        if self.num_objects > 0 && (self.size_range.1 >= self.arena.0 || self.size_range.1 >= self.arena.1) {
            return Err(Error::invalid(format!(
                "objects up to {} px do not fit in a {}x{} arena",
                self.size_range.1, self.arena.0, self.arena.1
            )));
        }
        Ok(())
    }
}

/// Named scenario families used by the benchmark commands and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Straight-line motion faster than the box size, so consecutive boxes
    /// of an object never overlap, in an arena too large to reach a wall.
    FastLinear,
    /// Random turns and speed jumps with occlusion bursts.
    Irregular,
    /// Many slow objects sharing a small arena.
    Crowded,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::FastLinear, Preset::Irregular, Preset::Crowded];

    pub fn name(self) -> &'static str {
        match self {
            Preset::FastLinear => "fast-linear",
            Preset::Irregular => "irregular",
            Preset::Crowded => "crowded",
        }
    }

    pub fn spec(self, seed: u64) -> ScenarioSpec {
        match self {
            Preset::FastLinear => ScenarioSpec {
                num_objects: 20,
                num_frames: 300,
                arena: (40_000.0, 40_000.0),
                speed_range: (30.0, 34.0),
                turn_prob: 0.0,
                size_range: (19.5, 20.5),
                occlusion: None,
                seed,
                spawn_fraction: 0.1,
            },
            Preset::Irregular => ScenarioSpec {
                num_objects: 15,
                num_frames: 300,
                arena: (1280.0, 768.0),
                speed_range: (5.0, 25.0),
                turn_prob: 0.05,
                size_range: (30.0, 60.0),
                occlusion: Some(OcclusionSpec { probability: 0.02, duration: (3, 10) }),
                seed,
                spawn_fraction: 1.0,
            },
            Preset::Crowded => ScenarioSpec {
                num_objects: 80,
                num_frames: 300,
                arena: (1280.0, 768.0),
                speed_range: (2.0, 12.0),
                turn_prob: 0.02,
                size_range: (30.0, 60.0),
                occlusion: None,
                seed,
                spawn_fraction: 1.0,
            },
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown preset {s:?}, expected fast-linear, irregular or crowded")))
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub gt: SequenceAnnotations,
    /// Ground-truth boxes at confidence 1, minus occluded frames.
    pub detections: DetectionSequence,
}

fn sample(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Fold `pos` back into `[0, max]` by mirror reflection, flipping `vel`
/// once per bounce.
fn reflect(pos: &mut f64, vel: &mut f64, max: f64) {
    for _ in 0..64 {
        if *pos < 0.0 {
            *pos = -*pos;
            *vel = -*vel;
        } else if *pos > max {
            *pos = 2.0 * max - *pos;
            *vel = -*vel;
        } else {
            return;
        }
    }
    *pos = pos.clamp(0.0, max);
}

pub fn generate(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let mut gt = SequenceAnnotations::new();
    let mut detections = DetectionSequence::new();
    let (aw, ah) = spec.arena;

    for obj in 0..spec.num_objects {
        // One stream per object, so objects do not depend on each other.
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(obj as u64 + 1);

        let w = sample(&mut rng, spec.size_range);
        let h = sample(&mut rng, spec.size_range);
        let (max_x, max_y) = (aw - w, ah - h);
        let start = |rng: &mut ChaCha8Rng, max: f64| {
            let half = spec.spawn_fraction * max / 2.0;
            sample(rng, (max / 2.0 - half, max / 2.0 + half))
        };
        let mut x = start(&mut rng, max_x);
        let mut y = start(&mut rng, max_y);
        let heading = |rng: &mut ChaCha8Rng| {
            let speed = sample(rng, spec.speed_range);
            let theta = rng.random_range(0.0..TAU);
            (speed * theta.cos(), speed * theta.sin())
        };
        let (mut vx, mut vy) = heading(&mut rng);
        let mut occluded_left = 0u32;
        let id = obj as i64 + 1;

        for frame in 1..=spec.num_frames {
            if frame > 1 {
                if spec.turn_prob > 0.0 && rng.random_bool(spec.turn_prob) {
                    (vx, vy) = heading(&mut rng);
                }
                x += vx;
                y += vy;
                reflect(&mut x, &mut vx, max_x);
                reflect(&mut y, &mut vy, max_y);
            }
            let bbox = BoundingBox::new(x, y, w, h)?;
            gt.insert(frame, id, bbox)?;

            let mut visible = true;
            if let Some(occ) = &spec.occlusion {
                if occluded_left == 0 && frame > 1 && occ.probability > 0.0 && rng.random_bool(occ.probability) {
                    occluded_left = rng.random_range(occ.duration.0..=occ.duration.1);
                }
                if occluded_left > 0 {
                    occluded_left -= 1;
                    visible = false;
                }
            }
            if visible {
                detections
                    .entry(frame)
                    .or_default()
                    .push(Detection::new(frame, bbox, 1.0)?);
            }
        }
    }
    Ok(Scenario { gt, detections })
}

/// Ground truth turned into detections at confidence 1.
pub fn oracle_detections(gt: &SequenceAnnotations) -> Result<DetectionSequence> {
    let mut dets = DetectionSequence::new();
    for (&frame, entries) in gt.frames() {
        let mut sorted = entries.clone();
        sorted.sort_by_key(|e| e.0);
        for (_, b) in sorted {
            dets.entry(frame).or_default().push(Detection::new(frame, b, 1.0)?);
        }
    }
    Ok(dets)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Share of detections replaced, in `[0, 1)`.
    pub ratio: f64,
    pub seed: u64,
    /// Remove `round(ratio * n)` per frame instead of sampling globally.
    #[serde(default)]
    pub stratified: bool,
}

impl NoiseSpec {
    pub fn new(ratio: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            ratio,
            seed,
            stratified: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.ratio) {
            return Err(Error::invalid(format!(
                "noise ratio must lie in [0, 1), got {}",
                self.ratio
            )));
        }
        Ok(())
    }
}

/// Largest IoU a false positive may have with any ground-truth box in its
/// frame.
pub const FP_MAX_IOU: f64 = 0.2;
pub const FP_MAX_ATTEMPTS: usize = 1000;

/// Remove detections (false negatives) and add the same number of
/// distractor boxes (false positives).
///
/// Each false positive lands in the frame of one removed detection, takes
/// the size of a randomly drawn ground-truth box and is placed uniformly
/// inside the ground-truth extent until its IoU with every ground-truth box
/// of that frame is below [`FP_MAX_IOU`].
pub fn perturb(
    detections: &DetectionSequence,
    noise: &NoiseSpec,
    gt: &SequenceAnnotations,
) -> Result<DetectionSequence> {
    noise.validate()?;
    let flat: Vec<(u32, usize)> = detections
        .iter()
        .flat_map(|(&f, list)| (0..list.len()).map(move |i| (f, i)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    rng.set_stream(u64::MAX);

    let removed: BTreeSet<usize> = if noise.stratified {
        let mut picked = BTreeSet::new();
        let mut offset = 0;
        for list in detections.values() {
            let k = (noise.ratio * list.len() as f64).round() as usize;
            picked.extend(index::sample(&mut rng, list.len(), k).into_iter().map(|i| offset + i));
            offset += list.len();
        }
        picked
    } else {
        let k = (noise.ratio * flat.len() as f64).round() as usize;
        index::sample(&mut rng, flat.len(), k).into_iter().collect()
    };
    if removed.is_empty() {
        return Ok(detections.clone());
    }

    let det_boxes = || detections.values().flatten().map(|d| d.bbox);
    let gt_boxes: Vec<BoundingBox> = gt.frames().values().flatten().map(|e| e.1).collect();
    let reference: Vec<BoundingBox> = if gt_boxes.is_empty() {
        det_boxes().collect()
    } else {
        gt_boxes
    };
    let x0 = reference.iter().map(|b| b.x()).fold(f64::INFINITY, f64::min);
    let y0 = reference.iter().map(|b| b.y()).fold(f64::INFINITY, f64::min);
    let x1 = reference.iter().map(|b| b.x2()).fold(f64::NEG_INFINITY, f64::max);
    let y1 = reference.iter().map(|b| b.y2()).fold(f64::NEG_INFINITY, f64::max);

    let mut out = DetectionSequence::new();
    for (i, &(f, j)) in flat.iter().enumerate() {
        if !removed.contains(&i) {
            out.entry(f).or_default().push(detections[&f][j]);
        }
    }
    for &i in &removed {
        let frame = flat[i].0;
        let frame_gt = gt.frame(frame);
        let mut placed = None;
        for _ in 0..FP_MAX_ATTEMPTS {
            let size = reference[rng.random_range(0..reference.len())];
            let (w, h) = (size.w(), size.h());
            let x = sample(&mut rng, (x0, (x1 - w).max(x0)));
            let y = sample(&mut rng, (y0, (y1 - h).max(y0)));
            let candidate = BoundingBox::new(x, y, w, h)?;
            if frame_gt.iter().all(|(_, g)| iou(&candidate, g) < FP_MAX_IOU) {
                placed = Some(candidate);
                break;
            }
        }
        let bbox = placed.ok_or(Error::Generation {
            frame,
            attempts: FP_MAX_ATTEMPTS,
        })?;
        out.entry(frame).or_default().push(Detection::new(frame, bbox, 1.0)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ScenarioSpec {
        ScenarioSpec {
            num_objects: 8,
            num_frames: 60,
            arena: (640.0, 480.0),
            speed_range: (3.0, 12.0),
            turn_prob: 0.1,
            size_range: (20.0, 40.0),
            occlusion: Some(OcclusionSpec { probability: 0.05, duration: (2, 5) }),
            seed: 42,
            spawn_fraction: 1.0,
        }
    }

    fn det_count(d: &DetectionSequence) -> usize {
        d.values().map(Vec::len).sum()
    }

    #[test]
    fn zero_objects() {
        let s = generate(&ScenarioSpec { num_objects: 0, ..small_spec() }).unwrap();
        assert!(s.gt.is_empty());
        assert!(s.detections.is_empty());
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate(&small_spec()).unwrap();
        let b = generate(&small_spec()).unwrap();
        assert_eq!(a, b);
        let c = generate(&ScenarioSpec { seed: 43, ..small_spec() }).unwrap();
        assert_ne!(a.gt, c.gt);
    }

    #[test]
    fn straight_lines_without_turns() {
        let spec = ScenarioSpec {
            turn_prob: 0.0,
            occlusion: None,
            arena: (100_000.0, 100_000.0),
            spawn_fraction: 0.1,
            ..small_spec()
        };
        let s = generate(&spec).unwrap();
        for id in 1..=spec.num_objects as i64 {
            let centers: Vec<(f64, f64)> = (1..=spec.num_frames)
                .map(|f| s.gt.frame(f).iter().find(|e| e.0 == id).unwrap().1.center())
                .collect();
            for w in centers.windows(3) {
                assert!((w[2].0 - 2.0 * w[1].0 + w[0].0).abs() < 1e-9);
                assert!((w[2].1 - 2.0 * w[1].1 + w[0].1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gt_stays_in_arena_and_occlusion_removes_detections() {
        let spec = small_spec();
        let s = generate(&spec).unwrap();
        for entries in s.gt.frames().values() {
            for (_, b) in entries {
                assert!(b.x() >= 0.0 && b.y() >= 0.0);
                assert!(b.x2() <= spec.arena.0 + 1e-9 && b.y2() <= spec.arena.1 + 1e-9);
            }
        }
        s.gt.validate().unwrap();
        assert_eq!(s.gt.box_count(), spec.num_objects * spec.num_frames as usize);
        assert!(det_count(&s.detections) < s.gt.box_count());
        assert_eq!(s.detections[&1].len(), spec.num_objects);
    }

    #[test]
    fn rejects_infeasible_specs() {
        assert!(generate(&ScenarioSpec { size_range: (20.0, 700.0), ..small_spec() }).is_err());
        assert!(generate(&ScenarioSpec { turn_prob: 1.5, ..small_spec() }).is_err());
        assert!(generate(&ScenarioSpec { speed_range: (5.0, 1.0), ..small_spec() }).is_err());
        assert!(generate(&ScenarioSpec { spawn_fraction: 0.0, ..small_spec() }).is_err());
    }

    fn hundred_detections() -> (SequenceAnnotations, DetectionSequence) {
        let spec = ScenarioSpec { num_objects: 4, num_frames: 25, occlusion: None, ..small_spec() };
        let s = generate(&spec).unwrap();
        assert_eq!(det_count(&s.detections), 100);
        (s.gt, s.detections)
    }

    #[test]
    fn presets_are_valid_and_named() {
        for p in Preset::ALL {
            p.spec(0).validate().unwrap();
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("sideways".parse::<Preset>().is_err());
    }

    #[test]
    fn zero_ratio_is_identity() {
        let (gt, dets) = hundred_detections();
        assert_eq!(perturb(&dets, &NoiseSpec::new(0.0, 1).unwrap(), &gt).unwrap(), dets);
    }

    #[test]
    fn replaces_requested_share() {
        let (gt, dets) = hundred_detections();
        for (ratio, kept) in [(0.2, 80), (0.4, 60)] {
            let out = perturb(&dets, &NoiseSpec::new(ratio, 9).unwrap(), &gt).unwrap();
            assert_eq!(det_count(&out), 100);
            let originals: usize = out
                .iter()
                .map(|(f, list)| list.iter().filter(|d| dets[f].contains(d)).count())
                .sum();
            assert_eq!(originals, kept);
            for (&f, list) in &out {
                for d in list.iter().filter(|d| !dets[&f].contains(d)) {
                    assert!(gt.frame(f).iter().all(|(_, g)| iou(&d.bbox, g) < FP_MAX_IOU));
                }
            }
        }
    }

    #[test]
    fn perturb_is_seeded() {
        let (gt, dets) = hundred_detections();
        let a = perturb(&dets, &NoiseSpec::new(0.3, 5).unwrap(), &gt).unwrap();
        assert_eq!(a, perturb(&dets, &NoiseSpec::new(0.3, 5).unwrap(), &gt).unwrap());
        assert_ne!(a, perturb(&dets, &NoiseSpec::new(0.3, 6).unwrap(), &gt).unwrap());
    }

    #[test]
    fn rejects_full_ratio() {
        assert!(NoiseSpec::new(1.0, 0).is_err());
        assert!(NoiseSpec::new(-0.1, 0).is_err());
    }

    #[test]
    fn crowded_frame_fails_with_frame_number() {
        // A single GT box covering the whole extent leaves no room.
        let mut gt = SequenceAnnotations::new();
        gt.insert(1, 1, BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap()).unwrap();
        let dets = oracle_detections(&gt).unwrap();
        let mut dets2 = dets.clone();
        dets2.get_mut(&1).unwrap().push(dets[&1][0]);
        match perturb(&dets2, &NoiseSpec::new(0.5, 0).unwrap(), &gt) {
            Err(Error::Generation { frame: 1, attempts: FP_MAX_ATTEMPTS }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_ground_truth_uses_detection_extent() {
        let (_, dets) = hundred_detections();
        let all: Vec<BoundingBox> = dets.values().flatten().map(|d| d.bbox).collect();
        let x0 = all.iter().map(|b| b.x()).fold(f64::INFINITY, f64::min);
        let x1 = all.iter().map(|b| b.x2()).fold(f64::NEG_INFINITY, f64::max);
        let out = perturb(&dets, &NoiseSpec::new(0.3, 2).unwrap(), &SequenceAnnotations::new()).unwrap();
        assert_eq!(det_count(&out), 100);
        for d in out.values().flatten() {
            assert!(d.bbox.x() >= x0 - 1e-9 && d.bbox.x2() <= x1 + 1e-9);
        }
    }

    #[test]
    fn stratified_removal_is_per_frame() {
        let (gt, dets) = hundred_detections();
        let spec = NoiseSpec { ratio: 0.25, seed: 3, stratified: true };
        let out = perturb(&dets, &spec, &gt).unwrap();
        for (f, list) in &out {
            let originals = list.iter().filter(|d| dets[f].contains(d)).count();
            assert_eq!(originals, 3);
        }
    }
}
