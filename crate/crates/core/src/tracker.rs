//! The cascaded buffered-IoU tracker.
//!
//! Every frame runs the same pipeline: extrapolate alive tracks, match them
//! to detections with a small buffer, match the leftovers again with a large
//! buffer, then update, age, terminate and spawn tracks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assignment::{gated_match, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, CornerBox, SimilarityKind};
use crate::motion::{average_velocity, predict, MotionHistory, Velocity};

/// Tracker hyperparameters. Field names double as config-file keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// Buffer scale for the first association round.
    pub b1: f64,
    /// Buffer scale for the second round; unused without cascading.
    pub b2: f64,
    /// Consecutive unmatched frames a track survives.
    pub max_age: u32,
    /// Upper bound on the number of displacements averaged for motion.
    pub n_max: usize,
    /// Assigned pairs scoring below this are rejected.
    pub min_sim: f64,
    /// Detections below this confidence are dropped before matching.
    pub det_conf_min: f64,
    pub similarity_kind: SimilarityKind,
    pub cascade_enabled: bool,
    pub motion_enabled: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            b1: 0.3,
            b2: 0.4,
            max_age: 30,
            n_max: 5,
            min_sim: 1e-9,
            det_conf_min: 0.1,
            similarity_kind: SimilarityKind::Biou,
            cascade_enabled: true,
            motion_enabled: true,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let finite_scale = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        finite_scale("b1", self.b1)?;
        if self.cascade_enabled {
            finite_scale("b2", self.b2)?;
            if self.similarity_kind == SimilarityKind::Biou && self.b1 >= self.b2 {
                return Err(Error::invalid(format!(
                    "cascaded matching needs b1 < b2, got b1={} b2={}",
                    self.b1, self.b2
                )));
            }
        }
        if self.max_age < 1 {
            return Err(Error::invalid("max_age must be at least 1"));
        }
        if self.n_max < 2 {
            return Err(Error::invalid("n_max must be at least 2"));
        }
        if !self.min_sim.is_finite() {
            return Err(Error::invalid("min_sim must be finite"));
        }
        if !(0.0..=1.0).contains(&self.det_conf_min) {
            return Err(Error::invalid(format!(
                "det_conf_min must lie in [0, 1], got {}",
                self.det_conf_min
            )));
        }
        Ok(())
    }
}

/// Named tracker configurations of the ablation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Iou,
    Giou,
    Diou,
    Biou,
    CBiou,
    CBiouMotion,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Iou,
        Variant::Giou,
        Variant::Diou,
        Variant::Biou,
        Variant::CBiou,
        Variant::CBiouMotion,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Iou => "IoU",
            Variant::Giou => "GIoU",
            Variant::Diou => "DIoU",
            Variant::Biou => "BIoU",
            Variant::CBiou => "C-BIoU",
            Variant::CBiouMotion => "C-BIoU+motion",
        }
    }

    /// `base` with only the similarity kind and the two ablation switches
    /// replaced.
    pub fn configure(self, base: &TrackerConfig) -> TrackerConfig {
        let (kind, cascade, motion) = match self {
            Variant::Iou => (SimilarityKind::Iou, false, false),
            Variant::Giou => (SimilarityKind::Giou, false, false),
            Variant::Diou => (SimilarityKind::Diou, false, false),
            Variant::Biou => (SimilarityKind::Biou, false, false),
            Variant::CBiou => (SimilarityKind::Biou, true, false),
            Variant::CBiouMotion => (SimilarityKind::Biou, true, true),
        };
        TrackerConfig {
            similarity_kind: kind,
            cascade_enabled: cascade,
            motion_enabled: motion,
            ..*base
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame: u32,
    pub bbox: BoundingBox,
    pub confidence: f64,
}

impl Detection {
    pub fn new(frame: u32, bbox: BoundingBox, confidence: f64) -> Result<Self> {
        if frame < 1 {
            return Err(Error::invalid("frame indices start at 1"));
        }
        if !confidence.is_finite() {
            return Err(Error::invalid(format!("confidence must be finite, got {confidence}")));
        }
        Ok(Self {
            frame,
            bbox,
            confidence,
        })
    }
}

/// Detections keyed by frame index.
pub type DetectionSequence = BTreeMap<u32, Vec<Detection>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    id: u64,
    state: CornerBox,
    age: u32,
    history: MotionHistory,
    last_conf: f64,
    last_match_frame: u32,
    /// Velocity frozen at the last match.
    velocity: Velocity,
    degenerate: bool,
}

impl Track {
    pub fn id(&self) -> u64 {
        self.id
    }

    /// Current (possibly extrapolated) corner-form state.
    pub fn state(&self) -> CornerBox {
        self.state
    }

    pub fn age(&self) -> u32 {
        self.age
    }

    pub fn history(&self) -> &MotionHistory {
        &self.history
    }

    pub fn last_conf(&self) -> f64 {
        self.last_conf
    }

    pub fn last_match_frame(&self) -> u32 {
        self.last_match_frame
    }

    pub fn velocity(&self) -> Velocity {
        self.velocity
    }

    /// Whether the most recent extrapolation collapsed and was clamped.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    fn matched_box(&self) -> CornerBox {
        self.history
            .last()
            .map(|&(_, b)| b)
            .expect("a track always holds the detection it was born from")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub id: u64,
    pub bbox: BoundingBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameOutput {
    pub frame: u32,
    pub records: Vec<TrackRecord>,
}

/// Outcome of both association rounds, in indices of the inputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CascadeResult {
    pub round1: Vec<(usize, usize)>,
    pub round2: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
}

impl CascadeResult {
    pub fn matches(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.round1.iter().chain(self.round2.iter())
    }
}

/// Two-round association of predicted track boxes with detection boxes.
///
/// Round one scores every pair with buffer `b1`; round two rescores only
/// the round-one leftovers with buffer `b2`. Without cascading this is a
/// single round.
pub fn cascade_match(
    tracks: &[BoundingBox],
    detections: &[BoundingBox],
    config: &TrackerConfig,
) -> Result<CascadeResult> {
    let kind = config.similarity_kind;
    let sim = SimilarityMatrix::from_fn(tracks.len(), detections.len(), |t, d| {
        kind.score(&tracks[t], &detections[d], config.b1)
    })?;
    let first = gated_match(&sim, config.min_sim)?;
    if !config.cascade_enabled {
        return Ok(CascadeResult {
            round1: first.pairs,
            round2: Vec::new(),
            unmatched_tracks: first.unmatched_rows,
            unmatched_detections: first.unmatched_cols,
        });
    }

    let (rest_t, rest_d) = (&first.unmatched_rows, &first.unmatched_cols);
    let sim2 = SimilarityMatrix::from_fn(rest_t.len(), rest_d.len(), |t, d| {
        kind.score(&tracks[rest_t[t]], &detections[rest_d[d]], config.b2)
    })?;
    let second = gated_match(&sim2, config.min_sim)?;
    Ok(CascadeResult {
        round1: first.pairs,
        round2: second
            .pairs
            .iter()
            .map(|&(t, d)| (rest_t[t], rest_d[d]))
            .collect(),
        unmatched_tracks: second.unmatched_rows.iter().map(|&t| rest_t[t]).collect(),
        unmatched_detections: second.unmatched_cols.iter().map(|&d| rest_d[d]).collect(),
    })
}

/// Online tracker state for one sequence.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    tracks: Vec<Track>,
    next_id: u64,
    last_frame: Option<u32>,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Alive tracks in creation order.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.last_frame
    }

    /// Process one frame. Frames may be skipped; a skipped frame behaves
    /// like a frame without detections.
    pub fn step(&mut self, frame: u32, detections: &[Detection]) -> Result<FrameOutput> {
        if let Some(previous) = self.last_frame {
            if frame <= previous {
                return Err(Error::Sequencing { frame, previous });
            }
        }
        if frame < 1 {
            return Err(Error::invalid("frame indices start at 1"));
        }
        if let Some(d) = detections.iter().find(|d| d.frame != frame) {
            return Err(Error::invalid(format!(
                "detection for frame {} passed to frame {frame}",
                d.frame
            )));
        }
        self.last_frame = Some(frame);
        let max_age = self.config.max_age;
        // Tracks that went stale over skipped frames are dropped before
        // matching.
        self.tracks.retain(|t| frame - t.last_match_frame <= max_age);

        let dets: Vec<&Detection> = detections
            .iter()
            .filter(|d| d.confidence >= self.config.det_conf_min)
            .collect();

        // Extrapolate from the last matched box; coasting tracks keep the
        // velocity frozen at their last match.
        for track in &mut self.tracks {
            let anchor = track.matched_box();
            if self.config.motion_enabled && !track.velocity.is_zero() {
                let p = predict(&anchor, &track.velocity, frame - track.last_match_frame)?;
                track.state = p.state;
                track.degenerate = p.degenerate;
            } else {
                track.state = anchor;
                track.degenerate = false;
            }
        }

        let track_boxes = self
            .tracks
            .iter()
            .map(|t| t.state.to_bbox())
            .collect::<Result<Vec<_>>>()?;
        let det_boxes: Vec<BoundingBox> = dets.iter().map(|d| d.bbox).collect();
        let result = cascade_match(&track_boxes, &det_boxes, &self.config)?;

        let mut records = Vec::with_capacity(dets.len());
        for &(t, d) in result.matches() {
            let det = dets[d];
            let track = &mut self.tracks[t];
            let corners = det.bbox.to_corners();
            track.history.push(frame, corners)?;
            track.state = corners;
            track.velocity = average_velocity(&track.history);
            track.age = 0;
            track.last_match_frame = frame;
            track.last_conf = det.confidence;
            track.degenerate = false;
            records.push(TrackRecord {
                id: track.id,
                bbox: det.bbox,
                confidence: det.confidence,
            });
        }

        for track in &mut self.tracks {
            track.age = frame - track.last_match_frame;
        }
        self.tracks.retain(|t| t.age <= max_age);

        for &d in &result.unmatched_detections {
            let det = dets[d];
            let mut history = MotionHistory::new(self.config.n_max)?;
            let corners = det.bbox.to_corners();
            history.push(frame, corners)?;
            let id = self.next_id;
            self.next_id += 1;
            self.tracks.push(Track {
                id,
                state: corners,
                age: 0,
                history,
                last_conf: det.confidence,
                last_match_frame: frame,
                velocity: Velocity::ZERO,
                degenerate: false,
            });
            records.push(TrackRecord {
                id,
                bbox: det.bbox,
                confidence: det.confidence,
            });
        }

        records.sort_by_key(|r| r.id);
        Ok(FrameOutput { frame, records })
    }
}

/// Run a fresh tracker over a whole sequence, one output per input frame.
pub fn run_sequence(config: &TrackerConfig, detections: &DetectionSequence) -> Result<Vec<FrameOutput>> {
    let mut tracker = Tracker::new(*config)?;
    detections
        .iter()
        .map(|(&frame, dets)| tracker.step(frame, dets))
        .collect()
}

/// Fill gaps of at most `max_gap` missing frames inside each identity's
/// reported trajectory by linear interpolation between the bounding records.
pub fn interpolate_gaps(outputs: &[FrameOutput], max_gap: u32) -> Result<Vec<FrameOutput>> {
    let mut by_id: BTreeMap<u64, Vec<(u32, TrackRecord)>> = BTreeMap::new();
    for out in outputs {
        for r in &out.records {
            by_id.entry(r.id).or_default().push((out.frame, *r));
        }
    }
    let mut frames: BTreeMap<u32, Vec<TrackRecord>> = outputs
        .iter()
        .map(|o| (o.frame, o.records.clone()))
        .collect();
    for records in by_id.values() {
        for pair in records.windows(2) {
            let ((f0, a), (f1, b)) = (pair[0], pair[1]);
            let missing = f1 - f0 - 1;
            if missing == 0 || missing > max_gap {
                continue;
            }
            let (ca, cb) = (a.bbox.to_corners().to_array(), b.bbox.to_corners().to_array());
            for f in f0 + 1..f1 {
                let t = f64::from(f - f0) / f64::from(f1 - f0);
                let mut c = [0.0; 4];
                for k in 0..4 {
                    c[k] = ca[k] + t * (cb[k] - ca[k]);
                }
                let bbox = CornerBox::from_array(c).to_bbox()?;
                frames.entry(f).or_default().push(TrackRecord {
                    id: a.id,
                    bbox,
                    confidence: a.confidence.min(b.confidence),
                });
            }
        }
    }
    Ok(frames
        .into_iter()
        .map(|(frame, mut records)| {
            records.sort_by_key(|r| r.id);
            FrameOutput { frame, records }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::biou;

    fn bb(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(x, y, w, h).unwrap()
    }

    fn det(frame: u32, x: f64, y: f64, w: f64, h: f64) -> Detection {
        Detection::new(frame, bb(x, y, w, h), 1.0).unwrap()
    }

    fn ids(out: &FrameOutput) -> Vec<u64> {
        out.records.iter().map(|r| r.id).collect()
    }

    #[test]
    fn config_validation() {
        assert!(TrackerConfig::default().validate().is_ok());
        let bad = [
            TrackerConfig { b1: 0.4, b2: 0.4, ..Default::default() },
            TrackerConfig { b1: -0.1, ..Default::default() },
            TrackerConfig { max_age: 0, ..Default::default() },
            TrackerConfig { n_max: 1, ..Default::default() },
            TrackerConfig { det_conf_min: 1.5, ..Default::default() },
            TrackerConfig { min_sim: f64::NAN, ..Default::default() },
        ];
        for c in bad {
            assert!(Tracker::new(c).is_err(), "{c:?}");
        }
        // b2 is ignored without cascading.
        let single = TrackerConfig { b1: 0.5, b2: 0.1, cascade_enabled: false, ..Default::default() };
        assert!(single.validate().is_ok());
    }

    #[test]
    fn first_frame_spawns_all() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        let dets = [det(1, 0.0, 0.0, 10.0, 10.0), det(1, 50.0, 0.0, 10.0, 10.0), det(1, 100.0, 0.0, 10.0, 10.0)];
        let out = t.step(1, &dets).unwrap();
        assert_eq!(ids(&out), vec![1, 2, 3]);
        for (r, d) in out.records.iter().zip(&dets) {
            assert_eq!(r.bbox, d.bbox);
        }
    }

    #[test]
    fn buffered_match_bridges_non_overlap() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        let a = t.step(1, &[det(1, 0.0, 0.0, 10.0, 10.0)]).unwrap();
        let b = t.step(2, &[det(2, 12.0, 0.0, 10.0, 10.0)]).unwrap();
        assert_eq!(ids(&a), ids(&b));

        // Plain IoU cannot bridge the gap.
        let cfg = Variant::Iou.configure(&TrackerConfig::default());
        let mut t = Tracker::new(cfg).unwrap();
        let a = t.step(1, &[det(1, 0.0, 0.0, 10.0, 10.0)]).unwrap();
        let b = t.step(2, &[det(2, 12.0, 0.0, 10.0, 10.0)]).unwrap();
        assert_ne!(ids(&a), ids(&b));
    }

    #[test]
    fn termination_after_max_age() {
        let cfg = TrackerConfig { max_age: 3, ..Default::default() };
        let mut t = Tracker::new(cfg).unwrap();
        t.step(1, &[det(1, 0.0, 0.0, 10.0, 10.0)]).unwrap();
        for f in 2..=4 {
            t.step(f, &[]).unwrap();
            assert_eq!(t.tracks().len(), 1);
            assert_eq!(t.tracks()[0].age(), f - 1);
        }
        t.step(5, &[]).unwrap();
        assert!(t.tracks().is_empty());
        let out = t.step(6, &[det(6, 0.0, 0.0, 10.0, 10.0)]).unwrap();
        assert_eq!(ids(&out), vec![2]);
    }

    #[test]
    fn skipped_frames_age_tracks() {
        let cfg = TrackerConfig { max_age: 3, ..Default::default() };
        let mut t = Tracker::new(cfg).unwrap();
        t.step(1, &[det(1, 0.0, 0.0, 10.0, 10.0)]).unwrap();
        let out = t.step(4, &[det(4, 0.0, 0.0, 10.0, 10.0)]).unwrap();
        assert_eq!(ids(&out), vec![1]);
        let out = t.step(9, &[det(9, 0.0, 0.0, 10.0, 10.0)]).unwrap();
        assert_eq!(ids(&out), vec![2]);
    }

    #[test]
    fn rejects_bad_sequencing() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        t.step(3, &[]).unwrap();
        assert!(matches!(t.step(3, &[]), Err(Error::Sequencing { .. })));
        assert!(matches!(t.step(2, &[]), Err(Error::Sequencing { .. })));
        assert!(t.step(4, &[det(5, 0.0, 0.0, 1.0, 1.0)]).is_err());
        assert!(Tracker::new(TrackerConfig::default()).unwrap().step(0, &[]).is_err());
    }

    #[test]
    fn low_confidence_detections_dropped() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        let weak = Detection::new(1, bb(0.0, 0.0, 5.0, 5.0), 0.05).unwrap();
        let out = t.step(1, &[weak, det(1, 20.0, 0.0, 5.0, 5.0)]).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].bbox, bb(20.0, 0.0, 5.0, 5.0));
    }

    #[test]
    fn cascade_fixtures() {
        let cfg = TrackerConfig { b1: 0.1, b2: 0.4, ..Default::default() };
        let r = cascade_match(&[], &[bb(0.0, 0.0, 1.0, 1.0), bb(5.0, 0.0, 1.0, 1.0)], &cfg).unwrap();
        assert_eq!(r.unmatched_detections, vec![0, 1]);
        assert!(r.round1.is_empty() && r.round2.is_empty());

        // Gap of 6 px: the b1 reach is 1 px per box, the b2 reach 4 px.
        let track = bb(0.0, 0.0, 10.0, 10.0);
        let detection = bb(16.0, 0.0, 10.0, 10.0);
        assert_eq!(biou(&track, &detection, 0.1).unwrap(), 0.0);
        assert!(biou(&track, &detection, 0.4).unwrap() > 0.0);
        let r = cascade_match(&[track], &[detection], &cfg).unwrap();
        assert!(r.round1.is_empty());
        assert_eq!(r.round2, vec![(0, 0)]);

        let single = TrackerConfig { cascade_enabled: false, ..cfg };
        let r = cascade_match(&[track], &[detection], &single).unwrap();
        assert!(r.round1.is_empty() && r.round2.is_empty());
        assert_eq!((r.unmatched_tracks, r.unmatched_detections), (vec![0], vec![0]));
    }

    #[test]
    fn coasting_follows_frozen_velocity() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        for f in 1..=4u32 {
            let x = 3.0 * f64::from(f);
            t.step(f, &[det(f, x, 0.0, 10.0, 10.0)]).unwrap();
        }
        let last = bb(12.0, 0.0, 10.0, 10.0).to_corners();
        let v = t.tracks()[0].velocity();
        assert_eq!(v, Velocity { dx1: 3.0, dy1: 0.0, dx2: 3.0, dy2: 0.0 });
        for gap in 1..=6u32 {
            t.step(4 + gap, &[]).unwrap();
            let expected = predict(&last, &v, gap).unwrap().state;
            assert_eq!(t.tracks()[0].state(), expected);
            assert_eq!(t.tracks()[0].velocity(), v);
        }
        // The object reappears where the extrapolation put it.
        let out = t.step(11, &[det(11, 33.0, 0.0, 10.0, 10.0)]).unwrap();
        assert_eq!(ids(&out), vec![1]);
    }

    #[test]
    fn without_motion_state_stays_at_last_match() {
        let cfg = Variant::CBiou.configure(&TrackerConfig::default());
        let mut t = Tracker::new(cfg).unwrap();
        for f in 1..=3u32 {
            t.step(f, &[det(f, 5.0 * f64::from(f), 0.0, 10.0, 10.0)]).unwrap();
        }
        t.step(4, &[]).unwrap();
        assert_eq!(t.tracks()[0].state(), bb(15.0, 0.0, 10.0, 10.0).to_corners());
    }

    #[test]
    fn variants_only_touch_switches() {
        let base = TrackerConfig { max_age: 7, b1: 0.2, b2: 0.5, ..Default::default() };
        for v in Variant::ALL {
            let c = v.configure(&base);
            assert_eq!((c.b1, c.b2, c.max_age, c.n_max, c.min_sim, c.det_conf_min),
                (base.b1, base.b2, base.max_age, base.n_max, base.min_sim, base.det_conf_min));
        }
        let iou = Variant::Iou.configure(&base);
        assert_eq!((iou.similarity_kind, iou.cascade_enabled, iou.motion_enabled), (SimilarityKind::Iou, false, false));
    }

    #[test]
    fn run_sequence_basics() {
        assert!(run_sequence(&TrackerConfig::default(), &DetectionSequence::new()).unwrap().is_empty());
        let mut seq = DetectionSequence::new();
        for f in 1..=200u32 {
            seq.insert(f, vec![det(f, 2.0 * f64::from(f), 1.5 * f64::from(f), 20.0, 30.0)]);
        }
        let out = run_sequence(&TrackerConfig::default(), &seq).unwrap();
        assert_eq!(out.len(), 200);
        assert!(out.iter().all(|o| ids(o) == vec![1]));
    }

    #[test]
    fn interpolation_fills_short_gaps() {
        let rec = |id, x: f64| TrackRecord { id, bbox: bb(x, 0.0, 10.0, 10.0), confidence: 1.0 };
        let outputs = vec![
            FrameOutput { frame: 1, records: vec![rec(1, 0.0)] },
            FrameOutput { frame: 4, records: vec![rec(1, 30.0)] },
            FrameOutput { frame: 20, records: vec![rec(1, 40.0)] },
        ];
        let filled = interpolate_gaps(&outputs, 5).unwrap();
        let frames: Vec<u32> = filled.iter().map(|o| o.frame).collect();
        assert_eq!(frames, vec![1, 2, 3, 4, 20]);
        assert!((filled[1].records[0].bbox.x() - 10.0).abs() < 1e-9);
        assert!((filled[2].records[0].bbox.x() - 20.0).abs() < 1e-9);
    }
}
