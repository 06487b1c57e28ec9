//! Tracking evaluation: HOTA (with DetA and AssA), CLEAR MOTA and IDF1.
//!
//! Every metric is computed from raw counts first. Counts from several
//! sequences can be pooled with [`EvalCounts::merge`] before the ratios are
//! taken, which is how multi-sequence scores are formed.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::assignment::{solve, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::geometry::{iou, BoundingBox};
use crate::tracker::FrameOutput;

/// Localization thresholds 0.05, 0.10, ..., 0.95.
pub fn alpha_grid() -> Vec<f64> {
    (1..=19).map(|k| f64::from(k) / 20.0).collect()
}

/// Slack on threshold comparisons so an IoU that is mathematically equal to
/// a threshold is not lost to rounding.
const THRESHOLD_SLACK: f64 = 1e-12;

/// Labeled boxes per frame, for ground truth or tracker output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SequenceAnnotations {
    frames: BTreeMap<u32, Vec<(i64, BoundingBox)>>,
}

impl SequenceAnnotations {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from a frame map, rejecting repeated identities within a frame.
    pub fn from_frames(frames: BTreeMap<u32, Vec<(i64, BoundingBox)>>) -> Result<Self> {
        let s = Self { frames };
        s.validate()?;
        Ok(s)
    }

    pub fn insert(&mut self, frame: u32, id: i64, bbox: BoundingBox) -> Result<()> {
        let entries = self.frames.entry(frame).or_default();
        if entries.iter().any(|&(other, _)| other == id) {
            return Err(Error::DuplicateIdentity { frame, id });
        }
        entries.push((id, bbox));
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (&frame, entries) in &self.frames {
            let mut seen = BTreeSet::new();
            for &(id, _) in entries {
                if !seen.insert(id) {
                    return Err(Error::DuplicateIdentity { frame, id });
                }
            }
        }
        Ok(())
    }

    pub fn frames(&self) -> &BTreeMap<u32, Vec<(i64, BoundingBox)>> {
        &self.frames
    }

    pub fn frame(&self, frame: u32) -> &[(i64, BoundingBox)] {
        self.frames.get(&frame).map_or(&[], Vec::as_slice)
    }

    pub fn box_count(&self) -> usize {
        self.frames.values().map(Vec::len).sum()
    }

    pub fn identities(&self) -> BTreeSet<i64> {
        self.frames.values().flatten().map(|&(id, _)| id).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.box_count() == 0
    }

    pub fn from_outputs(outputs: &[FrameOutput]) -> Result<Self> {
        let mut s = Self::new();
        for out in outputs {
            for r in &out.records {
                s.insert(out.frame, r.id as i64, r.bbox)?;
            }
        }
        Ok(s)
    }
}

/// One frame's ground-truth and predicted boxes with their pairwise IoU.
struct FramePair {
    gt_ids: Vec<i64>,
    pred_ids: Vec<i64>,
    /// `(gt index, pred index, iou)` for every overlapping pair.
    overlaps: Vec<(usize, usize, f64)>,
}

fn pair_frames(gt: &SequenceAnnotations, pred: &SequenceAnnotations) -> Result<Vec<FramePair>> {
    gt.validate()?;
    pred.validate()?;
    let frames: BTreeSet<u32> = gt.frames.keys().chain(pred.frames.keys()).copied().collect();
    Ok(frames
        .into_iter()
        .map(|f| {
            let (g, p) = (gt.frame(f), pred.frame(f));
            let mut overlaps = Vec::new();
            for (gi, (_, gb)) in g.iter().enumerate() {
                for (pi, (_, pb)) in p.iter().enumerate() {
                    let v = iou(gb, pb);
                    if v > 0.0 {
                        overlaps.push((gi, pi, v));
                    }
                }
            }
            FramePair {
                gt_ids: g.iter().map(|e| e.0).collect(),
                pred_ids: p.iter().map(|e| e.0).collect(),
                overlaps,
            }
        })
        .collect())
}

type Component = (Vec<usize>, Vec<usize>, Vec<(usize, usize, f64)>);

/// Maximum-weight matching over the listed `(row, col, weight)` edges, all
/// of which must have positive weight.
///
/// Solved separately on each connected component of the edge graph.
fn positive_matching(rows: usize, cols: usize, edges: &[(usize, usize, f64)]) -> Vec<(usize, usize)> {
    if edges.is_empty() {
        return Vec::new();
    }
    // Union-find over rows `0..rows` and columns `rows..rows + cols`.
    let mut parent: Vec<usize> = (0..rows + cols).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(r, c, _) in edges {
        let (a, b) = (find(&mut parent, r), find(&mut parent, rows + c));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    // Component root -> (rows, cols, edges), each in first-seen order.
    let mut components: BTreeMap<usize, Component> = BTreeMap::new();
    for &(r, c, w) in edges {
        let root = find(&mut parent, r);
        let comp = components.entry(root).or_default();
        if !comp.0.contains(&r) {
            comp.0.push(r);
        }
        if !comp.1.contains(&c) {
            comp.1.push(c);
        }
        comp.2.push((r, c, w));
    }
    let mut pairs = Vec::new();
    for (mut rs, mut cs, es) in components.into_values() {
        match (rs.len(), cs.len()) {
            (1, 1) => pairs.push((rs[0], cs[0])),
            (nr, nc) => {
                rs.sort_unstable();
                cs.sort_unstable();
                let mut values = vec![0.0; nr * nc];
                for (r, c, w) in es {
                    let (i, j) = (rs.binary_search(&r).unwrap(), cs.binary_search(&c).unwrap());
                    values[i * nc + j] = w;
                }
                let sim = SimilarityMatrix::new(nr, nc, values).expect("weights are finite");
                // With non-negative weights the full-cardinality optimum
                // restricted to its positive entries is a maximum-weight
                // matching.
                pairs.extend(
                    solve(&sim)
                        .into_iter()
                        .filter(|&(i, j)| sim.get(i, j) > 0.0)
                        .map(|(i, j)| (rs[i], cs[j])),
                );
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClearCounts {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub idsw: u64,
    pub gt_total: u64,
}

impl ClearCounts {
    /// `1 - (FN + FP + IDSW) / GT`; not clamped, so it can go negative.
    pub fn mota(&self) -> f64 {
        1.0 - (self.fn_ + self.fp + self.idsw) as f64 / self.gt_total.max(1) as f64
    }

    pub fn merge(&mut self, o: &ClearCounts) {
        self.tp += o.tp;
        self.fn_ += o.fn_;
        self.fp += o.fp;
        self.idsw += o.idsw;
        self.gt_total += o.gt_total;
    }
}

fn clear_counts(frames: &[FramePair], threshold: f64) -> ClearCounts {
    let mut c = ClearCounts::default();
    // Last prediction ever matched to each GT id, and the one matched in the
    // immediately preceding frame.
    let mut last_match: HashMap<i64, i64> = HashMap::new();
    let mut prev_frame: HashMap<i64, i64> = HashMap::new();
    for fp in frames {
        let (ng, np) = (fp.gt_ids.len(), fp.pred_ids.len());
        c.gt_total += ng as u64;
        let edges: Vec<_> = fp
            .overlaps
            .iter()
            .filter(|e| e.2 + THRESHOLD_SLACK >= threshold)
            .map(|&(g, p, s)| {
                // Keep existing correspondences ahead of any new pairing.
                let bonus = if prev_frame.get(&fp.gt_ids[g]) == Some(&fp.pred_ids[p]) { 1000.0 } else { 0.0 };
                (g, p, bonus + s)
            })
            .collect();
        let pairs = positive_matching(ng, np, &edges);
        let mut current = HashMap::with_capacity(pairs.len());
        for &(g, p) in &pairs {
            let (gid, pid) = (fp.gt_ids[g], fp.pred_ids[p]);
            if let Some(&prev) = last_match.get(&gid) {
                if prev != pid {
                    c.idsw += 1;
                }
            }
            last_match.insert(gid, pid);
            current.insert(gid, pid);
        }
        prev_frame = current;
        c.tp += pairs.len() as u64;
        c.fn_ += (ng - pairs.len()) as u64;
        c.fp += (np - pairs.len()) as u64;
    }
    c
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCounts {
    pub idtp: u64,
    pub idfn: u64,
    pub idfp: u64,
}

impl IdentityCounts {
    pub fn idf1(&self) -> f64 {
        2.0 * self.idtp as f64 / (2 * self.idtp + self.idfn + self.idfp).max(1) as f64
    }

    pub fn merge(&mut self, o: &IdentityCounts) {
        self.idtp += o.idtp;
        self.idfn += o.idfn;
        self.idfp += o.idfp;
    }
}

/// Frames in which each (gt id, pred id) pair overlaps by at least the
/// threshold, plus per-side totals.
struct CoOccurrence {
    gt_ids: Vec<i64>,
    pred_ids: Vec<i64>,
    counts: Vec<u64>,
    gt_total: u64,
    pred_total: u64,
}

fn co_occurrence(frames: &[FramePair], threshold: f64) -> CoOccurrence {
    let gt_ids: Vec<i64> = frames
        .iter()
        .flat_map(|f| f.gt_ids.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pred_ids: Vec<i64> = frames
        .iter()
        .flat_map(|f| f.pred_ids.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let gi: HashMap<i64, usize> = gt_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let pi: HashMap<i64, usize> = pred_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut counts = vec![0u64; gt_ids.len() * pred_ids.len()];
    let (mut gt_total, mut pred_total) = (0, 0);
    for f in frames {
        gt_total += f.gt_ids.len() as u64;
        pred_total += f.pred_ids.len() as u64;
        for &(g, p, v) in &f.overlaps {
            if v + THRESHOLD_SLACK >= threshold {
                counts[gi[&f.gt_ids[g]] * pred_ids.len() + pi[&f.pred_ids[p]]] += 1;
            }
        }
    }
    CoOccurrence {
        gt_ids,
        pred_ids,
        counts,
        gt_total,
        pred_total,
    }
}

fn identity_counts(frames: &[FramePair], threshold: f64) -> IdentityCounts {
    let co = co_occurrence(frames, threshold);
    let np = co.pred_ids.len();
    let edges: Vec<_> = (0..co.gt_ids.len())
        .flat_map(|g| (0..np).map(move |p| (g, p)))
        .filter_map(|(g, p)| {
            let n = co.counts[g * np + p];
            (n > 0).then_some((g, p, n as f64))
        })
        .collect();
    let pairs = positive_matching(co.gt_ids.len(), np, &edges);
    let idtp: u64 = pairs.iter().map(|&(g, p)| co.counts[g * np + p]).sum();
    IdentityCounts {
        idtp,
        idfn: co.gt_total - idtp,
        idfp: co.pred_total - idtp,
    }
}

/// Raw HOTA tallies at one localization threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaCounts {
    pub alpha: f64,
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    /// Sum of the association score over all true positives.
    pub assa_sum: f64,
}

impl AlphaCounts {
    pub fn deta(&self) -> f64 {
        self.tp as f64 / (self.tp + self.fn_ + self.fp).max(1) as f64
    }

    pub fn assa(&self) -> f64 {
        self.assa_sum / self.tp.max(1) as f64
    }

    pub fn hota(&self) -> f64 {
        (self.deta() * self.assa()).sqrt()
    }
}

fn hota_counts(frames: &[FramePair]) -> Vec<AlphaCounts> {
    let mut gt_len: HashMap<i64, u64> = HashMap::new();
    let mut pred_len: HashMap<i64, u64> = HashMap::new();
    for f in frames {
        for &g in &f.gt_ids {
            *gt_len.entry(g).or_default() += 1;
        }
        for &p in &f.pred_ids {
            *pred_len.entry(p).or_default() += 1;
        }
    }
    let gt_boxes: u64 = gt_len.values().sum();
    let pred_boxes: u64 = pred_len.values().sum();

    alpha_grid()
        .into_iter()
        .map(|alpha| {
            let mut matched: HashMap<(i64, i64), u64> = HashMap::new();
            let mut tp = 0u64;
            for f in frames {
                let edges: Vec<_> = f
                    .overlaps
                    .iter()
                    .copied()
                    .filter(|e| e.2 + THRESHOLD_SLACK >= alpha)
                    .collect();
                let pairs = positive_matching(f.gt_ids.len(), f.pred_ids.len(), &edges);
                tp += pairs.len() as u64;
                for (g, p) in pairs {
                    *matched.entry((f.gt_ids[g], f.pred_ids[p])).or_default() += 1;
                }
            }
            // Sum per distinct pair: each of its TPA frames contributes the
            // same association score. Sorted so the float sum is reproducible.
            let mut pairs: Vec<_> = matched.into_iter().collect();
            pairs.sort_unstable();
            let assa_sum = pairs
                .iter()
                .map(|&((g, p), tpa)| {
                    let fna = gt_len[&g] - tpa;
                    let fpa = pred_len[&p] - tpa;
                    tpa as f64 * (tpa as f64 / (tpa + fna + fpa) as f64)
                })
                .sum();
            AlphaCounts {
                alpha,
                tp,
                fn_: gt_boxes - tp,
                fp: pred_boxes - tp,
                assa_sum,
            }
        })
        .collect()
}

/// All raw tallies for one or more pooled sequences.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub clear: ClearCounts,
    pub identity: IdentityCounts,
    pub hota: Vec<AlphaCounts>,
}

impl EvalCounts {
    pub fn merge(&mut self, o: &EvalCounts) {
        self.clear.merge(&o.clear);
        self.identity.merge(&o.identity);
        if self.hota.is_empty() {
            self.hota = o.hota.clone();
            return;
        }
        for (a, b) in self.hota.iter_mut().zip(&o.hota) {
            a.tp += b.tp;
            a.fn_ += b.fn_;
            a.fp += b.fp;
            a.assa_sum += b.assa_sum;
        }
    }

    pub fn report(&self) -> MetricsReport {
        let per_alpha: Vec<AlphaScores> = self
            .hota
            .iter()
            .map(|a| AlphaScores {
                alpha: a.alpha,
                hota: a.hota(),
                deta: a.deta(),
                assa: a.assa(),
            })
            .collect();
        let mean = |f: fn(&AlphaScores) -> f64| {
            if per_alpha.is_empty() {
                0.0
            } else {
                per_alpha.iter().map(f).sum::<f64>() / per_alpha.len() as f64
            }
        };
        MetricsReport {
            hota: mean(|a| a.hota),
            deta: mean(|a| a.deta),
            assa: mean(|a| a.assa),
            mota: self.clear.mota(),
            idf1: self.identity.idf1(),
            tp: self.clear.tp,
            fn_: self.clear.fn_,
            fp: self.clear.fp,
            idsw: self.clear.idsw,
            gt_total: self.clear.gt_total,
            per_alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaScores {
    pub alpha: f64,
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
}

/// Final scores as fractions in `[0, 1]` (MOTA may be negative) plus the
/// CLEAR counts behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
    pub mota: f64,
    pub idf1: f64,
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub idsw: u64,
    pub gt_total: u64,
    pub per_alpha: Vec<AlphaScores>,
}

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// Raw tallies for one sequence at the default 0.5 IoU threshold for CLEAR
/// and identity matching.
pub fn accumulate(gt: &SequenceAnnotations, pred: &SequenceAnnotations) -> Result<EvalCounts> {
    let frames = pair_frames(gt, pred)?;
    Ok(EvalCounts {
        clear: clear_counts(&frames, DEFAULT_IOU_THRESHOLD),
        identity: identity_counts(&frames, DEFAULT_IOU_THRESHOLD),
        hota: hota_counts(&frames),
    })
}

pub fn evaluate(gt: &SequenceAnnotations, pred: &SequenceAnnotations) -> Result<MetricsReport> {
    Ok(accumulate(gt, pred)?.report())
}

/// Pool raw counts over several `(gt, pred)` sequences, then score.
pub fn evaluate_many<'a>(
    pairs: impl IntoIterator<Item = (&'a SequenceAnnotations, &'a SequenceAnnotations)>,
) -> Result<MetricsReport> {
    let mut total = EvalCounts::default();
    for (gt, pred) in pairs {
        total.merge(&accumulate(gt, pred)?);
    }
    Ok(total.report())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearScores {
    pub mota: f64,
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub idsw: u64,
}

pub fn clear_mota(
    gt: &SequenceAnnotations,
    pred: &SequenceAnnotations,
    iou_threshold: f64,
) -> Result<ClearScores> {
    let c = clear_counts(&pair_frames(gt, pred)?, iou_threshold);
    Ok(ClearScores {
        mota: c.mota(),
        tp: c.tp,
        fn_: c.fn_,
        fp: c.fp,
        idsw: c.idsw,
    })
}

pub fn idf1(gt: &SequenceAnnotations, pred: &SequenceAnnotations, iou_threshold: f64) -> Result<f64> {
    Ok(identity_counts(&pair_frames(gt, pred)?, iou_threshold).idf1())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HotaScores {
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
    pub per_alpha: Vec<AlphaScores>,
}

pub fn hota(gt: &SequenceAnnotations, pred: &SequenceAnnotations) -> Result<HotaScores> {
    let counts = EvalCounts {
        hota: hota_counts(&pair_frames(gt, pred)?),
        ..Default::default()
    };
    let r = counts.report();
    Ok(HotaScores {
        hota: r.hota,
        deta: r.deta,
        assa: r.assa,
        per_alpha: r.per_alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(x, y, w, h).unwrap()
    }

    fn seq(rows: &[(u32, i64, BoundingBox)]) -> SequenceAnnotations {
        let mut s = SequenceAnnotations::new();
        for &(f, id, b) in rows {
            s.insert(f, id, b).unwrap();
        }
        s
    }

    /// One GT identity over four frames; the prediction changes id at frame 3.
    fn id_switch_fixture() -> (SequenceAnnotations, SequenceAnnotations) {
        let b = |f: u32| bb(10.0 * f64::from(f), 0.0, 10.0, 10.0);
        let gt = seq(&(1..=4).map(|f| (f, 1, b(f))).collect::<Vec<_>>());
        let pred = seq(&(1..=4).map(|f| (f, if f < 3 { 7 } else { 8 }, b(f))).collect::<Vec<_>>());
        (gt, pred)
    }

    fn two_object_gt(frames: u32) -> SequenceAnnotations {
        let mut rows = Vec::new();
        for f in 1..=frames {
            rows.push((f, 1, bb(f64::from(f) * 3.0, 0.0, 10.0, 10.0)));
            rows.push((f, 2, bb(f64::from(f) * 3.0, 100.0, 10.0, 10.0)));
        }
        seq(&rows)
    }

    #[test]
    fn alpha_grid_shape() {
        let a = alpha_grid();
        assert_eq!(a.len(), 19);
        assert!((a[0] - 0.05).abs() < 1e-15 && (a[18] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn perfect_prediction() {
        let gt = two_object_gt(10);
        let r = evaluate(&gt, &gt).unwrap();
        for v in [r.hota, r.deta, r.assa, r.mota, r.idf1] {
            assert_eq!(v, 1.0);
        }
        assert_eq!((r.tp, r.fn_, r.fp, r.idsw, r.gt_total), (20, 0, 0, 0, 20));
        assert!(r.per_alpha.iter().all(|a| a.hota == 1.0 && a.deta == 1.0 && a.assa == 1.0));
    }

    #[test]
    fn empty_prediction() {
        let gt = two_object_gt(5);
        let r = evaluate(&gt, &SequenceAnnotations::new()).unwrap();
        assert_eq!((r.mota, r.idf1, r.hota), (0.0, 0.0, 0.0));
        assert_eq!(r.fn_, gt.box_count() as u64);
    }

    #[test]
    fn id_switch_fixture_scores() {
        let (gt, pred) = id_switch_fixture();
        let c = clear_mota(&gt, &pred, 0.5).unwrap();
        assert_eq!((c.mota, c.tp, c.fn_, c.fp, c.idsw), (0.75, 4, 0, 0, 1));
        assert_eq!(idf1(&gt, &pred, 0.5).unwrap(), 0.5);
        let h = hota(&gt, &pred).unwrap();
        for a in &h.per_alpha {
            assert_eq!(a.deta, 1.0);
            assert!((a.assa - 0.5).abs() < 1e-12);
            assert!((a.hota - (a.deta * a.assa).sqrt()).abs() < 1e-12);
        }
        assert!((h.hota - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spurious_box_every_frame() {
        let gt = seq(&(1..=10).map(|f| (f, 1, bb(0.0, 0.0, 10.0, 10.0))).collect::<Vec<_>>());
        let mut pred = gt.clone();
        for f in 1..=10 {
            pred.insert(f, 99, bb(500.0, 500.0, 10.0, 10.0)).unwrap();
        }
        let c = clear_mota(&gt, &pred, 0.5).unwrap();
        assert_eq!(c.fp, 10);
        assert_eq!(c.mota, 0.0);
    }

    #[test]
    fn uniform_partial_overlap_splits_alpha_regimes() {
        // Shifting a 10x10 box by 30/7 px gives IoU = (10 - s) / (10 + s) = 0.4.
        let shift = 30.0 / 7.0;
        let gt = seq(&(1..=5).map(|f| (f, 1, bb(0.0, 20.0 * f64::from(f), 10.0, 10.0))).collect::<Vec<_>>());
        let pred = seq(
            &(1..=5)
                .map(|f| (f, 1, bb(shift, 20.0 * f64::from(f), 10.0, 10.0)))
                .collect::<Vec<_>>(),
        );
        let i = iou(&gt.frame(1)[0].1, &pred.frame(1)[0].1);
        assert!((i - 0.4).abs() < 1e-12);
        let h = hota(&gt, &pred).unwrap();
        for a in &h.per_alpha {
            if a.alpha >= 0.45 {
                assert_eq!(a.deta, 0.0, "alpha {}", a.alpha);
                assert_eq!(a.hota, 0.0);
            } else {
                assert_eq!(a.deta, 1.0, "alpha {}", a.alpha);
                assert_eq!(a.hota, 1.0);
            }
        }
        // Eight thresholds (0.05..=0.40) pass.
        assert!((h.hota - 8.0 / 19.0).abs() < 1e-12);
        assert!(h.hota > 0.0 && h.hota < 1.0);
    }

    #[test]
    fn duplicate_identity_is_data_error() {
        let mut s = SequenceAnnotations::new();
        s.insert(1, 5, bb(0.0, 0.0, 1.0, 1.0)).unwrap();
        assert!(matches!(s.insert(1, 5, bb(2.0, 0.0, 1.0, 1.0)), Err(Error::DuplicateIdentity { frame: 1, id: 5 })));
        let mut frames = BTreeMap::new();
        frames.insert(3, vec![(2, bb(0.0, 0.0, 1.0, 1.0)), (2, bb(5.0, 0.0, 1.0, 1.0))]);
        assert!(SequenceAnnotations::from_frames(frames).is_err());
    }

    #[test]
    fn clear_keeps_previous_correspondence() {
        // Two predictions overlap the GT equally well from frame 2 on; the
        // established one must be kept, so there is no switch.
        let gt = seq(&(1..=3).map(|f| (f, 1, bb(0.0, 0.0, 10.0, 10.0))).collect::<Vec<_>>());
        let mut pred = seq(&[(1, 1, bb(0.0, 0.0, 10.0, 10.0))]);
        for f in 2..=3 {
            pred.insert(f, 1, bb(1.0, 0.0, 10.0, 10.0)).unwrap();
            pred.insert(f, 2, bb(0.0, 0.5, 10.0, 10.0)).unwrap();
        }
        assert_eq!(clear_mota(&gt, &pred, 0.5).unwrap().idsw, 0);
    }

    #[test]
    fn pooled_counts_match_single_sequence() {
        let (gt, pred) = id_switch_fixture();
        let one = evaluate(&gt, &pred).unwrap();
        let two = evaluate_many([(&gt, &pred), (&gt, &pred)]).unwrap();
        assert_eq!(two.tp, 2 * one.tp);
        assert!((two.hota - one.hota).abs() < 1e-12);
        assert!((two.mota - one.mota).abs() < 1e-12);
        assert!((two.idf1 - one.idf1).abs() < 1e-12);
    }

    /// Best IDTP over every partial injective mapping of GT ids to pred ids.
    fn brute_force_idtp(gt: &SequenceAnnotations, pred: &SequenceAnnotations, thr: f64) -> u64 {
        let frames = pair_frames(gt, pred).unwrap();
        let co = co_occurrence(&frames, thr);
        let np = co.pred_ids.len();
        fn rec(co: &CoOccurrence, g: usize, used: &mut Vec<bool>, acc: u64, best: &mut u64) {
            if g == co.gt_ids.len() {
                *best = (*best).max(acc);
                return;
            }
            rec(co, g + 1, used, acc, best);
            for p in 0..co.pred_ids.len() {
                if !used[p] {
                    used[p] = true;
                    rec(co, g + 1, used, acc + co.counts[g * co.pred_ids.len() + p], best);
                    used[p] = false;
                }
            }
        }
        let mut best = 0;
        rec(&co, 0, &mut vec![false; np], 0, &mut best);
        best
    }

    fn arb_sequence(max_ids: i64, frames: u32) -> impl Strategy<Value = SequenceAnnotations> {
        proptest::collection::vec(
            (1..=frames, 1..=max_ids, 0u8..6, 0u8..3),
            0..(frames as usize * max_ids as usize),
        )
        .prop_map(|rows| {
            let mut s = SequenceAnnotations::new();
            for (f, id, slot, jitter) in rows {
                let b = bb(f64::from(slot) * 6.0 + f64::from(jitter), 0.0, 10.0, 10.0);
                let _ = s.insert(f, id, b);
            }
            s
        })
    }

    proptest! {
        #[test]
        fn idf1_mapping_matches_exhaustive_search(gt in arb_sequence(3, 5), pred in arb_sequence(3, 5)) {
            let frames = pair_frames(&gt, &pred).unwrap();
            prop_assert_eq!(identity_counts(&frames, 0.5).idtp, brute_force_idtp(&gt, &pred, 0.5));
        }

        #[test]
        fn hota_identity_per_alpha(gt in arb_sequence(3, 5), pred in arb_sequence(3, 5)) {
            let h = hota(&gt, &pred).unwrap();
            for a in &h.per_alpha {
                prop_assert!((a.hota - (a.deta * a.assa).sqrt()).abs() <= 1e-12);
                prop_assert!((0.0..=1.0).contains(&a.hota));
            }
        }

        #[test]
        fn relabeling_predictions_changes_nothing(gt in arb_sequence(3, 5), pred in arb_sequence(3, 5)) {
            let mut relabeled = SequenceAnnotations::new();
            for (&f, entries) in pred.frames() {
                for &(id, b) in entries {
                    relabeled.insert(f, 100 - 7 * id, b).unwrap();
                }
            }
            let (a, b) = (evaluate(&gt, &pred).unwrap(), evaluate(&gt, &relabeled).unwrap());
            prop_assert_eq!((a.tp, a.fn_, a.fp, a.idsw, a.gt_total), (b.tp, b.fn_, b.fp, b.idsw, b.gt_total));
            prop_assert_eq!(a.idf1, b.idf1);
            for (x, y) in a.per_alpha.iter().zip(&b.per_alpha) {
                prop_assert!((x.hota - y.hota).abs() <= 1e-12);
                prop_assert!((x.assa - y.assa).abs() <= 1e-12);
                prop_assert_eq!(x.deta, y.deta);
            }
        }

        #[test]
        fn pure_false_positive_never_helps(gt in arb_sequence(3, 5), pred in arb_sequence(3, 5), frame in 1u32..=5) {
            let before = evaluate(&gt, &pred).unwrap();
            let mut noisy = pred.clone();
            noisy.insert(frame, 1000, bb(5000.0, 5000.0, 10.0, 10.0)).unwrap();
            let after = evaluate(&gt, &noisy).unwrap();
            prop_assert!(after.mota <= before.mota);
            prop_assert!(after.idf1 <= before.idf1);
            prop_assert!(after.hota <= before.hota + 1e-15);
            prop_assert_eq!(after.fp, before.fp + 1);
        }
    }
}
