//! MOTChallenge-style comma-separated files.
//!
//! Detections and results: `frame,id,x,y,w,h,conf,-1,-1,-1`.
//! Ground truth: `frame,id,x,y,w,h,active,class,visibility`.
//! Readers accept 6 to 10 columns and CR/LF line endings; writers emit LF
//! and two decimals.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::metrics::SequenceAnnotations;
use crate::tracker::{Detection, DetectionSequence, FrameOutput};

/// Fixed output precision for coordinates and confidences.
pub const DECIMALS: usize = 2;

struct Row {
    line: usize,
    frame: u32,
    id: i64,
    bbox: BoundingBox,
    /// Column 7: confidence for detections, the active flag for ground truth.
    score: f64,
    visibility: f64,
}

fn parse_rows(text: &str) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if !(6..=10).contains(&fields.len()) {
            return Err(Error::Parse {
                line,
                msg: format!("expected 6 to 10 columns, found {}", fields.len()),
            });
        }
        let num = |i: usize, name: &str| -> Result<f64> {
            let v: f64 = fields[i].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("{name} '{}' is not a number", fields[i]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: format!("{name} '{}' is not finite", fields[i]),
                });
            }
            Ok(v)
        };
        let integer = |i: usize, name: &str| -> Result<i64> {
            let v = num(i, name)?;
            if v.fract() != 0.0 || v.abs() > 9.0e15 {
                return Err(Error::Parse {
                    line,
                    msg: format!("{name} '{}' is not an integer", fields[i]),
                });
            }
            Ok(v as i64)
        };

        let frame = integer(0, "frame")?;
        if frame < 1 || frame > i64::from(u32::MAX) {
            return Err(Error::Data {
                line,
                msg: format!("frame {frame} out of range (frames start at 1)"),
            });
        }
        let id = integer(1, "id")?;
        let (x, y, w, h) = (num(2, "x")?, num(3, "y")?, num(4, "w")?, num(5, "h")?);
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::Data {
                line,
                msg: format!("box extents must be positive, got w={w} h={h}"),
            });
        }
        let bbox = BoundingBox::new(x, y, w, h).map_err(|e| Error::Data {
            line,
            msg: e.to_string(),
        })?;
        let score = if fields.len() > 6 { num(6, "conf")? } else { 1.0 };
        let visibility = if fields.len() > 8 { num(8, "visibility")? } else { 1.0 };
        rows.push(Row {
            line,
            frame: frame as u32,
            id,
            bbox,
            score,
            visibility,
        });
    }
    Ok(rows)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Detections grouped by frame; the id column is ignored.
pub fn parse_detections(text: &str) -> Result<DetectionSequence> {
    let mut seq = DetectionSequence::new();
    for row in parse_rows(text)? {
        let det = Detection::new(row.frame, row.bbox, row.score).map_err(|e| Error::Data {
            line: row.line,
            msg: e.to_string(),
        })?;
        seq.entry(row.frame).or_default().push(det);
    }
    Ok(seq)
}

pub fn read_detections(path: impl AsRef<Path>) -> Result<DetectionSequence> {
    parse_detections(&read_text(path.as_ref())?)
}

/// Ground truth, dropping inactive rows and rows whose visibility falls
/// below `min_visibility`.
pub fn parse_ground_truth(text: &str, min_visibility: Option<f64>) -> Result<SequenceAnnotations> {
    let rows = parse_rows(text)?;
    let mut first_seen: BTreeMap<(u32, i64), usize> = BTreeMap::new();
    for row in &rows {
        if let Some(&first_line) = first_seen.get(&(row.frame, row.id)) {
            return Err(Error::DuplicateRow {
                frame: row.frame,
                id: row.id,
                first_line,
                second_line: row.line,
            });
        }
        first_seen.insert((row.frame, row.id), row.line);
    }
    let mut seq = SequenceAnnotations::new();
    for row in rows {
        if row.score == 0.0 {
            continue;
        }
        if min_visibility.is_some_and(|v| row.visibility < v) {
            continue;
        }
        seq.insert(row.frame, row.id, row.bbox)?;
    }
    Ok(seq)
}

pub fn read_ground_truth(path: impl AsRef<Path>, min_visibility: Option<f64>) -> Result<SequenceAnnotations> {
    parse_ground_truth(&read_text(path.as_ref())?, min_visibility)
}

/// Tracker results as annotations: every row kept, id column used.
pub fn parse_results(text: &str) -> Result<SequenceAnnotations> {
    let mut seq = SequenceAnnotations::new();
    let mut first_seen: BTreeMap<(u32, i64), usize> = BTreeMap::new();
    for row in parse_rows(text)? {
        if let Some(&first_line) = first_seen.get(&(row.frame, row.id)) {
            return Err(Error::DuplicateRow {
                frame: row.frame,
                id: row.id,
                first_line,
                second_line: row.line,
            });
        }
        first_seen.insert((row.frame, row.id), row.line);
        seq.insert(row.frame, row.id, row.bbox)?;
    }
    Ok(seq)
}

pub fn read_results(path: impl AsRef<Path>) -> Result<SequenceAnnotations> {
    parse_results(&read_text(path.as_ref())?)
}

/// Fixed-point with round-half-to-even on the exact binary value; never
/// prints a negative zero.
pub fn fmt_fixed(v: f64) -> String {
    let s = format!("{v:.DECIMALS$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn push_row(out: &mut String, frame: u32, id: i64, b: &BoundingBox, conf: f64) {
    use std::fmt::Write;
    let _ = writeln!(
        out,
        "{frame},{id},{},{},{},{},{},-1,-1,-1",
        fmt_fixed(b.x()),
        fmt_fixed(b.y()),
        fmt_fixed(b.w()),
        fmt_fixed(b.h()),
        fmt_fixed(conf)
    );
}

/// Result rows sorted by frame, then id.
pub fn format_results(outputs: &[FrameOutput]) -> String {
    let mut rows: Vec<(u32, u64, BoundingBox, f64)> = outputs
        .iter()
        .flat_map(|o| o.records.iter().map(move |r| (o.frame, r.id, r.bbox, r.confidence)))
        .collect();
    rows.sort_by_key(|r| (r.0, r.1));
    let mut out = String::new();
    for (frame, id, b, conf) in rows {
        push_row(&mut out, frame, id as i64, &b, conf);
    }
    out
}

/// Write `text`, creating missing parent directories.
fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_results(path: impl AsRef<Path>, outputs: &[FrameOutput]) -> Result<()> {
    write_text(path.as_ref(), &format_results(outputs))
}

/// Detection rows with id `-1`, in frame order and input order within a
/// frame.
pub fn format_detections(dets: &DetectionSequence) -> String {
    let mut out = String::new();
    for (&frame, list) in dets {
        for d in list {
            push_row(&mut out, frame, -1, &d.bbox, d.confidence);
        }
    }
    out
}

pub fn write_detections(path: impl AsRef<Path>, dets: &DetectionSequence) -> Result<()> {
    write_text(path.as_ref(), &format_detections(dets))
}

/// Ground-truth rows (`active = 1`, `class = 1`, `visibility = 1`) sorted
/// by frame, then id.
pub fn format_ground_truth(gt: &SequenceAnnotations) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for (&frame, entries) in gt.frames() {
        let mut sorted = entries.clone();
        sorted.sort_by_key(|e| e.0);
        for (id, b) in sorted {
            let _ = writeln!(
                out,
                "{frame},{id},{},{},{},{},1,1,1.0",
                fmt_fixed(b.x()),
                fmt_fixed(b.y()),
                fmt_fixed(b.w()),
                fmt_fixed(b.h())
            );
        }
    }
    out
}

pub fn write_ground_truth(path: impl AsRef<Path>, gt: &SequenceAnnotations) -> Result<()> {
    write_text(path.as_ref(), &format_ground_truth(gt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::TrackRecord;
    use proptest::prelude::*;

    fn bb(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(x, y, w, h).unwrap()
    }

    #[test]
    fn reads_detection_row() {
        let seq = parse_detections("1,-1,100.0,200.0,50.0,80.0,0.9,-1,-1,-1\n").unwrap();
        let d = &seq[&1][0];
        assert_eq!((d.frame, d.bbox, d.confidence), (1, bb(100.0, 200.0, 50.0, 80.0), 0.9));
    }

    #[test]
    fn empty_file_is_empty_sequence() {
        assert!(parse_detections("").unwrap().is_empty());
        assert!(parse_detections("\n  \r\n").unwrap().is_empty());
    }

    #[test]
    fn zero_width_is_data_error_with_line() {
        let err = parse_detections("1,-1,100,200,0,80,0.9,-1,-1,-1").unwrap_err();
        assert!(matches!(err, Error::Data { line: 1, .. }), "{err}");
        let err = parse_detections("1,-1,1,1,1,1,1\n2,-1,1,1,1,-3,1\n").unwrap_err();
        assert!(matches!(err, Error::Data { line: 2, .. }), "{err}");
    }

    #[test]
    fn malformed_rows_are_parse_errors() {
        for (text, line) in [("1,-1,a,2,3,4,1", 1), ("1,-1,1,2,3\n", 1), ("\n1.5,-1,1,2,3,4,1", 2), ("1,-1,1,2,3,4,1,1,1,1,1", 1)] {
            match parse_detections(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn tolerates_crlf_unsorted_and_short_rows() {
        let seq = parse_detections("2,-1,1,1,2,2,0.5\r\n1,-1,0,0,2,2\r\n").unwrap();
        assert_eq!(seq.keys().copied().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(seq[&1][0].confidence, 1.0);
    }

    #[test]
    fn ground_truth_rows() {
        let gt = parse_ground_truth("1,7,0,0,10,10,1,1,1.0\n", None).unwrap();
        assert_eq!(gt.frame(1), &[(7, bb(0.0, 0.0, 10.0, 10.0))]);

        let gt = parse_ground_truth("1,7,0,0,10,10,0,1,1.0\n1,8,0,0,10,10,1,1,0.2\n", None).unwrap();
        assert_eq!(gt.box_count(), 1);
        let gt = parse_ground_truth("1,8,0,0,10,10,1,1,0.2\n1,9,0,0,10,10,1,1,0.9\n", Some(0.5)).unwrap();
        assert_eq!(gt.frame(1)[0].0, 9);
    }

    #[test]
    fn ground_truth_duplicate_names_both_lines() {
        let text = "3,5,0,0,1,1,1,1,1\n3,6,0,0,1,1,1,1,1\n3,5,4,4,1,1,1,1,1\n";
        match parse_ground_truth(text, None) {
            Err(Error::DuplicateRow { frame: 3, id: 5, first_line: 1, second_line: 3 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn result_line_format() {
        assert!(format_results(&[]).is_empty());
        let out = FrameOutput {
            frame: 1,
            records: vec![TrackRecord { id: 3, bbox: bb(1.005, 2.0, 3.0, 4.0), confidence: 1.0 }],
        };
        assert_eq!(format_results(&[out]), "1,3,1.00,2.00,3.00,4.00,1.00,-1,-1,-1\n");
        assert_eq!(fmt_fixed(0.125), "0.12");
        assert_eq!(fmt_fixed(0.375), "0.38");
        assert_eq!(fmt_fixed(-0.001), "0.00");
    }

    #[test]
    fn results_sorted_by_frame_then_id() {
        let rec = |id| TrackRecord { id, bbox: bb(0.0, 0.0, 1.0, 1.0), confidence: 0.5 };
        let outputs = vec![
            FrameOutput { frame: 2, records: vec![rec(4), rec(1)] },
            FrameOutput { frame: 1, records: vec![rec(9)] },
        ];
        let keys: Vec<String> = format_results(&outputs)
            .lines()
            .map(|l| l.split(',').take(2).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(keys, vec!["1,9", "2,1", "2,4"]);
    }

    #[test]
    fn ground_truth_writer_round_trips() {
        let mut gt = SequenceAnnotations::new();
        gt.insert(2, 4, bb(1.5, 2.25, 10.0, 12.5)).unwrap();
        gt.insert(1, 9, bb(0.0, 0.0, 3.0, 3.0)).unwrap();
        let back = parse_ground_truth(&format_ground_truth(&gt), Some(0.5)).unwrap();
        assert_eq!(back, gt);
    }

    #[test]
    fn file_io_errors_name_path() {
        let err = read_detections("/nonexistent/dets.txt").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dets.txt"));
    }

    proptest! {
        #[test]
        fn write_then_read_round_trip(rows in proptest::collection::vec(
            (1u32..50, 1u64..20, -1e4..1e4f64, -1e4..1e4f64, 0.5..500.0f64, 0.5..500.0f64, 0u32..=100), 0..100)) {
            let mut frames: BTreeMap<u32, Vec<TrackRecord>> = BTreeMap::new();
            for (f, id, x, y, w, h, c) in rows {
                let list = frames.entry(f).or_default();
                if list.iter().all(|r| r.id != id) {
                    list.push(TrackRecord { id, bbox: bb(x, y, w, h), confidence: f64::from(c) / 100.0 });
                }
            }
            let outputs: Vec<FrameOutput> = frames.into_iter().map(|(frame, records)| FrameOutput { frame, records }).collect();
            let back = parse_results(&format_results(&outputs)).unwrap();
            let dets = parse_detections(&format_results(&outputs)).unwrap();
            for o in &outputs {
                let got = back.frame(o.frame);
                prop_assert_eq!(got.len(), o.records.len());
                for r in &o.records {
                    let (_, b) = got.iter().find(|(id, _)| *id == r.id as i64).unwrap();
                    for (p, q) in <[f64; 4]>::from(*b).iter().zip(<[f64; 4]>::from(r.bbox)) {
                        prop_assert!((p - q).abs() <= 0.005 + 1e-9);
                    }
                }
                let confs: Vec<f64> = dets[&o.frame].iter().map(|d| d.confidence).collect();
                let mut expected: Vec<(u64, f64)> = o.records.iter().map(|r| (r.id, r.confidence)).collect();
                expected.sort_by_key(|e| e.0);
                prop_assert_eq!(confs, expected.iter().map(|e| e.1).collect::<Vec<_>>());
            }
        }
    }
}
