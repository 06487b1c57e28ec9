//! Batch runs over several sequences: buffer-scale grid search, variant
//! comparison, throughput measurement, and their text reports.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{accumulate, EvalCounts, MetricsReport, SequenceAnnotations};
use crate::synth::{generate, ScenarioSpec};
use crate::tracker::{run_sequence, DetectionSequence, FrameOutput, Tracker, TrackerConfig, Variant};

/// One ground-truth sequence paired with the detections fed to the tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceData {
    pub name: String,
    pub gt: SequenceAnnotations,
    pub detections: DetectionSequence,
}

/// Track one sequence and tally it against its ground truth.
pub fn run_cell(config: &TrackerConfig, seq: &SequenceData) -> Result<EvalCounts> {
    let outputs = run_sequence(config, &seq.detections)?;
    let pred = SequenceAnnotations::from_outputs(&outputs)?;
    accumulate(&seq.gt, &pred)
}

/// Evaluate every `(config, sequence)` cell, then pool each config's counts
/// in sequence order. The result does not depend on `parallel`.
fn pooled(configs: &[TrackerConfig], data: &[SequenceData], parallel: bool) -> Result<Vec<MetricsReport>> {
    if data.is_empty() {
        return Err(Error::invalid("no sequences to evaluate"));
    }
    let cells: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..data.len()).map(move |s| (c, s)))
        .collect();
    let eval = |&(c, s): &(usize, usize)| run_cell(&configs[c], &data[s]);
    let counts: Vec<Result<EvalCounts>> = if parallel {
        cells.par_iter().map(eval).collect()
    } else {
        cells.iter().map(eval).collect()
    };
    let mut reports = Vec::with_capacity(configs.len());
    let mut it = counts.into_iter();
    for _ in configs {
        let mut total = EvalCounts::default();
        for _ in data {
            total.merge(&it.next().expect("one count per cell")?);
        }
        reports.push(total.report());
    }
    Ok(reports)
}

pub fn evaluate_config(config: &TrackerConfig, data: &[SequenceData], parallel: bool) -> Result<MetricsReport> {
    config.validate()?;
    Ok(pooled(std::slice::from_ref(config), data, parallel)?.remove(0))
}

/// Round to nine decimals so grid values print as written.
fn tidy(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

/// Parse `start:stop:step` into the inclusive list of values.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(Error::invalid(format!("range must look like start:stop:step, got {text:?}")));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::invalid(format!("bad number {s:?} in range {text:?}")))
    };
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if step <= 0.0 || stop < start || start < 0.0 {
        return Err(Error::invalid(format!(
            "range needs 0 <= start <= stop and step > 0, got {text:?}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| tidy(start + i as f64 * step)).collect())
}

/// All `(b1, b2)` with `b1 < b2` drawn from `values`, in lexicographic order.
pub fn grid_pairs(values: &[f64]) -> Vec<(f64, f64)> {
    let mut pairs = Vec::new();
    for (i, &b1) in values.iter().enumerate() {
        for &b2 in &values[i + 1..] {
            if b1 < b2 {
                pairs.push((b1, b2));
            }
        }
    }
    pairs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub b1: f64,
    pub b2: f64,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub values: Vec<f64>,
    pub cells: Vec<GridCell>,
    /// Index into `cells` of the highest HOTA, earliest on ties.
    pub best: usize,
}

impl GridReport {
    pub fn best_cell(&self) -> &GridCell {
        &self.cells[self.best]
    }
}

/// Evaluate cascaded BIoU on every `(b1, b2)` pair from `values`.
pub fn grid_search(base: &TrackerConfig, values: &[f64], data: &[SequenceData], parallel: bool) -> Result<GridReport> {
    let pairs = grid_pairs(values);
    if pairs.is_empty() {
        return Err(Error::invalid("grid range yields no b1 < b2 pair"));
    }
    let configs: Vec<TrackerConfig> = pairs
        .iter()
        .map(|&(b1, b2)| TrackerConfig {
            b1,
            b2,
            ..Variant::CBiouMotion.configure(base)
        })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    let reports = pooled(&configs, data, parallel)?;
    let cells: Vec<GridCell> = pairs
        .into_iter()
        .zip(reports)
        .map(|((b1, b2), report)| GridCell { b1, b2, report })
        .collect();
    let mut best = 0;
    for (i, c) in cells.iter().enumerate() {
        if c.report.hota > cells[best].report.hota {
            best = i;
        }
    }
    Ok(GridReport {
        values: values.to_vec(),
        cells,
        best,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub variant: Variant,
    pub config: TrackerConfig,
    pub report: MetricsReport,
}

/// Run the six ablation variants derived from `base`.
pub fn compare(base: &TrackerConfig, data: &[SequenceData], parallel: bool) -> Result<Vec<CompareRow>> {
    let configs: Vec<TrackerConfig> = Variant::ALL.iter().map(|v| v.configure(base)).collect();
    for c in &configs {
        c.validate()?;
    }
    let reports = pooled(&configs, data, parallel)?;
    Ok(Variant::ALL
        .iter()
        .zip(configs)
        .zip(reports)
        .map(|((&variant, config), report)| CompareRow { variant, config, report })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub objects: usize,
    pub frames: u32,
    pub seed: u64,
    pub elapsed_secs: f64,
    pub fps: f64,
    pub object_updates_per_sec: f64,
    pub detections: usize,
    pub records: usize,
}

/// Synthetic workload used by [`bench`].
pub fn bench_scenario(objects: usize, frames: u32, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        num_objects: objects,
        num_frames: frames,
        seed,
        ..ScenarioSpec::default()
    }
}

/// Time `Tracker::step` alone over a generated sequence.
pub fn bench(config: &TrackerConfig, objects: usize, frames: u32, seed: u64) -> Result<(BenchReport, Vec<FrameOutput>)> {
    let scenario = generate(&bench_scenario(objects, frames, seed))?;
    let empty = Vec::new();
    let inputs: Vec<(u32, &Vec<_>)> = (1..=frames)
        .map(|f| (f, scenario.detections.get(&f).unwrap_or(&empty)))
        .collect();
    let mut tracker = Tracker::new(*config)?;
    let mut outputs = Vec::with_capacity(inputs.len());
    let start = Instant::now();
    for (f, dets) in inputs {
        outputs.push(tracker.step(f, dets)?);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let detections = scenario.detections.values().map(Vec::len).sum::<usize>();
    let rate = |n: f64| if elapsed > 0.0 { n / elapsed } else { f64::INFINITY };
    let report = BenchReport {
        objects,
        frames,
        seed,
        elapsed_secs: elapsed,
        fps: rate(f64::from(frames)),
        object_updates_per_sec: rate(detections as f64),
        detections,
        records: outputs.iter().map(|o| o.records.len()).sum(),
    };
    Ok((report, outputs))
}

/// Score as a percentage with one decimal.
pub fn pct(v: f64) -> String {
    let s = format!("{:.1}", v * 100.0);
    if s == "-0.0" {
        "0.0".to_owned()
    } else {
        s
    }
}

pub const METRIC_HEADER: &str = "HOTA,DetA,AssA,MOTA,IDF1";

fn metric_cells(r: &MetricsReport) -> String {
    [r.hota, r.deta, r.assa, r.mota, r.idf1].map(pct).join(",")
}

/// Key/value metric summary followed by the per-threshold table.
pub fn format_metrics(r: &MetricsReport) -> String {
    let mut s = String::new();
    for (k, v) in [("HOTA", r.hota), ("DetA", r.deta), ("AssA", r.assa), ("MOTA", r.mota), ("IDF1", r.idf1)] {
        let _ = writeln!(s, "{k}={}", pct(v));
    }
    for (k, v) in [("TP", r.tp), ("FN", r.fn_), ("FP", r.fp), ("IDSW", r.idsw), ("GT", r.gt_total)] {
        let _ = writeln!(s, "{k}={v}");
    }
    s.push_str("\nalpha,HOTA,DetA,AssA\n");
    for a in &r.per_alpha {
        let _ = writeln!(s, "{},{},{},{}", tidy(a.alpha), pct(a.hota), pct(a.deta), pct(a.assa));
    }
    s
}

/// Best pair, the lower-triangle HOTA matrix (rows b2, columns b1) and the
/// full list of cells.
pub fn format_grid(g: &GridReport) -> String {
    let best = g.best_cell();
    let mut s = String::new();
    let _ = writeln!(s, "combinations={}", g.cells.len());
    let _ = writeln!(s, "best_b1={}", best.b1);
    let _ = writeln!(s, "best_b2={}", best.b2);
    let _ = writeln!(s, "best_HOTA={}", pct(best.report.hota));
    let n = g.values.len();
    s.push_str("\nb2\\b1");
    for b1 in &g.values[..n.saturating_sub(1)] {
        let _ = write!(s, ",{b1}");
    }
    s.push('\n');
    for &b2 in g.values.iter().skip(1) {
        let _ = write!(s, "{b2}");
        for &b1 in &g.values[..n - 1] {
            let cell = g.cells.iter().find(|c| c.b1 == b1 && c.b2 == b2);
            match cell {
                Some(c) => {
                    let _ = write!(s, ",{}", pct(c.report.hota));
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    let _ = writeln!(s, "\nb1,b2,{METRIC_HEADER}");
    for c in &g.cells {
        let _ = writeln!(s, "{},{},{}", c.b1, c.b2, metric_cells(&c.report));
    }
    s
}

pub fn format_compare(rows: &[CompareRow]) -> String {
    let mut s = format!("variant,{METRIC_HEADER}\n");
    for r in rows {
        let _ = writeln!(s, "{},{}", r.variant.label(), metric_cells(&r.report));
    }
    s
}

pub fn format_bench(b: &BenchReport) -> String {
    format!(
        "objects={}\nframes={}\nseed={}\ndetections={}\nrecords={}\nelapsed_secs={:.6}\nfps={:.1}\nobject_updates_per_sec={:.1}\n",
        b.objects, b.frames, b.seed, b.detections, b.records, b.elapsed_secs, b.fps, b.object_updates_per_sec
    )
}

/// Align a report's comma-separated blocks into padded columns.
pub fn render_human(report: &str) -> String {
    let mut out = String::new();
    for block in report.split("\n\n") {
        let rows: Vec<Vec<&str>> = block.lines().map(|l| l.split(',').collect()).collect();
        let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|v| v.len()).max().unwrap_or(0))
            .collect();
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(i, v)| if r.len() == 1 { v.replace('=', "  ") } else { format!("{v:>w$}", w = widths[i]) })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out.push('\n');
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    out
}
