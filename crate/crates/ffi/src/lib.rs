//! C ABI over the `cbiou` tracker.
//!
//! Every fallible call returns a [`CbiouStatus`]; on failure a message is
//! available from [`cbiou_last_error_message`] on the same thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cbiou::geometry::{biou, diou, giou, iou};
use cbiou::{BoundingBox, Detection, Error, ErrorClass, SimilarityKind, Tracker, TrackerConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbiouStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    IoError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

pub const CBIOU_SIM_IOU: u32 = 0;
pub const CBIOU_SIM_GIOU: u32 = 1;
pub const CBIOU_SIM_DIOU: u32 = 2;
pub const CBIOU_SIM_BIOU: u32 = 3;

/// Axis-aligned box as top-left corner plus width and height.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbiouBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbiouDetection {
    pub bbox: CbiouBox,
    pub confidence: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbiouRecord {
    pub id: u64,
    pub bbox: CbiouBox,
    pub confidence: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbiouConfig {
    pub b1: f64,
    pub b2: f64,
    pub max_age: u32,
    pub n_max: u32,
    pub min_sim: f64,
    pub det_conf_min: f64,
    /// One of the `CBIOU_SIM_*` constants.
    pub similarity: u32,
    pub cascade_enabled: bool,
    pub motion_enabled: bool,
}

/// Opaque tracker handle.
pub struct CbiouTracker {
    inner: Tracker,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CbiouStatus, msg: impl Into<String>) -> CbiouStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> CbiouStatus {
    let status = match e.class() {
        ErrorClass::Argument => CbiouStatus::InvalidArgument,
        ErrorClass::Data => CbiouStatus::DataError,
        ErrorClass::Io => CbiouStatus::IoError,
    };
    fail(status, e.to_string())
}

/// Run `f`, turning a panic into [`CbiouStatus::Panic`].
fn guard(f: impl FnOnce() -> CbiouStatus) -> CbiouStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CbiouStatus::Panic, "internal panic"),
    }
}

fn to_bbox(b: &CbiouBox) -> Result<BoundingBox, CbiouStatus> {
    BoundingBox::new(b.x, b.y, b.w, b.h).map_err(from_error)
}

fn from_bbox(b: &BoundingBox) -> CbiouBox {
    CbiouBox {
        x: b.x(),
        y: b.y(),
        w: b.w(),
        h: b.h(),
    }
}

fn kind_from(v: u32) -> Option<SimilarityKind> {
    match v {
        CBIOU_SIM_IOU => Some(SimilarityKind::Iou),
        CBIOU_SIM_GIOU => Some(SimilarityKind::Giou),
        CBIOU_SIM_DIOU => Some(SimilarityKind::Diou),
        CBIOU_SIM_BIOU => Some(SimilarityKind::Biou),
        _ => None,
    }
}

fn kind_to(k: SimilarityKind) -> u32 {
    match k {
        SimilarityKind::Iou => CBIOU_SIM_IOU,
        SimilarityKind::Giou => CBIOU_SIM_GIOU,
        SimilarityKind::Diou => CBIOU_SIM_DIOU,
        SimilarityKind::Biou => CBIOU_SIM_BIOU,
    }
}

/// The library's default configuration.
#[no_mangle]
pub extern "C" fn cbiou_config_default() -> CbiouConfig {
    let d = TrackerConfig::default();
    CbiouConfig {
        b1: d.b1,
        b2: d.b2,
        max_age: d.max_age,
        n_max: d.n_max as u32,
        min_sim: d.min_sim,
        det_conf_min: d.det_conf_min,
        similarity: kind_to(d.similarity_kind),
        cascade_enabled: d.cascade_enabled,
        motion_enabled: d.motion_enabled,
    }
}

/// Create a tracker. `config` may be null for the defaults. On success
/// `*out` owns a handle to release with [`cbiou_tracker_free`].
#[no_mangle]
pub unsafe extern "C" fn cbiou_tracker_new(config: *const CbiouConfig, out: *mut *mut CbiouTracker) -> CbiouStatus {
    guard(|| {
        if out.is_null() {
            return fail(CbiouStatus::NullPointer, "out is null");
        }
        let c = if config.is_null() { cbiou_config_default() } else { *config };
        let Some(kind) = kind_from(c.similarity) else {
            return fail(CbiouStatus::InvalidArgument, format!("unknown similarity {}", c.similarity));
        };
        let cfg = TrackerConfig {
            b1: c.b1,
            b2: c.b2,
            max_age: c.max_age,
            n_max: c.n_max as usize,
            min_sim: c.min_sim,
            det_conf_min: c.det_conf_min,
            similarity_kind: kind,
            cascade_enabled: c.cascade_enabled,
            motion_enabled: c.motion_enabled,
        };
        match Tracker::new(cfg) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CbiouTracker { inner }));
                CbiouStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Release a tracker. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cbiou_tracker_free(tracker: *mut CbiouTracker) {
    if !tracker.is_null() {
        drop(Box::from_raw(tracker));
    }
}

/// Advance to `frame` with `count` detections.
///
/// `records` must hold at least `count` entries; nothing is consumed when it
/// does not. The number written is stored in `*written`, ordered by id.
#[no_mangle]
pub unsafe extern "C" fn cbiou_tracker_step(
    tracker: *mut CbiouTracker,
    frame: u32,
    detections: *const CbiouDetection,
    count: usize,
    records: *mut CbiouRecord,
    capacity: usize,
    written: *mut usize,
) -> CbiouStatus {
    guard(|| {
        if tracker.is_null() || written.is_null() {
            return fail(CbiouStatus::NullPointer, "tracker or written is null");
        }
        if count > 0 && (detections.is_null() || records.is_null()) {
            return fail(CbiouStatus::NullPointer, "detections or records is null");
        }
        *written = 0;
        if capacity < count {
            return fail(
                CbiouStatus::BufferTooSmall,
                format!("records holds {capacity} entries but {count} may be produced"),
            );
        }
        let input = if count == 0 { &[][..] } else { std::slice::from_raw_parts(detections, count) };
        let mut dets = Vec::with_capacity(count);
        for d in input {
            let bbox = match to_bbox(&d.bbox) {
                Ok(b) => b,
                Err(s) => return s,
            };
            match Detection::new(frame, bbox, d.confidence) {
                Ok(det) => dets.push(det),
                Err(e) => return from_error(e),
            }
        }
        let out = match (*tracker).inner.step(frame, &dets) {
            Ok(o) => o,
            Err(e) => return from_error(e),
        };
        for (i, r) in out.records.iter().enumerate() {
            *records.add(i) = CbiouRecord {
                id: r.id,
                bbox: from_bbox(&r.bbox),
                confidence: r.confidence,
            };
        }
        *written = out.records.len();
        CbiouStatus::Ok
    })
}

/// Number of live tracks, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn cbiou_tracker_track_count(tracker: *const CbiouTracker) -> usize {
    if tracker.is_null() {
        0
    } else {
        (*tracker).inner.tracks().len()
    }
}

unsafe fn pairwise(
    a: *const CbiouBox,
    b: *const CbiouBox,
    out: *mut f64,
    f: impl FnOnce(&BoundingBox, &BoundingBox) -> Result<f64, Error>,
) -> CbiouStatus {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return fail(CbiouStatus::NullPointer, "box or out pointer is null");
        }
        let (a, b) = match (to_bbox(&*a), to_bbox(&*b)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match f(&a, &b) {
            Ok(v) => {
                *out = v;
                CbiouStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn cbiou_iou(a: *const CbiouBox, b: *const CbiouBox, out: *mut f64) -> CbiouStatus {
    pairwise(a, b, out, |a, b| Ok(iou(a, b)))
}

#[no_mangle]
pub unsafe extern "C" fn cbiou_giou(a: *const CbiouBox, b: *const CbiouBox, out: *mut f64) -> CbiouStatus {
    pairwise(a, b, out, |a, b| Ok(giou(a, b)))
}

#[no_mangle]
pub unsafe extern "C" fn cbiou_diou(a: *const CbiouBox, b: *const CbiouBox, out: *mut f64) -> CbiouStatus {
    pairwise(a, b, out, |a, b| Ok(diou(a, b)))
}

/// IoU of both boxes after expanding each by `scale` times its own size
/// on every side.
#[no_mangle]
pub unsafe extern "C" fn cbiou_biou(a: *const CbiouBox, b: *const CbiouBox, scale: f64, out: *mut f64) -> CbiouStatus {
    pairwise(a, b, out, |a, b| biou(a, b, scale))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cbiou_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn cbiou_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
