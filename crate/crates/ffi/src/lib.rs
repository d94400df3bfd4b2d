//! C ABI over `numina-core`.
//!
//! Every fallible function returns a [`NuminaStatus`]; on failure the
//! message is available from [`numina_last_error`] on the same thread.
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Strings returned as `char *` are
//! owned by the caller and released with [`numina_string_free`].
//! Panics never unwind into C; they surface as `NUMINA_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use numina_core::cli::PipelineConfig;
use numina_core::eval::{score_dataset, selfcheck, within_threshold, PredictionRecord, ScoreReport};
use numina_core::geometry::hull_distance;
use numina_core::jsonl::{parse_jsonl, read_jsonl, to_jsonl_string};
use numina_core::ngt::{extract_ngt, read_ngt, LabelFilter, NgtTable};
use numina_core::qa::{assemble_dataset, builtin_bank, generate_rule_records, QaError, QaRecord};
use numina_core::scene::{load_scene, Point3, PointSet, Scene};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuminaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    NotConverged = 5,
    Shortfall = 6,
    Panic = 7,
}

pub struct NuminaScene(Scene);
pub struct NuminaNgt(NgtTable);
pub struct NuminaDataset(Vec<QaRecord>);
pub struct NuminaReport(ScoreReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (NuminaStatus, String);

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NuminaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NuminaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NuminaStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (NuminaStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (NuminaStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

unsafe fn points(xyz: *const f64, n: usize, what: &str) -> Result<PointSet, Failure> {
    if xyz.is_null() {
        return Err(null(what));
    }
    let flat = std::slice::from_raw_parts(xyz, n * 3);
    let pts = flat.chunks_exact(3).map(|c| Point3::new(c[0], c[1], c[2])).collect();
    PointSet::new(pts).map_err(|e| (NuminaStatus::InvalidArgument, format!("{what}: {e}")))
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn numina_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn numina_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn numina_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Convex-hull distance between two point sets given as packed `x y z`
/// triples (`n_a` and `n_b` points).
///
/// # Safety
/// `a` and `b` must point to `3 * n_a` and `3 * n_b` doubles.
#[no_mangle]
pub unsafe extern "C" fn numina_hull_distance(
    a: *const f64,
    n_a: usize,
    b: *const f64,
    n_b: usize,
    tolerance: f64,
    out_distance: *mut f64,
) -> NuminaStatus {
    guard(|| {
        let pa = points(a, n_a, "a")?;
        let pb = points(b, n_b, "b")?;
        let r = hull_distance(&pa, &pb, tolerance).map_err(|e| (NuminaStatus::InvalidArgument, e.to_string()))?;
        if !r.converged {
            return Err((
                NuminaStatus::NotConverged,
                format!("solver stopped at {} iterations", r.iterations),
            ));
        }
        if out_distance.is_null() {
            return Err(null("out_distance"));
        }
        *out_distance = r.distance;
        Ok(())
    })
}

/// True when `pred` lies strictly within `threshold * |gt|` of `gt`; a zero
/// ground truth requires an exact zero.
#[no_mangle]
pub extern "C" fn numina_within_threshold(pred: f64, gt: f64, threshold: f64) -> bool {
    within_threshold(pred, gt, threshold)
}

/// Fraction of the `n` predictions within `threshold` of their truths.
///
/// # Safety
/// `preds` and `truths` must point to `n` doubles each.
#[no_mangle]
pub unsafe extern "C" fn numina_threshold_accuracy(
    preds: *const f64,
    truths: *const f64,
    n: usize,
    threshold: f64,
    out_accuracy: *mut f64,
) -> NuminaStatus {
    guard(|| {
        if preds.is_null() || truths.is_null() || out_accuracy.is_null() {
            return Err(null("argument"));
        }
        if n == 0 {
            return Err((NuminaStatus::InvalidArgument, "no predictions".into()));
        }
        let p = std::slice::from_raw_parts(preds, n);
        let t = std::slice::from_raw_parts(truths, n);
        let hits = p
            .iter()
            .zip(t)
            .filter(|(p, t)| within_threshold(**p, **t, threshold))
            .count();
        *out_accuracy = hits as f64 / n as f64;
        Ok(())
    })
}

/// Loads a neutral scene JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn numina_scene_load(path: *const c_char, out: *mut *mut NuminaScene) -> NuminaStatus {
    guard(|| {
        let p = text(path, "path")?;
        let scene = load_scene(Path::new(p)).map_err(|e| (NuminaStatus::Io, e.to_string()))?;
        put(out, NuminaScene(scene))
    })
}

/// # Safety
/// `scene` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn numina_scene_instance_count(scene: *const NuminaScene) -> usize {
    scene.as_ref().map_or(0, |s| s.0.instances().len())
}

/// # Safety
/// `scene` must come from `numina_scene_load` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn numina_scene_free(scene: *mut NuminaScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Extracts the NGT table of a scene. `excluded_labels` is a comma-separated
/// list; null selects the default filter (`item`, `object`).
///
/// # Safety
/// `scene` must be a live handle; `excluded_labels` null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn numina_ngt_extract(
    scene: *const NuminaScene,
    excluded_labels: *const c_char,
    tolerance: f64,
    out: *mut *mut NuminaNgt,
) -> NuminaStatus {
    guard(|| {
        let s = handle(scene, "scene")?;
        let filter = if excluded_labels.is_null() {
            LabelFilter::default()
        } else {
            LabelFilter::new(
                text(excluded_labels, "excluded_labels")?
                    .split(',')
                    .map(str::trim)
                    .filter(|l| !l.is_empty()),
            )
        };
        let t = extract_ngt(&s.0, &filter, tolerance).map_err(|e| (NuminaStatus::InvalidArgument, e.to_string()))?;
        put(out, NuminaNgt(t))
    })
}

/// Reads an NGT JSON file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn numina_ngt_read(path: *const c_char, out: *mut *mut NuminaNgt) -> NuminaStatus {
    guard(|| {
        let p = text(path, "path")?;
        let t = read_ngt(Path::new(p)).map_err(|e| (NuminaStatus::Parse, e.to_string()))?;
        put(out, NuminaNgt(t))
    })
}

/// Hull distance between two instances of the table.
///
/// # Safety
/// `ngt` must be a live handle; ids NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn numina_ngt_distance(
    ngt: *const NuminaNgt,
    a: *const c_char,
    b: *const c_char,
    out_distance: *mut f64,
) -> NuminaStatus {
    guard(|| {
        let t = handle(ngt, "ngt")?;
        let (a, b) = (text(a, "a")?, text(b, "b")?);
        let d =
            t.0.distance(a, b)
                .ok_or_else(|| (NuminaStatus::InvalidArgument, format!("no distance for ({a}, {b})")))?;
        if out_distance.is_null() {
            return Err(null("out_distance"));
        }
        *out_distance = d;
        Ok(())
    })
}

/// The table serialized as NGT JSON; null on failure.
///
/// # Safety
/// `ngt` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn numina_ngt_to_json(ngt: *const NuminaNgt) -> *mut c_char {
    match ngt.as_ref() {
        Some(t) => owned_string(t.0.to_json()),
        None => {
            set_error("ngt is null");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `ngt` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn numina_ngt_free(ngt: *mut NuminaNgt) {
    if !ngt.is_null() {
        drop(Box::from_raw(ngt));
    }
}

/// Generates the rule-based dataset over `n_tables` NGT tables. `config_toml`
/// uses the pipeline config keys (targets, margins, seed); null means
/// defaults. The built-in template bank is used.
///
/// # Safety
/// `tables` must point to `n_tables` live handles.
#[no_mangle]
pub unsafe extern "C" fn numina_dataset_generate(
    tables: *const *const NuminaNgt,
    n_tables: usize,
    config_toml: *const c_char,
    out: *mut *mut NuminaDataset,
) -> NuminaStatus {
    guard(|| {
        if tables.is_null() {
            return Err(null("tables"));
        }
        let cfg: PipelineConfig = if config_toml.is_null() {
            PipelineConfig::default()
        } else {
            parse_config(text(config_toml, "config_toml")?)?
        };
        cfg.validate().map_err(|e| (NuminaStatus::InvalidArgument, e))?;
        let owned: Vec<NgtTable> = std::slice::from_raw_parts(tables, n_tables)
            .iter()
            .map(|&p| handle(p, "table").map(|t| t.0.clone()))
            .collect::<Result<_, _>>()?;
        let records = generate_rule_records(&owned, &builtin_bank(), &cfg.gen_config()).map_err(|e| match e {
            QaError::InsufficientCandidates(_) => (NuminaStatus::Shortfall, e.to_string()),
            _ => (NuminaStatus::InvalidArgument, e.to_string()),
        })?;
        let ds = assemble_dataset(vec![records]).map_err(|e| (NuminaStatus::InvalidArgument, e.to_string()))?;
        put(out, NuminaDataset(ds.records))
    })
}

fn parse_config(s: &str) -> Result<PipelineConfig, Failure> {
    PipelineConfig::from_toml(s).map_err(|e| (NuminaStatus::Parse, e))
}

/// Reads a dataset JSONL file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn numina_dataset_read(path: *const c_char, out: *mut *mut NuminaDataset) -> NuminaStatus {
    guard(|| {
        let p = text(path, "path")?;
        let records = read_jsonl(Path::new(p)).map_err(|e| (NuminaStatus::Parse, e.to_string()))?;
        put(out, NuminaDataset(records))
    })
}

/// # Safety
/// `ds` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn numina_dataset_len(ds: *const NuminaDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// The dataset as JSON Lines; null on failure.
///
/// # Safety
/// `ds` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn numina_dataset_to_jsonl(ds: *const NuminaDataset) -> *mut c_char {
    match ds.as_ref() {
        Some(d) => owned_string(to_jsonl_string(&d.0)),
        None => {
            set_error("dataset is null");
            ptr::null_mut()
        }
    }
}

/// Runs the dataset self-check with the built-in template bank.
///
/// # Safety
/// `ds` must be a live handle; `out_passed` writable.
#[no_mangle]
pub unsafe extern "C" fn numina_dataset_selfcheck(ds: *const NuminaDataset, out_passed: *mut bool) -> NuminaStatus {
    guard(|| {
        let d = handle(ds, "dataset")?;
        if out_passed.is_null() {
            return Err(null("out_passed"));
        }
        let report = selfcheck(&d.0, &builtin_bank());
        if !report.passed {
            set_error(&report.problems.join("; "));
        }
        *out_passed = report.passed;
        Ok(())
    })
}

/// # Safety
/// `ds` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn numina_dataset_free(ds: *mut NuminaDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Scores predictions (JSON Lines of `{"qa_id", "output"}`) against a dataset.
///
/// # Safety
/// `ds` must be a live handle; `predictions_jsonl` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn numina_score(
    ds: *const NuminaDataset,
    predictions_jsonl: *const c_char,
    out: *mut *mut NuminaReport,
) -> NuminaStatus {
    guard(|| {
        let d = handle(ds, "dataset")?;
        let preds: Vec<PredictionRecord> = parse_jsonl(
            text(predictions_jsonl, "predictions_jsonl")?,
            Path::new("<predictions>"),
        )
        .map_err(|e| (NuminaStatus::Parse, e.to_string()))?;
        let report = score_dataset(&d.0, &preds).map_err(|e| (NuminaStatus::InvalidArgument, e.to_string()))?;
        put(out, NuminaReport(report))
    })
}

/// The score report as JSON; null on failure.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn numina_report_to_json(report: *const NuminaReport) -> *mut c_char {
    match report.as_ref() {
        Some(r) => owned_string(r.0.to_json()),
        None => {
            set_error("report is null");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `report` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn numina_report_free(report: *mut NuminaReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
