//! C ABI over the `swcoref` library.
//!
//! Corpora and partitions are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns an [`SwcStatus`];
//! on failure [`swc_last_error_message`] describes the most recent error on
//! the calling thread. Strings returned by the library are freed with
//! [`swc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use swcoref::car::{hashed_table, resolve_car, CarConfig};
use swcoref::fuzzy::{resolve_fuzzy, FuzzyConfig};
use swcoref::io::{parse_corpus, partition_from_json, partition_to_json, read_corpus};
use swcoref::lexical::ro_similarity;
use swcoref::model::{gold_partition, validate_corpus};
use swcoref::scorer::score_all;
use swcoref::{Corpus, Error, Partition};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    InvalidCorpus = 6,
    MissingGold = 7,
    MentionMismatch = 8,
    Internal = 99,
}

/// Opaque corpus handle.
pub struct SwcCorpus(Corpus);

/// Opaque partition handle.
pub struct SwcPartition(Partition);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SwcPrf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SwcScoreReport {
    pub muc: SwcPrf,
    pub b3: SwcPrf,
    pub ceafe: SwcPrf,
    pub conll_f1: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> SwcStatus {
    match e {
        Error::Io { .. } => SwcStatus::Io,
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => SwcStatus::Parse,
        Error::InvalidCorpus(_) | Error::DuplicateMention(_) | Error::UnknownDocument(_) => SwcStatus::InvalidCorpus,
        Error::MissingGold(_) => SwcStatus::MissingGold,
        Error::MentionSetMismatch { .. } => SwcStatus::MentionMismatch,
        Error::InvalidConfig(_) => SwcStatus::InvalidArgument,
        _ => SwcStatus::Internal,
    }
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (SwcStatus, String)>) -> SwcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SwcStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_owned());
            SwcStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (SwcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SwcStatus, String) {
    (SwcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SwcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SwcStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (SwcStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

fn checked(corpus: Corpus) -> Result<Box<SwcCorpus>, (SwcStatus, String)> {
    let report = validate_corpus(&corpus);
    if let Some(first) = report.first() {
        return Err((
            SwcStatus::InvalidCorpus,
            format!("{} violation(s), first: {first}", report.len()),
        ));
    }
    Ok(Box::new(SwcCorpus(corpus)))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn swc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Free a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn swc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse and validate a JSONL corpus held in memory.
///
/// # Safety
/// `jsonl` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swc_corpus_from_jsonl(jsonl: *const c_char, out: *mut *mut SwcCorpus) -> SwcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let text = str_arg(jsonl, "jsonl")?;
        let corpus = checked(parse_corpus(text, "<memory>").map_err(lib_err)?)?;
        *out = Box::into_raw(corpus);
        Ok(())
    })
}

/// Read and validate a JSONL corpus file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swc_corpus_from_path(path: *const c_char, out: *mut *mut SwcCorpus) -> SwcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = str_arg(path, "path")?;
        let corpus = checked(read_corpus(path).map_err(lib_err)?)?;
        *out = Box::into_raw(corpus);
        Ok(())
    })
}

/// # Safety
/// `corpus` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn swc_corpus_free(corpus: *mut SwcCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of mentions, or 0 for null.
///
/// # Safety
/// `corpus` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swc_corpus_mention_count(corpus: *const SwcCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.mentions.len())
}

/// Fuzzy-match clustering at threshold `theta` in [0, 1].
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swc_resolve_fuzzy(
    corpus: *const SwcCorpus,
    theta: f64,
    out: *mut *mut SwcPartition,
) -> SwcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let corpus = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        let cfg = FuzzyConfig::new(theta).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SwcPartition(resolve_fuzzy(&corpus.0, cfg))));
        Ok(())
    })
}

/// Context-aware clustering over trigram-hash embeddings of dimension `dim`
/// (at least 8).
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swc_resolve_car_hashed(
    corpus: *const SwcCorpus,
    alpha: f64,
    delta: f64,
    max_context: usize,
    dim: usize,
    out: *mut *mut SwcPartition,
) -> SwcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let corpus = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        if dim < 8 {
            return Err((SwcStatus::InvalidArgument, format!("dim {dim} below 8")));
        }
        let cfg = CarConfig {
            alpha,
            delta,
            max_context_sentences: max_context,
        };
        cfg.validate().map_err(lib_err)?;
        let table = hashed_table(&corpus.0, dim, max_context).map_err(lib_err)?;
        let p = resolve_car(&corpus.0, &table, &cfg).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SwcPartition(p)));
        Ok(())
    })
}

/// Gold clustering of a fully labeled corpus.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swc_gold_partition(corpus: *const SwcCorpus, out: *mut *mut SwcPartition) -> SwcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let corpus = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        let p = gold_partition(&corpus.0).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SwcPartition(p)));
        Ok(())
    })
}

/// # Safety
/// `partition` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn swc_partition_free(partition: *mut SwcPartition) {
    if !partition.is_null() {
        drop(Box::from_raw(partition));
    }
}

/// Number of clustered mentions, or 0 for null.
///
/// # Safety
/// `partition` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swc_partition_len(partition: *const SwcPartition) -> usize {
    partition.as_ref().map_or(0, |p| p.0.len())
}

/// Serialize to the partition JSON format. Free the result with
/// [`swc_string_free`].
///
/// # Safety
/// `partition` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swc_partition_to_json(partition: *const SwcPartition, out: *mut *mut c_char) -> SwcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let p = partition.as_ref().ok_or_else(|| null("partition"))?;
        let text = CString::new(partition_to_json(&p.0)).map_err(|e| (SwcStatus::Internal, e.to_string()))?;
        *out = text.into_raw();
        Ok(())
    })
}

/// Parse the partition JSON format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swc_partition_from_json(json: *const c_char, out: *mut *mut SwcPartition) -> SwcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let text = str_arg(json, "json")?;
        let p = partition_from_json(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SwcPartition(p)));
        Ok(())
    })
}

/// MUC, B-cubed, CEAF-e and their mean F1.
///
/// # Safety
/// `key` and `response` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swc_score(
    key: *const SwcPartition,
    response: *const SwcPartition,
    out: *mut SwcScoreReport,
) -> SwcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let key = key.as_ref().ok_or_else(|| null("key"))?;
        let response = response.as_ref().ok_or_else(|| null("response"))?;
        let r = score_all(&key.0, &response.0).map_err(lib_err)?;
        let prf = |p: swcoref::scorer::Prf| SwcPrf {
            precision: p.precision,
            recall: p.recall,
            f1: p.f1,
        };
        *out = SwcScoreReport {
            muc: prf(r.muc),
            b3: prf(r.b3),
            ceafe: prf(r.ceafe),
            conll_f1: r.conll_f1,
        };
        Ok(())
    })
}

/// Ratcliff/Obershelp similarity of two strings, written to `out`.
///
/// # Safety
/// `a` and `b` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swc_ro_similarity(a: *const c_char, b: *const c_char, out: *mut f64) -> SwcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let a = str_arg(a, "a")?;
        let b = str_arg(b, "b")?;
        *out = ro_similarity(a, b).value();
        Ok(())
    })
}
