//! C ABI over the `hclex` scorer, lexicon and embedding readers.
//!
//! Objects cross the boundary as opaque handles created by `*_load` or
//! `*_compile` functions and released by the matching `*_free`. Every
//! fallible call returns an [`HclexStatus`]; on failure the message is kept
//! per thread and can be copied out with [`hclex_last_error_message`].
//!
//! Handles are not synchronized. A matcher or embedding handle may be read
//! from several threads at once, but a handle must not be freed while in use.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hclex::embedding::{cosine, read_embeddings, EmbeddingMatrix, Vocabulary};
use hclex::eval::select_threshold;
use hclex::lexicon::{load_lexicon, Lexicon};
use hclex::scorer::{score_text, CompileOptions, CompiledMatcher};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HclexStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// A file could not be opened or read.
    Io = 3,
    /// Input data was rejected, e.g. a malformed lexicon.
    InvalidData = 4,
    /// An index or length argument is out of range.
    OutOfRange = 5,
    /// The caller's buffer is too small; the required size was reported.
    BufferTooSmall = 6,
    /// A token is not in the vocabulary.
    UnknownToken = 7,
    Internal = 8,
}

pub struct HclexLexicon(Lexicon);

pub struct HclexMatcher(CompiledMatcher);

pub struct HclexEmbeddings {
    vocab: Vocabulary,
    matrix: EmbeddingMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: HclexStatus, msg: impl Into<String>) -> HclexStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    status
}

fn from_error(e: hclex::Error) -> HclexStatus {
    let status = match e {
        hclex::Error::Io(_) => HclexStatus::Io,
        hclex::Error::UnknownToken(_) => HclexStatus::UnknownToken,
        ref e if e.is_data_error() => HclexStatus::InvalidData,
        _ => HclexStatus::Internal,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning a panic into [`HclexStatus::Internal`].
fn guard<F: FnOnce() -> HclexStatus>(f: F) -> HclexStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(HclexStatus::Internal, "panic inside hclex"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, HclexStatus> {
    if p.is_null() {
        return Err(fail(HclexStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(HclexStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn open(path: &str) -> Result<BufReader<File>, HclexStatus> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| fail(HclexStatus::Io, format!("cannot open {path}: {e}")))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! non_null {
    ($p:expr, $name:literal) => {
        if $p.is_null() {
            return fail(HclexStatus::NullPointer, concat!($name, " is null"));
        }
    };
}

/// Copies `s` plus a NUL into `buf`. `out_len` receives the byte length
/// without the NUL whether or not it fits.
unsafe fn write_str(s: &str, buf: *mut c_char, buf_len: usize, out_len: *mut usize) -> HclexStatus {
    if !out_len.is_null() {
        *out_len = s.len();
    }
    if buf.is_null() || buf_len < s.len() + 1 {
        return fail(
            HclexStatus::BufferTooSmall,
            format!("{} bytes needed", s.len() + 1),
        );
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    HclexStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hclex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message into `buf`.
///
/// # Safety
/// `buf` must point to `buf_len` writable bytes or be null; `out_len` must
/// be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hclex_last_error_message(
    buf: *mut c_char,
    buf_len: usize,
    out_len: *mut usize,
) -> HclexStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    write_str(&msg, buf, buf_len, out_len)
}

/// Loads the lexicon bundled with the library.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn hclex_lexicon_published(out: *mut *mut HclexLexicon) -> HclexStatus {
    non_null!(out, "out");
    guard(|| {
        *out = Box::into_raw(Box::new(HclexLexicon(Lexicon::published())));
        HclexStatus::Ok
    })
}

/// Loads a lexicon CSV (`term,category,subcategory,source,similarity`).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hclex_lexicon_load(
    path: *const c_char,
    out: *mut *mut HclexLexicon,
) -> HclexStatus {
    non_null!(out, "out");
    let path = tri!(str_arg(path, "path"));
    guard(|| {
        let input = tri!(open(path));
        match load_lexicon(input) {
            Ok(l) => {
                *out = Box::into_raw(Box::new(HclexLexicon(l)));
                HclexStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of terms in the lexicon; 0 for a null handle.
///
/// # Safety
/// `lexicon` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hclex_lexicon_len(lexicon: *const HclexLexicon) -> usize {
    lexicon.as_ref().map_or(0, |l| l.0.len())
}

/// # Safety
/// `lexicon` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hclex_lexicon_free(lexicon: *mut HclexLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

/// Compiles a lexicon into a matcher. `exclude` lists `n_exclude`
/// subcategory names whose columns are dropped, e.g. `"covid"`.
///
/// # Safety
/// `lexicon` must be a live handle, `exclude` null or an array of
/// `n_exclude` NUL-terminated strings, `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hclex_matcher_compile(
    lexicon: *const HclexLexicon,
    exclude: *const *const c_char,
    n_exclude: usize,
    out: *mut *mut HclexMatcher,
) -> HclexStatus {
    non_null!(lexicon, "lexicon");
    non_null!(out, "out");
    if exclude.is_null() && n_exclude > 0 {
        return fail(HclexStatus::NullPointer, "exclude is null");
    }
    let mut names = Vec::with_capacity(n_exclude);
    for i in 0..n_exclude {
        names.push(tri!(str_arg(*exclude.add(i), "exclude entry")).to_owned());
    }
    guard(|| {
        let opts = CompileOptions {
            exclude_subcategories: names,
        };
        match CompiledMatcher::compile(&(*lexicon).0, &opts) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(HclexMatcher(m)));
                HclexStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of score columns; 0 for a null handle.
///
/// # Safety
/// `matcher` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hclex_matcher_columns(matcher: *const HclexMatcher) -> usize {
    matcher.as_ref().map_or(0, |m| m.0.columns().len())
}

/// Copies the label of column `index`, e.g. `"Health and Safety (covid)"`.
///
/// # Safety
/// `matcher` must be a live handle; `buf`/`out_len` as for
/// [`hclex_last_error_message`].
#[no_mangle]
pub unsafe extern "C" fn hclex_matcher_column_label(
    matcher: *const HclexMatcher,
    index: usize,
    buf: *mut c_char,
    buf_len: usize,
    out_len: *mut usize,
) -> HclexStatus {
    non_null!(matcher, "matcher");
    let cols = (*matcher).0.columns();
    if index >= cols.len() {
        return fail(HclexStatus::OutOfRange, format!("column {index} of {}", cols.len()));
    }
    write_str(&cols[index].label(), buf, buf_len, out_len)
}

/// Scores one text. `counts` receives `n_counts` hit counts, which must equal
/// the column count; `total_tokens` receives the token count.
///
/// # Safety
/// `text` must be NUL-terminated, `counts` must point to `n_counts`
/// writable values and `total_tokens` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn hclex_score_text(
    matcher: *const HclexMatcher,
    text: *const c_char,
    counts: *mut u64,
    n_counts: usize,
    total_tokens: *mut u64,
) -> HclexStatus {
    non_null!(matcher, "matcher");
    non_null!(counts, "counts");
    let text = tri!(str_arg(text, "text"));
    let m = &(*matcher).0;
    if n_counts != m.columns().len() {
        return fail(
            HclexStatus::OutOfRange,
            format!("n_counts is {n_counts}, matcher has {} columns", m.columns().len()),
        );
    }
    guard(|| {
        let s = score_text(m, "", text);
        ptr::copy_nonoverlapping(s.counts.as_ptr(), counts, n_counts);
        if !total_tokens.is_null() {
            *total_tokens = s.total_tokens;
        }
        HclexStatus::Ok
    })
}

/// # Safety
/// `matcher` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hclex_matcher_free(matcher: *mut HclexMatcher) {
    if !matcher.is_null() {
        drop(Box::from_raw(matcher));
    }
}

/// Loads a binary embedding file written by `hclex train`.
///
/// # Safety
/// `path` must be NUL-terminated; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hclex_embeddings_load(
    path: *const c_char,
    out: *mut *mut HclexEmbeddings,
) -> HclexStatus {
    non_null!(out, "out");
    let path = tri!(str_arg(path, "path"));
    guard(|| {
        let input = tri!(open(path));
        match read_embeddings(input) {
            Ok((vocab, matrix)) => {
                *out = Box::into_raw(Box::new(HclexEmbeddings { vocab, matrix }));
                HclexStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Vocabulary size; 0 for a null handle.
///
/// # Safety
/// `emb` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hclex_embeddings_len(emb: *const HclexEmbeddings) -> usize {
    emb.as_ref().map_or(0, |e| e.vocab.len())
}

/// Vector dimension; 0 for a null handle.
///
/// # Safety
/// `emb` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hclex_embeddings_dim(emb: *const HclexEmbeddings) -> usize {
    emb.as_ref().map_or(0, |e| e.matrix.dim())
}

/// Cosine similarity of two vocabulary tokens.
///
/// # Safety
/// `emb` must be a live handle, `a` and `b` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hclex_embeddings_cosine(
    emb: *const HclexEmbeddings,
    a: *const c_char,
    b: *const c_char,
    out: *mut f64,
) -> HclexStatus {
    non_null!(emb, "emb");
    non_null!(out, "out");
    let a = tri!(str_arg(a, "a"));
    let b = tri!(str_arg(b, "b"));
    let e = &*emb;
    let id = |t: &str| {
        e.vocab
            .id(t)
            .ok_or_else(|| from_error(hclex::Error::UnknownToken(t.to_owned())))
    };
    let (ia, ib) = (tri!(id(a)), tri!(id(b)));
    match cosine(e.matrix.row(ia), e.matrix.row(ib)) {
        Ok(c) => {
            *out = c;
            HclexStatus::Ok
        }
        Err(err) => from_error(err),
    }
}

/// # Safety
/// `emb` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hclex_embeddings_free(emb: *mut HclexEmbeddings) {
    if !emb.is_null() {
        drop(Box::from_raw(emb));
    }
}

/// F1-maximizing threshold over `n` binary labels (0 or 1) and
/// probabilities. Ties go to the higher threshold.
///
/// # Safety
/// `labels` and `probs` must point to `n` values; `threshold` and `f1`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn hclex_select_threshold(
    labels: *const u8,
    probs: *const f64,
    n: usize,
    threshold: *mut f64,
    f1: *mut f64,
) -> HclexStatus {
    non_null!(labels, "labels");
    non_null!(probs, "probs");
    non_null!(threshold, "threshold");
    non_null!(f1, "f1");
    let labels = std::slice::from_raw_parts(labels, n);
    let probs = std::slice::from_raw_parts(probs, n);
    if let Some(l) = labels.iter().find(|&&l| l > 1) {
        return fail(HclexStatus::InvalidData, format!("label {l} is not 0 or 1"));
    }
    let y: Vec<bool> = labels.iter().map(|&l| l == 1).collect();
    guard(|| match select_threshold(&y, probs) {
        Ok(c) => {
            *threshold = c.threshold;
            *f1 = c.result.f1;
            HclexStatus::Ok
        }
        Err(e) => from_error(e),
    })
}
