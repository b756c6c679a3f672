//! C interface to `seqteach`.
//!
//! Vocabularies and learners are opaque handles created and destroyed by
//! this library. Every fallible call returns a [`SeqteachStatus`]; on
//! failure the message is kept per thread and can be read with
//! [`seqteach_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use seqteach::analysis;
use seqteach::learner::{self, Decoder, LearnerState};
use seqteach::vocab::{
    generate_synthetic_vocabulary, parse_vocabulary, PhonemeInventory, SyntheticSpec, Vocabulary,
    WordItem,
};
use seqteach::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqteachStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    RuntimeError = 4,
    Panic = 5,
}

/// Opaque vocabulary handle.
pub struct SeqteachVocabulary {
    inner: Vocabulary,
    decoder: Decoder,
}

/// Opaque learner handle.
pub struct SeqteachLearner {
    inner: LearnerState,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SeqteachStatus {
    match e.exit_code() {
        1 => SeqteachStatus::InvalidArgument,
        2 => SeqteachStatus::DataError,
        _ => SeqteachStatus::RuntimeError,
    }
}

fn guard<F: FnOnce() -> Result<(), (SeqteachStatus, String)>>(f: F) -> SeqteachStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SeqteachStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SeqteachStatus::Panic
        }
    }
}

fn lib(e: Error) -> (SeqteachStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SeqteachStatus, String) {
    (SeqteachStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice_or_empty<'a, T>(
    p: *const T,
    n: usize,
) -> Result<&'a [T], (SeqteachStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null("array"));
    }
    Ok(slice::from_raw_parts(p, n))
}

/// Copy the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn seqteach_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Generate a synthetic lexicon.
///
/// # Safety
/// `out` must point to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn seqteach_vocabulary_synthetic(
    n_words: usize,
    exception_rate: f64,
    seed: u64,
    out: *mut *mut SeqteachVocabulary,
) -> SeqteachStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = SyntheticSpec {
            n_words,
            exception_rate,
            ..SyntheticSpec::default()
        };
        let v = generate_synthetic_vocabulary(&spec, seed)
            .map_err(lib)?
            .vocabulary;
        let decoder = Decoder::new(v.inventory());
        *out = Box::into_raw(Box::new(SeqteachVocabulary { inner: v, decoder }));
        Ok(())
    })
}

/// Parse a vocabulary TSV with the built-in phoneme inventory. Any bad row
/// fails the whole call.
///
/// # Safety
/// `tsv` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqteach_vocabulary_parse(
    tsv: *const c_char,
    out: *mut *mut SeqteachVocabulary,
) -> SeqteachStatus {
    guard(|| {
        if tsv.is_null() {
            return Err(null("tsv"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(tsv)
            .to_str()
            .map_err(|_| (SeqteachStatus::DataError, "input is not UTF-8".to_string()))?;
        let v = parse_vocabulary(text, &PhonemeInventory::builtin()).map_err(lib)?;
        let decoder = Decoder::new(v.inventory());
        *out = Box::into_raw(Box::new(SeqteachVocabulary { inner: v, decoder }));
        Ok(())
    })
}

/// Number of words, or 0 for a null handle.
///
/// # Safety
/// `vocab` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seqteach_vocabulary_len(vocab: *const SeqteachVocabulary) -> usize {
    vocab.as_ref().map_or(0, |v| v.inner.len())
}

/// # Safety
/// `vocab` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seqteach_vocabulary_free(vocab: *mut SeqteachVocabulary) {
    if !vocab.is_null() {
        drop(Box::from_raw(vocab));
    }
}

/// A fresh reading-model learner with default hyperparameters.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqteach_learner_new(
    seed: u64,
    out: *mut *mut SeqteachLearner,
) -> SeqteachStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(SeqteachLearner {
            inner: LearnerState::reading(seed),
        }));
        Ok(())
    })
}

/// # Safety
/// `learner` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seqteach_learner_free(learner: *mut SeqteachLearner) {
    if !learner.is_null() {
        drop(Box::from_raw(learner));
    }
}

unsafe fn items(
    vocab: &SeqteachVocabulary,
    indices: *const usize,
    n: usize,
) -> Result<Vec<&WordItem>, (SeqteachStatus, String)> {
    let ix = slice_or_empty(indices, n)?;
    ix.iter()
        .map(|&i| {
            (i < vocab.inner.len())
                .then(|| vocab.inner.item(i))
                .ok_or_else(|| {
                    (
                        SeqteachStatus::InvalidArgument,
                        format!("word index {i} out of range"),
                    )
                })
        })
        .collect()
}

/// Train on the words `sequence[0..n]` (vocabulary indices), one online
/// step each.
///
/// # Safety
/// Handles must be live; `sequence` must point to `n` indices.
#[no_mangle]
pub unsafe extern "C" fn seqteach_learner_train(
    learner: *mut SeqteachLearner,
    vocab: *const SeqteachVocabulary,
    sequence: *const usize,
    n: usize,
) -> SeqteachStatus {
    guard(|| {
        let l = learner.as_mut().ok_or_else(|| null("learner"))?;
        let v = vocab.as_ref().ok_or_else(|| null("vocab"))?;
        let words = items(v, sequence, n)?;
        let order: Vec<usize> = (0..words.len()).collect();
        learner::train_sequence(&mut l.inner, &words, &order).map_err(lib)
    })
}

/// Fraction of the words `test[0..n]` read incorrectly.
///
/// # Safety
/// Handles must be live; `test` must point to `n` indices; `cost` writable.
#[no_mangle]
pub unsafe extern "C" fn seqteach_learner_terminal_cost(
    learner: *const SeqteachLearner,
    vocab: *const SeqteachVocabulary,
    test: *const usize,
    n: usize,
    cost: *mut f64,
) -> SeqteachStatus {
    guard(|| {
        let l = learner.as_ref().ok_or_else(|| null("learner"))?;
        let v = vocab.as_ref().ok_or_else(|| null("vocab"))?;
        if cost.is_null() {
            return Err(null("cost"));
        }
        let words = items(v, test, n)?;
        *cost = learner::terminal_cost(&l.inner, &words, &v.decoder).map_err(lib)?;
        Ok(())
    })
}

/// Spearman rank correlation with a two-sided p-value.
///
/// # Safety
/// `xs` and `ys` must point to `n` values; `rho` and `p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqteach_spearman(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    rho: *mut f64,
    p: *mut f64,
) -> SeqteachStatus {
    guard(|| {
        if rho.is_null() || p.is_null() {
            return Err(null("output"));
        }
        let c =
            analysis::spearman_rho(slice_or_empty(xs, n)?, slice_or_empty(ys, n)?).map_err(lib)?;
        *rho = c.rho;
        *p = c.p_value;
        Ok(())
    })
}

/// Welch two-sample t-test, two-sided.
///
/// # Safety
/// `xs` must point to `nx` values and `ys` to `ny`; `t` and `p` writable.
#[no_mangle]
pub unsafe extern "C" fn seqteach_welch_t_test(
    xs: *const f64,
    nx: usize,
    ys: *const f64,
    ny: usize,
    t: *mut f64,
    p: *mut f64,
) -> SeqteachStatus {
    guard(|| {
        if t.is_null() || p.is_null() {
            return Err(null("output"));
        }
        let r = analysis::two_sample_t_test(slice_or_empty(xs, nx)?, slice_or_empty(ys, ny)?)
            .map_err(lib)?;
        *t = r.t;
        *p = r.p_value;
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn seqteach_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
