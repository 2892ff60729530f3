//! C interface.
//!
//! Fallible functions return an integer status (`SMF_OK` on success); on failure
//! `smf_last_error` describes the problem. Strings returned through out-parameters are owned by the caller and must be
//! released with `smf_string_free`; handles with their matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use smforge::groups::{emit_presentation, Level, Presentation};
use smforge::machines::m1::{build_m1, default_letters, shift};
use smforge::params::Params;
use smforge::smachine::{format_machine, parse_machine, Machine};

pub const SMF_OK: i32 = 0;
pub const SMF_ERR_NULL: i32 = 1;
pub const SMF_ERR_UTF8: i32 = 2;
pub const SMF_ERR_PARSE: i32 = 3;
pub const SMF_ERR_REJECTED: i32 = 4;
pub const SMF_ERR_PANIC: i32 = 5;

pub const SMF_LEVEL_M: i32 = 0;
pub const SMF_LEVEL_G: i32 = 1;

/// Opaque machine handle.
pub struct SmfMachine {
    inner: Machine,
}

/// Opaque presentation handle.
pub struct SmfPresentation {
    inner: Presentation,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Fail(i32, String);

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SMF_OK
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            SMF_ERR_PANIC
        }
    }
}

fn parse_err<E: std::fmt::Display>(e: E) -> Fail {
    Fail(SMF_ERR_PARSE, e.to_string())
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(SMF_ERR_NULL, "null string".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(SMF_ERR_UTF8, e.to_string()))
}

fn check_out<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        Err(Fail(SMF_ERR_NULL, "null out-parameter".into()))
    } else {
        Ok(())
    }
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failure on this thread (empty after a success). Valid until the next
/// call on the same thread.
#[no_mangle]
pub extern "C" fn smf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn smf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The shifting machine over `n_letters` input letters.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smf_machine_m1(n_letters: usize, out: *mut *mut SmfMachine) -> i32 {
    guard(|| {
        check_out(out)?;
        let (m, _) = build_m1(&default_letters(n_letters)).map_err(parse_err)?;
        *out = Box::into_raw(Box::new(SmfMachine { inner: m }));
        Ok(())
    })
}

/// Parses a machine in the line format.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smf_machine_parse(src: *const c_char, out: *mut *mut SmfMachine) -> i32 {
    guard(|| {
        check_out(out)?;
        let m = parse_machine(text(src)?).map_err(parse_err)?;
        *out = Box::into_raw(Box::new(SmfMachine { inner: m }));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn smf_machine_free(m: *mut SmfMachine) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smf_machine_format(m: *const SmfMachine, out: *mut *mut c_char) -> i32 {
    guard(|| {
        check_out(out)?;
        let m = m.as_ref().ok_or(Fail(SMF_ERR_NULL, "null machine".into()))?;
        *out = c_string(format_machine(&m.inner));
        Ok(())
    })
}

/// Applies `history` to the configuration `word` and returns the final configuration.
///
/// # Safety
/// `m` must be a live handle, the strings NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smf_machine_run(
    m: *const SmfMachine,
    word: *const c_char,
    history: *const c_char,
    out: *mut *mut c_char,
) -> i32 {
    guard(|| {
        check_out(out)?;
        let m = &m.as_ref().ok_or(Fail(SMF_ERR_NULL, "null machine".into()))?.inner;
        let w = m.parse_admissible(text(word)?).map_err(parse_err)?;
        let h = m.parse_history(text(history)?).map_err(parse_err)?;
        let end = m.run_final(&w, &h).map_err(|e| Fail(SMF_ERR_REJECTED, e.to_string()))?;
        *out = c_string(m.format_admissible(&end));
        Ok(())
    })
}

/// Shift of a first-sector word of the shifting machine over `n_letters` letters. Writes the
/// history text and its length; `SMF_ERR_REJECTED` when the word is not shiftable.
///
/// # Safety
/// `word` must be NUL-terminated; `out_history` and `out_len` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn smf_shift(
    n_letters: usize,
    word: *const c_char,
    out_history: *mut *mut c_char,
    out_len: *mut usize,
) -> i32 {
    guard(|| {
        check_out(out_history)?;
        check_out(out_len)?;
        let (m, sc) = build_m1(&default_letters(n_letters)).map_err(parse_err)?;
        let w = m.alphabet.parse_word(text(word)?).map_err(parse_err)?;
        let res = shift(&sc, &w).ok_or(Fail(SMF_ERR_REJECTED, "not shiftable".into()))?;
        *out_len = res.history.len();
        *out_history = c_string(m.format_history(&res.history));
        Ok(())
    })
}

/// Presentation of the machine's group; `level` is `SMF_LEVEL_M` or `SMF_LEVEL_G`.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smf_presentation_emit(m: *const SmfMachine, level: i32, out: *mut *mut SmfPresentation) -> i32 {
    guard(|| {
        check_out(out)?;
        let m = &m.as_ref().ok_or(Fail(SMF_ERR_NULL, "null machine".into()))?.inner;
        let level = match level {
            SMF_LEVEL_M => Level::M,
            SMF_LEVEL_G => Level::G,
            _ => return Err(Fail(SMF_ERR_PARSE, format!("unknown level {level}"))),
        };
        let p = emit_presentation(m, level).map_err(|e| Fail(SMF_ERR_REJECTED, e.to_string()))?;
        *out = Box::into_raw(Box::new(SmfPresentation { inner: p }));
        Ok(())
    })
}

/// Number of relators, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smf_presentation_len(p: *const SmfPresentation) -> usize {
    p.as_ref().map_or(0, |p| p.inner.relators.len())
}

/// Relators one per line, followed by the count summary.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smf_presentation_format(p: *const SmfPresentation, out: *mut *mut c_char) -> i32 {
    guard(|| {
        check_out(out)?;
        let p = &p.as_ref().ok_or(Fail(SMF_ERR_NULL, "null presentation".into()))?.inner;
        *out = c_string(p.format() + &p.format_counts());
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn smf_presentation_free(p: *mut SmfPresentation) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Dehn bound at `n` for the desk parameters and a linear time bound `1 + n`, in closed form.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smf_dehn_bound(n: u64, out: *mut *mut c_char) -> i32 {
    guard(|| {
        check_out(out)?;
        let wf = Params::desk().weights(vec![1, 1]);
        *out = c_string(wf.show(&wf.dehn_u(n)));
        Ok(())
    })
}
