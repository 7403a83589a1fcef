//! C ABI over the scenario front end of `pdeform`.
//!
//! Scenarios are parsed into an opaque [`PdeformScenario`] handle; commands
//! run against a handle and return their report as an owned C string. Every
//! entry point returns a [`PdeformStatus`]; on failure the message is kept per
//! thread and read back with [`pdeform_last_error`]. Strings handed out by the
//! library are released with [`pdeform_string_free`], handles with
//! [`pdeform_scenario_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pdeform::cli::{exit_code, parse_scenario, run_command, Options, Scenario, COMMANDS};
use pdeform::Error;

/// Parsed scenario. Opaque to C callers.
pub struct PdeformScenario {
    inner: Scenario,
}

/// Result code of every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdeformStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The scenario text does not follow the grammar.
    Syntax = 3,
    /// The scenario names an undefined object.
    UnresolvedReference = 4,
    /// The command name is not one of the supported commands.
    UnknownCommand = 5,
    /// A construction refused because its rank hypothesis fails.
    HypothesisFailed = 6,
    /// The monomial window is too small for an exact answer.
    WindowInsufficient = 7,
    /// Any other error reported by the engine.
    Engine = 8,
    /// The engine panicked; this is a bug.
    Internal = 9,
}

/// Options of [`pdeform_run`]. Negative `window` or `order` select the
/// scenario default; `seed` is used only when `has_seed` is true.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PdeformOptions {
    pub window: i32,
    pub order: i32,
    pub seed: u64,
    pub has_seed: bool,
    pub json: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> PdeformStatus {
    match e {
        Error::SyntaxError { .. } => PdeformStatus::Syntax,
        Error::UnresolvedReference(_) => PdeformStatus::UnresolvedReference,
        Error::HypothesisFailed { .. } => PdeformStatus::HypothesisFailed,
        Error::WindowInsufficient(_) => PdeformStatus::WindowInsufficient,
        _ => PdeformStatus::Engine,
    }
}

fn fail(status: PdeformStatus, msg: impl Into<String>) -> PdeformStatus {
    set_error(msg);
    status
}

/// Run `body`, turning a panic into [`PdeformStatus::Internal`].
fn guarded(body: impl FnOnce() -> PdeformStatus) -> PdeformStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            fail(PdeformStatus::Internal, format!("panic: {}", msg.unwrap_or_default()))
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, PdeformStatus> {
    if p.is_null() {
        return Err(fail(PdeformStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|e| fail(PdeformStatus::InvalidUtf8, e.to_string()))
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn pdeform_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn pdeform_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parse scenario text into a new handle stored in `*out`.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdeform_scenario_parse(text: *const c_char, out: *mut *mut PdeformScenario) -> PdeformStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PdeformStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_scenario(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(PdeformScenario { inner }));
                PdeformStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Canonical text of a scenario, stored in `*out`; free it with
/// [`pdeform_string_free`].
///
/// # Safety
/// `scenario` must come from [`pdeform_scenario_parse`] and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn pdeform_scenario_serialize(scenario: *const PdeformScenario, out: *mut *mut c_char) -> PdeformStatus {
    guarded(|| {
        if scenario.is_null() || out.is_null() {
            return fail(PdeformStatus::NullArgument, "null argument");
        }
        *out = to_c((*scenario).inner.serialize());
        PdeformStatus::Ok
    })
}

/// Release a scenario handle. Null is ignored.
///
/// # Safety
/// `scenario` must come from [`pdeform_scenario_parse`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pdeform_scenario_free(scenario: *mut PdeformScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Run one command against a scenario. On success `*report` receives the
/// text (or JSON) report and `*exit` the command's exit code: 0 for a
/// positive answer, 1 for invalid input or failed validation, 2 for a
/// negative mathematical answer. On an engine error `*exit` still receives
/// the exit code the command line tool would use and `*report` is null.
/// `options` may be null for the scenario defaults.
///
/// # Safety
/// Pointers must be valid; `command` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn pdeform_run(
    scenario: *const PdeformScenario,
    command: *const c_char,
    options: *const PdeformOptions,
    report: *mut *mut c_char,
    exit: *mut i32,
) -> PdeformStatus {
    guarded(|| {
        if scenario.is_null() || report.is_null() || exit.is_null() {
            return fail(PdeformStatus::NullArgument, "null argument");
        }
        *report = ptr::null_mut();
        *exit = 1;
        let cmd = match read_str(command) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if !COMMANDS.contains(&cmd) {
            return fail(PdeformStatus::UnknownCommand, format!("unknown command `{cmd}`; expected one of {}", COMMANDS.join(", ")));
        }
        let o = if options.is_null() { PdeformOptions { window: -1, order: -1, seed: 0, has_seed: false, json: false } } else { *options };
        let opts = Options {
            window: (o.window >= 0).then_some(o.window),
            order: (o.order >= 0).then_some(o.order as u32),
            seed: o.has_seed.then_some(o.seed),
        };
        match run_command(cmd, &(*scenario).inner, &opts) {
            Ok(r) => {
                *exit = r.status;
                *report = to_c(if o.json { r.json() } else { r.text() });
                PdeformStatus::Ok
            }
            Err(e) => {
                *exit = exit_code(&e);
                fail(status_of(&e), format!("{cmd}: {e}"))
            }
        }
    })
}

/// Release a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pdeform_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
