//! C ABI over the `netlogic` engines.
//!
//! Every fallible function returns an [`NlStatus`]; on failure the message
//! is available from [`nl_last_error`] on the same thread until the next
//! call. Handles are opaque and owned by the caller, who releases them with
//! the matching `_free` function. Strings are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use netlogic::extract::{infer_gender, spouse_confidence, Gender, NameGenderTable};
use netlogic::logic::{ground_with, GroundedProgram, GroundingOptions};
use netlogic::mln::{self, InferenceMode, MlnConfig};
use netlogic::psl::{self, PslConfig, SoftProgram};
use netlogic::semantics::{soft_and, soft_or};
use netlogic::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Data = 4,
    OutOfRange = 5,
    Config = 6,
    Solver = 7,
    NotFound = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlMode {
    Auto = 0,
    Exact = 1,
    Gibbs = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlGender {
    Unknown = 0,
    Male = 1,
    Female = 2,
}

/// MLN inference settings; start from [`nl_mln_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct NlMlnOptions {
    pub mode: NlMode,
    pub samples: usize,
    pub burn_in: usize,
    pub chains: usize,
    pub seed: u64,
}

/// PSL inference settings; start from [`nl_psl_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct NlPslOptions {
    pub tolerance: f64,
    pub max_iters: usize,
    pub seed: u64,
}

/// A knowledge base grounded against its evidence.
pub struct NlModel {
    program: GroundedProgram,
}

/// Scores for the open atoms of a model, sorted by atom text.
pub struct NlResult {
    atoms: Vec<CString>,
    values: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(NlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } => NlStatus::Parse,
            Error::OutOfRange { .. } => NlStatus::OutOfRange,
            Error::Config(_) => NlStatus::Config,
            e if e.is_solver_failure() => NlStatus::Solver,
            _ => NlStatus::Data,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NlStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NlStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(NlStatus::NullPointer, format!("`{what}` is null"))
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| Failure(NlStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

/// # Safety
/// As [`opt_str`].
unsafe fn req_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    opt_str(p, what)?.ok_or_else(|| null(what))
}

/// # Safety
/// `out` is null or valid for writes.
unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn nl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn nl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn nl_mln_options_default() -> NlMlnOptions {
    let d = MlnConfig::default();
    NlMlnOptions {
        mode: NlMode::Auto,
        samples: d.samples,
        burn_in: d.burn_in,
        chains: d.chains,
        seed: d.seed,
    }
}

#[no_mangle]
pub extern "C" fn nl_psl_options_default() -> NlPslOptions {
    let d = PslConfig::default();
    NlPslOptions {
        tolerance: d.tolerance,
        max_iters: d.max_iters,
        seed: d.seed,
    }
}

/// Parses and grounds a model. `schema` null selects the built-in social
/// schema, whose categories come from `category_set` (one label per line)
/// or the defaults. `evidence` and `categories` may be null.
///
/// # Safety
/// String arguments are null or valid NUL-terminated strings; `out` is
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_model_new(
    schema: *const c_char,
    rules: *const c_char,
    evidence: *const c_char,
    categories: *const c_char,
    category_set: *const c_char,
    out: *mut *mut NlModel,
) -> NlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let (kb, ev, _) = netlogic::cli::model_from_texts(
            opt_str(schema, "schema")?,
            req_str(rules, "rules")?,
            opt_str(evidence, "evidence")?,
            opt_str(categories, "categories")?,
            opt_str(category_set, "category_set")?,
        )?;
        let program = ground_with(&kb, &ev, &GroundingOptions::default(), &[])?;
        out.write(Box::into_raw(Box::new(NlModel { program })));
        Ok(())
    })
}

/// # Safety
/// `model` is null or came from [`nl_model_new`] and was not freed.
#[no_mangle]
pub unsafe extern "C" fn nl_model_free(model: *mut NlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Ground atoms in the model, evidence included; 0 for null.
///
/// # Safety
/// `model` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_model_num_atoms(model: *const NlModel) -> usize {
    model.as_ref().map_or(0, |m| m.program.num_atoms())
}

/// Ground rules after pruning; 0 for null.
///
/// # Safety
/// `model` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_model_num_ground_rules(model: *const NlModel) -> usize {
    model.as_ref().map_or(0, |m| m.program.rules().len())
}

fn result_of(program: &GroundedProgram, values: &[f64]) -> NlResult {
    let mut rows: Vec<(String, f64)> = program
        .free_atoms()
        .into_iter()
        .map(|a| (program.atom(a).to_string(), values[a]))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let (atoms, values) = rows
        .into_iter()
        .map(|(a, v)| (CString::new(a).expect("atom text has no NUL"), v))
        .unzip();
    NlResult { atoms, values }
}

/// # Safety
/// `model` and `out` as in [`nl_infer_mln`].
unsafe fn run_infer(
    model: *const NlModel,
    out: *mut *mut NlResult,
    infer: impl FnOnce(&GroundedProgram) -> netlogic::Result<Vec<f64>>,
) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(ptr::null_mut());
    let m = model.as_ref().ok_or_else(|| null("model"))?;
    let values = infer(&m.program)?;
    out.write(Box::into_raw(Box::new(result_of(&m.program, &values))));
    Ok(())
}

/// MLN marginals for every open atom. `options` null means defaults.
///
/// # Safety
/// `model` is a live handle, `options` null or valid, `out` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn nl_infer_mln(
    model: *const NlModel,
    options: *const NlMlnOptions,
    out: *mut *mut NlResult,
) -> NlStatus {
    guard(|| {
        let o = options.as_ref().copied().unwrap_or_else(|| nl_mln_options_default());
        let cfg = MlnConfig {
            mode: match o.mode {
                NlMode::Auto => InferenceMode::Auto,
                NlMode::Exact => InferenceMode::Exact,
                NlMode::Gibbs => InferenceMode::Gibbs,
            },
            samples: o.samples,
            burn_in: o.burn_in,
            chains: o.chains,
            seed: o.seed,
            ..MlnConfig::default()
        };
        run_infer(model, out, |p| Ok(mln::infer(p, &cfg)?.marginals))
    })
}

/// PSL MPE values for every open atom. `options` null means defaults.
///
/// # Safety
/// As [`nl_infer_mln`].
#[no_mangle]
pub unsafe extern "C" fn nl_infer_psl(
    model: *const NlModel,
    options: *const NlPslOptions,
    out: *mut *mut NlResult,
) -> NlStatus {
    guard(|| {
        let o = options.as_ref().copied().unwrap_or_else(|| nl_psl_options_default());
        let cfg = PslConfig {
            tolerance: o.tolerance,
            max_iters: o.max_iters,
            seed: o.seed,
            ..PslConfig::default()
        };
        run_infer(model, out, |p| Ok(psl::mpe_infer(&SoftProgram::from_program(p)?, &cfg)?.values))
    })
}

/// # Safety
/// `result` is null or came from an inference call and was not freed.
#[no_mangle]
pub unsafe extern "C" fn nl_result_free(result: *mut NlResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of rows; 0 for null.
///
/// # Safety
/// `result` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_result_len(result: *const NlResult) -> usize {
    result.as_ref().map_or(0, |r| r.values.len())
}

/// Atom text of row `i`, owned by the result; null when out of range.
///
/// # Safety
/// `result` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_result_atom(result: *const NlResult, i: usize) -> *const c_char {
    result
        .as_ref()
        .and_then(|r| r.atoms.get(i))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Score of row `i`.
///
/// # Safety
/// `result` is null or a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_result_value(result: *const NlResult, i: usize, out: *mut f64) -> NlStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let v = *r.values.get(i).ok_or_else(|| {
            Failure(NlStatus::NotFound, format!("row {i} of {}", r.values.len()))
        })?;
        write_out(out, v, "out")
    })
}

/// Score of the atom with text `atom`, e.g. `LikeCat_food(u1)`.
///
/// # Safety
/// `result` is a live handle, `atom` a valid string, `out` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn nl_result_lookup(result: *const NlResult, atom: *const c_char, out: *mut f64) -> NlStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let key = req_str(atom, "atom")?;
        let i = r
            .atoms
            .binary_search_by(|a| a.to_bytes().cmp(key.as_bytes()))
            .map_err(|_| Failure(NlStatus::NotFound, format!("no open atom `{key}`")))?;
        write_out(out, r.values[i], "out")
    })
}

/// Lukasiewicz conjunction of two truth values in [0, 1].
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_soft_and(a: f64, b: f64, out: *mut f64) -> NlStatus {
    guard(|| write_out(out, soft_and(a, b)?, "out"))
}

/// Lukasiewicz disjunction of two truth values in [0, 1].
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_soft_or(a: f64, b: f64, out: *mut f64) -> NlStatus {
    guard(|| write_out(out, soft_or(a, b)?, "out"))
}

/// Spouse confidence for a classifier score; `*present` is false when the
/// score does not indicate a spouse, and `*out` is then left untouched.
///
/// # Safety
/// `out` and `present` are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_spouse_confidence(score: f64, out: *mut f64, present: *mut bool) -> NlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        match spouse_confidence(score)? {
            Some(c) => {
                write_out(present, true, "present")?;
                out.write(c);
            }
            None => write_out(present, false, "present")?,
        }
        Ok(())
    })
}

/// Gender implied by male and female birth counts for a name.
#[no_mangle]
pub extern "C" fn nl_infer_gender(male_count: u64, female_count: u64) -> NlGender {
    let mut t = NameGenderTable::new();
    t.insert("n", male_count, female_count);
    match infer_gender("n", &t) {
        Some(Gender::Male) => NlGender::Male,
        Some(Gender::Female) => NlGender::Female,
        None => NlGender::Unknown,
    }
}
