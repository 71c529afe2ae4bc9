//! C ABI over `qcm-core`.
//!
//! Objects cross the boundary as opaque handles (`QcmModel`, `QcmGraph`,
//! `QcmDistribution`) created by `*_from_*` or producing calls and released
//! with the matching `*_free`. Every fallible call returns a [`QcmStatus`];
//! on failure `qcm_last_error_message` describes the error for the calling
//! thread. Strings returned through `char **` are owned by the caller and
//! must be released with [`qcm_string_free`]. Outcome indices are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use qcm_core::calculus::{intervene_formula, markov_check, unmeasure_formula, InterventionVariant};
use qcm_core::circuit::{random_model, simulate, FunctionalModel};
use qcm_core::dist::JointDistribution;
use qcm_core::error::Error;
use qcm_core::graph::CausalGraph;
use qcm_core::io;
use qcm_core::sic::{known_sic, validate_sic};

/// Status codes; the nonzero values match the `qcm` exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcmStatus {
    Ok = 0,
    InvalidInput = 2,
    ResourceLimit = 3,
    UndefinedAtValue = 4,
    UnsupportedShape = 5,
    NullPointer = 6,
    Internal = 70,
    Panic = 71,
}

/// Second-factor form of the intervention formula.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcmVariant {
    AncestorMarginal = 0,
    AsPrinted = 1,
}

pub struct QcmModel(FunctionalModel);
pub struct QcmGraph(CausalGraph);
pub struct QcmDistribution(JointDistribution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Core(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn status_of(e: &Error) -> QcmStatus {
    match e.exit_code() {
        3 => QcmStatus::ResourceLimit,
        4 => QcmStatus::UndefinedAtValue,
        5 => QcmStatus::UnsupportedShape,
        70 => QcmStatus::Internal,
        _ => QcmStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QcmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QcmStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed for `{what}`"));
            QcmStatus::NullPointer
        }
        Err(_) => {
            set_error("panic inside qcm".into());
            QcmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Core(Error::InvalidArgument(format!("`{what}` is not UTF-8"))))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    put(out, Box::into_raw(Box::new(value)), "out")
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure::Core(Error::Internal("string contains NUL".into())))?;
    put(out, c.into_raw(), "out")
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the most recent failure on this thread, or NULL. Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn qcm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a model from JSON text. Fiducial file paths resolve against the working directory.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_model_from_json(json: *const c_char, out: *mut *mut QcmModel) -> QcmStatus {
    guard(|| {
        let m = io::model_from_json(str_arg(json, "json")?, None)?;
        put_handle(out, QcmModel(m))
    })
}

/// Loads a model file; fiducial paths resolve against its directory.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_model_load(path: *const c_char, out: *mut *mut QcmModel) -> QcmStatus {
    guard(|| {
        let m = io::load_model(Path::new(str_arg(path, "path")?))?;
        put_handle(out, QcmModel(m))
    })
}

/// # Safety
/// `model` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qcm_model_free(model: *mut QcmModel) {
    free_handle(model)
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_model_to_json(model: *const QcmModel, out: *mut *mut c_char) -> QcmStatus {
    guard(|| put_string(out, io::model_to_json(&ref_arg(model, "model")?.0)))
}

/// Seeded random qubit model whose derived DAG is `template`.
///
/// # Safety
/// `template_graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_random_model(
    template_graph: *const QcmGraph,
    seed: u64,
    out: *mut *mut QcmModel,
) -> QcmStatus {
    guard(|| {
        let m = random_model(&ref_arg(template_graph, "template_graph")?.0, seed)?;
        put_handle(out, QcmModel(m))
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_model_time_reverse(model: *const QcmModel, out: *mut *mut QcmModel) -> QcmStatus {
    guard(|| {
        let m = ref_arg(model, "model")?.0.time_reverse()?;
        put_handle(out, QcmModel(m))
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_model_derive_graph(model: *const QcmModel, out: *mut *mut QcmGraph) -> QcmStatus {
    guard(|| {
        let g = ref_arg(model, "model")?.0.derive_dag()?;
        put_handle(out, QcmGraph(g))
    })
}

/// Intervention surgery: `node` is discarded and re-prepared in outcome `value` (0-based).
///
/// # Safety
/// `model` must be a live handle, `node` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_model_intervene(
    model: *const QcmModel,
    node: *const c_char,
    value: usize,
    out: *mut *mut QcmModel,
) -> QcmStatus {
    guard(|| {
        let m = ref_arg(model, "model")?
            .0
            .apply_intervention_surgery(str_arg(node, "node")?, value)?;
        put_handle(out, QcmModel(m))
    })
}

/// Un-measurement surgery: `node`'s measurement is removed.
///
/// # Safety
/// `model` must be a live handle, `node` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_model_unmeasure(
    model: *const QcmModel,
    node: *const c_char,
    out: *mut *mut QcmModel,
) -> QcmStatus {
    guard(|| {
        let m = ref_arg(model, "model")?
            .0
            .apply_unmeasurement_surgery(str_arg(node, "node")?)?;
        put_handle(out, QcmModel(m))
    })
}

/// Exact joint outcome distribution of `model`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_simulate(model: *const QcmModel, out: *mut *mut QcmDistribution) -> QcmStatus {
    guard(|| {
        let p = simulate(&ref_arg(model, "model")?.0)?;
        put_handle(out, QcmDistribution(p))
    })
}

/// # Safety
/// `csv` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_distribution_from_csv(csv: *const c_char, out: *mut *mut QcmDistribution) -> QcmStatus {
    guard(|| {
        let p = JointDistribution::from_csv(str_arg(csv, "csv")?)?;
        put_handle(out, QcmDistribution(p))
    })
}

/// # Safety
/// `dist` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_distribution_to_csv(dist: *const QcmDistribution, out: *mut *mut c_char) -> QcmStatus {
    guard(|| put_string(out, ref_arg(dist, "dist")?.0.to_csv()))
}

/// Number of variables.
///
/// # Safety
/// `dist` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_distribution_variable_count(dist: *const QcmDistribution, out: *mut usize) -> QcmStatus {
    guard(|| put(out, ref_arg(dist, "dist")?.0.variables().len(), "out"))
}

/// Name of variable `index` (caller frees) and its number of outcomes.
///
/// # Safety
/// `dist` must be a live handle; `name` and `outcomes` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_distribution_variable(
    dist: *const QcmDistribution,
    index: usize,
    name: *mut *mut c_char,
    outcomes: *mut usize,
) -> QcmStatus {
    guard(|| {
        let vars = ref_arg(dist, "dist")?.0.variables();
        let v = vars
            .get(index)
            .ok_or_else(|| Error::InvalidArgument(format!("variable index {index} out of range 0..{}", vars.len())))?;
        put(outcomes, v.outcomes, "outcomes")?;
        put_string(name, v.name.clone())
    })
}

/// Row-major probability table (first variable most significant). The
/// pointer stays valid until `dist` is freed.
///
/// # Safety
/// `dist` must be a live handle; `data` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_distribution_probabilities(
    dist: *const QcmDistribution,
    data: *mut *const f64,
    len: *mut usize,
) -> QcmStatus {
    guard(|| {
        let probs = ref_arg(dist, "dist")?.0.probabilities();
        put(data, probs.as_ptr(), "data")?;
        put(len, probs.len(), "len")
    })
}

/// # Safety
/// `dist` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qcm_distribution_free(dist: *mut QcmDistribution) {
    free_handle(dist)
}

/// Total-variation distance; `b` is aligned to `a`'s variable order first.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_tv_distance(
    a: *const QcmDistribution,
    b: *const QcmDistribution,
    out: *mut f64,
) -> QcmStatus {
    guard(|| {
        let a = &ref_arg(a, "a")?.0;
        let b = ref_arg(b, "b")?.0.reorder(&a.names())?;
        put(out, a.tv_distance(&b)?, "out")
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_graph_from_json(json: *const c_char, out: *mut *mut QcmGraph) -> QcmStatus {
    guard(|| {
        let g = io::graph_from_json(str_arg(json, "json")?)?;
        put_handle(out, QcmGraph(g))
    })
}

/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_graph_to_json(graph: *const QcmGraph, out: *mut *mut c_char) -> QcmStatus {
    guard(|| put_string(out, io::graph_to_json(&ref_arg(graph, "graph")?.0)))
}

/// # Safety
/// `graph` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qcm_graph_free(graph: *mut QcmGraph) {
    free_handle(graph)
}

/// Same graph with every edge reversed.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_graph_invert(graph: *const QcmGraph, out: *mut *mut QcmGraph) -> QcmStatus {
    guard(|| put_handle(out, QcmGraph(ref_arg(graph, "graph")?.0.causal_invert())))
}

/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_graph_is_qdag(graph: *const QcmGraph, out: *mut bool) -> QcmStatus {
    guard(|| put(out, ref_arg(graph, "graph")?.0.is_qdag(), "out"))
}

/// Quantum Markov condition check. `report_json` may be NULL; otherwise it
/// receives the full report (caller frees).
///
/// # Safety
/// `dist` and `graph` must be live handles; `pass` and `worst_residual` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_markov_check(
    dist: *const QcmDistribution,
    graph: *const QcmGraph,
    tol: f64,
    pass: *mut bool,
    worst_residual: *mut f64,
    report_json: *mut *mut c_char,
) -> QcmStatus {
    guard(|| {
        let r = markov_check(&ref_arg(dist, "dist")?.0, &ref_arg(graph, "graph")?.0, tol)?;
        put(pass, r.pass, "pass")?;
        put(worst_residual, r.worst_residual, "worst_residual")?;
        if !report_json.is_null() {
            put_string(report_json, io::report_json(&r))?;
        }
        Ok(())
    })
}

/// Statistics with `node` un-measured, from the table and graph alone.
///
/// # Safety
/// `dist` and `graph` must be live handles, `node` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_unmeasure_formula(
    dist: *const QcmDistribution,
    graph: *const QcmGraph,
    node: *const c_char,
    out: *mut *mut QcmDistribution,
) -> QcmStatus {
    guard(|| {
        let g = &ref_arg(graph, "graph")?.0;
        let node = str_arg(node, "node")?;
        let dim = g.dim(g.index_of(node)?);
        let r = unmeasure_formula(&ref_arg(dist, "dist")?.0, g, node, dim)?;
        put_handle(out, QcmDistribution(r.distribution))
    })
}

/// Statistics after intervening on `node` with outcome `value` (0-based), from the table and graph alone.
/// `variant` is a `QcmVariant` value.
///
/// # Safety
/// `dist` and `graph` must be live handles, `node` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_intervene_formula(
    dist: *const QcmDistribution,
    graph: *const QcmGraph,
    node: *const c_char,
    value: usize,
    variant: u32,
    out: *mut *mut QcmDistribution,
) -> QcmStatus {
    guard(|| {
        let variant = match variant {
            v if v == QcmVariant::AncestorMarginal as u32 => InterventionVariant::AncestorMarginal,
            v if v == QcmVariant::AsPrinted as u32 => InterventionVariant::AsPrinted,
            other => return Err(Error::InvalidArgument(format!("unknown variant {other}")).into()),
        };
        let r = intervene_formula(
            &ref_arg(dist, "dist")?.0,
            &ref_arg(graph, "graph")?.0,
            str_arg(node, "node")?,
            value,
            variant,
        )?;
        put_handle(out, QcmDistribution(r.distribution))
    })
}

/// Validates the built-in SIC of dimension `dim` (2 or 3) at `tol`.
///
/// # Safety
/// `pass` and `max_error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcm_sic_validate(dim: usize, tol: f64, pass: *mut bool, max_error: *mut f64) -> QcmStatus {
    guard(|| {
        let r = validate_sic(&known_sic(dim)?, tol);
        put(pass, r.pass, "pass")?;
        let worst = r.max_gram_error.max(r.max_identity_error).max(r.max_projector_error);
        put(max_error, worst, "max_error")
    })
}
