//! C ABI for the tmesh3d library.
//!
//! Meshes travel as opaque handles; every function returns a status code and
//! writes results through out-pointers. Strings returned by the library are
//! owned by the caller and must be released with `tm_string_free`. The last
//! error message of the calling thread is available via `tm_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use tmesh3d::complexity::{bound_check, constants, corner_experiment};
use tmesh3d::dual::{dual_basis_check, rank_oracle};
use tmesh3d::io::{mesh_from_json, mesh_to_json};
use tmesh3d::mesh::Mesh;
use tmesh3d::refine::{refine, verify_admissible, Admissibility};
use tmesh3d::{asuit, index, spline};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum TmStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ParseError = 3,
    NotAdmissible = 4,
    NotDualCompatible = 5,
    EmptyActiveRegion = 6,
    BoundViolated = 7,
    InternalError = 8,
}

/// Opaque mesh handle.
pub struct TmMesh {
    inner: Mesh,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn status_of(e: &tmesh3d::Error) -> TmStatus {
    use tmesh3d::Error::*;
    match e {
        InvalidGrading(_) | InvalidDegree(_) | InvalidDims(_) | StaleElement(_)
        | NoSuchElement(_) | InvalidKnots | DegreeMismatch(_, _) | NotActive(_) => {
            TmStatus::InvalidArgument
        }
        EmptyActiveRegion { .. } => TmStatus::EmptyActiveRegion,
        NotAdmissible { .. } => TmStatus::NotAdmissible,
        NotDualCompatible { .. } => TmStatus::NotDualCompatible,
        BoundViolated { .. } => TmStatus::BoundViolated,
        Format(_) | Json(_) => TmStatus::ParseError,
        _ => TmStatus::InternalError,
    }
}

fn fail(e: &tmesh3d::Error) -> TmStatus {
    set_error(&e.to_string());
    status_of(e)
}

/// Message of the last error on this thread; valid until the next failing
/// call from the same thread. Never null.
#[no_mangle]
pub extern "C" fn tm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a `tm_*` function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn tm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Create the initial tensor-product mesh.
#[no_mangle]
pub extern "C" fn tm_mesh_initial(
    dim_x: u32,
    dim_y: u32,
    dim_z: u32,
    p1: u32,
    p2: u32,
    p3: u32,
    m: u32,
    out: *mut *mut TmMesh,
) -> TmStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return TmStatus::NullArgument;
    }
    match Mesh::initial([dim_x, dim_y, dim_z], [p1, p2, p3], m) {
        Ok(mesh) => {
            unsafe { *out = Box::into_raw(Box::new(TmMesh { inner: mesh })) };
            TmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Parse a mesh from canonical JSON.
///
/// # Safety
/// `json` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tm_mesh_from_json(json: *const c_char, out: *mut *mut TmMesh) -> TmStatus {
    if json.is_null() || out.is_null() {
        set_error("null argument");
        return TmStatus::NullArgument;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("json is not valid UTF-8");
            return TmStatus::ParseError;
        }
    };
    match mesh_from_json(text) {
        Ok(mesh) => {
            *out = Box::into_raw(Box::new(TmMesh { inner: mesh }));
            TmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Serialize a mesh to canonical JSON; the caller frees via `tm_string_free`.
///
/// # Safety
/// `mesh` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn tm_mesh_to_json(mesh: *const TmMesh, out: *mut *mut c_char) -> TmStatus {
    if mesh.is_null() || out.is_null() {
        set_error("null argument");
        return TmStatus::NullArgument;
    }
    let json = mesh_to_json(&(*mesh).inner);
    match CString::new(json) {
        Ok(s) => {
            *out = s.into_raw();
            TmStatus::Ok
        }
        Err(_) => {
            set_error("serialization produced an interior NUL");
            TmStatus::InternalError
        }
    }
}

/// Duplicate a handle.
///
/// # Safety
/// `mesh` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn tm_mesh_clone(mesh: *const TmMesh, out: *mut *mut TmMesh) -> TmStatus {
    if mesh.is_null() || out.is_null() {
        set_error("null argument");
        return TmStatus::NullArgument;
    }
    *out = Box::into_raw(Box::new(TmMesh { inner: (*mesh).inner.clone() }));
    TmStatus::Ok
}

/// Release a mesh handle.
///
/// # Safety
/// `mesh` must be a live handle from this library (or null) and is invalid
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn tm_mesh_free(mesh: *mut TmMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Element count, maximum level and active node count (the latter is 0 for
/// meshes whose active region is empty).
///
/// # Safety
/// `mesh` must be a live handle; out pointers may be null to skip a field.
#[no_mangle]
pub unsafe extern "C" fn tm_mesh_stats(
    mesh: *const TmMesh,
    elements: *mut usize,
    max_level: *mut u32,
    active_nodes: *mut usize,
) -> TmStatus {
    if mesh.is_null() {
        set_error("mesh is null");
        return TmStatus::NullArgument;
    }
    let g = &(*mesh).inner;
    if !elements.is_null() {
        *elements = g.len();
    }
    if !max_level.is_null() {
        *max_level = g.max_level();
    }
    if !active_nodes.is_null() {
        *active_nodes = index::active_nodes(g).map(|v| v.len()).unwrap_or(0);
    }
    TmStatus::Ok
}

/// Refine by marking the element containing the given point (ties broken by
/// the lexicographically smallest element). Writes a new handle.
///
/// # Safety
/// `mesh` must be a live handle; `out` non-null.
#[no_mangle]
pub unsafe extern "C" fn tm_mesh_refine_at_point(
    mesh: *const TmMesh,
    x: f64,
    y: f64,
    z: f64,
    out: *mut *mut TmMesh,
) -> TmStatus {
    if mesh.is_null() || out.is_null() {
        set_error("null argument");
        return TmStatus::NullArgument;
    }
    let g = &(*mesh).inner;
    let marks = format!("[{{\"point\":[{x},{y},{z}]}}]");
    let marked = match tmesh3d::io::parse_marks(g, &marks) {
        Ok(m) => m,
        Err(e) => return fail(&e),
    };
    match refine(g, &marked) {
        Ok(rec) => {
            *out = Box::into_raw(Box::new(TmMesh { inner: rec.output }));
            TmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Admissibility verdict: replay certificate or violation.
///
/// # Safety
/// `mesh` must be a live handle; `verdict` non-null.
#[no_mangle]
pub unsafe extern "C" fn tm_check_admissible(mesh: *const TmMesh, verdict: *mut bool) -> TmStatus {
    if mesh.is_null() || verdict.is_null() {
        set_error("null argument");
        return TmStatus::NullArgument;
    }
    match verify_admissible(&(*mesh).inner) {
        Ok(Admissibility::Admissible { .. }) => {
            *verdict = true;
            TmStatus::Ok
        }
        Ok(Admissibility::Violation { .. }) => {
            *verdict = false;
            TmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Analysis-suitability verdict.
///
/// # Safety
/// `mesh` must be a live handle; `verdict` non-null.
#[no_mangle]
pub unsafe extern "C" fn tm_check_analysis_suitable(
    mesh: *const TmMesh,
    verdict: *mut bool,
) -> TmStatus {
    if mesh.is_null() || verdict.is_null() {
        set_error("null argument");
        return TmStatus::NullArgument;
    }
    match asuit::is_analysis_suitable(&(*mesh).inner) {
        Ok(v) => {
            *verdict = v.is_suitable();
            TmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Dual-compatibility verdict.
///
/// # Safety
/// `mesh` must be a live handle; `verdict` non-null.
#[no_mangle]
pub unsafe extern "C" fn tm_check_dual_compatible(
    mesh: *const TmMesh,
    verdict: *mut bool,
) -> TmStatus {
    if mesh.is_null() || verdict.is_null() {
        set_error("null argument");
        return TmStatus::NullArgument;
    }
    match spline::is_dual_compatible(&(*mesh).inner) {
        Ok(v) => {
            *verdict = v.is_compatible();
            TmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Worst deviation of the dual functionals from the Kronecker delta over
/// all active-node pairs. Fails with `NotDualCompatible` when the mesh has
/// no dual basis.
///
/// # Safety
/// `mesh` must be a live handle; `max_deviation` non-null.
#[no_mangle]
pub unsafe extern "C" fn tm_dual_basis_max_deviation(
    mesh: *const TmMesh,
    max_deviation: *mut f64,
) -> TmStatus {
    if mesh.is_null() || max_deviation.is_null() {
        set_error("null argument");
        return TmStatus::NullArgument;
    }
    match dual_basis_check(&(*mesh).inner, 1e-8) {
        Ok(report) => {
            *max_deviation = report.max_deviation;
            TmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Numerical rank of the blending-function collocation matrix.
///
/// # Safety
/// `mesh` must be a live handle; out pointers may be null to skip a field.
#[no_mangle]
pub unsafe extern "C" fn tm_rank(
    mesh: *const TmMesh,
    full_rank: *mut bool,
    rank: *mut usize,
    active_nodes: *mut usize,
) -> TmStatus {
    if mesh.is_null() {
        set_error("mesh is null");
        return TmStatus::NullArgument;
    }
    match rank_oracle(&(*mesh).inner) {
        Ok(report) => {
            if !full_rank.is_null() {
                *full_rank = report.full_rank();
            }
            if !rank.is_null() {
                *rank = report.rank;
            }
            if !active_nodes.is_null() {
                *active_nodes = report.active_nodes;
            }
            TmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// The linear-complexity constants for a degree and grading.
///
/// # Safety
/// Out pointers may be null to skip a field.
#[no_mangle]
pub unsafe extern "C" fn tm_complexity_constants(
    p1: u32,
    p2: u32,
    p3: u32,
    m: u32,
    d1: *mut f64,
    d2: *mut f64,
    d3: *mut f64,
    c: *mut f64,
) -> TmStatus {
    if m < 2 {
        set_error("grading parameter must be at least 2");
        return TmStatus::InvalidArgument;
    }
    let k = constants([p1, p2, p3], m);
    if !d1.is_null() {
        *d1 = k.d1;
    }
    if !d2.is_null() {
        *d2 = k.d2;
    }
    if !d3.is_null() {
        *d3 = k.d3;
    }
    if !c.is_null() {
        *c = k.c;
    }
    TmStatus::Ok
}

/// Run the corner-marking experiment until the corner element's sides are
/// at most `1/target`; reports steps and generated elements, and checks the
/// linear bound.
///
/// # Safety
/// Out pointers may be null to skip a field.
#[no_mangle]
pub unsafe extern "C" fn tm_corner_experiment(
    dim_x: u32,
    dim_y: u32,
    dim_z: u32,
    p1: u32,
    p2: u32,
    p3: u32,
    m: u32,
    target: u64,
    steps: *mut usize,
    new_elements: *mut usize,
) -> TmStatus {
    let degree = [p1, p2, p3];
    match corner_experiment([dim_x, dim_y, dim_z], degree, m, target) {
        Ok((_, log)) => {
            if let Err(e) = bound_check(&log, &constants(degree, m)) {
                return fail(&e);
            }
            if !steps.is_null() {
                *steps = log.steps.len();
            }
            if !new_elements.is_null() {
                *new_elements = log.new_elements;
            }
            TmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}
