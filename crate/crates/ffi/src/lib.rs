//! C ABI over `hgkit`.
//!
//! Models are opaque handles created by `hg_*_from_*`/`hg_*_sample` style
//! constructors and released with the matching `_free`. Every fallible call
//! returns an [`HgStatus`]; the message of the last failure on the calling
//! thread is available from [`hg_last_error`]. Strings returned to the caller
//! are owned by the caller and released with [`hg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hgkit::classify::{project_to_classes, ClassLabel};
use hgkit::curvature::{kahler_like_nullspace_standard, KahlerConstraints};
use hgkit::io::{ModelFile, PointModelFile};
use hgkit::model::{sample_point_model, JacobiPolicy, LieAlgebraModel, PointModel};
use hgkit::structural::LieGeometry;
use hgkit::suites::{Analysis, Suite};
use hgkit::tensor::{Dim, Tensor3};
use hgkit::HgError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidModel = 4,
    InvalidArgument = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

pub const HG_SUITE_IDENTITIES: u32 = 0;
pub const HG_SUITE_CONNECTION: u32 = 1;
pub const HG_SUITE_CURVATURE: u32 = 2;
pub const HG_SUITE_ALL: u32 = 3;

/// A validated Lie algebra with metric and hypercomplex triple.
pub struct HgModel(LieAlgebraModel);

/// Admissible point data (g, H, F1, F2).
pub struct HgPointModel(PointModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(HgStatus, String);

impl From<HgError> for Failure {
    fn from(e: HgError) -> Self {
        let status = match e {
            HgError::Json(_) | HgError::Io(_) => HgStatus::Parse,
            HgError::InvalidArgument(_) | HgError::InvalidDimension(_) => HgStatus::InvalidArgument,
            _ => HgStatus::InvalidModel,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: HgStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HgStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(HgStatus::NullPointer, format!("{what} is null")))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(HgStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(HgStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(HgStatus::NullPointer, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| fail(HgStatus::InvalidArgument, e.to_string()))?;
    put(out, c.into_raw(), "out")
}

fn dim(n: usize) -> Result<Dim, Failure> {
    Ok(Dim::new(n)?)
}

unsafe fn copy_tensor(t: &Tensor3, buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(fail(HgStatus::NullPointer, "buffer is null"));
    }
    if len < t.len() {
        return Err(fail(HgStatus::BufferTooSmall, format!("buffer holds {len} values, {} needed", t.len())));
    }
    ptr::copy_nonoverlapping(t.as_slice().as_ptr(), buf, t.len());
    Ok(())
}

fn alpha_index(alpha: u32) -> Result<usize, Failure> {
    match alpha {
        1..=3 => Ok(alpha as usize - 1),
        _ => Err(fail(HgStatus::InvalidArgument, format!("alpha must be 1, 2 or 3, got {alpha}"))),
    }
}

fn tolerance(tol: f64) -> Result<f64, Failure> {
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(fail(HgStatus::InvalidArgument, format!("tolerance must be positive, got {tol}")))
    }
}

/// Message of the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a model from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_model_from_json(json: *const c_char, out: *mut *mut HgModel) -> HgStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let model = ModelFile::parse(text)?.into_model(JacobiPolicy::Reject)?;
        put(out, Box::into_raw(Box::new(HgModel(model))), "out")
    })
}

/// The abelian algebra of dimension 4n with the standard structure.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hg_model_standard_abelian(n: usize, out: *mut *mut HgModel) -> HgStatus {
    guard(|| {
        let m = LieAlgebraModel::abelian(dim(n)?);
        put(out, Box::into_raw(Box::new(HgModel(m))), "out")
    })
}

/// # Safety
/// `m` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hg_model_free(m: *mut HgModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Ambient dimension 4n.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_model_dimension(m: *const HgModel, out: *mut usize) -> HgStatus {
    guard(|| put(out, as_ref(m, "model")?.0.d(), "out"))
}

/// Writes F_alpha (alpha in 1..=3) as d^3 row-major values, F[x][y][z].
///
/// # Safety
/// `m` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hg_model_structural_f(m: *const HgModel, alpha: u32, buf: *mut f64, len: usize) -> HgStatus {
    guard(|| {
        let m = &as_ref(m, "model")?.0;
        let a = alpha_index(alpha)?;
        copy_tensor(&LieGeometry::new(m).f[a], buf, len)
    })
}

/// Classification report as JSON.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_model_classify_json(m: *const HgModel, tol: f64, out: *mut *mut c_char) -> HgStatus {
    guard(|| {
        let m = &as_ref(m, "model")?.0;
        put_string(out, Analysis::new(m, tolerance(tol)?).classify_report().to_json())
    })
}

/// Verification report as JSON; `all_pass` receives 1 when no applicable check fails.
///
/// # Safety
/// `m` must be a live handle; `out` and `all_pass` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_model_verify_json(
    m: *const HgModel,
    tol: f64,
    suite: u32,
    out: *mut *mut c_char,
    all_pass: *mut i32,
) -> HgStatus {
    guard(|| {
        let m = &as_ref(m, "model")?.0;
        let suite = match suite {
            HG_SUITE_IDENTITIES => Suite::Identities,
            HG_SUITE_CONNECTION => Suite::Connection,
            HG_SUITE_CURVATURE => Suite::Curvature,
            HG_SUITE_ALL => Suite::All,
            other => return Err(fail(HgStatus::InvalidArgument, format!("unknown suite {other}"))),
        };
        let report = Analysis::new(m, tolerance(tol)?).verify_report(suite);
        put(all_pass, report.all_pass() as i32, "all_pass")?;
        put_string(out, report.to_json())
    })
}

/// Dimension of the space of Kahler-like tensors for the standard structure
/// in dimension 4n; `hermitian_only` drops the J2, J3 conditions.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hg_kahler_like_nullspace(n: usize, hermitian_only: bool, out: *mut usize) -> HgStatus {
    guard(|| {
        let which = if hermitian_only {
            KahlerConstraints::HermitianOnly
        } else {
            KahlerConstraints::Hypercomplex
        };
        put(out, kahler_like_nullspace_standard(dim(n)?, which), "out")
    })
}

/// Random admissible point data in dimension 4n.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hg_point_model_sample(n: usize, seed: u64, out: *mut *mut HgPointModel) -> HgStatus {
    guard(|| {
        let p = sample_point_model(dim(n)?, seed);
        put(out, Box::into_raw(Box::new(HgPointModel(p))), "out")
    })
}

/// Orthogonal projection onto W1(J1) with W3(J2) and W3(J3).
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_point_model_project_w133(p: *const HgPointModel, out: *mut *mut HgPointModel) -> HgStatus {
    guard(|| {
        let p = &as_ref(p, "point model")?.0;
        let q = project_to_classes(p, &ClassLabel::W133).model;
        put(out, Box::into_raw(Box::new(HgPointModel(q))), "out")
    })
}

/// Writes F_alpha of point data as d^3 row-major values.
///
/// # Safety
/// `p` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hg_point_model_f(p: *const HgPointModel, alpha: u32, buf: *mut f64, len: usize) -> HgStatus {
    guard(|| {
        let p = &as_ref(p, "point model")?.0;
        let a = alpha_index(alpha)?;
        copy_tensor(&p.f_data()[a], buf, len)
    })
}

/// Point data as JSON.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_point_model_to_json(p: *const HgPointModel, out: *mut *mut c_char) -> HgStatus {
    guard(|| {
        let p = &as_ref(p, "point model")?.0;
        put_string(out, PointModelFile::from_point_model(p).to_json()?)
    })
}

/// # Safety
/// `p` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hg_point_model_free(p: *mut HgPointModel) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}
