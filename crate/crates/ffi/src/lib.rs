//! C ABI over the `stbc` toolkit.
//!
//! Every function returns an [`StbcStatus`]; on failure the message is
//! available from [`stbc_last_error`] on the same thread. Codes are opaque
//! [`StbcCode`] handles created by [`stbc_code_new`] and released with
//! [`stbc_code_free`]. Complex arrays are interleaved `re, im` doubles in
//! row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stbc::bounds::{delta_bound, min_discriminant_bound, z_discriminant, CenterDescriptor};
use stbc::codebook::{by_name, CodeSpec, Constellation};
use stbc::error::Error;
use stbc::fastdecode::{complexity_estimate, discover_pattern, ComplexityReport, SphereDecoder, SplitPolicy};
use stbc::linalg::{ComplexMatrix, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StbcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownCode = 3,
    Numerical = 4,
    Panic = 5,
    BufferTooSmall = 6,
}

/// Opaque code handle.
pub struct StbcCode {
    spec: CodeSpec,
    structure: Option<ComplexityReport>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn status_of(e: &Error) -> StbcStatus {
    match e {
        Error::UnknownCode(_) => StbcStatus::UnknownCode,
        e if e.is_numerical() => StbcStatus::Numerical,
        _ => StbcStatus::InvalidArgument,
    }
}

struct Fail(StbcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(StbcStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> StbcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            StbcStatus::Ok
        }
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {m}"));
            StbcStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(StbcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a>(code: *const StbcCode) -> Result<&'a StbcCode, Fail> {
    code.as_ref().ok_or_else(|| null("code"))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn complex_in(p: *const f64, len: usize, rows: usize, cols: usize, what: &str) -> Result<ComplexMatrix, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    if len != 2 * rows * cols {
        return Err(Fail(
            StbcStatus::InvalidArgument,
            format!("{what} has {len} doubles, expected {}", 2 * rows * cols),
        ));
    }
    let s = std::slice::from_raw_parts(p, len);
    let data = s.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
    Ok(ComplexMatrix::from_vec(rows, cols, data)?)
}

/// Creates a handle for a catalogue code (`"alamouti"`, `"mido_c2"`, ...).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stbc_code_new(name: *const c_char, out: *mut *mut StbcCode) -> StbcStatus {
    guard(|| {
        let name = text(name, "name")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = by_name(name)?;
        let mask = discover_pattern(&spec, spec.n_r, 20, 1, 1e-9)?;
        let rep = complexity_estimate(&mask, SplitPolicy::BestPrefix);
        let structure = (rep.kappa < rep.k).then_some(rep);
        out.write(Box::into_raw(Box::new(StbcCode { spec, structure })));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `code` must come from [`stbc_code_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn stbc_code_free(code: *mut StbcCode) {
    if !code.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(code))));
    }
}

/// Transmit antennas, channel uses, real dimension K and receive antennas.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stbc_code_dims(
    code: *const StbcCode,
    n_t: *mut usize,
    t: *mut usize,
    k: *mut usize,
    n_r: *mut usize,
) -> StbcStatus {
    guard(|| {
        let c = &handle(code)?.spec;
        write(n_t, c.n_t, "n_t")?;
        write(t, c.t, "t")?;
        write(k, c.k(), "k")?;
        write(n_r, c.n_r, "n_r")
    })
}

/// Codeword `Σ g_i B_i` as `n_t × t` interleaved complex entries.
///
/// # Safety
/// `g` must hold `g_len` values and `out` room for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn stbc_code_encode(
    code: *const StbcCode,
    g: *const i64,
    g_len: usize,
    out: *mut f64,
    out_len: usize,
) -> StbcStatus {
    guard(|| {
        let c = &handle(code)?.spec;
        if g.is_null() {
            return Err(null("g"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let need = 2 * c.n_t * c.t;
        if out_len < need {
            return Err(Fail(StbcStatus::BufferTooSmall, format!("need {need} doubles, got {out_len}")));
        }
        let x = c.encode_int(std::slice::from_raw_parts(g, g_len))?;
        for (i, v) in x.as_slice().iter().enumerate() {
            *out.add(2 * i) = v.re;
            *out.add(2 * i + 1) = v.im;
        }
        Ok(())
    })
}

/// Fundamental parallelotope volume of the code lattice.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stbc_code_volume(code: *const StbcCode, out: *mut f64) -> StbcStatus {
    guard(|| {
        let v = stbc::lattice::volume(&handle(code)?.spec)?;
        write(out, v, "out")
    })
}

/// Worst-case real search dimension from `samples` seeded channels.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stbc_code_kappa(code: *const StbcCode, samples: usize, seed: u64, out: *mut usize) -> StbcStatus {
    guard(|| {
        let c = &handle(code)?.spec;
        let mask = discover_pattern(c, c.n_r, samples, seed, 1e-9)?;
        write(out, complexity_estimate(&mask, SplitPolicy::BestPrefix).kappa, "out")
    })
}

/// ML decision over Q-PAM coefficients. `y` is `n_r × t` and `h` is
/// `n_r × n_t`, both interleaved complex; `n_r` is inferred from `h_len`.
///
/// # Safety
/// Arrays must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn stbc_decode(
    code: *const StbcCode,
    y: *const f64,
    y_len: usize,
    h: *const f64,
    h_len: usize,
    pam: u32,
    out_g: *mut i64,
    g_len: usize,
    out_metric: *mut f64,
) -> StbcStatus {
    guard(|| {
        let code = handle(code)?;
        let c = &code.spec;
        if h_len == 0 || h_len % (2 * c.n_t) != 0 {
            return Err(Fail(StbcStatus::InvalidArgument, format!("h_len {h_len} is not a multiple of {}", 2 * c.n_t)));
        }
        let n_r = h_len / (2 * c.n_t);
        let hm = complex_in(h, h_len, n_r, c.n_t, "h")?;
        let ym = complex_in(y, y_len, n_r, c.t, "y")?;
        if out_g.is_null() {
            return Err(null("out_g"));
        }
        if g_len < c.k() {
            return Err(Fail(StbcStatus::BufferTooSmall, format!("need {} coefficients, got {g_len}", c.k())));
        }
        Constellation::pam(pam)?;
        let alphabet = Constellation::pam_points(pam);
        let dec = SphereDecoder::new(c, &hm, &alphabet, code.structure.as_ref())
            .or_else(|_| SphereDecoder::new(c, &hm, &alphabet, None))?
            .decode(&ym)?;
        ptr::copy_nonoverlapping(dec.g.as_ptr(), out_g, c.k());
        if !out_metric.is_null() {
            out_metric.write(dec.metric);
        }
        Ok(())
    })
}

/// Lower bound on the normalized minimum determinant for an order with
/// the given center (`"Q"`, `"Q(sqrt2)"`, `"Q(sqrt5)"` or `custom:...`)
/// and index.
///
/// # Safety
/// `center` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn stbc_delta_bound(center: *const c_char, index: u64, out: *mut f64) -> StbcStatus {
    guard(|| {
        let c = CenterDescriptor::parse(text(center, "center")?)?;
        let d = min_discriminant_bound(&c, index, false)?;
        let z = z_discriminant(&d.value(), c.disc, index);
        write(out, delta_bound(&z, index)?, "out")
    })
}

/// Message of the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn stbc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn stbc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
