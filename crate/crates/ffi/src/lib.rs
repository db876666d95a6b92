//! C ABI over the orbitlab core.
//!
//! Every fallible function returns an [`OlStatus`]. On failure the message is
//! available from [`ol_last_error`] on the same thread until the next call.
//! Handles are opaque and must be released with their `_free` function.
//! Group elements are passed as the row-major entries of each factor block,
//! concatenated in factor order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use orbitlab::boundary::Arc;
use orbitlab::experiments::{count_ball, count_sector, CountMode};
use orbitlab::homspace::reduce_mat;
use orbitlab::lattice::{enumerate, load_cache, save_cache, LatticeKind, LatticeSpec, OrbitSet};
use orbitlab::lie::{cartan_decompose, distance_to_origin, Factor, GroupElement, GroupSpec};
use orbitlab::volume::{log_ball_volume, root_system};
use orbitlab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OlStatus {
    Ok = 0,
    InvalidInput = 1,
    Domain = 2,
    Resource = 3,
    Numeric = 4,
    Cache = 5,
    MissingCache = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
}

/// A product of `SL(n)` factors.
pub struct OlGroup(GroupSpec);

/// Enumerated orbit of a rank-one lattice.
pub struct OlOrbit(OrbitSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(OlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidInput(_) => OlStatus::InvalidInput,
            Error::Domain(_) => OlStatus::Domain,
            Error::Resource(_) => OlStatus::Resource,
            Error::Numeric(_) => OlStatus::Numeric,
            Error::Cache { .. } => OlStatus::Cache,
            Error::MissingCache(_) => OlStatus::MissingCache,
            Error::Io { .. } => OlStatus::Io,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(OlStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> OlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            OlStatus::Panic
        }
    }
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

unsafe fn group<'a>(g: *const OlGroup) -> Result<&'a GroupSpec, Fail> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| null("group"))
}

unsafe fn orbit<'a>(o: *const OlOrbit) -> Result<&'a OrbitSet, Fail> {
    o.as_ref().map(|o| &o.0).ok_or_else(|| null("orbit"))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| Fail(OlStatus::InvalidInput, "path is not UTF-8".into()))
}

fn element(spec: &GroupSpec, entries: &[f64]) -> Result<GroupElement, Fail> {
    Ok(GroupElement::from_row_major(spec, entries)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ol_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next `ol_` call on the same thread.
#[no_mangle]
pub extern "C" fn ol_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Group `SL(ns[0]) x ... x SL(ns[len-1])` with default metric scales.
///
/// # Safety
/// `ns` must point to `len` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ol_group_new(ns: *const usize, len: usize, out: *mut *mut OlGroup) -> OlStatus {
    guard(|| {
        let ns = input(ns, len, "ns")?;
        let spec = GroupSpec::new(ns.iter().map(|&n| Factor::sl(n)).collect())?;
        write(out, Box::into_raw(Box::new(OlGroup(spec))), "out")
    })
}

/// # Safety
/// `g` must come from [`ol_group_new`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ol_group_free(g: *mut OlGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Length of a Cartan vector (sum of the factor sizes).
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ol_group_ambient_dim(g: *const OlGroup, out: *mut usize) -> OlStatus {
    guard(|| write(out, group(g)?.ambient_dim(), "out"))
}

/// Cartan projection `a_log` (length [`ol_group_ambient_dim`]) and its norm.
///
/// # Safety
/// `entries` must hold `len` values, `a_log` `a_len` writable values, `mu_norm` writable.
#[no_mangle]
pub unsafe extern "C" fn ol_cartan(
    g: *const OlGroup,
    entries: *const f64,
    len: usize,
    a_log: *mut f64,
    a_len: usize,
    mu_norm: *mut f64,
) -> OlStatus {
    guard(|| {
        let spec = group(g)?;
        let h = element(spec, input(entries, len, "entries")?)?;
        let out = output(a_log, a_len, "a_log")?;
        if a_len != spec.ambient_dim() {
            return Err(Fail(OlStatus::InvalidInput, format!("a_log needs length {}", spec.ambient_dim())));
        }
        let c = cartan_decompose(&h)?;
        out.copy_from_slice(&c.a_log);
        write(mu_norm, c.mu_norm, "mu_norm")
    })
}

/// `d(K, K g)`.
///
/// # Safety
/// `entries` must hold `len` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn ol_distance_to_origin(g: *const OlGroup, entries: *const f64, len: usize, out: *mut f64) -> OlStatus {
    guard(|| {
        let h = element(group(g)?, input(entries, len, "entries")?)?;
        write(out, distance_to_origin(&h)?, "out")
    })
}

/// `log Vol(B_T)` for the group's Haar normalization.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ol_log_ball_volume(g: *const OlGroup, t: f64, out: *mut f64) -> OlStatus {
    guard(|| write(out, log_ball_volume(&root_system(group(g)?), t)?, "out"))
}

/// Enumerates the orbit of a standard rank-one lattice out to radius `t`.
/// `kind` is 0 for `PSL(2,Z)`, 1 for `Gamma0(level)`, 2 for `Gamma(level)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ol_orbit_enumerate(kind: u32, level: u32, t: f64, out: *mut *mut OlOrbit) -> OlStatus {
    guard(|| {
        let k = u8::try_from(kind)
            .ok()
            .and_then(|k| LatticeKind::from_code(k, level))
            .filter(|k| !k.is_product())
            .ok_or_else(|| Fail(OlStatus::InvalidInput, format!("unknown rank-one lattice kind {kind}")))?;
        let o = enumerate(&LatticeSpec::standard(k)?, t)?;
        write(out, Box::into_raw(Box::new(OlOrbit(o))), "out")
    })
}

/// # Safety
/// `p` must be a NUL-terminated path and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ol_orbit_load(p: *const c_char, out: *mut *mut OlOrbit) -> OlStatus {
    guard(|| {
        let o = load_cache(path(p)?)?;
        write(out, Box::into_raw(Box::new(OlOrbit(o))), "out")
    })
}

/// # Safety
/// `o` must be a live handle and `p` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn ol_orbit_save(o: *const OlOrbit, p: *const c_char) -> OlStatus {
    guard(|| Ok(save_cache(orbit(o)?, path(p)?)?))
}

/// # Safety
/// `o` must come from an `ol_orbit_` constructor and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ol_orbit_free(o: *mut OlOrbit) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// Number of enumerated elements and the enumeration radius.
///
/// # Safety
/// `o` must be a live handle; `len` and `radius` writable.
#[no_mangle]
pub unsafe extern "C" fn ol_orbit_info(o: *const OlOrbit, len: *mut usize, radius: *mut f64) -> OlStatus {
    guard(|| {
        let o = orbit(o)?;
        write(len, o.len(), "len")?;
        write(radius, o.t, "radius")
    })
}

/// Observed and predicted number of elements with `d < t`.
///
/// # Safety
/// `o` must be a live handle; `observed` and `predicted` writable.
#[no_mangle]
pub unsafe extern "C" fn ol_count_ball(o: *const OlOrbit, t: f64, observed: *mut u64, predicted: *mut f64) -> OlStatus {
    guard(|| {
        let r = count_ball(orbit(o)?, t)?;
        write(observed, r.rows[0].observed, "observed")?;
        write(predicted, r.rows[0].predicted, "predicted")
    })
}

/// Sector counts over `n_arcs` equal arcs starting at `offset`. Points are
/// counted once per orbit point when `point_mode` is set.
///
/// # Safety
/// `observed` and `predicted` must each have room for `n_arcs` values.
#[no_mangle]
pub unsafe extern "C" fn ol_count_sector(
    o: *const OlOrbit,
    n_arcs: usize,
    offset: f64,
    t: f64,
    point_mode: bool,
    observed: *mut u64,
    predicted: *mut f64,
) -> OlStatus {
    guard(|| {
        if n_arcs == 0 {
            return Err(Fail(OlStatus::InvalidInput, "need at least one arc".into()));
        }
        let mode = if point_mode { CountMode::Point } else { CountMode::Gamma };
        let r = count_sector(orbit(o)?, &Arc::partition(n_arcs, offset), t, mode)?;
        let obs = output(observed, n_arcs, "observed")?;
        let pred = output(predicted, n_arcs, "predicted")?;
        for (i, row) in r.rows.iter().enumerate() {
            obs[i] = row.observed;
            pred[i] = row.predicted;
        }
        Ok(())
    })
}

/// Reduces `m` (row-major `SL(2)`) into the standard fundamental domain:
/// `word * m = rep` with `word` in `PSL(2,Z)`, and `z = rep * i`.
///
/// # Safety
/// `m` must hold 4 values, `word` room for 4 and `z` room for 2.
#[no_mangle]
pub unsafe extern "C" fn ol_reduce(m: *const f64, word: *mut i64, z: *mut f64) -> OlStatus {
    guard(|| {
        let m: [f64; 4] = input(m, 4, "m")?.try_into().expect("length 4");
        let r = reduce_mat(&m)?;
        output(word, 4, "word")?.copy_from_slice(&r.word);
        output(z, 2, "z")?.copy_from_slice(&r.z);
        Ok(())
    })
}
