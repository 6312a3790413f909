//! C ABI for the attodelay library: status-code returns, plain-old-data out
//! structs, and an opaque dataset handle. The header is generated into
//! include/attodelay.h at build time.
//!
//! Conventions: every fallible call returns AttoStatus and writes results
//! through out pointers only on ATTO_STATUS_OK. After a failure,
//! atto_last_error_message() returns a thread-local NUL-terminated message
//! that stays valid until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use attodelay::dataio::{read_dataset, synth_dataset, write_dataset, Dataset, SynthModel};
use attodelay::fitting::{fit, FitBasis};
use attodelay::grid::{GridScale, GridSpec};
use attodelay::model::AtomicSystem;
use attodelay::units::TimeUnit;
use attodelay::Error;

/// Result of every fallible call; 0 is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttoStatus {
    Ok = 0,
    NullPointer = 1,
    Utf8 = 2,
    Domain = 3,
    BarrierSuppressed = 4,
    Parse = 5,
    EmptyDataset = 6,
    SingularFit = 7,
    InsufficientData = 8,
    GridMismatch = 9,
    UnitMismatch = 10,
    Io = 11,
    Internal = 12,
}

/// Barrier geometry under a static field, atomic units.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AttoBarrierGeometry {
    pub f: f64,
    pub f_a: f64,
    pub delta_z: f64,
    pub d_b: f64,
    pub x_minus: f64,
    pub x_plus: f64,
    pub x_m: f64,
    pub d_c: f64,
}

/// Delay components at one field strength, atomic units of time.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AttoDelayBreakdown {
    pub tau_a: f64,
    pub tau_dion: f64,
    pub tau_db: f64,
    pub tau_td: f64,
    pub tau_ti: f64,
    pub xi: f64,
    pub lambda: f64,
}

/// Weighted least-squares fit of delay data in a 1/F basis.
/// basis: 0 = a/F, 1 = a/F + b. time_unit: 0 = atomic, 1 = attoseconds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AttoFitResult {
    pub basis: c_int,
    pub a: f64,
    pub b: f64,
    pub cov_aa: f64,
    pub cov_ab: f64,
    pub cov_bb: f64,
    pub rss: f64,
    pub dof: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub time_unit: c_int,
}

/// Opaque delay dataset; create with atto_dataset_read or atto_dataset_synth
/// and release with atto_dataset_free.
pub struct AttoDataset {
    inner: Dataset,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(e: &Error) -> AttoStatus {
    set_error(&e.to_string());
    match e {
        Error::Domain(_) => AttoStatus::Domain,
        Error::BarrierSuppressed { .. } => AttoStatus::BarrierSuppressed,
        Error::Parse { .. } => AttoStatus::Parse,
        Error::EmptyDataset => AttoStatus::EmptyDataset,
        Error::SingularFit => AttoStatus::SingularFit,
        Error::InsufficientData { .. } => AttoStatus::InsufficientData,
        Error::GridMismatch => AttoStatus::GridMismatch,
        Error::UnitMismatch => AttoStatus::UnitMismatch,
        Error::Io(_) => AttoStatus::Io,
    }
}

fn null_pointer(name: &str) -> AttoStatus {
    set_error(&format!("null pointer: {name}"));
    AttoStatus::NullPointer
}

fn guarded<F: FnOnce() -> AttoStatus>(body: F) -> AttoStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            AttoStatus::Internal
        }
    }
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string.
unsafe fn path_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a Path, AttoStatus> {
    if ptr.is_null() {
        return Err(null_pointer(name));
    }
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error(&format!("argument {name} is not valid UTF-8"));
            Err(AttoStatus::Utf8)
        }
    }
}

fn system(ip: f64, zeff: f64) -> Result<AtomicSystem, AttoStatus> {
    AtomicSystem::new(ip, zeff).map_err(|e| fail(&e))
}

fn basis_arg(basis: c_int) -> Result<FitBasis, AttoStatus> {
    match basis {
        0 => Ok(FitBasis::InvF),
        1 => Ok(FitBasis::InvFOffset),
        other => {
            set_error(&format!("unknown basis code {other}; expected 0 (a/F) or 1 (a/F + b)"));
            Err(AttoStatus::Domain)
        }
    }
}

fn write_out<T>(out: *mut T, name: &str, value: T) -> AttoStatus {
    if out.is_null() {
        return null_pointer(name);
    }
    unsafe { out.write(value) };
    AttoStatus::Ok
}

/// Message of the most recent failure on this thread; empty if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn atto_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Converts atomic units of time to attoseconds.
#[no_mangle]
pub extern "C" fn atto_au_time_to_as(t: f64) -> f64 {
    attodelay::units::au_time_to_as(t)
}

/// Converts attoseconds to atomic units of time.
#[no_mangle]
pub extern "C" fn atto_as_time_to_au(t: f64) -> f64 {
    attodelay::units::as_time_to_au(t)
}

/// Peak field strength in au for a laser intensity in W/cm^2.
#[no_mangle]
pub extern "C" fn atto_intensity_to_field(intensity_w_cm2: f64, out_f: *mut f64) -> AttoStatus {
    guarded(|| match attodelay::units::intensity_to_field(intensity_w_cm2) {
        Ok(f) => write_out(out_f, "out_f", f),
        Err(e) => fail(&e),
    })
}

/// Laser intensity in W/cm^2 for a peak field strength in au.
#[no_mangle]
pub extern "C" fn atto_field_to_intensity(f: f64) -> f64 {
    attodelay::units::field_to_intensity(f)
}

/// Atomic (barrier-suppression) field strength I_p^2 / (4 Z_eff).
#[no_mangle]
pub extern "C" fn atto_atomic_field_strength(ip: f64, zeff: f64, out_f_a: *mut f64) -> AttoStatus {
    guarded(|| match system(ip, zeff) {
        Ok(sys) => write_out(out_f_a, "out_f_a", sys.atomic_field_strength()),
        Err(status) => status,
    })
}

/// Weak-measurement back-reaction limit 1 / (4 I_p).
#[no_mangle]
pub extern "C" fn atto_weak_measurement_backreaction(ip: f64, zeff: f64, out_tau: *mut f64) -> AttoStatus {
    guarded(|| match system(ip, zeff) {
        Ok(sys) => write_out(out_tau, "out_tau", sys.weak_measurement_backreaction()),
        Err(status) => status,
    })
}

/// Combined Coulomb plus static-field potential at position x > 0.
#[no_mangle]
pub extern "C" fn atto_effective_potential(
    ip: f64,
    zeff: f64,
    f: f64,
    x: f64,
    out_v: *mut f64,
) -> AttoStatus {
    guarded(|| {
        let sys = match system(ip, zeff) {
            Ok(sys) => sys,
            Err(status) => return status,
        };
        match sys.effective_potential(f, x) {
            Ok(v) => write_out(out_v, "out_v", v),
            Err(e) => fail(&e),
        }
    })
}

/// Barrier height I_p - 2 sqrt(Z_eff F) at the potential apex.
#[no_mangle]
pub extern "C" fn atto_apex_depth(ip: f64, zeff: f64, f: f64, out_depth: *mut f64) -> AttoStatus {
    guarded(|| {
        let sys = match system(ip, zeff) {
            Ok(sys) => sys,
            Err(status) => return status,
        };
        match sys.apex_depth(f) {
            Ok(d) => write_out(out_depth, "out_depth", d),
            Err(e) => fail(&e),
        }
    })
}

/// Full barrier geometry at field strength f.
#[no_mangle]
pub extern "C" fn atto_barrier_geometry(
    ip: f64,
    zeff: f64,
    f: f64,
    out_geometry: *mut AttoBarrierGeometry,
) -> AttoStatus {
    guarded(|| {
        let sys = match system(ip, zeff) {
            Ok(sys) => sys,
            Err(status) => return status,
        };
        match sys.barrier_geometry(f) {
            Ok(g) => write_out(
                out_geometry,
                "out_geometry",
                AttoBarrierGeometry {
                    f: g.f,
                    f_a: g.f_a,
                    delta_z: g.delta_z,
                    d_b: g.d_b,
                    x_minus: g.x_minus,
                    x_plus: g.x_plus,
                    x_m: g.x_m,
                    d_c: g.d_c,
                },
            ),
            Err(e) => fail(&e),
        }
    })
}

/// All delay components at field strength f.
#[no_mangle]
pub extern "C" fn atto_delay_breakdown(
    ip: f64,
    zeff: f64,
    f: f64,
    out_delays: *mut AttoDelayBreakdown,
) -> AttoStatus {
    guarded(|| {
        let sys = match system(ip, zeff) {
            Ok(sys) => sys,
            Err(status) => return status,
        };
        match sys.delay_breakdown(f) {
            Ok(d) => write_out(
                out_delays,
                "out_delays",
                AttoDelayBreakdown {
                    tau_a: d.tau_a,
                    tau_dion: d.tau_dion,
                    tau_db: d.tau_db,
                    tau_td: d.tau_td,
                    tau_ti: d.tau_ti,
                    xi: d.xi,
                    lambda: d.lambda,
                },
            ),
            Err(e) => fail(&e),
        }
    })
}

/// Barrier time delay tau_db at field strength f.
#[no_mangle]
pub extern "C" fn atto_barrier_delay(ip: f64, zeff: f64, f: f64, out_tau: *mut f64) -> AttoStatus {
    guarded(|| {
        let sys = match system(ip, zeff) {
            Ok(sys) => sys,
            Err(status) => return status,
        };
        match sys.barrier_delay(f) {
            Ok(tau) => write_out(out_tau, "out_tau", tau),
            Err(e) => fail(&e),
        }
    })
}

/// Thick-barrier ratio lambda = tau_db / tau_dion at field strength f.
#[no_mangle]
pub extern "C" fn atto_thick_barrier_ratio(ip: f64, zeff: f64, f: f64, out_lambda: *mut f64) -> AttoStatus {
    guarded(|| {
        let sys = match system(ip, zeff) {
            Ok(sys) => sys,
            Err(status) => return status,
        };
        match sys.thick_barrier_ratio(f) {
            Ok(l) => write_out(out_lambda, "out_lambda", l),
            Err(e) => fail(&e),
        }
    })
}

fn dataset_out(out: *mut *mut AttoDataset, ds: Dataset) -> AttoStatus {
    if out.is_null() {
        return null_pointer("out_dataset");
    }
    let handle = Box::new(AttoDataset { inner: ds });
    unsafe { out.write(Box::into_raw(handle)) };
    AttoStatus::Ok
}

/// Reads a delay dataset CSV. On success the caller owns the handle and must
/// release it with atto_dataset_free.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn atto_dataset_read(path: *const c_char, out_dataset: *mut *mut AttoDataset) -> AttoStatus {
    guarded(|| {
        let path = match unsafe { path_arg(path, "path") } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match read_dataset(path) {
            Ok(ds) => dataset_out(out_dataset, ds),
            Err(e) => fail(&e),
        }
    })
}

/// Writes a dataset to a CSV file.
///
/// # Safety
/// `dataset` must be a live handle from this library; `path` a valid string.
#[no_mangle]
pub unsafe extern "C" fn atto_dataset_write(dataset: *const AttoDataset, path: *const c_char) -> AttoStatus {
    guarded(|| {
        if dataset.is_null() {
            return null_pointer("dataset");
        }
        let path = match unsafe { path_arg(path, "path") } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match write_dataset(&unsafe { &*dataset }.inner, path) {
            Ok(()) => AttoStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Generates a synthetic dataset from the model.
/// model: 0 = adiabatic (tau_td), 1 = nonadiabatic (tau_dion), 2 = barrier
/// (tau_db). scale: 0 = linear grid, 1 = log grid.
#[no_mangle]
pub extern "C" fn atto_dataset_synth(
    ip: f64,
    zeff: f64,
    model: c_int,
    f_min: f64,
    f_max: f64,
    n: usize,
    scale: c_int,
    noise_sigma: f64,
    seed: u64,
    out_dataset: *mut *mut AttoDataset,
) -> AttoStatus {
    guarded(|| {
        let sys = match system(ip, zeff) {
            Ok(sys) => sys,
            Err(status) => return status,
        };
        let model = match model {
            0 => SynthModel::Adiabatic,
            1 => SynthModel::Nonadiabatic,
            2 => SynthModel::Barrier,
            other => {
                set_error(&format!("unknown model code {other}; expected 0, 1, or 2"));
                return AttoStatus::Domain;
            }
        };
        let scale = match scale {
            0 => GridScale::Linear,
            1 => GridScale::Log,
            other => {
                set_error(&format!("unknown grid scale code {other}; expected 0 or 1"));
                return AttoStatus::Domain;
            }
        };
        let spec = match GridSpec::new(f_min, f_max, n, scale) {
            Ok(spec) => spec,
            Err(e) => return fail(&e),
        };
        match synth_dataset(&sys, model, &spec, noise_sigma, seed) {
            Ok(ds) => dataset_out(out_dataset, ds),
            Err(e) => fail(&e),
        }
    })
}

/// Number of samples in the dataset.
///
/// # Safety
/// `dataset` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn atto_dataset_len(dataset: *const AttoDataset, out_len: *mut usize) -> AttoStatus {
    guarded(|| {
        if dataset.is_null() {
            return null_pointer("dataset");
        }
        write_out(out_len, "out_len", unsafe { &*dataset }.inner.samples.len())
    })
}

/// Reads sample `index`. `out_sigma` receives the uncertainty when present
/// (out_has_sigma = 1) and 0 otherwise. Delays are in the dataset's time
/// unit: 0 = atomic, 1 = attoseconds, reported through out_time_unit.
///
/// # Safety
/// `dataset` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn atto_dataset_sample(
    dataset: *const AttoDataset,
    index: usize,
    out_f: *mut f64,
    out_delay: *mut f64,
    out_sigma: *mut f64,
    out_has_sigma: *mut c_int,
    out_time_unit: *mut c_int,
) -> AttoStatus {
    guarded(|| {
        if dataset.is_null() {
            return null_pointer("dataset");
        }
        let ds = &unsafe { &*dataset }.inner;
        let Some(sample) = ds.samples.get(index) else {
            set_error(&format!("sample index {index} out of range ({} samples)", ds.samples.len()));
            return AttoStatus::Domain;
        };
        let unit = match ds.time_unit {
            TimeUnit::Atomic => 0,
            TimeUnit::Attosecond => 1,
        };
        let mut status = write_out(out_f, "out_f", sample.f);
        if status == AttoStatus::Ok {
            status = write_out(out_delay, "out_delay", sample.delay);
        }
        if status == AttoStatus::Ok {
            status = write_out(out_sigma, "out_sigma", sample.sigma.unwrap_or(0.0));
        }
        if status == AttoStatus::Ok {
            status = write_out(out_has_sigma, "out_has_sigma", sample.sigma.is_some() as c_int);
        }
        if status == AttoStatus::Ok {
            status = write_out(out_time_unit, "out_time_unit", unit);
        }
        status
    })
}

/// Releases a dataset handle. Passing NULL is a no-op.
///
/// # Safety
/// `dataset` must be NULL or a live handle from this library; the handle is
/// invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn atto_dataset_free(dataset: *mut AttoDataset) {
    if !dataset.is_null() {
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Fits the dataset in the chosen basis (0 = a/F, 1 = a/F + b).
///
/// # Safety
/// `dataset` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn atto_fit(
    dataset: *const AttoDataset,
    basis: c_int,
    out_fit: *mut AttoFitResult,
) -> AttoStatus {
    guarded(|| {
        if dataset.is_null() {
            return null_pointer("dataset");
        }
        let basis = match basis_arg(basis) {
            Ok(b) => b,
            Err(status) => return status,
        };
        match fit(&unsafe { &*dataset }.inner, basis) {
            Ok(fr) => write_out(
                out_fit,
                "out_fit",
                AttoFitResult {
                    basis: match fr.basis {
                        FitBasis::InvF => 0,
                        FitBasis::InvFOffset => 1,
                    },
                    a: fr.a,
                    b: fr.b,
                    cov_aa: fr.covariance[0],
                    cov_ab: fr.covariance[1],
                    cov_bb: *fr.covariance.last().unwrap(),
                    rss: fr.rss,
                    dof: fr.dof,
                    f_min: fr.f_min,
                    f_max: fr.f_max,
                    time_unit: match fr.time_unit {
                        TimeUnit::Atomic => 0,
                        TimeUnit::Attosecond => 1,
                    },
                },
            ),
            Err(e) => fail(&e),
        }
    })
}

/// Evaluates a fitted curve a / f + b at field strength f > 0.
///
/// # Safety
/// `fit_result` must point to a valid AttoFitResult.
#[no_mangle]
pub unsafe extern "C" fn atto_fit_eval(
    fit_result: *const AttoFitResult,
    f: f64,
    out_value: *mut f64,
) -> AttoStatus {
    guarded(|| {
        if fit_result.is_null() {
            return null_pointer("fit_result");
        }
        if !(f > 0.0) || !f.is_finite() {
            set_error(&format!("field strength must be positive and finite, got {f}"));
            return AttoStatus::Domain;
        }
        let fr = unsafe { &*fit_result };
        write_out(out_value, "out_value", fr.a / f + fr.b)
    })
}

/// Fits both datasets in the chosen basis, evaluates them on `f_grid`
/// (length n, strictly increasing, positive), and writes adiabatic minus
/// nonadiabatic to `out_values`. `out_extrapolated[i]` is 1 where the point
/// lies outside either fitted range. Both datasets are reconciled to atomic
/// units, so the difference is in atomic units.
///
/// # Safety
/// Handles must be live; `f_grid`, `out_values`, and `out_extrapolated` must
/// point to at least n elements.
#[no_mangle]
pub unsafe extern "C" fn atto_barrier_extraction(
    adiabatic: *const AttoDataset,
    nonadiabatic: *const AttoDataset,
    basis: c_int,
    f_grid: *const f64,
    n: usize,
    out_values: *mut f64,
    out_extrapolated: *mut u8,
) -> AttoStatus {
    guarded(|| {
        if adiabatic.is_null() {
            return null_pointer("adiabatic");
        }
        if nonadiabatic.is_null() {
            return null_pointer("nonadiabatic");
        }
        if f_grid.is_null() {
            return null_pointer("f_grid");
        }
        if out_values.is_null() {
            return null_pointer("out_values");
        }
        if out_extrapolated.is_null() {
            return null_pointer("out_extrapolated");
        }
        let basis = match basis_arg(basis) {
            Ok(b) => b,
            Err(status) => return status,
        };
        let grid = unsafe { std::slice::from_raw_parts(f_grid, n) };
        let curve = match attodelay::analysis::barrier_extraction(
            &unsafe { &*adiabatic }.inner,
            &unsafe { &*nonadiabatic }.inner,
            basis,
            grid,
        ) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        };
        let values = unsafe { std::slice::from_raw_parts_mut(out_values, n) };
        let extrapolated = unsafe { std::slice::from_raw_parts_mut(out_extrapolated, n) };
        values.copy_from_slice(&curve.values);
        for (slot, &flag) in extrapolated.iter_mut().zip(&curve.extrapolated_mask) {
            *slot = flag as u8;
        }
        AttoStatus::Ok
    })
}
