//! C interface to the minsyn library.
//!
//! Every function returns a [`MinsynStatus`]. On failure a message is kept
//! per thread and can be read with [`minsyn_last_error`]. Objects behind
//! handles are created by `*_new`/`*_load` functions and released with the
//! matching `*_free`. Matrices are row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use minsyn::cli::{Checkpoint, TrainedModel};
use minsyn::discrete_info::{
    discrete_ci_synergy, discrete_wms_synergy, mutual_information, total_correlation,
    DiscreteJoint,
};
use minsyn::gaussian_info::{
    feasible_sigma12_range, gaussian_ci_posterior, gaussian_ci_synergy,
    gaussian_mutual_information, gk_synergy, gk_union_information, wms_synergy, GaussianSystem,
};
use minsyn::metrics::{acc_score, Reconstructor};
use minsyn::minsyn_decoder::{Moments, StatsKind};
use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2};
use minsyn::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinsynStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Conditioning = 3,
    Degenerate = 4,
    Shape = 5,
    Parse = 6,
    Config = 7,
    Io = 8,
    Numerical = 9,
    Untrained = 10,
    InvalidString = 11,
    Internal = 12,
}

impl From<&Error> for MinsynStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) | Error::AbsoluteContinuity { .. } => MinsynStatus::Domain,
            Error::Conditioning(_) => MinsynStatus::Conditioning,
            Error::Degenerate(_) => MinsynStatus::Degenerate,
            Error::Shape(_) | Error::BatchSize(_) => MinsynStatus::Shape,
            Error::Parse { .. } | Error::Json(_) => MinsynStatus::Parse,
            Error::Config(_) => MinsynStatus::Config,
            Error::Io { .. } => MinsynStatus::Io,
            Error::NonFiniteLoss { .. } => MinsynStatus::Numerical,
            Error::Untrained => MinsynStatus::Untrained,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: MinsynStatus, message: impl Into<String>) -> MinsynStatus {
    set_error(message.into());
    status
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), MinsynStatus>) -> MinsynStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MinsynStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(MinsynStatus::Internal, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, MinsynStatus>;
}

impl<T> OrStatus<T> for minsyn::Result<T> {
    fn or_status(self) -> Result<T, MinsynStatus> {
        self.map_err(|e| fail(MinsynStatus::from(&e), e.to_string()))
    }
}

unsafe fn input<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], MinsynStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(fail(MinsynStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn output<'a, T>(data: *mut T, len: usize, what: &str) -> Result<&'a mut [T], MinsynStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if data.is_null() {
        return Err(fail(MinsynStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts_mut(data, len))
}

unsafe fn write_out<T>(dst: *mut T, value: T, what: &str) -> Result<(), MinsynStatus> {
    if dst.is_null() {
        return Err(fail(MinsynStatus::NullPointer, format!("{what} is null")));
    }
    dst.write(value);
    Ok(())
}

unsafe fn handle<'a, T>(h: *const T, what: &str) -> Result<&'a T, MinsynStatus> {
    h.as_ref()
        .ok_or_else(|| fail(MinsynStatus::NullPointer, format!("{what} handle is null")))
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, MinsynStatus> {
    if s.is_null() {
        return Err(fail(MinsynStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(MinsynStatus::InvalidString, format!("{what} is not UTF-8")))
}

fn matrix(data: &[f64], rows: usize, cols: usize) -> Result<ArrayView2<'_, f64>, MinsynStatus> {
    ArrayView2::from_shape((rows, cols), data)
        .map_err(|e| fail(MinsynStatus::Shape, e.to_string()))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn minsyn_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Standardized Gaussian system (opaque).
pub struct MinsynGaussianSystem(GaussianSystem);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MinsynGaussianMeasures {
    pub mutual_information: f64,
    pub union_information: f64,
    pub gk_synergy: f64,
    pub ci_synergy: f64,
    pub wms_synergy: f64,
}

/// `rho` has `m` entries, `sigma` is the `m x m` latent correlation matrix.
///
/// # Safety
/// `rho` and `sigma` must point to `m` and `m * m` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn minsyn_gaussian_system_new(
    rho: *const f64,
    sigma: *const f64,
    m: usize,
    out: *mut *mut MinsynGaussianSystem,
) -> MinsynStatus {
    guard(|| {
        let rho = input(rho, m, "rho")?.to_vec();
        let sigma = DMatrix::from_row_slice(m, m, input(sigma, m * m, "sigma")?);
        let sys = GaussianSystem::new(rho, sigma).or_status()?;
        write_out(out, Box::into_raw(Box::new(MinsynGaussianSystem(sys))), "out")
    })
}

/// # Safety
/// `sys` must come from [`minsyn_gaussian_system_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn minsyn_gaussian_system_free(sys: *mut MinsynGaussianSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn minsyn_gaussian_measures(
    sys: *const MinsynGaussianSystem,
    out: *mut MinsynGaussianMeasures,
) -> MinsynStatus {
    guard(|| {
        let s = &handle(sys, "system")?.0;
        let measures = MinsynGaussianMeasures {
            mutual_information: gaussian_mutual_information(s).or_status()?,
            union_information: gk_union_information(s.rho()).or_status()?,
            gk_synergy: gk_synergy(s).or_status()?,
            ci_synergy: gaussian_ci_synergy(s).or_status()?,
            wms_synergy: wms_synergy(s).or_status()?,
        };
        write_out(out, measures, "out")
    })
}

/// # Safety
/// `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn minsyn_feasible_sigma12_range(
    rho1: f64,
    rho2: f64,
    lo: *mut f64,
    hi: *mut f64,
) -> MinsynStatus {
    guard(|| {
        let iv = feasible_sigma12_range(rho1, rho2).or_status()?;
        write_out(lo, iv.lo, "lo")?;
        write_out(hi, iv.hi, "hi")
    })
}

/// CI posterior of one standardized output: `weights` receives `m` values.
///
/// # Safety
/// `rho` and `weights` must hold `m` doubles; `variance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn minsyn_gaussian_ci_posterior(
    rho: *const f64,
    m: usize,
    weights: *mut f64,
    variance: *mut f64,
) -> MinsynStatus {
    guard(|| {
        let post = gaussian_ci_posterior(input(rho, m, "rho")?).or_status()?;
        output(weights, m, "weights")?.copy_from_slice(&post.weights);
        write_out(variance, post.variance, "variance")
    })
}

/// Discrete joint distribution (opaque).
pub struct MinsynDiscreteJoint(DiscreteJoint);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MinsynDiscreteMeasures {
    pub mutual_information: f64,
    pub ci_synergy: f64,
    pub wms_synergy: f64,
    pub total_correlation: f64,
}

/// `arities` lists every latent alphabet size followed by the target's;
/// `probs` is the dense table with the target varying fastest.
///
/// # Safety
/// `arities` must hold `count` sizes, `probs` their product; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn minsyn_discrete_joint_new(
    arities: *const usize,
    count: usize,
    probs: *const f64,
    probs_len: usize,
    out: *mut *mut MinsynDiscreteJoint,
) -> MinsynStatus {
    guard(|| {
        let arities = input(arities, count, "arities")?.to_vec();
        let probs = input(probs, probs_len, "probs")?.to_vec();
        let joint = DiscreteJoint::new(arities, probs).or_status()?;
        write_out(out, Box::into_raw(Box::new(MinsynDiscreteJoint(joint))), "out")
    })
}

/// Parses the whitespace-separated text format (`z_1 .. z_m x p` per line).
///
/// # Safety
/// `text` must be a nul-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn minsyn_discrete_joint_parse(
    text: *const c_char,
    out: *mut *mut MinsynDiscreteJoint,
) -> MinsynStatus {
    guard(|| {
        let joint = DiscreteJoint::parse_text(c_str(text, "text")?).or_status()?;
        write_out(out, Box::into_raw(Box::new(MinsynDiscreteJoint(joint))), "out")
    })
}

/// # Safety
/// `joint` must come from a `minsyn_discrete_joint_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn minsyn_discrete_joint_free(joint: *mut MinsynDiscreteJoint) {
    if !joint.is_null() {
        drop(Box::from_raw(joint));
    }
}

/// # Safety
/// `joint` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn minsyn_discrete_measures(
    joint: *const MinsynDiscreteJoint,
    out: *mut MinsynDiscreteMeasures,
) -> MinsynStatus {
    guard(|| {
        let j = &handle(joint, "joint")?.0;
        let latents: Vec<usize> = (0..j.num_latents()).collect();
        let measures = MinsynDiscreteMeasures {
            mutual_information: mutual_information(j, &latents).or_status()?,
            ci_synergy: discrete_ci_synergy(j).or_status()?,
            wms_synergy: discrete_wms_synergy(j).or_status()?,
            total_correlation: total_correlation(j),
        };
        write_out(out, measures, "out")
    })
}

/// Binary MinSyn decoder from moments: `mean_x` (`n`), `mean_z` (`m`) and
/// `mean_xz` (`n x m`, the mean of `x_i z_j`). Writes `weights` (`n x m`) and
/// `bias` (`n`).
///
/// # Safety
/// All pointers must hold the stated number of doubles.
#[no_mangle]
pub unsafe extern "C" fn minsyn_binary_decoder_params(
    mean_x: *const f64,
    mean_z: *const f64,
    mean_xz: *const f64,
    n: usize,
    m: usize,
    weights: *mut f64,
    bias: *mut f64,
) -> MinsynStatus {
    guard(|| {
        let moments = Moments {
            kind: StatsKind::Binary,
            mean_x: Array1::from(input(mean_x, n, "mean_x")?.to_vec()),
            mean_z: Array1::from(input(mean_z, m, "mean_z")?.to_vec()),
            mean_x2: Array1::zeros(0),
            mean_z2: Array1::zeros(0),
            mean_xz: matrix(input(mean_xz, n * m, "mean_xz")?, n, m)?.to_owned(),
        };
        let p = moments.decoder_params().or_status()?;
        let w = output(weights, n * m, "weights")?;
        w.iter_mut().zip(p.weights.iter()).for_each(|(d, s)| *d = *s);
        output(bias, n, "bias")?.copy_from_slice(p.bias.as_slice().expect("contiguous"));
        Ok(())
    })
}

/// ACC score in nats of `weights` (`n x m`); `layout[i]` is pixel `i`'s slot.
///
/// # Safety
/// `weights` must hold `n * m` doubles, `layout` `n` sizes; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn minsyn_acc_score(
    weights: *const f64,
    n: usize,
    m: usize,
    layout: *const usize,
    slots: usize,
    out: *mut f64,
) -> MinsynStatus {
    guard(|| {
        let w = matrix(input(weights, n * m, "weights")?, n, m)?;
        let acc = acc_score(w, input(layout, n, "layout")?, slots).or_status()?;
        write_out(out, acc, "out")
    })
}

/// Trained model loaded from a checkpoint file (opaque).
pub struct MinsynModel(TrainedModel);

/// # Safety
/// `path` must be a nul-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn minsyn_model_load(
    path: *const c_char,
    out: *mut *mut MinsynModel,
) -> MinsynStatus {
    guard(|| {
        let ckpt = Checkpoint::load(Path::new(c_str(path, "path")?)).or_status()?;
        write_out(out, Box::into_raw(Box::new(MinsynModel(ckpt.model))), "out")
    })
}

/// # Safety
/// `model` must come from [`minsyn_model_load`].
#[no_mangle]
pub unsafe extern "C" fn minsyn_model_free(model: *mut MinsynModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of input features the model expects.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn minsyn_model_inputs(
    model: *const MinsynModel,
    out: *mut usize,
) -> MinsynStatus {
    guard(|| write_out(out, handle(model, "model")?.0.inputs(), "out"))
}

/// Evaluation-mode reconstruction of `rows x cols` inputs into `out`.
///
/// # Safety
/// `x` and `out` must hold `rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn minsyn_model_reconstruct(
    model: *const MinsynModel,
    x: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
) -> MinsynStatus {
    guard(|| {
        let model = &handle(model, "model")?.0;
        let xbar: Array2<f64> = model
            .reconstruct_batch(matrix(input(x, rows * cols, "x")?, rows, cols)?)
            .or_status()?;
        let dst = output(out, rows * cols, "out")?;
        dst.iter_mut().zip(xbar.iter()).for_each(|(d, s)| *d = *s);
        Ok(())
    })
}
