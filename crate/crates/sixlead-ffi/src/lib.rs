//! C ABI over the sixlead model runtime.
//!
//! The surface is deliberately small: load a trained model file (or its
//! text), run millivolt-in / millivolt-out predictions, inspect the neuron
//! count, and derive the remaining frontal leads from predicted Leads I
//! and II. Models are opaque handles owned by this library; every function
//! reports a [`SixleadStatus`] instead of unwinding across the boundary.
//!
//! The header `include/sixlead.h` is generated from this file at build
//! time by cbindgen.

use std::ffi::{c_char, CStr};

use sixlead::leads::derive_six;
use sixlead::model::ReluNetwork;

/// Opaque handle to a loaded model.
pub struct SixleadModel {
    network: ReluNetwork,
}

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SixleadStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The model file could not be read.
    IoError = 3,
    /// The model text did not parse.
    ParseError = 4,
    /// Lengths or values were out of range.
    InvalidArgument = 5,
}

/// Loads a model from a file written by the trainer.
///
/// On success stores an owned handle in `*out`; release it with
/// [`sixlead_model_free`].
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sixlead_model_load(
    path: *const c_char,
    out: *mut *mut SixleadModel,
) -> SixleadStatus {
    if path.is_null() || out.is_null() {
        return SixleadStatus::NullArgument;
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(s) => s,
        Err(_) => return SixleadStatus::InvalidUtf8,
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(_) => return SixleadStatus::IoError,
    };
    match ReluNetwork::from_text(&text) {
        Ok(network) => {
            *out = Box::into_raw(Box::new(SixleadModel { network }));
            SixleadStatus::Ok
        }
        Err(_) => SixleadStatus::ParseError,
    }
}

/// Parses a model from its textual form.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sixlead_model_from_text(
    text: *const c_char,
    out: *mut *mut SixleadModel,
) -> SixleadStatus {
    if text.is_null() || out.is_null() {
        return SixleadStatus::NullArgument;
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(s) => s,
        Err(_) => return SixleadStatus::InvalidUtf8,
    };
    match ReluNetwork::from_text(text) {
        Ok(network) => {
            *out = Box::into_raw(Box::new(SixleadModel { network }));
            SixleadStatus::Ok
        }
        Err(_) => SixleadStatus::ParseError,
    }
}

/// Releases a model handle. Null is a no-op.
///
/// # Safety
/// `model` must be a handle returned by this library, released at most
/// once.
#[no_mangle]
pub unsafe extern "C" fn sixlead_model_free(model: *mut SixleadModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of hidden neurons (active breakpoints) in the model.
///
/// # Safety
/// `model` must be a live handle returned by this library.
#[no_mangle]
pub unsafe extern "C" fn sixlead_model_neuron_count(model: *const SixleadModel) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).network.neurons().len()
}

/// Evaluates the model pointwise: millivolt samples in, millivolt
/// predictions out. `input_mv` and `output_mv` must each hold `len`
/// doubles and may not alias.
///
/// # Safety
/// `model` must be a live handle; both buffers must be valid for `len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn sixlead_model_predict(
    model: *const SixleadModel,
    input_mv: *const f64,
    len: usize,
    output_mv: *mut f64,
) -> SixleadStatus {
    if model.is_null() || (len > 0 && (input_mv.is_null() || output_mv.is_null())) {
        return SixleadStatus::NullArgument;
    }
    let input = std::slice::from_raw_parts(input_mv, len);
    if input.iter().any(|v| !v.is_finite()) {
        return SixleadStatus::InvalidArgument;
    }
    let output = std::slice::from_raw_parts_mut(output_mv, len);
    let predicted = (*model).network.predict_mv(input);
    output.copy_from_slice(&predicted);
    SixleadStatus::Ok
}

/// Derives leads III, aVR, aVL, aVF from Leads I and II. All buffers
/// hold `len` doubles.
///
/// # Safety
/// Every pointer must be valid for `len` doubles; output buffers may not
/// alias the inputs.
#[no_mangle]
pub unsafe extern "C" fn sixlead_derive_six(
    lead_i: *const f64,
    lead_ii: *const f64,
    len: usize,
    out_iii: *mut f64,
    out_avr: *mut f64,
    out_avl: *mut f64,
    out_avf: *mut f64,
) -> SixleadStatus {
    if len > 0
        && (lead_i.is_null()
            || lead_ii.is_null()
            || out_iii.is_null()
            || out_avr.is_null()
            || out_avl.is_null()
            || out_avf.is_null())
    {
        return SixleadStatus::NullArgument;
    }
    let i = std::slice::from_raw_parts(lead_i, len);
    let ii = std::slice::from_raw_parts(lead_ii, len);
    let frame = match derive_six(i, ii, 1.0) {
        Ok(f) => f,
        Err(_) => return SixleadStatus::InvalidArgument,
    };
    std::slice::from_raw_parts_mut(out_iii, len).copy_from_slice(&frame.lead_iii);
    std::slice::from_raw_parts_mut(out_avr, len).copy_from_slice(&frame.avr);
    std::slice::from_raw_parts_mut(out_avl, len).copy_from_slice(&frame.avl);
    std::slice::from_raw_parts_mut(out_avf, len).copy_from_slice(&frame.avf);
    SixleadStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sixlead_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    const MODEL_TEXT: &str = "sixlead-model v1\n\
        input_mean 0.5\n\
        input_std 2\n\
        output_mean -1\n\
        output_std 0.5\n\
        intercept 0.25\n\
        neurons 2\n\
        neuron rising 0 1\n\
        neuron falling 1 -0.5\n";

    fn load_fixture() -> *mut SixleadModel {
        let text = CString::new(MODEL_TEXT).unwrap();
        let mut handle: *mut SixleadModel = std::ptr::null_mut();
        let status = unsafe { sixlead_model_from_text(text.as_ptr(), &mut handle) };
        assert_eq!(status, SixleadStatus::Ok);
        assert!(!handle.is_null());
        handle
    }

    #[test]
    fn parses_and_predicts_like_the_library() {
        let handle = load_fixture();
        unsafe {
            assert_eq!(sixlead_model_neuron_count(handle), 2);
            let input = [0.0f64, 0.5, 3.0, -2.0];
            let mut output = [0.0f64; 4];
            let status =
                sixlead_model_predict(handle, input.as_ptr(), input.len(), output.as_mut_ptr());
            assert_eq!(status, SixleadStatus::Ok);

            let reference = ReluNetwork::from_text(MODEL_TEXT).unwrap();
            for (got, expected) in output.iter().zip(reference.predict_mv(&input)) {
                assert_eq!(*got, expected);
            }
            sixlead_model_free(handle);
        }
    }

    #[test]
    fn load_from_file_roundtrips() {
        let dir = tempdir();
        let path = dir.join("m.model");
        std::fs::write(&path, MODEL_TEXT).unwrap();
        let c_path = CString::new(path.to_str().unwrap()).unwrap();
        let mut handle: *mut SixleadModel = std::ptr::null_mut();
        unsafe {
            assert_eq!(
                sixlead_model_load(c_path.as_ptr(), &mut handle),
                SixleadStatus::Ok
            );
            assert_eq!(sixlead_model_neuron_count(handle), 2);
            sixlead_model_free(handle);

            let missing =
                CString::new(path.with_extension("nope").to_str().unwrap().to_string()).unwrap();
            assert_eq!(
                sixlead_model_load(missing.as_ptr(), &mut handle),
                SixleadStatus::IoError
            );
        }
    }

    fn tempdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("sixlead_ffi_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn status_codes_for_bad_arguments() {
        unsafe {
            let mut handle: *mut SixleadModel = std::ptr::null_mut();
            assert_eq!(
                sixlead_model_from_text(std::ptr::null(), &mut handle),
                SixleadStatus::NullArgument
            );
            let garbage = CString::new("not a model").unwrap();
            assert_eq!(
                sixlead_model_from_text(garbage.as_ptr(), &mut handle),
                SixleadStatus::ParseError
            );

            let model = load_fixture();
            let nan = [f64::NAN];
            let mut out = [0.0f64];
            assert_eq!(
                sixlead_model_predict(model, nan.as_ptr(), 1, out.as_mut_ptr()),
                SixleadStatus::InvalidArgument
            );
            sixlead_model_free(model);
            sixlead_model_free(std::ptr::null_mut()); // no-op
        }
    }

    #[test]
    fn derive_six_matches_library_route() {
        let i = [1.0f64, 2.0, -0.5];
        let ii = [2.0f64, 1.0, 0.5];
        let mut iii = [0.0f64; 3];
        let mut avr = [0.0f64; 3];
        let mut avl = [0.0f64; 3];
        let mut avf = [0.0f64; 3];
        let status = unsafe {
            sixlead_derive_six(
                i.as_ptr(),
                ii.as_ptr(),
                3,
                iii.as_mut_ptr(),
                avr.as_mut_ptr(),
                avl.as_mut_ptr(),
                avf.as_mut_ptr(),
            )
        };
        assert_eq!(status, SixleadStatus::Ok);
        let frame = derive_six(&i, &ii, 1.0).unwrap();
        assert_eq!(iii.to_vec(), frame.lead_iii);
        assert_eq!(avr.to_vec(), frame.avr);
        assert_eq!(avl.to_vec(), frame.avl);
        assert_eq!(avf.to_vec(), frame.avf);
    }

    #[test]
    fn version_is_a_c_string() {
        let version = unsafe { CStr::from_ptr(sixlead_version()) };
        assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
