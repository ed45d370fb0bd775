//! C ABI for the circuit-prior library.
//!
//! Objects are opaque handles created by a `*_new` or `*_parse` function
//! and released with the matching `*_free`. Every fallible function returns
//! a [`CpStatus`]; on failure, [`cp_last_error`] describes the most recent
//! error on the calling thread. Strings returned through out-parameters are
//! owned by the caller and released with [`cp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use circuit_prior::complexity::{ComplexityOracle, ComplexityResult};
use circuit_prior::enumeration::{count_bounds, enumerate_circuits};
use circuit_prior::predictor::{mip_predict, run_trace, TieMode};
use circuit_prior::{BitString, Circuit, Error, Pattern};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed or out-of-range argument.
    InvalidArgument = 2,
    /// Circuit text could not be parsed or validated.
    Parse = 3,
    /// The requested size is beyond the enumeration budget.
    BudgetExceeded = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

/// Complexity oracle for one input count.
pub struct CpOracle {
    inner: ComplexityOracle,
}

/// A NAND circuit.
pub struct CpCircuit {
    inner: Circuit,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CpStatus, msg: impl Into<String>) -> CpStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> CpStatus {
    let status = match e {
        Error::Parse { .. } | Error::InvalidCircuit(_) => CpStatus::Parse,
        Error::BudgetExceeded { .. } | Error::Infeasible(_) => CpStatus::BudgetExceeded,
        _ => CpStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), CpStatus>) -> CpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CpStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(CpStatus::Internal, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, CpStatus> {
    if s.is_null() {
        return Err(fail(CpStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(CpStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, CpStatus> {
    p.as_mut().ok_or_else(|| fail(CpStatus::NullPointer, format!("{what} is null")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, CpStatus> {
    p.as_ref().ok_or_else(|| fail(CpStatus::NullPointer, format!("{what} is null")))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the exact complexities of every function of `inputs` inputs up to
/// `budget` gates.
///
/// # Safety
/// `out_oracle` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cp_oracle_new(inputs: u8, budget: usize, out_oracle: *mut *mut CpOracle) -> CpStatus {
    guard(|| {
        let slot = out(out_oracle, "out_oracle")?;
        let inner = ComplexityOracle::new(inputs, budget).map_err(from_error)?;
        *slot = Box::into_raw(Box::new(CpOracle { inner }));
        Ok(())
    })
}

/// Releases an oracle. Null is ignored.
///
/// # Safety
/// `oracle` must be null or a handle from [`cp_oracle_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cp_oracle_free(oracle: *mut CpOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}

/// Index complexity of a pattern over `0`, `1`, `*`, right-padded with `*`.
///
/// On success `*exceeded` says whether the complexity is above the oracle's
/// budget; otherwise `*value` holds it and, when `out_witness` is not null,
/// `*out_witness` receives a minimum circuit to be freed by the caller.
///
/// # Safety
/// Pointers must be valid; `pattern` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn cp_oracle_complexity(
    oracle: *const CpOracle,
    pattern: *const c_char,
    value: *mut usize,
    exceeded: *mut bool,
    out_witness: *mut *mut CpCircuit,
) -> CpStatus {
    guard(|| {
        let o = &handle(oracle, "oracle")?.inner;
        let x = Pattern::parse_padded(read_str(pattern, "pattern")?, o.inputs()).map_err(from_error)?;
        let value = out(value, "value")?;
        let exceeded = out(exceeded, "exceeded")?;
        match o.complexity(&x).map_err(from_error)? {
            ComplexityResult::Exact { value: v, witness } => {
                *value = v;
                *exceeded = false;
                if let Some(slot) = out_witness.as_mut() {
                    *slot = Box::into_raw(Box::new(CpCircuit { inner: witness }));
                }
            }
            ComplexityResult::Exceeds { .. } => {
                *value = 0;
                *exceeded = true;
                if let Some(slot) = out_witness.as_mut() {
                    *slot = ptr::null_mut();
                }
            }
        }
        Ok(())
    })
}

/// Prediction for the bit after `prefix`: bit 0 of `*set` stands for `0`,
/// bit 1 for `1`. `*capped` is set when both extensions exceed the budget.
///
/// # Safety
/// Pointers must be valid; `prefix` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn cp_oracle_predict(
    oracle: *const CpOracle,
    prefix: *const c_char,
    set: *mut u8,
    capped: *mut bool,
) -> CpStatus {
    guard(|| {
        let o = &handle(oracle, "oracle")?.inner;
        let x = Pattern::parse_padded(read_str(prefix, "prefix")?, o.inputs()).map_err(from_error)?;
        let (set, capped) = (out(set, "set")?, out(capped, "capped")?);
        let p = mip_predict(o, &x).map_err(from_error)?;
        *set = p.set.bits().map(|b| 1u8 << b as u8).sum();
        *capped = p.capped;
        Ok(())
    })
}

/// Predictor summary over a full string.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CpTrace {
    /// `I(x)`; meaningful only when `budget_exceeded` is false.
    pub complexity: usize,
    pub errors: usize,
    pub uncertain: usize,
    pub budget_exceeded: bool,
}

/// Runs the predictor over `string`, treating ties as uncertain.
///
/// # Safety
/// Pointers must be valid; `string` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn cp_oracle_trace(
    oracle: *const CpOracle,
    string: *const c_char,
    out_trace: *mut CpTrace,
) -> CpStatus {
    guard(|| {
        let o = &handle(oracle, "oracle")?.inner;
        let x: BitString = read_str(string, "string")?.parse().map_err(from_error)?;
        let slot = out(out_trace, "out_trace")?;
        let t = run_trace(o, &x, TieMode::Set).map_err(from_error)?;
        *slot = CpTrace {
            complexity: t.complexity.unwrap_or(0),
            errors: t.errors,
            uncertain: t.uncertain,
            budget_exceeded: t.budget_exceeded,
        };
        Ok(())
    })
}

/// Parses the line format `inputs=L`, `k: NAND a b`, ..., `out=node`.
///
/// # Safety
/// `text` must be nul-terminated and `out_circuit` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cp_circuit_parse(text: *const c_char, out_circuit: *mut *mut CpCircuit) -> CpStatus {
    guard(|| {
        let text = read_str(text, "text")?;
        let slot = out(out_circuit, "out_circuit")?;
        let inner: Circuit = text.parse().map_err(from_error)?;
        *slot = Box::into_raw(Box::new(CpCircuit { inner }));
        Ok(())
    })
}

/// Releases a circuit. Null is ignored.
///
/// # Safety
/// `circuit` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cp_circuit_free(circuit: *mut CpCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Number of gates, or 0 for a null handle.
///
/// # Safety
/// `circuit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cp_circuit_size(circuit: *const CpCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.inner.size())
}

/// Number of inputs, or 0 for a null handle.
///
/// # Safety
/// `circuit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cp_circuit_inputs(circuit: *const CpCircuit) -> u8 {
    circuit.as_ref().map_or(0, |c| c.inner.inputs())
}

/// The string the circuit computes, as `0`/`1` characters.
///
/// # Safety
/// `circuit` must be a live handle and `out_string` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cp_circuit_compute_string(
    circuit: *const CpCircuit,
    out_string: *mut *mut c_char,
) -> CpStatus {
    guard(|| {
        let c = &handle(circuit, "circuit")?.inner;
        *out(out_string, "out_string")? = owned_string(c.compute_string().to_string());
        Ok(())
    })
}

/// The circuit in the line format accepted by [`cp_circuit_parse`].
///
/// # Safety
/// `circuit` must be a live handle and `out_text` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cp_circuit_to_text(circuit: *const CpCircuit, out_text: *mut *mut c_char) -> CpStatus {
    guard(|| {
        let c = &handle(circuit, "circuit")?.inner;
        *out(out_text, "out_text")? = owned_string(c.to_string());
        Ok(())
    })
}

/// Number of circuit classes with exactly `size` gates. Fails with
/// [`CpStatus::BudgetExceeded`] when there are more than `budget`.
///
/// # Safety
/// `count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cp_count_circuits(inputs: u8, size: usize, budget: usize, count: *mut u64) -> CpStatus {
    guard(|| {
        let count = out(count, "count")?;
        let classes = enumerate_circuits(inputs, size, budget).map_err(from_error)?;
        if classes.truncated() {
            return Err(from_error(Error::BudgetExceeded { inputs, size, budget }));
        }
        *count = classes.len() as u64;
        Ok(())
    })
}

/// Lower and upper product bounds on the class count, as decimal strings.
///
/// # Safety
/// `out_lower` and `out_upper` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cp_count_bounds(
    inputs: u8,
    size: usize,
    out_lower: *mut *mut c_char,
    out_upper: *mut *mut c_char,
) -> CpStatus {
    guard(|| {
        let (lo, hi) = (out(out_lower, "out_lower")?, out(out_upper, "out_upper")?);
        let (lower, upper) = count_bounds(inputs, size).map_err(from_error)?;
        *lo = owned_string(lower.to_string());
        *hi = owned_string(upper.to_string());
        Ok(())
    })
}
