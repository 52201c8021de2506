//! C ABI for `fen-core`.
//!
//! Games and partitions cross the boundary as opaque handles created by the
//! `*_parse` functions and released with the matching `*_free`. Every
//! fallible call returns a [`FenStatus`]; on failure a message is available
//! from [`fen_last_error_message`] on the same thread. Structured results
//! come back as NUL-terminated JSON strings owned by the caller and released
//! with [`fen_string_free`]. A size bound of `0` means unbounded.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fen_core::generate::{generate, Family, InstanceSpec};
use fen_core::{
    exact_verify, perfect_existence_tester, repair_all_witnesses, sample_size, verification_tester, CoalitionStructure,
    Epsilon, FenError, FenGame, GraphOracle, PartitionOracle, SizeBound, StabilityConcept, TesterConfig,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FenStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    TooLarge = 5,
    BudgetExhausted = 6,
    Panic = 7,
}

/// Opaque game handle.
pub struct FenGameHandle(FenGame);

/// Opaque coalition-structure handle.
pub struct FenPartitionHandle(CoalitionStructure);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

struct Failure(FenStatus, String);

impl From<FenError> for Failure {
    fn from(e: FenError) -> Self {
        let status = match e {
            FenError::Parse { .. } => FenStatus::ParseError,
            FenError::TooLarge { .. } => FenStatus::TooLarge,
            FenError::BudgetExhausted { .. } => FenStatus::BudgetExhausted,
            _ => FenStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FenStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, records any error or panic, and returns the status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> FenStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            FenStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {message}"));
            FenStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(FenStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn to_c_string(text: String) -> *mut c_char {
    CString::new(text).expect("JSON and text output contain no NUL").into_raw()
}

fn bound(c: usize) -> SizeBound {
    if c == 0 {
        SizeBound::Unbounded
    } else {
        SizeBound::Bounded(c)
    }
}

unsafe fn concept(ptr: *const c_char) -> Result<StabilityConcept, Failure> {
    Ok(read_str(ptr, "concept")?.parse()?)
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

/// Parses a game in the `fen 1 n d f e` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fen_game_parse(text: *const c_char, out: *mut *mut FenGameHandle) -> FenStatus {
    guard(|| {
        let game = FenGame::parse(read_str(text, "text")?)?;
        put(out, Box::into_raw(Box::new(FenGameHandle(game))), "out")
    })
}

/// Releases a game handle. Null is ignored.
///
/// # Safety
/// `game` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fen_game_free(game: *mut FenGameHandle) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Number of players, or 0 for a null handle.
///
/// # Safety
/// `game` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fen_game_player_count(game: *const FenGameHandle) -> usize {
    game.as_ref().map_or(0, |g| g.0.n())
}

/// Serializes a game back to its text format.
///
/// # Safety
/// `game` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fen_game_to_text(game: *const FenGameHandle, out: *mut *mut c_char) -> FenStatus {
    guard(|| {
        let game = deref(game, "game")?;
        put(out, to_c_string(game.0.to_text()), "out")
    })
}

/// Parses a partition in the `partition n c` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fen_partition_parse(text: *const c_char, out: *mut *mut FenPartitionHandle) -> FenStatus {
    guard(|| {
        let partition = CoalitionStructure::parse(read_str(text, "text")?)?;
        put(out, Box::into_raw(Box::new(FenPartitionHandle(partition))), "out")
    })
}

/// Releases a partition handle. Null is ignored.
///
/// # Safety
/// `partition` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fen_partition_free(partition: *mut FenPartitionHandle) {
    if !partition.is_null() {
        drop(Box::from_raw(partition));
    }
}

/// Decides stability exactly. Writes the verdict to `stable` and, when
/// `json_out` is non-null, the certificate as JSON.
///
/// # Safety
/// Handles must be live; `concept` NUL-terminated; `stable` writable.
#[no_mangle]
pub unsafe extern "C" fn fen_exact_verify(
    game: *const FenGameHandle,
    partition: *const FenPartitionHandle,
    concept_name: *const c_char,
    c: usize,
    stable: *mut bool,
    json_out: *mut *mut c_char,
) -> FenStatus {
    guard(|| {
        let (game, partition) = (deref(game, "game")?, deref(partition, "partition")?);
        let cert = exact_verify(&game.0, &partition.0, concept(concept_name)?, bound(c))?;
        put(stable, cert.stable, "stable")?;
        if !json_out.is_null() {
            json_out.write(to_c_string(json(&cert)));
        }
        Ok(())
    })
}

/// One run of the verification tester. Writes whether it rejected and, when
/// `json_out` is non-null, the verdict with sample and query ledger.
///
/// # Safety
/// Handles must be live; `concept` NUL-terminated; `rejected` writable.
#[no_mangle]
pub unsafe extern "C" fn fen_verification_test(
    game: *const FenGameHandle,
    partition: *const FenPartitionHandle,
    concept_name: *const c_char,
    epsilon: f64,
    c: usize,
    seed: u64,
    rejected: *mut bool,
    json_out: *mut *mut c_char,
) -> FenStatus {
    guard(|| {
        let (game, partition) = (deref(game, "game")?, deref(partition, "partition")?);
        let config = TesterConfig { epsilon: Epsilon::new(epsilon)?, concept: concept(concept_name)?, bound: bound(c), seed };
        let verdict = verification_tester(&mut GraphOracle::new(&game.0), &mut PartitionOracle::new(&partition.0), &config)?;
        put(rejected, verdict.rejected(), "rejected")?;
        if !json_out.is_null() {
            json_out.write(to_c_string(json(&verdict)));
        }
        Ok(())
    })
}

/// One run of the perfect-existence tester; `c` must be positive.
///
/// # Safety
/// `game` must be live; `rejected` writable.
#[no_mangle]
pub unsafe extern "C" fn fen_existence_test(
    game: *const FenGameHandle,
    epsilon: f64,
    c: usize,
    seed: u64,
    rejected: *mut bool,
    json_out: *mut *mut c_char,
) -> FenStatus {
    guard(|| {
        let game = deref(game, "game")?;
        let verdict = perfect_existence_tester(&mut GraphOracle::new(&game.0), Epsilon::new(epsilon)?, bound(c), seed)?;
        put(rejected, verdict.rejected(), "rejected")?;
        if !json_out.is_null() {
            json_out.write(to_c_string(json(&verdict)));
        }
        Ok(())
    })
}

/// Repairs every witness; writes the edit script (one operation per line)
/// and its length.
///
/// # Safety
/// Handles must be live; `concept` NUL-terminated; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn fen_repair(
    game: *const FenGameHandle,
    partition: *const FenPartitionHandle,
    concept_name: *const c_char,
    c: usize,
    length: *mut usize,
    script_out: *mut *mut c_char,
) -> FenStatus {
    guard(|| {
        let (game, partition) = (deref(game, "game")?, deref(partition, "partition")?);
        let plan = repair_all_witnesses(&game.0, &partition.0, concept(concept_name)?, bound(c))?;
        if script_out.is_null() {
            return Err(null("script_out"));
        }
        put(length, plan.script.cost(), "length")?;
        script_out.write(to_c_string(plan.script.to_text()));
        Ok(())
    })
}

/// Generates an instance of a named family. `partition_out` receives null
/// for families without a partition; `certificate_out` may be null.
///
/// # Safety
/// `family` NUL-terminated; `game_out` and `partition_out` writable.
#[no_mangle]
pub unsafe extern "C" fn fen_generate(
    family: *const c_char,
    n: usize,
    d: usize,
    c: usize,
    seed: u64,
    game_out: *mut *mut FenGameHandle,
    partition_out: *mut *mut FenPartitionHandle,
    certificate_out: *mut *mut c_char,
) -> FenStatus {
    guard(|| {
        let family: Family = read_str(family, "family")?.parse()?;
        if game_out.is_null() || partition_out.is_null() {
            return Err(null("output pointer"));
        }
        let instance = generate(&InstanceSpec::new(family, n, d, bound(c), seed))?;
        if !certificate_out.is_null() {
            certificate_out.write(to_c_string(json(&instance.certificate)));
        }
        let partition = instance
            .partition
            .map_or(ptr::null_mut(), |p| Box::into_raw(Box::new(FenPartitionHandle(p))));
        partition_out.write(partition);
        game_out.write(Box::into_raw(Box::new(FenGameHandle(instance.game))));
        Ok(())
    })
}

/// `⌈ln 3 / ε⌉`, or 0 when `epsilon` is outside `(0, 1]`.
#[no_mangle]
pub extern "C" fn fen_sample_size(epsilon: f64) -> usize {
    Epsilon::new(epsilon).map_or(0, sample_size)
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fen_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn fen_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
