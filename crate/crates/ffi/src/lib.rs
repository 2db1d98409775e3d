//! C interface to `deadline_bcast`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and
//! released by the matching `*_free`. Every fallible call returns a
//! [`DbcStatus`] and writes results through out-pointers; on failure
//! [`dbc_last_error_message`] describes the error for the calling thread.
//! Symbols of an erasure pattern are passed as bytes `0..=3`, high bit for
//! user 1 and low bit for user 2.

use std::cell::RefCell;
use std::ffi::CString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use deadline_bcast::{
    block_stats, brute_force_outage, exact_outage, is_feasible, monte_carlo_outage, rate_solver,
    run_policy_standalone, BruteForceMode, CostToGoTable, DeadlineConfig, ErasurePattern,
    ErasureProbs, Error, FrameOutcome, PolicyId, Symbol,
};
use libc::{c_char, size_t};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    Guard = 3,
    ValidationFailed = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbcPolicy {
    GreedyFull = 0,
    CurrentCsi = 1,
    PastCsi = 2,
}

impl From<DbcPolicy> for PolicyId {
    fn from(p: DbcPolicy) -> Self {
        match p {
            DbcPolicy::GreedyFull => PolicyId::GreedyFull,
            DbcPolicy::CurrentCsi => PolicyId::CurrentCsi,
            DbcPolicy::PastCsi => PolicyId::PastCsi,
        }
    }
}

/// Outcome of a rate search; see `dbc_rate_solve`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DbcRateSolution {
    pub lambda1: f64,
    pub lambda2: f64,
    pub pout: f64,
    /// No positive rate meets the target; the rates are zero.
    pub degenerate: bool,
    /// Whether `next_lambda2` and `next_pout` are set.
    pub has_next: bool,
    pub next_lambda2: f64,
    pub next_pout: f64,
}

/// Erasure probabilities of the four joint reception states.
pub struct DbcChannel {
    eps: ErasureProbs,
}

/// Residual outage table for equal deadlines.
pub struct DbcCostTable {
    table: CostToGoTable,
}

/// Result of running one policy on one pattern.
pub struct DbcOutcome {
    outcome: FrameOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> DbcStatus {
    match err.exit_code() {
        3 => DbcStatus::Guard,
        4 => DbcStatus::ValidationFailed,
        _ => DbcStatus::InvalidConfig,
    }
}

fn guarded(f: impl FnOnce() -> Result<(), DbcStatus>) -> DbcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            DbcStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_last_error("internal panic");
            DbcStatus::Panic
        }
    }
}

fn check<T>(r: deadline_bcast::Result<T>) -> Result<T, DbcStatus> {
    r.map_err(|e| {
        set_last_error(&e.to_string());
        status_of(&e)
    })
}

fn null() -> DbcStatus {
    set_last_error("null pointer argument");
    DbcStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, DbcStatus> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), DbcStatus> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

unsafe fn read_pattern(symbols: *const u8, len: size_t) -> Result<ErasurePattern, DbcStatus> {
    if len == 0 {
        return Ok(ErasurePattern::new(Vec::new()));
    }
    if symbols.is_null() {
        return Err(null());
    }
    std::slice::from_raw_parts(symbols, len)
        .iter()
        .map(|&b| Symbol::from_bits(b))
        .collect::<Option<Vec<_>>>()
        .map(ErasurePattern::new)
        .ok_or_else(|| {
            set_last_error("pattern symbols must lie in 0..=3");
            DbcStatus::InvalidConfig
        })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dbc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, empty after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn dbc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn dbc_channel_new(
    eps00: f64,
    eps01: f64,
    eps10: f64,
    eps11: f64,
    out: *mut *mut DbcChannel,
) -> DbcStatus {
    guarded(|| {
        let eps = check(ErasureProbs::new(eps00, eps01, eps10, eps11))?;
        write(out, Box::into_raw(Box::new(DbcChannel { eps })))
    })
}

/// Writes the normalized probabilities `eps00, eps01, eps10, eps11`.
///
/// # Safety
/// `channel` must come from `dbc_channel_new`; `out` must hold four doubles.
#[no_mangle]
pub unsafe extern "C" fn dbc_channel_probs(channel: *const DbcChannel, out: *mut f64) -> DbcStatus {
    guarded(|| {
        let ch = deref(channel)?;
        if out.is_null() {
            return Err(null());
        }
        ptr::copy_nonoverlapping(ch.eps.as_array().as_ptr(), out, 4);
        Ok(())
    })
}

/// # Safety
/// `channel` must come from `dbc_channel_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn dbc_channel_free(channel: *mut DbcChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

fn config(lambda1: f64, lambda2: f64, t1: u32, t2: u32) -> Result<DeadlineConfig, DbcStatus> {
    check(DeadlineConfig::new(lambda1, lambda2, t1, t2))
}

/// Exact deadline outage of the full-knowledge scheduler.
///
/// # Safety
/// `channel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dbc_exact_outage(
    channel: *const DbcChannel,
    lambda1: f64,
    lambda2: f64,
    t1: u32,
    t2: u32,
    out: *mut f64,
) -> DbcStatus {
    guarded(|| {
        let ch = deref(channel)?;
        let cfg = config(lambda1, lambda2, t1, t2)?;
        write(out, check(exact_outage(&cfg, &ch.eps))?.value)
    })
}

/// Outage by enumerating every erasure pattern of the frame.
///
/// # Safety
/// `channel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dbc_brute_force_outage(
    channel: *const DbcChannel,
    lambda1: f64,
    lambda2: f64,
    t1: u32,
    t2: u32,
    out: *mut f64,
) -> DbcStatus {
    guarded(|| {
        let ch = deref(channel)?;
        let cfg = config(lambda1, lambda2, t1, t2)?;
        write(
            out,
            check(brute_force_outage(&cfg, &ch.eps, BruteForceMode::CutSet))?.value,
        )
    })
}

/// Simulated outage of `policy`. Results depend only on the arguments, not
/// on the number of worker threads.
///
/// # Safety
/// `channel` must be a live handle; `value` and `stderr_out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn dbc_monte_carlo_outage(
    channel: *const DbcChannel,
    policy: DbcPolicy,
    lambda1: f64,
    lambda2: f64,
    t1: u32,
    t2: u32,
    trials: u64,
    seed: u64,
    value: *mut f64,
    stderr_out: *mut f64,
) -> DbcStatus {
    guarded(|| {
        let ch = deref(channel)?;
        if value.is_null() || stderr_out.is_null() {
            return Err(null());
        }
        let cfg = config(lambda1, lambda2, t1, t2)?;
        let r = check(monte_carlo_outage(
            policy.into(),
            &cfg,
            &ch.eps,
            trials,
            seed,
        ))?;
        write(value, r.value)?;
        write(stderr_out, r.stderr.unwrap_or(0.0))
    })
}

/// Whether `(lambda1, lambda2)` lies in the cut-set region of a pattern split
/// into blocks of `t1` slots.
///
/// # Safety
/// `symbols` must point to `len` bytes; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dbc_is_feasible(
    symbols: *const u8,
    len: size_t,
    t1: u32,
    lambda1: f64,
    lambda2: f64,
    out: *mut bool,
) -> DbcStatus {
    guarded(|| {
        let p = read_pattern(symbols, len)?;
        let st = check(block_stats(&p, t1))?;
        write(out, is_feasible(&st, lambda1, lambda2))
    })
}

/// # Safety
/// `channel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dbc_cost_table_new(
    channel: *const DbcChannel,
    tmax: u32,
    l1max: u32,
    l2max: u32,
    out: *mut *mut DbcCostTable,
) -> DbcStatus {
    guarded(|| {
        let ch = deref(channel)?;
        let table = check(deadline_bcast::outage::try_build_cost_table(
            tmax, l1max, l2max, &ch.eps,
        ))?;
        write(out, Box::into_raw(Box::new(DbcCostTable { table })))
    })
}

/// Outage of `l1`, `l2` packets in `t` remaining slots.
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dbc_cost_table_get(
    table: *const DbcCostTable,
    l1: u32,
    l2: u32,
    t: u32,
    out: *mut f64,
) -> DbcStatus {
    guarded(|| {
        let tb = deref(table)?;
        match tb.table.get(l1, l2, t) {
            Some(v) => write(out, v),
            None => {
                let (t_max, a, b) = tb.table.bounds();
                set_last_error(&format!(
                    "entry ({l1}, {l2}, {t}) outside table bounds ({a}, {b}, {t_max})"
                ));
                Err(DbcStatus::Guard)
            }
        }
    })
}

/// # Safety
/// `table` must come from `dbc_cost_table_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn dbc_cost_table_free(table: *mut DbcCostTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Runs `policy` on a pattern. `channel` may be null for the greedy policy.
///
/// # Safety
/// `symbols` must point to `len` bytes; `channel` null or live; `out`
/// writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn dbc_schedule_run(
    policy: DbcPolicy,
    symbols: *const u8,
    len: size_t,
    lambda1: f64,
    lambda2: f64,
    t1: u32,
    t2: u32,
    channel: *const DbcChannel,
    out: *mut *mut DbcOutcome,
) -> DbcStatus {
    guarded(|| {
        let policy = PolicyId::from(policy);
        let p = read_pattern(symbols, len)?;
        let cfg = config(lambda1, lambda2, t1, t2)?;
        let eps = match channel.as_ref() {
            Some(ch) => ch.eps,
            None if policy.is_causal() => {
                set_last_error("causal policies need a channel");
                return Err(DbcStatus::InvalidConfig);
            }
            None => ErasureProbs::from_array([0.0, 0.0, 0.0, 1.0]).expect("valid"),
        };
        let outcome = check(run_policy_standalone(policy, &p, &cfg, &eps))?;
        write(out, Box::into_raw(Box::new(DbcOutcome { outcome })))
    })
}

/// # Safety
/// `outcome` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dbc_outcome_met_deadlines(
    outcome: *const DbcOutcome,
    out: *mut bool,
) -> DbcStatus {
    guarded(|| write(out, deref(outcome)?.outcome.met_deadlines))
}

/// Number of slots in the schedule.
///
/// # Safety
/// `outcome` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dbc_outcome_len(
    outcome: *const DbcOutcome,
    out: *mut size_t,
) -> DbcStatus {
    guarded(|| write(out, deref(outcome)?.outcome.schedule.alloc.len()))
}

/// Data delivered to each user in slot `slot` (0-based).
///
/// # Safety
/// `outcome` must be a live handle; `amt1` and `amt2` writable.
#[no_mangle]
pub unsafe extern "C" fn dbc_outcome_allocation(
    outcome: *const DbcOutcome,
    slot: size_t,
    amt1: *mut f64,
    amt2: *mut f64,
) -> DbcStatus {
    guarded(|| {
        let o = deref(outcome)?;
        let Some(&[a, b]) = o.outcome.schedule.alloc.get(slot) else {
            set_last_error(&format!("slot {slot} out of range"));
            return Err(DbcStatus::InvalidConfig);
        };
        if amt1.is_null() || amt2.is_null() {
            return Err(null());
        }
        write(amt1, a)?;
        write(amt2, b)
    })
}

/// Per-slot trace, one line per slot. Release with `dbc_string_free`.
///
/// # Safety
/// `outcome` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dbc_outcome_trace(
    outcome: *const DbcOutcome,
    out: *mut *mut c_char,
) -> DbcStatus {
    guarded(|| {
        let text = deref(outcome)?.outcome.trace_log();
        let c = CString::new(text).expect("trace has no NUL");
        write(out, c.into_raw())
    })
}

/// # Safety
/// `outcome` must come from `dbc_schedule_run` or be null.
#[no_mangle]
pub unsafe extern "C" fn dbc_outcome_free(outcome: *mut DbcOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn dbc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Largest rates on the ray `lambda1 = m * lambda2` whose outage is at most
/// `p`.
///
/// # Safety
/// `channel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dbc_rate_solve(
    channel: *const DbcChannel,
    t1: u32,
    t2: u32,
    p: f64,
    m: f64,
    out: *mut DbcRateSolution,
) -> DbcStatus {
    guarded(|| {
        let ch = deref(channel)?;
        let s = check(rate_solver(&ch.eps, t1, t2, p, m))?;
        write(
            out,
            DbcRateSolution {
                lambda1: s.lambda1,
                lambda2: s.lambda2,
                pout: s.pout,
                degenerate: s.degenerate,
                has_next: s.next_lambda2.is_some(),
                next_lambda2: s.next_lambda2.unwrap_or(0.0),
                next_pout: s.next_pout.unwrap_or(0.0),
            },
        )
    })
}
