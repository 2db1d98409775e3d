use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use deadline_bcast::{exact_outage, DeadlineConfig, ErasureProbs};
use deadline_bcast_ffi::*;

fn channel() -> *mut DbcChannel {
    let mut ch = ptr::null_mut();
    assert_eq!(
        unsafe { dbc_channel_new(0.1, 0.2, 0.2, 0.5, &mut ch) },
        DbcStatus::Ok
    );
    ch
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(dbc_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(dbc_version()) };
    assert_eq!(v.to_str().unwrap(), deadline_bcast::VERSION);
}

#[test]
fn channel_validation() {
    let mut ch = ptr::null_mut();
    let s = unsafe { dbc_channel_new(0.5, 0.5, 0.5, 0.5, &mut ch) };
    assert_eq!(s, DbcStatus::InvalidConfig);
    assert!(ch.is_null());
    assert!(last_error().contains("sum"));
    assert_eq!(
        unsafe { dbc_channel_new(0.1, 0.2, 0.2, 0.5, ptr::null_mut()) },
        DbcStatus::NullPointer
    );

    let ch = channel();
    let mut probs = [0.0; 4];
    assert_eq!(
        unsafe { dbc_channel_probs(ch, probs.as_mut_ptr()) },
        DbcStatus::Ok
    );
    assert_eq!(probs, [0.1, 0.2, 0.2, 0.5]);
    unsafe { dbc_channel_free(ch) };
    unsafe { dbc_channel_free(ptr::null_mut()) };
}

#[test]
fn outage_routes_agree_with_library() {
    let ch = channel();
    let eps = ErasureProbs::new(0.1, 0.2, 0.2, 0.5).unwrap();
    for (l1, l2, t1, t2) in [(1.0, 0.0, 1, 1), (1.0, 1.0, 2, 4), (1.5, 2.0, 3, 6)] {
        let want = exact_outage(&DeadlineConfig::new(l1, l2, t1, t2).unwrap(), &eps)
            .unwrap()
            .value;
        let (mut exact, mut brute) = (0.0, 0.0);
        assert_eq!(
            unsafe { dbc_exact_outage(ch, l1, l2, t1, t2, &mut exact) },
            DbcStatus::Ok
        );
        assert_eq!(
            unsafe { dbc_brute_force_outage(ch, l1, l2, t1, t2, &mut brute) },
            DbcStatus::Ok
        );
        assert_eq!(exact, want);
        assert!((brute - want).abs() < 1e-12);
    }
    let mut v = 0.0;
    assert_eq!(
        unsafe { dbc_exact_outage(ch, 1.0, 1.0, 13, 13, &mut v) },
        DbcStatus::Guard
    );
    assert_eq!(
        unsafe { dbc_brute_force_outage(ch, 1.0, 1.0, 11, 11, &mut v) },
        DbcStatus::Guard
    );
    assert_eq!(
        unsafe { dbc_exact_outage(ch, -1.0, 1.0, 2, 2, &mut v) },
        DbcStatus::InvalidConfig
    );
    assert_eq!(
        unsafe { dbc_exact_outage(ptr::null(), 1.0, 1.0, 2, 2, &mut v) },
        DbcStatus::NullPointer
    );

    let (mut a, mut sa, mut b, mut sb) = (0.0, 0.0, 0.0, 0.0);
    let run = |v: &mut f64, s: &mut f64| unsafe {
        dbc_monte_carlo_outage(ch, DbcPolicy::CurrentCsi, 1.0, 1.0, 4, 4, 20_000, 5, v, s)
    };
    assert_eq!(run(&mut a, &mut sa), DbcStatus::Ok);
    assert_eq!(run(&mut b, &mut sb), DbcStatus::Ok);
    assert_eq!((a, sa), (b, sb));
    assert!(sa > 0.0);
    unsafe { dbc_channel_free(ch) };
}

#[test]
fn feasibility_and_cost_table() {
    let pattern = [2u8, 3, 0, 1, 3, 2];
    let mut ok = false;
    assert_eq!(
        unsafe { dbc_is_feasible(pattern.as_ptr(), 6, 3, 2.0, 1.0, &mut ok) },
        DbcStatus::Ok
    );
    assert!(ok);
    assert_eq!(
        unsafe { dbc_is_feasible(pattern.as_ptr(), 6, 3, 2.0, 1.5, &mut ok) },
        DbcStatus::Ok
    );
    assert!(!ok);
    let bad = [4u8];
    assert_eq!(
        unsafe { dbc_is_feasible(bad.as_ptr(), 1, 1, 0.0, 0.0, &mut ok) },
        DbcStatus::InvalidConfig
    );
    assert_eq!(
        unsafe { dbc_is_feasible(pattern.as_ptr(), 6, 4, 0.0, 0.0, &mut ok) },
        DbcStatus::InvalidConfig
    );

    let ch = channel();
    let mut table = ptr::null_mut();
    assert_eq!(
        unsafe { dbc_cost_table_new(ch, 4, 2, 2, &mut table) },
        DbcStatus::Ok
    );
    let (mut v, mut exact) = (0.0, 0.0);
    assert_eq!(
        unsafe { dbc_cost_table_get(table, 1, 1, 4, &mut v) },
        DbcStatus::Ok
    );
    assert_eq!(
        unsafe { dbc_exact_outage(ch, 1.0, 1.0, 4, 4, &mut exact) },
        DbcStatus::Ok
    );
    assert!((v - exact).abs() < 1e-12);
    assert_eq!(
        unsafe { dbc_cost_table_get(table, 3, 1, 4, &mut v) },
        DbcStatus::Guard
    );
    unsafe { dbc_cost_table_free(table) };
    let mut table = ptr::null_mut();
    assert_eq!(
        unsafe { dbc_cost_table_new(ch, 33, 1, 1, &mut table) },
        DbcStatus::Guard
    );
    unsafe { dbc_channel_free(ch) };
}

#[test]
fn schedules_and_traces() {
    let pattern = [2u8, 3, 0, 1, 3, 2];
    let mut o = ptr::null_mut();
    let s = unsafe {
        dbc_schedule_run(
            DbcPolicy::GreedyFull,
            pattern.as_ptr(),
            6,
            1.0,
            2.0,
            3,
            6,
            ptr::null(),
            &mut o,
        )
    };
    assert_eq!(s, DbcStatus::Ok);
    let (mut met, mut len) = (false, 0usize);
    unsafe {
        assert_eq!(dbc_outcome_met_deadlines(o, &mut met), DbcStatus::Ok);
        assert_eq!(dbc_outcome_len(o, &mut len), DbcStatus::Ok);
    }
    assert!(met);
    assert_eq!(len, 6);
    let (mut a, mut b) = (0.0, 0.0);
    assert_eq!(
        unsafe { dbc_outcome_allocation(o, 1, &mut a, &mut b) },
        DbcStatus::Ok
    );
    assert_eq!((a, b), (0.0, 1.0));
    assert_eq!(
        unsafe { dbc_outcome_allocation(o, 6, &mut a, &mut b) },
        DbcStatus::InvalidConfig
    );
    let mut trace = ptr::null_mut();
    assert_eq!(unsafe { dbc_outcome_trace(o, &mut trace) }, DbcStatus::Ok);
    let text = unsafe { CStr::from_ptr(trace) }
        .to_str()
        .unwrap()
        .to_owned();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("slot=1 state=10 action=serve1 amt1=1 amt2=0"));
    unsafe {
        dbc_string_free(trace);
        dbc_outcome_free(o);
    }

    // Causal policies need the channel and equal deadlines.
    let tie = [3u8, 1];
    let mut o = ptr::null_mut();
    let s = unsafe {
        dbc_schedule_run(
            DbcPolicy::CurrentCsi,
            tie.as_ptr(),
            2,
            1.0,
            1.0,
            2,
            2,
            ptr::null(),
            &mut o,
        )
    };
    assert_eq!(s, DbcStatus::InvalidConfig);
    let ch = channel();
    let s = unsafe {
        dbc_schedule_run(
            DbcPolicy::CurrentCsi,
            tie.as_ptr(),
            2,
            1.0,
            1.0,
            1,
            2,
            ch,
            &mut o,
        )
    };
    assert_eq!(s, DbcStatus::InvalidConfig);
    assert!(last_error().contains("current_csi"));
    let s = unsafe {
        dbc_schedule_run(
            DbcPolicy::CurrentCsi,
            tie.as_ptr(),
            2,
            1.0,
            1.0,
            2,
            2,
            ch,
            &mut o,
        )
    };
    assert_eq!(s, DbcStatus::Ok);
    unsafe {
        assert_eq!(dbc_outcome_met_deadlines(o, &mut met), DbcStatus::Ok);
        dbc_outcome_free(o);
        dbc_channel_free(ch);
    }
    assert!(!met);
}

#[test]
fn rate_solve() {
    let ch = channel();
    let mut sol = DbcRateSolution::default();
    assert_eq!(
        unsafe { dbc_rate_solve(ch, 4, 4, 0.05, 1.0, &mut sol) },
        DbcStatus::Ok
    );
    assert_eq!((sol.lambda1, sol.lambda2), (1.0, 1.0));
    assert!(sol.has_next && sol.next_lambda2 == 1.5 && sol.next_pout > 0.05);
    assert_eq!(
        unsafe { dbc_rate_solve(ch, 4, 4, 1.5, 1.0, &mut sol) },
        DbcStatus::InvalidConfig
    );
    unsafe { dbc_channel_free(ch) };
}

fn target_profile_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_profile_dir().join("libdeadline_bcast_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("dbc_smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests").join("smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler `cc` on PATH");
    assert!(status.success(), "C smoke program failed to build");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
