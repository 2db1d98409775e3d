//! Self-check suite behind `deadline-bcast validate`.
//!
//! Each check compares two independent routes to the same quantity or
//! asserts a structural property, at desk scale. `quick` shrinks every
//! domain so the suite finishes in seconds.

use std::fmt::Write as _;
use std::time::Instant;

use crate::channel::{
    block_stats, enumerate_block_configs, enumerate_patterns, pattern_probability, BlockStats,
    DeadlineConfig, ErasureProbs,
};
use crate::cutset::{equivalent_feasible, is_feasible};
use crate::experiments::{ordered_within, policy_compare};
use crate::outage::{
    brute_force_outage, build_cost_table, exact_outage, monte_carlo_outage, rate_solver,
    BruteForceMode,
};
use crate::scheduler::{greedy_full_csi, PolicyId};

type CheckResult = std::result::Result<String, String>;

/// A named check returning a short summary on success or a failure reason.
pub struct Check {
    pub name: &'static str,
    pub run: Box<dyn Fn() -> CheckResult + Send + Sync>,
}

impl Check {
    pub fn new(name: &'static str, run: impl Fn() -> CheckResult + Send + Sync + 'static) -> Self {
        Check {
            name,
            run: Box::new(run),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Runs checks in order, catching panics as failures.
pub fn run_checks(checks: &[Check]) -> Vec<CheckReport> {
    checks
        .iter()
        .map(|c| {
            let start = Instant::now();
            let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| (c.run)()))
                .unwrap_or_else(|_| Err("panicked".to_string()));
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckReport {
                name: c.name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

pub fn render_table(reports: &[CheckReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {}  {:>7.2}s  {}",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.seconds,
            r.detail
        );
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{} checks, {} failed", reports.len(), failed);
    out
}

/// Erasure models used across the suite.
pub fn reference_eps() -> Vec<ErasureProbs> {
    [
        [0.1, 0.2, 0.2, 0.5],
        [0.25, 0.25, 0.25, 0.25],
        [0.0, 0.0, 0.0, 1.0],
    ]
    .into_iter()
    .map(|e| ErasureProbs::from_array(e).expect("reference eps valid"))
    .collect()
}

fn divisors(t: u32) -> impl Iterator<Item = u32> {
    (1..=t).filter(move |&d| t.is_multiple_of(d))
}

fn grid(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

pub fn check_pattern_normalization(max_t: usize) -> CheckResult {
    for e in reference_eps() {
        for t in 1..=max_t {
            let total: f64 = enumerate_patterns(t)
                .map_err(|e| e.to_string())?
                .map(|p| pattern_probability(&p, &e))
                .sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(format!("T = {t}: pattern mass {total}"));
            }
        }
    }
    Ok(format!("T <= {max_t}"))
}

pub fn check_block_weights(max_t1: u32) -> CheckResult {
    for t1 in 1..=max_t1 {
        let (count, sum) =
            enumerate_block_configs(t1).fold((0u64, 0u64), |(c, s), (_, w)| (c + 1, s + w));
        let expect = u64::from((t1 + 1) * (t1 + 2) * (t1 + 3) / 6);
        if count != expect || sum != 4u64.pow(t1) {
            return Err(format!("T1 = {t1}: {count} configs, weight sum {sum}"));
        }
    }
    Ok(format!("T1 <= {max_t1}"))
}

/// Compares a feasibility test against the half-plane form on every pattern
/// of the given frame lengths and every divisor block length.
pub fn check_cutset_equivalence(
    frames: &[u32],
    feasible: impl Fn(&[BlockStats], f64, f64) -> bool,
) -> CheckResult {
    let mut points = 0u64;
    for &t in frames {
        let lambdas = grid(t as f64 + 1.0, 0.25);
        for t1 in divisors(t) {
            for p in enumerate_patterns(t as usize).map_err(|e| e.to_string())? {
                let st = block_stats(&p, t1).map_err(|e| e.to_string())?;
                for &l1 in &lambdas {
                    for &l2 in &lambdas {
                        points += 1;
                        if feasible(&st, l1, l2) != equivalent_feasible(&st, l1, l2) {
                            return Err(format!("pattern {p}, t1 = {t1}, ({l1}, {l2})"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{points} points"))
}

pub fn check_greedy_optimality(frames: &[u32]) -> CheckResult {
    let mut points = 0u64;
    for &t in frames {
        let lambdas = grid(t as f64, 0.25);
        for t1 in divisors(t) {
            for p in enumerate_patterns(t as usize).map_err(|e| e.to_string())? {
                let st = block_stats(&p, t1).map_err(|e| e.to_string())?;
                for &l1 in &lambdas {
                    for &l2 in &lambdas {
                        points += 1;
                        let cfg = DeadlineConfig::new(l1, l2, t1, t).map_err(|e| e.to_string())?;
                        let out = greedy_full_csi(&p, &cfg).map_err(|e| e.to_string())?;
                        if out.met_deadlines != is_feasible(&st, l1, l2) {
                            return Err(format!("pattern {p}, t1 = {t1}, ({l1}, {l2})"));
                        }
                        out.schedule.validate(&p).map_err(|e| e.to_string())?;
                    }
                }
            }
        }
    }
    Ok(format!("{points} frames"))
}

pub fn check_exact_vs_brute(max_t1: u32) -> CheckResult {
    let mut worst: f64 = 0.0;
    for e in reference_eps() {
        for t1 in 1..=max_t1 {
            for n in 1..=2 {
                let t = t1 * n;
                for l1 in grid(t as f64, 0.5) {
                    for l2 in grid(t as f64, 0.5) {
                        let cfg = DeadlineConfig::new(l1, l2, t1, t).map_err(|e| e.to_string())?;
                        let a = exact_outage(&cfg, &e).map_err(|e| e.to_string())?.value;
                        let b = brute_force_outage(&cfg, &e, BruteForceMode::CutSet)
                            .map_err(|e| e.to_string())?
                            .value;
                        worst = worst.max((a - b).abs());
                        if (a - b).abs() > 1e-12 {
                            return Err(format!("{cfg:?}: exact {a} vs brute force {b}"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("max |diff| = {worst:e}"))
}

pub fn check_capacity_wall() -> CheckResult {
    let e = ErasureProbs::new(0.1, 0.2, 0.2, 0.5).expect("valid eps");
    for m in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let on = 12.0 / (1.0 + m);
        for (l2, expect_one) in [(on, false), (on + 0.05, true), (on + 1.0, true)] {
            let cfg = DeadlineConfig::new(m * l2, l2, 12, 12).map_err(|e| e.to_string())?;
            let v = exact_outage(&cfg, &e).map_err(|e| e.to_string())?.value;
            if expect_one != (v == 1.0) || v > 1.0 {
                return Err(format!("m = {m}, lambda2 = {l2}: P_out = {v}"));
            }
        }
    }
    Ok("P_out = 1 beyond 12 packets, < 1 at 12".into())
}

/// Monotonicity in the rates and the deadline, plus constancy between
/// integer breakpoints of `λ1`, `λ2` and `λ1 + λ2` for a single block.
pub fn check_monotone_steps(max_t: u32) -> CheckResult {
    let e = ErasureProbs::new(0.1, 0.2, 0.2, 0.5).expect("valid eps");
    let pout = |l1: f64, l2: f64, t: u32| -> Result<f64, String> {
        let cfg = DeadlineConfig::equal_deadlines(l1, l2, t).map_err(|e| e.to_string())?;
        Ok(exact_outage(&cfg, &e).map_err(|e| e.to_string())?.value)
    };
    let near_int = |x: f64| (x - x.round()).abs() < 1e-6;
    for t in 1..=max_t {
        if pout(0.0, 0.0, t)? != 0.0 {
            return Err(format!("T = {t}: P_out(0, 0) != 0"));
        }
        let lambdas = grid(t as f64 + 1.0, 0.05);
        let mut cells: std::collections::HashMap<(i64, i64, i64), f64> = Default::default();
        let mut prev_row: Vec<f64> = Vec::new();
        for &l1 in &lambdas {
            let row: Vec<f64> = lambdas
                .iter()
                .map(|&l2| pout(l1, l2, t))
                .collect::<Result<_, _>>()?;
            for (j, &v) in row.iter().enumerate() {
                if j > 0 && v + 1e-12 < row[j - 1] {
                    return Err(format!(
                        "T = {t}: decreasing in lambda2 at ({l1}, {})",
                        lambdas[j]
                    ));
                }
                if let Some(&above) = prev_row.get(j) {
                    if v + 1e-12 < above {
                        return Err(format!(
                            "T = {t}: decreasing in lambda1 at ({l1}, {})",
                            lambdas[j]
                        ));
                    }
                }
                let l2 = lambdas[j];
                if !(near_int(l1) || near_int(l2) || near_int(l1 + l2)) {
                    let key = (
                        l1.floor() as i64,
                        l2.floor() as i64,
                        (l1 + l2).floor() as i64,
                    );
                    match cells.get(&key) {
                        Some(&w) if w != v => {
                            return Err(format!(
                                "T = {t}: not constant in cell {key:?}: {w} vs {v}"
                            ));
                        }
                        _ => {
                            cells.insert(key, v);
                        }
                    }
                }
            }
            prev_row = row;
        }
    }
    for l in grid(4.0, 0.5) {
        let mut prev = 1.0;
        for t in 1..=max_t {
            let v = pout(l, l, t)?;
            if v > prev + 1e-12 {
                return Err(format!(
                    "lambda = {l}: P_out increases from T = {} to {t}",
                    t - 1
                ));
            }
            prev = v;
        }
    }
    Ok(format!("T <= {max_t}"))
}

pub fn check_cost_table(max_t: u32, max_l: u32) -> CheckResult {
    let mut worst: f64 = 0.0;
    for e in reference_eps() {
        let table = build_cost_table(max_t, max_l, max_l, &e);
        for t in 1..=max_t {
            for l1 in 0..=max_l {
                for l2 in 0..=max_l {
                    let cfg = DeadlineConfig::equal_deadlines(l1 as f64, l2 as f64, t)
                        .map_err(|e| e.to_string())?;
                    let b = brute_force_outage(&cfg, &e, BruteForceMode::CutSet)
                        .map_err(|e| e.to_string())?
                        .value;
                    let v = table.get(l1, l2, t).ok_or("table incomplete")?;
                    worst = worst.max((v - b).abs());
                    if (v - b).abs() > 1e-12 {
                        return Err(format!("entry ({l1}, {l2}, {t}): {v} vs brute force {b}"));
                    }
                }
            }
            if table.get(0, 0, t) != Some(0.0) {
                return Err(format!("entry (0, 0, {t}) is not 0"));
            }
        }
        if table.get(1, 0, 0) != Some(1.0) || table.get(0, 0, 0) != Some(0.0) {
            return Err("T = 0 convention violated".into());
        }
    }
    Ok(format!("max |diff| = {worst:e}"))
}

pub fn check_monte_carlo(trials: u64) -> CheckResult {
    let e = ErasureProbs::new(0.1, 0.2, 0.2, 0.5).expect("valid eps");
    let cfg = DeadlineConfig::equal_deadlines(1.0, 1.0, 6).map_err(|e| e.to_string())?;
    let exact = exact_outage(&cfg, &e).map_err(|e| e.to_string())?.value;
    let mc = monte_carlo_outage(PolicyId::GreedyFull, &cfg, &e, trials, 20_240_601)
        .map_err(|e| e.to_string())?;
    let se = mc.stderr.unwrap_or(0.0);
    let z = (mc.value - exact).abs() / se.max(f64::MIN_POSITIVE);
    if (mc.value - exact).abs() > 4.0 * se {
        return Err(format!("MC {} vs exact {exact} ({z:.2} stderr)", mc.value));
    }
    Ok(format!("{z:.2} stderr"))
}

pub fn check_policy_ordering(max_t: u32, trials: u64) -> CheckResult {
    let e = ErasureProbs::new(0.1, 0.2, 0.2, 0.5).expect("valid eps");
    let ts: Vec<u32> = (2..=max_t).collect();
    let rows = policy_compare(&ts, 1.0, 1.0, &e, trials, 99).map_err(|e| e.to_string())?;
    for r in &rows {
        if !r.ordered {
            return Err(format!(
                "T = {}: full {} current {} past {}",
                r.t, r.full_exact, r.current_mc, r.past_mc
            ));
        }
    }
    Ok(format!("T in 2..={max_t}"))
}

pub fn check_rate_solver() -> CheckResult {
    let e = ErasureProbs::new(0.1, 0.2, 0.2, 0.5).expect("valid eps");
    let scan: Vec<(f64, f64)> = grid(4.0, 0.01)
        .into_iter()
        .map(|l| {
            let cfg = DeadlineConfig::equal_deadlines(l, l, 4).expect("valid config");
            (l, exact_outage(&cfg, &e).expect("in guard").value)
        })
        .collect();
    for p in [1e-4, 0.01, 0.02, 0.1, 0.3, 0.6, 0.9] {
        let sol = rate_solver(&e, 4, 4, p, 1.0).map_err(|e| e.to_string())?;
        if sol.pout > p {
            return Err(format!("p = {p}: returned rate has P_out {}", sol.pout));
        }
        if let Some(next) = sol.next_pout {
            if next <= p {
                return Err(format!("p = {p}: next breakpoint also meets target"));
            }
        }
        let best = scan
            .iter()
            .filter(|(_, v)| *v <= p)
            .map(|(l, _)| *l)
            .fold(0.0, f64::max);
        if (best - sol.lambda2).abs() > 0.01 + 1e-9 {
            return Err(format!("p = {p}: solver {} vs scan {best}", sol.lambda2));
        }
    }
    Ok("agrees with dense scan".into())
}

pub fn ordering_consistent(a: f64, a_se: f64, b: f64, b_se: f64) -> bool {
    ordered_within(a, a_se, b, b_se, 3.0)
}

/// The validation suite; `quick` runs reduced domains.
pub fn suite(quick: bool) -> Vec<Check> {
    if quick {
        vec![
            Check::new("pattern-normalization", || check_pattern_normalization(4)),
            Check::new("block-config-weights", || check_block_weights(12)),
            Check::new("cutset-equivalence", || {
                check_cutset_equivalence(&[2, 3, 4], is_feasible)
            }),
            Check::new("greedy-optimality", || check_greedy_optimality(&[2, 3, 4])),
            Check::new("exact-vs-bruteforce", || check_exact_vs_brute(2)),
            Check::new("capacity-wall", check_capacity_wall),
            Check::new("monotone-steps", || check_monotone_steps(3)),
            Check::new("cost-table", || check_cost_table(5, 2)),
            Check::new("monte-carlo", || check_monte_carlo(20_000)),
            Check::new("policy-ordering", || check_policy_ordering(5, 20_000)),
            Check::new("rate-solver", check_rate_solver),
        ]
    } else {
        vec![
            Check::new("pattern-normalization", || check_pattern_normalization(5)),
            Check::new("block-config-weights", || check_block_weights(20)),
            Check::new("cutset-equivalence", || {
                check_cutset_equivalence(&[2, 3, 4, 6], is_feasible)
            }),
            Check::new("greedy-optimality", || {
                check_greedy_optimality(&[2, 3, 4, 6])
            }),
            Check::new("exact-vs-bruteforce", || check_exact_vs_brute(4)),
            Check::new("capacity-wall", check_capacity_wall),
            Check::new("monotone-steps", || check_monotone_steps(8)),
            Check::new("cost-table", || check_cost_table(8, 3)),
            Check::new("monte-carlo", || check_monte_carlo(100_000)),
            Check::new("policy-ordering", || check_policy_ordering(10, 100_000)),
            Check::new("rate-solver", check_rate_solver),
        ]
    }
}
