//! Global deadline outage probability.
//!
//! The exact value sums, over every joint choice of per-block symbol counts,
//! the product of the blocks' multinomial weights times the count
//! probability, keeping the choices that satisfy the cut-set condition. A
//! pattern-level brute force over all `4^T` frames is kept alongside as an
//! independent check, and a Monte Carlo estimator covers the causal policies
//! that have no closed form.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    block_stats, enumerate_block_configs, enumerate_pattern_range, pattern_count,
    pattern_probability, sample_pattern, DeadlineConfig, ErasureProbs, MAX_BLOCK_LEN,
};
use crate::cutset::{is_feasible, FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::scheduler::{causal_demands, greedy_full_csi, run_policy, PolicyId};

/// Largest block length accepted by [`exact_outage`].
pub const EXACT_MAX_T1: u32 = 12;
/// Largest number of blocks accepted by [`exact_outage`].
pub const EXACT_MAX_BLOCKS: u32 = 3;
/// Largest frame accepted by [`brute_force_outage`].
pub const BRUTE_FORCE_MAX_T: usize = 10;

/// Name of the pseudo-random generator behind every Monte Carlo run.
pub const GENERATOR: &str = "ChaCha8Rng";

/// Frames simulated per independent generator stream. Stream `i` of a run
/// is `ChaCha8Rng::seed_from_u64(seed)` with `set_stream(i)`, so results do
/// not depend on the number of worker threads.
pub const MC_CHUNK: u64 = 8192;

const PATTERN_CHUNK: u64 = 4096;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Feasible probability mass plus whether any infeasible outcome has
/// positive probability.
#[derive(Debug, Clone, Copy, Default)]
struct MassTally {
    feasible: CompensatedSum,
    any_outage: bool,
}

impl MassTally {
    fn record(&mut self, mass: f64, feasible: bool) {
        if feasible {
            self.feasible.add(mass);
        } else if mass > 0.0 {
            self.any_outage = true;
        }
    }

    fn merge(&mut self, other: MassTally) {
        self.feasible.merge(other.feasible);
        self.any_outage |= other.any_outage;
    }

    /// `1 − feasible mass`, pinned to exactly 0 or 1 when one side of the
    /// sample space is empty.
    fn outage(&self) -> f64 {
        let ok = self.feasible.value();
        if !self.any_outage {
            0.0
        } else if ok == 0.0 {
            1.0
        } else {
            (1.0 - ok).clamp(0.0, 1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Bruteforce,
    Montecarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Bruteforce => "bruteforce",
            Method::Montecarlo => "montecarlo",
        }
    }
}

/// An outage probability and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutageResult {
    pub value: f64,
    pub method: Method,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub stderr: Option<f64>,
    pub config: DeadlineConfig,
    pub eps: ErasureProbs,
    pub generator: Option<String>,
}

impl OutageResult {
    fn analytic(value: f64, method: Method, config: &DeadlineConfig, eps: &ErasureProbs) -> Self {
        OutageResult {
            value,
            method,
            trials: None,
            seed: None,
            stderr: None,
            config: *config,
            eps: *eps,
            generator: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outage result serializes")
    }
}

/// One block's symbol-count class reduced to what the cut-set test needs.
#[derive(Debug, Clone, Copy)]
struct BlockTerm {
    mass: f64,
    /// User-2 headroom this block leaves once user 1 is served:
    /// `b − (λ1 − n10)^+`.
    headroom: f64,
}

fn check_exact_guard(config: &DeadlineConfig) -> Result<()> {
    if config.t1 > EXACT_MAX_T1 || config.blocks() > EXACT_MAX_BLOCKS {
        return Err(Error::Guard(format!(
            "exact outage supports t1 <= {EXACT_MAX_T1} and t2/t1 <= {EXACT_MAX_BLOCKS} (got t1 = {}, t2 = {})",
            config.t1, config.t2
        )));
    }
    Ok(())
}

/// Exact global deadline outage probability for `T2 = N·T1`.
pub fn exact_outage(config: &DeadlineConfig, eps: &ErasureProbs) -> Result<OutageResult> {
    check_exact_guard(config)?;
    let (l1, l2) = (config.lambda1, config.lambda2);

    // Classes that starve user 1 make the whole frame infeasible whatever
    // the other blocks hold.
    let mut starved_mass = false;
    let terms: Vec<BlockTerm> = enumerate_block_configs(config.t1)
        .filter_map(|(stats, weight)| {
            let mass = weight as f64 * stats.pattern_probability(eps);
            if l1 > (stats.n10 + stats.n11) as f64 + FEASIBILITY_TOL {
                starved_mass |= mass > 0.0;
                return None;
            }
            let headroom = (stats.n01 + stats.n11) as f64 - (l1 - stats.n10 as f64).max(0.0);
            Some(BlockTerm { mass, headroom })
        })
        .collect();

    let blocks = config.blocks() as usize;
    let partials: Vec<MassTally> = terms
        .par_iter()
        .map(|first| {
            let mut tally = MassTally::default();
            accumulate(
                &terms,
                blocks - 1,
                first.mass,
                first.headroom,
                l2,
                &mut tally,
            );
            tally
        })
        .collect();

    let mut total = MassTally {
        any_outage: starved_mass,
        ..MassTally::default()
    };
    for p in partials {
        total.merge(p);
    }
    Ok(OutageResult::analytic(
        total.outage(),
        Method::Exact,
        config,
        eps,
    ))
}

fn accumulate(
    terms: &[BlockTerm],
    remaining: usize,
    mass: f64,
    headroom: f64,
    l2: f64,
    tally: &mut MassTally,
) {
    if remaining == 0 {
        tally.record(mass, l2 <= headroom + FEASIBILITY_TOL);
        return;
    }
    for t in terms {
        accumulate(
            terms,
            remaining - 1,
            mass * t.mass,
            headroom + t.headroom,
            l2,
            tally,
        );
    }
}

/// Which per-pattern test the brute force applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BruteForceMode {
    /// Cut-set feasibility only.
    CutSet,
    /// Cut-set feasibility, and the greedy policy must agree on every pattern.
    Strict,
}

/// Outage by enumerating every frame pattern.
pub fn brute_force_outage(
    config: &DeadlineConfig,
    eps: &ErasureProbs,
    mode: BruteForceMode,
) -> Result<OutageResult> {
    let len = config.frame_len();
    if len > BRUTE_FORCE_MAX_T {
        return Err(Error::Guard(format!(
            "brute-force outage supports frames up to {BRUTE_FORCE_MAX_T} slots (got {len})"
        )));
    }
    let total = pattern_count(len);
    let chunks: Vec<u64> = (0..total.div_ceil(PATTERN_CHUNK)).collect();
    let partials = chunks
        .par_iter()
        .map(|&c| -> Result<MassTally> {
            let mut tally = MassTally::default();
            for p in enumerate_pattern_range(len, c * PATTERN_CHUNK..(c + 1) * PATTERN_CHUNK)? {
                let stats = block_stats(&p, config.t1)?;
                let ok = is_feasible(&stats, config.lambda1, config.lambda2);
                if mode == BruteForceMode::Strict {
                    let greedy = greedy_full_csi(&p, config)?;
                    if greedy.met_deadlines != ok {
                        return Err(Error::OracleMismatch(format!(
                            "pattern {p}: greedy met_deadlines = {} but cut-set feasible = {ok}",
                            greedy.met_deadlines
                        )));
                    }
                }
                tally.record(pattern_probability(&p, eps), ok);
            }
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sum = MassTally::default();
    for p in partials {
        sum.merge(p);
    }
    Ok(OutageResult::analytic(
        sum.outage(),
        Method::Bruteforce,
        config,
        eps,
    ))
}

/// Residual outage probabilities for equal deadlines, indexed by remaining
/// user-1 packets, user-2 packets and slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CostToGoTable {
    tmax: u32,
    l1max: u32,
    l2max: u32,
    values: Vec<f64>,
}

impl CostToGoTable {
    fn index(&self, l1: u32, l2: u32, t: u32) -> usize {
        ((l1 as usize * (self.l2max as usize + 1)) + l2 as usize) * (self.tmax as usize + 1)
            + t as usize
    }

    pub fn bounds(&self) -> (u32, u32, u32) {
        (self.tmax, self.l1max, self.l2max)
    }

    pub fn covers(&self, l1: u32, l2: u32, t: u32) -> bool {
        l1 <= self.l1max && l2 <= self.l2max && t <= self.tmax
    }

    pub fn get(&self, l1: u32, l2: u32, t: u32) -> Option<f64> {
        self.covers(l1, l2, t)
            .then(|| self.values[self.index(l1, l2, t)])
    }

    /// Lookup with negative packet counts clamped to zero.
    ///
    /// # Panics
    ///
    /// If the clamped arguments fall outside the table.
    pub fn get_clamped(&self, l1: i64, l2: i64, t: u32) -> f64 {
        let (l1, l2) = (l1.max(0) as u32, l2.max(0) as u32);
        self.get(l1, l2, t)
            .unwrap_or_else(|| panic!("cost table lookup ({l1}, {l2}, {t}) out of bounds"))
    }
}

/// Builds the residual-outage table for `t ≤ tmax`, `l1 ≤ l1max`,
/// `l2 ≤ l2max`. With `t = 0` any positive demand is an outage.
pub fn build_cost_table(tmax: u32, l1max: u32, l2max: u32, eps: &ErasureProbs) -> CostToGoTable {
    try_build_cost_table(tmax, l1max, l2max, eps).expect("cost table horizon within MAX_BLOCK_LEN")
}

/// Fallible form of [`build_cost_table`]; rejects horizons beyond
/// [`MAX_BLOCK_LEN`] slots.
pub fn try_build_cost_table(
    tmax: u32,
    l1max: u32,
    l2max: u32,
    eps: &ErasureProbs,
) -> Result<CostToGoTable> {
    if tmax > MAX_BLOCK_LEN {
        return Err(Error::Guard(format!(
            "cost table horizon {tmax} exceeds {MAX_BLOCK_LEN} slots"
        )));
    }
    let mut table = CostToGoTable {
        tmax,
        l1max,
        l2max,
        values: vec![0.0; (l1max as usize + 1) * (l2max as usize + 1) * (tmax as usize + 1)],
    };
    for t in 0..=tmax {
        let configs: Vec<_> = enumerate_block_configs(t)
            .map(|(s, w)| (s, w as f64 * s.pattern_probability(eps)))
            .collect();
        for l1 in 0..=l1max {
            for l2 in 0..=l2max {
                let value = if t == 0 {
                    if l1 + l2 > 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    let mut tally = MassTally::default();
                    for (s, mass) in &configs {
                        tally.record(
                            *mass,
                            is_feasible(std::slice::from_ref(s), l1 as f64, l2 as f64),
                        );
                    }
                    tally.outage()
                };
                let i = table.index(l1, l2, t);
                table.values[i] = value;
            }
        }
    }
    Ok(table)
}

/// Fraction of simulated frames in which `policy` misses a deadline.
pub fn monte_carlo_outage(
    policy: PolicyId,
    config: &DeadlineConfig,
    eps: &ErasureProbs,
    trials: u64,
    seed: u64,
) -> Result<OutageResult> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let cost = if policy.is_causal() {
        let (l1, l2) = causal_demands(policy.as_str(), config, None)?;
        Some(try_build_cost_table(config.t2, l1, l2, eps)?)
    } else {
        None
    };
    let len = config.frame_len();
    let chunks: Vec<u64> = (0..trials.div_ceil(MC_CHUNK)).collect();
    let failures: u64 = chunks
        .par_iter()
        .map(|&c| -> Result<u64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut missed = 0;
            for _ in 0..n {
                let p = sample_pattern(eps, len, &mut rng);
                if !run_policy(policy, &p, config, eps, cost.as_ref())?.met_deadlines {
                    missed += 1;
                }
            }
            Ok(missed)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let value = failures as f64 / trials as f64;
    Ok(OutageResult {
        value,
        method: Method::Montecarlo,
        trials: Some(trials),
        seed: Some(seed),
        stderr: Some((value * (1.0 - value) / trials as f64).sqrt()),
        config: *config,
        eps: *eps,
        generator: Some(GENERATOR.to_string()),
    })
}

/// Largest rate pair on the ray `λ1 = m·λ2` whose outage stays within the
/// target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSolution {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Outage at the returned rates.
    pub pout: f64,
    /// Set when no positive rate on the ray meets the target.
    pub degenerate: bool,
    /// The next breakpoint along the ray and its outage, if the ray
    /// continues inside the trivial rate cap.
    pub next_lambda2: Option<f64>,
    pub next_pout: Option<f64>,
    pub target: f64,
    pub m: f64,
}

/// Values of `λ2` in `(0, cap]` where the outage along the ray can jump:
/// wherever `m·λ2` or `(k·m + 1)·λ2` for `k = 0..=N` crosses an integer.
pub fn ray_breakpoints(t1: u32, t2: u32, m: f64) -> Vec<f64> {
    let blocks = t2 / t1;
    let cap = ray_cap(t1, t2, m);
    let mut points = Vec::new();
    let mut push_multiples = |scale: f64| {
        let top = (cap * scale + 1e-9).floor() as u64;
        points.extend((1..=top).map(|i| i as f64 / scale));
    };
    for k in 0..=blocks {
        push_multiples(k as f64 * m + 1.0);
    }
    if m > 0.0 {
        push_multiples(m);
    }
    points.push(cap);
    points.retain(|&x| x > 0.0 && x <= cap + 1e-12);
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    points
}

/// Beyond this `λ2` the ray leaves every pattern's region: `λ2 ≤ T2` and
/// `m·λ2 ≤ T1`.
fn ray_cap(t1: u32, t2: u32, m: f64) -> f64 {
    if m > 0.0 {
        (t2 as f64).min(t1 as f64 / m)
    } else {
        t2 as f64
    }
}

/// Solves for the largest rates on `λ1 = m·λ2` with outage at most `p`.
///
/// Outage along the ray is a nondecreasing step function, constant on each
/// interval between breakpoints and closed on the right, so the answer is
/// the last breakpoint whose outage is within `p`.
pub fn rate_solver(eps: &ErasureProbs, t1: u32, t2: u32, p: f64, m: f64) -> Result<RateSolution> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!(
            "target outage p = {p} must lie in [0, 1)"
        )));
    }
    if !m.is_finite() || m < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "ray slope m = {m} must be a nonnegative number"
        )));
    }
    let pout_at = |l2: f64| -> Result<f64> {
        let cfg = DeadlineConfig::new(m * l2, l2, t1, t2)?;
        Ok(exact_outage(&cfg, eps)?.value)
    };
    pout_at(0.0)?;
    let points = ray_breakpoints(t1, t2, m);

    // Binary search for the first breakpoint whose outage exceeds p.
    let (mut lo, mut hi) = (0usize, points.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pout_at(points[mid])? <= p {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let next_lambda2 = points.get(lo).copied();
    let next_pout = next_lambda2.map(pout_at).transpose()?;
    let (lambda2, degenerate) = match lo.checked_sub(1) {
        Some(i) => (points[i], false),
        None => (0.0, true),
    };
    Ok(RateSolution {
        lambda1: m * lambda2,
        lambda2,
        pout: pout_at(lambda2)?,
        degenerate,
        next_lambda2,
        next_pout,
        target: p,
        m,
    })
}
