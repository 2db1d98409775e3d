//! Scheduling policies for one frame.
//!
//! [`GreedyFullCsi`] sees the whole frame in advance and is optimal: it meets
//! both deadlines exactly when the rates lie in the cut-set region.
//! [`CurrentCsi`] sees only the current slot and [`PastCsi`] learns the slot
//! state from end-of-slot feedback; both move whole packets and consult a
//! [`CostToGoTable`] of residual outage probabilities.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::channel::{DeadlineConfig, ErasurePattern, ErasureProbs, Symbol};
use crate::error::{Error, Result};
use crate::outage::{try_build_cost_table, CostToGoTable};

/// Slack used when checking delivered amounts against the arrival rates.
pub const DELIVERY_TOL: f64 = 1e-9;

/// Cost-to-go values closer than this are treated as equal, so entries that
/// agree analytically but differ in the last bits still tie.
pub const COST_TIE_TOL: f64 = 1e-12;

fn strictly_less(a: f64, b: f64) -> bool {
    a < b - COST_TIE_TOL
}

/// What the scheduler knows about the channel when it decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    /// The whole frame's pattern is known up front.
    Full,
    /// Only the current slot's state is known when the slot starts.
    Current,
    /// States are learned only from feedback at the end of each slot.
    Past,
}

/// Per-slot allocation: `alloc[t][k]` is the fraction of slot `t` carrying
/// user `k + 1`'s data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub alloc: Vec<[f64; 2]>,
}

impl Schedule {
    pub fn idle(len: usize) -> Self {
        Schedule {
            alloc: vec![[0.0; 2]; len],
        }
    }

    pub fn len(&self) -> usize {
        self.alloc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alloc.is_empty()
    }

    /// Checks slot capacity and that nothing is allocated to an erased slot.
    pub fn validate(&self, pattern: &ErasurePattern) -> Result<()> {
        if self.len() != pattern.len() {
            return Err(Error::LengthMismatch {
                len: pattern.len(),
                what: format!("schedule of {} slots", self.len()),
            });
        }
        for (t, (row, sym)) in self.alloc.iter().zip(pattern.slots()).enumerate() {
            if row
                .iter()
                .any(|&x| !(0.0..=1.0 + DELIVERY_TOL).contains(&x))
            {
                return Err(Error::OracleMismatch(format!(
                    "slot {}: allocation {row:?} out of range",
                    t + 1
                )));
            }
            if row[0] + row[1] > 1.0 + DELIVERY_TOL {
                return Err(Error::OracleMismatch(format!(
                    "slot {}: allocation {row:?} exceeds capacity",
                    t + 1
                )));
            }
            for user in 1..=2 {
                if row[user - 1] > 0.0 && !sym.received(user) {
                    return Err(Error::OracleMismatch(format!(
                        "slot {}: user {user} allocated on erased slot {sym}",
                        t + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Serve1,
    Serve2,
    Split,
    Idle,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Serve1 => "serve1",
            Action::Serve2 => "serve2",
            Action::Split => "split",
            Action::Idle => "idle",
        })
    }
}

/// One line of a frame trace. `amt1`/`amt2` are the amounts actually
/// delivered; a causal policy whose transmission was erased logs its action
/// with zero amounts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotDecision {
    /// 1-based slot index.
    pub slot: usize,
    pub state: Symbol,
    pub action: Action,
    pub amt1: f64,
    pub amt2: f64,
}

impl fmt::Display for SlotDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "slot={} state={} action={} amt1={} amt2={}",
            self.slot, self.state, self.action, self.amt1, self.amt2
        )
    }
}

/// Result of running a policy over one frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameOutcome {
    /// User-1 data delivered in each of its sub-frames.
    pub delivered1: Vec<f64>,
    /// User-2 data delivered over the frame.
    pub delivered2: f64,
    pub met_deadlines: bool,
    pub schedule: Schedule,
    pub trace: Vec<SlotDecision>,
}

impl FrameOutcome {
    /// Assembles an outcome from a schedule, deriving delivered amounts from
    /// the slots each user actually received.
    fn from_schedule(
        pattern: &ErasurePattern,
        config: &DeadlineConfig,
        schedule: Schedule,
        trace: Vec<SlotDecision>,
    ) -> Self {
        let (delivered1, delivered2) = delivered_amounts(pattern, config, &schedule);
        let met_deadlines = delivered1
            .iter()
            .all(|&d| d >= config.lambda1 - DELIVERY_TOL)
            && delivered2 >= config.lambda2 - DELIVERY_TOL;
        FrameOutcome {
            delivered1,
            delivered2,
            met_deadlines,
            schedule,
            trace,
        }
    }

    /// The trace as a line-oriented log.
    pub fn trace_log(&self) -> String {
        let mut out = String::new();
        for d in &self.trace {
            out.push_str(&d.to_string());
            out.push('\n');
        }
        out
    }
}

/// Per-sub-frame user-1 deliveries and the frame total for user 2, counting
/// only allocations on slots the user received.
pub fn delivered_amounts(
    pattern: &ErasurePattern,
    config: &DeadlineConfig,
    schedule: &Schedule,
) -> (Vec<f64>, f64) {
    let t1 = config.t1 as usize;
    let delivered1 = pattern
        .slots()
        .chunks(t1)
        .zip(schedule.alloc.chunks(t1))
        .map(|(syms, rows)| {
            syms.iter()
                .zip(rows)
                .filter(|(s, _)| s.user1_received())
                .map(|(_, r)| r[0])
                .sum()
        })
        .collect();
    let delivered2 = pattern
        .slots()
        .iter()
        .zip(&schedule.alloc)
        .filter(|(s, _)| s.user2_received())
        .map(|(_, r)| r[1])
        .sum();
    (delivered1, delivered2)
}

fn action_for(row: [f64; 2]) -> Action {
    match (row[0] > 0.0, row[1] > 0.0) {
        (true, true) => Action::Split,
        (true, false) => Action::Serve1,
        (false, true) => Action::Serve2,
        (false, false) => Action::Idle,
    }
}

/// A scheduling policy over one frame.
pub trait Scheduler {
    fn name(&self) -> &'static str;

    fn csi_mode(&self) -> CsiMode;

    fn run(&self, pattern: &ErasurePattern, config: &DeadlineConfig) -> Result<FrameOutcome>;
}

fn check_length(pattern: &ErasurePattern, config: &DeadlineConfig) -> Result<()> {
    if pattern.len() != config.frame_len() {
        return Err(Error::LengthMismatch {
            len: pattern.len(),
            what: format!("frame length t2 = {}", config.t2),
        });
    }
    Ok(())
}

/// Earliest-deadline-first with full knowledge of the frame.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyFullCsi;

impl Scheduler for GreedyFullCsi {
    fn name(&self) -> &'static str {
        "greedy_full"
    }

    fn csi_mode(&self) -> CsiMode {
        CsiMode::Full
    }

    fn run(&self, pattern: &ErasurePattern, config: &DeadlineConfig) -> Result<FrameOutcome> {
        greedy_full_csi(pattern, config)
    }
}

/// Runs the greedy policy block by block: `10` slots go to user 1 and `01`
/// slots to user 2, then `11` slots serve user 1 until its block demand is
/// met and user 2 after that. User 1's deadline is never later than user
/// 2's, so it keeps priority on `11` slots even in the last block where the
/// deadlines coincide. User 2 is served eagerly but never beyond `λ2`.
pub fn greedy_full_csi(pattern: &ErasurePattern, config: &DeadlineConfig) -> Result<FrameOutcome> {
    check_length(pattern, config)?;
    let t1 = config.t1 as usize;
    let slots = pattern.slots();
    let mut schedule = Schedule::idle(slots.len());
    let mut need2 = config.lambda2;

    for start in (0..slots.len()).step_by(t1) {
        let block = start..start + t1;
        let mut need1 = config.lambda1;
        for t in block.clone().filter(|&t| slots[t] == Symbol::S10) {
            let x = need1.min(1.0);
            schedule.alloc[t][0] = x;
            need1 -= x;
        }
        for t in block.clone().filter(|&t| slots[t] == Symbol::S01) {
            let x = need2.min(1.0);
            schedule.alloc[t][1] = x;
            need2 -= x;
        }
        for t in block.filter(|&t| slots[t] == Symbol::S11) {
            let x1 = need1.min(1.0);
            let x2 = need2.min(1.0 - x1);
            schedule.alloc[t] = [x1, x2];
            need1 -= x1;
            need2 -= x2;
        }
    }

    let trace = trace_from_schedule(slots, &schedule);
    Ok(FrameOutcome::from_schedule(
        pattern, config, schedule, trace,
    ))
}

fn trace_from_schedule(slots: &[Symbol], schedule: &Schedule) -> Vec<SlotDecision> {
    slots
        .iter()
        .zip(&schedule.alloc)
        .enumerate()
        .map(|(t, (&state, &row))| SlotDecision {
            slot: t + 1,
            state,
            action: action_for(row),
            amt1: row[0],
            amt2: row[1],
        })
        .collect()
}

/// Integer residual demands of a causal policy.
/// Checks the equal-deadline, whole-packet preconditions of the causal
/// policies and returns the integer demands.
pub(crate) fn causal_demands(
    policy: &str,
    config: &DeadlineConfig,
    cost: Option<&CostToGoTable>,
) -> Result<(u32, u32)> {
    let mismatch = |reason: String| Error::PolicyMismatch {
        policy: policy.to_string(),
        reason,
    };
    if config.t1 != config.t2 {
        return Err(mismatch(format!(
            "requires equal deadlines, got t1 = {} and t2 = {}",
            config.t1, config.t2
        )));
    }
    let as_int = |name: &str, l: f64| -> Result<u32> {
        if l.fract() != 0.0 || l > u32::MAX as f64 {
            Err(mismatch(format!(
                "{name} = {l} must be a whole number of packets"
            )))
        } else {
            Ok(l as u32)
        }
    };
    let l1 = as_int("lambda1", config.lambda1)?;
    let l2 = as_int("lambda2", config.lambda2)?;
    if cost.is_some_and(|c| !c.covers(l1, l2, config.t2)) {
        return Err(Error::CostTableTooSmall {
            l1,
            l2,
            t: config.t2,
        });
    }
    Ok((l1, l2))
}

fn single_packet_row(user: usize) -> [f64; 2] {
    let mut row = [0.0; 2];
    row[user - 1] = 1.0;
    row
}

/// Knows the current slot's state and the erasure statistics of the rest.
#[derive(Debug, Clone, Copy)]
pub struct CurrentCsi<'a> {
    pub cost: &'a CostToGoTable,
}

impl Scheduler for CurrentCsi<'_> {
    fn name(&self) -> &'static str {
        "current_csi"
    }

    fn csi_mode(&self) -> CsiMode {
        CsiMode::Current
    }

    fn run(&self, pattern: &ErasurePattern, config: &DeadlineConfig) -> Result<FrameOutcome> {
        current_csi_policy(pattern, config, self.cost)
    }
}

/// Current-CSI heuristic for equal deadlines and integer rates.
///
/// User 1 is served when it has packets left, its channel is up, and either
/// user 2's channel is down or sending to user 1 leaves a strictly smaller
/// residual outage than sending to user 2. Otherwise user 2 is served if its
/// channel is up and it has packets left. A user with nothing left never
/// wins the comparison, so the slot goes to the other user instead of idling.
pub fn current_csi_policy(
    pattern: &ErasurePattern,
    config: &DeadlineConfig,
    cost: &CostToGoTable,
) -> Result<FrameOutcome> {
    check_length(pattern, config)?;
    let (mut rem1, mut rem2) = causal_demands("current_csi", config, Some(cost))?;
    let slots = pattern.slots();
    let mut schedule = Schedule::idle(slots.len());
    let mut trace = Vec::with_capacity(slots.len());

    for (t, &state) in slots.iter().enumerate() {
        let t_rem = (slots.len() - t) as u32;
        let after1 = cost.get_clamped(rem1 as i64 - 1, rem2 as i64, t_rem - 1);
        let after2 = cost.get_clamped(rem1 as i64, rem2 as i64 - 1, t_rem - 1);
        let up1 = state.user1_received();
        let up2 = state.user2_received();

        let target = if rem1 > 0 && up1 && (!up2 || rem2 == 0 || strictly_less(after1, after2)) {
            Some(1)
        } else if up2 && rem2 > 0 {
            Some(2)
        } else {
            None
        };
        let (action, row) = match target {
            Some(1) => {
                rem1 -= 1;
                (Action::Serve1, single_packet_row(1))
            }
            Some(_) => {
                rem2 -= 1;
                (Action::Serve2, single_packet_row(2))
            }
            None => (Action::Idle, [0.0; 2]),
        };
        schedule.alloc[t] = row;
        trace.push(SlotDecision {
            slot: t + 1,
            state,
            action,
            amt1: row[0],
            amt2: row[1],
        });
    }
    Ok(FrameOutcome::from_schedule(
        pattern, config, schedule, trace,
    ))
}

/// Decides before seeing the slot; learns the outcome from feedback.
#[derive(Debug, Clone, Copy)]
pub struct PastCsi<'a> {
    pub eps: ErasureProbs,
    pub cost: &'a CostToGoTable,
}

impl Scheduler for PastCsi<'_> {
    fn name(&self) -> &'static str {
        "past_csi"
    }

    fn csi_mode(&self) -> CsiMode {
        CsiMode::Past
    }

    fn run(&self, pattern: &ErasurePattern, config: &DeadlineConfig) -> Result<FrameOutcome> {
        past_csi_policy(pattern, config, &self.eps, self.cost)
    }
}

/// Expected residual outage after transmitting to each user with only the
/// erasure statistics known for the coming slot. Returned as `(user1, user2)`.
pub fn past_csi_costs(
    rem1: u32,
    rem2: u32,
    t_rem: u32,
    eps: &ErasureProbs,
    cost: &CostToGoTable,
) -> (f64, f64) {
    let (r1, r2) = (rem1 as i64, rem2 as i64);
    let t = t_rem - 1;
    let stay = cost.get_clamped(r1, r2, t);
    let x1 = cost.get_clamped(r1 - 1, r2, t) * eps.user1_success() + stay * (eps.eps00 + eps.eps01);
    let x2 = cost.get_clamped(r1, r2 - 1, t) * eps.user2_success() + stay * (eps.eps00 + eps.eps10);
    (x1, x2)
}

/// Past-CSI heuristic: pick the user with the smaller expected residual
/// outage (ties go to user 2), transmit, and keep the packet queued if the
/// feedback reports an erasure.
pub fn past_csi_policy(
    pattern: &ErasurePattern,
    config: &DeadlineConfig,
    eps: &ErasureProbs,
    cost: &CostToGoTable,
) -> Result<FrameOutcome> {
    check_length(pattern, config)?;
    let (mut rem1, mut rem2) = causal_demands("past_csi", config, Some(cost))?;
    let slots = pattern.slots();
    let mut schedule = Schedule::idle(slots.len());
    let mut trace = Vec::with_capacity(slots.len());

    for (t, &state) in slots.iter().enumerate() {
        let t_rem = (slots.len() - t) as u32;
        let (x1, x2) = past_csi_costs(rem1, rem2, t_rem, eps, cost);
        let target = if rem1 > 0 && (rem2 == 0 || strictly_less(x1, x2)) {
            Some(1)
        } else if rem2 > 0 {
            Some(2)
        } else {
            None
        };

        let mut row = [0.0; 2];
        let action = match target {
            Some(user) => {
                if state.received(user) {
                    row = single_packet_row(user);
                    if user == 1 {
                        rem1 -= 1;
                    } else {
                        rem2 -= 1;
                    }
                }
                if user == 1 {
                    Action::Serve1
                } else {
                    Action::Serve2
                }
            }
            None => Action::Idle,
        };
        schedule.alloc[t] = row;
        trace.push(SlotDecision {
            slot: t + 1,
            state,
            action,
            amt1: row[0],
            amt2: row[1],
        });
    }
    Ok(FrameOutcome::from_schedule(
        pattern, config, schedule, trace,
    ))
}

/// Identifier of a policy as used on the command line and across the C ABI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PolicyId {
    #[serde(rename = "greedy_full")]
    GreedyFull,
    #[serde(rename = "current_csi")]
    CurrentCsi,
    #[serde(rename = "past_csi")]
    PastCsi,
}

impl PolicyId {
    pub const ALL: [PolicyId; 3] = [
        PolicyId::GreedyFull,
        PolicyId::CurrentCsi,
        PolicyId::PastCsi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyId::GreedyFull => "greedy_full",
            PolicyId::CurrentCsi => "current_csi",
            PolicyId::PastCsi => "past_csi",
        }
    }

    pub fn csi_mode(self) -> CsiMode {
        match self {
            PolicyId::GreedyFull => CsiMode::Full,
            PolicyId::CurrentCsi => CsiMode::Current,
            PolicyId::PastCsi => CsiMode::Past,
        }
    }

    /// Whether the policy needs a cost-to-go table.
    pub fn is_causal(self) -> bool {
        self != PolicyId::GreedyFull
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy_full" => Ok(PolicyId::GreedyFull),
            "current_csi" => Ok(PolicyId::CurrentCsi),
            "past_csi" => Ok(PolicyId::PastCsi),
            other => Err(Error::UnknownPolicy(other.to_string())),
        }
    }
}

/// Runs `policy` on one frame; `eps` and `cost` are needed by the causal
/// policies only.
pub fn run_policy(
    policy: PolicyId,
    pattern: &ErasurePattern,
    config: &DeadlineConfig,
    eps: &ErasureProbs,
    cost: Option<&CostToGoTable>,
) -> Result<FrameOutcome> {
    let need_cost = || {
        cost.ok_or_else(|| Error::PolicyMismatch {
            policy: policy.to_string(),
            reason: "no cost-to-go table supplied".into(),
        })
    };
    match policy {
        PolicyId::GreedyFull => greedy_full_csi(pattern, config),
        PolicyId::CurrentCsi => current_csi_policy(pattern, config, need_cost()?),
        PolicyId::PastCsi => past_csi_policy(pattern, config, eps, need_cost()?),
    }
}

/// Like [`run_policy`], building the cost table a causal policy needs.
pub fn run_policy_standalone(
    policy: PolicyId,
    pattern: &ErasurePattern,
    config: &DeadlineConfig,
    eps: &ErasureProbs,
) -> Result<FrameOutcome> {
    let table = if policy.is_causal() {
        let (l1, l2) = causal_demands(policy.as_str(), config, None)?;
        Some(try_build_cost_table(config.t2, l1, l2, eps)?)
    } else {
        None
    };
    run_policy(policy, pattern, config, eps, table.as_ref())
}
