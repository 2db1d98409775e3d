//! Per-pattern cut-set rate region.
//!
//! For a realized pattern split into `N` blocks, a rate pair is supportable
//! iff `λ1 ≤ min_k a_k` and `λ2 ≤ v_0 − Σ_k (λ1 − n_{k,10})^+`, where
//! `v_0 = Σ_k b_k`. The same region written as half-planes is
//! `k·λ1 + λ2 ≤ v_k` for `k = 0..=N`, with `v_k` the minimum over `k`-subsets
//! `S` of `Σ_{S} c + Σ_{not S} b`.

use serde::Serialize;

use crate::channel::BlockStats;

/// Absolute slack when comparing real rates against integer slot counts.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Slot budgets of one block: user 1 alone (`a`), user 2 alone (`b`) and
/// the super-receiver that sees what either user sees (`c`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockCapacities {
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

pub fn block_capacities(stats: &BlockStats) -> BlockCapacities {
    BlockCapacities {
        a: stats.n10 + stats.n11,
        b: stats.n01 + stats.n11,
        c: stats.n10 + stats.n01 + stats.n11,
    }
}

/// `a_min` and the half-plane offsets `v_0..=v_N` of the region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionCoefficients {
    pub a_min: u32,
    pub v: Vec<u32>,
}

/// Computes `v_k` as `v_0` plus the `k` smallest `n_{j,10}`, which equals
/// the subset minimum because `c_j − b_j = n_{j,10}`.
///
/// An empty block list has no capacity: `a_min = 0` and `v = [0]`.
pub fn region_coefficients(blocks: &[BlockStats]) -> RegionCoefficients {
    let a_min = blocks
        .iter()
        .map(|s| block_capacities(s).a)
        .min()
        .unwrap_or(0);
    let v0: u32 = blocks.iter().map(|s| block_capacities(s).b).sum();
    let mut only1: Vec<u32> = blocks.iter().map(|s| s.n10).collect();
    only1.sort_unstable();
    let mut v = Vec::with_capacity(blocks.len() + 1);
    v.push(v0);
    let mut acc = v0;
    for n in only1 {
        acc += n;
        v.push(acc);
    }
    RegionCoefficients { a_min, v }
}

/// Largest `λ2` supportable alongside `λ1`, ignoring the `λ1 ≤ a_min` cap.
fn user2_headroom(blocks: &[BlockStats], v0: f64, lambda1: f64) -> f64 {
    v0 - blocks
        .iter()
        .map(|s| (lambda1 - s.n10 as f64).max(0.0))
        .sum::<f64>()
}

/// Whether `(λ1, λ2)` lies in the cut-set region of the pattern.
pub fn is_feasible(blocks: &[BlockStats], lambda1: f64, lambda2: f64) -> bool {
    let a_min = blocks.iter().map(|s| s.n10 + s.n11).min().unwrap_or(0);
    if lambda1 > a_min as f64 + FEASIBILITY_TOL {
        return false;
    }
    let v0: u32 = blocks.iter().map(|s| s.n01 + s.n11).sum();
    lambda2 <= user2_headroom(blocks, v0 as f64, lambda1) + FEASIBILITY_TOL
}

/// Same decision as [`is_feasible`], evaluated through the half-plane form
/// `λ2 ≤ min_k (v_k − k·λ1)`.
pub fn equivalent_feasible(blocks: &[BlockStats], lambda1: f64, lambda2: f64) -> bool {
    let coeffs = region_coefficients(blocks);
    coeffs_feasible(&coeffs, lambda1, lambda2)
}

pub(crate) fn coeffs_feasible(coeffs: &RegionCoefficients, lambda1: f64, lambda2: f64) -> bool {
    lambda1 <= coeffs.a_min as f64 + FEASIBILITY_TOL
        && coeffs
            .v
            .iter()
            .enumerate()
            .all(|(k, &vk)| k as f64 * lambda1 + lambda2 <= vk as f64 + FEASIBILITY_TOL)
}

/// Vertices of the region's outer boundary, from `(0, v_0)` to the
/// `λ2 = 0` axis, ordered by increasing `λ1`. The origin is implied and only
/// listed when the region collapses onto it.
pub fn region_boundary(blocks: &[BlockStats]) -> Vec<(f64, f64)> {
    let coeffs = region_coefficients(blocks);
    let a_min = coeffs.a_min as f64;
    let v0 = coeffs.v[0] as f64;
    let headroom = |l1: f64| user2_headroom(blocks, v0, l1);

    let mut breaks: Vec<u32> = blocks
        .iter()
        .map(|s| s.n10)
        .filter(|&n| n > 0 && n < coeffs.a_min)
        .collect();
    breaks.sort_unstable();
    breaks.dedup();

    let mut vertices = vec![(0.0, v0)];
    vertices.extend(breaks.into_iter().map(|n| (n as f64, headroom(n as f64))));
    // The λ1 cap always leaves nonnegative headroom: (a_min − n10)^+ ≤ n11 ≤ b.
    let end = headroom(a_min);
    vertices.push((a_min, end));
    if end > 0.0 {
        vertices.push((a_min, 0.0));
    }
    vertices.dedup();
    vertices
}
