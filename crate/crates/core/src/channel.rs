//! Memoryless two-user erasure broadcast channel.
//!
//! A slot's reception state is a 2-bit [`Symbol`]: the high bit says whether
//! user 1 received the packet, the low bit whether user 2 did. So `10` is a
//! slot only user 1 can use and `11` a slot both can use.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest frame length accepted by [`enumerate_patterns`].
pub const MAX_ENUM_SLOTS: usize = 12;

/// Largest block length for which multinomial weights fit in a `u64`.
pub const MAX_BLOCK_LEN: u32 = 32;

const NORMALIZE_TOL: f64 = 1e-9;

/// Per-slot joint reception state of both users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u8);

impl Symbol {
    pub const S00: Symbol = Symbol(0b00);
    pub const S01: Symbol = Symbol(0b01);
    pub const S10: Symbol = Symbol(0b10);
    pub const S11: Symbol = Symbol(0b11);

    /// All symbols in lexicographic order.
    pub const ALL: [Symbol; 4] = [Symbol::S00, Symbol::S01, Symbol::S10, Symbol::S11];

    pub fn from_bits(bits: u8) -> Option<Symbol> {
        (bits < 4).then_some(Symbol(bits))
    }

    pub fn from_reception(user1: bool, user2: bool) -> Symbol {
        Symbol(((user1 as u8) << 1) | user2 as u8)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn user1_received(self) -> bool {
        self.0 & 0b10 != 0
    }

    pub fn user2_received(self) -> bool {
        self.0 & 0b01 != 0
    }

    /// Whether user `k` (1 or 2) received the slot.
    pub fn received(self, user: usize) -> bool {
        match user {
            1 => self.user1_received(),
            2 => self.user2_received(),
            _ => false,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}",
            self.user1_received() as u8,
            self.user2_received() as u8
        )
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "00" => Ok(Symbol::S00),
            "01" => Ok(Symbol::S01),
            "10" => Ok(Symbol::S10),
            "11" => Ok(Symbol::S11),
            other => Err(Error::MalformedSymbol(other.to_string())),
        }
    }
}

/// Joint per-slot erasure probabilities, indexed by [`Symbol`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErasureProbs {
    pub eps00: f64,
    pub eps01: f64,
    pub eps10: f64,
    pub eps11: f64,
}

impl ErasureProbs {
    /// Builds a distribution, renormalizing round-off of up to 1e-9 in the
    /// total and rejecting anything further off.
    pub fn new(eps00: f64, eps01: f64, eps10: f64, eps11: f64) -> Result<Self> {
        let raw = [eps00, eps01, eps10, eps11];
        for (sym, p) in Symbol::ALL.iter().zip(raw) {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbabilities(format!(
                    "eps{sym} = {p} is not in [0, 1]"
                )));
            }
        }
        let total: f64 = raw.iter().sum();
        if (total - 1.0).abs() > NORMALIZE_TOL {
            return Err(Error::InvalidProbabilities(format!(
                "components sum to {total}, expected 1"
            )));
        }
        let [a, b, c, d] = raw.map(|p| p / total);
        Ok(ErasureProbs {
            eps00: a,
            eps01: b,
            eps10: c,
            eps11: d,
        })
    }

    pub fn from_array(eps: [f64; 4]) -> Result<Self> {
        Self::new(eps[0], eps[1], eps[2], eps[3])
    }

    /// Independent erasures with probability `p` at each user.
    pub fn symmetric_independent(p: f64) -> Result<Self> {
        let q = 1.0 - p;
        Self::new(p * p, p * q, q * p, q * q)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.eps00, self.eps01, self.eps10, self.eps11]
    }

    pub fn prob(&self, sym: Symbol) -> f64 {
        self.as_array()[sym.index()]
    }

    /// Probability that user 1 receives a slot (`eps10 + eps11`).
    pub fn user1_success(&self) -> f64 {
        self.eps10 + self.eps11
    }

    /// Probability that user 2 receives a slot (`eps01 + eps11`).
    pub fn user2_success(&self) -> f64 {
        self.eps01 + self.eps11
    }
}

impl FromStr for ErasureProbs {
    type Err = Error;

    /// Parses `eps00,eps01,eps10,eps11`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| {
                p.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidProbabilities(format!("cannot parse {:?} as a number", p.trim()))
                })
            })
            .collect::<Result<_>>()?;
        let arr: [f64; 4] = parts.try_into().map_err(|v: Vec<f64>| {
            Error::InvalidProbabilities(format!(
                "expected 4 comma-separated values, got {}",
                v.len()
            ))
        })?;
        Self::from_array(arr)
    }
}

/// The reception states of one frame, slot by slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ErasurePattern {
    slots: Vec<Symbol>,
}

impl ErasurePattern {
    pub fn new(slots: Vec<Symbol>) -> Self {
        ErasurePattern { slots }
    }

    /// The pattern at position `index` of the lexicographic enumeration of
    /// all `4^len` patterns; slot 0 is the most significant base-4 digit.
    pub fn from_index(mut index: u64, len: usize) -> Self {
        let mut slots = vec![Symbol::S00; len];
        for slot in slots.iter_mut().rev() {
            *slot = Symbol((index & 0b11) as u8);
            index >>= 2;
        }
        ErasurePattern { slots }
    }

    pub fn uniform(sym: Symbol, len: usize) -> Self {
        ErasurePattern {
            slots: vec![sym; len],
        }
    }

    pub fn slots(&self) -> &[Symbol] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Number of slots carrying each symbol over the whole frame.
    pub fn symbol_counts(&self) -> [u32; 4] {
        let mut counts = [0u32; 4];
        for s in &self.slots {
            counts[s.index()] += 1;
        }
        counts
    }
}

impl fmt::Display for ErasurePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for ErasurePattern {
    type Err = Error;

    /// Parses a comma-separated symbol list such as `10,11,00`.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Ok(ErasurePattern::new(Vec::new()));
        }
        s.split(',')
            .map(Symbol::from_str)
            .collect::<Result<Vec<_>>>()
            .map(ErasurePattern::new)
    }
}

/// Arrival rates and hard deadlines for the two users, with `T2 = N * T1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeadlineConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub t1: u32,
    pub t2: u32,
}

impl DeadlineConfig {
    pub fn new(lambda1: f64, lambda2: f64, t1: u32, t2: u32) -> Result<Self> {
        if t1 == 0 || t2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "deadlines must be positive (t1 = {t1}, t2 = {t2})"
            )));
        }
        if !t2.is_multiple_of(t1) {
            return Err(Error::InvalidConfig(format!(
                "t2 = {t2} is not a multiple of t1 = {t1}"
            )));
        }
        for (name, l) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !l.is_finite() || l < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {l} must be a nonnegative number"
                )));
            }
        }
        Ok(DeadlineConfig {
            lambda1,
            lambda2,
            t1,
            t2,
        })
    }

    /// Equal deadlines `T1 = T2 = t`.
    pub fn equal_deadlines(lambda1: f64, lambda2: f64, t: u32) -> Result<Self> {
        Self::new(lambda1, lambda2, t, t)
    }

    /// Number of user-1 sub-frames (blocks) per frame.
    pub fn blocks(&self) -> u32 {
        self.t2 / self.t1
    }

    /// Frame length in slots.
    pub fn frame_len(&self) -> usize {
        self.t2 as usize
    }
}

/// Symbol counts within one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BlockStats {
    pub n00: u32,
    pub n01: u32,
    pub n10: u32,
    pub n11: u32,
}

impl BlockStats {
    pub fn new(n00: u32, n01: u32, n10: u32, n11: u32) -> Self {
        BlockStats { n00, n01, n10, n11 }
    }

    pub fn from_counts(c: [u32; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn counts(&self) -> [u32; 4] {
        [self.n00, self.n01, self.n10, self.n11]
    }

    pub fn len(&self) -> u32 {
        self.n00 + self.n01 + self.n10 + self.n11
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Π_v eps_v^{n_v}`: probability of any single pattern with these counts.
    pub fn pattern_probability(&self, eps: &ErasureProbs) -> f64 {
        self.counts()
            .iter()
            .zip(eps.as_array())
            .map(|(&n, p)| p.powi(n as i32))
            .product()
    }
}

/// Probability of observing exactly `pattern` on an iid channel.
pub fn pattern_probability(pattern: &ErasurePattern, eps: &ErasureProbs) -> f64 {
    BlockStats::from_counts(pattern.symbol_counts()).pattern_probability(eps)
}

/// Splits a frame into blocks of `t1` slots and counts symbols per block.
pub fn block_stats(pattern: &ErasurePattern, t1: u32) -> Result<Vec<BlockStats>> {
    let t1 = t1 as usize;
    if t1 == 0 || !pattern.len().is_multiple_of(t1) {
        return Err(Error::LengthMismatch {
            len: pattern.len(),
            what: format!("block length {t1}"),
        });
    }
    Ok(pattern
        .slots()
        .chunks(t1)
        .map(|block| {
            let mut c = [0u32; 4];
            for s in block {
                c[s.index()] += 1;
            }
            BlockStats::from_counts(c)
        })
        .collect())
}

/// Draws a frame of `len` iid slots from `eps`.
pub fn sample_pattern<R: Rng + ?Sized>(
    eps: &ErasureProbs,
    len: usize,
    rng: &mut R,
) -> ErasurePattern {
    let probs = eps.as_array();
    let mut cdf = [0.0; 4];
    let mut acc = 0.0;
    for (c, p) in cdf.iter_mut().zip(probs) {
        acc += p;
        *c = acc;
    }
    // Round-off can leave cdf[3] a hair below 1; fall back to the last
    // symbol with positive mass.
    let fallback = Symbol::ALL
        .iter()
        .rev()
        .copied()
        .find(|s| probs[s.index()] > 0.0)
        .unwrap_or(Symbol::S11);
    let slots = (0..len)
        .map(|_| {
            let u: f64 = rng.gen();
            Symbol::ALL
                .iter()
                .copied()
                .find(|s| u < cdf[s.index()])
                .unwrap_or(fallback)
        })
        .collect();
    ErasurePattern::new(slots)
}

/// Iterator over a contiguous index range of the lexicographic pattern
/// enumeration.
#[derive(Debug, Clone)]
pub struct PatternIter {
    len: usize,
    range: Range<u64>,
}

impl Iterator for PatternIter {
    type Item = ErasurePattern;

    fn next(&mut self) -> Option<ErasurePattern> {
        self.range
            .next()
            .map(|i| ErasurePattern::from_index(i, self.len))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.range.size_hint()
    }
}

impl ExactSizeIterator for PatternIter {}

/// Number of patterns of length `len`.
pub fn pattern_count(len: usize) -> u64 {
    1u64 << (2 * len)
}

/// All `4^len` patterns in lexicographic order (`00 < 01 < 10 < 11`).
pub fn enumerate_patterns(len: usize) -> Result<PatternIter> {
    enumerate_pattern_range(len, 0..u64::MAX)
}

/// The patterns whose enumeration index falls in `range`, clipped to
/// `0..4^len`. Disjoint ranges partition the pattern space across workers.
pub fn enumerate_pattern_range(len: usize, range: Range<u64>) -> Result<PatternIter> {
    if len > MAX_ENUM_SLOTS {
        return Err(Error::Guard(format!(
            "pattern enumeration over {len} slots exceeds the limit of {MAX_ENUM_SLOTS}"
        )));
    }
    let total = pattern_count(len);
    let range = range.start.min(total)..range.end.min(total);
    Ok(PatternIter { len, range })
}

fn binomial(n: u32, k: u32) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Multinomial coefficient `len! / (n00! n01! n10! n11!)`.
pub fn multinomial(stats: &BlockStats) -> u64 {
    let n = stats.len();
    let w = binomial(n, stats.n00)
        * binomial(n - stats.n00, stats.n01)
        * binomial(n - stats.n00 - stats.n01, stats.n10);
    u64::try_from(w).expect("multinomial weight overflows u64")
}

/// Iterator over all compositions of a block length into four symbol counts.
#[derive(Debug, Clone)]
pub struct BlockConfigIter {
    len: u32,
    next: Option<[u32; 3]>,
}

impl Iterator for BlockConfigIter {
    type Item = (BlockStats, u64);

    fn next(&mut self) -> Option<Self::Item> {
        let [n00, n01, n10] = self.next?;
        let stats = BlockStats::new(n00, n01, n10, self.len - n00 - n01 - n10);
        self.next = if n00 + n01 + n10 < self.len {
            Some([n00, n01, n10 + 1])
        } else if n00 + n01 < self.len {
            Some([n00, n01 + 1, 0])
        } else if n00 < self.len {
            Some([n00 + 1, 0, 0])
        } else {
            None
        };
        Some((stats, multinomial(&stats)))
    }
}

/// Every symbol-count vector of a block of `t1` slots together with the
/// number of patterns sharing it. Yields `C(t1 + 3, 3)` items.
///
/// # Panics
///
/// If `t1 > MAX_BLOCK_LEN`, since weights would overflow `u64`.
pub fn enumerate_block_configs(t1: u32) -> BlockConfigIter {
    assert!(
        t1 <= MAX_BLOCK_LEN,
        "block length {t1} exceeds {MAX_BLOCK_LEN}"
    );
    BlockConfigIter {
        len: t1,
        next: Some([0, 0, 0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn eps() -> ErasureProbs {
        ErasureProbs::new(0.1, 0.2, 0.2, 0.5).unwrap()
    }

    fn pat(s: &str) -> ErasurePattern {
        s.parse().unwrap()
    }

    #[test]
    fn symbol_bits_follow_user_order() {
        assert!(Symbol::S10.user1_received());
        assert!(!Symbol::S10.user2_received());
        assert_eq!(Symbol::from_reception(false, true), Symbol::S01);
        assert_eq!(Symbol::S10.to_string(), "10");
        assert!("12".parse::<Symbol>().is_err());
    }

    #[test]
    fn eps_normalizes_small_roundoff_and_rejects_large() {
        let e = ErasureProbs::new(0.1, 0.2, 0.2, 0.5 + 5e-10).unwrap();
        assert!((e.as_array().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(ErasureProbs::new(0.1, 0.2, 0.2, 0.6).is_err());
        assert!(ErasureProbs::new(-0.1, 0.3, 0.3, 0.5).is_err());
        assert!(ErasureProbs::new(f64::NAN, 0.3, 0.2, 0.5).is_err());
        assert!("0.1,0.2,0.2".parse::<ErasureProbs>().is_err());
        assert_eq!("0.1,0.2,0.2,0.5".parse::<ErasureProbs>().unwrap(), eps());
    }

    #[test]
    fn config_rejects_bad_deadlines() {
        assert!(DeadlineConfig::new(1.0, 1.0, 0, 3).is_err());
        assert!(DeadlineConfig::new(1.0, 1.0, 2, 3).is_err());
        assert!(DeadlineConfig::new(-1.0, 1.0, 3, 6).is_err());
        let c = DeadlineConfig::new(1.0, 2.0, 3, 6).unwrap();
        assert_eq!(c.blocks(), 2);
        assert_eq!(c.frame_len(), 6);
    }

    #[test]
    fn pattern_probability_examples() {
        assert!((pattern_probability(&pat("11,11"), &eps()) - 0.25).abs() < 1e-15);
        assert!((pattern_probability(&pat("11,10,01"), &eps()) - 0.02).abs() < 1e-15);
        let total: f64 = enumerate_patterns(3)
            .unwrap()
            .map(|p| pattern_probability(&p, &eps()))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_stats_examples() {
        assert_eq!(
            block_stats(&pat("10,11,00,01"), 2).unwrap(),
            vec![BlockStats::new(0, 0, 1, 1), BlockStats::new(1, 1, 0, 0)]
        );
        assert_eq!(
            block_stats(&pat("11,11"), 2).unwrap(),
            vec![BlockStats::new(0, 0, 0, 2)]
        );
        assert_eq!(
            block_stats(&pat("00,00,00"), 3).unwrap(),
            vec![BlockStats::new(3, 0, 0, 0)]
        );
        assert!(matches!(
            block_stats(&pat("00,00,00"), 2),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn sample_degenerate_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let all11 = ErasureProbs::new(0.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(sample_pattern(&all11, 4, &mut rng), pat("11,11,11,11"));
        let all00 = ErasureProbs::new(1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(sample_pattern(&all00, 2, &mut rng), pat("00,00"));
    }

    #[test]
    fn sample_frequencies_match_eps() {
        let e = eps();
        let draws = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let counts = sample_pattern(&e, draws, &mut rng).symbol_counts();
        for sym in Symbol::ALL {
            let p = e.prob(sym);
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            let freq = counts[sym.index()] as f64 / draws as f64;
            assert!((freq - p).abs() <= 4.0 * se, "{sym}: {freq} vs {p}");
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_pattern(&eps(), 64, &mut ChaCha8Rng::seed_from_u64(5));
        let b = sample_pattern(&eps(), 64, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    #[test]
    fn enumeration_order_and_guard() {
        let one: Vec<_> = enumerate_patterns(1)
            .unwrap()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(one, ["00", "01", "10", "11"]);
        let two: Vec<_> = enumerate_patterns(2).unwrap().collect();
        assert_eq!(two.len(), 16);
        assert_eq!(two[0], pat("00,00"));
        assert_eq!(two[15], pat("11,11"));
        assert_eq!(two[1], pat("00,01"));
        assert_eq!(enumerate_patterns(6).unwrap().count(), 4096);
        assert!(matches!(enumerate_patterns(13), Err(Error::Guard(_))));
        let part: Vec<_> = enumerate_pattern_range(2, 4..8).unwrap().collect();
        assert_eq!(part[0], pat("01,00"));
        assert_eq!(part.len(), 4);
    }

    #[test]
    fn block_config_examples() {
        let one: Vec<_> = enumerate_block_configs(1).collect();
        assert_eq!(one.len(), 4);
        assert!(one.iter().all(|&(_, w)| w == 1));
        let two: Vec<_> = enumerate_block_configs(2).collect();
        let w = two
            .iter()
            .find(|(s, _)| *s == BlockStats::new(0, 0, 1, 1))
            .unwrap()
            .1;
        assert_eq!(w, 2);
        let three: Vec<_> = enumerate_block_configs(3).collect();
        assert_eq!(three.len(), 20);
        assert_eq!(three.iter().map(|&(_, w)| w).sum::<u64>(), 64);
    }

    #[test]
    fn block_configs_are_distinct_compositions() {
        for t1 in 0..=8u32 {
            let configs: Vec<_> = enumerate_block_configs(t1).collect();
            let expected = ((t1 + 1) * (t1 + 2) * (t1 + 3) / 6) as usize;
            assert_eq!(configs.len(), expected);
            let distinct: std::collections::HashSet<_> = configs.iter().map(|c| c.0).collect();
            assert_eq!(distinct.len(), expected);
            assert!(configs.iter().all(|(s, _)| s.len() == t1));
        }
    }

    #[test]
    fn largest_block_weight_fits() {
        let max = enumerate_block_configs(MAX_BLOCK_LEN)
            .map(|(_, w)| w)
            .max()
            .unwrap();
        assert!(max > 0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_eps() -> impl Strategy<Value = ErasureProbs> {
            prop::array::uniform4(0.0f64..1.0)
                .prop_filter("nonzero mass", |w| w.iter().sum::<f64>() > 1e-3)
                .prop_map(|w| {
                    let s: f64 = w.iter().sum();
                    ErasureProbs::from_array(w.map(|x| x / s)).unwrap()
                })
        }

        proptest! {
            #[test]
            fn pattern_probabilities_sum_to_one(eps in any_eps(), t in 1usize..=5) {
                let total: f64 = enumerate_patterns(t).unwrap().map(|p| pattern_probability(&p, &eps)).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }

            #[test]
            fn block_config_mass_is_one(eps in any_eps(), t1 in 1u32..=10) {
                let total: f64 = enumerate_block_configs(t1)
                    .map(|(s, w)| w as f64 * s.pattern_probability(&eps))
                    .sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
                let weights: u64 = enumerate_block_configs(t1).map(|(_, w)| w).sum();
                prop_assert_eq!(weights, 4u64.pow(t1));
            }

            #[test]
            fn blocks_cover_frame(idx in 0u64..4096, t1 in prop::sample::select(vec![1u32, 2, 3, 6])) {
                let p = ErasurePattern::from_index(idx, 6);
                let stats = block_stats(&p, t1).unwrap();
                prop_assert_eq!(stats.len(), 6 / t1 as usize);
                prop_assert_eq!(stats.iter().map(|s| s.len()).sum::<u32>(), 6);
            }

            #[test]
            fn pattern_text_roundtrip(idx in 0u64..(1 << 16)) {
                let p = ErasurePattern::from_index(idx, 8);
                prop_assert_eq!(p.to_string().parse::<ErasurePattern>().unwrap(), p);
            }
        }
    }
}
