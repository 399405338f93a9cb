//! Batch experiments: the convergence table, seeded profile generation and
//! exact lottery draws.
//!
//! All randomness comes from `ChaCha8Rng` seeded with a caller-supplied
//! `u64`, so every output is reproducible from its seed.

use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{binomial, Rational};
use crate::optimal::{sample_welfare_ratio, select_ell, MuSample};
use crate::payments::Outcome;
use crate::rules::{RankingRule, TwoStepRule, ValuationProfile};

fn as_string<S: Serializer>(value: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(value)
}

/// One row of the convergence table. Serializes with the CSV header
/// `n,ell,binomial,pi1_exact,pi1_percent`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub ell: usize,
    #[serde(rename = "binomial", serialize_with = "as_string")]
    pub top_binomial: BigInt,
    #[serde(rename = "pi1_exact")]
    pub pi1: Rational,
    pub pi1_percent: String,
}

pub fn convergence_row(n: usize) -> Result<ConvergenceRow> {
    let ell = select_ell(n)?.ell;
    let pi1 = TwoStepRule::implementable(ell, n)?.pi1().clone();
    Ok(ConvergenceRow {
        n,
        ell,
        top_binomial: binomial(n as u64 - 2, ell as u64 - 1),
        pi1_percent: pi1.to_percent(1),
        pi1,
    })
}

pub fn convergence_table(n_from: usize, n_to: usize) -> Result<Vec<ConvergenceRow>> {
    if n_from < 3 || n_from > n_to {
        return Err(Error::InvalidArgument(format!("need 3 <= from <= to, got {n_from}..{n_to}")));
    }
    (n_from..=n_to).map(convergence_row).collect()
}

/// Smallest `n` with `1 - 1/n >= target`.
pub fn gl_convergence_threshold(target: &Rational) -> Result<u64> {
    if !target.is_positive() || *target >= Rational::one() {
        return Err(Error::InvalidArgument(format!("target must lie in (0, 1), got {target}")));
    }
    let bound = (Rational::one() - target).recip();
    let floor = bound.floor();
    let ceil = if Rational::from(floor.clone()) == bound { floor } else { floor + 1 };
    ceil.to_u64().ok_or_else(|| Error::InvalidArgument(format!("threshold for {target} does not fit in u64")))
}

fn profile_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn draw_profiles(n: usize, count: usize, seed: u64, bound: u64, min_numer: u64) -> Result<Vec<ValuationProfile>> {
    if count == 0 || bound == 0 {
        return Err(Error::InvalidArgument("count and denominator bound must be positive".into()));
    }
    let mut rng = profile_rng(seed);
    (0..count)
        .map(|_| {
            let values = (0..n)
                .map(|_| {
                    let den = rng.gen_range(1..=bound);
                    Rational::new(rng.gen_range(min_numer..=den), den)
                })
                .collect();
            ValuationProfile::new(values)
        })
        .collect()
}

/// `count` profiles with values in `[0, 1]`: each coordinate draws a
/// denominator uniformly from `1..=bound`, then a numerator from `0..=den`.
pub fn random_profiles(n: usize, count: usize, seed: u64, bound: u64) -> Result<Vec<ValuationProfile>> {
    draw_profiles(n, count, seed, bound, 0)
}

/// Like [`random_profiles`] with numerators from `1..=den`, so no value is
/// zero.
pub fn random_zero_free_profiles(n: usize, count: usize, seed: u64, bound: u64) -> Result<Vec<ValuationProfile>> {
    draw_profiles(n, count, seed, bound, 1)
}

/// Welfare ratios of `rule` over seeded random profiles plus the structured
/// `(1, delta, ..., delta)` family.
pub fn welfare_study(rule: &RankingRule, count: usize, seed: u64, bound: u64) -> Result<MuSample> {
    sample_welfare_ratio(rule, &random_profiles(rule.n(), count, seed, bound)?)
}

/// Exact sampler for an allocation vector. Mass not allocated to any agent
/// is the "nobody wins" outcome.
#[derive(Clone, Debug)]
pub struct LotterySampler {
    scale: BigInt,
    cumulative: Vec<BigInt>,
}

impl LotterySampler {
    pub fn new(allocation: &[Rational]) -> Result<Self> {
        if allocation.iter().any(Rational::is_negative) {
            return Err(Error::InvalidArgument("allocation probabilities must be nonnegative".into()));
        }
        let total: Rational = allocation.iter().sum();
        if total > Rational::one() {
            return Err(Error::InvalidArgument(format!("allocation sums to {total}, more than 1")));
        }
        let scale = allocation.iter().fold(BigInt::one(), |acc, p| acc.lcm(&p.denom()));
        let mut running = BigInt::zero();
        let cumulative = allocation
            .iter()
            .map(|p| {
                running += p.numer() * (&scale / p.denom());
                running.clone()
            })
            .collect();
        Ok(LotterySampler { scale, cumulative })
    }

    /// Winning agent, or `None` when the draw lands in unallocated mass.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let draw = BigInt::from(rng.gen_biguint_below(self.scale.magnitude()));
        debug_assert!(!draw.is_negative());
        self.cumulative.iter().position(|edge| draw < *edge)
    }
}

/// One seeded draw from an outcome's allocation.
pub fn sample_lottery(outcome: &Outcome, seed: u64) -> Result<Option<usize>> {
    Ok(LotterySampler::new(&outcome.allocation)?.sample(&mut profile_rng(seed)))
}

/// Win counts over `draws` seeded draws; the last slot counts "nobody".
pub fn lottery_counts(allocation: &[Rational], draws: u64, seed: u64) -> Result<Vec<u64>> {
    let sampler = LotterySampler::new(allocation)?;
    let mut rng = profile_rng(seed);
    let mut counts = vec![0u64; allocation.len() + 1];
    for _ in 0..draws {
        let slot = sampler.sample(&mut rng).unwrap_or(allocation.len());
        counts[slot] += 1;
    }
    Ok(counts)
}
