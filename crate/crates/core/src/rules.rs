//! Valuation profiles, ranking allocation rules and the implementability test.
//!
//! Agents are indexed from zero in code. Ranks are one-based where they refer
//! to positions in a probability vector (`pi[0]` is the probability of the
//! top rank).

use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{binomial, parity_sign, parse_rational_list, Rational};

/// Agents sharing one valuation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TieGroup {
    pub value: Rational,
    pub members: Vec<usize>,
}

/// Reported valuations together with their rank structure.
///
/// Groups are ordered by strictly decreasing value, so zero-valued agents (if
/// any) form the last group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProfileFile", into = "ProfileFile")]
pub struct ValuationProfile {
    values: Vec<Rational>,
    groups: Vec<TieGroup>,
    group_of: Vec<usize>,
    /// `rank_end[j]` is the number of agents in groups `0..=j`.
    rank_end: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileFile {
    pub values: Vec<Rational>,
}

impl TryFrom<ProfileFile> for ValuationProfile {
    type Error = Error;
    fn try_from(file: ProfileFile) -> Result<Self> {
        ValuationProfile::new(file.values)
    }
}

impl From<ValuationProfile> for ProfileFile {
    fn from(profile: ValuationProfile) -> Self {
        ProfileFile { values: profile.values }
    }
}

impl ValuationProfile {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidProfile(format!(
                "need at least two agents, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| v.is_negative()) {
            return Err(Error::InvalidProfile(format!("negative valuation {bad}")));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by_key(|&i| (Reverse(&values[i]), i));

        let mut groups: Vec<TieGroup> = Vec::new();
        for agent in order {
            match groups.last_mut() {
                Some(group) if group.value == values[agent] => group.members.push(agent),
                _ => groups.push(TieGroup { value: values[agent].clone(), members: vec![agent] }),
            }
        }
        let mut group_of = vec![0; values.len()];
        let mut rank_end = Vec::with_capacity(groups.len());
        let mut seen = 0;
        for (j, group) in groups.iter().enumerate() {
            for &agent in &group.members {
                group_of[agent] = j;
            }
            seen += group.members.len();
            rank_end.push(seen);
        }
        Ok(ValuationProfile { values, groups, group_of, rank_end })
    }

    /// Convenience constructor from a comma-separated list such as `"8,4,2,1"`.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_rational_list(text)?)
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Rational::from(v)).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, agent: usize) -> &Rational {
        &self.values[agent]
    }

    pub fn groups(&self) -> &[TieGroup] {
        &self.groups
    }

    /// Index of the tie group containing `agent`.
    pub fn group_of(&self, agent: usize) -> usize {
        self.group_of[agent]
    }

    /// Number of agents in groups `0..=group`; equals `n` past the last group.
    pub fn rank_end(&self, group: usize) -> usize {
        self.rank_end.get(group).copied().unwrap_or(self.n())
    }

    /// Value of group `group`, zero for groups past the last one.
    pub fn group_value(&self, group: usize) -> Rational {
        self.groups.get(group).map(|g| g.value.clone()).unwrap_or_else(Rational::zero)
    }

    /// Value at one-based rank `k` of the sorted profile.
    pub fn value_at_rank(&self, k: usize) -> Rational {
        let group = self.rank_end.partition_point(|&end| end < k);
        self.group_value(group)
    }

    pub fn zero_agents(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.values[i].is_zero()).collect()
    }

    /// Bitmask of zero-valued agents. Only meaningful for `n <= 32`.
    pub fn zero_mask(&self) -> u32 {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_zero())
            .fold(0, |mask, (i, _)| mask | (1 << i))
    }

    /// Any two agents with equal values both have value zero.
    pub fn is_zero_generic(&self) -> bool {
        self.groups.iter().all(|g| g.members.len() == 1 || g.value.is_zero())
    }

    /// All values positive and pairwise distinct.
    pub fn is_distinct_positive(&self) -> bool {
        self.groups.len() == self.n() && self.values.iter().all(Rational::is_positive)
    }

    /// Agents ordered by rank (highest value first, ties by index).
    pub fn agents_by_rank(&self) -> Vec<usize> {
        self.groups.iter().flat_map(|g| g.members.iter().copied()).collect()
    }

    /// The profile `(0_T, v_{-T})` for the agent set encoded in `mask`.
    pub fn with_zeroed(&self, mask: u32) -> ValuationProfile {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| if mask & (1 << i) != 0 { Rational::zero() } else { v.clone() })
            .collect();
        ValuationProfile::new(values).expect("zeroing keeps a profile valid")
    }

    /// The profile `(x, v_{-i})`.
    pub fn with_value(&self, agent: usize, value: Rational) -> Result<ValuationProfile> {
        let mut values = self.values.clone();
        values[agent] = value;
        ValuationProfile::new(values)
    }

    pub fn max_value(&self) -> Rational {
        self.group_value(0)
    }
}

/// The tie groups of `v`, highest value first.
pub fn rank_structure(v: &ValuationProfile) -> &[TieGroup] {
    v.groups()
}

/// A symmetric allocation rule that can be evaluated at any profile.
///
/// The default [`AllocationRule::allocation_integral`] integrates the agent's
/// allocation over its own value assuming the allocation is constant between
/// consecutive opponent values (true of every rule that depends on values only
/// through their order).
pub trait AllocationRule: Sync {
    fn agents(&self) -> usize;

    fn allocate(&self, v: &ValuationProfile) -> Result<Vec<Rational>>;

    /// `integral_0^{v_i} f_i(x, v_{-i}) dx`.
    fn allocation_integral(&self, v: &ValuationProfile, agent: usize) -> Result<Rational> {
        step_integral(self, v, agent)
    }

    fn as_ranking(&self) -> Option<&RankingRule> {
        None
    }
}

fn step_integral<F: AllocationRule + ?Sized>(
    rule: &F,
    v: &ValuationProfile,
    agent: usize,
) -> Result<Rational> {
    let own = v.value(agent).clone();
    let mut points: Vec<Rational> = v
        .values()
        .iter()
        .enumerate()
        .filter(|&(j, x)| j != agent && x.is_positive() && *x < own)
        .map(|(_, x)| x.clone())
        .collect();
    points.push(Rational::zero());
    points.push(own);
    points.sort();
    points.dedup();
    let two = Rational::from(2);
    let mut total = Rational::zero();
    for w in points.windows(2) {
        let mid = (&w[0] + &w[1]) / &two;
        let probe = v.with_value(agent, mid)?;
        let share = rule.allocate(&probe)?.swap_remove(agent);
        total += share * (&w[1] - &w[0]);
    }
    Ok(total)
}

pub(crate) fn check_dimension(rule_n: usize, v: &ValuationProfile) -> Result<()> {
    if rule_n != v.n() {
        return Err(Error::DimensionMismatch { rule: rule_n, profile: v.n() });
    }
    Ok(())
}

/// A ranking allocation rule: the agent(s) at rank `k` share `pi[k-1]`, with
/// tied agents splitting their combined rank probabilities equally.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RuleFile", into = "RuleFile")]
pub struct RankingRule {
    pi: Vec<Rational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RuleFile {
    pub n: usize,
    pub pi: Vec<Rational>,
}

impl TryFrom<RuleFile> for RankingRule {
    type Error = Error;
    fn try_from(file: RuleFile) -> Result<Self> {
        if file.n != file.pi.len() {
            return Err(Error::InvalidRule(format!(
                "n = {} but pi has {} entries",
                file.n,
                file.pi.len()
            )));
        }
        RankingRule::new(file.pi)
    }
}

impl From<RankingRule> for RuleFile {
    fn from(rule: RankingRule) -> Self {
        RuleFile { n: rule.pi.len(), pi: rule.pi }
    }
}

impl RankingRule {
    /// Validates `0 <= pi_k <= 1`, `pi` nonincreasing and `sum pi <= 1`.
    pub fn new(pi: Vec<Rational>) -> Result<Self> {
        if pi.len() < 2 {
            return Err(Error::InvalidRule(format!("need at least two ranks, got {}", pi.len())));
        }
        let one = Rational::one();
        if let Some(bad) = pi.iter().find(|p| p.is_negative() || **p > one) {
            return Err(Error::InvalidRule(format!("probability {bad} outside [0, 1]")));
        }
        if !is_monotone_ranking(&pi) {
            return Err(Error::InvalidRule("probabilities must be nonincreasing in rank".into()));
        }
        let total: Rational = pi.iter().sum();
        if total > one {
            return Err(Error::InvalidRule(format!("probabilities sum to {total} > 1")));
        }
        Ok(RankingRule { pi })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_rational_list(text)?)
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[Rational] {
        &self.pi
    }

    /// Probability of one-based rank `k`.
    pub fn pi_at(&self, k: usize) -> &Rational {
        &self.pi[k - 1]
    }

    pub fn total(&self) -> Rational {
        self.pi.iter().sum()
    }

    /// Recognises the two-step shape `(pi1, pi2 x (ell-1), 0, ...)` with
    /// `pi1 > pi2 > 0` and unit total.
    pub fn as_two_step(&self) -> Option<TwoStepRule> {
        let pi1 = &self.pi[0];
        let pi2 = &self.pi[1];
        if !pi2.is_positive() || pi1 <= pi2 {
            return None;
        }
        let ell = 1 + self.pi[1..].iter().take_while(|p| *p == pi2).count();
        if self.pi[ell..].iter().any(|p| !p.is_zero()) {
            return None;
        }
        TwoStepRule::new(pi1.clone(), ell, self.n()).ok().filter(|t| t.pi2() == *pi2)
    }
}

impl AllocationRule for RankingRule {
    fn agents(&self) -> usize {
        self.n()
    }

    fn allocate(&self, v: &ValuationProfile) -> Result<Vec<Rational>> {
        check_dimension(self.n(), v)?;
        let mut shares = vec![Rational::zero(); v.n()];
        let mut start = 0;
        for group in v.groups() {
            let end = start + group.members.len();
            let pooled: Rational = self.pi[start..end].iter().sum();
            let each = pooled / Rational::from(group.members.len());
            for &agent in &group.members {
                shares[agent] = each.clone();
            }
            start = end;
        }
        Ok(shares)
    }

    /// `sum_{h >= j} pi_{L_h} (v_(h) - v_(h+1))` for the agent's group `j`.
    fn allocation_integral(&self, v: &ValuationProfile, agent: usize) -> Result<Rational> {
        check_dimension(self.n(), v)?;
        let start = v.group_of(agent);
        let mut total = Rational::zero();
        for h in start..v.groups().len() {
            let drop = v.group_value(h) - v.group_value(h + 1);
            if drop.is_zero() {
                continue;
            }
            total += self.pi_at(v.rank_end(h)) * drop;
        }
        Ok(total)
    }

    fn as_ranking(&self) -> Option<&RankingRule> {
        Some(self)
    }
}

/// `(pi1, ell)` two-step rule; `pi2 = (1 - pi1) / (ell - 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoStepRule {
    pi1: Rational,
    ell: usize,
    n: usize,
}

impl TwoStepRule {
    pub fn new(pi1: Rational, ell: usize, n: usize) -> Result<Self> {
        if n < 3 || ell < 2 || ell > n - 1 {
            return Err(Error::InvalidRule(format!(
                "two-step rule needs 2 <= ell <= n - 1, got ell = {ell}, n = {n}"
            )));
        }
        let rule = TwoStepRule { pi1, ell, n };
        let pi2 = rule.pi2();
        if rule.pi1 >= Rational::one() || rule.pi1 <= pi2 {
            return Err(Error::InvalidRule(format!(
                "two-step rule needs pi2 < pi1 < 1, got pi1 = {}, pi2 = {pi2}",
                rule.pi1
            )));
        }
        Ok(rule)
    }

    /// The unique implementable two-step rule for an even `ell`:
    /// `pi1 = (C(n-2, ell-1) + 1) / (C(n-2, ell-1) + ell)`.
    pub fn implementable(ell: usize, n: usize) -> Result<Self> {
        if !ell.is_multiple_of(2) {
            return Err(Error::InvalidRule(format!("implementable two-step rules need even ell, got {ell}")));
        }
        if n < 3 || ell < 2 || ell > n - 1 {
            return Err(Error::InvalidRule(format!("need 2 <= ell <= n - 1, got ell = {ell}, n = {n}")));
        }
        let c = Rational::from(binomial(n as u64 - 2, ell as u64 - 1));
        let pi1 = (&c + Rational::one()) / (&c + Rational::from(ell));
        Self::new(pi1, ell, n)
    }

    pub fn pi1(&self) -> &Rational {
        &self.pi1
    }

    pub fn pi2(&self) -> Rational {
        (Rational::one() - &self.pi1) / Rational::from(self.ell - 1)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether `ell` is even and `pi1` matches the implementable value.
    pub fn is_implementable(&self) -> bool {
        Self::implementable(self.ell, self.n).is_ok_and(|t| t.pi1 == self.pi1)
    }

    pub fn to_ranking(&self) -> RankingRule {
        let pi2 = self.pi2();
        let pi = (0..self.n)
            .map(|k| match k {
                0 => self.pi1.clone(),
                k if k < self.ell => pi2.clone(),
                _ => Rational::zero(),
            })
            .collect();
        RankingRule::new(pi).expect("two-step invariants imply a valid ranking rule")
    }
}

/// Green-Laffont rule `(1 - 1/n, 1/n, 0, ..., 0)`.
pub fn gl_rule(n: usize) -> Result<RankingRule> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let inv = Rational::new(1, n as i64);
    let mut pi = vec![Rational::zero(); n];
    pi[0] = Rational::one() - &inv;
    pi[1] = inv;
    RankingRule::new(pi)
}

pub fn equal_share_rule(n: usize) -> Result<RankingRule> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    RankingRule::new(vec![Rational::new(1, n as i64); n])
}

/// The efficient rule `(1, 0, ..., 0)`; never implementable.
pub fn efficient_rule(n: usize) -> Result<RankingRule> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let mut pi = vec![Rational::zero(); n];
    pi[0] = Rational::one();
    RankingRule::new(pi)
}

pub fn two_step_rule(pi1: Rational, ell: usize, n: usize) -> Result<RankingRule> {
    Ok(TwoStepRule::new(pi1, ell, n)?.to_ranking())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Implementability {
    pub implementable: bool,
    /// `sum_k (-1)^k C(n-1, k-1) pi_k`.
    pub residual: Rational,
}

/// `sum_{k=1}^{n} (-1)^k C(n-1, k-1) pi_k` for a raw probability vector.
pub fn implementability_residual(pi: &[Rational]) -> Rational {
    let n = pi.len() as u64;
    pi.iter()
        .enumerate()
        .map(|(idx, p)| {
            let k = idx + 1;
            Rational::from(parity_sign(k) * binomial(n - 1, k as u64 - 1)) * p
        })
        .sum()
}

/// Single-equation test for satisfactory implementability of a ranking rule.
pub fn is_implementable(rule: &RankingRule) -> Implementability {
    let residual = implementability_residual(rule.pi());
    Implementability { implementable: residual.is_zero(), residual }
}

/// Every prefix sum of `a` is at least that of `b`, strictly for at least one.
pub fn fosd_dominates(a: &RankingRule, b: &RankingRule) -> Result<bool> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { rule: a.n(), profile: b.n() });
    }
    let mut prefix_a = Rational::zero();
    let mut prefix_b = Rational::zero();
    let mut strict = false;
    for (x, y) in a.pi().iter().zip(b.pi()) {
        prefix_a += x;
        prefix_b += y;
        if prefix_a < prefix_b {
            return Ok(false);
        }
        strict |= prefix_a > prefix_b;
    }
    Ok(strict)
}

/// True iff the vector is nonincreasing.
pub fn is_monotone_ranking(pi: &[Rational]) -> bool {
    pi.windows(2).all(|w| w[0] >= w[1])
}
