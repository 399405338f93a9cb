//! The unique budget-balanced, truthful, symmetric payment rule for an
//! implementable allocation rule.
//!
//! Three routes compute the same vector:
//!
//! * [`payments_subset_formula`]: signed sums of elementary revenues over
//!   the subsets of agents forced to zero, the general closed form.
//! * [`payments_two_step`]: the factorial/rising-product closed form for
//!   two-step rules at profiles with distinct positive values.
//! * [`payments_recursive`]: peels one agent at a time down to the all-zero
//!   profile using revenue equivalence, splitting the budget surplus evenly
//!   among zero-valued agents.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{binomial, factorial, parity_sign, psi, Rational};
use crate::revenue::{ranking_revenue, total_revenue};
use crate::rules::{check_dimension, is_implementable, AllocationRule, RankingRule, TwoStepRule, ValuationProfile};

/// Largest agent count the subset-enumeration routes accept.
pub const MAX_SUBSET_AGENTS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub allocation: Vec<Rational>,
    pub payments: Vec<Rational>,
    pub utilities: Vec<Rational>,
}

impl Outcome {
    pub fn budget(&self) -> Rational {
        self.payments.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PaymentMethod {
    Subset,
    TwoStep,
    Recursive,
}

fn guard_subset_size(n: usize) -> Result<()> {
    if n > MAX_SUBSET_AGENTS {
        return Err(Error::TooManyAgents { agents: n, limit: MAX_SUBSET_AGENTS });
    }
    Ok(())
}

fn guard_implementable<F: AllocationRule + ?Sized>(rule: &F) -> Result<()> {
    if let Some(ranking) = rule.as_ranking() {
        let check = is_implementable(ranking);
        if !check.implementable {
            return Err(Error::NotImplementable { residual: check.residual });
        }
    }
    Ok(())
}

/// Subset-sum payment formula.
///
/// For ranking rules the implementability equation is checked first. Other
/// rules are priced as-is; if they are not residually balanced the result
/// will not balance the budget, which is what the verifier reports.
pub fn payments_subset_formula<F: AllocationRule + ?Sized>(
    rule: &F,
    v: &ValuationProfile,
) -> Result<Vec<Rational>> {
    check_dimension(rule.agents(), v)?;
    guard_implementable(rule)?;
    subset_formula_unchecked(rule, v)
}

/// Elementary revenues `R(0_T, v_{-T})` for every `T` containing `base`.
struct SupersetRevenues {
    entries: Vec<(u32, Rational)>,
}

impl SupersetRevenues {
    fn build<F: AllocationRule + ?Sized>(rule: &F, v: &ValuationProfile, base: u32) -> Result<Self> {
        let full: u32 = if v.n() == 32 { u32::MAX } else { (1u32 << v.n()) - 1 };
        let free = full & !base;
        let mut entries = Vec::with_capacity(1 << free.count_ones());
        // enumerate submasks of `free`
        let ranking = rule.as_ranking();
        let mut masked = v.values().to_vec();
        let mut sub = free;
        loop {
            let t = base | sub;
            let revenue = if t == full {
                Rational::zero()
            } else if let Some(ranking) = ranking {
                for (i, slot) in masked.iter_mut().enumerate() {
                    *slot = if t & (1 << i) != 0 { Rational::zero() } else { v.value(i).clone() };
                }
                ranking_revenue(ranking.pi(), &masked)
            } else {
                total_revenue(rule, &v.with_zeroed(t))?
            };
            entries.push((t, revenue));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
        Ok(SupersetRevenues { entries })
    }
}

pub(crate) fn subset_formula_unchecked<F: AllocationRule + ?Sized>(
    rule: &F,
    v: &ValuationProfile,
) -> Result<Vec<Rational>> {
    subset_formula_for(rule, v, &(0..v.n()).collect::<Vec<_>>())
}

/// Subset-formula payment of a single agent, without the implementability
/// screen.
pub(crate) fn subset_payment_of<F: AllocationRule + ?Sized>(
    rule: &F,
    v: &ValuationProfile,
    agent: usize,
) -> Result<Rational> {
    Ok(subset_formula_for(rule, v, &[agent])?.swap_remove(agent))
}

/// Payments for the listed agents; other entries are left at zero.
fn subset_formula_for<F: AllocationRule + ?Sized>(
    rule: &F,
    v: &ValuationProfile,
    agents: &[usize],
) -> Result<Vec<Rational>> {
    let n = v.n();
    guard_subset_size(n)?;
    let zeros = v.zero_mask();
    let m = zeros.count_ones() as usize;
    let revenues = SupersetRevenues::build(rule, v, zeros)?;

    // weight (-1)^{|T|-m-shift} / C(|T|, m+shift), indexed by |T|
    let weights = |shift: usize| -> Vec<Rational> {
        (0..=n)
            .map(|size| {
                if size < m + shift {
                    return Rational::zero();
                }
                let sign = parity_sign(size - m - shift);
                Rational::new(sign, binomial(size as u64, (m + shift) as u64))
            })
            .collect()
    };

    let mut payments = vec![Rational::zero(); n];
    if agents.iter().any(|&i| zeros & (1 << i) != 0) {
        let w = weights(0);
        let sum: Rational = revenues
            .entries
            .iter()
            .map(|(t, rev)| &w[t.count_ones() as usize] * rev)
            .sum();
        let zero_payment = -(sum / Rational::from(m));
        for &i in agents.iter().filter(|&&i| zeros & (1 << i) != 0) {
            payments[i] = zero_payment.clone();
        }
    }
    let positive: Vec<usize> = agents.iter().copied().filter(|&i| zeros & (1 << i) == 0).collect();
    if positive.is_empty() {
        return Ok(payments);
    }
    let allocation = rule.allocate(v)?;
    let w = weights(1);
    let scale = Rational::new(1, m as i64 + 1);
    for i in positive {
        let sum: Rational = revenues
            .entries
            .iter()
            .filter(|(t, _)| t & (1 << i) != 0)
            .map(|(t, rev)| &w[t.count_ones() as usize] * rev)
            .sum();
        let own = v.value(i) * &allocation[i] - rule.allocation_integral(v, i)?;
        payments[i] = own - &scale * sum;
    }
    Ok(payments)
}

/// Closed-form payments for an implementable two-step rule at a profile with
/// distinct positive values. Agents are ranked internally and the result is
/// indexed by original agent.
pub fn payments_two_step(two_step: &TwoStepRule, v: &ValuationProfile) -> Result<Vec<Rational>> {
    let n = two_step.n();
    check_dimension(n, v)?;
    if !two_step.is_implementable() {
        let residual = is_implementable(&two_step.to_ranking()).residual;
        return Err(Error::NotImplementable { residual });
    }
    if !v.is_distinct_positive() {
        return Err(Error::OutsideDomain(
            "two-step closed form needs distinct positive values; use the subset formula".into(),
        ));
    }
    let ell = two_step.ell();
    let order = v.agents_by_rank();
    // by_rank[k] is the value at one-based rank k
    let by_rank: Vec<&Rational> = std::iter::once(&order[0]).chain(&order).map(|&i| v.value(i)).collect();

    // (-1)^k (k-1)! psi(n-ell, n-k-1); k = ell gives (-1)^ell (ell-1)!
    let coeff = |k: usize| -> Result<Rational> {
        let rising = psi((n - ell) as u64, n as i64 - k as i64 - 1)?;
        Ok(Rational::from(parity_sign(k) * factorial(k as u64 - 1) * rising))
    };
    let coeffs: Vec<Rational> =
        std::iter::once(Ok(Rational::zero())).chain((1..=ell).map(coeff)).collect::<Result<_>>()?;
    let scale = -(two_step.pi2() / Rational::from(factorial(ell as u64 - 1)));

    let mut by_rank_payment = vec![Rational::zero(); n + 1];
    by_rank_payment[1] = &scale * (1..ell).map(|k| &coeffs[k] * by_rank[k + 1]).sum::<Rational>();
    for i in 2..=ell {
        let below: Rational = (2..i).map(|k| &coeffs[k] * by_rank[k]).sum();
        let above: Rational = (i..ell).map(|k| &coeffs[k] * by_rank[k + 1]).sum();
        by_rank_payment[i] = &scale * (below + above);
    }
    let losing = &scale * (2..=ell).map(|k| &coeffs[k] * by_rank[k]).sum::<Rational>();
    for slot in by_rank_payment.iter_mut().skip(ell + 1) {
        *slot = losing.clone();
    }

    let mut payments = vec![Rational::zero(); n];
    for (rank0, &agent) in order.iter().enumerate() {
        payments[agent] = by_rank_payment[rank0 + 1].clone();
    }
    Ok(payments)
}

/// Payments by recursion on the set of zeroed agents.
///
/// `p_i(v) = p_i(0, v_{-i}) + R_i(v)` for positive-valued agents, and the
/// zero-valued agents at any profile split the remaining budget equally.
/// The all-zero profile pays nothing.
pub fn payments_recursive<F: AllocationRule + ?Sized>(rule: &F, v: &ValuationProfile) -> Result<Vec<Rational>> {
    check_dimension(rule.agents(), v)?;
    guard_implementable(rule)?;
    guard_subset_size(v.n())?;
    let mut memo = HashMap::new();
    recurse(rule, v, v.zero_mask(), &mut memo)
}

fn recurse<F: AllocationRule + ?Sized>(
    rule: &F,
    v: &ValuationProfile,
    zeroed: u32,
    memo: &mut HashMap<u32, Vec<Rational>>,
) -> Result<Vec<Rational>> {
    if let Some(hit) = memo.get(&zeroed) {
        return Ok(hit.clone());
    }
    let n = v.n();
    let w = v.with_zeroed(zeroed);
    let mut payments = vec![Rational::zero(); n];
    if zeroed.count_ones() as usize != n {
        let allocation = rule.allocate(&w)?;
        let mut positive_total = Rational::zero();
        for i in (0..n).filter(|i| zeroed & (1 << i) == 0) {
            let below = recurse(rule, v, zeroed | (1 << i), memo)?;
            let own = w.value(i) * &allocation[i] - rule.allocation_integral(&w, i)?;
            payments[i] = &below[i] + own;
            positive_total += &payments[i];
        }
        let zero_count = zeroed.count_ones() as i64;
        if zero_count > 0 {
            let share = -(positive_total / Rational::from(zero_count));
            for i in (0..n).filter(|i| zeroed & (1 << i) != 0) {
                payments[i] = share.clone();
            }
        }
    }
    memo.insert(zeroed, payments.clone());
    Ok(payments)
}

/// Allocation, payments and utilities at `v`. Two-step rules at
/// distinct-positive profiles use the closed form; everything else goes
/// through the subset formula.
pub fn run_mechanism<F: AllocationRule + ?Sized>(rule: &F, v: &ValuationProfile) -> Result<Outcome> {
    let payments = match rule.as_ranking().and_then(RankingRule::as_two_step) {
        Some(two_step) if v.is_distinct_positive() && two_step.is_implementable() => {
            payments_two_step(&two_step, v)?
        }
        _ => payments_subset_formula(rule, v)?,
    };
    let allocation = rule.allocate(v)?;
    Ok(assemble(v, allocation, payments))
}

pub(crate) fn assemble(v: &ValuationProfile, allocation: Vec<Rational>, payments: Vec<Rational>) -> Outcome {
    let utilities = (0..v.n()).map(|i| v.value(i) * &allocation[i] - &payments[i]).collect();
    Outcome { allocation, payments, utilities }
}

/// Outcome using a specific payment route.
pub fn run_with_method<F: AllocationRule + ?Sized>(
    rule: &F,
    v: &ValuationProfile,
    method: PaymentMethod,
) -> Result<Outcome> {
    let payments = match method {
        PaymentMethod::Subset => payments_subset_formula(rule, v)?,
        PaymentMethod::Recursive => payments_recursive(rule, v)?,
        PaymentMethod::TwoStep => {
            let two_step = rule
                .as_ranking()
                .and_then(RankingRule::as_two_step)
                .ok_or_else(|| Error::OutsideDomain("rule is not a two-step rule".into()))?;
            payments_two_step(&two_step, v)?
        }
    };
    Ok(assemble(v, rule.allocate(v)?, payments))
}

/// Payment made by an agent reporting zero, `p_i(0, v_{-i})`.
pub fn zero_report_payment<F: AllocationRule + ?Sized>(
    rule: &F,
    v: &ValuationProfile,
    agent: usize,
) -> Result<Rational> {
    check_dimension(rule.agents(), v)?;
    guard_implementable(rule)?;
    subset_payment_of(rule, &v.with_value(agent, Rational::zero())?, agent)
}
