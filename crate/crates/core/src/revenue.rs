//! Revenue of the elementary mechanism: each agent pays its value times its
//! allocation minus the integral of its allocation curve, and nothing at a
//! zero report.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::rules::{check_dimension, AllocationRule, RankingRule, ValuationProfile};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RevenueView {
    pub per_agent: Vec<Rational>,
    pub total: Rational,
}

pub fn allocation_integral<F: AllocationRule + ?Sized>(
    rule: &F,
    v: &ValuationProfile,
    agent: usize,
) -> Result<Rational> {
    check_dimension(rule.agents(), v)?;
    rule.allocation_integral(v, agent)
}

/// `R_i(v) = v_i f_i(v) - integral_0^{v_i} f_i(x, v_{-i}) dx`.
pub fn elementary_payment<F: AllocationRule + ?Sized>(
    rule: &F,
    v: &ValuationProfile,
    agent: usize,
) -> Result<Rational> {
    let f = rule.allocate(v)?;
    Ok(v.value(agent) * &f[agent] - rule.allocation_integral(v, agent)?)
}

pub fn revenue_view<F: AllocationRule + ?Sized>(rule: &F, v: &ValuationProfile) -> Result<RevenueView> {
    let f = rule.allocate(v)?;
    let per_agent = (0..v.n())
        .map(|i| Ok(v.value(i) * &f[i] - rule.allocation_integral(v, i)?))
        .collect::<Result<Vec<_>>>()?;
    let total = per_agent.iter().sum();
    Ok(RevenueView { per_agent, total })
}

/// Total elementary revenue `R(v)`. Ranking rules take the sorted-value
/// shortcut [`ranking_revenue`].
pub fn total_revenue<F: AllocationRule + ?Sized>(rule: &F, v: &ValuationProfile) -> Result<Rational> {
    match rule.as_ranking() {
        Some(ranking) => {
            check_dimension(ranking.n(), v)?;
            Ok(ranking_revenue(ranking.pi(), v.values()))
        }
        None => Ok(revenue_view(rule, v)?.total),
    }
}

/// `sum_j j v_(j+1) (pi_j - pi_{j+1})` over the values sorted in decreasing
/// order. Revenue is continuous in the profile, so this holds with ties too.
pub fn ranking_revenue(pi: &[Rational], values: &[Rational]) -> Rational {
    let mut sorted: Vec<&Rational> = values.iter().collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut total = Rational::zero();
    for j in 1..sorted.len() {
        if sorted[j].is_zero() {
            break;
        }
        total += Rational::from(j) * sorted[j] * (&pi[j - 1] - &pi[j]);
    }
    total
}

/// `sum_{j=1}^{n-1} j v_(j+1) (pi_j - pi_{j+1})`, valid on 0-generic profiles.
pub fn revenue_closed_form_0generic(rule: &RankingRule, v: &ValuationProfile) -> Result<Rational> {
    check_dimension(rule.n(), v)?;
    if !v.is_zero_generic() {
        return Err(Error::OutsideDomain("closed-form revenue needs a 0-generic profile".into()));
    }
    let mut total = Rational::zero();
    for j in 1..rule.n() {
        let next = v.value_at_rank(j + 1);
        if next.is_zero() {
            break;
        }
        total += Rational::from(j) * next * (rule.pi_at(j) - rule.pi_at(j + 1));
    }
    Ok(total)
}
