//! Independent checks of the satisfactory properties over sets of profiles.
//!
//! Payments are always computed with the subset formula, without first
//! screening the rule, so a rule that cannot be implemented shows up as a
//! failed check with a concrete profile instead of an error.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{parse_rational_list, Rational};
use crate::harness::random_profiles;
use crate::payments::{run_mechanism, subset_formula_unchecked, subset_payment_of, MAX_SUBSET_AGENTS};
use crate::revenue::{ranking_revenue, revenue_view, total_revenue};
use crate::rules::{
    check_dimension, implementability_residual, is_implementable, is_monotone_ranking, AllocationRule, RankingRule,
    ValuationProfile,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Informational entries are reported but never fail the report.
    pub informational: bool,
    pub profiles_checked: usize,
    pub counterexample: Option<ValuationProfile>,
    pub residual: Option<Rational>,
    pub detail: Option<String>,
}

impl CheckResult {
    fn pass(name: &str, profiles_checked: usize) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: true,
            informational: false,
            profiles_checked,
            counterexample: None,
            residual: None,
            detail: None,
        }
    }

    fn from_failure(name: &str, profiles_checked: usize, failure: Option<Failure>) -> Self {
        match failure {
            None => Self::pass(name, profiles_checked),
            Some(f) => CheckResult {
                name: name.to_string(),
                passed: false,
                informational: false,
                profiles_checked,
                counterexample: f.profile,
                residual: Some(f.residual),
                detail: Some(f.detail),
            },
        }
    }

    fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub grid_spec: String,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed && !c.informational)
    }
}

struct Failure {
    profile: Option<ValuationProfile>,
    residual: Rational,
    detail: String,
}

impl Failure {
    fn at(v: &ValuationProfile, residual: Rational, detail: String) -> Self {
        Failure { profile: Some(v.clone()), residual, detail }
    }
}

/// A reproducible set of profiles, written `values=0,1/3,2/3,1;exhaustive`
/// or `random=500;denom=64[;seed=7]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GridSpec {
    Exhaustive { values: Vec<Rational> },
    Random { count: usize, denom: u64, seed: u64 },
}

impl GridSpec {
    pub fn default_values() -> Self {
        GridSpec::Exhaustive { values: vec![Rational::zero(), Rational::new(1, 3), Rational::new(2, 3), Rational::one()] }
    }

    /// Profiles for `n` agents in lexicographic order of their value indices
    /// (exhaustive) or generation order (random).
    pub fn profiles(&self, n: usize) -> Result<Vec<ValuationProfile>> {
        match self {
            GridSpec::Exhaustive { values } => exhaustive_profiles(values, n),
            GridSpec::Random { count, denom, seed } => random_profiles(n, *count, *seed, *denom),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Exhaustive { values } => {
                let list: Vec<String> = values.iter().map(ToString::to_string).collect();
                write!(f, "values={};exhaustive", list.join(","))
            }
            GridSpec::Random { count, denom, seed } => write!(f, "random={count};denom={denom};seed={seed}"),
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("grid spec {text:?}: {why}"));
        let mut values = None;
        let mut exhaustive = false;
        let mut count = None;
        let mut denom = None;
        let mut seed = None;
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = match part.split_once('=') {
                Some((k, v)) => (k.trim(), Some(v.trim())),
                None => (part, None),
            };
            let number = |v: Option<&str>| -> Result<u64> {
                v.ok_or_else(|| bad(&format!("{key} needs a value")))?
                    .parse()
                    .map_err(|_| bad(&format!("{key} must be a nonnegative integer")))
            };
            match key {
                "values" => values = Some(parse_rational_list(value.ok_or_else(|| bad("values needs a list"))?)?),
                "exhaustive" if value.is_none() => exhaustive = true,
                "random" => count = Some(number(value)? as usize),
                "denom" => denom = Some(number(value)?),
                "seed" => seed = Some(number(value)?),
                _ => return Err(bad(&format!("unknown key {key:?}"))),
            }
        }
        match (values, count) {
            (Some(values), None) if count.is_none() && denom.is_none() && seed.is_none() => {
                if !exhaustive {
                    return Err(bad("value grids must say `exhaustive`"));
                }
                if values.is_empty() || values.iter().any(Rational::is_negative) {
                    return Err(bad("values must be a nonempty list of nonnegative rationals"));
                }
                Ok(GridSpec::Exhaustive { values })
            }
            (None, Some(count)) if !exhaustive => {
                let denom = denom.unwrap_or(64);
                if count == 0 || denom == 0 {
                    return Err(bad("random count and denom must be positive"));
                }
                Ok(GridSpec::Random { count, denom, seed: seed.unwrap_or(0) })
            }
            _ => Err(bad("expected `values=...;exhaustive` or `random=N;denom=D`")),
        }
    }
}

/// Every profile with coordinates drawn from `values`, first coordinate
/// varying slowest.
pub fn exhaustive_profiles(values: &[Rational], n: usize) -> Result<Vec<ValuationProfile>> {
    let k = values.len();
    let total = k
        .checked_pow(n as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::InvalidArgument(format!("{k}^{n} profiles is too many to enumerate")))?;
    (0..total)
        .map(|code| {
            let mut c = code;
            let mut coords = vec![Rational::zero(); n];
            for slot in coords.iter_mut().rev() {
                *slot = values[c % k].clone();
                c /= k;
            }
            ValuationProfile::new(coords)
        })
        .collect()
}

/// `sum_{T subset N} (-1)^{|T|} R(0_T, v_{-T})` at a profile without zeros.
pub fn check_residual_balance<F: AllocationRule + ?Sized>(rule: &F, v: &ValuationProfile) -> Result<Rational> {
    check_dimension(rule.agents(), v)?;
    let n = v.n();
    if n > MAX_SUBSET_AGENTS {
        return Err(Error::TooManyAgents { agents: n, limit: MAX_SUBSET_AGENTS });
    }
    if v.zero_mask() != 0 {
        return Err(Error::InvalidProfile("residual balance is defined only for profiles without zeros".into()));
    }
    let full = (1u32 << n) - 1;
    let mut sum = Rational::zero();
    let mut masked = v.values().to_vec();
    for t in 0..full {
        let revenue = match rule.as_ranking() {
            Some(ranking) => {
                for (i, slot) in masked.iter_mut().enumerate() {
                    *slot = if t & (1 << i) != 0 { Rational::zero() } else { v.value(i).clone() };
                }
                ranking_revenue(ranking.pi(), &masked)
            }
            None => total_revenue(rule, &v.with_zeroed(t))?,
        };
        if t.count_ones() % 2 == 0 {
            sum += revenue;
        } else {
            sum -= revenue;
        }
    }
    Ok(sum)
}

/// Deviation reports for `agent` at `v`: the supplied grid, every opponent
/// value, zero, midpoints between consecutive opponent values, and one
/// point above the highest.
pub fn deviation_points(v: &ValuationProfile, agent: usize, grid: &[Rational]) -> Vec<Rational> {
    let mut breaks: BTreeSet<Rational> = (0..v.n()).filter(|&j| j != agent).map(|j| v.value(j).clone()).collect();
    breaks.insert(Rational::zero());
    let sorted: Vec<Rational> = breaks.iter().cloned().collect();
    let mut points: BTreeSet<Rational> = grid.iter().cloned().collect();
    points.extend(sorted.iter().cloned());
    for pair in sorted.windows(2) {
        points.insert((&pair[0] + &pair[1]) / Rational::from(2));
    }
    points.insert(sorted.last().expect("zero is always present") + Rational::one());
    points.remove(v.value(agent));
    points.into_iter().collect()
}

/// Runs `f` over `profiles` in parallel and returns the first failure in
/// input order.
fn first_failure<T, F>(items: &[T], f: F) -> Result<Option<Failure>>
where
    T: Sync,
    F: Fn(&T) -> Result<Option<Failure>> + Sync,
{
    items
        .par_iter()
        .map(&f)
        .find_map_first(|outcome| match outcome {
            Ok(None) => None,
            other => Some(other),
        })
        .unwrap_or(Ok(None))
}

struct PaymentTable<'a, F: AllocationRule + ?Sized> {
    rule: &'a F,
    known: HashMap<Vec<Rational>, Vec<Rational>>,
}

impl<'a, F: AllocationRule + ?Sized> PaymentTable<'a, F> {
    fn build(rule: &'a F, profiles: &[ValuationProfile]) -> Result<Self> {
        let known = profiles
            .par_iter()
            .map(|v| Ok((v.values().to_vec(), subset_formula_unchecked(rule, v)?)))
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(PaymentTable { rule, known })
    }

    fn get(&self, v: &ValuationProfile) -> Result<Vec<Rational>> {
        match self.known.get(v.values()) {
            Some(p) => Ok(p.clone()),
            None => subset_formula_unchecked(self.rule, v),
        }
    }

    fn payment_of(&self, v: &ValuationProfile, agent: usize) -> Result<Rational> {
        match self.known.get(v.values()) {
            Some(p) => Ok(p[agent].clone()),
            None => subset_payment_of(self.rule, v, agent),
        }
    }
}

fn monotonicity_failure<F: AllocationRule + ?Sized>(
    rule: &F,
    v: &ValuationProfile,
    grid: &[Rational],
) -> Result<Option<Failure>> {
    for i in 0..v.n() {
        let mut points = deviation_points(v, i, grid);
        points.push(v.value(i).clone());
        points.sort();
        let mut previous: Option<(Rational, Rational)> = None;
        for x in points {
            let share = rule.allocate(&v.with_value(i, x.clone())?)?.swap_remove(i);
            if let Some((px, pf)) = &previous {
                if share < *pf {
                    return Ok(Some(Failure::at(
                        v,
                        pf - &share,
                        format!("agent {i}: allocation drops from {pf} at {px} to {share} at {x}"),
                    )));
                }
            }
            previous = Some((x, share));
        }
    }
    Ok(None)
}

fn rotate(values: &[Rational]) -> Vec<Rational> {
    let mut out = values.to_vec();
    out.rotate_left(1);
    out
}

/// Full satisfactory-property sweep for `rule` over `profiles`.
///
/// `grid_values` seeds the deviation reports used by the truthfulness and
/// monotonicity checks; `label` describes the sweep in the report.
pub fn check_satisfactory<F: AllocationRule + ?Sized>(
    rule: &F,
    profiles: &[ValuationProfile],
    grid_values: &[Rational],
    label: &str,
) -> Result<VerificationReport> {
    for v in profiles {
        check_dimension(rule.agents(), v)?;
    }
    let count = profiles.len();
    let mut checks = Vec::new();

    let mut monotone = CheckResult::from_failure(
        "monotonicity",
        count,
        first_failure(profiles, |v| monotonicity_failure(rule, v, grid_values))?,
    );
    if let Some(ranking) = rule.as_ranking() {
        if !is_monotone_ranking(ranking.pi()) {
            monotone.passed = false;
            monotone.detail = Some("probabilities are not nonincreasing in rank".into());
        }
        let residual = implementability_residual(ranking.pi());
        let mut eq = CheckResult::pass("implementability_equation", 0);
        if !residual.is_zero() {
            eq.passed = false;
            eq.detail = Some("alternating binomial sum of probabilities is nonzero".into());
        }
        eq.residual = Some(residual);
        checks.push(monotone);
        checks.push(eq);
    } else {
        checks.push(monotone);
    }

    let zero_free: Vec<ValuationProfile> = profiles.iter().filter(|v| v.zero_mask() == 0).cloned().collect();
    checks.push(CheckResult::from_failure(
        "residual_balance",
        zero_free.len(),
        first_failure(&zero_free, |v| {
            let residual = check_residual_balance(rule, v)?;
            Ok((!residual.is_zero())
                .then(|| Failure::at(v, residual, "alternating revenue sum is nonzero".into())))
        })?,
    ));

    let table = PaymentTable::build(rule, profiles)?;

    checks.push(CheckResult::from_failure(
        "budget_balance",
        count,
        first_failure(profiles, |v| {
            let budget: Rational = table.get(v)?.iter().sum();
            Ok((!budget.is_zero()).then(|| Failure::at(v, budget, "payments do not sum to zero".into())))
        })?,
    ));

    checks.push(CheckResult::from_failure(
        "symmetry",
        count,
        first_failure(profiles, |v| {
            let p = table.get(v)?;
            let f = rule.allocate(v)?;
            for group in v.groups() {
                let first = group.members[0];
                for &other in &group.members[1..] {
                    if p[other] != p[first] || f[other] != f[first] {
                        return Ok(Some(Failure::at(
                            v,
                            &p[other] - &p[first],
                            format!("tied agents {first} and {other} are treated differently"),
                        )));
                    }
                }
            }
            let rotated = ValuationProfile::new(rotate(v.values()))?;
            if rotate(&p) != table.get(&rotated)? || rotate(&f) != rule.allocate(&rotated)? {
                return Ok(Some(Failure::at(v, Rational::zero(), "outcome does not follow a relabeling".into())));
            }
            Ok(None)
        })?,
    ));

    checks.push(CheckResult::from_failure(
        "dsic",
        count,
        first_failure(profiles, |v| {
            let p = table.get(v)?;
            let f = rule.allocate(v)?;
            for i in 0..v.n() {
                let truthful = v.value(i) * &f[i] - &p[i];
                for report in deviation_points(v, i, grid_values) {
                    let lie = v.with_value(i, report.clone())?;
                    let gain = v.value(i) * &rule.allocate(&lie)?[i] - table.payment_of(&lie, i)? - &truthful;
                    if gain.is_positive() {
                        return Ok(Some(Failure::at(
                            v,
                            gain,
                            format!("agent {i} gains by reporting {report} instead of {}", v.value(i)),
                        )));
                    }
                }
            }
            Ok(None)
        })?,
    ));

    checks.push(CheckResult::from_failure(
        "revenue_equivalence",
        count,
        first_failure(profiles, |v| {
            let p = table.get(v)?;
            let view = revenue_view(rule, v)?;
            for i in 0..v.n() {
                let base = table.payment_of(&v.with_value(i, Rational::zero())?, i)?;
                let gap = &p[i] - base - &view.per_agent[i];
                if !gap.is_zero() {
                    return Ok(Some(Failure::at(
                        v,
                        gap,
                        format!("agent {i}: payment minus zero-report payment differs from elementary payment"),
                    )));
                }
            }
            Ok(None)
        })?,
    ));

    checks.push(CheckResult::from_failure(
        "zero_report_utility_identity",
        count,
        first_failure(profiles, |v| {
            let mut zero_utilities = Rational::zero();
            for i in 0..v.n() {
                zero_utilities -= table.payment_of(&v.with_value(i, Rational::zero())?, i)?;
            }
            let gap = zero_utilities - total_revenue(rule, v)?;
            Ok((!gap.is_zero()).then(|| {
                Failure::at(v, gap, "zero-report utilities do not sum to the elementary revenue".into())
            }))
        })?,
    ));

    Ok(VerificationReport { grid_spec: label.to_string(), checks })
}

/// Ex-post individual rationality: `p_i(0, v_{-i}) <= 0` and nonnegative
/// realized utilities. For two-step rules with `2 ell > n + 1`, where the
/// sufficient condition does not apply, results are informational.
pub fn check_expost_ir(rule: &RankingRule, profiles: &[ValuationProfile], label: &str) -> Result<VerificationReport> {
    let check = is_implementable(rule);
    if !check.implementable {
        return Err(Error::NotImplementable { residual: check.residual });
    }
    for v in profiles {
        check_dimension(rule.n(), v)?;
    }
    let n = rule.n();
    let outside_condition = rule.as_two_step().is_some_and(|t| 2 * t.ell() > n + 1);
    let mut checks = Vec::new();

    let mut zero_report = CheckResult::from_failure(
        "zero_report_payment_nonpositive",
        profiles.len(),
        first_failure(profiles, |v| {
            for i in 0..v.n() {
                let p = subset_payment_of(rule, &v.with_value(i, Rational::zero())?, i)?;
                if p.is_positive() {
                    return Ok(Some(Failure::at(v, p.clone(), format!("agent {i} pays {p} after reporting 0"))));
                }
            }
            Ok(None)
        })?,
    );
    let mut utilities = CheckResult::from_failure(
        "utilities_nonnegative",
        profiles.len(),
        first_failure(profiles, |v| {
            let outcome = run_mechanism(rule, v)?;
            Ok(outcome.utilities.iter().enumerate().find(|(_, u)| u.is_negative()).map(|(i, u)| {
                Failure::at(v, u.clone(), format!("agent {i} ends with utility {u}"))
            }))
        })?,
    );

    if let Some(t) = rule.as_two_step() {
        let ell = t.ell();
        let holds = 2 * ell <= n + 1;
        let mut condition = CheckResult::pass("two_step_sufficient_condition", 0).informational();
        condition.passed = holds;
        condition = condition.with_detail(format!(
            "2*ell = {} {} n+1 = {}; {}",
            2 * ell,
            if holds { "<=" } else { ">" },
            n + 1,
            if holds {
                "individual rationality is guaranteed"
            } else {
                "no guarantee; sweep results above are a search, not a verdict"
            }
        ));
        if outside_condition {
            zero_report = zero_report.informational();
            utilities = utilities.informational();
        }
        checks.push(zero_report);
        checks.push(utilities);
        checks.push(condition);
    } else {
        checks.push(zero_report);
        checks.push(utilities);
    }
    Ok(VerificationReport { grid_spec: label.to_string(), checks })
}
