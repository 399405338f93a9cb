//! The r-optimal two-step rule, its optimality certificate, and r-Pareto
//! checks.
//!
//! The r-optimal rule maximizes the top-rank probability `pi_1` among
//! ranking rules that can be priced in a budget-balanced, truthful, symmetric
//! way. It is a two-step rule whose step length `ell` minimizes
//! `(i - 1) / (C(n-2, i-1) + i)` over even `i` in `[2, n-1]`.

pub mod lp;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{binomial, parity_sign, Rational};
use crate::rules::{is_implementable, AllocationRule, RankingRule, TwoStepRule, ValuationProfile};

pub use lp::{probe_optimal_vertices, solve_lp, Constraint, DualCheck, LinearProgram, LpSolution};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EllSelection {
    pub ell: usize,
    pub argmin: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptimalRuleReport {
    pub n: usize,
    pub ell: usize,
    pub ell_argmin_set: Vec<usize>,
    pub pi_star: RankingRule,
    pub pi1_star: Rational,
    pub pi1_decimal: String,
    pub unique: bool,
}

/// Dual multipliers for the rank LP with zero perturbation: `theta` on the
/// monotonicity rows, `y` on the implementability equation and `z` on the
/// total-mass equation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualCertificate {
    pub n: usize,
    pub y: Rational,
    pub z: Rational,
    pub theta: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateCheck {
    pub feasible: bool,
    pub objective: Rational,
    /// Human-readable descriptions of every failed dual constraint.
    pub violations: Vec<String>,
}

/// Primal optimum, dual objective and closed-form `pi_1*` side by side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualityClosure {
    pub n: usize,
    pub primal_value: Rational,
    pub primal_solution: Vec<Rational>,
    pub pi1_star: Rational,
    pub certificate: DualCertificate,
    pub check: CertificateCheck,
    pub closed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Domination {
    pub dominated: bool,
    pub witness: Option<RankingRule>,
}

fn require_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 agents, got {n}")));
    }
    Ok(())
}

fn ell_objective(n: usize, i: usize) -> Rational {
    Rational::new(i as i64 - 1, 1) / Rational::from(binomial(n as u64 - 2, i as u64 - 1) + i)
}

/// Exact brute-force minimization of `(i-1)/(C(n-2,i-1)+i)` over even `i`.
/// `ell` is the smallest minimizer.
pub fn select_ell(n: usize) -> Result<EllSelection> {
    require_n(n)?;
    let mut best: Option<Rational> = None;
    let mut argmin = Vec::new();
    for i in (2..n).step_by(2) {
        let score = ell_objective(n, i);
        match &best {
            Some(b) if score > *b => {}
            Some(b) if score == *b => argmin.push(i),
            _ => {
                best = Some(score);
                argmin = vec![i];
            }
        }
    }
    Ok(EllSelection { ell: argmin[0], argmin })
}

/// Largest even integer strictly below `(n+1)/2`.
///
/// The non-strict reading picks `(n+1)/2` itself when `n = 3 mod 4`, which
/// maximizes the binomial but not the score: at `n = 11` it gives `ell = 6`
/// with score `5/132`, while `ell = 4` scores `3/88`.
pub fn closed_form_ell(n: usize) -> Result<usize> {
    if n < 9 {
        return Err(Error::InvalidArgument(format!("closed form for ell applies from 9 agents, got {n}")));
    }
    // 2 * bound < n + 1  <=>  bound <= n / 2
    let half = n / 2;
    Ok(half - half % 2)
}

pub fn r_optimal_rule(n: usize) -> Result<OptimalRuleReport> {
    r_optimal_rule_with(n, None)
}

/// Like [`r_optimal_rule`], but picks `preferred` when it is one of several
/// minimizers. A preference outside the argmin set is ignored.
pub fn r_optimal_rule_with(n: usize, preferred: Option<usize>) -> Result<OptimalRuleReport> {
    let selection = select_ell(n)?;
    let ell = match preferred {
        Some(p) if selection.argmin.contains(&p) => p,
        _ => selection.ell,
    };
    let two_step = TwoStepRule::implementable(ell, n)?;
    let pi1_star = two_step.pi1().clone();
    Ok(OptimalRuleReport {
        n,
        ell,
        unique: selection.argmin.len() == 1,
        ell_argmin_set: selection.argmin,
        pi_star: two_step.to_ranking(),
        pi1_decimal: pi1_star.to_decimal(6),
        pi1_star,
    })
}

/// `pi_1*` for `n` agents.
pub fn optimal_pi1(n: usize) -> Result<Rational> {
    let ell = select_ell(n)?.ell;
    Ok(TwoStepRule::implementable(ell, n)?.pi1().clone())
}

/// Worst-case efficiency of an implementable ranking mechanism, which is its
/// top-rank probability.
pub fn worst_case_efficiency(rule: &RankingRule) -> Result<Rational> {
    let check = is_implementable(rule);
    if !check.implementable {
        return Err(Error::NotImplementable { residual: check.residual });
    }
    Ok(rule.pi_at(1).clone())
}

/// Realized welfare over efficient welfare, `sum v_i f_i(v) / max v`, with
/// `0/0 = 1`.
pub fn welfare_ratio<F: AllocationRule + ?Sized>(rule: &F, v: &ValuationProfile) -> Result<Rational> {
    let f = rule.allocate(v)?;
    let top = v.max_value();
    if top.is_zero() {
        return Ok(Rational::one());
    }
    let welfare: Rational = v.values().iter().zip(&f).map(|(a, b)| a * b).sum();
    Ok(welfare / top)
}

/// Perturbations used to approach the welfare-ratio infimum.
pub fn mu_family_deltas() -> Vec<Rational> {
    vec![Rational::new(1, 10), Rational::new(1, 100), Rational::new(1, 1000)]
}

/// The profile `(1, delta, ..., delta)`.
pub fn structured_profile(n: usize, delta: &Rational) -> Result<ValuationProfile> {
    let mut values = vec![delta.clone(); n];
    values[0] = Rational::one();
    ValuationProfile::new(values)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MuSample {
    pub pi1: Rational,
    /// `(delta, ratio)` along the structured family.
    pub family: Vec<(Rational, Rational)>,
    pub min_ratio: Rational,
    pub min_profile: ValuationProfile,
}

/// Welfare ratios over `extra` profiles and the structured family.
pub fn sample_welfare_ratio(rule: &RankingRule, extra: &[ValuationProfile]) -> Result<MuSample> {
    let pi1 = worst_case_efficiency(rule)?;
    let n = rule.n();
    let mut family = Vec::new();
    let mut min: Option<(Rational, ValuationProfile)> = None;
    let mut consider = |ratio: Rational, v: &ValuationProfile| {
        if min.as_ref().is_none_or(|(m, _)| ratio < *m) {
            min = Some((ratio, v.clone()));
        }
    };
    for delta in mu_family_deltas() {
        let v = structured_profile(n, &delta)?;
        let ratio = welfare_ratio(rule, &v)?;
        consider(ratio.clone(), &v);
        family.push((delta, ratio));
    }
    for v in extra {
        consider(welfare_ratio(rule, v)?, v);
    }
    let (min_ratio, min_profile) = min.expect("family is nonempty");
    Ok(MuSample { pi1, family, min_ratio, min_profile })
}

/// Row coefficients `(-1)^k C(n-1, k-1)` of the implementability equation.
pub fn implementability_row(n: usize) -> Vec<Rational> {
    (1..=n).map(|k| Rational::from(parity_sign(k) * binomial(n as u64 - 1, k as u64 - 1))).collect()
}

/// The rank LP: maximize `pi_1 + sum eps_j pi_j` over nonincreasing,
/// implementable, nonnegative `pi` with total mass one.
///
/// Row order: `n-1` monotonicity rows, then the implementability equation,
/// then the mass equation.
pub fn build_lp_rank(n: usize, epsilon: &[Rational]) -> Result<LinearProgram> {
    require_n(n)?;
    if epsilon.len() != n {
        return Err(Error::InvalidArgument(format!("epsilon has length {}, expected {n}", epsilon.len())));
    }
    let mut objective = epsilon.to_vec();
    objective[0] += Rational::one();
    let mut lp = LinearProgram::new(objective);
    for i in 0..n - 1 {
        let mut row = vec![Rational::zero(); n];
        row[i + 1] = Rational::one();
        row[i] = -Rational::one();
        lp.add_le(row, Rational::zero());
    }
    lp.add_eq(implementability_row(n), Rational::zero());
    lp.add_eq(vec![Rational::one(); n], Rational::one());
    Ok(lp)
}

fn h(n: usize, i: usize) -> Rational {
    Rational::from(parity_sign(i - 1) * binomial(n as u64 - 2, i as u64 - 1))
}

/// Explicit dual solution for the unperturbed rank LP, seeded with the
/// optimal `pi_1*`.
pub fn dual_certificate(n: usize) -> Result<DualCertificate> {
    dual_certificate_for(n, select_ell(n)?.ell)
}

/// The same construction seeded with the two-step rule of step length
/// `ell`. Only an optimal `ell` yields a feasible certificate.
pub fn dual_certificate_for(n: usize, ell: usize) -> Result<DualCertificate> {
    let z = TwoStepRule::implementable(ell, n)?.pi1().clone();
    let y = &z - Rational::one();
    let theta = (1..n)
        .map(|i| {
            let hi = h(n, i);
            (&hi - Rational::one()) - &z * (hi - Rational::from(i))
        })
        .collect();
    Ok(DualCertificate { n, y, z, theta })
}

/// Evaluates each dual constraint of the rank LP directly:
///
/// ```text
/// -theta_1 - y + z                               >= 1
/// theta_{i-1} - theta_i + (-1)^i C(n-1,i-1) y + z >= 0   (2 <= i <= n-1)
/// theta_{n-1} + (-1)^n y + z                     >= 0
/// theta >= 0
/// ```
pub fn verify_dual_certificate(cert: &DualCertificate) -> Result<CertificateCheck> {
    let n = cert.n;
    require_n(n)?;
    if cert.theta.len() != n - 1 {
        return Err(Error::InvalidArgument(format!(
            "certificate has {} theta entries, expected {}",
            cert.theta.len(),
            n - 1
        )));
    }
    let coeff = implementability_row(n);
    let theta = |i: usize| &cert.theta[i - 1];
    let mut violations = Vec::new();
    for i in 1..=n {
        let mut lhs = &coeff[i - 1] * &cert.y + &cert.z;
        if i > 1 {
            lhs += theta(i - 1);
        }
        if i < n {
            lhs -= theta(i);
        }
        let rhs = if i == 1 { Rational::one() } else { Rational::zero() };
        if lhs < rhs {
            violations.push(format!("column {i}: {lhs} < {rhs}"));
        }
    }
    for (k, t) in cert.theta.iter().enumerate() {
        if t.is_negative() {
            violations.push(format!("theta_{} = {t} is negative", k + 1));
        }
    }
    Ok(CertificateCheck { feasible: violations.is_empty(), objective: cert.z.clone(), violations })
}

/// Solves the rank LP, builds the certificate, and checks that primal,
/// dual, and closed-form values coincide.
pub fn duality_closure(n: usize) -> Result<DualityClosure> {
    let lp = build_lp_rank(n, &vec![Rational::zero(); n])?;
    let primal = solve_lp(&lp)?;
    let certificate = dual_certificate(n)?;
    let check = verify_dual_certificate(&certificate)?;
    let generic = lp.check_dual(&certificate.theta, &[certificate.y.clone(), certificate.z.clone()])?;
    let pi1_star = optimal_pi1(n)?;
    let closed = check.feasible
        && generic.feasible
        && generic.objective == primal.value
        && primal.value == pi1_star
        && lp.is_feasible(&primal.x);
    Ok(DualityClosure {
        n,
        primal_value: primal.value,
        primal_solution: primal.x,
        pi1_star,
        certificate,
        check,
        closed,
    })
}

fn require_distribution(rule: &RankingRule) -> Result<()> {
    let check = is_implementable(rule);
    if !check.implementable {
        return Err(Error::NotImplementable { residual: check.residual });
    }
    if rule.total() != Rational::one() {
        return Err(Error::InvalidRule(format!("probabilities sum to {}, expected 1", rule.total())));
    }
    Ok(())
}

/// Whether some implementable rule first-order stochastically dominates
/// `rule`. Solves one LP maximizing the sum of prefix sums subject to
/// dominating every prefix of `rule`.
pub fn is_dominated_fosd(rule: &RankingRule) -> Result<Domination> {
    require_distribution(rule)?;
    let n = rule.n();
    let mut lp = build_lp_rank(n, &vec![Rational::zero(); n])?;
    lp.objective = (0..n).map(|i| Rational::from(n - i)).collect();
    let mut prefix = Rational::zero();
    for j in 0..n - 1 {
        prefix += &rule.pi()[j];
        let row = (0..n).map(|i| if i <= j { -Rational::one() } else { Rational::zero() }).collect();
        lp.add_le(row, -&prefix);
    }
    let best = solve_lp(&lp)?;
    let baseline = lp.objective_at(rule.pi());
    if best.value > baseline {
        Ok(Domination { dominated: true, witness: Some(RankingRule::new(best.x)?) })
    } else {
        Ok(Domination { dominated: false, witness: None })
    }
}

/// `1 - 1/n <= pi_1 <= pi_1*`, which every undominated rule satisfies.
pub fn r_pareto_bounds_check(rule: &RankingRule) -> Result<bool> {
    require_distribution(rule)?;
    let n = rule.n();
    let lower = Rational::one() - Rational::new(1, n as i64);
    let pi1 = rule.pi_at(1);
    Ok(*pi1 >= lower && *pi1 <= optimal_pi1(n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{equal_share_rule, fosd_dominates, gl_rule};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn zeros(n: usize) -> Vec<Rational> {
        vec![Rational::zero(); n]
    }

    #[test]
    fn select_ell_examples() {
        for n in 3..=7 {
            assert_eq!(select_ell(n).unwrap(), EllSelection { ell: 2, argmin: vec![2] });
        }
        assert_eq!(select_ell(8).unwrap(), EllSelection { ell: 2, argmin: vec![2, 4] });
        assert_eq!(select_ell(11).unwrap(), EllSelection { ell: 4, argmin: vec![4] });
        assert_eq!(select_ell(15).unwrap().ell, 6);
        assert!(select_ell(2).is_err());
    }

    #[test]
    fn n11_scores() {
        assert_eq!(ell_objective(11, 6), r(5, 132));
        assert_eq!(ell_objective(11, 4), r(3, 88));
        // 3 * 132 = 396 < 440 = 5 * 88
        assert!(ell_objective(11, 4) < ell_objective(11, 6));
    }

    #[test]
    fn closed_form_ell_examples() {
        assert_eq!(closed_form_ell(9).unwrap(), 4);
        assert_eq!(closed_form_ell(12).unwrap(), 6);
        assert_eq!(closed_form_ell(17).unwrap(), 8);
        assert_eq!(closed_form_ell(11).unwrap(), 4);
        assert_eq!(closed_form_ell(15).unwrap(), 6);
        assert!(closed_form_ell(8).is_err());
        for n in 9..=120 {
            assert_eq!(closed_form_ell(n).unwrap(), select_ell(n).unwrap().ell, "n={n}");
        }
    }

    #[test]
    fn argmin_unique_except_eight() {
        for n in 3..=25 {
            let s = select_ell(n).unwrap();
            assert_eq!(s.argmin.len() == 1, n != 8, "n={n}");
        }
        for ell in [2, 4] {
            assert_eq!(TwoStepRule::implementable(ell, 8).unwrap().pi1(), &r(7, 8));
        }
    }

    #[test]
    fn r_optimal_examples() {
        let five = r_optimal_rule(5).unwrap();
        assert_eq!(five.pi_star, gl_rule(5).unwrap());
        assert!(five.unique);
        assert_eq!(r_optimal_rule(9).unwrap().pi1_star, r(36, 39));
        assert_eq!(r_optimal_rule(14).unwrap().pi1_star, r(793, 798));
        assert_eq!(r_optimal_rule(14).unwrap().ell, 6);
        assert_eq!(r_optimal_rule(9).unwrap().pi1_decimal, "0.923077");

        let eight = r_optimal_rule(8).unwrap();
        assert_eq!((eight.ell, eight.unique), (2, false));
        let four = r_optimal_rule_with(8, Some(4)).unwrap();
        assert_eq!((four.ell, four.pi1_star.clone()), (4, r(7, 8)));
        assert_eq!(r_optimal_rule_with(9, Some(2)).unwrap().ell, 4);
    }

    #[test]
    fn r_optimal_is_implementable_and_beats_gl() {
        for n in 3..=30 {
            let report = r_optimal_rule(n).unwrap();
            assert!(is_implementable(&report.pi_star).implementable, "n={n}");
            assert!(report.pi1_star >= Rational::one() - r(1, n as i64));
            let expected = Rational::one()
                - Rational::from(report.ell - 1)
                    / Rational::from(binomial(n as u64 - 2, report.ell as u64 - 1) + report.ell);
            assert_eq!(report.pi1_star, expected);
        }
    }

    #[test]
    fn worst_case_efficiency_examples() {
        for n in 3..=10 {
            assert_eq!(worst_case_efficiency(&gl_rule(n).unwrap()).unwrap(), Rational::one() - r(1, n as i64));
            assert_eq!(worst_case_efficiency(&equal_share_rule(n).unwrap()).unwrap(), r(1, n as i64));
        }
        assert_eq!(worst_case_efficiency(&r_optimal_rule(10).unwrap().pi_star).unwrap(), r(19, 20));
        assert!(worst_case_efficiency(&crate::rules::efficient_rule(4).unwrap()).is_err());
    }

    #[test]
    fn welfare_ratio_on_family() {
        let gl = gl_rule(5).unwrap();
        let zero = ValuationProfile::from_integers(&[0, 0, 0, 0, 0]).unwrap();
        assert_eq!(welfare_ratio(&gl, &zero).unwrap(), Rational::one());
        for delta in mu_family_deltas() {
            let v = structured_profile(5, &delta).unwrap();
            let pi1 = gl.pi_at(1);
            assert_eq!(welfare_ratio(&gl, &v).unwrap(), pi1 + &delta * (Rational::one() - pi1));
        }
        let sample = sample_welfare_ratio(&gl, &[]).unwrap();
        assert_eq!(sample.min_ratio, sample.family[2].1);
    }

    #[test]
    fn lp_rank_examples() {
        let lp3 = build_lp_rank(3, &zeros(3)).unwrap();
        let s = solve_lp(&lp3).unwrap();
        assert_eq!(s.value, r(2, 3));
        assert_eq!(s.x, gl_rule(3).unwrap().pi());

        let lp6 = solve_lp(&build_lp_rank(6, &zeros(6)).unwrap()).unwrap();
        assert_eq!((lp6.value, lp6.x), (r(5, 6), gl_rule(6).unwrap().pi().to_vec()));

        assert_eq!(solve_lp(&build_lp_rank(9, &zeros(9)).unwrap()).unwrap().value, r(12, 13));

        for n in 3..=15 {
            let lp = build_lp_rank(n, &zeros(n)).unwrap();
            assert!(lp.is_feasible(gl_rule(n).unwrap().pi()), "n={n}");
        }
        assert!(build_lp_rank(4, &zeros(3)).is_err());
    }

    #[test]
    fn lp_rank_eight_has_two_optimal_vertices() {
        let (value, vertices) = probe_optimal_vertices(&build_lp_rank(8, &zeros(8)).unwrap()).unwrap();
        assert_eq!(value, r(7, 8));
        let expect: Vec<Vec<Rational>> = [4, 2]
            .iter()
            .map(|&ell| TwoStepRule::implementable(ell, 8).unwrap().to_ranking().pi().to_vec())
            .collect();
        assert_eq!(vertices, expect);
    }

    #[test]
    fn lp_rank_unique_vertex_elsewhere() {
        for n in [5, 9, 11] {
            let (_, vertices) = probe_optimal_vertices(&build_lp_rank(n, &zeros(n)).unwrap()).unwrap();
            assert_eq!(vertices, vec![r_optimal_rule(n).unwrap().pi_star.pi().to_vec()], "n={n}");
        }
    }

    #[test]
    fn certificate_examples() {
        let five = dual_certificate(5).unwrap();
        assert_eq!(five.z, r(4, 5));
        assert!(five.theta.iter().all(|t| !t.is_negative()));
        assert!(verify_dual_certificate(&five).unwrap().feasible);

        assert_eq!(dual_certificate(9).unwrap().z, r(12, 13));

        let three = dual_certificate(3).unwrap();
        assert_eq!(three.z, r(2, 3));
        assert_eq!(three.theta, vec![Rational::zero(), Rational::zero()]);
        assert_eq!(&three.z - &three.y, Rational::one());
    }

    #[test]
    fn certificate_from_suboptimal_ell_is_infeasible() {
        let cert = dual_certificate_for(11, 6).unwrap();
        assert_eq!(cert.z, r(127, 132));
        assert!(!verify_dual_certificate(&cert).unwrap().feasible);
        assert!(verify_dual_certificate(&dual_certificate_for(11, 4).unwrap()).unwrap().feasible);
        for ell in [2, 4] {
            assert!(verify_dual_certificate(&dual_certificate_for(8, ell).unwrap()).unwrap().feasible);
        }
    }

    #[test]
    fn lp_rank_eleven_beats_binomial_peak() {
        let s = solve_lp(&build_lp_rank(11, &zeros(11)).unwrap()).unwrap();
        assert_eq!(s.value, r(85, 88));
        assert!(s.value > r(127, 132));
    }

    #[test]
    fn broken_certificate_is_flagged() {
        let mut cert = dual_certificate(6).unwrap();
        cert.z -= r(1, 100);
        let check = verify_dual_certificate(&cert).unwrap();
        assert!(!check.feasible);
        assert!(!check.violations.is_empty());
        cert.theta[1] = r(-1, 1);
        assert!(verify_dual_certificate(&cert).unwrap().violations.iter().any(|v| v.contains("theta_2")));
    }

    #[test]
    fn duality_closes_through_twenty_five() {
        for n in 3..=25 {
            let closure = duality_closure(n).unwrap();
            assert!(closure.closed, "n={n}: {:?}", closure.check.violations);
            assert_eq!(closure.primal_value, closure.certificate.z);
        }
    }

    #[test]
    fn domination_examples() {
        assert!(!is_dominated_fosd(&gl_rule(5).unwrap()).unwrap().dominated);
        assert!(!is_dominated_fosd(&r_optimal_rule(10).unwrap().pi_star).unwrap().dominated);

        let eq4 = equal_share_rule(4).unwrap();
        let verdict = is_dominated_fosd(&eq4).unwrap();
        assert!(verdict.dominated);
        let witness = verdict.witness.unwrap();
        assert_eq!(witness, gl_rule(4).unwrap());
        assert!(fosd_dominates(&witness, &eq4).unwrap());
        assert!(is_implementable(&witness).implementable);
    }

    #[test]
    fn domination_preconditions() {
        assert!(is_dominated_fosd(&crate::rules::efficient_rule(4).unwrap()).is_err());
        let short = RankingRule::parse("1/2,1/4,0").unwrap();
        assert!(matches!(is_dominated_fosd(&short), Err(Error::NotImplementable { .. }) | Err(Error::InvalidRule(_))));
    }

    #[test]
    fn pareto_bounds() {
        assert!(r_pareto_bounds_check(&gl_rule(12).unwrap()).unwrap());
        assert!(r_pareto_bounds_check(&r_optimal_rule(12).unwrap().pi_star).unwrap());
        // equal share sits below the lower bound and is indeed dominated
        let eq = equal_share_rule(6).unwrap();
        assert!(!r_pareto_bounds_check(&eq).unwrap());
        assert!(is_dominated_fosd(&eq).unwrap().dominated);
    }

    #[test]
    fn top_two_family_is_gl() {
        for n in 3..=12 {
            // pi_1 + pi_2 = 1 and -pi_1 + (n-1) pi_2 = 0, by Cramer's rule
            let det = Rational::from(n - 1) + Rational::one();
            let pi1 = Rational::from(n - 1) / &det;
            let pi2 = Rational::one() / &det;
            let gl = gl_rule(n).unwrap();
            assert_eq!((&pi1, &pi2), (gl.pi_at(1), gl.pi_at(2)));

            // the LP restricted to pi_3..pi_n = 0 has a single feasible point
            let mut lp = build_lp_rank(n, &zeros(n)).unwrap();
            for k in 2..n {
                let row = (0..n).map(|j| if j == k { Rational::one() } else { Rational::zero() }).collect();
                lp.add_eq(row, Rational::zero());
            }
            let (_, vertices) = probe_optimal_vertices(&lp).unwrap();
            assert_eq!(vertices, vec![gl.pi().to_vec()]);
            lp.objective = (0..n).map(|j| if j == 1 { Rational::one() } else { Rational::zero() }).collect();
            let (_, vertices) = probe_optimal_vertices(&lp).unwrap();
            assert_eq!(vertices, vec![gl.pi().to_vec()]);
        }
    }
}
