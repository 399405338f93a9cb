//! Dense two-phase simplex over exact rationals.
//!
//! Problems are stated as
//!
//! ```text
//! maximize    c.x
//! subject to  A_le x <= b_le
//!             A_eq x  = b_eq
//!             x >= 0
//! ```
//!
//! Pivoting uses Bland's rule, so degenerate problems terminate.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Constraint { coeffs, rhs }
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// A maximization problem over nonnegative variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub le: Vec<Constraint>,
    pub eq: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LpSolution {
    pub value: Rational,
    pub x: Vec<Rational>,
}

/// Exact check of a dual point `(theta, w)` for [`LinearProgram`]:
/// `theta >= 0`, `A_le' theta + A_eq' w >= c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualCheck {
    pub feasible: bool,
    pub objective: Rational,
    /// Indices of violated dual constraints, one per primal variable.
    pub violated: Vec<usize>,
    pub negative_multipliers: Vec<usize>,
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>) -> Self {
        LinearProgram { objective, le: Vec::new(), eq: Vec::new() }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_le(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> &mut Self {
        self.le.push(Constraint::new(coeffs, rhs));
        self
    }

    pub fn add_eq(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> &mut Self {
        self.eq.push(Constraint::new(coeffs, rhs));
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vars();
        if n == 0 {
            return Err(Error::MalformedLp("no variables".into()));
        }
        for (kind, rows) in [("<=", &self.le), ("=", &self.eq)] {
            for (k, row) in rows.iter().enumerate() {
                if row.coeffs.len() != n {
                    return Err(Error::MalformedLp(format!(
                        "{kind} row {k} has {} coefficients, expected {n}",
                        row.coeffs.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.vars()
            && x.iter().all(|v| !v.is_negative())
            && self.le.iter().all(|c| c.lhs(x) <= c.rhs)
            && self.eq.iter().all(|c| c.lhs(x) == c.rhs)
    }

    pub fn check_dual(&self, theta: &[Rational], w: &[Rational]) -> Result<DualCheck> {
        self.validate()?;
        if theta.len() != self.le.len() || w.len() != self.eq.len() {
            return Err(Error::MalformedLp(format!(
                "dual point has {}+{} multipliers, expected {}+{}",
                theta.len(),
                w.len(),
                self.le.len(),
                self.eq.len()
            )));
        }
        let mut violated = Vec::new();
        for j in 0..self.vars() {
            let lhs: Rational = self
                .le
                .iter()
                .zip(theta)
                .map(|(row, t)| &row.coeffs[j] * t)
                .chain(self.eq.iter().zip(w).map(|(row, y)| &row.coeffs[j] * y))
                .sum();
            if lhs < self.objective[j] {
                violated.push(j);
            }
        }
        let negative_multipliers: Vec<usize> = (0..theta.len()).filter(|&k| theta[k].is_negative()).collect();
        let objective = self
            .le
            .iter()
            .zip(theta)
            .map(|(row, t)| &row.rhs * t)
            .chain(self.eq.iter().zip(w).map(|(row, y)| &row.rhs * y))
            .sum();
        Ok(DualCheck { feasible: violated.is_empty() && negative_multipliers.is_empty(), objective, violated, negative_multipliers })
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, reduced: &mut [Rational], value: &mut Rational) {
        let inv = self.rows[r][c].recip();
        for a in self.rows[r].iter_mut() {
            *a *= &inv;
        }
        self.rhs[r] *= &inv;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            for (a, p) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *a -= &factor * p;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        if !reduced[c].is_zero() {
            let factor = reduced[c].clone();
            for (a, p) in reduced.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *a -= &factor * p;
                }
            }
            *value += &factor * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[Rational]) -> (Vec<Rational>, Rational) {
        let mut reduced = cost.to_vec();
        let mut value = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (d, a) in reduced.iter_mut().zip(&self.rows[i]) {
                *d -= &cost[b] * a;
            }
            value += &cost[b] * &self.rhs[i];
        }
        (reduced, value)
    }

    /// Bland's rule: lowest-index improving column, ratio ties broken by the
    /// lowest basic index.
    fn optimize(&mut self, cost: &[Rational], allowed: &[bool]) -> Result<Rational> {
        let (mut reduced, mut value) = self.reduced_costs(cost);
        loop {
            let Some(c) = (0..self.cols).find(|&j| allowed[j] && reduced[j].is_positive()) else {
                return Ok(value);
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][c].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / &self.rows[i][c];
                let better = match &best {
                    None => true,
                    Some((k, r)) => ratio < *r || (ratio == *r && self.basis[i] < self.basis[*k]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, c, &mut reduced, &mut value);
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.vars();
    let m_le = lp.le.len();
    let rows_in: Vec<(&Constraint, bool)> =
        lp.le.iter().map(|c| (c, true)).chain(lp.eq.iter().map(|c| (c, false))).collect();
    let m = rows_in.len();

    // columns: originals, one slack/surplus per <= row, artificials as needed
    let needs_artificial: Vec<bool> = rows_in.iter().map(|(c, le)| !*le || c.rhs.is_negative()).collect();
    let artificial_count = needs_artificial.iter().filter(|&&a| a).count();
    let first_artificial = n + m_le;
    let cols = first_artificial + artificial_count;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut next_artificial = first_artificial;
    for (k, (constraint, is_le)) in rows_in.iter().enumerate() {
        let flip = constraint.rhs.is_negative();
        let mut row = vec![Rational::zero(); cols];
        for (j, a) in constraint.coeffs.iter().enumerate() {
            row[j] = if flip { -a } else { a.clone() };
        }
        if *is_le {
            row[n + k] = if flip { -Rational::one() } else { Rational::one() };
        }
        if needs_artificial[k] {
            row[next_artificial] = Rational::one();
            basis.push(next_artificial);
            next_artificial += 1;
        } else {
            basis.push(n + k);
        }
        rhs.push(if flip { -&constraint.rhs } else { constraint.rhs.clone() });
        rows.push(row);
    }
    let mut tableau = Tableau { rows, rhs, basis, cols };

    if artificial_count > 0 {
        let cost: Vec<Rational> =
            (0..cols).map(|j| if j >= first_artificial { -Rational::one() } else { Rational::zero() }).collect();
        let allowed = vec![true; cols];
        let phase_one = tableau.optimize(&cost, &allowed)?;
        if phase_one.is_negative() {
            return Err(Error::Infeasible);
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < tableau.rows.len() {
            if tableau.basis[i] < first_artificial {
                i += 1;
                continue;
            }
            match (0..first_artificial).find(|&j| !tableau.rows[i][j].is_zero()) {
                Some(j) => {
                    let mut scratch = vec![Rational::zero(); cols];
                    let mut ignored = Rational::zero();
                    tableau.pivot(i, j, &mut scratch, &mut ignored);
                    i += 1;
                }
                None => {
                    tableau.rows.remove(i);
                    tableau.rhs.remove(i);
                    tableau.basis.remove(i);
                }
            }
        }
    }

    let mut cost = vec![Rational::zero(); cols];
    cost[..n].clone_from_slice(&lp.objective);
    let allowed: Vec<bool> = (0..cols).map(|j| j < first_artificial).collect();
    let value = tableau.optimize(&cost, &allowed)?;

    let mut x = vec![Rational::zero(); n];
    for (i, &b) in tableau.basis.iter().enumerate() {
        if b < n {
            x[b] = tableau.rhs[i].clone();
        }
    }
    Ok(LpSolution { value, x })
}

/// Distinct optimal basic solutions reached by fixing the optimum and then
/// pushing each coordinate to its extremes. On a face with finitely many
/// vertices this finds every vertex that is extreme in some coordinate.
pub fn probe_optimal_vertices(lp: &LinearProgram) -> Result<(Rational, Vec<Vec<Rational>>)> {
    let best = solve_lp(lp)?;
    let mut face = lp.clone();
    face.add_eq(lp.objective.clone(), best.value.clone());
    let mut found = BTreeSet::new();
    found.insert(best.x.clone());
    for j in 0..lp.vars() {
        for sign in [1i64, -1] {
            let mut probe = face.clone();
            probe.objective = (0..lp.vars())
                .map(|k| if k == j { Rational::from(sign) } else { Rational::zero() })
                .collect();
            found.insert(solve_lp(&probe)?.x);
        }
    }
    Ok((best.value, found.into_iter().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn ints(values: &[i64]) -> Vec<Rational> {
        values.iter().map(|&v| Rational::from(v)).collect()
    }

    #[test]
    fn single_bound() {
        let mut lp = LinearProgram::new(ints(&[1]));
        lp.add_le(ints(&[1]), r(1, 2));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, r(1, 2));
        assert_eq!(s.x, vec![r(1, 2)]);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut lp = LinearProgram::new(ints(&[3, 5]));
        lp.add_le(ints(&[1, 0]), r(4, 1)).add_le(ints(&[0, 2]), r(12, 1)).add_le(ints(&[3, 2]), r(18, 1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, r(36, 1));
        assert_eq!(s.x, ints(&[2, 6]));
        let dual = lp.check_dual(&[r(0, 1), r(3, 2), r(1, 1)], &[]).unwrap();
        assert!(dual.feasible);
        assert_eq!(dual.objective, s.value);
    }

    #[test]
    fn equality_and_negative_rhs() {
        // max -x - y st x + y = 3, -x <= -1 -> -3
        let mut lp = LinearProgram::new(ints(&[-1, -1]));
        lp.add_eq(ints(&[1, 1]), r(3, 1)).add_le(ints(&[-1, 0]), r(-1, 1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, r(-3, 1));
        assert!(lp.is_feasible(&s.x));
    }

    #[test]
    fn infeasible_and_unbounded_are_distinct() {
        let mut lp = LinearProgram::new(ints(&[1]));
        lp.add_le(ints(&[1]), r(1, 1)).add_le(ints(&[-1]), r(-2, 1));
        assert!(matches!(solve_lp(&lp), Err(Error::Infeasible)));

        let mut lp = LinearProgram::new(ints(&[1, 0]));
        lp.add_le(ints(&[0, 1]), r(1, 1));
        assert!(matches!(solve_lp(&lp), Err(Error::Unbounded)));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(ints(&[1, 2]));
        lp.add_eq(ints(&[1, 1]), r(1, 1)).add_eq(ints(&[2, 2]), r(2, 1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, r(2, 1));
        assert_eq!(s.x, ints(&[0, 1]));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook largest-coefficient rule
        let mut lp = LinearProgram::new(vec![r(3, 4), r(-150, 1), r(1, 50), r(-6, 1)]);
        lp.add_le(vec![r(1, 4), r(-60, 1), r(-1, 25), r(9, 1)], r(0, 1))
            .add_le(vec![r(1, 2), r(-90, 1), r(-1, 50), r(3, 1)], r(0, 1))
            .add_le(vec![r(0, 1), r(0, 1), r(1, 1), r(0, 1)], r(1, 1));
        assert_eq!(solve_lp(&lp).unwrap().value, r(1, 20));
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let mut lp = LinearProgram::new(ints(&[1, 1]));
        lp.add_le(ints(&[1]), r(1, 1));
        assert!(matches!(solve_lp(&lp), Err(Error::MalformedLp(_))));
    }

    #[test]
    fn probe_finds_both_ends_of_an_optimal_edge() {
        // max x + y st x + y <= 1
        let mut lp = LinearProgram::new(ints(&[1, 1]));
        lp.add_le(ints(&[1, 1]), r(1, 1));
        let (value, vertices) = probe_optimal_vertices(&lp).unwrap();
        assert_eq!(value, r(1, 1));
        assert_eq!(vertices, vec![ints(&[0, 1]), ints(&[1, 0])]);
    }
}
