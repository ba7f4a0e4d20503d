//! Exact linear programming over `Scalar` by the two-phase tableau simplex
//! with Bland's rule. All variables are nonnegative.

use num_traits::{One, Zero};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Scalar)>,
    pub rel: Relation,
    pub rhs: Scalar,
}

/// A system of linear constraints over `nvars` nonnegative variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearProgram {
    nvars: usize,
    constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Scalar, point: Vec<Scalar> },
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Scalar> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(nvars: usize) -> Self {
        LinearProgram { nvars, constraints: Vec::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Adds `Σ coeff·x_i rel rhs`. Repeated indices are summed.
    pub fn add(&mut self, coeffs: Vec<(usize, Scalar)>, rel: Relation, rhs: Scalar) {
        assert!(coeffs.iter().all(|(i, _)| *i < self.nvars), "variable index out of range");
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn extend(&mut self, other: &LinearProgram) {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        self.constraints.extend(other.constraints.iter().cloned());
    }

    /// Evaluates every constraint at `x`.
    pub fn satisfied_by(&self, x: &[Scalar]) -> bool {
        if x.len() != self.nvars || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Scalar = c.coeffs.iter().map(|(i, a)| a * &x[*i]).sum();
            match c.rel {
                Relation::Le => lhs <= c.rhs,
                Relation::Eq => lhs == c.rhs,
                Relation::Ge => lhs >= c.rhs,
            }
        })
    }

    pub fn feasible_point(&self) -> Option<Vec<Scalar>> {
        match self.solve(None) {
            LpOutcome::Optimal { point, .. } => Some(point),
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("phase 1 is bounded"),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible_point().is_some()
    }

    /// Minimizes `Σ objective_i·x_i`.
    pub fn minimize(&self, objective: &[(usize, Scalar)]) -> LpOutcome {
        self.solve(Some(objective))
    }

    pub fn maximize(&self, objective: &[(usize, Scalar)]) -> LpOutcome {
        let neg: Vec<_> = objective.iter().map(|(i, a)| (*i, -a)).collect();
        match self.solve(Some(&neg)) {
            LpOutcome::Optimal { value, point } => LpOutcome::Optimal { value: -value, point },
            other => other,
        }
    }

    fn solve(&self, objective: Option<&[(usize, Scalar)]>) -> LpOutcome {
        let n = self.nvars;
        let m = self.constraints.len();
        let nslack = self.constraints.iter().filter(|c| c.rel != Relation::Eq).count();
        let slack_base = n;
        let art_base = n + nslack;
        let ncols = art_base + m;

        let mut t = Tableau { rows: Vec::with_capacity(m), rhs: Vec::with_capacity(m), basis: Vec::with_capacity(m) };
        let mut next_slack = slack_base;
        for (r, c) in self.constraints.iter().enumerate() {
            let mut row = vec![Scalar::zero(); ncols];
            for (i, a) in &c.coeffs {
                row[*i] += a;
            }
            match c.rel {
                Relation::Le => {
                    row[next_slack] = Scalar::one();
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Scalar::one();
                    next_slack += 1;
                }
                Relation::Eq => {}
            }
            let mut rhs = c.rhs.clone();
            if rhs.is_negative() {
                for x in row.iter_mut() {
                    *x = -&*x;
                }
                rhs = -rhs;
            }
            row[art_base + r] = Scalar::one();
            t.rows.push(row);
            t.rhs.push(rhs);
            t.basis.push(art_base + r);
        }

        // Phase 1: minimize the sum of artificials.
        let mut cost1 = vec![Scalar::zero(); ncols];
        for c in cost1.iter_mut().skip(art_base) {
            *c = Scalar::one();
        }
        let all = vec![true; ncols];
        if !t.run(&cost1, &all) {
            unreachable!("phase 1 objective is bounded below by zero");
        }
        let infeas: Scalar = t.basis.iter().zip(&t.rhs).filter(|(b, _)| **b >= art_base).map(|(_, r)| r.clone()).sum();
        if infeas.is_positive() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_base {
                if let Some(c) = (0..art_base).find(|&c| !t.rows[r][c].is_zero()) {
                    t.pivot(r, c);
                } else {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }

        let mut allowed = vec![true; ncols];
        for a in allowed.iter_mut().skip(art_base) {
            *a = false;
        }
        let mut cost2 = vec![Scalar::zero(); ncols];
        if let Some(obj) = objective {
            for (i, a) in obj {
                cost2[*i] += a;
            }
            if !t.run(&cost2, &allowed) {
                return LpOutcome::Unbounded;
            }
        }
        let mut point = vec![Scalar::zero(); n];
        for (b, v) in t.basis.iter().zip(&t.rhs) {
            if *b < n {
                point[*b] = v.clone();
            }
        }
        let value = objective.map_or_else(Scalar::zero, |obj| obj.iter().map(|(i, a)| a * &point[*i]).sum());
        LpOutcome::Optimal { value, point }
    }
}

struct Tableau {
    rows: Vec<Vec<Scalar>>,
    rhs: Vec<Scalar>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip().expect("pivot element is nonzero");
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        self.rhs[r] = &self.rhs[r] * &inv;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][c].clone();
            if factor.is_zero() {
                continue;
            }
            for (x, p) in self.rows[i].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
            self.rhs[i] -= &factor * &prhs;
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost` over the columns marked `allowed`. Returns false if unbounded.
    fn run(&mut self, cost: &[Scalar], allowed: &[bool]) -> bool {
        let ncols = cost.len();
        loop {
            // Bland: entering column is the lowest index with negative reduced cost.
            let mut entering = None;
            for j in 0..ncols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    let a = &row[j];
                    if !a.is_zero() {
                        let cb = &cost[self.basis[i]];
                        if !cb.is_zero() {
                            d -= cb * a;
                        }
                    }
                }
                if d.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return true };
            let mut leave: Option<(usize, Scalar)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[j];
                if a.is_positive() {
                    let ratio = &self.rhs[i] / a;
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, j);
        }
    }
}
