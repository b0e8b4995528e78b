use std::fmt;

use super::scalar::{is_negative, is_positive, Scalar};
use super::simplex::dot;
use super::{LinearProgram, LpSolution, LpStatus, VarSign};

const REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Status,
    Dimension,
    PrimalRow,
    PrimalSign,
    DualSign,
    DualConstraint,
    DualityGap,
    ComplementarySlackness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub index: Option<usize>,
    pub amount: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{:?} at {} (by {:e})", self.kind, i, self.amount),
            None => write!(f, "{:?} (by {:e})", self.kind, self.amount),
        }
    }
}

fn tol<S: Scalar>(scale: f64) -> S {
    if S::EXACT {
        S::zero()
    } else {
        S::from_f64_checked(REL_TOL * scale).unwrap_or_else(|_| S::zero())
    }
}

fn abs_dot<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.to_f64() * y.to_f64()).abs()).sum()
}

/// Checks primal feasibility, dual feasibility, the duality gap and
/// complementary slackness of an optimal solution. Float tolerances are
/// relative to the magnitudes involved; exact mode allows no slack.
pub fn check_certificate<S: Scalar>(lp: &LinearProgram<S>, sol: &LpSolution<S>) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut push = |kind, index, amount: &S| out.push(Violation { kind, index, amount: amount.to_f64() });

    if sol.status != LpStatus::Optimal {
        push(ViolationKind::Status, None, &S::zero());
        return Err(out);
    }
    let nv = lp.num_vars();
    let n_ineq = lp.inequalities.len();
    let n_rows = lp.num_rows();
    if sol.primal.len() != nv || sol.dual.len() != n_rows {
        push(ViolationKind::Dimension, None, &S::zero());
        return Err(out);
    }
    let x = &sol.primal;
    let y = &sol.dual;

    for k in 0..n_rows {
        let row = lp.row(k);
        let ax = dot(&row.coeffs, x);
        let scale = 1.0 + row.rhs.to_f64().abs() + abs_dot(&row.coeffs, x);
        let t: S = tol(scale);
        let slack = row.rhs.clone() - ax;
        if k < n_ineq {
            if is_negative(&slack, &t) {
                push(ViolationKind::PrimalRow, Some(k), &slack);
            }
            if is_negative(&y[k], &tol(1.0)) {
                push(ViolationKind::DualSign, Some(k), &y[k]);
            }
            let cs = y[k].clone() * slack.clone();
            if is_positive(&cs.abs_val(), &tol(scale * (1.0 + y[k].to_f64().abs()))) {
                push(ViolationKind::ComplementarySlackness, Some(k), &cs);
            }
        } else if is_positive(&slack.abs_val(), &t) {
            push(ViolationKind::PrimalRow, Some(k), &slack);
        }
    }

    for j in 0..nv {
        let mut aty = S::zero();
        let mut scale = 1.0 + lp.objective[j].to_f64().abs();
        for k in 0..n_rows {
            let a = &lp.row(k).coeffs[j];
            if !a.is_zero() && !y[k].is_zero() {
                aty = aty + a.clone() * y[k].clone();
                scale += (a.to_f64() * y[k].to_f64()).abs();
            }
        }
        let reduced = aty - lp.objective[j].clone();
        let t: S = tol(scale);
        match lp.signs[j] {
            VarSign::Free => {
                if is_positive(&reduced.abs_val(), &t) {
                    push(ViolationKind::DualConstraint, Some(j), &reduced);
                }
            }
            VarSign::Nonnegative => {
                if is_negative(&reduced, &t) {
                    push(ViolationKind::DualConstraint, Some(j), &reduced);
                }
                if is_negative(&x[j], &tol(1.0 + x[j].to_f64().abs())) {
                    push(ViolationKind::PrimalSign, Some(j), &x[j]);
                }
                let cs = x[j].clone() * reduced.clone();
                if is_positive(&cs.abs_val(), &tol(scale * (1.0 + x[j].to_f64().abs()))) {
                    push(ViolationKind::ComplementarySlackness, Some(nv.max(n_rows) + j), &cs);
                }
            }
        }
    }

    let primal_value = dot(&lp.objective, x);
    let rhs: Vec<S> = (0..n_rows).map(|k| lp.row(k).rhs.clone()).collect();
    let dual_value = dot(&rhs, y);
    let gap = dual_value - primal_value.clone();
    let scale = 1.0 + primal_value.to_f64().abs() + abs_dot(&rhs, y);
    if is_positive(&gap.abs_val(), &tol(scale)) {
        push(ViolationKind::DualityGap, None, &gap);
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
