use log::debug;

use super::scalar::{is_negative, is_positive, Scalar};
use super::{LinearProgram, LpSolution, LpStatus, VarSign};
use crate::error::{Error, Result};

/// Dense tableau. Row `rows` holds reduced costs `c_B B^-1 a_j - c_j`,
/// column `cols` holds the right-hand side.
struct Tableau<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
    basis: Vec<usize>,
}

impl<S: Scalar> Tableau<S> {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.width() + j]
    }

    fn set(&mut self, i: usize, j: usize, v: S) {
        let w = self.width();
        self.data[i * w + j] = v;
    }

    fn rhs(&self, i: usize) -> &S {
        self.at(i, self.cols)
    }

    fn reduced_cost(&self, j: usize) -> &S {
        self.at(self.rows, j)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width();
        let p = self.at(r, q).clone();
        let mut prow: Vec<(usize, S)> = Vec::new();
        for j in 0..w {
            let v = &self.data[r * w + j];
            if !v.is_zero() {
                let nv = if j == q { S::one() } else { v.clone() / p.clone() };
                prow.push((j, nv));
            }
        }
        for j in 0..w {
            self.data[r * w + j] = S::zero();
        }
        for (j, v) in &prow {
            self.data[r * w + j] = v.clone();
        }
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + q].clone();
            if f.is_zero() {
                continue;
            }
            for (j, v) in &prow {
                let k = i * w + j;
                self.data[k] = self.data[k].clone() - f.clone() * v.clone();
            }
            self.data[i * w + q] = S::zero();
        }
        self.basis[r] = q;
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct PivotBudget {
    count: usize,
    bland_after: usize,
    limit: usize,
}

fn run_simplex<S: Scalar>(t: &mut Tableau<S>, allowed: &[bool], budget: &mut PivotBudget) -> Result<Outcome> {
    let tol = S::tolerance();
    loop {
        let bland = S::EXACT || budget.count >= budget.bland_after;
        let mut entering: Option<usize> = None;
        for j in 0..t.cols {
            if !allowed[j] || !is_negative(t.reduced_cost(j), &tol) {
                continue;
            }
            match entering {
                None => entering = Some(j),
                Some(e) => {
                    if bland {
                        break;
                    }
                    if t.reduced_cost(j) < t.reduced_cost(e) {
                        entering = Some(j);
                    }
                }
            }
            if bland {
                break;
            }
        }
        let Some(q) = entering else {
            return Ok(Outcome::Optimal);
        };

        let Some(r) = choose_leaving(t, q, bland) else {
            return Ok(Outcome::Unbounded);
        };
        t.pivot(r, q);
        budget.count += 1;
        if budget.count > budget.limit {
            return Err(Error::Lp(format!("exceeded the pivot limit of {}", budget.limit)));
        }
    }
}

/// Minimum-ratio row for entering column `q`. Float mode without Bland's
/// rule uses Harris' two-pass test: the largest pivot among rows whose
/// ratio is within a small feasibility relaxation of the minimum.
fn choose_leaving<S: Scalar>(t: &Tableau<S>, q: usize, bland: bool) -> Option<usize> {
    let piv_tol = S::pivot_tolerance();
    let clamp = |i: usize| if is_negative(t.rhs(i), &S::zero()) { S::zero() } else { t.rhs(i).clone() };
    if !S::EXACT && !bland {
        let mut theta = f64::INFINITY;
        for i in 0..t.rows {
            let a = t.at(i, q).to_f64();
            if a > piv_tol.to_f64() {
                theta = theta.min((clamp(i).to_f64() + HARRIS_DELTA) / a);
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for i in 0..t.rows {
            let a = t.at(i, q).to_f64();
            if a > piv_tol.to_f64() && clamp(i).to_f64() / a <= theta && best.map_or(true, |(_, ba)| a > ba) {
                best = Some((i, a));
            }
        }
        return best.map(|(i, _)| i);
    }
    let mut leaving: Option<(usize, S)> = None;
    for i in 0..t.rows {
        let a = t.at(i, q);
        if !is_positive(a, &piv_tol) {
            continue;
        }
        let ratio = clamp(i) / a.clone();
        match &leaving {
            None => leaving = Some((i, ratio)),
            Some((best_i, best)) => {
                let tie_tol = if S::EXACT {
                    S::zero()
                } else {
                    S::from_f64_checked(1e-12 * (1.0 + best.to_f64().abs())).unwrap_or_else(|_| S::zero())
                };
                let diff = ratio.clone() - best.clone();
                if is_negative(&diff, &tie_tol) || (!is_positive(&diff, &tie_tol) && t.basis[i] < t.basis[*best_i]) {
                    leaving = Some((i, ratio));
                }
            }
        }
    }
    leaving.map(|(i, _)| i)
}

const HARRIS_DELTA: f64 = 1e-9;
const REINVERSIONS: usize = 4;

/// Rebuilds the constraint rows for the current basis from the original
/// rows by Gauss-Jordan elimination with partial pivoting. Returns false
/// if the basis matrix is numerically singular.
fn reinvert<S: Scalar>(t: &mut Tableau<S>, orig: &[S]) -> bool {
    let w = t.width();
    let m = t.rows;
    let mut fresh = Tableau { rows: m, cols: t.cols, data: orig.to_vec(), basis: vec![usize::MAX; m] };
    fresh.data.extend(std::iter::repeat(S::zero()).take(w));
    let mut done = vec![false; m];
    for &q in &t.basis {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = fresh.at(i, q).to_f64().abs();
            if !done[i] && best.map_or(true, |(_, ba)| a > ba) {
                best = Some((i, a));
            }
        }
        match best {
            Some((r, a)) if a > S::pivot_tolerance().to_f64() => {
                fresh.pivot(r, q);
                done[r] = true;
            }
            _ => return false,
        }
    }
    t.data = fresh.data;
    t.basis = fresh.basis;
    true
}

/// Dual simplex pivots that remove small negative basic values left by
/// reinversion while keeping reduced costs nonnegative.
fn repair_primal<S: Scalar>(t: &mut Tableau<S>, allowed: &[bool], budget: &mut PivotBudget) -> Result<()> {
    let piv_tol = S::pivot_tolerance().to_f64();
    loop {
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..t.rows {
            let b = t.rhs(i).to_f64();
            if b < -HARRIS_DELTA && leaving.map_or(true, |(_, lb)| b < lb) {
                leaving = Some((i, b));
            }
        }
        let Some((r, _)) = leaving else {
            return Ok(());
        };
        let mut entering: Option<(usize, f64, f64)> = None;
        for j in 0..t.cols {
            let a = t.at(r, j).to_f64();
            if !allowed[j] || a >= -piv_tol {
                continue;
            }
            let ratio = t.reduced_cost(j).to_f64().max(0.0) / -a;
            let better = match entering {
                None => true,
                Some((_, br, ba)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && -a > ba),
            };
            if better {
                entering = Some((j, ratio, -a));
            }
        }
        let Some((q, _, _)) = entering else {
            return Ok(());
        };
        t.pivot(r, q);
        budget.count += 1;
        if budget.count > budget.limit {
            return Err(Error::Lp(format!("exceeded the pivot limit of {}", budget.limit)));
        }
    }
}

/// Writes the reduced-cost row for `cost` under the current basis.
fn price<S: Scalar>(t: &mut Tableau<S>, cost: &[S]) {
    let (rows, cols) = (t.rows, t.cols);
    for j in 0..=cols {
        let mut acc = S::zero();
        for k in 0..rows {
            let cb = &cost[t.basis[k]];
            if !cb.is_zero() {
                acc = acc + cb.clone() * t.at(k, j).clone();
            }
        }
        if j < cols {
            acc = acc - cost[j].clone();
        }
        t.set(rows, j, acc);
    }
}

/// Solves the program with a two-phase primal simplex.
pub fn solve<S: Scalar>(lp: &LinearProgram<S>) -> Result<LpSolution<S>> {
    lp.check_well_formed()?;
    let nv = lp.num_vars();
    let n_ineq = lp.inequalities.len();
    let n_rows = lp.num_rows();

    // Structural columns: one per variable, plus a negative part for free ones.
    let mut pos_col = Vec::with_capacity(nv);
    let mut neg_col = Vec::with_capacity(nv);
    let mut ns = 0;
    for sign in &lp.signs {
        pos_col.push(ns);
        ns += 1;
        if *sign == VarSign::Free {
            neg_col.push(Some(ns));
            ns += 1;
        } else {
            neg_col.push(None);
        }
    }

    let row_sign: Vec<bool> = (0..n_rows).map(|k| !is_negative(&lp.row(k).rhs, &S::zero())).collect();
    let n_art = (0..n_rows).filter(|&k| k >= n_ineq || !row_sign[k]).count();
    let art_start = ns + n_ineq;
    let cols = art_start + n_art;

    let mut t = Tableau {
        rows: n_rows,
        cols,
        data: vec![S::zero(); (n_rows + 1) * (cols + 1)],
        basis: vec![0; n_rows],
    };
    let mut identity_col = vec![0; n_rows];
    let mut is_art = vec![false; cols];
    let mut next_art = art_start;
    for k in 0..n_rows {
        let row = lp.row(k);
        let flip = |v: &S| if row_sign[k] { v.clone() } else { -v.clone() };
        for (j, a) in row.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            t.set(k, pos_col[j], flip(a));
            if let Some(nc) = neg_col[j] {
                t.set(k, nc, -flip(a));
            }
        }
        t.set(k, cols, flip(&row.rhs));
        if k < n_ineq {
            t.set(k, ns + k, flip(&S::one()));
        }
        if k < n_ineq && row_sign[k] {
            identity_col[k] = ns + k;
        } else {
            t.set(k, next_art, S::one());
            is_art[next_art] = true;
            identity_col[k] = next_art;
            next_art += 1;
        }
        t.basis[k] = identity_col[k];
    }

    let orig: Vec<S> = if S::EXACT { Vec::new() } else { t.data[..n_rows * (cols + 1)].to_vec() };

    let mut budget = PivotBudget {
        count: 0,
        bland_after: 10 * n_rows.max(1),
        limit: 50 * (n_rows + cols) + 1000,
    };

    if n_art > 0 {
        // Phase I: maximize -sum(artificials).
        let phase1: Vec<S> = is_art.iter().map(|&a| if a { -S::one() } else { S::zero() }).collect();
        price(&mut t, &phase1);
        let all = vec![true; cols];
        run_simplex(&mut t, &all, &mut budget)?;
        let infeasibility = -t.rhs(n_rows).clone();
        let scale: f64 = 1.0 + (0..n_rows).map(|k| lp.row(k).rhs.to_f64().abs()).sum::<f64>();
        let feas_tol = if S::EXACT { S::zero() } else { S::from_f64_checked(1e-9 * scale)? };
        if is_positive(&infeasibility, &feas_tol) {
            debug!("phase I ended with infeasibility {:?}", infeasibility);
            return Ok(LpSolution::not_optimal(LpStatus::Infeasible, budget.count));
        }
        // Drive zero-level artificials out of the basis where possible.
        for k in 0..n_rows {
            if !is_art[t.basis[k]] {
                continue;
            }
            let mut best: Option<usize> = None;
            for j in 0..cols {
                if is_art[j] || t.at(k, j).is_zero() {
                    continue;
                }
                if !is_positive(&t.at(k, j).abs_val(), &S::pivot_tolerance()) {
                    continue;
                }
                match best {
                    None => best = Some(j),
                    Some(b) if !S::EXACT && t.at(k, j).abs_val() > t.at(k, b).abs_val() => best = Some(j),
                    _ => {}
                }
                if S::EXACT {
                    break;
                }
            }
            if let Some(j) = best {
                t.pivot(k, j);
            }
        }
    }

    // Phase II.
    let mut cost = vec![S::zero(); cols];
    for j in 0..nv {
        cost[pos_col[j]] = lp.objective[j].clone();
        if let Some(nc) = neg_col[j] {
            cost[nc] = -lp.objective[j].clone();
        }
    }
    price(&mut t, &cost);
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    if let Outcome::Unbounded = run_simplex(&mut t, &allowed, &mut budget)? {
        return Ok(LpSolution::not_optimal(LpStatus::Unbounded, budget.count));
    }
    if !S::EXACT {
        // Recompute the tableau from the original rows to shed accumulated
        // rounding, and resume if that exposes a non-optimal basis.
        for _ in 0..REINVERSIONS {
            if !reinvert(&mut t, &orig) {
                break;
            }
            price(&mut t, &cost);
            let before = budget.count;
            repair_primal(&mut t, &allowed, &mut budget)?;
            if let Outcome::Unbounded = run_simplex(&mut t, &allowed, &mut budget)? {
                return Ok(LpSolution::not_optimal(LpStatus::Unbounded, budget.count));
            }
            if budget.count == before {
                break;
            }
        }
    }

    let mut col_value = vec![S::zero(); cols];
    for k in 0..n_rows {
        col_value[t.basis[k]] = t.rhs(k).clone();
    }
    let primal: Vec<S> = (0..nv)
        .map(|j| {
            let p = col_value[pos_col[j]].clone();
            match neg_col[j] {
                Some(nc) => p - col_value[nc].clone(),
                None => p,
            }
        })
        .collect();
    let dual: Vec<S> = (0..n_rows)
        .map(|k| {
            let y = t.reduced_cost(identity_col[k]).clone();
            if row_sign[k] {
                y
            } else {
                -y
            }
        })
        .collect();
    let objective = dot(&lp.objective, &primal);
    let tol = S::tolerance();
    let tight_rows = (0..n_rows)
        .filter(|&k| {
            if k >= n_ineq {
                return true;
            }
            let row = lp.row(k);
            let slack = row.rhs.clone() - dot(&row.coeffs, &primal);
            let row_tol = if S::EXACT {
                tol.clone()
            } else {
                S::from_f64_checked(1e-9 * (1.0 + row.rhs.to_f64().abs())).unwrap_or(tol.clone())
            };
            !is_positive(&slack, &row_tol)
        })
        .collect();

    Ok(LpSolution { status: LpStatus::Optimal, objective, primal, dual, tight_rows, pivots: budget.count })
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| {
        if x.is_zero() || y.is_zero() {
            acc
        } else {
            acc + x.clone() * y.clone()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{check_certificate, BigRational};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn single_bound() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_le(vec![1.0], 3.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 3.0);
        assert_eq!(s.dual, vec![1.0]);
        assert_eq!(s.tight_rows, vec![0]);
    }

    #[test]
    fn simplex_corner() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_le(vec![1.0, 1.0], 1.0);
        let s = solve(&lp).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!(check_certificate(&lp, &s).is_ok());
    }

    #[test]
    fn textbook_problem_exact() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let mut lp = LinearProgram::new(vec![q(3, 1), q(5, 1)]);
        lp.add_le(vec![q(1, 1), q(0, 1)], q(4, 1))
            .add_le(vec![q(0, 1), q(2, 1)], q(12, 1))
            .add_le(vec![q(3, 1), q(2, 1)], q(18, 1));
        let s = solve(&lp).unwrap();
        assert_eq!(s.objective, q(36, 1));
        assert_eq!(s.primal, vec![q(2, 1), q(6, 1)]);
        assert_eq!(s.dual, vec![q(0, 1), q(3, 2), q(1, 1)]);
        assert!(check_certificate(&lp, &s).is_ok());
    }

    #[test]
    fn negative_rhs_and_equalities() {
        // max -x - y  s.t.  -x - y <= -2 (x + y >= 2), x - y = 0.5
        let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
        lp.add_le(vec![-1.0, -1.0], -2.0).add_eq(vec![1.0, -1.0], 0.5);
        let s = solve(&lp).unwrap();
        assert!((s.objective + 2.0).abs() < 1e-12);
        assert!((s.primal[0] - 1.25).abs() < 1e-12);
        assert!(check_certificate(&lp, &s).is_ok());
    }

    #[test]
    fn free_variables() {
        // max x  s.t.  x - y <= -1, y <= 2, x free, y free -> x = 1
        let mut lp = LinearProgram::new(vec![1.0, 0.0]);
        lp.set_sign(0, VarSign::Free).set_sign(1, VarSign::Free);
        lp.add_le(vec![1.0, -1.0], -1.0).add_le(vec![0.0, 1.0], 2.0);
        let s = solve(&lp).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!(check_certificate(&lp, &s).is_ok());

        // max -x with x free and x >= -3 -> 3
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.set_sign(0, VarSign::Free).add_le(vec![-1.0], 3.0);
        let s = solve(&lp).unwrap();
        assert!((s.objective - 3.0).abs() < 1e-12);
        assert!((s.primal[0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_le(vec![1.0], 1.0).add_le(vec![-1.0], -2.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(vec![1.0, 0.0]);
        lp.add_le(vec![-1.0, 1.0], 1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);

        let mut lp = LinearProgram::new(vec![q(1, 1)]);
        lp.add_eq(vec![q(1, 1)], q(1, 1)).add_eq(vec![q(1, 1)], q(2, 1));
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![q(1, 1), q(2, 1)]);
        lp.add_eq(vec![q(1, 1), q(1, 1)], q(1, 1))
            .add_eq(vec![q(2, 1), q(2, 1)], q(2, 1));
        let s = solve(&lp).unwrap();
        assert_eq!(s.objective, q(2, 1));
        assert!(check_certificate(&lp, &s).is_ok());
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example: cycles under the textbook largest-coefficient rule
        // without anti-cycling safeguards.
        let c = vec![q(3, 4), q(-150, 1), q(1, 50), q(-6, 1)];
        let mut lp = LinearProgram::new(c);
        lp.add_le(vec![q(1, 4), q(-60, 1), q(-1, 25), q(9, 1)], q(0, 1))
            .add_le(vec![q(1, 2), q(-90, 1), q(-1, 50), q(3, 1)], q(0, 1))
            .add_le(vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1)], q(1, 1));
        let s = solve(&lp).unwrap();
        assert_eq!(s.objective, q(1, 20));
        let f = solve(&lp_to_f64(&lp)).unwrap();
        assert!((f.objective - 0.05).abs() < 1e-12);
    }

    fn lp_to_f64(lp: &LinearProgram<BigRational>) -> LinearProgram<f64> {
        let c = |v: &[BigRational]| v.iter().map(|x| x.to_f64()).collect::<Vec<_>>();
        let mut out = LinearProgram::new(c(&lp.objective));
        for r in &lp.inequalities {
            out.add_le(c(&r.coeffs), r.rhs.to_f64());
        }
        for r in &lp.equalities {
            out.add_eq(c(&r.coeffs), r.rhs.to_f64());
        }
        out
    }

    #[test]
    fn deterministic() {
        let mut lp = LinearProgram::new(vec![2.0, 3.0, 1.0]);
        lp.add_le(vec![1.0, 1.0, 1.0], 4.0).add_le(vec![1.0, 3.0, 0.0], 6.0).add_eq(vec![1.0, 0.0, 1.0], 1.0);
        assert_eq!(solve(&lp).unwrap(), solve(&lp).unwrap());
    }
}
