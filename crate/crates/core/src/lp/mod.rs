//! Dense two-phase primal simplex.
//!
//! Problems have the form
//!
//! ```text
//! maximize    c . x
//! subject to  A x <= b     (inequality rows)
//!             E x  = d     (equality rows)
//!             x_j >= 0 or free, per variable
//! ```
//!
//! The solver is generic over [`Scalar`]: `f64` for float mode, and
//! [`num_rational::BigRational`] for exact mode (Bland's rule throughout).

mod certificate;
mod scalar;
mod simplex;

pub use certificate::{check_certificate, Violation, ViolationKind};
pub use num_rational::BigRational;
pub use scalar::{Scalar, EXACT_MAX_DIGITS};
pub use simplex::solve;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarSign {
    Free,
    Nonnegative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row<S> {
    pub coeffs: Vec<S>,
    pub rhs: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub inequalities: Vec<Row<S>>,
    pub equalities: Vec<Row<S>>,
    pub signs: Vec<VarSign>,
}

impl<S: Scalar> LinearProgram<S> {
    /// An empty maximization problem over `num_vars` nonnegative variables.
    pub fn new(objective: Vec<S>) -> Self {
        let signs = vec![VarSign::Nonnegative; objective.len()];
        Self { objective, inequalities: Vec::new(), equalities: Vec::new(), signs }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.inequalities.len() + self.equalities.len()
    }

    pub fn set_sign(&mut self, var: usize, sign: VarSign) -> &mut Self {
        self.signs[var] = sign;
        self
    }

    pub fn add_le(&mut self, coeffs: Vec<S>, rhs: S) -> &mut Self {
        self.inequalities.push(Row { coeffs, rhs });
        self
    }

    pub fn add_eq(&mut self, coeffs: Vec<S>, rhs: S) -> &mut Self {
        self.equalities.push(Row { coeffs, rhs });
        self
    }

    /// Row `k` counting inequalities first, then equalities.
    pub fn row(&self, k: usize) -> &Row<S> {
        if k < self.inequalities.len() {
            &self.inequalities[k]
        } else {
            &self.equalities[k - self.inequalities.len()]
        }
    }

    pub fn check_well_formed(&self) -> Result<()> {
        let width = self.objective.len();
        if self.signs.len() != width {
            return invalid("sign vector width differs from the objective");
        }
        for (k, row) in self.inequalities.iter().chain(&self.equalities).enumerate() {
            if row.coeffs.len() != width {
                return invalid(format!(
                    "row {k} has {} coefficients, expected {width}",
                    row.coeffs.len()
                ));
            }
        }
        if !S::EXACT {
            let all = self
                .objective
                .iter()
                .chain(self.inequalities.iter().chain(&self.equalities).flat_map(|r| {
                    r.coeffs.iter().chain(std::iter::once(&r.rhs))
                }));
            for v in all {
                if !v.to_f64().is_finite() {
                    return invalid("non-finite coefficient");
                }
            }
        }
        Ok(())
    }
}

impl LinearProgram<f64> {
    /// Converts to exact rationals. Fails on values that are not exact
    /// decimals (see [`EXACT_MAX_DIGITS`]).
    pub fn to_exact(&self) -> Result<LinearProgram<BigRational>> {
        let conv = |v: &[f64]| v.iter().map(|&x| BigRational::from_f64_checked(x)).collect::<Result<Vec<_>>>();
        let conv_rows = |rows: &[Row<f64>]| {
            rows.iter()
                .map(|r| Ok(Row { coeffs: conv(&r.coeffs)?, rhs: BigRational::from_f64_checked(r.rhs)? }))
                .collect::<Result<Vec<_>>>()
        };
        Ok(LinearProgram {
            objective: conv(&self.objective)?,
            inequalities: conv_rows(&self.inequalities)?,
            equalities: conv_rows(&self.equalities)?,
            signs: self.signs.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve`]. Primal/dual vectors are empty unless the status is
/// optimal. Duals are ordered like rows: inequalities first, then
/// equalities; inequality duals are nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    pub objective: S,
    pub primal: Vec<S>,
    pub dual: Vec<S>,
    pub tight_rows: Vec<usize>,
    pub pivots: usize,
}

impl<S: Scalar> LpSolution<S> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub(crate) fn not_optimal(status: LpStatus, pivots: usize) -> Self {
        Self {
            status,
            objective: S::zero(),
            primal: Vec::new(),
            dual: Vec::new(),
            tight_rows: Vec::new(),
            pivots,
        }
    }
}

/// Indices of strictly positive primal entries: above `1e-9` in float mode,
/// nonzero in exact mode.
pub fn support<S: Scalar>(sol: &LpSolution<S>) -> Vec<usize> {
    support_of(&sol.primal)
}

pub(crate) fn support_of<S: Scalar>(values: &[S]) -> Vec<usize> {
    let tol = S::tolerance();
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| if S::EXACT { !v.is_zero() } else { v.abs_val() > tol })
        .map(|(i, _)| i)
        .collect()
}
