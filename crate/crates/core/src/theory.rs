//! Closed forms for the worst-case ratio between the best single relay and
//! the full network.
//!
//! The extremal normalized networks group their `z` values into `m` levels
//! `beta_1 < ... < beta_m`. At the optimum the levels satisfy the recurrence
//! `b_{i+1} - sigma b_i + b_{i-1} = 0` with `beta_i = b_{i-1} / b_i`, and the
//! value of the extremal problem is `sigma + 2`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Worst-case value of `C_1 / C_n` over all networks with `n` relays.
pub fn bound(n: usize) -> Result<f64> {
    Ok(1.0 / opt4(n)?)
}

/// `2 + 2 cos(2 pi / (n + 2))`, the largest possible `C_n / C_1`.
pub fn opt4(n: usize) -> Result<f64> {
    if n < 1 {
        return invalid("n must be at least 1");
    }
    Ok(2.0 + 2.0 * (2.0 * PI / (n as f64 + 2.0)).cos())
}

/// Which ends of the level sequence are pinned: `beta_1 = 0` and/or
/// `beta_m = infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryCase {
    /// `beta_1 > 0`, `beta_m < infinity`.
    I,
    /// `beta_1 > 0`, `beta_m = infinity`.
    II,
    /// `beta_1 = 0`, `beta_m < infinity`.
    III,
    /// `beta_1 = 0`, `beta_m = infinity`.
    IV,
}

impl BoundaryCase {
    pub const ALL: [BoundaryCase; 4] = [BoundaryCase::I, BoundaryCase::II, BoundaryCase::III, BoundaryCase::IV];

    pub fn first_is_zero(self) -> bool {
        matches!(self, BoundaryCase::III | BoundaryCase::IV)
    }

    pub fn last_is_infinite(self) -> bool {
        matches!(self, BoundaryCase::II | BoundaryCase::IV)
    }
}

impl fmt::Display for BoundaryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// `sigma_{n,m}` for the given case.
pub fn sigma_nm(m: usize, case: BoundaryCase) -> Result<f64> {
    if m < 1 {
        return invalid("m must be at least 1");
    }
    let m = m as f64;
    let denom = match case {
        BoundaryCase::I => 2.0 * m + 2.0,
        BoundaryCase::II | BoundaryCase::III => 2.0 * m + 1.0,
        BoundaryCase::IV => 2.0 * m,
    };
    Ok(2.0 * (2.0 * PI / denom).cos())
}

/// Smallest admissible number of levels. With both ends pinned a single
/// level would need `beta_1 = 0 = infinity`.
pub fn min_m(case: BoundaryCase) -> usize {
    match case {
        BoundaryCase::IV => 2,
        _ => 1,
    }
}

/// Largest `m` whose group-size constraints fit into `n` relays, or 0 if
/// none does.
pub fn max_m(n: usize, case: BoundaryCase) -> usize {
    let m = match case {
        BoundaryCase::I => n / 2,
        BoundaryCase::II | BoundaryCase::III => (n + 1) / 2,
        BoundaryCase::IV => (n + 2) / 2,
    };
    if m < min_m(case) {
        0
    } else {
        m
    }
}

/// Roots `U`, `V` of `X^2 - sigma X + 1`.
pub fn characteristic_roots(sigma: f64) -> Result<(Complex64, Complex64)> {
    let disc = sigma * sigma - 4.0;
    if disc.abs() < 1e-12 {
        return Err(Error::DegenerateRoot(sigma));
    }
    let root = Complex64::new(disc, 0.0).sqrt();
    Ok(((sigma + root) / 2.0, (sigma - root) / 2.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceSolution {
    pub m: usize,
    pub case: BoundaryCase,
    pub sigma: f64,
    pub root_u: Complex64,
    pub root_v: Complex64,
    pub u: Complex64,
    pub v: Complex64,
    /// `b_0 .. b_m`.
    pub b: Vec<f64>,
}

const CROSS_CHECK_TOL: f64 = 1e-9;
const TERMINAL_TOL: f64 = 1e-8;

/// Solves the level recurrence for `m` levels, both through the closed form
/// `u U^i + v V^i` and by direct iteration, and checks the two agree.
pub fn recurrence_solution(m: usize, case: BoundaryCase) -> Result<RecurrenceSolution> {
    let sigma = sigma_nm(m, case)?;
    let (root_u, root_v) = characteristic_roots(sigma)?;
    let (u, v, b0, b1) = if case.first_is_zero() {
        let u = Complex64::new(1.0, 0.0) / Complex64::new(sigma * sigma - 4.0, 0.0).sqrt();
        (u, -u, 0.0, 1.0)
    } else {
        ((root_u - 1.0) / (sigma - 2.0), (root_v - 1.0) / (sigma - 2.0), 1.0, sigma + 1.0)
    };

    let mut b = vec![b0, b1];
    while b.len() <= m {
        let k = b.len();
        b.push(sigma * b[k - 1] - b[k - 2]);
    }
    b.truncate(m + 1);

    for (i, &bi) in b.iter().enumerate() {
        let closed = u * root_u.powu(i as u32) + v * root_v.powu(i as u32);
        if closed.im.abs() > CROSS_CHECK_TOL {
            return Err(Error::InternalConsistency(format!("b_{i} has imaginary part {}", closed.im)));
        }
        if (closed.re - bi).abs() > CROSS_CHECK_TOL * (1.0 + bi.abs()) {
            return Err(Error::InternalConsistency(format!(
                "b_{i}: closed form {} differs from recurrence {bi}",
                closed.re
            )));
        }
    }

    let residual = if case.last_is_infinite() {
        b[m]
    } else {
        b[m - 1] - (sigma + 1.0) * b[m]
    };
    if residual.abs() > TERMINAL_TOL {
        return Err(Error::InternalConsistency(format!(
            "terminal condition fails for m = {m}, case {case}: residual {residual}"
        )));
    }
    Ok(RecurrenceSolution { m, case, sigma, root_u, root_v, u, v, b })
}

/// Real number or `+infinity`, kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    /// Float view for printing and comparisons.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    fn recip(self) -> Extended {
        match self {
            Extended::Infinite => Extended::Finite(0.0),
            Extended::Finite(x) if x == 0.0 => Extended::Infinite,
            Extended::Finite(x) => Extended::Finite(1.0 / x),
        }
    }

    fn plus(self, c: f64) -> Extended {
        match self {
            Extended::Infinite => Extended::Infinite,
            Extended::Finite(x) => Extended::Finite(x + c),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaProfile {
    pub n: usize,
    pub m: usize,
    pub case: BoundaryCase,
    pub sigma: f64,
    pub betas: Vec<Extended>,
    /// Last relay (1-based) of each group; the final entry is `n`.
    pub boundaries: Vec<usize>,
}

impl BetaProfile {
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut prev = 0;
        self.boundaries
            .iter()
            .map(|&t| {
                let s = t - prev;
                prev = t;
                s
            })
            .collect()
    }

    /// `z_1 .. z_n` of the extremal network: each relay takes its group level.
    pub fn z_levels(&self) -> Vec<Extended> {
        self.group_sizes()
            .iter()
            .zip(&self.betas)
            .flat_map(|(&size, &beta)| std::iter::repeat(beta).take(size))
            .collect()
    }
}

/// Minimal group sizes for `m` levels; the slack goes to the last group.
fn group_sizes(n: usize, m: usize, case: BoundaryCase) -> Vec<usize> {
    let mut sizes = if m == 1 {
        vec![if case == BoundaryCase::I { 2 } else { 1 }]
    } else {
        let mut s = vec![2; m];
        if case.first_is_zero() {
            s[0] = 1;
        }
        if case.last_is_infinite() {
            s[m - 1] = 1;
        }
        s
    };
    let used: usize = sizes.iter().sum();
    sizes[m - 1] += n - used;
    sizes
}

/// Optimal levels `beta_i = b_{i-1} / b_i` and group boundaries.
pub fn beta_profile(n: usize, m: usize, case: BoundaryCase) -> Result<BetaProfile> {
    let hi = max_m(n, case);
    if m < min_m(case) || m > hi {
        return invalid(format!("m = {m} outside the admissible range for n = {n}, case {case} (max {hi})"));
    }
    let sol = recurrence_solution(m, case)?;
    let mut betas: Vec<Extended> = (1..=m).map(|i| Extended::Finite(sol.b[i - 1] / sol.b[i])).collect();
    if case.first_is_zero() {
        betas[0] = Extended::Finite(0.0);
    }
    if case.last_is_infinite() {
        betas[m - 1] = Extended::Infinite;
    }
    for w in betas.windows(2) {
        let increasing = match (w[0], w[1]) {
            (Extended::Finite(a), Extended::Finite(b)) => a < b,
            (Extended::Finite(_), Extended::Infinite) => true,
            (Extended::Infinite, _) => false,
        };
        if !increasing {
            return Err(Error::InternalConsistency(format!("levels not increasing: {} then {}", w[0], w[1])));
        }
    }
    if let Extended::Finite(b) = betas[0] {
        if b < 0.0 {
            return Err(Error::InternalConsistency(format!("negative first level {b}")));
        }
    }
    let mut boundaries = Vec::with_capacity(m);
    let mut acc = 0;
    for s in group_sizes(n, m, case) {
        acc += s;
        boundaries.push(acc);
    }
    Ok(BetaProfile { n, m, case, sigma: sol.sigma, betas, boundaries })
}

/// `G_0 = 1 + 1/beta_1`, `G_i = 2 + beta_i + 1/beta_{i+1}`, `G_m = 1 + beta_m`.
pub fn g_values(profile: &BetaProfile) -> Vec<Extended> {
    let b = &profile.betas;
    let m = b.len();
    let mut out = Vec::with_capacity(m + 1);
    out.push(b[0].recip().plus(1.0));
    for i in 0..m - 1 {
        out.push(match (b[i], b[i + 1].recip()) {
            (Extended::Finite(x), Extended::Finite(y)) => Extended::Finite(2.0 + x + y),
            _ => Extended::Infinite,
        });
    }
    out.push(b[m - 1].plus(1.0));
    out
}

/// Every admissible `(m, case)` whose `sigma` attains the maximum for `n`,
/// within `1e-12`.
pub fn attaining_pairs(n: usize) -> Vec<(usize, BoundaryCase)> {
    let all: Vec<(usize, BoundaryCase, f64)> = BoundaryCase::ALL
        .iter()
        .flat_map(|&case| (min_m(case)..=max_m(n, case)).map(move |m| (m, case)))
        .filter_map(|(m, case)| sigma_nm(m, case).ok().map(|s| (m, case, s)))
        .collect();
    let best = all.iter().map(|x| x.2).fold(f64::NEG_INFINITY, f64::max);
    all.into_iter().filter(|x| best - x.2 <= 1e-12).map(|(m, c, _)| (m, c)).collect()
}
