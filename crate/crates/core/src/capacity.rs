//! Approximate capacity of a half-duplex diamond network.
//!
//! A schedule `lambda` assigns a time fraction to each of the `2^n` states
//! (the set of transmitting relays). The approximate capacity is
//!
//! ```text
//! max_lambda  min_Omega  sum_S  lambda_S * cut(S, Omega)
//! cut(S, Omega) = max { ell_i : i not in S, i not in Omega }
//!               + max { r_i   : i in S,     i in Omega }
//! ```
//!
//! where `Omega` ranges over the relays on the source side of a cut and the
//! maximum of an empty set is 0. Relay `i` (0-based) is bit `i` of a mask.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::lp::{
    check_certificate, solve, support_of, BigRational, LinearProgram, LpSolution, Scalar, SolveMode, VarSign,
};
use crate::network::{DiamondNetwork, NormalizedNetwork};

/// Largest network the full LP is built for.
pub const MAX_RELAYS: usize = 12;

/// Schedules must sum to 1 within this tolerance.
pub const SCHEDULE_SUM_TOL: f64 = 1e-12;

/// Set of transmitting relays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(pub u32);

/// Set of relays on the source side of a cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cut(pub u32);

macro_rules! relay_set {
    ($t:ident) => {
        impl $t {
            /// Builds the set from 0-based relay indices.
            pub fn from_relays(relays: &[usize]) -> Self {
                $t(relays.iter().fold(0, |m, &i| m | (1 << i)))
            }

            pub fn contains(self, relay: usize) -> bool {
                self.0 >> relay & 1 == 1
            }

            /// 0-based members in increasing order.
            pub fn relays(self, n: usize) -> Vec<usize> {
                (0..n).filter(|&i| self.contains(i)).collect()
            }

            pub fn all(n: usize) -> impl Iterator<Item = $t> {
                (0..1u32 << n).map($t)
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let members: Vec<String> = (0..32).filter(|&i| self.contains(i)).map(|i| (i + 1).to_string()).collect();
                write!(f, "{{{}}}", members.join(","))
            }
        }
    };
}

relay_set!(State);
relay_set!(Cut);

fn check_size(n: usize) -> Result<()> {
    if n > MAX_RELAYS {
        Err(Error::SizeLimit { n, max: MAX_RELAYS })
    } else {
        Ok(())
    }
}

/// Cut value over generic link values.
fn cut_value_of<S: Scalar>(ell: &[S], r: &[S], s: State, omega: Cut) -> S {
    let mut max_l = S::zero();
    let mut max_r = S::zero();
    for i in 0..ell.len() {
        match (s.contains(i), omega.contains(i)) {
            (false, false) if ell[i] > max_l => max_l = ell[i].clone(),
            (true, true) if r[i] > max_r => max_r = r[i].clone(),
            _ => {}
        }
    }
    max_l + max_r
}

/// Information that can cross cut `omega` while the relays in `s` transmit.
pub fn cut_value(net: &DiamondNetwork, s: State, omega: Cut) -> f64 {
    let mut max_l: f64 = 0.0;
    let mut max_r: f64 = 0.0;
    for (i, link) in net.relays().iter().enumerate() {
        match (s.contains(i), omega.contains(i)) {
            (false, false) => max_l = max_l.max(link.ell),
            (true, true) => max_r = max_r.max(link.r),
            _ => {}
        }
    }
    max_l + max_r
}

/// Full capacity LP. Column 0 is `t` (free), column `1 + mask` is
/// `lambda_mask`. Rows: one cut per `Omega` in ascending mask order, then
/// the equality `sum lambda = 1`.
pub fn build_full_lp<S: Scalar>(net: &DiamondNetwork) -> Result<LinearProgram<S>> {
    let n = net.len();
    check_size(n)?;
    let ell = net.relays().iter().map(|l| S::from_f64_checked(l.ell)).collect::<Result<Vec<_>>>()?;
    let r = net.relays().iter().map(|l| S::from_f64_checked(l.r)).collect::<Result<Vec<_>>>()?;
    let states = 1usize << n;
    let mut objective = vec![S::zero(); states + 1];
    objective[0] = S::one();
    let mut lp = LinearProgram::new(objective);
    lp.set_sign(0, VarSign::Free);
    for omega in Cut::all(n) {
        let mut row = Vec::with_capacity(states + 1);
        row.push(S::one());
        row.extend(State::all(n).map(|s| -cut_value_of(&ell, &r, s, omega)));
        lp.add_le(row, S::zero());
    }
    let mut eq = vec![S::one(); states + 1];
    eq[0] = S::zero();
    lp.add_eq(eq, S::one());
    Ok(lp)
}

/// Probability distribution over states.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    n: usize,
    weights: BTreeMap<State, f64>,
}

impl Schedule {
    /// Repeated states are merged by adding their weights; zero weights are
    /// dropped.
    pub fn new(n: usize, weights: impl IntoIterator<Item = (State, f64)>) -> Result<Self> {
        if n == 0 || n > 31 {
            return invalid(format!("schedule width {n} out of range"));
        }
        let mut map: BTreeMap<State, f64> = BTreeMap::new();
        for (s, w) in weights {
            if s.0 >> n != 0 {
                return invalid(format!("state {s} has relays beyond {n}"));
            }
            if !w.is_finite() || w < 0.0 {
                return invalid(format!("state {s} has invalid weight {w}"));
            }
            *map.entry(s).or_insert(0.0) += w;
        }
        map.retain(|_, w| *w != 0.0);
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > SCHEDULE_SUM_TOL {
            return invalid(format!("schedule weights sum to {total}, not 1"));
        }
        Ok(Self { n, weights: map })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &BTreeMap<State, f64> {
        &self.weights
    }

    pub fn weight(&self, s: State) -> f64 {
        self.weights.get(&s).copied().unwrap_or(0.0)
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    /// `{"<mask>": "<weight>", ...}` with weights as decimal strings.
    pub fn to_json_value(&self) -> Value {
        let map: serde_json::Map<String, Value> =
            self.weights.iter().map(|(s, w)| (s.0.to_string(), Value::String(format!("{w}")))).collect();
        Value::Object(map)
    }

    /// Reads the format of [`Schedule::to_json_value`]. Weights may also be
    /// plain JSON numbers.
    pub fn from_json_value(n: usize, value: &Value) -> Result<Self> {
        let Some(map) = value.as_object() else {
            return invalid("schedule must be a JSON object mapping state masks to weights");
        };
        let mut weights = Vec::with_capacity(map.len());
        for (k, v) in map {
            let mask: u32 = k.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad state mask {k:?}")))?;
            let w = match v {
                Value::String(s) => s.trim().parse::<f64>().ok(),
                Value::Number(x) => x.as_f64(),
                _ => None,
            };
            let Some(w) = w else {
                return invalid(format!("bad weight for state {k}"));
            };
            weights.push((State(mask), w));
        }
        Self::new(n, weights)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    pub mode: SolveMode,
    pub pivots: usize,
    /// Exact optimum as `p/q`, in exact mode only.
    pub exact_value: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub value: f64,
    pub schedule: Schedule,
    pub tight_cuts: Vec<Cut>,
    pub support_size: usize,
    pub diagnostics: SolverDiagnostics,
}

impl CapacityResult {
    pub fn to_json_value(&self) -> Value {
        json!({
            "value": self.value,
            "schedule": self.schedule.to_json_value(),
            "tight_cuts": self.tight_cuts.iter().map(|c| c.0).collect::<Vec<_>>(),
            "support_size": self.support_size,
            "mode": self.diagnostics.mode,
            "pivots": self.diagnostics.pivots,
            "exact_value": self.diagnostics.exact_value,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }
}

fn extract<S: Scalar>(n: usize, lp: &LinearProgram<S>, sol: &LpSolution<S>, mode: SolveMode) -> Result<CapacityResult> {
    if !sol.is_optimal() {
        return Err(Error::Lp(format!("capacity LP ended with status {:?}", sol.status)));
    }
    if let Err(v) = check_certificate(lp, sol) {
        let msg = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ");
        return Err(Error::InternalConsistency(format!("capacity LP certificate rejected: {msg}")));
    }
    let lambda = &sol.primal[1..];
    let support = support_of(lambda);
    let mut raw: Vec<(State, f64)> = support.iter().map(|&k| (State(k as u32), lambda[k].to_f64().max(0.0))).collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut raw {
        *w /= total;
    }
    let tight_cuts = sol.tight_rows.iter().filter(|&&k| k < 1 << n).map(|&k| Cut(k as u32)).collect();
    Ok(CapacityResult {
        value: sol.primal[0].to_f64(),
        schedule: Schedule::new(n, raw)?,
        tight_cuts,
        support_size: support.len(),
        diagnostics: SolverDiagnostics {
            mode,
            pivots: sol.pivots,
            exact_value: if S::EXACT { Some(sol.primal[0].render()) } else { None },
        },
    })
}

/// Solves the full capacity LP and checks its optimality certificate.
pub fn approximate_capacity(net: &DiamondNetwork, mode: SolveMode) -> Result<CapacityResult> {
    let n = net.len();
    match mode {
        SolveMode::Float => {
            let lp = build_full_lp::<f64>(net)?;
            extract(n, &lp, &solve(&lp)?, mode)
        }
        SolveMode::Exact => {
            let lp = build_full_lp::<BigRational>(net)?;
            extract(n, &lp, &solve(&lp)?, mode)
        }
    }
}

/// Float-mode capacity value.
pub fn capacity(net: &DiamondNetwork) -> Result<f64> {
    Ok(approximate_capacity(net, SolveMode::Float)?.value)
}

/// Rate achieved by a fixed schedule: the smallest weighted cut.
pub fn schedule_rate(net: &DiamondNetwork, sched: &Schedule) -> Result<f64> {
    let n = net.len();
    check_size(n)?;
    if sched.n() != n {
        return invalid(format!("schedule is for {} relays, network has {n}", sched.n()));
    }
    let rate = Cut::all(n)
        .map(|omega| sched.weights().iter().map(|(&s, &w)| w * cut_value(net, s, omega)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    Ok(rate)
}

/// Full-duplex bound `min(max ell, max r)`.
pub fn trivial_upper_bound(net: &DiamondNetwork) -> f64 {
    let max_l = net.relays().iter().map(|l| l.ell).fold(0.0, f64::max);
    let max_r = net.relays().iter().map(|l| l.r).fold(0.0, f64::max);
    max_l.min(max_r)
}

/// Fraction of the approximate capacity retained by the best single relay.
/// A single relay is its own best relay, so the ratio is exactly 1.
pub fn ratio(net: &DiamondNetwork) -> Result<f64> {
    if net.len() == 1 {
        if !(net.best_relay().1 > 0.0) {
            return Err(Error::DegenerateNetwork("approximate capacity is zero".into()));
        }
        return Ok(1.0);
    }
    let c_n = capacity(net)?;
    if !(c_n > 0.0) {
        return Err(Error::DegenerateNetwork("approximate capacity is zero".into()));
    }
    Ok(net.best_relay().1 / c_n)
}

/// `z` extended by the sentinel value -1 at indices -1, 0, n+1, n+2.
fn z_at(z: &[f64], i: isize) -> f64 {
    if i >= 1 && (i as usize) <= z.len() {
        z[i as usize - 1]
    } else {
        -1.0
    }
}

/// `alpha_i` for 1-based `i`, 0 outside `[1:n]`.
fn alpha_at(alpha: &[f64], i: isize) -> f64 {
    if i >= 1 && (i as usize) <= alpha.len() {
        alpha[i as usize - 1]
    } else {
        0.0
    }
}

/// Coefficients `(A, B, C, D)` of `g_t = (1-a_t) A + a_t B + (1-a_{t+1}) C + a_{t+1} D`.
fn g_coefficients(z: &[f64], t: usize) -> Result<[f64; 4]> {
    let t = t as isize;
    let inv = |i: isize| {
        let v = z_at(z, i);
        if v == 0.0 {
            invalid(format!("z_{i} = 0"))
        } else {
            Ok(1.0 / v + 1.0)
        }
    };
    Ok([z_at(z, t - 1) + 1.0, z_at(z, t) + 1.0, inv(t + 1)?, inv(t + 2)?])
}

/// Cut value of the normalized network at threshold `t` under the relaxed
/// schedule `alpha` (`z` without sentinels, `t` in `[0:n]`).
pub fn g_function(z: &[f64], alpha: &[f64], t: usize) -> Result<f64> {
    if alpha.len() != z.len() {
        return invalid("alpha and z lengths differ");
    }
    if t > z.len() {
        return invalid(format!("t = {t} outside [0:{}]", z.len()));
    }
    let [a, b, c, d] = g_coefficients(z, t)?;
    let t = t as isize;
    let (at, at1) = (alpha_at(alpha, t), alpha_at(alpha, t + 1));
    Ok((1.0 - at) * a + at * b + (1.0 - at1) * c + at1 * d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedLpSolution {
    pub value: f64,
    pub alpha: Vec<f64>,
}

/// Maximizes `min_t g_t(z, alpha)` over `alpha in [0,1]^n`.
pub fn reduced_lp(norm: &NormalizedNetwork) -> Result<ReducedLpSolution> {
    let z = norm.z();
    let n = z.len();
    let mut objective = vec![0.0; n + 1];
    objective[0] = 1.0;
    let mut lp = LinearProgram::new(objective);
    lp.set_sign(0, VarSign::Free);
    for t in 0..=n {
        let [a, b, c, d] = g_coefficients(z, t)?;
        let mut row = vec![0.0; n + 1];
        row[0] = 1.0;
        if t >= 1 {
            row[t] -= b - a;
        }
        if t < n {
            row[t + 1] -= d - c;
        }
        lp.add_le(row, a + c);
    }
    for i in 1..=n {
        let mut row = vec![0.0; n + 1];
        row[i] = 1.0;
        lp.add_le(row, 1.0);
    }
    let sol = solve(&lp)?;
    if !sol.is_optimal() {
        return Err(Error::Lp(format!("reduced LP ended with status {:?}", sol.status)));
    }
    let alpha: Vec<f64> = sol.primal[1..].iter().map(|a| a.clamp(0.0, 1.0)).collect();
    Ok(ReducedLpSolution { value: sol.primal[0], alpha })
}
