//! Networks on which the best relay achieves exactly the worst-case
//! fraction of the approximate capacity.
//!
//! All constructions use `theta = 2 pi / (n + 2)`. Families `even2`, `odd1`
//! and `odd2` contain boundary relays with one link of capacity `L`; the
//! extremal ratio is reached as `L` grows.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::capacity::{approximate_capacity, schedule_rate, trivial_upper_bound, Schedule, State, MAX_RELAYS};
use crate::error::{invalid, Error, Result};
use crate::format::format_g;
use crate::lp::SolveMode;
use crate::network::{DiamondNetwork, RelayLinks};
use crate::theory::bound;

pub const DEFAULT_L: f64 = 1e6;
pub const MIN_L: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyId {
    Even1,
    Even2,
    Odd1,
    Odd2,
}

impl FamilyId {
    pub const ALL: [FamilyId; 4] = [FamilyId::Even1, FamilyId::Even2, FamilyId::Odd1, FamilyId::Odd2];

    pub fn uses_l(self) -> bool {
        self != FamilyId::Even1
    }

    pub fn accepts(self, n: usize) -> bool {
        match self {
            FamilyId::Even1 | FamilyId::Even2 => n >= 2 && n % 2 == 0 && n <= MAX_RELAYS,
            FamilyId::Odd1 | FamilyId::Odd2 => n >= 3 && n % 2 == 1 && n <= MAX_RELAYS,
        }
    }

    fn check(self, n: usize) -> Result<()> {
        if self.accepts(n) {
            Ok(())
        } else {
            let need = match self {
                FamilyId::Even1 | FamilyId::Even2 => "even n in [2:12]",
                FamilyId::Odd1 | FamilyId::Odd2 => "odd n in [3:12]",
            };
            invalid(format!("family {self} needs {need}, got n = {n}"))
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyId::Even1 => "even1",
            FamilyId::Even2 => "even2",
            FamilyId::Odd1 => "odd1",
            FamilyId::Odd2 => "odd2",
        })
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even1" => Ok(FamilyId::Even1),
            "even2" => Ok(FamilyId::Even2),
            "odd1" => Ok(FamilyId::Odd1),
            "odd2" => Ok(FamilyId::Odd2),
            _ => invalid(format!("unknown family {s:?} (expected even1, even2, odd1 or odd2)")),
        }
    }
}

fn theta(n: usize) -> f64 {
    2.0 * PI / (n as f64 + 2.0)
}

fn check_l(l: f64) -> Result<()> {
    if !l.is_finite() || l < MIN_L {
        return invalid(format!("L must be finite and at least {MIN_L}, got {l}"));
    }
    Ok(())
}

/// Pair `i` of the trig family with `ell_i + r_{i+1} = 2 cos theta + 2`.
fn cos_pair(i: usize, th: f64) -> RelayLinks {
    let i = i as f64;
    let num = 2.0 * th.sin() * (i * th).sin();
    RelayLinks::new(num / ((i * th).cos() - ((i + 1.0) * th).cos()), num / (((i - 1.0) * th).cos() - (i * th).cos()))
}

/// Pair `i` of the sine-ratio family.
fn sin_pair(i: usize, th: f64) -> RelayLinks {
    let (a, b) = ((i as f64 * th).sin(), ((i as f64 + 1.0) * th).sin());
    RelayLinks::new((a + b) / b, (a + b) / a)
}

pub fn worst_even_type1(n: usize) -> Result<DiamondNetwork> {
    FamilyId::Even1.check(n)?;
    let th = theta(n);
    let relays = (1..=n / 2).flat_map(|i| [cos_pair(i, th); 2]).collect();
    DiamondNetwork::new(relays)
}

pub fn worst_even_type2(n: usize, l: f64) -> Result<DiamondNetwork> {
    FamilyId::Even2.check(n)?;
    check_l(l)?;
    let th = theta(n);
    let mut relays = vec![RelayLinks::new(1.0, l)];
    relays.extend((1..n / 2).flat_map(|i| [sin_pair(i, th); 2]));
    relays.push(RelayLinks::new(l, 1.0));
    DiamondNetwork::new(relays)
}

pub fn worst_odd_type1(n: usize, l: f64) -> Result<DiamondNetwork> {
    FamilyId::Odd1.check(n)?;
    check_l(l)?;
    let th = theta(n);
    let mut relays = vec![RelayLinks::new(1.0, l)];
    relays.extend((1..=n / 2).flat_map(|i| [sin_pair(i, th); 2]));
    DiamondNetwork::new(relays)
}

pub fn worst_odd_type2(n: usize, l: f64) -> Result<DiamondNetwork> {
    FamilyId::Odd2.check(n)?;
    check_l(l)?;
    let th = theta(n);
    let mut relays: Vec<RelayLinks> = (1..=n / 2).flat_map(|i| [cos_pair(i, th); 2]).collect();
    relays.push(RelayLinks::new(l, 1.0));
    DiamondNetwork::new(relays)
}

/// Builds any family; `l` defaults to [`DEFAULT_L`] and is ignored by `even1`.
pub fn worst_network(family: FamilyId, n: usize, l: Option<f64>) -> Result<DiamondNetwork> {
    let l = l.unwrap_or(DEFAULT_L);
    match family {
        FamilyId::Even1 => worst_even_type1(n),
        FamilyId::Even2 => worst_even_type2(n, l),
        FamilyId::Odd1 => worst_odd_type1(n, l),
        FamilyId::Odd2 => worst_odd_type2(n, l),
    }
}

/// 1-based relay numbers to a state.
fn state(relays: impl IntoIterator<Item = usize>) -> State {
    State(relays.into_iter().fold(0, |m, i| m | 1 << (i - 1)))
}

fn odds(from: usize, to: usize) -> impl Iterator<Item = usize> {
    (from..=to).filter(|i| i % 2 == 1)
}

fn evens(to: usize) -> impl Iterator<Item = usize> {
    (2..=to).step_by(2)
}

/// The two alternating states `(S_o, S_e)` of each family.
fn two_states(family: FamilyId, n: usize) -> (State, State) {
    match family {
        FamilyId::Even1 => (state(odds(1, n)), state(evens(n))),
        FamilyId::Even2 => (state(odds(3, n).chain([n])), state(evens(n))),
        FamilyId::Odd1 => (state(odds(3, n)), state(evens(n))),
        FamilyId::Odd2 => (state(odds(1, n)), state(evens(n).chain([n]))),
    }
}

/// Half/half schedule over the family's two alternating states. On the
/// `L` families it reaches the extremal rate only in the limit; see
/// [`canonical_schedule`].
pub fn limit_schedule(family: FamilyId, n: usize) -> Result<Schedule> {
    family.check(n)?;
    let (so, se) = two_states(family, n);
    Schedule::new(n, [(so, 0.5), (se, 0.5)])
}

/// Schedule achieving `2 cos theta + 2` on `even1`, and within `O(1/L)` of
/// it on the other families. For the latter a slice `1/L` of one half is
/// spent with the boundary relay switched, so the boundary link of
/// capacity `L` carries the missing unit of flow.
pub fn canonical_schedule(family: FamilyId, n: usize, l: f64) -> Result<Schedule> {
    family.check(n)?;
    let (so, se) = two_states(family, n);
    if family == FamilyId::Even1 {
        return Schedule::new(n, [(so, 0.5), (se, 0.5)]);
    }
    check_l(l)?;
    let eps = 1.0 / l;
    let first = state([1]).0;
    let last = state([n]).0;
    let weights = match family {
        FamilyId::Even2 => [(so, 0.5), (se, 0.5 - eps), (State((se.0 | first) & !last), eps)],
        FamilyId::Odd1 => [(so, 0.5), (se, 0.5 - eps), (State(se.0 | first), eps)],
        FamilyId::Odd2 => [(so, 0.5 - eps), (se, 0.5), (State(so.0 & !last), eps)],
        FamilyId::Even1 => unreachable!(),
    };
    Schedule::new(n, weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightnessReport {
    pub n: usize,
    pub family: FamilyId,
    pub l: Option<f64>,
    pub c1: f64,
    pub cn: f64,
    pub two_state_rate: f64,
    pub upper_bound: f64,
    pub bound: f64,
    pub ratio: f64,
    pub gap: f64,
    pub tol: f64,
    pub pass: bool,
}

impl TightnessReport {
    pub const CSV_HEADER: &'static str = "n,family,L,c1,cn,two_state_rate,upper_bound,bound,ratio,gap,pass";

    pub fn csv_row(&self) -> String {
        let l = self.l.map(format_g).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.family,
            l,
            format_g(self.c1),
            format_g(self.cn),
            format_g(self.two_state_rate),
            format_g(self.upper_bound),
            format_g(self.bound),
            format_g(self.ratio),
            format_g(self.gap),
            self.pass
        )
    }
}

/// Builds the family member, solves its capacity LP and compares the best
/// relay's share with the worst-case bound.
pub fn verify_tightness(family: FamilyId, n: usize, l: Option<f64>, tol: f64) -> Result<TightnessReport> {
    let l = if family.uses_l() { Some(l.unwrap_or(DEFAULT_L)) } else { None };
    let net = worst_network(family, n, l)?;
    let cn = approximate_capacity(&net, SolveMode::Float)?.value;
    let c1 = net.best_relay().1;
    let two_state_rate = schedule_rate(&net, &canonical_schedule(family, n, l.unwrap_or(DEFAULT_L))?)?;
    let b = bound(n)?;
    let ratio = c1 / cn;
    let gap = (ratio - b).abs();
    Ok(TightnessReport {
        n,
        family,
        l,
        c1,
        cn,
        two_state_rate,
        upper_bound: trivial_upper_bound(&net),
        bound: b,
        ratio,
        gap,
        tol,
        pass: gap <= tol,
    })
}
