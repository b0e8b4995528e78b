//! Diamond network descriptors.
//!
//! A network is fully described by its per-relay point-to-point link
//! capacities `(ell, r)`: `ell` is the source-to-relay capacity and `r` the
//! relay-to-destination capacity, both in bits per channel use.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance used to check that a normalized network has unit single-relay
/// capacities.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Link capacities of one relay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayLinks {
    pub ell: f64,
    pub r: f64,
}

impl RelayLinks {
    pub fn new(ell: f64, r: f64) -> Self {
        Self { ell, r }
    }

    /// Capacity `ell * r / (ell + r)` of the network made of this relay alone.
    pub fn single_relay_capacity(&self) -> f64 {
        single_relay_capacity(*self)
    }
}

/// Converts channel-gain magnitudes to link capacities, `log2(1 + |h|^2)`.
pub fn links_from_gains(h_s_mag: f64, h_d_mag: f64) -> Result<RelayLinks> {
    if !h_s_mag.is_finite() || !h_d_mag.is_finite() {
        return invalid(format!(
            "channel gain magnitudes must be finite, got ({h_s_mag}, {h_d_mag})"
        ));
    }
    if h_s_mag < 0.0 || h_d_mag < 0.0 {
        return invalid(format!(
            "channel gain magnitudes must be nonnegative, got ({h_s_mag}, {h_d_mag})"
        ));
    }
    Ok(RelayLinks {
        ell: (h_s_mag * h_s_mag).ln_1p() / std::f64::consts::LN_2,
        r: (h_d_mag * h_d_mag).ln_1p() / std::f64::consts::LN_2,
    })
}

/// `ell * r / (ell + r)`, with the limit value 0 when both links are 0.
pub fn single_relay_capacity(link: RelayLinks) -> f64 {
    let sum = link.ell + link.r;
    if sum == 0.0 {
        0.0
    } else {
        link.ell * link.r / sum
    }
}

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    EmptyNetwork,
    /// Relay index is 0-based.
    NegativeCapacity { relay: usize },
    NonFiniteCapacity { relay: usize },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::EmptyNetwork => write!(f, "empty network"),
            ValidationIssue::NegativeCapacity { relay } => {
                write!(f, "negative capacity at relay {}", relay + 1)
            }
            ValidationIssue::NonFiniteCapacity { relay } => {
                write!(f, "non-finite capacity at relay {}", relay + 1)
            }
        }
    }
}

/// Returns every invariant violation of the relay list.
pub fn validate(relays: &[RelayLinks]) -> std::result::Result<(), Vec<ValidationIssue>> {
    let mut issues = Vec::new();
    if relays.is_empty() {
        issues.push(ValidationIssue::EmptyNetwork);
    }
    for (i, link) in relays.iter().enumerate() {
        if !link.ell.is_finite() || !link.r.is_finite() {
            issues.push(ValidationIssue::NonFiniteCapacity { relay: i });
        } else if link.ell < 0.0 || link.r < 0.0 {
            issues.push(ValidationIssue::NegativeCapacity { relay: i });
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

/// A Gaussian half-duplex diamond network with `n >= 1` relays.
#[derive(Debug, Clone, PartialEq)]
pub struct DiamondNetwork {
    relays: Vec<RelayLinks>,
}

impl DiamondNetwork {
    pub fn new(relays: Vec<RelayLinks>) -> Result<Self> {
        if let Err(issues) = validate(&relays) {
            let msg = issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ");
            return invalid(msg);
        }
        Ok(Self { relays })
    }

    /// Builds a network from `(ell, r)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(ell, r)| RelayLinks { ell, r }).collect())
    }

    pub fn from_gains(gains: &[(f64, f64)]) -> Result<Self> {
        let relays = gains
            .iter()
            .map(|&(hs, hd)| links_from_gains(hs, hd))
            .collect::<Result<Vec<_>>>()?;
        Self::new(relays)
    }

    pub fn relays(&self) -> &[RelayLinks] {
        &self.relays
    }

    pub fn len(&self) -> usize {
        self.relays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relays.is_empty()
    }

    pub fn ell(&self, i: usize) -> f64 {
        self.relays[i].ell
    }

    pub fn r(&self, i: usize) -> f64 {
        self.relays[i].r
    }

    /// Stable sort by `ell`. The permutation maps new index to old index.
    pub fn sort_by_ell(&self) -> (DiamondNetwork, Vec<usize>) {
        let mut perm: Vec<usize> = (0..self.len()).collect();
        perm.sort_by(|&a, &b| self.relays[a].ell.total_cmp(&self.relays[b].ell));
        let relays = perm.iter().map(|&i| self.relays[i]).collect();
        (DiamondNetwork { relays }, perm)
    }

    /// Multiplies every link capacity by `alpha > 0`.
    pub fn scale(&self, alpha: f64) -> Result<DiamondNetwork> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return invalid(format!("scale factor must be positive and finite, got {alpha}"));
        }
        let relays = self
            .relays
            .iter()
            .map(|l| RelayLinks::new(l.ell * alpha, l.r * alpha))
            .collect();
        DiamondNetwork::new(relays)
    }

    /// Reorders relays so that new relay `i` is old relay `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<DiamondNetwork> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() {
            return invalid("permutation length does not match the network");
        }
        for &p in perm {
            if p >= self.len() || seen[p] {
                return invalid("not a permutation");
            }
            seen[p] = true;
        }
        Ok(DiamondNetwork { relays: perm.iter().map(|&i| self.relays[i]).collect() })
    }

    pub fn single_relay_capacities(&self) -> Vec<f64> {
        self.relays.iter().map(|&l| single_relay_capacity(l)).collect()
    }

    /// Best single relay: `(index, capacity)`, lowest index on ties.
    pub fn best_relay(&self) -> (usize, f64) {
        let mut best = (0, single_relay_capacity(self.relays[0]));
        for (i, &link) in self.relays.iter().enumerate().skip(1) {
            let c = single_relay_capacity(link);
            if c > best.1 {
                best = (i, c);
            }
        }
        best
    }

    /// Rescales the network so every relay has unit single-relay capacity,
    /// then sorts by `ell`.
    pub fn normalize(&self) -> Result<NormalizedNetwork> {
        for (i, link) in self.relays.iter().enumerate() {
            if link.ell == 0.0 || link.r == 0.0 {
                return Err(Error::DegenerateNetwork(format!(
                    "relay {} has a zero-capacity link",
                    i + 1
                )));
            }
        }
        let (_, best) = self.best_relay();
        // Lift every relay to the best single-relay capacity, then bring the
        // common value down to 1.
        let lifted: Vec<RelayLinks> = self
            .relays
            .iter()
            .map(|&l| {
                let factor = best / single_relay_capacity(l);
                RelayLinks::new(l.ell * factor, l.r * factor)
            })
            .collect();
        let unit = DiamondNetwork::new(lifted)?.scale(1.0 / best)?;
        let (sorted, _) = unit.sort_by_ell();
        NormalizedNetwork::from_network(sorted)
    }
}

/// Network with unit single-relay capacities, sorted by `ell`, carried with
/// its parameterization `z_i = ell_i - 1` (so that `r_i = 1 + 1/z_i`).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedNetwork {
    network: DiamondNetwork,
    z: Vec<f64>,
}

impl NormalizedNetwork {
    /// Checks the normalization invariants on an already-normalized network.
    pub fn from_network(network: DiamondNetwork) -> Result<Self> {
        let mut z = Vec::with_capacity(network.len());
        for (i, link) in network.relays().iter().enumerate() {
            let c = single_relay_capacity(*link);
            if (c - 1.0).abs() > NORMALIZATION_TOL * 10.0 {
                return invalid(format!("relay {} has single-relay capacity {c}, not 1", i + 1));
            }
            let zi = link.ell - 1.0;
            if !(zi > 0.0) {
                return invalid(format!("relay {} has ell = {} <= 1", i + 1, link.ell));
            }
            if let Some(&prev) = z.last() {
                if zi < prev {
                    return invalid("relays are not sorted by ell");
                }
            }
            z.push(zi);
        }
        Ok(Self { network, z })
    }

    /// Builds the normalized network `ell = 1 + z`, `r = 1 + 1/z` from a
    /// non-decreasing positive `z`.
    pub fn from_z(z: &[f64]) -> Result<Self> {
        if z.is_empty() {
            return invalid("empty network");
        }
        for w in z.windows(2) {
            if w[1] < w[0] {
                return invalid("z must be non-decreasing");
            }
        }
        if z.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return invalid("z must be positive and finite");
        }
        let relays = z.iter().map(|&v| RelayLinks::new(1.0 + v, 1.0 + 1.0 / v)).collect();
        Ok(Self { network: DiamondNetwork::new(relays)?, z: z.to_vec() })
    }

    pub fn network(&self) -> &DiamondNetwork {
        &self.network
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn into_network(self) -> DiamondNetwork {
        self.network
    }
}

/// On-disk network description. Exactly one of `relays` / `gains` is set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relays: Option<Vec<RelayLinks>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<Vec<GainPair>>,
    /// Written for normalized networks only; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainPair {
    pub hs: f64,
    pub hd: f64,
}

impl NetworkFile {
    pub fn from_network(net: &DiamondNetwork) -> Self {
        Self { relays: Some(net.relays().to_vec()), gains: None, z: None }
    }

    pub fn from_normalized(norm: &NormalizedNetwork) -> Self {
        Self {
            relays: Some(norm.network().relays().to_vec()),
            gains: None,
            z: Some(norm.z().to_vec()),
        }
    }

    pub fn to_network(&self) -> Result<DiamondNetwork> {
        match (&self.relays, &self.gains) {
            (Some(relays), None) => DiamondNetwork::new(relays.clone()),
            (None, Some(gains)) => {
                let pairs: Vec<(f64, f64)> = gains.iter().map(|g| (g.hs, g.hd)).collect();
                DiamondNetwork::from_gains(&pairs)
            }
            _ => invalid("network file must contain exactly one of \"relays\" or \"gains\""),
        }
    }

    pub fn parse(json: &str) -> Result<DiamondNetwork> {
        let file: NetworkFile = serde_json::from_str(json)
            .map_err(|e| Error::InvalidArgument(format!("malformed network JSON: {e}")))?;
        file.to_network()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serialization cannot fail")
    }
}
