//! Full client profiles, represented lazily as deterministic rules that map
//! any placement to a client profile.

use std::collections::BTreeMap;

use crate::classes::class_set_with;
use crate::client_eq::{favoring_with, greedy_with, rounded_profile};
use crate::error::Result;
use crate::game::{loads_unchecked, violations_unchecked, ClientProfile, Coverage, Instance, Permutation, Placement};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FullProfilePolicy {
    /// Augmenting-path rounded profile (unweighted only).
    Rounded,
    /// π-favoring rounded profile (unweighted only).
    Favoring(Permutation),
    /// Greedy pure equilibrium with best-response repair.
    GreedyWeighted,
    /// Every covered client mixes uniformly over its shopping range. Not an
    /// equilibrium in general.
    Uniform,
    /// Explicit profiles for some placements, `fallback` elsewhere.
    Table { entries: BTreeMap<Placement, ClientProfile>, fallback: Box<FullProfilePolicy> },
}

impl FullProfilePolicy {
    pub fn profile(&self, inst: &Instance, s: &Placement) -> Result<ClientProfile> {
        let cov = Coverage::new(inst, s)?;
        self.profile_with(inst, s, &cov)
    }

    pub(crate) fn profile_with(&self, inst: &Instance, s: &Placement, cov: &Coverage) -> Result<ClientProfile> {
        match self {
            FullProfilePolicy::Rounded => {
                let cs = class_set_with(inst, cov)?;
                Ok(rounded_profile(inst, s, &cs)?.to_profile(inst.k()))
            }
            FullProfilePolicy::Favoring(pi) => {
                inst.require_unweighted()?;
                let cs = class_set_with(inst, cov)?;
                Ok(favoring_with(inst, cov, &cs, pi)?.to_profile(inst.k()))
            }
            FullProfilePolicy::GreedyWeighted => Ok(greedy_with(inst, cov).to_profile(inst.k())),
            FullProfilePolicy::Uniform => Ok(uniform_profile(inst, cov)),
            FullProfilePolicy::Table { entries, fallback } => match entries.get(s) {
                Some(p) => Ok(p.clone()),
                None => fallback.profile_with(inst, s, cov),
            },
        }
    }

    /// Short tag such as `pi-favoring(1,0,2)`.
    pub fn kind(&self) -> String {
        match self {
            FullProfilePolicy::Rounded => "rounded".into(),
            FullProfilePolicy::Favoring(pi) => format!("pi-favoring({pi})"),
            FullProfilePolicy::GreedyWeighted => "greedy-weighted".into(),
            FullProfilePolicy::Uniform => "uniform".into(),
            FullProfilePolicy::Table { entries, fallback } => {
                format!("fixed-table[{}]+{}", entries.len(), fallback.kind())
            }
        }
    }

    /// Whether every produced profile is a client equilibrium by construction.
    pub fn always_equilibrium(&self) -> bool {
        !matches!(self, FullProfilePolicy::Uniform)
    }
}

pub(crate) fn uniform_profile(inst: &Instance, cov: &Coverage) -> ClientProfile {
    let mut sigma = ClientProfile::zeros(inst.n(), inst.k());
    for v in cov.covered() {
        let p = Scalar::int(1) / &Scalar::int(cov.ranges[v].len() as i64);
        for &f in &cov.ranges[v] {
            sigma.set(v, f, p.clone());
        }
    }
    sigma
}

pub(crate) fn is_equilibrium_unchecked(inst: &Instance, cov: &Coverage, sigma: &ClientProfile) -> bool {
    let report = loads_unchecked(inst, cov, sigma);
    violations_unchecked(inst, cov, sigma, &report, true).is_empty()
}

/// Facility loads of the policy's profile at `s`.
pub fn policy_loads(inst: &Instance, s: &Placement, policy: &FullProfilePolicy) -> Result<Vec<Scalar>> {
    let cov = Coverage::new(inst, s)?;
    let sigma = policy.profile_with(inst, s, &cov)?;
    Ok(loads_unchecked(inst, &cov, &sigma).load)
}
