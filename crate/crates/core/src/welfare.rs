//! Participation-rate welfare: exhaustive optimum and price-of-anarchy
//! certificates, plus the clique-with-pendants family on which the ratio 2
//! is attained.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{FlgError, Result};
use crate::game::{participation, ClientProfile, Instance, Placement};
use crate::instances::{gen_paper_instance, PaperInstance};
use crate::policy::FullProfilePolicy;
use crate::scalar::Scalar;
use crate::spe::{verify_spe, Alpha, PartialCertificate};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WelfareReport {
    pub opt_placement: Placement,
    pub opt_weight: Scalar,
    pub state_weight: Scalar,
    /// opt_weight / state_weight.
    pub ratio: Scalar,
}

pub const DEFAULT_OPT_GUARD: usize = 1_000_000;

/// Placement of maximum participation weight; the lexicographically smallest on ties.
pub fn optimum_placement(inst: &Instance, guard: usize) -> Result<(Placement, Scalar)> {
    let count = inst.placement_count();
    if count > guard {
        return Err(FlgError::GuardExceeded { what: "optimum placements".into(), limit: guard, actual: count });
    }
    let mut best: Option<(Placement, Scalar)> = None;
    for s in inst.placements() {
        let w = participation(inst, &s)?;
        if best.as_ref().map_or(true, |(_, b)| w > *b) {
            best = Some((s, w));
        }
    }
    Ok(best.expect("at least one placement"))
}

/// Welfare ratio of a verified SPE. Refuses certificates that are not SPE.
pub fn poa_certificate(inst: &Instance, cert: &PartialCertificate) -> Result<WelfareReport> {
    let verdict = verify_spe(inst, cert, &Alpha::one())?;
    if !verdict.is_ok() {
        return Err(FlgError::NotAnEquilibrium(format!("{verdict:?}")));
    }
    let (opt_placement, opt_weight) = optimum_placement(inst, DEFAULT_OPT_GUARD)?;
    let state_weight = participation(inst, &cert.base)?;
    let ratio = &opt_weight / &state_weight;
    if ratio > Scalar::int(2) {
        return Err(FlgError::Internal(format!("welfare ratio {ratio} exceeds 2 at an SPE")));
    }
    Ok(WelfareReport { opt_placement, opt_weight, state_weight, ratio })
}

/// The bad SPE on `fig8(k)`: facilities on the core, each core client on its
/// own facility. A move to another core vertex keeps every client choice; a
/// move to a pendant is answered by the pendant client taking the mover and
/// the abandoned core client switching to the lowest-id other facility.
pub fn fig8_certificate(k: usize) -> Result<(Instance, PartialCertificate)> {
    let inst = gen_paper_instance(&PaperInstance::Fig8 { k })?;
    let base = Placement((0..k).collect());
    let mut assign: Vec<Option<usize>> = (0..k).map(Some).collect();
    assign.extend(std::iter::repeat(None).take(k));
    let base_profile = ClientProfile::from_assignment(&assign, k);
    let mut entries = BTreeMap::new();
    entries.insert(base.clone(), base_profile.clone());
    for f in 0..k {
        for v in 0..2 * k {
            if v == f {
                continue;
            }
            let dev = base.with_move(f, v);
            let profile = if v < k {
                base_profile.clone()
            } else {
                let mut a = assign.clone();
                a[v] = Some(f);
                a[f] = Some(if f == 0 { 1 } else { 0 });
                ClientProfile::from_assignment(&a, k)
            };
            entries.insert(dev, profile);
        }
    }
    let policy = FullProfilePolicy::Table { entries, fallback: Box::new(FullProfilePolicy::GreedyWeighted) };
    let cert = PartialCertificate::from_policy(&inst, &base, &policy)?;
    Ok((inst, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spe::find_spe;

    #[test]
    fn fig8_ratio_two() {
        for k in 2..=5 {
            let (inst, cert) = fig8_certificate(k).unwrap();
            let rep = poa_certificate(&inst, &cert).unwrap();
            assert_eq!(rep.ratio, Scalar::int(2), "k = {k}");
            assert_eq!(rep.opt_weight, Scalar::int(2 * k as i64));
        }
    }

    #[test]
    fn fig8_optimum_is_pendants() {
        let inst = gen_paper_instance(&PaperInstance::Fig8 { k: 3 }).unwrap();
        let (s, w) = optimum_placement(&inst, DEFAULT_OPT_GUARD).unwrap();
        assert_eq!(s, Placement(vec![3, 4, 5]));
        assert_eq!(w, Scalar::int(6));
        assert!(optimum_placement(&inst, 10).is_err());
    }

    #[test]
    fn non_spe_is_refused() {
        let inst = gen_paper_instance(&PaperInstance::Fig6).unwrap();
        let cert = PartialCertificate::from_policy(&inst, &Placement(vec![2, 2]), &FullProfilePolicy::Rounded).unwrap();
        assert!(matches!(poa_certificate(&inst, &cert), Err(FlgError::NotAnEquilibrium(_))));
    }

    #[test]
    fn covering_spe_has_ratio_one() {
        let inst = gen_paper_instance(&PaperInstance::Fig6).unwrap();
        let run = find_spe(&inst).unwrap();
        let rep = poa_certificate(&inst, &run.certificate).unwrap();
        assert_eq!(rep.ratio, Scalar::int(1));
    }
}
