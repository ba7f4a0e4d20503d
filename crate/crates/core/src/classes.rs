//! Minimum neighbourhood sets and the class set of a placement.
//!
//! `mns` finds the largest facility subset minimizing covered weight per
//! facility by Dinkelbach iteration on the trial ratio λ. Each step solves
//! `min_T w(A(T) ∩ V*) - λ|T|` as a min cut in the network
//! source -> facility (λ), facility -> client (∞), client -> sink (w(v)).
//! At the optimal λ the maximal source side of a minimum cut yields the
//! largest minimizer.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{FlgError, Result};
use crate::flow::{max_flow, max_source_side_min_cut, FlowNetwork};
use crate::game::{Coverage, FacilityId, Instance, Placement, VertexId};
use crate::scalar::Scalar;

/// One class `C_i = (F_i, V_i)` with average load `w(V_i) / |F_i|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Class {
    pub facilities: Vec<FacilityId>,
    pub clients: Vec<VertexId>,
    pub load: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSet {
    pub classes: Vec<Class>,
    pub class_of_facility: Vec<usize>,
    /// `None` for uncovered clients.
    pub class_of_client: Vec<Option<usize>>,
}

impl ClassSet {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn loads(&self) -> Vec<Scalar> {
        self.classes.iter().map(|c| c.load.clone()).collect()
    }

    /// Class average load of the class containing `f`.
    pub fn facility_load(&self, f: FacilityId) -> &Scalar {
        &self.classes[self.class_of_facility[f]].load
    }
}

fn weight_of(inst: &Instance, clients: impl IntoIterator<Item = VertexId>) -> Scalar {
    clients.into_iter().map(|v| inst.graph.weight(v)).sum()
}

/// w(A_s(T) ∩ V*) / |T| for nonempty `t`.
fn coverage_ratio(inst: &Instance, cov: &Coverage, t: &[FacilityId], vstar: &[bool]) -> Scalar {
    let covered = (0..inst.n()).filter(|&v| vstar[v] && t.iter().any(|&f| cov.in_range(v, f)));
    weight_of(inst, covered) / Scalar::int(t.len() as i64)
}

fn mask(n: usize, vstar: &[VertexId]) -> Result<Vec<bool>> {
    let mut m = vec![false; n];
    for &v in vstar {
        if v >= n {
            return Err(FlgError::UnknownVertex(v));
        }
        m[v] = true;
    }
    Ok(m)
}

fn check_fstar(inst: &Instance, fstar: &[FacilityId]) -> Result<()> {
    if fstar.is_empty() {
        return Err(FlgError::Input("MNS of an empty facility set".into()));
    }
    for &f in fstar {
        inst.check_facility(f)?;
    }
    Ok(())
}

/// Minimum neighbourhood set of `fstar` restricted to clients `vstar`.
pub fn mns(inst: &Instance, s: &Placement, fstar: &[FacilityId], vstar: &[VertexId]) -> Result<Vec<FacilityId>> {
    check_fstar(inst, fstar)?;
    let cov = Coverage::new(inst, s)?;
    let vmask = mask(inst.n(), vstar)?;
    mns_with(inst, &cov, fstar, &vmask)
}

pub(crate) fn mns_with(
    inst: &Instance,
    cov: &Coverage,
    fstar: &[FacilityId],
    vstar: &[bool],
) -> Result<Vec<FacilityId>> {
    let mut fstar = fstar.to_vec();
    fstar.sort_unstable();
    fstar.dedup();
    let clients: Vec<VertexId> =
        (0..inst.n()).filter(|&v| vstar[v] && fstar.iter().any(|&f| cov.in_range(v, f))).collect();
    let client_weight = weight_of(inst, clients.iter().copied());
    let nf = fstar.len();
    let (source, sink) = (0, 1);
    let fnode = |i: usize| 2 + i;
    let cnode = |j: usize| 2 + nf + j;

    let mut lambda = coverage_ratio(inst, cov, &fstar, vstar);
    loop {
        let lambda_total = &lambda * &Scalar::int(nf as i64);
        let infinity = &client_weight + &lambda_total + Scalar::int(1);
        let mut net = FlowNetwork::new(2 + nf + clients.len(), source, sink);
        for (i, _) in fstar.iter().enumerate() {
            net.add_arc(source, fnode(i), lambda.clone(), BigInt::zero());
        }
        for (i, &f) in fstar.iter().enumerate() {
            for (j, &v) in clients.iter().enumerate() {
                if cov.in_range(v, f) {
                    net.add_arc(fnode(i), cnode(j), infinity.clone(), BigInt::zero());
                }
            }
        }
        for (j, &v) in clients.iter().enumerate() {
            net.add_arc(cnode(j), sink, inst.graph.weight(v).clone(), BigInt::zero());
        }
        let result = max_flow(&net)?;
        let gap = &result.value - &lambda_total;
        if gap.is_positive() {
            return Err(FlgError::Internal("min cut exceeds the trivial cut".into()));
        }
        if gap.is_zero() {
            let side = max_source_side_min_cut(&net, &result)?;
            let t: Vec<FacilityId> = (0..nf).filter(|&i| side[fnode(i)]).map(|i| fstar[i]).collect();
            if t.is_empty() {
                return Err(FlgError::Internal("maximal minimizer is empty".into()));
            }
            return Ok(t);
        }
        let t: Vec<FacilityId> = (0..nf).filter(|&i| result.source_side[fnode(i)]).map(|i| fstar[i]).collect();
        if t.is_empty() {
            return Err(FlgError::Internal("negative cut without facilities".into()));
        }
        let next = coverage_ratio(inst, cov, &t, vstar);
        if next >= lambda {
            return Err(FlgError::Internal("Dinkelbach ratio did not decrease".into()));
        }
        lambda = next;
    }
}

/// Exhaustive MNS: minimum ratio, then maximum cardinality. The maximal
/// minimizer must be unique; a second one is reported as an internal error.
pub fn mns_bruteforce(
    inst: &Instance,
    s: &Placement,
    fstar: &[FacilityId],
    vstar: &[VertexId],
) -> Result<Vec<FacilityId>> {
    check_fstar(inst, fstar)?;
    let mut fstar = fstar.to_vec();
    fstar.sort_unstable();
    fstar.dedup();
    if fstar.len() > 20 {
        return Err(FlgError::GuardExceeded {
            what: "mns_bruteforce facilities".into(),
            limit: 20,
            actual: fstar.len(),
        });
    }
    let cov = Coverage::new(inst, s)?;
    let vmask = mask(inst.n(), vstar)?;
    let mut best: Option<(Scalar, usize, Vec<Vec<FacilityId>>)> = None;
    for bits in 1u32..(1u32 << fstar.len()) {
        let t: Vec<FacilityId> = (0..fstar.len()).filter(|i| bits >> i & 1 == 1).map(|i| fstar[i]).collect();
        let r = coverage_ratio(inst, &cov, &t, &vmask);
        let card = t.len();
        match &mut best {
            None => best = Some((r, card, vec![t])),
            Some((br, bc, sets)) => {
                if r < *br || (r == *br && card > *bc) {
                    *br = r;
                    *bc = card;
                    *sets = vec![t];
                } else if r == *br && card == *bc {
                    sets.push(t);
                }
            }
        }
    }
    let (_, _, mut sets) = best.expect("at least one nonempty subset");
    if sets.len() != 1 {
        return Err(FlgError::Internal(format!("maximal MNS is not unique: {sets:?}")));
    }
    Ok(sets.pop().expect("one set"))
}

/// The class set of a placement by repeated MNS extraction.
pub fn class_set(inst: &Instance, s: &Placement) -> Result<ClassSet> {
    let cov = Coverage::new(inst, s)?;
    class_set_with(inst, &cov)
}

pub(crate) fn class_set_with(inst: &Instance, cov: &Coverage) -> Result<ClassSet> {
    let k = inst.k();
    let n = inst.n();
    let mut remaining_f: Vec<FacilityId> = (0..k).collect();
    let mut remaining_v = vec![true; n];
    let mut classes = Vec::new();
    let mut class_of_facility = vec![usize::MAX; k];
    let mut class_of_client = vec![None; n];
    while !remaining_f.is_empty() {
        let fi = mns_with(inst, cov, &remaining_f, &remaining_v)?;
        let vi: Vec<VertexId> = (0..n).filter(|&v| remaining_v[v] && fi.iter().any(|&f| cov.in_range(v, f))).collect();
        let idx = classes.len();
        for &f in &fi {
            class_of_facility[f] = idx;
        }
        for &v in &vi {
            class_of_client[v] = Some(idx);
            remaining_v[v] = false;
        }
        remaining_f.retain(|f| !fi.contains(f));
        let load = weight_of(inst, vi.iter().copied()) / Scalar::int(fi.len() as i64);
        classes.push(Class { facilities: fi, clients: vi, load });
    }
    Ok(ClassSet { classes, class_of_facility, class_of_client })
}
