//! Core data model: host graphs, instances, placements, client profiles and
//! the load / waiting-time / equilibrium computations built on them.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{FlgError, Result};
use crate::scalar::{lex_cmp, Scalar};

pub type VertexId = usize;
pub type FacilityId = usize;

/// Vertex-weighted directed graph. Vertex `v` can patronize facilities placed
/// on `v` itself or on an out-neighbour of `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HostGraph {
    labels: Vec<String>,
    weights: Vec<Scalar>,
    out: Vec<BTreeSet<VertexId>>,
}

impl HostGraph {
    /// Builds an arc-free graph. Labels default to `v0, v1, ...` when `None`.
    pub fn new(weights: Vec<Scalar>, labels: Option<Vec<String>>) -> Result<Self> {
        let labels = match labels {
            Some(l) => {
                if l.len() != weights.len() {
                    return Err(FlgError::Input(format!("{} labels for {} vertices", l.len(), weights.len())));
                }
                let distinct: BTreeSet<_> = l.iter().collect();
                if distinct.len() != l.len() {
                    return Err(FlgError::Input("duplicate vertex label".into()));
                }
                l
            }
            None => (0..weights.len()).map(|i| format!("v{i}")).collect(),
        };
        if let Some(v) = weights.iter().position(|w| !w.is_positive()) {
            return Err(FlgError::Input(format!("weight of vertex {v} must be positive")));
        }
        let out = vec![BTreeSet::new(); weights.len()];
        Ok(HostGraph { labels, weights, out })
    }

    pub fn unit(n: usize) -> Self {
        HostGraph::new(vec![Scalar::one(); n], None).expect("unit weights are positive")
    }

    /// Adds the arc `from -> to`. Self-loops are implicit and ignored.
    pub fn add_arc(&mut self, from: VertexId, to: VertexId) -> Result<()> {
        self.check_vertex(from)?;
        self.check_vertex(to)?;
        if from != to {
            self.out[from].insert(to);
        }
        Ok(())
    }

    pub fn add_edge(&mut self, a: VertexId, b: VertexId) -> Result<()> {
        self.add_arc(a, b)?;
        self.add_arc(b, a)
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.weights.len() {
            Ok(())
        } else {
            Err(FlgError::UnknownVertex(v))
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, v: VertexId) -> &Scalar {
        &self.weights[v]
    }

    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn out_neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.out[v].iter().copied()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.out.iter().enumerate().flat_map(|(v, s)| s.iter().map(move |&u| (v, u)))
    }

    /// Whether `loc ∈ N(v)`.
    pub fn reaches(&self, v: VertexId, loc: VertexId) -> bool {
        v == loc || self.out[v].contains(&loc)
    }

    /// N(v) = {v} ∪ out-neighbours, ascending.
    pub fn neighborhood(&self, v: VertexId) -> Vec<VertexId> {
        let mut n: Vec<_> = std::iter::once(v).chain(self.out[v].iter().copied()).collect();
        n.sort_unstable();
        n
    }

    pub fn total_weight(&self) -> Scalar {
        self.weights.iter().sum()
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights.iter().all(|w| w.is_one())
    }
}

/// A game instance `(H, U, k)`: host graph plus per-facility placement restrictions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub graph: HostGraph,
    allowed: Vec<Vec<VertexId>>,
}

impl Instance {
    pub fn new(graph: HostGraph, allowed: Vec<Vec<VertexId>>) -> Result<Self> {
        if allowed.is_empty() {
            return Err(FlgError::Input("at least one facility required".into()));
        }
        let mut norm = Vec::with_capacity(allowed.len());
        for (f, set) in allowed.into_iter().enumerate() {
            let mut set = set;
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(FlgError::Input(format!("facility {f} has an empty allowed set")));
            }
            for &v in &set {
                graph.check_vertex(v)?;
            }
            norm.push(set);
        }
        Ok(Instance { graph, allowed: norm })
    }

    pub fn unrestricted(graph: HostGraph, k: usize) -> Result<Self> {
        let all: Vec<_> = (0..graph.len()).collect();
        Instance::new(graph, vec![all; k])
    }

    pub fn k(&self) -> usize {
        self.allowed.len()
    }

    pub fn n(&self) -> usize {
        self.graph.len()
    }

    pub fn allowed(&self, f: FacilityId) -> &[VertexId] {
        &self.allowed[f]
    }

    pub fn allowed_sets(&self) -> &[Vec<VertexId>] {
        &self.allowed
    }

    pub fn is_unrestricted(&self) -> bool {
        self.allowed.iter().all(|a| a.len() == self.graph.len())
    }

    pub fn is_unweighted(&self) -> bool {
        self.graph.is_unweighted()
    }

    pub fn require_unweighted(&self) -> Result<()> {
        if self.is_unweighted() {
            Ok(())
        } else {
            Err(FlgError::UnsupportedWeighted)
        }
    }

    pub fn check_facility(&self, f: FacilityId) -> Result<()> {
        if f < self.k() {
            Ok(())
        } else {
            Err(FlgError::FacilityOutOfRange { facility: f, k: self.k() })
        }
    }

    pub fn validate_placement(&self, s: &Placement) -> Result<()> {
        if s.0.len() != self.k() {
            return Err(FlgError::Input(format!("placement has {} entries, expected {}", s.0.len(), self.k())));
        }
        for (f, &v) in s.0.iter().enumerate() {
            self.graph.check_vertex(v)?;
            if self.allowed[f].binary_search(&v).is_err() {
                return Err(FlgError::Input(format!("facility {f} may not be placed on vertex {v}")));
            }
        }
        Ok(())
    }

    /// Each facility on its lowest-id allowed vertex.
    pub fn initial_placement(&self) -> Placement {
        Placement(self.allowed.iter().map(|a| a[0]).collect())
    }

    /// Number of placements, saturating.
    pub fn placement_count(&self) -> usize {
        self.allowed.iter().fold(1usize, |acc, a| acc.saturating_mul(a.len()))
    }

    /// All placements in lexicographic order.
    pub fn placements(&self) -> impl Iterator<Item = Placement> + '_ {
        let k = self.k();
        let mut idx = vec![0usize; k];
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let p = Placement(idx.iter().enumerate().map(|(f, &i)| self.allowed[f][i]).collect());
            let mut f = k;
            loop {
                if f == 0 {
                    done = true;
                    break;
                }
                f -= 1;
                idx[f] += 1;
                if idx[f] < self.allowed[f].len() {
                    break;
                }
                idx[f] = 0;
            }
            Some(p)
        })
    }
}

/// Facility placement profile: `locations[f]` is the vertex of facility `f`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Placement(pub Vec<VertexId>);

impl Placement {
    pub fn with_move(&self, f: FacilityId, v: VertexId) -> Placement {
        let mut p = self.clone();
        p.0[f] = v;
        p
    }

    pub fn location(&self, f: FacilityId) -> VertexId {
        self.0[f]
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Shopping and attraction ranges of every client and facility for one placement.
#[derive(Clone, Debug)]
pub struct Coverage {
    /// `ranges[v]` = N_s(v), ascending facility ids.
    pub ranges: Vec<Vec<FacilityId>>,
    /// `attraction[f]` = A_s(f), ascending vertex ids.
    pub attraction: Vec<Vec<VertexId>>,
}

impl Coverage {
    pub fn new(inst: &Instance, s: &Placement) -> Result<Self> {
        inst.validate_placement(s)?;
        let n = inst.n();
        let k = inst.k();
        let mut ranges = vec![Vec::new(); n];
        let mut attraction = vec![Vec::new(); k];
        for (v, range) in ranges.iter_mut().enumerate() {
            for (f, &loc) in s.0.iter().enumerate() {
                if inst.graph.reaches(v, loc) {
                    range.push(f);
                    attraction[f].push(v);
                }
            }
        }
        Ok(Coverage { ranges, attraction })
    }

    pub fn is_covered(&self, v: VertexId) -> bool {
        !self.ranges[v].is_empty()
    }

    pub fn in_range(&self, v: VertexId, f: FacilityId) -> bool {
        self.ranges[v].binary_search(&f).is_ok()
    }

    pub fn covered(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.ranges.len()).filter(|&v| self.is_covered(v))
    }
}

/// N_s(v): facilities located on `v` or an out-neighbour of `v`.
pub fn shopping_range(inst: &Instance, s: &Placement, v: VertexId) -> Result<Vec<FacilityId>> {
    inst.graph.check_vertex(v)?;
    Ok(Coverage::new(inst, s)?.ranges.swap_remove(v))
}

/// A_s(f): clients that can patronize facility `f`.
pub fn attraction_range(inst: &Instance, s: &Placement, f: FacilityId) -> Result<Vec<VertexId>> {
    inst.check_facility(f)?;
    Ok(Coverage::new(inst, s)?.attraction.swap_remove(f))
}

/// Weighted participation rate w(s): total weight of covered clients.
pub fn participation(inst: &Instance, s: &Placement) -> Result<Scalar> {
    let cov = Coverage::new(inst, s)?;
    Ok(cov.covered().map(|v| inst.graph.weight(v)).sum())
}

/// Probability that each client patronizes each facility (row per vertex).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientProfile {
    prob: Vec<Vec<Scalar>>,
}

impl ClientProfile {
    pub fn zeros(n: usize, k: usize) -> Self {
        ClientProfile { prob: vec![vec![Scalar::zero(); k]; n] }
    }

    pub fn from_rows(prob: Vec<Vec<Scalar>>) -> Self {
        ClientProfile { prob }
    }

    /// Pure profile from a per-vertex facility choice (`None` = uncovered).
    pub fn from_assignment(assign: &[Option<FacilityId>], k: usize) -> Self {
        let mut p = ClientProfile::zeros(assign.len(), k);
        for (v, a) in assign.iter().enumerate() {
            if let Some(f) = a {
                p.prob[v][*f] = Scalar::one();
            }
        }
        p
    }

    pub fn get(&self, v: VertexId, f: FacilityId) -> &Scalar {
        &self.prob[v][f]
    }

    pub fn set(&mut self, v: VertexId, f: FacilityId, p: Scalar) {
        self.prob[v][f] = p;
    }

    pub fn row(&self, v: VertexId) -> &[Scalar] {
        &self.prob[v]
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.prob
    }

    pub fn is_pure(&self) -> bool {
        self.prob.iter().flatten().all(|p| p.is_zero() || *p == Scalar::one())
    }

    /// The chosen facility of each client when the profile is pure.
    pub fn as_assignment(&self) -> Option<Vec<Option<FacilityId>>> {
        if !self.is_pure() {
            return None;
        }
        Some(self.prob.iter().map(|row| row.iter().position(|p| !p.is_zero())).collect())
    }

    /// Checks both feasibility conditions against the placement.
    pub fn check_feasible(&self, inst: &Instance, cov: &Coverage) -> Result<()> {
        if self.prob.len() != inst.n() {
            return Err(FlgError::Input(format!("profile has {} rows, expected {}", self.prob.len(), inst.n())));
        }
        let one = Scalar::one();
        for (v, row) in self.prob.iter().enumerate() {
            if row.len() != inst.k() {
                return Err(FlgError::Infeasible {
                    client: v,
                    reason: format!("row has {} entries, expected {}", row.len(), inst.k()),
                });
            }
            for (f, p) in row.iter().enumerate() {
                if p.is_negative() || *p > one {
                    return Err(FlgError::Infeasible {
                        client: v,
                        reason: format!("probability {p} for facility {f} outside [0,1]"),
                    });
                }
                if !p.is_zero() && !cov.in_range(v, f) {
                    return Err(FlgError::Infeasible {
                        client: v,
                        reason: format!("positive probability on facility {f} outside the shopping range"),
                    });
                }
            }
            let total: Scalar = row.iter().sum();
            if cov.is_covered(v) && total != one {
                return Err(FlgError::Infeasible {
                    client: v,
                    reason: format!("probabilities sum to {total}, expected 1"),
                });
            }
        }
        Ok(())
    }
}

/// Facility loads ℓ_f, their sorted copy ℓ_sort, and the participation w(s).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub load: Vec<Scalar>,
    pub sorted: Vec<Scalar>,
    pub participation: Scalar,
}

impl LoadReport {
    /// Lexicographic comparison of the sorted load vectors (the potential).
    pub fn cmp_sorted(&self, other: &LoadReport) -> Ordering {
        lex_cmp(&self.sorted, &other.sorted)
    }
}

pub(crate) fn loads_unchecked(inst: &Instance, cov: &Coverage, sigma: &ClientProfile) -> LoadReport {
    let k = inst.k();
    let mut load = vec![Scalar::zero(); k];
    for (v, row) in sigma.rows().iter().enumerate() {
        for (f, p) in row.iter().enumerate() {
            if !p.is_zero() {
                load[f] += p * inst.graph.weight(v);
            }
        }
    }
    let mut sorted = load.clone();
    sorted.sort();
    let participation = cov.covered().map(|v| inst.graph.weight(v)).sum();
    LoadReport { load, sorted, participation }
}

/// Expected facility loads of a feasible profile.
pub fn facility_loads(inst: &Instance, s: &Placement, sigma: &ClientProfile) -> Result<LoadReport> {
    let cov = Coverage::new(inst, s)?;
    sigma.check_feasible(inst, &cov)?;
    Ok(loads_unchecked(inst, &cov, sigma))
}

/// v-excluded load ℓ_{-v,f}: load of `f` contributed by all clients other than `v`.
pub fn excluded_load(
    inst: &Instance,
    s: &Placement,
    sigma: &ClientProfile,
    v: VertexId,
    f: FacilityId,
) -> Result<Scalar> {
    inst.graph.check_vertex(v)?;
    inst.check_facility(f)?;
    let report = facility_loads(inst, s, sigma)?;
    Ok(&report.load[f] - &(sigma.get(v, f) * inst.graph.weight(v)))
}

/// Expected waiting time L_v = w(v) + Σ_f σ_{v,f} · ℓ_{-v,f}.
pub fn waiting_time(inst: &Instance, s: &Placement, sigma: &ClientProfile, v: VertexId) -> Result<Scalar> {
    inst.graph.check_vertex(v)?;
    let cov = Coverage::new(inst, s)?;
    sigma.check_feasible(inst, &cov)?;
    if !cov.is_covered(v) {
        return Err(FlgError::UncoveredClient(v));
    }
    let report = loads_unchecked(inst, &cov, sigma);
    let wv = inst.graph.weight(v);
    let mut total = wv.clone();
    for &f in &cov.ranges[v] {
        let p = sigma.get(v, f);
        if !p.is_zero() {
            let excl = &report.load[f] - &(p * wv);
            total += p * &excl;
        }
    }
    Ok(total)
}

/// Outcome of a client-equilibrium check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EqVerdict {
    Ok,
    /// `client` puts positive probability on `facility` although `better`
    /// has strictly smaller excluded load.
    Violation {
        client: VertexId,
        facility: FacilityId,
        better: FacilityId,
    },
}

impl EqVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, EqVerdict::Ok)
    }
}

/// All violations in (client, facility, better) order.
pub(crate) fn violations_unchecked(
    inst: &Instance,
    cov: &Coverage,
    sigma: &ClientProfile,
    report: &LoadReport,
    first_only: bool,
) -> Vec<EqVerdict> {
    let mut out = Vec::new();
    for v in cov.covered() {
        let wv = inst.graph.weight(v);
        let excl: Vec<(FacilityId, Scalar)> =
            cov.ranges[v].iter().map(|&f| (f, &report.load[f] - &(sigma.get(v, f) * wv))).collect();
        let min = excl.iter().map(|(_, l)| l).min().expect("covered client has a facility");
        for (f, lf) in &excl {
            if sigma.get(v, *f).is_zero() || lf == min {
                continue;
            }
            for (g, lg) in &excl {
                if lg < lf {
                    out.push(EqVerdict::Violation { client: v, facility: *f, better: *g });
                    if first_only {
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// Checks that every client only patronizes facilities of minimal excluded load.
pub fn verify_client_equilibrium(inst: &Instance, s: &Placement, sigma: &ClientProfile) -> Result<EqVerdict> {
    let cov = Coverage::new(inst, s)?;
    sigma.check_feasible(inst, &cov)?;
    let report = loads_unchecked(inst, &cov, sigma);
    Ok(violations_unchecked(inst, &cov, sigma, &report, true).pop().unwrap_or(EqVerdict::Ok))
}

/// Every violation witness, not just the first.
pub fn equilibrium_violations(inst: &Instance, s: &Placement, sigma: &ClientProfile) -> Result<Vec<EqVerdict>> {
    let cov = Coverage::new(inst, s)?;
    sigma.check_feasible(inst, &cov)?;
    let report = loads_unchecked(inst, &cov, sigma);
    Ok(violations_unchecked(inst, &cov, sigma, &report, false))
}

/// A permutation π of the facilities; `order[i]` is π(i+1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    order: Vec<FacilityId>,
    position: Vec<usize>,
}

impl Permutation {
    pub fn new(order: Vec<FacilityId>) -> Result<Self> {
        let k = order.len();
        let mut position = vec![usize::MAX; k];
        for (i, &f) in order.iter().enumerate() {
            if f >= k || position[f] != usize::MAX {
                return Err(FlgError::NotBijective(order));
            }
            position[f] = i;
        }
        Ok(Permutation { order, position })
    }

    pub fn identity(k: usize) -> Self {
        Permutation::new((0..k).collect()).expect("identity is bijective")
    }

    /// Facilities sorted by nonincreasing load, ties by facility id.
    pub fn by_decreasing_load(load: &[Scalar]) -> Self {
        let mut order: Vec<_> = (0..load.len()).collect();
        order.sort_by(|&f, &g| load[g].cmp(&load[f]).then(f.cmp(&g)));
        Permutation::new(order).expect("sorted indices are bijective")
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[FacilityId] {
        &self.order
    }

    /// Zero-based position of `f` (π⁻¹(f) - 1).
    pub fn position(&self, f: FacilityId) -> usize {
        self.position[f]
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.order.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// ℓ^π = (ℓ_{π(1)}, ..., ℓ_{π(k)}).
pub fn pi_loads(report: &LoadReport, pi: &Permutation) -> Result<Vec<Scalar>> {
    if pi.len() != report.load.len() {
        return Err(FlgError::NotBijective(pi.order().to_vec()));
    }
    Ok(pi.order().iter().map(|&f| report.load[f].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> Scalar {
        Scalar::ratio(1, 2)
    }

    /// Two clients (weights 3 and 1) that both reach two facility vertices.
    fn two_clients_two_spots(delta: Scalar) -> (Instance, Placement) {
        let g = HostGraph::new(vec![Scalar::int(3), Scalar::int(1), delta.clone(), delta], None).unwrap();
        let mut g = g;
        for c in 0..2 {
            for loc in 2..4 {
                g.add_arc(c, loc).unwrap();
            }
        }
        let inst = Instance::unrestricted(g, 2).unwrap();
        (inst, Placement(vec![2, 3]))
    }

    fn mixed_profile() -> ClientProfile {
        let h = half();
        ClientProfile::from_rows(vec![
            vec![h.clone(), h.clone()],
            vec![h.clone(), h],
            vec![Scalar::one(), Scalar::zero()],
            vec![Scalar::zero(), Scalar::one()],
        ])
    }

    #[test]
    fn ranges_are_consistent() {
        let (inst, s) = two_clients_two_spots(Scalar::ratio(1, 1000));
        assert_eq!(shopping_range(&inst, &s, 0).unwrap(), vec![0, 1]);
        assert_eq!(shopping_range(&inst, &s, 2).unwrap(), vec![0]);
        assert_eq!(attraction_range(&inst, &s, 1).unwrap(), vec![0, 1, 3]);
        assert!(matches!(shopping_range(&inst, &s, 9), Err(FlgError::UnknownVertex(9))));
        assert!(matches!(attraction_range(&inst, &s, 2), Err(FlgError::FacilityOutOfRange { .. })));
    }

    #[test]
    fn isolated_and_colocated() {
        let g = HostGraph::unit(2);
        let inst = Instance::unrestricted(g, 2).unwrap();
        let s = Placement(vec![0, 0]);
        assert!(shopping_range(&inst, &s, 1).unwrap().is_empty());
        assert_eq!(shopping_range(&inst, &s, 0).unwrap(), vec![0, 1]);
        assert_eq!(attraction_range(&inst, &s, 0).unwrap(), attraction_range(&inst, &s, 1).unwrap());
        assert_eq!(attraction_range(&inst, &s, 0).unwrap(), vec![0]);
    }

    #[test]
    fn mixed_loads_and_waiting_time() {
        let delta = Scalar::ratio(1, 1000);
        let (inst, s) = two_clients_two_spots(delta.clone());
        let sigma = mixed_profile();
        let rep = facility_loads(&inst, &s, &sigma).unwrap();
        assert_eq!(rep.load, vec![Scalar::int(2) + &delta, Scalar::int(2) + &delta]);
        // ½ from the unit client, plus the location client on that facility.
        let ex = excluded_load(&inst, &s, &sigma, 0, 0).unwrap();
        assert_eq!(ex, half() + &delta);
        // 3 + ½·(½+δ) + ½·(½+δ)
        let wt = waiting_time(&inst, &s, &sigma, 0).unwrap();
        assert_eq!(wt, Scalar::ratio(7, 2) + &delta);
        assert!(verify_client_equilibrium(&inst, &s, &sigma).unwrap().is_ok());
    }

    #[test]
    fn excluded_plus_own_equals_load() {
        let (inst, s) = two_clients_two_spots(Scalar::ratio(1, 7));
        let sigma = mixed_profile();
        let rep = facility_loads(&inst, &s, &sigma).unwrap();
        for v in 0..4 {
            for f in 0..2 {
                let ex = excluded_load(&inst, &s, &sigma, v, f).unwrap();
                assert_eq!(ex + sigma.get(v, f) * inst.graph.weight(v), rep.load[f]);
            }
        }
    }

    #[test]
    fn pure_profiles_and_waiting_time() {
        let mut g = HostGraph::unit(5);
        for v in 1..5 {
            g.add_arc(v, 0).unwrap();
        }
        let inst = Instance::unrestricted(g, 2).unwrap();
        let s = Placement(vec![0, 4]);
        let assign: Vec<_> = (0..5).map(|_| Some(0)).collect();
        let sigma = ClientProfile::from_assignment(&assign, 2);
        let rep = facility_loads(&inst, &s, &sigma).unwrap();
        assert_eq!(rep.load, vec![Scalar::int(5), Scalar::zero()]);
        assert_eq!(rep.sorted, vec![Scalar::zero(), Scalar::int(5)]);
        for v in 0..5 {
            assert_eq!(waiting_time(&inst, &s, &sigma, v).unwrap(), rep.load[0]);
        }
        // Client 4 sits on facility 1's vertex: moving there is strictly better.
        let verdict = verify_client_equilibrium(&inst, &s, &sigma).unwrap();
        assert_eq!(verdict, EqVerdict::Violation { client: 4, facility: 0, better: 1 });
    }

    #[test]
    fn sole_client_waits_own_weight() {
        let g = HostGraph::new(vec![Scalar::ratio(7, 3)], None).unwrap();
        let inst = Instance::unrestricted(g, 1).unwrap();
        let s = Placement(vec![0]);
        let sigma = ClientProfile::from_assignment(&[Some(0)], 1);
        assert_eq!(waiting_time(&inst, &s, &sigma, 0).unwrap(), Scalar::ratio(7, 3));
        let sigma0 = ClientProfile::from_assignment(&[Some(0)], 1);
        assert_eq!(excluded_load(&inst, &s, &sigma0, 0, 0).unwrap(), Scalar::zero());
    }

    #[test]
    fn uncovered_clients() {
        let g = HostGraph::unit(3);
        let inst = Instance::new(g, vec![vec![0]]).unwrap();
        let s = Placement(vec![0]);
        let sigma = ClientProfile::from_assignment(&[Some(0), None, None], 1);
        assert_eq!(waiting_time(&inst, &s, &sigma, 1), Err(FlgError::UncoveredClient(1)));
        assert_eq!(participation(&inst, &s).unwrap(), Scalar::one());
    }

    #[test]
    fn uncovered_rows_never_violate() {
        // Every facility covers its own vertex, so "nobody covered" cannot occur;
        // uncovered clients simply carry all-zero rows and are skipped.
        let mut g = HostGraph::unit(3);
        g.add_arc(0, 1).unwrap();
        let inst = Instance::new(g, vec![vec![2], vec![2]]).unwrap();
        let s = Placement(vec![2, 2]);
        let sigma = ClientProfile::from_rows(vec![
            vec![Scalar::zero(), Scalar::zero()],
            vec![Scalar::zero(), Scalar::zero()],
            vec![Scalar::one(), Scalar::zero()],
        ]);
        assert!(verify_client_equilibrium(&inst, &s, &sigma).unwrap().is_ok());
        assert!(equilibrium_violations(&inst, &s, &sigma).unwrap().is_empty());
    }

    #[test]
    fn feasibility_errors() {
        let (inst, s) = two_clients_two_spots(Scalar::ratio(1, 1000));
        let mut sigma = mixed_profile();
        sigma.set(2, 1, Scalar::zero());
        sigma.set(2, 0, Scalar::ratio(1, 2));
        assert!(matches!(facility_loads(&inst, &s, &sigma), Err(FlgError::Infeasible { client: 2, .. })));
        let mut sigma = mixed_profile();
        sigma.set(2, 1, Scalar::ratio(1, 2));
        sigma.set(2, 0, Scalar::ratio(1, 2));
        // vertex 2 cannot reach facility 1 (placed on vertex 3)
        let err = verify_client_equilibrium(&inst, &s, &sigma).unwrap_err();
        assert!(matches!(err, FlgError::Infeasible { client: 2, .. }));
    }

    #[test]
    fn permutations() {
        let rep = LoadReport {
            load: vec![Scalar::int(2), Scalar::int(3)],
            sorted: vec![Scalar::int(2), Scalar::int(3)],
            participation: Scalar::int(5),
        };
        let id = Permutation::identity(2);
        assert_eq!(pi_loads(&rep, &id).unwrap(), vec![Scalar::int(2), Scalar::int(3)]);
        let sw = Permutation::new(vec![1, 0]).unwrap();
        assert_eq!(pi_loads(&rep, &sw).unwrap(), vec![Scalar::int(3), Scalar::int(2)]);
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        let by_load = Permutation::by_decreasing_load(&[Scalar::int(1), Scalar::int(4), Scalar::int(1)]);
        assert_eq!(by_load.order(), &[1, 0, 2]);
        assert_eq!(by_load.position(0), 1);
    }

    #[test]
    fn placement_enumeration() {
        let inst = Instance::new(HostGraph::unit(3), vec![vec![0, 2], vec![1]]).unwrap();
        let all: Vec<_> = inst.placements().collect();
        assert_eq!(all, vec![Placement(vec![0, 1]), Placement(vec![2, 1])]);
        assert_eq!(inst.placement_count(), 2);
        assert!(inst.validate_placement(&Placement(vec![1, 1])).is_err());
    }

    #[test]
    fn graph_validation() {
        assert!(HostGraph::new(vec![Scalar::zero()], None).is_err());
        assert!(HostGraph::new(vec![Scalar::int(-1)], None).is_err());
        assert!(HostGraph::new(vec![Scalar::one(); 2], Some(vec!["a".into(), "a".into()])).is_err());
        let mut g = HostGraph::unit(2);
        g.add_arc(0, 0).unwrap();
        assert_eq!(g.arcs().count(), 0);
        assert_eq!(g.neighborhood(0), vec![0]);
        assert!(g.add_arc(0, 5).is_err());
        assert!(Instance::new(HostGraph::unit(2), vec![vec![]]).is_err());
    }
}
