//! Client equilibria: rounded and π-favoring profiles for unweighted games,
//! greedy pure equilibria for weighted games, and exact enumeration of all
//! mixed equilibria on micro instances.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::classes::{class_set_with, ClassSet};
use crate::error::{FlgError, Result};
use crate::flow::{max_cost_flow, FlowNetwork};
use crate::game::{
    loads_unchecked, violations_unchecked, ClientProfile, Coverage, FacilityId, Instance, Permutation, Placement,
    VertexId,
};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::scalar::Scalar;

/// A pure client profile: each covered client patronizes one facility.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PureAssignment {
    /// `assign[v]` is `None` exactly for uncovered clients.
    pub assign: Vec<Option<FacilityId>>,
}

impl PureAssignment {
    pub fn facility_of(&self, v: VertexId) -> Option<FacilityId> {
        self.assign[v]
    }

    pub fn to_profile(&self, k: usize) -> ClientProfile {
        ClientProfile::from_assignment(&self.assign, k)
    }

    pub fn loads(&self, inst: &Instance) -> Vec<Scalar> {
        let mut load = vec![Scalar::zero(); inst.k()];
        for (v, f) in self.assign.iter().enumerate() {
            if let Some(f) = f {
                load[*f] += inst.graph.weight(v);
            }
        }
        load
    }
}

fn integer_load(load: &Scalar) -> (i64, i64) {
    let lo = load.floor().try_into().expect("class load fits in i64");
    let hi = load.ceil().try_into().expect("class load fits in i64");
    (lo, hi)
}

/// Rounded profile by augmenting paths, class by class.
pub fn rounded_profile(inst: &Instance, s: &Placement, cs: &ClassSet) -> Result<PureAssignment> {
    inst.require_unweighted()?;
    let cov = Coverage::new(inst, s)?;
    let mut assign: Vec<Option<FacilityId>> = vec![None; inst.n()];
    let mut count = vec![0usize; inst.k()];
    for class in &cs.classes {
        let facs = &class.facilities;
        let clients = &class.clients;
        let mut remaining = clients.len();
        while remaining > 0 {
            let min = facs.iter().map(|&f| count[f]).min().expect("class has a facility");
            let mut fac_seen = vec![false; inst.k()];
            let mut fac_parent: Vec<Option<VertexId>> = vec![None; inst.k()];
            let mut cli_parent: Vec<Option<FacilityId>> = vec![None; inst.n()];
            let mut queue = VecDeque::new();
            for &f in facs {
                if count[f] == min {
                    fac_seen[f] = true;
                    queue.push_back(f);
                }
            }
            while let Some(f) = queue.pop_front() {
                for &v in clients {
                    if cli_parent[v].is_some() || assign[v] == Some(f) || !cov.in_range(v, f) {
                        continue;
                    }
                    cli_parent[v] = Some(f);
                    if let Some(g) = assign[v] {
                        if !fac_seen[g] {
                            fac_seen[g] = true;
                            fac_parent[g] = Some(v);
                            queue.push_back(g);
                        }
                    }
                }
            }
            let target = clients
                .iter()
                .copied()
                .find(|&v| assign[v].is_none() && cli_parent[v].is_some())
                .ok_or_else(|| FlgError::Internal("no augmenting path in a class".into()))?;
            let mut v = target;
            loop {
                let f = cli_parent[v].expect("client on the search tree");
                assign[v] = Some(f);
                match fac_parent[f] {
                    None => {
                        count[f] += 1;
                        break;
                    }
                    Some(u) => v = u,
                }
            }
            remaining -= 1;
        }
    }
    Ok(PureAssignment { assign })
}

/// True iff every covered client is served within its class and every
/// facility load is the floor or ceiling of its class average. Always false
/// for weighted instances.
pub fn is_rounded(inst: &Instance, s: &Placement, cs: &ClassSet, a: &PureAssignment) -> bool {
    if !inst.is_unweighted() || a.assign.len() != inst.n() {
        return false;
    }
    let Ok(cov) = Coverage::new(inst, s) else { return false };
    for v in 0..inst.n() {
        match (a.assign[v], cs.class_of_client[v]) {
            (None, None) => {}
            (Some(f), Some(c)) => {
                if f >= inst.k() || !cov.in_range(v, f) || cs.class_of_facility[f] != c {
                    return false;
                }
            }
            _ => return false,
        }
    }
    let loads = a.loads(inst);
    (0..inst.k()).all(|f| {
        let (lo, hi) = integer_load(cs.facility_load(f));
        let l = &loads[f];
        *l == Scalar::int(lo) || *l == Scalar::int(hi)
    })
}

/// π-favoring rounded profile via integral max-cost flow.
pub fn favoring_profile(inst: &Instance, s: &Placement, pi: &Permutation) -> Result<PureAssignment> {
    inst.require_unweighted()?;
    let k = inst.k();
    if pi.len() != k {
        return Err(FlgError::NotBijective(pi.order().to_vec()));
    }
    let cov = Coverage::new(inst, s)?;
    let cs = class_set_with(inst, &cov)?;
    favoring_with(inst, &cov, &cs, pi)
}

pub(crate) fn favoring_with(
    inst: &Instance,
    cov: &Coverage,
    cs: &ClassSet,
    pi: &Permutation,
) -> Result<PureAssignment> {
    let n = inst.n();
    let k = inst.k();
    let (source, sink) = (0, 1);
    let cnode = |v: usize| 2 + v;
    let fnode = |f: usize| 2 + n + f;
    let mut net = FlowNetwork::new(2 + n + k, source, sink);
    let mut client_arcs = Vec::new();
    let mut covered = 0i64;
    for v in cov.covered() {
        covered += 1;
        net.add_arc(source, cnode(v), 1i64, BigInt::zero());
        let c = cs.class_of_client[v].expect("covered client has a class");
        let mut any = false;
        for &f in &cov.ranges[v] {
            if cs.class_of_facility[f] == c {
                let idx = net.add_arc(cnode(v), fnode(f), 1, BigInt::zero());
                client_arcs.push((idx, v, f));
                any = true;
            }
        }
        if !any {
            return Err(FlgError::Internal(format!("client {v} has no facility of its own class in range")));
        }
    }
    let top = BigInt::one() << k;
    for f in 0..k {
        let (lo, _) = integer_load(cs.facility_load(f));
        net.add_arc(fnode(f), sink, lo, top.clone());
        net.add_arc(fnode(f), sink, 1, BigInt::one() << (k - 1 - pi.position(f)));
    }
    let result = max_cost_flow(&net)?;
    if result.value != covered {
        return Err(FlgError::Internal("max-cost flow does not serve every covered client".into()));
    }
    let mut assign = vec![None; n];
    for (idx, v, f) in client_arcs {
        if result.flow[idx] == 1 {
            assign[v] = Some(f);
        }
    }
    Ok(PureAssignment { assign })
}

/// Every rounded assignment, by exhaustive search. Micro instances only.
pub fn all_rounded_assignments(
    inst: &Instance,
    s: &Placement,
    cs: &ClassSet,
    max_clients: usize,
) -> Result<Vec<PureAssignment>> {
    inst.require_unweighted()?;
    let cov = Coverage::new(inst, s)?;
    let clients: Vec<VertexId> = cov.covered().collect();
    if clients.len() > max_clients {
        return Err(FlgError::GuardExceeded {
            what: "rounded enumeration clients".into(),
            limit: max_clients,
            actual: clients.len(),
        });
    }
    let options: Vec<Vec<FacilityId>> = clients
        .iter()
        .map(|&v| {
            let c = cs.class_of_client[v];
            cov.ranges[v].iter().copied().filter(|&f| Some(cs.class_of_facility[f]) == c).collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut current = PureAssignment { assign: vec![None; inst.n()] };
    fn rec(
        i: usize,
        clients: &[VertexId],
        options: &[Vec<FacilityId>],
        current: &mut PureAssignment,
        out: &mut Vec<PureAssignment>,
        check: &dyn Fn(&PureAssignment) -> bool,
    ) {
        if i == clients.len() {
            if check(current) {
                out.push(current.clone());
            }
            return;
        }
        for &f in &options[i] {
            current.assign[clients[i]] = Some(f);
            rec(i + 1, clients, options, current, out, check);
        }
        current.assign[clients[i]] = None;
    }
    let check = |a: &PureAssignment| is_rounded(inst, s, cs, a);
    rec(0, &clients, &options, &mut current, &mut out, &check);
    Ok(out)
}

/// Pure equilibrium for arbitrary weights: greedy by nonincreasing weight,
/// then best-response repair until no client can switch.
pub fn greedy_weighted_equilibrium(inst: &Instance, s: &Placement) -> Result<PureAssignment> {
    let cov = Coverage::new(inst, s)?;
    Ok(greedy_with(inst, &cov))
}

pub(crate) fn greedy_with(inst: &Instance, cov: &Coverage) -> PureAssignment {
    let mut order: Vec<VertexId> = cov.covered().collect();
    order.sort_by(|&u, &v| inst.graph.weight(v).cmp(inst.graph.weight(u)).then(u.cmp(&v)));
    let mut load = vec![Scalar::zero(); inst.k()];
    let mut assign = vec![None; inst.n()];
    let argmin = |load: &[Scalar], range: &[FacilityId], skip: Option<FacilityId>| {
        range.iter().copied().filter(|&f| Some(f) != skip).min_by(|&f, &g| load[f].cmp(&load[g]).then(f.cmp(&g)))
    };
    for &v in &order {
        let f = argmin(&load, &cov.ranges[v], None).expect("covered client");
        assign[v] = Some(f);
        load[f] += inst.graph.weight(v);
    }
    // Each switch strictly lowers Σ_f ℓ_f², so the repair terminates.
    'repair: loop {
        for v in cov.covered() {
            let f = assign[v].expect("assigned");
            let wv = inst.graph.weight(v);
            let own = &load[f] - wv;
            if let Some(g) = argmin(&load, &cov.ranges[v], Some(f)) {
                if load[g] < own {
                    load[f] -= wv;
                    load[g] += wv;
                    assign[v] = Some(g);
                    continue 'repair;
                }
            }
        }
        break;
    }
    PureAssignment { assign }
}

/// Every pure client equilibrium, by exhaustive search.
pub fn all_pure_equilibria(inst: &Instance, s: &Placement, max_clients: usize) -> Result<Vec<PureAssignment>> {
    let cov = Coverage::new(inst, s)?;
    let clients: Vec<VertexId> = cov.covered().collect();
    if clients.len() > max_clients {
        return Err(FlgError::GuardExceeded {
            what: "pure enumeration clients".into(),
            limit: max_clients,
            actual: clients.len(),
        });
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; clients.len()];
    loop {
        let mut assign = vec![None; inst.n()];
        for (i, &v) in clients.iter().enumerate() {
            assign[v] = Some(cov.ranges[v][idx[i]]);
        }
        let a = PureAssignment { assign };
        let sigma = a.to_profile(inst.k());
        let report = loads_unchecked(inst, &cov, &sigma);
        if violations_unchecked(inst, &cov, &sigma, &report, true).is_empty() {
            out.push(a);
        }
        let mut i = 0;
        loop {
            if i == clients.len() {
                return Ok(out);
            }
            idx[i] += 1;
            if idx[i] < cov.ranges[clients[i]].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Size limits for exact equilibrium enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumGuard {
    pub clients: usize,
    pub facilities: usize,
}

impl Default for EnumGuard {
    fn default() -> Self {
        EnumGuard { clients: 8, facilities: 3 }
    }
}

/// Exact support of every covered client; `None` for uncovered clients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SupportPattern {
    pub support: Vec<Option<Vec<FacilityId>>>,
}

/// Probability variables `x[v][f]` for covered `v` and `f` in range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileVars {
    n: usize,
    k: usize,
    pairs: Vec<(VertexId, FacilityId)>,
    index: Vec<Vec<Option<usize>>>,
}

impl ProfileVars {
    pub fn new(n: usize, k: usize, cov: &Coverage) -> Self {
        let mut pairs = Vec::new();
        let mut index = vec![vec![None; k]; n];
        for v in cov.covered() {
            for &f in &cov.ranges[v] {
                index[v][f] = Some(pairs.len());
                pairs.push((v, f));
            }
        }
        ProfileVars { n, k, pairs, index }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn var(&self, v: VertexId, f: FacilityId) -> Option<usize> {
        self.index[v][f]
    }

    pub fn pairs(&self) -> &[(VertexId, FacilityId)] {
        &self.pairs
    }

    pub fn profile(&self, point: &[Scalar]) -> ClientProfile {
        let mut sigma = ClientProfile::zeros(self.n, self.k);
        for (i, &(v, f)) in self.pairs.iter().enumerate() {
            sigma.set(v, f, point[i].clone());
        }
        sigma
    }

    /// ℓ_f as a linear form, optionally excluding client `skip`.
    pub fn load_expr(&self, inst: &Instance, f: FacilityId, skip: Option<VertexId>) -> Vec<(usize, Scalar)> {
        self.pairs
            .iter()
            .enumerate()
            .filter(|(_, &(v, g))| g == f && Some(v) != skip)
            .map(|(i, &(v, _))| (i, inst.graph.weight(v).clone()))
            .collect()
    }
}

/// The closure of the set of client equilibria with a given exact support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquilibriumPolytope {
    pub pattern: SupportPattern,
    pub vars: ProfileVars,
    /// Constraints over `vars`.
    pub lp: LinearProgram,
    /// A point whose support is exactly `pattern`.
    pub sample: ClientProfile,
}

impl EquilibriumPolytope {
    pub fn load_range(&self, inst: &Instance, f: FacilityId) -> (Scalar, Scalar) {
        let expr = self.vars.load_expr(inst, f, None);
        let lo = self.lp.minimize(&expr).value().cloned().expect("nonempty bounded polytope");
        let hi = self.lp.maximize(&expr).value().cloned().expect("nonempty bounded polytope");
        (lo, hi)
    }

    /// The unique point if the polytope is zero-dimensional.
    pub fn point(&self) -> Option<ClientProfile> {
        for i in 0..self.vars.len() {
            let e = [(i, Scalar::one())];
            if self.lp.minimize(&e).value() != self.lp.maximize(&e).value() {
                return None;
            }
        }
        Some(self.sample.clone())
    }

    /// True iff every point of `other` lies in `self`.
    pub fn contains(&self, other: &EquilibriumPolytope) -> bool {
        for c in self.lp.constraints() {
            let hi = other.lp.maximize(&c.coeffs);
            let lo = other.lp.minimize(&c.coeffs);
            let (Some(hi), Some(lo)) = (hi.value(), lo.value()) else { return false };
            let ok = match c.rel {
                Relation::Le => *hi <= c.rhs,
                Relation::Ge => *lo >= c.rhs,
                Relation::Eq => *hi == c.rhs && *lo == c.rhs,
            };
            if !ok {
                return false;
            }
        }
        true
    }
}

fn add_client_rows(
    inst: &Instance,
    cov: &Coverage,
    vars: &ProfileVars,
    v: VertexId,
    support: &[FacilityId],
    lp: &mut LinearProgram,
    strict: Option<usize>,
) {
    let range = &cov.ranges[v];
    for &f in range {
        let x = vars.var(v, f).expect("variable in range");
        if !support.contains(&f) {
            lp.add(vec![(x, Scalar::one())], Relation::Eq, Scalar::zero());
        } else if let Some(t) = strict {
            lp.add(vec![(x, Scalar::one()), (t, -Scalar::one())], Relation::Ge, Scalar::zero());
        }
    }
    let base = vars.load_expr(inst, support[0], Some(v));
    let diff = |other: FacilityId| {
        let mut e = base.clone();
        e.extend(vars.load_expr(inst, other, Some(v)).into_iter().map(|(i, a)| (i, -a)));
        e
    };
    for &f in &support[1..] {
        lp.add(diff(f), Relation::Eq, Scalar::zero());
    }
    for &g in range {
        if !support.contains(&g) {
            lp.add(diff(g), Relation::Le, Scalar::zero());
        }
    }
}

fn simplex_rows(cov: &Coverage, vars: &ProfileVars, lp: &mut LinearProgram) {
    for v in cov.covered() {
        let row = cov.ranges[v].iter().map(|&f| (vars.var(v, f).expect("in range"), Scalar::one())).collect();
        lp.add(row, Relation::Eq, Scalar::one());
    }
}

/// All equilibrium polytopes of `s`; polytopes contained in another are dropped.
pub fn enumerate_equilibria(inst: &Instance, s: &Placement, guard: EnumGuard) -> Result<Vec<EquilibriumPolytope>> {
    let all = equilibrium_polytopes(inst, s, guard)?;
    let mut keep = vec![true; all.len()];
    for i in 0..all.len() {
        for j in 0..all.len() {
            if i == j || !keep[j] {
                continue;
            }
            let sub = all[i].pattern.support.iter().zip(&all[j].pattern.support).all(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => a.iter().all(|f| b.contains(f)),
                _ => true,
            });
            if sub && all[j].contains(&all[i]) {
                keep[i] = false;
                break;
            }
        }
    }
    Ok(all.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect())
}

/// One polytope per feasible exact support pattern, in backtracking order.
/// Their union is the full equilibrium set and their relative interiors are
/// disjoint.
pub fn equilibrium_polytopes(inst: &Instance, s: &Placement, guard: EnumGuard) -> Result<Vec<EquilibriumPolytope>> {
    let cov = Coverage::new(inst, s)?;
    if inst.k() > guard.facilities {
        return Err(FlgError::GuardExceeded {
            what: "equilibrium enumeration facilities (micro-only)".into(),
            limit: guard.facilities,
            actual: inst.k(),
        });
    }
    let clients: Vec<VertexId> = cov.covered().collect();
    if clients.len() > guard.clients {
        return Err(FlgError::GuardExceeded {
            what: "equilibrium enumeration clients (micro-only)".into(),
            limit: guard.clients,
            actual: clients.len(),
        });
    }
    let vars = ProfileVars::new(inst.n(), inst.k(), &cov);
    let t = vars.len();
    let mut closure = LinearProgram::new(t);
    simplex_rows(&cov, &vars, &mut closure);
    let mut strict = LinearProgram::new(t + 1);
    simplex_rows(&cov, &vars, &mut strict);
    strict.add(vec![(t, Scalar::one())], Relation::Le, Scalar::one());
    let mut chosen: Vec<Option<Vec<FacilityId>>> = vec![None; inst.n()];
    let mut out = Vec::new();
    let ctx = EnumCtx { inst, cov: &cov, vars: &vars, clients: &clients };
    ctx.recurse(0, &mut chosen, &closure, &strict, &mut out);
    Ok(out)
}

struct EnumCtx<'a> {
    inst: &'a Instance,
    cov: &'a Coverage,
    vars: &'a ProfileVars,
    clients: &'a [VertexId],
}

impl EnumCtx<'_> {
    fn recurse(
        &self,
        i: usize,
        chosen: &mut Vec<Option<Vec<FacilityId>>>,
        closure: &LinearProgram,
        strict: &LinearProgram,
        out: &mut Vec<EquilibriumPolytope>,
    ) {
        let t = self.vars.len();
        // Relaxation: decided clients' constraints with strict supports.
        let probe = strict.maximize(&[(t, Scalar::one())]);
        let point = match probe {
            LpOutcome::Optimal { value, point } if value.is_positive() => point,
            LpOutcome::Unbounded => unreachable!("probabilities are bounded"),
            _ => return,
        };
        if i == self.clients.len() {
            let sample = self.vars.profile(&point[..t]);
            out.push(EquilibriumPolytope {
                pattern: SupportPattern { support: chosen.clone() },
                vars: self.vars.clone(),
                lp: closure.clone(),
                sample,
            });
            return;
        }
        let v = self.clients[i];
        let range = &self.cov.ranges[v];
        for bits in 1u32..(1u32 << range.len()) {
            let support: Vec<FacilityId> = (0..range.len()).filter(|j| bits >> j & 1 == 1).map(|j| range[j]).collect();
            let mut c = closure.clone();
            add_client_rows(self.inst, self.cov, self.vars, v, &support, &mut c, None);
            let mut st = strict.clone();
            add_client_rows(self.inst, self.cov, self.vars, v, &support, &mut st, Some(t));
            chosen[v] = Some(support);
            self.recurse(i + 1, chosen, &c, &st, out);
        }
        chosen[v] = None;
    }
}
