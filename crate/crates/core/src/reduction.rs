//! Instance generator for the reduction from SAT to α-approximate SPE existence.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FlgError, Result};
use crate::game::{FacilityId, HostGraph, Instance, Placement, VertexId};
use crate::instances::{fig5_right_graph, fig7_g3_graph};
use crate::policy::FullProfilePolicy;
use crate::scalar::Scalar;
use crate::spe::PartialCertificate;

/// CNF formula over variables `1..=m`; literal `-i` is the negation of `x_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    m: usize,
    clauses: Vec<Vec<i64>>,
}

impl CnfFormula {
    pub fn new(m: usize, clauses: Vec<Vec<i64>>) -> Result<Self> {
        if m == 0 {
            return Err(FlgError::Input("formula needs at least one variable".into()));
        }
        for (j, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(FlgError::Input(format!("clause {j} is empty")));
            }
            if let Some(l) = c.iter().find(|l| **l == 0 || l.unsigned_abs() as usize > m) {
                return Err(FlgError::Input(format!("clause {j}: literal {l} out of range 1..={m}")));
            }
        }
        Ok(CnfFormula { m, clauses })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    pub fn is_satisfied_by(&self, z: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| z[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    /// A satisfying assignment by exhaustive search (m ≤ 20).
    pub fn solve(&self) -> Option<Vec<bool>> {
        if self.m > 20 {
            return None;
        }
        (0u32..1 << self.m)
            .map(|bits| (0..self.m).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            .find(|z| self.is_satisfied_by(z))
    }

    pub fn random<R: Rng + ?Sized>(m: usize, t: usize, rng: &mut R) -> Self {
        let clauses = (0..t)
            .map(|_| {
                let width = rng.gen_range(1..=m.min(3));
                (0..width)
                    .map(|_| {
                        let var = rng.gen_range(1..=m) as i64;
                        if rng.gen_bool(0.5) {
                            var
                        } else {
                            -var
                        }
                    })
                    .collect()
            })
            .collect();
        CnfFormula { m, clauses }
    }
}

/// DIMACS-like text: clauses separated by `;` or newlines, literals by spaces,
/// optional trailing `0`. The variable count is the largest index used.
impl FromStr for CnfFormula {
    type Err = FlgError;

    fn from_str(s: &str) -> Result<Self> {
        let mut clauses = Vec::new();
        for part in s.split([';', '\n']) {
            let lits: Vec<i64> = part
                .split_whitespace()
                .map(|w| w.parse::<i64>().map_err(|_| FlgError::Input(format!("bad literal '{w}'"))))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .filter(|&l| l != 0)
                .collect();
            if !lits.is_empty() {
                clauses.push(lits);
            }
        }
        let m = clauses.iter().flatten().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
        CnfFormula::new(m, clauses)
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.clauses.iter().map(|c| c.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Vertex and facility ids of the generated instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionLayout {
    pub yes: Vec<VertexId>,
    pub no: Vec<VertexId>,
    pub clauses: Vec<VertexId>,
    pub buffer: Vec<VertexId>,
    /// v1..v6 of the golden-ratio gadget.
    pub gadget: Vec<VertexId>,
    pub v7: VertexId,
    pub v8: VertexId,
    pub q: Vec<FacilityId>,
    pub g: FacilityId,
    pub h: FacilityId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub instance: Instance,
    pub layout: ReductionLayout,
}

/// Weight of every formula vertex: m / (m(t+2) - 1).
pub fn formula_weight(m: usize, t: usize) -> Scalar {
    Scalar::ratio(m as i64, (m * (t + 2)) as i64 - 1)
}

pub fn reduce_sat(formula: &CnfFormula, alpha: &Scalar, eps: &Scalar) -> Result<Reduction> {
    let (m, t) = (formula.m(), formula.t());
    if t < 4 {
        return Err(FlgError::Input(format!("reduction needs at least 4 clauses, got {t}")));
    }
    let phi = Scalar::golden_ratio();
    if *alpha <= Scalar::int(1) || *alpha >= phi {
        return Err(FlgError::Input(format!("alpha must lie in (1, φ), got {alpha}")));
    }
    if *eps >= &phi - alpha {
        return Err(FlgError::Input(format!("eps must be below φ - alpha so that φ - eps > alpha, got {eps}")));
    }
    let g2 = fig5_right_graph(eps)?;
    let g3 = fig7_g3_graph(alpha)?;

    let nb = (m - 1) * t;
    let n1 = 2 * m + t + nb;
    let w = formula_weight(m, t);
    let mut weights = vec![w; n1];
    let mut labels: Vec<String> = (1..=m)
        .map(|i| format!("y{i}"))
        .chain((1..=m).map(|i| format!("n{i}")))
        .chain((1..=t).map(|j| format!("c{j}")))
        .chain((1..=nb).map(|b| format!("b{b}")))
        .collect();
    weights.extend(g2.weights().iter().cloned());
    labels.extend(g2.labels().iter().cloned());
    weights.extend(g3.weights().iter().cloned());
    labels.extend(g3.labels().iter().cloned());
    let mut g = HostGraph::new(weights, Some(labels))?;

    let yes: Vec<VertexId> = (0..m).collect();
    let no: Vec<VertexId> = (m..2 * m).collect();
    let clauses: Vec<VertexId> = (2 * m..2 * m + t).collect();
    let buffer: Vec<VertexId> = (2 * m + t..n1).collect();
    let gadget: Vec<VertexId> = (n1..n1 + 6).collect();
    let (v7, v8) = (n1 + 6, n1 + 7);

    for i in 0..m {
        g.add_edge(yes[i], no[i])?;
    }
    for &b in &buffer {
        for i in 0..m {
            g.add_arc(b, yes[i])?;
            g.add_arc(b, no[i])?;
        }
    }
    for (j, c) in formula.clauses().iter().enumerate() {
        for &l in c {
            let i = l.unsigned_abs() as usize - 1;
            g.add_arc(clauses[j], if l > 0 { yes[i] } else { no[i] })?;
        }
    }
    for (a, b) in g2.arcs() {
        g.add_arc(gadget[a], gadget[b])?;
    }
    g.add_arc(v7, v8)?;

    let mut q_allowed: Vec<VertexId> = (0..n1).collect();
    q_allowed.push(v7);
    let mut allowed = vec![q_allowed; m];
    allowed.push(gadget.clone());
    let mut h_allowed = gadget.clone();
    h_allowed.push(v8);
    allowed.push(h_allowed);
    let instance = Instance::new(g, allowed)?;
    let layout = ReductionLayout { yes, no, clauses, buffer, gadget, v7, v8, q: (0..m).collect(), g: m, h: m + 1 };
    Ok(Reduction { instance, layout })
}

/// The placement used for a satisfying assignment: `q_i` on `y_i` or `n_i`,
/// `g` on v1, `h` on v8.
pub fn assignment_placement(red: &Reduction, z: &[bool]) -> Result<Placement> {
    let l = &red.layout;
    if z.len() != l.q.len() {
        return Err(FlgError::Input(format!("assignment has {} values for {} variables", z.len(), l.q.len())));
    }
    let mut locs: Vec<VertexId> = z.iter().enumerate().map(|(i, &zi)| if zi { l.yes[i] } else { l.no[i] }).collect();
    locs.push(l.gadget[0]);
    locs.push(l.v8);
    Ok(Placement(locs))
}

/// Certificate at the assignment placement with greedy client equilibria everywhere.
pub fn assignment_certificate(red: &Reduction, z: &[bool]) -> Result<PartialCertificate> {
    let s = assignment_placement(red, z)?;
    PartialCertificate::from_policy(&red.instance, &s, &FullProfilePolicy::GreedyWeighted)
}
