//! Generators for the small instances used throughout the literature on this
//! game, plus seeded random instances for property tests and benchmarks.
//!
//! Edge direction follows the drawing order: an edge drawn from `a` to `b`
//! becomes the arc `a -> b` (so `a` can shop at `b`); double-headed edges
//! become two arcs.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FlgError, Result};
use crate::game::{Coverage, FacilityId, HostGraph, Instance, Placement, VertexId};
use crate::scalar::Scalar;

/// Weight given to the two location vertices of `Fig1`, which are drawn with weight 0.
pub fn fig1_delta() -> Scalar {
    Scalar::ratio(1, 1000)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PaperInstance {
    /// Two clients (weights 3, 1) shopping at two light location vertices.
    Fig1,
    /// Five unit clients on a tree, three facilities.
    Fig2,
    /// Nine unit clients whose class set has loads 5/2 and 4.
    Fig3,
    /// Weights 3, 2, 1; no SPE for two facilities.
    Fig5Left,
    /// Golden-ratio weights; no (φ-ε)-approximate SPE for two facilities.
    Fig5Right { eps: Scalar },
    /// Path of three unit clients with facilities on the first two.
    Fig6,
    /// Two vertices with weights α and 2/(φα).
    Fig7G3 { alpha: Scalar },
    /// Core clique with one pendant per core vertex; PoA lower bound.
    Fig8 { k: usize },
    /// One client, two facilities.
    Obs2,
}

impl fmt::Display for PaperInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PaperInstance::Fig1 => write!(f, "fig1"),
            PaperInstance::Fig2 => write!(f, "fig2"),
            PaperInstance::Fig3 => write!(f, "fig3"),
            PaperInstance::Fig5Left => write!(f, "fig5_left"),
            PaperInstance::Fig5Right { eps } => write!(f, "fig5_right(eps={eps})"),
            PaperInstance::Fig6 => write!(f, "fig6"),
            PaperInstance::Fig7G3 { alpha } => write!(f, "fig7_g3(alpha={alpha})"),
            PaperInstance::Fig8 { k } => write!(f, "fig8(k={k})"),
            PaperInstance::Obs2 => write!(f, "obs2"),
        }
    }
}

impl PaperInstance {
    /// Parses a family name; parameters fall back to ε = 1/100, α = 5/4, k = 3.
    pub fn from_name(name: &str, eps: Option<Scalar>, alpha: Option<Scalar>, k: Option<usize>) -> Result<Self> {
        Ok(match name {
            "fig1" => PaperInstance::Fig1,
            "fig2" => PaperInstance::Fig2,
            "fig3" => PaperInstance::Fig3,
            "fig5_left" | "fig5-left" => PaperInstance::Fig5Left,
            "fig5_right" | "fig5-right" => {
                PaperInstance::Fig5Right { eps: eps.unwrap_or_else(|| Scalar::ratio(1, 100)) }
            }
            "fig6" => PaperInstance::Fig6,
            "fig7_g3" | "fig7-g3" => PaperInstance::Fig7G3 { alpha: alpha.unwrap_or_else(|| Scalar::ratio(5, 4)) },
            "fig8" => PaperInstance::Fig8 { k: k.unwrap_or(3) },
            "obs2" => PaperInstance::Obs2,
            other => return Err(FlgError::Input(format!("unknown instance family '{other}'"))),
        })
    }

    pub fn names() -> &'static [&'static str] {
        &["fig1", "fig2", "fig3", "fig5_left", "fig5_right", "fig6", "fig7_g3", "fig8", "obs2"]
    }
}

fn labelled(weights: Vec<Scalar>, labels: &[&str]) -> Result<HostGraph> {
    HostGraph::new(weights, Some(labels.iter().map(|s| s.to_string()).collect()))
}

fn arcs(g: &mut HostGraph, list: &[(VertexId, VertexId)]) -> Result<()> {
    for &(a, b) in list {
        g.add_arc(a, b)?;
    }
    Ok(())
}

/// Fig. 5 right. Reaches are 2, 2-ε, φ, φ²/2, 2/φ, 2-2/φ for v1..v6.
pub fn fig5_right_graph(eps: &Scalar) -> Result<HostGraph> {
    let phi = Scalar::golden_ratio();
    let two_over_phi = Scalar::int(2) / &phi;
    let phi_sq_half = &(&phi * &phi) / &Scalar::int(2);
    let upper = Scalar::int(2) - &phi;
    if !eps.is_positive() || *eps >= upper {
        return Err(FlgError::Input(format!("eps must lie in (0, 2-φ), got {eps}")));
    }
    let two = Scalar::int(2);
    let w1 = two_over_phi.clone();
    let w2 = &(&two - &two_over_phi) - eps;
    let w3 = &phi - &two_over_phi;
    let w4 = &phi_sq_half - &two_over_phi;
    let w5 = &(&(&(&Scalar::int(8) / &phi) - &two) - &phi) - &phi_sq_half + eps.clone();
    let w6 = &two - &two_over_phi;
    let mut g = labelled(vec![w1, w2, w3, w4, w5, w6], &["v1", "v2", "v3", "v4", "v5", "v6"])?;
    arcs(&mut g, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4), (5, 0)])?;
    Ok(g)
}

pub fn fig7_g3_graph(alpha: &Scalar) -> Result<HostGraph> {
    let phi = Scalar::golden_ratio();
    if *alpha < Scalar::int(1) || *alpha >= phi {
        return Err(FlgError::Input(format!("alpha must lie in [1, φ), got {alpha}")));
    }
    let w8 = Scalar::int(2) / &(&phi * alpha);
    let mut g = labelled(vec![alpha.clone(), w8], &["v7", "v8"])?;
    g.add_arc(0, 1)?;
    Ok(g)
}

pub fn fig8_graph(k: usize) -> Result<HostGraph> {
    if k < 2 {
        return Err(FlgError::Input(format!("fig8 needs k >= 2, got {k}")));
    }
    let labels: Vec<String> = (1..=k).map(|i| format!("c{i}")).chain((1..=k).map(|i| format!("o{i}"))).collect();
    let mut g = HostGraph::new(vec![Scalar::int(1); 2 * k], Some(labels))?;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                g.add_arc(i, j)?;
            }
        }
        g.add_arc(i, k + i)?;
    }
    Ok(g)
}

pub fn gen_paper_instance(p: &PaperInstance) -> Result<Instance> {
    match p {
        PaperInstance::Fig1 => {
            let d = fig1_delta();
            let mut g = labelled(vec![Scalar::int(3), Scalar::int(1), d.clone(), d], &["c3", "c1", "l1", "l2"])?;
            arcs(&mut g, &[(0, 2), (0, 3), (1, 2), (1, 3)])?;
            Instance::unrestricted(g, 2)
        }
        PaperInstance::Fig2 => {
            let mut g = labelled(vec![Scalar::int(1); 5], &["1", "2", "3", "4", "5"])?;
            arcs(&mut g, &[(1, 0), (2, 1), (3, 1), (4, 2)])?;
            Instance::unrestricted(g, 3)
        }
        PaperInstance::Fig3 => {
            let mut g = labelled(vec![Scalar::int(1); 9], &["v1", "v2", "v3", "v4", "v5", "v6", "p1", "p2", "p3"])?;
            arcs(&mut g, &[(6, 7), (7, 6), (7, 8), (0, 6), (1, 6), (1, 7), (2, 7), (3, 8), (4, 8), (5, 8)])?;
            Instance::unrestricted(g, 3)
        }
        PaperInstance::Fig5Left => {
            let mut g = labelled(vec![Scalar::int(3), Scalar::int(2), Scalar::int(1)], &["w1", "w2", "w3"])?;
            arcs(&mut g, &[(0, 1), (0, 2)])?;
            Instance::unrestricted(g, 2)
        }
        PaperInstance::Fig5Right { eps } => Instance::unrestricted(fig5_right_graph(eps)?, 2),
        PaperInstance::Fig6 => {
            let mut g = labelled(vec![Scalar::int(1); 3], &["v1", "v2", "v3"])?;
            arcs(&mut g, &[(1, 0), (2, 1)])?;
            Instance::unrestricted(g, 2)
        }
        PaperInstance::Fig7G3 { alpha } => Instance::unrestricted(fig7_g3_graph(alpha)?, 1),
        PaperInstance::Fig8 { k } => Instance::unrestricted(fig8_graph(*k)?, *k),
        PaperInstance::Obs2 => Instance::unrestricted(labelled(vec![Scalar::int(1)], &["v"])?, 2),
    }
}

/// The placement drawn in the figure, where the figure fixes one.
pub fn paper_placement(p: &PaperInstance) -> Option<Placement> {
    match p {
        PaperInstance::Fig1 => Some(Placement(vec![2, 3])),
        PaperInstance::Fig2 => Some(Placement(vec![0, 1, 2])),
        PaperInstance::Fig3 => Some(Placement(vec![6, 7, 8])),
        PaperInstance::Fig6 => Some(Placement(vec![0, 1])),
        PaperInstance::Fig8 { k } => Some(Placement((0..*k).collect())),
        PaperInstance::Obs2 => Some(Placement(vec![0, 0])),
        _ => None,
    }
}

/// ρ(v): total weight of clients that can shop at `v`.
pub fn reach(inst: &Instance, v: VertexId) -> Scalar {
    (0..inst.n()).filter(|&u| inst.graph.reaches(u, v)).map(|u| inst.graph.weight(u)).sum()
}

/// Reach of every vertex `f` may occupy.
pub fn reach_table(inst: &Instance, f: FacilityId) -> Result<Vec<(VertexId, Scalar)>> {
    inst.check_facility(f)?;
    Ok(inst.allowed(f).iter().map(|&v| (v, reach(inst, v))).collect())
}

/// Parameters for seeded random instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    pub k: usize,
    /// Probability of each ordered arc.
    pub density: f64,
    /// Draw weights from {1/2, 1, 3/2, ..., 3} instead of all ones.
    pub weighted: bool,
    /// Give each facility a random nonempty allowed set.
    pub restricted: bool,
}

pub fn random_instance<R: Rng + ?Sized>(spec: &RandomSpec, rng: &mut R) -> Result<Instance> {
    if spec.n == 0 || spec.k == 0 {
        return Err(FlgError::Input("random instance needs n >= 1 and k >= 1".into()));
    }
    let weights = (0..spec.n)
        .map(|_| if spec.weighted { Scalar::ratio(rng.gen_range(1..=6), 2) } else { Scalar::int(1) })
        .collect();
    let mut g = HostGraph::new(weights, None)?;
    for a in 0..spec.n {
        for b in 0..spec.n {
            if a != b && rng.gen_bool(spec.density) {
                g.add_arc(a, b)?;
            }
        }
    }
    let allowed = (0..spec.k)
        .map(|_| {
            if !spec.restricted {
                return (0..spec.n).collect();
            }
            let mut set: Vec<VertexId> = (0..spec.n).filter(|_| rng.gen_bool(0.5)).collect();
            if set.is_empty() {
                set.push(rng.gen_range(0..spec.n));
            }
            set
        })
        .collect();
    Instance::new(g, allowed)
}

pub fn random_placement<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Placement {
    Placement((0..inst.k()).map(|f| inst.allowed(f)[rng.gen_range(0..inst.allowed(f).len())]).collect())
}

/// Number of clients a placement covers.
pub fn covered_count(inst: &Instance, s: &Placement) -> Result<usize> {
    Ok(Coverage::new(inst, s)?.covered().count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::attraction_range;
    use num_traits::Zero;

    #[test]
    fn fig5_right_reaches() {
        let eps = Scalar::ratio(1, 100);
        let inst = gen_paper_instance(&PaperInstance::Fig5Right { eps: eps.clone() }).unwrap();
        let phi = Scalar::golden_ratio();
        let expected = vec![
            Scalar::int(2),
            Scalar::int(2) - &eps,
            phi.clone(),
            &(&phi * &phi) / &Scalar::int(2),
            Scalar::int(2) / &phi,
            Scalar::int(2) - &(Scalar::int(2) / &phi),
        ];
        let table: Vec<Scalar> = reach_table(&inst, 0).unwrap().into_iter().map(|(_, r)| r).collect();
        assert_eq!(table, expected);
        assert_eq!(*inst.graph.weight(0), Scalar::int(2) / &phi);
    }

    #[test]
    fn fig5_right_eps_range() {
        assert!(fig5_right_graph(&Scalar::zero()).is_err());
        assert!(fig5_right_graph(&Scalar::ratio(2, 5)).is_err());
        assert!(fig5_right_graph(&Scalar::ratio(1, 3)).is_ok());
    }

    #[test]
    fn fig3_ranges() {
        let p = PaperInstance::Fig3;
        let inst = gen_paper_instance(&p).unwrap();
        let s = paper_placement(&p).unwrap();
        assert_eq!(attraction_range(&inst, &s, 0).unwrap(), vec![0, 1, 6, 7]);
        assert_eq!(attraction_range(&inst, &s, 2).unwrap(), vec![3, 4, 5, 7, 8]);
    }

    #[test]
    fn fig8_shape() {
        let inst = gen_paper_instance(&PaperInstance::Fig8 { k: 3 }).unwrap();
        assert_eq!(inst.n(), 6);
        assert_eq!(inst.graph.arcs().count(), 9);
        assert!(fig8_graph(1).is_err());
    }

    #[test]
    fn fig7_alpha_range() {
        let phi = Scalar::golden_ratio();
        assert!(fig7_g3_graph(&phi).is_err());
        assert!(fig7_g3_graph(&Scalar::ratio(1, 2)).is_err());
        let g = fig7_g3_graph(&Scalar::int(1)).unwrap();
        assert_eq!(*g.weight(1), Scalar::int(2) / &phi);
    }

    #[test]
    fn isolated_reach_is_own_weight() {
        let inst = gen_paper_instance(&PaperInstance::Obs2).unwrap();
        assert_eq!(reach_table(&inst, 1).unwrap(), vec![(0, Scalar::int(1))]);
    }

    #[test]
    fn names_round_trip() {
        for name in PaperInstance::names() {
            let p = PaperInstance::from_name(name, None, None, None).unwrap();
            gen_paper_instance(&p).unwrap();
        }
        assert!(PaperInstance::from_name("fig9", None, None, None).is_err());
    }
}
