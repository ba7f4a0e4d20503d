//! Named reproductions: each yields rows of expected against computed values.

use flg_core::classes::class_set;
use flg_core::client_eq::{enumerate_equilibria, favoring_profile, EnumGuard};
use flg_core::game::{
    attraction_range, equilibrium_violations, excluded_load, facility_loads, verify_client_equilibrium, waiting_time,
};
use flg_core::instances::{fig1_delta, gen_paper_instance, paper_placement, reach_table, PaperInstance};
use flg_core::reduction::{assignment_certificate, formula_weight, reduce_sat, CnfFormula};
use flg_core::spe::{k_approx_spe, spe_exists, verify_spe, Alpha, SpeGuard};
use flg_core::welfare::{fig8_certificate, poa_certificate};
use flg_core::{ClientProfile, EqVerdict, FlgError, Instance, Permutation, Placement, Result, Scalar};

pub struct Row {
    pub item: String,
    pub expected: String,
    pub computed: String,
}

impl Row {
    fn new(item: impl Into<String>, expected: impl ToString, computed: impl ToString) -> Self {
        Row { item: item.into(), expected: expected.to_string(), computed: computed.to_string() }
    }

    pub fn equal(&self) -> bool {
        self.expected == self.computed
    }
}

pub const NAMES: &[&str] = &[
    "fig1",
    "fig2",
    "fig3",
    "table1",
    "table3",
    "fig5-left-no-spe",
    "fig5-right-no-approx-spe",
    "fig6",
    "fig8-poa",
    "obs2",
    "k-approx",
    "reduction",
];

pub fn run(name: &str) -> Result<Vec<Row>> {
    match name {
        "fig1" => fig1(),
        "fig2" => fig2(),
        "fig3" => fig3(),
        "table1" => table1(),
        "table3" => table3(),
        "fig5-left-no-spe" => no_spe(),
        "fig5-right-no-approx-spe" => no_approx_spe(),
        "fig6" => fig6(),
        "fig8-poa" | "poa" => fig8_poa(),
        "obs2" => obs2(),
        "k-approx" => k_approx(),
        "reduction" => reduction(),
        "all" => {
            let mut rows = Vec::new();
            for n in NAMES {
                for mut r in run(n)? {
                    r.item = format!("{n}: {}", r.item);
                    rows.push(r);
                }
            }
            Ok(rows)
        }
        "list" => Ok(NAMES.iter().map(|n| Row::new(*n, "", "")).collect()),
        other => Err(FlgError::Input(format!("unknown check '{other}'; try `paper-check list`"))),
    }
}

fn tuple(xs: &[Scalar]) -> String {
    format!("({})", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

fn paper(p: PaperInstance) -> Result<(Instance, Placement)> {
    let inst = gen_paper_instance(&p)?;
    let s = paper_placement(&p).unwrap_or_else(|| inst.initial_placement());
    Ok((inst, s))
}

fn fig1() -> Result<Vec<Row>> {
    let (inst, s) = paper(PaperInstance::Fig1)?;
    let d = fig1_delta();
    let h = Scalar::ratio(1, 2);
    let sigma = ClientProfile::from_rows(vec![
        vec![h.clone(), h.clone()],
        vec![h.clone(), h.clone()],
        vec![Scalar::int(1), Scalar::int(0)],
        vec![Scalar::int(0), Scalar::int(1)],
    ]);
    let two = &Scalar::int(2) + &d;
    let rep = facility_loads(&inst, &s, &sigma)?;
    Ok(vec![
        Row::new("loads of the half/half equilibrium", tuple(&[two.clone(), two]), tuple(&rep.load)),
        Row::new("excluded load, weight-3 client", &h + &d, excluded_load(&inst, &s, &sigma, 0, 0)?),
        Row::new("waiting time, weight-3 client", &Scalar::ratio(7, 2) + &d, waiting_time(&inst, &s, &sigma, 0)?),
        Row::new("is client equilibrium", true, verify_client_equilibrium(&inst, &s, &sigma)?.is_ok()),
    ])
}

fn fig2() -> Result<Vec<Row>> {
    let (inst, s) = paper(PaperInstance::Fig2)?;
    let (z, o) = (Scalar::int(0), Scalar::int(1));
    let (a, b) = (Scalar::ratio(2, 3), Scalar::ratio(1, 3));
    let sigma = ClientProfile::from_rows(vec![
        vec![o.clone(), z.clone(), z.clone()],
        vec![a.clone(), b.clone(), z.clone()],
        vec![z.clone(), b, a],
        vec![z.clone(), o.clone(), z.clone()],
        vec![z.clone(), z, o],
    ]);
    let rep = facility_loads(&inst, &s, &sigma)?;
    let v_prefers_red = equilibrium_violations(&inst, &s, &sigma)?.contains(&EqVerdict::Violation {
        client: 2,
        facility: 1,
        better: 2,
    });
    Ok(vec![
        Row::new("loads", tuple(&[Scalar::ratio(5, 3), Scalar::ratio(5, 3), Scalar::ratio(5, 3)]), tuple(&rep.load)),
        Row::new("excluded load of v at red", 1, excluded_load(&inst, &s, &sigma, 2, 2)?),
        Row::new("is client equilibrium", false, verify_client_equilibrium(&inst, &s, &sigma)?.is_ok()),
        Row::new("v improves by leaving blue for red", true, v_prefers_red),
    ])
}

fn fig3() -> Result<Vec<Row>> {
    let (inst, s) = paper(PaperInstance::Fig3)?;
    let cs = class_set(&inst, &s)?;
    let parts: Vec<String> = cs.classes.iter().map(|c| format!("{:?}", c.facilities)).collect();
    Ok(vec![
        Row::new("number of classes", 2, cs.len()),
        Row::new("class loads", tuple(&[Scalar::ratio(5, 2), Scalar::int(4)]), tuple(&cs.loads())),
        Row::new("facility partition", "[0, 1] / [2]", parts.join(" / ")),
        Row::new("clients of the second class", 4, cs.classes.get(1).map_or(0, |c| c.clients.len())),
        Row::new("attraction range of the third facility", 5, attraction_range(&inst, &s, 2)?.len()),
    ])
}

/// Canonical description of the equilibrium set at one placement.
fn describe_equilibria(inst: &Instance, s: &Placement) -> Result<String> {
    let mut items = Vec::new();
    for p in enumerate_equilibria(inst, s, EnumGuard::default())? {
        let ranges: Vec<(Scalar, Scalar)> = (0..inst.k()).map(|f| p.load_range(inst, f)).collect();
        if ranges.iter().all(|(lo, hi)| lo == hi) {
            items.push(tuple(&ranges.into_iter().map(|(lo, _)| lo).collect::<Vec<_>>()));
        } else {
            let total: Scalar = facility_loads(inst, s, &p.sample)?.load.iter().sum();
            let r: Vec<String> = ranges.iter().map(|(lo, hi)| format!("[{lo}, {hi}]")).collect();
            items.push(format!("family {} total {total}", r.join(" x ")));
        }
    }
    items.sort();
    Ok(items.join(" | "))
}

fn table1() -> Result<Vec<Row>> {
    let inst = gen_paper_instance(&PaperInstance::Fig5Left)?;
    // Loads of the continuous family are 3γ and 3 - 3γ since w1 carries weight 3.
    let expected: [((usize, usize), &str); 9] = [
        ((0, 0), "family [0, 3] x [0, 3] total 3"),
        ((0, 1), "(3, 2)"),
        ((0, 2), "(3, 1)"),
        ((1, 0), "(2, 3)"),
        ((1, 1), "(2, 3) | (3, 2) | (5/2, 5/2)"),
        ((1, 2), "(2, 4)"),
        ((2, 0), "(1, 3)"),
        ((2, 1), "(4, 2)"),
        ((2, 2), "(1, 3) | (2, 2) | (3, 1)"),
    ];
    expected
        .iter()
        .map(|&((a, b), exp)| {
            let s = Placement(vec![a, b]);
            Ok(Row::new(format!("s = (w{}, w{})", a + 1, b + 1), exp, describe_equilibria(&inst, &s)?))
        })
        .collect()
}

fn table3() -> Result<Vec<Row>> {
    let eps = Scalar::ratio(1, 100);
    let inst = gen_paper_instance(&PaperInstance::Fig5Right { eps: eps.clone() })?;
    let phi = Scalar::golden_ratio();
    let two = Scalar::int(2);
    let expected = [two.clone(), &two - &eps, phi.clone(), &(&phi * &phi) / &two, &two / &phi, &two - &(&two / &phi)];
    let table = reach_table(&inst, 0)?;
    Ok(table
        .iter()
        .zip(expected)
        .map(|((v, r), e)| Row::new(format!("reach of {}", inst.graph.label(*v)), e, r))
        .collect())
}

fn decision_row(inst: &Instance, alpha: Scalar) -> Result<Row> {
    let a = Alpha::new(alpha)?;
    let d = spe_exists(inst, &a, SpeGuard::default())?;
    Ok(Row::new(format!("spe-exists at alpha = {a}"), "none", if d.exists() { "exists" } else { "none" }))
}

fn no_spe() -> Result<Vec<Row>> {
    let inst = gen_paper_instance(&PaperInstance::Fig5Left)?;
    Ok(vec![decision_row(&inst, Scalar::int(1))?])
}

fn no_approx_spe() -> Result<Vec<Row>> {
    let inst = gen_paper_instance(&PaperInstance::Fig5Right { eps: Scalar::ratio(1, 100) })?;
    Ok(vec![decision_row(&inst, &Scalar::golden_ratio() - &Scalar::ratio(1, 10))?])
}

fn fig6() -> Result<Vec<Row>> {
    let (inst, s) = paper(PaperInstance::Fig6)?;
    let mut rows = Vec::new();
    for (order, exp) in [(vec![0, 1], [2, 1]), (vec![1, 0], [1, 2])] {
        let pi = Permutation::new(order)?;
        let a = favoring_profile(&inst, &s, &pi)?;
        let loads = a.loads(&inst);
        rows.push(Row::new(format!("pi-favoring loads, pi = ({pi})"), tuple(&exp.map(Scalar::int)), tuple(&loads)));
    }
    Ok(rows)
}

fn fig8_poa() -> Result<Vec<Row>> {
    (2..=5)
        .map(|k| {
            let (inst, cert) = fig8_certificate(k)?;
            let ok = verify_spe(&inst, &cert, &Alpha::one())?.is_ok();
            let ratio = poa_certificate(&inst, &cert)?.ratio;
            Ok(Row::new(format!("k = {k}: SPE and welfare ratio"), "true, 2", format!("{ok}, {ratio}")))
        })
        .collect()
}

fn obs2() -> Result<Vec<Row>> {
    let (inst, s) = paper(PaperInstance::Obs2)?;
    Ok(vec![Row::new("equilibria", "family [0, 1] x [0, 1] total 1", describe_equilibria(&inst, &s)?)])
}

fn k_approx() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for p in [PaperInstance::Fig5Left, PaperInstance::Fig5Right { eps: Scalar::ratio(1, 100) }] {
        let inst = gen_paper_instance(&p)?;
        let (s, cert) = k_approx_spe(&inst)?;
        let ok = verify_spe(&inst, &cert, &Alpha::new(Scalar::int(inst.k() as i64))?)?.is_ok();
        rows.push(Row::new(format!("{p}: placement {s} is a k-approximate SPE"), true, ok));
    }
    Ok(rows)
}

fn reduction() -> Result<Vec<Row>> {
    let f: CnfFormula = "1; 1; 1; 1".parse()?;
    let alpha = Scalar::ratio(5, 4);
    let red = reduce_sat(&f, &alpha, &Scalar::ratio(1, 100))?;
    let l = &red.layout;
    let n1 = l.yes.len() + l.no.len() + l.clauses.len() + l.buffer.len();
    let z = f.solve().ok_or_else(|| FlgError::Internal("micro formula is satisfiable".into()))?;
    let cert = assignment_certificate(&red, &z)?;
    let ok = verify_spe(&red.instance, &cert, &Alpha::new(alpha)?)?.is_ok();
    Ok(vec![
        Row::new("formula vertices", 6, n1),
        Row::new("formula vertex weight", formula_weight(1, 4), red.instance.graph.weight(0)),
        Row::new("facilities", 3, red.instance.k()),
        Row::new("certificate passes at alpha = 5/4", true, ok),
    ])
}
