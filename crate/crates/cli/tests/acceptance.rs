//! Acceptance criteria 1-12. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use flg_core::classes::{class_set, mns, mns_bruteforce};
use flg_core::client_eq::{all_rounded_assignments, favoring_profile, is_rounded, rounded_profile};
use flg_core::flow::{max_cost_flow, max_cost_flow_bruteforce, max_flow, min_cut_bruteforce, FlowNetwork};
use flg_core::game::{facility_loads, pi_loads, verify_client_equilibrium, Instance, Permutation};
use flg_core::instances::{covered_count, random_instance, random_placement, RandomSpec};
use flg_core::reduction::{assignment_certificate, formula_weight, reduce_sat, CnfFormula};
use flg_core::scalar::lex_cmp;
use flg_core::spe::{find_spe, k_approx_spe, verify_spe, Alpha, PartialCertificate};
use flg_core::welfare::{fig8_certificate, poa_certificate};
use flg_core::{gen_paper_instance, PaperInstance, Scalar};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(t)
}

fn flg(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_flg")).args(args).output().expect("flg runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("flg-acceptance-{}-{name}", std::process::id()));
    std::fs::write(&p, contents).expect("temp file written");
    p
}

fn gen_file(family: &[&str], name: &str) -> Result<PathBuf, String> {
    let mut args = vec!["gen"];
    args.extend_from_slice(family);
    let (code, doc) = flg(&args);
    ensure(code == 0, || format!("gen exited {code}"))?;
    Ok(temp_file(name, &doc))
}

fn paper_check_passes(name: &str) -> Result<usize, String> {
    let (code, out) = flg(&["paper-check", name]);
    let v: Value = serde_json::from_str(&out).map_err(|e| format!("bad json: {e}"))?;
    let rows = v["rows"].as_array().ok_or("no rows")?;
    for r in rows {
        ensure(r["equal"] == true, || format!("{}: expected {} computed {}", r["item"], r["expected"], r["computed"]))?;
    }
    ensure(code == 0 && v["status"] == "PASS", || format!("exit {code}, status {}", v["status"]))?;
    Ok(rows.len())
}

fn random_pi(k: usize, rng: &mut ChaCha8Rng) -> Permutation {
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    Permutation::new(order).unwrap()
}

fn unweighted(rng: &mut ChaCha8Rng, max_n: usize, max_k: usize) -> Instance {
    let spec = RandomSpec {
        n: rng.gen_range(1..=max_n),
        k: rng.gen_range(1..=max_k),
        density: 0.3,
        weighted: false,
        restricted: false,
    };
    random_instance(&spec, rng).unwrap()
}

fn c1() -> Check {
    let start = Instant::now();
    let (code, out) = flg(&["paper-check", "fig3"]);
    let t = within(start, Duration::from_secs(1))?;
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    ensure(code == 0 && v["status"] == "PASS", || format!("exit {code}: {out}"))?;
    let loads = &v["rows"][1]["computed"];
    let parts = &v["rows"][2]["computed"];
    ensure(loads == "(5/2, 4)" && parts == "[0, 1] / [2]", || format!("loads {loads}, partition {parts}"))?;
    Ok(format!("2 classes, loads (5/2, 4), facilities {{f1,f2}} / {{f3}} in {t:.2?}"))
}

fn c2() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checks = 0;
    for i in 0..500 {
        let inst = unweighted(&mut rng, 10, 6);
        let s = random_placement(&inst, &mut rng);
        let all_v: Vec<usize> = (0..inst.n()).collect();
        let mut subsets = vec![(0..inst.k()).collect::<Vec<_>>()];
        let sub: Vec<usize> = (0..inst.k()).filter(|_| rng.gen_bool(0.5)).collect();
        if !sub.is_empty() {
            subsets.push(sub);
        }
        for fstar in subsets {
            let a = mns(&inst, &s, &fstar, &all_v).map_err(|e| e.to_string())?;
            let b = mns_bruteforce(&inst, &s, &fstar, &all_v).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("instance {i}: flow {a:?} vs brute force {b:?}"))?;
            checks += 1;
        }
        let loads = class_set(&inst, &s).map_err(|e| e.to_string())?.loads();
        ensure(loads.windows(2).all(|w| w[0] < w[1]), || format!("instance {i}: class loads {loads:?}"))?;
    }
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("500 instances, {checks} mns comparisons, class loads increasing, {t:.2?}"))
}

fn c3() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..500 {
        let inst = unweighted(&mut rng, 12, 4);
        let s = random_placement(&inst, &mut rng);
        let k = inst.k();
        let cs = class_set(&inst, &s).map_err(|e| e.to_string())?;
        let r = rounded_profile(&inst, &s, &cs).map_err(|e| e.to_string())?;
        let rs = r.to_profile(k);
        ensure(is_rounded(&inst, &s, &cs, &r), || format!("instance {i}: rounded profile not rounded"))?;
        ensure(verify_client_equilibrium(&inst, &s, &rs).unwrap().is_ok(), || format!("instance {i}: rounded not eq"))?;
        let sorted = facility_loads(&inst, &s, &rs).unwrap().sorted;
        for _ in 0..3 {
            let pi = random_pi(k, &mut rng);
            let a = favoring_profile(&inst, &s, &pi).map_err(|e| e.to_string())?;
            let sa = a.to_profile(k);
            ensure(is_rounded(&inst, &s, &cs, &a), || format!("instance {i}: favoring not rounded"))?;
            ensure(verify_client_equilibrium(&inst, &s, &sa).unwrap().is_ok(), || {
                format!("instance {i}: favoring not eq")
            })?;
            ensure(facility_loads(&inst, &s, &sa).unwrap().sorted == sorted, || {
                format!("instance {i}: sorted loads differ")
            })?;
        }
    }
    let t = within(start, Duration::from_secs(120))?;
    Ok(format!("500 instances x 3 permutations, {t:.2?}"))
}

fn c4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut done = 0;
    let mut assignments = 0;
    while done < 100 {
        let inst = unweighted(&mut rng, 10, 4);
        let s = random_placement(&inst, &mut rng);
        if covered_count(&inst, &s).unwrap() > 8 {
            continue;
        }
        let k = inst.k();
        let cs = class_set(&inst, &s).unwrap();
        let all = all_rounded_assignments(&inst, &s, &cs, 8).map_err(|e| e.to_string())?;
        assignments += all.len();
        for _ in 0..5 {
            let pi = random_pi(k, &mut rng);
            let key = |a: &flg_core::PureAssignment| {
                pi_loads(&facility_loads(&inst, &s, &a.to_profile(k)).unwrap(), &pi).unwrap()
            };
            let best = all.iter().map(key).max_by(|x, y| lex_cmp(x, y)).ok_or("no rounded assignment")?;
            let got = key(&favoring_profile(&inst, &s, &pi).map_err(|e| e.to_string())?);
            ensure(got == best, || format!("instance {done}, pi {pi}: {got:?} vs {best:?}"))?;
        }
        done += 1;
    }
    Ok(format!("100 instances x 5 permutations against {assignments} enumerated rounded assignments"))
}

fn c5(certs: &mut Vec<(Instance, PartialCertificate)>) -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut iters = Vec::new();
    for i in 0..200 {
        let inst = unweighted(&mut rng, 8, 3);
        let run = find_spe(&inst).map_err(|e| format!("instance {i}: {e}"))?;
        for (j, st) in run.trace.steps.iter().enumerate().skip(1) {
            ensure(lex_cmp(&st.sort_after, &st.sort_before).is_gt(), || {
                format!("instance {i}: step {j} not increasing")
            })?;
        }
        let v = verify_spe(&inst, &run.certificate, &Alpha::one()).map_err(|e| e.to_string())?;
        ensure(v.is_ok(), || format!("instance {i}: {v:?}"))?;
        iters.push(run.trace.iterations());
        certs.push((inst, run.certificate));
    }
    let t = within(start, Duration::from_secs(300))?;
    let total: usize = iters.iter().sum();
    let max = iters.iter().max().copied().unwrap_or(0);
    Ok(format!("200 instances verified; iterations total {total}, max {max}; {t:.2?}"))
}

fn c6() -> Check {
    let rows = paper_check_passes("table1")?;
    ensure(rows == 9, || format!("{rows} rows"))?;
    Ok("9 rows equal, exit 0".into())
}

fn c7() -> Check {
    let path = gen_file(&["--family", "fig5_left"], "fig5_left.json")?;
    let start = Instant::now();
    let (code, out) = flg(&["spe-exists", "--alpha", "1", path.to_str().unwrap()]);
    let t = within(start, Duration::from_secs(30))?;
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    ensure(v["verdict"] == "none" && code == 1, || format!("verdict {}, exit {code}", v["verdict"]))?;
    Ok(format!("none, exit 1, {t:.2?}"))
}

fn c8() -> Check {
    let path = gen_file(&["--family", "fig5_right", "--eps", "1/100"], "fig5_right.json")?;
    let start = Instant::now();
    let (code, out) = flg(&["spe-exists", "--alpha", "1/2+1/2*sqrt5-1/10", path.to_str().unwrap()]);
    let t = within(start, Duration::from_secs(300))?;
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    ensure(v["verdict"] == "none" && code == 1, || format!("verdict {}, exit {code}", v["verdict"]))?;
    let rows = paper_check_passes("table3")?;
    ensure(rows == 6, || format!("{rows} reach rows"))?;
    Ok(format!("none at alpha = phi - 1/10 in {t:.2?}; 6 reach values exact"))
}

fn c9(alpha_one: &mut Vec<(Instance, PartialCertificate)>) -> Check {
    let start = Instant::now();
    let mut insts = vec![
        gen_paper_instance(&PaperInstance::Fig5Left).unwrap(),
        gen_paper_instance(&PaperInstance::Fig5Right { eps: Scalar::ratio(1, 100) }).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let spec = RandomSpec {
            n: rng.gen_range(1..=8),
            k: rng.gen_range(1..=3),
            density: 0.3,
            weighted: true,
            restricted: false,
        };
        insts.push(random_instance(&spec, &mut rng).unwrap());
    }
    for (i, inst) in insts.into_iter().enumerate() {
        let (_, cert) = k_approx_spe(&inst).map_err(|e| e.to_string())?;
        let k = Alpha::new(Scalar::int(inst.k() as i64)).unwrap();
        let v = verify_spe(&inst, &cert, &k).map_err(|e| e.to_string())?;
        ensure(v.is_ok(), || format!("instance {i}: {v:?}"))?;
        if verify_spe(&inst, &cert, &Alpha::one()).unwrap().is_ok() {
            alpha_one.push((inst, cert));
        }
    }
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("102 instances pass at alpha = k; {} also exact SPE; {t:.2?}", alpha_one.len()))
}

fn c10(certs: &[(Instance, PartialCertificate)]) -> Check {
    let start = Instant::now();
    let mut worst = Scalar::int(1);
    for (i, (inst, cert)) in certs.iter().enumerate() {
        let r = poa_certificate(inst, cert).map_err(|e| format!("certificate {i}: {e}"))?;
        ensure(r.ratio <= Scalar::int(2), || format!("certificate {i}: ratio {}", r.ratio))?;
        worst = worst.max(r.ratio);
    }
    for k in 2..=5 {
        let (inst, cert) = fig8_certificate(k).map_err(|e| e.to_string())?;
        ensure(verify_spe(&inst, &cert, &Alpha::one()).unwrap().is_ok(), || format!("fig8({k}) is not an SPE"))?;
        let r = poa_certificate(&inst, &cert).map_err(|e| e.to_string())?;
        ensure(r.ratio == Scalar::int(2), || format!("fig8({k}) ratio {}", r.ratio))?;
    }
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("{} SPE certificates with ratio <= 2 (worst {worst}); fig8(2..5) ratio exactly 2; {t:.2?}", certs.len()))
}

fn c11() -> Check {
    let alpha = Scalar::ratio(5, 4);
    let eps = Scalar::ratio(1, 100);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..50 {
        let m = rng.gen_range(1..=4);
        let t = rng.gen_range(4..=8);
        let f = CnfFormula::random(m, t, &mut rng);
        let red = reduce_sat(&f, &alpha, &eps).map_err(|e| e.to_string())?;
        let (inst, l) = (&red.instance, &red.layout);
        let n1 = 2 * m + t + (m - 1) * t;
        let v1: Vec<usize> = [&l.yes, &l.no, &l.clauses, &l.buffer].into_iter().flatten().copied().collect();
        ensure(v1.len() == n1 && inst.n() == n1 + 8, || format!("formula {i}: |V1| = {}", v1.len()))?;
        let w = formula_weight(m, t);
        ensure(w == Scalar::ratio(m as i64, (m * (t + 2) - 1) as i64), || format!("formula {i}: weight {w}"))?;
        ensure(v1.iter().all(|&v| *inst.graph.weight(v) == w), || format!("formula {i}: nonuniform weights"))?;
        ensure(inst.k() == m + 2, || format!("formula {i}: |F| = {}", inst.k()))?;
        let mut q_set = v1.clone();
        q_set.push(l.v7);
        q_set.sort();
        let mut h_set = l.gadget.clone();
        h_set.push(l.v8);
        for &q in &l.q {
            ensure(inst.allowed(q) == q_set.as_slice(), || format!("formula {i}: allowed set of q{q}"))?;
        }
        ensure(inst.allowed(l.g) == l.gadget.as_slice(), || format!("formula {i}: allowed set of g"))?;
        ensure(inst.allowed(l.h) == h_set.as_slice(), || format!("formula {i}: allowed set of h"))?;
    }
    let f: CnfFormula = "1; 1; 1; 1".parse().unwrap();
    let red = reduce_sat(&f, &alpha, &eps).map_err(|e| e.to_string())?;
    let cert = assignment_certificate(&red, &f.solve().ok_or("unsatisfiable")?).map_err(|e| e.to_string())?;
    let v = verify_spe(&red.instance, &cert, &Alpha::new(alpha).unwrap()).map_err(|e| e.to_string())?;
    ensure(v.is_ok(), || format!("micro certificate: {v:?}"))?;
    Ok("50 formulas match the closed-form counts; m = 1, t = 4 certificate passes at alpha = 5/4".into())
}

fn c12() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut cost_checked = 0;
    for i in 0..1000 {
        let nodes = rng.gen_range(2..=6);
        let mut net = FlowNetwork::new(nodes, 0, nodes - 1);
        let arcs = rng.gen_range(0..=10);
        while net.arcs.len() < arcs {
            let a = rng.gen_range(0..nodes - 1);
            let b = rng.gen_range(1..nodes);
            if a != b {
                net.add_arc(a, b, rng.gen_range(0..=2i64), BigInt::from(rng.gen_range(-4..=4)));
            }
        }
        let mf = max_flow(&net).map_err(|e| e.to_string())?;
        let cut = min_cut_bruteforce(&net).map_err(|e| e.to_string())?;
        ensure(mf.value == cut, || format!("network {i}: flow {} vs cut {cut}", mf.value))?;
        ensure(net.cut_capacity(&mf.source_side) == mf.value, || format!("network {i}: returned cut is not minimum"))?;
        let mut dag = FlowNetwork::new(nodes, 0, nodes - 1);
        for a in net.arcs.iter().filter(|a| a.from < a.to) {
            dag.add_arc(a.from, a.to, a.cap, a.cost.clone());
        }
        let mc = max_cost_flow(&dag).map_err(|e| e.to_string())?;
        let bf = max_cost_flow_bruteforce(&dag, 1 << 20).map_err(|e| e.to_string())?;
        ensure((mc.value, mc.cost.clone()) == bf, || format!("network {i}: ({}, {}) vs {bf:?}", mc.value, mc.cost))?;
        cost_checked += 1;
    }
    let t = within(start, Duration::from_secs(30))?;
    Ok(format!("1000 networks: duality holds; {cost_checked} acyclic max-cost optima match enumeration; {t:.2?}"))
}

fn report(id: usize, name: &str, f: impl FnOnce() -> Check) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panic: {}", msg.unwrap_or_default()))
    });
    match outcome {
        Ok(detail) => {
            println!("criterion {id:>2} PASS  {name}: {detail}");
            true
        }
        Err(why) => {
            println!("criterion {id:>2} FAIL  {name}: {why}");
            false
        }
    }
}

fn main() {
    let mut spe_certs = Vec::new();
    let mut approx_exact = Vec::new();
    let results = [
        report(1, "class set reproduction", c1),
        report(2, "mns oracle equivalence", c2),
        report(3, "rounded profile contract", c3),
        report(4, "pi-favoring optimality", c4),
        report(5, "best-response dynamic", || c5(&mut spe_certs)),
        report(6, "client equilibria table", c6),
        report(7, "no SPE for weighted clients", c7),
        report(8, "no (phi - eps)-approximate SPE", c8),
        report(9, "k-approximate SPE", || c9(&mut approx_exact)),
        report(10, "price of anarchy 2", || {
            let all: Vec<_> = spe_certs.iter().chain(approx_exact.iter()).cloned().collect();
            c10(&all)
        }),
        report(11, "reduction structure", c11),
        report(12, "flow kernel", c12),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
