use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use flg_core::client_eq::EnumGuard;
use flg_core::io::class_set_value;
use flg_core::policy::policy_loads;
use flg_core::reduction::CnfFormula;
use flg_core::welfare::DEFAULT_OPT_GUARD;
use flg_core::{
    class_set, enumerate_equilibria, facility_loads, favoring_profile, fig8_certificate, find_spe, gen_paper_instance,
    greedy_weighted_equilibrium, k_approx_spe, optimum_placement, paper_placement, parse_instance, poa_certificate,
    random_instance, reduce_sat, rounded_profile, serialize_instance, spe_exists, to_dot, verify_spe, Alpha, EqVerdict,
    FlgError, FullProfilePolicy, Instance, PaperInstance, PartialCertificate, Permutation, Placement, RandomSpec,
    ResultDocument, ResultValue, Scalar, SpeDecision, SpeGuard, SpeVerdict,
};

mod reproduce;

#[derive(Parser, Debug)]
#[command(name = "flg", version, about = "Exact equilibria of the two-stage facility location game")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
    /// Output format for result documents.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Print the host graph in DOT instead of the result document.
    #[arg(long, global = true)]
    dot: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Args, Debug)]
struct Input {
    /// Instance document; `-` reads standard input.
    instance: Option<PathBuf>,
    /// Built-in family instead of a file: fig1, fig2, fig3, fig5_left, fig5_right, fig6, fig7_g3, fig8, obs2.
    #[arg(long)]
    family: Option<String>,
    /// Facility count for families that take one.
    #[arg(long)]
    k: Option<usize>,
    /// ε for fig5_right.
    #[arg(long)]
    eps: Option<String>,
}

#[derive(Args, Debug)]
struct At {
    #[command(flatten)]
    input: Input,
    /// Comma-separated vertex ids, one per facility.
    #[arg(long)]
    placement: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Rounded,
    Favoring,
    Greedy,
    Uniform,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Class set of a placement.
    Classes(At),
    /// Rounded client equilibrium (unweighted).
    Rounded(At),
    /// π-favoring rounded client equilibrium (unweighted).
    Favoring {
        #[command(flatten)]
        at: At,
        /// Comma-separated facility ids, most favored first.
        #[arg(long)]
        pi: String,
    },
    /// Greedy pure client equilibrium (any weights).
    Greedy(At),
    /// All client equilibria of a placement, as polytopes.
    EnumerateEq {
        #[command(flatten)]
        at: At,
        #[arg(long)]
        guard_clients: Option<usize>,
    },
    /// Best-response dynamic to an SPE (unweighted).
    FindSpe(Input),
    /// Checks a placement plus profile policy as an α-approximate SPE.
    Verify {
        #[command(flatten)]
        at: At,
        #[arg(long, default_value = "1")]
        alpha: String,
        #[arg(long, value_enum, default_value_t = PolicyArg::Greedy)]
        policy: PolicyArg,
        /// Permutation for the favoring policy.
        #[arg(long)]
        pi: Option<String>,
    },
    /// The k-approximate SPE construction.
    KApprox(Input),
    /// Decides α-approximate SPE existence exactly (micro instances).
    SpeExists {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "1")]
        alpha: String,
        #[arg(long)]
        guard_fpps: Option<usize>,
        #[arg(long)]
        guard_clients: Option<usize>,
    },
    /// Placement of maximum participation.
    Opt(Input),
    /// Welfare ratio of an SPE against the optimum.
    Poa(Input),
    /// Writes an instance document.
    Gen {
        /// Built-in family name.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        eps: Option<String>,
        /// α for fig7_g3.
        #[arg(long)]
        alpha: Option<String>,
        /// Random instance instead of a family.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long)]
        weighted: bool,
        #[arg(long)]
        restricted: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Builds the SAT reduction instance.
    ReduceSat {
        /// Clauses such as "1 -2; 2 3; -1; 3". Random when absent.
        #[arg(long)]
        cnf: Option<String>,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "5/4")]
        alpha: String,
        #[arg(long, default_value = "1/100")]
        eps: String,
    },
    /// Runs a named reproduction and prints expected against computed values.
    PaperCheck {
        /// One of the names listed by `paper-check list`, or `all`.
        name: String,
    },
}

enum CliError {
    Usage(String),
    Domain(String),
}

impl From<FlgError> for CliError {
    fn from(e: FlgError) -> Self {
        match e {
            FlgError::NotAnEquilibrium(_) => CliError::Domain(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Ctx {
    format: Format,
    dot: bool,
    echo: String,
}

impl Ctx {
    fn emit(&self, doc: &ResultDocument) {
        match self.format {
            Format::Json => print!("{}", doc.to_json()),
            Format::Tsv => print!("{}", doc.to_tsv()),
        }
    }

    fn doc(&self) -> ResultDocument {
        ResultDocument::new(self.echo.clone())
    }
}

fn parse_scalar(s: &str, what: &str) -> CliResult<Scalar> {
    s.parse().map_err(|e: FlgError| CliError::Usage(format!("--{what}: {e}")))
}

fn parse_ids(s: &str, what: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("--{what}: '{t}' is not an id"))))
        .collect()
}

fn load(input: &Input) -> CliResult<(Instance, Option<PaperInstance>)> {
    match (&input.instance, &input.family) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either an instance file or --family, not both".into())),
        (Some(path), None) => {
            let text = if path.as_os_str() == "-" {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Usage(format!("stdin: {e}")))?;
                s
            } else {
                std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            };
            Ok((parse_instance(&text)?, None))
        }
        (None, Some(name)) => {
            let eps = input.eps.as_deref().map(|e| parse_scalar(e, "eps")).transpose()?;
            let p = PaperInstance::from_name(name, eps, None, input.k)?;
            Ok((gen_paper_instance(&p)?, Some(p)))
        }
        (None, None) => Err(CliError::Usage("an instance file or --family is required".into())),
    }
}

fn placement_for(inst: &Instance, family: Option<&PaperInstance>, arg: Option<&str>) -> CliResult<Placement> {
    let s = match arg {
        Some(text) => Placement(parse_ids(text, "placement")?),
        None => family.and_then(paper_placement).unwrap_or_else(|| inst.initial_placement()),
    };
    inst.validate_placement(&s)?;
    Ok(s)
}

fn load_at(at: &At) -> CliResult<(Instance, Placement)> {
    let (inst, fam) = load(&at.input)?;
    let s = placement_for(&inst, fam.as_ref(), at.placement.as_deref())?;
    Ok((inst, s))
}

fn verdict_value(v: &SpeVerdict) -> ResultValue {
    match v {
        SpeVerdict::Ok => ResultValue::Text("ok".into()),
        SpeVerdict::ClientViolation { placement, violation } => {
            let mut fields = vec![
                ("kind", ResultValue::Text("client-violation".into())),
                ("placement", ResultValue::placement(placement)),
            ];
            if let EqVerdict::Violation { client, facility, better } = violation {
                fields.push(("client", ResultValue::Int(*client as i64)));
                fields.push(("facility", ResultValue::Int(*facility as i64)));
                fields.push(("better", ResultValue::Int(*better as i64)));
            }
            ResultValue::record(fields)
        }
        SpeVerdict::Deviation { facility, vertex, old_load, new_load } => ResultValue::record(vec![
            ("kind", ResultValue::Text("deviation".into())),
            ("facility", ResultValue::Int(*facility as i64)),
            ("vertex", ResultValue::Int(*vertex as i64)),
            ("old_load", ResultValue::Exact(old_load.clone())),
            ("new_load", ResultValue::Exact(new_load.clone())),
        ]),
    }
}

fn assignment_value(a: &[Option<usize>]) -> ResultValue {
    ResultValue::List(
        a.iter().map(|f| f.map_or(ResultValue::Text("-".into()), |f| ResultValue::Int(f as i64))).collect(),
    )
}

fn certificate_fields(doc: &mut ResultDocument, inst: &Instance, cert: &PartialCertificate) -> CliResult<()> {
    let base = cert.base_profile().ok_or_else(|| CliError::Usage("certificate lacks the base profile".into()))?;
    let report = facility_loads(inst, &cert.base, base)?;
    doc.push("placement", ResultValue::placement(&cert.base));
    doc.push("loads", ResultValue::exacts(&report.load));
    doc.push("participation", ResultValue::Exact(report.participation.clone()));
    doc.push(
        "certificate",
        ResultValue::record(vec![
            ("policy", ResultValue::Text(cert.policy.clone())),
            ("profiles", ResultValue::Int(cert.profiles.len() as i64)),
        ]),
    );
    Ok(())
}

fn run(cli: Cli, ctx: &Ctx) -> CliResult<u8> {
    match cli.cmd {
        Command::Classes(at) => {
            let (inst, s) = load_at(&at)?;
            let cs = class_set(&inst, &s)?;
            if ctx.dot {
                print!("{}", to_dot(&inst, Some(&s), Some(&cs)));
                return Ok(0);
            }
            let mut doc = ctx.doc();
            doc.push("placement", ResultValue::placement(&s));
            doc.push("classes", class_set_value(&cs));
            doc.push(
                "loads",
                ResultValue::exacts(&(0..inst.k()).map(|f| cs.facility_load(f).clone()).collect::<Vec<_>>()),
            );
            ctx.emit(&doc);
        }
        Command::Rounded(at) => {
            let (inst, s) = load_at(&at)?;
            let cs = class_set(&inst, &s)?;
            let a = rounded_profile(&inst, &s, &cs)?;
            pure_output(ctx, &inst, &s, &a.assign)?;
        }
        Command::Favoring { at, pi } => {
            let (inst, s) = load_at(&at)?;
            let pi = Permutation::new(parse_ids(&pi, "pi")?)?;
            if pi.len() != inst.k() {
                return Err(CliError::Usage(format!("--pi has {} entries for k = {}", pi.len(), inst.k())));
            }
            let a = favoring_profile(&inst, &s, &pi)?;
            pure_output(ctx, &inst, &s, &a.assign)?;
        }
        Command::Greedy(at) => {
            let (inst, s) = load_at(&at)?;
            let a = greedy_weighted_equilibrium(&inst, &s)?;
            pure_output(ctx, &inst, &s, &a.assign)?;
        }
        Command::EnumerateEq { at, guard_clients } => {
            let (inst, s) = load_at(&at)?;
            let mut guard = EnumGuard::default();
            if let Some(c) = guard_clients {
                guard.clients = c;
            }
            let polys = enumerate_equilibria(&inst, &s, guard)?;
            let mut doc = ctx.doc();
            doc.push("placement", ResultValue::placement(&s));
            doc.push("count", ResultValue::Int(polys.len() as i64));
            let items = polys
                .iter()
                .map(|p| {
                    let ranges: Vec<ResultValue> = (0..inst.k())
                        .map(|f| {
                            let (lo, hi) = p.load_range(&inst, f);
                            ResultValue::record(vec![("min", ResultValue::Exact(lo)), ("max", ResultValue::Exact(hi))])
                        })
                        .collect();
                    let sample = facility_loads(&inst, &s, &p.sample).map(|r| r.load)?;
                    Ok(ResultValue::record(vec![
                        ("unique", ResultValue::Bool(p.point().is_some())),
                        ("load_ranges", ResultValue::List(ranges)),
                        ("sample_loads", ResultValue::exacts(&sample)),
                    ]))
                })
                .collect::<CliResult<Vec<_>>>()?;
            doc.push("equilibria", ResultValue::List(items));
            ctx.emit(&doc);
        }
        Command::FindSpe(input) => {
            let (inst, _) = load(&input)?;
            let run = find_spe(&inst)?;
            if ctx.dot {
                let cs = class_set(&inst, &run.placement)?;
                print!("{}", to_dot(&inst, Some(&run.placement), Some(&cs)));
                return Ok(0);
            }
            let verdict = verify_spe(&inst, &run.certificate, &Alpha::one())?;
            let mut doc = ctx.doc();
            certificate_fields(&mut doc, &inst, &run.certificate)?;
            doc.push("iterations", ResultValue::Int(run.trace.iterations() as i64));
            let steps = run
                .trace
                .steps
                .iter()
                .map(|st| {
                    ResultValue::record(vec![
                        ("facility", ResultValue::Int(st.mover as i64)),
                        ("from", ResultValue::Int(st.from as i64)),
                        ("to", ResultValue::Int(st.to as i64)),
                        ("sorted_loads", ResultValue::exacts(&st.sort_after)),
                    ])
                })
                .collect();
            doc.push("trace", ResultValue::List(steps));
            doc.push("verdict", verdict_value(&verdict));
            ctx.emit(&doc);
            if !verdict.is_ok() {
                return Ok(1);
            }
        }
        Command::Verify { at, alpha, policy, pi } => {
            let (inst, s) = load_at(&at)?;
            let alpha = Alpha::new(parse_scalar(&alpha, "alpha")?)?;
            let policy = match policy {
                PolicyArg::Rounded => FullProfilePolicy::Rounded,
                PolicyArg::Greedy => FullProfilePolicy::GreedyWeighted,
                PolicyArg::Uniform => FullProfilePolicy::Uniform,
                PolicyArg::Favoring => {
                    let pi = pi.ok_or_else(|| CliError::Usage("--policy favoring needs --pi".into()))?;
                    FullProfilePolicy::Favoring(Permutation::new(parse_ids(&pi, "pi")?)?)
                }
            };
            let cert = PartialCertificate::from_policy(&inst, &s, &policy)?;
            let verdict = verify_spe(&inst, &cert, &alpha)?;
            if ctx.dot {
                print!("{}", to_dot(&inst, Some(&s), None));
                return Ok(if verdict.is_ok() { 0 } else { 1 });
            }
            let mut doc = ctx.doc();
            doc.push("placement", ResultValue::placement(&s));
            doc.push("alpha", ResultValue::Exact(alpha.value().clone()));
            doc.push("loads", ResultValue::exacts(&policy_loads(&inst, &s, &policy)?));
            doc.push("policy", ResultValue::Text(policy.kind()));
            doc.push("verdict", verdict_value(&verdict));
            if let Some(f) = verdict.factor() {
                doc.push("factor", ResultValue::Exact(f));
            }
            ctx.emit(&doc);
            if !verdict.is_ok() {
                return Ok(1);
            }
        }
        Command::KApprox(input) => {
            let (inst, _) = load(&input)?;
            let (s, cert) = k_approx_spe(&inst)?;
            if ctx.dot {
                print!("{}", to_dot(&inst, Some(&s), None));
                return Ok(0);
            }
            let alpha = Alpha::new(Scalar::int(inst.k() as i64))?;
            let verdict = verify_spe(&inst, &cert, &alpha)?;
            let mut doc = ctx.doc();
            certificate_fields(&mut doc, &inst, &cert)?;
            doc.push("alpha", ResultValue::Exact(alpha.value().clone()));
            doc.push("verdict", verdict_value(&verdict));
            ctx.emit(&doc);
            if !verdict.is_ok() {
                return Ok(1);
            }
        }
        Command::SpeExists { input, alpha, guard_fpps, guard_clients } => {
            let (inst, _) = load(&input)?;
            let alpha = Alpha::new(parse_scalar(&alpha, "alpha")?)?;
            let mut guard = SpeGuard::default();
            if let Some(g) = guard_fpps {
                guard.fpps = g;
            }
            if let Some(c) = guard_clients {
                guard.enumeration.clients = c;
            }
            let decision = spe_exists(&inst, &alpha, guard)?;
            let mut doc = ctx.doc();
            doc.push("alpha", ResultValue::Exact(alpha.value().clone()));
            match &decision {
                SpeDecision::Exists { certificate } => {
                    doc.push("verdict", ResultValue::Text("exists".into()));
                    certificate_fields(&mut doc, &inst, certificate)?;
                }
                SpeDecision::None { summary } => {
                    doc.push("verdict", ResultValue::Text("none".into()));
                    let rows = summary
                        .iter()
                        .map(|(s, why)| {
                            ResultValue::record(vec![
                                ("placement", ResultValue::placement(s)),
                                ("reason", ResultValue::Text(why.clone())),
                            ])
                        })
                        .collect();
                    doc.push("placements", ResultValue::List(rows));
                }
            }
            ctx.emit(&doc);
            if !decision.exists() {
                return Ok(1);
            }
        }
        Command::Opt(input) => {
            let (inst, _) = load(&input)?;
            let (s, w) = optimum_placement(&inst, DEFAULT_OPT_GUARD)?;
            if ctx.dot {
                print!("{}", to_dot(&inst, Some(&s), None));
                return Ok(0);
            }
            let mut doc = ctx.doc();
            doc.push("placement", ResultValue::placement(&s));
            doc.push("participation", ResultValue::Exact(w));
            ctx.emit(&doc);
        }
        Command::Poa(input) => {
            let (inst, fam) = load(&input)?;
            let (inst, cert) = match fam {
                Some(PaperInstance::Fig8 { k }) => fig8_certificate(k)?,
                _ if inst.is_unweighted() => {
                    let cert = find_spe(&inst)?.certificate;
                    (inst, cert)
                }
                _ => match spe_exists(&inst, &Alpha::one(), SpeGuard::default())? {
                    SpeDecision::Exists { certificate } => (inst, certificate),
                    SpeDecision::None { .. } => return Err(CliError::Domain("instance has no SPE".into())),
                },
            };
            let rep = poa_certificate(&inst, &cert)?;
            let mut doc = ctx.doc();
            doc.push("placement", ResultValue::placement(&cert.base));
            doc.push("policy", ResultValue::Text(cert.policy.clone()));
            doc.push("state_participation", ResultValue::Exact(rep.state_weight));
            doc.push("opt_placement", ResultValue::placement(&rep.opt_placement));
            doc.push("opt_participation", ResultValue::Exact(rep.opt_weight));
            doc.push("ratio", ResultValue::Exact(rep.ratio));
            ctx.emit(&doc);
        }
        Command::Gen { family, k, eps, alpha, random, n, density, weighted, restricted, seed } => {
            let (inst, s) = match (family, random) {
                (Some(_), true) => return Err(CliError::Usage("give either --family or --random".into())),
                (Some(name), false) => {
                    let eps = eps.as_deref().map(|e| parse_scalar(e, "eps")).transpose()?;
                    let alpha = alpha.as_deref().map(|a| parse_scalar(a, "alpha")).transpose()?;
                    let p = PaperInstance::from_name(&name, eps, alpha, k)?;
                    (gen_paper_instance(&p)?, paper_placement(&p))
                }
                (None, true) => {
                    if !(0.0..=1.0).contains(&density) {
                        return Err(CliError::Usage("--density must lie in [0, 1]".into()));
                    }
                    let spec = RandomSpec { n, k: k.unwrap_or(2), density, weighted, restricted };
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (random_instance(&spec, &mut rng)?, None)
                }
                (None, false) => return Err(CliError::Usage("gen needs --family or --random".into())),
            };
            if ctx.dot {
                print!("{}", to_dot(&inst, s.as_ref(), None));
            } else {
                print!("{}", serialize_instance(&inst));
            }
        }
        Command::ReduceSat { cnf, m, t, seed, alpha, eps } => {
            let formula = match cnf {
                Some(text) => text.parse::<CnfFormula>()?,
                None => {
                    if m == 0 {
                        return Err(CliError::Usage("--m must be positive".into()));
                    }
                    CnfFormula::random(m, t, &mut ChaCha8Rng::seed_from_u64(seed))
                }
            };
            let red = reduce_sat(&formula, &parse_scalar(&alpha, "alpha")?, &parse_scalar(&eps, "eps")?)?;
            if ctx.dot {
                print!("{}", to_dot(&red.instance, None, None));
            } else {
                print!("{}", serialize_instance(&red.instance));
            }
        }
        Command::PaperCheck { name } => {
            let report = reproduce::run(&name)?;
            let mut doc = ctx.doc();
            doc.push("check", ResultValue::Text(name.clone()));
            let rows = report
                .iter()
                .map(|r| {
                    ResultValue::record(vec![
                        ("item", ResultValue::Text(r.item.clone())),
                        ("expected", ResultValue::Text(r.expected.clone())),
                        ("computed", ResultValue::Text(r.computed.clone())),
                        ("equal", ResultValue::Bool(r.equal())),
                    ])
                })
                .collect();
            doc.push("rows", ResultValue::List(rows));
            let pass = report.iter().all(|r| r.equal());
            doc.push("status", ResultValue::Text(if pass { "PASS" } else { "FAIL" }.into()));
            ctx.emit(&doc);
            if !pass {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn pure_output(ctx: &Ctx, inst: &Instance, s: &Placement, assign: &[Option<usize>]) -> CliResult<()> {
    if ctx.dot {
        let cs = class_set(inst, s)?;
        print!("{}", to_dot(inst, Some(s), Some(&cs)));
        return Ok(());
    }
    let sigma = flg_core::ClientProfile::from_assignment(assign, inst.k());
    let report = facility_loads(inst, s, &sigma)?;
    let mut doc = ctx.doc();
    doc.push("placement", ResultValue::placement(s));
    doc.push("assignment", assignment_value(assign));
    doc.push("loads", ResultValue::exacts(&report.load));
    doc.push("sorted_loads", ResultValue::exacts(&report.sorted));
    ctx.emit(&doc);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let ctx = Ctx { format: cli.format, dot: cli.dot, echo };
    match run(cli, &ctx) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
