//! `rbs`: verification suites, fixture checks and conversions for
//! Rota-Baxter systems and their homotopy versions.
//!
//! Exit status: 0 when every check passes, 1 when some check fails, 2 when
//! the command line or an input file cannot be parsed.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use rbs_core::graded_linear::{BasedAlgebra, MultiMap};
use rbs_core::homotopy_rbs_checker::{
    associativity_residual, check_classical_rbs, HomotopyRbsJson, RbsJson, Side,
};
use rbs_core::linfty_deformation::{
    check_generalized_jacobi, CochainElement, CochainJson, CochainLInfinity, Part,
};
use rbs_core::monomial_model::{check_homotopy, leading_coefficients};
use rbs_core::rbs_minimal_model::{check_d_squared, check_pre_jacobi, Presentation};
use rbs_core::yang_baxter::{check_classical_ybp, rbs_to_ybp, ybp_to_rbs, InfinityYbpJson, YbpJson};
use rbs_core::{Rational, Scalar};

type K = Rational;

const MC_CONVENTION: &str = "alpha has degree -1; mc(alpha) = sum_k l_k(alpha,...,alpha)/k!; \
l_k = (-1)^(k(k-1)/2 + sum_i (k-1-i)|x_i|) L_k with L_k the polarized evaluation of the \
brace differential; mc(alpha) equals the evaluated differential";

#[derive(Parser)]
#[command(name = "rbs", version, about = "Exact checks for (homotopy) Rota-Baxter systems")]
struct Cli {
    /// Add the wall time to the report (reports are then not reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symbolic verification suites.
    #[command(subcommand)]
    Verify(Verify),
    /// Check a structure read from a JSON file.
    #[command(subcommand)]
    Check(Check),
    /// Convert between Yang-Baxter pairs and Rota-Baxter systems.
    #[command(subcommand)]
    Convert(Convert),
    /// Twist by a Maurer-Cartan element and check that the twisted
    /// differential squares to zero on basis cochains.
    Twist {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_arity: usize,
        /// Truncation used when the file holds a classical system.
        #[arg(long, default_value_t = 3)]
        trunc: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresentationArg {
    Mrs,
    Xyz,
}

#[derive(Subcommand)]
enum Verify {
    /// ∂² = 0 on every generator; with xyz also the brace pre-Jacobi identity.
    DSquared {
        #[arg(long, value_enum)]
        presentation: PresentationArg,
        #[arg(long)]
        max_arity: usize,
        #[arg(long, default_value_t = 3)]
        pre_jacobi_arity: usize,
    },
    /// ∂̄H̄ + H̄∂̄ = Id on tree monomials, and leading coefficients ±1.
    Homotopy {
        #[arg(long)]
        max_arity: usize,
        #[arg(long)]
        max_weight: usize,
        #[arg(long, default_value_t = 6)]
        leading_arity: usize,
    },
    /// Generalized Jacobi identities on random cochain tuples.
    Linfinity {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        trunc: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
    },
}

#[derive(Subcommand)]
enum Check {
    /// Associativity and the two Rota-Baxter system identities.
    Rbs { file: PathBuf },
    /// Stasheff and homotopy Rota-Baxter identities up to an arity.
    Hrbs {
        file: PathBuf,
        #[arg(long)]
        max_arity: usize,
    },
    /// The two Yang-Baxter pair equations.
    Ybp { file: PathBuf },
    /// Infinity Yang-Baxter equations, with the dg identities of the operator
    /// image on matrix algebras.
    AybeInfinity {
        file: PathBuf,
        #[arg(long)]
        max_n: usize,
    },
    /// Maurer-Cartan residual of a cochain or of a classical system.
    Mc {
        file: PathBuf,
        /// Truncation used when the file holds a classical system.
        #[arg(long, default_value_t = 3)]
        trunc: usize,
    },
}

#[derive(Subcommand)]
enum Convert {
    YbpToRbs { file: PathBuf },
    RbsToYbp { file: PathBuf },
}

#[derive(Serialize)]
struct Case {
    case: String,
    ok: bool,
    #[serde(flatten)]
    detail: serde_json::Map<String, Value>,
}

fn case(key: impl Into<String>, ok: bool, detail: Value) -> Case {
    let detail = match detail {
        Value::Object(m) => m,
        Value::Null => serde_json::Map::new(),
        other => serde_json::Map::from_iter([("value".to_string(), other)]),
    };
    Case {
        case: key.into(),
        ok,
        detail,
    }
}

#[derive(Serialize)]
struct Report {
    suite: String,
    parameters: Value,
    #[serde(skip_serializing_if = "Value::is_null")]
    summary: Value,
    cases: Vec<Case>,
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<u128>,
}

impl Report {
    fn new(suite: &str, parameters: Value, summary: Value, mut cases: Vec<Case>) -> Self {
        cases.sort_by(|a, b| natural_cmp(&a.case, &b.case));
        Report {
            suite: suite.to_string(),
            parameters,
            summary,
            ok: cases.iter().all(|c| c.ok),
            cases,
            wall_time_ms: None,
        }
    }
}

/// Case keys compare with digit runs read as numbers, so `R_10` follows `R_9`.
fn natural_cmp(a: &str, b: &str) -> Ordering {
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    enum Chunk<'a> {
        Num(u64),
        Text(&'a str),
    }
    fn chunks(s: &str) -> Vec<Chunk<'_>> {
        let mut out = Vec::new();
        let mut rest = s;
        while let Some(c) = rest.chars().next() {
            let digit = c.is_ascii_digit();
            let end = rest
                .find(|ch: char| ch.is_ascii_digit() != digit)
                .unwrap_or(rest.len());
            let (head, tail) = rest.split_at(end);
            out.push(match head.parse() {
                Ok(n) if digit => Chunk::Num(n),
                _ => Chunk::Text(head),
            });
            rest = tail;
        }
        out
    }
    chunks(a).cmp(&chunks(b)).then_with(|| a.cmp(b))
}

enum Output {
    Report(Report),
    Converted(Value),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let start = Instant::now();
    match run(cli.command) {
        Ok(Output::Report(mut report)) => {
            if cli.timing {
                report.wall_time_ms = Some(start.elapsed().as_millis());
            }
            print_json(&report);
            ExitCode::from(if report.ok { 0 } else { 1 })
        }
        Ok(Output::Converted(v)) => {
            print_json(&v);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable report"));
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(command: Command) -> Result<Output> {
    let report = match command {
        Command::Verify(Verify::DSquared {
            presentation,
            max_arity,
            pre_jacobi_arity,
        }) => verify_d_squared(presentation, max_arity, pre_jacobi_arity),
        Command::Verify(Verify::Homotopy {
            max_arity,
            max_weight,
            leading_arity,
        }) => verify_homotopy(max_arity, max_weight, leading_arity),
        Command::Verify(Verify::Linfinity {
            dim,
            trunc,
            trials,
            seed,
            max_n,
        }) => verify_linfinity(dim, trunc, trials, seed, max_n)?,
        Command::Check(Check::Rbs { file }) => check_rbs(&file)?,
        Command::Check(Check::Hrbs { file, max_arity }) => check_hrbs(&file, max_arity)?,
        Command::Check(Check::Ybp { file }) => check_ybp(&file)?,
        Command::Check(Check::AybeInfinity { file, max_n }) => check_aybe(&file, max_n)?,
        Command::Check(Check::Mc { file, trunc }) => check_mc(&file, trunc)?,
        Command::Twist {
            file,
            max_arity,
            trunc,
        } => twist(&file, max_arity, trunc)?,
        Command::Convert(Convert::YbpToRbs { file }) => {
            let j: YbpJson = read_json(&file)?;
            let alg: BasedAlgebra<K> = j.algebra.build()?;
            let r = rbs_core::graded_linear::TensorElem::from_json(&j.r, &alg.space)?;
            let s = rbs_core::graded_linear::TensorElem::from_json(&j.s, &alg.space)?;
            let (rr, ss) = ybp_to_rbs(&r, &s, &alg)?;
            let out = RbsJson {
                algebra: j.algebra,
                r: rr.to_json(&alg.space),
                s: ss.to_json(&alg.space),
            };
            return Ok(Output::Converted(serde_json::to_value(out)?));
        }
        Command::Convert(Convert::RbsToYbp { file }) => {
            let j: RbsJson = read_json(&file)?;
            let alg: BasedAlgebra<K> = j.algebra.build()?;
            let (rr, ss) = load_rbs_maps(&j, &alg)?;
            let (r, s) = rbs_to_ybp(&rr, &ss, &alg)?;
            let out = YbpJson {
                algebra: j.algebra,
                r: r.to_json(&alg.space),
                s: s.to_json(&alg.space),
            };
            return Ok(Output::Converted(serde_json::to_value(out)?));
        }
    };
    Ok(Output::Report(report))
}

fn map_json(m: &MultiMap<K>, alg_space: &rbs_core::graded_linear::GradedSpace) -> Value {
    serde_json::to_value(m.to_json(alg_space)).expect("serializable map")
}

fn verify_d_squared(p: PresentationArg, max_arity: usize, pre_jacobi_arity: usize) -> Report {
    let presentation = match p {
        PresentationArg::Mrs => Presentation::Mrs,
        PresentationArg::Xyz => Presentation::Xyz,
    };
    let mut cases: Vec<Case> = check_d_squared::<K>(presentation, max_arity)
        .into_iter()
        .map(|e| {
            case(
                format!("d2({})", e.generator),
                e.ok,
                json!({"generator": e.generator, "arity": e.arity, "residual_terms": e.residual_terms}),
            )
        })
        .collect();
    let mut params = json!({"max_arity": max_arity});
    match p {
        PresentationArg::Mrs => params["presentation"] = json!("mrs"),
        PresentationArg::Xyz => {
            params["presentation"] = json!("xyz");
            params["pre_jacobi_arity"] = json!(pre_jacobi_arity);
            cases.extend(check_pre_jacobi::<K>(pre_jacobi_arity).into_iter().map(|e| {
                let [f, g, h] = &e.triple;
                case(
                    format!("pre_jacobi({f},{g},{h})"),
                    e.ok,
                    json!({"residual_terms": e.residual_terms}),
                )
            }));
        }
    }
    Report::new("d-squared", params, Value::Null, cases)
}

fn verify_homotopy(max_arity: usize, max_weight: usize, leading_arity: usize) -> Report {
    let rep = check_homotopy::<K>(max_arity, max_weight);
    let mut cases = vec![case(
        "contraction",
        rep.ok(),
        json!({"checked": rep.checked, "failures": rep.failures}),
    )];
    for (g, c) in leading_coefficients::<K>(leading_arity) {
        let ok = c == K::from_int(1) || c == K::from_int(-1);
        cases.push(case(format!("leading({g})"), ok, json!({"coefficient": c.to_string()})));
    }
    Report::new(
        "homotopy",
        json!({"max_arity": max_arity, "max_weight": max_weight, "leading_arity": leading_arity}),
        json!({"checked": rep.checked, "h_squared_nonzero": rep.h_squared_nonzero}),
        cases,
    )
}

fn verify_linfinity(dim: usize, trunc: usize, trials: usize, seed: u64, max_n: usize) -> Result<Report> {
    if dim == 0 || trunc == 0 {
        return Err(anyhow!("--dim and --trunc must be positive"));
    }
    let rep = check_generalized_jacobi::<K>(dim, trunc, max_n, trials, seed);
    let cases = rep
        .cases
        .iter()
        .map(|c| {
            let mut v = serde_json::to_value(c).expect("serializable case");
            v.as_object_mut().expect("object").remove("ok");
            case(format!("trial_{}", c.trial), c.ok, v)
        })
        .collect();
    Ok(Report::new(
        "linfinity",
        json!({"dim": dim, "trunc": trunc, "trials": trials, "seed": seed, "max_n": max_n}),
        json!({"space_degrees": rep.space_degrees, "convention": MC_CONVENTION}),
        cases,
    ))
}

fn load_rbs_maps(j: &RbsJson, alg: &BasedAlgebra<K>) -> Result<(MultiMap<K>, MultiMap<K>)> {
    let r = MultiMap::from_json(&j.r, &alg.space)?;
    let s = MultiMap::from_json(&j.s, &alg.space)?;
    for (name, m) in [("R", &r), ("S", &s)] {
        if m.arity() != 1 || m.degree() != 0 {
            return Err(anyhow!("{name} must be a linear map of degree 0"));
        }
    }
    Ok((r, s))
}

fn check_rbs(file: &Path) -> Result<Report> {
    let j: RbsJson = read_json(file)?;
    let alg: BasedAlgebra<K> = j.algebra.build()?;
    let (r, s) = load_rbs_maps(&j, &alg)?;
    let assoc = associativity_residual(&alg.space, &alg.mult)?;
    let (res1, res2) = check_classical_rbs(&alg, &r, &s)?;
    let sp = &alg.space;
    let cases = vec![
        case("associativity", assoc.is_zero(), json!({"residual": map_json(&assoc, sp)})),
        case("rbs1", res1.is_zero(), json!({"residual": map_json(&res1, sp)})),
        case("rbs2", res2.is_zero(), json!({"residual": map_json(&res2, sp)})),
    ];
    Ok(Report::new(
        "rbs",
        json!({"file": file.display().to_string()}),
        json!({"dim": alg.dim()}),
        cases,
    ))
}

fn check_hrbs(file: &Path, max_arity: usize) -> Result<Report> {
    let j: HomotopyRbsJson = read_json(file)?;
    let h = j.build::<K>(max_arity)?;
    let sp = &h.space;
    let mut cases = Vec::new();
    let mut general = std::collections::BTreeMap::new();
    for (name, res) in h.all_residuals(max_arity)? {
        cases.push(case(name.clone(), res.is_zero(), json!({"residual": map_json(&res, sp)})));
        general.insert(name, res);
    }
    let dg = h.is_dg().is_ok();
    if dg {
        for side in [Side::R, Side::S] {
            for n in 1..=max_arity {
                let res = h.dga_residual(side, n)?;
                let key = format!("{side:?}_{n}");
                let agrees = general.get(&key) == Some(&res);
                cases.push(case(
                    format!("dga_{key}"),
                    res.is_zero(),
                    json!({"residual": map_json(&res, sp), "equals_general_residual": agrees}),
                ));
            }
        }
    }
    Ok(Report::new(
        "hrbs",
        json!({"file": file.display().to_string(), "max_arity": max_arity}),
        json!({"dg": dg, "truncation": h.truncation}),
        cases,
    ))
}

fn check_ybp(file: &Path) -> Result<Report> {
    let j: YbpJson = read_json(file)?;
    let alg: BasedAlgebra<K> = j.algebra.build()?;
    let r = rbs_core::graded_linear::TensorElem::from_json(&j.r, &alg.space)?;
    let s = rbs_core::graded_linear::TensorElem::from_json(&j.s, &alg.space)?;
    for (name, t) in [("r", &r), ("s", &s)] {
        if t.order() != 2 {
            return Err(anyhow!("{name} must be a 2-tensor"));
        }
    }
    let (y1, y2) = check_classical_ybp(&r, &s, &alg)?;
    let sp = &alg.space;
    let cases = vec![
        case("ybp1", y1.is_zero(), json!({"residual": y1.to_json(sp)})),
        case("ybp2", y2.is_zero(), json!({"residual": y2.to_json(sp)})),
    ];
    Ok(Report::new(
        "ybp",
        json!({"file": file.display().to_string()}),
        json!({"dim": alg.dim()}),
        cases,
    ))
}

fn check_aybe(file: &Path, max_n: usize) -> Result<Report> {
    let j: InfinityYbpJson = read_json(file)?;
    let p = j.build::<K>(max_n + 1)?;
    let sp = &p.algebra.space;
    let mut cases = Vec::new();
    for side in [Side::R, Side::S] {
        let tag = match side {
            Side::R => "r",
            Side::S => "s",
        };
        for n in 0..=max_n {
            let t = p.aybe_residual(side, n)?;
            cases.push(case(format!("aybe_{tag}_{n}"), t.is_zero(), json!({"residual": t.to_json(sp)})));
        }
    }
    let matrix = p.algebra.matrix_of.is_some();
    if matrix {
        let h = p.chi()?;
        for side in [Side::R, Side::S] {
            for n in 1..=max_n {
                let res = h.dga_residual(side, n)?;
                cases.push(case(
                    format!("dga_{side:?}_{n}"),
                    res.is_zero(),
                    json!({"residual": map_json(&res, sp)}),
                ));
                for e in p.equivalence_identities(side, n)? {
                    cases.push(case(
                        format!("equivalence_{side:?}_{n}_{}", e.name),
                        e.holds(),
                        json!({
                            "operator_side": map_json(&e.operator_side, sp),
                            "tensor_side": map_json(&e.tensor_side, sp),
                        }),
                    ));
                }
            }
        }
    }
    Ok(Report::new(
        "aybe-infinity",
        json!({"file": file.display().to_string(), "max_n": max_n}),
        json!({"matrix_algebra": matrix, "truncation": p.truncation}),
        cases,
    ))
}

/// A file for `check mc` and `twist`: a cochain, or a classical system.
#[derive(Deserialize)]
#[serde(untagged)]
enum McInput {
    Cochain(CochainJson),
    Classical(RbsJson),
}

fn load_mc_input(file: &Path, trunc: usize) -> Result<(CochainElement<K>, &'static str)> {
    match read_json::<McInput>(file)? {
        McInput::Cochain(c) => Ok((c.build()?, "cochain")),
        McInput::Classical(j) => {
            let alg: BasedAlgebra<K> = j.algebra.build()?;
            let (r, s) = load_rbs_maps(&j, &alg)?;
            Ok((CochainElement::from_classical(&alg, &r, &s, trunc)?, "classical"))
        }
    }
}

fn part_tag(p: Part) -> &'static str {
    match p {
        Part::Alg => "alg",
        Part::RboR => "rbo_r",
        Part::RboS => "rbo_s",
    }
}

fn mc_cases(linf: &CochainLInfinity<K>, alpha: &CochainElement<K>) -> Result<Vec<Case>> {
    let res = linf.mc_residual(alpha)?;
    let mut cases = Vec::new();
    for part in Part::ALL {
        for n in 1..=alpha.truncation {
            let m = res.component(part, n);
            cases.push(case(
                format!("mc_{}_{n}", part_tag(part)),
                m.is_zero(),
                json!({"residual": map_json(&m, &alpha.space)}),
            ));
        }
    }
    Ok(cases)
}

fn check_mc(file: &Path, trunc: usize) -> Result<Report> {
    let (alpha, source) = load_mc_input(file, trunc)?;
    let linf = CochainLInfinity::<K>::new(alpha.space.clone(), alpha.truncation);
    let cases = mc_cases(&linf, &alpha)?;
    Ok(Report::new(
        "mc",
        json!({"file": file.display().to_string(), "trunc": alpha.truncation}),
        json!({"source": source, "convention": MC_CONVENTION}),
        cases,
    ))
}

fn twist(file: &Path, max_arity: usize, trunc: usize) -> Result<Report> {
    let (alpha, source) = load_mc_input(file, trunc)?;
    let linf = CochainLInfinity::<K>::new(alpha.space.clone(), alpha.truncation);
    let mut cases = mc_cases(&linf, &alpha)?;
    if let Ok(tw) = linf.twist(&alpha) {
        let basis = CochainElement::<K>::basis(&alpha.space, alpha.truncation, max_arity);
        let mut groups: std::collections::BTreeMap<(Part, usize), (usize, Vec<Value>)> =
            std::collections::BTreeMap::new();
        for x in &basis {
            let (&(part, n), _) = x.components().next().expect("basis cochains are nonzero");
            let sq = tw.l1_squared(x)?;
            let entry = groups.entry((part, n)).or_default();
            entry.0 += 1;
            if !sq.is_zero() {
                entry.1.push(json!({
                    "cochain": CochainJson::from_cochain(x),
                    "residual": CochainJson::from_cochain(&sq),
                }));
            }
        }
        for ((part, n), (checked, failures)) in groups {
            cases.push(case(
                format!("l1_squared_{}_{n}", part_tag(part)),
                failures.is_empty(),
                json!({"checked": checked, "failures": failures}),
            ));
        }
    }
    Ok(Report::new(
        "twist",
        json!({"file": file.display().to_string(), "trunc": alpha.truncation, "max_arity": max_arity}),
        json!({"source": source, "convention": MC_CONVENTION}),
        cases,
    ))
}
