use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lgmirror::bvlg::{self, BVModel, Report};
use lgmirror::catalog::{self, WeightSystemRecord};
use lgmirror::chenruan;
use lgmirror::frobenius;
use lgmirror::poly::{atomic_decomposition, check_cy, is_invertible, parse_polynomial, transpose, weight_system, Polynomial, WeightSystem};
use lgmirror::statespace::{rational_string, Flavor, StateSpace};
use lgmirror::symmetry::{format_generators, gmax, j_element, parse_generators, set_max_group_order, sl_subgroup, SymmetryGroup};
use lgmirror::{Error, Result};

#[derive(Parser)]
#[command(name = "lgmirror", version, about = "Landau-Ginzburg mirror symmetry for Borcea-Voisin models")]
struct Cli {
    /// Output format (default: table, or csv for catalog commands).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output to a file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for sector loops.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest group order to enumerate.
    #[arg(long, global = true, env = "LGMIRROR_MAX_GROUP")]
    max_group: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Weights, symmetry groups, invertibility and atomic blocks of a polynomial.
    Analyze { poly: String },
    /// Bigraded table of an A- or B-model state space.
    StateSpace {
        #[arg(value_enum)]
        flavor: FlavorArg,
        poly: String,
        /// Generators, e.g. "1/2,1/3,1/6;0,1/3,2/3". Default: J for A, trivial for B.
        #[arg(long)]
        gens: Option<String>,
    },
    /// Borcea-Voisin model checks.
    Bv {
        #[arg(value_enum)]
        verb: BvVerb,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// K3 weight-system catalog.
    Catalog {
        #[command(subcommand)]
        verb: CatalogVerb,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    A,
    B,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BvVerb {
    Mirror,
    Twist,
    GroupLemma,
    Theorem1,
    Theorem2,
    Lgcy,
    Bvms,
    TwistCorollary,
}

#[derive(Args)]
struct ModelArgs {
    /// Elliptic part `x0^2 + f1`.
    #[arg(long)]
    w1: String,
    /// Second part `y0^2 + f2`.
    #[arg(long)]
    w2: String,
    /// Generators of G in the variables of W1 + W2. Default: J1 × J2.
    #[arg(long)]
    gens: Option<String>,
    /// Override the twisted group (twist, twist-corollary).
    #[arg(long)]
    tw_gens: Option<String>,
}

#[derive(Subcommand)]
enum CatalogVerb {
    /// All K3 weight systems.
    List {
        #[command(flatten)]
        src: CatalogSource,
    },
    /// Systems admitting an invertible `z^2 + f`.
    Filter {
        #[arg(long)]
        bv: bool,
        #[command(flatten)]
        src: CatalogSource,
    },
    /// Sample polynomial for `w0,w1,...,d`.
    Sample { system: String },
    /// Recompute stored flags and cross-check quasismoothness with random members.
    Check {
        /// Only systems with degree at most this go through the random check.
        #[arg(long, default_value_t = 12)]
        max_degree: u64,
        #[command(flatten)]
        src: CatalogSource,
    },
}

#[derive(Args)]
struct CatalogSource {
    /// Read a saved catalog instead of enumerating.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Cap on the largest weight.
    #[arg(long, default_value_t = catalog::DEFAULT_BOUND)]
    bound: u64,
}

/// Output of a command plus whether it counts as a pass.
struct Outcome {
    text: String,
    pass: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(cap) = cli.max_group {
        set_max_group_order(cap);
    }
    if let Some(j) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match run(&cli).and_then(|o| emit(&cli, &o.text).map(|_| o.pass)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(p) => File::create(p)?.write_all(text.as_bytes())?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Analyze { poly } => analyze(cli, poly),
        Command::StateSpace { flavor, poly, gens } => state_space(cli, *flavor, poly, gens.as_deref()),
        Command::Bv { verb, model } => bv(cli, *verb, model),
        Command::Catalog { verb } => catalog_cmd(cli, verb),
    }
}

fn format_of(cli: &Cli, default: Format) -> Format {
    cli.format.unwrap_or(default)
}

fn analyze(cli: &Cli, text: &str) -> Result<Outcome> {
    let p = parse_polynomial(text)?;
    let ws = weight_system(&p)?;
    let gm = gmax(&p)?;
    let sl = sl_subgroup(&gm)?;
    let inv = is_invertible(&p);
    let blocks: Vec<String> = if inv {
        atomic_decomposition(&p)?
            .blocks
            .iter()
            .map(|b| format!("{:?}{:?}", b.kind, b.vars.iter().map(|&i| p.vars()[i].clone()).collect::<Vec<_>>()))
            .collect()
    } else {
        Vec::new()
    };
    let (wt, self_check) = if inv {
        let t = transpose(&p)?;
        let back = transpose(&t)?;
        (Some(t.to_string()), Some(back == p))
    } else {
        (None, None)
    };
    let v = json!({
        "polynomial": p.to_string(),
        "weights": ws.weights,
        "degree": ws.degree,
        "j": j_element(&ws).to_string(),
        "central_charge": rational_string(&ws.central_charge()),
        "gmax_order": gm.order(),
        "sl_order": sl.order(),
        "sl_index": gm.order() / sl.order(),
        "calabi_yau": check_cy(&ws),
        "invertible": inv,
        "blocks": blocks,
        "transpose": wt,
        "transpose_self_check": self_check,
    });
    let text = match format_of(cli, Format::Table) {
        Format::Json => pretty(&v),
        Format::Csv => {
            let mut s = String::from("key,value\n");
            for (k, x) in v.as_object().unwrap() {
                s += &format!("{k},\"{}\"\n", x.to_string().trim_matches('"'));
            }
            s
        }
        Format::Table => {
            let mut s = String::new();
            for (k, x) in v.as_object().unwrap() {
                s += &format!("{k:<22} {}\n", x.to_string().trim_matches('"'));
            }
            s
        }
    };
    Ok(Outcome { text, pass: self_check != Some(false) })
}

fn group_for(p: &Polynomial, ws: &WeightSystem, gens: Option<&str>, default: Vec<lgmirror::symmetry::GroupElement>) -> Result<SymmetryGroup> {
    let gens = match gens {
        Some(t) => parse_generators(t)?,
        None => default,
    };
    if let Some(g) = gens.iter().find(|g| g.n() != ws.n()) {
        return Err(Error::Invalid(format!("generator {g} has {} components, expected {}", g.n(), ws.n())));
    }
    let gm = gmax(p)?;
    if let Some(g) = gens.iter().find(|g| !gm.contains(g)) {
        return Err(Error::GroupOutOfRange(format!("{g} is not a symmetry of {p}")));
    }
    SymmetryGroup::span(ws.n(), &gens)
}

fn state_space(cli: &Cli, flavor: FlavorArg, text: &str, gens: Option<&str>) -> Result<Outcome> {
    let p = parse_polynomial(text)?;
    let ws = weight_system(&p)?;
    let (flavor, default) = match flavor {
        FlavorArg::A => (Flavor::A, vec![j_element(&ws)]),
        FlavorArg::B => (Flavor::B, Vec::new()),
    };
    let group = group_for(&p, &ws, gens, default)?;
    let space = StateSpace::build(&p, &group, flavor)?;
    let table = space.table();
    let text = match format_of(cli, Format::Table) {
        Format::Json => {
            let mut v = table.to_json(&flavor.to_string());
            v["group_order"] = json!(group.order());
            v["generators"] = json!(format_generators(group.generators()));
            pretty(&v)
        }
        Format::Csv => {
            let mut s = String::from("p,q,dim\n");
            for ((a, b), k) in &table.entries {
                s += &format!("{},{},{k}\n", rational_string(a), rational_string(b));
            }
            s
        }
        Format::Table => format!("{flavor}-model of {p}, |G| = {}\n{table}\n", group.order()),
    };
    Ok(Outcome { text, pass: true })
}

fn build_model(m: &ModelArgs) -> Result<BVModel> {
    let w1 = parse_polynomial(&m.w1)?;
    let w2 = parse_polynomial(&m.w2)?;
    match &m.gens {
        Some(t) => BVModel::new(&w1, &w2, &parse_generators(t)?),
        None => BVModel::with_j(&w1, &w2),
    }
}

fn bv(cli: &Cli, verb: BvVerb, args: &ModelArgs) -> Result<Outcome> {
    let m = build_model(args)?;
    let tw_override = match &args.tw_gens {
        Some(t) => {
            let tw = bvlg::twist(&m)?;
            Some((tw.clone(), SymmetryGroup::span(tw.poly.nvars(), &parse_generators(t)?)?))
        }
        None => None,
    };
    let reports: Vec<Report> = match verb {
        BvVerb::Mirror => {
            let mir = bvlg::mirror_pair(&m)?;
            let v = json!({
                "w": m.w.to_string(),
                "sigma_group_order": m.sigma_group.order(),
                "mirror_w1": mir.w1.to_string(),
                "mirror_w2": mir.w2.to_string(),
                "mirror_generators": format_generators(mir.group.generators()),
                "mirror_sigma_group_order": mir.sigma_group.order(),
            });
            let text = match format_of(cli, Format::Table) {
                Format::Json => pretty(&v),
                _ => v.as_object().unwrap().iter().map(|(k, x)| format!("{k:<26} {}\n", x.to_string().trim_matches('"'))).collect(),
            };
            return Ok(Outcome { text, pass: true });
        }
        BvVerb::Twist => match &tw_override {
            Some((tw, g)) => vec![
                bvlg::verify_twist_iso_with_group(&m, Flavor::A, &tw.poly, &tw.keep, g)?,
                bvlg::verify_twist_iso_with_group(&m, Flavor::B, &tw.poly, &tw.keep, g)?,
            ],
            None => vec![bvlg::verify_twist_iso(&m, Flavor::A)?, bvlg::verify_twist_iso(&m, Flavor::B)?],
        },
        BvVerb::GroupLemma => vec![bvlg::verify_group_lemma(&m)?],
        BvVerb::Theorem1 => vec![bvlg::verify_theorem1(&m)?],
        BvVerb::Theorem2 => vec![frobenius::verify_theorem2(&m)?, frobenius::verify_gamma_lemma(&m)?],
        BvVerb::Lgcy => vec![chenruan::verify_lgcy(&m)?],
        BvVerb::Bvms => vec![chenruan::verify_bv_mirror(&m)?],
        BvVerb::TwistCorollary => match &tw_override {
            Some((tw, g)) => vec![chenruan::verify_twist_corollary_with_group(&m, &tw.poly, g)?],
            None => vec![chenruan::verify_twist_corollary(&m)?],
        },
    };
    let pass = reports.iter().all(|r| r.pass);
    let text = match format_of(cli, Format::Table) {
        Format::Json => pretty(&Value::Array(reports.iter().map(|r| r.to_json()).collect())),
        Format::Csv => {
            let mut s = String::from("check,pass,lhs_total,rhs_total,mismatches\n");
            for r in &reports {
                s += &format!("{},{},{},{},{}\n", r.check, r.pass, r.lhs_total, r.rhs_total, r.mismatches.len());
            }
            s
        }
        Format::Table => {
            let mut s = String::new();
            for r in &reports {
                s += &format!("{:<24} {}  ({} vs {})\n", r.check, if r.pass { "PASS" } else { "FAIL" }, r.lhs_total, r.rhs_total);
                for x in r.mismatches.iter().take(20) {
                    s += &format!("    {x}\n");
                }
                if r.mismatches.len() > 20 {
                    s += &format!("    ... {} more\n", r.mismatches.len() - 20);
                }
            }
            s
        }
    };
    Ok(Outcome { text, pass })
}

fn load_records(src: &CatalogSource) -> Result<Vec<WeightSystemRecord>> {
    match &src.input {
        Some(p) => catalog::load(File::open(p)?),
        None => catalog::enumerate_k3_systems(src.bound),
    }
}

fn render_records(cli: &Cli, recs: &[WeightSystemRecord]) -> Result<String> {
    Ok(match format_of(cli, Format::Csv) {
        Format::Json => pretty(&Value::Array(
            recs.iter()
                .map(|r| {
                    json!({
                        "weights": r.system.weights,
                        "degree": r.system.degree,
                        "quasismooth": r.quasismooth,
                        "bv_admissible": r.bv_admissible,
                        "has_invertible_bv_polynomial": r.has_invertible_bv_polynomial,
                        "sample": r.sample.as_ref().map(|p| p.to_string()),
                    })
                })
                .collect(),
        )),
        _ => {
            let mut buf = Vec::new();
            catalog::save(recs, &mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))?
        }
    })
}

fn catalog_cmd(cli: &Cli, verb: &CatalogVerb) -> Result<Outcome> {
    match verb {
        CatalogVerb::List { src } => Ok(Outcome { text: render_records(cli, &load_records(src)?)?, pass: true }),
        CatalogVerb::Filter { bv, src } => {
            let all = load_records(src)?;
            let recs = if *bv { catalog::filter_bv(&all) } else { all };
            Ok(Outcome { text: render_records(cli, &recs)?, pass: true })
        }
        CatalogVerb::Sample { system } => {
            let nums: Vec<u64> = system
                .split(',')
                .map(|s| s.trim().parse::<u64>().map_err(|_| Error::Invalid(format!("bad weight system {system:?}"))))
                .collect::<Result<_>>()?;
            if nums.len() < 2 {
                return Err(Error::Invalid(format!("bad weight system {system:?}")));
            }
            let (d, w) = nums.split_last().unwrap();
            let mut w = w.to_vec();
            w.sort_unstable_by(|a, b| b.cmp(a));
            let p = catalog::sample_polynomial(&WeightSystem::new(w, *d))?;
            Ok(Outcome { text: format!("{p}\n"), pass: true })
        }
        CatalogVerb::Check { max_degree, src } => {
            let recs = load_records(src)?;
            let mut bad = catalog::inconsistent_flags(&recs);
            for r in recs.iter().filter(|r| r.system.degree <= *max_degree) {
                if catalog::genericity_check(&r.system, cli.seed) != r.quasismooth {
                    bad.push(format!("{}: random member disagrees", r.system));
                }
            }
            let r = Report::new("catalog_check", recs.len(), recs.len(), bad);
            let text = match format_of(cli, Format::Table) {
                Format::Json => pretty(&r.to_json()),
                _ => format!("{} {}\n{}", r.check, if r.pass { "PASS" } else { "FAIL" }, r.mismatches.iter().map(|m| format!("    {m}\n")).collect::<String>()),
            };
            Ok(Outcome { text, pass: r.pass })
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes") + "\n"
}
