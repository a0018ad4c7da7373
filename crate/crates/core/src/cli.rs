//! The `contring` command line. [`run`] returns the exit code and the text
//! for standard output so that tests can drive it in-process.

use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::ball::{
    ball_factorization, ball_factorization_split, invertible_approximation, sl_projection,
    tower_unit_density, BallFactorization, TowerElem,
};
use crate::canonical::{index_bound_certificate, rcf, RcfJson};
use crate::coverage::{
    class_product_closure, corollary_index_check, enumerate_group, parse_classes,
    rodgers_saxl_check, width_report, CoverageReport,
};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::geodesic::{approximate_midpoint, geodesic_between, star_geodesic_algebraic};
use crate::mat::Mat;
use crate::poly::Poly;
use crate::rank::{dist, dist_to_center, rk, RankValue};
use crate::suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Prime modulus, used for --n-based commands and for matrix text without `p=`
    #[arg(long, global = true)]
    pub p: Option<u32>,
    /// Matrix dimension for group commands
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, env = "CONTRING_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Largest group that coverage and width will enumerate
    #[arg(long, global = true, default_value_t = 100_000)]
    pub budget_group_order: u64,
    /// Random perturbations tried by midpoint
    #[arg(long, global = true, default_value_t = 64)]
    pub budget_perturb: usize,
    /// Largest number of doublings accepted by tower
    #[arg(long, global = true, default_value_t = 6)]
    pub budget_tower_level: u32,
    /// Matrix as a file path, `-` for stdin, or inline text/JSON
    #[arg(long, global = true)]
    pub input: Option<String>,
}

#[derive(Debug, Parser)]
#[command(name = "contring", version, about = "Exact rank-metric geometry over GF(p)")]
struct Cli {
    #[command(flatten)]
    cfg: RunConfig,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalized rank of the input, or its distance to --to
    Rank {
        #[arg(long)]
        to: Option<String>,
    },
    /// Invariant factors and a conjugating transform
    Rcf,
    /// Index and the bound `min_c rank(a - c) <= 2 ind(a)`
    Index,
    /// Distance to the scalar matrices
    CenterDist,
    /// Geodesic from the input to --to
    Geodesic {
        #[arg(long)]
        to: String,
    },
    /// Geodesic to `cI` inside the zero set of the given polynomials
    Star {
        /// Coefficients low to high, comma separated; repeatable
        #[arg(long = "poly", required = true, allow_hyphen_values = true)]
        polys: Vec<String>,
        #[arg(long, default_value_t = 1)]
        c: u32,
    },
    /// Approximate midpoint of two units
    Midpoint {
        #[arg(long)]
        to: String,
    },
    /// Ball factorization of a unit into m factors
    Decompose {
        #[arg(long)]
        m: usize,
        /// Triangularize a split unit first
        #[arg(long)]
        conjugate: bool,
    },
    /// Unit at distance 1 - rk(a) from the input
    ApproxUnit,
    /// Determinant-one matrix within 1/n of the input
    SlProject,
    /// Embed along the doubling tower, or approximate by a lower level
    Tower {
        /// Lower-level matrix to approximate the input with
        #[arg(long)]
        approx: Option<String>,
        #[arg(long, default_value_t = 1)]
        levels: u32,
    },
    /// Class-product coverage in GL_n or SL_n
    Coverage {
        #[arg(long)]
        special: bool,
        /// Class ids, or auto:rs / auto:cor
        #[arg(long, default_value = "auto:rs")]
        classes: String,
    },
    /// Conjugacy width of a class, or of every class
    Width {
        #[arg(long)]
        special: bool,
        #[arg(long)]
        class: Option<usize>,
    },
    /// Run the acceptance battery
    VerifySuite {
        /// Comma-separated criterion ids; all when omitted
        #[arg(long)]
        only: Option<String>,
    },
}

/// Parses arguments (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (0, e.to_string()),
                ErrorKind::InvalidSubcommand | ErrorKind::MissingSubcommand => (
                    2,
                    error_json(fallback_seed(&args), "UnknownSubcommand", &first_line(&e)),
                ),
                _ => (2, error_json(fallback_seed(&args), "UsageError", &first_line(&e))),
            };
        }
    };
    let cfg = &cli.cfg;
    match execute(&cli.cmd, cfg) {
        Ok((code, v)) => (code, render(&cli.cmd, cfg.format, v)),
        Err(e) => (2, error_json(cfg.seed, e.kind(), &e.to_string())),
    }
}

fn first_line(e: &clap::Error) -> String {
    let s = e.to_string();
    let line = s.lines().next().unwrap_or_default();
    line.trim_start_matches("error: ").to_string()
}

fn fallback_seed(args: &[std::ffi::OsString]) -> u64 {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let from_args = strs.iter().enumerate().find_map(|(i, a)| {
        a.strip_prefix("--seed=")
            .map(str::to_string)
            .or_else(|| (a == "--seed").then(|| strs.get(i + 1).cloned()).flatten())
    });
    from_args
        .or_else(|| std::env::var("CONTRING_SEED").ok())
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn error_json(seed: u64, kind: &str, message: &str) -> String {
    let v = json!({"seed": seed, "error": {"kind": kind, "message": message}});
    format!("{v}\n")
}

fn read_text(raw: &str) -> Result<String> {
    if raw == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| Error::Parse(e.to_string()))?;
        return Ok(s);
    }
    let path = Path::new(raw);
    if path.is_file() {
        return std::fs::read_to_string(path).map_err(|e| Error::Parse(e.to_string()));
    }
    Ok(raw.to_string())
}

fn read_matrix(raw: &str, cfg: &RunConfig) -> Result<Mat> {
    let text = read_text(raw)?;
    let t = text.trim();
    if !t.starts_with('{') && !t.starts_with("p") {
        if let Some(p) = cfg.p {
            return Mat::parse(&format!("p={p}; {t}"));
        }
    }
    Mat::parse(t)
}

fn input(cfg: &RunConfig) -> Result<Mat> {
    let raw = cfg
        .input
        .as_deref()
        .ok_or_else(|| Error::Parse("missing --input".into()))?;
    read_matrix(raw, cfg)
}

fn rows(m: &Mat) -> Value {
    json!(m.rows())
}

fn with_seed(seed: u64, v: Value) -> Value {
    let mut out = Map::new();
    out.insert("seed".into(), json!(seed));
    if let Value::Object(m) = v {
        out.extend(m);
    }
    Value::Object(out)
}

fn group_args(cfg: &RunConfig) -> Result<(usize, u32)> {
    let n = cfg.n.ok_or_else(|| Error::Parse("missing --n".into()))?;
    let p = cfg.p.ok_or_else(|| Error::Parse("missing --p".into()))?;
    Ok((n, p))
}

fn ball_json(bf: &BallFactorization) -> Value {
    json!({
        "m": bf.m,
        "factors": bf.factors.iter().map(rows).collect::<Vec<_>>(),
        "witnesses": bf.witnesses.iter().map(|w| w.describe()).collect::<Vec<_>>(),
        "distances": bf.distances(),
        "bound": bf.bound(),
        "verified": bf.verify(),
    })
}

fn criterion_json(r: &CoverageReport) -> Value {
    json!({
        "threshold": r.threshold,
        "hypothesis": r.hypothesis,
        "claim_holds": r.claim_holds,
    })
}

fn execute(cmd: &Command, cfg: &RunConfig) -> Result<(i32, Value)> {
    let v = match cmd {
        Command::Rank { to } => {
            let a = input(cfg)?;
            match to {
                None => json!(rk(&a)),
                Some(b) => {
                    let b = read_matrix(b, cfg)?;
                    json!({"num": dist(&a, &b)?.num, "den": a.n(), "rank": (&a - &b).rank()})
                }
            }
        }
        Command::Rcf => json!(RcfJson::from(&rcf(&input(cfg)?))),
        Command::Index => json!(index_bound_certificate(&input(cfg)?)),
        Command::CenterDist => json!(dist_to_center(&input(cfg)?)),
        Command::Geodesic { to } => {
            let a = input(cfg)?;
            let b = read_matrix(to, cfg)?;
            json!(geodesic_between(&a, &b)?.to_json())
        }
        Command::Star { polys, c } => {
            let a = input(cfg)?;
            let s = polys
                .iter()
                .map(|q| parse_poly(a.field(), q))
                .collect::<Result<Vec<_>>>()?;
            json!(star_geodesic_algebraic(&a, &s, *c)?.to_json())
        }
        Command::Midpoint { to } => {
            let g0 = input(cfg)?;
            let g1 = read_matrix(to, cfg)?;
            let mp = approximate_midpoint(&g0, &g1, cfg.seed, cfg.budget_perturb)?;
            json!({
                "m": rows(&mp.m),
                "h": rows(&mp.h),
                "dist": dist(&g0, &g1)?,
                "err": mp.err,
                "bound": mp.bound(),
                "within_bound": mp.err <= mp.bound(),
                "perturbation": mp.perturbation,
                "tries": mp.tries,
            })
        }
        Command::Decompose { m, conjugate } => {
            let g = input(cfg)?;
            let bf = if *conjugate {
                ball_factorization_split(&g, *m)?
            } else {
                ball_factorization(&g, *m)?
            };
            ball_json(&bf)
        }
        Command::ApproxUnit => {
            let a = input(cfg)?;
            let b = invertible_approximation(&a);
            json!({
                "b": rows(&b),
                "rank_a": a.rank(),
                "rank_diff": (&b - &a).rank(),
                "verified": b.is_invertible() && (&b - &a).rank() == a.n() - a.rank(),
            })
        }
        Command::SlProject => {
            let a = input(cfg)?;
            let b = sl_projection(&a)?;
            json!({
                "b": rows(&b),
                "det": b.det(),
                "dist": dist(&a, &b)?,
                "verified": b.det() == 1 && dist(&a, &b)? <= RankValue::new(1, a.n() as u64),
            })
        }
        Command::Tower { approx, levels } => {
            let g = TowerElem::new(input(cfg)?)?;
            match approx {
                Some(a) => {
                    let a = TowerElem::new(read_matrix(a, cfg)?)?;
                    let r = tower_unit_density(&g, &a)?;
                    json!({"h": rows(&r.h), "h_low": rows(r.h_low.mat()), "trace": r.trace})
                }
                None => {
                    if *levels > cfg.budget_tower_level {
                        return Err(Error::BudgetExceeded {
                            what: "tower levels".into(),
                            needed: *levels as u128,
                            budget: cfg.budget_tower_level as u128,
                        });
                    }
                    let up = g.lift_to(g.level() + levels)?;
                    json!({"level": up.level(), "matrix": rows(up.mat()), "rk": rk(up.mat())})
                }
            }
        }
        Command::Coverage { special, classes } => {
            let (n, p) = group_args(cfg)?;
            let t = enumerate_group(n, p, *special, cfg.budget_group_order as u128)?;
            let tuple = parse_classes(&t, classes)?;
            let s = class_product_closure(&t, &tuple)?;
            let criteria = (n > 2 && *special).then(|| -> Result<Value> {
                Ok(json!({
                    "index": criterion_json(&rodgers_saxl_check(&t, &tuple)?),
                    "distance": criterion_json(&corollary_index_check(&t, &tuple)?),
                }))
            });
            json!({
                "n": n,
                "p": p,
                "special": special,
                "order": t.order(),
                "classes": t.class_infos(),
                "tuple": tuple,
                "covered": s.is_full(),
                "coverage_fraction": RankValue::new(t.size_of(&s) as u64, t.order() as u64),
                "criteria": criteria.transpose()?,
            })
        }
        Command::Width { special, class } => {
            let (n, p) = group_args(cfg)?;
            let t = enumerate_group(n, p, *special, cfg.budget_group_order as u128)?;
            let ids: Vec<usize> = match class {
                Some(c) => vec![*c],
                None => (0..t.num_classes()).collect(),
            };
            let widths = ids
                .into_iter()
                .map(|c| width_report(&t, c))
                .collect::<Result<Vec<_>>>()?;
            json!({"n": n, "p": p, "special": special, "order": t.order(), "widths": widths})
        }
        Command::VerifySuite { only } => {
            let report = match only {
                None => suite::run_suite(cfg.seed),
                Some(ids) => {
                    let criteria = ids
                        .split(',')
                        .map(|s| {
                            s.trim()
                                .parse::<u8>()
                                .ok()
                                .and_then(|id| suite::run_criterion(id, cfg.seed))
                                .ok_or_else(|| Error::Parse(format!("bad criterion id {s:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    suite::SuiteReport {
                        seed: cfg.seed,
                        passed: criteria.iter().all(|c| c.passed),
                        criteria,
                    }
                }
            };
            let code = if report.passed { 0 } else { 1 };
            return Ok((code, json!(report)));
        }
    };
    Ok((0, with_seed(cfg.seed, v)))
}

fn parse_poly(field: FieldSpec, s: &str) -> Result<Poly> {
    let coeffs = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad coefficient {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Poly::new(field, &coeffs))
}

fn render(cmd: &Command, format: Format, v: Value) -> String {
    match format {
        Format::Json => format!("{v}\n"),
        Format::Text => {
            if let Command::VerifySuite { .. } = cmd {
                return suite_text(&v);
            }
            let mut out = String::new();
            for (k, val) in flatten(&v) {
                out.push_str(&format!("{k}: {val}\n"));
            }
            out
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"]).expect("in-memory write");
            for (k, val) in flatten(&v) {
                w.write_record([k, val]).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
        }
    }
}

fn suite_text(v: &Value) -> String {
    let mut out = format!("seed: {}\n", v["seed"]);
    for c in v["criteria"].as_array().into_iter().flatten() {
        let verdict = if c["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "criterion {:>2} {verdict} {}\n",
            c["id"].as_u64().unwrap_or_default(),
            c["name"].as_str().unwrap_or_default()
        ));
    }
    let all = v["passed"].as_bool() == Some(true);
    out.push_str(if all { "all criteria passed\n" } else { "some criteria failed\n" });
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(_) | Value::Object(_) => None,
        other => Some(other.to_string()),
    }
}

/// Dotted keys for nested values; arrays of scalars become one
/// space-separated cell.
fn flatten(v: &Value) -> Vec<(String, String)> {
    fn go(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    go(&key(k), x, out);
                }
            }
            Value::Array(xs) => {
                if let Some(cells) = xs.iter().map(scalar).collect::<Option<Vec<_>>>() {
                    out.push((prefix.to_string(), cells.join(" ")));
                } else {
                    for (i, x) in xs.iter().enumerate() {
                        go(&key(&i.to_string()), x, out);
                    }
                }
            }
            other => out.push((prefix.to_string(), scalar(other).unwrap_or_default())),
        }
    }
    let mut out = Vec::new();
    go("", v, &mut out);
    out
}
