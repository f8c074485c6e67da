use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hirank::config::SessionConfig;
use hirank::fibers::{coefficient_map, fiber_dimension, solve_fiber, surjectivity_scan, Strategy};
use hirank::polyring::{parse_poly, Poly, PolyCollection};
use hirank::rank::{GowersMode, RankOptions, RankReport};
use hirank::suite::run_suite;
use hirank::variety::{flat_extension_deficiency, flats_in_bucket, load_cached, save_cached, VarietyTable, XnSpec};
use hirank::weakpoly::{
    extend_by_solver, extend_inductive, extend_on_xn, is_weakly_polynomial, spaces, FnOnX, TestMode, XnContext,
};
use hirank::{Elem, Error, Field};

mod record;

#[derive(Parser)]
#[command(name = "hirank", version, about = "Ranks, model varieties, weakly polynomial functions and pullback fibers over finite fields")]
struct Cli {
    #[command(flatten)]
    session: SessionArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SessionArgs {
    /// key = value session file; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Field literal such as 7 or 7^2.
    #[arg(long, global = true)]
    field: Option<String>,
    #[arg(long, global = true)]
    d: Option<u32>,
    #[arg(long, global = true)]
    a: Option<u32>,
    #[arg(long, global = true)]
    m: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    max_enum: Option<u128>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Append an experiment record (one JSON line) to this file.
    #[arg(long, global = true)]
    record: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct VarietyArgs {
    /// Defining polynomial; repeat for a complete intersection.
    #[arg(long = "poly")]
    polys: Vec<String>,
    #[arg(long)]
    nvars: Option<usize>,
    /// Use the model hypersurface X_n of the session degree.
    #[arg(long)]
    xn: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Solver,
    Constructive,
    Inductive,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lines,
    Planes,
    Kr,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bias, Gowers norm, analytic and Schmidt rank, singular-locus bound.
    Rank {
        poly: String,
        /// Sample the Gowers norm instead of summing exactly.
        #[arg(long)]
        sampled: bool,
        #[arg(long, default_value_t = 3)]
        cutoff: u32,
    },
    /// Build (or load from the cache) and summarize X_n.
    Xn {
        #[arg(long)]
        n: usize,
    },
    /// Check weak polynomiality of a function file on lines, planes or larger flats.
    Weaktest {
        file: PathBuf,
        #[command(flatten)]
        variety: VarietyArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Planes)]
        mode: ModeArg,
    },
    /// Extend a function file to a global polynomial of degree ≤ a.
    Extend {
        file: PathBuf,
        #[command(flatten)]
        variety: VarietyArgs,
        #[arg(long, value_enum, default_value_t = EngineArg::Solver)]
        engine: EngineArg,
        /// Flag equations for the inductive engine, separated by ';'.
        #[arg(long)]
        flag: Option<String>,
    },
    /// Dimensions of the weakly polynomial and restriction spaces.
    Spaces {
        #[command(flatten)]
        variety: VarietyArgs,
    },
    /// Solve κ_P(w) = Q over affine maps k^m → k^n.
    Fiber {
        /// P, or several separated by ';'.
        p: String,
        /// Q in x1..xm, one per component of P.
        q: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Exhaustive)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 100_000)]
        draws: u64,
        #[arg(long, default_value_t = 16)]
        witnesses: usize,
        /// Also count over the quadratic extension and report the slope.
        #[arg(long)]
        extension: bool,
    },
    /// Targets with empty fiber.
    FiberScan {
        p: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Write the missing targets as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Flats in X_b not contained in a larger flat of X meeting X_0.
    Deficiency {
        #[command(flatten)]
        variety: VarietyArgs,
        #[arg(long)]
        ell: String,
        #[arg(long)]
        b: u32,
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Restrict a polynomial to a variety and write a function file.
    Restrict {
        poly: String,
        #[command(flatten)]
        variety: VarietyArgs,
        #[arg(long)]
        to: PathBuf,
    },
    /// Property battery on X_2 for the session parameters.
    Suite {
        /// Also print a text table to stderr.
        #[arg(long)]
        table: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Rank { .. } => "rank",
            Cmd::Xn { .. } => "xn",
            Cmd::Weaktest { .. } => "weaktest",
            Cmd::Extend { .. } => "extend",
            Cmd::Spaces { .. } => "spaces",
            Cmd::Fiber { .. } => "fiber",
            Cmd::FiberScan { .. } => "fiber-scan",
            Cmd::Deficiency { .. } => "deficiency",
            Cmd::Restrict { .. } => "restrict",
            Cmd::Suite { .. } => "suite",
        }
    }
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let err = e.into();
        let code = match err.downcast_ref::<Error>() {
            Some(e) if e.is_budget() => 3,
            Some(
                Error::NonAdmissibleComponentNonzero(_)
                | Error::VanishingCheckFailed(_)
                | Error::NoPositiveChamber(_)
                | Error::ResidualNotLowerDegree(_)
                | Error::TooManySlices { .. }
                | Error::NotWeaklyPolynomial { .. }
                | Error::EmptyFiber { .. }
                | Error::DegenerateCount
                | Error::Undecidable,
            ) => 1,
            _ => 2,
        };
        Failure { code, err }
    }
}

struct Session {
    cfg: SessionConfig,
    field: Arc<Field>,
    cache: Option<PathBuf>,
}

impl Session {
    fn new(args: &SessionArgs) -> anyhow::Result<Session> {
        let mut cfg = match &args.config {
            Some(p) => SessionConfig::load(p)?,
            None => SessionConfig::default(),
        };
        if let Some(f) = &args.field {
            cfg.set("field", f)?;
        }
        cfg.d = args.d.unwrap_or(cfg.d);
        cfg.a = args.a.unwrap_or(cfg.a);
        cfg.m = args.m.or(cfg.m);
        cfg.seed = args.seed.unwrap_or(cfg.seed);
        cfg.workers = args.workers.unwrap_or(cfg.workers);
        cfg.max_enum = args.max_enum.unwrap_or(cfg.max_enum);
        if args.cache_dir.is_some() {
            cfg.cache_dir = args.cache_dir.clone();
        }
        let cache = std::env::var_os("HIRANK_CACHE_DIR").map(PathBuf::from).or_else(|| cfg.cache_dir.clone());
        if cfg.workers > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global().ok();
        }
        let field = cfg.field()?;
        Ok(Session { cfg, field, cache })
    }

    fn poly(&self, text: &str, nvars: Option<usize>) -> anyhow::Result<Poly> {
        parse_poly(text, &self.field, nvars).with_context(|| format!("parsing {text:?}"))
    }

    /// Parses `;`-separated polynomials into one variable space.
    fn collection(&self, texts: &[&str], nvars: Option<usize>) -> anyhow::Result<PolyCollection> {
        let n = match nvars {
            Some(n) => n,
            None => texts.iter().map(|t| self.poly(t, None).map(|p| p.nvars())).collect::<anyhow::Result<Vec<_>>>()?.into_iter().max().unwrap_or(1),
        };
        let polys = texts.iter().map(|t| self.poly(t, Some(n))).collect::<anyhow::Result<Vec<_>>>()?;
        Ok(PolyCollection::new(polys)?)
    }

    fn table(&self, spec: &PolyCollection) -> anyhow::Result<(VarietyTable, bool)> {
        if let Some(dir) = &self.cache {
            if let Some(t) = load_cached(spec, dir)? {
                return Ok((t, true));
            }
        }
        let t = VarietyTable::enumerate(spec, self.cfg.max_enum)?;
        if let Some(dir) = &self.cache {
            save_cached(&t, dir)?;
        }
        Ok((t, false))
    }

    fn variety(&self, v: &VarietyArgs) -> anyhow::Result<(VarietyTable, Option<XnSpec>)> {
        match (v.xn, v.polys.is_empty()) {
            (Some(n), true) => {
                let spec = XnSpec::new(n, self.cfg.d as usize)?;
                let (t, _) = self.table(&PolyCollection::single(spec.poly(&self.field)))?;
                Ok((t, Some(spec)))
            }
            (None, false) => {
                let texts: Vec<&str> = v.polys.iter().map(|s| s.as_str()).collect();
                Ok((self.table(&self.collection(&texts, v.nvars)?)?.0, None))
            }
            _ => bail!("give exactly one of --xn or --poly"),
        }
    }
}

fn read_fn(table: &VarietyTable, path: &Path) -> anyhow::Result<FnOnX> {
    let f = if path.extension().is_some_and(|e| e == "bin") {
        FnOnX::read_binary(table, path)?
    } else {
        FnOnX::read_csv(table, path)?
    };
    Ok(f)
}

fn elems(v: &[Elem]) -> Vec<u32> {
    v.iter().map(|e| e.0).collect()
}

fn run(cli: &Cli, s: &Session) -> Result<(Value, bool), Failure> {
    let cfg = &s.cfg;
    let limit = cfg.max_enum;
    let out = match &cli.cmd {
        Cmd::Rank { poly, sampled, cutoff } => {
            let p = s.poly(poly, None)?;
            let mode = if *sampled { GowersMode::Sampled { samples: cfg.samples, seed: cfg.seed } } else { GowersMode::Exact };
            let opts = RankOptions { mode, schmidt_cutoff: *cutoff, budget: cfg.max_gowers };
            (RankReport::compute(&p, &opts)?.to_json(), true)
        }
        Cmd::Xn { n } => {
            let spec = XnSpec::new(*n, cfg.d as usize)?;
            let poly = spec.poly(&s.field);
            let coll = PolyCollection::single(poly.clone());
            let (t, cached) = s.table(&coll)?;
            let q = s.field.q() as f64;
            let main = q.powi((n * cfg.d as usize) as i32 - 1);
            (
                json!({
                    "n": n,
                    "d": cfg.d,
                    "field": s.field.spec().to_string(),
                    "poly": poly.render(),
                    "points": t.len(),
                    "q_pow_dim": main,
                    "relative_error": (t.len() as f64 - main) / main,
                    "cache_key": hirank::variety::cache_key(&coll),
                    "from_cache": cached,
                }),
                true,
            )
        }
        Cmd::Weaktest { file, variety, mode } => {
            let (t, _) = s.variety(variety)?;
            let f = read_fn(&t, file)?;
            let mode = match mode {
                ModeArg::Lines => TestMode::Lines,
                ModeArg::Planes => TestMode::Planes,
                ModeArg::Kr => TestMode::KrSubspaces,
            };
            let r = is_weakly_polynomial(&t, &f, cfg.a, mode, limit)?;
            let violation = r.violation.as_ref().map(|(flat, deg)| {
                json!({"base": elems(flat.base()), "directions": flat.directions().iter().map(|d| elems(d)).collect::<Vec<_>>(), "degree": deg})
            });
            (json!({"a": cfg.a, "weakly_polynomial": r.ok, "flat_dim": r.dim, "checked": r.checked, "violation": violation}), true)
        }
        Cmd::Extend { file, variety, engine, flag } => {
            let (t, xn) = s.variety(variety)?;
            let f = read_fn(&t, file)?;
            let r = match engine {
                EngineArg::Solver => extend_by_solver(&t, &f, cfg.a, limit)?,
                EngineArg::Constructive => {
                    let spec = xn.ok_or_else(|| anyhow!("the constructive engine needs --xn"))?;
                    cfg.check_admissible()?;
                    let ctx = XnContext::new(spec, &t, cfg.m().expect("admissible"), cfg.a)?;
                    extend_on_xn(&ctx, &f, cfg.a, limit)?
                }
                EngineArg::Inductive => {
                    let eqs: Vec<Poly> = match (flag, xn) {
                        (Some(text), _) => text.split(';').map(|e| s.poly(e.trim(), Some(t.nvars()))).collect::<anyhow::Result<_>>()?,
                        (None, Some(spec)) => (0..spec.n).map(|i| Poly::var(&s.field, t.nvars(), spec.var(i, 0))).collect(),
                        (None, None) => return Err(anyhow!("the inductive engine needs --flag or --xn").into()),
                    };
                    let w0 = t.restrict(&eqs);
                    let base = extend_by_solver(&w0, &f.restrict(&t, &w0), cfg.a, limit)?;
                    let Some(base) = base.poly().cloned() else {
                        return Ok((json!({"engine": "inductive", "status": "no_base_extension", "base_points": w0.len()}), true));
                    };
                    extend_inductive(&t, &f, cfg.a, &eqs, &base, limit)?
                }
            };
            (r.to_json(), true)
        }
        Cmd::Spaces { variety } => {
            let (t, _) = s.variety(variety)?;
            (serde_json::to_value(spaces(&t, cfg.a, limit)?).map_err(anyhow::Error::from)?, true)
        }
        Cmd::Fiber { p, q, dim, strategy, draws, witnesses, extension } => {
            let coll = s.collection(&p.split(';').collect::<Vec<_>>(), None)?;
            let target: Vec<Poly> = q.split(';').map(|t| s.poly(t.trim(), Some(*dim))).collect::<anyhow::Result<_>>()?;
            let cmap = coefficient_map(&coll, *dim, limit)?;
            let strat = match strategy {
                StrategyArg::Exhaustive => Strategy::Exhaustive { max_witnesses: *witnesses },
                StrategyArg::Random => Strategy::Random { draws: *draws, seed: cfg.seed },
            };
            let mut r = solve_fiber(&cmap, &target, &strat, limit)?;
            if *extension {
                let fd = fiber_dimension(&coll, &target, *dim, 2, limit)?;
                r.count_k = Some(fd.counts[0]);
                r.count_k2 = Some(fd.counts[1]);
                r.slope = Some(fd.slope);
            }
            (r.to_json(), true)
        }
        Cmd::FiberScan { p, dim, csv } => {
            let coll = s.collection(&p.split(';').collect::<Vec<_>>(), None)?;
            let missing = surjectivity_scan(&coll, *dim, limit)?;
            let rendered: Vec<Vec<String>> = missing.iter().map(|t| t.iter().map(|q| q.render()).collect()).collect();
            if let Some(path) = csv {
                let mut text = String::from("target\n");
                for t in &rendered {
                    text.push_str(&format!("\"{}\"\n", t.join("; ")));
                }
                std::fs::write(path, text).map_err(anyhow::Error::from)?;
            }
            (json!({"poly": coll.render(), "dim": dim, "onto": missing.is_empty(), "missing_count": missing.len(), "missing": rendered}), true)
        }
        Cmd::Deficiency { variety, ell, b, dim } => {
            let (t, _) = s.variety(variety)?;
            let ell = s.poly(ell, Some(t.nvars()))?;
            let b = Elem(*b);
            if b.0 >= s.field.q() {
                return Err(anyhow!("b = {} is not a field element", b.0).into());
            }
            let t = t.with_slice(&ell)?;
            let cat = flats_in_bucket(&t, Some(b), *dim, limit)?;
            let d = flat_extension_deficiency(&t, &cat, limit)?;
            let mut v = serde_json::to_value(&d).map_err(anyhow::Error::from)?;
            v["slice_points"] = json!(t.bucket(b).len());
            v["ell"] = json!(ell.render());
            v["b"] = json!(b.0);
            (v, true)
        }
        Cmd::Restrict { poly, variety, to } => {
            let (t, _) = s.variety(variety)?;
            let p = s.poly(poly, Some(t.nvars()))?;
            let f = FnOnX::restriction_of(&t, &p);
            if to.extension().is_some_and(|e| e == "bin") {
                f.write_binary(&t, to)?;
            } else {
                f.write_csv(&t, to)?;
            }
            (json!({"points": t.len(), "file": to.display().to_string()}), true)
        }
        Cmd::Suite { table, csv } => {
            let lines = run_suite(cfg)?;
            let pass = lines.iter().all(|l| l.pass);
            if let Some(path) = csv {
                let mut text = String::from("check,pass,secs,detail\n");
                for l in &lines {
                    text.push_str(&format!("{},{},{:.3},\"{}\"\n", l.name, l.pass, l.secs, l.detail.replace('"', "'")));
                }
                std::fs::write(path, text).map_err(anyhow::Error::from)?;
            }
            if *table {
                for l in &lines {
                    eprintln!("{:<26} {}  {}", l.name, if l.pass { "PASS" } else { "FAIL" }, l.detail);
                }
            }
            // Timings are kept out of the JSON so reruns are byte-identical.
            let rows: Vec<Value> = lines.iter().map(|l| json!({"check": l.name, "pass": l.pass, "detail": l.detail})).collect();
            (json!({"field": cfg.field.to_string(), "d": cfg.d, "a": cfg.a, "m": cfg.m(), "pass": pass, "checks": rows}), pass)
        }
    };
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let session = match Session::new(&cli.session) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, &session) {
        Ok((value, pass)) => {
            let text = serde_json::to_string_pretty(&value).expect("json");
            let written = match &cli.session.out {
                Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| e.to_string()),
                None => match writeln!(std::io::stdout().lock(), "{text}") {
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
                    _ => Ok(()),
                },
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if let Some(path) = &cli.session.record {
                if let Err(e) = record::append(path, cli.cmd.name(), &session.cfg, &value, start.elapsed()) {
                    eprintln!("error: writing record: {e:#}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if pass { 0 } else { 1 })
        }
        Err(Failure { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
