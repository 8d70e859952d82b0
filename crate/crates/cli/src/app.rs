//! Argument handling and orchestration for the `gauss-cumulants` binary.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use serde_json::{json, Map, Value};

use gauss_cumulants::{
    apply_mixed_rules, eval_numeric, mc_estimate_cumulant, CovMatrix, CovMatrixFile, CumulantEngine,
    CumulantQuery, EngineConfig, Error, Group, McConfig, MixedRule, Poly,
};

use crate::format::{format_poly, PolyJson, Style};
use crate::query::{parse_query, Query};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_FILE: i32 = 4;

/// Exact moments and joint cumulants of products of centered Gaussian variables.
///
/// QUERY is `mv i j ...` for E(X_i X_j ...), or `k a b ...` for a joint
/// cumulant where each argument is a bare index or a product group such as
/// `(1,2,3)`. Example: gauss-cumulants "k 3 (1,3) (1,3) (1,2,3) (1,2,3,3)" --std
#[derive(Debug, Parser)]
#[command(name = "gauss-cumulants", version)]
pub struct Args {
    /// The query, e.g. "mv 2 5 2 5 2 8" or "k (1,2) (3,4)".
    pub query: String,

    /// Standardize: set every V[i,i] to 1 and print correlations C[i,j].
    #[arg(long = "std")]
    pub standardize: bool,

    #[arg(long, value_enum, default_value = "text")]
    pub output: Style,

    /// Also print the number of terms.
    #[arg(long)]
    pub count: bool,

    /// Evaluate at the covariance matrix in this JSON file
    /// ({"dim": n, "entries": [[...], ...]}).
    #[arg(long, value_name = "COV_JSON")]
    pub eval: Option<PathBuf>,

    /// Monte Carlo check with SAMPLES:SEED draws from the --eval matrix.
    #[arg(long, value_name = "SAMPLES:SEED", requires = "eval", value_parser = parse_mc)]
    pub mc: Option<McConfig>,

    /// Number of independent sample streams for --mc.
    #[arg(long, value_name = "N", default_value_t = McConfig::DEFAULT_SHARDS, requires = "mc")]
    pub mc_shards: usize,

    /// Largest accepted total number of indices.
    #[arg(long, value_name = "N", default_value_t = gauss_cumulants::cumulants::DEFAULT_MAX_ORDER)]
    pub max_order: usize,

    /// Sum over every set partition without pruning or shortcut rules.
    #[arg(long)]
    pub unpruned: bool,

    /// Worker threads for the engine (default: one per core).
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

fn parse_mc(s: &str) -> Result<McConfig, String> {
    let (samples, seed) = s
        .split_once(':')
        .ok_or_else(|| format!("expected SAMPLES:SEED, got `{s}`"))?;
    let samples: u64 = samples
        .trim()
        .parse()
        .map_err(|_| format!("bad sample count `{samples}`"))?;
    if samples == 0 {
        return Err("sample count must be positive".into());
    }
    let seed: u64 = seed.trim().parse().map_err(|_| format!("bad seed `{seed}`"))?;
    Ok(McConfig::new(samples, seed))
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn engine(e: Error) -> Self {
        let code = match e {
            Error::OrderLimit { .. } => EXIT_LIMIT,
            _ => EXIT_FILE,
        };
        Failure::new(code, e.to_string())
    }
}

/// Runs the CLI with `argv` (including the program name) and returns the
/// process exit code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_PARSE
                }
            };
        }
    };
    match execute(&args) {
        Ok(text) => {
            let _ = writeln!(out, "{text}");
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(err, "gauss-cumulants: {}", f.message);
            f.code
        }
    }
}

fn execute(args: &Args) -> Result<String, Failure> {
    let query =
        parse_query(&args.query).map_err(|e| Failure::new(EXIT_PARSE, format!("parse error at {e}")))?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| {
        Failure::new(
            EXIT_PARSE,
            format!("cannot start {:?} threads: {e}", args.threads),
        )
    })?;
    pool.install(|| execute_query(args, &query))
}

fn execute_query(args: &Args, query: &Query) -> Result<String, Failure> {
    let engine = CumulantEngine::new(EngineConfig {
        max_order: args.max_order,
        pruned: !args.unpruned,
    });
    let mut poly = compute(&engine, query, args.unpruned).map_err(Failure::engine)?;
    if args.standardize {
        poly = poly.substitute_diagonal_one();
    }

    let mut value = None;
    let mut mc = None;
    if let Some(path) = &args.eval {
        let mut cov = load_cov(path)?;
        if args.standardize {
            cov = cov
                .correlation()
                .map_err(|e| Failure::new(EXIT_FILE, format!("{}: {e}", path.display())))?;
        }
        value = Some(eval_numeric(&poly, &cov).map_err(Failure::engine)?);
        if let Some(cfg) = args.mc {
            let cfg = McConfig {
                shards: args.mc_shards,
                ..cfg
            };
            let q = match query {
                Query::Cumulant(q) => q.clone(),
                // The first cumulant of a single product is its mean.
                Query::Moment(ix) => {
                    let group = Group::new(ix.as_slice().iter().copied()).map_err(Failure::engine)?;
                    CumulantQuery::new(vec![group]).map_err(Failure::engine)?
                }
            };
            mc = Some((
                cfg,
                mc_estimate_cumulant(&q, &cov, &cfg).map_err(Failure::engine)?,
            ));
        }
    }

    let text = match args.output {
        Style::Json => {
            let mut obj = Map::new();
            let terms = serde_json::to_value(PolyJson::from(&poly)).expect("plain data serializes");
            obj.insert("terms".into(), terms["terms"].clone());
            if args.count {
                obj.insert("term_count".into(), json!(poly.term_count()));
            }
            if let Some(v) = value {
                obj.insert("value".into(), json!(v));
            }
            if let Some((cfg, est)) = mc {
                obj.insert(
                    "mc".into(),
                    json!({
                        "estimate": est.estimate,
                        "std_error": est.std_error,
                        "samples": cfg.samples,
                        "seed": cfg.seed,
                        "shards": cfg.shards,
                    }),
                );
            }
            Value::Object(obj).to_string()
        }
        style => {
            let mut lines = vec![format_poly(&poly, style, args.standardize)];
            if args.count {
                lines.push(format!("terms: {}", poly.term_count()));
            }
            if let Some(v) = value {
                lines.push(format!("value: {v}"));
            }
            if let Some((cfg, est)) = mc {
                lines.push(format!(
                    "mc: {} +/- {} (samples={}, seed={}, shards={})",
                    est.estimate, est.std_error, cfg.samples, cfg.seed, cfg.shards
                ));
            }
            lines.join("\n")
        }
    };
    Ok(text)
}

fn compute(engine: &CumulantEngine, query: &Query, reference: bool) -> Result<Poly, Error> {
    match query {
        Query::Moment(ix) => engine.moment(ix),
        Query::Cumulant(q) => {
            // The order guard applies before any shortcut.
            if reference || q.order() > engine.config().max_order {
                return engine.cumulant(q);
            }
            match apply_mixed_rules(q) {
                MixedRule::Zero => Ok(Poly::zero()),
                MixedRule::Collapsed(c) => engine.cumulant(&c),
                MixedRule::NoRule => engine.cumulant(q),
            }
        }
    }
}

fn load_cov(path: &PathBuf) -> Result<CovMatrix, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::new(EXIT_FILE, format!("{}: {e}", path.display())))?;
    let file: CovMatrixFile = serde_json::from_str(&text)
        .map_err(|e| Failure::new(EXIT_FILE, format!("{}: {e}", path.display())))?;
    CovMatrix::from_file(&file).map_err(|e| Failure::new(EXIT_FILE, format!("{}: {e}", path.display())))
}
