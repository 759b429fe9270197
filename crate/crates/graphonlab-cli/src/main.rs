use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use graphonlab::config::RunConfig;
use graphonlab::constraint::{build_suite, run_suite};
use graphonlab::density::{hom_density, induced_density, CSV_HEADER};
use graphonlab::forcing::{forcing_experiment, NOT_WEAKLY_ISOMORPHIC};
use graphonlab::graph::SmallGraph;
use graphonlab::graphon::{GraphonKernel, StepGraphon};
use graphonlab::rational::{self, Rational};
use graphonlab::render::{render_pgm, RenderSpec};
use graphonlab::universal::{universal, verify_w0, Mutation, SuiteOutcome, VerifyOptions, W0};
use graphonlab::{Error, VERSION};

#[derive(Parser, Debug)]
#[command(name = "graphonlab", version, about = "Graphon densities, the universal forcible graphon and forcing experiments")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo samples for plain density estimates.
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Root tuples per constraint.
    #[arg(long, global = true)]
    tuples: Option<u64>,
    /// Absolute tolerance for constraint checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Checker and dyadic truncation depth.
    #[arg(long, global = true)]
    depth: Option<u32>,
    #[arg(long, global = true, env = "GRAPHONLAB_WORKERS")]
    workers: Option<usize>,
    /// Heatmap resolution.
    #[arg(long, global = true, default_value_t = 512)]
    resolution: usize,
    /// Output file, or directory for build-universal.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Densities of graphs given as "n:a-b,..." in a graphon file.
    Density {
        graphon: PathBuf,
        #[arg(required = true)]
        graphs: Vec<String>,
        /// Induced densities instead of homomorphism densities.
        #[arg(long)]
        induced: bool,
    },
    /// Builds the universal graphon around a step or grid graphon.
    BuildUniversal {
        wf: PathBuf,
        #[arg(long, default_value = "1/5")]
        epsilon: String,
        /// Writes the manifest and heatmap only.
        #[arg(long)]
        no_verify: bool,
        #[arg(long, hide = true)]
        mutate: Option<String>,
    },
    /// Two graphons agreeing on all graphs with at most n vertices.
    ForcingExperiment {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        z: Option<String>,
    },
    /// Runs one constraint suite against a built universal graphon.
    CheckConstraints {
        manifest: PathBuf,
        suite: String,
        #[arg(long, hide = true)]
        mutate: Option<String>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) | Error::NewtonDivergence(_) | Error::RankFailure(_) | Error::FeasibilitySampling(_) => 3,
        Error::DegreeOne(_) | Error::BalanceRange { .. } | Error::Layout(_) | Error::Construction(_) => 4,
        _ => 2,
    }
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig {
            seed: self.seed,
            tol: self.tol,
            ..RunConfig::default()
        };
        if let Some(s) = self.samples {
            cfg.samples = s;
        }
        if let Some(t) = self.tuples {
            cfg.tuples = t;
        }
        if let Some(d) = self.depth {
            cfg.depth = d;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn input_error(msg: impl Into<String>) -> Error {
    Error::Parse {
        pos: 0,
        msg: msg.into(),
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `{"grid": [[...]]}` with equal cells; entries are numbers or "p/q".
fn grid_graphon(rows: &[Value]) -> Result<StepGraphon, Error> {
    let n = rows.len();
    let cell = |v: &Value| -> Result<Rational, Error> {
        match v {
            Value::String(s) => rational::parse(s),
            Value::Number(x) => x.as_f64().and_then(|f| rational::from_f64(f).ok()).ok_or_else(|| input_error("bad grid number")),
            _ => Err(input_error("grid entries must be numbers or rationals")),
        }
    };
    let values = rows
        .iter()
        .map(|r| {
            let r = r.as_array().filter(|r| r.len() == n).ok_or_else(|| input_error("grid must be square"))?;
            r.iter().map(cell).collect()
        })
        .collect::<Result<Vec<Vec<Rational>>, Error>>()?;
    StepGraphon::new(vec![Rational::new(1.into(), (n as i64).into()); n], values)
}

enum Loaded {
    Step(StepGraphon),
    Universal(Box<W0>),
}

fn load(path: &Path) -> Result<Loaded, Error> {
    let v: Value = serde_json::from_str(&read(path)?)?;
    if v.get("parts").is_some() && v.get("wf").is_some() {
        return Ok(Loaded::Universal(Box::new(W0::from_manifest(&v)?)));
    }
    if let Some(rows) = v.get("grid").and_then(Value::as_array) {
        return Ok(Loaded::Step(grid_graphon(rows)?));
    }
    Ok(Loaded::Step(StepGraphon::from_json_value(&v)?))
}

fn load_step(path: &Path) -> Result<StepGraphon, Error> {
    match load(path)? {
        Loaded::Step(s) => Ok(s),
        Loaded::Universal(_) => Err(input_error("expected a step or grid graphon")),
    }
}

fn header(cfg: &RunConfig) -> String {
    format!("# graphonlab {VERSION}\n# config {}\n", serde_json::to_string(cfg).expect("serializable"))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn cmd_density(graphon: &Path, graphs: &[String], induced: bool, cfg: &RunConfig, out: Option<&Path>) -> Result<u8, Error> {
    let loaded = load(graphon)?;
    let kernel: &dyn GraphonKernel = match &loaded {
        Loaded::Step(s) => s,
        Loaded::Universal(w) => w.kernel().as_ref(),
    };
    let mut text = header(cfg);
    text.push_str(&format!("# kind {}\n{CSV_HEADER}\n", if induced { "induced" } else { "hom" }));
    for g in graphs {
        let h = SmallGraph::parse(g)?;
        let rep = if induced { induced_density(&h, kernel, cfg) } else { hom_density(&h, kernel, cfg) };
        text.push_str(&rep.csv_row(&h));
        text.push('\n');
    }
    emit(out, &text)?;
    Ok(0)
}

fn cmd_build(
    wf: &Path,
    epsilon: &str,
    verify: bool,
    mutate: Option<&str>,
    cfg: &RunConfig,
    resolution: usize,
    out: Option<&Path>,
) -> Result<u8, Error> {
    let spec = RenderSpec::new(resolution)?;
    let eps = rational::parse(epsilon)?;
    let mut w0 = universal(&load_step(wf)?, &eps, cfg.depth)?;
    if let Some(m) = mutate {
        w0 = w0.mutated(Mutation::parse(m)?)?;
    }
    let dir = out.unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let manifest = w0.manifest(cfg);
    write(&dir.join("manifest.json"), pretty(&manifest).as_bytes())?;
    let spec = spec
        .comment(format!("graphonlab {VERSION}"))
        .comment(format!("config {}", serde_json::to_string(cfg).expect("serializable")))
        .comment(format!("r {} epsilon {}", manifest["r"], rational::format(&w0.params.epsilon)));
    write(&dir.join("w0.pgm"), &render_pgm(w0.tiled(), &spec)?)?;
    let mut code = 0;
    if verify {
        let report = verify_w0(&w0, cfg, &VerifyOptions::default())?;
        let doc = json!({"version": VERSION, "config": cfg, "passed": report.passed(), "report": report});
        write(&dir.join("verify.json"), pretty(&doc).as_bytes())?;
        for c in &report.checks {
            eprintln!("{} {}", if c.passed { "pass" } else { "FAIL" }, c.name);
        }
        for s in &report.suites {
            eprintln!("{} {} ({} constraints, {} failed)", if s.passed { "pass" } else { "FAIL" }, s.suite, s.total, s.failed);
        }
        if !report.passed() {
            code = 1;
        }
    }
    eprintln!("{} parts written to {}", w0.table().len(), dir.display());
    Ok(code)
}

fn cmd_forcing(n: usize, z: Option<&str>, cfg: &RunConfig, out: Option<&Path>) -> Result<u8, Error> {
    let z = z.map(rational::parse).transpose()?;
    let cert = forcing_experiment(n, z, cfg)?;
    emit(out, &pretty(&cert.to_json(cfg)))?;
    if cert.degenerate() {
        eprintln!("warning: z = 1/(m+2) leaves the graphon unchanged");
    }
    let ok = cert.not_weakly_isomorphic();
    eprintln!("{}", if ok { NOT_WEAKLY_ISOMORPHIC } else { "no omega gap" });
    Ok(if ok { 0 } else { 1 })
}

fn cmd_check(manifest: &Path, suite: &str, mutate: Option<&str>, cfg: &RunConfig, out: Option<&Path>) -> Result<u8, Error> {
    let mut w0 = match load(manifest)? {
        Loaded::Universal(w) => *w,
        Loaded::Step(_) => return Err(Error::UnknownPart("graphon has no part table; pass a build manifest".into())),
    };
    if let Some(m) = mutate {
        w0 = w0.mutated(Mutation::parse(m)?)?;
    }
    let constraints = build_suite(suite, &w0.suite_params())?;
    let outcome = SuiteOutcome::new(suite, run_suite(&constraints, w0.graphon(), cfg)?);
    let doc = json!({"version": VERSION, "config": cfg, "outcome": outcome});
    emit(out, &pretty(&doc))?;
    eprintln!(
        "{} {}: {} constraints, {} failed, {} vacuous",
        if outcome.passed { "pass" } else { "FAIL" },
        suite,
        outcome.total,
        outcome.failed,
        outcome.vacuous
    );
    Ok(if outcome.passed { 0 } else { 1 })
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let cfg = cli.run.config()?;
    let out = cli.run.out.as_deref();
    match &cli.cmd {
        Command::Density { graphon, graphs, induced } => cmd_density(graphon, graphs, *induced, &cfg, out),
        Command::BuildUniversal {
            wf,
            epsilon,
            no_verify,
            mutate,
        } => cmd_build(wf, epsilon, !no_verify, mutate.as_deref(), &cfg, cli.run.resolution, out),
        Command::ForcingExperiment { n, z } => cmd_forcing(*n, z.as_deref(), &cfg, out),
        Command::CheckConstraints { manifest, suite, mutate } => cmd_check(manifest, suite, mutate.as_deref(), &cfg, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
