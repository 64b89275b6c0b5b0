use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use hflsq::basis::BasisFamily;
use hflsq::harness::{
    parse_config_text, run_experiment, run_selftest, run_stability_check, standard_metadata, CsvTable, DistKind,
    ExperimentConfig, ExperimentKind, TargetFunction,
};
use hflsq::lsq::{PlanRule, ScalingKind, ScalingRule, Solver};
use hflsq::multiindex::SpaceKind;
use hflsq::uqmodels::{EllipticCoefficient, OdeSolveMode};
use hflsq::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Least-squares approximation with Hermite and Laguerre functions on unbounded domains.
#[derive(Parser, Debug)]
#[command(name = "hflsq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean condition number of the least-squares matrix against q.
    Condnum(CondnumArgs),
    /// L-infinity error of a least-squares fit against q.
    Converge(ConvergeArgs),
    /// Empirical check of the sampling stability bound.
    Stability(StabilityArgs),
    /// QoI of the random ODE against its closed form.
    UqOde(UqOdeArgs),
    /// QoI of the 1D elliptic problem against a quadrature reference.
    UqElliptic(UqEllipticArgs),
    /// Fast internal consistency checks.
    Selftest(GlobalArgs),
}

#[derive(Args, Debug, Clone)]
struct GlobalArgs {
    /// Flat `key = value` file supplying defaults; flags override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Omit the timestamp metadata line.
    #[arg(long)]
    deterministic: bool,
    /// Worker threads (0 = one per core). Never changes results.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    #[command(flatten)]
    global: GlobalArgs,
    /// Output CSV path (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// hermite-poly | hermite-func | laguerre-poly | laguerre-func
    #[arg(long, value_parser = BasisFamily::from_str)]
    basis: Option<BasisFamily>,
    /// td | tp
    #[arg(long, value_parser = SpaceKind::from_str)]
    space: Option<SpaceKind>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    qmin: Option<u32>,
    #[arg(long)]
    qmax: Option<u32>,
    /// linear | quadratic
    #[arg(long, value_parser = PlanRule::from_str)]
    rule: Option<PlanRule>,
    /// Sampling multiplier in m = c N or m = c N^2.
    #[arg(long)]
    c: Option<f64>,
    /// gaussian | exponential | uniform-sym | uniform-pos | mapped
    #[arg(long, value_parser = DistKind::from_str)]
    dist: Option<DistKind>,
    /// Mapping family: 0 logarithmic on (-1, 1), 1 algebraic on [0, 1).
    #[arg(long = "map-r")]
    map_r: Option<u8>,
    /// Mapping parameter.
    #[arg(long = "L")]
    l: Option<f64>,
    /// qr | cholesky
    #[arg(long, value_parser = Solver::from_str)]
    solver: Option<Solver>,
}

#[derive(Args, Debug, Clone)]
struct ScalingArgs {
    /// none | maximum | quantile
    #[arg(long, value_parser = ScalingKind::from_str)]
    scaling: Option<ScalingKind>,
    /// Effective support radius of the target.
    #[arg(long = "M")]
    m: Option<f64>,
    /// Kept fraction for the quantile rule.
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(Args, Debug)]
struct CondnumArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    scaling: ScalingArgs,
    /// e.g. `gauss_decay(p=6)`, `gauss_sin_2d`, `ode_tilde(beta=1.5,t=1)`
    #[arg(long, value_parser = TargetFunction::parse)]
    target: Option<TargetFunction>,
    #[arg(long = "n-eval")]
    n_eval: Option<usize>,
    #[arg(long = "eval-seed")]
    eval_seed: Option<u64>,
}

#[derive(Args, Debug)]
struct UqOdeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    scaling: ScalingArgs,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// analytic | rk4
    #[arg(long = "ode-mode", value_parser = OdeSolveMode::from_str)]
    ode_mode: Option<OdeSolveMode>,
}

#[derive(Args, Debug)]
struct UqEllipticArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// lognormal3 | affine3 | single(c=..)
    #[arg(long, value_parser = EllipticCoefficient::from_str)]
    coefficient: Option<EllipticCoefficient>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long = "n-elems")]
    n_elems: Option<usize>,
    /// Gauss-Hermite nodes per dimension for the reference.
    #[arg(long = "ref-nodes")]
    ref_nodes: Option<usize>,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[command(flatten)]
    global: GlobalArgs,
    /// Number of basis functions.
    #[arg(long = "K")]
    k: usize,
    /// Failure-probability exponent.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report as CSV.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) | Error::DimensionMismatch { .. } | Error::Domain { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl CommonArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.family, self.basis);
        set(&mut cfg.space, self.space);
        set(&mut cfg.dim, self.dim);
        set(&mut cfg.q_min, self.qmin);
        set(&mut cfg.q_max, self.qmax);
        set(&mut cfg.plan.rule, self.rule);
        set(&mut cfg.plan.c, self.c);
        set(&mut cfg.dist, self.dist);
        set(&mut cfg.map_r, self.map_r);
        set(&mut cfg.l, self.l);
        set(&mut cfg.solver, self.solver);
    }
}

impl ScalingArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), Failure> {
        let kind = self.scaling.unwrap_or(cfg.scaling.kind);
        let radius = self.m.unwrap_or(cfg.scaling.radius);
        let mu = self.mu.unwrap_or(cfg.scaling.mu);
        cfg.scaling = match kind {
            ScalingKind::None => ScalingRule::none(),
            _ => ScalingRule::new(kind, radius, mu)?,
        };
        Ok(())
    }
}

/// Turns config-file pairs into flag tokens placed before the user's own
/// flags, so the user's occurrence wins.
fn config_tokens(path: &Path) -> Result<Vec<String>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, v) in parse_config_text(&text)? {
        match (k.as_str(), v.as_str()) {
            ("config", _) => return Err(Failure::Usage("config files cannot include other config files".into())),
            ("experiment", _) => {}
            ("deterministic", "true") => out.push("--deterministic".to_string()),
            ("deterministic", "false") => {}
            _ => {
                out.push(format!("--{k}"));
                out.push(v);
            }
        }
    }
    Ok(out)
}

fn find_config(args: &[String]) -> Option<PathBuf> {
    let mut it = args.iter();
    let mut found = None;
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            found = Some(PathBuf::from(v));
        } else if a == "--config" {
            found = it.next().map(PathBuf::from);
        }
    }
    found
}

fn parse_cli(mut args: Vec<String>) -> Result<Cli, Failure> {
    let mut cmd = Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for n in &names {
        cmd = cmd.mut_subcommand(n, |s| s.args_override_self(true));
    }
    if let Some(path) = find_config(&args) {
        if let Some(pos) = args.iter().skip(1).position(|a| names.contains(a)) {
            let extra = config_tokens(&path)?;
            args.splice(pos + 2..pos + 2, extra);
        }
    }
    let matches = cmd.try_get_matches_from(args).map_err(|e| {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = e.print();
            std::process::exit(0);
        }
        Failure::Usage(e.render().to_string())
    })?;
    Cli::from_arg_matches(&matches).map_err(|e| Failure::Usage(e.render().to_string()))
}

fn write_table(table: &CsvTable, out: Option<&Path>) -> Result<(), Failure> {
    let io_err = |e: io::Error| Failure::Runtime(format!("writing output: {e}"));
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            table.write_to(&mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write_to(&mut w).map_err(io_err)
        }
    }
}

fn run_sweep(mut cfg: ExperimentConfig, global: &GlobalArgs, out: Option<&Path>) -> Result<(), Failure> {
    match cfg.kind {
        ExperimentKind::UqOde => cfg.dim = 1,
        ExperimentKind::UqElliptic => cfg.dim = cfg.coefficient.dim(),
        _ => {}
    }
    // Validate before touching the filesystem so usage errors leave no file.
    cfg.validate()?;
    let mut table = run_experiment(&cfg).map_err(|e| match e {
        Error::Parameter(_) => Failure::from(e),
        other => Failure::Runtime(other.to_string()),
    })?;
    table.metadata = standard_metadata(cfg.kind.as_str(), cfg.seed, &cfg.describe(), !global.deterministic);
    write_table(&table, out)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Condnum(a) => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::Condnum);
            a.common.apply(&mut cfg);
            set(&mut cfg.reps, a.reps);
            run_sweep(cfg, &a.common.global, a.common.out.as_deref())
        }
        Command::Converge(a) => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::Converge);
            a.common.apply(&mut cfg);
            a.scaling.apply(&mut cfg)?;
            if a.target.is_some() {
                cfg.target = a.target;
            }
            set(&mut cfg.n_eval, a.n_eval);
            if a.eval_seed.is_some() {
                cfg.eval_seed = a.eval_seed;
            }
            run_sweep(cfg, &a.common.global, a.common.out.as_deref())
        }
        Command::UqOde(a) => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::UqOde);
            a.common.apply(&mut cfg);
            a.scaling.apply(&mut cfg)?;
            set(&mut cfg.beta, a.beta);
            set(&mut cfg.t, a.t);
            set(&mut cfg.ode_mode, a.ode_mode);
            run_sweep(cfg, &a.common.global, a.common.out.as_deref())
        }
        Command::UqElliptic(a) => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::UqElliptic);
            a.common.apply(&mut cfg);
            set(&mut cfg.coefficient, a.coefficient);
            set(&mut cfg.x0, a.x0);
            set(&mut cfg.n_elems, a.n_elems);
            set(&mut cfg.ref_nodes, a.ref_nodes);
            run_sweep(cfg, &a.common.global, a.common.out.as_deref())
        }
        Command::Stability(a) => {
            if a.trials == 0 || a.k == 0 || !(a.r > 0.0 && a.r.is_finite()) {
                return Err(Failure::Usage("stability needs --K >= 1, --trials >= 1 and --r > 0".into()));
            }
            let report = run_stability_check(a.k, a.r, a.trials, a.seed)?;
            println!("{}", report.summary());
            println!(
                "{:>20} = {}",
                "verdict",
                if report.within_bound() { "within bound" } else { "bound exceeded" }
            );
            if let Some(path) = &a.out {
                let mut table = report.to_table();
                let config = vec![
                    ("K".to_string(), a.k.to_string()),
                    ("r".to_string(), a.r.to_string()),
                    ("trials".to_string(), a.trials.to_string()),
                ];
                table.metadata = standard_metadata("stability", a.seed, &config, !a.global.deterministic);
                write_table(&table, Some(path))?;
            }
            Ok(())
        }
        Command::Selftest(_) => {
            let checks = run_selftest();
            let mut failed = 0;
            for c in &checks {
                println!("{:<4} {:<28} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                return Err(Failure::Runtime(format!("{failed} of {} self-test checks failed", checks.len())));
            }
            Ok(())
        }
    }
}

fn threads_of(cli: &Cli) -> usize {
    match &cli.command {
        Command::Condnum(a) => a.common.global.threads,
        Command::Converge(a) => a.common.global.threads,
        Command::UqOde(a) => a.common.global.threads,
        Command::UqElliptic(a) => a.common.global.threads,
        Command::Stability(a) => a.global.threads,
        Command::Selftest(g) => g.threads,
    }
}

fn main() -> ExitCode {
    let outcome = parse_cli(std::env::args().collect()).and_then(|cli| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads_of(&cli))
            .build()
            .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
        pool.install(|| run(cli))
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("{}", msg.trim_end());
            if !msg.contains("--help") {
                eprintln!("run `hflsq --help` for usage");
            }
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
