//! `qmetric`: verify, construct and search for quantum metrics.
//!
//! Exit codes: 0 success or pass, 1 negative mathematical result, 2 usage or
//! parse error.

mod input;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qmetric::algebra::{self, AlgebraShape, BiElement};
use qmetric::axioms::{self, MetricCandidate, Mode, StrictFloor, ToleranceConfig};
use qmetric::construct;
use qmetric::exchange::MatrixDocument;
use qmetric::lipschitz::{AscentOptions, LipschitzContext};
use qmetric::nogo;
use qmetric::search::{self, Gauge, SearchConfig, SearchStatus};
use serde_json::json;

use input::CliError;

#[derive(Parser)]
#[command(name = "qmetric", version, about = "Quantum metrics on finite-dimensional noncommutative spaces")]
struct Cli {
    /// Suppress human-readable tables.
    #[arg(long, global = true)]
    quiet: bool,
    /// Print machine-readable JSON only.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the axioms for an element of A⊗A.
    Verify(VerifyArgs),
    /// Build a metric from classical data or from existing metrics.
    #[command(subcommand)]
    Construct(ConstructCommand),
    /// Alternating-projection search for a metric on a shape.
    Search(SearchArgs),
    /// Lipschitz seminorm of an element, optionally with the Leibniz check.
    Lipschitz(LipschitzArgs),
    /// Monge–Kantorovich distance between two states.
    Distance(DistanceArgs),
    /// Reproduce the M₂ no-go computation.
    #[command(name = "nogo-m2")]
    NogoM2(NogoArgs),
    /// Print the diagonal projector P_δ of a shape.
    Pdelta(PdeltaArgs),
}

#[derive(Args)]
struct ToleranceArgs {
    /// Tolerance for equalities (relative to ‖ρ‖).
    #[arg(long, default_value_t = 1e-9)]
    eq_tol: f64,
    /// Tolerance for positivity (relative to ‖ρ‖).
    #[arg(long, default_value_t = 1e-9)]
    psd_tol: f64,
    /// Nondegeneracy floor relative to ‖ρ‖.
    #[arg(long, default_value_t = 1e-8, conflicts_with = "abs_eps")]
    rel_eps: f64,
    /// Absolute nondegeneracy floor.
    #[arg(long)]
    abs_eps: Option<f64>,
    /// Number of sampled test elements for the algebraic nondegeneracy check.
    #[arg(long, default_value_t = 64)]
    samples: usize,
}

impl ToleranceArgs {
    fn config(&self, seed: u64) -> ToleranceConfig {
        ToleranceConfig {
            eq_tol: self.eq_tol,
            psd_tol: self.psd_tol,
            strict_floor: match self.abs_eps {
                Some(eps) => StrictFloor::Absolute(eps),
                None => StrictFloor::Relative(self.rel_eps),
            },
            sample_count: self.samples,
            seed,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Matrix document of order 2.
    path: PathBuf,
    #[arg(long, default_value = "representation")]
    mode: Mode,
    #[command(flatten)]
    tol: ToleranceArgs,
    /// Write the report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ConstructCommand {
    /// Diagonal embedding of a finite metric space (JSON or lower-triangle text).
    FromMetric(FromMetricArgs),
    /// ρ₁ + rρ₂.
    Conic(BinaryArgs),
    /// Metric on A₁ ⊕ A₂ with cross distance r (default: the smallest allowed).
    DirectSum(BinaryArgs),
    /// Metric on A₁ ⊗ A₂.
    Tensor(BinaryArgs),
}

#[derive(Args)]
struct FromMetricArgs {
    path: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BinaryArgs {
    /// First metric: matrix document or finite metric space.
    first: PathBuf,
    /// Second metric: matrix document or finite metric space.
    second: PathBuf,
    #[arg(long)]
    r: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the resulting document here.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Mode used to verify the output (and for the tensor product).
    #[arg(long, default_value = "representation")]
    mode: Mode,
}

#[derive(Args)]
struct SearchArgs {
    /// Block sizes, e.g. `3` or `1,1,1`.
    #[arg(long)]
    shape: String,
    #[arg(long, default_value = "representation")]
    mode: Mode,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Pinned trace of ρ (default D²).
    #[arg(long)]
    trace_target: Option<f64>,
    /// Report the candidate with ‖ρ‖ = 1 instead of the pinned trace.
    #[arg(long)]
    opnorm_gauge: bool,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-8)]
    residual_tol: f64,
    /// Diagnostic: leave out the triangle inequality.
    #[arg(long)]
    drop_triangle: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MetricSource {
    /// Metric as a matrix document of order 2.
    #[arg(long, conflicts_with = "classical", required_unless_present = "classical")]
    rho: Option<PathBuf>,
    /// Finite metric space (JSON or lower-triangle text).
    #[arg(long)]
    classical: Option<PathBuf>,
}

#[derive(Args)]
struct LipschitzArgs {
    #[command(flatten)]
    metric: MetricSource,
    /// Element of A: a matrix document of order 1, or comma-separated
    /// function values on a classical space.
    #[arg(long)]
    element: String,
    /// Second element for the Leibniz check.
    #[arg(long)]
    with: Option<String>,
    #[command(flatten)]
    tol: ToleranceArgs,
}

#[derive(Args)]
struct DistanceArgs {
    #[command(flatten)]
    metric: MetricSource,
    /// State: a point index, comma-separated probabilities, or a state document.
    #[arg(long)]
    phi: String,
    #[arg(long)]
    psi: String,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    #[command(flatten)]
    tol: ToleranceArgs,
}

#[derive(Args)]
struct NogoArgs {
    /// Values of λ.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 1.0, 10.0])]
    lambda: Vec<f64>,
    /// Random vectors for the quadratic identity, besides the {−1,0,1} grid.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args)]
struct PdeltaArgs {
    #[arg(long)]
    shape: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

struct Ctx {
    quiet: bool,
    json: bool,
    seed: u64,
}

impl Ctx {
    fn table(&self, text: impl FnOnce() -> String) {
        if !self.quiet && !self.json {
            print!("{}", text());
        }
    }

    fn machine(&self, value: &str) {
        if self.json {
            println!("{value}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { quiet: cli.quiet, json: cli.json, seed: cli.seed };
    let result = match cli.command {
        Command::Verify(args) => cmd_verify(&ctx, args),
        Command::Construct(cmd) => cmd_construct(&ctx, cmd),
        Command::Search(args) => cmd_search(&ctx, args),
        Command::Lipschitz(args) => cmd_lipschitz(&ctx, args),
        Command::Distance(args) => cmd_distance(&ctx, args),
        Command::NogoM2(args) => cmd_nogo(&ctx, args),
        Command::Pdelta(args) => cmd_pdelta(&ctx, args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_verify(ctx: &Ctx, args: VerifyArgs) -> Result<bool, CliError> {
    let rho: BiElement = input::read_element(&args.path)?;
    let cfg = args.tol.config(ctx.seed);
    let report = axioms::verify(&rho, rho.shape(), &cfg, args.mode)?;
    let text = serde_json::to_string_pretty(&report).expect("serializable");
    if let Some(path) = &args.report {
        input::write(path, &text)?;
    }
    ctx.machine(&text);
    ctx.table(|| table::report(&report));
    Ok(report.passed)
}

fn cmd_construct(ctx: &Ctx, cmd: ConstructCommand) -> Result<bool, CliError> {
    let (candidate, out) = match cmd {
        ConstructCommand::FromMetric(args) => {
            let space = input::read_metric(&args.path)?;
            (construct::from_finite_metric(&space), args.out)
        }
        ConstructCommand::Conic(args) => {
            let (a, b) = (input::read_candidate(&args.first)?, input::read_candidate(&args.second)?);
            let r = args.r.ok_or_else(|| CliError::Usage("conic needs --r".into()))?;
            (construct::conic_combine(&a, &b, r)?, args.out)
        }
        ConstructCommand::DirectSum(args) => {
            let (a, b) = (input::read_candidate(&args.first)?, input::read_candidate(&args.second)?);
            let r = args.r.unwrap_or_else(|| construct::direct_sum_bound(&a, &b));
            (construct::direct_sum(&a, &b, r)?, args.out)
        }
        ConstructCommand::Tensor(args) => {
            let (a, b) = (input::read_candidate(&args.first)?, input::read_candidate(&args.second)?);
            (construct::tensor_product(&a, &b, args.out.mode)?, args.out)
        }
    };
    finish_candidate(ctx, candidate, &out)
}

fn finish_candidate(ctx: &Ctx, mut candidate: MetricCandidate, out: &OutputArgs) -> Result<bool, CliError> {
    let cfg = ToleranceConfig { seed: ctx.seed, ..ToleranceConfig::default() };
    let report = candidate.certify(&cfg, out.mode)?.clone();
    let doc = MatrixDocument::from_element(&candidate.rho).to_json();
    if let Some(path) = &out.output {
        input::write(path, &doc)?;
    }
    ctx.machine(&doc);
    ctx.table(|| {
        format!(
            "shape {}  diameter {:.6}\n{}{}",
            candidate.shape(),
            candidate.diameter,
            table::matrix(candidate.rho.matrix()),
            table::report(&report)
        )
    });
    Ok(report.passed)
}

fn cmd_search(ctx: &Ctx, args: SearchArgs) -> Result<bool, CliError> {
    let shape = input::parse_shape(&args.shape)?;
    let mut cfg = SearchConfig::new(shape);
    cfg.eps = args.eps;
    if let Some(t) = args.trace_target {
        cfg.trace_target = t;
    }
    cfg.gauge = if args.opnorm_gauge { Gauge::OpNorm } else { Gauge::Trace };
    cfg.max_iter = args.max_iter;
    cfg.restarts = args.restarts;
    cfg.residual_tol = args.residual_tol;
    cfg.seed = ctx.seed;
    cfg.drop_triangle = args.drop_triangle;
    let outcome = search::feasibility_search(&cfg, args.mode)?;
    let text = outcome.to_json();
    if let Some(path) = &args.output {
        input::write(path, &text)?;
    }
    ctx.machine(&text);
    ctx.table(|| table::search(&outcome));
    Ok(outcome.status == SearchStatus::CandidateFound)
}

fn load_metric(source: &MetricSource) -> Result<BiElement, CliError> {
    match (&source.rho, &source.classical) {
        (Some(path), None) => input::read_element(path),
        (None, Some(path)) => Ok(construct::from_finite_metric(&input::read_metric(path)?).rho),
        _ => Err(CliError::Usage("give exactly one of --rho and --classical".into())),
    }
}

fn cmd_lipschitz(ctx: &Ctx, args: LipschitzArgs) -> Result<bool, CliError> {
    let rho = load_metric(&args.metric)?;
    let cfg = args.tol.config(ctx.seed);
    let lip = LipschitzContext::new(&rho, &cfg)?;
    let a = input::parse_element(&args.element, rho.shape())?;
    let seminorm = lip.seminorm(&a)?;
    let mut out = json!({ "seminorm": seminorm });
    let mut ok = true;
    if let Some(spec) = &args.with {
        let b = input::parse_element(spec, rho.shape())?;
        let check = lip.leibniz(&a, &b, cfg.eq_tol)?;
        ok = check.holds;
        out["leibniz"] = serde_json::to_value(check).expect("serializable");
    }
    ctx.machine(&out.to_string());
    ctx.table(|| {
        let mut s = format!("‖a‖_Lip = {seminorm:.12}\n");
        if let Some(l) = out.get("leibniz") {
            s.push_str(&format!(
                "Leibniz: ‖ab‖_Lip = {:.12} ≤ {:.12}  ({})\n",
                l["lhs"].as_f64().unwrap_or(f64::NAN),
                l["rhs"].as_f64().unwrap_or(f64::NAN),
                if ok { "holds" } else { "FAILS" }
            ));
        }
        s
    });
    Ok(ok)
}

fn cmd_distance(ctx: &Ctx, args: DistanceArgs) -> Result<bool, CliError> {
    let rho = load_metric(&args.metric)?;
    let cfg = args.tol.config(ctx.seed);
    let lip = LipschitzContext::new(&rho, &cfg)?;
    let phi = input::parse_state(&args.phi, rho.shape())?;
    let psi = input::parse_state(&args.psi, rho.shape())?;
    let opts = AscentOptions { max_iter: args.max_iter, ..AscentOptions::default() };
    let d = lip.mk_distance(&phi, &psi, &opts)?;
    ctx.machine(&serde_json::to_string(&d).expect("serializable"));
    ctx.table(|| table::distance(&d));
    Ok(true)
}

fn cmd_nogo(ctx: &Ctx, args: NogoArgs) -> Result<bool, CliError> {
    let mut reports = Vec::new();
    for &lambda in &args.lambda {
        reports.push(nogo::run_nogo(lambda, args.samples, ctx.seed)?);
    }
    let all = reports.iter().all(|r| r.reproduces(1e-12, 1e-10));
    ctx.machine(&serde_json::to_string_pretty(&reports).expect("serializable"));
    ctx.table(|| table::nogo(&reports));
    Ok(all)
}

fn cmd_pdelta(ctx: &Ctx, args: PdeltaArgs) -> Result<bool, CliError> {
    let shape: AlgebraShape = input::parse_shape(&args.shape)?;
    let p = algebra::diag_projector(&shape);
    let doc = MatrixDocument::from_element(&p).to_json();
    if let Some(path) = &args.output {
        input::write(path, &doc)?;
    }
    ctx.machine(&doc);
    ctx.table(|| format!("P_δ for shape {shape}\n{}", table::matrix(p.matrix())));
    Ok(true)
}
