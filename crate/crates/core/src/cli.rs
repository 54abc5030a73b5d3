//! Command-line front end: `generate`, `solve`, `bench`, `flowfield`,
//! `verify`.
//!
//! Exit codes: 0 solved / accepted, 1 rejected, 2 invalid arguments,
//! 3 iteration cap reached, 4 solver failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::compound::StructureKind;
use crate::error::{Error, Result};
use crate::matcore::{self, read_matrix, write_matrix, DEFAULT_RANK_TOL};
use crate::problems::{self, BuildOptions, Candidate, Family, InitKind, Method, Problem, ProblemInstance, Verdict};
use crate::solver::{self, flow_field, trial_seed, Algorithm, Grid, SolveConfig, SolveOutcome, Status, PRNG_ID};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_MAX_ITER: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mpfactor", version, about = "Matrix factorization with product constraints by projection methods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance and write its manifest.
    Generate(GenerateArgs),
    /// Solve one instance.
    Solve(SolveArgs),
    /// Run independent trials and report iteration statistics.
    Bench(BenchArgs),
    /// Export the planar RRR flow field of `x y = c` with integer rounding.
    Flowfield(FlowArgs),
    /// Check a candidate solution exactly.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gram,
    Hadamard,
    Cyclic,
    #[value(alias = "nmf_designed")]
    NmfDesigned,
    Udisj,
    Edm,
    Int2d,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Gram => Family::Gram,
            FamilyArg::Hadamard => Family::Hadamard,
            FamilyArg::Cyclic => Family::Cyclic,
            FamilyArg::NmfDesigned => Family::NmfDesigned,
            FamilyArg::Udisj => Family::Udisj,
            FamilyArg::Edm => Family::Edm,
            FamilyArg::Int2d => Family::Int2d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Gram,
    Cyclic,
    #[value(alias = "rank_limited")]
    RankLimited,
    #[value(alias = "rank_excessive")]
    RankExcessive,
    Rank1,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Gram => Method::Gram,
            MethodArg::Cyclic => Method::Cyclic,
            MethodArg::RankLimited => Method::RankLimited,
            MethodArg::RankExcessive => Method::RankExcessive,
            MethodArg::Rank1 => Method::Rank1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Rrr,
    Admm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Random,
    Special,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rank1Structure {
    /// Integer simplex (lattice) projection.
    Lattice,
    /// Plain simplex projection.
    Simplex,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Zero fraction of designed NMF factors [default: k/m].
    #[arg(long)]
    pub f: Option<f64>,
    /// Recursion depth of unique-disjointness matrices.
    #[arg(long)]
    pub d: Option<usize>,
    /// Product of the planar toy.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<i64>,
    /// Named instance: `maxdet15` (gram) or `c23` (cyclic).
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Flags shared by `solve` and `bench`. Unset values fall back to the
/// family defaults.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Instance manifest (file or directory).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// RRR relaxation parameter.
    #[arg(long)]
    pub beta: Option<f64>,
    /// ADMM step parameter.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Metric parameter on the left factor.
    #[arg(long)]
    pub g: Option<f64>,
    /// Metric parameter on the right factor.
    #[arg(long)]
    pub h: Option<f64>,
    /// Tangent-space refinement cycles.
    #[arg(long = "T")]
    pub t: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Discrepancy tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Trace sampling period [default: every iteration up to 1e5, then every 10th].
    #[arg(long)]
    pub trace_every: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, value_enum, default_value = "rrr")]
    pub algorithm: AlgorithmArg,
    #[arg(long)]
    pub swap_projections: bool,
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// Inner dimension of the factorization [default: instance k].
    #[arg(long)]
    pub k: Option<usize>,
    /// Summand projection of the rank-one method.
    #[arg(long, value_enum, default_value = "lattice")]
    pub rank1_structure: Rank1Structure,
    /// Relative acceptance tolerance for nonnegative factorizations.
    #[arg(long, default_value_t = problems::NMF_TOL)]
    pub nmf_tol: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Number of independent trials; trial t uses seed XOR t.
    #[arg(long, default_value_t = 10)]
    pub trials: u64,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub xmin: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub xmax: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub ymin: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub ymax: f64,
    #[arg(long)]
    pub step: f64,
    /// Tangent-space refinement cycles of the hyperbola projection.
    #[arg(long = "T", default_value_t = 10)]
    pub t: usize,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Left factor (or coefficient row).
    #[arg(long)]
    pub x: Option<PathBuf>,
    /// Right factor (or coefficient row).
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// Rank-one summand files.
    #[arg(long, num_args = 1..)]
    pub summands: Vec<PathBuf>,
    /// Relative tolerance for nonnegative factorizations.
    #[arg(long, default_value_t = problems::NMF_TOL)]
    pub nmf_tol: f64,
}

/// Family defaults of the run parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyDefaults {
    pub beta: f64,
    pub g: f64,
    pub h: f64,
    pub t: usize,
    pub init: InitKind,
}

pub fn family_defaults(family: Family) -> FamilyDefaults {
    let base = FamilyDefaults {
        beta: 0.2,
        g: 1.0,
        h: 1.0,
        t: 10,
        init: InitKind::Random,
    };
    match family {
        Family::Gram | Family::Hadamard | Family::Int2d => base,
        Family::Cyclic => FamilyDefaults { t: 1, ..base },
        Family::NmfDesigned => FamilyDefaults { g: 1.2, h: 1.2, ..base },
        Family::Udisj => FamilyDefaults { g: 0.8, h: 0.8, ..base },
        Family::Edm => FamilyDefaults {
            beta: 1.0,
            g: 0.5,
            h: 0.5,
            init: InitKind::Special,
            ..base
        },
    }
}

/// Everything needed to run one or more solves.
pub struct RunPlan {
    pub instance: ProblemInstance,
    pub problem: Box<dyn Problem>,
    pub config: SolveConfig,
    pub options: BuildOptions,
}

#[derive(Debug, Serialize)]
struct ResolvedRun<'a> {
    manifest: String,
    family: &'static str,
    method: &'static str,
    init: InitKind,
    k: Option<usize>,
    rank1_structure: &'static str,
    nmf_tol: f64,
    solver: &'a SolveConfig,
}

pub fn plan(run: &RunArgs) -> Result<RunPlan> {
    let instance = problems::load_instance(&run.manifest)?;
    let defaults = family_defaults(instance.family);
    let method = match run.method {
        Some(m) => m.into(),
        None => Method::default_for(instance.family).ok_or_else(|| {
            Error::InvalidInput(format!("family {} has no solver method", instance.family.as_str()))
        })?,
    };
    let init = match run.init {
        Some(InitArg::Random) => InitKind::Random,
        Some(InitArg::Special) => InitKind::Special,
        None if method == Method::RankExcessive => defaults.init,
        None => InitKind::Random,
    };
    let (beta, g, h, t) = (
        run.beta.unwrap_or(defaults.beta),
        run.g.unwrap_or(defaults.g),
        run.h.unwrap_or(defaults.h),
        run.t.unwrap_or(defaults.t),
    );
    if !(g > 0.0 && h > 0.0) {
        return Err(Error::InvalidInput(format!("metric parameters must be positive, got g={g} h={h}")));
    }
    if !(run.nmf_tol >= 0.0) {
        return Err(Error::InvalidInput("nmf tolerance must be >= 0".into()));
    }
    let options = BuildOptions {
        k: run.k,
        t,
        g,
        h,
        init,
        rank1_structure: match run.rank1_structure {
            Rank1Structure::Lattice => StructureKind::Integer,
            Rank1Structure::Simplex => StructureKind::Nonnegative,
        },
        nmf_tol: run.nmf_tol,
    };
    let config = SolveConfig {
        algorithm: match run.algorithm {
            AlgorithmArg::Rrr => Algorithm::Rrr,
            AlgorithmArg::Admm => Algorithm::Admm,
        },
        beta,
        alpha: run.alpha,
        t,
        g,
        h,
        max_iter: run.max_iter,
        delta_tol: run.tol,
        seed: run.seed,
        swap_projections: run.swap_projections,
        trace_every: run.trace_every,
        stall: None,
    };
    config.validate()?;
    let problem = problems::build(&instance, method, &options)?;
    Ok(RunPlan {
        instance,
        problem,
        config,
        options,
    })
}

impl RunPlan {
    fn resolved(&self, manifest: &Path) -> ResolvedRun<'_> {
        ResolvedRun {
            manifest: manifest.display().to_string(),
            family: self.instance.family.as_str(),
            method: self.problem.method().as_str(),
            init: self.options.init,
            k: self.options.k,
            rank1_structure: match self.options.rank1_structure {
                StructureKind::Integer => "lattice",
                _ => "simplex",
            },
            nmf_tol: self.options.nmf_tol,
            solver: &self.config,
        }
    }

    /// One solve with the given seed.
    pub fn run(&self, seed: u64) -> Result<SolveOutcome> {
        let cfg = SolveConfig {
            seed,
            ..self.config.clone()
        };
        solver::solve(self.problem.as_ref(), self.problem.initial(seed), &cfg)
    }
}

#[derive(Debug, Serialize)]
struct SolveReport<'a> {
    status: &'static str,
    iterations: usize,
    final_delta: f64,
    verified: bool,
    verdict: String,
    seed: u64,
    prng_id: &'static str,
    config: ResolvedRun<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Accepted => "accepted".into(),
        Verdict::Rejected(r) => format!("rejected: {r}"),
    }
}

fn write_candidate(dir: &Path, cand: &Candidate) -> Result<()> {
    match cand {
        Candidate::Factors { x, y } => {
            write_matrix(&dir.join("X.txt"), x)?;
            if let Some(y) = y {
                write_matrix(&dir.join("Y.txt"), y)?;
            }
        }
        Candidate::Summands(z) => {
            for (l, zl) in z.iter().enumerate() {
                write_matrix(&dir.join(format!("Z{}.txt", l + 1)), zl)?;
            }
        }
    }
    Ok(())
}

fn write_trace(path: &Path, trace: &[solver::TraceRecord]) -> Result<()> {
    let mut out = String::with_capacity(24 * trace.len() + 16);
    out.push_str("iter,delta\n");
    for r in trace {
        out.push_str(&format!("{},{:e}\n", r.iter, r.delta));
    }
    fs::write(path, out)?;
    Ok(())
}

fn status_code(status: Status) -> i32 {
    match status {
        Status::Solved => EXIT_OK,
        Status::MaxIter => EXIT_MAX_ITER,
        Status::Failed => EXIT_FAILED,
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let plan = plan(&args.run)?;
    let outcome = plan.run(args.run.seed)?;
    let out = &args.run.out;
    fs::create_dir_all(out)?;
    let cand = plan.problem.candidate_of(&outcome);
    let verdict = problems::verify_with_tol(&plan.instance, &cand, plan.options.nmf_tol);
    write_candidate(out, &cand)?;
    write_trace(&out.join("trace.csv"), &outcome.trace)?;
    let report = SolveReport {
        status: outcome.status.as_str(),
        iterations: outcome.iterations,
        final_delta: outcome.final_delta,
        verified: verdict.accepted(),
        verdict: verdict_text(&verdict),
        seed: args.run.seed,
        prng_id: PRNG_ID,
        config: plan.resolved(&args.run.manifest),
        error: outcome.error.clone(),
    };
    fs::write(out.join("result.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    println!(
        "{} after {} iterations (delta {:e}); candidate {}",
        report.status, report.iterations, report.final_delta, report.verdict
    );
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    Ok(status_code(outcome.status))
}

/// Aggregate of a batch of trials. Iteration statistics are over solved
/// trials only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchStats {
    pub trials: usize,
    pub solved: usize,
    pub success_rate: f64,
    pub mean_iters: Option<f64>,
    pub median_iters: Option<f64>,
    pub min_iters: Option<usize>,
    pub max_iters: Option<usize>,
    /// Maximum-likelihood rate of an exponential run-time model, counting
    /// unsolved trials as censored at their iteration count.
    pub exp_rate: Option<f64>,
}

impl BenchStats {
    /// `results` holds `(solved, iterations)` per trial.
    pub fn from_results(results: &[(bool, usize)]) -> BenchStats {
        let mut solved: Vec<usize> = results.iter().filter(|r| r.0).map(|r| r.1).collect();
        solved.sort_unstable();
        let n = solved.len();
        let median = (n > 0).then(|| {
            if n % 2 == 1 {
                solved[n / 2] as f64
            } else {
                (solved[n / 2 - 1] + solved[n / 2]) as f64 / 2.0
            }
        });
        let exposure: usize = results.iter().map(|r| r.1).sum();
        BenchStats {
            trials: results.len(),
            solved: n,
            success_rate: if results.is_empty() { 0.0 } else { n as f64 / results.len() as f64 },
            mean_iters: (n > 0).then(|| solved.iter().sum::<usize>() as f64 / n as f64),
            median_iters: median,
            min_iters: solved.first().copied(),
            max_iters: solved.last().copied(),
            exp_rate: (n > 0 && exposure > 0).then(|| n as f64 / exposure as f64),
        }
    }
}

#[derive(Debug, Serialize)]
struct BenchReport<'a> {
    #[serde(flatten)]
    stats: BenchStats,
    seed: u64,
    prng_id: &'static str,
    config: ResolvedRun<'a>,
}

pub fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    if args.trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    let plan = plan(&args.run)?;
    let out = &args.run.out;
    fs::create_dir_all(out)?;
    let mut table = String::from("trial,seed,status,iterations,final_delta,verified\n");
    let mut results = Vec::new();
    for t in 0..args.trials {
        let seed = trial_seed(args.run.seed, t);
        let outcome = plan.run(seed)?;
        let verified = outcome.solved()
            && problems::verify_with_tol(&plan.instance, &plan.problem.candidate_of(&outcome), plan.options.nmf_tol)
                .accepted();
        table.push_str(&format!(
            "{t},{seed},{},{},{:e},{verified}\n",
            outcome.status.as_str(),
            outcome.iterations,
            outcome.final_delta
        ));
        results.push((outcome.solved(), outcome.iterations));
    }
    fs::write(out.join("trials.csv"), table)?;
    let stats = BenchStats::from_results(&results);
    let report = BenchReport {
        stats: stats.clone(),
        seed: args.run.seed,
        prng_id: PRNG_ID,
        config: plan.resolved(&args.run.manifest),
    };
    fs::write(out.join("stats.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    println!(
        "{}/{} solved; mean iterations {}",
        stats.solved,
        stats.trials,
        stats.mean_iters.map_or("n/a".into(), |m| format!("{m:.1}"))
    );
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct FlowMeta {
    c: f64,
    t: usize,
    nodes: usize,
    nan_count: usize,
}

/// Sidecar path of a flow-field CSV.
pub fn flow_meta_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    csv.with_file_name(name)
}

pub fn cmd_flowfield(args: &FlowArgs) -> Result<i32> {
    let grid = Grid {
        xmin: args.xmin,
        xmax: args.xmax,
        ymin: args.ymin,
        ymax: args.ymax,
        step: args.step,
    };
    let (hyperbola, round) = problems::int2d_projections(args.c, args.t);
    let samples = flow_field(hyperbola, round, &grid)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut file = std::io::BufWriter::new(fs::File::create(&args.out)?);
    writeln!(file, "x,y,vx,vy")?;
    let mut nan_count = 0;
    for s in &samples {
        if s.is_degenerate() {
            nan_count += 1;
        }
        writeln!(file, "{},{},{},{}", s.x, s.y, s.vx, s.vy)?;
    }
    file.flush()?;
    let meta = FlowMeta {
        c: args.c,
        t: args.t,
        nodes: samples.len(),
        nan_count,
    };
    fs::write(flow_meta_path(&args.out), serde_json::to_string_pretty(&meta)? + "\n")?;
    println!("{} nodes written, {} degenerate", samples.len(), nan_count);
    Ok(EXIT_OK)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let instance = problems::load_instance(&args.manifest)?;
    let candidate = if !args.summands.is_empty() {
        Candidate::Summands(args.summands.iter().map(|p| read_matrix(p)).collect::<Result<_>>()?)
    } else {
        let x = args
            .x
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("verify needs --x or --summands".into()))?;
        Candidate::Factors {
            x: read_matrix(x)?,
            y: args.y.as_ref().map(|p| read_matrix(p)).transpose()?,
        }
    };
    match problems::verify_with_tol(&instance, &candidate, args.nmf_tol) {
        Verdict::Accepted => {
            println!("accepted");
            Ok(EXIT_OK)
        }
        Verdict::Rejected(reason) => {
            eprintln!("rejected: {reason}");
            Ok(EXIT_REJECTED)
        }
    }
}

fn generate_instance(args: &GenerateArgs) -> Result<ProblemInstance> {
    let family: Family = args.family.into();
    let need = |v: Option<usize>, name: &str| {
        v.ok_or_else(|| Error::InvalidInput(format!("family {} needs --{name}", family.as_str())))
    };
    match (family, args.name.as_deref()) {
        (Family::Gram, Some("maxdet15")) => Ok(problems::maxdet_candidate_15()),
        (Family::Cyclic, Some("c23")) => Ok(problems::c23_instance()),
        (_, Some(other)) => Err(Error::InvalidInput(format!(
            "unknown named instance {other} for family {}",
            family.as_str()
        ))),
        (Family::Gram, None) => {
            let m = need(args.m, "m")?;
            problems::gen_gram(m, args.k.unwrap_or(m), args.seed)
        }
        (Family::Hadamard, None) => problems::gen_hadamard(need(args.m, "m")?),
        (Family::Cyclic, None) => problems::gen_cyclic(need(args.m, "m")?, args.seed),
        (Family::NmfDesigned, None) => {
            let m = need(args.m, "m")?;
            let k = need(args.k, "k")?;
            let f = args.f.unwrap_or(k as f64 / m as f64);
            problems::gen_nmf_designed(m, args.n.unwrap_or(m), k, f, args.seed)
        }
        (Family::Udisj, None) => problems::udisj(need(args.d, "d")?),
        (Family::Edm, None) => {
            let mut inst = problems::edm(need(args.m, "m")?)?;
            inst.params.k = args.k;
            Ok(inst)
        }
        (Family::Int2d, None) => Ok(problems::int2d(
            args.c.ok_or_else(|| Error::InvalidInput("family int2d needs --c".into()))?,
        )),
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<i32> {
    let inst = generate_instance(args)?;
    let path = problems::save_instance(&inst, &args.out)?;
    let rank = matcore::rank(&inst.c, DEFAULT_RANK_TOL)?;
    println!(
        "{}: C is {}x{}, rank {}, seed {}; manifest {}",
        inst.family.as_str(),
        inst.c.nrows(),
        inst.c.ncols(),
        rank,
        inst.params.seed.map_or("-".into(), |s| s.to_string()),
        path.display()
    );
    Ok(EXIT_OK)
}

fn exit_code_of(err: &Error) -> i32 {
    match err {
        Error::ProjectionFailed { .. } | Error::SingularPencil { .. } | Error::NotPsd { .. } => EXIT_FAILED,
        _ => EXIT_INVALID,
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Flowfield(a) => cmd_flowfield(a),
        Command::Verify(a) => cmd_verify(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code_of(&e)
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            }
        }
    }
}
