use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qcpair::cli::{
    audit_trace, cost_samples, fit_exponent, generate, parse_point_rows, random_trace, run, translate_signed, CliError,
    ExperimentConfig, GenKind, GenSpec, InstanceData, InstanceFile, RunRecord, SolverKind, Trace,
};
use qcpair::histructs::Variant;
use qcpair::reductions::parse_dimacs;
use qcpair::solvers::{CostProfile, CpInstance, Mode, NnCost};

#[derive(Parser)]
#[command(name = "qcpair", version, about = "Closest-pair experiments with oracle cross-checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a seeded instance file.
    Gen(GenArgs),
    /// Run a solver and emit one JSON record per trial.
    Run(RunArgs),
    /// Fit log(cost) against log(n) over run records.
    Fit(FitArgs),
    /// Replay an insert/delete trace with a full audit after every operation.
    Audit(AuditArgs),
}

#[derive(Args, Clone)]
struct GenParams {
    #[arg(long, value_enum, default_value = "cp-uniform")]
    kind: GenKind,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 16)]
    m: u32,
    /// Planted squared distance.
    #[arg(long = "plant-sq", default_value_t = 25)]
    plant_sq: u128,
    #[arg(long, default_value_t = 1)]
    pairs: usize,
    #[arg(long, default_value = "1/2")]
    xi: String,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 20)]
    clauses: usize,
    #[arg(long, default_value_t = 3)]
    width: usize,
    #[arg(long, default_value_t = 100)]
    range: i64,
}

impl GenParams {
    fn spec(&self) -> GenSpec {
        GenSpec {
            kind: self.kind,
            n: self.n,
            d: self.d,
            m: self.m,
            eps_sq: self.plant_sq,
            pairs: self.pairs,
            xi: self.xi.clone(),
            density: self.density,
            clauses: self.clauses,
            width: self.width,
            range: self.range,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    params: GenParams,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    solver: SolverKind,
    #[arg(long, value_enum, default_value = "real")]
    mode: Mode,
    /// Instance file from `gen`; otherwise each trial generates its own.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// DIMACS CNF for the `sat-ov` solver.
    #[arg(long)]
    dimacs: Option<PathBuf>,
    /// Signed integer point rows for the `cp` solvers, translated to be nonnegative.
    #[arg(long)]
    points: Option<PathBuf>,
    #[command(flatten)]
    params: GenParams,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Threshold as an integer or ratio `p/q`.
    #[arg(long = "eps-sq")]
    eps_sq: Option<String>,
    /// Sizes for cost mode, comma separated.
    #[arg(long, value_delimiter = ',')]
    ns: Vec<u64>,
    #[arg(long, value_enum, default_value = "leading")]
    profile: CostProfile,
    #[arg(long, value_enum, default_value = "paper")]
    nn: NnCost,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-trial CSV summary.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// JSON-lines files written by `run`.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    /// Trace file; otherwise a random trace is generated.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "augmented")]
    variant: VariantArg,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 6)]
    m: u32,
    #[arg(long = "eps-sq", default_value_t = 9)]
    eps_sq: u128,
    #[arg(long, default_value = "1/2")]
    xi: String,
    #[arg(long, default_value_t = 500)]
    ops: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the replayed trace here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum VariantArg {
    Basic,
    Augmented,
    Bichromatic,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Basic => Variant::Basic,
            VariantArg::Augmented => Variant::Augmented,
            VariantArg::Bichromatic => Variant::Bichromatic,
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn csv_summary(recs: &[RunRecord]) -> String {
    let mut s = String::from("trial,n,status,answer_i,answer_j,dist_sq,oracle_dist_sq,agreement,queries,failure_events,total_cost\n");
    for r in recs {
        let (i, j) = r.report.answer.map_or((String::new(), String::new()), |(i, j)| (i.to_string(), j.to_string()));
        let opt = |x: Option<u128>| x.map_or(String::new(), |v| v.to_string());
        s += &format!(
            "{},{},{:?},{},{},{},{},{},{},{},{}\n",
            r.trial,
            r.n,
            r.report.status,
            i,
            j,
            opt(r.report.dist_sq),
            opt(r.oracle_dist_sq),
            r.agreement.map_or(String::new(), |a| a.to_string()),
            r.report.queries,
            r.report.failure_events,
            r.report.cost.map_or(String::new(), |c| c.total.to_string()),
        );
    }
    s
}

fn cmd_run(a: RunArgs) -> Result<bool, CliError> {
    let mut cfg = ExperimentConfig::new(a.solver, a.mode);
    cfg.seed = a.seed;
    cfg.trials = a.trials;
    cfg.eps_sq = a.eps_sq;
    cfg.gen = a.params.spec();
    if !a.ns.is_empty() {
        cfg.ns = a.ns;
    }
    cfg.profile = a.profile;
    cfg.nn = a.nn;
    cfg.workers = a.workers;
    let fixed = if let Some(p) = &a.instance {
        Some(InstanceFile::from_text(&fs::read_to_string(p)?)?.instance)
    } else if let Some(p) = &a.dimacs {
        Some(InstanceData::Cnf(parse_dimacs(&fs::read_to_string(p)?)?))
    } else if let Some(p) = &a.points {
        let (coords, bits) = translate_signed(&parse_point_rows(&fs::read_to_string(p)?)?)?;
        Some(InstanceData::Cp(CpInstance::from_coords(coords, bits)?))
    } else {
        None
    };
    let recs = run(&cfg, fixed.as_ref())?;
    let mut text = String::new();
    for r in &recs {
        text += &serde_json::to_string(r)?;
        text.push('\n');
    }
    emit(&a.out, &text)?;
    if let Some(p) = &a.csv {
        fs::write(p, csv_summary(&recs))?;
    }
    let bad = recs.iter().filter(|r| r.agreement == Some(false)).count();
    if bad > 0 {
        eprintln!("{bad} of {} trials disagree with the oracle", recs.len());
    }
    Ok(bad == 0)
}

fn cmd_fit(a: FitArgs) -> Result<bool, CliError> {
    let mut samples = Vec::new();
    for f in &a.files {
        samples.extend(cost_samples(&fs::read_to_string(f)?)?);
    }
    let fit = fit_exponent(&samples)?;
    println!("{}", serde_json::to_string(&fit)?);
    Ok(true)
}

fn cmd_audit(a: AuditArgs) -> Result<bool, CliError> {
    let trace: Trace = match &a.trace {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut t = random_trace(&mut rng, a.variant.into(), a.n, a.d, a.m, a.eps_sq, a.ops);
            t.xi = a.xi.clone();
            t
        }
    };
    if let Some(p) = &a.out {
        fs::write(p, serde_json::to_string_pretty(&trace)? + "\n")?;
    }
    let sum = audit_trace(&trace)?;
    println!("{}", serde_json::to_string(&sum)?);
    Ok(sum.ok())
}

fn main() -> ExitCode {
    let res = match Cli::parse().cmd {
        Cmd::Gen(a) => generate(&a.params.spec(), a.seed).and_then(|f| f.to_text()).and_then(|t| emit(&a.out, &t)).map(|_| true),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Fit(a) => cmd_fit(a),
        Cmd::Audit(a) => cmd_audit(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
