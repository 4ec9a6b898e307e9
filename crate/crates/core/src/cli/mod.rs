//! Experiment harness behind the `qcpair` binary: instance files, solver
//! runs cross-checked against the oracles, exponent fits and trace audits.

mod audit;
mod fit;
pub mod gen;

use std::thread;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{parse_ratio, EpsSq};
use crate::histructs::splitmix64;
use crate::oracles::{self, OracleError, MAX_PAIRWISE_POINTS};
use crate::reductions::{random_cnf, sat_to_ov, CnfFormula, ReductionError};
use crate::solvers::{
    self, BaselineInput, BcpInstance, CostProfile, CostSummary, CpInstance, InstanceError, Mode, NnCost, OvInstance,
    SolveReport, SolverError, Status,
};

pub use audit::{audit_trace, random_trace, AuditSummary, OpKind, Trace, TraceOp};
pub use fit::{fit_exponent, ExponentFit};

pub const INSTANCE_FORMAT: &str = "qcpair-instance";
pub const INSTANCE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    CpUniform,
    CpPlanted,
    BcpUniform,
    BcpPlanted,
    Ov,
    Cnf,
    Ed,
}

/// Generator parameters; unused fields are ignored by a kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub d: usize,
    pub m: u32,
    pub eps_sq: u128,
    pub pairs: usize,
    pub xi: String,
    pub density: f64,
    pub clauses: usize,
    pub width: usize,
    pub range: i64,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            kind: GenKind::CpUniform,
            n: 64,
            d: 2,
            m: 16,
            eps_sq: 25,
            pairs: 1,
            xi: "1/2".into(),
            density: 0.5,
            clauses: 20,
            width: 3,
            range: 100,
        }
    }
}

impl GenSpec {
    pub fn xi(&self) -> Result<Ratio<u64>, CliError> {
        parse_ratio(&self.xi).ok_or_else(|| CliError::Params(format!("bad ξ {:?}", self.xi)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum InstanceData {
    Cp(CpInstance),
    Bcp(BcpInstance),
    Ov(OvInstance),
    Cnf(CnfFormula),
    Ed(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub generator: GenSpec,
    pub instance: InstanceData,
}

impl InstanceFile {
    pub fn to_text(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Parses and re-validates the embedded instance.
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let f: Self = serde_json::from_str(text)?;
        if f.format != INSTANCE_FORMAT || f.version != INSTANCE_VERSION {
            return Err(CliError::Params(format!("unsupported instance file {} v{}", f.format, f.version)));
        }
        let instance = match f.instance {
            InstanceData::Cp(c) => InstanceData::Cp(c.validated()?),
            InstanceData::Bcp(b) => InstanceData::Bcp(b.validated()?),
            InstanceData::Ov(o) => InstanceData::Ov(o.validated()?),
            InstanceData::Cnf(c) => InstanceData::Cnf(CnfFormula::new(c.num_vars(), c.clauses().to_vec())?),
            e @ InstanceData::Ed(_) => e,
        };
        Ok(Self { instance, ..f })
    }
}

/// Deterministic instance for `(spec, seed)`.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<InstanceFile, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = spec;
    let instance = match s.kind {
        GenKind::CpUniform => InstanceData::Cp(gen::cp_uniform(&mut rng, s.n, s.d, s.m)?),
        GenKind::CpPlanted => InstanceData::Cp(gen::cp_planted(&mut rng, s.n, s.d, s.m, s.eps_sq, s.pairs)?),
        GenKind::BcpUniform => InstanceData::Bcp(gen::bcp_uniform(&mut rng, s.n, s.d, s.m, s.xi()?)?),
        GenKind::BcpPlanted => InstanceData::Bcp(gen::bcp_planted(&mut rng, s.n, s.d, s.m, s.xi()?, s.eps_sq)?),
        GenKind::Ov => InstanceData::Ov(gen::ov_random(&mut rng, s.n, s.d, s.density)?),
        GenKind::Cnf => InstanceData::Cnf(random_cnf(&mut rng, s.n, s.clauses, s.width)),
        GenKind::Ed => InstanceData::Ed(gen::ed_values(&mut rng, s.n, s.range)),
    };
    Ok(InstanceFile {
        format: INSTANCE_FORMAT.into(),
        version: INSTANCE_VERSION,
        seed,
        generator: spec.clone(),
        instance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Cp,
    CpEps,
    CpMulti,
    BcpApprox,
    BcpApproxEps,
    BcpExact,
    Ov,
    Baseline,
    Ed,
    SatOv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub solver: SolverKind,
    pub mode: Mode,
    pub seed: u64,
    pub trials: usize,
    /// Decision threshold for the `*-eps` and multi-pair solvers.
    pub eps_sq: Option<String>,
    /// Instance generator used when no instance file is given.
    pub gen: GenSpec,
    /// Cost mode evaluates each of these sizes.
    pub ns: Vec<u64>,
    pub profile: CostProfile,
    pub nn: NnCost,
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(solver: SolverKind, mode: Mode) -> Self {
        Self {
            solver,
            mode,
            seed: 0,
            trials: 1,
            eps_sq: None,
            gen: GenSpec::default(),
            ns: (10..=20).map(|e| 1u64 << e).collect(),
            profile: CostProfile::Leading,
            nn: NnCost::Paper,
            workers: 0,
        }
    }

    pub fn eps(&self) -> Result<Option<EpsSq>, CliError> {
        let Some(s) = &self.eps_sq else { return Ok(None) };
        let r = parse_ratio(s).ok_or_else(|| CliError::Params(format!("bad ε² {s:?}")))?;
        Ok(Some(EpsSq::new(*r.numer() as u128, *r.denom() as u128).map_err(|e| CliError::Params(e.to_string()))?))
    }
}

/// One line of a run's output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub trial: usize,
    pub n: u64,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub report: SolveReport,
    /// `None` when the instance exceeds the oracle caps or the run failed.
    pub agreement: Option<bool>,
    pub oracle_dist_sq: Option<u128>,
}

fn trial_seed(seed: u64, trial: usize, salt: u64) -> u64 {
    splitmix64(splitmix64(seed ^ salt).wrapping_add(trial as u64))
}

fn instance_size(inst: &InstanceData) -> usize {
    match inst {
        InstanceData::Cp(c) => c.n(),
        InstanceData::Bcp(b) => b.n(),
        InstanceData::Ov(o) => o.a().len().max(o.b().len()),
        InstanceData::Cnf(c) => c.num_vars(),
        InstanceData::Ed(v) => v.len(),
    }
}

fn wrong_kind(solver: SolverKind) -> CliError {
    CliError::Params(format!("solver {solver:?} does not accept this instance kind"))
}

/// Answer of a solver plus the oracle's verdict.
fn run_real(cfg: &ExperimentConfig, inst: &InstanceData, rng: &mut ChaCha8Rng) -> Result<(SolveReport, Option<bool>, Option<u128>), CliError> {
    let eps = cfg.eps()?;
    let need_eps = || eps.ok_or_else(|| CliError::Params("this solver needs --eps-sq".into()));
    let small = instance_size(inst) <= MAX_PAIRWISE_POINTS;
    Ok(match (cfg.solver, inst) {
        (SolverKind::Cp, InstanceData::Cp(c)) => {
            let rep = solvers::cp_solve(c, rng)?;
            let o = small.then(|| oracles::brute_cp(c.points())).transpose()?.map(|o| o.dist.0);
            let ok = o.map(|d| rep.dist_sq == Some(d) && rep.within_call_bound());
            (rep, ok, o)
        }
        (SolverKind::CpEps, InstanceData::Cp(c)) => {
            let e = need_eps()?;
            let dec = solvers::cp_eps_decide(c, e, rng)?;
            let mut rep = SolveReport::new("cp_eps_decide");
            if let (Some(p), d) = (dec.pair, dec.dist_sq) {
                rep = SolveReport { status: Status::Solved, answer: Some(p), dist_sq: d, ..rep };
            }
            rep.queries = dec.stats.updates + dec.stats.checks;
            rep.failure_events = dec.stats.failure_events;
            rep.retries = dec.stats.retries;
            let ok = small.then(|| oracles::exists_close_pair(c.points(), e) == dec.pair.is_some());
            (rep, ok, None)
        }
        (SolverKind::CpMulti, InstanceData::Cp(c)) => {
            let e = need_eps()?;
            let out = solvers::cp_multi_to_unique(c, e, rng)?;
            let mut rep = SolveReport::new("cp_multi_to_unique");
            if let Some(p) = out.pair {
                rep = SolveReport { status: Status::Solved, answer: Some(p), dist_sq: out.dist_sq, ..rep };
            }
            rep.notes.extend(out.rounds.iter().map(|r| format!("round |T|={} q={} next={}", r.size, r.q, r.next_size)));
            rep.failure_events = out.stats.failure_events;
            let shrink_ok = out.rounds.iter().all(|r| r.next_size == r.size || 10 * r.next_size <= 9 * r.size);
            let ok = small.then(|| shrink_ok && oracles::exists_close_pair(c.points(), e) == out.pair.is_some());
            (rep, ok, None)
        }
        (SolverKind::BcpApprox, InstanceData::Bcp(b)) => {
            let rep = solvers::bcp_approx_solve(b, rng)?;
            let o = small.then(|| oracles::brute_bcp(b.a(), b.b())).transpose()?.map(|o| o.dist.0);
            let ok = o.map(|opt| {
                let within = match (opt, rep.dist_sq) {
                    (0, Some(d)) => d == 0,
                    (opt, Some(d)) => EpsSq::for_integer_threshold(opt).admits_relaxed(crate::geometry::SqDistance(d), b.xi()),
                    _ => false,
                };
                within && rep.within_call_bound()
            });
            (rep, ok, o)
        }
        (SolverKind::BcpApproxEps, InstanceData::Bcp(b)) => {
            let e = need_eps()?;
            let dec = solvers::bcp_approx_decide(b, e, rng)?;
            let mut rep = SolveReport::new("bcp_approx_decide");
            if let Some(p) = dec.pair {
                rep = SolveReport { status: Status::Solved, answer: Some(p), dist_sq: dec.dist_sq, ..rep };
            }
            rep.failure_events = dec.stats.failure_events;
            let ok = small.then(|| {
                let near = oracles::exists_close_cross_pair(b.a(), b.b(), e);
                let far = !b.a().iter().any(|p| {
                    b.b().iter().any(|q| e.admits_relaxed(crate::geometry::dist_sq(p, q).unwrap(), b.xi()))
                });
                (!near || dec.pair.is_some()) && (!far || dec.pair.is_none())
            });
            (rep, ok, None)
        }
        (SolverKind::BcpExact, InstanceData::Bcp(b)) => {
            let rep = solvers::bcp_exact_solve(b, rng)?;
            let o = small.then(|| oracles::brute_bcp(b.a(), b.b())).transpose()?.map(|o| o.dist.0);
            let ok = o.map(|d| rep.dist_sq == Some(d));
            (rep, ok, o)
        }
        (SolverKind::Ov, InstanceData::Ov(o)) => {
            let rep = solvers::ov_solve(o, rng)?;
            let want = oracles::brute_ov(o.a(), o.b())?;
            let ok = match rep.answer {
                Some((i, j)) => want.is_some() && o.a()[i].iter().zip(&o.b()[j]).all(|(x, y)| x * y == 0),
                None => want.is_none(),
            };
            (rep, Some(ok), None)
        }
        (SolverKind::Baseline, InstanceData::Cp(c)) => {
            let rep = solvers::baseline_minfind_solve(BaselineInput::Cp(c), rng)?;
            let o = small.then(|| oracles::brute_cp(c.points())).transpose()?.map(|o| o.dist.0);
            (rep.clone(), o.map(|d| rep.dist_sq == Some(d)), o)
        }
        (SolverKind::Baseline, InstanceData::Bcp(b)) => {
            let rep = solvers::baseline_minfind_solve(BaselineInput::Bcp(b), rng)?;
            let o = small.then(|| oracles::brute_bcp(b.a(), b.b())).transpose()?.map(|o| o.dist.0);
            (rep.clone(), o.map(|d| rep.dist_sq == Some(d)), o)
        }
        (SolverKind::Ed, InstanceData::Ed(v)) => {
            let c = solvers::ed_to_cp(v)?;
            let mut rep = solvers::cp_solve(&c, rng)?;
            rep.solver = "ed_to_cp+cp_solve".into();
            let collide = rep.dist_sq == Some(0);
            rep.notes.push(format!("collision: {collide}"));
            (rep, Some(collide == !oracles::distinct(v)), None)
        }
        (SolverKind::SatOv, InstanceData::Cnf(phi)) => {
            let (fa, fb) = sat_to_ov(phi);
            let ov = OvInstance::from_oracles(&fa, &fb)?;
            let mut rep = solvers::ov_solve(&ov, rng)?;
            rep.solver = "sat_to_ov+ov_solve".into();
            let sat = (phi.num_vars() <= oracles::MAX_SAT_VARS).then(|| oracles::brute_sat(phi)).transpose()?;
            (rep.clone(), sat.map(|s| s.is_some() == rep.answer.is_some()), None)
        }
        (s, _) => return Err(wrong_kind(s)),
    })
}

fn cost_report(cfg: &ExperimentConfig, n: u64) -> Result<SolveReport, CliError> {
    let d = cfg.gen.d;
    let p = cfg.profile;
    let name = format!("{:?}", cfg.solver);
    let summary = match cfg.solver {
        SolverKind::Cp | SolverKind::CpEps | SolverKind::CpMulti | SolverKind::Ed => {
            CostSummary::from_ledger(&solvers::cp_eps_cost::<f64>(n, d, p)?)
        }
        SolverKind::BcpApprox | SolverKind::BcpApproxEps => {
            CostSummary::from_ledger(&solvers::bcp_approx_cost::<f64>(n, d, cfg.gen.xi()?, p)?)
        }
        SolverKind::BcpExact => CostSummary::total_only(solvers::bcp_exact_cost::<f64>(n, d, cfg.nn, p)),
        SolverKind::Ov | SolverKind::SatOv => CostSummary::total_only(solvers::ov_presence_cost::<f64>(n, d, p)),
        SolverKind::Baseline => CostSummary::total_only(solvers::baseline_minfind_cost::<f64>(n, d, p)),
    };
    let mut rep = SolveReport::cost_only(&name, summary);
    rep.notes.push(format!("profile {:?}", p));
    Ok(rep)
}

/// Runs the configured trials, spread over worker threads, and returns the
/// records ordered by trial. A fixed instance is used for every trial when
/// given; otherwise each trial generates its own from the trial seed.
pub fn run(cfg: &ExperimentConfig, fixed: Option<&InstanceData>) -> Result<Vec<RunRecord>, CliError> {
    let version = env!("CARGO_PKG_VERSION").to_string();
    if cfg.mode == Mode::Cost {
        return cfg
            .ns
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                Ok(RunRecord {
                    trial: k,
                    n,
                    code_version: version.clone(),
                    config: cfg.clone(),
                    report: cost_report(cfg, n)?,
                    agreement: None,
                    oracle_dist_sq: None,
                })
            })
            .collect();
    }
    let workers = if cfg.workers == 0 { thread::available_parallelism().map_or(1, |w| w.get()) } else { cfg.workers };
    let workers = workers.clamp(1, cfg.trials.max(1));
    let one = |t: usize| -> Result<RunRecord, CliError> {
        let owned;
        let inst = match fixed {
            Some(i) => i,
            None => {
                owned = generate(&cfg.gen, trial_seed(cfg.seed, t, 0x6e6e))?.instance;
                &owned
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, t, 0x5eed));
        let (report, agreement, oracle_dist_sq) = match run_real(cfg, inst, &mut rng) {
            Ok(x) => x,
            Err(CliError::Solver(SolverError::RetryCapExhausted(k))) => {
                let mut rep = SolveReport::new(&format!("{:?}", cfg.solver));
                rep.status = Status::RetryCapExhausted;
                rep.retries = k as u64;
                (rep, None, None)
            }
            Err(e) => return Err(e),
        };
        Ok(RunRecord {
            trial: t,
            n: instance_size(inst) as u64,
            code_version: version.clone(),
            config: cfg.clone(),
            report,
            agreement,
            oracle_dist_sq,
        })
    };
    let mut slots: Vec<Option<Result<RunRecord, CliError>>> = (0..cfg.trials).map(|_| None).collect();
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let one = &one;
                s.spawn(move || (w..cfg.trials).step_by(workers).map(|t| (t, one(t))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            for (t, r) in h.join().expect("worker panicked") {
                slots[t] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every trial ran")).collect()
}

/// `(n, total cost)` pairs from JSON-lines records.
pub fn cost_samples(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let rec: RunRecord = serde_json::from_str(line)?;
        let total = rec
            .report
            .cost
            .map(|c| c.total)
            .unwrap_or(rec.report.queries as f64);
        out.push((rec.n as f64, total));
    }
    Ok(out)
}

/// Shifts signed rows into the nonnegative orthant by the per-axis minimum
/// and returns them with the number of coordinate bits they need.
pub fn translate_signed(rows: &[Vec<i64>]) -> Result<(Vec<Vec<u64>>, u32), CliError> {
    let d = rows.first().map_or(0, Vec::len);
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(CliError::Params("rows must be nonempty and of equal length".into()));
    }
    let min: Vec<i64> = (0..d).map(|k| rows.iter().map(|r| r[k]).min().unwrap()).collect();
    let out: Vec<Vec<u64>> =
        rows.iter().map(|r| r.iter().zip(&min).map(|(&x, &lo)| (x as i128 - lo as i128) as u64).collect()).collect();
    let top = out.iter().flatten().copied().max().unwrap_or(0);
    let bits = (64 - top.leading_zeros()).max(1);
    if bits > 32 {
        return Err(CliError::Params(format!("coordinate spread needs {bits} bits, more than 32")));
    }
    Ok((out, bits))
}

/// Whitespace or comma separated signed integer rows; `#` starts a comment.
pub fn parse_point_rows(text: &str) -> Result<Vec<Vec<i64>>, CliError> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(k, l)| {
            l.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<i64>().map_err(|e| CliError::Params(format!("row {k}: {e}"))))
                .collect()
        })
        .collect()
}
