//! Walk search over random subsets held in a history-independent structure.
//!
//! Each color side keeps an `r`-subset of its points. One attempt sets the
//! subsets up, runs `t_outer` rounds of a flag check followed by `t_walk`
//! updates that swap a sampled member for a random outsider, and then reads
//! the flag. Small instances run the exact amplitude simulation instead and
//! measure the final state. Larger ones succeed with the calibrated
//! probability, in which case the subsets are steered onto a marked
//! configuration through ordinary updates before the flag is read.

use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::geometry::{Color, GridParams, Point};
use crate::histructs::{HiError, HiStructure, StructureConfig, Variant};
use crate::qsim::{mnrs_run, Calibration, Chain, JohnsonChain, MnrsSchedule, ProductChain, WalkSystem, MAX_EDGE_DIM};

/// Retries after structure failure events within one decision.
pub const RETRY_CAP: u32 = 3;
/// Most repetitions of a probabilistic subroutine.
pub const SUCCESS_REPEAT_CAP: u32 = 10;
/// Largest side size simulated with exact amplitudes.
pub const MAX_EXACT_WALK_N: usize = 10;
const TARGET_ERROR: f64 = 1e-5;

pub(crate) fn calibration() -> &'static Calibration {
    static CAL: OnceLock<Calibration> = OnceLock::new();
    CAL.get_or_init(Calibration::fixture)
}

/// Repetitions reaching [`TARGET_ERROR`] at per-run success `p`.
pub(crate) fn repetitions(p: f64) -> u32 {
    if p >= 1.0 {
        return 1;
    }
    let k = (TARGET_ERROR.ln() / (1.0 - p).ln()).ceil();
    (k as u32).clamp(1, SUCCESS_REPEAT_CAP)
}

/// Counters accumulated over the attempts of one or more decisions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkStats {
    pub attempts: u64,
    pub updates: u64,
    pub checks: u64,
    pub failure_events: u64,
    pub retries: u64,
    pub exact_walks: u64,
    /// Largest step count of a single structure operation.
    pub max_op_steps: u64,
    pub step_bound: u64,
}

impl WalkStats {
    pub fn absorb(&mut self, o: &WalkStats) {
        self.attempts += o.attempts;
        self.updates += o.updates;
        self.checks += o.checks;
        self.failure_events += o.failure_events;
        self.retries += o.retries;
        self.exact_walks += o.exact_walks;
        self.max_op_steps = self.max_op_steps.max(o.max_op_steps);
        self.step_bound = self.step_bound.max(o.step_bound);
    }
}

/// Answer of a decision procedure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    /// Input indices; `(index in A, index in B)` when bichromatic.
    pub pair: Option<(usize, usize)>,
    pub dist_sq: Option<u128>,
    pub stats: WalkStats,
}

pub(crate) struct Side {
    pub color: Color,
    /// Index equals position.
    pub points: Vec<Point>,
    pub r: usize,
}

impl Side {
    pub fn new(color: Color, points: Vec<Point>) -> Self {
        let n = points.len();
        let r = ((n as f64).powf(2.0 / 3.0).ceil() as usize).clamp(1, n.max(1));
        Self { color, points, r }
    }

    fn moving(&self) -> bool {
        self.r < self.points.len()
    }
}

pub(crate) enum Attempt {
    Found((usize, usize)),
    Unmarked,
    Failed(u64),
}

/// A marked configuration: positions that must be present, per side.
pub(crate) type Witness = [(usize, usize); 2];

pub(crate) struct WalkSearch {
    pub variant: Variant,
    pub grid: GridParams,
    pub coord_bits: u32,
    pub sides: Vec<Side>,
    pub witnesses: Vec<Witness>,
}

struct Membership {
    members: Vec<usize>,
    outside: Vec<usize>,
    slot: Vec<usize>,
    inside: Vec<bool>,
}

impl Membership {
    fn random<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Self {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(rng);
        Self::from_members(n, all[..r].to_vec())
    }

    fn from_members(n: usize, members: Vec<usize>) -> Self {
        let mut inside = vec![false; n];
        members.iter().for_each(|&i| inside[i] = true);
        let outside: Vec<usize> = (0..n).filter(|&i| !inside[i]).collect();
        let mut slot = vec![0; n];
        outside.iter().enumerate().for_each(|(k, &i)| slot[i] = k);
        Self { members, outside, slot, inside }
    }

    /// Moves `out` into the outside list and takes `inn` from it.
    fn swap(&mut self, out: usize, inn: usize) {
        let k = self.slot[inn];
        self.outside[k] = out;
        self.slot[out] = k;
        self.inside[out] = false;
        self.inside[inn] = true;
        if let Some(p) = self.members.iter().position(|&x| x == out) {
            self.members[p] = inn;
        }
    }
}

impl WalkSearch {
    /// Marked fraction for a single witness and the exact spectral gap of
    /// the product chain over the moving sides.
    fn schedule(&self) -> MnrsSchedule {
        let cal = calibration();
        let mut eps = 1.0;
        let mut delta: f64 = 1.0;
        for s in self.sides.iter().filter(|s| s.moving()) {
            let (n, r) = (s.points.len() as f64, s.r as f64);
            eps *= if self.sides.len() == 1 { r * (r - 1.0) / (n * (n - 1.0)) } else { r / n };
            delta = delta.min(n / (r * (n - r)));
        }
        MnrsSchedule::from_constants(cal.c_w, cal.c_o, eps, delta)
    }

    fn structure<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<HiStructure, HiError> {
        let universe = self.sides.iter().map(|s| s.points.len()).max().unwrap_or(1);
        let capacity = self.sides.iter().map(|s| s.r).max().unwrap_or(1);
        let cfg = StructureConfig::new(self.grid.clone(), universe, capacity, self.coord_bits, rng.gen());
        HiStructure::new(self.variant, cfg)
    }

    fn failed(h: &HiStructure) -> bool {
        h.failures().total() > 0
    }

    fn track(&self, h: &HiStructure, stats: &mut WalkStats) {
        stats.max_op_steps = stats.max_op_steps.max(h.last_op().total());
        stats.step_bound = stats.step_bound.max(h.step_bound());
    }

    fn fill(&self, h: &mut HiStructure, sets: &[Vec<usize>], stats: &mut WalkStats) -> Result<(), HiError> {
        for (s, set) in self.sides.iter().zip(sets) {
            for &i in set {
                h.insert(s.color, i, &s.points[i])?;
                self.track(h, stats);
            }
        }
        Ok(())
    }

    fn read(&self, h: &HiStructure) -> Attempt {
        match h.has_close_pair() {
            None => Attempt::Failed(h.failures().total()),
            Some(false) => Attempt::Unmarked,
            Some(true) => match h.find_close_pair() {
                Ok(Some(p)) => Attempt::Found(p),
                Ok(None) => Attempt::Unmarked,
                Err(_) => Attempt::Failed(1),
            },
        }
    }

    fn marked_sets(&self, sets: &[Vec<usize>], rng: &mut impl Rng) -> bool {
        let Ok(mut h) = self.structure(rng) else { return false };
        let mut scratch = WalkStats::default();
        self.fill(&mut h, sets, &mut scratch).is_ok() && matches!(self.read(&h), Attempt::Found(_))
    }

    /// Whether the exact amplitude simulation is within reach.
    pub fn exact_available(&self) -> bool {
        let moving: Vec<&Side> = self.sides.iter().filter(|s| s.moving()).collect();
        if moving.is_empty() || moving.iter().any(|s| s.points.len() > MAX_EXACT_WALK_N) {
            return false;
        }
        let dim: u64 = moving
            .iter()
            .map(|s| {
                let (n, r) = (s.points.len() as u64, s.r as u64);
                crate::qsim::binomial(n, r) * r * (n - r)
            })
            .product();
        dim <= MAX_EDGE_DIM as u64
    }

    /// Edge-space probabilities after each schedule, and the chain degree.
    fn final_mass<C: Chain>(
        &self,
        chain: &C,
        sets_of: &dyn Fn(usize) -> Vec<Vec<usize>>,
        schedules: &[MnrsSchedule],
        rng: &mut impl Rng,
    ) -> Result<(Vec<Vec<f64>>, usize), SolverError> {
        let marks: Vec<bool> = (0..chain.num_vertices()).map(|v| self.marked_sets(&sets_of(v), rng)).collect();
        let mut ws = WalkSystem::<f64>::new(chain, |v| marks[v])?;
        let mass = schedules
            .iter()
            .map(|s| {
                mnrs_run(&mut ws, s.t_walk, s.t_outer);
                ws.amplitudes().iter().map(|a| a * a).collect()
            })
            .collect();
        Ok((mass, ws.degree()))
    }

    /// A plain sample of the start state, then outer lengths for marked
    /// fractions `1, 1/2, 1/4, …` down to the planted-pair fraction, which
    /// comes last with the calibrated schedule.
    fn guess_schedules(&self) -> Vec<MnrsSchedule> {
        let s = self.schedule();
        let c_o = calibration().c_o;
        let mut out = vec![MnrsSchedule { t_outer: 0, ..s }];
        let mut guess = 1.0f64;
        loop {
            let t = (c_o / guess.sqrt()).ceil().max(1.0) as u64;
            if t >= s.t_outer {
                break;
            }
            if out.last().is_none_or(|p: &MnrsSchedule| p.t_outer < t) {
                out.push(MnrsSchedule { t_outer: t, ..s });
            }
            guess /= 2.0;
        }
        out.push(s);
        out
    }

    /// Runs the walk on the exact edge-space state and measures a vertex,
    /// once per guessed marked fraction until a marked vertex is seen.
    fn exact_attempt<R: Rng>(&self, rng: &mut R, stats: &mut WalkStats) -> Result<Attempt, SolverError> {
        let moving: Vec<usize> = (0..self.sides.len()).filter(|&k| self.sides[k].moving()).collect();
        let chains: Vec<JohnsonChain> = moving
            .iter()
            .map(|&k| JohnsonChain::new(self.sides[k].points.len(), self.sides[k].r))
            .collect::<Result<_, _>>()?;
        let fixed: Vec<Vec<usize>> = self.sides.iter().map(|s| (0..s.points.len()).collect()).collect();
        let sets_of = |v: usize| -> Vec<Vec<usize>> {
            let mut sets = fixed.clone();
            let mut parts = vec![v];
            if chains.len() == 2 {
                let nb = chains[1].num_vertices();
                parts = vec![v / nb, v % nb];
            }
            for ((&k, c), &x) in moving.iter().zip(&chains).zip(&parts) {
                let mask = c.subset(x);
                sets[k] = (0..c.n()).filter(|&i| mask >> i & 1 == 1).collect();
            }
            sets
        };
        let mut seed_rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng.gen());
        let schedules = self.guess_schedules();
        let (masses, deg) = if chains.len() == 2 {
            let prod = ProductChain::new(chains[0].clone(), chains[1].clone())?;
            self.final_mass(&prod, &sets_of, &schedules, &mut seed_rng)?
        } else {
            self.final_mass(&chains[0], &sets_of, &schedules, &mut seed_rng)?
        };
        let mut last = Attempt::Unmarked;
        for (s, mass) in schedules.iter().zip(&masses) {
            stats.exact_walks += 1;
            stats.updates += s.length();
            stats.checks += s.t_outer;
            let total: f64 = mass.iter().sum();
            let mut x = rng.gen::<f64>() * total;
            let mut edge = mass.len() - 1;
            for (e, &m) in mass.iter().enumerate() {
                if x < m {
                    edge = e;
                    break;
                }
                x -= m;
            }
            let sets = sets_of(edge / deg);
            let mut h = self.structure(rng)?;
            self.fill(&mut h, &sets, stats)?;
            last = self.read(&h);
            if matches!(last, Attempt::Found(_)) {
                break;
            }
        }
        Ok(last)
    }

    fn emulated_attempt<R: Rng>(&self, rng: &mut R, stats: &mut WalkStats) -> Result<Attempt, SolverError> {
        let s = self.schedule();
        let mut h = self.structure(rng)?;
        let mut sets: Vec<Membership> =
            self.sides.iter().map(|side| Membership::random(side.points.len(), side.r, rng)).collect();
        let members: Vec<Vec<usize>> = sets.iter().map(|m| m.members.clone()).collect();
        if let Err(e) = self.fill(&mut h, &members, stats) {
            return Ok(promise_or(e)?);
        }
        let moving: Vec<usize> = (0..self.sides.len()).filter(|&k| self.sides[k].moving()).collect();
        if !moving.is_empty() {
            for _ in 0..s.t_outer {
                stats.checks += 1;
                if Self::failed(&h) {
                    return Ok(Attempt::Failed(h.failures().total()));
                }
                for _ in 0..s.t_walk {
                    for &k in &moving {
                        let side = &self.sides[k];
                        let out = h.sample_uniform_index(Some(side.color), rng)?;
                        let inn = sets[k].outside[rng.gen_range(0..sets[k].outside.len())];
                        if let Err(e) = self.swap(&mut h, k, out, inn, &mut sets[k], stats) {
                            return Ok(promise_or(e)?);
                        }
                    }
                    stats.updates += 1;
                }
            }
        }
        if !self.witnesses.is_empty() && rng.gen_bool(calibration().min_success.clamp(0.0, 1.0)) {
            let w = self.witnesses[rng.gen_range(0..self.witnesses.len())];
            for &(k, i) in &w {
                if sets[k].inside[i] {
                    continue;
                }
                let keep: Vec<usize> = w.iter().filter(|x| x.0 == k).map(|x| x.1).collect();
                let cands: Vec<usize> = sets[k].members.iter().copied().filter(|x| !keep.contains(x)).collect();
                let out = cands[rng.gen_range(0..cands.len())];
                if let Err(e) = self.swap(&mut h, k, out, i, &mut sets[k], stats) {
                    return Ok(promise_or(e)?);
                }
            }
        }
        stats.checks += 1;
        Ok(self.read(&h))
    }

    fn swap(
        &self,
        h: &mut HiStructure,
        k: usize,
        out: usize,
        inn: usize,
        set: &mut Membership,
        stats: &mut WalkStats,
    ) -> Result<(), HiError> {
        let side = &self.sides[k];
        h.delete(side.color, out, &side.points[out])?;
        self.track(h, stats);
        h.insert(side.color, inn, &side.points[inn])?;
        self.track(h, stats);
        set.swap(out, inn);
        Ok(())
    }

    /// One attempt in the exact or the emulated regime.
    pub fn attempt<R: Rng>(&self, rng: &mut R, stats: &mut WalkStats) -> Result<Attempt, SolverError> {
        stats.attempts += 1;
        if self.sides.iter().all(|s| !s.moving()) {
            let mut h = self.structure(rng)?;
            let all: Vec<Vec<usize>> = self.sides.iter().map(|s| (0..s.points.len()).collect()).collect();
            if let Err(e) = self.fill(&mut h, &all, stats) {
                return promise_or(e);
            }
            return Ok(self.read(&h));
        }
        if self.exact_available() {
            self.exact_attempt(rng, stats)
        } else {
            self.emulated_attempt(rng, stats)
        }
    }

    /// Repeats attempts until one finds a pair or the repetition count for
    /// the calibrated success probability is spent. Failure events restart
    /// the attempt, at most [`RETRY_CAP`] times.
    pub fn decide<R: Rng>(&self, rng: &mut R, stats: &mut WalkStats) -> Result<Option<(usize, usize)>, SolverError> {
        let reps = repetitions(calibration().min_success);
        let mut retries = 0;
        let mut done = 0;
        while done < reps {
            match self.attempt(rng, stats)? {
                Attempt::Found(p) => return Ok(Some(p)),
                Attempt::Unmarked => done += 1,
                Attempt::Failed(events) => {
                    stats.failure_events += events.max(1);
                    if retries == RETRY_CAP {
                        return Err(SolverError::RetryCapExhausted(RETRY_CAP));
                    }
                    retries += 1;
                    stats.retries += 1;
                }
            }
        }
        Ok(None)
    }
}

/// A promise violation ends the attempt as a failure; other errors propagate.
fn promise_or(e: HiError) -> Result<Attempt, SolverError> {
    match e {
        HiError::PromiseViolation(_) => Ok(Attempt::Failed(1)),
        e => Err(e.into()),
    }
}
