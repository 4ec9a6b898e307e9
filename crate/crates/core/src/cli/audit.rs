//! Replay of insert/delete traces with a full structure audit after every
//! operation.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::geometry::{are_eps_neighbors, box_id, parse_ratio, Color, EpsSq, GridParams, Point};
use crate::histructs::{HiError, HiStructure, StructureConfig, Variant};
use crate::oracles;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Insert,
    Delete,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceOp {
    pub op: OpKind,
    pub color: Color,
    pub index: usize,
    pub coords: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub variant: Variant,
    pub d: usize,
    pub coord_bits: u32,
    pub eps_sq: u128,
    /// Fine-grid parameter of the bichromatic variant.
    pub xi: String,
    pub universe: usize,
    pub seed: u64,
    pub ops: Vec<TraceOp>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub ops: usize,
    pub audits_passed: usize,
    /// Operations refused by the unique-solution promise, and deletes of
    /// points whose insert was refused.
    pub rejected: usize,
    pub flag_checks: usize,
    pub flag_mismatches: usize,
    pub failure_events: u64,
    pub first_error: Option<String>,
}

impl AuditSummary {
    pub fn ok(&self) -> bool {
        self.first_error.is_none() && self.flag_mismatches == 0 && self.audits_passed == self.ops
    }
}

/// Monochromatic: some pair within ε. Bichromatic: some cross pair in
/// ε-neighboring fine boxes.
fn brute_flag(variant: Variant, live: &BTreeMap<(Color, usize), Point>, grid: &GridParams) -> Result<bool, CliError> {
    let of = |c: Color| live.iter().filter(|(k, _)| k.0 == c).map(|(_, p)| p.clone()).collect::<Vec<_>>();
    if variant != Variant::Bichromatic {
        return Ok(oracles::exists_close_pair(&of(Color::A), grid.eps()));
    }
    let ids = |c: Color| of(c).iter().map(|p| box_id(p, grid)).collect::<Result<Vec<_>, _>>();
    let geo = |e: crate::geometry::GeometryError| CliError::Params(e.to_string());
    let (a, b) = (ids(Color::A).map_err(geo)?, ids(Color::B).map_err(geo)?);
    for g in &a {
        for h in &b {
            if are_eps_neighbors(g, h, grid).map_err(geo)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Applies every operation, auditing the structure and comparing its root
/// flag with brute force after each one.
pub fn audit_trace(trace: &Trace) -> Result<AuditSummary, CliError> {
    let eps = EpsSq::integer(trace.eps_sq).map_err(|e| CliError::Params(e.to_string()))?;
    let grid = match trace.variant {
        Variant::Bichromatic => {
            let xi = parse_ratio(&trace.xi).ok_or_else(|| CliError::Params(format!("bad ξ {:?}", trace.xi)))?;
            GridParams::for_xi(trace.d, eps, xi)
        }
        _ => GridParams::unit(trace.d, eps),
    }
    .map_err(|e| CliError::Params(e.to_string()))?;
    let cfg = StructureConfig::new(grid.clone(), trace.universe, trace.universe, trace.coord_bits, trace.seed);
    let mut s = HiStructure::new(trace.variant, cfg).map_err(|e| CliError::Params(e.to_string()))?;
    let mut live = BTreeMap::new();
    let mut refused = BTreeSet::new();
    let mut sum = AuditSummary::default();
    for (k, op) in trace.ops.iter().enumerate() {
        sum.ops += 1;
        let p = Point::new(op.index, op.coords.clone()).map_err(|e| CliError::Params(e.to_string()))?;
        if op.op == OpKind::Delete && refused.remove(&(op.color, op.index)) {
            sum.rejected += 1;
            sum.audits_passed += 1;
            continue;
        }
        let res = match op.op {
            OpKind::Insert => s.insert(op.color, op.index, &p),
            OpKind::Delete => s.delete(op.color, op.index, &p),
        };
        match res {
            Ok(()) => {
                match op.op {
                    OpKind::Insert => live.insert((op.color, op.index), p),
                    OpKind::Delete => live.remove(&(op.color, op.index)),
                };
            }
            Err(HiError::PromiseViolation(_)) => {
                sum.rejected += 1;
                refused.insert((op.color, op.index));
            }
            Err(e) => {
                sum.first_error.get_or_insert(format!("op {k}: {e}"));
                break;
            }
        }
        match s.audit() {
            Ok(()) => sum.audits_passed += 1,
            Err(e) => {
                sum.first_error.get_or_insert(format!("op {k}: {e}"));
                break;
            }
        }
        if let Some(flag) = s.has_close_pair() {
            sum.flag_checks += 1;
            if flag != brute_flag(trace.variant, &live, &grid)? {
                sum.flag_mismatches += 1;
            }
        }
    }
    sum.failure_events = s.failures().total();
    Ok(sum)
}

/// Random trace of `ops` operations over `universe` indices with
/// coordinates below `2^coord_bits`; deletes always target stored points.
pub fn random_trace<R: Rng>(
    rng: &mut R,
    variant: Variant,
    universe: usize,
    d: usize,
    coord_bits: u32,
    eps_sq: u128,
    ops: usize,
) -> Trace {
    let colors: &[Color] = if variant == Variant::Bichromatic { &[Color::A, Color::B] } else { &[Color::A] };
    let mut free: Vec<(Color, usize)> = colors.iter().flat_map(|&c| (0..universe).map(move |i| (c, i))).collect();
    let mut live: Vec<TraceOp> = Vec::new();
    let mut out = Vec::with_capacity(ops);
    for _ in 0..ops {
        let delete = !live.is_empty() && (free.is_empty() || rng.gen_bool(0.35));
        if delete {
            let mut o = live.swap_remove(rng.gen_range(0..live.len()));
            free.push((o.color, o.index));
            o.op = OpKind::Delete;
            out.push(o);
        } else if !free.is_empty() {
            let (color, index) = free.swap_remove(rng.gen_range(0..free.len()));
            let coords = (0..d).map(|_| rng.gen_range(0..1u64 << coord_bits)).collect();
            let o = TraceOp { op: OpKind::Insert, color, index, coords };
            live.push(o.clone());
            out.push(o);
        }
    }
    Trace { variant, d, coord_bits, eps_sq, xi: "1/2".into(), universe, seed: rng.gen(), ops: out }
}
