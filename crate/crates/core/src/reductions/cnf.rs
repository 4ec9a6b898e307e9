use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ReductionError;

/// CNF formula over variables `1..=n`; literal `v` or `-v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i64>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self, ReductionError> {
        for &lit in clauses.iter().flatten() {
            if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                return Err(ReductionError::BadLiteral { lit, vars: num_vars });
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Maximum clause width.
    pub fn width(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Adds an unused variable so that the count is even.
    pub fn padded_even(&self) -> Self {
        let mut out = self.clone();
        if out.num_vars % 2 == 1 {
            out.num_vars += 1;
        }
        out
    }
}

/// Random formula with `m` clauses of `k` distinct variables each.
pub fn random_cnf<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize, k: usize) -> CnfFormula {
    let k = k.min(n);
    let clauses = (0..m)
        .map(|_| {
            let mut vars: Vec<usize> = sample(rng, n, k).into_vec();
            vars.sort_unstable();
            vars.into_iter()
                .map(|v| {
                    let lit = v as i64 + 1;
                    if rng.gen() {
                        lit
                    } else {
                        -lit
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula { num_vars: n, clauses }
}

/// Reads DIMACS CNF text: `c` comments, a `p cnf <vars> <clauses>` header and
/// zero-terminated clauses that may span lines.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ReductionError> {
    let err = |line: usize, msg: &str| ReductionError::Dimacs { line, msg: msg.to_string() };
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut cur = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let no = no + 1;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            let f: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() {
                return Err(err(no, "duplicate header"));
            }
            if f.len() != 4 || f[1] != "cnf" {
                return Err(err(no, "expected `p cnf <vars> <clauses>`"));
            }
            let v = f[2].parse().map_err(|_| err(no, "bad variable count"))?;
            let c = f[3].parse().map_err(|_| err(no, "bad clause count"))?;
            header = Some((v, c));
            continue;
        }
        if header.is_none() {
            return Err(err(no, "clause before header"));
        }
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| err(no, "bad literal"))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else {
                cur.push(lit);
            }
        }
    }
    let (vars, count) = header.ok_or_else(|| err(0, "missing header"))?;
    if !cur.is_empty() {
        clauses.push(cur);
    }
    if clauses.len() != count {
        return Err(err(0, &format!("header declares {count} clauses, found {}", clauses.len())));
    }
    CnfFormula::new(vars, clauses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn dimacs_round_trip() {
        let text = "c example\np cnf 3 2\n1 -3 0\n2 3\n-1 0\n";
        let f = parse_dimacs(text).unwrap();
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.clauses(), &[vec![1, -3], vec![2, 3, -1]]);
        assert_eq!(f.width(), 3);
    }

    #[test]
    fn dimacs_errors() {
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 5 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 x 0\n").is_err());
    }

    #[test]
    fn random_formula_shape() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let f = random_cnf(&mut rng, 8, 20, 3);
        assert_eq!(f.num_clauses(), 20);
        for c in f.clauses() {
            assert_eq!(c.len(), 3);
            let mut v: Vec<u64> = c.iter().map(|l| l.unsigned_abs()).collect();
            v.dedup();
            assert_eq!(v.len(), 3);
        }
        assert_eq!(f.padded_even().num_vars(), 8);
        assert_eq!(random_cnf(&mut rng, 5, 1, 2).padded_even().num_vars(), 6);
    }
}
