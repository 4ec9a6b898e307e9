//! Johnson-graph Markov chains and their tensor products.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_rational::Ratio;

use super::QsimError;

/// Largest edge-space dimension a walk is simulated on.
pub const MAX_EDGE_DIM: usize = 20_000;
/// Largest vertex count a chain is built with.
pub const MAX_VERTICES: usize = 20_000;

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as u64
}

/// A regular chain moving to a uniformly random neighbor.
pub trait Chain {
    fn num_vertices(&self) -> usize;
    fn degree(&self) -> usize;
    fn neighbors(&self, v: usize) -> Vec<usize>;
    /// Distinct transition eigenvalues, descending, with multiplicities.
    fn spectrum(&self) -> Vec<(Ratio<i64>, u64)>;

    /// `1 − λ₂` with `λ₂` the second largest eigenvalue.
    fn spectral_gap(&self) -> Ratio<i64> {
        let s = self.spectrum();
        Ratio::from_integer(1) - s.get(1).map_or(Ratio::from_integer(0), |e| e.0)
    }

    /// Sum of the exact transition probabilities out of `v`.
    fn row_sum(&self, v: usize) -> Ratio<u64> {
        let p = Ratio::new(1, self.degree() as u64);
        self.neighbors(v).iter().fold(Ratio::from_integer(0), |acc, _| acc + p)
    }

    fn transition_matrix(&self) -> DMatrix<f64> {
        let n = self.num_vertices();
        let p = 1.0 / self.degree() as f64;
        let mut m = DMatrix::zeros(n, n);
        for v in 0..n {
            for w in self.neighbors(v) {
                m[(v, w)] += p;
            }
        }
        m
    }
}

/// Walk on the `r`-subsets of `[n]` that swaps one element in for one out.
#[derive(Clone, Debug)]
pub struct JohnsonChain {
    n: usize,
    r: usize,
    subsets: Vec<u64>,
}

impl JohnsonChain {
    pub fn new(n: usize, r: usize) -> Result<Self, QsimError> {
        if r == 0 || r >= n || n > 63 {
            return Err(QsimError::BadJohnson { n, r });
        }
        let count = binomial(n as u64, r as u64) as usize;
        if count > MAX_VERTICES {
            return Err(QsimError::SizeBound { dim: count, max: MAX_VERTICES });
        }
        let mut subsets = Vec::with_capacity(count);
        let mut s: u64 = (1 << r) - 1;
        while s < 1 << n {
            subsets.push(s);
            // next subset of the same size
            let c = s & s.wrapping_neg();
            let t = s + c;
            s = (((t ^ s) >> 2) / c) | t;
        }
        Ok(Self { n, r, subsets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn subset(&self, v: usize) -> u64 {
        self.subsets[v]
    }

    pub fn index_of(&self, mask: u64) -> Option<usize> {
        self.subsets.binary_search(&mask).ok()
    }

    /// Adjacency eigenvalues `μ_j = (r−j)(n−r−j) − j`, `j = 0..=min(r, n−r)`.
    pub fn adjacency_eigenvalues(&self) -> Vec<(i64, u64)> {
        let (n, r) = (self.n as i64, self.r as i64);
        (0..=r.min(n - r))
            .map(|j| {
                let mult = binomial(n as u64, j as u64) - if j == 0 { 0 } else { binomial(n as u64, j as u64 - 1) };
                ((r - j) * (n - r - j) - j, mult)
            })
            .collect()
    }

    /// Fraction of vertices containing both elements of one fixed pair.
    pub fn planted_pair_fraction(&self) -> Ratio<u64> {
        Ratio::new(binomial(self.n as u64 - 2, self.r as u64 - 2), binomial(self.n as u64, self.r as u64))
    }

    /// Certifies the second eigenvalue exactly in integer arithmetic:
    /// `∏_j (A − μ_j I)` vanishes on the sampled columns (every column when
    /// the graph is small, otherwise a spread of columns; the graph is
    /// vertex-transitive so one column already decides it), the graph is
    /// connected, and `n·[0 ∈ S] − r` is an eigenvector for `μ_1`.
    pub fn verify_spectrum(&self) -> Result<(), String> {
        let nv = self.num_vertices();
        let nbrs: Vec<Vec<usize>> = (0..nv).map(|v| self.neighbors(v)).collect();
        let apply = |x: &[i128]| -> Vec<i128> { nbrs.iter().map(|ns| ns.iter().map(|&w| x[w]).sum()).collect() };
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &nbrs[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err("graph is disconnected".into());
        }
        let eig = self.adjacency_eigenvalues();
        let columns: Vec<usize> = if nv <= 256 { (0..nv).collect() } else { (0..nv).step_by(nv / 16).collect() };
        for c in columns {
            let mut x = vec![0i128; nv];
            x[c] = 1;
            for &(mu, _) in &eig {
                let ax = apply(&x);
                x = ax.iter().zip(&x).map(|(a, b)| a - mu as i128 * b).collect();
            }
            if x.iter().any(|&v| v != 0) {
                return Err(format!("minimal polynomial does not annihilate column {c}"));
            }
        }
        let (n, r) = (self.n as i128, self.r as i128);
        let f: Vec<i128> = self.subsets.iter().map(|&s| if s & 1 == 1 { n - r } else { -r }).collect();
        let mu1 = eig[1].0 as i128;
        if apply(&f).iter().zip(&f).any(|(a, b)| *a != mu1 * b) {
            return Err("first nontrivial eigenvector check failed".into());
        }
        Ok(())
    }
}

impl Chain for JohnsonChain {
    fn num_vertices(&self) -> usize {
        self.subsets.len()
    }

    fn degree(&self) -> usize {
        self.r * (self.n - self.r)
    }

    /// Ordered by the element removed, then the element added.
    fn neighbors(&self, v: usize) -> Vec<usize> {
        let s = self.subsets[v];
        let mut out = Vec::with_capacity(self.degree());
        for i in (0..self.n).filter(|&i| s >> i & 1 == 1) {
            for j in (0..self.n).filter(|&j| s >> j & 1 == 0) {
                out.push(self.index_of(s & !(1 << i) | 1 << j).expect("same size subset"));
            }
        }
        out
    }

    fn spectrum(&self) -> Vec<(Ratio<i64>, u64)> {
        let deg = self.degree() as i64;
        self.adjacency_eigenvalues().into_iter().map(|(mu, m)| (Ratio::new(mu, deg), m)).collect()
    }
}

/// Tensor product `M_A ⊗ M_B`: both coordinates move in each step.
#[derive(Clone, Debug)]
pub struct ProductChain {
    pub a: JohnsonChain,
    pub b: JohnsonChain,
}

impl ProductChain {
    pub fn new(a: JohnsonChain, b: JohnsonChain) -> Result<Self, QsimError> {
        let nv = a.num_vertices() * b.num_vertices();
        if nv > MAX_VERTICES {
            return Err(QsimError::SizeBound { dim: nv, max: MAX_VERTICES });
        }
        Ok(Self { a, b })
    }

    pub fn split(&self, v: usize) -> (usize, usize) {
        (v / self.b.num_vertices(), v % self.b.num_vertices())
    }
}

impl Chain for ProductChain {
    fn num_vertices(&self) -> usize {
        self.a.num_vertices() * self.b.num_vertices()
    }

    fn degree(&self) -> usize {
        self.a.degree() * self.b.degree()
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        let (x, y) = self.split(v);
        let nb = self.b.num_vertices();
        let ys = self.b.neighbors(y);
        self.a.neighbors(x).into_iter().flat_map(|xa| ys.iter().map(move |&yb| xa * nb + yb)).collect()
    }

    fn spectrum(&self) -> Vec<(Ratio<i64>, u64)> {
        let mut all: Vec<(Ratio<i64>, u64)> = Vec::new();
        for (la, ma) in self.a.spectrum() {
            for (lb, mb) in self.b.spectrum() {
                all.push((la * lb, ma * mb));
            }
        }
        all.sort_by(|x, y| y.0.cmp(&x.0));
        let mut merged: Vec<(Ratio<i64>, u64)> = Vec::new();
        for (l, m) in all {
            match merged.last_mut() {
                Some(last) if last.0 == l => last.1 += m,
                _ => merged.push((l, m)),
            }
        }
        merged
    }
}
