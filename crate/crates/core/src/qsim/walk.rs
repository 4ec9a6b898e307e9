//! Szegedy walk on the edge space of a regular chain and the phase-flip
//! plus walk-power search schedule.

use super::johnson::{Chain, MAX_EDGE_DIM};
use super::QsimError;
use crate::scalar::Real;

/// Applications of the setup, update and checking operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub setup: u64,
    pub update: u64,
    pub check: u64,
}

/// Amplitudes over the basis `|x⟩|y⟩`, `y` a neighbor of `x`. Edge
/// `x·deg + k` points to the `k`-th neighbor of `x`.
#[derive(Clone, Debug)]
pub struct WalkSystem<T> {
    deg: usize,
    target: Vec<u32>,
    reverse: Vec<u32>,
    marked: Vec<bool>,
    amp: Vec<T>,
    counts: OpCounts,
}

impl<T: Real> WalkSystem<T> {
    pub fn new<C: Chain>(chain: &C, marked: impl Fn(usize) -> bool) -> Result<Self, QsimError> {
        let (nv, deg) = (chain.num_vertices(), chain.degree());
        let dim = nv * deg;
        if dim > MAX_EDGE_DIM {
            return Err(QsimError::SizeBound { dim, max: MAX_EDGE_DIM });
        }
        let nbrs: Vec<Vec<usize>> = (0..nv).map(|v| chain.neighbors(v)).collect();
        let mut target = Vec::with_capacity(dim);
        for ns in &nbrs {
            target.extend(ns.iter().map(|&w| w as u32));
        }
        let reverse = (0..dim)
            .map(|e| {
                let (x, y) = (e / deg, target[e] as usize);
                let k = nbrs[y].iter().position(|&z| z == x).expect("symmetric chain");
                (y * deg + k) as u32
            })
            .collect();
        let marked = (0..nv).map(marked).collect();
        let mut ws = Self { deg, target, reverse, marked, amp: vec![T::zero(); dim], counts: OpCounts::default() };
        ws.reset();
        Ok(ws)
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &[T] {
        &self.amp
    }

    pub fn set_amplitudes(&mut self, amp: Vec<T>) {
        assert_eq!(amp.len(), self.dim());
        self.amp = amp;
    }

    pub fn counts(&self) -> OpCounts {
        self.counts
    }

    /// Fraction of marked vertices.
    pub fn marked_fraction(&self) -> f64 {
        self.marked.iter().filter(|&&m| m).count() as f64 / self.marked.len() as f64
    }

    /// Stationary edge state `Σ_x √π_x |x⟩|p_x⟩`, uniform for a regular chain.
    pub fn reset(&mut self) {
        let a = T::one() / T::count(self.dim()).sqrt();
        self.amp.iter_mut().for_each(|v| *v = a);
        self.counts.setup += 1;
    }

    /// `2Π_A − I`: reflection about `|x⟩|p_x⟩` inside each block.
    fn reflect_rows(&mut self) {
        let two = T::lit(2.0);
        let inv = T::one() / T::count(self.deg);
        for block in self.amp.chunks_mut(self.deg) {
            let mean = block.iter().fold(T::zero(), |a, &b| a + b) * inv;
            block.iter_mut().for_each(|v| *v = two * mean - *v);
        }
    }

    /// `|x⟩|y⟩ ↦ |y⟩|x⟩`.
    fn swap(&mut self) {
        let old = self.amp.clone();
        for (e, &r) in self.reverse.iter().enumerate() {
            self.amp[r as usize] = old[e];
        }
    }

    /// `W = (2Π_B − I)(2Π_A − I)` with `Π_B = S·Π_A·S`.
    pub fn step(&mut self) {
        self.reflect_rows();
        self.swap();
        self.reflect_rows();
        self.swap();
        self.counts.update += 1;
    }

    /// Negates the amplitude of every edge leaving a marked vertex.
    pub fn phase_flip(&mut self) {
        for (e, v) in self.amp.iter_mut().enumerate() {
            if self.marked[e / self.deg] {
                *v = -*v;
            }
        }
        self.counts.check += 1;
    }

    pub fn norm_sq(&self) -> T {
        self.amp.iter().fold(T::zero(), |a, &b| a + b * b)
    }

    /// Probability of measuring a marked first register.
    pub fn marked_mass(&self) -> T {
        self.amp
            .iter()
            .enumerate()
            .filter(|(e, _)| self.marked[e / self.deg])
            .fold(T::zero(), |a, (_, &b)| a + b * b)
    }

    /// Target vertex of edge `e`.
    pub fn edge_target(&self, e: usize) -> usize {
        self.target[e] as usize
    }

    pub fn degree(&self) -> usize {
        self.deg
    }
}

/// Walk steps per phase and number of phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MnrsSchedule {
    pub t_walk: u64,
    pub t_outer: u64,
}

impl MnrsSchedule {
    /// `t_walk = ⌈c_w/√δ⌉`, `t_outer = ⌈c_o/√ε⌉`.
    pub fn from_constants(c_w: f64, c_o: f64, eps: f64, delta: f64) -> Self {
        Self { t_walk: (c_w / delta.sqrt()).ceil().max(1.0) as u64, t_outer: (c_o / eps.sqrt()).ceil().max(1.0) as u64 }
    }

    pub fn length(&self) -> u64 {
        self.t_walk * self.t_outer
    }
}

/// Starts from the stationary state, runs `t_outer` rounds of a phase flip
/// followed by `t_walk` walk steps, and returns the final marked mass. Norm
/// is checked after every operator.
pub fn mnrs_run<T: Real>(ws: &mut WalkSystem<T>, t_walk: u64, t_outer: u64) -> T {
    ws.reset();
    let tol = T::epsilon() * T::count(16 * ws.dim());
    for _ in 0..t_outer {
        ws.phase_flip();
        debug_assert!((ws.norm_sq() - T::one()).abs() < tol);
        for _ in 0..t_walk {
            ws.step();
            debug_assert!((ws.norm_sq() - T::one()).abs() < tol);
        }
    }
    ws.marked_mass()
}
