//! Amplitude amplification in the two-dimensional invariant subspace.

use rand::Rng;

use super::QsimError;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroverRun<T> {
    pub n: u64,
    pub m: u64,
    pub k: u64,
    pub success_prob: T,
    pub query_count: u64,
}

/// `sin²((2k+1)θ)` with `sin θ = √(M/N)`; zero when nothing is marked.
pub fn grover_simulate<T: Real>(n: u64, m: u64, k: u64) -> Result<GroverRun<T>, QsimError> {
    if n == 0 {
        return Err(QsimError::EmptySpace);
    }
    if m > n {
        return Err(QsimError::TooManyMarked { marked: m, size: n });
    }
    let success_prob = if m == 0 {
        T::zero()
    } else {
        let theta = (T::count(m as usize) / T::count(n as usize)).sqrt().asin();
        let s = (T::count(2 * k as usize + 1) * theta).sin();
        s * s
    };
    Ok(GroverRun { n, m, k, success_prob, query_count: k })
}

/// Same probability by iterating oracle and diffusion on the amplitudes
/// `(a, b)` of the normalized marked and unmarked superpositions.
pub fn grover_recursion<T: Real>(n: u64, m: u64, k: u64) -> T {
    if m == 0 {
        return T::zero();
    }
    let (nf, mf) = (T::count(n as usize), T::count(m as usize));
    let (mut a, mut b) = ((mf / nf).sqrt(), ((nf - mf) / nf).sqrt());
    // the uniform state is (sin θ, cos θ); diffusion reflects about it
    let (s, c) = (a, b);
    for _ in 0..k {
        a = -a;
        let dot = a * s + b * c;
        let two = T::lit(2.0);
        a = two * dot * s - a;
        b = two * dot * c - b;
    }
    a * a
}

/// `⌊(π/4)·√(N/M)⌋`.
pub fn optimal_iterations(n: u64, m: u64) -> u64 {
    let ratio = n as f64 / m.max(1) as f64;
    (std::f64::consts::FRAC_PI_4 * ratio.sqrt()).floor() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub found: Option<usize>,
    pub queries: u64,
}

/// Search with unknown `M`: for guesses `M̂ = N, N/2, …, 1` run
/// `⌊(π/4)√(N/M̂)⌋` iterations, measure, and verify the outcome with one more
/// query. Measurement outcomes are sampled from the closed form; a success
/// returns a uniformly random marked item.
pub fn grover_search_list<T, R: Rng + ?Sized>(
    items: &[T],
    predicate: impl Fn(&T) -> bool,
    rng: &mut R,
) -> SearchOutcome {
    let n = items.len() as u64;
    let marked: Vec<usize> = (0..items.len()).filter(|&i| predicate(&items[i])).collect();
    let m = marked.len() as u64;
    let mut queries = 0;
    if n == 0 {
        return SearchOutcome { found: None, queries };
    }
    let mut guess = n;
    loop {
        let k = optimal_iterations(n, guess);
        let p: f64 = grover_simulate::<f64>(n, m, k).expect("m ≤ n").success_prob;
        queries += k + 1;
        if m > 0 && rng.gen_bool(p.clamp(0.0, 1.0)) {
            return SearchOutcome { found: Some(marked[rng.gen_range(0..marked.len())]), queries };
        }
        if guess == 1 {
            return SearchOutcome { found: None, queries };
        }
        guess /= 2;
    }
}
