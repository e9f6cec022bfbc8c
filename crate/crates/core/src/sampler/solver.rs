use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

use super::anneal::{simulated_anneal, sort_samples, AnnealParams, AnnealParamsError, Sample};
use super::brute::{next_permutation, BRUTE_FORCE_MAX_STOPS};
use crate::qubo::Qubo;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error(transparent)]
    Anneal(#[from] AnnealParamsError),
    #[error("sampler endpoint not configured")]
    NoEndpoint,
    #[error("sampler request failed: {0}")]
    Network(String),
    #[error("malformed sampler response: {0}")]
    Malformed(String),
    #[error("sample {index} reports energy {reported}, recomputed {computed}")]
    EnergyMismatch { index: usize, reported: f64, computed: f64 },
    #[error("QUBO with {0} variables is not a square tour encoding of at most {max} stops", max = BRUTE_FORCE_MAX_STOPS)]
    NotEnumerable(usize),
}

/// Anything that can return low-energy samples for a QUBO.
pub trait QuboSolver {
    fn name(&self) -> &str;
    fn sample(&self, qubo: &Qubo) -> Result<Vec<Sample>, SamplerError>;
}

/// Built-in simulated annealing.
#[derive(Debug, Clone, Default)]
pub struct AnnealSolver {
    pub params: AnnealParams,
}

impl AnnealSolver {
    pub fn new(params: AnnealParams) -> AnnealSolver {
        AnnealSolver { params }
    }
}

impl QuboSolver for AnnealSolver {
    fn name(&self) -> &str {
        "sa"
    }

    fn sample(&self, qubo: &Qubo) -> Result<Vec<Sample>, SamplerError> {
        Ok(simulated_anneal(qubo, &self.params)?)
    }
}

/// Exact solver for tour QUBOs: evaluates every permutation assignment of an
/// `N x N` encoding with slot 0 pinned to position 0 and returns the best.
#[derive(Debug, Clone, Copy, Default)]
pub struct PermutationSolver;

impl QuboSolver for PermutationSolver {
    fn name(&self) -> &str {
        "brute"
    }

    fn sample(&self, qubo: &Qubo) -> Result<Vec<Sample>, SamplerError> {
        let vars = qubo.num_vars();
        let n = (vars as f64).sqrt().round() as usize;
        if n < 2 || n * n != vars || n - 1 > BRUTE_FORCE_MAX_STOPS {
            return Err(SamplerError::NotEnumerable(vars));
        }
        let mut rest: Vec<usize> = (1..n).collect();
        let mut x = vec![0u8; vars];
        let mut best: Option<Sample> = None;
        loop {
            x.iter_mut().for_each(|b| *b = 0);
            x[0] = 1;
            for (k, &slot) in rest.iter().enumerate() {
                x[slot * n + k + 1] = 1;
            }
            let e = qubo.energy(&x).expect("length checked");
            if best.as_ref().map_or(true, |b| e < b.energy) {
                best = Some(Sample {
                    assignment: x.clone(),
                    energy: e,
                    occurrences: 1,
                });
            }
            if !next_permutation(&mut rest) {
                break;
            }
        }
        let mut out = vec![best.expect("at least one permutation")];
        sort_samples(&mut out);
        Ok(out)
    }
}

/// Tries `primary`, dropping to `secondary` when it errors.
pub struct FallbackSolver<P, S> {
    pub primary: P,
    pub secondary: S,
    fallbacks: AtomicUsize,
}

impl<P: QuboSolver, S: QuboSolver> FallbackSolver<P, S> {
    pub fn new(primary: P, secondary: S) -> Self {
        FallbackSolver {
            primary,
            secondary,
            fallbacks: AtomicUsize::new(0),
        }
    }

    /// Number of calls answered by the secondary solver.
    pub fn fallbacks(&self) -> usize {
        self.fallbacks.load(Ordering::Relaxed)
    }
}

impl<P: QuboSolver, S: QuboSolver> QuboSolver for FallbackSolver<P, S> {
    fn name(&self) -> &str {
        self.primary.name()
    }

    fn sample(&self, qubo: &Qubo) -> Result<Vec<Sample>, SamplerError> {
        match self.primary.sample(qubo) {
            Ok(s) => Ok(s),
            Err(_) => {
                self.fallbacks.fetch_add(1, Ordering::Relaxed);
                self.secondary.sample(qubo)
            }
        }
    }
}
