use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubo::Qubo;

/// Simulated-annealing settings.
///
/// The defaults favour many short reads: on tour QUBOs the one-hot penalty
/// barriers freeze a chain into whichever permutation it reaches first, so
/// independent restarts buy far more than longer schedules. Inverse
/// temperatures are in units of the QUBO's largest absolute coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealParams {
    pub num_reads: usize,
    pub sweeps_per_read: usize,
    pub beta_initial: f64,
    pub beta_final: f64,
    pub rng_seed: u64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            num_reads: 2000,
            sweeps_per_read: 50,
            beta_initial: 0.1,
            beta_final: 10.0,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnealParamsError {
    #[error("num_reads and sweeps_per_read must be at least 1")]
    ZeroWork,
    #[error("beta schedule must satisfy 0 < beta_initial < beta_final, got {0} -> {1}")]
    BadSchedule(f64, f64),
}

impl AnnealParams {
    pub fn validate(&self) -> Result<(), AnnealParamsError> {
        if self.num_reads == 0 || self.sweeps_per_read == 0 {
            return Err(AnnealParamsError::ZeroWork);
        }
        if !(self.beta_initial > 0.0 && self.beta_final > self.beta_initial) {
            return Err(AnnealParamsError::BadSchedule(self.beta_initial, self.beta_final));
        }
        Ok(())
    }

    /// Inverse temperature for sweep `s` of a geometric schedule.
    pub fn beta_at(&self, s: usize) -> f64 {
        if self.sweeps_per_read == 1 {
            return self.beta_final;
        }
        let t = s as f64 / (self.sweeps_per_read - 1) as f64;
        self.beta_initial * (self.beta_final / self.beta_initial).powf(t)
    }
}

/// One distinct assignment returned by a sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub assignment: Vec<u8>,
    pub energy: f64,
    pub occurrences: usize,
}

/// Adjacency form of a QUBO used by the annealer.
struct Couplings {
    linear: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
    /// Largest absolute coefficient; temperatures are expressed relative to it.
    scale: f64,
}

impl Couplings {
    fn new(qubo: &Qubo) -> Couplings {
        let n = qubo.num_vars();
        let mut linear = vec![0.0; n];
        let mut neighbors = vec![Vec::new(); n];
        let mut scale: f64 = 0.0;
        for (&(i, j), &q) in qubo.coefficients() {
            scale = scale.max(q.abs());
            if i == j {
                linear[i] += q;
            } else {
                neighbors[i].push((j, q));
                neighbors[j].push((i, q));
            }
        }
        Couplings {
            linear,
            neighbors,
            scale: if scale > 0.0 { scale } else { 1.0 },
        }
    }
}

fn anneal_read(c: &Couplings, params: &AnnealParams, read: usize) -> Vec<u8> {
    let n = c.linear.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    rng.set_stream(read as u64);
    let mut x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
    // field[i] = linear[i] + Σ_j q_ij x_j; flipping i changes energy by (1 - 2 x_i) · field[i].
    let mut field = c.linear.clone();
    for i in 0..n {
        if x[i] == 1 {
            for &(j, q) in &c.neighbors[i] {
                field[j] += q;
            }
        }
    }
    for s in 0..params.sweeps_per_read {
        let beta = params.beta_at(s) / c.scale;
        for i in 0..n {
            let delta = if x[i] == 1 { -field[i] } else { field[i] };
            let accept = delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp();
            if accept {
                let step = if x[i] == 1 { -1.0 } else { 1.0 };
                x[i] ^= 1;
                for &(j, q) in &c.neighbors[i] {
                    field[j] += step * q;
                }
            }
        }
    }
    x
}

/// Single-flip Metropolis annealing over `params.num_reads` independent reads.
///
/// Temperatures are relative to the largest absolute coefficient, so the
/// schedule behaves the same whatever the units of the cost matrix. Reads
/// are seeded from `(rng_seed, read_index)` and may run in parallel; the
/// result is deduplicated and sorted by energy, then by assignment.
pub fn simulated_anneal(qubo: &Qubo, params: &AnnealParams) -> Result<Vec<Sample>, AnnealParamsError> {
    params.validate()?;
    if qubo.num_vars() == 0 {
        return Ok(vec![Sample {
            assignment: Vec::new(),
            energy: qubo.offset(),
            occurrences: params.num_reads,
        }]);
    }
    let couplings = Couplings::new(qubo);
    let reads: Vec<Vec<u8>> = (0..params.num_reads)
        .into_par_iter()
        .map(|r| anneal_read(&couplings, params, r))
        .collect();
    Ok(aggregate(qubo, reads))
}

/// Deduplicates raw reads, recomputing each energy exactly.
pub(crate) fn aggregate(qubo: &Qubo, reads: Vec<Vec<u8>>) -> Vec<Sample> {
    let mut counts: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for r in reads {
        *counts.entry(r).or_insert(0) += 1;
    }
    let mut samples: Vec<Sample> = counts
        .into_iter()
        .map(|(assignment, occurrences)| Sample {
            energy: qubo.energy(&assignment).expect("read length matches QUBO"),
            assignment,
            occurrences,
        })
        .collect();
    sort_samples(&mut samples);
    samples
}

pub(crate) fn sort_samples(samples: &mut [Sample]) {
    samples.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.assignment.cmp(&b.assignment)));
}
