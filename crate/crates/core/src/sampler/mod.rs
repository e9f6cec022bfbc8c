//! QUBO samplers and the route re-sequencing driver.

mod anneal;
mod brute;
mod remote;
mod resequence;
mod solver;

pub use anneal::{simulated_anneal, AnnealParams, AnnealParamsError, Sample};
pub use brute::{brute_force_tsp, TooManyStops, BRUTE_FORCE_MAX_STOPS};
pub use remote::{remote_sample, verify_samples, RemoteSampler, SampleResponse, ENERGY_TOLERANCE, SAMPLER_URL_ENV};
pub use resequence::{resequence_route, CachedTour, NoResequencing, QuboResequencer, Resequence, ResequenceCache, ResequenceStats};
pub use solver::{AnnealSolver, FallbackSolver, PermutationSolver, QuboSolver, SamplerError};
