use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::anneal::{sort_samples, Sample};
use super::solver::{QuboSolver, SamplerError};
use crate::qubo::{Qubo, QuboWire};

/// Environment variable holding the remote sampler URL.
pub const SAMPLER_URL_ENV: &str = "HQTS_SAMPLER_URL";

/// Largest accepted gap between a reported and a recomputed energy.
pub const ENERGY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Serialize)]
struct Request<'a> {
    #[serde(flatten)]
    qubo: &'a QuboWire,
    num_reads: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SampleResponse {
    pub samples: Vec<Sample>,
}

/// Client for a sampler reachable by one JSON-over-HTTP endpoint.
#[derive(Debug, Clone)]
pub struct RemoteSampler {
    pub endpoint: Option<String>,
    pub num_reads: usize,
    pub timeout: Duration,
}

impl RemoteSampler {
    pub fn new(endpoint: impl Into<String>) -> RemoteSampler {
        RemoteSampler {
            endpoint: Some(endpoint.into()),
            num_reads: 32,
            timeout: Duration::from_secs(30),
        }
    }

    /// Endpoint taken from `HQTS_SAMPLER_URL`, if set.
    pub fn from_env() -> RemoteSampler {
        RemoteSampler {
            endpoint: std::env::var(SAMPLER_URL_ENV).ok().filter(|s| !s.is_empty()),
            num_reads: 32,
            timeout: Duration::from_secs(30),
        }
    }
}

impl QuboSolver for RemoteSampler {
    fn name(&self) -> &str {
        "remote"
    }

    fn sample(&self, qubo: &Qubo) -> Result<Vec<Sample>, SamplerError> {
        let endpoint = self.endpoint.as_deref().ok_or(SamplerError::NoEndpoint)?;
        remote_sample(qubo, endpoint, self.num_reads, self.timeout)
    }
}

/// POSTs `qubo` to `endpoint` and returns the verified, sorted samples.
pub fn remote_sample(qubo: &Qubo, endpoint: &str, num_reads: usize, timeout: Duration) -> Result<Vec<Sample>, SamplerError> {
    let wire = qubo.to_wire();
    let agent = ureq::AgentBuilder::new().timeout(timeout).build();
    let response = agent
        .post(endpoint)
        .send_json(Request { qubo: &wire, num_reads })
        .map_err(|e| SamplerError::Network(e.to_string()))?;
    let body: SampleResponse = response.into_json().map_err(|e| SamplerError::Malformed(e.to_string()))?;
    verify_samples(qubo, body.samples)
}

/// Checks shape and energy of every sample, then sorts them.
pub fn verify_samples(qubo: &Qubo, mut samples: Vec<Sample>) -> Result<Vec<Sample>, SamplerError> {
    if samples.is_empty() {
        return Err(SamplerError::Malformed("no samples".into()));
    }
    for (index, s) in samples.iter().enumerate() {
        if s.assignment.iter().any(|&b| b > 1) {
            return Err(SamplerError::Malformed(format!("sample {index} is not binary")));
        }
        let computed = qubo
            .energy(&s.assignment)
            .map_err(|e| SamplerError::Malformed(format!("sample {index}: {e}")))?;
        if !((computed - s.energy).abs() <= ENERGY_TOLERANCE) {
            return Err(SamplerError::EnergyMismatch {
                index,
                reported: s.energy,
                computed,
            });
        }
    }
    sort_samples(&mut samples);
    Ok(samples)
}
