//! QUBO encoding of route re-sequencing as a Hamiltonian cycle.
//!
//! A route with stops `s1..sk` becomes a cyclic tour over `N = k + 1` nodes
//! (the depot plus the stops). Binary variable `x[i][u]` says node slot `i`
//! is visited at tour position `u`; it lives at flat index `i * N + u`
//! (positions are 0-based here).
//!
//! The Hamiltonian is `H = H_A + H_B`:
//!
//! ```text
//! H_A = A Σ_i (1 - Σ_u x[i][u])²  +  A Σ_u (1 - Σ_i x[i][u])²
//! H_B = B Σ_{i≠j} c(i,j) Σ_u x[i][u] · x[j][u+1 mod N]
//! ```
//!
//! Expanding each square with `x² = x` gives a constant `A`, a linear `-A`
//! on each of its variables and `2A` on every pair, so `H_A` contributes the
//! offset `2AN`, `-2A` on every diagonal entry and `2A` between variables
//! sharing a row or column. The graph is complete, so the missing-edge
//! penalty term of the general Hamiltonian-cycle encoding is identically 0.
//! For any permutation assignment `H_A = 0` and the energy is exactly
//! `B · tour cost`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::CostMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuboError {
    #[error("a route QUBO needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("duplicate node {0} in route")]
    DuplicateNode(usize),
    #[error("penalty weight A must be positive, got {0}")]
    NonPositivePenalty(f64),
    #[error("assignment has {got} bits, QUBO has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
}

/// Upper-triangular QUBO: `E(x) = offset + Σ_{i≤j} q[i,j] x_i x_j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Qubo {
    num_vars: usize,
    coefficients: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl Qubo {
    pub fn new(num_vars: usize) -> Qubo {
        Qubo {
            num_vars,
            coefficients: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn add_offset(&mut self, v: f64) {
        self.offset += v;
    }

    /// Adds `v` to the coefficient of `x_i x_j` (order-insensitive).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.num_vars && j < self.num_vars, "variable out of range");
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.coefficients.entry(key).or_insert(0.0) += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.coefficients.get(&key).copied().unwrap_or(0.0)
    }

    /// Nonzero entries keyed `(i, j)` with `i <= j`.
    pub fn coefficients(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.coefficients
    }

    pub fn linear(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coefficients.iter().filter(|((i, j), _)| i == j).map(|(&(i, _), &v)| (i, v))
    }

    pub fn quadratic(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.coefficients.iter().filter(|((i, j), _)| i != j).map(|(&k, &v)| (k, v))
    }

    /// Energy of a 0/1 assignment.
    pub fn energy(&self, assignment: &[u8]) -> Result<f64, QuboError> {
        if assignment.len() != self.num_vars {
            return Err(QuboError::LengthMismatch {
                expected: self.num_vars,
                got: assignment.len(),
            });
        }
        let mut e = self.offset;
        for (&(i, j), &q) in &self.coefficients {
            if assignment[i] != 0 && assignment[j] != 0 {
                e += q;
            }
        }
        Ok(e)
    }

    /// Wire form used by remote samplers.
    pub fn to_wire(&self) -> QuboWire {
        QuboWire {
            num_vars: self.num_vars,
            linear: self.linear().map(|(i, v)| (i.to_string(), v)).collect(),
            quadratic: self.quadratic().map(|((i, j), v)| (format!("{i},{j}"), v)).collect(),
            offset: self.offset,
        }
    }

    pub fn from_wire(wire: &QuboWire) -> Result<Qubo, String> {
        let mut q = Qubo::new(wire.num_vars);
        q.offset = wire.offset;
        let check = |i: usize| {
            if i < wire.num_vars {
                Ok(i)
            } else {
                Err(format!("variable {i} out of range"))
            }
        };
        for (k, &v) in &wire.linear {
            let i = check(k.parse().map_err(|_| format!("bad linear key `{k}`"))?)?;
            q.add(i, i, v);
        }
        for (k, &v) in &wire.quadratic {
            let (a, b) = k.split_once(',').ok_or_else(|| format!("bad quadratic key `{k}`"))?;
            let i = check(a.trim().parse().map_err(|_| format!("bad quadratic key `{k}`"))?)?;
            let j = check(b.trim().parse().map_err(|_| format!("bad quadratic key `{k}`"))?)?;
            q.add(i, j, v);
        }
        Ok(q)
    }
}

/// Qubo energy with a length check; see [`Qubo::energy`].
pub fn qubo_energy(qubo: &Qubo, assignment: &[u8]) -> Result<f64, QuboError> {
    qubo.energy(assignment)
}

/// JSON document `{num_vars, linear: {"i": c}, quadratic: {"i,j": c}, offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboWire {
    pub num_vars: usize,
    pub linear: BTreeMap<String, f64>,
    pub quadratic: BTreeMap<String, f64>,
    pub offset: f64,
}

/// Variable layout of one route's tour QUBO.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteEncoding {
    /// Location ids, depot first.
    pub nodes: Vec<usize>,
    pub penalty_a: f64,
    pub penalty_b: f64,
}

impl RouteEncoding {
    /// Node count `N`.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Flat variable index of node slot `slot` at 0-based `position`.
    #[inline]
    pub fn var_index(&self, slot: usize, position: usize) -> usize {
        slot * self.nodes.len() + position
    }

    /// Assignment for a tour given as node slots in visit order.
    pub fn encode(&self, slots_in_order: &[usize]) -> Vec<u8> {
        let n = self.size();
        let mut x = vec![0u8; n * n];
        for (pos, &slot) in slots_in_order.iter().enumerate() {
            x[self.var_index(slot, pos)] = 1;
        }
        x
    }
}

/// Penalty settings for route QUBOs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingParams {
    /// `None` selects `2 · max c` over the route's nodes.
    pub penalty_a: Option<f64>,
    pub penalty_b: f64,
}

impl Default for EncodingParams {
    fn default() -> Self {
        EncodingParams {
            penalty_a: None,
            penalty_b: 1.0,
        }
    }
}

/// Builds the Hamiltonian-cycle QUBO for `route_nodes` (depot first).
pub fn build_tsp_qubo(route_nodes: &[usize], costs: &CostMatrix, params: EncodingParams) -> Result<(Qubo, RouteEncoding), QuboError> {
    let n = route_nodes.len();
    if n < 2 {
        return Err(QuboError::TooFewNodes(n));
    }
    for (k, a) in route_nodes.iter().enumerate() {
        if route_nodes[..k].contains(a) {
            return Err(QuboError::DuplicateNode(*a));
        }
    }
    let max_cost = costs.max_among(route_nodes);
    let a = params.penalty_a.unwrap_or(2.0 * max_cost);
    // A route whose nodes all coincide has max cost 0; any positive A works.
    let a = if params.penalty_a.is_none() && a == 0.0 { 1.0 } else { a };
    if !(a > 0.0) {
        return Err(QuboError::NonPositivePenalty(a));
    }
    let b = params.penalty_b;
    let enc = RouteEncoding {
        nodes: route_nodes.to_vec(),
        penalty_a: a,
        penalty_b: b,
    };
    let mut q = Qubo::new(n * n);

    // One-hot rows (each node at one position) and columns (each position
    // holds one node).
    q.add_offset(2.0 * a * n as f64);
    for slot in 0..n {
        for pos in 0..n {
            let v = enc.var_index(slot, pos);
            q.add(v, v, -2.0 * a);
            for other in (pos + 1)..n {
                q.add(v, enc.var_index(slot, other), 2.0 * a);
            }
            for other in (slot + 1)..n {
                q.add(v, enc.var_index(other, pos), 2.0 * a);
            }
        }
    }

    // Tour edges between consecutive positions, wrapping N -> 1.
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let c = b * costs.get(route_nodes[i], route_nodes[j]);
            if c == 0.0 {
                continue;
            }
            for pos in 0..n {
                q.add(enc.var_index(i, pos), enc.var_index(j, (pos + 1) % n), c);
            }
        }
    }
    Ok((q, enc))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("assignment is not a permutation (bad node rows {bad_rows:?}, bad positions {bad_columns:?})")]
pub struct PermutationError {
    pub bad_rows: Vec<usize>,
    pub bad_columns: Vec<usize>,
}

/// Decodes a permutation-matrix assignment into the route's stop order,
/// rotated so the depot leads and then dropped.
pub fn decode_assignment(encoding: &RouteEncoding, assignment: &[u8]) -> Result<Vec<usize>, PermutationError> {
    let n = encoding.size();
    if assignment.len() != n * n {
        return Err(PermutationError {
            bad_rows: (0..n).collect(),
            bad_columns: (0..n).collect(),
        });
    }
    let mut bad_rows = Vec::new();
    let mut bad_columns = Vec::new();
    for slot in 0..n {
        let ones = (0..n).filter(|&p| assignment[encoding.var_index(slot, p)] != 0).count();
        if ones != 1 {
            bad_rows.push(slot);
        }
    }
    let mut at_position = vec![usize::MAX; n];
    for pos in 0..n {
        let holders: Vec<usize> = (0..n).filter(|&s| assignment[encoding.var_index(s, pos)] != 0).collect();
        if holders.len() == 1 {
            at_position[pos] = holders[0];
        } else {
            bad_columns.push(pos);
        }
    }
    if !bad_rows.is_empty() || !bad_columns.is_empty() {
        return Err(PermutationError { bad_rows, bad_columns });
    }
    let depot_pos = at_position.iter().position(|&s| s == 0).expect("valid permutation holds slot 0");
    Ok((1..n).map(|k| encoding.nodes[at_position[(depot_pos + k) % n]]).collect())
}
