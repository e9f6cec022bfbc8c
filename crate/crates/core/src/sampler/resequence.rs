use std::collections::HashMap;
use std::sync::RwLock;

use serde::Serialize;

use super::brute::{brute_force_tsp, BRUTE_FORCE_MAX_STOPS};
use super::solver::QuboSolver;
use crate::instance::CvrpInstance;
use crate::qubo::{build_tsp_qubo, decode_assignment, EncodingParams};
use crate::solution::{route_cost, Route, COST_EPS};

/// Best known order for one set of stops.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedTour {
    pub order: Vec<usize>,
    pub cost: f64,
}

/// Memo of re-sequenced stop sets, keyed by the sorted stop ids.
///
/// Any number of readers may look up concurrently; inserts take the write
/// lock. Two threads computing the same key both insert, and since both
/// entries describe the same stop set the later one simply wins.
#[derive(Debug, Default)]
pub struct ResequenceCache {
    entries: RwLock<HashMap<Vec<usize>, CachedTour>>,
}

impl ResequenceCache {
    pub fn new() -> ResequenceCache {
        ResequenceCache::default()
    }

    pub fn key(stops: &[usize]) -> Vec<usize> {
        let mut k = stops.to_vec();
        k.sort_unstable();
        k
    }

    pub fn get(&self, stops: &[usize]) -> Option<CachedTour> {
        self.entries.read().expect("cache lock").get(&Self::key(stops)).cloned()
    }

    pub fn insert(&self, tour: CachedTour) {
        let key = Self::key(&tour.order);
        self.entries.write().expect("cache lock").insert(key, tour);
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Snapshot of every entry, sorted by key.
    pub fn entries(&self) -> Vec<(Vec<usize>, CachedTour)> {
        let mut v: Vec<_> = self
            .entries
            .read()
            .expect("cache lock")
            .iter()
            .map(|(k, t)| (k.clone(), t.clone()))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

/// Counters describing how re-sequencing requests were answered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ResequenceStats {
    /// Routes submitted for re-sequencing.
    pub requests: usize,
    /// Routes of at most two stops, returned untouched.
    pub trivial: usize,
    pub cache_hits: usize,
    pub solver_calls: usize,
    pub solver_errors: usize,
    /// Solver calls where no sample decoded to a valid tour.
    pub invalid_decodes: usize,
    pub brute_force_fallbacks: usize,
    /// Misses that kept the input order because nothing better was found.
    pub kept_input: usize,
    /// Requests that returned a strictly cheaper order.
    pub improvements: usize,
}

/// Re-sequences one route: cache, then solver, then exhaustive search for
/// small routes, then the input order. Never returns a costlier route.
pub fn resequence_route(
    route: &Route,
    instance: &CvrpInstance,
    cache: &ResequenceCache,
    solver: &dyn QuboSolver,
    encoding: EncodingParams,
    stats: &mut ResequenceStats,
) -> Route {
    stats.requests += 1;
    let input_cost = route_cost(&route.stops, instance);
    // Two or fewer stops have a single tour up to direction.
    if route.stops.len() <= 2 {
        stats.trivial += 1;
        return route.clone();
    }
    let accept = |order: Vec<usize>, stats: &mut ResequenceStats| {
        let c = route_cost(&order, instance);
        if c < input_cost - COST_EPS {
            stats.improvements += 1;
            Route::new(order, instance)
        } else {
            route.clone()
        }
    };

    if let Some(hit) = cache.get(&route.stops) {
        stats.cache_hits += 1;
        if input_cost < hit.cost - COST_EPS {
            cache.insert(CachedTour {
                order: route.stops.clone(),
                cost: input_cost,
            });
        }
        return accept(hit.order, stats);
    }

    let mut nodes = Vec::with_capacity(route.stops.len() + 1);
    nodes.push(0);
    nodes.extend_from_slice(&route.stops);
    let decoded = match build_tsp_qubo(&nodes, &instance.costs, encoding) {
        Ok((qubo, enc)) => {
            stats.solver_calls += 1;
            match solver.sample(&qubo) {
                Ok(samples) => {
                    let first_valid = samples.iter().find_map(|s| decode_assignment(&enc, &s.assignment).ok());
                    if first_valid.is_none() {
                        stats.invalid_decodes += 1;
                    }
                    first_valid
                }
                Err(_) => {
                    stats.solver_errors += 1;
                    None
                }
            }
        }
        Err(_) => None,
    };
    let candidate = match decoded {
        Some(order) => Some(order),
        None if route.stops.len() <= BRUTE_FORCE_MAX_STOPS => {
            stats.brute_force_fallbacks += 1;
            brute_force_tsp(0, &route.stops, &instance.costs).ok().map(|(o, _)| o)
        }
        None => None,
    };

    let best = match candidate {
        Some(order) if route_cost(&order, instance) < input_cost - COST_EPS => order,
        _ => {
            stats.kept_input += 1;
            route.stops.clone()
        }
    };
    let cost = route_cost(&best, instance);
    cache.insert(CachedTour { order: best.clone(), cost });
    accept(best, stats)
}

/// Route re-sequencing as seen by the search driver.
pub trait Resequence {
    /// Returns an order of the same stops costing no more than `route`.
    fn resequence(&mut self, route: &Route, instance: &CvrpInstance) -> Route;
    fn stats(&self) -> ResequenceStats;
}

/// Re-sequences through a QUBO solver with a memo cache.
pub struct QuboResequencer<S> {
    pub solver: S,
    pub cache: ResequenceCache,
    pub encoding: EncodingParams,
    stats: ResequenceStats,
}

impl<S: QuboSolver> QuboResequencer<S> {
    pub fn new(solver: S) -> Self {
        QuboResequencer {
            solver,
            cache: ResequenceCache::new(),
            encoding: EncodingParams::default(),
            stats: ResequenceStats::default(),
        }
    }
}

impl<S: QuboSolver> Resequence for QuboResequencer<S> {
    fn resequence(&mut self, route: &Route, instance: &CvrpInstance) -> Route {
        resequence_route(route, instance, &self.cache, &self.solver, self.encoding, &mut self.stats)
    }

    fn stats(&self) -> ResequenceStats {
        self.stats
    }
}

/// Leaves every route as it is.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoResequencing;

impl Resequence for NoResequencing {
    fn resequence(&mut self, route: &Route, _: &CvrpInstance) -> Route {
        route.clone()
    }

    fn stats(&self) -> ResequenceStats {
        ResequenceStats::default()
    }
}
