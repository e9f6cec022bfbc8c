use std::io;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::memory::{update_tabu, TabuList};
use super::neighborhood::generate_neighborhood;
use super::select::{select_candidate_basic, select_candidate_so};
use crate::construct::{build_seeded_solution, clarke_wright, ConstructError};
use crate::instance::{nearest_neighbors, CvrpInstance, NeighborLists};
use crate::sampler::{Resequence, ResequenceStats};
use crate::solution::{check_feasibility, Solution, Violation, COST_EPS};

/// Tunables of one search run.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    /// Iterations a displaced customer stays barred from its old route.
    pub tenure: usize,
    /// Phase length bounds as fractions of the customer count.
    pub x_low: f64,
    pub x_high: f64,
    /// Stop after this many iterations without a new global best.
    pub non_improve_stop: usize,
    pub time_limit_seconds: f64,
    /// Re-sequence the global best every this many non-improving iterations.
    pub resequence_trigger: usize,
    pub so_enabled: bool,
    pub rng_seed: u64,
    /// Routes available; `None` uses [`CvrpInstance::default_search_fleet`].
    pub fleet: Option<usize>,
    /// Hard iteration cap, mainly for tests.
    pub max_iterations: Option<usize>,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            tenure: 15,
            x_low: 0.6,
            x_high: 1.1,
            non_improve_stop: 5000,
            time_limit_seconds: 3600.0,
            resequence_trigger: 1000,
            so_enabled: true,
            rng_seed: 0,
            fleet: None,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid search parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error("starting solution is not capacity-feasible")]
    InfeasibleStart,
}

impl SearchParams {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidParams(m.to_string()));
        if self.tenure == 0 {
            return bad("tenure must be positive");
        }
        if !(self.x_low > 0.0 && self.x_low <= self.x_high) {
            return bad("phase bounds need 0 < x_low <= x_high");
        }
        if self.non_improve_stop == 0 || self.resequence_trigger == 0 {
            return bad("iteration thresholds must be positive");
        }
        if !(self.time_limit_seconds > 0.0) {
            return bad("time limit must be positive");
        }
        if self.fleet == Some(0) {
            return bad("fleet must be positive");
        }
        Ok(())
    }
}

/// How the first solution is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartStrategy {
    #[default]
    Seeded,
    ClarkeWright,
}

/// Stage of the intensification/diversification cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Normal,
    Diversify,
    Intensify,
}

/// Mutable state of a run.
#[derive(Debug, Clone)]
pub struct SearchState {
    pub current: Solution,
    /// Always capacity-feasible.
    pub global_best: Solution,
    pub iteration: usize,
    pub since_best: usize,
    pub phase: Phase,
    /// Non-improving iterations since the last phase change.
    pub phase_clock: usize,
    /// Length of the current phase.
    pub phase_length: usize,
    pub diversified: bool,
    pub neighbor_k: usize,
}

impl SearchState {
    pub fn new(start: Solution, base_k: usize, phase_length: usize) -> SearchState {
        SearchState {
            global_best: start.clone(),
            current: start,
            iteration: 0,
            since_best: 0,
            phase: Phase::Normal,
            phase_clock: 0,
            phase_length,
            diversified: false,
            neighbor_k: base_k,
        }
    }
}

/// Draws a phase length uniformly from `[ceil(x_low·V), floor(x_high·V)]`.
pub fn draw_phase_length(params: &SearchParams, customers: usize, rng: &mut ChaCha8Rng) -> usize {
    let lo = (params.x_low * customers as f64).ceil().max(1.0) as usize;
    let hi = ((params.x_high * customers as f64).floor() as usize).max(lo);
    rng.gen_range(lo..=hi)
}

/// Advances the intensification/diversification cycle by one iteration.
///
/// An improving iteration only restarts the phase clock. Otherwise, once the
/// clock reaches the phase length: normal search widens to `2K` neighbour
/// lists without intra-route swaps; diversification then returns to the
/// global best (skipped under strategic oscillation); intensification then
/// restores the `K` lists. Each change draws a fresh phase length.
pub fn intensify_diversify(
    state: &mut SearchState,
    params: &SearchParams,
    improved: bool,
    base_k: usize,
    customers: usize,
    rng: &mut ChaCha8Rng,
) {
    if improved {
        state.phase_clock = 0;
        return;
    }
    state.phase_clock += 1;
    if state.phase_clock >= state.phase_length {
        advance_phase(state, params, base_k);
        state.phase_clock = 0;
        state.phase_length = draw_phase_length(params, customers, rng);
    }
}

fn advance_phase(state: &mut SearchState, params: &SearchParams, base_k: usize) {
    match state.phase {
        Phase::Normal => {
            state.phase = Phase::Diversify;
            state.diversified = true;
            state.neighbor_k = 2 * base_k;
        }
        Phase::Diversify => {
            state.phase = Phase::Intensify;
            if !params.so_enabled {
                state.current = state.global_best.clone();
            }
        }
        Phase::Intensify => {
            state.phase = Phase::Normal;
            state.diversified = false;
            state.neighbor_k = base_k;
        }
    }
}

/// Re-sequences every route of the global best when `since_best` is a
/// positive multiple of the trigger. Returns true if the global best
/// improved. Under strategic oscillation the search then continues from the
/// global best, which is that variant's only intensification.
pub fn maybe_resequence(
    state: &mut SearchState,
    resequencer: &mut dyn Resequence,
    params: &SearchParams,
    instance: &CvrpInstance,
) -> Option<bool> {
    if state.since_best == 0 || state.since_best % params.resequence_trigger != 0 {
        return None;
    }
    let mut candidate = state.global_best.clone();
    for route in candidate.routes.iter_mut().filter(|r| !r.is_empty()) {
        let next = resequencer.resequence(route, instance);
        if next.cost < route.cost {
            *route = next;
        }
    }
    candidate.refresh_totals(instance);
    let improved = candidate.total_cost < state.global_best.total_cost - COST_EPS;
    if improved {
        state.global_best = candidate;
        state.since_best = 0;
    }
    if params.so_enabled {
        state.current = state.global_best.clone();
    }
    Some(improved)
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    NoImprovement,
    TimeLimit,
    IterationLimit,
}

/// One line of the per-iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub iteration: usize,
    pub current_cost: f64,
    pub best_cost: f64,
    pub feasible: bool,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchStats {
    pub iterations: usize,
    pub initial_cost: f64,
    pub best_cost: f64,
    pub stalls: usize,
    pub resequence_events: usize,
    pub resequence_improvements: usize,
    pub resequence: ResequenceStats,
    pub wallclock_seconds: f64,
    pub stop_reason: StopReason,
    #[serde(skip)]
    pub trajectory: Vec<TrajectoryRow>,
}

impl SearchStats {
    /// Writes the trace as CSV with header
    /// `iteration,current_cost,best_cost,feasible,phase`.
    pub fn write_trajectory_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.trajectory {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: Solution,
    pub stats: SearchStats,
}

fn builds_start(instance: &CvrpInstance, start: StartStrategy, neighbors: &NeighborLists, fleet: usize) -> Result<Solution, SearchError> {
    let s = match start {
        StartStrategy::Seeded => build_seeded_solution(instance, neighbors, fleet)?,
        StartStrategy::ClarkeWright => {
            let mut s = clarke_wright(instance).solution;
            while s.routes.len() < fleet {
                s.routes.push(crate::solution::Route::empty());
            }
            s
        }
    };
    if !s.is_feasible() {
        return Err(SearchError::InfeasibleStart);
    }
    Ok(s)
}

fn coverage_intact(solution: &Solution, instance: &CvrpInstance) -> bool {
    check_feasibility(solution, instance, None).violations.iter().all(|v| {
        !matches!(
            v,
            Violation::MissingCustomer { .. } | Violation::DuplicateCustomer { .. } | Violation::UnknownLocation { .. }
        )
    })
}

/// Runs tabu search (with strategic oscillation when enabled) from the
/// chosen start until `non_improve_stop` iterations pass without a new
/// global best, the time limit elapses, or `max_iterations` is reached.
pub fn run_search(
    instance: &CvrpInstance,
    params: &SearchParams,
    start: StartStrategy,
    resequencer: &mut dyn Resequence,
) -> Result<SearchOutcome, SearchError> {
    params.validate()?;
    let clock = Instant::now();
    let time_limit = Duration::from_secs_f64(params.time_limit_seconds);
    let fleet = params.fleet.unwrap_or_else(|| instance.default_search_fleet());
    let base_k = instance.fleet_size.max(1);
    let customers = instance.num_customers();
    let lists = [nearest_neighbors(instance, base_k), nearest_neighbors(instance, 2 * base_k)];
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);

    let initial = builds_start(instance, start, &lists[0], fleet)?;
    let initial_cost = initial.total_cost;
    let phase_length = draw_phase_length(params, customers, &mut rng);
    let mut state = SearchState::new(initial, base_k, phase_length);
    let mut tabu = TabuList::new();
    let mut trajectory = vec![TrajectoryRow {
        iteration: 0,
        current_cost: state.current.total_cost,
        best_cost: state.global_best.total_cost,
        feasible: state.current.is_feasible(),
        phase: state.phase,
    }];
    let (mut stalls, mut resequence_events, mut resequence_improvements) = (0, 0, 0);

    let stop_reason = loop {
        if state.since_best >= params.non_improve_stop {
            break StopReason::NoImprovement;
        }
        if params.max_iterations.is_some_and(|m| state.iteration >= m) {
            break StopReason::IterationLimit;
        }
        if clock.elapsed() >= time_limit {
            break StopReason::TimeLimit;
        }
        state.iteration += 1;
        let it = state.iteration;
        let neighbors = if state.neighbor_k == base_k { &lists[0] } else { &lists[1] };

        let mut improved = false;
        let moves = generate_neighborhood(&state.current, instance, neighbors, !state.diversified);
        let chosen = moves.as_deref().ok().and_then(|moves| {
            let best_cost = state.global_best.total_cost;
            if params.so_enabled {
                select_candidate_so(&state.current, moves, &tabu, it, best_cost).map(|c| {
                    let new_best = c
                        .new_best
                        .map(|m| state.current.with_move(m, instance).expect("fresh move applies"));
                    (c.selected.clone(), new_best)
                })
            } else {
                select_candidate_basic(&state.current, moves, &tabu, it, best_cost).map(|m| (m.clone(), None))
            }
        });
        match chosen {
            Some((mv, new_best)) => {
                state.current.apply(&mv, instance).expect("fresh move applies");
                update_tabu(&mut tabu, &mv, it, params.tenure);
                let candidate = new_best.or_else(|| {
                    (state.current.is_feasible() && state.current.total_cost < state.global_best.total_cost - COST_EPS)
                        .then(|| state.current.clone())
                });
                if let Some(best) = candidate {
                    if best.total_cost < state.global_best.total_cost - COST_EPS {
                        state.global_best = best;
                        improved = true;
                    }
                }
            }
            None => {
                // Nothing admissible: treat as a stall and widen the search.
                stalls += 1;
                if state.phase == Phase::Normal {
                    advance_phase(&mut state, params, base_k);
                    state.phase_clock = 0;
                    state.phase_length = draw_phase_length(params, customers, &mut rng);
                }
            }
        }

        if improved {
            state.since_best = 0;
        } else {
            state.since_best += 1;
        }
        intensify_diversify(&mut state, params, improved, base_k, customers, &mut rng);
        if let Some(better) = maybe_resequence(&mut state, resequencer, params, instance) {
            resequence_events += 1;
            if better {
                resequence_improvements += 1;
                state.phase_clock = 0;
            }
        }
        debug_assert!(
            it % 100 != 0 || coverage_intact(&state.current, instance),
            "coverage lost at iteration {it}"
        );
        debug_assert!(state.global_best.is_feasible());

        trajectory.push(TrajectoryRow {
            iteration: it,
            current_cost: state.current.total_cost,
            best_cost: state.global_best.total_cost,
            feasible: state.current.is_feasible(),
            phase: state.phase,
        });
    };

    let stats = SearchStats {
        iterations: state.iteration,
        initial_cost,
        best_cost: state.global_best.total_cost,
        stalls,
        resequence_events,
        resequence_improvements,
        resequence: resequencer.stats(),
        wallclock_seconds: clock.elapsed().as_secs_f64(),
        stop_reason,
        trajectory,
    };
    Ok(SearchOutcome {
        best: state.global_best,
        stats,
    })
}
