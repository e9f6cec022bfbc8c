//! Tabu search with strategic oscillation and sparse route re-sequencing.

mod memory;
mod neighborhood;
mod search;
mod select;

pub use memory::{update_tabu, TabuList};
pub use neighborhood::{generate_neighborhood, EmptyNeighborhood};
pub use search::{
    draw_phase_length, intensify_diversify, maybe_resequence, run_search, Phase, SearchError, SearchOutcome, SearchParams, SearchState,
    SearchStats, StartStrategy, StopReason, TrajectoryRow,
};
pub use select::{by_cost, by_infeasibility, keeps_feasible, select_candidate_basic, select_candidate_so, SoChoice};
