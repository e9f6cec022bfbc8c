use std::cmp::Ordering;

use super::memory::TabuList;
use crate::solution::{Move, Solution, COST_EPS};

/// Orders moves by `delta_cost`, then by [`Move::tie_key`].
pub fn by_cost(a: &Move, b: &Move) -> Ordering {
    a.delta_cost.total_cmp(&b.delta_cost).then_with(|| a.tie_key().cmp(&b.tie_key()))
}

/// Orders moves by resulting infeasibility, then cost, then tie key.
pub fn by_infeasibility(a: &Move, b: &Move) -> Ordering {
    a.delta_infeasibility.total_cmp(&b.delta_infeasibility).then_with(|| by_cost(a, b))
}

fn best_by<'a>(moves: impl Iterator<Item = &'a Move>, cmp: fn(&Move, &Move) -> Ordering) -> Option<&'a Move> {
    moves.min_by(|a, b| cmp(a, b))
}

/// Infeasibility of `current` after `mv`.
pub fn resulting_infeasibility(current: &Solution, mv: &Move) -> f64 {
    (current.infeasibility + mv.delta_infeasibility).max(0.0)
}

pub fn keeps_feasible(current: &Solution, mv: &Move) -> bool {
    resulting_infeasibility(current, mv) <= COST_EPS
}

/// Plain tabu-search selection over capacity-feasible moves.
///
/// A move whose result beats `best_cost` is taken even if tabu
/// (aspiration); otherwise the cheapest non-tabu move wins; if every move is
/// tabu, the cheapest move overall is forced. `None` when no move keeps the
/// solution feasible.
pub fn select_candidate_basic<'a>(
    current: &Solution,
    moves: &'a [Move],
    tabu: &TabuList,
    iteration: usize,
    best_cost: f64,
) -> Option<&'a Move> {
    let feasible = || moves.iter().filter(|m| keeps_feasible(current, m));
    let overall = best_by(feasible(), by_cost)?;
    if current.total_cost + overall.delta_cost < best_cost - COST_EPS {
        return Some(overall);
    }
    best_by(feasible().filter(|m| !tabu.forbids(m, iteration)), by_cost).or(Some(overall))
}

/// Outcome of strategic-oscillation selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SoChoice<'a> {
    pub selected: &'a Move,
    /// Cheapest feasible candidate, tabu or not, when it beats the global best.
    pub new_best: Option<&'a Move>,
}

/// Candidate evaluation with strategic oscillation.
///
/// From a feasible solution the cheapest non-tabu feasible and infeasible
/// candidates compete on cost. From an infeasible solution both pools
/// compete on resulting infeasibility (cost breaks ties). Independently of
/// tabu status, the cheapest feasible candidate is reported as a new global
/// best when it beats `best_cost`. If no non-tabu move exists the best move
/// under the active ordering is forced.
pub fn select_candidate_so<'a>(
    current: &Solution,
    moves: &'a [Move],
    tabu: &TabuList,
    iteration: usize,
    best_cost: f64,
) -> Option<SoChoice<'a>> {
    if moves.is_empty() {
        return None;
    }
    let new_best = best_by(moves.iter().filter(|m| keeps_feasible(current, m)), by_cost)
        .filter(|m| current.total_cost + m.delta_cost < best_cost - COST_EPS);

    let open = || moves.iter().filter(|m| !tabu.forbids(m, iteration));
    let selected = if current.is_feasible() {
        let sbfs = best_by(open().filter(|m| keeps_feasible(current, m)), by_cost);
        let sbis = best_by(open().filter(|m| !keeps_feasible(current, m)), by_cost);
        match (sbfs, sbis) {
            (Some(f), Some(i)) => Some(if i.delta_cost < f.delta_cost { i } else { f }),
            (f, i) => f.or(i),
        }
        .or_else(|| best_by(moves.iter(), by_cost))
    } else {
        best_by(open(), by_infeasibility).or_else(|| best_by(moves.iter(), by_infeasibility))
    }?;
    Some(SoChoice { selected, new_best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solution::MoveKind;

    fn mv(customer: usize, dc: f64, di: f64) -> Move {
        Move {
            kind: MoveKind::Relocate,
            customer,
            partner: None,
            from_route: 0,
            from_pos: 0,
            to_route: 1,
            to_pos: 0,
            insert_at: None,
            delta_cost: dc,
            delta_infeasibility: di,
        }
    }

    fn state(cost: f64, infeasibility: f64) -> Solution {
        Solution {
            routes: Vec::new(),
            total_cost: cost,
            infeasibility,
        }
    }

    fn tabu_on(customer: usize) -> TabuList {
        let mut t = TabuList::new();
        t.mark(customer, 1, 100);
        t
    }

    #[test]
    fn basic_prefers_lowest_delta() {
        let moves = [mv(1, -1.0, 0.0), mv(2, -3.0, 0.0)];
        let s = select_candidate_basic(&state(100.0, 0.0), &moves, &TabuList::new(), 0, 50.0).unwrap();
        assert_eq!(s.customer, 2);
    }

    #[test]
    fn basic_tie_goes_to_lower_customer() {
        let moves = [mv(5, -1.0, 0.0), mv(2, -1.0, 0.0)];
        let s = select_candidate_basic(&state(100.0, 0.0), &moves, &TabuList::new(), 0, 50.0).unwrap();
        assert_eq!(s.customer, 2);
    }

    #[test]
    fn basic_aspiration_overrides_tabu() {
        let moves = [mv(1, -20.0, 0.0), mv(2, -1.0, 0.0)];
        let s = select_candidate_basic(&state(100.0, 0.0), &moves, &tabu_on(1), 0, 90.0).unwrap();
        assert_eq!(s.customer, 1);
        // Without a new global best the tabu move is skipped.
        let s = select_candidate_basic(&state(100.0, 0.0), &moves, &tabu_on(1), 0, 70.0).unwrap();
        assert_eq!(s.customer, 2);
    }

    #[test]
    fn basic_forced_when_all_tabu() {
        let mut t = tabu_on(1);
        t.mark(2, 1, 100);
        let moves = [mv(1, 4.0, 0.0), mv(2, 2.0, 0.0)];
        assert_eq!(select_candidate_basic(&state(100.0, 0.0), &moves, &t, 0, 50.0).unwrap().customer, 2);
    }

    #[test]
    fn basic_ignores_infeasible_moves() {
        let moves = [mv(1, -10.0, 3.0)];
        assert!(select_candidate_basic(&state(100.0, 0.0), &moves, &TabuList::new(), 0, 50.0).is_none());
    }

    #[test]
    fn so_feasible_previous_takes_cheaper_infeasible() {
        // Resulting costs 100 (feasible) vs 90 (infeasible).
        let moves = [mv(1, 0.0, 0.0), mv(2, -10.0, 5.0)];
        let c = select_candidate_so(&state(100.0, 0.0), &moves, &TabuList::new(), 0, 50.0).unwrap();
        assert_eq!(c.selected.customer, 2);
        assert!(c.new_best.is_none());
    }

    #[test]
    fn so_infeasible_previous_ranks_by_infeasibility() {
        let moves = [mv(1, 30.0, -5.0), mv(2, -10.0, 0.0)];
        let c = select_candidate_so(&state(100.0, 5.0), &moves, &TabuList::new(), 0, 50.0).unwrap();
        assert_eq!(c.selected.customer, 1);
    }

    #[test]
    fn so_infeasibility_ties_broken_by_cost() {
        let moves = [mv(1, 3.0, -5.0), mv(2, 1.0, -5.0)];
        let c = select_candidate_so(&state(100.0, 5.0), &moves, &TabuList::new(), 0, 50.0).unwrap();
        assert_eq!(c.selected.customer, 2);
    }

    #[test]
    fn so_tabu_feasible_best_is_recorded_not_selected() {
        let moves = [mv(1, -30.0, 0.0), mv(2, -1.0, 0.0)];
        let c = select_candidate_so(&state(100.0, 0.0), &moves, &tabu_on(1), 0, 80.0).unwrap();
        assert_eq!(c.selected.customer, 2);
        assert_eq!(c.new_best.unwrap().customer, 1);
    }

    #[test]
    fn so_forced_when_all_tabu() {
        let mut t = tabu_on(1);
        t.mark(2, 1, 100);
        let moves = [mv(1, 4.0, 0.0), mv(2, 2.0, 1.0)];
        assert_eq!(
            select_candidate_so(&state(100.0, 0.0), &moves, &t, 0, 50.0)
                .unwrap()
                .selected
                .customer,
            2
        );
    }
}
