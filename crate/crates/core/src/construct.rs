//! Starting solutions: the neighbor-seeded constructor used by the tabu
//! search and the Clarke-Wright parallel savings baseline.

use std::collections::VecDeque;

use thiserror::Error;

use crate::instance::{CvrpInstance, NeighborLists};
use crate::solution::{cheapest_insertion, Solution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructError {
    #[error("fleet of {fleet} cannot carry total demand {demand} at capacity {capacity}")]
    FleetTooSmall { fleet: usize, demand: f64, capacity: f64 },
    #[error("customer {customer} fits in no route; try a larger fleet")]
    NoRouteWithSpace { customer: usize },
}

/// Builds the tabu search starting solution.
///
/// Seeds are the customers farthest from the depot, skipping any customer
/// that is a nearest neighbor of an already seeded one, up to `fleet` seeds.
/// The remaining customers are taken in descending demand order (ties by
/// id) and placed at their cheapest position in a route that already holds
/// one of their nearest neighbors and has room; if no such route exists the
/// customer goes to the cheapest route with room.
pub fn build_seeded_solution(instance: &CvrpInstance, neighbors: &NeighborLists, fleet: usize) -> Result<Solution, ConstructError> {
    let fleet = fleet.max(1);
    let capacity = instance.capacity;
    if (fleet as f64) * capacity < instance.total_demand() {
        return Err(ConstructError::FleetTooSmall {
            fleet,
            demand: instance.total_demand(),
            capacity,
        });
    }

    let mut by_distance: Vec<usize> = instance.customers().collect();
    by_distance.sort_by(|&a, &b| instance.cost(0, b).total_cmp(&instance.cost(0, a)).then(a.cmp(&b)));

    let mut routes: Vec<Vec<usize>> = vec![Vec::new(); fleet];
    let mut loads = vec![0.0; fleet];
    let mut route_of = vec![usize::MAX; instance.len()];
    let mut seeds: Vec<usize> = Vec::with_capacity(fleet);
    for &c in &by_distance {
        if seeds.len() == fleet {
            break;
        }
        if seeds.iter().any(|&s| neighbors.contains(s, c)) {
            continue;
        }
        let r = seeds.len();
        routes[r].push(c);
        loads[r] += instance.demand(c);
        route_of[c] = r;
        seeds.push(c);
    }

    let mut remaining: Vec<usize> = instance.customers().filter(|&c| route_of[c] == usize::MAX).collect();
    remaining.sort_by(|&a, &b| instance.demand(b).total_cmp(&instance.demand(a)).then(a.cmp(&b)));

    for c in remaining {
        let demand = instance.demand(c);
        let fits = |r: usize| loads[r] + demand <= capacity;
        let cheapest = |candidates: &mut dyn Iterator<Item = usize>| {
            candidates
                .map(|r| {
                    let (pos, delta) = cheapest_insertion(&routes[r], None, c, instance);
                    (r, pos, delta)
                })
                .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)))
        };
        let mut with_neighbor = (0..fleet).filter(|&r| fits(r) && neighbors.of(c).iter().any(|&n| route_of[n] == r));
        let choice = cheapest(&mut with_neighbor).or_else(|| cheapest(&mut (0..fleet).filter(|&r| fits(r))));
        let Some((r, pos, _)) = choice else {
            return Err(ConstructError::NoRouteWithSpace { customer: c });
        };
        routes[r].insert(pos, c);
        loads[r] += demand;
        route_of[c] = r;
    }

    Ok(Solution::from_routes(routes, fleet, instance))
}

/// Clarke-Wright outcome. `fleet_exceeded` is set when the savings merges
/// could not bring the route count down to the instance fleet size.
#[derive(Debug, Clone)]
pub struct SavingsOutcome {
    pub solution: Solution,
    pub fleet_exceeded: bool,
}

/// Savings of serving `i` and `j` on one route instead of two.
#[inline]
pub fn saving(instance: &CvrpInstance, i: usize, j: usize) -> f64 {
    instance.cost(0, i) + instance.cost(0, j) - instance.cost(i, j)
}

/// Parallel savings construction.
///
/// All positive savings are processed in descending order; a merge joins two
/// different routes at their ends when the combined load fits. If more than
/// `fleet_size` routes remain, non-positive savings are then used to keep
/// merging until the fleet bound is met or no merge is possible.
pub fn clarke_wright(instance: &CvrpInstance) -> SavingsOutcome {
    let n = instance.len();
    let fleet = instance.fleet_size;
    let mut routes: Vec<Option<VecDeque<usize>>> = vec![None; n];
    let mut loads = vec![0.0; n];
    let mut route_of = vec![0; n];
    for c in instance.customers() {
        routes[c] = Some(VecDeque::from([c]));
        loads[c] = instance.demand(c);
        route_of[c] = c;
    }
    let mut live = instance.num_customers();

    let mut savings: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n / 2);
    for i in 1..n {
        for j in (i + 1)..n {
            savings.push((saving(instance, i, j), i, j));
        }
    }
    savings.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    for &(s, i, j) in &savings {
        if s <= 0.0 && live <= fleet {
            break;
        }
        let (ri, rj) = (route_of[i], route_of[j]);
        if ri == rj || loads[ri] + loads[rj] > instance.capacity {
            continue;
        }
        let is_end = |r: usize, c: usize| {
            let q = routes[r].as_ref().expect("live route");
            q.front() == Some(&c) || q.back() == Some(&c)
        };
        if !is_end(ri, i) || !is_end(rj, j) {
            continue;
        }
        let mut left = routes[ri].take().expect("live route");
        let mut right = routes[rj].take().expect("live route");
        // Orient so the merge joins ... i | j ...
        if left.back() != Some(&i) {
            left = left.into_iter().rev().collect();
        }
        if right.front() != Some(&j) {
            right = right.into_iter().rev().collect();
        }
        for &c in &right {
            route_of[c] = ri;
        }
        left.extend(right);
        loads[ri] += loads[rj];
        loads[rj] = 0.0;
        routes[ri] = Some(left);
        live -= 1;
    }

    let built: Vec<Vec<usize>> = routes.into_iter().flatten().map(Vec::from).collect();
    let fleet_exceeded = built.len() > fleet;
    let count = built.len().max(fleet);
    SavingsOutcome {
        solution: Solution::from_routes(built, count, instance),
        fleet_exceeded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::nearest_neighbors;
    use crate::solution::check_feasibility;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(seed: u64, customers: usize, demand: impl Fn(&mut ChaCha8Rng) -> f64, q: f64) -> CvrpInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords: Vec<(f64, f64)> = (0..=customers)
            .map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
            .collect();
        let demands: Vec<f64> = (0..=customers).map(|i| if i == 0 { 0.0 } else { demand(&mut rng) }).collect();
        CvrpInstance::from_coords("rand", &coords, &demands, q, None).unwrap()
    }

    fn covered_once(s: &Solution, inst: &CvrpInstance) -> bool {
        let rep = check_feasibility(s, inst, None);
        rep.violations
            .iter()
            .all(|v| matches!(v, crate::solution::Violation::Capacity { .. }))
    }

    #[test]
    fn single_customer_with_two_vehicles() {
        let inst = CvrpInstance::from_coords("one", &[(0.0, 0.0), (1.0, 1.0)], &[0.0, 3.0], 10.0, None).unwrap();
        let nl = nearest_neighbors(&inst, 1);
        let s = build_seeded_solution(&inst, &nl, 2).unwrap();
        assert_eq!(s.routes.len(), 2);
        assert_eq!(s.vehicles_used(), 1);
    }

    #[test]
    fn exact_fill_with_uniform_demands() {
        // total demand = fleet * Q with uniform demands forces full routes;
        // enumerate every small (fleet, per-route) combination.
        for fleet in 1..=4 {
            for per_route in 1..=4 {
                for seed in 0..5 {
                    let inst = random_instance(seed, fleet * per_route, |_| 5.0, 5.0 * per_route as f64);
                    let nl = nearest_neighbors(&inst, fleet);
                    let s = build_seeded_solution(&inst, &nl, fleet).unwrap();
                    assert!(covered_once(&s, &inst));
                    for r in &s.routes {
                        assert_eq!(r.load, inst.capacity, "fleet {fleet} per-route {per_route} seed {seed}");
                    }
                }
            }
        }
    }

    #[test]
    fn seeded_solution_respects_capacity_and_is_deterministic() {
        for seed in 0..20 {
            let inst = random_instance(seed, 30, |r| r.gen_range(1..20) as f64, 60.0);
            let fleet = inst.capacity_lower_bound() + 1;
            let nl = nearest_neighbors(&inst, fleet - 1);
            let Ok(s) = build_seeded_solution(&inst, &nl, fleet) else {
                continue;
            };
            assert!(check_feasibility(&s, &inst, Some(fleet)).feasible);
            assert_eq!(s, build_seeded_solution(&inst, &nl, fleet).unwrap());
        }
    }

    #[test]
    fn too_small_fleet_is_rejected() {
        let inst = random_instance(1, 10, |_| 10.0, 30.0);
        let nl = nearest_neighbors(&inst, 2);
        assert!(matches!(
            build_seeded_solution(&inst, &nl, 3),
            Err(ConstructError::FleetTooSmall { .. })
        ));
    }

    #[test]
    fn seeds_avoid_neighbors_of_earlier_seeds() {
        // Two far customers next to each other: only the farther one seeds.
        let inst = CvrpInstance::from_coords(
            "s",
            &[(0.0, 0.0), (10.0, 0.0), (10.0, 0.5), (-3.0, 0.0)],
            &[0.0, 1.0, 1.0, 1.0],
            10.0,
            None,
        )
        .unwrap();
        let nl = nearest_neighbors(&inst, 1);
        let s = build_seeded_solution(&inst, &nl, 2).unwrap();
        assert!(s.routes[0].stops.contains(&2));
        assert!(s.routes[0].stops.contains(&1));
        assert_eq!(s.routes[1].stops, vec![3]);
    }

    #[test]
    fn saving_formula() {
        let inst = CvrpInstance::new(
            "m",
            (0..3)
                .map(|id| crate::instance::Location {
                    id,
                    coords: None,
                    demand: if id == 0 { 0.0 } else { 1.0 },
                })
                .collect(),
            crate::instance::CostMatrix::from_rows(vec![vec![0.0, 5.0, 5.0], vec![5.0, 0.0, 2.0], vec![5.0, 2.0, 0.0]]).unwrap(),
            10.0,
            None,
        )
        .unwrap();
        assert_eq!(saving(&inst, 1, 2), 8.0);
        let out = clarke_wright(&inst);
        assert_eq!(out.solution.vehicles_used(), 1);
        assert_eq!(out.solution.total_cost, 12.0);
        assert!(!out.fleet_exceeded);
    }

    #[test]
    fn clarke_wright_covers_everyone_and_only_merges_ends() {
        for seed in 0..20 {
            let inst = random_instance(seed, 25, |r| r.gen_range(1..20) as f64, 50.0);
            let out = clarke_wright(&inst);
            assert!(covered_once(&out.solution, &inst));
            assert!(out.solution.is_feasible());
            assert_eq!(out.fleet_exceeded, out.solution.vehicles_used() > inst.fleet_size);
        }
    }

    #[test]
    fn clarke_wright_reports_fleet_violation() {
        // Every pair overflows the capacity, so 3 single-customer routes remain.
        let inst = CvrpInstance::from_coords(
            "f",
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)],
            &[0.0, 6.0, 6.0, 6.0],
            10.0,
            Some(2),
        )
        .unwrap();
        let out = clarke_wright(&inst);
        assert!(out.fleet_exceeded);
        assert_eq!(out.solution.vehicles_used(), 3);
    }
}
