use thiserror::Error;

use crate::instance::{CvrpInstance, NeighborLists};
use crate::solution::{cheapest_insertion, Move, MoveKind, Route, Solution};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("no admissible move exists from the current solution")]
pub struct EmptyNeighborhood;

fn excess(load: f64, capacity: f64) -> f64 {
    (load - capacity).max(0.0)
}

/// Cost change from removing the stop at `pos`.
fn removal_delta(route: &Route, pos: usize, instance: &CvrpInstance) -> f64 {
    let (p, c, n) = (route.prev(pos), route.stops[pos], route.next(pos));
    instance.cost(p, n) - instance.cost(p, c) - instance.cost(c, n)
}

/// Cost change from exchanging the stops at `i < j` of one route.
fn intra_swap_delta(route: &Route, i: usize, j: usize, instance: &CvrpInstance) -> f64 {
    let (a, b) = (route.stops[i], route.stops[j]);
    let (pa, na, pb, nb) = (route.prev(i), route.next(i), route.prev(j), route.next(j));
    let c = |x, y| instance.cost(x, y);
    if j == i + 1 {
        (c(pa, b) + c(b, a) + c(a, nb)) - (c(pa, a) + c(a, b) + c(b, nb))
    } else {
        (c(pa, b) + c(b, na) + c(pb, a) + c(a, nb)) - (c(pa, a) + c(a, na) + c(pb, b) + c(b, nb))
    }
}

/// All candidate moves from `current`.
///
/// * Relocations of each customer into every other route holding one of
///   its neighbours, at that route's cheapest insertion point.
/// * Swaps of two stops within a route, unless `intra_swaps` is false.
/// * Exchanges of two customers between routes, each re-inserted at the
///   cheapest point of the other route, when each has a neighbour in its
///   new route other than its partner.
pub fn generate_neighborhood(
    current: &Solution,
    instance: &CvrpInstance,
    neighbors: &NeighborLists,
    intra_swaps: bool,
) -> Result<Vec<Move>, EmptyNeighborhood> {
    let q = instance.capacity;
    let route_of = current.route_index(instance.len());
    let position_of = {
        let mut p = vec![usize::MAX; instance.len()];
        for route in &current.routes {
            for (k, &s) in route.stops.iter().enumerate() {
                p[s] = k;
            }
        }
        p
    };
    let mut moves = Vec::new();
    let mut neighbor_count = vec![0usize; current.routes.len()];

    for a in instance.customers() {
        let r = route_of[a];
        if r == usize::MAX {
            continue;
        }
        let i = position_of[a];
        let from = &current.routes[r];
        let da = instance.demand(a);
        let remove_a = removal_delta(from, i, instance);

        neighbor_count.iter_mut().for_each(|n| *n = 0);
        for &n in neighbors.of(a) {
            if route_of[n] != usize::MAX {
                neighbor_count[route_of[n]] += 1;
            }
        }

        for (t, to) in current.routes.iter().enumerate() {
            if t == r || neighbor_count[t] == 0 {
                continue;
            }
            // (1,0)
            let (pos, insert) = cheapest_insertion(&to.stops, None, a, instance);
            moves.push(Move {
                kind: MoveKind::Relocate,
                customer: a,
                partner: None,
                from_route: r,
                from_pos: i,
                to_route: t,
                to_pos: pos,
                insert_at: None,
                delta_cost: remove_a + insert,
                delta_infeasibility: excess(from.load - da, q) + excess(to.load + da, q) - excess(from.load, q) - excess(to.load, q),
            });

            // (1,1), generated once per unordered pair from the smaller id.
            for (j, &b) in to.stops.iter().enumerate() {
                if b < a {
                    continue;
                }
                let a_keeps_neighbor = neighbor_count[t] > usize::from(neighbors.contains(a, b));
                if !a_keeps_neighbor {
                    continue;
                }
                let b_has_neighbor = neighbors.of(b).iter().any(|&n| n != a && route_of[n] == r);
                if !b_has_neighbor {
                    continue;
                }
                let db = instance.demand(b);
                let (a_at, a_ins) = cheapest_insertion(&to.stops, Some(j), a, instance);
                let (b_at, b_ins) = cheapest_insertion(&from.stops, Some(i), b, instance);
                moves.push(Move {
                    kind: MoveKind::InterSwap,
                    customer: a,
                    partner: Some(b),
                    from_route: r,
                    from_pos: i,
                    to_route: t,
                    to_pos: j,
                    insert_at: Some((a_at, b_at)),
                    delta_cost: remove_a + removal_delta(to, j, instance) + a_ins + b_ins,
                    delta_infeasibility: excess(from.load - da + db, q) + excess(to.load - db + da, q)
                        - excess(from.load, q)
                        - excess(to.load, q),
                });
            }
        }
    }

    // (0,1)
    if intra_swaps {
        for (r, route) in current.routes.iter().enumerate() {
            for i in 0..route.len() {
                for j in (i + 1)..route.len() {
                    moves.push(Move {
                        kind: MoveKind::IntraSwap,
                        customer: route.stops[i],
                        partner: Some(route.stops[j]),
                        from_route: r,
                        from_pos: i,
                        to_route: r,
                        to_pos: j,
                        insert_at: None,
                        delta_cost: intra_swap_delta(route, i, j, instance),
                        delta_infeasibility: 0.0,
                    });
                }
            }
        }
    }

    if moves.is_empty() {
        Err(EmptyNeighborhood)
    } else {
        Ok(moves)
    }
}
