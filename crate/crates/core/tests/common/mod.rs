//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use hqts::instance::CvrpInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Depot plus `n` customers uniformly in a 100 x 100 square.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, demand_max: u32, capacity: f64) -> CvrpInstance {
    let pts: Vec<(f64, f64)> = (0..=n).map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0))).collect();
    let d: Vec<f64> = (0..=n)
        .map(|i| if i == 0 { 0.0 } else { rng.gen_range(1..=demand_max) as f64 })
        .collect();
    CvrpInstance::from_coords("random", &pts, &d, capacity, None).unwrap()
}

/// Cost of the cyclic tour `0 -> order -> 0`, computed directly.
pub fn tour_cost(inst: &CvrpInstance, order: &[usize]) -> f64 {
    let mut prev = 0;
    let mut c = 0.0;
    for &s in order {
        c += inst.cost(prev, s);
        prev = s;
    }
    c + inst.cost(prev, 0)
}

/// Every permutation of `items` (Heap's algorithm).
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a = items.to_vec();
    let mut out = Vec::new();
    heap(a.len(), &mut a, &mut out);
    out
}

/// Optimal TSP tour cost through the depot and `stops`, by enumeration.
pub fn optimal_tour(inst: &CvrpInstance, stops: &[usize]) -> f64 {
    permutations(stops).iter().map(|p| tour_cost(inst, p)).fold(f64::INFINITY, f64::min)
}

/// Exact CVRP optimum using at most `max_routes` routes.
///
/// Held-Karp gives the cheapest closed tour for every customer subset; a
/// second dynamic programme over subsets then partitions all customers into
/// capacity-feasible routes.
pub fn exact_cvrp(inst: &CvrpInstance, max_routes: usize) -> f64 {
    let n = inst.num_customers();
    assert!(n <= 12, "oracle is exponential");
    let full = (1usize << n) - 1;
    let id = |bit: usize| bit + 1;
    // path[mask][j]: cheapest depot -> ... -> j visiting exactly mask (j in mask).
    let mut path = vec![vec![f64::INFINITY; n]; 1 << n];
    for j in 0..n {
        path[1 << j][j] = inst.cost(0, id(j));
    }
    for mask in 1..=full {
        for j in 0..n {
            let here = path[mask][j];
            if mask & (1 << j) == 0 || here.is_infinite() {
                continue;
            }
            for k in 0..n {
                if mask & (1 << k) == 0 {
                    let next = mask | (1 << k);
                    let c = here + inst.cost(id(j), id(k));
                    if c < path[next][k] {
                        path[next][k] = c;
                    }
                }
            }
        }
    }
    let mut route = vec![f64::INFINITY; 1 << n];
    for mask in 1..=full {
        let load: f64 = (0..n).filter(|j| mask & (1 << j) != 0).map(|j| inst.demand(id(j))).sum();
        if load <= inst.capacity + 1e-9 {
            route[mask] = (0..n)
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| path[mask][j] + inst.cost(id(j), 0))
                .fold(f64::INFINITY, f64::min);
        }
    }
    // best[k][mask]: cover mask with exactly k routes.
    let mut best = vec![vec![f64::INFINITY; 1 << n]; max_routes + 1];
    best[0][0] = 0.0;
    for k in 1..=max_routes {
        for mask in 1..=full {
            // The route holding the lowest customer of mask, to avoid double counting.
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            let mut sub = rest;
            loop {
                let r = sub | low;
                let prev = best[k - 1][mask ^ r];
                if prev.is_finite() && route[r].is_finite() {
                    let c = prev + route[r];
                    if c < best[k][mask] {
                        best[k][mask] = c;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
    }
    (1..=max_routes).map(|k| best[k][full]).fold(f64::INFINITY, f64::min)
}
