//! Route and solution model, cost evaluation, feasibility checks and moves.
//!
//! Routes are open stop sequences; the depot is implicit at both ends, so
//! every route starts and ends at the depot and cannot contain a subtour.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::CvrpInstance;

/// Tolerance for treating two costs as equal.
pub const COST_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoveError {
    #[error("stale move: customer {customer} is not at position {position} of route {route}")]
    Stale { customer: usize, route: usize, position: usize },
    #[error("route index {0} out of range")]
    NoSuchRoute(usize),
}

/// One vehicle's visit sequence with cached load and cost.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Route {
    pub stops: Vec<usize>,
    pub load: f64,
    pub cost: f64,
}

impl Route {
    pub fn new(stops: Vec<usize>, instance: &CvrpInstance) -> Route {
        let mut route = Route {
            stops,
            load: 0.0,
            cost: 0.0,
        };
        route.refresh(instance);
        route
    }

    pub fn empty() -> Route {
        Route::default()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    pub fn len(&self) -> usize {
        self.stops.len()
    }

    /// Recomputes load and cost from the stop list.
    pub fn refresh(&mut self, instance: &CvrpInstance) {
        self.load = self.stops.iter().map(|&s| instance.demand(s)).sum();
        self.cost = route_cost(&self.stops, instance);
    }

    /// Capacity excess `max(0, load - Q)`.
    pub fn excess(&self, capacity: f64) -> f64 {
        (self.load - capacity).max(0.0)
    }

    /// Node before position `pos` (the depot at the front).
    #[inline]
    pub fn prev(&self, pos: usize) -> usize {
        if pos == 0 {
            0
        } else {
            self.stops[pos - 1]
        }
    }

    /// Node after position `pos` (the depot at the back).
    #[inline]
    pub fn next(&self, pos: usize) -> usize {
        self.stops.get(pos + 1).copied().unwrap_or(0)
    }
}

/// Cost of depot → stops → depot.
pub fn route_cost(stops: &[usize], instance: &CvrpInstance) -> f64 {
    let mut prev = 0;
    let mut total = 0.0;
    for &s in stops {
        total += instance.cost(prev, s);
        prev = s;
    }
    total + instance.cost(prev, 0)
}

/// Cheapest position to insert `customer` into `stops`, ignoring the stop at
/// index `skip`. Returns the insertion index in the list *without* the
/// skipped stop, and the cost increase. Ties go to the lowest index.
pub fn cheapest_insertion(stops: &[usize], skip: Option<usize>, customer: usize, instance: &CvrpInstance) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    let mut prev = 0;
    let mut idx = 0;
    for (pos, &s) in stops.iter().enumerate() {
        if Some(pos) == skip {
            continue;
        }
        let delta = instance.cost(prev, customer) + instance.cost(customer, s) - instance.cost(prev, s);
        if delta < best.1 {
            best = (idx, delta);
        }
        prev = s;
        idx += 1;
    }
    let delta = instance.cost(prev, customer) + instance.cost(customer, 0) - instance.cost(prev, 0);
    if delta < best.1 {
        best = (idx, delta);
    }
    best
}

/// A set of exactly `fleet` routes.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub total_cost: f64,
    /// Cached `Σ max(0, load - Q)`.
    pub infeasibility: f64,
}

impl Solution {
    /// Builds a solution from stop lists, padding with empty routes up to
    /// `fleet`.
    pub fn from_routes(routes: Vec<Vec<usize>>, fleet: usize, instance: &CvrpInstance) -> Solution {
        let mut routes: Vec<Route> = routes.into_iter().map(|r| Route::new(r, instance)).collect();
        while routes.len() < fleet {
            routes.push(Route::empty());
        }
        let mut s = Solution {
            routes,
            total_cost: 0.0,
            infeasibility: 0.0,
        };
        s.refresh_totals(instance);
        s
    }

    pub fn refresh_totals(&mut self, instance: &CvrpInstance) {
        self.total_cost = self.routes.iter().map(|r| r.cost).sum();
        self.infeasibility = self.routes.iter().map(|r| r.excess(instance.capacity)).sum();
    }

    /// Capacity-feasible (coverage is maintained by construction).
    pub fn is_feasible(&self) -> bool {
        self.infeasibility <= COST_EPS
    }

    /// Number of nonempty routes.
    pub fn vehicles_used(&self) -> usize {
        self.routes.iter().filter(|r| !r.is_empty()).count()
    }

    /// `route_of[c]` for every location id (`usize::MAX` for unrouted ids).
    pub fn route_index(&self, n: usize) -> Vec<usize> {
        let mut idx = vec![usize::MAX; n];
        for (r, route) in self.routes.iter().enumerate() {
            for &s in &route.stops {
                idx[s] = r;
            }
        }
        idx
    }

    /// Applies a move; touched routes are refreshed and totals updated.
    pub fn apply(&mut self, mv: &Move, instance: &CvrpInstance) -> Result<(), MoveError> {
        mv.validate(self)?;
        match mv.kind {
            MoveKind::Relocate => {
                let c = self.routes[mv.from_route].stops.remove(mv.from_pos);
                self.routes[mv.to_route].stops.insert(mv.to_pos, c);
            }
            MoveKind::IntraSwap => {
                self.routes[mv.from_route].stops.swap(mv.from_pos, mv.to_pos);
            }
            MoveKind::InterSwap => {
                let (a_ins, b_ins) = mv.insert_at.expect("inter swap carries insertion points");
                let a = self.routes[mv.from_route].stops.remove(mv.from_pos);
                let b = self.routes[mv.to_route].stops.remove(mv.to_pos);
                self.routes[mv.to_route].stops.insert(a_ins, a);
                self.routes[mv.from_route].stops.insert(b_ins, b);
            }
        }
        let touched: &[usize] = if mv.from_route == mv.to_route {
            &[mv.from_route]
        } else {
            &[mv.from_route, mv.to_route]
        };
        for &r in touched {
            self.routes[r].refresh(instance);
        }
        // Summing K cached route costs keeps the total free of drift.
        self.refresh_totals(instance);
        Ok(())
    }

    /// Functional form of [`Solution::apply`].
    pub fn with_move(&self, mv: &Move, instance: &CvrpInstance) -> Result<Solution, MoveError> {
        let mut next = self.clone();
        next.apply(mv, instance)?;
        Ok(next)
    }
}

/// Total route cost.
pub fn solution_cost(solution: &Solution, instance: &CvrpInstance) -> f64 {
    solution.routes.iter().map(|r| route_cost(&r.stops, instance)).sum()
}

/// `Σ max(0, load - Q)` over routes, recomputed from stops.
pub fn infeasibility_measure(solution: &Solution, instance: &CvrpInstance) -> f64 {
    solution
        .routes
        .iter()
        .map(|r| {
            let load: f64 = r.stops.iter().map(|&s| instance.demand(s)).sum();
            (load - instance.capacity).max(0.0)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingCustomer { customer: usize },
    DuplicateCustomer { customer: usize },
    UnknownLocation { id: usize },
    Capacity { route: usize, load: f64, capacity: f64 },
    Fleet { routes: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Checks coverage, capacity and (when given) the fleet bound. Only
/// nonempty routes count against the fleet.
pub fn check_feasibility(solution: &Solution, instance: &CvrpInstance, fleet_limit: Option<usize>) -> FeasibilityReport {
    let mut violations = Vec::new();
    let mut seen = vec![0usize; instance.len()];
    for route in &solution.routes {
        for &s in &route.stops {
            if s == 0 || s >= instance.len() {
                violations.push(Violation::UnknownLocation { id: s });
            } else {
                seen[s] += 1;
            }
        }
    }
    for c in instance.customers() {
        match seen[c] {
            0 => violations.push(Violation::MissingCustomer { customer: c }),
            1 => {}
            _ => violations.push(Violation::DuplicateCustomer { customer: c }),
        }
    }
    for (r, route) in solution.routes.iter().enumerate() {
        let load: f64 = route
            .stops
            .iter()
            .filter(|&&s| s < instance.len())
            .map(|&s| instance.demand(s))
            .sum();
        if load > instance.capacity + COST_EPS {
            violations.push(Violation::Capacity {
                route: r,
                load,
                capacity: instance.capacity,
            });
        }
    }
    if let Some(limit) = fleet_limit {
        let used = solution.vehicles_used();
        if used > limit {
            violations.push(Violation::Fleet { routes: used, limit });
        }
    }
    FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoveKind {
    /// (1,0): move one customer to another route at its cheapest position.
    Relocate,
    /// (0,1): swap two positions within one route.
    IntraSwap,
    /// (1,1): exchange customers between two routes, each reinserted at its
    /// cheapest position.
    InterSwap,
}

/// One local-search step.
///
/// * `Relocate`: `customer` leaves `from_route[from_pos]` and is inserted at
///   index `to_pos` of `to_route`.
/// * `IntraSwap`: `from_route == to_route`; positions `from_pos < to_pos`
///   exchange, `partner` is the stop at `to_pos`.
/// * `InterSwap`: `customer` at `from_route[from_pos]` and `partner` at
///   `to_route[to_pos]` leave their routes; `insert_at = (i, j)` places
///   `customer` at index `i` of the reduced `to_route` and `partner` at
///   index `j` of the reduced `from_route`.
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub kind: MoveKind,
    pub customer: usize,
    pub partner: Option<usize>,
    pub from_route: usize,
    pub from_pos: usize,
    pub to_route: usize,
    pub to_pos: usize,
    pub insert_at: Option<(usize, usize)>,
    pub delta_cost: f64,
    pub delta_infeasibility: f64,
}

impl Move {
    fn validate(&self, s: &Solution) -> Result<(), MoveError> {
        for r in [self.from_route, self.to_route] {
            if r >= s.routes.len() {
                return Err(MoveError::NoSuchRoute(r));
            }
        }
        let at = |route: usize, pos: usize, who: usize| -> Result<(), MoveError> {
            if s.routes[route].stops.get(pos) == Some(&who) {
                Ok(())
            } else {
                Err(MoveError::Stale {
                    customer: who,
                    route,
                    position: pos,
                })
            }
        };
        at(self.from_route, self.from_pos, self.customer)?;
        match self.kind {
            MoveKind::Relocate => {
                let room = s.routes[self.to_route].len();
                if self.from_route == self.to_route || self.to_pos > room {
                    return Err(MoveError::Stale {
                        customer: self.customer,
                        route: self.to_route,
                        position: self.to_pos,
                    });
                }
            }
            MoveKind::IntraSwap | MoveKind::InterSwap => {
                let partner = self.partner.expect("swap moves carry a partner");
                at(self.to_route, self.to_pos, partner)?;
            }
        }
        Ok(())
    }

    /// The move that restores the solution this move was applied to.
    pub fn inverse(&self) -> Move {
        match self.kind {
            MoveKind::Relocate => Move {
                from_route: self.to_route,
                from_pos: self.to_pos,
                to_route: self.from_route,
                to_pos: self.from_pos,
                delta_cost: -self.delta_cost,
                delta_infeasibility: -self.delta_infeasibility,
                ..self.clone()
            },
            MoveKind::IntraSwap => Move {
                customer: self.partner.expect("swap partner"),
                partner: Some(self.customer),
                delta_cost: -self.delta_cost,
                delta_infeasibility: -self.delta_infeasibility,
                ..self.clone()
            },
            MoveKind::InterSwap => {
                let (a_ins, b_ins) = self.insert_at.expect("insertion points");
                Move {
                    kind: MoveKind::InterSwap,
                    customer: self.partner.expect("swap partner"),
                    partner: Some(self.customer),
                    from_route: self.from_route,
                    from_pos: b_ins,
                    to_route: self.to_route,
                    to_pos: a_ins,
                    insert_at: Some((self.to_pos, self.from_pos)),
                    delta_cost: -self.delta_cost,
                    delta_infeasibility: -self.delta_infeasibility,
                }
            }
        }
    }

    /// Customers that leave a route, with the route they leave.
    pub fn displaced(&self) -> Vec<(usize, usize)> {
        match self.kind {
            MoveKind::Relocate => vec![(self.customer, self.from_route)],
            MoveKind::IntraSwap => vec![
                (self.customer, self.from_route),
                (self.partner.expect("swap partner"), self.from_route),
            ],
            MoveKind::InterSwap => vec![
                (self.customer, self.from_route),
                (self.partner.expect("swap partner"), self.to_route),
            ],
        }
    }

    /// Customers with the route each ends up in.
    pub fn arrivals(&self) -> Vec<(usize, usize)> {
        match self.kind {
            MoveKind::Relocate => vec![(self.customer, self.to_route)],
            MoveKind::IntraSwap => self.displaced(),
            MoveKind::InterSwap => vec![
                (self.customer, self.to_route),
                (self.partner.expect("swap partner"), self.from_route),
            ],
        }
    }

    /// Deterministic ordering among moves with equal objective value:
    /// customer id, origin route, destination route, position.
    pub fn tie_key(&self) -> (usize, usize, usize, usize, usize, MoveKind) {
        (
            self.customer,
            self.from_route,
            self.to_route,
            self.to_pos,
            self.partner.unwrap_or(0),
            self.kind,
        )
    }
}

/// Serializable form of a solution in file-id space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub instance_name: String,
    pub total_cost: f64,
    pub vehicles_used: usize,
    pub feasible: bool,
    pub seed: u64,
    /// Kept out of the deterministic document by default; see
    /// [`SolutionDocument::without_timing`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wallclock_seconds: Option<f64>,
    /// Nonempty routes in visit order, as file ids (depot omitted).
    pub routes: Vec<Vec<usize>>,
}

impl SolutionDocument {
    pub fn new(solution: &Solution, instance: &CvrpInstance, seed: u64, wallclock: Option<f64>) -> Self {
        let report = check_feasibility(solution, instance, None);
        SolutionDocument {
            instance_name: instance.name.clone(),
            total_cost: round2(solution_cost(solution, instance)),
            vehicles_used: solution.vehicles_used(),
            feasible: report.feasible,
            seed,
            wallclock_seconds: wallclock,
            routes: solution
                .routes
                .iter()
                .filter(|r| !r.is_empty())
                .map(|r| r.stops.iter().map(|&s| instance.file_ids[s]).collect())
                .collect(),
        }
    }

    pub fn without_timing(mut self) -> Self {
        self.wallclock_seconds = None;
        self
    }

    /// Rebuilds the solution against `instance`, mapping file ids back.
    pub fn to_solution(&self, instance: &CvrpInstance) -> Result<Solution, String> {
        let mut routes = Vec::with_capacity(self.routes.len());
        let mut seen = HashSet::new();
        for r in &self.routes {
            let mut stops = Vec::with_capacity(r.len());
            for &f in r {
                let id = instance.internal_id(f).ok_or_else(|| format!("unknown node id {f} in solution"))?;
                if !seen.insert(id) {
                    return Err(format!("node {f} appears twice"));
                }
                stops.push(id);
            }
            routes.push(stops);
        }
        Ok(Solution::from_routes(routes, 0, instance))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }
}

/// Display rounding for distances.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}
