use std::collections::HashMap;

use crate::solution::Move;

/// Short-term memory keyed by `(customer, route)`.
///
/// Marking `(c, r)` forbids moves that would bring `c` back into route `r`
/// until the entry expires.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TabuList {
    expiry: HashMap<(usize, usize), usize>,
}

impl TabuList {
    pub fn new() -> TabuList {
        TabuList::default()
    }

    /// True while `expiry > iteration`.
    pub fn is_tabu(&self, customer: usize, route: usize, iteration: usize) -> bool {
        self.expiry.get(&(customer, route)).is_some_and(|&e| e > iteration)
    }

    /// A move is tabu when any customer it places lands in a route it was
    /// recently displaced from.
    pub fn forbids(&self, mv: &Move, iteration: usize) -> bool {
        mv.arrivals().into_iter().any(|(c, r)| self.is_tabu(c, r, iteration))
    }

    /// Sets (not extends) the expiry of `(customer, route)`.
    pub fn mark(&mut self, customer: usize, route: usize, expiry: usize) {
        self.expiry.insert((customer, route), expiry);
    }

    pub fn expiry(&self, customer: usize, route: usize) -> Option<usize> {
        self.expiry.get(&(customer, route)).copied()
    }

    /// Drops entries that are no longer tabu at `iteration`.
    pub fn purge(&mut self, iteration: usize) {
        self.expiry.retain(|_, &mut e| e > iteration);
    }

    pub fn len(&self) -> usize {
        self.expiry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expiry.is_empty()
    }
}

/// Records the selected move: every displaced `(customer, origin route)`
/// becomes tabu until `iteration + tenure`.
pub fn update_tabu(tabu: &mut TabuList, selected: &Move, iteration: usize, tenure: usize) {
    tabu.purge(iteration);
    for (c, r) in selected.displaced() {
        tabu.mark(c, r, iteration + tenure);
    }
}
