use thiserror::Error;

use crate::instance::CostMatrix;

/// Largest stop count the exhaustive solver accepts (10! orders).
pub const BRUTE_FORCE_MAX_STOPS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("exhaustive re-sequencing is limited to {BRUTE_FORCE_MAX_STOPS} stops, got {0}")]
pub struct TooManyStops(pub usize);

/// Exact cyclic tour over `depot` and `stops` with the depot first.
///
/// Orders are enumerated lexicographically over the sorted stops and only a
/// strictly cheaper order replaces the incumbent, so ties go to the
/// lexicographically smallest order.
pub fn brute_force_tsp(depot: usize, stops: &[usize], costs: &CostMatrix) -> Result<(Vec<usize>, f64), TooManyStops> {
    if stops.len() > BRUTE_FORCE_MAX_STOPS {
        return Err(TooManyStops(stops.len()));
    }
    let mut order = stops.to_vec();
    order.sort_unstable();
    if order.is_empty() {
        return Ok((order, 0.0));
    }
    let tour = |o: &[usize]| {
        let mut c = costs.get(depot, o[0]);
        for w in o.windows(2) {
            c += costs.get(w[0], w[1]);
        }
        c + costs.get(o[o.len() - 1], depot)
    };
    let mut best = (order.clone(), tour(&order));
    while next_permutation(&mut order) {
        let c = tour(&order);
        if c < best.1 {
            best = (order.clone(), c);
        }
    }
    Ok(best)
}

/// Advances `v` to its next lexicographic permutation; false after the last.
pub(crate) fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::CvrpInstance;

    fn square() -> CvrpInstance {
        CvrpInstance::from_coords(
            "sq",
            &[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)],
            &[0.0, 1.0, 1.0, 1.0],
            10.0,
            None,
        )
        .unwrap()
    }

    #[test]
    fn one_stop_is_out_and_back() {
        let inst = square();
        let (o, c) = brute_force_tsp(0, &[2], &inst.costs).unwrap();
        assert_eq!(o, vec![2]);
        assert!((c - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn two_stops_return_lexicographic_order() {
        let inst = square();
        assert_eq!(brute_force_tsp(0, &[3, 1], &inst.costs).unwrap().0, vec![1, 3]);
    }

    #[test]
    fn square_perimeter() {
        let inst = square();
        let (o, c) = brute_force_tsp(0, &[2, 3, 1], &inst.costs).unwrap();
        assert!((c - 4.0).abs() < 1e-12);
        assert_eq!(o, vec![1, 2, 3]);
    }

    #[test]
    fn guard() {
        let inst = square();
        let stops: Vec<usize> = (0..11).collect();
        assert_eq!(brute_force_tsp(0, &stops, &inst.costs).unwrap_err(), TooManyStops(11));
    }

    #[test]
    fn permutation_count() {
        let mut v = vec![1, 2, 3, 4];
        let mut n = 1;
        while next_permutation(&mut v) {
            n += 1;
        }
        assert_eq!(n, 24);
    }
}
