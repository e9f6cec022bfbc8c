//! CVRP instances: parsing, cost matrices, nearest-neighbor lists and
//! best-known-solution metadata.
//!
//! Instances are read from a TSPLIB-style text format. Two edge-weight
//! flavours are supported:
//!
//! * `EUC_2D`: node coordinates, Euclidean costs kept at full double
//!   precision (no TSPLIB `nint` rounding).
//! * `EXPLICIT` with `EDGE_WEIGHT_FORMAT : FULL_MATRIX`: the cost matrix is
//!   given row-major in `EDGE_WEIGHT_SECTION`.
//!
//! Whatever numbering the file uses, the depot is renumbered to internal id
//! `0` and the remaining nodes keep their relative file order. The original
//! ids are retained in [`CvrpInstance::file_ids`] for output.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

/// Errors raised while reading or validating an instance.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Validation(String),
    #[error("location {0} has no coordinates")]
    MissingCoordinates(usize),
    #[error("i/o error: {0}")]
    Io(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> InstanceError {
    InstanceError::Parse {
        line,
        message: message.into(),
    }
}

/// A depot or customer.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    /// Dense internal id, `0` is the depot.
    pub id: usize,
    /// Planar coordinates, absent for explicit-matrix instances.
    pub coords: Option<(f64, f64)>,
    pub demand: f64,
}

/// Symmetric, zero-diagonal, non-negative cost matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// Builds a matrix from full rows and checks the matrix invariants.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, InstanceError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(InstanceError::Validation(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Self::from_flat(n, entries)
    }

    fn from_flat(n: usize, entries: Vec<f64>) -> Result<Self, InstanceError> {
        debug_assert_eq!(entries.len(), n * n);
        let m = CostMatrix { n, entries };
        for i in 0..n {
            if m.get(i, i) != 0.0 {
                return Err(InstanceError::Validation(format!(
                    "diagonal entry ({i},{i}) is {} (must be 0)",
                    m.get(i, i)
                )));
            }
            for j in 0..n {
                let c = m.get(i, j);
                if !c.is_finite() || c < 0.0 {
                    return Err(InstanceError::Validation(format!(
                        "cost ({i},{j}) = {c} is not a finite non-negative number"
                    )));
                }
                if c != m.get(j, i) {
                    return Err(InstanceError::Validation(format!(
                        "cost matrix is asymmetric at ({i},{j}): {c} vs {}",
                        m.get(j, i)
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Largest entry among the given nodes.
    pub fn max_among(&self, nodes: &[usize]) -> f64 {
        let mut best = 0.0f64;
        for &i in nodes {
            for &j in nodes {
                best = best.max(self.get(i, j));
            }
        }
        best
    }
}

/// Euclidean distances at full double precision.
pub fn euclidean_costs(locations: &[Location]) -> Result<CostMatrix, InstanceError> {
    let coords = locations
        .iter()
        .map(|l| l.coords.ok_or(InstanceError::MissingCoordinates(l.id)))
        .collect::<Result<Vec<_>, _>>()?;
    let n = coords.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (dx, dy) = (coords[i].0 - coords[j].0, coords[i].1 - coords[j].1);
            let d = (dx * dx + dy * dy).sqrt();
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    CostMatrix::from_flat(n, entries)
}

/// Best-known solution metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bks {
    pub distance: f64,
    pub vehicles: usize,
}

const BKS_REGISTRY: &[(&str, f64, usize)] = &[
    ("CMT1", 524.61, 5),
    ("CMT2", 835.26, 10),
    ("CMT3", 826.14, 8),
    ("CMT4", 1028.42, 12),
    ("CMT5", 1291.29, 17),
    ("CMT11", 1042.12, 7),
    ("CMT12", 819.56, 10),
];

/// Looks up the embedded best-known solution for a benchmark name.
///
/// Matching ignores case, whitespace, `-` and `_`, so `CMT1`, `cmt 1` and
/// `CMT-1` all resolve to the same entry.
pub fn known_bks(name: &str) -> Option<Bks> {
    let key: String = name
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '-' && *c != '_')
        .flat_map(char::to_uppercase)
        .collect();
    BKS_REGISTRY
        .iter()
        .find(|(n, _, _)| *n == key)
        .map(|&(_, distance, vehicles)| Bks { distance, vehicles })
}

/// Edge-weight flavour of an instance file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Coord,
    ExplicitMatrix,
}

impl InstanceFormat {
    /// Reads `EDGE_WEIGHT_TYPE` from the header, defaulting to coordinates.
    pub fn detect(text: &str) -> InstanceFormat {
        for line in text.lines() {
            if let Some((key, value)) = split_header(line) {
                if key == "EDGE_WEIGHT_TYPE" && value.eq_ignore_ascii_case("EXPLICIT") {
                    return InstanceFormat::ExplicitMatrix;
                }
            }
        }
        InstanceFormat::Coord
    }
}

/// A capacitated vehicle routing problem with a single depot (id 0).
#[derive(Debug, Clone)]
pub struct CvrpInstance {
    pub name: String,
    pub locations: Vec<Location>,
    pub costs: CostMatrix,
    pub capacity: f64,
    /// Vehicle count `K`: the `VEHICLES` header, else the BKS vehicle
    /// count, else the capacity lower bound.
    pub fleet_size: usize,
    pub bks: Option<Bks>,
    /// `file_ids[internal]` is the node id used in the source file.
    pub file_ids: Vec<usize>,
}

impl CvrpInstance {
    /// Assembles an instance from already-dense locations (depot first).
    pub fn new(
        name: impl Into<String>,
        locations: Vec<Location>,
        costs: CostMatrix,
        capacity: f64,
        fleet_size: Option<usize>,
    ) -> Result<Self, InstanceError> {
        let name = name.into();
        let bks = known_bks(&name);
        let file_ids = (0..locations.len()).map(|i| i + 1).collect();
        Self::assemble(name, locations, costs, capacity, fleet_size, bks, file_ids)
    }

    /// Builds a coordinate instance; location 0 is the depot.
    pub fn from_coords(
        name: impl Into<String>,
        coords: &[(f64, f64)],
        demands: &[f64],
        capacity: f64,
        fleet_size: Option<usize>,
    ) -> Result<Self, InstanceError> {
        if coords.len() != demands.len() {
            return Err(InstanceError::Validation("coordinate and demand counts differ".into()));
        }
        let locations: Vec<Location> = coords
            .iter()
            .zip(demands)
            .enumerate()
            .map(|(id, (&c, &demand))| Location {
                id,
                coords: Some(c),
                demand,
            })
            .collect();
        let costs = euclidean_costs(&locations)?;
        Self::new(name, locations, costs, capacity, fleet_size)
    }

    fn assemble(
        name: String,
        locations: Vec<Location>,
        costs: CostMatrix,
        capacity: f64,
        fleet_size: Option<usize>,
        bks: Option<Bks>,
        file_ids: Vec<usize>,
    ) -> Result<Self, InstanceError> {
        if locations.is_empty() {
            return Err(InstanceError::Validation("instance has no depot".into()));
        }
        if locations.len() != costs.len() {
            return Err(InstanceError::Validation(format!(
                "{} locations but a {}-node cost matrix",
                locations.len(),
                costs.len()
            )));
        }
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(InstanceError::Validation(format!("capacity must be positive, got {capacity}")));
        }
        if locations[0].demand != 0.0 {
            return Err(InstanceError::Validation(format!(
                "depot demand must be 0, got {}",
                locations[0].demand
            )));
        }
        for (i, l) in locations.iter().enumerate() {
            if l.id != i {
                return Err(InstanceError::Validation(format!(
                    "location ids must be dense, found {} at index {i}",
                    l.id
                )));
            }
            if !(l.demand.is_finite() && l.demand >= 0.0) {
                return Err(InstanceError::Validation(format!("location {i} has invalid demand {}", l.demand)));
            }
            if l.demand > capacity {
                return Err(InstanceError::Validation(format!(
                    "customer {} demand {} exceeds capacity {capacity}",
                    file_ids[i], l.demand
                )));
            }
        }
        let total: f64 = locations.iter().map(|l| l.demand).sum();
        let lower_bound = ((total / capacity).ceil() as usize).max(1);
        let fleet_size = fleet_size.or(bks.map(|b| b.vehicles)).unwrap_or(lower_bound).max(1);
        Ok(CvrpInstance {
            name,
            locations,
            costs,
            capacity,
            fleet_size,
            bks,
            file_ids,
        })
    }

    /// Number of locations including the depot.
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn num_customers(&self) -> usize {
        self.locations.len() - 1
    }

    pub fn customers(&self) -> impl Iterator<Item = usize> {
        1..self.locations.len()
    }

    #[inline]
    pub fn demand(&self, id: usize) -> f64 {
        self.locations[id].demand
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.costs.get(i, j)
    }

    pub fn total_demand(&self) -> f64 {
        self.locations.iter().map(|l| l.demand).sum()
    }

    pub fn has_coordinates(&self) -> bool {
        self.locations.iter().all(|l| l.coords.is_some())
    }

    /// Vehicles needed by total demand alone.
    pub fn capacity_lower_bound(&self) -> usize {
        ((self.total_demand() / self.capacity).ceil() as usize).max(1)
    }

    /// Fleet used by the tabu search: one more than the BKS vehicle count
    /// when known, else one more than the capacity lower bound.
    pub fn default_search_fleet(&self) -> usize {
        match self.bks {
            Some(b) => b.vehicles + 1,
            None => self.capacity_lower_bound() + 1,
        }
    }

    /// Internal id for a file id.
    pub fn internal_id(&self, file_id: usize) -> Option<usize> {
        self.file_ids.iter().position(|&f| f == file_id)
    }

    /// Writes the instance back out in the same text grammar.
    pub fn to_tsplib(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME : {}", self.name);
        let _ = writeln!(out, "TYPE : CVRP");
        let _ = writeln!(out, "DIMENSION : {}", self.len());
        let _ = writeln!(out, "CAPACITY : {}", self.capacity);
        let _ = writeln!(out, "VEHICLES : {}", self.fleet_size);
        if let Some(b) = self.bks {
            let _ = writeln!(out, "BEST_KNOWN : {} {}", b.distance, b.vehicles);
        }
        if self.has_coordinates() {
            let _ = writeln!(out, "EDGE_WEIGHT_TYPE : EUC_2D");
            let _ = writeln!(out, "NODE_COORD_SECTION");
            for (l, fid) in self.locations.iter().zip(&self.file_ids) {
                let (x, y) = l.coords.expect("checked above");
                let _ = writeln!(out, "{fid} {x:?} {y:?}");
            }
        } else {
            let _ = writeln!(out, "EDGE_WEIGHT_TYPE : EXPLICIT");
            let _ = writeln!(out, "EDGE_WEIGHT_FORMAT : FULL_MATRIX");
            let _ = writeln!(out, "EDGE_WEIGHT_SECTION");
            for i in 0..self.len() {
                let row: Vec<String> = self.costs.row(i).iter().map(|c| format!("{c:?}")).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
        let _ = writeln!(out, "DEMAND_SECTION");
        for (l, fid) in self.locations.iter().zip(&self.file_ids) {
            let _ = writeln!(out, "{fid} {:?}", l.demand);
        }
        let _ = writeln!(out, "DEPOT_SECTION");
        let _ = writeln!(out, "{}", self.file_ids[0]);
        let _ = writeln!(out, "-1");
        let _ = writeln!(out, "EOF");
        out
    }

    /// Reads and parses a file, detecting the edge-weight format.
    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self, InstanceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| InstanceError::Io(format!("{}: {e}", path.display())))?;
        text.parse()
    }
}

impl FromStr for CvrpInstance {
    type Err = InstanceError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        parse_instance(text, InstanceFormat::detect(text))
    }
}

fn split_header(line: &str) -> Option<(String, &str)> {
    let (key, value) = line.split_once(':')?;
    Some((key.trim().to_ascii_uppercase(), value.trim()))
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Coords,
    Demands,
    Weights,
    Depot,
    Done,
}

/// Parses the TSPLIB-style instance grammar.
///
/// `format` must agree with the file's `EDGE_WEIGHT_TYPE` when one is given.
pub fn parse_instance(text: &str, format: InstanceFormat) -> Result<CvrpInstance, InstanceError> {
    let mut name = String::from("unnamed");
    let mut dimension: Option<usize> = None;
    let mut capacity: Option<f64> = None;
    let mut vehicles: Option<usize> = None;
    let mut best_known: Option<Bks> = None;
    let mut declared: Option<InstanceFormat> = None;

    let mut coords: Vec<(usize, f64, f64)> = Vec::new();
    let mut demands: Vec<(usize, f64)> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut depots: Vec<usize> = Vec::new();
    let mut section = Section::Header;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let upper = line.to_ascii_uppercase();
        match upper.as_str() {
            "NODE_COORD_SECTION" => {
                section = Section::Coords;
                continue;
            }
            "DEMAND_SECTION" => {
                section = Section::Demands;
                continue;
            }
            "EDGE_WEIGHT_SECTION" => {
                section = Section::Weights;
                continue;
            }
            "DEPOT_SECTION" => {
                section = Section::Depot;
                continue;
            }
            "EOF" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        if section == Section::Done {
            break;
        }
        // A header line may appear after a section in loosely written files.
        if line.contains(':') && !line.starts_with('-') {
            if let Some((key, value)) = split_header(line) {
                if key.chars().all(|c| c.is_ascii_alphabetic() || c == '_') {
                    section = Section::Header;
                    match key.as_str() {
                        "NAME" => name = value.to_string(),
                        "TYPE" => {
                            if !value.eq_ignore_ascii_case("CVRP") {
                                return Err(parse_err(line_no, format!("unsupported TYPE {value}")));
                            }
                        }
                        "DIMENSION" => dimension = Some(parse_num(value, line_no)?),
                        "CAPACITY" => capacity = Some(parse_num(value, line_no)?),
                        "VEHICLES" => vehicles = Some(parse_num(value, line_no)?),
                        "BEST_KNOWN" => {
                            let mut parts = value.split_whitespace();
                            let distance = parse_num(parts.next().ok_or_else(|| parse_err(line_no, "empty BEST_KNOWN"))?, line_no)?;
                            let vehicles = match parts.next() {
                                Some(v) => parse_num(v, line_no)?,
                                None => 0,
                            };
                            best_known = Some(Bks { distance, vehicles });
                        }
                        "EDGE_WEIGHT_TYPE" => {
                            declared = Some(match value.to_ascii_uppercase().as_str() {
                                "EUC_2D" => InstanceFormat::Coord,
                                "EXPLICIT" => InstanceFormat::ExplicitMatrix,
                                other => return Err(parse_err(line_no, format!("unsupported EDGE_WEIGHT_TYPE {other}"))),
                            })
                        }
                        "EDGE_WEIGHT_FORMAT" => {
                            if !value.eq_ignore_ascii_case("FULL_MATRIX") {
                                return Err(parse_err(line_no, format!("unsupported EDGE_WEIGHT_FORMAT {value}")));
                            }
                        }
                        // COMMENT and other informational keys are ignored.
                        _ => {}
                    }
                    continue;
                }
            }
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::Header => {
                return Err(parse_err(line_no, format!("unexpected line `{line}`")));
            }
            Section::Coords => {
                if fields.len() != 3 {
                    return Err(parse_err(line_no, "expected `id x y`"));
                }
                coords.push((
                    parse_num(fields[0], line_no)?,
                    parse_num(fields[1], line_no)?,
                    parse_num(fields[2], line_no)?,
                ));
            }
            Section::Demands => {
                if fields.len() != 2 {
                    return Err(parse_err(line_no, "expected `id demand`"));
                }
                demands.push((parse_num(fields[0], line_no)?, parse_num(fields[1], line_no)?));
            }
            Section::Weights => {
                for f in fields {
                    weights.push(parse_num(f, line_no)?);
                }
            }
            Section::Depot => {
                for f in fields {
                    let v: i64 = parse_num(f, line_no)?;
                    if v >= 0 {
                        depots.push(v as usize);
                    }
                }
            }
            Section::Done => unreachable!(),
        }
    }

    if let Some(d) = declared {
        if d != format {
            return Err(InstanceError::Validation(format!(
                "file declares {d:?} edge weights but {format:?} was requested"
            )));
        }
    }
    let dimension = dimension.ok_or_else(|| InstanceError::Validation("missing DIMENSION".into()))?;
    let capacity = capacity.ok_or_else(|| InstanceError::Validation("missing CAPACITY".into()))?;
    if demands.len() != dimension {
        return Err(InstanceError::Validation(format!(
            "DEMAND_SECTION has {} entries, DIMENSION is {dimension}",
            demands.len()
        )));
    }

    // File ids in file order; the depot moves to the front.
    let mut file_ids: Vec<usize> = demands.iter().map(|&(id, _)| id).collect();
    let depot_file = match depots.as_slice() {
        [] => file_ids[0],
        [d] => *d,
        _ => return Err(InstanceError::Validation("multi-depot instances are not supported".into())),
    };
    let depot_pos = file_ids
        .iter()
        .position(|&f| f == depot_file)
        .ok_or_else(|| InstanceError::Validation(format!("depot {depot_file} has no demand entry")))?;
    let mut order: Vec<usize> = (0..dimension).collect();
    order.remove(depot_pos);
    order.insert(0, depot_pos);
    let mut seen = std::collections::HashSet::new();
    for &f in &file_ids {
        if !seen.insert(f) {
            return Err(InstanceError::Validation(format!("duplicate node id {f}")));
        }
    }
    let demand_of: std::collections::HashMap<usize, f64> = demands.iter().copied().collect();
    file_ids = order.iter().map(|&p| file_ids[p]).collect();

    let (locations, costs) = match format {
        InstanceFormat::Coord => {
            if coords.len() != dimension {
                return Err(InstanceError::Validation(format!(
                    "NODE_COORD_SECTION has {} entries, DIMENSION is {dimension}",
                    coords.len()
                )));
            }
            let coord_of: std::collections::HashMap<usize, (f64, f64)> = coords.iter().map(|&(id, x, y)| (id, (x, y))).collect();
            let locations = file_ids
                .iter()
                .enumerate()
                .map(|(id, f)| {
                    let c = coord_of
                        .get(f)
                        .copied()
                        .ok_or_else(|| InstanceError::Validation(format!("node {f} has no coordinates")))?;
                    Ok(Location {
                        id,
                        coords: Some(c),
                        demand: demand_of[f],
                    })
                })
                .collect::<Result<Vec<_>, InstanceError>>()?;
            let costs = euclidean_costs(&locations)?;
            (locations, costs)
        }
        InstanceFormat::ExplicitMatrix => {
            if weights.len() != dimension * dimension {
                return Err(InstanceError::Validation(format!(
                    "EDGE_WEIGHT_SECTION has {} entries, expected {}",
                    weights.len(),
                    dimension * dimension
                )));
            }
            // Matrix rows follow the DEMAND_SECTION order of the file.
            let mut entries = Vec::with_capacity(dimension * dimension);
            for &pi in &order {
                for &pj in &order {
                    entries.push(weights[pi * dimension + pj]);
                }
            }
            let costs = CostMatrix::from_flat(dimension, entries)?;
            let locations = file_ids
                .iter()
                .enumerate()
                .map(|(id, f)| Location {
                    id,
                    coords: None,
                    demand: demand_of[f],
                })
                .collect();
            (locations, costs)
        }
    };

    // BEST_KNOWN overrides the registry; a missing vehicle count is filled
    // from the registry, then from the capacity lower bound.
    let registry = known_bks(&name);
    let bks = match best_known {
        Some(b) if b.vehicles == 0 => {
            let total: f64 = locations.iter().map(|l| l.demand).sum();
            let vehicles = registry.map(|r| r.vehicles).unwrap_or(((total / capacity).ceil() as usize).max(1));
            Some(Bks { vehicles, ..b })
        }
        Some(b) => Some(b),
        None => registry,
    };
    CvrpInstance::assemble(name, locations, costs, capacity, vehicles, bks, file_ids)
}

fn parse_num<T: FromStr>(s: &str, line: usize) -> Result<T, InstanceError> {
    s.parse().map_err(|_| parse_err(line, format!("`{s}` is not a valid number")))
}

/// Per-customer lists of the `k` nearest other customers.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborLists {
    k: usize,
    lists: Vec<Vec<usize>>,
}

impl NeighborLists {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Nearest customers of `id`, ascending by cost. Empty for the depot.
    pub fn of(&self, id: usize) -> &[usize] {
        &self.lists[id]
    }

    pub fn contains(&self, id: usize, other: usize) -> bool {
        self.lists[id].contains(&other)
    }
}

/// Computes the `k` nearest customers of every customer (ties by id).
/// `k` is clamped to the number of other customers.
pub fn nearest_neighbors(instance: &CvrpInstance, k: usize) -> NeighborLists {
    let n = instance.len();
    let mut lists = vec![Vec::new(); n];
    for i in instance.customers() {
        let row = instance.costs.row(i);
        let mut others: Vec<usize> = instance.customers().filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        others.truncate(k);
        lists[i] = others;
    }
    NeighborLists { k, lists }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TRIANGLE: &str = "\
NAME : tri
TYPE : CVRP
DIMENSION : 3
CAPACITY : 10
EDGE_WEIGHT_TYPE : EUC_2D
NODE_COORD_SECTION
1 0 0
2 3 4
3 0 5
DEMAND_SECTION
1 0
2 1
3 2
DEPOT_SECTION
1
-1
EOF
";

    #[test]
    fn parses_three_node_triangle() {
        let inst: CvrpInstance = TRIANGLE.parse().unwrap();
        assert_eq!(inst.len(), 3);
        assert_eq!(inst.cost(0, 1), 5.0);
        assert_eq!(inst.demand(2), 2.0);
        assert_eq!(inst.capacity, 10.0);
        assert_eq!(inst.fleet_size, 1);
        assert!(inst.bks.is_none());
    }

    #[test]
    fn euclidean_examples() {
        let locs = |pts: &[(f64, f64)]| -> Vec<Location> {
            pts.iter()
                .enumerate()
                .map(|(id, &c)| Location {
                    id,
                    coords: Some(c),
                    demand: 0.0,
                })
                .collect()
        };
        assert_eq!(euclidean_costs(&locs(&[(0.0, 0.0), (3.0, 4.0)])).unwrap().get(0, 1), 5.0);
        assert_eq!(euclidean_costs(&locs(&[(1.0, 1.0), (1.0, 1.0)])).unwrap().get(1, 0), 0.0);
        let missing = vec![Location {
            id: 0,
            coords: None,
            demand: 0.0,
        }];
        assert_eq!(euclidean_costs(&missing), Err(InstanceError::MissingCoordinates(0)));
    }

    #[test]
    fn explicit_matrix_is_copied() {
        let text = "NAME : m\nTYPE : CVRP\nDIMENSION : 2\nCAPACITY : 5\n\
EDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 7\n7 0\n\
DEMAND_SECTION\n1 0\n2 3\nDEPOT_SECTION\n1\n-1\nEOF\n";
        let inst = parse_instance(text, InstanceFormat::ExplicitMatrix).unwrap();
        assert_eq!(inst.cost(0, 1), 7.0);
        assert!(!inst.has_coordinates());
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let text = "NAME : m\nTYPE : CVRP\nDIMENSION : 2\nCAPACITY : 5\n\
EDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 7\n6 0\n\
DEMAND_SECTION\n1 0\n2 3\nDEPOT_SECTION\n1\n-1\nEOF\n";
        assert!(matches!(text.parse::<CvrpInstance>(), Err(InstanceError::Validation(m)) if m.contains("asymmetric")));
    }

    #[test]
    fn demand_over_capacity_rejected() {
        let text = TRIANGLE.replace("3 2\nDEPOT", "3 11\nDEPOT");
        assert!(matches!(text.parse::<CvrpInstance>(), Err(InstanceError::Validation(m)) if m.contains("exceeds capacity")));
    }

    #[test]
    fn malformed_line_names_line_number() {
        let text = TRIANGLE.replace("2 3 4", "2 three 4");
        match text.parse::<CvrpInstance>() {
            Err(InstanceError::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("expected parse error, got {other:?}"),
        }
        let text = TRIANGLE.replace("2 3 4", "2 3");
        assert!(matches!(text.parse::<CvrpInstance>(), Err(InstanceError::Parse { line: 8, .. })));
    }

    #[test]
    fn depot_is_renumbered_to_zero() {
        let text = TRIANGLE
            .replace("DEPOT_SECTION\n1\n", "DEPOT_SECTION\n3\n")
            .replace("1 0\n2 1\n3 2", "1 1\n2 2\n3 0");
        let inst: CvrpInstance = text.parse().unwrap();
        assert_eq!(inst.file_ids, vec![3, 1, 2]);
        assert_eq!(inst.locations[0].coords, Some((0.0, 5.0)));
        assert_eq!(inst.demand(0), 0.0);
        assert_eq!(inst.internal_id(2), Some(2));
    }

    #[test]
    fn bks_registry_and_override() {
        assert_eq!(
            known_bks("CMT1"),
            Some(Bks {
                distance: 524.61,
                vehicles: 5
            })
        );
        assert_eq!(known_bks("cmt 12").unwrap().vehicles, 10);
        assert_eq!(known_bks("CMT6"), None);
        let text = TRIANGLE.replace("NAME : tri", "NAME : CMT1\nBEST_KNOWN : 12.5 1");
        let inst: CvrpInstance = text.parse().unwrap();
        assert_eq!(
            inst.bks,
            Some(Bks {
                distance: 12.5,
                vehicles: 1
            })
        );
    }

    #[test]
    fn format_mismatch_rejected() {
        assert!(parse_instance(TRIANGLE, InstanceFormat::ExplicitMatrix).is_err());
    }

    #[test]
    fn collinear_neighbors() {
        let inst = CvrpInstance::from_coords(
            "line",
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (4.0, 0.0)],
            &[0.0, 1.0, 1.0, 1.0],
            10.0,
            None,
        )
        .unwrap();
        let nl = nearest_neighbors(&inst, 1);
        assert_eq!(nl.of(1), &[2]);
        assert_eq!(nl.of(3), &[2]);
        assert!(nl.of(0).is_empty());
        let wide = nearest_neighbors(&inst, inst.len() + 5);
        for c in inst.customers() {
            assert_eq!(wide.of(c).len(), inst.num_customers() - 1);
        }
    }

    #[test]
    fn neighbor_ties_break_by_id() {
        let inst = CvrpInstance::from_coords(
            "tie",
            &[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)],
            &[0.0, 1.0, 1.0, 1.0],
            10.0,
            None,
        )
        .unwrap();
        assert_eq!(nearest_neighbors(&inst, 2).of(1), &[2, 3]);
    }

    fn coords_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..25)
    }

    proptest! {
        #[test]
        fn euclidean_matrix_is_metric(pts in coords_strategy()) {
            let demands = vec![0.0; pts.len()];
            let inst = CvrpInstance::from_coords("p", &pts, &demands, 1.0, None).unwrap();
            let n = inst.len();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(inst.cost(i, j), inst.cost(j, i));
                    for k in 0..n {
                        prop_assert!(inst.cost(i, k) <= inst.cost(i, j) + inst.cost(j, k) + 1e-9);
                    }
                }
            }
        }

        #[test]
        fn neighbor_lists_sorted_and_sized(pts in coords_strategy(), k in 1usize..30) {
            let mut demands = vec![1.0; pts.len()];
            demands[0] = 0.0;
            let inst = CvrpInstance::from_coords("p", &pts, &demands, 100.0, None).unwrap();
            let nl = nearest_neighbors(&inst, k);
            for c in inst.customers() {
                let list = nl.of(c);
                prop_assert_eq!(list.len(), k.min(inst.num_customers() - 1));
                prop_assert!(!list.contains(&c) && !list.contains(&0));
                for w in list.windows(2) {
                    prop_assert!(inst.cost(c, w[0]) <= inst.cost(c, w[1]));
                }
            }
        }

        #[test]
        fn tsplib_round_trip_is_bit_exact(pts in coords_strategy(), seed in any::<u64>()) {
            let demands: Vec<f64> = (0..pts.len())
                .map(|i| if i == 0 { 0.0 } else { ((seed >> (i % 60)) & 7) as f64 + 0.25 })
                .collect();
            let inst = CvrpInstance::from_coords("rt", &pts, &demands, 50.0, Some(3)).unwrap();
            let back: CvrpInstance = inst.to_tsplib().parse().unwrap();
            prop_assert_eq!(&back.locations, &inst.locations);
            prop_assert_eq!(back.capacity, inst.capacity);
            prop_assert_eq!(back.fleet_size, 3);
        }
    }
}
