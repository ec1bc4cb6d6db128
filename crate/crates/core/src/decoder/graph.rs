//! The space-time error graph of a sector and the distance metrics used to
//! weight matching edges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::noise::ErrorHistory;
use crate::protocol::{DetectionEvent, DetectionEventSet};
use crate::topology::SectorLayout;

/// A single error location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fault {
    /// Data error on `qubit` in layer `layer` (just before round `layer`;
    /// layer `n_rounds` is after the last round).
    Data { layer: usize, qubit: usize },
    /// Flip of stabilizer `stabilizer`'s outcome in round `round`.
    Meas { round: usize, stabilizer: usize },
}

/// Node of the space-time graph: `(round, stabilizer)` or the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StNode {
    Check { round: usize, stabilizer: usize },
    Boundary,
}

#[derive(Debug, Clone, Copy)]
pub struct StEdge {
    pub a: usize,
    pub b: usize,
    pub fault: Fault,
    pub weight: f64,
    /// Bit `i` set when the fault flips witness `i`.
    pub witness_mask: u32,
}

/// Explicit space-time graph. Node `t * S + s` is stabilizer `s` at round
/// `t` (`t = n_rounds` is the final readout comparison); the last node is
/// the merged boundary.
#[derive(Debug, Clone)]
pub struct SpaceTimeGraph {
    pub n_rounds: usize,
    pub n_stabilizers: usize,
    pub edges: Vec<StEdge>,
    /// Faults whose both ends are boundary: undetectable, kept for logical
    /// bookkeeping only.
    pub hidden: Vec<StEdge>,
    adjacency: Vec<Vec<usize>>,
    real: Vec<bool>,
}

/// Flips of each witness caused by a single fault.
pub fn witness_mask(layout: &SectorLayout, fault: Fault) -> u32 {
    let mut mask = 0;
    for (i, w) in layout.witnesses.iter().enumerate() {
        let hit = match fault {
            Fault::Data { layer, qubit } => w.contains_data(layer, qubit),
            Fault::Meas { round, .. } => w.contains_meas(round),
        };
        if hit {
            mask |= 1 << i;
        }
    }
    mask
}

impl SpaceTimeGraph {
    pub fn new(layout: &SectorLayout, n_rounds: usize, w_data: f64, w_meas: f64) -> Self {
        let s_count = layout.num_stabilizers();
        let boundary = (n_rounds + 1) * s_count;
        let comparable = layout.comparable();
        let mut real = vec![true; boundary + 1];
        real[boundary] = false;
        for s in 0..s_count {
            if !layout.reference_known {
                real[s] = false;
            }
            if !comparable[s] {
                real[n_rounds * s_count + s] = false;
            }
        }
        let node = |t: usize, s: usize| {
            let id = t * s_count + s;
            if real[id] {
                id
            } else {
                boundary
            }
        };
        let mut edges = Vec::new();
        let mut hidden = Vec::new();
        let mut push = |a: usize, b: usize, fault: Fault, weight: f64| {
            let e = StEdge {
                a,
                b,
                fault,
                weight,
                witness_mask: witness_mask(layout, fault),
            };
            if a == boundary && b == boundary {
                hidden.push(e);
            } else {
                edges.push(e);
            }
        };
        for layer in 0..=n_rounds {
            for (qubit, stabs) in layout.qubit_stabilizers.iter().enumerate() {
                let ends: Vec<usize> = stabs.iter().map(|&s| node(layer, s)).collect();
                let (a, b) = match ends.as_slice() {
                    [] => (boundary, boundary),
                    [a] => (*a, boundary),
                    [a, b] => (*a, *b),
                    _ => unreachable!("qubit in more than two stabilizers"),
                };
                push(a, b, Fault::Data { layer, qubit }, w_data);
            }
        }
        for round in 0..n_rounds {
            for stabilizer in 0..s_count {
                push(
                    node(round, stabilizer),
                    node(round + 1, stabilizer),
                    Fault::Meas { round, stabilizer },
                    w_meas,
                );
            }
        }
        let mut adjacency = vec![Vec::new(); boundary + 1];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.a].push(i);
            if e.b != e.a {
                adjacency[e.b].push(i);
            }
        }
        Self {
            n_rounds,
            n_stabilizers: s_count,
            edges,
            hidden,
            adjacency,
            real,
        }
    }

    pub fn boundary(&self) -> usize {
        self.real.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.real.len()
    }

    pub fn node_of(&self, e: DetectionEvent) -> usize {
        e.round * self.n_stabilizers + e.stabilizer
    }

    pub fn is_real(&self, node: usize) -> bool {
        self.real[node]
    }

    pub fn describe(&self, node: usize) -> StNode {
        if node == self.boundary() {
            StNode::Boundary
        } else {
            StNode::Check {
                round: node / self.n_stabilizers,
                stabilizer: node % self.n_stabilizers,
            }
        }
    }

    /// Events produced by a set of faults, read directly off the graph.
    pub fn events_of(&self, errors: &ErrorHistory) -> Vec<DetectionEvent> {
        let mut parity = vec![false; self.num_nodes()];
        for e in &self.edges {
            let on = match e.fault {
                Fault::Data { layer, qubit } => errors.data[layer][qubit],
                Fault::Meas { round, stabilizer } => errors.meas[round][stabilizer],
            };
            if on {
                parity[e.a] ^= true;
                parity[e.b] ^= true;
            }
        }
        let b = self.boundary();
        let mut out: Vec<DetectionEvent> = (0..b)
            .filter(|&n| parity[n])
            .map(|n| DetectionEvent {
                round: n / self.n_stabilizers,
                stabilizer: n % self.n_stabilizers,
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Single-source shortest paths from `src`, not passing through the
    /// boundary. Returns distances and the edge used to reach each node.
    pub fn dijkstra(&self, src: usize) -> (Vec<f64>, Vec<usize>) {
        let n = self.num_nodes();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(HeapItem(0.0, src));
        let boundary = self.boundary();
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            if u == boundary && u != src {
                continue;
            }
            for &ei in &self.adjacency[u] {
                let e = &self.edges[ei];
                let v = if e.a == u { e.b } else { e.a };
                let nd = d + e.weight;
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = ei;
                    heap.push(HeapItem(nd, v));
                }
            }
        }
        (dist, pred)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distances and correction parities between space-time nodes.
#[derive(Debug, Clone)]
pub enum Metric {
    Torus(TorusMetric),
    Graph(GraphMetric),
}

/// Closed-form metric on the periodic block: unit moves in the stabilizer
/// grid cost `w_data`, unit moves in time cost `w_meas`.
#[derive(Debug, Clone)]
pub struct TorusMetric {
    d: usize,
    w_data: f64,
    w_meas: f64,
    /// Grid position of each stabilizer.
    grid: Vec<(usize, usize)>,
    /// Stabilizer id at each grid position.
    at: Vec<usize>,
    /// Witness mask of the data qubit between grid cell `(i, j)` and its
    /// down and right neighbours.
    down_mask: Vec<u32>,
    right_mask: Vec<u32>,
}

impl TorusMetric {
    pub fn new(layout: &SectorLayout, w_data: f64, w_meas: f64) -> Self {
        let d = layout.periodic.expect("periodic layout");
        let side = 2 * d;
        let grid: Vec<(usize, usize)> = layout
            .ancillas
            .iter()
            .map(|c| (c.row / 2, c.col / 2))
            .collect();
        let mut at = vec![usize::MAX; d * d];
        for (s, &(i, j)) in grid.iter().enumerate() {
            at[i * d + j] = s;
        }
        let qubit_at = |r: usize, c: usize| (r % side) * d + (c % side) / 2;
        let mask_of = |q: usize| {
            let mut m = 0;
            for (k, w) in layout.witnesses.iter().enumerate() {
                if w.contains_data(0, q) {
                    m |= 1 << k;
                }
            }
            m
        };
        let mut down_mask = vec![0; d * d];
        let mut right_mask = vec![0; d * d];
        for (s, a) in layout.ancillas.iter().enumerate() {
            let (i, j) = grid[s];
            down_mask[i * d + j] = mask_of(qubit_at(a.row + 1, a.col));
            right_mask[i * d + j] = mask_of(qubit_at(a.row, a.col + 1));
        }
        Self {
            d,
            w_data,
            w_meas,
            grid,
            at,
            down_mask,
            right_mask,
        }
    }

    fn wrap_delta(&self, a: usize, b: usize) -> usize {
        let diff = a.abs_diff(b);
        diff.min(self.d - diff)
    }

    pub fn distance(&self, a: DetectionEvent, b: DetectionEvent) -> f64 {
        let (ai, aj) = self.grid[a.stabilizer];
        let (bi, bj) = self.grid[b.stabilizer];
        let space = self.wrap_delta(ai, bi) + self.wrap_delta(aj, bj);
        self.w_data * space as f64 + self.w_meas * a.round.abs_diff(b.round) as f64
    }

    /// Witness flips of the correction joining `a` and `b`: the time
    /// segment carries no witness, then rows, then columns.
    pub fn path_mask(&self, a: DetectionEvent, b: DetectionEvent) -> u32 {
        let d = self.d;
        let (mut i, mut j) = self.grid[a.stabilizer];
        let (ti, tj) = self.grid[b.stabilizer];
        let mut mask = 0;
        let forward = |from: usize, to: usize| (to + d - from) % d <= d / 2;
        let down = forward(i, ti);
        while i != ti {
            if down {
                mask ^= self.down_mask[i * d + j];
                i = (i + 1) % d;
            } else {
                i = (i + d - 1) % d;
                mask ^= self.down_mask[i * d + j];
            }
        }
        let right = forward(j, tj);
        while j != tj {
            if right {
                mask ^= self.right_mask[i * d + j];
                j = (j + 1) % d;
            } else {
                j = (j + d - 1) % d;
                mask ^= self.right_mask[i * d + j];
            }
        }
        mask
    }

    pub fn stabilizer_at(&self, i: usize, j: usize) -> usize {
        self.at[(i % self.d) * self.d + j % self.d]
    }
}

/// Metric from explicit shortest paths, computed per decoding instance.
#[derive(Debug, Clone)]
pub struct GraphMetric {
    pub graph: SpaceTimeGraph,
}

/// All-pairs data for one event set under a [`GraphMetric`].
#[derive(Debug, Clone)]
pub struct GraphDistances {
    /// `dist[i][j]` between events, `dist[i][n]` to the boundary.
    pub dist: Vec<Vec<f64>>,
    /// Witness mask of the shortest path realising each distance.
    pub mask: Vec<Vec<u32>>,
}

impl GraphMetric {
    pub fn distances(&self, events: &[DetectionEvent]) -> GraphDistances {
        let n = events.len();
        let g = &self.graph;
        let boundary = g.boundary();
        let mut dist = vec![vec![f64::INFINITY; n + 1]; n];
        let mut mask = vec![vec![0; n + 1]; n];
        for (i, &e) in events.iter().enumerate() {
            let src = g.node_of(e);
            let (d, pred) = g.dijkstra(src);
            let trace = |mut v: usize| {
                let mut m = 0;
                while v != src {
                    let edge = &g.edges[pred[v]];
                    m ^= edge.witness_mask;
                    v = if edge.a == v { edge.b } else { edge.a };
                }
                m
            };
            for (j, &f) in events.iter().enumerate() {
                let t = g.node_of(f);
                dist[i][j] = d[t];
                if j != i && d[t].is_finite() {
                    mask[i][j] = trace(t);
                }
            }
            dist[i][n] = d[boundary];
            if d[boundary].is_finite() {
                mask[i][n] = trace(boundary);
            }
        }
        GraphDistances { dist, mask }
    }
}

/// Convenience for tests: events of an error history via the syndrome
/// route.
pub fn events_via_syndrome(layout: &SectorLayout, errors: &ErrorHistory) -> DetectionEventSet {
    let h = crate::protocol::syndrome_from_errors(layout, errors);
    crate::protocol::detection_events(layout, &h)
}
