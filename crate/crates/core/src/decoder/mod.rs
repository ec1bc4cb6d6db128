//! Minimum-weight perfect matching decoder over space-time detection events.

pub mod blossom;
mod graph;

pub use graph::{
    events_via_syndrome, witness_mask, Fault, GraphDistances, GraphMetric, Metric, SpaceTimeGraph,
    StEdge, StNode, TorusMetric,
};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::noise::{EffectiveRates, ErrorHistory};
use crate::protocol::{DetectionEvent, DetectionEventSet};
use crate::topology::SectorLayout;
use crate::{Error, Result};

/// Largest instance accepted by [`brute_force_matching`].
pub const BRUTE_FORCE_MAX_NODES: usize = 12;

/// Candidate neighbours kept per event before matching.
pub const DEFAULT_NEIGHBORS: usize = 20;

/// Weighted graph over detection events. Node `num_nodes` is the boundary,
/// which may be used by any number of events.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingGraph {
    pub num_nodes: usize,
    pub boundary: bool,
    /// `(u, v, weight)` with `u < v`; `v == num_nodes` for boundary edges.
    pub edges: Vec<(usize, usize, f64)>,
}

impl MatchingGraph {
    pub fn boundary_index(&self) -> usize {
        self.num_nodes
    }

    fn weight_table(&self) -> Vec<Vec<Option<f64>>> {
        let n = self.num_nodes + 1;
        let mut t = vec![vec![None; n]; n];
        for &(u, v, w) in &self.edges {
            t[u][v] = Some(w);
            t[v][u] = Some(w);
        }
        t
    }
}

/// A perfect pairing of the real nodes; pairs with the boundary use index
/// `num_nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
    pub weight: f64,
}

impl Pairing {
    pub fn empty() -> Self {
        Self {
            pairs: Vec::new(),
            weight: 0.0,
        }
    }

    fn from_pairs(mut pairs: Vec<(usize, usize)>, table: &[Vec<Option<f64>>]) -> Self {
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        let weight = pairs
            .iter()
            .map(|&(u, v)| table[u][v].expect("pair uses an existing edge"))
            .sum();
        Self { pairs, weight }
    }
}

/// Exact minimum-weight perfect matching.
pub fn mwpm(graph: &MatchingGraph) -> Result<Pairing> {
    let n = graph.num_nodes;
    if n == 0 {
        return Ok(Pairing::empty());
    }
    if !graph.boundary && n % 2 == 1 {
        return Err(Error::NoPerfectMatching(n));
    }
    let max_w = graph.edges.iter().map(|e| e.2).fold(0.0f64, f64::max);
    let scale = if max_w > 0.0 {
        (1u64 << 40) as f64 / max_w
    } else {
        1.0
    };
    let ints: Vec<i64> = graph
        .edges
        .iter()
        .map(|e| (e.2 * scale).round() as i64)
        .collect();
    let top = ints.iter().copied().max().unwrap_or(0) + 1;
    let mut edges: Vec<(usize, usize, i64)> = Vec::with_capacity(graph.edges.len() + n * n / 2);
    for (&(u, v, _), &w) in graph.edges.iter().zip(&ints) {
        let v = if v == n { n + u } else { v };
        edges.push((u, v, top - w));
    }
    let n_vertex = if graph.boundary {
        for a in 0..n {
            for b in a + 1..n {
                edges.push((n + a, n + b, top));
            }
        }
        2 * n
    } else {
        n
    };
    let mate = blossom::max_weight_matching(n_vertex, &edges, true);
    let mut pairs = Vec::with_capacity(n);
    for u in 0..n {
        match mate[u] {
            None => return Err(Error::NoPerfectMatching(n)),
            Some(v) if v >= n => pairs.push((u, n)),
            Some(v) if u < v => pairs.push((u, v)),
            Some(_) => {}
        }
    }
    Ok(Pairing::from_pairs(pairs, &graph.weight_table()))
}

/// Exhaustive minimum over all perfect pairings, for small instances.
pub fn brute_force_matching(graph: &MatchingGraph) -> Result<Pairing> {
    let n = graph.num_nodes;
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooManyNodes {
            max: BRUTE_FORCE_MAX_NODES,
            got: n,
        });
    }
    let table = graph.weight_table();
    let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
    let mut current = Vec::new();
    search(
        &table,
        n,
        graph.boundary,
        0u32,
        0.0,
        &mut current,
        &mut best,
    );
    match best {
        Some((_, pairs)) => Ok(Pairing::from_pairs(pairs, &table)),
        None => Err(Error::NoPerfectMatching(n)),
    }
}

fn search(
    table: &[Vec<Option<f64>>],
    n: usize,
    boundary: bool,
    used: u32,
    cost: f64,
    current: &mut Vec<(usize, usize)>,
    best: &mut Option<(f64, Vec<(usize, usize)>)>,
) {
    let Some(i) = (0..n).find(|&i| used >> i & 1 == 0) else {
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            *best = Some((cost, current.clone()));
        }
        return;
    };
    let used = used | 1 << i;
    for j in i + 1..n {
        if used >> j & 1 == 1 {
            continue;
        }
        if let Some(w) = table[i][j] {
            current.push((i, j));
            search(table, n, boundary, used | 1 << j, cost + w, current, best);
            current.pop();
        }
    }
    if boundary {
        if let Some(w) = table[i][n] {
            current.push((i, n));
            search(table, n, boundary, used, cost + w, current, best);
            current.pop();
        }
    }
}

/// Writes a pairing as `u,v,weight` lines.
pub fn write_pairing_dump(pairing: &Pairing, graph: &MatchingGraph) -> String {
    let table = graph.weight_table();
    let mut out = String::new();
    for &(u, v) in &pairing.pairs {
        let w = table[u][v].unwrap_or(f64::NAN);
        let _ = writeln!(out, "{u},{v},{w}");
    }
    out
}

/// Parses `u,v,weight` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairing_dump(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [u, v, w] = fields.as_slice() else {
            return Err(err(format!("expected 3 fields, got {}", fields.len())));
        };
        let u: usize = u
            .parse()
            .map_err(|e| err(format!("bad index `{u}`: {e}")))?;
        let v: usize = v
            .parse()
            .map_err(|e| err(format!("bad index `{v}`: {e}")))?;
        let w: f64 = w
            .parse()
            .map_err(|e| err(format!("bad weight `{w}`: {e}")))?;
        if !w.is_finite() || w < 0.0 {
            return Err(err(format!(
                "weight must be finite and non-negative, got {w}"
            )));
        }
        out.push((u, v, w));
    }
    Ok(out)
}

/// How error probabilities become edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightConvention {
    /// `ln((1 - p) / p)`.
    #[default]
    Likelihood,
    /// Every step costs 1.
    Unit,
}

const MIN_PROB: f64 = 1e-12;
const MAX_PROB: f64 = 0.49;

pub fn log_likelihood_weight(p: f64) -> f64 {
    let p = p.clamp(MIN_PROB, MAX_PROB);
    ((1.0 - p) / p).ln()
}

/// `(w_data, w_meas)` for the given rates.
pub fn edge_weights(rates: &EffectiveRates, convention: WeightConvention) -> (f64, f64) {
    match convention {
        WeightConvention::Likelihood => (
            log_likelihood_weight(rates.eps_e),
            log_likelihood_weight(rates.eps_s),
        ),
        WeightConvention::Unit => (1.0, 1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicalOutcome {
    Success,
    LogicalFlip,
}

impl LogicalOutcome {
    pub fn is_failure(self) -> bool {
        self == LogicalOutcome::LogicalFlip
    }
}

/// A decoded event set: the pairing plus the witness flips its correction
/// applies.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub pairing: Pairing,
    pub correction_mask: u32,
}

/// Decoder for one sector at fixed rates and round count.
#[derive(Debug, Clone)]
pub struct Decoder {
    layout: SectorLayout,
    n_rounds: usize,
    w_data: f64,
    w_meas: f64,
    metric: Metric,
    neighbors: usize,
}

/// Pairwise data for one event set.
struct Instance {
    n: usize,
    boundary: bool,
    dist: Vec<Vec<f64>>,
    mask: Vec<Vec<u32>>,
}

impl Decoder {
    /// Uses the closed-form metric on periodic layouts and explicit shortest
    /// paths otherwise.
    pub fn new(layout: SectorLayout, rates: &EffectiveRates, n_rounds: usize) -> Self {
        Self::with_convention(layout, rates, n_rounds, WeightConvention::Likelihood)
    }

    pub fn with_convention(
        layout: SectorLayout,
        rates: &EffectiveRates,
        n_rounds: usize,
        convention: WeightConvention,
    ) -> Self {
        let (w_data, w_meas) = edge_weights(rates, convention);
        let metric = if layout.periodic.is_some() {
            Metric::Torus(TorusMetric::new(&layout, w_data, w_meas))
        } else {
            Metric::Graph(GraphMetric {
                graph: SpaceTimeGraph::new(&layout, n_rounds, w_data, w_meas),
            })
        };
        Self {
            layout,
            n_rounds,
            w_data,
            w_meas,
            metric,
            neighbors: DEFAULT_NEIGHBORS,
        }
    }

    /// Forces explicit shortest paths even on periodic layouts.
    pub fn with_graph_metric(mut self) -> Self {
        self.metric = Metric::Graph(GraphMetric {
            graph: SpaceTimeGraph::new(&self.layout, self.n_rounds, self.w_data, self.w_meas),
        });
        self
    }

    /// Candidate neighbours per event; `usize::MAX` disables pruning.
    pub fn with_neighbors(mut self, k: usize) -> Self {
        self.neighbors = k.max(1);
        self
    }

    pub fn layout(&self) -> &SectorLayout {
        &self.layout
    }

    pub fn n_rounds(&self) -> usize {
        self.n_rounds
    }

    pub fn weights(&self) -> (f64, f64) {
        (self.w_data, self.w_meas)
    }

    pub fn space_time_graph(&self) -> SpaceTimeGraph {
        match &self.metric {
            Metric::Graph(g) => g.graph.clone(),
            Metric::Torus(_) => {
                SpaceTimeGraph::new(&self.layout, self.n_rounds, self.w_data, self.w_meas)
            }
        }
    }

    fn instance(&self, events: &[DetectionEvent]) -> Instance {
        let n = events.len();
        match &self.metric {
            Metric::Torus(t) => {
                let mut dist = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in i + 1..n {
                        let d = t.distance(events[i], events[j]);
                        dist[i][j] = d;
                        dist[j][i] = d;
                    }
                }
                Instance {
                    n,
                    boundary: false,
                    dist,
                    mask: Vec::new(),
                }
            }
            Metric::Graph(g) => {
                let GraphDistances { dist, mask } = g.distances(events);
                let boundary = dist.iter().any(|row| row[n].is_finite());
                Instance {
                    n,
                    boundary,
                    dist,
                    mask,
                }
            }
        }
    }

    fn pair_mask(&self, inst: &Instance, events: &[DetectionEvent], u: usize, v: usize) -> u32 {
        match &self.metric {
            Metric::Torus(t) => t.path_mask(events[u], events[v]),
            Metric::Graph(_) => inst.mask[u][v],
        }
    }

    /// Full matching graph: every event pair with a finite distance, plus
    /// each event's boundary edge.
    pub fn build_matching_graph(&self, events: &DetectionEventSet) -> MatchingGraph {
        let inst = self.instance(&events.events);
        graph_from_instance(&inst, None)
    }

    /// Matches the events and returns the pairing with its correction.
    pub fn decode(&self, events: &DetectionEventSet) -> Result<Decoded> {
        let ev = &events.events;
        if ev.is_empty() {
            return Ok(Decoded {
                pairing: Pairing::empty(),
                correction_mask: 0,
            });
        }
        let inst = self.instance(ev);
        let pairing = if inst.n > self.neighbors + 1 {
            let (graph, radius) = pruned_graph(&inst, self.neighbors);
            match mwpm(&graph) {
                Ok(p) if !touches_radius(&p, &inst, &radius) => p,
                _ => mwpm(&graph_from_instance(&inst, None))?,
            }
        } else {
            mwpm(&graph_from_instance(&inst, None))?
        };
        let correction_mask = pairing
            .pairs
            .iter()
            .fold(0, |m, &(u, v)| m ^ self.pair_mask(&inst, ev, u, v));
        Ok(Decoded {
            pairing,
            correction_mask,
        })
    }

    /// Witness flips of the true errors.
    pub fn error_mask(&self, errors: &ErrorHistory) -> u32 {
        let mut mask = 0;
        for (i, w) in self.layout.witnesses.iter().enumerate() {
            let mut parity = false;
            for layer in &errors.data[w.first_layer.min(errors.data.len())..] {
                for &q in &w.qubits {
                    parity ^= layer[q];
                }
            }
            if let Some(r) = w.meas_round {
                if let Some(round) = errors.meas.get(r) {
                    parity ^= round.iter().fold(false, |a, &b| a ^ b);
                }
            }
            if parity {
                mask |= 1 << i;
            }
        }
        mask
    }

    /// Witnesses flipped by the true errors followed by the correction.
    pub fn residual_mask(&self, decoded: &Decoded, errors: &ErrorHistory) -> u32 {
        self.error_mask(errors) ^ decoded.correction_mask
    }

    /// Combines the true errors with the correction and reports whether
    /// any witness is flipped an odd number of times.
    pub fn logical_outcome(&self, decoded: &Decoded, errors: &ErrorHistory) -> LogicalOutcome {
        if self.residual_mask(decoded, errors) != 0 {
            LogicalOutcome::LogicalFlip
        } else {
            LogicalOutcome::Success
        }
    }

    /// Decodes the events of `errors` and evaluates the outcome.
    pub fn decode_errors(&self, errors: &ErrorHistory) -> Result<LogicalOutcome> {
        let events = events_via_syndrome(&self.layout, errors);
        let decoded = self.decode(&events)?;
        Ok(self.logical_outcome(&decoded, errors))
    }
}

fn graph_from_instance(inst: &Instance, keep: Option<&[Vec<bool>]>) -> MatchingGraph {
    let n = inst.n;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let allowed = keep.is_none_or(|k| k[i][j]);
            if allowed && inst.dist[i][j].is_finite() {
                edges.push((i, j, inst.dist[i][j]));
            }
        }
        if inst.boundary && inst.dist[i][n].is_finite() {
            edges.push((i, n, inst.dist[i][n]));
        }
    }
    MatchingGraph {
        num_nodes: n,
        boundary: inst.boundary,
        edges,
    }
}

/// Keeps each event's `k` nearest events (ties by index). Returns the graph
/// and each event's pruning radius.
fn pruned_graph(inst: &Instance, k: usize) -> (MatchingGraph, Vec<f64>) {
    let n = inst.n;
    let mut keep = vec![vec![false; n]; n];
    let mut radius = vec![f64::INFINITY; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i && inst.dist[i][j].is_finite()));
        if order.len() > k {
            order.sort_by(|&a, &b| inst.dist[i][a].total_cmp(&inst.dist[i][b]).then(a.cmp(&b)));
            radius[i] = inst.dist[i][order[k - 1]];
            order.truncate(k);
        }
        for &j in &order {
            keep[i][j] = true;
            keep[j][i] = true;
        }
    }
    (graph_from_instance(inst, Some(&keep)), radius)
}

fn touches_radius(p: &Pairing, inst: &Instance, radius: &[f64]) -> bool {
    p.pairs.iter().any(|&(u, v)| {
        v < inst.n && {
            let w = inst.dist[u][v];
            w >= radius[u] || w >= radius[v]
        }
    })
}
