//! Network geometry: node colouring, stabilizer supports, logical operators
//! and the final single-qubit measurement pattern.
//!
//! Nodes live on a square lattice indexed row-major from the top-left
//! corner. A node at `(row, col)` is
//!
//! * **black** (carries a data/processing qubit) when `row + col` is even,
//! * **blue** (hosts a `ZZZZ`/`ZZZ` check) when `row` is odd and `col` even,
//! * **red** (hosts an `XXXX`/`XXX` check) when `row` is even and `col` odd.
//!
//! Every blue or red node therefore touches four black nodes, or three on a
//! border of the rectangle.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeCoord {
    pub row: usize,
    pub col: usize,
}

impl NodeCoord {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// L∞ distance in node units.
    pub fn chebyshev(self, other: NodeCoord) -> usize {
        self.row
            .abs_diff(other.row)
            .max(self.col.abs_diff(other.col))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeColor {
    Black,
    Blue,
    Red,
}

impl NodeColor {
    pub fn at(coord: NodeCoord) -> Self {
        if (coord.row + coord.col) % 2 == 0 {
            NodeColor::Black
        } else if coord.row % 2 == 1 {
            NodeColor::Blue
        } else {
            NodeColor::Red
        }
    }
}

/// The two independently decoded error sectors.
///
/// `Z` collects the `ZZZZ` checks (blue nodes) which detect bit flips; `X`
/// collects the `XXXX` checks (red nodes) which detect phase flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sector {
    Z,
    X,
}

impl Sector {
    pub const ALL: [Sector; 2] = [Sector::Z, Sector::X];

    pub fn ancilla_color(self) -> NodeColor {
        match self {
            Sector::Z => NodeColor::Blue,
            Sector::X => NodeColor::Red,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sector::Z => "Z",
            Sector::X => "X",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label.trim() {
            "Z" | "z" => Some(Sector::Z),
            "X" | "x" => Some(Sector::X),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Basis in which a black processing qubit is read out at the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureBasis {
    Z,
    X,
    /// Alice's and Bob's qubits are never measured.
    Keep,
}

impl MeasureBasis {
    fn matches(self, sector: Sector) -> bool {
        matches!(
            (self, sector),
            (MeasureBasis::Z, Sector::Z) | (MeasureBasis::X, Sector::X)
        )
    }
}

/// Which open boundary, if any, a stabilizer touches through a qubit that
/// belongs to no other stabilizer of the same sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilizerBoundary {
    Bulk,
    Top,
    Bottom,
    Left,
    Right,
}

/// A set of space-time error locations whose intersection parity with the
/// residual error decides a logical flip.
///
/// Data errors on `qubits` count from layer `first_layer` onwards; when
/// `meas_round` is set, measurement errors of every stabilizer in that round
/// count as well.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalWitness {
    pub name: String,
    pub qubits: Vec<usize>,
    pub first_layer: usize,
    pub meas_round: Option<usize>,
    mask: Vec<bool>,
}

impl LogicalWitness {
    pub fn new(
        name: impl Into<String>,
        mut qubits: Vec<usize>,
        num_qubits: usize,
        first_layer: usize,
        meas_round: Option<usize>,
    ) -> Self {
        qubits.sort_unstable();
        qubits.dedup();
        let mut mask = vec![false; num_qubits];
        for &q in &qubits {
            mask[q] = true;
        }
        Self {
            name: name.into(),
            qubits,
            first_layer,
            meas_round,
            mask,
        }
    }

    pub fn contains_data(&self, layer: usize, qubit: usize) -> bool {
        layer >= self.first_layer && self.mask[qubit]
    }

    pub fn contains_meas(&self, round: usize) -> bool {
        self.meas_round == Some(round)
    }
}

/// One error sector of a lattice, reduced to what the simulator and decoder
/// need: stabilizer supports over data-qubit indices plus boundary, readout
/// and logical information.
#[derive(Debug, Clone)]
pub struct SectorLayout {
    pub sector: Sector,
    /// Data qubit coordinates; the index is the qubit id.
    pub qubits: Vec<NodeCoord>,
    /// Ancilla node of each stabilizer; the index is the stabilizer id.
    pub ancillas: Vec<NodeCoord>,
    pub stabilizers: Vec<Vec<usize>>,
    /// Stabilizers containing each qubit (at most two).
    pub qubit_stabilizers: Vec<Vec<usize>>,
    pub boundary: Vec<StabilizerBoundary>,
    /// Whether each qubit is read out in this sector's basis at the end.
    pub readout: Vec<bool>,
    /// Whether the first round's outcomes are deterministic (+1). Checks
    /// that merely project the code state have no round-0 reference.
    pub reference_known: bool,
    pub witnesses: Vec<LogicalWitness>,
    /// Undetectable error chains that flip at least one witness.
    pub logical_chains: Vec<Vec<usize>>,
    /// `(right, down)` data qubits of each ancilla, used for correlated
    /// error pairs.
    pub correlated: Vec<[Option<usize>; 2]>,
    /// Side length of the periodic block, when the layout is a torus.
    pub periodic: Option<usize>,
    ancilla_lookup: HashMap<NodeCoord, usize>,
}

impl SectorLayout {
    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn num_stabilizers(&self) -> usize {
        self.stabilizers.len()
    }

    pub fn ancilla_index(&self, coord: NodeCoord) -> Option<usize> {
        self.ancilla_lookup.get(&coord).copied()
    }

    /// Stabilizers whose every qubit is read out in this sector's basis and
    /// so can be compared against the final single-qubit measurements.
    pub fn comparable(&self) -> Vec<bool> {
        self.stabilizers
            .iter()
            .map(|s| s.iter().all(|&q| self.readout[q]))
            .collect()
    }
}

/// Anything that can be split into the two decoding sectors.
pub trait CodeLattice {
    fn sector_layout(&self, sector: Sector) -> SectorLayout;
}

/// Per-sector stabilizers, boundary classes and logical witnesses.
pub fn dual_sector<L: CodeLattice + ?Sized>(lattice: &L) -> [SectorLayout; 2] {
    [
        lattice.sector_layout(Sector::Z),
        lattice.sector_layout(Sector::X),
    ]
}

/// The rectangular network section connecting Alice and Bob.
#[derive(Debug, Clone)]
pub struct Network {
    pub width: usize,
    pub height: usize,
    pub margin: usize,
    pub alice: NodeCoord,
    pub bob: NodeCoord,
    pub z_ancillas: Vec<NodeCoord>,
    pub z_stabilizers: Vec<Vec<NodeCoord>>,
    pub x_ancillas: Vec<NodeCoord>,
    pub x_stabilizers: Vec<Vec<NodeCoord>>,
    /// Black nodes of the Alice–Bob path, in order from Alice to Bob.
    pub z_logical_path: Vec<NodeCoord>,
    pub x_boundary_a: Vec<NodeCoord>,
    pub x_boundary_b: Vec<NodeCoord>,
    pattern: Vec<Option<MeasureBasis>>,
    path_nodes: Vec<NodeCoord>,
}

/// Builds the minimal network: Alice and Bob at mid-height, straight path.
pub fn build_network(alice_bob_distance: usize, margin: usize) -> Result<Network> {
    NetworkBuilder::new(alice_bob_distance, margin).build()
}

/// Network construction with Alice and Bob optionally displaced from the
/// mid-line, which forces the path to bend.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    distance: usize,
    margin: usize,
    alice_offset: isize,
    bob_offset: isize,
}

impl NetworkBuilder {
    pub fn new(alice_bob_distance: usize, margin: usize) -> Self {
        Self {
            distance: alice_bob_distance,
            margin,
            alice_offset: 0,
            bob_offset: 0,
        }
    }

    /// Vertical displacement of Alice from the path mid-line, in black rows
    /// (positive is downwards).
    pub fn alice_offset(mut self, offset: isize) -> Self {
        self.alice_offset = offset;
        self
    }

    pub fn bob_offset(mut self, offset: isize) -> Self {
        self.bob_offset = offset;
        self
    }

    pub fn build(self) -> Result<Network> {
        if self.distance == 0 || self.margin == 0 {
            return Err(Error::InvalidDimensions(format!(
                "alice_bob_distance = {} and margin = {} must both be >= 1",
                self.distance, self.margin
            )));
        }
        let m = self.margin;
        let width = 2 * self.distance + 1;
        let lo = self.alice_offset.min(self.bob_offset).min(0);
        let hi = self.alice_offset.max(self.bob_offset).max(0);
        let height = 4 * m + 1 + 2 * (hi - lo) as usize;
        let mid = 2 * m + 2 * (-lo) as usize;
        let row_of = |offset: isize| (mid as isize + 2 * offset) as usize;
        let alice = NodeCoord::new(row_of(self.alice_offset), 0);
        let bob = NodeCoord::new(row_of(self.bob_offset), width - 1);

        // Waypoints: leave Alice, bend to the mid-line on the first red
        // column, run along it, bend back on the last red column.
        let first_bend = 1;
        let last_bend = width - 2;
        let waypoints = [
            alice,
            NodeCoord::new(alice.row, first_bend),
            NodeCoord::new(mid, first_bend),
            NodeCoord::new(mid, last_bend),
            NodeCoord::new(bob.row, last_bend),
            bob,
        ];
        let path_nodes = walk(&waypoints);
        let z_logical_path: Vec<NodeCoord> = path_nodes
            .iter()
            .copied()
            .filter(|&c| NodeColor::at(c) == NodeColor::Black)
            .collect();

        let mut z_ancillas = Vec::new();
        let mut x_ancillas = Vec::new();
        for row in 0..height {
            for col in 0..width {
                let c = NodeCoord::new(row, col);
                match NodeColor::at(c) {
                    NodeColor::Blue => z_ancillas.push(c),
                    NodeColor::Red => x_ancillas.push(c),
                    NodeColor::Black => {}
                }
            }
        }
        let support = |a: &NodeCoord| open_neighbors(*a, height, width);
        let z_stabilizers = z_ancillas.iter().map(support).collect();
        let x_stabilizers = x_ancillas.iter().map(support).collect();

        let x_boundary_a = (0..height)
            .step_by(2)
            .map(|r| NodeCoord::new(r, 0))
            .collect();
        let x_boundary_b = (0..height)
            .step_by(2)
            .map(|r| NodeCoord::new(r, width - 1))
            .collect();

        let mut pattern = vec![None; width * height];
        for row in 0..height {
            for col in 0..width {
                let c = NodeCoord::new(row, col);
                if NodeColor::at(c) != NodeColor::Black {
                    continue;
                }
                let basis = if c == alice || c == bob {
                    MeasureBasis::Keep
                } else if col == 0 || col == width - 1 {
                    MeasureBasis::X
                } else if z_logical_path.iter().any(|&p| p.chebyshev(c) <= m) {
                    MeasureBasis::Z
                } else {
                    MeasureBasis::X
                };
                pattern[row * width + col] = Some(basis);
            }
        }

        Ok(Network {
            width,
            height,
            margin: m,
            alice,
            bob,
            z_ancillas,
            z_stabilizers,
            x_ancillas,
            x_stabilizers,
            z_logical_path,
            x_boundary_a,
            x_boundary_b,
            pattern,
            path_nodes,
        })
    }
}

/// Straight-line walk through consecutive axis-aligned waypoints.
fn walk(waypoints: &[NodeCoord]) -> Vec<NodeCoord> {
    let mut out = vec![waypoints[0]];
    for pair in waypoints.windows(2) {
        let (from, to) = (pair[0], pair[1]);
        let mut cur = from;
        while cur != to {
            if cur.row != to.row {
                cur.row = if to.row > cur.row {
                    cur.row + 1
                } else {
                    cur.row - 1
                };
            } else {
                cur.col = if to.col > cur.col {
                    cur.col + 1
                } else {
                    cur.col - 1
                };
            }
            out.push(cur);
        }
    }
    out
}

fn open_neighbors(c: NodeCoord, height: usize, width: usize) -> Vec<NodeCoord> {
    // Order: left, up, right, down.
    let mut out = Vec::with_capacity(4);
    if c.col > 0 {
        out.push(NodeCoord::new(c.row, c.col - 1));
    }
    if c.row > 0 {
        out.push(NodeCoord::new(c.row - 1, c.col));
    }
    if c.col + 1 < width {
        out.push(NodeCoord::new(c.row, c.col + 1));
    }
    if c.row + 1 < height {
        out.push(NodeCoord::new(c.row + 1, c.col));
    }
    out
}

impl Network {
    pub fn contains(&self, c: NodeCoord) -> bool {
        c.row < self.height && c.col < self.width
    }

    /// Measurement basis of a black node; `None` for ancilla nodes.
    pub fn measurement_pattern(&self, c: NodeCoord) -> Option<MeasureBasis> {
        if !self.contains(c) {
            return None;
        }
        self.pattern[c.row * self.width + c.col]
    }

    /// Every node of the path, including the red connectors between the
    /// black entries of [`Network::z_logical_path`].
    pub fn path_nodes(&self) -> &[NodeCoord] {
        &self.path_nodes
    }

    pub fn black_nodes(&self) -> Vec<NodeCoord> {
        black_nodes(self.height, self.width)
    }

    /// Distance from a node to the nearer horizontal side, in units of the
    /// black-lattice spacing.
    pub fn side_distance(&self, c: NodeCoord) -> usize {
        c.row.min(self.height - 1 - c.row) / 2
    }

    /// Plain-text rendering: a colour block (`K`/`B`/`R`, with `A` and `b`
    /// for Alice and Bob) followed by a blank line and the measurement
    /// pattern block (`Z`/`X` on black nodes, `A`/`b` kept, `.` elsewhere).
    pub fn to_grid(&self) -> String {
        let mut out = String::new();
        for row in 0..self.height {
            for col in 0..self.width {
                let c = NodeCoord::new(row, col);
                let ch = if c == self.alice {
                    'A'
                } else if c == self.bob {
                    'b'
                } else {
                    match NodeColor::at(c) {
                        NodeColor::Black => 'K',
                        NodeColor::Blue => 'B',
                        NodeColor::Red => 'R',
                    }
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out.push('\n');
        for row in 0..self.height {
            for col in 0..self.width {
                let c = NodeCoord::new(row, col);
                let ch = match self.measurement_pattern(c) {
                    Some(MeasureBasis::Z) => 'Z',
                    Some(MeasureBasis::X) => 'X',
                    Some(MeasureBasis::Keep) if c == self.alice => 'A',
                    Some(MeasureBasis::Keep) => 'b',
                    None => '.',
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }

    /// One-line summary used in reports.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{}x{} network, alice {:?}, bob {:?}, margin {}",
            self.height, self.width, self.alice, self.bob, self.margin
        );
        s
    }
}

fn black_nodes(height: usize, width: usize) -> Vec<NodeCoord> {
    let mut out = Vec::new();
    for row in 0..height {
        for col in 0..width {
            let c = NodeCoord::new(row, col);
            if NodeColor::at(c) == NodeColor::Black {
                out.push(c);
            }
        }
    }
    out
}

/// Assemble a layout from coordinate-level data shared by both lattices.
struct LayoutParts {
    sector: Sector,
    qubits: Vec<NodeCoord>,
    ancillas: Vec<NodeCoord>,
    supports: Vec<Vec<NodeCoord>>,
    readout: Vec<bool>,
    reference_known: bool,
    periodic: Option<usize>,
}

impl LayoutParts {
    fn assemble(
        self,
        boundary_of: impl Fn(NodeCoord) -> StabilizerBoundary,
        right_down: impl Fn(NodeCoord) -> [Option<NodeCoord>; 2],
        witnesses: impl FnOnce(&dyn Fn(NodeCoord) -> usize, usize) -> Vec<LogicalWitness>,
        chains: impl FnOnce(&dyn Fn(NodeCoord) -> usize) -> Vec<Vec<usize>>,
    ) -> SectorLayout {
        let index: HashMap<NodeCoord, usize> = self
            .qubits
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i))
            .collect();
        let qid = |c: NodeCoord| index[&c];
        let stabilizers: Vec<Vec<usize>> = self
            .supports
            .iter()
            .map(|s| s.iter().map(|&c| qid(c)).collect())
            .collect();
        let mut qubit_stabilizers = vec![Vec::new(); self.qubits.len()];
        for (s, support) in stabilizers.iter().enumerate() {
            for &q in support {
                qubit_stabilizers[q].push(s);
            }
        }
        let boundary = stabilizers
            .iter()
            .map(|support| {
                support
                    .iter()
                    .find(|&&q| qubit_stabilizers[q].len() == 1)
                    .map_or(StabilizerBoundary::Bulk, |&q| boundary_of(self.qubits[q]))
            })
            .collect();
        let correlated = self
            .ancillas
            .iter()
            .map(|&a| right_down(a).map(|c| c.and_then(|c| index.get(&c).copied())))
            .collect();
        let witnesses = witnesses(&qid, self.qubits.len());
        let logical_chains = chains(&qid);
        let ancilla_lookup = self
            .ancillas
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i))
            .collect();
        SectorLayout {
            sector: self.sector,
            qubits: self.qubits,
            ancillas: self.ancillas,
            stabilizers,
            qubit_stabilizers,
            boundary,
            readout: self.readout,
            reference_known: self.reference_known,
            witnesses,
            logical_chains,
            correlated,
            periodic: self.periodic,
            ancilla_lookup,
        }
    }
}

impl CodeLattice for Network {
    fn sector_layout(&self, sector: Sector) -> SectorLayout {
        let qubits = self.black_nodes();
        let (ancillas, supports) = match sector {
            Sector::Z => (self.z_ancillas.clone(), self.z_stabilizers.clone()),
            Sector::X => (self.x_ancillas.clone(), self.x_stabilizers.clone()),
        };
        let readout = qubits
            .iter()
            .map(|&c| {
                self.measurement_pattern(c)
                    .is_some_and(|b| b.matches(sector))
            })
            .collect();
        let (h, w) = (self.height, self.width);
        let parts = LayoutParts {
            sector,
            qubits,
            ancillas,
            supports,
            readout,
            reference_known: sector == Sector::Z,
            periodic: None,
        };
        let boundary_of = move |c: NodeCoord| {
            let vertical = if c.col == 0 {
                Some(StabilizerBoundary::Left)
            } else if c.col == w - 1 {
                Some(StabilizerBoundary::Right)
            } else {
                None
            };
            let horizontal = if c.row == 0 {
                Some(StabilizerBoundary::Top)
            } else if c.row == h - 1 {
                Some(StabilizerBoundary::Bottom)
            } else {
                None
            };
            let first = match sector {
                Sector::Z => horizontal.or(vertical),
                Sector::X => vertical.or(horizontal),
            };
            first.unwrap_or(StabilizerBoundary::Bulk)
        };
        let right_down = move |a: NodeCoord| {
            let right = (a.col + 1 < w).then(|| NodeCoord::new(a.row, a.col + 1));
            let down = (a.row + 1 < h).then(|| NodeCoord::new(a.row + 1, a.col));
            [right, down]
        };
        match sector {
            Sector::Z => {
                let path = self.z_logical_path.clone();
                let column = 2 * ((w - 1) / 4);
                parts.assemble(
                    boundary_of,
                    right_down,
                    |qid, n| {
                        vec![LogicalWitness::new(
                            "Z_AB",
                            path.iter().map(|&c| qid(c)).collect(),
                            n,
                            0,
                            None,
                        )]
                    },
                    |qid| {
                        vec![(0..h)
                            .step_by(2)
                            .map(|r| qid(NodeCoord::new(r, column)))
                            .collect()]
                    },
                )
            }
            Sector::X => {
                let sides: Vec<NodeCoord> = self
                    .x_boundary_a
                    .iter()
                    .chain(&self.x_boundary_b)
                    .copied()
                    .collect();
                parts.assemble(
                    boundary_of,
                    right_down,
                    |qid, n| {
                        vec![LogicalWitness::new(
                            "X_A X_B",
                            sides.iter().map(|&c| qid(c)).collect(),
                            n,
                            1,
                            Some(0),
                        )]
                    },
                    |_| Vec::new(),
                )
            }
        }
    }
}

/// Periodic `distance x distance` block used for bulk threshold studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusBlock {
    pub distance: usize,
}

pub fn build_torus_block(distance: usize) -> Result<TorusBlock> {
    if distance < 2 {
        return Err(Error::InvalidDimensions(format!(
            "torus distance must be >= 2, got {distance}"
        )));
    }
    Ok(TorusBlock { distance })
}

impl TorusBlock {
    /// Side of the node grid (twice the code distance).
    pub fn side(&self) -> usize {
        2 * self.distance
    }

    fn wrap(&self, row: isize, col: isize) -> NodeCoord {
        let n = self.side() as isize;
        NodeCoord::new(row.rem_euclid(n) as usize, col.rem_euclid(n) as usize)
    }

    fn neighbors(&self, c: NodeCoord) -> Vec<NodeCoord> {
        let (r, k) = (c.row as isize, c.col as isize);
        vec![
            self.wrap(r, k - 1),
            self.wrap(r - 1, k),
            self.wrap(r, k + 1),
            self.wrap(r + 1, k),
        ]
    }
}

impl CodeLattice for TorusBlock {
    fn sector_layout(&self, sector: Sector) -> SectorLayout {
        let n = self.side();
        let qubits = black_nodes(n, n);
        let color = sector.ancilla_color();
        let mut ancillas = Vec::new();
        for row in 0..n {
            for col in 0..n {
                let c = NodeCoord::new(row, col);
                if NodeColor::at(c) == color {
                    ancillas.push(c);
                }
            }
        }
        let supports = ancillas.iter().map(|&a| self.neighbors(a)).collect();
        let readout = vec![true; qubits.len()];
        let parts = LayoutParts {
            sector,
            qubits,
            ancillas,
            supports,
            readout,
            reference_known: true,
            periodic: Some(self.distance),
        };
        let this = *self;
        let right_down = move |a: NodeCoord| {
            let (r, c) = (a.row as isize, a.col as isize);
            [Some(this.wrap(r, c + 1)), Some(this.wrap(r + 1, c))]
        };
        // Witness cuts are the conjugate sector's logical strings.
        let even_row = |row: usize| (0..n).step_by(2).map(move |c| NodeCoord::new(row, c));
        let odd_row = |row: usize| (1..n).step_by(2).map(move |c| NodeCoord::new(row, c));
        let even_col = |col: usize| (0..n).step_by(2).map(move |r| NodeCoord::new(r, col));
        let odd_col = |col: usize| (1..n).step_by(2).map(move |r| NodeCoord::new(r, col));
        let (cut_rows, cut_cols, chain_vertical, chain_horizontal): (
            Vec<NodeCoord>,
            Vec<NodeCoord>,
            Vec<NodeCoord>,
            Vec<NodeCoord>,
        ) = match sector {
            Sector::Z => (
                even_row(0).collect(),
                odd_col(1).collect(),
                even_col(0).collect(),
                odd_row(1).collect(),
            ),
            Sector::X => (
                odd_row(1).collect(),
                even_col(0).collect(),
                odd_col(1).collect(),
                even_row(0).collect(),
            ),
        };
        parts.assemble(
            |_| StabilizerBoundary::Bulk,
            right_down,
            |qid, nq| {
                vec![
                    LogicalWitness::new(
                        "horizontal cut",
                        cut_rows.iter().map(|&c| qid(c)).collect(),
                        nq,
                        0,
                        None,
                    ),
                    LogicalWitness::new(
                        "vertical cut",
                        cut_cols.iter().map(|&c| qid(c)).collect(),
                        nq,
                        0,
                        None,
                    ),
                ]
            },
            |qid| {
                vec![
                    chain_vertical.iter().map(|&c| qid(c)).collect(),
                    chain_horizontal.iter().map(|&c| qid(c)).collect(),
                ]
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf2_rank(rows: &[Vec<usize>], cols: usize) -> usize {
        let mut m: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| {
                let mut v = vec![false; cols];
                for &q in r {
                    v[q] ^= true;
                }
                v
            })
            .collect();
        let mut rank = 0;
        for col in 0..cols {
            let Some(pivot) = (rank..m.len()).find(|&i| m[i][col]) else {
                continue;
            };
            m.swap(rank, pivot);
            for i in 0..m.len() {
                if i != rank && m[i][col] {
                    let (a, b) = if i < rank {
                        let (lo, hi) = m.split_at_mut(rank);
                        (&mut lo[i], &hi[0])
                    } else {
                        let (lo, hi) = m.split_at_mut(i);
                        (&mut hi[0], &lo[rank])
                    };
                    for (x, y) in a.iter_mut().zip(b.iter()) {
                        *x ^= *y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn smallest_network_has_two_entry_path() {
        let net = build_network(1, 1).unwrap();
        assert_eq!(net.z_logical_path, vec![net.alice, net.bob]);
        assert_eq!(net.width, 3);
        assert_eq!(net.height, 5);
    }

    #[test]
    fn rejects_zero_dimensions() {
        assert!(build_network(0, 2).is_err());
        assert!(build_network(2, 0).is_err());
        assert!(build_torus_block(1).is_err());
    }

    #[test]
    fn margin_verified_by_coordinate_scan() {
        let net = build_network(5, 3).unwrap();
        let min = net
            .path_nodes()
            .iter()
            .map(|&c| net.side_distance(c))
            .min()
            .unwrap();
        assert_eq!(min, 3);
    }

    #[test]
    fn bent_path_keeps_margin_and_connectivity() {
        let net = NetworkBuilder::new(6, 2)
            .alice_offset(-2)
            .bob_offset(1)
            .build()
            .unwrap();
        let nodes = net.path_nodes();
        assert_eq!(nodes.first(), Some(&net.alice));
        assert_eq!(nodes.last(), Some(&net.bob));
        for w in nodes.windows(2) {
            assert_eq!(w[0].row.abs_diff(w[1].row) + w[0].col.abs_diff(w[1].col), 1);
        }
        assert!(nodes.iter().all(|&c| net.side_distance(c) >= 2));
        assert!(nodes.iter().all(|&c| NodeColor::at(c) != NodeColor::Blue));
    }

    #[test]
    fn x_stabilizer_product_is_boundary_pair() {
        for (l, m) in [(1, 1), (3, 2), (5, 3)] {
            let net = build_network(l, m).unwrap();
            let mut count: HashMap<NodeCoord, usize> = HashMap::new();
            for s in &net.x_stabilizers {
                for &c in s {
                    *count.entry(c).or_default() += 1;
                }
            }
            let mut odd: Vec<NodeCoord> = count
                .into_iter()
                .filter(|(_, n)| n % 2 == 1)
                .map(|(c, _)| c)
                .collect();
            odd.sort();
            let mut sides: Vec<NodeCoord> = net
                .x_boundary_a
                .iter()
                .chain(&net.x_boundary_b)
                .copied()
                .collect();
            sides.sort();
            assert_eq!(odd, sides);
        }
    }

    #[test]
    fn stabilizer_supports_have_three_or_four_black_nodes() {
        let net = build_network(4, 2).unwrap();
        for s in net.z_stabilizers.iter().chain(&net.x_stabilizers) {
            assert!(s.len() == 3 || s.len() == 4);
            assert!(s.iter().all(|&c| NodeColor::at(c) == NodeColor::Black));
        }
    }

    #[test]
    fn stabilizers_commute_and_path_commutes() {
        let net = build_network(4, 2).unwrap();
        for z in &net.z_stabilizers {
            for x in &net.x_stabilizers {
                let overlap = z.iter().filter(|c| x.contains(c)).count();
                assert_eq!(overlap % 2, 0);
            }
        }
        for x in &net.x_stabilizers {
            let overlap = net.z_logical_path.iter().filter(|c| x.contains(c)).count();
            assert_eq!(overlap % 2, 0);
        }
    }

    #[test]
    fn qubit_membership_at_most_two() {
        let net = build_network(4, 2).unwrap();
        for layout in dual_sector(&net) {
            for (q, stabs) in layout.qubit_stabilizers.iter().enumerate() {
                assert!(stabs.len() <= 2);
                let c = layout.qubits[q];
                let interior =
                    c.row > 0 && c.col > 0 && c.row + 1 < net.height && c.col + 1 < net.width;
                if interior {
                    assert_eq!(stabs.len(), 2, "{c:?}");
                }
            }
        }
    }

    #[test]
    fn measurement_pattern_partitions_black_nodes() {
        let net = build_network(5, 3).unwrap();
        assert_eq!(net.measurement_pattern(net.alice), Some(MeasureBasis::Keep));
        assert_eq!(net.measurement_pattern(net.bob), Some(MeasureBasis::Keep));
        for c in net.black_nodes() {
            let b = net.measurement_pattern(c).unwrap();
            if c == net.alice || c == net.bob {
                continue;
            }
            assert_ne!(b, MeasureBasis::Keep);
            if net.x_boundary_a.contains(&c) || net.x_boundary_b.contains(&c) {
                assert_eq!(b, MeasureBasis::X);
            } else if net.z_logical_path.contains(&c) {
                assert_eq!(b, MeasureBasis::Z);
            } else {
                let near = net.z_logical_path.iter().any(|&p| p.chebyshev(c) <= 3);
                assert_eq!(b == MeasureBasis::Z, near);
            }
        }
        let non_black = NodeCoord::new(0, 1);
        assert_eq!(net.measurement_pattern(non_black), None);
    }

    #[test]
    fn zero_state_satisfies_z_stabilizers() {
        // All-|0> has no X component, so every Z check reads +1: the Z sector
        // reference is deterministic.
        let net = build_network(3, 2).unwrap();
        let [z, x] = dual_sector(&net);
        assert!(z.reference_known);
        assert!(!x.reference_known);
    }

    #[test]
    fn smallest_network_z_witness_is_path() {
        let net = build_network(1, 1).unwrap();
        let [z, _] = dual_sector(&net);
        let coords: Vec<NodeCoord> = z.witnesses[0].qubits.iter().map(|&q| z.qubits[q]).collect();
        let mut path = net.z_logical_path.clone();
        path.sort();
        assert_eq!(coords, path);
    }

    /// Enumerates short phase-error chains through red checks from the left
    /// side to the right side and checks they anticommute with each side's
    /// X string separately.
    #[test]
    fn x_sector_chains_cross_each_side_oddly() {
        let net = build_network(5, 3).unwrap();
        let [_, x] = dual_sector(&net);
        let n_stab = x.num_stabilizers();
        // Red-check graph: nodes are stabilizers plus LEFT / RIGHT terminals,
        // edges are qubits.
        let left = n_stab;
        let right = n_stab + 1;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_stab + 2];
        for (q, stabs) in x.qubit_stabilizers.iter().enumerate() {
            let c = x.qubits[q];
            let ends: Vec<usize> = match stabs.as_slice() {
                [a, b] => vec![*a, *b],
                [a] if c.col == 0 => vec![*a, left],
                [a] if c.col == net.width - 1 => vec![*a, right],
                _ => continue,
            };
            adj[ends[0]].push((ends[1], q));
            adj[ends[1]].push((ends[0], q));
        }
        let side_a: Vec<usize> = net
            .x_boundary_a
            .iter()
            .map(|c| x.qubits.iter().position(|p| p == c).unwrap())
            .collect();
        let side_b: Vec<usize> = net
            .x_boundary_b
            .iter()
            .map(|c| x.qubits.iter().position(|p| p == c).unwrap())
            .collect();
        let max_len = net.width / 2 + 3;
        let mut found = 0usize;
        let mut stack = vec![(left, vec![], vec![left])];
        while let Some((node, chain, visited)) = stack.pop() {
            if node == right {
                let a = chain.iter().filter(|q| side_a.contains(q)).count();
                let b = chain.iter().filter(|q| side_b.contains(q)).count();
                assert_eq!(a % 2, 1);
                assert_eq!(b % 2, 1);
                found += 1;
                continue;
            }
            if chain.len() >= max_len {
                continue;
            }
            for &(next, q) in &adj[node] {
                if next == left || visited.contains(&next) {
                    continue;
                }
                let mut c = chain.clone();
                c.push(q);
                let mut v = visited.clone();
                v.push(next);
                stack.push((next, c, v));
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn torus_counts() {
        let t = build_torus_block(3).unwrap();
        for layout in dual_sector(&t) {
            assert_eq!(layout.num_stabilizers(), 9);
            assert_eq!(layout.num_qubits(), 18);
            assert!(layout.qubit_stabilizers.iter().all(|s| s.len() == 2));
            assert_eq!(layout.witnesses.len(), 2);
            assert!(layout.witnesses.iter().all(|w| w.qubits.len() == 3));
        }
    }

    #[test]
    fn torus_distance_two_has_length_two_cycles() {
        let t = build_torus_block(2).unwrap();
        for layout in dual_sector(&t) {
            assert!(layout.logical_chains.iter().all(|c| c.len() == 2));
            assert!(layout.witnesses.iter().all(|w| w.qubits.len() == 2));
        }
    }

    #[test]
    fn torus_rank_has_single_dependency() {
        let t = build_torus_block(5).unwrap();
        for layout in dual_sector(&t) {
            assert_eq!(gf2_rank(&layout.stabilizers, layout.num_qubits()), 24);
        }
    }

    #[test]
    fn logical_chains_are_undetectable_and_cross_one_witness() {
        let t = build_torus_block(4).unwrap();
        let net = build_network(3, 2).unwrap();
        for layout in dual_sector(&t).into_iter().chain(dual_sector(&net)) {
            for chain in &layout.logical_chains {
                for support in &layout.stabilizers {
                    let hits = support.iter().filter(|q| chain.contains(q)).count();
                    assert_eq!(hits % 2, 0);
                }
                let crossings: usize = layout
                    .witnesses
                    .iter()
                    .map(|w| chain.iter().filter(|&&q| w.contains_data(0, q)).count() % 2)
                    .sum();
                assert_eq!(crossings, 1);
            }
        }
    }

    #[test]
    fn grid_rendering_small_network() {
        let net = build_network(1, 1).unwrap();
        let expected = "\
KRK
BKB
ARb
BKB
KRK

X.X
.Z.
A.b
.Z.
X.X
";
        assert_eq!(net.to_grid(), expected);
    }

    #[test]
    fn sector_labels_round_trip() {
        for s in Sector::ALL {
            assert_eq!(Sector::from_label(s.label()), Some(s));
        }
        assert_eq!(Sector::from_label("Y"), None);
    }
}
