//! Circuit-level fault counting for one round of the entanglement-mediated
//! parity checks.
//!
//! Each check gadget owns an ancilla `P` and, for each of its four black
//! neighbours `D_k` (visited left, up, right, down), a Bell pair `(l_k, m_k)`
//! whose half `m_k` sits next to `D_k`. For a `ZZZZ` check:
//!
//! 1. `P` is prepared in `|0>`.
//! 2. For each `k`: `CNOT(D_k -> m_k)`, measure `m_k` in Z (`z_k`),
//!    `CNOT(l_k -> P)`, measure `l_k` in X (`x_k`) and apply `Z^{x_k}` to
//!    `D_k`.
//! 3. `P` is measured in Z; the check value is `z * z_1 z_2 z_3 z_4`.
//!
//! The `XXXX` check is the Hadamard mirror image. Faults are Pauli and are
//! pushed through the circuit as a Pauli frame. Byproduct corrections are
//! classical frame updates and carry no fault location of their own.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use super::{EffectiveRates, PhysicalNoise};
use crate::topology::Sector;

type Q = Ratio<i64>;

const P: usize = 4;

fn l(k: usize) -> usize {
    5 + k
}

fn m(k: usize) -> usize {
    9 + k
}

const POSITION_NAMES: [&str; 4] = ["L", "U", "R", "D"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GadgetKind {
    /// `ZZZZ` check on a blue node.
    ZCheck,
    /// `XXXX` check on a red node.
    XCheck,
}

impl GadgetKind {
    pub const ALL: [GadgetKind; 2] = [GadgetKind::ZCheck, GadgetKind::XCheck];

    pub fn sector(self) -> Sector {
        match self {
            GadgetKind::ZCheck => Sector::Z,
            GadgetKind::XCheck => Sector::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basis {
    Z,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SiteKind {
    Werner,
    Single,
    Two,
}

#[derive(Debug, Clone)]
struct Site {
    kind: SiteKind,
    qubits: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Cnot(usize, usize),
    Measure {
        qubit: usize,
        basis: Basis,
        slot: usize,
    },
    Byproduct {
        target: usize,
        slot: usize,
        basis: Basis,
    },
    Fault(usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Frame {
    x: u16,
    z: u16,
}

/// Effect of a fault on its gadget after one round: whether the check value
/// flips, and the Pauli left on each of the four neighbours (bit `k` for
/// neighbour `k`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct GadgetResidual {
    pub flip: bool,
    pub data_x: u8,
    pub data_z: u8,
}

impl std::ops::BitXor for GadgetResidual {
    type Output = Self;

    fn bitxor(self, rhs: Self) -> Self {
        Self {
            flip: self.flip ^ rhs.flip,
            data_x: self.data_x ^ rhs.data_x,
            data_z: self.data_z ^ rhs.data_z,
        }
    }
}

/// One round of a check gadget as a list of Clifford steps and fault sites.
#[derive(Debug, Clone)]
pub(crate) struct Gadget {
    steps: Vec<Step>,
    sites: Vec<Site>,
    check_slots: Vec<usize>,
}

impl Gadget {
    pub(crate) fn new(kind: GadgetKind) -> Self {
        let mut steps = Vec::new();
        let mut sites = Vec::new();
        let mut fault = |steps: &mut Vec<Step>, kind: SiteKind, qubits: Vec<usize>| {
            steps.push(Step::Fault(sites.len()));
            sites.push(Site { kind, qubits });
        };
        // Slots: 0..4 are the m_k outcomes, 4..8 the l_k outcomes, 8 is P.
        let (p_basis, m_basis, l_basis) = match kind {
            GadgetKind::ZCheck => (Basis::Z, Basis::Z, Basis::X),
            GadgetKind::XCheck => (Basis::X, Basis::X, Basis::Z),
        };
        fault(&mut steps, SiteKind::Single, vec![P]);
        for k in 0..4 {
            fault(&mut steps, SiteKind::Werner, vec![l(k), m(k)]);
            match kind {
                GadgetKind::ZCheck => {
                    steps.push(Step::Cnot(k, m(k)));
                    fault(&mut steps, SiteKind::Two, vec![k, m(k)]);
                }
                GadgetKind::XCheck => {
                    steps.push(Step::Cnot(m(k), k));
                    fault(&mut steps, SiteKind::Two, vec![m(k), k]);
                }
            }
            fault(&mut steps, SiteKind::Single, vec![m(k)]);
            steps.push(Step::Measure {
                qubit: m(k),
                basis: m_basis,
                slot: k,
            });
            match kind {
                GadgetKind::ZCheck => {
                    steps.push(Step::Cnot(l(k), P));
                    fault(&mut steps, SiteKind::Two, vec![l(k), P]);
                }
                GadgetKind::XCheck => {
                    steps.push(Step::Cnot(P, l(k)));
                    fault(&mut steps, SiteKind::Two, vec![P, l(k)]);
                }
            }
            fault(&mut steps, SiteKind::Single, vec![l(k)]);
            steps.push(Step::Measure {
                qubit: l(k),
                basis: l_basis,
                slot: 4 + k,
            });
            // Z^{x_k} after a Z check, X^{z_k} after an X check.
            let byproduct = match kind {
                GadgetKind::ZCheck => Basis::Z,
                GadgetKind::XCheck => Basis::X,
            };
            steps.push(Step::Byproduct {
                target: k,
                slot: 4 + k,
                basis: byproduct,
            });
        }
        fault(&mut steps, SiteKind::Single, vec![P]);
        steps.push(Step::Measure {
            qubit: P,
            basis: p_basis,
            slot: 8,
        });
        Self {
            steps,
            sites,
            check_slots: vec![0, 1, 2, 3, 8],
        }
    }

    pub(crate) fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub(crate) fn site_width(&self, site: usize) -> usize {
        self.sites[site].qubits.len()
    }

    /// Pushes a set of injected Paulis through the round. Each injection is
    /// `(site, pauli)` where `pauli` packs two bits `(x, z)` per site qubit,
    /// first qubit in the low bits.
    pub(crate) fn propagate(&self, injections: &[(usize, u8)]) -> GadgetResidual {
        let mut f = Frame::default();
        let mut slots = [false; 9];
        for step in &self.steps {
            match *step {
                Step::Cnot(c, t) => {
                    f.x ^= ((f.x >> c) & 1) << t;
                    f.z ^= ((f.z >> t) & 1) << c;
                }
                Step::Measure { qubit, basis, slot } => {
                    let bit = match basis {
                        Basis::Z => f.x >> qubit & 1,
                        Basis::X => f.z >> qubit & 1,
                    };
                    slots[slot] = bit == 1;
                    f.x &= !(1 << qubit);
                    f.z &= !(1 << qubit);
                }
                Step::Byproduct {
                    target,
                    slot,
                    basis,
                } => {
                    if slots[slot] {
                        match basis {
                            Basis::X => f.x ^= 1 << target,
                            Basis::Z => f.z ^= 1 << target,
                        }
                    }
                }
                Step::Fault(site) => {
                    for &(s, pauli) in injections {
                        if s != site {
                            continue;
                        }
                        for (i, &q) in self.sites[site].qubits.iter().enumerate() {
                            let bits = pauli >> (2 * i) & 3;
                            f.x ^= u16::from(bits & 1) << q;
                            f.z ^= u16::from(bits >> 1) << q;
                        }
                    }
                }
            }
        }
        GadgetResidual {
            flip: self.check_slots.iter().fold(false, |a, &s| a ^ slots[s]),
            data_x: (f.x & 0xf) as u8,
            data_z: (f.z & 0xf) as u8,
        }
    }
}

/// First-order coefficients of a probability in the three physical
/// parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Coefficients {
    #[serde(serialize_with = "ser_ratio")]
    pub q: Q,
    #[serde(serialize_with = "ser_ratio")]
    pub p: Q,
    #[serde(serialize_with = "ser_ratio")]
    pub p_m: Q,
}

fn ser_ratio<S: serde::Serializer>(r: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn to_f64(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl Coefficients {
    pub fn new(q: Q, p: Q, p_m: Q) -> Self {
        Self { q, p, p_m }
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }

    pub fn eval(&self, noise: &PhysicalNoise) -> f64 {
        to_f64(self.q) * noise.q + to_f64(self.p) * noise.p + to_f64(self.p_m) * noise.p_m
    }
}

impl std::ops::AddAssign for Coefficients {
    fn add_assign(&mut self, rhs: Self) {
        self.q += rhs.q;
        self.p += rhs.p;
        self.p_m += rhs.p_m;
    }
}

impl fmt::Display for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*q + {}*p + {}*p_m", self.q, self.p, self.p_m)
    }
}

/// Residual class of a fault as seen by one sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FaultClass {
    /// Only the check value flips.
    Flip,
    /// One neighbour errs.
    Data(usize),
    /// The check value flips and one neighbour errs.
    FlipData(usize),
    /// Two neighbours err together.
    Pair(usize, usize),
    Other,
}

impl fmt::Display for FaultClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FaultClass::Flip => write!(f, "flip"),
            FaultClass::Data(k) => write!(f, "data {}", POSITION_NAMES[k]),
            FaultClass::FlipData(k) => write!(f, "flip + data {}", POSITION_NAMES[k]),
            FaultClass::Pair(a, b) => {
                write!(f, "pair {}{}", POSITION_NAMES[a], POSITION_NAMES[b])
            }
            FaultClass::Other => write!(f, "other"),
        }
    }
}

/// Sector-relevant part of a residual. A residual left by a check of the
/// other type is reduced modulo that check's own stabilizer.
fn sector_view(kind: GadgetKind, sector: Sector, r: GadgetResidual) -> (bool, u8) {
    let own = kind.sector() == sector;
    let mut bits = match sector {
        Sector::Z => r.data_x,
        Sector::X => r.data_z,
    };
    if !own && bits.count_ones() >= 3 {
        bits ^= 0xf;
    }
    (own && r.flip, bits)
}

fn classify(flip: bool, bits: u8) -> Option<FaultClass> {
    let set: Vec<usize> = (0..4).filter(|k| bits >> k & 1 == 1).collect();
    match (flip, set.as_slice()) {
        (false, []) => None,
        (true, []) => Some(FaultClass::Flip),
        (false, [k]) => Some(FaultClass::Data(*k)),
        (true, [k]) => Some(FaultClass::FlipData(*k)),
        (false, [a, b]) => Some(FaultClass::Pair(*a, *b)),
        _ => Some(FaultClass::Other),
    }
}

/// Neighbour positions through which a data qubit is seen by checks of the
/// sector's own type and of the other type, for the even-even and odd-odd
/// sublattices.
fn positions(sector: Sector, odd: bool) -> ([usize; 2], [usize; 2]) {
    let (a, b) = ([0, 2], [1, 3]);
    match (sector, odd) {
        (Sector::X, false) | (Sector::Z, true) => (a, b),
        (Sector::X, true) | (Sector::Z, false) => (b, a),
    }
}

/// Outcome of the circuit-level fault count.
#[derive(Debug, Clone, Serialize)]
pub struct FaultReport {
    pub noise: PhysicalNoise,
    /// Check-value flip probability, per sector.
    pub eps_s: [Coefficients; 2],
    /// Data error probability per sector, for the even-even and odd-odd
    /// sublattices.
    pub eps_e: [[Coefficients; 2]; 2],
    /// Right+down pair probability per sector.
    pub eps_c: [Coefficients; 2],
    /// Per gadget and sector: probability of each residual class.
    pub classes: Vec<(GadgetKind, Sector, FaultClass, Coefficients)>,
}

/// The rates used by the phenomenological model, as exact coefficients.
pub fn closed_form() -> (Coefficients, Coefficients, Coefficients) {
    let r = |n, d| Q::new(n, d);
    (
        Coefficients::new(r(2, 1), r(124, 15), r(0, 1)),
        Coefficients::new(r(1, 1), r(76, 15), r(2, 3)),
        Coefficients::new(r(0, 1), r(8, 15), r(0, 1)),
    )
}

/// Counts every single-fault location of one round of both check gadgets
/// and sums the residual classes to first order.
pub fn enumerate_fault_classes(noise: PhysicalNoise) -> FaultReport {
    // Per gadget kind: accumulated (flip, bits) class weights per sector.
    let mut per: BTreeMap<(GadgetKind, Sector), BTreeMap<(bool, u8), Coefficients>> =
        BTreeMap::new();
    for kind in GadgetKind::ALL {
        let gadget = Gadget::new(kind);
        for site in 0..gadget.num_sites() {
            let width = gadget.site_width(site);
            let n_paulis = 1u8 << (2 * width);
            let weight = match gadget.sites[site].kind {
                SiteKind::Werner => Coefficients::new(Q::new(1, 16), Q::from(0), Q::from(0)),
                SiteKind::Single => Coefficients::new(Q::from(0), Q::new(1, 3), Q::from(0)),
                SiteKind::Two => Coefficients::new(Q::from(0), Q::new(1, 15), Q::from(0)),
            };
            for pauli in 1..n_paulis {
                let r = gadget.propagate(&[(site, pauli)]);
                for sector in Sector::ALL {
                    let key = sector_view(kind, sector, r);
                    *per.entry((kind, sector))
                        .or_default()
                        .entry(key)
                        .or_default() += weight;
                }
            }
        }
    }
    // Memory: single-qubit depolarizing on each data qubit per round.
    let memory = Coefficients::new(Q::from(0), Q::from(0), Q::new(2, 3));

    let mut eps_s = [Coefficients::default(); 2];
    let mut eps_e = [[Coefficients::default(); 2]; 2];
    let mut eps_c = [Coefficients::default(); 2];
    let mut classes = Vec::new();
    for sector in Sector::ALL {
        let si = sector.index();
        for odd in [false, true] {
            eps_e[si][odd as usize] = memory;
        }
        for kind in GadgetKind::ALL {
            let own = kind.sector() == sector;
            let table = &per[&(kind, sector)];
            let mut by_class: BTreeMap<FaultClass, Coefficients> = BTreeMap::new();
            for (&(flip, bits), &c) in table {
                if flip {
                    eps_s[si] += c;
                }
                if !flip && bits == 0b1100 {
                    eps_c[si] += c;
                }
                for odd in [false, true] {
                    let (own_pos, cross_pos) = positions(sector, odd);
                    let pos = if own { own_pos } else { cross_pos };
                    for k in pos {
                        if bits >> k & 1 == 1 {
                            eps_e[si][odd as usize] += c;
                        }
                    }
                }
                if let Some(class) = classify(flip, bits) {
                    *by_class.entry(class).or_default() += c;
                }
            }
            classes.extend(
                by_class
                    .into_iter()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(class, c)| (kind, sector, class, c)),
            );
        }
    }
    FaultReport {
        noise,
        eps_s,
        eps_e,
        eps_c,
        classes,
    }
}

impl FaultReport {
    /// Evaluated rates of the Z sector on the even-even sublattice.
    pub fn rates(&self) -> EffectiveRates {
        EffectiveRates {
            eps_s: self.eps_s[0].eval(&self.noise),
            eps_e: self.eps_e[0][0].eval(&self.noise),
            eps_c: self.eps_c[0].eval(&self.noise),
        }
    }

    /// Derived versus closed-form coefficients, followed by the per-class
    /// breakdown.
    pub fn table(&self) -> String {
        let (cs, ce, cc) = closed_form();
        let mut rows: Vec<(String, Coefficients, Coefficients)> = Vec::new();
        for sector in Sector::ALL {
            let si = sector.index();
            let tag = sector.label();
            rows.push((format!("eps_S [{tag}]"), self.eps_s[si], cs));
            rows.push((format!("eps_E [{tag}, even]"), self.eps_e[si][0], ce));
            rows.push((format!("eps_E [{tag}, odd]"), self.eps_e[si][1], ce));
            rows.push((format!("eps_C [{tag}]"), self.eps_c[si], cc));
        }
        let mut out = String::new();
        out.push_str(&format!(
            "{:<18} {:>8} {:>8} {:>6}   {:>8} {:>8} {:>6}   {:>12} {:>12}\n",
            "rate", "q", "p", "p_m", "q*", "p*", "p_m*", "derived", "closed"
        ));
        for (name, d, c) in rows {
            out.push_str(&format!(
                "{:<18} {:>8} {:>8} {:>6}   {:>8} {:>8} {:>6}   {:>12.6e} {:>12.6e}\n",
                name,
                d.q.to_string(),
                d.p.to_string(),
                d.p_m.to_string(),
                c.q.to_string(),
                c.p.to_string(),
                c.p_m.to_string(),
                d.eval(&self.noise),
                c.eval(&self.noise),
            ));
        }
        out.push_str("\nper-class breakdown (gadget, sector, class: q p p_m)\n");
        for (kind, sector, class, c) in &self.classes {
            out.push_str(&format!(
                "{:<7} {} {:<14} {:>6} {:>8} {:>6}\n",
                format!("{kind:?}"),
                sector.label(),
                class.to_string(),
                c.q.to_string(),
                c.p.to_string(),
                c.p_m.to_string()
            ));
        }
        out
    }
}
