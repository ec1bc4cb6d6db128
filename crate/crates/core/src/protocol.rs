//! Repeated stabilizer rounds in the Pauli frame and conversion of the
//! syndrome history into space-time detection events.
//!
//! Outcomes are stored relative to the noiseless run: `true` means the
//! measured value differs from what a perfect run would have reported.

use std::fmt::Write as _;

use rand::Rng;

use crate::noise::{EffectiveRates, ErrorHistory};
use crate::topology::{CodeLattice, NodeCoord, Sector, SectorLayout};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeHistory {
    /// `outcomes[t][s]`: round `t` outcome of stabilizer `s` is flipped.
    pub outcomes: Vec<Vec<bool>>,
    /// Final single-qubit readout flips; only qubits read out in this
    /// sector's basis are meaningful.
    pub final_data: Vec<bool>,
}

impl SyndromeHistory {
    pub fn n_rounds(&self) -> usize {
        self.outcomes.len()
    }
}

/// A change of a stabilizer's value at a given round. Round `n_rounds`
/// is the comparison against the final readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DetectionEvent {
    pub round: usize,
    pub stabilizer: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionEventSet {
    pub sector: Sector,
    pub n_rounds: usize,
    /// Sorted by `(round, stabilizer)`.
    pub events: Vec<DetectionEvent>,
}

impl DetectionEventSet {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        let mut events: Vec<DetectionEvent> = self
            .events
            .iter()
            .filter(|e| other.events.binary_search(e).is_err())
            .chain(
                other
                    .events
                    .iter()
                    .filter(|e| self.events.binary_search(e).is_err()),
            )
            .copied()
            .collect();
        events.sort_unstable();
        Self {
            sector: self.sector,
            n_rounds: self.n_rounds,
            events,
        }
    }
}

/// Outcome flips implied by a given error history.
pub fn syndrome_from_errors(layout: &SectorLayout, errors: &ErrorHistory) -> SyndromeHistory {
    let n = errors.n_rounds();
    let mut acc = vec![false; layout.num_qubits()];
    let mut outcomes = Vec::with_capacity(n);
    for t in 0..n {
        for (a, &e) in acc.iter_mut().zip(&errors.data[t]) {
            *a ^= e;
        }
        let round = layout
            .stabilizers
            .iter()
            .zip(&errors.meas[t])
            .map(|(support, &m)| support.iter().fold(m, |p, &q| p ^ acc[q]))
            .collect();
        outcomes.push(round);
    }
    for (a, &e) in acc.iter_mut().zip(&errors.data[n]) {
        *a ^= e;
    }
    for (a, &r) in acc.iter_mut().zip(&layout.readout) {
        *a &= r;
    }
    SyndromeHistory {
        outcomes,
        final_data: acc,
    }
}

/// Runs `n_rounds` noisy rounds of one sector.
pub fn run_sector<R: Rng + ?Sized>(
    layout: &SectorLayout,
    rates: &EffectiveRates,
    n_rounds: usize,
    rng: &mut R,
) -> Result<(SyndromeHistory, ErrorHistory)> {
    check_rounds(n_rounds)?;
    let errors = ErrorHistory::sample(rates, layout, n_rounds, rng);
    Ok((syndrome_from_errors(layout, &errors), errors))
}

fn check_rounds(n_rounds: usize) -> Result<()> {
    if n_rounds == 0 {
        return Err(Error::InvalidDimensions("n_rounds must be >= 1".into()));
    }
    Ok(())
}

/// Both sectors of one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub layouts: [SectorLayout; 2],
    pub syndromes: [SyndromeHistory; 2],
    pub errors: [ErrorHistory; 2],
}

impl ProtocolRun {
    pub fn events(&self) -> [DetectionEventSet; 2] {
        [0, 1].map(|i| detection_events(&self.layouts[i], &self.syndromes[i]))
    }
}

/// Runs the full protocol: the Z sector first, then the X sector, from the
/// same random stream.
pub fn run_protocol<L: CodeLattice + ?Sized, R: Rng + ?Sized>(
    lattice: &L,
    rates: &EffectiveRates,
    n_rounds: usize,
    rng: &mut R,
) -> Result<ProtocolRun> {
    check_rounds(n_rounds)?;
    let layouts = crate::topology::dual_sector(lattice);
    let (sz, ez) = run_sector(&layouts[0], rates, n_rounds, rng)?;
    let (sx, ex) = run_sector(&layouts[1], rates, n_rounds, rng)?;
    Ok(ProtocolRun {
        layouts,
        syndromes: [sz, sx],
        errors: [ez, ex],
    })
}

/// Compares consecutive rounds and the final readout.
pub fn detection_events(layout: &SectorLayout, history: &SyndromeHistory) -> DetectionEventSet {
    let n = history.n_rounds();
    let mut events = Vec::new();
    if layout.reference_known {
        for (s, &o) in history.outcomes[0].iter().enumerate() {
            if o {
                events.push(DetectionEvent {
                    round: 0,
                    stabilizer: s,
                });
            }
        }
    }
    for t in 1..n {
        for (s, (&a, &b)) in history.outcomes[t - 1]
            .iter()
            .zip(&history.outcomes[t])
            .enumerate()
        {
            if a != b {
                events.push(DetectionEvent {
                    round: t,
                    stabilizer: s,
                });
            }
        }
    }
    for (s, support) in layout.stabilizers.iter().enumerate() {
        if !support.iter().all(|&q| layout.readout[q]) {
            continue;
        }
        let readout = support
            .iter()
            .fold(false, |p, &q| p ^ history.final_data[q]);
        if readout != history.outcomes[n - 1][s] {
            events.push(DetectionEvent {
                round: n,
                stabilizer: s,
            });
        }
    }
    DetectionEventSet {
        sector: layout.sector,
        n_rounds: n,
        events,
    }
}

/// One line of an event dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EventRecord {
    pub sector: Sector,
    pub round: usize,
    pub coord: NodeCoord,
}

/// Writes events as `sector,round,row,col` lines.
pub fn write_event_dump(layouts: &[SectorLayout], sets: &[DetectionEventSet]) -> String {
    let mut out = String::new();
    for set in sets {
        let layout = layouts
            .iter()
            .find(|l| l.sector == set.sector)
            .expect("layout for every event set");
        for e in &set.events {
            let c = layout.ancillas[e.stabilizer];
            let _ = writeln!(
                out,
                "{},{},{},{}",
                set.sector.label(),
                e.round,
                c.row,
                c.col
            );
        }
    }
    out
}

/// Parses an event dump. Blank lines and lines starting with `#` are
/// skipped.
pub fn parse_event_dump(text: &str) -> Result<Vec<EventRecord>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [sector, round, row, col] = fields.as_slice() else {
            return Err(err(format!("expected 4 fields, got {}", fields.len())));
        };
        let sector =
            Sector::from_label(sector).ok_or_else(|| err(format!("unknown sector `{sector}`")))?;
        let num = |name: &str, v: &str| {
            v.parse::<usize>()
                .map_err(|e| err(format!("bad {name} `{v}`: {e}")))
        };
        out.push(EventRecord {
            sector,
            round: num("round", round)?,
            coord: NodeCoord::new(num("row", row)?, num("col", col)?),
        });
    }
    Ok(out)
}

/// Resolves parsed records of one sector against a layout.
pub fn events_from_records(
    layout: &SectorLayout,
    n_rounds: usize,
    records: &[EventRecord],
) -> Result<DetectionEventSet> {
    let mut events = Vec::new();
    for r in records.iter().filter(|r| r.sector == layout.sector) {
        let stabilizer = layout.ancilla_index(r.coord).ok_or_else(|| {
            Error::Config(format!(
                "({}, {}) is not a {} ancilla",
                r.coord.row,
                r.coord.col,
                layout.sector.label()
            ))
        })?;
        if r.round > n_rounds {
            return Err(Error::Config(format!(
                "event round {} exceeds {} rounds",
                r.round, n_rounds
            )));
        }
        events.push(DetectionEvent {
            round: r.round,
            stabilizer,
        });
    }
    events.sort_unstable();
    // Repeated lines cancel in pairs.
    let mut dedup: Vec<DetectionEvent> = Vec::with_capacity(events.len());
    for e in events {
        if dedup.last() == Some(&e) {
            dedup.pop();
        } else {
            dedup.push(e);
        }
    }
    Ok(DetectionEventSet {
        sector: layout.sector,
        n_rounds,
        events: dedup,
    })
}
