//! Chip layout at the coldest stage: control-block partition, CPHASE switch
//! inventory, neighbor pairs, signal overlap, and the routing-density model.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_ARCH_JSON: &str = include_str!("../data/bs9_21_arch.json");
const CROSSTALK_ARCH_JSON: &str = include_str!("../data/bs9_21_arch_crosstalk.json");
const DEFAULT_ROUTING_CSV: &str = include_str!("../data/routing_nodes.csv");

/// Lines per qubit that reproduce the controllable-qubit routing table under
/// floor division. 11 also works; 15 does not.
pub const DEFAULT_EFFECTIVE_LINES_PER_QUBIT: u32 = 12;
/// Conducting gates and ohmic contacts on one double-dot qubit.
pub const LINES_PER_QUBIT: u32 = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlBlock {
    pub id: usize,
    pub qubit_members: Vec<usize>,
}

/// On-disk arch schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ArchFile {
    n_qubits: usize,
    blocks: Vec<Vec<usize>>,
    n_cphase_switches: usize,
    neighbor_pairs: Vec<(usize, usize)>,
    #[serde(default)]
    signal_overlap: BTreeMap<usize, Vec<usize>>,
}

/// Immutable architecture description. Construct through [`ArchModel::new`]
/// or a loader so the partition invariant always holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchModel {
    n_qubits: usize,
    blocks: Vec<ControlBlock>,
    n_cphase_switches: usize,
    neighbor_pairs: BTreeSet<(usize, usize)>,
    signal_overlap: BTreeMap<usize, BTreeSet<usize>>,
    block_of: Vec<usize>,
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ArchModel {
    pub fn new(
        n_qubits: usize,
        blocks: Vec<Vec<usize>>,
        n_cphase_switches: usize,
        neighbor_pairs: impl IntoIterator<Item = (usize, usize)>,
        signal_overlap: BTreeMap<usize, BTreeSet<usize>>,
    ) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n_qubits];
        let mut out = Vec::with_capacity(blocks.len());
        for (id, members) in blocks.into_iter().enumerate() {
            if members.is_empty() {
                return Err(Error::InvalidArch(format!("block {id} has no qubits")));
            }
            for &q in &members {
                if q >= n_qubits {
                    return Err(Error::InvalidArch(format!("block {id} names qubit {q} out of range")));
                }
                if block_of[q] != usize::MAX {
                    return Err(Error::InvalidArch(format!("qubit {q} is in blocks {} and {id}", block_of[q])));
                }
                block_of[q] = id;
            }
            out.push(ControlBlock { id, qubit_members: members });
        }
        if let Some(q) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidArch(format!("qubit {q} belongs to no block")));
        }
        let mut pairs = BTreeSet::new();
        for (a, b) in neighbor_pairs {
            if a == b || a >= n_qubits || b >= n_qubits {
                return Err(Error::InvalidArch(format!("bad neighbor pair ({a}, {b})")));
            }
            pairs.insert(ordered(a, b));
        }
        for (&x, ys) in &signal_overlap {
            if x >= n_qubits || ys.iter().any(|&y| y >= n_qubits) {
                return Err(Error::InvalidArch(format!("signal overlap for qubit {x} is out of range")));
            }
        }
        Ok(ArchModel { n_qubits, blocks: out, n_cphase_switches, neighbor_pairs: pairs, signal_overlap, block_of })
    }

    /// One qubit per block and every pair CPhase-capable: a chip with no
    /// shared electronics.
    pub fn fully_connected(n_qubits: usize) -> Self {
        let blocks = (0..n_qubits).map(|q| vec![q]).collect();
        let pairs: Vec<_> = (0..n_qubits).flat_map(|a| (a + 1..n_qubits).map(move |b| (a, b))).collect();
        let switches = pairs.len();
        ArchModel::new(n_qubits, blocks, switches, pairs, BTreeMap::new()).expect("singleton partition is valid")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn blocks(&self) -> &[ControlBlock] {
        &self.blocks
    }

    pub fn block_of(&self, qubit: usize) -> usize {
        self.block_of[qubit]
    }

    pub fn n_cphase_switches(&self) -> usize {
        self.n_cphase_switches
    }

    pub fn neighbor_pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.neighbor_pairs
    }

    pub fn can_couple(&self, a: usize, b: usize) -> bool {
        self.neighbor_pairs.contains(&ordered(a, b))
    }

    pub fn signal_overlap(&self) -> &BTreeMap<usize, BTreeSet<usize>> {
        &self.signal_overlap
    }

    /// Qubits whose control signals route over `qubit`.
    pub fn overlapped_by(&self, qubit: usize) -> impl Iterator<Item = usize> + '_ {
        self.signal_overlap.get(&qubit).into_iter().flatten().copied()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ArchFile = serde_json::from_str(text)?;
        let overlap = file.signal_overlap.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect();
        ArchModel::new(file.n_qubits, file.blocks, file.n_cphase_switches, file.neighbor_pairs, overlap)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ArchFile {
            n_qubits: self.n_qubits,
            blocks: self.blocks.iter().map(|b| b.qubit_members.clone()).collect(),
            n_cphase_switches: self.n_cphase_switches,
            neighbor_pairs: self.neighbor_pairs.iter().copied().collect(),
            signal_overlap: self.signal_overlap.iter().map(|(k, v)| (*k, v.iter().copied().collect())).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

/// The shipped BS9(21) model: 16 blocks (11 single-qubit, 5 two-qubit
/// blocks each serving two ancillas of the same check type that share a data
/// qubit), 24 CPHASE switches, and neighbor pairs covering every gauge check.
pub fn default_bs9_21_arch() -> ArchModel {
    ArchModel::from_json(DEFAULT_ARCH_JSON).expect("bundled arch file is valid")
}

/// Same blocks as [`default_bs9_21_arch`], plus signal overlaps where an
/// ancilla's control lines run over a neighboring data qubit, so the park
/// rule has something to act on.
pub fn crosstalk_bs9_21_arch() -> ArchModel {
    ArchModel::from_json(CROSSTALK_ARCH_JSON).expect("bundled arch file is valid")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingNode {
    pub name: String,
    pub channels: u32,
    #[serde(rename = "eff_lines")]
    pub effective_lines_per_qubit: u32,
}

/// How many qubits a routing channel budget can reach when no control
/// line is shared.
pub fn controllable_qubits(node: &RoutingNode) -> u32 {
    node.channels / node.effective_lines_per_qubit.max(1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingRow {
    pub name: String,
    pub channels: u32,
    pub controllable_qubits: u32,
}

pub fn routing_table(nodes: &[RoutingNode]) -> Vec<RoutingRow> {
    nodes
        .iter()
        .map(|n| RoutingRow { name: n.name.clone(), channels: n.channels, controllable_qubits: controllable_qubits(n) })
        .collect()
}

pub fn read_routing_nodes<R: Read>(reader: R) -> Result<Vec<RoutingNode>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut nodes = Vec::new();
    for row in rdr.deserialize() {
        let node: RoutingNode = row?;
        if node.effective_lines_per_qubit == 0 {
            return Err(Error::InvalidParameter(format!("node {} has zero lines per qubit", node.name)));
        }
        nodes.push(node);
    }
    Ok(nodes)
}

/// Process nodes 350nm..45nm with their routing channel counts.
pub fn default_routing_nodes() -> Vec<RoutingNode> {
    read_routing_nodes(DEFAULT_ROUTING_CSV.as_bytes()).expect("bundled routing file is valid")
}

pub fn write_routing_table<W: Write>(rows: &[RoutingRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
