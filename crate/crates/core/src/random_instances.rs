//! Seeded generator of small scheduling instances for cross-checking
//! schedulers against the exhaustive oracle.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, CircuitBuilder, GateKind};
use crate::constraints::ConstraintFlags;
use crate::layout::ArchModel;

#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub circuit: Circuit,
    pub arch: ArchModel,
    pub flags: ConstraintFlags,
}

impl Instance {
    /// Sum of gate durations; no schedule without empty ticks is longer.
    pub fn horizon(&self) -> u32 {
        self.circuit.gates().iter().map(|g| g.duration_ticks).sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct InstanceShape {
    pub max_gates: usize,
    pub max_qubits: usize,
    pub max_duration: u32,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape { max_gates: 8, max_qubits: 4, max_duration: 2 }
    }
}

pub fn random_instance(seed: u64, shape: InstanceShape) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_q = rng.gen_range(1..=shape.max_qubits.max(1));
    let n_g = rng.gen_range(1..=shape.max_gates.max(1));

    let mut b = CircuitBuilder::new(n_q);
    for _ in 0..n_g {
        let mut kind = *GateKind::SCHEDULABLE.choose(&mut rng).unwrap();
        if kind == GateKind::CPhase && n_q < 2 {
            kind = GateKind::XHalfPi;
        }
        let mut qs: Vec<usize> = (0..n_q).collect();
        qs.shuffle(&mut rng);
        qs.truncate(kind.arity());
        let dur = if rng.gen_bool(0.25) { rng.gen_range(1..=shape.max_duration.max(1)) } else { 1 };
        b.push_with_duration(kind, &qs, dur);
    }
    // A few extra forward edges between gates on different qubits.
    for to in 1..n_g {
        if rng.gen_bool(0.2) {
            let from = rng.gen_range(0..to);
            b.depend(from, to);
        }
    }
    let circuit = b.build();

    let mut order: Vec<usize> = (0..n_q).collect();
    order.shuffle(&mut rng);
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for q in order {
        match blocks.last_mut() {
            Some(last) if rng.gen_bool(0.5) => last.push(q),
            _ => blocks.push(vec![q]),
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n_q).flat_map(|a| (a + 1..n_q).map(move |b| (a, b))).collect();
    let mut overlap: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for x in 0..n_q {
        for y in 0..n_q {
            if x != y && rng.gen_bool(0.2) {
                overlap.entry(x).or_default().insert(y);
            }
        }
    }
    let n_pairs = pairs.len();
    let arch = ArchModel::new(n_q, blocks, n_pairs, pairs, overlap).expect("generated arch is valid");
    let flags = ConstraintFlags {
        block_same_protocol: rng.gen_bool(0.5),
        one_measurement_per_block: rng.gen_bool(0.5),
        park_crosstalk: rng.gen_bool(0.5),
    };
    Instance { seed, circuit, arch, flags }
}
