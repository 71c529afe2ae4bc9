//! Quantum functional models: circuits of unitaries and SIC measurements on
//! maximally mixed input wires, plus the surgery used to realize interventions
//! and un-measurements directly on the circuit.

mod random;
mod simulate;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{CausalGraph, Node, NodeSet};
use crate::linalg::{haar_unitary, unitarity_error, CMatrix};
use crate::sic::{known_sic, wh_povm_from_fiducial, Fiducial, SicPovm};

pub use random::random_model;
pub use simulate::{simulate, MAX_OUTCOME_TUPLES, MAX_STATE_DIM};

/// Allowed deviation of `U†U` from the identity.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wire {
    pub id: String,
    pub dim: usize,
}

impl Wire {
    pub fn new(id: impl Into<String>, dim: usize) -> Self {
        Wire { id: id.into(), dim }
    }
}

/// Where a unitary's matrix comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitarySource {
    Matrix(CMatrix),
    /// Haar-random unitary generated from a seed (see [`haar_unitary`]).
    HaarRandom {
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct UnitaryGate {
    wires: Vec<String>,
    source: UnitarySource,
    adjoint: bool,
    matrix: CMatrix,
}

impl PartialEq for UnitaryGate {
    fn eq(&self, other: &Self) -> bool {
        self.wires == other.wires && self.source == other.source && self.adjoint == other.adjoint
    }
}

impl UnitaryGate {
    /// `dims` are the dimensions of `wires`, in order.
    fn realize(wires: Vec<String>, dims: &[usize], source: UnitarySource, adjoint: bool) -> Result<Self> {
        let side: usize = dims.iter().product();
        let base = match &source {
            UnitarySource::Matrix(m) => m.clone(),
            UnitarySource::HaarRandom { seed } => haar_unitary(side, *seed),
        };
        if base.shape() != (side, side) {
            return Err(Error::InvalidModel(format!(
                "unitary on {wires:?} must be {side}×{side}, got {:?}",
                base.shape()
            )));
        }
        let err = unitarity_error(&base);
        if err > UNITARITY_TOL {
            return Err(Error::InvalidModel(format!(
                "matrix on {wires:?} is not unitary (‖U†U − I‖ = {err:.3e})"
            )));
        }
        let matrix = if adjoint { base.adjoint() } else { base };
        Ok(UnitaryGate {
            wires,
            source,
            adjoint,
            matrix,
        })
    }

    pub fn wires(&self) -> &[String] {
        &self.wires
    }

    pub fn source(&self) -> &UnitarySource {
        &self.source
    }

    /// True when the gate applies the adjoint of its source matrix.
    pub fn adjoint(&self) -> bool {
        self.adjoint
    }

    /// The matrix actually applied.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Which SIC a measurement uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SicSource {
    /// Built-in analytic SIC of the given dimension (`sic2`, `sic3`).
    Builtin(usize),
    /// Weyl–Heisenberg orbit of a fiducial stored in a text file.
    FiducialFile(PathBuf),
}

impl SicSource {
    /// File-format label: `sic2`, `sic3`, or the fiducial path.
    pub fn label(&self) -> String {
        match self {
            SicSource::Builtin(d) => format!("sic{d}"),
            SicSource::FiducialFile(p) => p.display().to_string(),
        }
    }

    pub fn from_label(label: &str) -> SicSource {
        match label.strip_prefix("sic").and_then(|d| d.parse::<usize>().ok()) {
            Some(d) if d == 2 || d == 3 => SicSource::Builtin(d),
            _ => SicSource::FiducialFile(PathBuf::from(label)),
        }
    }

    /// Builds the POVM; relative fiducial paths resolve against `base_dir`.
    pub fn load(&self, base_dir: Option<&std::path::Path>) -> Result<SicPovm> {
        match self {
            SicSource::Builtin(d) => known_sic(*d),
            SicSource::FiducialFile(p) => {
                let path = match base_dir {
                    Some(base) if p.is_relative() => base.join(p),
                    _ => p.clone(),
                };
                Ok(wh_povm_from_fiducial(&Fiducial::load(&path)?))
            }
        }
    }
}

/// A SIC measurement box (or, after intervention surgery, the preparation that replaces it).
#[derive(Debug, Clone)]
pub struct Measurement {
    pub node: String,
    pub wire: String,
    pub sic: SicSource,
    povm: Arc<SicPovm>,
}

impl PartialEq for Measurement {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node && self.wire == other.wire && self.sic == other.sic
    }
}

impl Measurement {
    pub fn new(node: impl Into<String>, wire: impl Into<String>, sic: SicSource, povm: SicPovm) -> Self {
        Measurement {
            node: node.into(),
            wire: wire.into(),
            sic,
            povm: Arc::new(povm),
        }
    }

    /// Measurement with a built-in SIC.
    pub fn builtin(node: impl Into<String>, wire: impl Into<String>, dim: usize) -> Result<Self> {
        Ok(Measurement::new(node, wire, SicSource::Builtin(dim), known_sic(dim)?))
    }

    pub fn povm(&self) -> &SicPovm {
        &self.povm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Unitary(UnitaryGate),
    Measure(Measurement),
    /// Deterministic preparation of `Π_outcome` on the measurement's wire,
    /// recording `outcome` for its node. Only produced by intervention surgery.
    Prepare {
        measurement: Measurement,
        outcome: usize,
    },
    /// Traces out a wire. Only produced by intervention surgery.
    Discard {
        wire: String,
    },
}

/// Unvalidated gate description; [`FunctionalModel::new`] resolves it.
#[derive(Debug, Clone)]
pub enum GateSpec {
    Unitary {
        wires: Vec<String>,
        source: UnitarySource,
        adjoint: bool,
    },
    Measure(Measurement),
    Prepare {
        measurement: Measurement,
        outcome: usize,
    },
    Discard {
        wire: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalModel {
    wires: Vec<Wire>,
    gates: Vec<Gate>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum WireState {
    Fresh,
    Live,
    Discarded,
}

impl FunctionalModel {
    pub fn new(wires: Vec<Wire>, gates: Vec<GateSpec>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, w) in wires.iter().enumerate() {
            if w.dim < 2 {
                return Err(Error::InvalidModel(format!("wire `{}` has dimension {}", w.id, w.dim)));
            }
            if index.insert(w.id.clone(), i).is_some() {
                return Err(Error::InvalidModel(format!("duplicate wire `{}`", w.id)));
            }
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::InvalidModel(format!("unknown wire `{id}`")))
        };
        let mut state = vec![WireState::Fresh; wires.len()];
        let mut nodes = BTreeSet::new();
        let mut resolved = Vec::with_capacity(gates.len());
        for spec in gates {
            let gate = match spec {
                GateSpec::Unitary {
                    wires: ws,
                    source,
                    adjoint,
                } => {
                    if ws.is_empty() {
                        return Err(Error::InvalidModel("unitary acts on no wires".into()));
                    }
                    let mut dims = Vec::with_capacity(ws.len());
                    let mut seen = BTreeSet::new();
                    for id in &ws {
                        let k = lookup(id)?;
                        if !seen.insert(k) {
                            return Err(Error::InvalidModel(format!("unitary repeats wire `{id}`")));
                        }
                        if state[k] == WireState::Discarded {
                            return Err(Error::InvalidModel(format!("wire `{id}` used after discard")));
                        }
                        state[k] = WireState::Live;
                        dims.push(wires[k].dim);
                    }
                    Gate::Unitary(UnitaryGate::realize(ws, &dims, source, adjoint)?)
                }
                GateSpec::Measure(m) => {
                    let k = lookup(&m.wire)?;
                    check_measurement(&m, &wires[k], &mut nodes)?;
                    if state[k] == WireState::Discarded {
                        return Err(Error::InvalidModel(format!("wire `{}` used after discard", m.wire)));
                    }
                    state[k] = WireState::Live;
                    Gate::Measure(m)
                }
                GateSpec::Prepare { measurement, outcome } => {
                    let k = lookup(&measurement.wire)?;
                    check_measurement(&measurement, &wires[k], &mut nodes)?;
                    if state[k] != WireState::Discarded {
                        return Err(Error::InvalidModel(format!(
                            "preparation on wire `{}` must follow a discard",
                            measurement.wire
                        )));
                    }
                    if outcome >= measurement.povm.outcome_count() {
                        return Err(Error::InvalidModel(format!(
                            "prepared outcome {} out of range for `{}`",
                            outcome + 1,
                            measurement.node
                        )));
                    }
                    state[k] = WireState::Live;
                    Gate::Prepare { measurement, outcome }
                }
                GateSpec::Discard { wire } => {
                    let k = lookup(&wire)?;
                    if state[k] == WireState::Discarded {
                        return Err(Error::InvalidModel(format!("wire `{wire}` discarded twice")));
                    }
                    state[k] = WireState::Discarded;
                    Gate::Discard { wire }
                }
            };
            resolved.push(gate);
        }
        Ok(FunctionalModel { wires, gates: resolved })
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub(crate) fn wire_index(&self, id: &str) -> usize {
        self.wires
            .iter()
            .position(|w| w.id == id)
            .expect("validated on construction")
    }

    /// No preparation or discard elements.
    pub fn is_pristine(&self) -> bool {
        self.gates
            .iter()
            .all(|g| matches!(g, Gate::Unitary(_) | Gate::Measure(_)))
    }

    /// Measurement nodes (and prepared nodes) in circuit order, with wire dimensions.
    pub fn node_order(&self) -> Vec<(String, usize)> {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Measure(m) | Gate::Prepare { measurement: m, .. } => Some((m.node.clone(), m.povm.dim())),
                _ => None,
            })
            .collect()
    }

    pub fn node_names(&self) -> Vec<String> {
        self.node_order().into_iter().map(|(n, _)| n).collect()
    }

    /// `X_i → X_j` iff a wire runs from the output of `X_i` to the input of
    /// `X_j` passing only through unitaries; a unitary connects each of its
    /// input wires to all of its output wires.
    pub fn derive_dag(&self) -> Result<CausalGraph> {
        let order = self.node_order();
        let pos: BTreeMap<&str, usize> = order.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
        let mut sources = vec![NodeSet::EMPTY; self.wires.len()];
        let mut edges = BTreeSet::new();
        for gate in &self.gates {
            match gate {
                Gate::Unitary(u) => {
                    let ks: Vec<usize> = u.wires.iter().map(|w| self.wire_index(w)).collect();
                    let merged = ks.iter().fold(NodeSet::EMPTY, |acc, &k| acc.union(sources[k]));
                    for k in ks {
                        sources[k] = merged;
                    }
                }
                Gate::Measure(m) => {
                    let k = self.wire_index(&m.wire);
                    let me = pos[m.node.as_str()];
                    for p in sources[k].iter() {
                        edges.insert((p, me));
                    }
                    sources[k] = NodeSet::single(me);
                }
                Gate::Prepare { measurement, .. } => {
                    let k = self.wire_index(&measurement.wire);
                    sources[k] = NodeSet::single(pos[measurement.node.as_str()]);
                }
                Gate::Discard { wire } => {
                    sources[self.wire_index(wire)] = NodeSet::EMPTY;
                }
            }
        }
        let nodes = order.into_iter().map(|(name, dim)| Node { name, dim }).collect();
        CausalGraph::from_indices(nodes, &edges.into_iter().collect::<Vec<_>>())
    }

    fn measurement_index(&self, node: &str) -> Result<usize> {
        self.gates
            .iter()
            .position(|g| matches!(g, Gate::Measure(m) if m.node == node))
            .ok_or_else(|| Error::UnknownNode(node.to_string()))
    }

    /// Replaces `node`'s measurement by a discard of its input followed by a
    /// deterministic preparation of `Π_value`; the node then always records `value`.
    pub fn apply_intervention_surgery(&self, node: &str, value: usize) -> Result<FunctionalModel> {
        let i = self.measurement_index(node)?;
        let Gate::Measure(m) = &self.gates[i] else {
            unreachable!("measurement_index returns measurement gates");
        };
        if value >= m.povm.outcome_count() {
            return Err(Error::InvalidArgument(format!(
                "value {} out of range 1..={} for `{node}`",
                value + 1,
                m.povm.outcome_count()
            )));
        }
        let mut gates = self.gates.clone();
        let prepare = Gate::Prepare {
            measurement: m.clone(),
            outcome: value,
        };
        gates.splice(i..=i, [Gate::Discard { wire: m.wire.clone() }, prepare]);
        Ok(FunctionalModel {
            wires: self.wires.clone(),
            gates,
        })
    }

    /// Deletes `node`'s measurement; its wire passes through untouched.
    pub fn apply_unmeasurement_surgery(&self, node: &str) -> Result<FunctionalModel> {
        let i = self.measurement_index(node)?;
        let mut gates = self.gates.clone();
        gates.remove(i);
        Ok(FunctionalModel {
            wires: self.wires.clone(),
            gates,
        })
    }

    /// Reverses gate order and replaces each unitary by its adjoint.
    pub fn time_reverse(&self) -> Result<FunctionalModel> {
        if !self.is_pristine() {
            return Err(Error::ReversalAfterSurgery);
        }
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| match g {
                Gate::Unitary(u) => Gate::Unitary(UnitaryGate {
                    wires: u.wires.clone(),
                    source: u.source.clone(),
                    adjoint: !u.adjoint,
                    matrix: u.matrix.adjoint(),
                }),
                other => other.clone(),
            })
            .collect();
        Ok(FunctionalModel {
            wires: self.wires.clone(),
            gates,
        })
    }

    /// Same circuit with every Haar seed replaced by one derived from `seed`
    /// and the gate's position.
    pub fn with_seed_override(&self, seed: u64) -> Result<FunctionalModel> {
        let specs = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| match g {
                Gate::Unitary(u) => GateSpec::Unitary {
                    wires: u.wires.clone(),
                    source: match &u.source {
                        UnitarySource::HaarRandom { .. } => UnitarySource::HaarRandom {
                            seed: derive_seed(seed, i as u64),
                        },
                        other => other.clone(),
                    },
                    adjoint: u.adjoint,
                },
                other => gate_spec(other),
            })
            .collect();
        FunctionalModel::new(self.wires.clone(), specs)
    }
}

/// splitmix64 finalizer over `(base, index)`.
pub(crate) fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn gate_spec(g: &Gate) -> GateSpec {
    match g {
        Gate::Unitary(u) => GateSpec::Unitary {
            wires: u.wires.clone(),
            source: u.source.clone(),
            adjoint: u.adjoint,
        },
        Gate::Measure(m) => GateSpec::Measure(m.clone()),
        Gate::Prepare { measurement, outcome } => GateSpec::Prepare {
            measurement: measurement.clone(),
            outcome: *outcome,
        },
        Gate::Discard { wire } => GateSpec::Discard { wire: wire.clone() },
    }
}

fn check_measurement(m: &Measurement, wire: &Wire, nodes: &mut BTreeSet<String>) -> Result<()> {
    if m.node.is_empty() {
        return Err(Error::InvalidModel("empty node name".into()));
    }
    if !nodes.insert(m.node.clone()) {
        return Err(Error::InvalidModel(format!("duplicate node `{}`", m.node)));
    }
    if m.povm.dim() != wire.dim {
        return Err(Error::InvalidModel(format!(
            "node `{}` uses a dimension-{} SIC on wire `{}` of dimension {}",
            m.node,
            m.povm.dim(),
            wire.id,
            wire.dim
        )));
    }
    Ok(())
}
