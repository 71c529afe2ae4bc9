//! Exact branch-enumeration simulator.
//!
//! Wires enter the state as `𝕀/d` the first time a gate touches them and are
//! traced out right after their last use, so the live density matrix only
//! spans wires currently in flight. Measurements branch over all `d²`
//! outcomes; in each branch the measured wire is re-prepared in `Π_x` and the
//! rest of the state is the conditional reduction `tr_k[(Π_x/d ⊗ 𝕀)ρ] / P(x)`.

use crate::dist::{JointDistribution, Variable};
use crate::error::{Error, Result};
use crate::linalg::{c, contract_subsystem, embed, identity, insert_subsystem, partial_trace, trace, CMatrix, Layout};

use super::{FunctionalModel, Gate};

/// Largest joint outcome table `simulate` will build.
pub const MAX_OUTCOME_TUPLES: usize = 1_000_000;
/// Largest live Hilbert-space dimension `simulate` will track.
pub const MAX_STATE_DIM: usize = 256;
/// Allowed drift of total probability before reporting an internal failure.
const TRACE_DRIFT_TOL: f64 = 1e-8;

enum Op<'a> {
    Unitary {
        wires: Vec<usize>,
        matrix: &'a CMatrix,
    },
    Measure {
        wire: usize,
        slot: usize,
        projectors: &'a [CMatrix],
        dim: usize,
    },
    Prepare {
        wire: usize,
        slot: usize,
        projector: &'a CMatrix,
        outcome: usize,
    },
    Discard {
        wire: usize,
    },
    Release {
        wire: usize,
    },
}

#[derive(Clone)]
struct State {
    /// Wire indices in tensor order.
    live: Vec<usize>,
    rho: CMatrix,
}

impl State {
    fn layout(&self, dims: &[usize]) -> Layout {
        Layout::new(self.live.iter().map(|&w| dims[w]).collect())
    }

    fn position(&self, wire: usize) -> Option<usize> {
        self.live.iter().position(|&w| w == wire)
    }

    /// Position of `wire`, introducing it as `𝕀/d` if it is not yet live.
    fn ensure(&mut self, wire: usize, dims: &[usize]) -> Result<usize> {
        if let Some(k) = self.position(wire) {
            return Ok(k);
        }
        let d = dims[wire];
        self.live.push(wire);
        let layout = self.layout(dims);
        if layout.total() > MAX_STATE_DIM {
            return Err(Error::Overflow(format!(
                "live state dimension {} exceeds {MAX_STATE_DIM}",
                layout.total()
            )));
        }
        let mixed = identity(d) / c(d as f64, 0.0);
        self.rho = insert_subsystem(&self.rho, &mixed, &layout, self.live.len() - 1);
        Ok(self.live.len() - 1)
    }

    fn trace_out(&mut self, wire: usize, dims: &[usize]) {
        if let Some(k) = self.position(wire) {
            let layout = self.layout(dims);
            self.rho = partial_trace(&self.rho, &layout, k);
            self.live.remove(k);
        }
    }
}

/// Exact joint distribution of all node outcomes, in circuit order.
pub fn simulate(model: &FunctionalModel) -> Result<JointDistribution> {
    let order = model.node_order();
    let vars: Vec<Variable> = order
        .iter()
        .map(|(name, d)| Variable::new(name.clone(), d * d))
        .collect();
    let tuples = vars
        .iter()
        .try_fold(1usize, |acc, v| acc.checked_mul(v.outcomes))
        .filter(|&n| n <= MAX_OUTCOME_TUPLES)
        .ok_or_else(|| Error::Overflow(format!("outcome table exceeds {MAX_OUTCOME_TUPLES} entries")))?;
    let dims: Vec<usize> = model.wires().iter().map(|w| w.dim).collect();
    let ops = plan(model);

    let mut table = vec![0.0; tuples];
    let layout = Layout::new(vars.iter().map(|v| v.outcomes).collect());
    let mut record = vec![0usize; vars.len()];
    let start = State {
        live: Vec::new(),
        rho: identity(1),
    };
    let mut sim = Branching {
        ops: &ops,
        dims: &dims,
        layout: &layout,
        table: &mut table,
    };
    sim.run(0, start, 1.0, &mut record)?;

    let total: f64 = table.iter().sum();
    if (total - 1.0).abs() > TRACE_DRIFT_TOL {
        return Err(Error::Internal(format!("total probability drifted to {total}")));
    }
    JointDistribution::new(vars, table)
}

/// Lowers gates to ops with wire indices and inserts a release after each wire's last use.
fn plan(model: &FunctionalModel) -> Vec<Op<'_>> {
    let mut slot = 0usize;
    let mut ops = Vec::new();
    let mut last_use = vec![None; model.wires().len()];
    for (i, g) in model.gates().iter().enumerate() {
        let touched: Vec<usize> = match g {
            Gate::Unitary(u) => u.wires().iter().map(|w| model.wire_index(w)).collect(),
            Gate::Measure(m) | Gate::Prepare { measurement: m, .. } => vec![model.wire_index(&m.wire)],
            Gate::Discard { wire } => vec![model.wire_index(wire)],
        };
        for w in touched {
            last_use[w] = Some(i);
        }
    }
    for (i, g) in model.gates().iter().enumerate() {
        let op = match g {
            Gate::Unitary(u) => Op::Unitary {
                wires: u.wires().iter().map(|w| model.wire_index(w)).collect(),
                matrix: u.matrix(),
            },
            Gate::Measure(m) => {
                slot += 1;
                Op::Measure {
                    wire: model.wire_index(&m.wire),
                    slot: slot - 1,
                    projectors: m.povm().projectors(),
                    dim: m.povm().dim(),
                }
            }
            Gate::Prepare { measurement, outcome } => {
                slot += 1;
                Op::Prepare {
                    wire: model.wire_index(&measurement.wire),
                    slot: slot - 1,
                    projector: measurement.povm().projector(*outcome),
                    outcome: *outcome,
                }
            }
            Gate::Discard { wire } => Op::Discard {
                wire: model.wire_index(wire),
            },
        };
        ops.push(op);
        for (w, last) in last_use.iter().enumerate() {
            if *last == Some(i) && !matches!(g, Gate::Discard { .. }) {
                ops.push(Op::Release { wire: w });
            }
        }
    }
    ops
}

struct Branching<'a> {
    ops: &'a [Op<'a>],
    dims: &'a [usize],
    layout: &'a Layout,
    table: &'a mut [f64],
}

impl Branching<'_> {
    fn run(&mut self, at: usize, mut state: State, prob: f64, record: &mut Vec<usize>) -> Result<()> {
        let mut i = at;
        while i < self.ops.len() {
            match &self.ops[i] {
                Op::Unitary { wires, matrix } => {
                    let mut targets = Vec::with_capacity(wires.len());
                    for &w in wires {
                        targets.push(state.ensure(w, self.dims)?);
                    }
                    let layout = state.layout(self.dims);
                    let full = embed(matrix, &layout, &targets);
                    state.rho = &full * &state.rho * full.adjoint();
                }
                Op::Measure {
                    wire,
                    slot,
                    projectors,
                    dim,
                } => {
                    let k = state.ensure(*wire, self.dims)?;
                    let layout = state.layout(self.dims);
                    let scale = c(*dim as f64, 0.0);
                    for (x, proj) in projectors.iter().enumerate() {
                        let rest = contract_subsystem(&state.rho, &layout, k, &(proj / scale));
                        let p = trace(&rest).re;
                        if p <= 0.0 {
                            continue;
                        }
                        let rho = insert_subsystem(&(rest / c(p, 0.0)), proj, &layout, k);
                        record[*slot] = x;
                        let branch = State {
                            live: state.live.clone(),
                            rho,
                        };
                        self.run(i + 1, branch, prob * p, record)?;
                    }
                    return Ok(());
                }
                Op::Prepare {
                    wire,
                    slot,
                    projector,
                    outcome,
                } => {
                    state.live.push(*wire);
                    let layout = state.layout(self.dims);
                    if layout.total() > MAX_STATE_DIM {
                        return Err(Error::Overflow(format!(
                            "live state dimension {} exceeds {MAX_STATE_DIM}",
                            layout.total()
                        )));
                    }
                    state.rho = insert_subsystem(&state.rho, projector, &layout, state.live.len() - 1);
                    record[*slot] = *outcome;
                }
                Op::Discard { wire } | Op::Release { wire } => state.trace_out(*wire, self.dims),
            }
            i += 1;
        }
        let drift = (trace(&state.rho).re - 1.0).abs();
        if drift > TRACE_DRIFT_TOL {
            return Err(Error::Internal(format!("branch state trace drifted by {drift:.3e}")));
        }
        self.table[self.layout.index(record)] += prob;
        Ok(())
    }
}
