//! Seeded generator of functional models realizing a given QDAG.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::graph::CausalGraph;

use super::{FunctionalModel, GateSpec, Measurement, UnitarySource, Wire};

/// Largest template accepted by [`random_model`].
pub const MAX_TEMPLATE_NODES: usize = 6;

/// Builds a qubit circuit whose derived DAG is `template`.
///
/// Nodes are laid out in topological order. A root is measured on a fresh
/// maximally mixed wire. A node with parents receives one wire from each
/// parent, a Haar-random unitary mixes those wires, and the node measures the
/// first of them; the others run on to the end unmeasured. After a node with
/// `c ≥ 2` children is measured, its wire and `c − 1` fresh wires pass through
/// a Haar-random unitary and each output is reserved for one child. Every
/// unitary's seed is drawn from ChaCha20 seeded with `seed`.
pub fn random_model(template: &CausalGraph, seed: u64) -> Result<FunctionalModel> {
    if template.len() > MAX_TEMPLATE_NODES {
        return Err(Error::UnsupportedShape(format!(
            "random_model supports at most {MAX_TEMPLATE_NODES} nodes, template has {}",
            template.len()
        )));
    }
    if let Some(n) = template.nodes().iter().find(|n| n.dim != 2) {
        return Err(Error::UnsupportedShape(format!(
            "random_model builds qubit circuits; node `{}` has dimension {}",
            n.name, n.dim
        )));
    }
    if !template.is_qdag() {
        return Err(Error::UnsupportedShape("template is not a QDAG".into()));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut wires: Vec<Wire> = Vec::new();
    let fresh = |wires: &mut Vec<Wire>| {
        let id = format!("q{}", wires.len());
        wires.push(Wire::new(id.clone(), 2));
        id
    };
    let mut haar = |ws: Vec<String>| GateSpec::Unitary {
        wires: ws,
        source: UnitarySource::HaarRandom { seed: rng.next_u64() },
        adjoint: false,
    };

    let n = template.len();
    // outbox[p][k]: wire reserved for the k-th child of p (children in index order)
    let mut outbox: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut gates = Vec::new();
    for x in topological(template) {
        let parents: Vec<usize> = template.parents(x).iter().collect();
        let wire = if parents.is_empty() {
            fresh(&mut wires)
        } else {
            let incoming: Vec<String> = parents
                .iter()
                .map(|&p| {
                    let k = template
                        .children(p)
                        .iter()
                        .position(|ch| ch == x)
                        .expect("x is a child of p");
                    outbox[p][k].clone()
                })
                .collect();
            gates.push(haar(incoming.clone()));
            incoming[0].clone()
        };
        gates.push(GateSpec::Measure(Measurement::builtin(
            template.name(x),
            wire.clone(),
            2,
        )?));

        let c = template.children(x).len();
        outbox[x] = match c {
            0 => Vec::new(),
            1 => vec![wire],
            _ => {
                let mut fan = vec![wire];
                for _ in 1..c {
                    fan.push(fresh(&mut wires));
                }
                gates.push(haar(fan.clone()));
                fan
            }
        };
    }
    let model = FunctionalModel::new(wires, gates)?;
    debug_assert_eq!(&model.derive_dag()?, template);
    Ok(model)
}

fn topological(g: &CausalGraph) -> Vec<usize> {
    let mut placed = crate::graph::NodeSet::EMPTY;
    let mut order = Vec::with_capacity(g.len());
    while order.len() < g.len() {
        let next = (0..g.len())
            .find(|&v| !placed.contains(v) && g.parents(v).difference(placed).is_empty())
            .expect("graph is acyclic");
        placed.insert(next);
        order.push(next);
    }
    order
}
