//! Closed-form causal calculus on `{P(X), G(X)}`: Markov-condition checking,
//! the intervention formula, the un-measurement formula, and enumeration of
//! compatible QDAGs.

use serde::Serialize;

use crate::dist::{JointDistribution, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::graph::{CausalGraph, Node, NodeSet, PathCache};
use crate::linalg::Layout;

/// Node cap for exhaustive triple enumeration.
pub const MARKOV_MAX_NODES: usize = 6;
/// Node cap for DAG enumeration.
pub const INFER_MAX_NODES: usize = 5;
/// Tolerance for clamping and normalization in the un-measurement formula.
pub const UNMEASURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleCheck {
    pub u: Vec<String>,
    pub v: Vec<String>,
    pub w: Vec<String>,
    pub separated: bool,
    /// Per path from `u` to `v`: the rendered path and the rule blocking it (`null` if open).
    pub paths: Vec<PathStatus>,
    /// Only computed for q-separated triples.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathStatus {
    pub path: String,
    pub rule: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovReport {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub tolerance: f64,
    pub triples: Vec<TripleCheck>,
    pub separated_triples: usize,
    pub worst_residual: f64,
    /// Indices into `triples` of q-separated triples whose residual exceeds the tolerance.
    pub violations: Vec<usize>,
    pub pass: bool,
}

/// Every triple `(u, v, w)` of disjoint node sets with `u`, `v` nonempty,
/// counting `(u, v, w)` and `(v, u, w)` once (the lowest node of `u ∪ v` lies in `u`).
fn triples(n: usize) -> Vec<(NodeSet, NodeSet, NodeSet)> {
    let mut out = Vec::new();
    let total = 4usize.pow(n as u32);
    for code in 0..total {
        let (mut u, mut v, mut w) = (NodeSet::EMPTY, NodeSet::EMPTY, NodeSet::EMPTY);
        let mut c = code;
        for i in 0..n {
            match c % 4 {
                1 => u.insert(i),
                2 => v.insert(i),
                3 => w.insert(i),
                _ => {}
            }
            c /= 4;
        }
        if u.is_empty() || v.is_empty() {
            continue;
        }
        let lowest = u.union(v).iter().next().expect("nonempty");
        if !u.contains(lowest) {
            continue;
        }
        out.push((u, v, w));
    }
    out
}

/// Maps graph node `i` to its column in `p`, checking names and outcome counts.
fn align(p: &JointDistribution, g: &CausalGraph) -> Result<Vec<usize>> {
    if p.variables().len() != g.len() {
        return Err(Error::SignatureMismatch(format!(
            "distribution has {} variables, graph has {} nodes",
            p.variables().len(),
            g.len()
        )));
    }
    (0..g.len())
        .map(|i| {
            let k = p
                .position(g.name(i))
                .map_err(|_| Error::SignatureMismatch(format!("graph node `{}` not in distribution", g.name(i))))?;
            let want = g.dim(i) * g.dim(i);
            let have = p.variables()[k].outcomes;
            if have != want {
                return Err(Error::SignatureMismatch(format!(
                    "`{}` has {have} outcomes but dimension {} implies {want}",
                    g.name(i),
                    g.dim(i)
                )));
            }
            Ok(k)
        })
        .collect()
}

fn columns(set: NodeSet, cols: &[usize]) -> Vec<usize> {
    set.iter().map(|i| cols[i]).collect()
}

/// Checks every constraint the quantum Markov condition imposes on `p` for `g`.
pub fn markov_check(p: &JointDistribution, g: &CausalGraph, tol: f64) -> Result<MarkovReport> {
    if g.len() > MARKOV_MAX_NODES {
        return Err(Error::TooManyNodes {
            nodes: g.len(),
            limit: MARKOV_MAX_NODES,
        });
    }
    let cols = align(p, g)?;
    let cache = PathCache::new(g);
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    let mut violations = Vec::new();
    let mut separated_count = 0;
    for (u, v, w) in triples(g.len()) {
        let rules = cache.rules(u, v, w);
        let separated = rules.iter().all(|(_, r)| r.is_some());
        let residual = separated.then(|| {
            p.ci_residual(&columns(u, &cols), &columns(v, &cols), &columns(w, &cols), DEFAULT_EPS)
                .0
        });
        if let Some(r) = residual {
            separated_count += 1;
            worst = worst.max(r);
            if r > tol || r.is_nan() {
                violations.push(checks.len());
            }
        }
        checks.push(TripleCheck {
            u: g.names_of(u),
            v: g.names_of(v),
            w: g.names_of(w),
            separated,
            paths: rules
                .into_iter()
                .map(|(path, rule)| PathStatus {
                    path,
                    rule: rule.map(|r| r.tag()),
                })
                .collect(),
            residual,
        });
    }
    Ok(MarkovReport {
        nodes: g.nodes().iter().map(|n| n.name.clone()).collect(),
        edges: g.edge_names().into_iter().collect(),
        tolerance: tol,
        triples: checks,
        separated_triples: separated_count,
        worst_residual: worst,
        pass: violations.is_empty(),
        violations,
    })
}

/// How the second factor of the intervention formula is conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterventionVariant {
    /// `P(S_W, A, R_A | W=w, Y⁻)`, the formula as displayed.
    AsPrinted,
    /// `P(S_W, A, R_A | Y⁻)`: conditioning on `W` dropped.
    AncestorMarginal,
}

impl InterventionVariant {
    pub fn label(self) -> &'static str {
        match self {
            InterventionVariant::AsPrinted => "as-printed",
            InterventionVariant::AncestorMarginal => "ancestor-marginal",
        }
    }
}

/// The node classes the intervention formula needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterventionPartition {
    pub target: String,
    pub slice: Vec<String>,
    pub descendants: Vec<String>,
    pub ancestors: Vec<String>,
    pub slice_descendants: Vec<String>,
    pub slice_ancestors: Vec<String>,
}

struct PartitionSets {
    target: usize,
    slice: NodeSet,
    desc: NodeSet,
    anc: NodeSet,
    slice_desc: NodeSet,
    slice_anc: NodeSet,
}

/// Partition of the nodes around `w`. Valid slices are tried in the order
/// [`CausalGraph::slices`] produces them (smallest first); the first one for
/// which `{W} ∪ S_W ∪ D ∪ A ∪ R_D ∪ R_A` covers every node is used.
pub fn intervention_partition(g: &CausalGraph, w: &str) -> Result<InterventionPartition> {
    let sets = partition_sets(g, w)?;
    Ok(InterventionPartition {
        target: w.to_string(),
        slice: g.names_of(sets.slice),
        descendants: g.names_of(sets.desc),
        ancestors: g.names_of(sets.anc),
        slice_descendants: g.names_of(sets.slice_desc),
        slice_ancestors: g.names_of(sets.slice_anc),
    })
}

fn partition_sets(g: &CausalGraph, w: &str) -> Result<PartitionSets> {
    let wi = g.index_of(w)?;
    if !g.is_qdag() {
        return Err(Error::NotQdag);
    }
    let desc = g.descendants(wi);
    let anc = g.ancestors(wi);
    let mut uncovered_names = Vec::new();
    for slice in g.slices(wi) {
        let s = slice.companions;
        let slice_desc = g.descendants_of_set(s).difference(desc);
        let slice_anc = g.ancestors_of_set(s).difference(anc);
        let covered = NodeSet::single(wi)
            .union(s)
            .union(desc)
            .union(anc)
            .union(slice_desc)
            .union(slice_anc);
        if covered == g.all() {
            return Ok(PartitionSets {
                target: wi,
                slice: s,
                desc,
                anc,
                slice_desc,
                slice_anc,
            });
        }
        if uncovered_names.is_empty() {
            uncovered_names = g.names_of(g.all().difference(covered));
        }
    }
    Err(Error::UnsupportedShape(format!(
        "no slice of `{w}` reaches {uncovered_names:?}"
    )))
}

fn one_based<S: serde::Serializer>(v: &usize, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(*v as u64 + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterventionResult {
    pub target: String,
    /// 0-based outcome the target is pinned to; serialized 1-based like every file format.
    #[serde(serialize_with = "one_based")]
    pub value: usize,
    pub variant: InterventionVariant,
    pub partition: InterventionPartition,
    #[serde(skip)]
    pub distribution: JointDistribution,
    /// `(W, S_W)` cells with zero probability whose conditional was replaced by the uniform distribution.
    pub degenerate_cells: usize,
    /// Degenerate cells that nevertheless received nonzero weight from the second factor.
    pub degenerate_weighted_cells: usize,
    pub warnings: Vec<String>,
}

/// Dense lookup into a marginal of `p` over fixed columns.
struct Marginal {
    cols: Vec<usize>,
    layout: Layout,
    table: Vec<f64>,
}

impl Marginal {
    fn new(p: &JointDistribution, cols: Vec<usize>) -> Self {
        let (layout, table) = p.marginal_table(&cols);
        Marginal { cols, layout, table }
    }

    fn at(&self, digits: &[usize]) -> f64 {
        let sub: Vec<usize> = self.cols.iter().map(|&k| digits[k]).collect();
        self.table[self.layout.index(&sub)]
    }

    fn outcomes(&self) -> usize {
        self.layout.total()
    }
}

/// Statistics after intervening on `w` to set it to `value`, from `p` and `g` alone.
pub fn intervene_formula(
    p: &JointDistribution,
    g: &CausalGraph,
    w: &str,
    value: usize,
    variant: InterventionVariant,
) -> Result<InterventionResult> {
    let cols = align(p, g)?;
    let sets = partition_sets(g, w)?;
    let wcol = cols[sets.target];
    let outcomes = p.variables()[wcol].outcomes;
    if value >= outcomes {
        return Err(Error::InvalidArgument(format!(
            "value {} out of range 1..={outcomes} for `{w}`",
            value + 1
        )));
    }
    let p_w = Marginal::new(p, vec![wcol]).table[value];
    if p_w <= 0.0 {
        return Err(Error::UndefinedAtValue(format!("P({w} = {}) = 0", value + 1)));
    }

    let target_set = NodeSet::single(sets.target);
    let downstream = sets.desc.union(sets.slice_desc);
    let upstream = sets.slice.union(sets.anc).union(sets.slice_anc);
    let given = target_set.union(sets.slice);

    let joint1 = Marginal::new(p, columns(downstream.union(given), &cols));
    let given1 = Marginal::new(p, columns(given, &cols));
    let downstream_outcomes = Marginal::new(p, columns(downstream, &cols)).outcomes();
    let factor2 = match variant {
        InterventionVariant::AsPrinted => Marginal::new(p, columns(upstream.union(target_set), &cols)),
        InterventionVariant::AncestorMarginal => Marginal::new(p, columns(upstream, &cols)),
    };
    let factor2_norm = match variant {
        InterventionVariant::AsPrinted => p_w,
        InterventionVariant::AncestorMarginal => 1.0,
    };

    let layout = p.layout();
    let mut table = vec![0.0; p.len()];
    let mut degenerate = std::collections::BTreeSet::new();
    let mut degenerate_weighted = std::collections::BTreeSet::new();
    for (i, slot) in table.iter_mut().enumerate() {
        let digits = layout.digits(i);
        if digits[wcol] != value {
            continue;
        }
        let second = factor2.at(&digits) / factor2_norm;
        let denom = given1.at(&digits);
        let first = if denom > 0.0 {
            joint1.at(&digits) / denom
        } else {
            let key: Vec<usize> = given1.cols.iter().map(|&k| digits[k]).collect();
            if second > 0.0 {
                degenerate_weighted.insert(key.clone());
            }
            degenerate.insert(key);
            1.0 / downstream_outcomes as f64
        };
        *slot = first * second;
    }

    let mut warnings = Vec::new();
    if variant == InterventionVariant::AsPrinted && !sets.anc.is_empty() {
        warnings.push(format!(
            "`{w}` has ancestors {:?}; the as-printed second factor conditions on `{w}` and \
             is expected to diverge from circuit surgery",
            g.names_of(sets.anc)
        ));
    }
    let distribution = JointDistribution::new(p.variables().to_vec(), table)?;
    Ok(InterventionResult {
        target: w.to_string(),
        value,
        variant,
        partition: intervention_partition(g, w)?,
        distribution,
        degenerate_cells: degenerate.len(),
        degenerate_weighted_cells: degenerate_weighted.len(),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnmeasurementResult {
    pub target: String,
    pub dim: usize,
    #[serde(skip)]
    pub distribution: JointDistribution,
    /// Smallest cell value before clamping.
    pub min_pre_clamp: f64,
    /// Sum of the table before clamping.
    pub total_pre_clamp: f64,
    pub clamped_cells: usize,
    /// `(A, R, z)` cells with zero probability whose conditional was replaced by the uniform distribution.
    pub degenerate_cells: usize,
}

/// Statistics with the measurement `z` removed:
/// `Σ_z P(D|A,R,z) [(1 + d_Z) P(z|A,R) − 1/d_Z] P(A,R)`.
pub fn unmeasure_formula(p: &JointDistribution, g: &CausalGraph, z: &str, dim: usize) -> Result<UnmeasurementResult> {
    let cols = align(p, g)?;
    let zi = g.index_of(z)?;
    if g.dim(zi) != dim {
        return Err(Error::InvalidArgument(format!(
            "`{z}` has dimension {} in the graph, {dim} requested",
            g.dim(zi)
        )));
    }
    let zcol = cols[zi];
    let d = dim as f64;
    let desc = g.descendants(zi);
    let rest_and_anc = g.all().difference(desc).difference(NodeSet::single(zi));

    let conditioning = Marginal::new(p, columns(rest_and_anc, &cols));
    let with_z = Marginal::new(p, columns(rest_and_anc.union(NodeSet::single(zi)), &cols));
    let desc_outcomes = Marginal::new(p, columns(desc, &cols)).outcomes();

    let out_vars: Vec<_> = p
        .variables()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != zcol)
        .map(|(_, v)| v.clone())
        .collect();
    let out_layout = Layout::new(out_vars.iter().map(|v| v.outcomes).collect());
    let layout = p.layout();
    let z_outcomes = p.variables()[zcol].outcomes;

    let mut table = vec![0.0; out_layout.total()];
    let mut degenerate = 0usize;
    for (o, slot) in table.iter_mut().enumerate() {
        let mut digits = out_layout.digits(o);
        digits.insert(zcol, 0);
        let p_ar = conditioning.at(&digits);
        if p_ar <= 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for zv in 0..z_outcomes {
            digits[zcol] = zv;
            let p_arz = with_z.at(&digits);
            let p_d_given = if p_arz > 0.0 {
                p.probabilities()[layout.index(&digits)] / p_arz
            } else {
                degenerate += 1;
                1.0 / desc_outcomes as f64
            };
            let p_z_given = p_arz / p_ar;
            acc += p_d_given * ((1.0 + d) * p_z_given - 1.0 / d) * p_ar;
        }
        *slot = acc;
    }

    let min_pre_clamp = table.iter().copied().fold(f64::INFINITY, f64::min);
    let total_pre_clamp: f64 = table.iter().sum();
    if min_pre_clamp < -UNMEASURE_TOL {
        return Err(Error::NotQuantum(format!(
            "un-measuring `{z}` gives a negative probability {min_pre_clamp:.3e}"
        )));
    }
    if (total_pre_clamp - 1.0).abs() > UNMEASURE_TOL {
        return Err(Error::NotQuantum(format!(
            "un-measuring `{z}` gives total probability {total_pre_clamp}"
        )));
    }
    let mut clamped = 0;
    for x in table.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
            clamped += 1;
        }
    }
    let total: f64 = table.iter().sum();
    table.iter_mut().for_each(|x| *x /= total);
    Ok(UnmeasurementResult {
        target: z.to_string(),
        dim,
        distribution: JointDistribution::new(out_vars, table)?,
        min_pre_clamp: if min_pre_clamp.is_finite() { min_pre_clamp } else { 0.0 },
        total_pre_clamp,
        clamped_cells: clamped,
        degenerate_cells: degenerate,
    })
}

/// Every QDAG over the variables of `p` whose Markov constraints `p` meets at `tol`.
///
/// This is a necessary-condition screen; it does not construct functional models.
/// Output is sorted by edge list.
pub fn compatible_qdags(p: &JointDistribution, tol: f64, max_nodes: usize) -> Result<Vec<CausalGraph>> {
    let n = p.variables().len();
    let limit = max_nodes.min(INFER_MAX_NODES);
    if n > limit {
        return Err(Error::TooManyNodes { nodes: n, limit });
    }
    let nodes: Vec<Node> = p
        .variables()
        .iter()
        .map(|v| {
            let d = (v.outcomes as f64).sqrt().round() as usize;
            if d < 2 || d * d != v.outcomes {
                return Err(Error::InvalidArgument(format!(
                    "`{}` has {} outcomes, not a square of a dimension ≥ 2",
                    v.name, v.outcomes
                )));
            }
            Ok(Node {
                name: v.name.clone(),
                dim: d,
            })
        })
        .collect::<Result<_>>()?;

    // Residuals depend only on p, so only dependent triples need a separation test per graph.
    let all: Vec<usize> = (0..n).collect();
    let dependent: Vec<(NodeSet, NodeSet, NodeSet)> = triples(n)
        .into_iter()
        .filter(|&(u, v, w)| {
            let r = p
                .ci_residual(&columns(u, &all), &columns(v, &all), &columns(w, &all), DEFAULT_EPS)
                .0;
            r > tol || r.is_nan()
        })
        .collect();

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut found = Vec::new();
    for code in 0..3usize.pow(pairs.len() as u32) {
        let mut edges = Vec::new();
        let mut c = code;
        for &(i, j) in &pairs {
            match c % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            c /= 3;
        }
        let Ok(g) = CausalGraph::from_indices(nodes.clone(), &edges) else {
            continue;
        };
        if !g.is_qdag() {
            continue;
        }
        let cache = PathCache::new(&g);
        if dependent.iter().all(|&(u, v, w)| !cache.q_separated(u, v, w)) {
            found.push(g);
        }
    }
    found.sort_by_key(|g| g.edge_names());
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Variable;

    fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> CausalGraph {
        CausalGraph::new(
            nodes.iter().map(|n| (n.to_string(), 2)).collect(),
            edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        )
        .unwrap()
    }

    fn chain2() -> JointDistribution {
        let probs = (0..16)
            .map(|i| if i / 4 == i % 4 { 3.0 / 24.0 } else { 1.0 / 24.0 })
            .collect();
        JointDistribution::new(vec![Variable::new("Z", 4), Variable::new("D", 4)], probs).unwrap()
    }

    #[test]
    fn triple_enumeration_counts() {
        // n = 2: ({0},{1},∅) only
        assert_eq!(triples(2).len(), 1);
        // n = 3: unordered {u,v} pairs of disjoint nonempty sets with w from the rest
        // = (4^3 − 2·3^3 + 2^3)/2 = 9
        assert_eq!(triples(3).len(), 9);
    }

    #[test]
    fn intervention_on_root_of_two_chain() {
        let p = chain2();
        let g = graph(&["Z", "D"], &[("Z", "D")]);
        for variant in [InterventionVariant::AsPrinted, InterventionVariant::AncestorMarginal] {
            for z in 0..4 {
                let r = intervene_formula(&p, &g, "Z", z, variant).unwrap();
                for d in 0..4 {
                    let expect = if z == d { 0.5 } else { 1.0 / 6.0 };
                    assert!((r.distribution.prob(&[z, d]) - expect).abs() < 1e-12);
                    for other in (0..4).filter(|&o| o != z) {
                        assert_eq!(r.distribution.prob(&[other, d]), 0.0);
                    }
                }
                assert!(r.warnings.is_empty());
            }
        }
    }

    #[test]
    fn unmeasuring_a_sink_returns_the_marginal() {
        let p = chain2();
        let g = graph(&["Z", "D"], &[("Z", "D")]);
        let r = unmeasure_formula(&p, &g, "D", 2).unwrap();
        assert!(r.distribution.tv_distance(&p.marginalize(&["Z"]).unwrap()).unwrap() < 1e-15);
        let r = unmeasure_formula(&p, &g, "Z", 2).unwrap();
        for &x in r.distribution.probabilities() {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn unmeasure_dimension_must_match_graph() {
        let p = chain2();
        let g = graph(&["Z", "D"], &[("Z", "D")]);
        assert!(matches!(
            unmeasure_formula(&p, &g, "Z", 3),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(unmeasure_formula(&p, &g, "Q", 2), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn non_quantum_input_is_rejected() {
        // Z deterministic: the bracket is −1/d for every unseen z.
        let probs = (0..16).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        let p = JointDistribution::new(vec![Variable::new("Z", 4), Variable::new("D", 4)], probs).unwrap();
        let g = graph(&["Z", "D"], &[("Z", "D")]);
        assert!(matches!(unmeasure_formula(&p, &g, "Z", 2), Err(Error::NotQuantum(_))));
    }

    #[test]
    fn intervention_errors() {
        let p = chain2();
        let g = graph(&["Z", "D"], &[("Z", "D")]);
        let zero = JointDistribution::new(
            vec![Variable::new("Z", 4), Variable::new("D", 4)],
            (0..16).map(|i| if i < 4 { 0.25 } else { 0.0 }).collect(),
        )
        .unwrap();
        assert!(matches!(
            intervene_formula(&zero, &g, "Z", 2, InterventionVariant::AncestorMarginal),
            Err(Error::UndefinedAtValue(_))
        ));
        let wrong = graph(&["Z", "D", "E"], &[("Z", "D")]);
        assert!(matches!(
            intervene_formula(&p, &wrong, "Z", 0, InterventionVariant::AncestorMarginal),
            Err(Error::SignatureMismatch(_))
        ));
    }

    #[test]
    fn non_qdag_and_uncovered_shapes() {
        let tri = graph(&["A", "B", "C"], &[("A", "B"), ("B", "C"), ("A", "C")]);
        assert!(matches!(intervention_partition(&tri, "A"), Err(Error::NotQdag)));
        // The empty slice leaves C uncovered, so the companion {C} is used.
        let g = graph(&["A", "B", "C"], &[("A", "B")]);
        let part = intervention_partition(&g, "A").unwrap();
        assert_eq!(part.slice, vec!["C".to_string()]);
    }

    #[test]
    fn product_table_admits_the_empty_graph() {
        let p = JointDistribution::uniform(vec![Variable::new("A", 4), Variable::new("B", 4)]);
        let found = compatible_qdags(&p, 1e-9, 5).unwrap();
        assert!(found.iter().any(|g| g.edges().is_empty()));
        assert_eq!(found.len(), 3);
    }

    #[test]
    fn infer_rejects_large_or_non_square_inputs() {
        let vars = (0..6).map(|i| Variable::new(format!("N{i}"), 4)).collect();
        let p = JointDistribution::uniform(vars);
        assert!(matches!(compatible_qdags(&p, 1e-9, 6), Err(Error::TooManyNodes { .. })));
        let p = JointDistribution::uniform(vec![Variable::new("A", 3)]);
        assert!(matches!(compatible_qdags(&p, 1e-9, 5), Err(Error::InvalidArgument(_))));
    }
}
