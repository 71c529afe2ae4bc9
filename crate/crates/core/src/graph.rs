//! Causal graphs over named measurement nodes, the three path-blocking rules of
//! the quantum Markov condition, QDAG slices, causal inversion, and the graph
//! rewrites that accompany interventions and un-measurements.
//!
//! Nodes are addressed by position internally; node sets are bitmasks, which
//! caps graphs at [`MAX_NODES`].

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Exhaustive path enumeration is exponential; graphs are capped here.
pub const MAX_NODES: usize = 12;

/// Bitmask over node positions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(pub u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn single(i: usize) -> Self {
        NodeSet(1 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1 << i);
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: NodeSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1)
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = NodeSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    /// Hilbert-space dimension; the node has `dim²` outcomes.
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ancestors,
    Descendants,
}

/// Directed acyclic graph over named nodes.
#[derive(Debug, Clone)]
pub struct CausalGraph {
    nodes: Vec<Node>,
    parents: Vec<NodeSet>,
    children: Vec<NodeSet>,
    ancestors: Vec<NodeSet>,
    descendants: Vec<NodeSet>,
}

/// Graphs are equal when they have the same node set (names and dims) and the
/// same named edges, regardless of node order.
impl PartialEq for CausalGraph {
    fn eq(&self, other: &Self) -> bool {
        let nodes = |g: &CausalGraph| g.nodes.iter().map(|n| (n.name.clone(), n.dim)).collect::<BTreeSet<_>>();
        nodes(self) == nodes(other) && self.edge_names() == other.edge_names()
    }
}

impl Eq for CausalGraph {}

impl CausalGraph {
    pub fn new(nodes: Vec<(String, usize)>, edges: Vec<(String, String)>) -> Result<Self> {
        if nodes.len() > MAX_NODES {
            return Err(Error::TooManyNodes {
                nodes: nodes.len(),
                limit: MAX_NODES,
            });
        }
        let nodes: Vec<Node> = nodes.into_iter().map(|(name, dim)| Node { name, dim }).collect();
        let mut seen = BTreeSet::new();
        for n in &nodes {
            if n.name.is_empty() {
                return Err(Error::InvalidGraph("empty node name".into()));
            }
            if !seen.insert(n.name.as_str()) {
                return Err(Error::InvalidGraph(format!("duplicate node `{}`", n.name)));
            }
            if n.dim < 2 {
                return Err(Error::InvalidGraph(format!(
                    "node `{}` has dimension {}; need at least 2",
                    n.name, n.dim
                )));
            }
        }
        let find = |name: &str| {
            nodes
                .iter()
                .position(|n| n.name == name)
                .ok_or_else(|| Error::InvalidGraph(format!("edge names unknown node `{name}`")))
        };
        let mut index_edges = Vec::with_capacity(edges.len());
        for (p, c) in &edges {
            let (pi, ci) = (find(p)?, find(c)?);
            if pi == ci {
                return Err(Error::InvalidGraph(format!("self-loop on `{p}`")));
            }
            index_edges.push((pi, ci));
        }
        Self::from_indices(nodes, &index_edges)
    }

    pub(crate) fn from_indices(nodes: Vec<Node>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = nodes.len();
        let mut parents = vec![NodeSet::EMPTY; n];
        let mut children = vec![NodeSet::EMPTY; n];
        for &(p, c) in edges {
            parents[c].insert(p);
            children[p].insert(c);
        }
        let order =
            topological_order(&parents).ok_or_else(|| Error::InvalidGraph("graph contains a directed cycle".into()))?;
        let mut ancestors = vec![NodeSet::EMPTY; n];
        for &v in &order {
            let mut acc = parents[v];
            for p in parents[v].iter() {
                acc = acc.union(ancestors[p]);
            }
            ancestors[v] = acc;
        }
        let mut descendants = vec![NodeSet::EMPTY; n];
        for &v in order.iter().rev() {
            let mut acc = children[v];
            for c in children[v].iter() {
                acc = acc.union(descendants[c]);
            }
            descendants[v] = acc;
        }
        Ok(CausalGraph {
            nodes,
            parents,
            children,
            ancestors,
            descendants,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn all(&self) -> NodeSet {
        (0..self.len()).collect()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i].name
    }

    pub fn dim(&self, i: usize) -> usize {
        self.nodes[i].dim
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<NodeSet> {
        names.iter().map(|n| self.index_of(n.as_ref())).collect()
    }

    pub fn names_of(&self, set: NodeSet) -> Vec<String> {
        set.iter().map(|i| self.nodes[i].name.clone()).collect()
    }

    pub fn parents(&self, i: usize) -> NodeSet {
        self.parents[i]
    }

    pub fn children(&self, i: usize) -> NodeSet {
        self.children[i]
    }

    pub fn ancestors(&self, i: usize) -> NodeSet {
        self.ancestors[i]
    }

    pub fn descendants(&self, i: usize) -> NodeSet {
        self.descendants[i]
    }

    pub fn ancestors_of_set(&self, set: NodeSet) -> NodeSet {
        set.iter().fold(NodeSet::EMPTY, |acc, i| acc.union(self.ancestors[i]))
    }

    pub fn descendants_of_set(&self, set: NodeSet) -> NodeSet {
        set.iter().fold(NodeSet::EMPTY, |acc, i| acc.union(self.descendants[i]))
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.children[parent].contains(child)
    }

    /// Edges as index pairs, ordered by parent then child position.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|p| self.children[p].iter().map(move |c| (p, c)))
            .collect()
    }

    /// Edges as name pairs, sorted.
    pub fn edge_names(&self) -> BTreeSet<(String, String)> {
        self.edges()
            .into_iter()
            .map(|(p, c)| (self.nodes[p].name.clone(), self.nodes[c].name.clone()))
            .collect()
    }

    /// Strict ancestors or descendants of `x` by name.
    pub fn relatives(&self, x: &str, direction: Direction) -> Result<BTreeSet<String>> {
        let i = self.index_of(x)?;
        let set = match direction {
            Direction::Ancestors => self.ancestors[i],
            Direction::Descendants => self.descendants[i],
        };
        Ok(self.names_of(set).into_iter().collect())
    }

    /// Every edge reversed.
    pub fn causal_invert(&self) -> CausalGraph {
        let edges: Vec<(usize, usize)> = self.edges().into_iter().map(|(p, c)| (c, p)).collect();
        CausalGraph::from_indices(self.nodes.clone(), &edges).expect("reversing a DAG yields a DAG")
    }

    /// All simple undirected paths from `u` to `v`, sorted by their node-name sequence.
    pub fn undirected_paths(&self, u: &str, v: &str) -> Result<Vec<UndirectedPath>> {
        let (ui, vi) = (self.index_of(u)?, self.index_of(v)?);
        if ui == vi {
            return Err(Error::InvalidArgument("path endpoints must differ".into()));
        }
        Ok(self.paths_between(ui, vi))
    }

    pub(crate) fn paths_between(&self, u: usize, v: usize) -> Vec<UndirectedPath> {
        let mut out = Vec::new();
        let mut nodes = vec![u];
        let mut forward = Vec::new();
        self.extend_paths(v, &mut nodes, &mut forward, NodeSet::single(u), &mut out);
        out.sort_by(|a, b| {
            let ka: Vec<&str> = a.nodes.iter().map(|&i| self.name(i)).collect();
            let kb: Vec<&str> = b.nodes.iter().map(|&i| self.name(i)).collect();
            ka.cmp(&kb)
        });
        out
    }

    fn extend_paths(
        &self,
        target: usize,
        nodes: &mut Vec<usize>,
        forward: &mut Vec<bool>,
        visited: NodeSet,
        out: &mut Vec<UndirectedPath>,
    ) {
        let last = *nodes.last().expect("path is never empty");
        if last == target {
            out.push(UndirectedPath {
                nodes: nodes.clone(),
                forward: forward.clone(),
            });
            return;
        }
        let steps = self.children[last]
            .iter()
            .map(|n| (n, true))
            .chain(self.parents[last].iter().map(|n| (n, false)));
        for (next, fwd) in steps {
            if visited.contains(next) {
                continue;
            }
            nodes.push(next);
            forward.push(fwd);
            self.extend_paths(target, nodes, forward, visited.union(NodeSet::single(next)), out);
            nodes.pop();
            forward.pop();
        }
    }

    /// First blocking rule satisfied by an interior triple of `path` given the
    /// conditioning set `w`, or `None` when the path is open.
    pub fn path_blocked(&self, path: &UndirectedPath, w: NodeSet) -> Result<Option<BlockingRule>> {
        self.check_path(path)?;
        Ok(self.blocking_rule(path, w))
    }

    pub(crate) fn blocking_rule(&self, path: &UndirectedPath, w: NodeSet) -> Option<BlockingRule> {
        for k in 1..path.nodes.len().saturating_sub(1) {
            let mid = path.nodes[k];
            let into_mid = path.forward[k - 1];
            let out_of_mid = path.forward[k];
            let rule = match (into_mid, out_of_mid) {
                // a → mid → b or a ← mid ← b
                (true, true) | (false, false) => w.contains(mid).then_some(BlockingRule::Chain),
                // a → mid ← b
                (true, false) => {
                    (!w.contains(mid) && self.descendants[mid].is_disjoint(w)).then_some(BlockingRule::Collider)
                }
                // a ← mid → b
                (false, true) => (!w.contains(mid) && self.ancestors[mid].is_disjoint(w)).then_some(BlockingRule::Fork),
            };
            if rule.is_some() {
                return rule;
            }
        }
        None
    }

    fn check_path(&self, path: &UndirectedPath) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("malformed path: {msg}")));
        if path.nodes.len() < 2 || path.forward.len() + 1 != path.nodes.len() {
            return bad("length mismatch");
        }
        if path.nodes.iter().any(|&i| i >= self.len()) {
            return bad("node out of range");
        }
        let distinct: NodeSet = path.nodes.iter().copied().collect();
        if distinct.len() != path.nodes.len() {
            return bad("repeated node");
        }
        for (k, &fwd) in path.forward.iter().enumerate() {
            let (a, b) = (path.nodes[k], path.nodes[k + 1]);
            let ok = if fwd { self.has_edge(a, b) } else { self.has_edge(b, a) };
            if !ok {
                return bad("step does not follow an edge");
            }
        }
        Ok(())
    }

    /// True iff every undirected path from a member of `u` to a member of `v` is blocked by `w`.
    pub fn q_separated(&self, u: NodeSet, v: NodeSet, w: NodeSet) -> Result<bool> {
        if !u.is_disjoint(v) || !u.is_disjoint(w) || !v.is_disjoint(w) {
            return Err(Error::Overlap("u, v and w must be pairwise disjoint".into()));
        }
        let all = self.all();
        if u.union(v).union(w).difference(all) != NodeSet::EMPTY {
            return Err(Error::InvalidArgument("node set out of range".into()));
        }
        Ok(PathCache::new(self).q_separated(u, v, w))
    }

    /// q-separation by name.
    pub fn q_separated_names<S: AsRef<str>>(&self, u: &[S], v: &[S], w: &[S]) -> Result<bool> {
        self.q_separated(self.set_of(u)?, self.set_of(v)?, self.set_of(w)?)
    }

    /// Companion sets for `x` satisfying both slice conditions, smallest first
    /// and lexicographic by node name within a size.
    pub fn slices(&self, x: usize) -> Vec<Slice> {
        let incomparable: Vec<usize> = (0..self.len())
            .filter(|&j| j != x && !self.ancestors[x].contains(j) && !self.descendants[x].contains(j))
            .collect();
        let mut candidates: Vec<NodeSet> = (0u64..1 << incomparable.len())
            .map(|bits| {
                incomparable
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| bits >> k & 1 == 1)
                    .map(|(_, &j)| j)
                    .collect()
            })
            .collect();
        candidates.sort_by(|a: &NodeSet, b: &NodeSet| {
            a.len()
                .cmp(&b.len())
                .then_with(|| self.sorted_names(*a).cmp(&self.sorted_names(*b)))
        });
        candidates
            .into_iter()
            .filter(|&s| self.is_slice(x, s))
            .map(|companions| Slice { center: x, companions })
            .collect()
    }

    fn sorted_names(&self, set: NodeSet) -> Vec<&str> {
        let mut v: Vec<&str> = set.iter().map(|i| self.name(i)).collect();
        v.sort();
        v
    }

    /// Minimal slice companion set for `x`, if one exists.
    pub fn find_slice(&self, x: &str) -> Result<Option<Slice>> {
        let i = self.index_of(x)?;
        Ok(self.slices(i).into_iter().next())
    }

    /// Checks both slice conditions for `x` with companions `s`.
    pub fn is_slice(&self, x: usize, s: NodeSet) -> bool {
        if s.contains(x) {
            return false;
        }
        let members = s.union(NodeSet::single(x));
        for m in members.iter() {
            if !self.descendants[m].is_disjoint(members) {
                return false;
            }
        }
        // Every directed path from an ancestor of x to a descendant of x must
        // pass through a slice member as an interior node. Equivalently, no
        // descendant is reachable from an ancestor in the graph with the slice
        // members deleted.
        let blocked = members;
        for a in self.ancestors[x].iter() {
            let mut seen = NodeSet::single(a);
            let mut stack = vec![a];
            while let Some(v) = stack.pop() {
                for c in self.children[v].difference(blocked).iter() {
                    if self.descendants[x].contains(c) {
                        return false;
                    }
                    if !seen.contains(c) {
                        seen.insert(c);
                        stack.push(c);
                    }
                }
            }
        }
        true
    }

    pub fn is_qdag(&self) -> bool {
        (0..self.len()).all(|x| !self.slices(x).is_empty())
    }

    /// Removes `z` and connects every former parent to every former child.
    pub fn after_unmeasure(&self, z: &str) -> Result<CausalGraph> {
        let zi = self.index_of(z)?;
        let remap = |i: usize| if i > zi { i - 1 } else { i };
        let mut edges: BTreeSet<(usize, usize)> = self
            .edges()
            .into_iter()
            .filter(|&(p, c)| p != zi && c != zi)
            .map(|(p, c)| (remap(p), remap(c)))
            .collect();
        for p in self.parents[zi].iter() {
            for c in self.children[zi].iter() {
                edges.insert((remap(p), remap(c)));
            }
        }
        let mut nodes = self.nodes.clone();
        nodes.remove(zi);
        CausalGraph::from_indices(nodes, &edges.into_iter().collect::<Vec<_>>())
    }

    /// Deletes the parents of `w` and adds a fresh exogenous node as its only parent.
    /// Returns the new graph and the name chosen for the added node.
    pub fn after_intervention(&self, w: &str) -> Result<(CausalGraph, String)> {
        let wi = self.index_of(w)?;
        let mut y = format!("do_{w}");
        while self.nodes.iter().any(|n| n.name == y) {
            y.push('\'');
        }
        if self.len() + 1 > MAX_NODES {
            return Err(Error::TooManyNodes {
                nodes: self.len() + 1,
                limit: MAX_NODES,
            });
        }
        let yi = self.len();
        let mut edges: Vec<(usize, usize)> = self.edges().into_iter().filter(|&(_, c)| c != wi).collect();
        edges.push((yi, wi));
        let mut nodes = self.nodes.clone();
        nodes.push(Node {
            name: y.clone(),
            dim: self.nodes[wi].dim,
        });
        Ok((CausalGraph::from_indices(nodes, &edges)?, y))
    }

    /// Copy of this graph with nodes reordered to follow `names`.
    pub fn reordered<S: AsRef<str>>(&self, names: &[S]) -> Result<CausalGraph> {
        if names.len() != self.len() {
            return Err(Error::SignatureMismatch("node count differs".into()));
        }
        let perm: Vec<usize> = names.iter().map(|n| self.index_of(n.as_ref())).collect::<Result<_>>()?;
        let mut inverse = vec![usize::MAX; self.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        if inverse.contains(&usize::MAX) {
            return Err(Error::SignatureMismatch("repeated node name".into()));
        }
        let nodes = perm.iter().map(|&o| self.nodes[o].clone()).collect();
        let edges: Vec<(usize, usize)> = self
            .edges()
            .into_iter()
            .map(|(p, c)| (inverse[p], inverse[c]))
            .collect();
        CausalGraph::from_indices(nodes, &edges)
    }
}

impl fmt::Display for CausalGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edge_names()
            .into_iter()
            .map(|(p, c)| format!("{p}->{c}"))
            .collect();
        let isolated: Vec<&str> = (0..self.len())
            .filter(|&i| self.parents[i].is_empty() && self.children[i].is_empty())
            .map(|i| self.name(i))
            .collect();
        let mut parts = edges;
        parts.extend(isolated.into_iter().map(String::from));
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn topological_order(parents: &[NodeSet]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut placed = NodeSet::EMPTY;
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n).find(|&v| !placed.contains(v) && parents[v].difference(placed).is_empty())?;
        placed.insert(next);
        order.push(next);
    }
    Some(order)
}

/// Blocking rules of the quantum Markov condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockingRule {
    /// Chain `a → c → b` with `c` in the conditioning set (g-SSO).
    Chain,
    /// Collider `a → c ← b` with neither `c` nor any descendant conditioned (g-BK).
    Collider,
    /// Fork `a ← c → b` with neither `c` nor any ancestor conditioned (g-BK*).
    Fork,
}

impl BlockingRule {
    pub fn tag(self) -> &'static str {
        match self {
            BlockingRule::Chain => "g-SSO",
            BlockingRule::Collider => "g-BK",
            BlockingRule::Fork => "g-BK*",
        }
    }
}

/// A simple path in the skeleton. `forward[k]` is true when the edge between
/// `nodes[k]` and `nodes[k + 1]` points from the former to the latter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedPath {
    pub nodes: Vec<usize>,
    pub forward: Vec<bool>,
}

impl UndirectedPath {
    /// The same path traversed from the other end.
    pub fn reversed(&self) -> UndirectedPath {
        UndirectedPath {
            nodes: self.nodes.iter().rev().copied().collect(),
            forward: self.forward.iter().rev().map(|f| !f).collect(),
        }
    }

    /// Same node sequence with every edge orientation flipped (the path in the inverted graph).
    pub fn inverted(&self) -> UndirectedPath {
        UndirectedPath {
            nodes: self.nodes.clone(),
            forward: self.forward.iter().map(|f| !f).collect(),
        }
    }

    pub fn render(&self, g: &CausalGraph) -> String {
        let mut s = g.name(self.nodes[0]).to_string();
        for (k, &fwd) in self.forward.iter().enumerate() {
            s.push_str(if fwd { "→" } else { "←" });
            s.push_str(g.name(self.nodes[k + 1]));
        }
        s
    }
}

/// A node together with a companion set forming a valid slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    pub center: usize,
    pub companions: NodeSet,
}

/// Paths between every pair of nodes, computed once per graph.
pub(crate) struct PathCache<'g> {
    graph: &'g CausalGraph,
    paths: Vec<Vec<Vec<UndirectedPath>>>,
}

impl<'g> PathCache<'g> {
    pub(crate) fn new(graph: &'g CausalGraph) -> Self {
        let n = graph.len();
        let mut paths = vec![vec![Vec::new(); n]; n];
        for (u, row) in paths.iter_mut().enumerate() {
            for (v, slot) in row.iter_mut().enumerate() {
                if u < v {
                    *slot = graph.paths_between(u, v);
                }
            }
        }
        PathCache { graph, paths }
    }

    fn pair(&self, u: usize, v: usize) -> &[UndirectedPath] {
        if u < v {
            &self.paths[u][v]
        } else {
            &self.paths[v][u]
        }
    }

    pub(crate) fn q_separated(&self, u: NodeSet, v: NodeSet, w: NodeSet) -> bool {
        u.iter().all(|a| {
            v.iter()
                .all(|b| self.pair(a, b).iter().all(|p| self.graph.blocking_rule(p, w).is_some()))
        })
    }

    /// Rules that block each path, in path order; `None` marks an open path.
    pub(crate) fn rules(&self, u: NodeSet, v: NodeSet, w: NodeSet) -> Vec<(String, Option<BlockingRule>)> {
        let mut out = Vec::new();
        for a in u.iter() {
            for b in v.iter() {
                for p in self.pair(a, b) {
                    let oriented = if p.nodes[0] == a { p.clone() } else { p.reversed() };
                    out.push((oriented.render(self.graph), self.graph.blocking_rule(p, w)));
                }
            }
        }
        out
    }
}
