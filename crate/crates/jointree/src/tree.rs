//! Join trees: construction from a family of subsets, binarization by node
//! duplication, validity checking, valuation attachment, and DOT export.
//!
//! Construction follows the variable-by-variable fusion scheme: for each
//! variable in the elimination order, the subsets containing it are merged
//! pairwise (cheapest union first) until one remains, the variable is
//! projected away, and the residue rejoins the working family. The result
//! always satisfies the running-intersection property; `binarize` then caps
//! node degree at three by replacing each high-degree node with a chain of
//! same-label copies, each responsible for a single pairwise combination.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::algebra::{DomainSet, VarId, VariableTable};
use crate::count::Tallies;
use crate::error::{Error, Result};
use crate::potential::Potential;

/// Index of a node inside one [`JoinTree`]; dense and 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub id: NodeId,
    pub label: DomainSet,
    input: Option<Potential>,
}

impl TreeNode {
    pub fn input(&self) -> Option<&Potential> {
        self.input.as_ref()
    }
}

/// An undirected tree of labeled nodes. Message registers live with the
/// propagation engine; node marginals are returned in its report.
#[derive(Debug, Clone)]
pub struct JoinTree {
    table: Arc<VariableTable>,
    nodes: Vec<TreeNode>,
    edges: Vec<(NodeId, NodeId)>,
    adj: Vec<Vec<NodeId>>,
}

impl JoinTree {
    pub fn new(table: Arc<VariableTable>) -> Self {
        Self { table, nodes: Vec::new(), edges: Vec::new(), adj: Vec::new() }
    }

    pub fn table(&self) -> &Arc<VariableTable> {
        &self.table
    }

    pub fn add_node(&mut self, label: DomainSet) -> Result<NodeId> {
        for v in label.iter() {
            self.table.get(v)?;
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(TreeNode { id, label, input: None });
        self.adj.push(Vec::new());
        Ok(id)
    }

    /// Join two existing nodes. Self-loops and duplicate edges are invariant
    /// violations, not silent no-ops.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> Result<()> {
        self.check_node(a)?;
        self.check_node(b)?;
        if a == b {
            return Err(Error::InvalidTree(format!("self-loop at node {a}")));
        }
        if self.adj[a.0].contains(&b) {
            return Err(Error::InvalidTree(format!("duplicate edge {a} -- {b}")));
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.edges.push((lo, hi));
        self.adj[a.0].push(b);
        self.adj[b.0].push(a);
        self.adj[a.0].sort_unstable();
        self.adj[b.0].sort_unstable();
        Ok(())
    }

    fn check_node(&self, id: NodeId) -> Result<()> {
        if id.0 >= self.nodes.len() {
            return Err(Error::NoSuchNode(id));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter()
    }

    pub fn node(&self, id: NodeId) -> Result<&TreeNode> {
        self.check_node(id)?;
        Ok(&self.nodes[id.0])
    }

    pub fn label(&self, id: NodeId) -> Result<&DomainSet> {
        Ok(&self.node(id)?.label)
    }

    pub fn input(&self, id: NodeId) -> Result<Option<&Potential>> {
        Ok(self.node(id)?.input.as_ref())
    }

    pub(crate) fn set_input(&mut self, id: NodeId, p: Option<Potential>) {
        self.nodes[id.0].input = p;
    }

    /// Neighbor ids, ascending.
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.adj[id.0]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adj[id.0].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.nodes.len()).map(|i| self.adj[i].len()).max().unwrap_or(0)
    }

    /// No node has more than three neighbors.
    pub fn is_binary(&self) -> bool {
        self.max_degree() <= 3
    }

    pub fn is_edge(&self, a: NodeId, b: NodeId) -> bool {
        a.0 < self.nodes.len() && self.adj[a.0].contains(&b)
    }

    /// Edges normalized (lo, hi), sorted.
    pub fn sorted_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }

    /// All nodes carrying exactly this label, ascending by id.
    pub fn nodes_with_label(&self, label: &DomainSet) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.label == *label)
            .map(|n| n.id)
            .collect()
    }

    /// Lowest-id node with this label.
    pub fn find_label(&self, label: &DomainSet) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.label == *label).map(|n| n.id)
    }

    /// Check the two join tree invariants: the edge set forms a tree and
    /// every variable's set of containing nodes is connected (running
    /// intersection). The error names the offending structure.
    pub fn verify(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidTree("tree has no nodes".into()));
        }
        if self.edges.len() != self.nodes.len() - 1 {
            return Err(Error::InvalidTree(format!(
                "{} nodes need {} edges, found {}",
                self.nodes.len(),
                self.nodes.len() - 1,
                self.edges.len()
            )));
        }
        let reached = self.reachable_from(NodeId(0), |_| true);
        if reached.len() != self.nodes.len() {
            return Err(Error::InvalidTree(format!(
                "graph is disconnected ({} of {} nodes reachable)",
                reached.len(),
                self.nodes.len()
            )));
        }
        // |E| = |V|-1 and connected => acyclic.
        let mut vars = BTreeSet::new();
        for n in &self.nodes {
            vars.extend(n.label.iter());
        }
        for v in vars {
            let holders: Vec<NodeId> = self
                .nodes
                .iter()
                .filter(|n| n.label.contains(v))
                .map(|n| n.id)
                .collect();
            let reached = self.reachable_from(holders[0], |n| self.nodes[n.0].label.contains(v));
            if reached.len() != holders.len() {
                return Err(Error::InvalidTree(format!(
                    "variable {} appears in {} nodes but only {} are connected through \
                     nodes containing it (running intersection broken)",
                    self.table.name(v).unwrap_or("?"),
                    holders.len(),
                    reached.len()
                )));
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.verify().is_ok()
    }

    /// BFS over nodes admitted by `keep`, starting at `start`.
    fn reachable_from(&self, start: NodeId, keep: impl Fn(NodeId) -> bool) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        if !keep(start) {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(n) = queue.pop_front() {
            for &m in &self.adj[n.0] {
                if keep(m) && seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        seen
    }

    /// Same labels, edges, and input registers, node for node. Ignores
    /// nothing — ids must line up too, which is what binarize's "structurally
    /// identical when already binary" promise means.
    pub fn structurally_equal(&self, other: &JoinTree) -> bool {
        if self.nodes.len() != other.nodes.len() {
            return false;
        }
        for (a, b) in self.nodes.iter().zip(&other.nodes) {
            if a.label != b.label {
                return false;
            }
            match (&a.input, &b.input) {
                (None, None) => {}
                (Some(x), Some(y)) => {
                    if x.domain() != y.domain() || x.values() != y.values() {
                        return false;
                    }
                }
                _ => return false,
            }
        }
        self.sorted_edges() == other.sorted_edges()
    }

    /// Deterministic DOT rendering: nodes in id order, edges sorted, labels
    /// shown as `{X, Y}`; when several nodes share a label each gets a
    /// ` #k` suffix in id order.
    pub fn export_dot(&self) -> String {
        let mut label_counts: BTreeMap<&DomainSet, usize> = BTreeMap::new();
        for n in &self.nodes {
            *label_counts.entry(&n.label).or_default() += 1;
        }
        let mut seen: BTreeMap<&DomainSet, usize> = BTreeMap::new();
        let mut out = String::from("graph join_tree {\n  node [shape=box];\n");
        for n in &self.nodes {
            let mut text = n.label.display(&self.table);
            if label_counts[&n.label] > 1 {
                let k = seen.entry(&n.label).or_default();
                *k += 1;
                text.push_str(&format!(" #{k}"));
            }
            out.push_str(&format!("  n{} [label=\"{}\"];\n", n.id, text));
        }
        for (a, b) in self.sorted_edges() {
            out.push_str(&format!("  n{a} -- n{b};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Which variable to eliminate next during construction.
#[derive(Debug, Clone, Default)]
pub enum EliminationOrder {
    /// One-step look-ahead: pick the variable minimizing the state space of
    /// the union of its subsets minus itself; ties go to the lower id.
    #[default]
    Auto,
    /// Follow this sequence. It may stop early (construction halts once a
    /// single subset remains), but exhausting it with work left is an error.
    Explicit(Vec<VarId>),
}

/// Input to [`build_join_tree`]: the family of subsets that must appear as
/// node labels — valuation domains plus every queried domain.
#[derive(Debug, Clone)]
pub struct BuildInput {
    pub table: Arc<VariableTable>,
    pub subsets: Vec<DomainSet>,
    pub order: EliminationOrder,
}

/// The merge rule: among all candidate pairs, the one whose union has the
/// smallest state space; ties broken by lexicographic comparison of the
/// pair's sorted id sequences (first domain, then second).
pub fn pick_pair(candidates: &[DomainSet], vt: &VariableTable) -> Result<(DomainSet, DomainSet)> {
    let (i, j) = pick_pair_indices(candidates, vt)?;
    Ok((candidates[i].clone(), candidates[j].clone()))
}

/// Index form of [`pick_pair`]; `candidates` must be sorted ascending so the
/// tie-break is the scan order.
fn pick_pair_indices(candidates: &[DomainSet], vt: &VariableTable) -> Result<(usize, usize)> {
    if candidates.len() < 2 {
        return Err(Error::EmptyInput);
    }
    debug_assert!(candidates.windows(2).all(|w| w[0] <= w[1]));
    let mut best: Option<(usize, (usize, usize))> = None;
    for i in 0..candidates.len() {
        for j in (i + 1)..candidates.len() {
            let w = candidates[i].union(&candidates[j]).state_space_size(vt)?;
            if best.map_or(true, |(bw, _)| w < bw) {
                best = Some((w, (i, j)));
            }
        }
    }
    Ok(best.expect("at least one pair").1)
}

/// Build a join tree whose labels include every member of `input.subsets`.
///
/// Deterministic: the same input always produces the same node ids and
/// edges. Duplicate subsets collapse to a single node; disconnected subset
/// families are bridged through an empty-label node.
pub fn build_join_tree(input: &BuildInput) -> Result<JoinTree> {
    if input.subsets.is_empty() {
        return Err(Error::EmptyBuild);
    }
    let vt = &input.table;
    let mut phi: BTreeSet<DomainSet> = BTreeSet::new();
    for s in &input.subsets {
        for v in s.iter() {
            vt.get(v)?;
        }
        phi.insert(s.clone());
    }
    if let EliminationOrder::Explicit(seq) = &input.order {
        let mut seen = BTreeSet::new();
        for &v in seq {
            vt.get(v)?;
            if !seen.insert(v) {
                return Err(Error::BadOrder(format!(
                    "variable {} listed twice",
                    vt.name(v).unwrap_or("?")
                )));
            }
        }
    }

    let mut tree = JoinTree::new(Arc::clone(vt));
    let mut by_label: BTreeMap<DomainSet, NodeId> = BTreeMap::new();
    let mut node_for = |tree: &mut JoinTree, label: &DomainSet| -> Result<NodeId> {
        if let Some(&id) = by_label.get(label) {
            return Ok(id);
        }
        let id = tree.add_node(label.clone())?;
        by_label.insert(label.clone(), id);
        Ok(id)
    };

    let mut explicit_at = 0usize;
    while phi.len() > 1 {
        // choose the next variable and collect the subsets containing it
        let y = match &input.order {
            EliminationOrder::Explicit(seq) => {
                let mut picked = None;
                while explicit_at < seq.len() {
                    let y = seq[explicit_at];
                    explicit_at += 1;
                    if phi.iter().any(|s| s.contains(y)) {
                        picked = Some(y);
                        break;
                    }
                    // listed variable no longer occurs: a harmless no-op
                }
                picked.ok_or_else(|| {
                    Error::BadOrder(format!(
                        "elimination order exhausted with {} subsets still unarranged",
                        phi.len()
                    ))
                })?
            }
            EliminationOrder::Auto => {
                let mut vars: BTreeSet<VarId> = BTreeSet::new();
                for s in &phi {
                    vars.extend(s.iter());
                }
                debug_assert!(!vars.is_empty(), "multiple subsets but no variables");
                let mut best: Option<(usize, VarId)> = None;
                for &y in &vars {
                    let mut u = DomainSet::empty();
                    for s in phi.iter().filter(|s| s.contains(y)) {
                        u = u.union(s);
                    }
                    let w = u.without(y, vt)?.state_space_size(vt)?;
                    if best.map_or(true, |(bw, _)| w < bw) {
                        best = Some((w, y));
                    }
                }
                best.ok_or_else(|| {
                    Error::BadOrder("no variable available to eliminate".into())
                })?
                .1
            }
        };

        let mut phi_y: Vec<DomainSet> = phi.iter().filter(|s| s.contains(y)).cloned().collect();
        debug_assert!(!phi_y.is_empty());

        // merge the y-subsets pairwise, cheapest union first
        while phi_y.len() > 1 {
            let (i, j) = pick_pair_indices(&phi_y, vt)?;
            let s1 = phi_y[i].clone();
            let s2 = phi_y[j].clone();
            let n1 = node_for(&mut tree, &s1)?;
            let n2 = node_for(&mut tree, &s2)?;
            if s1.is_subset_of(&s2) {
                tree.add_edge(n1, n2)?;
                phi_y.remove(i);
            } else if s2.is_subset_of(&s1) {
                tree.add_edge(n1, n2)?;
                phi_y.remove(j);
            } else {
                let u = s1.union(&s2);
                let nu = node_for(&mut tree, &u)?;
                tree.add_edge(n1, nu)?;
                tree.add_edge(n2, nu)?;
                phi_y.remove(j);
                phi_y.remove(i);
                if !phi_y.contains(&u) {
                    let at = phi_y.partition_point(|d| d < &u);
                    phi_y.insert(at, u);
                }
            }
        }

        // project y away; the residue rejoins the family
        let s = phi_y.pop().expect("one subset survives the merge loop");
        let rem = s.without(y, vt)?;
        let ns = node_for(&mut tree, &s)?;
        let nrem = node_for(&mut tree, &rem)?;
        tree.add_edge(ns, nrem)?;
        phi.retain(|d| !d.contains(y));
        phi.insert(rem);
    }

    let survivor = phi.iter().next().expect("family never empties").clone();
    node_for(&mut tree, &survivor)?;
    Ok(tree)
}

/// Root selection for [`binarize`].
#[derive(Debug, Clone, Copy, Default)]
pub enum Root {
    /// The node with the largest label state space, ties to the lower id.
    #[default]
    Auto,
    Node(NodeId),
}

pub(crate) fn resolve_root(tree: &JoinTree, root: Root) -> Result<NodeId> {
    match root {
        Root::Node(id) => {
            tree.node(id)?;
            Ok(id)
        }
        Root::Auto => {
            let mut best: Option<(usize, NodeId)> = None;
            for n in tree.nodes() {
                let w = n.label.state_space_size(tree.table())?;
                if best.map_or(true, |(bw, _)| w > bw) {
                    best = Some((w, n.id));
                }
            }
            best.map(|(_, id)| id).ok_or_else(|| Error::InvalidTree("tree has no nodes".into()))
        }
    }
}

/// Orientation of a tree toward a root: BFS parents and an order with
/// parents before children.
pub(crate) fn orient(tree: &JoinTree, root: NodeId) -> (Vec<Option<NodeId>>, Vec<NodeId>) {
    let mut parent = vec![None; tree.node_count()];
    let mut order = Vec::with_capacity(tree.node_count());
    let mut seen = vec![false; tree.node_count()];
    let mut queue = VecDeque::from([root]);
    seen[root.0] = true;
    while let Some(n) = queue.pop_front() {
        order.push(n);
        for &m in tree.neighbors(n) {
            if !seen[m.0] {
                seen[m.0] = true;
                parent[m.0] = Some(n);
                queue.push_back(m);
            }
        }
    }
    (parent, order)
}

/// Cap every node's degree at three by replacing each higher-degree node
/// with a chain of same-label copies oriented toward `root`.
///
/// Each copy hosts what one binary combination needs: the copy farthest
/// from the root takes the two lightest neighbors (by subtree state-space
/// weight), middle copies take one neighbor each, and the root-side copy
/// carries the node's input valuation (if any) next to the parent edge —
/// for the degree-4 example this yields three copies with the input on the
/// copy adjacent to the root-side neighbor. Already-binary trees come back
/// structurally identical.
pub fn binarize(tree: &JoinTree, root: Root) -> Result<JoinTree> {
    tree.verify().map_err(|e| match e {
        Error::InvalidTree(d) => Error::InvalidTree(format!("binarize needs a valid tree: {d}")),
        other => other,
    })?;
    if tree.is_binary() {
        return Ok(tree.clone());
    }
    let root = resolve_root(tree, root)?;
    let (parent, order) = orient(tree, root);

    // subtree weights, children before parents
    let mut weight = vec![0u128; tree.node_count()];
    for &n in order.iter().rev() {
        let mut w = tree.label(n)?.state_space_size(tree.table())? as u128;
        for &c in tree.neighbors(n) {
            if parent[c.0] == Some(n) {
                w += weight[c.0];
            }
        }
        weight[n.0] = w;
    }

    let mut out = JoinTree::new(Arc::clone(tree.table()));
    for n in tree.nodes() {
        out.add_node(n.label.clone())?;
        out.set_input(NodeId(n.id.0), n.input.clone());
    }

    // ports[r][neighbor] = endpoint replacing r on the edge toward neighbor
    let mut ports: Vec<BTreeMap<NodeId, NodeId>> = vec![BTreeMap::new(); tree.node_count()];
    let mut chain_edges: Vec<(NodeId, NodeId)> = Vec::new();
    for r in tree.nodes() {
        if tree.degree(r.id) <= 3 {
            continue;
        }
        // the root-side neighbor; the root itself treats its heaviest
        // child as one
        let mut kids: Vec<NodeId> = tree
            .neighbors(r.id)
            .iter()
            .copied()
            .filter(|&n| parent[r.id.0] != Some(n))
            .collect();
        kids.sort_by_key(|&k| (weight[k.0], k));
        let par = match parent[r.id.0] {
            Some(p) => p,
            None => kids.pop().expect("degree > 3 leaves a pseudo-parent"),
        };
        let has_input = r.input.is_some();
        let copies = kids.len() + usize::from(has_input) - 1;
        let mut copy_ids = vec![r.id];
        for _ in 1..copies {
            copy_ids.push(out.add_node(r.label.clone())?);
        }
        // item t of (kids ++ input): copy 0 hosts items 0 and 1, copy t-1
        // hosts item t; the input, when present, is the last item and so
        // lands on the root-side copy.
        for (t, &k) in kids.iter().enumerate() {
            ports[r.id.0].insert(k, copy_ids[t.saturating_sub(1)]);
        }
        if has_input {
            let holder = *copy_ids.last().expect("at least one copy");
            if holder != r.id {
                let p = out.node(r.id)?.input.clone();
                out.set_input(r.id, None);
                out.set_input(holder, p);
            }
        }
        ports[r.id.0].insert(par, *copy_ids.last().expect("at least one copy"));
        for w in copy_ids.windows(2) {
            chain_edges.push((w[0], w[1]));
        }
    }

    for &(a, b) in tree.sorted_edges().iter() {
        let ea = ports[a.0].get(&b).copied().unwrap_or(a);
        let eb = ports[b.0].get(&a).copied().unwrap_or(b);
        out.add_edge(ea, eb)?;
    }
    for (a, b) in chain_edges {
        out.add_edge(a, b)?;
    }
    debug_assert!(out.is_binary());
    Ok(out)
}

/// Place each valuation in the input register of one node: the node whose
/// label equals its domain when one exists, otherwise the covering node
/// with the smallest label state space (both ties to the lower id; an
/// empty-domain valuation with no empty-labeled node goes to node 0).
/// Several valuations landing on one node are combined pairwise on arrival,
/// counted against that node.
pub fn attach_valuations(
    tree: &mut JoinTree,
    valuations: Vec<Potential>,
    tallies: &mut Tallies,
) -> Result<()> {
    for p in valuations {
        if !Arc::ptr_eq(p.table(), tree.table()) {
            return Err(Error::TableMismatch);
        }
        let target = match tree.find_label(p.domain()) {
            Some(id) => id,
            None if p.domain().is_empty() => NodeId(0),
            None => {
                let mut best: Option<(usize, NodeId)> = None;
                for n in tree.nodes() {
                    if p.domain().is_subset_of(&n.label) {
                        let w = n.label.state_space_size(tree.table())?;
                        if best.map_or(true, |(bw, _)| w < bw) {
                            best = Some((w, n.id));
                        }
                    }
                }
                best.map(|(_, id)| id)
                    .ok_or_else(|| Error::NoCoveringNode(p.domain().display(tree.table())))?
            }
        };
        tree.check_node(target)?;
        let merged = match tree.nodes[target.0].input.take() {
            None => p,
            Some(existing) => existing.combine(&p, tallies.at(target))?,
        };
        tree.set_input(target, Some(merged));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::SemiringKind;

    fn wxyz() -> (Arc<VariableTable>, [VarId; 4]) {
        let mut vt = VariableTable::new();
        let w = vt.add("W", 2).unwrap();
        let x = vt.add("X", 3).unwrap();
        let y = vt.add("Y", 4).unwrap();
        let z = vt.add("Z", 5).unwrap();
        (Arc::new(vt), [w, x, y, z])
    }

    /// Five variables D, S1..S4, all binary; the nine subsets are the
    /// valuation domains plus the singleton queries.
    fn hub_input(order: EliminationOrder) -> (Arc<VariableTable>, [VarId; 5], BuildInput) {
        let mut vt = VariableTable::new();
        let d = vt.add("D", 2).unwrap();
        let s: Vec<VarId> = (1..=4).map(|i| vt.add(&format!("S{i}"), 2).unwrap()).collect();
        let vt = Arc::new(vt);
        let mut subsets = vec![DomainSet::singleton(d)];
        for &si in &s {
            subsets.push(DomainSet::from_ids([d, si]));
            subsets.push(DomainSet::singleton(si));
        }
        let input = BuildInput { table: Arc::clone(&vt), subsets, order };
        (vt, [d, s[0], s[1], s[2], s[3]], input)
    }

    fn ds(ids: &[VarId]) -> DomainSet {
        DomainSet::from_ids(ids.iter().copied())
    }

    #[test]
    fn pick_pair_prefers_smallest_union() {
        let (vt, [w, x, y, z]) = wxyz();
        let cands = vec![ds(&[w, x]), ds(&[w, y]), ds(&[w, z])];
        let (a, b) = pick_pair(&cands, &vt).unwrap();
        assert_eq!((a, b), (ds(&[w, x]), ds(&[w, y])));
        assert!(matches!(pick_pair(&cands[..1], &vt), Err(Error::EmptyInput)));
    }

    #[test]
    fn pick_pair_breaks_ties_lexicographically() {
        let mut vt = VariableTable::new();
        let a = vt.add("A", 2).unwrap();
        let b = vt.add("B", 2).unwrap();
        let c = vt.add("C", 2).unwrap();
        // all three pair unions weigh 4
        let cands = vec![ds(&[a]), ds(&[b]), ds(&[c])];
        let (p, q) = pick_pair(&cands, &vt).unwrap();
        assert_eq!((p, q), (ds(&[a]), ds(&[b])));
    }

    #[test]
    fn hub_family_builds_the_degree_four_tree() {
        let (_, [d, s1, s2, s3, s4], input) =
            hub_input(EliminationOrder::Explicit(vec![s_id(1), s_id(2), s_id(3), s_id(4)]));
        // ids above come from the table built inside hub_input
        let _ = (s1, s2, s3, s4);
        let tree = build_join_tree(&input).unwrap();
        tree.verify().unwrap();
        assert_eq!(tree.node_count(), 9);
        assert_eq!(tree.edge_count(), 8);
        let hub = tree.find_label(&DomainSet::singleton(d)).unwrap();
        assert_eq!(tree.degree(hub), 4);
        assert!(!tree.is_binary());
        // every neighbor of the hub is one of the pair labels
        for &n in tree.neighbors(hub) {
            let l = tree.label(n).unwrap();
            assert_eq!(l.len(), 2);
            assert!(l.contains(d));
        }
    }

    // hub_input allocates ids D=0, S1..S4=1..4
    fn s_id(i: u32) -> VarId {
        VarId(i)
    }

    #[test]
    fn hub_family_auto_order_matches_explicit() {
        let (_, _, auto_input) = hub_input(EliminationOrder::Auto);
        let (_, _, explicit_input) =
            hub_input(EliminationOrder::Explicit(vec![s_id(1), s_id(2), s_id(3), s_id(4)]));
        let a = build_join_tree(&auto_input).unwrap();
        let b = build_join_tree(&explicit_input).unwrap();
        assert!(a.structurally_equal(&b));
    }

    #[test]
    fn four_overlapping_domains_produce_the_connector_node() {
        let (vt, [w, x, y, z]) = wxyz();
        let input = BuildInput {
            table: Arc::clone(&vt),
            subsets: vec![ds(&[w, x]), ds(&[w, y]), ds(&[w, z]), ds(&[x, y, z])],
            order: EliminationOrder::Auto,
        };
        let tree = build_join_tree(&input).unwrap();
        tree.verify().unwrap();
        assert_eq!(tree.node_count(), 6);
        assert_eq!(tree.edge_count(), 5);
        assert!(tree.is_binary());
        let conn = tree.find_label(&ds(&[w, x, y])).expect("connector {W,X,Y} exists");
        let full = tree.find_label(&ds(&[w, x, y, z])).expect("{W,X,Y,Z} exists");
        assert!(tree.is_edge(conn, full));
        // the same tree also arises when singleton queries join the family
        let mut subsets = input.subsets.clone();
        subsets.extend([w, x, y, z].map(DomainSet::singleton));
        let with_queries =
            build_join_tree(&BuildInput { table: Arc::clone(&vt), subsets, order: EliminationOrder::Auto })
                .unwrap();
        with_queries.verify().unwrap();
        let conn = with_queries.find_label(&ds(&[w, x, y])).unwrap();
        let full = with_queries.find_label(&ds(&[w, x, y, z])).unwrap();
        assert!(with_queries.is_edge(conn, full));
    }

    #[test]
    fn build_keeps_every_subset_as_a_label_and_dedups() {
        let (vt, [w, x, ..]) = wxyz();
        let subsets = vec![ds(&[w, x]), ds(&[w, x]), ds(&[w]), DomainSet::empty()];
        let tree = build_join_tree(&BuildInput {
            table: Arc::clone(&vt),
            subsets: subsets.clone(),
            order: EliminationOrder::Auto,
        })
        .unwrap();
        tree.verify().unwrap();
        for s in &subsets {
            assert!(tree.find_label(s).is_some(), "missing label {}", s.display(&vt));
        }
        assert_eq!(tree.nodes_with_label(&ds(&[w, x])).len(), 1);
    }

    #[test]
    fn disconnected_families_bridge_through_the_empty_label() {
        let (vt, [w, x, y, z]) = wxyz();
        let tree = build_join_tree(&BuildInput {
            table: Arc::clone(&vt),
            subsets: vec![ds(&[w, x]), ds(&[y, z])],
            order: EliminationOrder::Auto,
        })
        .unwrap();
        tree.verify().unwrap();
        assert!(tree.find_label(&DomainSet::empty()).is_some());
    }

    #[test]
    fn single_subset_builds_a_single_node() {
        let (vt, [w, x, ..]) = wxyz();
        let tree = build_join_tree(&BuildInput {
            table: Arc::clone(&vt),
            subsets: vec![ds(&[w, x])],
            order: EliminationOrder::Auto,
        })
        .unwrap();
        tree.verify().unwrap();
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.edge_count(), 0);
    }

    #[test]
    fn explicit_order_errors_are_caught() {
        let (_, _, input) = hub_input(EliminationOrder::Explicit(vec![s_id(1)]));
        assert!(matches!(build_join_tree(&input), Err(Error::BadOrder(_))));
        let (_, _, input) =
            hub_input(EliminationOrder::Explicit(vec![s_id(1), s_id(1), s_id(2)]));
        assert!(matches!(build_join_tree(&input), Err(Error::BadOrder(_))));
        let (vt, _, _) = hub_input(EliminationOrder::Auto);
        let empty = BuildInput {
            table: vt,
            subsets: vec![],
            order: EliminationOrder::Auto,
        };
        assert!(matches!(build_join_tree(&empty), Err(Error::EmptyBuild)));
    }

    #[test]
    fn order_may_list_vanished_variables_as_noops() {
        // A appears only inside {A,B}; eliminating B first collapses the
        // family, so A's turn arrives with nothing to do.
        let mut vt = VariableTable::new();
        let a = vt.add("A", 2).unwrap();
        let b = vt.add("B", 2).unwrap();
        let c = vt.add("C", 2).unwrap();
        let vt = Arc::new(vt);
        let tree = build_join_tree(&BuildInput {
            table: Arc::clone(&vt),
            subsets: vec![ds(&[a, b]), ds(&[b, c])],
            order: EliminationOrder::Explicit(vec![a, b, c]),
        })
        .unwrap();
        tree.verify().unwrap();
    }

    #[test]
    fn verify_accepts_chains_and_names_broken_variables() {
        let mut vt = VariableTable::new();
        let a = vt.add("A", 2).unwrap();
        let b = vt.add("B", 2).unwrap();
        let c = vt.add("C", 2).unwrap();
        let vt = Arc::new(vt);

        let mut good = JoinTree::new(Arc::clone(&vt));
        let n0 = good.add_node(ds(&[a, b])).unwrap();
        let n1 = good.add_node(ds(&[b])).unwrap();
        let n2 = good.add_node(ds(&[b, c])).unwrap();
        good.add_edge(n0, n1).unwrap();
        good.add_edge(n1, n2).unwrap();
        good.verify().unwrap();

        let mut bad = JoinTree::new(Arc::clone(&vt));
        let n0 = bad.add_node(ds(&[a, b])).unwrap();
        let n1 = bad.add_node(ds(&[c])).unwrap();
        let n2 = bad.add_node(ds(&[b, c])).unwrap();
        bad.add_edge(n0, n1).unwrap();
        bad.add_edge(n1, n2).unwrap();
        match bad.verify() {
            Err(Error::InvalidTree(msg)) => assert!(msg.contains('B'), "diagnostic: {msg}"),
            other => panic!("expected running-intersection failure, got {other:?}"),
        }

        let mut forest = JoinTree::new(Arc::clone(&vt));
        forest.add_node(ds(&[a])).unwrap();
        forest.add_node(ds(&[b])).unwrap();
        assert!(matches!(forest.verify(), Err(Error::InvalidTree(_))));

        let mut loopy = JoinTree::new(Arc::clone(&vt));
        let n0 = loopy.add_node(ds(&[a])).unwrap();
        let n1 = loopy.add_node(ds(&[a])).unwrap();
        loopy.add_edge(n0, n1).unwrap();
        assert!(matches!(loopy.add_edge(n1, n0), Err(Error::InvalidTree(_))));
        assert!(matches!(loopy.add_edge(n0, n0), Err(Error::InvalidTree(_))));
    }

    #[test]
    fn binarize_reproduces_the_three_copy_chain() {
        let (vt, [d, s1, s2, s3, s4], input) =
            hub_input(EliminationOrder::Explicit(vec![s_id(1), s_id(2), s_id(3), s_id(4)]));
        let mut tree = build_join_tree(&input).unwrap();

        // the hub holds its own valuation, like δ in the worked example
        let delta = Potential::new(
            Arc::clone(&vt),
            DomainSet::singleton(d),
            vec![0.4, 0.6],
            SemiringKind::SumProduct,
        )
        .unwrap();
        let mut tallies = Tallies::new();
        attach_valuations(&mut tree, vec![delta], &mut tallies).unwrap();

        let root = tree.find_label(&DomainSet::singleton(s4)).unwrap();
        let bin = binarize(&tree, Root::Node(root)).unwrap();
        bin.verify().unwrap();
        assert!(bin.is_binary());
        assert_eq!(bin.node_count(), 11);

        let copies = bin.nodes_with_label(&DomainSet::singleton(d));
        assert_eq!(copies.len(), 3, "the degree-4 hub becomes three copies");

        // the input valuation sits on the copy adjacent to {D,S4}
        let holder: Vec<NodeId> = copies
            .iter()
            .copied()
            .filter(|&c| bin.input(c).unwrap().is_some())
            .collect();
        assert_eq!(holder.len(), 1);
        let ds4 = bin.find_label(&ds(&[d, s4])).unwrap();
        assert!(bin.is_edge(holder[0], ds4));

        // chain shape: one copy adjacent to {D,S1} and {D,S2}, one to {D,S3}
        let ds1 = bin.find_label(&ds(&[d, s1])).unwrap();
        let ds2 = bin.find_label(&ds(&[d, s2])).unwrap();
        let ds3 = bin.find_label(&ds(&[d, s3])).unwrap();
        assert!(copies.iter().any(|&c| bin.is_edge(c, ds1) && bin.is_edge(c, ds2)));
        assert!(copies.iter().any(|&c| bin.is_edge(c, ds3)));

        // valuation multiset preserved: still exactly one register
        let regs: Vec<_> = bin.nodes().filter_map(|n| n.input()).collect();
        assert_eq!(regs.len(), 1);
        assert_eq!(regs[0].values(), &[0.4, 0.6]);
    }

    #[test]
    fn binarize_leaves_binary_trees_untouched_and_is_idempotent() {
        let (vt, [w, x, y, z]) = wxyz();
        let input = BuildInput {
            table: Arc::clone(&vt),
            subsets: vec![ds(&[w, x]), ds(&[w, y]), ds(&[w, z]), ds(&[x, y, z])],
            order: EliminationOrder::Auto,
        };
        let tree = build_join_tree(&input).unwrap();
        assert!(tree.is_binary());
        let bin = binarize(&tree, Root::Auto).unwrap();
        assert!(bin.structurally_equal(&tree));

        let (_, _, input) = hub_input(EliminationOrder::Auto);
        let tree = build_join_tree(&input).unwrap();
        let once = binarize(&tree, Root::Auto).unwrap();
        let twice = binarize(&once, Root::Auto).unwrap();
        assert!(twice.structurally_equal(&once));
    }

    #[test]
    fn binarize_handles_wide_stars() {
        // A 6-leaf star needs four copies: a chain of three offers only
        // 2+1+2 = 5 endpoints at degree <= 3, one short of the six leaves.
        let mut vt = VariableTable::new();
        let ids: Vec<VarId> = (0..6).map(|i| vt.add(&format!("V{i}"), 2).unwrap()).collect();
        let vt = Arc::new(vt);
        let mut tree = JoinTree::new(Arc::clone(&vt));
        let center = tree.add_node(ds(&ids)).unwrap();
        for &v in &ids {
            let leaf = tree.add_node(DomainSet::singleton(v)).unwrap();
            tree.add_edge(center, leaf).unwrap();
        }
        tree.verify().unwrap();
        let bin = binarize(&tree, Root::Auto).unwrap();
        bin.verify().unwrap();
        assert!(bin.is_binary());
        assert_eq!(bin.nodes_with_label(&ds(&ids)).len(), 4);
    }

    #[test]
    fn attach_places_by_exact_label_then_smallest_cover() {
        let (vt, [w, x, y, z]) = wxyz();
        let input = BuildInput {
            table: Arc::clone(&vt),
            subsets: vec![ds(&[w, x]), ds(&[w, y]), ds(&[w, z]), ds(&[x, y, z])],
            order: EliminationOrder::Auto,
        };
        let mut tree = build_join_tree(&input).unwrap();
        let val = |dom: &DomainSet, fill: f64| {
            let size = dom.state_space_size(&vt).unwrap();
            Potential::new(Arc::clone(&vt), dom.clone(), vec![fill; size], SemiringKind::SumProduct)
                .unwrap()
        };
        let mut tallies = Tallies::new();
        attach_valuations(
            &mut tree,
            vec![
                val(&ds(&[w, x]), 0.5),    // exact label
                val(&ds(&[w]), 0.25),      // no {W} node: smallest cover is {W,X} (6 cells)
                val(&DomainSet::empty(), 2.0), // lowest node id
            ],
            &mut tallies,
        )
        .unwrap();
        let wx = tree.find_label(&ds(&[w, x])).unwrap();
        let reg = tree.input(wx).unwrap().expect("register filled");
        // {W,X} got the exact valuation and then the {W} one, pre-combined
        assert_eq!(reg.domain(), &ds(&[w, x]));
        assert_eq!(tallies.total().combinations, 1);
        assert!(tree.input(NodeId(0)).unwrap().is_some());

        let mut tallies = Tallies::new();
        let err = attach_valuations(&mut tree, vec![val(&ds(&[w, x, y, z]), 0.1)], &mut tallies);
        assert!(err.is_ok(), "the full domain is covered by {{W,X,Y,Z}}");
        let (vt2, _, _) = hub_input(EliminationOrder::Auto);
        let foreign = Potential::new(
            Arc::clone(&vt2),
            DomainSet::singleton(VarId(0)),
            vec![0.5, 0.5],
            SemiringKind::SumProduct,
        )
        .unwrap();
        assert!(matches!(
            attach_valuations(&mut tree, vec![foreign], &mut tallies),
            Err(Error::TableMismatch)
        ));
    }

    #[test]
    fn attach_rejects_uncoverable_domains() {
        let mut vt = VariableTable::new();
        let a = vt.add("A", 2).unwrap();
        let b = vt.add("B", 2).unwrap();
        let vt = Arc::new(vt);
        let mut tree = JoinTree::new(Arc::clone(&vt));
        tree.add_node(ds(&[a])).unwrap();
        let orphan =
            Potential::new(Arc::clone(&vt), ds(&[a, b]), vec![0.1; 4], SemiringKind::SumProduct)
                .unwrap();
        let mut tallies = Tallies::new();
        assert!(matches!(
            attach_valuations(&mut tree, vec![orphan], &mut tallies),
            Err(Error::NoCoveringNode(_))
        ));
    }

    #[test]
    fn dot_export_is_deterministic_and_suffixes_copies() {
        let mut vt = VariableTable::new();
        let a = vt.add("A", 2).unwrap();
        let vt = Arc::new(vt);
        let mut tree = JoinTree::new(Arc::clone(&vt));
        let n0 = tree.add_node(ds(&[a])).unwrap();
        let n1 = tree.add_node(ds(&[a])).unwrap();
        let n2 = tree.add_node(DomainSet::empty()).unwrap();
        tree.add_edge(n0, n1).unwrap();
        tree.add_edge(n2, n1).unwrap();
        let dot = tree.export_dot();
        assert_eq!(
            dot,
            "graph join_tree {\n  node [shape=box];\n  n0 [label=\"{A} #1\"];\n  n1 [label=\"{A} #2\"];\n  n2 [label=\"{}\"];\n  n0 -- n1;\n  n1 -- n2;\n}\n"
        );
        assert_eq!(dot, tree.export_dot());
    }

    #[test]
    fn dot_export_single_node() {
        let mut vt = VariableTable::new();
        let a = vt.add("A", 2).unwrap();
        let vt = Arc::new(vt);
        let mut tree = JoinTree::new(Arc::clone(&vt));
        tree.add_node(ds(&[a])).unwrap();
        let dot = tree.export_dot();
        assert!(dot.contains("n0 [label=\"{A}\"];"));
        assert!(!dot.contains("--"));
    }

    #[test]
    fn attach_after_binarize_prefers_the_lowest_copy() {
        // attaching to a tree that already has duplicate labels must be
        // deterministic: lowest id wins
        let mut vt = VariableTable::new();
        let a = vt.add("A", 2).unwrap();
        let vt = Arc::new(vt);
        let mut tree = JoinTree::new(Arc::clone(&vt));
        let n0 = tree.add_node(ds(&[a])).unwrap();
        let n1 = tree.add_node(ds(&[a])).unwrap();
        tree.add_edge(n0, n1).unwrap();
        let p = Potential::new(Arc::clone(&vt), ds(&[a]), vec![0.3, 0.7], SemiringKind::SumProduct)
            .unwrap();
        let mut tallies = Tallies::new();
        attach_valuations(&mut tree, vec![p], &mut tallies).unwrap();
        assert!(tree.input(n0).unwrap().is_some());
        assert!(tree.input(n1).unwrap().is_none());
    }

    /// Dot product of ports logic: adjacent high-degree nodes split
    /// independently and stay consistent.
    #[test]
    fn binarize_handles_adjacent_high_degree_nodes() {
        let mut vt = VariableTable::new();
        let shared = vt.add("S", 2).unwrap();
        let left: Vec<VarId> = (0..3).map(|i| vt.add(&format!("L{i}"), 2).unwrap()).collect();
        let right: Vec<VarId> = (0..3).map(|i| vt.add(&format!("R{i}"), 2).unwrap()).collect();
        let vt = Arc::new(vt);
        let mut tree = JoinTree::new(Arc::clone(&vt));
        let mut lids = vec![shared];
        lids.extend(&left);
        let mut rids = vec![shared];
        rids.extend(&right);
        let lh = tree.add_node(ds(&lids)).unwrap();
        let rh = tree.add_node(ds(&rids)).unwrap();
        tree.add_edge(lh, rh).unwrap();
        for &v in &left {
            let n = tree.add_node(DomainSet::singleton(v)).unwrap();
            tree.add_edge(lh, n).unwrap();
        }
        for &v in &right {
            let n = tree.add_node(DomainSet::singleton(v)).unwrap();
            tree.add_edge(rh, n).unwrap();
        }
        assert_eq!(tree.degree(lh), 4);
        assert_eq!(tree.degree(rh), 4);
        tree.verify().unwrap();
        let bin = binarize(&tree, Root::Auto).unwrap();
        bin.verify().unwrap();
        assert!(bin.is_binary());
    }
}
