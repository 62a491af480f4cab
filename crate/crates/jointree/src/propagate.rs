//! Two-register message passing on a join tree.
//!
//! Every edge carries one register per direction. Rule 1: node `r` sends to
//! neighbor `s` the combination of its own valuation with the messages from
//! its *other* neighbors, marginalized onto `label(r) ∩ label(s)`. Rule 2:
//! the marginal at `r` combines all inbound messages with `r`'s valuation.
//! The joint valuation is never materialized — except in
//! [`brute_force_marginal`], the deliberately naive oracle.
//!
//! The [`Engine`] also does the operation accounting. Three counting modes
//! matter (see [`CountMode`]): a naive mode that refolds every product from
//! scratch on the final domain, a cached mode that reuses the partial
//! product behind a node's last outgoing message so its marginal costs one
//! more combination, and a binary mode that runs on the binarized tree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::algebra::DomainSet;
use crate::count::{OpCounter, Tallies};
use crate::error::{Error, Result};
use crate::potential::{combine_many_flat, combine_many_staged, Potential};
use crate::semiring::SemiringKind;
use crate::tree::{
    attach_valuations, binarize, build_join_tree, orient, resolve_root, BuildInput, JoinTree,
    NodeId, Root,
};

/// Which nodes to produce marginals for.
#[derive(Debug, Clone)]
pub enum Targets {
    /// Every label once: when copies share a label, the marginal is computed
    /// at the copy holding an input valuation, else at the lowest id.
    All,
    /// Exactly these nodes.
    Nodes(Vec<NodeId>),
}

/// Sibling visit order inside [`schedule_rooted`] — two orders give two
/// different but equally valid schedules, which is what the
/// schedule-independence tests exercise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ChildOrder {
    #[default]
    Ascending,
    Descending,
}

/// How a multi-way product is folded into pairwise combinations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CombineStrategy {
    /// Pairwise left fold; each step costs its own (growing) result domain.
    #[default]
    Staged,
    /// Every pairwise step charged at the final union domain — the cost of
    /// working on the full frame throughout.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub strategy: CombineStrategy,
    /// Reuse the partial product behind a node's last outgoing message when
    /// computing its marginal (one extra combination instead of a refold).
    pub cache_marginals: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { strategy: CombineStrategy::Staged, cache_marginals: true }
    }
}

/// Everything a propagation run produces.
#[derive(Debug, Clone)]
pub struct PropagationReport {
    /// Marginal per requested node, keyed by node id.
    pub marginals: BTreeMap<NodeId, Potential>,
    /// Grand total over all per-node counters.
    pub counter: OpCounter,
    /// The `(from, to)` messages in computation order; every prerequisite of
    /// a message precedes it.
    pub schedule: Vec<(NodeId, NodeId)>,
    /// Per-node attribution of the counts.
    pub tallies: Tallies,
}

/// The message-passing engine over one (attached) join tree.
pub struct Engine<'t> {
    tree: &'t JoinTree,
    opts: EngineOptions,
    kind: SemiringKind,
    edge_index: BTreeMap<(NodeId, NodeId), usize>,
    /// Per edge: `[lo→hi, hi→lo]` registers.
    messages: Vec<[Option<Potential>; 2]>,
    /// Per node: the neighbor its *last* outgoing message excluded, and the
    /// pre-marginalization product of everything else (inbound ⊗ own).
    partials: BTreeMap<NodeId, (NodeId, Potential)>,
    tallies: Tallies,
    log: Vec<(NodeId, NodeId)>,
}

impl<'t> Engine<'t> {
    pub fn new(tree: &'t JoinTree, opts: EngineOptions) -> Self {
        let mut edge_index = BTreeMap::new();
        for (i, e) in tree.sorted_edges().into_iter().enumerate() {
            edge_index.insert(e, i);
        }
        let kind = tree
            .nodes()
            .find_map(|n| n.input().map(|p| p.kind()))
            .unwrap_or(SemiringKind::SumProduct);
        let messages = vec![[None, None]; edge_index.len()];
        Self {
            tree,
            opts,
            kind,
            edge_index,
            messages,
            partials: BTreeMap::new(),
            tallies: Tallies::new(),
            log: Vec::new(),
        }
    }

    pub fn tree(&self) -> &JoinTree {
        self.tree
    }

    pub fn tallies(&self) -> &Tallies {
        &self.tallies
    }

    fn edge_slot(&self, from: NodeId, to: NodeId) -> Option<(usize, usize)> {
        let (lo, hi, dir) = if from < to { (from, to, 0) } else { (to, from, 1) };
        self.edge_index.get(&(lo, hi)).map(|&i| (i, dir))
    }

    /// The filled register for the `from → to` direction, if any.
    pub fn message(&self, from: NodeId, to: NodeId) -> Option<&Potential> {
        self.edge_slot(from, to).and_then(|(i, d)| self.messages[i][d].as_ref())
    }

    /// Rule 1: fill the `r → s` register. Requires every other neighbor of
    /// `r` to have sent to `r` already. Combination order is fixed: inbound
    /// messages by ascending neighbor id, then `r`'s own valuation; a
    /// missing valuation contributes the identity at zero cost.
    pub fn compute_message(&mut self, r: NodeId, s: NodeId) -> Result<()> {
        let tree = self.tree;
        tree.node(r)?;
        tree.node(s)?;
        let (idx, dir) = self.edge_slot(r, s).ok_or(Error::NotAnEdge(r, s))?;
        let sep = tree.label(r)?.intersection(tree.label(s)?);

        let mut items: Vec<&Potential> = Vec::new();
        for &u in tree.neighbors(r) {
            if u == s {
                continue;
            }
            let (i, d) = self.edge_slot(u, r).expect("adjacency implies an edge slot");
            items.push(
                self.messages[i][d]
                    .as_ref()
                    .ok_or(Error::MissingMessage { from: u, to: r })?,
            );
        }
        if let Some(alpha) = tree.input(r)? {
            items.push(alpha);
        }

        let msg = if items.is_empty() {
            Potential::identity(Arc::clone(tree.table()), sep.clone(), self.kind)?
        } else {
            let ops = self.tallies.at(r);
            let product = match self.opts.strategy {
                CombineStrategy::Staged => combine_many_staged(&items, ops)?,
                CombineStrategy::Flat => combine_many_flat(&items, ops)?,
            };
            // project onto what the product actually knows about, then pad
            // vacuously up to the separator (padding is free and harmless:
            // it adds identity cells only)
            let keep = product.domain().intersection(&sep);
            let narrowed = product.marginalize_to(&keep, ops)?;
            self.partials.insert(r, (s, product));
            if narrowed.domain() == &sep {
                narrowed
            } else {
                narrowed.extend_to(&sep)?
            }
        };
        self.messages[idx][dir] = Some(msg);
        self.log.push((r, s));
        Ok(())
    }

    /// Rule 2: the marginal at `r`, requiring all inbound registers filled.
    /// With caching on, reuses the partial product from `r`'s last outgoing
    /// message and spends exactly one more combination; otherwise refolds
    /// all operands under the engine's combine strategy.
    pub fn marginal_at(&mut self, r: NodeId) -> Result<Potential> {
        let tree = self.tree;
        tree.node(r)?;
        for &u in tree.neighbors(r) {
            if self.message(u, r).is_none() {
                return Err(Error::MissingMessage { from: u, to: r });
            }
        }
        let label = tree.label(r)?.clone();
        let operands = tree.degree(r) + usize::from(tree.input(r)?.is_some());

        let product = if operands == 0 {
            Potential::identity(Arc::clone(tree.table()), label.clone(), self.kind)?
        } else if self.opts.cache_marginals && operands >= 2 && self.partials.contains_key(&r) {
            let (excluded, partial) = self.partials.get(&r).cloned().expect("checked just above");
            let mu = self
                .message(excluded, r)
                .cloned()
                .ok_or(Error::MissingMessage { from: excluded, to: r })?;
            partial.combine(&mu, self.tallies.at(r))?
        } else {
            let mut items: Vec<&Potential> = Vec::new();
            for &u in tree.neighbors(r) {
                let (i, d) = self.edge_slot(u, r).expect("adjacency implies an edge slot");
                items.push(self.messages[i][d].as_ref().expect("checked just above"));
            }
            if let Some(alpha) = tree.input(r)? {
                items.push(alpha);
            }
            let ops = self.tallies.at(r);
            match self.opts.strategy {
                CombineStrategy::Staged => combine_many_staged(&items, ops)?,
                CombineStrategy::Flat => combine_many_flat(&items, ops)?,
            }
        };
        debug_assert!(product.domain().is_subset_of(&label));
        if product.domain() == &label {
            Ok(product)
        } else {
            Ok(product.extend_to(&label)?)
        }
    }

    /// Compute the given messages in order.
    pub fn run_messages(&mut self, msgs: &[(NodeId, NodeId)]) -> Result<()> {
        for &(r, s) in msgs {
            self.compute_message(r, s)?;
        }
        Ok(())
    }

    /// Full run: schedule, fill registers, apply Rule 2 at the targets.
    pub fn run(&mut self, targets: &Targets) -> Result<PropagationReport> {
        self.tree.verify()?;
        let sched = schedule(self.tree, targets)?;
        self.finish(&sched, targets)
    }

    /// Like [`run`](Self::run), but sweeping to and from a caller-chosen
    /// root. The full sweep fills every register, so any target works.
    pub fn run_rooted(&mut self, root: Root, targets: &Targets) -> Result<PropagationReport> {
        self.tree.verify()?;
        let sched = schedule_rooted(self.tree, root, ChildOrder::Ascending)?;
        self.finish(&sched, targets)
    }

    fn finish(&mut self, sched: &[(NodeId, NodeId)], targets: &Targets) -> Result<PropagationReport> {
        self.run_messages(sched)?;
        let nodes = match targets {
            Targets::All => representative_nodes(self.tree),
            Targets::Nodes(ids) => {
                let mut v = ids.clone();
                v.sort_unstable();
                v.dedup();
                for &n in &v {
                    self.tree.node(n)?;
                }
                v
            }
        };
        let mut marginals = BTreeMap::new();
        for &n in &nodes {
            marginals.insert(n, self.marginal_at(n)?);
        }
        Ok(PropagationReport {
            marginals,
            counter: self.tallies.total(),
            schedule: self.log.clone(),
            tallies: self.tallies.clone(),
        })
    }
}

/// One node per distinct label: the copy holding an input valuation when
/// there is one, else the lowest id. Ascending.
pub fn representative_nodes(tree: &JoinTree) -> Vec<NodeId> {
    let mut groups: BTreeMap<&DomainSet, Vec<NodeId>> = BTreeMap::new();
    for n in tree.nodes() {
        groups.entry(&n.label).or_default().push(n.id);
    }
    let mut out: Vec<NodeId> = groups
        .values()
        .map(|ids| {
            ids.iter()
                .copied()
                .find(|&id| tree.input(id).ok().flatten().is_some())
                .unwrap_or(ids[0])
        })
        .collect();
    out.sort_unstable();
    out
}

/// Deterministic dependency-respecting schedule. For [`Targets::All`] this
/// is a full two-pass sweep — inward post-order to the default root, then
/// outward pre-order — exactly `2·|E|` messages. For explicit targets it is
/// the union of the edge sets directed toward each target, emitted in
/// ready-order.
pub fn schedule(tree: &JoinTree, targets: &Targets) -> Result<Vec<(NodeId, NodeId)>> {
    match targets {
        Targets::All => schedule_rooted(tree, Root::Auto, ChildOrder::Ascending),
        Targets::Nodes(ids) => {
            if tree.node_count() == 0 {
                return Err(Error::InvalidTree("tree has no nodes".into()));
            }
            let mut needed: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
            for &t in ids {
                tree.node(t)?;
                let (parent, order) = orient(tree, t);
                if order.len() != tree.node_count() {
                    return Err(Error::InvalidTree("graph is disconnected".into()));
                }
                for n in order {
                    if let Some(p) = parent[n.0] {
                        needed.insert((n, p));
                    }
                }
            }
            let mut done: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
            let mut out = Vec::with_capacity(needed.len());
            while done.len() < needed.len() {
                let mut progressed = false;
                for &(r, s) in &needed {
                    if done.contains(&(r, s)) {
                        continue;
                    }
                    let ready = tree
                        .neighbors(r)
                        .iter()
                        .all(|&u| u == s || done.contains(&(u, r)));
                    if ready {
                        out.push((r, s));
                        done.insert((r, s));
                        progressed = true;
                    }
                }
                if !progressed {
                    return Err(Error::InvalidTree(
                        "message schedule cannot make progress (cycle?)".into(),
                    ));
                }
            }
            Ok(out)
        }
    }
}

/// Full two-pass sweep for an explicit root and sibling order; used both by
/// [`schedule`] and by tests that need a *different* valid schedule.
pub fn schedule_rooted(
    tree: &JoinTree,
    root: Root,
    order: ChildOrder,
) -> Result<Vec<(NodeId, NodeId)>> {
    if tree.node_count() == 0 {
        return Err(Error::InvalidTree("tree has no nodes".into()));
    }
    let root = resolve_root(tree, root)?;
    let (_, bfs) = orient(tree, root);
    if bfs.len() != tree.node_count() {
        return Err(Error::InvalidTree("graph is disconnected".into()));
    }
    let kids = |n: NodeId, par: Option<NodeId>| -> Vec<NodeId> {
        let mut ks: Vec<NodeId> =
            tree.neighbors(n).iter().copied().filter(|&c| Some(c) != par).collect();
        if order == ChildOrder::Descending {
            ks.reverse();
        }
        ks
    };

    let mut msgs = Vec::with_capacity(2 * tree.edge_count());
    // inward: post-order, children before their own edge toward the parent
    let mut stack: Vec<(NodeId, Option<NodeId>, bool)> = vec![(root, None, false)];
    while let Some((n, par, expanded)) = stack.pop() {
        if expanded {
            if let Some(p) = par {
                msgs.push((n, p));
            }
            continue;
        }
        stack.push((n, par, true));
        // push reversed so children pop in the chosen sibling order
        let mut ks = kids(n, par);
        ks.reverse();
        for c in ks {
            stack.push((c, Some(n), false));
        }
    }
    debug_assert_eq!(msgs.len(), tree.edge_count());
    // outward: pre-order, each edge emitted as its child is first visited
    let mut stack: Vec<(NodeId, Option<NodeId>)> = vec![(root, None)];
    while let Some((n, par)) = stack.pop() {
        if let Some(p) = par {
            msgs.push((p, n));
        }
        let mut ks = kids(n, par);
        ks.reverse();
        for c in ks {
            stack.push((c, Some(n)));
        }
    }
    debug_assert_eq!(msgs.len(), 2 * tree.edge_count());
    Ok(msgs)
}

/// Run the default engine (staged combinations, cached marginals) over the
/// tree and report marginals at the targets.
pub fn propagate(tree: &JoinTree, targets: &Targets) -> Result<PropagationReport> {
    Engine::new(tree, EngineOptions::default()).run(targets)
}

/// Cap on the materialized joint's cell count in [`brute_force_marginal`].
pub const DEFAULT_JOINT_CAP: usize = 10_000_000;

/// The oracle: combine ALL valuations into the joint on the full union
/// domain, then marginalize to `target`. Deliberately ignores efficiency;
/// refuses joints above `DEFAULT_JOINT_CAP` cells.
pub fn brute_force_marginal(valuations: &[Potential], target: &DomainSet) -> Result<Potential> {
    brute_force_marginal_capped(valuations, target, DEFAULT_JOINT_CAP)
}

/// [`brute_force_marginal`] with an explicit cell cap.
pub fn brute_force_marginal_capped(
    valuations: &[Potential],
    target: &DomainSet,
    cap: usize,
) -> Result<Potential> {
    if valuations.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut union = DomainSet::empty();
    for v in valuations {
        union = union.union(v.domain());
    }
    if !target.is_subset_of(&union) {
        return Err(Error::NotASubset(target.display(valuations[0].table())));
    }
    let cells = union.state_space_size(valuations[0].table())?;
    if cells > cap {
        return Err(Error::JointTooLarge { cells, cap });
    }
    let mut scratch = OpCounter::new();
    let refs: Vec<&Potential> = valuations.iter().collect();
    let joint = combine_many_staged(&refs, &mut scratch)?;
    joint.marginalize_to(target, &mut scratch)
}

/// The three accounting regimes compared by the `count` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// Original tree; every product folded flat on its final domain and
    /// every marginal refolded from scratch.
    NaiveNonbinary,
    /// Original tree; staged products, marginals reuse the last outgoing
    /// partial (one extra combination).
    CachedNonbinary,
    /// Binarized tree, staged products, cached marginals.
    Binary,
}

impl CountMode {
    pub const ALL: [CountMode; 3] =
        [CountMode::NaiveNonbinary, CountMode::CachedNonbinary, CountMode::Binary];

    pub fn as_str(self) -> &'static str {
        match self {
            CountMode::NaiveNonbinary => "naive-nonbinary",
            CountMode::CachedNonbinary => "cached-nonbinary",
            CountMode::Binary => "binary",
        }
    }
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive-nonbinary" => Ok(CountMode::NaiveNonbinary),
            "cached-nonbinary" => Ok(CountMode::CachedNonbinary),
            "binary" => Ok(CountMode::Binary),
            other => Err(Error::BadNetwork(format!(
                "unknown count mode `{other}` (naive-nonbinary, cached-nonbinary, binary)"
            ))),
        }
    }
}

/// Counts from one full all-marginals run under one [`CountMode`],
/// attributable per node and per label.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub mode: CountMode,
    pub tallies: Tallies,
    /// The tree the run used (binarized for [`CountMode::Binary`]).
    pub tree: JoinTree,
}

impl CountReport {
    pub fn total(&self) -> OpCounter {
        self.tallies.total()
    }

    /// Counts aggregated over all nodes sharing a label.
    pub fn by_label(&self) -> BTreeMap<DomainSet, OpCounter> {
        let mut m: BTreeMap<DomainSet, OpCounter> = BTreeMap::new();
        for (node, c) in &self.tallies.by_node {
            let label = self.tree.label(*node).expect("tallied nodes exist").clone();
            m.entry(label).or_default().merge(c);
        }
        m
    }

    pub fn combinations_at(&self, label: &DomainSet) -> u64 {
        self.by_label().get(label).map_or(0, |c| c.combinations)
    }
}

/// Build, attach, propagate all marginals under `mode`, and report every
/// operation — including the combinations spent attaching several
/// valuations to one node.
pub fn count_comparison(
    input: &BuildInput,
    valuations: &[Potential],
    mode: CountMode,
) -> Result<CountReport> {
    let mut tree = build_join_tree(input)?;
    let mut tallies = Tallies::new();
    attach_valuations(&mut tree, valuations.to_vec(), &mut tallies)?;
    let tree = match mode {
        CountMode::Binary => binarize(&tree, Root::Auto)?,
        _ => tree,
    };
    let opts = match mode {
        CountMode::NaiveNonbinary => {
            EngineOptions { strategy: CombineStrategy::Flat, cache_marginals: false }
        }
        CountMode::CachedNonbinary | CountMode::Binary => EngineOptions::default(),
    };
    let mut engine = Engine::new(&tree, opts);
    let report = engine.run(&Targets::All)?;
    tallies.absorb(&report.tallies);
    drop(engine);
    Ok(CountReport { mode, tallies, tree })
}
