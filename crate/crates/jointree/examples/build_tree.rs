//! Build a join tree from a family of overlapping domains.
//!
//! ```text
//! cargo run --example build_tree
//! ```
//!
//! Four domains over W, X, Y, Z overlap pairwise, so no tree over the
//! inputs alone exists: the build introduces a connector node {W, X, Y}
//! and a top node {W, X, Y, Z} while keeping every input domain as a node
//! label. `verify` checks connectedness and the running-intersection
//! property (every variable's nodes form a connected subtree).

use std::sync::Arc;

use jointree::{build_join_tree, BuildInput, DomainSet, EliminationOrder, VariableTable};

fn main() -> jointree::Result<()> {
    let mut vt = VariableTable::new();
    let w = vt.add("W", 2)?;
    let x = vt.add("X", 3)?;
    let y = vt.add("Y", 4)?;
    let z = vt.add("Z", 5)?;
    let vt = Arc::new(vt);

    let subsets = vec![
        DomainSet::from_ids([w, x]),
        DomainSet::from_ids([w, y]),
        DomainSet::from_ids([w, z]),
        DomainSet::from_ids([x, y, z]),
    ];
    println!("input domains");
    for s in &subsets {
        println!("  {}", s.display(&vt));
    }

    let input = BuildInput { table: Arc::clone(&vt), subsets, order: EliminationOrder::Auto };
    let tree = build_join_tree(&input)?;
    tree.verify()?;

    println!();
    println!(
        "join tree: {} nodes, {} edges, max degree {}",
        tree.node_count(),
        tree.edge_count(),
        tree.max_degree()
    );
    for node in tree.nodes() {
        println!("  n{} {}", node.id, node.label.display(&vt));
    }
    println!("edges (with separators)");
    for (a, b) in tree.sorted_edges() {
        let sep = tree.label(a)?.intersection(tree.label(b)?);
        println!("  n{a} -- n{b}  sep {}", sep.display(&vt));
    }

    println!();
    println!("DOT for rendering with graphviz:");
    print!("{}", tree.export_dot());
    Ok(())
}
