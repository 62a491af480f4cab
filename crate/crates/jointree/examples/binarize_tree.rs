//! Rewrite a join tree so no node has more than three neighbors.
//!
//! ```text
//! cargo run --example binarize_tree
//! ```
//!
//! A hub variable D shared by four pairwise domains gives the {D} node
//! degree four. Message passing at such a node cannot reuse partial
//! products across directions, so `binarize` splits it into a chain of
//! copies with the same label — each copy has at most three neighbors, and
//! the valuation attached to the original node rides along to the copy
//! nearest the root.

use std::sync::Arc;

use jointree::{
    attach_valuations, binarize, build_join_tree, BuildInput, DomainSet, EliminationOrder,
    JoinTree, Potential, Root, SemiringKind, Tallies, VariableTable,
};

fn describe(tag: &str, tree: &JoinTree, vt: &VariableTable) -> jointree::Result<()> {
    println!(
        "{tag}: {} nodes, {} edges, max degree {} ({})",
        tree.node_count(),
        tree.edge_count(),
        tree.max_degree(),
        if tree.is_binary() { "binary" } else { "non-binary" },
    );
    for node in tree.nodes() {
        let marker = if node.input().is_some() { "  [input]" } else { "" };
        println!(
            "  n{} {}  degree {}{marker}",
            node.id,
            node.label.display(vt),
            tree.degree(node.id)
        );
    }
    Ok(())
}

fn main() -> jointree::Result<()> {
    let mut vt = VariableTable::new();
    let d = vt.add("D", 2)?;
    let s: Vec<_> = (1..=4).map(|i| vt.add(&format!("S{i}"), 2)).collect::<Result<_, _>>()?;
    let vt = Arc::new(vt);

    let mut subsets = vec![DomainSet::singleton(d)];
    let mut valuations = vec![Potential::new(
        Arc::clone(&vt),
        DomainSet::singleton(d),
        vec![0.3, 0.7],
        SemiringKind::SumProduct,
    )?];
    for (i, &si) in s.iter().enumerate() {
        let dom = DomainSet::from_ids([d, si]);
        let t = 0.1 + 0.2 * i as f64;
        valuations.push(Potential::new(
            Arc::clone(&vt),
            dom.clone(),
            vec![t, 1.0 - t, 1.0 - t, t],
            SemiringKind::SumProduct,
        )?);
        subsets.push(dom);
        subsets.push(DomainSet::singleton(si));
    }
    let input = BuildInput {
        table: Arc::clone(&vt),
        subsets,
        order: EliminationOrder::Explicit(s.clone()),
    };
    let mut tree = build_join_tree(&input)?;
    let mut costs = Tallies::new();
    attach_valuations(&mut tree, valuations, &mut costs)?;
    describe("built", &tree, &vt)?;

    let binary = binarize(&tree, Root::Auto)?;
    println!();
    describe("binarized", &binary, &vt)?;
    println!();
    println!("the {{D}} valuation now sits on the copy adjacent to the root's side,");
    println!("so the partial products cached along the chain all get reused.");

    println!();
    println!("copies share a label; DOT disambiguates them with #k suffixes:");
    print!("{}", binary.export_dot());

    // Binarizing again changes nothing.
    let again = binarize(&binary, Root::Auto)?;
    println!();
    println!("binarize is idempotent: {}", binary.structurally_equal(&again));
    Ok(())
}
