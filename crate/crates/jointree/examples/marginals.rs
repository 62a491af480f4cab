//! Every marginal of a network by message passing — no joint table.
//!
//! ```text
//! cargo run --example marginals
//! ```
//!
//! Loads the shipped five-variable network, builds and binarizes its join
//! tree, attaches the valuations, runs the two-register sweep, and prints
//! one marginal per query. The {D} marginal is cross-checked against the
//! brute-force oracle, which *does* materialize the joint — the point of
//! the tree is that the sweep never has to.

use std::path::Path;

use jointree::{
    attach_valuations, binarize, brute_force_marginal, build_join_tree, load_network,
    propagate, EliminationOrder, Root, Tallies, Targets,
};

fn main() -> jointree::Result<()> {
    let path = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/example2.json"));
    let net = load_network(path)?;
    let vt = &net.table;

    let input = net.build_input(EliminationOrder::Auto);
    let mut tree = build_join_tree(&input)?;
    let mut attach_costs = Tallies::new();
    attach_valuations(&mut tree, net.valuations.clone(), &mut attach_costs)?;
    tree = binarize(&tree, Root::Auto)?;

    let report = propagate(&tree, &Targets::All)?;
    println!("messages passed: {}", report.schedule.len());
    println!();

    for query in &net.queries {
        // every query domain is a node label; representatives cover them all
        let (_, marginal) = report
            .marginals
            .iter()
            .find(|(id, _)| tree.label(**id).map(|l| l == query).unwrap_or(false))
            .expect("query domains are node labels");
        let shown = marginal.normalize()?;
        println!("marginal {}", query.display(vt));
        for (i, v) in shown.values().iter().enumerate() {
            println!("  state {i}: {v:.6}");
        }
    }

    // cross-check one marginal against the joint-table oracle
    let d = net.queries[0].clone();
    let direct = brute_force_marginal(&net.valuations, &d)?;
    let via_tree = report
        .marginals
        .values()
        .find(|p| *p.domain() == d)
        .expect("the {D} marginal was computed");
    println!();
    println!(
        "{} via tree matches the brute-force oracle: {}",
        d.display(vt),
        via_tree.allclose(&direct, 1e-9)?
    );
    println!(
        "ops: combinations={} marginalizations={} cell_ops={}",
        report.counter.combinations, report.counter.marginalizations, report.counter.cell_ops
    );
    Ok(())
}
