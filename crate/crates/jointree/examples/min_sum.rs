//! The same machinery, different semiring: minimizing a sum of costs.
//!
//! ```text
//! cargo run --example min_sum
//! ```
//!
//! Under min-sum, "combination" adds cost tables and "marginalization"
//! minimizes out variables, so the marginal onto the empty domain is the
//! optimum of the whole objective — computed by the identical sweep that
//! summed probabilities in the sum-product examples.

use std::path::Path;

use jointree::{
    attach_valuations, binarize, brute_force_marginal, build_join_tree, load_network,
    propagate, DomainSet, EliminationOrder, Root, Tallies, Targets,
};

fn main() -> jointree::Result<()> {
    let path = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/chain_minsum.json"));
    let net = load_network(path)?;
    let vt = &net.table;
    println!("semiring: {}", net.semiring);

    let input = net.build_input(EliminationOrder::Auto);
    let mut tree = build_join_tree(&input)?;
    let mut costs = Tallies::new();
    attach_valuations(&mut tree, net.valuations.clone(), &mut costs)?;
    tree = binarize(&tree, Root::Auto)?;
    let report = propagate(&tree, &Targets::All)?;

    let marginal_of = |q: &DomainSet| {
        report
            .marginals
            .values()
            .find(|p| p.domain() == q)
            .expect("query domains are node labels")
    };

    for query in net.queries.iter().filter(|q| !q.is_empty()) {
        let m = marginal_of(query);
        println!("minimum total cost by state of {}", query.display(vt));
        for (i, v) in m.values().iter().enumerate() {
            println!("  state {i}: {v:.6}");
        }
    }

    // the empty-domain marginal is the global optimum
    let optimum = marginal_of(&DomainSet::empty());
    println!();
    println!("global optimum: {:.6}", optimum.values()[0]);

    let oracle = brute_force_marginal(&net.valuations, &DomainSet::empty())?;
    println!("matches the exhaustive minimum: {}", optimum.values()[0] == oracle.values()[0]);
    Ok(())
}
