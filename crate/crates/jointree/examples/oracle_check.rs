//! Random-network verification against the brute-force oracle.
//!
//! ```text
//! cargo run --example oracle_check [-- <count> [<seed>]]
//! ```
//!
//! Generates seeded random networks under both semirings, computes every
//! query marginal by message passing on the binarized join tree, and
//! compares each against direct marginalization of the materialized joint.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jointree::{
    attach_valuations, binarize, brute_force_marginal, build_join_tree, propagate,
    random_network, EliminationOrder, NetworkConfig, Root, SemiringKind, Tallies, Targets,
};

fn main() -> jointree::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map(|a| a.parse().expect("count")).unwrap_or(40);
    let seed: u64 = args.next().map(|a| a.parse().expect("seed")).unwrap_or(2024);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0usize;
    for i in 0..count {
        let kind = if i % 2 == 0 { SemiringKind::SumProduct } else { SemiringKind::MinSum };
        let net = random_network(&mut rng, &NetworkConfig::new(kind));

        let input = net.build_input(EliminationOrder::Auto);
        let mut tree = build_join_tree(&input)?;
        let mut costs = Tallies::new();
        attach_valuations(&mut tree, net.valuations.clone(), &mut costs)?;
        tree = binarize(&tree, Root::Auto)?;
        let report = propagate(&tree, &Targets::All)?;

        for query in &net.queries {
            let got = report
                .marginals
                .values()
                .find(|p| p.domain() == query)
                .expect("query domains are node labels");
            let want = brute_force_marginal(&net.valuations, query)?;
            assert!(
                got.allclose(&want, 1e-9)?,
                "network {i}: marginal {} disagrees with the oracle",
                query.display(&net.table)
            );
            checked += 1;
        }
    }
    println!("{checked} marginals across {count} networks match the oracle within rel 1e-9");
    Ok(())
}
