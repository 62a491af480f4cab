//! Seeded generators: random networks for oracle checks, random hypergraphs
//! for structural checks, and the pinned documents behind the committed
//! `data/` files.
//!
//! Everything here is deterministic given the seed — the property suites
//! and the shipped files rely on that.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{DomainSet, VarId, VariableTable};
use crate::net::{Network, NetworkDoc, ValuationDoc, VariableDoc};
use crate::potential::Potential;
use crate::semiring::SemiringKind;
use crate::tree::{BuildInput, EliminationOrder};

/// Shape of a random network.
#[derive(Debug, Clone)]
pub struct NetworkConfig {
    pub max_vars: usize,
    pub max_cardinality: usize,
    pub max_valuations: usize,
    pub semiring: SemiringKind,
}

impl NetworkConfig {
    pub fn new(semiring: SemiringKind) -> Self {
        Self { max_vars: 6, max_cardinality: 4, max_valuations: 8, semiring }
    }
}

fn random_domain<R: Rng>(rng: &mut R, ids: &[VarId], max_size: usize) -> DomainSet {
    let size = rng.gen_range(0..=max_size.min(ids.len()));
    let picked: Vec<VarId> = ids.choose_multiple(rng, size).copied().collect();
    DomainSet::from_ids(picked)
}

/// Sum-product tables are strictly positive; min-sum tables hold positive
/// costs so that sums never cancel — random comparisons against the oracle
/// then stay well-conditioned at tight relative tolerances. (Negative costs
/// are legal and covered by the pinned `chain_minsum` document.)
fn random_values<R: Rng>(rng: &mut R, n: usize, kind: SemiringKind) -> Vec<f64> {
    (0..n)
        .map(|_| match kind {
            SemiringKind::SumProduct => rng.gen_range(0.05..1.0),
            SemiringKind::MinSum => rng.gen_range(0.25..4.0),
        })
        .collect()
}

fn random_potential<R: Rng>(
    rng: &mut R,
    table: &Arc<VariableTable>,
    domain: DomainSet,
    kind: SemiringKind,
) -> Potential {
    let n = domain.state_space_size(table).expect("generated domains are small");
    Potential::new(Arc::clone(table), domain, random_values(rng, n, kind), kind)
        .expect("generated values are valid")
}

/// A random network in which every variable is covered by at least one
/// valuation domain, so every node label stays inside the joint domain and
/// the brute-force oracle applies to every marginal.
pub fn random_network<R: Rng>(rng: &mut R, cfg: &NetworkConfig) -> Network {
    let n_vars = rng.gen_range(1..=cfg.max_vars);
    let mut vt = VariableTable::new();
    let ids: Vec<VarId> = (0..n_vars)
        .map(|i| {
            vt.add(&format!("V{i}"), rng.gen_range(1..=cfg.max_cardinality))
                .expect("fresh names")
        })
        .collect();
    let vt = Arc::new(vt);

    let n_vals = rng.gen_range(1..cfg.max_valuations.max(2));
    let mut domains: Vec<DomainSet> =
        (0..n_vals).map(|_| random_domain(rng, &ids, 3)).collect();
    let missing: Vec<VarId> =
        ids.iter().copied().filter(|&v| !domains.iter().any(|d| d.contains(v))).collect();
    if !missing.is_empty() {
        domains.push(DomainSet::from_ids(missing));
    }

    let valuations: Vec<Potential> = domains
        .into_iter()
        .map(|d| random_potential(rng, &vt, d, cfg.semiring))
        .collect();
    let names: Vec<String> = (0..valuations.len()).map(|i| format!("t{i}")).collect();

    let mut queries: Vec<DomainSet> = ids.iter().copied().map(DomainSet::singleton).collect();
    if rng.gen_bool(0.3) {
        queries.push(DomainSet::empty());
    }
    if n_vars >= 2 && rng.gen_bool(0.5) {
        queries.push(random_domain(rng, &ids, 2));
    }

    Network { table: vt, semiring: cfg.semiring, valuations, names, queries }
}

/// A random subset family over up to `max_vars` variables (cardinalities 2
/// or 3) with up to `max_subsets` subsets — duplicates, empty domains, and
/// disconnected families included. Sometimes carries an explicit random
/// elimination order.
pub fn random_hypergraph<R: Rng>(
    rng: &mut R,
    max_vars: usize,
    max_subsets: usize,
) -> BuildInput {
    let n_vars = rng.gen_range(1..=max_vars);
    let mut vt = VariableTable::new();
    let ids: Vec<VarId> = (0..n_vars)
        .map(|i| vt.add(&format!("V{i}"), rng.gen_range(2..=3)).expect("fresh names"))
        .collect();
    let table = Arc::new(vt);
    let n_subsets = rng.gen_range(1..=max_subsets);
    let subsets: Vec<DomainSet> =
        (0..n_subsets).map(|_| random_domain(rng, &ids, 4)).collect();
    let order = if rng.gen_bool(0.3) {
        let mut perm = ids.clone();
        perm.shuffle(rng);
        EliminationOrder::Explicit(perm)
    } else {
        EliminationOrder::Auto
    };
    BuildInput { table, subsets, order }
}

/// One random potential per subset of `input`, for count experiments on a
/// hypergraph.
pub fn potentials_for_subsets<R: Rng>(
    rng: &mut R,
    input: &BuildInput,
    kind: SemiringKind,
) -> Vec<Potential> {
    input
        .subsets
        .iter()
        .map(|d| random_potential(rng, &input.table, d.clone(), kind))
        .collect()
}

// ---------------------------------------------------------------------------
// Pinned documents for the committed data files.
// ---------------------------------------------------------------------------

/// Values are drawn from a pinned stream and rounded to six decimals so the
/// committed files stay readable and byte-reproducible.
fn pinned_values(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let v: f64 = rng.gen_range(lo..hi);
            (v * 1e6).round() / 1e6
        })
        .collect()
}

fn example1_doc() -> NetworkDoc {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0EC1_0001);
    let var = |name: &str, cardinality: usize| VariableDoc { name: name.into(), cardinality };
    let mut val = |name: &str, domain: &[&str], cells: usize| ValuationDoc {
        name: name.into(),
        domain: domain.iter().map(|s| s.to_string()).collect(),
        values: pinned_values(&mut rng, cells, 0.05, 1.0),
    };
    NetworkDoc {
        semiring: SemiringKind::SumProduct,
        variables: vec![var("W", 2), var("X", 3), var("Y", 4), var("Z", 5)],
        valuations: vec![
            val("f_wx", &["W", "X"], 6),
            val("f_wy", &["W", "Y"], 8),
            val("f_wz", &["W", "Z"], 10),
            val("f_xyz", &["X", "Y", "Z"], 60),
        ],
        queries: vec![vec!["W".into()], vec!["X".into()], vec!["Y".into()], vec!["Z".into()]],
    }
}

fn example2_doc() -> NetworkDoc {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0EC1_0002);
    let var = |name: &str, cardinality: usize| VariableDoc { name: name.into(), cardinality };
    let mut val = |name: &str, domain: &[&str], cells: usize| ValuationDoc {
        name: name.into(),
        domain: domain.iter().map(|s| s.to_string()).collect(),
        values: pinned_values(&mut rng, cells, 0.05, 1.0),
    };
    NetworkDoc {
        semiring: SemiringKind::SumProduct,
        variables: vec![var("D", 2), var("S1", 2), var("S2", 2), var("S3", 2), var("S4", 2)],
        valuations: vec![
            val("v_d", &["D"], 2),
            val("v_d_s1", &["D", "S1"], 4),
            val("v_d_s2", &["D", "S2"], 4),
            val("v_d_s3", &["D", "S3"], 4),
            val("v_d_s4", &["D", "S4"], 4),
            val("v_s1", &["S1"], 2),
            val("v_s2", &["S2"], 2),
            val("v_s3", &["S3"], 2),
            val("v_s4", &["S4"], 2),
        ],
        queries: vec![
            vec!["D".into()],
            vec!["S1".into()],
            vec!["S2".into()],
            vec!["S3".into()],
            vec!["S4".into()],
        ],
    }
}

fn chain_minsum_doc() -> NetworkDoc {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0EC1_0003);
    let var = |name: &str, cardinality: usize| VariableDoc { name: name.into(), cardinality };
    let mut val = |name: &str, domain: &[&str], cells: usize| ValuationDoc {
        name: name.into(),
        domain: domain.iter().map(|s| s.to_string()).collect(),
        values: pinned_values(&mut rng, cells, -4.0, 4.0),
    };
    NetworkDoc {
        semiring: SemiringKind::MinSum,
        variables: vec![var("A", 2), var("B", 3), var("C", 2), var("D", 3)],
        valuations: vec![
            val("c_ab", &["A", "B"], 6),
            val("c_bc", &["B", "C"], 6),
            val("c_cd", &["C", "D"], 6),
        ],
        queries: vec![
            vec!["A".into()],
            vec!["B".into()],
            vec!["C".into()],
            vec!["D".into()],
            vec![],
        ],
    }
}

fn loopy_sumprod_doc() -> NetworkDoc {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0EC1_0004);
    let var = |name: &str, cardinality: usize| VariableDoc { name: name.into(), cardinality };
    let mut val = |name: &str, domain: &[&str], cells: usize| ValuationDoc {
        name: name.into(),
        domain: domain.iter().map(|s| s.to_string()).collect(),
        values: pinned_values(&mut rng, cells, 0.05, 1.0),
    };
    NetworkDoc {
        semiring: SemiringKind::SumProduct,
        variables: vec![var("A", 2), var("B", 3), var("C", 2), var("D", 2)],
        valuations: vec![
            val("g_ab", &["A", "B"], 6),
            val("g_bc", &["B", "C"], 6),
            val("g_ac", &["A", "C"], 4),
            val("g_d", &["D"], 2),
        ],
        queries: vec![
            vec!["A".into()],
            vec!["B".into()],
            vec!["C".into()],
            vec!["D".into()],
        ],
    }
}

fn single_valuation_doc() -> NetworkDoc {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0EC1_0005);
    NetworkDoc {
        semiring: SemiringKind::SumProduct,
        variables: vec![
            VariableDoc { name: "A".into(), cardinality: 2 },
            VariableDoc { name: "B".into(), cardinality: 2 },
        ],
        valuations: vec![ValuationDoc {
            name: "f_ab".into(),
            domain: vec!["A".into(), "B".into()],
            values: pinned_values(&mut rng, 4, 0.05, 1.0),
        }],
        // intentionally empty: exercises the default singleton queries
        queries: vec![],
    }
}

/// The five documents shipped under `data/`, with their file names. The
/// `generate_networks` example writes them; a test pins the committed bytes
/// to this function's output.
pub fn shipped_network_docs() -> Vec<(&'static str, NetworkDoc)> {
    vec![
        ("example1.json", example1_doc()),
        ("example2.json", example2_doc()),
        ("chain_minsum.json", chain_minsum_doc()),
        ("loopy_sumprod.json", loopy_sumprod_doc()),
        ("single_valuation.json", single_valuation_doc()),
    ]
}

/// Render a shipped document exactly as the files are committed.
pub fn render_doc(doc: &NetworkDoc) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("documents serialize");
    text.push('\n');
    text
}
