//! The `jointree` command-line front end.
//!
//! Four subcommands over the JSON network format:
//!
//! * `build`     — construct (and by default binarize) the join tree, print it
//! * `marginals` — propagate and print one block per query domain
//! * `verify`    — compare propagated marginals against the brute-force oracle
//! * `count`     — run the three engine modes and tabulate operation counts
//!
//! Exit codes: `0` success, `1` runtime failure or verification mismatch,
//! `2` command-line usage error.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{ConfigIter, DomainSet, VariableTable};
use crate::count::Tallies;
use crate::error::{Error, Result};
use crate::net::{load_network, Network};
use crate::potential::Potential;
use crate::propagate::{
    brute_force_marginal_capped, count_comparison, CountMode, Engine, EngineOptions,
    PropagationReport, Targets, DEFAULT_JOINT_CAP,
};
use crate::random::{random_network, NetworkConfig};
use crate::semiring::SemiringKind;
use crate::tree::{
    attach_valuations, binarize, build_join_tree, EliminationOrder, JoinTree, Root,
};

#[derive(Parser, Debug)]
#[command(
    name = "jointree",
    version,
    about = "Exact marginals on valuation networks by join-tree message passing"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the join tree for a network file and print its structure.
    Build(BuildArgs),
    /// Propagate messages and print one marginal block per query domain.
    Marginals(MarginalsArgs),
    /// Check propagated marginals against the brute-force oracle.
    Verify(VerifyArgs),
    /// Compare operation counts across the three engine modes.
    Count(CountArgs),
}

/// Flags shared by every subcommand that shapes a tree.
#[derive(Args, Debug, Clone)]
struct TreeArgs {
    /// Binarize the join tree before propagation (the default).
    #[arg(long, overrides_with = "non_binary")]
    binary: bool,
    /// Keep the tree exactly as built, whatever the node degrees.
    #[arg(long, overrides_with = "binary")]
    non_binary: bool,
    /// Comma-separated variable elimination order, e.g. `S1,S2,S3,S4`.
    #[arg(long, value_name = "vars")]
    order: Option<String>,
    /// Root node for the sweep, given as its label, e.g. `D,S1`.
    #[arg(long, value_name = "node")]
    root: Option<String>,
}

impl TreeArgs {
    fn binary(&self) -> bool {
        !self.non_binary
    }
}

#[derive(Args, Debug)]
struct BuildArgs {
    /// Network file (JSON).
    file: PathBuf,
    #[command(flatten)]
    tree: TreeArgs,
    /// Also write the tree in DOT format to this path.
    #[arg(long, value_name = "path")]
    dot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MarginalsArgs {
    /// Network file (JSON).
    file: PathBuf,
    #[command(flatten)]
    tree: TreeArgs,
    /// Scale each displayed marginal to total mass 1 (sum-product only).
    #[arg(long)]
    normalize: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Network file (JSON). Omit when using --random.
    #[arg(required_unless_present = "random", conflicts_with = "random")]
    file: Option<PathBuf>,
    #[command(flatten)]
    tree: TreeArgs,
    /// Verify this many seeded random networks instead of a file.
    #[arg(long, value_name = "count")]
    random: Option<usize>,
    /// Seed for --random network generation.
    #[arg(long, value_name = "n", default_value_t = 0)]
    seed: u64,
    /// Relative tolerance for comparing against the oracle.
    #[arg(long, value_name = "rel", default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct CountArgs {
    /// Network file (JSON).
    file: PathBuf,
    /// Comma-separated variable elimination order, e.g. `S1,S2,S3,S4`.
    #[arg(long, value_name = "vars")]
    order: Option<String>,
}

/// Parse arguments from the process environment and run. Returns the exit
/// code; clap itself exits early (0 for help/version, 2 for usage errors).
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Marginals(a) => cmd_marginals(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Count(a) => cmd_count(a),
    }
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

fn parse_order(vt: &VariableTable, text: Option<&str>) -> Result<EliminationOrder> {
    let Some(text) = text else { return Ok(EliminationOrder::Auto) };
    let mut ids = Vec::new();
    for name in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        ids.push(vt.lookup(name)?);
    }
    if ids.is_empty() {
        return Err(Error::BadOrder("--order lists no variables".into()));
    }
    Ok(EliminationOrder::Explicit(ids))
}

fn parse_root_label(vt: &VariableTable, text: Option<&str>) -> Result<Option<DomainSet>> {
    let Some(text) = text else { return Ok(None) };
    let mut ids = Vec::new();
    for name in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        ids.push(vt.lookup(name)?);
    }
    Ok(Some(DomainSet::from_ids(ids)))
}

/// Build, attach, and (by default) binarize; resolve `--root` against node
/// labels. Returns the finished tree, the sweep root, and the attach costs.
fn prepare(net: &Network, args: &TreeArgs) -> Result<(JoinTree, Root, Tallies)> {
    let order = parse_order(&net.table, args.order.as_deref())?;
    let input = net.build_input(order);
    let mut tree = build_join_tree(&input)?;

    let root_label = parse_root_label(&net.table, args.root.as_deref())?;
    let built_root = match &root_label {
        Some(l) => Root::Node(
            tree.find_label(l).ok_or_else(|| Error::NoSuchLabel(l.display(&net.table)))?,
        ),
        None => Root::Auto,
    };

    let mut tallies = Tallies::new();
    attach_valuations(&mut tree, net.valuations.clone(), &mut tallies)?;
    if args.binary() {
        tree = binarize(&tree, built_root)?;
    }
    let sweep_root = match &root_label {
        Some(l) => Root::Node(tree.find_label(l).expect("labels survive binarization")),
        None => Root::Auto,
    };
    Ok((tree, sweep_root, tallies))
}

/// Queries in file order with duplicates dropped.
fn distinct_queries(net: &Network) -> Vec<DomainSet> {
    let mut seen = BTreeSet::new();
    net.queries.iter().filter(|q| seen.insert((*q).clone())).cloned().collect()
}

/// The propagated marginal for a query domain: the representative node
/// whose label equals it.
fn marginal_for<'r>(
    tree: &JoinTree,
    report: &'r PropagationReport,
    query: &DomainSet,
) -> Result<&'r Potential> {
    report
        .marginals
        .iter()
        .find(|(id, _)| tree.label(**id).map(|l| l == query).unwrap_or(false))
        .map(|(_, p)| p)
        .ok_or_else(|| Error::NoSuchLabel(format!("{query:?}")))
}

fn config_label(states: &[usize]) -> String {
    let inner: Vec<String> = states.iter().map(|s| s.to_string()).collect();
    format!("({})", inner.join(", "))
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

fn cmd_build(a: &BuildArgs) -> Result<i32> {
    let net = load_network(&a.file)?;
    let (tree, sweep_root, _tallies) = prepare(&net, &a.tree)?;
    let root = crate::tree::resolve_root(&tree, sweep_root)?;
    let vt = &net.table;

    println!(
        "join tree: {} nodes, {} edges, max degree {}, {}",
        tree.node_count(),
        tree.edge_count(),
        tree.max_degree(),
        if tree.is_binary() { "binary" } else { "non-binary" },
    );
    println!("semiring: {}", net.semiring);
    println!("root: n{root} {}", tree.label(root)?.display(vt));
    println!("nodes");
    for node in tree.nodes() {
        let marker = if node.input().is_some() { "  [input]" } else { "" };
        println!("  n{} {}{marker}", node.id, node.label.display(vt));
    }
    println!("edges");
    for (x, y) in tree.sorted_edges() {
        let sep = tree.label(x)?.intersection(tree.label(y)?);
        println!("  n{x} -- n{y}  sep {}", sep.display(vt));
    }

    if let Some(path) = &a.dot {
        let dot = tree.export_dot();
        std::fs::write(path, dot)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        println!("wrote DOT to {}", path.display());
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// marginals
// ---------------------------------------------------------------------------

fn cmd_marginals(a: &MarginalsArgs) -> Result<i32> {
    let net = load_network(&a.file)?;
    if a.normalize && net.semiring == SemiringKind::MinSum {
        eprintln!("error: --normalize applies only to sum-product networks");
        return Ok(2);
    }
    let (tree, sweep_root, mut tallies) = prepare(&net, &a.tree)?;
    let mut engine = Engine::new(&tree, EngineOptions::default());
    let report = engine.run_rooted(sweep_root, &Targets::All)?;
    tallies.absorb(&report.tallies);

    let vt = &net.table;
    for query in distinct_queries(&net) {
        let marginal = marginal_for(&tree, &report, &query)?;
        let shown = if a.normalize { marginal.normalize()? } else { marginal.clone() };
        println!("marginal {}", query.display(vt));
        let mut configs = ConfigIter::new(query.cards(vt)?);
        let mut i = 0usize;
        while let Some(states) = configs.next_state() {
            println!("  {}  {:.11e}", config_label(states), shown.values()[i]);
            i += 1;
        }
        println!();
    }
    let total = tallies.total();
    println!(
        "ops: combinations={} marginalizations={} cell_ops={}",
        total.combinations, total.marginalizations, total.cell_ops
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    match a.random {
        Some(n) => verify_random(a, n),
        None => {
            let file = a.file.as_ref().expect("clap enforces file or --random");
            let net = load_network(file)?;
            let (checked, failed) = verify_network(&net, &a.tree, a.tolerance)?;
            if failed == 0 {
                println!("verified {checked} marginals within rel {:e}", a.tolerance);
                Ok(0)
            } else {
                println!("{failed} of {checked} marginals mismatched (rel {:e})", a.tolerance);
                Ok(1)
            }
        }
    }
}

/// Propagate and compare every distinct query marginal against the
/// brute-force oracle. Returns (checked, failed).
fn verify_network(net: &Network, tree_args: &TreeArgs, rel: f64) -> Result<(usize, usize)> {
    let (tree, sweep_root, _tallies) = prepare(net, tree_args)?;
    let mut engine = Engine::new(&tree, EngineOptions::default());
    let report = engine.run_rooted(sweep_root, &Targets::All)?;

    let vt = &net.table;
    let mut checked = 0usize;
    let mut failed = 0usize;
    for query in distinct_queries(net) {
        let got = marginal_for(&tree, &report, &query)?;
        let want = brute_force_marginal_capped(&net.valuations, &query, DEFAULT_JOINT_CAP)?;
        checked += 1;
        if got.allclose(&want, rel)? {
            println!("ok       {}", query.display(vt));
        } else {
            println!("MISMATCH {}", query.display(vt));
            failed += 1;
        }
    }
    Ok((checked, failed))
}

fn verify_random(a: &VerifyArgs, count: usize) -> Result<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut checked = 0usize;
    let mut failed = 0usize;
    for i in 0..count {
        let kind =
            if i % 2 == 0 { SemiringKind::SumProduct } else { SemiringKind::MinSum };
        let net = random_network(&mut rng, &NetworkConfig::new(kind));
        println!(
            "network {i} ({}, {} variables, {} valuations)",
            kind,
            net.table.len(),
            net.valuations.len()
        );
        let (c, f) = verify_network(&net, &a.tree, a.tolerance)?;
        checked += c;
        failed += f;
    }
    if failed == 0 {
        println!("verified {checked} marginals over {count} networks within rel {:e}", a.tolerance);
        Ok(0)
    } else {
        println!("{failed} of {checked} marginals mismatched (rel {:e})", a.tolerance);
        Ok(1)
    }
}

// ---------------------------------------------------------------------------
// count
// ---------------------------------------------------------------------------

fn cmd_count(a: &CountArgs) -> Result<i32> {
    let net = load_network(&a.file)?;
    let order = parse_order(&net.table, a.order.as_deref())?;
    let input = net.build_input(order);
    let vt = &net.table;

    let reports: Vec<_> = CountMode::ALL
        .iter()
        .map(|&mode| count_comparison(&input, &net.valuations, mode))
        .collect::<Result<_>>()?;

    println!("totals");
    println!("  {:<18} {:>12} {:>17} {:>10}", "mode", "combinations", "marginalizations", "cell-ops");
    for r in &reports {
        let t = r.total();
        println!(
            "  {:<18} {:>12} {:>17} {:>10}",
            r.mode.as_str(),
            t.combinations,
            t.marginalizations,
            t.cell_ops
        );
    }

    // Per-label combination counts, one row per distinct node label.
    let labels: BTreeSet<DomainSet> =
        reports.iter().flat_map(|r| r.by_label().into_keys()).collect();
    println!();
    println!("combinations by node label");
    let width = labels.iter().map(|l| l.display(vt).len()).max().unwrap_or(5).max(5);
    println!(
        "  {:<width$} {:>16} {:>17} {:>7}",
        "label", "naive-nonbinary", "cached-nonbinary", "binary"
    );
    for label in &labels {
        let row: Vec<u64> = reports.iter().map(|r| r.combinations_at(label)).collect();
        println!(
            "  {:<width$} {:>16} {:>17} {:>7}",
            label.display(vt),
            row[0],
            row[1],
            row[2]
        );
    }

    println!();
    println!("CSV: mode,node-label,combinations,marginalizations,cell-ops");
    for r in &reports {
        for (label, ops) in r.by_label() {
            println!(
                "{},\"{}\",{},{},{}",
                r.mode.as_str(),
                label.display(vt),
                ops.combinations,
                ops.marginalizations,
                ops.cell_ops
            );
        }
        let t = r.total();
        println!(
            "{},\"(total)\",{},{},{}",
            r.mode.as_str(),
            t.combinations,
            t.marginalizations,
            t.cell_ops
        );
    }
    Ok(0)
}
