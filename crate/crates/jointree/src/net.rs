//! Network files: a small JSON document declaring variables, valuations,
//! and query domains, plus the semiring the values live in.
//!
//! ```json
//! {
//!   "semiring": "sum-product",
//!   "variables": [ { "name": "A", "cardinality": 2 },
//!                  { "name": "B", "cardinality": 3 } ],
//!   "valuations": [ { "name": "f_ab", "domain": ["A", "B"],
//!                     "values": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6] } ],
//!   "queries": [ ["A"], ["B"] ]
//! }
//! ```
//!
//! Value lists are laid out in mixed-radix order over the sorted domain,
//! last variable fastest: for the 2×3 example above the six entries are
//! (A=0,B=0), (A=0,B=1), (A=0,B=2), (A=1,B=0), (A=1,B=1), (A=1,B=2).
//! An empty or missing `queries` list defaults to one singleton query per
//! declared variable.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{DomainSet, VariableTable};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::semiring::SemiringKind;
use crate::tree::{BuildInput, EliminationOrder};

/// The on-disk document, field for field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub semiring: SemiringKind,
    pub variables: Vec<VariableDoc>,
    pub valuations: Vec<ValuationDoc>,
    #[serde(default)]
    pub queries: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableDoc {
    pub name: String,
    pub cardinality: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValuationDoc {
    pub name: String,
    pub domain: Vec<String>,
    pub values: Vec<f64>,
}

/// A fully validated in-memory network.
#[derive(Debug, Clone)]
pub struct Network {
    pub table: Arc<VariableTable>,
    pub semiring: SemiringKind,
    pub valuations: Vec<Potential>,
    /// Valuation names, parallel to `valuations`.
    pub names: Vec<String>,
    pub queries: Vec<DomainSet>,
}

impl Network {
    /// The construction input for this network: every valuation domain and
    /// every query domain must end up as a node label.
    pub fn build_input(&self, order: EliminationOrder) -> BuildInput {
        let mut subsets: Vec<DomainSet> =
            self.valuations.iter().map(|p| p.domain().clone()).collect();
        subsets.extend(self.queries.iter().cloned());
        BuildInput { table: Arc::clone(&self.table), subsets, order }
    }
}

/// Read and validate a network file.
pub fn load_network(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let doc: NetworkDoc = serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.display().to_string(),
        source,
    })?;
    network_from_doc(&doc)
}

fn domain_from_names(
    names: &[String],
    vt: &VariableTable,
    what: &str,
) -> Result<DomainSet> {
    let mut ids = Vec::with_capacity(names.len());
    for n in names {
        ids.push(vt.lookup(n)?);
    }
    let d = DomainSet::from_ids(ids.iter().copied());
    if d.len() != names.len() {
        return Err(Error::BadNetwork(format!("{what} repeats a variable: {names:?}")));
    }
    Ok(d)
}

/// Validate a parsed document into a [`Network`].
pub fn network_from_doc(doc: &NetworkDoc) -> Result<Network> {
    let mut vt = VariableTable::new();
    for v in &doc.variables {
        vt.add(&v.name, v.cardinality)?;
    }
    let vt = Arc::new(vt);

    if doc.valuations.is_empty() {
        return Err(Error::BadNetwork("network declares no valuations".into()));
    }
    let mut valuations = Vec::with_capacity(doc.valuations.len());
    let mut names = Vec::with_capacity(doc.valuations.len());
    for val in &doc.valuations {
        let domain = domain_from_names(
            &val.domain,
            &vt,
            &format!("domain of valuation `{}`", val.name),
        )?;
        let p = Potential::new(Arc::clone(&vt), domain, val.values.clone(), doc.semiring)
            .map_err(|e| match e {
                Error::LengthMismatch { got, want, .. } => Error::LengthMismatch {
                    got,
                    want,
                    ctx: format!(" in valuation `{}`", val.name),
                },
                Error::InvalidValue { value, .. } => Error::InvalidValue {
                    value,
                    ctx: format!(" in valuation `{}`", val.name),
                },
                other => other,
            })?;
        valuations.push(p);
        names.push(val.name.clone());
    }

    let queries: Vec<DomainSet> = if doc.queries.is_empty() {
        vt.ids().map(DomainSet::singleton).collect()
    } else {
        doc.queries
            .iter()
            .enumerate()
            .map(|(i, q)| domain_from_names(q, &vt, &format!("query #{i}")))
            .collect::<Result<_>>()?
    };

    Ok(Network { table: vt, semiring: doc.semiring, valuations, names, queries })
}
