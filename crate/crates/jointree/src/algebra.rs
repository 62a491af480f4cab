//! Variables, domains, and dense configuration indexing.
//!
//! A [`VariableTable`] owns the universe of variables; a [`DomainSet`] is a
//! strictly sorted set of variable ids drawn from one table. Tables over a
//! domain are stored densely in mixed-radix order: variables are sorted by
//! id and the *last* variable in that order varies fastest, so for a domain
//! {A, B} with cardinalities (2, 3) the configuration (A=1, B=2) sits at
//! index 1*3 + 2 = 5.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Identifier of a variable inside one [`VariableTable`]; dense and 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A named discrete variable with a finite, non-empty state space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub cardinality: usize,
}

/// Registry of all variables of one problem. Ids are handed out densely in
/// insertion order; names must be unique.
#[derive(Debug, Default, Clone)]
pub struct VariableTable {
    vars: Vec<Variable>,
    by_name: HashMap<String, VarId>,
}

impl VariableTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a variable. Errors on duplicate names and on cardinality 0.
    pub fn add(&mut self, name: &str, cardinality: usize) -> Result<VarId> {
        if cardinality == 0 {
            return Err(Error::ZeroCardinality(name.to_string()));
        }
        if self.by_name.contains_key(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        let id = VarId(self.vars.len() as u32);
        self.vars.push(Variable { id, name: name.to_string(), cardinality });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn get(&self, id: VarId) -> Result<&Variable> {
        self.vars.get(id.0 as usize).ok_or(Error::UnknownVariable(id))
    }

    pub fn cardinality(&self, id: VarId) -> Result<usize> {
        Ok(self.get(id)?.cardinality)
    }

    pub fn name(&self, id: VarId) -> Result<&str> {
        Ok(self.get(id)?.name.as_str())
    }

    pub fn lookup(&self, name: &str) -> Result<VarId> {
        self.by_name.get(name).copied().ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Variable> {
        self.vars.iter()
    }

    /// All ids, in id order.
    pub fn ids(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars.iter().map(|v| v.id)
    }
}

/// A set of variable ids, kept strictly ascending. The empty domain is valid
/// and denotes a single (empty) configuration.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DomainSet(Vec<VarId>);

impl DomainSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn singleton(v: VarId) -> Self {
        Self(vec![v])
    }

    /// Build from any id collection; sorts and de-duplicates.
    pub fn from_ids<I: IntoIterator<Item = VarId>>(ids: I) -> Self {
        let mut v: Vec<VarId> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[VarId] {
        &self.0
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Position of `v` inside the sorted id sequence.
    pub fn position(&self, v: VarId) -> Option<usize> {
        self.0.binary_search(&v).ok()
    }

    pub fn is_subset_of(&self, other: &DomainSet) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    pub fn union(&self, other: &DomainSet) -> DomainSet {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        DomainSet(out)
    }

    pub fn intersection(&self, other: &DomainSet) -> DomainSet {
        DomainSet(self.0.iter().copied().filter(|v| other.contains(*v)).collect())
    }

    pub fn difference(&self, other: &DomainSet) -> DomainSet {
        DomainSet(self.0.iter().copied().filter(|v| !other.contains(*v)).collect())
    }

    /// Remove one variable; errors if it is not a member.
    pub fn without(&self, v: VarId, vt: &VariableTable) -> Result<DomainSet> {
        if !self.contains(v) {
            return Err(Error::NotInDomain(vt.name(v).unwrap_or("?").to_string()));
        }
        Ok(DomainSet(self.0.iter().copied().filter(|x| *x != v).collect()))
    }

    /// Number of configurations: the product of member cardinalities
    /// (1 for the empty domain). Errors on unknown ids and on overflow.
    pub fn state_space_size(&self, vt: &VariableTable) -> Result<usize> {
        let mut size: usize = 1;
        for v in self.iter() {
            let card = vt.cardinality(v)?;
            size = size.checked_mul(card).ok_or(Error::StateSpaceOverflow)?;
        }
        Ok(size)
    }

    /// Cardinalities aligned with the sorted id sequence.
    pub fn cards(&self, vt: &VariableTable) -> Result<Vec<usize>> {
        self.iter().map(|v| vt.cardinality(v)).collect()
    }

    /// Mixed-radix strides aligned with the sorted id sequence; the last
    /// variable has stride 1 (it varies fastest).
    pub fn strides(&self, vt: &VariableTable) -> Result<Vec<usize>> {
        let cards = self.cards(vt)?;
        let mut strides = vec![1usize; cards.len()];
        for i in (0..cards.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1]
                .checked_mul(cards[i + 1])
                .ok_or(Error::StateSpaceOverflow)?;
        }
        Ok(strides)
    }

    /// Render as `{W, X}` using table names; `{}` for the empty domain.
    pub fn display(&self, vt: &VariableTable) -> String {
        let names: Vec<&str> =
            self.iter().map(|v| vt.name(v).unwrap_or("?")).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// Dense index of `assignment` within the mixed-radix layout of `d`. The
/// assignment must cover exactly the variables of `d` (any slice order).
pub fn config_index(
    d: &DomainSet,
    assignment: &[(VarId, usize)],
    vt: &VariableTable,
) -> Result<usize> {
    if assignment.len() != d.len() {
        return Err(Error::AssignmentMismatch(format!(
            "{} variables assigned, domain has {}",
            assignment.len(),
            d.len()
        )));
    }
    let strides = d.strides(vt)?;
    let mut index = 0usize;
    let mut seen = vec![false; d.len()];
    for &(v, state) in assignment {
        let pos = d.position(v).ok_or_else(|| {
            Error::AssignmentMismatch(format!(
                "variable {} is not in the domain",
                vt.name(v).unwrap_or("?")
            ))
        })?;
        if seen[pos] {
            return Err(Error::AssignmentMismatch(format!(
                "variable {} assigned twice",
                vt.name(v).unwrap_or("?")
            )));
        }
        seen[pos] = true;
        let card = vt.cardinality(v)?;
        if state >= card {
            return Err(Error::StateOutOfRange {
                var: vt.name(v)?.to_string(),
                state,
                card,
            });
        }
        index += state * strides[pos];
    }
    Ok(index)
}

/// Inverse of [`config_index`]: recover the assignment (sorted by id) held
/// at a dense index.
pub fn config_of(d: &DomainSet, index: usize, vt: &VariableTable) -> Result<Vec<(VarId, usize)>> {
    let size = d.state_space_size(vt)?;
    if index >= size {
        return Err(Error::IndexOutOfRange { index, size });
    }
    let strides = d.strides(vt)?;
    let cards = d.cards(vt)?;
    Ok(d.iter()
        .enumerate()
        .map(|(pos, v)| (v, index / strides[pos] % cards[pos]))
        .collect())
}

/// Iterator over all configurations of a card vector, in dense-index order
/// (last position varies fastest). Yields nothing extra for empty domains:
/// a single empty state vector, matching the one configuration they have.
pub(crate) struct ConfigIter {
    cards: Vec<usize>,
    states: Vec<usize>,
    started: bool,
    done: bool,
}

impl ConfigIter {
    pub(crate) fn new(cards: Vec<usize>) -> Self {
        let done = cards.iter().any(|&c| c == 0);
        let states = vec![0; cards.len()];
        Self { cards, states, started: false, done }
    }

    /// Advance to the next configuration; returns the current state slice
    /// or None when exhausted.
    pub(crate) fn next_state(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.states);
        }
        // increment from the last position (it varies fastest)
        for pos in (0..self.cards.len()).rev() {
            self.states[pos] += 1;
            if self.states[pos] < self.cards[pos] {
                return Some(&self.states);
            }
            self.states[pos] = 0;
        }
        self.done = true;
        None
    }
}
