//! Potentials: dense valuations over a domain, tagged with a semiring.
//!
//! All arithmetic that the cost model charges for goes through
//! [`Potential::combine`] and the marginalization methods, which take an
//! [`OpCounter`] so callers decide where the counts land. Potentials hold an
//! `Arc` to their [`VariableTable`]; combining potentials from different
//! tables is an error rather than an implicit union of universes.

use std::sync::Arc;

use crate::algebra::{config_index, ConfigIter, DomainSet, VarId, VariableTable};
use crate::count::OpCounter;
use crate::error::{Error, Result};
use crate::semiring::SemiringKind;

#[derive(Debug, Clone)]
pub struct Potential {
    table: Arc<VariableTable>,
    domain: DomainSet,
    values: Vec<f64>,
    kind: SemiringKind,
}

/// Strides into a source table, aligned with the variables of an enclosing
/// domain; variables absent from the source get stride 0, so a dot product
/// with any enclosing configuration lands on the matching source cell.
fn embedded_strides(
    outer: &DomainSet,
    inner: &DomainSet,
    vt: &VariableTable,
) -> Result<Vec<usize>> {
    let inner_strides = inner.strides(vt)?;
    outer
        .iter()
        .map(|v| Ok(inner.position(v).map_or(0, |p| inner_strides[p])))
        .collect()
}

#[inline]
fn dot(states: &[usize], strides: &[usize]) -> usize {
    states.iter().zip(strides).map(|(s, k)| s * k).sum()
}

impl Potential {
    /// Build a potential from a dense value table laid out in mixed-radix
    /// order over `domain` (last variable fastest).
    pub fn new(
        table: Arc<VariableTable>,
        domain: DomainSet,
        values: Vec<f64>,
        kind: SemiringKind,
    ) -> Result<Self> {
        let want = domain.state_space_size(&table)?;
        if values.len() != want {
            return Err(Error::LengthMismatch {
                got: values.len(),
                want,
                ctx: String::new(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !kind.value_ok(**v)) {
            return Err(Error::InvalidValue { value: *bad, ctx: String::new() });
        }
        Ok(Self { table, domain, values, kind })
    }

    /// The combination identity on `domain` (all ones for sum-product, all
    /// zeros for min-sum).
    pub fn identity(
        table: Arc<VariableTable>,
        domain: DomainSet,
        kind: SemiringKind,
    ) -> Result<Self> {
        let size = domain.state_space_size(&table)?;
        Ok(Self { table, domain, values: vec![kind.combine_identity(); size], kind })
    }

    pub fn domain(&self) -> &DomainSet {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SemiringKind {
        self.kind
    }

    pub fn table(&self) -> &Arc<VariableTable> {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cell value at one assignment (must cover the domain exactly).
    pub fn get(&self, assignment: &[(VarId, usize)]) -> Result<f64> {
        Ok(self.values[config_index(&self.domain, assignment, &self.table)?])
    }

    fn check_compatible(&self, other: &Potential) -> Result<()> {
        if !Arc::ptr_eq(&self.table, &other.table) {
            return Err(Error::TableMismatch);
        }
        if self.kind != other.kind {
            return Err(Error::SemiringMismatch);
        }
        Ok(())
    }

    /// Pairwise combination on the union domain. Counts 1 combination and
    /// one cell-op per result cell.
    pub fn combine(&self, other: &Potential, ops: &mut OpCounter) -> Result<Potential> {
        self.check_compatible(other)?;
        let union = self.domain.union(&other.domain);
        let cards = union.cards(&self.table)?;
        let size = union.state_space_size(&self.table)?;
        let a_strides = embedded_strides(&union, &self.domain, &self.table)?;
        let b_strides = embedded_strides(&union, &other.domain, &self.table)?;
        let mut values = Vec::with_capacity(size);
        let mut it = ConfigIter::new(cards);
        while let Some(states) = it.next_state() {
            let a = self.values[dot(states, &a_strides)];
            let b = other.values[dot(states, &b_strides)];
            values.push(self.kind.combine(a, b));
        }
        ops.record_combination(size);
        Ok(Potential {
            table: Arc::clone(&self.table),
            domain: union,
            values,
            kind: self.kind,
        })
    }

    /// Project onto `target` (a subset of the domain), folding out the rest.
    /// Projecting onto the full domain returns a copy at zero counted cost;
    /// otherwise counts 1 marginalization and one cell-op per source cell.
    pub fn marginalize_to(&self, target: &DomainSet, ops: &mut OpCounter) -> Result<Potential> {
        if !target.is_subset_of(&self.domain) {
            return Err(Error::NotASubset(target.display(&self.table)));
        }
        if *target == self.domain {
            return Ok(self.clone());
        }
        let out_size = target.state_space_size(&self.table)?;
        let t_strides = embedded_strides(&self.domain, target, &self.table)?;
        let mut values = vec![self.kind.fold_seed(); out_size];
        let mut it = ConfigIter::new(self.domain.cards(&self.table)?);
        let mut src = 0usize;
        while let Some(states) = it.next_state() {
            let ti = dot(states, &t_strides);
            values[ti] = self.kind.fold(values[ti], self.values[src]);
            src += 1;
        }
        ops.record_marginalization(self.values.len());
        Ok(Potential {
            table: Arc::clone(&self.table),
            domain: target.clone(),
            values,
            kind: self.kind,
        })
    }

    /// Fold one variable out of the domain.
    pub fn marginalize_out(&self, v: VarId, ops: &mut OpCounter) -> Result<Potential> {
        let target = self.domain.without(v, &self.table)?;
        self.marginalize_to(&target, ops)
    }

    /// Vacuous extension onto a superset domain: every cell copies the value
    /// of its restriction. Pure materialization — never counted.
    pub fn extend_to(&self, target: &DomainSet) -> Result<Potential> {
        if !self.domain.is_subset_of(target) {
            return Err(Error::NotASubset(self.domain.display(&self.table)));
        }
        if *target == self.domain {
            return Ok(self.clone());
        }
        let cards = target.cards(&self.table)?;
        let size = target.state_space_size(&self.table)?;
        let strides = embedded_strides(target, &self.domain, &self.table)?;
        let mut values = Vec::with_capacity(size);
        let mut it = ConfigIter::new(cards);
        while let Some(states) = it.next_state() {
            values.push(self.values[dot(states, &strides)]);
        }
        Ok(Potential {
            table: Arc::clone(&self.table),
            domain: target.clone(),
            values,
            kind: self.kind,
        })
    }

    /// Total mass under the semiring's fold: the sum of all cells for
    /// sum-product, the minimum for min-sum.
    pub fn mass(&self) -> f64 {
        let mut acc = self.kind.fold_seed();
        for v in &self.values {
            acc = self.kind.fold(acc, *v);
        }
        acc
    }

    /// Scale so cells sum to one. Sum-product only; errors on zero or
    /// non-finite mass.
    pub fn normalize(&self) -> Result<Potential> {
        if self.kind != SemiringKind::SumProduct {
            return Err(Error::Normalize(
                "normalization is defined for sum-product potentials only".into(),
            ));
        }
        let mass: f64 = self.values.iter().sum();
        if mass <= 0.0 || !mass.is_finite() {
            return Err(Error::Normalize(format!("total mass is {mass}")));
        }
        let values = self.values.iter().map(|v| v / mass).collect();
        Ok(Potential {
            table: Arc::clone(&self.table),
            domain: self.domain.clone(),
            values,
            kind: self.kind,
        })
    }

    /// Cell-wise closeness on identical domains: every pair must satisfy
    /// |a - b| <= 1e-15 + rel * max(|a|, |b|).
    pub fn allclose(&self, other: &Potential, rel: f64) -> Result<bool> {
        self.check_compatible(other)?;
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| (a - b).abs() <= 1e-15 + rel * a.abs().max(b.abs())))
    }
}

/// Fold a list of potentials pairwise, left to right; each step costs the
/// running-union result size. This is the staged strategy a binary join
/// tree realizes structurally.
pub fn combine_many_staged(items: &[&Potential], ops: &mut OpCounter) -> Result<Potential> {
    let (first, rest) = items.split_first().ok_or(Error::EmptyInput)?;
    let mut acc = (*first).clone();
    for p in rest {
        acc = acc.combine(p, ops)?;
    }
    Ok(acc)
}

/// Combine a list of potentials in one pass over the *final* union domain:
/// all m-1 cell combinations happen on the full result grid, so each of the
/// m-1 counted combinations costs the full result size. Value-identical to
/// the staged fold; only the counted cost differs.
pub fn combine_many_flat(items: &[&Potential], ops: &mut OpCounter) -> Result<Potential> {
    let (first, rest) = items.split_first().ok_or(Error::EmptyInput)?;
    if rest.is_empty() {
        return Ok((*first).clone());
    }
    for p in rest {
        first.check_compatible(p)?;
    }
    let table = Arc::clone(first.table());
    let kind = first.kind();
    let union = items
        .iter()
        .fold(DomainSet::empty(), |acc, p| acc.union(p.domain()));
    let cards = union.cards(&table)?;
    let size = union.state_space_size(&table)?;
    let strides: Vec<Vec<usize>> = items
        .iter()
        .map(|p| embedded_strides(&union, p.domain(), &table))
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(size);
    let mut it = ConfigIter::new(cards);
    while let Some(states) = it.next_state() {
        let mut acc = items[0].values()[dot(states, &strides[0])];
        for (p, st) in items[1..].iter().zip(&strides[1..]) {
            acc = kind.combine(acc, p.values()[dot(states, st)]);
        }
        values.push(acc);
    }
    for _ in 1..items.len() {
        ops.record_combination(size);
    }
    Potential::new(table, union, values, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab_table() -> (Arc<VariableTable>, VarId, VarId) {
        let mut vt = VariableTable::new();
        let a = vt.add("A", 2).unwrap();
        let b = vt.add("B", 2).unwrap();
        (Arc::new(vt), a, b)
    }

    fn pot(
        vt: &Arc<VariableTable>,
        ids: &[VarId],
        values: &[f64],
        kind: SemiringKind,
    ) -> Potential {
        Potential::new(
            Arc::clone(vt),
            DomainSet::from_ids(ids.iter().copied()),
            values.to_vec(),
            kind,
        )
        .unwrap()
    }

    #[test]
    fn construction_validates_length_and_values() {
        let (vt, a, b) = ab_table();
        let d = DomainSet::from_ids([a, b]);
        assert!(matches!(
            Potential::new(Arc::clone(&vt), d.clone(), vec![0.1; 5], SemiringKind::SumProduct),
            Err(Error::LengthMismatch { got: 5, want: 4, .. })
        ));
        assert!(matches!(
            Potential::new(
                Arc::clone(&vt),
                d.clone(),
                vec![0.1, -0.2, 0.3, 0.4],
                SemiringKind::SumProduct
            ),
            Err(Error::InvalidValue { .. })
        ));
        // negatives are fine for min-sum, NaN is not
        assert!(Potential::new(
            Arc::clone(&vt),
            d.clone(),
            vec![0.1, -0.2, 0.3, 0.4],
            SemiringKind::MinSum
        )
        .is_ok());
        assert!(matches!(
            Potential::new(Arc::clone(&vt), d, vec![0.1, f64::NAN, 0.3, 0.4], SemiringKind::MinSum),
            Err(Error::InvalidValue { .. })
        ));
    }

    #[test]
    fn combine_matches_worked_example() {
        let (vt, a, b) = ab_table();
        let rho = pot(&vt, &[a], &[0.3, 0.7], SemiringKind::SumProduct);
        let sigma = pot(&vt, &[a, b], &[0.25; 4], SemiringKind::SumProduct);
        let mut ops = OpCounter::new();
        let out = rho.combine(&sigma, &mut ops).unwrap();
        assert_eq!(out.domain().as_slice(), &[a, b]);
        assert_eq!(out.values(), &[0.075, 0.075, 0.175, 0.175]);
        assert_eq!(ops.combinations, 1);
        assert_eq!(ops.cell_ops, 4);
    }

    #[test]
    fn combine_min_sum_adds() {
        let (vt, a, _) = ab_table();
        let rho = pot(&vt, &[a], &[1.0, 4.0], SemiringKind::MinSum);
        let sigma = pot(&vt, &[a], &[2.0, 0.0], SemiringKind::MinSum);
        let mut ops = OpCounter::new();
        let out = rho.combine(&sigma, &mut ops).unwrap();
        assert_eq!(out.values(), &[3.0, 4.0]);
    }

    /// Per-configuration oracle: combine must equal the cell-by-cell product
    /// of restrictions on every configuration of the union domain.
    #[test]
    fn combine_agrees_with_per_configuration_oracle() {
        let mut vt = VariableTable::new();
        let a = vt.add("A", 2).unwrap();
        let b = vt.add("B", 3).unwrap();
        let c = vt.add("C", 2).unwrap();
        let vt = Arc::new(vt);
        let rho = pot(&vt, &[a, b], &[0.9, 0.3, 0.25, 0.8, 0.55, 0.05], SemiringKind::SumProduct);
        let sigma = pot(&vt, &[b, c], &[0.2, 0.6, 0.35, 0.15, 0.7, 0.4], SemiringKind::SumProduct);
        let mut ops = OpCounter::new();
        let out = rho.combine(&sigma, &mut ops).unwrap();
        for sa in 0..2 {
            for sb in 0..3 {
                for sc in 0..2 {
                    let got = out.get(&[(a, sa), (b, sb), (c, sc)]).unwrap();
                    let want =
                        rho.get(&[(a, sa), (b, sb)]).unwrap() * sigma.get(&[(b, sb), (c, sc)]).unwrap();
                    assert!((got - want).abs() < 1e-15, "({sa},{sb},{sc}): {got} vs {want}");
                }
            }
        }
        assert_eq!(ops.cell_ops, 12);
    }

    #[test]
    fn combine_with_empty_domain_identity_is_cellwise_identity() {
        let (vt, a, b) = ab_table();
        let sigma = pot(&vt, &[a, b], &[0.1, 0.2, 0.3, 0.4], SemiringKind::SumProduct);
        let one = Potential::identity(Arc::clone(&vt), DomainSet::empty(), SemiringKind::SumProduct)
            .unwrap();
        let mut ops = OpCounter::new();
        let out = sigma.combine(&one, &mut ops).unwrap();
        assert_eq!(out.values(), sigma.values());
        assert_eq!(out.domain(), sigma.domain());
    }

    #[test]
    fn combine_rejects_mixed_semirings_and_foreign_tables() {
        let (vt, a, b) = ab_table();
        let rho = pot(&vt, &[a], &[0.3, 0.7], SemiringKind::SumProduct);
        let sigma = pot(&vt, &[b], &[1.0, 2.0], SemiringKind::MinSum);
        let mut ops = OpCounter::new();
        assert!(matches!(rho.combine(&sigma, &mut ops), Err(Error::SemiringMismatch)));

        let (vt2, a2, _) = ab_table();
        let foreign = pot(&vt2, &[a2], &[0.5, 0.5], SemiringKind::SumProduct);
        assert!(matches!(rho.combine(&foreign, &mut ops), Err(Error::TableMismatch)));
    }

    #[test]
    fn marginalize_matches_worked_examples() {
        let (vt, a, b) = ab_table();
        let sigma = pot(&vt, &[a, b], &[0.1, 0.2, 0.3, 0.4], SemiringKind::SumProduct);
        let mut ops = OpCounter::new();
        let out = sigma.marginalize_out(b, &mut ops).unwrap();
        assert_eq!(out.domain().as_slice(), &[a]);
        assert!((out.values()[0] - 0.3).abs() < 1e-15);
        assert!((out.values()[1] - 0.7).abs() < 1e-15);
        assert_eq!(ops.marginalizations, 1);
        assert_eq!(ops.cell_ops, 4);

        let tau = pot(&vt, &[a, b], &[1.0, 5.0, 2.0, 0.0], SemiringKind::MinSum);
        let out = tau.marginalize_out(b, &mut ops).unwrap();
        assert_eq!(out.values(), &[1.0, 0.0]);
    }

    /// Explicit-sum oracle over a three-variable table.
    #[test]
    fn marginalize_agrees_with_explicit_sum_oracle() {
        let mut vt = VariableTable::new();
        let a = vt.add("A", 2).unwrap();
        let b = vt.add("B", 3).unwrap();
        let c = vt.add("C", 2).unwrap();
        let vt = Arc::new(vt);
        let values: Vec<f64> = (0..12).map(|i| (i as f64) * 0.75 + 0.5).collect();
        let sigma = pot(&vt, &[a, b, c], &values, SemiringKind::SumProduct);
        let mut ops = OpCounter::new();
        let out = sigma.marginalize_to(&DomainSet::from_ids([b]), &mut ops).unwrap();
        for sb in 0..3 {
            let mut want = 0.0;
            for sa in 0..2 {
                for sc in 0..2 {
                    want += sigma.get(&[(a, sa), (b, sb), (c, sc)]).unwrap();
                }
            }
            assert!((out.get(&[(b, sb)]).unwrap() - want).abs() < 1e-12);
        }
        // projecting to the empty domain gives the total mass
        let total = sigma.marginalize_to(&DomainSet::empty(), &mut ops).unwrap();
        assert_eq!(total.len(), 1);
        assert!((total.values()[0] - values.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn marginalize_to_own_domain_is_free() {
        let (vt, a, b) = ab_table();
        let sigma = pot(&vt, &[a, b], &[0.1, 0.2, 0.3, 0.4], SemiringKind::SumProduct);
        let own = sigma.domain().clone();
        let mut ops = OpCounter::new();
        let out = sigma.marginalize_to(&own, &mut ops).unwrap();
        assert_eq!(out.values(), sigma.values());
        assert_eq!(ops, OpCounter::default());
    }

    #[test]
    fn marginalize_rejects_non_subsets() {
        let (vt, a, b) = ab_table();
        let sigma = pot(&vt, &[a], &[0.5, 0.5], SemiringKind::SumProduct);
        let mut ops = OpCounter::new();
        assert!(matches!(
            sigma.marginalize_to(&DomainSet::from_ids([a, b]), &mut ops),
            Err(Error::NotASubset(_))
        ));
        assert!(matches!(sigma.marginalize_out(b, &mut ops), Err(Error::NotInDomain(_))));
    }

    #[test]
    fn extension_copies_restrictions_and_counts_nothing() {
        let (vt, a, b) = ab_table();
        let rho = pot(&vt, &[a], &[0.3, 0.7], SemiringKind::SumProduct);
        let ext = rho.extend_to(&DomainSet::from_ids([a, b])).unwrap();
        for sa in 0..2 {
            for sb in 0..2 {
                assert_eq!(
                    ext.get(&[(a, sa), (b, sb)]).unwrap(),
                    rho.get(&[(a, sa)]).unwrap()
                );
            }
        }
    }

    #[test]
    fn normalize_matches_worked_example_and_rejects_misuse() {
        let (vt, a, _) = ab_table();
        let rho = pot(&vt, &[a], &[0.1, 0.3], SemiringKind::SumProduct);
        let n = rho.normalize().unwrap();
        assert!(n.allclose(&pot(&vt, &[a], &[0.25, 0.75], SemiringKind::SumProduct), 1e-12).unwrap());

        let zero = pot(&vt, &[a], &[0.0, 0.0], SemiringKind::SumProduct);
        assert!(matches!(zero.normalize(), Err(Error::Normalize(_))));
        let cost = pot(&vt, &[a], &[1.0, 2.0], SemiringKind::MinSum);
        assert!(matches!(cost.normalize(), Err(Error::Normalize(_))));
    }

    #[test]
    fn allclose_demands_identical_domains() {
        let (vt, a, b) = ab_table();
        let rho = pot(&vt, &[a], &[0.3, 0.7], SemiringKind::SumProduct);
        let sigma = pot(&vt, &[b], &[0.3, 0.7], SemiringKind::SumProduct);
        assert!(matches!(rho.allclose(&sigma, 1e-9), Err(Error::DomainMismatch)));
        let near = pot(&vt, &[a], &[0.3 + 1e-13, 0.7], SemiringKind::SumProduct);
        assert!(rho.allclose(&near, 1e-9).unwrap());
        assert!(!rho.allclose(&near, 1e-16).unwrap());
    }

    #[test]
    fn staged_and_flat_folds_agree_in_value_but_not_cost() {
        let mut vt = VariableTable::new();
        let a = vt.add("A", 2).unwrap();
        let b = vt.add("B", 3).unwrap();
        let c = vt.add("C", 4).unwrap();
        let vt = Arc::new(vt);
        let pa = pot(&vt, &[a], &[0.2, 0.8], SemiringKind::SumProduct);
        let pb = pot(&vt, &[b], &[0.1, 0.5, 0.4], SemiringKind::SumProduct);
        let pc = pot(&vt, &[c], &[0.25, 0.25, 0.3, 0.2], SemiringKind::SumProduct);

        let mut staged_ops = OpCounter::new();
        let staged = combine_many_staged(&[&pa, &pb, &pc], &mut staged_ops).unwrap();
        assert_eq!(staged_ops.combinations, 2);
        assert_eq!(staged_ops.cell_ops, 6 + 24);

        let mut flat_ops = OpCounter::new();
        let flat = combine_many_flat(&[&pa, &pb, &pc], &mut flat_ops).unwrap();
        assert_eq!(flat_ops.combinations, 2);
        assert_eq!(flat_ops.cell_ops, 24 + 24);

        assert!(staged.allclose(&flat, 1e-12).unwrap());

        // single-item folds are free copies
        let mut ops = OpCounter::new();
        let one = combine_many_flat(&[&pa], &mut ops).unwrap();
        assert_eq!(one.values(), pa.values());
        assert_eq!(ops, OpCounter::default());
        assert!(matches!(combine_many_staged(&[], &mut ops), Err(Error::EmptyInput)));
    }

    /// m potentials fold with exactly m-1 counted combinations, regardless
    /// of association order.
    #[test]
    fn pairwise_fold_counts_m_minus_one() {
        let (vt, a, b) = ab_table();
        let doms = [[a], [b]];
        let ps: Vec<Potential> = (0..5)
            .map(|i| {
                pot(
                    &vt,
                    &doms[i % 2],
                    &[0.4 + 0.01 * i as f64, 0.6 - 0.01 * i as f64],
                    SemiringKind::SumProduct,
                )
            })
            .collect();
        let refs: Vec<&Potential> = ps.iter().collect();
        let mut ops = OpCounter::new();
        combine_many_staged(&refs, &mut ops).unwrap();
        assert_eq!(ops.combinations, 4);

        // a right-leaning fold counts the same
        let mut ops2 = OpCounter::new();
        let mut acc = ps[4].clone();
        for p in ps[..4].iter().rev() {
            acc = p.combine(&acc, &mut ops2).unwrap();
        }
        assert_eq!(ops2.combinations, 4);
    }
}
