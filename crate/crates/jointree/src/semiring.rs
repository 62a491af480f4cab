//! The two value semirings potentials can carry.
//!
//! `SumProduct` multiplies on combination and sums on marginalization
//! (probability tables); `MinSum` adds on combination and minimizes on
//! marginalization (additive costs). Both work over finite f64 values;
//! sum-product additionally requires non-negative cells.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SemiringKind {
    #[serde(rename = "sum-product")]
    SumProduct,
    #[serde(rename = "min-sum")]
    MinSum,
}

impl SemiringKind {
    /// Cell-level combination: `*` for sum-product, `+` for min-sum.
    #[inline]
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            SemiringKind::SumProduct => a * b,
            SemiringKind::MinSum => a + b,
        }
    }

    /// Cell-level marginalization fold: `+` for sum-product, `min` for
    /// min-sum.
    #[inline]
    pub fn fold(self, a: f64, b: f64) -> f64 {
        match self {
            SemiringKind::SumProduct => a + b,
            SemiringKind::MinSum => a.min(b),
        }
    }

    /// Identity for [`Self::combine`]: 1 for sum-product, 0 for min-sum.
    #[inline]
    pub fn combine_identity(self) -> f64 {
        match self {
            SemiringKind::SumProduct => 1.0,
            SemiringKind::MinSum => 0.0,
        }
    }

    /// Internal accumulator seed for [`Self::fold`]. Never appears in a
    /// finished table: every target cell folds in at least one source cell.
    #[inline]
    pub(crate) fn fold_seed(self) -> f64 {
        match self {
            SemiringKind::SumProduct => 0.0,
            SemiringKind::MinSum => f64::INFINITY,
        }
    }

    /// Whether `v` is a legal stored cell value.
    pub fn value_ok(self, v: f64) -> bool {
        match self {
            SemiringKind::SumProduct => v.is_finite() && v >= 0.0,
            SemiringKind::MinSum => v.is_finite(),
        }
    }
}

impl fmt::Display for SemiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemiringKind::SumProduct => "sum-product",
            SemiringKind::MinSum => "min-sum",
        })
    }
}

impl FromStr for SemiringKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "sum-product" => Ok(SemiringKind::SumProduct),
            "min-sum" => Ok(SemiringKind::MinSum),
            other => Err(Error::BadNetwork(format!(
                "unknown semiring `{other}` (expected sum-product or min-sum)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_are_neutral() {
        for kind in [SemiringKind::SumProduct, SemiringKind::MinSum] {
            let e = kind.combine_identity();
            for v in [0.0, 0.5, 3.25, -2.0] {
                assert_eq!(kind.combine(v, e), v);
                assert_eq!(kind.combine(e, v), v);
            }
        }
    }

    #[test]
    fn value_checks_split_by_kind() {
        assert!(SemiringKind::SumProduct.value_ok(0.0));
        assert!(!SemiringKind::SumProduct.value_ok(-1.0));
        assert!(!SemiringKind::SumProduct.value_ok(f64::INFINITY));
        assert!(SemiringKind::MinSum.value_ok(-1.0));
        assert!(!SemiringKind::MinSum.value_ok(f64::NAN));
        assert!(!SemiringKind::MinSum.value_ok(f64::NEG_INFINITY));
    }

    #[test]
    fn names_round_trip() {
        for kind in [SemiringKind::SumProduct, SemiringKind::MinSum] {
            assert_eq!(kind.to_string().parse::<SemiringKind>().unwrap(), kind);
        }
        assert!("max-product".parse::<SemiringKind>().is_err());
    }
}
