//! Utility functions over outcomes, expected utility, and the ordinal /
//! cardinal equivalence checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lottery::{Lottery, OutcomeId, OutcomeUniverse};
use crate::{Error, Result};

/// Tolerance for the affine-equivalence residual check.
pub const AFFINE_TOLERANCE: f64 = 1e-9;

/// A bounded mapping from outcomes to real utility values.
///
/// Values are finite; declared bounds satisfy `lo <= min value <= max value
/// <= hi`. When no bounds are declared they default to the value range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityFunction {
    values: BTreeMap<OutcomeId, f64>,
    bounds: (f64, f64),
}

impl UtilityFunction {
    pub fn new(values: BTreeMap<OutcomeId, f64>) -> Result<Self> {
        let (lo, hi) = value_range(&values)?;
        Ok(UtilityFunction {
            values,
            bounds: (lo, hi),
        })
    }

    /// Builds a utility function with explicitly declared bounds.
    pub fn with_bounds(values: BTreeMap<OutcomeId, f64>, lo: f64, hi: f64) -> Result<Self> {
        let (min, max) = value_range(&values)?;
        if !lo.is_finite() || !hi.is_finite() || lo > min || hi < max {
            return Err(Error::Validation(format!(
                "declared bounds [{lo}, {hi}] do not enclose value range [{min}, {max}]"
            )));
        }
        Ok(UtilityFunction {
            values,
            bounds: (lo, hi),
        })
    }

    /// Convenience constructor from `(id, value)` pairs.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<OutcomeId>,
    {
        let mut values = BTreeMap::new();
        for (id, v) in pairs {
            let id = id.into();
            if values.insert(id.clone(), v).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate outcome `{id}` in utility function"
                )));
            }
        }
        Self::new(values)
    }

    /// Utility of an outcome; errors if the outcome is not covered.
    pub fn value(&self, id: &OutcomeId) -> Result<f64> {
        self.values
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownOutcome(id.to_string()))
    }

    pub fn get(&self, id: &OutcomeId) -> Option<f64> {
        self.values.get(id).copied()
    }

    pub fn values(&self) -> &BTreeMap<OutcomeId, f64> {
        &self.values
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks that every outcome of the universe has a value.
    pub fn covers(&self, universe: &OutcomeUniverse) -> Result<()> {
        for id in universe.ids() {
            if !self.values.contains_key(id) {
                return Err(Error::UnknownOutcome(id.to_string()));
            }
        }
        Ok(())
    }

    /// Applies the positive affine transform `a·u + b`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a <= 0.0 {
            return Err(Error::Precondition(format!(
                "affine transform requires finite a > 0 and finite b, got a={a}, b={b}"
            )));
        }
        let values = self
            .values
            .iter()
            .map(|(id, v)| (id.clone(), a * v + b))
            .collect();
        UtilityFunction::new(values)
    }
}

fn value_range(values: &BTreeMap<OutcomeId, f64>) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Validation("utility function has no values".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (id, v) in values {
        if !v.is_finite() {
            return Err(Error::Validation(format!(
                "utility of `{id}` is not finite"
            )));
        }
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    Ok((lo, hi))
}

/// Expected utility of a lottery: `Σ p(s)·u(s)`.
pub fn expected_utility(lottery: &Lottery, utility: &UtilityFunction) -> Result<f64> {
    let mut total = 0.0;
    for (id, p) in lottery.support() {
        total += p * utility.value(id)?;
    }
    Ok(total)
}

/// True iff `u` and `v` induce the same preference ordering on the universe:
/// for every pair of outcomes, `sign(u(s)-u(t)) == sign(v(s)-v(t))`.
pub fn ordinally_equivalent(
    u: &UtilityFunction,
    v: &UtilityFunction,
    universe: &OutcomeUniverse,
) -> Result<bool> {
    u.covers(universe)?;
    v.covers(universe)?;
    let ids: Vec<&OutcomeId> = universe.ids().collect();
    for (i, s) in ids.iter().enumerate() {
        for t in &ids[i + 1..] {
            let du = u.value(s)? - u.value(t)?;
            let dv = v.value(s)? - v.value(t)?;
            if sign(du) != sign(dv) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Finds `(a, b)` with `a > 0` such that `v = a·u + b` holds within
/// [`AFFINE_TOLERANCE`] on the whole universe, or `None` if no positive
/// affine transform relates them. Two constant functions are related by
/// `(1, v - u)`.
pub fn affine_equivalent(
    u: &UtilityFunction,
    v: &UtilityFunction,
    universe: &OutcomeUniverse,
) -> Result<Option<(f64, f64)>> {
    u.covers(universe)?;
    v.covers(universe)?;
    if universe.is_empty() {
        return Err(Error::Validation("empty outcome universe".into()));
    }
    let ids: Vec<&OutcomeId> = universe.ids().collect();
    let first = ids[0];
    // Find an anchor pair with distinct u values to pin the slope.
    let anchor = ids[1..]
        .iter()
        .find(|id| u.get(id).unwrap() != u.get(first).unwrap());
    let (a, b) = match anchor {
        None => {
            // u is constant: only a constant v is affine-related.
            let v0 = v.value(first)?;
            if ids.iter().any(|id| v.get(id).unwrap() != v0) {
                return Ok(None);
            }
            (1.0, v0 - u.value(first)?)
        }
        Some(second) => {
            let du = u.value(second)? - u.value(first)?;
            let dv = v.value(second)? - v.value(first)?;
            let a = dv / du;
            if !a.is_finite() || a <= 0.0 {
                return Ok(None);
            }
            (a, v.value(first)? - a * u.value(first)?)
        }
    };
    for id in &ids {
        if (v.value(id)? - (a * u.value(id)? + b)).abs() > AFFINE_TOLERANCE {
            return Ok(None);
        }
    }
    Ok(Some((a, b)))
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn universe() -> OutcomeUniverse {
        OutcomeUniverse::from_ids(["a", "b", "c"]).unwrap()
    }

    fn utility(vals: &[(&str, f64)]) -> UtilityFunction {
        UtilityFunction::from_pairs(vals.iter().map(|(id, v)| (*id, *v))).unwrap()
    }

    #[test]
    fn expected_utility_two_point() {
        let l = Lottery::new(vec![("a".into(), 0.5), ("b".into(), 0.5)]).unwrap();
        let u = utility(&[("a", 1.2), ("b", 2.2)]);
        assert!((expected_utility(&l, &u).unwrap() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn expected_utility_point_mass() {
        let l = Lottery::point_mass("a");
        let u = utility(&[("a", 1.9)]);
        assert_eq!(expected_utility(&l, &u).unwrap(), 1.9);
    }

    #[test]
    fn expected_utility_uniform_ten() {
        let ids: Vec<String> = (1..=10).map(|i| format!("s{i}")).collect();
        let l = Lottery::uniform(ids.clone()).unwrap();
        let u = UtilityFunction::from_pairs(
            ids.iter()
                .enumerate()
                .map(|(i, id)| (id.clone(), (i + 1) as f64)),
        )
        .unwrap();
        // Brute-force sum: (1 + .. + 10) / 10 = 5.5.
        let brute: f64 = (1..=10).map(|i| i as f64 * 0.1).sum();
        let eu = expected_utility(&l, &u).unwrap();
        assert!((eu - 5.5).abs() < 1e-12);
        assert!((eu - brute).abs() < 1e-12);
    }

    #[test]
    fn expected_utility_missing_outcome() {
        let l = Lottery::point_mass("zzz");
        let u = utility(&[("a", 1.0)]);
        assert!(matches!(
            expected_utility(&l, &u),
            Err(Error::UnknownOutcome(_))
        ));
    }

    #[test]
    fn ordinal_equivalence_monotone_cube() {
        let u = utility(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        let v = utility(&[("a", 1.0), ("b", 8.0), ("c", 27.0)]);
        assert!(ordinally_equivalent(&u, &v, &universe()).unwrap());
    }

    #[test]
    fn ordinal_equivalence_negation_reverses() {
        let u = utility(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        let v = utility(&[("a", -1.0), ("b", -2.0), ("c", -3.0)]);
        assert!(!ordinally_equivalent(&u, &v, &universe()).unwrap());
    }

    #[test]
    fn ordinal_equivalence_affine() {
        let u = utility(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        let v = u.affine(2.0, 7.0).unwrap();
        assert!(ordinally_equivalent(&u, &v, &universe()).unwrap());
    }

    #[test]
    fn affine_equivalence_recovers_coefficients() {
        let u = utility(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        let v = u.affine(2.0, 7.0).unwrap();
        let (a, b) = affine_equivalent(&u, &v, &universe()).unwrap().unwrap();
        assert!((a - 2.0).abs() < 1e-12);
        assert!((b - 7.0).abs() < 1e-12);
    }

    #[test]
    fn affine_equivalence_rejects_square() {
        let u = utility(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        let v = utility(&[("a", 1.0), ("b", 4.0), ("c", 9.0)]);
        assert_eq!(affine_equivalent(&u, &v, &universe()).unwrap(), None);
    }

    #[test]
    fn affine_equivalence_identity() {
        let u = utility(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        let (a, b) = affine_equivalent(&u, &u, &universe()).unwrap().unwrap();
        assert_eq!((a, b), (1.0, 0.0));
    }

    #[test]
    fn affine_equivalence_constant_cases() {
        let u = utility(&[("a", 2.0), ("b", 2.0), ("c", 2.0)]);
        let v = utility(&[("a", 5.0), ("b", 5.0), ("c", 5.0)]);
        assert_eq!(
            affine_equivalent(&u, &v, &universe()).unwrap(),
            Some((1.0, 3.0))
        );
        let w = utility(&[("a", 5.0), ("b", 6.0), ("c", 5.0)]);
        assert_eq!(affine_equivalent(&u, &w, &universe()).unwrap(), None);
    }

    #[test]
    fn affine_equivalence_rejects_negative_slope() {
        let u = utility(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        let v = utility(&[("a", -1.0), ("b", -2.0), ("c", -3.0)]);
        assert_eq!(affine_equivalent(&u, &v, &universe()).unwrap(), None);
    }

    #[test]
    fn bounds_must_enclose_values() {
        let values: BTreeMap<OutcomeId, f64> =
            [("a".into(), 1.0), ("b".into(), 4.0)].into_iter().collect();
        assert!(UtilityFunction::with_bounds(values.clone(), 0.0, 5.0).is_ok());
        assert!(UtilityFunction::with_bounds(values.clone(), 2.0, 5.0).is_err());
        assert!(UtilityFunction::with_bounds(values, 0.0, 3.0).is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        assert!(UtilityFunction::from_pairs([("a", f64::NAN)]).is_err());
        assert!(UtilityFunction::from_pairs([("a", f64::NEG_INFINITY)]).is_err());
    }
}
