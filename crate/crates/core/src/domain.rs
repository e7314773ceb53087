//! Negotiation domains, offers and additive utility functions.
//!
//! Every issue is continuous and scaled to `[0, 1]`. A preference profile
//! assigns each issue a weight and a linear valuation that is either
//! increasing (`V(x) = x`) or decreasing (`V(x) = 1 - x`), so utility is
//! `sum_j w_j * V_j(x_j)` and iso-utility sets are hyperplanes clipped to the
//! unit box.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{in_unit, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub name: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct NegotiationDomain {
    issues: Vec<Issue>,
}

impl NegotiationDomain {
    pub fn new<I, N>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = N>,
        N: Into<String>,
    {
        let issues: Vec<Issue> = names
            .into_iter()
            .enumerate()
            .map(|(index, name)| Issue {
                name: name.into(),
                index,
            })
            .collect();
        if issues.is_empty() {
            return Err(Error::InvalidDomain(
                "a domain needs at least one issue".into(),
            ));
        }
        let mut seen = HashSet::new();
        for issue in &issues {
            if !seen.insert(issue.name.as_str()) {
                return Err(Error::InvalidDomain(format!(
                    "duplicate issue name `{}`",
                    issue.name
                )));
            }
        }
        Ok(Self { issues })
    }

    pub fn issues(&self) -> &[Issue] {
        &self.issues
    }

    pub fn issue_count(&self) -> usize {
        self.issues.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.issues.iter().position(|i| i.name == name)
    }
}

impl TryFrom<Vec<String>> for NegotiationDomain {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        Self::new(names)
    }
}

impl From<NegotiationDomain> for Vec<String> {
    fn from(domain: NegotiationDomain) -> Self {
        domain.issues.into_iter().map(|i| i.name).collect()
    }
}

/// Shape of a monotonic valuation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    /// Linear valuation of a scaled attribute value.
    pub fn value<S: Scalar>(self, x: S) -> S {
        match self {
            Direction::Increasing => x,
            Direction::Decreasing => S::one() - x,
        }
    }

    /// Inverse of [`Direction::value`]: the attribute value with valuation `v`.
    pub fn attribute_for<S: Scalar>(self, v: S) -> S {
        // the linear valuation is an involution
        self.value(v)
    }

    /// Attribute value with valuation 1.
    pub fn best<S: Scalar>(self) -> S {
        self.attribute_for(S::one())
    }

    /// Attribute value with valuation 0.
    pub fn worst<S: Scalar>(self) -> S {
        self.attribute_for(S::zero())
    }

    /// `+1` for increasing, `-1` for decreasing.
    pub fn sign<S: Scalar>(self) -> S {
        match self {
            Direction::Increasing => S::one(),
            Direction::Decreasing => -S::one(),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Increasing => Direction::Decreasing,
            Direction::Decreasing => Direction::Increasing,
        }
    }
}

/// A complete offer: one scaled value per issue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "Vec<S>",
    into = "Vec<S>",
    bound(serialize = "S: Scalar", deserialize = "S: Scalar")
)]
pub struct Offer<S = f64> {
    values: Vec<S>,
}

impl<S: Scalar> Offer<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if let Some((index, value)) = values.iter().enumerate().find(|(_, v)| !in_unit(**v)) {
            return Err(Error::ValueOutOfRange {
                index,
                value: value.as_f64(),
            });
        }
        Ok(Self { values })
    }

    /// Builds an offer after clamping every value into `[0, 1]`.
    pub(crate) fn clamped(values: Vec<S>) -> Self {
        let values = values
            .into_iter()
            .map(|v| v.max(S::zero()).min(S::one()))
            .collect();
        Self { values }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<S> {
        self.values.get(index).copied()
    }

    pub fn euclidean_distance(&self, other: &Offer<S>) -> S {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b) * (*a - *b))
            .sum::<S>()
            .sqrt()
    }
}

impl<S: Scalar> TryFrom<Vec<S>> for Offer<S> {
    type Error = Error;

    fn try_from(values: Vec<S>) -> Result<Self> {
        Self::new(values)
    }
}

impl<S> From<Offer<S>> for Vec<S> {
    fn from(offer: Offer<S>) -> Self {
        offer.values
    }
}

/// An offer under construction where some attributes may still be unset.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialOffer<S = f64> {
    values: Vec<Option<S>>,
}

impl<S: Scalar> PartialOffer<S> {
    pub fn empty(issue_count: usize) -> Self {
        Self {
            values: vec![None; issue_count],
        }
    }

    pub fn set(&mut self, index: usize, value: S) -> Result<()> {
        let count = self.values.len();
        let slot = self
            .values
            .get_mut(index)
            .ok_or(Error::IssueOutOfRange { index, count })?;
        if !in_unit(value) {
            return Err(Error::ValueOutOfRange {
                index,
                value: value.as_f64(),
            });
        }
        *slot = Some(value);
        Ok(())
    }

    pub fn get(&self, index: usize) -> Option<S> {
        self.values.get(index).copied().flatten()
    }

    pub fn is_set(&self, index: usize) -> bool {
        self.get(index).is_some()
    }

    pub fn set_mask(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_some).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Converts into a complete offer once every attribute is set.
    pub fn to_offer(&self) -> Option<Offer<S>> {
        self.values
            .iter()
            .copied()
            .collect::<Option<Vec<S>>>()
            .map(|values| Offer { values })
    }
}

impl<S: Scalar> From<&Offer<S>> for PartialOffer<S> {
    fn from(offer: &Offer<S>) -> Self {
        Self {
            values: offer.values.iter().copied().map(Some).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
struct RawProfile<S> {
    name: String,
    weights: Vec<S>,
    directions: Vec<Direction>,
    #[serde(default)]
    reservation_utility: S,
}

/// Additive preference profile of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawProfile<S>",
    into = "RawProfile<S>",
    bound(serialize = "S: Scalar", deserialize = "S: Scalar")
)]
pub struct PreferenceProfile<S = f64> {
    name: String,
    weights: Vec<S>,
    directions: Vec<Direction>,
    reservation_utility: S,
}

impl<S: Scalar> PreferenceProfile<S> {
    pub fn new(
        name: impl Into<String>,
        weights: Vec<S>,
        directions: Vec<Direction>,
        reservation_utility: S,
    ) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidProfile {
            name: name.clone(),
            reason,
        };
        if weights.is_empty() {
            return Err(invalid("no weights".into()));
        }
        if weights.len() != directions.len() {
            return Err(invalid(format!(
                "{} weights but {} directions",
                weights.len(),
                directions.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < S::zero()) {
            return Err(invalid("weights must be finite and non-negative".into()));
        }
        let total: S = weights.iter().copied().sum();
        if (total - S::one()).abs() > S::weight_tolerance() {
            return Err(invalid(format!("weights sum to {total}, expected 1")));
        }
        if !in_unit(reservation_utility) {
            return Err(invalid(format!(
                "reservation utility {reservation_utility} outside [0, 1]"
            )));
        }
        Ok(Self {
            name,
            weights,
            directions,
            reservation_utility,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn reservation_utility(&self) -> S {
        self.reservation_utility
    }

    pub fn with_reservation_utility(mut self, reservation_utility: S) -> Result<Self> {
        if !in_unit(reservation_utility) {
            return Err(Error::InvalidProfile {
                name: self.name,
                reason: format!("reservation utility {reservation_utility} outside [0, 1]"),
            });
        }
        self.reservation_utility = reservation_utility;
        Ok(self)
    }

    pub fn issue_count(&self) -> usize {
        self.weights.len()
    }

    pub fn valuation(&self, issue: usize, value: S) -> Result<S> {
        let direction = self.directions.get(issue).ok_or(Error::IssueOutOfRange {
            index: issue,
            count: self.issue_count(),
        })?;
        if !in_unit(value) {
            return Err(Error::ValueOutOfRange {
                index: issue,
                value: value.as_f64(),
            });
        }
        Ok(direction.value(value))
    }

    pub fn utility(&self, offer: &Offer<S>) -> Result<S> {
        if offer.len() != self.issue_count() {
            return Err(Error::DimensionMismatch {
                expected: self.issue_count(),
                actual: offer.len(),
            });
        }
        Ok(self.utility_unchecked(offer.values()))
    }

    /// Utility of a raw point assumed to have the right dimension.
    pub(crate) fn utility_unchecked(&self, values: &[S]) -> S {
        self.weights
            .iter()
            .zip(&self.directions)
            .zip(values)
            .map(|((w, d), x)| *w * d.value(*x))
            .sum()
    }

    /// Utility restricted to the attributes that are set.
    pub fn partial_utility(&self, partial: &PartialOffer<S>) -> S {
        self.weights
            .iter()
            .zip(&self.directions)
            .zip(&partial.values)
            .filter_map(|((w, d), x)| x.map(|x| *w * d.value(x)))
            .sum()
    }

    pub fn ideal_offer(&self) -> Offer<S> {
        Offer {
            values: self.directions.iter().map(|d| d.best()).collect(),
        }
    }

    pub fn anti_ideal_offer(&self) -> Offer<S> {
        Offer {
            values: self.directions.iter().map(|d| d.worst()).collect(),
        }
    }

    /// Gradient of the (affine) utility function.
    pub fn gradient(&self) -> Vec<S> {
        self.weights
            .iter()
            .zip(&self.directions)
            .map(|(w, d)| *w * d.sign())
            .collect()
    }
}

impl<S: Scalar> TryFrom<RawProfile<S>> for PreferenceProfile<S> {
    type Error = Error;

    fn try_from(raw: RawProfile<S>) -> Result<Self> {
        Self::new(
            raw.name,
            raw.weights,
            raw.directions,
            raw.reservation_utility,
        )
    }
}

impl<S: Scalar> From<PreferenceProfile<S>> for RawProfile<S> {
    fn from(p: PreferenceProfile<S>) -> Self {
        RawProfile {
            name: p.name,
            weights: p.weights,
            directions: p.directions,
            reservation_utility: p.reservation_utility,
        }
    }
}
