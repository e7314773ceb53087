//! Time-dependent concession and iso-utility offer generation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Offer, PreferenceProfile};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Time-dependent demand curve `s(t) = 1 - (1 - RU) * t^(1/beta)` on
/// normalized time with the deadline at `t = 1`.
///
/// `beta < 1` is Boulware (concedes late), `beta = 1` linear and `beta > 1`
/// Conceder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct TimeTactic<S = f64> {
    reservation_utility: S,
    beta: S,
}

impl<S: Scalar> TimeTactic<S> {
    pub fn new(reservation_utility: S, beta: S) -> Result<Self> {
        if !(reservation_utility >= S::zero() && reservation_utility < S::one()) {
            return Err(Error::InvalidTactic(format!(
                "reservation utility {reservation_utility} outside [0, 1)"
            )));
        }
        if !(beta > S::zero() && beta.is_finite()) {
            return Err(Error::InvalidTactic(format!(
                "beta {beta} must be positive"
            )));
        }
        Ok(Self {
            reservation_utility,
            beta,
        })
    }

    pub fn reservation_utility(&self) -> S {
        self.reservation_utility
    }

    pub fn beta(&self) -> S {
        self.beta
    }

    pub fn demand(&self, t: S) -> Result<S> {
        if !(t >= S::zero() && t <= S::one()) {
            return Err(Error::TimeOutOfRange(t.as_f64()));
        }
        Ok(self.demand_unchecked(t))
    }

    /// Demand for `t` already known to be in `[0, 1]`.
    pub fn demand_unchecked(&self, t: S) -> S {
        if t == S::zero() {
            return S::one();
        }
        if t == S::one() {
            return self.reservation_utility;
        }
        S::one() - (S::one() - self.reservation_utility) * t.powf(self.beta.recip())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsoSamplerConfig {
    pub candidate_count: usize,
    pub utility_tolerance: f64,
}

impl Default for IsoSamplerConfig {
    fn default() -> Self {
        Self {
            candidate_count: 500,
            utility_tolerance: 1e-6,
        }
    }
}

impl IsoSamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.candidate_count == 0 {
            return Err(Error::Config("candidate_count must be at least 1".into()));
        }
        if self.utility_tolerance.is_nan() || self.utility_tolerance <= 0.0 {
            return Err(Error::Config("utility_tolerance must be positive".into()));
        }
        Ok(())
    }
}

const PROJECTION_ITERATIONS: usize = 10;

/// Moves `point` onto the iso-utility hyperplane `u = target` along the
/// utility gradient, clipping to the unit box.
///
/// Coordinates pinned at a bound in the direction of travel are frozen and the
/// residual is redistributed over the remaining ones, for at most ten passes.
/// Returns the final residual `|u - target|`.
pub fn project_to_iso<S: Scalar>(profile: &PreferenceProfile<S>, point: &mut [S], target: S) -> S {
    project_along(profile, &profile.gradient(), point, target)
}

fn project_along<S: Scalar>(
    profile: &PreferenceProfile<S>,
    gradient: &[S],
    point: &mut [S],
    target: S,
) -> S {
    // utility is linear, so it is tracked incrementally and recomputed once
    let mut utility = profile.utility_unchecked(point);
    for _ in 0..PROJECTION_ITERATIONS {
        let residual = target - utility;
        if residual == S::zero() {
            break;
        }
        let up = residual > S::zero();
        // moving along +g raises utility; along -g lowers it
        let free = |g: S, x: S| {
            g != S::zero()
                && if (g > S::zero()) == up {
                    x < S::one()
                } else {
                    x > S::zero()
                }
        };
        let norm: S = gradient
            .iter()
            .zip(point.iter())
            .filter(|(g, x)| free(**g, **x))
            .map(|(g, _)| *g * *g)
            .sum();
        if norm == S::zero() {
            break;
        }
        let step = residual / norm;
        let mut clipped = false;
        for (g, x) in gradient.iter().zip(point.iter_mut()) {
            if free(*g, *x) {
                let moved = *x + step * *g;
                clipped |= moved < S::zero() || moved > S::one();
                let moved = moved.max(S::zero()).min(S::one());
                utility = utility + *g * (moved - *x);
                *x = moved;
            }
        }
        // an unclipped step lands on the plane; what is left is rounding
        if !clipped {
            break;
        }
    }
    (target - profile.utility_unchecked(point)).abs()
}

/// Index of the candidate minimizing the summed Euclidean distance to the
/// references. Lowest index wins ties.
pub fn closest_to_references<S: Scalar>(
    candidates: &[Offer<S>],
    references: &[&Offer<S>],
) -> Option<usize> {
    let cost = |c: &Offer<S>| -> S { references.iter().map(|r| c.euclidean_distance(r)).sum() };
    let mut best: Option<(usize, S)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let d = cost(c);
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Draws an offer on the profile's iso-utility surface at `target`.
///
/// Random points in the unit box are projected onto the surface; those that
/// stay off by more than the tolerance are dropped. Among the rest, the one
/// closest (summed Euclidean distance) to `references` is returned, or with no
/// references the one with the largest utility margin over the target.
pub fn sample_iso_offer<S: Scalar, R: Rng + ?Sized>(
    profile: &PreferenceProfile<S>,
    target: S,
    references: &[&Offer<S>],
    cfg: &IsoSamplerConfig,
    rng: &mut R,
) -> Offer<S> {
    let target = target.max(S::zero());
    if target >= S::one() {
        return profile.ideal_offer();
    }
    let tolerance = S::of(cfg.utility_tolerance);
    let gradient = profile.gradient();
    let mut point = vec![S::zero(); profile.issue_count()];
    // lower score is better; strict comparison keeps the lowest index on ties
    let mut best: Option<(S, Vec<S>)> = None;
    for _ in 0..cfg.candidate_count {
        for x in point.iter_mut() {
            *x = S::of(rng.gen::<f64>());
        }
        if project_along(profile, &gradient, &mut point, target) > tolerance {
            continue;
        }
        let score = if references.is_empty() {
            target - profile.utility_unchecked(&point)
        } else {
            references
                .iter()
                .map(|r| distance(&point, r.values()))
                .sum()
        };
        match &mut best {
            Some((b, kept)) if score < *b => {
                *b = score;
                kept.copy_from_slice(&point);
            }
            None => best = Some((score, point.clone())),
            _ => {}
        }
    }
    match best {
        Some((_, values)) => Offer::clamped(values),
        None => profile.ideal_offer(),
    }
}

fn distance<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y) * (*x - *y))
        .sum::<S>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Direction;
    use crate::scenario::hotel_booking_scenario;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn closed_form(ru: f64, beta: f64, t: f64) -> f64 {
        1.0 - (1.0 - ru) * t.powf(1.0 / beta)
    }

    #[test]
    fn demand_examples() {
        let linear = TimeTactic::new(0.0, 1.0).unwrap();
        assert_eq!(linear.demand(0.5).unwrap(), 0.5);
        let t = TimeTactic::<f64>::new(0.2, 0.5).unwrap();
        assert_eq!(t.demand(0.0).unwrap(), 1.0);
        assert_eq!(t.demand(1.0).unwrap(), 0.2);
        assert!((t.demand(0.25).unwrap() - 0.95).abs() < 1e-15);
        assert!(matches!(t.demand(1.01), Err(Error::TimeOutOfRange(_))));
        assert!(t.demand(-0.1).is_err());
    }

    #[test]
    fn tactic_validation() {
        assert!(TimeTactic::new(1.0, 1.0).is_err());
        assert!(TimeTactic::new(-0.1, 1.0).is_err());
        assert!(TimeTactic::new(0.0, 0.0).is_err());
        assert!(TimeTactic::new(0.0, f64::INFINITY).is_err());
        assert!(TimeTactic::<f32>::new(0.5, 0.2).is_ok());
    }

    #[test]
    fn sampler_at_one_returns_ideal() {
        let s = hotel_booking_scenario::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let opp_ideal = s.opponent.ideal_offer();
        let o = sample_iso_offer(
            &s.team[0],
            1.0,
            &[&opp_ideal],
            &IsoSamplerConfig::default(),
            &mut rng,
        );
        assert_eq!(o, s.team[0].ideal_offer());
    }

    #[test]
    fn sampler_hits_target() {
        let s = hotel_booking_scenario::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let opp_ideal = s.opponent.ideal_offer();
        let o = sample_iso_offer(
            &s.team[0],
            0.6,
            &[&opp_ideal],
            &IsoSamplerConfig::default(),
            &mut rng,
        );
        assert!((s.team[0].utility(&o).unwrap() - 0.6).abs() <= 1e-6);
    }

    #[test]
    fn closer_candidate_wins() {
        let p = PreferenceProfile::new(
            "p",
            vec![0.5, 0.5],
            vec![Direction::Increasing, Direction::Increasing],
            0.0,
        )
        .unwrap();
        // both on the u = 0.5 line
        let a = Offer::new(vec![0.9, 0.1]).unwrap();
        let b = Offer::new(vec![0.4, 0.6]).unwrap();
        assert_eq!(p.utility(&a).unwrap(), p.utility(&b).unwrap());
        let reference = Offer::new(vec![0.2, 0.8]).unwrap();
        let candidates = vec![a.clone(), b.clone()];
        assert_eq!(closest_to_references(&candidates, &[&reference]), Some(1));
        let far = Offer::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(closest_to_references(&candidates, &[&far]), Some(0));
        // equal distance: lowest index
        let centre = Offer::new(vec![0.65, 0.35]).unwrap();
        assert_eq!(closest_to_references(&candidates, &[&centre]), Some(0));
        assert_eq!(closest_to_references::<f64>(&[], &[&centre]), None);
    }

    #[test]
    fn sampler_is_deterministic() {
        let s = hotel_booking_scenario::<f64>();
        let r = s.opponent.ideal_offer();
        let cfg = IsoSamplerConfig::default();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample_iso_offer(&s.team[1], 0.42, &[&r], &cfg, &mut rng)
        };
        assert_eq!(draw(3), draw(3));
    }

    #[test]
    fn sampler_without_references_prefers_margin() {
        let s = hotel_booking_scenario::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let o = sample_iso_offer(&s.team[2], 0.3, &[], &IsoSamplerConfig::default(), &mut rng);
        let u = s.team[2].utility(&o).unwrap();
        assert!((u - 0.3).abs() <= 1e-6);
    }

    #[test]
    fn sampler_f32() {
        let s = hotel_booking_scenario::<f32>();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = IsoSamplerConfig {
            utility_tolerance: 1e-5,
            ..Default::default()
        };
        let o = sample_iso_offer(&s.team[0], 0.7f32, &[], &cfg, &mut rng);
        assert!((s.team[0].utility(&o).unwrap() - 0.7).abs() <= 1e-5);
    }

    proptest! {
        #[test]
        fn demand_matches_closed_form_and_is_monotone(
            ru in 0.0f64..0.999, beta in 0.01f64..10.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0,
        ) {
            let tactic = TimeTactic::new(ru, beta).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(tactic.demand(lo).unwrap() >= tactic.demand(hi).unwrap());
            prop_assert!((tactic.demand(a).unwrap() - closed_form(ru, beta, a)).abs() < 1e-12);
        }

        #[test]
        fn boulware_above_linear_conceder_below(
            ru in 0.0f64..0.99, boulware in 0.01f64..0.99, conceder in 1.01f64..20.0, t in 0.001f64..0.999,
        ) {
            let linear = TimeTactic::new(ru, 1.0).unwrap().demand(t).unwrap();
            prop_assert!(TimeTactic::new(ru, boulware).unwrap().demand(t).unwrap() > linear);
            prop_assert!(TimeTactic::new(ru, conceder).unwrap().demand(t).unwrap() < linear);
        }
    }
}
