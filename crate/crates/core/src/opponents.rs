//! Bilateral agents used as opponents (and as the representative of an RE
//! team).
//!
//! Apart from the plain time tactic, every archetype is a behavioral proxy of
//! a known competition agent: small closed-form rules that keep the agent's
//! classification (competitor, matcher, conceder) and its distinctive traits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Offer, PreferenceProfile};
use crate::error::{Error, Result};
use crate::protocol::{Action, Party};
use crate::tactics::{project_to_iso, sample_iso_offer, IsoSamplerConfig, TimeTactic};

/// Running statistics over the utilities (to this agent) of received offers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpponentBeliefs {
    count: usize,
    mean: f64,
    m2: f64,
    first_utility: Option<f64>,
    best: Option<(Offer, f64)>,
    offer_sum: Vec<f64>,
}

impl OpponentBeliefs {
    pub fn observe(&mut self, offer: &Offer, utility: f64) {
        self.count += 1;
        let delta = utility - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (utility - self.mean);
        self.first_utility.get_or_insert(utility);
        if self.best.as_ref().is_none_or(|(_, u)| utility > *u) {
            self.best = Some((offer.clone(), utility));
        }
        if self.offer_sum.is_empty() {
            self.offer_sum = vec![0.0; offer.len()];
        }
        for (acc, x) in self.offer_sum.iter_mut().zip(offer.values()) {
            *acc += x;
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population standard deviation; 0 before two observations.
    pub fn std_dev(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / self.count as f64).sqrt()
        }
    }

    pub fn first_utility(&self) -> Option<f64> {
        self.first_utility
    }

    pub fn best_offer(&self) -> Option<&Offer> {
        self.best.as_ref().map(|(o, _)| o)
    }

    pub fn best_utility(&self) -> Option<f64> {
        self.best.as_ref().map(|(_, u)| *u)
    }

    /// Component-wise mean of all received offers.
    pub fn mean_offer(&self) -> Option<Offer> {
        (self.count > 0).then(|| {
            Offer::clamped(
                self.offer_sum
                    .iter()
                    .map(|s| s / self.count as f64)
                    .collect(),
            )
        })
    }
}

/// Per-agent state shared by every archetype.
#[derive(Debug, Clone)]
struct Observer {
    profile: PreferenceProfile,
    beliefs: OpponentBeliefs,
    last_received: Option<Offer>,
    /// The other party's offer that is waiting for our response.
    pending: Option<(Offer, f64)>,
}

impl Observer {
    fn new(profile: PreferenceProfile) -> Self {
        Self {
            profile,
            beliefs: OpponentBeliefs::default(),
            last_received: None,
            pending: None,
        }
    }

    fn receive(&mut self, offer: &Offer) {
        let u = self.utility(offer);
        self.beliefs.observe(offer, u);
        self.last_received = Some(offer.clone());
        self.pending = Some((offer.clone(), u));
    }

    fn utility(&self, offer: &Offer) -> f64 {
        self.profile.utility_unchecked(offer.values())
    }

    /// Utility of the offer we must answer, consuming it.
    fn take_pending(&mut self) -> Option<f64> {
        self.pending.take().map(|(_, u)| u)
    }

    fn references(&self) -> Vec<&Offer> {
        self.last_received.iter().collect()
    }
}

/// Accepts iff the offer meets the demand curve; otherwise proposes on its
/// iso-utility surface at the current demand, closest to the last offer
/// received.
#[derive(Debug, Clone)]
pub struct TimeTacticAgent {
    obs: Observer,
    tactic: TimeTactic,
    sampler: IsoSamplerConfig,
    rng: ChaCha8Rng,
}

impl TimeTacticAgent {
    pub fn new(
        profile: PreferenceProfile,
        tactic: TimeTactic,
        sampler: IsoSamplerConfig,
        seed: u64,
    ) -> Self {
        Self {
            obs: Observer::new(profile),
            tactic,
            sampler,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn demand(&self, t: f64) -> f64 {
        self.tactic.demand_unchecked(t)
    }
}

impl Party for TimeTacticAgent {
    fn profiles(&self) -> Vec<&PreferenceProfile> {
        vec![&self.obs.profile]
    }

    fn receive_offer(&mut self, offer: &Offer, _t: f64) {
        self.obs.receive(offer);
    }

    fn choose_action(&mut self, t: f64) -> Action {
        let target = self.demand(t);
        if let Some(u) = self.obs.take_pending() {
            if u >= target {
                return Action::Accept;
            }
        }
        let refs = self.obs.references();
        Action::Propose(sample_iso_offer(
            &self.obs.profile,
            target,
            &refs,
            &self.sampler,
            &mut self.rng,
        ))
    }
}

/// Take-it-or-leave-it competitor: random offers above a fixed threshold,
/// accepts only above the same threshold, ignores time.
#[derive(Debug, Clone)]
pub struct CrazyHaggler {
    obs: Observer,
    threshold: f64,
    rng: ChaCha8Rng,
}

impl CrazyHaggler {
    pub fn new(profile: PreferenceProfile, threshold: f64, seed: u64) -> Self {
        Self {
            obs: Observer::new(profile),
            threshold,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn random_offer(&mut self) -> Offer {
        let target = self.rng.gen_range(self.threshold..=1.0);
        let mut point: Vec<f64> = (0..self.obs.profile.issue_count())
            .map(|_| self.rng.gen())
            .collect();
        if project_to_iso(&self.obs.profile, &mut point, target) > 1e-9 {
            return self.obs.profile.ideal_offer();
        }
        let offer = Offer::clamped(point);
        if self.obs.utility(&offer) < self.threshold {
            return self.obs.profile.ideal_offer();
        }
        offer
    }
}

impl Party for CrazyHaggler {
    fn profiles(&self) -> Vec<&PreferenceProfile> {
        vec![&self.obs.profile]
    }

    fn receive_offer(&mut self, offer: &Offer, _t: f64) {
        self.obs.receive(offer);
    }

    fn choose_action(&mut self, _t: f64) -> Action {
        if let Some(u) = self.obs.take_pending() {
            if u >= self.threshold {
                return Action::Accept;
            }
        }
        Action::Propose(self.random_offer())
    }
}

/// Competitor whose threshold is `max(0.85 - 0.25 t, mu + 2 sigma)` over the
/// utilities it has been offered, capped at 1.
#[derive(Debug, Clone)]
pub struct HagglerAdaptive {
    obs: Observer,
    start: f64,
    slope: f64,
    sigma_multiplier: f64,
    sampler: IsoSamplerConfig,
    rng: ChaCha8Rng,
}

impl HagglerAdaptive {
    pub fn new(
        profile: PreferenceProfile,
        params: HagglerParams,
        sampler: IsoSamplerConfig,
        seed: u64,
    ) -> Self {
        Self {
            obs: Observer::new(profile),
            start: params.start,
            slope: params.slope,
            sigma_multiplier: params.sigma_multiplier,
            sampler,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn target(&self, t: f64) -> f64 {
        let b = &self.obs.beliefs;
        let learned = if b.count() == 0 {
            0.0
        } else {
            b.mean() + self.sigma_multiplier * b.std_dev()
        };
        (self.start - self.slope * t).max(learned).min(1.0)
    }

    pub fn beliefs(&self) -> &OpponentBeliefs {
        &self.obs.beliefs
    }
}

impl Party for HagglerAdaptive {
    fn profiles(&self) -> Vec<&PreferenceProfile> {
        vec![&self.obs.profile]
    }

    fn receive_offer(&mut self, offer: &Offer, _t: f64) {
        self.obs.receive(offer);
    }

    fn choose_action(&mut self, t: f64) -> Action {
        let target = self.target(t);
        if let Some(u) = self.obs.take_pending() {
            if u >= target {
                return Action::Accept;
            }
        }
        let refs = self.obs.references();
        Action::Propose(sample_iso_offer(
            &self.obs.profile,
            target,
            &refs,
            &self.sampler,
            &mut self.rng,
        ))
    }
}

/// Competitor that lowers its target towards an estimate of the best utility
/// the other side will offer, `clamp(mu + sigma)`, and sends back any received
/// offer that already meets the target.
#[derive(Debug, Clone)]
pub struct AgentKLike {
    obs: Observer,
    gamma: f64,
    sampler: IsoSamplerConfig,
    rng: ChaCha8Rng,
}

impl AgentKLike {
    pub fn new(
        profile: PreferenceProfile,
        gamma: f64,
        sampler: IsoSamplerConfig,
        seed: u64,
    ) -> Self {
        Self {
            obs: Observer::new(profile),
            gamma,
            sampler,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Estimated maximum utility the other side will concede.
    pub fn expected_max(&self) -> f64 {
        let b = &self.obs.beliefs;
        if b.count() == 0 {
            return 1.0;
        }
        (b.mean() + b.std_dev()).clamp(0.0, 1.0)
    }

    pub fn target(&self, t: f64) -> f64 {
        target_with_estimate(self.expected_max(), self.gamma, t)
    }

    pub fn beliefs(&self) -> &OpponentBeliefs {
        &self.obs.beliefs
    }
}

/// `max(e, 1 - (1 - e) t^gamma)`.
pub fn target_with_estimate(expected_max: f64, gamma: f64, t: f64) -> f64 {
    expected_max.max(1.0 - (1.0 - expected_max) * t.powf(gamma))
}

impl Party for AgentKLike {
    fn profiles(&self) -> Vec<&PreferenceProfile> {
        vec![&self.obs.profile]
    }

    fn receive_offer(&mut self, offer: &Offer, _t: f64) {
        self.obs.receive(offer);
    }

    fn choose_action(&mut self, t: f64) -> Action {
        let target = self.target(t);
        if let Some(u) = self.obs.take_pending() {
            if u >= target {
                return Action::Accept;
            }
        }
        if let (Some(best), Some(u)) = (
            self.obs.beliefs.best_offer(),
            self.obs.beliefs.best_utility(),
        ) {
            if u >= target {
                return Action::Propose(best.clone());
            }
        }
        let refs = self.obs.references();
        Action::Propose(sample_iso_offer(
            &self.obs.profile,
            target,
            &refs,
            &self.sampler,
            &mut self.rng,
        ))
    }
}

/// Conceder: linear concession from 1 towards `floor`, proposing near the
/// average offer received; from `final_phase` on it proposes the best offer
/// received and accepts anything at least as good.
#[derive(Debug, Clone)]
pub struct SmithLike {
    obs: Observer,
    final_phase: f64,
    floor: f64,
    sampler: IsoSamplerConfig,
    rng: ChaCha8Rng,
}

impl SmithLike {
    pub fn new(
        profile: PreferenceProfile,
        final_phase: f64,
        floor: f64,
        sampler: IsoSamplerConfig,
        seed: u64,
    ) -> Self {
        Self {
            obs: Observer::new(profile),
            final_phase,
            floor,
            sampler,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn target(&self, t: f64) -> f64 {
        1.0 - (1.0 - self.floor) * t
    }

    fn in_final_phase(&self, t: f64) -> bool {
        t >= self.final_phase && self.obs.beliefs.best_offer().is_some()
    }

    /// Minimum utility this agent accepts at `t`.
    pub fn acceptance_level(&self, t: f64) -> f64 {
        match self.obs.beliefs.best_utility() {
            Some(best) if self.in_final_phase(t) => best,
            _ => self.target(t),
        }
    }
}

impl Party for SmithLike {
    fn profiles(&self) -> Vec<&PreferenceProfile> {
        vec![&self.obs.profile]
    }

    fn receive_offer(&mut self, offer: &Offer, _t: f64) {
        self.obs.receive(offer);
    }

    fn choose_action(&mut self, t: f64) -> Action {
        let level = self.acceptance_level(t);
        if let Some(u) = self.obs.take_pending() {
            if u >= level {
                return Action::Accept;
            }
        }
        if self.in_final_phase(t) {
            let best = self
                .obs
                .beliefs
                .best_offer()
                .expect("final phase has a best offer");
            return Action::Propose(best.clone());
        }
        let mean = self.obs.beliefs.mean_offer();
        let refs: Vec<&Offer> = mean.iter().collect();
        Action::Propose(sample_iso_offer(
            &self.obs.profile,
            self.target(t),
            &refs,
            &self.sampler,
            &mut self.rng,
        ))
    }
}

/// Matcher: concedes in proportion to the relative concession observed from
/// the other side, down to `nash_floor`; near the deadline accepts any offer at
/// least as good as the best received.
#[derive(Debug, Clone)]
pub struct NiceTftLike {
    obs: Observer,
    nash_floor: f64,
    end_game: f64,
    sampler: IsoSamplerConfig,
    rng: ChaCha8Rng,
}

const RECIPROCITY_EPSILON: f64 = 1e-9;

impl NiceTftLike {
    pub fn new(
        profile: PreferenceProfile,
        nash_floor: f64,
        end_game: f64,
        sampler: IsoSamplerConfig,
        seed: u64,
    ) -> Self {
        Self {
            obs: Observer::new(profile),
            nash_floor,
            end_game,
            sampler,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Observed relative concession of the other side, in `[0, 1]`.
    pub fn relative_concession(&self) -> f64 {
        let b = &self.obs.beliefs;
        match (b.first_utility(), b.best_utility()) {
            (Some(first), Some(best)) => {
                ((best - first) / (1.0 - first).max(RECIPROCITY_EPSILON)).clamp(0.0, 1.0)
            }
            _ => 0.0,
        }
    }

    pub fn target(&self) -> f64 {
        1.0 - self.relative_concession() * (1.0 - self.nash_floor)
    }
}

impl Party for NiceTftLike {
    fn profiles(&self) -> Vec<&PreferenceProfile> {
        vec![&self.obs.profile]
    }

    fn receive_offer(&mut self, offer: &Offer, _t: f64) {
        self.obs.receive(offer);
    }

    fn choose_action(&mut self, t: f64) -> Action {
        let target = self.target();
        if let Some(u) = self.obs.take_pending() {
            let end_game = t >= self.end_game
                && self
                    .obs
                    .beliefs
                    .best_utility()
                    .is_some_and(|best| u >= best);
            if u >= target || end_game {
                return Action::Accept;
            }
        }
        let refs = self.obs.references();
        Action::Propose(sample_iso_offer(
            &self.obs.profile,
            target,
            &refs,
            &self.sampler,
            &mut self.rng,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HagglerParams {
    pub start: f64,
    pub slope: f64,
    pub sigma_multiplier: f64,
}

impl Default for HagglerParams {
    fn default() -> Self {
        Self {
            start: 0.85,
            slope: 0.25,
            sigma_multiplier: 2.0,
        }
    }
}

fn default_threshold() -> f64 {
    0.9
}
fn default_gamma() -> f64 {
    3.0
}
fn default_final_phase() -> f64 {
    2.0 / 3.0
}
fn default_floor() -> f64 {
    0.5
}
fn default_end_game() -> f64 {
    0.95
}
fn default_beta() -> f64 {
    1.0
}

/// Which opponent to build, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "archetype", rename_all = "snake_case")]
pub enum Archetype {
    TimeTactic {
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default)]
        reservation_utility: f64,
    },
    CrazyHaggler {
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    HagglerAdaptive {
        #[serde(default, flatten)]
        params: HagglerParams,
    },
    AgentKLike {
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    SmithLike {
        #[serde(default = "default_final_phase")]
        final_phase: f64,
        #[serde(default = "default_floor")]
        floor: f64,
    },
    NiceTftLike {
        #[serde(default = "default_floor")]
        nash_floor: f64,
        #[serde(default = "default_end_game")]
        end_game: f64,
    },
}

/// Behavioral family of an archetype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Competitive,
    Matcher,
    Conceder,
}

impl Archetype {
    pub fn name(&self) -> &'static str {
        match self {
            Archetype::TimeTactic { .. } => "time_tactic",
            Archetype::CrazyHaggler { .. } => "crazy_haggler",
            Archetype::HagglerAdaptive { .. } => "haggler_adaptive",
            Archetype::AgentKLike { .. } => "agent_k_like",
            Archetype::SmithLike { .. } => "smith_like",
            Archetype::NiceTftLike { .. } => "nice_tft_like",
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Archetype::TimeTactic { beta, .. } if *beta > 1.0 => Family::Conceder,
            Archetype::TimeTactic { .. }
            | Archetype::CrazyHaggler { .. }
            | Archetype::HagglerAdaptive { .. }
            | Archetype::AgentKLike { .. } => Family::Competitive,
            Archetype::NiceTftLike { .. } => Family::Matcher,
            Archetype::SmithLike { .. } => Family::Conceder,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("{}: {what}", self.name())));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        match *self {
            Archetype::TimeTactic {
                beta,
                reservation_utility,
            } => TimeTactic::new(reservation_utility, beta).map(|_| ()),
            Archetype::CrazyHaggler { threshold } if !unit(threshold) => {
                bad("threshold outside [0, 1]")
            }
            Archetype::HagglerAdaptive { params }
                if !unit(params.start) || params.slope < 0.0 || params.sigma_multiplier < 0.0 =>
            {
                bad("start outside [0, 1] or negative slope/sigma multiplier")
            }
            Archetype::AgentKLike { gamma } if gamma.is_nan() || gamma <= 0.0 => {
                bad("gamma must be positive")
            }
            Archetype::SmithLike { final_phase, floor } if !unit(final_phase) || !unit(floor) => {
                bad("final_phase and floor must lie in [0, 1]")
            }
            Archetype::NiceTftLike {
                nash_floor,
                end_game,
            } if !unit(nash_floor) || !unit(end_game) => {
                bad("nash_floor and end_game must lie in [0, 1]")
            }
            _ => Ok(()),
        }
    }

    /// Builds a seeded agent for `profile`.
    pub fn build(
        &self,
        profile: PreferenceProfile,
        sampler: IsoSamplerConfig,
        seed: u64,
    ) -> Result<Box<dyn Party>> {
        self.validate()?;
        Ok(match *self {
            Archetype::TimeTactic {
                beta,
                reservation_utility,
            } => Box::new(TimeTacticAgent::new(
                profile,
                TimeTactic::new(reservation_utility, beta)?,
                sampler,
                seed,
            )),
            Archetype::CrazyHaggler { threshold } => {
                Box::new(CrazyHaggler::new(profile, threshold, seed))
            }
            Archetype::HagglerAdaptive { params } => {
                Box::new(HagglerAdaptive::new(profile, params, sampler, seed))
            }
            Archetype::AgentKLike { gamma } => {
                Box::new(AgentKLike::new(profile, gamma, sampler, seed))
            }
            Archetype::SmithLike { final_phase, floor } => {
                Box::new(SmithLike::new(profile, final_phase, floor, sampler, seed))
            }
            Archetype::NiceTftLike {
                nash_floor,
                end_game,
            } => Box::new(NiceTftLike::new(
                profile, nash_floor, end_game, sampler, seed,
            )),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::hotel_booking_scenario;

    fn opp() -> PreferenceProfile {
        hotel_booking_scenario::<f64>().opponent
    }

    fn offer(v: [f64; 4]) -> Offer {
        Offer::new(v.to_vec()).unwrap()
    }

    fn proposal(a: Action) -> Offer {
        match a {
            Action::Propose(o) => o,
            other => panic!("expected a proposal, got {other:?}"),
        }
    }

    #[test]
    fn beliefs_track_mean_std_best_first() {
        let p = opp();
        let mut b = OpponentBeliefs::default();
        let offers = [
            offer([0.2; 4]),
            offer([1.0, 1.0, 0.0, 0.0]),
            offer([0.5; 4]),
        ];
        let us: Vec<f64> = offers.iter().map(|o| p.utility(o).unwrap()).collect();
        for (o, u) in offers.iter().zip(&us) {
            b.observe(o, *u);
        }
        let mean = us.iter().sum::<f64>() / 3.0;
        let var = us.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / 3.0;
        assert!((b.mean() - mean).abs() < 1e-12);
        assert!((b.std_dev() - var.sqrt()).abs() < 1e-12);
        assert_eq!(b.first_utility(), Some(us[0]));
        assert_eq!(b.best_offer(), Some(&offers[1]));
        let m = b.mean_offer().unwrap();
        assert!((m.values()[0] - (0.2 + 1.0 + 0.5) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn time_tactic_agent_rules() {
        let cfg = IsoSamplerConfig::default();
        let mut a = TimeTacticAgent::new(opp(), TimeTactic::new(0.0, 1.0).unwrap(), cfg, 1);
        assert_eq!(proposal(a.choose_action(0.0)), opp().ideal_offer());
        a.receive_offer(&opp().anti_ideal_offer(), 1.0);
        assert_eq!(a.choose_action(1.0), Action::Accept);

        let boulware = TimeTactic::new(0.0, 0.3).unwrap();
        let conceder = TimeTactic::new(0.0, 3.0).unwrap();
        for i in 1..100 {
            let t = i as f64 / 100.0;
            assert!(boulware.demand(t).unwrap() >= conceder.demand(t).unwrap());
        }
    }

    #[test]
    fn crazy_haggler_threshold() {
        let p = opp();
        let mut c = CrazyHaggler::new(p.clone(), 0.9, 9);
        for i in 0..1000 {
            let o = proposal(c.choose_action(i as f64 / 1000.0));
            assert!(p.utility(&o).unwrap() >= 0.9);
        }
        // worth 0.95 and 0.89 to the hotel
        let good = offer([1.0, 1.0, 0.2, 0.0]);
        let bad = offer([1.0, 1.0, 0.44, 0.0]);
        assert!((p.utility(&good).unwrap() - 0.95).abs() < 1e-12);
        assert!((p.utility(&bad).unwrap() - 0.89).abs() < 1e-12);
        c.receive_offer(&good, 0.99);
        assert_eq!(c.choose_action(0.99), Action::Accept);
        c.receive_offer(&bad, 0.99);
        assert!(matches!(c.choose_action(0.99), Action::Propose(_)));
    }

    #[test]
    fn crazy_haggler_ignores_time() {
        let mut early = CrazyHaggler::new(opp(), 0.9, 4);
        let mut late = CrazyHaggler::new(opp(), 0.9, 4);
        for _ in 0..50 {
            assert_eq!(early.choose_action(0.1), late.choose_action(0.9));
        }
    }

    #[test]
    fn agent_k_opens_with_ideal_and_sends_back_best() {
        let p = opp();
        let mut k = AgentKLike::new(p.clone(), 3.0, IsoSamplerConfig::default(), 2);
        assert_eq!(k.target(0.0), 1.0);
        assert_eq!(proposal(k.choose_action(0.0)), p.ideal_offer());

        // a received offer worth 0.8 while the target has fallen to 0.75
        let best = offer([1.0, 1.0, 0.8, 0.0]);
        assert!((p.utility(&best).unwrap() - 0.8).abs() < 1e-12);
        let worse = offer([0.0, 0.0, 1.0, 1.0]);
        k.receive_offer(&best, 0.1);
        k.receive_offer(&worse, 0.2);
        // mu = 0.4, sigma = 0.4 => e = 0.8, target(t) = 0.8 for all t
        assert!((k.expected_max() - 0.8).abs() < 1e-12);
        k.receive_offer(&worse, 0.3);
        // e = 0.2667 + 0.377 = 0.644; pick t with target 0.75
        let e = k.expected_max();
        let t = ((1.0 - 0.75) / (1.0 - e)).powf(1.0 / 3.0);
        assert!((k.target(t) - 0.75).abs() < 1e-9);
        assert_eq!(proposal(k.choose_action(t)), best);
    }

    #[test]
    fn agent_k_target_monotone_with_frozen_beliefs() {
        for e in [0.0, 0.3, 0.7, 1.0] {
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let v = target_with_estimate(e, 3.0, i as f64 / 100.0);
                assert!(v <= prev);
                assert!(v >= e);
                prev = v;
            }
        }
    }

    #[test]
    fn smith_final_phase_rules() {
        let p = opp();
        let mut s = SmithLike::new(p.clone(), 2.0 / 3.0, 0.5, IsoSamplerConfig::default(), 3);
        let mut prev = f64::INFINITY;
        for i in 0..66 {
            let v = s.target(i as f64 / 100.0);
            assert!(v < prev);
            prev = v;
        }
        let best = offer([0.4, 0.4, 0.6, 0.6]);
        let bu = p.utility(&best).unwrap();
        assert!((bu - 0.4).abs() < 1e-12);
        s.receive_offer(&best, 0.5);
        let _ = s.choose_action(0.5);
        s.receive_offer(&offer([0.0, 0.0, 1.0, 1.0]), 0.6);
        let _ = s.choose_action(0.6);
        assert_eq!(s.acceptance_level(0.7), bu);
        assert_eq!(proposal(s.choose_action(0.7)), best);
        s.receive_offer(&offer([0.4, 0.4, 0.6, 0.6]), 0.71);
        assert_eq!(s.choose_action(0.71), Action::Accept);
    }

    #[test]
    fn tft_reciprocation() {
        let p = opp();
        let mut tft = NiceTftLike::new(p.clone(), 0.5, 0.95, IsoSamplerConfig::default(), 5);
        let stubborn = p.anti_ideal_offer();
        for i in 0..94 {
            tft.receive_offer(&stubborn, i as f64 / 100.0);
            assert_eq!(tft.target(), 1.0);
            assert!(matches!(
                tft.choose_action(i as f64 / 100.0),
                Action::Propose(_)
            ));
        }
        // end game: accepts an offer no worse than the best received
        tft.receive_offer(&stubborn, 0.96);
        assert_eq!(tft.choose_action(0.96), Action::Accept);

        let mut tft = NiceTftLike::new(p.clone(), 0.5, 0.95, IsoSamplerConfig::default(), 5);
        tft.receive_offer(&stubborn, 0.1);
        tft.receive_offer(&p.ideal_offer(), 0.2);
        assert!((tft.relative_concession() - 1.0).abs() < 1e-12);
        assert!((tft.target() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tft_targets_follow_monotone_concessions() {
        let p = opp();
        let mut tft = NiceTftLike::new(p.clone(), 0.5, 0.95, IsoSamplerConfig::default(), 5);
        let mut prev = f64::INFINITY;
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            // moving from the hotel's worst towards its ideal
            tft.receive_offer(&offer([x, x, 1.0 - x, 1.0 - x]), x);
            assert!(tft.target() <= prev);
            prev = tft.target();
            let _ = tft.choose_action(x.min(0.9));
        }
    }

    #[test]
    fn haggler_targets() {
        let p = opp();
        let mut h = HagglerAdaptive::new(
            p.clone(),
            HagglerParams::default(),
            IsoSamplerConfig::default(),
            8,
        );
        assert_eq!(h.target(0.0), 0.85);
        assert!((h.target(1.0) - 0.6).abs() < 1e-12);
        h.receive_offer(&offer([0.9, 0.9, 0.1, 0.1]), 0.1);
        h.receive_offer(&offer([0.5; 4]), 0.2);
        let b = h.beliefs();
        let floor = b.mean() + 2.0 * b.std_dev();
        assert!(h.target(0.99) >= floor.min(1.0));
        assert!(h.target(0.99) <= 1.0);
    }

    #[test]
    fn archetype_config_parsing() {
        let a: Archetype = serde_json::from_str(r#"{"archetype":"crazy_haggler"}"#).unwrap();
        assert_eq!(a, Archetype::CrazyHaggler { threshold: 0.9 });
        let a: Archetype =
            serde_json::from_str(r#"{"archetype":"haggler_adaptive","slope":0.2}"#).unwrap();
        assert_eq!(
            a,
            Archetype::HagglerAdaptive {
                params: HagglerParams {
                    slope: 0.2,
                    ..Default::default()
                }
            }
        );
        let a: Archetype =
            serde_json::from_str(r#"{"archetype":"smith_like","final_phase":0.5}"#).unwrap();
        assert_eq!(a.family(), Family::Conceder);
        let bad = Archetype::AgentKLike { gamma: -1.0 };
        assert!(bad.build(opp(), IsoSamplerConfig::default(), 0).is_err());
    }
}
