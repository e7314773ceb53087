//! Alternating-offers protocol between a team and a single opponent.
//!
//! Time is measured in rounds. The initiator opens alone in round 0; in every
//! later round `r = 1..=max_rounds` the responder acts first and the initiator
//! second, both at normalized time `t = r / max_rounds`. A session therefore
//! holds at most `2 * max_rounds + 1` actions. Running out of rounds is a
//! failure and pays every agent 0.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{Offer, PreferenceProfile};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Team,
    Opponent,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::Team => Side::Opponent,
            Side::Opponent => Side::Team,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Team => "team",
            Side::Opponent => "opponent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "type",
    content = "offer",
    rename_all = "snake_case",
    bound(serialize = "S: Scalar", deserialize = "S: Scalar")
)]
pub enum Action<S = f64> {
    Propose(Offer<S>),
    Accept,
    EndNegotiation,
}

/// One side of a bilateral negotiation.
///
/// Implementations must be deterministic given their construction seed and the
/// sequence of calls they observe.
pub trait Party<S: Scalar = f64> {
    /// Profiles of the agents represented by this party. A team lists its
    /// members in order; a single agent lists itself.
    fn profiles(&self) -> Vec<&PreferenceProfile<S>>;

    /// Called when the other party proposes `offer` at time `t`.
    fn receive_offer(&mut self, offer: &Offer<S>, t: S);

    fn choose_action(&mut self, t: S) -> Action<S>;
}

impl<S: Scalar, P: Party<S> + ?Sized> Party<S> for Box<P> {
    fn profiles(&self) -> Vec<&PreferenceProfile<S>> {
        (**self).profiles()
    }

    fn receive_offer(&mut self, offer: &Offer<S>, t: S) {
        (**self).receive_offer(offer, t)
    }

    fn choose_action(&mut self, t: S) -> Action<S> {
        (**self).choose_action(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub max_rounds: usize,
    pub initiator: Side,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            max_rounds: 1000,
            initiator: Side::Team,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct TranscriptEntry<S = f64> {
    pub round: usize,
    pub t: S,
    pub side: Side,
    pub action: Action<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "result",
    rename_all = "snake_case",
    bound(serialize = "S: Scalar", deserialize = "S: Scalar")
)]
pub enum Outcome<S = f64> {
    Agreement {
        offer: Offer<S>,
        round: usize,
        t: S,
        accepted_by: Side,
    },
    Failure {
        round: usize,
        reason: FailureReason,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    Deadline,
    Withdrawn,
}

impl<S: Scalar> Outcome<S> {
    pub fn is_agreement(&self) -> bool {
        matches!(self, Outcome::Agreement { .. })
    }

    pub fn agreement_offer(&self) -> Option<&Offer<S>> {
        match self {
            Outcome::Agreement { offer, .. } => Some(offer),
            Outcome::Failure { .. } => None,
        }
    }

    pub fn round(&self) -> usize {
        match self {
            Outcome::Agreement { round, .. } | Outcome::Failure { round, .. } => *round,
        }
    }
}

/// Final utilities of every agent taking part in a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Score<S = f64> {
    pub team: Vec<S>,
    pub opponent: S,
    pub joint: S,
}

impl<S: Scalar> Score<S> {
    pub fn team_average(&self) -> S {
        if self.team.is_empty() {
            return S::zero();
        }
        self.team.iter().copied().sum::<S>() / S::of(self.team.len() as f64)
    }

    pub fn team_min(&self) -> S {
        self.team.iter().copied().fold(S::infinity(), S::min)
    }

    pub fn team_max(&self) -> S {
        self.team.iter().copied().fold(S::neg_infinity(), S::max)
    }
}

/// Product of all individual utilities; 0 is absorbing.
pub fn joint_utility<S: Scalar>(utilities: &[S]) -> S {
    utilities.iter().fold(S::one(), |acc, u| acc * *u)
}

/// Utilities of the team members and the opponent for a terminal outcome.
pub fn score<S: Scalar>(
    outcome: &Outcome<S>,
    team: &[&PreferenceProfile<S>],
    opponent: &PreferenceProfile<S>,
) -> Result<Score<S>> {
    match outcome {
        Outcome::Failure { .. } => Ok(Score {
            team: vec![S::zero(); team.len()],
            opponent: S::zero(),
            joint: S::zero(),
        }),
        Outcome::Agreement { offer, .. } => {
            let team_utilities = team
                .iter()
                .map(|p| p.utility(offer))
                .collect::<Result<Vec<S>>>()?;
            let opponent_utility = opponent.utility(offer)?;
            let joint = joint_utility(&team_utilities) * opponent_utility;
            Ok(Score {
                team: team_utilities,
                opponent: opponent_utility,
                joint,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Transcript<S = f64> {
    pub config: SessionConfig,
    pub actions: Vec<TranscriptEntry<S>>,
    pub outcome: Outcome<S>,
    pub utilities: Score<S>,
}

/// Runs one alternating-offers session to agreement, withdrawal or deadline.
pub fn run_session<S: Scalar>(
    team: &mut dyn Party<S>,
    opponent: &mut dyn Party<S>,
    config: &SessionConfig,
) -> Result<Transcript<S>> {
    if config.max_rounds == 0 {
        return Err(Error::Config("max_rounds must be at least 1".into()));
    }
    let issue_count = {
        let opp = opponent.profiles();
        let first = opp
            .first()
            .ok_or_else(|| Error::Config("opponent exposes no profile".into()))?;
        first.issue_count()
    };

    let mut actions = Vec::with_capacity(2 * config.max_rounds + 1);
    let mut standing: Option<(Side, Offer<S>)> = None;
    let initiator = config.initiator;
    let responder = initiator.other();
    let schedule = std::iter::once((0, initiator))
        .chain((1..=config.max_rounds).flat_map(|r| [(r, responder), (r, initiator)]));

    let mut outcome = None;
    for (round, side) in schedule {
        let t = S::of(round as f64 / config.max_rounds as f64);
        let (actor, other): (&mut dyn Party<S>, &mut dyn Party<S>) = match side {
            Side::Team => (&mut *team, &mut *opponent),
            Side::Opponent => (&mut *opponent, &mut *team),
        };
        let action = actor.choose_action(t);
        match &action {
            Action::Propose(offer) => {
                if offer.len() != issue_count {
                    return Err(Error::ProtocolViolation {
                        side,
                        reason: format!(
                            "proposed {} values for a {issue_count}-issue domain",
                            offer.len()
                        ),
                    });
                }
                other.receive_offer(offer, t);
                standing = Some((side, offer.clone()));
            }
            Action::Accept => match &standing {
                Some((proposer, offer)) if *proposer != side => {
                    outcome = Some(Outcome::Agreement {
                        offer: offer.clone(),
                        round,
                        t,
                        accepted_by: side,
                    });
                }
                _ => {
                    return Err(Error::ProtocolViolation {
                        side,
                        reason: format!("accepted in round {round} with no standing offer"),
                    })
                }
            },
            Action::EndNegotiation => {
                outcome = Some(Outcome::Failure {
                    round,
                    reason: FailureReason::Withdrawn,
                });
            }
        }
        actions.push(TranscriptEntry {
            round,
            t,
            side,
            action,
        });
        if outcome.is_some() {
            break;
        }
    }

    let outcome = outcome.unwrap_or(Outcome::Failure {
        round: config.max_rounds,
        reason: FailureReason::Deadline,
    });
    let utilities = {
        let team_profiles = team.profiles();
        let opp = opponent.profiles();
        score(&outcome, &team_profiles, opp[0])?
    };
    Ok(Transcript {
        config: *config,
        actions,
        outcome,
        utilities,
    })
}
