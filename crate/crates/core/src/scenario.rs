//! Scenario files and the built-in hotel group booking scenario.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{Direction, NegotiationDomain, PreferenceProfile};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const HOTEL_BOOKING: &str = "hotel-booking";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Team,
    Opponent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
struct ScenarioProfile<S> {
    role: Role,
    #[serde(flatten)]
    profile: PreferenceProfile<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
struct ScenarioFile<S> {
    name: String,
    issues: NegotiationDomain,
    profiles: Vec<ScenarioProfile<S>>,
}

/// A domain with the team members' and the opponent's preferences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "ScenarioFile<S>",
    into = "ScenarioFile<S>",
    bound(serialize = "S: Scalar", deserialize = "S: Scalar")
)]
pub struct Scenario<S = f64> {
    pub name: String,
    pub domain: NegotiationDomain,
    pub team: Vec<PreferenceProfile<S>>,
    pub opponent: PreferenceProfile<S>,
}

impl<S: Scalar> Scenario<S> {
    pub fn new(
        name: impl Into<String>,
        domain: NegotiationDomain,
        team: Vec<PreferenceProfile<S>>,
        opponent: PreferenceProfile<S>,
    ) -> Result<Self> {
        if team.is_empty() {
            return Err(Error::Config(
                "scenario needs at least one team profile".into(),
            ));
        }
        let n = domain.issue_count();
        for p in team.iter().chain(std::iter::once(&opponent)) {
            if p.issue_count() != n {
                return Err(Error::InvalidProfile {
                    name: p.name().to_string(),
                    reason: format!("{} weights for a {n}-issue domain", p.issue_count()),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            domain,
            team,
            opponent,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Resolves a built-in scenario by name.
    pub fn builtin(name: &str) -> Option<Self> {
        (name == HOTEL_BOOKING).then(hotel_booking_scenario)
    }
}

impl<S: Scalar> TryFrom<ScenarioFile<S>> for Scenario<S> {
    type Error = Error;

    fn try_from(file: ScenarioFile<S>) -> Result<Self> {
        let mut team = Vec::new();
        let mut opponent = None;
        for entry in file.profiles {
            match entry.role {
                Role::Team => team.push(entry.profile),
                Role::Opponent if opponent.is_none() => opponent = Some(entry.profile),
                Role::Opponent => {
                    return Err(Error::Config(
                        "scenario has more than one opponent profile".into(),
                    ))
                }
            }
        }
        let opponent =
            opponent.ok_or_else(|| Error::Config("scenario has no opponent profile".into()))?;
        Scenario::new(file.name, file.issues, team, opponent)
    }
}

impl<S: Scalar> From<Scenario<S>> for ScenarioFile<S> {
    fn from(s: Scenario<S>) -> Self {
        let profiles = s
            .team
            .into_iter()
            .map(|profile| ScenarioProfile {
                role: Role::Team,
                profile,
            })
            .chain(std::iter::once(ScenarioProfile {
                role: Role::Opponent,
                profile: s.opponent,
            }))
            .collect();
        ScenarioFile {
            name: s.name,
            issues: s.domain,
            profiles,
        }
    }
}

/// Hotel group booking: price per person, cancellation fee per person, full
/// payment deadline and discount in bar.
///
/// The three friends prefer low price and fee and a late deadline with a high
/// discount; the hotel has the opposite directions. All reservation utilities
/// are 0.
pub fn hotel_booking_scenario<S: Scalar>() -> Scenario<S> {
    use Direction::{Decreasing as Dec, Increasing as Inc};
    let domain = NegotiationDomain::new(["pp", "cf", "pd", "db"]).expect("valid issues");
    let team_dirs = vec![Dec, Dec, Inc, Inc];
    let opp_dirs: Vec<Direction> = team_dirs.iter().map(|d| d.opposite()).collect();
    let profile = |name: &str, w: [f64; 4], dirs: &[Direction]| {
        PreferenceProfile::new(
            name,
            w.iter().map(|x| S::of(*x)).collect(),
            dirs.to_vec(),
            S::zero(),
        )
        .expect("weights sum to one")
    };
    let team = vec![
        profile("a1", [0.5, 0.1, 0.05, 0.35], &team_dirs),
        profile("a2", [0.25, 0.25, 0.25, 0.25], &team_dirs),
        profile("a3", [0.30, 0.50, 0.05, 0.15], &team_dirs),
    ];
    let opponent = profile("op", [0.10, 0.50, 0.25, 0.15], &opp_dirs);
    Scenario::new(HOTEL_BOOKING, domain, team, opponent).expect("consistent scenario")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hotel_weights() {
        let s: Scenario = hotel_booking_scenario();
        assert_eq!(s.team[0].weights(), &[0.5, 0.1, 0.05, 0.35]);
        assert_eq!(s.team[1].weights(), &[0.25, 0.25, 0.25, 0.25]);
        assert_eq!(s.team[2].weights(), &[0.30, 0.50, 0.05, 0.15]);
        assert_eq!(s.opponent.weights(), &[0.10, 0.50, 0.25, 0.15]);
        for p in s.team.iter().chain([&s.opponent]) {
            assert_eq!(p.reservation_utility(), 0.0);
        }
        assert_eq!(s.domain.index_of("db"), Some(3));
    }

    #[test]
    fn json_round_trip_and_f32() {
        let s: Scenario = hotel_booking_scenario();
        let text = serde_json::to_string_pretty(&s).unwrap();
        assert!(text.contains("\"role\": \"opponent\""));
        assert_eq!(Scenario::from_json(&text).unwrap(), s);
        let s32: Scenario<f32> = hotel_booking_scenario();
        assert_eq!(s32.team[2].weights()[1], 0.5f32);
    }

    #[test]
    fn rejects_mismatched_or_missing_profiles() {
        let no_opp = r#"{"name":"x","issues":["a","b"],"profiles":[
            {"role":"team","name":"t","weights":[0.5,0.5],"directions":["increasing","decreasing"]}]}"#;
        assert!(Scenario::<f64>::from_json(no_opp).is_err());
        let bad_dim = r#"{"name":"x","issues":["a","b"],"profiles":[
            {"role":"team","name":"t","weights":[1.0],"directions":["increasing"]},
            {"role":"opponent","name":"o","weights":[0.5,0.5],"directions":["increasing","decreasing"]}]}"#;
        assert!(Scenario::<f64>::from_json(bad_dim).is_err());
    }

    #[test]
    fn builtin_lookup() {
        assert!(Scenario::<f64>::builtin("hotel-booking").is_some());
        assert!(Scenario::<f64>::builtin("nope").is_none());
    }
}
