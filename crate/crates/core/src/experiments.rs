//! Tournament harness: every team configuration against every opponent,
//! repeated with per-session seeds derived from a master seed.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::opponents::{Archetype, Family};
use crate::protocol::{run_session, SessionConfig, Side, Transcript};
use crate::scenario::{Scenario, HOTEL_BOOKING};
use crate::tactics::{IsoSamplerConfig, TimeTactic};
use crate::team::{Representative, Strategy, Team, TeamConfig, TeamMember};

pub const BOULWARE: [f64; 2] = [0.5, 0.99];
pub const VERY_BOULWARE: [f64; 2] = [0.01, 0.4];

fn default_observation_rounds() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSpec {
    pub label: String,
    pub strategy: Strategy,
    /// Members' concession speed is drawn uniformly from `[low, high]`.
    pub beta_range: [f64; 2],
    #[serde(default)]
    pub reservation_utility: f64,
    #[serde(default = "default_observation_rounds")]
    pub agenda_observation_rounds: usize,
    #[serde(default)]
    pub representative: Representative,
    #[serde(default)]
    pub sampler: IsoSamplerConfig,
}

impl TeamSpec {
    pub fn new(label: impl Into<String>, strategy: Strategy, beta_range: [f64; 2]) -> Self {
        Self {
            label: label.into(),
            strategy,
            beta_range,
            reservation_utility: 0.0,
            agenda_observation_rounds: default_observation_rounds(),
            representative: Representative::TimeTactic,
            sampler: IsoSamplerConfig::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        let [low, high] = self.beta_range;
        if !(low > 0.0 && high >= low && high.is_finite()) {
            return Err(Error::Config(format!(
                "team `{}`: beta range [{low}, {high}] must satisfy 0 < low <= high",
                self.label
            )));
        }
        TimeTactic::new(self.reservation_utility, low)?;
        self.sampler.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpponentSpec {
    pub label: String,
    #[serde(flatten)]
    pub archetype: Archetype,
    #[serde(default)]
    pub sampler: IsoSamplerConfig,
}

impl OpponentSpec {
    pub fn new(label: impl Into<String>, archetype: Archetype) -> Self {
        Self {
            label: label.into(),
            archetype,
            sampler: IsoSamplerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSource {
    Builtin(String),
    Inline(Scenario),
}

impl ScenarioSource {
    pub fn resolve(&self) -> Result<Scenario> {
        match self {
            ScenarioSource::Builtin(name) => Scenario::builtin(name)
                .ok_or_else(|| Error::Config(format!("unknown built-in scenario `{name}`"))),
            ScenarioSource::Inline(s) => Ok(s.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TournamentSettings {
    pub repetitions: usize,
    pub max_rounds: usize,
    pub master_seed: u64,
}

impl Default for TournamentSettings {
    fn default() -> Self {
        Self {
            repetitions: 10,
            max_rounds: 1000,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentConfig {
    pub scenario: ScenarioSource,
    pub teams: Vec<TeamSpec>,
    pub opponents: Vec<OpponentSpec>,
    #[serde(default)]
    pub tournament: TournamentSettings,
}

impl TournamentConfig {
    /// Three-member hotel booking team in seven configurations against the
    /// five opponent proxies, ten repetitions of 1000 rounds.
    pub fn desk() -> Self {
        let rep_k = TeamSpec {
            representative: Representative::AgentK { gamma: 3.0 },
            ..TeamSpec::new("RE K", Strategy::Re, BOULWARE)
        };
        let teams = vec![
            TeamSpec::new("FUM B", Strategy::Fum, BOULWARE),
            TeamSpec::new("FUM VB", Strategy::Fum, VERY_BOULWARE),
            rep_k,
            TeamSpec::new("SSV B", Strategy::Ssv, BOULWARE),
            TeamSpec::new("SSV VB", Strategy::Ssv, VERY_BOULWARE),
            TeamSpec::new("SBV B", Strategy::Sbv, BOULWARE),
            TeamSpec::new("SBV VB", Strategy::Sbv, VERY_BOULWARE),
        ];
        let opponents = vec![
            OpponentSpec::new("Crazy", Archetype::CrazyHaggler { threshold: 0.9 }),
            OpponentSpec::new(
                "Haggler",
                Archetype::HagglerAdaptive {
                    params: Default::default(),
                },
            ),
            OpponentSpec::new("K", Archetype::AgentKLike { gamma: 3.0 }),
            OpponentSpec::new(
                "TFT",
                Archetype::NiceTftLike {
                    nash_floor: 0.5,
                    end_game: 0.95,
                },
            ),
            OpponentSpec::new(
                "Smith",
                Archetype::SmithLike {
                    final_phase: 2.0 / 3.0,
                    floor: 0.5,
                },
            ),
        ];
        Self {
            scenario: ScenarioSource::Builtin(HOTEL_BOOKING.into()),
            teams,
            opponents,
            tournament: TournamentSettings::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.tournament.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.tournament.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be at least 1".into()));
        }
        if self.teams.is_empty() || self.opponents.is_empty() {
            return Err(Error::Config(
                "need at least one team and one opponent".into(),
            ));
        }
        for t in &self.teams {
            t.validate()?;
        }
        for o in &self.opponents {
            o.archetype.validate()?;
            o.sampler.validate()?;
        }
        Ok(())
    }
}

/// Stable 64-bit seed for one session.
pub fn session_seed(master_seed: u64, team: &str, opponent: &str, repetition: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(team.as_bytes());
    h.update([0xff]);
    h.update(opponent.as_bytes());
    h.update([0xff]);
    h.update((repetition as u64).to_le_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Even repetitions are opened by the team, odd ones by the opponent.
pub fn initiator_for(repetition: usize) -> Side {
    if repetition.is_multiple_of(2) {
        Side::Team
    } else {
        Side::Opponent
    }
}

/// Everything needed to rebuild and rerun one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSetup {
    pub team_index: usize,
    pub opponent_index: usize,
    pub team: TeamSpec,
    pub opponent: OpponentSpec,
    pub repetition: usize,
    pub seed: u64,
    pub betas: Vec<f64>,
    pub team_seed: u64,
    pub opponent_seed: u64,
    pub initiator: Side,
    pub max_rounds: usize,
}

impl SessionSetup {
    pub fn plan(
        config: &TournamentConfig,
        scenario: &Scenario,
        team_index: usize,
        opponent_index: usize,
        repetition: usize,
    ) -> Self {
        let team = config.teams[team_index].clone();
        let opponent = config.opponents[opponent_index].clone();
        let seed = session_seed(
            config.tournament.master_seed,
            &team.label,
            &opponent.label,
            repetition,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [low, high] = team.beta_range;
        let betas = scenario
            .team
            .iter()
            .map(|_| rng.gen_range(low..=high))
            .collect();
        let team_seed = rng.gen();
        let opponent_seed = rng.gen();
        Self {
            team_index,
            opponent_index,
            team,
            opponent,
            repetition,
            seed,
            betas,
            team_seed,
            opponent_seed,
            initiator: initiator_for(repetition),
            max_rounds: config.tournament.max_rounds,
        }
    }

    pub fn team_config(&self, scenario: &Scenario) -> Result<TeamConfig> {
        let members = scenario
            .team
            .iter()
            .zip(&self.betas)
            .map(|(profile, beta)| {
                let profile = profile
                    .clone()
                    .with_reservation_utility(self.team.reservation_utility)?;
                let tactic = TimeTactic::new(self.team.reservation_utility, *beta)?;
                Ok(TeamMember::new(profile, tactic, self.team.sampler))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TeamConfig {
            strategy: self.team.strategy,
            members,
            agenda_observation_rounds: self.team.agenda_observation_rounds,
            representative: self.team.representative,
        })
    }

    pub fn session_config(&self) -> SessionConfig {
        SessionConfig {
            max_rounds: self.max_rounds,
            initiator: self.initiator,
            seed: self.seed,
        }
    }

    pub fn pairing(&self) -> String {
        format!("{} vs {}", self.team.label, self.opponent.label)
    }

    /// Builds both parties and plays the session.
    pub fn run(&self, scenario: &Scenario) -> Result<Transcript> {
        let wrap = |source: Error| Error::Session {
            pairing: self.pairing(),
            repetition: self.repetition,
            source: Box::new(source),
        };
        let mut team =
            Team::new(self.team_config(scenario).map_err(wrap)?, self.team_seed).map_err(wrap)?;
        let mut opponent = self
            .opponent
            .archetype
            .build(
                scenario.opponent.clone(),
                self.opponent.sampler,
                self.opponent_seed,
            )
            .map_err(wrap)?;
        run_session(&mut team, opponent.as_mut(), &self.session_config()).map_err(wrap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub team_index: usize,
    pub team: String,
    pub opponent_index: usize,
    pub opponent: String,
    pub archetype: String,
    pub family: Family,
    pub repetition: usize,
    pub seed: u64,
    pub initiator: Side,
    pub agreement: bool,
    pub rounds: usize,
    pub actions: usize,
    pub member_utilities: Vec<f64>,
    pub opponent_utility: f64,
    pub team_average: f64,
    pub team_min: f64,
    pub team_max: f64,
    pub joint_utility: f64,
}

impl SessionRecord {
    pub fn from_transcript(setup: &SessionSetup, transcript: &Transcript) -> Self {
        let u = &transcript.utilities;
        Self {
            team_index: setup.team_index,
            team: setup.team.label.clone(),
            opponent_index: setup.opponent_index,
            opponent: setup.opponent.label.clone(),
            archetype: setup.opponent.archetype.name().to_string(),
            family: setup.opponent.archetype.family(),
            repetition: setup.repetition,
            seed: setup.seed,
            initiator: setup.initiator,
            agreement: transcript.outcome.is_agreement(),
            rounds: transcript.outcome.round(),
            actions: transcript.actions.len(),
            member_utilities: u.team.clone(),
            opponent_utility: u.opponent,
            team_average: u.team_average(),
            team_min: u.team_min(),
            team_max: u.team_max(),
            joint_utility: u.joint,
        }
    }

    fn sort_key(&self) -> (usize, usize, usize) {
        (self.team_index, self.opponent_index, self.repetition)
    }
}

/// A played session with its plan, transcript and summary.
#[derive(Debug, Clone)]
pub struct SessionRun {
    pub setup: SessionSetup,
    pub transcript: Transcript,
    pub record: SessionRecord,
}

/// Plays every session of the tournament, in parallel, returning runs sorted
/// by (team, opponent, repetition).
pub fn run_tournament_detailed(config: &TournamentConfig) -> Result<Vec<SessionRun>> {
    config.validate()?;
    let scenario = config.scenario.resolve()?;
    let reps = config.tournament.repetitions;
    let jobs: Vec<(usize, usize, usize)> = (0..config.teams.len())
        .flat_map(|t| {
            (0..config.opponents.len()).flat_map(move |o| (0..reps).map(move |r| (t, o, r)))
        })
        .collect();
    let mut runs = jobs
        .into_par_iter()
        .map(|(t, o, r)| {
            let setup = SessionSetup::plan(config, &scenario, t, o, r);
            let transcript = setup.run(&scenario)?;
            let record = SessionRecord::from_transcript(&setup, &transcript);
            Ok(SessionRun {
                setup,
                transcript,
                record,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by_key(|run| run.record.sort_key());
    Ok(runs)
}

pub fn run_tournament(config: &TournamentConfig) -> Result<Vec<SessionRecord>> {
    Ok(run_tournament_detailed(config)?
        .into_iter()
        .map(|run| run.record)
        .collect())
}

/// Transcript file: the session plan, the scenario it ran on and the
/// transcript itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptFile {
    pub setup: SessionSetup,
    pub scenario: Scenario,
    #[serde(flatten)]
    pub transcript: Transcript,
}

impl TranscriptFile {
    pub fn file_name(setup: &SessionSetup) -> String {
        let clean = |s: &str| -> String {
            s.chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                .collect()
        };
        format!(
            "{:02}_{}__{:02}_{}__rep{:03}.json",
            setup.team_index,
            clean(&setup.team.label),
            setup.opponent_index,
            clean(&setup.opponent.label),
            setup.repetition
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Reruns the session from its setup.
    pub fn replay(&self) -> Result<Transcript> {
        self.setup.run(&self.scenario)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingAggregate {
    pub team_index: usize,
    pub team: String,
    pub opponent_index: usize,
    pub opponent: String,
    pub sessions: usize,
    pub team_average: f64,
    pub team_min: f64,
    pub team_max: f64,
    pub joint_utility: f64,
    pub agreement_rate: f64,
}

/// Per-pairing arithmetic means; failed sessions count with utility 0.
pub fn aggregate(records: &[SessionRecord]) -> Result<Vec<PairingAggregate>> {
    if records.is_empty() {
        return Err(Error::Statistics(
            "cannot aggregate an empty record set".into(),
        ));
    }
    let mut groups: BTreeMap<(usize, usize), Vec<&SessionRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.team_index, r.opponent_index))
            .or_default()
            .push(r);
    }
    Ok(groups
        .into_values()
        .map(|group| {
            let n = group.len() as f64;
            let mean = |f: fn(&SessionRecord) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            PairingAggregate {
                team_index: group[0].team_index,
                team: group[0].team.clone(),
                opponent_index: group[0].opponent_index,
                opponent: group[0].opponent.clone(),
                sessions: group.len(),
                team_average: mean(|r| r.team_average),
                team_min: mean(|r| r.team_min),
                team_max: mean(|r| r.team_max),
                joint_utility: mean(|r| r.joint_utility),
                agreement_rate: mean(|r| if r.agreement { 1.0 } else { 0.0 }),
            }
        })
        .collect())
}
