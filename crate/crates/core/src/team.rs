//! Negotiation teams: a mediator coordinating several members that present a
//! single face to the opponent.
//!
//! Four intra-team strategies are supported, ordered by the unanimity they
//! guarantee:
//!
//! * **RE**: a randomly chosen representative negotiates alone.
//! * **SSV**: majority vote on the opponent's offer; plurality vote over the
//!   members' iso-utility proposals.
//! * **SBV**: unanimity vote on the opponent's offer; Borda count over the
//!   proposals.
//! * **FUM**: unanimity vote on the opponent's offer; proposals are built one
//!   attribute at a time following an agenda inferred from the opponent's
//!   early concessions.
//!
//! Every tie (plurality, Borda, equal utilities, equal concessions) resolves
//! to the lowest index.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Direction, Offer, PartialOffer, PreferenceProfile};
use crate::error::{Error, Result};
use crate::opponents::{AgentKLike, TimeTacticAgent};
use crate::protocol::{Action, Party};
use crate::tactics::{sample_iso_offer, IsoSamplerConfig, TimeTactic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Strategy {
    #[serde(alias = "re")]
    Re,
    #[serde(alias = "ssv")]
    Ssv,
    #[serde(alias = "sbv")]
    Sbv,
    #[serde(alias = "fum")]
    Fum,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Re => "RE",
            Strategy::Ssv => "SSV",
            Strategy::Sbv => "SBV",
            Strategy::Fum => "FUM",
        }
    }
}

/// Bilateral strategy played by an RE team's representative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Representative {
    /// The member's own time tactic.
    #[default]
    TimeTactic,
    /// The agent-K-like competitor on the member's profile.
    AgentK {
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
}

fn default_gamma() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeamMember {
    pub profile: PreferenceProfile,
    pub tactic: TimeTactic,
    pub sampler: IsoSamplerConfig,
}

impl TeamMember {
    pub fn new(profile: PreferenceProfile, tactic: TimeTactic, sampler: IsoSamplerConfig) -> Self {
        Self {
            profile,
            tactic,
            sampler,
        }
    }

    pub fn demand(&self, t: f64) -> f64 {
        self.tactic.demand_unchecked(t)
    }

    pub fn utility(&self, offer: &Offer) -> f64 {
        self.profile.utility_unchecked(offer.values())
    }

    /// Vote on an opponent offer: acceptable iff it meets the current demand.
    pub fn accepts(&self, offer: &Offer, t: f64) -> bool {
        self.utility(offer) >= self.demand(t)
    }

    fn propose<R: Rng + ?Sized>(&self, references: &[&Offer], t: f64, rng: &mut R) -> Offer {
        sample_iso_offer(
            &self.profile,
            self.demand(t),
            references,
            &self.sampler,
            rng,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeamConfig {
    pub strategy: Strategy,
    pub members: Vec<TeamMember>,
    pub agenda_observation_rounds: usize,
    pub representative: Representative,
}

impl TeamConfig {
    pub fn new(strategy: Strategy, members: Vec<TeamMember>) -> Self {
        Self {
            strategy,
            members,
            agenda_observation_rounds: 5,
            representative: Representative::TimeTactic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .members
            .first()
            .ok_or_else(|| Error::Config("a team needs at least one member".into()))?;
        if self.agenda_observation_rounds == 0 {
            return Err(Error::Config(
                "agenda_observation_rounds must be positive".into(),
            ));
        }
        let n = first.profile.issue_count();
        if self.members.iter().any(|m| m.profile.issue_count() != n) {
            return Err(Error::Config(
                "team members disagree on the issue count".into(),
            ));
        }
        for m in &self.members {
            m.sampler.validate()?;
        }
        if self.strategy == Strategy::Fum {
            shared_directions(&self.members)?;
        }
        Ok(())
    }
}

/// Valuation directions common to all members, required by FUM.
pub fn shared_directions(members: &[TeamMember]) -> Result<Vec<Direction>> {
    let first = members
        .first()
        .ok_or_else(|| Error::Config("a team needs at least one member".into()))?;
    let dirs = first.profile.directions().to_vec();
    for m in &members[1..] {
        if m.profile.directions() != dirs.as_slice() {
            return Err(Error::Config(format!(
                "FUM needs shared valuation directions; `{}` differs from `{}`",
                m.profile.name(),
                first.profile.name()
            )));
        }
    }
    Ok(dirs)
}

/// Strict majority: more than half of the votes are Accept.
pub fn majority(votes: &[bool]) -> bool {
    2 * votes.iter().filter(|v| **v).count() > votes.len()
}

pub fn unanimity(votes: &[bool]) -> bool {
    votes.iter().all(|v| *v)
}

pub fn votes(members: &[TeamMember], offer: &Offer, t: f64) -> Vec<bool> {
    members.iter().map(|m| m.accepts(offer, t)).collect()
}

pub fn ssv_accept(members: &[TeamMember], offer: &Offer, t: f64) -> bool {
    majority(&votes(members, offer, t))
}

pub fn sbv_accept(members: &[TeamMember], offer: &Offer, t: f64) -> bool {
    unanimity(&votes(members, offer, t))
}

pub fn fum_accept(members: &[TeamMember], offer: &Offer, t: f64) -> bool {
    unanimity(&votes(members, offer, t))
}

/// Index of the proposal with the most approvals. `marks[voter][proposal]`.
pub fn plurality_winner(marks: &[Vec<bool>]) -> Option<usize> {
    let proposals = marks.first()?.len();
    let counts: Vec<usize> = (0..proposals)
        .map(|k| marks.iter().filter(|row| row[k]).count())
        .collect();
    argmax_first(&counts)
}

/// Borda scores per voter: `utilities[voter][proposal]` ranked descending,
/// equal utilities ordered by proposal index, the top proposal scoring
/// `proposals - 1`.
pub fn borda_scores(utilities: &[Vec<f64>]) -> Vec<Vec<usize>> {
    utilities
        .iter()
        .map(|row| {
            let n = row.len();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|a, b| row[*b].total_cmp(&row[*a]).then(a.cmp(b)));
            let mut scores = vec![0; n];
            for (position, proposal) in order.into_iter().enumerate() {
                scores[proposal] = n - 1 - position;
            }
            scores
        })
        .collect()
}

pub fn borda_winner(utilities: &[Vec<f64>]) -> Option<usize> {
    let scores = borda_scores(utilities);
    let n = scores.first()?.len();
    let totals: Vec<usize> = (0..n).map(|k| scores.iter().map(|s| s[k]).sum()).collect();
    argmax_first(&totals)
}

fn argmax_first(values: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| *v > b) {
            best = Some((i, *v));
        }
    }
    best.map(|(i, _)| i)
}

fn member_proposals<R: Rng + ?Sized>(
    members: &[TeamMember],
    references: &[&Offer],
    t: f64,
    rng: &mut R,
) -> Vec<Offer> {
    members
        .iter()
        .map(|m| m.propose(references, t, rng))
        .collect()
}

/// Plurality selection over the members' proposals: each member approves the
/// proposals worth at least as much to it as its own.
pub fn ssv_select(members: &[TeamMember], proposals: &[Offer]) -> usize {
    let marks: Vec<Vec<bool>> = members
        .iter()
        .zip(proposals)
        .map(|(m, own)| {
            let reference = m.utility(own);
            proposals
                .iter()
                .map(|p| m.utility(p) >= reference)
                .collect()
        })
        .collect();
    plurality_winner(&marks).unwrap_or(0)
}

pub fn sbv_select(members: &[TeamMember], proposals: &[Offer]) -> usize {
    let utilities: Vec<Vec<f64>> = members
        .iter()
        .map(|m| proposals.iter().map(|p| m.utility(p)).collect())
        .collect();
    borda_winner(&utilities).unwrap_or(0)
}

pub fn ssv_propose<R: Rng + ?Sized>(
    members: &[TeamMember],
    references: &[&Offer],
    t: f64,
    rng: &mut R,
) -> Offer {
    let mut proposals = member_proposals(members, references, t, rng);
    let winner = ssv_select(members, &proposals);
    proposals.swap_remove(winner)
}

pub fn sbv_propose<R: Rng + ?Sized>(
    members: &[TeamMember],
    references: &[&Offer],
    t: f64,
    rng: &mut R,
) -> Offer {
    let mut proposals = member_proposals(members, references, t, rng);
    let winner = sbv_select(members, &proposals);
    proposals.swap_remove(winner)
}

/// Order in which FUM sets attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agenda(Vec<usize>);

impl Agenda {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &i in &order {
            match seen.get_mut(i) {
                Some(s) if !*s => *s = true,
                _ => {
                    return Err(Error::Config(format!(
                        "agenda {order:?} is not a permutation"
                    )))
                }
            }
        }
        Ok(Self(order))
    }

    pub fn declaration_order(issue_count: usize) -> Self {
        Self((0..issue_count).collect())
    }

    /// Most conceded attribute first; equal totals keep declaration order.
    pub fn from_concessions(concessions: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..concessions.len()).collect();
        order.sort_by(|a, b| concessions[*b].total_cmp(&concessions[*a]).then(a.cmp(b)));
        Self(order)
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }
}

/// Per-attribute concession of the opponent towards the team over the first
/// `window` offers: the positive part of each step in the team-favorable
/// direction, summed.
pub fn concession_totals(
    offers: &[Offer],
    team_directions: &[Direction],
    window: usize,
) -> Vec<f64> {
    let mut totals = vec![0.0; team_directions.len()];
    let observed = &offers[..offers.len().min(window)];
    for pair in observed.windows(2) {
        for (j, total) in totals.iter_mut().enumerate() {
            let step =
                (pair[1].values()[j] - pair[0].values()[j]) * team_directions[j].sign::<f64>();
            *total += step.max(0.0);
        }
    }
    totals
}

pub fn infer_agenda(offers: &[Offer], team_directions: &[Direction], window: usize) -> Agenda {
    if offers.len().min(window) < 2 {
        return Agenda::declaration_order(team_directions.len());
    }
    Agenda::from_concessions(&concession_totals(offers, team_directions, window))
}

/// Value a member asks for on `issue`: the one bringing its partial utility
/// closest to its current demand.
pub fn member_request(member: &TeamMember, partial: &PartialOffer, issue: usize, t: f64) -> f64 {
    let weight = member.profile.weights()[issue];
    let direction = member.profile.directions()[issue];
    let missing = member.demand(t) - member.profile.partial_utility(partial);
    let valuation = if weight > 0.0 {
        (missing / weight).clamp(0.0, 1.0)
    } else {
        0.0
    };
    direction.attribute_for(valuation)
}

/// Mediator aggregation: the most favorable request for a shared direction.
pub fn aggregate_requests(direction: Direction, requests: &[f64]) -> f64 {
    match direction {
        Direction::Increasing => requests.iter().copied().fold(0.0, f64::max),
        Direction::Decreasing => requests.iter().copied().fold(1.0, f64::min),
    }
}

/// Attribute-by-attribute construction of a FUM proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct FumStep {
    pub issue: usize,
    /// `(member index, requested value)` of the members active at this step.
    pub requests: Vec<(usize, f64)>,
    pub value: f64,
    /// Members that accepted the partial offer after this step.
    pub satisfied: Vec<usize>,
}

pub fn fum_build(members: &[TeamMember], agenda: &Agenda, t: f64) -> Result<(Offer, Vec<FumStep>)> {
    let directions = shared_directions(members)?;
    let mut partial = PartialOffer::empty(directions.len());
    let mut active = vec![true; members.len()];
    let mut steps = Vec::new();
    for &issue in agenda.order() {
        if !active.iter().any(|a| *a) {
            break;
        }
        let requests: Vec<(usize, f64)> = members
            .iter()
            .enumerate()
            .filter(|(i, _)| active[*i])
            .map(|(i, m)| (i, member_request(m, &partial, issue, t)))
            .collect();
        let values: Vec<f64> = requests.iter().map(|(_, v)| *v).collect();
        let value = aggregate_requests(directions[issue], &values);
        partial.set(issue, value)?;
        let mut satisfied = Vec::new();
        for (i, m) in members.iter().enumerate() {
            if active[i] && m.profile.partial_utility(&partial) >= m.demand(t) {
                active[i] = false;
                satisfied.push(i);
            }
        }
        steps.push(FumStep {
            issue,
            requests,
            value,
            satisfied,
        });
    }
    for (j, d) in directions.iter().enumerate() {
        if !partial.is_set(j) {
            // team-worst value, i.e. what the opponent prefers
            partial.set(j, d.worst())?;
        }
    }
    let offer = partial.to_offer().expect("every attribute set");
    Ok((offer, steps))
}

pub fn fum_propose(members: &[TeamMember], agenda: &Agenda, t: f64) -> Result<Offer> {
    fum_build(members, agenda, t).map(|(offer, _)| offer)
}

/// Seed stream used to draw an RE representative, distinct from the stream the
/// representative itself consumes.
const REPRESENTATIVE_STREAM: u64 = 0x5245;

/// Index of the representative an RE team seeded with `seed` picks.
pub fn representative_index(seed: u64, member_count: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(REPRESENTATIVE_STREAM);
    rng.gen_range(0..member_count)
}

/// The bilateral agent an RE representative plays, seeded with the team seed.
pub fn representative_agent(
    member: &TeamMember,
    kind: Representative,
    seed: u64,
) -> Box<dyn Party> {
    match kind {
        Representative::TimeTactic => Box::new(TimeTacticAgent::new(
            member.profile.clone(),
            member.tactic,
            member.sampler,
            seed,
        )),
        Representative::AgentK { gamma } => Box::new(AgentKLike::new(
            member.profile.clone(),
            gamma,
            member.sampler,
            seed,
        )),
    }
}

/// A team acting as one party through its mediator.
pub struct Team {
    config: TeamConfig,
    rng: ChaCha8Rng,
    representative: Option<(usize, Box<dyn Party>)>,
    pending: Option<Offer>,
    last_opponent_offer: Option<Offer>,
    last_team_offer: Option<Offer>,
    opponent_offers: Vec<Offer>,
}

impl Team {
    pub fn new(config: TeamConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let representative = (config.strategy == Strategy::Re).then(|| {
            let idx = representative_index(seed, config.members.len());
            let agent = representative_agent(&config.members[idx], config.representative, seed);
            (idx, agent)
        });
        Ok(Self {
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            representative,
            pending: None,
            last_opponent_offer: None,
            last_team_offer: None,
            opponent_offers: Vec::new(),
        })
    }

    pub fn config(&self) -> &TeamConfig {
        &self.config
    }

    pub fn members(&self) -> &[TeamMember] {
        &self.config.members
    }

    pub fn representative_index(&self) -> Option<usize> {
        self.representative.as_ref().map(|(i, _)| *i)
    }

    /// Agenda FUM would use now.
    pub fn current_agenda(&self) -> Agenda {
        let dirs = self.config.members[0].profile.directions();
        infer_agenda(
            &self.opponent_offers,
            dirs,
            self.config.agenda_observation_rounds,
        )
    }

    fn accepts(&self, offer: &Offer, t: f64) -> bool {
        let members = &self.config.members;
        match self.config.strategy {
            Strategy::Ssv => ssv_accept(members, offer, t),
            Strategy::Sbv => sbv_accept(members, offer, t),
            Strategy::Fum => fum_accept(members, offer, t),
            Strategy::Re => unreachable!("RE delegates to its representative"),
        }
    }

    fn propose(&mut self, t: f64) -> Offer {
        let members = &self.config.members;
        let refs: Vec<&Offer> = self
            .last_opponent_offer
            .iter()
            .chain(self.last_team_offer.iter())
            .collect();
        match self.config.strategy {
            Strategy::Ssv => ssv_propose(members, &refs, t, &mut self.rng),
            Strategy::Sbv => sbv_propose(members, &refs, t, &mut self.rng),
            Strategy::Fum => {
                let agenda = self.current_agenda();
                fum_propose(members, &agenda, t).expect("FUM directions validated at construction")
            }
            Strategy::Re => unreachable!("RE delegates to its representative"),
        }
    }
}

impl Party for Team {
    fn profiles(&self) -> Vec<&PreferenceProfile> {
        self.config.members.iter().map(|m| &m.profile).collect()
    }

    fn receive_offer(&mut self, offer: &Offer, t: f64) {
        if let Some((_, rep)) = self.representative.as_mut() {
            rep.receive_offer(offer, t);
            return;
        }
        if self.opponent_offers.len() < self.config.agenda_observation_rounds {
            self.opponent_offers.push(offer.clone());
        }
        self.last_opponent_offer = Some(offer.clone());
        self.pending = Some(offer.clone());
    }

    fn choose_action(&mut self, t: f64) -> Action {
        if let Some((_, rep)) = self.representative.as_mut() {
            return rep.choose_action(t);
        }
        if let Some(offer) = self.pending.take() {
            if self.accepts(&offer, t) {
                return Action::Accept;
            }
        }
        let offer = self.propose(t);
        self.last_team_offer = Some(offer.clone());
        Action::Propose(offer)
    }
}
