//! Simulator for negotiation teams bargaining against a single opponent under
//! the alternating-offers protocol.
//!
//! A team is a mediator plus several members with their own additive
//! preferences and time-dependent concession tactics. The mediator runs one of
//! four intra-team strategies (RE, SSV, SBV, FUM) to decide which offers to
//! send and whether to accept. Opponents are proxies of well-known competition
//! agents. The [`experiments`] module runs seeded tournaments and the
//! [`report`] module summarizes them with ANOVA and post-hoc tests.
//!
//! The utility model, concession curves, protocol engine and statistics are
//! generic over [`Scalar`] (`f32` or `f64`); the agents run on `f64`.

pub mod domain;
pub mod error;
pub mod experiments;
pub mod opponents;
pub mod protocol;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod stats;
pub mod tactics;
pub mod team;

pub use domain::{Direction, Issue, NegotiationDomain};
pub use error::{Error, Result};
pub use protocol::{run_session, Action, Party, SessionConfig, Side};
pub use scalar::Scalar;
pub use scenario::hotel_booking_scenario;
pub use team::{Strategy, Team, TeamConfig, TeamMember};

pub type Offer = domain::Offer<f64>;
pub type Offer32 = domain::Offer<f32>;
pub type PartialOffer = domain::PartialOffer<f64>;
pub type PartialOffer32 = domain::PartialOffer<f32>;
pub type PreferenceProfile = domain::PreferenceProfile<f64>;
pub type PreferenceProfile32 = domain::PreferenceProfile<f32>;
pub type Scenario = scenario::Scenario<f64>;
pub type Scenario32 = scenario::Scenario<f32>;
pub type TimeTactic = tactics::TimeTactic<f64>;
pub type TimeTactic32 = tactics::TimeTactic<f32>;
pub type Transcript = protocol::Transcript<f64>;
pub type Outcome = protocol::Outcome<f64>;
