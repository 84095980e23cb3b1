//! Mediated voting over traffic-light configurations.
//!
//! A mediator opens one session per intersection and publishes configuration
//! bids. Vehicles hold one revisable public vote each; a bid's utility is its
//! live vote count. At the apply tick the most voted configuration wins, ties
//! going to the smallest bid id. Every session is mirrored into the knowledge
//! store, so schema validation and queries see the same state the engine acts
//! on.

mod mirror;

pub use mirror::{install_negotiation_schema, install_traffic_schema};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{
    enumerate_phases, Configuration, ConfigurationError, ConflictMatrix, Intersection,
    IntersectionId, LightId, Movement, Tick, VehicleId,
};
use crate::store::{KnowledgeStore, StoreError, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Mediator,
    Negotiator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub id: String,
    pub role: Role,
}

impl Party {
    pub fn mediator(id: impl Into<String>) -> Self {
        Party {
            id: id.into(),
            role: Role::Mediator,
        }
    }
}

/// Bid identifier, unique within its session. Ties break toward the
/// smallest id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BidId(pub u32);

impl std::fmt::Display for BidId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "bid{}", self.0)
    }
}

/// A mediator-published configuration with its live vote count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub id: BidId,
    pub party: String,
    pub configuration: Configuration,
    /// Current tally for this bid — the paper's bid utility.
    pub utility: u32,
}

/// Session handle issued by [`NegotiationEngine::open_session`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SessionId(pub u64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub winner: BidId,
    /// Final (bid, votes) pairs in bid order.
    pub tally: Vec<(BidId, u32)>,
    pub total_votes: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionState {
    Open,
    Closed(Outcome),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: SessionId,
    pub intersection: IntersectionId,
    /// Per-intersection session number, used for store entity names.
    pub seq: u32,
    pub mediator: String,
    pub bids: Vec<Bid>,
    pub votes: BTreeMap<VehicleId, BidId>,
    pub apply_tick: Tick,
    pub state: SessionState,
}

impl Session {
    pub fn is_open(&self) -> bool {
        matches!(self.state, SessionState::Open)
    }

    pub fn tally(&self) -> BTreeMap<BidId, u32> {
        let mut t: BTreeMap<BidId, u32> = self.bids.iter().map(|b| (b.id, 0)).collect();
        for bid in self.votes.values() {
            *t.get_mut(bid).expect("vote references a session bid") += 1;
        }
        t
    }

    pub fn entity(&self) -> String {
        format!("int{}_s{}", self.intersection.0, self.seq)
    }

    pub fn bid_entity(&self, bid: BidId) -> String {
        format!("{}_bid{}", self.entity(), bid.0)
    }

    fn bid(&self, id: BidId) -> Option<&Bid> {
        self.bids.iter().find(|b| b.id == id)
    }
}

/// Per-vehicle weights over the cost terms of [`NegotiationEngine::choose_bid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preference {
    pub weight_wait: f64,
    pub weight_turns: f64,
    pub weight_distance: f64,
}

impl Preference {
    pub fn new(
        weight_wait: f64,
        weight_turns: f64,
        weight_distance: f64,
    ) -> Result<Self, EngineError> {
        let weights = [weight_wait, weight_turns, weight_distance];
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(EngineError::BadPreference(
                "weights must be finite and non-negative".into(),
            ));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(EngineError::BadPreference(
                "at least one weight must be positive".into(),
            ));
        }
        Ok(Preference {
            weight_wait,
            weight_turns,
            weight_distance,
        })
    }
}

impl Default for Preference {
    fn default() -> Self {
        Preference {
            weight_wait: 1.0,
            weight_turns: 0.0,
            weight_distance: 0.0,
        }
    }
}

/// What the voting vehicle knows about its approach when choosing a bid.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachContext {
    pub approach_light: LightId,
    pub movement: Movement,
    /// Wait charged for a bid that leaves the approach red: the configured
    /// phase duration in seconds.
    pub red_penalty_s: u32,
    pub turns_remaining: u32,
    pub distance_remaining_m: f64,
}

/// The lights and conflict structure bids are generated against.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionLayout {
    pub intersection: IntersectionId,
    pub lights: Vec<LightId>,
    pub conflicts: ConflictMatrix,
}

impl From<&Intersection> for IntersectionLayout {
    fn from(ix: &Intersection) -> Self {
        IntersectionLayout {
            intersection: ix.id,
            lights: ix.lights(),
            conflicts: ix.conflicts.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("party {0} is not a mediator")]
    NotMediator(String),
    #[error("intersection {0} already has an open session")]
    DuplicateOpenSession(IntersectionId),
    #[error("unknown session")]
    UnknownSession,
    #[error("session is closed")]
    SessionClosed,
    #[error("unknown bid {0}")]
    UnknownBid(BidId),
    #[error("votes are accepted strictly before the apply tick")]
    VoteAfterApplyTick,
    #[error("cannot close before the apply tick")]
    CloseBeforeApplyTick,
    #[error("apply tick must lie in the future")]
    ApplyTickInPast,
    #[error("a session needs at least two bids")]
    TooFewBids,
    #[error("an intersection needs at least two lights")]
    TooFewLights,
    #[error("phase count must be at least 2 to alternate")]
    PhaseCountTooSmall,
    #[error("only {available} conflict-free configurations exist, {requested} requested")]
    NoConflictFreeConfiguration { available: usize, requested: u32 },
    #[error("light {0} is not an approach of this session's intersection")]
    NotAnApproach(LightId),
    #[error("bad preference: {0}")]
    BadPreference(String),
    #[error(transparent)]
    Configuration(#[from] ConfigurationError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Conflict-free configurations for an intersection, in deterministic order.
/// For a standard four-light crossing with `phase_count = 2` these are
/// exactly the two complementary phases.
pub fn generate_bids(
    layout: &IntersectionLayout,
    phase_count: u32,
) -> Result<Vec<Configuration>, EngineError> {
    if layout.lights.len() < 2 {
        return Err(EngineError::TooFewLights);
    }
    if phase_count < 2 {
        return Err(EngineError::PhaseCountTooSmall);
    }
    let phases = enumerate_phases(&layout.lights, &layout.conflicts);
    if (phases.len() as u32) < phase_count {
        return Err(EngineError::NoConflictFreeConfiguration {
            available: phases.len(),
            requested: phase_count,
        });
    }
    Ok(phases.into_iter().take(phase_count as usize).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TranscriptKind {
    Open,
    Vote { vehicle: VehicleId, bid: BidId },
    Close { winner: BidId },
}

/// One line of the session transcript (JSON-lines export).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEvent {
    pub tick: Tick,
    pub intersection: IntersectionId,
    pub session: u32,
    #[serde(flatten)]
    pub kind: TranscriptKind,
    /// (bid, votes) snapshot after the event.
    pub tally: Vec<(BidId, u32)>,
}

#[derive(Debug, Clone, Default)]
pub struct NegotiationEngine {
    store: KnowledgeStore,
    sessions: BTreeMap<SessionId, Session>,
    open_by_intersection: BTreeMap<IntersectionId, SessionId>,
    session_seq: BTreeMap<IntersectionId, u32>,
    next_session: u64,
    transcript: Vec<TranscriptEvent>,
}

impl NegotiationEngine {
    /// Engine with the negotiation schema installed in a fresh store.
    pub fn new() -> Self {
        let mut store = KnowledgeStore::new();
        install_negotiation_schema(&mut store).expect("schema installs into an empty store");
        NegotiationEngine {
            store,
            ..Default::default()
        }
    }

    pub fn store(&self) -> &KnowledgeStore {
        &self.store
    }

    pub fn session(&self, id: SessionId) -> Option<&Session> {
        self.sessions.get(&id)
    }

    pub fn open_session_for(&self, intersection: IntersectionId) -> Option<SessionId> {
        self.open_by_intersection.get(&intersection).copied()
    }

    pub fn transcript(&self) -> &[TranscriptEvent] {
        &self.transcript
    }

    /// Session transcript as JSON lines, one record per event.
    pub fn transcript_jsonl(&self) -> String {
        self.transcript
            .iter()
            .map(|e| serde_json::to_string(e).expect("transcript serializes"))
            .fold(String::new(), |mut acc, line| {
                acc.push_str(&line);
                acc.push('\n');
                acc
            })
    }

    /// Open a session with the given configuration bids. The session and its
    /// bids are mirrored into the store with utility 0.
    pub fn open_session(
        &mut self,
        mediator: &Party,
        layout: &IntersectionLayout,
        configurations: Vec<Configuration>,
        now: Tick,
        apply_tick: Tick,
    ) -> Result<SessionId, EngineError> {
        if mediator.role != Role::Mediator {
            return Err(EngineError::NotMediator(mediator.id.clone()));
        }
        if configurations.len() < 2 {
            return Err(EngineError::TooFewBids);
        }
        if apply_tick <= now {
            return Err(EngineError::ApplyTickInPast);
        }
        if self.open_by_intersection.contains_key(&layout.intersection) {
            return Err(EngineError::DuplicateOpenSession(layout.intersection));
        }
        for c in &configurations {
            c.validate_for(&layout.lights, &layout.conflicts)?;
        }

        let seq = self.session_seq.entry(layout.intersection).or_insert(0);
        *seq += 1;
        let seq = *seq;
        let id = SessionId(self.next_session);
        self.next_session += 1;

        let bids: Vec<Bid> = configurations
            .into_iter()
            .enumerate()
            .map(|(i, configuration)| Bid {
                id: BidId(i as u32 + 1),
                party: mediator.id.clone(),
                configuration,
                utility: 0,
            })
            .collect();
        let session = Session {
            id,
            intersection: layout.intersection,
            seq,
            mediator: mediator.id.clone(),
            bids,
            votes: BTreeMap::new(),
            apply_tick,
            state: SessionState::Open,
        };
        self.mirror_open(&session)?;
        self.transcript.push(TranscriptEvent {
            tick: now,
            intersection: session.intersection,
            session: seq,
            kind: TranscriptKind::Open,
            tally: session.tally().into_iter().collect(),
        });
        self.open_by_intersection.insert(layout.intersection, id);
        self.sessions.insert(id, session);
        Ok(id)
    }

    fn mirror_open(&mut self, session: &Session) -> Result<(), EngineError> {
        let entity = session.entity();
        self.store.assert_is_a(&session.mediator, "Party")?;
        self.store
            .assert_triple(&session.mediator, "hasRole", Value::entity("Mediator"))?;
        self.store.assert_is_a(&entity, "TrafficLightSign")?;
        self.store
            .assert_triple(&entity, "hasActor", Value::entity(&session.mediator))?;
        for bid in &session.bids {
            let bid_entity = session.bid_entity(bid.id);
            self.store.assert_is_a(&bid_entity, "Bid")?;
            self.store
                .assert_triple(&bid_entity, "hasParty", Value::entity(&session.mediator))?;
            self.store
                .assert_triple(&bid_entity, "hasUtility", Value::Int(0))?;
            for (light, _) in &bid.configuration.assignments {
                let light_entity = light.to_string();
                self.store.assert_is_a(&light_entity, "TrafficLight")?;
                self.store.assert_triple(
                    &light_entity,
                    "NumberOfItems",
                    Value::Str("Multiple".into()),
                )?;
                self.store
                    .assert_triple(&light_entity, "NumberOfAttributes", Value::Int(4))?;
                self.store
                    .assert_triple(&entity, "hasObject", Value::entity(&light_entity))?;
                self.store
                    .assert_triple(&bid_entity, "hasObject", Value::entity(&light_entity))?;
            }
        }
        Ok(())
    }

    /// Set or replace a vehicle's vote. Returns the public tally.
    pub fn cast_vote(
        &mut self,
        session: SessionId,
        now: Tick,
        vehicle: VehicleId,
        bid: BidId,
    ) -> Result<BTreeMap<BidId, u32>, EngineError> {
        let s = self
            .sessions
            .get_mut(&session)
            .ok_or(EngineError::UnknownSession)?;
        if !s.is_open() {
            return Err(EngineError::SessionClosed);
        }
        if now >= s.apply_tick {
            return Err(EngineError::VoteAfterApplyTick);
        }
        if s.bid(bid).is_none() {
            return Err(EngineError::UnknownBid(bid));
        }
        s.votes.insert(vehicle, bid);
        let tally = s.tally();
        for b in &mut s.bids {
            b.utility = tally[&b.id];
        }

        // keep the store coherent with the live tally
        let entity = s.entity();
        let voter = vehicle.to_string();
        let intersection = s.intersection;
        let seq = s.seq;
        let utilities: Vec<(String, u32)> = s
            .bids
            .iter()
            .map(|b| (s.bid_entity(b.id), b.utility))
            .collect();
        self.store.assert_is_a(&voter, "Party")?;
        self.store
            .assert_triple(&voter, "hasRole", Value::entity("Negotiator"))?;
        self.store
            .assert_triple(&entity, "hasActor", Value::entity(&voter))?;
        for (bid_entity, utility) in utilities {
            self.store.set_functional_value(
                &bid_entity,
                "hasUtility",
                Value::Int(utility as i64),
            )?;
        }
        self.transcript.push(TranscriptEvent {
            tick: now,
            intersection,
            session: seq,
            kind: TranscriptKind::Vote { vehicle, bid },
            tally: tally.iter().map(|(k, v)| (*k, *v)).collect(),
        });
        Ok(tally)
    }

    /// The bid minimizing this vehicle's cost:
    /// `weight_wait * expected_wait + weight_turns * turns_remaining +
    /// weight_distance * distance_remaining`, where the expected wait is zero
    /// when the bid turns the approach light passable and the full phase
    /// duration otherwise. Ties go to the smallest bid id.
    pub fn choose_bid(
        &self,
        ctx: &ApproachContext,
        session: SessionId,
        preference: &Preference,
    ) -> Result<BidId, EngineError> {
        let s = self
            .sessions
            .get(&session)
            .ok_or(EngineError::UnknownSession)?;
        if !s.is_open() {
            return Err(EngineError::SessionClosed);
        }
        let covered = s.bids.iter().all(|b| {
            b.configuration
                .assignments
                .iter()
                .any(|(l, _)| *l == ctx.approach_light)
        });
        if !covered {
            return Err(EngineError::NotAnApproach(ctx.approach_light));
        }
        let cost = |bid: &Bid| -> f64 {
            let state = bid
                .configuration
                .state_of(ctx.approach_light)
                .expect("approach covered");
            let wait = if state.permits(ctx.movement) {
                0.0
            } else {
                ctx.red_penalty_s as f64
            };
            preference.weight_wait * wait
                + preference.weight_turns * ctx.turns_remaining as f64
                + preference.weight_distance * ctx.distance_remaining_m
        };
        let mut best: Option<(&Bid, f64)> = None;
        for bid in &s.bids {
            let c = cost(bid);
            match &best {
                Some((_, bc)) if c >= *bc => {}
                _ => best = Some((bid, c)),
            }
        }
        Ok(best.expect("sessions hold at least two bids").0.id)
    }

    /// Close at or after the apply tick: freeze the tally, pick the argmax
    /// winner (smallest id on ties) and mirror the agreement-rule record.
    pub fn close_session(&mut self, session: SessionId, now: Tick) -> Result<Outcome, EngineError> {
        let s = self
            .sessions
            .get_mut(&session)
            .ok_or(EngineError::UnknownSession)?;
        if !s.is_open() {
            return Err(EngineError::SessionClosed);
        }
        if now < s.apply_tick {
            return Err(EngineError::CloseBeforeApplyTick);
        }
        let tally = s.tally();
        let winner = s
            .bids
            .iter()
            .map(|b| b.id)
            .max_by_key(|id| (tally[id], std::cmp::Reverse(*id)))
            .expect("sessions hold at least two bids");
        let outcome = Outcome {
            winner,
            tally: tally.iter().map(|(k, v)| (*k, *v)).collect(),
            total_votes: tally.values().sum(),
        };
        s.state = SessionState::Closed(outcome.clone());

        let entity = s.entity();
        let rule_entity = format!("{entity}_rule");
        let mediator = s.mediator.clone();
        let voters: Vec<String> = s.votes.keys().map(|v| v.to_string()).collect();
        let bid_entities: Vec<String> = s.bids.iter().map(|b| s.bid_entity(b.id)).collect();
        let winner_entity = s.bid_entity(winner);
        let intersection = s.intersection;
        let seq = s.seq;

        self.store
            .assert_is_a(&rule_entity, "TrafficLightSignAgreementRule")?;
        self.store
            .assert_triple(&rule_entity, "hasRoleInput", Value::entity(&mediator))?;
        for voter in voters {
            self.store
                .assert_triple(&rule_entity, "hasRoleInput", Value::entity(&voter))?;
        }
        for bid_entity in &bid_entities {
            self.store.assert_triple(
                &rule_entity,
                "hasAttributeInput",
                Value::entity(bid_entity),
            )?;
        }
        self.store.assert_triple(
            &rule_entity,
            "hasAttributeOutput",
            Value::entity(&winner_entity),
        )?;

        self.open_by_intersection.remove(&intersection);
        self.transcript.push(TranscriptEvent {
            tick: now,
            intersection,
            session: seq,
            kind: TranscriptKind::Close { winner },
            tally: outcome.tally.clone(),
        });
        Ok(outcome)
    }
}
