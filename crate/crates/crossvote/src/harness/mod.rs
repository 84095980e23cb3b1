//! Experiment harness: seeded scenarios, a fixed-cycle baseline arm, a
//! negotiation arm, and paired comparisons.
//!
//! Both arms of a paired experiment consume clones of the same generated
//! world and run until every vehicle arrives or the tick cap (ten times the
//! slowest free-flow trip) fires; capped vehicles are reported separately.

pub mod golden;
mod report;

pub use golden::{GoldenOutcome, ScenarioScript, ScriptedIntersection};
pub use report::{compare, ComparisonStats, OutputFormat, Report, SingleArmReport};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::negotiation::{
    generate_bids, EngineError, IntersectionLayout, NegotiationEngine, Party, Preference,
    SessionId, TranscriptEvent,
};
use crate::sim::{
    generate_scenario, IntersectionId, Movement, ScenarioError, ScenarioParams, SimEvent, Tick,
    VehicleId, World, WorldError,
};

/// Vehicles vote once their next signalized intersection is this close.
pub const APPROACH_WINDOW_M: f64 = 500.0;
/// Revisions allowed after the initial sincere vote, per session.
pub const MAX_VOTE_REVISIONS: u32 = 1;
/// Runs stop after this multiple of the slowest free-flow trip.
pub const TICK_CAP_FACTOR: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Negotiate,
    Baseline,
    Paired,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Negotiate => "negotiate",
            Mode::Baseline => "baseline",
            Mode::Paired => "paired",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_experiments: u32,
    pub n_vehicles: u32,
    pub n_routes: u32,
    pub n_intersections: u32,
    pub radius_m: f64,
    pub seed: u64,
    pub base_duration_s: u32,
    pub congestion_gain: f64,
    pub phase_count: u32,
    pub mode: Mode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_experiments: 1,
            n_vehicles: 300,
            n_routes: 50,
            n_intersections: 10,
            radius_m: 10_000.0,
            seed: 0,
            base_duration_s: 20,
            congestion_gain: 5.0,
            phase_count: 2,
            mode: Mode::Paired,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.into()));
        if self.n_experiments == 0 {
            return bad("experiments must be positive");
        }
        if self.n_routes == 0 {
            return bad("routes must be positive");
        }
        if self.n_intersections == 0 {
            return bad("intersections must be positive");
        }
        if self.radius_m <= 0.0 {
            return bad("radius must be positive");
        }
        if self.base_duration_s == 0 {
            return bad("base duration must be positive");
        }
        if self.phase_count < 2 {
            return bad("phase count must be at least 2");
        }
        Ok(())
    }

    fn scenario_params(&self) -> ScenarioParams {
        ScenarioParams {
            n_vehicles: self.n_vehicles,
            n_routes: self.n_routes,
            n_intersections: self.n_intersections,
            radius_m: self.radius_m,
            base_duration_s: self.base_duration_s,
            congestion_gain_s: self.congestion_gain,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("negotiate and baseline arms saw different vehicle sets")]
    MismatchedVehicleSets,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Travel times and bookkeeping of one simulated arm.
#[derive(Debug, Clone)]
pub struct ArmOutcome {
    pub travel_times: BTreeMap<VehicleId, Tick>,
    pub capped: BTreeSet<VehicleId>,
    /// Ticks on which any two conflicting approaches were green together.
    pub safety_violation_ticks: u64,
    pub zero_vote_sessions: u64,
    pub events: Vec<SimEvent>,
    pub transcript: Vec<TranscriptEvent>,
    /// Final world state, with per-vehicle wait accumulators.
    pub world: World,
}

impl ArmOutcome {
    fn new(world: World) -> Self {
        ArmOutcome {
            travel_times: BTreeMap::new(),
            capped: BTreeSet::new(),
            safety_violation_ticks: 0,
            zero_vote_sessions: 0,
            events: Vec::new(),
            transcript: Vec::new(),
            world,
        }
    }
}

fn tick_cap(world: &World) -> Tick {
    let slowest = world
        .vehicles
        .values()
        .map(|v| v.departure_tick + world.free_flow_time(v))
        .max()
        .unwrap_or(0);
    (slowest.max(1)) * TICK_CAP_FACTOR
}

fn collect_outcome(outcome: &mut ArmOutcome) {
    for (id, v) in &outcome.world.vehicles {
        match v.arrival_tick {
            Some(arrival) => {
                outcome.travel_times.insert(*id, arrival - v.departure_tick);
            }
            None => {
                outcome.capped.insert(*id);
            }
        }
    }
}

/// Fixed-cycle arm: lights alternate on their base timers, nobody votes.
pub fn run_baseline(world: World) -> ArmOutcome {
    let cap = tick_cap(&world);
    let mut outcome = ArmOutcome::new(world);
    while !outcome.world.all_arrived() && outcome.world.clock < cap {
        if !outcome.world.safety_violations().is_empty() {
            outcome.safety_violation_ticks += 1;
        }
        let events = outcome.world.step();
        outcome.events.extend(events);
    }
    collect_outcome(&mut outcome);
    outcome
}

/// Options of the negotiation arm. Defaults follow the harness constants.
#[derive(Debug, Clone)]
pub struct NegotiateOptions {
    pub phase_count: u32,
    pub approach_window_m: f64,
    pub preference: Preference,
    pub max_revisions: u32,
}

impl Default for NegotiateOptions {
    fn default() -> Self {
        NegotiateOptions {
            phase_count: 2,
            approach_window_m: APPROACH_WINDOW_M,
            preference: Preference::default(),
            max_revisions: MAX_VOTE_REVISIONS,
        }
    }
}

/// The vehicle's view of its next signalized intersection, if within the
/// approach window.
pub(crate) fn approach_context(
    world: &World,
    vehicle: &crate::sim::Vehicle,
    window_m: f64,
) -> Option<(IntersectionId, crate::negotiation::ApproachContext)> {
    let mut cum = 0.0;
    let mut found = None;
    let mut turns_after = 0u32;
    for (i, seg) in vehicle.route.iter().enumerate() {
        cum += world.segments[seg].length_m;
        let Some(next_seg) = vehicle.route.get(i + 1) else {
            break;
        };
        if cum <= vehicle.distance_m {
            continue;
        }
        let movement = world.movement(*seg, *next_seg);
        let node = world.segments[seg].to;
        let signal = world
            .intersection_at(node)
            .and_then(|ix| ix.light_for_segment(*seg).map(|l| (ix, l)));
        if let (None, Some((ix, light))) = (&found, signal) {
            if cum - vehicle.distance_m > window_m {
                return None; // next signal is still too far out
            }
            found = Some((ix.id, light, movement, ix.phase_duration_s));
        } else if found.is_some() && movement != Movement::Straight {
            turns_after += 1;
        }
    }
    let (intersection, light, movement, phase_duration) = found?;
    let turns_remaining = turns_after + if movement == Movement::Straight { 0 } else { 1 };
    Some((
        intersection,
        crate::negotiation::ApproachContext {
            approach_light: light,
            movement,
            red_penalty_s: phase_duration,
            turns_remaining,
            distance_remaining_m: world.route_length(vehicle) - vehicle.distance_m,
        },
    ))
}

/// Negotiation arm: one session per intersection per phase. Sessions close at
/// their apply tick; a voted winner is applied with the congestion-adjusted
/// duration, while zero-vote sessions let the intersection keep alternating
/// on its timer. Vehicles in the approach window vote sincerely, with at most
/// one revision per session.
pub fn run_negotiate(
    mut world: World,
    options: &NegotiateOptions,
) -> Result<(ArmOutcome, NegotiationEngine), HarnessError> {
    let cap = tick_cap(&world);
    let mut events = Vec::new();
    let mut safety_violation_ticks = 0u64;
    let mut zero_vote_sessions = 0u64;
    let mut engine = NegotiationEngine::new();
    let mut revisions: BTreeMap<(SessionId, VehicleId), u32> = BTreeMap::new();

    let mediators: BTreeMap<IntersectionId, Party> = world
        .intersections
        .keys()
        .map(|id| (*id, Party::mediator(format!("mediator{}", id.0))))
        .collect();

    // initial sessions target each intersection's first phase expiry
    let intersection_ids: Vec<IntersectionId> = world.intersections.keys().copied().collect();
    for id in &intersection_ids {
        let ix = &world.intersections[id];
        let layout = IntersectionLayout::from(ix);
        let bids = generate_bids(&layout, options.phase_count)?;
        engine.open_session(
            &mediators[id],
            &layout,
            bids,
            world.clock,
            ix.phase_expires_at,
        )?;
    }

    while !world.all_arrived() && world.clock < cap {
        let now = world.clock;

        // close, apply and reopen due sessions
        for id in &intersection_ids {
            let Some(sid) = engine.open_session_for(*id) else {
                continue;
            };
            if engine.session(sid).expect("open session").apply_tick != now {
                continue;
            }
            let winner_config = {
                let session = engine.session(sid).expect("open session");
                let outcome_winner = session
                    .bids
                    .iter()
                    .map(|b| (b.id, b.configuration.clone()))
                    .collect::<BTreeMap<_, _>>();
                outcome_winner
            };
            let closed = engine.close_session(sid, now)?;
            let next_apply = if closed.total_votes > 0 {
                let duration = world.adjusted_duration(*id)?;
                world.apply_configuration(*id, &winner_config[&closed.winner], duration)?;
                world.intersections[id].phase_expires_at
            } else {
                // nobody voted: the timer flip inside step() alternates the
                // phase at base duration
                zero_vote_sessions += 1;
                now + world.intersections[id].base_duration_s as Tick
            };
            let layout = IntersectionLayout::from(&world.intersections[id]);
            let bids = generate_bids(&layout, options.phase_count)?;
            engine.open_session(&mediators[id], &layout, bids, now, next_apply)?;
        }

        // votes, in vehicle id order
        let vehicle_ids: Vec<VehicleId> = world.vehicles.keys().copied().collect();
        for vid in vehicle_ids {
            let vehicle = &world.vehicles[&vid];
            if vehicle.arrival_tick.is_some() || now < vehicle.departure_tick {
                continue;
            }
            let Some((intersection, ctx)) =
                approach_context(&world, vehicle, options.approach_window_m)
            else {
                continue;
            };
            let Some(sid) = engine.open_session_for(intersection) else {
                continue;
            };
            let best = engine.choose_bid(&ctx, sid, &options.preference)?;
            let current = engine
                .session(sid)
                .expect("open session")
                .votes
                .get(&vid)
                .copied();
            match current {
                None => {
                    engine.cast_vote(sid, now, vid, best)?;
                }
                Some(held) if held != best => {
                    let used = revisions.entry((sid, vid)).or_insert(0);
                    if *used < options.max_revisions {
                        *used += 1;
                        engine.cast_vote(sid, now, vid, best)?;
                    }
                }
                Some(_) => {}
            }
        }

        if !world.safety_violations().is_empty() {
            safety_violation_ticks += 1;
        }
        events.extend(world.step());
    }

    let mut outcome = ArmOutcome::new(world);
    outcome.events = events;
    outcome.safety_violation_ticks = safety_violation_ticks;
    outcome.zero_vote_sessions = zero_vote_sessions;
    outcome.transcript = engine.transcript().to_vec();
    collect_outcome(&mut outcome);
    Ok((outcome, engine))
}

/// Both arms on clones of the same world.
pub struct PairedRun {
    pub negotiate: ArmOutcome,
    pub baseline: ArmOutcome,
    /// The two arms consumed byte-identical worlds.
    pub worlds_identical: bool,
}

pub fn run_paired(world: &World, options: &NegotiateOptions) -> Result<PairedRun, HarnessError> {
    let negotiate_world = world.clone();
    let baseline_world = world.clone();
    let worlds_identical = negotiate_world.to_json() == baseline_world.to_json();
    let (negotiate, _) = run_negotiate(negotiate_world, options)?;
    let baseline = run_baseline(baseline_world);
    Ok(PairedRun {
        negotiate,
        baseline,
        worlds_identical,
    })
}

/// Namespace per-experiment vehicle ids as `e<exp>/<vehicle>`.
fn scoped(experiment: u32, id: VehicleId) -> String {
    format!("e{experiment}/{id}")
}

/// Run the configured number of paired experiments and aggregate one report.
/// Vehicles capped in either arm are excluded from the comparison and
/// reported in the capped counters.
pub fn run_paired_experiments(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    config.validate()?;
    let options = NegotiateOptions {
        phase_count: config.phase_count,
        ..Default::default()
    };
    let mut negotiate_times = BTreeMap::new();
    let mut baseline_times = BTreeMap::new();
    let (mut capped_negotiate, mut capped_baseline) = (0u64, 0u64);
    let mut zero_vote_sessions = 0u64;
    let mut safety_ticks = 0u64;
    for e in 0..config.n_experiments {
        let world = generate_scenario(config.seed + e as u64, &config.scenario_params())?;
        let run = run_paired(&world, &options)?;
        capped_negotiate += run.negotiate.capped.len() as u64;
        capped_baseline += run.baseline.capped.len() as u64;
        zero_vote_sessions += run.negotiate.zero_vote_sessions;
        safety_ticks += run.negotiate.safety_violation_ticks + run.baseline.safety_violation_ticks;
        let skip: BTreeSet<VehicleId> = run
            .negotiate
            .capped
            .union(&run.baseline.capped)
            .copied()
            .collect();
        for (vid, t) in &run.negotiate.travel_times {
            if !skip.contains(vid) {
                negotiate_times.insert(scoped(e, *vid), *t);
            }
        }
        for (vid, t) in &run.baseline.travel_times {
            if !skip.contains(vid) {
                baseline_times.insert(scoped(e, *vid), *t);
            }
        }
    }
    if safety_ticks > 0 {
        return Err(HarnessError::Config(format!(
            "safety invariant broken on {safety_ticks} ticks"
        )));
    }
    let stats = compare(&negotiate_times, &baseline_times)?;
    Ok(Report {
        seed: config.seed,
        config: config.clone(),
        compared_vehicles: stats.compared_vehicles,
        gained: stats.gained,
        unchanged: stats.unchanged,
        lost: stats.lost,
        pct_gained: stats.pct_gained,
        pct_unchanged: stats.pct_unchanged,
        pct_lost: stats.pct_lost,
        avg_gain_s: stats.avg_gain_s,
        capped_negotiate,
        capped_baseline,
        zero_vote_sessions,
        per_vehicle_deltas: stats.per_vehicle_deltas,
    })
}

/// Run a single arm across the configured experiments.
pub fn run_single_arm(config: &ExperimentConfig) -> Result<SingleArmReport, HarnessError> {
    config.validate()?;
    let options = NegotiateOptions {
        phase_count: config.phase_count,
        ..Default::default()
    };
    let mut travel_times = BTreeMap::new();
    let mut capped = 0u64;
    for e in 0..config.n_experiments {
        let world = generate_scenario(config.seed + e as u64, &config.scenario_params())?;
        let outcome = match config.mode {
            Mode::Baseline => run_baseline(world),
            Mode::Negotiate => run_negotiate(world, &options)?.0,
            Mode::Paired => {
                return Err(HarnessError::Config(
                    "single-arm runner cannot run paired mode".into(),
                ))
            }
        };
        capped += outcome.capped.len() as u64;
        for (vid, t) in outcome.travel_times {
            travel_times.insert(scoped(e, vid), t);
        }
    }
    let arrived = travel_times.len() as u64;
    let mean = if arrived > 0 {
        travel_times.values().sum::<u64>() as f64 / arrived as f64
    } else {
        0.0
    };
    Ok(SingleArmReport {
        seed: config.seed,
        config: config.clone(),
        arrived,
        capped,
        mean_travel_time_s: mean,
        travel_times,
    })
}
