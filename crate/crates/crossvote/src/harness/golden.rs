//! Scripted four-intersection replay scenario.
//!
//! One tracked car drives a straight route through four standard crossings.
//! Each crossing runs a single scripted session: phantom voters cast a fixed
//! tally, the tracked car votes sincerely through the normal engine path,
//! and the winner is applied at the scripted tick. After that the lights
//! alternate on their timers. With the stock script the winners come out
//! (bid1, bid2, bid1, bid2) and the car waits only at the third crossing.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{approach_context, HarnessError};
use crate::negotiation::{
    generate_bids, BidId, IntersectionLayout, NegotiationEngine, Party, Preference, TranscriptEvent,
};
use crate::sim::{
    enumerate_phases, ConflictMatrix, Direction, Intersection, IntersectionId, LightId, NodeId,
    RoadSegment, SegmentId, Tick, TrafficLight, Vehicle, VehicleId, World,
};
use crate::sim::{Approach, LightState, Node};

/// The tracked car.
pub const CAR: VehicleId = VehicleId(1);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedIntersection {
    /// Approach index (0..4) the tracked car arrives on.
    pub car_approach: usize,
    /// Tick at which the session closes and the winner is applied.
    pub apply_tick: Tick,
    /// Extra votes cast by phantom cars for (bid1, bid2).
    pub phantom_votes: (u32, u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub speed_mps: f64,
    pub segment_m: f64,
    pub base_duration_s: u32,
    pub intersections: Vec<ScriptedIntersection>,
}

impl ScenarioScript {
    /// The stock script: tallies (3,2), (2,4), (4,3), (0,3) counting the
    /// tracked car's own sincere vote.
    pub fn standard() -> Self {
        ScenarioScript {
            speed_mps: 10.0,
            segment_m: 400.0,
            base_duration_s: 30,
            intersections: vec![
                ScriptedIntersection {
                    car_approach: 0,
                    apply_tick: 35,
                    phantom_votes: (2, 2),
                },
                ScriptedIntersection {
                    car_approach: 1,
                    apply_tick: 75,
                    phantom_votes: (2, 3),
                },
                ScriptedIntersection {
                    car_approach: 1,
                    apply_tick: 115,
                    phantom_votes: (4, 2),
                },
                ScriptedIntersection {
                    car_approach: 1,
                    apply_tick: 175,
                    phantom_votes: (0, 2),
                },
            ],
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("script serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenOutcome {
    /// Winning bid per intersection, in route order.
    pub winners: Vec<BidId>,
    /// Final (bid, votes) tallies per intersection.
    pub tallies: Vec<Vec<(BidId, u32)>>,
    pub car_travel_time_s: Tick,
    pub car_wait_s: u64,
    pub car_waits_by_intersection: BTreeMap<IntersectionId, u64>,
    pub free_flow_time_s: Tick,
    pub safety_violation_ticks: u64,
    #[serde(skip)]
    pub transcript: Vec<TranscriptEvent>,
}

/// The car runs the route, voting through the normal engine path; phantom
/// votes land right after each session opens.
pub fn run_golden(script: &ScenarioScript) -> Result<GoldenOutcome, HarnessError> {
    let mut world = build_world(script);
    let mut engine = NegotiationEngine::new();
    let preference = Preference::default();

    let intersection_ids: Vec<IntersectionId> = world.intersections.keys().copied().collect();
    let mut sessions = Vec::new();
    for (i, id) in intersection_ids.iter().enumerate() {
        let scripted = &script.intersections[i];
        let mediator = Party::mediator(format!("mediator{}", id.0));
        let layout = IntersectionLayout::from(&world.intersections[id]);
        let bids = generate_bids(&layout, 2)?;
        let sid = engine.open_session(&mediator, &layout, bids, 0, scripted.apply_tick)?;
        for k in 0..scripted.phantom_votes.0 {
            engine.cast_vote(sid, 0, VehicleId(900 + 10 * i as u32 + k), BidId(1))?;
        }
        for k in 0..scripted.phantom_votes.1 {
            engine.cast_vote(sid, 0, VehicleId(950 + 10 * i as u32 + k), BidId(2))?;
        }
        sessions.push(sid);
    }

    let cap = 100 * script.intersections.len() as Tick * script.base_duration_s as Tick;
    let mut winners: BTreeMap<IntersectionId, BidId> = BTreeMap::new();
    let mut tallies: BTreeMap<IntersectionId, Vec<(BidId, u32)>> = BTreeMap::new();
    let mut safety_violation_ticks = 0u64;

    while !world.all_arrived() && world.clock < cap {
        let now = world.clock;

        for (i, id) in intersection_ids.iter().enumerate() {
            if script.intersections[i].apply_tick != now {
                continue;
            }
            let sid = sessions[i];
            let configs: BTreeMap<BidId, _> = engine
                .session(sid)
                .expect("scripted session")
                .bids
                .iter()
                .map(|b| (b.id, b.configuration.clone()))
                .collect();
            let outcome = engine.close_session(sid, now)?;
            let duration = world.adjusted_duration(*id)?;
            world.apply_configuration(*id, &configs[&outcome.winner], duration)?;
            winners.insert(*id, outcome.winner);
            tallies.insert(*id, outcome.tally);
        }

        // the tracked car votes once per session when in the window
        let car = &world.vehicles[&CAR];
        if car.arrival_tick.is_none() && now >= car.departure_tick {
            if let Some((intersection, ctx)) =
                approach_context(&world, car, super::APPROACH_WINDOW_M)
            {
                if let Some(sid) = engine.open_session_for(intersection) {
                    let already = engine
                        .session(sid)
                        .expect("open session")
                        .votes
                        .contains_key(&CAR);
                    if !already {
                        let best = engine.choose_bid(&ctx, sid, &preference)?;
                        engine.cast_vote(sid, now, CAR, best)?;
                    }
                }
            }
        }

        if !world.safety_violations().is_empty() {
            safety_violation_ticks += 1;
        }
        world.step();
    }

    let car = &world.vehicles[&CAR];
    let travel = world
        .travel_time(CAR)?
        .ok_or_else(|| HarnessError::Config("tracked car never arrived".into()))?;
    Ok(GoldenOutcome {
        winners: intersection_ids.iter().map(|id| winners[id]).collect(),
        tallies: intersection_ids
            .iter()
            .map(|id| tallies[id].clone())
            .collect(),
        car_travel_time_s: travel,
        car_wait_s: car.wait_s,
        car_waits_by_intersection: car.waits_by_intersection.clone(),
        free_flow_time_s: world.free_flow_time(car),
        safety_violation_ticks,
        transcript: engine.transcript().to_vec(),
    })
}

/// A straight west-to-east route; crossing `i` sits at the end of route
/// segment `i`, its lights numbered `4i+1..=4i+4` in approach order. The
/// car's approach slot holds the route segment; the rest are stubs.
fn build_world(script: &ScenarioScript) -> World {
    let n = script.intersections.len();
    let mut nodes = BTreeMap::new();
    let mut segments = BTreeMap::new();
    let mut lights = BTreeMap::new();
    let mut intersections = BTreeMap::new();

    for i in 0..=(n + 1) {
        let id = NodeId(i as u32);
        nodes.insert(
            id,
            Node {
                id,
                x: i as f64 * script.segment_m,
                y: 0.0,
            },
        );
    }
    let mut route = Vec::new();
    for i in 0..=n {
        let id = SegmentId(i as u32 + 1);
        segments.insert(
            id,
            RoadSegment {
                id,
                from: NodeId(i as u32),
                to: NodeId(i as u32 + 1),
                length_m: script.segment_m,
                lanes: 1,
                direction: Direction::OneWay,
            },
        );
        route.push(id);
    }

    let mut next_node = 100u32;
    let mut next_seg = 100u32;
    for (i, scripted) in script.intersections.iter().enumerate() {
        let id = IntersectionId(i as u32 + 1);
        let node = NodeId(i as u32 + 1);
        let mut approaches = Vec::new();
        for a in 0..4 {
            let light = LightId(4 * i as u32 + a as u32 + 1);
            lights.insert(
                light,
                TrafficLight {
                    id: light,
                    state: LightState::Red,
                },
            );
            let segment = if a == scripted.car_approach {
                route[i]
            } else {
                // stub feeder, never traversed
                let stub_node = NodeId(next_node);
                next_node += 1;
                nodes.insert(
                    stub_node,
                    Node {
                        id: stub_node,
                        x: nodes[&node].x,
                        y: if a % 2 == 0 { 300.0 } else { -300.0 },
                    },
                );
                let stub = SegmentId(next_seg);
                next_seg += 1;
                segments.insert(
                    stub,
                    RoadSegment {
                        id: stub,
                        from: stub_node,
                        to: node,
                        length_m: 300.0,
                        lanes: 1,
                        direction: Direction::OneWay,
                    },
                );
                stub
            };
            approaches.push(Approach { segment, light });
        }
        let conflicts = ConflictMatrix::standard_crossing();
        let light_ids: Vec<LightId> = approaches.iter().map(|a| a.light).collect();
        let cycle = enumerate_phases(&light_ids, &conflicts);
        // start on phase 1 and hold it until the scripted apply tick
        let initial = cycle[0].clone();
        for (l, s) in &initial.assignments {
            lights.get_mut(l).expect("listed").state = *s;
        }
        intersections.insert(
            id,
            Intersection {
                id,
                node,
                approaches,
                conflicts,
                base_duration_s: script.base_duration_s,
                congestion_gain_s: 0.0,
                phase_duration_s: script.base_duration_s,
                phase_expires_at: scripted.apply_tick,
                cycle,
                cycle_pos: 0,
            },
        );
    }

    let mut world = World {
        clock: 0,
        seed: 0,
        nodes,
        segments,
        lights,
        intersections,
        vehicles: BTreeMap::new(),
    };
    world
        .vehicles
        .insert(CAR, Vehicle::new(CAR, route, script.speed_mps, 0));
    world
}
