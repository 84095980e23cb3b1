//! Discrete-time world: segments, signalized intersections with phase
//! timers, constant-speed vehicles on fixed routes.
//!
//! One tick is one second. A vehicle either advances exactly `speed` metres
//! along its route or spends the whole tick waiting at a red light, so
//! `travel_time = route_length/speed + waits` holds to within one tick of
//! quantization. Vehicles may overlap — there is no car-following model;
//! times depend only on lengths, speeds and signal waits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::types::{
    Configuration, ConfigurationError, ConflictMatrix, IntersectionId, LightId, LightState,
    Movement, NodeId, SegmentId, Tick, VehicleId,
};

/// Stopped vehicles within this distance of the stop line count as queued.
pub const QUEUE_DETECTION_RADIUS_M: f64 = 200.0;

/// Congestion-adjusted phase durations are capped at this multiple of the
/// base duration.
pub const MAX_DURATION_FACTOR: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    OneWay,
    TwoWay,
}

/// A directed stretch of road; traffic flows from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadSegment {
    pub id: SegmentId,
    pub from: NodeId,
    pub to: NodeId,
    pub length_m: f64,
    pub lanes: u32,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficLight {
    pub id: LightId,
    pub state: LightState,
}

/// One incoming road and the light that controls it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Approach {
    pub segment: SegmentId,
    pub light: LightId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub id: IntersectionId,
    pub node: NodeId,
    pub approaches: Vec<Approach>,
    pub conflicts: ConflictMatrix,
    pub base_duration_s: u32,
    pub congestion_gain_s: f64,
    /// Duration of the phase currently showing.
    pub phase_duration_s: u32,
    /// Tick at which the current phase ends and the cycle advances.
    pub phase_expires_at: Tick,
    /// The alternation cycle (normally the two complementary phases).
    pub cycle: Vec<Configuration>,
    pub cycle_pos: usize,
}

impl Intersection {
    pub fn lights(&self) -> Vec<LightId> {
        self.approaches.iter().map(|a| a.light).collect()
    }

    pub fn light_for_segment(&self, segment: SegmentId) -> Option<LightId> {
        self.approaches
            .iter()
            .find(|a| a.segment == segment)
            .map(|a| a.light)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: VehicleId,
    pub route: Vec<SegmentId>,
    /// Constant for the whole trip.
    pub speed_mps: f64,
    pub departure_tick: Tick,
    /// Metres covered along the route so far.
    pub distance_m: f64,
    pub arrival_tick: Option<Tick>,
    /// Whole seconds spent waiting at red or amber lights.
    pub wait_s: u64,
    pub waits_by_intersection: BTreeMap<IntersectionId, u64>,
    pub blocked: bool,
}

impl Vehicle {
    pub fn new(id: VehicleId, route: Vec<SegmentId>, speed_mps: f64, departure_tick: Tick) -> Self {
        Vehicle {
            id,
            route,
            speed_mps,
            departure_tick,
            distance_m: 0.0,
            arrival_tick: None,
            wait_s: 0,
            waits_by_intersection: BTreeMap::new(),
            blocked: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "event")]
pub enum EventKind {
    Depart,
    Stop { at: IntersectionId },
    Go,
    Cross { at: IntersectionId },
    Arrive,
}

/// One line of the simulation event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimEvent {
    pub tick: Tick,
    pub vehicle: VehicleId,
    #[serde(flatten)]
    pub kind: EventKind,
}

pub fn events_to_jsonl(events: &[SimEvent]) -> String {
    events
        .iter()
        .map(|e| serde_json::to_string(e).expect("event serializes"))
        .fold(String::new(), |mut acc, line| {
            acc.push_str(&line);
            acc.push('\n');
            acc
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("unknown intersection {0}")]
    UnknownIntersection(IntersectionId),
    #[error("unknown vehicle {0}")]
    UnknownVehicle(VehicleId),
    #[error(transparent)]
    Configuration(#[from] ConfigurationError),
}

/// Conflicting simultaneous greens, if any; checked by the harness each tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafetyViolation {
    pub intersection: IntersectionId,
    pub a: LightId,
    pub b: LightId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub clock: Tick,
    pub seed: u64,
    pub nodes: BTreeMap<NodeId, Node>,
    pub segments: BTreeMap<SegmentId, RoadSegment>,
    pub lights: BTreeMap<LightId, TrafficLight>,
    pub intersections: BTreeMap<IntersectionId, Intersection>,
    pub vehicles: BTreeMap<VehicleId, Vehicle>,
}

impl World {
    pub fn intersection_at(&self, node: NodeId) -> Option<&Intersection> {
        self.intersections.values().find(|i| i.node == node)
    }

    pub fn route_length(&self, vehicle: &Vehicle) -> f64 {
        vehicle
            .route
            .iter()
            .map(|s| self.segments[s].length_m)
            .sum()
    }

    /// (segment index, offset metres) derived from the covered distance.
    pub fn position(&self, vehicle: &Vehicle) -> (usize, f64) {
        let mut start = 0.0;
        for (i, seg) in vehicle.route.iter().enumerate() {
            let len = self.segments[seg].length_m;
            if vehicle.distance_m < start + len || i == vehicle.route.len() - 1 {
                return (i, (vehicle.distance_m - start).max(0.0).min(len));
            }
            start += len;
        }
        (0, 0.0)
    }

    /// Ticks from departure to arrival, or `None` while still en route.
    pub fn travel_time(&self, vehicle: VehicleId) -> Result<Option<Tick>, WorldError> {
        let v = self
            .vehicles
            .get(&vehicle)
            .ok_or(WorldError::UnknownVehicle(vehicle))?;
        Ok(v.arrival_tick.map(|a| a - v.departure_tick))
    }

    /// Travel time if no light ever stopped the vehicle, rounded up.
    pub fn free_flow_time(&self, vehicle: &Vehicle) -> Tick {
        (self.route_length(vehicle) / vehicle.speed_mps).ceil() as Tick
    }

    pub fn all_arrived(&self) -> bool {
        self.vehicles.values().all(|v| v.arrival_tick.is_some())
    }

    /// Turn direction from one segment to the next, from node geometry.
    pub fn movement(&self, from: SegmentId, to: SegmentId) -> Movement {
        let a = &self.segments[&from];
        let b = &self.segments[&to];
        let (ax, ay) = {
            let f = &self.nodes[&a.from];
            let t = &self.nodes[&a.to];
            (t.x - f.x, t.y - f.y)
        };
        let (bx, by) = {
            let f = &self.nodes[&b.from];
            let t = &self.nodes[&b.to];
            (t.x - f.x, t.y - f.y)
        };
        let cross = ax * by - ay * bx;
        if cross > 1e-9 {
            Movement::Left
        } else if cross < -1e-9 {
            Movement::Right
        } else {
            Movement::Straight
        }
    }

    /// Advance the world by one second. Phase timers fire first, then every
    /// un-arrived vehicle either moves `speed` metres or waits a full tick at
    /// a blocking light. Returns the events of this tick.
    pub fn step(&mut self) -> Vec<SimEvent> {
        let now = self.clock;
        let mut events = Vec::new();

        // phase timers: flip to the next cycle phase at expiry
        let due: Vec<IntersectionId> = self
            .intersections
            .values()
            .filter(|i| i.phase_expires_at == now && !i.cycle.is_empty())
            .map(|i| i.id)
            .collect();
        for id in due {
            self.advance_cycle(id, now);
        }

        // vehicles move against the states now showing
        let mut vehicles = std::mem::take(&mut self.vehicles);
        for vehicle in vehicles.values_mut() {
            if vehicle.arrival_tick.is_some() || now < vehicle.departure_tick {
                continue;
            }
            if now == vehicle.departure_tick {
                events.push(SimEvent {
                    tick: now,
                    vehicle: vehicle.id,
                    kind: EventKind::Depart,
                });
            }
            self.move_vehicle(vehicle, now, &mut events);
        }
        self.vehicles = vehicles;

        self.clock = now + 1;
        events
    }

    fn move_vehicle(&self, vehicle: &mut Vehicle, now: Tick, events: &mut Vec<SimEvent>) {
        let total = self.route_length(vehicle);
        let target = (vehicle.distance_m + vehicle.speed_mps).min(total);

        // signalized boundaries crossed by this advance, in order
        let mut crossings = Vec::new();
        let mut blocker: Option<IntersectionId> = None;
        let mut cum = 0.0;
        for (i, seg) in vehicle.route.iter().enumerate() {
            cum += self.segments[seg].length_m;
            if cum > target {
                break;
            }
            if cum <= vehicle.distance_m {
                continue;
            }
            // boundary at `cum` is crossed; the final boundary is the
            // destination and has no light to satisfy
            let Some(next_seg) = vehicle.route.get(i + 1) else {
                break;
            };
            let node = self.segments[seg].to;
            let Some(intersection) = self.intersection_at(node) else {
                continue;
            };
            let Some(light) = intersection.light_for_segment(*seg) else {
                continue;
            };
            let movement = self.movement(*seg, *next_seg);
            if self.lights[&light].state.permits(movement) {
                crossings.push(intersection.id);
            } else {
                blocker = Some(intersection.id);
                break;
            }
        }

        if let Some(at) = blocker {
            if !vehicle.blocked {
                vehicle.blocked = true;
                events.push(SimEvent {
                    tick: now,
                    vehicle: vehicle.id,
                    kind: EventKind::Stop { at },
                });
            }
            vehicle.wait_s += 1;
            *vehicle.waits_by_intersection.entry(at).or_insert(0) += 1;
            return;
        }

        if vehicle.blocked {
            vehicle.blocked = false;
            events.push(SimEvent {
                tick: now,
                vehicle: vehicle.id,
                kind: EventKind::Go,
            });
        }
        for at in crossings {
            events.push(SimEvent {
                tick: now,
                vehicle: vehicle.id,
                kind: EventKind::Cross { at },
            });
        }
        vehicle.distance_m = target;
        if vehicle.distance_m >= total {
            vehicle.arrival_tick = Some(now + 1);
            events.push(SimEvent {
                tick: now,
                vehicle: vehicle.id,
                kind: EventKind::Arrive,
            });
        }
    }

    fn advance_cycle(&mut self, id: IntersectionId, now: Tick) {
        let intersection = self.intersections.get_mut(&id).expect("listed id");
        intersection.cycle_pos = (intersection.cycle_pos + 1) % intersection.cycle.len();
        let config = intersection.cycle[intersection.cycle_pos].clone();
        intersection.phase_duration_s = intersection.base_duration_s;
        intersection.phase_expires_at = now + intersection.base_duration_s as Tick;
        for (light, state) in &config.assignments {
            self.lights.get_mut(light).expect("listed light").state = *state;
        }
    }

    /// Queued (speed-blocked) vehicles within 200 m upstream of each
    /// approach light, in approach order.
    pub fn congestion(
        &self,
        intersection: IntersectionId,
    ) -> Result<Vec<(LightId, usize)>, WorldError> {
        let ix = self
            .intersections
            .get(&intersection)
            .ok_or(WorldError::UnknownIntersection(intersection))?;
        let mut counts: Vec<(LightId, usize)> =
            ix.approaches.iter().map(|a| (a.light, 0)).collect();
        for vehicle in self.vehicles.values() {
            if !vehicle.blocked || vehicle.arrival_tick.is_some() {
                continue;
            }
            let (seg_idx, offset) = self.position(vehicle);
            let seg = vehicle.route[seg_idx];
            let remaining = self.segments[&seg].length_m - offset;
            if remaining > QUEUE_DETECTION_RADIUS_M {
                continue;
            }
            if let Some(pos) = ix.approaches.iter().position(|a| a.segment == seg) {
                counts[pos].1 += 1;
            }
        }
        Ok(counts)
    }

    /// Congestion-adjusted phase duration:
    /// `base + gain * max_queue`, clamped to `[base, 4*base]`.
    pub fn adjusted_duration(&self, intersection: IntersectionId) -> Result<u32, WorldError> {
        let ix = self
            .intersections
            .get(&intersection)
            .ok_or(WorldError::UnknownIntersection(intersection))?;
        let max_queue = self
            .congestion(intersection)?
            .into_iter()
            .map(|(_, n)| n)
            .max()
            .unwrap_or(0);
        let raw = ix.base_duration_s as f64 + ix.congestion_gain_s * max_queue as f64;
        let max = ix.base_duration_s * MAX_DURATION_FACTOR;
        Ok((raw.round() as u32).clamp(ix.base_duration_s, max))
    }

    /// Atomically set an intersection's lights to `config` for `duration_s`
    /// seconds (clamped to the legal range). The cycle position is synced
    /// when the configuration is one of the cycle phases, so later timer
    /// flips alternate correctly.
    pub fn apply_configuration(
        &mut self,
        intersection: IntersectionId,
        config: &Configuration,
        duration_s: u32,
    ) -> Result<(), WorldError> {
        let ix = self
            .intersections
            .get(&intersection)
            .ok_or(WorldError::UnknownIntersection(intersection))?;
        config.validate_for(&ix.lights(), &ix.conflicts)?;
        let clamped =
            duration_s.clamp(ix.base_duration_s, ix.base_duration_s * MAX_DURATION_FACTOR);
        let pos = ix.cycle.iter().position(|c| c == config);
        let expires = self.clock + clamped as Tick;
        let ix = self.intersections.get_mut(&intersection).expect("checked");
        ix.phase_duration_s = clamped;
        ix.phase_expires_at = expires;
        if let Some(p) = pos {
            ix.cycle_pos = p;
        }
        for (light, state) in &config.assignments {
            self.lights.get_mut(light).expect("validated").state = *state;
        }
        Ok(())
    }

    /// Conflicting approaches that are simultaneously full green.
    pub fn safety_violations(&self) -> Vec<SafetyViolation> {
        let mut out = Vec::new();
        for ix in self.intersections.values() {
            let lights = ix.lights();
            for i in 0..lights.len() {
                for j in (i + 1)..lights.len() {
                    if ix.conflicts.conflicts(i, j)
                        && self.lights[&lights[i]].state.is_full_green()
                        && self.lights[&lights[j]].state.is_full_green()
                    {
                        out.push(SafetyViolation {
                            intersection: ix.id,
                            a: lights[i],
                            b: lights[j],
                        });
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world serializes")
    }

    pub fn from_json(s: &str) -> Result<World, serde_json::Error> {
        serde_json::from_str(s)
    }
}
