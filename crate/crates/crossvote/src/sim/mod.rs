//! Deterministic discrete-time traffic world.

pub mod scenario;
pub mod types;
pub mod world;

pub use scenario::{generate_scenario, ScenarioError, ScenarioParams};
pub use types::{
    enumerate_phases, Configuration, ConfigurationError, ConflictMatrix, IntersectionId, LightId,
    LightState, Movement, NodeId, SegmentId, Tick, VehicleId,
};
pub use world::{
    events_to_jsonl, Approach, Direction, EventKind, Intersection, Node, RoadSegment,
    SafetyViolation, SimEvent, TrafficLight, Vehicle, World, WorldError, MAX_DURATION_FACTOR,
    QUEUE_DETECTION_RADIUS_M,
};
