//! Seeded scenario generation: a rectangular grid within the requested
//! radius, four-light crossings, and randomized routes and vehicles.
//!
//! Route demand is deliberately asymmetric: a share of routes follows an
//! east-west corridor row, so some approaches carry more traffic than
//! others. Same seed, same params, byte-identical world.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::types::{ConflictMatrix, IntersectionId, LightId, NodeId, SegmentId, VehicleId};
use super::world::{
    Approach, Direction, Intersection, Node, RoadSegment, TrafficLight, Vehicle, World,
};
use std::collections::BTreeMap;

/// Share of routes that follow the corridor row.
pub const CORRIDOR_ROUTE_SHARE: f64 = 0.6;
/// Vehicles depart uniformly within this window.
pub const DEPARTURE_WINDOW_S: u64 = 60;
/// Constant per-vehicle speeds are drawn from this range (m/s).
pub const SPEED_RANGE_MPS: (f64, f64) = (10.0, 20.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub n_vehicles: u32,
    pub n_routes: u32,
    pub n_intersections: u32,
    pub radius_m: f64,
    pub base_duration_s: u32,
    pub congestion_gain_s: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            n_vehicles: 300,
            n_routes: 50,
            n_intersections: 10,
            radius_m: 10_000.0,
            base_duration_s: 20,
            congestion_gain_s: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("infeasible params: {0}")]
    Infeasible(String),
}

struct Grid {
    side: u32,
}

impl Grid {
    fn node_id(&self, x: u32, y: u32) -> NodeId {
        NodeId(y * self.side + x)
    }
}

/// Build a deterministic world from a seed and params.
pub fn generate_scenario(seed: u64, params: &ScenarioParams) -> Result<World, ScenarioError> {
    if params.n_intersections == 0 {
        return Err(ScenarioError::Infeasible(
            "at least one intersection is required".into(),
        ));
    }
    if params.n_vehicles > 0 && params.n_routes == 0 {
        return Err(ScenarioError::Infeasible(
            "vehicles need at least one route".into(),
        ));
    }
    if params.radius_m <= 0.0 {
        return Err(ScenarioError::Infeasible("radius must be positive".into()));
    }
    if params.base_duration_s == 0 {
        return Err(ScenarioError::Infeasible(
            "base duration must be positive".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // smallest grid whose interior holds every crossing
    let mut side = 3u32;
    while (side - 2) * (side - 2) < params.n_intersections {
        side += 1;
    }
    let spacing =
        ((2.0 * params.radius_m) / ((side - 1) as f64 * std::f64::consts::SQRT_2)).floor();
    let spacing = spacing.max(100.0);
    let grid = Grid { side };

    let mut nodes = BTreeMap::new();
    for y in 0..side {
        for x in 0..side {
            let id = grid.node_id(x, y);
            nodes.insert(
                id,
                Node {
                    id,
                    x: x as f64 * spacing,
                    y: y as f64 * spacing,
                },
            );
        }
    }

    // two one-way segments per grid edge
    let mut segments = BTreeMap::new();
    let mut seg_by_ends: BTreeMap<(NodeId, NodeId), SegmentId> = BTreeMap::new();
    let mut next_seg = 1u32;
    let mut add_edge = |a: NodeId, b: NodeId, segments: &mut BTreeMap<SegmentId, RoadSegment>| {
        for (from, to) in [(a, b), (b, a)] {
            let id = SegmentId(next_seg);
            next_seg += 1;
            segments.insert(
                id,
                RoadSegment {
                    id,
                    from,
                    to,
                    length_m: spacing,
                    lanes: 1,
                    direction: Direction::OneWay,
                },
            );
            seg_by_ends.insert((from, to), id);
        }
    };
    for y in 0..side {
        for x in 0..side {
            if x + 1 < side {
                add_edge(grid.node_id(x, y), grid.node_id(x + 1, y), &mut segments);
            }
            if y + 1 < side {
                add_edge(grid.node_id(x, y), grid.node_id(x, y + 1), &mut segments);
            }
        }
    }

    // four-light crossings on the first interior nodes, row-major
    let mut lights = BTreeMap::new();
    let mut intersections = BTreeMap::new();
    let mut signalized: Vec<(u32, u32)> = Vec::new();
    'outer: for y in 1..side - 1 {
        for x in 1..side - 1 {
            if signalized.len() as u32 == params.n_intersections {
                break 'outer;
            }
            signalized.push((x, y));
        }
    }
    for (k, &(x, y)) in signalized.iter().enumerate() {
        let id = IntersectionId(k as u32 + 1);
        let node = grid.node_id(x, y);
        // approaches ordered north, east, south, west (incoming)
        let neighbors = [
            grid.node_id(x, y + 1),
            grid.node_id(x + 1, y),
            grid.node_id(x, y - 1),
            grid.node_id(x - 1, y),
        ];
        let mut approaches = Vec::new();
        for (a, from) in neighbors.into_iter().enumerate() {
            let light = LightId(4 * k as u32 + a as u32 + 1);
            lights.insert(
                light,
                TrafficLight {
                    id: light,
                    state: super::types::LightState::Red,
                },
            );
            approaches.push(Approach {
                segment: seg_by_ends[&(from, node)],
                light,
            });
        }
        let conflicts = ConflictMatrix::standard_crossing();
        let light_ids: Vec<LightId> = approaches.iter().map(|a| a.light).collect();
        let cycle = super::types::enumerate_phases(&light_ids, &conflicts);
        intersections.insert(
            id,
            Intersection {
                id,
                node,
                approaches,
                conflicts,
                base_duration_s: params.base_duration_s,
                congestion_gain_s: params.congestion_gain_s,
                phase_duration_s: params.base_duration_s,
                phase_expires_at: params.base_duration_s as u64,
                cycle,
                cycle_pos: 0,
            },
        );
    }

    let mut world = World {
        clock: 0,
        seed,
        nodes,
        segments,
        lights,
        intersections,
        vehicles: BTreeMap::new(),
    };

    // random initial phase per crossing
    let ids: Vec<IntersectionId> = world.intersections.keys().copied().collect();
    for id in ids {
        let pos = rng.gen_range(0..2usize);
        let ix = world.intersections.get_mut(&id).expect("listed");
        ix.cycle_pos = pos;
        let config = ix.cycle[pos].clone();
        for (light, state) in &config.assignments {
            world.lights.get_mut(light).expect("listed").state = *state;
        }
    }

    let routes = generate_routes(&mut rng, &grid, &seg_by_ends, &world, params)?;

    for i in 0..params.n_vehicles {
        let id = VehicleId(i + 1);
        let route = routes[(i as usize) % routes.len()].clone();
        let speed = rng.gen_range(SPEED_RANGE_MPS.0..SPEED_RANGE_MPS.1);
        let departure = rng.gen_range(0..DEPARTURE_WINDOW_S);
        world
            .vehicles
            .insert(id, Vehicle::new(id, route, speed, departure));
    }

    Ok(world)
}

fn signalized_node(world: &World, node: NodeId) -> bool {
    world.intersections.values().any(|i| i.node == node)
}

/// A route crosses an intersection when some interior chain node is
/// signalized.
fn crosses_signal(world: &World, route: &[SegmentId]) -> bool {
    route
        .windows(2)
        .any(|w| signalized_node(world, world.segments[&w[0]].to))
}

fn generate_routes(
    rng: &mut ChaCha8Rng,
    grid: &Grid,
    seg_by_ends: &BTreeMap<(NodeId, NodeId), SegmentId>,
    world: &World,
    params: &ScenarioParams,
) -> Result<Vec<Vec<SegmentId>>, ScenarioError> {
    let side = grid.side;
    let corridor_y = 1u32;

    let corridor_route = |rng: &mut ChaCha8Rng| -> Vec<SegmentId> {
        // span at least one signalized interior node of the corridor row
        for _ in 0..20 {
            let a = rng.gen_range(0..side - 2);
            let b = rng.gen_range(a + 2..side);
            let interior_ok =
                (a + 1..b).any(|x| signalized_node(world, grid.node_id(x, corridor_y)));
            if !interior_ok {
                continue;
            }
            let eastbound = rng.gen_bool(0.5);
            let xs: Vec<u32> = if eastbound {
                (a..=b).collect()
            } else {
                (a..=b).rev().collect()
            };
            return xs
                .windows(2)
                .map(|w| {
                    seg_by_ends[&(
                        grid.node_id(w[0], corridor_y),
                        grid.node_id(w[1], corridor_y),
                    )]
                })
                .collect();
        }
        // full row, eastbound
        (0..side - 1)
            .map(|x| seg_by_ends[&(grid.node_id(x, corridor_y), grid.node_id(x + 1, corridor_y))])
            .collect()
    };

    let random_walk = |rng: &mut ChaCha8Rng| -> Option<Vec<SegmentId>> {
        let mut x = rng.gen_range(0..side);
        let mut y = rng.gen_range(0..side);
        let len = rng.gen_range(4..=10);
        let mut route = Vec::new();
        let mut prev: Option<NodeId> = None;
        for _ in 0..len {
            let here = grid.node_id(x, y);
            let mut options: Vec<(u32, u32)> = Vec::new();
            if x + 1 < side {
                options.push((x + 1, y));
            }
            if x > 0 {
                options.push((x - 1, y));
            }
            if y + 1 < side {
                options.push((x, y + 1));
            }
            if y > 0 {
                options.push((x, y - 1));
            }
            options.retain(|&(nx, ny)| Some(grid.node_id(nx, ny)) != prev);
            if options.is_empty() {
                return None;
            }
            let (nx, ny) = options[rng.gen_range(0..options.len())];
            route.push(seg_by_ends[&(here, grid.node_id(nx, ny))]);
            prev = Some(here);
            x = nx;
            y = ny;
        }
        crosses_signal(world, &route).then_some(route)
    };

    let mut routes = Vec::new();
    for _ in 0..params.n_routes {
        let route = if rng.gen_bool(CORRIDOR_ROUTE_SHARE) {
            corridor_route(rng)
        } else {
            // retry the walk, fall back to the corridor
            (0..50)
                .find_map(|_| random_walk(rng))
                .unwrap_or_else(|| corridor_route(rng))
        };
        debug_assert!(crosses_signal(world, &route));
        routes.push(route);
    }
    if routes.is_empty() && params.n_vehicles > 0 {
        return Err(ScenarioError::Infeasible("no routes generated".into()));
    }
    Ok(routes)
}
