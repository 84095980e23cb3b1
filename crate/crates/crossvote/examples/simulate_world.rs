//! Generate a seeded world, step it with fixed-cycle lights and inspect
//! congestion, travel times and the event log.
//!
//! ```bash
//! cargo run --example simulate_world
//! ```

use crossvote::sim::{events_to_jsonl, generate_scenario, ScenarioParams};

fn main() {
    let params = ScenarioParams {
        n_vehicles: 30,
        n_routes: 8,
        n_intersections: 4,
        radius_m: 2_000.0,
        base_duration_s: 20,
        congestion_gain_s: 5.0,
    };
    let mut world = generate_scenario(42, &params).expect("params are feasible");
    println!(
        "world: {} nodes, {} segments, {} crossings, {} lights, {} vehicles",
        world.nodes.len(),
        world.segments.len(),
        world.intersections.len(),
        world.lights.len(),
        world.vehicles.len()
    );

    let mut events = Vec::new();
    let mut peak_queue = 0;
    while !world.all_arrived() && world.clock < 10_000 {
        assert!(world.safety_violations().is_empty());
        events.extend(world.step());
        if world.clock.is_multiple_of(20) {
            for id in world.intersections.keys().copied().collect::<Vec<_>>() {
                let max = world
                    .congestion(id)
                    .unwrap()
                    .into_iter()
                    .map(|(_, n)| n)
                    .max()
                    .unwrap_or(0);
                peak_queue = peak_queue.max(max);
            }
        }
    }
    println!(
        "all arrived at tick {}; peak queue {peak_queue}",
        world.clock
    );

    // travel time decomposes into free-flow time plus signal waits
    for (id, v) in world.vehicles.iter().take(5) {
        let t = world.travel_time(*id).unwrap().unwrap();
        let free_flow = world.route_length(v) / v.speed_mps;
        println!(
            "{id}: {t:>4} s = {free_flow:>6.1} s free flow + {:>3} s waits ({} route segments)",
            v.wait_s,
            v.route.len()
        );
        assert!((t as f64 - (free_flow + v.wait_s as f64)).abs() <= 1.0);
    }

    let jsonl = events_to_jsonl(&events);
    println!("\nfirst event-log lines:");
    for line in jsonl.lines().take(5) {
        println!("  {line}");
    }
    println!("  ... {} events total", events.len());
}
