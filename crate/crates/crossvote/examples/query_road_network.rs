//! Run the textual query dialect against a small road knowledge base:
//! light locations, segment relations, and the nested route-point query
//! that flattens into a join.
//!
//! ```bash
//! cargo run --example query_road_network
//! ```

use crossvote::negotiation::{install_negotiation_schema, install_traffic_schema};
use crossvote::query;
use crossvote::store::{KnowledgeStore, Value};

fn road_store() -> KnowledgeStore {
    let mut store = KnowledgeStore::new();
    install_negotiation_schema(&mut store).unwrap();
    install_traffic_schema(&mut store).unwrap();

    for tl in ["TL1", "TL2", "TL3"] {
        store.assert_is_a(tl, "TrafficLight").unwrap();
    }
    for seg in ["road1", "road2", "road3"] {
        store.assert_is_a(seg, "RoadSegment").unwrap();
    }
    store.assert_is_a("int1", "Intersection").unwrap();
    for p in ["p1", "p2"] {
        store.assert_is_a(p, "RoutePoint").unwrap();
    }
    store.assert_is_a("r1", "Route").unwrap();

    let facts = [
        ("TL1", "IsOn", "road1"),
        ("TL2", "IsOn", "road1"),
        ("TL3", "IsOn", "road2"),
        ("road1", "ConnectedTo", "int1"),
        ("road2", "ConnectedTo", "int1"),
        ("road1", "IsAtRight", "road2"),
        ("road2", "IsAtLeft", "road1"),
        ("TL1", "has_Part", "right_green"),
        ("p2", "TrafficLightAtPoint", "TL3"),
    ];
    for (s, p, o) in facts {
        store.assert_triple(s, p, Value::entity(o)).unwrap();
    }
    // NextRoutePoint is a function relation: (point, route) -> point
    store
        .assert_ternary(
            "p1",
            "NextRoutePoint",
            Value::entity("r1"),
            Value::entity("p2"),
        )
        .unwrap();
    store
}

fn show(store: &KnowledgeStore, text: &str) {
    println!("query: {text}");
    let patterns = query::compile(text).expect("query compiles");
    for p in &patterns {
        println!("  pattern: {p}");
    }
    match store.match_patterns(&patterns) {
        Ok(bindings) if bindings.is_empty() => println!("  -> no results"),
        Ok(bindings) => {
            for b in bindings {
                let row: Vec<String> = b.iter().map(|(var, val)| format!("?{var}={val}")).collect();
                println!("  -> {}", row.join("  "));
            }
        }
        Err(e) => println!("  !! {e}"),
    }
    println!();
}

fn main() {
    let store = road_store();

    // the location of the traffic lights along the route
    show(&store, "IsOn(?traffic_light, ?road)");
    // whether a light can show a right-green
    show(&store, "has_Part(?light, right_green)");
    // segment layout relations
    show(&store, "IsAtRight(road1, ?seg)");
    // a conjunction joining on the shared road variable
    show(&store, "IsOn(?tl, ?road) AND ConnectedTo(?road, ?int)");
    // the nested functional query: the light at the next route point;
    // desugars into NextRoutePoint(?p, r1, ?_g0), TrafficLightAtPoint(?_g0, ?_g1)
    show(
        &store,
        "TrafficLightAtPoint(NextRoutePoint(?route_point, r1))",
    );
}
