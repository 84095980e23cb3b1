//! One intersection's negotiation session: the mediator publishes the two
//! complementary configurations as bids, five cars vote, one revotes, the
//! most voted configuration wins.
//!
//! ```bash
//! cargo run --example voting_session
//! ```

use crossvote::negotiation::{
    generate_bids, ApproachContext, BidId, IntersectionLayout, NegotiationEngine, Party, Preference,
};
use crossvote::sim::{ConflictMatrix, IntersectionId, LightId, Movement, VehicleId};

fn main() {
    let layout = IntersectionLayout {
        intersection: IntersectionId(1),
        lights: (1..=4).map(LightId).collect(),
        conflicts: ConflictMatrix::standard_crossing(),
    };
    let configurations = generate_bids(&layout, 2).expect("standard crossing has two phases");
    for (i, c) in configurations.iter().enumerate() {
        let states: Vec<String> = c
            .assignments
            .iter()
            .map(|(l, s)| format!("{l}.{s:?}"))
            .collect();
        println!("bid{} = ({})", i + 1, states.join(", "));
    }

    let mut engine = NegotiationEngine::new();
    let mediator = Party::mediator("mediator1");
    let session = engine
        .open_session(&mediator, &layout, configurations, 0, 100)
        .expect("session opens");

    // three cars approach on TL1's road, two on TL2's; each votes for the
    // bid that turns its own approach green
    let pref = Preference::default();
    for (vehicle, light) in [(1, 1), (2, 1), (3, 1), (4, 2), (5, 2)] {
        let ctx = ApproachContext {
            approach_light: LightId(light),
            movement: Movement::Straight,
            red_penalty_s: 30,
            turns_remaining: 1,
            distance_remaining_m: 800.0,
        };
        let bid = engine.choose_bid(&ctx, session, &pref).unwrap();
        let tally = engine
            .cast_vote(session, 1, VehicleId(vehicle), bid)
            .unwrap();
        println!("v{vehicle} (approach TL{light}) votes {bid}; tally {tally:?}");
    }

    // the tally is public; a voter may change its mind before the apply tick
    let tally = engine
        .cast_vote(session, 2, VehicleId(5), BidId(1))
        .unwrap();
    println!("v5 revotes bid1; tally {tally:?}");

    let outcome = engine.close_session(session, 100).expect("session closes");
    println!(
        "winner: {} with {} of {} votes",
        outcome.winner,
        outcome
            .tally
            .iter()
            .find(|(b, _)| *b == outcome.winner)
            .unwrap()
            .1,
        outcome.total_votes
    );

    // the store mirror carries the same state the engine acted on
    let entity = engine.session(session).unwrap().entity();
    let violations = engine.store().validate(&entity).unwrap();
    println!("schema violations on {entity}: {}", violations.len());

    println!("\ntranscript (JSON lines):");
    for line in engine.transcript_jsonl().lines() {
        println!("  {line}");
    }
}
