//! Replay the scripted four-intersection route: scripted vote tallies pick
//! the winners, and the tracked car waits only where it is outvoted.
//!
//! ```bash
//! cargo run --example replay_route
//! ```

use crossvote::harness::golden::run_golden;
use crossvote::harness::ScenarioScript;

fn main() {
    let script = ScenarioScript::standard();
    let outcome = run_golden(&script).expect("scripted run completes");

    for (i, (winner, tally)) in outcome.winners.iter().zip(&outcome.tallies).enumerate() {
        let votes: Vec<String> = tally.iter().map(|(b, n)| format!("{b}={n}")).collect();
        let note = if outcome
            .car_waits_by_intersection
            .contains_key(&crossvote::sim::IntersectionId(i as u32 + 1))
        {
            "car waits here"
        } else {
            "car passes"
        };
        println!("T{}: {}  winner {winner}  ({note})", i + 1, votes.join(" "));
    }
    println!(
        "\ncar: {} s travel = {} s free flow + {} s waiting",
        outcome.car_travel_time_s, outcome.free_flow_time_s, outcome.car_wait_s
    );
    println!("safety violations: {}", outcome.safety_violation_ticks);

    println!("\nclose events from the transcript:");
    for event in &outcome.transcript {
        if matches!(
            event.kind,
            crossvote::negotiation::TranscriptKind::Close { .. }
        ) {
            println!("  {}", serde_json::to_string(event).unwrap());
        }
    }
}
