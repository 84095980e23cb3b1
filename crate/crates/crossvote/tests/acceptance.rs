//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::votes::run_vote_invariant_suite;
use common::{brute_force_match, random_query, random_store};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crossvote::harness::golden::run_golden;
use crossvote::harness::{
    run_baseline, run_negotiate, run_paired_experiments, ExperimentConfig, Mode, NegotiateOptions,
    OutputFormat, ScenarioScript,
};
use crossvote::negotiation::BidId;
use crossvote::sim::{generate_scenario, IntersectionId, ScenarioParams};
use crossvote::store::KnowledgeStore;

fn criterion(n: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n} ({name}): {verdict} — {detail}");
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_golden_scenario() {
    let started = Instant::now();

    // the shipped scenario file is the stock script
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/fig2.json");
    let script = ScenarioScript::load(&path).expect("shipped scenario loads");
    assert_eq!(script, ScenarioScript::standard());

    let outcome = run_golden(&script).expect("golden run completes");
    let winners_ok = outcome.winners == vec![BidId(1), BidId(2), BidId(1), BidId(2)];
    let tallies_ok = outcome.tallies
        == vec![
            vec![(BidId(1), 3), (BidId(2), 2)],
            vec![(BidId(1), 2), (BidId(2), 4)],
            vec![(BidId(1), 4), (BidId(2), 3)],
            vec![(BidId(1), 0), (BidId(2), 3)],
        ];
    let waits_ok = outcome.car_wait_s > 0
        && outcome.car_waits_by_intersection.keys().collect::<Vec<_>>() == vec![&IntersectionId(3)];
    let exact_ok = outcome.car_travel_time_s == outcome.free_flow_time_s + outcome.car_wait_s;
    let elapsed = started.elapsed();
    let fast_enough = elapsed.as_secs_f64() < 1.0;

    criterion(
        1,
        "golden scenario",
        winners_ok && tallies_ok && waits_ok && exact_ok && fast_enough,
        &format!(
            "winners {:?}, car waited {} s only at int3, ran in {:.0} ms",
            outcome.winners.iter().map(|b| b.0).collect::<Vec<_>>(),
            outcome.car_wait_s,
            elapsed.as_secs_f64() * 1000.0
        ),
    );
}

const SCHEMA_KB: &str = r#"
class Thing
class Protocol : Thing
class Party : Thing
class Object : Thing
class TrafficLight : Object
class TrafficLightSign : Protocol
prop hasActor Protocol Party
prop hasObject Thing Object
restrict TrafficLightSign min 2 hasActor # This negotiation needs at least 2 participants
restrict TrafficLightSign hasvalue hasObject TrafficLight
isa session1 TrafficLightSign
isa mediator1 Party
isa TL1 TrafficLight
fact session1 hasActor mediator1
fact session1 hasObject TL1
"#;

#[test]
fn criterion_2_schema_enforcement() {
    let store = KnowledgeStore::parse_text(SCHEMA_KB).expect("schema kb parses");
    let violations = store.validate("session1").unwrap();
    let one_violation = violations.len() == 1;
    let message_ok = violations
        .first()
        .map(|v| v.to_string().contains("required 2, found 1"))
        .unwrap_or(false);

    let mut store = store;
    store.assert_is_a("car1", "Party").unwrap();
    store
        .assert_triple(
            "session1",
            "hasActor",
            crossvote::store::Value::entity("car1"),
        )
        .unwrap();
    let clean = store.validate("session1").unwrap().is_empty();

    criterion(
        2,
        "schema enforcement",
        one_violation && message_ok && clean,
        &format!(
            "one actor -> {:?}; two actors + TrafficLight object -> no violations",
            violations.first().map(|v| v.to_string())
        ),
    );
}

#[test]
fn criterion_3_query_oracle_equivalence() {
    let started = Instant::now();
    let cases = 1_000usize;
    let mut agreements = 0usize;
    for seed in 0..cases as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kb = random_store(&mut rng, 8, 30);
        let query = random_query(&mut rng, &kb, 3, 3);
        let fast = kb.store.match_patterns(&query).unwrap();
        let oracle = brute_force_match(&kb.store, &query);
        if fast == oracle {
            agreements += 1;
        }
    }
    let elapsed = started.elapsed();
    criterion(
        3,
        "query oracle equivalence",
        agreements == cases && elapsed.as_secs() < 30,
        &format!(
            "{agreements}/{cases} randomized stores agreed in {:.1} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_4_travel_time_exactness() {
    let params = ScenarioParams {
        n_vehicles: 15,
        n_routes: 5,
        n_intersections: 2,
        radius_m: 1_500.0,
        base_duration_s: 15,
        congestion_gain_s: 5.0,
    };
    let mut simulations = 0usize;
    let mut vehicles_checked = 0usize;
    for seed in 0..50u64 {
        let world = generate_scenario(seed, &params).unwrap();
        let arms = [
            run_baseline(world.clone()),
            run_negotiate(world, &NegotiateOptions::default())
                .unwrap()
                .0,
        ];
        for outcome in arms {
            assert!(outcome.capped.is_empty(), "simulation did not complete");
            simulations += 1;
            for (id, v) in &outcome.world.vehicles {
                let travel = (v.arrival_tick.unwrap() - v.departure_tick) as f64;
                let expected = outcome.world.route_length(v) / v.speed_mps + v.wait_s as f64;
                assert!(
                    (travel - expected).abs() <= 1.0,
                    "{id}: travel {travel} vs length/speed + waits = {expected}"
                );
                vehicles_checked += 1;
            }
        }
    }
    criterion(
        4,
        "travel-time exactness",
        simulations == 100,
        &format!(
            "{vehicles_checked} vehicles across {simulations} completed simulations \
             satisfy travel = length/speed + waits within 1 tick"
        ),
    );
}

#[test]
fn criterion_5_safety_invariant() {
    // golden run, paired desk runs and the exactness sweep all count their
    // conflicting-green ticks; everything must be zero
    let mut violation_ticks = 0u64;

    violation_ticks += run_golden(&ScenarioScript::standard())
        .unwrap()
        .safety_violation_ticks;

    let params = ScenarioParams {
        n_vehicles: 20,
        n_routes: 6,
        n_intersections: 4,
        radius_m: 2_000.0,
        base_duration_s: 20,
        congestion_gain_s: 5.0,
    };
    let mut ticks = 0u64;
    for seed in 0..10u64 {
        let world = generate_scenario(seed, &params).unwrap();
        let run = crossvote::harness::run_paired(&world, &NegotiateOptions::default()).unwrap();
        violation_ticks +=
            run.negotiate.safety_violation_ticks + run.baseline.safety_violation_ticks;
        ticks += run.negotiate.world.clock + run.baseline.world.clock;
    }
    criterion(
        5,
        "safety invariant",
        violation_ticks == 0,
        &format!("0 conflicting-green ticks over {ticks}+ simulated ticks"),
    );
}

#[test]
fn criterion_6_determinism() {
    let config = ExperimentConfig {
        n_experiments: 3,
        n_vehicles: 20,
        n_routes: 5,
        n_intersections: 2,
        radius_m: 1_500.0,
        seed: 7,
        base_duration_s: 15,
        congestion_gain: 5.0,
        phase_count: 2,
        mode: Mode::Paired,
    };
    let a = run_paired_experiments(&config)
        .unwrap()
        .render(OutputFormat::Json);
    let b = run_paired_experiments(&config)
        .unwrap()
        .render(OutputFormat::Json);
    let library_identical = a == b;

    // and through the binary, as a user would run it
    let run_cli = || {
        std::process::Command::new(env!("CARGO_BIN_EXE_crossvote"))
            .args([
                "simulate",
                "--experiments",
                "3",
                "--vehicles",
                "20",
                "--routes",
                "5",
                "--intersections",
                "2",
                "--radius-m",
                "1500",
                "--seed",
                "7",
                "--mode",
                "paired",
                "--base-duration",
                "15",
                "--format",
                "json",
            ])
            .output()
            .expect("binary runs")
    };
    let out_a = run_cli();
    let out_b = run_cli();
    let cli_identical =
        out_a.status.success() && out_b.status.success() && out_a.stdout == out_b.stdout;

    criterion(
        6,
        "determinism",
        library_identical && cli_identical,
        &format!(
            "library reports identical: {library_identical}; \
             `simulate --seed 7 --mode paired` stdout identical: {cli_identical} \
             ({} bytes)",
            out_a.stdout.len()
        ),
    );
}

#[test]
fn criterion_7_desk_scale_direction() {
    let started = Instant::now();
    let config = ExperimentConfig {
        n_experiments: 20,
        n_vehicles: 60,
        n_routes: 10,
        n_intersections: 4,
        radius_m: 2_000.0,
        seed: 7,
        base_duration_s: 20,
        congestion_gain: 5.0,
        phase_count: 2,
        mode: Mode::Paired,
    };
    let report = run_paired_experiments(&config).unwrap();
    let elapsed = started.elapsed();
    let directional = report.pct_gained > report.pct_lost && report.avg_gain_s > 0;
    criterion(
        7,
        "desk-scale direction",
        directional && elapsed.as_secs() < 120,
        &format!(
            "gained {:.1}% > lost {:.1}%, avg gain {} s over {} vehicles in {:.1} s",
            report.pct_gained,
            report.pct_lost,
            report.avg_gain_s,
            report.compared_vehicles,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_8_vote_tally_invariants() {
    let sequences = 10_000u64;
    let result = run_vote_invariant_suite(sequences);
    criterion(
        8,
        "vote-tally invariants",
        result.is_ok(),
        &match &result {
            Ok(()) => format!("{sequences} randomized vote/revote sequences, zero failures"),
            Err(e) => e.clone(),
        },
    );
}

/// Aggregate sanity: the report partitions vehicles and echoes its config.
#[test]
fn report_partition_and_echo() {
    let config = ExperimentConfig {
        n_experiments: 2,
        n_vehicles: 20,
        n_routes: 5,
        n_intersections: 2,
        radius_m: 1_500.0,
        seed: 3,
        base_duration_s: 15,
        congestion_gain: 5.0,
        phase_count: 2,
        mode: Mode::Paired,
    };
    let report = run_paired_experiments(&config).unwrap();
    assert_eq!(
        report.gained + report.unchanged + report.lost,
        report.compared_vehicles
    );
    let pct_sum = report.pct_gained + report.pct_unchanged + report.pct_lost;
    assert!(
        (pct_sum - 100.0).abs() < 0.2,
        "percentages sum to {pct_sum}"
    );
    assert_eq!(report.config, config);
    // every compared vehicle has a delta entry
    assert_eq!(
        report.per_vehicle_deltas.len() as u64,
        report.compared_vehicles
    );
    let _: BTreeMap<String, i64> = report.per_vehicle_deltas;
}
