//! Randomized vote/revote sequences against the session invariants: tally
//! conservation, single live vote per vehicle, argmax winner with smallest-id
//! tie-break, frozen state after close, and replay determinism.

mod common;

use std::collections::BTreeMap;

use common::votes::{
    apply_ops, candidate_configurations, layout, random_session, run_vote_invariant_suite,
    APPLY_TICK,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crossvote::negotiation::{BidId, NegotiationEngine, Party};
use crossvote::sim::VehicleId;

#[test]
fn thousand_random_sequences_hold_the_invariants() {
    run_vote_invariant_suite(1_000).unwrap();
}

#[test]
fn winner_ignores_vote_arrival_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..200 {
        let mut rng_a = ChaCha8Rng::seed_from_u64(seed);
        let (mut a, sa, _, ops) = random_session(&mut rng_a);
        // permute ops of distinct vehicles; per-vehicle order must survive
        let mut shuffled = ops.clone();
        shuffled.shuffle(&mut rng);
        let mut per_vehicle_last: BTreeMap<VehicleId, BidId> = BTreeMap::new();
        for op in &ops {
            per_vehicle_last.insert(op.vehicle, op.bid);
        }
        let preserves = {
            let mut last: BTreeMap<VehicleId, BidId> = BTreeMap::new();
            for op in &shuffled {
                last.insert(op.vehicle, op.bid);
            }
            last == per_vehicle_last
        };
        if !preserves {
            continue; // permutation changed someone's final vote; skip
        }
        let mut rng_b = ChaCha8Rng::seed_from_u64(seed);
        let (mut b, sb, _, _) = random_session(&mut rng_b);
        apply_ops(&mut a, sa, &ops);
        apply_ops(&mut b, sb, &shuffled);
        let oa = a.close_session(sa, APPLY_TICK).unwrap();
        let ob = b.close_session(sb, APPLY_TICK).unwrap();
        assert_eq!(oa.winner, ob.winner, "seed {seed}");
        assert_eq!(oa.tally, ob.tally, "seed {seed}");
    }
}

#[test]
fn zero_vote_sessions_pick_the_first_bid() {
    let mut engine = NegotiationEngine::new();
    let configs = candidate_configurations().into_iter().take(3).collect();
    let session = engine
        .open_session(&Party::mediator("m1"), &layout(), configs, 0, 10)
        .unwrap();
    let outcome = engine.close_session(session, 10).unwrap();
    assert_eq!(outcome.winner, BidId(1));
    assert_eq!(outcome.total_votes, 0);
}
