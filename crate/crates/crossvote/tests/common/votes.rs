//! Randomized vote/revote sequences and their invariant checks, shared by
//! the property suite and the acceptance suite.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crossvote::negotiation::{
    BidId, EngineError, IntersectionLayout, NegotiationEngine, Outcome, Party, SessionId,
};
use crossvote::sim::{
    Configuration, ConflictMatrix, IntersectionId, LightId, LightState, VehicleId,
};

pub const APPLY_TICK: u64 = 1_000;

pub fn layout() -> IntersectionLayout {
    IntersectionLayout {
        intersection: IntersectionId(1),
        lights: (1..=4).map(LightId).collect(),
        conflicts: ConflictMatrix::standard_crossing(),
    }
}

/// Conflict-free configurations over the standard crossing: any green set
/// that is an independent set of the conflict graph.
pub fn candidate_configurations() -> Vec<Configuration> {
    let green_sets: [&[u32]; 7] = [&[], &[1], &[2], &[3], &[4], &[1, 3], &[2, 4]];
    green_sets
        .iter()
        .map(|greens| Configuration {
            assignments: (1..=4)
                .map(|l| {
                    let state = if greens.contains(&l) {
                        LightState::Green
                    } else {
                        LightState::Red
                    };
                    (LightId(l), state)
                })
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct VoteOp {
    pub tick: u64,
    pub vehicle: VehicleId,
    pub bid: BidId,
}

pub fn random_session(rng: &mut ChaCha8Rng) -> (NegotiationEngine, SessionId, usize, Vec<VoteOp>) {
    let mut candidates = candidate_configurations();
    candidates.shuffle(rng);
    let n_bids = rng.gen_range(2..=4);
    let configs: Vec<Configuration> = candidates.into_iter().take(n_bids).collect();

    let mut engine = NegotiationEngine::new();
    let session = engine
        .open_session(&Party::mediator("m1"), &layout(), configs, 0, APPLY_TICK)
        .unwrap();

    let n_ops = rng.gen_range(0..40);
    let ops: Vec<VoteOp> = (0..n_ops)
        .map(|_| VoteOp {
            tick: rng.gen_range(1..APPLY_TICK),
            vehicle: VehicleId(rng.gen_range(1..=10)),
            bid: BidId(rng.gen_range(1..=n_bids as u32)),
        })
        .collect();
    (engine, session, n_bids, ops)
}

pub fn apply_ops(engine: &mut NegotiationEngine, session: SessionId, ops: &[VoteOp]) {
    for op in ops {
        engine
            .cast_vote(session, op.tick, op.vehicle, op.bid)
            .unwrap();
    }
}

/// Independent winner recount: last vote per vehicle, argmax with the
/// smallest bid id on ties.
pub fn oracle_winner(n_bids: usize, ops: &[VoteOp]) -> (BidId, BTreeMap<BidId, u32>) {
    let mut last: BTreeMap<VehicleId, BidId> = BTreeMap::new();
    for op in ops {
        last.insert(op.vehicle, op.bid);
    }
    let mut tally: BTreeMap<BidId, u32> = (1..=n_bids as u32).map(|b| (BidId(b), 0)).collect();
    for bid in last.values() {
        *tally.get_mut(bid).unwrap() += 1;
    }
    let mut winner = BidId(1);
    let mut best = 0u32;
    for (bid, votes) in &tally {
        if *votes > best {
            winner = *bid;
            best = *votes;
        }
    }
    (winner, tally)
}

pub fn run_one(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut engine, session, n_bids, ops) = random_session(&mut rng);

    // apply votes one by one, checking conservation after each
    for (i, op) in ops.iter().enumerate() {
        let tally = engine
            .cast_vote(session, op.tick, op.vehicle, op.bid)
            .map_err(|e| format!("seed {seed}: vote {i} failed: {e}"))?;
        let distinct_voters = engine.session(session).unwrap().votes.len() as u32;
        let total: u32 = tally.values().sum();
        if total != distinct_voters {
            return Err(format!(
                "seed {seed}: tally sum {total} != distinct voters {distinct_voters}"
            ));
        }
        // live bid utilities mirror the tally
        let s = engine.session(session).unwrap();
        for bid in &s.bids {
            if bid.utility != tally[&bid.id] {
                return Err(format!("seed {seed}: bid utility diverged from tally"));
            }
        }
    }

    let outcome = engine.close_session(session, APPLY_TICK).unwrap();
    let (expected_winner, expected_tally) = oracle_winner(n_bids, &ops);
    if outcome.winner != expected_winner {
        return Err(format!(
            "seed {seed}: winner {:?} != oracle {:?}",
            outcome.winner, expected_winner
        ));
    }
    let tally_map: BTreeMap<BidId, u32> = outcome.tally.iter().copied().collect();
    if tally_map != expected_tally {
        return Err(format!("seed {seed}: final tally diverged"));
    }

    // frozen after close
    if !matches!(
        engine.cast_vote(session, APPLY_TICK + 1, VehicleId(1), BidId(1)),
        Err(EngineError::SessionClosed)
    ) {
        return Err(format!("seed {seed}: vote accepted after close"));
    }
    let after = engine.session(session).unwrap().tally();
    if after != tally_map {
        return Err(format!("seed {seed}: tally changed after close"));
    }
    Ok(())
}

/// Replaying the same vote sequence yields the same outcome.
pub fn replay_matches(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut a, sa, _, ops) = random_session(&mut rng);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut b, sb, _, _) = random_session(&mut rng);
    apply_ops(&mut a, sa, &ops);
    apply_ops(&mut b, sb, &ops);
    let oa: Outcome = a.close_session(sa, APPLY_TICK).unwrap();
    let ob: Outcome = b.close_session(sb, APPLY_TICK).unwrap();
    if oa != ob {
        return Err(format!("seed {seed}: replay diverged"));
    }
    Ok(())
}

/// Run `sequences` randomized vote/revote sessions; Err on first violation.
pub fn run_vote_invariant_suite(sequences: u64) -> Result<(), String> {
    for seed in 0..sequences {
        run_one(seed)?;
        if seed % 10 == 0 {
            replay_matches(seed)?;
        }
    }
    Ok(())
}
