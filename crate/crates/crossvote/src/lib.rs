//! Knowledge-backed automated negotiation for traffic-light control, with a
//! deterministic discrete-time traffic simulator and an experiment harness.
//!
//! The pieces, bottom to top:
//!
//! - [`store`] — typed entity–relation store: class hierarchy, property
//!   signatures, min-cardinality / has-value restrictions, conjunctive
//!   pattern matching, and a line-oriented text format.
//! - [`query`] — the textual query dialect (`IsOn(?tl, ?road)`), parsed to an
//!   AST and flattened into store patterns.
//! - [`sim`] — road segments, four-light crossings with phase timers, and
//!   constant-speed vehicles on fixed routes, stepped one second at a time.
//! - [`negotiation`] — the mediated voting protocol: configuration bids, one
//!   revisable public vote per vehicle, argmax agreement rule, all mirrored
//!   into the knowledge store.
//! - [`harness`] — seeded paired experiments (negotiation vs. fixed cycle)
//!   and comparison reports.
//!
//! The `examples/` directory has one runnable example per capability; the
//! `crossvote` binary wraps the same APIs as `simulate`, `query`, `validate`
//! and `replay` subcommands.

pub mod cli;
pub mod harness;
pub mod negotiation;
pub mod query;
pub mod sim;
pub mod store;
