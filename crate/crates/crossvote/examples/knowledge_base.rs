//! Build the negotiation schema, assert a session's facts and validate them
//! against the class restrictions.
//!
//! ```bash
//! cargo run --example knowledge_base
//! ```

use crossvote::negotiation::install_negotiation_schema;
use crossvote::store::{KnowledgeStore, Value};

fn main() {
    let mut store = KnowledgeStore::new();
    install_negotiation_schema(&mut store).expect("schema installs");

    // a negotiation session is an instance of the TrafficLightSign protocol
    store.assert_is_a("session1", "TrafficLightSign").unwrap();
    store.assert_is_a("mediator1", "Party").unwrap();
    store.assert_is_a("TL1", "TrafficLight").unwrap();
    store
        .assert_triple("session1", "hasActor", Value::entity("mediator1"))
        .unwrap();
    store
        .assert_triple("session1", "hasObject", Value::entity("TL1"))
        .unwrap();

    println!("with one actor:");
    for violation in store.validate("session1").unwrap() {
        println!("  {violation}");
    }

    // a second participant satisfies the min-cardinality restriction
    store.assert_is_a("car7", "Party").unwrap();
    store
        .assert_triple("session1", "hasActor", Value::entity("car7"))
        .unwrap();
    let violations = store.validate("session1").unwrap();
    println!("with two actors: {} violations", violations.len());

    // the TrafficLight instance needs its own attribute facts
    store
        .assert_triple("TL1", "NumberOfItems", Value::Str("Multiple".into()))
        .unwrap();
    store
        .assert_triple("TL1", "NumberOfAttributes", Value::Int(4))
        .unwrap();
    println!("TL1 violations: {}", store.validate("TL1").unwrap().len());

    // the whole store round-trips through the text format
    let text = store.to_text();
    let reloaded = KnowledgeStore::parse_text(&text).expect("rendered text reloads");
    assert_eq!(store, reloaded);
    println!("\ntext format round-trips ({} facts):", store.fact_count());
    for line in text.lines().take(8) {
        println!("  {line}");
    }
    println!("  ...");
}
