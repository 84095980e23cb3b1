//! Canonical negotiation schema, plus the road-network vocabulary the
//! textual queries use. Installed into every engine's knowledge store.

use crate::store::{KnowledgeStore, Range, Restriction, StoreError, Value};

/// Classes and properties of the negotiation ontology: process, mechanism,
/// protocol, outcome, goal, object, rules, parties, preferences, strategies,
/// roles and bids, with the traffic-light protocol and its restrictions.
pub fn install_negotiation_schema(store: &mut KnowledgeStore) -> Result<(), StoreError> {
    store.define_class("Thing", None, vec![])?;
    for class in [
        "NegotiationProcess",
        "NegotiationMechanism",
        "Protocol",
        "NegotiationOutcome",
        "NegotiationGoal",
        "Object",
        "NegotiationRule",
        "Party",
        "Preference",
        "NegotiationStrategy",
        "Role",
        "Bid",
    ] {
        store.define_class(class, Some("Thing"), vec![])?;
    }
    store.define_class("AgreementRule", Some("NegotiationRule"), vec![])?;

    store.define_property("hasActor", "Protocol", Range::Class("Party".into()), false)?;
    store.define_property("hasObject", "Thing", Range::Class("Object".into()), false)?;
    store.define_property("hasParty", "Bid", Range::Class("Party".into()), false)?;
    store.define_property("hasUtility", "Bid", Range::Int, true)?;
    store.define_property("hasRole", "Party", Range::Class("Role".into()), false)?;
    store.define_property("NumberOfItems", "Object", Range::Str, false)?;
    store.define_property("NumberOfAttributes", "Object", Range::Int, false)?;

    store.define_class(
        "TrafficLight",
        Some("Object"),
        vec![
            Restriction::has_value("NumberOfItems", Value::Str("Multiple".into())),
            Restriction::has_value("NumberOfAttributes", Value::Int(4)),
        ],
    )?;
    store.define_class(
        "TrafficLightSign",
        Some("Protocol"),
        vec![
            Restriction::min_cardinality("hasActor", 2)
                .with_comment("This negotiation needs at least 2 participants"),
            Restriction::has_value("hasObject", Value::entity("TrafficLight"))
                .with_comment("The negotiation object is a traffic light state"),
        ],
    )?;
    store.define_class(
        "TrafficLightSignAgreementRule",
        Some("AgreementRule"),
        vec![],
    )?;

    store.define_property(
        "hasRoleInput",
        "TrafficLightSignAgreementRule",
        Range::Class("Party".into()),
        false,
    )?;
    store.define_property(
        "hasAttributeInput",
        "TrafficLightSignAgreementRule",
        Range::Class("Bid".into()),
        false,
    )?;
    store.define_property(
        "hasAttributeOutput",
        "TrafficLightSignAgreementRule",
        Range::Class("Bid".into()),
        false,
    )?;

    store.assert_is_a("Mediator", "Role")?;
    store.assert_is_a("Negotiator", "Role")?;
    Ok(())
}

/// Road-network vocabulary for the query dialect: light locations,
/// segment relations and the route-point function relation.
pub fn install_traffic_schema(store: &mut KnowledgeStore) -> Result<(), StoreError> {
    store.define_class("Road", Some("Thing"), vec![])?;
    store.define_class("RoadSegment", Some("Road"), vec![])?;
    store.define_class("Intersection", Some("Thing"), vec![])?;
    store.define_class("RoutePoint", Some("Thing"), vec![])?;
    store.define_class("Route", Some("Thing"), vec![])?;
    store.define_class("LightStatePart", Some("Thing"), vec![])?;

    store.define_property("IsOn", "TrafficLight", Range::Class("Road".into()), false)?;
    store.define_property(
        "ConnectedTo",
        "RoadSegment",
        Range::Class("Intersection".into()),
        false,
    )?;
    store.define_property(
        "IsAtRight",
        "RoadSegment",
        Range::Class("RoadSegment".into()),
        false,
    )?;
    store.define_property(
        "IsAtLeft",
        "RoadSegment",
        Range::Class("RoadSegment".into()),
        false,
    )?;
    store.define_property(
        "has_Part",
        "TrafficLight",
        Range::Class("LightStatePart".into()),
        false,
    )?;
    store.define_property(
        "TrafficLightAtPoint",
        "RoutePoint",
        Range::Class("TrafficLight".into()),
        false,
    )?;
    store.define_function_property(
        "NextRoutePoint",
        "RoutePoint",
        Range::Class("Route".into()),
        Range::Class("RoutePoint".into()),
    )?;

    for part in ["right_green", "green", "red", "amber"] {
        store.assert_is_a(part, "LightStatePart")?;
    }
    Ok(())
}
