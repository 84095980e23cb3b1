//! Line-oriented text format for schema and facts.
//!
//! One statement per line, `#` starts a comment, statements must define
//! names before use:
//!
//! ```text
//! class <name> [: <parent>]
//! prop <name> <domain> <range> [functional]
//! prop <name> <domain> <via> <range>          # ternary function relation
//! restrict <class> min <n> <property>
//! restrict <class> hasvalue <property> <value>
//! isa <entity> <class>
//! fact <subject> <predicate> <object>
//! fact <subject> <predicate> <via> <object>   # ternary facts
//! ```
//!
//! Values: bare integers are integer literals, double-quoted tokens are
//! strings, anything else is an entity or class name.

use thiserror::Error;

use super::{KnowledgeStore, Range, Restriction, StoreError, Value};

#[derive(Debug, Error)]
#[error("line {line}: {kind}")]
pub struct KbParseError {
    pub line: usize,
    pub kind: KbParseErrorKind,
}

#[derive(Debug, Error)]
pub enum KbParseErrorKind {
    #[error("unknown statement {0:?}")]
    UnknownStatement(String),
    #[error("malformed statement: {0}")]
    Malformed(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn err(line: usize, kind: KbParseErrorKind) -> KbParseError {
    KbParseError { line, kind }
}

fn parse_value(token: &str) -> Value {
    if let Ok(i) = token.parse::<i64>() {
        return Value::Int(i);
    }
    if token.len() >= 2 && token.starts_with('"') && token.ends_with('"') {
        return Value::Str(token[1..token.len() - 1].to_string());
    }
    Value::entity(token)
}

fn render_value(v: &Value) -> String {
    match v {
        Value::Entity(e) => e.clone(),
        Value::Int(i) => i.to_string(),
        Value::Str(s) => format!("{s:?}"),
    }
}

fn parse_range(token: &str) -> Range {
    match token {
        "integer" => Range::Int,
        "string" => Range::Str,
        other => Range::Class(other.to_string()),
    }
}

/// Whitespace-separated tokens; double quotes group a token and `#` outside
/// quotes starts a trailing comment, returned separately. On `restrict`
/// statements the trailing comment is kept as the restriction's annotation.
fn tokenize(line: &str) -> (Vec<String>, Option<String>) {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    let mut comment = None;
    for (i, c) in line.char_indices() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                current.push(c);
            }
            '#' if !in_quotes => {
                let text = line[i + 1..].trim();
                if !text.is_empty() {
                    comment = Some(text.to_string());
                }
                break;
            }
            c if c.is_whitespace() && !in_quotes => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    (tokens, comment)
}

impl KnowledgeStore {
    /// Parse a whole schema+facts file.
    pub fn parse_text(input: &str) -> Result<KnowledgeStore, KbParseError> {
        let mut store = KnowledgeStore::new();
        for (idx, raw) in input.lines().enumerate() {
            store.apply_statement(raw, idx + 1)?;
        }
        Ok(store)
    }

    fn apply_statement(&mut self, line: &str, lineno: usize) -> Result<(), KbParseError> {
        let (tokens, comment) = tokenize(line);
        if tokens.is_empty() {
            return Ok(());
        }
        let tokens: Vec<&str> = tokens.iter().map(String::as_str).collect();
        let annotate = |r: Restriction| match &comment {
            Some(c) => r.with_comment(c.clone()),
            None => r,
        };
        let fail = |msg: &str| err(lineno, KbParseErrorKind::Malformed(msg.to_string()));
        match tokens[0] {
            "" => Ok(()),
            "class" => {
                // class Name  |  class Name : Parent
                match &tokens[1..] {
                    [name] => self.define_class(name, None, vec![]),
                    [name, ":", parent] => self.define_class(name, Some(parent), vec![]),
                    _ => return Err(fail("expected `class <name> [: <parent>]`")),
                }
                .map_err(|e| err(lineno, e.into()))
            }
            "prop" => {
                let functional = tokens.last() == Some(&"functional");
                let args = if functional {
                    &tokens[1..tokens.len() - 1]
                } else {
                    &tokens[1..]
                };
                match args {
                    [name, domain, range] => {
                        self.define_property(name, domain, parse_range(range), functional)
                    }
                    [name, domain, via, range] => self.define_function_property(
                        name,
                        domain,
                        parse_range(via),
                        parse_range(range),
                    ),
                    _ => return Err(fail("expected `prop <name> <domain> [<via>] <range>`")),
                }
                .map_err(|e| err(lineno, e.into()))
            }
            "restrict" => match &tokens[1..] {
                [class, "min", n, property] => {
                    let n: u32 = n
                        .parse()
                        .map_err(|_| fail("min cardinality must be a non-negative integer"))?;
                    self.add_restriction(class, annotate(Restriction::min_cardinality(*property, n)))
                        .map_err(|e| err(lineno, e.into()))
                }
                [class, "hasvalue", property, value] => self
                    .add_restriction(
                        class,
                        annotate(Restriction::has_value(*property, parse_value(value))),
                    )
                    .map_err(|e| err(lineno, e.into())),
                _ => Err(fail(
                    "expected `restrict <class> min <n> <prop>` or `restrict <class> hasvalue <prop> <value>`",
                )),
            },
            "isa" => match &tokens[1..] {
                [entity, class] => self
                    .assert_is_a(entity, class)
                    .map_err(|e| err(lineno, e.into())),
                _ => Err(fail("expected `isa <entity> <class>`")),
            },
            "fact" => match &tokens[1..] {
                [subject, predicate, object] => self
                    .assert_triple(subject, predicate, parse_value(object))
                    .map_err(|e| err(lineno, e.into())),
                [subject, predicate, via, object] => self
                    .assert_ternary(subject, predicate, parse_value(via), parse_value(object))
                    .map_err(|e| err(lineno, e.into())),
                _ => Err(fail("expected `fact <subject> <predicate> [<via>] <object>`")),
            },
            other => Err(err(
                lineno,
                KbParseErrorKind::UnknownStatement(other.to_string()),
            )),
        }
    }

    /// Render the store back into the text format. Classes come out in
    /// parent-before-child order so the output always reloads.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut emitted: std::collections::BTreeSet<String> = Default::default();
        // depth-first from roots keeps every parent ahead of its children
        let mut stack: Vec<String> = self
            .classes()
            .filter(|c| c.parent.is_none())
            .map(|c| c.name.clone())
            .collect();
        stack.reverse();
        while let Some(name) = stack.pop() {
            if !emitted.insert(name.clone()) {
                continue;
            }
            let def = self.class(&name).expect("listed class");
            match &def.parent {
                Some(p) => out.push_str(&format!("class {} : {}\n", def.name, p)),
                None => out.push_str(&format!("class {}\n", def.name)),
            }
            let mut children: Vec<String> = self
                .classes()
                .filter(|c| c.parent.as_deref() == Some(name.as_str()))
                .map(|c| c.name.clone())
                .collect();
            children.reverse();
            stack.extend(children);
        }
        for p in self.properties() {
            let functional = if p.functional { " functional" } else { "" };
            match &p.via {
                Some(via) => out.push_str(&format!(
                    "prop {} {} {} {}\n",
                    p.name, p.domain, via, p.range
                )),
                None => out.push_str(&format!(
                    "prop {} {} {}{}\n",
                    p.name, p.domain, p.range, functional
                )),
            }
        }
        for c in self.classes() {
            for r in &c.restrictions {
                let comment = r
                    .comment
                    .as_deref()
                    .map(|c| format!(" # {c}"))
                    .unwrap_or_default();
                match &r.kind {
                    super::RestrictionKind::MinCardinality(n) => out.push_str(&format!(
                        "restrict {} min {} {}{comment}\n",
                        c.name, n, r.on_property
                    )),
                    super::RestrictionKind::HasValue(v) => out.push_str(&format!(
                        "restrict {} hasvalue {} {}{comment}\n",
                        c.name,
                        r.on_property,
                        render_value(v)
                    )),
                }
            }
        }
        for t in self.facts_of(super::ISA) {
            out.push_str(&format!(
                "isa {} {}\n",
                render_value(&t[0]),
                render_value(&t[1])
            ));
        }
        for (pred, args) in self.all_facts() {
            if pred == super::ISA {
                continue;
            }
            let rendered: Vec<String> = args.iter().map(render_value).collect();
            out.push_str(&format!(
                "fact {} {} {}\n",
                rendered[0],
                pred,
                rendered[1..].join(" ")
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
# negotiation schema fragment
class Thing
class Protocol : Thing
class Party : Thing
class Object : Thing
class TrafficLight : Object
class TrafficLightSign : Protocol
prop hasActor Protocol Party
prop hasObject Thing Object
restrict TrafficLightSign min 2 hasActor
restrict TrafficLightSign hasvalue hasObject TrafficLight
isa session1 TrafficLightSign
isa mediator1 Party
isa TL1 TrafficLight
fact session1 hasActor mediator1
fact session1 hasObject TL1
"#;

    #[test]
    fn parses_and_validates() {
        let store = KnowledgeStore::parse_text(SAMPLE).unwrap();
        let vs = store.validate("session1").unwrap();
        assert_eq!(vs.len(), 1);
        assert!(vs[0].to_string().contains("required 2, found 1"));
    }

    #[test]
    fn round_trips_through_text() {
        let store = KnowledgeStore::parse_text(SAMPLE).unwrap();
        let text = store.to_text();
        let reloaded = KnowledgeStore::parse_text(&text).unwrap();
        assert_eq!(store, reloaded);
        // and the rendering itself is stable
        assert_eq!(text, reloaded.to_text());
    }

    #[test]
    fn reports_line_numbers() {
        let bad = "class Thing\nclass X : Nope\n";
        let e = KnowledgeStore::parse_text(bad).unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn literal_values() {
        let input = r#"
class Thing
class Bid : Thing
prop hasUtility Bid integer functional
prop hasLabel Bid string
isa bid1 Bid
fact bid1 hasUtility 9
fact bid1 hasLabel "first offer"
"#;
        let store = KnowledgeStore::parse_text(input).unwrap();
        assert_eq!(
            store.facts_of("hasUtility").next().unwrap()[1],
            Value::Int(9)
        );
        assert_eq!(
            store.facts_of("hasLabel").next().unwrap()[1],
            Value::Str("first offer".into())
        );
        assert!(store.property("hasUtility").unwrap().functional);
    }
}
