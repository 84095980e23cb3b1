//! Textual conjunctive query dialect.
//!
//! Queries are conjunctions of `Pred(term, ...)` atoms joined by `,` or
//! `AND`. Terms are `?variables`, bare or quoted constants, integers, or a
//! single level of function application such as `Next(?p, r1)` used as an
//! argument. The grammar is documented in `docs/query-grammar.md`.

mod flatten;
mod parser;

pub use flatten::{flatten, FlattenError};
pub use parser::{parse, ParseError};

use crate::store::{Pattern, Value};

/// Parsed query: one or more atoms, evaluated as a conjunction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryAst {
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Arg>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    /// Variable name without the `?` sigil.
    Variable(String),
    Constant(Value),
    Function(FunctionTerm),
}

/// Function applied to arguments, e.g. `NextRoutePoint(?p, r1)`. Arguments of
/// a function term are variables or constants only (nesting depth is one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTerm {
    pub name: String,
    pub args: Vec<Arg>,
}

impl QueryAst {
    /// Variable names occurring anywhere in the query, in first-use order.
    pub fn variables(&self) -> Vec<String> {
        let mut seen = Vec::new();
        let mut visit = |arg: &Arg| {
            if let Arg::Variable(v) = arg {
                if !seen.contains(v) {
                    seen.push(v.clone());
                }
            }
        };
        for atom in &self.atoms {
            for arg in &atom.args {
                visit(arg);
                if let Arg::Function(f) = arg {
                    for inner in &f.args {
                        visit(inner);
                    }
                }
            }
        }
        seen
    }
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::Entity(e) => e.clone(),
        Value::Int(i) => i.to_string(),
        Value::Str(s) => format!("{s:?}"),
    }
}

fn fmt_arg(arg: &Arg) -> String {
    match arg {
        Arg::Variable(v) => format!("?{v}"),
        Arg::Constant(c) => fmt_value(c),
        Arg::Function(f) => {
            let args: Vec<String> = f.args.iter().map(fmt_arg).collect();
            format!("{}({})", f.name, args.join(", "))
        }
    }
}

/// Canonical rendering; `parse(pretty(ast))` yields an equal AST.
pub fn pretty(ast: &QueryAst) -> String {
    ast.atoms
        .iter()
        .map(|atom| {
            let args: Vec<String> = atom.args.iter().map(fmt_arg).collect();
            format!("{}({})", atom.predicate, args.join(", "))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Parse and desugar in one step; what the CLI and examples call.
pub fn compile(text: &str) -> Result<Vec<Pattern>, CompileError> {
    let ast = parse(text)?;
    Ok(flatten(&ast)?)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
}
