//! Desugars function terms into relational patterns.
//!
//! A function `f` used as an argument is modeled as a relation whose last
//! argument carries the result: `f(a, b)` inside an atom becomes a fresh
//! variable `?_gN` plus a pattern `f(a, b, ?_gN)` emitted ahead of the host
//! atom's pattern. An atom whose single argument was a function term is
//! itself a function application, so it gains a fresh result variable too —
//! that variable is the query's answer slot. Fresh variables are numbered
//! left to right, which makes flattening deterministic.

use thiserror::Error;

use super::{Arg, QueryAst};
use crate::store::{Pattern, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("function {name} has arity {arity}; functions take at most 2 arguments")]
    FunctionArity { name: String, arity: usize },
}

fn to_term(arg: &Arg) -> Term {
    match arg {
        Arg::Variable(v) => Term::Var(v.clone()),
        Arg::Constant(c) => Term::Const(c.clone()),
        Arg::Function(_) => unreachable!("function arguments are replaced before conversion"),
    }
}

struct FreshVars {
    taken: Vec<String>,
    next: usize,
}

impl FreshVars {
    fn new(ast: &QueryAst) -> Self {
        FreshVars {
            taken: ast.variables(),
            next: 0,
        }
    }

    fn fresh(&mut self) -> String {
        loop {
            let candidate = format!("_g{}", self.next);
            self.next += 1;
            if !self.taken.contains(&candidate) {
                return candidate;
            }
        }
    }
}

/// Rewrite an AST into a join of flat patterns ready for the store.
pub fn flatten(ast: &QueryAst) -> Result<Vec<Pattern>, FlattenError> {
    let mut fresh = FreshVars::new(ast);
    let mut out = Vec::new();
    for atom in &ast.atoms {
        let mut terms = Vec::with_capacity(atom.args.len());
        let mut saw_function = false;
        for arg in &atom.args {
            match arg {
                Arg::Function(f) => {
                    if f.args.len() > 2 {
                        return Err(FlattenError::FunctionArity {
                            name: f.name.clone(),
                            arity: f.args.len(),
                        });
                    }
                    saw_function = true;
                    let result = fresh.fresh();
                    let mut fn_terms: Vec<Term> = f.args.iter().map(to_term).collect();
                    fn_terms.push(Term::Var(result.clone()));
                    out.push(Pattern::new(f.name.clone(), fn_terms));
                    terms.push(Term::Var(result));
                }
                other => terms.push(to_term(other)),
            }
        }
        // A unary atom over a function value is itself function-like: give it
        // a result slot so the answer is bindable.
        if atom.args.len() == 1 && saw_function {
            terms.push(Term::Var(fresh.fresh()));
        }
        out.push(Pattern::new(atom.predicate.clone(), terms));
    }
    Ok(out)
}
