//! First-order language: signatures, terms, formulas, complexity measures,
//! and the deterministic closed-formula enumeration.
//!
//! Negation is not primitive: `~p` is accepted by the parser as sugar for
//! `p -> false` and is never produced by the printer. Printing fully
//! parenthesizes every composite formula (quantifiers included), which makes
//! the print form context-free, guarantees `parse ∘ print = id`, and gives the
//! enumeration a stable lexicographic order within each complexity level.

mod enumerate;
mod parse;

pub use enumerate::{enumerate_m_cf, Enumeration};
pub use parse::{parse_formula, parse_term, parse_theory, ParseError};

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// A first-order signature: predicate, function, and constant symbols.
///
/// Names must be pairwise distinct across all three symbol classes; arities
/// are fixed at declaration. Predicates may be nullary, functions may not.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub predicates: Vec<(String, usize)>,
    pub functions: Vec<(String, usize)>,
    pub constants: Vec<String>,
}

/// Errors raised when assembling or extending a [`Signature`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("duplicate symbol name `{0}`")]
    DuplicateName(String),
    #[error("function `{0}` must have arity >= 1")]
    NullaryFunction(String),
    #[error("`{0}` is not a legal identifier")]
    BadIdentifier(String),
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && s != "false" && s != "forall" && s != "exists"
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a signature from slices, checking the distinctness invariant.
    pub fn build(
        predicates: &[(&str, usize)],
        functions: &[(&str, usize)],
        constants: &[&str],
    ) -> Result<Self, SignatureError> {
        let mut sig = Self::new();
        for &(name, arity) in predicates {
            sig.declare_predicate(name, arity)?;
        }
        for &(name, arity) in functions {
            sig.declare_function(name, arity)?;
        }
        for &name in constants {
            sig.declare_constant(name)?;
        }
        Ok(sig)
    }

    fn check_fresh(&self, name: &str) -> Result<(), SignatureError> {
        if !is_identifier(name) {
            return Err(SignatureError::BadIdentifier(name.to_string()));
        }
        let clash = self.predicates.iter().any(|(n, _)| n == name)
            || self.functions.iter().any(|(n, _)| n == name)
            || self.constants.iter().any(|n| n == name);
        if clash {
            Err(SignatureError::DuplicateName(name.to_string()))
        } else {
            Ok(())
        }
    }

    pub fn declare_predicate(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        self.predicates.push((name.to_string(), arity));
        Ok(())
    }

    pub fn declare_function(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        if arity == 0 {
            return Err(SignatureError::NullaryFunction(name.to_string()));
        }
        self.check_fresh(name)?;
        self.functions.push((name.to_string(), arity));
        Ok(())
    }

    pub fn declare_constant(&mut self, name: &str) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        self.constants.push(name.to_string());
        Ok(())
    }

    pub fn predicate_arity(&self, name: &str) -> Option<usize> {
        self.predicates.iter().find(|(n, _)| n == name).map(|&(_, a)| a)
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.iter().find(|(n, _)| n == name).map(|&(_, a)| a)
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|n| n == name)
    }

    pub fn is_function_free(&self) -> bool {
        self.functions.is_empty()
    }
}

/// A first-order term. Height: variables, constants, and domain elements
/// count 1; an application adds 1 over its deepest argument.
///
/// `Elem` is a semantic literal naming a domain element of a frame directly
/// (printed `#n`). The parser never produces it; forcing uses it to
/// instantiate quantifiers with elements that no closed term denotes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Const(String),
    App(String, Vec<Term>),
    Elem(usize),
}

impl Term {
    /// Term-tree height; leaves count 1.
    pub fn complexity(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) | Term::Elem(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::complexity).max().unwrap_or(0),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) | Term::Elem(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_closed),
        }
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Var(v) => {
                out.insert(v);
            }
            Term::Const(_) | Term::Elem(_) => {}
            Term::App(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    /// Replaces every occurrence of variable `var` by `replacement`.
    /// `replacement` must be closed, so no capture can occur.
    pub fn substitute(&self, var: &str, replacement: &Term) -> Term {
        debug_assert!(replacement.is_closed());
        match self {
            Term::Var(v) if v == var => replacement.clone(),
            Term::Var(_) | Term::Const(_) | Term::Elem(_) => self.clone(),
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(|t| t.substitute(var, replacement)).collect(),
            ),
        }
    }

    fn fmt_into(&self, out: &mut String) {
        match self {
            Term::Var(v) => out.push_str(v),
            Term::Const(c) => out.push_str(c),
            Term::Elem(i) => {
                out.push('#');
                out.push_str(&i.to_string());
            }
            Term::App(f, args) => {
                out.push_str(f);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    a.fmt_into(out);
                }
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.fmt_into(&mut s);
        f.write_str(&s)
    }
}

/// A first-order formula. Complexity: formula-tree height with atoms and
/// `false` at 1; every connective or quantifier adds 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Atom(String, Vec<Term>),
    Falsum,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(pred.to_string(), args)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// `~a` as derived notation: `a -> false`.
    pub fn not(a: Formula) -> Formula {
        Formula::implies(a, Formula::Falsum)
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::Forall(var.to_string(), Box::new(body))
    }

    /// Structural complexity: formula-tree height, atoms and `false` at 1.
    pub fn complexity(&self) -> usize {
        match self {
            Formula::Atom(..) | Formula::Falsum => 1,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.complexity().max(b.complexity())
            }
            Formula::Exists(_, body) | Formula::Forall(_, body) => 1 + body.complexity(),
        }
    }

    /// Height of the deepest term occurring anywhere in the formula
    /// (0 for formulas without terms, e.g. `false`).
    pub fn max_term_height(&self) -> usize {
        match self {
            Formula::Atom(_, args) => args.iter().map(Term::complexity).max().unwrap_or(0),
            Formula::Falsum => 0,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.max_term_height().max(b.max_term_height())
            }
            Formula::Exists(_, body) | Formula::Forall(_, body) => body.max_term_height(),
        }
    }

    /// Free variables, sorted.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go<'a>(f: &'a Formula, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Atom(_, args) => {
                    let mut vars = BTreeSet::new();
                    args.iter().for_each(|t| t.collect_vars(&mut vars));
                    for v in vars {
                        if !bound.contains(&v) {
                            out.insert(v.to_string());
                        }
                    }
                }
                Formula::Falsum => {}
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Exists(v, body) | Formula::Forall(v, body) => {
                    bound.push(v);
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Substitutes the closed term `replacement` for free occurrences of
    /// `var`. Binders shadow; `replacement` being closed rules out capture.
    pub fn substitute(&self, var: &str, replacement: &Term) -> Formula {
        debug_assert!(replacement.is_closed());
        match self {
            Formula::Atom(p, args) => Formula::Atom(
                p.clone(),
                args.iter().map(|t| t.substitute(var, replacement)).collect(),
            ),
            Formula::Falsum => Formula::Falsum,
            Formula::And(a, b) => {
                Formula::and(a.substitute(var, replacement), b.substitute(var, replacement))
            }
            Formula::Or(a, b) => {
                Formula::or(a.substitute(var, replacement), b.substitute(var, replacement))
            }
            Formula::Implies(a, b) => {
                Formula::implies(a.substitute(var, replacement), b.substitute(var, replacement))
            }
            Formula::Exists(v, body) if v != var => {
                Formula::exists(v, body.substitute(var, replacement))
            }
            Formula::Forall(v, body) if v != var => {
                Formula::forall(v, body.substitute(var, replacement))
            }
            Formula::Exists(..) | Formula::Forall(..) => self.clone(),
        }
    }

    /// All closed terms occurring in the formula (as subterms of atoms),
    /// each counted once.
    pub fn closed_subterms(&self) -> BTreeSet<Term> {
        fn collect_term(t: &Term, out: &mut BTreeSet<Term>) {
            if t.is_closed() {
                out.insert(t.clone());
            }
            if let Term::App(_, args) = t {
                args.iter().for_each(|a| collect_term(a, out));
            }
        }
        fn go(f: &Formula, out: &mut BTreeSet<Term>) {
            match f {
                Formula::Atom(_, args) => args.iter().for_each(|t| collect_term(t, out)),
                Formula::Falsum => {}
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Formula::Exists(_, body) | Formula::Forall(_, body) => go(body, out),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    /// Constant names occurring anywhere in the formula.
    pub fn constants(&self) -> BTreeSet<String> {
        fn collect_term(t: &Term, out: &mut BTreeSet<String>) {
            match t {
                Term::Const(c) => {
                    out.insert(c.clone());
                }
                Term::App(_, args) => args.iter().for_each(|a| collect_term(a, out)),
                Term::Var(_) | Term::Elem(_) => {}
            }
        }
        fn go(f: &Formula, out: &mut BTreeSet<String>) {
            match f {
                Formula::Atom(_, args) => args.iter().for_each(|t| collect_term(t, out)),
                Formula::Falsum => {}
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Formula::Exists(_, body) | Formula::Forall(_, body) => go(body, out),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    fn fmt_into(&self, out: &mut String) {
        match self {
            Formula::Atom(p, args) => {
                out.push_str(p);
                if !args.is_empty() {
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        a.fmt_into(out);
                    }
                    out.push(')');
                }
            }
            Formula::Falsum => out.push_str("false"),
            Formula::And(a, b) => {
                out.push('(');
                a.fmt_into(out);
                out.push_str(" & ");
                b.fmt_into(out);
                out.push(')');
            }
            Formula::Or(a, b) => {
                out.push('(');
                a.fmt_into(out);
                out.push_str(" | ");
                b.fmt_into(out);
                out.push(')');
            }
            Formula::Implies(a, b) => {
                out.push('(');
                a.fmt_into(out);
                out.push_str(" -> ");
                b.fmt_into(out);
                out.push(')');
            }
            Formula::Exists(v, body) => {
                out.push_str("(exists ");
                out.push_str(v);
                out.push_str(". ");
                body.fmt_into(out);
                out.push(')');
            }
            Formula::Forall(v, body) => {
                out.push_str("(forall ");
                out.push_str(v);
                out.push_str(". ");
                body.fmt_into(out);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.fmt_into(&mut s);
        f.write_str(&s)
    }
}

/// Checks that a term is well-formed over `sig` with variables drawn from
/// `scope`, and that every application matches its declared arity.
pub fn check_term(t: &Term, sig: &Signature, scope: &[String]) -> Result<(), String> {
    match t {
        Term::Var(v) => {
            if scope.iter().any(|s| s == v) {
                Ok(())
            } else {
                Err(format!("unbound variable `{v}`"))
            }
        }
        Term::Const(c) => {
            if sig.has_constant(c) {
                Ok(())
            } else {
                Err(format!("undeclared constant `{c}`"))
            }
        }
        Term::Elem(_) => Ok(()),
        Term::App(f, args) => match sig.function_arity(f) {
            None => Err(format!("undeclared function `{f}`")),
            Some(a) if a != args.len() => {
                Err(format!("function `{f}` expects {a} arguments, got {}", args.len()))
            }
            Some(_) => args.iter().try_for_each(|t| check_term(t, sig, scope)),
        },
    }
}

/// Checks that a formula is well-formed over `sig`: declared predicates at
/// the declared arities, well-formed terms, well-scoped variables.
pub fn check_formula(f: &Formula, sig: &Signature) -> Result<(), String> {
    fn go(f: &Formula, sig: &Signature, scope: &mut Vec<String>) -> Result<(), String> {
        match f {
            Formula::Atom(p, args) => match sig.predicate_arity(p) {
                None => Err(format!("undeclared predicate `{p}`")),
                Some(a) if a != args.len() => {
                    Err(format!("predicate `{p}` expects {a} arguments, got {}", args.len()))
                }
                Some(_) => args.iter().try_for_each(|t| check_term(t, sig, scope)),
            },
            Formula::Falsum => Ok(()),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                go(a, sig, scope)?;
                go(b, sig, scope)
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                scope.push(v.clone());
                let r = go(body, sig, scope);
                scope.pop();
                r
            }
        }
    }
    go(f, sig, &mut Vec::new())
}

/// Rewrites a closed formula so each binder is named `{prefix}{d}`, where
/// `d` counts the enclosing binders and the prefix is the same one the
/// enumeration picks over `sig` plus the `extra` constant names.  Formulas
/// that differ only in bound-variable names collapse to one spelling, so
/// set membership agrees with the enumeration's output.
pub fn canonical_binders(f: &Formula, sig: &Signature, extra: &BTreeSet<String>) -> Formula {
    fn term(t: &Term, env: &[(String, String)]) -> Term {
        match t {
            Term::Var(v) => match env.iter().rev().find(|(old, _)| old == v) {
                Some((_, new)) => Term::Var(new.clone()),
                None => t.clone(),
            },
            Term::App(name, args) => {
                Term::App(name.clone(), args.iter().map(|a| term(a, env)).collect())
            }
            Term::Const(_) | Term::Elem(_) => t.clone(),
        }
    }
    fn go(f: &Formula, prefix: char, depth: usize, env: &mut Vec<(String, String)>) -> Formula {
        match f {
            Formula::Atom(p, args) => {
                Formula::Atom(p.clone(), args.iter().map(|a| term(a, env)).collect())
            }
            Formula::Falsum => Formula::Falsum,
            Formula::And(a, b) => {
                Formula::and(go(a, prefix, depth, env), go(b, prefix, depth, env))
            }
            Formula::Or(a, b) => Formula::or(go(a, prefix, depth, env), go(b, prefix, depth, env)),
            Formula::Implies(a, b) => {
                Formula::implies(go(a, prefix, depth, env), go(b, prefix, depth, env))
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let fresh = format!("{prefix}{depth}");
                env.push((v.clone(), fresh.clone()));
                let inner = go(body, prefix, depth + 1, env);
                env.pop();
                match f {
                    Formula::Exists(..) => Formula::exists(&fresh, inner),
                    _ => Formula::forall(&fresh, inner),
                }
            }
        }
    }
    go(f, enumerate::binder_prefix(sig, extra), 0, &mut Vec::new())
}

/// A named, finitely axiomatized theory: every axiom is a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theory {
    pub name: String,
    pub signature: Signature,
    pub axioms: Vec<Formula>,
}

impl Theory {
    /// Builds a theory, validating that each axiom is a closed formula
    /// well-formed over the signature.
    pub fn new(name: &str, signature: Signature, axioms: Vec<Formula>) -> Result<Self, String> {
        for ax in &axioms {
            check_formula(ax, &signature).map_err(|e| format!("axiom `{ax}`: {e}"))?;
            if !ax.is_closed() {
                return Err(format!("axiom `{ax}` has free variables"));
            }
        }
        Ok(Theory { name: name.to_string(), signature, axioms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig_pc() -> Signature {
        Signature::build(&[("P", 1)], &[], &["c"]).unwrap()
    }

    #[test]
    fn complexity_base_cases() {
        let p_c = Formula::atom("P", vec![Term::Const("c".into())]);
        assert_eq!(p_c.complexity(), 1);
        assert_eq!(Formula::Falsum.complexity(), 1);
    }

    #[test]
    fn complexity_connectives_and_quantifiers() {
        let p = Formula::atom("P", vec![Term::Const("c".into())]);
        let q = Formula::atom("Q", vec![Term::Const("c".into())]);
        assert_eq!(Formula::and(p.clone(), q).complexity(), 2);
        let nested = Formula::forall(
            "x",
            Formula::implies(Formula::atom("P", vec![Term::Var("x".into())]), Formula::Falsum),
        );
        assert_eq!(nested.complexity(), 3);
    }

    #[test]
    fn term_complexity_examples() {
        let zero = Term::Const("zero".into());
        assert_eq!(zero.complexity(), 1);
        let s_zero = Term::App("S".into(), vec![zero.clone()]);
        assert_eq!(s_zero.complexity(), 2);
        let sum = Term::App("plus".into(), vec![s_zero, zero]);
        assert_eq!(sum.complexity(), 3);
    }

    #[test]
    fn printer_never_emits_tilde_and_parenthesizes_composites() {
        let p = Formula::atom("P", vec![Term::Const("c".into())]);
        let neg = Formula::not(p.clone());
        assert_eq!(neg.to_string(), "(P(c) -> false)");
        let lem = Formula::or(p.clone(), neg);
        assert_eq!(lem.to_string(), "(P(c) | (P(c) -> false))");
        let q = Formula::forall("x", Formula::atom("P", vec![Term::Var("x".into())]));
        assert_eq!(q.to_string(), "(forall x. P(x))");
    }

    #[test]
    fn substitution_respects_shadowing() {
        let body = Formula::and(
            Formula::atom("P", vec![Term::Var("x".into())]),
            Formula::exists("x", Formula::atom("P", vec![Term::Var("x".into())])),
        );
        let out = body.substitute("x", &Term::Const("c".into()));
        assert_eq!(out.to_string(), "(P(c) & (exists x. P(x)))");
    }

    #[test]
    fn free_vars_and_closedness() {
        let sig = sig_pc();
        let open = Formula::atom("P", vec![Term::Var("x".into())]);
        assert_eq!(open.free_vars().into_iter().collect::<Vec<_>>(), vec!["x".to_string()]);
        assert!(!open.is_closed());
        let closed = Formula::forall("x", open);
        assert!(closed.is_closed());
        assert!(check_formula(&closed, &sig).is_ok());
    }

    #[test]
    fn signature_rejects_duplicates_and_nullary_functions() {
        let mut sig = sig_pc();
        assert!(matches!(sig.declare_constant("P"), Err(SignatureError::DuplicateName(_))));
        assert!(matches!(sig.declare_function("g", 0), Err(SignatureError::NullaryFunction(_))));
        assert!(matches!(
            sig.declare_predicate("forall", 1),
            Err(SignatureError::BadIdentifier(_))
        ));
    }

    #[test]
    fn check_formula_flags_arity_mismatch() {
        let sig = sig_pc();
        let bad = Formula::atom("P", vec![Term::Const("c".into()), Term::Const("c".into())]);
        let err = check_formula(&bad, &sig).unwrap_err();
        assert!(err.contains("expects 1"));
    }

    #[test]
    fn elem_terms_print_with_hash() {
        let t = Term::Elem(3);
        assert_eq!(t.to_string(), "#3");
        let f = Formula::atom("P", vec![t]);
        assert_eq!(f.to_string(), "P(#3)");
    }
}
