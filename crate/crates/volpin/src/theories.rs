//! Generators for the demo theories used in consistency-radius experiments:
//! a small variant of Robinson arithmetic `Q`, its `GRAHAM` extension with an
//! explicit inaccessibility axiom, a chain of relative inaccessibles, and a
//! free-standing feasibility fragment `FIZF` over set terms.  The module also
//! houses a budgeted evaluator for the shifted arrow hyperoperation `up` and
//! a small driver that tabulates radii across a family of theories.
//!
//! Equality and order are ordinary declared predicates `eq` and `lt` with
//! finitely many defining axioms; the proof engine knows nothing special
//! about them.  In particular there are no congruence axioms, so terms
//! compare only when their comparison unfolds syntactically — which is
//! exactly the resource-sensitivity these theories are built to exhibit.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::proof::{ConsistencyRadius, Prover, ResourceLimit, Sequent};
use crate::syntax::{check_term, Formula, Signature, Term, Theory};

fn v(name: &str) -> Term {
    Term::Var(name.to_string())
}

fn fun(name: &str, args: Vec<Term>) -> Term {
    Term::App(name.to_string(), args)
}

fn s(t: Term) -> Term {
    fun("S", vec![t])
}

fn eq(a: Term, b: Term) -> Formula {
    Formula::atom("eq", vec![a, b])
}

fn lt(a: Term, b: Term) -> Formula {
    Formula::atom("lt", vec![a, b])
}

fn feasible(t: Term) -> Formula {
    Formula::atom("F", vec![t])
}

/// The successor numeral `S(S(...S(zero)...))` with `n` applications of `S`.
pub fn numeral(n: usize) -> Term {
    let mut t = Term::Const("zero".to_string());
    for _ in 0..n {
        t = s(t);
    }
    t
}

/// Arithmetic signature: constant `zero`, functions `S/1`, `plus/2`,
/// `times/2`, declared predicates `eq/2` and `lt/2`.
pub fn q_signature() -> Signature {
    Signature::build(
        &[("eq", 2), ("lt", 2)],
        &[("S", 1), ("plus", 2), ("times", 2)],
        &["zero"],
    )
    .expect("fixed arithmetic signature is well-formed")
}

/// [`q_signature`] extended with the ternary hyperoperation `up/3`.
pub fn graham_signature() -> Signature {
    Signature::build(
        &[("eq", 2), ("lt", 2)],
        &[("S", 1), ("plus", 2), ("times", 2), ("up", 3)],
        &["zero"],
    )
    .expect("fixed hyperoperation signature is well-formed")
}

/// Set-term signature for the feasibility fragment: constant `emptyset`,
/// functions `union/2`, `pair/2`, `pow/1`, predicates `F/1` and `mem/2`.
pub fn fizf_signature() -> Signature {
    Signature::build(
        &[("F", 1), ("mem", 2)],
        &[("union", 2), ("pair", 2), ("pow", 1)],
        &["emptyset"],
    )
    .expect("fixed set-term signature is well-formed")
}

/// The ten axioms of the `Q` variant, in their documented order:
///
/// 1. `∀x ¬eq(S(x), zero)` — zero has no predecessor;
/// 2. `∀x∀y (eq(S(x), S(y)) → eq(x, y))` — successor is injective;
/// 3. `∀x (¬eq(x, zero) → ∃y eq(x, S(y)))` — nonzero numbers are successors;
/// 4. `∀x eq(plus(x, zero), x)` and
/// 5. `∀x∀y eq(plus(x, S(y)), S(plus(x, y)))` — recursion for `plus`;
/// 6. `∀x eq(times(x, zero), zero)` and
/// 7. `∀x∀y eq(times(x, S(y)), plus(times(x, y), x))` — recursion for `times`;
/// 8. `∀x eq(x, x)` — reflexivity, the defining axiom for `eq`;
/// 9. `∀x ¬lt(x, zero)` — nothing is below zero;
/// 10. `∀x∀y (lt(S(x), S(y)) → lt(x, y))` — `lt` descends under successor.
fn q_axiom_list() -> Vec<Formula> {
    vec![
        Formula::forall("x", Formula::not(eq(s(v("x")), numeral(0)))),
        Formula::forall(
            "x",
            Formula::forall(
                "y",
                Formula::implies(eq(s(v("x")), s(v("y"))), eq(v("x"), v("y"))),
            ),
        ),
        Formula::forall(
            "x",
            Formula::implies(
                Formula::not(eq(v("x"), numeral(0))),
                Formula::exists("y", eq(v("x"), s(v("y")))),
            ),
        ),
        Formula::forall("x", eq(fun("plus", vec![v("x"), numeral(0)]), v("x"))),
        Formula::forall(
            "x",
            Formula::forall(
                "y",
                eq(
                    fun("plus", vec![v("x"), s(v("y"))]),
                    s(fun("plus", vec![v("x"), v("y")])),
                ),
            ),
        ),
        Formula::forall("x", eq(fun("times", vec![v("x"), numeral(0)]), numeral(0))),
        Formula::forall(
            "x",
            Formula::forall(
                "y",
                eq(
                    fun("times", vec![v("x"), s(v("y"))]),
                    fun("plus", vec![fun("times", vec![v("x"), v("y")]), v("x")]),
                ),
            ),
        ),
        Formula::forall("x", eq(v("x"), v("x"))),
        Formula::forall("x", Formula::not(lt(v("x"), numeral(0)))),
        Formula::forall(
            "x",
            Formula::forall(
                "y",
                Formula::implies(lt(s(v("x")), s(v("y"))), lt(v("x"), v("y"))),
            ),
        ),
    ]
}

/// The three defining axioms of the shifted arrow hyperoperation:
///
/// 1. `∀x∀y eq(up(x, y, zero), x)`;
/// 2. `∀x∀y eq(up(x, zero, S(y)), times(x, up(x, zero, y)))`;
/// 3. `∀x∀y∀z eq(up(x, S(z), S(y)), up(x, z, up(x, S(z), y)))`.
fn arrow_axiom_list() -> Vec<Formula> {
    vec![
        Formula::forall(
            "x",
            Formula::forall("y", eq(fun("up", vec![v("x"), v("y"), numeral(0)]), v("x"))),
        ),
        Formula::forall(
            "x",
            Formula::forall(
                "y",
                eq(
                    fun("up", vec![v("x"), numeral(0), s(v("y"))]),
                    fun("times", vec![v("x"), fun("up", vec![v("x"), numeral(0), v("y")])]),
                ),
            ),
        ),
        Formula::forall(
            "x",
            Formula::forall(
                "y",
                Formula::forall(
                    "z",
                    eq(
                        fun("up", vec![v("x"), s(v("z")), s(v("y"))]),
                        fun("up", vec![v("x"), v("z"), fun("up", vec![v("x"), s(v("z")), v("y")])]),
                    ),
                ),
            ),
        ),
    ]
}

/// A generator was fed a parameter it cannot turn into a theory.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TheoryError {
    /// Inaccessibility bounds must be closed terms.
    #[error("term `{0}` has free variables; a closed term is required")]
    OpenTerm(String),
    /// The term uses symbols the target signature does not declare.
    #[error("term `{term}` is ill-formed here: {reason}")]
    InvalidTerm { term: String, reason: String },
    /// A chain with `levels` levels needs one bound term per level past the
    /// first.
    #[error("a chain of {levels} levels needs {needed} bound terms, got {got}")]
    ChainLength { levels: usize, needed: usize, got: usize },
}

fn validate_closed(term: &Term, sig: &Signature) -> Result<(), TheoryError> {
    if !term.is_closed() {
        return Err(TheoryError::OpenTerm(term.to_string()));
    }
    check_term(term, sig, &[]).map_err(|reason| TheoryError::InvalidTerm {
        term: term.to_string(),
        reason,
    })
}

/// The ten-axiom `Q` variant over [`q_signature`].
pub fn q_axioms() -> Theory {
    Theory::new("Q", q_signature(), q_axiom_list()).expect("Q axioms are closed and well-formed")
}

/// `Q`, the three arrow axioms, and one inaccessibility axiom
/// `∀n lt(n, t)` declaring every number below the given closed term.
///
/// Fourteen axioms in all.  The headline instance puts the 64th member of
/// the Graham sequence (see [`g_term`]) in the bound; desk-scale experiments
/// substitute small numerals so that radii stay measurable.
pub fn graham_theory(inaccessible: &Term) -> Result<Theory, TheoryError> {
    let sig = graham_signature();
    validate_closed(inaccessible, &sig)?;
    let mut axioms = q_axiom_list();
    axioms.extend(arrow_axiom_list());
    axioms.push(Formula::forall("n", lt(v("n"), inaccessible.clone())));
    let name = format!("GRAHAM({inaccessible})");
    Ok(Theory::new(&name, sig, axioms).expect("generated axioms are closed and well-formed"))
}

/// `Q`, the arrow axioms, and one inaccessibility axiom per level:
/// `∀n lt(up(3, i+1, n), bounds[i])` for `i = 0 .. levels-2`.
///
/// Each level says the next-higher arrow applied to *any* number still lands
/// below that level's bound, so the bounds behave like a ladder of relative
/// inaccessibles.  `levels <= 1` yields just `Q` plus the arrow axioms; extra
/// bound terms beyond the needed `levels - 1` are ignored.
pub fn chain_theory(levels: usize, bounds: &[Term]) -> Result<Theory, TheoryError> {
    let sig = graham_signature();
    let needed = levels.saturating_sub(1);
    if bounds.len() < needed {
        return Err(TheoryError::ChainLength { levels, needed, got: bounds.len() });
    }
    let mut axioms = q_axiom_list();
    axioms.extend(arrow_axiom_list());
    for (i, bound) in bounds.iter().take(needed).enumerate() {
        validate_closed(bound, &sig)?;
        axioms.push(Formula::forall(
            "n",
            lt(fun("up", vec![numeral(3), numeral(i + 1), v("n")]), bound.clone()),
        ));
    }
    let name = format!("CHAIN({levels})");
    Ok(Theory::new(&name, sig, axioms).expect("generated axioms are closed and well-formed"))
}

/// Symbolic default bounds for [`chain_theory`]: `k₀ = up(3, 1, 9)` — a
/// two-arrow tower, ten levels in classical counting — and thereafter
/// `kᵢ = up(3, i+2, k_{i-1})`, each level one arrow higher than the last.
/// These terms exist purely as syntax to sit inside inaccessibility axioms;
/// nothing ever evaluates them.
pub fn chain_bound_terms(levels: usize) -> Vec<Term> {
    let mut bounds: Vec<Term> = Vec::new();
    for i in 0..levels.saturating_sub(1) {
        let bound = match bounds.last() {
            None => fun("up", vec![numeral(3), numeral(1), numeral(9)]),
            Some(prev) => fun("up", vec![numeral(3), numeral(i + 1), prev.clone()]),
        };
        bounds.push(bound);
    }
    bounds
}

/// The `n`-th member of the Graham sequence as a closed term:
/// `g_term(1) = up(3, 3, 2)` and `g_term(n+1) = up(3, g_term(n), 2)`, so the
/// superscript of each member is the whole previous member.  `g_term(64)` is
/// the classical headline value; like the chain bounds, these are syntax
/// only and are never evaluated.
pub fn g_term(n: usize) -> Term {
    assert!(n >= 1, "the Graham sequence is indexed from 1");
    let mut t = fun("up", vec![numeral(3), numeral(3), numeral(2)]);
    for _ in 1..n {
        t = fun("up", vec![numeral(3), t, numeral(2)]);
    }
    t
}

/// The feasibility fragment over set terms: `F(emptyset)`, closure of `F`
/// under `union`, `pair`, and `pow`, and one negative axiom `¬F(t)` for the
/// given closed term.  Five axioms; there is no induction for `F`, which is
/// what keeps the radius growing with the term rather than collapsing.
pub fn fizf_theory(unfeasible: &Term) -> Result<Theory, TheoryError> {
    let sig = fizf_signature();
    validate_closed(unfeasible, &sig)?;
    let empty = Term::Const("emptyset".to_string());
    let axioms = vec![
        feasible(empty),
        Formula::forall(
            "a",
            Formula::forall(
                "b",
                Formula::implies(
                    Formula::and(feasible(v("a")), feasible(v("b"))),
                    feasible(fun("union", vec![v("a"), v("b")])),
                ),
            ),
        ),
        Formula::forall(
            "a",
            Formula::forall(
                "b",
                Formula::implies(
                    Formula::and(feasible(v("a")), feasible(v("b"))),
                    feasible(fun("pair", vec![v("a"), v("b")])),
                ),
            ),
        ),
        Formula::forall(
            "a",
            Formula::implies(feasible(v("a")), feasible(fun("pow", vec![v("a")]))),
        ),
        Formula::not(feasible(unfeasible.clone())),
    ];
    let name = format!("FIZF({unfeasible})");
    Ok(Theory::new(&name, sig, axioms).expect("generated axioms are closed and well-formed"))
}

/// One budgeted run of the arrow evaluator: the inputs, the budget, and what
/// the unfolding produced.  `steps_used <= budget` always holds, and a
/// present `result` is the exact value of the unfolding — running out of
/// budget yields `None`, never an approximation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperEval {
    pub base: u64,
    pub superscript: u64,
    pub argument: u64,
    pub budget: u64,
    /// `None` when the budget ran out before the unfolding finished.
    pub result: Option<BigUint>,
    /// Rule applications performed; equals `budget` exactly when exceeded.
    pub steps_used: u64,
}

enum ArrowTask {
    Unfold { superscript: u64, argument: BigUint },
    Yield(BigUint),
}

enum ArrowPending {
    /// Multiply the incoming value by the base (middle axiom).
    MulBase,
    /// Feed the incoming value back in as the argument under this
    /// superscript (last axiom).
    UnfoldWith(u64),
}

/// Evaluates `up(base, superscript, argument)` by running the three arrow
/// axioms as rewrite rules, charging one budget step per rule application.
///
/// The indexing is the *shifted* convention used throughout this crate, one
/// short of classical arrow notation in both indices:
///
/// * `up(x, y, 0) = x` for every superscript `y`;
/// * `up(x, 0, z)` multiplies out to `x^(z+1)` — superscript 0 is already
///   the one-arrow power, and the argument undercounts the classical tower
///   height by one;
/// * `up(x, y+1, z+1) = up(x, y, up(x, y+1, z))` hands the inner value to
///   the next arrow down.
///
/// So `up(3, 0, 1) = 9`, `up(3, 1, 1) = 81`, `up(2, 2, 1) = 512`.  The
/// evaluator is an explicit-stack machine, so astronomically deep unfoldings
/// fail by budget, not by stack overflow.
pub fn uparrow(base: u64, superscript: u64, argument: u64, budget: u64) -> HyperEval {
    let zero = BigUint::from(0u32);
    let mut steps: u64 = 0;
    let mut pending: Vec<ArrowPending> = Vec::new();
    let mut task = ArrowTask::Unfold { superscript, argument: BigUint::from(argument) };
    let result = loop {
        match task {
            ArrowTask::Unfold { superscript: sup, argument: arg } => {
                if steps == budget {
                    break None;
                }
                steps += 1;
                if arg == zero {
                    task = ArrowTask::Yield(BigUint::from(base));
                } else if sup == 0 {
                    pending.push(ArrowPending::MulBase);
                    task = ArrowTask::Unfold { superscript: 0, argument: arg - 1u32 };
                } else {
                    pending.push(ArrowPending::UnfoldWith(sup - 1));
                    task = ArrowTask::Unfold { superscript: sup, argument: arg - 1u32 };
                }
            }
            ArrowTask::Yield(value) => match pending.pop() {
                None => break Some(value),
                Some(ArrowPending::MulBase) => task = ArrowTask::Yield(value * base),
                Some(ArrowPending::UnfoldWith(sup)) => {
                    task = ArrowTask::Unfold { superscript: sup, argument: value }
                }
            },
        }
    };
    HyperEval { base, superscript, argument, budget, result, steps_used: steps }
}

/// A parameter pack naming one of the generated theories.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheorySpec {
    Q,
    Graham { inaccessible: Term },
    Chain { levels: usize, bounds: Vec<Term> },
    Fizf { unfeasible: Term },
}

impl TheorySpec {
    pub fn build(&self) -> Result<Theory, TheoryError> {
        match self {
            TheorySpec::Q => Ok(q_axioms()),
            TheorySpec::Graham { inaccessible } => graham_theory(inaccessible),
            TheorySpec::Chain { levels, bounds } => chain_theory(*levels, bounds),
            TheorySpec::Fizf { unfeasible } => fizf_theory(unfeasible),
        }
    }
}

/// What one row of a radius table produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveOutcome {
    Radius(ConsistencyRadius),
    /// The node budget ran out before the radius was settled for this row.
    Limited(ResourceLimit),
}

impl fmt::Display for CurveOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveOutcome::Radius(r) => write!(f, "{r}"),
            CurveOutcome::Limited(_) => write!(f, "budget exceeded"),
        }
    }
}

/// One row of a radius table: the caller's label, the outcome, and how many
/// sequents the searches for this row visited in total.
#[derive(Clone, Debug)]
pub struct CurveRow {
    pub label: String,
    pub outcome: CurveOutcome,
    pub nodes_used: u64,
}

/// Measures the consistency radius of each labelled theory, recording
/// resource exhaustion per row instead of aborting the table.
///
/// Deep axiom terms are kept whole in the instantiation pool regardless of
/// `pool_height_cap`; the cap only limits freshly composed terms, and for
/// arithmetic theories a cap of 1 keeps refutation search tractable without
/// losing the instantiations the refutations actually use.
pub fn radius_curve(
    rows: &[(String, Theory)],
    k_max: usize,
    budget: u64,
    pool_height_cap: usize,
) -> Vec<CurveRow> {
    rows.iter()
        .map(|(label, theory)| {
            let mut prover = Prover::for_theory(theory);
            prover.set_budget(budget);
            prover.set_pool_height_cap(pool_height_cap);
            let goal = Sequent::new(theory.axioms.iter().cloned(), Formula::Falsum);
            let mut nodes_used: u64 = 0;
            let mut settled = None;
            for k in 1..=k_max {
                let attempt = prover.prove_bounded(&goal, k);
                nodes_used += prover.nodes_used();
                match attempt {
                    Ok(Some(_)) => {
                        settled = Some(CurveOutcome::Radius(ConsistencyRadius::Exactly(k - 1)));
                        break;
                    }
                    Ok(None) => {}
                    Err(limit) => {
                        settled = Some(CurveOutcome::Limited(limit));
                        break;
                    }
                }
            }
            let outcome =
                settled.unwrap_or(CurveOutcome::Radius(ConsistencyRadius::AtLeast(k_max)));
            CurveRow { label: label.clone(), outcome, nodes_used }
        })
        .collect()
}
