//! Exhaustive depth-bounded backtracking search.
//!
//! The prover tries every applicable rule instance at every node, in a fixed
//! order, so the search is deterministic and complete for the depth bound
//! relative to the instantiation pool.  Rule order is a heuristic only: no
//! rule is applied "eagerly without backtracking", because committing to an
//! invertible rule first can force a taller proof than the bound allows even
//! when a different root rule would fit.
//!
//! Four devices keep the search tractable:
//!
//! * a loop check prunes a branch when a sequent repeats on it (a minimal
//!   proof never repeats a sequent along a branch);
//! * failures are memoized per sequent with the depth they are definitive
//!   for — but only when the failed subtree was explored without any loop
//!   pruning, since pruned failures are relative to the branch above them;
//! * an atomic goal is abandoned outright when no consistent instantiation
//!   of a positively occurring atom in the antecedent can produce it (a
//!   subformula property of cut-free proofs: axiom leaves take their atom
//!   from positive decomposition of the antecedent);
//! * a classical countermodel filter rejects sequents that are not even
//!   classically valid in a small finite structure (see `classical`).

use super::classical::ClassicalFilter;
use super::{check_proof, ProofTree, RuleName, Sequent};
use crate::syntax::{Formula, Signature, Term, Theory};
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;
use thiserror::Error;

/// The search visited more sequents than the configured node budget allows.
/// This is a distinct outcome from "no proof": the search was cut short.
#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("proof search exceeded the node budget of {budget} sequents")]
pub struct ResourceLimit {
    pub budget: u64,
}

const DEFAULT_BUDGET: u64 = 1_000_000;
const DEFAULT_POOL_HEIGHT_CAP: usize = 3;

/// Depth-bounded proof search engine with persistent caches.
///
/// A prover is tied to one signature and one set of base pool terms; its
/// failure memo stays valid across calls because memo entries only ever
/// assert "no proof of this sequent within depth d", which is intrinsic to
/// the sequent once the pool construction is fixed.
pub struct Prover {
    signature: Signature,
    base_terms: Vec<Term>,
    pool_height_cap: usize,
    budget: u64,
    nodes: u64,
    fail_memo: HashMap<Sequent, usize>,
    filter: ClassicalFilter,
}

enum Outcome {
    Found(ProofTree),
    Failed { pruned: bool },
}

/// One applicable rule instance: what to record in the tree and which
/// premises to prove.
struct Move<'a> {
    rule: RuleName,
    principal: Option<&'a Formula>,
    instantiation: Option<&'a Term>,
    premises: Vec<Sequent>,
}

impl Prover {
    pub fn new(signature: Signature) -> Prover {
        Prover {
            signature,
            base_terms: Vec::new(),
            pool_height_cap: DEFAULT_POOL_HEIGHT_CAP,
            budget: DEFAULT_BUDGET,
            nodes: 0,
            fail_memo: HashMap::new(),
            filter: ClassicalFilter::new(),
        }
    }

    /// A prover over the theory's signature whose instantiation pool always
    /// contains the theory's constants.
    pub fn for_theory(theory: &Theory) -> Prover {
        let mut prover = Prover::new(theory.signature.clone());
        let constants: Vec<Term> = theory
            .signature
            .constants
            .iter()
            .cloned()
            .map(Term::Const)
            .collect();
        prover.add_base_terms(constants);
        prover
    }

    /// Extends the base instantiation terms.  Clears the caches: both the
    /// failure memo and the filter are relative to the pool construction.
    pub fn add_base_terms(&mut self, terms: impl IntoIterator<Item = Term>) {
        self.base_terms.extend(terms);
        self.base_terms.sort();
        self.base_terms.dedup();
        self.fail_memo.clear();
        self.filter.reset();
    }

    pub fn set_budget(&mut self, budget: u64) {
        self.budget = budget;
    }

    /// Height cap for terms composed when closing the pool under one function
    /// application.  Terms harvested from the sequent itself are kept whole.
    pub fn set_pool_height_cap(&mut self, cap: usize) {
        self.pool_height_cap = cap;
        self.fail_memo.clear();
        self.filter.reset();
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Sequents visited by the most recent `prove_bounded` call.
    pub fn nodes_used(&self) -> u64 {
        self.nodes
    }

    /// Searches for a proof of `sequent` of depth at most `k`.
    ///
    /// `Ok(None)` means the bounded search space was exhausted; exceeding the
    /// node budget is the explicit [`ResourceLimit`] error instead.
    pub fn prove_bounded(
        &mut self,
        sequent: &Sequent,
        k: usize,
    ) -> Result<Option<ProofTree>, ResourceLimit> {
        self.nodes = 0;
        let mut branch = Vec::new();
        match self.search(sequent, k, &mut branch)? {
            Outcome::Found(tree) => {
                debug_assert!(check_proof(&tree).is_ok());
                debug_assert!(tree.depth() <= k);
                Ok(Some(tree))
            }
            Outcome::Failed { .. } => Ok(None),
        }
    }

    fn search(
        &mut self,
        seq: &Sequent,
        depth_left: usize,
        branch: &mut Vec<Sequent>,
    ) -> Result<Outcome, ResourceLimit> {
        if depth_left == 0 {
            return Ok(Outcome::Failed { pruned: false });
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(ResourceLimit {
                budget: self.budget,
            });
        }
        if matches!(seq.succedent(), Formula::Atom(..)) && seq.assumes(seq.succedent()) {
            return Ok(Outcome::Found(leaf(RuleName::Axiom, seq)));
        }
        if seq.assumes(&Formula::Falsum) {
            return Ok(Outcome::Found(leaf(RuleName::LFalsum, seq)));
        }
        if depth_left == 1 {
            return Ok(Outcome::Failed { pruned: false });
        }
        if let Some(&known) = self.fail_memo.get(seq) {
            if known >= depth_left {
                return Ok(Outcome::Failed { pruned: false });
            }
        }
        if atomic_goal_unreachable(seq) {
            // A subformula-property failure is absolute, not depth-relative.
            self.fail_memo.insert(seq.clone(), usize::MAX);
            return Ok(Outcome::Failed { pruned: false });
        }
        if branch.contains(seq) {
            return Ok(Outcome::Failed { pruned: true });
        }
        let pool = self.term_pool(seq);
        if self.filter.rejects(&self.signature, &pool, seq) {
            // Classical invalidity is absolute too.
            self.fail_memo.insert(seq.clone(), usize::MAX);
            return Ok(Outcome::Failed { pruned: false });
        }
        branch.push(seq.clone());
        let outcome = self.expand(seq, &pool, depth_left, branch);
        branch.pop();
        let outcome = outcome?;
        if let Outcome::Failed { pruned: false } = outcome {
            let entry = self.fail_memo.entry(seq.clone()).or_insert(0);
            *entry = (*entry).max(depth_left);
        }
        Ok(outcome)
    }

    /// Tries every rule instance applicable to `seq`, in fixed order.
    fn expand(
        &mut self,
        seq: &Sequent,
        pool: &[Term],
        depth_left: usize,
        branch: &mut Vec<Sequent>,
    ) -> Result<Outcome, ResourceLimit> {
        let mut pruned = false;
        let ante: Vec<Rc<Formula>> = seq.antecedent.clone();

        if let Formula::Implies(a, b) = seq.succedent() {
            let mv = Move {
                rule: RuleName::RImplies,
                principal: Some(seq.succedent()),
                instantiation: None,
                premises: vec![seq.insert((**a).clone()).with_succedent((**b).clone())],
            };
            if let Some(tree) = self.attempt(seq, mv, depth_left, branch, &mut pruned)? {
                return Ok(Outcome::Found(tree));
            }
        }
        for f in &ante {
            if let Formula::And(a, b) = f.as_ref() {
                let mv = Move {
                    rule: RuleName::LAnd,
                    principal: Some(f),
                    instantiation: None,
                    premises: vec![seq.remove(f).insert((**a).clone()).insert((**b).clone())],
                };
                if let Some(tree) = self.attempt(seq, mv, depth_left, branch, &mut pruned)? {
                    return Ok(Outcome::Found(tree));
                }
            }
        }
        for f in &ante {
            if let Formula::Exists(x, body) = f.as_ref() {
                let eigen = fresh_eigenvariable(seq);
                let premise = seq.remove(f).insert(body.substitute(x, &eigen));
                let mv = Move {
                    rule: RuleName::LExists,
                    principal: Some(f),
                    instantiation: Some(&eigen),
                    premises: vec![premise],
                };
                if let Some(tree) = self.attempt(seq, mv, depth_left, branch, &mut pruned)? {
                    return Ok(Outcome::Found(tree));
                }
            }
        }
        if let Formula::Forall(x, body) = seq.succedent() {
            let eigen = fresh_eigenvariable(seq);
            let premise = seq.with_succedent(body.substitute(x, &eigen));
            let mv = Move {
                rule: RuleName::RForall,
                principal: Some(seq.succedent()),
                instantiation: Some(&eigen),
                premises: vec![premise],
            };
            if let Some(tree) = self.attempt(seq, mv, depth_left, branch, &mut pruned)? {
                return Ok(Outcome::Found(tree));
            }
        }
        if let Formula::And(a, b) = seq.succedent() {
            let mv = Move {
                rule: RuleName::RAnd,
                principal: Some(seq.succedent()),
                instantiation: None,
                premises: vec![
                    seq.with_succedent((**a).clone()),
                    seq.with_succedent((**b).clone()),
                ],
            };
            if let Some(tree) = self.attempt(seq, mv, depth_left, branch, &mut pruned)? {
                return Ok(Outcome::Found(tree));
            }
        }
        for f in &ante {
            if let Formula::Or(a, b) = f.as_ref() {
                let mv = Move {
                    rule: RuleName::LOr,
                    principal: Some(f),
                    instantiation: None,
                    premises: vec![
                        seq.remove(f).insert((**a).clone()),
                        seq.remove(f).insert((**b).clone()),
                    ],
                };
                if let Some(tree) = self.attempt(seq, mv, depth_left, branch, &mut pruned)? {
                    return Ok(Outcome::Found(tree));
                }
            }
        }
        for f in &ante {
            if let Formula::Implies(a, b) = f.as_ref() {
                // The implication stays available while proving its
                // antecedent; only the right premise discharges it.
                let mv = Move {
                    rule: RuleName::LImplies,
                    principal: Some(f),
                    instantiation: None,
                    premises: vec![
                        seq.with_succedent((**a).clone()),
                        seq.remove(f).insert((**b).clone()),
                    ],
                };
                if let Some(tree) = self.attempt(seq, mv, depth_left, branch, &mut pruned)? {
                    return Ok(Outcome::Found(tree));
                }
            }
        }
        if let Formula::Or(a, b) = seq.succedent() {
            for (rule, side) in [(RuleName::ROr1, a), (RuleName::ROr2, b)] {
                let mv = Move {
                    rule,
                    principal: Some(seq.succedent()),
                    instantiation: None,
                    premises: vec![seq.with_succedent((**side).clone())],
                };
                if let Some(tree) = self.attempt(seq, mv, depth_left, branch, &mut pruned)? {
                    return Ok(Outcome::Found(tree));
                }
            }
        }
        if let Formula::Exists(x, body) = seq.succedent() {
            for t in pool {
                let mv = Move {
                    rule: RuleName::RExists,
                    principal: Some(seq.succedent()),
                    instantiation: Some(t),
                    premises: vec![seq.with_succedent(body.substitute(x, t))],
                };
                if let Some(tree) = self.attempt(seq, mv, depth_left, branch, &mut pruned)? {
                    return Ok(Outcome::Found(tree));
                }
            }
        }
        for f in &ante {
            if let Formula::Forall(x, body) = f.as_ref() {
                for t in pool {
                    // The universal stays in the antecedent for reuse; an
                    // instance already present would repeat the sequent.
                    let premise = seq.insert(body.substitute(x, t));
                    if premise == *seq {
                        continue;
                    }
                    let mv = Move {
                        rule: RuleName::LForall,
                        principal: Some(f),
                        instantiation: Some(t),
                        premises: vec![premise],
                    };
                    if let Some(tree) = self.attempt(seq, mv, depth_left, branch, &mut pruned)? {
                        return Ok(Outcome::Found(tree));
                    }
                }
            }
        }
        Ok(Outcome::Failed { pruned })
    }

    /// Searches all premises of one rule instance; `None` means the instance
    /// fails, with `pruned` accumulating whether any failure was loop-pruned
    /// (and hence only valid relative to the current branch).
    fn attempt(
        &mut self,
        conclusion: &Sequent,
        mv: Move<'_>,
        depth_left: usize,
        branch: &mut Vec<Sequent>,
        pruned: &mut bool,
    ) -> Result<Option<ProofTree>, ResourceLimit> {
        let mut subtrees = Vec::with_capacity(mv.premises.len());
        for premise in &mv.premises {
            match self.search(premise, depth_left - 1, branch)? {
                Outcome::Found(tree) => subtrees.push(tree),
                Outcome::Failed { pruned: p } => {
                    *pruned |= p;
                    return Ok(None);
                }
            }
        }
        Ok(Some(ProofTree {
            rule: mv.rule,
            conclusion: conclusion.clone(),
            premises: subtrees,
            principal: mv.principal.cloned(),
            instantiation: mv.instantiation.cloned(),
        }))
    }

    /// The admissible instantiation terms for `seq`: closed terms harvested
    /// from the sequent, plus the base terms, closed under one round of
    /// function application with composed terms capped at the height bound.
    /// Sorted by (height, rendering), so small terms are tried first.
    pub fn term_pool(&self, seq: &Sequent) -> Vec<Term> {
        let mut set = seq.closed_terms();
        set.extend(self.base_terms.iter().cloned());
        let parts: Vec<Term> = set
            .iter()
            .filter(|t| t.complexity() < self.pool_height_cap)
            .cloned()
            .collect();
        let mut composed = Vec::new();
        for (name, arity) in &self.signature.functions {
            if parts.is_empty() {
                break;
            }
            let mut idx = vec![0usize; *arity];
            loop {
                let args: Vec<Term> = idx.iter().map(|&i| parts[i].clone()).collect();
                composed.push(Term::App(name.clone(), args));
                let mut pos = 0;
                while pos < idx.len() {
                    idx[pos] += 1;
                    if idx[pos] < parts.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == idx.len() {
                    break;
                }
            }
        }
        set.extend(composed);
        let mut pool: Vec<Term> = set.into_iter().collect();
        pool.sort_by_cached_key(|t| (t.complexity(), t.to_string()));
        pool
    }
}

fn leaf(rule: RuleName, conclusion: &Sequent) -> ProofTree {
    ProofTree {
        rule,
        conclusion: conclusion.clone(),
        premises: vec![],
        principal: None,
        instantiation: None,
    }
}

/// Eigenvariables are constants `@0`, `@1`, ...; fresh means one past the
/// largest index occurring anywhere in the sequent.
fn fresh_eigenvariable(seq: &Sequent) -> Term {
    let mut next = 0usize;
    for f in seq.antecedent().chain(std::iter::once(seq.succedent())) {
        for c in f.constants() {
            if let Some(rest) = c.strip_prefix('@') {
                if let Ok(n) = rest.parse::<usize>() {
                    next = next.max(n + 1);
                }
            }
        }
    }
    Term::Const(format!("@{next}"))
}

/// True if the succedent is an atom that no proof from this antecedent can
/// reach.  In a cut-free proof the atom closing an axiom leaf enters the
/// antecedent by positive decomposition, instantiating bound variables
/// uniformly; so if no positively occurring atom (or positively occurring
/// `false`, which lets anything follow) matches the goal under a consistent
/// variable binding, the sequent is unprovable at any depth.
fn atomic_goal_unreachable(seq: &Sequent) -> bool {
    let Formula::Atom(pred, args) = seq.succedent() else {
        return false;
    };
    !seq.antecedent()
        .any(|f| positive_occurrence_matches(f, pred, args, true))
}

fn positive_occurrence_matches(f: &Formula, pred: &str, args: &[Term], positive: bool) -> bool {
    match f {
        Formula::Atom(p, pargs) => {
            positive && p == pred && {
                let mut binding = BTreeMap::new();
                pargs
                    .iter()
                    .zip(args)
                    .all(|(pat, goal)| pattern_matches(pat, goal, &mut binding))
            }
        }
        Formula::Falsum => positive,
        Formula::And(a, b) | Formula::Or(a, b) => {
            positive_occurrence_matches(a, pred, args, positive)
                || positive_occurrence_matches(b, pred, args, positive)
        }
        Formula::Implies(a, b) => {
            positive_occurrence_matches(a, pred, args, !positive)
                || positive_occurrence_matches(b, pred, args, positive)
        }
        Formula::Exists(_, body) | Formula::Forall(_, body) => {
            positive_occurrence_matches(body, pred, args, positive)
        }
    }
}

/// One-sided matching of a pattern term with variables against a ground goal
/// term; repeated variables must bind consistently.
fn pattern_matches<'a>(
    pattern: &'a Term,
    goal: &'a Term,
    binding: &mut BTreeMap<&'a str, &'a Term>,
) -> bool {
    match pattern {
        Term::Var(name) => match binding.get(name.as_str()) {
            Some(bound) => *bound == goal,
            None => {
                binding.insert(name, goal);
                true
            }
        },
        Term::Const(_) | Term::Elem(_) => pattern == goal,
        Term::App(name, pargs) => match goal {
            Term::App(gname, gargs) if gname == name && gargs.len() == pargs.len() => pargs
                .iter()
                .zip(gargs)
                .all(|(p, g)| pattern_matches(p, g, binding)),
            _ => false,
        },
    }
}
