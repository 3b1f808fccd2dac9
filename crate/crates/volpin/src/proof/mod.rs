//! Depth-bounded proof search in a cut-free, single-succedent intuitionistic
//! sequent calculus (G3ip-style: weakening and contraction are absorbed into
//! the rules, antecedents are kept as sets).
//!
//! The central resource notion is proof *depth*: the height of the proof tree,
//! with axiom leaves at depth 1.  `Prover::prove_bounded` performs exhaustive
//! backtracking search for a proof of depth at most `k`, and the consistency
//! notions (`k_consistent`, `consistency_radius`, `bi_theory_consistent`) are
//! defined in terms of that bound.  Failure is definitive relative to the
//! instantiation pool; exceeding the node budget is reported as an explicit
//! [`ResourceLimit`] error, never as "no proof".

mod classical;
mod search;

pub use search::{Prover, ResourceLimit};

use crate::syntax::{Formula, Term, Theory};
use itertools::Itertools;
use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;
use thiserror::Error;

/// A single-succedent sequent `Γ ⊢ δ`.
///
/// The antecedent is normalized to a sorted, duplicate-free list, so two
/// sequents are equal exactly when they have the same antecedent *set* and
/// succedent.  Formulas are held behind `Rc` because the search engine copies
/// sequents at every node; equality, ordering, and hashing all go through to
/// the formulas themselves.  All formulas in a sequent are required to be
/// closed by the operations that build them; the prover and checker both rely
/// on this.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    antecedent: Vec<Rc<Formula>>,
    succedent: Rc<Formula>,
}

impl Sequent {
    /// Builds a sequent, sorting and deduplicating the antecedent.
    pub fn new(antecedent: impl IntoIterator<Item = Formula>, succedent: Formula) -> Sequent {
        let mut ante: Vec<Rc<Formula>> = antecedent.into_iter().map(Rc::new).collect();
        ante.sort();
        ante.dedup();
        Sequent {
            antecedent: ante,
            succedent: Rc::new(succedent),
        }
    }

    pub fn antecedent(&self) -> impl ExactSizeIterator<Item = &Formula> {
        self.antecedent.iter().map(|f| f.as_ref())
    }

    pub fn succedent(&self) -> &Formula {
        &self.succedent
    }

    /// True if `f` occurs in the antecedent.
    pub fn assumes(&self, f: &Formula) -> bool {
        self.antecedent
            .binary_search_by(|g| g.as_ref().cmp(f))
            .is_ok()
    }

    /// Copy of this sequent with `f` added to the antecedent.
    pub(crate) fn insert(&self, f: Formula) -> Sequent {
        let mut ante = self.antecedent.clone();
        if let Err(pos) = ante.binary_search_by(|g| g.as_ref().cmp(&f)) {
            ante.insert(pos, Rc::new(f));
        }
        Sequent {
            antecedent: ante,
            succedent: Rc::clone(&self.succedent),
        }
    }

    /// Copy of this sequent with `f` removed from the antecedent.
    pub(crate) fn remove(&self, f: &Formula) -> Sequent {
        let mut ante = self.antecedent.clone();
        if let Ok(pos) = ante.binary_search_by(|g| g.as_ref().cmp(f)) {
            ante.remove(pos);
        }
        Sequent {
            antecedent: ante,
            succedent: Rc::clone(&self.succedent),
        }
    }

    /// Copy of this sequent with the succedent replaced.
    pub(crate) fn with_succedent(&self, succedent: Formula) -> Sequent {
        Sequent {
            antecedent: self.antecedent.clone(),
            succedent: Rc::new(succedent),
        }
    }

    /// All closed terms occurring (as subterms) anywhere in the sequent.
    pub fn closed_terms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for f in self.antecedent().chain(std::iter::once(self.succedent())) {
            out.extend(f.closed_subterms());
        }
        out
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.antecedent.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        if !self.antecedent.is_empty() {
            write!(f, " ")?;
        }
        write!(f, "|- {}", self.succedent)
    }
}

/// The rules of the calculus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleName {
    Axiom,
    LFalsum,
    LAnd,
    RAnd,
    LOr,
    ROr1,
    ROr2,
    LImplies,
    RImplies,
    LForall,
    RForall,
    LExists,
    RExists,
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RuleName::Axiom => "axiom",
            RuleName::LFalsum => "L-false",
            RuleName::LAnd => "L-and",
            RuleName::RAnd => "R-and",
            RuleName::LOr => "L-or",
            RuleName::ROr1 => "R-or-1",
            RuleName::ROr2 => "R-or-2",
            RuleName::LImplies => "L-imp",
            RuleName::RImplies => "R-imp",
            RuleName::LForall => "L-forall",
            RuleName::RForall => "R-forall",
            RuleName::LExists => "L-exists",
            RuleName::RExists => "R-exists",
        };
        f.write_str(name)
    }
}

/// A proof tree.  `depth` is the height of the tree; leaves (axiom, L-false)
/// have depth 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree {
    pub rule: RuleName,
    pub conclusion: Sequent,
    pub premises: Vec<ProofTree>,
    /// The formula the rule acts on (antecedent member for left rules,
    /// succedent for right rules); `None` for nothing-specific leaves.
    pub principal: Option<Formula>,
    /// Instantiating term for L-forall / R-exists; eigenvariable constant for
    /// R-forall / L-exists.
    pub instantiation: Option<Term>,
}

impl ProofTree {
    pub fn depth(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(ProofTree::depth)
            .max()
            .unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(ProofTree::node_count).sum::<usize>()
    }

    fn fmt_rec(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        write!(f, "{:indent$}{}", "", self.rule, indent = indent)?;
        if let Some(p) = &self.principal {
            write!(f, " on {p}")?;
        }
        if let Some(t) = &self.instantiation {
            write!(f, " with {t}")?;
        }
        writeln!(f, ": {}", self.conclusion)?;
        for premise in &self.premises {
            premise.fmt_rec(f, indent + 2)?;
        }
        Ok(())
    }
}

impl fmt::Display for ProofTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_rec(f, 0)
    }
}

/// A proof tree failed independent validation.
#[derive(Debug, Error)]
#[error("invalid {rule} inference at `{conclusion}`: {reason}")]
pub struct ProofCheckError {
    pub rule: RuleName,
    pub conclusion: String,
    pub reason: String,
}

fn check_err(node: &ProofTree, reason: impl Into<String>) -> ProofCheckError {
    ProofCheckError {
        rule: node.rule,
        conclusion: node.conclusion.to_string(),
        reason: reason.into(),
    }
}

/// Validates a proof tree rule by rule, independently of the search engine.
///
/// Every node is checked against the shape its rule demands: the principal
/// formula must occur where the rule expects it, the premises must be exactly
/// the sequents the rule produces (as normalized sets), instantiating terms
/// must be closed, and eigenvariables must be fresh for the conclusion.
pub fn check_proof(tree: &ProofTree) -> Result<(), ProofCheckError> {
    for f in tree
        .conclusion
        .antecedent()
        .chain(std::iter::once(tree.conclusion.succedent()))
    {
        if !f.is_closed() {
            return Err(check_err(tree, format!("open formula `{f}` in sequent")));
        }
    }
    let concl = &tree.conclusion;
    let expect_premises = |want: Vec<Sequent>| -> Result<(), ProofCheckError> {
        let got: Vec<&Sequent> = tree.premises.iter().map(|p| &p.conclusion).collect();
        if got.len() != want.len() || !got.iter().zip(&want).all(|(g, w)| **g == *w) {
            return Err(check_err(tree, "premises do not match the rule"));
        }
        Ok(())
    };
    let principal = || -> Result<&Formula, ProofCheckError> {
        tree.principal
            .as_ref()
            .ok_or_else(|| check_err(tree, "missing principal formula"))
    };
    match tree.rule {
        RuleName::Axiom => {
            if !matches!(concl.succedent(), Formula::Atom(..)) {
                return Err(check_err(tree, "axiom succedent must be atomic"));
            }
            if !concl.assumes(concl.succedent()) {
                return Err(check_err(tree, "axiom succedent not in antecedent"));
            }
            expect_premises(vec![])?;
        }
        RuleName::LFalsum => {
            if !concl.assumes(&Formula::Falsum) {
                return Err(check_err(tree, "antecedent does not contain false"));
            }
            expect_premises(vec![])?;
        }
        RuleName::LAnd => {
            let p = principal()?;
            let Formula::And(a, b) = p else {
                return Err(check_err(tree, "principal is not a conjunction"));
            };
            if !concl.assumes(p) {
                return Err(check_err(tree, "principal not in antecedent"));
            }
            expect_premises(vec![concl.remove(p).insert((**a).clone()).insert((**b).clone())])?;
        }
        RuleName::RAnd => {
            let Formula::And(a, b) = concl.succedent() else {
                return Err(check_err(tree, "succedent is not a conjunction"));
            };
            expect_premises(vec![
                concl.with_succedent((**a).clone()),
                concl.with_succedent((**b).clone()),
            ])?;
        }
        RuleName::LOr => {
            let p = principal()?;
            let Formula::Or(a, b) = p else {
                return Err(check_err(tree, "principal is not a disjunction"));
            };
            if !concl.assumes(p) {
                return Err(check_err(tree, "principal not in antecedent"));
            }
            expect_premises(vec![
                concl.remove(p).insert((**a).clone()),
                concl.remove(p).insert((**b).clone()),
            ])?;
        }
        RuleName::ROr1 | RuleName::ROr2 => {
            let Formula::Or(a, b) = concl.succedent() else {
                return Err(check_err(tree, "succedent is not a disjunction"));
            };
            let side = if tree.rule == RuleName::ROr1 { a } else { b };
            expect_premises(vec![concl.with_succedent((**side).clone())])?;
        }
        RuleName::LImplies => {
            let p = principal()?;
            let Formula::Implies(a, b) = p else {
                return Err(check_err(tree, "principal is not an implication"));
            };
            if !concl.assumes(p) {
                return Err(check_err(tree, "principal not in antecedent"));
            }
            expect_premises(vec![
                concl.with_succedent((**a).clone()),
                concl.remove(p).insert((**b).clone()),
            ])?;
        }
        RuleName::RImplies => {
            let Formula::Implies(a, b) = concl.succedent() else {
                return Err(check_err(tree, "succedent is not an implication"));
            };
            expect_premises(vec![concl
                .insert((**a).clone())
                .with_succedent((**b).clone())])?;
        }
        RuleName::LForall => {
            let p = principal()?;
            let Formula::Forall(x, body) = p else {
                return Err(check_err(tree, "principal is not universal"));
            };
            if !concl.assumes(p) {
                return Err(check_err(tree, "principal not in antecedent"));
            }
            let t = tree
                .instantiation
                .as_ref()
                .ok_or_else(|| check_err(tree, "missing instantiating term"))?;
            if !t.is_closed() {
                return Err(check_err(tree, "instantiating term is open"));
            }
            expect_premises(vec![concl.insert(body.substitute(x, t))])?;
        }
        RuleName::RForall => {
            let Formula::Forall(x, body) = concl.succedent() else {
                return Err(check_err(tree, "succedent is not universal"));
            };
            let e = eigen_constant(tree)?;
            check_fresh(tree, &e)?;
            expect_premises(vec![
                concl.with_succedent(body.substitute(x, &Term::Const(e)))
            ])?;
        }
        RuleName::LExists => {
            let p = principal()?;
            let Formula::Exists(x, body) = p else {
                return Err(check_err(tree, "principal is not existential"));
            };
            if !concl.assumes(p) {
                return Err(check_err(tree, "principal not in antecedent"));
            }
            let e = eigen_constant(tree)?;
            check_fresh(tree, &e)?;
            expect_premises(vec![concl
                .remove(p)
                .insert(body.substitute(x, &Term::Const(e.clone())))])?;
        }
        RuleName::RExists => {
            let Formula::Exists(x, body) = concl.succedent() else {
                return Err(check_err(tree, "succedent is not existential"));
            };
            let t = tree
                .instantiation
                .as_ref()
                .ok_or_else(|| check_err(tree, "missing instantiating term"))?;
            if !t.is_closed() {
                return Err(check_err(tree, "instantiating term is open"));
            }
            expect_premises(vec![concl.with_succedent(body.substitute(x, t))])?;
        }
    }
    for premise in &tree.premises {
        check_proof(premise)?;
    }
    Ok(())
}

fn eigen_constant(node: &ProofTree) -> Result<String, ProofCheckError> {
    match &node.instantiation {
        Some(Term::Const(name)) => Ok(name.clone()),
        _ => Err(check_err(node, "missing eigenvariable constant")),
    }
}

/// An eigenvariable must not occur in the conclusion it is introduced over.
fn check_fresh(node: &ProofTree, eigen: &str) -> Result<(), ProofCheckError> {
    let concl = &node.conclusion;
    for f in concl
        .antecedent()
        .chain(std::iter::once(concl.succedent()))
    {
        if f.constants().contains(eigen) {
            return Err(check_err(
                node,
                format!("eigenvariable `{eigen}` occurs in the conclusion"),
            ));
        }
    }
    Ok(())
}

/// How far a theory stays consistent under depth-bounded refutation search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConsistencyRadius {
    /// `k` is the largest depth bound at which no refutation exists; a
    /// refutation of depth `k + 1` was found.
    Exactly(usize),
    /// No refutation up to the search ceiling.
    AtLeast(usize),
}

impl fmt::Display for ConsistencyRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConsistencyRadius::Exactly(k) => write!(f, "{k}"),
            ConsistencyRadius::AtLeast(k) => write!(f, "at least {k}"),
        }
    }
}

/// True if the axioms of `theory` admit no refutation (`axioms ⊢ false`) of
/// depth at most `k`.
pub fn k_consistent(theory: &Theory, k: usize, budget: u64) -> Result<bool, ResourceLimit> {
    let mut prover = Prover::for_theory(theory);
    prover.set_budget(budget);
    k_consistent_with(&mut prover, theory, k)
}

/// As [`k_consistent`], reusing a caller-provided prover (and its caches).
pub fn k_consistent_with(
    prover: &mut Prover,
    theory: &Theory,
    k: usize,
) -> Result<bool, ResourceLimit> {
    let goal = Sequent::new(theory.axioms.iter().cloned(), Formula::Falsum);
    Ok(prover.prove_bounded(&goal, k)?.is_none())
}

/// The largest `k <= k_max` such that `theory` is `k`-consistent.
///
/// Since deeper search can only find more proofs, `k`-consistency is antitone
/// in `k`; the radius is one less than the depth of the shallowest refutation,
/// or `AtLeast(k_max)` when no refutation exists up to the ceiling.
pub fn consistency_radius(
    theory: &Theory,
    k_max: usize,
    budget: u64,
) -> Result<ConsistencyRadius, ResourceLimit> {
    let mut prover = Prover::for_theory(theory);
    prover.set_budget(budget);
    consistency_radius_with(&mut prover, theory, k_max)
}

/// As [`consistency_radius`], reusing a caller-provided prover so that the
/// node budget and the pool height cap can be tuned for heavy theories.
pub fn consistency_radius_with(
    prover: &mut Prover,
    theory: &Theory,
    k_max: usize,
) -> Result<ConsistencyRadius, ResourceLimit> {
    let goal = Sequent::new(theory.axioms.iter().cloned(), Formula::Falsum);
    for k in 1..=k_max {
        if prover.prove_bounded(&goal, k)?.is_some() {
            return Ok(ConsistencyRadius::Exactly(k - 1));
        }
    }
    Ok(ConsistencyRadius::AtLeast(k_max))
}

/// How many members of the refutation side are worth combining at depth `m`.
///
/// A proof that actually uses `n` distinct disjuncts of a right-nested
/// disjunction needs `2n - 1` levels just for the selection chains and the
/// branch points between them, so at depth `m` at most `⌊(m+1)/2⌋` disjuncts
/// can matter.  The cap below is at least that for every `m`, so restricting
/// candidate subsets to this size loses no refutations.
pub fn disjunct_cap(m: usize) -> usize {
    match m {
        0..=2 => 1,
        3 | 4 => 2,
        _ => m - 2,
    }
}

/// Right-nested disjunction of `formulas` (already sorted); empty folds to
/// `false`, so the empty candidate subset asks for a plain refutation.
pub fn fold_or(formulas: &[Formula]) -> Formula {
    match formulas.split_last() {
        None => Formula::Falsum,
        Some((last, rest)) => rest
            .iter()
            .rev()
            .fold(last.clone(), |acc, f| Formula::or(f.clone(), acc)),
    }
}

/// True if the pair `(gamma, delta)` is consistent at depth `m`: no candidate
/// subset `Δ0 ⊆ delta` of size at most [`disjunct_cap`]`(m)` (including the
/// empty subset, read as `false`) admits a proof of `gamma ⊢ ∨Δ0` of depth at
/// most `m`.
///
/// Because weakening is depth-preservingly admissible in this calculus, a
/// proof from any finite subset of `gamma` yields one from all of `gamma` at
/// the same depth, so only the full antecedent needs to be searched.
pub fn bi_theory_consistent(
    prover: &mut Prover,
    gamma: &BTreeSet<Formula>,
    delta: &BTreeSet<Formula>,
    m: usize,
) -> Result<bool, ResourceLimit> {
    if m == 0 {
        return Ok(true);
    }
    let gamma: Vec<Formula> = gamma.iter().cloned().collect();
    let base = Sequent::new(gamma, Formula::Falsum);
    if prover.prove_bounded(&base, m)?.is_some() {
        return Ok(false);
    }
    let delta: Vec<Formula> = delta.iter().cloned().collect();
    let cap = disjunct_cap(m).min(delta.len());
    for size in 1..=cap {
        for combo in delta.iter().combinations(size) {
            let picked: Vec<Formula> = combo.into_iter().cloned().collect();
            let goal = base.with_succedent(fold_or(&picked));
            if prover.prove_bounded(&goal, m)?.is_some() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_theory, Signature};

    fn sig_pqc() -> Signature {
        Signature::build(&[("P", 1), ("Q", 1)], &[], &["c"]).unwrap()
    }

    fn fml(sig: &Signature, text: &str) -> Formula {
        parse_formula(text, sig).unwrap()
    }

    fn prover(sig: &Signature) -> Prover {
        let mut p = Prover::new(sig.clone());
        p.set_budget(1_000_000);
        p
    }

    #[test]
    fn axiom_proof_has_depth_one() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let seq = Sequent::new([fml(&sig, "P(c)")], fml(&sig, "P(c)"));
        let tree = pr.prove_bounded(&seq, 1).unwrap().expect("axiom");
        assert_eq!(tree.rule, RuleName::Axiom);
        assert_eq!(tree.depth(), 1);
        check_proof(&tree).unwrap();
    }

    #[test]
    fn falsum_left_closes_any_succedent() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let seq = Sequent::new([fml(&sig, "false"), fml(&sig, "Q(c)")], fml(&sig, "P(c)"));
        let tree = pr.prove_bounded(&seq, 1).unwrap().expect("L-false");
        assert_eq!(tree.rule, RuleName::LFalsum);
        assert_eq!(tree.depth(), 1);
        check_proof(&tree).unwrap();
    }

    #[test]
    fn identity_implication_needs_depth_two() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let goal = Sequent::new([], fml(&sig, "P(c) -> P(c)"));
        assert!(pr.prove_bounded(&goal, 1).unwrap().is_none());
        let tree = pr.prove_bounded(&goal, 2).unwrap().expect("R-imp proof");
        assert_eq!(tree.depth(), 2);
        assert_eq!(tree.rule, RuleName::RImplies);
        check_proof(&tree).unwrap();
    }

    #[test]
    fn weakening_constant_found_at_depth_three() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let goal = Sequent::new([], fml(&sig, "P(c) -> (Q(c) -> P(c))"));
        assert!(pr.prove_bounded(&goal, 2).unwrap().is_none());
        let tree = pr.prove_bounded(&goal, 3).unwrap().expect("proof");
        assert_eq!(tree.depth(), 3);
        check_proof(&tree).unwrap();
    }

    #[test]
    fn conjunction_projection_at_depth_two() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let seq = Sequent::new([fml(&sig, "P(c) & Q(c)")], fml(&sig, "P(c)"));
        assert!(pr.prove_bounded(&seq, 1).unwrap().is_none());
        let tree = pr.prove_bounded(&seq, 2).unwrap().expect("proof");
        assert_eq!(tree.depth(), 2);
        assert_eq!(tree.rule, RuleName::LAnd);
        check_proof(&tree).unwrap();
    }

    #[test]
    fn excluded_middle_is_not_provable() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let goal = Sequent::new([], fml(&sig, "P(c) | ~P(c)"));
        for k in 1..=6 {
            assert!(
                pr.prove_bounded(&goal, k).unwrap().is_none(),
                "no proof at depth {k}"
            );
        }
    }

    #[test]
    fn double_negation_introduction_is_provable() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let goal = Sequent::new([], fml(&sig, "P(c) -> ~~P(c)"));
        let tree = pr.prove_bounded(&goal, 4).unwrap().expect("proof");
        check_proof(&tree).unwrap();
        assert_eq!(tree.depth(), 4);
    }

    #[test]
    fn quantifier_shift_needs_the_pool() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        // forall x P(x) |- P(c): L-forall with c from the pool, then axiom.
        let seq = Sequent::new([fml(&sig, "forall x. P(x)")], fml(&sig, "P(c)"));
        let tree = pr.prove_bounded(&seq, 2).unwrap().expect("proof");
        assert_eq!(tree.rule, RuleName::LForall);
        assert_eq!(tree.instantiation, Some(Term::Const("c".into())));
        check_proof(&tree).unwrap();
    }

    #[test]
    fn universal_succedent_uses_a_fresh_eigenvariable() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let seq = Sequent::new(
            [fml(&sig, "forall x. P(x)")],
            fml(&sig, "forall x. P(x) | Q(x)"),
        );
        let tree = pr.prove_bounded(&seq, 4).unwrap().expect("proof");
        assert_eq!(tree.rule, RuleName::RForall);
        let Some(Term::Const(e)) = &tree.instantiation else {
            panic!("eigenvariable expected");
        };
        assert!(e.starts_with('@'));
        check_proof(&tree).unwrap();
    }

    #[test]
    fn existential_witness_comes_from_the_pool() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let seq = Sequent::new([fml(&sig, "P(c)")], fml(&sig, "exists x. P(x)"));
        let tree = pr.prove_bounded(&seq, 2).unwrap().expect("proof");
        assert_eq!(tree.rule, RuleName::RExists);
        assert_eq!(tree.instantiation, Some(Term::Const("c".into())));
        check_proof(&tree).unwrap();
    }

    #[test]
    fn empty_pool_blocks_existential_goals() {
        let sig = Signature::build(&[("P", 1)], &[], &[]).unwrap();
        let mut pr = prover(&sig);
        let goal = Sequent::new([], parse_formula("exists x. P(x) -> P(x)", &sig).unwrap());
        // No closed terms exist, so there is nothing to witness with.
        assert!(pr.prove_bounded(&goal, 5).unwrap().is_none());
    }

    #[test]
    fn double_negated_excluded_middle_needs_depth_seven() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let goal = Sequent::new([], fml(&sig, "~~(P(c) | ~P(c))"));
        assert!(pr.prove_bounded(&goal, 6).unwrap().is_none());
        let tree = pr.prove_bounded(&goal, 7).unwrap().expect("proof");
        assert_eq!(tree.depth(), 7);
        check_proof(&tree).unwrap();
    }

    #[test]
    fn search_is_monotone_in_depth() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let goals = [
            Sequent::new([], fml(&sig, "P(c) -> P(c)")),
            Sequent::new([fml(&sig, "P(c) & Q(c)")], fml(&sig, "Q(c)")),
            Sequent::new([], fml(&sig, "(P(c) & Q(c)) -> (Q(c) & P(c))")),
        ];
        for goal in &goals {
            let mut seen = false;
            for k in 1..=6 {
                let found = pr.prove_bounded(goal, k).unwrap().is_some();
                assert!(!seen || found, "proof lost when deepening to {k}");
                seen = found;
            }
            assert!(seen);
        }
    }

    #[test]
    fn search_is_deterministic() {
        let sig = sig_pqc();
        let goal = Sequent::new(
            [fml(&sig, "P(c) | Q(c)"), fml(&sig, "P(c) -> Q(c)")],
            fml(&sig, "Q(c)"),
        );
        let mut first = prover(&sig);
        let mut second = prover(&sig);
        let a = first.prove_bounded(&goal, 4).unwrap().expect("proof");
        let b = second.prove_bounded(&goal, 4).unwrap().expect("proof");
        assert_eq!(a, b);
        check_proof(&a).unwrap();
    }

    #[test]
    fn node_budget_is_an_explicit_outcome() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        pr.set_budget(3);
        // Classically valid, so the countermodel filter cannot shortcut it,
        // and the bounded search has to visit more than three sequents.
        let goal = Sequent::new([], fml(&sig, "~~(P(c) | ~P(c))"));
        let err = pr.prove_bounded(&goal, 6).unwrap_err();
        assert_eq!(err.budget, 3);
    }

    #[test]
    fn checker_rejects_a_tampered_tree() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let seq = Sequent::new([fml(&sig, "P(c) & Q(c)")], fml(&sig, "P(c)"));
        let mut tree = pr.prove_bounded(&seq, 2).unwrap().unwrap();
        tree.premises[0].conclusion = Sequent::new([], fml(&sig, "Q(c)"));
        assert!(check_proof(&tree).is_err());
    }

    #[test]
    fn checker_rejects_a_captured_eigenvariable() {
        let sig = sig_pqc();
        let body = fml(&sig, "P(c)");
        let concl = Sequent::new(
            [Formula::atom("P", vec![Term::Const("@0".into())])],
            Formula::forall("x", body.clone()),
        );
        let premise = ProofTree {
            rule: RuleName::Axiom,
            conclusion: concl.with_succedent(body),
            premises: vec![],
            principal: None,
            instantiation: None,
        };
        let tree = ProofTree {
            rule: RuleName::RForall,
            conclusion: concl,
            premises: vec![premise],
            principal: None,
            instantiation: Some(Term::Const("@0".into())),
        };
        let err = check_proof(&tree).unwrap_err();
        assert!(err.to_string().contains("eigenvariable"));
    }

    #[test]
    fn empty_theory_is_consistent_at_every_depth() {
        let sig = sig_pqc();
        let theory = Theory::new("empty", sig, vec![]).unwrap();
        for k in 1..=6 {
            assert!(k_consistent(&theory, k, 1_000_000).unwrap());
        }
    }

    #[test]
    fn contradictory_pair_refuted_at_depth_two() {
        let sig = sig_pqc();
        let axioms = vec![fml(&sig, "P(c)"), fml(&sig, "~P(c)")];
        let theory = Theory::new("clash", sig, axioms).unwrap();
        assert!(k_consistent(&theory, 1, 1_000_000).unwrap());
        assert!(!k_consistent(&theory, 2, 1_000_000).unwrap());
        assert!(!k_consistent(&theory, 3, 1_000_000).unwrap());
        assert_eq!(
            consistency_radius(&theory, 8, 1_000_000).unwrap(),
            ConsistencyRadius::Exactly(1)
        );
    }

    #[test]
    fn consistent_theory_reports_the_search_ceiling() {
        let text = "theory tiny\nsignature:\n  predicate P/1\n  constant c\naxioms:\n  P(c)\n";
        let theory = parse_theory(text).unwrap();
        assert_eq!(
            consistency_radius(&theory, 5, 1_000_000).unwrap(),
            ConsistencyRadius::AtLeast(5)
        );
    }

    #[test]
    fn disjunct_cap_table() {
        assert_eq!(disjunct_cap(0), 1);
        assert_eq!(disjunct_cap(1), 1);
        assert_eq!(disjunct_cap(2), 1);
        assert_eq!(disjunct_cap(3), 2);
        assert_eq!(disjunct_cap(4), 2);
        assert_eq!(disjunct_cap(5), 3);
        assert_eq!(disjunct_cap(9), 7);
    }

    #[test]
    fn fold_or_shapes() {
        let sig = sig_pqc();
        assert_eq!(fold_or(&[]), Formula::Falsum);
        let a = fml(&sig, "P(c)");
        let b = fml(&sig, "Q(c)");
        assert_eq!(fold_or(std::slice::from_ref(&a)), a);
        assert_eq!(fold_or(&[a.clone(), b.clone()]), Formula::or(a, b));
    }

    #[test]
    fn bi_theory_membership_overlap_is_inconsistent() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let gamma: BTreeSet<Formula> = [fml(&sig, "P(c)")].into();
        let delta: BTreeSet<Formula> = [fml(&sig, "P(c)")].into();
        assert!(!bi_theory_consistent(&mut pr, &gamma, &delta, 2).unwrap());
    }

    #[test]
    fn bi_theory_disjoint_atoms_are_consistent() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let gamma: BTreeSet<Formula> = [fml(&sig, "P(c)")].into();
        let delta: BTreeSet<Formula> = [fml(&sig, "Q(c)")].into();
        assert!(bi_theory_consistent(&mut pr, &gamma, &delta, 5).unwrap());
    }

    #[test]
    fn bi_theory_empty_pair_is_consistent() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let empty = BTreeSet::new();
        for m in 0..=6 {
            assert!(bi_theory_consistent(&mut pr, &empty, &empty, m).unwrap());
        }
    }

    #[test]
    fn bi_theory_catches_split_disjunction() {
        // gamma proves P(c) | Q(c); delta = {P(c), Q(c)} is jointly excluded
        // only when two disjuncts combine, which the cap admits from m = 3.
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let gamma: BTreeSet<Formula> = [fml(&sig, "P(c) | Q(c)")].into();
        let delta: BTreeSet<Formula> = [fml(&sig, "P(c)"), fml(&sig, "Q(c)")].into();
        assert!(bi_theory_consistent(&mut pr, &gamma, &delta, 2).unwrap());
        assert!(!bi_theory_consistent(&mut pr, &gamma, &delta, 3).unwrap());
    }

    #[test]
    fn falsum_axiom_gives_radius_zero() {
        let sig = sig_pqc();
        let theory = Theory::new("absurd", sig, vec![Formula::Falsum]).unwrap();
        assert_eq!(
            consistency_radius(&theory, 4, 1_000_000).unwrap(),
            ConsistencyRadius::Exactly(0)
        );
    }

    #[test]
    fn proof_rendering_is_indented_rule_per_line() {
        let sig = sig_pqc();
        let mut pr = prover(&sig);
        let seq = Sequent::new([fml(&sig, "P(c) & Q(c)")], fml(&sig, "P(c)"));
        let tree = pr.prove_bounded(&seq, 2).unwrap().unwrap();
        let text = tree.to_string();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("L-and on"));
        assert!(lines[1].starts_with("  axiom"));
    }
}
