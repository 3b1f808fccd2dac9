//! Esenin-Volpin forcing over Volpin frames, depth-graded validity, the
//! monotonicity harness, and fuzzy-value extraction from forcing depths.
//!
//! The forcing clauses look strictly *down* the tree for established facts
//! (∧, ∨, ∃ need proper ancestors) and *up* for commitments (→, ∀ range over
//! all extensions). Consequently the root never forces a conjunction,
//! disjunction, or existential. Quantifiers are instantiated by substituting
//! domain elements as element-constants (`#n`), keeping every evaluated
//! formula closed and the memo key purely syntactic.

use crate::frame::{BranchTooShort, VolpinFrame, WorldId};
use crate::syntax::{Formula, Term};
use std::collections::{BTreeMap, HashMap};

/// Errors from the forcing operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForcingError {
    #[error("unknown world id {0}")]
    UnknownWorld(WorldId),
    #[error("formula `{0}` has free variables")]
    OpenFormula(Formula),
    #[error("world {0} is not a leaf")]
    NotALeaf(WorldId),
    #[error("fuzzy models need a leaf of depth >= 1")]
    ZeroDepthModel,
    #[error(transparent)]
    BranchTooShort(#[from] BranchTooShort),
}

/// Forcing evaluator for one frame, with a per-world memo table.
///
/// Memoized results always agree with memo-free recomputation (the harness
/// checks this against an independent evaluator); concurrent use is handled
/// by confining a context to a thread — the frame itself is freely shared.
pub struct ForcingContext<'f> {
    pub frame: &'f VolpinFrame,
    memo: Vec<HashMap<Formula, bool>>,
}

impl<'f> ForcingContext<'f> {
    pub fn new(frame: &'f VolpinFrame) -> Self {
        ForcingContext { frame, memo: vec![HashMap::new(); frame.world_count()] }
    }

    fn check_world(&self, w: WorldId) -> Result<(), ForcingError> {
        if w < self.frame.world_count() {
            Ok(())
        } else {
            Err(ForcingError::UnknownWorld(w))
        }
    }

    fn check_closed(&self, phi: &Formula) -> Result<(), ForcingError> {
        if phi.is_closed() {
            Ok(())
        } else {
            Err(ForcingError::OpenFormula(phi.clone()))
        }
    }

    /// Does world `w` force `phi`?
    pub fn forces(&mut self, w: WorldId, phi: &Formula) -> Result<bool, ForcingError> {
        self.check_world(w)?;
        self.check_closed(phi)?;
        Ok(self.eval(w, phi))
    }

    /// Is `phi` forced by every world at depth exactly `k`?
    pub fn k_forces(&mut self, k: usize, phi: &Formula) -> Result<bool, ForcingError> {
        self.check_closed(phi)?;
        let worlds = self.frame.slice(k)?;
        Ok(worlds.into_iter().all(|w| self.eval(w, phi)))
    }

    fn eval(&mut self, w: WorldId, phi: &Formula) -> bool {
        debug_assert!(phi.is_closed());
        if let Some(&cached) = self.memo[w].get(phi) {
            return cached;
        }
        let frame = self.frame;
        let result = match phi {
            Formula::Atom(p, args) => {
                let env = BTreeMap::new();
                let mut vals = Vec::with_capacity(args.len());
                let mut denotes = true;
                for t in args {
                    match frame.eval_term(w, t, &env) {
                        Some(v) => vals.push(v),
                        None => {
                            denotes = false;
                            break;
                        }
                    }
                }
                denotes && frame.atom_holds(w, p, &vals)
            }
            Formula::Falsum => false,
            Formula::And(a, b) => {
                let anc = frame.ancestors(w);
                anc.iter().any(|&w1| self.eval(w1, a)) && anc.iter().any(|&w2| self.eval(w2, b))
            }
            Formula::Or(a, b) => frame
                .ancestors(w)
                .iter()
                .any(|&w1| self.eval(w1, a) || self.eval(w1, b)),
            Formula::Implies(a, b) => {
                let cone = frame.extensions(w).expect("world was validated");
                cone.into_iter().all(|w1| !self.established_below(w1, a) || self.eval(w1, b))
            }
            Formula::Exists(x, body) => frame.ancestors(w).iter().any(|&w1| {
                let dom: Vec<_> = frame.world(w1).domain.iter().copied().collect();
                dom.into_iter()
                    .any(|el| self.eval(w1, &body.substitute(x, &Term::Elem(el))))
            }),
            Formula::Forall(x, body) => {
                let cone = frame.extensions(w).expect("world was validated");
                cone.into_iter().all(|w1| {
                    let dom: Vec<_> = frame.world(w1).domain.iter().copied().collect();
                    dom.into_iter()
                        .all(|el| self.eval(w1, &body.substitute(x, &Term::Elem(el))))
                })
            }
        };
        self.memo[w].insert(phi.clone(), result);
        result
    }

    /// "∃ w₂ ≺ w₁ forcing φ" — the antecedent trigger of the → clause.
    fn established_below(&mut self, w1: WorldId, a: &Formula) -> bool {
        self.frame.ancestors(w1).iter().any(|&w2| self.eval(w2, a))
    }

    /// Scans every pair w ≤ w′; returns the first (w, w′) with
    /// forces(w) but not forces(w′), which for a valid frame never exists.
    pub fn check_monotonicity(
        &mut self,
        phi: &Formula,
    ) -> Result<Option<(WorldId, WorldId)>, ForcingError> {
        self.check_closed(phi)?;
        for w in 0..self.frame.world_count() {
            if !self.eval(w, phi) {
                continue;
            }
            for v in self.frame.extensions(w).expect("world exists") {
                if v != w && !self.eval(v, phi) {
                    return Ok(Some((w, v)));
                }
            }
        }
        Ok(None)
    }

    /// Minimum depth along the root-to-`leaf` path at which `phi` is forced.
    pub fn min_forcing_depth(
        &mut self,
        leaf: WorldId,
        phi: &Formula,
    ) -> Result<Option<usize>, ForcingError> {
        self.check_world(leaf)?;
        self.check_closed(phi)?;
        if !self.frame.children(leaf).is_empty() {
            return Err(ForcingError::NotALeaf(leaf));
        }
        let mut path = self.frame.ancestors(leaf);
        path.push(leaf);
        for w in path {
            if self.eval(w, phi) {
                return Ok(Some(self.frame.world(w).depth));
            }
        }
        Ok(None)
    }

    /// Builds the fuzzy model for a leaf path: value(φ) = (d − d_φ)/d.
    /// Composite-formula recurrences are reported as diagnostics only; the
    /// implication rule is applied exactly as stated (it returns the
    /// antecedent depth without the +1 of the other rules, so disagreement
    /// with the primary values is expected and flagged, not repaired).
    pub fn fuzzify(
        &mut self,
        leaf: WorldId,
        formulas: &[Formula],
    ) -> Result<FuzzyModel, ForcingError> {
        self.check_world(leaf)?;
        if !self.frame.children(leaf).is_empty() {
            return Err(ForcingError::NotALeaf(leaf));
        }
        let d = self.frame.world(leaf).depth;
        if d == 0 {
            return Err(ForcingError::ZeroDepthModel);
        }
        let mut depths = BTreeMap::new();
        let mut entries = BTreeMap::new();
        for phi in formulas {
            self.check_closed(phi)?;
            let d_phi = self.min_forcing_depth(leaf, phi)?;
            if let Some(dp) = d_phi {
                entries.insert(phi.clone(), (d - dp) as f64 / d as f64);
            }
            depths.insert(phi.clone(), d_phi);
        }
        let mut cross_checks = Vec::new();
        for phi in formulas {
            if let Some(check) = self.cross_check(leaf, phi)? {
                cross_checks.push(check);
            }
        }
        Ok(FuzzyModel { leaf, d, entries, depths, cross_checks })
    }

    /// Evaluates the composite-value recurrence for `phi` if one applies and
    /// all required sub-depths exist.
    fn cross_check(
        &mut self,
        leaf: WorldId,
        phi: &Formula,
    ) -> Result<Option<CrossCheck>, ForcingError> {
        let observed = self.min_forcing_depth(leaf, phi)?;
        let computed: Option<(&'static str, usize)> = match phi {
            Formula::And(a, b) => {
                match (self.min_forcing_depth(leaf, a)?, self.min_forcing_depth(leaf, b)?) {
                    (Some(da), Some(db)) => Some(("and", da.max(db) + 1)),
                    _ => None,
                }
            }
            Formula::Or(a, b) => {
                match (self.min_forcing_depth(leaf, a)?, self.min_forcing_depth(leaf, b)?) {
                    (Some(da), Some(db)) => Some(("or", da.min(db) + 1)),
                    _ => None,
                }
            }
            Formula::Forall(x, body) => {
                let dom: Vec<_> = self.frame.world(leaf).domain.iter().copied().collect();
                let mut worst = None;
                let mut all_defined = !dom.is_empty();
                for el in dom {
                    let inst = body.substitute(x, &Term::Elem(el));
                    match self.min_forcing_depth(leaf, &inst)? {
                        Some(d) => worst = Some(worst.map_or(d, |w: usize| w.max(d))),
                        None => {
                            all_defined = false;
                            break;
                        }
                    }
                }
                if all_defined {
                    worst.map(|w| ("forall", 1 + w))
                } else {
                    None
                }
            }
            // stated only for d_φ > d_ψ, and yields the depth itself
            Formula::Implies(a, b) => {
                match (self.min_forcing_depth(leaf, a)?, self.min_forcing_depth(leaf, b)?) {
                    (Some(da), Some(db)) if da > db => Some(("implies", da)),
                    _ => None,
                }
            }
            _ => None,
        };
        Ok(computed.map(|(rule, depth)| CrossCheck {
            formula: phi.clone(),
            rule,
            recurrence_depth: depth,
            observed_depth: observed,
            agrees: observed == Some(depth),
        }))
    }
}

/// Fuzzy truth values for a leaf path: d is the leaf depth, d_φ the minimal
/// forcing depth on the path, value(φ) = (d − d_φ)/d ∈ [0,1].
#[derive(Debug, Clone)]
pub struct FuzzyModel {
    pub leaf: WorldId,
    pub d: usize,
    /// φ → value, for the φ whose d_φ exists.
    pub entries: BTreeMap<Formula, f64>,
    /// φ → d_φ (None when no world on the path forces φ).
    pub depths: BTreeMap<Formula, Option<usize>>,
    /// Composite-recurrence diagnostics (not part of the primary values).
    pub cross_checks: Vec<CrossCheck>,
}

/// One recurrence comparison: the depth the composite rule predicts vs. the
/// observed minimal forcing depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossCheck {
    pub formula: Formula,
    pub rule: &'static str,
    pub recurrence_depth: usize,
    pub observed_depth: Option<usize>,
    pub agrees: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{frame_from_parent_vector, naive_forces, parent_vectors, random_formula};
    use crate::syntax::{parse_formula, Signature};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sig() -> Signature {
        Signature::build(&[("P", 1)], &[], &["c"]).unwrap()
    }

    fn chain(len: usize, p_from: &[usize]) -> VolpinFrame {
        let parents: Vec<usize> = (0..len).collect();
        frame_from_parent_vector(&parents, p_from).unwrap()
    }

    #[test]
    fn root_never_forces_conjunction() {
        let f = chain(2, &[0]);
        let mut ctx = ForcingContext::new(&f);
        let phi = parse_formula("P(c) & P(c)", &sig()).unwrap();
        assert!(!ctx.forces(0, &phi).unwrap());
    }

    #[test]
    fn disjunction_forced_once_an_ancestor_forces_a_disjunct() {
        let f = chain(2, &[0]); // root - w1 - w2, P(c) from the root down
        let mut ctx = ForcingContext::new(&f);
        let phi = parse_formula("P(c) | P(c)", &sig()).unwrap();
        assert!(ctx.forces(2, &phi).unwrap());
        assert!(ctx.forces(1, &phi).unwrap());
        assert!(!ctx.forces(0, &phi).unwrap());
    }

    #[test]
    fn falsum_never_forced() {
        let f = chain(3, &[0]);
        let mut ctx = ForcingContext::new(&f);
        for w in 0..f.world_count() {
            assert!(!ctx.forces(w, &Formula::Falsum).unwrap());
        }
    }

    #[test]
    fn k_forces_examples() {
        let f = chain(2, &[0]);
        let mut ctx = ForcingContext::new(&f);
        let atom = parse_formula("P(c)", &sig()).unwrap();
        assert!(ctx.k_forces(0, &atom).unwrap());
        let conj = parse_formula("P(c) & P(c)", &sig()).unwrap();
        assert!(ctx.k_forces(2, &conj).unwrap());
        assert!(!ctx.k_forces(0, &conj).unwrap());
        assert!(!ctx.k_forces(1, &Formula::Falsum).unwrap());
        // short branch propagates the slice error
        assert!(matches!(ctx.k_forces(3, &atom), Err(ForcingError::BranchTooShort(_))));
    }

    #[test]
    fn implication_needs_consequent_wherever_antecedent_is_established() {
        // root - w1 - w2, P(c) from w1 down. ~P(c) = P(c) -> false:
        // at w2 the antecedent is established below (w1 ⊨ P(c)), so w2 must
        // force false — it cannot; the implication fails at w2 and at any
        // world whose cone contains w2.
        let f = chain(2, &[1]);
        let mut ctx = ForcingContext::new(&f);
        let neg = parse_formula("~P(c)", &sig()).unwrap();
        assert!(!ctx.forces(0, &neg).unwrap());
        assert!(!ctx.forces(1, &neg).unwrap());
        assert!(!ctx.forces(2, &neg).unwrap());
        // with P never set, the implication is vacuous everywhere
        let g = chain(2, &[]);
        let mut gtx = ForcingContext::new(&g);
        assert!(gtx.forces(0, &neg).unwrap());
        assert!(gtx.forces(2, &neg).unwrap());
    }

    #[test]
    fn quantifier_clauses_look_the_right_way() {
        let f = chain(2, &[0]);
        let mut ctx = ForcingContext::new(&f);
        let ex = parse_formula("exists x. P(x)", &sig()).unwrap();
        assert!(!ctx.forces(0, &ex).unwrap(), "no ancestors at the root");
        assert!(ctx.forces(1, &ex).unwrap(), "root witnesses P at the only element");
        let all = parse_formula("forall x. P(x)", &sig()).unwrap();
        assert!(ctx.forces(0, &all).unwrap(), "every world, every element satisfies P");
        let g = chain(2, &[1]);
        let mut gtx = ForcingContext::new(&g);
        assert!(!gtx.forces(0, &all).unwrap(), "root itself has P false");
        assert!(gtx.forces(1, &all).unwrap());
    }

    #[test]
    fn memoized_forcing_matches_naive_oracle_on_small_suite() {
        let sig = sig();
        let mut formulas: Vec<Formula> = vec![
            "P(c)",
            "false",
            "~P(c)",
            "P(c) | ~P(c)",
            "P(c) & P(c)",
            "~~P(c)",
            "exists x. P(x)",
            "forall x. P(x)",
            "forall x. (P(x) | ~P(x))",
            "exists x. ~P(x)",
            "(P(c) -> P(c)) -> P(c)",
        ]
        .into_iter()
        .map(|s| parse_formula(s, &sig).unwrap())
        .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            formulas.push(random_formula(&sig, 4, &mut rng));
        }
        for parents in parent_vectors(4) {
            for p_from in [vec![], vec![0], vec![1], vec![2], vec![3], vec![1, 2]] {
                let p_from: Vec<usize> =
                    p_from.into_iter().filter(|&w| w <= parents.len()).collect();
                let frame = frame_from_parent_vector(&parents, &p_from).unwrap();
                let mut ctx = ForcingContext::new(&frame);
                for phi in &formulas {
                    for w in 0..frame.world_count() {
                        assert_eq!(
                            ctx.forces(w, phi).unwrap(),
                            naive_forces(&frame, w, phi),
                            "mismatch at world {w} for {phi} on parents {parents:?} p_from {p_from:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn monotonicity_holds_on_valid_frames_and_fails_on_corrupted() {
        let mut frame = frame_from_parent_vector(&[0, 1, 1], &[1]).unwrap();
        let phi = parse_formula("P(c)", &sig()).unwrap();
        {
            let mut ctx = ForcingContext::new(&frame);
            assert_eq!(ctx.check_monotonicity(&phi).unwrap(), None);
        }
        let corrupted = crate::harness::corrupt_frame(&mut frame).unwrap();
        let mut ctx = ForcingContext::new(&frame);
        let cx = ctx.check_monotonicity(&phi).unwrap();
        assert!(cx.is_some());
        assert_eq!(cx.unwrap().1, corrupted);
    }

    #[test]
    fn min_forcing_depth_examples() {
        let f = chain(3, &[0]);
        let mut ctx = ForcingContext::new(&f);
        let atom = parse_formula("P(c)", &sig()).unwrap();
        assert_eq!(ctx.min_forcing_depth(3, &atom).unwrap(), Some(0));
        let conj = parse_formula("P(c) & P(c)", &sig()).unwrap();
        assert_eq!(ctx.min_forcing_depth(3, &conj).unwrap(), Some(1));
        assert_eq!(ctx.min_forcing_depth(3, &Formula::Falsum).unwrap(), None);
        assert!(matches!(
            ctx.min_forcing_depth(0, &atom),
            Err(ForcingError::NotALeaf(0))
        ));
    }

    #[test]
    fn fuzzify_values_match_the_formula() {
        let f = chain(4, &[0]); // leaf depth 4
        let mut ctx = ForcingContext::new(&f);
        let atom = parse_formula("P(c)", &sig()).unwrap();
        let conj = parse_formula("P(c) & P(c)", &sig()).unwrap();
        let never = parse_formula("false", &sig()).unwrap();
        let model = ctx
            .fuzzify(4, &[atom.clone(), conj.clone(), never.clone()])
            .unwrap();
        assert_eq!(model.d, 4);
        assert_eq!(model.entries[&atom], 1.0); // d_φ = 0
        assert_eq!(model.entries[&conj], 0.75); // d_φ = 1
        assert_eq!(model.depths[&never], None);
        assert!(!model.entries.contains_key(&never));
        for v in model.entries.values() {
            assert!((0.0..=1.0).contains(v));
        }
        // the ∧ recurrence agrees here: max(0,0)+1 = 1 = observed
        let check = model
            .cross_checks
            .iter()
            .find(|c| c.formula == conj)
            .expect("conjunction recurrence");
        assert_eq!(check.recurrence_depth, 1);
        assert!(check.agrees);
    }

    #[test]
    fn fuzzify_rejects_non_leaves_and_zero_depth() {
        let f = chain(2, &[0]);
        let mut ctx = ForcingContext::new(&f);
        assert!(matches!(ctx.fuzzify(0, &[]), Err(ForcingError::NotALeaf(0))));
        let single = frame_from_parent_vector(&[], &[]).unwrap();
        let mut sctx = ForcingContext::new(&single);
        assert!(matches!(sctx.fuzzify(0, &[]), Err(ForcingError::ZeroDepthModel)));
    }

    #[test]
    fn value_forced_only_at_leaf_is_zero() {
        let f = chain(2, &[2]);
        let mut ctx = ForcingContext::new(&f);
        let atom = parse_formula("P(c)", &sig()).unwrap();
        let model = ctx.fuzzify(2, &[atom.clone()]).unwrap();
        assert_eq!(model.entries[&atom], 0.0);
    }
}
