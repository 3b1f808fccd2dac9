//! Bi-theory saturation and the canonical chain model.
//!
//! A bi-theory records, against a depth tag `m`, which sentences have been
//! committed as holding (Γ) and which as failing (Δ) over a finite constant
//! stock S. [`saturate`] walks the deterministic m-CF enumeration and sends
//! each undecided sentence to Γ whenever that keeps the pair m-consistent,
//! to Δ otherwise, minting fresh pool constants as witnesses for existential
//! members of Γ. [`replete_defect`] re-verifies the outcome independently of
//! the construction path.
//!
//! [`build_canonical`] turns one saturation at tag `k` into a chain frame:
//! the world at depth `m` carries the restriction of the saturated pair to
//! the m-complexity fragment, so each level decides exactly the sentences
//! whose evaluation fits inside `m` comparison steps. On that frame,
//! membership in Γ tracks the forcing relation over the enumerated scope —
//! [`semantic_lemma_check`] tests the two sides against each other pair by
//! pair.
//!
//! [`completeness_counterexample`] runs the decision pair: a bounded proof
//! search on one side and, when it fails, a Δ-seeded chain whose deepest
//! world leaves the target unforced. Targets the bare chain forces only
//! vacuously — universals over an exhausted stock, implications and
//! disjunctions whose antecedents are never established — get falsifying
//! branches grafted below the leaf; a final gate re-evaluates the target
//! semantically and reports an error rather than return a frame that does
//! not actually refute it.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::forcing::{ForcingContext, ForcingError};
use crate::frame::{FrameBuilder, FrameError, VolpinFrame, WorldId};
use crate::proof::{bi_theory_consistent, ProofTree, Prover, ResourceLimit, Sequent};
use crate::syntax::{
    canonical_binders, check_formula, enumerate_m_cf, Formula, Signature, SignatureError, Term,
    Theory,
};

/// A pair of committed sentence sets over a finite constant stock, together
/// with the depth tag its consistency claim is made at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiTheory {
    /// Constant stock S: the signature's own constants plus any minted ones.
    pub constants: BTreeSet<String>,
    /// Sentences committed as holding.
    pub gamma: BTreeSet<Formula>,
    /// Sentences committed as failing.
    pub delta: BTreeSet<Formula>,
    /// Depth tag m: consistency means no refutation of depth ≤ m.
    pub m: usize,
}

impl BiTheory {
    pub fn new(
        constants: impl IntoIterator<Item = String>,
        gamma: impl IntoIterator<Item = Formula>,
        delta: impl IntoIterator<Item = Formula>,
        m: usize,
    ) -> BiTheory {
        BiTheory {
            constants: constants.into_iter().collect(),
            gamma: gamma.into_iter().collect(),
            delta: delta.into_iter().collect(),
            m,
        }
    }

    /// The empty pair over exactly the signature's constants.
    pub fn empty(sig: &Signature, m: usize) -> BiTheory {
        BiTheory::new(sig.constants.iter().cloned(), [], [], m)
    }
}

/// Resource ceilings for saturation and model assembly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildCaps {
    /// Enumeration prefix length per saturation: completeness and the
    /// semantic-lemma scope are claimed relative to this many sentences.
    pub max_formulas: usize,
    /// Upper bound on worlds in an assembled model (chain plus grafts).
    pub max_worlds: usize,
    /// Proof-search node budget per consistency query.
    pub budget: u64,
}

impl Default for BuildCaps {
    fn default() -> Self {
        BuildCaps { max_formulas: 48, max_worlds: 32, budget: 1_000_000 }
    }
}

/// Why a bi-theory fails the independent repleteness verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RepleteDefect {
    /// Some sentence is committed on both sides.
    Overlap(Formula),
    /// An in-scope sentence is committed on neither side.
    Undecided(Formula),
    /// An existential member of Γ has no witnessing instance in Γ.
    UnwitnessedExistential(Formula),
    /// The pair admits a refutation within its depth tag.
    Inconsistent,
}

/// Errors from saturation, model assembly, and the countermodel pipeline.
#[derive(Debug, thiserror::Error)]
pub enum CanonicalError {
    #[error("the seed pair already has a refutation of depth <= {m}")]
    InconsistentSeed { m: usize },
    #[error("fresh-constant pool exhausted ({pool} names) while witnessing existentials")]
    PoolExhausted { pool: usize },
    #[error("world cap {cap} exceeded: the construction needs {needed} worlds")]
    WorldCapExceeded { cap: usize, needed: usize },
    #[error("canonical frames require a function-free signature; `{0}` is a function symbol")]
    FunctionSymbols(String),
    #[error("`{formula}` lies outside the {m}-complexity fragment decided at this world")]
    OutOfScope { formula: Formula, m: usize },
    #[error("unknown world id {0}")]
    UnknownWorld(WorldId),
    #[error("countermodel gate failed: {0}")]
    SemanticGate(String),
    #[error("malformed target: {0}")]
    BadTarget(String),
    #[error("malformed model document: {0}")]
    Document(String),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Forcing(#[from] ForcingError),
    #[error(transparent)]
    Resource(#[from] ResourceLimit),
}

/// Is `f` inside the m-complexity fragment (connective depth and term
/// heights both at most `m`)?
fn in_m_cf(f: &Formula, m: usize) -> bool {
    f.complexity() <= m && f.max_term_height() <= m
}

/// The signature extended with every name in `names` not already declared.
fn extend_signature(
    sig: &Signature,
    names: &BTreeSet<String>,
) -> Result<Signature, CanonicalError> {
    let mut out = sig.clone();
    for name in names {
        if !out.constants.iter().any(|c| c == name) {
            out.declare_constant(name)?;
        }
    }
    Ok(out)
}

/// Fresh constant names `d0, d1, …` that collide with nothing in the
/// signature or the seed stock, enough to grow the stock to `s0_size`.
pub fn fresh_pool(sig: &Signature, seed: &BiTheory, s0_size: usize) -> Vec<String> {
    let want = s0_size.saturating_sub(seed.constants.len());
    let taken: BTreeSet<&str> = sig
        .constants
        .iter()
        .map(String::as_str)
        .chain(sig.predicates.iter().map(|(n, _)| n.as_str()))
        .chain(sig.functions.iter().map(|(n, _)| n.as_str()))
        .chain(seed.constants.iter().map(String::as_str))
        .collect();
    (0..)
        .map(|i| format!("d{i}"))
        .filter(|n| !taken.contains(n.as_str()))
        .take(want)
        .collect()
}

/// The deterministic sentence list that saturation classifies: the m-CF
/// enumeration over the signature plus `constants`, cut at the cap.
pub fn scope_enumeration(
    sig: &Signature,
    constants: &BTreeSet<String>,
    m: usize,
    caps: &BuildCaps,
) -> Vec<Formula> {
    let extra: BTreeSet<String> = constants
        .iter()
        .filter(|c| !sig.constants.iter().any(|d| &d == c))
        .cloned()
        .collect();
    enumerate_m_cf(sig, &extra, m, caps.max_formulas).formulas
}

/// Closed terms of height < m available as existential witnesses: the
/// constant stock plus every closed subterm already mentioned in Γ.
fn witness_candidates(
    constants: &BTreeSet<String>,
    gamma: &BTreeSet<Formula>,
    m: usize,
) -> Vec<Term> {
    let mut cands: BTreeSet<Term> =
        constants.iter().map(|c| Term::Const(c.clone())).collect();
    for f in gamma {
        cands.extend(f.closed_subterms());
    }
    cands.into_iter().filter(|t| t.complexity() < m).collect()
}

/// Ensures every existential that just entered Γ has a witnessing instance
/// there, reusing an existing term when one already works and minting the
/// next pool constant otherwise. Recurses because the instance may itself
/// be existential.
fn witness_closure(
    phi: &Formula,
    m: usize,
    pool: &[String],
    minted: &mut usize,
    stock: &mut BTreeSet<String>,
    gamma: &mut BTreeSet<Formula>,
) -> Result<(), CanonicalError> {
    let Formula::Exists(x, body) = phi else { return Ok(()) };
    if m < 2 {
        // No closed term of height < m exists; repleteness checks report
        // the gap instead of minting an unusable witness.
        return Ok(());
    }
    for t in witness_candidates(stock, gamma, m) {
        if gamma.contains(&body.substitute(x, &t)) {
            return Ok(());
        }
    }
    let name = loop {
        let Some(name) = pool.get(*minted) else {
            return Err(CanonicalError::PoolExhausted { pool: pool.len() });
        };
        *minted += 1;
        if !stock.contains(name) {
            break name.clone();
        }
    };
    stock.insert(name.clone());
    let instance = body.substitute(x, &Term::Const(name));
    gamma.insert(instance.clone());
    witness_closure(&instance, m, pool, minted, stock, gamma)
}

/// Extends `seed` to a replete pair at tag `m`: every sentence in the
/// enumerated scope lands in Γ when that keeps the pair m-consistent and in
/// Δ otherwise, and every existential member of Γ gets a witness, drawn
/// from `pool` when no existing term serves. The witness closure is part of
/// the membership trial itself — a sentence whose witnesses would break
/// m-consistency goes to Δ rather than entering Γ first and minting a
/// contradiction afterwards. Seed sentences have their bound variables
/// renamed to the enumeration's spelling first, so a seed that is a mere
/// renaming of an enumerated sentence counts as already decided.
/// Deterministic: identical inputs yield identical outputs.
pub fn saturate(
    seed: &BiTheory,
    m: usize,
    pool: &[String],
    sig: &Signature,
    caps: &BuildCaps,
) -> Result<BiTheory, CanonicalError> {
    let scope = scope_enumeration(sig, &seed.constants, m, caps);
    saturate_against(seed, m, pool, sig, caps, &scope)
}

/// [`saturate`] with the enumerated scope supplied by the caller, so model
/// assembly can classify and later re-verify against the very same list.
fn saturate_against(
    seed: &BiTheory,
    m: usize,
    pool: &[String],
    sig: &Signature,
    caps: &BuildCaps,
    scope: &[Formula],
) -> Result<BiTheory, CanonicalError> {
    let mut names = seed.constants.clone();
    names.extend(pool.iter().cloned());
    let sig_ext = extend_signature(sig, &names)?;
    let mut prover = Prover::new(sig_ext);
    prover.set_budget(caps.budget);
    prover.add_base_terms(seed.constants.iter().map(|c| Term::Const(c.clone())));

    let mut stock = seed.constants.clone();
    let mut gamma: BTreeSet<Formula> =
        seed.gamma.iter().map(|f| canonical_binders(f, sig, &seed.constants)).collect();
    let mut delta: BTreeSet<Formula> =
        seed.delta.iter().map(|f| canonical_binders(f, sig, &seed.constants)).collect();
    if !bi_theory_consistent(&mut prover, &gamma, &delta, m)? {
        return Err(CanonicalError::InconsistentSeed { m });
    }

    let mut minted = 0usize;
    for f in gamma.iter().cloned().collect::<Vec<_>>() {
        witness_closure(&f, m, pool, &mut minted, &mut stock, &mut gamma)?;
    }
    prover.add_base_terms(stock.iter().map(|c| Term::Const(c.clone())));
    for phi in scope {
        if gamma.contains(phi) || delta.contains(phi) {
            continue;
        }
        // An existential joins Γ only together with its witness closure: the
        // consistency trial covers the minted instances too, so a witness
        // that would refute Δ sends the whole sentence to Δ instead of
        // poisoning Γ after the fact.
        let mut trial_gamma = gamma.clone();
        trial_gamma.insert(phi.clone());
        let mut trial_minted = minted;
        let mut trial_stock = stock.clone();
        match witness_closure(phi, m, pool, &mut trial_minted, &mut trial_stock, &mut trial_gamma)
        {
            Ok(()) => {
                if bi_theory_consistent(&mut prover, &trial_gamma, &delta, m)? {
                    let fresh: Vec<Term> = trial_stock
                        .difference(&stock)
                        .map(|c| Term::Const(c.clone()))
                        .collect();
                    prover.add_base_terms(fresh);
                    gamma = trial_gamma;
                    minted = trial_minted;
                    stock = trial_stock;
                } else {
                    delta.insert(phi.clone());
                }
            }
            Err(CanonicalError::PoolExhausted { pool: p }) => {
                // The pool ran dry mid-closure. Only report that when the
                // sentence would actually have joined Γ; otherwise it was
                // headed for Δ anyway and no witness is owed.
                let mut bare = gamma.clone();
                bare.insert(phi.clone());
                if bi_theory_consistent(&mut prover, &bare, &delta, m)? {
                    return Err(CanonicalError::PoolExhausted { pool: p });
                }
                delta.insert(phi.clone());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(BiTheory { constants: stock, gamma, delta, m })
}

/// Independent repleteness verification: overlap, completeness over the
/// given scope, existential closure, and m-consistency are each recomputed
/// from scratch. `None` means the pair is replete relative to `scope`.
pub fn replete_defect(
    bi: &BiTheory,
    scope: &[Formula],
    sig: &Signature,
    caps: &BuildCaps,
) -> Result<Option<RepleteDefect>, CanonicalError> {
    if let Some(f) = bi.gamma.intersection(&bi.delta).next() {
        return Ok(Some(RepleteDefect::Overlap(f.clone())));
    }
    for f in scope {
        if !bi.gamma.contains(f) && !bi.delta.contains(f) {
            return Ok(Some(RepleteDefect::Undecided(f.clone())));
        }
    }
    let cands = witness_candidates(&bi.constants, &bi.gamma, bi.m);
    for f in &bi.gamma {
        if let Formula::Exists(x, body) = f {
            if !cands.iter().any(|t| bi.gamma.contains(&body.substitute(x, t))) {
                return Ok(Some(RepleteDefect::UnwitnessedExistential(f.clone())));
            }
        }
    }
    let sig_ext = extend_signature(sig, &bi.constants)?;
    let mut prover = Prover::new(sig_ext);
    prover.set_budget(caps.budget);
    prover.add_base_terms(bi.constants.iter().map(|c| Term::Const(c.clone())));
    if !bi_theory_consistent(&mut prover, &bi.gamma, &bi.delta, bi.m)? {
        return Ok(Some(RepleteDefect::Inconsistent));
    }
    Ok(None)
}

/// One world of a canonical model: its bi-theory, the sentences the
/// semantic lemma is claimed for there, and whether it is a grafted
/// falsification branch rather than a chain level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalWorld {
    pub bi: BiTheory,
    pub scope: Vec<Formula>,
    pub scaffold: bool,
}

/// A chain frame whose world at depth m carries the m-complexity
/// restriction of one saturated pair, plus any grafted branches. World ids
/// in `frame` index `worlds`.
#[derive(Clone, Debug)]
pub struct CanonicalModel {
    pub signature: Signature,
    pub worlds: Vec<CanonicalWorld>,
    pub frame: VolpinFrame,
}

/// The restriction of a k-saturated pair to depth tag `m`: both sides cut
/// to the m-complexity fragment. The top level keeps the full pair so that
/// seeded targets survive even when they outsize the fragment.
fn restrict(full: &BiTheory, m: usize) -> BiTheory {
    if m >= full.m {
        let mut top = full.clone();
        top.m = m;
        return top;
    }
    BiTheory {
        constants: full.constants.clone(),
        gamma: full.gamma.iter().filter(|f| in_m_cf(f, m)).cloned().collect(),
        delta: full.delta.iter().filter(|f| in_m_cf(f, m)).cloned().collect(),
        m,
    }
}

/// Lays the worlds out as a frame (world i a child of `parent_of[i]`),
/// realizes each world's Γ-atoms in the valuation, and gives every
/// constant of the deepest chain stock its own element. Constants minted
/// only by grafted worlds stay anonymous: they appear as fresh domain
/// elements at their world, not as named constants of the frame.
fn assemble_frame(
    sig_ext: &Signature,
    worlds: &[CanonicalWorld],
    parent_of: &[WorldId],
) -> Result<VolpinFrame, CanonicalError> {
    let chain_stock: &BTreeSet<String> = worlds
        .iter()
        .rev()
        .find(|w| !w.scaffold)
        .map(|w| &w.bi.constants)
        .expect("a model has at least its root world");
    let mut builder = FrameBuilder::new(sig_ext.clone());
    let mut elem = std::collections::BTreeMap::new();
    for c in chain_stock {
        let e = builder.add_element();
        elem.insert(c.clone(), e);
        builder.extend_domain(0, &[e])?;
        builder.set_constant(c, e)?;
    }
    for (i, world) in worlds.iter().enumerate() {
        let id = if i == 0 { 0 } else { builder.add_world(parent_of[i])? };
        for extra in world.bi.constants.difference(chain_stock) {
            let e = builder.add_element();
            elem.insert(extra.clone(), e);
            builder.extend_domain(id, &[e])?;
        }
        for f in &world.bi.gamma {
            let Formula::Atom(pred, args) = f else { continue };
            let tuple: Option<Vec<_>> = args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => elem.get(c).copied(),
                    _ => None,
                })
                .collect();
            match tuple {
                Some(tuple) => builder.set_atom(id, pred, &tuple)?,
                None => {
                    return Err(CanonicalError::Document(format!(
                        "atom `{f}` mentions a term with no element"
                    )))
                }
            }
        }
    }
    Ok(builder.build()?)
}

/// The parent of each world in an already-built frame, the root mapped to
/// itself, so grafting can re-assemble with new worlds appended.
fn frame_parents(frame: &VolpinFrame) -> Vec<WorldId> {
    (0..frame.world_count()).map(|w| frame.world(w).parent.unwrap_or(0)).collect()
}

/// Builds the canonical chain model for the empty seed over `sig`.
pub fn build_canonical(
    sig: &Signature,
    k: usize,
    s0_size: usize,
    caps: &BuildCaps,
) -> Result<CanonicalModel, CanonicalError> {
    build_canonical_from(&BiTheory::empty(sig, k), sig, k, s0_size, caps)
}

/// Builds the canonical chain model for an arbitrary seed: one saturation
/// at tag `k`, restricted level by level to tags 0..k, with world depth
/// equal to the depth tag. The stock may grow to `s0_size` constants.
pub fn build_canonical_from(
    seed: &BiTheory,
    sig: &Signature,
    k: usize,
    s0_size: usize,
    caps: &BuildCaps,
) -> Result<CanonicalModel, CanonicalError> {
    if let Some((f, _)) = sig.functions.first() {
        return Err(CanonicalError::FunctionSymbols(f.clone()));
    }
    if k + 1 > caps.max_worlds {
        return Err(CanonicalError::WorldCapExceeded { cap: caps.max_worlds, needed: k + 1 });
    }
    let pool = fresh_pool(sig, seed, s0_size);
    let scope = scope_enumeration(sig, &seed.constants, k, caps);
    let full = saturate_against(seed, k, &pool, sig, caps, &scope)?;

    let worlds: Vec<CanonicalWorld> = (0..=k)
        .map(|m| CanonicalWorld {
            bi: restrict(&full, m),
            scope: scope.iter().filter(|f| in_m_cf(f, m)).cloned().collect(),
            scaffold: false,
        })
        .collect();
    let parents: Vec<WorldId> = (0..=k).map(|m| m.saturating_sub(1)).collect();
    let signature = extend_signature(sig, &full.constants)?;
    let frame = assemble_frame(&signature, &worlds, &parents)?;
    Ok(CanonicalModel { signature, worlds, frame })
}

/// Verdict of one semantic-lemma comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LemmaVerdict {
    /// Forcing and Γ-membership agree (both true or both false).
    Agrees { forced: bool },
    /// The two sides disagree.
    Mismatch { forced: bool, in_gamma: bool },
}

/// Compares forcing at one world against Γ-membership for one sentence.
/// The sentence must lie in the m-complexity fragment of the world's tag;
/// its bound variables are renamed to the model's spelling before the
/// Γ side is consulted, since forcing never sees binder names.
pub fn semantic_lemma_check(
    model: &CanonicalModel,
    world: WorldId,
    phi: &Formula,
) -> Result<LemmaVerdict, CanonicalError> {
    let phi = canonical_binders(phi, &model.signature, &BTreeSet::new());
    let w = model.worlds.get(world).ok_or(CanonicalError::UnknownWorld(world))?;
    if !in_m_cf(&phi, w.bi.m) {
        return Err(CanonicalError::OutOfScope { formula: phi.clone(), m: w.bi.m });
    }
    let mut ctx = ForcingContext::new(&model.frame);
    let forced = ctx.forces(world, &phi)?;
    let in_gamma = w.bi.gamma.contains(&phi);
    Ok(if forced == in_gamma {
        LemmaVerdict::Agrees { forced }
    } else {
        LemmaVerdict::Mismatch { forced, in_gamma }
    })
}

/// One disagreement found by [`semantic_lemma_scan`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaMismatch {
    pub world: WorldId,
    pub formula: Formula,
    pub forced: bool,
    pub in_gamma: bool,
}

/// Outcome of scanning every (chain world, in-scope sentence) pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaScan {
    pub pairs: usize,
    pub mismatches: Vec<LemmaMismatch>,
}

/// Runs the semantic lemma over every non-scaffold world and its full
/// scope, collecting all disagreements.
pub fn semantic_lemma_scan(model: &CanonicalModel) -> Result<LemmaScan, CanonicalError> {
    let mut ctx = ForcingContext::new(&model.frame);
    let mut scan = LemmaScan { pairs: 0, mismatches: Vec::new() };
    for (id, world) in model.worlds.iter().enumerate() {
        if world.scaffold {
            continue;
        }
        for phi in &world.scope {
            scan.pairs += 1;
            let forced = ctx.forces(id, phi)?;
            let in_gamma = world.bi.gamma.contains(phi);
            if forced != in_gamma {
                scan.mismatches.push(LemmaMismatch {
                    world: id,
                    formula: phi.clone(),
                    forced,
                    in_gamma,
                });
            }
        }
    }
    Ok(scan)
}

/// Result of the bounded decision pair for one target sentence.
#[derive(Clone, Debug)]
pub enum CompletenessOutcome {
    /// The target has a proof of depth ≤ k.
    Proof(ProofTree),
    /// No proof exists within k; `world` indexes the chain leaf that
    /// leaves the target unforced.
    Countermodel { model: CanonicalModel, world: WorldId },
}

/// Decides `phi` at depth `k`: a bounded proof search first, then a
/// Δ-seeded canonical chain when the search fails. Targets the bare chain
/// forces vacuously get falsifying branches grafted below the leaf —
/// a fresh undecided element for a universal, a support branch that
/// establishes the antecedent while the consequent fails for an
/// implication or a disjunction of implications. An atom the saturation
/// admits at depth k can still doom the chain — one proof step past k
/// turns it against the target, and no graft undoes a persistent atom —
/// so a failed build is retried with each ground atom excluded from the
/// start. A final semantic gate guarantees the returned world really does
/// not force the target.
pub fn completeness_counterexample(
    phi: &Formula,
    k: usize,
    sig: &Signature,
    s0_size: usize,
    caps: &BuildCaps,
) -> Result<CompletenessOutcome, CanonicalError> {
    if !phi.is_closed() {
        return Err(CanonicalError::BadTarget(format!("`{phi}` has free variables")));
    }
    check_formula(phi, sig).map_err(CanonicalError::BadTarget)?;

    let mut prover = Prover::new(sig.clone());
    prover.set_budget(caps.budget);
    prover.add_base_terms(sig.constants.iter().map(|c| Term::Const(c.clone())));
    if let Some(tree) = prover.prove_bounded(&Sequent::new(Vec::new(), phi.clone()), k)? {
        return Ok(CompletenessOutcome::Proof(tree));
    }

    let target = canonical_binders(phi, sig, &BTreeSet::new());
    let leaf: WorldId = k;
    let attempt = |excluded: Vec<Formula>| -> Result<CanonicalModel, CanonicalError> {
        let mut delta = vec![target.clone()];
        delta.extend(excluded);
        let seed = BiTheory::new(sig.constants.iter().cloned(), [], delta, k);
        let model = build_canonical_from(&seed, sig, k, s0_size, caps)?;
        ensure_unforced(model, leaf, &target, s0_size, caps)
    };
    match attempt(Vec::new()) {
        Ok(model) => Ok(CompletenessOutcome::Countermodel { model, world: leaf }),
        Err(first) => {
            // Ground atoms invade Γ whenever refuting them needs one proof
            // step more than the tag allows, and existential closures
            // smuggle the same atoms back in through witness minting. Try
            // excluding each injector singly, then all at once.
            let mut injectors = ground_atoms(sig);
            injectors.extend(existential_closures(sig));
            let mut exclusions: Vec<Vec<Formula>> =
                injectors.iter().map(|f| vec![f.clone()]).collect();
            if injectors.len() > 1 {
                exclusions.push(injectors);
            }
            for extra in exclusions {
                if let Ok(model) = attempt(extra) {
                    return Ok(CompletenessOutcome::Countermodel { model, world: leaf });
                }
            }
            Err(first)
        }
    }
}

/// Every closed atom over the signature's own constants.
fn ground_atoms(sig: &Signature) -> Vec<Formula> {
    let consts: Vec<Term> = sig.constants.iter().map(|c| Term::Const(c.clone())).collect();
    let mut out = Vec::new();
    for (p, arity) in &sig.predicates {
        for args in std::iter::repeat(consts.clone()).take(*arity).multi_cartesian_product() {
            out.push(Formula::Atom(p.clone(), args));
        }
    }
    out
}

/// For each predicate, the sentence ∃x̄. p(x̄) — the shape whose witness
/// closure mints a fresh constant together with a fresh atom over it.
fn existential_closures(sig: &Signature) -> Vec<Formula> {
    let mut out = Vec::new();
    for (p, arity) in &sig.predicates {
        if *arity == 0 {
            continue;
        }
        let args: Vec<Term> = (0..*arity).map(|i| Term::Var(format!("x{i}"))).collect();
        let mut f = Formula::Atom(p.clone(), args);
        for i in (0..*arity).rev() {
            f = Formula::Exists(format!("x{i}"), Box::new(f));
        }
        out.push(f);
    }
    out
}

/// How many graft rounds [`ensure_unforced`] attempts before giving up.
/// Each round removes one vacuously forced obstruction; compound targets
/// can need one round per offending subtarget.
const GRAFT_ROUNDS: usize = 3;

/// Grafts falsifying branches until `leaf` no longer forces `phi`,
/// dispatching on the shape of whichever subtarget is still forced and at
/// whichever world the classifier anchors it — a support branch can hand
/// later rounds an anchor at its own tail. Errors rather than returning a
/// model whose leaf still forces the target.
fn ensure_unforced(
    mut model: CanonicalModel,
    leaf: WorldId,
    phi: &Formula,
    s0_size: usize,
    caps: &BuildCaps,
) -> Result<CanonicalModel, CanonicalError> {
    for _ in 0..GRAFT_ROUNDS {
        if !ForcingContext::new(&model.frame).forces(leaf, phi)? {
            return Ok(model);
        }
        model = match classify_obstruction(&model, leaf, phi)? {
            Obstruction::Universal { anchor, binder, body } => {
                graft_element_branch(model, anchor, &binder, &body, s0_size, caps)?
            }
            Obstruction::Implication { anchor, antecedent, consequent } => {
                graft_support_branch(model, anchor, &antecedent, &consequent, caps)?
            }
            Obstruction::Opaque(f) => {
                return Err(CanonicalError::SemanticGate(format!(
                    "`{f}` is still forced at the chain leaf and no graft applies to its shape"
                )))
            }
        };
    }
    Err(CanonicalError::SemanticGate(format!(
        "`{phi}` is still forced after {GRAFT_ROUNDS} grafted branches"
    )))
}

/// The falsification strategy a vacuously forced target calls for, anchored
/// at the world whose forcing has to break.
enum Obstruction {
    /// ∀x body forced at `anchor`: add a world below it whose domain holds
    /// a fresh element with `body` left unrealized for it.
    Universal { anchor: WorldId, binder: String, body: Formula },
    /// α → β vacuously forced at `anchor`: add a branch below it that
    /// establishes α while β keeps failing, so the trigger finally fires.
    Implication { anchor: WorldId, antecedent: Formula, consequent: Formula },
    /// No grafting strategy applies to this shape.
    Opaque(Formula),
}

/// Picks the graft for a target still forced at `anchor`. Implications
/// whose trigger already fires somewhere in the anchor's cone survive only
/// through the consequent, so the classifier recurses on it there;
/// otherwise the antecedent has never been established and a support
/// branch is called for. Disjunctions ask which disjunct some strict
/// ancestor forces and recurse on that side; existentials likewise find a
/// named element whose instance some strict ancestor forces and recurse on
/// the instance. Grafts attach below the anchor, which extends every
/// ancestor's cone, so they can break cone-quantified forcing wherever it
/// holds — which is also why breaking one conjunct of a conjunction at the
/// anchor breaks the conjunction at every world above.
fn classify_obstruction(
    model: &CanonicalModel,
    anchor: WorldId,
    phi: &Formula,
) -> Result<Obstruction, CanonicalError> {
    match phi {
        Formula::Forall(x, body) => {
            if !body.free_vars().contains(x) {
                // A vacuous binder quantifies over nothing: the target
                // stands or falls with its body, and a fresh-element
                // graft would leave the body's forcing untouched.
                return classify_obstruction(model, anchor, body);
            }
            // An earlier round may already have planted a fresh element
            // whose body instance the scaffold world still forces —
            // cone-quantified bodies stay vacuously forced until their own
            // obstruction is broken below that world.
            let mut ctx = ForcingContext::new(&model.frame);
            for w1 in model.frame.extensions(anchor)? {
                if !model.worlds[w1].scaffold {
                    continue;
                }
                for (name, e) in &model.frame.constants {
                    if model.frame.world(anchor).domain.contains(e)
                        || !model.frame.world(w1).domain.contains(e)
                    {
                        continue;
                    }
                    let inst = body.substitute(x, &Term::Const(name.clone()));
                    if ctx.forces(w1, &inst)? {
                        return classify_obstruction(model, w1, &inst);
                    }
                }
            }
            Ok(Obstruction::Universal { anchor, binder: x.clone(), body: (**body).clone() })
        }
        Formula::Implies(a, b) => {
            if matches!(a.as_ref(), Formula::Falsum) {
                // Nothing ever establishes `false`, so the trigger can
                // never fire: the implication holds at every world of
                // every frame and no graft can help.
                return Ok(Obstruction::Opaque(phi.clone()));
            }
            let mut ctx = ForcingContext::new(&model.frame);
            for w1 in model.frame.extensions(anchor)? {
                let mut fired = false;
                for w in model.frame.ancestors(w1) {
                    if ctx.forces(w, a)? {
                        fired = true;
                        break;
                    }
                }
                if fired {
                    return classify_obstruction(model, w1, b);
                }
            }
            Ok(Obstruction::Implication {
                anchor,
                antecedent: (**a).clone(),
                consequent: (**b).clone(),
            })
        }
        Formula::And(a, b) => {
            // Each conjunct is established at some strict ancestor; it is
            // enough to pick one side a graft can unsettle everywhere, and
            // sides classified opaque (atoms, `false`-guarded shapes) are
            // exactly the unbreakable ones.
            for side in [a.as_ref(), b.as_ref()] {
                match classify_obstruction(model, anchor, side)? {
                    Obstruction::Opaque(_) => continue,
                    graftable => return Ok(graftable),
                }
            }
            Ok(Obstruction::Opaque(phi.clone()))
        }
        Formula::Or(a, b) => {
            let mut ctx = ForcingContext::new(&model.frame);
            for side in [a.as_ref(), b.as_ref()] {
                for w in model.frame.ancestors(anchor) {
                    if ctx.forces(w, side)? {
                        return classify_obstruction(model, anchor, side);
                    }
                }
            }
            Ok(Obstruction::Opaque(phi.clone()))
        }
        Formula::Exists(x, body) => {
            let mut ctx = ForcingContext::new(&model.frame);
            for w in model.frame.ancestors(anchor) {
                for (name, e) in &model.frame.constants {
                    if !model.frame.world(w).domain.contains(e) {
                        continue;
                    }
                    let inst = body.substitute(x, &Term::Const(name.clone()));
                    if ctx.forces(w, &inst)? {
                        return classify_obstruction(model, anchor, &inst);
                    }
                }
            }
            Ok(Obstruction::Opaque(phi.clone()))
        }
        _ => Ok(Obstruction::Opaque(phi.clone())),
    }
}

/// Grafts one world below the anchor for a universal target ∀x body: a
/// fresh constant joins the stock as an anonymous domain element and
/// body(d) is committed as failing there. The world commits the anchor's
/// atomic diagram only — saturated Γ-compounds are commitments about the
/// branch above, not about this one — and (atoms, {body(d)}) must be
/// consistent at the model's tag; a failure means no such world exists
/// and is surfaced rather than papered over.
fn graft_element_branch(
    model: CanonicalModel,
    anchor: WorldId,
    x: &str,
    body: &Formula,
    s0_size: usize,
    caps: &BuildCaps,
) -> Result<CanonicalModel, CanonicalError> {
    if model.worlds.len() + 1 > caps.max_worlds {
        return Err(CanonicalError::WorldCapExceeded {
            cap: caps.max_worlds,
            needed: model.worlds.len() + 1,
        });
    }
    let anchor_bi = model.worlds[anchor].bi.clone();
    let pool =
        fresh_pool(&model.signature, &anchor_bi, s0_size.max(anchor_bi.constants.len() + 1));
    let fresh = pool.first().cloned().ok_or(CanonicalError::PoolExhausted { pool: 0 })?;
    let falsified = body.substitute(x, &Term::Const(fresh.clone()));

    let mut names = anchor_bi.constants.clone();
    names.insert(fresh.clone());
    let atoms = atomic_diagram(&anchor_bi.gamma);
    let delta: BTreeSet<Formula> = [falsified.clone()].into();
    assert_graft_consistent(&model.signature, &names, &atoms, &delta, anchor_bi.m, caps)?;

    let mut worlds = model.worlds;
    let mut parents = frame_parents(&model.frame);
    worlds.push(CanonicalWorld {
        bi: BiTheory { constants: names, gamma: atoms, delta, m: anchor_bi.m },
        scope: Vec::new(),
        scaffold: true,
    });
    parents.push(anchor);
    let frame = assemble_frame(&model.signature, &worlds, &parents)?;
    Ok(CanonicalModel { signature: model.signature, worlds, frame })
}

/// Grafts a support branch below the anchor for an implication α → β
/// forced there vacuously: a world committing the anchor's atomic diagram
/// plus enough atoms to establish α, with β failing, followed by enough
/// plain descendants for α to count as established strictly below them.
/// Each candidate atom set must keep (atoms ∪ support, {β}) consistent at
/// the model's tag; when none does, the failure is surfaced.
fn graft_support_branch(
    model: CanonicalModel,
    anchor: WorldId,
    antecedent: &Formula,
    consequent: &Formula,
    caps: &BuildCaps,
) -> Result<CanonicalModel, CanonicalError> {
    let added = antecedent.complexity() + 1;
    if model.worlds.len() + added > caps.max_worlds {
        return Err(CanonicalError::WorldCapExceeded {
            cap: caps.max_worlds,
            needed: model.worlds.len() + added,
        });
    }
    let anchor_bi = model.worlds[anchor].bi.clone();
    let atoms = atomic_diagram(&anchor_bi.gamma);
    let delta: BTreeSet<Formula> = [consequent.clone()].into();

    let mut committed = None;
    for support in support_alternatives(antecedent, &anchor_bi.constants) {
        let mut trial = atoms.clone();
        trial.extend(support);
        let ok = assert_graft_consistent(
            &model.signature,
            &anchor_bi.constants,
            &trial,
            &delta,
            anchor_bi.m,
            caps,
        );
        if ok.is_ok() {
            committed = Some(trial);
            break;
        }
    }
    let Some(committed) = committed else {
        return Err(CanonicalError::SemanticGate(format!(
            "no atoms establish `{antecedent}` while `{consequent}` fails, within depth {}",
            anchor_bi.m
        )));
    };

    let mut worlds = model.worlds;
    let mut parents = frame_parents(&model.frame);
    let mut parent = anchor;
    for _ in 0..added {
        let id = worlds.len();
        worlds.push(CanonicalWorld {
            bi: BiTheory {
                constants: anchor_bi.constants.clone(),
                gamma: committed.clone(),
                delta: delta.clone(),
                m: anchor_bi.m,
            },
            scope: Vec::new(),
            scaffold: true,
        });
        parents.push(parent);
        parent = id;
    }
    let frame = assemble_frame(&model.signature, &worlds, &parents)?;
    Ok(CanonicalModel { signature: model.signature, worlds, frame })
}

/// The atomic members of a Γ set: the part of a chain world's commitments
/// that a grafted branch inherits outright.
fn atomic_diagram(gamma: &BTreeSet<Formula>) -> BTreeSet<Formula> {
    gamma.iter().filter(|f| matches!(f, Formula::Atom(..))).cloned().collect()
}

/// The consistency claim every graft rests on, checked at the model's own
/// tag: the committed atoms must not prove any capped disjunction of the
/// falsified sentences.
fn assert_graft_consistent(
    sig: &Signature,
    names: &BTreeSet<String>,
    gamma: &BTreeSet<Formula>,
    delta: &BTreeSet<Formula>,
    m: usize,
    caps: &BuildCaps,
) -> Result<(), CanonicalError> {
    let sig_ext = extend_signature(sig, names)?;
    let mut prover = Prover::new(sig_ext);
    prover.set_budget(caps.budget);
    prover.add_base_terms(names.iter().map(|c| Term::Const(c.clone())));
    if !bi_theory_consistent(&mut prover, gamma, delta, m)? {
        let failing = delta.iter().next().expect("graft Δ holds the falsified sentence");
        return Err(CanonicalError::SemanticGate(format!(
            "committing `{failing}` as failing refutes the branch within depth {m}"
        )));
    }
    Ok(())
}

/// All ways to establish a formula by committing atoms: an atom is its own
/// support, a conjunction needs support for both sides, a disjunction for
/// either, an existential for any constant instance of its body. Falsum,
/// universals and implications yield no alternatives — no finite atom set
/// establishes them outright.
fn support_alternatives(f: &Formula, names: &BTreeSet<String>) -> Vec<BTreeSet<Formula>> {
    match f {
        Formula::Atom(..) => vec![BTreeSet::from([f.clone()])],
        Formula::And(a, b) => {
            let right = support_alternatives(b, names);
            support_alternatives(a, names)
                .iter()
                .flat_map(|l| right.iter().map(|r| l.union(r).cloned().collect()))
                .collect()
        }
        Formula::Or(a, b) => {
            let mut out = support_alternatives(a, names);
            out.extend(support_alternatives(b, names));
            out
        }
        Formula::Exists(x, body) => {
            let mut out = Vec::new();
            for name in names {
                let inst = body.substitute(x, &Term::Const(name.clone()));
                out.extend(support_alternatives(&inst, names));
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Outcome of a depth-propagation comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropagationOutcome {
    /// The conclusion is forced by every world at `depth` (the smallest
    /// such depth, possibly earlier than k1 + k2).
    ForcedBy { depth: usize },
    /// The conclusion is not forced even at depth k1 + k2.
    Violation,
}

/// Errors from [`depth_propagation_check`], one per precondition.
#[derive(Debug, thiserror::Error)]
pub enum PropagationError {
    #[error("axiom `{0}` is not forced at depth {1}")]
    AxiomNotForced(Formula, usize),
    #[error("`{goal}` has no proof from the axioms within depth {depth}")]
    NotProved { goal: Formula, depth: usize },
    #[error("the frame has a branch shorter than {0}")]
    BranchTooShort(usize),
    #[error(transparent)]
    Forcing(#[from] ForcingError),
    #[error(transparent)]
    Resource(#[from] ResourceLimit),
}

/// Checks depth propagation: when every axiom of `theory` is forced at
/// depth `k1` and `psi` has a proof of depth ≤ `k2` from those axioms, the
/// frame must force `psi` at depth k1 + k2. Every branch must reach that
/// depth so the claim quantifies over a full slice.
pub fn depth_propagation_check(
    frame: &VolpinFrame,
    theory: &Theory,
    k1: usize,
    psi: &Formula,
    k2: usize,
) -> Result<PropagationOutcome, PropagationError> {
    let mut ctx = ForcingContext::new(frame);
    frame
        .slice(k1 + k2)
        .map_err(|_| PropagationError::BranchTooShort(k1 + k2))?;
    for ax in &theory.axioms {
        if !ctx.k_forces(k1, ax)? {
            return Err(PropagationError::AxiomNotForced(ax.clone(), k1));
        }
    }
    let mut prover = Prover::for_theory(theory);
    let goal = Sequent::new(theory.axioms.iter().cloned(), psi.clone());
    if prover.prove_bounded(&goal, k2)?.is_none() {
        return Err(PropagationError::NotProved { goal: psi.clone(), depth: k2 });
    }
    for depth in 0..=k1 + k2 {
        if ctx.k_forces(depth, psi)? {
            return Ok(PropagationOutcome::ForcedBy { depth });
        }
    }
    Ok(PropagationOutcome::Violation)
}

impl CanonicalModel {
    /// Serializes the model: signature, per-world bi-theories and scopes,
    /// and the frame in its own document format.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "signature": self.signature,
            "worlds": self.worlds,
            "frame": self.frame.to_json(),
        })
    }

    /// Parses a model document and revalidates the frame.
    pub fn from_json(text: &str) -> Result<CanonicalModel, CanonicalError> {
        let doc: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CanonicalError::Document(e.to_string()))?;
        let signature: Signature = serde_json::from_value(doc["signature"].clone())
            .map_err(|e| CanonicalError::Document(format!("signature: {e}")))?;
        let worlds: Vec<CanonicalWorld> = serde_json::from_value(doc["worlds"].clone())
            .map_err(|e| CanonicalError::Document(format!("worlds: {e}")))?;
        let frame = VolpinFrame::from_json(&doc["frame"].to_string())
            .map_err(|e| CanonicalError::Document(format!("frame: {e}")))?;
        if worlds.len() != frame.world_count() {
            return Err(CanonicalError::Document(format!(
                "{} worlds described, {} in the frame",
                worlds.len(),
                frame.world_count()
            )));
        }
        Ok(CanonicalModel { signature, worlds, frame })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::check_proof;
    use crate::syntax::parse_formula;

    fn unary_sig() -> Signature {
        Signature::build(&[("P", 1)], &[], &["c"]).unwrap()
    }

    fn f(sig: &Signature, text: &str) -> Formula {
        parse_formula(text, sig).unwrap()
    }

    fn pool10() -> Vec<String> {
        (0..10).map(|i| format!("d{i}")).collect()
    }

    #[test]
    fn saturating_a_simple_seed_decides_the_scope() {
        let sig = unary_sig();
        let seed = BiTheory::new(["c".into()], [f(&sig, "P(c)")], [], 2);
        let caps = BuildCaps::default();
        let out = saturate(&seed, 2, &pool10(), &sig, &caps).unwrap();
        assert!(out.gamma.contains(&f(&sig, "P(c)")));
        assert!(out.delta.contains(&Formula::Falsum));
        assert!(out.gamma.intersection(&out.delta).next().is_none());
        let scope = scope_enumeration(&sig, &seed.constants, 2, &caps);
        assert!(scope.len() >= 20);
        assert_eq!(replete_defect(&out, &scope, &sig, &caps).unwrap(), None);
    }

    #[test]
    fn saturation_is_a_fixpoint_on_replete_inputs() {
        let sig = unary_sig();
        let seed = BiTheory::new(["c".into()], [f(&sig, "P(c)")], [], 2);
        let caps = BuildCaps::default();
        let once = saturate(&seed, 2, &pool10(), &sig, &caps).unwrap();
        let twice = saturate(&once, 2, &pool10(), &sig, &caps).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn existential_seeds_mint_witnesses() {
        let sig = Signature::build(&[("P", 1)], &[], &[]).unwrap();
        let target = parse_formula("exists x. P(x)", &sig).unwrap();
        let seed = BiTheory::new([], [target.clone()], [], 2);
        let caps = BuildCaps::default();
        let out = saturate(&seed, 2, &pool10(), &sig, &caps).unwrap();
        assert!(out.constants.contains("d0"));
        let witness = Formula::atom("P", vec![Term::Const("d0".into())]);
        assert!(out.gamma.contains(&witness));
        let scope = scope_enumeration(&sig, &seed.constants, 2, &caps);
        assert_eq!(replete_defect(&out, &scope, &sig, &caps).unwrap(), None);
    }

    #[test]
    fn witness_reuse_prefers_existing_constants() {
        let sig = unary_sig();
        let seed = BiTheory::new(["c".into()], [f(&sig, "P(c)")], [], 2);
        let out = saturate(&seed, 2, &pool10(), &sig, &BuildCaps::default()).unwrap();
        assert!(out.gamma.contains(&f(&sig, "exists x0. P(x0)")));
        assert_eq!(out.constants, ["c".to_string()].into());
    }

    #[test]
    fn pool_exhaustion_is_reported() {
        let sig = Signature::build(&[("P", 1)], &[], &[]).unwrap();
        let seed = BiTheory::new([], [f(&sig, "exists x. P(x)")], [], 2);
        let err = saturate(&seed, 2, &[], &sig, &BuildCaps::default()).unwrap_err();
        assert!(matches!(err, CanonicalError::PoolExhausted { pool: 0 }));
    }

    #[test]
    fn inconsistent_seeds_are_rejected() {
        let sig = unary_sig();
        let seed = BiTheory::new(
            ["c".into()],
            [f(&sig, "P(c)"), f(&sig, "P(c) -> false")],
            [],
            2,
        );
        let err = saturate(&seed, 2, &pool10(), &sig, &BuildCaps::default()).unwrap_err();
        assert!(matches!(err, CanonicalError::InconsistentSeed { m: 2 }));
    }

    #[test]
    fn corrupting_a_saturated_pair_is_detected() {
        let sig = unary_sig();
        let caps = BuildCaps::default();
        let seed = BiTheory::new(["c".into()], [f(&sig, "P(c)")], [], 2);
        let scope = scope_enumeration(&sig, &seed.constants, 2, &caps);
        let good = saturate(&seed, 2, &pool10(), &sig, &caps).unwrap();

        let mut undecided = good.clone();
        undecided.gamma.remove(&f(&sig, "P(c)"));
        assert_eq!(
            replete_defect(&undecided, &scope, &sig, &caps).unwrap(),
            Some(RepleteDefect::Undecided(f(&sig, "P(c)")))
        );

        let mut overlap = good.clone();
        overlap.delta.insert(f(&sig, "P(c)"));
        assert_eq!(
            replete_defect(&overlap, &scope, &sig, &caps).unwrap(),
            Some(RepleteDefect::Overlap(f(&sig, "P(c)")))
        );

        let open_sig = Signature::build(&[("P", 1)], &[], &[]).unwrap();
        let ex = parse_formula("exists x. P(x)", &open_sig).unwrap();
        let widowed = BiTheory::new(["d0".into()], [ex.clone()], [], 2);
        assert_eq!(
            replete_defect(&widowed, &[], &open_sig, &caps).unwrap(),
            Some(RepleteDefect::UnwitnessedExistential(ex))
        );

        let clash = BiTheory::new(
            ["c".into()],
            [f(&sig, "P(c)"), f(&sig, "P(c) -> false")],
            [],
            2,
        );
        assert_eq!(
            replete_defect(&clash, &[], &sig, &caps).unwrap(),
            Some(RepleteDefect::Inconsistent)
        );
    }

    #[test]
    fn canonical_chain_grades_decisions_by_depth() {
        let sig = unary_sig();
        let model = build_canonical(&sig, 1, 6, &BuildCaps::default()).unwrap();
        assert_eq!(model.worlds.len(), 2);
        assert_eq!(model.frame.world_count(), 2);
        assert_eq!(model.frame.max_depth(), 1);
        let root = &model.worlds[0];
        assert!(root.bi.gamma.is_empty() && root.bi.delta.is_empty());
        assert!(root.scope.is_empty());
        let leaf = &model.worlds[1];
        assert_eq!(leaf.scope, vec![f(&sig, "P(c)"), Formula::Falsum]);
        assert!(leaf.bi.gamma.contains(&f(&sig, "P(c)")));
        assert!(leaf.bi.delta.contains(&Formula::Falsum));
        let mut ctx = ForcingContext::new(&model.frame);
        assert!(!ctx.forces(0, &f(&sig, "P(c)")).unwrap());
        assert!(ctx.forces(1, &f(&sig, "P(c)")).unwrap());
    }

    #[test]
    fn degenerate_and_empty_models_stay_lawful() {
        let sig = unary_sig();
        let point = build_canonical(&sig, 0, 6, &BuildCaps::default()).unwrap();
        assert_eq!(point.worlds.len(), 1);
        assert!(point.worlds[0].bi.gamma.is_empty());
        assert!(point.worlds[0].scope.is_empty());

        let bare = Signature::build(&[], &[], &[]).unwrap();
        let model = build_canonical(&bare, 2, 6, &BuildCaps::default()).unwrap();
        for world in &model.worlds[1..] {
            assert!(world.bi.delta.contains(&Formula::Falsum));
        }
        let scan = semantic_lemma_scan(&model).unwrap();
        assert!(scan.pairs > 0);
        assert!(scan.mismatches.is_empty());
    }

    #[test]
    fn semantic_lemma_holds_on_desk_models() {
        let sig = unary_sig();
        let caps = BuildCaps::default();
        for gamma_seed in [Vec::new(), vec![f(&sig, "P(c)")]] {
            let seed = BiTheory::new(["c".into()], gamma_seed, [], 2);
            let model = build_canonical_from(&seed, &sig, 2, 6, &caps).unwrap();
            let scan = semantic_lemma_scan(&model).unwrap();
            assert!(scan.pairs >= 20, "only {} pairs scanned", scan.pairs);
            assert_eq!(scan.mismatches, Vec::new());
        }
    }

    #[test]
    fn lemma_check_flags_corrupted_worlds() {
        let sig = unary_sig();
        let seed = BiTheory::new(["c".into()], [f(&sig, "P(c)")], [], 2);
        let mut model = build_canonical_from(&seed, &sig, 2, 6, &BuildCaps::default()).unwrap();
        let target = f(&sig, "P(c)");
        assert_eq!(
            semantic_lemma_check(&model, 2, &target).unwrap(),
            LemmaVerdict::Agrees { forced: true }
        );
        model.worlds[2].bi.gamma.remove(&target);
        assert_eq!(
            semantic_lemma_check(&model, 2, &target).unwrap(),
            LemmaVerdict::Mismatch { forced: true, in_gamma: false }
        );
        let deep = f(&sig, "P(c) & (P(c) & P(c))");
        assert!(matches!(
            semantic_lemma_check(&model, 1, &deep),
            Err(CanonicalError::OutOfScope { m: 1, .. })
        ));
    }

    #[test]
    fn deductive_closure_holds_at_desk_scale() {
        let sig = unary_sig();
        let model = build_canonical(&sig, 2, 6, &BuildCaps::default()).unwrap();
        let leaf = &model.worlds[2];
        let mut prover = Prover::new(model.signature.clone());
        prover.add_base_terms([Term::Const("c".into())]);
        let mut provable = 0;
        for phi in &leaf.scope {
            let goal = Sequent::new(leaf.bi.gamma.iter().cloned(), phi.clone());
            if prover.prove_bounded(&goal, 2).unwrap().is_some() {
                provable += 1;
                assert!(
                    leaf.bi.gamma.contains(phi),
                    "`{phi}` is provable from the leaf but not committed there"
                );
            }
        }
        assert!(provable > 0);
    }

    #[test]
    fn excluded_middle_gets_a_countermodel() {
        let sig = unary_sig();
        let phi = f(&sig, "P(c) | (P(c) -> false)");
        let out = completeness_counterexample(&phi, 4, &sig, 6, &BuildCaps::default()).unwrap();
        let CompletenessOutcome::Countermodel { model, world } = out else {
            panic!("excluded middle should not be provable at depth 4");
        };
        assert_eq!(world, 4);
        assert!(model.worlds[world].bi.delta.contains(&phi));
        let mut ctx = ForcingContext::new(&model.frame);
        assert!(!ctx.forces(world, &phi).unwrap());
    }

    #[test]
    fn provable_targets_return_their_proofs() {
        let sig = unary_sig();
        for (text, k) in [("P(c) -> P(c)", 2), ("false -> P(c)", 2)] {
            let phi = f(&sig, text);
            let out =
                completeness_counterexample(&phi, k, &sig, 6, &BuildCaps::default()).unwrap();
            let CompletenessOutcome::Proof(tree) = out else {
                panic!("`{text}` should be provable at depth {k}");
            };
            assert_eq!(tree.conclusion, Sequent::new(Vec::new(), phi));
            assert!(check_proof(&tree).is_ok());
            assert!(tree.depth() <= k);
        }
    }

    #[test]
    fn falsum_gets_a_countermodel() {
        let sig = unary_sig();
        let out = completeness_counterexample(&Formula::Falsum, 2, &sig, 6, &BuildCaps::default())
            .unwrap();
        let CompletenessOutcome::Countermodel { model, world } = out else {
            panic!("falsum must not be provable");
        };
        let mut ctx = ForcingContext::new(&model.frame);
        assert!(!ctx.forces(world, &Formula::Falsum).unwrap());
    }

    #[test]
    fn universal_targets_need_a_grafted_branch() {
        let sig = unary_sig();
        let phi = f(&sig, "forall x. P(x)");
        let out = completeness_counterexample(&phi, 2, &sig, 6, &BuildCaps::default()).unwrap();
        let CompletenessOutcome::Countermodel { model, world } = out else {
            panic!("a bare universal should not be provable at depth 2");
        };
        assert_eq!(world, 2);
        let graft = model.worlds.last().unwrap();
        assert!(graft.scaffold, "the chain alone cannot falsify this universal");
        assert!(graft.bi.constants.contains("d0"));
        assert!(graft.bi.delta.contains(&Formula::atom("P", vec![Term::Const("d0".into())])));
        let leaf_domain = model.frame.world(world).domain.len();
        let graft_domain = model.frame.world(model.worlds.len() - 1).domain.len();
        assert_eq!(graft_domain, leaf_domain + 1);
        let mut ctx = ForcingContext::new(&model.frame);
        assert!(!ctx.forces(world, &phi).unwrap());
    }

    #[test]
    fn decision_pair_covers_a_desk_suite() {
        let sig = Signature::build(&[("P", 1), ("Q", 1)], &[], &["c"]).unwrap();
        let caps = BuildCaps::default();
        let suite = [
            ("false", 2),
            ("P(c) | (P(c) -> false)", 4),
            ("exists x. P(x)", 3),
            ("forall x. P(x)", 2),
            ("P(c) -> Q(c)", 3),
            ("P(c) -> false", 3),
            ("P(c) & (P(c) -> false)", 3),
            ("P(c) -> P(c)", 2),
            ("false -> P(c)", 2),
            ("P(c) -> (Q(c) -> P(c))", 3),
        ];
        for (text, k) in suite {
            let phi = parse_formula(text, &sig).unwrap();
            let mut prover = Prover::new(sig.clone());
            prover.add_base_terms([Term::Const("c".into())]);
            let provable = prover
                .prove_bounded(&Sequent::new(Vec::new(), phi.clone()), k)
                .unwrap()
                .is_some();
            match completeness_counterexample(&phi, k, &sig, 6, &caps).unwrap() {
                CompletenessOutcome::Proof(_) => {
                    assert!(provable, "`{text}` decided as provable but search fails")
                }
                CompletenessOutcome::Countermodel { model, world } => {
                    assert!(!provable, "`{text}` decided as refuted but search succeeds");
                    let mut ctx = ForcingContext::new(&model.frame);
                    assert!(!ctx.forces(world, &phi).unwrap(), "`{text}` still forced");
                }
            }
        }
    }

    #[test]
    fn depth_propagation_tracks_forcing() {
        let sig = unary_sig();
        let axiom = f(&sig, "P(c)");
        let theory = Theory::new("atoms", sig.clone(), vec![axiom.clone()]).unwrap();
        let psi = f(&sig, "P(c) | P(c)");

        let mut builder = FrameBuilder::new(sig.clone());
        let e = builder.add_element();
        builder.extend_domain(0, &[e]).unwrap();
        builder.set_constant("c", e).unwrap();
        let mut prev = 0;
        for depth in 1..=3 {
            let w = builder.add_world(prev).unwrap();
            if depth == 1 {
                builder.set_atom(w, "P", &[e]).unwrap();
            }
            prev = w;
        }
        let frame = builder.build().unwrap();

        assert_eq!(
            depth_propagation_check(&frame, &theory, 1, &psi, 2).unwrap(),
            PropagationOutcome::ForcedBy { depth: 2 }
        );
        assert!(matches!(
            depth_propagation_check(&frame, &theory, 0, &psi, 2),
            Err(PropagationError::AxiomNotForced(_, 0))
        ));
        let deep = f(&sig, "(exists x. P(x)) & (exists x. P(x))");
        assert!(matches!(
            depth_propagation_check(&frame, &theory, 1, &deep, 2),
            Err(PropagationError::NotProved { depth: 2, .. })
        ));
        assert!(matches!(
            depth_propagation_check(&frame, &theory, 1, &psi, 3),
            Err(PropagationError::BranchTooShort(4))
        ));
    }

    #[test]
    fn model_documents_round_trip() {
        let sig = unary_sig();
        let seed = BiTheory::new(["c".into()], [f(&sig, "P(c)")], [], 2);
        let model = build_canonical_from(&seed, &sig, 2, 6, &BuildCaps::default()).unwrap();
        let text = model.to_json().to_string();
        let back = CanonicalModel::from_json(&text).unwrap();
        assert_eq!(back.worlds, model.worlds);
        assert_eq!(back.frame.world_count(), model.frame.world_count());
        let scan = semantic_lemma_scan(&back).unwrap();
        assert!(scan.mismatches.is_empty());
    }
}
