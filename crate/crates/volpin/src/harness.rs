//! Test harness: an independent memo-free forcing evaluator, seeded random
//! generators for frames and formulas, exhaustive small-instance enumerators,
//! and fault injection for the self-test suites.
//!
//! The naive evaluator deliberately shares no code with [`crate::forcing`]
//! (it even re-implements term evaluation) so that the two can serve as
//! mutual oracles.

use crate::frame::{ElementId, FrameBuilder, VolpinFrame, WorldId};
use crate::syntax::{Formula, Signature, Term, Theory};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Memo-free term evaluation: constants via κ, applications via λ at `w`.
fn naive_eval(frame: &VolpinFrame, w: WorldId, t: &Term) -> Option<ElementId> {
    let world = frame.world(w);
    match t {
        Term::Var(_) => None,
        Term::Const(c) => {
            let e = *frame.constants.get(c)?;
            if world.domain.contains(&e) {
                Some(e)
            } else {
                None
            }
        }
        Term::Elem(e) => {
            if world.domain.contains(e) {
                Some(*e)
            } else {
                None
            }
        }
        Term::App(f, args) => {
            let mut vals = Vec::new();
            for a in args {
                vals.push(naive_eval(frame, w, a)?);
            }
            world.fn_entries.get(&(f.clone(), vals)).copied()
        }
    }
}

fn proper_ancestors(frame: &VolpinFrame, w: WorldId) -> Vec<WorldId> {
    frame.ancestors(w)
}

fn cone(frame: &VolpinFrame, w: WorldId) -> Vec<WorldId> {
    frame.extensions(w).expect("world exists")
}

/// Reference implementation of the forcing clauses: direct recursion, no
/// memoization, no sharing with the production evaluator.
pub fn naive_forces(frame: &VolpinFrame, w: WorldId, phi: &Formula) -> bool {
    match phi {
        Formula::Atom(p, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for t in args {
                match naive_eval(frame, w, t) {
                    Some(v) => vals.push(v),
                    None => return false,
                }
            }
            frame.atom_holds(w, p, &vals)
        }
        Formula::Falsum => false,
        Formula::And(a, b) => {
            let anc = proper_ancestors(frame, w);
            anc.iter().any(|&w1| naive_forces(frame, w1, a))
                && anc.iter().any(|&w2| naive_forces(frame, w2, b))
        }
        Formula::Or(a, b) => proper_ancestors(frame, w)
            .iter()
            .any(|&w1| naive_forces(frame, w1, a) || naive_forces(frame, w1, b)),
        Formula::Implies(a, b) => cone(frame, w).iter().all(|&w1| {
            let antecedent_ready =
                proper_ancestors(frame, w1).iter().any(|&w2| naive_forces(frame, w2, a));
            !antecedent_ready || naive_forces(frame, w1, b)
        }),
        Formula::Exists(x, body) => proper_ancestors(frame, w).iter().any(|&w1| {
            frame
                .world(w1)
                .domain
                .iter()
                .any(|&el| naive_forces(frame, w1, &body.substitute(x, &Term::Elem(el))))
        }),
        Formula::Forall(x, body) => cone(frame, w).iter().all(|&w1| {
            frame
                .world(w1)
                .domain
                .iter()
                .all(|&el| naive_forces(frame, w1, &body.substitute(x, &Term::Elem(el))))
        }),
    }
}

/// All parent vectors of rooted trees on `n` nodes where node i's parent is
/// some j < i — every rooted tree shape on labeled, depth-compatible ids.
pub fn parent_vectors(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if acc.len() == n - 1 {
            out.push(acc.clone());
            return;
        }
        let next = acc.len() + 1;
        for p in 0..next {
            acc.push(p);
            go(n, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    if n == 1 {
        out.push(Vec::new());
        return out;
    }
    go(n, &mut Vec::new(), &mut out);
    out
}

/// Builds a frame over {P/1, c} from a parent vector: one element known to
/// every world, `P` made true from each world in `p_from` downward.
pub fn frame_from_parent_vector(
    parents: &[usize],
    p_from: &[usize],
) -> Result<VolpinFrame, crate::frame::FrameError> {
    let sig = Signature::build(&[("P", 1)], &[], &["c"]).unwrap();
    let mut b = FrameBuilder::new(sig);
    let e = b.add_element();
    b.extend_domain(0, &[e])?;
    b.set_constant("c", e)?;
    for &p in parents {
        b.add_world(p)?;
    }
    for &w in p_from {
        b.set_atom(w, "P", &[e])?;
    }
    b.build()
}

/// Seeded random valid frame over `sig`: random tree shape, random domain
/// growth, random persistent atoms, random one-step function entries.
pub fn random_frame(sig: &Signature, max_worlds: usize, rng: &mut ChaCha8Rng) -> VolpinFrame {
    let mut b = FrameBuilder::new(sig.clone());
    let n_worlds = rng.gen_range(1..=max_worlds.max(1));
    // root domain: enough elements for the constants, possibly more
    let root_elems = rng.gen_range(sig.constants.len().max(1)..=sig.constants.len() + 2);
    let mut elems: Vec<ElementId> = (0..root_elems).map(|_| b.add_element()).collect();
    b.extend_domain(0, &elems).expect("fresh elements");
    for (i, c) in sig.constants.iter().enumerate() {
        // constants may share denotations
        let e = if rng.gen_bool(0.8) { elems[i % elems.len()] } else { elems[0] };
        b.set_constant(c, e).expect("constant in root domain");
    }
    let mut worlds = vec![0usize];
    for _ in 1..n_worlds {
        let parent = *worlds.choose(rng).expect("nonempty");
        let w = b.add_world(parent).expect("parent exists");
        worlds.push(w);
        // grow the domain at this world sometimes
        if rng.gen_bool(0.5) {
            let fresh = b.add_element();
            elems.push(fresh);
            b.extend_domain(w, &[fresh]).expect("fresh element");
        }
    }
    // persistent atoms: pick random (world, predicate, tuple in that world's domain)
    let atom_attempts = rng.gen_range(0..=2 * n_worlds);
    for _ in 0..atom_attempts {
        let &w = worlds.choose(rng).expect("nonempty");
        if sig.predicates.is_empty() {
            break;
        }
        let (p, arity) = sig.predicates.choose(rng).unwrap().clone();
        let dom: Vec<ElementId> = b.domain_of(w).expect("world exists").iter().copied().collect();
        if dom.is_empty() && arity > 0 {
            continue;
        }
        let tuple: Vec<ElementId> =
            (0..arity).map(|_| *dom.choose(rng).expect("nonempty domain")).collect();
        b.set_atom(w, &p, &tuple).expect("tuple in domain");
    }
    // one-step function entries: only on arguments from the parent's domain
    let fn_attempts = if sig.functions.is_empty() { 0 } else { rng.gen_range(0..=n_worlds) };
    for _ in 0..fn_attempts {
        let &w = worlds.choose(rng).expect("nonempty");
        let (f, arity) = sig.functions.choose(rng).unwrap().clone();
        let world_dom: Vec<ElementId> =
            b.domain_of(w).expect("world exists").iter().copied().collect();
        if world_dom.is_empty() {
            continue;
        }
        let args: Vec<ElementId> = (0..arity)
            .map(|_| *world_dom.choose(rng).expect("nonempty domain"))
            .collect();
        let val = *world_dom.choose(rng).expect("nonempty domain");
        // may violate one-step generation; simply skip rejected entries
        let _ = b.define_fn(w, &f, &args, val);
    }
    b.build().expect("random construction follows builder rules")
}

/// Seeded random closed formula over `sig` with complexity ≤ `max_complexity`.
pub fn random_formula(
    sig: &Signature,
    max_complexity: usize,
    rng: &mut ChaCha8Rng,
) -> Formula {
    fn random_term(
        sig: &Signature,
        vars: &[String],
        height: usize,
        rng: &mut ChaCha8Rng,
    ) -> Term {
        let leaf_only = height <= 1 || sig.functions.is_empty();
        if !leaf_only && rng.gen_bool(0.4) {
            let (f, arity) = sig.functions.choose(rng).unwrap().clone();
            let args = (0..arity).map(|_| random_term(sig, vars, height - 1, rng)).collect();
            return Term::App(f, args);
        }
        let n_choices = vars.len() + sig.constants.len();
        if n_choices == 0 {
            // no leaves available: fall back to a variable-free dummy; the
            // caller only asks for terms when some leaf exists
            return Term::Const("_unreachable".into());
        }
        let pick = rng.gen_range(0..n_choices);
        if pick < vars.len() {
            Term::Var(vars[pick].clone())
        } else {
            Term::Const(sig.constants[pick - vars.len()].clone())
        }
    }

    fn go(
        sig: &Signature,
        vars: &mut Vec<String>,
        budget: usize,
        rng: &mut ChaCha8Rng,
    ) -> Formula {
        let can_atom = !sig.predicates.is_empty()
            && (sig.predicates.iter().any(|(_, a)| *a == 0)
                || !vars.is_empty()
                || !sig.constants.is_empty());
        if budget <= 1 {
            if can_atom && rng.gen_bool(0.7) {
                let (p, arity) = sig
                    .predicates
                    .iter()
                    .filter(|(_, a)| *a == 0 || !vars.is_empty() || !sig.constants.is_empty())
                    .choose(rng)
                    .unwrap()
                    .clone();
                let args =
                    (0..arity).map(|_| random_term(sig, vars, budget.max(1), rng)).collect();
                return Formula::Atom(p, args);
            }
            return Formula::Falsum;
        }
        match rng.gen_range(0..6) {
            0 => Formula::and(go(sig, vars, budget - 1, rng), go(sig, vars, budget - 1, rng)),
            1 => Formula::or(go(sig, vars, budget - 1, rng), go(sig, vars, budget - 1, rng)),
            2 => Formula::implies(go(sig, vars, budget - 1, rng), go(sig, vars, budget - 1, rng)),
            3 => {
                let v = format!("x{}", vars.len());
                vars.push(v.clone());
                let body = go(sig, vars, budget - 1, rng);
                vars.pop();
                Formula::exists(&v, body)
            }
            4 => {
                let v = format!("x{}", vars.len());
                vars.push(v.clone());
                let body = go(sig, vars, budget - 1, rng);
                vars.pop();
                Formula::forall(&v, body)
            }
            _ => go(sig, vars, 1, rng),
        }
    }

    go(sig, &mut Vec::new(), max_complexity, rng)
}

/// Corrupts a valid frame in place for fault-injection tests: erases one
/// inherited atom from the deepest world that has one, breaking predicate
/// persistence (and thereby monotonicity of atomic forcing). Returns the
/// world it corrupted, or None if the frame has no inherited atoms.
pub fn corrupt_frame(frame: &mut VolpinFrame) -> Option<WorldId> {
    let ids: Vec<WorldId> = {
        let mut v: Vec<WorldId> = frame.worlds().map(|w| w.id).collect();
        v.sort_by_key(|&w| std::cmp::Reverse(frame.world(w).depth));
        v
    };
    for w in ids {
        let parent = match frame.world(w).parent {
            Some(p) => p,
            None => continue,
        };
        let inherited: Option<(String, Vec<ElementId>)> = frame
            .world(w)
            .atoms
            .iter()
            .find(|a| frame.world(parent).atoms.contains(*a))
            .cloned();
        if let Some(atom) = inherited {
            frame.worlds[w].atoms.remove(&atom);
            return Some(w);
        }
    }
    None
}

/// Parent vectors (see [`parent_vectors`]) whose trees place every leaf at
/// exactly `depth`: the uniform-depth frames the soundness bridge
/// quantifies over.
pub fn uniform_depth_vectors(depth: usize, max_nodes: usize) -> Vec<Vec<usize>> {
    if depth == 0 {
        return if max_nodes >= 1 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for n in (depth + 1)..=max_nodes {
        for parents in parent_vectors(n) {
            let mut node_depth = vec![0usize; n];
            let mut has_child = vec![false; n];
            for (i, &p) in parents.iter().enumerate() {
                node_depth[i + 1] = node_depth[p] + 1;
                has_child[p] = true;
            }
            if (0..n).all(|w| has_child[w] || node_depth[w] == depth) {
                out.push(parents);
            }
        }
    }
    out
}

/// One random depth-propagation instance satisfying every precondition by
/// construction: a frame whose branches all reach depth k1 + k2, a theory
/// of atoms true from depth ≤ k1 down (hence k1-forced), and a conclusion
/// with a proof from those atoms within depth k2. Returns
/// (frame, theory, k1, conclusion, k2).
pub fn propagation_case(
    rng: &mut ChaCha8Rng,
) -> (VolpinFrame, Theory, usize, Formula, usize) {
    let sig = Signature::build(&[("P", 1), ("Q", 1)], &[], &["c"]).unwrap();
    let atom_depth = rng.gen_range(0..=1usize);
    let k1 = atom_depth + rng.gen_range(0..=1usize);
    let k2 = rng.gen_range(1..=3usize);

    let mut b = FrameBuilder::new(sig.clone());
    let e = b.add_element();
    b.extend_domain(0, &[e]).expect("fresh element");
    b.set_constant("c", e).expect("constant in root domain");
    let mut depths = vec![0usize];
    let mut has_child = vec![false];
    for _ in 0..rng.gen_range(0..6usize) {
        let parent = rng.gen_range(0..depths.len());
        let w = b.add_world(parent).expect("parent exists");
        debug_assert_eq!(w, depths.len());
        depths.push(depths[parent] + 1);
        has_child.push(false);
        has_child[parent] = true;
    }
    // pad every leaf out to depth k1 + k2 so the slice there is total
    let target = k1 + k2;
    for w in 0..depths.len() {
        if has_child[w] || depths[w] >= target {
            continue;
        }
        let mut cur = w;
        for step in depths[w]..target {
            cur = b.add_world(cur).expect("parent exists");
            depths.push(step + 1);
        }
    }

    let start_worlds: Vec<usize> =
        (0..depths.len()).filter(|&w| depths[w] == atom_depth).collect();
    for &w in &start_worlds {
        for p in ["P", "Q"] {
            b.set_atom(w, p, &[e]).expect("element in domain");
        }
    }
    let frame = b.build().expect("construction follows builder rules");

    let p = Formula::atom("P", vec![Term::Const("c".into())]);
    let q = Formula::atom("Q", vec![Term::Const("c".into())]);
    let axioms = vec![p.clone(), q.clone()];
    let theory = Theory::new("propagation-case", sig, axioms).expect("closed atoms");

    let psi = match k2 {
        1 => [p.clone(), q.clone()][rng.gen_range(0..2)].clone(),
        2 => [
            Formula::and(p.clone(), q.clone()),
            Formula::or(p.clone(), q.clone()),
            Formula::implies(p.clone(), p.clone()),
        ][rng.gen_range(0..3)]
        .clone(),
        _ => [
            Formula::or(Formula::and(p.clone(), q.clone()), p.clone()),
            Formula::and(p.clone(), Formula::or(q.clone(), q.clone())),
            Formula::implies(q.clone(), Formula::and(p.clone(), q.clone())),
        ][rng.gen_range(0..3)]
        .clone(),
    };
    (frame, theory, k1, psi, k2)
}

/// A named frame, leaf, and formula batch shipped with the tool: the fuzzy
/// evaluator's worked examples. The acceptance suite and the CLI demo both
/// walk exactly these.
pub struct PackagedExample {
    pub name: &'static str,
    pub frame: VolpinFrame,
    pub leaf: WorldId,
    pub formulas: Vec<Formula>,
}

/// The packaged fuzzy-evaluation examples: a pure chain and a forked tree,
/// both over the 1-predicate/1-constant signature.
pub fn packaged_examples() -> Vec<PackagedExample> {
    let sig = Signature::build(&[("P", 1)], &[], &["c"]).unwrap();
    let f = |s: &str| crate::syntax::parse_formula(s, &sig).expect("example formula parses");
    let ladder = PackagedExample {
        name: "ladder",
        frame: frame_from_parent_vector(&[0, 1, 2, 3], &[1]).unwrap(),
        leaf: 4,
        formulas: vec![
            f("P(c)"),
            f("P(c) & P(c)"),
            f("(P(c) & P(c)) & P(c)"),
            f("P(c) | ~P(c)"),
            f("exists x. P(x)"),
            f("forall x. P(x)"),
            f("P(c) -> P(c)"),
            f("~P(c)"),
        ],
    };
    let fork = PackagedExample {
        name: "fork",
        frame: frame_from_parent_vector(&[0, 0, 1, 2, 3], &[1]).unwrap(),
        leaf: 5,
        formulas: vec![
            f("P(c)"),
            f("P(c) & P(c)"),
            f("exists x. P(x)"),
            f("P(c) | (P(c) -> false)"),
            f("~P(c)"),
        ],
    };
    vec![ladder, fork]
}

/// Upward-closed world sets of a tree (each set contains all descendants of
/// its members): used to enumerate every persistent single-atom valuation.
pub fn upward_closed_sets(frame: &VolpinFrame) -> Vec<BTreeSet<WorldId>> {
    // A valuation "P true from these worlds down" is determined by an
    // antichain of starting worlds; enumerating all subsets of worlds and
    // closing them upward (toward leaves) hits every upward-closed set.
    let n = frame.world_count();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let mut set = BTreeSet::new();
        for w in 0..n {
            if mask & (1 << w) != 0 {
                for v in frame.extensions(w).expect("world exists") {
                    set.insert(v);
                }
            }
        }
        if seen.insert(set.clone()) {
            out.push(set);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn parent_vector_counts_match_factorial_sums() {
        // trees on n labeled nodes with parent(i) < i: (n-1)! shapes
        assert_eq!(parent_vectors(1).len(), 1);
        assert_eq!(parent_vectors(2).len(), 1);
        assert_eq!(parent_vectors(3).len(), 2);
        assert_eq!(parent_vectors(4).len(), 6);
        assert_eq!(parent_vectors(5).len(), 24);
        assert_eq!(parent_vectors(6).len(), 120);
    }

    #[test]
    fn random_frames_are_valid() {
        let sig = Signature::build(&[("P", 1), ("Q", 2)], &[("S", 1)], &["c", "d"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let f = random_frame(&sig, 8, &mut rng);
            assert_eq!(f.validate(), Ok(()));
        }
    }

    #[test]
    fn random_formulas_are_closed_and_bounded() {
        let sig = Signature::build(&[("P", 1)], &[("S", 1)], &["c"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let f = random_formula(&sig, 5, &mut rng);
            assert!(f.is_closed(), "{f}");
            assert!(f.complexity() <= 5, "{f}");
        }
    }

    #[test]
    fn corrupt_frame_breaks_validation() {
        let mut f = frame_from_parent_vector(&[0, 1], &[0]).unwrap();
        assert_eq!(f.validate(), Ok(()));
        let touched = corrupt_frame(&mut f);
        assert!(touched.is_some());
        assert!(f.validate().is_err());
    }

    #[test]
    fn upward_closed_sets_on_chain() {
        let f = frame_from_parent_vector(&[0, 1], &[]).unwrap();
        let sets = upward_closed_sets(&f);
        // chain of 3: {}, {2}, {1,2}, {0,1,2}
        assert_eq!(sets.len(), 4);
    }

    #[test]
    fn uniform_depth_vectors_have_all_leaves_at_depth() {
        for depth in 1..=3 {
            let vecs = uniform_depth_vectors(depth, 6);
            assert!(!vecs.is_empty());
            for parents in &vecs {
                let frame = frame_from_parent_vector(parents, &[]).unwrap();
                for leaf in frame.leaves() {
                    assert_eq!(frame.world(leaf).depth, depth, "{parents:?}");
                }
            }
        }
        // depth 2, ≤ 4 nodes: chains 0-1-2 and the two labeled Y-shapes
        // 0-1-{2,3} plus 0-1-2 with 3 under 1 or 2 kept uniform
        let two = uniform_depth_vectors(2, 4);
        assert!(two.contains(&vec![0, 1]));
        assert!(two.iter().all(|p| p.len() <= 3));
    }

    #[test]
    fn propagation_cases_satisfy_their_preconditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let (frame, theory, k1, psi, k2) = propagation_case(&mut rng);
            assert_eq!(frame.validate(), Ok(()));
            assert!(frame.slice(k1 + k2).is_ok());
            let mut ctx = crate::forcing::ForcingContext::new(&frame);
            for ax in &theory.axioms {
                assert!(ctx.k_forces(k1, ax).unwrap(), "{ax} at {k1}");
            }
            assert!(psi.is_closed());
            assert!(psi.complexity() <= k2 + 1);
        }
    }

    #[test]
    fn packaged_examples_have_childless_leaves() {
        for ex in packaged_examples() {
            assert_eq!(ex.frame.validate(), Ok(()));
            assert!(ex.frame.children(ex.leaf).is_empty(), "{}", ex.name);
            assert!(ex.frame.world(ex.leaf).depth >= 1);
            assert!(!ex.formulas.is_empty());
        }
    }
}
