//! Volpin frames: finite rooted trees of worlds with growing domains,
//! persistent predicate valuations, persistent partial function graphs, and
//! fixed constant interpretations.
//!
//! Persistence is propagated eagerly at build time (setting an atom at `w`
//! sets it at all descendants), so [`VolpinFrame::validate`] is a pure
//! structural check and forcing evaluation stays local to a world. A
//! finalized frame is immutable.

use crate::syntax::{Signature, Term};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub type WorldId = usize;
pub type ElementId = usize;

/// One node of the frame tree. `domain` is D_w; `active` is δ(w) (defaults
/// to the full domain and is not used by forcing); `atoms` lists the
/// predicate-valuation entries with value 1; `fn_entries` is the partial
/// function graph λ at this world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub id: WorldId,
    pub parent: Option<WorldId>,
    pub depth: usize,
    pub domain: BTreeSet<ElementId>,
    pub active: BTreeSet<ElementId>,
    pub atoms: BTreeSet<(String, Vec<ElementId>)>,
    pub fn_entries: BTreeMap<(String, Vec<ElementId>), ElementId>,
}

/// A validated Volpin frame. Worlds are indexed by id (`worlds[i].id == i`);
/// world 0 is the root. Constant interpretations are global because κ is
/// constant across worlds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VolpinFrame {
    pub signature: Signature,
    /// Global element pool: ids are 0..elements.
    pub elements: usize,
    pub(crate) worlds: Vec<World>,
    pub(crate) children: Vec<Vec<WorldId>>,
    pub constants: BTreeMap<String, ElementId>,
}

/// First violated frame invariant, with the offending world and witness.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameViolation {
    #[error("not a rooted tree: {detail} (world {world})")]
    NotATree { world: WorldId, detail: String },
    #[error("domain monotonicity: element {element} present at world {parent} but missing at child {world}")]
    DomainMonotonicity { world: WorldId, parent: WorldId, element: ElementId },
    #[error("active set of world {world} contains {element} outside its domain")]
    ActiveOutsideDomain { world: WorldId, element: ElementId },
    #[error("world {world} valuates {atom:?} on a tuple outside its domain")]
    AtomOutsideDomain { world: WorldId, atom: (String, Vec<ElementId>) },
    #[error("world {world} valuates undeclared or wrong-arity predicate entry {atom:?}")]
    BadAtomSymbol { world: WorldId, atom: (String, Vec<ElementId>) },
    #[error("predicate persistence: {atom:?} holds at world {parent} but not at child {world}")]
    PredicatePersistence { world: WorldId, parent: WorldId, atom: (String, Vec<ElementId>) },
    #[error("world {world} has function entry {entry:?} with arguments or value outside its domain")]
    FnOutsideDomain { world: WorldId, entry: (String, Vec<ElementId>) },
    #[error("world {world} has undeclared or wrong-arity function entry {entry:?}")]
    BadFnSymbol { world: WorldId, entry: (String, Vec<ElementId>) },
    #[error("function persistence: entry {entry:?} at world {parent} is missing or changed at child {world}")]
    FunctionPersistence { world: WorldId, parent: WorldId, entry: (String, Vec<ElementId>) },
    #[error("one-step generation: world {world} newly defines {entry:?} on arguments not all in the parent domain")]
    OneStepGeneration { world: WorldId, entry: (String, Vec<ElementId>) },
    #[error("one-step generation: root defines {entry:?} on arguments that are not constant denotations")]
    RootFnBeyondConstants { entry: (String, Vec<ElementId>) },
    #[error("constant `{name}` has no interpretation")]
    ConstantMissing { name: String },
    #[error("constant `{name}` denotes {element}, which is outside the root domain")]
    ConstantOutsideRoot { name: String, element: ElementId },
    #[error("undeclared constant `{name}` is interpreted")]
    UndeclaredConstant { name: String },
}

/// Errors from builder operations and the frame file loader.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("unknown world id {0}")]
    UnknownWorld(WorldId),
    #[error("unknown element id {0}")]
    UnknownElement(ElementId),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("`{name}` expects {expected} arguments, got {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("function entry already defined with a different value")]
    ConflictingFunctionEntry,
    #[error("invariant violation: {0}")]
    Violation(#[from] FrameViolation),
    #[error("malformed frame file: {0}")]
    Format(String),
}

/// `slice` failure: some maximal branch is shorter than the requested depth.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("branch too short: leaf world {leaf} has depth {depth}, need {want}")]
pub struct BranchTooShort {
    pub leaf: WorldId,
    pub depth: usize,
    pub want: usize,
}

impl VolpinFrame {
    pub fn root(&self) -> WorldId {
        0
    }

    pub fn world(&self, w: WorldId) -> &World {
        &self.worlds[w]
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> impl Iterator<Item = &World> {
        self.worlds.iter()
    }

    pub fn children(&self, w: WorldId) -> &[WorldId] {
        &self.children[w]
    }

    pub fn max_depth(&self) -> usize {
        self.worlds.iter().map(|w| w.depth).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<WorldId> {
        (0..self.worlds.len()).filter(|&w| self.children[w].is_empty()).collect()
    }

    /// Strict ancestors of `w`, ordered root first.
    pub fn ancestors(&self, w: WorldId) -> Vec<WorldId> {
        let mut up = Vec::new();
        let mut cur = self.worlds[w].parent;
        while let Some(p) = cur {
            up.push(p);
            cur = self.worlds[p].parent;
        }
        up.reverse();
        up
    }

    /// The upward cone {v : w ≤ v} — all extensions of `w`, including `w`.
    pub fn extensions(&self, w: WorldId) -> Result<Vec<WorldId>, FrameError> {
        if w >= self.worlds.len() {
            return Err(FrameError::UnknownWorld(w));
        }
        let mut out = Vec::new();
        let mut stack = vec![w];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out.sort_unstable();
        Ok(out)
    }

    /// All worlds at depth exactly `k`. Errors if any maximal branch stops
    /// short of `k` — beyond a leaf, nothing exists.
    pub fn slice(&self, k: usize) -> Result<Vec<WorldId>, BranchTooShort> {
        for &leaf in &self.leaves() {
            let d = self.worlds[leaf].depth;
            if d < k {
                return Err(BranchTooShort { leaf, depth: d, want: k });
            }
        }
        Ok((0..self.worlds.len()).filter(|&w| self.worlds[w].depth == k).collect())
    }

    /// Evaluates a term at a world: constants via κ, variables via `env`,
    /// applications via the world's λ entries. `None` means "does not denote
    /// here" — element literals outside D_w and missing λ entries propagate
    /// undefinedness.
    pub fn eval_term(
        &self,
        w: WorldId,
        t: &Term,
        env: &BTreeMap<String, ElementId>,
    ) -> Option<ElementId> {
        match t {
            Term::Var(v) => env.get(v).copied().filter(|e| self.worlds[w].domain.contains(e)),
            Term::Const(c) => {
                self.constants.get(c).copied().filter(|e| self.worlds[w].domain.contains(e))
            }
            Term::Elem(e) => {
                if self.worlds[w].domain.contains(e) {
                    Some(*e)
                } else {
                    None
                }
            }
            Term::App(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_term(w, a, env)?);
                }
                self.worlds[w].fn_entries.get(&(f.clone(), vals)).copied()
            }
        }
    }

    pub fn atom_holds(&self, w: WorldId, pred: &str, tuple: &[ElementId]) -> bool {
        self.worlds[w].atoms.contains(&(pred.to_string(), tuple.to_vec()))
    }

    /// Checks every frame invariant, reporting the first violation in a
    /// deterministic order (worlds by id, entries in sorted order).
    pub fn validate(&self) -> Result<(), FrameViolation> {
        let n = self.worlds.len();
        if n == 0 {
            return Err(FrameViolation::NotATree { world: 0, detail: "no worlds".into() });
        }
        for (i, w) in self.worlds.iter().enumerate() {
            if w.id != i {
                return Err(FrameViolation::NotATree {
                    world: i,
                    detail: format!("world at index {i} has id {}", w.id),
                });
            }
        }
        if self.worlds[0].parent.is_some() {
            return Err(FrameViolation::NotATree { world: 0, detail: "root has a parent".into() });
        }
        if self.worlds[0].depth != 0 {
            return Err(FrameViolation::NotATree { world: 0, detail: "root depth is not 0".into() });
        }
        for w in &self.worlds[1..] {
            match w.parent {
                None => {
                    return Err(FrameViolation::NotATree {
                        world: w.id,
                        detail: "second root".into(),
                    })
                }
                Some(p) if p >= n => {
                    return Err(FrameViolation::NotATree {
                        world: w.id,
                        detail: format!("parent {p} does not exist"),
                    })
                }
                Some(p) => {
                    if w.depth != self.worlds[p].depth + 1 {
                        return Err(FrameViolation::NotATree {
                            world: w.id,
                            detail: format!(
                                "depth {} is not parent depth {} + 1",
                                w.depth, self.worlds[p].depth
                            ),
                        });
                    }
                }
            }
        }

        // constants: total on declared names, declared, within the root domain
        for name in &self.signature.constants {
            match self.constants.get(name) {
                None => return Err(FrameViolation::ConstantMissing { name: name.clone() }),
                Some(&e) => {
                    if !self.worlds[0].domain.contains(&e) {
                        return Err(FrameViolation::ConstantOutsideRoot {
                            name: name.clone(),
                            element: e,
                        });
                    }
                }
            }
        }
        for name in self.constants.keys() {
            if !self.signature.has_constant(name) {
                return Err(FrameViolation::UndeclaredConstant { name: name.clone() });
            }
        }

        let const_denotations: BTreeSet<ElementId> = self.constants.values().copied().collect();

        for w in &self.worlds {
            for &e in &w.domain {
                if e >= self.elements {
                    return Err(FrameViolation::NotATree {
                        world: w.id,
                        detail: format!("domain element {e} outside the element pool"),
                    });
                }
            }
            for &e in &w.active {
                if !w.domain.contains(&e) {
                    return Err(FrameViolation::ActiveOutsideDomain { world: w.id, element: e });
                }
            }
            for atom in &w.atoms {
                match self.signature.predicate_arity(&atom.0) {
                    Some(a) if a == atom.1.len() => {}
                    _ => {
                        return Err(FrameViolation::BadAtomSymbol {
                            world: w.id,
                            atom: atom.clone(),
                        })
                    }
                }
                if !atom.1.iter().all(|e| w.domain.contains(e)) {
                    return Err(FrameViolation::AtomOutsideDomain {
                        world: w.id,
                        atom: atom.clone(),
                    });
                }
            }
            for (key, val) in &w.fn_entries {
                match self.signature.function_arity(&key.0) {
                    Some(a) if a == key.1.len() => {}
                    _ => {
                        return Err(FrameViolation::BadFnSymbol { world: w.id, entry: key.clone() })
                    }
                }
                if !key.1.iter().all(|e| w.domain.contains(e)) || !w.domain.contains(val) {
                    return Err(FrameViolation::FnOutsideDomain { world: w.id, entry: key.clone() });
                }
            }

            match w.parent {
                None => {
                    // root one-step rule: λ only on constants' denotations
                    for key in w.fn_entries.keys() {
                        if !key.1.iter().all(|e| const_denotations.contains(e)) {
                            return Err(FrameViolation::RootFnBeyondConstants {
                                entry: key.clone(),
                            });
                        }
                    }
                }
                Some(p) => {
                    let parent = &self.worlds[p];
                    for &e in &parent.domain {
                        if !w.domain.contains(&e) {
                            return Err(FrameViolation::DomainMonotonicity {
                                world: w.id,
                                parent: p,
                                element: e,
                            });
                        }
                    }
                    for atom in &parent.atoms {
                        if !w.atoms.contains(atom) {
                            return Err(FrameViolation::PredicatePersistence {
                                world: w.id,
                                parent: p,
                                atom: atom.clone(),
                            });
                        }
                    }
                    for (key, val) in &parent.fn_entries {
                        if w.fn_entries.get(key) != Some(val) {
                            return Err(FrameViolation::FunctionPersistence {
                                world: w.id,
                                parent: p,
                                entry: key.clone(),
                            });
                        }
                    }
                    for key in w.fn_entries.keys() {
                        if !parent.fn_entries.contains_key(key)
                            && !key.1.iter().all(|e| parent.domain.contains(e))
                        {
                            return Err(FrameViolation::OneStepGeneration {
                                world: w.id,
                                entry: key.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes to the frame file format (JSON).
    pub fn to_json(&self) -> serde_json::Value {
        let worlds: Vec<serde_json::Value> = self
            .worlds
            .iter()
            .map(|w| {
                let mut obj = serde_json::json!({
                    "id": w.id,
                    "parent": w.parent,
                    "domain": w.domain.iter().collect::<Vec<_>>(),
                    "atoms": w.atoms.iter().collect::<Vec<_>>(),
                    "fn_entries": w
                        .fn_entries
                        .iter()
                        .map(|((f, args), v)| (f, args, v))
                        .collect::<Vec<_>>(),
                });
                if w.active != w.domain {
                    obj["active"] = serde_json::json!(w.active.iter().collect::<Vec<_>>());
                }
                if w.id == 0 {
                    obj["constants"] = serde_json::json!(self.constants);
                }
                obj
            })
            .collect();
        serde_json::json!({
            "signature": self.signature,
            "elements": self.elements,
            "worlds": worlds,
        })
    }

    /// Parses and validates a frame file; rejects invalid frames with the
    /// violation report. Unknown top-level fields are tolerated.
    pub fn from_json(text: &str) -> Result<VolpinFrame, FrameError> {
        let file: FrameFile =
            serde_json::from_str(text).map_err(|e| FrameError::Format(e.to_string()))?;
        VolpinFrame::from_file(file)
    }

    fn from_file(file: FrameFile) -> Result<VolpinFrame, FrameError> {
        let mut worlds_sorted = file.worlds;
        worlds_sorted.sort_by_key(|w| w.id);
        for (i, w) in worlds_sorted.iter().enumerate() {
            if w.id != i {
                return Err(FrameError::Format(format!(
                    "world ids must be exactly 0..{}, found {}",
                    worlds_sorted.len(),
                    w.id
                )));
            }
        }
        let n = worlds_sorted.len();
        if n == 0 {
            return Err(FrameError::Format("no worlds".into()));
        }
        // compute depths by chasing parents, detecting cycles
        let mut depths = vec![None::<usize>; n];
        for start in 0..n {
            if depths[start].is_some() {
                continue;
            }
            let mut chain = Vec::new();
            let mut cur = start;
            // depth of the first chain element, counting from the root or
            // from the nearest ancestor whose depth is already known
            let base = loop {
                if let Some(d) = depths[cur] {
                    break d + 1;
                }
                chain.push(cur);
                if chain.len() > n {
                    return Err(FrameError::Format("parent cycle".into()));
                }
                match worlds_sorted[cur].parent {
                    None => break 0,
                    Some(p) if p >= n => {
                        return Err(FrameError::Format(format!("parent {p} does not exist")))
                    }
                    Some(p) => cur = p,
                }
            };
            let mut d = base;
            for &w in chain.iter().rev() {
                depths[w] = Some(d);
                d += 1;
            }
        }
        let mut constants = BTreeMap::new();
        let mut worlds = Vec::with_capacity(n);
        for (i, wf) in worlds_sorted.into_iter().enumerate() {
            if let Some(cs) = wf.constants {
                if wf.parent.is_some() {
                    return Err(FrameError::Format(
                        "constants may appear only on the root world".into(),
                    ));
                }
                constants = cs;
            }
            let domain: BTreeSet<ElementId> = wf.domain.into_iter().collect();
            let active: BTreeSet<ElementId> = match wf.active {
                Some(a) => a.into_iter().collect(),
                None => domain.clone(),
            };
            worlds.push(World {
                id: wf.id,
                parent: wf.parent,
                depth: depths[i].unwrap_or(0),
                domain,
                active,
                atoms: wf.atoms.into_iter().collect(),
                fn_entries: wf.fn_entries.into_iter().map(|(f, a, v)| ((f, a), v)).collect(),
            });
        }
        let mut children = vec![Vec::new(); n];
        for w in &worlds {
            if let Some(p) = w.parent {
                children[p].push(w.id);
            }
        }
        let frame = VolpinFrame {
            signature: file.signature,
            elements: file.elements,
            worlds,
            children,
            constants,
        };
        frame.validate()?;
        Ok(frame)
    }
}

#[derive(Serialize, Deserialize)]
struct WorldFile {
    id: usize,
    parent: Option<usize>,
    domain: Vec<usize>,
    #[serde(default)]
    active: Option<Vec<usize>>,
    #[serde(default)]
    atoms: Vec<(String, Vec<usize>)>,
    #[serde(default)]
    fn_entries: Vec<(String, Vec<usize>, usize)>,
    #[serde(default)]
    constants: Option<BTreeMap<String, usize>>,
}

#[derive(Serialize, Deserialize)]
struct FrameFile {
    signature: Signature,
    elements: usize,
    worlds: Vec<WorldFile>,
}

/// Incremental frame construction. Every mutation either preserves all frame
/// invariants or is rejected with the violation it would cause; persistence
/// is enforced by automatic propagation to descendants.
#[derive(Debug, Clone)]
pub struct FrameBuilder {
    signature: Signature,
    elements: usize,
    worlds: Vec<World>,
    children: Vec<Vec<WorldId>>,
    constants: BTreeMap<String, ElementId>,
}

impl FrameBuilder {
    /// Starts a frame with a lone root world and an empty element pool.
    pub fn new(signature: Signature) -> Self {
        FrameBuilder {
            signature,
            elements: 0,
            worlds: vec![World {
                id: 0,
                parent: None,
                depth: 0,
                domain: BTreeSet::new(),
                active: BTreeSet::new(),
                atoms: BTreeSet::new(),
                fn_entries: BTreeMap::new(),
            }],
            children: vec![Vec::new()],
            constants: BTreeMap::new(),
        }
    }

    /// Allocates a fresh element in the global pool (not yet in any domain).
    pub fn add_element(&mut self) -> ElementId {
        self.elements += 1;
        self.elements - 1
    }

    fn check_world(&self, w: WorldId) -> Result<(), FrameError> {
        if w < self.worlds.len() {
            Ok(())
        } else {
            Err(FrameError::UnknownWorld(w))
        }
    }

    /// Adds a child world under `parent`, inheriting its domain, atoms, and
    /// function entries (eager persistence).
    pub fn add_world(&mut self, parent: WorldId) -> Result<WorldId, FrameError> {
        self.check_world(parent)?;
        let id = self.worlds.len();
        let p = &self.worlds[parent];
        let w = World {
            id,
            parent: Some(parent),
            depth: p.depth + 1,
            domain: p.domain.clone(),
            active: p.domain.clone(),
            atoms: p.atoms.clone(),
            fn_entries: p.fn_entries.clone(),
        };
        self.worlds.push(w);
        self.children.push(Vec::new());
        self.children[parent].push(id);
        Ok(id)
    }

    fn descendants_inclusive(&self, w: WorldId) -> Vec<WorldId> {
        let mut out = Vec::new();
        let mut stack = vec![w];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter());
        }
        out
    }

    /// Adds elements to D_w and, by monotonicity, to every descendant's
    /// domain. New elements also join the active sets by default.
    pub fn extend_domain(&mut self, w: WorldId, elems: &[ElementId]) -> Result<(), FrameError> {
        self.check_world(w)?;
        for &e in elems {
            if e >= self.elements {
                return Err(FrameError::UnknownElement(e));
            }
        }
        for v in self.descendants_inclusive(w) {
            let world = &mut self.worlds[v];
            world.domain.extend(elems.iter().copied());
            world.active.extend(elems.iter().copied());
        }
        Ok(())
    }

    /// Sets χ(pred, tuple) = 1 at `w` and, by persistence, at every
    /// descendant. The tuple must live in D_w.
    pub fn set_atom(
        &mut self,
        w: WorldId,
        pred: &str,
        tuple: &[ElementId],
    ) -> Result<(), FrameError> {
        self.check_world(w)?;
        match self.signature.predicate_arity(pred) {
            None => return Err(FrameError::UndeclaredSymbol(pred.to_string())),
            Some(a) if a != tuple.len() => {
                return Err(FrameError::ArityMismatch {
                    name: pred.to_string(),
                    expected: a,
                    found: tuple.len(),
                })
            }
            Some(_) => {}
        }
        if !tuple.iter().all(|e| self.worlds[w].domain.contains(e)) {
            return Err(FrameError::Violation(FrameViolation::AtomOutsideDomain {
                world: w,
                atom: (pred.to_string(), tuple.to_vec()),
            }));
        }
        for v in self.descendants_inclusive(w) {
            self.worlds[v].atoms.insert((pred.to_string(), tuple.to_vec()));
        }
        Ok(())
    }

    /// Defines λ_f(args) = val at `w` and every descendant. Enforces the
    /// one-step generation rule: at a non-root world the arguments must
    /// already exist in the parent's domain; at the root they must be
    /// constant denotations.
    pub fn define_fn(
        &mut self,
        w: WorldId,
        fname: &str,
        args: &[ElementId],
        val: ElementId,
    ) -> Result<(), FrameError> {
        self.check_world(w)?;
        match self.signature.function_arity(fname) {
            None => return Err(FrameError::UndeclaredSymbol(fname.to_string())),
            Some(a) if a != args.len() => {
                return Err(FrameError::ArityMismatch {
                    name: fname.to_string(),
                    expected: a,
                    found: args.len(),
                })
            }
            Some(_) => {}
        }
        let entry = (fname.to_string(), args.to_vec());
        let world = &self.worlds[w];
        if !args.iter().all(|e| world.domain.contains(e)) || !world.domain.contains(&val) {
            return Err(FrameError::Violation(FrameViolation::FnOutsideDomain {
                world: w,
                entry,
            }));
        }
        if let Some(&existing) = world.fn_entries.get(&entry) {
            if existing == val {
                return Ok(());
            }
            return Err(FrameError::ConflictingFunctionEntry);
        }
        match world.parent {
            None => {
                let denotations: BTreeSet<ElementId> = self.constants.values().copied().collect();
                if !args.iter().all(|e| denotations.contains(e)) {
                    return Err(FrameError::Violation(FrameViolation::RootFnBeyondConstants {
                        entry,
                    }));
                }
            }
            Some(p) => {
                if !args.iter().all(|e| self.worlds[p].domain.contains(e)) {
                    return Err(FrameError::Violation(FrameViolation::OneStepGeneration {
                        world: w,
                        entry,
                    }));
                }
            }
        }
        for v in self.descendants_inclusive(w) {
            if let Some(&existing) = self.worlds[v].fn_entries.get(&entry) {
                if existing != val {
                    return Err(FrameError::ConflictingFunctionEntry);
                }
            }
        }
        for v in self.descendants_inclusive(w) {
            self.worlds[v].fn_entries.insert(entry.clone(), val);
        }
        Ok(())
    }

    /// Interprets constant `c` as `elem` (κ is global). The element must be
    /// in the root domain so the constant denotes everywhere.
    pub fn set_constant(&mut self, c: &str, elem: ElementId) -> Result<(), FrameError> {
        if !self.signature.has_constant(c) {
            return Err(FrameError::UndeclaredSymbol(c.to_string()));
        }
        if !self.worlds[0].domain.contains(&elem) {
            return Err(FrameError::Violation(FrameViolation::ConstantOutsideRoot {
                name: c.to_string(),
                element: elem,
            }));
        }
        self.constants.insert(c.to_string(), elem);
        Ok(())
    }

    /// Restricts δ(w) to a subset of the domain (forcing ignores δ; it is
    /// carried for completeness).
    pub fn set_active(&mut self, w: WorldId, elems: &[ElementId]) -> Result<(), FrameError> {
        self.check_world(w)?;
        for &e in elems {
            if !self.worlds[w].domain.contains(&e) {
                return Err(FrameError::Violation(FrameViolation::ActiveOutsideDomain {
                    world: w,
                    element: e,
                }));
            }
        }
        self.worlds[w].active = elems.iter().copied().collect();
        Ok(())
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn domain_of(&self, w: WorldId) -> Option<&BTreeSet<ElementId>> {
        self.worlds.get(w).map(|world| &world.domain)
    }

    /// Finalizes the frame, revalidating every invariant.
    pub fn build(self) -> Result<VolpinFrame, FrameError> {
        let frame = VolpinFrame {
            signature: self.signature,
            elements: self.elements,
            worlds: self.worlds,
            children: self.children,
            constants: self.constants,
        };
        frame.validate()?;
        Ok(frame)
    }
}
